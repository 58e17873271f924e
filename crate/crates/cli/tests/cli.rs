use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_abspolar"))
}

fn specs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_small_spec_passes() {
    let out = run(bin().args(["verify", "--tables", "200", "--spec"]).arg(specs().join("abs_8_4.toml")));
    let text = stdout(&out);
    for check in ["kernels", "channel-recursion", "sc-oracle", "full-list-ml", "shortcuts"] {
        assert!(text.contains(&format!("PASS {check}")), "{check} missing:\n{text}");
    }
    assert!(!text.contains("FAIL"));
}

#[test]
fn encode_then_decode_round_trips() {
    let spec = specs().join("abs_8_4.toml");
    for format in ["bin", "hex"] {
        for msg in ["0000", "1011", "0111", "1111"] {
            let msg = if format == "hex" {
                format!("{:x}", u8::from_str_radix(msg, 2).unwrap())
            } else {
                msg.to_string()
            };
            let enc = run(bin().args(["encode", "--format", format, "--message", &msg, "--spec"]).arg(&spec));
            let word = stdout(&enc).trim().to_string();
            for list in ["1", "4"] {
                let dec = run(bin()
                    .args(["decode", "--format", format, "--list", list, "--codeword", &word, "--spec"])
                    .arg(&spec));
                assert_eq!(stdout(&dec).trim(), msg, "format {format} list {list}");
            }
        }
    }
}

#[test]
fn crc_code_round_trips_through_llr_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = specs().join("abs_1024_512_crc8.toml");
    let msg: String = (0..504).map(|i| if (i * 7) % 5 < 2 { '1' } else { '0' }).collect();
    let enc = run(bin().args(["encode", "--message", &msg, "--spec"]).arg(&spec));
    let word = stdout(&enc);
    let llrs: Vec<String> = word
        .trim()
        .chars()
        .enumerate()
        .map(|(i, c)| {
            // weak and strong correct-sign values
            let mag = if i % 3 == 0 { 0.7 } else { 4.0 };
            format!("{}", if c == '0' { mag } else { -mag })
        })
        .collect();
    let path = dir.path().join("llrs.txt");
    std::fs::write(&path, llrs.join(" ")).unwrap();
    let dec = run(bin().args(["decode", "--list", "8", "--spec"]).arg(&spec).arg("--llrs").arg(&path));
    assert_eq!(stdout(&dec).trim(), msg);
}

#[test]
fn simulate_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.toml");
    std::fs::write(
        &cfg,
        format!(
            "spec = {:?}\ndecoder = \"scl\"\nlists = [1, 2]\nsnr_db = [0.0, 1.0]\nseed = 5\n\n[stop]\nmax_frames = 600\nmin_errors = 50\n",
            specs().join("abs_8_4.toml")
        ),
    )
    .unwrap();
    let mut csvs = Vec::new();
    for threads in ["1", "2", "1"] {
        let out = dir.path().join(format!("out{}.csv", csvs.len()));
        run(bin().arg("simulate").arg("--config").arg(&cfg).args(["--threads", threads, "-o"]).arg(&out));
        csvs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0], csvs[2]);
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "snr_db,list,frames,frame_errors,fer,ci_lo,ci_hi,mean_adds,mean_cmps,seconds"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn flags_alone_define_a_campaign() {
    let out = run(bin()
        .args(["simulate", "--decoder", "sc", "--snr-db", "40", "--max-frames", "300", "--spec"])
        .arg(specs().join("abs_8_4.toml")));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    // zero-noise frames decode without error
    assert_eq!(&row[..4], ["40", "1", "300", "0"]);
}

#[test]
fn count_ops_reports_butterfly_count_for_classical_sc() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("classical.toml");
    std::fs::write(&spec, "m = 4\nk = 8\nfrozen = [1, 2, 3, 4, 5, 6, 9, 10]\n").unwrap();
    let out = run(bin().args(["count-ops", "--trials", "20", "--spec"]).arg(&spec));
    let text = stdout(&out);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[1] + row[2], 64.0);
}

#[test]
fn construct_budget_zero_is_classical() {
    let out = run(bin().args([
        "construct", "--m", "5", "--k", "16", "--trials", "1000", "--budget", "0",
    ]));
    let text = stdout(&out);
    assert!(text.contains("k = 16"));
    assert!(!text.contains("[[layers]]"), "{text}");
}

#[test]
fn failures_exit_nonzero_with_diagnostic() {
    let out = bin().args(["verify", "--spec", "/nonexistent/spec.toml"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("odd.toml");
    std::fs::write(&bad, "m = 3\nk = 4\nfrozen = [1, 2, 3, 4]\n\n[[layers]]\nlambda = 2\nswap = [1]\nadd = []\n").unwrap();
    let out = bin().arg("verify").arg("--spec").arg(&bad).output().unwrap();
    assert!(!out.status.success());

    let out = bin()
        .args(["encode", "--message", "10x1", "--spec"])
        .arg(specs().join("abs_8_4.toml"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("binary digit"));
}
