mod common;

use abspolar::harness::{
    count_ops, run_campaign, write_csv, Campaign, CampaignConfig, DecoderKind, CSV_HEADER,
};
use abspolar::CodeSpec;

use common::*;

fn small_code() -> CodeSpec {
    with_random_frozen(&random_transforms(6, 0.3, &mut rng(40)), 32, &mut rng(41))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn noiseless_campaign_has_no_errors() {
    let spec = small_code();
    for kind in [DecoderKind::Sc, DecoderKind::Scl] {
        let c = Campaign::new(kind, vec![1, 4], vec![60.0]).with_stop(500, 1);
        for p in run_campaign(&spec, &c).unwrap() {
            assert_eq!((p.frames, p.frame_errors), (500, 0), "{kind:?}");
            assert_eq!(p.ci().0, 0.0);
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = small_code();
    let c = Campaign::new(DecoderKind::Scl, vec![1, 2, 4], vec![1.0, 2.0]).with_stop(2000, 40).with_seed(9);
    let one = in_pool(1, || write_csv(&run_campaign(&spec, &c).unwrap()));
    let two = in_pool(2, || write_csv(&run_campaign(&spec, &c).unwrap()));
    let again = in_pool(1, || write_csv(&run_campaign(&spec, &c).unwrap()));
    assert_eq!(one, two);
    assert_eq!(one, again);
    assert!(one.starts_with(CSV_HEADER));
}

#[test]
fn fer_falls_with_snr() {
    let spec = small_code();
    let c = Campaign::new(DecoderKind::Sc, vec![1], vec![0.0, 1.5, 3.0, 4.5]).with_stop(20_000, 200);
    let points = run_campaign(&spec, &c).unwrap();
    for w in points.windows(2) {
        // the higher SNR point is not significantly worse
        assert!(w[1].ci().0 <= w[0].ci().1, "{} dB vs {} dB", w[0].snr_db, w[1].snr_db);
        assert!(w[1].fer() <= w[0].fer());
    }
}

#[test]
fn lists_do_not_hurt_on_average() {
    let spec = small_code();
    let c = Campaign::new(DecoderKind::Scl, vec![1, 8], vec![2.0]).with_stop(20_000, 200);
    let points = run_campaign(&spec, &c).unwrap();
    assert!(points[1].ci().0 <= points[0].ci().1);
}

#[test]
fn classical_decoders_agree_in_campaigns() {
    let spec = CodeSpec::classical(6, (1..=32).collect::<Vec<_>>()).unwrap();
    for (ours, theirs, list) in [
        (DecoderKind::Sc, DecoderKind::ArikanSc, 1),
        (DecoderKind::Scl, DecoderKind::ArikanScl, 4),
    ] {
        let run = |kind| {
            let c = Campaign::new(kind, vec![list], vec![1.0, 2.0]).with_stop(3000, 1000).with_seed(3);
            run_campaign(&spec, &c).unwrap()
        };
        let (a, b) = (run(ours), run(theirs));
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.frame_errors, q.frame_errors);
        }
    }
}

#[test]
fn op_counts() {
    let classical = CodeSpec::classical(7, (1..=64).collect::<Vec<_>>()).unwrap();
    let sc = count_ops(&classical, DecoderKind::Sc, 1, 50, 2.0, 1).unwrap();
    assert_eq!(sc.mean_additions() + sc.mean_comparisons(), (128 * 7) as f64);
    assert_eq!(sc.max_additions as f64, sc.mean_additions());
    let spec = small_code();
    let sc = count_ops(&spec, DecoderKind::Sc, 1, 50, 2.0, 1).unwrap();
    assert_eq!(sc.max_additions as f64, sc.mean_additions());
    let scl = count_ops(&spec, DecoderKind::Scl, 4, 50, 2.0, 1).unwrap();
    assert!(scl.mean_additions() > sc.mean_additions());
}

#[test]
fn config_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("code.toml"), "m = 2\nk = 2\nfrozen = [1, 2]\n").unwrap();
    let path = dir.join("campaign.toml");
    std::fs::write(
        &path,
        "spec = \"code.toml\"\ndecoder = \"arikan-scl\"\nlists = [2]\nsnr_db = [1.0]\n",
    )
    .unwrap();
    let cfg = CampaignConfig::load(&path).unwrap();
    assert_eq!(cfg.spec, dir.join("code.toml"));
    assert_eq!(cfg.stop.max_frames, 1_000_000);
    assert_eq!(cfg.stop.min_errors, 100);
    assert_eq!(cfg.campaign().decoder, DecoderKind::ArikanScl);
    std::fs::write(&path, "spec = \"code.toml\"\ndecoder = \"sc\"\nsnr_db = [1.0]\nframes = 3\n").unwrap();
    assert!(CampaignConfig::load(&path).is_err());
}

#[test]
fn invalid_campaigns_are_rejected() {
    let spec = small_code();
    assert!(run_campaign(&spec, &Campaign::new(DecoderKind::Sc, vec![1], vec![])).is_err());
    assert!(run_campaign(&spec, &Campaign::new(DecoderKind::Sc, vec![1], vec![f64::NAN])).is_err());
    assert!(run_campaign(&spec, &Campaign::new(DecoderKind::Scl, vec![0], vec![1.0])).is_err());
    assert!(run_campaign(&spec, &Campaign::new(DecoderKind::ArikanSc, vec![1], vec![1.0])).is_err());
}
