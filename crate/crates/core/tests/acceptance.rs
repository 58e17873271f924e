//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Criteria 7 and 8 simulate the shipped (1024, 512) codes and take
//! most of the time.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use abspolar::arikan::ArikanDecoder;
use abspolar::codespec::parse_spec;
use abspolar::harness::{run_campaign, write_csv, Campaign, CampaignConfig, DecoderKind, PointResult};
use abspolar::llr::Family;
use abspolar::oracle::{brute_ml, kernel_discrepancy, verify_lemma1, BinaryInputTable, CodeTables, DbiChannelTable, LemmaCase};
use abspolar::scl::{path_metric_update, split_and_prune};
use abspolar::{CodeSpec, DecoderOptions, ListConfig, ScDecoder, SclDecoder, SpecDraft};
use rand::Rng;

use common::*;

type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn spec_file(name: &str) -> CodeSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name);
    parse_spec(&std::fs::read_to_string(&path).expect("shipped spec")).expect("valid spec")
}

fn kernels() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst = Vec::new();
    for family in Family::ALL {
        let mut w = 0.0f64;
        for t in 0..1000 {
            let v = DbiChannelTable::random(2 + t % 3, &mut r);
            w = w.max(kernel_discrepancy(&v, family));
        }
        worst.push((family.name(), w));
    }
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        max <= 1e-9 && elapsed < Duration::from_secs(60),
        format!("9 families x 1000 tables, max |error| {max:.2e}, {elapsed:.1?}"),
    )
}

fn lemma1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(102);
    let mut worst = 0.0f64;
    let mut cases = BTreeSet::new();
    let mut specs: Vec<CodeSpec> = small_drafts().iter().map(|(_, d)| CodeSpec::new(d).unwrap()).collect();
    specs.push(fig2());
    for spec in &specs {
        for q in [2, 3] {
            let w = BinaryInputTable::random(q, &mut r);
            let ys: Vec<Vec<usize>> = (0..2).map(|_| (0..spec.n()).map(|_| r.random_range(0..q)).collect()).collect();
            let report = verify_lemma1(spec, &w, &ys).unwrap();
            worst = worst.max(report.max_abs);
            cases.extend(report.cases);
        }
    }
    let all: BTreeSet<LemmaCase> =
        [LemmaCase::I, LemmaCase::II, LemmaCase::III, LemmaCase::IV, LemmaCase::V, LemmaCase::VI].into();
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && cases == all && elapsed < Duration::from_secs(120),
        format!("{} specs, {} of 6 cases, max |error| {worst:.2e}, {elapsed:.1?}", specs.len(), cases.len()),
    )
}

fn sc_oracle() -> Outcome {
    let mut r = rng(103);
    let mut specs = Vec::new();
    for m in 1..=4u32 {
        let n = 1usize << m;
        specs.push(with_random_frozen(&SpecDraft::new(m, n, []), n / 2, &mut r));
    }
    for (_, d) in small_drafts() {
        let n = 1usize << d.m;
        specs.push(with_random_frozen(&d, n / 2, &mut r));
        specs.push(with_random_frozen(&d, r.random_range(1..=n), &mut r));
    }
    specs.push(fig2());
    let mut mismatches = 0;
    for spec in &specs {
        let tables = CodeTables::new(spec).unwrap();
        let dec = ScDecoder::<f64>::new(spec);
        for t in 0..1000 {
            let llrs = if t % 4 == 0 { integer_llrs(spec.n(), &mut r) } else { gaussian_llrs(spec.n(), 1.0, &mut r) };
            mismatches += usize::from(dec.decode(&llrs).unwrap().u != tables.sequential_decode(&llrs).unwrap().u);
        }
    }
    outcome(mismatches == 0, format!("{} specs x 1000 inputs, {mismatches} mismatches", specs.len()))
}

fn classical_reduction() -> Outcome {
    let mut r = rng(104);
    let (mut sc_bad, mut scl_bad, mut ops_bad, mut trials) = (0, 0, 0, 0);
    for m in 1..=8u32 {
        let n = 1usize << m;
        for _ in 0..25 {
            let spec = with_random_frozen(&SpecDraft::new(m, n, []), r.random_range(1..=n), &mut r);
            let reference = ArikanDecoder::from_spec(&spec);
            let list_size = 1 << r.random_range(1..4);
            let cfg = ListConfig::new(list_size);
            let (sc64, sc32) = (ScDecoder::<f64>::new(&spec), ScDecoder::<f32>::new(&spec));
            let scl64 = SclDecoder::<f64>::new(&spec, cfg).unwrap();
            let scl32 = SclDecoder::<f32>::new(&spec, cfg).unwrap();
            for t in 0..50 {
                trials += 1;
                let llrs = gaussian_llrs(n, 0.9, &mut r);
                if t % 2 == 0 {
                    let a = sc64.decode(&llrs).unwrap();
                    let b = reference.sc(&llrs).unwrap();
                    ops_bad += usize::from(a.ops.total() != (n * m as usize) as u64);
                    sc_bad += usize::from(a != b);
                    let la = scl64.decode(&llrs).unwrap().candidates;
                    scl_bad += usize::from(la != reference.scl(&llrs, &cfg).unwrap().candidates);
                } else {
                    let llrs: Vec<f32> = llrs.iter().map(|&x| x as f32).collect();
                    let a = sc32.decode(&llrs).unwrap();
                    ops_bad += usize::from(a.ops.total() != (n * m as usize) as u64);
                    sc_bad += usize::from(a != reference.sc(&llrs).unwrap());
                    let la = scl32.decode(&llrs).unwrap().candidates;
                    scl_bad += usize::from(la != reference.scl(&llrs, &cfg).unwrap().candidates);
                }
            }
        }
    }
    outcome(
        sc_bad + scl_bad + ops_bad == 0,
        format!("{trials} trials, m 1..8: SC {sc_bad}, SCL {scl_bad}, op count {ops_bad} mismatches"),
    )
}

fn full_list_ml() -> Outcome {
    let mut r = rng(105);
    let mut cases = vec![(fig2(), 250)];
    for k in [4, 6, 8] {
        let spec = with_random_frozen(&random_transforms(4, 0.4, &mut r), k, &mut r);
        cases.push((spec, 250));
    }
    let (mut frames, mut bad) = (0, 0);
    for (spec, count) in &cases {
        let k = spec.unfrozen_len();
        let dec = SclDecoder::<f64>::new(spec, ListConfig::new(1 << k)).unwrap();
        for _ in 0..*count {
            frames += 1;
            let llrs = gaussian_llrs(spec.n(), 1.0, &mut r);
            let (x, _) = brute_ml(spec, &llrs).unwrap();
            bad += usize::from(dec.decode(&llrs).unwrap().best().codeword != x);
        }
    }
    outcome(bad == 0, format!("n in {{8, 16}}, k in {{4, 6, 8}}, {frames} frames, {bad} differ from ML"))
}

fn shortcuts() -> Outcome {
    let mut r = rng(106);
    let variants = [
        DecoderOptions { reuse: false, ..DecoderOptions::default() },
        DecoderOptions { prune: false, ..DecoderOptions::default() },
        DecoderOptions::full(),
    ];
    let (mut frames, mut differ, mut not_cheaper, mut specs) = (0, 0, 0, 0);
    for m in 2..=8u32 {
        for _ in 0..10 {
            specs += 1;
            let spec = random_abs_spec(m, &mut r);
            let base = ScDecoder::<f64>::with_options(&spec, DecoderOptions::checked());
            let others: Vec<ScDecoder<f64>> = variants.iter().map(|&o| ScDecoder::with_options(&spec, o)).collect();
            let mut cheaper = true;
            for _ in 0..143 {
                frames += 1;
                let llrs = gaussian_llrs(spec.n(), 1.0, &mut r);
                let a = base.decode(&llrs).unwrap();
                for (i, d) in others.iter().enumerate() {
                    let b = d.decode(&llrs).unwrap();
                    differ += usize::from(b.u != a.u);
                    if i == 2 {
                        cheaper &= a.ops.total() < b.ops.total();
                    }
                }
            }
            not_cheaper += usize::from(!cheaper);
        }
    }
    outcome(
        differ == 0 && not_cheaper == 0,
        format!("{specs} specs, {frames} frames: {differ} changed decisions, {not_cheaper} specs without op savings"),
    )
}

fn describe(p: &PointResult) -> String {
    let (lo, hi) = p.ci();
    format!("{}/{} = {:.2e} [{lo:.2e}, {hi:.2e}]", p.frame_errors, p.frames, p.fer())
}

fn simulate(spec: &CodeSpec, list: usize, max_frames: u64, min_errors: u64) -> PointResult {
    let c = Campaign::new(DecoderKind::Scl, vec![list], vec![2.5]).with_stop(max_frames, min_errors).with_seed(2024);
    run_campaign(spec, &c).unwrap().remove(0)
}

fn ca_scl8(abs: &CodeSpec, classical: &CodeSpec) -> Outcome {
    let start = Instant::now();
    let cl = simulate(classical, 8, 400_000, 40);
    let ab = simulate(abs, 8, cl.frames, u64::MAX);
    let elapsed = start.elapsed();
    let passed = ab.fer() < cl.fer() && ab.ci().1 < cl.ci().0 && elapsed <= Duration::from_secs(30 * 60);
    outcome(
        passed,
        format!("2.5 dB CA-SCL-8: ABS+ {}, classical {}, {elapsed:.0?}", describe(&ab), describe(&cl)),
    )
}

fn list_reach(abs: &CodeSpec, classical: &CodeSpec) -> Outcome {
    let start = Instant::now();
    let cl = simulate(classical, 32, 400_000, 20);
    let mut tried = Vec::new();
    for list in [4, 8, 16] {
        let ab = simulate(abs, list, cl.frames, u64::MAX);
        let reached = cl.frame_errors >= 20 && ab.fer() <= cl.fer() && ab.ci().1 <= cl.ci().1;
        tried.push(format!("L={list} {}", describe(&ab)));
        if reached {
            return outcome(
                true,
                format!(
                    "2.5 dB: ABS+ reaches classical SCL-32 {} at {}, {:.0?}",
                    describe(&cl),
                    tried.join("; "),
                    start.elapsed()
                ),
            );
        }
    }
    outcome(false, format!("classical SCL-32 {}; ABS+ {}", describe(&cl), tried.join("; ")))
}

fn metric_table() -> Outcome {
    // (alpha, bit, increment)
    let table = [(-2.0, 1u8, 0.0), (-2.0, 0, 2.0), (1.5, 0, 0.0), (1.5, 1, 1.5), (0.0, 0, 0.0), (0.0, 1, 0.0)];
    let mut bad = 0;
    for (alpha, bit, inc) in table {
        for pm in [0.0, 3.25] {
            bad += usize::from(path_metric_update(pm, alpha, bit) != pm + inc);
            bad += usize::from(path_metric_update(pm as f32, alpha as f32, bit) != (pm + inc) as f32);
        }
    }
    let split = split_and_prune(&[0.0f64], &[-2.0], 2);
    bad += usize::from(split.len() != 2 || split[0].metric != 2.0 || split[1].metric != 0.0);
    // two paths with equal metrics: lower parent, then bit 0, wins the tie
    let tie = split_and_prune(&[1.0f64, 1.0], &[0.0, 0.0], 3);
    let kept: Vec<(usize, u8)> = tie.iter().map(|s| (s.parent, s.bit)).collect();
    bad += usize::from(kept != [(0, 0), (0, 1), (1, 0)]);
    outcome(bad == 0, format!("{} table entries, {bad} mismatches", table.len() * 4 + 2))
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let spec = with_random_frozen(&random_transforms(7, 0.3, &mut rng(107)), 64, &mut rng(108));
    std::fs::write(tmp.path().join("code.toml"), abspolar::codespec::serialize_spec(&spec)).unwrap();
    let cfg_path = tmp.path().join("campaign.toml");
    std::fs::write(
        &cfg_path,
        "spec = \"code.toml\"\ndecoder = \"scl\"\nlists = [1, 2, 8]\nsnr_db = [1.0, 2.0]\nseed = 77\n\n[stop]\nmax_frames = 3000\nmin_errors = 50\n",
    )
    .unwrap();
    let cfg = CampaignConfig::load(&cfg_path).unwrap();
    let spec = parse_spec(&std::fs::read_to_string(&cfg.spec).unwrap()).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| write_csv(&run_campaign(&spec, &cfg.campaign()).unwrap()))
    };
    let runs = [run(1), run(2), run(4), run(1)];
    let same = runs.iter().all(|r| r == &runs[0]);
    outcome(same, format!("4 reruns on 1, 2, 4, 1 threads: {}", if same { "identical" } else { "differ" }))
}

fn main() {
    let abs = spec_file("abs_1024_512_crc8.toml");
    let classical = spec_file("classical_1024_512_crc8.toml");
    let criteria: Vec<Criterion> = vec![
        ("kernel-oracle equivalence", Box::new(kernels)),
        ("channel recursion identities", Box::new(lemma1)),
        ("SC oracle equivalence", Box::new(sc_oracle)),
        ("classical reduction", Box::new(classical_reduction)),
        ("full list is ML", Box::new(full_list_ml)),
        ("reuse/pruning soundness", Box::new(shortcuts)),
        ("ABS+ beats classical, CA-SCL-8", Box::new(|| ca_scl8(&abs, &classical))),
        ("ABS+ list size vs classical SCL-32", Box::new(|| list_reach(&abs, &classical))),
        ("path-metric table", Box::new(metric_table)),
        ("campaign determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.passed);
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
