mod common;

use abspolar::arikan::ArikanDecoder;
use abspolar::crc::{crc_attach, CrcSpec};
use abspolar::encoder::{encode, place_info};
use abspolar::oracle::brute_ml;
use abspolar::{CodeSpec, DecoderOptions, ListConfig, ScDecoder, SclDecoder, SpecDraft};
use common::{gaussian_llrs, integer_llrs, rng, small_drafts, with_random_frozen};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Sum of `|llr|` over the positions where `x` disagrees with the hard
/// decision: the metric a complete path must end with.
fn correlation_metric(llrs: &[f64], x: &[u8]) -> f64 {
    llrs.iter()
        .zip(x)
        .filter(|(l, &b)| (**l < 0.0) != (b == 1))
        .map(|(l, _)| l.abs())
        .sum()
}

#[test]
fn list_of_one_is_sc() {
    let mut r = rng(21);
    for (name, draft) in small_drafts() {
        for _ in 0..30 {
            let k = r.random_range(1..=1usize << draft.m);
            let spec = with_random_frozen(&draft, k, &mut r);
            let llrs = gaussian_llrs(spec.n(), 0.9, &mut r);
            let sc = ScDecoder::<f64>::new(&spec).decode(&llrs).unwrap();
            let list = SclDecoder::<f64>::new(&spec, ListConfig::new(1)).unwrap().decode(&llrs).unwrap();
            assert_eq!(list.best().u, sc.u, "{name}");
            assert_eq!(list.best().codeword, sc.codeword, "{name}");
            let l32: Vec<f32> = llrs.iter().map(|&x| x as f32).collect();
            let sc = ScDecoder::<f32>::new(&spec).decode(&l32).unwrap();
            let list = SclDecoder::<f32>::new(&spec, ListConfig::new(1)).unwrap().decode(&l32).unwrap();
            assert_eq!(list.best().u, sc.u, "{name} f32");
        }
    }
}

#[test]
fn full_list_is_ml() {
    let mut r = rng(22);
    for (name, draft) in small_drafts().into_iter().filter(|(_, d)| d.m >= 3) {
        for _ in 0..10 {
            let k = r.random_range(1..=8usize.min(1 << draft.m));
            let spec = with_random_frozen(&draft, k, &mut r);
            let dec = SclDecoder::<f64>::new(&spec, ListConfig::new(1 << k)).unwrap();
            for _ in 0..20 {
                let llrs = gaussian_llrs(spec.n(), 1.0, &mut r);
                let (x, u) = brute_ml(&spec, &llrs).unwrap();
                let out = dec.decode(&llrs).unwrap();
                assert_eq!(out.candidates.len(), 1 << k);
                assert_eq!(out.best().codeword, x, "{name} k {k}");
                assert_eq!(out.best().u, u, "{name} k {k}");
            }
        }
    }
}

#[test]
fn complete_paths_carry_correlation_metric() {
    let mut r = rng(23);
    for (name, draft) in small_drafts() {
        let spec = with_random_frozen(&draft, (1 << draft.m) / 2, &mut r);
        let llrs = gaussian_llrs(spec.n(), 1.0, &mut r);
        let out = SclDecoder::<f64>::new(&spec, ListConfig::new(4)).unwrap().decode(&llrs).unwrap();
        let mut seen = std::collections::HashSet::new();
        for pair in out.candidates.windows(2) {
            assert!(pair[0].metric <= pair[1].metric);
        }
        for c in &out.candidates {
            assert_eq!(c.codeword, encode(&spec, &c.u).unwrap(), "{name}");
            assert!((c.metric - correlation_metric(&llrs, &c.codeword)).abs() <= 1e-9, "{name}");
            assert!(seen.insert(c.u.clone()), "{name}: duplicate path");
        }
    }
}

#[test]
fn no_list_beats_ml() {
    let mut r = rng(24);
    for (name, draft) in small_drafts() {
        let spec = with_random_frozen(&draft, (1 << draft.m).min(12) / 2, &mut r);
        for _ in 0..20 {
            let llrs = integer_llrs(spec.n(), &mut r);
            let (x, _) = brute_ml(&spec, &llrs).unwrap();
            let best = correlation_metric(&llrs, &x);
            for l in [1, 2, 3, 8] {
                let out = SclDecoder::<f64>::new(&spec, ListConfig::new(l)).unwrap().decode(&llrs).unwrap();
                assert!(out.best().metric >= best, "{name} L {l}");
            }
        }
    }
}

#[test]
fn top_metric_is_not_monotone_in_list_size() {
    // a longer list can drop early the path a shorter list keeps to the end,
    // so only the full list is guaranteed to do at least as well
    let mut r = rng(26);
    let draft = SpecDraft::new(4, 16, []).swap(4, [6]).add(3, [2]);
    let mut found = None;
    'search: for _ in 0..200 {
        let spec = with_random_frozen(&draft, 8, &mut r);
        let lists: Vec<SclDecoder<f64>> = [2, 4, 256]
            .into_iter()
            .map(|l| SclDecoder::new(&spec, ListConfig::new(l)).unwrap())
            .collect();
        for _ in 0..50 {
            let llrs = gaussian_llrs(spec.n(), 1.2, &mut r);
            let best: Vec<f64> = lists.iter().map(|d| d.decode(&llrs).unwrap().best().metric).collect();
            assert!(best[2] <= best[0] && best[2] <= best[1]);
            if best[1] > best[0] {
                found = Some((best[0], best[1]));
                break 'search;
            }
        }
    }
    let (short, long) = found.expect("a frame where L = 4 ends worse than L = 2");
    assert!(long > short);
}

#[test]
fn crc_selects_the_passing_path() {
    let crc = CrcSpec::new(0x3, 4).unwrap();
    let mut r = rng(25);
    let draft = SpecDraft::new(5, 16, []).swap(5, [6, 22]).add(5, [14]).add(4, [4]);
    let mut d = with_random_frozen(&draft, 16, &mut r).draft();
    d.k = 12;
    d.crc = Some(crc);
    let spec = CodeSpec::new(&d).unwrap();
    let dec = SclDecoder::<f64>::new(&spec, ListConfig::for_spec(&spec, 8)).unwrap();
    let plain = SclDecoder::<f64>::new(&spec, ListConfig::new(8)).unwrap();
    let noise = Normal::new(0.0, 0.9).unwrap();
    let mut rescued = 0;
    for _ in 0..400 {
        let payload: Vec<u8> = (0..spec.k()).map(|_| r.random_range(0..2)).collect();
        let u = place_info(&spec, &crc_attach(&payload, &crc).unwrap()).unwrap();
        let x = encode(&spec, &u).unwrap();
        let llrs: Vec<f64> = x
            .iter()
            .map(|&b| 2.0 * (1.0 - 2.0 * f64::from(b) + noise.sample(&mut r)) / 0.81)
            .collect();
        let out = dec.decode(&llrs).unwrap();
        let bare = plain.decode(&llrs).unwrap();
        assert!(out.candidates.iter().all(|c| c.crc_ok.is_some()));
        assert!(bare.candidates.iter().all(|c| c.crc_ok.is_none()));
        if out.candidates.iter().any(|c| c.crc_ok == Some(true)) {
            assert_eq!(out.best().crc_ok, Some(true));
        }
        if out.best().u == u && bare.best().u != u {
            rescued += 1;
        }
    }
    assert!(rescued > 0, "CRC never changed the choice");
}

#[test]
fn stale_state_is_never_read_across_paths() {
    let opts = DecoderOptions {
        poison_stale: true,
        ..DecoderOptions::checked()
    };
    let mut r = rng(26);
    for (name, draft) in small_drafts() {
        let spec = with_random_frozen(&draft, (1 << draft.m) * 3 / 4, &mut r);
        let cfg = ListConfig::new(4);
        let plain = SclDecoder::<f64>::new(&spec, cfg).unwrap();
        let poisoned = SclDecoder::<f64>::with_options(&spec, cfg, opts).unwrap();
        for _ in 0..50 {
            let llrs = gaussian_llrs(spec.n(), 1.0, &mut r);
            assert_eq!(plain.decode(&llrs).unwrap().candidates, poisoned.decode(&llrs).unwrap().candidates, "{name}");
        }
    }
}

#[test]
fn classical_list_sizes_agree_with_reference() {
    let mut r = rng(27);
    let spec = CodeSpec::classical(6, (1..=64).filter(|i| i % 3 != 0)).unwrap();
    let ar = ArikanDecoder::from_spec(&spec);
    for l in [2, 3, 5, 16, 32] {
        let cfg = ListConfig::new(l);
        let dec = SclDecoder::<f64>::new(&spec, cfg).unwrap();
        for _ in 0..20 {
            let llrs = integer_llrs(spec.n(), &mut r);
            assert_eq!(dec.decode(&llrs).unwrap().candidates, ar.scl(&llrs, &cfg).unwrap().candidates);
        }
    }
}

#[test]
fn rejects_bad_configs() {
    let spec = CodeSpec::classical(3, [1, 2, 3, 4, 5]).unwrap();
    assert!(SclDecoder::<f64>::new(&spec, ListConfig::new(0)).is_err());
    let wide = ListConfig::new(2).with_crc(Some(CrcSpec::new(0x7, 3).unwrap()));
    assert!(SclDecoder::<f64>::new(&spec, wide).is_err());
    let dec = SclDecoder::<f64>::new(&spec, ListConfig::new(2)).unwrap();
    assert!(dec.decode(&[0.0; 7]).is_err());
}
