//! Acceptance suite. Each test is one numbered criterion, prints a
//! single PASS line on success, and enforces its wall-clock limit.
//! Run with `cargo test -p sunflower-cli --test acceptance -- --nocapture`.

use std::collections::HashMap;
use std::process::Command;
use std::time::{Duration, Instant};

use sunflower_core::audit::{audit, AuditConfig};
use sunflower_core::coding::{kraft_sum, random_code, shannon_converse_check};
use sunflower_core::experiments::{
    brute_force_sunflowers, coverage_probability_exact, estimate_chi_expectation,
    exact_chi_expectation, DEFAULT_BUDGET,
};
use sunflower_core::family::{
    generate_extremal, generate_random_family, spread_check, SpreadParams, SpreadVerdict,
};
use sunflower_core::numeric::{binomial_big, parse_rational, ratio_to_f64, Z95};
use sunflower_core::set::ElemSet;
use sunflower_core::sunflower::{find_sunflower_erdos_rado, find_sunflower_spread, is_sunflower};
use sunflower_core::{chi, covers, BigRational, SetFamily};

fn rat(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

fn finish(criterion: &str, start: Instant, limit: Duration) {
    let elapsed = start.elapsed();
    assert!(
        elapsed < limit,
        "criterion {criterion} exceeded its budget: {elapsed:?} >= {limit:?}"
    );
    println!("criterion {criterion}: PASS ({elapsed:?})");
}

#[test]
fn acceptance_01_erdos_rado_reproduction() {
    let start = Instant::now();
    for seed in 0..500u64 {
        let family = generate_random_family(8, 2, 9, seed, true).unwrap();
        let sf = find_sunflower_erdos_rado(&family, 3)
            .unwrap()
            .unwrap_or_else(|| panic!("seed {seed}: 9 > 8 guarantees a 3-sunflower"));
        assert_eq!(sf.petals.len(), 3);
        let core = is_sunflower(&family, &sf.petals).unwrap();
        assert_eq!(core, Some(sf.core), "seed {seed}: structural verification");
    }
    finish("1 (erdos-rado reproduction, 500 families)", start, Duration::from_secs(10));
}

#[test]
fn acceptance_02_extremal_construction() {
    let start = Instant::now();
    for (p, k) in [(3u32, 2u32), (2, 3), (3, 3), (4, 2)] {
        let family = generate_extremal(p, k).unwrap();
        let expected = (p as u64 - 1).pow(k);
        assert_eq!(family.len() as u64, expected, "({p},{k}): set count");
        let mut masks: Vec<u64> = family.sets().iter().map(|s| s.mask()).collect();
        masks.sort_unstable();
        masks.dedup();
        assert_eq!(masks.len() as u64, expected, "({p},{k}): all distinct");
        let found = brute_force_sunflowers(&family, p as usize, true, DEFAULT_BUDGET).unwrap();
        assert!(found.is_empty(), "({p},{k}): no {p}-sunflower may exist");
    }
    finish("2 (extremal construction)", start, Duration::from_secs(10));
}

#[test]
fn acceptance_03_length_bound_suite() {
    let start = Instant::now();
    let one = rat("1");
    for seed in 0..1000u64 {
        let t = 1 + (seed as usize) % 64;
        let code = random_code(t, seed);
        let sum = kraft_sum(&code).unwrap();
        assert!(sum <= one, "seed {seed}: Kraft sum must not exceed 1");
        let report = shannon_converse_check(&code).unwrap();
        assert!(report.holds, "seed {seed}: mean length below log2 t");
    }
    finish("3 (Kraft and length bound, 1000 codes)", start, Duration::from_secs(5));
}

#[test]
fn acceptance_04_chi_property_suite() {
    let start = Instant::now();
    for i in 0..50u64 {
        let n = 6 + (i % 5) as u32;
        let k = 1 + (i % 3) as u32;
        let l = 3 + (i % 8) as usize;
        let family = generate_random_family(n, k, l, 400 + i, false).unwrap();

        // cache: for every W with |W| <= 6, the full chi results and the
        // coverage flag
        let mut cache: HashMap<u64, (Vec<sunflower_core::ChiResult>, bool)> = HashMap::new();
        for mask in 0u64..(1 << n) {
            let w = ElemSet::from_mask(mask);
            if w.len() > 6 {
                continue;
            }
            let results: Vec<_> = (1..=family.len())
                .map(|x| chi(&family, x, w).unwrap())
                .collect();
            let covering = covers(&family, w).is_some();
            cache.insert(mask, (results, covering));
        }

        for (&mask, (results, covering)) in &cache {
            let w = ElemSet::from_mask(mask);
            for (xi, r) in results.iter().enumerate() {
                let sx = family.set(xi + 1).unwrap();
                assert!(r.value.is_subset_of(sx), "containment");
                assert_eq!(r.size() == 0, *covering, "emptiness iff coverage");
                for y in 1..r.witness {
                    let sy = family.set(y).unwrap();
                    if sy.is_subset_of(sx.union(w)) {
                        assert!(
                            sy.difference(w).len() > r.size(),
                            "witness tie-break minimality"
                        );
                    }
                }
            }
            // monotonicity along every chain U ⊆ W
            let mut sub = mask;
            loop {
                let (u_results, _) = &cache[&sub];
                for (ru, rw) in u_results.iter().zip(results.iter()) {
                    assert!(ru.size() >= rw.size(), "monotone under growing W");
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
    }
    finish("4 (chi property suite, 50 families)", start, Duration::from_secs(60));
}

#[test]
fn acceptance_05_encoding_audit() {
    let start = Instant::now();
    // extremal(3,2) plus two seeded families that are 3-spread
    let mut subjects: Vec<(SetFamily, BigRational)> = vec![(generate_extremal(3, 2).unwrap(), rat("2"))];
    for seed in [2u64, 6] {
        let f = generate_random_family(8, 2, 8, seed, true).unwrap();
        assert_eq!(
            spread_check(&f, &rat("3")).verdict,
            SpreadVerdict::Spread,
            "seed {seed} must give a 3-spread family"
        );
        subjects.push((f, rat("3")));
    }

    let mut audited = 0;
    for (family, r) in &subjects {
        for u in [ElemSet::empty(), ElemSet::from_elems(&[1, 2]).unwrap()] {
            // skip combinations whose pair space is empty or invalid
            if u.len() + 3 > family.n() as usize {
                continue;
            }
            for rho in ["2", "4"] {
                let cfg = AuditConfig {
                    u,
                    v: 3,
                    rho: rat(rho),
                    r: r.clone(),
                };
                // audit() decodes every codeword internally; Ok means a
                // 100% round trip
                let report = audit(family, &cfg, DEFAULT_BUDGET).unwrap();
                let expected_pairs = family.len() as u64
                    * u64::try_from(binomial_big(
                        family.n() as u64 - u.len() as u64,
                        3,
                    ))
                    .unwrap();
                assert_eq!(report.pair_count, expected_pairs);

                // the full quadratic prefix scan, independent of the
                // report's sorted scan
                let words: Vec<_> = {
                    let mut ws = Vec::with_capacity(report.records.len());
                    for rec in &report.records {
                        ws.push(
                            sunflower_core::audit::encode_pair(family, &cfg, rec.x, rec.v_set)
                                .unwrap(),
                        );
                    }
                    ws
                };
                for i in 0..words.len() {
                    for j in 0..words.len() {
                        if i != j {
                            assert!(
                                !words[i].is_prefix_of(&words[j]),
                                "prefix violation at pair ({i},{j})"
                            );
                        }
                    }
                }
                assert!(report.prefix_free);
                assert!(report.lemma4_holds, "mean length >= log2(pair count), exactly");

                // overlap claim on every case-0 pair
                for rec in &report.records {
                    if !rec.case1 {
                        assert!(
                            rec.chi_w_size <= rec.overlap.unwrap(),
                            "|chi(X,W)| <= |chi(j,U) ∩ chi(X,U)|"
                        );
                    }
                }
                audited += 1;
            }
        }
    }
    assert_eq!(audited, 10, "2 configs for the n=4 family, 4 for each n=8 family");
    finish("5 (encoding audit)", start, Duration::from_secs(60));
}

#[test]
fn acceptance_06_exact_monte_carlo_agreement() {
    let start = Instant::now();
    // exact coverage value first
    let extremal = generate_extremal(3, 2).unwrap();
    assert_eq!(
        coverage_probability_exact(&extremal, 2, DEFAULT_BUDGET).unwrap(),
        rat("2/3"),
        "coverage of the extremal family at w=2 is exactly 2/3"
    );

    let mut instances: Vec<(SetFamily, Vec<usize>)> = vec![(extremal, vec![0, 1, 2, 3, 4])];
    instances.push((
        generate_random_family(8, 3, 6, 11, true).unwrap(),
        vec![0, 2, 4, 6, 8],
    ));
    instances.push((
        generate_random_family(7, 2, 6, 3, true).unwrap(),
        vec![0, 1, 3, 5, 7],
    ));

    for (fi, (family, ws)) in instances.iter().enumerate() {
        for &w in ws {
            let exact = ratio_to_f64(&exact_chi_expectation(family, w, DEFAULT_BUDGET).unwrap());
            let est = estimate_chi_expectation(family, w, 10_000, 4242 + fi as u64).unwrap();
            let se = est.half_width / Z95;
            let diff = (est.mean - exact).abs();
            assert!(
                diff <= 3.0 * se || diff == 0.0,
                "instance {fi} w={w}: |{} - {exact}| > 3se = {}",
                est.mean,
                3.0 * se
            );
        }
    }
    finish("6 (exact vs Monte Carlo)", start, Duration::from_secs(30));
}

#[test]
fn acceptance_07_monotone_decay() {
    let start = Instant::now();
    for i in 0..20u64 {
        let n = 7 + (i % 3) as u32;
        let k = 2 + (i % 2) as u32;
        let l = 5 + (i % 6) as usize;
        let family = generate_random_family(n, k, l, 900 + i, false).unwrap();
        let mut prev: Option<BigRational> = None;
        for w in 0..=(n as usize) {
            let cur = exact_chi_expectation(&family, w, DEFAULT_BUDGET).unwrap();
            if let Some(p) = &prev {
                assert!(cur <= *p, "family {i}: expectation rose from w-1 to w={w}");
            }
            prev = Some(cur);
        }
        assert_eq!(prev.unwrap(), rat("0"), "family {i}: w=n must give exactly 0");
    }
    finish("7 (monotone decay over the w sweep)", start, Duration::from_secs(60));
}

#[test]
fn acceptance_08_oracle_equivalence() {
    let start = Instant::now();
    let params = SpreadParams {
        alpha: rat("101/100"),
        ..SpreadParams::default()
    };
    let mut hypothesis_cases = 0;
    for i in 0..200u64 {
        let n = 4 + (i % 5) as u32;
        let k = (1 + (i % 3) as u32).min(n);
        let max_l = u64::try_from(binomial_big(n as u64, k as u64))
            .unwrap()
            .min(10) as usize;
        let l = 2 + (i as usize * 7) % max_l.max(2);
        let l = l.min(max_l);
        let p = 2 + (i % 3) as usize;
        let family = generate_random_family(n, k, l, 1000 + i, true).unwrap();

        let oracle = brute_force_sunflowers(&family, p, true, DEFAULT_BUDGET).unwrap();
        let check_found = |sf: &sunflower_core::Sunflower| {
            assert_eq!(is_sunflower(&family, &sf.petals).unwrap(), Some(sf.core));
            let mut sorted = sf.petals.clone();
            sorted.sort_unstable();
            assert!(
                oracle.iter().any(|o| o.petals == sorted),
                "case {i}: extractor output missing from the oracle list"
            );
        };

        let er = find_sunflower_erdos_rado(&family, p).unwrap();
        let factorial: u64 = (1..=k as u64).product();
        let bound = (p as u64 - 1).pow(k) * factorial;
        if family.len() as u64 > bound {
            hypothesis_cases += 1;
            assert!(er.is_some(), "case {i}: the size hypothesis guarantees success");
            assert!(!oracle.is_empty(), "case {i}: oracle must agree");
        }
        if let Some(sf) = &er {
            check_found(sf);
        }
        if let Some(sf) = find_sunflower_spread(&family, p, &params, 50, i, false).unwrap() {
            check_found(&sf);
        }
    }
    assert!(hypothesis_cases > 10, "the battery must exercise the guaranteed regime");
    finish("8 (oracle equivalence, 200 families)", start, Duration::from_secs(60));
}

fn run_capture(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_sunflower"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code(), out.stdout)
}

#[test]
fn acceptance_09_seeded_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let fam_path = dir.path().join("fam.json");
    let fam = fam_path.to_str().unwrap();

    // gen --random: identical file bytes and stdout
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    let gen_args = |out: &str| {
        vec![
            "gen".to_string(),
            "--random".into(),
            "--n".into(),
            "8".into(),
            "--k".into(),
            "2".into(),
            "--l".into(),
            "9".into(),
            "--distinct".into(),
            "--seed".into(),
            "42".into(),
            "-o".into(),
            out.into(),
        ]
    };
    let args_a: Vec<String> = gen_args(out_a.to_str().unwrap());
    let args_b: Vec<String> = gen_args(out_b.to_str().unwrap());
    let ra = run_capture(&args_a.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    let rb = run_capture(&args_b.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert_eq!(ra.0, Some(0));
    assert_eq!(ra.1, rb.1, "gen stdout must match");
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap(),
        "gen output files must be byte-identical"
    );
    std::fs::copy(&out_a, &fam_path).unwrap();

    // sunflower --method spread
    let sf_args = [
        "sunflower", "--family", fam, "--p", "3", "--method", "spread", "--seed", "7",
    ];
    assert_eq!(run_capture(&sf_args), run_capture(&sf_args));

    // disjoint
    let dj_args = [
        "disjoint", "--family", fam, "--p", "3", "--max-iters", "50", "--seed", "9",
    ];
    assert_eq!(run_capture(&dj_args), run_capture(&dj_args));

    // experiment: stdout and CSV bytes
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let exp = |csv: &str| {
        [
            "experiment",
            "chi",
            "--family",
            fam,
            "--w",
            "3",
            "--trials",
            "3000",
            "--seed",
            "5",
            "--csv",
            csv,
        ]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
    };
    let ea = exp(csv_a.to_str().unwrap());
    let eb = exp(csv_b.to_str().unwrap());
    let ra = run_capture(&ea.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    let rb = run_capture(&eb.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert_eq!(ra.0, Some(0));
    assert_eq!(ra.1, rb.1, "experiment stdout must match");
    assert_eq!(
        std::fs::read(&csv_a).unwrap(),
        std::fs::read(&csv_b).unwrap(),
        "experiment CSV must be byte-identical"
    );

    finish("9 (seeded determinism per subcommand)", start, Duration::from_secs(60));
}
