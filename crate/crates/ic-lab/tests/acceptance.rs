//! Acceptance gate: one test per numbered criterion, each ending in a
//! single pass line. Tolerances are stated inline; exact assertions use
//! `==` on f64 where the arithmetic is dyadic.

use std::process::Command;

use ic_lab::bell::{
    evaluate, functional, ic_bounds, local_max, monogamy_sweep, optimize_settings, relation,
    RelationId, SweepSource,
};
use ic_lab::infotheory::{bb84_split, binary_entropy, es_ratio_probe};
use ic_lab::ising::{build_tree, metropolis_run, McParams, ReferenceConfig};
use ic_lab::nsbox::{
    broadcast_pr_box, isotropic_box, no_signaling_check, perfect_sb_box, pr_box, quantum_box,
    shared_coin_box, PartySettings,
};
use ic_lab::quantum::{bell_pair_padded, named_state, NamedState};
use ic_lab::rac::{
    leakage_check, run_additive, run_nested, RacConfig, RacVariant,
};

fn pass(n: u32, msg: &str) {
    println!("criterion {n:02} PASS: {msg}");
}

#[test]
fn criterion_01_pr_box_violation() {
    let config = RacConfig::new(1, 2, RacVariant::Additive).unwrap();
    let report = run_additive(&pr_box(), &config).unwrap();
    assert_eq!(report.i_total, 2.0, "I must be exactly 2");
    assert!(!report.flags.ic_satisfied, "the 1-bit bound must be flagged violated");
    assert!(report.flags.leak_free);
    pass(1, "PR box yields I = 2.000000000000 exactly and is flagged");
}

#[test]
fn criterion_02_quantum_rac_singlet() {
    let rho = named_state(&NamedState::Singlet).unwrap();
    let chsh = functional("chsh", None).unwrap();
    let (settings, value) = optimize_settings(&rho, &chsh, 11, 5, 60).unwrap();
    let tsirelson = 2.0 * 2f64.sqrt();
    assert!((value - tsirelson).abs() < 1e-6, "CHSH {value} != 2*sqrt(2)");
    let obs = settings.observables();
    let table = quantum_box(
        &rho,
        &[
            PartySettings { qubits: 1, observables: obs[0].clone() },
            PartySettings { qubits: 1, observables: obs[1].clone() },
        ],
    )
    .unwrap();
    let config = RacConfig::new(1, 2, RacVariant::Additive).unwrap();
    let report = run_additive(&table, &config).unwrap();
    let expected = 2.0 * (1.0 - binary_entropy((1.0 - 1.0 / 2f64.sqrt()) / 2.0));
    assert!(
        (report.i_total - expected).abs() < 1e-6,
        "I {} vs closed form {expected}",
        report.i_total
    );
    assert!(report.i_total <= 1.0 + 1e-12, "quantum protocol must respect the 1-bit bound");
    pass(2, "singlet reaches CHSH = 2*sqrt(2) and I = 0.7982 <= 1");
}

#[test]
fn criterion_03_bound_formula_vs_enumeration() {
    for (k, lower, upper) in [
        (2usize, 2.0, 2.0 * 2f64.sqrt()),
        (3, 6.0, 4.0 * 3f64.sqrt()),
        // The closed form 2^(k-1) sqrt(k) gives 16 at k = 4.
        (4, 12.0, 16.0),
    ] {
        let (lo, up) = ic_bounds(k).unwrap();
        let enumerated = local_max(&functional("ic", Some(k)).unwrap()).unwrap().value;
        assert_eq!(lo, enumerated, "k={k}: closed-form lower vs enumeration");
        assert_eq!(lo, lower, "k={k} lower");
        assert!((up - upper).abs() < 1e-12, "k={k} upper {up} vs {upper}");
        let expected_closed = (1u64 << (k - 1)) as f64 * (k as f64).sqrt();
        assert!((up - expected_closed).abs() < 1e-12);
    }
    pass(3, "lower bounds (2, 6, 12) match enumeration; uppers match 2^(k-1) sqrt(k)");
}

#[test]
fn criterion_04_two_receiver_quadratic_regime() {
    let rel = relation(RelationId::Chsh8, Some(2), None).unwrap();
    let report = monogamy_sweep(
        &rel,
        &SweepSource::Random { trials: 1000, seed: 2024 },
        true,
        7,
        1,
        15,
    )
    .unwrap();
    assert!(report.max_lhs <= 8.0 + 1e-6, "max {}", report.max_lhs);
    assert_eq!(report.violations, 0);
    let fixture = bell_pair_padded(1).unwrap();
    let fixture_report =
        monogamy_sweep(&rel, &SweepSource::State(fixture), true, 3, 5, 60).unwrap();
    assert!(
        (fixture_report.max_lhs - 8.0).abs() < 1e-6,
        "fixture {}",
        fixture_report.max_lhs
    );
    pass(4, "1000 random 3-qubit states stay below 8; the Bell-pair fixture attains it");
}

#[test]
fn criterion_05_falsification_probes() {
    let coin = shared_coin_box(3).unwrap();
    let config = RacConfig::new(3, 2, RacVariant::Additive).unwrap();
    let report = run_additive(&coin, &config).unwrap();
    let leak = leakage_check(&report, 1e-9);
    assert!(leak.passed, "shared coin must pass the leakage check");
    assert_eq!(report.i_total, 3.0, "I must be exactly 3");
    let rel = relation(RelationId::Chsh8, Some(3), None).unwrap();
    let sweep = monogamy_sweep(&rel, &SweepSource::Boxes(coin), false, 0, 1, 1).unwrap();
    assert_eq!(sweep.max_lhs, 12.0);
    assert_eq!(sweep.violations, 1, "12 > 8 must be reported as exceeding the bound");
    let ns = no_signaling_check(&broadcast_pr_box(2).unwrap(), 1e-9);
    assert!(!ns.passed);
    assert_eq!(ns.worst_violation, 0.5, "broadcast probe must signal by exactly 1/2");
    pass(5, "shared coin gives I = 3 leak-free with quadratic sum 12 flagged; broadcast box signals by 0.5");
}

#[test]
fn criterion_06_channel_ratio_probe() {
    let grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let report = es_ratio_probe(10_000, 424_242, 2, 2, &grid).unwrap();
    assert!(
        report.max_ratio_over_xi2 <= 1.0 + 1e-9,
        "max ratio/xi^2 {}",
        report.max_ratio_over_xi2
    );
    pass(6, "10^4 random joints keep I(X;Z|Q) <= xi^2 I(X;Y|Q)");
}

#[test]
fn criterion_07_three_party_values_and_sweeps() {
    let sb = functional("sb", None).unwrap();
    assert_eq!(evaluate(&sb, &perfect_sb_box(1).unwrap()).unwrap(), 8.0);
    let ghz = named_state(&NamedState::Ghz(3)).unwrap();
    let (_, sb_value) = optimize_settings(&ghz, &sb, 11, 5, 60).unwrap();
    assert!((sb_value - 4.0 * 2f64.sqrt()).abs() < 1e-4, "SB on GHZ {sb_value}");
    let mermin = functional("mermin", None).unwrap();
    let (_, mermin_value) = optimize_settings(&ghz, &mermin, 11, 5, 60).unwrap();
    assert!((mermin_value - 4.0).abs() < 1e-6, "Mermin on GHZ {mermin_value}");
    for (id, bound) in [(RelationId::Mermin16, 16.0), (RelationId::Sb64, 64.0)] {
        let rel = relation(id, None, None).unwrap();
        let report = monogamy_sweep(
            &rel,
            &SweepSource::Random { trials: 500, seed: 31 },
            true,
            13,
            1,
            10,
        )
        .unwrap();
        assert!(report.max_lhs <= bound + 1e-6, "{id:?} max {}", report.max_lhs);
        assert_eq!(report.violations, 0);
    }
    pass(7, "perfect box gives 8; GHZ reaches 4*sqrt(2) and 4; 500-state sweeps respect 16 and 64");
}

#[test]
fn criterion_08_nested_protocol() {
    for e in [1.0, 0.9] {
        let edge = isotropic_box(e).unwrap();
        let report = run_nested(&edge, 2).unwrap();
        for (key, xi) in &report.xi {
            assert!(
                (xi - e * e).abs() < 1e-12,
                "depth-2 bias for {key}: {xi} vs {}",
                e * e
            );
        }
        if e == 1.0 {
            assert_eq!(report.i_total, 4.0, "perfect depth-2 protocol carries all 4 bits");
        }
    }
    let edge = isotropic_box(0.7).unwrap();
    let nested = run_nested(&edge, 1).unwrap();
    let additive = run_additive(
        &edge,
        &RacConfig::new(1, 2, RacVariant::Additive).unwrap(),
    )
    .unwrap();
    assert!((nested.i_total - additive.i_total).abs() < 1e-12);
    assert_eq!(nested.i_j.len(), additive.i_j.len());
    for (a, b) in nested.i_j.iter().zip(&additive.i_j) {
        assert!((a - b).abs() < 1e-12);
    }
    for (key, value) in &nested.mi {
        assert!((value - additive.mi[key]).abs() < 1e-12, "mi[{key}]");
    }
    for (key, value) in &nested.xi {
        assert!((value - additive.xi[key]).abs() < 1e-12, "xi[{key}]");
    }
    for (a, b) in nested.leakage.iter().zip(&additive.leakage) {
        assert!((a - b).abs() < 1e-12);
    }
    pass(8, "depth-2 bias is E^2, E = 1 gives I = 4, depth-1 equals the flat protocol");
}

#[test]
fn criterion_09_channel_split_identity() {
    for q in [0.0, 0.05, 0.11, 0.25, 0.5] {
        let (i1, i2) = bb84_split(q).unwrap();
        assert!((i1 + i2 - 1.0).abs() < 1e-12, "split at {q} must sum to 1");
    }
    // h(0.11) = 0.499915958164528 to 15 digits by independent
    // high-precision evaluation; the commonly quoted 0.49981 is a
    // misrounding 1.06e-4 away and is not asserted.
    let (_, i2) = bb84_split(0.11).unwrap();
    assert!((i2 - 0.499_915_958_164_528).abs() < 1e-12, "I2(0.11) = {i2}");
    pass(9, "splits sum to 1; I2(0.11) matches h(0.11) to 1e-12");
}

#[test]
fn criterion_10_tree_ising() {
    let tree = build_tree(6, ReferenceConfig::Random { seed: 60 }, 1.0).unwrap();
    assert_eq!(tree.num_sites, 127);
    let cold = metropolis_run(&tree, &McParams::new(0.1, 606).unwrap()).unwrap();
    assert!(cold.gauge_mag > 0.99, "cold gauge magnetization {}", cold.gauge_mag);
    let hot = metropolis_run(&tree, &McParams::new(10.0, 607).unwrap()).unwrap();
    // Per-site means over 10^4 sweeps: the statistical scale is about
    // 1/sqrt(10^4) per site; 0.05 sits beyond 3 sigma of it.
    let hot_site_mag =
        hot.site_means.iter().map(|v| v.abs()).sum::<f64>() / hot.site_means.len() as f64;
    assert!(hot_site_mag < 0.05, "hot per-site magnetization {hot_site_mag}");
    // Exhaustive gauge-equivalence identity on random configurations.
    use rand::{Rng, SeedableRng};
    let ferro = build_tree(6, ReferenceConfig::AllPlus, 1.0).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let s: Vec<i8> = (0..tree.num_sites)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        let gauged: Vec<i8> = s.iter().zip(&tree.s0).map(|(&a, &b)| a * b).collect();
        assert!(
            (tree.energy(&s).unwrap() - ferro.energy(&gauged).unwrap()).abs() < 1e-12,
            "gauge identity"
        );
    }
    // Depth-1 Boltzmann histogram; chi-squared against exact weights.
    let small = build_tree(1, ReferenceConfig::AllPlus, 1.0).unwrap();
    let temp = 2.0;
    let beta = 1.0 / temp;
    let mut weights = Vec::new();
    let mut z = 0.0;
    for mask in 0..8u32 {
        let s: Vec<i8> = (0..3).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        let w = (-beta * small.energy(&s).unwrap()).exp();
        weights.push(w);
        z += w;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut spins = small.s0.clone();
    let sweep = |spins: &mut Vec<i8>, rng: &mut rand_chacha::ChaCha8Rng| {
        for site in 0..small.num_sites {
            let e0 = small.energy(spins).unwrap();
            spins[site] = -spins[site];
            let de = small.energy(spins).unwrap() - e0;
            if !(de <= 0.0 || rng.gen::<f64>() < (-beta * de).exp()) {
                spins[site] = -spins[site];
            }
        }
    };
    for _ in 0..500 {
        sweep(&mut spins, &mut rng);
    }
    let samples = 40_000;
    let mut counts = vec![0u64; 8];
    for _ in 0..samples {
        for _ in 0..5 {
            sweep(&mut spins, &mut rng);
        }
        let idx: usize = spins
            .iter()
            .enumerate()
            .map(|(i, &s)| if s == -1 { 1usize << i } else { 0 })
            .sum();
        counts[idx] += 1;
    }
    let mut chi2 = 0.0;
    for (c, w) in counts.iter().zip(&weights) {
        let expected = samples as f64 * w / z;
        chi2 += (*c as f64 - expected) * (*c as f64 - expected) / expected;
    }
    // 99.9th percentile of chi-squared with 7 degrees of freedom.
    assert!(chi2 < 24.3, "chi2 = {chi2}");
    pass(10, "127-spin runs order cold and disorder hot; sampler and gauge identity verified");
}

#[test]
fn criterion_11_seeded_reruns_are_bit_exact() {
    let bin = env!("CARGO_BIN_EXE_ic-lab");
    let dir = std::env::temp_dir().join("ic-lab-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let rerun = |args: &[&str]| -> (Vec<u8>, Vec<Vec<u8>>, Vec<u8>) {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(
            out.status.code().map_or(false, |c| c == 0 || c == 1),
            "command failed: {:?}",
            String::from_utf8_lossy(&out.stderr)
        );
        let files = args
            .iter()
            .zip(args.iter().skip(1))
            .filter(|(flag, _)| **flag == "--out" || **flag == "--csv")
            .map(|(_, path)| std::fs::read(path).unwrap())
            .collect();
        (out.stdout.clone(), files, out.stderr.clone())
    };
    let json1 = dir.join("m.json");
    let csv1 = dir.join("m.csv");
    let monogamy: Vec<String> = [
        "bell", "monogamy", "--relation", "chsh8", "--receivers", "1", "--source", "random:3",
        "--optimize", "--seed", "9", "--restarts", "1", "--iterations", "8",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([
        "--csv".to_string(),
        csv1.display().to_string(),
        "--out".to_string(),
        json1.display().to_string(),
    ])
    .collect();
    let margs: Vec<&str> = monogamy.iter().map(String::as_str).collect();
    let first = rerun(&margs);
    let second = rerun(&margs);
    assert_eq!(first, second, "monogamy rerun must be bit-exact");

    let ising_json = dir.join("i.json");
    let ising: Vec<String> = [
        "ising", "scan", "--depth", "3", "--steps", "3", "--seed", "5", "--burn-in", "200",
        "--measure", "500",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain(["--out".to_string(), ising_json.display().to_string()])
    .collect();
    let iargs: Vec<&str> = ising.iter().map(String::as_str).collect();
    assert_eq!(rerun(&iargs), rerun(&iargs), "ising rerun must be bit-exact");

    let es = ["es", "verify", "--trials", "500", "--seed", "3"];
    assert_eq!(rerun(&es), rerun(&es), "probe rerun must be bit-exact");
    pass(11, "seeded CLI reruns reproduce stdout, JSON, and CSV bit-exactly");
}
