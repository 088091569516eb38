use cclb_core::facnorm::acceptance_gamma2_check;
use cclb_core::matrices::BitString;
use cclb_core::protosim::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair(n: usize, d: usize) -> (BitString, BitString) {
    let x = BitString::from_bits(&(0..n).map(|i| i % 3 == 0).collect::<Vec<_>>());
    let mut y = x.clone();
    for i in 0..d {
        y.flip(i * n / d.max(1));
    }
    assert_eq!(x.hamming(&y).unwrap(), d);
    (x, y)
}

/// Probability that deleting `⌈n/2⌉` of `n` coordinates removes all `d` differences.
fn survive_prob(n: usize, d: usize) -> f64 {
    let drop = n.div_ceil(2);
    (0..d).map(|i| (drop - i) as f64 / (n - i) as f64).product()
}

fn sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn eqtest_one_sided() {
    let trials = 100_000;
    let (x, y) = pair(32, 1);
    let same = run_trials(trials, 1, |rng| eqtest(&x, &x, 1e-3, rng).unwrap());
    assert_eq!(same.accept_count, trials);
    let diff = run_trials(trials, 2, |rng| eqtest(&x, &y, 1e-3, rng).unwrap());
    assert!(diff.empirical_prob <= 1e-3 + 3.0 * sigma(1e-3, trials));
    // Four subtests pass an unequal pair with probability exactly 1/16.
    let loose = run_trials(trials, 3, |rng| eqtest(&x, &y, 0.25, rng).unwrap());
    assert!(loose.contains(1.0 / 16.0) || (loose.empirical_prob - 1.0 / 16.0).abs() < 4.0 * sigma(1.0 / 16.0, trials));
}

#[test]
fn eqtest_rejects_length_mismatch() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(eqtest(&BitString::zeros(3), &BitString::zeros(4), 0.1, &mut rng).is_err());
}

#[test]
fn simulations_are_reproducible() {
    let (x, y) = pair(16, 2);
    let a = hd1_round_event(&x, &y, 1e-3, 2000, 77).unwrap();
    let b = hd1_round_event(&x, &y, 1e-3, 2000, 77).unwrap();
    assert_eq!(a, b);
    let mut r1 = ChaCha8Rng::seed_from_u64(5);
    let mut r2 = ChaCha8Rng::seed_from_u64(5);
    let s1: Vec<bool> = (0..50).map(|_| eqtest(&x, &y, 0.3, &mut r1).unwrap()).collect();
    let s2: Vec<bool> = (0..50).map(|_| eqtest(&x, &y, 0.3, &mut r2).unwrap()).collect();
    assert_eq!(s1, s2);
}

#[test]
fn round_event_matches_deletion_probability() {
    let trials = 100_000;
    let n = 64;
    let mut last = 1.0;
    for d in 1..=6 {
        let (x, y) = pair(n, d);
        let st = hd1_round_event(&x, &y, 1e-6, trials, 10 + d as u64).unwrap();
        let p = survive_prob(n, d);
        assert!((st.empirical_prob - p).abs() <= 4.0 * sigma(p, trials) + 1e-4, "d={d}: {} vs {p}", st.empirical_prob);
        assert!(st.empirical_prob <= last);
        last = st.empirical_prob;
    }
    let limits = [0.5, 0.25, 0.125];
    for (d, lim) in (1..=3).zip(limits) {
        let (x, y) = pair(n, d);
        let st = hd1_round_event(&x, &y, 1e-6, trials, 100 + d as u64).unwrap();
        assert!((st.empirical_prob - lim).abs() <= 0.02, "d={d}: {}", st.empirical_prob);
    }
}

#[test]
fn hd1_decisions() {
    let cfg = TrialConfig { trials: 1000, seed: 9, ..Default::default() };
    let (x, _) = pair(16, 0);
    let same = hd1_trials(&x, &x, &cfg).unwrap();
    assert_eq!(same.accept_count, 0);
    let (x, y) = pair(16, 1);
    assert!(hd1_trials(&x, &y, &cfg).unwrap().empirical_prob >= 0.95);
    let (x, y) = pair(16, 8);
    assert!(hd1_trials(&x, &y, &cfg).unwrap().empirical_prob <= 0.05);
}

#[test]
fn hd1_communication_independent_of_length() {
    let cfg = TrialConfig::default();
    let costs: Vec<usize> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let (x, y) = pair(n, 1);
            hd1_protocol(&x, &y, &cfg).unwrap().bits
        })
        .collect();
    assert!(costs.iter().all(|&c| c == costs[0]));
    assert_eq!(costs[0], 2 * 12 * 101);
    assert_eq!(hd1_cost(&cfg), costs[0]);
}

#[test]
fn config_validation() {
    assert!(TrialConfig { trials: 0, ..Default::default() }.validate().is_err());
    assert!(TrialConfig { epsilon: 0.5, ..Default::default() }.validate().is_err());
    assert!(TrialConfig { threshold: 101, ..Default::default() }.validate().is_err());
    assert!(TrialConfig::default().validate().is_ok());
}

#[test]
fn inner_product_sign() {
    let u = [0.6, 0.8];
    let out = oblivious_ip_protocol(&u, &u, 1.0, 2000, 1).unwrap();
    assert_eq!(out.sign, 1);
    assert!(out.empirical_error <= 0.02);
    let neg = [-0.6, -0.8];
    let out = oblivious_ip_protocol(&u, &neg, 1.0, 2000, 2).unwrap();
    assert_eq!(out.sign, -1);
    assert!(out.empirical_error <= 0.02);
    assert!(oblivious_ip_protocol(&[2.0], &[1.0], 1.0, 10, 0).is_err());
    assert_eq!(out.bits, ip_exchanges(1.0));
}

#[test]
fn oblivious_error_is_flat() {
    let errs = oblivious_error_profile(2, 10_000, 4).unwrap();
    assert_eq!(errs.len(), 16);
    let lo = errs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = errs.iter().cloned().fold(0.0, f64::max);
    assert!(hi - lo <= 0.03, "spread {}", hi - lo);
}

#[test]
fn one_bit_equality_matrix() {
    let cfg = TrialConfig { trials: 100_000, seed: 3, ..Default::default() };
    let p = acceptance_matrix(ProtocolId::Eq1Bit, 2, &cfg).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let target = if i == j { 1.0 } else { 0.5 };
            assert!((p[(i, j)] - target).abs() <= 0.01, "({i},{j}) = {}", p[(i, j)]);
        }
    }
    assert!(acceptance_gamma2_check(&p, ProtocolId::Eq1Bit.cost(2, &cfg).unwrap() as f64, 1e-5).unwrap());
}

#[test]
fn full_exchange_matrix_is_exact() {
    let p = acceptance_matrix(ProtocolId::EqFull, 3, &TrialConfig::default()).unwrap();
    assert!(p.as_slice().iter().all(|&x| x == 0.0 || x == 1.0));
    assert_eq!(p.as_slice().iter().sum::<f64>(), 8.0);
}

#[test]
fn hd1_matrix_passes_gamma2_check() {
    let cfg = TrialConfig { trials: 60, seed: 11, ..Default::default() };
    let p = acceptance_matrix(ProtocolId::Hd1, 3, &cfg).unwrap();
    let cost = ProtocolId::Hd1.cost(3, &cfg).unwrap() as f64;
    assert!(acceptance_gamma2_check(&p, cost, 1e-5).unwrap());
}

#[test]
fn acceptance_domain_cap() {
    let err = acceptance_matrix(ProtocolId::Eq1Bit, 7, &TrialConfig::default()).unwrap_err();
    assert!(err.is_cap());
}
