use cclb_core::exactcomb::{deterministic_cc, SearchBudget};
use cclb_core::lpbounds::*;
use cclb_core::matrices::{gen_equality, gen_hadamard, random_matrix};
use cclb_core::optcore::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use cclb_core::{CommMatrix, Convention, Distribution, Rational, Rectangle};
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn rects(m: &CommMatrix) -> Vec<Rectangle> {
    let (r, c) = (m.rows(), m.cols());
    let mut out = Vec::new();
    for rm in 1u64..1 << r {
        for cm in 1u64..1 << c {
            out.push(Rectangle::from_masks(r, c, rm, cm));
        }
    }
    out
}

fn q(x: f64) -> Rational {
    Rational::from_float(x).unwrap()
}

fn solve_exact(lp: &LinearProgram<Rational>) -> f64 {
    let s = solve_lp(lp).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    s.objective.to_f64().unwrap()
}

/// Primal partition program over every `(z, R)`.
fn prt_primal(m: &CommMatrix, eps: f64) -> f64 {
    let rs = rects(m);
    let nv = 2 * rs.len();
    let mut lp = LinearProgram::<Rational>::new(Sense::Min, nv);
    for k in 0..nv {
        lp.set_objective(k, Rational::one());
    }
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let mut good = vec![Rational::zero(); nv];
            let mut all = vec![Rational::zero(); nv];
            for (t, r) in rs.iter().enumerate() {
                if r.contains(i, j) {
                    let z = m.bit(i, j) as usize;
                    good[2 * t + z] = Rational::one();
                    all[2 * t] = Rational::one();
                    all[2 * t + 1] = Rational::one();
                }
            }
            lp.add_constraint(good, Relation::Ge, Rational::one() - q(eps));
            lp.add_constraint(all, Relation::Eq, Rational::one());
        }
    }
    solve_exact(&lp)
}

/// Primal rectangle program; `smooth` adds the `≤ 1` rows on `z`-cells.
fn rec_primal(m: &CommMatrix, z: bool, eps: f64, smooth: bool) -> f64 {
    let rs = rects(m);
    let mut lp = LinearProgram::<Rational>::new(Sense::Min, rs.len());
    for k in 0..rs.len() {
        lp.set_objective(k, Rational::one());
    }
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let row: Vec<Rational> =
                rs.iter().map(|r| if r.contains(i, j) { Rational::one() } else { Rational::zero() }).collect();
            if m.bit(i, j) == z {
                lp.add_constraint(row.clone(), Relation::Ge, Rational::one() - q(eps));
                if smooth {
                    lp.add_constraint(row, Relation::Le, Rational::one());
                }
            } else {
                lp.add_constraint(row, Relation::Le, q(eps));
            }
        }
    }
    solve_exact(&lp)
}

/// Relaxed partition program written as `max η` over normalized `p`.
fn prt_bar_primal(m: &CommMatrix, mu: &Distribution, eps: f64) -> f64 {
    let rs = rects(m);
    let nv = 2 * rs.len() + 1;
    let eta = nv - 1;
    let mut lp = LinearProgram::<f64>::new(Sense::Max, nv);
    lp.set_objective(eta, 1.0);
    let mut succ = vec![0.0; nv];
    for (t, r) in rs.iter().enumerate() {
        for z in [false, true] {
            succ[2 * t + z as usize] = mu.mass_of_value(m, r, z);
        }
    }
    succ[eta] = -(1.0 - eps);
    lp.add_constraint(succ, Relation::Ge, 0.0);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let mut row = vec![0.0; nv];
            for (t, r) in rs.iter().enumerate() {
                if r.contains(i, j) {
                    row[2 * t] = 1.0;
                    row[2 * t + 1] = 1.0;
                }
            }
            row[eta] = -1.0;
            lp.add_constraint(row, Relation::Le, 0.0);
        }
    }
    let mut total = vec![1.0; nv];
    total[eta] = 0.0;
    lp.add_constraint(total, Relation::Eq, 1.0);
    let s = solve_lp(&lp).unwrap();
    1.0 / s.value()
}

fn brute_disc(m: &CommMatrix, mu: &Distribution) -> f64 {
    rects(m)
        .iter()
        .map(|r| (mu.mass_of_value(m, r, false) - mu.mass_of_value(m, r, true)).abs())
        .fold(0.0, f64::max)
}

fn cfg() -> BoundConfig {
    BoundConfig::default()
}

fn random_dist(rows: usize, cols: usize, seed: u64) -> Distribution {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let w = (0..rows * cols).map(|_| rng.random_range(0.05..1.0)).collect();
    Distribution::normalized(rows, cols, w).unwrap()
}

#[test]
fn disc_under_small_cases() {
    let ones = CommMatrix::all_ones(3, 3, Convention::Boolean01).unwrap();
    let r = discrepancy_under(&ones, &Distribution::uniform(3, 3), &cfg()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-12);
    assert_eq!(r.kind, BoundKind::Exact);

    let eq1 = gen_equality(1).unwrap();
    let u = Distribution::uniform(2, 2);
    let r = discrepancy_under(&eq1, &u, &cfg()).unwrap();
    assert!((r.value - brute_disc(&eq1, &u)).abs() < 1e-12);
    assert!((r.value - 0.25).abs() < 1e-12);

    let h = gen_hadamard(1).unwrap().to_bool();
    let r = discrepancy_under(&h, &u, &cfg()).unwrap();
    assert!((r.value - 0.5).abs() < 1e-12);
}

#[test]
fn disc_under_rejects_wide_exact_requests() {
    let m = random_matrix(21, 21, Convention::Boolean01, 1).unwrap();
    let err = discrepancy_under(&m, &Distribution::uniform(21, 21), &cfg()).unwrap_err();
    assert!(err.is_cap());
    let r = discrepancy_under(&m, &Distribution::uniform(21, 21), &BoundConfig::heuristic()).unwrap();
    assert_eq!(r.kind, BoundKind::LowerBoundOnly);
}

#[test]
fn weak_regularity_matches_discrepancy() {
    let ones = CommMatrix::all_ones(3, 3, Convention::Boolean01).unwrap();
    let w = weak_regularity(&ones, &Distribution::uniform(3, 3), &cfg()).unwrap();
    assert!((w.value - 1.0).abs() < 1e-12);
    for seed in 0..40 {
        let (r, c) = if seed < 30 { (3, 3) } else { (5, 5) };
        let m = random_matrix(r, c, Convention::Boolean01, seed).unwrap();
        let mu = random_dist(r, c, seed + 100);
        let w = weak_regularity(&m, &mu, &cfg()).unwrap();
        let d = discrepancy_under(&m, &mu, &cfg()).unwrap();
        assert!((w.value - d.value).abs() < 1e-9, "seed {seed}");
        assert!(w.value >= 0.0);
    }
}

#[test]
fn discrepancy_lp_self_certifies() {
    let ones = CommMatrix::all_ones(3, 3, Convention::Boolean01).unwrap();
    let r = discrepancy(&ones, &cfg()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-7);

    let eq2 = gen_equality(2).unwrap();
    let r = discrepancy(&eq2, &cfg()).unwrap();
    assert_eq!(r.kind, BoundKind::Exact);
    let mu = r.certificate.distribution.clone().unwrap();
    assert!((brute_disc(&eq2, &mu) - r.value).abs() < 1e-6);
    assert!(r.lower <= r.value + 1e-9);
}

#[test]
fn discrepancy_lazy_agrees_with_full_program() {
    for seed in 0..6 {
        let m = random_matrix(3, 4, Convention::Boolean01, seed).unwrap();
        let lazy = discrepancy(&m, &cfg()).unwrap();
        let full = discrepancy(&m, &BoundConfig::full()).unwrap();
        assert!((lazy.value - full.value).abs() < 1e-6, "seed {seed}: {} vs {}", lazy.value, full.value);
    }
}

#[test]
fn rectangle_bound_examples() {
    let ones = CommMatrix::all_ones(3, 3, Convention::Boolean01).unwrap();
    assert!((rectangle_bound_lp(&ones, true, 0.0, &cfg()).unwrap().value - 1.0).abs() < 1e-7);
    let eq1 = gen_equality(1).unwrap();
    assert!((rectangle_bound_lp(&eq1, true, 0.0, &cfg()).unwrap().value - 2.0).abs() < 1e-7);
    assert!((smooth_rectangle_bound_lp(&ones, true, 0.0, &cfg()).unwrap().value - 1.0).abs() < 1e-7);
    assert!((smooth_rectangle_bound_lp(&eq1, true, 0.0, &cfg()).unwrap().value - 2.0).abs() < 1e-7);
}

#[test]
fn rectangle_programs_match_primal_enumeration() {
    for seed in 0..8 {
        let m = random_matrix(3, 3, Convention::Boolean01, seed).unwrap();
        for z in [false, true] {
            for eps in [0.0, 0.2] {
                let a = rectangle_bound_lp(&m, z, eps, &cfg()).unwrap();
                assert!((a.value - rec_primal(&m, z, eps, false)).abs() < 1e-6, "rec seed {seed}");
                let b = smooth_rectangle_bound_lp(&m, z, eps, &cfg()).unwrap();
                assert!((b.value - rec_primal(&m, z, eps, true)).abs() < 1e-6, "srec seed {seed}");
                let rw: f64 = a.certificate.rectangles.iter().map(|w| w.weight).sum();
                assert!((rw - a.value).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn rectangle_bound_monotone_in_eps() {
    for seed in 0..5 {
        let m = random_matrix(4, 4, Convention::Boolean01, seed).unwrap();
        let a = rectangle_bound_lp(&m, true, 0.0, &cfg()).unwrap();
        let b = rectangle_bound_lp(&m, true, 0.49, &cfg()).unwrap();
        assert!(b.value <= a.value + 1e-7);
    }
}

#[test]
fn partition_bound_examples() {
    let ones = CommMatrix::all_ones(2, 3, Convention::Boolean01).unwrap();
    for eps in [0.0, 0.1, 1.0 / 3.0] {
        assert!((partition_bound(&ones, eps, &cfg()).unwrap().value - 1.0).abs() < 1e-7);
    }
    let eq1 = gen_equality(1).unwrap();
    let r = partition_bound(&eq1, 0.0, &cfg()).unwrap();
    assert!((r.value - 4.0).abs() < 1e-7);
    assert!((prt_primal(&eq1, 0.0) - 4.0).abs() < 1e-12);
    let mut last = 0.0;
    for n in 1..=3 {
        let m = gen_equality(n).unwrap();
        let r = partition_bound(&m, 1.0 / 3.0, &cfg()).unwrap();
        assert_eq!(r.kind, BoundKind::Exact, "n={n}");
        assert!(r.upper <= 16.0, "n={n}: {}", r.upper);
        assert!(r.value >= last - 1e-7);
        last = r.value;
    }
    assert!(last > 2.0);
}

#[test]
fn partition_bound_matches_primal_enumeration() {
    for seed in 0..8 {
        let m = random_matrix(3, 3, Convention::Boolean01, 50 + seed).unwrap();
        for eps in [0.0, 1.0 / 3.0] {
            let v = partition_bound(&m, eps, &cfg()).unwrap().value;
            assert!((v - prt_primal(&m, eps)).abs() < 1e-6, "seed {seed}");
        }
    }
}

#[test]
fn partition_bound_below_deterministic_cost() {
    let budget = SearchBudget::protocol();
    for seed in 0..20 {
        let m = random_matrix(4, 4, Convention::Boolean01, 200 + seed).unwrap();
        let p = partition_bound(&m, 1.0 / 3.0, &cfg()).unwrap();
        let d = deterministic_cc(&m, &budget).unwrap() as f64;
        assert!(p.value.log2() <= d + 1e-6);
    }
}

#[test]
fn rec_srec_prt_chain() {
    for seed in 0..25 {
        let (r, c) = if seed % 2 == 0 { (4, 4) } else { (5, 5) };
        let m = random_matrix(r, c, Convention::Boolean01, 300 + seed).unwrap();
        let p = partition_bound(&m, 1.0 / 3.0, &cfg()).unwrap().value;
        for z in [false, true] {
            let a = rectangle_bound_lp(&m, z, 1.0 / 3.0, &cfg()).unwrap().value;
            let b = smooth_rectangle_bound_lp(&m, z, 1.0 / 3.0, &cfg()).unwrap().value;
            assert!(a <= b + 1e-6 && b <= p + 1e-6, "seed {seed}: {a} {b} {p}");
        }
    }
}

#[test]
fn relaxed_partition_examples() {
    let ones = CommMatrix::all_ones(2, 2, Convention::Boolean01).unwrap();
    let u = Distribution::uniform(2, 2);
    let v = relaxed_partition_bound(&ones, &u, 0.0, &cfg()).unwrap().value;
    assert!((v - 1.0).abs() < 1e-7);
    let v = relaxed_partition_bound(&ones, &u, 0.25, &cfg()).unwrap().value;
    assert!((v - 0.75).abs() < 1e-7);
    let eq1 = gen_equality(1).unwrap();
    let v = relaxed_partition_bound(&eq1, &u, 0.0, &cfg()).unwrap().value;
    assert!((v - prt_bar_primal(&eq1, &u, 0.0)).abs() < 1e-6);
}

#[test]
fn relaxed_partition_matches_primal() {
    for seed in 0..8 {
        let m = random_matrix(3, 3, Convention::Boolean01, 400 + seed).unwrap();
        let mu = random_dist(3, 3, seed);
        for eps in [0.0, 0.2] {
            let v = relaxed_partition_bound(&m, &mu, eps, &cfg()).unwrap().value;
            assert!((v - prt_bar_primal(&m, &mu, eps)).abs() < 1e-6, "seed {seed}");
        }
    }
}

#[test]
fn fontes_family_chain_and_weak_regularity_floor() {
    let ones = CommMatrix::all_ones(3, 3, Convention::Boolean01).unwrap();
    let u = Distribution::uniform(3, 3);
    let v = fontes_family(&ones, &u, 0.0, FontesKind::FixedPrt, &cfg()).unwrap().value;
    assert!((v - 1.0).abs() < 1e-7);
    for seed in 0..15 {
        let (r, c) = if seed % 3 == 0 { (4, 4) } else { (3, 3) };
        let m = random_matrix(r, c, Convention::Boolean01, 500 + seed).unwrap();
        let mu = random_dist(r, c, 900 + seed);
        let eps = [0.0, 0.1, 0.3][seed as usize % 3];
        let w = fontes_family(&m, &mu, eps, FontesKind::WeakPrt, &cfg()).unwrap().value;
        let p = fontes_family(&m, &mu, eps, FontesKind::PositivePrt, &cfg()).unwrap().value;
        let f = fontes_family(&m, &mu, eps, FontesKind::FixedPrt, &cfg()).unwrap().value;
        let bar = relaxed_partition_bound(&m, &mu, eps, &cfg()).unwrap().value;
        assert!(w <= p + 1e-6 && p <= f + 1e-6, "seed {seed}: {w} {p} {f}");
        assert!(w <= bar + 1e-6 && bar <= f + 1e-6, "seed {seed}: {w} {bar} {f}");
        let wr = weak_regularity(&m, &mu, &cfg()).unwrap().value;
        assert!(w >= (1.0 - 2.0 * eps) / wr - 1e-6, "seed {seed}");
    }
}

#[test]
fn fontes_lazy_agrees_with_full_program() {
    for seed in 0..4 {
        let m = random_matrix(3, 3, Convention::Boolean01, 600 + seed).unwrap();
        let mu = random_dist(3, 3, seed);
        for kind in [FontesKind::FixedPrt, FontesKind::PositivePrt, FontesKind::WeakPrt] {
            let a = fontes_family(&m, &mu, 0.1, kind, &cfg()).unwrap().value;
            let b = fontes_family(&m, &mu, 0.1, kind, &BoundConfig::full()).unwrap().value;
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn conventional_rectangle_bound() {
    let ones = CommMatrix::all_ones(3, 3, Convention::Boolean01).unwrap();
    let u = Distribution::uniform(3, 3);
    for eps in [0.1, 0.3] {
        let r = rectangle_bound_conventional(&ones, true, eps, &u).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }
    let eq2 = gen_equality(2).unwrap();
    let err = rectangle_bound_conventional(&eq2, true, 0.25, &Distribution::uniform(4, 4)).unwrap_err();
    assert!(matches!(err, cclb_core::Error::Precondition(_)));
    // λ supported on the diagonal leaves every off-diagonal cell weightless,
    // so the full rectangle is admissible.
    let diag = Distribution::uniform_on(4, 4, |i, j| i == j).unwrap();
    let r = rectangle_bound_conventional(&eq2, true, 0.25, &diag).unwrap();
    assert!((r.value - 1.0).abs() < 1e-12);
    // Mixing in off-diagonal mass forces single-diagonal-cell rectangles.
    let w: Vec<f64> = (0..16).map(|k| if k / 4 == k % 4 { 0.125 } else { 0.5 / 12.0 }).collect();
    let lam = Distribution::normalized(4, 4, w).unwrap();
    let r = rectangle_bound_conventional(&eq2, true, 0.25, &lam).unwrap();
    assert!((r.value - 8.0).abs() < 1e-9);
    // Admissibility is strict, so ε = 0 rules out even monochromatic rectangles.
    let r = rectangle_bound_conventional(&ones, true, 0.0, &u).unwrap();
    assert_eq!(r.kind, BoundKind::Unbounded);
}

#[test]
fn conventional_unbounded_without_admissible_rectangle() {
    let eq1 = gen_equality(1).unwrap();
    let lam = Distribution::uniform(2, 2);
    let r = rectangle_bound_conventional(&eq1, true, 0.0, &lam).unwrap();
    // Singletons on the diagonal carry no off-fiber mass, but ε = 0 makes the
    // strict inequality unsatisfiable.
    assert_eq!(r.kind, BoundKind::Unbounded);
}

#[test]
fn product_discrepancy_upper_examples() {
    let ones = CommMatrix::all_ones(3, 3, Convention::Boolean01).unwrap();
    let r = product_discrepancy_upper(&ones, 2, 1, &cfg()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-9);
    let h = gen_hadamard(1).unwrap().to_bool();
    let r = product_discrepancy_upper(&h, 3, 1, &cfg()).unwrap();
    assert!(r.value <= 0.5 + 1e-12);
    for seed in 0..5 {
        let m = random_matrix(4, 5, Convention::Boolean01, 700 + seed).unwrap();
        let r = product_discrepancy_upper(&m, 3, seed, &cfg()).unwrap();
        let uni = discrepancy_under(&m, &Distribution::uniform(4, 5), &cfg()).unwrap().value;
        assert!(r.value <= uni + 1e-12);
        let mu = r.certificate.distribution.unwrap();
        assert!((brute_disc(&m, &mu) - r.value).abs() < 1e-9);
        let general = discrepancy(&m, &cfg()).unwrap();
        assert!(general.lower <= r.value + 1e-7);
    }
}

#[test]
fn candidate_rectangle_bound_is_lower_bound_kind() {
    let m = random_matrix(4, 4, Convention::Boolean01, 11).unwrap();
    let z = m.count_ones() * 2 >= 16;
    let r = rectangle_bound_candidates(&m, z, 0.2, &cfg()).unwrap();
    assert!(matches!(r.kind, BoundKind::LowerBoundOnly | BoundKind::Unbounded));
}

#[test]
fn bound_request_validation() {
    let m = gen_equality(1).unwrap();
    assert!(BoundRequest::new(m.clone(), 0.5).validate().is_err());
    assert!(BoundRequest::new(m.clone(), 0.2).with_mu(Distribution::uniform(3, 3)).validate().is_err());
    assert!(BoundRequest::new(m, 0.2).validate().is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_certificates_reevaluate(seed in 0u64..10_000, eps in 0.0f64..0.45) {
        let m = random_matrix(3, 4, Convention::Boolean01, seed).unwrap();
        let r = partition_bound(&m, eps, &cfg()).unwrap();
        prop_assert_eq!(r.kind, BoundKind::Exact);
        let pt = &r.certificate.point;
        let n = 12;
        let obj: f64 = (0..n).map(|k| (1.0 - eps) * pt[k] + pt[n + k]).sum();
        prop_assert!((obj - r.value).abs() < 1e-6);
        for rect in rects(&m) {
            for z in [false, true] {
                let lhs: f64 = rect.cells().map(|(i, j)| {
                    let k = i * 4 + j;
                    pt[n + k] + if m.bit(i, j) == z { pt[k] } else { 0.0 }
                }).sum();
                prop_assert!(lhs <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn prop_disc_under_is_brute_max(seed in 0u64..10_000) {
        let m = random_matrix(4, 3, Convention::Boolean01, seed).unwrap();
        let mu = random_dist(4, 3, seed ^ 0xabc);
        let r = discrepancy_under(&m, &mu, &cfg()).unwrap();
        prop_assert!((r.value - brute_disc(&m, &mu)).abs() < 1e-12);
        let rect = &r.certificate.rectangles[0].rect;
        let v = (mu.mass_of_value(&m, rect, false) - mu.mass_of_value(&m, rect, true)).abs();
        prop_assert!((v - r.value).abs() < 1e-12);
    }
}
