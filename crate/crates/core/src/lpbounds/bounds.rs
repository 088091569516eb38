use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use super::family::{solve_rect_program, CellFamily, RectProgramOutcome};
use super::{
    check_epsilon, BoundConfig, BoundKind, BoundResult, Certificate, Exactness, RectWeight, ENUMERATION_CAP,
};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::matrices::{CommMatrix, Distribution, Rectangle};
use crate::optcore::{LinearProgram, OracleMode, Relation, Sense};

/// `+1` where `f = 0`, `-1` where `f = 1`.
fn disc_sign(m: &CommMatrix, i: usize, j: usize) -> f64 {
    if m.bit(i, j) {
        -1.0
    } else {
        1.0
    }
}

fn singletons(r: usize, c: usize) -> Vec<Rectangle> {
    (0..r).flat_map(|i| (0..c).map(move |j| Rectangle::cell(r, c, i, j))).collect()
}

fn all_rectangles(r: usize, c: usize) -> Vec<Rectangle> {
    let mut out = Vec::with_capacity((1 << r) * (1 << c));
    for rm in 1u64..1 << r {
        for cm in 1u64..1 << c {
            out.push(Rectangle::from_masks(r, c, rm, cm));
        }
    }
    out
}

fn seeds(m: &CommMatrix, cfg: &BoundConfig) -> Vec<Rectangle> {
    let (r, c) = (m.rows(), m.cols());
    if cfg.full_enumeration {
        return all_rectangles(r, c);
    }
    let mut s = singletons(r, c);
    s.push(Rectangle::full(r, c));
    s
}

fn to_weights(out: &RectProgramOutcome) -> Vec<RectWeight> {
    out.active.iter().map(|(rect, label, w)| RectWeight { rect: rect.clone(), label: *label, weight: *w }).collect()
}

/// Packages a maximization-side outcome.
fn max_result(out: RectProgramOutcome, cfg: &BoundConfig) -> BoundResult {
    let upper = if out.upper_certified { out.upper } else { f64::INFINITY };
    let lower = if out.lower_certified { out.lower } else { f64::NEG_INFINITY };
    let close = upper - lower <= cfg.gap_tol * (1.0 + upper.abs());
    let (value, kind) = if close {
        (out.upper, BoundKind::Exact)
    } else if out.lower_certified {
        (lower, BoundKind::LowerBoundOnly)
    } else {
        (out.upper, BoundKind::UpperBoundOnly)
    };
    BoundResult {
        value,
        kind,
        lower,
        upper,
        certificate: Certificate { distribution: None, rectangles: to_weights(&out), point: out.point.clone() },
        cuts: out.cuts,
        rounds: out.rounds,
    }
}

/// `disc_μ(f) = max_R |μ(R ∩ f⁻¹(0)) − μ(R ∩ f⁻¹(1))|`.
pub fn discrepancy_under(m: &CommMatrix, mu: &Distribution, cfg: &BoundConfig) -> Result<BoundResult> {
    mu.matches(m)?;
    cfg.check(m, 0, "discrepancy_under")?;
    let w = DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| disc_sign(m, i, j) * mu.at(i, j));
    let oracle = cfg.oracle();
    let pos = oracle.maximize(&w);
    let neg = oracle.maximize(&w.scale(-1.0));
    let best = if pos.value() >= neg.value() { &pos.best[0] } else { &neg.best[0] };
    let value = best.value;
    let exact = pos.exact && neg.exact;
    let mut res = BoundResult::exact(value);
    if !exact {
        res.kind = BoundKind::LowerBoundOnly;
        res.upper = 1.0;
    }
    res.certificate = Certificate {
        distribution: Some(mu.clone()),
        point: Vec::new(),
        rectangles: vec![RectWeight { rect: best.rect.clone(), label: None, weight: 1.0 }],
    };
    Ok(res)
}

/// `wreg^μ(f) = max_{R,z} μ(R) − 2·μ(R ∩ f⁻¹(z))`.
pub fn weak_regularity(m: &CommMatrix, mu: &Distribution, cfg: &BoundConfig) -> Result<BoundResult> {
    mu.matches(m)?;
    cfg.check(m, 0, "weak_regularity")?;
    let oracle = cfg.oracle();
    let mut best: Option<(f64, Rectangle, bool)> = None;
    let mut exact = true;
    for z in [false, true] {
        let w = DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            let a = mu.at(i, j);
            if m.bit(i, j) == z {
                -a
            } else {
                a
            }
        });
        let ans = oracle.maximize(&w);
        exact &= ans.exact;
        if best.as_ref().map_or(true, |b| ans.value() > b.0) {
            best = Some((ans.value(), ans.best[0].rect.clone(), z));
        }
    }
    let (value, rect, z) = best.expect("two labels searched");
    let mut res = BoundResult::exact(value);
    if !exact {
        res.kind = BoundKind::LowerBoundOnly;
        res.upper = 1.0;
    }
    res.certificate = Certificate {
        distribution: Some(mu.clone()),
        point: Vec::new(),
        rectangles: vec![RectWeight { rect, label: Some(z), weight: 1.0 }],
    };
    Ok(res)
}

/// `disc(f) = min_μ disc_μ(f)`, as `1 / max{Σν : |Σ_R s·ν| ≤ 1 ∀R, ν ≥ 0}`.
///
/// `lower` is `1/V` for the restricted program value `V`; `upper` is the exact
/// discrepancy under the certificate distribution.
pub fn discrepancy(m: &CommMatrix, cfg: &BoundConfig) -> Result<BoundResult> {
    let (r, c) = (m.rows(), m.cols());
    let n = r * c;
    cfg.check(m, n, "discrepancy")?;
    let mut lp = LinearProgram::<f64>::new(Sense::Max, n);
    for k in 0..n {
        lp.set_objective(k, 1.0);
    }
    let mut plus = CellFamily::new(r, c, None);
    let mut minus = CellFamily::new(r, c, None);
    for i in 0..r {
        for j in 0..c {
            let s = disc_sign(m, i, j);
            plus.push(i, j, i * c + j, s);
            minus.push(i, j, i * c + j, -s);
        }
    }
    let fams = [plus, minus];
    let out = solve_rect_program(lp, &fams, &seeds(m, cfg), &cfg.oracle(), cfg.max_cuts)?;
    let lower = if out.upper_certified { 1.0 / out.upper } else { 0.0 };
    let mu = Distribution::normalized(r, c, out.point.clone())?;
    let eval = discrepancy_under(m, &mu, cfg)?;
    let certified_upper = eval.kind == BoundKind::Exact;
    let upper = if certified_upper { eval.value } else { 1.0 };
    let (value, kind) = if certified_upper && upper - lower <= cfg.gap_tol * (1.0 + upper) {
        (upper, BoundKind::Exact)
    } else if certified_upper {
        (upper, BoundKind::UpperBoundOnly)
    } else {
        (lower, BoundKind::LowerBoundOnly)
    };
    Ok(BoundResult {
        value,
        kind,
        lower,
        upper,
        certificate: Certificate { distribution: Some(mu), point: out.point.clone(), rectangles: to_weights(&out) },
        cuts: out.cuts,
        rounds: out.rounds,
    })
}

/// Dual of the rectangle-bound program for label `z`:
/// `max Σ_{f=z}(1−ε)μ − Σ_{f≠z} εμ` subject to `μ(R∩f⁻¹(z)) − μ(R∖f⁻¹(z)) ≤ 1`.
pub fn rectangle_bound_lp(m: &CommMatrix, z: bool, eps: f64, cfg: &BoundConfig) -> Result<BoundResult> {
    check_epsilon(eps)?;
    let (r, c) = (m.rows(), m.cols());
    let n = r * c;
    cfg.check(m, n, "rectangle_bound_lp")?;
    let mut lp = LinearProgram::<f64>::new(Sense::Max, n);
    let mut fam = CellFamily::new(r, c, Some(z));
    for i in 0..r {
        for j in 0..c {
            let k = i * c + j;
            if m.bit(i, j) == z {
                lp.set_objective(k, 1.0 - eps);
                fam.push(i, j, k, 1.0);
            } else {
                lp.set_objective(k, -eps);
                fam.push(i, j, k, -1.0);
            }
        }
    }
    let out = solve_rect_program(lp, &[fam], &seeds(m, cfg), &cfg.oracle(), cfg.max_cuts)?;
    Ok(max_result(out, cfg))
}

/// Dual of the smooth rectangle-bound program for label `z`, with the extra
/// variables `φ ≥ 0` on `z`-cells from the upper coverage constraints.
pub fn smooth_rectangle_bound_lp(m: &CommMatrix, z: bool, eps: f64, cfg: &BoundConfig) -> Result<BoundResult> {
    check_epsilon(eps)?;
    let (r, c) = (m.rows(), m.cols());
    let n = r * c;
    let zcells: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).filter(|&(i, j)| m.bit(i, j) == z).collect();
    let nv = n + zcells.len();
    cfg.check(m, nv, "smooth_rectangle_bound_lp")?;
    let mut lp = LinearProgram::<f64>::new(Sense::Max, nv);
    let mut fam = CellFamily::new(r, c, Some(z));
    for i in 0..r {
        for j in 0..c {
            let k = i * c + j;
            if m.bit(i, j) == z {
                lp.set_objective(k, 1.0 - eps);
                fam.push(i, j, k, 1.0);
            } else {
                lp.set_objective(k, -eps);
                fam.push(i, j, k, -1.0);
            }
        }
    }
    for (t, &(i, j)) in zcells.iter().enumerate() {
        lp.set_objective(n + t, -1.0);
        fam.push(i, j, n + t, -1.0);
    }
    let out = solve_rect_program(lp, &[fam], &seeds(m, cfg), &cfg.oracle(), cfg.max_cuts)?;
    Ok(max_result(out, cfg))
}

/// Partition bound through its dual: `max Σ(1−ε)μ + Σφ` subject to
/// `μ(R ∩ f⁻¹(z)) + φ(R) ≤ 1` for every `(z, R)`, `μ ≥ 0`, `φ` free.
pub fn partition_bound(m: &CommMatrix, eps: f64, cfg: &BoundConfig) -> Result<BoundResult> {
    check_epsilon(eps)?;
    let (r, c) = (m.rows(), m.cols());
    let n = r * c;
    cfg.check(m, 2 * n, "partition_bound")?;
    let mut lp = LinearProgram::<f64>::new(Sense::Max, 2 * n);
    for k in 0..n {
        lp.set_objective(k, 1.0 - eps);
        lp.set_objective(n + k, 1.0);
        lp.set_free(n + k);
    }
    let fams: Vec<CellFamily> = [false, true]
        .into_iter()
        .map(|z| {
            let mut fam = CellFamily::new(r, c, Some(z));
            for i in 0..r {
                for j in 0..c {
                    let k = i * c + j;
                    if m.bit(i, j) == z {
                        fam.push(i, j, k, 1.0);
                    }
                    fam.push(i, j, n + k, 1.0);
                }
            }
            fam
        })
        .collect();
    let out = solve_rect_program(lp, &fams, &seeds(m, cfg), &cfg.oracle(), cfg.max_cuts)?;
    Ok(max_result(out, cfg))
}

/// Distributional relaxed partition bound through the dual of
/// `min Σq` s.t. `Σ q_{R,z} μ(R ∩ f⁻¹(z)) ≥ 1−ε`, per-cell coverage `≤ 1`:
/// `max (1−ε)α − Σβ` subject to `α μ(R ∩ f⁻¹(z)) − β(R) ≤ 1`, `α, β ≥ 0`.
pub fn relaxed_partition_bound(m: &CommMatrix, mu: &Distribution, eps: f64, cfg: &BoundConfig) -> Result<BoundResult> {
    check_epsilon(eps)?;
    mu.matches(m)?;
    let (r, c) = (m.rows(), m.cols());
    let n = r * c;
    cfg.check(m, n + 1, "relaxed_partition_bound")?;
    let mut lp = LinearProgram::<f64>::new(Sense::Max, n + 1);
    lp.set_objective(0, 1.0 - eps);
    for k in 0..n {
        lp.set_objective(1 + k, -1.0);
    }
    let fams: Vec<CellFamily> = [false, true]
        .into_iter()
        .map(|z| {
            let mut fam = CellFamily::new(r, c, Some(z));
            for i in 0..r {
                for j in 0..c {
                    if m.bit(i, j) == z {
                        fam.push(i, j, 0, mu.at(i, j));
                    }
                    fam.push(i, j, 1 + i * c + j, -1.0);
                }
            }
            fam
        })
        .collect();
    let out = solve_rect_program(lp, &fams, &seeds(m, cfg), &cfg.oracle(), cfg.max_cuts)?;
    let mut res = max_result(out, cfg);
    res.certificate.distribution = Some(mu.clone());
    Ok(res)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FontesKind {
    /// `φ` free.
    FixedPrt,
    /// `φ ≥ 0`.
    PositivePrt,
    /// `0 ≤ φ ≤ κμ` cellwise.
    WeakPrt,
}

/// `max Σφ − εκ` subject to `φ(R) − κ μ(R ∩ f⁻¹(z)) ≤ 1` for every `(R, z)`, `κ ≥ 0`.
pub fn fontes_family(
    m: &CommMatrix,
    mu: &Distribution,
    eps: f64,
    kind: FontesKind,
    cfg: &BoundConfig,
) -> Result<BoundResult> {
    check_epsilon(eps)?;
    mu.matches(m)?;
    let (r, c) = (m.rows(), m.cols());
    let n = r * c;
    cfg.check(m, n + 1, "fontes_family")?;
    let mut lp = LinearProgram::<f64>::new(Sense::Max, n + 1);
    lp.set_objective(0, -eps);
    for k in 0..n {
        lp.set_objective(1 + k, 1.0);
        if kind == FontesKind::FixedPrt {
            lp.set_free(1 + k);
        }
    }
    if kind == FontesKind::WeakPrt {
        for i in 0..r {
            for j in 0..c {
                lp.add_sparse(&[(0, mu.at(i, j)), (1 + i * c + j, -1.0)], Relation::Ge, 0.0);
            }
        }
    }
    let fams: Vec<CellFamily> = [false, true]
        .into_iter()
        .map(|z| {
            let mut fam = CellFamily::new(r, c, Some(z));
            for i in 0..r {
                for j in 0..c {
                    if m.bit(i, j) == z {
                        fam.push(i, j, 0, -mu.at(i, j));
                    }
                    fam.push(i, j, 1 + i * c + j, 1.0);
                }
            }
            fam
        })
        .collect();
    let out = solve_rect_program(lp, &fams, &seeds(m, cfg), &cfg.oracle(), cfg.max_cuts)?;
    let mut res = max_result(out, cfg);
    res.certificate.distribution = Some(mu.clone());
    Ok(res)
}

/// Conventional rectangle bound `rec^{z,λ}_ε`: the minimum of `1/λ(R ∩ f⁻¹(z))`
/// over rectangles with `ε·λ(R ∩ f⁻¹(z)) > λ(R ∖ f⁻¹(z))`, by exhaustive search.
pub fn rectangle_bound_conventional(m: &CommMatrix, z: bool, eps: f64, lambda: &Distribution) -> Result<BoundResult> {
    check_epsilon(eps)?;
    lambda.matches(m)?;
    let (r, c) = (m.rows(), m.cols());
    if r + c > ENUMERATION_CAP {
        return Err(Error::SizeLimit(format!(
            "rectangle_bound_conventional enumerates all rectangles; rows+cols {} exceeds {ENUMERATION_CAP}",
            r + c
        )));
    }
    let fiber = lambda.fiber_mass(m, z);
    if fiber < 0.5 - 1e-12 {
        return Err(Error::Precondition(format!("λ(f⁻¹({})) = {fiber} is below 1/2", z as u8)));
    }
    let inside = |i: usize, j: usize| if m.bit(i, j) == z { lambda.at(i, j) } else { 0.0 };
    let outside = |i: usize, j: usize| if m.bit(i, j) == z { 0.0 } else { lambda.at(i, j) };
    let mut a = vec![0.0f64; c];
    let mut b = vec![0.0f64; c];
    let mut rmask = 0u64;
    let mut best: Option<(f64, u64, u64)> = None;
    for rstep in 1u64..1 << r {
        let bit = rstep.trailing_zeros() as usize;
        let sign = if rmask >> bit & 1 == 0 { 1.0 } else { -1.0 };
        rmask ^= 1 << bit;
        for j in 0..c {
            a[j] += sign * inside(bit, j);
            b[j] += sign * outside(bit, j);
        }
        let (mut sa, mut sb) = (0.0f64, 0.0f64);
        let mut cmask = 0u64;
        for cstep in 1u64..1 << c {
            let cb = cstep.trailing_zeros() as usize;
            if cmask >> cb & 1 == 0 {
                sa += a[cb];
                sb += b[cb];
            } else {
                sa -= a[cb];
                sb -= b[cb];
            }
            cmask ^= 1 << cb;
            if sa > 1e-15 && eps * sa > sb + 1e-12 && best.map_or(true, |(v, _, _)| sa > v) {
                best = Some((sa, rmask, cmask));
            }
        }
    }
    let Some((_, rm, cm)) = best else {
        return Ok(BoundResult {
            value: f64::INFINITY,
            kind: BoundKind::Unbounded,
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            certificate: Certificate { distribution: Some(lambda.clone()), ..Certificate::default() },
            cuts: 0,
            rounds: 0,
        });
    };
    let rect = Rectangle::from_masks(r, c, rm, cm);
    let mass = lambda.mass_of_value(m, &rect, z);
    let mut res = BoundResult::exact(1.0 / mass);
    res.certificate = Certificate {
        distribution: Some(lambda.clone()),
        point: Vec::new(),
        rectangles: vec![RectWeight { rect, label: Some(z), weight: 1.0 }],
    };
    Ok(res)
}

/// Best of `rec^{z,λ}_ε` over a fixed set of candidate distributions; a lower
/// bound on the maximum over all `λ`.
pub fn rectangle_bound_candidates(m: &CommMatrix, z: bool, eps: f64, cfg: &BoundConfig) -> Result<BoundResult> {
    check_epsilon(eps)?;
    let (r, c) = (m.rows(), m.cols());
    if r + c > ENUMERATION_CAP {
        return Err(Error::SizeLimit(format!(
            "rectangle_bound_candidates enumerates all rectangles; rows+cols {} exceeds {ENUMERATION_CAP}",
            r + c
        )));
    }
    let mut cands = vec![Distribution::uniform(r, c)];
    if let Ok(d) = discrepancy(m, cfg) {
        if let Some(mu) = d.certificate.distribution {
            cands.push(mu);
        }
    }
    let on = Distribution::uniform_on(r, c, |i, j| m.bit(i, j) == z);
    let off = Distribution::uniform_on(r, c, |i, j| m.bit(i, j) != z);
    match (on, off) {
        (Ok(a), Ok(b)) => {
            let w = a.weights().iter().zip(b.weights()).map(|(x, y)| 0.5 * x + 0.5 * y).collect();
            cands.push(Distribution::normalized(r, c, w)?);
        }
        (Ok(a), Err(_)) => cands.push(a),
        _ => {}
    }
    let mut best: Option<BoundResult> = None;
    for lambda in &cands {
        if lambda.fiber_mass(m, z) < 0.5 - 1e-12 {
            continue;
        }
        let res = rectangle_bound_conventional(m, z, eps, lambda)?;
        if best.as_ref().map_or(true, |b| res.value > b.value) {
            best = Some(res);
        }
    }
    let mut res = best.ok_or_else(|| {
        Error::Precondition(format!("no candidate distribution puts half its mass on f⁻¹({})", z as u8))
    })?;
    if res.kind == BoundKind::Exact {
        res.kind = BoundKind::LowerBoundOnly;
        res.upper = f64::INFINITY;
    }
    Ok(res)
}

/// Row marginal minimizing `disc_{p×q}` for the given column marginal `q`.
fn best_row_marginal(m: &CommMatrix, q: &[f64], cfg: &BoundConfig) -> Result<Vec<f64>> {
    let (r, c) = (m.rows(), m.cols());
    let mut lp = LinearProgram::<f64>::new(Sense::Max, r);
    for i in 0..r {
        lp.set_objective(i, 1.0);
    }
    let mut plus = CellFamily::new(r, c, None);
    let mut minus = CellFamily::new(r, c, None);
    for i in 0..r {
        for j in 0..c {
            let w = disc_sign(m, i, j) * q[j];
            plus.push(i, j, i, w);
            minus.push(i, j, i, -w);
        }
    }
    let mut s: Vec<Rectangle> = (0..r).map(|i| Rectangle::new(set(r, &[i]), set(c, &(0..c).collect::<Vec<_>>()))).collect();
    s.extend(singletons(r, c));
    let out = solve_rect_program(lp, &[plus, minus], &s, &cfg.oracle(), cfg.max_cuts)?;
    let total: f64 = out.point.iter().sum();
    if !(total > 0.0) {
        return Ok(vec![1.0 / r as f64; r]);
    }
    Ok(normalize(out.point.iter().map(|x| x.max(0.0)).collect()))
}

fn set(n: usize, idx: &[usize]) -> crate::matrices::BitSet {
    crate::matrices::BitSet::from_indices(n, idx.iter().copied())
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    let drift: f64 = 1.0 - v.iter().sum::<f64>();
    if let Some(k) = v.iter().position(|&x| x > drift.abs()) {
        v[k] += drift;
    }
    v
}

fn product_disc(m: &CommMatrix, p: &[f64], q: &[f64], cfg: &BoundConfig) -> Result<(f64, Distribution)> {
    let mu = Distribution::product(p.to_vec(), q.to_vec())?;
    let d = discrepancy_under(m, &mu, cfg)?;
    Ok((d.value, mu))
}

/// Upper bound on `min` of `disc_μ` over product distributions, by alternating
/// exact minimization over one marginal with the other fixed.
pub fn product_discrepancy_upper(m: &CommMatrix, restarts: usize, seed: u64, cfg: &BoundConfig) -> Result<BoundResult> {
    let cfg = BoundConfig { exactness: Exactness::ExactOracle, ..cfg.clone() };
    let (r, c) = (m.rows(), m.cols());
    cfg.check(m, r.max(c), "product_discrepancy_upper")?;
    debug_assert_eq!(cfg.oracle().mode, OracleMode::Auto);
    let mt = m.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform_p = vec![1.0 / r as f64; r];
    let uniform_q = vec![1.0 / c as f64; c];
    let (mut best, mut best_mu) = product_disc(m, &uniform_p, &uniform_q, &cfg)?;
    let mut rounds = 0;
    for t in 0..restarts.max(1) {
        let mut q = if t == 0 {
            uniform_q.clone()
        } else {
            normalize((0..c).map(|_| rng.sample::<f64, _>(Exp1)).collect())
        };
        for _ in 0..3 {
            let p = best_row_marginal(m, &q, &cfg)?;
            let (v, mu) = product_disc(m, &p, &q, &cfg)?;
            if v < best {
                best = v;
                best_mu = mu;
            }
            q = best_row_marginal(&mt, &p, &cfg)?;
            let (v, mu) = product_disc(m, &p, &q, &cfg)?;
            if v < best {
                best = v;
                best_mu = mu;
            }
            rounds += 1;
        }
    }
    Ok(BoundResult {
        value: best,
        kind: BoundKind::UpperBoundOnly,
        lower: 0.0,
        upper: best,
        certificate: Certificate { distribution: Some(best_mu), ..Certificate::default() },
        cuts: 0,
        rounds,
    })
}
