use crate::error::{Error, Result};
use crate::exactcomb::{
    boolean_rank, cover_number, deterministic_cc, partition_number, protocol_partition_number, rank_exact,
    rank_plus_bracket, sq_dimension_uniform, vc_dimension, SearchBudget,
};
use crate::facnorm::{gamma2, gamma2_alpha, Alpha, Gamma2, DEFAULT_TOL};
use crate::lpbounds::{
    discrepancy, discrepancy_under, fontes_family, partition_bound, product_discrepancy_upper,
    rectangle_bound_candidates, rectangle_bound_lp, relaxed_partition_bound, smooth_rectangle_bound_lp,
    weak_regularity, BoundConfig, BoundKind, BoundResult, FontesKind,
};
use crate::matrices::{one_way_cc, CommMatrix, Convention, Distribution};
use crate::report::{MeasureKind, MeasureValue};

/// Static description of a computable measure.
#[derive(Clone, Copy, Debug)]
pub struct MeasureSpec {
    pub id: &'static str,
    pub about: &'static str,
    /// Reported with a certificate (exact value or certified bound).
    pub certified: bool,
    /// Integer-valued when computed exactly.
    pub integral: bool,
}

const fn spec(id: &'static str, about: &'static str, certified: bool, integral: bool) -> MeasureSpec {
    MeasureSpec { id, about, certified, integral }
}

/// Every measure `verify_all` knows how to compute, in report order.
pub const MEASURES: &[MeasureSpec] = &[
    spec("D", "deterministic communication complexity", true, true),
    spec("CP", "leaves of an optimal protocol tree", true, true),
    spec("CD", "minimum monochromatic partition", true, true),
    spec("C0", "0-cover number", true, true),
    spec("C1", "1-cover number", true, true),
    spec("C", "C0 + C1", true, true),
    spec("N0", "log2 C0", true, false),
    spec("N1", "log2 C1", true, false),
    spec("rank", "real rank of the stored entries", true, true),
    spec("rank_sign", "real rank of the +-1 view", true, true),
    spec("one_way", "one-way communication, ceil log2 distinct rows", true, true),
    spec("rank_plus", "nonnegative rank bracket [rank, ones partition]", true, true),
    spec("signrank_plus", "nonnegative sign-rank of a Boolean matrix", true, true),
    spec("gamma2", "gamma_2 norm of the stored entries", true, false),
    spec("gamma2_sign", "gamma_2 norm of the +-1 view", true, false),
    spec("gamma2_alpha", "gamma_2^alpha of the +-1 view", true, false),
    spec("gamma2_inf", "gamma_2^infinity of the +-1 view", true, false),
    spec("disc", "discrepancy, minimized over distributions", true, false),
    spec("disc_uniform", "discrepancy under the uniform distribution", true, false),
    spec("wreg_uniform", "weak regularity under the uniform distribution", true, false),
    spec("prt", "partition bound at eps", true, false),
    spec("prt_fixed", "fixed partition bound under uniform mu", true, false),
    spec("prt_pos", "positive partition bound under uniform mu", true, false),
    spec("wprt", "weak partition bound under uniform mu", true, false),
    spec("prt_relaxed", "relaxed partition bound under uniform mu", true, false),
    spec("rec0", "rectangle bound LP, z = 0", true, false),
    spec("rec1", "rectangle bound LP, z = 1", true, false),
    spec("srec0", "smooth rectangle bound LP, z = 0", true, false),
    spec("srec1", "smooth rectangle bound LP, z = 1", true, false),
    spec("rec_lambda0", "best-candidate conventional rectangle bound at eps/2, z = 0", false, false),
    spec("rec_lambda1", "best-candidate conventional rectangle bound at eps/2, z = 1", false, false),
    spec("disc_product", "heuristic upper bound on product discrepancy", false, false),
    spec("sq", "statistical query dimension under uniform", true, true),
    spec("vc", "VC dimension of the rows", true, true),
];

pub fn measure_spec(id: &str) -> Option<&'static MeasureSpec> {
    MEASURES.iter().find(|s| s.id == id)
}

/// Size and effort caps for every measure computation.
#[derive(Clone, Debug)]
pub struct VerifyCaps {
    pub protocol: SearchBudget,
    pub cover: SearchBudget,
    pub partition: SearchBudget,
    pub bounds: BoundConfig,
    pub gamma2_tol: f64,
    pub alpha: f64,
    pub dim_cap: usize,
    pub product_restarts: usize,
    pub seed: u64,
}

impl Default for VerifyCaps {
    fn default() -> Self {
        Self {
            protocol: SearchBudget::protocol(),
            cover: SearchBudget::cover(),
            partition: SearchBudget::partition(),
            bounds: BoundConfig::default(),
            gamma2_tol: DEFAULT_TOL,
            alpha: 2.0,
            dim_cap: 6,
            product_restarts: 4,
            seed: 0,
        }
    }
}

impl VerifyCaps {
    /// Caps raised for long runs.
    pub fn forced() -> Self {
        let big = |b: SearchBudget| SearchBudget::new(b.max_rows * 2, b.max_cols * 2).with_time_limit_ms(3_600_000);
        Self {
            protocol: big(SearchBudget::protocol()),
            cover: big(SearchBudget::cover()),
            partition: big(SearchBudget::partition()),
            bounds: BoundConfig { max_cuts: 4 * BoundConfig::default().max_cuts, ..BoundConfig::default() },
            ..Self::default()
        }
    }
}

fn from_bound(id: &str, b: BoundResult) -> MeasureValue {
    match b.kind {
        BoundKind::Exact => MeasureValue::bracket(id, b.value, b.lower.min(b.value), b.upper.max(b.value)),
        BoundKind::LowerBoundOnly => {
            let mut v = MeasureValue::with_kind(id, b.lower, MeasureKind::LowerBound);
            v.lower = Some(b.lower);
            if b.upper.is_finite() {
                v.upper = Some(b.upper);
            }
            v
        }
        BoundKind::UpperBoundOnly => {
            let mut v = MeasureValue::with_kind(id, b.upper, MeasureKind::UpperBound);
            v.upper = Some(b.upper);
            if b.lower.is_finite() {
                v.lower = Some(b.lower);
            }
            v
        }
        BoundKind::Unbounded => MeasureValue::exact(id, f64::INFINITY).note("no admissible rectangle"),
    }
}

fn from_gamma2(id: &str, g: Gamma2<f64>) -> MeasureValue {
    MeasureValue::bracket(id, g.value, g.lower.min(g.value), g.upper.max(g.value))
}

fn boolean(m: &CommMatrix, id: &str) -> Result<()> {
    if m.convention() != Convention::Boolean01 {
        return Err(Error::Convention(format!("{id} needs a Boolean matrix")));
    }
    Ok(())
}

/// Computes one measure. `eps` is used by the error-parameterized bounds.
pub fn compute_measure(m: &CommMatrix, id: &str, eps: f64, caps: &VerifyCaps) -> Result<MeasureValue> {
    let uniform = || Distribution::uniform(m.rows(), m.cols());
    let b = &caps.bounds;
    let int = |v: usize| MeasureValue::exact(id, v as f64);
    let nz = |z: bool| -> Result<MeasureValue> {
        let c = cover_number(m, z, &caps.cover)?;
        if c == 0 {
            return Err(Error::Precondition(format!("{id}: no {}-cells", z as u8)));
        }
        Ok(MeasureValue::exact(id, (c as f64).log2()))
    };
    Ok(match id {
        "D" => int(deterministic_cc(m, &caps.protocol)?),
        "CP" => int(protocol_partition_number(m, &caps.protocol)?),
        "CD" => int(partition_number(m, &caps.partition)?),
        "C0" => int(cover_number(m, false, &caps.cover)?),
        "C1" => int(cover_number(m, true, &caps.cover)?),
        "C" => int(cover_number(m, false, &caps.cover)? + cover_number(m, true, &caps.cover)?),
        "N0" => nz(false)?,
        "N1" => nz(true)?,
        "rank" => int(rank_exact(m)),
        "rank_sign" => int(rank_exact(&m.to_sign())),
        "one_way" => int(one_way_cc(m) as usize),
        "rank_plus" => {
            boolean(m, id)?;
            let (lo, hi) = rank_plus_bracket(m, &caps.partition)?;
            if lo == hi {
                int(lo)
            } else {
                MeasureValue::bracket(id, hi as f64, lo as f64, hi as f64)
            }
        }
        "signrank_plus" => {
            boolean(m, id)?;
            int(boolean_rank(m, &caps.cover)?)
        }
        "gamma2" => from_gamma2(id, gamma2(m, caps.gamma2_tol)?),
        "gamma2_sign" => from_gamma2(id, gamma2(&m.to_sign(), caps.gamma2_tol)?),
        "gamma2_alpha" => from_gamma2(id, gamma2_alpha(&m.to_sign(), Alpha::Finite(caps.alpha), caps.gamma2_tol)?)
            .note(format!("alpha = {}", caps.alpha)),
        "gamma2_inf" => from_gamma2(id, gamma2_alpha(&m.to_sign(), Alpha::Infinite, caps.gamma2_tol)?),
        "disc" => from_bound(id, discrepancy(m, b)?),
        "disc_uniform" => from_bound(id, discrepancy_under(m, &uniform(), b)?),
        "wreg_uniform" => from_bound(id, weak_regularity(m, &uniform(), b)?),
        "prt" => from_bound(id, partition_bound(m, eps, b)?),
        "prt_fixed" => from_bound(id, fontes_family(m, &uniform(), eps, FontesKind::FixedPrt, b)?),
        "prt_pos" => from_bound(id, fontes_family(m, &uniform(), eps, FontesKind::PositivePrt, b)?),
        "wprt" => from_bound(id, fontes_family(m, &uniform(), eps, FontesKind::WeakPrt, b)?),
        "prt_relaxed" => from_bound(id, relaxed_partition_bound(m, &uniform(), eps, b)?),
        "rec0" => from_bound(id, rectangle_bound_lp(m, false, eps, b)?),
        "rec1" => from_bound(id, rectangle_bound_lp(m, true, eps, b)?),
        "srec0" => from_bound(id, smooth_rectangle_bound_lp(m, false, eps, b)?),
        "srec1" => from_bound(id, smooth_rectangle_bound_lp(m, true, eps, b)?),
        "rec_lambda0" | "rec_lambda1" => {
            let z = id.ends_with('1');
            let r = rectangle_bound_candidates(m, z, eps / 2.0, b)?;
            MeasureValue::with_kind(id, r.value, MeasureKind::Heuristic)
        }
        "disc_product" => {
            let r = product_discrepancy_upper(m, caps.product_restarts, caps.seed, b)?;
            MeasureValue::with_kind(id, r.value, MeasureKind::Heuristic)
        }
        "sq" => {
            let d = sq_dimension_uniform(&m.to_sign(), caps.dim_cap)?;
            capped(id, d.value, d.at_cap)
        }
        "vc" => {
            let d = vc_dimension(&m.to_bool(), caps.dim_cap)?;
            capped(id, d.value, d.at_cap)
        }
        other => return Err(Error::InvalidArgument(format!("unknown measure id {other:?}"))),
    })
}

fn capped(id: &str, value: usize, at_cap: bool) -> MeasureValue {
    if at_cap {
        let mut v = MeasureValue::with_kind(id, value as f64, MeasureKind::LowerBound);
        v.lower = Some(value as f64);
        v
    } else {
        MeasureValue::exact(id, value as f64)
    }
}
