use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::matrices::{
    gen_equality, gen_greater_than, gen_hadamard, gen_hamming_distance, gen_projective_intervals,
    gen_sign_inner_product_3d, CommMatrix,
};
use crate::report::MeasureKind;

use super::measures::{compute_measure, VerifyCaps};

pub const CSV_HEADER: &str = "family,n,measure,value,kind";

/// Shipped matrix generators indexed by one size parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Eq,
    /// Hamming distance exactly `k`.
    Hd(usize),
    Gt,
    Sip3d,
    Pgint,
    Hadamard,
}

impl Family {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "eq" => Family::Eq,
            "hd" => Family::Hd(1),
            "gt" => Family::Gt,
            "sip3d" => Family::Sip3d,
            "pgint" => Family::Pgint,
            "hadamard" => Family::Hadamard,
            _ => match name.strip_prefix("hd").and_then(|k| k.parse().ok()) {
                Some(k) => Family::Hd(k),
                None => return Err(Error::InvalidArgument(format!("unknown family {name:?}"))),
            },
        })
    }

    pub fn name(&self) -> String {
        match self {
            Family::Eq => "eq".into(),
            Family::Hd(k) => format!("hd{k}"),
            Family::Gt => "gt".into(),
            Family::Sip3d => "sip3d".into(),
            Family::Pgint => "pgint".into(),
            Family::Hadamard => "hadamard".into(),
        }
    }

    pub fn instance(&self, n: usize) -> Result<CommMatrix> {
        match *self {
            Family::Eq => gen_equality(n),
            Family::Hd(k) => gen_hamming_distance(n, k),
            Family::Gt => gen_greater_than(n),
            Family::Sip3d => gen_sign_inner_product_3d(n),
            Family::Pgint => {
                let q = u32::try_from(n).map_err(|_| Error::InvalidArgument(format!("q = {n} too large")))?;
                gen_projective_intervals(q)
            }
            Family::Hadamard => gen_hadamard(n),
        }
    }
}

/// Parses `family:param` or `hd:n:k`.
pub fn parse_instance(spec: &str) -> Result<CommMatrix> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<usize> {
        s.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad parameter {s:?} in {spec:?}")))
    };
    match parts.as_slice() {
        [fam, n] => Family::parse(fam)?.instance(num(n)?),
        ["hd", n, k] => gen_hamming_distance(num(n)?, num(k)?),
        _ => Err(Error::InvalidArgument(format!("expected family:param, got {spec:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub measure: String,
    pub value: f64,
    pub kind: MeasureKind,
}

/// Least-squares fit of `ln value = exponent · ln n + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    pub measure: String,
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub fits: Vec<ExponentFit>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let kind = serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{}", r.family, r.n, r.measure, r.value, kind);
        }
        s
    }

    pub fn column(&self, measure: &str) -> Vec<(usize, f64)> {
        self.rows.iter().filter(|r| r.measure == measure).map(|r| (r.n, r.value)).collect()
    }

    pub fn fit_summary(&self) -> String {
        let mut s = String::new();
        for f in &self.fits {
            let _ = writeln!(
                s,
                "{}: value ~ {:.4} * n^{:.4} (r2 = {:.4}, {} points)",
                f.measure,
                f.intercept.exp(),
                f.exponent,
                f.r2,
                f.points
            );
        }
        s
    }
}

/// Fits `ln y` against `ln n` over the positive points; `None` with fewer than two.
pub fn fit_exponent(measure: &str, points: &[(usize, f64)]) -> Option<ExponentFit> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(n, y)| *n > 0 && *y > 0.0 && y.is_finite()).map(|&(n, y)| ((n as f64).ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(ExponentFit { measure: measure.to_string(), exponent: slope, intercept, r2, points: pts.len() })
}

/// Computes `measures` on `family(n)` for every `n` in range.
pub fn sweep(
    family: Family,
    ns: RangeInclusive<usize>,
    measures: &[&str],
    eps: f64,
    caps: &VerifyCaps,
) -> Result<SweepTable> {
    let mut table = SweepTable::default();
    for n in ns {
        let m = family.instance(n)?;
        for id in measures {
            let v = compute_measure(&m, id, eps, caps)?;
            table.rows.push(SweepRow { family: family.name(), n, measure: id.to_string(), value: v.value, kind: v.kind });
        }
    }
    for id in measures {
        if let Some(f) = fit_exponent(id, &table.column(id)) {
            table.fits.push(f);
        }
    }
    Ok(table)
}
