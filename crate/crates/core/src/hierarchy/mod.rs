//! Registry of inequalities between measures, checked on concrete matrices.
//!
//! Each [`RelationRecord`] is a chain of comparisons between expressions over
//! named measures. [`verify_all`] computes every measure it can under the
//! given caps and evaluates every applicable record with interval arithmetic
//! on the certified brackets, so a reported violation is never an artifact of
//! solver tolerance.

mod measures;
mod sweep;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrices::{CommMatrix, Convention};
use crate::report::{MeasureKind, MeasureReport, MeasureValue, Outcome, RelationOutcome};

pub use measures::{compute_measure, measure_spec, MeasureSpec, VerifyCaps, MEASURES};
pub use sweep::{fit_exponent, parse_instance, sweep, ExponentFit, Family, SweepRow, SweepTable, CSV_HEADER};

pub type VerificationReport = MeasureReport;

/// Default error parameter for the ε-parameterized bounds.
pub const DEFAULT_EPS: f64 = 1.0 / 3.0;
/// Slack for relations between integer measures.
pub const INTEGER_TOL: f64 = 1e-9;
/// Relative slack for relations involving solver-backed measures.
pub const SOLVER_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    /// A violation fails verification.
    Assert,
    /// Evaluated and logged with its margin, never fails.
    Report,
    /// Involves quantities outside the toolkit; never evaluated.
    Document,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparator {
    Le,
    Lt,
    Eq,
}

impl Comparator {
    fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Lt => "<",
            Comparator::Eq => "=",
        }
    }
}

/// Expression over named measures.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Measure(&'static str),
    Const(f64),
    Log2(Box<Expr>),
    Ceil(Box<Expr>),
    Sqrt(Box<Expr>),
    Pow2(Box<Expr>),
    Recip(Box<Expr>),
    Scale(f64, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn m(id: &'static str) -> Self {
        Expr::Measure(id)
    }

    pub fn log2(self) -> Self {
        Expr::Log2(Box::new(self))
    }

    pub fn ceil(self) -> Self {
        Expr::Ceil(Box::new(self))
    }

    pub fn sqrt(self) -> Self {
        Expr::Sqrt(Box::new(self))
    }

    pub fn pow2(self) -> Self {
        Expr::Pow2(Box::new(self))
    }

    pub fn recip(self) -> Self {
        Expr::Recip(Box::new(self))
    }

    pub fn scale(self, c: f64) -> Self {
        Expr::Scale(c, Box::new(self))
    }

    pub fn plus(self, other: Expr) -> Self {
        Expr::Add(Box::new(self), Box::new(other))
    }

    pub fn times(self, other: Expr) -> Self {
        Expr::Mul(Box::new(self), Box::new(other))
    }

    pub fn measures(&self, out: &mut Vec<&'static str>) {
        match self {
            Expr::Measure(id) => {
                if !out.contains(id) {
                    out.push(id)
                }
            }
            Expr::Const(_) => {}
            Expr::Log2(e) | Expr::Ceil(e) | Expr::Sqrt(e) | Expr::Pow2(e) | Expr::Recip(e) | Expr::Scale(_, e) => {
                e.measures(out)
            }
            Expr::Add(a, b) | Expr::Mul(a, b) => {
                a.measures(out);
                b.measures(out);
            }
        }
    }

    fn eval(&self, r: &MeasureReport) -> std::result::Result<Iv, String> {
        Ok(match self {
            Expr::Measure(id) => {
                let v = r.get(id).ok_or_else(|| match r.skip_reason(id) {
                    Some(why) => format!("{id} skipped: {why}"),
                    None => format!("{id} not computed"),
                })?;
                Iv::of(v)
            }
            Expr::Const(c) => Iv::point(*c),
            Expr::Log2(e) => e.eval(r)?.monotone(f64::log2),
            Expr::Ceil(e) => e.eval(r)?.monotone(f64::ceil),
            Expr::Sqrt(e) => e.eval(r)?.monotone(|x| x.max(0.0).sqrt()),
            Expr::Pow2(e) => e.eval(r)?.monotone(f64::exp2),
            Expr::Recip(e) => {
                let x = e.eval(r)?;
                if x.lo < 0.0 {
                    return Err("reciprocal of a possibly negative quantity".into());
                }
                Iv { lo: 1.0 / x.hi, mid: 1.0 / x.mid, hi: 1.0 / x.lo, tight: x.tight }
            }
            Expr::Scale(c, e) => {
                let x = e.eval(r)?;
                if *c >= 0.0 {
                    Iv { lo: c * x.lo, mid: c * x.mid, hi: c * x.hi, tight: x.tight }
                } else {
                    Iv { lo: c * x.hi, mid: c * x.mid, hi: c * x.lo, tight: x.tight }
                }
            }
            Expr::Add(a, b) => {
                let (a, b) = (a.eval(r)?, b.eval(r)?);
                Iv { lo: a.lo + b.lo, mid: a.mid + b.mid, hi: a.hi + b.hi, tight: a.tight && b.tight }
            }
            Expr::Mul(a, b) => {
                let (a, b) = (a.eval(r)?, b.eval(r)?);
                if a.lo < 0.0 || b.lo < 0.0 {
                    return Err("product of possibly negative quantities".into());
                }
                Iv { lo: a.lo * b.lo, mid: a.mid * b.mid, hi: a.hi * b.hi, tight: a.tight && b.tight }
            }
        })
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expr::Measure(id) => write!(f, "{id}"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Log2(e) => write!(f, "log2({e})"),
            Expr::Ceil(e) => write!(f, "ceil({e})"),
            Expr::Sqrt(e) => write!(f, "sqrt({e})"),
            Expr::Pow2(e) => write!(f, "2^({e})"),
            Expr::Recip(e) => write!(f, "1/({e})"),
            Expr::Scale(c, e) => write!(f, "{c}*{e}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

/// Value of an expression: certified interval plus the point estimate.
#[derive(Clone, Copy, Debug)]
struct Iv {
    lo: f64,
    mid: f64,
    hi: f64,
    /// Every input was exact or a narrow bracket, so the point estimate is meaningful.
    tight: bool,
}

impl Iv {
    fn point(x: f64) -> Self {
        Iv { lo: x, mid: x, hi: x, tight: true }
    }

    fn of(v: &MeasureValue) -> Self {
        let x = v.value;
        match v.kind {
            MeasureKind::Exact | MeasureKind::Heuristic => Iv::point(x),
            MeasureKind::Bracket => {
                let lo = v.lower.unwrap_or(x);
                let hi = v.upper.unwrap_or(x);
                Iv { lo, mid: x, hi, tight: hi - lo <= 1e-4 * x.abs().max(1.0) }
            }
            MeasureKind::LowerBound => Iv { lo: v.lower.unwrap_or(x), mid: x, hi: v.upper.unwrap_or(f64::INFINITY), tight: false },
            MeasureKind::UpperBound => Iv { lo: v.lower.unwrap_or(f64::NEG_INFINITY), mid: x, hi: v.upper.unwrap_or(x), tight: false },
        }
    }

    fn monotone(self, f: impl Fn(f64) -> f64) -> Self {
        Iv { lo: f(self.lo), mid: f(self.mid), hi: f(self.hi), tight: self.tight }
    }
}

/// One comparison `lhs cmp rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub lhs: Expr,
    pub cmp: Comparator,
    pub rhs: Expr,
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.cmp.symbol(), self.rhs)
    }
}

/// A known relation between measures.
#[derive(Clone, Debug)]
pub struct RelationRecord {
    pub id: &'static str,
    /// Human-readable formula.
    pub statement: &'static str,
    pub links: Vec<Link>,
    pub severity: Severity,
    /// Restricts the record to one entry convention.
    pub convention: Option<Convention>,
}

impl RelationRecord {
    fn new(id: &'static str, statement: &'static str, severity: Severity) -> Self {
        Self { id, statement, links: Vec::new(), severity, convention: None }
    }

    fn link(mut self, lhs: Expr, cmp: Comparator, rhs: Expr) -> Self {
        self.links.push(Link { lhs, cmp, rhs });
        self
    }

    /// `a_0 cmp a_1 cmp ... cmp a_k`.
    fn chain(mut self, cmp: Comparator, terms: Vec<Expr>) -> Self {
        for w in terms.windows(2) {
            self.links.push(Link { lhs: w[0].clone(), cmp, rhs: w[1].clone() });
        }
        self
    }

    fn boolean_only(mut self) -> Self {
        self.convention = Some(Convention::Boolean01);
        self
    }

    pub fn measures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for l in &self.links {
            l.lhs.measures(&mut out);
            l.rhs.measures(&mut out);
        }
        out
    }

    fn integral(&self) -> bool {
        self.measures().iter().all(|id| measure_spec(id).is_some_and(|s| s.integral))
    }

    /// Evaluates the record against computed measures.
    pub fn evaluate(&self, m: &CommMatrix, r: &MeasureReport) -> RelationOutcome {
        let out = |outcome, margin, reason: Option<String>| RelationOutcome { id: self.id.to_string(), outcome, margin, reason };
        if self.severity == Severity::Document {
            return out(Outcome::Skipped, None, Some("documentation only".into()));
        }
        if let Some(c) = self.convention {
            if m.convention() != c {
                return out(Outcome::Skipped, None, Some(format!("applies to {c:?} matrices only")));
            }
        }
        let integral = self.integral();
        let mut margin = f64::INFINITY;
        let mut violated = false;
        let mut skipped = Vec::new();
        for l in &self.links {
            let (a, b) = match (l.lhs.eval(r), l.rhs.eval(r)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    skipped.push(e);
                    continue;
                }
            };
            let tol = if integral { INTEGER_TOL } else { SOLVER_TOL * finite_scale(&[a.mid, b.mid]) };
            let point = a.tight && b.tight;
            let (slack, bad) = match l.cmp {
                Comparator::Le | Comparator::Lt => {
                    (b.mid - a.mid, a.lo > b.hi + tol || (point && a.mid > b.mid + tol))
                }
                Comparator::Eq => {
                    let apart = a.lo > b.hi + tol || b.lo > a.hi + tol;
                    (-(a.mid - b.mid).abs(), apart || (point && (a.mid - b.mid).abs() > tol))
                }
            };
            let strict_bad = l.cmp == Comparator::Lt && point && a.mid >= b.mid;
            violated |= bad || strict_bad;
            if !slack.is_nan() {
                margin = margin.min(slack);
            }
        }
        if skipped.len() == self.links.len() {
            return out(Outcome::Skipped, None, skipped.into_iter().next());
        }
        let margin = margin.is_finite().then_some(margin + 0.0);
        let partial = (!skipped.is_empty()).then(|| format!("partially evaluated; {}", skipped.join("; ")));
        match self.severity {
            Severity::Report => out(Outcome::Reported, margin, partial),
            _ if violated => out(Outcome::Violated, margin, Some(self.statement.to_string())),
            _ => out(Outcome::Holds, margin, partial),
        }
    }
}

fn finite_scale(xs: &[f64]) -> f64 {
    xs.iter().filter(|x| x.is_finite()).fold(1.0, |acc, x| acc.max(x.abs()))
}

/// Every shipped relation.
pub fn registry() -> Vec<RelationRecord> {
    use Comparator::*;
    use Severity::*;
    let m = Expr::m;
    vec![
        RelationRecord::new("cover-sum", "C = C0 + C1", Assert).link(m("C"), Eq, m("C0").plus(m("C1"))),
        RelationRecord::new("cover-chain", "C <= CD <= CP <= 2^D", Assert)
            .chain(Le, vec![m("C"), m("CD"), m("CP"), m("D").pow2()]),
        RelationRecord::new("nondet-log", "Nz = log2 Cz for z in {0, 1}", Assert)
            .link(m("N0"), Eq, m("C0").log2())
            .link(m("N1"), Eq, m("C1").log2()),
        RelationRecord::new("one-way-rank", "log2 rank <= one_way <= rank", Assert)
            .chain(Le, vec![m("rank").log2(), m("one_way"), m("rank")]),
        RelationRecord::new("log-rank-D", "log2 rank_plus <= D", Assert).link(m("rank_plus").log2(), Le, m("D")),
        RelationRecord::new("gamma2-chain", "gamma2_inf <= gamma2_alpha <= gamma2 <= sqrt(rank) on the +-1 view", Assert)
            .chain(Le, vec![m("gamma2_inf"), m("gamma2_alpha"), m("gamma2_sign"), m("rank_sign").sqrt()]),
        RelationRecord::new("disc-gamma2", "gamma2_inf / 8 <= 1/disc <= 8 gamma2_inf", Assert).chain(
            Le,
            vec![m("gamma2_inf").scale(0.125), m("disc").recip(), m("gamma2_inf").scale(8.0)],
        ),
        RelationRecord::new("wreg-disc", "wreg = disc under the uniform distribution", Assert)
            .link(m("wreg_uniform"), Eq, m("disc_uniform")),
        RelationRecord::new("fontes-chain", "wprt <= prt_pos <= prt_fixed", Assert)
            .chain(Le, vec![m("wprt"), m("prt_pos"), m("prt_fixed")]),
        RelationRecord::new("relaxed-chain", "wprt <= prt_relaxed <= prt_fixed", Assert)
            .chain(Le, vec![m("wprt"), m("prt_relaxed"), m("prt_fixed")]),
        RelationRecord::new("prt-log-D", "log2 prt <= D", Assert).link(m("prt").log2(), Le, m("D")),
        RelationRecord::new("lp-chain", "rec_z <= srec_z <= prt for z in {0, 1}", Assert)
            .chain(Le, vec![m("rec1"), m("srec1"), m("prt")])
            .chain(Le, vec![m("rec0"), m("srec0"), m("prt")]),
        RelationRecord::new(
            "signrank-plus-nondet",
            "ceil(log2 signrank_plus) <= ceil(N1) <= ceil(log2 signrank_plus) + 2",
            Assert,
        )
        .chain(
            Le,
            vec![
                m("signrank_plus").log2().ceil(),
                m("N1").ceil(),
                m("signrank_plus").log2().ceil().plus(Expr::Const(2.0)),
            ],
        )
        .boolean_only(),
        RelationRecord::new("nondet-rank-plus", "N1 <= log2 rank_plus", Assert)
            .link(m("N1"), Le, m("rank_plus").log2())
            .boolean_only(),
        RelationRecord::new("rank-rank-plus", "max(rank, signrank_plus) <= rank_plus", Assert)
            .link(m("rank"), Le, m("rank_plus"))
            .link(m("signrank_plus"), Le, m("rank_plus"))
            .boolean_only(),
        RelationRecord::new("rec-lambda", "rec_z(eps) <= best candidate rec_z at eps/2", Report)
            .link(m("rec1"), Le, m("rec_lambda1"))
            .link(m("rec0"), Le, m("rec_lambda0")),
        RelationRecord::new("sq-product-disc", "sqrt(sq / 2) < 1/disc_product", Report)
            .link(m("sq").scale(0.5).sqrt(), Lt, m("disc_product").recip()),
        RelationRecord::new("disc-distributional", "log2(2 eps' / disc_uniform) <= D with eps' = 1/6", Report)
            .link(m("disc_uniform").recip().scale(1.0 / 3.0).log2(), Le, m("D")),
        RelationRecord::new("log-rank-growth", "D against sqrt(rank) log2 rank, constant unknown", Report)
            .link(m("D"), Le, m("rank").sqrt().times(m("rank").log2())),
        RelationRecord::new("nondet-product", "D against N0 N1, constant unknown", Report)
            .link(m("D"), Le, m("N0").times(m("N1"))),
        RelationRecord::new("public-coin-gamma2", "public-coin cost with bounded error >= log2 gamma2", Document),
        RelationRecord::new("quantum-disc", "entanglement-assisted quantum cost >= log2(1/disc) up to constants", Document),
        RelationRecord::new("information-cost", "information complexity <= public-coin cost", Document),
    ]
}

/// Static checks on the registry: unique ids, known measures, certified inputs to Assert records.
pub fn validate_registry(records: &[RelationRecord]) -> Result<()> {
    let mut seen = HashSet::new();
    for r in records {
        if !seen.insert(r.id) {
            return Err(Error::InvalidArgument(format!("duplicate relation id {}", r.id)));
        }
        if r.severity != Severity::Document && r.links.is_empty() {
            return Err(Error::InvalidArgument(format!("{} has no comparisons", r.id)));
        }
        for id in r.measures() {
            let spec = measure_spec(id).ok_or_else(|| Error::InvalidArgument(format!("{}: unknown measure {id}", r.id)))?;
            if r.severity == Severity::Assert && !spec.certified {
                return Err(Error::InvalidArgument(format!("{}: asserts on uncertified measure {id}", r.id)));
            }
        }
    }
    Ok(())
}

/// Computes the listed measures, recording failures as skips.
pub fn measure_all(m: &CommMatrix, ids: &[&str], eps: f64, caps: &VerifyCaps) -> MeasureReport {
    let mut report = MeasureReport::new(m.name());
    for id in ids {
        match compute_measure(m, id, eps, caps) {
            Ok(v) => report.push(v),
            Err(e) => report.skip(*id, e.to_string()),
        }
    }
    report
}

/// Computes every catalogued measure and evaluates every relation.
pub fn verify_all(m: &CommMatrix, caps: &VerifyCaps, eps: f64) -> VerificationReport {
    let ids: Vec<&str> = MEASURES.iter().map(|s| s.id).collect();
    let mut report = measure_all(m, &ids, eps, caps);
    report.relations = registry().iter().map(|r| r.evaluate(m, &report)).collect();
    report
}

/// Asserted relations that failed.
pub fn assert_violations(report: &VerificationReport) -> Vec<&RelationOutcome> {
    report.violations()
}

/// Plain-text rendering of a report.
pub fn render_text(report: &MeasureReport) -> String {
    let mut s = format!("matrix: {}\n", report.matrix);
    for v in &report.measures {
        s.push_str(&format!("  {:<14} {:>12.6} {:?}", v.id, v.value, v.kind));
        if let (Some(lo), Some(hi)) = (v.lower, v.upper) {
            s.push_str(&format!(" [{lo:.6}, {hi:.6}]"));
        }
        if let Some(n) = &v.note {
            s.push_str(&format!(" ({n})"));
        }
        s.push('\n');
    }
    for k in &report.skipped {
        s.push_str(&format!("  {:<14} skipped: {}\n", k.id, k.reason));
    }
    for r in &report.relations {
        s.push_str(&format!("  relation {:<22} {:?}", r.id, r.outcome));
        if let Some(m) = r.margin {
            s.push_str(&format!(" margin {m:.3e}"));
        }
        if let Some(why) = &r.reason {
            s.push_str(&format!(" ({why})"));
        }
        s.push('\n');
    }
    s
}
