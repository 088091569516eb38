//! Seeded Monte Carlo simulation of public-coin protocols.
//!
//! Shared randomness is a `ChaCha8Rng` both parties read from. Trials are cut
//! into a fixed number of shards, shard `s` seeded with `seed ^ s`, so results
//! do not depend on how many threads run them.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::facnorm::gamma2;
use crate::linalg::DenseMatrix;
use crate::matrices::{gen_equality, BitString};

/// Shards per simulation; fixed so the merge order never changes.
pub const SHARDS: u64 = 8;
/// Largest input domain `2ⁿ` for acceptance matrices.
pub const DOMAIN_CAP: usize = 64;
/// Subtest count used when `ε = 0`.
const EXACT_SUBTESTS: u32 = 64;
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, Serialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    /// Error parameter of each equality test.
    pub epsilon: f64,
    pub rounds: usize,
    /// Round events needed to decide "distance one".
    pub threshold: usize,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self { trials: 1000, seed: 0, epsilon: 1e-3, rounds: 100, threshold: 37 }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in [0, 1/2), got {}", self.epsilon)));
        }
        if self.threshold > self.rounds {
            return Err(Error::InvalidArgument(format!("threshold {} exceeds {} rounds", self.threshold, self.rounds)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub accept_count: usize,
    pub trials: usize,
    pub empirical_prob: f64,
    /// Wilson score interval at 95%.
    pub wilson95: (f64, f64),
}

impl TrialStats {
    pub fn new(accept_count: usize, trials: usize) -> Self {
        let n = trials as f64;
        let p = accept_count as f64 / n;
        let z2 = Z95 * Z95;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        let lo = (centre - half).clamp(0.0, 1.0).min(p);
        let hi = (centre + half).clamp(0.0, 1.0).max(p);
        Self { accept_count, trials, empirical_prob: p, wilson95: (lo, hi) }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.wilson95.0 <= p && p <= self.wilson95.1
    }
}

/// Runs `trials` Bernoulli experiments in deterministic shards.
pub fn run_trials<F>(trials: usize, seed: u64, f: F) -> TrialStats
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let shards = SHARDS.min(trials as u64).max(1);
    let counts: Vec<usize> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..shards)
            .map(|s| {
                let f = &f;
                let len = trials / shards as usize + usize::from((s as usize) < trials % shards as usize);
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ s);
                    (0..len).filter(|_| f(&mut rng)).count()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("trial shard panicked")).collect()
    });
    TrialStats::new(counts.into_iter().sum(), trials)
}

/// Number of parity subtests: `⌈log₂(1/ε)⌉ + 2`.
pub fn eqtest_subtests(epsilon: f64) -> u32 {
    if epsilon <= 0.0 {
        EXACT_SUBTESTS
    } else {
        ((1.0 / epsilon).log2().ceil().max(0.0) as u32 + 2).min(EXACT_SUBTESTS)
    }
}

/// Bits exchanged by one equality test: both parties send every parity.
pub fn eqtest_bits(epsilon: f64) -> usize {
    2 * eqtest_subtests(epsilon) as usize
}

/// Randomized equality test; returns true for "equal".
///
/// Each subtest compares `⟨x, r⟩` and `⟨y, r⟩` mod 2 for a shared random `r`.
/// Equal strings pass every subtest; unequal strings pass each with
/// probability exactly 1/2, so all `k` pass with probability `2⁻ᵏ ≤ ε/4`.
pub fn eqtest<R: Rng + ?Sized>(x: &BitString, y: &BitString, epsilon: f64, rng: &mut R) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("eqtest on lengths {} and {}", x.len(), y.len())));
    }
    let mut equal = true;
    for _ in 0..eqtest_subtests(epsilon) {
        let r = BitString::random(x.len(), rng);
        equal &= x.inner_mod2(&r)? == y.inner_mod2(&r)?;
    }
    Ok(equal)
}

/// Coordinates kept after a public random deletion of `⌈n/2⌉` positions.
fn half_deletion<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let drop = sample(rng, n, n.div_ceil(2)).into_vec();
    let mut gone = vec![false; n];
    for i in drop {
        gone[i] = true;
    }
    (0..n).filter(|&i| !gone[i]).collect()
}

fn round_event<R: Rng + ?Sized>(x: &BitString, y: &BitString, epsilon: f64, rng: &mut R) -> Result<bool> {
    let keep = half_deletion(x.len(), rng);
    eqtest(&x.select(&keep), &y.select(&keep), epsilon, rng)
}

fn check_pair(x: &BitString, y: &BitString) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("inputs of lengths {} and {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("inputs must be non-empty".into()));
    }
    Ok(())
}

/// Probability that one round reports "distance one": the Step-1 screen says
/// unequal and the equality test on the half-deleted strings says equal.
pub fn hd1_round_event(x: &BitString, y: &BitString, epsilon: f64, trials: usize, seed: u64) -> Result<TrialStats> {
    check_pair(x, y)?;
    TrialConfig { trials, seed, epsilon, ..Default::default() }.validate()?;
    Ok(run_trials(trials, seed, |rng| {
        !eqtest(x, y, epsilon, rng).expect("lengths checked") && round_event(x, y, epsilon, rng).expect("lengths checked")
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hd1Outcome {
    /// Output for `HD₁`: true means distance exactly one.
    pub decision: bool,
    /// Communication charged by the protocol schedule.
    pub bits: usize,
    /// Bits actually sent before termination.
    pub sent: usize,
    /// Rounds whose equality test said "equal".
    pub events: usize,
}

/// Communication of the full schedule: Step 1 plus every round.
pub fn hd1_cost(cfg: &TrialConfig) -> usize {
    eqtest_bits(cfg.epsilon) * (1 + cfg.rounds)
}

/// One run of the `HD₁` protocol with the given shared randomness.
pub fn hd1_protocol_with<R: Rng + ?Sized>(x: &BitString, y: &BitString, cfg: &TrialConfig, rng: &mut R) -> Result<Hd1Outcome> {
    check_pair(x, y)?;
    let per = eqtest_bits(cfg.epsilon);
    let bits = hd1_cost(cfg);
    if eqtest(x, y, cfg.epsilon, rng)? {
        return Ok(Hd1Outcome { decision: false, bits, sent: per, events: 0 });
    }
    let mut events = 0;
    for _ in 0..cfg.rounds {
        if round_event(x, y, cfg.epsilon, rng)? {
            events += 1;
        }
    }
    Ok(Hd1Outcome { decision: events >= cfg.threshold, bits, sent: per * (1 + cfg.rounds), events })
}

/// One run of the `HD₁` protocol seeded from `cfg.seed`.
pub fn hd1_protocol(x: &BitString, y: &BitString, cfg: &TrialConfig) -> Result<Hd1Outcome> {
    cfg.validate()?;
    hd1_protocol_with(x, y, cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed))
}

/// Fraction of `cfg.trials` independent protocol runs deciding "distance one".
pub fn hd1_trials(x: &BitString, y: &BitString, cfg: &TrialConfig) -> Result<TrialStats> {
    cfg.validate()?;
    check_pair(x, y)?;
    Ok(run_trials(cfg.trials, cfg.seed, |rng| hd1_protocol_with(x, y, cfg, rng).expect("inputs checked").decision))
}

#[derive(Clone, Debug, Serialize)]
pub struct IpOutcome {
    /// Majority sign decision over the trials.
    pub sign: i8,
    /// One-bit exchanges per run.
    pub bits: usize,
    /// Fraction of trials whose decision differs from the true sign.
    pub empirical_error: f64,
    pub stats: TrialStats,
}

/// Hyperplane count `⌈200·π²·γ⁴⌉`.
pub fn ip_exchanges(gamma: f64) -> usize {
    (200.0 * PI * PI * gamma.powi(4)).ceil() as usize
}

/// Pads `u` and `v` to norm exactly `gamma` on disjoint extra coordinates,
/// keeping `⟨u, v⟩`.
fn pad(u: &[f64], v: &[f64], gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let nu = u.iter().map(|a| a * a).sum::<f64>();
    let nv = v.iter().map(|a| a * a).sum::<f64>();
    let mut pu = u.to_vec();
    let mut pv = v.to_vec();
    pu.extend([(gamma * gamma - nu).max(0.0).sqrt(), 0.0]);
    pv.extend([0.0, (gamma * gamma - nv).max(0.0).sqrt()]);
    (pu, pv)
}

/// Sign of `⟨u, v⟩` by shared random hyperplanes.
///
/// Both vectors are padded to norm `gamma`. Each of `t` public Gaussian
/// directions `g` costs one bit (Alice's `sign⟨g, u⟩`); Bob counts
/// disagreements with `sign⟨g, v⟩`, estimates the angle as `π·(fraction)`,
/// and outputs the sign of its cosine. Each direction separates the padded
/// vectors independently with probability `θ/π`, so the disagreement count
/// of a run is drawn as one `Binomial(t, θ/π)` sample.
pub fn oblivious_ip_protocol(u: &[f64], v: &[f64], gamma: f64, trials: usize, seed: u64) -> Result<IpOutcome> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!("vectors of lengths {} and {}", u.len(), v.len())));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let slack = 1e-9 * (1.0 + gamma);
    for (name, w) in [("u", u), ("v", v)] {
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > gamma + slack {
            return Err(Error::Precondition(format!("‖{name}‖ = {n} exceeds gamma = {gamma}")));
        }
    }
    let (pu, pv) = pad(u, v, gamma);
    let inner: f64 = pu.iter().zip(&pv).map(|(a, b)| a * b).sum();
    let truth: i8 = if inner >= 0.0 { 1 } else { -1 };
    let cos = (inner / (gamma * gamma)).clamp(-1.0, 1.0);
    let theta = cos.acos();
    let t = ip_exchanges(gamma);
    let split = Binomial::new(t as u64, (theta / PI).clamp(0.0, 1.0))
        .map_err(|e| Error::InvalidArgument(format!("hyperplane split: {e}")))?;
    let stats = run_trials(trials, seed, |rng| {
        let disagree = split.sample(rng);
        (PI * disagree as f64 / t as f64).cos() >= 0.0
    });
    let positive = stats.empirical_prob;
    let empirical_error = if truth > 0 { 1.0 - positive } else { positive };
    let sign = if positive >= 0.5 { 1 } else { -1 };
    Ok(IpOutcome { sign, bits: t, empirical_error, stats })
}

/// Protocols with an acceptance-matrix extractor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProtocolId {
    /// One shared parity bit for equality.
    Eq1Bit,
    /// The `HD₁` protocol with the config's rounds and threshold.
    Hd1,
    /// Hyperplane inner-product protocol on a `γ₂` factorization of the sign equality matrix.
    IpOblivious,
    /// Alice sends her whole input; Bob answers equality exactly.
    EqFull,
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq1bit" => Ok(Self::Eq1Bit),
            "hd1" => Ok(Self::Hd1),
            "ip-oblivious" => Ok(Self::IpOblivious),
            "eq-full" => Ok(Self::EqFull),
            other => Err(Error::InvalidArgument(format!(
                "unknown protocol '{other}' (expected eq1bit, hd1, ip-oblivious, eq-full)"
            ))),
        }
    }
}

impl ProtocolId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Eq1Bit => "eq1bit",
            Self::Hd1 => "hd1",
            Self::IpOblivious => "ip-oblivious",
            Self::EqFull => "eq-full",
        }
    }

    /// Worst-case bits communicated on `n`-bit inputs.
    pub fn cost(self, n: usize, cfg: &TrialConfig) -> Result<usize> {
        Ok(match self {
            Self::Eq1Bit => 1,
            Self::Hd1 => hd1_cost(cfg),
            Self::IpOblivious => ip_exchanges(sign_equality_factors(n)?.2),
            Self::EqFull => n,
        })
    }
}

/// Row vectors, column vectors and `γ₂` of a factorization of the sign equality matrix.
fn sign_equality_factors(n: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, f64)> {
    let m = gen_equality(n)?.to_sign();
    let g = gamma2(&m, 1e-6)?;
    let a = &g.certificate.upper.a;
    let b = &g.certificate.upper.b;
    let rows: Vec<Vec<f64>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    let cols: Vec<Vec<f64>> = (0..b.cols()).map(|j| b.col(j)).collect();
    let norm = |w: &Vec<f64>| w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let gamma = rows.iter().chain(&cols).map(norm).fold(0.0, f64::max);
    Ok((rows, cols, gamma))
}

/// Empirical acceptance probability of `protocol` on every pair of `n`-bit inputs.
pub fn acceptance_matrix(protocol: ProtocolId, n: usize, cfg: &TrialConfig) -> Result<DenseMatrix<f64>> {
    cfg.validate()?;
    if n == 0 || n >= usize::BITS as usize || (1usize << n) > DOMAIN_CAP {
        return Err(Error::SizeLimit(format!("acceptance matrix needs 2^n <= {DOMAIN_CAP}, got n = {n}")));
    }
    let s = 1usize << n;
    let input = |i: usize| BitString::from_u64(i as u64, n);
    let pair_seed = |i: usize, j: usize| cfg.seed.wrapping_add(((i * s + j) as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut p = DenseMatrix::zeros(s, s);
    match protocol {
        ProtocolId::Eq1Bit => {
            for i in 0..s {
                for j in 0..s {
                    let (x, y) = (input(i), input(j));
                    let st = run_trials(cfg.trials, pair_seed(i, j), |rng| {
                        let r = BitString::random(n, rng);
                        x.inner_mod2(&r).expect("same length") == y.inner_mod2(&r).expect("same length")
                    });
                    p[(i, j)] = st.empirical_prob;
                }
            }
        }
        ProtocolId::Hd1 => {
            for i in 0..s {
                for j in 0..s {
                    let c = TrialConfig { seed: pair_seed(i, j), ..cfg.clone() };
                    p[(i, j)] = hd1_trials(&input(i), &input(j), &c)?.empirical_prob;
                }
            }
        }
        ProtocolId::IpOblivious => {
            let (rows, cols, gamma) = sign_equality_factors(n)?;
            for i in 0..s {
                for j in 0..s {
                    let out = oblivious_ip_protocol(&rows[i], &cols[j], gamma, cfg.trials, pair_seed(i, j))?;
                    p[(i, j)] = out.stats.empirical_prob;
                }
            }
        }
        ProtocolId::EqFull => {
            for i in 0..s {
                p[(i, i)] = 1.0;
            }
        }
    }
    Ok(p)
}

/// Per-input empirical errors of the hyperplane protocol on a `γ₂`
/// factorization of the sign equality matrix, in row-major order.
pub fn oblivious_error_profile(n: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let (rows, cols, gamma) = sign_equality_factors(n)?;
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for (i, u) in rows.iter().enumerate() {
        for (j, v) in cols.iter().enumerate() {
            let s = seed.wrapping_add((i * cols.len() + j) as u64);
            out.push(oblivious_ip_protocol(u, v, gamma, trials, s)?.empirical_error);
        }
    }
    Ok(out)
}
