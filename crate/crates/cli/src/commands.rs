use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cclb_core::facnorm::acceptance_gamma2_check;
use cclb_core::hierarchy::{
    compute_measure, measure_all, measure_spec, parse_instance, render_text, sweep as run_sweep, verify_all, Family,
    VerificationReport, VerifyCaps, MEASURES,
};
use cclb_core::matrices::{format_matrix, gen_hamming_distance, load_matrix, random_matrix, save_matrix};
use cclb_core::protosim::{
    acceptance_matrix, hd1_round_event, hd1_trials, oblivious_error_profile, ProtocolId, TrialConfig,
};
use cclb_core::{BitString, CommMatrix, Convention, Error, MeasureReport, Outcome};
use serde_json::json;

use crate::{CapArgs, Format, GenArgs, MeasureArgs, SimulateArgs, SweepArgs, VerifyArgs};

pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAP: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_cap() { EXIT_CAP } else { EXIT_USAGE };
        Self { code, message: e.to_string() }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn caps_for(a: &CapArgs) -> Result<VerifyCaps, Failure> {
    if !(0.0..0.5).contains(&a.eps) {
        return Err(Failure::usage(format!("--eps must lie in [0, 1/2), got {}", a.eps)));
    }
    if a.force {
        eprintln!("warning: --force raises search and solver caps; runs may take much longer");
        Ok(VerifyCaps::forced())
    } else {
        Ok(VerifyCaps::default())
    }
}

/// A matrix file if the path exists, otherwise a `family:param` spec.
fn load_source(src: &str) -> Result<CommMatrix, Failure> {
    if Path::new(src).exists() {
        return Ok(load_matrix(src)?);
    }
    if src.contains(':') {
        return Ok(parse_instance(src)?);
    }
    Err(Failure::usage(format!("{src:?} is neither a matrix file nor a family:param spec")))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Serializes a report and checks it parses back to the same value.
fn report_json(r: &MeasureReport) -> Result<String, Failure> {
    let s = r.to_json();
    match MeasureReport::from_json(&s) {
        Ok(back) if back == *r => Ok(s + "\n"),
        _ => Err(Failure { code: EXIT_USAGE, message: "report failed its JSON round trip".into() }),
    }
}

fn report_csv(r: &MeasureReport) -> String {
    let mut s = String::from("matrix,measure,value,kind,lower,upper\n");
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for v in &r.measures {
        let kind = serde_json::to_value(v.kind).ok().and_then(|k| k.as_str().map(str::to_string)).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{},{}", r.matrix, v.id, v.value, kind, opt(v.lower), opt(v.upper));
    }
    s
}

pub fn gen(a: GenArgs) -> CmdResult {
    let m = if a.family.contains(':') {
        parse_instance(&a.family)?
    } else {
        let family = Family::parse(&a.family)?;
        let need = |x: Option<usize>, flag: &str| x.ok_or_else(|| Failure::usage(format!("{} needs --{flag}", a.family)));
        match family {
            Family::Hd(k) => gen_hamming_distance(need(a.n, "n")?, a.k.unwrap_or(k))?,
            Family::Sip3d => family.instance(need(a.c.or(a.n), "c")?)?,
            Family::Pgint => family.instance(need(a.q.or(a.n), "q")?)?,
            _ => family.instance(need(a.n, "n")?)?,
        }
    };
    match &a.out {
        Some(p) => {
            save_matrix(&m, p)?;
            println!("{}x{} {} -> {}", m.rows(), m.cols(), m.name(), p.display());
        }
        None => {
            eprintln!("{}x{} {}", m.rows(), m.cols(), m.name());
            print!("{}", format_matrix(&m));
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn measure(a: MeasureArgs) -> CmdResult {
    for id in &a.measures {
        if measure_spec(id).is_none() {
            let known: Vec<&str> = MEASURES.iter().map(|s| s.id).collect();
            return Err(Failure::usage(format!("unknown measure {id:?}; known: {}", known.join(","))));
        }
    }
    let caps = caps_for(&a.caps)?;
    let m = load_source(&a.source)?;
    let report = if a.measures.is_empty() {
        let ids: Vec<&str> = MEASURES.iter().map(|s| s.id).collect();
        measure_all(&m, &ids, a.caps.eps, &caps)
    } else {
        let mut r = MeasureReport::new(m.name());
        for id in &a.measures {
            r.push(compute_measure(&m, id, a.caps.eps, &caps)?);
        }
        r
    };
    let text = match a.format {
        Format::Text => render_text(&report),
        Format::Json => report_json(&report)?,
        Format::Csv => report_csv(&report),
    };
    emit(&text, a.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn verify_many(ms: &[CommMatrix], caps: &VerifyCaps, eps: f64, jobs: usize) -> Vec<VerificationReport> {
    let jobs = jobs.clamp(1, ms.len().max(1));
    let chunk = ms.len().div_ceil(jobs).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = ms
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|m| verify_all(m, caps, eps)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("verification worker panicked")).collect()
    })
}

fn summary_line(r: &VerificationReport) -> String {
    let held = r.relations.iter().filter(|o| o.outcome == Outcome::Holds).count();
    let skipped = r.relations.iter().filter(|o| o.outcome == Outcome::Skipped).count();
    let min = r
        .relations
        .iter()
        .filter(|o| o.outcome != Outcome::Reported)
        .filter_map(|o| o.margin.map(|m| (m, o.id.as_str())))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let mut s = format!("{}: {held} held, {} violated, {skipped} skipped", r.matrix, r.violations().len());
    if let Some((m, id)) = min {
        let _ = write!(s, ", smallest margin {m:.3e} ({id})");
    }
    s
}

pub fn verify(a: VerifyArgs) -> CmdResult {
    let caps = caps_for(&a.caps)?;
    let ms: Vec<CommMatrix> = match (&a.source, a.random) {
        (Some(src), None) => vec![load_source(src)?],
        (None, Some(count)) => {
            let conv = if a.sign { Convention::SignPM1 } else { Convention::Boolean01 };
            (0..count as u64)
                .map(|i| random_matrix(a.size, a.size, conv, a.seed.wrapping_add(i)))
                .collect::<Result<_, _>>()?
        }
        _ => return Err(Failure::usage("give exactly one of a matrix source or --random")),
    };
    let reports = verify_many(&ms, &caps, a.caps.eps, a.jobs);
    let violated = reports.iter().any(|r| !r.violations().is_empty());
    match a.format {
        Format::Json => {
            let mut items = Vec::new();
            for r in &reports {
                report_json(r)?;
                items.push(serde_json::to_value(r).expect("report serializes"));
            }
            let doc = json!({ "seed": a.seed, "eps": a.caps.eps, "reports": items });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
        Format::Csv => {
            println!("matrix,relation,outcome,margin");
            for r in &reports {
                for o in &r.relations {
                    let outcome = serde_json::to_value(o.outcome).ok().and_then(|v| v.as_str().map(str::to_string));
                    let margin = o.margin.map(|m| m.to_string()).unwrap_or_default();
                    println!("{},{},{},{margin}", r.matrix, o.id, outcome.unwrap_or_default());
                }
            }
        }
        Format::Text => {
            if let [r] = reports.as_slice() {
                print!("{}", render_text(r));
            } else {
                if a.random.is_some() {
                    println!("seed {} size {} eps {}", a.seed, a.size, a.caps.eps);
                }
                for r in &reports {
                    println!("{}", summary_line(r));
                    for v in r.violations() {
                        println!("  VIOLATED {} margin {:?} {}", v.id, v.margin, v.reason.as_deref().unwrap_or(""));
                    }
                }
            }
            let bad = reports.iter().filter(|r| !r.violations().is_empty()).count();
            println!("{} matrices, {bad} with violations", reports.len());
        }
    }
    Ok(if violated { ExitCode::from(EXIT_VIOLATION) } else { ExitCode::SUCCESS })
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>, Failure> {
    let bad = || Failure::usage(format!("bad range {s:?}; expected a..b or a single value"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let r = match s.split_once("..") {
        Some((a, b)) => num(a)?..=num(b.trim_start_matches('='))?,
        None => {
            let v = num(s)?;
            v..=v
        }
    };
    if r.is_empty() {
        return Err(bad());
    }
    Ok(r)
}

pub fn sweep(a: SweepArgs) -> CmdResult {
    let family = Family::parse(&a.family)?;
    let range = parse_range(&a.n)?;
    for id in &a.measure {
        if measure_spec(id).is_none() {
            return Err(Failure::usage(format!("unknown measure {id:?}")));
        }
    }
    let caps = caps_for(&a.caps)?;
    let ids: Vec<&str> = a.measure.iter().map(String::as_str).collect();
    let table = run_sweep(family, range, &ids, a.caps.eps, &caps)?;
    let csv = table.to_csv();
    match &a.csv {
        Some(p) => {
            emit(&csv, Some(p))?;
            println!("{} rows -> {}", table.rows.len(), p.display());
        }
        None => print!("{csv}"),
    }
    if a.fit {
        let fits = table.fit_summary();
        if a.csv.is_some() {
            print!("{fits}");
        } else {
            eprint!("{fits}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// A pair of `n`-bit strings at Hamming distance `d`, differences spread out.
fn distance_pair(n: usize, d: usize) -> Result<(BitString, BitString), Failure> {
    if n == 0 || d > n {
        return Err(Failure::usage(format!("need 0 <= d <= n and n >= 1, got n = {n}, d = {d}")));
    }
    let x = BitString::from_bits(&(0..n).map(|i| i % 3 == 0).collect::<Vec<_>>());
    let mut y = x.clone();
    for i in 0..d {
        y.flip(i * n / d);
    }
    Ok((x, y))
}

pub fn simulate(a: SimulateArgs) -> CmdResult {
    let protocol: ProtocolId = a.protocol.parse()?;
    let cfg = TrialConfig { trials: a.trials, seed: a.seed, epsilon: a.epsilon, rounds: a.rounds, threshold: a.threshold };
    cfg.validate()?;
    let doc = match protocol {
        ProtocolId::Hd1 => {
            let (x, y) = distance_pair(a.n, a.d)?;
            let event = hd1_round_event(&x, &y, a.epsilon, a.trials, a.seed)?;
            let dcfg = TrialConfig { trials: a.decide_trials.max(1), ..cfg.clone() };
            let decide = hd1_trials(&x, &y, &dcfg)?;
            json!({
                "protocol": protocol.name(), "n": a.n, "d": a.d, "seed": a.seed, "trials": a.trials,
                "round_event": event, "decision_runs": decide, "bits": protocol.cost(a.n, &cfg)?,
            })
        }
        _ => {
            let p = acceptance_matrix(protocol, a.n, &cfg)?;
            let s = p.rows();
            let (mut diag, mut off) = (Vec::new(), Vec::new());
            for i in 0..s {
                for j in 0..s {
                    if i == j { diag.push(p[(i, j)]) } else { off.push(p[(i, j)]) }
                }
            }
            let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
            let lo = off.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = off.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let cost = protocol.cost(a.n, &cfg)?;
            let mut doc = json!({
                "protocol": protocol.name(), "n": a.n, "seed": a.seed, "trials": a.trials, "bits": cost,
                "diagonal_mean": mean(&diag), "off_diagonal_mean": mean(&off),
                "off_diagonal_min": if off.is_empty() { 0.0 } else { lo },
                "off_diagonal_max": if off.is_empty() { 0.0 } else { hi },
                "gamma2_check": acceptance_gamma2_check(&p, cost as f64, 1e-5)?,
                "acceptance": (0..s).map(|i| p.row(i).to_vec()).collect::<Vec<_>>(),
            });
            if protocol == ProtocolId::IpOblivious {
                let errs = oblivious_error_profile(a.n, a.trials, a.seed)?;
                let lo = errs.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = errs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                doc["error_spread"] = json!(hi - lo);
                doc["errors"] = json!(errs);
            }
            doc
        }
    };
    match a.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&doc).expect("json")),
        _ => print!("{}", render_simulation(&doc)),
    }
    Ok(ExitCode::SUCCESS)
}

fn render_simulation(doc: &serde_json::Value) -> String {
    let mut s = String::new();
    if let Some(obj) = doc.as_object() {
        for (k, v) in obj {
            if k == "acceptance" || k == "errors" {
                continue;
            }
            match v {
                serde_json::Value::Object(inner) => {
                    let _ = writeln!(s, "{k}:");
                    for (ik, iv) in inner {
                        let _ = writeln!(s, "  {ik}: {iv}");
                    }
                }
                _ => {
                    let _ = writeln!(s, "{k}: {v}");
                }
            }
        }
    }
    s
}
