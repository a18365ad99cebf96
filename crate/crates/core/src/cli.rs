//! Batch command-line interface. Every subcommand prints one JSON report on
//! standard output; progress goes to standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::backends::{backend_for, GroupBackend};
use crate::bounds::{compute_k, element_order, order_bound, BoundExpression, DEFAULT_CAP};
use crate::cayley;
use crate::error::{Error, Result};
use crate::filling::{self, Budget};
use crate::hyperbolicity::estimate_delta;
use crate::presentation::{extract_omega, is_reduced_presentation, load_presentation, validate_generality, Presentation};
use crate::reducedness::{is_doubly_lambda_reduced, is_lambda_reduced, shorten};
use crate::suites::{self, SuiteOptions};
use crate::words::{self, SyllableKind, Word};

#[derive(Debug, Parser)]
#[command(name = "relhyp", version, about = "Relative presentations: words, fillings, probes and order bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BallFormat {
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Words,
    Filling,
    Shrink,
    Bounds,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Words => "words",
            Suite::Filling => "filling",
            Suite::Shrink => "shrink",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Omega, M, K and the finite-subgroup order bound.
    Constants {
        file: PathBuf,
        /// Overrides the certified delta.
        #[arg(long)]
        delta: Option<u64>,
        #[arg(long)]
        torsion_free: bool,
    },
    /// Order of the element a word represents.
    Order {
        file: PathBuf,
        #[arg(short, long)]
        word: String,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        #[arg(long)]
        torsion_free: bool,
    },
    /// Syllables, reducedness flags and the H-component table of a word.
    Analyze {
        file: PathBuf,
        #[arg(short, long)]
        word: String,
    },
    /// Bounded van Kampen filling of a null-homotopic word.
    Fill {
        file: PathBuf,
        #[arg(short, long)]
        word: String,
        /// Largest total cell count explored.
        #[arg(long, default_value_t = 64)]
        budget: usize,
        #[arg(long)]
        max_length: Option<usize>,
        #[arg(long, default_value_t = 200_000)]
        max_states: usize,
    },
    /// Replays a move script produced by `fill` and recounts its cells.
    Replay {
        file: PathBuf,
        #[arg(short, long)]
        word: String,
        /// Script file, `-` for standard input.
        #[arg(long)]
        script: PathBuf,
    },
    /// Slim-triangle probe on a ball.
    Delta {
        file: PathBuf,
        #[arg(long)]
        radius: usize,
    },
    /// The ball of a given radius in the relative Cayley graph.
    Ball {
        file: PathBuf,
        #[arg(long)]
        radius: usize,
        #[arg(long, value_enum, default_value_t = BallFormat::Json)]
        format: BallFormat,
    },
    /// Exhaustive verification sweeps.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long, default_value_t = 4)]
        max_set: usize,
        /// Ball radius for the shortening and order sweeps.
        #[arg(long, default_value_t = 4)]
        radius: usize,
    },
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub millis: u128,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    /// SHA-256 of the presentation file.
    pub fingerprint: Option<String>,
    pub inputs: Value,
    pub outputs: Value,
    pub verification: Option<Value>,
    pub error: Option<ErrorReport>,
    pub timing: Timing,
}

impl RunReport {
    /// Success unless a domain error occurred or a verification failed.
    pub fn ok(&self) -> bool {
        self.error.is_none()
            && self
                .verification
                .as_ref()
                .and_then(|v| v.get("passed"))
                .and_then(Value::as_bool)
                .unwrap_or(true)
    }
}

fn error_kind(e: &Error) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

fn fingerprint(path: &Path) -> Option<String> {
    let bytes = std::fs::read(path).ok()?;
    Some(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

struct Loaded {
    p: Arc<Presentation>,
}

impl Loaded {
    fn open(path: &Path) -> Result<Self> {
        Ok(Loaded {
            p: Arc::new(load_presentation(path)?),
        })
    }

    fn backend(&self) -> Result<Arc<dyn GroupBackend>> {
        backend_for(self.p.clone())
    }

    fn word(&self, text: &str) -> Result<Word> {
        self.p.parse_word(text)
    }

    fn c_delta(&self) -> (u64, &'static str, u64) {
        match self.p.constants() {
            Some(c) => (c.c, "certified", c.delta),
            None => (1, "default", 1),
        }
    }
}

fn fmt_word(p: &Presentation, w: &Word) -> String {
    if w.is_empty() {
        String::new()
    } else {
        p.format_word(w)
    }
}

type Outcome = (Value, Value, Option<Value>);

fn constants(file: &Path, delta: Option<u64>, torsion_free: bool) -> Result<Outcome> {
    let l = Loaded::open(file)?;
    let p = &l.p;
    let om = extract_omega(p);
    let (c, c_source, certified_delta) = l.c_delta();
    let delta = delta.unwrap_or(certified_delta);
    let omega: Vec<Value> = om
        .per_peripheral
        .iter()
        .enumerate()
        .map(|(lambda, set)| {
            let per = p.peripheral(lambda);
            json!({
                "peripheral": per.name,
                "letters": set.iter().map(|&e| per.element_name(e)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let advisories: Vec<String> = validate_generality(p).iter().map(|a| format!("{a:?}")).collect();
    let mut outputs = json!({
        "omega": omega,
        "omega_size": om.size(),
        "x_size": p.x_names().len(),
        "m": om.m,
        "reduced_presentation": is_reduced_presentation(p),
        "advisories": advisories,
    });
    match (compute_k(p, &om, c), order_bound(p, &om, c, delta, torsion_free)) {
        (Ok(k), Ok(ob)) => {
            outputs["compute_k"] = json!({
                "k": k.k,
                "inputs": k.inputs,
            });
            outputs["order_bound"] = serde_json::to_value(&ob)?;
        }
        (Err(Error::NoFiniteNonparabolic), _) | (_, Err(Error::NoFiniteNonparabolic)) => {
            outputs["no_finite_nonparabolic"] = json!(Error::NoFiniteNonparabolic.to_string());
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    }
    let inputs = json!({
        "file": file,
        "c": c,
        "c_source": c_source,
        "delta": delta,
        "torsion_free": torsion_free,
    });
    Ok((inputs, outputs, None))
}

fn order(file: &Path, word: &str, cap: u64, torsion_free: bool) -> Result<Outcome> {
    let l = Loaded::open(file)?;
    let b = l.backend()?;
    let w = l.word(word)?;
    let om = extract_omega(&l.p);
    let (c, _, delta) = l.c_delta();
    let inputs = json!({ "file": file, "word": word, "cap": cap, "torsion_free": torsion_free });
    let outputs = match order_bound(&l.p, &om, c, delta, torsion_free) {
        Ok(ob) => json!({ "element_order": element_order(&w, b.as_ref(), &ob.bound, cap)? }),
        Err(Error::NoFiniteNonparabolic) => {
            // no bound applies: only the cap can stop the iteration
            let unbounded = BoundExpression::power(u64::MAX, u64::MAX);
            let mut r = serde_json::to_value(element_order(&w, b.as_ref(), &unbounded, cap)?)?;
            if let Some(ce) = r.get_mut("cap_exceeded") {
                ce["bound"] = Value::Null;
            }
            json!({ "element_order": r, "note": Error::NoFiniteNonparabolic.to_string() })
        }
        Err(e) => return Err(e),
    };
    Ok((inputs, outputs, None))
}

fn analyze(file: &Path, word: &str) -> Result<Outcome> {
    let l = Loaded::open(file)?;
    let p = &l.p;
    let w = l.word(word)?;
    let syl: Vec<Value> = words::syllables(&w)
        .iter()
        .map(|s| {
            let kind = match s.kind {
                SyllableKind::X => "X".to_string(),
                SyllableKind::H(lambda) => p.peripheral(lambda).name.clone(),
            };
            json!({ "kind": kind, "start": s.span.start, "end": s.span.end })
        })
        .collect();
    let reduced = words::is_reduced(&w);
    let mut outputs = json!({
        "word": fmt_word(p, &w),
        "length": w.len(),
        "syllables": syl,
        "reduced": reduced,
        "cyclically_reduced": words::is_cyclically_reduced(&w),
        "normal_form": fmt_word(p, &words::reduce(&w, p)?),
    });
    match l.backend() {
        Ok(b) => {
            let b = b.as_ref();
            let g = b.evaluate(&w)?;
            let path = cayley::trace(&b.identity(), &w, b)?;
            outputs["element"] = json!(b.describe(&g));
            outputs["relative_length"] = json!(b.relative_length(&g)?.value);
            outputs["geodesic"] = json!(b.is_geodesic(&w)?);
            outputs["components"] = serde_json::to_value(cayley::components(&path, b)?)?;
            if path.closed {
                outputs["cyclic_components"] = serde_json::to_value(cayley::cyclic_components(&path, b)?)?;
            }
            if reduced {
                let doubly = is_doubly_lambda_reduced(&w, b)?;
                outputs["lambda_reduced"] = json!(is_lambda_reduced(&w, b)?);
                outputs["doubly_lambda_reduced"] = json!(doubly);
                if !doubly && !w.is_h_letter() && b.is_geodesic(&w)? {
                    let s = shorten(&w, b)?;
                    outputs["shorten"] = json!({
                        "u": fmt_word(p, &s.u),
                        "w1": fmt_word(p, &s.w1),
                        "case": s.case,
                        "pair": s.pair,
                        "omega_certificate": s.omega_certificate,
                    });
                }
            }
        }
        Err(e) => outputs["backend"] = json!(e.to_string()),
    }
    Ok((json!({ "file": file, "word": word }), outputs, None))
}

fn fill(file: &Path, word: &str, budget: Budget) -> Result<Outcome> {
    let l = Loaded::open(file)?;
    let b = l.backend()?;
    let w = l.word(word)?;
    let om = extract_omega(&l.p);
    let f = filling::fill(&w, b.as_ref(), budget)?;
    let script = filling::render_script(&f.script, &l.p);
    eprint!("{script}");
    let replayed = filling::replay(&w, &f.script, &l.p)?;
    let mut verification = json!({
        "replay": { "rel_area": replayed.0, "area": replayed.1, "holds": replayed == (f.rel_area, f.area) },
    });
    let mut passed = replayed == (f.rel_area, f.area);
    if f.exact {
        let s = filling::verify_sandwich(&w, &f, &om)?;
        let iso = filling::verify_isolated_bound(&w, b.as_ref(), &om, &f)?;
        passed &= s.holds && iso.holds;
        verification["verify_sandwich"] = serde_json::to_value(&s)?;
        verification["verify_isolated_bound"] = serde_json::to_value(&iso)?;
    }
    verification["passed"] = json!(passed);
    let inputs = json!({
        "file": file,
        "word": word,
        "budget": budget.max_area,
        "max_length": budget.max_length,
        "max_states": budget.max_states,
    });
    let outputs = json!({
        "fill": { "area": f.area, "rel_area": f.rel_area, "exact": f.exact },
        "script": script.lines().collect::<Vec<_>>(),
    });
    Ok((inputs, outputs, Some(verification)))
}

fn replay(file: &Path, word: &str, script: &Path) -> Result<Outcome> {
    let l = Loaded::open(file)?;
    let w = l.word(word)?;
    let text = if script == Path::new("-") {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(script)?
    };
    let moves = filling::parse_script(&text, &l.p)?;
    let (rel_area, area) = filling::replay(&w, &moves, &l.p)?;
    Ok((
        json!({ "file": file, "word": word, "script": script }),
        json!({ "replay": { "moves": moves.len(), "rel_area": rel_area, "area": area } }),
        Some(json!({ "passed": true, "reaches_empty_word": true })),
    ))
}

fn delta(file: &Path, radius: usize) -> Result<Outcome> {
    let l = Loaded::open(file)?;
    let b = l.backend()?;
    let cert = estimate_delta(b.as_ref(), radius)?;
    Ok((
        json!({ "file": file, "radius": radius }),
        json!({ "estimate_delta": cert }),
        None,
    ))
}

fn ball(file: &Path, radius: usize, format: BallFormat) -> Result<(Outcome, Option<String>)> {
    let l = Loaded::open(file)?;
    let b = l.backend()?;
    let inputs = json!({ "file": file, "radius": radius });
    if format == BallFormat::Dot {
        return Ok(((inputs, Value::Null, None), Some(cayley::ball_dot(b.as_ref(), radius)?)));
    }
    let elements: Vec<Value> = b
        .ball(radius)?
        .iter()
        .map(|(g, w)| json!({ "element": b.describe(g), "geodesic": fmt_word(&l.p, w), "length": w.len() }))
        .collect();
    Ok(((inputs, json!({ "ball": { "size": elements.len(), "elements": elements } }), None), None))
}

fn verify(file: &Path, suite: Suite, opts: SuiteOptions) -> Result<Outcome> {
    let l = Loaded::open(file)?;
    let b = l.backend()?;
    let rows = suites::run(suite.name(), b.as_ref(), opts)?;
    for r in &rows {
        eprintln!(
            "{:<8} {:<30} {:>8} cases {:>4} violations {:?}",
            r.suite, r.check, r.cases, r.violations, r.status
        );
    }
    let passed = suites::all_pass(&rows);
    Ok((
        json!({
            "file": file,
            "suite": suite.name(),
            "max_len": opts.max_len,
            "max_set": opts.max_set,
            "radius": opts.radius,
        }),
        json!({ "checks": rows.len() }),
        Some(json!({ "passed": passed, "rows": rows })),
    ))
}

fn file_of(c: &Command) -> &Path {
    match c {
        Command::Constants { file, .. }
        | Command::Order { file, .. }
        | Command::Analyze { file, .. }
        | Command::Fill { file, .. }
        | Command::Replay { file, .. }
        | Command::Delta { file, .. }
        | Command::Ball { file, .. }
        | Command::Verify { file, .. } => file,
    }
}

fn name_of(c: &Command) -> &'static str {
    match c {
        Command::Constants { .. } => "constants",
        Command::Order { .. } => "order",
        Command::Analyze { .. } => "analyze",
        Command::Fill { .. } => "fill",
        Command::Replay { .. } => "replay",
        Command::Delta { .. } => "delta",
        Command::Ball { .. } => "ball",
        Command::Verify { .. } => "verify",
    }
}

/// Runs a parsed command. The second value is raw text to print instead of the
/// JSON report (DOT output).
pub fn execute(c: &Command) -> (RunReport, Option<String>) {
    let start = Instant::now();
    let mut raw = None;
    let result = match c {
        Command::Constants { file, delta, torsion_free } => constants(file, *delta, *torsion_free),
        Command::Order { file, word, cap, torsion_free } => order(file, word, *cap, *torsion_free),
        Command::Analyze { file, word } => analyze(file, word),
        Command::Fill { file, word, budget, max_length, max_states } => fill(
            file,
            word,
            Budget {
                max_area: *budget,
                max_length: *max_length,
                max_states: *max_states,
                ..Budget::default()
            },
        ),
        Command::Replay { file, word, script } => replay(file, word, script),
        Command::Delta { file, radius } => delta(file, *radius),
        Command::Ball { file, radius, format } => ball(file, *radius, *format).map(|(o, dot)| {
            raw = dot;
            o
        }),
        Command::Verify { file, suite, max_len, max_set, radius } => verify(
            file,
            *suite,
            SuiteOptions {
                max_len: *max_len,
                max_set: *max_set,
                radius: *radius,
            },
        ),
    };
    let file = file_of(c);
    let (inputs, outputs, verification, error) = match result {
        Ok((i, o, v)) => (i, o, v, None),
        Err(e) => (
            json!({ "file": file }),
            Value::Null,
            None,
            Some(ErrorReport {
                kind: error_kind(&e),
                message: e.to_string(),
            }),
        ),
    };
    let report = RunReport {
        command: name_of(c),
        fingerprint: fingerprint(file),
        inputs,
        outputs,
        verification,
        error,
        timing: Timing {
            millis: start.elapsed().as_millis(),
        },
    };
    (report, raw)
}

/// Parses arguments, runs, writes the report and returns the exit code:
/// 0 on success, 1 on a domain error or failed verification, 2 on a usage
/// error.
pub fn main_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (report, raw) = execute(&cli.command);
    if let Some(e) = &report.error {
        eprintln!("error: {}", e.message);
    }
    let written = match (&raw, report.ok()) {
        (Some(text), true) => out.write_all(text.as_bytes()),
        _ => serde_json::to_writer_pretty(&mut *out, &report)
            .map_err(std::io::Error::from)
            .and_then(|_| writeln!(out)),
    };
    if written.is_err() {
        return 1;
    }
    if report.ok() {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(name: &str) -> String {
        format!("{}/data/{name}.json", env!("CARGO_MANIFEST_DIR"))
    }

    fn run(args: &[&str]) -> (i32, Value) {
        let mut out = Vec::new();
        let code = main_with(std::iter::once("relhyp").chain(args.iter().copied()), &mut out);
        let v = serde_json::from_slice(&out).unwrap_or(Value::Null);
        (code, v)
    }

    #[test]
    fn constants_for_s3() {
        let (code, v) = run(&["constants", &data("s3")]);
        assert_eq!(code, 0);
        assert_eq!(v["outputs"]["compute_k"]["k"]["exact"], "262144");
        let log2 = v["outputs"]["order_bound"]["bound"]["log2_pre_factorial"].as_f64().unwrap();
        assert!((log2 - 648.0).abs() < 1e-6);
        assert_eq!(v["fingerprint"].as_str().unwrap().len(), 64);
    }

    #[test]
    fn order_reports() {
        let (code, v) = run(&["order", &data("s3"), "-w", "t"]);
        assert_eq!(code, 0);
        assert_eq!(v["outputs"]["element_order"]["order"], 2);
        let (code, v) = run(&["order", &data("s3"), "-w", "H1:r"]);
        assert_eq!(code, 1);
        assert_eq!(v["error"]["kind"], "ParabolicInput");
        let (code, v) = run(&["order", &data("dinf"), "-w", "H1:a H2:b", "--cap", "1000"]);
        assert_eq!(code, 0);
        assert_eq!(v["outputs"]["element_order"]["cap_exceeded"]["cap"], 1000);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(&["frobnicate"]).0, 2);
        assert_eq!(run(&["order", &data("s3")]).0, 2);
    }

    #[test]
    fn missing_file_is_a_domain_error() {
        let (code, v) = run(&["constants", "/nonexistent.json"]);
        assert_eq!(code, 1);
        assert!(v["error"]["message"].is_string());
    }

    #[test]
    fn analyze_flags() {
        let (code, v) = run(&["analyze", &data("s3"), "-w", "t H1:r t"]);
        assert_eq!(code, 0);
        let o = &v["outputs"];
        assert_eq!(o["reduced"], true);
        assert_eq!(o["syllables"].as_array().unwrap().len(), 3);
        assert!(o["lambda_reduced"].is_boolean());
    }

    #[test]
    fn fill_then_replay() {
        let (code, v) = run(&["fill", &data("s3"), "-w", "t H1:r t H1:r"]);
        assert_eq!(code, 0);
        assert_eq!(v["outputs"]["fill"]["rel_area"], 1);
        let script: Vec<&str> = v["outputs"]["script"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s.as_str().unwrap())
            .collect();
        let path = std::env::temp_dir().join(format!("relhyp-script-{}.txt", std::process::id()));
        std::fs::write(&path, script.join("\n")).unwrap();
        let (code, r) = run(&["replay", &data("s3"), "-w", "t H1:r t H1:r", "--script", path.to_str().unwrap()]);
        std::fs::remove_file(&path).ok();
        assert_eq!(code, 0);
        assert_eq!(r["outputs"]["replay"]["rel_area"], 1);
    }

    #[test]
    fn ball_and_delta() {
        let (code, v) = run(&["ball", &data("s3"), "--radius", "1"]);
        assert_eq!(code, 0);
        assert!(v["outputs"]["ball"]["size"].as_u64().unwrap() >= 4);
        let mut out = Vec::new();
        let code = main_with(["relhyp", "ball", &data("s3"), "--radius", "1", "--format", "dot"], &mut out);
        assert_eq!(code, 0);
        assert!(String::from_utf8(out).unwrap().starts_with("graph ball {"));
        let (_, v) = run(&["delta", &data("dinf"), "--radius", "3"]);
        assert_eq!(v["outputs"]["estimate_delta"]["delta_ball"], 0);
    }

    #[test]
    fn verify_bounds_suite() {
        let (code, v) = run(&["verify", &data("s3"), "--suite", "bounds"]);
        assert_eq!(code, 0);
        assert_eq!(v["verification"]["passed"], true);
    }
}
