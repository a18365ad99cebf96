//! Acceptance criteria, one pass/fail line each. Exits nonzero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use relhyp::backends::ElementOrder;
use relhyp::bounds::{compute_k, element_order, order_bound, OrderResult};
use relhyp::hyperbolicity::estimate_delta;
use relhyp::presentation::extract_omega;
use relhyp::suites::{self, CheckRow, Status};
use relhyp::{bundled, cli};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn row<'a>(rows: &'a [CheckRow], check: &str) -> &'a CheckRow {
    rows.iter().find(|r| r.check == check).unwrap_or_else(|| panic!("no row {check}"))
}

fn clean(r: &CheckRow) -> bool {
    r.status == Status::Pass && r.violations == 0
}

fn formula_fidelity() -> Outcome {
    let p = bundled::s3();
    let om = extract_omega(&p);
    let k = compute_k(&p, &om, 1).unwrap();
    let i = &k.inputs;
    let exact = k.k.exact().map(|v| v.to_string()).unwrap_or_default();
    let ob = order_bound(&p, &om, 1, 1, false).unwrap();
    let log2 = ob.bound.log2_pre_factorial();
    outcome(
        (i.alphabet, i.m, i.c) == (2, 4, 1) && exact == "262144" && (log2 - 648.0).abs() <= 1e-6 && ob.bound.factorial,
        format!("|X∪Ω|={} M={} C={} K={exact} log2(pre-factorial)={log2:.9} (tol 1e-6)", i.alphabet, i.m, i.c),
    )
}

fn order_algorithm() -> Outcome {
    let b = bundled::backend("s3");
    let p = b.presentation();
    let om = extract_omega(p);
    let bound = order_bound(p, &om, 1, 1, false).unwrap().bound;
    let (mut gated, mut agree, mut total) = (0, 0, 0);
    let mut bad = Vec::new();
    for g in b.elements().unwrap() {
        total += 1;
        let w = b.geodesic_word(&g).unwrap();
        match element_order(&w, b.as_ref(), &bound, 1000) {
            Ok(OrderResult::Order(n)) if b.order(&g).unwrap() == ElementOrder::Finite(n) => agree += 1,
            Err(relhyp::Error::ParabolicInput(_)) if b.parabolic_index(&g).unwrap().is_some() => gated += 1,
            other => bad.push(format!("{}: {other:?}", b.describe(&g))),
        }
    }
    let data = format!("{}/data/dinf.json", env!("CARGO_MANIFEST_DIR"));
    let mut out = Vec::new();
    let code = cli::main_with(["relhyp", "order", &data, "-w", "H1:a H2:b", "--cap", "1000"], &mut out);
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap_or_default();
    let dinf = code == 0 && v["outputs"]["element_order"]["cap_exceeded"]["cap"] == 1000;
    outcome(
        bad.is_empty() && agree + gated == total && agree > 0 && dinf,
        format!(
            "S3: {agree} non-parabolic elements agree with table order, {gated} rejected by the parabolic gate, {} mismatches; D∞ H1:a H2:b cap 1000: {}",
            bad.len(),
            if dinf { "CapExceeded" } else { "unexpected" }
        ),
    )
}

fn filling_rows() -> Vec<CheckRow> {
    suites::filling_suite(bundled::backend("s3").as_ref(), 6)
}

fn isolated_bound(rows: &[CheckRow]) -> Outcome {
    let exact = row(rows, "fill-exact");
    let r = row(rows, "isolated-components-bound");
    outcome(
        clean(exact) && clean(r) && r.cases > 0,
        format!(
            "{} cycle words of length ≤ 6, {} exact fills, {} violations of Σ|p_i|_Ω ≤ M·Area^rel",
            exact.cases, r.cases, r.violations
        ),
    )
}

fn sandwich(rows: &[CheckRow]) -> Outcome {
    let s = row(rows, "area-sandwich");
    let replay = row(rows, "replay");
    outcome(
        clean(s) && clean(replay) && s.cases > 0,
        format!(
            "{} exact fills, {} sandwich violations, {} replay mismatches",
            s.cases, s.violations, replay.violations
        ),
    )
}

fn shortening() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["s3", "dinf"] {
        let rows = suites::words_suite(bundled::backend(name).as_ref(), 0, 4);
        let r = row(&rows, "shortening-engine");
        pass &= clean(r) && r.cases > 0;
        parts.push(format!("{name}: {} geodesic words, {} violations", r.cases, r.violations));
    }
    outcome(pass, format!("radius 4; {}", parts.join("; ")))
}

fn omega_estimates() -> Outcome {
    let rows = suites::words_suite(bundled::backend("s3").as_ref(), 3, 0);
    let r = row(&rows, "omega-estimates");
    outcome(
        clean(r) && r.cases > 0,
        format!("{} doubly Λ-reduced finite-order words of length ≤ 3, {} violations", r.cases, r.violations),
    )
}

struct ShrinkRows {
    per_model: Vec<(&'static str, Vec<CheckRow>)>,
}

fn shrink_rows() -> ShrinkRows {
    ShrinkRows {
        per_model: bundled::FINITE_NAMES
            .iter()
            .map(|&n| (n, suites::shrink_suite(bundled::backend(n).as_ref(), 3, 4)))
            .collect(),
    }
}

fn summed(s: &ShrinkRows, check: &str) -> (bool, usize, usize, Vec<String>) {
    let mut pass = true;
    let (mut cases, mut violations) = (0, 0);
    let mut per = Vec::new();
    for (name, rows) in &s.per_model {
        let r = row(rows, check);
        pass &= clean(r);
        cases += r.cases;
        violations += r.violations;
        per.push(format!("{name} {}", r.cases));
    }
    (pass, cases, violations, per)
}

fn shrink_lemmas(s: &ShrinkRows) -> Outcome {
    let (p1, c1, v1, per1) = summed(s, "cyclic-lemma");
    let (p2, c2, v2, per2) = summed(s, "endpoint-lemma");
    outcome(
        p1 && p2 && c1 > 0 && c2 > 0,
        format!(
            "sets ≤ 4 over geodesic words ≤ 3: cyclic lemma {c1} runs ({}), {v1} violations; endpoint lemma {c2} runs ({}), {v2} violations",
            per1.join(", "),
            per2.join(", ")
        ),
    )
}

fn descent(s: &ShrinkRows) -> Outcome {
    let (pass, cases, violations, per) = summed(s, "descent-claims");
    outcome(
        pass && cases > 0,
        format!("{cases} subgroups descended, parabolic ones skipped, trivial included ({}), {violations} violations", per.join(", ")),
    )
}

fn conjugation_into_ball(s: &ShrinkRows) -> Outcome {
    let (p1, _, _, _) = summed(s, "delta-probe");
    let (p2, cases, violations, per) = summed(s, "conjugate-into-ball");
    let deltas: Vec<String> = s
        .per_model
        .iter()
        .map(|(n, rows)| format!("{n} {}", row(rows, "delta-probe").detail.clone().unwrap_or_default()))
        .collect();
    outcome(
        p1 && p2 && cases > 0,
        format!(
            "{cases} subgroups ({}), {violations} without a conjugate in the 4δ+1 ball; {}",
            per.join(", "),
            deltas.join(", ")
        ),
    )
}

fn delta_sanity() -> Outcome {
    let d = estimate_delta(bundled::backend("dinf").as_ref(), 4).unwrap().delta_ball;
    let mut pass = d == 0;
    let mut parts = vec![format!("D∞ radius 4: {d}")];
    for name in bundled::NAMES {
        let b = bundled::backend(name);
        let top = if bundled::FINITE_NAMES.contains(&name) {
            relhyp::hyperbolicity::norm(&b.elements().unwrap(), b.as_ref()).unwrap().unwrap()
        } else {
            4
        };
        let ds: Vec<usize> = (0..=top).map(|r| estimate_delta(b.as_ref(), r).unwrap().delta_ball).collect();
        let monotone = ds.windows(2).all(|w| w[0] <= w[1]);
        pass &= monotone;
        parts.push(format!("{name} {ds:?}"));
    }
    outcome(pass, parts.join("; "))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, limit: Duration, (o, spent): (Outcome, Duration)| {
        let pass = o.pass && spent <= limit;
        if !pass {
            failures += 1;
        }
        println!(
            "{} {id:>2} {name}: {} [{:.3} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            spent.as_secs_f64(),
            limit.as_secs()
        );
    };
    let s = Duration::from_secs;

    report(1, "formula fidelity", s(1), timed(formula_fidelity));
    report(2, "order algorithm", s(1), timed(order_algorithm));
    let (rows, fill_time) = timed(filling_rows);
    report(3, "isolated components bound", s(120), (isolated_bound(&rows), fill_time));
    report(4, "area sandwich", s(120), (sandwich(&rows), fill_time));
    report(5, "shortening engine", s(120), timed(shortening));
    report(6, "omega estimates", s(60), timed(omega_estimates));
    let (sr, shrink_time) = timed(shrink_rows);
    let part = |check: &str| -> Duration {
        sr.per_model
            .iter()
            .flat_map(|(_, rows)| rows.iter())
            .filter(|r| r.check == check)
            .map(|r| Duration::from_millis(r.millis as u64))
            .sum()
    };
    let lemmas = part("cyclic-lemma") + part("endpoint-lemma");
    report(7, "shrink lemmas", s(300), (shrink_lemmas(&sr), lemmas.min(shrink_time)));
    report(8, "descent and claims", s(60), (descent(&sr), part("descent-claims")));
    report(9, "conjugation into the 4δ+1 ball", s(60), (conjugation_into_ball(&sr), part("delta-probe") + part("conjugate-into-ball")));
    report(10, "hyperbolicity probe sanity", s(60), timed(delta_sanity));

    if failures == 0 {
        println!("all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria fail");
        ExitCode::FAILURE
    }
}
