//! Exhaustive verification sweeps over a presentation and its backend.

use std::time::Instant;

use serde::Serialize;

use crate::backends::{ElementOrder, GroupBackend, SubgroupHandle};
use crate::bounds::{compute_k, element_order, order_bound, OrderResult, DEFAULT_CAP};
use crate::cayley;
use crate::error::{Error, Result};
use crate::filling::{self, Budget, Filler};
use crate::hyperbolicity::{conjugate_into_ball, estimate_delta, norm};
use crate::presentation::{extract_omega, Presentation};
use crate::reducedness::{check_omega_estimates, is_doubly_lambda_reduced, is_lambda_reduced, shorten_to_terminal};
use crate::shrink::{
    descend, partition_special, shrink_cyclic, shrink_peripheral_endpoints, NormedWordSet, SpecialTag,
};
use crate::words::{self, is_cyclically_reduced, is_reduced, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: &'static str,
    pub cases: usize,
    pub violations: usize,
    pub status: Status,
    /// First violation, skip reason, or a summary figure.
    pub detail: Option<String>,
    pub millis: u128,
}

struct Check {
    row: CheckRow,
    start: Instant,
}

impl Check {
    fn new(suite: &'static str, check: &'static str) -> Self {
        Check {
            row: CheckRow {
                suite,
                check,
                cases: 0,
                violations: 0,
                status: Status::Pass,
                detail: None,
                millis: 0,
            },
            start: Instant::now(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.row.cases += 1;
        if !ok {
            self.row.violations += 1;
            if self.row.detail.is_none() {
                self.row.detail = Some(what());
            }
        }
    }

    fn note(&mut self, text: String) {
        if self.row.detail.is_none() {
            self.row.detail = Some(text);
        }
    }

    fn done(mut self) -> CheckRow {
        self.row.millis = self.start.elapsed().as_millis();
        if self.row.violations > 0 {
            self.row.status = Status::Fail;
        }
        self.row
    }

    fn skipped(mut self, why: impl Into<String>) -> CheckRow {
        self.row.status = Status::Skipped;
        self.row.detail = Some(why.into());
        self.done()
    }

    /// Turns an error into a failed row instead of aborting the suite.
    fn finish(self, r: Result<()>) -> CheckRow {
        match r {
            Ok(()) => self.done(),
            Err(e) => {
                let mut row = self.done();
                row.violations += 1;
                row.status = Status::Fail;
                row.detail = Some(e.to_string());
                row
            }
        }
    }
}

/// Every word of length at most `n` over the full alphabet.
pub fn all_words(p: &Presentation, n: usize) -> Result<Vec<Word>> {
    let alphabet = p.alphabet()?;
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for &l in &alphabet {
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

/// Nonempty subsets of `pool` of size at most `k` whose words represent
/// distinct elements.
pub fn injective_subsets(pool: &[Word], k: usize, b: &dyn GroupBackend) -> Result<Vec<Vec<Word>>> {
    let elements = pool.iter().map(|w| b.evaluate(w)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
    while let Some((start, cur)) = stack.pop() {
        if !cur.is_empty() {
            out.push(cur.iter().map(|&i| pool[i].clone()).collect());
        }
        if cur.len() == k {
            continue;
        }
        for i in start..pool.len() {
            if cur.iter().any(|&j| elements[j] == elements[i]) {
                continue;
            }
            let mut next = cur.clone();
            next.push(i);
            stack.push((i + 1, next));
        }
    }
    Ok(out)
}

fn finite_alphabet(p: &Presentation) -> bool {
    p.peripherals().iter().all(|per| per.is_finite())
}

fn certified(p: &Presentation) -> (u64, u64) {
    p.constants().map_or((1, 1), |c| (c.c, c.delta))
}

/// Word operations, reducedness, the shortening engine and the Ω estimates.
pub fn words_suite(b: &dyn GroupBackend, max_len: usize, radius: usize) -> Vec<CheckRow> {
    let p = b.presentation();
    let mut rows = Vec::new();
    let words = if finite_alphabet(p) { all_words(p, max_len).ok() } else { None };

    let mut c = Check::new("words", "reduction-normal-form");
    match &words {
        None => rows.push(c.skipped("the alphabet is infinite")),
        Some(ws) => {
            let r = (|| {
                for w in ws {
                    let r = words::reduce(w, p)?;
                    let ok = is_reduced(&r)
                        && words::reduce(&r, p)? == r
                        && b.evaluate(&r)? == b.evaluate(w)?
                        && b.is_trivial(&w.concat(&words::inverse(w, p)?))?;
                    c.record(ok, || p.format_word(w));
                }
                Ok(())
            })();
            rows.push(c.finish(r));
        }
    }

    let mut c = Check::new("words", "lambda-reduced-vs-components");
    match &words {
        None => rows.push(c.skipped("the alphabet is infinite")),
        Some(ws) => {
            let r = (|| {
                for w in ws.iter().filter(|w| is_reduced(w)) {
                    let path = cayley::trace(&b.identity(), w, b)?;
                    let isolated = cayley::components(&path, b)?.all_isolated();
                    c.record(is_lambda_reduced(w, b)? == isolated, || p.format_word(w));
                }
                Ok(())
            })();
            rows.push(c.finish(r));
        }
    }

    let mut c = Check::new("words", "shortening-engine");
    let r = (|| {
        // every geodesic word when the alphabet is finite, one per ball element otherwise
        let pool: Vec<Word> = if finite_alphabet(p) {
            all_words(p, radius)?
                .into_iter()
                .filter(|w| b.is_geodesic(w).unwrap_or(false))
                .collect()
        } else {
            b.ball(radius)?.into_iter().map(|(_, w)| w).collect()
        };
        for w in pool {
            let run = shorten_to_terminal(&w, b)?;
            let mut ok = run.steps.len() <= w.len()
                && (run.terminal.is_h_letter() || is_doubly_lambda_reduced(&run.terminal, b)?);
            for step in &run.steps {
                let u = b.evaluate(&step.result.u)?;
                let conj = b.multiply(&b.multiply(&u, &b.evaluate(&step.word)?)?, &b.inverse(&u)?)?;
                ok &= b.evaluate(&step.result.w1)? == conj
                    && step.result.w1.len() < step.word.len()
                    && step.result.u.len() < step.word.len();
            }
            c.record(ok, || p.format_word(&w));
        }
        Ok(())
    })();
    rows.push(c.finish(r));

    let mut c = Check::new("words", "omega-estimates");
    match &words {
        None => rows.push(c.skipped("the alphabet is infinite")),
        Some(ws) => {
            let om = extract_omega(p);
            let (cc, _) = certified(p);
            let r = (|| {
                for w in ws.iter().filter(|w| w.len() <= 3) {
                    if !is_reduced(w) || !is_doubly_lambda_reduced(w, b)? {
                        continue;
                    }
                    match check_omega_estimates(w, b, &om, cc) {
                        Ok(rep) => c.record(rep.element_holds && rep.syllables_hold, || p.format_word(w)),
                        Err(Error::InfiniteOrder) => {}
                        Err(e) => return Err(e),
                    }
                }
                Ok(())
            })();
            rows.push(c.finish(r));
        }
    }
    rows
}

/// Fillings of every null-homotopic cycle word up to `max_len`.
pub fn filling_suite(b: &dyn GroupBackend, max_len: usize) -> Vec<CheckRow> {
    let p = b.presentation();
    let names = ["fill-exact", "replay", "area-sandwich", "isolated-components-bound"];
    if !finite_alphabet(p) {
        return names.iter().map(|n| Check::new("filling", n).skipped("the alphabet is infinite")).collect();
    }
    let om = extract_omega(p);
    let alphabet = match p.alphabet() {
        Ok(a) => a,
        Err(e) => return vec![Check::new("filling", "fill-exact").finish(Err(e))],
    };
    let mut checks: Vec<Check> = names.iter().map(|n| Check::new("filling", n)).collect();
    let mut max_rel = vec![0usize; max_len + 1];
    let r: Result<()> = (|| {
        let mut filler = Filler::new(b, Budget::default())?;
        for k in 1..=max_len {
            filling::for_each_null_homotopic(k, &alphabet, b, &mut |w| {
                let f = filler.fill(w)?;
                checks[0].record(f.exact, || p.format_word(w));
                if !f.exact {
                    return Ok(());
                }
                max_rel[k] = max_rel[k].max(f.rel_area);
                let counted = filling::replay(w, &f.script, p)?;
                checks[1].record(counted == (f.rel_area, f.area), || p.format_word(w));
                let s = filling::verify_sandwich(w, &f, &om)?;
                checks[2].record(s.holds, || format!("{}: {s:?}", p.format_word(w)));
                let iso = filling::verify_isolated_bound(w, b, &om, &f)?;
                checks[3].record(iso.holds, || format!("{}: {} > {}", p.format_word(w), iso.sum, iso.bound));
                Ok(())
            })?;
        }
        Ok(())
    })();
    let c_hat = max_rel.iter().enumerate().skip(1).map(|(k, r)| r.div_ceil(k)).max().unwrap_or(0);
    checks[0].note(format!("sampled C_hat = {c_hat}"));
    let mut rows: Vec<CheckRow> = checks.into_iter().map(Check::done).collect();
    if let Err(e) = r {
        rows[0].violations += 1;
        rows[0].status = Status::Fail;
        rows[0].detail = Some(e.to_string());
    }
    let mut c = Check::new("filling", "certified-C-covers-sample");
    let (cc, _) = certified(p);
    c.record(c_hat as u64 <= cc.max(1), || format!("sampled C_hat = {c_hat} exceeds certified C = {cc}"));
    rows.push(c.done());
    rows
}

/// Both shrinking lemmas, the special-subset cover, the descent with its
/// claims, and conjugation of finite subgroups into small balls.
pub fn shrink_suite(b: &dyn GroupBackend, max_len: usize, max_set: usize) -> Vec<CheckRow> {
    let p = b.presentation();
    let names = [
        "cyclic-lemma",
        "endpoint-lemma",
        "special-cover",
        "descent-claims",
        "delta-probe",
        "conjugate-into-ball",
    ];
    let Some(elements) = b.elements() else {
        return names.iter().map(|n| Check::new("shrink", n).skipped("needs a finite backend")).collect();
    };
    let whole = SubgroupHandle::from_elements(elements.clone());
    let om = extract_omega(p);
    let (cc, delta) = certified(p);
    let mut rows = Vec::new();
    let pool = all_words(p, max_len).map(|ws| {
        ws.into_iter()
            .filter(|w| b.is_geodesic(w).unwrap_or(false))
            .collect::<Vec<_>>()
    });

    let mut c = Check::new("shrink", "cyclic-lemma");
    let r = (|| {
        let cyc: Vec<Word> = pool.as_ref().map_err(clone_err)?.iter().filter(|w| is_cyclically_reduced(w)).cloned().collect();
        for set in injective_subsets(&cyc, max_set, b)? {
            if set.iter().all(Word::is_empty) {
                continue;
            }
            let s = NormedWordSet::new(set, whole.clone(), b)?;
            for force in [false, true] {
                let out = shrink_cyclic(&s, b, &om, cc, force)?;
                c.record(out.guarantee.all_hold(), || format!("{:?}", s.words()));
            }
        }
        Ok(())
    })();
    rows.push(c.finish(r));

    let mut c = Check::new("shrink", "endpoint-lemma");
    let r = (|| {
        let all = pool.as_ref().map_err(clone_err)?;
        for i in 0..p.rank() {
            let ends: Vec<Word> = all
                .iter()
                .filter(|w| {
                    w.len() >= 3
                        && w.first().unwrap().peripheral() == Some(i)
                        && w.last().unwrap().peripheral() == Some(i)
                })
                .cloned()
                .collect();
            for set in injective_subsets(&ends, max_set, b)? {
                let s = NormedWordSet::new(set, whole.clone(), b)?;
                let out = shrink_peripheral_endpoints(&s, i, b, &om, cc)?;
                let ok = out.guarantee.all_hold() && out.omega_checks.iter().all(|o| o.holds);
                c.record(ok, || format!("{:?}", s.words()));
            }
        }
        if c.row.cases == 0 {
            c.note(format!("no geodesic word of length 3 to {max_len} has both endpoints in one peripheral"));
        }
        Ok(())
    })();
    rows.push(c.finish(r));

    let mut c = Check::new("shrink", "special-cover");
    let r = (|| {
        let n = elements.len().min(10);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize > 6 {
                continue;
            }
            let s: Vec<_> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| elements[i].clone()).collect();
            let part = partition_special(&s, b)?;
            let covered = part.classes.iter().all(|cl| cl.tag != SpecialTag::Uncovered);
            c.record(part.meets_floor() && covered, || format!("subset mask {mask:b}"));
        }
        Ok(())
    })();
    rows.push(c.finish(r));

    let subgroups = b.subgroups().unwrap_or_default();
    let mut c = Check::new("shrink", "descent-claims");
    let r = (|| {
        for h in &subgroups {
            match descend(h, b, &om, cc, delta) {
                Ok(trace) => c.record(trace.holds() && trace.steps.len() <= trace.ell, || {
                    format!("subgroup of order {}", h.order())
                }),
                Err(Error::ParabolicSubgroup(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    })();
    rows.push(c.finish(r));

    let mut c = Check::new("shrink", "delta-probe");
    let mut probe = None;
    let r = (|| {
        let diameter = norm(&elements, b)?.unwrap_or(0);
        let mut last = 0;
        for r in 0..=diameter {
            let cert = estimate_delta(b, r)?;
            c.record(cert.delta_ball >= last && cert.delta_ball <= r, || format!("radius {r}"));
            last = cert.delta_ball;
        }
        c.record(last as u64 <= delta.max(1), || {
            format!("probe gives delta {last}, above the certified delta {delta}")
        });
        c.note(format!("delta_ball at diameter {diameter} = {last}"));
        probe = Some(last);
        Ok(())
    })();
    rows.push(c.finish(r));

    let mut c = Check::new("shrink", "conjugate-into-ball");
    match probe {
        None => rows.push(c.skipped("no delta probe")),
        Some(d) => {
            for h in &subgroups {
                let found = conjugate_into_ball(h, b, d);
                c.record(found.is_ok(), || format!("subgroup of order {}", h.order()));
            }
            rows.push(c.done());
        }
    }
    rows
}

fn clone_err(e: &Error) -> Error {
    Error::NotComputable(e.to_string())
}

/// Formula consistency and the order algorithm against backend orders.
pub fn bounds_suite(b: &dyn GroupBackend, radius: usize) -> Vec<CheckRow> {
    let p = b.presentation();
    let om = extract_omega(p);
    let (cc, delta) = certified(p);
    let mut rows = Vec::new();

    let mut c = Check::new("bounds", "formula-consistency");
    let r = (|| {
        match compute_k(p, &om, cc) {
            Ok(k) => {
                let i = &k.inputs;
                c.record(k.k.base == 2 * i.alphabet && k.k.exponent == 2 * i.m * i.c + 1, || format!("{:?}", k.k));
                let with = order_bound(p, &om, cc, delta, false)?;
                let without = order_bound(p, &om, cc, delta, true)?;
                c.record(without.bound.log2_pre_factorial() <= with.bound.log2_pre_factorial(), || {
                    "dropping the factorial increased the bound".into()
                });
                let mut doc = p.to_document();
                if let Some(rel) = doc.get_mut("relators").and_then(|v| v.as_array_mut()) {
                    rel.reverse();
                }
                let reordered = crate::presentation::parse_presentation(&doc.to_string())?;
                let k2 = compute_k(&reordered, &extract_omega(&reordered), cc)?;
                c.record(k2.k == k.k, || "K changed under relator reordering".into());
            }
            Err(Error::NoFiniteNonparabolic) => c.note("X and Omega are empty".into()),
            Err(e) => return Err(e),
        }
        Ok(())
    })();
    rows.push(c.finish(r));

    let mut c = Check::new("bounds", "element-order");
    let r = (|| {
        let bound = match order_bound(p, &om, cc, delta, false) {
            Ok(ob) => ob.bound,
            Err(Error::NoFiniteNonparabolic) => crate::bounds::BoundExpression::power(2, 64),
            Err(e) => return Err(e),
        };
        let cap = 1000u64.min(DEFAULT_CAP);
        let candidates: Vec<Word> = match b.elements() {
            Some(all) => all.iter().map(|g| b.geodesic_word(g)).collect::<Result<_>>()?,
            None => b.ball(radius)?.into_iter().map(|(_, w)| w).collect(),
        };
        for w in candidates {
            let g = b.evaluate(&w)?;
            let expected = b.order(&g)?;
            let got = element_order(&w, b, &bound, cap);
            let ok = match (got, expected) {
                (Err(Error::ParabolicInput(_)), _) => b.parabolic_index(&g)?.is_some(),
                (Ok(OrderResult::Order(n)), ElementOrder::Finite(m)) => n == m,
                (Ok(OrderResult::CapExceeded { .. }), ElementOrder::Infinite) => true,
                (Ok(OrderResult::CapExceeded { .. }), ElementOrder::Finite(m)) => m > cap,
                (Ok(OrderResult::CapExceeded { .. }), ElementOrder::Unknown) => true,
                _ => false,
            };
            c.record(ok, || p.format_word(&w));
        }
        Ok(())
    })();
    rows.push(c.finish(r));
    rows
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    pub max_len: usize,
    pub max_set: usize,
    pub radius: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            max_len: 6,
            max_set: 4,
            radius: 4,
        }
    }
}

/// Runs the named suite (`words`, `filling`, `shrink`, `bounds` or `all`).
pub fn run(name: &str, b: &dyn GroupBackend, opts: SuiteOptions) -> Result<Vec<CheckRow>> {
    let short = opts.max_len.min(3);
    let words = |rows: &mut Vec<CheckRow>| rows.extend(words_suite(b, opts.max_len.min(4), opts.radius));
    let mut rows = Vec::new();
    match name {
        "words" => words(&mut rows),
        "filling" => rows.extend(filling_suite(b, opts.max_len)),
        "shrink" => rows.extend(shrink_suite(b, short, opts.max_set)),
        "bounds" => rows.extend(bounds_suite(b, opts.radius)),
        "all" => {
            words(&mut rows);
            rows.extend(filling_suite(b, opts.max_len));
            rows.extend(shrink_suite(b, short, opts.max_set));
            rows.extend(bounds_suite(b, opts.radius));
        }
        other => return Err(Error::NotComputable(format!("unknown suite `{other}`"))),
    }
    Ok(rows)
}

pub fn all_pass(rows: &[CheckRow]) -> bool {
    rows.iter().all(|r| r.status != Status::Fail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn s3_suites_pass() {
        let b = bundled::backend("s3");
        let rows = run(
            "all",
            b.as_ref(),
            SuiteOptions {
                max_len: 4,
                max_set: 3,
                radius: 2,
            },
        )
        .unwrap();
        for r in &rows {
            assert_ne!(r.status, Status::Fail, "{r:?}");
        }
        assert!(rows.iter().any(|r| r.check == "descent-claims" && r.cases > 0));
    }

    #[test]
    fn free_product_suites_skip_finite_only_checks() {
        let b = bundled::backend("dinf");
        let rows = run("all", b.as_ref(), SuiteOptions { max_len: 3, max_set: 2, radius: 3 }).unwrap();
        assert!(all_pass(&rows), "{rows:?}");
        assert!(rows.iter().any(|r| r.status == Status::Skipped));
    }

    #[test]
    fn unknown_suite_is_an_error() {
        let b = bundled::backend("s3");
        assert!(run("nope", b.as_ref(), SuiteOptions::default()).is_err());
    }
}
