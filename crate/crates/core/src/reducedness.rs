//! Λ-reduced and doubly Λ-reduced words, the constructive shortening of
//! geodesic words that are not doubly Λ-reduced, and the Ω-length estimates
//! for doubly Λ-reduced words of finite order.

use serde::Serialize;

use crate::backends::{word_metric, ElementHandle, ElementOrder, GroupBackend};
use crate::cayley;
use crate::error::{Error, Result};
use crate::presentation::{extract_omega, OmegaReport};
use crate::words::{self, is_cyclically_reduced, is_reduced, Letter, Word};

/// Elements explored when measuring lengths in `⟨X ∪ Ω⟩`.
const METRIC_CAP: usize = 1 << 20;

fn prefixes(w: &Word, b: &dyn GroupBackend) -> Result<Vec<ElementHandle>> {
    Ok(cayley::trace(&b.identity(), w, b)?.vertices)
}

/// No two same-`λ` syllables with an in-between segment evaluating into `H_λ`.
pub fn is_lambda_reduced(w: &Word, b: &dyn GroupBackend) -> Result<bool> {
    if !is_reduced(w) {
        return Err(Error::NotReduced);
    }
    let pre = prefixes(w, b)?;
    let l = w.letters();
    for i in 0..l.len() {
        let Some(lambda) = l[i].peripheral() else { continue };
        let left = b.inverse(&pre[i + 1])?;
        for j in i + 2..l.len() {
            if l[j].peripheral() == Some(lambda) && b.membership(&b.multiply(&left, &pre[j])?, lambda)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Cyclically reduced with a Λ-reduced square; `ε` qualifies.
pub fn is_doubly_lambda_reduced(w: &Word, b: &dyn GroupBackend) -> Result<bool> {
    if w.is_empty() {
        return Ok(true);
    }
    Ok(is_cyclically_reduced(w) && is_lambda_reduced(&w.concat(w), b)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShorteningCase {
    /// Conjugation by the last letter merges the seam.
    NotCyclicallyReduced,
    /// `i ≥ j`: `W₁` follows the connector and then `w_j … w_i`.
    Forward,
    /// `j > i`: `W₁` follows the connector and then `w_{j-1}⁻¹ … w_{i+1}⁻¹`.
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaCertificate {
    /// `|Ū|_{X∪Ω}`, or `None` when `Ū ∉ ⟨X ∪ Ω⟩`.
    pub length: Option<usize>,
    /// `(2MC+1)·||W||`
    pub bound: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShorteningResult {
    /// A nonempty terminal subword of the input.
    pub u: Word,
    pub w1: Word,
    pub case: ShorteningCase,
    /// 1-based positions `(i, j)` of the connected components `e_i` and
    /// `e'_j` in the square.
    pub pair: Option<(usize, usize)>,
    pub omega_certificate: Option<OmegaCertificate>,
}

/// Shortens a geodesic word `W ∉ 𝓗` that is not doubly Λ-reduced: returns a
/// terminal subword `U` and `W₁` with `W̄₁ = \overline{UWU⁻¹}`,
/// `||W₁|| < ||W||` and `||U|| < ||W||`. The conjugacy and both
/// inequalities are checked on the backend before returning.
pub fn shorten(w: &Word, b: &dyn GroupBackend) -> Result<ShorteningResult> {
    let p = b.presentation();
    if w.is_h_letter() {
        return Err(Error::precondition(p.format_word(w), "is a letter of H"));
    }
    if !b.is_geodesic(w)? {
        return Err(Error::NotGeodesic);
    }
    if is_doubly_lambda_reduced(w, b)? {
        return Err(Error::AlreadyDoublyReduced);
    }
    let n = w.len();
    let l = w.letters();
    let result = if !is_cyclically_reduced(w) {
        let u = w.subword(n - 1..n);
        let rotated = words::cyclic_shift(w, n - 1);
        ShorteningResult {
            u,
            w1: words::reduce(&rotated, p)?,
            case: ShorteningCase::NotCyclicallyReduced,
            pair: None,
            omega_certificate: None,
        }
    } else {
        let square = w.concat(w);
        let v = prefixes(&square, b)?;
        // connected pairs (e_i, e'_j), 1-based, with e_i ending at v_i and
        // e'_j starting at v_{n+j-1}
        let mut best: Option<(usize, usize, usize, ElementHandle)> = None;
        for i in 1..n {
            let Some(lambda) = l[i - 1].peripheral() else { continue };
            let vi = b.inverse(&v[i])?;
            for j in 2..=n {
                if l[j - 1].peripheral() != Some(lambda) {
                    continue;
                }
                let h = b.multiply(&vi, &v[n + j - 1])?;
                if !b.membership(&h, lambda)? {
                    continue;
                }
                let enclosed = n + j - 1 - i;
                if best.as_ref().is_none_or(|(len, bi, _, _)| (enclosed, i) < (*len, *bi)) {
                    best = Some((enclosed, i, j, h));
                }
            }
        }
        let (_, i, j, h) = best.ok_or_else(|| {
            Error::NotComputable("square is not Λ-reduced but no connected pair was found".into())
        })?;
        let lambda = l[i - 1].peripheral().unwrap();
        let mut w1 = Vec::new();
        if h != b.identity() {
            w1.push(connector_letter(&h, lambda, b)?);
        }
        let case = if i >= j {
            w1.extend_from_slice(&l[j - 1..i]);
            ShorteningCase::Forward
        } else {
            for k in (i + 1..j).rev() {
                w1.push(words::invert_letter(l[k - 1], p)?);
            }
            ShorteningCase::Backward
        };
        let u = w.subword(i..n);
        let cert = omega_certificate(&u, n, b)?;
        ShorteningResult {
            u,
            w1: words::reduce(&Word::from_letters(w1), p)?,
            case,
            pair: Some((i, j)),
            omega_certificate: cert,
        }
    };
    let lhs = b.evaluate(&result.w1)?;
    let u = b.evaluate(&result.u)?;
    let rhs = b.multiply(&b.multiply(&u, &b.evaluate(w)?)?, &b.inverse(&u)?)?;
    if lhs != rhs || result.w1.len() >= n || result.u.len() >= n || result.u.is_empty() {
        return Err(Error::NotComputable(format!(
            "shortening of `{}` failed its own check",
            p.format_word(w)
        )));
    }
    Ok(result)
}

/// The single `H_λ` letter for a nontrivial `h ∈ H_λ`.
fn connector_letter(h: &ElementHandle, lambda: usize, b: &dyn GroupBackend) -> Result<Letter> {
    let p = b.presentation();
    let per = p.peripheral(lambda);
    let elems = per.nontrivial_elements().ok_or_else(|| {
        Error::NotComputable(format!("peripheral `{}` is not finite", per.name))
    })?;
    for e in elems {
        let l = Letter::h(lambda, e);
        if b.letter(l)? == *h {
            return Ok(l);
        }
    }
    Err(Error::NotComputable("connector is not a peripheral element".into()))
}

fn x_omega_generators(b: &dyn GroupBackend, omega: &OmegaReport) -> Result<Vec<ElementHandle>> {
    let p = b.presentation();
    let mut gens = Vec::new();
    for x in 0..p.x_names().len() {
        gens.push(b.letter(Letter::x(x))?);
    }
    for l in omega.letters() {
        gens.push(b.letter(l)?);
    }
    Ok(gens)
}

fn omega_certificate(u: &Word, n: usize, b: &dyn GroupBackend) -> Result<Option<OmegaCertificate>> {
    let p = b.presentation();
    let (Some(c), Some(_)) = (p.constants(), b.elements()) else {
        return Ok(None);
    };
    let omega = extract_omega(p);
    let bound = (2 * omega.m as u64 * c.c.max(1) + 1) * n as u64;
    let gens = x_omega_generators(b, &omega)?;
    let Some(metric) = word_metric(&gens, b, METRIC_CAP)? else {
        return Ok(None);
    };
    let length = metric.get(&b.evaluate(u)?).copied();
    Ok(Some(OmegaCertificate {
        length,
        bound,
        holds: length.is_some_and(|d| d as u64 <= bound),
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShorteningStep {
    pub word: Word,
    pub result: ShorteningResult,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShorteningRun {
    pub steps: Vec<ShorteningStep>,
    /// Doubly Λ-reduced, or a single letter of `𝓗`.
    pub terminal: Word,
}

/// Applies [`shorten`] repeatedly, replacing each `W₁` by the geodesic word of
/// its element, until the word is doubly Λ-reduced or a letter of `𝓗`.
pub fn shorten_to_terminal(w: &Word, b: &dyn GroupBackend) -> Result<ShorteningRun> {
    let mut current = w.clone();
    let mut steps = Vec::new();
    loop {
        if current.is_h_letter() || is_doubly_lambda_reduced(&current, b)? {
            return Ok(ShorteningRun {
                steps,
                terminal: current,
            });
        }
        let result = shorten(&current, b)?;
        let next = b.geodesic_word(&b.evaluate(&result.w1)?)?;
        steps.push(ShorteningStep {
            word: current,
            result,
        });
        current = next;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaEstimateReport {
    pub order: u64,
    /// `|f|_{X∪Ω}`, or `None` when `f ∉ ⟨X ∪ Ω⟩`.
    pub element_length: Option<usize>,
    /// `(2MC+1)·||W||`
    pub element_bound: u64,
    /// `|Ū_i|_Ω` for each H-syllable, `None` when outside `⟨Ω⟩`.
    pub syllable_lengths: Vec<Option<usize>>,
    /// `2MC·||W||`
    pub syllable_bound: u64,
    pub element_holds: bool,
    pub syllables_hold: bool,
}

/// Measures both Ω-length estimates for a doubly Λ-reduced word of finite
/// order.
pub fn check_omega_estimates(w: &Word, b: &dyn GroupBackend, omega: &OmegaReport, c: u64) -> Result<OmegaEstimateReport> {
    if !is_doubly_lambda_reduced(w, b)? {
        return Err(Error::NotDoublyReduced);
    }
    let f = b.evaluate(w)?;
    let order = match b.order(&f)? {
        ElementOrder::Finite(k) => k,
        ElementOrder::Infinite => return Err(Error::InfiniteOrder),
        ElementOrder::Unknown => {
            return Err(Error::NotComputable("order of the element is unknown".into()));
        }
    };
    let c = c.max(1);
    let n = w.len() as u64;
    let m = omega.m as u64;
    let element_bound = (2 * m * c + 1) * n;
    let syllable_bound = 2 * m * c * n;

    let element_length = if f == b.identity() {
        Some(0)
    } else {
        let gens = x_omega_generators(b, omega)?;
        let metric = word_metric(&gens, b, METRIC_CAP)?
            .ok_or_else(|| Error::NotComputable("⟨X ∪ Ω⟩ is too large to measure".into()))?;
        metric.get(&f).copied()
    };

    let mut syllable_lengths = Vec::new();
    let omega_gens = omega
        .letters()
        .into_iter()
        .map(|l| b.letter(l))
        .collect::<Result<Vec<_>>>()?;
    let syllables: Vec<Letter> = w.letters().iter().copied().filter(Letter::is_h).collect();
    if !syllables.is_empty() {
        let metric = word_metric(&omega_gens, b, METRIC_CAP)?
            .ok_or_else(|| Error::NotComputable("⟨Ω⟩ is too large to measure".into()))?;
        for l in syllables {
            syllable_lengths.push(metric.get(&b.letter(l)?).copied());
        }
    }
    let element_holds = element_length.is_some_and(|d| d as u64 <= element_bound);
    let syllables_hold = syllable_lengths.iter().all(Option::is_some)
        && syllable_lengths.iter().map(|d| d.unwrap() as u64).sum::<u64>() <= syllable_bound;
    Ok(OmegaEstimateReport {
        order,
        element_length,
        element_bound,
        syllable_lengths,
        syllable_bound,
        element_holds,
        syllables_hold,
    })
}
