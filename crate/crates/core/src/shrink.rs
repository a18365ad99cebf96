//! Shrinking sets of geodesic words by conjugation, special subsets and the
//! descent of a finite subgroup into a peripheral.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::backends::{conjugate_subgroup, ElementHandle, GroupBackend, SubgroupHandle};
use crate::bounds::{compute_k, order_bound, KReport};
use crate::error::{Error, Result};
use crate::filling::peripheral_metric;
use crate::presentation::{OmegaReport, Presentation};
use crate::reducedness::{is_doubly_lambda_reduced, is_lambda_reduced, shorten};
use crate::words::{self, is_cyclically_reduced, Letter, Word};

/// A finite set of words representing distinct elements of a target subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormedWordSet {
    words: Vec<Word>,
    target: SubgroupHandle,
}

impl NormedWordSet {
    /// Checks that the words evaluate injectively into `target`.
    pub fn new(words: impl IntoIterator<Item = Word>, target: SubgroupHandle, b: &dyn GroupBackend) -> Result<Self> {
        let mut words: Vec<Word> = words.into_iter().collect();
        words.sort_by(|a, c| a.shortlex_cmp(c));
        words.dedup();
        let p = b.presentation();
        let mut seen = HashSet::new();
        for w in &words {
            let g = b.evaluate(w)?;
            if !target.contains(&g) {
                return Err(Error::precondition(p.format_word(w), "does not represent an element of the target subgroup"));
            }
            if !seen.insert(g) {
                return Err(Error::precondition(p.format_word(w), "represents the same element as another word"));
            }
        }
        Ok(NormedWordSet { words, target })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn target(&self) -> &SubgroupHandle {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `𝒩(𝒮)`; `None` stands for `−∞` on the empty set.
    pub fn norm(&self) -> Option<usize> {
        self.words.iter().map(Word::len).max()
    }
}

fn norm_lt(a: Option<usize>, b: Option<usize>) -> bool {
    match (a, b) {
        (_, None) => false,
        (None, Some(_)) => true,
        (Some(x), Some(y)) => x < y,
    }
}

/// `K^e ≥ n`
fn k_power_at_least(k: &KReport, e: u64, n: u64) -> bool {
    k.power(e).cmp_u64(n) != Ordering::Less
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShrinkCase {
    /// `|𝒮| ≤ K^{𝒩(𝒮)}`: `U = ε`, `𝒮₁ = ∅`.
    EarlyOut,
    /// Bucketing the shortened words by the element of their terminal subword.
    Shortened,
    /// Conjugation by `V₊`.
    FirstEndpoint,
    /// Conjugation by `V₋⁻¹`.
    LastEndpoint,
    /// Neither endpoint cancels; `W_*W_*` is Λ-reduced.
    MixedReduced,
    /// Neither endpoint cancels; `W_*W_*` is not Λ-reduced.
    MixedUnreduced,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Guarantee {
    /// `𝒩(𝒮₁) < 𝒩(𝒮)`
    pub norm_dropped: bool,
    /// `||U|| < 𝒩(𝒮)`, checked by the cyclic lemma only.
    pub conjugator_short: Option<bool>,
    /// `|𝒮₁|` against the lemma's floor.
    pub cardinality_floor: bool,
    /// `log₂` of the floor; `−∞` when the floor is not positive.
    pub floor_log2: f64,
    /// `𝒮̄₁ ⊆ \overline{U𝒮U⁻¹}`, element by element on the backend.
    pub conjugation_verified: bool,
}

impl Guarantee {
    pub fn all_hold(&self) -> bool {
        self.norm_dropped && self.conjugator_short != Some(false) && self.cardinality_floor && self.conjugation_verified
    }
}

#[derive(Clone, Debug)]
pub struct ShrinkOutcome {
    pub u: Word,
    pub s1: NormedWordSet,
    pub case: ShrinkCase,
    pub guarantee: Guarantee,
    /// `|Q|_Ω` (or `|P|_Ω`) against `4MC·𝒩(𝒮)` in the mixed cases, per word.
    pub omega_checks: Vec<OmegaCheck>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaCheck {
    pub word: String,
    pub length: Option<usize>,
    pub bound: u64,
    pub holds: bool,
}

/// Verifies `𝒮̄₁ ⊆ \overline{U𝒮U⁻¹}` and builds the shrunk set.
fn conjugated_set(
    s: &NormedWordSet,
    u: &Word,
    s1_words: Vec<Word>,
    b: &dyn GroupBackend,
) -> Result<(NormedWordSet, bool)> {
    let ug = b.evaluate(u)?;
    let conj: HashSet<ElementHandle> = s
        .words
        .iter()
        .map(|w| b.multiply(&b.multiply(&ug, &b.evaluate(w)?)?, &b.inverse(&ug)?))
        .collect::<Result<_>>()?;
    let mut ok = true;
    for w in &s1_words {
        ok &= conj.contains(&b.evaluate(w)?);
    }
    let target = conjugate_subgroup(&s.target, &ug, b)?;
    Ok((NormedWordSet::new(s1_words, target, b)?, ok))
}

fn check_precondition(cond: bool, w: &Word, p: &Presentation, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::precondition(p.format_word(w), what))
    }
}

/// The shrinking lemma for geodesic cyclically reduced words. With `force`
/// the construction runs even when `|𝒮| ≤ K^{𝒩(𝒮)}` would allow the early
/// exit.
pub fn shrink_cyclic(
    s: &NormedWordSet,
    b: &dyn GroupBackend,
    omega: &OmegaReport,
    c: u64,
    force: bool,
) -> Result<ShrinkOutcome> {
    let p = b.presentation();
    if s.is_empty() || s.words.iter().all(Word::is_empty) {
        return Err(Error::precondition(
            format!("{{{}}}", s.words.iter().map(|w| p.format_word(w)).collect::<Vec<_>>().join(", ")),
            "the set must be nonempty and different from {ε}",
        ));
    }
    for w in &s.words {
        check_precondition(b.is_geodesic(w)?, w, p, "is not geodesic")?;
        check_precondition(is_cyclically_reduced(w), w, p, "is not cyclically reduced")?;
    }
    let k = compute_k(p, omega, c)?;
    let n = s.norm().unwrap();
    let size = s.len() as u64;

    let (u, s1_words, case) = if !force && k_power_at_least(&k, n as u64, size) {
        (Word::empty(), Vec::new(), ShrinkCase::EarlyOut)
    } else {
        // bucket key: element of T_W
        let mut buckets: BTreeMap<Word, Vec<(Word, Word)>> = BTreeMap::new();
        for w in &s.words {
            if is_doubly_lambda_reduced(w, b)? {
                continue;
            }
            let r = shorten(w, b)?;
            let key = b.geodesic_word(&b.evaluate(&r.u)?)?;
            buckets.entry(key).or_default().push((r.u, r.w1));
        }
        let best = buckets
            .iter()
            .max_by(|(ka, va), (kb, vb)| va.len().cmp(&vb.len()).then_with(|| kb.shortlex_cmp(ka)));
        match best {
            None => (Word::empty(), Vec::new(), ShrinkCase::Shortened),
            Some((_, members)) => (
                members[0].0.clone(),
                members.iter().map(|(_, w1)| w1.clone()).collect(),
                ShrinkCase::Shortened,
            ),
        }
    };
    let (s1, conjugation_verified) = conjugated_set(s, &u, s1_words, b)?;
    // |𝒮₁| ≥ |𝒮|/K^N − 1  ⇔  K^N·(|𝒮₁|+1) ≥ |𝒮|
    let cardinality_floor = k_power_at_least(&k, n as u64, size.div_ceil(s1.len() as u64 + 1));
    let floor = size as f64 / k.power(n as u64).log2_pre_factorial().exp2() - 1.0;
    Ok(ShrinkOutcome {
        guarantee: Guarantee {
            norm_dropped: norm_lt(s1.norm(), s.norm()),
            conjugator_short: Some(u.len() < n),
            cardinality_floor,
            floor_log2: floor.log2(),
            conjugation_verified,
        },
        u,
        s1,
        case,
        omega_checks: Vec::new(),
    })
}

fn endpoint(l: Letter) -> (usize, u32) {
    match l {
        Letter::H { peripheral, element } => (peripheral as usize, element),
        Letter::X { .. } => unreachable!("endpoints are checked to be peripheral letters"),
    }
}

/// The shrinking lemma for geodesic words of length at least 3 whose first
/// and last letters lie in `H_i`.
pub fn shrink_peripheral_endpoints(
    s: &NormedWordSet,
    i: usize,
    b: &dyn GroupBackend,
    omega: &OmegaReport,
    c: u64,
) -> Result<ShrinkOutcome> {
    let p = b.presentation();
    if s.is_empty() {
        return Err(Error::precondition("{}", "the set must be nonempty"));
    }
    if i >= p.rank() {
        return Err(Error::precondition(format!("H{}", i + 1), "no such peripheral"));
    }
    for w in &s.words {
        check_precondition(b.is_geodesic(w)?, w, p, "is not geodesic")?;
        check_precondition(w.len() >= 3, w, p, "has length below 3")?;
        let ends = [w.first().unwrap(), w.last().unwrap()];
        check_precondition(
            ends.iter().all(|l| l.peripheral() == Some(i)),
            w,
            p,
            &format!("does not start and end with letters of {}", p.peripheral(i).name),
        )?;
    }
    let per = p.peripheral(i);
    let k = compute_k(p, omega, c)?;
    let n = s.norm().unwrap();
    let size = s.len();
    // pivot: shortest word, ties by shortlex (the set is kept in that order)
    let v = s.words.iter().min_by_key(|w| w.len()).unwrap().clone();
    let (_, v_minus) = endpoint(v.first().unwrap());
    let (_, v_plus) = endpoint(v.last().unwrap());
    let id = per.identity();
    let mut a1 = Vec::new();
    let mut a2 = Vec::new();
    let mut a3 = Vec::new();
    for w in &s.words {
        let (_, w_minus) = endpoint(w.first().unwrap());
        let (_, w_plus) = endpoint(w.last().unwrap());
        let first = per.multiply(v_plus, w_minus)? == id;
        let last = per.multiply(w_plus, v_minus)? == id;
        if first {
            a1.push(w.clone());
        }
        if last {
            a2.push(w.clone());
        }
        if !first && !last {
            a3.push(w.clone());
        }
    }
    let conj_by = |u: &Word, ws: &[Word]| -> Result<Vec<Word>> {
        let ui = words::inverse(u, p)?;
        ws.iter().map(|w| words::reduce(&u.concat(w).concat(&ui), p)).collect()
    };
    let mut omega_checks = Vec::new();
    let (u, s1_words, case) = if 4 * a1.len() >= size {
        let u = Word::from_letters(vec![Letter::h(i, v_plus)]);
        let s1 = conj_by(&u, &a1)?;
        (u, s1, ShrinkCase::FirstEndpoint)
    } else if 4 * a2.len() >= size {
        let u = Word::from_letters(vec![Letter::h(i, per.inverse(v_minus)?)]);
        let s1 = conj_by(&u, &a2)?;
        (u, s1, ShrinkCase::LastEndpoint)
    } else {
        let vp = Word::from_letters(vec![Letter::h(i, v_plus)]);
        let vpi = words::inverse(&vp, p)?;
        let gens: Vec<u32> = omega.per_peripheral[i].iter().copied().collect();
        let metric = peripheral_metric(p, i, &gens).ok();
        let kin = &k.inputs;
        let bound = 4 * kin.m * kin.c * n as u64;
        let omega_len = |e: u32| metric.as_ref().and_then(|m| m.get(&e).copied());
        let mut reduced = Vec::new();
        let mut unreduced = Vec::new();
        for w in &a3 {
            let star = words::reduce(&vp.concat(w).concat(&v).concat(&vpi), p)?;
            check_precondition(is_cyclically_reduced(&star), &star, p, "W_* is not cyclically reduced")?;
            let (_, w_minus) = endpoint(w.first().unwrap());
            let (_, w_plus) = endpoint(w.last().unwrap());
            let q = per.multiply(w_plus, v_minus)?;
            let pp = per.multiply(v_plus, w_minus)?;
            let lambda_reduced = is_lambda_reduced(&star.concat(&star), b)?;
            let length = if lambda_reduced {
                omega_len(q)
            } else {
                [omega_len(pp), omega_len(q)].into_iter().flatten().min()
            };
            omega_checks.push(OmegaCheck {
                word: p.format_word(w),
                length,
                bound,
                holds: length.is_some_and(|l| l as u64 <= bound),
            });
            if lambda_reduced {
                reduced.push(w.clone());
            } else {
                unreduced.push(w.clone());
            }
        }
        let (pool, case) = if 2 * reduced.len() >= a3.len() {
            (reduced, ShrinkCase::MixedReduced)
        } else {
            (unreduced, ShrinkCase::MixedUnreduced)
        };
        let mut buckets: BTreeMap<Letter, Vec<Word>> = BTreeMap::new();
        for w in pool {
            buckets.entry(w.last().unwrap()).or_default().push(w);
        }
        let (letter, members) = buckets
            .into_iter()
            .max_by(|(la, va), (lb, vb)| va.len().cmp(&vb.len()).then_with(|| lb.cmp(la)))
            .expect("the mixed case has a nonempty pool");
        let u = Word::from_letters(vec![letter]);
        let s1 = conj_by(&u, &members)?;
        (u, s1, case)
    };
    let (s1, conjugation_verified) = conjugated_set(s, &u, s1_words, b)?;
    // |𝒮₁| ≥ |𝒮|/(4K^{2N})  ⇔  4·K^{2N}·|𝒮₁| ≥ |𝒮|
    let cardinality_floor = if s1.is_empty() {
        size == 0
    } else {
        k_power_at_least(&k, 2 * n as u64, (size as u64).div_ceil(4 * s1.len() as u64))
    };
    let floor_log2 = (size as f64).log2() - 2.0 - k.power(2 * n as u64).log2_pre_factorial();
    Ok(ShrinkOutcome {
        guarantee: Guarantee {
            norm_dropped: norm_lt(s1.norm(), s.norm()),
            conjugator_short: None,
            cardinality_floor,
            floor_log2,
            conjugation_verified,
        },
        u,
        s1,
        case,
        omega_checks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "index")]
pub enum SpecialTag {
    /// Geodesic and cyclically reduced (`i = 0`), or of length at least 3
    /// with both endpoints in `H_i`, peripherals numbered from 1.
    Special(usize),
    /// In the peripheral `H_j`, numbered from 1.
    MemberOf(usize),
    /// No geodesic word of the element fits any class.
    Uncovered,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialClass {
    pub tag: SpecialTag,
    pub elements: Vec<ElementHandle>,
    /// The representing geodesic word for each element.
    pub words: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecialPartition {
    pub classes: Vec<SpecialClass>,
    /// Index of the largest class, ties by tag order.
    pub chosen: Option<usize>,
    /// `|S|/(2m+1)`
    pub floor: f64,
}

impl SpecialPartition {
    pub fn chosen_class(&self) -> Option<&SpecialClass> {
        self.chosen.map(|i| &self.classes[i])
    }

    pub fn meets_floor(&self) -> bool {
        self.chosen_class().map_or(self.floor <= 0.0, |c| c.elements.len() as f64 >= self.floor)
    }
}

fn special_tag(w: &Word, rank: usize) -> Option<SpecialTag> {
    if is_cyclically_reduced(w) {
        return Some(SpecialTag::Special(0));
    }
    if w.len() >= 3 {
        let (a, z) = (w.first().unwrap().peripheral(), w.last().unwrap().peripheral());
        if let (Some(i), Some(j)) = (a, z) {
            if i == j && i < rank {
                return Some(SpecialTag::Special(i + 1));
            }
        }
    }
    None
}

/// All geodesic words for `g`, in shortlex order, up to `limit` of them.
pub fn geodesic_words(g: &ElementHandle, b: &dyn GroupBackend, limit: usize) -> Result<Vec<Word>> {
    let p = b.presentation();
    let alphabet = p.alphabet()?;
    let n = b.relative_length(g)?.value;
    let mut out = Vec::new();
    let mut stack: Vec<(Word, ElementHandle)> = vec![(Word::empty(), b.identity())];
    // depth-first in reverse so words come out in lexicographic order
    while let Some((w, at)) = stack.pop() {
        if w.len() == n {
            if at == *g {
                out.push(w);
                if out.len() >= limit {
                    break;
                }
            }
            continue;
        }
        let mut next = Vec::new();
        for &l in &alphabet {
            let y = b.multiply(&at, &b.letter(l)?)?;
            let rest = b.relative_length(&b.multiply(&b.inverse(&y)?, g)?)?.value;
            if rest + w.len() + 1 == n {
                let mut v = w.clone();
                v.push(l);
                next.push((v, y));
            }
        }
        stack.extend(next.into_iter().rev());
    }
    out.sort_by(|a, c| a.shortlex_cmp(c));
    Ok(out)
}

/// Tags every element by a class of the (2m+1)-cover and picks the largest.
pub fn partition_special(elements: &[ElementHandle], b: &dyn GroupBackend) -> Result<SpecialPartition> {
    let p = b.presentation();
    let rank = p.rank();
    let mut classes: BTreeMap<SpecialTag, SpecialClass> = BTreeMap::new();
    for g in elements {
        let w = b.geodesic_word(g)?;
        let (tag, word) = match special_tag(&w, rank) {
            Some(SpecialTag::Special(0)) => (SpecialTag::Special(0), w),
            _ => match b.parabolic_index(g)? {
                Some(j) => (SpecialTag::MemberOf(j + 1), w),
                None => match special_tag(&w, rank) {
                    Some(t) => (t, w),
                    None => geodesic_words(g, b, 4096)?
                        .into_iter()
                        .find_map(|v| special_tag(&v, rank).map(|t| (t, v)))
                        .unwrap_or((SpecialTag::Uncovered, w)),
                },
            },
        };
        let class = classes.entry(tag).or_insert_with(|| SpecialClass {
            tag,
            elements: Vec::new(),
            words: Vec::new(),
        });
        class.elements.push(g.clone());
        class.words.push(word);
    }
    let classes: Vec<SpecialClass> = classes.into_values().collect();
    let chosen = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.tag != SpecialTag::Uncovered)
        .max_by(|(ia, a), (ib, c)| a.elements.len().cmp(&c.elements.len()).then_with(|| ib.cmp(ia)))
        .map(|(i, _)| i);
    Ok(SpecialPartition {
        classes,
        chosen,
        floor: elements.len() as f64 / (2 * rank + 1) as f64,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentStep {
    pub tag: SpecialTag,
    pub class_size: usize,
    pub norm: usize,
    pub cover_floor_holds: bool,
    /// `|A| ≥ 2K^{2𝒩(A)}`; the cardinality floor is vacuous otherwise.
    pub hypothesis_met: bool,
    pub case: ShrinkCase,
    pub conjugator: String,
    /// `|g| < 𝒩(A)`
    pub conjugator_short: bool,
    pub norm_dropped: bool,
    pub conjugation_verified: bool,
    /// `|A₁| ≥ |A|/(4K^{2𝒩(A)})`, reported only when the hypothesis holds.
    pub cardinality_floor: Option<bool>,
    pub next_size: usize,
}

impl DescentStep {
    pub fn holds(&self) -> bool {
        self.cover_floor_holds
            && self.conjugator_short
            && self.norm_dropped
            && self.conjugation_verified
            && self.cardinality_floor != Some(false)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexClaim {
    pub conjugator: String,
    pub conjugator_length: usize,
    /// `ℓ(ℓ−1)/2`
    pub length_bound: usize,
    pub peripheral: String,
    /// `|H^g : H^g ∩ H_j|`
    pub index: usize,
    /// `log₂ K^{ℓ²+2ℓ}`
    pub index_bound_log2: f64,
    /// Whether the descent supplied `g` and `j`, or the small-order case did.
    pub from_descent: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoreClaim {
    /// `|N|` for the normal core of `H^g ∩ H_j` in `H^g`.
    pub core_order: usize,
    /// `log₂ K^{ℓ²+1}`
    pub bound_log2: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentTrace {
    pub order: usize,
    /// `ℓ = 𝒩(H)`
    pub ell: usize,
    pub steps: Vec<DescentStep>,
    pub terminal: Option<SpecialTag>,
    pub index_claim: Option<IndexClaim>,
    pub core_claim: Option<CoreClaim>,
    /// `|H|` against the order bound with the certified constants.
    pub order_bound_holds: bool,
}

impl DescentTrace {
    pub fn holds(&self) -> bool {
        self.steps.iter().all(DescentStep::holds)
            && self.index_claim.as_ref().is_none_or(|c| c.holds)
            && self.core_claim.as_ref().is_none_or(|c| c.holds)
            && self.order_bound_holds
    }
}

fn subset_of_peripheral(elements: &[ElementHandle], b: &dyn GroupBackend) -> Result<Option<usize>> {
    for j in 0..b.presentation().rank() {
        let mut all = true;
        for g in elements {
            if !b.membership(g, j)? {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

/// Some `λ` and `x` with `xHx⁻¹ ⊆ H_λ`, searching every element.
pub fn parabolic_witness(h: &SubgroupHandle, b: &dyn GroupBackend) -> Result<Option<usize>> {
    let all = b
        .elements()
        .ok_or_else(|| Error::NotComputable("parabolicity needs a finite backend".into()))?;
    for x in &all {
        let conj = conjugate_subgroup(h, x, b)?;
        if let Some(j) = subset_of_peripheral(conj.elements(), b)? {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

fn intersection_with(h: &SubgroupHandle, j: usize, b: &dyn GroupBackend) -> Result<Vec<ElementHandle>> {
    let mut out = Vec::new();
    for g in h.elements() {
        if b.membership(g, j)? {
            out.push(g.clone());
        }
    }
    Ok(out)
}

/// Runs the descent of a finite non-parabolic subgroup and verifies both
/// claims on the finite backend. `delta` enters only the final order bound.
pub fn descend(
    h: &SubgroupHandle,
    b: &dyn GroupBackend,
    omega: &OmegaReport,
    c: u64,
    delta: u64,
) -> Result<DescentTrace> {
    let p = b.presentation();
    let order = h.order();
    let ob = order_bound(p, omega, c, delta, false)?;
    let order_bound_holds = ob.bound.cmp_u64(order as u64) != Ordering::Less;
    if h.is_trivial() {
        return Ok(DescentTrace {
            order,
            ell: 0,
            steps: Vec::new(),
            terminal: None,
            index_claim: None,
            core_claim: None,
            order_bound_holds,
        });
    }
    if let Some(j) = parabolic_witness(h, b)? {
        return Err(Error::ParabolicSubgroup(p.peripheral(j).name.clone()));
    }
    let k = compute_k(p, omega, c)?;
    let ell = crate::hyperbolicity::norm(h.elements(), b)?.unwrap_or(0);

    let mut g = b.identity();
    let mut current: Vec<ElementHandle> = h.elements().to_vec();
    let mut steps = Vec::new();
    let mut terminal = None;
    while !current.is_empty() {
        let part = partition_special(&current, b)?;
        let Some(class) = part.chosen_class() else { break };
        if let Some(j) = subset_of_peripheral(&class.elements, b)? {
            terminal = Some(SpecialTag::MemberOf(j + 1));
            break;
        }
        let SpecialTag::Special(i) = class.tag else {
            unreachable!("member classes lie in a peripheral")
        };
        let hg = conjugate_subgroup(h, &g, b)?;
        let set = NormedWordSet::new(class.words.clone(), hg, b)?;
        let n = set.norm().unwrap();
        let outcome = if i == 0 {
            shrink_cyclic(&set, b, omega, c, true)?
        } else {
            shrink_peripheral_endpoints(&set, i - 1, b, omega, c)?
        };
        let size = set.len() as u64;
        // |A| ≥ 2K^{2N} ⇔ K^{2N} ≤ ⌊|A|/2⌋
        let hypothesis_met = k.power(2 * n as u64).cmp_u64(size / 2) != Ordering::Greater;
        let s1 = &outcome.s1;
        let cardinality_floor = hypothesis_met.then(|| {
            !s1.is_empty() && k_power_at_least(&k, 2 * n as u64, size.div_ceil(4 * s1.len() as u64))
        });
        let ug = b.evaluate(&outcome.u)?;
        steps.push(DescentStep {
            tag: class.tag,
            class_size: class.elements.len(),
            norm: n,
            cover_floor_holds: part.meets_floor(),
            hypothesis_met,
            case: outcome.case,
            conjugator: p.format_word(&outcome.u),
            conjugator_short: b.relative_length(&ug)?.value < n,
            norm_dropped: outcome.guarantee.norm_dropped,
            conjugation_verified: outcome.guarantee.conjugation_verified,
            cardinality_floor,
            next_size: s1.len(),
        });
        g = b.multiply(&ug, &g)?;
        current = s1.words().iter().map(|w| b.evaluate(w)).collect::<Result<_>>()?;
        if steps.len() > ell + 1 {
            break;
        }
    }

    let ell64 = ell as u64;
    let index_bound = k.power(ell64 * ell64 + 2 * ell64);
    let claim_for = |g: &ElementHandle, j: usize, from_descent: bool| -> Result<IndexClaim> {
        let hg = conjugate_subgroup(h, g, b)?;
        let inter = intersection_with(&hg, j, b)?;
        let index = hg.order() / inter.len();
        let len = b.relative_length(g)?.value;
        let length_bound = ell * ell.saturating_sub(1) / 2;
        Ok(IndexClaim {
            conjugator: b.describe(g),
            conjugator_length: len,
            length_bound,
            peripheral: p.peripheral(j).name.clone(),
            index,
            index_bound_log2: index_bound.log2_pre_factorial(),
            from_descent,
            holds: len <= length_bound && index_bound.cmp_u64(index as u64) != Ordering::Less,
        })
    };
    let mut index_claim = match terminal {
        Some(SpecialTag::MemberOf(j)) => Some(claim_for(&g, j - 1, true)?),
        _ => None,
    };
    if index_claim.as_ref().is_none_or(|c| !c.holds) {
        // the small-order case: g = 1, j = 1
        let small = claim_for(&b.identity(), 0, false)?;
        if small.holds || index_claim.is_none() {
            index_claim = Some(small);
        }
    }
    let index_claim = index_claim.unwrap();

    let (cg, cj) = if index_claim.from_descent {
        (g.clone(), terminal.map_or(0, |t| if let SpecialTag::MemberOf(j) = t { j - 1 } else { 0 }))
    } else {
        (b.identity(), 0)
    };
    let hg = conjugate_subgroup(h, &cg, b)?;
    let inter = intersection_with(&hg, cj, b)?;
    let mut core: HashSet<ElementHandle> = inter.iter().cloned().collect();
    for x in hg.elements() {
        let xi = b.inverse(x)?;
        let conj: HashSet<ElementHandle> = inter
            .iter()
            .map(|y| b.multiply(&b.multiply(x, y)?, &xi))
            .collect::<Result<_>>()?;
        core.retain(|y| conj.contains(y));
    }
    let core_bound = k.power(ell64 * ell64 + 1);
    let core_claim = CoreClaim {
        core_order: core.len(),
        bound_log2: core_bound.log2_pre_factorial(),
        holds: core_bound.cmp_u64((core.len() as u64).saturating_sub(1)) != Ordering::Less,
    };
    Ok(DescentTrace {
        order,
        ell,
        steps,
        terminal,
        index_claim: Some(index_claim),
        core_claim: Some(core_claim),
        order_bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::presentation::extract_omega;

    fn whole(b: &dyn GroupBackend) -> SubgroupHandle {
        SubgroupHandle::from_elements(b.elements().unwrap())
    }

    #[test]
    fn singleton_early_out() {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let om = extract_omega(p);
        let t = p.parse_word("t").unwrap();
        let h = SubgroupHandle::from_elements([b.identity(), b.evaluate(&t).unwrap()]);
        let s = NormedWordSet::new([t], h.clone(), b.as_ref()).unwrap();
        let out = shrink_cyclic(&s, b.as_ref(), &om, 1, false).unwrap();
        assert_eq!(out.case, ShrinkCase::EarlyOut);
        assert!(out.u.is_empty() && out.s1.is_empty());
        assert!(out.guarantee.all_hold());

        let empty = NormedWordSet::new([], h, b.as_ref()).unwrap();
        assert!(matches!(
            shrink_cyclic(&empty, b.as_ref(), &om, 1, false),
            Err(Error::PreconditionViolated { .. })
        ));
    }

    #[test]
    fn bijective_representation_is_enforced() {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let ws = ["H1:r", "t t H1:r"].map(|w| p.parse_word(w).unwrap());
        assert!(NormedWordSet::new(ws, whole(b.as_ref()), b.as_ref()).is_err());
    }

    #[test]
    fn endpoint_lemma_rejects_short_words() {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let om = extract_omega(p);
        let s = NormedWordSet::new([p.parse_word("H1:r t").unwrap()], whole(b.as_ref()), b.as_ref()).unwrap();
        assert!(matches!(
            shrink_peripheral_endpoints(&s, 0, b.as_ref(), &om, 1),
            Err(Error::PreconditionViolated { .. })
        ));
    }

    #[test]
    fn partition_examples() {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let t = b.evaluate(&p.parse_word("t").unwrap()).unwrap();
        let part = partition_special(&[b.identity(), t], b.as_ref()).unwrap();
        let c = part.chosen_class().unwrap();
        assert_eq!(c.tag, SpecialTag::Special(0));
        assert_eq!(c.elements.len(), 2);
        assert!(part.meets_floor());

        let r = b.evaluate(&p.parse_word("H1:r").unwrap()).unwrap();
        let r2 = b.evaluate(&p.parse_word("H1:r2").unwrap()).unwrap();
        let part = partition_special(&[r, r2], b.as_ref()).unwrap();
        assert_eq!(part.chosen_class().unwrap().tag, SpecialTag::MemberOf(1));

        let part = partition_special(&[], b.as_ref()).unwrap();
        assert!(part.chosen.is_none() && part.meets_floor());
    }

    #[test]
    fn cover_floor_on_all_small_subsets() {
        for name in bundled::FINITE_NAMES {
            let b = bundled::backend(name);
            let els = b.elements().unwrap();
            let n = els.len().min(8);
            for mask in 0u32..(1 << n) {
                if mask.count_ones() > 6 {
                    continue;
                }
                let s: Vec<_> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| els[i].clone()).collect();
                let part = partition_special(&s, b.as_ref()).unwrap();
                assert!(part.meets_floor(), "{name} {mask:b}");
                assert!(part.classes.iter().all(|c| c.tag != SpecialTag::Uncovered), "{name}");
            }
        }
    }

    #[test]
    fn descent_on_small_subgroups() {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let om = extract_omega(p);
        let t = b.evaluate(&p.parse_word("t").unwrap()).unwrap();
        let h = SubgroupHandle::from_elements([b.identity(), t]);
        let tr = descend(&h, b.as_ref(), &om, 1, 1).unwrap();
        assert!(tr.holds(), "{tr:?}");
        assert_eq!(tr.ell, 1);

        let trivial = SubgroupHandle::from_elements([b.identity()]);
        let tr = descend(&trivial, b.as_ref(), &om, 1, 1).unwrap();
        assert_eq!(tr.ell, 0);
        assert!(tr.holds());

        let r = b.evaluate(&p.parse_word("H1:r").unwrap()).unwrap();
        let cyclic = crate::backends::generate_subgroup(&[r], b.as_ref(), 10).unwrap().unwrap();
        assert!(matches!(descend(&cyclic, b.as_ref(), &om, 1, 1), Err(Error::ParabolicSubgroup(_))));
    }

    #[test]
    fn geodesic_words_are_geodesic() {
        let b = bundled::backend("d4");
        for g in b.elements().unwrap() {
            let ws = geodesic_words(&g, b.as_ref(), 100).unwrap();
            assert!(!ws.is_empty());
            assert!(ws.contains(&b.geodesic_word(&g).unwrap()));
            for w in ws {
                assert_eq!(b.evaluate(&w).unwrap(), g);
                assert!(b.is_geodesic(&w).unwrap());
            }
        }
    }
}
