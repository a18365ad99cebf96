//! Bounded van Kampen fillings by uniform-cost rewriting search.
//!
//! A cycle word is rewritten to `ε` by inserting cyclic shifts of relators
//! `R^{±1}` (one 𝓡-cell each) and reducing in `F(X) ∗ (∗ H_λ)`. Every merge or
//! cancellation of two peripheral letters is one 𝓠-cell; free cancellation of
//! `x x⁻¹` costs nothing. States are cyclic words: cyclically reduced and
//! rotated to their least rotation.
//!
//! Move scripts are line records applied to the current word, positions
//! 0-based:
//!
//! * `S k`: rotate left by `k`
//! * `F i`: cancel the free pair at `i, i+1`
//! * `Q λ i`: multiply the `H_λ` letters at `i, i+1` (deleting a trivial product)
//! * `R j shift sign position`: insert the left rotation by `shift` of relator
//!   `j` (`sign` is `+` or `-` for its inverse) before letter `position`

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::backends::GroupBackend;
use crate::cayley;
use crate::error::{Error, Result};
use crate::presentation::{OmegaReport, PeripheralGroup, Presentation};
use crate::words::{self, cyclic_shift, Letter, ReductionStep, Word};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Rotate(usize),
    Free(usize),
    Merge { peripheral: usize, pos: usize },
    Insert {
        relator: usize,
        shift: usize,
        inverse: bool,
        position: usize,
    },
}

impl Move {
    pub fn render(&self, p: &Presentation) -> String {
        match self {
            Move::Rotate(k) => format!("S {k}"),
            Move::Free(i) => format!("F {i}"),
            Move::Merge { peripheral, pos } => format!("Q {} {pos}", p.peripheral(*peripheral).name),
            Move::Insert {
                relator,
                shift,
                inverse,
                position,
            } => format!("R {relator} {shift} {} {position}", if *inverse { '-' } else { '+' }),
        }
    }

    pub fn parse(line: &str, p: &Presentation) -> Result<Move> {
        let bad = || Error::InvalidScript(format!("cannot parse `{line}`"));
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let f: Vec<&str> = line.split_whitespace().collect();
        Ok(match f.as_slice() {
            ["S", k] => Move::Rotate(num(k)?),
            ["F", i] => Move::Free(num(i)?),
            ["Q", name, i] => Move::Merge {
                peripheral: p.peripheral_index(name).ok_or_else(bad)?,
                pos: num(i)?,
            },
            ["R", j, shift, sign, position] => Move::Insert {
                relator: num(j)?,
                shift: num(shift)?,
                inverse: match *sign {
                    "+" => false,
                    "-" => true,
                    _ => return Err(bad()),
                },
                position: num(position)?,
            },
            _ => return Err(bad()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cost {
    pub rel: usize,
    pub area: usize,
}

impl Cost {
    const ZERO: Cost = Cost { rel: 0, area: 0 };
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillingResult {
    /// 𝓡-cells plus 𝓠-cells of the derivation.
    pub area: usize,
    /// 𝓡-cells only.
    pub rel_area: usize,
    pub script: Vec<Move>,
    /// Every cheaper derivation within the length limit was explored.
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest total cell count explored.
    pub max_area: usize,
    /// Longest intermediate cyclic word; `None` means `||w|| + 2M`.
    pub max_length: Option<usize>,
    /// Largest number of distinct states stored.
    pub max_states: usize,
    /// Insert relators only where they touch a neighbouring letter.
    pub interacting_only: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_area: 64,
            max_length: None,
            max_states: 200_000,
            interacting_only: true,
        }
    }
}

fn interacts(a: &Letter, b: &Letter) -> bool {
    a.same_peripheral(b) || a.is_free_inverse_of(b)
}

/// Reduces `w` as a cyclic word, recording the moves and counting 𝓠-cells.
fn cyclic_reduce(w: &Word, p: &Presentation, moves: &mut Vec<Move>) -> Result<(Word, usize)> {
    let mut current = w.clone();
    let mut q = 0;
    loop {
        current = words::reduce_with(&current, p, |step| match step {
            ReductionStep::Free { pos } => moves.push(Move::Free(pos)),
            ReductionStep::Merge {
                peripheral, pos, ..
            } => {
                q += 1;
                moves.push(Move::Merge { peripheral, pos });
            }
        })?;
        let n = current.len();
        if n >= 2 && interacts(&current.last().unwrap(), &current.first().unwrap()) {
            moves.push(Move::Rotate(n - 1));
            current = cyclic_shift(&current, n - 1);
        } else {
            return Ok((current, q));
        }
    }
}

fn least_rotation(w: &Word) -> usize {
    (0..w.len().max(1))
        .min_by(|&a, &b| cyclic_shift(w, a).cmp(&cyclic_shift(w, b)))
        .unwrap_or(0)
}

/// Cyclic reduction followed by rotation to the least rotation.
fn canonicalize(w: &Word, p: &Presentation, moves: &mut Vec<Move>) -> Result<(Word, usize)> {
    let (reduced, q) = cyclic_reduce(w, p, moves)?;
    let k = least_rotation(&reduced);
    if k != 0 {
        moves.push(Move::Rotate(k));
    }
    Ok((cyclic_shift(&reduced, k), q))
}

struct Insertion {
    relator: usize,
    shift: usize,
    inverse: bool,
    word: Word,
}

fn insertions(p: &Presentation) -> Result<Vec<Insertion>> {
    let mut out: Vec<Insertion> = Vec::new();
    for (j, r) in p.relators().iter().enumerate() {
        for inverse in [false, true] {
            let base = if inverse { words::inverse(r, p)? } else { r.clone() };
            for shift in 0..base.len() {
                let word = cyclic_shift(&base, shift);
                if out.iter().any(|i| i.word == word) {
                    continue;
                }
                out.push(Insertion {
                    relator: j,
                    shift,
                    inverse,
                    word,
                });
            }
        }
    }
    Ok(out)
}

struct Node {
    cost: Cost,
    parent: Option<(Word, Vec<Move>)>,
}

/// The outcome of searching from one canonical state.
#[derive(Clone, Debug)]
struct Search {
    cost: Cost,
    moves: Vec<Move>,
    exact: bool,
}

/// Fills cycle words over one presentation and backend, caching searches by
/// canonical state.
pub struct Filler<'a> {
    backend: &'a dyn GroupBackend,
    budget: Budget,
    insertions: Vec<Insertion>,
    m: usize,
    cache: HashMap<(Word, usize), Search>,
}

impl<'a> Filler<'a> {
    pub fn new(backend: &'a dyn GroupBackend, budget: Budget) -> Result<Self> {
        let p = backend.presentation();
        Ok(Filler {
            backend,
            budget,
            insertions: insertions(p)?,
            m: p.relators().iter().map(Word::len).max().unwrap_or(0),
            cache: HashMap::new(),
        })
    }

    pub fn fill(&mut self, w: &Word) -> Result<FillingResult> {
        let p = self.backend.presentation();
        if !self.backend.is_trivial(w)? {
            return Err(Error::NotNullHomotopic);
        }
        let max_length = self.budget.max_length.unwrap_or(w.len() + 2 * self.m);
        let mut script = Vec::new();
        let (start, q0) = canonicalize(w, p, &mut script)?;
        let key = (start.clone(), max_length);
        let search = match self.cache.get(&key) {
            Some(s) => s.clone(),
            None => {
                let s = self.search(&start, max_length)?;
                self.cache.insert(key, s.clone());
                s
            }
        };
        script.extend(search.moves);
        Ok(FillingResult {
            area: search.cost.area + q0,
            rel_area: search.cost.rel,
            script,
            exact: search.exact,
        })
    }

    fn search(&self, start: &Word, max_length: usize) -> Result<Search> {
        let p = self.backend.presentation();
        let mut nodes: HashMap<Word, Node> = HashMap::new();
        nodes.insert(
            start.clone(),
            Node {
                cost: Cost::ZERO,
                parent: None,
            },
        );
        let mut heap = BinaryHeap::from([Reverse((Cost::ZERO, start.len(), start.clone()))]);
        let mut pruned: Option<Cost> = None;
        let mut note_pruned = |c: Cost| {
            if pruned.is_none_or(|old| c < old) {
                pruned = Some(c);
            }
        };
        let mut last_rel = 0;
        while let Some(Reverse((cost, _, word))) = heap.pop() {
            if nodes[&word].cost < cost {
                continue;
            }
            last_rel = cost.rel;
            if word.is_empty() {
                let mut moves = Vec::new();
                let mut cur = word;
                while let Some((parent, step)) = nodes[&cur].parent.clone() {
                    moves.splice(0..0, step);
                    cur = parent;
                }
                return Ok(Search {
                    cost,
                    moves,
                    exact: pruned.is_none_or(|c| c >= cost),
                });
            }
            let l = word.letters();
            let n = l.len();
            for ins in &self.insertions {
                let r = ins.word.letters();
                for pos in 0..n {
                    if self.budget.interacting_only {
                        let left = &l[(pos + n - 1) % n];
                        let right = &l[pos];
                        if !interacts(left, &r[0]) && !interacts(r.last().unwrap(), right) {
                            continue;
                        }
                    }
                    let mut moves = vec![Move::Insert {
                        relator: ins.relator,
                        shift: ins.shift,
                        inverse: ins.inverse,
                        position: pos,
                    }];
                    let mut joined = Vec::with_capacity(n + r.len());
                    joined.extend_from_slice(&l[..pos]);
                    joined.extend_from_slice(r);
                    joined.extend_from_slice(&l[pos..]);
                    let (next, q) = canonicalize(&Word::from_letters(joined), p, &mut moves)?;
                    let c = Cost {
                        rel: cost.rel + 1,
                        area: cost.area + 1 + q,
                    };
                    if next.len() > max_length {
                        continue;
                    }
                    if c.area > self.budget.max_area {
                        note_pruned(c);
                        continue;
                    }
                    let better = nodes.get(&next).is_none_or(|node| c < node.cost);
                    if !better {
                        continue;
                    }
                    if !nodes.contains_key(&next) && nodes.len() >= self.budget.max_states {
                        note_pruned(c);
                        continue;
                    }
                    heap.push(Reverse((c, next.len(), next.clone())));
                    nodes.insert(
                        next,
                        Node {
                            cost: c,
                            parent: Some((word.clone(), moves)),
                        },
                    );
                }
            }
        }
        Err(Error::BudgetExceeded {
            best: Some(last_rel),
        })
    }
}

/// Fills one cycle word; see [`Filler`].
pub fn fill(w: &Word, b: &dyn GroupBackend, budget: Budget) -> Result<FillingResult> {
    Filler::new(b, budget)?.fill(w)
}

/// Applies a move script to `w`, checking every record, and returns the
/// counted `(rel_area, area)` when the word reaches `ε`.
pub fn replay(w: &Word, script: &[Move], p: &Presentation) -> Result<(usize, usize)> {
    let mut cur: Vec<Letter> = w.letters().to_vec();
    let (mut rel, mut area) = (0, 0);
    for (k, mv) in script.iter().enumerate() {
        let bad = |why: &str| Error::InvalidScript(format!("record {k} (`{}`): {why}", mv.render(p)));
        match *mv {
            Move::Rotate(s) => {
                if s > cur.len() {
                    return Err(bad("rotation exceeds the word"));
                }
                cur.rotate_left(s);
            }
            Move::Free(i) => {
                if i + 1 >= cur.len() || !cur[i].is_free_inverse_of(&cur[i + 1]) {
                    return Err(bad("no free pair here"));
                }
                cur.drain(i..i + 2);
            }
            Move::Merge { peripheral, pos } => {
                let (Some(&a), Some(&b)) = (cur.get(pos), cur.get(pos + 1)) else {
                    return Err(bad("position out of range"));
                };
                match (a, b) {
                    (
                        Letter::H {
                            peripheral: pa,
                            element: ea,
                        },
                        Letter::H {
                            peripheral: pb,
                            element: eb,
                        },
                    ) if pa as usize == peripheral && pb as usize == peripheral => {
                        let per = p.peripheral(peripheral);
                        let c = per.multiply(ea, eb)?;
                        if c == per.identity() {
                            cur.drain(pos..pos + 2);
                        } else {
                            cur[pos] = Letter::h(peripheral, c);
                            cur.remove(pos + 1);
                        }
                    }
                    _ => return Err(bad("letters are not from this peripheral")),
                }
                area += 1;
            }
            Move::Insert {
                relator,
                shift,
                inverse,
                position,
            } => {
                let r = p.relators().get(relator).ok_or_else(|| bad("no such relator"))?;
                if position > cur.len() || shift >= r.len().max(1) {
                    return Err(bad("position or shift out of range"));
                }
                let base = if inverse { words::inverse(r, p)? } else { r.clone() };
                let ins = cyclic_shift(&base, shift);
                cur.splice(position..position, ins.letters().iter().copied());
                rel += 1;
                area += 1;
            }
        }
    }
    if !cur.is_empty() {
        return Err(Error::InvalidScript("script does not end at the empty word".into()));
    }
    Ok((rel, area))
}

pub fn render_script(script: &[Move], p: &Presentation) -> String {
    script.iter().map(|m| m.render(p) + "\n").collect()
}

pub fn parse_script(text: &str, p: &Presentation) -> Result<Vec<Move>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| Move::parse(l, p))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SandwichReport {
    pub rel_area: usize,
    pub area: usize,
    /// `(M+1)·rel_area + 2ℓ`
    pub upper: usize,
    pub holds: bool,
}

/// `Area^rel ≤ Area ≤ (M+1)·Area^rel + 2ℓ` for an exact filling.
pub fn verify_sandwich(w: &Word, f: &FillingResult, omega: &OmegaReport) -> Result<SandwichReport> {
    if !f.exact {
        return Err(Error::NotComputable("filling is not exact".into()));
    }
    let upper = (omega.m + 1) * f.rel_area + 2 * w.len();
    Ok(SandwichReport {
        rel_area: f.rel_area,
        area: f.area,
        upper,
        holds: f.rel_area <= f.area && f.area <= upper,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsolatedComponent {
    pub peripheral: String,
    /// Letter positions in the cycle, modulo its length.
    pub start: usize,
    pub end: usize,
    pub element: String,
    /// `|Lab_G(p_i)|_{Ω_λ}`
    pub omega_length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsolatedBoundReport {
    pub components: Vec<IsolatedComponent>,
    pub sum: usize,
    pub rel_area: usize,
    /// `M·rel_area`
    pub bound: usize,
    pub holds: bool,
}

/// Distances from the identity in a table peripheral over `gens^{±1}`.
pub(crate) fn peripheral_metric(p: &Presentation, lambda: usize, gens: &[u32]) -> Result<HashMap<u32, usize>> {
    let per = p.peripheral(lambda);
    let PeripheralGroup::Table(t) = &per.group else {
        return Err(Error::NotComputable(format!("peripheral `{}` is not finite", per.name)));
    };
    let mut all: Vec<u32> = gens.to_vec();
    all.extend(gens.iter().map(|&g| t.inverse(g)));
    let mut dist = HashMap::from([(t.identity(), 0usize)]);
    let mut queue = std::collections::VecDeque::from([t.identity()]);
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        for &g in &all {
            let y = t.multiply(x, g);
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(y) {
                e.insert(d + 1);
                queue.push_back(y);
            }
        }
    }
    Ok(dist)
}

/// Checks that every isolated component of the cycle has label in
/// `⟨Ω_λ⟩` and that the total `Ω`-length is at most `M·Area^rel`.
pub fn verify_isolated_bound(
    cycle: &Word,
    b: &dyn GroupBackend,
    omega: &OmegaReport,
    f: &FillingResult,
) -> Result<IsolatedBoundReport> {
    let p = b.presentation();
    if !f.exact {
        return Err(Error::NotComputable("filling is not exact".into()));
    }
    let path = cayley::trace(&b.identity(), cycle, b)?;
    if !path.closed {
        return Err(Error::NotNullHomotopic);
    }
    let rep = cayley::cyclic_components(&path, b)?;
    let n = cycle.len();
    let mut components = Vec::new();
    let mut metrics: HashMap<usize, HashMap<u32, usize>> = HashMap::new();
    for c in rep.components.iter().filter(|c| c.isolated) {
        let lambda = c.peripheral;
        let per = p.peripheral(lambda);
        let mut e = per.identity();
        for i in c.span.clone() {
            if let Letter::H { element, .. } = cycle.letters()[i % n] {
                e = per.multiply(e, element)?;
            }
        }
        if let std::collections::hash_map::Entry::Vacant(slot) = metrics.entry(lambda) {
            let gens: Vec<u32> = omega.per_peripheral[lambda].iter().copied().collect();
            slot.insert(peripheral_metric(p, lambda, &gens)?);
        }
        let name = if e == per.identity() {
            "1".to_string()
        } else {
            per.element_name(e)
        };
        let omega_length = *metrics[&lambda]
            .get(&e)
            .ok_or_else(|| Error::OmegaMembershipFails(format!("{}:{name}", per.name)))?;
        components.push(IsolatedComponent {
            peripheral: per.name.clone(),
            start: c.span.start,
            end: c.span.end,
            element: name,
            omega_length,
        });
    }
    let sum = components.iter().map(|c| c.omega_length).sum();
    let bound = omega.m * f.rel_area;
    Ok(IsolatedBoundReport {
        components,
        sum,
        rel_area: f.rel_area,
        bound,
        holds: sum <= bound,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DehnRow {
    pub length: usize,
    pub cycles: usize,
    pub max_area: usize,
    pub max_rel_area: usize,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DehnSample {
    pub n: usize,
    pub rows: Vec<DehnRow>,
    pub max_area: usize,
    pub max_rel_area: usize,
    /// Least integer `Ĉ` with `max_rel_area(k) ≤ Ĉ·k` for every `k ≤ n`.
    pub c_hat: usize,
    pub all_exact: bool,
}

impl fmt::Display for DehnSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "length cycles max_area max_rel_area")?;
        for r in &self.rows {
            writeln!(f, "{} {} {} {}", r.length, r.cycles, r.max_area, r.max_rel_area)?;
        }
        write!(f, "C_hat = {}", self.c_hat)
    }
}

/// Calls `visit` on every word of length `len` over `alphabet` that is trivial
/// on the backend, in lexicographic order.
pub fn for_each_null_homotopic(
    len: usize,
    alphabet: &[Letter],
    b: &dyn GroupBackend,
    visit: &mut dyn FnMut(&Word) -> Result<()>,
) -> Result<()> {
    fn go(
        prefix: &mut Vec<Letter>,
        value: &crate::backends::ElementHandle,
        len: usize,
        alphabet: &[Letter],
        b: &dyn GroupBackend,
        visit: &mut dyn FnMut(&Word) -> Result<()>,
    ) -> Result<()> {
        if prefix.len() == len {
            if *value == b.identity() {
                visit(&Word::from_letters(prefix.clone()))?;
            }
            return Ok(());
        }
        for &l in alphabet {
            let next = b.multiply(value, &b.letter(l)?)?;
            prefix.push(l);
            go(prefix, &next, len, alphabet, b, visit)?;
            prefix.pop();
        }
        Ok(())
    }
    go(&mut Vec::new(), &b.identity(), len, alphabet, b, visit)
}

/// Maximal areas over all null-homotopic cycle words of each length up to `n`.
pub fn dehn_sample(n: usize, b: &dyn GroupBackend, budget: Budget) -> Result<DehnSample> {
    let p = b.presentation();
    let alphabet = p.alphabet()?;
    if p.peripherals().iter().any(|per| !per.is_finite()) {
        return Err(Error::NotComputable("oracle peripherals have no finite letter set".into()));
    }
    let mut filler = Filler::new(b, budget)?;
    let mut rows = Vec::new();
    let mut all_exact = true;
    for k in 1..=n {
        let mut row = DehnRow {
            length: k,
            cycles: 0,
            max_area: 0,
            max_rel_area: 0,
            witness: None,
        };
        for_each_null_homotopic(k, &alphabet, b, &mut |w| {
            let f = filler.fill(w)?;
            all_exact &= f.exact;
            row.cycles += 1;
            row.max_area = row.max_area.max(f.area);
            if f.rel_area > row.max_rel_area || row.witness.is_none() {
                if f.rel_area > row.max_rel_area {
                    row.max_rel_area = f.rel_area;
                }
                row.witness = Some(p.format_word(w));
            }
            Ok(())
        })?;
        rows.push(row);
    }
    let max_area = rows.iter().map(|r| r.max_area).max().unwrap_or(0);
    let max_rel_area = rows.iter().map(|r| r.max_rel_area).max().unwrap_or(0);
    let c_hat = rows
        .iter()
        .map(|r| r.max_rel_area.div_ceil(r.length))
        .max()
        .unwrap_or(0);
    Ok(DehnSample {
        n,
        rows,
        max_area,
        max_rel_area,
        c_hat,
        all_exact,
    })
}

impl PartialOrd for FillingResult {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.rel_area, self.area).cmp(&(other.rel_area, other.area)))
    }
}
