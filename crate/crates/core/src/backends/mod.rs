//! Exact models of concrete groups carrying a relative presentation.
//!
//! A backend answers evaluation, triviality, peripheral membership and
//! relative length in `Γ(G, X ⊔ 𝓗)`. Two backends are provided: an explicit
//! finite group ([`FiniteBackend`]) and the free product `F(X) ∗ (∗ H_λ)` for
//! presentations without relators ([`FreeProductBackend`]).

mod finite;
mod free_product;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::presentation::{ModelRef, Presentation};
use crate::words::{Letter, Word};

pub use finite::{FiniteBackend, FiniteModel};
pub use free_product::FreeProductBackend;

/// A canonical form: equal handles denote equal elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementHandle {
    /// Index into a finite model's element list.
    Index(u32),
    /// Reduced word in `F(X) ∗ (∗ H_λ)`, which is its own normal form.
    Normal(Word),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelativeLength {
    pub value: usize,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementOrder {
    Finite(u64),
    Infinite,
    Unknown,
}

/// A finite subgroup as a sorted element list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubgroupHandle {
    elements: Vec<ElementHandle>,
}

impl SubgroupHandle {
    /// Trusts the caller that `elements` is closed under products.
    pub fn from_elements(elements: impl IntoIterator<Item = ElementHandle>) -> Self {
        let set: BTreeSet<_> = elements.into_iter().collect();
        SubgroupHandle {
            elements: set.into_iter().collect(),
        }
    }

    pub fn elements(&self) -> &[ElementHandle] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: &ElementHandle) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() <= 1
    }
}

pub trait GroupBackend: Send + Sync {
    fn presentation(&self) -> &Presentation;

    fn identity(&self) -> ElementHandle;

    fn letter(&self, l: Letter) -> Result<ElementHandle>;

    fn multiply(&self, a: &ElementHandle, b: &ElementHandle) -> Result<ElementHandle>;

    fn inverse(&self, a: &ElementHandle) -> Result<ElementHandle>;

    /// Whether `g ∈ H_λ`.
    fn membership(&self, g: &ElementHandle, lambda: usize) -> Result<bool>;

    /// `|g|_{X∪𝓗}`.
    fn relative_length(&self, g: &ElementHandle) -> Result<RelativeLength>;

    /// The lexicographically least geodesic word for `g`.
    fn geodesic_word(&self, g: &ElementHandle) -> Result<Word>;

    /// All elements of relative length at most `radius`, each with its
    /// geodesic word, ordered by length and then by word.
    fn ball(&self, radius: usize) -> Result<Vec<(ElementHandle, Word)>>;

    /// Every element, when the group is finite.
    fn elements(&self) -> Option<Vec<ElementHandle>>;

    /// Every subgroup, when the group is finite.
    fn subgroups(&self) -> Option<Vec<SubgroupHandle>>;

    fn order(&self, g: &ElementHandle) -> Result<ElementOrder>;

    /// Human-readable canonical form.
    fn describe(&self, g: &ElementHandle) -> String;

    fn evaluate(&self, w: &Word) -> Result<ElementHandle> {
        let mut acc = self.identity();
        for &l in w {
            acc = self.multiply(&acc, &self.letter(l)?)?;
        }
        Ok(acc)
    }

    fn is_trivial(&self, w: &Word) -> Result<bool> {
        Ok(self.evaluate(w)? == self.identity())
    }

    /// The peripheral containing `g`, if any; `None` for the identity too.
    fn parabolic_index(&self, g: &ElementHandle) -> Result<Option<usize>> {
        if *g == self.identity() {
            return Ok(None);
        }
        for lambda in 0..self.presentation().rank() {
            if self.membership(g, lambda)? {
                return Ok(Some(lambda));
            }
        }
        Ok(None)
    }

    fn is_geodesic(&self, w: &Word) -> Result<bool> {
        let len = self.relative_length(&self.evaluate(w)?)?;
        if !len.exact {
            return Err(Error::NotComputable("relative length is not exact".into()));
        }
        Ok(len.value == w.len())
    }
}

/// Picks the backend matching the presentation: a finite backend when a model
/// is attached, otherwise the free product when there are no relators.
pub fn backend_for(p: Arc<Presentation>) -> Result<Arc<dyn GroupBackend>> {
    match p.model() {
        Some(ModelRef::Inline(v)) => {
            let model = FiniteModel::from_value(v)?;
            Ok(Arc::new(FiniteBackend::new(p, &model)?))
        }
        Some(ModelRef::Path(path)) => Err(Error::ModelMissing(format!(
            "model `{path}` was not resolved; load the presentation from its file"
        ))),
        None if p.relators().is_empty() => Ok(Arc::new(FreeProductBackend::new(p)?)),
        None => Err(Error::ModelMissing(
            "the presentation has relators and no finite model".into(),
        )),
    }
}

/// `gHg⁻¹`
pub fn conjugate_subgroup(
    h: &SubgroupHandle,
    g: &ElementHandle,
    b: &dyn GroupBackend,
) -> Result<SubgroupHandle> {
    let gi = b.inverse(g)?;
    let conj = h
        .elements()
        .iter()
        .map(|x| b.multiply(&b.multiply(g, x)?, &gi))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubgroupHandle::from_elements(conj))
}

/// The subgroup generated by `gens`, or `None` when it has more than `cap`
/// elements.
pub fn generate_subgroup(
    gens: &[ElementHandle],
    b: &dyn GroupBackend,
    cap: usize,
) -> Result<Option<SubgroupHandle>> {
    let e = b.identity();
    let mut seen: HashSet<ElementHandle> = HashSet::from([e.clone()]);
    let mut queue = VecDeque::from([e]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = b.multiply(&x, g)?;
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return Ok(None);
                }
                queue.push_back(y);
            }
        }
    }
    Ok(Some(SubgroupHandle::from_elements(seen)))
}

/// Word-metric distances from the identity in the subgroup generated by
/// `gens` (closed under inverses here), exploring at most `cap` elements.
/// Returns `None` when the cap is hit.
pub fn word_metric(
    gens: &[ElementHandle],
    b: &dyn GroupBackend,
    cap: usize,
) -> Result<Option<HashMap<ElementHandle, usize>>> {
    let mut all = gens.to_vec();
    for g in gens {
        all.push(b.inverse(g)?);
    }
    all.sort();
    all.dedup();
    let e = b.identity();
    let mut dist = HashMap::from([(e.clone(), 0usize)]);
    let mut queue = VecDeque::from([e]);
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        for g in &all {
            let y = b.multiply(&x, g)?;
            if !dist.contains_key(&y) {
                if dist.len() >= cap {
                    return Ok(None);
                }
                dist.insert(y.clone(), d + 1);
                queue.push_back(y);
            }
        }
    }
    Ok(Some(dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn conjugate_subgroup_examples() {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let t = b.evaluate(&p.parse_word("t").unwrap()).unwrap();
        let r = b.evaluate(&p.parse_word("H1:r").unwrap()).unwrap();
        let ht = generate_subgroup(std::slice::from_ref(&t), b.as_ref(), 100)
            .unwrap()
            .unwrap();
        assert_eq!(conjugate_subgroup(&ht, &b.identity(), b.as_ref()).unwrap(), ht);
        let conj = conjugate_subgroup(&ht, &r, b.as_ref()).unwrap();
        assert_eq!(conj.order(), 2);
        assert_ne!(conj, ht);
        let back = conjugate_subgroup(&conj, &b.inverse(&r).unwrap(), b.as_ref()).unwrap();
        assert_eq!(back, ht);
    }

    #[test]
    fn generate_subgroup_respects_cap() {
        let b = bundled::backend("dinf");
        let p = b.presentation();
        let ab = b.evaluate(&p.parse_word("H1:a H2:b").unwrap()).unwrap();
        assert!(generate_subgroup(&[ab], b.as_ref(), 50).unwrap().is_none());
    }

    #[test]
    fn word_metric_in_s3() {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let r = b.evaluate(&p.parse_word("H1:r").unwrap()).unwrap();
        let d = word_metric(&[r], b.as_ref(), 100).unwrap().unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.values().max(), Some(&1));
    }
}
