use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::{Arc, OnceLock};

use serde::Deserialize;
use serde_json::Value;

use super::{ElementHandle, ElementOrder, GroupBackend, RelativeLength, SubgroupHandle};
use crate::error::{Error, Result};
use crate::presentation::{Presentation, TableGroup};
use crate::words::{Letter, Word};

/// An explicit finite group with images of `X` and embeddings of the
/// peripheral tables, as read from a model document.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteModel {
    pub elements: Vec<String>,
    pub identity: String,
    pub table: Vec<Vec<usize>>,
    pub x_images: BTreeMap<String, String>,
    #[serde(default)]
    pub peripheral_embeddings: BTreeMap<String, BTreeMap<String, String>>,
}

impl FiniteModel {
    pub fn from_value(v: &Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))
    }
}

pub struct FiniteBackend {
    presentation: Arc<Presentation>,
    group: TableGroup,
    x_images: Vec<u32>,
    /// Per peripheral, model index of each peripheral element index.
    embeddings: Vec<Vec<u32>>,
    /// Per peripheral, membership flags over model indices.
    members: Vec<Vec<bool>>,
    /// Letters sorted by their order, with images.
    letters: Vec<(Letter, u32)>,
    dist: Vec<usize>,
    subgroups: OnceLock<Vec<SubgroupHandle>>,
}

impl std::fmt::Debug for FiniteBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteBackend")
            .field("presentation", &self.presentation.name)
            .field("order", &self.group.order())
            .finish()
    }
}

impl FiniteBackend {
    pub fn new(presentation: Arc<Presentation>, model: &FiniteModel) -> Result<Self> {
        let p = presentation.as_ref();
        let group = TableGroup::new("model", model.elements.clone(), &model.identity, model.table.clone())?;
        let lookup = |name: &str| {
            group
                .index_of(name)
                .ok_or_else(|| Error::InvalidModel(format!("unknown model element `{name}`")))
        };

        for key in model.x_images.keys() {
            if !p.x_names().contains(key) {
                return Err(Error::InvalidModel(format!("image given for unknown generator `{key}`")));
            }
        }
        let x_images = p
            .x_names()
            .iter()
            .map(|x| {
                let img = model
                    .x_images
                    .get(x)
                    .ok_or_else(|| Error::InvalidModel(format!("no image for generator `{x}`")))?;
                lookup(img)
            })
            .collect::<Result<Vec<_>>>()?;

        for key in model.peripheral_embeddings.keys() {
            if p.peripheral_index(key).is_none() {
                return Err(Error::InvalidModel(format!("embedding given for unknown peripheral `{key}`")));
            }
        }
        let mut embeddings = Vec::with_capacity(p.rank());
        for per in p.peripherals() {
            let table = per.table().ok_or_else(|| {
                Error::InvalidModel(format!(
                    "peripheral `{}` is an oracle; finite models need finite-table peripherals",
                    per.name
                ))
            })?;
            let not_embedded = || Error::PeripheralNotEmbedded(per.name.clone());
            let given = model.peripheral_embeddings.get(&per.name).ok_or_else(not_embedded)?;
            let mut map = vec![u32::MAX; table.order()];
            map[table.identity() as usize] = group.identity();
            for (src, dst) in given {
                let s = table.index_of(src).ok_or_else(|| {
                    Error::InvalidModel(format!("`{}` has no element `{src}`", per.name))
                })?;
                let d = lookup(dst)?;
                if s == table.identity() && d != group.identity() {
                    return Err(not_embedded());
                }
                map[s as usize] = d;
            }
            if map.contains(&u32::MAX) {
                return Err(not_embedded());
            }
            let distinct: BTreeSet<_> = map.iter().collect();
            if distinct.len() != map.len() {
                return Err(not_embedded());
            }
            let n = table.order() as u32;
            for a in 0..n {
                for b in 0..n {
                    let lhs = map[table.multiply(a, b) as usize];
                    if lhs != group.multiply(map[a as usize], map[b as usize]) {
                        return Err(not_embedded());
                    }
                }
            }
            embeddings.push(map);
        }

        let members = embeddings
            .iter()
            .map(|map| {
                let mut flags = vec![false; group.order()];
                for &m in map {
                    flags[m as usize] = true;
                }
                flags
            })
            .collect();

        let mut letters: Vec<(Letter, u32)> = p
            .alphabet()?
            .into_iter()
            .map(|l| {
                let img = match l {
                    Letter::X { generator, inverse } => {
                        let g = x_images[generator as usize];
                        if inverse {
                            group.inverse(g)
                        } else {
                            g
                        }
                    }
                    Letter::H {
                        peripheral,
                        element,
                    } => embeddings[peripheral as usize][element as usize],
                };
                (l, img)
            })
            .collect();
        letters.sort();

        let mut dist = vec![usize::MAX; group.order()];
        dist[group.identity() as usize] = 0;
        let mut queue = VecDeque::from([group.identity()]);
        while let Some(v) = queue.pop_front() {
            for &(_, s) in &letters {
                let u = group.multiply(v, s);
                if dist[u as usize] == usize::MAX {
                    dist[u as usize] = dist[v as usize] + 1;
                    queue.push_back(u);
                }
            }
        }

        let backend = FiniteBackend {
            presentation,
            group,
            x_images,
            embeddings,
            members,
            letters,
            dist,
            subgroups: OnceLock::new(),
        };
        for (index, r) in backend.presentation.relators().iter().enumerate() {
            let g = backend.evaluate(r)?;
            if g != backend.identity() {
                return Err(Error::RelatorNotSatisfied {
                    index,
                    element: backend.describe(&g),
                });
            }
        }
        Ok(backend)
    }

    pub fn group_order(&self) -> usize {
        self.group.order()
    }

    fn idx(&self, g: &ElementHandle) -> u32 {
        match g {
            ElementHandle::Index(i) => *i,
            ElementHandle::Normal(_) => panic!("finite backend given a free-product handle"),
        }
    }

    /// The diameter of `Γ(G, X ⊔ 𝓗)`; infinite distances are reported as
    /// `usize::MAX` when `X ∪ 𝓗` does not generate.
    pub fn diameter(&self) -> usize {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    fn closure(&self, start: &BTreeSet<u32>) -> BTreeSet<u32> {
        let mut set = start.clone();
        set.insert(self.group.identity());
        let gens: Vec<u32> = start.iter().copied().collect();
        let mut queue: VecDeque<u32> = set.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.group.multiply(x, g);
                if set.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        set
    }

    fn compute_subgroups(&self) -> Vec<SubgroupHandle> {
        let n = self.group.order() as u32;
        let mut cyclic: Vec<BTreeSet<u32>> = (0..n)
            .map(|g| self.closure(&BTreeSet::from([g])))
            .collect();
        cyclic.sort();
        cyclic.dedup();
        let mut all: BTreeSet<BTreeSet<u32>> = cyclic.iter().cloned().collect();
        let mut frontier: Vec<BTreeSet<u32>> = all.iter().cloned().collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for a in &frontier {
                for c in &cyclic {
                    if c.is_subset(a) {
                        continue;
                    }
                    let join = self.closure(&a.union(c).copied().collect());
                    if all.insert(join.clone()) {
                        next.push(join);
                    }
                }
            }
            frontier = next;
        }
        all.into_iter()
            .map(|s| SubgroupHandle::from_elements(s.into_iter().map(ElementHandle::Index)))
            .collect()
    }
}

impl GroupBackend for FiniteBackend {
    fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    fn identity(&self) -> ElementHandle {
        ElementHandle::Index(self.group.identity())
    }

    fn letter(&self, l: Letter) -> Result<ElementHandle> {
        Ok(ElementHandle::Index(match l {
            Letter::X { generator, inverse } => {
                let g = self.x_images[generator as usize];
                if inverse {
                    self.group.inverse(g)
                } else {
                    g
                }
            }
            Letter::H {
                peripheral,
                element,
            } => self.embeddings[peripheral as usize][element as usize],
        }))
    }

    fn multiply(&self, a: &ElementHandle, b: &ElementHandle) -> Result<ElementHandle> {
        Ok(ElementHandle::Index(self.group.multiply(self.idx(a), self.idx(b))))
    }

    fn inverse(&self, a: &ElementHandle) -> Result<ElementHandle> {
        Ok(ElementHandle::Index(self.group.inverse(self.idx(a))))
    }

    fn membership(&self, g: &ElementHandle, lambda: usize) -> Result<bool> {
        Ok(self.members[lambda][self.idx(g) as usize])
    }

    fn relative_length(&self, g: &ElementHandle) -> Result<RelativeLength> {
        let d = self.dist[self.idx(g) as usize];
        if d == usize::MAX {
            return Err(Error::NotComputable(format!(
                "`{}` is not generated by X and the peripherals",
                self.describe(g)
            )));
        }
        Ok(RelativeLength {
            value: d,
            exact: true,
        })
    }

    fn geodesic_word(&self, g: &ElementHandle) -> Result<Word> {
        let mut rest = self.idx(g);
        if self.dist[rest as usize] == usize::MAX {
            return Err(Error::NotComputable(format!(
                "`{}` is not generated by X and the peripherals",
                self.describe(g)
            )));
        }
        let mut out = Vec::new();
        while rest != self.group.identity() {
            let d = self.dist[rest as usize];
            let &(l, s) = self
                .letters
                .iter()
                .find(|&&(_, s)| {
                    self.dist[self.group.multiply(self.group.inverse(s), rest) as usize] == d - 1
                })
                .expect("a BFS predecessor exists");
            out.push(l);
            rest = self.group.multiply(self.group.inverse(s), rest);
        }
        Ok(Word::from_letters(out))
    }

    fn ball(&self, radius: usize) -> Result<Vec<(ElementHandle, Word)>> {
        let mut out = Vec::new();
        for i in 0..self.group.order() as u32 {
            if self.dist[i as usize] <= radius {
                let h = ElementHandle::Index(i);
                let w = self.geodesic_word(&h)?;
                out.push((h, w));
            }
        }
        out.sort_by(|a, b| a.1.shortlex_cmp(&b.1));
        Ok(out)
    }

    fn elements(&self) -> Option<Vec<ElementHandle>> {
        Some((0..self.group.order() as u32).map(ElementHandle::Index).collect())
    }

    fn subgroups(&self) -> Option<Vec<SubgroupHandle>> {
        Some(self.subgroups.get_or_init(|| self.compute_subgroups()).clone())
    }

    fn order(&self, g: &ElementHandle) -> Result<ElementOrder> {
        let g = self.idx(g);
        let mut acc = g;
        let mut n = 1u64;
        while acc != self.group.identity() {
            acc = self.group.multiply(acc, g);
            n += 1;
        }
        Ok(ElementOrder::Finite(n))
    }

    fn describe(&self, g: &ElementHandle) -> String {
        self.group.names()[self.idx(g) as usize].clone()
    }
}

/// Order by iterating the raw table, independent of the backend.
#[cfg(test)]
pub(crate) fn table_order(table: &[Vec<usize>], identity: usize, g: usize) -> u64 {
    let mut acc = g;
    let mut n = 1;
    while acc != identity {
        acc = table[acc][g];
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::presentation::ModelRef;
    use crate::words::reduce;

    fn s3_model() -> FiniteModel {
        let p = bundled::s3();
        match p.model() {
            Some(ModelRef::Inline(v)) => FiniteModel::from_value(v).unwrap(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn s3_model_is_accepted() {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let rt = b.evaluate(&p.parse_word("H1:r t").unwrap()).unwrap();
        assert_eq!(b.relative_length(&rt).unwrap().value, 2);
        let w = b.geodesic_word(&rt).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(b.evaluate(&w).unwrap(), rt);
    }

    #[test]
    fn wrong_relator_image_is_rejected() {
        // send t to r: then "t t" evaluates to r.r
        let mut m = s3_model();
        m.x_images.insert("t".into(), "r".into());
        let err = FiniteBackend::new(Arc::new(bundled::s3()), &m).unwrap_err();
        assert!(matches!(err, Error::RelatorNotSatisfied { index: 0, .. }), "{err}");
    }

    #[test]
    fn non_injective_embedding_is_rejected() {
        let mut m = s3_model();
        m.peripheral_embeddings
            .get_mut("H1")
            .unwrap()
            .insert("r2".into(), "r".into());
        let err = FiniteBackend::new(Arc::new(bundled::s3()), &m).unwrap_err();
        assert!(matches!(err, Error::PeripheralNotEmbedded(_)), "{err}");
    }

    #[test]
    fn s3_has_six_subgroups() {
        let b = bundled::backend("s3");
        assert_eq!(b.subgroups().unwrap().len(), 6);
    }

    #[test]
    fn s4_has_thirty_subgroups() {
        let b = bundled::backend("s4cox");
        assert_eq!(b.subgroups().unwrap().len(), 30);
    }

    #[test]
    fn d4_has_ten_subgroups() {
        let b = bundled::backend("d4");
        assert_eq!(b.subgroups().unwrap().len(), 10);
    }

    #[test]
    fn orders_agree_with_table() {
        for name in bundled::FINITE_NAMES {
            let p = bundled::by_name(name).unwrap();
            let m = match p.model() {
                Some(ModelRef::Inline(v)) => FiniteModel::from_value(v).unwrap(),
                _ => unreachable!(),
            };
            let b = bundled::backend(name);
            let e = m.elements.iter().position(|x| *x == m.identity).unwrap();
            for (i, g) in b.elements().unwrap().iter().enumerate() {
                assert_eq!(
                    b.order(g).unwrap(),
                    ElementOrder::Finite(table_order(&m.table, e, i))
                );
            }
        }
    }

    #[test]
    fn lengths_satisfy_triangle_inequality_and_invariance() {
        for name in bundled::FINITE_NAMES {
            let b = bundled::backend(name);
            let els = b.elements().unwrap();
            let len = |g: &ElementHandle| b.relative_length(g).unwrap().value;
            let gens: Vec<_> = b
                .presentation()
                .alphabet()
                .unwrap()
                .into_iter()
                .map(|l| b.letter(l).unwrap())
                .collect();
            for g in &els {
                for h in &els {
                    assert!(len(&b.multiply(g, h).unwrap()) <= len(g) + len(h));
                }
                for s in &gens {
                    let d = len(&b.multiply(s, g).unwrap()) as isize - len(g) as isize;
                    assert!(d.abs() <= 1);
                }
                if *g != b.identity() {
                    assert!(len(g) > 0);
                }
            }
        }
    }

    #[test]
    fn geodesics_are_reduced_and_evaluate_correctly() {
        for name in bundled::FINITE_NAMES {
            let b = bundled::backend(name);
            let p = b.presentation();
            for (g, w) in b.ball(4).unwrap() {
                assert!(crate::words::is_reduced(&w));
                assert_eq!(reduce(&w, p).unwrap(), w);
                assert_eq!(b.evaluate(&w).unwrap(), g);
                assert_eq!(w.len(), b.relative_length(&g).unwrap().value);
            }
        }
    }
}
