use std::sync::Arc;

use super::{ElementHandle, ElementOrder, GroupBackend, RelativeLength, SubgroupHandle};
use crate::error::{Error, Result};
use crate::presentation::{Presentation, PeripheralGroup};
use crate::words::{self, cyclic_shift, Letter, Word};

/// Largest ball the backend will enumerate.
const BALL_CAP: usize = 2_000_000;

/// Powers tried before giving up on the order of an oracle peripheral element.
const ORACLE_ORDER_LIMIT: u64 = 10_000;

/// `F(X) ∗ (∗ H_λ)` with reduced words as normal forms.
pub struct FreeProductBackend {
    presentation: Arc<Presentation>,
}

impl std::fmt::Debug for FreeProductBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FreeProductBackend")
            .field("presentation", &self.presentation.name)
            .finish()
    }
}

impl FreeProductBackend {
    pub fn new(presentation: Arc<Presentation>) -> Result<Self> {
        if !presentation.relators().is_empty() {
            return Err(Error::RelatorsPresent);
        }
        for per in presentation.peripherals() {
            if let PeripheralGroup::Oracle(o) = &per.group {
                if !o.has_normal_form() {
                    return Err(Error::InvalidModel(format!(
                        "oracle peripheral `{}` has no normal form",
                        per.name
                    )));
                }
            }
        }
        Ok(FreeProductBackend { presentation })
    }

    fn word<'a>(&self, g: &'a ElementHandle) -> &'a Word {
        match g {
            ElementHandle::Normal(w) => w,
            ElementHandle::Index(_) => panic!("free-product backend given a finite handle"),
        }
    }

    /// A cyclically reduced conjugate of `g`.
    fn cyclic_core(&self, g: &ElementHandle) -> Result<Word> {
        let p = self.presentation.as_ref();
        let mut w = self.word(g).clone();
        while w.len() >= 2 {
            let (a, b) = (w.first().unwrap(), w.last().unwrap());
            if !a.same_peripheral(&b) && !b.is_free_inverse_of(&a) {
                break;
            }
            w = words::reduce(&cyclic_shift(&w, 1), p)?;
        }
        Ok(w)
    }
}

impl GroupBackend for FreeProductBackend {
    fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    fn identity(&self) -> ElementHandle {
        ElementHandle::Normal(Word::empty())
    }

    fn letter(&self, l: Letter) -> Result<ElementHandle> {
        Ok(ElementHandle::Normal(Word::from_letters(vec![l])))
    }

    fn multiply(&self, a: &ElementHandle, b: &ElementHandle) -> Result<ElementHandle> {
        let w = self.word(a).concat(self.word(b));
        Ok(ElementHandle::Normal(words::reduce(&w, &self.presentation)?))
    }

    fn inverse(&self, a: &ElementHandle) -> Result<ElementHandle> {
        Ok(ElementHandle::Normal(words::inverse(self.word(a), &self.presentation)?))
    }

    fn evaluate(&self, w: &Word) -> Result<ElementHandle> {
        Ok(ElementHandle::Normal(words::reduce(w, &self.presentation)?))
    }

    fn membership(&self, g: &ElementHandle, lambda: usize) -> Result<bool> {
        let w = self.word(g);
        Ok(w.is_empty() || (w.len() == 1 && w.letters()[0].peripheral() == Some(lambda)))
    }

    fn relative_length(&self, g: &ElementHandle) -> Result<RelativeLength> {
        Ok(RelativeLength {
            value: self.word(g).len(),
            exact: true,
        })
    }

    fn geodesic_word(&self, g: &ElementHandle) -> Result<Word> {
        Ok(self.word(g).clone())
    }

    fn ball(&self, radius: usize) -> Result<Vec<(ElementHandle, Word)>> {
        let p = self.presentation.as_ref();
        if p.peripherals().iter().any(|per| !per.is_finite()) {
            return Err(Error::BallUnavailable(radius));
        }
        let letters = p.alphabet()?;
        let mut out = vec![Word::empty()];
        let mut layer = vec![Word::empty()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &layer {
                for &l in &letters {
                    if let Some(last) = w.last() {
                        if last.same_peripheral(&l) || last.is_free_inverse_of(&l) {
                            continue;
                        }
                    }
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
            if out.len() + next.len() > BALL_CAP {
                return Err(Error::BallUnavailable(radius));
            }
            next.sort();
            out.extend(next.iter().cloned());
            layer = next;
        }
        Ok(out
            .into_iter()
            .map(|w| (ElementHandle::Normal(w.clone()), w))
            .collect())
    }

    fn elements(&self) -> Option<Vec<ElementHandle>> {
        None
    }

    fn subgroups(&self) -> Option<Vec<SubgroupHandle>> {
        None
    }

    fn order(&self, g: &ElementHandle) -> Result<ElementOrder> {
        let core = self.cyclic_core(g)?;
        match core.letters() {
            [] => Ok(ElementOrder::Finite(1)),
            [Letter::H {
                peripheral,
                element,
            }] => {
                let per = self.presentation.peripheral(*peripheral as usize);
                let mut acc = *element;
                let mut n = 1u64;
                while acc != per.identity() {
                    if n >= ORACLE_ORDER_LIMIT {
                        return Ok(ElementOrder::Unknown);
                    }
                    acc = per.multiply(acc, *element)?;
                    n += 1;
                }
                Ok(ElementOrder::Finite(n))
            }
            _ => Ok(ElementOrder::Infinite),
        }
    }

    fn describe(&self, g: &ElementHandle) -> String {
        let w = self.word(g);
        if w.is_empty() {
            "1".into()
        } else {
            self.presentation.format_word(w)
        }
    }
}
