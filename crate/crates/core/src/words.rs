//! The free monoid over `X ⊔ X⁻¹ ⊔ 𝓗`: letters, words, syllables and reduction.
//!
//! A word is a plain sequence of letters. H-letters carry the index of their
//! peripheral and an element id inside that peripheral; the id is never the
//! peripheral identity. Everything that needs to multiply peripheral elements
//! takes the owning [`Presentation`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::Range;

use crate::error::Result;
use crate::presentation::Presentation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    /// `x` or `x⁻¹` for a generator of `X`.
    X { generator: u32, inverse: bool },
    /// A nontrivial element of the peripheral subgroup `H_λ`.
    H { peripheral: u32, element: u32 },
}

impl Letter {
    pub fn x(generator: usize) -> Self {
        Letter::X {
            generator: generator as u32,
            inverse: false,
        }
    }

    pub fn x_inv(generator: usize) -> Self {
        Letter::X {
            generator: generator as u32,
            inverse: true,
        }
    }

    pub fn h(peripheral: usize, element: u32) -> Self {
        Letter::H {
            peripheral: peripheral as u32,
            element,
        }
    }

    /// The peripheral index if this is an H-letter.
    pub fn peripheral(&self) -> Option<usize> {
        match *self {
            Letter::H { peripheral, .. } => Some(peripheral as usize),
            Letter::X { .. } => None,
        }
    }

    pub fn is_h(&self) -> bool {
        matches!(self, Letter::H { .. })
    }

    pub fn same_peripheral(&self, other: &Letter) -> bool {
        matches!((self.peripheral(), other.peripheral()), (Some(a), Some(b)) if a == b)
    }

    /// `x x⁻¹` pairs, which cancel freely.
    pub fn is_free_inverse_of(&self, other: &Letter) -> bool {
        match (*self, *other) {
            (
                Letter::X {
                    generator: a,
                    inverse: ia,
                },
                Letter::X {
                    generator: b,
                    inverse: ib,
                },
            ) => a == b && ia != ib,
            _ => false,
        }
    }
}

/// An element of `(𝓧 ⊔ 𝓗)*`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `W₋`
    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// `W₊`
    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn subword(&self, range: Range<usize>) -> Word {
        Word(self.0[range].to_vec())
    }

    pub fn power(&self, k: usize) -> Word {
        let mut v = Vec::with_capacity(self.len() * k);
        for _ in 0..k {
            v.extend_from_slice(&self.0);
        }
        Word(v)
    }

    /// True when the word is a single letter of `𝓗`.
    pub fn is_h_letter(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_h()
    }

    /// Shortlex order: length first, then letter order.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Letter;
    type IntoIter = std::slice::Iter<'a, Letter>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SyllableKind {
    X,
    H(usize),
}

/// A maximal run of `X`-letters or of letters from a single `H_λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syllable {
    pub kind: SyllableKind,
    pub span: Range<usize>,
}

pub fn syllables(w: &Word) -> Vec<Syllable> {
    let mut out: Vec<Syllable> = Vec::new();
    for (i, l) in w.letters().iter().enumerate() {
        let kind = match l.peripheral() {
            Some(p) => SyllableKind::H(p),
            None => SyllableKind::X,
        };
        match out.last_mut() {
            Some(s) if s.kind == kind => s.span.end = i + 1,
            _ => out.push(Syllable {
                kind,
                span: i..i + 1,
            }),
        }
    }
    out
}

/// One rewriting step performed by [`reduce_with`]. Positions refer to the
/// word as it stands when the step is taken: the letters at `pos` and
/// `pos + 1` interact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionStep {
    /// `x x⁻¹` cancelled.
    Free { pos: usize },
    /// Two letters of `H_λ` multiplied; `cancelled` when the product is 1.
    Merge {
        peripheral: usize,
        pos: usize,
        cancelled: bool,
    },
}

/// `U_red`: the unique reduced word equal to `w` in `F(X) ∗ (∗ H_λ)`.
pub fn reduce(w: &Word, p: &Presentation) -> Result<Word> {
    reduce_with(w, p, |_| {})
}

/// [`reduce`], reporting every cancellation and peripheral merge.
pub fn reduce_with(
    w: &Word,
    p: &Presentation,
    mut observe: impl FnMut(ReductionStep),
) -> Result<Word> {
    let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w.letters() {
        let Some(&top) = stack.last() else {
            stack.push(l);
            continue;
        };
        let pos = stack.len() - 1;
        if top.is_free_inverse_of(&l) {
            stack.pop();
            observe(ReductionStep::Free { pos });
        } else if let (
            Letter::H {
                peripheral: pa,
                element: a,
            },
            Letter::H {
                peripheral: pb,
                element: b,
            },
        ) = (top, l)
        {
            if pa != pb {
                stack.push(l);
                continue;
            }
            let per = p.peripheral(pa as usize);
            let c = per.multiply(a, b)?;
            let cancelled = c == per.identity();
            observe(ReductionStep::Merge {
                peripheral: pa as usize,
                pos,
                cancelled,
            });
            if cancelled {
                stack.pop();
            } else {
                *stack.last_mut().unwrap() = Letter::H {
                    peripheral: pa,
                    element: c,
                };
            }
        } else {
            stack.push(l);
        }
    }
    Ok(Word(stack))
}

/// No adjacent `x x⁻¹` and no adjacent letters from the same `H_λ`.
pub fn is_reduced(w: &Word) -> bool {
    w.letters()
        .windows(2)
        .all(|pair| !pair[0].is_free_inverse_of(&pair[1]) && !pair[0].same_peripheral(&pair[1]))
}

/// Reduced, and the last letter does not interact with the first one. A single
/// H-letter is never cyclically reduced.
pub fn is_cyclically_reduced(w: &Word) -> bool {
    if !is_reduced(w) {
        return false;
    }
    match (w.first(), w.last()) {
        (Some(a), Some(b)) => !a.same_peripheral(&b) && !b.is_free_inverse_of(&a),
        _ => true,
    }
}

pub fn invert_letter(l: Letter, p: &Presentation) -> Result<Letter> {
    Ok(match l {
        Letter::X { generator, inverse } => Letter::X {
            generator,
            inverse: !inverse,
        },
        Letter::H {
            peripheral,
            element,
        } => Letter::H {
            peripheral,
            element: p.peripheral(peripheral as usize).inverse(element)?,
        },
    })
}

/// The formal inverse `w_n⁻¹ … w_1⁻¹`.
pub fn inverse(w: &Word, p: &Presentation) -> Result<Word> {
    w.letters()
        .iter()
        .rev()
        .map(|&l| invert_letter(l, p))
        .collect::<Result<Vec<_>>>()
        .map(Word)
}

/// Rotation moving the first `k` letters to the end.
pub fn cyclic_shift(w: &Word, k: usize) -> Word {
    if w.is_empty() {
        return Word::empty();
    }
    let k = k % w.len();
    let mut v = Vec::with_capacity(w.len());
    v.extend_from_slice(&w.letters()[k..]);
    v.extend_from_slice(&w.letters()[..k]);
    Word(v)
}

/// Display adapter that renders a word with the presentation's names.
pub struct DisplayWord<'a> {
    pub word: &'a Word,
    pub presentation: &'a Presentation,
}

impl fmt::Display for DisplayWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.presentation.format_word(self.word))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn syllables_of_empty_and_mixed_words() {
        let p = bundled::dinf();
        assert!(syllables(&Word::empty()).is_empty());
        let s = syllables(&p.parse_word("H1:a H2:b").unwrap());
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].kind, SyllableKind::H(0));
        assert_eq!(s[1].kind, SyllableKind::H(1));
    }

    #[test]
    fn syllables_are_maximal() {
        let p = bundled::s3();
        let w = p.parse_word("t H1:r H1:r t").unwrap();
        let s = syllables(&w);
        assert_eq!(
            s,
            vec![
                Syllable {
                    kind: SyllableKind::X,
                    span: 0..1
                },
                Syllable {
                    kind: SyllableKind::H(0),
                    span: 1..3
                },
                Syllable {
                    kind: SyllableKind::X,
                    span: 3..4
                },
            ]
        );
    }

    #[test]
    fn reduce_examples() {
        let p = bundled::dinf();
        let w = p.parse_word("H1:a H1:a").unwrap();
        assert!(reduce(&w, &p).unwrap().is_empty());
        let w = p.parse_word("H1:a H2:b").unwrap();
        assert_eq!(reduce(&w, &p).unwrap(), w);

        let q = bundled::s3();
        let w = q.parse_word("t t^-1 H1:r").unwrap();
        assert_eq!(q.format_word(&reduce(&w, &q).unwrap()), "H1:r");
        let w = q.parse_word("H1:r H1:r").unwrap();
        assert_eq!(q.format_word(&reduce(&w, &q).unwrap()), "H1:r2");
    }

    #[test]
    fn reduce_cascades_through_cancellations() {
        let p = bundled::s3();
        let w = p.parse_word("H1:r t t^-1 H1:r2 t").unwrap();
        assert_eq!(p.format_word(&reduce(&w, &p).unwrap()), "t");
    }

    #[test]
    fn cyclic_reduction_examples() {
        let p = bundled::s3();
        let cr = |s: &str| is_cyclically_reduced(&p.parse_word(s).unwrap());
        assert!(cr("H1:r t"));
        assert!(!cr("H1:r t H1:r"));
        assert!(!cr("H1:r"));
        assert!(cr("t"));
        assert!(cr(""));
        assert!(!cr("t H1:r t^-1"));
    }

    #[test]
    fn inverse_uses_table_inverse() {
        let p = bundled::s3();
        let w = p.parse_word("t H1:r").unwrap();
        assert_eq!(p.format_word(&inverse(&w, &p).unwrap()), "H1:r2 t^-1");
        assert!(inverse(&Word::empty(), &p).unwrap().is_empty());
    }

    #[test]
    fn cyclic_shift_examples() {
        let p = bundled::s3();
        let w = p.parse_word("H1:r t").unwrap();
        assert_eq!(p.format_word(&cyclic_shift(&w, 1)), "t H1:r");
        assert_eq!(cyclic_shift(&w, 0), w);
        assert_eq!(cyclic_shift(&w, 2), w);
    }
}
