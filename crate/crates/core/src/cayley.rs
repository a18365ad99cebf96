//! Paths in `Γ(G, X ⊔ 𝓗)`, their H-components, connectors and isolation.

use std::fmt::Write as _;
use std::ops::Range;

use serde::Serialize;

use crate::backends::{ElementHandle, GroupBackend};
use crate::error::Result;
use crate::words::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathInGraph {
    pub label: Word,
    /// `vertices[i]` is the base times the first `i` letters.
    pub vertices: Vec<ElementHandle>,
    pub closed: bool,
}

impl PathInGraph {
    pub fn start(&self) -> &ElementHandle {
        &self.vertices[0]
    }

    pub fn end(&self) -> &ElementHandle {
        self.vertices.last().unwrap()
    }
}

pub fn trace(base: &ElementHandle, w: &Word, b: &dyn GroupBackend) -> Result<PathInGraph> {
    let mut vertices = Vec::with_capacity(w.len() + 1);
    vertices.push(base.clone());
    for &l in w {
        let next = b.multiply(vertices.last().unwrap(), &b.letter(l)?)?;
        vertices.push(next);
    }
    let closed = vertices[0] == *vertices.last().unwrap();
    Ok(PathInGraph {
        label: w.clone(),
        vertices,
        closed,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Connection {
    /// Index of the other component in the report.
    pub other: usize,
    /// `u⁻¹v` for a connecting vertex pair, the identity when the two
    /// components share a vertex.
    pub connector: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub peripheral: usize,
    /// Letter positions. For a wrapped component of a cycle, `span.end` exceeds
    /// the label length and positions are taken modulo it.
    pub span: Range<usize>,
    pub isolated: bool,
    pub connections: Vec<Connection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub components: Vec<Component>,
}

impl ComponentReport {
    pub fn all_isolated(&self) -> bool {
        self.components.iter().all(|c| c.isolated)
    }
}

/// Components of the path read linearly: maximal runs of letters from one
/// `H_λ`.
pub fn components(path: &PathInGraph, b: &dyn GroupBackend) -> Result<ComponentReport> {
    let spans = runs(&path.label, false);
    classify(path, spans, b)
}

/// Components of a closed path read as a cycle: a run at the end and a run at
/// the start of the same `H_λ` form one component through the base vertex.
pub fn cyclic_components(path: &PathInGraph, b: &dyn GroupBackend) -> Result<ComponentReport> {
    let spans = runs(&path.label, path.closed);
    classify(path, spans, b)
}

fn runs(w: &Word, cyclic: bool) -> Vec<(usize, Range<usize>)> {
    let l = w.letters();
    let n = l.len();
    let mut out: Vec<(usize, Range<usize>)> = Vec::new();
    let mut i = 0;
    while i < n {
        match l[i].peripheral() {
            None => i += 1,
            Some(lambda) => {
                let start = i;
                while i < n && l[i].peripheral() == Some(lambda) {
                    i += 1;
                }
                out.push((lambda, start..i));
            }
        }
    }
    if cyclic && out.len() >= 2 {
        let first = out[0].clone();
        let last = out.last().unwrap().clone();
        if first.0 == last.0 && first.1.start == 0 && last.1.end == n {
            out.pop();
            out[0] = (first.0, last.1.start..n + first.1.end);
        }
    }
    out
}

fn classify(
    path: &PathInGraph,
    spans: Vec<(usize, Range<usize>)>,
    b: &dyn GroupBackend,
) -> Result<ComponentReport> {
    let n = path.label.len();
    let vertex = |i: usize| -> &ElementHandle {
        if n == 0 {
            &path.vertices[0]
        } else if i > n {
            &path.vertices[i - n]
        } else {
            &path.vertices[i]
        }
    };
    let vertex_sets: Vec<Vec<ElementHandle>> = spans
        .iter()
        .map(|(_, span)| (span.start..=span.end).map(|i| vertex(i).clone()).collect())
        .collect();
    let inverses: Vec<Vec<ElementHandle>> = vertex_sets
        .iter()
        .map(|vs| vs.iter().map(|v| b.inverse(v)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut comps: Vec<Component> = spans
        .iter()
        .map(|(lambda, span)| Component {
            peripheral: *lambda,
            span: span.clone(),
            isolated: true,
            connections: Vec::new(),
        })
        .collect();
    for a in 0..spans.len() {
        for c in a + 1..spans.len() {
            let lambda = spans[a].0;
            if spans[c].0 != lambda {
                continue;
            }
            if let Some(conn) = connector(&inverses[a], &vertex_sets[c], lambda, b)? {
                let text = b.describe(&conn);
                comps[a].connections.push(Connection {
                    other: c,
                    connector: text.clone(),
                });
                comps[c].connections.push(Connection {
                    other: a,
                    connector: text,
                });
            }
        }
    }
    for c in &mut comps {
        c.isolated = c.connections.is_empty();
    }
    Ok(ComponentReport { components: comps })
}

fn connector(
    left_inverses: &[ElementHandle],
    right: &[ElementHandle],
    lambda: usize,
    b: &dyn GroupBackend,
) -> Result<Option<ElementHandle>> {
    let mut found = None;
    for ui in left_inverses {
        for v in right {
            let g = b.multiply(ui, v)?;
            if g == b.identity() {
                return Ok(Some(g));
            }
            if found.is_none() && b.membership(&g, lambda)? {
                found = Some(g);
            }
        }
    }
    Ok(found)
}

/// A geodesic word for `g`; see [`GroupBackend::geodesic_word`].
pub fn geodesic_word(g: &ElementHandle, b: &dyn GroupBackend) -> Result<Word> {
    b.geodesic_word(g)
}

const COLORS: [&str; 6] = ["red", "blue", "darkgreen", "orange", "purple", "brown"];

/// The ball of the given radius in DOT format: X-edges solid, peripheral
/// coset cliques dashed and colored per peripheral.
pub fn ball_dot(b: &dyn GroupBackend, radius: usize) -> Result<String> {
    let p = b.presentation();
    let ball = b.ball(radius)?;
    let index: std::collections::HashMap<&ElementHandle, usize> =
        ball.iter().enumerate().map(|(i, (g, _))| (g, i)).collect();
    let mut out = String::from("graph ball {\n");
    for (i, (g, _)) in ball.iter().enumerate() {
        writeln!(out, "  v{i} [label=\"{}\"];", b.describe(g).replace('"', "\\\"")).unwrap();
    }
    for (i, (g, _)) in ball.iter().enumerate() {
        for x in 0..p.x_names().len() {
            let h = b.multiply(g, &b.letter(Letter::x(x))?)?;
            if let Some(&j) = index.get(&h) {
                writeln!(out, "  v{i} -- v{j} [label=\"{}\"];", p.x_names()[x]).unwrap();
            }
        }
    }
    for lambda in 0..p.rank() {
        let color = COLORS[lambda % COLORS.len()];
        for i in 0..ball.len() {
            let gi = b.inverse(&ball[i].0)?;
            for j in i + 1..ball.len() {
                if b.membership(&b.multiply(&gi, &ball[j].0)?, lambda)? {
                    writeln!(
                        out,
                        "  v{i} -- v{j} [style=dashed, color={color}, label=\"{}\"];",
                        p.peripheral(lambda).name
                    )
                    .unwrap();
                }
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn trace_examples() {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let e = b.identity();
        let path = trace(&e, &Word::empty(), b.as_ref()).unwrap();
        assert_eq!(path.vertices.len(), 1);
        assert!(path.closed);
        let path = trace(&e, &p.parse_word("t t").unwrap(), b.as_ref()).unwrap();
        assert!(path.closed);
        assert_eq!(path.label.len(), 2);

        let d = bundled::backend("dinf");
        let q = d.presentation();
        let path = trace(&d.identity(), &q.parse_word("H1:a H2:b").unwrap(), d.as_ref()).unwrap();
        assert!(!path.closed);
        assert_eq!(d.describe(path.end()), "H1:a H2:b");
    }

    #[test]
    fn component_examples() {
        let d = bundled::backend("dinf");
        let q = d.presentation();
        let path = trace(&d.identity(), &q.parse_word("H1:a H2:b H1:a").unwrap(), d.as_ref()).unwrap();
        let rep = components(&path, d.as_ref()).unwrap();
        assert_eq!(rep.components.len(), 3);
        let h1: Vec<_> = rep.components.iter().filter(|c| c.peripheral == 0).collect();
        assert_eq!(h1.len(), 2);
        assert!(h1.iter().all(|c| c.isolated));

        let b = bundled::backend("s3");
        let p = b.presentation();
        let path = trace(&b.identity(), &p.parse_word("H1:r t t H1:r").unwrap(), b.as_ref()).unwrap();
        let rep = components(&path, b.as_ref()).unwrap();
        assert_eq!(rep.components.len(), 2);
        assert!(rep.components.iter().all(|c| !c.isolated));
        assert_eq!(rep.components[0].connections[0].connector, "1");

        let path = trace(&b.identity(), &p.parse_word("H1:r").unwrap(), b.as_ref()).unwrap();
        let rep = components(&path, b.as_ref()).unwrap();
        assert_eq!(rep.components.len(), 1);
        assert!(rep.components[0].isolated);
    }

    #[test]
    fn cyclic_components_merge_across_the_seam() {
        // r t r2 t ... closes up in S3 and the end and start runs are both H1
        let b = bundled::backend("s3");
        let p = b.presentation();
        let w = p.parse_word("H1:r t H1:r t").unwrap();
        let path = trace(&b.identity(), &w, b.as_ref()).unwrap();
        assert!(path.closed);
        let rep = cyclic_components(&path, b.as_ref()).unwrap();
        assert_eq!(rep.components.len(), 2);
        let w = p.parse_word("H1:r t t H1:r2").unwrap();
        let path = trace(&b.identity(), &w, b.as_ref()).unwrap();
        assert!(path.closed);
        let rep = cyclic_components(&path, b.as_ref()).unwrap();
        assert_eq!(rep.components.len(), 1);
        assert_eq!(rep.components[0].span, 3..5);
    }

    #[test]
    fn geodesic_word_examples() {
        let d = bundled::backend("dinf");
        let q = d.presentation();
        assert!(geodesic_word(&d.identity(), d.as_ref()).unwrap().is_empty());
        let ab = d.evaluate(&q.parse_word("H1:a H2:b").unwrap()).unwrap();
        assert_eq!(q.format_word(&geodesic_word(&ab, d.as_ref()).unwrap()), "H1:a H2:b");
    }

    #[test]
    fn dot_export_has_all_vertices() {
        let b = bundled::backend("s3");
        let dot = ball_dot(b.as_ref(), 2).unwrap();
        let vertices = dot.lines().filter(|l| l.contains("[label=") && !l.contains(" -- "));
        assert_eq!(vertices.count(), 6);
        assert!(dot.contains("style=dashed"));
    }
}
