//! Rips-condition probes on balls of the relative Cayley graph and the search
//! for conjugates of finite subgroups into small balls.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::backends::{conjugate_subgroup, ElementHandle, GroupBackend, SubgroupHandle};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaCertificate {
    pub radius: usize,
    /// Least δ making every probed triangle δ-slim on its vertices.
    pub delta_ball: usize,
    pub triangles: usize,
    /// Geodesic words of the three corners of a worst triangle.
    pub witness: Option<[String; 3]>,
}

/// All vertices on the chosen geodesic from `u` to `v`.
fn side(u: &ElementHandle, v: &ElementHandle, b: &dyn GroupBackend) -> Result<Vec<ElementHandle>> {
    let w = b.geodesic_word(&b.multiply(&b.inverse(u)?, v)?)?;
    let mut out = vec![u.clone()];
    for &l in &w {
        out.push(b.multiply(out.last().unwrap(), &b.letter(l)?)?);
    }
    Ok(out)
}

fn distance(a: &ElementHandle, c: &ElementHandle, b: &dyn GroupBackend) -> Result<usize> {
    let len = b.relative_length(&b.multiply(&b.inverse(a)?, c)?)?;
    if !len.exact {
        return Err(Error::NotComputable("relative length is not exact".into()));
    }
    Ok(len.value)
}

/// Worst distance from a vertex of `side` to the union of `others`.
fn slimness(
    side: &[ElementHandle],
    others: [&[ElementHandle]; 2],
    b: &dyn GroupBackend,
) -> Result<usize> {
    let mut worst = 0;
    for p in side {
        let mut best = usize::MAX;
        for q in others.iter().flat_map(|s| s.iter()) {
            best = best.min(distance(p, q, b)?);
            if best <= worst {
                break;
            }
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Probes every ordered triple of vertices in the ball of the given radius,
/// using one deterministic geodesic per ordered pair.
pub fn estimate_delta(b: &dyn GroupBackend, radius: usize) -> Result<DeltaCertificate> {
    let ball = b.ball(radius)?;
    let n = ball.len();
    let sides: Vec<Vec<Vec<ElementHandle>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| side(&ball[i].0, &ball[j].0, b))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let per_first: Vec<(usize, Option<(usize, usize, usize)>)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut best = (0, None);
            for y in 0..n {
                for z in 0..n {
                    let (a, c, d) = (&sides[x][y], &sides[y][z], &sides[z][x]);
                    let need = slimness(a, [c, d], b)?
                        .max(slimness(c, [a, d], b)?)
                        .max(slimness(d, [a, c], b)?);
                    if need > best.0 || best.1.is_none() {
                        best = (need, Some((x, y, z)));
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let (delta_ball, worst) = per_first
        .into_iter()
        .fold((0, None), |acc, (d, t)| if d > acc.0 || acc.1.is_none() { (d, t) } else { acc });
    let p = b.presentation();
    let name = |i: usize| {
        let w = &ball[i].1;
        if w.is_empty() {
            "1".to_string()
        } else {
            p.format_word(w)
        }
    };
    Ok(DeltaCertificate {
        radius,
        delta_ball,
        triangles: n * n * n,
        witness: worst.map(|(x, y, z)| [name(x), name(y), name(z)]),
    })
}

/// `𝒩(A)`: the largest relative length of an element of `A`.
pub fn norm(elements: &[ElementHandle], b: &dyn GroupBackend) -> Result<Option<usize>> {
    let mut best = None;
    for g in elements {
        let l = b.relative_length(g)?.value;
        best = Some(best.map_or(l, |m: usize| m.max(l)));
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjugation {
    pub conjugator: ElementHandle,
    /// `𝒩(g⁻¹Hg)`
    pub norm: usize,
    pub radius: usize,
}

/// Finds `g` with every element of `g⁻¹Hg` of relative length at most
/// `4δ+1`. Candidates are all elements on finite backends and otherwise the
/// ball of radius `𝒩(H) + 4δ+1`, in increasing relative length.
pub fn conjugate_into_ball(
    h: &SubgroupHandle,
    b: &dyn GroupBackend,
    delta: usize,
) -> Result<Conjugation> {
    let radius = 4 * delta.max(1) + 1;
    let candidates: Vec<ElementHandle> = match b.elements() {
        Some(all) => {
            let mut keyed: Vec<(usize, ElementHandle)> = all
                .into_iter()
                .map(|g| Ok((b.relative_length(&g)?.value, g)))
                .collect::<Result<_>>()?;
            keyed.sort();
            keyed.into_iter().map(|(_, g)| g).collect()
        }
        None => {
            let r = norm(h.elements(), b)?.unwrap_or(0) + radius;
            b.ball(r).map_err(|_| {
                Error::NotFound(format!("search radius {r} exceeds what the backend can enumerate"))
            })?
            .into_iter()
            .map(|(g, _)| g)
            .collect()
        }
    };
    let mut lengths: HashMap<ElementHandle, usize> = HashMap::new();
    for g in candidates {
        let conj = conjugate_subgroup(h, &b.inverse(&g)?, b)?;
        let mut worst = 0;
        for x in conj.elements() {
            let l = match lengths.get(x) {
                Some(&l) => l,
                None => {
                    let l = b.relative_length(x)?.value;
                    lengths.insert(x.clone(), l);
                    l
                }
            };
            worst = worst.max(l);
            if worst > radius {
                break;
            }
        }
        if worst <= radius {
            return Ok(Conjugation {
                conjugator: g,
                norm: worst,
                radius,
            });
        }
    }
    Err(Error::NotFound(format!(
        "no conjugate within radius {radius}: either δ = {delta} is not valid for the whole graph or the search was too small"
    )))
}
