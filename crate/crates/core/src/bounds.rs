//! The counting constant `K`, the finite-subgroup order bound and the
//! order algorithm that iterates powers of an element.

use std::cmp::Ordering;
use std::f64::consts::LOG2_E;

use num_bigint::BigUint;
use serde::Serialize;

use crate::backends::GroupBackend;
use crate::error::{Error, Result};
use crate::presentation::{OmegaReport, Presentation};
use crate::words::Word;

/// Exact values are materialized only below these sizes.
pub const EXACT_GATE_LOG2: f64 = 64.0;
pub const FACTORIAL_GATE: u64 = 1 << 20;

pub const DEFAULT_CAP: u64 = 1 << 20;

/// `base^exponent`, optionally followed by a factorial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundExpression {
    pub base: u64,
    pub exponent: u64,
    pub factorial: bool,
}

impl BoundExpression {
    pub fn power(base: u64, exponent: u64) -> Self {
        BoundExpression {
            base,
            exponent,
            factorial: false,
        }
    }

    /// `log₂(base^exponent)`
    pub fn log2_pre_factorial(&self) -> f64 {
        self.exponent as f64 * (self.base as f64).log2()
    }

    /// `base^exponent` when it is below `2⁶⁴`.
    pub fn pre_factorial_u64(&self) -> Option<u64> {
        if self.base <= 1 {
            return Some(if self.exponent == 0 { 1 } else { self.base });
        }
        let mut acc: u64 = 1;
        for _ in 0..self.exponent {
            acc = acc.checked_mul(self.base)?;
        }
        Some(acc)
    }

    /// The exact value, when under the materialization gate.
    pub fn exact(&self) -> Option<BigUint> {
        let n = self.pre_factorial_u64()?;
        if !self.factorial {
            return Some(BigUint::from(n));
        }
        if n >= FACTORIAL_GATE {
            return None;
        }
        Some((1..=n).fold(BigUint::from(1u32), |acc, k| acc * k))
    }

    /// Interval for `log₂ log₂` of the value, from `(N/e)^N ≤ N! ≤ N^N`.
    /// `None` without a factorial or when `N ≤ e`.
    pub fn factorial_log2_log2_interval(&self) -> Option<(f64, f64)> {
        if !self.factorial {
            return None;
        }
        let l = self.log2_pre_factorial();
        if l <= LOG2_E {
            return None;
        }
        Some((l + (l - LOG2_E).log2(), l + l.log2()))
    }

    /// Compares the value with `n` without materializing it.
    pub fn cmp_u64(&self, n: u64) -> Ordering {
        let Some(pre) = self.pre_factorial_u64() else {
            return Ordering::Greater;
        };
        if !self.factorial {
            return pre.cmp(&n);
        }
        // 21! exceeds u64::MAX
        if pre >= 21 {
            return Ordering::Greater;
        }
        (1..=pre).product::<u64>().cmp(&n)
    }

    pub fn summary(&self) -> BoundSummary {
        BoundSummary {
            base: self.base,
            exponent: self.exponent,
            factorial: self.factorial,
            exact: self.exact().map(|v| v.to_string()),
            log2_pre_factorial: self.log2_pre_factorial(),
            log2_log2_interval: self.factorial_log2_log2_interval().map(|(a, b)| [a, b]),
        }
    }
}

impl Serialize for BoundExpression {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.summary().serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSummary {
    pub base: u64,
    pub exponent: u64,
    pub factorial: bool,
    /// Decimal digits, when under the gate.
    pub exact: Option<String>,
    pub log2_pre_factorial: f64,
    pub log2_log2_interval: Option<[f64; 2]>,
}

/// Inputs after clamping, reported with every bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClampReport {
    /// `|X ∪ Ω|`
    pub alphabet: u64,
    pub m: u64,
    pub m_clamped: bool,
    pub c: u64,
    pub c_clamped: bool,
    pub delta: Option<u64>,
    pub delta_clamped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KReport {
    pub k: BoundExpression,
    pub inputs: ClampReport,
}

impl KReport {
    /// `K^e`
    pub fn power(&self, e: u64) -> BoundExpression {
        BoundExpression::power(self.k.base, self.k.exponent * e)
    }
}

fn alphabet_size(p: &Presentation, omega: &OmegaReport) -> u64 {
    (p.x_names().len() + omega.size()) as u64
}

/// `K = (2|X∪Ω|)^{2MC+1}` with `M ≥ 2` and `C ≥ 1` enforced.
pub fn compute_k(p: &Presentation, omega: &OmegaReport, c: u64) -> Result<KReport> {
    let alphabet = alphabet_size(p, omega);
    if alphabet == 0 {
        return Err(Error::NoFiniteNonparabolic);
    }
    let m = omega.m as u64;
    let inputs = ClampReport {
        alphabet,
        m: m.max(2),
        m_clamped: m < 2,
        c: c.max(1),
        c_clamped: c < 1,
        delta: None,
        delta_clamped: false,
    };
    Ok(KReport {
        k: BoundExpression::power(2 * alphabet, 2 * inputs.m * inputs.c + 1),
        inputs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundBranch {
    General,
    /// No peripheral letter occurs in any relator: the bound for hyperbolic
    /// groups over `X`.
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderBound {
    pub bound: BoundExpression,
    pub branch: BoundBranch,
    pub inputs: ClampReport,
}

/// Upper bound on the order of a finite non-parabolic subgroup.
pub fn order_bound(
    p: &Presentation,
    omega: &OmegaReport,
    c: u64,
    delta: u64,
    torsion_free_peripherals: bool,
) -> Result<OrderBound> {
    let d = delta.max(1);
    if omega.lambda0().is_empty() && !p.x_names().is_empty() {
        let x = p.x_names().len() as u64;
        return Ok(OrderBound {
            bound: BoundExpression::power(2 * x, 4 * d + 2),
            branch: BoundBranch::Hyperbolic,
            inputs: ClampReport {
                alphabet: x,
                m: omega.m as u64,
                m_clamped: false,
                c,
                c_clamped: false,
                delta: Some(d),
                delta_clamped: delta < 1,
            },
        });
    }
    let k = compute_k(p, omega, c)?;
    let s = 4 * d + 2;
    let mut inputs = k.inputs;
    inputs.delta = Some(d);
    inputs.delta_clamped = delta < 1;
    Ok(OrderBound {
        bound: BoundExpression {
            base: k.k.base,
            exponent: k.k.exponent * s * s,
            factorial: !torsion_free_peripherals,
        },
        branch: BoundBranch::General,
        inputs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderResult {
    Order(u64),
    CapExceeded { cap: u64, bound: BoundExpression },
    InfiniteCertified { bound: BoundExpression },
}

/// Iterates `W, W², …` until a trivial power, the cap, or the bound.
pub fn element_order(w: &Word, b: &dyn GroupBackend, bound: &BoundExpression, cap: u64) -> Result<OrderResult> {
    let g = b.evaluate(w)?;
    if let Some(lambda) = b.parabolic_index(&g)? {
        return Err(Error::ParabolicInput(b.presentation().peripheral(lambda).name.clone()));
    }
    let bound_limits = bound.cmp_u64(cap) != Ordering::Greater;
    let limit = if bound_limits {
        bound.pre_factorial_u64().map_or(cap, |pre| {
            if bound.factorial {
                (1..=pre).product()
            } else {
                pre
            }
        })
    } else {
        cap
    };
    let e = b.identity();
    let mut acc = g.clone();
    let mut i = 1u64;
    while i <= limit {
        if acc == e {
            return Ok(OrderResult::Order(i));
        }
        acc = b.multiply(&acc, &g)?;
        i += 1;
    }
    Ok(if bound_limits {
        OrderResult::InfiniteCertified { bound: *bound }
    } else {
        OrderResult::CapExceeded { cap, bound: *bound }
    })
}
