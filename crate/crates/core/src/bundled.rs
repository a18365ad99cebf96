//! Presentations and finite models shipped with the crate, used by tests,
//! the verification suites and the Python bindings.

use std::sync::Arc;

use crate::backends::{self, GroupBackend};
use crate::presentation::{parse_presentation, ModelRef, Presentation};

const S3: &str = include_str!("../data/s3.json");
const S3_MODEL: &str = include_str!("../data/s3.model.json");
const S3Z2: &str = include_str!("../data/s3z2.json");
const S3Z2_MODEL: &str = include_str!("../data/s3z2.model.json");
const D4: &str = include_str!("../data/d4.json");
const D4_MODEL: &str = include_str!("../data/d4.model.json");
const S4COX: &str = include_str!("../data/s4cox.json");
const S4COX_MODEL: &str = include_str!("../data/s4cox.model.json");
const DINF: &str = include_str!("../data/dinf.json");
const Z2Z3: &str = include_str!("../data/z2z3.json");

fn load(doc: &str, model: Option<&str>) -> Presentation {
    let mut p = parse_presentation(doc).expect("bundled presentation is valid");
    if let Some(m) = model {
        let v = serde_json::from_str(m).expect("bundled model is valid JSON");
        p.set_model(Some(ModelRef::Inline(v)));
    }
    p
}

/// `S₃` relative to `A₃ = ⟨r⟩`, with `X = {t}`.
pub fn s3() -> Presentation {
    load(S3, Some(S3_MODEL))
}

/// `S₃` relative to a reflection subgroup `⟨s⟩ ≅ Z₂`, with `X = {r}`.
pub fn s3z2() -> Presentation {
    load(S3Z2, Some(S3Z2_MODEL))
}

/// The dihedral group of order 8 relative to its rotation subgroup `Z₄`.
pub fn d4() -> Presentation {
    load(D4, Some(D4_MODEL))
}

/// `S₄` as a Coxeter group relative to its three simple reflections.
pub fn s4cox() -> Presentation {
    load(S4COX, Some(S4COX_MODEL))
}

/// `D∞ = Z₂ ∗ Z₂` with no relators.
pub fn dinf() -> Presentation {
    load(DINF, None)
}

/// The modular group `Z₂ ∗ Z₃` with no relators.
pub fn z2z3() -> Presentation {
    load(Z2Z3, None)
}

/// Every bundled presentation, by short name.
pub fn by_name(name: &str) -> Option<Presentation> {
    Some(match name {
        "s3" => s3(),
        "s3z2" => s3z2(),
        "d4" => d4(),
        "s4cox" => s4cox(),
        "dinf" => dinf(),
        "z2z3" => z2z3(),
        _ => return None,
    })
}

pub const NAMES: [&str; 6] = ["s3", "s3z2", "d4", "s4cox", "dinf", "z2z3"];

/// Presentations carrying a finite model.
pub const FINITE_NAMES: [&str; 4] = ["s3", "s3z2", "d4", "s4cox"];

pub fn all_presentations() -> Vec<Presentation> {
    NAMES.iter().map(|n| by_name(n).unwrap()).collect()
}

pub fn backend(name: &str) -> Arc<dyn GroupBackend> {
    let p = by_name(name).unwrap_or_else(|| panic!("no bundled presentation `{name}`"));
    backends::backend_for(Arc::new(p)).expect("bundled backend is valid")
}
