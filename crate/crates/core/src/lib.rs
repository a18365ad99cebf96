//! Executable machinery for relative presentations of relatively hyperbolic
//! groups: words over `X ⊔ 𝓗`, exact group backends, H-components,
//! Λ-reduced words and their shortening, bounded van Kampen fillings,
//! hyperbolicity probes, the finite-subgroup order bound and the
//! set-shrinking lemmas behind it.

pub mod backends;
pub mod bounds;
pub mod bundled;
pub mod cayley;
pub mod cli;
pub mod error;
pub mod filling;
pub mod hyperbolicity;
pub mod oracle;
pub mod presentation;
pub mod reducedness;
pub mod shrink;
pub mod suites;
pub mod words;

pub use backends::{ElementHandle, GroupBackend, SubgroupHandle};
pub use error::{Error, Result};
pub use presentation::{load_presentation, parse_presentation, Presentation};
pub use words::{Letter, Word};
