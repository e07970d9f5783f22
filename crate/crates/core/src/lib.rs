//! Capra conjugacy and the l0 pseudonorm.
//!
//! * [`xreal`]: extended reals with Moreau's lower and upper additions.
//! * [`vector`], [`norms`]: vectors, support sets, top-k and k-support norms,
//!   l0 level sets.
//! * [`engine`]: Fenchel-Moreau conjugates over arbitrary couplings on
//!   finite samples, one-sided linear and Capra couplings.
//! * [`capra_l0`]: closed-form Capra conjugates of l0 and of its level set
//!   indicators, and the numerical biconjugate.
//! * [`oracles`]: brute-force references the closed forms are checked
//!   against.
//! * [`report`]: the verification suites and their JSON report.

pub mod capra_l0;
pub mod engine;
pub mod norms;
pub mod oracles;
pub mod report;
pub mod vector;
pub mod xreal;

pub use engine::{Coupling, MappingTheta, SampledFunction};
pub use norms::NormKind;
pub use vector::{SupportSet, Vector};
pub use xreal::XReal;
