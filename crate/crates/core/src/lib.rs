//! Taylor-jet calculus on spaces of smooth functions, graded seminorms and
//! P-norms, and an oscillatory-probe harness that falsifies tame estimates
//! for the pullback map on the circle and for composition maps on `[0, 1]`.
//!
//! The book under `book/` walks through the concepts; its code snippets are
//! compiled and run as doc-tests of this crate.

pub mod cli;
pub mod driver;
pub mod error;
pub mod function;
pub mod jet;
pub mod maps;
pub mod primitive;
pub mod tameness;

pub use error::{Error, Result};
pub use function::{DomainTag, GridSpec, SampledFunction, SinusoidProbe, SmoothFunction};
pub use jet::{TaylorJet, MAX_ORDER};
pub use primitive::ScalarPrimitive;
pub use maps::MapSpec;
pub use tameness::{PNormSpec, TameCheckReport, Transform};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/jets.md")]
    mod jets {}
    #[doc = include_str!("../../../book/src/function-spaces.md")]
    mod function_spaces {}
    #[doc = include_str!("../../../book/src/maps.md")]
    mod maps {}
    #[doc = include_str!("../../../book/src/pnorms.md")]
    mod pnorms {}
    #[doc = include_str!("../../../book/src/probes.md")]
    mod probes {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
