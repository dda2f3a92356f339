//! Exact genus-zero Gromov–Witten invariants of the projective plane with
//! naive tangency conditions.
//!
//! The crate is organized bottom-up:
//!
//! - [`rational`] and [`combinatorics`]: exact scalars, Stirling numbers,
//!   partitions and the hook-length formula;
//! - [`series`]: truncated power and Laurent series over the rationals;
//! - [`cohomology`]: the ring `Q[H]/(H^3)` and class-valued Laurent polynomials;
//! - [`engine`]: descendent brackets `<tau_a(H^b) ...>_{0,d}`;
//! - [`tangency`]: naive tangency conditions turned into descendent insertions;
//! - [`hurwitz`]: completed-cycle Hurwitz numbers for curve targets;
//! - [`mirror`]: the J-function, its hypergeometric modification and the local
//!   P² series.
//!
//! A guide with worked examples lives in the `book/` directory of the
//! repository; its code listings are compiled and run as doc-tests of this
//! crate.

pub mod cohomology;
pub mod combinatorics;
pub mod engine;
pub mod error;
pub mod hurwitz;
pub mod mirror;
pub mod rational;
pub mod series;
pub mod tangency;

pub use cohomology::SurfaceClass;
pub use engine::{Engine, Insertion};
pub use error::{Error, Result};
pub use rational::Rational;
pub use series::Series;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/numbers.md")]
    mod numbers {}
    #[doc = include_str!("../../../book/src/brackets.md")]
    mod brackets {}
    #[doc = include_str!("../../../book/src/tangency.md")]
    mod tangency {}
    #[doc = include_str!("../../../book/src/hurwitz.md")]
    mod hurwitz {}
    #[doc = include_str!("../../../book/src/mirror.md")]
    mod mirror {}
}
