//! Class groups, polycyclic 2-groups, Artin patterns, and the classification
//! of 2-class tower groups of special Dirichlet fields.
//!
//! The crate is organized along the pipeline it implements:
//!
//! * [`arith`] — deterministic primality, the Kronecker symbol, and the
//!   admission of radicands `d = p1*p2*q`.
//! * [`quadclass`] — class groups of imaginary quadratic fields via binary
//!   quadratic forms; supplies the 2-class numbers driving the parameters.
//! * [`pcgroup`] — finite p-groups from polycyclic presentations: collection,
//!   subgroups, quotients, series, abelian invariants.
//! * [`artin`] — layers between a group and its derived subgroup, Artin
//!   transfers, and the multi-layered transfer target/kernel types.
//! * [`towers`] — the parametrized groups G_{m,n}, descendant-tree positions,
//!   predicted patterns, and the symbolic three-stage classifiers.
//! * [`survey`] — batch scans over radicand ranges with minimal-radicand
//!   aggregation, export, and caching.
//! * [`snf`] — Smith normal form, shared by the invariant computations.
//!
//! A walkthrough with worked examples lives in the `book/` directory; its
//! code snippets run as doctests of this crate.
//!
//! ```
//! use classtowers::{arith, towers};
//!
//! let profile = arith::profile_radicand(255).unwrap();
//! let params = towers::params_from_radicand(&profile).unwrap();
//! assert_eq!((params.m, params.n), (1, 1));
//! assert_eq!(towers::tree_position(params).label(), "<32,35>");
//! ```

pub mod arith;
pub mod artin;
pub mod pcgroup;
pub mod quadclass;
pub mod snf;
pub mod survey;
pub mod towers;

// The book chapters double as doctests, keeping every snippet in the guide
// compiling and correct.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/arithmetic.md")]
    pub struct Arithmetic;
    #[doc = include_str!("../../../book/src/class-groups.md")]
    pub struct ClassGroups;
    #[doc = include_str!("../../../book/src/pc-groups.md")]
    pub struct PcGroups;
    #[doc = include_str!("../../../book/src/artin-patterns.md")]
    pub struct ArtinPatterns;
    #[doc = include_str!("../../../book/src/classification.md")]
    pub struct Classification;
    #[doc = include_str!("../../../book/src/survey.md")]
    pub struct Survey;
}
