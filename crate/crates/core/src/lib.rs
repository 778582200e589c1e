//! Exact symbolic computation over monoid rings.
//!
//! This crate implements the machinery needed to factor matrices over the
//! monoid ring `k[M]` of an affine positive monoid `M` into standard
//! elementary matrices, after applying a high enough power of the Frobenius
//! endomorphism `m ↦ m^c`:
//!
//! * [`lattice`] — exponent vectors with denominators restricted to powers
//!   of a fixed base `c`, and the scalar functions (`n`-th coordinate,
//!   squared norm, cross-section image) everything else is built on;
//! * [`polyhedra`] — exact rational cones and polytopes: double description,
//!   face enumeration, ε-neighborhood cones, pyramids and the complexity
//!   invariant, admissible polytope sequences;
//! * [`monoids`] — affine positive monoids: membership, Hilbert bases,
//!   normalization, interior and face restrictions, free covers, graded
//!   decompositions, acuteness shears;
//! * [`algebra`] — sparse monoid-ring elements over `ℚ` or `𝔽_p`;
//! * [`matgroups`] — matrices, elementary words, Steinberg relations and the
//!   support classes used by the rewriting engine;
//! * [`separation`] — the certified rewriting engine that splits an
//!   elementary word into a factor supported near one half-cone and an
//!   `SL` factor supported near the other;
//! * [`descent`] — excision over facets, base-case factorizers and the
//!   end-to-end factorization driver.
//!
//! All arithmetic is exact (arbitrary-precision rationals); every matrix
//! identity an algorithm claims is re-verified by multiplication before it
//! is returned.
//!
//! The crate is `no_std` compatible (requires `alloc`); the default `std`
//! feature only toggles `std`-backed conveniences in downstream crates.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod linalg;

pub mod lattice;
pub mod polyhedra;

pub mod monoids;

pub mod algebra;
pub mod matgroups;

pub mod separation;

pub mod descent;

pub use error::Error;

/// Arbitrary precision integer used throughout.
pub type Int = num_bigint::BigInt;
/// Exact rational scalar; all comparisons are exact.
pub type Rat = num_rational::BigRational;

pub(crate) mod prelude {
    pub use alloc::collections::{BTreeMap, BTreeSet};
    pub use alloc::format;
    pub use alloc::string::{String, ToString};
    pub use alloc::vec;
    pub use alloc::vec::Vec;

    pub use num_traits::{One, Signed, Zero};

    pub use crate::{Error, Int, Rat};

    pub fn rat(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    pub fn rat_int(v: i64) -> Rat {
        Rat::from_integer(Int::from(v))
    }
}
