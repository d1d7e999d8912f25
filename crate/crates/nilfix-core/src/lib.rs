//! Exact computation of Reidemeister and Nielsen numbers for affine
//! n-valued self-maps of nilmanifolds.
//!
//! A nilmanifold is presented by the Malcev coordinates of its fundamental
//! group: layer ranks plus a polynomial multiplication law. An affine
//! n-valued map is a tuple of affine lift-factors (g_i, phi_i). The crate
//! derives the permutation data the deck action induces on the lifts, splits
//! the map into irreducible components, and evaluates the class-count
//! formulas exactly over arbitrary-precision rationals, with brute-force
//! oracles (coset enumeration, box union-find, fixed point census on tori)
//! for independent verification at desk scale.
//!
//! All values are immutable and all operations are pure functions; sharing
//! across threads is safe by immutability.

pub mod endo;
pub mod error;
pub mod group;
pub mod io;
pub mod linalg;
pub mod nvalued;
pub mod torus;
pub mod twisted;

mod uf;

pub use endo::{Endomorphism, HomReport, LayerMatrices};
pub use error::{Error, Result};
pub use group::{AxiomReport, BasisIndex, GroupElement, GroupPresentation, Polynomial, Term};
pub use linalg::{
    abs_inf, det, lattice_index, smith_normal_form, ExtendedCount, ExtendedRational,
    IntegerMatrix, Rational, RationalMatrix, SmithNormalForm,
};
pub use nvalued::{
    AffineLift, AffineNValuedMap, ComponentReport, MapReport, Permutation, SigmaData,
};
pub use torus::{
    brute_force_reidemeister_z_k, count_matches_nielsen, enumerate_fixed_points, TorusFixedPoint,
};
pub use twisted::{
    is_infinite, oracle_abelian_classes, oracle_nilpotent_classes, reidemeister_abelian,
    reidemeister_full, reidemeister_product, LayerDatum, TwistedSetup,
};
