//! Linear maps between matrix algebras, represented by their Choi matrices.
//!
//! The crate tests positivity classes of a map (positive, k-positive,
//! completely positive or copositive, Schwarz-type local complete
//! positivity), classifies maps that never raise the rank of a rank-one
//! projection, builds the completely positive and copositive minorants
//! attached to an eigen-seed of the map, checks membership in the faces of the
//! positive cone, reconstructs maps from their quadratic restriction, and
//! searches for decompositions or nondecomposability witnesses.
//!
//! Conventions: the Choi matrix of a map from `k x k` to `h x h` matrices is
//! `J = sum_ij E_ij (x) phi(E_ij)`, a `k x k` grid of `h x h` blocks whose
//! block `(i, j)` is `phi(E_ij)`. The involution on vectors is entrywise
//! conjugation in the standard basis.

pub mod blockform;
pub mod cli;
pub mod decomp;
pub mod error;
pub mod faces;
pub mod linalg;
pub mod mapcore;
pub mod minorant;
pub mod parallelogram;
pub mod positivity;
pub mod random;
pub mod rank1;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Ket, ToleranceConfig, C64};
pub use mapcore::{LinearMap, MapClass};
