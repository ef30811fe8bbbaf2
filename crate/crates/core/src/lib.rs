//! Symbolic–numeric toolkit for compatible Poisson-bracket towers on the
//! algebra of Laurent polynomials in λ with trigonometric-polynomial
//! coefficients on the circle.
//!
//! The crate has five layers:
//!
//! - [`fourier`] / [`laurent`] / [`context`]: exact arithmetic, calculus,
//!   traces and pairings on the Laurent algebra, with hard caps on λ-degree
//!   and Fourier support;
//! - [`lie`]: the two Lie brackets, the five direct-sum decompositions and
//!   their r-matrices R = Π₊ − Π₋ with pairing adjoints;
//! - [`functional`] / [`tower`]: scalar functionals with gradient rules and
//!   the compatible bracket family {·,·}_(n) with executable defect checks
//!   for all of its structural identities;
//! - [`hierarchy`]: the Benny, dispersionless Toda, dKP, dmKP, and dDym Lax
//!   hierarchies: right-hand sides, pseudo-spectral evolution, conserved
//!   quantities, Poisson-submanifold classification;
//! - [`hydro`] / [`opmatrix`]: hydrodynamic-type Hamiltonian operators
//!   (local and nonlocal), matrix assembly over the truncated Fourier
//!   basis, Dirac reduction by Schur complement, recursion operators.
//!
//! [`verify`] packages every check into seeded report rows shared by the
//! command-line tool and the acceptance suite.

pub mod context;
pub mod error;
pub mod fd;
pub mod fourier;
pub mod functional;
pub mod hierarchy;
pub mod hydro;
pub mod laurent;
pub mod lie;
pub mod opmatrix;
pub mod reduction;
pub mod tower;
pub mod verify;

pub use context::{AlgebraContext, BracketVariant, OverflowPolicy, RMatrixKind};
pub use error::{Error, Result};
pub use fourier::FourierField;
pub use functional::{Functional, GradSpan};
pub use hierarchy::{FieldState, HierarchyName, HierarchySpec, Trajectory};
pub use hydro::{FieldFunctional, HydroOperator, PolyExpr};
pub use laurent::LaurentElement;
pub use lie::SubspaceId;
pub use opmatrix::{DiracReduction, OperatorMatrix};
pub use tower::BracketTower;
