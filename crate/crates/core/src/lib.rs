//! Legendre curves in the unit tangent bundle over the Euclidean plane.
//!
//! A Legendre curve is a plane curve `γ` together with a unit normal field `ν`
//! satisfying `γ̇ · ν = 0`. Singular points of `γ` are allowed. With the moving
//! frame `{ν, μ = Jν}` the curve satisfies the Frenet-type system
//!
//! ```text
//! ν̇ = ℓ μ,   μ̇ = -ℓ ν,   γ̇ = β μ
//! ```
//!
//! and the pair `(ℓ, β)` determines the curve up to rotation and translation.
//!
//! The crate covers:
//!
//! - [`taylor`], [`expr`], [`func`]: jet arithmetic and the expression language
//!   every curve is written in;
//! - [`legendre`]: the curve model, curvature and Legendre/closedness checks;
//! - [`reconstruct`]: curves from prescribed curvature, and congruence alignment;
//! - [`transform`]: curvature laws for reparametrizations and target maps;
//! - [`signature`]: zero sets of `ℓ` and `β`, contact orders, and the
//!   curvature-equivalence decision;
//! - [`normalform`]: local normal forms of finite-type germs;
//! - [`gallery`]: closed-form example curves.

pub mod error;
pub mod expr;
pub mod format;
pub mod func;
pub mod gallery;
pub mod legendre;
pub mod normalform;
pub mod reconstruct;
pub mod signature;
pub mod taylor;
pub mod transform;

pub use error::{Error, Result};
pub use expr::{parse_expr, pretty_print, Arity, Expr};
pub use func::Func;
pub use legendre::{CurvaturePair, CurveSpec, Domain, LegendreCurve};
pub use signature::{EquivalenceVerdict, Signature, ZeroPoint};
pub use taylor::{BiJet2, TaylorJet};
