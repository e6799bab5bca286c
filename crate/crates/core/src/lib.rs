//! Branched coverings of the Riemann sphere.
//!
//! The crate computes with rational maps of `ℂ ∪ {∞}` in two scalar
//! backends (Gaussian rationals and double-precision complex numbers):
//! fibers with local degrees, critical points and passports, numerical
//! monodromy by path tracking, local lifting criteria, and the integer
//! bookkeeping of surfaces of finite geometric type whose Gauss maps omit
//! points of the sphere.

pub mod error;
pub mod expr;
pub mod fgt;
pub mod lifting;
pub mod monodromy;
pub mod picard;
pub mod poly;
pub mod rational_map;
pub mod roots;
pub mod scalar;
pub mod sphere;

pub use error::{Error, Result};
pub use fgt::{EndClass, EndRecord, FgtRecord};
pub use monodromy::{monodromy_rep, track_fiber, MonodromyOptions, MonodromyRep, Permutation};
pub use picard::{AnyPicard, PicardConfig, TargetedPicard};
pub use poly::Polynomial;
pub use rational_map::{CriticalPoint, FiberPoint, Location, Passport, PassportEntry, RationalMap};
pub use scalar::{Approx, Exact, Scalar};
pub use sphere::{chordal_distance, ApproxPoint, ExactPoint, Mobius, SpherePoint, Tolerances};

/// Largest map or polynomial degree accepted anywhere in the crate.
pub const MAX_DEGREE: usize = 64;
