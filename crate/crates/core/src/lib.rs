//! A numerical laboratory for algebraic curvature operators and the
//! convex cones that the quadratic Ricci-flow vector field preserves.
//!
//! The crate is organized around the space of symmetric endomorphisms of
//! Λ²ℝⁿ satisfying the first Bianchi identity:
//!
//! * [`bivector`] — Λ²ℝⁿ, its inner product, and the so(n) bracket;
//! * [`operator`] — curvature operators, Ricci/scalar traces, the wedge
//!   of symmetric tensors, and the irreducible decomposition;
//! * [`flow`] — the quadratic vector field Q(R) = R² + R#, its bilinear
//!   polarization, and a fixed-step integrator for d/dt R = Q(R);
//! * [`models`] — curvature operators of the model geometries (spheres,
//!   hyperbolic factors, products, complex projective spaces);
//! * [`cones`] — curvature cones as signed membership margins, boundary
//!   and tangent probing, lineality detection, Haar averaging;
//! * [`lab`] — the verification engine that samples cone boundaries and
//!   reproduces the identity-level computations behind the invariance arguments as named checks.

pub mod bivector;
pub mod cones;
pub mod error;
pub mod flow;
pub mod lab;
pub mod models;
pub mod operator;
pub mod report;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use operator::{CurvatureOperator, Decomposition, SymTensor2};
