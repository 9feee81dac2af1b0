//! Exact-arithmetic toolkit for sensitivity analysis and parameter tuning in
//! discrete Bayesian networks.
//!
//! All probabilities are arbitrary-precision rationals, so inference,
//! sensitivity-function fitting and tuning decisions are exact; logarithms and
//! square roots are reported as rational intervals with explicit error bounds.
//!
//! The crate is organized as:
//!
//! * [`net`] — network data model, validation, text format, proportional
//!   covariation of CPT parameters;
//! * [`infer`] — exact joint/marginal/conditional queries by variable
//!   elimination, plus full joint enumeration;
//! * [`sensitivity`] — one-way, two-way and n-way sensitivity functions
//!   fitted from corner evaluations;
//! * [`distance`] — Euclidean parameter distance, Kullback–Leibler divergence
//!   and the max/min joint-ratio divergence, with interval threshold tests;
//! * [`tuning`] — decision solvers for the tuning problem family
//!   (vertex enumeration, grid search with exact coordinate refinement);
//! * [`reduce`] — compilers from Boolean-formula instances to gadget
//!   networks whose tuning decisions mirror the source instance;
//! * [`oracle`] — independent brute-force solvers used as ground truth;
//! * [`gen`] — seeded random generators for formulas, networks and probes.

pub mod distance;
pub mod gen;
pub mod infer;
pub mod net;
pub mod oracle;
pub mod precise;
pub mod rational;
pub mod reduce;
pub mod sensitivity;
pub mod tuning;

pub use net::{Evidence, Network, ParameterAssignment, ParameterRef, Variable};
pub use rational::Rational;
