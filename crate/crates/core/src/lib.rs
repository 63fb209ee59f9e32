//! Sequential tests for a coin biased `1/2 + eps` or `1/2 - eps`, modelled as
//! colorings of the (heads, tails) lattice.
//!
//! * [`model`]: policies, profiles, Bayes risk.
//! * [`walk`]: absorption probabilities and times between two lines.
//! * [`evaluator`]: exact profiles of finitely represented policies.
//! * [`beta_map`]: which linear policy is optimal for a tradeoff `beta`.
//! * [`transform`]: the greedy local moves turning any policy into `P_c`.
//! * [`oracle`]: independent checks (Monte Carlo, path enumeration, chain
//!   solves, exhaustive search).

pub mod beta_map;
pub mod cli;
pub mod error;
pub mod evaluator;
pub mod exact;
pub mod model;
pub mod oracle;
pub mod transform;
pub mod walk;

pub use error::{Error, Result};
pub use exact::Rational;
pub use model::{bayes_risk, Closure, Color, Hypothesis, HypothesisParams, Policy, Profile, RiskLedger};
