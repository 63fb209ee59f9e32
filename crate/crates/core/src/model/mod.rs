//! Domain types shared by every other module.
//!
//! A policy is a three-coloring of the (heads, tails) lattice: White cells keep
//! tossing, Blue cells stop and declare `1/2 + eps`, Red cells stop and declare
//! `1/2 - eps`. Heads move right (`h + 1`), tails move down (`t + 1`).

mod format;
mod ledger;
mod params;
mod policy;
mod profile;

pub use ledger::{LedgerEntry, RiskLedger};
pub use params::{Hypothesis, HypothesisParams};
pub use policy::{linear_color, Closure, Color, Policy};
pub use profile::{bayes_risk, Profile};
