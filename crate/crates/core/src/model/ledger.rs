use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::profile::Profile;
use crate::error::{Error, Result};
use crate::exact::{fmt_rational, serde_fraction, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub step_label: String,
    pub profile: Profile,
    #[serde(with = "serde_fraction")]
    pub risk: Rational,
    /// How much this entry's risk may exceed the previous one.
    #[serde(with = "serde_fraction")]
    pub allowed_increase: Rational,
}

/// Bayes risk recorded after every pipeline step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskLedger {
    pub entries: Vec<LedgerEntry>,
}

impl RiskLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step_label: impl Into<String>, profile: Profile, risk: Rational, allowed_increase: Rational) {
        self.entries.push(LedgerEntry {
            step_label: step_label.into(),
            profile,
            risk,
            allowed_increase,
        });
    }

    /// Checks `risk[i+1] <= risk[i] + allowed_increase[i+1]` for every pair.
    pub fn check_monotone(&self) -> Result<()> {
        for pair in self.entries.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            if next.risk > &prev.risk + &next.allowed_increase {
                return Err(Error::Postcondition {
                    op: "risk ledger",
                    detail: format!(
                        "{}: risk {} exceeds previous {} plus allowance {}",
                        next.step_label,
                        fmt_rational(&next.risk),
                        fmt_rational(&prev.risk),
                        fmt_rational(&next.allowed_increase)
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn total_allowance(&self) -> Rational {
        self.entries.iter().skip(1).fold(Rational::zero(), |acc, e| acc + &e.allowed_increase)
    }

    /// Final risk minus initial risk; zero for an empty ledger.
    pub fn total_change(&self) -> Rational {
        match (self.entries.first(), self.entries.last()) {
            (Some(first), Some(last)) => &last.risk - &first.risk,
            _ => Rational::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, int};

    fn entry_profile() -> Profile {
        Profile::new(int(0), int(0), int(0), int(0)).unwrap()
    }

    #[test]
    fn monotone_within_allowance() {
        let mut ledger = RiskLedger::new();
        ledger.push("start", entry_profile(), int(1), int(0));
        ledger.push("truncate", entry_profile(), frac(11, 10), frac(1, 5));
        ledger.push("fill", entry_profile(), frac(1, 2), int(0));
        assert!(ledger.check_monotone().is_ok());
        assert_eq!(ledger.total_change(), frac(-1, 2));
        assert_eq!(ledger.total_allowance(), frac(1, 5));
    }

    #[test]
    fn detects_increase() {
        let mut ledger = RiskLedger::new();
        ledger.push("start", entry_profile(), int(1), int(0));
        ledger.push("bad", entry_profile(), frac(3, 2), int(0));
        assert!(matches!(ledger.check_monotone(), Err(Error::Postcondition { .. })));
    }
}
