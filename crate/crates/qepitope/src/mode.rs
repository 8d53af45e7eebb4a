//! Execution mode shared by kernel estimation and classifier readout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Whether circuit outputs are read exactly from the statevector or
/// estimated from a finite number of measurement shots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ShotMode {
    /// Exact probabilities and inner products from the simulator state.
    Exact,
    /// Empirical frequencies from the given number of seeded shots.
    Shots(u64),
}

impl ShotMode {
    pub fn is_exact(self) -> bool {
        matches!(self, ShotMode::Exact)
    }

    pub fn shots(self) -> Option<u64> {
        match self {
            ShotMode::Exact => None,
            ShotMode::Shots(r) => Some(r),
        }
    }
}

impl fmt::Display for ShotMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShotMode::Exact => write!(f, "exact"),
            ShotMode::Shots(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for ShotMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("exact") {
            return Ok(ShotMode::Exact);
        }
        match s.parse::<u64>() {
            Ok(0) => Err(Error::Config("shot count must be at least 1".into())),
            Ok(r) => Ok(ShotMode::Shots(r)),
            Err(_) => Err(Error::Config(format!(
                "invalid shot mode {s:?}: expected \"exact\" or a positive integer"
            ))),
        }
    }
}

impl TryFrom<String> for ShotMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<ShotMode> for String {
    fn from(m: ShotMode) -> String {
        m.to_string()
    }
}
