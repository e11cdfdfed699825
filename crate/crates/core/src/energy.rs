//! Energy values that may be `+∞`.

use core::fmt;
use core::ops::Add;

/// An energy value. `Infinite` is an explicit flag, never a float sentinel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub fn is_finite(&self) -> bool {
        matches!(self, Energy::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Energy::Finite(v) => Some(*v),
            Energy::Infinite => None,
        }
    }

    /// `self - other` where `other` must be finite.
    pub fn minus(self, other: f64) -> Energy {
        match self {
            Energy::Finite(v) => Energy::Finite(v - other),
            Energy::Infinite => Energy::Infinite,
        }
    }

    /// Boltzmann factor `exp(-H)`, zero for infinite energy.
    pub fn boltzmann(&self) -> f64 {
        match self {
            Energy::Finite(v) => libm::exp(-v),
            Energy::Infinite => 0.0,
        }
    }
}

impl Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        match (self, rhs) {
            (Energy::Finite(a), Energy::Finite(b)) => Energy::Finite(a + b),
            _ => Energy::Infinite,
        }
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Energy::Finite(v) => write!(f, "{v}"),
            Energy::Infinite => f.write_str("inf"),
        }
    }
}
