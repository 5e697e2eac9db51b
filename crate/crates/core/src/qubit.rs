//! The four preparations, two measurement bases and binary outcomes shared by
//! every party in the protocol.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::qmath::{ComplexMatrix, DensityMatrix, StateVector};

/// Alice's measurement: `σ1 = |+⟩⟨+| − |−⟩⟨−|` or `σ3 = |0⟩⟨0| − |1⟩⟨1|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "s1")]
    Sigma1,
    #[serde(rename = "s3")]
    Sigma3,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Sigma1, Basis::Sigma3];

    /// Eigenprojector for outcome `m`.
    pub fn projector(self, m: Outcome) -> ComplexMatrix {
        self.eigenstate(m).projector()
    }

    pub fn eigenstate(self, m: Outcome) -> StateVector {
        Preparation::eigenstate_of(self, m).state_vector()
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Sigma1 => "s1",
            Basis::Sigma3 => "s3",
        })
    }
}

/// Measurement result `m ∈ {+1, −1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_value(m: i64) -> Option<Self> {
        match m {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    /// `(1 − m)/2`
    pub fn as_bit(self) -> Bit {
        match self {
            Outcome::Plus => Bit::Zero,
            Outcome::Minus => Bit::One,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = i64::deserialize(d)?;
        Outcome::from_value(m)
            .ok_or_else(|| serde::de::Error::custom(format!("outcome must be 1 or -1, got {m}")))
    }
}

/// A classical bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Bit {
    #[default]
    Zero,
    One,
}

impl Bit {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Bit::Zero),
            1 => Some(Bit::One),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    /// Addition mod 2.
    pub fn xor(self, other: Bit) -> Bit {
        if self == other {
            Bit::Zero
        } else {
            Bit::One
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

impl Serialize for Bit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Bit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u64::deserialize(d)?;
        u8::try_from(v)
            .ok()
            .and_then(Bit::from_u8)
            .ok_or_else(|| serde::de::Error::custom(format!("bit must be 0 or 1, got {v}")))
    }
}

/// Bob's prepared state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preparation {
    #[serde(rename = "rho0")]
    Zero,
    #[serde(rename = "rho1")]
    One,
    #[serde(rename = "rho+")]
    Plus,
    #[serde(rename = "rho-")]
    Minus,
}

impl Preparation {
    pub const ALL: [Preparation; 4] = [
        Preparation::Zero,
        Preparation::One,
        Preparation::Plus,
        Preparation::Minus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The basis this state is an eigenstate of.
    pub fn basis(self) -> Basis {
        match self {
            Preparation::Zero | Preparation::One => Basis::Sigma3,
            Preparation::Plus | Preparation::Minus => Basis::Sigma1,
        }
    }

    /// Outcome Alice finds on a matching basis over an ideal channel.
    pub fn ideal_outcome(self) -> Outcome {
        match self {
            Preparation::Zero | Preparation::Plus => Outcome::Plus,
            Preparation::One | Preparation::Minus => Outcome::Minus,
        }
    }

    pub fn matches(self, basis: Basis) -> bool {
        self.basis() == basis
    }

    pub fn eigenstate_of(basis: Basis, m: Outcome) -> Self {
        match (basis, m) {
            (Basis::Sigma3, Outcome::Plus) => Preparation::Zero,
            (Basis::Sigma3, Outcome::Minus) => Preparation::One,
            (Basis::Sigma1, Outcome::Plus) => Preparation::Plus,
            (Basis::Sigma1, Outcome::Minus) => Preparation::Minus,
        }
    }

    pub fn state_vector(self) -> StateVector {
        let amps = match self {
            Preparation::Zero => [1.0, 0.0],
            Preparation::One => [0.0, 1.0],
            Preparation::Plus => [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            Preparation::Minus => [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        };
        StateVector::from_real(&amps).expect("qubit basis states are normalized")
    }

    pub fn density(self) -> DensityMatrix {
        DensityMatrix::from_pure(&self.state_vector())
    }
}

impl fmt::Display for Preparation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preparation::Zero => "rho0",
            Preparation::One => "rho1",
            Preparation::Plus => "rho+",
            Preparation::Minus => "rho-",
        })
    }
}
