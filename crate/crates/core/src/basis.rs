use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// Per-qubit measurement axis assignment. Qubit 0 is the leftmost character
/// of the string form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct MeasurementBasis {
    axes: Vec<Axis>,
}

impl MeasurementBasis {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    pub fn all_z(n_qubits: usize) -> Self {
        Self { axes: vec![Axis::Z; n_qubits] }
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, qubit: usize) -> Axis {
        self.axes[qubit]
    }

    pub fn is_all_z(&self) -> bool {
        self.axes.iter().all(|&a| a == Axis::Z)
    }

    pub(crate) fn check_len(&self, n_qubits: usize) -> Result<()> {
        if self.axes.len() != n_qubits {
            return Err(Error::DimensionMismatch { expected: n_qubits, found: self.axes.len() });
        }
        Ok(())
    }
}

impl fmt::Display for MeasurementBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axes {
            write!(f, "{}", a.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for MeasurementBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'X' => Ok(Axis::X),
                'Y' => Ok(Axis::Y),
                'Z' => Ok(Axis::Z),
                other => Err(Error::InvalidArgument(format!("invalid basis letter '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axes })
    }
}

impl From<MeasurementBasis> for String {
    fn from(b: MeasurementBasis) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for MeasurementBasis {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
