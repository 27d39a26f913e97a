use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Truth values for variables `1..=n`, printed as a 0/1 string with
/// variable 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    bits: Vec<bool>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("assignment strings may only contain 0 and 1")]
pub struct BadAssignment;

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    pub fn all(n: usize, value: bool) -> Self {
        Assignment { bits: vec![value; n] }
    }

    /// Bit `v-1` of `mask` is variable `v`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Assignment {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Value of 1-based variable `var`.
    #[inline]
    pub fn get(&self, var: u32) -> bool {
        self.bits[var as usize - 1]
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.bits[var as usize - 1] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn complement(&self) -> Self {
        Assignment {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = BadAssignment;

    fn from_str(s: &str) -> Result<Self, BadAssignment> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BadAssignment),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Assignment::new)
    }
}
