//! Exact arithmetic in the prime field of order `p`.
//!
//! Everything here is integer-only. Residues remember their modulus, so
//! mixing two fields is an error instead of a silently wrong answer.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic trial division. Exact for every `u32`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// An odd prime `p >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Prime(u32);

impl Prime {
    pub fn new(value: u32) -> Result<Self> {
        if value < 3 {
            return Err(Error::invalid(format!(
                "{value} is not an odd prime (need p >= 3)"
            )));
        }
        if !is_prime(value as u64) {
            return Err(Error::invalid(format!("{value} is not prime")));
        }
        Ok(Prime(value))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// `t` with `p = 2t + 1`.
    #[inline]
    pub fn half(self) -> u32 {
        (self.0 - 1) / 2
    }

    pub fn residue(self, value: u64) -> Residue {
        Residue {
            value: (value % self.0 as u64) as u32,
            modulus: self,
        }
    }

    /// All odd primes in `[lo, hi]`, ascending.
    pub fn range(lo: u32, hi: u32) -> Vec<Prime> {
        (lo.max(3)..=hi)
            .filter_map(|n| Prime::new(n).ok())
            .collect()
    }
}

impl TryFrom<u32> for Prime {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        Prime::new(value)
    }
}

impl From<Prime> for u32 {
    fn from(p: Prime) -> u32 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An element of `F_p`, always reduced into `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u32,
    modulus: Prime,
}

impl Residue {
    pub fn new(value: u32, modulus: Prime) -> Result<Self> {
        if value >= modulus.get() {
            return Err(Error::invalid(format!(
                "residue {value} out of range for modulus {modulus}"
            )));
        }
        Ok(Residue { value, modulus })
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Prime {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Residue) -> Result<u64> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.get(),
                right: other.modulus.get(),
            });
        }
        Ok(self.modulus.get() as u64)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

pub fn add_mod(a: Residue, b: Residue) -> Result<Residue> {
    a.same_field(b)?;
    Ok(a.modulus.residue(a.value as u64 + b.value as u64))
}

pub fn sub_mod(a: Residue, b: Residue) -> Result<Residue> {
    let p = a.same_field(b)?;
    Ok(a.modulus.residue(a.value as u64 + p - b.value as u64))
}

pub fn mul_mod(a: Residue, b: Residue) -> Result<Residue> {
    a.same_field(b)?;
    Ok(a.modulus.residue(a.value as u64 * b.value as u64))
}

/// Multiplicative inverse via the extended Euclidean algorithm.
pub fn inv_mod(a: Residue) -> Result<Residue> {
    if a.is_zero() {
        return Err(Error::DivisionByZero(a.modulus.get()));
    }
    let p = a.modulus.get() as i64;
    let (mut old_r, mut r) = (a.value as i64, p);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    Ok(a.modulus.residue(old_s.rem_euclid(p) as u64))
}
