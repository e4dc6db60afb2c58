//! Scalar plumbing: the coefficient word type, p-powers and valuations.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_traits::{NumCast, PrimInt, Unsigned};
use serde::{Deserialize, Serialize};

/// Unsigned word that stores a canonical residue modulo `p^e`.
///
/// Arithmetic is always carried out in `u64`; the word type only decides
/// how compactly coefficient vectors are stored.
pub trait Residue:
    PrimInt + Unsigned + Hash + Debug + Display + Default + Send + Sync + 'static
{
    #[inline]
    fn from_u64(x: u64) -> Self {
        <Self as NumCast>::from(x).expect("residue does not fit the coefficient type")
    }

    #[inline]
    fn as_u64(self) -> u64 {
        self.to_u64().expect("residue word wider than 64 bits")
    }

    /// Largest modulus whose residues fit in this type.
    fn max_modulus() -> u64 {
        Self::max_value()
            .to_u64()
            .unwrap_or(u64::MAX)
            .saturating_add(1)
    }
}

impl<T> Residue for T where
    T: PrimInt + Unsigned + Hash + Debug + Display + Default + Send + Sync + 'static
{
}

/// A prime power `base^exp`, kept symbolic so that large orders never overflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PPower {
    pub base: u64,
    pub exp: u64,
}

impl PPower {
    pub fn new(base: u64, exp: u64) -> Self {
        Self { base, exp }
    }

    /// The magnitude, if it fits in a `u64`.
    pub fn value(&self) -> Option<u64> {
        checked_pow(self.base, self.exp)
    }
}

impl Display for PPower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}^{}", self.base, self.exp)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn checked_pow(base: u64, exp: u64) -> Option<u64> {
    let exp = u32::try_from(exp).ok()?;
    base.checked_pow(exp)
}

/// p-adic valuation; `None` for zero.
pub fn valuation(mut x: u64, p: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// `Some(k)` when `n == p^k` exactly.
pub fn exact_log(mut n: u64, p: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut k = 0;
    while n.is_multiple_of(p) {
        n /= p;
        k += 1;
    }
    (n == 1).then_some(k)
}

/// Inverse of a unit modulo `q` (extended Euclid).
pub fn inverse_mod(a: u64, q: u64) -> Option<u64> {
    let (mut r0, mut r1) = (q as i128, (a % q) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (t0, t1) = (t1, t0 - quot * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(q as i128) as u64)
}
