//! Discovery-frame grid types and the small amount of modular arithmetic
//! every pattern family needs.
//!
//! A discovery frame is an `m × n` grid: `i` indexes one of `m` frequency
//! channels and `j` one of `n` subframes. All reductions here are canonical
//! (results always land in `[0, q)`), so residues can be compared directly.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted value of either grid dimension.
///
/// Keeps every quadratic invariant term comfortably inside `i128` and every
/// dense per-resource table small enough to allocate.
pub const MAX_DIMENSION: u32 = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("modulus must be positive, got {0}")]
    InvalidModulus(i64),
    #[error("{a} has no inverse modulo {q}")]
    NoInverse { a: i64, q: i64 },
}

/// Dimensions of a discovery frame: `m` channels by `n` subframes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    pub m: u32,
    pub n: u32,
}

impl GridShape {
    pub const fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    /// Number of cells in the full grid.
    pub fn cells(&self) -> usize {
        self.m as usize * self.n as usize
    }

    pub fn contains(&self, r: Resource) -> bool {
        r.i < self.m && r.j < self.n
    }

    /// Dense row-major index of `r`, for per-resource lookup tables.
    pub fn index(&self, r: Resource) -> usize {
        r.i as usize * self.n as usize + r.j as usize
    }

    pub fn lcm(&self) -> u64 {
        let (m, n) = (u64::from(self.m), u64::from(self.n));
        if m == 0 || n == 0 {
            return 0;
        }
        m / gcd(m, n) * n
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

/// One time-frequency cell `(i, j)`: channel `i`, subframe `j`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Resource {
    pub i: u32,
    pub j: u32,
}

impl Resource {
    pub const fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }
}

impl From<(u32, u32)> for Resource {
    fn from((i, j): (u32, u32)) -> Self {
        Self { i, j }
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// A hopping-invariant residue, `value` in `Z/modulus`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct InvariantValue {
    pub value: u64,
    pub modulus: u64,
}

impl InvariantValue {
    /// Reduces an arbitrary signed value into its canonical residue.
    pub fn from_raw(raw: i128, modulus: u64) -> Self {
        debug_assert!(modulus > 0);
        let q = i128::from(modulus);
        Self {
            value: raw.rem_euclid(q) as u64,
            modulus,
        }
    }
}

impl fmt::Display for InvariantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// Canonical residue of `x` modulo `q`, always in `[0, q)`.
pub fn mod_reduce(x: i64, q: i64) -> Result<i64, ArithError> {
    if q <= 0 {
        return Err(ArithError::InvalidModulus(q));
    }
    Ok(x.rem_euclid(q))
}

/// Greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `q` via the extended Euclidean algorithm.
pub fn mod_inverse(a: i64, q: i64) -> Result<i64, ArithError> {
    let a_red = mod_reduce(a, q)?;
    let (mut old_r, mut r) = (i128::from(a_red), i128::from(q));
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(ArithError::NoInverse { a, q });
    }
    Ok(old_s.rem_euclid(i128::from(q)) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mod_reduce_examples() {
        assert_eq!(mod_reduce(-8, 3), Ok(1));
        assert_eq!(mod_reduce(0, 7), Ok(0));
        assert_eq!(mod_reduce(20, 6), Ok(2));
        assert_eq!(mod_reduce(5, 0), Err(ArithError::InvalidModulus(0)));
        assert_eq!(mod_reduce(5, -2), Err(ArithError::InvalidModulus(-2)));
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(4, 6), 2);
        for m in 0..50 {
            assert_eq!(gcd(1, m), 1);
        }
        assert_eq!(gcd(0, 5), 5);
        assert_eq!(gcd(0, 0), 0);
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(2, 5), Ok(3));
        for q in 2..20 {
            assert_eq!(mod_inverse(1, q), Ok(1));
        }
        assert_eq!(mod_inverse(3, 6), Err(ArithError::NoInverse { a: 3, q: 6 }));
        assert_eq!(mod_inverse(-2, 5), Ok(2));
        assert!(mod_inverse(1, 0).is_err());
    }

    #[test]
    fn mod_inverse_exhaustive_up_to_1000() {
        for q in 2..=1000i64 {
            for a in 0..q {
                let coprime = gcd(a as u64, q as u64) == 1;
                match mod_inverse(a, q) {
                    Ok(inv) => {
                        assert!(coprime);
                        assert!((0..q).contains(&inv));
                        assert_eq!(a * inv % q, 1, "a={a} q={q}");
                    }
                    Err(_) => assert!(!coprime),
                }
            }
        }
    }

    #[test]
    fn lcm_and_index() {
        let s = GridShape::new(15, 45);
        assert_eq!(s.lcm(), 45);
        assert_eq!(GridShape::new(4, 6).lcm(), 12);
        assert_eq!(s.index(Resource::new(2, 3)), 93);
        assert!(s.contains(Resource::new(14, 44)));
        assert!(!s.contains(Resource::new(15, 0)));
    }

    proptest! {
        #[test]
        fn mod_reduce_is_canonical(x in any::<i64>(), q in 1i64..1_000_000) {
            let r = mod_reduce(x, q).unwrap();
            prop_assert!((0..q).contains(&r));
            prop_assert_eq!((i128::from(x) - i128::from(r)) % i128::from(q), 0);
            prop_assert_eq!(mod_reduce(r, q).unwrap(), r);
        }

        #[test]
        fn invariant_value_matches_mod_reduce(x in -1_000_000_000i64..1_000_000_000, q in 1u64..10_000) {
            let v = InvariantValue::from_raw(i128::from(x), q);
            prop_assert_eq!(v.value as i64, mod_reduce(x, q as i64).unwrap());
        }
    }
}
