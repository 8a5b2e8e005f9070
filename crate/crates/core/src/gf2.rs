// SPDX-License-Identifier: Apache-2.0

//! Arithmetic in `GF(2^n)` for `1 <= n <= 64`.

use crate::dist::mask;
use crate::error::{invalid, Result};

/// Low terms of the modulus `x^n + ...` for each `n`: the irreducible
/// trinomial with the smallest middle exponent, else the pentanomial with
/// the smallest exponents.
const LOW_TERMS: [u64; 65] = [
    0, 0x1, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b, 0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b, 0x9,
    0x9, 0x27, 0x9, 0x5, 0x3, 0x21, 0x1b, 0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d, 0x401,
    0x81, 0x5, 0x201, 0x53, 0x63, 0x11, 0x39, 0x9, 0x81, 0x59, 0x21, 0x1b, 0x3, 0x21, 0x2d,
    0x201, 0x1d, 0x4b, 0x9, 0x47, 0x201, 0x81, 0x95, 0x11, 0x80001, 0x95, 0x3, 0x27, 0x20000001,
    0x3, 0x1b,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gf2n {
    n: u32,
    low: u64,
}

impl Gf2n {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(invalid("n", format!("{n} outside 1..=64")));
        }
        Ok(Gf2n { n, low: LOW_TERMS[n as usize] })
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    /// The modulus without its leading term.
    pub fn low_terms(&self) -> u64 {
        self.low
    }

    pub fn contains(&self, a: u64) -> bool {
        a & !mask(self.n) == 0
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(self.contains(a) && self.contains(b));
        let mut prod: u128 = 0;
        let mut b = b;
        let mut shift = 0;
        while b != 0 {
            if b & 1 == 1 {
                prod ^= (a as u128) << shift;
            }
            b >>= 1;
            shift += 1;
        }
        self.reduce(prod)
    }

    fn reduce(&self, mut p: u128) -> u64 {
        let n = self.n;
        for i in (n..2 * n).rev() {
            if (p >> i) & 1 == 1 {
                p ^= 1u128 << i;
                p ^= (self.low as u128) << (i - n);
            }
        }
        p as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u128) -> u64 {
        let mut acc = 1u64;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, (1u128 << self.n) - 2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: shift-and-add with reduction after every doubling.
    fn naive_mul(n: u32, low: u64, a: u64, b: u64) -> u64 {
        let top = 1u128 << n;
        let mut acc: u128 = 0;
        let mut cur = a as u128;
        for i in 0..n {
            if (b >> i) & 1 == 1 {
                acc ^= cur;
            }
            cur <<= 1;
            if cur & top != 0 {
                cur ^= top | low as u128;
            }
        }
        acc as u64
    }

    fn poly_mod(mut a: u128, m: u128) -> u128 {
        let dm = 127 - m.leading_zeros();
        while a != 0 && 127 - a.leading_zeros() >= dm {
            a ^= m << (127 - a.leading_zeros() - dm);
        }
        a
    }

    fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            let r = poly_mod(a, b);
            a = b;
            b = r;
        }
        a
    }

    /// Rabin: `x^(2^n) = x mod p` and `gcd(x^(2^(n/q)) - x, p) = 1` for every
    /// prime `q | n`.
    fn is_irreducible(n: u32, low: u64) -> bool {
        let f = Gf2n { n, low };
        let frob = |k: u32| -> u64 {
            let mut a = if n == 1 { low } else { 2 };
            for _ in 0..k {
                a = f.mul(a, a);
            }
            a
        };
        let x = if n == 1 { low } else { 2 };
        if frob(n) != x {
            return false;
        }
        let p = (1u128 << n) | low as u128;
        (2..=n)
            .filter(|q| n.is_multiple_of(*q) && (2..*q).all(|d| q % d != 0))
            .all(|q| poly_gcd(p, (frob(n / q) ^ x) as u128) == 1)
    }

    #[test]
    fn table_is_irreducible() {
        for n in 2..=64 {
            assert!(is_irreducible(n, LOW_TERMS[n as usize]), "n = {n}");
        }
        // A reducible control: x^4 + x^2 + 1 = (x^2 + x + 1)^2.
        assert!(!is_irreducible(4, 0b101));
    }

    #[test]
    fn matches_naive_multiplication() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in 1..=64 {
            let f = Gf2n::new(n).unwrap();
            for _ in 0..50 {
                let a = rng.random::<u64>() & mask(n);
                let b = rng.random::<u64>() & mask(n);
                assert_eq!(f.mul(a, b), naive_mul(n, f.low, a, b));
            }
        }
    }

    #[test]
    fn aes_field_example() {
        let f = Gf2n::new(8).unwrap();
        assert_eq!(f.mul(0x57, 0x83), 0xc1);
        assert_eq!(f.mul(0x53, f.inv(0x53).unwrap()), 1);
        assert_eq!(f.inv(0), None);
        assert!(Gf2n::new(0).is_err() && Gf2n::new(65).is_err());
    }
}
