//! Arithmetic in GF(2^m) through exponent/logarithm tables.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("field degree {0} is outside the supported range 2..=16")]
pub struct UnsupportedDegree(pub u32);

/// Primitive polynomials, bit `i` = coefficient of `x^i`, indexed by degree.
const PRIMITIVE: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
];

/// GF(2^m) with elements as integers in polynomial basis; `alpha` is a root
/// of the primitive polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisField {
    degree: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl GaloisField {
    pub fn new(degree: u32) -> Result<Self, UnsupportedDegree> {
        if !(2..=16).contains(&degree) {
            return Err(UnsupportedDegree(degree));
        }
        let order = (1usize << degree) - 1;
        let mut exp = vec![0u32; 2 * order];
        let mut log = vec![0u32; order + 1];
        let mut x = 1u32;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            *e = x;
            log[x as usize] = i as u32;
            x <<= 1;
            if x >> degree != 0 {
                x ^= PRIMITIVE[degree as usize];
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { degree, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Multiplicative order `2^m - 1`.
    pub fn order(&self) -> usize {
        (1 << self.degree) - 1
    }

    /// `alpha^i` for any integer exponent.
    pub fn alpha_pow(&self, i: i64) -> u32 {
        self.exp[i.rem_euclid(self.order() as i64) as usize]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        assert_ne!(a, 0, "zero has no inverse");
        let l = self.log[a as usize] as usize;
        self.exp[(self.order() - l) % self.order()]
    }

    pub fn div(&self, a: u32, b: u32) -> u32 {
        self.mul(a, self.inv(b))
    }

    /// Discrete logarithm of a nonzero element.
    pub fn log(&self, a: u32) -> usize {
        assert_ne!(a, 0, "zero has no logarithm");
        self.log[a as usize] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_table_polynomial_is_primitive() {
        for m in 2..=16 {
            let f = GaloisField::new(m).unwrap();
            let mut seen = vec![false; f.order() + 1];
            for i in 0..f.order() {
                let a = f.alpha_pow(i as i64);
                assert!(!seen[a as usize], "alpha repeats early for m={m}");
                seen[a as usize] = true;
            }
        }
    }

    #[test]
    fn field_axioms_hold_in_gf16() {
        let f = GaloisField::new(4).unwrap();
        for a in 1..16 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
            for b in 0..16 {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in 0..16 {
                    assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
                }
            }
        }
    }

    #[test]
    fn rejects_degree_one() {
        assert_eq!(GaloisField::new(1), Err(UnsupportedDegree(1)));
    }
}
