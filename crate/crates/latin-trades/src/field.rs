//! GF(p^e) for p^e <= 64, as explicit operation tables.
//!
//! Element x stands for the polynomial whose base-p digits are the digits
//! of x; 0 and 1 are the additive and multiplicative identities. Extension
//! fields reduce modulo a fixed irreducible polynomial per order.

use crate::{Error, Result};

pub const MAX_FIELD: usize = 64;

/// Irreducible polynomials for the supported extension orders, as
/// coefficient lists low degree first, leading coefficient included.
const IRREDUCIBLES: &[(usize, &[usize])] = &[
    (4, &[1, 1, 1]),          // x^2 + x + 1 over GF(2)
    (8, &[1, 1, 0, 1]),       // x^3 + x + 1
    (9, &[1, 0, 1]),          // x^2 + 1 over GF(3)
    (16, &[1, 1, 0, 0, 1]),   // x^4 + x + 1
    (25, &[1, 1, 1]),         // x^2 + x + 1 over GF(5)
    (27, &[1, 2, 0, 1]),      // x^3 + 2x + 1 over GF(3)
    (32, &[1, 0, 1, 0, 0, 1]), // x^5 + x^2 + 1
    (49, &[1, 0, 1]),         // x^2 + 1 over GF(7)
    (64, &[1, 1, 0, 0, 0, 0, 1]), // x^6 + x + 1
];

#[derive(Debug, Clone)]
pub struct FiniteField {
    q: usize,
    p: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Returns (p, e) with n = p^e, p prime, if n is a prime power >= 2.
pub fn prime_power(n: usize) -> Option<(usize, usize)> {
    if n < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut m = n;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            return if m == 1 { Some((p, e)) } else { None };
        }
        p += 1;
    }
    Some((n, 1))
}

pub fn is_prime_power(n: usize) -> bool {
    prime_power(n).is_some()
}

fn digits(mut x: usize, p: usize, e: usize) -> Vec<usize> {
    let mut d = vec![0; e];
    for slot in d.iter_mut() {
        *slot = x % p;
        x /= p;
    }
    d
}

fn undigits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &v| acc * p + v)
}

/// Schoolbook product of two digit polynomials, reduced mod the irreducible
/// f (monic, degree e), coefficients mod p.
fn polymul_mod(a: &[usize], b: &[usize], f: &[usize], p: usize) -> Vec<usize> {
    let e = f.len() - 1;
    let mut prod = vec![0usize; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for d in (e..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        prod[d] = 0;
        // f is monic: x^e = -(f_0 + ... + f_{e-1} x^{e-1}).
        for (t, &fc) in f.iter().take(e).enumerate() {
            prod[d - e + t] = (prod[d - e + t] + c * (p - fc) % p) % p;
        }
    }
    prod.truncate(e);
    prod
}

impl FiniteField {
    pub fn new(q: usize) -> Result<FiniteField> {
        let (p, e) = prime_power(q).ok_or(Error::NotAPrimePower { order: q })?;
        if q > MAX_FIELD {
            return Err(Error::UnsupportedField(q));
        }
        let f: Option<&[usize]> = if e == 1 {
            None
        } else {
            Some(
                IRREDUCIBLES
                    .iter()
                    .find(|(n, _)| *n == q)
                    .ok_or(Error::UnsupportedField(q))?
                    .1,
            )
        };

        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                let (s, t) = match f {
                    None => ((a + b) % p, (a * b) % p),
                    Some(f) => {
                        let da = digits(a, p, e);
                        let db = digits(b, p, e);
                        let sum: Vec<usize> =
                            da.iter().zip(&db).map(|(&x, &y)| (x + y) % p).collect();
                        (undigits(&sum, p), undigits(&polymul_mod(&da, &db, f, p), p))
                    }
                };
                add[a * q + b] = s as u8;
                mul[a * q + b] = t as u8;
            }
        }
        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            for b in 0..q {
                if add[a * q + b] == 0 {
                    neg[a] = b as u8;
                }
                if a != 0 && mul[a * q + b] == 1 {
                    inv[a] = b as u8;
                }
            }
        }
        Ok(FiniteField { q, p, add, mul, neg, inv })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b] as usize
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Multiplicative inverse; a must be nonzero.
    pub fn inv(&self, a: usize) -> usize {
        debug_assert!(a != 0, "inverse of zero");
        self.inv[a] as usize
    }

    /// All supported orders in ascending order.
    pub fn supported_orders() -> Vec<usize> {
        (2..=MAX_FIELD).filter(|&n| is_prime_power(n)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(49), Some((7, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(6), None);
    }

    #[test]
    fn rejects_unsupported() {
        assert!(FiniteField::new(6).is_err());
        assert!(FiniteField::new(128).is_err());
    }

    /// Full axiom check on every supported order: commutativity,
    /// associativity, identities, inverses, distributivity.
    #[test]
    fn field_axioms_exhaustive() {
        for q in FiniteField::supported_orders() {
            let f = FiniteField::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1, "inverse failed for {} in GF({})", a, q);
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c))
                        );
                    }
                }
            }
            // No zero divisors.
            for a in 1..q {
                for b in 1..q {
                    assert_ne!(f.mul(a, b), 0);
                }
            }
        }
    }
}
