//! Finite fields `F_q`, `q = p^m`.
//!
//! Elements are encoded as integers in `[0, q)`: the base-`p` digits of the
//! code are the coefficients (constant term first) of a polynomial in the
//! generator `g`, reduced modulo a pinned Conway polynomial. For `m = 1` the
//! code is simply the residue mod `p`.
//!
//! Addition and multiplication go through precomputed tables, which is cheap
//! at the sizes this crate targets (`q` at most a few hundred).

use crate::error::{Error, Result};

/// Residue field element, encoded as described in the module docs.
pub type Fq = u16;

/// Conway polynomials, monic, coefficients constant term first.
const CONWAY: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (7, 2, &[3, 6, 1]),
];

const MAX_ORDER: u32 = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteField {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<Fq>,
    mul: Vec<Fq>,
    neg: Vec<Fq>,
    inv: Vec<Fq>,
}

pub(crate) fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl FiniteField {
    pub fn new(p: u32, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidSpec(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidSpec("residue degree m must be at least 1".into()));
        }
        let q = p
            .checked_pow(m)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or_else(|| Error::InvalidSpec(format!("field of order {p}^{m} is too large")))?;
        let modulus = if m == 1 {
            vec![0, 1]
        } else {
            CONWAY
                .iter()
                .find(|(cp, cm, _)| *cp == p && *cm == m)
                .map(|(_, _, c)| c.to_vec())
                .ok_or_else(|| {
                    Error::InvalidSpec(format!("no pinned Conway polynomial for F_{{{p}^{m}}}"))
                })?
        };

        let qs = q as usize;
        let mut field = FiniteField {
            p,
            m,
            q,
            modulus,
            add: vec![0; qs * qs],
            mul: vec![0; qs * qs],
            neg: vec![0; qs],
            inv: vec![0; qs],
        };
        for a in 0..q {
            let da = field.digits(a as Fq);
            field.neg[a as usize] = field.encode(&da.iter().map(|&c| (p - c) % p).collect::<Vec<_>>());
            for b in 0..q {
                let db = field.digits(b as Fq);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                field.add[(a * q + b) as usize] = field.encode(&sum);
                field.mul[(a * q + b) as usize] = field.encode(&field.poly_mul_mod(&da, &db));
            }
        }
        for a in 1..q {
            let inv = (1..q).find(|&b| field.mul[(a * q + b) as usize] == 1).ok_or_else(|| {
                Error::InvalidSpec(format!("modulus for F_{{{p}^{m}}} is reducible"))
            })?;
            field.inv[a as usize] = inv as Fq;
        }
        Ok(field)
    }

    fn digits(&self, a: Fq) -> Vec<u32> {
        let mut a = a as u32;
        (0..self.m)
            .map(|_| {
                let d = a % self.p;
                a /= self.p;
                d
            })
            .collect()
    }

    fn encode(&self, digits: &[u32]) -> Fq {
        digits.iter().rev().fold(0u32, |acc, &d| acc * self.p + d) as Fq
    }

    fn poly_mul_mod(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.p;
        let m = self.m as usize;
        let mut prod = vec![0u32; 2 * m - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        for k in (m..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for (i, &mc) in self.modulus[..m].iter().enumerate() {
                prod[k - m + i] = (prod[k - m + i] + (p - c) * mc) % p;
            }
            prod[k] = 0;
        }
        prod.truncate(m);
        prod
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn is_prime_field(&self) -> bool {
        self.m == 1
    }

    /// The defining polynomial, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> Fq {
        0
    }

    pub fn one(&self) -> Fq {
        1
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, n: i64) -> Fq {
        n.rem_euclid(self.p as i64) as Fq
    }

    /// Element with the given polynomial coefficients (constant term first).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fq> {
        if coeffs.len() > self.m as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidSpec(format!(
                "{coeffs:?} is not an element of F_{}",
                self.q
            )));
        }
        let mut d = coeffs.to_vec();
        d.resize(self.m as usize, 0);
        Ok(self.encode(&d))
    }

    /// Checked conversion from the integer encoding.
    pub fn element(&self, code: u32) -> Result<Fq> {
        if code < self.q {
            Ok(code as Fq)
        } else {
            Err(Error::InvalidSpec(format!("{code} is not an element code of F_{}", self.q)))
        }
    }

    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        self.digits(a)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.q).map(|a| a as Fq)
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    pub fn inv(&self, a: Fq) -> Option<Fq> {
        (a != 0).then(|| self.inv[a as usize])
    }

    pub fn div(&self, a: Fq, b: Fq) -> Option<Fq> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    pub fn pow(&self, a: Fq, mut k: u64) -> Fq {
        let mut base = a;
        let mut acc = 1;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, a: Fq) -> Fq {
        self.pow(a, self.p as u64)
    }

    /// The unique `p`-th root, `x -> x^(p^(m-1))`.
    pub fn frobenius_inv(&self, a: Fq) -> Fq {
        self.pow(a, (self.p as u64).pow(self.m - 1))
    }
}
