//! Base-`p` digit combinatorics on `S = {0, ..., p^n - 1}`: the digit order,
//! the break-weighted digit sum `b`, the residue map `r` and the permutation `a`.

use crate::error::{Error, Result};

/// `s_(i)`, the `i`-th base-`p` digit of `s`.
pub fn digit(p: u32, s: usize, i: u32) -> u32 {
    ((s / (p as usize).pow(i)) % p as usize) as u32
}

/// Digitwise `s <= t`; agrees with `p` not dividing `C(t, s)`.
pub fn preceq(p: u32, s: usize, t: usize) -> bool {
    let (mut s, mut t) = (s, t);
    let p = p as usize;
    while s > 0 || t > 0 {
        if s % p > t % p {
            return false;
        }
        s /= p;
        t /= p;
    }
    true
}

/// Least nonnegative residue of `a` modulo `size`.
pub fn rfun(size: usize, a: i64) -> usize {
    a.rem_euclid(size as i64) as usize
}

/// `b(s) = sum_i s_(i) p^i b_(n-i)` with `breaks = [b_1, ..., b_n]`.
pub fn bfun(p: u32, breaks: &[i64], s: usize) -> i64 {
    let n = breaks.len() as u32;
    (0..n)
        .map(|i| digit(p, s, i) as i64 * (p as i64).pow(i) * breaks[(n - 1 - i) as usize])
        .sum()
}

/// Table of `a`, the inverse of `s -> r(-b(s))`.
pub fn afun(p: u32, breaks: &[i64]) -> Result<Vec<usize>> {
    if let Some(&b) = breaks.iter().find(|&&b| b.rem_euclid(p as i64) == 0) {
        return Err(Error::PDividesBreak(b));
    }
    let size = (p as usize).pow(breaks.len() as u32);
    let mut table = vec![usize::MAX; size];
    for s in 0..size {
        let image = rfun(size, -bfun(p, breaks, s));
        if table[image] != usize::MAX {
            return Err(Error::assertion("r(-b) is a bijection", "distinct residues", format!("collision at {image}")));
        }
        table[image] = s;
    }
    Ok(table)
}

/// Materialized digit tables for a fixed `(p, n)` and break vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitTables {
    p: u32,
    n: u32,
    size: usize,
    breaks: Vec<i64>,
    b_table: Vec<i64>,
    a_table: Vec<usize>,
}

impl DigitTables {
    /// Tables without breaks; only the order and residue maps are usable.
    pub fn new(p: u32, n: u32) -> Self {
        DigitTables {
            p,
            n,
            size: (p as usize).pow(n),
            breaks: Vec::new(),
            b_table: Vec::new(),
            a_table: Vec::new(),
        }
    }

    pub fn with_breaks(mut self, breaks: &[i64]) -> Result<Self> {
        if breaks.len() != self.n as usize {
            return Err(Error::Precondition(format!(
                "expected {} breaks, got {}",
                self.n,
                breaks.len()
            )));
        }
        self.a_table = afun(self.p, breaks)?;
        self.b_table = (0..self.size).map(|s| bfun(self.p, breaks, s)).collect();
        self.breaks = breaks.to_vec();
        Ok(self)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `p^n`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn breaks(&self) -> &[i64] {
        &self.breaks
    }

    pub fn digit(&self, s: usize, i: u32) -> u32 {
        digit(self.p, s, i)
    }

    pub fn digits(&self, s: usize) -> Vec<u32> {
        (0..self.n).map(|i| self.digit(s, i)).collect()
    }

    pub fn preceq(&self, s: usize, t: usize) -> bool {
        preceq(self.p, s, t)
    }

    pub fn rfun(&self, a: i64) -> usize {
        rfun(self.size, a)
    }

    pub fn bfun(&self, s: usize) -> i64 {
        self.b_table[s]
    }

    pub fn afun(&self, s: usize) -> usize {
        self.a_table[s]
    }

    pub fn a_table(&self) -> &[usize] {
        &self.a_table
    }

    pub fn b_table(&self) -> &[i64] {
        &self.b_table
    }

    /// Whether `Psi_i` acts nontrivially on `lambda_t`: digit `n - i` of `a(r(t))`.
    pub fn active(&self, i: usize, t: i64) -> bool {
        self.digit(self.afun(self.rfun(t)), self.n - i as u32) >= 1
    }

    /// The shift `p^(n-i) b_i` attached to `Psi_i`.
    pub fn shift(&self, i: usize) -> i64 {
        (self.p as i64).pow(self.n - i as u32) * self.breaks[i - 1]
    }
}
