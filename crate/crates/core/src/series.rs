//! Truncated Laurent series over `F_q`: the base field `K = F_q((t))`.
//!
//! A [`Series`] stores a leading exponent, a run of coefficients and an
//! absolute precision cap. Coefficients at exponents `>= cap` are unknown.
//! A series without a cap is an exact Laurent polynomial; most of the
//! scaffold machinery stays inside that exact subring and only inversion of
//! non-monomials forces a cap.
//!
//! Precision follows the usual `O(t^c)` rules:
//!
//! ```text
//! (a + O(t^i)) + (b + O(t^j)) = (a + b) + O(t^min(i, j))
//! (t^e a + O(t^i)) (t^f b + O(t^j)) = t^(e+f) a b + O(t^min(e + j, f + i))
//! ```

use std::cmp::{min, Ordering};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fq::{FiniteField, Fq};

/// Truncation-honest valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    /// The coefficient at this exponent is known and nonzero.
    Exact(i64),
    /// Every known coefficient vanishes; the value is at least this cap.
    AtLeast(i64),
    /// Exact zero.
    Infinite,
}

impl Valuation {
    pub fn exact(self) -> Option<i64> {
        match self {
            Valuation::Exact(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Valuation::Exact(_))
    }

    /// Largest integer the valuation is known to be at least (`None` for +inf).
    pub fn lower_bound(self) -> Option<i64> {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn shift(self, k: i64) -> Valuation {
        match self {
            Valuation::Exact(v) => Valuation::Exact(v + k),
            Valuation::AtLeast(v) => Valuation::AtLeast(v + k),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    /// Valuation of a sum of terms whose exact valuations are pairwise
    /// distinct, so no cancellation can occur between known leading terms.
    pub fn min_of_distinct<I: IntoIterator<Item = Valuation>>(terms: I) -> Valuation {
        let mut exact: Option<i64> = None;
        let mut bound: Option<i64> = None;
        for t in terms {
            match t {
                Valuation::Exact(v) => exact = Some(exact.map_or(v, |e| e.min(v))),
                Valuation::AtLeast(c) => bound = Some(bound.map_or(c, |b| b.min(c))),
                Valuation::Infinite => {}
            }
        }
        match (exact, bound) {
            (None, None) => Valuation::Infinite,
            (Some(e), None) => Valuation::Exact(e),
            (Some(e), Some(b)) if e < b => Valuation::Exact(e),
            (Some(_), Some(b)) | (None, Some(b)) => Valuation::AtLeast(b),
        }
    }

    /// Compare against a threshold: `Some(true)` if provably `>= k`,
    /// `Some(false)` if provably `< k`, `None` if truncation hides it.
    pub fn at_least(self, k: i64) -> Option<bool> {
        match self {
            Valuation::Exact(v) => Some(v >= k),
            Valuation::AtLeast(c) if c >= k => Some(true),
            Valuation::AtLeast(_) => None,
            Valuation::Infinite => Some(true),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(c) => write!(f, ">={c}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl PartialOrd for Valuation {
    /// Only defined when the order is certain.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use Valuation::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Some(a.cmp(b)),
            (Infinite, Infinite) => None,
            (Infinite, Exact(_)) => Some(Ordering::Greater),
            (Exact(_), Infinite) => Some(Ordering::Less),
            (Exact(a), AtLeast(c)) if a < c => Some(Ordering::Less),
            (AtLeast(c), Exact(a)) if a < c => Some(Ordering::Greater),
            _ => None,
        }
    }
}

/// Element of `F_q((t))` with an optional absolute precision cap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Series {
    val: i64,
    coeffs: Vec<Fq>,
    cap: Option<i64>,
}

impl Series {
    pub fn zero() -> Self {
        Series { val: 0, coeffs: Vec::new(), cap: None }
    }

    /// Zero known only up to `t^cap`.
    pub fn zero_to(cap: i64) -> Self {
        Series { val: 0, coeffs: Vec::new(), cap: Some(cap) }
    }

    pub fn one() -> Self {
        Series::monomial(1, 0)
    }

    /// `c t^k`, exact.
    pub fn monomial(c: Fq, k: i64) -> Self {
        Series::new(k, vec![c], None)
    }

    /// `t^val (c_0 + c_1 t + ...)` truncated below `cap` when given.
    pub fn new(val: i64, coeffs: Vec<Fq>, cap: Option<i64>) -> Self {
        let mut s = Series { val, coeffs, cap };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if let Some(c) = self.cap {
            let keep = (c - self.val).clamp(0, self.coeffs.len() as i64) as usize;
            self.coeffs.truncate(keep);
        }
        let lead = self.coeffs.iter().position(|&c| c != 0);
        match lead {
            None => {
                self.coeffs.clear();
                self.val = 0;
            }
            Some(i) => {
                if i > 0 {
                    self.coeffs.drain(..i);
                    self.val += i as i64;
                }
                while self.coeffs.last() == Some(&0) {
                    self.coeffs.pop();
                }
            }
        }
    }

    pub fn cap(&self) -> Option<i64> {
        self.cap
    }

    pub fn is_exact(&self) -> bool {
        self.cap.is_none()
    }

    /// True if no nonzero coefficient is known (exact zero or zero up to cap).
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        match (self.coeffs.is_empty(), self.cap) {
            (false, _) => Valuation::Exact(self.val),
            (true, Some(c)) => Valuation::AtLeast(c),
            (true, None) => Valuation::Infinite,
        }
    }

    /// Leading coefficient, if a nonzero one is known.
    pub fn leading_coeff(&self) -> Option<Fq> {
        self.coeffs.first().copied()
    }

    /// Coefficient of `t^k` (`None` when `k` is at or beyond the cap).
    pub fn coeff(&self, k: i64) -> Option<Fq> {
        if self.cap.is_some_and(|c| k >= c) {
            return None;
        }
        let i = k - self.val;
        Some(if self.coeffs.is_empty() || i < 0 || i >= self.coeffs.len() as i64 {
            0
        } else {
            self.coeffs[i as usize]
        })
    }

    /// Known nonzero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Fq)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(move |(i, &c)| (self.val + i as i64, c))
    }

    /// Stored form `(val, coeffs)`: the series is `t^val (c_0 + c_1 t + ...)`.
    pub fn raw(&self) -> (i64, &[Fq]) {
        (self.val, &self.coeffs)
    }

    /// Lowest exponent that could carry a nonzero coefficient.
    fn low(&self) -> Option<i64> {
        self.valuation().lower_bound()
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i64) -> Series {
        Series {
            val: if self.coeffs.is_empty() { 0 } else { self.val + k },
            coeffs: self.coeffs.clone(),
            cap: self.cap.map(|c| c + k),
        }
    }

    /// Lower the cap to `cap` (never raises it).
    pub fn truncate(&self, cap: i64) -> Series {
        let cap = self.cap.map_or(cap, |c| c.min(cap));
        Series::new(self.val, self.coeffs.clone(), Some(cap))
    }

    /// Keep `rel` coefficients past the valuation.
    pub fn with_relative_precision(&self, rel: i64) -> Series {
        match self.valuation() {
            Valuation::Exact(v) => self.truncate(v + rel),
            _ => self.clone(),
        }
    }

    /// Equality on the coefficients both sides know.
    pub fn agrees_with(&self, other: &Series) -> bool {
        let cap = match (self.cap, other.cap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let (lo, hi) = span(self, other);
        let hi = cap.map_or(hi, |c| hi.min(c));
        (lo..hi).all(|k| self.coeff(k).unwrap_or(0) == other.coeff(k).unwrap_or(0))
    }
}

fn span(a: &Series, b: &Series) -> (i64, i64) {
    let ends = |s: &Series| {
        if s.coeffs.is_empty() {
            None
        } else {
            Some((s.val, s.val + s.coeffs.len() as i64))
        }
    };
    match (ends(a), ends(b)) {
        (None, None) => (0, 0),
        (Some(x), None) | (None, Some(x)) => x,
        (Some(x), Some(y)) => (x.0.min(y.0), x.1.max(y.1)),
    }
}

fn min_cap(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// The base field `K = F_q((t))`; all series arithmetic goes through it.
#[derive(Clone, Debug)]
pub struct LocalField {
    fq: Arc<FiniteField>,
}

impl LocalField {
    pub fn new(fq: FiniteField) -> Self {
        LocalField { fq: Arc::new(fq) }
    }

    pub fn residue_field(&self) -> &FiniteField {
        &self.fq
    }

    pub fn characteristic(&self) -> u32 {
        self.fq.characteristic()
    }

    /// Embedded integer constant.
    pub fn from_int(&self, n: i64) -> Series {
        Series::monomial(self.fq.from_int(n), 0)
    }

    /// The uniformizer `t`.
    pub fn uniformizer(&self) -> Series {
        Series::monomial(1, 1)
    }

    pub fn neg(&self, a: &Series) -> Series {
        Series {
            val: a.val,
            coeffs: a.coeffs.iter().map(|&c| self.fq.neg(c)).collect(),
            cap: a.cap,
        }
    }

    pub fn add(&self, a: &Series, b: &Series) -> Series {
        let cap = min_cap(a.cap, b.cap);
        if b.coeffs.is_empty() {
            return match cap {
                Some(c) => a.truncate(c),
                None => a.clone(),
            };
        }
        if a.coeffs.is_empty() {
            return match cap {
                Some(c) => b.truncate(c),
                None => b.clone(),
            };
        }
        let (lo, mut hi) = span(a, b);
        if let Some(c) = cap {
            hi = hi.min(c);
        }
        if hi <= lo {
            return Series::new(0, Vec::new(), cap);
        }
        let mut out = vec![0; (hi - lo) as usize];
        for (k, c) in a.terms() {
            if k < hi {
                out[(k - lo) as usize] = c;
            }
        }
        for (k, c) in b.terms() {
            if k < hi {
                let slot = &mut out[(k - lo) as usize];
                *slot = self.fq.add(*slot, c);
            }
        }
        Series::new(lo, out, cap)
    }

    pub fn sub(&self, a: &Series, b: &Series) -> Series {
        self.add(a, &self.neg(b))
    }

    /// Multiply by a residue-field constant.
    pub fn scale(&self, c: Fq, a: &Series) -> Series {
        if c == 0 {
            return Series::zero();
        }
        Series {
            val: a.val,
            coeffs: a.coeffs.iter().map(|&x| self.fq.mul(c, x)).collect(),
            cap: a.cap,
        }
    }

    pub fn mul(&self, a: &Series, b: &Series) -> Series {
        // exact zero annihilates anything
        if (a.coeffs.is_empty() && a.cap.is_none()) || (b.coeffs.is_empty() && b.cap.is_none()) {
            return Series::zero();
        }
        let cap = match (a.cap, b.cap) {
            (None, None) => None,
            (Some(ca), None) => Some(ca + b.low().unwrap()),
            (None, Some(cb)) => Some(cb + a.low().unwrap()),
            (Some(ca), Some(cb)) => Some(min(ca + b.low().unwrap(), cb + a.low().unwrap())),
        };
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            return Series::new(0, Vec::new(), cap);
        }
        let val = a.val + b.val;
        let mut len = a.coeffs.len() + b.coeffs.len() - 1;
        if let Some(c) = cap {
            len = len.min((c - val).max(0) as usize);
        }
        let coeffs = self.convolve(&a.coeffs, &b.coeffs, len);
        Series::new(val, coeffs, cap)
    }

    fn convolve(&self, a: &[Fq], b: &[Fq], len: usize) -> Vec<Fq> {
        let f = &*self.fq;
        if f.is_prime_field() {
            let p = f.characteristic() as u64;
            let mut acc = vec![0u64; len];
            for (i, &x) in a.iter().enumerate().take(len) {
                if x == 0 {
                    continue;
                }
                let x = x as u64;
                for (j, &y) in b.iter().enumerate().take(len - i) {
                    acc[i + j] += x * y as u64;
                }
                // keep the accumulators bounded
                if i % 4096 == 4095 {
                    acc.iter_mut().for_each(|v| *v %= p);
                }
            }
            acc.into_iter().map(|v| (v % p) as Fq).collect()
        } else {
            let mut out = vec![0; len];
            for (i, &x) in a.iter().enumerate().take(len) {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate().take(len - i) {
                    out[i + j] = f.add(out[i + j], f.mul(x, y));
                }
            }
            out
        }
    }

    pub fn pow(&self, a: &Series, k: u64) -> Series {
        let mut acc = Series::one();
        let mut base = a.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Inverse by back-substitution on the unit part.
    ///
    /// Needs an exact valuation. An exact input must be a monomial (its
    /// inverse is then exact); anything else must carry a cap, and the result
    /// keeps the same relative precision.
    pub fn inv(&self, a: &Series) -> Result<Series> {
        let v = a.valuation().exact().ok_or_else(|| {
            Error::InsufficientPrecision(format!("cannot invert a series with valuation {}", a.valuation()))
        })?;
        let f = &*self.fq;
        let a0_inv = f.inv(a.coeffs[0]).expect("leading coefficient is nonzero");
        let rel = match a.cap {
            None if a.coeffs.len() == 1 => return Ok(Series::monomial(a0_inv, -v)),
            None => {
                return Err(Error::InsufficientPrecision(
                    "exact non-monomial series has no finite inverse; truncate it first".into(),
                ))
            }
            Some(c) => (c - v) as usize,
        };
        let mut out = vec![0 as Fq; rel];
        out[0] = a0_inv;
        for k in 1..rel {
            let mut s = 0;
            for i in 1..=k.min(a.coeffs.len() - 1) {
                s = f.add(s, f.mul(a.coeffs[i], out[k - i]));
            }
            out[k] = f.neg(f.mul(a0_inv, s));
        }
        Ok(Series::new(-v, out, Some(-v + rel as i64)))
    }

    /// Inverse of an exact series, truncating to `rel` significant terms first.
    pub fn inv_rel(&self, a: &Series, rel: i64) -> Result<Series> {
        if a.is_exact() && a.coeffs.len() == 1 {
            return self.inv(a);
        }
        self.inv(&a.with_relative_precision(rel))
    }

    pub fn format(&self, a: &Series) -> String {
        let f = &*self.fq;
        let show = |c: Fq| {
            if f.is_prime_field() {
                c.to_string()
            } else {
                format!("{:?}", f.coeffs(c))
            }
        };
        let mut parts: Vec<String> = a
            .terms()
            .map(|(k, c)| match k {
                0 => show(c),
                1 => format!("{}*t", show(c)),
                _ => format!("{}*t^{}", show(c), k),
            })
            .collect();
        if parts.is_empty() {
            parts.push("0".into());
        }
        let mut s = parts.join(" + ");
        if let Some(c) = a.cap {
            s.push_str(&format!(" + O(t^{c})"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(p: u32) -> LocalField {
        LocalField::new(FiniteField::new(p, 1).unwrap())
    }

    fn poly(k: &LocalField, val: i64, c: &[i64]) -> Series {
        Series::new(val, c.iter().map(|&x| k.residue_field().from_int(x)).collect(), None)
    }

    #[test]
    fn add_cancels_and_respects_characteristic() {
        let k = field(3);
        let t = poly(&k, 1, &[1]);
        assert_eq!(k.add(&t, &k.neg(&t)).valuation(), Valuation::Infinite);
        let capped = t.truncate(10);
        assert_eq!(k.add(&capped, &k.neg(&t)).valuation(), Valuation::AtLeast(10));

        let k2 = field(2);
        let a = poly(&k2, 0, &[1, 1]);
        let b = poly(&k2, 1, &[1]);
        assert_eq!(k2.add(&a, &b), Series::one());
        let k3 = field(3);
        let sum = k3.add(&poly(&k3, 0, &[1, 1]), &poly(&k3, 1, &[1]));
        assert_eq!(sum, poly(&k3, 0, &[1, 2]));
    }

    #[test]
    fn add_takes_min_cap() {
        let k = field(5);
        let a = poly(&k, 0, &[1, 2, 3]).truncate(10);
        let b = poly(&k, 2, &[1]).truncate(5);
        assert_eq!(k.add(&a, &b).cap(), Some(5));
    }

    #[test]
    fn mul_examples() {
        let k = field(3);
        let a = poly(&k, 1, &[1, 1]);
        let b = poly(&k, -1, &[1]);
        assert_eq!(k.mul(&a, &b), poly(&k, 0, &[1, 1]));
        let a = poly(&k, 2, &[1, 2]).truncate(6);
        let b = poly(&k, 3, &[2, 1]).truncate(7);
        let ab = k.mul(&a, &b);
        assert_eq!(ab.valuation(), Valuation::Exact(5));
        // min(6 + 3, 7 + 2)
        assert_eq!(ab.cap(), Some(9));
    }

    #[test]
    fn mul_by_hidden_zero_degrades_cap() {
        let k = field(3);
        let z = Series::zero_to(4);
        let b = poly(&k, -2, &[1, 1]);
        assert_eq!(k.mul(&z, &b).valuation(), Valuation::AtLeast(2));
    }

    #[test]
    fn inverse_examples() {
        let k = field(3);
        let a = poly(&k, 0, &[1, 1]).truncate(6);
        let inv = k.inv(&a).unwrap();
        // 1 - t + t^2 - ... = 1 + 2t + t^2 + 2t^3 ... over F_3
        assert_eq!(inv, Series::new(0, vec![1, 2, 1, 2, 1, 2], Some(6)));
        assert_eq!(k.inv(&poly(&k, 2, &[1])).unwrap(), poly(&k, -2, &[1]));
        assert!(matches!(k.inv(&Series::zero_to(7)), Err(Error::InsufficientPrecision(_))));
        assert!(k.inv(&poly(&k, 0, &[1, 1])).is_err());
    }

    #[test]
    fn valuation_examples() {
        let k = field(5);
        assert_eq!(poly(&k, 3, &[1, 0, 1]).valuation(), Valuation::Exact(3));
        assert_eq!(Series::zero_to(7).valuation(), Valuation::AtLeast(7));
        let unit = poly(&k, 0, &[3, 1, 4]);
        assert_eq!(k.mul(&unit, &poly(&k, 4, &[1])).valuation(), Valuation::Exact(4));
    }

    #[test]
    fn min_of_distinct_respects_truncation() {
        use Valuation::*;
        assert_eq!(Valuation::min_of_distinct([Exact(3), Exact(5)]), Exact(3));
        assert_eq!(Valuation::min_of_distinct([Exact(3), AtLeast(4)]), Exact(3));
        assert_eq!(Valuation::min_of_distinct([Exact(5), AtLeast(4)]), AtLeast(4));
        assert_eq!(Valuation::min_of_distinct([Infinite, Infinite]), Infinite);
    }

    fn arb_series(p: u32) -> impl Strategy<Value = Series> {
        (-4i64..4, prop::collection::vec(0..p as u16, 1..6), 1..p as u16)
            .prop_map(|(val, mut c, lead)| {
                c[0] = lead;
                Series::new(val, c, None)
            })
    }

    proptest! {
        #[test]
        fn valuation_is_additive_and_ultrametric(a in arb_series(3), b in arb_series(3)) {
            let k = field(3);
            let (va, vb) = (a.valuation().exact().unwrap(), b.valuation().exact().unwrap());
            prop_assert_eq!(k.mul(&a, &b).valuation(), Valuation::Exact(va + vb));
            let s = k.add(&a, &b).valuation();
            prop_assert_eq!(s.at_least(va.min(vb)), Some(true));
            if va != vb {
                prop_assert_eq!(s, Valuation::Exact(va.min(vb)));
            }
        }

        #[test]
        fn inverse_is_two_sided_to_cap(a in arb_series(5), rel in 1i64..20) {
            let k = field(5);
            let a = a.with_relative_precision(rel);
            let inv = k.inv(&a).unwrap();
            let prod = k.mul(&a, &inv);
            prop_assert!(prod.agrees_with(&Series::one()));
            prop_assert_eq!(prod.cap(), Some(rel));
        }

        #[test]
        fn larger_cap_keeps_exact_valuations(a in arb_series(2), b in arb_series(2), c1 in 1i64..6) {
            let k = field(2);
            let small = k.add(&a.with_relative_precision(c1), &b.with_relative_precision(c1));
            let large = k.add(&a.with_relative_precision(c1 + 6), &b.with_relative_precision(c1 + 6));
            if let Valuation::Exact(v) = small.valuation() {
                prop_assert_eq!(large.valuation(), Valuation::Exact(v));
            }
        }
    }
}
