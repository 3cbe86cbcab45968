//! The group algebra `K[G]`, coefficients indexed by automorphism index.

use crate::error::{Error, Result};
use crate::series::{Series, Valuation};
use crate::tower::{ExtElem, Extension};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupAlgebraElem {
    coeffs: Vec<Series>,
}

impl GroupAlgebraElem {
    pub fn zero(ext: &Extension) -> Self {
        GroupAlgebraElem { coeffs: vec![Series::zero(); ext.degree()] }
    }

    pub fn identity(ext: &Extension) -> Self {
        Self::sigma(ext, 0)
    }

    /// The group element with index `s`.
    pub fn sigma(ext: &Extension, s: usize) -> Self {
        let mut e = Self::zero(ext);
        e.coeffs[s] = Series::one();
        e
    }

    /// `T = sum_sigma sigma`.
    pub fn trace(ext: &Extension) -> Self {
        GroupAlgebraElem { coeffs: vec![Series::one(); ext.degree()] }
    }

    /// `sigma_j - 1` for the `j`-th standard generator (1-based).
    pub fn sigma_minus_one(ext: &Extension, j: usize) -> Self {
        let idx = (ext.p() as usize).pow(j as u32 - 1);
        Self::sigma(ext, idx).sub(ext, &Self::identity(ext))
    }

    pub fn from_coeffs(ext: &Extension, coeffs: Vec<Series>) -> Result<Self> {
        if coeffs.len() != ext.degree() {
            return Err(Error::Precondition(format!(
                "group algebra element needs {} coefficients, got {}",
                ext.degree(),
                coeffs.len()
            )));
        }
        Ok(GroupAlgebraElem { coeffs })
    }

    pub fn coeffs(&self) -> &[Series] {
        &self.coeffs
    }

    pub fn coeff(&self, s: usize) -> &Series {
        &self.coeffs[s]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Series::is_zero)
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(Series::is_exact)
    }

    pub fn add(&self, ext: &Extension, other: &Self) -> Self {
        let k = ext.base();
        GroupAlgebraElem { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| k.add(a, b)).collect() }
    }

    pub fn sub(&self, ext: &Extension, other: &Self) -> Self {
        let k = ext.base();
        GroupAlgebraElem { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| k.sub(a, b)).collect() }
    }

    /// Multiply by an element of `K`.
    pub fn scale(&self, ext: &Extension, c: &Series) -> Self {
        GroupAlgebraElem { coeffs: self.coeffs.iter().map(|a| ext.base().mul(c, a)).collect() }
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        GroupAlgebraElem { coeffs: self.coeffs.iter().map(|a| a.shift(k)).collect() }
    }

    /// Product in `K[G]` (convolution over the group).
    pub fn mul(&self, ext: &Extension, other: &Self) -> Self {
        let k = ext.base();
        let mut out = Self::zero(ext);
        for (s, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() && a.is_exact() {
                continue;
            }
            for (t, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() && b.is_exact() {
                    continue;
                }
                let slot = &mut out.coeffs[ext.compose_index(s, t)];
                *slot = k.add(slot, &k.mul(a, b));
            }
        }
        out
    }

    pub fn pow(&self, ext: &Extension, k: u64) -> Self {
        let mut acc = Self::identity(ext);
        for _ in 0..k {
            acc = acc.mul(ext, self);
        }
        acc
    }

    /// Coefficientwise power; the image of `beta^k` when `self = phi(beta)`.
    pub fn hadamard_pow(&self, ext: &Extension, k: u64) -> Self {
        GroupAlgebraElem { coeffs: self.coeffs.iter().map(|a| ext.base().pow(a, k)).collect() }
    }

    /// `sum_sigma c_sigma sigma(y)`.
    pub fn apply(&self, ext: &Extension, y: &ExtElem) -> ExtElem {
        let mut out = ext.zero();
        for (s, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() && c.is_exact() {
                continue;
            }
            out = ext.add(&out, &ext.scale(c, &ext.apply_sigma(s, y)));
        }
        out
    }

    /// Image of 1, i.e. the sum of the coefficients.
    pub fn augmentation(&self, ext: &Extension) -> Series {
        self.coeffs.iter().fold(Series::zero(), |acc, c| ext.base().add(&acc, c))
    }

    /// Smallest coefficient valuation.
    pub fn valuation(&self) -> Valuation {
        let mut best = Valuation::Infinite;
        for c in &self.coeffs {
            best = match (best, c.valuation()) {
                (Valuation::Infinite, v) | (v, Valuation::Infinite) => v,
                (a, b) => {
                    let (x, y) = (a.lower_bound().unwrap(), b.lower_bound().unwrap());
                    match (a, b) {
                        (Valuation::Exact(_), Valuation::Exact(_)) => Valuation::Exact(x.min(y)),
                        _ if x < y => a,
                        _ if y < x => b,
                        _ => Valuation::AtLeast(x),
                    }
                }
            };
        }
        best
    }

    pub fn format(&self, ext: &Extension) -> String {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !(c.is_zero() && c.is_exact()))
            .map(|(s, c)| format!("({})*s{}", ext.base().format(c), ext.automorphism(s)))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}
