//! Elementary abelian Artin-Schreier extensions `L = K(x_1, ..., x_n)` of
//! `K = F_q((t))`, with `x_j^p - x_j = u_j t^(-e_j)`.
//!
//! Elements of `L` are coefficient vectors over `K` in the monomial basis
//! `x_1^c_1 ... x_n^c_n`, `0 <= c_j < p`; a monomial index is the mixed-radix
//! number `c_1 + c_2 p + ... + c_n p^(n-1)`. The Galois group acts by
//! `x_j -> x_j + i_j`, so automorphisms are indexed the same way.
//!
//! Valuations are computed through a tower of *reduced* generators. At level
//! `j` the defining constant `u_j t^(-e_j)` is rewritten inside
//! `K_(j-1) = K(x_1, ..., x_(j-1))` by Artin-Schreier moves `w -> w - z^p + z`
//! until its valuation is prime to `p`; then `y_j = x_j - z` has valuation
//! `-beta_j` in `K_j`, and the products `y^b = y_1^b_1 ... y_n^b_n` have
//! pairwise distinct valuations mod `p^n`. Rewriting an element in the `y^b`
//! basis is a unitriangular substitution, so `v_L` and leading coefficients
//! come out exactly whenever the input coefficients are exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::digits::DigitTables;
use crate::error::{Error, Result};
use crate::fq::{FiniteField, Fq};
use crate::series::{LocalField, Series, Valuation};

fn default_unit() -> Vec<u32> {
    vec![1]
}

fn default_m() -> u32 {
    1
}

/// One Artin-Schreier generator: `x^p - x = unit * t^(-exponent)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub exponent: i64,
    /// Polynomial in `t` with nonzero constant term, constant term first;
    /// entries use the integer encoding of `F_q`.
    #[serde(default = "default_unit")]
    pub unit: Vec<u32>,
}

impl Generator {
    pub fn new(exponent: i64) -> Self {
        Generator { exponent, unit: default_unit() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    pub p: u32,
    #[serde(default = "default_m")]
    pub m: u32,
    pub generators: Vec<Generator>,
}

impl ExtensionSpec {
    /// Prime residue field, unit constants 1.
    pub fn simple(p: u32, exponents: &[i64]) -> Self {
        ExtensionSpec {
            p,
            m: 1,
            generators: exponents.iter().map(|&e| Generator::new(e)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }
}

/// Element of `L`, coordinates over `K` in the monomial basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtElem {
    coords: Vec<Series>,
}

impl ExtElem {
    pub fn coords(&self) -> &[Series] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Series::is_zero)
    }

    /// All coordinates are exact Laurent polynomials.
    pub fn is_exact(&self) -> bool {
        self.coords.iter().all(Series::is_exact)
    }
}

/// `(i_1, ..., i_n) in F_p^n`, acting by `x_j -> x_j + i_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Automorphism(pub Vec<u32>);

impl Automorphism {
    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamificationData {
    /// Lower breaks `b_1 <= ... <= b_n`, with multiplicity.
    pub breaks: Vec<i64>,
    /// Exponent of the different.
    pub different: i64,
    /// `d - p^n + 1`.
    pub i0: i64,
    /// `i_G(sigma) = v_L(sigma(pi_L) - pi_L)` by automorphism index; 0 for identity.
    pub i_g: Vec<i64>,
}

#[derive(Clone, Debug)]
struct Level {
    /// `y = x - z`, with `z` in the previous level.
    z: ExtElem,
    /// Powers `z^0 .. z^(p-1)`.
    z_pows: Vec<ExtElem>,
    y_pows: Vec<ExtElem>,
    /// `v_(K_j)(y_j) = -beta`.
    beta: i64,
    beta_inv: u32,
    /// Reduced Artin-Schreier constant: `y^p - y = omega`.
    omega: ExtElem,
}

/// A built extension: multiplication table, Galois action, reduced tower,
/// uniformizer and ramification invariants. Immutable after [`Extension::build`].
#[derive(Clone, Debug)]
pub struct Extension {
    spec: ExtensionSpec,
    k: LocalField,
    p: u32,
    n: usize,
    degree: usize,
    omega_prod: Vec<Series>,
    mul_table: Vec<Vec<(u32, u8)>>,
    galois: Vec<Vec<Vec<(u32, Fq)>>>,
    levels: Vec<Level>,
    uniformizer: ExtElem,
    ramification: RamificationData,
    digits: DigitTables,
    cap: i64,
}

fn binomial_table(p: u32) -> Vec<Vec<i64>> {
    let mut rows = vec![vec![1i64]];
    for a in 1..(2 * p as usize) {
        let prev = &rows[a - 1];
        let mut row = vec![1i64; a + 1];
        for b in 1..a {
            row[b] = (prev[b - 1] + prev[b]) % p as i64;
        }
        rows.push(row);
    }
    rows
}

impl Extension {
    /// Build `L/K` from its spec. `cap` is the relative working precision used
    /// whenever a non-monomial series has to be inverted.
    pub fn build(spec: &ExtensionSpec, cap: i64) -> Result<Extension> {
        let fq = FiniteField::new(spec.p, spec.m)?;
        let p = spec.p;
        let n = spec.n();
        if n == 0 {
            return Err(Error::Precondition("at least one generator is required".into()));
        }
        if cap < 1 {
            return Err(Error::InvalidSpec("working cap must be positive".into()));
        }
        let degree = (p as usize)
            .checked_pow(n as u32)
            .filter(|&d| d <= 729)
            .ok_or_else(|| Error::InvalidSpec(format!("degree {p}^{n} is too large")))?;

        let mut omegas = Vec::with_capacity(n);
        for (j, g) in spec.generators.iter().enumerate() {
            if g.exponent <= 0 || g.exponent % p as i64 == 0 {
                return Err(Error::InvalidSpec(format!(
                    "generator {}: exponent {} must be positive and prime to p",
                    j + 1,
                    g.exponent
                )));
            }
            let coeffs = g.unit.iter().map(|&c| fq.element(c)).collect::<Result<Vec<_>>>()?;
            if coeffs.first().copied().unwrap_or(0) == 0 {
                return Err(Error::InvalidSpec(format!(
                    "generator {}: unit must have nonzero constant term",
                    j + 1
                )));
            }
            omegas.push(Series::new(-g.exponent, coeffs, None));
        }
        let k = LocalField::new(fq);

        let mut omega_prod = vec![Series::one(); 1 << n];
        for mask in 1..(1usize << n) {
            let low = mask.trailing_zeros() as usize;
            omega_prod[mask] = k.mul(&omega_prod[mask & (mask - 1)], &omegas[low]);
        }

        let digit = |idx: usize, j: usize| (idx / (p as usize).pow(j as u32)) % p as usize;
        let pw = |j: usize| (p as usize).pow(j as u32);

        let mut mul_table = Vec::with_capacity(degree * degree);
        for a in 0..degree {
            for b in 0..degree {
                let mut terms: Vec<(u32, u8)> = vec![(0, 0)];
                for j in 0..n {
                    let s = digit(a, j) + digit(b, j);
                    let mut next = Vec::with_capacity(terms.len() * 2);
                    for &(idx, mask) in &terms {
                        if s < p as usize {
                            next.push((idx + (s * pw(j)) as u32, mask));
                        } else {
                            // x^s = x^(s-p+1) + omega x^(s-p)
                            next.push((idx + ((s - p as usize + 1) * pw(j)) as u32, mask));
                            next.push((idx + ((s - p as usize) * pw(j)) as u32, mask | (1 << j)));
                        }
                    }
                    terms = next;
                }
                mul_table.push(terms);
            }
        }

        let binom = binomial_table(p);
        let fqr = k.residue_field();
        let mut galois = Vec::with_capacity(degree);
        for s in 0..degree {
            let mut images = Vec::with_capacity(degree);
            for c in 0..degree {
                let mut terms: Vec<(u32, Fq)> = vec![(0, 1)];
                for j in 0..n {
                            let (cj, ij) = (digit(c, j), digit(s, j) as i64);
                    let mut next = Vec::new();
                    for &(idx, coef) in &terms {
                        for kk in 0..=cj {
                            let f = fqr.from_int(binom[cj][kk] * ij.pow((cj - kk) as u32));
                            if f != 0 {
                                next.push((idx + (kk * pw(j)) as u32, fqr.mul(coef, f)));
                            }
                        }
                    }
                    terms = next;
                }
                images.push(terms);
            }
            galois.push(images);
        }

        let mut ext = Extension {
            spec: spec.clone(),
            k,
            p,
            n,
            degree,
            omega_prod,
            mul_table,
            galois,
            levels: Vec::with_capacity(n),
            uniformizer: ExtElem { coords: Vec::new() },
            ramification: RamificationData { breaks: vec![], different: 0, i0: 0, i_g: vec![] },
            digits: DigitTables::new(p, n as u32),
            cap,
        };
        let zero = ext.zero();
        ext.uniformizer = zero;

        for level in 1..=n {
            ext.reduce_level(level, &omegas[level - 1])?;
        }

        // pi_j = y_j^a pi_(j-1)^b with -a beta + p b = 1
        let mut pi = ext.from_k(ext.k.uniformizer());
        for lv in &ext.levels {
            let a = ((p - lv.beta_inv) % p) as usize;
            let b = (1 + a as i64 * lv.beta) / p as i64;
            pi = ext.mul(&lv.y_pows[a], &ext.pow(&pi, b as u64));
        }
        let deg = degree as i64;
        match ext.v_l(&pi) {
            Valuation::Exact(1) => {}
            other => {
                return Err(Error::NotTotallyRamified(format!(
                    "candidate uniformizer has valuation {other}"
                )))
            }
        }
        let vt = ext.v_l(&ext.from_k(ext.k.uniformizer()));
        if vt != Valuation::Exact(deg) {
            return Err(Error::NotTotallyRamified(format!("v_L(t) = {vt}, expected {deg}")));
        }
        ext.uniformizer = pi;
        ext.ramification = ext.compute_ramification()?;
        ext.digits = DigitTables::new(p, n as u32).with_breaks(&ext.ramification.breaks)?;
        let b_top = ext.digits.bfun(degree - 1);
        if b_top != ext.ramification.i0 {
            return Err(Error::assertion("b(p^n - 1) = i_0", ext.ramification.i0, b_top));
        }
        Ok(ext)
    }

    fn reduce_level(&mut self, level: usize, omega: &Series) -> Result<()> {
        let p = self.p as i64;
        let below = level - 1;
        let mut w = self.from_k(omega.clone());
        let mut z = self.zero();
        let mut steps = 0;
        let beta = loop {
            let (v, _) = self.leading_in(below, &w)?;
            let v = match v {
                Valuation::Exact(v) => v,
                Valuation::Infinite => {
                    return Err(Error::NotTotallyRamified(format!(
                        "generator {level} lies in the compositum of the previous ones"
                    )))
                }
                Valuation::AtLeast(_) => {
                    return Err(Error::InsufficientPrecision(format!(
                        "reducing generator {level}"
                    )))
                }
            };
            if v >= 0 {
                return Err(Error::NotTotallyRamified(format!(
                    "generator {level} reduces to valuation {v} >= 0"
                )));
            }
            if v % p != 0 {
                break -v;
            }
            steps += 1;
            if steps > 64 + v.unsigned_abs() as usize {
                return Err(Error::NotTotallyRamified(format!(
                    "reduction of generator {level} did not terminate"
                )));
            }
            let lc = self.leading_in(below, &w)?.1.expect("exact valuation").1;
            let e = self.normalized_in(below, v / p);
            let ep = self.pow(&e, p as u64);
            let gamma = self.leading_in(below, &ep)?.1.expect("nonzero").1;
            let fq = self.k.residue_field();
            let c = fq.frobenius_inv(fq.div(lc, gamma).unwrap());
            let step = self.scale_fq(c, &e);
            w = self.add(&self.sub(&w, &self.pow(&step, p as u64)), &step);
            z = self.add(&z, &step);
        };
        let x = self.generator(level);
        let y = self.sub(&x, &z);
        let mut z_pows = vec![self.one()];
        let mut y_pows = vec![self.one()];
        for i in 1..self.p as usize {
            z_pows.push(self.mul(&z_pows[i - 1], &z));
            y_pows.push(self.mul(&y_pows[i - 1], &y));
        }
        debug_assert_eq!(self.sub(&self.mul(&y_pows[self.p as usize - 1], &y), &y), w);
        let beta_inv = (1..self.p)
            .find(|&c| (c as i64 * beta).rem_euclid(p) == 1)
            .expect("beta is prime to p");
        self.levels.push(Level { z, z_pows, y_pows, beta, beta_inv, omega: w });
        Ok(())
    }

    /// Coordinates of `y in K_level` in the reduced basis `y_1^b_1 ... y_level^b_level`.
    fn decompose(&self, y: &ExtElem, level: usize) -> Vec<Series> {
        if level == 0 {
            return vec![y.coords[0].clone()];
        }
        let p = self.p as usize;
        let stride = p.pow(level as u32 - 1);
        let lv = &self.levels[level - 1];
        let parts: Vec<ExtElem> = (0..p)
            .map(|a| {
                let mut c = self.zero();
                c.coords[..stride].clone_from_slice(&y.coords[a * stride..(a + 1) * stride]);
                c
            })
            .collect();
        let z_is_zero = lv.z.is_zero() && lv.z.is_exact();
        let binom = binomial_table(self.p);
        let mut out = Vec::with_capacity(stride * p);
        for b in 0..p {
            let d = if z_is_zero {
                parts[b].clone()
            } else {
                let mut d = self.zero();
                for a in b..p {
                    if parts[a].is_zero() && parts[a].is_exact() {
                        continue;
                    }
                    let c = self.k.residue_field().from_int(binom[a][b]);
                    let term = if a == b { parts[a].clone() } else { self.mul(&lv.z_pows[a - b], &parts[a]) };
                    d = self.add(&d, &self.scale_fq(c, &term));
                }
                d
            };
            out.extend(self.decompose(&d, level - 1));
        }
        out
    }

    /// `v_(K_level)` of the reduced monomial with digit vector encoded in `idx`.
    fn reduced_monomial_valuation(&self, level: usize, idx: usize) -> i64 {
        let p = self.p as i64;
        (0..level)
            .map(|i| {
                let b = (idx / (self.p as usize).pow(i as u32)) % self.p as usize;
                -(b as i64) * self.levels[i].beta * p.pow((level - 1 - i) as u32)
            })
            .sum()
    }

    /// Valuation in `K_level` and, when exact, the leading coefficient relative
    /// to [`Extension::normalized_element`].
    fn leading_in(&self, level: usize, y: &ExtElem) -> Result<(Valuation, Option<(usize, Fq)>)> {
        let coords = self.decompose(y, level);
        let scale = (self.p as i64).pow(level as u32);
        let terms: Vec<Valuation> = coords
            .iter()
            .enumerate()
            .map(|(idx, c)| match c.valuation() {
                Valuation::Exact(v) => Valuation::Exact(scale * v + self.reduced_monomial_valuation(level, idx)),
                Valuation::AtLeast(v) => {
                    Valuation::AtLeast(scale * v + self.reduced_monomial_valuation(level, idx))
                }
                Valuation::Infinite => Valuation::Infinite,
            })
            .collect();
        let v = Valuation::min_of_distinct(terms.iter().copied());
        let lead = v.exact().map(|v| {
            let idx = terms.iter().position(|&t| t == Valuation::Exact(v)).unwrap();
            (idx, coords[idx].leading_coeff().unwrap())
        });
        Ok((v, lead))
    }

    fn normalized_in(&self, level: usize, v: i64) -> ExtElem {
        if level == 0 {
            return self.from_k(Series::monomial(1, v));
        }
        let lv = &self.levels[level - 1];
        let p = self.p as i64;
        let b = (-v * lv.beta_inv as i64).rem_euclid(p);
        let w = (v + b * lv.beta) / p;
        self.mul(&lv.y_pows[b as usize], &self.normalized_in(level - 1, w))
    }

    fn compute_ramification(&self) -> Result<RamificationData> {
        let p = self.p as i64;
        let mut i_g = vec![0i64; self.degree];
        for s in 1..self.degree {
            let diff = self.sub(&self.apply_sigma(s, &self.uniformizer), &self.uniformizer);
            i_g[s] = self.v_l(&diff).exact().ok_or_else(|| {
                Error::InsufficientPrecision(format!("i_G of automorphism {}", self.automorphism(s)))
            })?;
        }
        let mut shifted: Vec<i64> = i_g[1..].iter().map(|v| v - 1).collect();
        shifted.sort_unstable();
        shifted.dedup();
        let log_p = |count: usize| -> Result<u32> {
            let mut size = count + 1;
            let mut e = 0;
            while size > 1 {
                if !size.is_multiple_of(self.p as usize) {
                    return Err(Error::assertion("ramification subgroup order is a power of p", "p^k", count + 1));
                }
                size /= self.p as usize;
                e += 1;
            }
            Ok(e)
        };
        let mut breaks = Vec::new();
        for (i, &b) in shifted.iter().enumerate() {
            let here = log_p(i_g[1..].iter().filter(|&&v| v > b).count())?;
            let next = match shifted.get(i + 1) {
                Some(&nb) => log_p(i_g[1..].iter().filter(|&&v| v > nb).count())?,
                None => 0,
            };
            for _ in next..here {
                breaks.push(b);
            }
        }
        if let Some(&b) = breaks.iter().find(|&&b| b % p == 0) {
            return Err(Error::PDividesBreak(b));
        }
        let different: i64 = i_g.iter().sum();
        Ok(RamificationData {
            breaks,
            different,
            i0: different - self.degree as i64 + 1,
            i_g,
        })
    }

    pub fn spec(&self) -> &ExtensionSpec {
        &self.spec
    }

    pub fn base(&self) -> &LocalField {
        &self.k
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `[L:K] = p^n`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    /// Same extension with another working cap.
    pub fn with_cap(&self, cap: i64) -> Extension {
        Extension { cap, ..self.clone() }
    }

    pub fn ramification(&self) -> &RamificationData {
        &self.ramification
    }

    pub fn breaks(&self) -> &[i64] {
        &self.ramification.breaks
    }

    pub fn i0(&self) -> i64 {
        self.ramification.i0
    }

    pub fn digits(&self) -> &DigitTables {
        &self.digits
    }

    /// The fixed uniformizer `pi_L` (`v_L = 1`).
    pub fn uniformizer(&self) -> &ExtElem {
        &self.uniformizer
    }

    /// Reduced Artin-Schreier generator of level `j` (1-based) and its break in `K_j`.
    pub fn reduced_generator(&self, j: usize) -> (&ExtElem, i64) {
        let lv = &self.levels[j - 1];
        (&lv.y_pows[1], lv.beta)
    }

    /// Reduced constant `omega_j` with `y_j^p - y_j = omega_j`.
    pub fn reduced_constant(&self, j: usize) -> &ExtElem {
        &self.levels[j - 1].omega
    }

    pub fn zero(&self) -> ExtElem {
        ExtElem { coords: vec![Series::zero(); self.degree] }
    }

    pub fn one(&self) -> ExtElem {
        self.from_k(Series::one())
    }

    /// Embed an element of `K`.
    pub fn from_k(&self, a: Series) -> ExtElem {
        let mut e = self.zero();
        e.coords[0] = a;
        e
    }

    /// Build from monomial-basis coordinates.
    pub fn from_coords(&self, coords: Vec<Series>) -> Result<ExtElem> {
        if coords.len() != self.degree {
            return Err(Error::Precondition(format!(
                "expected {} coordinates, got {}",
                self.degree,
                coords.len()
            )));
        }
        Ok(ExtElem { coords })
    }

    /// `x_j`, 1-based.
    pub fn generator(&self, j: usize) -> ExtElem {
        assert!((1..=self.n).contains(&j), "generator index out of range");
        let mut e = self.zero();
        e.coords[(self.p as usize).pow(j as u32 - 1)] = Series::one();
        e
    }

    /// The element of `K` if `y` lies in `K`.
    pub fn as_k(&self, y: &ExtElem) -> Option<Series> {
        y.coords[1..].iter().all(Series::is_zero).then(|| y.coords[0].clone())
    }

    pub fn add(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        ExtElem {
            coords: a.coords.iter().zip(&b.coords).map(|(x, y)| self.k.add(x, y)).collect(),
        }
    }

    pub fn neg(&self, a: &ExtElem) -> ExtElem {
        ExtElem { coords: a.coords.iter().map(|x| self.k.neg(x)).collect() }
    }

    pub fn sub(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        self.add(a, &self.neg(b))
    }

    /// Multiply by an element of `K`.
    pub fn scale(&self, c: &Series, a: &ExtElem) -> ExtElem {
        ExtElem { coords: a.coords.iter().map(|x| self.k.mul(c, x)).collect() }
    }

    pub fn scale_fq(&self, c: Fq, a: &ExtElem) -> ExtElem {
        ExtElem { coords: a.coords.iter().map(|x| self.k.scale(c, x)).collect() }
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, a: &ExtElem, k: i64) -> ExtElem {
        ExtElem { coords: a.coords.iter().map(|x| x.shift(k)).collect() }
    }

    pub fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let mut out = vec![Series::zero(); self.degree];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() && x.is_exact() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                if y.is_zero() && y.is_exact() {
                    continue;
                }
                let prod = self.k.mul(x, y);
                for &(idx, mask) in &self.mul_table[i * self.degree + j] {
                    let term = if mask == 0 {
                        prod.clone()
                    } else {
                        self.k.mul(&prod, &self.omega_prod[mask as usize])
                    };
                    let slot = &mut out[idx as usize];
                    *slot = self.k.add(slot, &term);
                }
            }
        }
        ExtElem { coords: out }
    }

    pub fn pow(&self, a: &ExtElem, k: u64) -> ExtElem {
        let mut acc = self.one();
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

    /// Inverse through the norm: `y^(-1) = prod_(sigma != 1) sigma(y) / N(y)`.
    /// The norm is inverted to the working cap.
    pub fn inv(&self, y: &ExtElem) -> Result<ExtElem> {
        let mut others = self.one();
        for s in 1..self.degree {
            others = self.mul(&others, &self.apply_sigma(s, y));
        }
        let norm = self.as_k(&self.mul(&others, y)).ok_or_else(|| {
            Error::assertion("norm lies in K", "element of K", "non-constant element")
        })?;
        let inv = self.k.inv_rel(&norm, self.cap)?;
        Ok(self.scale(&inv, &others))
    }

    /// `N_(L/K)(y)` as the product of conjugates.
    pub fn norm(&self, y: &ExtElem) -> Series {
        let mut acc = self.one();
        for s in 0..self.degree {
            acc = self.mul(&acc, &self.apply_sigma(s, y));
        }
        self.as_k(&acc).expect("norm lies in K")
    }

    /// `Tr_(L/K)(y)`.
    pub fn trace(&self, y: &ExtElem) -> Series {
        let mut acc = self.zero();
        for s in 0..self.degree {
            acc = self.add(&acc, &self.apply_sigma(s, y));
        }
        self.as_k(&acc).expect("trace lies in K")
    }

    /// Normalized valuation `v_L`.
    pub fn v_l(&self, y: &ExtElem) -> Valuation {
        self.leading_in(self.n, y).map(|(v, _)| v).expect("decomposition is infallible")
    }

    /// `(v_L(y), c)` with `y = c * normalized_element(v_L(y)) + (higher terms)`.
    pub fn leading(&self, y: &ExtElem) -> Option<(i64, Fq)> {
        let (v, lead) = self.leading_in(self.n, y).ok()?;
        Some((v.exact()?, lead?.1))
    }

    /// Canonical element of valuation `v`: a reduced monomial times a power of `t`.
    /// Satisfies `normalized_element(v + p^n) = t * normalized_element(v)`.
    pub fn normalized_element(&self, v: i64) -> ExtElem {
        self.normalized_in(self.n, v)
    }

    pub fn automorphism(&self, idx: usize) -> Automorphism {
        let p = self.p as usize;
        Automorphism((0..self.n).map(|j| ((idx / p.pow(j as u32)) % p) as u32).collect())
    }

    pub fn automorphism_index(&self, sigma: &Automorphism) -> Result<usize> {
        if sigma.0.len() != self.n || sigma.0.iter().any(|&c| c >= self.p) {
            return Err(Error::Precondition(format!("{sigma} is not an element of F_{}^{}", self.p, self.n)));
        }
        Ok(sigma.0.iter().rev().fold(0usize, |acc, &c| acc * self.p as usize + c as usize))
    }

    pub fn automorphisms(&self) -> impl Iterator<Item = Automorphism> + '_ {
        (0..self.degree).map(|i| self.automorphism(i))
    }

    /// Index of `sigma tau` (componentwise sum).
    pub fn compose_index(&self, s: usize, t: usize) -> usize {
        let p = self.p as usize;
        let mut out = 0;
        let mut scale = 1;
        let (mut s, mut t) = (s, t);
        for _ in 0..self.n {
            out += ((s % p + t % p) % p) * scale;
            s /= p;
            t /= p;
            scale *= p;
        }
        out
    }

    pub fn apply_automorphism(&self, sigma: &Automorphism, y: &ExtElem) -> Result<ExtElem> {
        Ok(self.apply_sigma(self.automorphism_index(sigma)?, y))
    }

    /// Apply the automorphism with index `s`.
    pub fn apply_sigma(&self, s: usize, y: &ExtElem) -> ExtElem {
        if s == 0 {
            return y.clone();
        }
        let mut out = vec![Series::zero(); self.degree];
        for (c, x) in y.coords.iter().enumerate() {
            if x.is_zero() && x.is_exact() {
                continue;
            }
            for &(idx, f) in &self.galois[s][c] {
                let slot = &mut out[idx as usize];
                *slot = self.k.add(slot, &self.k.scale(f, x));
            }
        }
        ExtElem { coords: out }
    }

    /// Default `lambda_t = t^floor(t / p^n) pi_L^(t mod p^n)`.
    pub fn lambda_family(&self) -> LambdaFamily {
        LambdaFamily::new(self, None).expect("unit multiples of 1 are valid")
    }

    pub fn format(&self, y: &ExtElem) -> String {
        let mut parts = Vec::new();
        for (idx, c) in y.coords.iter().enumerate() {
            if c.is_zero() && c.is_exact() {
                continue;
            }
            let mono: Vec<String> = self
                .automorphism(idx)
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| if e == 1 { format!("x{}", j + 1) } else { format!("x{}^{e}", j + 1) })
                .collect();
            let coeff = self.k.format(c);
            if mono.is_empty() {
                parts.push(coeff);
            } else {
                parts.push(format!("({coeff})*{}", mono.join("*")));
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// `lambda_t = t^floor(t / p^n) * hat_(t mod p^n)`, `hat_r = u_r pi_L^r`.
/// Valuations are `t` and `lambda_(t1) / lambda_(t2) in K` whenever
/// `t1 = t2 mod p^n`.
#[derive(Clone, Debug)]
pub struct LambdaFamily {
    hat: Vec<ExtElem>,
    degree: i64,
}

impl LambdaFamily {
    /// `units[r]` must be exact units of `O_K` (default all 1).
    pub fn new(ext: &Extension, units: Option<&[Series]>) -> Result<Self> {
        let mut hat = Vec::with_capacity(ext.degree);
        let mut pow = ext.one();
        for r in 0..ext.degree {
            let h = match units {
                Some(u) => {
                    let u = u.get(r).ok_or_else(|| {
                        Error::Precondition(format!("need {} unit multipliers", ext.degree))
                    })?;
                    if u.valuation() != Valuation::Exact(0) || !u.is_exact() {
                        return Err(Error::Precondition(format!("multiplier {r} is not an exact unit")));
                    }
                    ext.scale(u, &pow)
                }
                None => pow.clone(),
            };
            hat.push(h);
            pow = ext.mul(&pow, ext.uniformizer());
        }
        Ok(LambdaFamily { hat, degree: ext.degree as i64 })
    }

    pub fn lambda(&self, ext: &Extension, t: i64) -> ExtElem {
        let q = t.div_euclid(self.degree);
        let r = t.rem_euclid(self.degree) as usize;
        ext.shift(&self.hat[r], q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(p: u32, e: &[i64]) -> Extension {
        Extension::build(&ExtensionSpec::simple(p, e), 32).unwrap()
    }

    #[test]
    fn degree_three_example() {
        let ext = build(3, &[1]);
        assert_eq!(ext.degree(), 3);
        assert_eq!(ext.v_l(&ext.generator(1)), Valuation::Exact(-1));
        assert_eq!(ext.v_l(&ext.from_k(ext.base().uniformizer())), Valuation::Exact(3));
        assert_eq!(ext.v_l(&ext.one()), Valuation::Exact(0));
        // pi_L = x^2 t
        let x = ext.generator(1);
        let expected = ext.shift(&ext.mul(&x, &x), 1);
        assert_eq!(ext.uniformizer(), &expected);
        let r = ext.ramification();
        assert_eq!((r.breaks.clone(), r.different, r.i0), (vec![1], 4, 2));
    }

    #[test]
    fn degree_two_example() {
        let ext = build(2, &[1]);
        let x = ext.generator(1);
        assert_eq!(ext.uniformizer(), &ext.shift(&x, 1));
        let r = ext.ramification();
        assert_eq!((r.breaks.clone(), r.different, r.i0), (vec![1], 2, 1));
    }

    #[test]
    fn degree_four_needs_reduction() {
        let ext = build(2, &[1, 5]);
        assert_eq!(ext.degree(), 4);
        // x_2 alone has even valuation; the reduced generator has valuation -9
        assert_eq!(ext.v_l(&ext.generator(2)), Valuation::Exact(-10));
        let (y2, beta) = ext.reduced_generator(2);
        assert_eq!(beta, 9);
        assert_eq!(ext.v_l(y2), Valuation::Exact(-9));
        assert_eq!(ext.breaks(), &[1, 9]);
        assert_eq!(ext.i0().rem_euclid(4), 3);
        for &b in ext.breaks() {
            assert_eq!((b + ext.i0()).rem_euclid(4), 0);
        }
    }

    #[test]
    fn equal_exponents_need_independent_units() {
        let spec = ExtensionSpec::simple(2, &[3, 3]);
        assert!(matches!(Extension::build(&spec, 16), Err(Error::NotTotallyRamified(_))));
        let spec = ExtensionSpec {
            p: 2,
            m: 2,
            generators: vec![Generator { exponent: 3, unit: vec![1] }, Generator { exponent: 3, unit: vec![2] }],
        };
        let ext = Extension::build(&spec, 16).unwrap();
        assert_eq!(ext.breaks(), &[3, 3]);
    }

    #[test]
    fn rejects_exponent_divisible_by_p() {
        assert!(Extension::build(&ExtensionSpec::simple(3, &[3]), 16).is_err());
        assert!(Extension::build(&ExtensionSpec::simple(3, &[]), 16).is_err());
    }

    #[test]
    fn automorphisms_act_as_expected() {
        let ext = build(2, &[3]);
        let x = ext.generator(1);
        let s = Automorphism(vec![1]);
        let sx = ext.apply_automorphism(&s, &x).unwrap();
        assert_eq!(sx, ext.add(&x, &ext.one()));
        assert_eq!(ext.apply_automorphism(&s, &sx).unwrap(), x);
        let id = Automorphism(vec![0]);
        assert_eq!(ext.apply_automorphism(&id, &x).unwrap(), x);
        let c = ext.from_k(Series::new(-2, vec![1, 1], None));
        assert_eq!(ext.apply_automorphism(&s, &c).unwrap(), c);
    }

    #[test]
    fn automorphisms_are_ring_maps() {
        let ext = build(3, &[1, 4]);
        let a = ext.add(&ext.generator(1), &ext.shift(&ext.generator(2), 1));
        let b = ext.mul(&ext.generator(2), &ext.generator(2));
        for s in 0..ext.degree() {
            let lhs = ext.apply_sigma(s, &ext.mul(&a, &b));
            let rhs = ext.mul(&ext.apply_sigma(s, &a), &ext.apply_sigma(s, &b));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn valuation_matches_norm() {
        for (p, e) in [(2, vec![3]), (3, vec![2]), (2, vec![1, 3]), (3, vec![1, 4])] {
            let ext = build(p, &e);
            let samples = [
                ext.generator(1),
                ext.add(&ext.generator(1), &ext.shift(&ext.one(), -3)),
                ext.uniformizer().clone(),
                ext.mul(ext.uniformizer(), &ext.generator(e.len())),
                ext.sub(&ext.generator(e.len()), &ext.shift(&ext.generator(1), -1)),
            ];
            for y in samples {
                let v = ext.v_l(&y).exact().unwrap();
                assert_eq!(ext.norm(&y).valuation(), Valuation::Exact(v), "p={p}, e={e:?}");
            }
        }
    }

    #[test]
    fn truncated_zero_coordinates_bound_the_valuation() {
        let ext = build(3, &[1, 4]);
        let mut coords = vec![Series::zero(); 9];
        coords[0] = Series::zero_to(1);
        coords[3] = Series::monomial(1, 3);
        let y = ext.from_coords(coords).unwrap();
        let exact = ext.v_l(&ext.shift(&ext.generator(2), 3)).exact().unwrap();
        match ext.v_l(&y) {
            Valuation::AtLeast(c) => assert!(c <= 9 && c < exact),
            v => panic!("expected a lower bound, got {v:?}"),
        }
    }

    #[test]
    fn lambda_family_has_the_right_valuations() {
        let ext = build(2, &[1, 5]);
        let fam = ext.lambda_family();
        assert_eq!(fam.lambda(&ext, 0), ext.one());
        assert_eq!(fam.lambda(&ext, 4), ext.from_k(ext.base().uniformizer()));
        for t in -8..=8 {
            assert_eq!(ext.v_l(&fam.lambda(&ext, t)), Valuation::Exact(t));
        }
    }

    #[test]
    fn inverse_to_cap() {
        let ext = build(3, &[2]);
        let y = ext.add(&ext.generator(1), &ext.one());
        let inv = ext.inv(&y).unwrap();
        let prod = ext.mul(&y, &inv);
        assert!(prod.coords()[0].agrees_with(&Series::one()));
        assert!(prod.coords()[1..].iter().all(|c| c.is_zero()));
    }
}
