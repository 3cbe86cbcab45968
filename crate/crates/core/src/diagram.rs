//! Ramification diagrams of elements `xi in K[G]`.
//!
//! The diagram of `beta` with `phi(beta) = xi` is read off from the profile
//! `f_xi(a) = min { v_L(xi(y)) : v_L(y) >= a }`: `[a, b]` lies in `D` iff
//! `f_xi(-b - i_0) <= a`, and the minimal elements are the jumps of `f_xi`.
//! Since `{lambda_t : a <= t < a + p^n}` is an `O_K`-basis of `M_L^a`, the
//! minimum over `M_L^a` is attained on that window.
//!
//! The tensor side (`L (x)_K L`, the map `phi` and its inverse) is kept for
//! cross-checking the profile-based computation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group_algebra::GroupAlgebraElem;
use crate::series::{LocalField, Series, Valuation};
use crate::tower::{ExtElem, Extension, LambdaFamily};

/// `[a, b]` in `(Z x Z) / <(p^n, -p^n)>`, stored with `0 <= b < p^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coset {
    pub a: i64,
    pub b: i64,
}

impl Coset {
    pub fn new(a: i64, b: i64, pn: i64) -> Coset {
        let k = b.div_euclid(pn);
        Coset { a: a + k * pn, b: b - k * pn }
    }

    pub fn sum(&self) -> i64 {
        self.a + self.b
    }
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.a, self.b)
    }
}

impl Serialize for Coset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a, self.b].serialize(s)
    }
}

/// `[a, b] <= [c, d]`: some representative `(c', d')` of `[c, d]` has
/// `a <= c'` and `b <= d'`.
pub fn coset_le(pn: i64, x: (i64, i64), y: (i64, i64)) -> bool {
    let (a, b) = x;
    let (c, d) = y;
    // need k with a <= c + k pn and b <= d - k pn
    let lo = (a - c).div_euclid(pn) + i64::from((a - c).rem_euclid(pn) != 0);
    let hi = (d - b).div_euclid(pn);
    lo <= hi
}

/// `[a,b] !<= [c,d]` iff `[c+1, d-p^n+1] <= [a,b]`.
pub fn coset_complement_rule(pn: i64, x: (i64, i64), y: (i64, i64)) -> bool {
    let lhs = !coset_le(pn, x, y);
    let rhs = coset_le(pn, (y.0 + 1, y.1 - pn + 1), x);
    lhs == rhs
}

/// Certified precision: a nonnegative integer or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precision {
    Finite(i64),
    Infinite,
}

impl Precision {
    pub fn at_least(self, c: i64) -> bool {
        match self {
            Precision::Finite(v) => v >= c,
            Precision::Infinite => true,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Precision::Infinite
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Finite(v) => write!(f, "{v}"),
            Precision::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Precision {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Precision::Finite(v) => s.serialize_i64(*v),
            Precision::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Smallest of a set of valuations, when it is determined.
pub(crate) fn min_valuation(vals: impl IntoIterator<Item = Valuation>) -> Valuation {
    let mut exact: Option<i64> = None;
    let mut hidden: Option<i64> = None;
    for v in vals {
        match v {
            Valuation::Exact(x) => exact = Some(exact.map_or(x, |e| e.min(x))),
            Valuation::AtLeast(c) => hidden = Some(hidden.map_or(c, |h| h.min(c))),
            Valuation::Infinite => {}
        }
    }
    match (exact, hidden) {
        (Some(e), Some(h)) if e <= h => Valuation::Exact(e),
        (Some(e), None) => Valuation::Exact(e),
        (_, Some(h)) => Valuation::AtLeast(h),
        (None, None) => Valuation::Infinite,
    }
}

/// `f_xi(a)`, evaluated directly on the window `lambda_a, ..., lambda_(a+p^n-1)`.
pub fn f_xi(ext: &Extension, fam: &LambdaFamily, xi: &GroupAlgebraElem, a: i64) -> Valuation {
    let pn = ext.degree() as i64;
    min_valuation((a..a + pn).map(|t| ext.v_l(&xi.apply(ext, &fam.lambda(ext, t)))))
}

/// `f_xi` with `v_L(xi(lambda_r))` cached for one period.
#[derive(Clone, Debug)]
pub struct Profile {
    pn: i64,
    g: Vec<Valuation>,
}

impl Profile {
    pub fn new(ext: &Extension, fam: &LambdaFamily, xi: &GroupAlgebraElem) -> Result<Profile> {
        if xi.is_zero() {
            return Err(Error::Precondition("xi must be nonzero".into()));
        }
        let g = (0..ext.degree() as i64)
            .map(|r| ext.v_l(&xi.apply(ext, &fam.lambda(ext, r))))
            .collect();
        Ok(Profile { pn: ext.degree() as i64, g })
    }

    /// `v_L(xi(lambda_t))`.
    pub fn image_valuation(&self, t: i64) -> Valuation {
        self.g[t.rem_euclid(self.pn) as usize].shift(self.pn * t.div_euclid(self.pn))
    }

    pub fn f(&self, a: i64) -> Valuation {
        min_valuation((a..a + self.pn).map(|t| self.image_valuation(t)))
    }

    fn f_exact(&self, a: i64) -> Result<i64> {
        self.f(a)
            .exact()
            .ok_or_else(|| Error::InsufficientPrecision(format!("f_xi({a}) is hidden by truncation")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagram {
    /// Minimal elements, sorted by normalized `b`.
    pub g: Vec<Coset>,
    pub d: i64,
    /// Diagonal: the elements of `g` with `a + b = d`.
    pub n: Vec<Coset>,
    /// `min { a + b - d : [a,b] in G \ N }`, infinite if `G = N`.
    pub precision: Precision,
}

impl Diagram {
    pub fn contains(&self, pn: i64, x: (i64, i64)) -> bool {
        self.g.iter().any(|c| coset_le(pn, (c.a, c.b), x))
    }

    pub fn is_diagonal(&self) -> bool {
        self.g == self.n
    }
}

/// Minimal elements `G(beta)` from the jumps of `f_xi`.
pub fn big_g(ext: &Extension, fam: &LambdaFamily, xi: &GroupAlgebraElem) -> Result<Diagram> {
    let prof = Profile::new(ext, fam, xi)?;
    diagram_from_profile(ext, &prof)
}

pub fn diagram_from_profile(ext: &Extension, prof: &Profile) -> Result<Diagram> {
    let pn = ext.degree() as i64;
    let i0 = ext.i0();
    let mut g = Vec::new();
    let mut prev = prof.f_exact(0)?;
    for m in 0..pn {
        let next = prof.f_exact(m + 1)?;
        if prev < next {
            g.push(Coset::new(prev, -m - i0, pn));
        }
        prev = next;
    }
    g.sort_by_key(|c| (c.b, c.a));
    let d = g.iter().map(Coset::sum).min().expect("a nonzero xi has a nonempty diagram");
    let n: Vec<Coset> = g.iter().copied().filter(|c| c.sum() == d).collect();
    let precision = g
        .iter()
        .filter(|c| c.sum() != d)
        .map(|c| c.sum() - d)
        .min()
        .map_or(Precision::Infinite, Precision::Finite);
    Ok(Diagram { g, d, n, precision })
}

/// `[a, b] in D(beta)` iff `f_xi(-b - i_0) <= a`.
pub fn big_d_member(ext: &Extension, fam: &LambdaFamily, xi: &GroupAlgebraElem, x: (i64, i64)) -> Result<bool> {
    match f_xi(ext, fam, xi, -x.1 - ext.i0()) {
        Valuation::Exact(f) => Ok(f <= x.0),
        Valuation::AtLeast(c) if c > x.0 => Ok(false),
        v => Err(Error::InsufficientPrecision(format!("f_xi({}) = {v}", -x.1 - ext.i0()))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessVerdict {
    pub semistable: bool,
    pub stable: bool,
    pub diagram: Diagram,
    /// Reasons a verdict is negative.
    pub notes: Vec<String>,
}

pub fn classify(ext: &Extension, diagram: Diagram) -> WitnessVerdict {
    let p = ext.p() as i64;
    let mut notes = Vec::new();
    if diagram.d.rem_euclid(p) == 0 {
        notes.push(format!("p divides d = {}", diagram.d));
    }
    if diagram.n.len() != 2 {
        notes.push(format!("|N| = {}, not 2", diagram.n.len()));
    }
    let semistable = notes.is_empty();
    let stable = semistable && diagram.is_diagonal();
    if semistable && !stable {
        notes.push(format!("G != N (precision {})", diagram.precision));
    }
    WitnessVerdict { semistable, stable, diagram, notes }
}

/// Semistability test for `xi`: `p` does not divide `d` and `|N| = 2`.
pub fn is_semistable_witness(ext: &Extension, fam: &LambdaFamily, xi: &GroupAlgebraElem) -> Result<WitnessVerdict> {
    Ok(classify(ext, big_g(ext, fam, xi)?))
}

/// Semistable and `G = N`.
pub fn is_stable_witness(ext: &Extension, fam: &LambdaFamily, xi: &GroupAlgebraElem) -> Result<bool> {
    Ok(is_semistable_witness(ext, fam, xi)?.stable)
}

/// `h in [0, p^n)` with `h = i_0 (mod p^n)`.
pub fn h_of(ext: &Extension) -> i64 {
    ext.i0().rem_euclid(ext.degree() as i64)
}

/// Shift a semistable witness by a power of `t` so that `N = {[h,0],[0,h]}`.
pub fn normalize_witness(ext: &Extension, fam: &LambdaFamily, xi: &GroupAlgebraElem) -> Result<GroupAlgebraElem> {
    let verdict = is_semistable_witness(ext, fam, xi)?;
    if !verdict.semistable {
        return Err(Error::Precondition(format!("not a semistable witness: {}", verdict.notes.join("; "))));
    }
    let pn = ext.degree() as i64;
    let h = h_of(ext);
    let d = verdict.diagram.d;
    if (d - h).rem_euclid(pn) != 0 {
        return Err(Error::Precondition(format!("d = {d} is not congruent to i_0 = {} mod {pn}", ext.i0())));
    }
    let m = (d - h) / pn;
    let out = xi.shift(-m);
    let diag = big_g(ext, fam, &out)?;
    let expected = expected_diagonal(pn, h);
    if diag.n != expected {
        let found: Vec<String> = diag.n.iter().map(Coset::to_string).collect();
        return Err(Error::DiagonalShape(format!(
            "N = {{{}}}, expected {{[{h},0],[0,{h}]}}",
            found.join(",")
        )));
    }
    Ok(out)
}

/// `{[d,0],[0,d]}` normalized and sorted like a diagram.
pub fn expected_diagonal(pn: i64, d: i64) -> Vec<Coset> {
    let set: BTreeSet<(i64, i64)> = [Coset::new(d, 0, pn), Coset::new(0, d, pn)]
        .into_iter()
        .map(|c| (c.b, c.a))
        .collect();
    set.into_iter().map(|(b, a)| Coset { a, b }).collect()
}

/// Finite formal sum `sum a_k (x) b_k` in `L (x)_K L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorElem {
    pub terms: Vec<(ExtElem, ExtElem)>,
}

impl TensorElem {
    pub fn new(terms: Vec<(ExtElem, ExtElem)>) -> Self {
        TensorElem { terms }
    }

    /// `(a (x) b)(c (x) d) = ac (x) bd`, extended bilinearly.
    pub fn mul(&self, ext: &Extension, other: &TensorElem) -> TensorElem {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, b) in &self.terms {
            for (c, d) in &other.terms {
                terms.push((ext.mul(a, c), ext.mul(b, d)));
            }
        }
        TensorElem { terms }
    }

    /// `phi(a (x) b) = sum_sigma a sigma(b) sigma`.
    pub fn phi(&self, ext: &Extension) -> PhiImage {
        let coeffs = (0..ext.degree())
            .map(|s| {
                self.terms
                    .iter()
                    .fold(ext.zero(), |acc, (a, b)| ext.add(&acc, &ext.mul(a, &ext.apply_sigma(s, b))))
            })
            .collect();
        PhiImage { coeffs }
    }
}

/// Element of `L[G]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiImage {
    pub coeffs: Vec<ExtElem>,
}

impl PhiImage {
    pub fn from_group_algebra(ext: &Extension, xi: &GroupAlgebraElem) -> PhiImage {
        PhiImage { coeffs: xi.coeffs().iter().map(|c| ext.from_k(c.clone())).collect() }
    }

    pub fn hadamard(&self, ext: &Extension, other: &PhiImage) -> PhiImage {
        PhiImage { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| ext.mul(a, b)).collect() }
    }

    /// Equality of every coordinate on the range where both are known.
    pub fn agrees_with(&self, other: &PhiImage) -> bool {
        self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| {
            a.coords().iter().zip(b.coords()).all(|(x, y)| x.agrees_with(y))
        })
    }

    /// The element of `K[G]` if every coefficient lies in `K`.
    pub fn to_group_algebra(&self, ext: &Extension) -> Option<GroupAlgebraElem> {
        let coeffs = self.coeffs.iter().map(|c| ext.as_k(c)).collect::<Option<Vec<_>>>()?;
        GroupAlgebraElem::from_coeffs(ext, coeffs).ok()
    }
}

/// The forward map `phi` on tensors.
pub fn phi_forward(ext: &Extension, beta: &TensorElem) -> PhiImage {
    beta.phi(ext)
}

/// Invert a square matrix over `K`, pivoting on the entry of least valuation.
fn invert_matrix(k: &LocalField, m: &[Vec<Series>], rel: i64) -> Result<Vec<Vec<Series>>> {
    let n = m.len();
    let mut a: Vec<Vec<Series>> = m.to_vec();
    let mut inv: Vec<Vec<Series>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Series::one() } else { Series::zero() }).collect()).collect();
    for col in 0..n {
        let mut best: Option<(usize, i64)> = None;
        for (row, r) in a.iter().enumerate().skip(col) {
            if let Valuation::Exact(v) = r[col].valuation() {
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((row, v));
                }
            }
        }
        let (pivot, _) = best.ok_or_else(|| {
            Error::InsufficientPrecision(format!("no pivot with exact valuation in column {col}"))
        })?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let pinv = k.inv_rel(&a[col][col], rel)?;
        a[col] = a[col].iter().map(|x| k.mul(&pinv, x)).collect();
        inv[col] = inv[col].iter().map(|x| k.mul(&pinv, x)).collect();
        for row in 0..n {
            if row == col || (a[row][col].is_zero() && a[row][col].is_exact()) {
                continue;
            }
            let f = a[row][col].clone();
            for j in 0..n {
                let da = k.mul(&f, &a[col][j]);
                a[row][j] = k.sub(&a[row][j], &da);
                let di = k.mul(&f, &inv[col][j]);
                inv[row][j] = k.sub(&inv[row][j], &di);
            }
        }
    }
    Ok(inv)
}

/// Recover `beta = sum_j c_j (x) pi_L^j` from `phi(beta)`.
///
/// With `w_j = pi_L^j` and `w_j*` the dual basis under the trace form,
/// `c_j = sum_sigma xi_sigma sigma(w_j*)`.
pub fn phi_inverse_oracle(ext: &Extension, xi: &PhiImage) -> Result<TensorElem> {
    let pn = ext.degree();
    let k = ext.base();
    let mut powers = vec![ext.one()];
    for j in 1..pn {
        powers.push(ext.mul(&powers[j - 1], ext.uniformizer()));
    }
    let gram: Vec<Vec<Series>> = (0..pn)
        .map(|i| (0..pn).map(|j| ext.trace(&ext.mul(&powers[i], &powers[j]))).collect())
        .collect();
    let ginv = invert_matrix(k, &gram, ext.cap())?;
    let mut terms = Vec::with_capacity(pn);
    for j in 0..pn {
        let dual = (0..pn).fold(ext.zero(), |acc, l| ext.add(&acc, &ext.scale(&ginv[j][l], &powers[l])));
        let c = (0..pn).fold(ext.zero(), |acc, s| {
            ext.add(&acc, &ext.mul(&xi.coeffs[s], &ext.apply_sigma(s, &dual)))
        });
        terms.push((c, powers[j].clone()));
    }
    Ok(TensorElem { terms })
}

/// Minimal elements of `R(beta)` for `beta = sum_j c_j (x) pi_L^j`:
/// `[v_L(c_j), j]` for the nonzero `c_j`. Hidden valuations are reported as
/// lower bounds (`AtLeast`).
pub fn tensor_support(ext: &Extension, beta: &TensorElem) -> Vec<(Valuation, i64)> {
    beta.terms
        .iter()
        .enumerate()
        .map(|(j, (c, _))| (ext.v_l(c), j as i64))
        .collect()
}
