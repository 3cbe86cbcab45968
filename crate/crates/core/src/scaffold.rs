//! Galois scaffolds: verification, the monomials `Psi^(s)`, construction from
//! a semistable witness, the witness `Psi^(p^n - 2)`, and the char-`p`
//! promotion to infinite precision.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagram::{self, expected_diagonal, h_of, Precision, WitnessVerdict};
use crate::error::{Error, Result};
use crate::group_algebra::GroupAlgebraElem;
use crate::series::{Series, Valuation};
use crate::tower::{ExtElem, Extension, LambdaFamily};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scaffold {
    /// `Psi_1, ..., Psi_n`.
    pub psi: Vec<GroupAlgebraElem>,
    /// Certified precision, once verified or promoted.
    pub precision: Option<Precision>,
    pub annotations: Vec<String>,
}

impl Scaffold {
    pub fn new(psi: Vec<GroupAlgebraElem>) -> Self {
        Scaffold { psi, precision: None, annotations: Vec::new() }
    }

    /// `Psi_j = sigma_j - 1` for the standard generators.
    pub fn sigma_minus_one(ext: &Extension) -> Self {
        Scaffold::new((1..=ext.n()).map(|j| GroupAlgebraElem::sigma_minus_one(ext, j)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub i: usize,
    pub t: i64,
    /// Whether digit `n - i` of `a(r(t))` is nonzero.
    pub active: bool,
    /// `v_L(Psi_i(lambda_t) - u lambda_(t+shift)) - (t + shift)`.
    pub margin: Precision,
    /// `u_it`, active cases only.
    #[serde(skip)]
    pub unit: Option<Series>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub certified_precision: i64,
    pub cases: Vec<CaseReport>,
    pub warnings: Vec<String>,
}

/// Outcome of matching `y` against `u * lambda_target` with `u in O_K^x`.
struct UnitMatch {
    margin: Precision,
    unit: Option<Series>,
}

/// Greedy search for `u` with `v_L(y - u lambda_target)` as large as possible,
/// up to `target + max_c`. The leading term must sit exactly at `target`.
fn match_unit(
    ext: &Extension,
    fam: &LambdaFamily,
    y: &ExtElem,
    target: i64,
    max_c: i64,
) -> std::result::Result<UnitMatch, String> {
    let pn = ext.degree() as i64;
    let base = fam.lambda(ext, target);
    let (_, base_lc) = ext.leading(&base).expect("lambda_t has exact valuation");
    let fq = ext.base().residue_field();
    let mut residual = y.clone();
    let mut unit = Series::zero();
    loop {
        match ext.v_l(&residual) {
            Valuation::Infinite => {
                return Ok(UnitMatch { margin: Precision::Infinite, unit: Some(unit) });
            }
            Valuation::AtLeast(c) => {
                if c - target >= max_c {
                    return Ok(UnitMatch { margin: Precision::Finite(c - target), unit: Some(unit) });
                }
                return Err(format!("valuation hidden below {c}"));
            }
            Valuation::Exact(v) => {
                if v < target {
                    return Err(format!("valuation {v} below {target}"));
                }
                if v > target && unit.is_zero() {
                    return Err(format!("valuation {v} above {target}: no unit multiple"));
                }
                if v - target >= max_c || (v - target).rem_euclid(pn) != 0 {
                    return Ok(UnitMatch { margin: Precision::Finite(v - target), unit: Some(unit) });
                }
                let k = (v - target) / pn;
                let (_, lc) = ext.leading(&residual).expect("exact valuation");
                let c = fq.div(lc, base_lc).expect("nonzero");
                let term = Series::monomial(c, k);
                residual = ext.sub(&residual, &ext.scale(&term, &base));
                unit = ext.base().add(&unit, &term);
            }
        }
    }
}

fn inactive_margin(ext: &Extension, y: &ExtElem, target: i64, max_c: i64) -> std::result::Result<Precision, String> {
    match ext.v_l(y) {
        Valuation::Infinite => Ok(Precision::Infinite),
        Valuation::Exact(v) => Ok(Precision::Finite(v - target)),
        Valuation::AtLeast(c) if c - target >= max_c => Ok(Precision::Finite(c - target)),
        Valuation::AtLeast(c) => Err(format!("valuation hidden below {c}")),
    }
}

fn capped(margin: Precision, max_c: i64) -> i64 {
    match margin {
        Precision::Finite(m) => m.min(max_c),
        Precision::Infinite => max_c,
    }
}

/// Check the scaffold congruences over one period of `t` and return the
/// largest precision `c <= max_c` for which all of them hold.
pub fn verify_scaffold(ext: &Extension, fam: &LambdaFamily, psi: &[GroupAlgebraElem], max_c: i64) -> Result<VerifyReport> {
    let n = ext.n();
    if psi.len() != n {
        return Err(Error::Precondition(format!("expected {n} elements Psi_i, got {}", psi.len())));
    }
    if max_c < 1 {
        return Err(Error::Precondition("max_c must be at least 1".into()));
    }
    let digits = ext.digits();
    let pn = ext.degree() as i64;
    let jobs: Vec<(usize, i64)> = (1..=n).flat_map(|i| (0..pn).map(move |t| (i, t))).collect();
    let results: Vec<std::result::Result<CaseReport, (usize, i64, String)>> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let y = psi[i - 1].apply(ext, &fam.lambda(ext, t));
            let target = t + digits.shift(i);
            let active = digits.active(i, t);
            let outcome = if active {
                match_unit(ext, fam, &y, target, max_c).map(|m| (m.margin, m.unit))
            } else {
                inactive_margin(ext, &y, target, max_c).map(|m| (m, None))
            };
            outcome
                .map(|(margin, unit)| CaseReport { i, t, active, margin, unit })
                .map_err(|msg| (i, t, msg))
        })
        .collect();

    let mut cases = Vec::with_capacity(results.len());
    let mut hidden = None;
    for r in results {
        match r {
            Ok(c) => cases.push(c),
            Err((i, t, msg)) if msg.starts_with("valuation hidden") => {
                hidden.get_or_insert(format!("Psi_{i}(lambda_{t}): {msg}"));
            }
            Err((i, t, msg)) => return Err(Error::NotAScaffold(format!("Psi_{i}(lambda_{t}): {msg}"))),
        }
    }
    if let Some(msg) = hidden {
        return Err(Error::InsufficientPrecision(msg));
    }
    let certified = cases.iter().map(|c| capped(c.margin, max_c)).min().unwrap_or(max_c);
    if certified < 1 {
        let worst = cases.iter().min_by_key(|c| capped(c.margin, max_c)).unwrap();
        return Err(Error::NotAScaffold(format!(
            "Psi_{}(lambda_{}) has margin {}",
            worst.i, worst.t, worst.margin
        )));
    }
    let warnings = psi
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.augmentation(ext).is_zero())
        .map(|(i, _)| format!("Psi_{}(1) != 0", i + 1))
        .collect();
    Ok(VerifyReport { certified_precision: certified, cases, warnings })
}

/// `Psi^(s) = Psi_n^(s_0) Psi_(n-1)^(s_1) ... Psi_1^(s_(n-1))`.
pub fn monomial(ext: &Extension, psi: &[GroupAlgebraElem], s: usize) -> GroupAlgebraElem {
    let n = ext.n();
    let digits = ext.digits();
    (0..n as u32).fold(GroupAlgebraElem::identity(ext), |acc, i| {
        let k = digits.digit(s, i) as u64;
        if k == 0 {
            acc
        } else {
            acc.mul(ext, &psi[n - 1 - i as usize].pow(ext, k))
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialCase {
    pub s: usize,
    pub t: i64,
    pub active: bool,
    pub margin: Precision,
}

/// Check `Psi^(s)(lambda_t) = U_st lambda_(t+b(s))` when `s <= a(r(t))`, and
/// `= 0` otherwise, modulo `lambda_(t+b(s)) M_L^c`, for all `s` and `t` in a period.
pub fn check_monomial_congruences(
    ext: &Extension,
    fam: &LambdaFamily,
    psi: &[GroupAlgebraElem],
    c: i64,
) -> Result<Vec<MonomialCase>> {
    let digits = ext.digits();
    let pn = ext.degree();
    let mut out = Vec::with_capacity(pn * pn);
    for s in 0..pn {
        let xi = monomial(ext, psi, s);
        for t in 0..pn as i64 {
            let y = xi.apply(ext, &fam.lambda(ext, t));
            let target = t + digits.bfun(s);
            let active = digits.preceq(s, digits.afun(digits.rfun(t)));
            let margin = if active {
                match_unit(ext, fam, &y, target, c).map(|m| m.margin)
            } else {
                inactive_margin(ext, &y, target, c)
            }
            .map_err(|msg| Error::NotAScaffold(format!("Psi^({s})(lambda_{t}): {msg}")))?;
            if !margin.at_least(c) {
                return Err(Error::NotAScaffold(format!("Psi^({s})(lambda_{t}) has margin {margin} < {c}")));
            }
            out.push(MonomialCase { s, t, active, margin });
        }
    }
    Ok(out)
}

/// Check the valuation hypotheses on `Phi_i` and return `Psi_i = Phi_i - Phi_i(1)`,
/// verified to precision at least 1.
pub fn build_from_phi(ext: &Extension, fam: &LambdaFamily, phi: &[GroupAlgebraElem]) -> Result<Scaffold> {
    let n = ext.n();
    if phi.len() != n {
        return Err(Error::Precondition(format!("expected {n} elements Phi_i, got {}", phi.len())));
    }
    let digits = ext.digits();
    for i in 1..=n {
        for t in 0..ext.degree() as i64 {
            let required = t + digits.shift(i);
            let v = ext.v_l(&phi[i - 1].apply(ext, &fam.lambda(ext, t)));
            let ok = if digits.active(i, t) {
                v == Valuation::Exact(required)
            } else {
                v.at_least(required + 1) == Some(true)
            };
            if !ok {
                let req = if digits.active(i, t) { format!("= {required}") } else { format!("> {required}") };
                return Err(Error::HypothesisViolation { i, t, found: v.to_string(), required: req });
            }
        }
    }
    let psi: Vec<GroupAlgebraElem> = phi
        .iter()
        .map(|f| {
            let c = f.augmentation(ext);
            f.sub(ext, &GroupAlgebraElem::identity(ext).scale(ext, &c))
        })
        .collect();
    let report = verify_scaffold(ext, fam, &psi, 1).map_err(|e| match e {
        Error::NotAScaffold(msg) => Error::assertion("scaffold from checked hypotheses verifies", "precision >= 1", msg),
        other => other,
    })?;
    let mut scaffold = Scaffold::new(psi);
    scaffold.precision = Some(Precision::Finite(report.certified_precision));
    Ok(scaffold)
}

/// The elements `Phi_i = t^(-v_i) Theta_i`, `Theta_i` the Hadamard power of a
/// normalized witness with exponent `p^n - p^(n-i) - 1`.
pub fn phis_from_semistable(ext: &Extension, fam: &LambdaFamily, xi: &GroupAlgebraElem) -> Result<Vec<GroupAlgebraElem>> {
    let pn = ext.degree() as i64;
    let h = h_of(ext);
    let diag = diagram::big_g(ext, fam, xi)?;
    if diag.n != expected_diagonal(pn, h) {
        return Err(Error::Precondition(format!(
            "witness is not normalized: d = {}, expected diagonal through [{h},0]",
            diag.d
        )));
    }
    (1..=ext.n())
        .map(|i| {
            let k = pn - (ext.p() as i64).pow((ext.n() - i) as u32) - 1;
            Ok(xi.hadamard_pow(ext, k as u64).shift(-scaling_exponent(ext, i)?))
        })
        .collect()
}

/// `v_i = ((p^n - p^(n-i) - 1) h + i_0 - p^(n-i) b_i) / p^n`, which must be an integer.
pub fn scaling_exponent(ext: &Extension, i: usize) -> Result<i64> {
    let pn = ext.degree() as i64;
    let q = (ext.p() as i64).pow((ext.n() - i) as u32);
    let numerator = (pn - q - 1) * h_of(ext) + ext.i0() - q * ext.breaks()[i - 1];
    if numerator.rem_euclid(pn) != 0 {
        return Err(Error::NotIntegral { i, numerator, denominator: pn });
    }
    Ok(numerator / pn)
}

/// Scaffold of precision 1 from a normalized semistable witness.
pub fn build_from_semistable(ext: &Extension, fam: &LambdaFamily, xi: &GroupAlgebraElem) -> Result<Scaffold> {
    let phis = phis_from_semistable(ext, fam, xi)?;
    build_from_phi(ext, fam, &phis)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrecReport {
    pub witness: WitnessVerdict,
    pub expected_d: i64,
}

/// `xi = Psi^(p^n - 2)`; checks `d = -b_n`, `N = {[-b_n,0],[0,-b_n]}` and
/// that the witness precision is at least the scaffold precision.
pub fn semistable_from_scaffold(ext: &Extension, fam: &LambdaFamily, scaffold: &Scaffold) -> Result<(GroupAlgebraElem, PrecReport)> {
    let pn = ext.degree();
    let xi = monomial(ext, &scaffold.psi, pn - 2);
    let verdict = diagram::is_semistable_witness(ext, fam, &xi)?;
    let bn = *ext.breaks().last().unwrap();
    if verdict.diagram.d != -bn {
        return Err(Error::assertion("d(beta) = -b_n", -bn, verdict.diagram.d));
    }
    let expected = expected_diagonal(pn as i64, -bn);
    if verdict.diagram.n != expected {
        let show = |v: &[diagram::Coset]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        return Err(Error::assertion("N(beta)", show(&expected), show(&verdict.diagram.n)));
    }
    if !verdict.semistable {
        return Err(Error::assertion("Psi^(p^n-2) is a semistable witness", "semistable", verdict.notes.join("; ")));
    }
    if let Some(c) = scaffold.precision {
        let ok = match (verdict.diagram.precision, c) {
            (Precision::Infinite, _) => true,
            (Precision::Finite(_), Precision::Infinite) => false,
            (Precision::Finite(w), Precision::Finite(c)) => w >= c,
        };
        if !ok {
            return Err(Error::assertion("witness precision >= scaffold precision", c, verdict.diagram.precision));
        }
    }
    Ok((xi, PrecReport { witness: verdict, expected_d: -bn }))
}

/// `max { h - 1, p^n - h - 1 }`.
pub fn stability_threshold(ext: &Extension) -> i64 {
    let h = h_of(ext);
    (h - 1).max(ext.degree() as i64 - h - 1)
}

/// `b_i = -i_0 (mod p^n)` for each `i`.
pub fn breaks_congruence(ext: &Extension) -> Vec<bool> {
    let pn = ext.degree() as i64;
    ext.breaks().iter().map(|b| (b + ext.i0()).rem_euclid(pn) == 0).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FalsifierVerdict {
    Falsified {
        /// Index into the tested family.
        xi_index: usize,
        xi: String,
        rho_valuation: i64,
        lambda: String,
        lhs: String,
        rhs: i64,
    },
    Consistent {
        tested: usize,
    },
}

/// The basis `prod_j (sigma_j - 1)^(a_j)`, `a in [0, p)^n`, of `K[G]`.
pub fn augmentation_basis(ext: &Extension) -> Vec<GroupAlgebraElem> {
    let p = ext.p() as usize;
    let deltas: Vec<GroupAlgebraElem> = (1..=ext.n()).map(|j| GroupAlgebraElem::sigma_minus_one(ext, j)).collect();
    (0..ext.degree())
        .map(|idx| {
            deltas.iter().enumerate().fold(GroupAlgebraElem::identity(ext), |acc, (j, d)| {
                let a = (idx / p.pow(j as u32)) % p;
                acc.mul(ext, &d.pow(ext, a as u64))
            })
        })
        .collect()
}

/// Reduce `basis` over `O_K` so that the valuations of the images of `y`
/// are pairwise distinct mod `p^n`, cancelling leading terms below `limit`.
pub fn adapted_basis(ext: &Extension, y: &ExtElem, basis: Vec<GroupAlgebraElem>, limit: i64) -> Vec<GroupAlgebraElem> {
    let pn = ext.degree() as i64;
    let fq = ext.base().residue_field();
    let mut items: Vec<(GroupAlgebraElem, ExtElem)> = basis
        .into_iter()
        .map(|xi| {
            let im = xi.apply(ext, y);
            (xi, im)
        })
        .collect();
    loop {
        let vals: Vec<Option<i64>> = items.iter().map(|(_, im)| ext.v_l(im).exact()).collect();
        let pair = (0..items.len())
            .flat_map(|i| (0..items.len()).map(move |j| (i, j)))
            .find_map(|(i, j)| match (vals[i], vals[j]) {
                (Some(a), Some(b)) if i != j && a <= b && b < limit && (b - a) % pn == 0 => Some((i, j, (b - a) / pn)),
                _ => None,
            });
        let Some((i, j, k)) = pair else { break };
        let (_, lci) = ext.leading(&items[i].1).expect("exact");
        let (_, lcj) = ext.leading(&items[j].1).expect("exact");
        let c = Series::monomial(fq.div(lcj, lci).expect("nonzero"), k);
        let xi = items[j].0.sub(ext, &items[i].0.scale(ext, &c));
        let im = ext.sub(&items[j].1, &ext.scale(&c, &items[i].1));
        items[j] = (xi, im);
    }
    items.into_iter().map(|(xi, _)| xi).collect()
}

/// Default search family: the augmentation basis, the same basis adapted to
/// `rho = lambda_r(-i_0)`, and `random` elements with small support and
/// coefficients `c t^k`, `|k| <= 2`.
pub fn default_family(ext: &Extension, fam: &LambdaFamily, random: usize, seed: u64) -> Vec<GroupAlgebraElem> {
    let pn = ext.degree() as i64;
    let r = (-ext.i0()).rem_euclid(pn);
    let basis = augmentation_basis(ext);
    let limit = r + 4 * pn + ext.digits().bfun(ext.degree() - 1);
    let mut family = basis.clone();
    family.extend(adapted_basis(ext, &fam.lambda(ext, r), basis, limit));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = ext.base().residue_field().order();
    let target = family.len() + random;
    while family.len() < target {
        let mut coeffs = vec![Series::zero(); ext.degree()];
        let support = rng.gen_range(1..=ext.degree().min(3));
        for _ in 0..support {
            let s = rng.gen_range(0..ext.degree());
            let c = rng.gen_range(1..q) as u16;
            coeffs[s] = ext.base().add(&coeffs[s], &Series::monomial(c, rng.gen_range(-2..=2)));
        }
        let xi = GroupAlgebraElem::from_coeffs(ext, coeffs).expect("right length");
        if !xi.is_zero() {
            family.push(xi);
        }
    }
    family
}

/// First member of `family` that is a semistable witness, preferring stable ones.
pub fn find_semistable_witness(
    ext: &Extension,
    fam: &LambdaFamily,
    family: &[GroupAlgebraElem],
) -> Result<Option<(GroupAlgebraElem, WitnessVerdict)>> {
    let mut first = None;
    for xi in family.iter().filter(|x| !x.is_zero()) {
        let v = diagram::is_semistable_witness(ext, fam, xi)?;
        if v.stable {
            return Ok(Some((xi.clone(), v)));
        }
        if v.semistable && first.is_none() {
            first = Some((xi.clone(), v));
        }
    }
    Ok(first)
}

/// Search for `xi` and `lambda` with
/// `v_L(xi(rho)) - v_L(rho) > v_L(xi(lambda)) - v_L(lambda)`, where
/// `v_L(rho) = -i_0 (mod p^n)`. Test elements `lambda` are the family members
/// over one period plus `samples` random `F_q`-combinations of them.
pub fn criterion_c_falsifier(
    ext: &Extension,
    fam: &LambdaFamily,
    family: &[GroupAlgebraElem],
    samples: usize,
    seed: u64,
) -> Result<FalsifierVerdict> {
    let pn = ext.degree() as i64;
    let r = (-ext.i0()).rem_euclid(pn);
    let rho = fam.lambda(ext, r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = ext.base().residue_field().order();
    let mut tests: Vec<(String, ExtElem)> = (0..pn).map(|t| (format!("lambda_{t}"), fam.lambda(ext, t))).collect();
    for k in 0..samples {
        let mut y = ext.zero();
        for t in 0..pn {
            let c = rng.gen_range(0..q) as u16;
            if c != 0 {
                y = ext.add(&y, &ext.scale_fq(c, &fam.lambda(ext, t)));
            }
        }
        if !y.is_zero() {
            tests.push((format!("random combination #{k}"), y));
        }
    }
    let results: Vec<Result<Option<FalsifierVerdict>>> = family
        .par_iter()
        .enumerate()
        .map(|(idx, xi)| {
            if xi.is_zero() {
                return Ok(None);
            }
            let lhs = ext.v_l(&xi.apply(ext, &rho)).shift(-r);
            for (name, y) in &tests {
                let vy = ext.v_l(y).exact().expect("test elements are exact");
                let rhs = match ext.v_l(&xi.apply(ext, y)) {
                    Valuation::Exact(v) => v - vy,
                    Valuation::Infinite => continue,
                    Valuation::AtLeast(c) => {
                        return Err(Error::InsufficientPrecision(format!("v_L(xi({name})) >= {c}")))
                    }
                };
                let violated = match lhs {
                    Valuation::Exact(l) => l > rhs,
                    Valuation::Infinite => true,
                    Valuation::AtLeast(c) if c > rhs => true,
                    Valuation::AtLeast(c) => {
                        return Err(Error::InsufficientPrecision(format!("v_L(xi(rho)) >= {c}")))
                    }
                };
                if violated {
                    return Ok(Some(FalsifierVerdict::Falsified {
                        xi_index: idx,
                        xi: xi.format(ext),
                        rho_valuation: r,
                        lambda: name.clone(),
                        lhs: lhs.to_string(),
                        rhs,
                    }));
                }
            }
            Ok(None)
        })
        .collect();
    for r in results {
        if let Some(v) = r? {
            return Ok(v);
        }
    }
    Ok(FalsifierVerdict::Consistent { tested: family.len() })
}

/// Promote a scaffold to infinite precision when every `Psi_i^p` vanishes
/// exactly in `K[G]`.
pub fn charp_promotion(ext: &Extension, scaffold: &Scaffold) -> Result<Scaffold> {
    for (i, psi) in scaffold.psi.iter().enumerate() {
        if !psi.is_exact() {
            return Err(Error::Precondition(format!("Psi_{} has truncated coefficients", i + 1)));
        }
        let power = psi.pow(ext, ext.p() as u64);
        if let Some((s, c)) = power.coeffs().iter().enumerate().find(|(_, c)| !c.is_zero()) {
            return Err(Error::Precondition(format!(
                "Psi_{}^p != 0: coefficient {} at {}",
                i + 1,
                ext.base().format(c),
                ext.automorphism(s)
            )));
        }
    }
    let mut out = scaffold.clone();
    out.precision = Some(Precision::Infinite);
    out.annotations.push("precision inf: Psi_i^p = 0 in K[G], so the scaffold congruences hold to every precision".into());
    Ok(out)
}
