#![allow(dead_code)]

use galois_scaffold::{ExtElem, Extension, ExtensionSpec, GroupAlgebraElem, LambdaFamily, Series, TensorElem};
use rand::Rng;

pub fn setup(p: u32, e: &[i64], cap: i64) -> (Extension, LambdaFamily) {
    let ext = Extension::build(&ExtensionSpec::simple(p, e), cap).expect("valid extension");
    let fam = ext.lambda_family();
    (ext, fam)
}

/// Degree-`p` extensions `x^p - x = t^-e`, `p` in {2,3,5}, `1 <= e <= 7`, `p` not dividing `e`.
pub fn degree_p_corpus() -> Vec<(u32, i64)> {
    let mut out = Vec::new();
    for p in [2u32, 3, 5] {
        for e in 1..=7i64 {
            if e % p as i64 != 0 {
                out.push((p, e));
            }
        }
    }
    out
}

pub fn random_series<R: Rng>(rng: &mut R, q: u32, vals: std::ops::RangeInclusive<i64>, len: usize) -> Series {
    let coeffs = (0..rng.gen_range(1..=len)).map(|_| rng.gen_range(0..q) as u16).collect();
    Series::new(rng.gen_range(vals), coeffs, None)
}

pub fn random_ext_elem<R: Rng>(rng: &mut R, ext: &Extension) -> ExtElem {
    let q = ext.base().residue_field().order();
    let coords = (0..ext.degree()).map(|_| random_series(rng, q, -2..=2, 3)).collect();
    ext.from_coords(coords).expect("right length")
}

pub fn random_tensor<R: Rng>(rng: &mut R, ext: &Extension) -> TensorElem {
    let terms = (0..rng.gen_range(1..=2)).map(|_| (random_ext_elem(rng, ext), random_ext_elem(rng, ext))).collect();
    TensorElem::new(terms)
}

/// Nonzero `xi in K[G]` with a few monomial coefficients `c t^k`, `|k| <= 3`.
pub fn random_xi<R: Rng>(rng: &mut R, ext: &Extension) -> GroupAlgebraElem {
    let q = ext.base().residue_field().order();
    loop {
        let mut coeffs = vec![Series::zero(); ext.degree()];
        for _ in 0..rng.gen_range(1..=ext.degree().min(4)) {
            let s = rng.gen_range(0..ext.degree());
            let c = Series::monomial(rng.gen_range(1..q) as u16, rng.gen_range(-3..=3));
            coeffs[s] = ext.base().add(&coeffs[s], &c);
        }
        let xi = GroupAlgebraElem::from_coeffs(ext, coeffs).expect("right length");
        if !xi.is_zero() {
            return xi;
        }
    }
}
