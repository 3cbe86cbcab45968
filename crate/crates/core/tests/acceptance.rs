//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use galois_scaffold::diagram::{self, coset_le, expected_diagonal, f_xi, PhiImage, Profile};
use galois_scaffold::digits;
use galois_scaffold::scaffold::{self, FalsifierVerdict};
use galois_scaffold::{Extension, LambdaFamily, Precision, Scaffold, Valuation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{degree_p_corpus, random_tensor, random_xi, setup};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `C(t, s) mod p` from Pascal's triangle.
fn binomials_mod(p: u32, size: usize) -> Vec<Vec<u32>> {
    let mut c = vec![vec![0u32; size]; size];
    for t in 0..size {
        c[t][0] = 1;
        for s in 1..=t {
            c[t][s] = (c[t - 1][s - 1] + if s < t { c[t - 1][s] } else { 0 }) % p;
        }
    }
    c
}

fn lucas() -> Outcome {
    let mut pairs = 0usize;
    for p in [2u32, 3, 5] {
        let mut size = p as usize;
        while size <= 125 {
            let c = binomials_mod(p, size);
            for t in 0..size {
                for s in 0..size {
                    check(digits::preceq(p, s, t) == (c[t][s] != 0), || format!("p={p} s={s} t={t}"))?;
                    pairs += 1;
                }
            }
            size *= p as usize;
        }
    }
    Ok(format!("{pairs} pairs"))
}

fn brute_le(pn: i64, x: (i64, i64), y: (i64, i64)) -> bool {
    (-64..=64).any(|k| x.0 <= y.0 + k * pn && x.1 <= y.1 - k * pn)
}

fn complement_rule() -> Outcome {
    let mut n = 0usize;
    for pn in [4i64, 9] {
        for a in -8..=8 {
            for b in -8..=8 {
                for c in -8..=8 {
                    for d in -8..=8 {
                        let (x, y) = ((a, b), (c, d));
                        check(coset_le(pn, x, y) == brute_le(pn, x, y), || format!("order at {x:?} {y:?}"))?;
                        let lhs = !brute_le(pn, x, y);
                        let rhs = brute_le(pn, (c + 1, d - pn + 1), x);
                        check(lhs == rhs, || format!("complement rule at pn={pn} {x:?} {y:?}"))?;
                        check(diagram::coset_complement_rule(pn, x, y), || format!("library rule at {x:?} {y:?}"))?;
                        n += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{n} quadruples"))
}

/// Slopes of the lower Newton polygon of `sum a_k X^k` from `v(a_k)`,
/// as root valuations `(numerator, denominator, multiplicity)`.
fn newton_root_valuations(vals: &[Option<i64>]) -> Vec<(i64, i64, i64)> {
    let pts: Vec<(i64, i64)> = vals.iter().enumerate().filter_map(|(k, v)| v.map(|v| (k as i64, v))).collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (a.0 - o.0) * (pt.1 - o.1) - (a.1 - o.1) * (pt.0 - o.0) <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull.windows(2).map(|w| (-(w[1].1 - w[0].1), w[1].0 - w[0].0, w[1].0 - w[0].0)).collect()
}

/// `(b, d, i_0)` of `x^p - x = t^-e` from the Newton polygon: `v_L(x) = -e`,
/// and for `pi = x^a t^c` one has `v_L(sigma pi - pi) = 1 + e` for every `sigma != 1`.
fn newton_oracle(p: u32, e: i64) -> (i64, i64, i64) {
    let mut vals = vec![None; p as usize + 1];
    vals[0] = Some(-e);
    vals[1] = Some(0);
    vals[p as usize] = Some(0);
    let slopes = newton_root_valuations(&vals);
    let (num, den, mult) = slopes.iter().copied().find(|s| s.2 == p as i64).expect("single slope");
    assert_eq!((num * p as i64) % den, 0);
    assert_eq!(mult, p as i64);
    let v_x = num * p as i64 / den;
    let i_g = 1 - v_x;
    let d = (p as i64 - 1) * i_g;
    (i_g - 1, d, d - p as i64 + 1)
}

/// `i_G(sigma) = v_K(N(sigma pi - pi))`, computed straight from the norm.
fn direct_i_g(ext: &Extension) -> Result<Vec<i64>, String> {
    let pi = ext.uniformizer();
    (1..ext.degree())
        .map(|s| {
            let diff = ext.sub(&ext.apply_sigma(s, pi), pi);
            ext.norm(&diff).valuation().exact().ok_or_else(|| format!("norm of sigma_{s} pi - pi is hidden"))
        })
        .collect()
}

fn ramification_oracle() -> Outcome {
    let corpus = degree_p_corpus();
    for &(p, e) in &corpus {
        let (ext, _) = setup(p, &[e], 32);
        let r = ext.ramification();
        let (b, d, i0) = newton_oracle(p, e);
        check(r.breaks == vec![b] && r.different == d && r.i0 == i0, || {
            format!("p={p} e={e}: got ({:?},{},{}), oracle ({b},{d},{i0})", r.breaks, r.different, r.i0)
        })?;
        let direct = direct_i_g(&ext)?;
        check(direct.iter().sum::<i64>() == d && direct == r.i_g[1..], || format!("p={p} e={e}: direct i_G {direct:?}"))?;
        let bt = ext.digits().b_table();
        check(bt[ext.degree() - 1] == i0, || format!("p={p} e={e}: b(p^n-1) = {}", bt[ext.degree() - 1]))?;
    }
    let towers: [(u32, &[i64]); 4] = [(2, &[1, 3]), (2, &[1, 5]), (3, &[1, 2]), (3, &[1, 4])];
    for (p, e) in towers {
        let (ext, _) = setup(p, e, 48);
        let direct = direct_i_g(&ext)?;
        let r = ext.ramification();
        check(direct == r.i_g[1..], || format!("p={p} e={e:?}: direct i_G {direct:?} vs {:?}", &r.i_g[1..]))?;
        check(r.different == direct.iter().sum::<i64>(), || format!("p={p} e={e:?}: different"))?;
        check(ext.digits().b_table()[ext.degree() - 1] == r.i0, || format!("p={p} e={e:?}: b(p^n-1) != i0"))?;
    }
    Ok(format!("{} degree-p extensions, {} towers", corpus.len(), towers.len()))
}

fn hadamard_rule() -> Outcome {
    let corpus: [(u32, &[i64]); 5] = [(2, &[1]), (3, &[1]), (3, &[2]), (5, &[1]), (2, &[1, 3])];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (p, e) in corpus {
        let (ext, _) = setup(p, e, 12);
        for k in 0..100 {
            let a = random_tensor(&mut rng, &ext);
            let b = random_tensor(&mut rng, &ext);
            let lhs = a.mul(&ext, &b).phi(&ext);
            let rhs = a.phi(&ext).hadamard(&ext, &b.phi(&ext));
            check(lhs.agrees_with(&rhs), || format!("p={p} e={e:?} pair {k}"))?;
        }
    }
    Ok(format!("100 pairs on each of {} extensions", corpus.len()))
}

fn diagram_oracle() -> Outcome {
    let corpus: [(u32, &[i64]); 6] = [(2, &[1]), (3, &[1]), (3, &[2]), (2, &[1, 3]), (3, &[1, 2]), (3, &[1, 4])];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut points = 0usize;
    for (p, e) in corpus {
        let (ext, fam) = setup(p, e, 32);
        let pn = ext.degree() as i64;
        for k in 0..25 {
            let xi = random_xi(&mut rng, &ext);
            let prof = Profile::new(&ext, &fam, &xi).map_err(|err| err.to_string())?;
            let beta = diagram::phi_inverse_oracle(&ext, &PhiImage::from_group_algebra(&ext, &xi))
                .map_err(|err| err.to_string())?;
            let mut support = BTreeSet::new();
            for (v, j) in diagram::tensor_support(&ext, &beta) {
                match v {
                    Valuation::Exact(v) => {
                        support.insert((v, j));
                    }
                    Valuation::Infinite => {}
                    Valuation::AtLeast(c) => return Err(format!("p={p} e={e:?} xi {k}: coefficient hidden at {c}")),
                }
            }
            let d = prof.f(-ext.i0()).exact().ok_or("f_xi hidden")?;
            for b in 0..pn {
                for a in (d - 2 * pn)..=(d + 3 * pn) {
                    let via_f = prof.f(-b - ext.i0()).exact().ok_or("f_xi hidden")? <= a;
                    let via_r = support.iter().any(|&(v, j)| coset_le(pn, (v, j), (a, b)));
                    check(via_f == via_r, || format!("p={p} e={e:?} xi {k}: [{a},{b}] f={via_f} R={via_r}"))?;
                    points += 1;
                }
            }
        }
    }
    Ok(format!("{points} coset memberships over {} extensions", corpus.len()))
}

fn f_xi_laws() -> Outcome {
    let corpus: [(u32, &[i64]); 4] = [(2, &[1]), (3, &[2]), (5, &[1]), (2, &[1, 3])];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (p, e) in corpus {
        let (ext, fam) = setup(p, e, 32);
        let pn = ext.degree() as i64;
        for k in 0..50 {
            let xi = random_xi(&mut rng, &ext);
            let f: Vec<i64> = (-pn..3 * pn)
                .map(|a| f_xi(&ext, &fam, &xi, a).exact().ok_or_else(|| format!("f_xi({a}) hidden")))
                .collect::<Result<_, _>>()?;
            check(f.windows(2).all(|w| w[0] <= w[1]), || format!("p={p} e={e:?} xi {k}: not monotone {f:?}"))?;
            let pn = pn as usize;
            check((0..f.len() - pn).all(|i| f[i + pn] == f[i] + pn as i64), || {
                format!("p={p} e={e:?} xi {k}: not periodic {f:?}")
            })?;
        }
    }
    Ok(format!("50 elements on each of {} extensions", corpus.len()))
}

/// A verified scaffold with its certified precision.
struct Verified {
    label: String,
    ext: Extension,
    fam: LambdaFamily,
    scaffold: Scaffold,
}

fn verified_degree_p() -> Result<Vec<Verified>, String> {
    degree_p_corpus()
        .into_iter()
        .map(|(p, e)| {
            let (ext, fam) = setup(p, &[e], 32);
            let mut s = Scaffold::sigma_minus_one(&ext);
            let rep = scaffold::verify_scaffold(&ext, &fam, &s.psi, 4).map_err(|err| format!("p={p} e={e}: {err}"))?;
            check(rep.certified_precision >= 1, || format!("p={p} e={e}: precision {}", rep.certified_precision))?;
            s.precision = Some(Precision::Finite(rep.certified_precision));
            Ok(Verified { label: format!("p={p} e={e}"), ext, fam, scaffold: s })
        })
        .collect()
}

/// Scaffolds for congruent two-step towers, built from a stable witness in the default family.
fn verified_towers() -> Result<Vec<Verified>, String> {
    let towers: [(u32, &[i64]); 3] = [(2, &[1, 3]), (2, &[1, 5]), (3, &[1, 4])];
    towers
        .into_iter()
        .map(|(p, e)| {
            let (ext, fam) = setup(p, e, 48);
            let label = format!("p={p} e={e:?}");
            let family = scaffold::default_family(&ext, &fam, 0, 0);
            let (xi, _) = scaffold::find_semistable_witness(&ext, &fam, &family)
                .map_err(|err| err.to_string())?
                .ok_or_else(|| format!("{label}: no witness"))?;
            let norm = diagram::normalize_witness(&ext, &fam, &xi).map_err(|err| err.to_string())?;
            let mut s = scaffold::build_from_semistable(&ext, &fam, &norm).map_err(|err| format!("{label}: {err}"))?;
            let rep = scaffold::verify_scaffold(&ext, &fam, &s.psi, 4).map_err(|err| format!("{label}: {err}"))?;
            s.precision = Some(Precision::Finite(rep.certified_precision));
            Ok(Verified { label, ext, fam, scaffold: s })
        })
        .collect()
}

fn precision_end_to_end(all: &[Verified]) -> Outcome {
    for v in all {
        let bn = *v.ext.breaks().last().unwrap();
        let (_, rep) = scaffold::semistable_from_scaffold(&v.ext, &v.fam, &v.scaffold).map_err(|e| format!("{}: {e}", v.label))?;
        let diag = &rep.witness.diagram;
        check(diag.d == -bn, || format!("{}: d = {}", v.label, diag.d))?;
        check(diag.n == expected_diagonal(v.ext.degree() as i64, -bn), || format!("{}: N = {:?}", v.label, diag.n))?;
        let c = match v.scaffold.precision {
            Some(Precision::Finite(c)) => c,
            other => return Err(format!("{}: unexpected precision {other:?}", v.label)),
        };
        check(diag.precision.at_least(c), || format!("{}: witness precision {} < {c}", v.label, diag.precision))?;
    }
    Ok(format!("{} scaffolds", all.len()))
}

fn semistable_roundtrip(all: &[Verified]) -> Outcome {
    for v in all {
        let err = |e: galois_scaffold::Error| format!("{}: {e}", v.label);
        let (xi, _) = scaffold::semistable_from_scaffold(&v.ext, &v.fam, &v.scaffold).map_err(err)?;
        let norm = diagram::normalize_witness(&v.ext, &v.fam, &xi).map_err(err)?;
        for i in 1..=v.ext.n() {
            scaffold::scaling_exponent(&v.ext, i).map_err(err)?;
        }
        let rebuilt = scaffold::build_from_semistable(&v.ext, &v.fam, &norm).map_err(err)?;
        let rep = scaffold::verify_scaffold(&v.ext, &v.fam, &rebuilt.psi, 4).map_err(err)?;
        check(rep.certified_precision >= 1, || format!("{}: rebuilt precision {}", v.label, rep.certified_precision))?;
    }
    Ok(format!("{} scaffolds rebuilt and re-verified", all.len()))
}

fn breaks_congruence(all: &[Verified]) -> Outcome {
    for v in all {
        check(scaffold::breaks_congruence(&v.ext).iter().all(|&c| c), || format!("{}: congruence fails", v.label))?;
    }
    let (ext, fam) = setup(3, &[1, 2], 48);
    check(ext.breaks() == [1, 4] && ext.i0() == 14, || format!("p=3 e=(1,2): breaks {:?}", ext.breaks()))?;
    check(!scaffold::breaks_congruence(&ext).iter().all(|&c| c), || "p=3 e=(1,2) passes the congruence".into())?;
    let family = scaffold::default_family(&ext, &fam, 8, 9);
    let verdict = scaffold::criterion_c_falsifier(&ext, &fam, &family, 4, 9).map_err(|e| e.to_string())?;
    let FalsifierVerdict::Falsified { xi_index, lambda, .. } = verdict else {
        return Err("p=3 e=(1,2) not falsified".into());
    };
    Ok(format!("{} congruent; p=3 e=(1,2) falsified by family member {xi_index} against {lambda}", all.len()))
}

fn stability_promotion(degree_p: &[Verified]) -> Outcome {
    for v in degree_p {
        let promoted = scaffold::charp_promotion(&v.ext, &v.scaffold).map_err(|e| format!("{}: {e}", v.label))?;
        let p = v.ext.p() as u64;
        check(promoted.psi[0].pow(&v.ext, p).is_zero(), || format!("{}: Psi^p != 0", v.label))?;
        check(promoted.precision == Some(Precision::Infinite), || format!("{}: not promoted", v.label))?;
        check(!promoted.annotations.is_empty(), || format!("{}: promotion not annotated", v.label))?;
        let threshold = scaffold::stability_threshold(&v.ext);
        check(Precision::Infinite.at_least(threshold), || format!("{}: threshold", v.label))?;
        let xi = scaffold::monomial(&v.ext, &promoted.psi, v.ext.degree() - 2);
        check(diagram::is_stable_witness(&v.ext, &v.fam, &xi).map_err(|e| e.to_string())?, || {
            format!("{}: Psi^(p-2) is not a stable witness", v.label)
        })?;
    }
    Ok(format!("{} degree-p extensions promoted", degree_p.len()))
}

const GOLDEN_JOBS: [(&str, &str); 10] = [
    ("degree3", "analyze"),
    ("degree3", "diagram"),
    ("degree3", "scaffold-verify"),
    ("degree3", "roundtrip"),
    ("biquadratic", "roundtrip"),
    ("biquadratic", "falsify"),
    ("p3_noncongruent", "falsify"),
    ("p3_congruent", "scaffold-build"),
    ("custom_xi", "diagram"),
    ("f4_equal", "analyze"),
];

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run_cli(config: &Path, task: &str, threads: usize) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_galois-scaffold"))
        .arg(task)
        .arg("--config")
        .arg(config)
        .args(["--threads", &threads.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{task} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (config, task) in GOLDEN_JOBS {
        let path = crate_dir().join("examples/configs").join(format!("{config}.toml"));
        let golden = crate_dir().join("tests/golden").join(format!("{config}.{task}.json"));
        let runs = [run_cli(&path, task, 1)?, run_cli(&path, task, 1)?, run_cli(&path, task, 4)?, run_cli(&path, task, 4)?];
        check(runs.iter().all(|r| r == &runs[0]), || format!("{config} {task}: runs differ"))?;
        if update {
            std::fs::write(&golden, &runs[0]).map_err(|e| e.to_string())?;
        }
        let expected = std::fs::read(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
        check(expected == runs[0], || format!("{config} {task}: differs from {}", golden.display()))?;
    }
    Ok(format!("{} golden certificates, 2 runs x threads 1 and 4", GOLDEN_JOBS.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome, start: Instant| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why} ({secs:.1}s)");
            }
        }
    };
    let t = Instant::now();
    report(1, "Lucas equivalence", lucas(), t);
    let t = Instant::now();
    report(2, "coset complement rule", complement_rule(), t);
    let t = Instant::now();
    report(3, "ramification oracle", ramification_oracle(), t);
    let t = Instant::now();
    report(4, "Hadamard product rule", hadamard_rule(), t);
    let t = Instant::now();
    report(5, "diagram oracle equivalence", diagram_oracle(), t);
    let t = Instant::now();
    report(6, "f_xi monotone and periodic", f_xi_laws(), t);

    let t = Instant::now();
    let scaffolds = verified_degree_p().and_then(|mut a| {
        let n = a.len();
        a.extend(verified_towers()?);
        Ok((a, n))
    });
    match scaffolds {
        Ok((all, n_degree_p)) => {
            report(7, "scaffold to semistable witness", precision_end_to_end(&all), t);
            let t = Instant::now();
            report(8, "semistable witness to scaffold", semistable_roundtrip(&all), t);
            let t = Instant::now();
            report(9, "break congruence and falsifier", breaks_congruence(&all), t);
            let t = Instant::now();
            report(10, "char-p promotion and stability", stability_promotion(&all[..n_degree_p]), t);
        }
        Err(why) => {
            for (n, name) in [(7, "scaffold to semistable witness"), (8, "semistable witness to scaffold"), (9, "break congruence and falsifier"), (10, "char-p promotion and stability")] {
                report(n, name, Err(why.clone()), t);
            }
        }
    }
    let t = Instant::now();
    report(11, "certificate determinism", determinism(), t);

    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 11 acceptance criteria passed");
}
