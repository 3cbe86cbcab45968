//! Batch jobs: TOML configuration, task dispatch with precision retries, and
//! canonical certificates.
//!
//! A config names the extension and, depending on the task, an element `xi`
//! of `K[G]` or a claimed scaffold. Group elements are written as tuples
//! `sigma = [i_1, ..., i_n]`; coefficients in `K` as `{ val, coeffs }`, the
//! series `t^val (c_0 + c_1 t + ...)` with `F_q` elements in integer encoding.
//!
//! ```toml
//! cap = 32
//! seed = 7
//!
//! [extension]
//! p = 3
//! generators = [{ exponent = 1 }]
//!
//! [xi]
//! terms = [
//!   { sigma = [1], coeff = { coeffs = [1] } },
//!   { sigma = [0], coeff = { coeffs = [2] } },
//! ]
//! ```

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::diagram::{self, Diagram, Precision};
use crate::error::{Error, Result};
use crate::group_algebra::GroupAlgebraElem;
use crate::scaffold::{self, FalsifierVerdict, Scaffold};
use crate::series::{Series, Valuation};
use crate::tower::{Automorphism, Extension, ExtensionSpec, LambdaFamily};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Analyze,
    Diagram,
    ScaffoldVerify,
    ScaffoldBuild,
    Roundtrip,
    Falsify,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::Analyze,
        Task::Diagram,
        Task::ScaffoldVerify,
        Task::ScaffoldBuild,
        Task::Roundtrip,
        Task::Falsify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Analyze => "analyze",
            Task::Diagram => "diagram",
            Task::ScaffoldVerify => "scaffold-verify",
            Task::ScaffoldBuild => "scaffold-build",
            Task::Roundtrip => "roundtrip",
            Task::Falsify => "falsify",
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Task> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown task `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaurentSpec {
    #[serde(default)]
    pub val: i64,
    pub coeffs: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub sigma: Vec<u32>,
    pub coeff: LaurentSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Identity,
    Trace,
    SigmaMinusOne,
}

/// An element of `K[G]`: a preset or an explicit table, times `t^shift`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiSpec {
    pub preset: Option<Preset>,
    /// Generator index for `sigma-minus-one` (1-based).
    pub generator: Option<usize>,
    pub terms: Option<Vec<TermSpec>>,
    #[serde(default)]
    pub shift: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaffoldPreset {
    /// `Psi_j = sigma_j - 1`.
    SigmaMinusOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaffoldSpec {
    pub preset: Option<ScaffoldPreset>,
    pub psi: Option<Vec<Vec<TermSpec>>>,
}

fn default_random() -> usize {
    16
}

fn default_samples() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FalsifyParams {
    /// Random members added to the default search family.
    #[serde(default = "default_random")]
    pub random: usize,
    /// Random test elements beyond `lambda_0, ..., lambda_(p^n - 1)`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for FalsifyParams {
    fn default() -> Self {
        FalsifyParams { random: default_random(), samples: default_samples() }
    }
}

fn default_cap() -> i64 {
    32
}

fn default_max_cap() -> i64 {
    1024
}

fn default_max_c() -> i64 {
    4
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub task: Option<Task>,
    #[serde(default = "default_cap")]
    pub cap: i64,
    #[serde(default = "default_max_cap")]
    pub max_cap: i64,
    /// Upper limit for the precision the scaffold verifier tries to certify.
    #[serde(default = "default_max_c")]
    pub max_c: i64,
    #[serde(default)]
    pub seed: u64,
    pub extension: ExtensionSpec,
    pub xi: Option<XiSpec>,
    pub scaffold: Option<ScaffoldSpec>,
    #[serde(default)]
    pub falsify: FalsifyParams,
}

impl JobConfig {
    pub fn new(extension: ExtensionSpec) -> Self {
        JobConfig {
            task: None,
            cap: default_cap(),
            max_cap: default_max_cap(),
            max_c: default_max_c(),
            seed: 0,
            extension,
            xi: None,
            scaffold: None,
            falsify: FalsifyParams::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.cap < 1 || self.max_cap < self.cap {
            return Err(Error::Config(format!("need 1 <= cap <= max_cap, got cap = {}, max_cap = {}", self.cap, self.max_cap)));
        }
        if self.max_c < 1 {
            return Err(Error::Config("max_c must be at least 1".into()));
        }
        Ok(())
    }
}

fn series_from_spec(ext: &Extension, spec: &LaurentSpec) -> Result<Series> {
    let fq = ext.base().residue_field();
    let coeffs = spec.coeffs.iter().map(|&c| fq.element(c)).collect::<Result<Vec<_>>>()?;
    Ok(Series::new(spec.val, coeffs, None))
}

fn table_from_spec(ext: &Extension, terms: &[TermSpec]) -> Result<GroupAlgebraElem> {
    let mut coeffs = vec![Series::zero(); ext.degree()];
    for term in terms {
        let s = ext.automorphism_index(&Automorphism(term.sigma.clone()))?;
        coeffs[s] = ext.base().add(&coeffs[s], &series_from_spec(ext, &term.coeff)?);
    }
    GroupAlgebraElem::from_coeffs(ext, coeffs)
}

pub fn resolve_xi(ext: &Extension, spec: &XiSpec) -> Result<GroupAlgebraElem> {
    let xi = match (&spec.preset, &spec.terms) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(Error::Config("xi needs exactly one of `preset` and `terms`".into()))
        }
        (Some(Preset::Identity), None) => GroupAlgebraElem::identity(ext),
        (Some(Preset::Trace), None) => GroupAlgebraElem::trace(ext),
        (Some(Preset::SigmaMinusOne), None) => {
            let j = spec.generator.unwrap_or(1);
            if !(1..=ext.n()).contains(&j) {
                return Err(Error::Config(format!("generator {j} out of range 1..={}", ext.n())));
            }
            GroupAlgebraElem::sigma_minus_one(ext, j)
        }
        (None, Some(terms)) => table_from_spec(ext, terms)?,
    };
    if xi.is_zero() {
        return Err(Error::Config("xi is zero".into()));
    }
    Ok(xi.shift(spec.shift))
}

pub fn resolve_scaffold(ext: &Extension, spec: &ScaffoldSpec) -> Result<Scaffold> {
    match (&spec.preset, &spec.psi) {
        (Some(ScaffoldPreset::SigmaMinusOne), None) => Ok(Scaffold::sigma_minus_one(ext)),
        (None, Some(psi)) => {
            if psi.len() != ext.n() {
                return Err(Error::Config(format!("scaffold needs {} elements psi, got {}", ext.n(), psi.len())));
            }
            Ok(Scaffold::new(psi.iter().map(|t| table_from_spec(ext, t)).collect::<Result<_>>()?))
        }
        _ => Err(Error::Config("scaffold needs exactly one of `preset` and `psi`".into())),
    }
}

fn series_json(s: &Series) -> Value {
    let (val, coeffs) = s.raw();
    let mut m = Map::new();
    m.insert("val".into(), json!(val));
    m.insert("coeffs".into(), json!(coeffs));
    if let Some(c) = s.cap() {
        m.insert("cap".into(), json!(c));
    }
    Value::Object(m)
}

fn xi_json(ext: &Extension, xi: &GroupAlgebraElem) -> Value {
    Value::Array(
        xi.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !(c.is_zero() && c.is_exact()))
            .map(|(s, c)| json!({ "sigma": ext.automorphism(s).0, "coeff": series_json(c) }))
            .collect(),
    )
}

fn diagram_json(d: &Diagram) -> Value {
    serde_json::to_value(d).expect("diagram serializes")
}

fn precision_json(p: Precision) -> Value {
    serde_json::to_value(p).expect("precision serializes")
}

fn extension_json(ext: &Extension) -> Value {
    let r = ext.ramification();
    let i_g: Vec<Value> = (1..ext.degree())
        .map(|s| json!({ "sigma": ext.automorphism(s).0, "i_g": r.i_g[s] }))
        .collect();
    json!({
        "p": ext.p(),
        "m": ext.base().residue_field().degree(),
        "n": ext.n(),
        "degree": ext.degree(),
        "breaks": r.breaks,
        "different": r.different,
        "i0": r.i0,
        "h": diagram::h_of(ext),
        "i_g": i_g,
        "uniformizer": ext.format(ext.uniformizer()),
        "breaks_congruence": scaffold::breaks_congruence(ext),
        "stability_threshold": scaffold::stability_threshold(ext),
    })
}

fn digits_json(ext: &Extension) -> Value {
    let d = ext.digits();
    json!({ "a": d.a_table(), "b": d.b_table() })
}

/// Machine-readable outcome of one job. Keys serialize in sorted order.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate(pub Value);

impl Certificate {
    pub fn value(&self) -> &Value {
        &self.0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.0).expect("certificate serializes");
        s.push('\n');
        s
    }

    /// Human-readable rendering: the result first, then the context.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let Value::Object(m) = &self.0 else {
            render_text(&mut out, &self.0, 0);
            return out;
        };
        let order = ["task", "result", "extension", "digits", "caveats", "cap", "retries", "seed"];
        let mut head = Map::new();
        for k in order {
            if let Some(v) = m.get(k) {
                head.insert(k.to_string(), v.clone());
            }
        }
        render_ordered(&mut out, &head, &order);
        let rest: Map<String, Value> = m.iter().filter(|(k, _)| !order.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
        render_text(&mut out, &Value::Object(rest), 0);
        out
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_diagram(out: &mut String, d: &Map<String, Value>, indent: usize) {
    let pad = " ".repeat(indent);
    let cosets = |key: &str| -> String {
        d.get(key)
            .and_then(Value::as_array)
            .map(|v| v.iter().map(|c| format!("[{},{}]", c[0], c[1])).collect::<Vec<_>>().join(" "))
            .unwrap_or_default()
    };
    let _ = writeln!(out, "{pad}d(beta)   {}", scalar(&d["d"]));
    let _ = writeln!(out, "{pad}N(beta)   {}", cosets("n"));
    let _ = writeln!(out, "{pad}G(beta)   {}", cosets("g"));
    let _ = writeln!(out, "{pad}precision {}", scalar(&d["precision"]));
}

fn render_ordered(out: &mut String, m: &Map<String, Value>, order: &[&str]) {
    for k in order {
        if let Some(v) = m.get(*k) {
            let mut one = Map::new();
            one.insert(k.to_string(), v.clone());
            render_text(out, &Value::Object(one), 0);
        }
    }
}

fn render_text(out: &mut String, v: &Value, indent: usize) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, val) in m {
                match val {
                    Value::Object(inner) if k == "diagram" => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render_diagram(out, inner, indent + 2);
                    }
                    Value::Object(_) => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render_text(out, val, indent + 2);
                    }
                    Value::Array(items) if items.iter().any(Value::is_object) => {
                        let _ = writeln!(out, "{pad}{k}:");
                        for item in items {
                            let _ = writeln!(out, "{pad}  - {item}");
                        }
                    }
                    other => {
                        let _ = writeln!(out, "{pad}{k}: {}", scalar(other));
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other));
        }
    }
}

struct Ctx<'a> {
    config: &'a JobConfig,
    ext: Extension,
    fam: LambdaFamily,
}

/// Run `task`, doubling the cap on insufficient precision up to `max_cap`.
pub fn run(config: &JobConfig, task: Task) -> Result<Certificate> {
    config.validate()?;
    let mut cap = config.cap;
    let mut retries = Vec::new();
    loop {
        match run_at(config, task, cap) {
            Ok((ext_json, digits, result, caveats)) => {
                let input = serde_json::to_value(config).expect("config serializes");
                let mut cert = json!({
                    "tool": { "name": TOOL_NAME, "version": TOOL_VERSION },
                    "task": task.name(),
                    "seed": config.seed,
                    "input": input,
                    "cap": cap,
                    "retries": retries,
                    "extension": ext_json,
                    "digits": digits,
                    "result": result,
                    "caveats": caveats,
                });
                strip_nulls(&mut cert);
                return Ok(Certificate(cert));
            }
            Err(Error::InsufficientPrecision(msg)) => {
                if cap * 2 > config.max_cap {
                    return Err(Error::InsufficientPrecision(format!(
                        "precision ceiling {} reached after {} retries: {msg}",
                        config.max_cap,
                        retries.len()
                    )));
                }
                retries.push(json!({ "cap": cap, "reason": msg }));
                cap *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

fn strip_nulls(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.retain(|_, x| !x.is_null());
            m.values_mut().for_each(strip_nulls);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_nulls),
        _ => {}
    }
}

type Parts = (Value, Value, Value, Vec<String>);

fn run_at(config: &JobConfig, task: Task, cap: i64) -> Result<Parts> {
    let ext = Extension::build(&config.extension, cap)?;
    let fam = ext.lambda_family();
    let ctx = Ctx { config, ext, fam };
    let mut caveats = Vec::new();
    let result = match task {
        Task::Analyze => analyze(&ctx),
        Task::Diagram => diagram_task(&ctx, &mut caveats)?,
        Task::ScaffoldVerify => scaffold_verify(&ctx, &mut caveats)?,
        Task::ScaffoldBuild => scaffold_build(&ctx)?,
        Task::Roundtrip => roundtrip(&ctx, &mut caveats)?,
        Task::Falsify => falsify(&ctx, &mut caveats)?,
    };
    Ok((extension_json(&ctx.ext), digits_json(&ctx.ext), result, caveats))
}

fn analyze(ctx: &Ctx) -> Value {
    let cong = scaffold::breaks_congruence(&ctx.ext);
    json!({
        "breaks_congruent": cong.iter().all(|&c| c),
        "verdict": if cong.iter().all(|&c| c) { "congruences hold" } else { "not semistable (break congruence fails)" },
    })
}

fn witness_json(ctx: &Ctx, xi: &GroupAlgebraElem) -> Result<Value> {
    let prof = diagram::Profile::new(&ctx.ext, &ctx.fam, xi)?;
    let pn = ctx.ext.degree() as i64;
    let f: Vec<Value> = (0..=pn)
        .map(|a| match prof.f(a) {
            Valuation::Exact(v) => json!(v),
            Valuation::AtLeast(v) => json!(format!(">={v}")),
            Valuation::Infinite => json!("inf"),
        })
        .collect();
    let verdict = diagram::classify(&ctx.ext, diagram::diagram_from_profile(&ctx.ext, &prof)?);
    let mut out = json!({
        "xi": xi_json(&ctx.ext, xi),
        "f_xi": { "from": 0, "values": f },
        "diagram": diagram_json(&verdict.diagram),
        "semistable": verdict.semistable,
        "stable": verdict.stable,
        "notes": verdict.notes,
    });
    if verdict.semistable {
        let norm = match diagram::normalize_witness(&ctx.ext, &ctx.fam, xi) {
            Ok(nx) => json!({
                "xi": xi_json(&ctx.ext, &nx),
                "diagram": diagram_json(&diagram::big_g(&ctx.ext, &ctx.fam, &nx)?),
            }),
            Err(Error::Precondition(msg)) => json!({ "error": msg }),
            Err(e) => return Err(e),
        };
        out["normalized"] = norm;
    }
    Ok(out)
}

fn diagram_task(ctx: &Ctx, caveats: &mut Vec<String>) -> Result<Value> {
    let spec = ctx.config.xi.as_ref().ok_or_else(|| Error::Config("task `diagram` needs an [xi] table".into()))?;
    let xi = resolve_xi(&ctx.ext, spec)?;
    let mut out = witness_json(ctx, &xi)?;
    out["oracle"] = support_oracle(ctx, &xi)?;
    if out["diagram"]["precision"] == "inf" {
        caveats.push(cap_caveat(ctx));
    }
    Ok(out)
}

/// Cross-check `D(beta)` against the up-closure of the support of
/// `beta = phi^-1(xi)` over a window around the diagonal.
fn support_oracle(ctx: &Ctx, xi: &GroupAlgebraElem) -> Result<Value> {
    let ext = &ctx.ext;
    let pn = ext.degree() as i64;
    let beta = diagram::phi_inverse_oracle(ext, &diagram::PhiImage::from_group_algebra(ext, xi))?;
    let mut support = Vec::new();
    for (v, j) in diagram::tensor_support(ext, &beta) {
        match v {
            Valuation::Exact(v) => support.push((v, j)),
            Valuation::Infinite => {}
            Valuation::AtLeast(c) => {
                return Err(Error::InsufficientPrecision(format!("coefficient {j} of phi^-1(xi) is hidden at {c}")))
            }
        }
    }
    let prof = diagram::Profile::new(ext, &ctx.fam, xi)?;
    let d = diagram::diagram_from_profile(ext, &prof)?.d;
    for b in 0..pn {
        let f = prof.f(-b - ext.i0()).exact().ok_or_else(|| Error::InsufficientPrecision("f_xi hidden".into()))?;
        for a in (d - b - pn)..=(d - b + 2 * pn) {
            let via_r = support.iter().any(|&(v, j)| diagram::coset_le(pn, (v, j), (a, b)));
            if (f <= a) != via_r {
                return Err(Error::assertion(format!("[{a},{b}] in D(beta)"), f <= a, via_r));
            }
        }
    }
    let pts: Vec<Value> = support.iter().map(|&(v, j)| json!([v, j])).collect();
    Ok(json!({ "support": pts, "agrees": true }))
}

fn cap_caveat(ctx: &Ctx) -> String {
    format!("diagram precision inf: G = N certified up to cap {}", ctx.ext.cap())
}

fn verify_json(ctx: &Ctx, s: &Scaffold) -> Result<(Value, Option<i64>)> {
    match scaffold::verify_scaffold(&ctx.ext, &ctx.fam, &s.psi, ctx.config.max_c) {
        Ok(rep) => {
            let cases: Vec<Value> = rep
                .cases
                .iter()
                .map(|c| {
                    json!({
                        "i": c.i,
                        "t": c.t,
                        "active": c.active,
                        "margin": precision_json(c.margin),
                        "unit": c.unit.as_ref().map(series_json),
                    })
                })
                .collect();
            Ok((
                json!({
                    "verdict": "scaffold",
                    "certified_precision": rep.certified_precision,
                    "max_c": ctx.config.max_c,
                    "warnings": rep.warnings,
                    "cases": cases,
                }),
                Some(rep.certified_precision),
            ))
        }
        Err(Error::NotAScaffold(msg)) => Ok((json!({ "verdict": "not a scaffold", "reason": msg }), None)),
        Err(e) => Err(e),
    }
}

fn promotion_json(ctx: &Ctx, s: &Scaffold) -> Result<(Value, bool)> {
    match scaffold::charp_promotion(&ctx.ext, s) {
        Ok(p) => Ok((json!({ "promoted": true, "precision": "inf", "annotations": p.annotations }), true)),
        Err(Error::Precondition(msg)) => Ok((json!({ "promoted": false, "reason": msg }), false)),
        Err(e) => Err(e),
    }
}

fn scaffold_verify(ctx: &Ctx, caveats: &mut Vec<String>) -> Result<Value> {
    let spec = ctx
        .config
        .scaffold
        .clone()
        .unwrap_or(ScaffoldSpec { preset: Some(ScaffoldPreset::SigmaMinusOne), psi: None });
    let s = resolve_scaffold(&ctx.ext, &spec)?;
    let (mut out, certified) = verify_json(ctx, &s)?;
    out["psi"] = Value::Array(s.psi.iter().map(|x| xi_json(&ctx.ext, x)).collect());
    if let Some(c) = certified {
        let monos = scaffold::check_monomial_congruences(&ctx.ext, &ctx.fam, &s.psi, c).is_ok();
        out["monomial_congruences"] = json!(monos);
        let (promo, promoted) = promotion_json(ctx, &s)?;
        out["promotion"] = promo;
        if c == ctx.config.max_c && !promoted {
            caveats.push(format!("certified precision is capped at max_c = {}", ctx.config.max_c));
        }
    }
    Ok(out)
}

/// Witness from the config, or the first one found in the default family.
fn find_witness(ctx: &Ctx) -> Result<Option<(GroupAlgebraElem, &'static str)>> {
    if let Some(spec) = &ctx.config.xi {
        return Ok(Some((resolve_xi(&ctx.ext, spec)?, "config")));
    }
    let family = scaffold::default_family(&ctx.ext, &ctx.fam, ctx.config.falsify.random, ctx.config.seed);
    Ok(scaffold::find_semistable_witness(&ctx.ext, &ctx.fam, &family)?.map(|(xi, _)| (xi, "search")))
}

fn build_json(ctx: &Ctx, xi: &GroupAlgebraElem) -> Result<(Value, Option<Scaffold>)> {
    let verdict = diagram::is_semistable_witness(&ctx.ext, &ctx.fam, xi)?;
    if !verdict.semistable {
        return Ok((json!({ "verdict": "not a semistable witness", "notes": verdict.notes }), None));
    }
    let norm = diagram::normalize_witness(&ctx.ext, &ctx.fam, xi)?;
    let v: Vec<i64> = (1..=ctx.ext.n()).map(|i| scaffold::scaling_exponent(&ctx.ext, i)).collect::<Result<_>>()?;
    let built = scaffold::build_from_semistable(&ctx.ext, &ctx.fam, &norm)?;
    let (check, _) = verify_json(ctx, &built)?;
    Ok((
        json!({
            "verdict": "scaffold",
            "normalized_witness": xi_json(&ctx.ext, &norm),
            "scaling_exponents": v,
            "psi": built.psi.iter().map(|x| xi_json(&ctx.ext, x)).collect::<Vec<_>>(),
            "verification": check,
        }),
        Some(built),
    ))
}

fn scaffold_build(ctx: &Ctx) -> Result<Value> {
    match find_witness(ctx)? {
        None => Ok(json!({ "verdict": "no semistable witness in the search family" })),
        Some((xi, source)) => {
            let (mut out, _) = build_json(ctx, &xi)?;
            out["witness_source"] = json!(source);
            out["witness"] = xi_json(&ctx.ext, &xi);
            Ok(out)
        }
    }
}

fn roundtrip(ctx: &Ctx, caveats: &mut Vec<String>) -> Result<Value> {
    let ext = &ctx.ext;
    let fam = &ctx.fam;
    let (mut scaffold, source) = match &ctx.config.scaffold {
        Some(spec) => (Some(resolve_scaffold(ext, spec)?), "config"),
        None => (Some(Scaffold::sigma_minus_one(ext)), "sigma-minus-one"),
    };
    let mut source = source.to_string();
    let mut certified = None;
    if let Some(s) = &scaffold {
        match scaffold::verify_scaffold(ext, fam, &s.psi, ctx.config.max_c) {
            Ok(rep) => certified = Some(rep.certified_precision),
            Err(Error::NotAScaffold(_)) if ctx.config.scaffold.is_none() => scaffold = None,
            Err(Error::NotAScaffold(msg)) => {
                return Ok(json!({ "verdict": "not a scaffold", "scaffold_source": source, "reason": msg }))
            }
            Err(e) => return Err(e),
        }
    }
    if scaffold.is_none() {
        let Some((xi, _)) = find_witness(ctx)? else {
            return Ok(json!({ "verdict": "no scaffold or semistable witness found", "semistable": "unknown" }));
        };
        let (_, built) = build_json(ctx, &xi)?;
        let Some(built) = built else {
            return Ok(json!({ "verdict": "no scaffold or semistable witness found", "semistable": "unknown" }));
        };
        let rep = scaffold::verify_scaffold(ext, fam, &built.psi, ctx.config.max_c)?;
        certified = Some(rep.certified_precision);
        scaffold = Some(built);
        source = "built from semistable witness".into();
    }
    let mut s = scaffold.expect("scaffold is set");
    let c = certified.expect("verified");
    s.precision = Some(Precision::Finite(c));

    let (xi, prec) = scaffold::semistable_from_scaffold(ext, fam, &s)?;
    let norm = diagram::normalize_witness(ext, fam, &xi)?;
    let rebuilt = scaffold::build_from_semistable(ext, fam, &norm)?;
    let rebuilt_rep = scaffold::verify_scaffold(ext, fam, &rebuilt.psi, ctx.config.max_c)?;
    let (promo, promoted) = promotion_json(ctx, &s)?;
    let threshold = scaffold::stability_threshold(ext);
    let precision = if promoted { Precision::Infinite } else { Precision::Finite(c) };
    let stable_by_threshold = precision.at_least(threshold);
    if stable_by_threshold && !prec.witness.stable {
        return Err(Error::assertion("stable witness when precision >= threshold", "G = N", prec.witness.diagram.precision));
    }
    if promoted {
        caveats.push("infinite precision rests on the algebraic identity Psi_i^p = 0".into());
    }
    if prec.witness.diagram.precision.is_infinite() {
        caveats.push(cap_caveat(ctx));
    }
    Ok(json!({
        "scaffold_source": source,
        "scaffold": {
            "psi": s.psi.iter().map(|x| xi_json(ext, x)).collect::<Vec<_>>(),
            "certified_precision": c,
        },
        "witness": {
            "xi": xi_json(ext, &xi),
            "diagram": diagram_json(&prec.witness.diagram),
            "expected_d": prec.expected_d,
        },
        "rebuilt": {
            "normalized_witness": xi_json(ext, &norm),
            "psi": rebuilt.psi.iter().map(|x| xi_json(ext, x)).collect::<Vec<_>>(),
            "certified_precision": rebuilt_rep.certified_precision,
        },
        "promotion": promo,
        "stability_threshold": threshold,
        "scaffold_precision": precision_json(precision),
        "semistable": prec.witness.semistable,
        "stable": prec.witness.stable,
        "verdict": if prec.witness.stable { "stable" } else { "semistable" },
    }))
}

fn falsify(ctx: &Ctx, caveats: &mut Vec<String>) -> Result<Value> {
    let cong = scaffold::breaks_congruence(&ctx.ext);
    let mut family = scaffold::default_family(&ctx.ext, &ctx.fam, ctx.config.falsify.random, ctx.config.seed);
    if let Some(spec) = &ctx.config.xi {
        family.insert(0, resolve_xi(&ctx.ext, spec)?);
    }
    let verdict = scaffold::criterion_c_falsifier(&ctx.ext, &ctx.fam, &family, ctx.config.falsify.samples, ctx.config.seed)?;
    let falsified = matches!(verdict, FalsifierVerdict::Falsified { .. });
    let congruent = cong.iter().all(|&c| c);
    if !falsified {
        caveats.push("consistency over a finite family does not prove semistability".into());
    }
    Ok(json!({
        "breaks_congruence": cong,
        "family_size": family.len(),
        "samples": ctx.config.falsify.samples,
        "criterion_c": verdict,
        "verdict": if falsified || !congruent { "not semistable" } else { "consistent over tested family" },
    }))
}
