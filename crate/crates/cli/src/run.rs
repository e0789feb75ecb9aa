//! Turns a parsed spec file into a problem and runs the requested checks.

use std::collections::BTreeMap;
use std::time::Instant;

use qe_core::homogeneous::{self, HomogeneousError, LieAlgebraModel, SolveOptions, Vector};
use qe_core::qe::{
    gamma_solve, killing_candidate, killing_integral_condition, lemma21_check, lie_div_energy, qe_residual,
    section2_suite, section3_suite, structure_checks, theorem11_check, GammaOptions, GammaSolution, QeError,
    Tolerances,
};
use qe_core::zoo::{self, Generator, GeneratorSpec, ZooError};
use qe_core::{Bindings, Entry, Expr, ExprError, Geometry, IdentityReport, PaperTag, QEData, ScalarField, VectorField};
use serde::Serialize;

use crate::spec::{parse_number, Section, SpecError, SpecFile};

/// Failures that stop a run before a report exists.
#[derive(Debug)]
pub enum RunError {
    Input(SpecError),
    Solver(SpecError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) => 2,
            RunError::Solver(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Input(e) => write!(f, "input error: {e}"),
            RunError::Solver(e) => write!(f, "solver did not converge: {e}"),
        }
    }
}

impl From<SpecError> for RunError {
    fn from(e: SpecError) -> Self {
        RunError::Input(e)
    }
}

pub struct CheckInfo {
    pub name: &'static str,
    /// Tolerance a bare number in `[checks]` overrides.
    pub primary: &'static str,
    pub algebra: bool,
    pub about: &'static str,
}

pub const REGISTRY: [CheckInfo; 11] = [
    CheckInfo { name: "qe_residual", primary: "solution", algebra: true, about: "defect E of the quasi-Einstein equation and its trace" },
    CheckInfo { name: "lemma21", primary: "integral", algebra: false, about: "∫ (div X)² = -∫ ⟨X, ∇ div X⟩ and the product rule behind it" },
    CheckInfo { name: "section2", primary: "identity", algebra: false, about: "trace identity chain and integral balance for solutions" },
    CheckInfo { name: "theorem11", primary: "constant", algebra: false, about: "constant scalar curvature iff X is Killing" },
    CheckInfo { name: "structure", primary: "killing", algebra: false, about: "Einstein case, Ricci eigenvalues, parallel Ric, gradient triviality" },
    CheckInfo { name: "gamma_solve", primary: "gamma", algebra: false, about: "positive Γ with div((2/m)ΓX + ∇Γ) = 0" },
    CheckInfo { name: "section3", primary: "rewrite", algebra: false, about: "rewrite of the equation through K and Γ, divergence pieces" },
    CheckInfo { name: "lie_div_energy", primary: "energy", algebra: false, about: "∫ div(L_K g)(K) = -½ ∫ |L_K g|²" },
    CheckInfo { name: "killing_integral", primary: "killing", algebra: false, about: "integral criterion for K to be Killing" },
    CheckInfo { name: "homogeneous", primary: "solution", algebra: true, about: "left-invariant solutions on a Lie algebra, each re-verified" },
    CheckInfo { name: "curvature", primary: "identity", algebra: false, about: "computed curvature against the closed form of the manifold" },
];

fn info(name: &str) -> Option<&'static CheckInfo> {
    REGISTRY.iter().find(|c| c.name == name)
}

#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub grid: Option<usize>,
    pub tolerances: Vec<(String, f64)>,
    pub timings: bool,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub verdict: &'static str,
    pub tolerance_overrides: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
    pub report: IdentityReport,
}

#[derive(Debug, Serialize)]
pub struct Problem {
    pub kind: &'static str,
    pub name: String,
    pub dim: usize,
    pub nodes: usize,
    pub m: f64,
    pub lambda: Option<f64>,
    pub gamma: String,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub spec_sha256: String,
    pub problem: Problem,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<CheckReport>,
    pub verdict: &'static str,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.report.passed())
    }
}

struct Request {
    name: &'static str,
    line: usize,
    overrides: Vec<(&'static str, f64)>,
}

fn tolerance_name(name: &str) -> Option<&'static str> {
    Tolerances::describe().map(|(n, _, _)| n).find(|n| *n == name)
}

fn requests(spec: &SpecFile, algebra: bool, m: f64, field_given: bool) -> Result<Vec<Request>, SpecError> {
    let Some(section) = spec.section("checks").filter(|s| !s.items.is_empty()) else {
        let names: Vec<&'static str> = if algebra {
            if field_given {
                vec!["qe_residual", "homogeneous"]
            } else {
                vec!["homogeneous"]
            }
        } else {
            let mut v = vec!["qe_residual", "lemma21", "section2"];
            if m != -2.0 {
                v.push("theorem11");
            }
            v.extend(["section3", "lie_div_energy", "killing_integral"]);
            v
        };
        let line = spec.section("checks").map_or(0, |s| s.line);
        return Ok(names.into_iter().map(|name| Request { name, line, overrides: Vec::new() }).collect());
    };
    let mut out = Vec::new();
    for item in &section.items {
        let check = info(&item.key).ok_or_else(|| {
            let names: Vec<&str> = REGISTRY.iter().map(|c| c.name).collect();
            section.error(item.line, format!("unknown check '{}'; known checks: {}", item.key, names.join(", ")))
        })?;
        if algebra && !check.algebra {
            return Err(section.error(item.line, format!("check '{}' needs a manifold, not an algebra", check.name)));
        }
        if !algebra && check.name == "homogeneous" {
            return Err(section.error(item.line, "check 'homogeneous' needs an [algebra] section"));
        }
        let mut overrides = Vec::new();
        if let Some(value) = &item.value {
            if let Some(v) = parse_number(value) {
                overrides.push((check.primary, v));
            } else {
                for part in value.split(',') {
                    let (k, v) = part
                        .split_once(':')
                        .ok_or_else(|| section.error(item.line, format!("expected NAME:VALUE, got '{}'", part.trim())))?;
                    let k = tolerance_name(k.trim())
                        .ok_or_else(|| section.error(item.line, format!("unknown tolerance '{}'", k.trim())))?;
                    let v = parse_number(v)
                        .filter(|v| *v >= 0.0)
                        .ok_or_else(|| section.error(item.line, format!("tolerance {k} must be a non-negative number")))?;
                    overrides.push((k, v));
                }
            }
        }
        out.push(Request { name: check.name, line: item.line, overrides });
    }
    Ok(out)
}

fn expr_error(section: &Section, line: usize, key: &str, e: ExprError) -> SpecError {
    section.error(line, format!("in '{key}': {e}"))
}

fn parse_expr(section: &Section, line: usize, key: &str, text: &str) -> Result<Expr, SpecError> {
    qe_core::parse(text).map_err(|e| expr_error(section, line, key, e))
}

/// Numeric entries of a section, skipping the listed keys.
fn numeric_bindings(section: &Section, skip: &[&str]) -> Result<Bindings, SpecError> {
    let mut out = Bindings::new();
    for item in &section.items {
        if skip.contains(&item.key.as_str()) {
            continue;
        }
        out.insert(item.key.clone(), section.number(item)?);
    }
    Ok(out)
}

enum GammaSource {
    Solve { line: usize },
    Expr { expr: Expr, line: usize },
    Unit,
}

struct ManifoldProblem {
    name: String,
    /// Deviation from the stored closed-form curvature: Ricci, scalar, trace.
    closed_form: Option<(f64, f64, f64)>,
    geo: Geometry,
    qe: QEData,
    gamma: GammaSource,
    gamma_cache: Option<(ScalarField, Option<GammaSolution>)>,
}

struct AlgebraProblem {
    model: LieAlgebraModel,
    m: f64,
    x: Option<Vec<f64>>,
    lambda: Option<f64>,
}

fn allowed_generator_keys(name: &str) -> &'static [&'static str] {
    match name {
        "flat_torus" => &["n", "L"],
        "torus_of_revolution" => &["R0", "r"],
        "round_sphere" => &["radius", "m"],
        "circle_qe" => &["c", "m"],
        "s1_cross_einstein" => &["rho", "m"],
        _ => &[],
    }
}

fn build_manifold(spec: &SpecFile, section: &Section, flags: &Flags) -> Result<ManifoldProblem, RunError> {
    let gen_item = section
        .get("generator")
        .ok_or_else(|| section.error(section.line, "missing 'generator'"))?;
    let gen_name = section.text(gen_item)?;
    let params_section = spec.section("params");
    let grid_section = spec.section("grid");

    let mut resolution = None;
    if let Some(g) = grid_section {
        for item in &g.items {
            if item.key != "resolution" {
                return Err(g.error(item.line, format!("unknown key '{}'", item.key)).into());
            }
            let v = g.number(item)?;
            if !(v >= 1.0 && v.fract() == 0.0) {
                return Err(g.error(item.line, "resolution must be a positive integer").into());
            }
            resolution = Some(v as usize);
        }
    }
    if flags.grid.is_some() {
        resolution = flags.grid;
    }

    // extra numeric [params] entries are symbols for expressions
    let mut bindings = match params_section {
        Some(p) => numeric_bindings(p, &["gamma"])?,
        None => Bindings::new(),
    };

    let generator = if gen_name == "custom" || gen_name == "custom_chart" {
        let dim_item = section
            .get("dim")
            .ok_or_else(|| section.error(gen_item.line, "custom charts need 'dim'"))?;
        let dim = section.number(dim_item)?;
        if !(dim >= 1.0 && dim.fract() == 0.0 && dim <= 4.0) {
            return Err(section.error(dim_item.line, "dim must be an integer between 1 and 4").into());
        }
        let dim = dim as usize;
        let mut metric = Vec::new();
        for i in 1..=dim {
            for j in i..=dim {
                let key = format!("g{i}{j}");
                let expr = match section.get(&key) {
                    Some(item) => parse_expr(section, item.line, &key, section.text(item)?)?,
                    None if i == j => return Err(section.error(gen_item.line, format!("missing metric component '{key}'")).into()),
                    None => qe_core::parse("0").expect("literal"),
                };
                metric.push(expr);
            }
        }
        let mut periods = Vec::new();
        for item in &section.items {
            let key = item.key.as_str();
            if key == "generator" || key == "dim" || key.starts_with('g') && key.len() == 3 {
                continue;
            }
            if let Some(axis) = key.strip_prefix('L').and_then(|a| a.parse::<usize>().ok()) {
                if axis == 0 || axis > dim {
                    return Err(section.error(item.line, format!("no axis {axis}")).into());
                }
                periods.push((axis, section.number(item)?));
                continue;
            }
            bindings.insert(item.key.clone(), section.number(item)?);
        }
        let periods = if periods.is_empty() {
            None
        } else if periods.len() == dim {
            periods.sort_by_key(|p| p.0);
            Some(periods.into_iter().map(|p| p.1).collect())
        } else {
            return Err(section.error(gen_item.line, "give a period L<i> for every axis or none").into());
        };
        Generator::CustomChart { dim, metric, params: bindings.clone(), periods }
    } else {
        if !Generator::NAMES.contains(&gen_name) {
            return Err(section
                .error(gen_item.line, format!("unknown generator '{gen_name}'; known: {}, custom", Generator::NAMES[..5].join(", ")))
                .into());
        }
        let allowed = allowed_generator_keys(gen_name);
        let mut params = Bindings::new();
        for item in &section.items {
            if item.key == "generator" {
                continue;
            }
            let is_period = gen_name == "flat_torus" && item.key.strip_prefix('L').is_some_and(|a| a.parse::<usize>().is_ok());
            if !allowed.contains(&item.key.as_str()) && !is_period {
                return Err(section
                    .error(item.line, format!("'{}' is not a parameter of {gen_name} (expected {})", item.key, allowed.join(", ")))
                    .into());
            }
            params.insert(item.key.clone(), section.number(item)?);
        }
        Generator::from_params(gen_name, &params).map_err(|e| section.error(gen_item.line, e.to_string()))?
    };

    let mut gspec = GeneratorSpec::new(generator);
    gspec.resolution = resolution;
    let (manifold, exact) = zoo::construct(&gspec).map_err(|e| match e {
        ZooError::Geometry(g) => section.error(gen_item.line, format!("metric: {g}")),
        other => section.error(gen_item.line, other.to_string()),
    })?;
    let closed_form = manifold.closed_form_deviation();
    let geo = manifold.geometry;
    let chart = geo.chart().clone();
    let dim = chart.dim();

    let m_given = params_section.and_then(|p| p.get("m").map(|i| (p, i)));
    let lambda_given = params_section.and_then(|p| p.get("lambda").map(|i| (p, i)));
    let (mut m, mut lambda, mut x) = match &exact {
        Some(q) => (Some(q.m), Some(q.lambda), Some(q.x.clone())),
        None => (None, None, None),
    };
    if let Some((p, i)) = m_given {
        m = Some(p.number(i)?);
    }
    if let Some((p, i)) = lambda_given {
        lambda = Some(p.number(i)?);
    }
    let need = |what: &str| -> SpecError {
        let (sec, line) = match params_section {
            Some(p) => (p.name.clone(), p.line),
            None => (section.name.clone(), gen_item.line),
        };
        SpecError { section: sec, line, message: format!("{gen_name} carries no exact triple; [params] must set '{what}'") }
    };
    let m = m.ok_or_else(|| need("m"))?;
    let lambda = lambda.ok_or_else(|| need("lambda"))?;
    if m == 0.0 {
        let (p, i) = m_given.expect("m = 0 only comes from [params]");
        return Err(p.error(i.line, "m must be nonzero").into());
    }
    bindings.insert("m".into(), m);
    bindings.insert("lambda".into(), lambda);

    if let Some(f) = spec.section("field") {
        let mut comps = vec![ScalarField::zeros(&chart); dim];
        for item in &f.items {
            let axis = item
                .key
                .strip_prefix('X')
                .and_then(|a| a.parse::<usize>().ok())
                .filter(|a| (1..=dim).contains(a))
                .ok_or_else(|| f.error(item.line, format!("expected X1..X{dim}, got '{}'", item.key)))?;
            let expr = parse_expr(f, item.line, &item.key, f.text(item)?)?;
            comps[axis - 1] = ScalarField::from_expr(&chart, &expr, &bindings).map_err(|e| expr_error(f, item.line, &item.key, e))?;
        }
        x = Some(VectorField::new(comps));
    }
    let x = x.unwrap_or_else(|| VectorField::zeros(&chart));

    let gamma = match params_section.and_then(|p| p.get("gamma").map(|i| (p, i))) {
        Some((p, item)) => {
            let text = p.text(item)?;
            if text == "solve" {
                GammaSource::Solve { line: item.line }
            } else {
                GammaSource::Expr { expr: parse_expr(p, item.line, "gamma", text)?, line: item.line }
            }
        }
        None if chart.is_grid() => GammaSource::Solve { line: 0 },
        None => GammaSource::Unit,
    };
    let qe = QEData::new(m, lambda, x).map_err(|e| section.error(gen_item.line, e.to_string()))?;
    let mut problem = ManifoldProblem { name: manifold.name, closed_form, geo, qe, gamma, gamma_cache: None };
    if let GammaSource::Expr { expr, line } = &problem.gamma {
        let p = params_section.expect("gamma comes from [params]");
        let g = ScalarField::from_expr(&chart, expr, &bindings).map_err(|e| expr_error(p, *line, "gamma", e))?;
        problem.gamma_cache = Some((g, None));
    }
    Ok(problem)
}

fn build_algebra(spec: &SpecFile, section: &Section) -> Result<AlgebraProblem, RunError> {
    let mut dim = None;
    let mut preset: Option<(&str, usize)> = None;
    let mut brackets = Vec::new();
    let mut q: Option<(Vec<f64>, usize)> = None;
    let mut a = None;
    for item in &section.items {
        match item.key.as_str() {
            "dim" => {
                let v = section.number(item)?;
                if !(v >= 1.0 && v.fract() == 0.0) {
                    return Err(section.error(item.line, "dim must be a positive integer").into());
                }
                dim = Some(v as usize);
            }
            "preset" => preset = Some((section.text(item)?, item.line)),
            "a" => a = Some(section.number(item)?),
            "bracket" => {
                // [e_i, e_j] = value e_k, indices from 1
                let parts: Vec<&str> = section.text(item)?.split_whitespace().collect();
                let bad = || section.error(item.line, "bracket expects 'i j k value' meaning [e_i, e_j] = value e_k");
                if parts.len() != 4 {
                    return Err(bad().into());
                }
                let idx: Vec<usize> = parts[..3].iter().map(|p| p.parse::<usize>()).collect::<Result<_, _>>().map_err(|_| bad())?;
                if idx.contains(&0) {
                    return Err(section.error(item.line, "bracket indices start at 1").into());
                }
                let v = parse_number(parts[3]).ok_or_else(bad)?;
                brackets.push((idx[0] - 1, idx[1] - 1, idx[2] - 1, v, item.line));
            }
            "q" => {
                let vals: Option<Vec<f64>> = section.text(item)?.split_whitespace().map(parse_number).collect();
                let vals = vals.ok_or_else(|| section.error(item.line, "q expects whitespace-separated numbers, row-major"))?;
                q = Some((vals, item.line));
            }
            other => return Err(section.error(item.line, format!("unknown key '{other}'")).into()),
        }
    }
    let model = match preset {
        Some(("su2", line)) => LieAlgebraModel::su2(q.map(|q| q.0).unwrap_or_else(|| identity(3))).map_err(|e| section.error(line, e.to_string()))?,
        Some(("berger", line)) => {
            let a = a.ok_or_else(|| section.error(line, "preset berger needs 'a'"))?;
            LieAlgebraModel::berger(a).map_err(|e| section.error(line, e.to_string()))?
        }
        Some(("abelian", line)) => {
            let d = dim.ok_or_else(|| section.error(line, "preset abelian needs 'dim'"))?;
            LieAlgebraModel::abelian(d, q.map(|q| q.0).unwrap_or_else(|| identity(d))).map_err(|e| section.error(line, e.to_string()))?
        }
        Some((other, line)) => return Err(section.error(line, format!("unknown preset '{other}' (su2, berger, abelian)")).into()),
        None => {
            let d = dim.ok_or_else(|| section.error(section.line, "set 'dim' or a 'preset'"))?;
            for &(i, j, k, _, line) in &brackets {
                if i.max(j).max(k) >= d {
                    return Err(section.error(line, format!("bracket index exceeds dim = {d}")).into());
                }
            }
            let list: Vec<_> = brackets.iter().map(|&(i, j, k, v, _)| (i, j, k, v)).collect();
            let q_line = q.as_ref().map_or(section.line, |q| q.1);
            LieAlgebraModel::from_brackets(d, &list, q.map(|q| q.0).unwrap_or_else(|| identity(d))).map_err(|e| match e {
                HomogeneousError::NotPositiveDefinite | HomogeneousError::Shape { .. } => section.error(q_line, e.to_string()),
                other => section.error(section.line, other.to_string()),
            })?
        }
    };
    let params = spec
        .section("params")
        .ok_or_else(|| section.error(section.line, "algebra runs need [params] with m"))?;
    let m_item = params.get("m").ok_or_else(|| params.error(params.line, "missing 'm'"))?;
    let m = params.number(m_item)?;
    if m == 0.0 {
        return Err(params.error(m_item.line, "m must be nonzero").into());
    }
    let lambda = params.get("lambda").map(|i| params.number(i)).transpose()?;
    let x = match spec.section("field") {
        Some(f) => {
            let d = model.dim();
            let mut x = vec![0.0; d];
            for item in &f.items {
                let axis = item
                    .key
                    .strip_prefix('X')
                    .and_then(|a| a.parse::<usize>().ok())
                    .filter(|a| (1..=d).contains(a))
                    .ok_or_else(|| f.error(item.line, format!("expected X1..X{d}, got '{}'", item.key)))?;
                x[axis - 1] = f.number(item)?;
            }
            Some(x)
        }
        None => None,
    };
    Ok(AlgebraProblem { model, m, x, lambda })
}

fn identity(d: usize) -> Vec<f64> {
    (0..d * d).map(|i| if i % (d + 1) == 0 { 1.0 } else { 0.0 }).collect()
}

fn qe_error(e: QeError, section: &str, line: usize) -> RunError {
    let err = SpecError { section: section.into(), line, message: e.to_string() };
    match e {
        QeError::NotConverged { .. } | QeError::NoPositiveKernel { .. } => RunError::Solver(err),
        _ => RunError::Input(err),
    }
}

impl ManifoldProblem {
    fn gamma(&mut self, checks_line: usize) -> Result<(ScalarField, Option<GammaSolution>), RunError> {
        if let Some(cached) = &self.gamma_cache {
            return Ok(cached.clone());
        }
        let value = match &self.gamma {
            GammaSource::Solve { line } => {
                let (sec, line) = if *line > 0 { ("params", *line) } else { ("checks", checks_line) };
                let sol = gamma_solve(&self.geo, &self.qe.x, self.qe.m, &GammaOptions::default()).map_err(|e| qe_error(e, sec, line))?;
                (sol.gamma.clone(), Some(sol))
            }
            GammaSource::Unit => (ScalarField::constant(self.geo.chart(), 1.0), None),
            GammaSource::Expr { .. } => unreachable!("evaluated while building"),
        };
        self.gamma_cache = Some(value.clone());
        Ok(value)
    }

    fn gamma_label(&self) -> String {
        match &self.gamma {
            GammaSource::Solve { .. } => "solve".into(),
            GammaSource::Expr { expr, .. } => format!("{expr}"),
            GammaSource::Unit => "1".into(),
        }
    }

    fn run(&mut self, req: &Request, tol: &Tolerances) -> Result<IdentityReport, RunError> {
        let geo = &self.geo;
        let at = |e: QeError| qe_error(e, "checks", req.line);
        Ok(match req.name {
            "qe_residual" => qe_residual(geo, &self.qe, tol).map_err(at)?.report,
            "lemma21" => lemma21_check(geo, &self.qe.x, tol),
            "section2" => section2_suite(geo, &self.qe, tol).map_err(at)?,
            "theorem11" => theorem11_check(geo, &self.qe, tol).map_err(at)?,
            "structure" => structure_checks(geo, &self.qe, tol).map_err(at)?,
            "curvature" => curvature_report(geo, self.closed_form, tol),
            name => {
                let (gamma, solution) = self.gamma(req.line)?;
                let geo = &self.geo;
                let k = killing_candidate(geo, &self.qe.x, self.qe.m, &gamma).map_err(|e| {
                    let line = match &self.gamma {
                        GammaSource::Expr { line, .. } => *line,
                        _ => req.line,
                    };
                    qe_error(e, "params", line)
                })?;
                match name {
                    "gamma_solve" => gamma_report(geo, &gamma, &k.div_k, solution.as_ref(), tol),
                    "section3" => section3_suite(geo, &self.qe, &gamma, &k.k, tol).map_err(at)?,
                    "lie_div_energy" => lie_div_energy(geo, &k.k, tol),
                    "killing_integral" => killing_integral_condition(geo, &self.qe, &gamma, &k.k, tol).map_err(at)?,
                    other => unreachable!("unregistered check {other}"),
                }
            }
        })
    }
}

fn gamma_report(
    geo: &Geometry,
    gamma: &ScalarField,
    div_k: &ScalarField,
    solution: Option<&GammaSolution>,
    tol: &Tolerances,
) -> IdentityReport {
    let mut report = IdentityReport::new();
    let min = gamma.min_value();
    match solution {
        Some(s) => {
            report.push(
                Entry::bound("gamma_kernel", PaperTag::KillingCandidate, s.mu.abs(), tol.get("kernel") * s.operator_scale)
                    .with_note(format!("{} iterations, eigen-residual {:.3e}", s.iterations, s.residual)),
            );
            report.scalar("mu", s.mu);
            report.scalar("operator_scale", s.operator_scale);
            report.scalar("shift", s.shift);
        }
        None => report.push(Entry::skipped("gamma_kernel", PaperTag::KillingCandidate, "Γ given, not solved")),
    }
    report.push(Entry::logical("gamma_positive", PaperTag::KillingCandidate, min > 0.0));
    report.push(Entry::pointwise("div_k", PaperTag::KillingCandidate, geo.linf(div_k), geo.l2(div_k), tol.get("gamma")));
    report.scalar("min_gamma", min);
    report.scalar("max_gamma", gamma.max_value());
    report
}

fn curvature_report(geo: &Geometry, closed_form: Option<(f64, f64, f64)>, tol: &Tolerances) -> IdentityReport {
    let mut report = IdentityReport::new();
    let r = geo.scalar_curvature();
    let (mean, sd) = r.mean_sd();
    report.scalar("mean_r", mean);
    report.scalar("sd_r", sd);
    report.scalar("volume", geo.volume());
    report.scalar("integral_r", geo.integrate(r));
    report.scalar("ricci_asymmetry", geo.ricci_asymmetry());
    let t = tol.get("identity");
    match closed_form {
        Some((ric, scalar, _)) => {
            report.push(Entry::bound("closed_form_ricci", PaperTag::Trace, ric, t));
            report.push(Entry::bound("closed_form_scalar", PaperTag::Trace, scalar, t));
        }
        None => report.push(Entry::skipped("closed_form_scalar", PaperTag::Trace, "no closed form for this manifold")),
    }
    let trace = &geo.trace(geo.ricci()) - r;
    report.push(Entry::pointwise("ricci_trace", PaperTag::Trace, geo.linf(&trace), geo.l2(&trace), t));
    // twice contracted identity div Ric = ½ dR
    let div_ric = geo.div_symtensor(geo.ricci());
    let dr = geo.differential(r);
    let bianchi = qe_core::OneFormField::new(div_ric.comps.iter().zip(&dr.comps).map(|(a, b)| a - &b.scale(0.5)).collect());
    report.push(Entry::pointwise("bianchi", PaperTag::DivGammaRicci, geo.linf_form(&bianchi), geo.l2_form(&bianchi), t));
    report
}

fn run_algebra(p: &AlgebraProblem, req: &Request, tol: &Tolerances) -> Result<IdentityReport, RunError> {
    let err = |e: HomogeneousError| RunError::Input(SpecError { section: "checks".into(), line: req.line, message: e.to_string() });
    match req.name {
        "homogeneous" => {
            let opts = SolveOptions { residual: tol.get("solution").min(1e-10), killing: tol.get("killing"), ..SolveOptions::default() };
            homogeneous::homogeneous_report(&p.model, p.m, &opts).map_err(err)
        }
        "qe_residual" => {
            let mut report = IdentityReport::new();
            let (Some(x), Some(lambda)) = (&p.x, p.lambda) else {
                report.push(Entry::skipped("quasi_einstein", PaperTag::QeEquation, "needs [field] and lambda"));
                return Ok(report);
            };
            let x = Vector::from_column_slice(x);
            let e = homogeneous::algebraic_qe_residual(&p.model, &x, p.m, lambda).map_err(err)?;
            let curv = homogeneous::algebra_curvature(&p.model);
            let lie = homogeneous::lie_derivative(&p.model, &curv, &x);
            report.push(Entry::pointwise("quasi_einstein", PaperTag::QeEquation, e.amax(), e.norm(), tol.solution(lambda)));
            report.scalar("scalar_curvature", curv.scalar);
            report.scalar("sup_lie_x", lie.amax());
            Ok(report)
        }
        other => unreachable!("{other} is not an algebra check"),
    }
}

pub fn run(text: &str, spec_sha256: String, flags: &Flags) -> Result<RunReport, RunError> {
    let spec = crate::spec::parse(text)?;
    let mut base = Tolerances::default();
    for (name, value) in &flags.tolerances {
        base.set(name, *value)
            .map_err(|m| SpecError { section: String::new(), line: 0, message: format!("--tol: {m}") })?;
    }
    let manifold = spec.section("manifold");
    let algebra = spec.section("algebra");
    let (problem, mut runner): (Problem, Box<dyn FnMut(&Request, &Tolerances) -> Result<IdentityReport, RunError>>) =
        match (manifold, algebra) {
            (Some(_), Some(a)) => return Err(a.error(a.line, "give exactly one of [manifold] and [algebra]").into()),
            (None, None) => {
                return Err(SpecError { section: String::new(), line: 1, message: "missing [manifold] or [algebra] section".into() }.into())
            }
            (Some(section), None) => {
                let mut mp = build_manifold(&spec, section, flags)?;
                let problem = Problem {
                    kind: "manifold",
                    name: mp.name.clone(),
                    dim: mp.geo.dim(),
                    nodes: mp.geo.chart().len(),
                    m: mp.qe.m,
                    lambda: Some(mp.qe.lambda),
                    gamma: mp.gamma_label(),
                };
                (problem, Box::new(move |r, t| mp.run(r, t)))
            }
            (None, Some(section)) => {
                let ap = build_algebra(&spec, section)?;
                let problem = Problem {
                    kind: "algebra",
                    name: "lie_algebra".into(),
                    dim: ap.model.dim(),
                    nodes: 1,
                    m: ap.m,
                    lambda: ap.lambda,
                    gamma: "n/a".into(),
                };
                (problem, Box::new(move |r, t| run_algebra(&ap, r, t)))
            }
        };
    let field_given = spec.section("field").is_some();
    let reqs = requests(&spec, problem.kind == "algebra", problem.m, field_given)?;

    let mut checks = Vec::new();
    for req in &reqs {
        // the command line beats the spec file
        let overrides: BTreeMap<String, f64> = req
            .overrides
            .iter()
            .filter(|(k, _)| !flags.tolerances.iter().any(|(n, _)| n == k))
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let mut tol = base.clone();
        for (k, v) in &overrides {
            tol.set(k, *v).expect("validated name");
        }
        let start = Instant::now();
        let report = runner(req, &tol)?;
        let elapsed = start.elapsed().as_secs_f64();
        checks.push(CheckReport {
            name: req.name.to_string(),
            verdict: if report.passed() { "pass" } else { "fail" },
            tolerance_overrides: overrides,
            wall_clock_s: flags.timings.then_some(elapsed),
            report,
        });
    }
    let tolerances = Tolerances::describe().map(|(n, _, _)| (n.to_string(), base.get(n))).collect();
    let mut out = RunReport {
        tool: "qecheck",
        version: env!("CARGO_PKG_VERSION"),
        spec_sha256,
        problem,
        tolerances,
        checks,
        verdict: "pass",
    };
    if !out.passed() {
        out.verdict = "fail";
    }
    Ok(out)
}
