//! Named test manifolds and the exact quasi-Einstein triples they carry.

use std::f64::consts::PI;
use std::sync::Arc;

use thiserror::Error;

use crate::chart::{Axis, Chart, ChartGrid, DEFAULT_GRID};
use crate::expr::{self, Bindings, Expr};
use crate::field::{sym_index, ScalarField, SymTensorField, VectorField};
use crate::metric::{Geometry, MetricField};
use crate::qe::QEData;
use crate::GeometryError;

/// Quadrature nodes per axis on analytic charts.
pub const ANALYTIC_NODES: usize = 8;
/// Retained jet order on analytic charts; curvature derivatives need three.
pub const JET_ORDER: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum ZooError {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("missing parameter '{0}'")]
    Missing(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<crate::expr::ExprError> for ZooError {
    fn from(e: crate::expr::ExprError) -> Self {
        ZooError::Geometry(GeometryError::Expr(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    FlatTorus { dim: usize, periods: Option<Vec<f64>> },
    TorusOfRevolution { r0: f64, r: f64 },
    RoundSphere { radius: f64, m: Option<f64> },
    CircleQe { c: f64, m: f64 },
    S1CrossEinstein { rho: f64, m: f64 },
    /// Packed upper-triangular metric components `g11, g12, .., gnn`.
    CustomChart { dim: usize, metric: Vec<Expr>, params: Bindings, periods: Option<Vec<f64>> },
}

impl Generator {
    pub const NAMES: [&'static str; 6] = [
        "flat_torus",
        "torus_of_revolution",
        "round_sphere",
        "circle_qe",
        "s1_cross_einstein",
        "custom_chart",
    ];

    /// Builds a generator from its name and a flat parameter map. Custom
    /// charts take their metric separately.
    pub fn from_params(name: &str, params: &Bindings) -> Result<Self, ZooError> {
        let get = |k: &str| params.get(k).copied().ok_or_else(|| ZooError::Missing(k.to_string()));
        let get_or = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
        Ok(match name {
            "flat_torus" => {
                let dim = get_or("n", 2.0);
                if !(dim >= 1.0 && dim.fract() == 0.0) {
                    return Err(ZooError::OutOfRange(format!("n = {dim} must be a positive integer")));
                }
                let dim = dim as usize;
                let periods: Option<Vec<f64>> = (1..=dim)
                    .map(|i| params.get(&format!("L{i}")).copied())
                    .collect::<Option<Vec<f64>>>()
                    .or_else(|| params.get("L").map(|&l| vec![l; dim]));
                Generator::FlatTorus { dim, periods }
            }
            "torus_of_revolution" => Generator::TorusOfRevolution {
                r0: get("R0")?,
                r: get("r")?,
            },
            "round_sphere" => Generator::RoundSphere {
                radius: get_or("radius", 1.0),
                m: params.get("m").copied(),
            },
            "circle_qe" => Generator::CircleQe { c: get("c")?, m: get("m")? },
            "s1_cross_einstein" => Generator::S1CrossEinstein {
                rho: get("rho")?,
                m: get("m")?,
            },
            other => return Err(ZooError::UnknownGenerator(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub generator: Generator,
    /// Nodes per axis; grid default 64, analytic default 8.
    pub resolution: Option<usize>,
}

impl GeneratorSpec {
    pub fn new(generator: Generator) -> Self {
        GeneratorSpec {
            generator,
            resolution: None,
        }
    }

    pub fn with_resolution(mut self, n: usize) -> Self {
        self.resolution = Some(n);
        self
    }
}

/// Closed-form curvature stored alongside an analytic manifold.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub ricci: SymTensorField,
    pub scalar: ScalarField,
}

#[derive(Debug, Clone)]
pub struct Manifold {
    pub name: String,
    pub geometry: Geometry,
    pub closed_form: Option<ClosedForm>,
    /// Known total volume, when there is a closed form.
    pub volume: Option<f64>,
}

impl Manifold {
    pub fn chart(&self) -> &Arc<Chart> {
        self.geometry.chart()
    }

    /// Largest deviation between computed and stored closed-form curvature,
    /// `(Ricci, scalar, trace of stored Ricci against stored scalar)`.
    pub fn closed_form_deviation(&self) -> Option<(f64, f64, f64)> {
        let cf = self.closed_form.as_ref()?;
        let geo = &self.geometry;
        let ric = geo.ricci().sub(&cf.ricci).sup_component();
        let scalar = (geo.scalar_curvature() - &cf.scalar).sup_abs();
        let trace = (&geo.trace(&cf.ricci) - &cf.scalar).sup_abs();
        Some((ric, scalar, trace))
    }
}

fn parse_all(texts: &[&str]) -> Vec<Expr> {
    texts.iter().map(|t| expr::parse(t).expect("built-in expression")).collect()
}

fn bindings(pairs: &[(&str, f64)]) -> Bindings {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn grid(dim: usize, resolution: Option<usize>, periods: Option<Vec<f64>>) -> Result<Arc<Chart>, ZooError> {
    let count = resolution.unwrap_or(DEFAULT_GRID);
    let grid = match periods {
        Some(p) => ChartGrid::with_periods(vec![count; dim], p),
        None => ChartGrid::uniform(dim, count),
    };
    Ok(grid.build()?)
}

fn sym_from_exprs(chart: &Arc<Chart>, dim: usize, texts: &[&str], params: &Bindings) -> Result<SymTensorField, ZooError> {
    let fields = parse_all(texts)
        .iter()
        .map(|e| ScalarField::from_expr(chart, e, params))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SymTensorField::from_fn(dim, |i, j| fields[sym_index(dim, i, j)].clone()))
}

fn analytic_sphere_axes(nodes: usize) -> Vec<Axis> {
    vec![Axis::gauss_legendre(nodes, -1.0, 1.0), Axis::periodic(nodes, 2.0 * PI)]
}

/// Builds the manifold and, for generators that define one, an exact triple.
pub fn construct(spec: &GeneratorSpec) -> Result<(Manifold, Option<QEData>), ZooError> {
    let res = spec.resolution;
    match &spec.generator {
        Generator::FlatTorus { dim, periods } => {
            if *dim == 0 {
                return Err(ZooError::OutOfRange("n must be at least 1".into()));
            }
            let chart = grid(*dim, res, periods.clone())?;
            let volume = chart.coordinate_volume();
            let geometry = Geometry::new(MetricField::euclidean(&chart));
            let closed_form = ClosedForm {
                ricci: SymTensorField::zeros(&chart),
                scalar: ScalarField::zeros(&chart),
            };
            Ok((
                Manifold {
                    name: "flat_torus".into(),
                    geometry,
                    closed_form: Some(closed_form),
                    volume: Some(volume),
                },
                None,
            ))
        }
        Generator::TorusOfRevolution { r0, r } => {
            if !(*r > 0.0 && r < r0) {
                return Err(ZooError::OutOfRange(format!("torus of revolution needs 0 < r < R0 (r = {r}, R0 = {r0})")));
            }
            let chart = grid(2, res, None)?;
            let params = bindings(&[("R0", *r0), ("r", *r)]);
            let metric = MetricField::from_exprs(&chart, &parse_all(&["(R0 + r*cos(u2))^2", "0", "r^2"]), &params)?;
            // Gauss curvature cos(u2) / (r (R0 + r cos(u2))); in two dimensions Ric = (R/2) g
            let scalar = ScalarField::parse(&chart, "2*cos(u2)/(r*(R0 + r*cos(u2)))", &params)?;
            let ricci = metric.tensor().mul_scalar(&scalar.scale(0.5));
            Ok((
                Manifold {
                    name: "torus_of_revolution".into(),
                    geometry: Geometry::new(metric),
                    closed_form: Some(ClosedForm { ricci, scalar }),
                    volume: Some(4.0 * PI * PI * r0 * r),
                },
                None,
            ))
        }
        Generator::RoundSphere { radius, m } => {
            if !(*radius > 0.0) {
                return Err(ZooError::OutOfRange(format!("radius {radius} must be positive")));
            }
            // u1 = cos(colatitude), u2 = longitude
            let chart = Chart::analytic(analytic_sphere_axes(res.unwrap_or(ANALYTIC_NODES)), JET_ORDER);
            let params = bindings(&[("a", *radius)]);
            let metric = MetricField::new(sym_from_exprs(&chart, 2, &["a^2/(1 - u1^2)", "0", "a^2*(1 - u1^2)"], &params)?)?;
            let ricci = sym_from_exprs(&chart, 2, &["1/(1 - u1^2)", "0", "1 - u1^2"], &params)?;
            let scalar = ScalarField::constant(&chart, 2.0 / (radius * radius));
            let qe = match m {
                Some(m) => Some(
                    QEData::new(*m, 1.0 / (radius * radius), VectorField::zeros(&chart))
                        .map_err(|e| ZooError::OutOfRange(e.to_string()))?,
                ),
                None => None,
            };
            Ok((
                Manifold {
                    name: "round_sphere".into(),
                    geometry: Geometry::new(metric),
                    closed_form: Some(ClosedForm { ricci, scalar }),
                    volume: Some(4.0 * PI * radius * radius),
                },
                qe,
            ))
        }
        Generator::CircleQe { c, m } => {
            if *m == 0.0 {
                return Err(ZooError::OutOfRange("m must be nonzero".into()));
            }
            let chart = grid(1, res, None)?;
            let geometry = Geometry::new(MetricField::euclidean(&chart));
            let x = VectorField::coordinate(&chart, 0, *c);
            let qe = QEData::new(*m, -c * c / m, x).map_err(|e| ZooError::OutOfRange(e.to_string()))?;
            Ok((
                Manifold {
                    name: "circle_qe".into(),
                    geometry,
                    closed_form: None,
                    volume: Some(2.0 * PI),
                },
                Some(qe),
            ))
        }
        Generator::S1CrossEinstein { rho, m } => {
            if *m == 0.0 {
                return Err(ZooError::OutOfRange("m must be nonzero".into()));
            }
            if !(*rho > 0.0) {
                return Err(ZooError::OutOfRange(format!(
                    "rho = {rho}: only positive Einstein constants (round S² factors) are available"
                )));
            }
            if m * rho > 0.0 {
                return Err(ZooError::OutOfRange(format!("m·rho = {} must be nonpositive", m * rho)));
            }
            let nodes = res.unwrap_or(ANALYTIC_NODES);
            let mut axes = vec![Axis::periodic(nodes, 2.0 * PI)];
            axes.extend(analytic_sphere_axes(nodes));
            // u1 = circle angle, u2 = cos(colatitude), u3 = longitude on S²(a), a² = 1/ρ
            let chart = Chart::analytic(axes, JET_ORDER);
            let a2 = 1.0 / rho;
            let params = bindings(&[("a2", a2)]);
            let metric = MetricField::new(sym_from_exprs(
                &chart,
                3,
                &["1", "0", "0", "a2/(1 - u2^2)", "0", "a2*(1 - u2^2)"],
                &params,
            )?)?;
            let ricci = sym_from_exprs(&chart, 3, &["0", "0", "0", "1/(1 - u2^2)", "0", "1 - u2^2"], &params)?;
            let scalar = ScalarField::constant(&chart, 2.0 * rho);
            let c = (-m * rho).sqrt();
            let x = VectorField::coordinate(&chart, 0, c);
            let qe = QEData::new(*m, *rho, x).map_err(|e| ZooError::OutOfRange(e.to_string()))?;
            Ok((
                Manifold {
                    name: "s1_cross_einstein".into(),
                    geometry: Geometry::new(metric),
                    closed_form: Some(ClosedForm { ricci, scalar }),
                    volume: Some(2.0 * PI * 4.0 * PI * a2),
                },
                Some(qe),
            ))
        }
        Generator::CustomChart {
            dim,
            metric,
            params,
            periods,
        } => {
            let chart = grid(*dim, res, periods.clone())?;
            let metric = MetricField::from_exprs(&chart, metric, params)?;
            Ok((
                Manifold {
                    name: "custom_chart".into(),
                    geometry: Geometry::new(metric),
                    closed_form: None,
                    volume: None,
                },
                None,
            ))
        }
    }
}
