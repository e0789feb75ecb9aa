//! Left-invariant metrics and fields on a Lie algebra, where the
//! quasi-Einstein equation becomes finite-dimensional matrix algebra.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::qe::report::{Entry, IdentityReport, PaperTag};

#[derive(Debug, Error, PartialEq)]
pub enum HomogeneousError {
    #[error("expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("structure constants are not antisymmetric (defect {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("Jacobi identity fails (residual {0:.3e})")]
    Jacobi(f64),
    #[error("inner product is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("m must be nonzero")]
    ZeroM,
    #[error("solver supports dimension at most 4 (got {0})")]
    TooLarge(usize),
}

pub const JACOBI_TOL: f64 = 1e-12;

/// Coordinates of an algebra element.
pub type Vector = DVector<f64>;

/// Structure constants `c^k_ij` with `[e_i, e_j] = c^k_ij e_k`, and the inner
/// product `Q_ij = ⟨e_i, e_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraModel {
    dim: usize,
    // index (k * d + i) * d + j
    c: Vec<f64>,
    q: DMatrix<f64>,
}

impl LieAlgebraModel {
    /// `structure` is laid out as `c[k][i][j]`, `q` row-major.
    pub fn new(dim: usize, structure: Vec<f64>, q: Vec<f64>) -> Result<Self, HomogeneousError> {
        if structure.len() != dim * dim * dim {
            return Err(HomogeneousError::Shape {
                expected: dim * dim * dim,
                got: structure.len(),
            });
        }
        if q.len() != dim * dim {
            return Err(HomogeneousError::Shape {
                expected: dim * dim,
                got: q.len(),
            });
        }
        let q = DMatrix::from_row_slice(dim, dim, &q);
        let model = LieAlgebraModel { dim, c: structure, q };
        let mut skew: f64 = 0.0;
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    skew = skew.max((model.structure(k, i, j) + model.structure(k, j, i)).abs());
                }
            }
        }
        if skew > JACOBI_TOL {
            return Err(HomogeneousError::NotAntisymmetric(skew));
        }
        let asym = (&model.q - model.q.transpose()).amax();
        if !(asym <= JACOBI_TOL * model.q.amax().max(1.0)) || model.q.clone().cholesky().is_none() {
            return Err(HomogeneousError::NotPositiveDefinite);
        }
        let jacobi = model.jacobi_residual();
        if jacobi > JACOBI_TOL {
            return Err(HomogeneousError::Jacobi(jacobi));
        }
        Ok(model)
    }

    /// Builds from a list of brackets `[e_i, e_j] = Σ value e_k`, filling in
    /// the antisymmetric partner.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, usize, f64)], q: Vec<f64>) -> Result<Self, HomogeneousError> {
        let mut c = vec![0.0; dim * dim * dim];
        for &(i, j, k, v) in brackets {
            if i >= dim || j >= dim || k >= dim {
                return Err(HomogeneousError::Shape { expected: dim, got: i.max(j).max(k) + 1 });
            }
            c[(k * dim + i) * dim + j] += v;
            c[(k * dim + j) * dim + i] -= v;
        }
        LieAlgebraModel::new(dim, c, q)
    }

    pub fn abelian(dim: usize, q: Vec<f64>) -> Result<Self, HomogeneousError> {
        LieAlgebraModel::new(dim, vec![0.0; dim * dim * dim], q)
    }

    /// su(2) with `[e1, e2] = e3` and cyclic.
    pub fn su2(q: Vec<f64>) -> Result<Self, HomogeneousError> {
        LieAlgebraModel::from_brackets(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)], q)
    }

    /// Berger metric `diag(a, 1, 1)` on su(2).
    pub fn berger(a: f64) -> Result<Self, HomogeneousError> {
        LieAlgebraModel::su2(vec![a, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.dim + i) * self.dim + j]
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Coordinates of `[x, y]`.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |k, _| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += self.structure(k, i, j) * x[i] * y[j];
                }
            }
            s
        })
    }

    /// `max |[[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]|`.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let e = |i: usize| DVector::from_fn(d, |a, _| if a == i { 1.0 } else { 0.0 });
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (ei, ej, ek) = (e(i), e(j), e(k));
                    let s = self.bracket(&self.bracket(&ei, &ej), &ek)
                        + self.bracket(&self.bracket(&ej, &ek), &ei)
                        + self.bracket(&self.bracket(&ek, &ei), &ej);
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }

    /// The same algebra and metric in the basis `f_a = Σ_j p_ja e_j`.
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<Self, HomogeneousError> {
        let d = self.dim;
        let p_inv = p.clone().try_inverse().ok_or(HomogeneousError::NotPositiveDefinite)?;
        let mut c = vec![0.0; d * d * d];
        for a in 0..d {
            for b in 0..d {
                let br = self.bracket(&p.column(a).into_owned(), &p.column(b).into_owned());
                let coords = &p_inv * br;
                for k in 0..d {
                    c[(k * d + a) * d + b] = coords[k];
                }
            }
        }
        let q = p.transpose() * &self.q * p;
        let q = (&q + q.transpose()) * 0.5;
        let q_rows: Vec<f64> = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| q[(i, j)]).collect();
        LieAlgebraModel::new(d, c, q_rows)
    }
}

#[derive(Debug, Clone)]
pub struct AlgebraCurvature {
    /// `connection[i][(k, j)] = Γ^k_ij`, so `∇_{e_i} e_j` is column `j`.
    pub connection: Vec<DMatrix<f64>>,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

/// Levi-Civita connection by the Koszul formula and the Ricci tensor of the
/// left-invariant metric.
pub fn algebra_curvature(l: &LieAlgebraModel) -> AlgebraCurvature {
    let d = l.dim;
    let q = &l.q;
    let q_inv = q.clone().cholesky().expect("checked at construction").inverse();
    // lowered[i][j][m] = ⟨[e_i, e_j], e_m⟩
    let lowered = |i: usize, j: usize, m: usize| (0..d).map(|k| l.structure(k, i, j) * q[(k, m)]).sum::<f64>();
    let connection: Vec<DMatrix<f64>> = (0..d)
        .map(|i| {
            let low = DMatrix::from_fn(d, d, |m, j| 0.5 * (lowered(i, j, m) - lowered(j, m, i) + lowered(m, i, j)));
            &q_inv * low
        })
        .collect();

    let mut ricci = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            // R(e_i, e_j) = [∇_i, ∇_j] - ∇_[e_i, e_j]
            let mut r = &connection[i] * &connection[j] - &connection[j] * &connection[i];
            for (k, a) in connection.iter().enumerate() {
                r -= a * l.structure(k, i, j);
            }
            // Ric(e_j, e_k) = Σ_i (R(e_i, e_j) e_k)^i
            for k in 0..d {
                ricci[(j, k)] += r[(i, k)];
            }
        }
    }
    let ricci = (&ricci + ricci.transpose()) * 0.5;
    let scalar = (&q_inv * &ricci).trace();
    AlgebraCurvature {
        connection,
        ricci,
        scalar,
    }
}

/// `(L_X g)(e_a, e_b) = ⟨∇_a X, e_b⟩ + ⟨e_a, ∇_b X⟩` for left-invariant X.
pub fn lie_derivative(l: &LieAlgebraModel, curv: &AlgebraCurvature, x: &DVector<f64>) -> DMatrix<f64> {
    let d = l.dim;
    let mut m = DMatrix::<f64>::zeros(d, d);
    for a in 0..d {
        let qnx = &l.q * (&curv.connection[a] * x);
        for b in 0..d {
            m[(a, b)] = qnx[b];
        }
    }
    &m + m.transpose()
}

fn residual_with(l: &LieAlgebraModel, curv: &AlgebraCurvature, x: &DVector<f64>, m: f64, lambda: f64) -> DMatrix<f64> {
    let qx = &l.q * x;
    &curv.ricci + lie_derivative(l, curv, x) * 0.5 - (&qx * qx.transpose()) / m - &l.q * lambda
}

/// `E = Ric + ½ L_X g - (1/m) X* X*ᵀ - λ Q` as a matrix.
pub fn algebraic_qe_residual(l: &LieAlgebraModel, x: &DVector<f64>, m: f64, lambda: f64) -> Result<DMatrix<f64>, HomogeneousError> {
    if m == 0.0 {
        return Err(HomogeneousError::ZeroM);
    }
    if x.len() != l.dim {
        return Err(HomogeneousError::Shape {
            expected: l.dim,
            got: x.len(),
        });
    }
    Ok(residual_with(l, &algebra_curvature(l), x, m, lambda))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Acceptance threshold on the Frobenius norm of E.
    pub residual: f64,
    /// Solutions closer than this in `‖ΔX‖ + |Δλ|` are merged.
    pub merge: f64,
    pub killing: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 100,
            max_halvings: 30,
            residual: 1e-10,
            merge: 1e-6,
            killing: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QeSolution {
    pub x: Vec<f64>,
    pub lambda: f64,
    /// Frobenius norm of E.
    pub residual: f64,
    /// Frobenius norm of `L_X g`.
    pub killing_norm: f64,
    pub killing: bool,
}

fn upper(e: &DMatrix<f64>) -> Vec<f64> {
    let d = e.nrows();
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            // off-diagonal entries count twice in the Frobenius norm
            out.push(if i == j { e[(i, j)] } else { e[(i, j)] * std::f64::consts::SQRT_2 });
        }
    }
    out
}

struct Problem<'a> {
    l: &'a LieAlgebraModel,
    curv: AlgebraCurvature,
    m: f64,
    // L_{e_a} g, linear in X
    lie_basis: Vec<DMatrix<f64>>,
}

impl Problem<'_> {
    fn residual(&self, z: &DVector<f64>) -> DVector<f64> {
        let d = self.l.dim;
        let q = &self.l.q;
        let qx = q * z.rows(0, d);
        let mut e = &self.curv.ricci - (&qx * qx.transpose()) / self.m - q * z[d];
        for (a, lie) in self.lie_basis.iter().enumerate() {
            e += lie * (0.5 * z[a]);
        }
        DVector::from_vec(upper(&e))
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let d = self.l.dim;
        let rows = d * (d + 1) / 2;
        let q = &self.l.q;
        let qx = q * z.rows(0, d);
        let mut jac = DMatrix::<f64>::zeros(rows, d + 1);
        for a in 0..d {
            let qa = q.column(a);
            let col = &self.lie_basis[a] * 0.5 - (&qa * qx.transpose() + &qx * qa.transpose()) / self.m;
            for (r, v) in upper(&col).into_iter().enumerate() {
                jac[(r, a)] = v;
            }
        }
        for (r, v) in upper(&(-q)).into_iter().enumerate() {
            jac[(r, d)] = v;
        }
        jac
    }

    fn newton(&self, start: DVector<f64>, opts: &SolveOptions) -> (DVector<f64>, f64) {
        let mut z = start;
        let mut r = self.residual(&z);
        let mut norm = r.norm();
        let mut stalls = 0;
        for _ in 0..opts.max_iterations {
            if norm == 0.0 {
                break;
            }
            let svd = self.jacobian(&z).svd(true, true);
            let step = match svd.solve(&(-&r), 1e-14) {
                Ok(s) => s,
                Err(_) => break,
            };
            // roots where E is quadratic in X converge only linearly, so
            // iterate until the step itself is negligible
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let trial = &z + &step * t;
                let tr = self.residual(&trial);
                let tn = tr.norm();
                if tn < norm {
                    accepted = Some((trial, tr, tn));
                    break;
                }
                t *= 0.5;
            }
            let Some((nz, nr, nn)) = accepted else { break };
            // abandon starts that creep along a nonzero local minimum
            if norm > opts.residual && nn > 0.99 * norm {
                stalls += 1;
                if stalls >= 5 {
                    z = nz;
                    norm = nn;
                    break;
                }
            }
            z = nz;
            r = nr;
            norm = nn;
        }
        (z, norm)
    }
}

/// Damped Gauss-Newton from the grid `X ∈ {-2..2}^d`, `λ ∈ {-2, -1, 0, ½, 1, 2}`.
/// Returns distinct solutions sorted by λ, then by X.
pub fn qe_solve(l: &LieAlgebraModel, m: f64, opts: &SolveOptions) -> Result<Vec<QeSolution>, HomogeneousError> {
    if m == 0.0 {
        return Err(HomogeneousError::ZeroM);
    }
    let d = l.dim;
    if d > 4 {
        return Err(HomogeneousError::TooLarge(d));
    }
    let curv = algebra_curvature(l);
    let lie_basis = (0..d)
        .map(|a| lie_derivative(l, &curv, &DVector::from_fn(d, |i, _| if i == a { 1.0 } else { 0.0 })))
        .collect();
    let problem = Problem { l, curv, m, lie_basis };

    let lambdas = [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0];
    let starts = 5usize.pow(d as u32);
    let mut found: Vec<QeSolution> = Vec::new();
    for s in 0..starts {
        let mut code = s;
        let x0: Vec<f64> = (0..d)
            .map(|_| {
                let v = (code % 5) as f64 - 2.0;
                code /= 5;
                v
            })
            .collect();
        for &lambda0 in &lambdas {
            let mut z0 = x0.clone();
            z0.push(lambda0);
            let (z, norm) = problem.newton(DVector::from_vec(z0), opts);
            if !(norm <= opts.residual) {
                continue;
            }
            let x: Vec<f64> = z.iter().take(d).copied().collect();
            let lambda = z[d];
            let duplicate = found.iter().any(|f| {
                let dx: f64 = f.x.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                dx + (f.lambda - lambda).abs() <= opts.merge
            });
            if duplicate {
                continue;
            }
            let xv = DVector::from_vec(x.clone());
            let residual = residual_with(l, &problem.curv, &xv, m, lambda).norm();
            let killing_norm = lie_derivative(l, &problem.curv, &xv).norm();
            found.push(QeSolution {
                x,
                lambda,
                residual,
                killing_norm,
                killing: killing_norm <= opts.killing,
            });
        }
    }
    found.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then_with(|| a.x.iter().zip(&b.x).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(found)
}

/// Runs the solver and re-verifies every solution: the residual of the
/// quasi-Einstein equation, and Killing X as constant scalar curvature forces.
pub fn homogeneous_report(l: &LieAlgebraModel, m: f64, opts: &SolveOptions) -> Result<IdentityReport, HomogeneousError> {
    let solutions = qe_solve(l, m, opts)?;
    verify_solutions(l, m, &solutions, opts)
}

/// Re-evaluates each solution from scratch and reports the residual and the
/// Killing defect.
pub fn verify_solutions(
    l: &LieAlgebraModel,
    m: f64,
    solutions: &[QeSolution],
    opts: &SolveOptions,
) -> Result<IdentityReport, HomogeneousError> {
    let curv = algebra_curvature(l);
    let mut report = IdentityReport::new();
    report.scalar("scalar_curvature", curv.scalar);
    report.scalar("jacobi_residual", l.jacobi_residual());
    report.scalar("solutions", solutions.len() as f64);
    if solutions.is_empty() {
        report.push(Entry::skipped("qe_solve", PaperTag::QeEquation, "no solutions found from the start grid"));
    }
    for (i, s) in solutions.iter().enumerate() {
        let x = DVector::from_vec(s.x.clone());
        let e = algebraic_qe_residual(l, &x, m, s.lambda)?;
        let coords: Vec<String> = s.x.iter().map(|v| format!("{v:.12}")).collect();
        let note = format!("X = ({}), λ = {:.12}", coords.join(", "), s.lambda);
        report.push(
            Entry::pointwise(&format!("qe_solution[{i}]"), PaperTag::QeEquation, e.amax(), e.norm(), opts.residual)
                .with_note(note),
        );
        let lie = lie_derivative(l, &curv, &x);
        report.push(Entry::pointwise(
            &format!("killing[{i}]"),
            PaperTag::ConstantCurvature,
            lie.amax(),
            lie.norm(),
            opts.killing,
        ));
    }
    Ok(report)
}
