//! Finite-volume discretization of the divergence-form mode equation
//!
//! ```text
//! -(w f')' + λ_k (w / r²) f = λ ρ w f
//! ```
//!
//! as a symmetric generalized eigenproblem `K f = λ M f`, plus the weak
//! Poisson problem `K u = M f` of the quasi-Laplacian.
//!
//! Flux weights live on faces, samples on cell centers. The face at the
//! origin carries `w(0) = 0`, so no pole condition is coded. The mass matrix
//! is diagonal, so `M^{-1/2} K M^{-1/2}` is again symmetric tridiagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{build_grid, weighted_inner_product, Weight, WeightedFunction};
use crate::modes::{BoundaryCondition, ModeProblem, OperatorKind};
use crate::tridiag::{ldl_solve, pencil_residual, SymTridiagonal, TridiagonalLu};

/// Residual bound an accepted eigenpair must meet.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Stiffness and mass of one mode problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub problem: ModeProblem,
    pub diag: Vec<f64>,
    /// `offdiag[i]` couples cells `i` and `i + 1`.
    pub offdiag: Vec<f64>,
    pub mass: Vec<f64>,
    pub bc_outer: BoundaryCondition,
}

impl DiscreteOperator {
    pub fn stiffness(&self) -> SymTridiagonal {
        SymTridiagonal::new(self.diag.clone(), self.offdiag.clone()).expect("assembled shape")
    }

    pub fn apply_stiffness(&self, x: &[f64]) -> Vec<f64> {
        self.stiffness().matvec(x)
    }

    /// `M^{-1/2} K M^{-1/2}`.
    pub fn scaled(&self) -> Result<SymTridiagonal> {
        if let Some(i) = self.mass.iter().position(|&m| !(m > 0.0)) {
            return Err(Error::NumericalFailure {
                index: i,
                detail: "mass entry underflowed; reduce r_max".into(),
            });
        }
        let s: Vec<f64> = self.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let diag = self.diag.iter().zip(&s).map(|(d, s)| d * s * s).collect();
        let off = self
            .offdiag
            .iter()
            .enumerate()
            .map(|(i, e)| e * s[i] * s[i + 1])
            .collect();
        SymTridiagonal::new(diag, off)
    }
}

pub fn assemble(problem: &ModeProblem) -> DiscreteOperator {
    let grid = &problem.grid;
    let ws = &problem.weights;
    let n = grid.n_cells();
    let dr = grid.dr();
    let angular = ws.angular_factor(problem.k);
    let flux: Vec<f64> = grid.faces().iter().map(|&r| ws.sl_weight(r) / dr * angular).collect();
    let lambda_k = problem.lambda_k as f64;

    let mut diag = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    for (i, &r) in grid.centers().iter().enumerate() {
        let log_w = ws.log_sl_weight(r);
        let outer = if i + 1 < n {
            flux[i + 1]
        } else {
            match problem.bc_outer {
                // ghost value -f mirrored across the face
                BoundaryCondition::Dirichlet => 2.0 * flux[n],
                BoundaryCondition::Natural => 0.0,
            }
        };
        let potential = if problem.lambda_k == 0 {
            0.0
        } else {
            lambda_k * (log_w - 2.0 * r.ln()).exp() * dr * angular
        };
        diag.push(flux[i] + outer + potential);
        mass.push((log_w + problem.log_density(r)).exp() * dr * angular);
    }
    let offdiag = (0..n - 1).map(|i| -flux[i + 1]).collect();
    DiscreteOperator {
        problem: problem.clone(),
        diag,
        offdiag,
        mass,
        bc_outer: problem.bc_outer,
    }
}

/// Eigenpairs of one mode problem.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub problem: ModeProblem,
    pub eigenvalues: Vec<f64>,
    /// Mass-orthonormal, sign fixed so the first cell is non-negative.
    pub eigenfunctions: Vec<WeightedFunction>,
    /// `‖K f - λ M f‖ / ‖M f‖` per pair.
    pub residuals: Vec<f64>,
}

/// The `count` lowest eigenpairs of `K f = λ M f`.
pub fn solve_eigen(op: &DiscreteOperator, count: usize) -> Result<SpectralResult> {
    let n = op.diag.len();
    if count > n {
        return Err(Error::InvalidArgument(format!(
            "requested {count} pairs from {n} cells"
        )));
    }
    let scaled = op.scaled()?;
    let eigenvalues = scaled.smallest_eigenvalues(count);
    let stiffness = op.stiffness();

    let mut eigenfunctions: Vec<WeightedFunction> = Vec::with_capacity(count);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let mut f = stiffness.pencil_eigenvector(&op.mass, j, lambda, &basis, 1e-13)?;
        let sign = f.iter().find(|v| **v != 0.0).map_or(1.0, |v| v.signum());
        f.iter_mut().for_each(|v| *v *= sign);
        let residual = pencil_residual(&stiffness, &op.mass, lambda, &f);
        if !(residual <= RESIDUAL_TOL) {
            return Err(Error::NumericalFailure {
                index: j,
                detail: format!("eigenpair residual {residual:e} exceeds {RESIDUAL_TOL:e}"),
            });
        }
        residuals.push(residual);
        basis.push(f.clone());
        eigenfunctions.push(WeightedFunction::new(op.problem.grid.clone(), f, op.problem.k)?);
    }
    Ok(SpectralResult {
        problem: op.problem.clone(),
        eigenvalues,
        eigenfunctions,
        residuals,
    })
}

/// Number of eigenvalues strictly below `threshold`.
pub fn count_below(op: &DiscreteOperator, threshold: f64) -> Result<usize> {
    Ok(op.scaled()?.sturm_count(threshold))
}

/// Assembles and solves every mode `k` in `ks` on the same grid.
pub fn solve_modes(
    operator: OperatorKind,
    m: u32,
    ks: impl IntoIterator<Item = u32>,
    grid: &crate::measure::RadialGrid,
    bc_outer: Option<BoundaryCondition>,
    count: usize,
) -> Result<Vec<SpectralResult>> {
    ks.into_iter()
        .map(|k| {
            let p = crate::modes::build_mode_problem(operator, m, k, grid.clone(), bc_outer)?;
            solve_eigen(&assemble(&p), count)
        })
        .collect()
}

fn check_poisson(problem: &ModeProblem, f: &WeightedFunction) -> Result<()> {
    if problem.operator != OperatorKind::Quasi {
        return Err(Error::InvalidArgument(
            "the weak Poisson problem is posed for the quasi operator".into(),
        ));
    }
    if problem.bc_outer == BoundaryCondition::Natural && problem.lambda_k == 0 {
        return Err(Error::IllPosed(
            "natural boundary with k = 0 leaves constants in the kernel".into(),
        ));
    }
    if !f.grid().same_as(&problem.grid) || f.mode_k() != problem.k {
        return Err(Error::IncompatibleOperands(
            "right-hand side does not match the problem grid/mode".into(),
        ));
    }
    Ok(())
}

/// Solves `-Δ_g u = f` in weak form, `K u = M f`.
///
/// For `k = 0` under a Dirichlet condition the stiffness matrix is nearly
/// singular: constants cost only the boundary flux `w(r_max)`, so its lowest
/// eigenvalue is of order `e^{-r_max²/4}`. A general factorization then
/// amplifies rounding in the bulk by that factor. The radial equation is
/// instead integrated as a conservation law: the face fluxes are compensated
/// partial sums of `M f`, and `u` follows by one backward sweep from the
/// boundary. For `k >= 1` the potential keeps `K` well conditioned and a
/// pivoted tridiagonal factorization is used.
pub fn solve_poisson(problem: &ModeProblem, f: &WeightedFunction) -> Result<WeightedFunction> {
    check_poisson(problem, f)?;
    let op = assemble(problem);
    let rhs: Vec<f64> = op.mass.iter().zip(f.values()).map(|(m, f)| m * f).collect();
    let u = if problem.lambda_k == 0 {
        flux_sweep(&op, &rhs, None)
    } else {
        let mut u = rhs;
        TridiagonalLu::new(op.offdiag.clone(), op.diag.clone(), op.offdiag.clone()).solve(&mut u);
        u
    };
    f.with_values(u)
}

/// Independent route to the same solution: residual correction started from
/// an arbitrary initial iterate.
///
/// For `k = 0` the residual is formed face by face in flux space and
/// corrected by the flux sweep; otherwise it is the ordinary residual
/// corrected through an `LDLᵀ` factorization.
pub fn solve_poisson_from(problem: &ModeProblem, f: &WeightedFunction, initial: &[f64]) -> Result<WeightedFunction> {
    check_poisson(problem, f)?;
    if initial.len() != problem.grid.n_cells() {
        return Err(Error::IncompatibleOperands(
            "initial iterate has the wrong length".into(),
        ));
    }
    let op = assemble(problem);
    let rhs: Vec<f64> = op.mass.iter().zip(f.values()).map(|(m, f)| m * f).collect();
    let mut u = initial.to_vec();
    if problem.lambda_k == 0 {
        for _ in 0..3 {
            u = flux_sweep(&op, &rhs, Some(&u));
        }
        return f.with_values(u);
    }
    let k = op.stiffness();
    for _ in 0..20 {
        let ku = k.matvec(&u);
        let r: Vec<f64> = rhs.iter().zip(&ku).map(|(b, a)| b - a).collect();
        let du = ldl_solve(&k, &r)?;
        let step = du.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        u.iter_mut().zip(&du).for_each(|(u, d)| *u += d);
        let size = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if step <= 1e-15 * size.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    f.with_values(u)
}

/// Solves the `k = 0` Dirichlet system `K u = b` as a discrete conservation
/// law. Row `i` reads `D_i - D_{i+1} = b_i` with face fluxes
/// `D_i = c_i (u_i - u_{i-1})`, `D_0 = 0` and `D_n = -2 c_n u_{n-1}`, so
/// `D_{i+1} = -Σ_{j<=i} b_j`.
///
/// With `base`, the face fluxes of `base` are subtracted first and the sweep
/// returns `base` plus the correction.
fn flux_sweep(op: &DiscreteOperator, b: &[f64], base: Option<&[f64]>) -> Vec<f64> {
    let n = b.len();
    // c_{i+1} = -offdiag[i]; the boundary coefficient is what the last row
    // adds beyond the interior face.
    let boundary = op.diag[n - 1] + if n > 1 { op.offdiag[n - 2] } else { 0.0 };
    let mut partial = Vec::with_capacity(n);
    let mut acc = NeumaierSum::default();
    for &bj in b {
        acc.add(bj);
        partial.push(acc.value());
    }
    // residual flux at face i + 1: target minus what `base` already carries
    let face_residual = |i: usize| -> f64 {
        let target = -partial[i];
        match base {
            None => target,
            Some(u) if i + 1 < n => target + op.offdiag[i] * (u[i + 1] - u[i]),
            Some(u) => target + boundary * u[n - 1],
        }
    };
    let mut du = vec![0.0; n];
    du[n - 1] = -face_residual(n - 1) / boundary;
    for i in (0..n - 1).rev() {
        du[i] = du[i + 1] + face_residual(i) / op.offdiag[i];
    }
    match base {
        None => du,
        Some(u) => u.iter().zip(&du).map(|(a, b)| a + b).collect(),
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `u*(r) = e^{-r²}` and `f = -Δ_g u* = -(5r² - 2m) e^{-r²} e^{r²/(2(m-2))}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub m: u32,
}

impl ManufacturedSolution {
    pub fn exact(&self, r: f64) -> f64 {
        (-r * r).exp()
    }

    pub fn rhs(&self, r: f64) -> f64 {
        let m = f64::from(self.m);
        -(5.0 * r * r - 2.0 * m) * (-r * r + r * r / (2.0 * (m - 2.0))).exp()
    }

    /// Relative `L²(dV_g)` distance between `u` and `u*`.
    pub fn relative_error(&self, problem: &ModeProblem, u: &WeightedFunction) -> Result<f64> {
        let exact = WeightedFunction::from_fn(u.grid(), u.mode_k(), |r| self.exact(r))?;
        let diff = u.with_values(u.values().iter().zip(exact.values()).map(|(a, b)| a - b).collect())?;
        let num = weighted_inner_product(&diff, &diff, Weight::DVg, &problem.weights)?;
        let den = weighted_inner_product(&exact, &exact, Weight::DVg, &problem.weights)?;
        Ok((num / den).sqrt())
    }
}

/// Quantity tracked along a refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceQuantity {
    /// The `j`-th eigenvalue (0-based) of the mode problem.
    Eigenvalue(usize),
    /// Relative `L²(dV_g)` error of the manufactured Poisson solve.
    PoissonError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub n_cells: usize,
    pub dr: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub quantity: ConvergenceQuantity,
    pub levels: Vec<ConvergenceLevel>,
    /// Observed order from the finest three levels (eigenvalue) or the
    /// finest two (error).
    pub order: Option<f64>,
    /// Richardson-extrapolated limit (0 for an error quantity).
    pub limit: Option<f64>,
    pub order_undefined: bool,
}

/// Re-solves `problem` on each resolution of `ladder` and estimates the
/// observed order of accuracy.
pub fn refine_and_estimate_order(
    problem: &ModeProblem,
    quantity: ConvergenceQuantity,
    ladder: &[usize],
) -> Result<ConvergenceReport> {
    if ladder.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "refinement ladder needs at least 3 levels, got {}",
            ladder.len()
        )));
    }
    let ratio = ladder[1] as f64 / ladder[0] as f64;
    let geometric = ladder
        .windows(2)
        .all(|w| w[1] > w[0] && ((w[1] as f64 / w[0] as f64) - ratio).abs() <= 1e-9 * ratio);
    if !geometric || ratio <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "ladder must increase geometrically, got {ladder:?}"
        )));
    }

    let mut levels = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let grid = build_grid(problem.grid.r_max(), n)?;
        let p = problem.regridded(grid);
        let value = match quantity {
            ConvergenceQuantity::Eigenvalue(j) => {
                let op = assemble(&p);
                *solve_eigen(&op, j + 1)?.eigenvalues.last().expect("j + 1 pairs")
            }
            ConvergenceQuantity::PoissonError => {
                let ms = ManufacturedSolution { m: p.m() };
                let f = WeightedFunction::from_fn(&p.grid, p.k, |r| ms.rhs(r))?;
                let u = solve_poisson(&p, &f)?;
                ms.relative_error(&p, &u)?
            }
        };
        levels.push(ConvergenceLevel {
            n_cells: n,
            dr: p.grid.dr(),
            value,
        });
    }

    let v: Vec<f64> = levels.iter().map(|l| l.value).collect();
    let (order, limit) = match quantity {
        ConvergenceQuantity::Eigenvalue(_) => richardson(&v, ratio),
        ConvergenceQuantity::PoissonError => error_order(&v, ratio),
    };
    Ok(ConvergenceReport {
        quantity,
        levels,
        order_undefined: order.is_none(),
        order,
        limit,
    })
}

fn richardson(v: &[f64], ratio: f64) -> (Option<f64>, Option<f64>) {
    let diffs: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let rounding = |i: usize| 1e-12 * (1.0 + v[i].abs());
    if diffs.iter().enumerate().any(|(i, d)| d.abs() <= rounding(i + 1)) {
        return (None, None);
    }
    if diffs
        .windows(2)
        .any(|w| w[0].signum() != w[1].signum() || w[1].abs() >= w[0].abs())
    {
        return (None, None);
    }
    let d1 = diffs[diffs.len() - 2];
    let d2 = diffs[diffs.len() - 1];
    let p = (d1 / d2).abs().ln() / ratio.ln();
    let limit = v[v.len() - 1] + d2 / (ratio.powf(p) - 1.0);
    (Some(p), Some(limit))
}

fn error_order(e: &[f64], ratio: f64) -> (Option<f64>, Option<f64>) {
    if e.windows(2).any(|w| !(w[1] < w[0]) || w[1] <= 1e-14) {
        return (None, None);
    }
    let p = (e[e.len() - 2] / e[e.len() - 1]).ln() / ratio.ln();
    (Some(p), Some(0.0))
}

/// Lowest eigenvalues at several truncation radii with the spacing of
/// `problem.grid` held fixed.
pub fn r_max_sensitivity(problem: &ModeProblem, radii: &[f64], count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let dr = problem.grid.dr();
    radii
        .iter()
        .map(|&r_max| {
            let n = (r_max / dr).round() as usize;
            let p = problem.regridded(build_grid(r_max, n)?);
            Ok((r_max, solve_eigen(&assemble(&p), count)?.eigenvalues))
        })
        .collect()
}
