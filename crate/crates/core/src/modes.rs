//! Spherical-harmonic separation of variables.
//!
//! Expanding `u(r, θ) = Σ_k f_k(r) φ_k(θ)` over an orthonormal basis of
//! harmonics on `S^{m-1}` turns both weighted Laplacians into one radial
//! Sturm–Liouville problem per angular degree `k`:
//!
//! ```text
//! -(w f')' + λ_k (w / r²) f = λ ρ w f,     w(r) = r^{m-1} e^{-r²/4}
//! ```
//!
//! with `ρ = e^{-r²/(2(m-2))}` for the quasi-Laplacian and `ρ = 1` for the
//! drifted Laplacian. `λ_k = k(k+m-2)` is the (non-negative) eigenvalue of
//! `-Δ_θ` on degree-`k` harmonics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{RadialGrid, WeightSystem};

/// Default relative merge tolerance for coincident eigenvalues. It must
/// exceed the discretization error of degenerate levels (below 1e-4 at
/// `Δr = 0.005`) and stay well below the level spacing.
pub const DEFAULT_MERGE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `Δ_g = e^{|x|²/(2(m-2))} Δ_h`, Laplace–Beltrami of the conformal metric.
    Quasi,
    /// `Δ_h = Δ - ∇h·∇` with `h = |x|²/4`.
    Drifted,
}

impl OperatorKind {
    pub fn default_bc(self) -> BoundaryCondition {
        match self {
            OperatorKind::Quasi => BoundaryCondition::Dirichlet,
            OperatorKind::Drifted => BoundaryCondition::Natural,
        }
    }
}

/// Condition imposed at the truncation radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    /// Zero weighted flux `w f' = 0`.
    Natural,
}

/// One radial eigenproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProblem {
    pub operator: OperatorKind,
    pub weights: WeightSystem,
    pub k: u32,
    pub lambda_k: u64,
    pub bc_outer: BoundaryCondition,
    pub grid: RadialGrid,
}

impl ModeProblem {
    pub fn m(&self) -> u32 {
        self.weights.m()
    }

    /// `ln ρ(r)`: `-r²/(2(m-2))` for the quasi operator, 0 for the drifted one.
    pub fn log_density(&self, r: f64) -> f64 {
        match self.operator {
            OperatorKind::Quasi => self.weights.log_rho_g(r),
            OperatorKind::Drifted => 0.0,
        }
    }

    pub fn density(&self, r: f64) -> f64 {
        self.log_density(r).exp()
    }

    /// `-λ ρ(r) + λ_k / r²`, the coefficient of `f` in the mode ODE at
    /// spectral parameter `lambda`.
    pub fn potential(&self, lambda: f64, r: f64) -> f64 {
        -lambda * self.density(r) + self.lambda_k as f64 / (r * r)
    }

    /// Same problem on another grid.
    pub fn regridded(&self, grid: RadialGrid) -> Self {
        Self { grid, ..self.clone() }
    }
}

/// Eigenvalue `k(k+m-2)` of `-Δ_θ` on degree-`k` harmonics of `S^{m-1}`.
pub fn sphere_eigenvalue(m: u32, k: u32) -> Result<u64> {
    if m < 3 {
        return Err(Error::UnsupportedDimension(m));
    }
    Ok(u64::from(k) * (u64::from(k) + u64::from(m) - 2))
}

/// Dimension of the space of degree-`k` spherical harmonics on `S^{m-1}`:
/// `C(k+m-1, k) - C(k+m-3, k-2)`.
pub fn sphere_multiplicity(m: u32, k: u32) -> u64 {
    let m = u64::from(m);
    let k = u64::from(k);
    let lower = if k >= 2 { binomial(k + m - 3, k - 2) } else { 0 };
    binomial(k + m - 1, k) - lower
}

pub(crate) fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn build_mode_problem(
    operator: OperatorKind,
    m: u32,
    k: u32,
    grid: RadialGrid,
    bc_outer: Option<BoundaryCondition>,
) -> Result<ModeProblem> {
    let weights = WeightSystem::new(m)?;
    let lambda_k = sphere_eigenvalue(m, k)?;
    Ok(ModeProblem {
        operator,
        weights,
        k,
        lambda_k,
        bc_outer: bc_outer.unwrap_or_else(|| operator.default_bc()),
        grid,
    })
}

/// Label of one radial eigenvalue: angular degree `k`, radial index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeLabel {
    pub k: u32,
    pub n: u32,
}

/// One level of the merged spectrum of the full operator on ℝ^m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLevel {
    pub eigenvalue: f64,
    pub multiplicity: u64,
    pub labels: Vec<ModeLabel>,
}

/// Merges per-mode radial spectra into the spectrum of the operator on ℝ^m.
///
/// Each radial eigenvalue of mode `k` carries `sphere_multiplicity(m, k)`
/// copies. Values within `merge_tol · (1 + |λ|)` of the first value of a
/// level join that level; the level reports the multiplicity-weighted mean.
/// The output does not depend on the order of `per_mode`.
pub fn assemble_full_spectrum(m: u32, per_mode: &[(u32, Vec<f64>)], merge_tol: f64) -> Result<Vec<SpectrumLevel>> {
    if m < 3 {
        return Err(Error::UnsupportedDimension(m));
    }
    if !(merge_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "merge tolerance must be >= 0, got {merge_tol}"
        )));
    }
    let mut all = Vec::new();
    for (k, values) in per_mode {
        if values.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalues of mode k = {k} are not sorted"
            )));
        }
        for (n, &lambda) in values.iter().enumerate() {
            all.push((lambda, ModeLabel { k: *k, n: n as u32 }));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut levels: Vec<SpectrumLevel> = Vec::new();
    let mut anchor = f64::NAN;
    let mut weighted_sum = 0.0;
    for (lambda, label) in all {
        let mult = sphere_multiplicity(m, label.k);
        let joins = levels
            .last()
            .is_some_and(|_| (lambda - anchor).abs() <= merge_tol * (1.0 + anchor.abs()));
        if joins {
            let level = levels.last_mut().expect("checked");
            level.multiplicity += mult;
            level.labels.push(label);
            weighted_sum += lambda * mult as f64;
            level.eigenvalue = weighted_sum / level.multiplicity as f64;
        } else {
            anchor = lambda;
            weighted_sum = lambda * mult as f64;
            levels.push(SpectrumLevel {
                eigenvalue: lambda,
                multiplicity: mult,
                labels: vec![label],
            });
        }
    }
    Ok(levels)
}
