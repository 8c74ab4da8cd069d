//! Radial grids, the weights of the conformal metric, and the quadratures
//! built on them.
//!
//! Everything here works with radial profiles `f(r)` of functions on ℝ^m.
//! Three scalar weights appear throughout:
//!
//! * `w(r) = r^{m-1} e^{-r²/4}`, the Sturm–Liouville flux weight,
//! * `ρ_g(r) = e^{-r²/(2(m-2))}`, the spectral density of the quasi-Laplacian,
//! * `e^{-m r²/(4(m-2))}`, the density of `dV_g` against Lebesgue measure.
//!
//! The exponent identity `1/4 + 1/(2(m-2)) = m/(4(m-2))` ties them together:
//! `e^{-r²/4} ρ_g(r)` is the volume density. All weights are evaluated as
//! logarithms and exponentiated last.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 8;

/// Default truncation radius of the half line.
pub const DEFAULT_R_MAX: f64 = 12.0;

/// Cell-centered radial mesh on `[0, r_max]`.
///
/// `r = 0` is a face, never a node, so the `(m-1)/r` coefficient is never
/// evaluated at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    n_cells: usize,
    dr: f64,
    centers: Vec<f64>,
    faces: Vec<f64>,
}

impl RadialGrid {
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// `n_cells + 1` faces; `faces[0] == 0` and `faces[n_cells] == r_max`.
    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    /// True when both grids discretize the same interval at the same spacing.
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.n_cells == other.n_cells && self.r_max == other.r_max
    }
}

pub fn build_grid(r_max: f64, n_cells: usize) -> Result<RadialGrid> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "r_max must be positive and finite, got {r_max}"
        )));
    }
    if n_cells < MIN_CELLS {
        return Err(Error::InvalidArgument(format!(
            "n_cells must be at least {MIN_CELLS}, got {n_cells}"
        )));
    }
    let dr = r_max / n_cells as f64;
    let centers = (0..n_cells).map(|i| (i as f64 + 0.5) * dr).collect();
    let mut faces: Vec<f64> = (0..=n_cells).map(|i| i as f64 * dr).collect();
    faces[n_cells] = r_max;
    Ok(RadialGrid {
        r_max,
        n_cells,
        dr,
        centers,
        faces,
    })
}

/// The weights of the conformal metric `g = e^{-|x|²/(2(m-2))} g₀` on ℝ^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSystem {
    m: u32,
}

impl WeightSystem {
    pub fn new(m: u32) -> Result<Self> {
        if m < 3 {
            return Err(Error::UnsupportedDimension(m));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    fn mf(&self) -> f64 {
        f64::from(self.m)
    }

    pub fn log_sl_weight(&self, r: f64) -> f64 {
        (self.mf() - 1.0) * r.ln() - 0.25 * r * r
    }

    /// `w(r) = r^{m-1} e^{-r²/4}`; exactly zero at the origin.
    pub fn sl_weight(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.log_sl_weight(r).exp()
    }

    pub fn log_rho_g(&self, r: f64) -> f64 {
        -r * r / (2.0 * (self.mf() - 2.0))
    }

    /// Spectral density `ρ_g(r) = e^{-r²/(2(m-2))}` of the quasi-Laplacian.
    pub fn rho_g(&self, r: f64) -> f64 {
        self.log_rho_g(r).exp()
    }

    pub fn log_vol_density(&self, r: f64) -> f64 {
        -self.mf() * r * r / (4.0 * (self.mf() - 2.0))
    }

    /// Density of `dV_g` relative to `dV_{g₀}`.
    pub fn vol_density(&self, r: f64) -> f64 {
        self.log_vol_density(r).exp()
    }

    /// `e^{-r²/4}`, the drift weight of `h = |x|²/4`.
    pub fn gauss_quarter(&self, r: f64) -> f64 {
        (-0.25 * r * r).exp()
    }

    /// Surface area of the unit sphere `S^{m-1}`.
    pub fn omega(&self) -> f64 {
        sphere_area(self.m)
    }

    /// Angular normalization of a product of two mode-`k` functions: the full
    /// sphere area for radial functions, 1 for orthonormal harmonics.
    pub fn angular_factor(&self, k: u32) -> f64 {
        if k == 0 {
            self.omega()
        } else {
            1.0
        }
    }
}

/// `2 π^{m/2} / Γ(m/2)` for integer `m ≥ 1`.
fn sphere_area(m: u32) -> f64 {
    use std::f64::consts::PI;
    // Γ(m/2) for integer and half-integer arguments.
    let gamma_half = |n: u32| -> f64 {
        if n.is_multiple_of(2) {
            (1..n / 2).map(f64::from).product()
        } else {
            let mut g = PI.sqrt();
            let mut x = 0.5;
            while x < f64::from(n) / 2.0 - 0.25 {
                g *= x;
                x += 1.0;
            }
            g
        }
    };
    2.0 * PI.powf(f64::from(m) / 2.0) / gamma_half(m)
}

/// Radial profile sampled at cell centers, tagged with its angular mode.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFunction {
    grid: RadialGrid,
    values: Vec<f64>,
    mode_k: u32,
}

impl WeightedFunction {
    pub fn new(grid: RadialGrid, values: Vec<f64>, mode_k: u32) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.n_cells(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample at cell {i}")));
        }
        Ok(Self { grid, values, mode_k })
    }

    pub fn from_fn(grid: &RadialGrid, mode_k: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.centers().iter().map(|&r| f(r)).collect();
        Self::new(grid.clone(), values, mode_k)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode_k(&self) -> u32 {
        self.mode_k
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same grid and mode, new samples.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.mode_k)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    fn check_compatible(&self, other: &WeightedFunction) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::IncompatibleOperands("functions live on different grids".into()));
        }
        if self.mode_k != other.mode_k {
            return Err(Error::IncompatibleOperands(format!(
                "mode mismatch: k = {} vs k = {}",
                self.mode_k, other.mode_k
            )));
        }
        Ok(())
    }
}

/// Radial density used by [`weighted_inner_product`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// `dV_g`: density `e^{-m r²/(4(m-2))}`.
    DVg,
    /// `e^{-r²/4} dx`, the energy measure.
    GaussQuarter,
}

impl Weight {
    fn log_density(self, ws: &WeightSystem, r: f64) -> f64 {
        match self {
            Weight::DVg => ws.log_vol_density(r),
            Weight::GaussQuarter => -0.25 * r * r,
        }
    }
}

/// Midpoint-rule `∫ f g · density · r^{m-1} dr`, times the angular factor.
pub fn weighted_inner_product(
    f: &WeightedFunction,
    g: &WeightedFunction,
    weight: Weight,
    ws: &WeightSystem,
) -> Result<f64> {
    f.check_compatible(g)?;
    let m1 = f64::from(ws.m()) - 1.0;
    let dr = f.grid.dr();
    let sum: f64 = f
        .grid
        .centers()
        .iter()
        .zip(f.values.iter().zip(&g.values))
        .map(|(&r, (&a, &b))| a * b * (weight.log_density(ws, r) + m1 * r.ln()).exp())
        .sum();
    Ok(sum * dr * ws.angular_factor(f.mode_k))
}

/// Mode-`k` Dirichlet energy `∫ (f'² + λ_k f²/r²) e^{-r²/4} r^{m-1} dr`,
/// times the angular factor.
///
/// Derivatives are one-sided cell differences evaluated at interior faces,
/// the same stencil the eigenproblem assembly uses, so for any grid function
/// this equals `fᵀ K f` of the natural-boundary stiffness matrix.
pub fn weighted_energy(f: &WeightedFunction, ws: &WeightSystem) -> f64 {
    let grid = &f.grid;
    let dr = grid.dr();
    let v = &f.values;
    let faces = grid.faces();
    let mut gradient = 0.0;
    for i in 0..v.len() - 1 {
        let d = (v[i + 1] - v[i]) / dr;
        gradient += ws.sl_weight(faces[i + 1]) * d * d;
    }
    gradient *= dr;
    let lambda_k = angular_eigenvalue(ws.m(), f.mode_k);
    let potential = if lambda_k == 0 {
        0.0
    } else {
        let lk = lambda_k as f64;
        grid.centers()
            .iter()
            .zip(v)
            .map(|(&r, &x)| lk * ws.sl_weight(r) / (r * r) * x * x)
            .sum::<f64>()
            * dr
    };
    (gradient + potential) * ws.angular_factor(f.mode_k)
}

// Local copy of k(k+m-2) so this module stays at the bottom of the stack.
fn angular_eigenvalue(m: u32, k: u32) -> u64 {
    u64::from(k) * (u64::from(k) + u64::from(m) - 2)
}

/// Scale of the measure discarded by truncating at `r_max`: `e^{-r_max²/4}`.
pub fn truncation_bound(r_max: f64) -> f64 {
    (-0.25 * r_max * r_max).exp()
}

const TAIL_REL_TOL: f64 = 1e-13;

/// `J(r) = ∫_0^∞ (1 + t/r)^{m-3} e^{-(2rt + t²)/4} dt`, the tail integral with
/// the factor `r^{m-3} e^{-r²/4}` removed so that nothing overflows.
fn scaled_tail(r: f64, m: u32) -> f64 {
    let a = f64::from(m) - 3.0;
    let integrand = |t: f64| ((a * (t / r).ln_1p()) - 0.25 * t * (2.0 * r + t)).exp();
    // e^{-rt/2} decays on a scale 2/r for large r, e^{-t²/4} on a scale 2 otherwise.
    let scale = (2.0 / r).min(2.0) * 4.0;
    quadrature::integrate_to_infinity(integrand, 0.0, scale, TAIL_REL_TOL)
}

/// `I(r) = ∫_r^∞ s^{m-3} e^{-s²/4} ds`.
pub fn tail_integral(r: f64, m: u32) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("tail integral needs r > 0, got {r}")));
    }
    if m < 3 {
        return Err(Error::UnsupportedDimension(m));
    }
    let log_prefactor = (f64::from(m) - 3.0) * r.ln() - 0.25 * r * r;
    Ok(log_prefactor.exp() * scaled_tail(r, m))
}

/// `R(r) = I(r) / (r^{m-1} e^{-r²/4})`; `r³ R(r) → 2` as `r → ∞`.
///
/// Computed as `J(r) / r²` so the exponentials cancel analytically and large
/// `r` never overflows.
pub fn tail_ratio(r: f64, m: u32) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("tail ratio needs r >= 1, got {r}")));
    }
    if m < 3 {
        return Err(Error::UnsupportedDimension(m));
    }
    Ok(scaled_tail(r, m) / (r * r))
}
