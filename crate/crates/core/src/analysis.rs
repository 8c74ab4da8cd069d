//! Numerical checks of the functional inequalities and of the behaviour of
//! radial traces near the truncation radius.
//!
//! All integrals are midpoint sums on the cell-centered grid; derivatives are
//! cell differences at interior faces, matching the solver's stencil.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{self, weighted_energy, RadialGrid, Weight, WeightSystem, WeightedFunction};
use crate::quadrature;

/// Relative slack below which a negative margin still counts as passing.
pub const MARGIN_TOL: f64 = 1e-12;

/// Boundary value allowed for the literal Poincaré check, relative to `‖u‖∞`.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Outcome of one inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub constant_used: f64,
    pub test_function: String,
    /// Normalization applied to the test function before evaluation.
    pub normalization: String,
    pub passed: bool,
}

impl InequalityReport {
    fn new(name: &str, lhs: f64, rhs: f64, constant_used: f64, normalization: &str) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            constant_used,
            test_function: String::new(),
            normalization: normalization.to_string(),
            passed: margin >= -MARGIN_TOL * (1.0 + rhs.abs()),
        }
    }

    pub fn with_test_function(mut self, description: impl Into<String>) -> Self {
        self.test_function = description.into();
        self
    }
}

/// Per-cell measure `e^{-m r²/(4(m-2))} r^{m-1} ω Δr` of `dV_g` on the grid.
fn cell_measure(grid: &RadialGrid, ws: &WeightSystem) -> Vec<f64> {
    let m1 = f64::from(ws.m()) - 1.0;
    let scale = ws.omega() * grid.dr();
    grid.centers()
        .iter()
        .map(|&r| (ws.log_vol_density(r) + m1 * r.ln()).exp() * scale)
        .collect()
}

/// `∫ u'² dμ` with the `dV_g` density, from face differences.
fn gradient_energy_vol(u: &[f64], grid: &RadialGrid, ws: &WeightSystem) -> f64 {
    let m1 = f64::from(ws.m()) - 1.0;
    let dr = grid.dr();
    let faces = grid.faces();
    let sum: f64 = u
        .windows(2)
        .zip(&faces[1..])
        .map(|(w, &r)| {
            let d = (w[1] - w[0]) / dr;
            d * d * (ws.log_vol_density(r) + m1 * r.ln()).exp()
        })
        .sum();
    sum * dr * ws.omega()
}

fn require_radial(u: &WeightedFunction) -> Result<()> {
    if u.mode_k() != 0 {
        return Err(Error::InvalidArgument(format!(
            "radial test function expected, got mode k = {}",
            u.mode_k()
        )));
    }
    Ok(())
}

fn entropy_density(t: f64) -> f64 {
    if t > 0.0 {
        t * t.ln()
    } else {
        0.0
    }
}

/// Log-Sobolev inequality `∫ u² log u² dμ <= (4(m-2)/m) ∫ u'² dμ` for a
/// radial `u`, with `dμ = e^{-m r²/(4(m-2))} r^{m-1} ω dr`.
///
/// `u` is rescaled so that `∫ u² dμ = μ(M̄)`, where `μ(M̄)` is the measure of
/// the truncated domain under the same quadrature; constants then give
/// `0 <= 0`.
pub fn check_log_sobolev(u: &WeightedFunction, m: u32) -> Result<InequalityReport> {
    require_radial(u)?;
    let ws = WeightSystem::new(m)?;
    let mu = cell_measure(u.grid(), &ws);
    let total: f64 = mu.iter().sum();
    let mass: f64 = u.values().iter().zip(&mu).map(|(x, d)| x * x * d).sum();
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument("test function vanishes identically".into()));
    }
    let scale = (total / mass).sqrt();
    let v: Vec<f64> = u.values().iter().map(|x| x * scale).collect();
    let lhs: f64 = v.iter().zip(&mu).map(|(x, d)| entropy_density(x * x) * d).sum();
    let constant = 4.0 * (f64::from(m) - 2.0) / f64::from(m);
    let rhs = constant * gradient_energy_vol(&v, u.grid(), &ws);
    Ok(InequalityReport::new(
        "log_sobolev",
        lhs,
        rhs,
        constant,
        "∫u² dμ = μ(M̄)",
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoincareVariant {
    /// `∫ u² dV_g <= (2(m-2)/m) ∫ |∇u|²_g dV_g` for `u` vanishing at `r_max`.
    Literal,
    /// Same with `u` replaced by `u - ū`, `ū` the `dV_g`-mean.
    MeanCentered,
}

/// Value at the outer face from the quadratic through the last three cells.
fn boundary_value(u: &[f64]) -> f64 {
    let n = u.len();
    (15.0 * u[n - 1] - 10.0 * u[n - 2] + 3.0 * u[n - 3]) / 8.0
}

/// Poincaré inequality with constant `2(m-2)/m`.
///
/// The right-hand side is `(2(m-2)/m)` times [`weighted_energy`]. The literal
/// variant requires `|u(r_max)| <= 1e-8 ‖u‖∞`, judged from the quadratic
/// extrapolation of the last three cells to the outer face.
pub fn check_poincare(u: &WeightedFunction, m: u32, variant: PoincareVariant) -> Result<InequalityReport> {
    require_radial(u)?;
    let ws = WeightSystem::new(m)?;
    let mu = cell_measure(u.grid(), &ws);
    let sup = u.sup_norm();
    let values: Vec<f64> = match variant {
        PoincareVariant::Literal => {
            let edge = boundary_value(u.values());
            if edge.abs() > BOUNDARY_TOL * sup {
                return Err(Error::PreconditionViolation(format!(
                    "literal Poincaré check needs u(r_max) = 0; extrapolated value {edge:e} exceeds {BOUNDARY_TOL:e}·‖u‖∞"
                )));
            }
            u.values().to_vec()
        }
        PoincareVariant::MeanCentered => {
            let total: f64 = mu.iter().sum();
            let mean = u.values().iter().zip(&mu).map(|(x, d)| x * d).sum::<f64>() / total;
            u.values().iter().map(|x| x - mean).collect()
        }
    };
    let lhs: f64 = values.iter().zip(&mu).map(|(x, d)| x * x * d).sum();
    let constant = 2.0 * (f64::from(m) - 2.0) / f64::from(m);
    // the gradient is unchanged by centering
    let rhs = constant * weighted_energy(u, &ws);
    let (name, normalization) = match variant {
        PoincareVariant::Literal => ("poincare_literal", "none; u(r_max) = 0 required"),
        PoincareVariant::MeanCentered => ("poincare_mean_centered", "dV_g-mean subtracted"),
    };
    Ok(InequalityReport::new(name, lhs, rhs, constant, normalization))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailLevel {
    pub delta: f64,
    /// Smallest face radius with `μ({r > radius}) <= delta`.
    pub radius: f64,
    /// Measure actually beyond `radius`.
    pub tail_measure: f64,
    /// `max` over the family of `∫_{r > radius} u² dμ`.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformIntegrabilityReport {
    pub family_size: usize,
    /// `sup` over the family of `∫ Q(u²) dμ` with `Q(t) = t log t`.
    pub sup_entropy: f64,
    /// `sup` over the family of `‖u‖∞²`.
    pub sup_square: f64,
    /// Levels in the order the thresholds were given.
    pub levels: Vec<TailLevel>,
    /// `epsilon` never increases as `delta` decreases.
    pub epsilon_monotone: bool,
}

/// Tail smallness of a family of radial functions under `dV_g`.
pub fn check_uniform_integrability(
    family: &[WeightedFunction],
    m: u32,
    thresholds: &[f64],
) -> Result<UniformIntegrabilityReport> {
    let first = family
        .first()
        .ok_or_else(|| Error::PreconditionViolation("uniform integrability needs a nonempty family".into()))?;
    if let Some(d) = thresholds.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::InvalidArgument(format!("thresholds must be positive, got {d}")));
    }
    let ws = WeightSystem::new(m)?;
    let grid = first.grid();
    if let Some(f) = family.iter().find(|f| !f.grid().same_as(grid)) {
        return Err(Error::IncompatibleOperands(format!(
            "family members live on different grids ({} vs {} cells)",
            f.grid().n_cells(),
            grid.n_cells()
        )));
    }
    let mu = cell_measure(grid, &ws);
    let n = mu.len();
    // tails[i] = μ of cells i..n
    let mut tails = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tails[i] = tails[i + 1] + mu[i];
    }

    let mut sup_entropy = f64::NEG_INFINITY;
    let mut sup_square: f64 = 0.0;
    for f in family {
        let q: f64 = f
            .values()
            .iter()
            .zip(&mu)
            .map(|(x, d)| entropy_density(x * x) * d)
            .sum();
        sup_entropy = sup_entropy.max(q);
        sup_square = sup_square.max(f.sup_norm().powi(2));
    }

    let levels: Vec<TailLevel> = thresholds
        .iter()
        .map(|&delta| {
            let start = tails.iter().position(|&t| t <= delta).unwrap_or(n);
            let epsilon = family
                .iter()
                .map(|f| {
                    f.values()[start..]
                        .iter()
                        .zip(&mu[start..])
                        .map(|(x, d)| x * x * d)
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            TailLevel {
                delta,
                radius: grid.faces()[start],
                tail_measure: tails[start],
                epsilon,
            }
        })
        .collect();

    let mut by_delta: Vec<&TailLevel> = levels.iter().collect();
    by_delta.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let epsilon_monotone = by_delta.windows(2).all(|w| w[0].epsilon <= w[1].epsilon);
    Ok(UniformIntegrabilityReport {
        family_size: family.len(),
        sup_entropy,
        sup_square,
        levels,
        epsilon_monotone,
    })
}

/// Least-squares fit `f ≈ c0 + c1 G` on a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c0: f64,
    pub c1: f64,
    /// `‖f - fit‖₂ / ‖f‖₂` over the window samples (0 when `f` vanishes there).
    pub residual: f64,
    pub window: (f64, f64),
}

pub const MIN_FIT_SAMPLES: usize = 20;

/// Growing homogeneous solution `G(r) = ∫_{r_lo}^r s^{1-m} e^{s²/4} ds`
/// evaluated at increasing radii `rs >= r_lo`.
pub fn growing_solution(m: u32, r_lo: f64, rs: &[f64]) -> Vec<f64> {
    let a = 1.0 - f64::from(m);
    let integrand = |s: f64| (a * s.ln() + 0.25 * s * s).exp();
    let mut prev = r_lo;
    let mut acc = 0.0;
    rs.iter()
        .map(|&r| {
            let (piece, _) = quadrature::integrate(integrand, prev, r, 1e-14, 0.0);
            acc += piece;
            prev = r;
            acc
        })
        .collect()
}

/// Fits `f(r) ≈ c0 + c1·G(r)` over the cell centers in `window`.
pub fn fit_tail(f: &WeightedFunction, m: u32, window: (f64, f64)) -> Result<TailFit> {
    WeightSystem::new(m)?;
    let (lo, hi) = window;
    let grid = f.grid();
    if !(lo > 0.0 && lo < hi && hi <= grid.r_max()) {
        return Err(Error::InvalidArgument(format!(
            "fit window ({lo}, {hi}) must satisfy 0 < r_lo < r_hi <= r_max = {}",
            grid.r_max()
        )));
    }
    let (rs, ys): (Vec<f64>, Vec<f64>) = grid
        .centers()
        .iter()
        .zip(f.values())
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .map(|(r, y)| (*r, *y))
        .unzip();
    if rs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "fit window holds {} samples, at least {MIN_FIT_SAMPLES} required",
            rs.len()
        )));
    }
    let g = growing_solution(m, lo, &rs);
    let n = rs.len() as f64;
    let g_mean = g.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sgg: f64 = g.iter().map(|x| (x - g_mean).powi(2)).sum();
    let g_max = g.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if !(sgg.sqrt() > 1e-12 * g_max * n.sqrt()) || !sgg.is_finite() {
        return Err(Error::DegenerateWindow(format!(
            "growing solution is numerically constant on ({lo}, {hi})"
        )));
    }
    let sgy: f64 = g.iter().zip(&ys).map(|(x, y)| (x - g_mean) * (y - y_mean)).sum();
    let c1 = sgy / sgg;
    let c0 = y_mean - c1 * g_mean;
    let res2: f64 = g.iter().zip(&ys).map(|(x, y)| (y - c0 - c1 * x).powi(2)).sum();
    let norm2: f64 = ys.iter().map(|y| y * y).sum();
    let residual = if norm2 > 0.0 { (res2 / norm2).sqrt() } else { 0.0 };
    Ok(TailFit {
        c0,
        c1,
        residual,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    Vanishes,
    Grows,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayThresholds {
    /// "vanishes" when the last probe is below this fraction of `‖f‖∞`.
    pub vanish_rel: f64,
    /// "grows" when the last probe exceeds this multiple of the first.
    pub grow_factor: f64,
}

impl Default for DecayThresholds {
    fn default() -> Self {
        Self {
            vanish_rel: 1e-6,
            grow_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDecay {
    pub k: u32,
    pub probes: Vec<(f64, f64)>,
    pub sup_norm: f64,
    pub class: DecayClass,
}

/// Linear interpolation between cell centers, clamped at both ends.
fn sample(f: &WeightedFunction, r: f64) -> f64 {
    let c = f.grid().centers();
    let v = f.values();
    let dr = f.grid().dr();
    let x = r / dr - 0.5;
    if x <= 0.0 {
        return v[0];
    }
    let i = x.floor() as usize;
    if i + 1 >= v.len() {
        return v[v.len() - 1];
    }
    let t = (r - c[i]) / dr;
    v[i] * (1.0 - t) + v[i + 1] * t
}

/// Classifies `|f_k|` along increasing probe radii for every `k >= 1`.
pub fn check_mode_decay(
    modes: &[WeightedFunction],
    probes: &[f64],
    thresholds: DecayThresholds,
) -> Result<Vec<ModeDecay>> {
    if !modes.iter().any(|f| f.mode_k() >= 1) {
        return Err(Error::PreconditionViolation(
            "mode decay needs at least one mode k >= 1".into(),
        ));
    }
    if probes.len() < 2 || probes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "need at least two increasing probe radii".into(),
        ));
    }
    Ok(modes
        .iter()
        .filter(|f| f.mode_k() >= 1)
        .map(|f| {
            let sup = f.sup_norm();
            let trace: Vec<(f64, f64)> = probes.iter().map(|&r| (r, sample(f, r))).collect();
            let first = trace[0].1.abs();
            let last = trace[trace.len() - 1].1.abs();
            let class = if last <= thresholds.vanish_rel * sup {
                DecayClass::Vanishes
            } else if last > thresholds.grow_factor * first {
                DecayClass::Grows
            } else {
                DecayClass::Indeterminate
            };
            ModeDecay {
                k: f.mode_k(),
                probes: trace,
                sup_norm: sup,
                class,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    PositiveMaximum,
    NegativeMinimum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub index: usize,
    pub r: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremumReport {
    /// Number of samples where the potential is positive.
    pub inspected: usize,
    pub violations: Vec<Extremum>,
}

/// Finds strict interior positive maxima and negative minima of `f` where
/// the potential `-λ ρ + λ_k/r²` is positive.
///
/// A sample is an extremum when it beats both neighbours by more than
/// `1e-12 ‖f‖∞`; all three samples must lie in the positive range.
pub fn check_no_interior_extremum(f: &WeightedFunction, potential: &[f64]) -> Result<ExtremumReport> {
    let v = f.values();
    if potential.len() != v.len() {
        return Err(Error::IncompatibleOperands(format!(
            "potential has {} samples, function has {}",
            potential.len(),
            v.len()
        )));
    }
    let tol = 1e-12 * f.sup_norm();
    let positive: Vec<bool> = potential.iter().map(|p| *p > 0.0).collect();
    let mut violations = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        if !(positive[i - 1] && positive[i] && positive[i + 1]) {
            continue;
        }
        let kind = if v[i] > 0.0 && v[i] > v[i - 1] + tol && v[i] > v[i + 1] + tol {
            ExtremumKind::PositiveMaximum
        } else if v[i] < 0.0 && v[i] < v[i - 1] - tol && v[i] < v[i + 1] - tol {
            ExtremumKind::NegativeMinimum
        } else {
            continue;
        };
        violations.push(Extremum {
            index: i,
            r: f.grid().centers()[i],
            value: v[i],
            kind,
        });
    }
    Ok(ExtremumReport {
        inspected: positive.iter().filter(|p| **p).count(),
        violations,
    })
}

/// `(c0 + c1 r + c2 r²) e^{-a r²}`, a member of the randomized test family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPolynomial {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub a: f64,
}

impl GaussianPolynomial {
    pub fn eval(&self, r: f64) -> f64 {
        (self.c0 + r * (self.c1 + r * self.c2)) * (-self.a * r * r).exp()
    }

    pub fn describe(&self) -> String {
        format!("({} + {} r + {} r²) e^(-{} r²)", self.c0, self.c1, self.c2, self.a)
    }

    pub fn sample(&self, grid: &RadialGrid) -> Result<WeightedFunction> {
        WeightedFunction::from_fn(grid, 0, |r| self.eval(r))
    }
}

/// Deterministic family of `count` smooth radial test functions.
pub fn random_family(seed: u64, count: usize) -> Vec<GaussianPolynomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| GaussianPolynomial {
            c0: rng.random_range(0.5..1.5),
            c1: rng.random_range(-1.0..1.0),
            c2: rng.random_range(-0.5..0.5),
            a: rng.random_range(0.05..1.0),
        })
        .collect()
}

/// Multiplies `u` by `1 - (r/r_max)²` so that it vanishes at the outer face.
pub fn vanish_at_boundary(u: &WeightedFunction) -> Result<WeightedFunction> {
    let r_max = u.grid().r_max();
    let values = u
        .grid()
        .centers()
        .iter()
        .zip(u.values())
        .map(|(&r, &x)| x * (1.0 - (r / r_max).powi(2)))
        .collect();
    u.with_values(values)
}

/// `r³ · tail_ratio(r, m)`, which tends to 2.
pub fn scaled_tail_ratio(r: f64, m: u32) -> Result<f64> {
    Ok(r.powi(3) * measure::tail_ratio(r, m)?)
}

/// `∫ u² dV_g` on the grid, exposed for callers that normalize test functions.
pub fn vol_mass(u: &WeightedFunction, m: u32) -> Result<f64> {
    let ws = WeightSystem::new(m)?;
    measure::weighted_inner_product(u, u, Weight::DVg, &ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::build_grid;

    fn grid() -> RadialGrid {
        build_grid(12.0, 1200).unwrap()
    }

    #[test]
    fn constants_are_equality_cases() {
        let u = WeightedFunction::from_fn(&grid(), 0, |_| 3.0).unwrap();
        let r = check_log_sobolev(&u, 3).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs == 0.0 && r.passed);
    }

    #[test]
    fn zero_function_rejected_by_log_sobolev() {
        let u = WeightedFunction::from_fn(&grid(), 0, |_| 0.0).unwrap();
        assert!(check_log_sobolev(&u, 3).is_err());
    }

    #[test]
    fn zero_function_passes_poincare() {
        let u = WeightedFunction::from_fn(&grid(), 0, |_| 0.0).unwrap();
        for v in [PoincareVariant::Literal, PoincareVariant::MeanCentered] {
            let r = check_poincare(&u, 3, v).unwrap();
            assert!(r.passed && r.margin == 0.0);
        }
    }

    #[test]
    fn literal_poincare_needs_boundary_zero() {
        let u = WeightedFunction::from_fn(&grid(), 0, |r| 1.0 + r).unwrap();
        assert!(matches!(
            check_poincare(&u, 3, PoincareVariant::Literal),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn pass_flag_follows_margin() {
        let r = InequalityReport::new("x", 1.0, 1.0 - 1e-13, 1.0, "");
        assert!(r.passed);
        let r = InequalityReport::new("x", 1.0, 1.0 - 1e-9, 1.0, "");
        assert!(!r.passed);
    }

    #[test]
    fn empty_family_rejected() {
        assert!(matches!(
            check_uniform_integrability(&[], 3, &[0.1]),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn family_of_one_constant() {
        let u = WeightedFunction::from_fn(&grid(), 0, |_| 1.0).unwrap();
        let rep = check_uniform_integrability(&[u], 3, &[1.0, 0.1, 0.01]).unwrap();
        assert_eq!(rep.sup_entropy, 0.0);
        for l in &rep.levels {
            assert!(l.epsilon <= l.delta * rep.sup_square);
        }
        assert!(rep.epsilon_monotone);
    }

    #[test]
    fn constant_fit() {
        let f = WeightedFunction::from_fn(&grid(), 0, |_| 5.0).unwrap();
        let fit = fit_tail(&f, 3, (8.0, 12.0)).unwrap();
        assert!((fit.c0 - 5.0).abs() < 1e-12 && fit.c1.abs() < 1e-25);
        assert!(fit.residual < 1e-14);
    }

    #[test]
    fn narrow_window_rejected() {
        let f = WeightedFunction::from_fn(&grid(), 0, |_| 5.0).unwrap();
        assert!(fit_tail(&f, 3, (8.0, 8.1)).is_err());
    }

    #[test]
    fn detector_finds_sine_extrema() {
        let g = grid();
        let f = WeightedFunction::from_fn(&g, 0, f64::sin).unwrap();
        let rep = check_no_interior_extremum(&f, &vec![1.0; g.n_cells()]).unwrap();
        assert_eq!(rep.violations.len(), 4);
        assert_eq!(rep.violations[0].kind, ExtremumKind::PositiveMaximum);
        assert!((rep.violations[0].r - std::f64::consts::FRAC_PI_2).abs() < g.dr());
    }

    #[test]
    fn family_is_reproducible() {
        assert_eq!(random_family(7, 5), random_family(7, 5));
        assert_ne!(random_family(7, 5), random_family(8, 5));
    }
}
