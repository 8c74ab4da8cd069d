//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues, shifted inverse iteration for the eigenvectors.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

const MAX_BISECTIONS: usize = 2200;
const INVERSE_STEPS: usize = 6;
const RESTARTS: usize = 3;

impl SymTridiagonal {
    /// `off[i]` couples rows `i` and `i + 1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (negative pivots of the
    /// `LDLᵀ` factorization of `T - xI`).
    pub fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let e = self.off[i - 1];
                q = (self.diag[i] - x) - e * (e / q);
            }
            if q == 0.0 {
                q = -f64::MIN_POSITIVE / f64::EPSILON;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `j`-th smallest eigenvalue (0-based), bisected to full relative
    /// precision. `floor` is a known lower bound (for instance the previous
    /// eigenvalue).
    fn bisect(&self, j: usize, floor: f64) -> f64 {
        let (g_lo, g_hi) = self.gershgorin();
        let mut lo = floor.max(g_lo);
        if self.sturm_count(lo) > j {
            lo = g_lo;
        }
        let mut hi = lo.abs().max(1.0);
        while self.sturm_count(hi) <= j && hi < g_hi {
            hi = (hi * 2.0).min(g_hi);
        }
        if self.sturm_count(hi) <= j {
            // Gershgorin bound is inclusive; step just past it.
            hi = g_hi + g_hi.abs() * f64::EPSILON + f64::MIN_POSITIVE;
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.sturm_count(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `count` smallest eigenvalues in ascending order.
    pub fn smallest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let mut floor = f64::NEG_INFINITY;
        for j in 0..count.min(self.len()) {
            let lambda = self.bisect(j, floor);
            floor = lambda;
            out.push(lambda);
        }
        out
    }

    /// Factorizes `T - shift·I` with partial pivoting.
    pub fn factor_shifted(&self, shift: f64) -> TridiagonalLu {
        TridiagonalLu::new(
            self.off.clone(),
            self.diag.iter().map(|d| d - shift).collect(),
            self.off.clone(),
        )
    }

    /// Unit eigenvector for the (already accurate) eigenvalue `lambda`,
    /// orthogonalized against `previous` (assumed orthonormal).
    pub fn eigenvector(&self, index: usize, lambda: f64, previous: &[Vec<f64>], tol: f64) -> Result<Vec<f64>> {
        let unit = vec![1.0; self.len()];
        self.pencil_eigenvector(&unit, index, lambda, previous, tol)
    }

    /// Eigenvector of the pencil `T f = λ M f` for diagonal `M > 0`,
    /// normalized to `fᵀ M f = 1` and `M`-orthogonalized against `previous`.
    ///
    /// Inverse iteration with shift `lambda (1 + 1e-8)` on `T - σM` itself,
    /// so graded problems keep their natural scaling. Converges when
    /// `‖T f - λ M f‖ / ‖M f‖ <= tol · max(|λ|, 1)`.
    pub fn pencil_eigenvector(
        &self,
        mass: &[f64],
        index: usize,
        lambda: f64,
        previous: &[Vec<f64>],
        tol: f64,
    ) -> Result<Vec<f64>> {
        let n = self.len();
        let shift = lambda * (1.0 + 1e-8);
        let lu = TridiagonalLu::new(
            self.off.clone(),
            self.diag.iter().zip(mass).map(|(d, m)| d - shift * m).collect(),
            self.off.clone(),
        );
        let scale = lambda.abs().max(1.0);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for restart in 0..RESTARTS {
            let mut x = start_vector(n, restart as u64 + index as u64 * 7919);
            orthogonalize(&mut x, previous, mass);
            normalize(&mut x, mass);
            for _ in 0..INVERSE_STEPS {
                let mut y: Vec<f64> = x.iter().zip(mass).map(|(x, m)| x * m).collect();
                lu.solve(&mut y);
                orthogonalize(&mut y, previous, mass);
                if normalize(&mut y, mass) == 0.0 {
                    break;
                }
                x = y;
                let res = pencil_residual(self, mass, lambda, &x);
                if best.as_ref().is_none_or(|(r, _)| res < *r) {
                    best = Some((res, x.clone()));
                }
                if res <= tol * scale {
                    return Ok(x);
                }
            }
        }
        match best {
            // Accept a vector that stalled at rounding level.
            Some((res, x)) if res <= 1e3 * tol * scale => Ok(x),
            Some((res, _)) => Err(Error::NumericalFailure {
                index,
                detail: format!("inverse iteration stalled with residual {res:e}"),
            }),
            None => Err(Error::NumericalFailure {
                index,
                detail: "inverse iteration produced a zero vector".into(),
            }),
        }
    }
}

/// `‖T f - λ M f‖ / ‖M f‖`.
pub fn pencil_residual(t: &SymTridiagonal, mass: &[f64], lambda: f64, f: &[f64]) -> f64 {
    let tf = t.matvec(f);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((tf, m), f) in tf.iter().zip(mass).zip(f) {
        num += (tf - lambda * m * f).powi(2);
        den += (m * f).powi(2);
    }
    (num / den).sqrt()
}

// Deterministic, sign-mixed start vector (splitmix64 stream).
fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(0xD1B5_4A32_D192_ED03);
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            0.5 + (z >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>], mass: &[f64]) {
    for b in basis {
        let c: f64 = x.iter().zip(b).zip(mass).map(|((a, b), m)| a * b * m).sum();
        x.iter_mut().zip(b).for_each(|(a, b)| *a -= c * b);
    }
}

fn normalize(x: &mut [f64], mass: &[f64]) -> f64 {
    let big = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if big == 0.0 || !big.is_finite() {
        return 0.0;
    }
    x.iter_mut().for_each(|v| *v /= big);
    let norm = x.iter().zip(mass).map(|(v, m)| v * v * m).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    norm * big
}

/// `LU` factorization of a general tridiagonal matrix with partial pivoting
/// (row interchanges create a second superdiagonal).
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    upper2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    pub fn new(mut lower: Vec<f64>, mut diag: Vec<f64>, mut upper: Vec<f64>) -> Self {
        let n = diag.len();
        let mut upper2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = {
            let big = diag.iter().chain(&lower).fold(0.0_f64, |a, v| a.max(v.abs()));
            (big * f64::EPSILON).max(f64::MIN_POSITIVE)
        };
        for i in 0..n.saturating_sub(1) {
            if diag[i].abs() >= lower[i].abs() {
                if diag[i] == 0.0 {
                    diag[i] = tiny;
                }
                let fact = lower[i] / diag[i];
                lower[i] = fact;
                diag[i + 1] -= fact * upper[i];
            } else {
                let fact = diag[i] / lower[i];
                diag[i] = lower[i];
                lower[i] = fact;
                let temp = upper[i];
                upper[i] = diag[i + 1];
                diag[i + 1] = temp - fact * diag[i + 1];
                if i + 2 < n {
                    upper2[i] = upper[i + 1];
                    upper[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && diag[n - 1] == 0.0 {
            diag[n - 1] = tiny;
        }
        Self {
            lower,
            diag,
            upper,
            upper2,
            swapped,
        }
    }

    /// Overwrites `b` with the solution.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.lower[i] * b[i];
            } else {
                b[i + 1] -= self.lower[i] * b[i];
            }
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.upper[i] * b[i + 1];
            }
            if i + 2 < n {
                v -= self.upper2[i] * b[i + 2];
            }
            b[i] = v / self.diag[i];
        }
    }
}

/// Solves `T x = b` for symmetric positive definite `T` by `LDLᵀ` without
/// pivoting.
pub fn ldl_solve(t: &SymTridiagonal, b: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n.saturating_sub(1)];
    d[0] = t.diag[0];
    for i in 1..n {
        if !(d[i - 1] > 0.0) {
            return Err(Error::IllPosed(format!(
                "matrix is not positive definite (pivot {})",
                i - 1
            )));
        }
        l[i - 1] = t.off[i - 1] / d[i - 1];
        d[i] = t.diag[i] - l[i - 1] * t.off[i - 1];
    }
    if !(d[n - 1] > 0.0) {
        return Err(Error::IllPosed(format!(
            "matrix is not positive definite (pivot {})",
            n - 1
        )));
    }
    let mut x = b.to_vec();
    for i in 1..n {
        x[i] -= l[i - 1] * x[i - 1];
    }
    for i in 0..n {
        x[i] /= d[i];
    }
    for i in (0..n - 1).rev() {
        x[i] -= l[i] * x[i + 1];
    }
    Ok(x)
}
