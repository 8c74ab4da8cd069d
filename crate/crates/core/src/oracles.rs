//! Closed-form ground truth that shares no code with the discretization.
//!
//! The drifted radial equation
//!
//! ```text
//! f'' + ((m-1)/r - r/2) f' = (λ_k / r² - λ) f
//! ```
//!
//! has polynomial solutions `f = Σ_j a_j r^{k+2j}` exactly when
//! `λ = (k + 2n)/2`; the series then terminates after `n + 1` terms.
//! Coefficients are kept as exact rationals.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Eigenvalue `(k + 2n)/2` of the degree-`k` drifted radial problem with
/// radial quantum number `n`.
pub fn drifted_eigenvalue(m: u32, k: u32, n: u32) -> Result<Rational64> {
    if m < 3 {
        return Err(Error::UnsupportedDimension(m));
    }
    Ok(Rational64::new(i64::from(k) + 2 * i64::from(n), 2))
}

/// Terminating series solution of the drifted radial equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialRadialEigenfunction {
    pub m: u32,
    pub k: u32,
    pub n: u32,
    /// `a_0 ..= a_n`, with `a_0 = 1`.
    #[serde(serialize_with = "serialize_rationals")]
    pub coefficients: Vec<BigRational>,
    #[serde(serialize_with = "serialize_rational64")]
    pub lambda: Rational64,
}

fn serialize_rationals<S: serde::Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

fn serialize_rational64<S: serde::Serializer>(q: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(q)
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Builds the polynomial eigenfunction from
/// `2(j+1)(2k+2j+m) a_{j+1} = ((k+2j)/2 - λ) a_j`.
pub fn build_polynomial_eigenfunction(m: u32, k: u32, n: u32) -> Result<PolynomialRadialEigenfunction> {
    let lambda = drifted_eigenvalue(m, k, n)?;
    let lam = BigRational::new(BigInt::from(*lambda.numer()), BigInt::from(*lambda.denom()));
    let (m_, k_) = (i64::from(m), i64::from(k));
    let mut coefficients = vec![BigRational::one()];
    for j in 0..i64::from(n) {
        let a = coefficients.last().expect("non-empty");
        let num = (BigRational::new(BigInt::from(k_ + 2 * j), BigInt::from(2)) - &lam) * a;
        let den = rational(2 * (j + 1) * (2 * k_ + 2 * j + m_));
        coefficients.push(num / den);
    }
    Ok(PolynomialRadialEigenfunction {
        m,
        k,
        n,
        coefficients,
        lambda,
    })
}

impl PolynomialRadialEigenfunction {
    pub fn lambda_f64(&self) -> f64 {
        *self.lambda.numer() as f64 / *self.lambda.denom() as f64
    }

    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|q| q.to_f64().expect("finite rational"))
            .collect()
    }

    /// Exponents `k + 2j` paired with float coefficients.
    fn terms(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.coefficients_f64()
            .into_iter()
            .enumerate()
            .map(move |(j, a)| (self.k as i32 + 2 * j as i32, a))
    }

    pub fn value(&self, r: f64) -> f64 {
        self.terms().map(|(p, a)| a * r.powi(p)).sum()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.terms()
            .filter(|&(p, _)| p > 0)
            .map(|(p, a)| a * f64::from(p) * r.powi(p - 1))
            .sum()
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        self.terms()
            .filter(|&(p, _)| p > 1)
            .map(|(p, a)| a * f64::from(p * (p - 1)) * r.powi(p - 2))
            .sum()
    }

    /// Relative residual of the radial equation at `r`: the residual divided
    /// by the sum of the magnitudes of its terms.
    pub fn ode_residual(&self, r: f64) -> f64 {
        let m = f64::from(self.m);
        let lk = f64::from(self.k) * (f64::from(self.k) + m - 2.0);
        let (f, df, ddf) = (self.value(r), self.derivative(r), self.second_derivative(r));
        let lam = self.lambda_f64();
        let terms = [ddf, (m - 1.0) / r * df, -0.5 * r * df, lam * f, -lk / (r * r) * f];
        let residual: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        if scale == 0.0 {
            0.0
        } else {
            residual.abs() / scale
        }
    }

    /// Residual of the radial equation evaluated exactly at a rational `r`.
    pub fn exact_residual(&self, r: &BigRational) -> BigRational {
        let m = rational(i64::from(self.m));
        let k = i64::from(self.k);
        let lk = rational(k * (k + i64::from(self.m) - 2));
        let lam = BigRational::new(BigInt::from(*self.lambda.numer()), BigInt::from(*self.lambda.denom()));
        let (mut f, mut df, mut ddf) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
        for (j, a) in self.coefficients.iter().enumerate() {
            let p = k + 2 * j as i64;
            f += a * pow(r, p);
            if p > 0 {
                df += a * rational(p) * pow(r, p - 1);
            }
            if p > 1 {
                ddf += a * rational(p * (p - 1)) * pow(r, p - 2);
            }
        }
        let r2 = r * r;
        ddf + ((m - BigRational::one()) / r - r / rational(2)) * df + (lam - lk / r2) * f
    }
}

fn pow(r: &BigRational, p: i64) -> BigRational {
    (0..p).fold(BigRational::one(), |acc, _| acc * r)
}

/// `L y / y` for `y = e^{2r²}` and `L = d²/dr² + ((m-1)/r - r/2) d/dr`,
/// by central differences.
///
/// The differences act on `z(s) = y(r+s)/y(r) = e^{2s(2r+s)}`, so `y` itself
/// is never formed and large `r` cannot overflow. Two step sizes are
/// combined by Richardson extrapolation. Analytically the result is
/// `14r² + 4m`.
pub fn comparison_function_residual(r: f64, m: u32) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let z = |s: f64| (2.0 * s * (2.0 * r + s)).exp();
    let diffs = |h: f64| {
        let (zp, zm) = (z(h), z(-h));
        ((zp - zm) / (2.0 * h), (zp - 2.0 + zm) / (h * h))
    };
    // z varies on the scale 1/(4r) near s = 0.
    let h = 0.02 / (1.0 + 4.0 * r);
    let (d1, d2) = diffs(h);
    let (e1, e2) = diffs(0.5 * h);
    let first = (4.0 * e1 - d1) / 3.0;
    let second = (4.0 * e2 - d2) / 3.0;
    let drift = (f64::from(m) - 1.0) / r - 0.5 * r;
    Ok(second + drift * first)
}
