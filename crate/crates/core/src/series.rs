//! Truncated power series on the disc and their boundary samples.
//!
//! A [`PowerSeries`] holds `a_0..a_N`. Arithmetic truncates at the common
//! order. [`BoundarySamples`] holds values on a circle of radius `ρ` at `M`
//! equispaced points, `M` a power of two; the two representations are
//! connected by the FFT (`c_n ρⁿ` are the DFT coefficients of the samples).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Orders above this switch `multiply` from the schoolbook product to FFT convolution.
const FFT_MULTIPLY_THRESHOLD: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    coeffs: Vec<C64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parameter("power series needs at least one coefficient".into()));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical(format!("non-finite coefficient at index {i}")));
        }
        Ok(Self { coeffs })
    }

    /// Internal constructor for coefficient vectors already known to be finite.
    pub(crate) fn from_vec(coeffs: Vec<C64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(order: usize) -> Self {
        Self { coeffs: vec![ZERO; order + 1] }
    }

    pub fn constant(c: C64, order: usize) -> Self {
        let mut s = Self::zeros(order);
        s.coeffs[0] = c;
        s
    }

    /// `zᵏ` truncated at `order` (the zero series when `k > order`).
    pub fn monomial(k: usize, order: usize) -> Self {
        let mut s = Self::zeros(order);
        if k <= order {
            s.coeffs[k] = ONE;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> C64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    /// Truncates or zero-pads to `order`.
    pub fn resized(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, ZERO);
        Self { coeffs: c }
    }

    /// Evaluates the truncated polynomial (Horner).
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zeros(0);
        }
        let c = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, &a)| a * (k + 1) as f64)
            .collect();
        Self { coeffs: c }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self { coeffs: (0..=n).map(|k| self.coeffs[k] + other.coeffs[k]).collect() }
    }

    /// Σ|a_n|².
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Multiplicative inverse, requires `a_0 ≠ 0`.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0.norm() == 0.0 {
            return Err(Error::Domain("reciprocal of a series with zero constant term".into()));
        }
        let n = self.order();
        let inv0 = a0.inv();
        let mut g = vec![ZERO; n + 1];
        g[0] = inv0;
        for k in 1..=n {
            let mut s = ZERO;
            for j in 1..=k {
                s += self.coeffs[j] * g[k - j];
            }
            g[k] = -s * inv0;
        }
        PowerSeries::new(g)
    }

    /// `exp(f)` via `n gₙ = Σ k fₖ g_{n−k}`.
    pub fn exp(&self) -> Result<Self> {
        let n = self.order();
        let mut g = vec![ZERO; n + 1];
        g[0] = self.coeffs[0].exp();
        for m in 1..=n {
            let mut s = ZERO;
            for k in 1..=m {
                s += self.coeffs[k] * (k as f64) * g[m - k];
            }
            g[m] = s / m as f64;
        }
        PowerSeries::new(g)
    }
}

/// Cauchy product truncated at the smaller of the two orders.
pub fn multiply(f: &PowerSeries, g: &PowerSeries) -> PowerSeries {
    let n = f.order().min(g.order());
    if n < FFT_MULTIPLY_THRESHOLD {
        let mut c = vec![ZERO; n + 1];
        for (i, &a) in f.coeffs[..=n].iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in g.coeffs[..=n - i].iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PowerSeries::from_vec(c)
    } else {
        fft_multiply(&f.coeffs[..=n], &g.coeffs[..=n], n)
    }
}

fn fft_multiply(a: &[C64], b: &[C64], order: usize) -> PowerSeries {
    let m = (2 * (order + 1)).next_power_of_two();
    let fft = FftPair::new(m);
    let mut fa = vec![ZERO; m];
    let mut fb = vec![ZERO; m];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    fft.forward(&mut fa);
    fft.forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    fft.inverse(&mut fa);
    let scale = 1.0 / m as f64;
    PowerSeries::from_vec(fa[..=order].iter().map(|&c| c * scale).collect())
}

/// Result of [`compose`]: the truncated composite and an estimate of what
/// the truncation of the outer series left out.
#[derive(Debug, Clone)]
pub struct Composition {
    pub series: PowerSeries,
    pub tail_error: f64,
}

/// Truncation of `f∘φ`. Exact (relative to the truncated `f`) when `φ(0) = 0`;
/// otherwise every coefficient of `f` feeds the constant term and the reported
/// `tail_error` bounds the neglected `Σ_{k>N} |a_k| |φ|ᵏ` using the decay of
/// the last retained coefficient.
pub fn compose(f: &PowerSeries, phi: &PowerSeries) -> Result<Composition> {
    let phi0 = phi.coeff(0);
    if phi0.norm() >= 1.0 {
        return Err(Error::Domain(format!("compose needs |phi(0)| < 1, got {}", phi0.norm())));
    }
    let n = f.order().min(phi.order());
    let phi = phi.resized(n);
    let mut acc = PowerSeries::constant(f.coeffs[n], n);
    for k in (0..n).rev() {
        acc = multiply(&acc, &phi);
        acc.coeffs[0] += f.coeffs[k];
    }
    let tail_error = if phi0 == ZERO {
        0.0
    } else {
        let m: f64 = phi.coeffs.iter().map(|c| c.norm()).sum();
        let last = f.coeffs[n].norm();
        if m >= 1.0 {
            f64::INFINITY
        } else {
            last * m.powi(n as i32 + 1) / (1.0 - m)
        }
    };
    Ok(Composition { series: acc, tail_error })
}

/// Forward/inverse FFT plans of one length.
#[derive(Clone)]
pub struct FftPair {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { len, fwd: planner.plan_fft_forward(len), inv: planner.plan_fft_inverse(len) }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized `X_n = Σ x_k e^{−2πink/M}`.
    pub fn forward(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
    }

    /// Unnormalized `x_k = Σ X_n e^{+2πink/M}`.
    pub fn inverse(&self, buf: &mut [C64]) {
        self.inv.process(buf);
    }
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("len", &self.len).finish()
    }
}

/// Values on the circle `|z| = ρ` at `ρ·e^{2πik/M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    radius: f64,
    values: Vec<C64>,
}

impl BoundarySamples {
    pub fn new(radius: f64, values: Vec<C64>) -> Result<Self> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::Parameter(format!("sampling radius must lie in (0, 1], got {radius}")));
        }
        if values.len() < 4 || !values.len().is_power_of_two() {
            return Err(Error::Parameter(format!(
                "sample count must be a power of two ≥ 4, got {}",
                values.len()
            )));
        }
        Ok(Self { radius, values })
    }

    /// Samples a function given pointwise.
    pub fn from_fn(radius: f64, len: usize, mut f: impl FnMut(C64) -> Result<C64>) -> Result<Self> {
        let values = circle_points(radius, len).into_iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::new(radius, values)
    }

    /// Exact samples of a polynomial: coefficients are folded modulo `M`.
    pub fn from_series(f: &PowerSeries, radius: f64, len: usize) -> Result<Self> {
        let fft = FftPair::new(len);
        Self::from_series_with(f, radius, &fft)
    }

    pub fn from_series_with(f: &PowerSeries, radius: f64, fft: &FftPair) -> Result<Self> {
        let len = fft.len();
        let mut buf = vec![ZERO; len];
        let mut rn = 1.0;
        for (n, &c) in f.coeffs.iter().enumerate() {
            buf[n % len] += c * rn;
            rn *= radius;
        }
        fft.inverse(&mut buf);
        Self::new(radius, buf)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean of `|f|²` over the samples.
    pub fn mean_abs_sq(&self) -> f64 {
        pairwise_sum(&self.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>()) / self.len() as f64
    }

    /// Recovers `a_0..a_N`. Requires `M ≥ 4N` so that aliasing stays below the
    /// decay `ρ^M` of the folded tail.
    pub fn to_coefficients(&self, order: usize) -> Result<PowerSeries> {
        let fft = FftPair::new(self.len());
        self.to_coefficients_with(order, &fft)
    }

    pub fn to_coefficients_with(&self, order: usize, fft: &FftPair) -> Result<PowerSeries> {
        if self.len() < 4 * order {
            return Err(Error::Sampling(format!(
                "aliasing: {} samples is shorter than 4N = {}",
                self.len(),
                4 * order
            )));
        }
        let mut buf = self.values.clone();
        fft.forward(&mut buf);
        Ok(PowerSeries::from_vec(scaled_coefficients(&buf, self.radius, order)))
    }
}

/// Divides raw DFT output by `M ρⁿ` for `n ≤ order`.
pub(crate) fn scaled_coefficients(dft: &[C64], radius: f64, order: usize) -> Vec<C64> {
    let m = dft.len() as f64;
    let mut out = Vec::with_capacity(order + 1);
    let inv_r = 1.0 / radius;
    let mut scale = 1.0 / m;
    for &c in dft.iter().take(order + 1) {
        out.push(c * scale);
        scale *= inv_r;
    }
    out
}

/// `ρ·e^{2πik/M}`, k = 0..M.
pub fn circle_points(radius: f64, len: usize) -> Vec<C64> {
    (0..len)
        .map(|k| C64::from_polar(radius, std::f64::consts::TAU * k as f64 / len as f64))
        .collect()
}

/// Midpoint nodes `ρ·e^{2πi(k+½)/M}`; these avoid θ = 0, where most boundary
/// singularities of the function zoo sit.
pub fn circle_midpoints(radius: f64, len: usize) -> Vec<C64> {
    (0..len)
        .map(|k| C64::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.5) / len as f64))
        .collect()
}

/// Default coefficient-extraction radius `exp(−6/N)`.
pub fn default_radius(order: usize) -> f64 {
    (-6.0 / order.max(1) as f64).exp()
}

/// Default DFT length: the smallest power of two ≥ 4N (and ≥ 16).
pub fn default_sample_len(order: usize) -> usize {
    (4 * order).max(16).next_power_of_two()
}

/// Summation with a fixed binary tree, independent of evaluation order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Taylor coefficients `a_0..a_N` of a function spec.
///
/// Variants with known recurrences (geometric, binomial, finite Blaschke and
/// atomic singular factors, and algebra over those) are expanded exactly;
/// anything else is sampled on `|z| = ρ` with `M = 4N` points.
pub fn taylor_coefficients(f: &FunctionSpec, order: usize, radius: f64) -> Result<PowerSeries> {
    if let Some(s) = f.exact_coefficients(order)? {
        return Ok(s);
    }
    taylor_coefficients_sampled(f, order, radius)
}

/// The sampled path of [`taylor_coefficients`], always by DFT.
pub fn taylor_coefficients_sampled(f: &FunctionSpec, order: usize, radius: f64) -> Result<PowerSeries> {
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!("sampling radius must be positive, got {radius}")));
    }
    if radius >= 1.0 {
        let singular = !f.boundary_singular_angles().is_empty() || !f.has_boundary_values();
        if radius > 1.0 || singular {
            return Err(Error::Sampling(format!(
                "cannot sample at radius {radius}: function is singular on or beyond the unit circle"
            )));
        }
    }
    let len = default_sample_len(order);
    let samples = BoundarySamples::from_fn(radius, len, |z| f.eval(z))?;
    samples.to_coefficients(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn multiply_difference_of_squares() {
        let a = PowerSeries::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let b = PowerSeries::from_real(&[1.0, -1.0, 0.0]).unwrap();
        assert_eq!(multiply(&a, &b).coeffs(), &[c(1.0), c(0.0), c(-1.0)]);
    }

    #[test]
    fn multiply_resizes_to_min_order() {
        let a = PowerSeries::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = PowerSeries::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(multiply(&a, &b).coeffs(), &[c(1.0), c(3.0)]);
    }

    #[test]
    fn fft_multiply_matches_schoolbook() {
        let n = 300;
        let a: Vec<C64> = (0..=n).map(|k| C64::new(1.0 / (k + 1) as f64, (k % 7) as f64 * 0.1)).collect();
        let b: Vec<C64> = (0..=n).map(|k| C64::new(0.9f64.powi(k as i32), -0.2)).collect();
        let fast = fft_multiply(&a, &b, n);
        for k in 0..=n {
            let mut s = ZERO;
            for j in 0..=k {
                s += a[j] * b[k - j];
            }
            assert!((fast.coeff(k) - s).norm() < 1e-11 * (1.0 + s.norm()), "k={k}");
        }
    }

    #[test]
    fn compose_identity_returns_inner() {
        let z = PowerSeries::monomial(1, 6);
        let phi = PowerSeries::new((0..=6).map(|k| C64::new(0.1 * k as f64, 0.05)).collect()).unwrap();
        let out = compose(&z, &phi).unwrap();
        for k in 0..=6 {
            assert!((out.series.coeff(k) - phi.coeff(k)).norm() < 1e-15);
        }
    }

    #[test]
    fn compose_rejects_unimodular_constant() {
        let f = PowerSeries::monomial(1, 3);
        let phi = PowerSeries::constant(C64::new(0.6, 0.8), 3);
        assert!(matches!(compose(&f, &phi), Err(Error::Domain(_))));
    }

    #[test]
    fn compose_with_nonzero_constant_reports_tail() {
        // f = 1/(1-z) truncated, φ = 0.5: exact value 2, truncation gives 2 - 2^-N.
        let f = PowerSeries::new(vec![ONE; 21]).unwrap();
        let phi = PowerSeries::constant(c(0.5), 20);
        let out = compose(&f, &phi).unwrap();
        let err = (out.series.coeff(0) - c(2.0)).norm();
        assert!(err > 0.0 && err <= out.tail_error * 1.0001);
    }

    #[test]
    fn samples_round_trip_polynomial() {
        let p = PowerSeries::new((0..=10).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect()).unwrap();
        let s = BoundarySamples::from_series(&p, 0.9, 64).unwrap();
        let q = s.to_coefficients(10).unwrap();
        for k in 0..=10 {
            assert!((p.coeff(k) - q.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn short_dft_is_an_aliasing_error() {
        let s = BoundarySamples::new(0.5, vec![ONE; 16]).unwrap();
        assert!(matches!(s.to_coefficients(5), Err(Error::Sampling(_))));
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(BoundarySamples::new(0.5, vec![ONE; 12]).is_err());
        assert!(BoundarySamples::new(1.5, vec![ONE; 16]).is_err());
    }

    #[test]
    fn non_finite_coefficients_rejected() {
        assert!(PowerSeries::new(vec![C64::new(f64::NAN, 0.0)]).is_err());
        assert!(PowerSeries::new(vec![]).is_err());
    }

    #[test]
    fn reciprocal_of_one_minus_z() {
        let f = PowerSeries::from_real(&[1.0, -1.0, 0.0, 0.0, 0.0]).unwrap();
        let g = f.reciprocal().unwrap();
        assert!(g.coeffs().iter().all(|&x| (x - ONE).norm() < 1e-15));
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let xs: Vec<f64> = (0..1000).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs.clone()));
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-12);
    }
}
