//! Hardy `H²` and weighted Bergman `A²_α`: monomial norms, inner products,
//! reproducing kernels and the model-space projection.
//!
//! In both spaces the monomials are orthogonal, so everything reduces to
//! weighted `ℓ²` over Taylor coefficients with weights `ν_n = ‖zⁿ‖²`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::series::{multiply, pairwise_sum, BoundarySamples, FftPair, PowerSeries, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum SpaceSpec {
    Hardy,
    /// Norm `(1/π)∫|f|²(1 − |z|²)^α dA`.
    Bergman { alpha: f64 },
}

impl SpaceSpec {
    pub fn bergman(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!("Bergman weight needs α > −1, got {alpha}")));
        }
        Ok(Self::Bergman { alpha })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Hardy => Ok(()),
            Self::Bergman { alpha } => Self::bergman(alpha).map(|_| ()),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            Self::Hardy => None,
            Self::Bergman { alpha } => Some(alpha),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Self::Hardy => "hardy".into(),
            Self::Bergman { alpha } => format!("bergman(alpha={alpha})"),
        }
    }

    /// Exponent `γ` with `‖K_w‖² = c/(1 − |w|²)^γ`: 1 for Hardy, `α + 2` for Bergman.
    pub fn kernel_exponent(&self) -> f64 {
        match *self {
            Self::Hardy => 1.0,
            Self::Bergman { alpha } => alpha + 2.0,
        }
    }
}

/// `‖zⁿ‖²`: 1 in Hardy, `B(n + 1, α + 1)` in Bergman.
pub fn monomial_norm_sq(space: SpaceSpec, n: usize) -> f64 {
    match space {
        SpaceSpec::Hardy => 1.0,
        SpaceSpec::Bergman { alpha } => {
            let n = n as f64;
            (ln_gamma(n + 1.0) + ln_gamma(alpha + 1.0) - ln_gamma(n + alpha + 2.0)).exp()
        }
    }
}

/// `ν_0..ν_N` by the ratio `ν_n/ν_{n−1} = n/(n + α + 1)`.
pub fn monomial_norms_sq(space: SpaceSpec, order: usize) -> Vec<f64> {
    match space {
        SpaceSpec::Hardy => vec![1.0; order + 1],
        SpaceSpec::Bergman { alpha } => {
            let mut v = Vec::with_capacity(order + 1);
            let mut cur = 1.0 / (alpha + 1.0);
            v.push(cur);
            for n in 1..=order {
                cur *= n as f64 / (n as f64 + alpha + 1.0);
                v.push(cur);
            }
            v
        }
    }
}

pub fn inner_product(space: SpaceSpec, f: &PowerSeries, g: &PowerSeries) -> C64 {
    let n = f.order().min(g.order());
    let nu = monomial_norms_sq(space, n);
    let terms: Vec<C64> = (0..=n).map(|k| f.coeff(k) * g.coeff(k).conj() * nu[k]).collect();
    complex_sum(&terms)
}

pub fn norm(space: SpaceSpec, f: &PowerSeries) -> f64 {
    norm_sq(space, f).sqrt()
}

pub fn norm_sq(space: SpaceSpec, f: &PowerSeries) -> f64 {
    let nu = monomial_norms_sq(space, f.order());
    let terms: Vec<f64> = f.coeffs().iter().zip(&nu).map(|(c, w)| c.norm_sqr() * w).collect();
    pairwise_sum(&terms)
}

pub(crate) fn complex_sum(terms: &[C64]) -> C64 {
    let re: Vec<f64> = terms.iter().map(|c| c.re).collect();
    let im: Vec<f64> = terms.iter().map(|c| c.im).collect();
    C64::new(pairwise_sum(&re), pairwise_sum(&im))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `K_w`, reproducing `f(w)`.
    Standard,
    Normalized,
    /// `∂_w̄ K_w`, reproducing `f′(w)`.
    Derivative,
    NormalizedDerivative,
}

impl KernelKind {
    pub fn is_derivative(&self) -> bool {
        matches!(self, Self::Derivative | Self::NormalizedDerivative)
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self, Self::Normalized | Self::NormalizedDerivative)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelFamily {
    pub space: SpaceSpec,
    pub kind: KernelKind,
    pub w: C64,
}

impl KernelFamily {
    pub fn new(space: SpaceSpec, kind: KernelKind, w: C64) -> Self {
        Self { space, kind, w }
    }

    /// Closed-form `‖K_w‖²` or `‖∂_w̄ K_w‖²` (never truncated).
    pub fn unnormalized_norm_sq(&self) -> f64 {
        let x = self.w.norm_sqr();
        match (self.space, self.kind.is_derivative()) {
            (SpaceSpec::Hardy, false) => 1.0 / (1.0 - x),
            (SpaceSpec::Hardy, true) => (1.0 + x) / (1.0 - x).powi(3),
            (SpaceSpec::Bergman { alpha }, false) => (alpha + 1.0) / (1.0 - x).powf(alpha + 2.0),
            (SpaceSpec::Bergman { alpha }, true) => {
                (alpha + 1.0) * (alpha + 2.0) * (1.0 + (alpha + 2.0) * x) / (1.0 - x).powf(alpha + 4.0)
            }
        }
    }

    /// Scale applied to the raw kernel: 1, or the reciprocal of its true norm.
    pub fn normalization(&self) -> f64 {
        if self.kind.is_normalized() {
            1.0 / self.unnormalized_norm_sq().sqrt()
        } else {
            1.0
        }
    }
}

/// Coefficients of the kernel through order `N`: `w̄ⁿ/ν_n` for the standard
/// kernel, `n·w̄ⁿ⁻¹/ν_n` for the derivative kernel.
pub fn kernel_coeffs(family: &KernelFamily, order: usize) -> Result<PowerSeries> {
    if !(family.w.norm() < 1.0) {
        return Err(Error::Domain(format!("kernel point needs |w| < 1, got {}", family.w.norm())));
    }
    let nu = monomial_norms_sq(family.space, order);
    let wb = family.w.conj();
    let s = family.normalization();
    let mut c = vec![ZERO; order + 1];
    let mut p = C64::new(s, 0.0);
    if family.kind.is_derivative() {
        for n in 1..=order {
            c[n] = p * n as f64 / nu[n];
            p *= wb;
        }
    } else {
        for n in 0..=order {
            c[n] = p / nu[n];
            p *= wb;
        }
    }
    Ok(PowerSeries::from_vec(c))
}

/// Orthogonal projection onto the model space `K_φ = H² ⊖ φH²`.
///
/// Uses `P_{K_φ}h = h − φ·P₊(φ̄h)` on exact coefficients when `φ` has them:
/// for a truncated `h`, `P₊(φ̄h)` is the finite correlation
/// `Σ_j h_j·conj(φ_{j−k})`. Otherwise falls back to [`kphi_project_sampled`].
pub fn kphi_project(h: &PowerSeries, phi: &FunctionSpec, order: usize) -> Result<PowerSeries> {
    if !phi.is_inner(1e-6) {
        return Err(Error::Precondition("kphi_project needs an inner symbol with closed-form boundary values".into()));
    }
    let d = h.order();
    let Some(phis) = phi.exact_coefficients(order.max(d))? else {
        return kphi_project_sampled(h, phi, order);
    };
    let rev = PowerSeries::from_vec(h.coeffs().iter().rev().copied().collect());
    let conj = PowerSeries::from_vec(phis.coeffs()[..=d].iter().map(|c| c.conj()).collect());
    let corr = multiply(&rev, &conj);
    let t = PowerSeries::from_vec((0..=d).map(|k| corr.coeff(d - k)).collect()).resized(order.max(d));
    let p = h.resized(order.max(d)).add(&multiply(&phis, &t).scale(C64::new(-1.0, 0.0)));
    Ok(p.resized(order))
}

/// [`kphi_project`] computed as `φ·P₋(φ̄h)` on boundary samples.
///
/// Samples sit on the unit circle when `φ` extends analytically across it and
/// at radius `1 − 10⁻⁸` otherwise; singular inner factors oscillate without
/// bound near their atoms, so that case is only as good as the sampling.
pub fn kphi_project_sampled(h: &PowerSeries, phi: &FunctionSpec, order: usize) -> Result<PowerSeries> {
    if !phi.is_inner(1e-6) {
        return Err(Error::Precondition("kphi_project needs an inner symbol with closed-form boundary values".into()));
    }
    let rho = if phi.boundary_singular_angles().is_empty() { 1.0 } else { 1.0 - 1e-8 };
    let len = (4 * (order.max(h.order()) + 1)).max(1024).next_power_of_two();
    let fft = FftPair::new(len);
    let hs = BoundarySamples::from_series_with(h, rho, &fft)?;
    let phis = BoundarySamples::from_fn(rho, len, |z| phi.eval(z))?;
    let mut buf: Vec<C64> = hs.values().iter().zip(phis.values()).map(|(h, p)| p.conj() * h).collect();
    fft.forward(&mut buf);
    // Keep strictly negative frequencies, which live in the upper half.
    for v in buf.iter_mut().take(len / 2) {
        *v = ZERO;
    }
    fft.inverse(&mut buf);
    let scale = 1.0 / len as f64;
    for (v, p) in buf.iter_mut().zip(phis.values()) {
        *v *= p * scale;
    }
    BoundarySamples::new(rho, buf)?.to_coefficients_with(order, &fft)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::InnerFunctionData;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_poly(rng: &mut impl Rng, deg: usize) -> PowerSeries {
        PowerSeries::new((0..=deg).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap()
    }

    #[test]
    fn monomial_norm_examples() {
        assert_eq!(monomial_norm_sq(SpaceSpec::Hardy, 7), 1.0);
        let b = SpaceSpec::bergman(0.0).unwrap();
        assert!((monomial_norm_sq(b, 0) - 1.0).abs() < 1e-15);
        assert!((monomial_norm_sq(b, 1) - 0.5).abs() < 1e-14);
        assert!(SpaceSpec::bergman(-1.0).is_err());
    }

    #[test]
    fn ratio_recursion_matches_log_gamma() {
        for alpha in [0.0, 0.5, 2.0, -0.7] {
            let s = SpaceSpec::bergman(alpha).unwrap();
            let v = monomial_norms_sq(s, 300);
            for (n, x) in v.iter().enumerate() {
                assert!((x - monomial_norm_sq(s, n)).abs() <= 1e-12 * x, "α={alpha} n={n}");
            }
        }
    }

    #[test]
    fn norm_examples() {
        let g = PowerSeries::new((0..=20).map(|n| c(0.5f64.powi(n), 0.0)).collect()).unwrap();
        assert!((norm_sq(SpaceSpec::Hardy, &g) - 4.0 / 3.0).abs() < 1e-6);
        let z = PowerSeries::monomial(1, 3);
        assert!((norm(SpaceSpec::bergman(0.0).unwrap(), &z) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn partial_norms_of_inverse_sqrt_grow() {
        let f = FunctionSpec::frac_power(0.5);
        let a = norm_sq(SpaceSpec::Hardy, &f.exact_coefficients(256).unwrap().unwrap());
        let b = norm_sq(SpaceSpec::Hardy, &f.exact_coefficients(4096).unwrap().unwrap());
        assert!(b / a >= 1.15, "{}", b / a);
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_coeffs(&KernelFamily::new(SpaceSpec::Hardy, KernelKind::Normalized, ZERO), 5).unwrap();
        assert_eq!(k.coeff(0), c(1.0, 0.0));
        assert!(k.coeffs()[1..].iter().all(|x| *x == ZERO));
        let d = KernelFamily::new(SpaceSpec::Hardy, KernelKind::Derivative, ZERO);
        assert_eq!(d.unnormalized_norm_sq(), 1.0);
        let b = SpaceSpec::bergman(0.0).unwrap();
        let h0 = kernel_coeffs(&KernelFamily::new(b, KernelKind::Standard, ZERO), 4).unwrap();
        assert!((h0.coeff(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((inner_product(b, &PowerSeries::constant(c(1.0, 0.0), 4), &h0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(kernel_coeffs(&KernelFamily::new(b, KernelKind::Standard, c(1.0, 0.0)), 4).is_err());
    }

    #[test]
    fn closed_form_kernel_norms_match_truncated_sums() {
        for space in [SpaceSpec::Hardy, SpaceSpec::bergman(0.0).unwrap(), SpaceSpec::bergman(1.5).unwrap()] {
            for kind in [KernelKind::Standard, KernelKind::Derivative] {
                let fam = KernelFamily::new(space, kind, c(0.3, -0.5));
                let k = kernel_coeffs(&fam, 400).unwrap();
                let got = norm_sq(space, &k);
                let want = fam.unnormalized_norm_sq();
                assert!((got - want).abs() < 1e-10 * want, "{space:?} {kind:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn normalized_kernels_have_unit_norm() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for space in [SpaceSpec::Hardy, SpaceSpec::bergman(0.0).unwrap(), SpaceSpec::bergman(2.0).unwrap()] {
            for kind in [KernelKind::Normalized, KernelKind::NormalizedDerivative] {
                for _ in 0..10 {
                    let w = C64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..6.3));
                    let k = kernel_coeffs(&KernelFamily::new(space, kind, w), 2000).unwrap();
                    assert!((norm(space, &k) - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn reproducing_property() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for space in [SpaceSpec::Hardy, SpaceSpec::bergman(0.0).unwrap(), SpaceSpec::bergman(0.5).unwrap()] {
            for _ in 0..20 {
                let f = random_poly(&mut rng, 12);
                let w = C64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..6.3));
                let k = kernel_coeffs(&KernelFamily::new(space, KernelKind::Standard, w), 12).unwrap();
                let err = (inner_product(space, &f, &k) - f.eval(w)).norm();
                assert!(err <= 1e-10 * norm(space, &f));
                let dk = kernel_coeffs(&KernelFamily::new(space, KernelKind::Derivative, w), 12).unwrap();
                let err = (inner_product(space, &f, &dk) - f.derivative().eval(w)).norm();
                assert!(err <= 1e-10 * norm(space, &f).max(1.0) * 10.0);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let h = PowerSeries::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let p = kphi_project(&h, &FunctionSpec::monomial(2), 8).unwrap();
        for k in 0..=8 {
            let want = if k < 2 { 1.0 } else { 0.0 };
            assert!((p.coeff(k) - c(want, 0.0)).norm() < 1e-14, "k={k}");
        }
        let one = PowerSeries::constant(c(1.0, 0.0), 0);
        let p = kphi_project(&one, &FunctionSpec::identity(), 4).unwrap();
        assert!((p.coeff(0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(kphi_project(&one, &FunctionSpec::dilation(0.5), 4).is_err());
    }

    /// Gram–Schmidt oracle: subtract from `h` its component along span{φzᵏ}.
    #[test]
    fn projection_matches_gram_schmidt() {
        let n = 512;
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let phi = FunctionSpec::Blaschke(InnerFunctionData::blaschke(1, &[c(0.5, 0.0)]));
        let phis = phi.exact_coefficients(n).unwrap().unwrap();
        let h = random_poly(&mut rng, 8).resized(n);
        let mut basis: Vec<PowerSeries> = Vec::new();
        for k in 0..=32 {
            let mut shifted = vec![ZERO; n + 1];
            shifted[k..].copy_from_slice(&phis.coeffs()[..=n - k]);
            let mut v = PowerSeries::new(shifted).unwrap();
            for u in &basis {
                v = v.add(&u.scale(-inner_product(SpaceSpec::Hardy, &v, u)));
            }
            let nv = norm(SpaceSpec::Hardy, &v);
            basis.push(v.scale(c(1.0 / nv, 0.0)));
        }
        let mut want = h.clone();
        for u in &basis {
            want = want.add(&u.scale(-inner_product(SpaceSpec::Hardy, &h, u)));
        }
        let p = kphi_project(&h, &phi, n).unwrap();
        let diff = p.add(&want.scale(c(-1.0, 0.0)));
        assert!(norm(SpaceSpec::Hardy, &diff) < 1e-10, "{}", norm(SpaceSpec::Hardy, &diff));
        for u in basis.iter().take(257) {
            assert!(inner_product(SpaceSpec::Hardy, &p, u).norm() < 1e-7);
        }
    }

    #[test]
    fn projection_is_idempotent_and_contractive() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let phi = FunctionSpec::Blaschke(InnerFunctionData::blaschke(2, &[c(0.5, 0.2), c(-0.3, 0.6)]));
        for _ in 0..5 {
            let h = random_poly(&mut rng, 10);
            let p = kphi_project(&h, &phi, 64).unwrap();
            let pp = kphi_project(&p, &phi, 64).unwrap();
            let diff = p.add(&pp.scale(c(-1.0, 0.0)));
            assert!(norm(SpaceSpec::Hardy, &diff) < 1e-8);
            assert!(norm(SpaceSpec::Hardy, &p) <= norm(SpaceSpec::Hardy, &h) + 1e-12);
            let s = kphi_project_sampled(&h, &phi, 64).unwrap();
            let diff = p.add(&s.scale(c(-1.0, 0.0)));
            assert!(norm(SpaceSpec::Hardy, &diff) < 1e-12);
        }
    }

    #[test]
    fn projection_with_singular_symbol() {
        // 1 − φ(0)‾φ reproduces P_{K_φ}1 for any inner φ.
        let phi = FunctionSpec::ExpOfMoebius;
        let n = 64;
        let one = PowerSeries::constant(c(1.0, 0.0), n);
        let p = kphi_project(&one, &phi, n).unwrap();
        let phis = phi.exact_coefficients(n).unwrap().unwrap();
        let want = one.add(&phis.scale(-phis.coeff(0).conj()));
        for k in 0..=16 {
            assert!((p.coeff(k) - want.coeff(k)).norm() < 1e-13, "k={k}: {} vs {}", p.coeff(k), want.coeff(k));
        }
    }
}
