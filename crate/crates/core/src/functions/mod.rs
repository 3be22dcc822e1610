//! The function zoo: weights, symbols and test functions on the disc.
//!
//! Every [`FunctionSpec`] evaluates in closed form where one exists, knows
//! its derivative, and expands exactly into a power series when a recurrence
//! is available.

mod cplx;
mod inner;
mod json;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

pub use cplx::Cplx;
pub use inner::{Atom, InnerFunctionData, SpectrumSet, ZeroGenerator};
pub use json::{emit_spec, parse_spec, parse_symbol};

use crate::error::{Error, Result};
use crate::series::{circle_midpoints, compose, multiply, PowerSeries, C64, ONE, ZERO};

/// Points with `|z| > 1 + BOUNDARY_SLACK` are outside the closed disc.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Number of boundary midpoints used by the self-map gate.
pub const GATE_SAMPLES: usize = 4096;
/// Largest boundary modulus accepted by the self-map gate.
pub const GATE_TOLERANCE: f64 = 1.0 + 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// Truncated Taylor series; evaluates as its polynomial.
    Series {
        #[serde(with = "cplx::pairs")]
        coeffs: PowerSeries,
    },
    /// `zⁿ`.
    MonomialPower { n: u32 },
    Blaschke(InnerFunctionData),
    SingularInner { atoms: Vec<Atom> },
    /// `(a − z)/(1 − āz)`.
    Automorphism { a: Cplx },
    /// `(1 − z)^{−β}`, principal branch.
    FracPower { beta: f64 },
    /// `add + scale·inner`.
    Affine { add: Cplx, scale: Cplx, inner: Box<FunctionSpec> },
    Product { parts: Vec<FunctionSpec> },
    /// `parts[0] ∘ parts[1] ∘ …`.
    Composition { parts: Vec<FunctionSpec> },
    /// `exp(−(1 + z)/(1 − z))`.
    ExpOfMoebius,
    /// `1 − √(1 − z)`.
    Icecream,
}

impl FunctionSpec {
    pub fn constant(c: impl Into<C64>) -> Self {
        Self::affine(c.into(), ZERO, Self::identity())
    }

    pub fn identity() -> Self {
        Self::MonomialPower { n: 1 }
    }

    pub fn monomial(n: u32) -> Self {
        Self::MonomialPower { n }
    }

    pub fn frac_power(beta: f64) -> Self {
        Self::FracPower { beta }
    }

    pub fn automorphism(a: C64) -> Self {
        Self::Automorphism { a: Cplx(a) }
    }

    pub fn affine(add: C64, scale: C64, inner: FunctionSpec) -> Self {
        Self::Affine { add: Cplx(add), scale: Cplx(scale), inner: Box::new(inner) }
    }

    /// `s·z`.
    pub fn dilation(s: f64) -> Self {
        Self::affine(ZERO, C64::new(s, 0.0), Self::identity())
    }

    pub fn series(coeffs: PowerSeries) -> Self {
        Self::Series { coeffs }
    }

    pub fn product(parts: Vec<FunctionSpec>) -> Self {
        Self::Product { parts }
    }

    pub fn composition(parts: Vec<FunctionSpec>) -> Self {
        Self::Composition { parts }
    }

    /// Structural checks: moduli of zeros, positivity of masses, finiteness.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Series { coeffs } => {
                if coeffs.coeffs().iter().any(|c| !c.is_finite()) {
                    return Err(Error::Spec("series coefficients must be finite".into()));
                }
            }
            Self::MonomialPower { .. } | Self::ExpOfMoebius | Self::Icecream => {}
            Self::Blaschke(d) => d.validate()?,
            Self::SingularInner { atoms } => InnerFunctionData::singular(atoms.clone()).validate()?,
            Self::Automorphism { a } => {
                if !(a.0.norm() < 1.0) {
                    return Err(Error::Spec(format!("automorphism needs |a| < 1, got {}", a.0.norm())));
                }
            }
            Self::FracPower { beta } => {
                if !beta.is_finite() {
                    return Err(Error::Spec("frac_power beta must be finite".into()));
                }
            }
            Self::Affine { add, scale, inner } => {
                if !(add.0.is_finite() && scale.0.is_finite()) {
                    return Err(Error::Spec("affine coefficients must be finite".into()));
                }
                inner.validate()?;
            }
            Self::Product { parts } | Self::Composition { parts } => {
                if parts.is_empty() {
                    return Err(Error::Spec("product/composition needs at least one part".into()));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Value at `z` in the closed disc.
    pub fn eval(&self, z: C64) -> Result<C64> {
        self.eval_impl(z, false)
    }

    /// Like [`eval`](Self::eval) but evaluates series variants as polynomials on
    /// the circle too.
    pub(crate) fn eval_polynomial_ok(&self, z: C64) -> Result<C64> {
        self.eval_impl(z, true)
    }

    fn eval_impl(&self, z: C64, series_on_boundary: bool) -> Result<C64> {
        let r = z.norm();
        if !(r <= 1.0 + BOUNDARY_SLACK) {
            return Err(Error::Domain(format!("|z| = {r} is outside the closed unit disc")));
        }
        let on_boundary = r >= 1.0 - BOUNDARY_SLACK;
        Ok(match self {
            Self::Series { coeffs } => {
                if on_boundary && !series_on_boundary {
                    return Err(Error::Unsupported(
                        "boundary evaluation of a pure series has no closed form".into(),
                    ));
                }
                coeffs.eval(z)
            }
            Self::MonomialPower { n } => z.powu(*n),
            Self::Blaschke(d) => d.eval_closed(z),
            Self::SingularInner { atoms } => InnerFunctionData::singular(atoms.clone()).eval_closed(z),
            Self::Automorphism { a } => (a.0 - z) / (ONE - a.0.conj() * z),
            Self::FracPower { beta } => {
                let w = ONE - z;
                if w == ZERO {
                    return if *beta > 0.0 {
                        Err(Error::Domain("(1 − z)^{−β} is singular at z = 1".into()))
                    } else if *beta == 0.0 {
                        Ok(ONE)
                    } else {
                        Ok(ZERO)
                    };
                }
                (-*beta * w.ln()).exp()
            }
            Self::Affine { add, scale, inner } => add.0 + scale.0 * inner.eval_impl(z, series_on_boundary)?,
            Self::Product { parts } => {
                let mut v = ONE;
                for p in parts {
                    v *= p.eval_impl(z, series_on_boundary)?;
                }
                v
            }
            Self::Composition { parts } => {
                let mut v = z;
                for p in parts.iter().rev() {
                    v = p.eval_impl(v, series_on_boundary)?;
                }
                v
            }
            Self::ExpOfMoebius => {
                let w = ONE - z;
                if w.norm() < 1e-300 {
                    // Radial limit at the atom.
                    return Ok(ZERO);
                }
                (-(ONE + z) / w).exp()
            }
            Self::Icecream => ONE - (ONE - z).sqrt(),
        })
    }

    /// `f′(z)` by exact differentiation rules.
    pub fn derivative_eval(&self, z: C64) -> Result<C64> {
        let r = z.norm();
        if !(r <= 1.0 + BOUNDARY_SLACK) {
            return Err(Error::Domain(format!("|z| = {r} is outside the closed unit disc")));
        }
        let on_boundary = r >= 1.0 - BOUNDARY_SLACK;
        let at_one = |name: &str| {
            if (ONE - z).norm() == 0.0 {
                Err(Error::Domain(format!("{name} has no derivative at z = 1")))
            } else {
                Ok(())
            }
        };
        Ok(match self {
            Self::Series { coeffs } => {
                if on_boundary {
                    return Err(Error::Unsupported(
                        "boundary derivative of a pure series has no closed form".into(),
                    ));
                }
                coeffs.derivative().eval(z)
            }
            Self::MonomialPower { n } => match n {
                0 => ZERO,
                _ => z.powu(n - 1) * *n as f64,
            },
            Self::Blaschke(d) => d.derivative(z),
            Self::SingularInner { atoms } => InnerFunctionData::singular(atoms.clone()).derivative(z),
            Self::Automorphism { a } => {
                let d = ONE - a.0.conj() * z;
                (a.0.norm_sqr() - 1.0) / (d * d)
            }
            Self::FracPower { beta } => {
                if *beta == 0.0 {
                    return Ok(ZERO);
                }
                at_one("(1 − z)^{−β}")?;
                *beta * (-(*beta + 1.0) * (ONE - z).ln()).exp()
            }
            Self::Affine { scale, inner, .. } => scale.0 * inner.derivative_eval(z)?,
            Self::Product { parts } => {
                let vals = parts.iter().map(|p| p.eval(z)).collect::<Result<Vec<_>>>()?;
                let mut prefix = vec![ONE; parts.len() + 1];
                for i in 0..parts.len() {
                    prefix[i + 1] = prefix[i] * vals[i];
                }
                let mut suffix = ONE;
                let mut out = ZERO;
                for i in (0..parts.len()).rev() {
                    out += parts[i].derivative_eval(z)? * prefix[i] * suffix;
                    suffix *= vals[i];
                }
                out
            }
            Self::Composition { parts } => {
                let mut v = z;
                let mut d = ONE;
                for p in parts.iter().rev() {
                    d *= p.derivative_eval(v)?;
                    v = p.eval(v)?;
                }
                d
            }
            Self::ExpOfMoebius => {
                at_one("exp(−(1 + z)/(1 − z))")?;
                let w = ONE - z;
                -2.0 / (w * w) * (-(ONE + z) / w).exp()
            }
            Self::Icecream => {
                at_one("1 − √(1 − z)")?;
                0.5 / (ONE - z).sqrt()
            }
        })
    }

    /// Exact coefficients `a_0..a_N` when a recurrence is known, `None` otherwise.
    pub fn exact_coefficients(&self, order: usize) -> Result<Option<PowerSeries>> {
        Ok(match self {
            Self::Series { coeffs } => Some(coeffs.resized(order)),
            Self::MonomialPower { n } => Some(PowerSeries::monomial(*n as usize, order)),
            Self::Blaschke(d) => Some(d.coefficients(order)),
            Self::SingularInner { atoms } => Some(InnerFunctionData::singular(atoms.clone()).coefficients(order)),
            Self::Automorphism { a } => Some(automorphism_series(a.0, order)),
            Self::FracPower { beta } => Some(PowerSeries::from_vec(binomial_series(*beta, order))),
            Self::Affine { add, scale, inner } => inner
                .exact_coefficients(order)?
                .map(|g| g.scale(scale.0).add(&PowerSeries::constant(add.0, order))),
            Self::Product { parts } => {
                let mut acc = PowerSeries::constant(ONE, order);
                for p in parts {
                    match p.exact_coefficients(order)? {
                        Some(s) => acc = multiply(&acc, &s),
                        None => return Ok(None),
                    }
                }
                Some(acc)
            }
            Self::Composition { parts } => {
                let (last, outer) = parts.split_last().expect("validated non-empty");
                let Some(mut cur) = last.exact_coefficients(order)? else {
                    return Ok(None);
                };
                for p in outer.iter().rev() {
                    if cur.coeff(0) != ZERO {
                        return Ok(None);
                    }
                    let Some(f) = p.exact_coefficients(order)? else {
                        return Ok(None);
                    };
                    cur = compose(&f, &cur)?.series;
                }
                Some(cur)
            }
            Self::ExpOfMoebius => Some(inner::atom_series(&Atom { angle: 0.0, mass: 1.0 }, order)),
            Self::Icecream => {
                let mut c = binomial_series(-0.5, order);
                for x in c.iter_mut() {
                    *x = -*x;
                }
                c[0] += ONE;
                Some(PowerSeries::from_vec(c))
            }
        })
    }

    /// Angles in `[0, 2π)` where the function or its derivative fails to extend
    /// continuously to the circle.
    pub fn boundary_singular_angles(&self) -> Vec<f64> {
        let out = match self {
            Self::Series { .. } | Self::MonomialPower { .. } | Self::Automorphism { .. } => vec![],
            Self::Blaschke(d) => d.spectrum().boundary_angles,
            Self::SingularInner { atoms } => atoms.iter().map(|a| a.angle).collect(),
            Self::FracPower { beta } => {
                if *beta <= 0.0 && beta.fract() == 0.0 {
                    vec![]
                } else {
                    vec![0.0]
                }
            }
            Self::ExpOfMoebius | Self::Icecream => vec![0.0],
            Self::Affine { inner, .. } => inner.boundary_singular_angles(),
            Self::Product { parts } => parts.iter().flat_map(|p| p.boundary_singular_angles()).collect(),
            Self::Composition { parts } => composition_singular_angles(parts),
        };
        merge_angles(out, 1e-3)
    }

    /// Whether the function has closed-form boundary values (no pure series inside).
    pub fn has_boundary_values(&self) -> bool {
        match self {
            Self::Series { .. } => false,
            Self::Affine { inner, .. } => inner.has_boundary_values(),
            Self::Product { parts } | Self::Composition { parts } => parts.iter().all(|p| p.has_boundary_values()),
            _ => true,
        }
    }

    /// Canonical inner data when the spec is an inner function in closed form.
    pub fn inner_data(&self) -> Option<InnerFunctionData> {
        match self {
            Self::Blaschke(d) => Some(d.clone()),
            Self::SingularInner { atoms } => Some(InnerFunctionData::singular(atoms.clone())),
            Self::MonomialPower { n } => Some(InnerFunctionData::blaschke(*n, &[])),
            Self::ExpOfMoebius => Some(InnerFunctionData::singular(vec![Atom { angle: 0.0, mass: 1.0 }])),
            Self::Automorphism { a } => {
                if a.0 == ZERO {
                    // −z
                    let mut d = InnerFunctionData::blaschke(1, &[]);
                    d.rotation = PI;
                    Some(d)
                } else {
                    // (a − z)/(1 − āz) = (a/|a|)·(|a|/a)(a − z)/(1 − āz)
                    let mut d = InnerFunctionData::blaschke(0, &[a.0]);
                    d.rotation = a.0.arg();
                    Some(d)
                }
            }
            _ => None,
        }
    }

    /// Largest `|φ|` over [`GATE_SAMPLES`] boundary midpoints.
    pub fn boundary_max_modulus(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for z in circle_midpoints(1.0, GATE_SAMPLES) {
            let v = self.eval_polynomial_ok(z)?.norm();
            if !v.is_finite() {
                return Ok(f64::INFINITY);
            }
            m = m.max(v);
        }
        Ok(m)
    }

    /// Accepts the spec as a symbol only if `|φ| ≤ 1` on the boundary sample.
    pub fn self_map_gate(&self) -> Result<f64> {
        let m = match self.boundary_max_modulus() {
            Ok(m) => m,
            // A composition whose inner map leaves the disc is not a self-map.
            Err(Error::Domain(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if m <= GATE_TOLERANCE {
            Ok(m)
        } else {
            Err(Error::SelfMapGate { max_modulus: m })
        }
    }

    /// Whether boundary values have modulus 1 within `tol` on the gate sample.
    pub fn is_inner(&self, tol: f64) -> bool {
        if !self.has_boundary_values() {
            return false;
        }
        circle_midpoints(1.0, GATE_SAMPLES)
            .into_iter()
            .all(|z| self.eval(z).map(|v| (v.norm() - 1.0).abs() <= tol).unwrap_or(false))
    }
}

/// `(a − z)/(1 − āz)`: `a`, then `āⁿ⁻¹(|a|² − 1)`.
fn automorphism_series(a: C64, order: usize) -> PowerSeries {
    let mut c = vec![ZERO; order + 1];
    c[0] = a;
    let ab = a.conj();
    let k = a.norm_sqr() - 1.0;
    let mut p = ONE;
    for cn in c.iter_mut().skip(1) {
        *cn = p * k;
        p *= ab;
    }
    PowerSeries::from_vec(c)
}

/// Coefficients of `(1 − z)^{−β}`: `c_n = c_{n−1}(n − 1 + β)/n`.
fn binomial_series(beta: f64, order: usize) -> Vec<C64> {
    let mut c = vec![ZERO; order + 1];
    c[0] = ONE;
    let mut prev = 1.0;
    for (n, cn) in c.iter_mut().enumerate().skip(1) {
        prev *= (n as f64 - 1.0 + beta) / n as f64;
        *cn = C64::new(prev, 0.0);
    }
    c
}

/// Reduces angles to `[0, 2π)` and merges those closer than `tol` on the circle.
fn merge_angles(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    for a in v.iter_mut() {
        *a = a.rem_euclid(TAU);
    }
    v.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for a in v {
        match clusters.last_mut() {
            Some(c) if a - c[c.len() - 1] < tol => c.push(a),
            _ => clusters.push(vec![a]),
        }
    }
    if clusters.len() > 1 {
        let first = clusters[0][0];
        let last = *clusters[clusters.len() - 1].last().expect("non-empty");
        if first + TAU - last < tol {
            let tail = clusters.pop().expect("non-empty");
            clusters[0].extend(tail.into_iter().map(|a| a - TAU));
        }
    }
    let mut out: Vec<f64> =
        clusters.into_iter().map(|c| (c.iter().sum::<f64>() / c.len() as f64).rem_euclid(TAU)).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Singular angles of the innermost part plus boundary preimages of the outer
/// parts' singular points, located by a scan of the inner composite.
fn composition_singular_angles(parts: &[FunctionSpec]) -> Vec<f64> {
    let (last, outer) = parts.split_last().expect("validated non-empty");
    let mut out = last.boundary_singular_angles();
    let pts = circle_midpoints(1.0, GATE_SAMPLES);
    for k in (0..outer.len()).rev() {
        let targets = outer[k].boundary_singular_angles();
        if targets.is_empty() {
            continue;
        }
        let inner = FunctionSpec::Composition { parts: parts[k + 1..].to_vec() };
        let vals: Vec<Option<C64>> = pts.iter().map(|&z| inner.eval_polynomial_ok(z).ok()).collect();
        for t in targets {
            let zeta = C64::from_polar(1.0, t);
            let d: Vec<f64> = vals.iter().map(|v| v.map_or(f64::INFINITY, |v| (v - zeta).norm())).collect();
            let n = d.len();
            for i in 0..n {
                let (l, r) = (d[(i + n - 1) % n], d[(i + 1) % n]);
                if d[i] < 1e-2 && d[i] <= l && d[i] <= r {
                    // Parabolic refinement of d² across the three samples.
                    let (a, b, c) = (l * l, d[i] * d[i], r * r);
                    let curv = a - 2.0 * b + c;
                    let off = if curv > 0.0 { (0.5 * (a - c) / curv).clamp(-0.5, 0.5) } else { 0.0 };
                    out.push(pts[i].arg() + off * TAU / n as f64);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn zoo() -> Vec<FunctionSpec> {
        vec![
            FunctionSpec::monomial(3),
            FunctionSpec::frac_power(0.375),
            FunctionSpec::frac_power(-0.1),
            FunctionSpec::Icecream,
            FunctionSpec::ExpOfMoebius,
            FunctionSpec::automorphism(c(0.3, -0.4)),
            FunctionSpec::Blaschke(InnerFunctionData::blaschke(1, &[c(0.5, 0.0)])),
            FunctionSpec::SingularInner { atoms: vec![Atom { angle: 2.0, mass: 0.7 }] },
            FunctionSpec::affine(ONE, c(0.5, 0.0), FunctionSpec::identity()),
            FunctionSpec::product(vec![FunctionSpec::frac_power(0.25), FunctionSpec::automorphism(c(0.0, 0.5))]),
            FunctionSpec::composition(vec![FunctionSpec::frac_power(0.25), FunctionSpec::Icecream]),
            FunctionSpec::series(PowerSeries::from_real(&[1.0, 0.5, 0.25, 0.125]).unwrap()),
        ]
    }

    #[test]
    fn eval_examples() {
        let g = FunctionSpec::series(PowerSeries::from_real(&[1.0, 0.5, 0.25, 0.125]).unwrap());
        assert_eq!(g.eval(ZERO).unwrap(), ONE);
        assert_eq!(FunctionSpec::Icecream.eval(ZERO).unwrap(), ZERO);
        let v = FunctionSpec::frac_power(0.5).eval(c(0.5, 0.0)).unwrap();
        assert!((v.re - 2f64.sqrt()).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn eval_errors() {
        assert!(matches!(FunctionSpec::Icecream.eval(c(1.0, 0.1)), Err(Error::Domain(_))));
        let g = FunctionSpec::series(PowerSeries::from_real(&[1.0, 2.0]).unwrap());
        assert!(matches!(g.eval(c(0.0, 1.0)), Err(Error::Unsupported(_))));
        assert!(FunctionSpec::frac_power(0.5).eval(ONE).is_err());
        assert_eq!(FunctionSpec::ExpOfMoebius.eval(ONE).unwrap(), ZERO);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(FunctionSpec::monomial(2).derivative_eval(ONE).unwrap(), c(2.0, 0.0));
        assert!((FunctionSpec::Icecream.derivative_eval(ZERO).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        let d = FunctionSpec::ExpOfMoebius.derivative_eval(ZERO).unwrap();
        assert!((d.re + 2.0 * (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_differences() {
        let h = 1e-6;
        for f in zoo() {
            for &z in &[c(0.2, 0.3), c(-0.5, 0.1), c(0.6, -0.6), c(0.0, 0.0)] {
                let fd = (f.eval(z + h).unwrap() - f.eval(z - h).unwrap()) / (2.0 * h);
                let d = f.derivative_eval(z).unwrap();
                assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0), "{f:?} at {z}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn exact_coefficients_match_values() {
        for f in zoo() {
            let s = f.exact_coefficients(600).unwrap().expect("exact");
            for &z in &[c(0.3, 0.2), c(-0.4, 0.1)] {
                assert!((s.eval(z) - f.eval(z).unwrap()).norm() < 1e-10, "{f:?}");
            }
        }
    }

    #[test]
    fn binomial_examples() {
        let s = FunctionSpec::Icecream.exact_coefficients(3).unwrap().unwrap();
        let want = [0.0, 0.5, 0.125, 0.0625];
        for (k, w) in want.iter().enumerate() {
            assert!((s.coeff(k).re - w).abs() < 1e-16);
        }
        let s = FunctionSpec::frac_power(0.5).exact_coefficients(2).unwrap().unwrap();
        assert_eq!(s.coeff(2).re, 0.375);
    }

    #[test]
    fn sampled_coefficients_agree_with_exact() {
        let f = FunctionSpec::composition(vec![
            FunctionSpec::automorphism(c(0.2, 0.1)),
            FunctionSpec::affine(c(0.1, 0.0), c(0.5, 0.0), FunctionSpec::identity()),
        ]);
        // inner constant term is nonzero, so the exact path declines
        assert!(f.exact_coefficients(32).unwrap().is_none());
        let s = crate::series::taylor_coefficients(&f, 32, crate::series::default_radius(32)).unwrap();
        for &z in &[c(0.3, 0.2), c(-0.4, 0.1)] {
            assert!((s.eval(z) - f.eval(z).unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn singular_angles() {
        assert_eq!(FunctionSpec::frac_power(0.375).boundary_singular_angles(), vec![0.0]);
        assert!(FunctionSpec::frac_power(-2.0).boundary_singular_angles().is_empty());
        let f = FunctionSpec::composition(vec![FunctionSpec::frac_power(0.25), FunctionSpec::Icecream]);
        assert_eq!(f.boundary_singular_angles(), vec![0.0]);
        let g = FunctionSpec::composition(vec![FunctionSpec::Icecream, FunctionSpec::monomial(2)]);
        let a = g.boundary_singular_angles();
        assert_eq!(a.len(), 2, "{a:?}");
        assert!((a[1] - PI).abs() < 1e-3, "{a:?}");
    }

    #[test]
    fn ice_cream_collapses_only_with_the_weight() {
        let binomial = |beta: f64, n: usize| (1..=n).fold(1.0, |acc, k| acc * (k as f64 - 1.0 + beta) / k as f64);
        let order = 200;
        let f = FunctionSpec::frac_power(0.25).exact_coefficients(order).unwrap().unwrap();
        let phi = FunctionSpec::Icecream.exact_coefficients(order).unwrap().unwrap();
        let composed = compose(&f, &phi).unwrap().series;
        let h = FunctionSpec::frac_power(0.375).exact_coefficients(order).unwrap().unwrap();
        let weighted = multiply(&h, &composed);
        for n in 0..=order {
            assert!((composed.coeff(n) - c(binomial(0.125, n), 0.0)).norm() < 1e-12, "n = {n}");
            assert!((weighted.coeff(n) - c(binomial(0.5, n), 0.0)).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn gate() {
        assert!(FunctionSpec::Icecream.self_map_gate().is_ok());
        assert!(FunctionSpec::ExpOfMoebius.self_map_gate().is_ok());
        let bad = FunctionSpec::affine(c(0.5, 0.0), c(0.6, 0.0), FunctionSpec::identity());
        match bad.self_map_gate() {
            Err(Error::SelfMapGate { max_modulus }) => assert!((max_modulus - 1.1).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inner_detection() {
        assert!(FunctionSpec::ExpOfMoebius.is_inner(1e-9));
        assert!(FunctionSpec::Blaschke(InnerFunctionData::blaschke(1, &[c(0.5, 0.0)])).is_inner(1e-9));
        assert!(!FunctionSpec::dilation(0.5).is_inner(1e-9));
    }

    #[test]
    fn inner_data_of_automorphism() {
        let a = c(0.3, -0.4);
        let d = FunctionSpec::automorphism(a).inner_data().unwrap();
        let z = c(0.1, 0.2);
        assert!((d.inner_eval(z).unwrap() - FunctionSpec::automorphism(a).eval(z).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn inner_modulus_on_radial_grid() {
        let d = InnerFunctionData {
            rotation: 0.3,
            vanishing_order: 1,
            zeros: vec![Cplx(c(0.9, 0.0)), Cplx(c(0.0, -0.5))],
            atoms: vec![Atom { angle: 1.0, mass: 0.5 }],
            generator: None,
        };
        for r in [0.0, 0.5, 0.9, 0.99, 0.999] {
            for k in 0..64 {
                let z = C64::from_polar(r, TAU * k as f64 / 64.0);
                assert!(d.inner_eval(z).unwrap().norm() < 1.0 + 1e-12);
            }
        }
    }
}
