//! Inner functions in canonical form: rotation, zero at the origin,
//! Blaschke factors and a finite atomic singular factor.

use serde::{Deserialize, Serialize};

use super::cplx::Cplx;
use crate::error::{Error, Result};
use crate::series::{multiply, PowerSeries, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Position `ζ = e^{i·angle}` on the unit circle.
    pub angle: f64,
    pub mass: f64,
}

impl Atom {
    pub fn point(&self) -> C64 {
        C64::from_polar(1.0, self.angle)
    }
}

/// Finite stand-in for an infinite zero sequence: `a_n = (1 − c·qⁿ)·e^{i·angle}`
/// for `n = 1..=count`, accumulating at `e^{i·angle}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroGenerator {
    pub angle: f64,
    pub c: f64,
    pub q: f64,
    pub count: u32,
}

impl ZeroGenerator {
    pub fn zeros(&self) -> impl Iterator<Item = C64> + '_ {
        (1..=self.count).map(move |n| C64::from_polar(1.0 - self.c * self.q.powi(n as i32), self.angle))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerFunctionData {
    #[serde(default)]
    pub rotation: f64,
    #[serde(default)]
    pub vanishing_order: u32,
    #[serde(default)]
    pub zeros: Vec<Cplx>,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<ZeroGenerator>,
}

/// `σ(φ)` for finite data: the zeros plus the boundary angles where zeros
/// accumulate or atoms sit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSet {
    pub boundary_angles: Vec<f64>,
    pub zeros: Vec<Cplx>,
}

impl InnerFunctionData {
    pub fn rotation(alpha: f64) -> Self {
        Self { rotation: alpha, vanishing_order: 0, zeros: vec![], atoms: vec![], generator: None }
    }

    pub fn blaschke(vanishing_order: u32, zeros: &[C64]) -> Self {
        Self {
            rotation: 0.0,
            vanishing_order,
            zeros: zeros.iter().map(|&z| Cplx(z)).collect(),
            atoms: vec![],
            generator: None,
        }
    }

    pub fn singular(atoms: Vec<Atom>) -> Self {
        Self { rotation: 0.0, vanishing_order: 0, zeros: vec![], atoms, generator: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rotation.is_finite() {
            return Err(Error::Spec("rotation must be finite".into()));
        }
        for a in self.all_zeros() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::Spec("zero is not finite".into()));
            }
            if a.norm() >= 1.0 {
                return Err(Error::Spec(format!("zero {a} has modulus {} ≥ 1", a.norm())));
            }
            if a.norm() == 0.0 {
                return Err(Error::Spec("zeros at the origin belong in vanishing_order".into()));
            }
        }
        for at in &self.atoms {
            if !(at.mass > 0.0 && at.mass.is_finite()) {
                return Err(Error::Spec(format!("atom mass must be positive, got {}", at.mass)));
            }
            if !at.angle.is_finite() {
                return Err(Error::Spec("atom angle must be finite".into()));
            }
        }
        if let Some(g) = &self.generator {
            if !(g.q > 0.0 && g.q < 1.0 && g.c > 0.0) {
                return Err(Error::Spec("generator needs c > 0 and 0 < q < 1".into()));
            }
        }
        Ok(())
    }

    /// Explicit zeros followed by generated ones.
    pub fn all_zeros(&self) -> Vec<C64> {
        let mut z: Vec<C64> = self.zeros.iter().map(|c| c.0).collect();
        if let Some(g) = &self.generator {
            z.extend(g.zeros());
        }
        z
    }

    pub fn spectrum(&self) -> SpectrumSet {
        let mut boundary_angles: Vec<f64> = self.atoms.iter().map(|a| a.angle).collect();
        if let Some(g) = &self.generator {
            boundary_angles.push(g.angle);
        }
        boundary_angles.sort_by(f64::total_cmp);
        boundary_angles.dedup();
        SpectrumSet { boundary_angles, zeros: self.all_zeros().into_iter().map(Cplx).collect() }
    }

    /// Product formula at an interior point.
    pub fn inner_eval(&self, z: C64) -> Result<C64> {
        if z.norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "inner_eval needs |z| < 1, got |z| = {}; use boundary samples instead",
                z.norm()
            )));
        }
        Ok(self.eval_closed(z))
    }

    /// Closed-form value on the closed disc; the radial limit 0 is returned at an atom.
    pub(crate) fn eval_closed(&self, z: C64) -> C64 {
        self.factors(z).into_iter().map(|(v, _)| v).product()
    }

    pub(crate) fn derivative(&self, z: C64) -> C64 {
        let f = self.factors(z);
        // Σ f_i' Π_{j≠i} f_j, with prefix/suffix products so zeros of φ are harmless.
        let n = f.len();
        let mut prefix = vec![ONE; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] * f[i].0;
        }
        let mut suffix = ONE;
        let mut out = ZERO;
        for i in (0..n).rev() {
            out += f[i].1 * prefix[i] * suffix;
            suffix *= f[i].0;
        }
        out
    }

    /// (value, derivative) of each factor of the canonical product.
    fn factors(&self, z: C64) -> Vec<(C64, C64)> {
        let mut out = Vec::new();
        out.push((C64::from_polar(1.0, self.rotation), ZERO));
        let n = self.vanishing_order as i32;
        if n > 0 {
            out.push((z.powi(n), z.powi(n - 1) * n as f64));
        }
        for a in self.all_zeros() {
            let u = a.unscale(a.norm()).conj(); // |a|/a
            let den = ONE - a.conj() * z;
            out.push((u * (a - z) / den, u * (a.norm_sqr() - 1.0) / (den * den)));
        }
        if !self.atoms.is_empty() {
            let mut expo = ZERO;
            let mut dexpo = ZERO;
            for at in &self.atoms {
                let zeta = at.point();
                let d = zeta - z;
                if d.norm() < 1e-15 {
                    // Radial limit at an atom.
                    out.push((ZERO, ZERO));
                    return out;
                }
                expo -= at.mass * (zeta + z) / d;
                dexpo -= at.mass * 2.0 * zeta / (d * d);
            }
            let s = expo.exp();
            out.push((s, s * dexpo));
        }
        out
    }

    /// Exact Taylor coefficients through `order`.
    ///
    /// Blaschke factors expand geometrically; each atom `exp(−μ(ζ+z)/(ζ−z))`
    /// satisfies `(ζ−z)² g' = −2μζ g`, giving a three-term recurrence.
    pub fn coefficients(&self, order: usize) -> PowerSeries {
        let mut acc = PowerSeries::constant(C64::from_polar(1.0, self.rotation), order);
        let v = self.vanishing_order as usize;
        if v > 0 {
            acc = multiply(&acc, &PowerSeries::monomial(v, order));
        }
        for a in self.all_zeros() {
            acc = multiply(&acc, &blaschke_factor_series(a, order));
        }
        for at in &self.atoms {
            acc = multiply(&acc, &atom_series(at, order));
        }
        acc
    }
}

/// `(|a|/a)(a − z)/(1 − āz)`: coefficient 0 is `|a|`, coefficient n ≥ 1 is
/// `(|a|/a)·āⁿ⁻¹(|a|² − 1)`.
pub(crate) fn blaschke_factor_series(a: C64, order: usize) -> PowerSeries {
    let u = a.unscale(a.norm()).conj();
    let mut c = vec![ZERO; order + 1];
    c[0] = u * a;
    let ab = a.conj();
    let mut p = ONE;
    let k = a.norm_sqr() - 1.0;
    for cn in c.iter_mut().skip(1) {
        *cn = u * p * k;
        p *= ab;
    }
    PowerSeries::from_vec(c)
}

pub(crate) fn atom_series(atom: &Atom, order: usize) -> PowerSeries {
    let zeta = atom.point();
    let mu = atom.mass;
    let mut g = vec![ZERO; order + 1];
    g[0] = C64::new((-mu).exp(), 0.0);
    if order >= 1 {
        g[1] = -2.0 * mu * g[0] / zeta;
    }
    let z2 = zeta * zeta;
    for n in 1..order {
        let nf = n as f64;
        g[n + 1] = (2.0 * zeta * (nf - mu) * g[n] - (nf - 1.0) * g[n - 1]) / (z2 * (nf + 1.0));
    }
    PowerSeries::from_vec(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pure_rotation_by_pi_is_minus_one() {
        let d = InnerFunctionData::rotation(PI);
        let v = d.inner_eval(C64::new(0.3, -0.2)).unwrap();
        assert!((v + ONE).norm() < 1e-15);
    }

    #[test]
    fn single_atom_at_origin_value() {
        let d = InnerFunctionData::singular(vec![Atom { angle: 0.0, mass: 1.0 }]);
        let v = d.inner_eval(ZERO).unwrap();
        assert!((v.re - 0.3678794411714423).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn blaschke_factor_at_origin_is_modulus() {
        let d = InnerFunctionData::blaschke(0, &[C64::new(0.5, 0.0)]);
        let v = d.inner_eval(ZERO).unwrap();
        assert!((v - C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn boundary_point_is_domain_error() {
        let d = InnerFunctionData::blaschke(1, &[]);
        assert!(matches!(d.inner_eval(C64::new(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn validation_rejects_bad_data() {
        assert!(InnerFunctionData::blaschke(0, &[C64::new(1.0, 0.0)]).validate().is_err());
        assert!(InnerFunctionData::blaschke(0, &[ZERO]).validate().is_err());
        assert!(InnerFunctionData::singular(vec![Atom { angle: 0.0, mass: 0.0 }]).validate().is_err());
        assert!(InnerFunctionData::singular(vec![Atom { angle: 1.0, mass: 2.0 }]).validate().is_ok());
    }

    #[test]
    fn atom_recurrence_matches_series_exponential() {
        let at = Atom { angle: 0.7, mass: 0.8 };
        let n = 60;
        let zeta = at.point();
        // −μ(ζ+z)/(ζ−z) = −μ(1 + 2Σ_{k≥1} (z/ζ)^k)
        let mut e = vec![C64::new(-at.mass, 0.0)];
        for k in 1..=n {
            e.push(-2.0 * at.mass * zeta.powi(-(k as i32)));
        }
        let via_exp = PowerSeries::new(e).unwrap().exp().unwrap();
        let via_rec = atom_series(&at, n);
        for k in 0..=n {
            assert!((via_exp.coeff(k) - via_rec.coeff(k)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn coefficients_agree_with_closed_form() {
        let d = InnerFunctionData {
            rotation: 0.4,
            vanishing_order: 2,
            zeros: vec![Cplx(C64::new(0.5, 0.1)), Cplx(C64::new(-0.3, 0.6))],
            atoms: vec![Atom { angle: 2.0, mass: 0.3 }],
            generator: None,
        };
        let s = d.coefficients(400);
        for &z in &[C64::new(0.3, 0.2), C64::new(-0.5, 0.1), C64::new(0.0, 0.6)] {
            assert!((s.eval(z) - d.inner_eval(z).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn spectrum_collects_atoms_and_accumulation() {
        let d = InnerFunctionData {
            rotation: 0.0,
            vanishing_order: 0,
            zeros: vec![],
            atoms: vec![Atom { angle: 1.0, mass: 0.5 }],
            generator: Some(ZeroGenerator { angle: 0.0, c: 1.0, q: 0.5, count: 10 }),
        };
        let s = d.spectrum();
        assert_eq!(s.boundary_angles, vec![0.0, 1.0]);
        assert_eq!(s.zeros.len(), 10);
    }
}
