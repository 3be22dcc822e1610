//! Boundary behaviour of the symbol: Julia–Carathéodory quotients, the
//! Ahern–Clark sum of an inner function, and Carleson-box masses of the
//! pullback measure.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{boundedness_verdict, CriterionReport, DiskGrid, Profile, Thresholds, Verdict};
use crate::error::{Error, Result};
use crate::functions::{Cplx, FunctionSpec, InnerFunctionData};
use crate::quadrature::gauss_legendre_on;
use crate::series::{circle_midpoints, pairwise_sum, C64};
use crate::spaces::SpaceSpec;

/// Relative gap between the last two quotients under which the sequence is
/// treated as Cauchy.
pub const JC_CAUCHY_GAP: f64 = 0.01;

/// Radial quotients `(1 − |φ(rζ)|)/(1 − r)` at `r_i = 1 − 10^{−i}`, `i = 1..=6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProbe {
    pub zeta_angle: f64,
    pub radii: Vec<f64>,
    pub quotients: Vec<f64>,
    /// Richardson limit when the sequence is Cauchy; `None` means DIVERGENT.
    pub limit: Option<f64>,
    pub divergent: bool,
    /// `|φ′(r_6 ζ)|` when the derivative is available.
    pub derivative_modulus: Option<f64>,
}

pub fn jc_quotient_probe(phi: &FunctionSpec, zeta_angle: f64) -> Result<BoundaryProbe> {
    if !zeta_angle.is_finite() {
        return Err(Error::Parameter("probe angle must be finite".into()));
    }
    let zeta = C64::from_polar(1.0, zeta_angle);
    let radii: Vec<f64> = (1..=6).map(|i| 1.0 - 10f64.powi(-i)).collect();
    let mut quotients = Vec::with_capacity(radii.len());
    for &r in &radii {
        let v = phi.eval(zeta * r)?;
        quotients.push((1.0 - v.norm()) / (1.0 - r));
    }
    let (q5, q6) = (quotients[4], quotients[5]);
    let cauchy = q6.is_finite() && q6 != 0.0 && ((q6 - q5) / q6).abs() < JC_CAUCHY_GAP;
    // The quotient is linear in 1 − r to first order, and 1 − r shrinks tenfold per step.
    let limit = cauchy.then(|| (10.0 * q6 - q5) / 9.0);
    let derivative_modulus = phi.derivative_eval(zeta * radii[5]).ok().map(|d| d.norm()).filter(|d| d.is_finite());
    Ok(BoundaryProbe { zeta_angle, radii, quotients, divergent: limit.is_none(), limit, derivative_modulus })
}

/// Grid supremum of `(1 − |φ(w)|²)/(1 − |w|²)`. For a finite Blaschke product
/// the stabilized sup is compared with the largest `|φ′|` on the circle.
pub fn sup_jc_ratio(phi: &FunctionSpec, grid: &DiskGrid, thresholds: &Thresholds) -> Result<CriterionReport> {
    grid.validate()?;
    thresholds.validate()?;
    phi.self_map_gate()?;
    let mut profile = Profile::default();
    for level in grid.level_range() {
        let pts = grid.points(level);
        profile.begin_level(level, pts.len());
        for w in pts {
            match phi.eval(w) {
                Ok(v) => {
                    let m = v.norm();
                    profile.push(level, w, (1.0 - m) * (1.0 + m) / (1.0 - w.norm_sqr()));
                }
                Err(e) => profile.flag(level, w, e.to_string()),
            }
        }
    }
    let mut r = CriterionReport::from_profile("sup_jc_ratio", profile, *thresholds, None);
    let maxima: Vec<f64> = r.level_maxima().into_iter().map(|(_, m)| m).collect();
    r.verdict = boundedness_verdict(&maxima, thresholds);
    if let Some(d) = phi.inner_data().filter(|d| d.atoms.is_empty() && d.generator.is_none()) {
        let dmax = circle_midpoints(1.0, 4096)
            .into_iter()
            .map(|z| d.derivative(z).norm())
            .fold(0.0, f64::max);
        r.detail_f64("boundary_max_derivative", dmax);
        r.detail_f64("relative_gap", (r.sup - dmax).abs() / dmax);
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AhernClark {
    Finite { value: f64, terms: AhernClarkTerms },
    Infinite { reason: String },
}

impl AhernClark {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite { value, .. } => Some(*value),
            Self::Infinite { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AhernClarkTerms {
    pub zeros: f64,
    pub atoms: f64,
    /// `z^N` counted as `N` zeros at the origin, each contributing 1.
    pub vanishing_order: f64,
    pub tail_bound: f64,
}

/// `Σ (1 − |a_n|²)/|ζ − a_n|² + 2Σ μ_k/|ζ_k − ζ|²` over the finite data.
///
/// A zero sequence whose terms keep growing as the zeros approach `ζ` is
/// classified INFINITE: with zeros ordered by decreasing distance to `ζ`, the
/// last three terms are nondecreasing and exceed 1.
pub fn ahern_clark_sum(d: &InnerFunctionData, zeta: C64, tail_bound: Option<f64>) -> Result<AhernClark> {
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("probe point must lie on the unit circle, |ζ| = {}", zeta.norm())));
    }
    d.validate()?;
    if let Some(t) = tail_bound {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Parameter(format!("tail bound must be nonnegative, got {t}")));
        }
        if t.is_infinite() {
            return Ok(AhernClark::Infinite { reason: "tail bound is infinite".into() });
        }
    }
    if let Some(a) = d.atoms.iter().find(|a| (a.point() - zeta).norm() < 1e-12) {
        return Ok(AhernClark::Infinite { reason: format!("atom of mass {} at the probe point", a.mass) });
    }
    let mut zeros: Vec<(f64, C64)> = d.all_zeros().into_iter().map(|a| ((zeta - a).norm(), a)).collect();
    zeros.sort_by(|x, y| {
        y.0.total_cmp(&x.0).then(x.1.re.total_cmp(&y.1.re)).then(x.1.im.total_cmp(&y.1.im))
    });
    let mut terms = Vec::with_capacity(zeros.len());
    for &(dist, a) in &zeros {
        if dist == 0.0 {
            return Ok(AhernClark::Infinite { reason: "zero at the probe point".into() });
        }
        terms.push((1.0 - a.norm_sqr()) / (dist * dist));
    }
    let n = terms.len();
    if n >= 4 && terms[n - 3..].windows(2).all(|w| w[1] >= w[0]) && terms[n - 1] > 1.0 {
        return Ok(AhernClark::Infinite {
            reason: format!("partial sums grow as the zeros approach ζ (last term {:.6e})", terms[n - 1]),
        });
    }
    let mut sorted = terms.clone();
    sorted.sort_by(f64::total_cmp);
    let zero_part = pairwise_sum(&sorted);
    let mut atom_terms: Vec<f64> = d.atoms.iter().map(|a| 2.0 * a.mass / (a.point() - zeta).norm_sqr()).collect();
    atom_terms.sort_by(f64::total_cmp);
    let atom_part = pairwise_sum(&atom_terms);
    let vanishing = d.vanishing_order as f64;
    let tail = tail_bound.unwrap_or(0.0);
    let value = zero_part + atom_part + vanishing + tail;
    if !value.is_finite() {
        return Ok(AhernClark::Infinite { reason: "sum overflows".into() });
    }
    Ok(AhernClark::Finite {
        value,
        terms: AhernClarkTerms { zeros: zero_part, atoms: atom_part, vanishing_order: vanishing, tail_bound: tail },
    })
}

pub fn ahern_clark_sum_at_angle(d: &InnerFunctionData, angle: f64, tail_bound: Option<f64>) -> Result<AhernClark> {
    ahern_clark_sum(d, C64::from_polar(1.0, angle), tail_bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonEntry {
    pub delta: f64,
    pub measure: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub zeta_angle: f64,
    pub space: SpaceSpec,
    pub samples: usize,
    pub entries: Vec<CarlesonEntry>,
    pub sup_ratio: f64,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
}

/// Radial Gauss–Legendre nodes per unit of the area grid in Bergman mode.
const AREA_RADIAL_NODES: usize = 64;

/// Mass of `S(ζ, δ) = {|z − ζ| < δ}` under the pullback measure, divided by
/// `δ` (Hardy) or `δ^{2+α}` (Bergman), for each `δ` in the list.
///
/// Hardy mode averages `|h|²·1[φ ∈ S]` over `M` boundary midpoints at radius
/// `1 − 10⁻⁸`. Bergman mode integrates `|h|²·1[φ ∈ S]·(α + 1)(1 − |z|²)^α`
/// over dyadic annuli with `M` angles, against `dA/π`.
pub fn carleson_box_measure(
    h: &FunctionSpec,
    phi: &FunctionSpec,
    space: SpaceSpec,
    zeta_angle: f64,
    deltas: &[f64],
    samples: usize,
    thresholds: &Thresholds,
) -> Result<CarlesonReport> {
    if deltas.is_empty() {
        return Err(Error::Parameter("δ list is empty".into()));
    }
    if let Some(d) = deltas.iter().find(|&&d| !(d > 0.0 && d <= 2.0)) {
        return Err(Error::Parameter(format!("box size must lie in (0, 2], got {d}")));
    }
    if samples < 16 {
        return Err(Error::Parameter("at least 16 samples are needed".into()));
    }
    space.validate()?;
    phi.self_map_gate()?;
    let zeta = C64::from_polar(1.0, zeta_angle);
    // (weight, distance of φ from ζ)
    let mut cells: Vec<(f64, f64)> = Vec::new();
    match space {
        SpaceSpec::Hardy => {
            let wgt = 1.0 / samples as f64;
            for z in circle_midpoints(1.0 - 1e-8, samples) {
                let hv = h.eval(z)?;
                let pv = phi.eval(z)?;
                cells.push((wgt * hv.norm_sqr(), (pv - zeta).norm()));
            }
        }
        SpaceSpec::Bergman { alpha } => {
            let dtheta = TAU / samples as f64;
            for j in 1..=super::MAX_GRID_LEVELS {
                let (r0, r1) = (DiskGrid::radius(j - 1), DiskGrid::radius(j));
                let (nodes, weights) = gauss_legendre_on(AREA_RADIAL_NODES.min(8 + 4 * j), r0, r1);
                for (&r, &wr) in nodes.iter().zip(&weights) {
                    let base = wr * r * dtheta / std::f64::consts::PI * (alpha + 1.0) * (1.0 - r * r).powf(alpha);
                    for k in 0..samples {
                        let z = C64::from_polar(r, dtheta * (k as f64 + 0.5));
                        let hv = h.eval(z)?;
                        let pv = phi.eval(z)?;
                        cells.push((base * hv.norm_sqr(), (pv - zeta).norm()));
                    }
                }
            }
        }
    }
    let power = match space {
        SpaceSpec::Hardy => 1.0,
        SpaceSpec::Bergman { alpha } => 2.0 + alpha,
    };
    let mut entries = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let inside: Vec<f64> = cells.iter().filter(|c| c.1 < delta).map(|c| c.0).collect();
        let measure = pairwise_sum(&inside);
        entries.push(CarlesonEntry { delta, measure, ratio: measure / delta.powf(power) });
    }
    let sup_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let mut by_size = entries.clone();
    by_size.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let ratios: Vec<f64> = by_size.iter().map(|e| e.ratio).collect();
    let verdict = boundedness_verdict(&ratios, thresholds);
    Ok(CarlesonReport { zeta_angle, space, samples, entries, sup_ratio, verdict, thresholds: *thresholds })
}

impl CarlesonReport {
    /// The same data as a [`CriterionReport`], one "level" per box size.
    pub fn to_criterion_report(&self) -> CriterionReport {
        let mut profile = Profile::default();
        let zeta = Cplx(C64::from_polar(1.0, self.zeta_angle));
        let mut by_size = self.entries.clone();
        by_size.sort_by(|a, b| b.delta.total_cmp(&a.delta));
        for (i, e) in by_size.iter().enumerate() {
            profile.levels.push((i, e.delta, 1));
            profile.points.push(super::ProfilePoint { level: i, w: zeta, value: e.ratio });
        }
        let mut r = CriterionReport::from_profile("carleson_box_measure", profile, self.thresholds, None);
        r.verdict = self.verdict;
        r.detail("entries", serde_json::to_value(&self.entries).expect("entries serialize"));
        r.detail("samples", self.samples);
        r.detail("space", self.space.name());
        r.detail_f64("zeta_angle", self.zeta_angle);
        r.notes.push("levels index box sizes in decreasing order; the radius field holds δ".into());
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Atom;

    #[test]
    fn jc_trivial_symbols() {
        let p = jc_quotient_probe(&FunctionSpec::identity(), 0.0).unwrap();
        assert!(p.quotients.iter().all(|q| (q - 1.0).abs() < 1e-9));
        assert!((p.limit.unwrap() - 1.0).abs() < 1e-9);
        let p = jc_quotient_probe(&FunctionSpec::monomial(2), 0.0).unwrap();
        assert!((p.limit.unwrap() - 2.0).abs() < 1e-6);
        assert!((p.derivative_modulus.unwrap() - 2.0).abs() < 1e-5);
        assert!(p.radii.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn jc_singular_inner() {
        let phi = FunctionSpec::ExpOfMoebius;
        let p = jc_quotient_probe(&phi, 0.5).unwrap();
        let want = 2.0 / (2.0 - 2.0 * 0.5f64.cos());
        assert!((p.limit.unwrap() - want).abs() < 1e-4 * want, "{:?}", p);
        assert!(jc_quotient_probe(&phi, 0.0).unwrap().divergent);
    }

    #[test]
    fn ahern_clark_examples() {
        let d = InnerFunctionData::blaschke(0, &[C64::new(0.5, 0.0)]);
        let v = ahern_clark_sum_at_angle(&d, 0.0, None).unwrap();
        assert!((v.value().unwrap() - 3.0).abs() < 1e-14);
        let d = InnerFunctionData::singular(vec![Atom { angle: 0.0, mass: 1.0 }]);
        assert!(!ahern_clark_sum_at_angle(&d, 0.0, None).unwrap().is_finite());
        let d = InnerFunctionData::blaschke(2, &[]);
        assert_eq!(ahern_clark_sum_at_angle(&d, 1.0, None).unwrap().value(), Some(2.0));
        assert!(matches!(ahern_clark_sum(&d, C64::new(0.5, 0.0), None), Err(Error::Domain(_))));
        assert!(!ahern_clark_sum_at_angle(&d, 1.0, Some(f64::INFINITY)).unwrap().is_finite());
    }

    #[test]
    fn carleson_arc_measure() {
        let one = FunctionSpec::constant(1.0);
        let t = Thresholds::default();
        let deltas: Vec<f64> = (1..=6).map(|k| 0.5f64.powi(k)).collect();
        let r = carleson_box_measure(&one, &FunctionSpec::identity(), SpaceSpec::Hardy, 0.0, &deltas, 1 << 16, &t)
            .unwrap();
        for e in &r.entries {
            let want = 4.0 * (e.delta / 2.0).asin() / TAU;
            assert!((e.measure - want).abs() < 2.0 / (1 << 16) as f64, "{e:?}");
        }
        assert_eq!(r.verdict, Verdict::BoundedEvidence);
        assert!(carleson_box_measure(&one, &FunctionSpec::identity(), SpaceSpec::Hardy, 0.0, &[0.0], 64, &t).is_err());
        assert!(carleson_box_measure(&one, &FunctionSpec::identity(), SpaceSpec::Hardy, 0.0, &[2.5], 64, &t).is_err());
    }

    #[test]
    fn bergman_box_of_identity() {
        // ν(S(1, δ)) for φ = z, h = 1, α = 0 is the normalized area of S ∩ 𝔻.
        let one = FunctionSpec::constant(1.0);
        let sp = SpaceSpec::bergman(0.0).unwrap();
        let r = carleson_box_measure(&one, &FunctionSpec::identity(), sp, 0.0, &[0.5], 2048, &Thresholds::default())
            .unwrap();
        // lens area of two unit-ish discs: circle radius δ centred on the unit circle
        let d: f64 = 0.5;
        let a1 = d * d * (d / 2.0).acos();
        let a2 = (1.0 - d * d / 2.0).acos();
        let a3 = 0.5 * (d * d * (4.0 - d * d)).sqrt();
        let want = (a1 + a2 - a3) / std::f64::consts::PI;
        assert!((r.entries[0].measure - want).abs() < 2e-3 * want, "{} vs {want}", r.entries[0].measure);
    }
}
