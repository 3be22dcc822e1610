//! Pointwise consequences of a claimed norm bound, and the two-region bound
//! for symbols whose weight is small where `|φ|` is close to 1.

use serde::{Deserialize, Serialize};

use super::kernel::kernel_profile;
use super::{boundedness_verdict, compactness_verdict, CriterionReport, DiskGrid, Profile, Thresholds, Verdict};
use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::operators::{build_operator_matrix, operator_norm_estimate};
use crate::series::{circle_midpoints, pairwise_sum};
use crate::spaces::SpaceSpec;

/// Relative excess tolerated before a point counts as a violation.
const ROUNDING_SLACK: f64 = 1e-12;

/// Checks `|h(w)| ≤ B·((1 − |φ(w)|²)/(1 − |w|²))^{γ/2}` on the grid, `γ` being
/// the kernel exponent of the space. Profile values are the left side divided
/// by the root factor, a lower bound for `‖W‖`; any value above `B`
/// falsifies the claim.
pub fn pointwise_bound_check(
    h: &FunctionSpec,
    phi: &FunctionSpec,
    space: SpaceSpec,
    norm_bound: f64,
    grid: &DiskGrid,
    thresholds: &Thresholds,
) -> Result<CriterionReport> {
    if !(norm_bound >= 0.0) {
        return Err(Error::Parameter(format!("norm bound must be nonnegative, got {norm_bound}")));
    }
    grid.validate()?;
    space.validate()?;
    h.validate()?;
    phi.self_map_gate()?;
    let half_gamma = space.kernel_exponent() / 2.0;
    let mut profile = Profile::default();
    let mut worst = f64::INFINITY;
    let mut first_violation: Option<usize> = None;
    let mut violations = 0usize;
    for level in grid.level_range() {
        let pts = grid.points(level);
        profile.begin_level(level, pts.len());
        for w in pts {
            let (hv, pv) = match (h.eval(w), phi.eval(w)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    profile.flag(level, w, e.to_string());
                    continue;
                }
            };
            let m = pv.norm();
            if m >= 1.0 {
                profile.flag(level, w, format!("|φ(w)| = {m} is not inside the disc"));
                continue;
            }
            let ratio = (1.0 - w.norm_sqr()) / ((1.0 - m) * (1.0 + m));
            let q = hv.norm() * ratio.powf(half_gamma);
            let margin = norm_bound - q;
            worst = worst.min(margin);
            if q > norm_bound * (1.0 + ROUNDING_SLACK) {
                violations += 1;
                first_violation.get_or_insert(level);
            }
            profile.push(level, w, q);
        }
    }
    let mut r = CriterionReport::from_profile("pointwise_bound_check", profile, *thresholds, None);
    let maxima: Vec<f64> = r.level_maxima().into_iter().map(|(_, m)| m).collect();
    r.verdict = boundedness_verdict(&maxima, thresholds);
    r.detail_f64("norm_bound", norm_bound);
    r.detail_f64("worst_margin", worst);
    r.detail("falsified", violations > 0);
    r.detail("violations", violations);
    r.detail("first_violation_level", first_violation);
    r.detail("space", space.name());
    if violations > 0 {
        r.notes.push(format!(
            "the claimed bound {norm_bound} is falsified: {violations} grid points need a larger norm, first at level {}",
            first_violation.unwrap_or_default()
        ));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdeltaOptions {
    /// Boundary midpoints used for the `A_δ` test and `‖h‖₂`.
    pub samples: usize,
    /// Radius of the boundary samples.
    pub radius: f64,
    pub thresholds: Thresholds,
}

impl Default for AdeltaOptions {
    fn default() -> Self {
        Self { samples: 1 << 14, radius: 1.0 - 1e-8, thresholds: Thresholds::default() }
    }
}

/// Hardy-space two-region bound
/// `‖W k̃_w‖² ≤ c_δ²‖C_φ‖² + ‖h‖₂²(1 − |w|²)/δ²` when `|h| ≤ c_δ` on
/// `A_δ = {|φ| ≥ 1 − δ}`. Profile values are the square root of the right
/// side; the verdict reads them with the compactness rules.
#[allow(clippy::too_many_arguments)]
pub fn adelta_bound_check(
    h: &FunctionSpec,
    phi: &FunctionSpec,
    delta: f64,
    c_delta: f64,
    grid: &DiskGrid,
    order: usize,
    opts: &AdeltaOptions,
) -> Result<CriterionReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("δ must lie in (0, 1), got {delta}")));
    }
    if !(c_delta >= 0.0 && c_delta.is_finite()) {
        return Err(Error::Parameter(format!("c_δ must be finite and nonnegative, got {c_delta}")));
    }
    if opts.samples < 16 || !(opts.radius > 0.0 && opts.radius <= 1.0) {
        return Err(Error::Parameter("boundary sampling needs ≥ 16 samples at a radius in (0, 1]".into()));
    }
    let t = opts.thresholds;
    let mut in_set = 0usize;
    let mut h_max_on_set: f64 = 0.0;
    let mut h_sq = Vec::with_capacity(opts.samples);
    for z in circle_midpoints(opts.radius, opts.samples) {
        let hv = h.eval(z)?;
        let pv = phi.eval(z)?;
        h_sq.push(hv.norm_sqr());
        if pv.norm() >= 1.0 - delta {
            in_set += 1;
            h_max_on_set = h_max_on_set.max(hv.norm());
        }
    }
    let h_norm_sq = pairwise_sum(&h_sq) / opts.samples as f64;
    let set_fraction = in_set as f64 / opts.samples as f64;

    if h_max_on_set > c_delta * (1.0 + 1e-9) {
        let mut r = CriterionReport::from_profile("adelta_bound_check", Profile::default(), t, Some(order));
        r.verdict = Verdict::Inconclusive;
        r.detail("precondition_violated", true);
        r.detail_f64("h_max_on_set", h_max_on_set);
        r.detail_f64("c_delta", c_delta);
        r.detail_f64("delta", delta);
        r.notes.push(format!(
            "precondition violated: |h| reaches {h_max_on_set} on A_δ, above the asserted c_δ = {c_delta}"
        ));
        return Ok(r);
    }

    let one = FunctionSpec::constant(1.0);
    let c_phi = operator_norm_estimate(&build_operator_matrix(&one, phi, SpaceSpec::Hardy, order)?)?;
    let (kernel, _) = kernel_profile(h, phi, SpaceSpec::Hardy, grid, order, &t)?;
    let head = c_delta * c_delta * c_phi * c_phi;

    let mut profile = Profile { flagged: kernel.flagged.clone(), ..Default::default() };
    let mut violations = 0usize;
    let mut worst_ratio: f64 = 0.0;
    let mut kernel_sup: f64 = 0.0;
    for &(level, _, count) in &kernel.levels {
        profile.begin_level(level, count);
    }
    for p in &kernel.points {
        let bound_sq = head + h_norm_sq * (1.0 - p.w.0.norm_sqr()) / (delta * delta);
        let v2 = p.value * p.value;
        if v2 > bound_sq * (1.0 + 1e-9) {
            violations += 1;
        }
        worst_ratio = worst_ratio.max(if bound_sq > 0.0 { v2 / bound_sq } else { f64::INFINITY });
        kernel_sup = kernel_sup.max(p.value);
        profile.push(p.level, p.w.0, bound_sq.sqrt());
    }
    let uniform = (head + h_norm_sq / (delta * delta)).sqrt();

    let mut r = CriterionReport::from_profile("adelta_bound_check", profile, t, Some(order));
    let maxima: Vec<(usize, f64)> = r.level_maxima();
    let reference = maxima.iter().find(|(l, _)| *l >= 1).map_or(0.0, |m| m.1);
    let values: Vec<f64> = maxima.iter().map(|m| m.1).collect();
    r.verdict = compactness_verdict(&values, reference, r.sup, &t);
    r.detail("precondition_violated", false);
    r.detail("inequality_holds", violations == 0);
    r.detail("violations", violations);
    r.detail_f64("worst_value_to_bound_sq", worst_ratio);
    r.detail_f64("uniform_bound", uniform);
    r.detail_f64("kernel_sup", kernel_sup);
    r.detail_f64("composition_norm", c_phi);
    r.detail_f64("h_norm", h_norm_sq.sqrt());
    r.detail_f64("h_max_on_set", h_max_on_set);
    r.detail_f64("set_fraction", set_fraction);
    r.detail_f64("delta", delta);
    r.detail_f64("c_delta", c_delta);
    if violations > 0 {
        r.notes.push(format!("{violations} grid points exceed the two-region bound"));
    }
    Ok(r)
}
