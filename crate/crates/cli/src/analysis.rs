//! Runs the selected criteria and assembles the report.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use wcomp_core::criteria::{
    adelta_bound_check, ahern_clark_sum_at_angle, boundedness_verdict, carleson_box_measure, compactness_from_kernel,
    json_f64, jc_quotient_probe, kernel_test, pointwise_bound_check, schatten_integral, sup_jc_ratio, AdeltaOptions,
    CriterionReport, DiskGrid, QuadratureSpec, Thresholds, Verdict, JC_CAUCHY_GAP, SCHATTEN_OUTER_FRACTION,
};
use wcomp_core::functions::GATE_TOLERANCE;
use wcomp_core::operators::{
    adjoint_kernel_check, build_operator_matrix, gram_moments, operator_norm_estimate, schatten_norm, ConvergenceFlag, GramMatrix, SchattenEstimate, TruncationMatrix, SCHATTEN_CAUCHY_GAP, SCHATTEN_GROWTH,
};
use wcomp_core::spaces::SpaceSpec;
use wcomp_core::{Error, Result};

use crate::config::{normalize_criteria, CriterionId, RunConfig};

/// Residual under which the adjoint identity counts as holding.
pub const ADJOINT_TOLERANCE: f64 = 1e-6;
/// Relative slack added to `σ_max(A_N)` when it serves as the claimed norm bound.
pub const NORM_BOUND_SLACK: f64 = 1e-3;
/// Largest order whose full singular spectrum is computed for the summary.
pub const SUMMARY_SVD_ORDER: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Completed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipReason {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for SkipReason {
    fn from(e: &Error) -> Self {
        Self { kind: e.kind().into(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub criterion: CriterionId,
    pub status: EntryStatus,
    pub report: Option<CriterionReport>,
    pub skip_reason: Option<SkipReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub order: usize,
    pub space: SpaceSpec,
    /// Lanczos estimate of `σ_max(A_N)`.
    pub sigma_max: f64,
    /// `σ₁..σ₁₀` of the compression to `singular_values_order`.
    pub leading_singular_values: Vec<f64>,
    pub singular_values_order: usize,
    pub max_column_tail: f64,
    /// Schatten traces at `N/4`, `N/2`, `N`, when `schatten_norm` ran.
    pub schatten: Option<SchattenEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub thresholds: Thresholds,
    pub thresholds_source: Option<String>,
    pub quadrature: QuadratureSpec,
    pub constants: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: RunConfig,
    pub criteria: Vec<CriterionEntry>,
    pub matrix: Option<MatrixSummary>,
    pub provenance: Provenance,
    /// Wall-clock seconds per stage; present only when requested, since it
    /// breaks byte-for-byte reproducibility.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl AnalysisReport {
    pub fn entry(&self, id: CriterionId) -> Option<&CriterionEntry> {
        self.criteria.iter().find(|e| e.criterion == id)
    }

    pub fn report(&self, id: CriterionId) -> Option<&CriterionReport> {
        self.entry(id).and_then(|e| e.report.as_ref())
    }
}

fn provenance(config: &RunConfig) -> Provenance {
    let constants = [
        ("adjoint_tolerance", ADJOINT_TOLERANCE),
        ("gate_tolerance", GATE_TOLERANCE),
        ("jc_cauchy_gap", JC_CAUCHY_GAP),
        ("norm_bound_slack", NORM_BOUND_SLACK),
        ("schatten_cauchy_gap", SCHATTEN_CAUCHY_GAP),
        ("schatten_growth", SCHATTEN_GROWTH),
        ("schatten_outer_fraction", SCHATTEN_OUTER_FRACTION),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Provenance {
        tool: "wcomp".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        core_version: wcomp_core::VERSION.into(),
        thresholds: config.thresholds,
        thresholds_source: config.thresholds_source.clone(),
        quadrature: config.quadrature,
        constants,
    }
}

struct Stopwatch {
    stages: BTreeMap<String, f64>,
}

impl Stopwatch {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.insert(stage.to_string(), t.elapsed().as_secs_f64());
        out
    }
}

/// Runs the configured criteria in dependency order. Errors in setup (specs,
/// gate, limits) abort; an error inside one criterion becomes a skip entry.
pub fn analyze(config: &RunConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let mut config = config.clone();
    config.criteria = normalize_criteria(&config.criteria);
    let mut clock = Stopwatch { stages: BTreeMap::new() };
    let t = config.thresholds;
    let grid = DiskGrid::new(config.grid_levels)?;

    let wants_matrix = config.matrix_summary || config.criteria.iter().any(|c| c.needs_matrix());
    let mut matrix = None;
    let mut sigma_max = None;
    if wants_matrix {
        let a = clock.time("matrix_build", || build_operator_matrix(&config.h, &config.phi, config.space, config.trunc))?;
        let s = clock.time("matrix_norm", || operator_norm_estimate(&a))?;
        sigma_max = Some(s);
        matrix = Some(a);
    }

    let mut entries = Vec::with_capacity(config.criteria.len());
    let mut kernel_report: Option<CriterionReport> = None;
    let mut schatten_trace: Option<SchattenEstimate> = None;
    for &id in &config.criteria {
        let outcome = clock.time(id.name(), || match id {
            CriterionId::KernelTest => {
                let r = kernel_test(&config.h, &config.phi, config.space, &grid, config.trunc, &t)?;
                kernel_report = Some(r.clone());
                Ok(r)
            }
            CriterionId::CompactnessProfile => match &kernel_report {
                Some(k) => Ok(compactness_from_kernel(k)),
                None => {
                    let k = kernel_test(&config.h, &config.phi, config.space, &grid, config.trunc, &t)?;
                    Ok(compactness_from_kernel(&k))
                }
            },
            CriterionId::PointwiseBoundCheck => {
                let bound = match config.norm_bound {
                    Some(b) => b,
                    None => sigma_max.expect("matrix is built for the pointwise check") * (1.0 + NORM_BOUND_SLACK),
                };
                let mut r = pointwise_bound_check(&config.h, &config.phi, config.space, bound, &grid, &t)?;
                r.detail(
                    "norm_bound_source",
                    if config.norm_bound.is_some() { "configured" } else { "sigma_max_with_slack" },
                );
                Ok(r)
            }
            CriterionId::AdjointKernelCheck => {
                adjoint_report(matrix.as_ref().expect("matrix is built"), &config, &t)
            }
            CriterionId::SchattenNorm => {
                let est = schatten_norm(matrix.as_ref().expect("matrix is built"), config.p)?;
                schatten_trace = Some(est.clone());
                Ok(schatten_report(&est, config.trunc, &t))
            }
            CriterionId::SchattenIntegral => {
                let mut q = config.quadrature;
                q.levels = q.levels.min(wcomp_core::criteria::MAX_GRID_LEVELS);
                schatten_integral(&config.h, &config.phi, config.space, config.p, config.trunc, &q, &t)
            }
            CriterionId::GramMoments => gram_report(&config, &t),
            CriterionId::AdeltaBoundCheck => {
                let (Some(delta), Some(c_delta)) = (config.delta, config.c_delta) else {
                    return Err(Error::Precondition("the two-region bound needs both δ and c_δ".into()));
                };
                if config.space != SpaceSpec::Hardy {
                    return Err(Error::Unsupported("the two-region bound is implemented on H² only".into()));
                }
                let opts = AdeltaOptions { thresholds: t, ..AdeltaOptions::default() };
                adelta_bound_check(&config.h, &config.phi, delta, c_delta, &grid, config.trunc, &opts)
            }
            CriterionId::SupJcRatio => sup_jc_ratio(&config.phi, &grid, &t),
            CriterionId::JcQuotientProbe => jc_report(&config, &t),
            CriterionId::AhernClark => ahern_clark_report(&config, &t),
            CriterionId::CarlesonBoxMeasure => carleson_report(&config, &t),
        });
        entries.push(match outcome {
            Ok(report) => CriterionEntry { criterion: id, status: EntryStatus::Completed, report: Some(report), skip_reason: None },
            Err(e @ (Error::ResourceLimit(_) | Error::Io(_))) => return Err(e),
            Err(e) => CriterionEntry {
                criterion: id,
                status: EntryStatus::Skipped,
                report: None,
                skip_reason: Some(SkipReason::from(&e)),
            },
        });
    }

    let summary = match (&matrix, config.matrix_summary) {
        (Some(a), true) => Some(clock.time("matrix_summary", || matrix_summary(a, sigma_max.unwrap_or(0.0), schatten_trace))?),
        _ => None,
    };
    let timings = config.timings.then_some(clock.stages);
    Ok(AnalysisReport { provenance: provenance(&config), config, criteria: entries, matrix: summary, timings })
}

fn matrix_summary(a: &TruncationMatrix, sigma_max: f64, schatten: Option<SchattenEstimate>) -> Result<MatrixSummary> {
    let k = a.order().min(SUMMARY_SVD_ORDER);
    let leading: Vec<f64> = if k == a.order() {
        a.singular_values()?.iter().take(10).copied().collect()
    } else {
        a.compression(k).singular_values()?.iter().take(10).copied().collect()
    };
    Ok(MatrixSummary {
        order: a.order(),
        space: a.space(),
        sigma_max,
        leading_singular_values: leading,
        singular_values_order: k,
        max_column_tail: a.max_column_tail(),
        schatten,
    })
}

fn schatten_report(est: &SchattenEstimate, order: usize, t: &Thresholds) -> CriterionReport {
    let verdict = match est.flag {
        ConvergenceFlag::Converged => Verdict::BoundedEvidence,
        ConvergenceFlag::Divergent => Verdict::UnboundedEvidence,
        ConvergenceFlag::Inconclusive => Verdict::Inconclusive,
    };
    let mut r = CriterionReport::new("schatten_norm", verdict, *t, Some(order));
    r.sup = est.value;
    r.detail_f64("p", est.p);
    r.detail_f64("value", est.value);
    r.detail("convergence", serde_json::to_value(est.flag).expect("flag serializes"));
    r.detail_f64("cauchy_gap", est.cauchy_gap);
    r.detail_f64("growth", est.growth);
    r.detail("truncation_trace", serde_json::to_value(&est.truncation_trace).expect("trace serializes"));
    r
}

fn adjoint_report(a: &TruncationMatrix, config: &RunConfig, t: &Thresholds) -> Result<CriterionReport> {
    let mut rows = Vec::with_capacity(config.adjoint_points.len());
    let mut worst: f64 = 0.0;
    for w in &config.adjoint_points {
        let res = adjoint_kernel_check(a, &config.h, &config.phi, w.0)?;
        worst = worst.max(res);
        rows.push(serde_json::json!({ "w": w, "residual": res }));
    }
    let holds = worst <= ADJOINT_TOLERANCE;
    let verdict = if holds { Verdict::BoundedEvidence } else { Verdict::Inconclusive };
    let mut r = CriterionReport::new("adjoint_kernel_check", verdict, *t, Some(a.order()));
    r.sup = worst;
    r.detail("residuals", rows);
    r.detail_f64("max_residual", worst);
    r.detail_f64("tolerance", ADJOINT_TOLERANCE);
    r.detail("identity_holds", holds);
    r.notes.push("the verdict records whether the truncated adjoint reproduces conj(h(w))·K_φ(w)".into());
    Ok(r)
}

/// Largest eigenvalue of the leading `(k+1)×(k+1)` block of the moment matrix.
fn leading_block_top(g: &GramMatrix, k: usize) -> Result<f64> {
    let block = GramMatrix {
        order: k,
        entries: (0..=k).flat_map(|m| (0..=k).map(move |n| (m, n))).map(|(m, n)| g.entry(m, n)).collect(),
        max_tail: g.max_tail,
    };
    Ok(block.eigenvalues()?.last().copied().unwrap_or(0.0))
}

/// Moment diagnostics: the isometry defect `max |G − G₀₀·I|/G₀₀` and
/// `sqrt(λ_max)` of nested leading blocks, which is the norm of `W` on
/// polynomials of growing degree and is read with the boundedness rules.
fn gram_report(config: &RunConfig, t: &Thresholds) -> Result<CriterionReport> {
    let n = config.gram_order;
    let g = gram_moments(&config.h, &config.phi, config.space, n)?;
    let g00 = g.entry(0, 0).re;
    let mut defect: f64 = 0.0;
    for m in 0..=n {
        for k in 0..=n {
            let target = if m == k { g00 } else { 0.0 };
            defect = defect.max((g.entry(m, k) - target).norm());
        }
    }
    let orders = [n / 8, n / 4, n / 2, n];
    let mut norms = Vec::with_capacity(orders.len());
    for &k in &orders {
        norms.push(leading_block_top(&g, k)?.max(0.0).sqrt());
    }
    let eig = g.eigenvalues()?;
    let verdict = boundedness_verdict(&norms, t);
    let mut r = CriterionReport::new("gram_moments", verdict, *t, Some(n));
    r.sup = norms.last().copied().unwrap_or(0.0);
    r.detail_f64("h_norm_sq", g00);
    r.detail_f64("isometry_defect", if g00 > 0.0 { defect / g00 } else { defect });
    r.detail_f64("hermitian_defect", g.max_hermitian_defect());
    r.detail_f64("min_eigenvalue", eig.first().copied().unwrap_or(0.0));
    r.detail_f64("max_eigenvalue", eig.last().copied().unwrap_or(0.0));
    r.detail_f64("max_tail", g.max_tail);
    r.detail("block_orders", orders.to_vec());
    r.detail("block_norms", norms.iter().map(|&x| json_f64(x)).collect::<Vec<_>>());
    Ok(r)
}

fn combine(verdicts: &[Verdict], hit: Verdict, miss: Verdict) -> Verdict {
    if verdicts.is_empty() {
        Verdict::Inconclusive
    } else if verdicts.iter().all(|v| *v == hit) {
        hit
    } else if verdicts.iter().all(|v| *v == miss) {
        miss
    } else {
        Verdict::Inconclusive
    }
}

fn jc_report(config: &RunConfig, t: &Thresholds) -> Result<CriterionReport> {
    let mut probes = Vec::new();
    let mut verdicts = Vec::new();
    for &angle in &config.zeta {
        let p = jc_quotient_probe(&config.phi, angle)?;
        verdicts.push(if p.divergent { Verdict::UnboundedEvidence } else { Verdict::BoundedEvidence });
        probes.push(serde_json::to_value(&p).expect("probe serializes"));
    }
    let mut r = CriterionReport::new(
        "jc_quotient_probe",
        combine(&verdicts, Verdict::BoundedEvidence, Verdict::UnboundedEvidence),
        *t,
        None,
    );
    r.detail("probes", probes);
    r.notes.push("BOUNDED-EVIDENCE means the radial quotient converges (finite angular derivative)".into());
    Ok(r)
}

fn ahern_clark_report(config: &RunConfig, t: &Thresholds) -> Result<CriterionReport> {
    let Some(data) = config.phi.inner_data() else {
        return Err(Error::Unsupported("the symbol carries no canonical inner-function data".into()));
    };
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut sup: f64 = 0.0;
    for &angle in &config.zeta {
        let a = ahern_clark_sum_at_angle(&data, angle, None)?;
        sup = sup.max(a.value().unwrap_or(0.0));
        verdicts.push(if a.is_finite() { Verdict::BoundedEvidence } else { Verdict::UnboundedEvidence });
        rows.push(serde_json::json!({ "zeta_angle": json_f64(angle), "result": a }));
    }
    let mut r = CriterionReport::new("ahern_clark", combine(&verdicts, Verdict::BoundedEvidence, Verdict::UnboundedEvidence), *t, None);
    r.sup = sup;
    r.detail("sums", rows);
    r.notes.push("BOUNDED-EVIDENCE means ζ lies in the Ahern–Clark set (finite sum)".into());
    Ok(r)
}

fn carleson_report(config: &RunConfig, t: &Thresholds) -> Result<CriterionReport> {
    let mut reports = Vec::new();
    for &angle in &config.zeta {
        reports.push(carleson_box_measure(
            &config.h,
            &config.phi,
            config.space,
            angle,
            &config.carleson_deltas,
            config.carleson_samples,
            t,
        )?);
    }
    let worst = reports
        .iter()
        .max_by(|a, b| a.sup_ratio.total_cmp(&b.sup_ratio))
        .ok_or_else(|| Error::Parameter("no probe angles given".into()))?;
    let mut r = worst.to_criterion_report();
    let verdicts: Vec<Verdict> = reports.iter().map(|c| c.verdict).collect();
    r.verdict = if verdicts.contains(&Verdict::UnboundedEvidence) {
        Verdict::UnboundedEvidence
    } else {
        combine(&verdicts, Verdict::BoundedEvidence, Verdict::UnboundedEvidence)
    };
    if reports.len() > 1 {
        r.detail("per_angle", serde_json::to_value(&reports).expect("reports serialize"));
        r.notes.push("the profile is that of the angle with the largest ratio".into());
    }
    Ok(r)
}
