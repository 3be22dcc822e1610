//! Run configuration: what to analyze and with which conventions.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wcomp_core::criteria::{QuadratureSpec, Thresholds, MAX_GRID_LEVELS};
use wcomp_core::functions::{parse_spec, parse_symbol, Cplx, FunctionSpec};
use wcomp_core::operators::MAX_DENSE_ORDER;
use wcomp_core::spaces::SpaceSpec;
use wcomp_core::{Error, Result, C64};

/// Criteria in dependency order; a run executes the selected ones in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    KernelTest,
    CompactnessProfile,
    PointwiseBoundCheck,
    AdjointKernelCheck,
    SchattenNorm,
    SchattenIntegral,
    GramMoments,
    AdeltaBoundCheck,
    SupJcRatio,
    JcQuotientProbe,
    AhernClark,
    CarlesonBoxMeasure,
}

impl CriterionId {
    pub const ALL: [CriterionId; 12] = [
        Self::KernelTest,
        Self::CompactnessProfile,
        Self::PointwiseBoundCheck,
        Self::AdjointKernelCheck,
        Self::SchattenNorm,
        Self::SchattenIntegral,
        Self::GramMoments,
        Self::AdeltaBoundCheck,
        Self::SupJcRatio,
        Self::JcQuotientProbe,
        Self::AhernClark,
        Self::CarlesonBoxMeasure,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::KernelTest => "kernel_test",
            Self::CompactnessProfile => "compactness_profile",
            Self::PointwiseBoundCheck => "pointwise_bound_check",
            Self::AdjointKernelCheck => "adjoint_kernel_check",
            Self::SchattenNorm => "schatten_norm",
            Self::SchattenIntegral => "schatten_integral",
            Self::GramMoments => "gram_moments",
            Self::AdeltaBoundCheck => "adelta_bound_check",
            Self::SupJcRatio => "sup_jc_ratio",
            Self::JcQuotientProbe => "jc_quotient_probe",
            Self::AhernClark => "ahern_clark",
            Self::CarlesonBoxMeasure => "carleson_box_measure",
        }
    }

    /// Whether the criterion reads the truncation matrix.
    pub fn needs_matrix(&self) -> bool {
        matches!(self, Self::PointwiseBoundCheck | Self::AdjointKernelCheck | Self::SchattenNorm)
    }
}

impl FromStr for CriterionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match key.as_str() {
            "kernel" => Some(Self::KernelTest),
            "compactness" => Some(Self::CompactnessProfile),
            "pointwise" => Some(Self::PointwiseBoundCheck),
            "adjoint" => Some(Self::AdjointKernelCheck),
            "gram" => Some(Self::GramMoments),
            "adelta" => Some(Self::AdeltaBoundCheck),
            "jc_probe" => Some(Self::JcQuotientProbe),
            "carleson" => Some(Self::CarlesonBoxMeasure),
            _ => None,
        };
        alias
            .or_else(|| Self::ALL.into_iter().find(|c| c.name() == key))
            .ok_or_else(|| Error::Parameter(format!("unknown criterion `{s}`")))
    }
}

/// Sorts into dependency order and drops repeats.
pub fn normalize_criteria(list: &[CriterionId]) -> Vec<CriterionId> {
    let mut v = list.to_vec();
    v.sort();
    v.dedup();
    v
}

pub fn default_carleson_deltas() -> Vec<f64> {
    (1..=7).map(|k| 0.5f64.powi(k)).collect()
}

pub fn default_adjoint_points() -> Vec<Cplx> {
    vec![Cplx(C64::new(0.3, 0.0)), Cplx(C64::new(0.0, 0.5)), Cplx(C64::new(-0.7, 0.0))]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub h: FunctionSpec,
    pub phi: FunctionSpec,
    /// Where `h` and `φ` were read from, when they came from files.
    pub h_source: Option<String>,
    pub phi_source: Option<String>,
    pub space: SpaceSpec,
    pub trunc: usize,
    pub grid_levels: usize,
    pub criteria: Vec<CriterionId>,
    pub p: f64,
    /// Boundary angles (radians) for angular-derivative and Carleson probes.
    pub zeta: Vec<f64>,
    pub carleson_deltas: Vec<f64>,
    pub carleson_samples: usize,
    pub adjoint_points: Vec<Cplx>,
    /// Norm bound for the pointwise check; defaults to the matrix estimate.
    pub norm_bound: Option<f64>,
    pub delta: Option<f64>,
    pub c_delta: Option<f64>,
    pub gram_order: usize,
    pub matrix_summary: bool,
    pub thresholds: Thresholds,
    pub thresholds_source: Option<String>,
    pub quadrature: QuadratureSpec,
    pub out: Option<String>,
    pub profiles_out: Option<String>,
    #[serde(default)]
    pub timings: bool,
}

impl RunConfig {
    pub fn new(h: FunctionSpec, phi: FunctionSpec, space: SpaceSpec) -> Self {
        Self {
            h,
            phi,
            h_source: None,
            phi_source: None,
            space,
            trunc: 1024,
            grid_levels: 10,
            criteria: vec![
                CriterionId::KernelTest,
                CriterionId::CompactnessProfile,
                CriterionId::PointwiseBoundCheck,
                CriterionId::SchattenNorm,
            ],
            p: 1.0,
            zeta: vec![0.0],
            carleson_deltas: default_carleson_deltas(),
            carleson_samples: 1 << 16,
            adjoint_points: default_adjoint_points(),
            norm_bound: None,
            delta: None,
            c_delta: None,
            gram_order: 64,
            matrix_summary: true,
            thresholds: Thresholds::default(),
            thresholds_source: None,
            quadrature: QuadratureSpec::default(),
            out: None,
            profiles_out: None,
            timings: false,
        }
    }

    /// Rejects configurations outside the supported resource envelope.
    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        self.thresholds.validate()?;
        self.h.validate()?;
        self.phi.self_map_gate()?;
        if self.trunc < 4 || self.trunc > MAX_DENSE_ORDER {
            return Err(Error::ResourceLimit(format!(
                "truncation order must lie in [4, {MAX_DENSE_ORDER}], got {}",
                self.trunc
            )));
        }
        if self.grid_levels < 1 || self.grid_levels > MAX_GRID_LEVELS {
            return Err(Error::ResourceLimit(format!(
                "grid levels must lie in [1, {MAX_GRID_LEVELS}], got {}",
                self.grid_levels
            )));
        }
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::Parameter(format!("Schatten exponent needs p ≥ 1, got {}", self.p)));
        }
        if self.criteria.is_empty() {
            return Err(Error::Parameter("no criteria selected".into()));
        }
        if let Some(z) = self.zeta.iter().find(|z| !z.is_finite()) {
            return Err(Error::Parameter(format!("probe angle must be finite, got {z}")));
        }
        if self.gram_order < 8 || self.gram_order > MAX_DENSE_ORDER / 4 {
            return Err(Error::ResourceLimit(format!(
                "Gram order must lie in [8, {}], got {}",
                MAX_DENSE_ORDER / 4,
                self.gram_order
            )));
        }
        if self.carleson_samples > 1 << 22 {
            return Err(Error::ResourceLimit(format!("{} Carleson samples exceed 2^22", self.carleson_samples)));
        }
        if let Some(b) = self.norm_bound {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::Parameter(format!("norm bound must be finite and nonnegative, got {b}")));
            }
        }
        Ok(())
    }
}

/// Reads a function spec given inline (a JSON object) or as a file path.
/// Returns the spec and, for files, the path.
pub fn load_spec(arg: &str, symbol: bool) -> Result<(FunctionSpec, Option<String>)> {
    let trimmed = arg.trim_start();
    let (doc, source) = if trimmed.starts_with('{') {
        (arg.to_string(), None)
    } else {
        let text = std::fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))?;
        (text, Some(arg.to_string()))
    };
    let spec = if symbol { parse_symbol(&doc)? } else { parse_spec(&doc)? };
    Ok((spec, source))
}

/// Threshold overrides from a JSON file; absent fields keep their defaults.
pub fn load_thresholds(path: &Path) -> Result<Thresholds> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let t: Thresholds = serde_json::from_str(&text).map_err(|e| Error::Parameter(format!("thresholds file: {e}")))?;
    t.validate()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_names_and_aliases() {
        for c in CriterionId::ALL {
            assert_eq!(c.name().parse::<CriterionId>().unwrap(), c);
            assert_eq!(serde_json::to_value(c).unwrap(), c.name());
        }
        assert_eq!("compactness".parse::<CriterionId>().unwrap(), CriterionId::CompactnessProfile);
        assert_eq!("Kernel-Test".parse::<CriterionId>().unwrap(), CriterionId::KernelTest);
        assert!("nope".parse::<CriterionId>().is_err());
    }

    #[test]
    fn criteria_follow_dependency_order() {
        let v = normalize_criteria(&[
            CriterionId::PointwiseBoundCheck,
            CriterionId::CompactnessProfile,
            CriterionId::KernelTest,
            CriterionId::CompactnessProfile,
        ]);
        assert_eq!(v, [CriterionId::KernelTest, CriterionId::CompactnessProfile, CriterionId::PointwiseBoundCheck]);
    }

    #[test]
    fn limits_are_enforced() {
        let mut c = RunConfig::new(FunctionSpec::constant(1.0), FunctionSpec::dilation(0.5), SpaceSpec::Hardy);
        assert!(c.validate().is_ok());
        c.trunc = 4097;
        assert!(matches!(c.validate(), Err(Error::ResourceLimit(_))));
        c.trunc = 256;
        c.grid_levels = 15;
        assert!(matches!(c.validate(), Err(Error::ResourceLimit(_))));
        c.grid_levels = 8;
        c.p = 0.5;
        assert!(c.validate().is_err());
        c.p = 1.0;
        c.phi = FunctionSpec::affine(C64::new(0.0, 0.0), C64::new(1.5, 0.0), FunctionSpec::identity());
        assert!(matches!(c.validate(), Err(Error::SelfMapGate { .. })));
    }

    #[test]
    fn inline_and_file_specs() {
        let (f, src) = load_spec(r#"{"type":"frac_power","beta":0.375}"#, false).unwrap();
        assert_eq!(f, FunctionSpec::frac_power(0.375));
        assert!(src.is_none());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.json");
        std::fs::write(&path, r#"{"type":"icecream"}"#).unwrap();
        let (f, src) = load_spec(path.to_str().unwrap(), true).unwrap();
        assert_eq!(f, FunctionSpec::Icecream);
        assert_eq!(src.as_deref(), path.to_str());
        assert!(matches!(load_spec("/no/such/file.json", false), Err(Error::Io(_))));
    }
}
