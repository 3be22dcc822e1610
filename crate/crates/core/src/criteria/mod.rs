//! Boundedness, compactness, Schatten-class and angular-derivative criteria
//! evaluated on structured probe grids. Every result is labeled evidence at a
//! finite truncation, never a proof.

mod boundary;
mod bounds;
mod kernel;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

pub use boundary::{
    ahern_clark_sum, ahern_clark_sum_at_angle, carleson_box_measure, jc_quotient_probe, sup_jc_ratio, AhernClark,
    AhernClarkTerms, BoundaryProbe, CarlesonEntry, CarlesonReport, JC_CAUCHY_GAP,
};
pub use bounds::{adelta_bound_check, pointwise_bound_check, AdeltaOptions};
pub use kernel::{
    compactness_from_kernel, compactness_profile, kernel_test, kernel_value, schatten_integral, KernelRoute, KernelValue, QuadratureSpec,
    SCHATTEN_OUTER_FRACTION,
};

use crate::error::{Error, Result};
use crate::functions::Cplx;
use crate::series::C64;

/// Largest supported grid depth.
pub const MAX_GRID_LEVELS: usize = 14;

/// Dyadic probe grid: the origin (level 0) plus circles `r_j = 1 − 2^{−j}`
/// carrying `K_j = max(64, 2^{j+3})` equispaced angles, or a fixed ray set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    pub levels: usize,
    #[serde(default)]
    pub first_level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<Vec<f64>>,
}

impl DiskGrid {
    pub fn new(levels: usize) -> Result<Self> {
        let g = Self { levels, first_level: 0, rays: None };
        g.validate()?;
        Ok(g)
    }

    pub fn with_rays(levels: usize, rays: Vec<f64>) -> Result<Self> {
        let g = Self { levels, first_level: 0, rays: Some(rays) };
        g.validate()?;
        Ok(g)
    }

    /// Restricts the grid to levels `first..=levels`.
    pub fn starting_at(mut self, first: usize) -> Result<Self> {
        self.first_level = first;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.levels > MAX_GRID_LEVELS {
            return Err(Error::Parameter(format!("grid levels must lie in 1..={MAX_GRID_LEVELS}, got {}", self.levels)));
        }
        if self.first_level > self.levels {
            return Err(Error::Parameter("first grid level exceeds the last".into()));
        }
        if let Some(r) = &self.rays {
            if r.is_empty() || r.iter().any(|a| !a.is_finite()) {
                return Err(Error::Parameter("ray set must be nonempty and finite".into()));
            }
        }
        Ok(())
    }

    pub fn radius(level: usize) -> f64 {
        1.0 - 0.5f64.powi(level as i32)
    }

    pub fn angle_count(level: usize) -> usize {
        64usize.max(1 << (level + 3))
    }

    pub fn level_range(&self) -> std::ops::RangeInclusive<usize> {
        self.first_level..=self.levels
    }

    pub fn points(&self, level: usize) -> Vec<C64> {
        if level == 0 {
            return vec![C64::new(0.0, 0.0)];
        }
        let r = Self::radius(level);
        match &self.rays {
            Some(rays) => rays.iter().map(|&a| C64::from_polar(r, a)).collect(),
            None => {
                let k = Self::angle_count(level);
                (0..k).map(|i| C64::from_polar(r, TAU * i as f64 / k as f64)).collect()
            }
        }
    }
}

/// Declared evidence conventions; every verdict is reported with these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Growth of per-level maxima across the window that signals unboundedness.
    pub growth_factor: f64,
    /// Relative spread under which the window counts as stabilized.
    pub stabilization: f64,
    /// Final/level-1 ratio below which decreasing maxima count as vanishing.
    pub vanishing_ratio: f64,
    /// Fraction of the global sup that stabilized maxima must keep to count as nonvanishing.
    pub nonvanishing_fraction: f64,
    /// Number of level steps in the trailing window.
    pub window: usize,
    /// Largest relative tail energy accepted from the series route.
    pub tail_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            growth_factor: 1.5,
            stabilization: 0.05,
            vanishing_ratio: 0.1,
            nonvanishing_fraction: 0.5,
            window: 3,
            tail_tol: 1e-6,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.growth_factor > 1.0
            && self.stabilization >= 0.0
            && self.vanishing_ratio > 0.0
            && self.vanishing_ratio < 1.0
            && self.nonvanishing_fraction > 0.0
            && self.nonvanishing_fraction <= 1.0
            && self.window >= 2
            && self.tail_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("inconsistent thresholds: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "BOUNDED-EVIDENCE")]
    BoundedEvidence,
    #[serde(rename = "UNBOUNDED-EVIDENCE")]
    UnboundedEvidence,
    #[serde(rename = "VANISHING-EVIDENCE")]
    VanishingEvidence,
    #[serde(rename = "NONVANISHING-EVIDENCE")]
    NonvanishingEvidence,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Self::BoundedEvidence => "BOUNDED-EVIDENCE",
            Self::UnboundedEvidence => "UNBOUNDED-EVIDENCE",
            Self::VanishingEvidence => "VANISHING-EVIDENCE",
            Self::NonvanishingEvidence => "NONVANISHING-EVIDENCE",
            Self::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    pub radius: f64,
    #[serde(with = "extended_f64")]
    pub max_value: f64,
    pub argmax: Cplx,
    pub points: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub level: usize,
    pub w: Cplx,
    #[serde(with = "extended_f64")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPoint {
    pub level: usize,
    pub w: Cplx,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub verdict: Verdict,
    #[serde(with = "extended_f64")]
    pub sup: f64,
    pub argmax: Cplx,
    pub levels: Vec<LevelSummary>,
    pub points: Vec<ProfilePoint>,
    pub flagged: Vec<FlaggedPoint>,
    pub thresholds: Thresholds,
    pub truncation: Option<usize>,
    pub notes: Vec<String>,
    /// Criterion-specific numbers; non-finite values are stored as null.
    pub details: BTreeMap<String, serde_json::Value>,
}

impl CriterionReport {
    fn from_profile(criterion: &str, profile: Profile, thresholds: Thresholds, truncation: Option<usize>) -> Self {
        let levels = profile.summaries();
        let (sup, argmax) = levels
            .iter()
            .filter(|l| l.max_value.is_finite())
            .fold((0.0, Cplx::default()), |acc, l| if l.max_value > acc.0 { (l.max_value, l.argmax) } else { acc });
        Self {
            criterion: criterion.to_string(),
            verdict: Verdict::Inconclusive,
            sup,
            argmax,
            levels,
            points: profile.points,
            flagged: profile.flagged,
            thresholds,
            truncation,
            notes: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    /// A report with no probe profile, for criteria that produce only details.
    pub fn new(criterion: &str, verdict: Verdict, thresholds: Thresholds, truncation: Option<usize>) -> Self {
        let mut r = Self::from_profile(criterion, Profile::default(), thresholds, truncation);
        r.verdict = verdict;
        r
    }

    pub fn detail(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.details.insert(key.to_string(), value.into());
    }

    pub fn detail_f64(&mut self, key: &str, x: f64) {
        self.details.insert(key.to_string(), json_f64(x));
    }

    /// Per-level maxima, skipping levels with no surviving points.
    pub fn level_maxima(&self) -> Vec<(usize, f64)> {
        self.levels.iter().filter(|l| l.points > l.excluded).map(|l| (l.level, l.max_value)).collect()
    }

    /// CSV with header `level,w_re,w_im,value`, one row per evaluated point.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,w_re,w_im,value\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{},{}\n", p.level, fmt17(p.w.0.re), fmt17(p.w.0.im), fmt17(p.value)));
        }
        s
    }
}

/// Float formatted with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// Serde adapter for floats that may be non-finite: finite values are plain
/// numbers, others the strings `"NaN"`, `"inf"`, `"-inf"`.
pub mod extended_f64 {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("NaN")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct V;

    impl Visitor<'_> for V {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or one of \"NaN\", \"inf\", \"-inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }

        fn visit_unit<E: de::Error>(self) -> Result<f64, E> {
            Ok(f64::NAN)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(V)
    }
}

/// A JSON number, or `null` when `x` is not finite.
pub fn json_f64(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
}

/// Raw point values accumulated level by level.
#[derive(Debug, Default)]
struct Profile {
    points: Vec<ProfilePoint>,
    flagged: Vec<FlaggedPoint>,
    levels: Vec<(usize, f64, usize)>,
}

impl Profile {
    fn begin_level(&mut self, level: usize, count: usize) {
        self.levels.push((level, DiskGrid::radius(level), count));
    }

    fn push(&mut self, level: usize, w: C64, value: f64) {
        self.points.push(ProfilePoint { level, w: Cplx(w), value });
    }

    fn flag(&mut self, level: usize, w: C64, reason: String) {
        self.flagged.push(FlaggedPoint { level, w: Cplx(w), reason });
    }

    fn summaries(&self) -> Vec<LevelSummary> {
        self.levels
            .iter()
            .map(|&(level, radius, count)| {
                let mut best: Option<&ProfilePoint> = None;
                for p in self.points.iter().filter(|p| p.level == level) {
                    if best.is_none_or(|b| p.value > b.value) {
                        best = Some(p);
                    }
                }
                let excluded = self.flagged.iter().filter(|f| f.level == level).count();
                LevelSummary {
                    level,
                    radius,
                    max_value: best.map_or(0.0, |b| b.value),
                    argmax: best.map_or(Cplx::default(), |b| b.w),
                    points: count,
                    excluded,
                }
            })
            .collect()
    }
}

/// Boundedness reading of per-level maxima: growth by `growth_factor` over the
/// trailing window with monotone increase, or stabilization of the running sup.
pub fn boundedness_verdict(maxima: &[f64], t: &Thresholds) -> Verdict {
    let n = maxima.len();
    if n <= t.window {
        return Verdict::Inconclusive;
    }
    let tail = &maxima[n - 1 - t.window..];
    let first = tail[0];
    let last = tail[t.window];
    let monotone = tail.windows(2).all(|w| w[1] >= w[0]);
    if monotone && first > 0.0 && last >= t.growth_factor * first {
        return Verdict::UnboundedEvidence;
    }
    let running = |k: usize| maxima[..=k].iter().cloned().fold(0.0, f64::max);
    let before = running(n - 1 - t.window);
    let now = running(n - 1);
    if now <= (1.0 + t.stabilization) * before {
        Verdict::BoundedEvidence
    } else {
        Verdict::Inconclusive
    }
}

/// Compactness reading: strictly decreasing trailing maxima ending below
/// `vanishing_ratio` of the level-1 value, or a stable window above
/// `nonvanishing_fraction` of the sup.
pub fn compactness_verdict(maxima: &[f64], reference: f64, sup: f64, t: &Thresholds) -> Verdict {
    let n = maxima.len();
    if n < t.window {
        return Verdict::Inconclusive;
    }
    let tail = &maxima[n - t.window..];
    let last = tail[t.window - 1];
    if tail.windows(2).all(|w| w[1] < w[0]) && last < t.vanishing_ratio * reference {
        return Verdict::VanishingEvidence;
    }
    if sup == 0.0 {
        return Verdict::VanishingEvidence;
    }
    let (lo, hi) = tail.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if hi <= (1.0 + t.stabilization) * lo && last >= t.nonvanishing_fraction * sup {
        Verdict::NonvanishingEvidence
    } else {
        Verdict::Inconclusive
    }
}
