//! Surface configuration: one JSON document per surface.

use bryant_forge::bryant_data::{BryantData, Target};
use bryant_forge::grid::ChartGrid;
use bryant_forge::meromorphic::{ExtComplex, Poly, PowerRational};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    pub target: Target,
    pub g: FunctionSpec,
    pub f: FunctionSpec,
    pub punctures: Vec<ExtComplex>,
    /// Declared rational hyperbolic Gauss map, relative to the identity
    /// frame at the base point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauss: Option<FunctionSpec>,
    pub base_point: [f64; 2],
    pub charts: Vec<ChartSpec>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_hooks: Option<TestHooks>,
}

/// `z^alpha * numer(z) / denom(z)`, coefficients lowest degree first as
/// `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(default)]
    pub alpha: f64,
    pub numer: Vec<[f64; 2]>,
    #[serde(default = "unit_poly")]
    pub denom: Vec<[f64; 2]>,
}

fn yes() -> bool {
    true
}

fn unit_poly() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum ChartSpec {
    Rect {
        name: String,
        x: [f64; 2],
        y: [f64; 2],
        n: [usize; 2],
        #[serde(default)]
        pullback: bool,
        /// Charts used only for intrinsic geometry can skip the lift.
        #[serde(default = "yes")]
        lift: bool,
    },
    LogPolar {
        name: String,
        center: [f64; 2],
        /// Range of `ln |z - center|`.
        s: [f64; 2],
        n: [usize; 2],
        #[serde(default)]
        pullback: bool,
        /// Charts used only for intrinsic geometry can skip the lift.
        #[serde(default = "yes")]
        lift: bool,
    },
}

impl ChartSpec {
    pub fn name(&self) -> &str {
        match self {
            ChartSpec::Rect { name, .. } | ChartSpec::LogPolar { name, .. } => name,
        }
    }

    pub fn pullback(&self) -> bool {
        match self {
            ChartSpec::Rect { pullback, .. } | ChartSpec::LogPolar { pullback, .. } => *pullback,
        }
    }

    pub fn lift(&self) -> bool {
        match self {
            ChartSpec::Rect { lift, .. } | ChartSpec::LogPolar { lift, .. } => *lift,
        }
    }

    pub fn grid(&self) -> bryant_forge::Result<ChartGrid> {
        match self {
            ChartSpec::Rect { x, y, n, .. } => ChartGrid::rect(*x, *y, n[0], n[1]),
            ChartSpec::LogPolar { center, s, n, .. } => ChartGrid::log_polar(c(*center), *s, n[0], n[1]),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default)]
    pub schwarzian_samples: Vec<[f64; 2]>,
    #[serde(default)]
    pub monodromy: Vec<LoopSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    #[serde(default)]
    pub coverage: CoverageSpec,
    #[serde(default)]
    pub expect: Expectations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "default_loop_nodes")]
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

fn default_loop_nodes() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub chart: String,
    pub source: SourceSpec,
    /// `[lo, hi, count]`, geometric.
    pub radii: [f64; 3],
    /// Exhaustion radii for the total curvature, at least three.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustion: Option<Vec<f64>>,
    #[serde(default)]
    pub ends: Vec<EndFitSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    /// A single node nearest this point of a rect chart.
    Point { at: [f64; 2] },
    /// Innermost ring of a log-polar chart, offset by the distance from
    /// the chart center.
    InnerRing { offset: f64 },
    /// The node ring nearest `|z - center| = radius`.
    Ring { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inner,
    Outer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndFitSpec {
    pub puncture: ExtComplex,
    /// Which side of the distance source the end lies on, in the chart.
    pub side: Side,
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSpec {
    #[serde(default = "default_level")]
    pub level: u32,
    /// Chart sampled when the Gauss map is not rational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
}

fn default_level() -> u32 {
    4
}

impl Default for CoverageSpec {
    fn default() -> Self {
        CoverageSpec {
            level: default_level(),
            chart: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_curvature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omitted_count: Option<usize>,
    #[serde(default)]
    pub osserman_equality: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestHooks {
    /// Extra values appended to an exact omitted set.
    #[serde(default)]
    pub inject_omitted: Vec<ExtComplex>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn c(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl FunctionSpec {
    pub fn to_function(&self) -> Result<PowerRational, ConfigError> {
        let poly = |v: &[[f64; 2]]| Poly::new(v.iter().map(|p| c(*p)).collect());
        PowerRational::new(self.alpha, poly(&self.numer), poly(&self.denom))
            .map_err(|e| ConfigError(format!("bad function: {e}")))
    }
}

impl SurfaceSpec {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let spec: SurfaceSpec = serde_json::from_str(text)
            .map_err(|e| ConfigError(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.charts.is_empty() {
            return Err(ConfigError("at least one chart is required".into()));
        }
        let mut names: Vec<&str> = self.charts.iter().map(|c| c.name()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError("chart names must be unique".into()));
        }
        for ch in &self.charts {
            ch.grid().map_err(|e| ConfigError(format!("chart {}: {e}", ch.name())))?;
        }
        if let Some(geo) = &self.analysis.geometry {
            self.chart(&geo.chart)?;
        }
        if let Some(name) = &self.analysis.coverage.chart {
            self.chart(name)?;
        }
        self.data()?;
        if let Some(g) = &self.gauss {
            g.to_function()?;
        }
        Ok(())
    }

    pub fn chart(&self, name: &str) -> Result<&ChartSpec, ConfigError> {
        self.charts
            .iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| ConfigError(format!("unknown chart {name:?}")))
    }

    pub fn data(&self) -> Result<BryantData, ConfigError> {
        Ok(BryantData::new(self.g.to_function()?, self.f.to_function()?, self.punctures.clone(), self.target))
    }

    pub fn gauss_map(&self) -> Result<Option<PowerRational>, ConfigError> {
        self.gauss.as_ref().map(|g| g.to_function()).transpose()
    }

    pub fn base(&self) -> Complex64 {
        c(self.base_point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "t", "target": "h3",
        "g": {"numer": [[0, 0]]}, "f": {"numer": [[1, 0]]},
        "punctures": ["inf"], "base_point": [0, 0],
        "charts": [{"kind": "rect", "name": "a", "x": [-1, 1], "y": [-1, 1], "n": [8, 8]}]
    }"#;

    #[test]
    fn round_trip() {
        let spec = SurfaceSpec::parse(MINIMAL).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(SurfaceSpec::parse(&text).unwrap(), spec);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replacen("\"name\": \"t\"", "\"name\": \"t\", \"colour\": 1", 1);
        let err = SurfaceSpec::parse(&bad).unwrap_err();
        assert!(err.0.contains("colour"), "{err}");
        assert!(err.0.starts_with("line "));
    }

    #[test]
    fn unknown_chart_reference() {
        let bad = MINIMAL.replacen("\"charts\"", "\"analysis\": {\"coverage\": {\"chart\": \"zz\"}}, \"charts\"", 1);
        assert!(SurfaceSpec::parse(&bad).unwrap_err().0.contains("zz"));
    }
}
