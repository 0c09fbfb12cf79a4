//! Probability map to ordered open contour.
//!
//! Stages, each usable on its own:
//! [`threshold_map`] -> [`thin`] (optional) -> [`filter_outliers`] ->
//! [`find_extremities`] -> [`build_graph`] -> [`shortest_path`].

mod components;
mod extremities;
mod graph;
mod thinning;

use alloc::vec::Vec;
use core::fmt;

pub use components::{filter_outliers, label_components};
pub use extremities::{find_extremities, gravity_center};
pub use graph::{build_graph, connection_radius, shortest_path, PointGraph};
pub use thinning::{thin, thin_step};

use crate::types::{BinaryMask, Contour, PixelPoint, ProbMap};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ExtractConfig {
    /// Pixels with probability `>=` this value are candidate contour points.
    pub threshold: f64,
    /// Components smaller than this are always discarded.
    pub min_component_size: usize,
    /// Components smaller than this fraction of the largest are discarded.
    pub rel_component_size: f64,
    /// Replaces the `|e1 - e2| - 1` connection radius when set.
    pub connection_radius_override: Option<f64>,
    pub enable_thinning: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            threshold: 0.4,
            min_component_size: 3,
            rel_component_size: 0.05,
            connection_radius_override: None,
            enable_thinning: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Threshold(f64),
    MinComponentSize,
    RelComponentSize(f64),
    Radius(f64),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Threshold(t) => write!(f, "threshold must lie in (0, 1), got {t}"),
            ConfigError::MinComponentSize => f.write_str("min_component_size must be >= 1"),
            ConfigError::RelComponentSize(v) => {
                write!(f, "rel_component_size must lie in [0, 1], got {v}")
            }
            ConfigError::Radius(r) => write!(f, "connection radius override must be > 0, got {r}"),
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ConfigError::Threshold(self.threshold));
        }
        if self.min_component_size < 1 {
            return Err(ConfigError::MinComponentSize);
        }
        if !(0.0..=1.0).contains(&self.rel_component_size) {
            return Err(ConfigError::RelComponentSize(self.rel_component_size));
        }
        if let Some(r) = self.connection_radius_override {
            if !(r.is_finite() && r > 0.0) {
                return Err(ConfigError::Radius(r));
            }
        }
        Ok(())
    }
}

/// Pipeline stage an extraction failure came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractStage {
    Config,
    Threshold,
    Filter,
    Extremities,
    Graph,
    Path,
}

impl fmt::Display for ExtractStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtractStage::Config => "config",
            ExtractStage::Threshold => "threshold",
            ExtractStage::Filter => "filter",
            ExtractStage::Extremities => "extremities",
            ExtractStage::Graph => "graph",
            ExtractStage::Path => "path",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExtractError {
    InvalidConfig(ConfigError),
    EmptyInput,
    /// Every point sits on the gravity centre, so no angle is defined.
    DegenerateGeometry,
    /// Connection radius is not positive (extremities too close).
    DegenerateExtremities { radius: f64 },
    PointNotInGraph(PixelPoint),
    Disconnected { from: PixelPoint, to: PixelPoint },
    /// Failure tagged with the pipeline stage that raised it.
    Stage { stage: ExtractStage, source: alloc::boxed::Box<ExtractError> },
}

impl ExtractError {
    fn at(self, stage: ExtractStage) -> Self {
        ExtractError::Stage {
            stage,
            source: alloc::boxed::Box::new(self),
        }
    }

    pub fn stage(&self) -> Option<ExtractStage> {
        match self {
            ExtractError::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// The error with any stage tag removed.
    pub fn root(&self) -> &ExtractError {
        match self {
            ExtractError::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::InvalidConfig(e) => write!(f, "invalid config: {e}"),
            ExtractError::EmptyInput => f.write_str("no candidate contour points"),
            ExtractError::DegenerateGeometry => {
                f.write_str("all points coincide with the gravity centre")
            }
            ExtractError::DegenerateExtremities { radius } => {
                write!(f, "connection radius {radius} is not positive")
            }
            ExtractError::PointNotInGraph(p) => write!(f, "point {p} is not a graph node"),
            ExtractError::Disconnected { from, to } => {
                write!(f, "no path between extremities {from} and {to}")
            }
            ExtractError::Stage { stage, source } => write!(f, "{stage} stage: {source}"),
        }
    }
}

impl core::error::Error for ExtractError {}

/// Pixels with value `>= t`, in row-major order.
pub fn threshold_map(prob: &ProbMap, t: f64) -> Vec<PixelPoint> {
    prob.values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= t)
        .map(|(i, _)| prob.grid().point_at(i))
        .collect()
}

fn threshold_mask(prob: &ProbMap, t: f64) -> BinaryMask {
    prob.grid().map(|v| v >= t)
}

/// Runs the whole pipeline on one probability map.
pub fn extract_contour(prob: &ProbMap, config: &ExtractConfig) -> Result<Contour, ExtractError> {
    config
        .validate()
        .map_err(|e| ExtractError::InvalidConfig(e).at(ExtractStage::Config))?;

    let candidates = if config.enable_thinning {
        thin(&threshold_mask(prob, config.threshold)).ones()
    } else {
        threshold_map(prob, config.threshold)
    };
    let kept = filter_outliers(&candidates, config).map_err(|e| e.at(ExtractStage::Filter))?;
    let (e1, e2) = find_extremities(&kept).map_err(|e| e.at(ExtractStage::Extremities))?;
    let radius =
        graph::checked_radius(&kept, e1, e2, config).map_err(|e| e.at(ExtractStage::Graph))?;
    let path = graph::radius_path(&kept, radius, e1, e2).map_err(|e| e.at(ExtractStage::Path))?;
    Ok(Contour::new(path).expect("shortest path between distinct extremities is an open curve"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::msd_px;
    use crate::rasterize::rasterize_contour;
    use alloc::vec;

    fn p(x: u32, y: u32) -> PixelPoint {
        PixelPoint::new(x, y)
    }

    #[test]
    fn threshold_is_inclusive() {
        let m = ProbMap::new(3, 1, vec![0.39, 0.40, 0.41]).unwrap();
        assert_eq!(threshold_map(&m, 0.4), vec![p(1, 0), p(2, 0)]);
        assert!(threshold_map(&ProbMap::new(2, 2, vec![0.0; 4]).unwrap(), 0.4).is_empty());
        assert_eq!(threshold_map(&ProbMap::new(2, 2, vec![1.0; 4]).unwrap(), 0.4).len(), 4);
    }

    #[test]
    fn config_validation() {
        assert!(ExtractConfig::default().validate().is_ok());
        let bad = ExtractConfig {
            threshold: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExtractConfig {
            min_component_size: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    fn arc_contour(cx: f64, cy: f64, r: f64, from_deg: i32, to_deg: i32) -> Contour {
        let mut pts: Vec<PixelPoint> = (from_deg..=to_deg)
            .step_by(3)
            .map(|d| {
                let a = f64::from(d).to_radians();
                p(libm::round(cx + r * libm::cos(a)) as u32, libm::round(cy + r * libm::sin(a)) as u32)
            })
            .collect();
        pts.dedup();
        Contour::new(pts).unwrap()
    }

    #[test]
    fn clean_arc_round_trip() {
        let pts: Vec<PixelPoint> = (0..=180)
            .step_by(3)
            .map(|deg| {
                let a = (deg as f64).to_radians();
                p((40.0 + 25.0 * libm::cos(a)).round() as u32, (40.0 - 25.0 * libm::sin(a)).round() as u32)
            })
            .collect::<Vec<_>>();
        let mut pts = pts;
        pts.dedup();
        let truth = Contour::new(pts).unwrap();
        let mask = rasterize_contour(&truth, 80, 80).unwrap();
        let prob = ProbMap::from_mask(&mask);
        let out = extract_contour(&prob, &ExtractConfig::default()).unwrap();
        let dense = Contour::new(mask.ones()).ok();
        assert!(dense.is_some());
        let err = msd_px(&out, &Contour::new(rasterized_chain(&truth)).unwrap()).unwrap();
        assert!(err <= 0.5, "msd {err}");
        for q in out.points() {
            assert!(mask.get(*q).unwrap());
        }
    }

    fn rasterized_chain(c: &Contour) -> Vec<PixelPoint> {
        let mut out: Vec<PixelPoint> = Vec::new();
        for seg in c.points().windows(2) {
            for q in crate::rasterize::bresenham(seg[0], seg[1]) {
                if out.last() != Some(&q) {
                    out.push(q);
                }
            }
        }
        out
    }

    #[test]
    fn below_threshold_fails_in_filter() {
        let m = ProbMap::new(8, 8, vec![0.1; 64]).unwrap();
        let err = extract_contour(&m, &ExtractConfig::default()).unwrap_err();
        assert_eq!(err.stage(), Some(ExtractStage::Filter));
        assert_eq!(err.root(), &ExtractError::EmptyInput);
    }

    #[test]
    fn spurious_blob_is_ignored() {
        let mut mask = BinaryMask::filled(64, 64, false).unwrap();
        let curve = crate::synth::curve_pixels(&arc_contour(32.0, 32.0, 20.0, 180, 360));
        for q in &curve {
            mask.set(*q, true).unwrap();
        }
        let blob = [p(30, 50), p(31, 50)];
        for q in &blob {
            mask.set(*q, true).unwrap();
        }
        let out = extract_contour(&ProbMap::from_mask(&mask), &ExtractConfig::default()).unwrap();
        assert!(out.points().iter().all(|q| !blob.contains(q)));
        assert!(out.len() >= curve.len() * 3 / 4);
    }

    #[test]
    fn deterministic_output() {
        let mut mask = BinaryMask::filled(48, 48, false).unwrap();
        for x in 4..44u32 {
            mask.set(p(x, 10 + x / 4), true).unwrap();
            mask.set(p(x, 11 + x / 4), true).unwrap();
        }
        let prob = ProbMap::from_mask(&mask);
        let a = extract_contour(&prob, &ExtractConfig::default()).unwrap();
        let b = extract_contour(&prob, &ExtractConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
