//! Toolkit configuration: defaults, typed parsing of the flat key/value
//! config format, and adapters into per-module parameter structs.
//!
//! The config file is plain text, one `key = value` per line, `#`
//! comments allowed. Every key can also be overridden by a CLI flag.

use crate::aggregate::AggregationConfig;
use crate::error::{Error, Result};
use crate::graph::Extent;
use crate::matching::MatchWeights;
use crate::metrics::MetricConfig;

/// All tunable parameters in one place.
///
/// `alpha`/`beta` weigh the matching cost and loss; `p_min`/`d_max`
/// steer aggregation; the curve defaults (degree 10, 20 sample points)
/// follow the usual path representation choice; the metric distances are
/// calibration assumptions documented in [`MetricConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ToolConfig {
    pub alpha: f64,
    pub beta: f64,
    pub p_min: f64,
    pub d_max: f64,
    pub bezier_degree: usize,
    pub polyline_points: usize,
    pub max_paths: u64,
    pub interp_dist: f64,
    pub match_dist: f64,
    pub topo_radius: f64,
    pub sda_thresholds: Vec<f64>,
    pub lane_halfwidth: f64,
    pub rng_seed: u64,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            p_min: 0.5,
            d_max: 10.0,
            bezier_degree: crate::curve::DEFAULT_BEZIER_DEGREE,
            polyline_points: crate::curve::DEFAULT_POLYLINE_POINTS,
            max_paths: crate::decompose::DEFAULT_MAX_PATHS,
            interp_dist: 5.0,
            match_dist: 8.0,
            topo_radius: 50.0,
            sda_thresholds: vec![20.0, 50.0],
            lane_halfwidth: 5.0,
            rng_seed: 0,
        }
    }
}

impl ToolConfig {
    /// Parse the flat key/value format; errors carry the line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let number = index + 1;
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidConfig(format!(
                    "line {number}: expected \"key = value\", got \"{line}\""
                )));
            };
            config
                .set(key.trim(), value.trim())
                .map_err(|e| Error::InvalidConfig(format!("line {number}: {e}")))?;
        }
        Ok(config)
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e| {
                Error::InvalidConfig(format!("{key}: cannot parse \"{value}\": {e}"))
            })
        }

        match key {
            "alpha" => self.alpha = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "p_min" => self.p_min = num(key, value)?,
            "d_max" => self.d_max = num(key, value)?,
            "bezier_degree" => self.bezier_degree = num(key, value)?,
            "polyline_points" => self.polyline_points = num(key, value)?,
            "max_paths" => self.max_paths = num(key, value)?,
            "interp_dist" => self.interp_dist = num(key, value)?,
            "match_dist" => self.match_dist = num(key, value)?,
            "topo_radius" => self.topo_radius = num(key, value)?,
            "lane_halfwidth" => self.lane_halfwidth = num(key, value)?,
            "rng_seed" => self.rng_seed = num(key, value)?,
            "sda_thresholds" => {
                self.sda_thresholds = value
                    .split(',')
                    .map(|part| num("sda_thresholds", part.trim()))
                    .collect::<Result<Vec<f64>>>()?;
            }
            other => {
                return Err(Error::InvalidConfig(format!("unknown key \"{other}\"")));
            }
        }
        Ok(())
    }

    pub fn match_weights(&self) -> Result<MatchWeights> {
        MatchWeights::new(self.alpha, self.beta)
    }

    pub fn aggregation_config(&self, n_cp_out: Option<usize>) -> Result<AggregationConfig> {
        AggregationConfig::new(self.p_min, self.d_max, n_cp_out)
    }

    pub fn metric_config(&self, raster_extent: Extent) -> Result<MetricConfig> {
        let config = MetricConfig {
            interp_dist: self.interp_dist,
            match_dist: self.match_dist,
            topo_radius: self.topo_radius,
            sda_thresholds: self.sda_thresholds.clone(),
            lane_halfwidth: self.lane_halfwidth,
            raster_extent,
        };
        config.check()?;
        Ok(config)
    }
}
