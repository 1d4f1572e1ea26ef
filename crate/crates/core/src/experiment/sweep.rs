use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Cartesian grid of named parameter values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepGrid {
    pub axes: Vec<(String, Vec<String>)>,
}

impl SweepGrid {
    /// Parses `key=v1,v2,...` specifications.
    pub fn parse<S: AsRef<str>>(specs: &[S]) -> Result<Self> {
        let mut axes = Vec::new();
        for spec in specs {
            let spec = spec.as_ref();
            let (key, values) = spec
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("grid axis {spec:?} is not key=v1,v2")))?;
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_owned()).filter(|v| !v.is_empty()).collect();
            if values.is_empty() {
                return Err(Error::InvalidConfig(format!("grid axis {key:?} has no values")));
            }
            axes.push((key.trim().to_owned(), values));
        }
        Ok(Self { axes })
    }

    /// Every combination, last axis varying fastest.
    pub fn points(&self) -> Vec<Vec<(String, String)>> {
        let mut points = vec![Vec::new()];
        for (key, values) in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push((key.clone(), v.clone()));
                        q
                    })
                })
                .collect();
        }
        points
    }

    /// Applies one grid point to a copy of `base`.
    pub fn apply(base: &ExperimentConfig, point: &[(String, String)]) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        for (k, v) in point {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One grid point's outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub config_hash: String,
    pub point: String,
    pub variant: String,
    pub h_score: f64,
    pub common_accuracy: f64,
    pub private_accuracy: f64,
    pub overall_accuracy: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_points() {
        let grid = SweepGrid::parse(&["xi=0.5,0.7", "eta1=0,5,1"]).unwrap();
        let points = grid.points();
        assert_eq!(points.len(), 6);
        assert_eq!(points[1], vec![("xi".into(), "0.5".into()), ("eta1".into(), "5".into())]);
        let cfg = SweepGrid::apply(&ExperimentConfig::default(), &points[5]).unwrap();
        assert_eq!((cfg.evaluation.xi, cfg.loss.eta1), (0.7, 1.0));
    }

    #[test]
    fn empty_grid_is_one_point() {
        assert_eq!(SweepGrid::default().points(), vec![Vec::new()]);
        assert!(SweepGrid::parse(&["xi"]).is_err());
    }
}
