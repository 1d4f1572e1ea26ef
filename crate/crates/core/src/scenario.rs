//! Gaussian-mixture source/target scenarios with controlled class overlap.

use std::io::{Read, Write};

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class structure and geometry of a synthetic scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_common: usize,
    pub n_source_private: usize,
    pub n_target_private: usize,
    pub samples_per_class: usize,
    pub feature_dim: usize,
    /// Approximate spacing between neighbouring class means.
    pub class_separation: f64,
    /// Length of the translation applied to every target point.
    pub domain_shift: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_common: 2,
            n_source_private: 1,
            n_target_private: 1,
            samples_per_class: 100,
            feature_dim: 2,
            class_separation: 4.0,
            domain_shift: 1.0,
            noise_sigma: 0.5,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_common == 0 {
            return Err(Error::InvalidConfig("n_common must be at least 1".into()));
        }
        if self.samples_per_class == 0 || self.feature_dim == 0 {
            return Err(Error::InvalidConfig("samples_per_class and feature_dim must be positive".into()));
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("noise_sigma must be positive, got {}", self.noise_sigma)));
        }
        if !(self.class_separation >= 0.0 && self.domain_shift.is_finite()) {
            return Err(Error::InvalidConfig("class_separation must be >= 0 and domain_shift finite".into()));
        }
        Ok(())
    }

    pub fn source_classes(&self) -> usize {
        self.n_common + self.n_source_private
    }

    pub fn total_classes(&self) -> usize {
        self.n_common + self.n_source_private + self.n_target_private
    }
}

/// Labelled source samples and target samples with hidden labels.
///
/// Source labels are `0..L`. Target labels below `n_common` are shared
/// classes; target-private classes use labels `L..` and are flagged unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDataset {
    pub source_x: Array2<f64>,
    pub source_y: Vec<usize>,
    pub target_x: Array2<f64>,
    pub target_y: Vec<usize>,
    pub target_known: Vec<bool>,
    pub source_classes: usize,
    /// Fraction of target samples from shared classes.
    pub truth_alpha: f64,
    /// Fraction of source classes that are shared.
    pub truth_beta: f64,
}

impl ScenarioDataset {
    /// Evaluation label of target sample `i`; unknowns map to `source_classes`.
    pub fn target_eval_label(&self, i: usize) -> usize {
        if self.target_known[i] {
            self.target_y[i]
        } else {
            self.source_classes
        }
    }

    pub fn common_classes(&self) -> Vec<usize> {
        let mut seen = vec![false; self.source_classes];
        for (&y, &known) in self.target_y.iter().zip(&self.target_known) {
            if known {
                seen[y] = true;
            }
        }
        (0..self.source_classes).filter(|&k| seen[k]).collect()
    }

    pub fn feature_dim(&self) -> usize {
        self.source_x.ncols()
    }
}

/// Orthonormal pair spanning a random plane (the coordinate plane when `D <= 2`).
fn random_plane(rng: &mut ChaCha8Rng, dim: usize) -> (Array1<f64>, Array1<f64>) {
    let mut u = Array1::zeros(dim);
    let mut v = Array1::zeros(dim);
    if dim <= 2 {
        u[0] = 1.0;
        if dim == 2 {
            v[1] = 1.0;
        }
        return (u, v);
    }
    let mut draw = || Array1::from_shape_simple_fn(dim, || rng.sample::<f64, _>(StandardNormal));
    u = draw();
    u /= u.dot(&u).sqrt();
    v = draw();
    let along = v.dot(&u);
    v.scaled_add(-along, &u);
    v /= v.dot(&v).sqrt();
    (u, v)
}

/// Draws a scenario. Class means sit on a circle of radius
/// `class_separation * classes / (2 pi)`: shared classes first, then
/// source-private, then target-private.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<ScenarioDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.feature_dim;
    let total = config.total_classes();
    let radius = config.class_separation * total as f64 / (2.0 * std::f64::consts::PI);
    let (u, v) = random_plane(&mut rng, dim);
    let means: Vec<Array1<f64>> = (0..total)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / total as f64;
            &u * (radius * angle.cos()) + &v * (radius * angle.sin())
        })
        .collect();
    let mut shift = Array1::from_shape_simple_fn(dim, || rng.sample::<f64, _>(StandardNormal));
    let norm = shift.dot(&shift).sqrt();
    shift *= config.domain_shift / norm.max(f64::MIN_POSITIVE);

    let spc = config.samples_per_class;
    let source_classes = config.source_classes();
    let mut sample = |class_mean: &Array1<f64>, offset: Option<&Array1<f64>>| {
        let mut x = Array2::from_shape_simple_fn((spc, dim), || config.noise_sigma * rng.sample::<f64, _>(StandardNormal));
        x += class_mean;
        if let Some(o) = offset {
            x += o;
        }
        x
    };

    let mut source_blocks = Vec::new();
    let mut source_y = Vec::new();
    for k in 0..source_classes {
        source_blocks.push(sample(&means[k], None));
        source_y.extend(std::iter::repeat(k).take(spc));
    }
    let mut target_blocks = Vec::new();
    let mut target_y = Vec::new();
    let target_labels = (0..config.n_common).chain(source_classes..total);
    for k in target_labels {
        target_blocks.push(sample(&means[k], Some(&shift)));
        target_y.extend(std::iter::repeat(k).take(spc));
    }
    let stack = |blocks: Vec<Array2<f64>>| {
        let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
        ndarray::concatenate(Axis(0), &views).expect("blocks share a width")
    };
    let target_known: Vec<bool> = target_y.iter().map(|&y| y < config.n_common).collect();
    let target_total = (config.n_common + config.n_target_private) as f64;
    Ok(ScenarioDataset {
        source_x: stack(source_blocks),
        source_y,
        target_x: stack(target_blocks),
        target_y,
        target_known,
        source_classes,
        truth_alpha: config.n_common as f64 / target_total,
        truth_beta: config.n_common as f64 / source_classes as f64,
    })
}

/// Writes `x0..x{D-1}, label, domain, known` rows, source first.
pub fn write_dataset_csv<W: Write>(data: &ScenarioDataset, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let dim = data.feature_dim();
    let mut header: Vec<String> = (0..dim).map(|d| format!("x{d}")).collect();
    header.extend(["label", "domain", "known"].map(String::from));
    out.write_record(&header)?;
    let rows = data
        .source_x
        .outer_iter()
        .zip(&data.source_y)
        .map(|(x, &y)| (x, y, "source", true))
        .chain(
            data.target_x
                .outer_iter()
                .zip(data.target_y.iter().zip(&data.target_known))
                .map(|(x, (&y, &k))| (x, y, "target", k)),
        );
    for (x, y, domain, known) in rows {
        let mut record: Vec<String> = x.iter().map(f64::to_string).collect();
        record.push(y.to_string());
        record.push(domain.to_owned());
        record.push(u8::from(known).to_string());
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset_csv`]. Ground-truth ratios are
/// recomputed from the labels and flags.
pub fn read_dataset_csv<R: Read>(reader: R) -> Result<ScenarioDataset> {
    let mut input = csv::Reader::from_reader(reader);
    let dim = input.headers()?.iter().filter(|h| h.starts_with('x')).count();
    let bad = |msg: String| Error::InvalidArgument(format!("dataset csv: {msg}"));
    let (mut sx, mut sy, mut tx, mut ty, mut tk) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for record in input.records() {
        let record = record?;
        if record.len() != dim + 3 {
            return Err(bad(format!("expected {} fields, found {}", dim + 3, record.len())));
        }
        let x: Vec<f64> = (0..dim)
            .map(|d| record[d].parse().map_err(|_| bad(format!("bad coordinate {:?}", &record[d]))))
            .collect::<Result<_>>()?;
        let y: usize = record[dim].parse().map_err(|_| bad(format!("bad label {:?}", &record[dim])))?;
        match &record[dim + 1] {
            "source" => {
                sx.extend(x);
                sy.push(y);
            }
            "target" => {
                tx.extend(x);
                ty.push(y);
                tk.push(&record[dim + 2] == "1");
            }
            other => return Err(bad(format!("unknown domain {other:?}"))),
        }
    }
    if sy.is_empty() || ty.is_empty() {
        return Err(bad("both domains need samples".into()));
    }
    let source_classes = sy.iter().max().map_or(0, |&m| m + 1);
    let known_count = tk.iter().filter(|&&k| k).count();
    let mut data = ScenarioDataset {
        source_x: Array2::from_shape_vec((sy.len(), dim), sx).expect("rows have fixed width"),
        source_y: sy,
        target_x: Array2::from_shape_vec((ty.len(), dim), tx).expect("rows have fixed width"),
        target_y: ty,
        target_known: tk,
        source_classes,
        truth_alpha: 0.0,
        truth_beta: 0.0,
    };
    data.truth_alpha = known_count as f64 / data.target_y.len() as f64;
    data.truth_beta = data.common_classes().len() as f64 / source_classes as f64;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_set() {
        let cfg = ScenarioConfig { n_source_private: 0, n_target_private: 0, ..Default::default() };
        let data = generate_scenario(&cfg).unwrap();
        assert_eq!((data.truth_alpha, data.truth_beta), (1.0, 1.0));
        assert!(data.target_known.iter().all(|&k| k));
    }

    #[test]
    fn counts_by_construction() {
        let cfg = ScenarioConfig { samples_per_class: 50, ..Default::default() };
        let data = generate_scenario(&cfg).unwrap();
        assert_eq!(data.source_x.nrows(), 150);
        assert_eq!(data.source_classes, 3);
        assert_eq!(data.target_x.nrows(), 150);
        assert_eq!(data.target_known.iter().filter(|&&k| !k).count(), 50);
        assert!((data.truth_alpha - 2.0 / 3.0).abs() < 1e-15);
        assert!((data.truth_beta - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn private_labels_are_disjoint() {
        let cfg = ScenarioConfig { n_common: 3, n_source_private: 2, n_target_private: 2, feature_dim: 5, ..Default::default() };
        let data = generate_scenario(&cfg).unwrap();
        for (i, (&y, &known)) in data.target_y.iter().zip(&data.target_known).enumerate() {
            assert_eq!(known, data.source_y.contains(&y));
            if !known {
                assert_eq!(data.target_eval_label(i), data.source_classes);
            }
        }
        assert_eq!(data.common_classes(), vec![0, 1, 2]);
    }

    #[test]
    fn adjacent_means_are_about_one_separation_apart() {
        let cfg = ScenarioConfig { n_common: 6, n_source_private: 0, n_target_private: 0, feature_dim: 7, noise_sigma: 1e-9, samples_per_class: 1, ..Default::default() };
        let data = generate_scenario(&cfg).unwrap();
        let gap = (&data.source_x.row(0) - &data.source_x.row(1)).mapv(|x| x * x).sum().sqrt();
        // Chord of a hexagon inscribed in a circle of radius 6 * sep / (2 pi).
        let expected = 2.0 * 6.0 * cfg.class_separation / (2.0 * std::f64::consts::PI) * (std::f64::consts::PI / 6.0).sin();
        assert!((gap - expected).abs() < 1e-6);
    }

    #[test]
    fn seeded_and_round_trips_through_csv() {
        let cfg = ScenarioConfig { feature_dim: 3, samples_per_class: 5, ..Default::default() };
        let a = generate_scenario(&cfg).unwrap();
        assert_eq!(a, generate_scenario(&cfg).unwrap());
        let mut buf = Vec::new();
        write_dataset_csv(&a, &mut buf).unwrap();
        let back = read_dataset_csv(buf.as_slice()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn invalid_configs() {
        assert!(generate_scenario(&ScenarioConfig { n_common: 0, ..Default::default() }).is_err());
        assert!(generate_scenario(&ScenarioConfig { noise_sigma: 0.0, ..Default::default() }).is_err());
    }
}
