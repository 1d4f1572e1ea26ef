//! Plain-text checkpoints.
//!
//! ```text
//! ppot-checkpoint 1
//! meta <key> <value>
//! tensor <name> <rows> <cols>
//! <one line per row, whitespace separated>
//! ```
//!
//! Bias vectors are stored as `1 x n` tensors. Values use Rust's shortest
//! round-trip formatting, so a save/load cycle is lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::params::NetworkParams;
use crate::error::{Error, Result};

const MAGIC: &str = "ppot-checkpoint";
const VERSION: u32 = 1;

/// Network parameters plus free-form string metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: NetworkParams,
    pub meta: BTreeMap<String, String>,
}

impl Checkpoint {
    pub fn new(params: NetworkParams) -> Self {
        Self { params, meta: BTreeMap::new() }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_owned(), value.to_string());
        self
    }

    /// Parses a metadata entry.
    pub fn meta_value<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.meta
            .get(key)
            .ok_or_else(|| Error::Checkpoint(format!("missing meta key {key}")))?
            .parse()
            .map_err(|_| Error::Checkpoint(format!("unparsable meta value for {key}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} {VERSION}\n");
        for (k, v) in &self.meta {
            writeln!(out, "meta {k} {v}").unwrap();
        }
        let p = &self.params;
        let views = [
            ("w1", p.w1.view()),
            ("b1", p.b1.view().insert_axis(ndarray::Axis(0))),
            ("w2", p.w2.view()),
            ("b2", p.b2.view().insert_axis(ndarray::Axis(0))),
            ("wh", p.wh.view()),
            ("bh", p.bh.view().insert_axis(ndarray::Axis(0))),
        ];
        for (name, t) in views {
            writeln!(out, "tensor {name} {} {}", t.nrows(), t.ncols()).unwrap();
            for row in t.outer_iter() {
                let line: Vec<String> = row.iter().map(f64::to_string).collect();
                writeln!(out, "{}", line.join(" ")).unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Checkpoint(msg);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty checkpoint".into()))?;
        if header != format!("{MAGIC} {VERSION}") {
            return Err(bad(format!("unrecognised header {header:?}")));
        }
        let mut meta = BTreeMap::new();
        let mut tensors: BTreeMap<String, Array2<f64>> = BTreeMap::new();
        while let Some(line) = lines.next() {
            let mut parts = line.splitn(3, ' ');
            match parts.next() {
                Some("meta") => {
                    let key = parts.next().ok_or_else(|| bad("meta without key".into()))?;
                    meta.insert(key.to_owned(), parts.next().unwrap_or("").to_owned());
                }
                Some("tensor") => {
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    let [_, name, rows, cols] = fields[..] else {
                        return Err(bad(format!("malformed tensor header {line:?}")));
                    };
                    let parse = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad size {s:?}")));
                    let (rows, cols) = (parse(rows)?, parse(cols)?);
                    let mut data = Vec::with_capacity(rows * cols);
                    for _ in 0..rows {
                        let row = lines.next().ok_or_else(|| bad(format!("tensor {name} truncated")))?;
                        let before = data.len();
                        for v in row.split_whitespace() {
                            data.push(v.parse::<f64>().map_err(|_| bad(format!("bad value {v:?}")))?);
                        }
                        if data.len() - before != cols {
                            return Err(bad(format!("tensor {name} row has wrong length")));
                        }
                    }
                    let t = Array2::from_shape_vec((rows, cols), data).expect("length checked");
                    tensors.insert(name.to_owned(), t);
                }
                Some("") | None => {}
                Some(other) => return Err(bad(format!("unexpected line kind {other:?}"))),
            }
        }
        let mut take = |name: &str| tensors.remove(name).ok_or_else(|| bad(format!("missing tensor {name}")));
        let vector = |t: Array2<f64>| -> Result<Array1<f64>> {
            if t.nrows() != 1 {
                return Err(Error::Checkpoint("bias tensor must have one row".into()));
            }
            Ok(t.row(0).to_owned())
        };
        let params = NetworkParams {
            w1: take("w1")?,
            b1: vector(take("b1")?)?,
            w2: take("w2")?,
            b2: vector(take("b2")?)?,
            wh: take("wh")?,
            bh: vector(take("bh")?)?,
        };
        let consistent = params.w1.ncols() == params.b1.len()
            && params.w2.nrows() == params.b1.len()
            && params.w2.ncols() == params.b2.len()
            && params.wh.nrows() == params.b2.len()
            && params.wh.ncols() == params.bh.len();
        if !consistent {
            return Err(bad("tensor shapes are inconsistent".into()));
        }
        Ok(Self { params, meta })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
