//! Per-frame region statistics to fixed-length feature matrices.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imaging::RegionStats;

/// Number of interpolated time steps per sample.
pub const DEFAULT_LENGTH: usize = 30;

const FEATURE_NAMES: [&str; 5] = ["x", "y", "area", "orientation", "eccentricity"];
const FILE_MAGIC: &str = "# trajsign-features v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FeatureSet {
    /// Hand position only: `(x, y)`.
    Trajectory,
    /// Position plus area, orientation and eccentricity.
    #[default]
    TrajectoryShape,
}

impl FeatureSet {
    pub fn dims(self) -> usize {
        match self {
            FeatureSet::Trajectory => 2,
            FeatureSet::TrajectoryShape => 5,
        }
    }

    pub fn from_dims(dims: usize) -> Option<Self> {
        match dims {
            2 => Some(FeatureSet::Trajectory),
            5 => Some(FeatureSet::TrajectoryShape),
            _ => None,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::Trajectory => "trajectory",
            FeatureSet::TrajectoryShape => "trajectory-shape",
        })
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trajectory" => Ok(FeatureSet::Trajectory),
            "trajectory-shape" => Ok(FeatureSet::TrajectoryShape),
            other => Err(Error::InvalidConfig(format!(
                "unknown feature set '{other}'"
            ))),
        }
    }
}

/// A `dims x len` real matrix: one row per feature, one column per time
/// step. Columns are the HMM observation vectors, so storage is
/// column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    dims: usize,
    len: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    /// Builds a matrix from feature rows (each row one feature over time).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dims = rows.len();
        if dims == 0 {
            return Err(Error::EmptyTrajectory);
        }
        let len = rows[0].len();
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != len) {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        let mut data = Vec::with_capacity(dims * len);
        for t in 0..len {
            data.extend(rows.iter().map(|r| r[t]));
        }
        Self::from_columns_flat(dims, len, data)
    }

    /// Builds a matrix from observation vectors (each inner vec one time step).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let len = columns.len();
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        let dims = columns[0].len();
        let mut data = Vec::with_capacity(dims * len);
        for c in columns {
            if c.len() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::from_columns_flat(dims, len, data)
    }

    fn from_columns_flat(dims: usize, len: usize, data: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::EmptyTrajectory);
        }
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "feature matrix contains non-finite values".into(),
            ));
        }
        Ok(Self { dims, len, data })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, feature: usize, t: usize) -> f64 {
        self.data[t * self.dims + feature]
    }

    /// Observation vector at time `t`.
    #[inline]
    pub fn column(&self, t: usize) -> &[f64] {
        &self.data[t * self.dims..(t + 1) * self.dims]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dims)
    }

    pub fn row(&self, feature: usize) -> Vec<f64> {
        (0..self.len).map(|t| self.get(feature, t)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dims).map(|i| self.row(i)).collect()
    }

    /// All entries flattened feature-major (row after row).
    pub fn flatten(&self) -> Vec<f64> {
        (0..self.dims)
            .flat_map(|i| (0..self.len).map(move |t| (i, t)))
            .map(|(i, t)| self.get(i, t))
            .collect()
    }

    /// Keeps only the first `dims` feature rows.
    pub fn truncate_dims(&self, dims: usize) -> Result<Self> {
        if dims == 0 || dims > self.dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: self.dims,
            });
        }
        let data = self
            .columns()
            .flat_map(|c| c[..dims].iter().copied())
            .collect();
        Ok(Self {
            dims,
            len: self.len,
            data,
        })
    }
}

/// Normalizes per-frame statistics into a raw `D x T` feature sequence.
///
/// Centroids are divided by the frame dimensions and area by the frame's
/// pixel count; orientation and eccentricity pass through.
pub fn assemble(
    stats: &[RegionStats],
    frame_width: usize,
    frame_height: usize,
    feature_set: FeatureSet,
) -> Result<FeatureMatrix> {
    if stats.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if frame_width == 0 || frame_height == 0 {
        return Err(Error::InvalidConfig(
            "frame dimensions must be positive".into(),
        ));
    }
    let w = frame_width as f64;
    let h = frame_height as f64;
    let dims = feature_set.dims();
    let mut data = Vec::with_capacity(dims * stats.len());
    for s in stats {
        let full = [
            s.centroid_x / w,
            s.centroid_y / h,
            s.area / (w * h),
            s.orientation,
            s.eccentricity,
        ];
        data.extend_from_slice(&full[..dims]);
    }
    FeatureMatrix::from_columns_flat(dims, stats.len(), data)
}

/// Linear resampling of each row at `target_len` evenly spaced points over
/// the original index range. End columns are copied exactly.
pub fn interpolate(seq: &FeatureMatrix, target_len: usize) -> Result<FeatureMatrix> {
    let src_len = seq.len();
    if src_len < 2 {
        return Err(Error::TooShort { len: src_len });
    }
    if target_len < 2 {
        return Err(Error::TooShort { len: target_len });
    }
    let dims = seq.dims();
    let span = (src_len - 1) as f64;
    let steps = (target_len - 1) as f64;
    let mut data = Vec::with_capacity(dims * target_len);
    for k in 0..target_len {
        // k * (T-1) is an exact integer, so query points that land on a
        // sample index are exact
        let pos = (k * (src_len - 1)) as f64 / steps;
        debug_assert!(pos <= span);
        let lo = (pos.floor() as usize).min(src_len - 1);
        let frac = pos - lo as f64;
        if frac == 0.0 {
            data.extend_from_slice(seq.column(lo));
            continue;
        }
        let a = seq.column(lo);
        let b = seq.column(lo + 1);
        for i in 0..dims {
            let v = a[i] + frac * (b[i] - a[i]);
            data.push(v.clamp(a[i].min(b[i]), a[i].max(b[i])));
        }
    }
    FeatureMatrix::from_columns_flat(dims, target_len, data)
}

/// Writes the versioned CSV layout: a header comment, then one line per
/// feature row.
pub fn write_features(path: &Path, m: &FeatureMatrix) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(features_to_string(m).as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn features_to_string(m: &FeatureMatrix) -> String {
    let mut s = format!(
        "{FILE_MAGIC} dims={} length={} order={}\n",
        m.dims(),
        m.len(),
        FEATURE_NAMES[..m.dims().min(5)].join(",")
    );
    for i in 0..m.dims() {
        let line: Vec<String> = (0..m.len()).map(|t| format!("{}", m.get(i, t))).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let text = fs::read_to_string(path).map_err(Error::at(path))?;
    parse_features(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
}

fn header_field(header: &str, key: &str) -> Option<usize> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key)?.strip_prefix('='))
        .and_then(|v| v.parse().ok())
}

fn parse_features(text: &str) -> std::result::Result<FeatureMatrix, (usize, String)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or((1, "empty file".to_string()))?;
    if !header.starts_with(FILE_MAGIC) {
        return Err((1, format!("expected header starting with '{FILE_MAGIC}'")));
    }
    let dims = header_field(header, "dims").ok_or((1, "header lacks dims=".to_string()))?;
    let len = header_field(header, "length").ok_or((1, "header lacks length=".to_string()))?;
    let mut rows = Vec::with_capacity(dims);
    for (n, line) in lines {
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| (n + 1, e.to_string()))?;
        if row.len() != len {
            return Err((n + 1, format!("expected {len} values, found {}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() != dims {
        return Err((
            1,
            format!("header declares {dims} rows, found {}", rows.len()),
        ));
    }
    FeatureMatrix::from_rows(&rows).map_err(|e| (1, e.to_string()))
}
