//! Sensor readings: ingestion, outlier filtering, missing-value imputation,
//! vector formation and fold partitioning.
//!
//! A [`SensorMatrix`] holds readings aligned on a common clock, with rows as
//! time instants and columns as sensors. Unobserved cells carry a `false` mask
//! bit and are ignored by every statistic until they are imputed.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {what} index {index} outside 1..={max}")]
    OutOfBounds {
        line: usize,
        what: &'static str,
        index: usize,
        max: usize,
    },
    #[error("sensor column {0} has no observed readings")]
    EmptyColumn(usize),
    #[error("time row {0} has no observed sensors; cannot impute")]
    EmptyRow(usize),
    #[error("observed column means sum to zero in row {0}")]
    ZeroMeanSum(usize),
    #[error("matrix still has missing entries; impute before forming vectors")]
    NotImputed,
    #[error("window of {window} samples does not fit {available} available samples")]
    WindowTooLarge { window: usize, available: usize },
    #[error("invalid fold request: k={k} for {n} items")]
    InvalidFolds { k: usize, n: usize },
    #[error("invalid dynamic range: need 0 <= phi1 < phi2, got ({phi1}, {phi2})")]
    InvalidRange { phi1: f64, phi2: f64 },
}

pub type Result<T> = std::result::Result<T, DatasetError>;

/// One raw reading. Indices are 1-based as in the CSV input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReading {
    pub sensor_id: usize,
    pub time_index: usize,
    pub value: f64,
}

/// Valid magnitude window of a sensor. Readings with `|v| <= phi1` or
/// `|v| >= phi2` are treated as outliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicRange {
    phi1: f64,
    phi2: f64,
}

impl DynamicRange {
    pub fn new(phi1: f64, phi2: f64) -> Result<Self> {
        if !(phi1 >= 0.0 && phi1 < phi2) {
            return Err(DatasetError::InvalidRange { phi1, phi2 });
        }
        Ok(Self { phi1, phi2 })
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    pub fn contains(&self, v: f64) -> bool {
        let a = v.abs();
        a > self.phi1 && a < self.phi2
    }
}

/// Aligned readings, `M` time rows by `N` sensor columns, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    observed: Vec<bool>,
    column_means: Vec<Option<f64>>,
}

impl SensorMatrix {
    /// An all-missing matrix.
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
            observed: vec![false; rows * cols],
            column_means: vec![None; cols],
        }
    }

    /// A fully observed matrix from row-major values.
    pub fn from_rows(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "value count must be rows*cols");
        let mut m = Self {
            rows,
            cols,
            values,
            observed: vec![true; rows * cols],
            column_means: Vec::new(),
        };
        m.recompute_means();
        m
    }

    /// Row-major values plus an observation mask.
    pub fn from_parts(rows: usize, cols: usize, values: Vec<f64>, observed: Vec<bool>) -> Self {
        assert_eq!(values.len(), rows * cols);
        assert_eq!(observed.len(), rows * cols);
        let mut m = Self {
            rows,
            cols,
            values,
            observed,
            column_means: Vec::new(),
        };
        m.recompute_means();
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.observed[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let i = row * self.cols + col;
        self.values[i] = value;
        self.observed[i] = true;
    }

    pub fn unset(&mut self, row: usize, col: usize) {
        self.observed[row * self.cols + col] = false;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn is_complete(&self) -> bool {
        self.observed.iter().all(|&o| o)
    }

    pub fn missing_count(&self) -> usize {
        self.observed.iter().filter(|&&o| !o).count()
    }

    /// Mean of the observed entries of column `col`, if it has any.
    pub fn column_mean(&self, col: usize) -> Result<f64> {
        self.column_means[col].ok_or(DatasetError::EmptyColumn(col))
    }

    pub fn column_means(&self) -> &[Option<f64>] {
        &self.column_means
    }

    pub fn recompute_means(&mut self) {
        self.column_means = (0..self.cols)
            .map(|j| {
                let (sum, n) = (0..self.rows)
                    .filter(|&i| self.is_observed(i, j))
                    .fold((0.0, 0usize), |(s, n), i| (s + self.value(i, j), n + 1));
                (n > 0).then(|| sum / n as f64)
            })
            .collect();
    }
}

/// Reads header-less `time_index,sensor_id,value` rows into an `M`x`N`
/// matrix. Later duplicates overwrite earlier ones.
pub fn ingest_csv(path: impl AsRef<Path>, sensors: usize, samples: usize) -> Result<SensorMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_reader(BufReader::new(file), sensors, samples).map_err(|e| match e {
        DatasetError::Io { source, .. } => DatasetError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

pub fn ingest_reader(reader: impl BufRead, sensors: usize, samples: usize) -> Result<SensorMatrix> {
    let mut m = SensorMatrix::empty(samples, sensors);
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    for (i, record) in csv.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| DatasetError::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(DatasetError::Parse {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let field = |k: usize, name: &str| -> Result<&str> {
            let s = &record[k];
            if s.is_empty() {
                return Err(DatasetError::Parse {
                    line,
                    message: format!("empty {name}"),
                });
            }
            Ok(s)
        };
        let parse_index = |k: usize, name: &str| -> Result<usize> {
            field(k, name)?.parse::<usize>().map_err(|e| DatasetError::Parse {
                line,
                message: format!("bad {name}: {e}"),
            })
        };
        let t = parse_index(0, "time_index")?;
        let s = parse_index(1, "sensor_id")?;
        let v: f64 = field(2, "value")?.parse().map_err(|e| DatasetError::Parse {
            line,
            message: format!("bad value: {e}"),
        })?;
        if t == 0 || t > samples {
            return Err(DatasetError::OutOfBounds {
                line,
                what: "time",
                index: t,
                max: samples,
            });
        }
        if s == 0 || s > sensors {
            return Err(DatasetError::OutOfBounds {
                line,
                what: "sensor",
                index: s,
                max: sensors,
            });
        }
        m.set(t - 1, s - 1, v);
    }
    m.recompute_means();
    Ok(m)
}

/// Masks out readings outside the dynamic range and recomputes means.
pub fn filter_outliers(m: &SensorMatrix, range: DynamicRange) -> SensorMatrix {
    let mut out = m.clone();
    for (v, o) in out.values.iter().zip(out.observed.iter_mut()) {
        if *o && !range.contains(*v) {
            *o = false;
        }
    }
    out.recompute_means();
    out
}

/// Frozen per-sensor means used by [`impute_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMeans(pub Vec<f64>);

impl ColumnMeans {
    /// Means over observed cells of the given rows only.
    pub fn fit_rows(m: &SensorMatrix, rows: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut sum = vec![0.0; m.cols()];
        let mut count = vec![0usize; m.cols()];
        for i in rows {
            for j in 0..m.cols() {
                if m.is_observed(i, j) {
                    sum[j] += m.value(i, j);
                    count[j] += 1;
                }
            }
        }
        Self::finish(sum, count)
    }

    /// Means over an arbitrary set of `(row, col)` cells; unobserved cells skipped.
    pub fn fit_cells(m: &SensorMatrix, cells: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut sum = vec![0.0; m.cols()];
        let mut count = vec![0usize; m.cols()];
        for (i, j) in cells {
            if m.is_observed(i, j) {
                sum[j] += m.value(i, j);
                count[j] += 1;
            }
        }
        Self::finish(sum, count)
    }

    pub fn from_matrix(m: &SensorMatrix) -> Result<Self> {
        m.column_means()
            .iter()
            .enumerate()
            .map(|(j, mu)| mu.ok_or(DatasetError::EmptyColumn(j)))
            .collect::<Result<Vec<_>>>()
            .map(ColumnMeans)
    }

    fn finish(sum: Vec<f64>, count: Vec<usize>) -> Result<Self> {
        sum.into_iter()
            .zip(count)
            .enumerate()
            .map(|(j, (s, n))| {
                if n == 0 {
                    Err(DatasetError::EmptyColumn(j))
                } else {
                    Ok(s / n as f64)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(ColumnMeans)
    }
}

/// Fills every missing cell with the ratio estimate
/// `(sum of observed x_ik / sum of their mu_k) * mu_j`, using the matrix's own
/// observed means.
pub fn impute_missing(m: &SensorMatrix) -> Result<SensorMatrix> {
    let means = ColumnMeans::from_matrix(m)?;
    impute_with(m, &means)
}

/// Same as [`impute_missing`] with means frozen elsewhere (typically the
/// training portion).
pub fn impute_with(m: &SensorMatrix, means: &ColumnMeans) -> Result<SensorMatrix> {
    assert_eq!(means.0.len(), m.cols(), "one mean per sensor");
    let mut out = m.clone();
    for i in 0..m.rows() {
        let mut obs_sum = 0.0;
        let mut mu_sum = 0.0;
        let mut any = false;
        let mut missing = false;
        for j in 0..m.cols() {
            if m.is_observed(i, j) {
                obs_sum += m.value(i, j);
                mu_sum += means.0[j];
                any = true;
            } else {
                missing = true;
            }
        }
        if !missing {
            continue;
        }
        if !any {
            return Err(DatasetError::EmptyRow(i));
        }
        if mu_sum == 0.0 {
            return Err(DatasetError::ZeroMeanSum(i));
        }
        let ratio = obs_sum / mu_sum;
        for j in 0..m.cols() {
            if !m.is_observed(i, j) {
                out.set(i, j, ratio * means.0[j]);
            }
        }
    }
    out.recompute_means();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorMode {
    /// One vector per sensor per non-overlapping window of consecutive samples.
    Temporal,
    /// One vector per time instant across all sensors.
    Spatial,
}

impl std::str::FromStr for VectorMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "temporal" => Ok(Self::Temporal),
            "spatial" => Ok(Self::Spatial),
            _ => Err(format!("unknown mode {s:?}, expected temporal|spatial")),
        }
    }
}

/// Where each vector's entries live in the matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorLayout {
    pub mode: VectorMode,
    pub rows: usize,
    pub cols: usize,
    /// Entries per vector.
    pub len: usize,
    pub count: usize,
}

impl VectorLayout {
    pub fn new(mode: VectorMode, rows: usize, cols: usize, window: usize) -> Result<Self> {
        match mode {
            VectorMode::Spatial => Ok(Self {
                mode,
                rows,
                cols,
                len: cols,
                count: rows,
            }),
            VectorMode::Temporal => {
                if window == 0 || window > rows {
                    return Err(DatasetError::WindowTooLarge {
                        window,
                        available: rows,
                    });
                }
                Ok(Self {
                    mode,
                    rows,
                    cols,
                    len: window,
                    count: cols * (rows / window),
                })
            }
        }
    }

    /// Matrix cell `(row, col)` of entry `pos` of vector `v`. Temporal vectors
    /// are ordered sensor-major, then window.
    pub fn cell(&self, v: usize, pos: usize) -> (usize, usize) {
        match self.mode {
            VectorMode::Spatial => (v, pos),
            VectorMode::Temporal => {
                let per_sensor = self.rows / self.len;
                let sensor = v / per_sensor;
                let w = v % per_sensor;
                (w * self.len + pos, sensor)
            }
        }
    }

    pub fn cells(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len).map(move |p| self.cell(v, p))
    }
}

/// Cuts a fully observed matrix into data vectors.
pub fn make_vectors(m: &SensorMatrix, mode: VectorMode, window: usize) -> Result<Vec<Vec<f64>>> {
    if !m.is_complete() {
        return Err(DatasetError::NotImputed);
    }
    let layout = VectorLayout::new(mode, m.rows(), m.cols(), window)?;
    Ok((0..layout.count)
        .map(|v| layout.cells(v).map(|(i, j)| m.value(i, j)).collect())
        .collect())
}

/// One cross-validation partition, as indices into the vector list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n` with `seed` and deals it into `k` folds whose sizes
/// differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 || k > n {
        return Err(DatasetError::InvalidFolds { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut test = order[start..start + size].to_vec();
        test.sort_unstable();
        let mut train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + size..])
            .copied()
            .collect();
        train.sort_unstable();
        folds.push(Fold { train, test });
        start += size;
    }
    Ok(folds)
}

/// Train/test vectors with imputation done using means from the training
/// vectors only.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub layout: VectorLayout,
    pub means: ColumnMeans,
    pub train: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
    pub train_index: Vec<usize>,
    pub test_index: Vec<usize>,
}

/// Vectorizes `m`, holds out fold `test_fold` of a `folds`-way split, fits
/// column means on the remaining vectors' observed cells and imputes the whole
/// matrix with them.
pub fn prepare_split(
    m: &SensorMatrix,
    mode: VectorMode,
    window: usize,
    folds: usize,
    seed: u64,
    test_fold: usize,
) -> Result<PreparedSplit> {
    let layout = VectorLayout::new(mode, m.rows(), m.cols(), window)?;
    let split = kfold_split(layout.count, folds, seed)?;
    let fold = &split[test_fold % folds];
    let means = ColumnMeans::fit_cells(m, fold.train.iter().flat_map(|&v| layout.cells(v)))?;
    let full = impute_with(m, &means)?;
    let vector = |v: usize| layout.cells(v).map(|(i, j)| full.value(i, j)).collect::<Vec<_>>();
    Ok(PreparedSplit {
        train: fold.train.iter().map(|&v| vector(v)).collect(),
        test: fold.test.iter().map(|&v| vector(v)).collect(),
        train_index: fold.train.clone(),
        test_index: fold.test.clone(),
        means,
        layout,
    })
}

/// Per-sensor noiseless signal: an offset plus two sinusoids.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSignal {
    pub offset: f64,
    pub amplitudes: [f64; 2],
    pub periods: [f64; 2],
    pub phases: [f64; 2],
}

impl SensorSignal {
    pub fn at(&self, t: usize) -> f64 {
        let t = t as f64;
        self.offset
            + (0..2)
                .map(|k| self.amplitudes[k] * (2.0 * PI * t / self.periods[k] + self.phases[k]).sin())
                .sum::<f64>()
    }
}

/// Synthetic readings: `x_i[t] = base_i(t) + w_i[t]` with `w ~ N(0, noise_std^2)`,
/// each cell independently dropped with probability `missing_rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticModel {
    pub signals: Vec<SensorSignal>,
    pub noise_std: f64,
    pub missing_rate: f64,
}

impl SyntheticModel {
    /// `sensors` sensors sharing a diurnal and a half-diurnal cycle (in
    /// samples), each with its own offset, amplitudes and phase lag.
    pub fn diurnal(sensors: usize, day: f64, noise_std: f64, missing_rate: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signals = (0..sensors)
            .map(|_| SensorSignal {
                offset: rng.random_range(4.0..14.0),
                amplitudes: [rng.random_range(3.0..8.0), rng.random_range(0.5..2.5)],
                periods: [day, day / 3.0],
                phases: [rng.random_range(-0.6..0.6), rng.random_range(0.0..2.0 * PI)],
            })
            .collect();
        Self {
            signals,
            noise_std,
            missing_rate,
        }
    }

    /// Surface-temperature-like preset: 23 sensors, one reading every two
    /// minutes (720 samples per day).
    pub fn spatial_preset(seed: u64) -> Self {
        Self::diurnal(23, 720.0, 0.15, 0.0, seed)
    }

    pub fn temporal_preset(seed: u64) -> Self {
        Self::diurnal(8, 720.0, 0.1, 0.0, seed)
    }

    pub fn sensors(&self) -> usize {
        self.signals.len()
    }

    pub fn generate(&self, samples: usize, seed: u64) -> SensorMatrix {
        assert!(self.noise_std >= 0.0 && (0.0..1.0).contains(&self.missing_rate));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, self.noise_std).expect("finite noise std");
        let cols = self.sensors();
        let mut m = SensorMatrix::empty(samples, cols);
        for t in 0..samples {
            for (j, s) in self.signals.iter().enumerate() {
                let mut v = s.at(t);
                if self.noise_std > 0.0 {
                    v += noise.sample(&mut rng);
                }
                if self.missing_rate > 0.0 && rng.random::<f64>() < self.missing_rate {
                    continue;
                }
                m.set(t, j, v);
            }
        }
        m.recompute_means();
        m
    }
}
