//! Command-line front end: offline training, online compression and
//! decompression, benchmark sweeps and energy reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::autoencoder::{self, read_params, write_params, AutoencoderParams, Grid, Hyperparams, Variant};
use crate::baselines::{self, DctPlan};
use crate::codec::{self, CompressedFrame, ErrorBound};
use crate::dataset::{self, DynamicRange, SensorMatrix, SyntheticModel, VectorLayout, VectorMode};
use crate::energy::{savings_report, CpuCostTable, EnergyOptions, RadioModel};
use crate::metrics::{self, AccountingMode, RAW_BITS_PER_VALUE};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Invariant(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Data(m) => write!(f, "data error: {m}"),
            Self::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "sensorpress", version, about = "Error-bounded autoencoder compression for sensor data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an autoencoder and write its parameter file.
    Train(TrainArgs),
    /// Compress a dataset into a stream of frames.
    Compress(CompressArgs),
    /// Rebuild readings from a stream of frames.
    Decompress(DecompressArgs),
    /// Sweep codecs over K or the error bound and emit a CSV report.
    Bench(BenchArgs),
    /// Report compressed versus raw relaying energy per hop count.
    Energy(EnergyArgs),
    /// Compress, serialize, parse and decompress, then check the error bound.
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Spatial,
    Temporal,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV of `time_index,sensor_id,value` rows with 1-based indices.
    /// Synthetic data is generated when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Number of sensors in the CSV.
    #[arg(long)]
    pub sensors: Option<usize>,
    /// Number of time instants (CSV or synthetic).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = Preset::Spatial)]
    pub synthetic: Preset,
    /// Probability that a synthetic reading is missing.
    #[arg(long, default_value_t = 0.0)]
    pub missing: f64,
    /// temporal or spatial; defaults to the preset's mode.
    #[arg(long)]
    pub mode: Option<VectorMode>,
    /// Samples per temporal vector.
    #[arg(long, default_value_t = 720)]
    pub window: usize,
    /// Lower bound of the valid magnitude range.
    #[arg(long, requires = "phi2")]
    pub phi1: Option<f64>,
    /// Upper bound of the valid magnitude range.
    #[arg(long, requires = "phi1")]
    pub phi2: Option<f64>,
    #[arg(long, env = "SENSORPRESS_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl DataArgs {
    fn mode(&self) -> VectorMode {
        self.mode.unwrap_or(match self.synthetic {
            _ if self.input.is_some() => VectorMode::Spatial,
            Preset::Spatial => VectorMode::Spatial,
            Preset::Temporal => VectorMode::Temporal,
        })
    }

    fn load(&self) -> Result<SensorMatrix> {
        let m = match &self.input {
            Some(path) => {
                let (Some(sensors), Some(samples)) = (self.sensors, self.samples) else {
                    return Err(CliError::Usage("--input needs --sensors and --samples".into()));
                };
                dataset::ingest_csv(path, sensors, samples).map_err(data_err)?
            }
            None => {
                if !(0.0..1.0).contains(&self.missing) {
                    return Err(CliError::Usage(format!("--missing {} must lie in [0, 1)", self.missing)));
                }
                let (mut model, samples) = match self.synthetic {
                    Preset::Spatial => (SyntheticModel::spatial_preset(self.seed), 1440),
                    Preset::Temporal => (SyntheticModel::temporal_preset(self.seed), 720 * 30),
                };
                model.missing_rate = self.missing;
                model.generate(self.samples.unwrap_or(samples), self.seed.wrapping_add(1))
            }
        };
        match (self.phi1, self.phi2) {
            (Some(a), Some(b)) => {
                let range = DynamicRange::new(a, b).map_err(|e| CliError::Usage(e.to_string()))?;
                Ok(dataset::filter_outliers(&m, range))
            }
            _ => Ok(m),
        }
    }

    /// All vectors, imputed with the matrix's own column means.
    fn vectors(&self) -> Result<(Vec<Vec<f64>>, VectorLayout)> {
        let m = self.load()?;
        let full = dataset::impute_missing(&m).map_err(data_err)?;
        let layout = VectorLayout::new(self.mode(), m.rows(), m.cols(), self.window).map_err(data_err)?;
        let v = dataset::make_vectors(&full, self.mode(), self.window).map_err(data_err)?;
        Ok((v, layout))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value = "ae")]
    pub variant: Variant,
    /// Hidden units K.
    #[arg(long, default_value_t = 10)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub rho: f64,
    #[arg(long, default_value_t = 400)]
    pub max_iters: usize,
    /// Cross-validation folds; one fold is held out for testing.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub test_fold: usize,
}

impl ModelArgs {
    fn hyperparams(&self, seed: u64) -> Hyperparams {
        Hyperparams {
            variant: self.variant,
            alpha: self.alpha,
            beta: self.beta,
            rho: self.rho,
            hidden: self.hidden,
            max_iters: self.max_iters,
            seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Candidate alphas for the grid search (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub grid_alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub grid_beta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub grid_rho: Vec<f64>,
    /// Parameter file to write.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompressArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub params: PathBuf,
    /// Error bound; `inf` disables the residual stage.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub epsilon: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DecompressArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long)]
    pub mode: VectorMode,
    /// Sensors in the original matrix (temporal mode).
    #[arg(long)]
    pub sensors: Option<usize>,
    /// CSV of `time_index,sensor_id,value` rows.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Codecs to run: ae, ltc, paa, pca, dct.
    #[arg(long, value_delimiter = ',', default_value = "ae,ltc,paa,pca,dct")]
    pub codecs: Vec<String>,
    /// K values for the unbounded sweep; defaults to --hidden.
    #[arg(long, value_delimiter = ',')]
    pub k_sweep: Vec<usize>,
    /// Error bounds for the bounded sweep (AE at --hidden, and LTC). When
    /// given, the K sweep is skipped.
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Vec<f64>,
    /// Report path; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    /// Readings per data vector.
    #[arg(long = "L")]
    pub l: u64,
    /// Hidden units.
    #[arg(long = "K")]
    pub k: u64,
    /// Hop counts: `1..H`, a single value, or a comma list.
    #[arg(long, default_value = "1..10")]
    pub hops: String,
    /// Emit CSV instead of an aligned table.
    #[arg(long)]
    pub csv: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also charge the residual stage's CPU cost.
    #[arg(long)]
    pub residual_stage: bool,
    #[arg(long)]
    pub vcc: Option<f64>,
    #[arg(long)]
    pub itx: Option<f64>,
    #[arg(long)]
    pub irx: Option<f64>,
    /// Radio data rate, bit/s.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub imcu: Option<f64>,
    #[arg(long)]
    pub fclk: Option<f64>,
    #[arg(long)]
    pub cyc_add: Option<u64>,
    #[arg(long)]
    pub cyc_sub: Option<u64>,
    #[arg(long)]
    pub cyc_mul: Option<u64>,
    #[arg(long)]
    pub cyc_div: Option<u64>,
    #[arg(long)]
    pub cyc_cmp: Option<u64>,
    #[arg(long)]
    pub cyc_exp: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct RoundtripArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Trained parameters; a model is trained on the data when absent.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Existing frame stream to check instead of compressing in memory.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
}

/// Parses `args` (including the program name), runs the command and maps the
/// outcome to an exit code.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(&a),
        Command::Compress(a) => cmd_compress(&a),
        Command::Decompress(a) => cmd_decompress(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Energy(a) => cmd_energy(&a),
        Command::Roundtrip(a) => cmd_roundtrip(&a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_params(path: &Path) -> Result<AutoencoderParams> {
    let f = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    read_params(std::io::BufReader::new(f)).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

fn raw_rmse(params: &AutoencoderParams, vectors: &[Vec<f64>]) -> Result<f64> {
    if vectors.is_empty() {
        return Ok(f64::NAN);
    }
    let mut total = 0.0;
    for x in vectors {
        let f = codec::compress(&to_f32(x), params, ErrorBound::Unbounded).map_err(data_err)?;
        let xh: Vec<f64> = codec::decompress(&f, params).map_err(data_err)?.into_iter().map(f64::from).collect();
        total += metrics::rmse(x, &xh).map_err(data_err)?;
    }
    Ok(total / vectors.len() as f64)
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let m = a.data.load()?;
    let split = dataset::prepare_split(&m, a.data.mode(), a.data.window, a.model.folds, a.data.seed, a.model.test_fold)
        .map_err(data_err)?;
    let mut hp = a.model.hyperparams(a.data.seed);
    if !(a.grid_alpha.is_empty() && a.grid_beta.is_empty() && a.grid_rho.is_empty()) {
        let pick = |g: &[f64], v: f64| if g.is_empty() { vec![v] } else { g.to_vec() };
        let grid = Grid {
            alpha: pick(&a.grid_alpha, hp.alpha),
            beta: pick(&a.grid_beta, hp.beta),
            rho: pick(&a.grid_rho, hp.rho),
        };
        let scale = crate::sphering::fit_sigma(&split.train).map_err(data_err)?;
        let normalized = autoencoder::normalize_all(&split.train, scale);
        let result = autoencoder::grid_search(&normalized, &hp, &grid, a.model.folds, a.data.seed).map_err(data_err)?;
        for p in &result.evaluated {
            eprintln!(
                "cv alpha={} beta={} rho={} rmse={:.6}",
                p.hp.alpha, p.hp.beta, p.hp.rho, p.cv_rmse
            );
        }
        hp = result.best;
        eprintln!("selected alpha={} beta={} rho={}", hp.alpha, hp.beta, hp.rho);
    }
    let (params, trace) = autoencoder::fit(&split.train, &split.test, &hp).map_err(data_err)?;
    let mut w = create(&a.output)?;
    write_params(&params, &mut w)
        .and_then(|_| w.flush())
        .map_err(data_err)?;
    println!(
        "iterations={} stop={:?} train_rmse={:.6} test_rmse={:.6} test_rmse_raw={:.6}",
        trace.iterations(),
        trace.stop,
        trace.train_rmse.last().copied().unwrap_or(trace.initial_train_rmse),
        trace.test_rmse.last().copied().unwrap_or(f64::NAN),
        raw_rmse(&params, &split.test)?,
    );
    Ok(())
}

fn bound(epsilon: f64) -> Result<ErrorBound> {
    ErrorBound::from_f64(epsilon).ok_or_else(|| CliError::Usage(format!("--epsilon {epsilon} must be >= 0 or inf")))
}

pub fn cmd_compress(a: &CompressArgs) -> Result<()> {
    let params = load_params(&a.params)?;
    let bound = bound(a.epsilon)?;
    let (vectors, _) = a.data.vectors()?;
    let mut w = create(&a.output)?;
    let mut bytes = 0usize;
    for x in &vectors {
        let f = codec::compress(&to_f32(x), &params, bound).map_err(data_err)?;
        let b = codec::serialize(&f);
        bytes += b.len();
        w.write_all(&b).map_err(data_err)?;
    }
    w.flush().map_err(data_err)?;
    let raw = vectors.len() * params.inputs() * 4;
    println!(
        "frames={} bytes={} cr_percent={:.4}",
        vectors.len(),
        bytes,
        100.0 * bytes as f64 / raw as f64
    );
    Ok(())
}

fn read_frames(path: &Path, params: &AutoencoderParams) -> Result<Vec<CompressedFrame>> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut at = 0;
    let mut frames = Vec::new();
    while at < bytes.len() {
        let (f, used) = codec::deserialize_prefix(&bytes[at..], params.inputs(), params.hidden())
            .map_err(|e| CliError::Data(format!("frame {} at byte {at}: {e}", frames.len())))?;
        frames.push(f);
        at += used;
    }
    Ok(frames)
}

pub fn cmd_decompress(a: &DecompressArgs) -> Result<()> {
    let params = load_params(&a.params)?;
    let frames = read_frames(&a.frames, &params)?;
    let l = params.inputs();
    let layout = match a.mode {
        VectorMode::Spatial => VectorLayout::new(VectorMode::Spatial, frames.len(), l, l),
        VectorMode::Temporal => {
            let sensors = a
                .sensors
                .ok_or_else(|| CliError::Usage("temporal mode needs --sensors".into()))?;
            if sensors == 0 || frames.len() % sensors != 0 {
                return Err(CliError::Data(format!(
                    "{} frames do not split evenly over {sensors} sensors",
                    frames.len()
                )));
            }
            VectorLayout::new(VectorMode::Temporal, frames.len() / sensors * l, sensors, l)
        }
    }
    .map_err(data_err)?;
    let mut cells = Vec::with_capacity(frames.len() * l);
    for (v, f) in frames.iter().enumerate() {
        let xh = codec::decompress(f, &params).map_err(data_err)?;
        cells.extend(layout.cells(v).zip(xh));
    }
    cells.sort_by_key(|&((i, j), _)| (i, j));
    let mut w = csv::Writer::from_writer(create(&a.output)?);
    for ((i, j), v) in cells {
        w.write_record([(i + 1).to_string(), (j + 1).to_string(), v.to_string()])
            .map_err(data_err)?;
    }
    w.flush().map_err(data_err)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub codec: String,
    pub mode: AccountingMode,
    pub epsilon: f64,
    pub cr_percent: f64,
    pub savings_percent: f64,
    pub rmse: f64,
    pub r2: f64,
    pub bits_tx: u64,
    pub bits_raw: u64,
}

const CODECS: [&str; 5] = ["ae", "ltc", "paa", "pca", "dct"];

#[derive(Debug, Clone, Copy)]
enum Setting<'a> {
    Unbounded { codec: &'a str, k: usize },
    Bounded { codec: &'a str, k: usize, eps: f64 },
}

struct Tally {
    bits: [u64; 2],
    rmse: f64,
    r2: f64,
    r2_count: usize,
    n: usize,
}

impl Tally {
    fn new() -> Self {
        Self {
            bits: [0; 2],
            rmse: 0.0,
            r2: 0.0,
            r2_count: 0,
            n: 0,
        }
    }

    fn add(&mut self, x: &[f64], xh: &[f64], full: u64, payload: u64) -> Result<()> {
        let f = metrics::fidelity(x, xh).map_err(data_err)?;
        self.rmse += f.rmse;
        if let Some(r) = f.r_squared {
            self.r2 += r;
            self.r2_count += 1;
        }
        self.n += 1;
        self.bits[0] += full;
        self.bits[1] += payload;
        Ok(())
    }

    fn row(&self, codec: &str, mode: AccountingMode, epsilon: f64, bits_raw: u64) -> BenchRow {
        let bits_tx = self.bits[(mode == AccountingMode::PayloadOnly) as usize];
        let rate = metrics::RateReport::new(bits_tx, bits_raw, mode);
        BenchRow {
            codec: codec.to_string(),
            mode,
            epsilon,
            cr_percent: rate.cr_percent,
            savings_percent: rate.savings_percent(),
            rmse: self.rmse / self.n as f64,
            r2: if self.r2_count == 0 { f64::NAN } else { self.r2 / self.r2_count as f64 },
            bits_tx,
            bits_raw,
        }
    }
}

/// Runs the sweep on held-out vectors and returns rows in declared order.
pub fn bench_rows(a: &BenchArgs) -> Result<Vec<BenchRow>> {
    let codecs: Vec<&str> = a.codecs.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if codecs.is_empty() {
        return Err(CliError::Usage("no codecs selected".into()));
    }
    if let Some(bad) = codecs.iter().find(|c| !CODECS.contains(c)) {
        return Err(CliError::Usage(format!("unknown codec {bad:?}")));
    }
    let m = a.data.load()?;
    let split = dataset::prepare_split(&m, a.data.mode(), a.data.window, a.model.folds, a.data.seed, a.model.test_fold)
        .map_err(data_err)?;
    let l = split.layout.len;

    let mut settings = Vec::new();
    if a.epsilons.is_empty() {
        let ks = if a.k_sweep.is_empty() { vec![a.model.hidden] } else { a.k_sweep.clone() };
        for &k in &ks {
            if k == 0 || k >= l {
                return Err(CliError::Usage(format!("K={k} must lie in 1..{l}")));
            }
            for &codec in codecs.iter().filter(|c| **c != "ltc") {
                settings.push(Setting::Unbounded { codec, k });
            }
        }
    } else {
        for &eps in &a.epsilons {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(CliError::Usage(format!("epsilon {eps} must be finite and >= 0")));
            }
            for &codec in codecs.iter().filter(|c| matches!(**c, "ae" | "ltc")) {
                settings.push(Setting::Bounded {
                    codec,
                    k: a.model.hidden,
                    eps,
                });
            }
        }
    }

    let mut ae_ks: Vec<usize> = settings
        .iter()
        .filter_map(|s| match *s {
            Setting::Unbounded { codec: "ae", k } | Setting::Bounded { codec: "ae", k, .. } => Some(k),
            _ => None,
        })
        .collect();
    ae_ks.sort_unstable();
    ae_ks.dedup();
    let models: Vec<(usize, AutoencoderParams)> = ae_ks
        .par_iter()
        .map(|&k| {
            let hp = Hyperparams {
                hidden: k,
                ..a.model.hyperparams(a.data.seed)
            };
            autoencoder::fit(&split.train, &[] as &[Vec<f64>], &hp)
                .map(|(p, _)| (k, p))
                .map_err(data_err)
        })
        .collect::<Result<_>>()?;
    let plan = DctPlan::new(l);
    let test = &split.test;
    let bits_raw = RAW_BITS_PER_VALUE * (l * test.len()) as u64;

    let rows: Vec<Vec<BenchRow>> = settings
        .par_iter()
        .map(|s| -> Result<Vec<BenchRow>> {
            let mut t = Tally::new();
            let (codec, eps) = match *s {
                Setting::Unbounded { codec, k } => {
                    match codec {
                        "ae" => {
                            let p = &models.iter().find(|(mk, _)| *mk == k).unwrap().1;
                            ae_tally(&mut t, test, p, ErrorBound::Unbounded)?;
                        }
                        "pca" => {
                            let basis = baselines::pca_fit(&split.train, k).map_err(data_err)?;
                            for x in test {
                                let xh = basis
                                    .decompress(&basis.compress(x).map_err(data_err)?)
                                    .map_err(data_err)?;
                                t.add(x, &xh, basis.bits(), basis.bits())?;
                            }
                        }
                        "dct" => {
                            for x in test {
                                let code = baselines::dct_compress(&plan, x, k).map_err(data_err)?;
                                let xh = baselines::dct_decompress(&plan, &code).map_err(data_err)?;
                                t.add(x, &xh, baselines::dct_bits(l, k), 32 * k as u64)?;
                            }
                        }
                        "paa" => {
                            let frame = l.div_ceil(k);
                            for x in test {
                                let means = baselines::paa_compress(x, frame).map_err(data_err)?;
                                let xh = baselines::paa_decompress(&means, frame, l).map_err(data_err)?;
                                let bits = baselines::paa_bits(l, frame);
                                t.add(x, &xh, bits, bits)?;
                            }
                        }
                        _ => unreachable!(),
                    }
                    (codec, f64::INFINITY)
                }
                Setting::Bounded { codec, k, eps } => {
                    match codec {
                        "ae" => {
                            let p = &models.iter().find(|(mk, _)| *mk == k).unwrap().1;
                            ae_tally(&mut t, test, p, ErrorBound::Bounded(eps))?;
                        }
                        "ltc" => {
                            for x in test {
                                let segs = baselines::ltc_compress(x, eps).map_err(data_err)?;
                                let xh = baselines::ltc_decompress(&segs, l).map_err(data_err)?;
                                let bits = baselines::ltc_bits(&segs);
                                t.add(x, &xh, bits, bits)?;
                            }
                        }
                        _ => unreachable!(),
                    }
                    (codec, eps)
                }
            };
            let mut out = vec![t.row(codec, AccountingMode::FullFrame, eps, bits_raw)];
            if codec == "ae" {
                out.push(t.row(codec, AccountingMode::PayloadOnly, eps, bits_raw));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn ae_tally(t: &mut Tally, test: &[Vec<f64>], p: &AutoencoderParams, bound: ErrorBound) -> Result<()> {
    for x in test {
        let f = codec::compress(&to_f32(x), p, bound).map_err(data_err)?;
        let xh: Vec<f64> = codec::decompress(&f, p).map_err(data_err)?.into_iter().map(f64::from).collect();
        t.add(x, &xh, codec::frame_bits(&f), RAW_BITS_PER_VALUE * f.hidden() as u64)?;
    }
    Ok(())
}

pub fn write_bench_csv(rows: &[BenchRow], w: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "codec",
        "mode",
        "epsilon",
        "cr_percent",
        "savings_percent",
        "rmse",
        "r2",
        "bits_tx",
        "bits_raw",
    ])
    .map_err(data_err)?;
    for r in rows {
        w.write_record([
            r.codec.clone(),
            r.mode.to_string(),
            r.epsilon.to_string(),
            r.cr_percent.to_string(),
            r.savings_percent.to_string(),
            r.rmse.to_string(),
            r.r2.to_string(),
            r.bits_tx.to_string(),
            r.bits_raw.to_string(),
        ])
        .map_err(data_err)?;
    }
    w.flush().map_err(data_err)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let rows = bench_rows(a)?;
    match &a.output {
        Some(p) => write_bench_csv(&rows, create(p)?),
        None => write_bench_csv(&rows, std::io::stdout().lock()),
    }
}

/// Parses `1..H` (inclusive), a single count or a comma list.
pub fn parse_hops(s: &str) -> Result<Vec<u64>> {
    let bad = || CliError::Usage(format!("invalid --hops {s:?}"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    let hops = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if hops.is_empty() || hops.contains(&0) {
        return Err(bad());
    }
    Ok(hops)
}

pub fn cmd_energy(a: &EnergyArgs) -> Result<()> {
    let hops = parse_hops(&a.hops)?;
    let d = RadioModel::default();
    let model = RadioModel {
        v_cc: a.vcc.unwrap_or(d.v_cc),
        i_tx: a.itx.unwrap_or(d.i_tx),
        i_rx: a.irx.unwrap_or(d.i_rx),
        data_rate: a.rate.unwrap_or(d.data_rate),
        i_mcu: a.imcu.unwrap_or(d.i_mcu),
        f_clk: a.fclk.unwrap_or(d.f_clk),
    };
    if !(model.data_rate > 0.0 && model.f_clk > 0.0) {
        return Err(CliError::Usage("--rate and --fclk must be positive".into()));
    }
    let t = CpuCostTable::default();
    let table = CpuCostTable {
        add: a.cyc_add.unwrap_or(t.add),
        sub: a.cyc_sub.unwrap_or(t.sub),
        mul: a.cyc_mul.unwrap_or(t.mul),
        div: a.cyc_div.unwrap_or(t.div),
        cmp: a.cyc_cmp.unwrap_or(t.cmp),
        exp: a.cyc_exp.unwrap_or(t.exp),
    };
    let rows = savings_report(
        a.l,
        a.k,
        &hops,
        &EnergyOptions {
            model,
            table,
            residual_stage: a.residual_stage,
        },
    );
    let mut out: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    if a.csv {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["hops", "e_raw_j", "e_compressed_j", "ratio", "worthwhile"])
            .map_err(data_err)?;
        for r in &rows {
            w.write_record([
                r.hops.to_string(),
                r.e_raw.to_string(),
                r.e_compressed.to_string(),
                r.ratio.to_string(),
                r.worthwhile().to_string(),
            ])
            .map_err(data_err)?;
        }
        w.flush().map_err(data_err)
    } else {
        let mut body = format!("{:>5} {:>12} {:>14} {:>8}\n", "hops", "e_raw_J", "e_compressed_J", "ratio");
        for r in &rows {
            body += &format!(
                "{:>5} {:>12.6} {:>14.6} {:>8.4}{}\n",
                r.hops,
                r.e_raw,
                r.e_compressed,
                r.ratio,
                if r.worthwhile() { "" } else { "  compression not worthwhile" }
            );
        }
        out.write_all(body.as_bytes())
            .and_then(|_| out.flush())
            .map_err(data_err)
    }
}

pub fn cmd_roundtrip(a: &RoundtripArgs) -> Result<()> {
    let bound = match bound(a.epsilon)? {
        ErrorBound::Unbounded => return Err(CliError::Usage("roundtrip needs a finite --epsilon".into())),
        b => b,
    };
    let (vectors, _) = a.data.vectors()?;
    let params = match &a.params {
        Some(p) => load_params(p)?,
        None => {
            let hp = a.model.hyperparams(a.data.seed);
            autoencoder::fit(&vectors, &[] as &[Vec<f64>], &hp).map_err(data_err)?.0
        }
    };
    let frames = match &a.frames {
        Some(p) => read_frames(p, &params)?,
        None => {
            let mut stream = Vec::new();
            for x in &vectors {
                let f = codec::compress(&to_f32(x), &params, bound).map_err(data_err)?;
                stream.extend(codec::serialize(&f));
            }
            let mut at = 0;
            let mut frames = Vec::new();
            while at < stream.len() {
                let (f, used) =
                    codec::deserialize_prefix(&stream[at..], params.inputs(), params.hidden()).map_err(data_err)?;
                frames.push(f);
                at += used;
            }
            frames
        }
    };
    if frames.len() != vectors.len() {
        return Err(CliError::Data(format!(
            "{} frames for {} vectors",
            frames.len(),
            vectors.len()
        )));
    }
    let eps = bound.epsilon();
    let mut worst = 0.0f64;
    let mut violations = 0usize;
    for (x, f) in vectors.iter().zip(&frames) {
        let xh = codec::decompress(f, &params).map_err(data_err)?;
        for (&a, &b) in to_f32(x).iter().zip(&xh) {
            let e = (a as f64 - b as f64).abs();
            worst = worst.max(e);
            violations += usize::from(e > eps);
        }
    }
    println!("vectors={} epsilon={eps} max_error={worst:e} violations={violations}", vectors.len());
    if violations > 0 {
        return Err(CliError::Invariant(format!(
            "{violations} entries exceed epsilon {eps} (max error {worst:e})"
        )));
    }
    Ok(())
}
