use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use spectral_tensor::anisotropy::{classical_index, AnisoIndexKind};
use spectral_tensor::format::fmt_f64;
use spectral_tensor::interpolation::interpolate_grid;
use spectral_tensor::render::{self, scenes, Glyph};
use spectral_tensor::{
    aniso_sweep, bench_distances, distance, interp_curve, mean_affine_invariant, mean_log_euclidean, mean_n,
    mean_pair, read_field, read_tensors, resample_field, spectral_decompose, sweep_distances, write_field,
    DiffusionTensor, KParams, KarcherOptions, MetricKind, SpectralForm, SweepMode, TensorError, TensorField,
    WeightedTensorSet,
};

#[derive(Parser, Debug)]
#[command(name = "spectral-tensor", version, about = "Diffusion tensor distances, means and interpolation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Distance or mean to use.
    #[arg(long, global = true, value_enum, default_value_t = Metric::Sq)]
    metric: Metric,
    #[arg(long, global = true, default_value_t = 3.0)]
    k_slope: f64,
    #[arg(long, global = true, default_value_t = 7.0)]
    k_offset: f64,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output file; standard output when absent (required for dtf and svg).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Metric {
    Ai,
    Le,
    SpectralRot,
    Sq,
}

impl From<Metric> for MetricKind {
    fn from(m: Metric) -> Self {
        match m {
            Metric::Ai => MetricKind::AffineInvariant,
            Metric::Le => MetricKind::LogEuclidean,
            Metric::SpectralRot => MetricKind::SpectralRotation,
            Metric::Sq => MetricKind::SpectralQuaternion,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Dtf,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Coloring {
    Ha,
    Fa,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Scene {
    /// Two cigars crossing at `--angle` degrees and their mean.
    Crossing,
    /// Endpoints of the interpolation curve and `--steps` samples.
    Curve,
    /// Four equal-anisotropy corners on a `--size` grid.
    Corners,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Eigenvalues,
    Angle,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distances between paired tensors of two files (a single tensor in B is
    /// compared with every tensor of A).
    Dist { a: PathBuf, b: PathBuf },
    /// Weighted mean of the tensors of a file.
    Mean {
        input: PathBuf,
        /// Comma-separated weights (uniform when absent); normalized to sum 1.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Samples of the weighted-mean curve between the first tensors of two files.
    Interp {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// Interpolates 4 (square) or 8 (cube) corner tensors on a regular grid.
    GridInterp {
        corners: PathBuf,
        #[arg(long, default_value_t = 11)]
        size: usize,
    },
    /// Resamples a field file to new dimensions.
    Resample {
        input: PathBuf,
        /// New dimensions as nx,ny,nz.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
    /// HA, FA, RA and GA of every tensor of a file.
    Aniso { input: PathBuf },
    /// Indices along eigenvalues (t, (1 - t)/2, (1 - t)/2).
    AnisoSweep {
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Distances of a smoothly varied tensor to the central one, all metrics.
    Sweep {
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
    /// Times n distances per metric on Wishart samples.
    Bench {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
    },
    /// SVG ellipse glyphs of a file's tensors or of a built-in scene.
    Render {
        /// Tensor list or field file (slice `--slice` of a field).
        input: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "input")]
        scene: Option<Scene>,
        #[arg(long, value_enum, default_value_t = Coloring::Ha)]
        color: Coloring,
        #[arg(long, default_value_t = 0)]
        slice: usize,
        #[arg(long, default_value_t = 60.0)]
        angle: f64,
        #[arg(long, default_value_t = 7)]
        steps: usize,
        #[arg(long, default_value_t = 5)]
        size: usize,
    },
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<TensorError> for CliError {
    fn from(e: TensorError) -> Self {
        match e {
            TensorError::UnsupportedMetric(_) | TensorError::InvalidParameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let code = run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}

/// Parses `args` and runs the command. Returns 0 on success, 1 on usage
/// errors and 2 on data errors.
fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if shown {
                let _ = write!(stdout, "{text}");
                return 0;
            }
            let _ = write!(stderr, "{text}");
            return 1;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            1
        }
        Err(CliError::Data(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            2
        }
    }
}

fn k_params(c: &Common) -> CliResult<KParams> {
    Ok(KParams::new(c.k_slope, c.k_offset)?)
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let c = &cli.common;
    let metric = MetricKind::from(c.metric);
    let p = k_params(c)?;
    match &cli.command {
        Command::Dist { a, b } => {
            let ta = read_tensors(a)?;
            let tb = read_tensors(b)?;
            if tb.len() != ta.len() && tb.len() != 1 {
                return Err(CliError::Data(format!(
                    "{} tensors in {} but {} in {}",
                    ta.len(),
                    a.display(),
                    tb.len(),
                    b.display()
                )));
            }
            let d = ta
                .iter()
                .enumerate()
                .map(|(i, x)| distance(metric, x, &tb[if tb.len() == 1 { 0 } else { i }], &p))
                .collect::<Result<Vec<_>, _>>()?;
            let rows: Vec<Vec<f64>> = d.iter().map(|v| vec![*v]).collect();
            emit_table(c, stdout, &["distance"], &rows)
        }
        Command::Mean { input, weights } => {
            let tensors = read_tensors(input)?;
            let w = weights.clone().unwrap_or_else(|| vec![1.0; tensors.len()]);
            let forms: Vec<SpectralForm> = tensors.iter().map(spectral_decompose).collect();
            let set = WeightedTensorSet::normalized(forms, &w)?;
            let m = weighted_mean(&set, metric, &p)?;
            let rows = vec![tensor_row(&m)];
            emit_table(c, stdout, &TENSOR_COLUMNS, &rows)
        }
        Command::Interp { a, b, steps } => {
            let s1 = spectral_decompose(&first(a)?);
            let s2 = spectral_decompose(&first(b)?);
            let curve = interp_curve(&s1, &s2, *steps, metric)?;
            if c.format == Some(Format::Dtf) {
                let f = TensorField::new([curve.len(), 1, 1], [1.0; 3], curve)?;
                return write_dtf(c, &f);
            }
            let rows: Vec<Vec<f64>> = curve
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let mut r = vec![i as f64 / (steps - 1) as f64];
                    r.extend(tensor_row(t));
                    r
                })
                .collect();
            let mut header = vec!["t"];
            header.extend(TENSOR_COLUMNS);
            emit_table(c, stdout, &header, &rows)
        }
        Command::GridInterp { corners, size } => {
            let tensors = read_tensors(corners)?;
            let forms: Vec<SpectralForm> = tensors.iter().map(spectral_decompose).collect();
            let f = grid_field(&forms, *size, metric, &p)?;
            match c.format {
                Some(Format::Dtf) => write_dtf(c, &f),
                Some(Format::Svg) => {
                    let glyphs = render::slice_glyphs(&f, 0)?;
                    write_svg(c, &glyphs, AnisoIndexKind::HA)
                }
                _ => {
                    let [nx, ny, _] = f.dims();
                    let denom = (*size - 1).max(1) as f64;
                    let rows: Vec<Vec<f64>> = f
                        .voxels()
                        .iter()
                        .enumerate()
                        .map(|(i, t)| {
                            let ijk = [i % nx, (i / nx) % ny, i / (nx * ny)];
                            let mut r: Vec<f64> = ijk.iter().map(|&v| v as f64 / denom).collect();
                            r.extend(tensor_row(t));
                            r
                        })
                        .collect();
                    let mut header = vec!["x", "y", "z"];
                    header.extend(TENSOR_COLUMNS);
                    emit_table(c, stdout, &header, &rows)
                }
            }
        }
        Command::Resample { input, dims } => {
            let f = read_field(input)?;
            let new_dims: [usize; 3] = dims
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Usage("--dims needs three values".into()))?;
            let out = resample_field(&f, new_dims, metric, &p)?;
            write_dtf(c, &out)
        }
        Command::Aniso { input } => {
            let rows: Vec<Vec<f64>> = read_tensors(input)?
                .iter()
                .map(|t| {
                    let l = t.eigenvalues();
                    AnisoIndexKind::ALL.iter().map(|k| classical_index(*k, l)).collect()
                })
                .collect();
            emit_table(c, stdout, &["HA", "FA", "RA", "GA"], &rows)
        }
        Command::AnisoSweep { steps } => {
            let rows: Vec<Vec<f64>> = aniso_sweep(*steps)?
                .iter()
                .map(|r| vec![r.t, r.ha, r.fa, r.ra, r.ga])
                .collect();
            emit_table(c, stdout, &["t", "HA", "FA", "RA", "GA"], &rows)
        }
        Command::Sweep { mode, steps } => {
            let mode = match mode {
                Mode::Eigenvalues => SweepMode::Eigenvalues,
                Mode::Angle => SweepMode::Angle,
                Mode::Both => SweepMode::Both,
            };
            let rows: Vec<Vec<f64>> = sweep_distances(mode, *steps, &p)?
                .iter()
                .map(|r| vec![r.param, r.angle_deg, r.ai, r.le, r.spectral_rot, r.sq])
                .collect();
            emit_table(c, stdout, &["param", "angle_deg", "ai", "le", "spectral_rot", "sq"], &rows)
        }
        Command::Bench { n, repetitions } => {
            let report = bench_distances(c.seed, *n, *repetitions)?;
            if c.format == Some(Format::Json) {
                let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
                return write_out(c, stdout, &(text + "\n"));
            }
            let mut s = String::from("metric,seconds\n");
            for t in &report.timings {
                s.push_str(&format!("{},{}\n", t.metric.flag(), fmt_f64(t.seconds)));
            }
            write_out(c, stdout, &s)
        }
        Command::Render {
            input,
            scene,
            color,
            slice,
            angle,
            steps,
            size,
        } => {
            let coloring = match color {
                Coloring::Ha => AnisoIndexKind::HA,
                Coloring::Fa => AnisoIndexKind::FA,
            };
            let glyphs = match (input, scene) {
                (Some(path), _) => render_input(path, *slice)?,
                (None, Some(scene)) => scene_glyphs(*scene, metric, &p, *angle, *steps, *size)?,
                (None, None) => return Err(CliError::Usage("render needs an input file or --scene".into())),
            };
            write_svg(c, &glyphs, coloring)
        }
    }
}

const TENSOR_COLUMNS: [&str; 8] = ["dxx", "dxy", "dxz", "dyy", "dyz", "dzz", "HA", "det"];

fn tensor_row(t: &DiffusionTensor) -> Vec<f64> {
    let mut r = t.components().to_vec();
    r.push(classical_index(AnisoIndexKind::HA, t.eigenvalues()));
    r.push(t.determinant());
    r
}

fn first(path: &Path) -> CliResult<DiffusionTensor> {
    read_tensors(path)?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Data(format!("no tensor in {}", path.display())))
}

fn weighted_mean(set: &WeightedTensorSet, metric: MetricKind, p: &KParams) -> CliResult<DiffusionTensor> {
    Ok(match metric {
        MetricKind::SpectralQuaternion if set.len() == 2 => {
            let (s, w) = (set.tensors(), set.weights());
            mean_pair(&s[0], &s[1], w[0], w[1])?.to_tensor()
        }
        MetricKind::SpectralQuaternion => mean_n(set, p).to_tensor(),
        MetricKind::LogEuclidean => mean_log_euclidean(set),
        MetricKind::AffineInvariant => mean_affine_invariant(set, KarcherOptions::default())?,
        MetricKind::SpectralRotation => return Err(TensorError::UnsupportedMetric("spectral-rot").into()),
    })
}

fn grid_field(corners: &[SpectralForm], size: usize, metric: MetricKind, p: &KParams) -> CliResult<TensorField> {
    if size < 2 {
        return Err(CliError::Usage("--size must be at least 2".into()));
    }
    let nz = match corners.len() {
        4 => 1,
        8 => size,
        n => return Err(CliError::Data(format!("grid interpolation needs 4 or 8 corners, got {n}"))),
    };
    let step = 1.0 / (size - 1) as f64;
    let mut voxels = Vec::with_capacity(size * size * nz);
    for k in 0..nz {
        for j in 0..size {
            for i in 0..size {
                let x = [i as f64 * step, j as f64 * step, k as f64 * step];
                voxels.push(interpolate_grid(corners, x, metric, p)?);
            }
        }
    }
    Ok(TensorField::new([size, size, nz], [1.0; 3], voxels)?)
}

fn render_input(path: &Path, slice: usize) -> CliResult<Vec<Glyph>> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(spectral_tensor::field::MAGIC) || bytes.starts_with(spectral_tensor::field::TEXT_HEADER.as_bytes()) {
        let f = read_field(path)?;
        return Ok(render::slice_glyphs(&f, slice)?);
    }
    Ok(render::row_glyphs(&read_tensors(path)?))
}

fn scene_glyphs(scene: Scene, metric: MetricKind, p: &KParams, angle: f64, steps: usize, size: usize) -> CliResult<Vec<Glyph>> {
    match scene {
        Scene::Crossing => {
            let [a, b] = scenes::crossing_cigars(angle);
            let set = WeightedTensorSet::uniform(vec![spectral_decompose(&a), spectral_decompose(&b)])?;
            let m = weighted_mean(&set, metric, p)?;
            Ok(render::row_glyphs(&[a, m, b]))
        }
        Scene::Curve => {
            let [a, b] = scenes::curve_endpoints();
            let curve = interp_curve(&spectral_decompose(&a), &spectral_decompose(&b), steps, metric)?;
            Ok(render::row_glyphs(&curve))
        }
        Scene::Corners => {
            let forms: Vec<SpectralForm> = scenes::equal_ha_corners().iter().map(spectral_decompose).collect();
            let f = grid_field(&forms, size, metric, p)?;
            Ok(render::slice_glyphs(&f, 0)?)
        }
    }
}

fn emit_table(c: &Common, stdout: &mut dyn Write, header: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
    let text = match c.format {
        None | Some(Format::Csv) => {
            let mut s = header.join(",");
            s.push('\n');
            for r in rows {
                let cells: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
        Some(Format::Json) => {
            let objects: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    let map: serde_json::Map<String, serde_json::Value> = header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.to_string(), json_number(*v)))
                        .collect();
                    serde_json::Value::Object(map)
                })
                .collect();
            serde_json::to_string_pretty(&objects).map_err(|e| CliError::Data(e.to_string()))? + "\n"
        }
        Some(f) => return Err(CliError::Usage(format!("format {f:?} is not available for this command"))),
    };
    write_out(c, stdout, &text)
}

/// JSON has no infinities; they are written as strings.
fn json_number(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt_f64(v))
    }
}

fn write_out(c: &Common, stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    match &c.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn require_out(c: &Common) -> CliResult<&Path> {
    c.out
        .as_deref()
        .ok_or_else(|| CliError::Usage("this output needs --out".into()))
}

fn write_dtf(c: &Common, f: &TensorField) -> CliResult<()> {
    Ok(write_field(f, require_out(c)?)?)
}

fn write_svg(c: &Common, glyphs: &[Glyph], coloring: AnisoIndexKind) -> CliResult<()> {
    Ok(render::write_svg(glyphs, coloring, require_out(c)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (u8, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("spectral-tensor").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = run_capture(&["aniso-sweep", "--bogus"]);
        assert_eq!(code, 1);
        assert!(!err.is_empty());
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn missing_file_is_data_error() {
        assert_eq!(run_capture(&["aniso", "/nonexistent/tensors.txt"]).0, 2);
    }

    #[test]
    fn unsupported_metric_is_usage_error() {
        let (code, _, err) = run_capture(&["render", "--scene", "curve", "--metric", "spectral-rot", "--out", "/dev/null"]);
        assert_eq!(code, 1, "{err}");
    }
}
