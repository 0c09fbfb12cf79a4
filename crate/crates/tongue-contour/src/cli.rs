//! Command-line front end.
//!
//! Tunables of every subcommand form one flat JSON object whose keys are
//! the flag names with `_` for `-`. Precedence: built-in default, then
//! `--config` file, then explicit flags. The merged object is written to a
//! sidecar file and can be fed back through `--config`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tongue_contour_core::preprocess::equalize;
use tongue_contour_core::rasterize::rasterize_contour;
use tongue_contour_core::{
    crop, extract_contour, msd_px, weighted_bce, Contour, CropRect, ExtractConfig, FoldMode,
    ImageMeta, LossWeights, SynthParams,
};

use crate::contour_csv::{read_contour_csv, write_contour_csv};
use crate::corpus::{run_batch, write_synth_corpus, BatchConfig, FoldPlan};
use crate::manifest::read_manifest;
use crate::netpbm::{read_pgm, write_mask_pgm, write_pgm, write_ppm, Pgm};
use crate::overlay::overlay;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

type CliResult<T> = Result<T, CliError>;

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser)]
#[command(name = "tongue-contour", version, about = "Tongue contour extraction and evaluation")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Crop (centred by default) and histogram-equalize an 8-bit PGM.
    Preprocess(PreprocessCmd),
    /// Rasterize a contour CSV into a 0/255 mask; optionally score a map against it.
    Rasterize(RasterizeCmd),
    /// Extract an ordered contour from a probability map.
    Extract(ExtractCmd),
    /// MSD between a predicted and a ground-truth contour.
    Eval(EvalCmd),
    /// Write a synthetic corpus with a test manifest.
    Synth(SynthCmd),
    /// Evaluate every test entry of a manifest.
    Batch(BatchCmd),
    /// Paint contours over an image (PPM output).
    Overlay(OverlayCmd),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON object of settings; explicit flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Where to echo the effective settings [default: next to the output].
    #[arg(long, value_name = "FILE")]
    sidecar: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ExtractFlags {
    /// Probability cut-off for candidate points [default: 0.4]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    /// Components smaller than this are dropped [default: 3]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    min_component_size: Option<usize>,
    /// Components smaller than this fraction of the largest are dropped [default: 0.05]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rel_component_size: Option<f64>,
    /// Fixed graph connection radius in pixels [default: extremity distance - 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    connection_radius_override: Option<f64>,
    /// Zhang-Suen thinning before filtering [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    enable_thinning: Option<bool>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaSettings {
    fov_mm: f64,
    resolution: u32,
}

impl Default for MetaSettings {
    fn default() -> Self {
        let meta = ImageMeta::default();
        Self {
            fov_mm: meta.fov_mm,
            resolution: meta.acq_resolution,
        }
    }
}

impl MetaSettings {
    fn meta(self) -> CliResult<ImageMeta> {
        ImageMeta::new(self.fov_mm, self.resolution).map_err(usage)
    }
}

#[derive(Args, Serialize)]
struct MetaFlags {
    /// Field of view in millimetres [default: 192]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    fov_mm: Option<f64>,
    /// Acquisition matrix size in pixels [default: 136]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<u32>,
}

#[derive(Args)]
struct PreprocessCmd {
    #[arg(long = "in", value_name = "PGM")]
    input: PathBuf,
    #[arg(long, value_name = "PGM")]
    out: PathBuf,
    #[command(flatten)]
    flags: PreprocessFlags,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PreprocessSettings {
    crop_width: usize,
    crop_height: usize,
    crop_x0: Option<usize>,
    crop_y0: Option<usize>,
    equalize: bool,
}

impl Default for PreprocessSettings {
    fn default() -> Self {
        Self {
            crop_width: 128,
            crop_height: 128,
            crop_x0: None,
            crop_y0: None,
            equalize: true,
        }
    }
}

#[derive(Args, Serialize)]
struct PreprocessFlags {
    /// Output width [default: 128]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    crop_width: Option<usize>,
    /// Output height [default: 128]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    crop_height: Option<usize>,
    /// Left edge of the crop [default: centred]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    crop_x0: Option<usize>,
    /// Top edge of the crop [default: centred]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    crop_y0: Option<usize>,
    /// Histogram equalization after cropping [default: true]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    equalize: Option<bool>,
}

#[derive(Args)]
struct RasterizeCmd {
    #[arg(long, value_name = "CSV")]
    contour: PathBuf,
    #[arg(long, value_name = "PGM")]
    out: PathBuf,
    /// Probability map to score with the weighted cross-entropy.
    #[arg(long, value_name = "PGM")]
    prob: Option<PathBuf>,
    #[command(flatten)]
    flags: RasterizeFlags,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RasterSize {
    width: usize,
    height: usize,
}

impl Default for RasterSize {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
        }
    }
}

#[derive(Args, Serialize)]
struct RasterizeFlags {
    /// Mask width [default: 128]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<usize>,
    /// Mask height [default: 128]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    height: Option<usize>,
    /// Loss weight of contour pixels [default: 0.8]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    w_contour: Option<f64>,
    /// Loss weight of background pixels [default: 0.2]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    w_background: Option<f64>,
}

#[derive(Args)]
struct ExtractCmd {
    /// Probability map: 16-bit PGM, or 8-bit scaled by 1/255.
    #[arg(long = "in", value_name = "PGM")]
    input: PathBuf,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    #[command(flatten)]
    flags: ExtractFlags,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvalCmd {
    #[arg(long, value_name = "CSV")]
    pred: PathBuf,
    #[arg(long, value_name = "CSV")]
    truth: PathBuf,
    #[command(flatten)]
    flags: MetaFlags,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Clean,
    Corrupted,
}

#[derive(Args)]
struct SynthCmd {
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Number of samples; sample i uses seed + i.
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Base values for the corruption settings.
    #[arg(long, value_enum, default_value_t = Preset::Clean)]
    preset: Preset,
    #[command(flatten)]
    flags: SynthFlags,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Serialize)]
struct SynthFlags {
    /// [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Square image side [default: 128]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    image_size: Option<usize>,
    /// [default: 0, corrupted preset 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    blur_sigma: Option<f64>,
    /// [default: 0, corrupted preset 2]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_count: Option<usize>,
    /// [default: 1, corrupted preset 3]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_length_px: Option<usize>,
    /// [default: 0, corrupted preset 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spur_count: Option<usize>,
    /// [default: 1, corrupted preset 5]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spur_size_px: Option<usize>,
    /// [default: 15]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spur_min_dist_px: Option<f64>,
    /// [default: 0, corrupted preset 0.2]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_amplitude: Option<f64>,
}

#[derive(Args)]
struct BatchCmd {
    #[arg(long, value_name = "JSON")]
    manifest: PathBuf,
    /// Receives records.csv, summary.txt and config.json.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    #[command(flatten)]
    extract: ExtractFlags,
    #[command(flatten)]
    meta: MetaFlags,
    #[command(flatten)]
    flags: BatchFlags,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BatchSettings {
    workers: usize,
    folds: Option<usize>,
    fold_seed: u64,
    fold_mode: FoldMode,
}

fn parse_fold_mode(s: &str) -> Result<FoldMode, String> {
    match s {
        "rotating" => Ok(FoldMode::Rotating),
        "independent" => Ok(FoldMode::Independent),
        _ => Err("expected rotating or independent".to_owned()),
    }
}

#[derive(Args, Serialize)]
struct BatchFlags {
    /// Worker threads, 0 for one per CPU [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    /// Cross-validate over all entries with this many folds [default: test split only]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    folds: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    fold_seed: Option<u64>,
    /// rotating or independent [default: rotating]
    #[arg(long, value_parser = parse_fold_mode)]
    #[serde(skip_serializing_if = "Option::is_none")]
    fold_mode: Option<FoldMode>,
}

#[derive(Args)]
struct OverlayCmd {
    #[arg(long, value_name = "PGM")]
    image: PathBuf,
    #[arg(long, value_name = "PPM")]
    out: PathBuf,
    #[arg(long, value_name = "CSV")]
    truth: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pred: Option<PathBuf>,
}

/// Layered settings as one flat JSON object.
struct Settings {
    map: Map<String, Value>,
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => unreachable!("settings serialize as JSON objects"),
    }
}

impl Settings {
    fn defaults(parts: &[Value]) -> Self {
        let mut map = Map::new();
        for part in parts {
            map.extend(object(part.clone()));
        }
        Self { map }
    }

    fn layer(mut self, config: &ConfigArgs, flags: &[Value]) -> CliResult<Self> {
        if let Some(path) = &config.config {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let file: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let Value::Object(file) = file else {
                return Err(usage(format!("{}: expected a JSON object", path.display())));
            };
            for (key, value) in file {
                if !self.map.contains_key(&key) {
                    return Err(usage(format!("{}: unknown setting {key:?}", path.display())));
                }
                self.map.insert(key, value);
            }
        }
        for f in flags {
            self.map.extend(object(f.clone()));
        }
        Ok(self)
    }

    /// The subset of settings that make up `T`.
    fn part<T: Serialize + DeserializeOwned + Default>(&self) -> CliResult<T> {
        let keys = object(serde_json::to_value(T::default()).expect("settings serialize"));
        let sub: Map<String, Value> = keys
            .keys()
            .map(|k| (k.clone(), self.map[k].clone()))
            .collect();
        serde_json::from_value(Value::Object(sub)).map_err(|e| usage(format!("invalid setting: {e}")))
    }

    fn write_sidecar(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(&self.map).expect("settings serialize");
        text.push('\n');
        write_file(path, text)
    }
}

fn json(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("settings serialize")
}

fn sidecar_path(config: &ConfigArgs, default: impl FnOnce() -> Option<PathBuf>) -> Option<PathBuf> {
    config.sidecar.clone().or_else(default)
}

fn next_to(out: &Path) -> Option<PathBuf> {
    Some(out.with_extension("config.json"))
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn read_image(path: &Path) -> CliResult<Pgm> {
    read_pgm(&read_bytes(path)?).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn read_contour(path: &Path) -> CliResult<Contour> {
    let text = String::from_utf8(read_bytes(path)?).map_err(|_| data(format!("{}: not UTF-8", path.display())))?;
    read_contour_csv(&text).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn checked_extract_config(settings: &Settings) -> CliResult<ExtractConfig> {
    let config: ExtractConfig = settings.part()?;
    config.validate().map_err(usage)?;
    Ok(config)
}

fn preprocess(cmd: PreprocessCmd, _out: &mut dyn Write) -> CliResult<()> {
    let settings = Settings::defaults(&[json(PreprocessSettings::default())]).layer(&cmd.config, &[json(&cmd.flags)])?;
    let s: PreprocessSettings = settings.part()?;
    let image = read_image(&cmd.input)?.into_gray();
    let rect = CropRect::new(
        s.crop_x0.unwrap_or(image.width().saturating_sub(s.crop_width) / 2),
        s.crop_y0.unwrap_or(image.height().saturating_sub(s.crop_height) / 2),
        s.crop_width,
        s.crop_height,
    );
    let mut result = crop(&image, &rect).map_err(data)?;
    if s.equalize {
        result = equalize(&result);
    }
    write_file(&cmd.out, write_pgm(&result))?;
    if let Some(path) = sidecar_path(&cmd.config, || next_to(&cmd.out)) {
        settings.write_sidecar(&path)?;
    }
    Ok(())
}

fn rasterize(cmd: RasterizeCmd, out: &mut dyn Write) -> CliResult<()> {
    let settings = Settings::defaults(&[json(RasterSize::default()), json(LossWeights::default())])
        .layer(&cmd.config, &[json(&cmd.flags)])?;
    let size: RasterSize = settings.part()?;
    let weights: LossWeights = settings.part()?;
    let weights = LossWeights::new(weights.w_contour, weights.w_background)
        .ok_or_else(|| usage("loss weights must be non-negative and not both zero"))?;
    let contour = read_contour(&cmd.contour)?;
    let mask = rasterize_contour(&contour, size.width, size.height).map_err(data)?;
    write_file(&cmd.out, write_mask_pgm(&mask))?;
    writeln!(out, "contour_pixels={}", mask.count_ones()).map_err(data)?;
    if let Some(prob) = &cmd.prob {
        let prob = read_image(prob)?.into_prob();
        let loss = weighted_bce(&prob, &mask, &weights).map_err(data)?;
        writeln!(out, "bce={loss}").map_err(data)?;
    }
    if let Some(path) = sidecar_path(&cmd.config, || next_to(&cmd.out)) {
        settings.write_sidecar(&path)?;
    }
    Ok(())
}

fn extract(cmd: ExtractCmd, out: &mut dyn Write) -> CliResult<()> {
    let settings = Settings::defaults(&[json(ExtractConfig::default())]).layer(&cmd.config, &[json(&cmd.flags)])?;
    let config = checked_extract_config(&settings)?;
    let prob = read_image(&cmd.input)?.into_prob();
    let contour = extract_contour(&prob, &config).map_err(|e| data(format!("extraction failed: {e}")))?;
    write_file(&cmd.out, write_contour_csv(&contour))?;
    writeln!(out, "points={}", contour.len()).map_err(data)?;
    if let Some(path) = sidecar_path(&cmd.config, || next_to(&cmd.out)) {
        settings.write_sidecar(&path)?;
    }
    Ok(())
}

fn eval(cmd: EvalCmd, out: &mut dyn Write) -> CliResult<()> {
    let settings = Settings::defaults(&[json(MetaSettings::default())]).layer(&cmd.config, &[json(&cmd.flags)])?;
    let meta = settings.part::<MetaSettings>()?.meta()?;
    let pred = read_contour(&cmd.pred)?;
    let truth = read_contour(&cmd.truth)?;
    let px = msd_px(&pred, &truth).map_err(data)?;
    writeln!(out, "msd_px={px:.6}\nmsd_mm={:.6}", px * meta.pixel_spacing()).map_err(data)?;
    if let Some(path) = sidecar_path(&cmd.config, || None) {
        settings.write_sidecar(&path)?;
    }
    Ok(())
}

fn synth(cmd: SynthCmd, out: &mut dyn Write) -> CliResult<()> {
    let base = match cmd.preset {
        Preset::Clean => SynthParams::clean(0),
        Preset::Corrupted => SynthParams::corrupted(0),
    };
    let settings = Settings::defaults(&[json(base)]).layer(&cmd.config, &[json(&cmd.flags)])?;
    let params: SynthParams = settings.part()?;
    params.validate().map_err(usage)?;
    let entries = write_synth_corpus(&cmd.out_dir, cmd.count, &params).map_err(data)?;
    writeln!(out, "entries={}", entries.len()).map_err(data)?;
    if let Some(path) = sidecar_path(&cmd.config, || Some(cmd.out_dir.join("config.json"))) {
        settings.write_sidecar(&path)?;
    }
    Ok(())
}

fn batch(cmd: BatchCmd, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<bool> {
    let settings = Settings::defaults(&[
        json(ExtractConfig::default()),
        json(MetaSettings::default()),
        json(BatchSettings::default()),
    ])
    .layer(&cmd.config, &[json(&cmd.extract), json(&cmd.meta), json(&cmd.flags)])?;
    let extract = checked_extract_config(&settings)?;
    let meta = settings.part::<MetaSettings>()?.meta()?;
    let b: BatchSettings = settings.part()?;
    let config = BatchConfig {
        extract,
        meta,
        workers: b.workers,
        folds: b.folds.map(|n_folds| FoldPlan {
            n_folds,
            seed: b.fold_seed,
            mode: b.fold_mode,
        }),
    };

    let text = fs::read_to_string(&cmd.manifest).map_err(|e| data(format!("{}: {e}", cmd.manifest.display())))?;
    let entries = read_manifest(&text).map_err(|e| data(format!("{}: {e}", cmd.manifest.display())))?;
    let base = cmd.manifest.parent().unwrap_or(Path::new("."));
    let report = run_batch(&entries, base, &config).map_err(data)?;

    fs::create_dir_all(&cmd.out_dir).map_err(|e| data(format!("{}: {e}", cmd.out_dir.display())))?;
    write_file(&cmd.out_dir.join("records.csv"), report.records_csv())?;
    let table = report.summary_table();
    write_file(&cmd.out_dir.join("summary.txt"), &table)?;
    if let Some(path) = sidecar_path(&cmd.config, || Some(cmd.out_dir.join("config.json"))) {
        settings.write_sidecar(&path)?;
    }
    for r in &report.records {
        if let tongue_contour_core::EvalStatus::ExtractionFailed { reason } = &r.status {
            let _ = writeln!(err, "{}: {reason}", r.id);
        }
    }
    out.write_all(table.as_bytes()).map_err(data)?;
    Ok(report.failures() == 0)
}

fn overlay_cmd(cmd: OverlayCmd) -> CliResult<()> {
    let image = read_image(&cmd.image)?.into_gray();
    let truth = cmd.truth.as_deref().map(read_contour).transpose()?;
    let pred = cmd.pred.as_deref().map(read_contour).transpose()?;
    let rgb = overlay(&image, truth.as_ref(), pred.as_ref()).map_err(data)?;
    write_file(&cmd.out, write_ppm(&rgb))
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code: 0 success, 1 usage error, 2 data or processing failure.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() || e.exit_code() != 0 {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Preprocess(c) => preprocess(c, out).map(|()| true),
        Command::Rasterize(c) => rasterize(c, out).map(|()| true),
        Command::Extract(c) => extract(c, out).map(|()| true),
        Command::Eval(c) => eval(c, out).map(|()| true),
        Command::Synth(c) => synth(c, out).map(|()| true),
        Command::Batch(c) => batch(c, out, err),
        Command::Overlay(c) => overlay_cmd(c).map(|()| true),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}
