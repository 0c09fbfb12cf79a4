//! Batch evaluation over a manifest, fold reports, and synthetic corpora.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;
use tongue_contour_core::synth::generate;
use tongue_contour_core::{
    aggregate_fold, aggregate_overall, extract_contour, msd_px, split_folds, EvalRecord,
    EvalStatus, ExtractConfig, FoldError, FoldMode, FoldReport, ImageMeta, OverallSummary,
    Split, SynthError, SynthParams,
};

use crate::contour_csv::{read_contour_csv, write_contour_csv};
use crate::manifest::{write_manifest, ManifestEntry};
use crate::netpbm::{read_pgm, write_pgm, write_prob_pgm};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Cross-validation layout; without one only `test` entries are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub seed: u64,
    pub mode: FoldMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchConfig {
    pub extract: ExtractConfig,
    pub meta: ImageMeta,
    /// 0 means one worker per CPU.
    pub workers: usize,
    pub folds: Option<FoldPlan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldRow {
    pub fold_index: usize,
    pub tested: usize,
    /// `None` when every record of the fold failed.
    pub report: Option<FoldReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    /// One per evaluated entry, in manifest order.
    pub records: Vec<EvalRecord>,
    pub folds: Vec<FoldRow>,
    pub overall: Option<OverallSummary>,
}

impl BatchReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }

    /// `id,status,msd_px,msd_mm`; failed records leave the numbers empty.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("id,status,msd_px,msd_mm\n");
        for r in &self.records {
            match &r.status {
                EvalStatus::Ok { msd_px, msd_mm } => {
                    writeln!(out, "{},ok,{msd_px:.6},{msd_mm:.6}", r.id).unwrap()
                }
                EvalStatus::ExtractionFailed { .. } => {
                    writeln!(out, "{},extraction_failed,,", r.id).unwrap()
                }
            }
        }
        out
    }

    /// Per-fold and overall MSD in millimetres, as `mean ± std`.
    pub fn summary_table(&self) -> String {
        let mut out = format!("{:<16}{:>8}{:>8}  {}\n", "fold", "images", "failed", "MSD (mm)");
        for row in &self.folds {
            let (failed, msd) = match &row.report {
                Some(r) => (r.failures, r.stats().to_string()),
                None => (row.tested, "-".to_owned()),
            };
            writeln!(out, "{:<16}{:>8}{:>8}  {msd}", row.fold_index, row.tested, failed).unwrap();
        }
        if let Some(o) = &self.overall {
            let n = o.pooled.count + o.failures;
            writeln!(out, "{:<16}{:>8}{:>8}  {}", "all", n, o.failures, o.pooled).unwrap();
            if let Some(w) = &o.worst_excluded {
                writeln!(out, "{:<32}  {w}", "all, worst excluded").unwrap();
            }
            if self.folds.len() > 1 {
                writeln!(out, "{:<32}  {}", "mean of folds", o.fold_means).unwrap();
            }
        }
        out
    }
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn try_evaluate(entry: &ManifestEntry, base: &Path, config: &ExtractConfig) -> Result<f64, String> {
    let prob_path = entry.prob_path.as_ref().ok_or("entry has no prob_path")?;
    let truth_path = entry.truth_contour_path.as_ref().ok_or("entry has no truth_contour_path")?;
    let prob = read_pgm(&read(&base.join(prob_path))?)
        .map_err(|e| format!("{}: {e}", prob_path.display()))?
        .into_prob();
    let truth_text = String::from_utf8(read(&base.join(truth_path))?)
        .map_err(|_| format!("{}: not UTF-8", truth_path.display()))?;
    let truth = read_contour_csv(&truth_text).map_err(|e| format!("{}: {e}", truth_path.display()))?;
    let predicted = extract_contour(&prob, config).map_err(|e| e.to_string())?;
    msd_px(&predicted, &truth).map_err(|e| e.to_string())
}

/// Loads, extracts and scores one entry; any failure becomes the record's status.
pub fn evaluate_entry(entry: &ManifestEntry, base: &Path, config: &BatchConfig) -> EvalRecord {
    match try_evaluate(entry, base, &config.extract) {
        Ok(px) => EvalRecord::ok(entry.id.clone(), px, config.meta.pixel_spacing()),
        Err(reason) => EvalRecord::failed(entry.id.clone(), reason),
    }
}

/// Evaluates the manifest with a pool of `config.workers` threads. Relative
/// paths resolve against `base`. Results do not depend on the worker count.
pub fn run_batch(entries: &[ManifestEntry], base: &Path, config: &BatchConfig) -> Result<BatchReport, CorpusError> {
    let fold_tests: Vec<HashSet<String>> = match config.folds {
        Some(plan) => {
            let ids: Vec<&str> = entries.iter().map(|e| e.id.as_str()).collect();
            split_folds(&ids, plan.n_folds, plan.seed, plan.mode)?
                .iter()
                .map(|f| f.ids(Split::Test).into_iter().map(str::to_owned).collect())
                .collect()
        }
        None => vec![entries
            .iter()
            .filter(|e| e.split == Split::Test)
            .map(|e| e.id.clone())
            .collect()],
    };
    let selected: Vec<&ManifestEntry> = entries
        .iter()
        .filter(|e| fold_tests.iter().any(|t| t.contains(&e.id)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.workers).build()?;
    let records: Vec<EvalRecord> =
        pool.install(|| selected.par_iter().map(|e| evaluate_entry(e, base, config)).collect());

    let folds: Vec<FoldRow> = fold_tests
        .iter()
        .enumerate()
        .map(|(fold_index, tested)| {
            let fold_records: Vec<EvalRecord> = records
                .iter()
                .filter(|r| tested.contains(&r.id))
                .cloned()
                .collect();
            FoldRow {
                fold_index,
                tested: fold_records.len(),
                report: aggregate_fold(&fold_records, fold_index).ok(),
            }
        })
        .collect();
    let reports: Vec<FoldReport> = folds.iter().filter_map(|f| f.report.clone()).collect();
    let overall = aggregate_overall(&reports, &records).ok();
    Ok(BatchReport {
        records,
        folds,
        overall,
    })
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CorpusError> {
    fs::write(path, bytes).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes `count` synthetic samples (seeds `params.seed + i`) and a
/// `manifest.json` listing them as test entries. Per sample: the truth
/// contour CSV, the 16-bit probability map and its 8-bit rendering as the
/// image.
pub fn write_synth_corpus(dir: &Path, count: usize, params: &SynthParams) -> Result<Vec<ManifestEntry>, CorpusError> {
    fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut entries = Vec::with_capacity(count);
    for i in 0..count {
        let sample = generate(&SynthParams {
            seed: params.seed.wrapping_add(i as u64),
            ..params.clone()
        })?;
        let id = format!("synth{i:04}");
        let entry = ManifestEntry {
            image_path: format!("{id}.image.pgm").into(),
            prob_path: Some(format!("{id}.prob.pgm").into()),
            truth_contour_path: Some(format!("{id}.truth.csv").into()),
            speaker: "synthetic".to_owned(),
            split: Split::Test,
            id,
        };
        let map = &sample.corrupted.map;
        write_file(&dir.join(&entry.image_path), write_pgm(&map.grid().map(|v| (v * 255.0).round() as u8)))?;
        write_file(&dir.join(entry.prob_path.as_ref().unwrap()), write_prob_pgm(map))?;
        write_file(&dir.join(entry.truth_contour_path.as_ref().unwrap()), write_contour_csv(&sample.truth))?;
        entries.push(entry);
    }
    write_file(&dir.join("manifest.json"), write_manifest(&entries))?;
    Ok(entries)
}
