//! The pipeline stages. Each reads all of its inputs before writing
//! anything, so a failing stage leaves no outputs behind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use emowalk_core::eval::{evaluate_user, skip_record, summarize_study, task_dataset, Task, UserData, UserEvaluation};
use emowalk_core::features::{featurize, CATALOG_VERSION};
use emowalk_core::ingest::{build_walking_data, RawSample};
use emowalk_core::learners::ForestModel;
use emowalk_core::seed;
use emowalk_core::synth::generate_cohort;
use emowalk_core::tuning::{make_folds, random_search_on};
use rayon::prelude::*;

use crate::config::{RunConfig, TaskChoice};
use crate::error::{Error, Result};
use crate::formats;
use crate::manifest::{write_stage, Output};
use crate::model_io::Model;
use crate::results::{self, ResultsFile, SearchFile, RESULTS_FORMAT, SEARCH_FORMAT};
use crate::{atomic, report};

const FINAL_FOREST_STREAM: u64 = 3;

/// A configuration with its digest computed once.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub digest: String,
    /// Worker threads for evaluation; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Settings {
    pub fn new(config: RunConfig, jobs: Option<usize>) -> Result<Settings> {
        config.validate()?;
        if jobs == Some(0) {
            return Err(Error::usage("--jobs must be at least 1"));
        }
        let digest = config.digest();
        Ok(Settings { config, digest, jobs })
    }

    fn seed(&self) -> u64 {
        self.config.protocol.seed
    }
}

/// `<participant>_c<condition>.csv`
pub fn unit_file_name(participant_id: &str, condition: u8) -> String {
    format!("{participant_id}_c{condition}.csv")
}

/// Inverse of [`unit_file_name`].
pub fn parse_unit_file_name(name: &str) -> Option<(String, u8)> {
    let stem = name.strip_suffix(".csv")?;
    let (pid, cond) = stem.rsplit_once("_c")?;
    let condition: u8 = cond.parse().ok().filter(|c| *c <= 2)?;
    (!pid.is_empty() && cond == condition.to_string()).then(|| (pid.to_string(), condition))
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::data(path, None, format!("{what} not found")))
    }
}

fn require_dir(path: &Path, what: &str) -> Result<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Error::data(path, None, format!("{what} directory not found")))
    }
}

/// Sorted `.csv` files directly inside `dir`.
fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// The raw file of a participant: the file whose stem is exactly the id,
/// otherwise the only file whose name contains it.
pub fn find_raw_file<'a>(files: &'a [PathBuf], participant_id: &str) -> Result<Option<&'a PathBuf>, Vec<&'a PathBuf>> {
    let stem = |p: &Path| {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    if let Some(exact) = files.iter().find(|p| stem(p) == participant_id) {
        return Ok(Some(exact));
    }
    let hits: Vec<&PathBuf> = files.iter().filter(|p| file_name(p).contains(participant_id)).collect();
    match hits.len() {
        0 => Ok(None),
        1 => Ok(Some(hits[0])),
        _ => Err(hits),
    }
}

/// Encoding + raw streams to one walking file per participant-condition.
pub fn walkgen(s: &Settings, encoding: &Path, raw_dir: &Path, out_dir: &Path) -> Result<()> {
    let cfg = &s.config;
    require_file(encoding, "encoding file")?;
    require_dir(raw_dir, "raw")?;
    let delimiter = cfg.delimiter()?;
    let records = formats::read_encoding(encoding, delimiter, &cfg.prefix_map()?)?;
    let raw_files = csv_files(raw_dir)?;

    let mut streams: BTreeMap<PathBuf, Vec<RawSample>> = BTreeMap::new();
    let mut outputs: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for rec in &records {
        let raw_path = match find_raw_file(&raw_files, &rec.participant_id) {
            Ok(Some(p)) => p,
            Ok(None) if cfg.io.strict => {
                return Err(Error::data(
                    raw_dir,
                    None,
                    format!("no raw file for participant {}", rec.participant_id),
                ))
            }
            Ok(None) => {
                log::warn!("no raw file for participant {}; skipped", rec.participant_id);
                continue;
            }
            Err(hits) => {
                let names: Vec<String> = hits.iter().map(|p| file_name(p)).collect();
                return Err(Error::data(
                    raw_dir,
                    None,
                    format!(
                        "participant {} matches several raw files: {}",
                        rec.participant_id,
                        names.join(", ")
                    ),
                ));
            }
        };
        if !streams.contains_key(raw_path) {
            let samples = formats::read_raw(raw_path, delimiter, cfg.io.strict)?;
            streams.insert(raw_path.clone(), samples);
        }
        let walking = build_walking_data(&streams[raw_path], rec);
        for w in walking.empty_walks() {
            log::warn!(
                "{} condition {}: walk {} has no samples",
                rec.participant_id,
                rec.condition(),
                w + 1
            );
        }
        let name = unit_file_name(&rec.participant_id, rec.condition());
        if outputs.contains_key(&name) {
            return Err(Error::data(
                encoding,
                None,
                format!("duplicate participant-condition {name}"),
            ));
        }
        log::info!("{name}: {} walking samples", walking.samples.len());
        outputs.insert(name, formats::walking_bytes(&walking.samples, b','));
    }
    write_stage(out_dir, "walkgen", s.seed(), &s.digest, outputs.into_iter().collect())
}

/// Walking files to feature files of the same names.
pub fn featex(s: &Settings, walking_dir: &Path, out_dir: &Path) -> Result<()> {
    require_dir(walking_dir, "walking")?;
    let mut outputs: Vec<Output> = Vec::new();
    for path in csv_files(walking_dir)? {
        let samples = formats::read_walking(&path, b',')?;
        let features = featurize(&samples, &s.config.windowing).map_err(|e| Error::data(&path, None, e))?;
        log::info!("{}: {} windows", file_name(&path), features.len());
        outputs.push((file_name(&path), formats::features_bytes(&features, b',')));
    }
    write_stage(out_dir, "featex", s.seed(), &s.digest, outputs)
}

fn read_units(features_dir: &Path) -> Result<Vec<UserData>> {
    require_dir(features_dir, "features")?;
    let mut units = Vec::new();
    for path in csv_files(features_dir)? {
        let name = file_name(&path);
        let (participant_id, condition) = parse_unit_file_name(&name)
            .ok_or_else(|| Error::data(&path, None, "file name must look like <participant>_c<condition>.csv"))?;
        let features = formats::read_features(&path, b',')?;
        if let Some(bad) = features.iter().position(|f| f.condition != condition) {
            return Err(Error::data(
                &path,
                Some(bad + 2),
                format!("row condition differs from file condition {condition}"),
            ));
        }
        units.push(UserData {
            participant_id,
            condition,
            features,
        });
    }
    units.sort_by(|a, b| (&a.participant_id, a.condition).cmp(&(&b.participant_id, b.condition)));
    Ok(units)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))
}

/// Personal-model experiment over every feature file.
pub fn evaluate_units(s: &Settings, units: &[UserData]) -> Result<ResultsFile> {
    let protocol = s.config.protocol();
    let work: Vec<(Task, &UserData)> = s
        .config
        .protocol
        .task
        .tasks()
        .iter()
        .flat_map(|&t| units.iter().map(move |u| (t, u)))
        .collect();
    let outcomes = pool(s.jobs)?.install(|| {
        work.par_iter()
            .map(|(task, unit)| evaluate_user(unit, *task, &protocol))
            .collect::<Vec<_>>()
    });
    let mut evaluations: Vec<UserEvaluation> = Vec::new();
    let mut skipped = Vec::new();
    for ((task, unit), outcome) in work.iter().zip(outcomes) {
        match outcome {
            Ok(e) => evaluations.push(e),
            Err(err) => {
                let rec = skip_record(unit, *task, &err);
                log::warn!(
                    "skipped {} condition {} ({task}): {}",
                    rec.participant_id,
                    rec.condition,
                    rec.reason
                );
                skipped.push(rec);
            }
        }
    }
    Ok(ResultsFile {
        format: RESULTS_FORMAT.into(),
        seed: s.seed(),
        config_digest: s.digest.clone(),
        catalog_version: CATALOG_VERSION.to_string(),
        task: s.config.protocol.task,
        windowing: s.config.windowing,
        protocol,
        evaluations,
        skipped,
    })
}

pub fn evaluate(s: &Settings, features_dir: &Path, out_file: &Path) -> Result<()> {
    let units = read_units(features_dir)?;
    let results = evaluate_units(s, &units)?;
    atomic::write(out_file, &results::to_yaml(&results))
}

/// Summary and boxplot CSVs; the manifest carries the results' seed and digest.
pub fn report(results_file: &Path, out_dir: &Path) -> Result<()> {
    require_file(results_file, "results file")?;
    let results = results::read_results(results_file)?;
    if results.evaluations.is_empty() {
        return Err(Error::data(results_file, None, "no evaluations to report"));
    }
    let summary = summarize_study(&results.evaluations).map_err(|e| Error::data(results_file, None, e))?;
    write_stage(
        out_dir,
        "report",
        results.seed,
        &results.config_digest,
        report::render(&summary),
    )
}

/// Random search audit on one feature file, optionally saving the forest
/// refit on all of its windows with the winning configuration.
pub fn tune(s: &Settings, features_file: &Path, out_file: &Path, model_out: Option<&Path>) -> Result<()> {
    require_file(features_file, "features file")?;
    let task = match s.config.protocol.task {
        TaskChoice::Binary => Task::Binary,
        TaskChoice::Ternary => Task::Ternary,
        TaskChoice::Both => return Err(Error::usage("tune needs a single task: binary or ternary")),
    };
    let features = formats::read_features(features_file, b',')?;
    let data = task_dataset(&features, task).map_err(|e| Error::data(features_file, None, e))?;
    let p = &s.config.protocol;
    let folds = make_folds(&data.y, p.k, p.seed, p.fold_mode).map_err(|e| Error::data(features_file, None, e))?;
    let search = random_search_on(&data, &s.config.search, p.n_iter, &folds, p.seed)
        .map_err(|e| Error::data(features_file, None, e))?;
    log::info!(
        "best candidate #{} with accuracy {:.3}",
        search.best_index,
        search.all[search.best_index].mean_score
    );
    let model = match model_out {
        Some(_) => {
            let seed = seed::derive(&[p.seed, FINAL_FOREST_STREAM]);
            let forest =
                ForestModel::fit(&data, &search.best, seed).map_err(|e| Error::data(features_file, None, e))?;
            Some(Model::Forest(forest).to_text())
        }
        None => None,
    };
    let file = SearchFile {
        format: SEARCH_FORMAT.into(),
        seed: p.seed,
        config_digest: s.digest.clone(),
        source: file_name(features_file),
        task,
        k: p.k,
        n_iter: p.n_iter,
        n_windows: data.len(),
        search,
    };
    atomic::write(out_file, &results::to_yaml(&file))?;
    if let (Some(path), Some(text)) = (model_out, model) {
        atomic::write(path, text.as_bytes())?;
    }
    Ok(())
}

/// Synthetic cohort: `encoding.csv` plus `raw/<participant>.csv`.
pub fn synth(s: &Settings, out_dir: &Path) -> Result<()> {
    let cfg = &s.config;
    let cohort = generate_cohort(&cfg.synth).map_err(Error::usage)?;
    let delimiter = cfg.delimiter()?;
    let mut outputs: Vec<Output> = vec![(
        "encoding.csv".into(),
        formats::encoding_bytes(&cohort.records, delimiter),
    )];
    for stream in &cohort.streams {
        outputs.push((
            format!("raw/{}.csv", stream.participant_id),
            formats::raw_bytes(&stream.samples, delimiter),
        ));
    }
    write_stage(out_dir, "synth", cfg.synth.seed, &s.digest, outputs)
}

pub const WALKING_DIR: &str = "walking";
pub const FEATURES_DIR: &str = "features";
pub const RESULTS_FILE: &str = "results.yaml";
pub const REPORT_DIR: &str = "report";

/// Every stage in sequence under `out_dir`.
pub fn run_all(s: &Settings, encoding: &Path, raw_dir: &Path, out_dir: &Path) -> Result<()> {
    require_file(encoding, "encoding file")?;
    require_dir(raw_dir, "raw")?;
    let walking = out_dir.join(WALKING_DIR);
    let features = out_dir.join(FEATURES_DIR);
    let results = out_dir.join(RESULTS_FILE);
    walkgen(s, encoding, raw_dir, &walking)?;
    featex(s, &walking, &features)?;
    evaluate(s, &features, &results)?;
    report(&results, &out_dir.join(REPORT_DIR))
}
