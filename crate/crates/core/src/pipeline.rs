//! End-to-end orchestration behind the CLI: ingest → describe →
//! inequality → gender → matthew → features → predict, plus the synthetic
//! generator. Every stage writes deterministic artifacts into the output
//! directory and records them in `manifest.json` together with a config
//! digest, so mixing artifacts from different configurations is refused.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::careers::{build_series, field_descriptives, CohortSeries, Counting, Measure};
use crate::corpus::{make_view, Corpus, CorpusView, ParseOptions};
use crate::error::{Error, Result};
use crate::features::{build_features, standardize, FeatureTable, FEATURE_COLUMNS};
use crate::indices::SourceIndex;
use crate::inequality::{
    cross_measure_correlation, gender_cells_from, gini_series_from, grid_from_cells, GenderGrid,
    GiniSeries, GridSummary,
};
use crate::matthew::{cohort_cells, report_from_cells, FitOptions, MeReport};
use crate::predict::{dropout_model, success_model, ModelTier, RegressionReport};
use crate::stats::fnv1a;
use crate::synth;
use crate::CAREER_SPAN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Ingest,
    Describe,
    Inequality,
    Gender,
    Matthew,
    Features,
    Predict,
    Synth,
    All,
}

impl Command {
    pub const PIPELINE: [Command; 7] = [
        Command::Ingest,
        Command::Describe,
        Command::Inequality,
        Command::Gender,
        Command::Matthew,
        Command::Features,
        Command::Predict,
    ];
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub genders: Option<PathBuf>,
    /// Cohort start-year range, inclusive.
    pub cohorts: (i32, i32),
    /// End of the early career.
    pub t_e: usize,
    /// Consecutive publication-free ages that define a dropout.
    pub gap: usize,
    /// Width of the windowed counting scheme.
    pub window: usize,
    pub first_author: bool,
    pub remove_dropouts: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    /// Significance threshold for gender-grid cells.
    pub alpha: f64,
    /// Cohorts may not start within this many years of coverage start.
    pub guard_years: i32,
    /// Calendar coverage enforced at ingest; `None` derives it from data.
    pub coverage: Option<(i32, i32)>,
    pub skip_preprints: bool,
    /// Synth scenario: "paper", "null", or "ramp".
    pub scenario: String,
    /// Synth parameter file overriding the named scenario.
    pub params: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            citations: None,
            genders: None,
            cohorts: (1970, 2000),
            t_e: 3,
            gap: 10,
            window: 3,
            first_author: false,
            remove_dropouts: false,
            out: PathBuf::from("out"),
            seed: 42,
            jobs: 1,
            alpha: 0.05,
            guard_years: 10,
            coverage: None,
            skip_preprints: false,
            scenario: "paper".into(),
            params: None,
        }
    }
}

impl RunConfig {
    /// Digest over the fields that shape the artifacts. Output paths and
    /// worker counts stay out: they must not change results.
    fn digest(&self) -> String {
        #[derive(Serialize)]
        struct Semantic<'a> {
            cohorts: (i32, i32),
            t_e: usize,
            gap: usize,
            window: usize,
            first_author: bool,
            remove_dropouts: bool,
            seed: u64,
            alpha: f64,
            guard_years: i32,
            coverage: Option<(i32, i32)>,
            skip_preprints: bool,
            scenario: &'a str,
        }
        let semantic = Semantic {
            cohorts: self.cohorts,
            t_e: self.t_e,
            gap: self.gap,
            window: self.window,
            first_author: self.first_author,
            remove_dropouts: self.remove_dropouts,
            seed: self.seed,
            alpha: self.alpha,
            guard_years: self.guard_years,
            coverage: self.coverage,
            skip_preprints: self.skip_preprints,
            scenario: &self.scenario,
        };
        format!("{:016x}", fnv1a(&serde_json::to_vec(&semantic).unwrap()))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub config_digest: String,
    pub config: Option<RunConfig>,
    /// Input files and their digests as seen at ingest.
    pub inputs: BTreeMap<String, String>,
    /// Artifact path (relative to the output root) → digest.
    pub artifacts: BTreeMap<String, String>,
}

impl Manifest {
    fn path(out: &Path) -> PathBuf {
        out.join("manifest.json")
    }

    fn load(out: &Path) -> Result<Option<Manifest>> {
        let path = Manifest::path(out);
        if !path.exists() {
            return Ok(None);
        }
        let file = fs::File::open(path)?;
        Ok(Some(serde_json::from_reader(BufReader::new(file))?))
    }

    fn save(&self, out: &Path) -> Result<()> {
        let mut file = BufWriter::new(fs::File::create(Manifest::path(out))?);
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(())
    }

    fn record(&mut self, out: &Path, relative: &str) -> Result<()> {
        let bytes = fs::read(out.join(relative))?;
        self.artifacts
            .insert(relative.to_string(), format!("{:016x}", fnv1a(&bytes)));
        Ok(())
    }
}

/// Entry point used by the CLI and the integration tests.
pub fn run(command: Command, config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.out)?;
    match command {
        Command::Synth => stage_synth(config),
        Command::Ingest => {
            let mut manifest = fresh_manifest(config);
            stage_ingest(config, &mut manifest)?;
            manifest.save(&config.out)
        }
        Command::All => {
            let mut manifest = fresh_manifest(config);
            let corpus = stage_ingest(config, &mut manifest)?;
            stage_describe(config, &corpus, &mut manifest)?;
            stage_inequality(config, &corpus, &mut manifest)?;
            stage_gender(config, &corpus, &mut manifest)?;
            stage_matthew(config, &corpus, &mut manifest)?;
            let table = stage_features(config, &corpus, &mut manifest)?;
            stage_predict(config, &table, &mut manifest)?;
            manifest.save(&config.out)
        }
        Command::Describe
        | Command::Inequality
        | Command::Gender
        | Command::Matthew
        | Command::Features
        | Command::Predict => {
            let mut manifest = load_checked_manifest(config)?;
            let corpus = load_corpus(config)?;
            match command {
                Command::Describe => stage_describe(config, &corpus, &mut manifest)?,
                Command::Inequality => stage_inequality(config, &corpus, &mut manifest)?,
                Command::Gender => stage_gender(config, &corpus, &mut manifest)?,
                Command::Matthew => stage_matthew(config, &corpus, &mut manifest)?,
                Command::Features => {
                    stage_features(config, &corpus, &mut manifest)?;
                }
                Command::Predict => {
                    let table = stage_features(config, &corpus, &mut manifest)?;
                    stage_predict(config, &table, &mut manifest)?;
                }
                _ => unreachable!(),
            }
            manifest.save(&config.out)
        }
    }
}

fn fresh_manifest(config: &RunConfig) -> Manifest {
    Manifest {
        config_digest: config.digest(),
        config: Some(config.clone()),
        ..Manifest::default()
    }
}

fn load_checked_manifest(config: &RunConfig) -> Result<Manifest> {
    let manifest = Manifest::load(&config.out)?.ok_or_else(|| {
        Error::Pipeline(format!(
            "corpus snapshot not found under {}; run `ingest` (or `all`) first",
            config.out.display()
        ))
    })?;
    if manifest.config_digest != config.digest() {
        return Err(Error::Pipeline(
            "existing artifacts were produced under a different configuration; \
             re-run `ingest` or `all`, or point --out at a fresh directory"
                .into(),
        ));
    }
    if !config.out.join("corpus.json").exists() {
        return Err(Error::Pipeline("corpus snapshot not found; run `ingest` first".into()));
    }
    Ok(manifest)
}

fn load_corpus(config: &RunConfig) -> Result<Corpus> {
    let path = config.out.join("corpus.json");
    if !path.exists() {
        return Err(Error::Pipeline("corpus snapshot not found; run `ingest` first".into()));
    }
    Corpus::load_snapshot(BufReader::new(fs::File::open(path)?))
}

fn stage_synth(config: &RunConfig) -> Result<()> {
    let params = match &config.params {
        Some(path) => serde_json::from_reader(BufReader::new(fs::File::open(path)?))?,
        None => {
            let mut params = match config.scenario.as_str() {
                "paper" => synth::paper_shaped_scenario(),
                "null" => synth::null_scenario(config.seed),
                "ramp" => synth::ramp_scenario(0.3, 1.0, 4, 2500, config.seed),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown scenario {other:?}; expected paper, null, or ramp"
                    )))
                }
            };
            params.seed = config.seed;
            params
        }
    };
    let corpus = synth::simulate(&params)?;

    let out = &config.out;
    write_with(out, "publications.jsonl", |w| corpus.export_publications_jsonl(w))?;
    write_with(out, "citations.csv", |w| corpus.export_citations_csv(w))?;
    write_with(out, "genders.csv", |w| corpus.export_genders_csv(w))?;
    fs::create_dir_all(out.join("reports"))?;
    write_json(out, "reports/synth_params.json", &params)?;

    let mut manifest = fresh_manifest(config);
    for artifact in [
        "publications.jsonl",
        "citations.csv",
        "genders.csv",
        "reports/synth_params.json",
    ] {
        manifest.record(out, artifact)?;
    }
    manifest.save(out)
}

fn stage_ingest(config: &RunConfig, manifest: &mut Manifest) -> Result<Corpus> {
    let input = config.input.as_ref().ok_or_else(|| {
        Error::Pipeline("ingest needs --input pointing at publication records".into())
    })?;
    if !input.exists() {
        return Err(Error::Pipeline(format!("input {} not found", input.display())));
    }
    let opts = ParseOptions {
        coverage: config.coverage,
        skip_preprints: config.skip_preprints,
    };
    let (mut corpus, ingest_report) =
        crate::corpus::parse_publications(BufReader::new(fs::File::open(input)?), &opts)?;
    manifest
        .inputs
        .insert(input.display().to_string(), digest_file(input)?);

    if let Some(genders) = &config.genders {
        if !genders.exists() {
            return Err(Error::Pipeline(format!("gender map {} not found", genders.display())));
        }
        let map = crate::corpus::load_gender_map(fs::File::open(genders)?)?;
        let report = corpus.apply_gender_map(&map);
        manifest
            .inputs
            .insert(genders.display().to_string(), digest_file(genders)?);
        write_json(&config.out, "reports/gender_map.json", &report)?;
        manifest.record(&config.out, "reports/gender_map.json")?;
    }

    let link_report = match &config.citations {
        Some(citations) => {
            if !citations.exists() {
                return Err(Error::Pipeline(format!(
                    "citations {} not found",
                    citations.display()
                )));
            }
            let refs = crate::corpus::parse_citation_keys_csv(fs::File::open(citations)?)?;
            manifest
                .inputs
                .insert(citations.display().to_string(), digest_file(citations)?);
            corpus.link_citations(&refs)
        }
        None => Default::default(),
    };

    fs::create_dir_all(config.out.join("reports"))?;
    write_with(&config.out, "corpus.json", |w| corpus.save_snapshot(w))?;
    write_json(&config.out, "reports/ingest.json", &ingest_report)?;
    write_json(&config.out, "reports/linkage.json", &link_report)?;
    for artifact in ["corpus.json", "reports/ingest.json", "reports/linkage.json"] {
        manifest.record(&config.out, artifact)?;
    }
    Ok(corpus)
}

/// Cohort years in range that have a full 15-age window and at least two
/// members.
fn effective_cohorts(corpus: &Corpus, config: &RunConfig) -> Result<Vec<i32>> {
    let assigned = corpus.assign_cohorts(config.cohorts, config.guard_years)?;
    Ok(assigned
        .iter()
        .filter(|(&year, members)| {
            members.len() >= 2 && year + CAREER_SPAN as i32 - 1 <= corpus.coverage().1
        })
        .map(|(&year, _)| year)
        .collect())
}

fn stage_describe(config: &RunConfig, corpus: &Corpus, manifest: &mut Manifest) -> Result<()> {
    let cohorts = corpus.assign_cohorts(config.cohorts, config.guard_years)?;
    let descriptives = field_descriptives(corpus, &cohorts, config.gap);

    fs::create_dir_all(config.out.join("reports"))?;
    fs::create_dir_all(config.out.join("data"))?;
    write_json(&config.out, "reports/descriptives.json", &descriptives)?;

    write_csv(&config.out, "data/ccdf_productivity.csv", &["value", "ccdf"], |w| {
        for point in &descriptives.ccdf_productivity {
            w.write_record([point.value.to_string(), point.ccdf.to_string()])?;
        }
        Ok(())
    })?;
    write_csv(&config.out, "data/ccdf_impact.csv", &["value", "ccdf"], |w| {
        for point in &descriptives.ccdf_impact {
            w.write_record([point.value.to_string(), point.ccdf.to_string()])?;
        }
        Ok(())
    })?;

    let effective = effective_cohorts(corpus, config)?;
    let view = corpus.view();
    let all_series: Vec<CohortSeries> =
        par_map(&effective, config.jobs, |&cohort| build_series(&view, cohort));
    write_csv(
        &config.out,
        "data/careers.csv",
        &["author_id", "cohort", "career_age", "p", "cum_p", "c", "cum_c"],
        |w| {
            for cohort_series in &all_series {
                for s in &cohort_series.series {
                    let id = &corpus.author(s.author).author_id;
                    for t in 1..=CAREER_SPAN {
                        w.write_record([
                            id.clone(),
                            s.cohort.to_string(),
                            t.to_string(),
                            s.p(t).to_string(),
                            s.cum_p(t).to_string(),
                            s.c(t).to_string(),
                            s.cum_c(t).to_string(),
                        ])?;
                    }
                }
            }
            Ok(())
        },
    )?;

    for artifact in [
        "reports/descriptives.json",
        "data/ccdf_productivity.csv",
        "data/ccdf_impact.csv",
        "data/careers.csv",
    ] {
        manifest.record(&config.out, artifact)?;
    }
    Ok(())
}

/// The four standard view combinations of the figure panels.
fn view_combos(corpus: &Corpus, gap: usize) -> Vec<(&'static str, &'static str, CorpusView<'_>)> {
    let mut combos = Vec::new();
    for (population, dropouts_removed) in [("all", false), ("stayers", true)] {
        for (attribution, first_author) in [("every", false), ("first", true)] {
            combos.push((
                attribution,
                population,
                make_view(corpus, first_author, dropouts_removed).with_dropout_gap(gap),
            ));
        }
    }
    combos
}

fn stage_inequality(config: &RunConfig, corpus: &Corpus, manifest: &mut Manifest) -> Result<()> {
    let effective = effective_cohorts(corpus, config)?;
    fs::create_dir_all(config.out.join("data/gini"))?;
    for (attribution, population, view) in view_combos(corpus, config.gap) {
        let per_cohort: Vec<(i32, Vec<GiniSeries>)> = par_map(&effective, config.jobs, |&cohort| {
            let series = build_series(&view, cohort);
            let mut out = Vec::new();
            for measure in Measure::ALL {
                for counting in [Counting::Cumulative, Counting::Window(config.window)] {
                    if let Ok(g) = gini_series_from(&series, measure, counting) {
                        out.push(g);
                    }
                }
            }
            (cohort, out)
        });
        for measure in Measure::ALL {
            for counting in [Counting::Cumulative, Counting::Window(config.window)] {
                let name = format!(
                    "data/gini/gini_{}_{}_{}_{}.csv",
                    measure.label(),
                    counting.label(),
                    attribution,
                    population
                );
                write_csv(&config.out, &name, &["cohort", "career_age", "gini"], |w| {
                    for (cohort, series_list) in &per_cohort {
                        let Some(series) = series_list
                            .iter()
                            .find(|g| g.measure == measure && g.counting == counting)
                        else {
                            continue;
                        };
                        for t in 1..=CAREER_SPAN {
                            let value = series.values[t - 1]
                                .map(|g| g.to_string())
                                .unwrap_or_default();
                            w.write_record([cohort.to_string(), t.to_string(), value])?;
                        }
                    }
                    Ok(())
                })?;
                manifest.record(&config.out, &name)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct GenderSummary {
    attribution: &'static str,
    population: &'static str,
    productivity: GridSummary,
    impact: GridSummary,
    /// Pearson correlation of the effect sizes over cells significant for
    /// both measures.
    cross_correlation: Option<f64>,
}

fn stage_gender(config: &RunConfig, corpus: &Corpus, manifest: &mut Manifest) -> Result<()> {
    let effective = effective_cohorts(corpus, config)?;
    fs::create_dir_all(config.out.join("data/gender"))?;
    let mut summaries = Vec::new();
    for (attribution, population, view) in view_combos(corpus, config.gap) {
        let cells_by_cohort = par_map(&effective, config.jobs, |&cohort| {
            let series = build_series(&view, cohort);
            Measure::ALL
                .map(|measure| gender_cells_from(corpus, &series, measure, config.alpha))
        });
        let mut grids: Vec<GenderGrid> = Vec::new();
        for (i, measure) in Measure::ALL.into_iter().enumerate() {
            let cells = cells_by_cohort
                .iter()
                .flat_map(|pair| pair[i].clone())
                .collect();
            let grid = grid_from_cells(measure, config.alpha, cells);
            let name = format!(
                "data/gender/grid_{}_{}_{}.csv",
                measure.label(),
                attribution,
                population
            );
            write_csv(
                &config.out,
                &name,
                &["cohort", "career_age", "n_male", "n_female", "u", "p", "d", "significant"],
                |w| {
                    for cell in &grid.cells {
                        let (u, p, d, significant) = match &cell.test {
                            Some(test) => (
                                test.u.to_string(),
                                test.p.to_string(),
                                test.d.to_string(),
                                test.significant.to_string(),
                            ),
                            None => Default::default(),
                        };
                        w.write_record([
                            cell.cohort.to_string(),
                            cell.t.to_string(),
                            cell.n_male.to_string(),
                            cell.n_female.to_string(),
                            u,
                            p,
                            d,
                            significant,
                        ])?;
                    }
                    Ok(())
                },
            )?;
            manifest.record(&config.out, &name)?;
            grids.push(grid);
        }
        summaries.push(GenderSummary {
            attribution,
            population,
            cross_correlation: cross_measure_correlation(&grids[0], &grids[1]),
            productivity: grids[0].summary.clone(),
            impact: grids[1].summary.clone(),
        });
    }
    write_json(&config.out, "reports/gender_summary.json", &summaries)?;
    manifest.record(&config.out, "reports/gender_summary.json")?;
    Ok(())
}

fn stage_matthew(config: &RunConfig, corpus: &Corpus, manifest: &mut Manifest) -> Result<()> {
    let effective = effective_cohorts(corpus, config)?;
    let view = make_view(corpus, config.first_author, config.remove_dropouts)
        .with_dropout_gap(config.gap);
    let opts = FitOptions::default();
    fs::create_dir_all(config.out.join("data/matthew"))?;

    for measure in Measure::ALL {
        let cells = par_map(&effective, config.jobs, |&cohort| {
            let series = build_series(&view, cohort);
            cohort_cells(&series, measure, &opts)
        })
        .into_iter()
        .flatten()
        .collect();
        let report: MeReport = report_from_cells(measure, cells);
        let json_name = format!("reports/matthew_{}.json", measure.label());
        write_json(&config.out, &json_name, &report)?;
        manifest.record(&config.out, &json_name)?;

        for (rows, label) in [
            (&report.career_profile, "by_age"),
            (&report.historical_profile, "by_cohort"),
        ] {
            let name = format!("data/matthew/{}_{}.csv", measure.label(), label);
            write_csv(
                &config.out,
                &name,
                &[
                    "key",
                    "cells",
                    "beta_mean",
                    "beta_min",
                    "beta_max",
                    "x_min_mean",
                    "x_min_min",
                    "x_min_max",
                ],
                |w| {
                    for row in rows.iter() {
                        w.write_record([
                            row.key.to_string(),
                            row.cells.to_string(),
                            row.beta_mean.to_string(),
                            row.beta_min.to_string(),
                            row.beta_max.to_string(),
                            row.x_min_mean.to_string(),
                            row.x_min_min.to_string(),
                            row.x_min_max.to_string(),
                        ])?;
                    }
                    Ok(())
                },
            )?;
            manifest.record(&config.out, &name)?;
        }
    }
    Ok(())
}

fn stage_features(
    config: &RunConfig,
    corpus: &Corpus,
    manifest: &mut Manifest,
) -> Result<FeatureTable> {
    // Same range validation (emptiness, coverage guard) as the series
    // stages, so a standalone `features` run cannot sweep in authors
    // whose histories the coverage window truncates.
    corpus.assign_cohorts(config.cohorts, config.guard_years)?;
    let view = corpus.view().with_dropout_gap(config.gap);
    let table = build_features(&view, config.cohorts, config.t_e, config.gap)?;

    fs::create_dir_all(config.out.join("data"))?;
    let mut header: Vec<&str> = vec!["author_id"];
    header.extend(FEATURE_COLUMNS);
    header.extend(["dropout", "success"]);
    write_csv(&config.out, "data/features.csv", &header, |w| {
        for row in &table.rows {
            let mut record = vec![row.author_id.clone()];
            record.extend(FEATURE_COLUMNS.iter().map(|c| row.value(c).to_string()));
            record.push(u8::from(row.dropout).to_string());
            record.push(row.success.to_string());
            w.write_record(record)?;
        }
        Ok(())
    })?;

    // Reference standardization over all rows, persisted for reuse; the
    // prediction stage re-derives its own statistics per training fold.
    let names: Vec<&str> = FEATURE_COLUMNS.to_vec();
    let columns: Vec<Vec<f64>> = names.iter().map(|n| table.column(n)).collect();
    let all_rows: Vec<usize> = (0..table.rows.len()).collect();
    if !all_rows.is_empty() {
        let (_, spec) = standardize(&names, &columns, &all_rows)?;
        write_json(&config.out, "reports/standardization.json", &spec)?;
        manifest.record(&config.out, "reports/standardization.json")?;
    }

    // The source index dump doubles as the venue-level report.
    let index = SourceIndex::build(corpus);
    write_csv(
        &config.out,
        "data/source_index.csv",
        &["source_id", "year", "h5", "quartile"],
        |w| {
            for row in index.rows() {
                w.write_record([
                    row.source_id.clone(),
                    row.year.to_string(),
                    row.h5.to_string(),
                    row.quartile.map(|q| q.to_string()).unwrap_or_default(),
                ])?;
            }
            Ok(())
        },
    )?;
    manifest.record(&config.out, "data/features.csv")?;
    manifest.record(&config.out, "data/source_index.csv")?;
    Ok(table)
}

fn stage_predict(config: &RunConfig, table: &FeatureTable, manifest: &mut Manifest) -> Result<()> {
    fs::create_dir_all(config.out.join("reports"))?;

    // Model runs are independent; fan them out and write in order.
    enum Model {
        Dropout(ModelTier),
        Success(ModelTier, bool),
    }
    let mut runs: Vec<(String, Model)> = Vec::new();
    for tier in ModelTier::ALL {
        runs.push((format!("dropout_{}", tier.label()), Model::Dropout(tier)));
    }
    for tier in ModelTier::ALL {
        runs.push((format!("success_{}", tier.label()), Model::Success(tier, false)));
    }
    runs.push((
        "success_social_support_stayers".into(),
        Model::Success(ModelTier::SocialSupport, true),
    ));

    let reports = par_map(&runs, config.jobs, |(_, model)| match model {
        Model::Dropout(tier) => dropout_model(table, *tier, config.seed),
        Model::Success(tier, stayers) => success_model(table, *tier, *stayers, config.seed),
    });

    let mut comparison: Vec<(String, RegressionReport)> = Vec::new();
    for ((label, _), report) in runs.iter().zip(reports) {
        let report = report?;
        let name = format!("reports/{label}.json");
        write_json(&config.out, &name, &report)?;
        manifest.record(&config.out, &name)?;
        comparison.push((label.clone(), report));
    }

    write_csv(
        &config.out,
        "data/model_comparison.csv",
        &["model", "n_obs", "folds", "f1", "average_precision", "mse", "adjusted_r2"],
        |w| {
            for (label, report) in &comparison {
                w.write_record([
                    label.clone(),
                    report.n_obs.to_string(),
                    report.folds_evaluated.to_string(),
                    option_field(report.metrics.f1),
                    option_field(report.metrics.average_precision),
                    option_field(report.metrics.mse),
                    option_field(report.metrics.adjusted_r2),
                ])?;
            }
            Ok(())
        },
    )?;
    manifest.record(&config.out, "data/model_comparison.csv")?;
    Ok(())
}

fn option_field(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn digest_file(path: &Path) -> Result<String> {
    Ok(format!("{:016x}", fnv1a(&fs::read(path)?)))
}

fn write_json<T: Serialize>(out: &Path, relative: &str, value: &T) -> Result<()> {
    let path = out.join(relative);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

fn write_with(
    out: &Path,
    relative: &str,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>,
) -> Result<()> {
    let path = out.join(relative);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = BufWriter::new(fs::File::create(path)?);
    body(&mut file)?;
    file.flush()?;
    Ok(())
}

fn write_csv(
    out: &Path,
    relative: &str,
    header: &[&str],
    body: impl FnOnce(&mut csv::Writer<BufWriter<fs::File>>) -> Result<()>,
) -> Result<()> {
    let path = out.join(relative);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut writer = csv::Writer::from_writer(BufWriter::new(fs::File::create(path)?));
    writer.write_record(header)?;
    body(&mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Map items across up to `jobs` worker threads, preserving input order.
/// Chunks are contiguous, so the merged output is identical for any
/// worker count.
pub fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let chunk_size = items.len().div_ceil(jobs);
    let mut results: Vec<Vec<R>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk_size)
            .map(|chunk| scope.spawn(|| chunk.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        for handle in handles {
            results.push(handle.join().expect("worker panicked"));
        }
    });
    results.into_iter().flatten().collect()
}
