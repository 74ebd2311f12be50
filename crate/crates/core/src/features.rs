//! Early-career feature matrix, dependent variables (dropout, success),
//! and robust standardization.
//!
//! One row per cohort member with a full 15-age observation window.
//! Achievement counts use every-author attribution (first-author counts
//! are their own column); the view passed in only decides which authors
//! are kept.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::careers::{build_series, CareerSeries};
use crate::corpus::{CorpusView, Gender};
use crate::error::{Error, Result};
use crate::indices::{author_h_index, top_source_flag, SourceIndex};
use crate::stats::{median_lower, quantile_linear};
use crate::CAREER_SPAN;

/// End of the early career (career ages 1..=t_e).
pub const DEFAULT_EARLY_CAREER: usize = 3;
/// Consecutive publication-free ages that define a dropout.
pub const DEFAULT_DROPOUT_GAP: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRow {
    pub author_id: String,
    pub cohort: i32,
    pub male: u8,
    pub female: u8,
    pub undetected: u8,
    /// Cumulative publications P(t_e).
    pub productivity: f64,
    /// Cumulative first-author publications in the early career.
    pub productivity_first: f64,
    /// Cumulative citations C(t_e).
    pub impact: f64,
    /// Published in a top-quartile source during the early career.
    pub top_source: u8,
    /// Distinct co-authors in the early career.
    pub collaboration_network: f64,
    /// Median team size over early publications (lower median).
    pub team_size: f64,
    /// Largest co-author h-index, citations counted until the year of t_e.
    pub senior_support: f64,
    pub dropout: bool,
    /// C(15) - C(t_e).
    pub success: f64,
}

/// Independent variables in report order.
pub const FEATURE_COLUMNS: [&str; 11] = [
    "cohort",
    "female",
    "male",
    "undetected",
    "productivity",
    "productivity_first",
    "impact",
    "top_source",
    "collaboration_network",
    "senior_support",
    "team_size",
];

/// Columns exempt from robust scaling: the interquartile range of a dummy
/// is usually zero, so 0/1 columns enter the models unscaled.
pub const BINARY_COLUMNS: [&str; 4] = ["female", "male", "undetected", "top_source"];

impl FeatureRow {
    pub fn value(&self, column: &str) -> f64 {
        match column {
            "cohort" => f64::from(self.cohort),
            "female" => f64::from(self.female),
            "male" => f64::from(self.male),
            "undetected" => f64::from(self.undetected),
            "productivity" => self.productivity,
            "productivity_first" => self.productivity_first,
            "impact" => self.impact,
            "top_source" => f64::from(self.top_source),
            "collaboration_network" => self.collaboration_network,
            "senior_support" => self.senior_support,
            "team_size" => self.team_size,
            other => panic!("unknown feature column {other}"),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FeatureTable {
    pub t_e: usize,
    pub dropout_gap: usize,
    pub rows: Vec<FeatureRow>,
    /// Authors left out because their cohort lacks a full 15-age window.
    pub excluded_without_window: u64,
}

impl FeatureTable {
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.rows.iter().map(|r| r.value(name)).collect()
    }
}

/// True iff some `gap` consecutive ages within the 15-age series have no
/// publications.
pub fn dropout_label(series: &CareerSeries, gap: usize) -> bool {
    let mut run = 0usize;
    for t in 1..=CAREER_SPAN {
        if series.p(t) == 0 {
            run += 1;
            if run >= gap {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

/// Citation increase after the early career: C(15) - C(t_e).
pub fn success_label(series: &CareerSeries, t_e: usize) -> u32 {
    series.cum_c(CAREER_SPAN) - series.cum_c(t_e)
}

/// Build one row per retained cohort member across the cohort range.
pub fn build_features(
    view: &CorpusView<'_>,
    cohorts: (i32, i32),
    t_e: usize,
    dropout_gap: usize,
) -> Result<FeatureTable> {
    if t_e == 0 || t_e > CAREER_SPAN {
        return Err(Error::InvalidInput(format!("t_e = {t_e} out of range")));
    }
    let corpus = view.base();
    let source_index = SourceIndex::build(corpus);
    let base = corpus.view();
    let mut table = FeatureTable {
        t_e,
        dropout_gap,
        rows: Vec::new(),
        excluded_without_window: 0,
    };
    let mut h_cache: HashMap<(u32, i32), u64> = HashMap::new();

    for cohort in cohorts.0..=cohorts.1 {
        let full_window = cohort + CAREER_SPAN as i32 - 1 <= corpus.coverage().1;
        let members: Vec<u32> = view.members(cohort);
        if !full_window {
            table.excluded_without_window += members.len() as u64;
            continue;
        }
        let year_te = cohort + t_e as i32 - 1;
        // Counts always come from every-author attribution.
        let series_by_author: HashMap<u32, CareerSeries> = build_series(&base, cohort)
            .series
            .into_iter()
            .map(|s| (s.author, s))
            .collect();
        for author in members {
            let series = &series_by_author[&author];
            let author_ref = corpus.author(author);

            let productivity_first = corpus
                .author_first_publications(author)
                .iter()
                .filter(|&&p| corpus.publication(p).year - author_ref.start_year < t_e as i32)
                .count() as f64;

            let mut coauthors: HashSet<u32> = HashSet::new();
            let mut team_sizes: Vec<u32> = Vec::new();
            for &p in corpus.author_publications(author) {
                let publication = corpus.publication(p);
                if publication.year - author_ref.start_year >= t_e as i32 {
                    continue;
                }
                team_sizes.push(publication.authors.len() as u32);
                coauthors.extend(publication.authors.iter().filter(|&&a| a != author));
            }

            let mut senior_support = 0u64;
            let mut sorted_coauthors: Vec<u32> = coauthors.iter().copied().collect();
            sorted_coauthors.sort_unstable();
            for co in sorted_coauthors {
                let h = *h_cache
                    .entry((co, year_te))
                    .or_insert_with(|| author_h_index(corpus, co, year_te));
                senior_support = senior_support.max(h);
            }

            let (male, female, undetected) = match author_ref.gender {
                Gender::Male => (1, 0, 0),
                Gender::Female => (0, 1, 0),
                Gender::Undetected => (0, 0, 1),
            };

            table.rows.push(FeatureRow {
                author_id: author_ref.author_id.clone(),
                cohort,
                male,
                female,
                undetected,
                productivity: f64::from(series.cum_p(t_e)),
                productivity_first,
                impact: f64::from(series.cum_c(t_e)),
                top_source: u8::from(top_source_flag(corpus, &source_index, author, t_e)),
                collaboration_network: coauthors.len() as f64,
                team_size: f64::from(median_lower(&mut team_sizes)),
                senior_support: senior_support as f64,
                dropout: dropout_label(series, dropout_gap),
                success: f64::from(success_label(series, t_e)),
            });
        }
    }
    Ok(table)
}

/// Robust per-column transform: (x - median) / (q3 - q1), quartiles from
/// linear interpolation between order statistics of the training rows.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StandardizationSpec {
    pub columns: BTreeMap<String, ColumnSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// False for degenerate columns (q3 = q1): centered only.
    pub scaled: bool,
    /// Binary columns pass through untouched.
    pub binary: bool,
}

impl ColumnSpec {
    pub fn fit(values: &[f64], train_rows: &[usize], binary: bool) -> ColumnSpec {
        if binary {
            return ColumnSpec {
                median: 0.0,
                q1: 0.0,
                q3: 0.0,
                scaled: false,
                binary: true,
            };
        }
        let mut sample: Vec<f64> = train_rows.iter().map(|&i| values[i]).collect();
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = quantile_linear(&sample, 0.5);
        let q1 = quantile_linear(&sample, 0.25);
        let q3 = quantile_linear(&sample, 0.75);
        ColumnSpec {
            median,
            q1,
            q3,
            scaled: q3 > q1,
            binary: false,
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.binary {
            x
        } else if self.scaled {
            (x - self.median) / (self.q3 - self.q1)
        } else {
            x - self.median
        }
    }
}

/// Standardize named columns using statistics from `train_rows` only.
/// Returns the transformed columns (same shape) and the reusable spec;
/// degenerate columns are centered and flagged via `scaled = false`.
pub fn standardize(
    names: &[&str],
    columns: &[Vec<f64>],
    train_rows: &[usize],
) -> Result<(Vec<Vec<f64>>, StandardizationSpec)> {
    if train_rows.is_empty() {
        return Err(Error::InvalidInput("no training rows".into()));
    }
    let mut spec = StandardizationSpec::default();
    let mut out = Vec::with_capacity(columns.len());
    for (name, values) in names.iter().zip(columns) {
        let binary = BINARY_COLUMNS.contains(name);
        let column_spec = ColumnSpec::fit(values, train_rows, binary);
        out.push(values.iter().map(|&x| column_spec.apply(x)).collect());
        spec.columns.insert((*name).to_string(), column_spec);
    }
    Ok((out, spec))
}
