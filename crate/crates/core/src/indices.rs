//! Bibliometric indices used as features: author h-index, source
//! h5-index, and top-quartile source membership.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::stats::percentile_nearest_rank;

/// Largest h such that at least h publications have at least h citations.
pub fn h_index(citation_counts: &[u64]) -> u64 {
    let mut counts = citation_counts.to_vec();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let mut h = 0u64;
    for (i, &c) in counts.iter().enumerate() {
        if c > i as u64 {
            h = i as u64 + 1;
        } else {
            break;
        }
    }
    h
}

/// Citations a publication received in calendar years [lo, hi].
fn window_citations(corpus: &Corpus, publication: u32, lo: i32, hi: i32) -> u64 {
    let citing = corpus.citing_publications(publication);
    // Citing lists are ordered by citing year.
    let start = citing.partition_point(|&c| corpus.publication(c).year < lo);
    let end = citing.partition_point(|&c| corpus.publication(c).year <= hi);
    (end - start) as u64
}

/// h5 of a source in a year: the h-index over the source's publications
/// from the five years [year-4, year], counting only citations received
/// in those years. Unknown sources score 0.
pub fn h5_index(corpus: &Corpus, source_id: &str, year: i32) -> u64 {
    let counts: Vec<u64> = corpus
        .publications()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.source_id == source_id && p.year >= year - 4 && p.year <= year)
        .map(|(i, _)| window_citations(corpus, i as u32, year - 4, year))
        .collect();
    h_index(&counts)
}

/// Author h-index from citations received up to and including `year`, over
/// the author's publications up to `year`.
pub fn author_h_index(corpus: &Corpus, author: u32, year: i32) -> u64 {
    let counts: Vec<u64> = corpus
        .author_publications(author)
        .iter()
        .filter(|&&p| corpus.publication(p).year <= year)
        .map(|&p| window_citations(corpus, p, i32::MIN, year))
        .collect();
    h_index(&counts)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceYearIndex {
    pub source_id: String,
    pub year: i32,
    pub h5: u64,
    /// Quartile rank 1 (top) .. 4 within the year's source-h5
    /// distribution; `None` when the year has fewer than four sources.
    pub quartile: Option<u8>,
}

/// Precomputed h5 per (source, year) for every year a source published in,
/// plus the per-year quartile thresholds.
#[derive(Debug, Clone, Default)]
pub struct SourceIndex {
    h5: HashMap<(String, i32), u64>,
    /// Nearest-rank [p25, p50, p75] per year; `None` below four sources.
    thresholds: BTreeMap<i32, Option<[u64; 3]>>,
}

impl SourceIndex {
    pub fn build(corpus: &Corpus) -> SourceIndex {
        // Publications per source, and the set of (source, year) cells to
        // evaluate: every year a source actually published in.
        let mut by_source: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
        let mut active: BTreeMap<i32, Vec<&str>> = BTreeMap::new();
        for (i, p) in corpus.publications().iter().enumerate() {
            by_source.entry(&p.source_id).or_default().push(i as u32);
            let year = active.entry(p.year).or_default();
            if !year.contains(&p.source_id.as_str()) {
                year.push(&p.source_id);
            }
        }

        let mut index = SourceIndex::default();
        for (&year, sources) in &active {
            let mut h5s = Vec::with_capacity(sources.len());
            for &source in sources {
                let counts: Vec<u64> = by_source[source]
                    .iter()
                    .filter(|&&p| {
                        let y = corpus.publication(p).year;
                        y >= year - 4 && y <= year
                    })
                    .map(|&p| window_citations(corpus, p, year - 4, year))
                    .collect();
                let h5 = h_index(&counts);
                index.h5.insert((source.to_string(), year), h5);
                h5s.push(h5);
            }
            let thresholds = (h5s.len() >= 4).then(|| {
                let mut sorted: Vec<f64> = h5s.iter().map(|&v| v as f64).collect();
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                [
                    percentile_nearest_rank(&sorted, 0.25) as u64,
                    percentile_nearest_rank(&sorted, 0.50) as u64,
                    percentile_nearest_rank(&sorted, 0.75) as u64,
                ]
            });
            index.thresholds.insert(year, thresholds);
        }
        index
    }

    /// h5 of a source in a year it published in.
    pub fn h5(&self, source_id: &str, year: i32) -> Option<u64> {
        self.h5.get(&(source_id.to_string(), year)).copied()
    }

    /// Quartile rank of a source within its year (1 = top quartile).
    pub fn quartile_rank(&self, source_id: &str, year: i32) -> Option<u8> {
        let h5 = self.h5(source_id, year)?;
        let thresholds = self.thresholds.get(&year).copied().flatten()?;
        Some(match h5 {
            v if v >= thresholds[2] => 1,
            v if v >= thresholds[1] => 2,
            v if v >= thresholds[0] => 3,
            _ => 4,
        })
    }

    /// Whether a source sits in the top quartile of its year. `None` when
    /// the year's percentile is undefined (fewer than four sources).
    pub fn is_top(&self, source_id: &str, year: i32) -> Option<bool> {
        self.quartile_rank(source_id, year).map(|rank| rank == 1)
    }

    /// All rows, sorted by (source, year), for the CSV dump.
    pub fn rows(&self) -> Vec<SourceYearIndex> {
        let mut keys: Vec<&(String, i32)> = self.h5.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|(source_id, year)| SourceYearIndex {
                source_id: source_id.clone(),
                year: *year,
                h5: self.h5[&(source_id.clone(), *year)],
                quartile: self.quartile_rank(source_id, *year),
            })
            .collect()
    }
}

/// Whether any of the author's early-career publications (career ages
/// 1..=t_e, every-author attribution) appeared in a source that sits in
/// the top quartile of that publication year's source-h5 distribution.
/// Years with undefined percentiles contribute `false`.
pub fn top_source_flag(corpus: &Corpus, index: &SourceIndex, author: u32, t_e: usize) -> bool {
    let start = corpus.author(author).start_year;
    let pubs = corpus.author_publications(author);
    assert!(
        !pubs.is_empty(),
        "cohort members publish at career age 1 by construction"
    );
    pubs.iter()
        .map(|&p| corpus.publication(p))
        .filter(|p| (p.year - start) < t_e as i32)
        .any(|p| index.is_top(&p.source_id, p.year).unwrap_or(false))
}
