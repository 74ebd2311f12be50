//! Immutable bibliographic corpus: publications, authors, citation edges,
//! cohort assignment, and filtered read-only views.
//!
//! Ingestion is single-writer: [`parse_publications`] builds the corpus,
//! [`Corpus::link_citations`] and [`Corpus::apply_gender_map`] complete it,
//! and from then on everything downstream borrows it immutably.

mod link;
mod parse;
mod snapshot;

pub use link::{parse_citation_keys_csv, CitationKey, LinkReport};
pub use parse::{load_gender_map, parse_publications, GenderMapReport, IngestReport, ParseOptions};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::CAREER_SPAN;

/// Gender label as ingested; never inferred by this toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Undetected,
}

impl Gender {
    pub fn parse(label: &str) -> Option<Gender> {
        match label {
            "male" | "m" => Some(Gender::Male),
            "female" | "f" => Some(Gender::Female),
            "undetected" | "unknown" => Some(Gender::Undetected),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub pub_id: String,
    pub title: String,
    /// Deterministic normalization of `title`; see [`normalize_title`].
    pub norm_title: String,
    pub year: i32,
    pub source_id: String,
    /// Ordered authorship, indices into [`Corpus::authors`].
    pub authors: Vec<u32>,
    pub preprint: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub author_id: String,
    pub gender: Gender,
    /// Year of the author's first publication in the corpus.
    pub start_year: i32,
}

/// A directed citation: `citing` cites `cited`. Indices into
/// [`Corpus::publications`]. The citing year is the citing publication's
/// year by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CitationEdge {
    pub citing: u32,
    pub cited: u32,
}

/// Title normalization: Unicode NFC, lowercase, punctuation and symbols
/// replaced by spaces, whitespace collapsed, trimmed.
pub fn normalize_title(title: &str) -> String {
    let mut out = String::with_capacity(title.len());
    let mut pending_space = false;
    for c in title.nfc().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct Corpus {
    publications: Vec<Publication>,
    authors: Vec<Author>,
    citations: Vec<CitationEdge>,
    /// Calendar years covered by the corpus (first, last).
    coverage: (i32, i32),

    // Derived lookups, rebuilt whenever the underlying vectors change.
    by_pub_id: HashMap<String, u32>,
    by_title_year: HashMap<(String, i32), Vec<u32>>,
    by_author_id: HashMap<String, u32>,
    /// Publications per author (every-author attribution), ordered by (year, idx).
    author_pubs: Vec<Vec<u32>>,
    /// Publications where the author is listed first, ordered by (year, idx).
    author_first_pubs: Vec<Vec<u32>>,
    /// Citing publication indices per cited publication, ordered by (year, idx).
    cited_by: Vec<Vec<u32>>,
}

impl Corpus {
    /// Assemble a corpus from finished parts; sorts everything into
    /// canonical order and builds the lookup tables. Used by the parser,
    /// the snapshot loader, and the synthetic generator. Publication
    /// author indices refer to positions in `author_ids_genders` and are
    /// remapped here.
    pub(crate) fn assemble(
        mut publications: Vec<Publication>,
        author_ids_genders: Vec<(String, Gender)>,
        coverage: Option<(i32, i32)>,
    ) -> Result<Corpus> {
        let mut order: Vec<u32> = (0..author_ids_genders.len() as u32).collect();
        order.sort_by(|&a, &b| {
            author_ids_genders[a as usize]
                .0
                .cmp(&author_ids_genders[b as usize].0)
        });
        for w in order.windows(2) {
            if author_ids_genders[w[0] as usize].0 == author_ids_genders[w[1] as usize].0 {
                return Err(Error::Conflict(format!(
                    "duplicate author id {}",
                    author_ids_genders[w[0] as usize].0
                )));
            }
        }
        let mut old_to_new = vec![0u32; author_ids_genders.len()];
        for (new, &old) in order.iter().enumerate() {
            old_to_new[old as usize] = new as u32;
        }
        for p in &mut publications {
            for a in &mut p.authors {
                *a = old_to_new[*a as usize];
            }
        }
        let sorted: Vec<(String, Gender)> = order
            .iter()
            .map(|&o| author_ids_genders[o as usize].clone())
            .collect();

        publications.sort_by(|a, b| a.pub_id.cmp(&b.pub_id));

        let coverage = match coverage {
            Some(c) => c,
            None => {
                let min = publications.iter().map(|p| p.year).min().unwrap_or(0);
                let max = publications.iter().map(|p| p.year).max().unwrap_or(0);
                (min, max)
            }
        };

        let mut start_year: Vec<Option<i32>> = vec![None; sorted.len()];
        for p in &publications {
            for &a in &p.authors {
                let s = &mut start_year[a as usize];
                *s = Some(s.map_or(p.year, |y| y.min(p.year)));
            }
        }

        let authors: Vec<Author> = sorted
            .into_iter()
            .zip(&start_year)
            .map(|((author_id, gender), start)| Author {
                author_id,
                gender,
                start_year: start.unwrap_or(coverage.0),
            })
            .collect();

        let mut corpus = Corpus {
            publications,
            authors,
            citations: Vec::new(),
            coverage,
            ..Corpus::default()
        };
        corpus.rebuild_pub_indexes()?;
        Ok(corpus)
    }

    fn rebuild_pub_indexes(&mut self) -> Result<()> {
        self.by_pub_id.clear();
        self.by_title_year.clear();
        for (i, p) in self.publications.iter().enumerate() {
            if self.by_pub_id.insert(p.pub_id.clone(), i as u32).is_some() {
                return Err(Error::Conflict(format!("duplicate pub_id {}", p.pub_id)));
            }
            self.by_title_year
                .entry((p.norm_title.clone(), p.year))
                .or_default()
                .push(i as u32);
        }
        self.by_author_id = self
            .authors
            .iter()
            .enumerate()
            .map(|(i, a)| (a.author_id.clone(), i as u32))
            .collect();

        self.author_pubs = vec![Vec::new(); self.authors.len()];
        self.author_first_pubs = vec![Vec::new(); self.authors.len()];
        let mut order: Vec<u32> = (0..self.publications.len() as u32).collect();
        order.sort_by_key(|&i| (self.publications[i as usize].year, i));
        for &i in &order {
            let p = &self.publications[i as usize];
            for (pos, &a) in p.authors.iter().enumerate() {
                self.author_pubs[a as usize].push(i);
                if pos == 0 {
                    self.author_first_pubs[a as usize].push(i);
                }
            }
        }
        self.rebuild_citation_index();
        Ok(())
    }

    pub(crate) fn rebuild_citation_index(&mut self) {
        self.citations.sort_unstable();
        self.citations.dedup();
        self.cited_by = vec![Vec::new(); self.publications.len()];
        let mut order: Vec<usize> = (0..self.citations.len()).collect();
        order.sort_by_key(|&e| {
            let edge = self.citations[e];
            (edge.cited, self.publications[edge.citing as usize].year, edge.citing)
        });
        for e in order {
            let edge = self.citations[e];
            self.cited_by[edge.cited as usize].push(edge.citing);
        }
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn authors(&self) -> &[Author] {
        &self.authors
    }

    pub fn citations(&self) -> &[CitationEdge] {
        &self.citations
    }

    pub fn coverage(&self) -> (i32, i32) {
        self.coverage
    }

    pub fn publication(&self, idx: u32) -> &Publication {
        &self.publications[idx as usize]
    }

    pub fn author(&self, idx: u32) -> &Author {
        &self.authors[idx as usize]
    }

    pub fn author_index(&self, author_id: &str) -> Option<u32> {
        self.by_author_id.get(author_id).copied()
    }

    pub fn pub_index(&self, pub_id: &str) -> Option<u32> {
        self.by_pub_id.get(pub_id).copied()
    }

    pub(crate) fn pubs_by_title_year(&self, norm_title: &str, year: i32) -> &[u32] {
        self.by_title_year
            .get(&(norm_title.to_string(), year))
            .map_or(&[], Vec::as_slice)
    }

    /// All publications of an author (every-author attribution), ordered
    /// by year.
    pub fn author_publications(&self, author: u32) -> &[u32] {
        &self.author_pubs[author as usize]
    }

    /// Publications where the author appears first, ordered by year.
    pub fn author_first_publications(&self, author: u32) -> &[u32] {
        &self.author_first_pubs[author as usize]
    }

    /// Citing publication indices for a cited publication, ordered by
    /// citing year.
    pub fn citing_publications(&self, cited: u32) -> &[u32] {
        &self.cited_by[cited as usize]
    }

    /// Career age of `author` in calendar `year`; the start year is age 1.
    pub fn career_age(&self, author: u32, year: i32) -> Result<usize> {
        career_age(self.author(author), year)
    }

    /// Cohort assignment: author in cohort `y` iff their first publication
    /// appeared in `y` and `y` lies within `range` (inclusive). Refuses
    /// cohort ranges that start within `guard_years` of the coverage start,
    /// where truncated histories masquerade as debuts.
    pub fn assign_cohorts(
        &self,
        range: (i32, i32),
        guard_years: i32,
    ) -> Result<BTreeMap<i32, Vec<u32>>> {
        if range.0 > range.1 {
            return Err(Error::InvalidInput(format!(
                "empty cohort range {}..={}",
                range.0, range.1
            )));
        }
        if range.0 < self.coverage.0 + guard_years {
            return Err(Error::InvalidInput(format!(
                "cohort range starts at {} but coverage starts at {}; need {} guard years to \
                 separate true debuts from truncated histories",
                range.0, self.coverage.0, guard_years
            )));
        }
        let mut cohorts: BTreeMap<i32, Vec<u32>> =
            (range.0..=range.1).map(|y| (y, Vec::new())).collect();
        for (i, a) in self.authors.iter().enumerate() {
            if let Some(members) = cohorts.get_mut(&a.start_year) {
                members.push(i as u32);
            }
        }
        Ok(cohorts)
    }

    /// Per-age publication presence (every-author attribution) over the
    /// first [`CAREER_SPAN`] ages.
    pub fn presence_mask(&self, author: u32) -> [bool; CAREER_SPAN] {
        let start = self.author(author).start_year;
        let mut mask = [false; CAREER_SPAN];
        for &p in self.author_publications(author) {
            let age = self.publications[p as usize].year - start;
            if (0..CAREER_SPAN as i32).contains(&age) {
                mask[age as usize] = true;
            }
        }
        mask
    }

    /// Number of career ages observable for this author before coverage
    /// ends, capped at [`CAREER_SPAN`].
    pub fn observed_span(&self, author: u32) -> usize {
        let span = self.coverage.1 - self.author(author).start_year + 1;
        span.clamp(0, CAREER_SPAN as i32) as usize
    }

    /// Dropout label: some `gap` consecutive publication-free career ages
    /// within the first [`CAREER_SPAN`]. The gap must lie entirely inside
    /// the observed span; authors whose window is cut short by the end of
    /// coverage stay `false` unless a full gap is already visible.
    pub fn dropout_flag(&self, author: u32, gap: usize) -> bool {
        let mask = self.presence_mask(author);
        let observed = self.observed_span(author);
        let mut run = 0usize;
        for &present in mask.iter().take(observed) {
            if present {
                run = 0;
            } else {
                run += 1;
                if run >= gap {
                    return true;
                }
            }
        }
        false
    }

    /// Unfiltered view over the whole corpus.
    pub fn view(&self) -> CorpusView<'_> {
        CorpusView {
            base: self,
            first_author_only: false,
            dropouts_removed: false,
            dropout_gap: 10,
            cohort_range: None,
        }
    }
}

/// Career age of an author in a calendar year (start year is age 1).
pub fn career_age(author: &Author, year: i32) -> Result<usize> {
    if year < author.start_year {
        return Err(Error::InvalidInput(format!(
            "year {} precedes start year {} of author {}",
            year, author.start_year, author.author_id
        )));
    }
    Ok((year - author.start_year + 1) as usize)
}

/// Read-only filtered projection of a corpus. Views never mutate the base
/// corpus, and applying the same filter twice is a no-op.
#[derive(Debug, Clone, Copy)]
pub struct CorpusView<'a> {
    base: &'a Corpus,
    first_author_only: bool,
    dropouts_removed: bool,
    dropout_gap: usize,
    cohort_range: Option<(i32, i32)>,
}

/// Convenience constructor matching the two standard filters.
pub fn make_view(corpus: &Corpus, first_author_only: bool, dropouts_removed: bool) -> CorpusView<'_> {
    corpus
        .view()
        .first_author_only(first_author_only)
        .dropouts_removed(dropouts_removed)
}

impl<'a> CorpusView<'a> {
    pub fn base(&self) -> &'a Corpus {
        self.base
    }

    pub fn first_author_only(mut self, on: bool) -> Self {
        self.first_author_only = on;
        self
    }

    pub fn dropouts_removed(mut self, on: bool) -> Self {
        self.dropouts_removed = on;
        self
    }

    pub fn with_dropout_gap(mut self, gap: usize) -> Self {
        self.dropout_gap = gap;
        self
    }

    pub fn with_cohort_range(mut self, range: (i32, i32)) -> Self {
        self.cohort_range = Some(range);
        self
    }

    pub fn is_first_author_only(&self) -> bool {
        self.first_author_only
    }

    pub fn is_dropouts_removed(&self) -> bool {
        self.dropouts_removed
    }

    pub fn dropout_gap(&self) -> usize {
        self.dropout_gap
    }

    /// Whether an author survives the view's author-level filters.
    pub fn retains(&self, author: u32) -> bool {
        !(self.dropouts_removed && self.base.dropout_flag(author, self.dropout_gap))
    }

    /// Publications attributed to `author` under this view's attribution
    /// rule, ordered by year. Empty when the author is filtered out.
    pub fn attributed_publications(&self, author: u32) -> &'a [u32] {
        if !self.retains(author) {
            return &[];
        }
        if self.first_author_only {
            self.base.author_first_publications(author)
        } else {
            self.base.author_publications(author)
        }
    }

    /// Cohort members retained by this view, in ascending author index
    /// order. Empty when the cohort year falls outside the view's range.
    pub fn members(&self, cohort: i32) -> Vec<u32> {
        if let Some((lo, hi)) = self.cohort_range {
            if cohort < lo || cohort > hi {
                return Vec::new();
            }
        }
        (0..self.base.authors.len() as u32)
            .filter(|&a| self.base.author(a).start_year == cohort && self.retains(a))
            .collect()
    }
}
