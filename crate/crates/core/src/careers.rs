//! Per-author career time series and field-level descriptives.
//!
//! For every cohort member we track, per career age t in 1..=15, the
//! publications authored p(t), their cumulative count P(t), the citations
//! received c(t), their cumulative count C(t), and the full
//! (publication age, citation age) matrix the windowed counts are read
//! from. Citations are counted from the whole corpus, not just from the
//! author's cohort.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusView, Gender};
use crate::error::{Error, Result};
use crate::CAREER_SPAN;

/// What is being counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Productivity,
    Impact,
}

impl Measure {
    pub const ALL: [Measure; 2] = [Measure::Productivity, Measure::Impact];

    pub fn label(self) -> &'static str {
        match self {
            Measure::Productivity => "productivity",
            Measure::Impact => "impact",
        }
    }
}

/// How counts accumulate over career ages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Counting {
    Cumulative,
    /// Backward-looking window of the given width (the given age plus the
    /// preceding `width - 1` ages).
    Window(usize),
}

impl Counting {
    pub fn label(self) -> String {
        match self {
            Counting::Cumulative => "cumulative".into(),
            Counting::Window(w) => format!("window{w}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CareerSeries {
    /// Author index in the source corpus.
    pub author: u32,
    pub cohort: i32,
    /// p(t), publications authored in age t (index t-1).
    pub publications: [u32; CAREER_SPAN],
    /// cite_matrix[a-1][t-1]: citations received in age t by publications
    /// authored in age a; zero for t < a.
    pub cite_matrix: [[u32; CAREER_SPAN]; CAREER_SPAN],
}

impl CareerSeries {
    pub fn p(&self, t: usize) -> u32 {
        self.publications[t - 1]
    }

    /// Citations received in age t by all publications so far.
    pub fn c(&self, t: usize) -> u32 {
        (1..=t).map(|a| self.cite_matrix[a - 1][t - 1]).sum()
    }

    /// Cumulative publications P(t).
    pub fn cum_p(&self, t: usize) -> u32 {
        self.publications[..t].iter().sum()
    }

    /// Cumulative citations C(t).
    pub fn cum_c(&self, t: usize) -> u32 {
        (1..=t).map(|tt| self.c(tt)).sum()
    }

    /// Backward-looking window counts over `width` ages ending at `t`:
    /// publications authored in the window and citations received in the
    /// window by publications authored in the window.
    pub fn windowed(&self, t: usize, width: usize) -> Result<(u32, u32)> {
        if width == 0 || t < width || t > CAREER_SPAN {
            return Err(Error::InvalidInput(format!(
                "window of width {width} does not fit at age {t}"
            )));
        }
        let p: u32 = (0..width).map(|back| self.publications[t - back - 1]).sum();
        let mut c = 0u32;
        for back in 0..width {
            let a = t - back;
            for receive in a..=t {
                c += self.cite_matrix[a - 1][receive - 1];
            }
        }
        Ok((p, c))
    }

    /// The 3-year window counts (p3, c3) at age t ≥ 3.
    pub fn window_counts(&self, t: usize) -> Result<(u32, u32)> {
        self.windowed(t, 3)
    }

    /// Career-age value of a measure under a counting scheme; `None` when
    /// the window does not fit at `t`.
    pub fn value(&self, measure: Measure, counting: Counting, t: usize) -> Option<u32> {
        match counting {
            Counting::Cumulative => Some(match measure {
                Measure::Productivity => self.cum_p(t),
                Measure::Impact => self.cum_c(t),
            }),
            Counting::Window(w) => {
                let (p, c) = self.windowed(t, w).ok()?;
                Some(match measure {
                    Measure::Productivity => p,
                    Measure::Impact => c,
                })
            }
        }
    }

    /// Length of the initial unbroken run of publishing ages.
    pub fn persistence(&self) -> usize {
        self.publications.iter().take_while(|&&p| p >= 1).count()
    }
}

/// All career series of one cohort under one view.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CohortSeries {
    pub cohort: i32,
    pub series: Vec<CareerSeries>,
    /// Citation edges dated before the cited publication (data noise),
    /// dropped from the matrices.
    pub noise_citations_dropped: u64,
}

/// Build one CareerSeries per retained cohort member. Citations come from
/// every corpus publication; publications and citations beyond career age
/// 15 stay in the corpus but are excluded here.
pub fn build_series(view: &CorpusView<'_>, cohort: i32) -> CohortSeries {
    let corpus = view.base();
    let mut out = CohortSeries {
        cohort,
        ..CohortSeries::default()
    };
    for author in view.members(cohort) {
        let start = corpus.author(author).start_year;
        let mut series = CareerSeries {
            author,
            cohort,
            publications: [0; CAREER_SPAN],
            cite_matrix: [[0; CAREER_SPAN]; CAREER_SPAN],
        };
        for &p in view.attributed_publications(author) {
            let publication = corpus.publication(p);
            let age = i64::from(publication.year - start) + 1;
            if !(1..=CAREER_SPAN as i64).contains(&age) {
                continue;
            }
            let a = age as usize;
            series.publications[a - 1] += 1;
            for &citing in corpus.citing_publications(p) {
                let citing_year = corpus.publication(citing).year;
                if citing_year < publication.year {
                    out.noise_citations_dropped += 1;
                    continue;
                }
                let t = (citing_year - start + 1) as usize;
                if t <= CAREER_SPAN {
                    series.cite_matrix[a - 1][t - 1] += 1;
                }
            }
        }
        out.series.push(series);
    }
    out
}

/// Field-level descriptives over assigned cohorts: cohort composition and
/// dropout by gender, yearly mean team size, persistence histogram by
/// gender, and pooled CCDFs of the age-15 cumulative counts. Cohorts whose
/// 15-age window extends past the coverage end are skipped.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FieldDescriptives {
    pub cohorts: Vec<CohortDescriptives>,
    pub team_size_by_year: Vec<TeamSizeYear>,
    pub persistence: Vec<PersistenceBin>,
    pub ccdf_productivity: Vec<CcdfPoint>,
    pub ccdf_impact: Vec<CcdfPoint>,
    /// Cohort years skipped for lack of a full 15-age window.
    pub cohorts_skipped: Vec<i32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortDescriptives {
    pub cohort: i32,
    pub members: u64,
    pub male: u64,
    pub female: u64,
    pub undetected: u64,
    pub dropouts: u64,
    pub dropout_fraction: Option<f64>,
    pub dropout_fraction_male: Option<f64>,
    pub dropout_fraction_female: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TeamSizeYear {
    pub year: i32,
    pub publications: u64,
    pub mean_authors: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PersistenceBin {
    pub years: usize,
    pub male: u64,
    pub female: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CcdfPoint {
    pub value: u64,
    /// Fraction of authors with a count ≥ `value`.
    pub ccdf: f64,
}

pub fn field_descriptives(
    corpus: &Corpus,
    cohorts: &BTreeMap<i32, Vec<u32>>,
    dropout_gap: usize,
) -> FieldDescriptives {
    let mut out = FieldDescriptives::default();
    let view = corpus.view();

    let mut p15: Vec<u64> = Vec::new();
    let mut c15: Vec<u64> = Vec::new();
    let mut persistence =
        vec![PersistenceBin { years: 0, male: 0, female: 0, total: 0 }; CAREER_SPAN];
    for (i, bin) in persistence.iter_mut().enumerate() {
        bin.years = i + 1;
    }

    for (&cohort, members) in cohorts {
        if cohort + CAREER_SPAN as i32 - 1 > corpus.coverage().1 {
            out.cohorts_skipped.push(cohort);
            continue;
        }
        let mut desc = CohortDescriptives {
            cohort,
            members: members.len() as u64,
            male: 0,
            female: 0,
            undetected: 0,
            dropouts: 0,
            dropout_fraction: None,
            dropout_fraction_male: None,
            dropout_fraction_female: None,
        };
        let mut dropouts_male = 0u64;
        let mut dropouts_female = 0u64;
        for &author in members {
            let gender = corpus.author(author).gender;
            let dropout = corpus.dropout_flag(author, dropout_gap);
            match gender {
                Gender::Male => desc.male += 1,
                Gender::Female => desc.female += 1,
                Gender::Undetected => desc.undetected += 1,
            }
            if dropout {
                desc.dropouts += 1;
                match gender {
                    Gender::Male => dropouts_male += 1,
                    Gender::Female => dropouts_female += 1,
                    Gender::Undetected => {}
                }
            }
        }
        desc.dropout_fraction = fraction(desc.dropouts, desc.members);
        desc.dropout_fraction_male = fraction(dropouts_male, desc.male);
        desc.dropout_fraction_female = fraction(dropouts_female, desc.female);
        out.cohorts.push(desc);

        let series = build_series(&view, cohort);
        for s in &series.series {
            p15.push(u64::from(s.cum_p(CAREER_SPAN)));
            c15.push(u64::from(s.cum_c(CAREER_SPAN)));
            let k = s.persistence();
            if k >= 1 {
                let bin = &mut persistence[k - 1];
                bin.total += 1;
                match corpus.author(s.author).gender {
                    Gender::Male => bin.male += 1,
                    Gender::Female => bin.female += 1,
                    Gender::Undetected => {}
                }
            }
        }
    }

    let mut by_year: BTreeMap<i32, (u64, u64)> = BTreeMap::new();
    for p in corpus.publications() {
        let entry = by_year.entry(p.year).or_default();
        entry.0 += 1;
        entry.1 += p.authors.len() as u64;
    }
    out.team_size_by_year = by_year
        .into_iter()
        .map(|(year, (pubs, authors))| TeamSizeYear {
            year,
            publications: pubs,
            mean_authors: authors as f64 / pubs as f64,
        })
        .collect();

    out.persistence = persistence;
    out.ccdf_productivity = ccdf(&mut p15);
    out.ccdf_impact = ccdf(&mut c15);
    out
}

fn fraction(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Empirical complementary CDF at each distinct observed value.
fn ccdf(values: &mut [u64]) -> Vec<CcdfPoint> {
    if values.is_empty() {
        return Vec::new();
    }
    values.sort_unstable();
    let n = values.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let v = values[i];
        out.push(CcdfPoint {
            value: v,
            ccdf: (values.len() - i) as f64 / n,
        });
        while i < values.len() && values[i] == v {
            i += 1;
        }
    }
    out
}
