//! Individual inequality (Gini) and gender inequality (Mann-Whitney U
//! with Cliff's d) per cohort and career age.

use serde::{Deserialize, Serialize};

use crate::careers::{build_series, CohortSeries, Counting, Measure};
use crate::corpus::{Corpus, CorpusView, Gender};
use crate::error::{Error, Result};
use crate::stats::{normal_sf, pearson};
use crate::CAREER_SPAN;

/// Default significance threshold for grid cells.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Gini coefficient of a nonnegative sample: the mean absolute difference
/// over all pairs, normalized by twice the mean. Computed via the sorted
/// O(n log n) identity, which equals the direct double sum.
///
/// Errors on fewer than two values; an all-zero sample has no defined
/// value.
pub fn gini(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "gini needs at least two values, got {n}"
        )));
    }
    if values.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidInput("gini needs finite nonnegative values".into()));
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(Error::NotComputable("gini of an all-zero sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - nf - 1.0) * x)
        .sum();
    Ok(weighted / (nf * total))
}

/// Gini per career age for one cohort and one (measure, counting) choice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GiniSeries {
    pub cohort: i32,
    pub measure: Measure,
    pub counting: Counting,
    /// values[t-1]; `None` where the window does not fit or the cohort
    /// total is zero at t.
    pub values: Vec<Option<f64>>,
}

pub fn gini_series_from(
    series: &CohortSeries,
    measure: Measure,
    counting: Counting,
) -> Result<GiniSeries> {
    if series.series.len() < 2 {
        return Err(Error::NotComputable(format!(
            "cohort {} has fewer than two members",
            series.cohort
        )));
    }
    let mut values = Vec::with_capacity(CAREER_SPAN);
    for t in 1..=CAREER_SPAN {
        let xs: Option<Vec<f64>> = series
            .series
            .iter()
            .map(|s| s.value(measure, counting, t).map(f64::from))
            .collect();
        values.push(match xs {
            None => None,
            Some(xs) => match gini(&xs) {
                Ok(g) => Some(g),
                Err(Error::NotComputable(_)) => None,
                Err(e) => return Err(e),
            },
        });
    }
    Ok(GiniSeries {
        cohort: series.cohort,
        measure,
        counting,
        values,
    })
}

pub fn gini_series(
    view: &CorpusView<'_>,
    cohort: i32,
    measure: Measure,
    counting: Counting,
) -> Result<GiniSeries> {
    gini_series_from(&build_series(view, cohort), measure, counting)
}

/// Mann-Whitney U result for male vs. female samples.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MannWhitney {
    /// Male rank sum with midranks for ties.
    pub rank_sum_male: f64,
    pub u: f64,
    /// Two-sided p from the normal approximation with tie-corrected
    /// variance and continuity correction.
    pub p: f64,
}

/// Rank both samples together (ascending, midranks for ties) and form
/// U = R_m - n_m(n_m+1)/2.
pub fn mann_whitney_u(male: &[f64], female: &[f64]) -> Result<MannWhitney> {
    if male.is_empty() || female.is_empty() {
        return Err(Error::InvalidInput("both groups must be non-empty".into()));
    }
    let n_m = male.len();
    let n_f = female.len();
    let n = n_m + n_f;

    let mut combined: Vec<(f64, bool)> = male
        .iter()
        .map(|&x| (x, true))
        .chain(female.iter().map(|&x| (x, false)))
        .collect();
    combined.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut rank_sum_male = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && combined[j].0 == combined[i].0 {
            j += 1;
        }
        let ties = (j - i) as f64;
        // Ranks i+1 ..= j share the midrank.
        let midrank = (i + 1 + j) as f64 / 2.0;
        for item in &combined[i..j] {
            if item.1 {
                rank_sum_male += midrank;
            }
        }
        tie_term += ties * ties * ties - ties;
        i = j;
    }

    let u = rank_sum_male - (n_m * (n_m + 1)) as f64 / 2.0;

    let nf = n as f64;
    let prod = (n_m * n_f) as f64;
    let mean = prod / 2.0;
    let variance = prod / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    let p = if variance <= 0.0 {
        // Every observation tied: no evidence of a difference.
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / variance.sqrt();
        (2.0 * normal_sf(z)).min(1.0)
    };

    Ok(MannWhitney {
        rank_sum_male,
        u,
        p,
    })
}

/// Cliff's d from the U statistic: d = 2U/(n_m n_f) - 1. With midranks
/// this equals the pairwise dominance count exactly, ties contributing
/// zero. Positive d means male values dominate.
pub fn cliffs_d(male: &[f64], female: &[f64]) -> Result<f64> {
    let mw = mann_whitney_u(male, female)?;
    Ok(2.0 * mw.u / (male.len() * female.len()) as f64 - 1.0)
}

/// One (cohort, career age) comparison of male and female cumulative
/// counts. `test` is `None` when either gender group is empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenderTestCell {
    pub cohort: i32,
    pub t: usize,
    pub n_male: usize,
    pub n_female: usize,
    pub test: Option<GenderTest>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GenderTest {
    pub rank_sum_male: f64,
    pub u: f64,
    pub p: f64,
    pub d: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenderGrid {
    pub measure: Measure,
    pub alpha: f64,
    pub cells: Vec<GenderTestCell>,
    pub summary: GridSummary,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GridSummary {
    pub cells: u64,
    pub computable: u64,
    pub significant: u64,
    /// significant / computable.
    pub frac_significant: Option<f64>,
}

/// Grid cells for one cohort's series: one cell per career age. Authors
/// with undetected gender are excluded from both groups.
pub fn gender_cells_from(
    corpus: &Corpus,
    series: &CohortSeries,
    measure: Measure,
    alpha: f64,
) -> Vec<GenderTestCell> {
    let mut male_members = Vec::new();
    let mut female_members = Vec::new();
    for s in &series.series {
        match corpus.author(s.author).gender {
            Gender::Male => male_members.push(s),
            Gender::Female => female_members.push(s),
            Gender::Undetected => {}
        }
    }
    (1..=CAREER_SPAN)
        .map(|t| {
            let male: Vec<f64> = male_members
                .iter()
                .filter_map(|s| s.value(measure, Counting::Cumulative, t).map(f64::from))
                .collect();
            let female: Vec<f64> = female_members
                .iter()
                .filter_map(|s| s.value(measure, Counting::Cumulative, t).map(f64::from))
                .collect();
            let test = mann_whitney_u(&male, &female).ok().map(|mw| {
                let d = 2.0 * mw.u / (male.len() * female.len()) as f64 - 1.0;
                GenderTest {
                    rank_sum_male: mw.rank_sum_male,
                    u: mw.u,
                    p: mw.p,
                    d,
                    significant: mw.p <= alpha,
                }
            });
            GenderTestCell {
                cohort: series.cohort,
                t,
                n_male: male.len(),
                n_female: female.len(),
                test,
            }
        })
        .collect()
}

/// Full grid over a cohort range for one measure.
pub fn gender_grid(
    view: &CorpusView<'_>,
    cohorts: (i32, i32),
    measure: Measure,
    alpha: f64,
) -> GenderGrid {
    let mut cells = Vec::new();
    for cohort in cohorts.0..=cohorts.1 {
        let series = build_series(view, cohort);
        cells.extend(gender_cells_from(view.base(), &series, measure, alpha));
    }
    grid_from_cells(measure, alpha, cells)
}

pub fn grid_from_cells(measure: Measure, alpha: f64, cells: Vec<GenderTestCell>) -> GenderGrid {
    let mut summary = GridSummary {
        cells: cells.len() as u64,
        ..GridSummary::default()
    };
    for cell in &cells {
        if let Some(test) = &cell.test {
            summary.computable += 1;
            if test.significant {
                summary.significant += 1;
            }
        }
    }
    summary.frac_significant = (summary.computable > 0)
        .then(|| summary.significant as f64 / summary.computable as f64);
    GenderGrid {
        measure,
        alpha,
        cells,
        summary,
    }
}

/// Pearson correlation between the productivity and impact effect sizes
/// over cells significant in both grids. `None` when fewer than two such
/// cells exist or a variance vanishes.
pub fn cross_measure_correlation(productivity: &GenderGrid, impact: &GenderGrid) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (p, i) in productivity.cells.iter().zip(&impact.cells) {
        debug_assert_eq!((p.cohort, p.t), (i.cohort, i.t));
        if let (Some(tp), Some(ti)) = (&p.test, &i.test) {
            if tp.significant && ti.significant {
                xs.push(tp.d);
                ys.push(ti.d);
            }
        }
    }
    pearson(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct evaluation of the pairwise double sum.
    fn gini_direct(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let total: f64 = values.iter().sum();
        let mut pairs = 0.0;
        for &a in values {
            for &b in values {
                pairs += (a - b).abs();
            }
        }
        pairs / (2.0 * n * total)
    }

    /// Pairwise dominance count oracle, ties contributing zero.
    fn cliffs_brute(male: &[f64], female: &[f64]) -> f64 {
        let mut net = 0i64;
        for &m in male {
            for &f in female {
                if m > f {
                    net += 1;
                } else if m < f {
                    net -= 1;
                }
            }
        }
        net as f64 / (male.len() * female.len()) as f64
    }

    #[test]
    fn gini_hand_values() {
        assert_eq!(gini(&[4.0, 4.0, 4.0, 4.0]).unwrap(), 0.0);
        assert!((gini(&[0.0, 0.0, 0.0, 8.0]).unwrap() - 0.75).abs() < 1e-12);
        assert!((gini(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn gini_error_cases() {
        assert!(matches!(gini(&[1.0]), Err(Error::InvalidInput(_))));
        assert!(matches!(
            gini(&[0.0, 0.0]),
            Err(Error::NotComputable(_))
        ));
        assert!(gini(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn mann_whitney_hand_ranks() {
        let mw = mann_whitney_u(&[3.0, 5.0], &[1.0, 2.0]).unwrap();
        assert_eq!(mw.rank_sum_male, 7.0);
        assert_eq!(mw.u, 4.0);

        let mw = mann_whitney_u(&[1.0], &[5.0]).unwrap();
        assert_eq!(mw.u, 0.0);

        // All values tied: every rank is the midrank 2.5.
        let mw = mann_whitney_u(&[2.0, 2.0], &[2.0, 2.0]).unwrap();
        assert_eq!(mw.rank_sum_male, 5.0);
        assert_eq!(mw.u, 2.0);
        assert_eq!(mw.p, 1.0);

        assert!(mann_whitney_u(&[], &[1.0]).is_err());
    }

    #[test]
    fn cliffs_hand_values() {
        assert_eq!(cliffs_d(&[3.0, 5.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(cliffs_d(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(cliffs_d(&[1.0], &[5.0]).unwrap(), -1.0);
    }

    #[test]
    fn p_values_match_external_reference() {
        // Frozen two-sided asymptotic p-values from an independent
        // implementation (scipy.stats.mannwhitneyu, tie correction and
        // continuity correction on).
        let a = mann_whitney_u(&[3.0, 5.0], &[1.0, 2.0]).unwrap();
        assert_eq!(a.u, 4.0);
        assert!((a.p - 0.2452781168067728).abs() < 1e-12);

        let m = [4.0, 7.0, 7.0, 9.0, 12.0, 1.0, 15.0, 11.0];
        let f = [2.0, 2.0, 5.0, 5.0, 5.0, 8.0, 3.0, 10.0];
        let b = mann_whitney_u(&m, &f).unwrap();
        assert_eq!(b.u, 46.0);
        assert!((b.p - 0.15442325378008667).abs() < 1e-12);
    }

    #[test]
    fn normal_p_close_to_exact_enumeration() {
        // Exact permutation p: over every way to label 8 of the 16 pooled
        // observations as male, the fraction with |U - mean| at least as
        // extreme as observed.
        let male = [4.0, 7.0, 7.0, 9.0, 12.0, 1.0, 15.0, 11.0];
        let female = [2.0, 2.0, 5.0, 5.0, 5.0, 8.0, 3.0, 10.0];
        let observed = mann_whitney_u(&male, &female).unwrap();

        let pooled: Vec<f64> = male.iter().chain(&female).copied().collect();
        let n = pooled.len();
        let n_m = male.len();
        let mean = (n_m * (n - n_m)) as f64 / 2.0;
        let observed_dev = (observed.u - mean).abs();
        let mut extreme = 0u64;
        let mut total = 0u64;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n_m {
                continue;
            }
            let m: Vec<f64> = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| pooled[i]).collect();
            let f: Vec<f64> = (0..n).filter(|&i| mask & (1 << i) == 0).map(|i| pooled[i]).collect();
            let u = mann_whitney_u(&m, &f).unwrap().u;
            total += 1;
            if (u - mean).abs() >= observed_dev - 1e-9 {
                extreme += 1;
            }
        }
        let exact = extreme as f64 / total as f64;
        assert!(
            (observed.p - exact).abs() < 0.05,
            "approx {} vs exact {}",
            observed.p,
            exact
        );
    }

    proptest! {
        #[test]
        fn gini_matches_direct_double_sum(
            values in proptest::collection::vec(0u32..50, 2..60)
        ) {
            let xs: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
            prop_assume!(xs.iter().sum::<f64>() > 0.0);
            let fast = gini(&xs).unwrap();
            let direct = gini_direct(&xs);
            prop_assert!((fast - direct).abs() < 1e-9);
            prop_assert!((0.0..1.0).contains(&fast));
        }

        #[test]
        fn gini_scale_invariant(
            values in proptest::collection::vec(0u32..50, 2..40),
            scale in 0.001f64..1000.0
        ) {
            let xs: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
            prop_assume!(xs.iter().sum::<f64>() > 0.0);
            let scaled: Vec<f64> = xs.iter().map(|&x| x * scale).collect();
            prop_assert!((gini(&xs).unwrap() - gini(&scaled).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn cliffs_d_equals_bruteforce_and_antisymmetric(
            male in proptest::collection::vec(0u32..8, 1..25),
            female in proptest::collection::vec(0u32..8, 1..25)
        ) {
            let m: Vec<f64> = male.iter().map(|&v| f64::from(v)).collect();
            let f: Vec<f64> = female.iter().map(|&v| f64::from(v)).collect();
            let d = cliffs_d(&m, &f).unwrap();
            let brute = cliffs_brute(&m, &f);
            prop_assert!((d - brute).abs() < 1e-12);
            prop_assert!(d.abs() <= 1.0 + 1e-12);
            let swapped = cliffs_d(&f, &m).unwrap();
            prop_assert!((d + swapped).abs() < 1e-12);
        }

        #[test]
        fn swapping_groups_complements_u(
            male in proptest::collection::vec(0u32..10, 1..25),
            female in proptest::collection::vec(0u32..10, 1..25)
        ) {
            let m: Vec<f64> = male.iter().map(|&v| f64::from(v)).collect();
            let f: Vec<f64> = female.iter().map(|&v| f64::from(v)).collect();
            let a = mann_whitney_u(&m, &f).unwrap();
            let b = mann_whitney_u(&f, &m).unwrap();
            prop_assert!((a.u + b.u - (m.len() * f.len()) as f64).abs() < 1e-9);
            prop_assert!((a.p - b.p).abs() < 1e-12);
        }

        #[test]
        fn identity_d_from_u(
            male in proptest::collection::vec(0u32..10, 1..20),
            female in proptest::collection::vec(0u32..10, 1..20)
        ) {
            let m: Vec<f64> = male.iter().map(|&v| f64::from(v)).collect();
            let f: Vec<f64> = female.iter().map(|&v| f64::from(v)).collect();
            let mw = mann_whitney_u(&m, &f).unwrap();
            let d = cliffs_d(&m, &f).unwrap();
            let identity = 2.0 * mw.u / (m.len() * f.len()) as f64 - 1.0;
            prop_assert!((d - identity).abs() < 1e-12);
        }
    }

    mod series {
        use super::*;
        use crate::careers::build_series;
        use crate::corpus::test_support::{corpus_from, link_ids};

        fn record_line(pub_id: &str, year: i32, author: &str) -> String {
            format!(
                r#"{{"pub_id":"{pub_id}","title":"{pub_id}","year":{year},"source_id":"v","authors":[{{"author_id":"{author}","name":"{author}"}}]}}"#
            )
        }

        #[test]
        fn identical_careers_have_zero_gini() {
            let corpus = corpus_from(&[
                ("p1", "one", 1990, "v", &["a"]),
                ("p2", "two", 1990, "v", &["b"]),
                ("p3", "three", 1992, "v", &["a"]),
                ("p4", "four", 1992, "v", &["b"]),
            ]);
            let view = corpus.view();
            let g = gini_series(&view, 1990, Measure::Productivity, Counting::Cumulative).unwrap();
            for t in 1..=CAREER_SPAN {
                assert_eq!(g.values[t - 1], Some(0.0));
            }
        }

        #[test]
        fn zero_total_is_absent_not_zero() {
            let corpus = corpus_from(&[
                ("p1", "one", 1990, "v", &["a"]),
                ("p2", "two", 1990, "v", &["b"]),
            ]);
            let view = corpus.view();
            let g = gini_series(&view, 1990, Measure::Impact, Counting::Cumulative).unwrap();
            // Nobody is ever cited: impact Gini is absent at every age.
            assert!(g.values.iter().all(Option::is_none));
        }

        #[test]
        fn window_counting_absent_before_window_fits() {
            let corpus = corpus_from(&[
                ("p1", "one", 1990, "v", &["a"]),
                ("p2", "two", 1990, "v", &["b"]),
                ("p3", "three", 1991, "v", &["a"]),
            ]);
            let view = corpus.view();
            let g = gini_series(&view, 1990, Measure::Productivity, Counting::Window(3)).unwrap();
            assert!(g.values[0].is_none());
            assert!(g.values[1].is_none());
            assert!(g.values[2].is_some());
        }

        #[test]
        fn single_member_cohort_errors() {
            let corpus = corpus_from(&[("p1", "one", 1990, "v", &["a"])]);
            let view = corpus.view();
            assert!(gini_series(&view, 1990, Measure::Productivity, Counting::Cumulative).is_err());
        }

        #[test]
        fn grid_cell_not_computable_without_both_genders() {
            let mut corpus = corpus_from(&[
                ("p1", "one", 1990, "v", &["a"]),
                ("p2", "two", 1990, "v", &["b"]),
            ]);
            corpus.apply_gender_map(&[("a".into(), Gender::Male)]);
            let view = corpus.view();
            let grid = gender_grid(&view, (1990, 1990), Measure::Productivity, DEFAULT_ALPHA);
            assert_eq!(grid.cells.len(), CAREER_SPAN);
            assert!(grid.cells.iter().all(|c| c.test.is_none()));
            assert_eq!(grid.summary.computable, 0);
            assert_eq!(grid.summary.frac_significant, None);
        }

        #[test]
        fn grid_detects_planted_dominance() {
            // Five prolific men vs five one-paper women in one cohort.
            let mut lines = Vec::new();
            for i in 0..5 {
                lines.push(record_line(&format!("m{i}"), 1990, &format!("man{i}")));
                for extra in 0..6 {
                    lines.push(record_line(
                        &format!("m{i}x{extra}"),
                        1991 + (extra % 3),
                        &format!("man{i}"),
                    ));
                }
                lines.push(record_line(&format!("f{i}"), 1990, &format!("woman{i}")));
            }
            let jsonl = lines.join("\n");
            let (mut corpus, _) = crate::corpus::parse_publications(
                jsonl.as_bytes(),
                &crate::corpus::ParseOptions::default(),
            )
            .unwrap();
            let genders: Vec<(String, Gender)> = (0..5)
                .flat_map(|i| {
                    [
                        (format!("man{i}"), Gender::Male),
                        (format!("woman{i}"), Gender::Female),
                    ]
                })
                .collect();
            corpus.apply_gender_map(&genders);
            let view = corpus.view();
            let grid = gender_grid(&view, (1990, 1990), Measure::Productivity, DEFAULT_ALPHA);
            let late = grid.cells.iter().find(|c| c.t == 15).unwrap();
            let test = late.test.as_ref().unwrap();
            assert!(test.d > 0.9);
            assert!(test.significant, "p = {}", test.p);
        }

        #[test]
        fn correlation_matches_paired_significant_cells() {
            let mut corpus = corpus_from(&[
                ("p1", "one", 1990, "v", &["a"]),
                ("p2", "two", 1990, "v", &["b"]),
            ]);
            corpus.apply_gender_map(&[
                ("a".into(), Gender::Male),
                ("b".into(), Gender::Female),
            ]);
            let view = corpus.view();
            let prod = gender_grid(&view, (1990, 1990), Measure::Productivity, DEFAULT_ALPHA);
            let imp = gender_grid(&view, (1990, 1990), Measure::Impact, DEFAULT_ALPHA);
            // One man vs one woman: nothing is significant, correlation is
            // undefined.
            assert_eq!(cross_measure_correlation(&prod, &imp), None);
        }

        #[test]
        fn noisy_cohort_series_link_sanity() {
            let mut corpus = corpus_from(&[
                ("p1", "one", 1990, "v", &["a"]),
                ("p2", "two", 1991, "v", &["b"]),
                ("p3", "three", 1992, "v", &["b"]),
            ]);
            link_ids(&mut corpus, &[("p2", "p1"), ("p3", "p1")]);
            let series = build_series(&corpus.view(), 1990);
            let g = gini_series_from(&series, Measure::Impact, Counting::Cumulative);
            assert!(g.is_err(), "single-member cohort must error");
        }
    }
}
