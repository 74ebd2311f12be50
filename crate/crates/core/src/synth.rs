//! Synthetic cumulative-advantage cohort generator.
//!
//! Produces corpora with known ground truth: per-age publication counts
//! drawn around base_rate · max(P(t-1), cutoff)^beta_prod, and citations
//! to each existing publication drawn around
//! base_rate · max(C(t-1), cutoff)^beta_impact, under gendered dropout
//! hazards and exponentially growing cohorts. A pool of pre-cohort field
//! authors (debuting ten years before the first cohort, at the coverage
//! start) carries the citing stream, so citations come from the whole
//! field while the cohort range stays clean.
//!
//! The generator feeds the same cumulative state into its rates that the
//! measurement later regresses on, so recovering the planted exponents is
//! a genuine inverse problem. With solo teams the loop is exact; with
//! teams, co-authorship spillover makes it directional.

use std::collections::BTreeMap;

use rand::seq::index::sample as sample_indices;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Gender, Publication};
use crate::error::{Error, Result};
use crate::CAREER_SPAN;

/// Linear schedule across cohort years (constant when start = end).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub start: f64,
    pub end: f64,
}

impl Ramp {
    pub fn constant(value: f64) -> Ramp {
        Ramp {
            start: value,
            end: value,
        }
    }

    pub fn at(&self, fraction: f64) -> f64 {
        self.start + (self.end - self.start) * fraction
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub cohort_years: (i32, i32),
    pub first_cohort_size: usize,
    /// Exponential growth rate of cohort sizes per year.
    pub cohort_size_growth: f64,
    /// Feedback exponents, scheduled across cohort years.
    pub beta_prod: Ramp,
    pub beta_impact: Ramp,
    /// Poisson intensity scale for p(t), t ≥ 2.
    pub base_rate_prod: f64,
    /// Poisson intensity scale, per existing publication, for the
    /// citations received in an age t ≥ 2.
    pub base_rate_impact: f64,
    /// Debut heterogeneity: activity ~ LogNormal(ln_mean, sigma); the
    /// debut sees p(1) = 1 + Poisson(activity) publications and
    /// c(1) ~ Poisson(debut_impact_scale · activity) citations.
    pub debut_activity_ln_mean: f64,
    pub debut_activity_sigma: f64,
    pub debut_impact_scale: f64,
    /// Activity level below which feedback is flat.
    pub cutoff_true: f64,
    /// Per-age probability of leaving the field, by gender, at career
    /// age 2; later ages multiply in `dropout_hazard_decay` once per age.
    pub dropout_hazard_male: f64,
    pub dropout_hazard_female: f64,
    pub dropout_hazard_undetected: f64,
    /// Multiplicative per-age decay of the hazards (1 = constant risk).
    #[serde(default = "default_hazard_decay")]
    pub dropout_hazard_decay: f64,
    pub female_share: f64,
    pub undetected_share: f64,
    /// Mean team size at the first cohort year and its per-year drift.
    pub team_size_base: f64,
    pub team_size_drift: f64,
    /// Pre-cohort authors carrying the citing stream.
    pub field_authors: usize,
    pub sources: usize,
    /// Hard cap on any expected count; beyond it the run aborts.
    pub expected_ceiling: f64,
    /// Career ages members stay generative (publications and citation
    /// flow stop afterwards). Recovery scenarios cut this short so that
    /// supercritical feedback cannot outgrow memory.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

fn default_horizon() -> usize {
    CAREER_SPAN
}

fn default_hazard_decay() -> f64 {
    1.0
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        let probabilities = [
            self.dropout_hazard_male,
            self.dropout_hazard_female,
            self.dropout_hazard_undetected,
            self.female_share,
            self.undetected_share,
        ];
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput("probabilities must lie in [0, 1]".into()));
        }
        if self.female_share + self.undetected_share > 1.0 {
            return Err(Error::InvalidInput("gender shares exceed 1".into()));
        }
        if self.cohort_years.0 > self.cohort_years.1 {
            return Err(Error::InvalidInput("empty cohort range".into()));
        }
        if self.first_cohort_size == 0 || self.field_authors == 0 || self.sources == 0 {
            return Err(Error::InvalidInput("sizes must be positive".into()));
        }
        if self.base_rate_prod <= 0.0
            || self.base_rate_impact < 0.0
            || self.cutoff_true < 1.0
            || self.expected_ceiling <= 0.0
        {
            return Err(Error::InvalidInput("rates out of range".into()));
        }
        if !(0.0..=1.0).contains(&self.dropout_hazard_decay) || self.dropout_hazard_decay == 0.0 {
            return Err(Error::InvalidInput("hazard decay must lie in (0, 1]".into()));
        }
        if self.horizon == 0 || self.horizon > CAREER_SPAN {
            return Err(Error::InvalidInput(format!(
                "horizon must lie in 1..={CAREER_SPAN}"
            )));
        }
        Ok(())
    }
}

struct Member {
    author: u32,
    gender: Gender,
    rng: ChaCha12Rng,
    activity: f64,
    active: bool,
    cum_p: u64,
    cum_c: u64,
    /// Local publication handles, every-author attribution.
    pubs: Vec<u32>,
}

struct Sim {
    publications: Vec<Publication>,
    edges: Vec<(u32, u32)>,
    sources: Vec<String>,
}

impl Sim {
    fn add_publication(&mut self, pub_id: String, year: i32, source: usize, authors: Vec<u32>) -> u32 {
        let idx = self.publications.len() as u32;
        self.publications.push(Publication {
            norm_title: crate::corpus::normalize_title(&pub_id),
            title: pub_id.clone(),
            pub_id,
            year,
            source_id: self.sources[source].clone(),
            authors,
            preprint: false,
        });
        idx
    }
}

/// Whole-corpus safety valve independent of the per-draw ceiling.
const MAX_PUBLICATIONS: usize = 20_000_000;

fn poisson_count(rng: &mut ChaCha12Rng, mean: f64, ceiling: f64) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    if mean > ceiling {
        return Err(Error::SimulationGuard(format!(
            "expected count {mean:.1} above ceiling {ceiling:.0}; runaway feedback"
        )));
    }
    let draw = Poisson::new(mean)
        .map_err(|e| Error::InvalidInput(format!("poisson({mean}): {e}")))?
        .sample(rng);
    Ok(draw as u64)
}

/// Generate a corpus from the parameters. Same seed, same corpus, byte
/// for byte.
pub fn simulate(params: &SynthParams) -> Result<Corpus> {
    params.validate()?;
    let (first_cohort, last_cohort) = params.cohort_years;
    let coverage_start = first_cohort - 10;
    let coverage_end = last_cohort + CAREER_SPAN as i32 - 1;
    let n_cohorts = (last_cohort - first_cohort + 1) as usize;

    let mut sim = Sim {
        publications: Vec::new(),
        edges: Vec::new(),
        sources: (0..params.sources).map(|s| format!("S{s:03}")).collect(),
    };
    let mut authors: Vec<(String, Gender)> = Vec::new();

    // Field pool: one seed publication each at the coverage start.
    let mut field_rng = master_stream(params.seed, u64::MAX);
    for f in 0..params.field_authors {
        let id = format!("F{f:06}");
        authors.push((id.clone(), Gender::Undetected));
        let source = field_rng.random_range(0..sim.sources.len());
        sim.add_publication(
            format!("P{coverage_start}_F{f:06}"),
            coverage_start,
            source,
            vec![f as u32],
        );
    }

    // Cohort members with per-author random substreams.
    let mut cohort_members: Vec<Vec<usize>> = Vec::with_capacity(n_cohorts);
    let mut members: Vec<Member> = Vec::new();
    for k in 0..n_cohorts {
        let size = (params.first_cohort_size as f64
            * (1.0 + params.cohort_size_growth).powi(k as i32))
        .round()
        .max(1.0) as usize;
        let mut list = Vec::with_capacity(size);
        for i in 0..size {
            let author = authors.len() as u32;
            let stream = members.len() as u64 + 1;
            let mut rng = master_stream(params.seed, stream);
            let gender = {
                let u: f64 = rng.random();
                if u < params.female_share {
                    Gender::Female
                } else if u < params.female_share + params.undetected_share {
                    Gender::Undetected
                } else {
                    Gender::Male
                }
            };
            let activity = LogNormal::new(params.debut_activity_ln_mean, params.debut_activity_sigma)
                .map_err(|e| Error::InvalidInput(e.to_string()))?
                .sample(&mut rng);
            let id = format!("A{}_{i:06}", first_cohort + k as i32);
            authors.push((id, gender));
            list.push(members.len());
            members.push(Member {
                author,
                gender,
                rng,
                activity,
                active: true,
                cum_p: 0,
                cum_c: 0,
                pubs: Vec::new(),
            });
        }
        cohort_members.push(list);
    }

    for year in first_cohort..=coverage_end {
        let mut year_seq = 0u32;
        // Citation demand for this year: cited local publication → count.
        let mut demands: BTreeMap<u32, u32> = BTreeMap::new();

        #[allow(clippy::needless_range_loop)]
        for k in 0..n_cohorts {
            let cohort_year = first_cohort + k as i32;
            let t = year - cohort_year + 1;
            if !(1..=params.horizon.min(CAREER_SPAN) as i32).contains(&t) {
                continue;
            }
            let fraction = if n_cohorts > 1 {
                k as f64 / (n_cohorts - 1) as f64
            } else {
                0.0
            };
            let beta_p = params.beta_prod.at(fraction);
            let beta_c = params.beta_impact.at(fraction);
            let mean_team =
                (params.team_size_base + params.team_size_drift * (year - first_cohort) as f64)
                    .max(1.0);

            // Publication counts from the start-of-age state.
            let mut paper_counts: Vec<(usize, u64)> = Vec::new();
            for &m in &cohort_members[k] {
                let member = &mut members[m];
                let count = if t == 1 {
                    1 + poisson_count(&mut member.rng, member.activity, params.expected_ceiling)?
                } else {
                    let hazard = match member.gender {
                        Gender::Male => params.dropout_hazard_male,
                        Gender::Female => params.dropout_hazard_female,
                        Gender::Undetected => params.dropout_hazard_undetected,
                    } * params.dropout_hazard_decay.powi(t - 2);
                    if member.active && member.rng.random::<f64>() < hazard {
                        member.active = false;
                    }
                    if !member.active {
                        0
                    } else {
                        let state = (member.cum_p as f64).max(params.cutoff_true);
                        let mean = params.base_rate_prod * state.powf(beta_p);
                        poisson_count(&mut member.rng, mean, params.expected_ceiling)?
                    }
                };
                paper_counts.push((m, count));
            }

            // Co-author pool: members of this cohort still in the field.
            let actives: Vec<(usize, u32)> = cohort_members[k]
                .iter()
                .copied()
                .filter(|&m| members[m].active)
                .map(|m| (m, members[m].author))
                .collect();

            for &(m, count) in &paper_counts {
                for _ in 0..count {
                    let member = &mut members[m];
                    let extra = if mean_team > 1.0 {
                        poisson_count(&mut member.rng, mean_team - 1.0, 1e6)? as usize
                    } else {
                        0
                    };
                    let mut team = vec![member.author];
                    if extra > 0 && actives.len() > 1 {
                        let want = extra.min(actives.len() - 1);
                        let picks = sample_indices(
                            &mut member.rng,
                            actives.len(),
                            (want + 1).min(actives.len()),
                        );
                        for pick in picks {
                            let (co_member, co_author) = actives[pick];
                            if co_member != m && team.len() <= want {
                                team.push(co_author);
                            }
                        }
                    }
                    let source = member.rng.random_range(0..sim.sources.len());
                    let pub_idx = sim.add_publication(
                        format!("P{year}_{year_seq:07}"),
                        year,
                        source,
                        team.clone(),
                    );
                    year_seq += 1;
                    for author in team {
                        // Member author indices follow the field pool.
                        if author as usize >= params.field_authors {
                            let owner = author as usize - params.field_authors;
                            members[owner].pubs.push(pub_idx);
                            members[owner].cum_p += 1;
                        }
                    }
                }
            }

            // Citation demand from the start-of-age impact state; every
            // existing publication carries the same per-publication rate,
            // so the author total scales with the publication stock.
            for &m in &cohort_members[k] {
                let member = &mut members[m];
                if member.pubs.is_empty() {
                    continue;
                }
                let mean = if t == 1 {
                    params.debut_impact_scale * member.activity
                } else {
                    let state = (member.cum_c as f64).max(params.cutoff_true);
                    params.base_rate_impact * member.pubs.len() as f64 * state.powf(beta_c)
                };
                let citations = poisson_count(&mut member.rng, mean, params.expected_ceiling)?;
                for _ in 0..citations {
                    let target = member.pubs[member.rng.random_range(0..member.pubs.len())];
                    *demands.entry(target).or_default() += 1;
                }
                member.cum_c += citations;
            }
        }

        if !demands.is_empty() {
            wire_citing_papers(params, &mut sim, year, &demands)?;
        }
        if sim.publications.len() > MAX_PUBLICATIONS {
            return Err(Error::SimulationGuard(format!(
                "{} publications generated; the parameters outgrow memory",
                sim.publications.len()
            )));
        }
    }

    // Hand everything to the corpus, then remap the edge endpoints from
    // local order to the corpus's canonical publication order.
    let local_ids: Vec<String> = sim.publications.iter().map(|p| p.pub_id.clone()).collect();
    let mut corpus = Corpus::assemble(
        sim.publications,
        authors,
        Some((coverage_start, coverage_end)),
    )?;
    let edges = sim
        .edges
        .iter()
        .map(|&(citing, cited)| crate::corpus::CitationEdge {
            citing: corpus.pub_index(&local_ids[citing as usize]).expect("own id"),
            cited: corpus.pub_index(&local_ids[cited as usize]).expect("own id"),
        })
        .collect();
    corpus.set_citations(edges);
    Ok(corpus)
}

/// Citing papers for one calendar year: a pool of field-author papers,
/// each citation of a cited publication landing on a distinct pool paper.
fn wire_citing_papers(
    params: &SynthParams,
    sim: &mut Sim,
    year: i32,
    demands: &BTreeMap<u32, u32>,
) -> Result<()> {
    let total: u64 = demands.values().map(|&k| u64::from(k)).sum();
    let max_k = demands.values().copied().max().unwrap_or(0) as usize;
    let pool_size = max_k.max((total as usize).div_ceil(25)).max(1);

    let mut rng = master_stream(params.seed, (1 << 62) + year as u64);
    let mean_team =
        (params.team_size_base + params.team_size_drift * (year - params.cohort_years.0) as f64)
            .max(1.0);
    let mut pool = Vec::with_capacity(pool_size);
    for j in 0..pool_size {
        let extra = if mean_team > 1.0 {
            poisson_count(&mut rng, mean_team - 1.0, 1e6)? as usize
        } else {
            0
        };
        let size = (1 + extra).min(params.field_authors);
        let team: Vec<u32> = sample_indices(&mut rng, params.field_authors, size)
            .into_iter()
            .map(|f| f as u32)
            .collect();
        let source = rng.random_range(0..sim.sources.len());
        let idx = sim.add_publication(format!("Q{year}_{j:06}"), year, source, team);
        pool.push(idx);
    }

    let mut cursor = 0usize;
    for (&cited, &count) in demands {
        for j in 0..count as usize {
            let citing = pool[(cursor + j) % pool_size];
            sim.edges.push((citing, cited));
        }
        cursor = (cursor + count as usize) % pool_size;
    }
    Ok(())
}

fn master_stream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Scenario with the shapes the measurement pipeline expects from a
/// growing, team-based field: exponentially growing cohorts, rising team
/// sizes, broad count distributions, impact feedback stronger than
/// productivity feedback, and a doubled female dropout hazard.
pub fn paper_shaped_scenario() -> SynthParams {
    SynthParams {
        seed: 917,
        cohort_years: (1970, 1975),
        first_cohort_size: 550,
        cohort_size_growth: 0.22,
        beta_prod: Ramp::constant(0.55),
        beta_impact: Ramp::constant(0.7),
        base_rate_prod: 0.8,
        base_rate_impact: 0.015,
        debut_activity_ln_mean: 0.3,
        debut_activity_sigma: 1.0,
        debut_impact_scale: 0.05,
        cutoff_true: 1.0,
        dropout_hazard_male: 0.16,
        dropout_hazard_female: 0.32,
        dropout_hazard_undetected: 0.16,
        dropout_hazard_decay: 0.7,
        female_share: 0.25,
        undetected_share: 0.15,
        team_size_base: 1.4,
        team_size_drift: 0.05,
        field_authors: 400,
        sources: 40,
        expected_ceiling: 1e6,
        horizon: CAREER_SPAN,
    }
}

/// Single solo-author cohort sized to yield at least `pairs` feedback
/// pairs at career age 2, with planted exponents. The exact-inverse
/// setting for recovery tests.
pub fn recovery_scenario(beta_prod: f64, beta_impact: f64, pairs: usize, seed: u64) -> SynthParams {
    SynthParams {
        seed,
        cohort_years: (1970, 1970),
        first_cohort_size: (pairs as f64 * 1.05) as usize,
        cohort_size_growth: 0.0,
        beta_prod: Ramp::constant(beta_prod),
        beta_impact: Ramp::constant(beta_impact),
        base_rate_prod: 5.0,
        base_rate_impact: 0.5,
        debut_activity_ln_mean: 1.1,
        debut_activity_sigma: 1.6,
        debut_impact_scale: 1.0,
        cutoff_true: 1.0,
        dropout_hazard_male: 0.0,
        dropout_hazard_female: 0.0,
        dropout_hazard_undetected: 0.0,
        dropout_hazard_decay: 1.0,
        female_share: 0.3,
        undetected_share: 0.1,
        team_size_base: 1.0,
        team_size_drift: 0.0,
        field_authors: 300,
        sources: 20,
        expected_ceiling: 1e7,
        horizon: 2,
    }
}

/// Cohorts whose productivity exponent rises linearly from `from` to
/// `to`; solo teams, no dropout, the same crisp short-horizon setting as
/// [`recovery_scenario`] so per-cohort fits separate cleanly.
pub fn ramp_scenario(from: f64, to: f64, cohorts: usize, cohort_size: usize, seed: u64) -> SynthParams {
    SynthParams {
        seed,
        cohort_years: (1970, 1970 + cohorts as i32 - 1),
        first_cohort_size: cohort_size,
        cohort_size_growth: 0.0,
        beta_prod: Ramp { start: from, end: to },
        beta_impact: Ramp::constant(0.3),
        base_rate_prod: 5.0,
        base_rate_impact: 0.05,
        debut_activity_ln_mean: 1.1,
        debut_activity_sigma: 1.6,
        debut_impact_scale: 0.2,
        cutoff_true: 1.0,
        dropout_hazard_male: 0.0,
        dropout_hazard_female: 0.0,
        dropout_hazard_undetected: 0.0,
        dropout_hazard_decay: 1.0,
        female_share: 0.3,
        undetected_share: 0.1,
        team_size_base: 1.0,
        team_size_drift: 0.0,
        field_authors: 300,
        sources: 20,
        expected_ceiling: 1e7,
        horizon: 2,
    }
}

/// Gender-symmetric generation: identical hazards and rates for every
/// gender, for null calibration of the gender grids.
pub fn null_scenario(seed: u64) -> SynthParams {
    SynthParams {
        seed,
        cohort_years: (1970, 1975),
        first_cohort_size: 400,
        cohort_size_growth: 0.1,
        beta_prod: Ramp::constant(0.5),
        beta_impact: Ramp::constant(0.5),
        base_rate_prod: 0.8,
        base_rate_impact: 0.05,
        debut_activity_ln_mean: 0.3,
        debut_activity_sigma: 1.0,
        debut_impact_scale: 0.8,
        cutoff_true: 1.0,
        dropout_hazard_male: 0.09,
        dropout_hazard_female: 0.09,
        dropout_hazard_undetected: 0.09,
        dropout_hazard_decay: 1.0,
        female_share: 0.4,
        undetected_share: 0.1,
        team_size_base: 1.3,
        team_size_drift: 0.03,
        field_authors: 300,
        sources: 30,
        expected_ceiling: 1e6,
        horizon: CAREER_SPAN,
    }
}
