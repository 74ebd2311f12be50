//! Dropout and success prediction: elastic-net logistic and linear
//! models under 10-fold cross-validation, with per-fold robust
//! standardization and an alpha grid learned on the training rows.

mod elastic_net;
mod metrics;

pub use elastic_net::{fit, sigmoid, FitControl, FittedModel, ModelKind};
pub use metrics::{evaluate_classification, evaluate_regression};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{standardize, ColumnSpec, FeatureTable};

/// Nested feature sets mirroring the model columns of the reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTier {
    Baseline,
    Gender,
    EarlyAchievement,
    SocialSupport,
}

impl ModelTier {
    pub const ALL: [ModelTier; 4] = [
        ModelTier::Baseline,
        ModelTier::Gender,
        ModelTier::EarlyAchievement,
        ModelTier::SocialSupport,
    ];

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            ModelTier::Baseline => &["cohort"],
            ModelTier::Gender => &["cohort", "female", "male", "undetected"],
            ModelTier::EarlyAchievement => &[
                "cohort",
                "female",
                "male",
                "undetected",
                "productivity",
                "productivity_first",
                "impact",
                "top_source",
            ],
            ModelTier::SocialSupport => &[
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
            ],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelTier::Baseline => "baseline",
            ModelTier::Gender => "gender",
            ModelTier::EarlyAchievement => "early_achievement",
            ModelTier::SocialSupport => "social_support",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElasticNetConfig {
    pub model_kind: ModelKind,
    pub feature_subset: ModelTier,
    /// L1/L2 mixing parameter in [0, 1].
    pub lambda_mix: f64,
    /// Fixed penalty scale; `None` learns it from the training rows.
    pub alpha: Option<f64>,
    pub folds: usize,
    /// Points on the logarithmic alpha grid.
    pub alpha_grid: usize,
    /// Folds of the internal grid search.
    pub inner_folds: usize,
    /// Robust-standardize features (and the label of linear models) per
    /// training fold. Off only for raw-scale diagnostics.
    pub standardize: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl ElasticNetConfig {
    pub fn new(model_kind: ModelKind, feature_subset: ModelTier) -> ElasticNetConfig {
        ElasticNetConfig {
            model_kind,
            feature_subset,
            lambda_mix: 0.5,
            alpha: None,
            folds: 10,
            alpha_grid: 8,
            inner_folds: 5,
            standardize: true,
            tol: 1e-7,
            max_iter: 10_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda_mix) {
            return Err(Error::InvalidInput("lambda_mix must lie in [0, 1]".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidInput("need at least two folds".into()));
        }
        if let Some(alpha) = self.alpha {
            if alpha < 0.0 {
                return Err(Error::InvalidInput("alpha must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub f1: Option<f64>,
    pub average_precision: Option<f64>,
    pub mse: Option<f64>,
    pub adjusted_r2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionReport {
    pub model_kind: ModelKind,
    pub tier: ModelTier,
    pub n_obs: usize,
    pub feature_names: Vec<String>,
    /// One coefficient vector per evaluated fold.
    pub fold_coefficients: Vec<Vec<f64>>,
    pub coefficient_mean: Vec<f64>,
    pub coefficient_sd: Vec<f64>,
    pub intercept_mean: f64,
    /// Alpha chosen per evaluated fold.
    pub alphas: Vec<f64>,
    pub folds_evaluated: usize,
    pub folds_skipped: usize,
    pub metrics: Metrics,
}

/// Deterministic fold assignment: rows shuffled by the seed, then dealt
/// round-robin.
fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignment = vec![0usize; n];
    for (position, &row) in order.iter().enumerate() {
        assignment[row] = position % folds;
    }
    assignment
}

/// Upper bound for the alpha grid: the largest penalty at which any
/// coefficient can move away from zero, from the gradient at w = 0.
fn alpha_max(columns: &[Vec<f64>], y: &[f64], rows: &[usize], lambda_mix: f64) -> f64 {
    let nf = rows.len() as f64;
    let y_mean = rows.iter().map(|&i| y[i]).sum::<f64>() / nf;
    let mut largest: f64 = 0.0;
    for col in columns {
        let g: f64 = rows.iter().map(|&i| col[i] * (y[i] - y_mean)).sum::<f64>() / nf;
        largest = largest.max(g.abs());
    }
    largest / lambda_mix.max(1e-3)
}

fn alpha_grid(columns: &[Vec<f64>], y: &[f64], rows: &[usize], config: &ElasticNetConfig) -> Vec<f64> {
    let top = alpha_max(columns, y, rows, config.lambda_mix).max(1e-12);
    let points = config.alpha_grid.max(2);
    // Descending from alpha_max to alpha_max/1000, matching warm starts.
    (0..points)
        .map(|i| top * 10f64.powf(-3.0 * i as f64 / (points - 1) as f64))
        .collect()
}

/// Mean validation loss: squared error for linear models, log-loss for
/// logistic ones.
fn validation_loss(
    kind: ModelKind,
    model: &FittedModel,
    columns: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
) -> f64 {
    let mut loss = 0.0;
    for &i in rows {
        let prediction = model.predict(kind, columns, i);
        match kind {
            ModelKind::Linear => loss += (y[i] - prediction) * (y[i] - prediction),
            ModelKind::Logistic => {
                let p = prediction.clamp(1e-12, 1.0 - 1e-12);
                loss -= y[i] * p.ln() + (1.0 - y[i]) * (1.0 - p).ln();
            }
        }
    }
    loss / rows.len() as f64
}

/// Grid-search alpha on the training rows with internal cross-validation;
/// ties keep the larger (more regularized) alpha.
fn select_alpha(
    columns: &[Vec<f64>],
    y: &[f64],
    train: &[usize],
    config: &ElasticNetConfig,
    seed: u64,
) -> f64 {
    let grid = alpha_grid(columns, y, train, config);
    let inner = fold_assignment(train.len(), config.inner_folds.max(2), seed);
    let mut losses = vec![0.0; grid.len()];
    let explore = FitControl {
        kind: config.model_kind,
        alpha: 0.0,
        lambda_mix: config.lambda_mix,
        tol: config.tol.max(1e-5),
        max_iter: config.max_iter.min(2_000),
    };
    for fold in 0..config.inner_folds.max(2) {
        let fit_rows: Vec<usize> = train
            .iter()
            .enumerate()
            .filter(|(k, _)| inner[*k] != fold)
            .map(|(_, &row)| row)
            .collect();
        let val_rows: Vec<usize> = train
            .iter()
            .enumerate()
            .filter(|(k, _)| inner[*k] == fold)
            .map(|(_, &row)| row)
            .collect();
        if fit_rows.is_empty() || val_rows.is_empty() {
            continue;
        }
        let mut warm: Option<FittedModel> = None;
        for (g, &alpha) in grid.iter().enumerate() {
            let control = FitControl { alpha, ..explore };
            let model = fit(columns, y, &fit_rows, &control, warm.as_ref());
            losses[g] += validation_loss(config.model_kind, &model, columns, y, &val_rows);
            warm = Some(model);
        }
    }
    let mut best = 0usize;
    for g in 1..grid.len() {
        if losses[g] < losses[best] {
            best = g;
        }
    }
    grid[best]
}

/// Cross-validated elastic net over the tier's columns against the given
/// labels. Standardization statistics come from each training fold alone;
/// linear-model labels are standardized the same way. Logistic folds
/// whose training rows hold a single class are skipped and counted.
pub fn cross_validate_labels(
    table: &FeatureTable,
    labels: &[f64],
    config: &ElasticNetConfig,
    seed: u64,
) -> Result<RegressionReport> {
    config.validate()?;
    let n = table.rows.len();
    if n != labels.len() {
        return Err(Error::InvalidInput("label length mismatch".into()));
    }
    if n < config.folds {
        return Err(Error::InvalidInput(format!(
            "{n} rows cannot fill {} folds",
            config.folds
        )));
    }
    let names: Vec<&str> = config.feature_subset.columns().to_vec();
    let raw_columns: Vec<Vec<f64>> = names.iter().map(|name| table.column(name)).collect();
    let assignment = fold_assignment(n, config.folds, seed);

    let mut fold_coefficients: Vec<Vec<f64>> = Vec::new();
    let mut intercepts: Vec<f64> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut folds_skipped = 0usize;
    let mut f1s: Vec<f64> = Vec::new();
    let mut aps: Vec<f64> = Vec::new();
    let mut mses: Vec<f64> = Vec::new();
    let mut adj_r2s: Vec<f64> = Vec::new();

    for fold in 0..config.folds {
        let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| assignment[i] == fold).collect();
        if train.is_empty() || test.is_empty() {
            folds_skipped += 1;
            continue;
        }
        if config.model_kind == ModelKind::Logistic {
            let positives = train.iter().filter(|&&i| labels[i] > 0.5).count();
            if positives == 0 || positives == train.len() {
                folds_skipped += 1;
                continue;
            }
        }

        let (columns, y) = if config.standardize {
            let (columns, _) = standardize(&names, &raw_columns, &train)?;
            let y = match config.model_kind {
                ModelKind::Logistic => labels.to_vec(),
                ModelKind::Linear => {
                    let spec = ColumnSpec::fit(labels, &train, false);
                    labels.iter().map(|&v| spec.apply(v)).collect()
                }
            };
            (columns, y)
        } else {
            (raw_columns.clone(), labels.to_vec())
        };

        let alpha = match config.alpha {
            Some(alpha) => alpha,
            None => select_alpha(&columns, &y, &train, config, seed ^ (fold as u64 + 1)),
        };
        let control = FitControl {
            kind: config.model_kind,
            alpha,
            lambda_mix: config.lambda_mix,
            tol: config.tol,
            max_iter: config.max_iter,
        };
        let model = fit(&columns, &y, &train, &control, None);

        let predictions: Vec<f64> = test
            .iter()
            .map(|&i| model.predict(config.model_kind, &columns, i))
            .collect();
        match config.model_kind {
            ModelKind::Logistic => {
                let truth: Vec<bool> = test.iter().map(|&i| y[i] > 0.5).collect();
                if let Ok((f1, ap)) = evaluate_classification(&predictions, &truth) {
                    f1s.push(f1);
                    aps.push(ap);
                }
            }
            ModelKind::Linear => {
                let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
                if let Ok((mse, adj)) = evaluate_regression(&predictions, &truth, names.len()) {
                    mses.push(mse);
                    adj_r2s.push(adj);
                }
            }
        }

        fold_coefficients.push(model.weights.clone());
        intercepts.push(model.intercept);
        alphas.push(alpha);
    }

    if fold_coefficients.is_empty() {
        return Err(Error::NotComputable("every fold was skipped".into()));
    }

    let p = names.len();
    let folds_evaluated = fold_coefficients.len();
    let mut coefficient_mean = vec![0.0; p];
    for coefficients in &fold_coefficients {
        for (m, &w) in coefficient_mean.iter_mut().zip(coefficients) {
            *m += w;
        }
    }
    for m in &mut coefficient_mean {
        *m /= folds_evaluated as f64;
    }
    let coefficient_sd: Vec<f64> = (0..p)
        .map(|j| {
            if folds_evaluated < 2 {
                return 0.0;
            }
            let var = fold_coefficients
                .iter()
                .map(|c| (c[j] - coefficient_mean[j]).powi(2))
                .sum::<f64>()
                / (folds_evaluated - 1) as f64;
            var.sqrt()
        })
        .collect();

    Ok(RegressionReport {
        model_kind: config.model_kind,
        tier: config.feature_subset,
        n_obs: n,
        feature_names: names.into_iter().map(str::to_string).collect(),
        coefficient_mean,
        coefficient_sd,
        intercept_mean: intercepts.iter().sum::<f64>() / folds_evaluated as f64,
        fold_coefficients,
        alphas,
        folds_evaluated,
        folds_skipped,
        metrics: Metrics {
            f1: mean_of(&f1s),
            average_precision: mean_of(&aps),
            mse: mean_of(&mses),
            adjusted_r2: mean_of(&adj_r2s),
        },
    })
}

fn mean_of(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Cross-validate against the table's own labels: dropout for logistic
/// configs, success for linear ones.
pub fn cross_validate(
    table: &FeatureTable,
    config: &ElasticNetConfig,
    seed: u64,
) -> Result<RegressionReport> {
    let labels: Vec<f64> = match config.model_kind {
        ModelKind::Logistic => table.rows.iter().map(|r| f64::from(u8::from(r.dropout))).collect(),
        ModelKind::Linear => table.rows.iter().map(|r| r.success).collect(),
    };
    cross_validate_labels(table, &labels, config, seed)
}

/// Logistic elastic net predicting the dropout label.
pub fn dropout_model(table: &FeatureTable, tier: ModelTier, seed: u64) -> Result<RegressionReport> {
    let config = ElasticNetConfig::new(ModelKind::Logistic, tier);
    cross_validate(table, &config, seed)
}

/// Linear elastic net predicting the success label; optionally drops the
/// dropout rows first.
pub fn success_model(
    table: &FeatureTable,
    tier: ModelTier,
    dropouts_removed: bool,
    seed: u64,
) -> Result<RegressionReport> {
    let config = ElasticNetConfig::new(ModelKind::Linear, tier);
    if !dropouts_removed {
        return cross_validate(table, &config, seed);
    }
    let filtered = FeatureTable {
        t_e: table.t_e,
        dropout_gap: table.dropout_gap,
        rows: table.rows.iter().filter(|r| !r.dropout).cloned().collect(),
        excluded_without_window: table.excluded_without_window,
    };
    cross_validate(&filtered, &config, seed)
}
