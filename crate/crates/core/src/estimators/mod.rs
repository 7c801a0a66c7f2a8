//! Eight regression estimators behind one fit/predict contract.
//!
//! All estimators map six reflectance bands to chlorophyll-a. A fit is fully
//! described by an [`EstimatorSpec`] (kind, hyperparameters, seed, target
//! scale); fitting is deterministic given the spec and the training table,
//! and fitted models are immutable, pure prediction functions.
//!
//! Feature handling: linear and tree-family models consume raw reflectances;
//! SVR and k-NN standardize features with training statistics, which the
//! fitted model retains and re-applies at prediction time.

pub mod ensemble;
pub mod knn;
pub mod linear;
pub mod svr;
pub mod tree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GeoGrid, GridStack};
use crate::sample::{table_stats, SampleTable, Standardization, BAND_NAMES, N_BANDS};

use ensemble::{fit_ensemble, oob_error, EnsembleKind, EnsembleParams, EnsemblePayload, OobReport};
use knn::{fit_knn, KnnParams, KnnPayload};
use linear::{fit_linear, fit_ridge, LinearPayload};
use svr::{fit_svr, SvrParams, SvrPayload};
use tree::{fit_cart, TreeNode, TreeParams};

/// Seed used when none is given anywhere (never time-derived).
pub const DEFAULT_SEED: u64 = 42;

/// Ridge penalty used by the default spec set.
pub const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;

/// Estimator kind plus its hyperparameters.
///
/// The serde form is a JSON object tagged by `"model"`, e.g.
/// `{"model": "ridge", "lambda": 1.0}` or
/// `{"model": "forest", "n_estimators": 100, "max_features": 2,
///   "bootstrap": true, "max_depth": null, "min_samples_split": 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Linear,
    Ridge { lambda: f64 },
    Tree(TreeParams),
    Bagging(EnsembleParams),
    Forest(EnsembleParams),
    ExtraTrees(EnsembleParams),
    Svr(SvrParams),
    Knn(KnnParams),
}

/// The eight kind names, in canonical report order.
pub const MODEL_KINDS: [&str; 8] = [
    "linear",
    "ridge",
    "tree",
    "bagging",
    "forest",
    "extra_trees",
    "svr",
    "knn",
];

fn default_bagging_params() -> EnsembleParams {
    EnsembleParams {
        n_estimators: 100,
        max_features: N_BANDS,
        bootstrap: true,
        tree: TreeParams::default(),
    }
}

fn default_forest_params() -> EnsembleParams {
    EnsembleParams {
        n_estimators: 100,
        max_features: 2,
        bootstrap: true,
        tree: TreeParams::default(),
    }
}

fn default_extra_trees_params() -> EnsembleParams {
    EnsembleParams {
        n_estimators: 100,
        max_features: 2,
        bootstrap: false,
        tree: TreeParams::default(),
    }
}

impl ModelSpec {
    /// Kind name used in reports, model files, and the CLI.
    pub fn model_type(&self) -> &'static str {
        match self {
            ModelSpec::Linear => "linear",
            ModelSpec::Ridge { .. } => "ridge",
            ModelSpec::Tree(_) => "tree",
            ModelSpec::Bagging(_) => "bagging",
            ModelSpec::Forest(_) => "forest",
            ModelSpec::ExtraTrees(_) => "extra_trees",
            ModelSpec::Svr(_) => "svr",
            ModelSpec::Knn(_) => "knn",
        }
    }

    /// The default hyperparameters for a kind name.
    pub fn default_for(kind: &str) -> Result<ModelSpec> {
        Ok(match kind {
            "linear" => ModelSpec::Linear,
            "ridge" => ModelSpec::Ridge {
                lambda: DEFAULT_RIDGE_LAMBDA,
            },
            "tree" => ModelSpec::Tree(TreeParams::default()),
            "bagging" => ModelSpec::Bagging(default_bagging_params()),
            "forest" => ModelSpec::Forest(default_forest_params()),
            "extra_trees" => ModelSpec::ExtraTrees(default_extra_trees_params()),
            "svr" => ModelSpec::Svr(SvrParams::default()),
            "knn" => ModelSpec::Knn(KnnParams::default()),
            other => {
                return Err(Error::Argument(format!(
                    "unknown model kind {other:?}; expected one of {}",
                    MODEL_KINDS.join(", ")
                )))
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Linear => Ok(()),
            ModelSpec::Ridge { lambda } => {
                if *lambda < 0.0 || !lambda.is_finite() {
                    Err(Error::Argument(format!(
                        "ridge lambda must be non-negative and finite, got {lambda}"
                    )))
                } else {
                    Ok(())
                }
            }
            ModelSpec::Tree(p) => p.validate(),
            ModelSpec::Bagging(p) | ModelSpec::Forest(p) | ModelSpec::ExtraTrees(p) => p.validate(),
            ModelSpec::Svr(p) => p.validate(),
            ModelSpec::Knn(p) => p.validate(),
        }
    }
}

/// A complete, reproducible fitting recipe.
///
/// Serialized flat: `{"model": "knn", "k": 5, "aggregation": "mean",
/// "seed": 42, "log_chl": false}`. `seed` and `log_chl` may be omitted and
/// default to [`DEFAULT_SEED`] and `false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    #[serde(flatten)]
    pub model: ModelSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Fit on `log10(chl)` and exponentiate predictions. Off by default:
    /// reported errors are in mg/m³ either way, but the fit criterion
    /// changes.
    #[serde(default)]
    pub log_chl: bool,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl EstimatorSpec {
    /// Wrap a model spec with default seed and linear-space target.
    pub fn new(model: ModelSpec) -> Self {
        EstimatorSpec {
            model,
            seed: DEFAULT_SEED,
            log_chl: false,
        }
    }

    pub fn model_type(&self) -> &'static str {
        self.model.model_type()
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()
    }

    /// The eight default specs in canonical report order.
    pub fn all_defaults() -> Vec<EstimatorSpec> {
        MODEL_KINDS
            .iter()
            .map(|k| EstimatorSpec::new(ModelSpec::default_for(k).expect("known kind")))
            .collect()
    }
}

/// Kind-specific fitted state.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Linear(LinearPayload),
    Tree(TreeNode),
    Ensemble(EnsemblePayload),
    Svr(SvrPayload),
    Knn(KnnPayload),
}

/// A fitted estimator: the spec that produced it, optional feature
/// standardization, and the kind-specific payload.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub spec: EstimatorSpec,
    pub preprocessing: Option<Standardization>,
    pub payload: Payload,
}

fn needs_standardization(model: &ModelSpec) -> bool {
    matches!(model, ModelSpec::Svr(_) | ModelSpec::Knn(_))
}

/// Fit an estimator on a fully labelled table of valid samples.
pub fn fit(table: &SampleTable, spec: &EstimatorSpec) -> Result<FittedModel> {
    spec.validate()?;
    table.check_valid()?;
    let y_raw = table.targets()?;
    let y: Vec<f64> = if spec.log_chl {
        y_raw.iter().map(|v| v.log10()).collect()
    } else {
        y_raw
    };
    let raw_x: Vec<[f64; N_BANDS]> = table.rows.iter().map(|s| s.rrs).collect();
    let (x, preprocessing) = if needs_standardization(&spec.model) {
        let stats = table_stats(table)?;
        let std = Standardization::from_stats(&stats);
        let x = raw_x.iter().map(|r| std.apply(r)).collect();
        (x, Some(std))
    } else {
        (raw_x, None)
    };
    let payload = match &spec.model {
        ModelSpec::Linear => Payload::Linear(fit_linear(&x, &y)?),
        ModelSpec::Ridge { lambda } => Payload::Linear(fit_ridge(&x, &y, *lambda)?),
        ModelSpec::Tree(p) => Payload::Tree(fit_cart(&x, &y, p)?),
        ModelSpec::Bagging(p) => {
            Payload::Ensemble(fit_ensemble(&x, &y, EnsembleKind::Bagging, p, spec.seed)?)
        }
        ModelSpec::Forest(p) => {
            Payload::Ensemble(fit_ensemble(&x, &y, EnsembleKind::Forest, p, spec.seed)?)
        }
        ModelSpec::ExtraTrees(p) => Payload::Ensemble(fit_ensemble(
            &x,
            &y,
            EnsembleKind::ExtraTrees,
            p,
            spec.seed,
        )?),
        ModelSpec::Svr(p) => Payload::Svr(fit_svr(&x, &y, p)?),
        ModelSpec::Knn(p) => Payload::Knn(fit_knn(&x, &y, p)?),
    };
    Ok(FittedModel {
        spec: spec.clone(),
        preprocessing,
        payload,
    })
}

impl FittedModel {
    /// Raw model output for already-preprocessed features, before any
    /// target-scale correction.
    fn evaluate(&self, x: &[f64; N_BANDS]) -> Result<f64> {
        Ok(match &self.payload {
            Payload::Linear(p) => p.predict(x),
            Payload::Tree(t) => t.predict(x),
            Payload::Ensemble(p) => p.predict(x),
            Payload::Svr(p) => p.predict(x),
            Payload::Knn(p) => p.predict(x)?,
        })
    }

    /// Predict chlorophyll-a (mg/m³) for one six-band sample.
    ///
    /// Bands must satisfy the sample validity rule (finite, strictly
    /// positive); an invalid band is a domain error naming the band.
    pub fn predict_one(&self, rrs: &[f64; N_BANDS]) -> Result<f64> {
        for (j, v) in rrs.iter().enumerate() {
            if !v.is_finite() || *v <= 0.0 {
                return Err(Error::Domain(format!(
                    "band {} is {v}, not finite and positive",
                    BAND_NAMES[j]
                )));
            }
        }
        let x = match &self.preprocessing {
            Some(p) => p.apply(rrs),
            None => *rrs,
        };
        let raw = self.evaluate(&x)?;
        Ok(if self.spec.log_chl {
            10f64.powf(raw)
        } else {
            raw
        })
    }

    /// Predict over every pixel of a six-band stack.
    ///
    /// Pixels where any band is missing, non-finite, or non-positive come
    /// out as fill. Output georeferencing and fill value are copied from the
    /// stack.
    pub fn predict_grid(&self, stack: &GridStack) -> Result<GeoGrid> {
        let bands = stack.canonical_bands()?;
        let geometry = stack.geometry();
        let n = geometry.len();
        let values: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|idx| -> Result<f64> {
                let mut rrs = [0.0; N_BANDS];
                for (j, plane) in bands.iter().enumerate() {
                    let v = plane.values[idx];
                    if !plane.is_present(idx) || v <= 0.0 {
                        return Ok(geometry.fill_value);
                    }
                    rrs[j] = v;
                }
                self.predict_one(&rrs)
            })
            .collect::<Result<_>>()?;
        let mut out = geometry.filled_like();
        out.values = values;
        Ok(out)
    }
}

/// Out-of-bag mean absolute error of a bootstrap ensemble against the table
/// it was fitted on. Errors are in mg/m³ regardless of the fit's target
/// scale.
pub fn compute_oob_mae(model: &FittedModel, train: &SampleTable) -> Result<OobReport> {
    let payload = match &model.payload {
        Payload::Ensemble(p) => p,
        _ => {
            return Err(Error::State(format!(
                "out-of-bag error is defined for ensemble models, not {}",
                model.spec.model_type()
            )))
        }
    };
    train.check_valid()?;
    let targets = train.targets()?;
    let x: Vec<[f64; N_BANDS]> = match &model.preprocessing {
        Some(p) => train.rows.iter().map(|s| p.apply(&s.rrs)).collect(),
        None => train.rows.iter().map(|s| s.rrs).collect(),
    };
    let log_chl = model.spec.log_chl;
    oob_error(payload, &x, &targets, move |raw| {
        if log_chl {
            10f64.powf(raw)
        } else {
            raw
        }
    })
}
