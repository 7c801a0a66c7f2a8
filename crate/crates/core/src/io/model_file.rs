//! Fitted-model serialization: one pretty-printed JSON document.
//!
//! Document shape (field order fixed, object keys sorted):
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "model_type": "ridge",
//!   "hyperparams": { "lambda": 1.0, "log_chl": false, "seed": 42 },
//!   "preprocessing": { "mean": [...], "sd": [...] } | null,
//!   "payload": { ... }
//! }
//! ```
//!
//! `hyperparams` carries the full estimator spec minus the kind tag, which
//! lives in `model_type`. Payload schemas per kind: linear/ridge
//! `{intercept, weights}`; tree: nested `{feature, threshold, left, right}` /
//! `{leaf_value}` nodes; ensembles `{trees, in_bag}`; svr
//! `{support_vectors, coefficients, bias, gamma, converged}`; knn
//! `{features, targets}`.
//!
//! Numbers are written in shortest-round-trip decimal, so a load of a save
//! reproduces every coefficient bit-for-bit and predictions are identical.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, FittedModel, ModelSpec, Payload};
use crate::sample::Standardization;

/// The only model file version this build reads or writes.
pub const MODEL_FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format_version: u64,
    model_type: String,
    hyperparams: Value,
    preprocessing: Option<Standardization>,
    payload: Value,
}

fn parse_err(context: &str, err: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{context}: {err}"))
}

/// Serialize a fitted model to its JSON document.
pub fn encode_model(model: &FittedModel) -> Result<String> {
    let spec_value =
        serde_json::to_value(&model.spec).map_err(|e| parse_err("spec not serializable", e))?;
    let mut hyper = match spec_value {
        Value::Object(map) => map,
        other => {
            return Err(Error::Format(format!(
                "estimator spec serialized to {other:?}, not an object"
            )))
        }
    };
    hyper.remove("model");
    let payload = match &model.payload {
        Payload::Linear(p) => serde_json::to_value(p),
        Payload::Tree(t) => serde_json::to_value(t),
        Payload::Ensemble(e) => serde_json::to_value(e),
        Payload::Svr(s) => serde_json::to_value(s),
        Payload::Knn(k) => serde_json::to_value(k),
    }
    .map_err(|e| parse_err("payload not serializable", e))?;
    let doc = ModelDoc {
        format_version: MODEL_FORMAT_VERSION,
        model_type: model.spec.model_type().to_string(),
        hyperparams: Value::Object(hyper),
        preprocessing: model.preprocessing.clone(),
        payload,
    };
    let mut text =
        serde_json::to_string_pretty(&doc).map_err(|e| parse_err("document render", e))?;
    text.push('\n');
    Ok(text)
}

/// Parse a JSON document back into a fitted model.
pub fn decode_model(text: &str) -> Result<FittedModel> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| parse_err("model file is not JSON", e))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Parse("model file root is not a JSON object".into()))?;
    match obj.get("format_version").and_then(Value::as_u64) {
        Some(MODEL_FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::Version(format!(
                "model file format_version {v} is not supported (this build reads {MODEL_FORMAT_VERSION})"
            )))
        }
        None => {
            return Err(Error::Version(
                "model file lacks an integer format_version".into(),
            ))
        }
    }
    let model_type = obj
        .get("model_type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("model_type is missing or not a string".into()))?;
    if !crate::estimators::MODEL_KINDS.contains(&model_type) {
        return Err(Error::Format(format!("unknown model type {model_type:?}")));
    }
    let mut spec_obj = obj
        .get("hyperparams")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse("hyperparams is missing or not an object".into()))?
        .clone();
    spec_obj.insert("model".into(), Value::String(model_type.to_string()));
    let spec: EstimatorSpec = serde_json::from_value(Value::Object(spec_obj))
        .map_err(|e| parse_err(&format!("hyperparams for {model_type}"), e))?;
    spec.validate()?;
    let preprocessing: Option<Standardization> =
        serde_json::from_value(obj.get("preprocessing").cloned().unwrap_or(Value::Null))
            .map_err(|e| parse_err("preprocessing", e))?;
    let payload_value = obj
        .get("payload")
        .cloned()
        .ok_or_else(|| Error::Parse("payload is missing".into()))?;
    let ctx = |e: serde_json::Error| parse_err(&format!("payload for {model_type}"), e);
    let payload = match &spec.model {
        ModelSpec::Linear | ModelSpec::Ridge { .. } => {
            Payload::Linear(serde_json::from_value(payload_value).map_err(ctx)?)
        }
        ModelSpec::Tree(_) => Payload::Tree(serde_json::from_value(payload_value).map_err(ctx)?),
        ModelSpec::Bagging(_) | ModelSpec::Forest(_) | ModelSpec::ExtraTrees(_) => {
            Payload::Ensemble(serde_json::from_value(payload_value).map_err(ctx)?)
        }
        ModelSpec::Svr(_) => Payload::Svr(serde_json::from_value(payload_value).map_err(ctx)?),
        ModelSpec::Knn(params) => {
            let mut knn: crate::estimators::knn::KnnPayload =
                serde_json::from_value(payload_value).map_err(ctx)?;
            knn.params = *params;
            Payload::Knn(knn)
        }
    };
    Ok(FittedModel {
        spec,
        preprocessing,
        payload,
    })
}

/// Write a model document to a file.
pub fn write_model(path: &Path, model: &FittedModel) -> Result<()> {
    fs::write(path, encode_model(model)?)?;
    Ok(())
}

/// Read a model document from a file.
pub fn read_model(path: &Path) -> Result<FittedModel> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Parse(format!("model file is not UTF-8: {e}")))?;
    decode_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::knn::{Aggregation, KnnParams};
    use crate::estimators::{fit, EstimatorSpec, ModelSpec};
    use crate::sample::{Sample, SampleTable, N_BANDS};
    use rand::Rng;

    fn training_table(n: usize, seed: u64) -> SampleTable {
        let mut rng = crate::rng::shuffle_rng(seed);
        SampleTable::new(
            (0..n)
                .map(|_| {
                    let rrs: [f64; N_BANDS] = std::array::from_fn(|_| rng.gen_range(0.002..0.04));
                    Sample {
                        rrs,
                        chl: Some(0.5 + 60.0 * rrs[2] + 5.0 * rrs[5]),
                    }
                })
                .collect(),
        )
    }

    fn queries(n: usize, seed: u64) -> Vec<[f64; N_BANDS]> {
        let mut rng = crate::rng::shuffle_rng(seed);
        (0..n)
            .map(|_| std::array::from_fn(|_| rng.gen_range(0.002..0.04)))
            .collect()
    }

    #[test]
    fn every_kind_round_trips_with_identical_predictions() {
        let table = training_table(40, 11);
        let probes = queries(20, 12);
        for mut spec in EstimatorSpec::all_defaults() {
            // Shrink ensembles a little to keep the test quick.
            match &mut spec.model {
                ModelSpec::Bagging(p) | ModelSpec::Forest(p) | ModelSpec::ExtraTrees(p) => {
                    p.n_estimators = 10;
                }
                ModelSpec::Knn(p) => p.k = 3,
                _ => {}
            }
            let model = fit(&table, &spec).unwrap();
            let text = encode_model(&model).unwrap();
            let back = decode_model(&text).unwrap();
            assert_eq!(
                back.spec,
                model.spec,
                "spec changed for {}",
                spec.model_type()
            );
            assert_eq!(
                back.payload,
                model.payload,
                "payload changed for {}",
                spec.model_type()
            );
            for q in &probes {
                let a = model.predict_one(q).unwrap();
                let b = back.predict_one(q).unwrap();
                assert!(
                    a == b,
                    "prediction drifted for {}: {a} vs {b}",
                    spec.model_type()
                );
            }
        }
    }

    #[test]
    fn encoding_is_deterministic() {
        let table = training_table(25, 13);
        let spec = EstimatorSpec::new(ModelSpec::default_for("forest").unwrap());
        let model = fit(&table, &spec).unwrap();
        assert_eq!(encode_model(&model).unwrap(), encode_model(&model).unwrap());
    }

    #[test]
    fn knn_hyperparameters_survive_the_round_trip() {
        let table = training_table(30, 14);
        let spec = EstimatorSpec::new(ModelSpec::Knn(KnnParams {
            k: 2,
            aggregation: Aggregation::Median,
        }));
        let model = fit(&table, &spec).unwrap();
        let back = decode_model(&encode_model(&model).unwrap()).unwrap();
        for q in queries(10, 15) {
            assert_eq!(
                model.predict_one(&q).unwrap(),
                back.predict_one(&q).unwrap()
            );
        }
    }

    #[test]
    fn document_shape_matches_the_schema() {
        let table = training_table(30, 16);
        let spec = EstimatorSpec::new(ModelSpec::Ridge { lambda: 0.25 });
        let model = fit(&table, &spec).unwrap();
        let doc: Value = serde_json::from_str(&encode_model(&model).unwrap()).unwrap();
        assert_eq!(doc["format_version"], 1);
        assert_eq!(doc["model_type"], "ridge");
        assert_eq!(doc["hyperparams"]["lambda"], 0.25);
        assert_eq!(doc["hyperparams"]["seed"], 42);
        assert_eq!(doc["hyperparams"]["log_chl"], false);
        assert!(doc["hyperparams"].get("model").is_none());
        assert!(doc["preprocessing"].is_null());
        assert!(doc["payload"]["intercept"].is_number());
        assert_eq!(doc["payload"]["weights"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn svr_document_records_standardization() {
        let table = training_table(20, 17);
        let model = fit(
            &table,
            &EstimatorSpec::new(ModelSpec::default_for("svr").unwrap()),
        )
        .unwrap();
        let doc: Value = serde_json::from_str(&encode_model(&model).unwrap()).unwrap();
        assert_eq!(doc["preprocessing"]["mean"].as_array().unwrap().len(), 6);
        assert_eq!(doc["preprocessing"]["sd"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn tree_payload_is_nested_nodes() {
        let x = [[0.0; N_BANDS], [1.0; N_BANDS]];
        let table = SampleTable::new(
            x.iter()
                .zip([1.0, 2.0])
                .map(|(rrs, chl)| Sample {
                    rrs: rrs.map(|v| v + 0.01),
                    chl: Some(chl),
                })
                .collect(),
        );
        let model = fit(
            &table,
            &EstimatorSpec::new(ModelSpec::default_for("tree").unwrap()),
        )
        .unwrap();
        let doc: Value = serde_json::from_str(&encode_model(&model).unwrap()).unwrap();
        let payload = &doc["payload"];
        assert_eq!(payload["feature"], 0);
        assert!(payload["threshold"].is_number());
        assert_eq!(payload["left"]["leaf_value"], 1.0);
        assert_eq!(payload["right"]["leaf_value"], 2.0);
    }

    #[test]
    fn wrong_version_is_a_version_error() {
        let table = training_table(20, 18);
        let model = fit(&table, &EstimatorSpec::new(ModelSpec::Linear)).unwrap();
        let text = encode_model(&model).unwrap();
        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 2");
        assert_ne!(bumped, text);
        assert_eq!(decode_model(&bumped).unwrap_err().class(), "version");
        let missing = text.replace("\"format_version\": 1,", "");
        assert_eq!(decode_model(&missing).unwrap_err().class(), "version");
    }

    #[test]
    fn unknown_model_type_is_a_format_error() {
        let table = training_table(20, 19);
        let model = fit(&table, &EstimatorSpec::new(ModelSpec::Linear)).unwrap();
        let text = encode_model(&model).unwrap();
        let swapped = text.replace("\"model_type\": \"linear\"", "\"model_type\": \"gbm\"");
        assert_ne!(swapped, text);
        assert_eq!(decode_model(&swapped).unwrap_err().class(), "format");
    }

    #[test]
    fn mismatched_payload_is_a_parse_error() {
        let table = training_table(20, 20);
        let linear = fit(&table, &EstimatorSpec::new(ModelSpec::Linear)).unwrap();
        let svr = fit(
            &table,
            &EstimatorSpec::new(ModelSpec::default_for("svr").unwrap()),
        )
        .unwrap();
        // Graft the linear payload under the svr model_type.
        let mut doc: Value = serde_json::from_str(&encode_model(&svr).unwrap()).unwrap();
        let linear_doc: Value = serde_json::from_str(&encode_model(&linear).unwrap()).unwrap();
        doc["payload"] = linear_doc["payload"].clone();
        let err = decode_model(&serde_json::to_string(&doc).unwrap()).unwrap_err();
        assert_eq!(err.class(), "parse");
    }

    #[test]
    fn malformed_hyperparams_are_a_parse_error() {
        let text = r#"{
            "format_version": 1,
            "model_type": "ridge",
            "hyperparams": {"seed": 1},
            "preprocessing": null,
            "payload": {"intercept": 0.0, "weights": [0, 0, 0, 0, 0, 0]}
        }"#;
        assert_eq!(decode_model(text).unwrap_err().class(), "parse");
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let table = training_table(25, 21);
        let model = fit(
            &table,
            &EstimatorSpec::new(ModelSpec::default_for("knn").unwrap()),
        )
        .unwrap();
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        for q in queries(5, 22) {
            assert_eq!(
                model.predict_one(&q).unwrap(),
                back.predict_one(&q).unwrap()
            );
        }
        assert_eq!(
            read_model(&dir.path().join("nope.json"))
                .unwrap_err()
                .class(),
            "io"
        );
    }
}
