//! Model evaluation: error metrics, multi-model comparison reports, kernel
//! density estimation, grid compositing, and map rendering.

pub mod gridops;
pub mod kde;
pub mod render;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{fit, EstimatorSpec};
use crate::sample::SampleTable;
use crate::split::TrainTestSplit;

/// Mean absolute error, in the units of the inputs (mg/m³ for chlorophyll).
pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Argument(format!(
            "prediction and truth lengths differ ({} vs {})",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Argument("mae needs at least one pair".into()));
    }
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / pred.len() as f64)
}

/// Accuracy as the coefficient of determination, in percent:
/// `100·(1 − Σ(tᵢ−pᵢ)²/Σ(tᵢ−mean(t))²)`. May be negative; 100 is perfect.
pub fn r2_accuracy(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Argument(format!(
            "prediction and truth lengths differ ({} vs {})",
            pred.len(),
            truth.len()
        )));
    }
    if pred.len() < 2 {
        return Err(Error::Argument("accuracy needs at least two pairs".into()));
    }
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in truth {
        min = min.min(t);
        max = max.max(t);
    }
    if min == max {
        return Err(Error::Domain(
            "truth is constant; accuracy is undefined (zero variance)".into(),
        ));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p) * (t - p)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    Ok(100.0 * (1.0 - ss_res / ss_tot))
}

/// One line of a comparison report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub mae: f64,
    pub accuracy: f64,
    pub n_test: usize,
}

/// Per-model test metrics plus the provenance of the split they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub rows: Vec<ReportRow>,
    pub dataset: String,
    pub seed: Option<u64>,
    pub train_frac: Option<f64>,
    pub test_frac: Option<f64>,
}

/// Fit every spec on `train` and score it on `test`.
///
/// Rows come back in spec order. Fits run concurrently but share no state —
/// each spec carries its own seed — so rows are independent of both thread
/// scheduling and which other specs are present. Any error is tagged with
/// the model name it came from.
pub fn compare_tables(
    specs: &[EstimatorSpec],
    train: &SampleTable,
    test: &SampleTable,
    dataset: &str,
) -> Result<EvaluationReport> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::Argument(
            "comparison needs non-empty train and test tables".into(),
        ));
    }
    let truth = test.targets()?;
    let rows: Vec<ReportRow> = specs
        .par_iter()
        .map(|spec| -> Result<ReportRow> {
            let name = spec.model_type();
            let model = fit(train, spec).map_err(|e| e.with_context(name))?;
            let pred: Vec<f64> = test
                .rows
                .iter()
                .map(|s| model.predict_one(&s.rrs))
                .collect::<Result<_>>()
                .map_err(|e| e.with_context(name))?;
            Ok(ReportRow {
                model: name.to_string(),
                mae: mae(&pred, &truth).map_err(|e| e.with_context(name))?,
                accuracy: r2_accuracy(&pred, &truth).map_err(|e| e.with_context(name))?,
                n_test: test.len(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(EvaluationReport {
        rows,
        dataset: dataset.to_string(),
        seed: None,
        train_frac: None,
        test_frac: None,
    })
}

/// [`compare_tables`] over the two sides of a split, recording its
/// provenance in the report.
pub fn compare_models(
    specs: &[EstimatorSpec],
    split: &TrainTestSplit,
    dataset: &str,
) -> Result<EvaluationReport> {
    let mut report = compare_tables(specs, &split.train, &split.test, dataset)?;
    report.seed = Some(split.seed);
    report.train_frac = Some(split.train_frac);
    report.test_frac = Some(split.test_frac);
    Ok(report)
}

impl EvaluationReport {
    /// Machine-readable form: header `model,mae,accuracy,n_test`, one row
    /// per model, full shortest-round-trip precision, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,mae,accuracy,n_test\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.model, r.mae, r.accuracy, r.n_test
            ));
        }
        out
    }

    /// Human-readable aligned table with a provenance line.
    pub fn to_text_table(&self) -> String {
        let name_w = self
            .rows
            .iter()
            .map(|r| r.model.len())
            .chain(["model".len()])
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        out.push_str(&format!("dataset: {}", self.dataset));
        if let (Some(seed), Some(tr), Some(te)) = (self.seed, self.train_frac, self.test_frac) {
            out.push_str(&format!(
                " (seed {seed}, train fraction {tr}, test fraction {te})"
            ));
        }
        out.push('\n');
        out.push_str(&format!(
            "{:<name_w$}  {:>12}  {:>12}  {:>8}\n",
            "model", "mae", "accuracy_%", "n_test"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<name_w$}  {:>12.4}  {:>12.2}  {:>8}\n",
                r.model, r.mae, r.accuracy, r.n_test
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::knn::{Aggregation, KnnParams};
    use crate::estimators::ModelSpec;
    use crate::sample::{Sample, N_BANDS};
    use crate::split::split_train_test;
    use rand::Rng;

    #[test]
    fn mae_hand_values() {
        assert_eq!(mae(&[1.0, 3.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert_eq!(mae(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 2.0);
        assert_eq!(mae(&[5.0], &[3.0]).unwrap(), 2.0);
        assert_eq!(mae(&[1.0], &[1.0, 2.0]).unwrap_err().class(), "argument");
        assert_eq!(mae(&[], &[]).unwrap_err().class(), "argument");
    }

    #[test]
    fn accuracy_hand_values() {
        let truth = [1.0, 2.0, 3.0];
        assert_eq!(r2_accuracy(&truth, &truth).unwrap(), 100.0);
        assert_eq!(r2_accuracy(&[2.0, 2.0, 2.0], &truth).unwrap(), 0.0);
        assert_eq!(r2_accuracy(&[0.0, 0.0, 0.0], &truth).unwrap(), -600.0);
        assert_eq!(
            r2_accuracy(&[1.0, 1.0], &[2.0, 2.0]).unwrap_err().class(),
            "domain"
        );
        assert_eq!(r2_accuracy(&[1.0], &[1.0]).unwrap_err().class(), "argument");
    }

    #[test]
    fn metrics_match_brute_force_on_random_vectors() {
        let mut rng = crate::rng::shuffle_rng(31);
        for _ in 0..50 {
            let n = rng.gen_range(2..40);
            let pred: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let truth: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let mut abs = 0.0;
            for i in 0..n {
                abs += (pred[i] - truth[i]).abs();
            }
            assert!((mae(&pred, &truth).unwrap() - abs / n as f64).abs() < 1e-12);
            let mean: f64 = truth.iter().sum::<f64>() / n as f64;
            let mut res = 0.0;
            let mut tot = 0.0;
            for i in 0..n {
                res += (truth[i] - pred[i]).powi(2);
                tot += (truth[i] - mean).powi(2);
            }
            let expect = 100.0 * (1.0 - res / tot);
            assert!((r2_accuracy(&pred, &truth).unwrap() - expect).abs() < 1e-12);
        }
    }

    fn synthetic_table(n: usize, seed: u64) -> SampleTable {
        let mut rng = crate::rng::shuffle_rng(seed);
        SampleTable::new(
            (0..n)
                .map(|_| {
                    let rrs: [f64; N_BANDS] = std::array::from_fn(|_| rng.gen_range(0.002..0.05));
                    Sample {
                        rrs,
                        chl: Some(0.2 + 30.0 * rrs[1] + 20.0 * rrs[3]),
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn knn_k1_on_subset_of_train_is_perfect() {
        let table = synthetic_table(50, 32);
        let train = table.clone();
        let test = SampleTable::new(table.rows[10..30].to_vec());
        let spec = EstimatorSpec::new(ModelSpec::Knn(KnnParams {
            k: 1,
            aggregation: Aggregation::Mean,
        }));
        let report = compare_tables(&[spec], &train, &test, "subset").unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].model, "knn");
        assert_eq!(report.rows[0].mae, 0.0);
        assert_eq!(report.rows[0].accuracy, 100.0);
        assert_eq!(report.rows[0].n_test, 20);
    }

    #[test]
    fn duplicate_specs_give_identical_rows_and_order_is_preserved() {
        let table = synthetic_table(120, 33);
        let split = split_train_test(&table, 0.6, 0.3, 9).unwrap();
        let forest = EstimatorSpec::new(ModelSpec::default_for("forest").unwrap());
        let linear = EstimatorSpec::new(ModelSpec::Linear);
        let report = compare_models(
            &[forest.clone(), linear.clone(), forest.clone()],
            &split,
            "dup",
        )
        .unwrap();
        assert_eq!(report.rows[0], report.rows[2]);
        assert_eq!(report.rows[1].model, "linear");
        assert_eq!(report.seed, Some(9));
        // A row must not depend on which other specs are present.
        let alone = compare_models(&[forest], &split, "dup").unwrap();
        assert_eq!(alone.rows[0], report.rows[0]);
    }

    #[test]
    fn fit_errors_carry_the_model_name() {
        let table = synthetic_table(4, 34); // too small for linear (needs 7)
        let test = synthetic_table(10, 35);
        let err = compare_tables(&[EstimatorSpec::new(ModelSpec::Linear)], &table, &test, "x")
            .unwrap_err();
        assert_eq!(err.class(), "argument");
        assert!(err.to_string().contains("linear"), "{err}");
    }

    #[test]
    fn csv_and_table_shapes() {
        let report = EvaluationReport {
            rows: vec![
                ReportRow {
                    model: "extra_trees".into(),
                    mae: 0.07,
                    accuracy: 96.5,
                    n_test: 4300,
                },
                ReportRow {
                    model: "svr".into(),
                    mae: 0.43,
                    accuracy: 5.05,
                    n_test: 4300,
                },
            ],
            dataset: "cci".into(),
            seed: Some(42),
            train_frac: Some(0.05),
            test_frac: Some(0.01),
        };
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "model,mae,accuracy,n_test");
        assert_eq!(lines.next().unwrap(), "extra_trees,0.07,96.5,4300");
        assert_eq!(lines.next().unwrap(), "svr,0.43,5.05,4300");
        let table = report.to_text_table();
        assert!(table.contains("dataset: cci"));
        assert!(table.contains("seed 42"));
        assert!(table.contains("extra_trees"));
        assert!(table.lines().count() >= 4);
    }
}
