//! k-nearest-neighbour classification and stratified cross-validation.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::graph::Label;
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub app_id: String,
    pub label: Label,
    pub vector: Vec<f64>,
}

/// Confusion counts with malware as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn record(&mut self, actual: Label, predicted: Label) {
        match (actual, predicted) {
            (Label::Malware, Label::Malware) => self.tp += 1,
            (Label::Benign, Label::Benign) => self.tn += 1,
            (Label::Benign, Label::Malware) => self.fp += 1,
            (Label::Malware, Label::Benign) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn merged(&self, other: &ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + other.tp,
            tn: self.tn + other.tn,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricsReport {
    pub tpr: f64,
    pub fnr: f64,
    pub tnr: f64,
    pub fpr: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl MetricsReport {
    /// Field names in report order, matching the usual abbreviations.
    pub const FIELDS: [&'static str; 8] = ["TPR", "FNR", "TNR", "FPR", "A", "P", "R", "F1"];

    pub fn values(&self) -> [f64; 8] {
        [
            self.tpr,
            self.fnr,
            self.tnr,
            self.fpr,
            self.accuracy,
            self.precision,
            self.recall,
            self.f_measure,
        ]
    }

    /// Element-wise mean; the default report for an empty slice.
    pub fn mean(reports: &[MetricsReport]) -> MetricsReport {
        if reports.is_empty() {
            return MetricsReport::default();
        }
        let n = reports.len() as f64;
        let mut sum = [0.0f64; 8];
        for r in reports {
            for (s, v) in sum.iter_mut().zip(r.values()) {
                *s += v;
            }
        }
        let [tpr, fnr, tnr, fpr, accuracy, precision, recall, f_measure] = sum.map(|s| s / n);
        MetricsReport {
            tpr,
            fnr,
            tnr,
            fpr,
            accuracy,
            precision,
            recall,
            f_measure,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// All eight rates; any 0/0 is reported as 0.
pub fn metrics(c: &ConfusionCounts) -> MetricsReport {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f_measure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    MetricsReport {
        tpr: recall,
        fnr: ratio(c.fn_, c.tp + c.fn_),
        tnr: ratio(c.tn, c.tn + c.fp),
        fpr: ratio(c.fp, c.tn + c.fp),
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f_measure,
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Majority vote of the `k` nearest training samples by Euclidean distance.
///
/// Equidistant samples are ranked by position in `train`; a tied vote goes
/// to malware.
pub fn knn_predict(train: &[LabeledSample], query: &[f64], k: usize) -> Result<Label> {
    let refs: Vec<&LabeledSample> = train.iter().collect();
    knn_predict_among(&refs, query, k)
}

fn knn_predict_among(train: &[&LabeledSample], query: &[f64], k: usize) -> Result<Label> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if k == 0 || k > train.len() {
        return Err(Error::InvalidK {
            k,
            available: train.len(),
        });
    }
    let mut scored = Vec::with_capacity(train.len());
    for (i, sample) in train.iter().enumerate() {
        if sample.vector.len() != query.len() {
            return Err(Error::DimensionMismatch {
                expected: query.len(),
                found: sample.vector.len(),
            });
        }
        scored.push((squared_distance(&sample.vector, query), i));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let malware = scored[..k]
        .iter()
        .filter(|&&(_, i)| train[i].label == Label::Malware)
        .count();
    Ok(if 2 * malware >= k {
        Label::Malware
    } else {
        Label::Benign
    })
}

/// Fold index for every sample. Each class is shuffled with the seed and
/// dealt round-robin, continuing the deal where the previous class stopped,
/// so fold sizes and class shares stay within one sample of even.
pub fn stratified_folds(labels: &[Label], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::TooFewFolds(folds));
    }
    let mut rng = seeded(seed);
    let mut assignment = alloc::vec![0usize; labels.len()];
    let mut offset = 0;
    for class in [Label::Benign, Label::Malware] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::ClassTooSmall {
                label: class,
                count: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignment[i] = (offset + pos) % folds;
        }
        offset = (offset + members.len()) % folds;
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValReport {
    /// Mean of the per-fold rates.
    pub metrics: MetricsReport,
    /// Counts summed over all folds.
    pub micro: ConfusionCounts,
    pub per_fold: Vec<ConfusionCounts>,
}

impl CrossValReport {
    pub fn micro_metrics(&self) -> MetricsReport {
        metrics(&self.micro)
    }
}

/// Stratified `folds`-fold cross-validation of k-NN.
pub fn cross_validate(
    dataset: &[LabeledSample],
    folds: usize,
    k: usize,
    seed: u64,
) -> Result<CrossValReport> {
    let labels: Vec<Label> = dataset.iter().map(|s| s.label).collect();
    let assignment = stratified_folds(&labels, folds, seed)?;
    let mut per_fold = Vec::with_capacity(folds);
    for fold in 0..folds {
        let train: Vec<&LabeledSample> = dataset
            .iter()
            .zip(&assignment)
            .filter(|(_, &f)| f != fold)
            .map(|(s, _)| s)
            .collect();
        let mut counts = ConfusionCounts::default();
        for (sample, _) in dataset.iter().zip(&assignment).filter(|(_, &f)| f == fold) {
            let predicted = knn_predict_among(&train, &sample.vector, k)?;
            counts.record(sample.label, predicted);
        }
        per_fold.push(counts);
    }
    let fold_metrics: Vec<MetricsReport> = per_fold.iter().map(metrics).collect();
    let micro = per_fold
        .iter()
        .fold(ConfusionCounts::default(), |acc, c| acc.merged(c));
    Ok(CrossValReport {
        metrics: MetricsReport::mean(&fold_metrics),
        micro,
        per_fold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample(label: Label, v: &[f64]) -> LabeledSample {
        LabeledSample {
            app_id: String::new(),
            label,
            vector: v.to_vec(),
        }
    }

    #[test]
    fn exact_match_returns_its_label() {
        let train = vec![
            sample(Label::Benign, &[0.0, 0.0]),
            sample(Label::Malware, &[5.0, 5.0]),
        ];
        assert_eq!(knn_predict(&train, &[5.0, 5.0], 1).unwrap(), Label::Malware);
        assert_eq!(knn_predict(&train, &[0.0, 0.0], 1).unwrap(), Label::Benign);
    }

    #[test]
    fn three_neighbours_vote() {
        let train = vec![
            sample(Label::Benign, &[0.0, 0.0]),
            sample(Label::Malware, &[10.0, 10.0]),
            sample(Label::Malware, &[10.0, 9.0]),
        ];
        assert_eq!(knn_predict(&train, &[9.0, 9.0], 3).unwrap(), Label::Malware);
    }

    #[test]
    fn equidistant_neighbours_prefer_earlier_sample() {
        let train = vec![
            sample(Label::Benign, &[1.0]),
            sample(Label::Malware, &[-1.0]),
        ];
        assert_eq!(knn_predict(&train, &[0.0], 1).unwrap(), Label::Benign);
        let flipped = vec![train[1].clone(), train[0].clone()];
        assert_eq!(knn_predict(&flipped, &[0.0], 1).unwrap(), Label::Malware);
    }

    #[test]
    fn tied_vote_goes_to_malware() {
        let train = vec![
            sample(Label::Benign, &[1.0]),
            sample(Label::Malware, &[2.0]),
        ];
        assert_eq!(knn_predict(&train, &[0.0], 2).unwrap(), Label::Malware);
    }

    #[test]
    fn knn_errors() {
        assert_eq!(knn_predict(&[], &[0.0], 1), Err(Error::EmptyTrainingSet));
        let train = vec![sample(Label::Benign, &[1.0, 2.0])];
        assert_eq!(
            knn_predict(&train, &[0.0], 1),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
        assert_eq!(
            knn_predict(&train, &[0.0, 0.0], 2),
            Err(Error::InvalidK { k: 2, available: 1 })
        );
    }

    #[test]
    fn perfect_classifier_metrics() {
        let m = metrics(&ConfusionCounts {
            tp: 1,
            tn: 1,
            fp: 0,
            fn_: 0,
        });
        assert_eq!((m.tpr, m.fnr, m.fpr, m.accuracy, m.f_measure), (1.0, 0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn all_missed_metrics() {
        let m = metrics(&ConfusionCounts {
            tp: 0,
            tn: 0,
            fp: 0,
            fn_: 1,
        });
        assert_eq!((m.tpr, m.fnr), (0.0, 1.0));
        assert_eq!(m.f_measure, 0.0);
        assert_eq!(m.precision, 0.0);
    }

    #[test]
    fn best_threshold_row_rates() {
        let m = metrics(&ConfusionCounts {
            tp: 968,
            tn: 958,
            fp: 42,
            fn_: 32,
        });
        assert!((m.fnr - 0.032).abs() < 1e-12);
        assert!((m.fpr - 0.042).abs() < 1e-12);
        assert!((m.tpr - 0.968).abs() < 1e-12);
    }

    #[test]
    fn class_smaller_than_folds_is_rejected() {
        let labels = vec![Label::Benign; 12]
            .into_iter()
            .chain(vec![Label::Malware; 3])
            .collect::<Vec<_>>();
        assert_eq!(
            stratified_folds(&labels, 10, 0),
            Err(Error::ClassTooSmall {
                label: Label::Malware,
                count: 3,
                folds: 10
            })
        );
        assert_eq!(stratified_folds(&labels, 1, 0), Err(Error::TooFewFolds(1)));
    }

    #[test]
    fn separable_clouds_classify_perfectly() {
        let mut data = Vec::new();
        for i in 0..30 {
            let x = i as f64 * 0.01;
            data.push(sample(Label::Benign, &[x, x]));
            data.push(sample(Label::Malware, &[10.0 + x, 10.0 - x]));
        }
        let report = cross_validate(&data, 10, 1, 4).unwrap();
        assert_eq!(report.metrics.accuracy, 1.0);
        assert_eq!(report.micro.total(), 60);
        assert_eq!(report, cross_validate(&data, 10, 1, 4).unwrap());
    }
}
