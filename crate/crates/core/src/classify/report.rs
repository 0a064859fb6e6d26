use std::fmt::Write;

use super::Sample;
use crate::error::{Error, Result};

/// Sample mean and standard deviation (`n - 1` denominator; zero for a
/// single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Classification outcome on a test set. Confusion rows are true classes,
/// columns predicted ones, both in `codes` order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub codes: Vec<u32>,
    pub confusion: Vec<Vec<usize>>,
    pub split: String,
    pub seed: u64,
}

impl EvalReport {
    pub(crate) fn tally(codes: Vec<u32>, test: &[Sample], predictions: &[u32]) -> Result<Self> {
        let index = |code: u32| {
            codes
                .binary_search(&code)
                .map_err(|_| Error::UnknownClass(code))
        };
        let mut confusion = vec![vec![0usize; codes.len()]; codes.len()];
        for (sample, &pred) in test.iter().zip(predictions) {
            let t = index(sample.record.sign_code)?;
            let p = index(pred)?;
            confusion[t][p] += 1;
        }
        Ok(Self {
            codes,
            confusion,
            split: String::new(),
            seed: 0,
        })
    }

    pub fn with_descriptor(mut self, split: impl Into<String>, seed: u64) -> Self {
        self.split = split.into();
        self.seed = seed;
        self
    }

    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.codes.len()).map(|i| self.confusion[i][i]).sum()
    }

    /// Percent of test samples on the diagonal.
    pub fn accuracy(&self) -> f64 {
        100.0 * self.correct() as f64 / self.total() as f64
    }

    /// Test sample count per class.
    pub fn class_counts(&self) -> Vec<usize> {
        self.confusion.iter().map(|row| row.iter().sum()).collect()
    }

    /// Percent correct per class; `None` for classes absent from the test set.
    pub fn per_class_accuracy(&self) -> Vec<Option<f64>> {
        self.confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n: usize = row.iter().sum();
                (n > 0).then(|| 100.0 * row[i] as f64 / n as f64)
            })
            .collect()
    }

    pub fn per_class_csv(&self) -> String {
        let mut s = String::from("sign_code,test_count,correct,accuracy\n");
        for (i, acc) in self.per_class_accuracy().iter().enumerate() {
            let n: usize = self.confusion[i].iter().sum();
            let acc = acc.map(|a| format!("{a:.4}")).unwrap_or_default();
            writeln!(
                s,
                "{},{},{},{}",
                self.codes[i], n, self.confusion[i][i], acc
            )
            .unwrap();
        }
        s
    }

    pub fn confusion_csv(&self) -> String {
        let mut s = String::from("true\\predicted");
        for c in &self.codes {
            write!(s, ",{c}").unwrap();
        }
        s.push('\n');
        for (code, row) in self.codes.iter().zip(&self.confusion) {
            write!(s, "{code}").unwrap();
            for v in row {
                write!(s, ",{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Human-readable summary table.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        writeln!(s, "split: {}", self.split).unwrap();
        writeln!(s, "seed: {}", self.seed).unwrap();
        writeln!(
            s,
            "accuracy: {:.2}% ({}/{})",
            self.accuracy(),
            self.correct(),
            self.total()
        )
        .unwrap();
        writeln!(
            s,
            "{:>6} {:>6} {:>8} {:>9}",
            "sign", "tests", "correct", "accuracy"
        )
        .unwrap();
        for (i, acc) in self.per_class_accuracy().iter().enumerate() {
            let acc = acc
                .map(|a| format!("{a:.2}%"))
                .unwrap_or_else(|| "-".into());
            writeln!(
                s,
                "{:>6} {:>6} {:>8} {:>9}",
                self.codes[i],
                self.confusion[i].iter().sum::<usize>(),
                self.confusion[i][i],
                acc
            )
            .unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::SampleRecord;
    use crate::features::FeatureMatrix;

    fn sample(code: u32) -> Sample {
        Sample {
            record: SampleRecord {
                sample_id: format!("{code}"),
                sign_code: code,
                subject_id: 1,
                repetition: 1,
                feature_path: Default::default(),
            },
            features: FeatureMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap(),
        }
    }

    #[test]
    fn perfect_predictions_are_diagonal() {
        let test: Vec<Sample> = [1, 1, 2, 3, 3, 3].into_iter().map(sample).collect();
        let preds = [1, 1, 2, 3, 3, 3];
        let r = EvalReport::tally(vec![1, 2, 3], &test, &preds).unwrap();
        assert_eq!(r.accuracy(), 100.0);
        assert_eq!(
            r.confusion,
            vec![vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 3]]
        );
    }

    #[test]
    fn counts_and_accuracy_agree() {
        let test: Vec<Sample> = [1, 1, 2, 2, 2].into_iter().map(sample).collect();
        let r = EvalReport::tally(vec![1, 2, 5], &test, &[1, 2, 2, 1, 5]).unwrap();
        assert_eq!(r.class_counts(), vec![2, 3, 0]);
        assert_eq!(r.accuracy(), 100.0 * 2.0 / 5.0);
        assert_eq!(
            r.per_class_accuracy(),
            vec![Some(50.0), Some(100.0 / 3.0), None]
        );
        assert!(r
            .confusion_csv()
            .starts_with("true\\predicted,1,2,5\n1,1,1,0\n"));
        assert!(r.per_class_csv().contains("\n5,0,0,\n"));
    }

    #[test]
    fn unknown_true_class_is_an_error() {
        let test = vec![sample(4)];
        assert!(matches!(
            EvalReport::tally(vec![1], &test, &[1]),
            Err(Error::UnknownClass(4))
        ));
    }

    #[test]
    fn mean_std_conventions() {
        assert_eq!(mean_std(&[97.0]), (97.0, 0.0));
        let (m, s) = mean_std(&[98.13, 97.63, 96.70]);
        assert!((m - 97.486_666_666_666_67).abs() < 1e-9);
        assert!(s > 0.0);
    }
}
