//! Per-class model banks, likelihood classification and the evaluation
//! protocols (random, subject-dependent and subject-independent splits,
//! learning curves).

mod io;
mod report;
mod split;

use std::collections::BTreeMap;
use std::path::PathBuf;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::hmm::{self, Hmm, TrainConfig};

pub use io::{
    load_samples, read_manifest, read_split, write_manifest, write_split, MANIFEST_HEADER,
};
pub use report::{mean_std, EvalReport};
pub use split::{
    split_random, split_subject_dependent, split_subject_independent, Protocol, Split,
};

/// One row of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleRecord {
    pub sample_id: String,
    pub sign_code: u32,
    pub subject_id: u32,
    pub repetition: u32,
    pub feature_path: PathBuf,
}

impl SampleRecord {
    pub fn validate(&self) -> Result<()> {
        if self.sign_code == 0 || self.subject_id == 0 || self.repetition == 0 {
            return Err(Error::InvalidConfig(format!(
                "sample {}: sign code, subject and repetition are 1-based",
                self.sample_id
            )));
        }
        Ok(())
    }
}

/// A manifest row with its features loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub record: SampleRecord,
    pub features: FeatureMatrix,
}

/// Anything that carries a manifest row; lets splits work on both bare
/// records and loaded samples.
pub trait HasRecord {
    fn record(&self) -> &SampleRecord;
}

impl HasRecord for SampleRecord {
    fn record(&self) -> &SampleRecord {
        self
    }
}

impl HasRecord for Sample {
    fn record(&self) -> &SampleRecord {
        &self.record
    }
}

/// One trained model per sign, ordered by sign code.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBank {
    models: Vec<(u32, Hmm)>,
}

impl ModelBank {
    pub fn new(mut models: Vec<(u32, Hmm)>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidModel("model bank is empty".into()));
        }
        models.sort_by_key(|(code, _)| *code);
        if let Some(w) = models.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidModel(format!(
                "duplicate sign code {}",
                w[0].0
            )));
        }
        let d = models[0].1.dims();
        if let Some((_, m)) = models.iter().find(|(_, m)| m.dims() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.dims(),
            });
        }
        Ok(Self { models })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.models[0].1.dims()
    }

    pub fn codes(&self) -> Vec<u32> {
        self.models.iter().map(|(c, _)| *c).collect()
    }

    pub fn models(&self) -> &[(u32, Hmm)] {
        &self.models
    }

    pub fn get(&self, code: u32) -> Option<&Hmm> {
        self.models
            .binary_search_by_key(&code, |(c, _)| *c)
            .ok()
            .map(|i| &self.models[i].1)
    }
}

/// SplitMix64 finalizer; decorrelates nearby seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed used to train the model of `sign_code`.
pub fn class_seed(seed: u64, sign_code: u32) -> u64 {
    mix_seed(seed, u64::from(sign_code))
}

pub(crate) fn group_by_class<T: HasRecord>(items: &[T]) -> BTreeMap<u32, Vec<usize>> {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        groups.entry(item.record().sign_code).or_default().push(i);
    }
    groups
}

/// Convergence summary of one class model.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTraining {
    pub sign_code: u32,
    pub num_sequences: usize,
    /// Log-likelihood trace, one entry per model along the run.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub resets: usize,
}

fn train_class(
    code: u32,
    sequences: Vec<FeatureMatrix>,
    config: &TrainConfig,
) -> Result<(Hmm, ClassTraining)> {
    let cfg = TrainConfig {
        seed: class_seed(config.seed, code),
        ..*config
    };
    let n = sequences.len();
    hmm::baum_welch(&sequences, &cfg)
        .map(|o| {
            let info = ClassTraining {
                sign_code: code,
                num_sequences: n,
                trace: o.trace,
                converged: o.converged,
                resets: o.resets,
            };
            (o.model, info)
        })
        .map_err(|e| Error::Training {
            sign_code: code,
            source: Box::new(e),
        })
}

/// Trains one HMM per sign code present in `train`.
pub fn train_bank(train: &[Sample], config: &TrainConfig) -> Result<ModelBank> {
    train_bank_detailed(train, config).map(|(bank, _)| bank)
}

/// [`train_bank`] plus per-class convergence information, in code order.
pub fn train_bank_detailed(
    train: &[Sample],
    config: &TrainConfig,
) -> Result<(ModelBank, Vec<ClassTraining>)> {
    config.validate()?;
    let jobs: Vec<(u32, Vec<FeatureMatrix>)> = group_by_class(train)
        .into_iter()
        .map(|(code, idx)| {
            (
                code,
                idx.iter().map(|&i| train[i].features.clone()).collect(),
            )
        })
        .collect();
    if jobs.is_empty() {
        return Err(Error::InsufficientSamples("training set is empty".into()));
    }
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(Hmm, ClassTraining)>> = jobs
        .into_par_iter()
        .map(|(c, s)| train_class(c, s, config))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(Hmm, ClassTraining)>> = jobs
        .into_iter()
        .map(|(c, s)| train_class(c, s, config))
        .collect();
    let mut models = Vec::with_capacity(results.len());
    let mut infos = Vec::with_capacity(results.len());
    for r in results {
        let (model, info) = r?;
        models.push((info.sign_code, model));
        infos.push(info);
    }
    Ok((ModelBank::new(models)?, infos))
}

/// Winning sign and the log-likelihood under every model, in bank order.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub sign_code: u32,
    pub logliks: Vec<f64>,
}

/// Index of the largest score; the earliest wins ties and NaN never wins.
pub fn argmax_first(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_nan() {
            continue;
        }
        match best {
            Some(b) if scores[b] >= s => {}
            _ => best = Some(i),
        }
    }
    best
}

/// `argmax_i P(obs | model_i)`, ties going to the lowest sign code.
pub fn classify(bank: &ModelBank, obs: &FeatureMatrix) -> Result<Classification> {
    let logliks = bank
        .models
        .iter()
        .map(|(_, m)| hmm::forward_log(m, obs))
        .collect::<Result<Vec<_>>>()?;
    let best = argmax_first(&logliks).unwrap_or(0);
    Ok(Classification {
        sign_code: bank.models[best].0,
        logliks,
    })
}

fn predict_all<F>(test: &[Sample], f: F) -> Result<Vec<u32>>
where
    F: Fn(&Sample) -> Result<u32> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        test.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        test.iter().map(f).collect()
    }
}

/// Classifies every test sample and tallies the confusion matrix.
pub fn evaluate(bank: &ModelBank, test: &[Sample]) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::InsufficientSamples("test set is empty".into()));
    }
    let predictions = predict_all(test, |s| classify(bank, &s.features).map(|c| c.sign_code))?;
    EvalReport::tally(bank.codes(), test, &predictions)
}

/// 1-nearest-neighbour baseline on flattened feature matrices.
pub fn baseline_1nn(train: &[Sample], test: &[Sample]) -> Result<EvalReport> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::InsufficientSamples(
            "1-NN needs non-empty train and test sets".into(),
        ));
    }
    let flat: Vec<(u32, Vec<f64>)> = train
        .iter()
        .map(|s| (s.record.sign_code, s.features.flatten()))
        .collect();
    let mut codes: Vec<u32> = group_by_class(train)
        .into_keys()
        .chain(group_by_class(test).into_keys())
        .collect();
    codes.sort_unstable();
    codes.dedup();
    let predictions = predict_all(test, |s| {
        let x = s.features.flatten();
        let mut best: Option<(f64, u32)> = None;
        for (code, y) in &flat {
            if y.len() != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: y.len(),
                    found: x.len(),
                });
            }
            let dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            let better = match best {
                None => true,
                Some((bd, bc)) => dist < bd || (dist == bd && *code < bc),
            };
            if better {
                best = Some((dist, *code));
            }
        }
        Ok(best.map(|(_, c)| c).unwrap_or(codes[0]))
    })?;
    EvalReport::tally(codes, test, &predictions)
}

fn select(samples: &[Sample], idx: &[usize]) -> Vec<Sample> {
    idx.iter().map(|&i| samples[i].clone()).collect()
}

/// Splits, trains and evaluates once.
pub fn run_once(
    samples: &[Sample],
    protocol: &Protocol,
    config: &TrainConfig,
    seed: u64,
) -> Result<EvalReport> {
    let split = protocol.split(samples, seed)?;
    let train = select(samples, &split.train);
    let test = select(samples, &split.test);
    let cfg = TrainConfig { seed, ..*config };
    let bank = train_bank(&train, &cfg)?;
    Ok(evaluate(&bank, &test)?.with_descriptor(protocol.to_string(), seed))
}

/// Accuracy of one protocol over repeated seeded runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSummary {
    pub protocol: Protocol,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub reports: Vec<EvalReport>,
}

/// Runs `protocol` `runs` times; run `r` uses seed `base_seed + r` for both
/// the split and training.
pub fn run_protocol(
    samples: &[Sample],
    protocol: &Protocol,
    runs: usize,
    config: &TrainConfig,
    base_seed: u64,
) -> Result<ProtocolSummary> {
    if runs == 0 {
        return Err(Error::InvalidConfig("at least one run is required".into()));
    }
    let reports = (0..runs as u64)
        .map(|r| run_once(samples, protocol, config, base_seed.wrapping_add(r)))
        .collect::<Result<Vec<_>>>()?;
    let accuracies: Vec<f64> = reports.iter().map(|r| r.accuracy()).collect();
    let (mean, std) = mean_std(&accuracies);
    Ok(ProtocolSummary {
        protocol: *protocol,
        accuracies,
        mean,
        std,
        reports,
    })
}

/// Mean of the per-protocol mean accuracies.
pub fn mean_of_means(summaries: &[ProtocolSummary]) -> f64 {
    summaries.iter().map(|s| s.mean).sum::<f64>() / summaries.len() as f64
}

/// Human-readable table: one `mean (±std)` row per protocol and a final
/// row with the mean over protocols.
pub fn protocol_table(summaries: &[ProtocolSummary]) -> String {
    let width = summaries
        .iter()
        .map(|s| s.protocol.to_string().len())
        .max()
        .unwrap_or(0)
        .max(8);
    let mut out = format!("{:<width$}  runs  accuracy % mean (±std)\n", "protocol");
    for s in summaries {
        out.push_str(&format!(
            "{:<width$}  {:>4}  {:.2} (±{:.2})\n",
            s.protocol.to_string(),
            s.accuracies.len(),
            s.mean,
            s.std
        ));
    }
    if !summaries.is_empty() {
        out.push_str(&format!(
            "{:<width$}  {:>4}  {:.2}\n",
            "mean",
            "",
            mean_of_means(summaries)
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub fraction: f64,
    pub mean: f64,
    pub std: f64,
}

/// Mean and standard deviation of random-split accuracy per training
/// fraction.
pub fn learning_curve(
    samples: &[Sample],
    fractions: &[f64],
    repeats: usize,
    config: &TrainConfig,
    base_seed: u64,
) -> Result<Vec<CurvePoint>> {
    fractions
        .iter()
        .map(|&fraction| {
            let summary = run_protocol(
                samples,
                &Protocol::Random { fraction },
                repeats,
                config,
                base_seed,
            )?;
            Ok(CurvePoint {
                fraction,
                mean: summary.mean,
                std: summary.std,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmm::{Gaussian, Gmm};

    fn constant_model(mean: f64) -> Hmm {
        let e = Gmm::single(Gaussian::new(vec![mean], vec![1.0]).unwrap());
        Hmm::new(vec![1.0], vec![1.0], vec![e]).unwrap()
    }

    fn obs(v: f64) -> FeatureMatrix {
        FeatureMatrix::from_rows(&[vec![v; 4]]).unwrap()
    }

    #[test]
    fn single_model_always_wins() {
        let bank = ModelBank::new(vec![(7, constant_model(0.0))]).unwrap();
        for v in [-100.0, 0.0, 3.0] {
            assert_eq!(classify(&bank, &obs(v)).unwrap().sign_code, 7);
        }
    }

    #[test]
    fn ties_go_to_lowest_code() {
        let bank =
            ModelBank::new(vec![(9, constant_model(1.0)), (4, constant_model(1.0))]).unwrap();
        let c = classify(&bank, &obs(0.3)).unwrap();
        assert_eq!(c.sign_code, 4);
        assert_eq!(c.logliks[0], c.logliks[1]);
    }

    #[test]
    fn argmax_only_sees_differences() {
        let scores = [-10.0, -3.5, -3.5, -7.0];
        for offset in [-1e6, -3.0, 0.0, 42.0, 1e6] {
            let shifted: Vec<f64> = scores.iter().map(|s| s + offset).collect();
            assert_eq!(argmax_first(&shifted), Some(1));
        }
        assert_eq!(argmax_first(&[f64::NAN, f64::NEG_INFINITY]), Some(1));
    }

    #[test]
    fn bank_rejects_duplicates() {
        assert!(ModelBank::new(vec![(1, constant_model(0.0)), (1, constant_model(1.0))]).is_err());
        assert!(ModelBank::new(vec![]).is_err());
        let b = ModelBank::new(vec![(3, constant_model(0.0)), (1, constant_model(1.0))]).unwrap();
        assert_eq!(b.codes(), vec![1, 3]);
        assert!(b.get(3).is_some() && b.get(2).is_none());
    }

    #[test]
    fn class_seeds_differ() {
        assert_ne!(class_seed(0, 1), class_seed(0, 2));
        assert_ne!(class_seed(1, 1), class_seed(0, 1));
        assert_eq!(class_seed(5, 3), class_seed(5, 3));
    }
}
