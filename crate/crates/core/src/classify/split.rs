use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{group_by_class, HasRecord};
use crate::error::{Error, Result};

/// Disjoint train/test indices into the split input, each ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    fn from_train_flags(flags: Vec<bool>) -> Result<Self> {
        let mut split = Split::default();
        for (i, is_train) in flags.into_iter().enumerate() {
            if is_train {
                split.train.push(i);
            } else {
                split.test.push(i);
            }
        }
        if split.test.is_empty() {
            return Err(Error::InsufficientSamples(
                "split leaves the test set empty".into(),
            ));
        }
        Ok(split)
    }
}

/// Number of training samples for a class of `n` under `fraction`.
fn train_count(fraction: f64, n: usize) -> usize {
    // tolerate representation error, e.g. 0.2 * 60
    ((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Per class, `ceil(fraction * class size)` samples go to training.
pub fn split_random<T: HasRecord>(records: &[T], train_fraction: f64, seed: u64) -> Result<Split> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::InvalidConfig(format!(
            "train fraction {train_fraction} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flags = vec![false; records.len()];
    for (code, mut idx) in group_by_class(records) {
        let k = train_count(train_fraction, idx.len());
        if k == 0 {
            return Err(Error::InsufficientSamples(format!(
                "sign {code}: fraction {train_fraction} of {} samples selects none for training",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for &i in &idx[..k.min(idx.len())] {
            flags[i] = true;
        }
    }
    Split::from_train_flags(flags)
}

/// Per class and subject, `per_subject` samples go to training.
pub fn split_subject_dependent<T: HasRecord>(
    records: &[T],
    per_subject: usize,
    seed: u64,
) -> Result<Split> {
    if per_subject == 0 {
        return Err(Error::InvalidConfig(
            "per_subject must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flags = vec![false; records.len()];
    for (code, idx) in group_by_class(records) {
        let mut by_subject: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for i in idx {
            by_subject
                .entry(records[i].record().subject_id)
                .or_default()
                .push(i);
        }
        for (subject, mut group) in by_subject {
            if group.len() < per_subject {
                return Err(Error::InsufficientSamples(format!(
                    "sign {code}, subject {subject}: {} samples, {per_subject} needed for training",
                    group.len()
                )));
            }
            group.shuffle(&mut rng);
            for &i in &group[..per_subject] {
                flags[i] = true;
            }
        }
    }
    Split::from_train_flags(flags)
}

/// All samples of `train_subjects` randomly chosen subjects go to training.
pub fn split_subject_independent<T: HasRecord>(
    records: &[T],
    train_subjects: usize,
    seed: u64,
) -> Result<Split> {
    let subjects: BTreeSet<u32> = records.iter().map(|r| r.record().subject_id).collect();
    if train_subjects == 0 || subjects.len() < train_subjects + 1 {
        return Err(Error::InsufficientSubjects {
            available: subjects.len(),
            requested: train_subjects,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = subjects.into_iter().collect();
    order.shuffle(&mut rng);
    let chosen: BTreeSet<u32> = order[..train_subjects].iter().copied().collect();
    let flags: Vec<bool> = records
        .iter()
        .map(|r| chosen.contains(&r.record().subject_id))
        .collect();
    for (code, idx) in group_by_class(records) {
        if !idx.iter().any(|&i| flags[i]) {
            return Err(Error::InsufficientSamples(format!(
                "sign {code} has no samples from training subjects {chosen:?}"
            )));
        }
    }
    Split::from_train_flags(flags)
}

/// The three training strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    Random { fraction: f64 },
    SubjectDependent { per_subject: usize },
    SubjectIndependent { train_subjects: usize },
}

impl Protocol {
    pub fn split<T: HasRecord>(&self, records: &[T], seed: u64) -> Result<Split> {
        match *self {
            Protocol::Random { fraction } => split_random(records, fraction, seed),
            Protocol::SubjectDependent { per_subject } => {
                split_subject_dependent(records, per_subject, seed)
            }
            Protocol::SubjectIndependent { train_subjects } => {
                split_subject_independent(records, train_subjects, seed)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Random { .. } => "random",
            Protocol::SubjectDependent { .. } => "subject-dependent",
            Protocol::SubjectIndependent { .. } => "subject-independent",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Random { fraction } => write!(f, "random(fraction={fraction})"),
            Protocol::SubjectDependent { per_subject } => {
                write!(f, "subject-dependent(per_subject={per_subject})")
            }
            Protocol::SubjectIndependent { train_subjects } => {
                write!(f, "subject-independent(train_subjects={train_subjects})")
            }
        }
    }
}
