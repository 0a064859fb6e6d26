//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every entry point takes plain numbers or strings and returns JSON text,
//! so the same functions run under native tests.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use trajsign::classify::{classify, train_bank, ModelBank};
use trajsign::datagen::{generate_samples, sample_stats, GenSpec, Prototype, NUM_PROTOTYPES};
use trajsign::features::{assemble, interpolate};
use trajsign::imaging::{region_grow, region_stats, Frame, RegionStats};
use trajsign::{FeatureMatrix, FeatureSet, TrainConfig};

/// Resampled sequence length used throughout the demo.
const LENGTH: usize = 30;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string(value).expect("demo payloads serialize")
}

#[derive(Serialize)]
struct Stats {
    x: f64,
    y: f64,
    area: f64,
    orientation: f64,
    eccentricity: f64,
}

impl From<RegionStats> for Stats {
    fn from(s: RegionStats) -> Self {
        Self {
            x: s.centroid_x,
            y: s.centroid_y,
            area: s.area,
            orientation: s.orientation,
            eccentricity: s.eccentricity,
        }
    }
}

#[derive(Serialize)]
struct Grown {
    /// Row-major 0/1 membership.
    mask: Vec<u8>,
    stats: Stats,
}

/// Grows the 8-connected region around `(seed_x, seed_y)` in a grayscale
/// image and returns its mask and moments.
#[wasm_bindgen]
pub fn grow_region(
    width: usize,
    height: usize,
    pixels: &[u8],
    seed_x: usize,
    seed_y: usize,
    tolerance: u8,
) -> Result<String, JsError> {
    let frame = Frame::new(width, height, pixels.to_vec()).map_err(js_err)?;
    let mask = region_grow(&frame, (seed_x, seed_y), tolerance, 0).map_err(js_err)?;
    let stats = region_stats(&mask).map_err(js_err)?;
    let grid = (0..width * height)
        .map(|i| u8::from(mask.contains(i % width, i / width)))
        .collect();
    Ok(to_json(&Grown {
        mask: grid,
        stats: stats.into(),
    }))
}

#[derive(Serialize)]
struct Trajectory {
    raw: Vec<[f64; 2]>,
    resampled: Vec<[f64; 2]>,
}

fn points(m: &FeatureMatrix) -> Vec<[f64; 2]> {
    m.columns().map(|c| [c[0], c[1]]).collect()
}

/// One synthetic performance of `sign_code`: the per-frame normalized
/// positions and their resampling to the fixed length.
#[wasm_bindgen]
pub fn synthetic_trajectory(sign_code: u32, subject: u32, repetition: u32) -> Result<String, JsError> {
    if sign_code == 0 || sign_code as usize > NUM_PROTOTYPES || subject == 0 || repetition == 0 {
        return Err(JsError::new("sign code must be 1-20; subject and repetition start at 1"));
    }
    let spec = GenSpec {
        num_subjects: subject,
        reps_per_subject: repetition,
        ..GenSpec::default()
    };
    let stats = sample_stats(&spec, sign_code, subject, repetition);
    let raw = assemble(&stats, spec.frame_width, spec.frame_height, FeatureSet::Trajectory).map_err(js_err)?;
    let resampled = interpolate(&raw, LENGTH).map_err(js_err)?;
    Ok(to_json(&Trajectory {
        raw: points(&raw),
        resampled: points(&resampled),
    }))
}

/// Noise-free path of a prototype, sampled at `n` evenly spaced points.
#[wasm_bindgen]
pub fn prototype_path(sign_code: u32, n: usize) -> Result<String, JsError> {
    if sign_code == 0 || sign_code as usize > NUM_PROTOTYPES || n < 2 {
        return Err(JsError::new("sign code must be 1-20 and n at least 2"));
    }
    let p = Prototype::for_class(sign_code);
    let path: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let (x, y) = p.point(i as f64 / (n - 1) as f64);
            [x, y]
        })
        .collect();
    Ok(to_json(&path))
}

#[derive(Serialize)]
struct Ranked {
    sign_code: u32,
    loglik: f64,
}

/// A trajectory-only model bank trained on a small synthetic corpus.
#[wasm_bindgen]
pub struct Recognizer {
    bank: ModelBank,
}

#[wasm_bindgen]
impl Recognizer {
    /// Trains one HMM per sign on `subjects` x 2 synthetic performances.
    #[wasm_bindgen(constructor)]
    pub fn new(num_classes: u32, subjects: u32, states: usize, seed: u64) -> Result<Recognizer, JsError> {
        let spec = GenSpec {
            num_classes,
            num_subjects: subjects,
            reps_per_subject: 2,
            feature_set: FeatureSet::Trajectory,
            seed,
            ..GenSpec::default()
        };
        let samples = generate_samples(&spec).map_err(js_err)?;
        let config = TrainConfig {
            num_states: states,
            num_mixtures: 1,
            max_iterations: 50,
            seed,
            ..TrainConfig::default()
        };
        let bank = train_bank(&samples, &config).map_err(js_err)?;
        Ok(Recognizer { bank })
    }

    #[wasm_bindgen(getter)]
    pub fn classes(&self) -> usize {
        self.bank.len()
    }

    /// Classifies flat `[x0, y0, x1, y1, ...]` coordinates in `[0, 1]`
    /// (y down). Returns signs ranked by log-likelihood.
    pub fn classify(&self, xy: &[f64]) -> Result<String, JsError> {
        if xy.len() % 2 != 0 || xy.len() < 4 {
            return Err(JsError::new("need at least two (x, y) points"));
        }
        let xs: Vec<f64> = xy.iter().step_by(2).copied().collect();
        let ys: Vec<f64> = xy.iter().skip(1).step_by(2).copied().collect();
        let raw = FeatureMatrix::from_rows(&[xs, ys]).map_err(js_err)?;
        let obs = interpolate(&raw, LENGTH).map_err(js_err)?;
        let c = classify(&self.bank, &obs).map_err(js_err)?;
        let mut ranked: Vec<Ranked> = self
            .bank
            .codes()
            .into_iter()
            .zip(c.logliks)
            .map(|(sign_code, loglik)| Ranked { sign_code, loglik })
            .collect();
        // stable sort keeps the lowest code first among ties, matching classify
        ranked.sort_by(|a, b| b.loglik.total_cmp(&a.loglik));
        Ok(to_json(&ranked))
    }
}
