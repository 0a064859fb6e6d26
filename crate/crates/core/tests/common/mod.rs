//! Independent reference implementations used as test oracles. None of
//! these call into the library's numerics.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use trajsign::gmm::{Gaussian, Gmm};
use trajsign::imaging::Frame;
use trajsign::{FeatureMatrix, Hmm};

/// Row-stochastic vector with entries bounded away from zero.
pub fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Random SPD matrix `B Bᵀ + 0.1 I`, row-major.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let b: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            c[i * d + j] = (0..d).map(|k| b[i * d + k] * b[j * d + k]).sum::<f64>()
                + if i == j { 0.1 } else { 0.0 };
        }
    }
    c
}

pub fn random_gmm(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Gmm {
    let comps = (0..m)
        .map(|_| {
            let mean = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            Gaussian::new(mean, random_spd(rng, d)).unwrap()
        })
        .collect();
    Gmm::new(random_simplex(rng, m), comps).unwrap()
}

pub fn random_hmm(rng: &mut ChaCha8Rng, q: usize, m: usize, d: usize) -> Hmm {
    let initial = random_simplex(rng, q);
    let transitions: Vec<f64> = (0..q).flat_map(|_| random_simplex(rng, q)).collect();
    let emissions = (0..q).map(|_| random_gmm(rng, m, d)).collect();
    Hmm::new(initial, transitions, emissions).unwrap()
}

pub fn random_obs(rng: &mut ChaCha8Rng, d: usize, t: usize) -> FeatureMatrix {
    let cols: Vec<Vec<f64>> = (0..t)
        .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    FeatureMatrix::from_columns(&cols).unwrap()
}

/// Determinant and inverse by Gauss-Jordan elimination with partial pivoting.
pub fn det_inverse(a: &[f64], d: usize) -> (f64, Vec<f64>) {
    let mut m = a.to_vec();
    let mut inv: Vec<f64> = (0..d * d)
        .map(|k| if k % (d + 1) == 0 { 1.0 } else { 0.0 })
        .collect();
    let mut det = 1.0;
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&x, &y| m[x * d + col].abs().total_cmp(&m[y * d + col].abs()))
            .unwrap();
        if pivot != col {
            for k in 0..d {
                m.swap(pivot * d + k, col * d + k);
                inv.swap(pivot * d + k, col * d + k);
            }
            det = -det;
        }
        let p = m[col * d + col];
        det *= p;
        for k in 0..d {
            m[col * d + k] /= p;
            inv[col * d + k] /= p;
        }
        for r in 0..d {
            if r != col {
                let f = m[r * d + col];
                for k in 0..d {
                    m[r * d + k] -= f * m[col * d + k];
                    inv[r * d + k] -= f * inv[col * d + k];
                }
            }
        }
    }
    (det, inv)
}

/// Gaussian density from the explicit inverse and determinant.
pub fn naive_gauss_pdf(x: &[f64], mean: &[f64], cov: &[f64]) -> f64 {
    let d = mean.len();
    let (det, inv) = det_inverse(cov, d);
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let mut quad = 0.0;
    for i in 0..d {
        for j in 0..d {
            quad += diff[i] * inv[i * d + j] * diff[j];
        }
    }
    (-0.5 * quad).exp() / ((2.0 * PI).powi(d as i32) * det).sqrt()
}

pub fn naive_mixture_pdf(x: &[f64], g: &Gmm) -> f64 {
    g.weights()
        .iter()
        .zip(g.components())
        .map(|(w, c)| w * naive_gauss_pdf(x, c.mean(), c.covariance()))
        .sum()
}

/// Every state path of length `t` over `q` states.
pub fn all_paths(q: usize, t: usize) -> Vec<Vec<usize>> {
    let total = q.pow(t as u32);
    (0..total)
        .map(|mut code| {
            (0..t)
                .map(|_| {
                    let s = code % q;
                    code /= q;
                    s
                })
                .collect()
        })
        .collect()
}

/// Joint log-probability of a state path and the observations.
pub fn path_log_prob(model: &Hmm, obs: &FeatureMatrix, path: &[usize]) -> f64 {
    let q = model.num_states();
    let mut lp = model.initial()[path[0]].ln();
    for t in 0..path.len() {
        if t > 0 {
            lp += model.transitions()[path[t - 1] * q + path[t]].ln();
        }
        lp += naive_mixture_pdf(obs.column(t), &model.emissions()[path[t]]).ln();
    }
    lp
}

pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log P(obs)` by summing over all `q^T` state paths.
pub fn brute_force_loglik(model: &Hmm, obs: &FeatureMatrix) -> f64 {
    let lps: Vec<f64> = all_paths(model.num_states(), obs.len())
        .iter()
        .map(|p| path_log_prob(model, obs, p))
        .collect();
    log_sum_exp(&lps)
}

/// State posteriors `P(q_t = j | obs)` by path enumeration, `[t][j]`.
pub fn brute_force_gamma(model: &Hmm, obs: &FeatureMatrix) -> Vec<Vec<f64>> {
    let q = model.num_states();
    let paths = all_paths(q, obs.len());
    let lps: Vec<f64> = paths.iter().map(|p| path_log_prob(model, obs, p)).collect();
    let total = log_sum_exp(&lps);
    let mut gamma = vec![vec![0.0; q]; obs.len()];
    for (p, lp) in paths.iter().zip(&lps) {
        let w = (lp - total).exp();
        for (t, &s) in p.iter().enumerate() {
            gamma[t][s] += w;
        }
    }
    gamma
}

/// Breadth-first 8-connected flood fill from `seed` over pixels within
/// `tolerance` of the seed intensity; returns a membership grid.
pub fn flood_fill(frame: &Frame, seed: (usize, usize), tolerance: u8) -> Vec<bool> {
    let (w, h) = (frame.width(), frame.height());
    let target = i32::from(frame.get(seed.0, seed.1));
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::from([seed]);
    seen[seed.1 * w + seed.0] = true;
    while let Some((x, y)) = queue.pop_front() {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if !seen[ny * w + nx]
                    && (i32::from(frame.get(nx, ny)) - target).abs() <= i32::from(tolerance)
                {
                    seen[ny * w + nx] = true;
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    seen
}

/// Random binary image with values 0/255 and density `p`.
pub fn random_binary(rng: &mut ChaCha8Rng, w: usize, h: usize, p: f64) -> Frame {
    let pixels = (0..w * h)
        .map(|_| if rng.random_bool(p) { 255 } else { 0 })
        .collect();
    Frame::new(w, h, pixels).unwrap()
}

/// Composite trapezoid rule over `[a, b]` with `n` points.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / (n - 1) as f64;
    let inner: f64 = (1..n - 1).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

/// Equivalent-ellipse eccentricity straight from member coordinates.
pub fn moment_eccentricity(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mu20 = points.iter().map(|p| (p.0 - cx).powi(2)).sum::<f64>() / n + 1.0 / 12.0;
    let mu02 = points.iter().map(|p| (p.1 - cy).powi(2)).sum::<f64>() / n + 1.0 / 12.0;
    let mu11 = points.iter().map(|p| (p.0 - cx) * (p.1 - cy)).sum::<f64>() / n;
    let common = ((mu20 - mu02).powi(2) + 4.0 * mu11 * mu11).sqrt();
    let major = (mu20 + mu02 + common) / 2.0;
    let minor = (mu20 + mu02 - common) / 2.0;
    (1.0 - minor / major).sqrt()
}
