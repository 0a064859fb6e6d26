//! Continuous-emission hidden Markov models: scaled forward-backward
//! evaluation and multi-sequence Baum-Welch training.
//!
//! Emission densities are evaluated in log space and shifted by their
//! per-step maximum before entering the scaled recursions, so sequences of
//! any length stay finite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::gmm::{self, CovarianceKind, EmSettings, Gaussian, Gmm};

const STOCHASTIC_TOLERANCE: f64 = 1e-10;

/// `lambda = (initial, transitions, emissions)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hmm {
    initial: Vec<f64>,
    /// Row-major `q x q`, rows sum to one.
    transitions: Vec<f64>,
    emissions: Vec<Gmm>,
}

fn check_distribution(what: &str, p: &[f64]) -> Result<()> {
    if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "{what} has negative or non-finite entries"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOLERANCE {
        return Err(Error::InvalidModel(format!("{what} sums to {total}")));
    }
    Ok(())
}

impl Hmm {
    pub fn new(initial: Vec<f64>, transitions: Vec<f64>, emissions: Vec<Gmm>) -> Result<Self> {
        let q = initial.len();
        if q == 0 {
            return Err(Error::InvalidModel("model needs at least one state".into()));
        }
        if transitions.len() != q * q {
            return Err(Error::DimensionMismatch {
                expected: q * q,
                found: transitions.len(),
            });
        }
        if emissions.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: emissions.len(),
            });
        }
        let d = emissions[0].dims();
        if let Some(e) = emissions.iter().find(|e| e.dims() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: e.dims(),
            });
        }
        check_distribution("initial distribution", &initial)?;
        for (i, row) in transitions.chunks_exact(q).enumerate() {
            check_distribution(&format!("transition row {i}"), row)?;
        }
        Ok(Self {
            initial,
            transitions,
            emissions,
        })
    }

    pub fn num_states(&self) -> usize {
        self.initial.len()
    }

    /// Observation dimension.
    pub fn dims(&self) -> usize {
        self.emissions[0].dims()
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    #[inline]
    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transitions[from * self.num_states() + to]
    }

    pub fn emissions(&self) -> &[Gmm] {
        &self.emissions
    }

    /// Relabels states: new state `i` is old state `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let q = self.num_states();
        let mut seen = vec![false; q];
        if perm.len() != q
            || perm
                .iter()
                .any(|&p| p >= q || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidConfig(
                "not a permutation of the states".into(),
            ));
        }
        let initial = perm.iter().map(|&p| self.initial[p]).collect();
        let mut transitions = Vec::with_capacity(q * q);
        for &pi in perm {
            for &pj in perm {
                transitions.push(self.transition(pi, pj));
            }
        }
        let emissions = perm.iter().map(|&p| self.emissions[p].clone()).collect();
        Self::new(initial, transitions, emissions)
    }

    /// Draws a state path and observation sequence of length `len`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        len: usize,
        rng: &mut R,
    ) -> Result<(Vec<usize>, FeatureMatrix)> {
        let q = self.num_states();
        let mut states = Vec::with_capacity(len);
        let mut columns = Vec::with_capacity(len);
        let mut s = gmm::sample_categorical(&self.initial, rng);
        for t in 0..len {
            if t > 0 {
                s = gmm::sample_categorical(&self.transitions[s * q..(s + 1) * q], rng);
            }
            states.push(s);
            columns.push(self.emissions[s].sample(rng));
        }
        Ok((states, FeatureMatrix::from_columns(&columns)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Topology {
    /// Every state reachable from every state; random initial parameters.
    #[default]
    Ergodic,
    /// Each state either stays or advances to the next one.
    LeftRight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub num_states: usize,
    pub num_mixtures: usize,
    pub max_iterations: usize,
    /// Stop once `|dLL| / (|LL| + 1)` falls below this.
    pub rel_tolerance: f64,
    pub seed: u64,
    pub topology: Topology,
    pub covariance: CovarianceKind,
    pub variance_floor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_states: 12,
            num_mixtures: 3,
            max_iterations: 100,
            rel_tolerance: 1e-6,
            seed: 0,
            topology: Topology::Ergodic,
            covariance: CovarianceKind::Full,
            variance_floor: gmm::VARIANCE_FLOOR,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_states == 0 {
            return Err(Error::InvalidConfig("num_states must be at least 1".into()));
        }
        if self.num_mixtures == 0 {
            return Err(Error::InvalidConfig(
                "num_mixtures must be at least 1".into(),
            ));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::InvalidConfig(
                "rel_tolerance must be positive".into(),
            ));
        }
        if !(self.variance_floor > 0.0) {
            return Err(Error::InvalidConfig(
                "variance_floor must be positive".into(),
            ));
        }
        Ok(())
    }

    fn em_settings(&self) -> EmSettings {
        EmSettings {
            covariance: self.covariance,
            variance_floor: self.variance_floor,
        }
    }
}

/// State posteriors of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorStats {
    states: usize,
    len: usize,
    gamma: Vec<f64>,
    xi: Vec<f64>,
    pub loglik: f64,
}

impl PosteriorStats {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `P(state_t = j | obs)` for every `j`.
    pub fn gamma(&self, t: usize) -> &[f64] {
        &self.gamma[t * self.states..(t + 1) * self.states]
    }

    /// Row-major `q x q` matrix of `P(state_t = i, state_{t+1} = j | obs)`,
    /// for `t < len - 1`.
    pub fn xi(&self, t: usize) -> &[f64] {
        let qq = self.states * self.states;
        &self.xi[t * qq..(t + 1) * qq]
    }
}

fn check_obs(model: &Hmm, obs: &FeatureMatrix) -> Result<()> {
    if obs.dims() != model.dims() {
        return Err(Error::DimensionMismatch {
            expected: model.dims(),
            found: obs.dims(),
        });
    }
    if obs.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(())
}

/// Emission likelihoods of a sequence, max-shifted per time step.
struct Emissions {
    /// `b_j(x_t) / exp(shift_t)`, row-major `T x q`.
    scaled: Vec<f64>,
    shift: Vec<f64>,
    /// `ln b_j(x_t)`, row-major `T x q`.
    log_b: Vec<f64>,
    /// `ln c_jk + ln N_jk(x_t)`, row-major `T x q x M`; empty unless requested.
    log_terms: Vec<f64>,
}

fn emissions(model: &Hmm, obs: &FeatureMatrix, keep_terms: bool) -> Emissions {
    let q = model.num_states();
    let t_len = obs.len();
    let m = model
        .emissions
        .iter()
        .map(|e| e.num_components())
        .max()
        .unwrap_or(1);
    let mut log_b = vec![0.0; t_len * q];
    let mut log_terms = if keep_terms {
        vec![f64::NEG_INFINITY; t_len * q * m]
    } else {
        Vec::new()
    };
    let mut buf = vec![0.0; m];
    for t in 0..t_len {
        let x = obs.column(t);
        for (j, e) in model.emissions.iter().enumerate() {
            log_b[t * q + j] = if keep_terms {
                let base = (t * q + j) * m;
                let terms = &mut log_terms[base..base + e.num_components()];
                e.log_terms(x, terms)
            } else if e.num_components() == 1 {
                e.components()[0].log_pdf(x)
            } else {
                e.log_terms(x, &mut buf[..e.num_components()])
            };
        }
    }
    let mut scaled = vec![0.0; t_len * q];
    let mut shift = vec![0.0; t_len];
    for t in 0..t_len {
        let row = &log_b[t * q..(t + 1) * q];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        shift[t] = max;
        for j in 0..q {
            scaled[t * q + j] = if max.is_finite() {
                (row[j] - max).exp()
            } else {
                0.0
            };
        }
    }
    Emissions {
        scaled,
        shift,
        log_b,
        log_terms,
    }
}

/// Normalized forward variables and per-step scale factors.
struct Forward {
    alpha: Vec<f64>,
    scale: Vec<f64>,
    loglik: f64,
}

fn forward(model: &Hmm, em: &Emissions, t_len: usize) -> Forward {
    let q = model.num_states();
    let a = &model.transitions;
    let mut alpha = vec![0.0; t_len * q];
    let mut scale = vec![0.0; t_len];
    let mut loglik = 0.0;
    for t in 0..t_len {
        let b = &em.scaled[t * q..(t + 1) * q];
        let (prev, cur) = alpha.split_at_mut(t * q);
        let cur = &mut cur[..q];
        if t == 0 {
            for j in 0..q {
                cur[j] = model.initial[j] * b[j];
            }
        } else {
            let prev = &prev[(t - 1) * q..];
            cur.fill(0.0);
            for (i, &p) in prev.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (c, &aij) in cur.iter_mut().zip(&a[i * q..(i + 1) * q]) {
                    *c += p * aij;
                }
            }
            for j in 0..q {
                cur[j] *= b[j];
            }
        }
        let c: f64 = cur.iter().sum();
        scale[t] = c;
        if !(c > 0.0) || !c.is_finite() {
            return Forward {
                alpha,
                scale,
                loglik: f64::NEG_INFINITY,
            };
        }
        cur.iter_mut().for_each(|v| *v /= c);
        loglik += c.ln() + em.shift[t];
    }
    Forward {
        alpha,
        scale,
        loglik,
    }
}

/// `ln P(obs | model)` by the scaled forward recursion.
pub fn forward_log(model: &Hmm, obs: &FeatureMatrix) -> Result<f64> {
    check_obs(model, obs)?;
    let em = emissions(model, obs, false);
    Ok(forward(model, &em, obs.len()).loglik)
}

fn posterior_from(model: &Hmm, em: &Emissions, t_len: usize) -> PosteriorStats {
    let q = model.num_states();
    let fw = forward(model, em, t_len);
    let mut gamma = vec![0.0; t_len * q];
    let mut xi = vec![0.0; t_len.saturating_sub(1) * q * q];
    if !fw.loglik.is_finite() {
        return PosteriorStats {
            states: q,
            len: t_len,
            gamma,
            xi,
            loglik: fw.loglik,
        };
    }
    let a = &model.transitions;
    let mut beta = vec![1.0; q];
    let mut next_beta = vec![0.0; q];
    let mut weighted = vec![0.0; q];
    for t in (0..t_len).rev() {
        let alpha_t = &fw.alpha[t * q..(t + 1) * q];
        let g = &mut gamma[t * q..(t + 1) * q];
        let mut total = 0.0;
        for j in 0..q {
            g[j] = alpha_t[j] * beta[j];
            total += g[j];
        }
        g.iter_mut().for_each(|v| *v /= total);
        if t == 0 {
            break;
        }
        // beta_{t-1}(i) = sum_j a_ij b_j(x_t) beta_t(j) / c_t, and
        // xi_{t-1}(i, j) = alpha_{t-1}(i) a_ij b_j(x_t) beta_t(j) / c_t
        let b = &em.scaled[t * q..(t + 1) * q];
        let c = fw.scale[t];
        for j in 0..q {
            weighted[j] = b[j] * beta[j] / c;
        }
        let alpha_prev = &fw.alpha[(t - 1) * q..t * q];
        let xi_t = &mut xi[(t - 1) * q * q..t * q * q];
        let mut xi_total = 0.0;
        for i in 0..q {
            let row = &a[i * q..(i + 1) * q];
            let mut acc = 0.0;
            for j in 0..q {
                let v = row[j] * weighted[j];
                acc += v;
                let x = alpha_prev[i] * v;
                xi_t[i * q + j] = x;
                xi_total += x;
            }
            next_beta[i] = acc;
        }
        if xi_total > 0.0 {
            xi_t.iter_mut().for_each(|v| *v /= xi_total);
        }
        std::mem::swap(&mut beta, &mut next_beta);
    }
    PosteriorStats {
        states: q,
        len: t_len,
        gamma,
        xi,
        loglik: fw.loglik,
    }
}

/// State posteriors `gamma`, pair posteriors `xi` and the log-likelihood.
pub fn forward_backward(model: &Hmm, obs: &FeatureMatrix) -> Result<PosteriorStats> {
    check_obs(model, obs)?;
    let em = emissions(model, obs, false);
    Ok(posterior_from(model, &em, obs.len()))
}

fn check_samples(samples: &[FeatureMatrix]) -> Result<usize> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InsufficientSamples("training needs at least one sequence".into()))?;
    let d = first.dims();
    for s in samples {
        if s.dims() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dims(),
            });
        }
        if s.is_empty() {
            return Err(Error::EmptySequence);
        }
    }
    Ok(d)
}

fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    // symmetric Dirichlet(1) via normalized unit exponentials
    let draws: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE))
        .collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|v| v / total).collect()
}

fn init_with_rng(
    samples: &[FeatureMatrix],
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Hmm> {
    config.validate()?;
    check_samples(samples)?;
    let q = config.num_states;
    let m = config.num_mixtures;

    let (initial, transitions) = match config.topology {
        Topology::Ergodic => {
            let initial = random_distribution(q, rng);
            let transitions = (0..q).flat_map(|_| random_distribution(q, rng)).collect();
            (initial, transitions)
        }
        Topology::LeftRight => {
            let mut initial = vec![0.0; q];
            initial[0] = 1.0;
            let mut transitions = vec![0.0; q * q];
            for i in 0..q {
                if i + 1 < q {
                    transitions[i * q + i] = 0.5;
                    transitions[i * q + i + 1] = 0.5;
                } else {
                    transitions[i * q + i] = 1.0;
                }
            }
            (initial, transitions)
        }
    };

    let all: Vec<&[f64]> = samples.iter().flat_map(|s| s.columns()).collect();
    let global = gmm::global_covariance(&all, config.covariance);
    let mut emissions = Vec::with_capacity(q);
    for j in 0..q {
        let mut components = Vec::with_capacity(m);
        for _ in 0..m {
            let seq = &samples[rng.random_range(0..samples.len())];
            let t = match config.topology {
                Topology::Ergodic => rng.random_range(0..seq.len()),
                Topology::LeftRight => {
                    // draw from the slice of time this state is meant to cover
                    let lo = j * seq.len() / q;
                    let hi = ((j + 1) * seq.len() / q).max(lo + 1).min(seq.len());
                    rng.random_range(lo.min(seq.len() - 1)..hi)
                }
            };
            components.push(Gaussian::with_floor(
                seq.column(t).to_vec(),
                global.clone(),
                config.variance_floor,
            )?);
        }
        emissions.push(Gmm::new(vec![1.0 / m as f64; m], components)?);
    }
    Hmm::new(initial, transitions, emissions)
}

/// Initial model for Baum-Welch, deterministic in `config.seed`.
pub fn init_model(samples: &[FeatureMatrix], config: &TrainConfig) -> Result<Hmm> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_with_rng(samples, config, &mut rng)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Hmm,
    /// Total training log-likelihood before each re-estimation; the last
    /// entry belongs to `model`.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// Number of mixture components re-seeded over the run.
    pub resets: usize,
}

/// Sufficient statistics of one sequence under the current model.
struct SequenceStats {
    loglik: f64,
    gamma0: Vec<f64>,
    xi_sum: Vec<f64>,
    /// Per time, state and component: `gamma_t(j) * P(component k | state j, x_t)`.
    resp: Vec<f64>,
}

fn sequence_stats(model: &Hmm, obs: &FeatureMatrix, m: usize) -> SequenceStats {
    let q = model.num_states();
    let t_len = obs.len();
    let em = emissions(model, obs, true);
    let post = posterior_from(model, &em, t_len);
    let mut xi_sum = vec![0.0; q * q];
    for t in 0..t_len.saturating_sub(1) {
        for (acc, v) in xi_sum.iter_mut().zip(post.xi(t)) {
            *acc += v;
        }
    }
    let mut resp = vec![0.0; t_len * q * m];
    for t in 0..t_len {
        let g = post.gamma(t);
        for j in 0..q {
            let lb = em.log_b[t * q + j];
            let base = (t * q + j) * m;
            for k in 0..m {
                let term = em.log_terms[base + k];
                resp[base + k] = if term == f64::NEG_INFINITY {
                    0.0
                } else {
                    g[j] * (term - lb).exp()
                };
            }
        }
    }
    SequenceStats {
        loglik: post.loglik,
        gamma0: post.gamma(0).to_vec(),
        xi_sum,
        resp,
    }
}

fn e_step(model: &Hmm, samples: &[FeatureMatrix], m: usize) -> Vec<SequenceStats> {
    #[cfg(feature = "parallel")]
    {
        samples
            .par_iter()
            .map(|s| sequence_stats(model, s, m))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        samples
            .iter()
            .map(|s| sequence_stats(model, s, m))
            .collect()
    }
}

fn m_step(
    model: &Hmm,
    stats: &[SequenceStats],
    points: &[&[f64]],
    m: usize,
    settings: &EmSettings,
    rng: &mut ChaCha8Rng,
) -> Result<(Hmm, usize)> {
    let q = model.num_states();
    let n_seq = stats.len() as f64;

    let mut initial = vec![0.0; q];
    for s in stats {
        for (acc, g) in initial.iter_mut().zip(&s.gamma0) {
            *acc += g;
        }
    }
    initial.iter_mut().for_each(|v| *v /= n_seq);
    let init_total: f64 = initial.iter().sum();
    initial.iter_mut().for_each(|v| *v /= init_total);

    let mut xi_sum = vec![0.0; q * q];
    for s in stats {
        for (acc, v) in xi_sum.iter_mut().zip(&s.xi_sum) {
            *acc += v;
        }
    }
    let mut transitions = Vec::with_capacity(q * q);
    for i in 0..q {
        let row = &xi_sum[i * q..(i + 1) * q];
        let total: f64 = row.iter().sum();
        if total > f64::MIN_POSITIVE {
            transitions.extend(row.iter().map(|v| v / total));
        } else {
            // state never left in the data: keep its previous row
            transitions.extend_from_slice(&model.transitions[i * q..(i + 1) * q]);
        }
    }

    let mut emissions = Vec::with_capacity(q);
    let mut resets = 0;
    let mut resp = Vec::with_capacity(points.len() * m);
    for j in 0..q {
        resp.clear();
        for s in stats {
            let t_len = s.resp.len() / (q * m);
            for t in 0..t_len {
                let base = (t * q + j) * m;
                resp.extend_from_slice(&s.resp[base..base + m]);
            }
        }
        let update =
            gmm::weighted_em_update_or_reset(points, &resp, &model.emissions[j], settings, rng)?;
        resets += update.reset.len();
        emissions.push(update.gmm);
    }
    Ok((Hmm::new(initial, transitions, emissions)?, resets))
}

/// Multi-sequence Baum-Welch from a freshly initialized model.
pub fn baum_welch(samples: &[FeatureMatrix], config: &TrainConfig) -> Result<TrainOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let model = init_with_rng(samples, config, &mut rng)?;
    run_em(model, samples, config, &mut rng)
}

/// Multi-sequence Baum-Welch starting from `model`.
pub fn baum_welch_from(
    model: Hmm,
    samples: &[FeatureMatrix],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let d = check_samples(samples)?;
    if d != model.dims() {
        return Err(Error::DimensionMismatch {
            expected: model.dims(),
            found: d,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run_em(model, samples, config, &mut rng)
}

fn run_em(
    mut model: Hmm,
    samples: &[FeatureMatrix],
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainOutcome> {
    let m = model
        .emissions
        .iter()
        .map(|e| e.num_components())
        .max()
        .unwrap_or(1);
    if model.emissions.iter().any(|e| e.num_components() != m) {
        return Err(Error::InvalidModel(
            "all states need the same number of mixture components".into(),
        ));
    }
    let points: Vec<&[f64]> = samples.iter().flat_map(|s| s.columns()).collect();
    let settings = config.em_settings();
    let mut trace: Vec<f64> = Vec::new();
    let mut resets = 0;
    let mut converged = false;
    for iteration in 0..=config.max_iterations {
        let stats = e_step(&model, samples, m);
        let total: f64 = stats.iter().map(|s| s.loglik).sum();
        if !total.is_finite() {
            return Err(Error::TrainingDiverged { iteration });
        }
        if let Some(&prev) = trace.last() {
            let rel = (total - prev).abs() / (total.abs() + 1.0);
            trace.push(total);
            if rel < config.rel_tolerance {
                converged = true;
                break;
            }
        } else {
            trace.push(total);
        }
        if iteration == config.max_iterations {
            break;
        }
        let (next, n_reset) = m_step(&model, &stats, &points, m, &settings, rng)?;
        resets += n_reset;
        model = next;
    }
    log::debug!(
        "baum-welch: {} evaluations, converged={converged}, resets={resets}",
        trace.len()
    );
    Ok(TrainOutcome {
        model,
        trace,
        converged,
        resets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_model() -> Hmm {
        let g = |m: f64| Gmm::single(Gaussian::new(vec![m], vec![1.0]).unwrap());
        Hmm::new(
            vec![0.6, 0.4],
            vec![0.7, 0.3, 0.2, 0.8],
            vec![g(-1.0), g(2.0)],
        )
        .unwrap()
    }

    fn obs(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&[values.to_vec()]).unwrap()
    }

    #[test]
    fn single_state_is_sum_of_emissions() {
        let e = Gmm::single(Gaussian::new(vec![0.5], vec![2.0]).unwrap());
        let model = Hmm::new(vec![1.0], vec![1.0], vec![e.clone()]).unwrap();
        let x = obs(&[0.1, -0.4, 2.0, 1.3]);
        let expected: f64 = x.columns().map(|c| e.log_pdf(c)).sum();
        assert!((forward_log(&model, &x).unwrap() - expected).abs() < 1e-12);
        let post = forward_backward(&model, &x).unwrap();
        assert!((0..x.len()).all(|t| post.gamma(t) == [1.0]));
    }

    #[test]
    fn validation_rejects_bad_models() {
        let g = Gmm::single(Gaussian::new(vec![0.0], vec![1.0]).unwrap());
        assert!(Hmm::new(
            vec![0.5, 0.6],
            vec![1.0, 0.0, 0.0, 1.0],
            vec![g.clone(), g.clone()]
        )
        .is_err());
        assert!(Hmm::new(
            vec![0.5, 0.5],
            vec![0.9, 0.0, 0.0, 1.0],
            vec![g.clone(), g.clone()]
        )
        .is_err());
        assert!(Hmm::new(vec![1.0], vec![1.0], vec![]).is_err());
    }

    #[test]
    fn evaluation_errors() {
        let m = toy_model();
        let two_d = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(
            forward_log(&m, &two_d),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn loglik_agrees_between_passes() {
        let m = toy_model();
        let x = obs(&[0.3, -1.2, 2.2, 2.0, -0.5, 1.1]);
        let a = forward_log(&m, &x).unwrap();
        let b = forward_backward(&m, &x).unwrap();
        assert!((a - b.loglik).abs() < 1e-12);
        for t in 0..x.len() {
            assert!((b.gamma(t).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for t in 0..x.len() - 1 {
            let xi = b.xi(t);
            for i in 0..2 {
                assert!((xi[i * 2] + xi[i * 2 + 1] - b.gamma(t)[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn left_right_init_pattern() {
        let samples = vec![obs(&(0..20).map(|v| v as f64).collect::<Vec<_>>())];
        let config = TrainConfig {
            num_states: 4,
            num_mixtures: 2,
            topology: Topology::LeftRight,
            ..Default::default()
        };
        let m = init_model(&samples, &config).unwrap();
        assert_eq!(m.initial(), &[1.0, 0.0, 0.0, 0.0]);
        for i in 0..4 {
            for j in 0..4 {
                let allowed = j == i || j == i + 1;
                assert_eq!(m.transition(i, j) > 0.0, allowed, "({i},{j})");
            }
        }
    }

    #[test]
    fn ergodic_init_is_dense_and_seeded() {
        let samples = vec![obs(&[0.0, 1.0, 2.0, 3.0, 5.0])];
        let config = TrainConfig {
            num_states: 5,
            num_mixtures: 2,
            seed: 17,
            ..Default::default()
        };
        let a = init_model(&samples, &config).unwrap();
        assert!(a.transitions().iter().all(|&v| v > 0.0));
        assert_eq!(a, init_model(&samples, &config).unwrap());
        let other = init_model(&samples, &TrainConfig { seed: 18, ..config }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn config_validation() {
        let samples = vec![obs(&[0.0, 1.0])];
        for bad in [
            TrainConfig {
                num_states: 0,
                ..Default::default()
            },
            TrainConfig {
                num_mixtures: 0,
                ..Default::default()
            },
            TrainConfig {
                rel_tolerance: 0.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                baum_welch(&samples, &bad),
                Err(Error::InvalidConfig(_))
            ));
        }
        assert!(baum_welch(&[], &TrainConfig::default()).is_err());
    }

    #[test]
    fn permutation_checks() {
        let m = toy_model();
        assert!(m.permuted(&[0, 0]).is_err());
        let p = m.permuted(&[1, 0]).unwrap();
        assert_eq!(p.initial(), &[0.4, 0.6]);
        assert_eq!(p.transition(0, 0), 0.8);
    }
}
