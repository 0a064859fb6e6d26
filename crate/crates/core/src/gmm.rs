//! Multivariate Gaussian and Gaussian-mixture densities with weighted EM
//! updates, used as per-state HMM emissions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Smallest eigenvalue any stored covariance may have.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Total responsibility below which a mixture component counts as dead.
pub const DEGENERATE_MASS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceKind {
    #[default]
    Full,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmSettings {
    pub covariance: CovarianceKind,
    pub variance_floor: f64,
}

impl Default for EmSettings {
    fn default() -> Self {
        Self {
            covariance: CovarianceKind::Full,
            variance_floor: VARIANCE_FLOOR,
        }
    }
}

/// A multivariate normal with a cached Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: Vec<f64>,
    /// Row-major `d x d`.
    cov: Vec<f64>,
    /// Lower Cholesky factor, row-major `d x d`.
    chol: Vec<f64>,
    /// `-(d ln 2pi + ln det cov) / 2`
    log_norm: f64,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        Self::with_floor(mean, cov, VARIANCE_FLOOR)
    }

    /// Builds the density after symmetrizing `cov` and lifting any
    /// eigenvalue below `floor` up to it.
    pub fn with_floor(mean: Vec<f64>, cov: Vec<f64>, floor: f64) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if cov.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: cov.len(),
            });
        }
        if mean.iter().chain(&cov).any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        let cov = floor_covariance(cov, d, floor);
        let (chol, cov) = match cholesky(&cov, d) {
            Some(l) => (l, cov),
            None => {
                let mut lifted = cov;
                for i in 0..d {
                    lifted[i * d + i] += floor;
                }
                (
                    cholesky(&lifted, d).ok_or(Error::NotPositiveDefinite)?,
                    lifted,
                )
            }
        };
        let log_det: f64 = (0..d).map(|i| chol[i * d + i].ln()).sum::<f64>() * 2.0;
        let log_norm = -0.5 * (d as f64 * (2.0 * PI).ln() + log_det);
        Ok(Self {
            mean,
            cov,
            chol,
            log_norm,
        })
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major covariance.
    pub fn covariance(&self) -> &[f64] {
        &self.cov
    }

    /// Draws one vector as `mean + L z` with standard normal `z`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.mean.len();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        (0..d)
            .map(|i| self.mean[i] + (0..=i).map(|k| self.chol[i * d + k] * z[k]).sum::<f64>())
            .collect()
    }

    /// Log density at `x`; `x` must have the Gaussian's dimension.
    #[inline]
    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        debug_assert_eq!(x.len(), d);
        // forward substitution L z = x - mean, accumulating |z|^2
        let mut z = [0.0f64; 8];
        let mut heap;
        let z: &mut [f64] = if d <= 8 {
            &mut z[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut quad = 0.0;
        for i in 0..d {
            let row = &self.chol[i * d..i * d + i + 1];
            let mut s = x[i] - self.mean[i];
            for k in 0..i {
                s -= row[k] * z[k];
            }
            let zi = s / row[i];
            z[i] = zi;
            quad += zi * zi;
        }
        self.log_norm - 0.5 * quad
    }
}

/// Symmetrizes `cov` and, when its smallest eigenvalue is below `floor`,
/// clips the spectrum at `floor`.
///
/// Clipping eigenvalues is the maximum-likelihood covariance under the
/// constraint `lambda_min >= floor`, so EM stays monotone under the floor.
pub(crate) fn floor_covariance(mut cov: Vec<f64>, d: usize, floor: f64) -> Vec<f64> {
    for i in 0..d {
        for j in i + 1..d {
            let avg = 0.5 * (cov[i * d + j] + cov[j * d + i]);
            cov[i * d + j] = avg;
            cov[j * d + i] = avg;
        }
    }
    // every eigenvalue is at most d * max|c_ij|, so the clipped spectrum is flat
    let scale = cov.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale * d as f64 <= floor {
        return (0..d * d)
            .map(|k| if k % (d + 1) == 0 { floor } else { 0.0 })
            .collect();
    }
    let m = DMatrix::from_row_slice(d, d, &cov) / scale;
    let mut eig = SymmetricEigen::new(m);
    eig.eigenvalues *= scale;
    if eig.eigenvalues.iter().all(|&l| l >= floor) {
        return cov;
    }
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    let v = &eig.eigenvectors;
    let rebuilt = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = 0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)]);
        }
    }
    out
}

fn cholesky(cov: &[f64], d: usize) -> Option<Vec<f64>> {
    let chol = DMatrix::from_row_slice(d, d, cov).cholesky()?;
    let l = chol.l();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            out[i * d + j] = l[(i, j)];
        }
    }
    if (0..d).any(|i| !(out[i * d + i] > 0.0) || !out[i * d + i].is_finite()) {
        return None;
    }
    Some(out)
}

/// Checked Gaussian log density.
pub fn gaussian_logpdf(x: &[f64], g: &Gaussian) -> Result<f64> {
    if x.len() != g.dims() {
        return Err(Error::DimensionMismatch {
            expected: g.dims(),
            found: x.len(),
        });
    }
    Ok(g.log_pdf(x))
}

/// A finite mixture of Gaussians sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Gmm {
    weights: Vec<f64>,
    components: Vec<Gaussian>,
}

impl Gmm {
    pub fn new(weights: Vec<f64>, components: Vec<Gaussian>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidModel(
                "mixture needs at least one component".into(),
            ));
        }
        if weights.len() != components.len() {
            return Err(Error::DimensionMismatch {
                expected: components.len(),
                found: weights.len(),
            });
        }
        let d = components[0].dims();
        if let Some(c) = components.iter().find(|c| c.dims() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.dims(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidModel(
                "mixture weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let weights = if (total - 1.0).abs() > 1e-12 {
            weights.into_iter().map(|w| w / total).collect()
        } else {
            weights
        };
        Ok(Self {
            weights,
            components,
        })
    }

    /// Single-component mixture.
    pub fn single(g: Gaussian) -> Self {
        Self {
            weights: vec![1.0],
            components: vec![g],
        }
    }

    pub fn dims(&self) -> usize {
        self.components[0].dims()
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Gaussian] {
        &self.components
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let k = sample_categorical(&self.weights, rng);
        self.components[k].sample(rng)
    }

    /// Writes `ln c_i + ln N_i(x)` into `terms` and returns their log-sum-exp.
    #[inline]
    pub fn log_terms(&self, x: &[f64], terms: &mut [f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for ((t, w), g) in terms.iter_mut().zip(&self.weights).zip(&self.components) {
            *t = if *w > 0.0 {
                w.ln() + g.log_pdf(x)
            } else {
                f64::NEG_INFINITY
            };
            max = max.max(*t);
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
        max + sum.ln()
    }

    #[inline]
    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let m = self.components.len();
        if m == 1 {
            return self.components[0].log_pdf(x);
        }
        let mut buf = [0.0f64; 16];
        if m <= buf.len() {
            self.log_terms(x, &mut buf[..m])
        } else {
            self.log_terms(x, &mut vec![0.0; m])
        }
    }
}

/// Index drawn with probability proportional to `weights`.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Checked mixture log density.
pub fn mixture_logpdf(x: &[f64], gmm: &Gmm) -> Result<f64> {
    if x.len() != gmm.dims() {
        return Err(Error::DimensionMismatch {
            expected: gmm.dims(),
            found: x.len(),
        });
    }
    Ok(gmm.log_pdf(x))
}

fn check_em_inputs(samples: &[&[f64]], responsibilities: &[f64], prior: &Gmm) -> Result<()> {
    let d = prior.dims();
    let m = prior.num_components();
    if samples.is_empty() {
        return Err(Error::InsufficientSamples(
            "weighted EM update needs samples".into(),
        ));
    }
    if let Some(s) = samples.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: s.len(),
        });
    }
    if responsibilities.len() != samples.len() * m {
        return Err(Error::DimensionMismatch {
            expected: samples.len() * m,
            found: responsibilities.len(),
        });
    }
    if responsibilities
        .iter()
        .any(|r| !(*r >= 0.0) || !r.is_finite())
    {
        return Err(Error::InvalidConfig(
            "responsibilities must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// Weighted mean and scatter of one component, or `None` if it has no mass.
fn weighted_moments(
    samples: &[&[f64]],
    responsibilities: &[f64],
    m: usize,
    k: usize,
    kind: CovarianceKind,
) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    let d = samples[0].len();
    let mass: f64 = (0..samples.len())
        .map(|n| responsibilities[n * m + k])
        .sum();
    if !(mass >= DEGENERATE_MASS) {
        return None;
    }
    let mut mean = vec![0.0; d];
    for (n, x) in samples.iter().enumerate() {
        let r = responsibilities[n * m + k];
        if r == 0.0 {
            continue;
        }
        for i in 0..d {
            mean[i] += r * x[i];
        }
    }
    mean.iter_mut().for_each(|v| *v /= mass);

    let mut cov = vec![0.0; d * d];
    let mut diff = vec![0.0; d];
    for (n, x) in samples.iter().enumerate() {
        let r = responsibilities[n * m + k];
        if r == 0.0 {
            continue;
        }
        for i in 0..d {
            diff[i] = x[i] - mean[i];
        }
        for i in 0..d {
            let ri = r * diff[i];
            for j in 0..=i {
                cov[i * d + j] += ri * diff[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[i * d + j] / mass;
            let v = if kind == CovarianceKind::Diagonal && i != j {
                0.0
            } else {
                v
            };
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    Some((mass, mean, cov))
}

/// Unweighted population covariance of `samples`.
pub fn global_covariance(samples: &[&[f64]], kind: CovarianceKind) -> Vec<f64> {
    let ones = vec![1.0; samples.len()];
    weighted_moments(samples, &ones, 1, 0, kind)
        .map(|(_, _, c)| c)
        .unwrap_or_else(|| {
            let d = samples.first().map_or(0, |s| s.len());
            vec![0.0; d * d]
        })
}

fn finish_update(masses: Vec<f64>, components: Vec<Gaussian>) -> Result<Gmm> {
    let total: f64 = masses.iter().sum();
    let weights = masses.iter().map(|m| m / total).collect();
    Gmm::new(weights, components)
}

/// Weighted maximum-likelihood re-estimation of a mixture.
///
/// `responsibilities` is row-major `samples.len() x M`; rows need not be
/// normalized. Fails with [`Error::DegenerateComponent`] on the first
/// component whose total responsibility is below [`DEGENERATE_MASS`].
pub fn weighted_em_update(
    samples: &[&[f64]],
    responsibilities: &[f64],
    prior: &Gmm,
    settings: &EmSettings,
) -> Result<Gmm> {
    check_em_inputs(samples, responsibilities, prior)?;
    let m = prior.num_components();
    let mut masses = Vec::with_capacity(m);
    let mut components = Vec::with_capacity(m);
    for k in 0..m {
        let (mass, mean, cov) =
            weighted_moments(samples, responsibilities, m, k, settings.covariance)
                .ok_or(Error::DegenerateComponent { component: k })?;
        masses.push(mass);
        components.push(Gaussian::with_floor(mean, cov, settings.variance_floor)?);
    }
    finish_update(masses, components)
}

/// Result of [`weighted_em_update_or_reset`].
#[derive(Debug, Clone)]
pub struct EmUpdate {
    pub gmm: Gmm,
    /// Components that had no mass and were re-seeded.
    pub reset: Vec<usize>,
}

/// Like [`weighted_em_update`], but re-seeds dead components instead of
/// failing: the mean becomes a random sample, the covariance the global
/// sample covariance and the weight `1/M` before renormalization.
pub fn weighted_em_update_or_reset<R: Rng + ?Sized>(
    samples: &[&[f64]],
    responsibilities: &[f64],
    prior: &Gmm,
    settings: &EmSettings,
    rng: &mut R,
) -> Result<EmUpdate> {
    check_em_inputs(samples, responsibilities, prior)?;
    let m = prior.num_components();
    let mut masses = Vec::with_capacity(m);
    let mut components = Vec::with_capacity(m);
    let mut reset = Vec::new();
    let mut global: Option<Vec<f64>> = None;
    for k in 0..m {
        match weighted_moments(samples, responsibilities, m, k, settings.covariance) {
            Some((mass, mean, cov)) => {
                masses.push(mass);
                components.push(Gaussian::with_floor(mean, cov, settings.variance_floor)?);
            }
            None => {
                reset.push(k);
                masses.push(f64::NAN);
                let mean = samples[rng.random_range(0..samples.len())].to_vec();
                let cov = global
                    .get_or_insert_with(|| global_covariance(samples, settings.covariance))
                    .clone();
                components.push(Gaussian::with_floor(mean, cov, settings.variance_floor)?);
            }
        }
    }
    if !reset.is_empty() {
        let live: f64 = masses.iter().filter(|v| !v.is_nan()).sum();
        for v in masses.iter_mut() {
            *v = if v.is_nan() {
                1.0 / m as f64
            } else {
                *v / live
            };
        }
    }
    Ok(EmUpdate {
        gmm: finish_update(masses, components)?,
        reset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g1(mean: f64, var: f64) -> Gaussian {
        Gaussian::new(vec![mean], vec![var]).unwrap()
    }

    #[test]
    fn zero_covariance_floors_to_identity() {
        let g = Gaussian::new(vec![1.0, 2.0], vec![0.0; 4]).unwrap();
        assert_eq!(g.covariance(), &[1e-6, 0.0, 0.0, 1e-6]);
    }

    #[test]
    fn standard_normal_at_mean() {
        let v = gaussian_logpdf(&[0.0], &g1(0.0, 1.0)).unwrap();
        assert!((v - (-0.918_938_533_204_672_7)).abs() < 1e-12);
    }

    #[test]
    fn bivariate_identity_at_mean() {
        let g = Gaussian::new(vec![0.3, -2.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let v = gaussian_logpdf(&[0.3, -2.0], &g).unwrap();
        assert!((v + (2.0 * PI).ln()).abs() < 1e-12);
    }

    #[test]
    fn scalar_formula() {
        let expected = -0.5 * ((2.0 * PI).ln() + 4.0f64.ln() + 1.0);
        let v = gaussian_logpdf(&[2.0], &g1(0.0, 4.0)).unwrap();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - (-2.112_085_713_764_618)).abs() < 1e-9);
    }

    #[test]
    fn dimension_checks() {
        assert!(matches!(
            gaussian_logpdf(&[0.0, 1.0], &g1(0.0, 1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
        let gmm = Gmm::single(g1(0.0, 1.0));
        assert!(mixture_logpdf(&[], &gmm).is_err());
        assert!(Gaussian::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn non_finite_covariance_is_rejected() {
        assert!(matches!(
            Gaussian::new(vec![0.0], vec![f64::NAN]),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn singular_covariance_is_floored() {
        let g = Gaussian::new(vec![0.0, 0.0], vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(2, 2, g.covariance()));
        assert!(eig.eigenvalues.min() >= VARIANCE_FLOOR * (1.0 - 1e-9));
    }

    #[test]
    fn single_component_mixture_matches_gaussian() {
        let g = Gaussian::new(vec![1.0, 2.0], vec![2.0, 0.3, 0.3, 1.0]).unwrap();
        let x = [0.2, 2.5];
        assert_eq!(Gmm::single(g.clone()).log_pdf(&x), g.log_pdf(&x));
    }

    #[test]
    fn identical_components_collapse() {
        let g = g1(0.5, 2.0);
        let gmm = Gmm::new(vec![0.3, 0.7], vec![g.clone(), g.clone()]).unwrap();
        for x in [-3.0, 0.0, 0.5, 4.0] {
            assert!((gmm.log_pdf(&[x]) - g.log_pdf(&[x])).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(Gmm::new(vec![0.5, 0.6], vec![g1(0.0, 1.0), g1(1.0, 1.0)]).is_err());
        assert!(Gmm::new(vec![-0.5, 1.5], vec![g1(0.0, 1.0), g1(1.0, 1.0)]).is_err());
    }

    #[test]
    fn unweighted_update_is_sample_moments() {
        let data = [[1.0, 2.0], [3.0, 1.0], [2.0, 6.0], [0.0, -1.0]];
        let samples: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let prior = Gmm::single(Gaussian::new(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap());
        let out = weighted_em_update(&samples, &[1.0; 4], &prior, &EmSettings::default()).unwrap();
        let c = &out.components()[0];
        assert_eq!(c.mean(), &[1.5, 2.0]);
        // population covariance by hand
        let sxx = (0.25 + 2.25 + 0.25 + 2.25) / 4.0;
        let syy = (0.0 + 1.0 + 16.0 + 9.0) / 4.0;
        let sxy = (-0.5 * 0.0 + 1.5 * -1.0 + 0.5 * 4.0 + -1.5 * -3.0) / 4.0;
        let expected = [sxx, sxy, sxy, syy];
        for (a, b) in c.covariance().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hard_assignment_recovers_cluster_means() {
        let left = [-5.1, -4.9, -5.3, -4.7, -5.0];
        let right = [7.2, 6.8, 7.0, 7.4];
        let rows: Vec<[f64; 1]> = left.iter().chain(&right).map(|&v| [v]).collect();
        let samples: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let mut resp = Vec::new();
        for i in 0..rows.len() {
            resp.extend_from_slice(if i < left.len() {
                &[1.0, 0.0]
            } else {
                &[0.0, 1.0]
            });
        }
        let prior = Gmm::new(vec![0.5, 0.5], vec![g1(-1.0, 1.0), g1(1.0, 1.0)]).unwrap();
        let out = weighted_em_update(&samples, &resp, &prior, &EmSettings::default()).unwrap();
        let left_mean = (-5.1 - 4.9 - 5.3 - 4.7 - 5.0) / 5.0;
        let right_mean = (7.2 + 6.8 + 7.0 + 7.4) / 4.0;
        assert!((out.components()[0].mean()[0] - left_mean).abs() < 1e-12);
        assert!((out.components()[1].mean()[0] - right_mean).abs() < 1e-12);
        assert!((out.weights()[0] - 5.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn dead_component_errors_or_resets() {
        let rows: Vec<[f64; 1]> = (0..6).map(|i| [i as f64]).collect();
        let samples: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let resp: Vec<f64> = (0..6).flat_map(|_| [1.0, 0.0, 0.0]).collect();
        let prior = Gmm::new(
            vec![0.4, 0.3, 0.3],
            vec![g1(0.0, 1.0), g1(2.0, 1.0), g1(4.0, 1.0)],
        )
        .unwrap();
        let settings = EmSettings::default();
        assert!(matches!(
            weighted_em_update(&samples, &resp, &prior, &settings),
            Err(Error::DegenerateComponent { component: 1 })
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out =
            weighted_em_update_or_reset(&samples, &resp, &prior, &settings, &mut rng).unwrap();
        assert_eq!(out.reset, vec![1, 2]);
        let w = out.gmm.weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // live weight 1, dead 1/3 each, renormalized by 5/3
        assert!((w[0] - 0.6).abs() < 1e-12);
        assert!((w[1] - 0.2).abs() < 1e-12);
        // global population variance of 0..6
        assert!((out.gmm.components()[1].covariance()[0] - 35.0 / 12.0).abs() < 1e-12);
        assert!(rows
            .iter()
            .any(|r| r[0] == out.gmm.components()[2].mean()[0]));
    }

    #[test]
    fn diagonal_update_drops_correlation() {
        let data = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.1]];
        let samples: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let prior = Gmm::single(Gaussian::new(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap());
        let settings = EmSettings {
            covariance: CovarianceKind::Diagonal,
            ..Default::default()
        };
        let out = weighted_em_update(&samples, &[1.0; 3], &prior, &settings).unwrap();
        let c = out.components()[0].covariance();
        assert_eq!((c[1], c[2]), (0.0, 0.0));
    }
}
