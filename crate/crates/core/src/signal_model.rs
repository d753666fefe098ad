//! Gaussian sample generation under the noise-only and signal hypotheses.
//!
//! `CN(0, σ²)` means independent real and imaginary parts, each `N(0, σ²/2)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::eigencore::SampleMatrix;
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, CMatrix, C64};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalConfig {
    pub nodes: usize,
    pub samples: usize,
    pub sigma2: f64,
    /// Per-source SNR in dB; empty under H0.
    pub snr_db: Vec<f64>,
    /// Per-source variance `σ_i²`, same length as `snr_db`.
    pub source_var: Vec<f64>,
    pub seed: u64,
}

impl SignalConfig {
    /// Sources with unit variance.
    pub fn new(nodes: usize, samples: usize, sigma2: f64, snr_db: Vec<f64>, seed: u64) -> Result<Self> {
        let source_var = vec![1.0; snr_db.len()];
        let cfg = Self {
            nodes,
            samples,
            sigma2,
            snr_db,
            source_var,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn noise_only(nodes: usize, samples: usize, sigma2: f64, seed: u64) -> Result<Self> {
        Self::new(nodes, samples, sigma2, Vec::new(), seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn sources(&self) -> usize {
        self.snr_db.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 || self.samples == 0 {
            return Err(Error::InvalidArgument("K and N must be positive".into()));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        if self.source_var.len() != self.snr_db.len() {
            return Err(Error::Dimension("snr_db and source_var lengths differ".into()));
        }
        if self.source_var.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("source variances must be positive".into()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("SNR must be finite".into()));
        }
        Ok(())
    }
}

/// `K×P` channel, column `i` for source `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    pub h: CMatrix,
}

impl ChannelMatrix {
    pub fn column(&self, i: usize) -> Vec<C64> {
        self.h.col(i)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `‖h_i‖² σ_i² / σ²`.
pub fn theoretical_snr(h: &[C64], sigma_i2: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma2 must be positive, got {sigma2}")));
    }
    Ok(norm_sq(h) * sigma_i2 / sigma2)
}

fn cn(rng: &mut ChaCha8Rng, var: f64) -> C64 {
    let g = Normal::new(0.0, (var / 2.0).sqrt()).expect("finite variance");
    C64::new(g.sample(rng), g.sample(rng))
}

fn noise(cfg: &SignalConfig, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = Normal::new(0.0, (cfg.sigma2 / 2.0).sqrt()).expect("validated variance");
    CMatrix::from_fn(cfg.nodes, cfg.samples, |_, _| C64::new(g.sample(rng), g.sample(rng)))
}

/// Noise-only samples.
pub fn gen_h0(cfg: &SignalConfig) -> Result<SampleMatrix> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    SampleMatrix::new(noise(cfg, &mut rng))
}

/// `Y = H S + noise`, with `H` drawn once and each column scaled to hit its
/// SNR exactly.
///
/// The noise is drawn first from the same stream as [`gen_h0`], so both
/// hypotheses share the noise realization for a given seed.
pub fn gen_h1(cfg: &SignalConfig) -> Result<(SampleMatrix, ChannelMatrix)> {
    cfg.validate()?;
    if cfg.sources() == 0 {
        return Err(Error::InvalidArgument("H1 needs at least one source".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut y = noise(cfg, &mut rng);
    let (k, p, n) = (cfg.nodes, cfg.sources(), cfg.samples);
    let mut h = CMatrix::from_fn(k, p, |_, _| cn(&mut rng, 1.0));
    for i in 0..p {
        let target = db_to_linear(cfg.snr_db[i]) * cfg.sigma2 / cfg.source_var[i];
        let col = h.col(i);
        let scale = (target / norm_sq(&col)).sqrt();
        for r in 0..k {
            h[(r, i)] *= scale;
        }
    }
    let s = CMatrix::from_fn(p, n, |i, _| cn(&mut rng, cfg.source_var[i]));
    let hs = h.matmul(&s);
    y = y.add(&hs);
    Ok((SampleMatrix::new(y)?, ChannelMatrix { h }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigencore::sample_covariance;

    #[test]
    fn h0_entry_moments() {
        let cfg = SignalConfig::noise_only(40, 2500, 1.0, 1).unwrap();
        let y = gen_h0(&cfg).unwrap();
        let n = 1e5;
        let mean: C64 = y.matrix().as_slice().iter().sum::<C64>() / n;
        let var = y.matrix().as_slice().iter().map(|x| x.norm_sqr()).sum::<f64>() / n;
        // |x|² is exponential with unit mean, so the estimator's std is 1/sqrt(n)
        assert!((var - 1.0).abs() < 3.0 / n.sqrt(), "{var}");
        assert!(mean.norm() < 4.0 / n.sqrt(), "{mean}");
    }

    #[test]
    fn zero_noise_rejected() {
        assert!(SignalConfig::noise_only(4, 4, 0.0, 1).is_err());
    }

    #[test]
    fn channel_hits_snr_exactly() {
        let cfg = SignalConfig::new(40, 10, 1.0, vec![5.0], 3).unwrap();
        let (_, h) = gen_h1(&cfg).unwrap();
        let nh = norm_sq(&h.column(0));
        assert!((nh - 10f64.powf(0.5)).abs() < 1e-12 * nh);
        let snr = theoretical_snr(&h.column(0), 1.0, 1.0).unwrap();
        assert!((snr - 3.1622776601683795).abs() < 1e-12);
    }

    #[test]
    fn snr_by_hand() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert_eq!(theoretical_snr(&[one, zero], 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(theoretical_snr(&[one, one], 2.0, 1.0).unwrap(), 4.0);
        let c = C64::new(0.0, 3.0);
        assert!((theoretical_snr(&[one * c, one * c], 2.0, 1.0).unwrap() - 36.0).abs() < 1e-12);
        assert!(theoretical_snr(&[one], 1.0, 0.0).is_err());
    }

    #[test]
    fn large_n_covariance_approaches_model() {
        let cfg = SignalConfig::new(4, 10_000, 1.0, vec![3.0], 5).unwrap();
        let (y, h) = gen_h1(&cfg).unwrap();
        let r = sample_covariance(&y);
        let model = h.h.matmul(&h.h.adjoint()).add(&CMatrix::identity(4));
        let rel = r.matrix().sub(&model).frobenius_norm() / model.frobenius_norm();
        assert!(rel < 0.05, "{rel}");
    }

    #[test]
    fn h0_covariance_is_identity() {
        let cfg = SignalConfig::noise_only(4, 100_000, 1.0, 8).unwrap();
        let r = sample_covariance(&gen_h0(&cfg).unwrap());
        let rel = r.matrix().sub(&CMatrix::identity(4)).frobenius_norm() / 2.0;
        assert!(rel < 0.01, "{rel}");
    }

    #[test]
    fn seeded_and_shares_noise() {
        let cfg = SignalConfig::new(5, 6, 1.0, vec![0.0], 9).unwrap();
        assert_eq!(gen_h1(&cfg).unwrap().0, gen_h1(&cfg).unwrap().0);
        let h0 = gen_h0(&cfg).unwrap();
        let (h1, ch) = gen_h1(&cfg).unwrap();
        assert_ne!(h0, h1);
        assert_eq!(ch.h.cols(), 1);
        assert!(gen_h1(&SignalConfig::noise_only(5, 6, 1.0, 9).unwrap()).is_err());
    }
}
