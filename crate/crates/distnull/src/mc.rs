//! Monte Carlo oracle for the distributional-null model.
//!
//! Each trial draws a true effect `μ ~ N(0, qσ²)` and then an experiment of
//! the configured design around it. Every trial owns a ChaCha substream keyed
//! by `(seed, trial)`, so results do not depend on thread scheduling.

use distnull_core::dist::{dist_t_crit, posterior_update, replication_probability, DistributionalNull};
use distnull_core::{DegreesOfFreedom, Error, ExperimentDesign, ExperimentSummary, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TRIALS: u64 = 100_000;

/// Largest integer ν drawn as an explicit sum of squared normals.
const CHI2_SUM_MAX: f64 = 64.0;

/// How each trial produces its sample statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrawMode {
    /// Draw the sample mean and variance from their exact distributions.
    #[default]
    Sufficient,
    /// Draw every observation and compute the statistics from the data.
    Raw,
}

/// Which outcomes count as a rejection in [`simulate_fpr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    /// `t ≥ t_crit`: significance in a fixed direction, null rate `α`.
    #[default]
    Upper,
    /// `|t| ≥ t_crit`: significance in either direction, null rate `2α`.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplicationVariant {
    /// The second statistic reuses the first experiment's standard deviation.
    #[default]
    SharedSd,
    /// The second experiment draws its own standard deviation.
    IndependentS2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub design: ExperimentDesign,
    /// Per-group sample size.
    pub n: u64,
    pub q_true: f64,
    pub sigma: f64,
    pub trials: u64,
    pub seed: u64,
    pub draw: DrawMode,
    pub tail: Tail,
}

impl SimConfig {
    pub fn new(design: ExperimentDesign, n: u64, q_true: f64) -> Self {
        SimConfig {
            design,
            n,
            q_true,
            sigma: 1.0,
            trials: DEFAULT_TRIALS,
            seed: 0,
            draw: DrawMode::Sufficient,
            tail: Tail::Upper,
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_draw(mut self, draw: DrawMode) -> Self {
        self.draw = draw;
        self
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<DegreesOfFreedom> {
        if self.trials == 0 {
            return Err(Error::domain("trials", 0.0, "at least 1"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::domain("sigma", self.sigma, "a finite value > 0"));
        }
        DistributionalNull::new(self.q_true)?;
        self.design.degrees_of_freedom(self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub rate: f64,
    /// Binomial standard error `√(rate(1 − rate)/trials)`.
    pub mc_se: f64,
    pub trials: u64,
    pub hits: u64,
}

impl CalibrationReport {
    pub fn from_hits(hits: u64, trials: u64) -> Self {
        let rate = hits as f64 / trials as f64;
        CalibrationReport {
            rate,
            mc_se: (rate * (1.0 - rate) / trials as f64).sqrt(),
            trials,
            hits,
        }
    }

    /// Whether `target` lies within `k` standard errors of the rate.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.rate - target).abs() <= k * self.mc_se
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub calibration: CalibrationReport,
    /// Significant second results pointing the other way; never counted.
    pub wrong_sign: u64,
    /// The closed-form replication probability for the same inputs.
    pub expected: f64,
}

/// Standard normal and chi-square draws from one trial's substream.
struct Draws {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Draws {
    fn for_trial(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Draws { rng, spare: None }
    }

    /// Box–Muller, both outputs used.
    fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    fn chi_square(&mut self, dof: f64) -> f64 {
        if dof.fract() == 0.0 && dof <= CHI2_SUM_MAX {
            (0..dof as u32).map(|_| self.normal().powi(2)).sum()
        } else {
            ChiSquared::new(dof).expect("positive degrees of freedom").sample(&mut self.rng)
        }
    }

    /// `σ²·χ²_k/k`, the sampling distribution of an unbiased variance.
    fn sample_variance(&mut self, sigma: f64, k: f64) -> f64 {
        sigma * sigma * self.chi_square(k) / k
    }

    fn sample(&mut self, mean: f64, sigma: f64, n: u64) -> Vec<f64> {
        (0..n).map(|_| mean + sigma * self.normal()).collect()
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// One experiment's t statistic around the given true means.
///
/// `mu_y` is ignored for the one-sample design.
fn experiment_t(d: &mut Draws, cfg: &SimConfig, mu_x: f64, mu_y: f64) -> f64 {
    let n = cfg.n;
    let nf = n as f64;
    let sigma = cfg.sigma;
    let k = (n - 1) as f64;
    match (cfg.design, cfg.draw) {
        (ExperimentDesign::OneSample, DrawMode::Sufficient) => {
            let mean = mu_x + sigma / nf.sqrt() * d.normal();
            mean / (d.sample_variance(sigma, k) / nf).sqrt()
        }
        (ExperimentDesign::Paired, DrawMode::Sufficient) => {
            let sd_diff = sigma * std::f64::consts::SQRT_2;
            let mean = mu_x - mu_y + sd_diff / nf.sqrt() * d.normal();
            mean / (d.sample_variance(sd_diff, k) / nf).sqrt()
        }
        (ExperimentDesign::TwoSampleEqualN, DrawMode::Sufficient) => {
            let mx = mu_x + sigma / nf.sqrt() * d.normal();
            let my = mu_y + sigma / nf.sqrt() * d.normal();
            let pooled = 0.5 * (d.sample_variance(sigma, k) + d.sample_variance(sigma, k));
            (mx - my) / (pooled * 2.0 / nf).sqrt()
        }
        (design, DrawMode::Raw) => {
            let summary = raw_summary(d, design, n, sigma, mu_x, mu_y);
            summary.t_statistic().0
        }
    }
}

fn raw_summary(
    d: &mut Draws,
    design: ExperimentDesign,
    n: u64,
    sigma: f64,
    mu_x: f64,
    mu_y: f64,
) -> ExperimentSummary {
    let built = match design {
        ExperimentDesign::OneSample => {
            let (m, s) = mean_sd(&d.sample(mu_x, sigma, n));
            ExperimentSummary::one_sample(n, m, s)
        }
        ExperimentDesign::Paired => {
            let x = d.sample(mu_x, sigma, n);
            let y = d.sample(mu_y, sigma, n);
            let diffs: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let (m, s) = mean_sd(&diffs);
            ExperimentSummary::paired(n, m, s)
        }
        ExperimentDesign::TwoSampleEqualN => {
            let (mx, sx) = mean_sd(&d.sample(mu_x, sigma, n));
            let (my, sy) = mean_sd(&d.sample(mu_y, sigma, n));
            ExperimentSummary::two_sample(n, mx, sx, n, my, sy)
        }
    };
    // continuous draws: a zero standard deviation has probability zero
    built.expect("nondegenerate simulated sample")
}

/// Scale of the design's contrast in single-observation units: `σ` for the
/// one-sample design, `√2·σ` when two conditions are differenced.
fn effective_sigma(design: ExperimentDesign, sigma: f64) -> f64 {
    match design {
        ExperimentDesign::OneSample => sigma,
        ExperimentDesign::Paired | ExperimentDesign::TwoSampleEqualN => sigma * std::f64::consts::SQRT_2,
    }
}

/// Rejection rate of the distributional test at `q_test` when data come
/// from the model with `cfg.q_true`.
pub fn simulate_fpr(cfg: &SimConfig, alpha: f64, q_test: f64) -> Result<CalibrationReport> {
    let nu = cfg.validate()?;
    let t_crit = dist_t_crit(alpha, nu, cfg.n, DistributionalNull::new(q_test)?)?;
    let prior_sd = cfg.sigma * cfg.q_true.sqrt();
    let two_means = cfg.design != ExperimentDesign::OneSample;
    let hits = (0..cfg.trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut d = Draws::for_trial(cfg.seed, trial);
            let mu_x = prior_sd * d.normal();
            let mu_y = if two_means { prior_sd * d.normal() } else { 0.0 };
            let t = experiment_t(&mut d, cfg, mu_x, mu_y);
            match cfg.tail {
                Tail::Upper => t >= t_crit,
                Tail::Both => t.abs() >= t_crit,
            }
        })
        .count() as u64;
    Ok(CalibrationReport::from_hits(hits, cfg.trials))
}

/// [`simulate_fpr`] at each sample size in `n_list`, other settings shared.
pub fn fpr_vs_n(
    base: &SimConfig,
    alpha: f64,
    n_list: &[u64],
    q_test: f64,
) -> Result<Vec<(u64, CalibrationReport)>> {
    n_list
        .iter()
        .map(|&n| Ok((n, simulate_fpr(&base.with_n(n), alpha, q_test)?)))
        .collect()
}

/// Conditions on a first result `t1`, draws the true effect from its
/// posterior and counts second experiments that are significant in the
/// same direction.
///
/// The sign of `t1 = 0` is taken as positive.
pub fn simulate_replication(
    t1: f64,
    cfg: &SimConfig,
    alpha: f64,
    variant: ReplicationVariant,
) -> Result<ReplicationReport> {
    if !t1.is_finite() {
        return Err(Error::domain("t1", t1, "a finite value"));
    }
    let nu = cfg.validate()?;
    let null = DistributionalNull::new(cfg.q_true)?;
    let t_crit = dist_t_crit(alpha, nu, cfg.n, null)?;
    let expected = replication_probability(t1, alpha, nu, cfg.n, null)?;
    let sigma_e = effective_sigma(cfg.design, cfg.sigma);
    let nf = cfg.n as f64;
    let direction = if t1 < 0.0 { -1.0 } else { 1.0 };

    let (hits, wrong_sign) = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut d = Draws::for_trial(cfg.seed, trial);
            let s = d.sample_variance(sigma_e, nu.get()).sqrt();
            let x_bar_1 = t1 * s / nf.sqrt();
            let post = posterior_update(x_bar_1, cfg.n, null).expect("validated sample size");
            let mu = post.mu_n + sigma_e * post.var_n_over_sigma2.sqrt() * d.normal();
            let (x_bar_2, s_fresh) = second_experiment(&mut d, cfg, mu, sigma_e);
            let s2 = match variant {
                ReplicationVariant::SharedSd => s,
                ReplicationVariant::IndependentS2 => s_fresh.unwrap_or_else(|| {
                    d.sample_variance(sigma_e, nu.get()).sqrt()
                }),
            };
            let t2 = x_bar_2 / (s2 / nf.sqrt());
            if t2.abs() < t_crit {
                (0, 0)
            } else if t2 * direction > 0.0 {
                (1, 0)
            } else {
                (0, 1)
            }
        })
        .reduce(|| (0u64, 0u64), |a, b| (a.0 + b.0, a.1 + b.1));

    Ok(ReplicationReport {
        calibration: CalibrationReport::from_hits(hits, cfg.trials),
        wrong_sign,
        expected,
    })
}

/// Mean contrast of the repeat experiment and, in raw mode, its own
/// standard deviation on the same effective scale.
fn second_experiment(
    d: &mut Draws,
    cfg: &SimConfig,
    mu: f64,
    sigma_e: f64,
) -> (f64, Option<f64>) {
    match cfg.draw {
        DrawMode::Sufficient => (mu + sigma_e / (cfg.n as f64).sqrt() * d.normal(), None),
        DrawMode::Raw => {
            let summary = raw_summary(d, cfg.design, cfg.n, cfg.sigma, mu, 0.0);
            // the pooled sd of a two-sample contrast is per group
            let s_e = match cfg.design {
                ExperimentDesign::TwoSampleEqualN => summary.sd() * std::f64::consts::SQRT_2,
                _ => summary.sd(),
            };
            (summary.mean(), Some(s_e))
        }
    }
}
