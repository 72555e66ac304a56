//! Synthetic panel generators covering every experimental regime: independent
//! Gaussian innovations, rank-one cross-sectional dependence, instantaneous
//! effects, sporadically missing causal connections, uniform (non-Gaussian)
//! noise and block-dependent noise.

use rand::distr::uniform::SampleUniform;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::Float;
use crate::granger::{Panel, SeriesPair};
use crate::seeding::derive_seed;

/// Stream tags for the splittable per-entity generators.
mod stream {
    pub const MEMBER: u64 = 1;
    pub const COUPLING_X: u64 = 2;
    pub const COUPLING_Y: u64 = 3;
    pub const SHARED_X: u64 = 4;
    pub const SHARED_Y: u64 = 5;
}

/// Closed interval for a uniform coefficient law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformInterval {
    pub low: f64,
    pub high: f64,
}

impl UniformInterval {
    pub fn new(low: f64, high: f64) -> Self {
        Self { low, high }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !self.low.is_finite() || !self.high.is_finite() || self.low > self.high {
            return Err(Error::config(format!(
                "{name} interval [{}, {}] is not ordered",
                self.low, self.high
            )));
        }
        Ok(())
    }

    fn draw<F: Float + SampleUniform>(&self, rng: &mut impl Rng) -> F {
        let low = F::cast(self.low);
        let high = F::cast(self.high);
        if low == high {
            low
        } else {
            rng.random_range(low..high)
        }
    }
}

/// Innovation-process family of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    /// i.i.d. N(0, sigma2) per member and timestamp.
    GaussianIid { sigma2: f64 },
    /// Rank-one cross-sectional dependence: the x innovations of all members
    /// share one scalar N(0,1) factor per timestamp, scaled by a coupling
    /// vector with Unif(0.5, 1.5) entries; the y innovations use an
    /// independent factor and coupling vector. The implied covariance is the
    /// outer product of the coupling vector with itself, a degenerate
    /// (perfectly dependent) Gaussian.
    CrossSectionalRank1,
    /// i.i.d. Unif(low, high) noise (non-Gaussian regime).
    UniformIid { low: f64, high: f64 },
    /// Consecutive time blocks of `block_len` steps share one N(0, 0.1) draw
    /// per member and series.
    BlockDependent { block_len: usize },
}

fn default_lag_order() -> usize {
    1
}

fn default_burn_in() -> usize {
    50
}

/// Full description of a synthetic generation process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_members: usize,
    pub n_timestamps: usize,
    /// Lag of the causal influence; all built-in regimes use 1.
    #[serde(default = "default_lag_order")]
    pub lag_order: usize,
    /// Draw the causal coefficient (true) or force it to zero (false).
    pub causal: bool,
    /// Instantaneous influence: the cause enters at lag 0 instead of lag 1.
    #[serde(default)]
    pub instantaneous: bool,
    /// Probability that a causal member's coefficient is forced to zero.
    #[serde(default)]
    pub missing_edge_prob: f64,
    /// Steps generated and discarded before the recorded sample.
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    pub seed: u64,
    pub coef_delta: UniformInterval,
    pub coef_theta: UniformInterval,
    pub coef_beta: UniformInterval,
    pub noise: NoiseFamily,
}

impl SimConfig {
    /// Independent Gaussian innovations, the baseline regime.
    pub fn experiment_1(n_members: usize, n_timestamps: usize, causal: bool, seed: u64) -> Self {
        Self {
            n_members,
            n_timestamps,
            lag_order: 1,
            causal,
            instantaneous: false,
            missing_edge_prob: 0.0,
            burn_in: default_burn_in(),
            seed,
            coef_delta: UniformInterval::new(0.2, 0.8),
            coef_theta: UniformInterval::new(0.2, 0.8),
            coef_beta: UniformInterval::new(0.2, 0.8),
            noise: NoiseFamily::GaussianIid { sigma2: 0.1 },
        }
    }

    /// Rank-one cross-sectional dependence in both innovation processes.
    pub fn experiment_2(n_members: usize, n_timestamps: usize, causal: bool, seed: u64) -> Self {
        Self {
            noise: NoiseFamily::CrossSectionalRank1,
            ..Self::experiment_1(n_members, n_timestamps, causal, seed)
        }
    }

    /// Purely instantaneous causal influence.
    pub fn instantaneous_effects(
        n_members: usize,
        n_timestamps: usize,
        causal: bool,
        seed: u64,
    ) -> Self {
        Self {
            instantaneous: true,
            ..Self::experiment_1(n_members, n_timestamps, causal, seed)
        }
    }

    /// Causal links removed independently with probability `a`.
    pub fn sporadic_missing(n_members: usize, n_timestamps: usize, a: f64, seed: u64) -> Self {
        Self {
            missing_edge_prob: a,
            ..Self::experiment_1(n_members, n_timestamps, true, seed)
        }
    }

    /// Uniform (non-Gaussian) innovations.
    pub fn non_gaussian_noise(
        n_members: usize,
        n_timestamps: usize,
        causal: bool,
        seed: u64,
    ) -> Self {
        Self {
            noise: NoiseFamily::UniformIid { low: 0.2, high: 0.8 },
            ..Self::experiment_1(n_members, n_timestamps, causal, seed)
        }
    }

    /// Innovations shared inside 3-step time blocks.
    pub fn block_noise(n_members: usize, n_timestamps: usize, causal: bool, seed: u64) -> Self {
        Self {
            noise: NoiseFamily::BlockDependent { block_len: 3 },
            ..Self::experiment_1(n_members, n_timestamps, causal, seed)
        }
    }

    /// Returns the config with the causal-coefficient law replaced.
    pub fn with_beta_range(mut self, low: f64, high: f64) -> Self {
        self.coef_beta = UniformInterval::new(low, high);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_members == 0 {
            return Err(Error::config("n_members must be at least 1"));
        }
        if self.n_timestamps == 0 {
            return Err(Error::config("n_timestamps must be at least 1"));
        }
        if self.lag_order != 1 {
            return Err(Error::config("generators support lag_order = 1 only"));
        }
        self.coef_delta.validate("coef_delta")?;
        self.coef_theta.validate("coef_theta")?;
        self.coef_beta.validate("coef_beta")?;
        for (name, iv) in [("coef_delta", self.coef_delta), ("coef_theta", self.coef_theta)] {
            if iv.low.abs() >= 1.0 || iv.high.abs() >= 1.0 {
                return Err(Error::config(format!(
                    "{name} must lie strictly inside (-1, 1) for a stable process"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.missing_edge_prob) {
            return Err(Error::config("missing_edge_prob must lie in [0, 1]"));
        }
        match &self.noise {
            NoiseFamily::GaussianIid { sigma2 } => {
                if !(*sigma2 > 0.0 && sigma2.is_finite()) {
                    return Err(Error::config("sigma2 must be positive"));
                }
            }
            NoiseFamily::UniformIid { low, high } => {
                UniformInterval::new(*low, *high).validate("noise interval")?;
            }
            NoiseFamily::BlockDependent { block_len } => {
                if *block_len == 0 {
                    return Err(Error::config("block_len must be at least 1"));
                }
            }
            NoiseFamily::CrossSectionalRank1 => {}
        }
        Ok(())
    }

    /// Serializes to the plain-text key-value configuration format.
    pub fn to_config_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("serialize: {e}")))
    }

    /// Parses the plain-text key-value configuration format.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<config>".into(),
            location: "-".into(),
            detail: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Generated panel plus the per-member ground truth.
#[derive(Debug, Clone)]
pub struct SimOutput<F> {
    pub panel: Panel<F>,
    /// True where the member's causal coefficient is non-zero.
    pub ground_truth: Vec<bool>,
    /// Echo of the generating configuration.
    pub config: SimConfig,
}

fn stream_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[tag, index]))
}

fn normal_vec<F>(rng: &mut impl Rng, len: usize, sd: F) -> Vec<F>
where
    F: Float,
    StandardNormal: Distribution<F>,
{
    (0..len).map(|_| sd * rng.sample::<F, _>(StandardNormal)).collect()
}

fn uniform_vec<F>(rng: &mut impl Rng, len: usize, interval: UniformInterval) -> Vec<F>
where
    F: Float + SampleUniform,
{
    (0..len).map(|_| interval.draw(rng)).collect()
}

fn block_vec<F>(rng: &mut impl Rng, len: usize, block_len: usize, sd: F) -> Vec<F>
where
    F: Float,
    StandardNormal: Distribution<F>,
{
    let mut out = Vec::with_capacity(len);
    let mut current = F::zero();
    for t in 0..len {
        if t % block_len == 0 {
            current = sd * rng.sample::<F, _>(StandardNormal);
        }
        out.push(current);
    }
    out
}

/// Generates a synthetic panel according to `config`.
///
/// Each member follows a pair of AR(1) recursions: the cause evolves on its
/// own innovations and the effect adds `beta` times the (lagged or
/// instantaneous) cause. Series start at zero and `burn_in` initial steps are
/// discarded. Members are generated from independent streams keyed by
/// (seed, member), and shared cross-sectional draws come from their own
/// streams, so the output is reproducible and independent of generation
/// order.
pub fn simulate_panel<F>(config: &SimConfig) -> Result<SimOutput<F>>
where
    F: Float + SampleUniform,
    StandardNormal: Distribution<F>,
{
    config.validate()?;
    let n = config.n_members;
    let total = config.burn_in + config.n_timestamps;
    let lag = if config.instantaneous { 0 } else { 1 };

    // Shared cross-sectional structure, generated once and broadcast.
    let rank1 = match config.noise {
        NoiseFamily::CrossSectionalRank1 => {
            let coupling = UniformInterval::new(0.5, 1.5);
            let mut cx = stream_rng(config.seed, stream::COUPLING_X, 0);
            let mut cy = stream_rng(config.seed, stream::COUPLING_Y, 0);
            let ax: Vec<F> = uniform_vec(&mut cx, n, coupling);
            let ay: Vec<F> = uniform_vec(&mut cy, n, coupling);
            let mut zx = stream_rng(config.seed, stream::SHARED_X, 0);
            let mut zy = stream_rng(config.seed, stream::SHARED_Y, 0);
            let zx: Vec<F> = normal_vec(&mut zx, total, F::one());
            let zy: Vec<F> = normal_vec(&mut zy, total, F::one());
            Some((ax, ay, zx, zy))
        }
        _ => None,
    };

    let mut members = Vec::with_capacity(n);
    let mut ground_truth = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = stream_rng(config.seed, stream::MEMBER, i as u64);
        let delta: F = config.coef_delta.draw(&mut rng);
        let theta: F = config.coef_theta.draw(&mut rng);
        let mut beta: F = if config.causal {
            config.coef_beta.draw(&mut rng)
        } else {
            F::zero()
        };
        if config.causal && config.missing_edge_prob > 0.0 {
            let u: f64 = rng.random();
            if u < config.missing_edge_prob {
                beta = F::zero();
            }
        }
        ground_truth.push(beta != F::zero());

        let (eta, eps): (Vec<F>, Vec<F>) = match &config.noise {
            NoiseFamily::GaussianIid { sigma2 } => {
                let sd = F::cast(sigma2.sqrt());
                (normal_vec(&mut rng, total, sd), normal_vec(&mut rng, total, sd))
            }
            NoiseFamily::UniformIid { low, high } => {
                let iv = UniformInterval::new(*low, *high);
                (uniform_vec(&mut rng, total, iv), uniform_vec(&mut rng, total, iv))
            }
            NoiseFamily::BlockDependent { block_len } => {
                let sd = F::cast(0.1_f64.sqrt());
                (
                    block_vec(&mut rng, total, *block_len, sd),
                    block_vec(&mut rng, total, *block_len, sd),
                )
            }
            NoiseFamily::CrossSectionalRank1 => {
                let (ax, ay, zx, zy) = rank1.as_ref().expect("rank1 state present");
                (
                    zx.iter().map(|&z| ax[i] * z).collect(),
                    zy.iter().map(|&z| ay[i] * z).collect(),
                )
            }
        };

        let mut x = vec![F::zero(); total];
        x[0] = eta[0];
        for t in 1..total {
            x[t] = delta * x[t - 1] + eta[t];
        }
        let mut y = vec![F::zero(); total];
        y[0] = eps[0] + if lag == 0 { beta * x[0] } else { F::zero() };
        for t in 1..total {
            y[t] = theta * y[t - 1] + beta * x[t - lag] + eps[t];
        }

        members.push(SeriesPair::new(
            x[config.burn_in..].to_vec(),
            y[config.burn_in..].to_vec(),
        )?);
    }

    Ok(SimOutput {
        panel: Panel::from_members(members)?,
        ground_truth,
        config: config.clone(),
    })
}

/// Stepwise generator of rank-one cross-sectionally dependent noise: each
/// step emits the coupling vector times one fresh scalar N(0,1) factor.
#[derive(Debug, Clone)]
pub struct CrossSectionalNoise<F> {
    coupling: Vec<F>,
    rng: ChaCha8Rng,
}

impl<F> CrossSectionalNoise<F>
where
    F: Float + SampleUniform,
    StandardNormal: Distribution<F>,
{
    fn with_streams(n_members: usize, seed: u64, coupling_tag: u64, factor_tag: u64) -> Result<Self> {
        if n_members == 0 {
            return Err(Error::config("n_members must be at least 1"));
        }
        let mut crng = stream_rng(seed, coupling_tag, 0);
        let coupling = uniform_vec(&mut crng, n_members, UniformInterval::new(0.5, 1.5));
        Ok(Self {
            coupling,
            rng: stream_rng(seed, factor_tag, 0),
        })
    }

    /// Coupling vector whose outer product with itself is the noise
    /// covariance.
    pub fn coupling(&self) -> &[F] {
        &self.coupling
    }

    /// Emits one cross-section of noise.
    pub fn step(&mut self) -> Vec<F> {
        let z: F = self.rng.sample(StandardNormal);
        self.coupling.iter().map(|&a| a * z).collect()
    }
}

/// Draws the coupling vector once and returns the stepwise noise generator.
pub fn sample_cross_sectional_noise<F>(n_members: usize, seed: u64) -> Result<CrossSectionalNoise<F>>
where
    F: Float + SampleUniform,
    StandardNormal: Distribution<F>,
{
    CrossSectionalNoise::with_streams(n_members, seed, stream::COUPLING_X, stream::SHARED_X)
}
