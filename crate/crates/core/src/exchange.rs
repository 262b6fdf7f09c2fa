//! Exchange networks and the seeded synthetic generator.
//!
//! A network over `n` currencies is the complete digraph with edge weight
//! `rates[i][j]`: units of currency `j` received per unit of currency `i`
//! sold. The diagonal is fixed at 1 and never traded.
//!
//! # Generator
//!
//! Every currency gets a latent value `v_i ~ U(lo, hi)`; each ordered pair
//! `i != j` then gets `r_ij = (v_i / v_j) * exp(u_ij)` with
//! `u_ij ~ U(-noise, noise)`. With `noise = 0` the market is consistent and
//! no cycle of any length has a rate product other than 1.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)` and switched to stream `index`, so network `k` of a
//! dataset depends only on `(seed, k)`. Uniform draws take the top 53 bits of
//! `next_u64`. Values are drawn in order `v_0..v_{n-1}` then `u_ij` row-major
//! over `i != j`. Changing any of this changes [`GENERATOR_VERSION`].

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Identifies the rate model and PRNG layout that produced a dataset.
pub const GENERATOR_VERSION: &str = "chacha8-latent-v1";

const CODES: [&str; 12] = [
    "USD", "EUR", "GBP", "JPY", "CHF", "CAD", "AUD", "NZD", "SEK", "NOK", "CNY", "HKD",
];

/// Currency code used for index `i` by the generator.
pub fn currency_code(i: usize) -> String {
    CODES.get(i).map(|c| c.to_string()).unwrap_or_else(|| format!("C{i}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeNetwork {
    currencies: Vec<String>,
    /// Row-major `n * n`.
    rates: Vec<f64>,
}

impl ExchangeNetwork {
    /// Builds a network from a row-major rate matrix.
    pub fn new(currencies: Vec<String>, rates: Vec<f64>) -> Result<Self> {
        let n = currencies.len();
        if n < 2 {
            return Err(Error::validation("currencies", format!("need at least 2, got {n}")));
        }
        if rates.len() != n * n {
            return Err(Error::validation(
                "rates",
                format!("expected {} entries for n = {n}, got {}", n * n, rates.len()),
            ));
        }
        for (i, code) in currencies.iter().enumerate() {
            if code.is_empty() || code.chars().any(char::is_whitespace) {
                return Err(Error::validation(
                    format!("currencies[{i}]"),
                    "codes must be non-empty without whitespace",
                ));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let r = rates[i * n + j];
                let field = || format!("rates[{i}][{j}]");
                if !r.is_finite() || r <= 0.0 {
                    return Err(Error::validation(
                        field(),
                        format!("must be positive and finite, got {r}"),
                    ));
                }
                if i == j && r != 1.0 {
                    return Err(Error::validation(field(), format!("diagonal must be 1, got {r}")));
                }
            }
        }
        Ok(Self { currencies, rates })
    }

    /// Builds a network from nested rows, naming currencies with
    /// [`currency_code`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::validation(
                format!("rates[{i}]"),
                format!("row has {} entries, expected {n}", row.len()),
            ));
        }
        let currencies = (0..n).map(currency_code).collect();
        Self::new(currencies, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.currencies.len()
    }

    pub fn currencies(&self) -> &[String] {
        &self.currencies
    }

    #[inline]
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.n() + j]
    }

    /// Row-major rate matrix.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.rates[i * n..(i + 1) * n]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    /// Latent currency values are drawn uniformly from `(lo, hi)`.
    pub value_range: (f64, f64),
    /// Half-width of the uniform log-rate perturbation.
    pub noise: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 4,
            count: 1000,
            seed: 0,
            value_range: (0.5, 2.0),
            noise: 0.05,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.value_range;
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Config(format!(
                "value_range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            )));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::Config(format!(
                "noise must be finite and >= 0, got {}",
                self.noise
            )));
        }
        Ok(())
    }
}

/// Maps the top 53 bits of a draw onto `[0, 1)`.
#[inline]
pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn uniform(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_f64(rng)
}

/// Network `index` of the dataset described by `config`.
pub fn generate_network(config: &GeneratorConfig, index: u64) -> Result<ExchangeNetwork> {
    config.validate()?;
    Ok(generate_unchecked(config, index))
}

fn generate_unchecked(config: &GeneratorConfig, index: u64) -> ExchangeNetwork {
    let n = config.n;
    let (lo, hi) = config.value_range;
    let delta = config.noise;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);

    let values: Vec<f64> = (0..n).map(|_| uniform(&mut rng, lo, hi)).collect();
    let mut rates = vec![1.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let u = uniform(&mut rng, -delta, delta);
                rates[i * n + j] = (values[i] / values[j]) * u.exp();
            }
        }
    }
    ExchangeNetwork {
        currencies: (0..n).map(currency_code).collect(),
        rates,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDataset {
    pub config: GeneratorConfig,
    pub generator: String,
    pub networks: Vec<ExchangeNetwork>,
}

impl NetworkDataset {
    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    /// Deterministic train/evaluation split: the first 80% of networks train,
    /// the rest evaluate. A 1000-network dataset splits 800/200.
    pub fn split(&self) -> (&[ExchangeNetwork], &[ExchangeNetwork]) {
        let cut = match self.networks.len() {
            0 => 0,
            len => (len * 4 / 5).max(1),
        };
        self.networks.split_at(cut)
    }
}

pub fn generate_dataset(config: &GeneratorConfig) -> Result<NetworkDataset> {
    generate_dataset_with(config, Execution::Parallel)
}

pub fn generate_dataset_with(config: &GeneratorConfig, exec: Execution) -> Result<NetworkDataset> {
    config.validate()?;
    let networks = par::map_indexed(exec, config.count, |k| generate_unchecked(config, k as u64));
    Ok(NetworkDataset {
        config: config.clone(),
        generator: GENERATOR_VERSION.to_string(),
        networks,
    })
}

/// Largest `|ln(r_ij * r_jk * r_ki)|` over ordered triples of distinct
/// currencies. Zero exactly when every triangle is consistent.
pub fn triangle_discrepancy(net: &ExchangeNetwork) -> f64 {
    let n = net.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let p = net.rate(i, j) * net.rate(j, k) * net.rate(k, i);
                worst = worst.max(p.ln().abs());
            }
        }
    }
    worst
}
