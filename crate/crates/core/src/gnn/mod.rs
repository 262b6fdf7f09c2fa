//! Message-passing network that maps an exchange network to a trade plan.
//!
//! Each layer updates every node with one shared weight matrix applied to the
//! node itself and to its rate-weighted neighbours,
//!
//! ```text
//! h_i' = act(W h_i + sum_{j != i} r_ij W h_j) = act(W (R h)_i)
//! ```
//!
//! (the rate matrix `R` has a unit diagonal, so the self term is row `i` of
//! `R H`). There is no bias. The output head maps node `i`'s final embedding
//! to its `n` outgoing allocations, `z_i = W_out h_i`; allocations are
//! `softplus(z_ij)` with the diagonal zeroed, then rescaled to the budget.
//!
//! Training maximizes the relaxed objective
//!
//! ```text
//! L(x) = sum (r_ij - 1) x_ij  -  lambda * sum_i (out_i - in_i)^2
//! ```
//!
//! with Adam. Plans are only penalized for violating flow conservation, so
//! [`repair_feasibility`] turns a predicted plan into an executable one
//! before its yield is reported.

mod checkpoint;
mod model;
mod repair;
mod train;

pub use checkpoint::{checkpoint_to_string, load_checkpoint, parse_checkpoint, save_checkpoint};
pub use model::{
    build_node_features, decode_trades, default_holdings, infer, loss_and_gradient, message_pass, relaxed_loss,
    Forward, Inference, NodeFeatures,
};
pub use repair::{repair_feasibility, DEFAULT_REPAIR_ITERATIONS};
pub use train::{train, train_with, Adam, TrainReport};

use ndarray::Array2;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exchange::unit_f64;
use crate::lp::InvestmentMode;

/// Number of per-node input features.
pub const INPUT_DIM: usize = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative given the pre-activation `z` and the output `a = apply(z)`.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnnConfig {
    /// Message-passing layers.
    pub layers: usize,
    pub hidden: usize,
    pub input_dim: usize,
    pub activation: Activation,
    /// Weight of the squared flow-imbalance penalty.
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Initial investment; also the holding of currency 0 in the features.
    pub budget: f64,
    /// How decoded plans are scaled to the budget.
    pub mode: InvestmentMode,
}

impl Default for GnnConfig {
    fn default() -> Self {
        Self {
            layers: 3,
            hidden: 64,
            input_dim: INPUT_DIM,
            activation: Activation::Relu,
            lambda: 1.0,
            learning_rate: 0.001,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            budget: 1.0,
            mode: InvestmentMode::BudgetCap,
        }
    }
}

impl GnnConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.layers < 1 {
            return fail("layers must be >= 1".into());
        }
        if self.hidden < 1 {
            return fail("hidden width must be >= 1".into());
        }
        if self.input_dim != INPUT_DIM {
            return fail(format!("input_dim must be {INPUT_DIM}, got {}", self.input_dim));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return fail(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail(format!("learning rate must be > 0, got {}", self.learning_rate));
        }
        if self.batch_size < 1 {
            return fail("batch size must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return fail("Adam moments need 0 <= beta < 1 and epsilon > 0".into());
        }
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return fail(format!("budget must be > 0, got {}", self.budget));
        }
        Ok(())
    }
}

/// Layer weights: `L` message-passing matrices followed by the output head.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnParams {
    pub weights: Vec<Array2<f64>>,
}

impl GnnParams {
    /// Expected `(rows, cols)` of every weight matrix.
    pub fn shapes(cfg: &GnnConfig, n: usize) -> Vec<(usize, usize)> {
        let mut shapes = vec![(cfg.hidden, cfg.input_dim)];
        shapes.extend((1..cfg.layers).map(|_| (cfg.hidden, cfg.hidden)));
        shapes.push((n, cfg.hidden));
        shapes
    }

    pub fn zeros(cfg: &GnnConfig, n: usize) -> Self {
        Self {
            weights: Self::shapes(cfg, n).into_iter().map(Array2::zeros).collect(),
        }
    }

    /// Message-passing layer count.
    pub fn layers(&self) -> usize {
        self.weights.len() - 1
    }

    /// Currency count the output head was built for.
    pub fn currencies(&self) -> usize {
        self.weights.last().map_or(0, |w| w.nrows())
    }

    pub fn check_shapes(&self, cfg: &GnnConfig, n: usize) -> Result<()> {
        let want = Self::shapes(cfg, n);
        if want.len() != self.weights.len() {
            return Err(Error::Dimension {
                expected: want.len(),
                actual: self.weights.len(),
            });
        }
        for (w, (r, c)) in self.weights.iter().zip(want) {
            if w.dim() != (r, c) {
                return Err(Error::Dimension {
                    expected: r * c,
                    actual: w.len(),
                });
            }
        }
        Ok(())
    }

    pub fn num_parameters(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum()
    }
}

/// Glorot-uniform initialization: `W ~ U(-s, s)` with
/// `s = sqrt(6 / (fan_in + fan_out))`, drawn row-major layer by layer from
/// ChaCha8 seeded with `seed`.
pub fn init_params(cfg: &GnnConfig, n: usize, seed: u64) -> Result<GnnParams> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = GnnParams::shapes(cfg, n)
        .into_iter()
        .map(|(rows, cols)| {
            let s = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || s * (2.0 * unit_f64(&mut rng) - 1.0))
        })
        .collect();
    Ok(GnnParams { weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_shapes_and_bounds() {
        let cfg = GnnConfig::default();
        let p = init_params(&cfg, 4, 3).unwrap();
        let dims: Vec<_> = p.weights.iter().map(|w| w.dim()).collect();
        assert_eq!(dims, [(64, 3), (64, 64), (64, 64), (4, 64)]);
        let bound = (6.0f64 / 128.0).sqrt();
        assert!(p.weights[1].iter().all(|w| w.abs() <= bound));
        assert!(p.weights[1].iter().any(|w| w.abs() > 0.5 * bound));
        assert_eq!(p, init_params(&cfg, 4, 3).unwrap());
        assert_ne!(p, init_params(&cfg, 4, 4).unwrap());
        p.check_shapes(&cfg, 4).unwrap();
        assert!(p.check_shapes(&cfg, 5).is_err());
        assert_eq!((p.layers(), p.currencies()), (3, 4));
    }

    #[test]
    fn config_validation() {
        assert!(GnnConfig::default().validate().is_ok());
        for bad in [
            GnnConfig {
                layers: 0,
                ..Default::default()
            },
            GnnConfig {
                hidden: 0,
                ..Default::default()
            },
            GnnConfig {
                lambda: -1.0,
                ..Default::default()
            },
            GnnConfig {
                learning_rate: 0.0,
                ..Default::default()
            },
            GnnConfig {
                input_dim: 4,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
