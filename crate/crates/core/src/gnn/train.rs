use std::time::{Duration, Instant};

use ndarray::{Array2, Zip};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{build_node_features, default_holdings, loss_and_gradient, NodeFeatures};
use super::{init_params, GnnConfig, GnnParams};
use crate::error::{Error, Result};
use crate::exchange::ExchangeNetwork;
use crate::par::{self, Execution};

/// Adam with bias correction. [`Adam::ascend`] moves parameters along the
/// gradient, which is how the relaxed objective is maximized.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    t: i32,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl Adam {
    pub fn new(cfg: &GnnConfig, params: &GnnParams) -> Self {
        let zeros: Vec<_> = params.weights.iter().map(|w| Array2::zeros(w.dim())).collect();
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn ascend(&mut self, params: &mut GnnParams, grads: &[Array2<f64>]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.epsilon);
        for (((w, g), m), v) in params.weights.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            Zip::from(w).and(g).and(m).and(v).for_each(|w, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *w += lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Mean relaxed loss over each epoch's training networks.
    pub epoch_losses: Vec<f64>,
    pub params: GnnParams,
    pub wall_time: Duration,
    pub config: GnnConfig,
}

pub fn train(networks: &[ExchangeNetwork], cfg: &GnnConfig) -> Result<TrainReport> {
    train_with(networks, cfg, Execution::Parallel)
}

/// Mini-batch Adam on the relaxed objective.
///
/// Parameters are initialized from `cfg.seed`; each epoch visits the networks
/// in an order shuffled by a ChaCha8 stream derived from the same seed. Batch
/// gradients may be computed concurrently but are summed in batch order, so
/// the result does not depend on `exec`.
pub fn train_with(networks: &[ExchangeNetwork], cfg: &GnnConfig, exec: Execution) -> Result<TrainReport> {
    cfg.validate()?;
    let first = networks.first().ok_or(Error::EmptyDataset)?;
    let n = first.n();
    if let Some(bad) = networks.iter().find(|net| net.n() != n) {
        return Err(Error::Dimension {
            expected: n,
            actual: bad.n(),
        });
    }
    let start = Instant::now();
    let features: Vec<NodeFeatures> = networks
        .iter()
        .map(|net| build_node_features(net, &default_holdings(n, cfg.budget)))
        .collect::<Result<_>>()?;

    let mut params = init_params(cfg, n, cfg.seed)?;
    let mut adam = Adam::new(cfg, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..networks.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let results = par::try_map_indexed(exec, batch.len(), |t| {
                let k = batch[t];
                loss_and_gradient(&params, &networks[k], &features[k], cfg)
            })?;
            let mut grads: Vec<Array2<f64>> = params.weights.iter().map(|w| Array2::zeros(w.dim())).collect();
            for (loss, g) in &results {
                epoch_sum += loss;
                for (acc, gi) in grads.iter_mut().zip(g) {
                    *acc += gi;
                }
            }
            let inv = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| *g *= inv);
            adam.ascend(&mut params, &grads);
        }
        epoch_losses.push(epoch_sum / networks.len() as f64);
    }

    Ok(TrainReport {
        epoch_losses,
        params,
        wall_time: start.elapsed(),
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{generate_dataset, GeneratorConfig};

    fn small() -> (Vec<ExchangeNetwork>, GnnConfig) {
        let ds = generate_dataset(&GeneratorConfig {
            count: 40,
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        let cfg = GnnConfig {
            hidden: 8,
            layers: 2,
            epochs: 5,
            batch_size: 8,
            seed: 11,
            ..Default::default()
        };
        (ds.networks, cfg)
    }

    #[test]
    fn trajectory_length_and_determinism() {
        let (nets, cfg) = small();
        let a = train_with(&nets, &cfg, Execution::Sequential).unwrap();
        let b = train_with(&nets, &cfg, Execution::Parallel).unwrap();
        assert_eq!(a.epoch_losses.len(), 5);
        assert_eq!(a.epoch_losses, b.epoch_losses);
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn empty_and_mixed_datasets_rejected() {
        let (mut nets, cfg) = small();
        assert!(matches!(train(&[], &cfg), Err(Error::EmptyDataset)));
        nets.push(ExchangeNetwork::from_rows(&[vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap());
        assert!(matches!(train(&nets, &cfg), Err(Error::Dimension { .. })));
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let cfg = GnnConfig {
            hidden: 2,
            layers: 1,
            ..Default::default()
        };
        let mut params = GnnParams::zeros(&cfg, 2);
        let mut adam = Adam::new(&cfg, &params);
        let grads: Vec<_> = params
            .weights
            .iter()
            .map(|w| Array2::from_elem(w.dim(), -3.0))
            .collect();
        adam.ascend(&mut params, &grads);
        for w in &params.weights {
            assert!(w.iter().all(|v| (v + cfg.learning_rate).abs() < 1e-9));
        }
    }
}
