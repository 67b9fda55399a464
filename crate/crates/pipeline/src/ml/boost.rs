//! Gradient boosting with logistic loss and Newton leaf values.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_regressor, Node, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    /// Fraction of rows drawn (without replacement) for each round.
    pub subsample: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams { rounds: 100, max_depth: 3, learning_rate: 0.1, min_leaf: 1, subsample: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledTree {
    pub scale: f64,
    pub tree: Node,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub base_score: f64,
    pub trees: Vec<ScaledTree>,
    /// Mean training log-loss before the first round and after each round.
    pub training_loss: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn log_loss(f: &[f64], y: &[bool]) -> f64 {
    let total: f64 = f
        .iter()
        .zip(y)
        .map(|(&z, &yi)| {
            // log(1 + e^{-z}) for positives, log(1 + e^{z}) for negatives, computed stably.
            let m = if yi { -z } else { z };
            m.max(0.0) + (-m.abs()).exp().ln_1p()
        })
        .sum();
    total / y.len().max(1) as f64
}

impl BoostedModel {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &BoostParams, seed: u64) -> BoostedModel {
        let n = y.len();
        let p = (y.iter().filter(|&&v| v).count() as f64 / n.max(1) as f64).clamp(1e-6, 1.0 - 1e-6);
        let base_score = (p / (1.0 - p)).ln();
        let mut f = vec![base_score; n];
        let mut model = BoostedModel { base_score, trees: Vec::new(), training_loss: vec![log_loss(&f, y)] };
        if y.iter().all(|&v| v == y[0]) {
            return model;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree_params = TreeParams { max_depth: params.max_depth, min_leaf: params.min_leaf };
        for _ in 0..params.rounds {
            let prob: Vec<f64> = f.iter().map(|&z| sigmoid(z)).collect();
            let residual: Vec<f64> = prob.iter().zip(y).map(|(&pi, &yi)| f64::from(u8::from(yi)) - pi).collect();
            let hess: Vec<f64> = prob.iter().map(|&pi| pi * (1.0 - pi)).collect();
            let idx: Vec<usize> = if params.subsample < 1.0 {
                let k = ((n as f64 * params.subsample).round() as usize).clamp(1, n);
                let mut v = sample(&mut rng, n, k).into_vec();
                v.sort_unstable();
                v
            } else {
                (0..n).collect()
            };
            let newton = |rows: &[usize]| {
                let g: f64 = rows.iter().map(|&i| residual[i]).sum();
                let h: f64 = rows.iter().map(|&i| hess[i]).sum();
                g / (h + 1e-12)
            };
            let tree = fit_regressor(x, &residual, &idx, &tree_params, &newton);
            let step: Vec<f64> = x.iter().map(|xi| tree.eval(xi)).collect();
            let before = *model.training_loss.last().expect("initial loss recorded");
            // Shrink the step until the training loss does not go up.
            let mut scale = params.learning_rate;
            let mut trial: Vec<f64>;
            let mut loss;
            loop {
                trial = f.iter().zip(&step).map(|(a, s)| a + scale * s).collect();
                loss = log_loss(&trial, y);
                if loss <= before || scale < 1e-8 {
                    break;
                }
                scale /= 2.0;
            }
            if loss > before {
                scale = 0.0;
                loss = before;
                trial = f.clone();
            }
            f = trial;
            model.training_loss.push(loss);
            model.trees.push(ScaledTree { scale, tree });
        }
        model
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.scale * t.tree.eval(x)).sum::<f64>()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}
