use rand::Rng;

use super::params::{Gradients, NeuralError, ParamStore};

/// Classical momentum: `v ← μv − η∇`, `θ ← θ + v`.
#[derive(Debug, Clone)]
pub struct MomentumSgd {
    pub lr: f64,
    pub momentum: f64,
    /// Rescale the gradient when its norm exceeds this (0 disables).
    pub clip_norm: f64,
    velocity: Gradients,
}

impl MomentumSgd {
    pub fn new(store: &ParamStore, lr: f64, momentum: f64) -> Self {
        assert!(lr > 0.0 && (0.0..1.0).contains(&momentum), "lr > 0 and momentum in [0, 1)");
        MomentumSgd {
            lr,
            momentum,
            clip_norm: 0.0,
            velocity: store.zero_grads(),
        }
    }

    pub fn with_clip(mut self, clip_norm: f64) -> Self {
        self.clip_norm = clip_norm;
        self
    }

    pub fn velocity(&self) -> &Gradients {
        &self.velocity
    }

    /// Applies one update and zeroes `grads`.
    pub fn step(&mut self, store: &mut ParamStore, grads: &mut Gradients) -> Result<(), NeuralError> {
        if grads.data.len() != store.len() || self.velocity.data.len() != store.len() {
            return Err(NeuralError::ShapeMismatch("gradient and parameter counts differ".into()));
        }
        let mut k = 1.0;
        if self.clip_norm > 0.0 {
            let n = grads.norm();
            if n > self.clip_norm {
                k = self.clip_norm / n;
            }
        }
        for id in store.ids().collect::<Vec<_>>() {
            let theta = &mut store.get_mut(id).data;
            let g = grads.get_mut(id);
            let v = self.velocity.get_mut(id);
            if g.len() != theta.len() {
                return Err(NeuralError::ShapeMismatch(format!("gradient for parameter {}", id.0)));
            }
            for ((t, gi), vi) in theta.iter_mut().zip(g.iter_mut()).zip(v.iter_mut()) {
                *vi = self.momentum * *vi - self.lr * k * *gi;
                *t += *vi;
                *gi = 0.0;
            }
        }
        Ok(())
    }
}

/// Halves the learning rate after `patience` epochs without improvement.
#[derive(Debug, Clone)]
pub struct PlateauSchedule {
    pub patience: usize,
    best: f64,
    stalled: usize,
}

impl PlateauSchedule {
    pub fn new(patience: usize) -> Self {
        PlateauSchedule {
            patience,
            best: f64::NEG_INFINITY,
            stalled: 0,
        }
    }

    /// Records a dev metric (higher is better); returns true if the rate was halved.
    pub fn observe(&mut self, metric: f64, opt: &mut MomentumSgd) -> bool {
        if metric > self.best {
            self.best = metric;
            self.stalled = 0;
            return false;
        }
        self.stalled += 1;
        if self.stalled >= self.patience {
            opt.lr *= 0.5;
            self.stalled = 0;
            return true;
        }
        false
    }
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else `1/(1-rate)`.
pub fn dropout_mask<R: Rng>(rng: &mut R, n: usize, rate: f64) -> Vec<f64> {
    if rate <= 0.0 {
        return vec![1.0; n];
    }
    let keep = 1.0 / (1.0 - rate);
    (0..n).map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect()
}
