//! First-order parameter updates: plain gradient descent (the exactly
//! reproducible reference) and Adam.

use crate::recurrent::LstmParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    m: Vec<f64>,
    v: Vec<f64>,
    step: usize,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, n_params: usize) -> Self {
        let slots = match kind {
            OptimizerKind::Sgd => 0,
            OptimizerKind::Adam { .. } => n_params,
        };
        Optimizer {
            kind,
            m: vec![0.0; slots],
            v: vec![0.0; slots],
            step: 0,
        }
    }

    pub fn update(&mut self, params: &mut LstmParams, grads: &LstmParams, lr: f64) {
        match self.kind {
            OptimizerKind::Sgd => params.axpy(-lr, grads),
            OptimizerKind::Adam { beta1, beta2, eps } => {
                self.step += 1;
                let bc1 = 1.0 - beta1.powi(self.step as i32);
                let bc2 = 1.0 - beta2.powi(self.step as i32);
                let g = grads.to_flat();
                let mut p = params.to_flat();
                for i in 0..p.len() {
                    self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
                    self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g[i] * g[i];
                    let mhat = self.m[i] / bc1;
                    let vhat = self.v[i] / bc2;
                    p[i] -= lr * mhat / (vhat.sqrt() + eps);
                }
                *params = params.from_flat(&p).expect("shape preserved");
            }
        }
    }
}
