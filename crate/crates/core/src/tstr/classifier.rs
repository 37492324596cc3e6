//! Downstream classifiers for the TSTR/TRTS protocols: a softmax-linear
//! model and a one-hidden-layer feedforward net, trained with Adam on
//! flattened sequences.

use crate::numerics::{Matrix, Rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    SoftmaxLinear,
    Feedforward { hidden: usize },
}

#[derive(Debug, Clone)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec {
            kind: ClassifierKind::Feedforward { hidden: 32 },
            epochs: 60,
            learning_rate: 5e-3,
            batch_size: 64,
            seed: 0,
        }
    }
}

/// Trained classifier. A single output column means a sigmoid binary
/// model; several mean softmax multiclass.
#[derive(Debug, Clone)]
pub struct Classifier {
    w1: Option<Matrix>, // hidden x features (feedforward only)
    b1: Vec<f64>,
    w2: Matrix, // outputs x (hidden | features)
    b2: Vec<f64>,
}

struct AdamSlot {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamSlot {
    fn new(n: usize) -> Self {
        AdamSlot {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.t += 1;
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let c1 = 1.0 - f64::powi(b1, self.t);
        let c2 = 1.0 - f64::powi(b2, self.t);
        for i in 0..params.len() {
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * grads[i];
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * grads[i] * grads[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + eps);
        }
    }
}

impl Classifier {
    fn hidden_forward(&self, x: &[f64], h: &mut [f64]) {
        let w1 = self.w1.as_ref().unwrap();
        w1.matvec(x, h);
        for (v, b) in h.iter_mut().zip(&self.b1) {
            *v = (*v + b).tanh();
        }
    }

    /// Class scores: softmax probabilities (multiclass) or the positive
    /// probability in a single column (binary).
    pub fn predict_scores(&self, features: &Matrix) -> Matrix {
        let n = features.rows();
        let classes = self.w2.rows();
        let mut out = Matrix::zeros(n, classes);
        let mut hid = vec![0.0; self.b1.len()];
        let mut logits = vec![0.0; classes];
        for i in 0..n {
            let x = features.row(i);
            let inp: &[f64] =
                if self.w1.is_some() {
                    self.hidden_forward(x, &mut hid);
                    &hid
                } else {
                    x
                };
            self.w2.matvec(inp, &mut logits);
            for (l, b) in logits.iter_mut().zip(&self.b2) {
                *l += b;
            }
            let row = out.row_mut(i);
            if classes == 1 {
                row[0] = 1.0 / (1.0 + (-logits[0]).exp());
            } else {
                let max = logits.iter().cloned().fold(f64::MIN, f64::max);
                let mut z = 0.0;
                for (o, &l) in row.iter_mut().zip(&logits) {
                    *o = (l - max).exp();
                    z += *o;
                }
                for o in row.iter_mut() {
                    *o /= z;
                }
            }
        }
        out
    }

    /// Argmax class per row (binary: threshold 0.5).
    pub fn predict_class(&self, features: &Matrix) -> Vec<usize> {
        let scores = self.predict_scores(features);
        (0..scores.rows())
            .map(|i| {
                let row = scores.row(i);
                if row.len() == 1 {
                    usize::from(row[0] > 0.5)
                } else {
                    row.iter()
                        .enumerate()
                        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                        .unwrap()
                        .0
                }
            })
            .collect()
    }
}

/// Trains on flattened features against one-hot (multiclass) or single
/// column 0/1 (binary) targets; deterministic under the spec seed.
pub fn train_classifier(
    features: &Matrix,
    targets: &Matrix,
    spec: &ClassifierSpec,
) -> Result<Classifier> {
    let n = features.rows();
    if targets.rows() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} target rows for {} feature rows",
            targets.rows(),
            n
        )));
    }
    if n == 0 {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    let f_dim = features.cols();
    let classes = targets.cols();
    let mut rng = Rng::new(spec.seed);

    let (hidden, mut clf) = match spec.kind {
        ClassifierKind::SoftmaxLinear => (
            0,
            Classifier {
                w1: None,
                b1: vec![],
                w2: Matrix::zeros(classes, f_dim),
                b2: vec![0.0; classes],
            },
        ),
        ClassifierKind::Feedforward { hidden } => {
            let s1 = 1.0 / (f_dim as f64).sqrt();
            let s2 = 1.0 / (hidden as f64).sqrt();
            (
                hidden,
                Classifier {
                    w1: Some(Matrix::from_fn(hidden, f_dim, |_, _| rng.uniform_in(-s1, s1))),
                    b1: vec![0.0; hidden],
                    w2: Matrix::from_fn(classes, hidden, |_, _| rng.uniform_in(-s2, s2)),
                    b2: vec![0.0; classes],
                },
            )
        }
    };

    let mut opt_w1 = AdamSlot::new(hidden * f_dim);
    let mut opt_b1 = AdamSlot::new(hidden);
    let mut opt_w2 = AdamSlot::new(clf.w2.data().len());
    let mut opt_b2 = AdamSlot::new(classes);

    let mut order: Vec<usize> = (0..n).collect();
    let mut hid = vec![0.0; hidden];
    let mut logits = vec![0.0; classes];
    let mut probs = vec![0.0; classes];

    for _ in 0..spec.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(spec.batch_size) {
            let mut gw1 = vec![0.0; hidden * f_dim];
            let mut gb1 = vec![0.0; hidden];
            let mut gw2 = vec![0.0; clf.w2.data().len()];
            let mut gb2 = vec![0.0; classes];
            let scale = 1.0 / chunk.len() as f64;

            for &i in chunk {
                let x = features.row(i);
                let inp: &[f64] = if clf.w1.is_some() {
                    clf.hidden_forward(x, &mut hid);
                    &hid
                } else {
                    x
                };
                clf.w2.matvec(inp, &mut logits);
                for (l, b) in logits.iter_mut().zip(&clf.b2) {
                    *l += b;
                }
                // dLoss/dlogit for sigmoid-BCE and softmax-CE alike.
                if classes == 1 {
                    probs[0] = 1.0 / (1.0 + (-logits[0]).exp());
                } else {
                    let max = logits.iter().cloned().fold(f64::MIN, f64::max);
                    let mut z = 0.0;
                    for (p, &l) in probs.iter_mut().zip(&logits) {
                        *p = (l - max).exp();
                        z += *p;
                    }
                    for p in probs.iter_mut() {
                        *p /= z;
                    }
                }
                let y = targets.row(i);
                let mut dlogit = vec![0.0; classes];
                for c in 0..classes {
                    dlogit[c] = (probs[c] - y[c]) * scale;
                }

                for c in 0..classes {
                    if dlogit[c] == 0.0 {
                        continue;
                    }
                    gb2[c] += dlogit[c];
                    let grow = &mut gw2[c * inp.len()..(c + 1) * inp.len()];
                    for (g, &v) in grow.iter_mut().zip(inp) {
                        *g += dlogit[c] * v;
                    }
                }
                if let Some(w1) = clf.w1.as_ref() {
                    // Backprop through tanh hidden layer.
                    let mut dh = vec![0.0; hidden];
                    clf.w2.matvec_t_acc(&dlogit, &mut dh);
                    for (k, d) in dh.iter_mut().enumerate() {
                        *d *= 1.0 - hid[k] * hid[k];
                    }
                    for k in 0..hidden {
                        if dh[k] == 0.0 {
                            continue;
                        }
                        gb1[k] += dh[k];
                        let grow = &mut gw1[k * f_dim..(k + 1) * f_dim];
                        for (g, &v) in grow.iter_mut().zip(x) {
                            *g += dh[k] * v;
                        }
                    }
                    let _ = w1;
                }
            }

            if let Some(w1) = clf.w1.as_mut() {
                opt_w1.step(w1.data_mut(), &gw1, spec.learning_rate);
                opt_b1.step(&mut clf.b1, &gb1, spec.learning_rate);
            }
            opt_w2.step(clf.w2.data_mut(), &gw2, spec.learning_rate);
            opt_b2.step(&mut clf.b2, &gb2, spec.learning_rate);
        }
    }
    Ok(clf)
}
