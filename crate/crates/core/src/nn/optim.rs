use super::{Network, Scalar};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Optimizer {
    Sgd,
    #[default]
    Adam,
}

impl Optimizer {
    pub fn name(self) -> &'static str {
        match self {
            Optimizer::Sgd => "sgd",
            Optimizer::Adam => "adam",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sgd" => Some(Optimizer::Sgd),
            "adam" => Some(Optimizer::Adam),
            _ => None,
        }
    }
}

/// Per-parameter optimizer state for one network.
#[derive(Debug, Clone)]
pub struct OptimizerState<T> {
    kind: Optimizer,
    step: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(kind: Optimizer, net: &Network<T>) -> Self {
        let zeros: Vec<Vec<T>> = net
            .layers()
            .iter()
            .filter_map(|l| l.params())
            .map(|p| vec![T::zero(); p.values.len()])
            .collect();
        Self {
            kind,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// Applies one update from the accumulated gradients.
    pub fn apply(&mut self, net: &mut Network<T>, learning_rate: f64) {
        self.step += 1;
        let lr = T::cast(learning_rate);
        let params = net.layers_mut().iter_mut().filter_map(|l| l.params_mut());
        match self.kind {
            Optimizer::Sgd => {
                for p in params {
                    for (w, &g) in p.values.iter_mut().zip(&p.grads) {
                        *w -= lr * g;
                    }
                }
            }
            Optimizer::Adam => {
                let (b1, b2, eps) = (T::cast(BETA1), T::cast(BETA2), T::cast(EPSILON));
                let c1 = T::cast(1.0 - BETA1.powi(self.step));
                let c2 = T::cast(1.0 - BETA2.powi(self.step));
                for ((p, m), v) in params.zip(&mut self.m).zip(&mut self.v) {
                    for (((w, &g), m), v) in p.values.iter_mut().zip(&p.grads).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *m = b1 * *m + (T::one() - b1) * g;
                        *v = b2 * *v + (T::one() - b2) * g * g;
                        let m_hat = *m / c1;
                        let v_hat = *v / c2;
                        *w -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
    }
}
