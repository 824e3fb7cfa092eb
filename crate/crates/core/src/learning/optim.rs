use crate::scoring::Gradient;

/// SGD with heavy-ball momentum, per-epoch step decay and an L2 penalty.
///
/// The step size in epoch `e` is `lr * (1 - decay)^e`.
#[derive(Debug, Clone)]
pub struct Sgd {
    pub lr: f64,
    pub decay: f64,
    pub momentum: f64,
    pub l2: f64,
    velocity: Gradient,
}

impl Sgd {
    pub fn new(lr: f64, decay: f64, momentum: f64, l2: f64) -> Self {
        Sgd {
            lr,
            decay,
            momentum,
            l2,
            velocity: Vec::new(),
        }
    }

    pub fn rate(&self, epoch: usize) -> f64 {
        self.lr * (1.0 - self.decay).powi(epoch as i32)
    }

    /// One update of `params` along `grad + 2 * l2 * params`.
    pub fn step(&mut self, params: Vec<&mut [f64]>, grad: &Gradient, epoch: usize) {
        if self.velocity.len() != grad.len() {
            self.velocity = grad.iter().map(|g| vec![0.0; g.len()]).collect();
        }
        let rate = self.rate(epoch);
        for ((block, g), v) in params.into_iter().zip(grad).zip(&mut self.velocity) {
            for ((p, g), v) in block.iter_mut().zip(g).zip(v.iter_mut()) {
                *v = self.momentum * *v + g + 2.0 * self.l2 * *p;
                *p -= rate * *v;
            }
        }
    }
}
