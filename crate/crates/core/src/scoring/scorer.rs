use ndarray::{ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Linear,
    Mlp,
}

/// A local scorer with all parameters stored in one flat vector.
///
/// `Linear`: `W f + b`, stored as `W` (row-major, `outputs x inputs`) then `b`.
/// `Mlp`: `W2 tanh(W1 f + b1) + b2`, stored as `W1, b1, W2, b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorer {
    pub kind: ScorerKind,
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub params: Vec<f64>,
}

fn glorot<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize, n: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.random_range(-limit..=limit)).collect()
}

impl Scorer {
    pub fn zeros(kind: ScorerKind, inputs: usize, hidden: usize, outputs: usize) -> Self {
        let mut s = Scorer {
            kind,
            inputs,
            hidden,
            outputs,
            params: Vec::new(),
        };
        s.params = vec![0.0; s.param_count()];
        s
    }

    pub fn linear(inputs: usize, outputs: usize) -> Self {
        Self::zeros(ScorerKind::Linear, inputs, 0, outputs)
    }

    pub fn mlp(inputs: usize, hidden: usize, outputs: usize) -> Self {
        Self::zeros(ScorerKind::Mlp, inputs, hidden, outputs)
    }

    /// Glorot-uniform weights, zero biases.
    pub fn random<R: Rng>(
        kind: ScorerKind,
        inputs: usize,
        hidden: usize,
        outputs: usize,
        rng: &mut R,
    ) -> Self {
        let mut s = Self::zeros(kind, inputs, hidden, outputs);
        match kind {
            ScorerKind::Linear => {
                let w = glorot(rng, inputs, outputs, inputs * outputs);
                s.params[..w.len()].copy_from_slice(&w);
            }
            ScorerKind::Mlp => {
                let w1 = glorot(rng, inputs, hidden, hidden * inputs);
                s.params[..w1.len()].copy_from_slice(&w1);
                let at = hidden * inputs + hidden;
                let w2 = glorot(rng, hidden, outputs, outputs * hidden);
                s.params[at..at + w2.len()].copy_from_slice(&w2);
            }
        }
        s
    }

    pub fn param_count(&self) -> usize {
        match self.kind {
            ScorerKind::Linear => self.outputs * self.inputs + self.outputs,
            ScorerKind::Mlp => {
                self.hidden * self.inputs + self.hidden + self.outputs * self.hidden + self.outputs
            }
        }
    }

    fn check_input(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.inputs {
            return Err(Error::contract(format!(
                "scorer expects {} features, got {}",
                self.inputs,
                features.len()
            )));
        }
        Ok(())
    }

    fn mlp_views(
        &self,
    ) -> (
        ArrayView2<'_, f64>,
        ArrayView1<'_, f64>,
        ArrayView2<'_, f64>,
        ArrayView1<'_, f64>,
    ) {
        let (h, n, o) = (self.hidden, self.inputs, self.outputs);
        let p = &self.params;
        let (w1, rest) = p.split_at(h * n);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(o * h);
        (
            ArrayView2::from_shape((h, n), w1).expect("shape"),
            ArrayView1::from(b1),
            ArrayView2::from_shape((o, h), w2).expect("shape"),
            ArrayView1::from(b2),
        )
    }

    fn hidden_activations(&self, f: ArrayView1<'_, f64>) -> Vec<f64> {
        let (w1, b1, _, _) = self.mlp_views();
        (w1.dot(&f) + b1).mapv(f64::tanh).to_vec()
    }

    /// Raw scores: 2 for an event scorer, 7 for a relation scorer.
    pub fn score(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check_input(features)?;
        let f = ArrayView1::from(features);
        let out = match self.kind {
            ScorerKind::Linear => {
                let (w, b) = self.params.split_at(self.outputs * self.inputs);
                let w = ArrayView2::from_shape((self.outputs, self.inputs), w).expect("shape");
                w.dot(&f) + ArrayView1::from(b)
            }
            ScorerKind::Mlp => {
                let h = self.hidden_activations(f);
                let (_, _, w2, b2) = self.mlp_views();
                w2.dot(&ArrayView1::from(&h[..])) + b2
            }
        };
        Ok(out.to_vec())
    }

    /// Backpropagates `upstream` (one weight per output score).
    ///
    /// Returns `(d/dparams, d/dfeatures)` of `upstream . score(features)`.
    pub fn gradient(&self, features: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_input(features)?;
        if upstream.len() != self.outputs {
            return Err(Error::contract(format!(
                "upstream gradient has {} entries, scorer has {} outputs",
                upstream.len(),
                self.outputs
            )));
        }
        let (n, o) = (self.inputs, self.outputs);
        let mut dparams = vec![0.0; self.param_count()];
        let mut dfeat = vec![0.0; n];
        match self.kind {
            ScorerKind::Linear => {
                let w = &self.params[..o * n];
                for (c, &g) in upstream.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    let row = c * n;
                    for i in 0..n {
                        dparams[row + i] += g * features[i];
                        dfeat[i] += g * w[row + i];
                    }
                    dparams[o * n + c] += g;
                }
            }
            ScorerKind::Mlp => {
                let h = self.hidden;
                let act = self.hidden_activations(ArrayView1::from(features));
                let (w1, _, w2, _) = self.mlp_views();
                // output layer
                let w2_at = h * n + h;
                let b2_at = w2_at + o * h;
                let mut dhidden = vec![0.0; h];
                for (c, &g) in upstream.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    for k in 0..h {
                        dparams[w2_at + c * h + k] += g * act[k];
                        dhidden[k] += g * w2[[c, k]];
                    }
                    dparams[b2_at + c] += g;
                }
                // tanh' = 1 - tanh^2
                for k in 0..h {
                    let dz = dhidden[k] * (1.0 - act[k] * act[k]);
                    if dz == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        dparams[k * n + i] += dz * features[i];
                        dfeat[i] += dz * w1[[k, i]];
                    }
                    dparams[h * n + k] += dz;
                }
            }
        }
        Ok((dparams, dfeat))
    }
}
