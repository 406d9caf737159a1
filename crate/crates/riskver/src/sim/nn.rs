//! Dense feed-forward network inference for weight-file controllers.

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    /// Row-major weight matrix: `w[i]` holds the input weights of output `i`.
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub act: Activation,
}

/// Weights of a dense network, as stored in the JSON weights file
/// `{"layers": [{"w": [[...]], "b": [...], "act": "tanh"|"linear"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NnWeights {
    pub layers: Vec<Layer>,
}

impl NnWeights {
    /// Validates layer shapes: every weight row matches the layer input
    /// width, biases match the output width, layers chain, and the final
    /// activation is linear.
    pub fn new(layers: Vec<Layer>) -> Result<Self, SimError> {
        if layers.is_empty() {
            return Err(SimError::BadWeights(
                "network needs at least one layer".into(),
            ));
        }
        for (idx, layer) in layers.iter().enumerate() {
            if layer.w.is_empty() {
                return Err(SimError::BadWeights(format!("layer {idx} has no rows")));
            }
            let in_dim = layer.w[0].len();
            if in_dim == 0 {
                return Err(SimError::BadWeights(format!(
                    "layer {idx} has zero input width"
                )));
            }
            if layer.w.iter().any(|row| row.len() != in_dim) {
                return Err(SimError::BadWeights(format!(
                    "layer {idx} rows have uneven width"
                )));
            }
            if layer.b.len() != layer.w.len() {
                return Err(SimError::BadWeights(format!(
                    "layer {idx}: {} bias terms for {} rows",
                    layer.b.len(),
                    layer.w.len()
                )));
            }
            if idx > 0 && layers[idx - 1].w.len() != in_dim {
                return Err(SimError::BadWeights(format!(
                    "layer {idx} expects {in_dim} inputs but layer {} emits {}",
                    idx - 1,
                    layers[idx - 1].w.len()
                )));
            }
        }
        if layers.last().map(|l| l.act) != Some(Activation::Linear) {
            return Err(SimError::BadWeights(
                "final activation must be linear".into(),
            ));
        }
        Ok(Self { layers })
    }

    pub fn from_json_str(json: &str) -> Result<Self, SimError> {
        let raw: NnWeights =
            serde_json::from_str(json).map_err(|e| SimError::BadWeights(e.to_string()))?;
        Self::new(raw.layers)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weights serialize")
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w[0].len()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.w.len()).unwrap_or(0)
    }

    /// Sequential affine maps with activations; deterministic.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, SimError> {
        if input.len() != self.input_dim() {
            return Err(SimError::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut x = input.to_vec();
        for layer in &self.layers {
            let mut y = Vec::with_capacity(layer.w.len());
            for (row, b) in layer.w.iter().zip(&layer.b) {
                let mut acc = *b;
                for (w, v) in row.iter().zip(&x) {
                    acc += w * v;
                }
                y.push(match layer.act {
                    Activation::Tanh => acc.tanh(),
                    Activation::Linear => acc,
                });
            }
            x = y;
        }
        Ok(x)
    }
}
