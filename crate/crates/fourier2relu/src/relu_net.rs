//! ReLU network container: layers of units with a final linear readout.
//!
//! A network with layers `f_1, ..., f_D` and readout `a` computes
//! `x -> <a, f_D(...f_1(x)...)>` where layer `i` maps `h` to the vector with
//! entries `ReLU(<w_ij, h> - t_ij)`. There is no bias on the readout; every
//! affine degree of freedom lives in the unit thresholds.

use serde::{Deserialize, Serialize};

/// Network file format version accepted by [`ReluNetwork::from_json`].
pub const FORMAT_VERSION: u32 = 1;

/// One layer: `weights[j]` is the incoming weight row of unit `j` and
/// `thresholds[j]` its activation threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub weights: Vec<Vec<f64>>,
    pub thresholds: Vec<f64>,
}

impl LayerSpec {
    /// Build a layer, checking shape consistency and finiteness.
    pub fn new(weights: Vec<Vec<f64>>, thresholds: Vec<f64>) -> Result<Self, NetError> {
        if weights.len() != thresholds.len() {
            return Err(NetError::ShapeMismatch {
                what: format!(
                    "layer has {} weight rows but {} thresholds",
                    weights.len(),
                    thresholds.len()
                ),
            });
        }
        if weights.is_empty() {
            return Err(NetError::ShapeMismatch {
                what: "layer must contain at least one unit".into(),
            });
        }
        let in_dim = weights[0].len();
        if in_dim == 0 {
            return Err(NetError::ShapeMismatch {
                what: "layer input dimension must be positive".into(),
            });
        }
        for (j, row) in weights.iter().enumerate() {
            if row.len() != in_dim {
                return Err(NetError::ShapeMismatch {
                    what: format!(
                        "unit {j} has weight row of length {}, expected {in_dim}",
                        row.len()
                    ),
                });
            }
            if row.iter().any(|w| !w.is_finite()) {
                return Err(NetError::NonFinite { where_: format!("weight row of unit {j}") });
            }
        }
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(NetError::NonFinite { where_: "thresholds".into() });
        }
        Ok(Self { weights, thresholds })
    }

    /// Number of units in this layer.
    pub fn n_units(&self) -> usize {
        self.thresholds.len()
    }

    /// Input dimension expected by this layer.
    pub fn input_dim(&self) -> usize {
        self.weights[0].len()
    }

    /// Apply the layer to an input vector of matching dimension.
    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.input_dim());
        self.weights
            .iter()
            .zip(&self.thresholds)
            .map(|(row, &t)| relu(dot(row, input) - t))
            .collect()
    }
}

/// A full network: input dimension, hidden layers, linear readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReluNetwork {
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
    pub readout: Vec<f64>,
}

impl ReluNetwork {
    /// Build a network, checking that layer dimensions chain correctly and
    /// the readout matches the final layer width.
    pub fn new(
        input_dim: usize,
        layers: Vec<LayerSpec>,
        readout: Vec<f64>,
    ) -> Result<Self, NetError> {
        if input_dim == 0 {
            return Err(NetError::ShapeMismatch { what: "input dimension must be positive".into() });
        }
        if layers.is_empty() {
            return Err(NetError::ShapeMismatch { what: "network must have at least one layer".into() });
        }
        let mut expect = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.input_dim() != expect {
                return Err(NetError::ShapeMismatch {
                    what: format!(
                        "layer {i} expects input dimension {}, previous width is {expect}",
                        layer.input_dim()
                    ),
                });
            }
            expect = layer.n_units();
        }
        if readout.len() != expect {
            return Err(NetError::ShapeMismatch {
                what: format!(
                    "readout has length {}, final layer width is {expect}",
                    readout.len()
                ),
            });
        }
        if readout.iter().any(|a| !a.is_finite()) {
            return Err(NetError::NonFinite { where_: "readout".into() });
        }
        Ok(Self { input_dim, layers, readout })
    }

    /// Number of layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Total number of ReLU units across all layers.
    pub fn unit_count(&self) -> usize {
        self.layers.iter().map(LayerSpec::n_units).sum()
    }

    /// Evaluate the network at `x`. Fails if `x` has the wrong dimension.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, NetError> {
        if x.len() != self.input_dim {
            return Err(NetError::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut h = self.layers[0].apply(x);
        for layer in &self.layers[1..] {
            h = layer.apply(&h);
        }
        Ok(dot(&self.readout, &h))
    }

    /// Serialize to a JSON string carrying a format version. Floats use the
    /// shortest decimal representation that round-trips bit-exactly.
    pub fn to_json(&self) -> String {
        let file = NetworkFile { format_version: FORMAT_VERSION, network: self.clone() };
        serde_json::to_string(&file).expect("network serialization cannot fail")
    }

    /// Parse a network from JSON, validating shapes and the format version.
    /// Syntax errors report the line and column of the failure.
    pub fn from_json(text: &str) -> Result<Self, NetError> {
        let file: NetworkFile = serde_json::from_str(text).map_err(|e| NetError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if file.format_version != FORMAT_VERSION {
            return Err(NetError::UnsupportedVersion { found: file.format_version });
        }
        // Re-validate through the constructors so hand-edited files cannot
        // smuggle inconsistent shapes or non-finite values.
        let ReluNetwork { input_dim, layers, readout } = file.network;
        let layers = layers
            .into_iter()
            .map(|l| LayerSpec::new(l.weights, l.thresholds))
            .collect::<Result<Vec<_>, _>>()?;
        ReluNetwork::new(input_dim, layers, readout)
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    format_version: u32,
    #[serde(flatten)]
    network: ReluNetwork,
}

/// Merge equal-depth subnetworks into one network computing the linear
/// combination `sum_s coeffs[s] * subnet_s(x)`. Layers are stacked
/// block-diagonally, so merged unit counts add exactly; the coefficients are
/// folded into the readout.
pub fn parallel_merge(subnets: &[ReluNetwork], coeffs: &[f64]) -> Result<ReluNetwork, NetError> {
    if subnets.is_empty() {
        return Err(NetError::ShapeMismatch { what: "parallel_merge of zero subnetworks".into() });
    }
    if subnets.len() != coeffs.len() {
        return Err(NetError::ShapeMismatch {
            what: format!("{} subnetworks but {} coefficients", subnets.len(), coeffs.len()),
        });
    }
    let depth = subnets[0].depth();
    let input_dim = subnets[0].input_dim;
    for (s, net) in subnets.iter().enumerate() {
        if net.depth() != depth {
            return Err(NetError::UnequalDepths {
                first: depth,
                offender: s,
                depth: net.depth(),
            });
        }
        if net.input_dim != input_dim {
            return Err(NetError::ShapeMismatch {
                what: format!(
                    "subnetwork {s} has input dimension {}, expected {input_dim}",
                    net.input_dim
                ),
            });
        }
    }

    let mut layers = Vec::with_capacity(depth);
    for i in 0..depth {
        let mut weights = Vec::new();
        let mut thresholds = Vec::new();
        if i == 0 {
            // First layer reads the shared input directly; no padding needed.
            for net in subnets {
                weights.extend(net.layers[0].weights.iter().cloned());
                thresholds.extend(net.layers[0].thresholds.iter().cloned());
            }
        } else {
            // Deeper layers read the concatenated previous layer; each
            // subnetwork's rows see only their own block.
            let prev_widths: Vec<usize> =
                subnets.iter().map(|n| n.layers[i - 1].n_units()).collect();
            let total_prev: usize = prev_widths.iter().sum();
            let mut offset = 0;
            for (net, &pw) in subnets.iter().zip(&prev_widths) {
                for row in &net.layers[i].weights {
                    let mut padded = vec![0.0; total_prev];
                    padded[offset..offset + pw].copy_from_slice(row);
                    weights.push(padded);
                }
                thresholds.extend(net.layers[i].thresholds.iter().cloned());
                offset += pw;
            }
        }
        layers.push(LayerSpec::new(weights, thresholds)?);
    }

    let mut readout = Vec::new();
    for (net, &c) in subnets.iter().zip(coeffs) {
        readout.extend(net.readout.iter().map(|a| c * a));
    }
    ReluNetwork::new(input_dim, layers, readout)
}

/// Dot product of two equal-length slices.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

#[inline]
pub(crate) fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Network construction, evaluation and serialization failures.
#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("input has dimension {got}, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("inconsistent network shape: {what}")]
    ShapeMismatch { what: String },
    #[error("non-finite value in {where_}")]
    NonFinite { where_: String },
    #[error("subnetwork {offender} has depth {depth}, expected {first} for a parallel merge")]
    UnequalDepths { first: usize, offender: usize, depth: usize },
    #[error("network file parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported network format version {found}, this build reads version {FORMAT_VERSION}")]
    UnsupportedVersion { found: u32 },
}
