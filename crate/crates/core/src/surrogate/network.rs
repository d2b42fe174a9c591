use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::dataset::{BendSample, N_INPUTS};
use super::normalizer::Normalizer;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Input slices of the feature vector fed to each branch: field, moduli,
/// lengths, cross-section.
pub const BRANCHES: [(&str, usize, usize); 4] = [("fc_mt", 0, 1), ("fc_e", 1, 4), ("fc_l", 4, 7), ("fc_cs", 7, 8)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }
}

/// Fully connected layer with row-major `outputs × inputs` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn init(name: &str, inputs: usize, outputs: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Self {
        let bound = (1.0 / inputs as f64).sqrt();
        let weights = (0..inputs * outputs).map(|_| rng.gen_range(-bound..=bound)).collect();
        let bias = (0..outputs).map(|_| rng.gen_range(-bound..=bound)).collect();
        Dense {
            name: name.to_string(),
            inputs,
            outputs,
            activation,
            weights,
            bias,
        }
    }

    fn forward_into(&self, x: &[f64], y: &mut Vec<f64>) {
        y.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias[o];
            y.push(self.activation.apply(z));
        }
    }

    /// Accumulates parameter gradients given the layer input `x`, output `y`
    /// and `dy = ∂L/∂y`; writes `∂L/∂x` into `dx`.
    fn backward(&self, x: &[f64], y: &[f64], dy: &[f64], grad: &mut DenseGrad, dx: &mut Vec<f64>) {
        dx.clear();
        dx.resize(self.inputs, 0.0);
        for o in 0..self.outputs {
            let dz = dy[o] * self.activation.derivative_from_output(y[o]);
            if dz == 0.0 {
                continue;
            }
            grad.bias[o] += dz;
            let base = o * self.inputs;
            for i in 0..self.inputs {
                grad.weights[base + i] += dz * x[i];
                dx[i] += dz * self.weights[base + i];
            }
        }
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != self.inputs * self.outputs || self.bias.len() != self.outputs {
            return Err(Error::State(format!("layer {} has inconsistent shapes", self.name)));
        }
        if self.weights.iter().chain(&self.bias).any(|v| !v.is_finite()) {
            return Err(Error::State(format!("layer {} has non-finite weights", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseGrad {
    fn zeros_like(layer: &Dense) -> Self {
        DenseGrad {
            weights: vec![0.0; layer.weights.len()],
            bias: vec![0.0; layer.bias.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub branch_width: usize,
    pub fusion_widths: Vec<usize>,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            branch_width: 8,
            fusion_widths: vec![16],
        }
    }
}

/// Multi-branch regression network: four per-input branches, concatenation,
/// fusion layers and a scalar linear output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub format_version: u32,
    pub seed: u64,
    pub architecture: Architecture,
    pub branches: Vec<Dense>,
    pub fusion: Vec<Dense>,
    pub output: Dense,
    pub normalizer: Option<Normalizer>,
}

/// Per-sample activations kept for backpropagation.
#[derive(Debug, Default)]
pub(crate) struct Trace {
    input: [f64; N_INPUTS],
    branch_out: Vec<Vec<f64>>,
    concat: Vec<f64>,
    fusion_out: Vec<Vec<f64>>,
    output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Gradients {
    pub branches: Vec<DenseGrad>,
    pub fusion: Vec<DenseGrad>,
    pub output: DenseGrad,
}

impl Gradients {
    pub fn zeros(model: &SurrogateModel) -> Self {
        Gradients {
            branches: model.branches.iter().map(DenseGrad::zeros_like).collect(),
            fusion: model.fusion.iter().map(DenseGrad::zeros_like).collect(),
            output: DenseGrad::zeros_like(&model.output),
        }
    }

    pub fn clear(&mut self) {
        for g in self.iter_mut() {
            g.fill(0.0);
        }
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.branches
            .iter_mut()
            .chain(self.fusion.iter_mut())
            .chain(std::iter::once(&mut self.output))
            .flat_map(|g| [&mut g.weights, &mut g.bias])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.branches
            .iter()
            .chain(self.fusion.iter())
            .chain(std::iter::once(&self.output))
            .flat_map(|g| [&g.weights, &g.bias])
    }
}

impl SurrogateModel {
    pub fn new(seed: u64) -> Self {
        Self::with_architecture(seed, Architecture::default())
    }

    pub fn with_architecture(seed: u64, architecture: Architecture) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = architecture.branch_width;
        let branches: Vec<Dense> = BRANCHES
            .iter()
            .map(|&(name, lo, hi)| Dense::init(name, hi - lo, w, Activation::Tanh, &mut rng))
            .collect();
        let mut width = w * BRANCHES.len();
        let mut fusion = Vec::with_capacity(architecture.fusion_widths.len());
        for (i, &out) in architecture.fusion_widths.iter().enumerate() {
            fusion.push(Dense::init(
                &format!("fusion{i}"),
                width,
                out,
                Activation::Tanh,
                &mut rng,
            ));
            width = out;
        }
        let output = Dense::init("output", width, 1, Activation::Linear, &mut rng);
        SurrogateModel {
            format_version: MODEL_FORMAT_VERSION,
            seed,
            architecture,
            branches,
            fusion,
            output,
            normalizer: None,
        }
    }

    pub fn fit_normalizer(&mut self, train: &[BendSample]) -> Result<()> {
        self.normalizer = Some(Normalizer::fit(train)?);
        Ok(())
    }

    pub fn normalizer(&self) -> Result<&Normalizer> {
        self.normalizer
            .as_ref()
            .ok_or_else(|| Error::State("model normalizer has not been fitted".to_string()))
    }

    /// Predicted coefficient `ã` in 1/m for field `mt` (T), moduli `e` (Pa),
    /// lengths `l` (m) and cross-section `cs` (m).
    pub fn forward(&self, mt: f64, e: [f64; 3], l: [f64; 3], cs: f64) -> Result<f64> {
        let norm = self.normalizer()?;
        let raw = [mt, e[0], e[1], e[2], l[0], l[1], l[2], cs];
        let mut trace = Trace::default();
        let t = self.forward_normalized(&norm.normalize_inputs(&raw), &mut trace);
        Ok(norm.denormalize_target(t))
    }

    pub fn predict_sample(&self, s: &BendSample) -> Result<f64> {
        self.forward(s.mt, s.e, s.l, s.cs)
    }

    /// Output in normalized target units for already-normalized inputs.
    pub(crate) fn forward_normalized(&self, x: &[f64; N_INPUTS], trace: &mut Trace) -> f64 {
        trace.input = *x;
        trace.branch_out.resize_with(self.branches.len(), Vec::new);
        trace.concat.clear();
        for (b, (layer, &(_, lo, hi))) in self.branches.iter().zip(BRANCHES.iter()).enumerate() {
            layer.forward_into(&x[lo..hi], &mut trace.branch_out[b]);
            trace.concat.extend_from_slice(&trace.branch_out[b]);
        }
        trace.fusion_out.resize_with(self.fusion.len(), Vec::new);
        for i in 0..self.fusion.len() {
            let (done, rest) = trace.fusion_out.split_at_mut(i);
            let input = if i == 0 { &trace.concat } else { &done[i - 1] };
            self.fusion[i].forward_into(input, &mut rest[0]);
        }
        let last = trace.fusion_out.last().unwrap_or(&trace.concat);
        self.output.forward_into(last, &mut trace.output);
        trace.output[0]
    }

    /// Adds `d_out · ∂output/∂params` to `grad` for the sample in `trace`.
    pub(crate) fn backward(&self, trace: &Trace, d_out: f64, grad: &mut Gradients) {
        let mut dx = Vec::new();
        let last = trace.fusion_out.last().unwrap_or(&trace.concat);
        self.output
            .backward(last, &trace.output, &[d_out], &mut grad.output, &mut dx);
        for i in (0..self.fusion.len()).rev() {
            let input = if i == 0 {
                &trace.concat
            } else {
                &trace.fusion_out[i - 1]
            };
            let dy = std::mem::take(&mut dx);
            self.fusion[i].backward(input, &trace.fusion_out[i], &dy, &mut grad.fusion[i], &mut dx);
        }
        let mut offset = 0;
        let mut scratch = Vec::new();
        for (b, (layer, &(_, lo, hi))) in self.branches.iter().zip(BRANCHES.iter()).enumerate() {
            let dy = &dx[offset..offset + layer.outputs];
            layer.backward(
                &trace.input[lo..hi],
                &trace.branch_out[b],
                dy,
                &mut grad.branches[b],
                &mut scratch,
            );
            offset += layer.outputs;
        }
    }

    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.branches
            .iter_mut()
            .chain(self.fusion.iter_mut())
            .chain(std::iter::once(&mut self.output))
            .flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    /// All weights and biases, layer by layer (weights before bias).
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in self
            .branches
            .iter()
            .chain(&self.fusion)
            .chain(std::iter::once(&self.output))
        {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_flat_parameters(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::Argument(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for p in self.params_mut() {
            let n = p.len();
            p.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// Network output for normalized inputs, in normalized target units.
    pub fn output_normalized(&self, x: &[f64; N_INPUTS]) -> f64 {
        self.forward_normalized(x, &mut Trace::default())
    }

    /// Output and its gradient with respect to [`Self::flat_parameters`].
    pub fn output_gradient(&self, x: &[f64; N_INPUTS]) -> (f64, Vec<f64>) {
        let mut trace = Trace::default();
        let y = self.forward_normalized(x, &mut trace);
        let mut grad = Gradients::zeros(self);
        self.backward(&trace, 1.0, &mut grad);
        (y, grad.iter().flatten().copied().collect())
    }

    /// Mean L1 loss over `samples` (normalized units) and its parameter gradient.
    pub fn l1_loss_gradient(&self, samples: &[BendSample]) -> Result<(f64, Vec<f64>)> {
        let norm = self.normalizer()?;
        if samples.is_empty() {
            return Err(Error::Argument("empty sample set".to_string()));
        }
        let scale = 1.0 / samples.len() as f64;
        let mut trace = Trace::default();
        let mut grad = Gradients::zeros(self);
        let mut loss = 0.0;
        for s in samples {
            let r = self.forward_normalized(&norm.normalize_inputs(&s.features()), &mut trace)
                - norm.normalize_target(s.a_hat);
            loss += r.abs();
            self.backward(&trace, r.signum() * scale, &mut grad);
        }
        Ok((loss * scale, grad.iter().flatten().copied().collect()))
    }

    pub fn parameter_count(&self) -> usize {
        self.branches
            .iter()
            .chain(&self.fusion)
            .chain(std::iter::once(&self.output))
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::State(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.branches.len() != BRANCHES.len() {
            return Err(Error::State(format!(
                "expected 4 branches, got {}",
                self.branches.len()
            )));
        }
        let mut width = 0;
        for (layer, &(name, lo, hi)) in self.branches.iter().zip(BRANCHES.iter()) {
            layer.check()?;
            if layer.inputs != hi - lo {
                return Err(Error::State(format!("branch {name} expects {} inputs", hi - lo)));
            }
            width += layer.outputs;
        }
        for layer in self.fusion.iter().chain(std::iter::once(&self.output)) {
            layer.check()?;
            if layer.inputs != width {
                return Err(Error::State(format!(
                    "layer {} takes {} inputs but receives {width}",
                    layer.name, layer.inputs
                )));
            }
            width = layer.outputs;
        }
        if width != 1 {
            return Err(Error::State("output layer must be scalar".to_string()));
        }
        if let Some(n) = &self.normalizer {
            n.check()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SurrogateModel = serde_json::from_str(text).map_err(|e| Error::json("model file", e))?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
