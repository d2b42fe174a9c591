use serde::{Deserialize, Serialize};

use super::dataset::{BendSample, N_INPUTS};
use crate::error::{Error, Result};

/// Per-dimension min–max scaling to [0, 1], fitted on a training set.
///
/// A dimension that is constant over the training set keeps its offset and
/// uses a unit span, so it maps to 0 instead of dividing by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub input_min: Vec<f64>,
    pub input_max: Vec<f64>,
    pub target_min: f64,
    pub target_max: f64,
}

fn span(min: f64, max: f64) -> f64 {
    if max > min {
        max - min
    } else {
        1.0
    }
}

impl Normalizer {
    pub fn fit(samples: &[BendSample]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::Argument("cannot fit a normalizer on an empty set".to_string()))?;
        let mut input_min = first.features().to_vec();
        let mut input_max = input_min.clone();
        let mut target_min = first.a_hat;
        let mut target_max = first.a_hat;
        for s in &samples[1..] {
            for (i, v) in s.features().into_iter().enumerate() {
                input_min[i] = input_min[i].min(v);
                input_max[i] = input_max[i].max(v);
            }
            target_min = target_min.min(s.a_hat);
            target_max = target_max.max(s.a_hat);
        }
        Ok(Normalizer {
            input_min,
            input_max,
            target_min,
            target_max,
        })
    }

    pub fn normalize_inputs(&self, raw: &[f64; N_INPUTS]) -> [f64; N_INPUTS] {
        let mut out = [0.0; N_INPUTS];
        for i in 0..N_INPUTS {
            out[i] = (raw[i] - self.input_min[i]) / span(self.input_min[i], self.input_max[i]);
        }
        out
    }

    pub fn denormalize_input(&self, dim: usize, value: f64) -> f64 {
        value * span(self.input_min[dim], self.input_max[dim]) + self.input_min[dim]
    }

    pub fn normalize_target(&self, a: f64) -> f64 {
        (a - self.target_min) / self.target_span()
    }

    pub fn denormalize_target(&self, t: f64) -> f64 {
        t * self.target_span() + self.target_min
    }

    pub fn target_span(&self) -> f64 {
        span(self.target_min, self.target_max)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let ok = self.input_min.len() == N_INPUTS
            && self.input_max.len() == N_INPUTS
            && self.input_min.iter().chain(&self.input_max).all(|v| v.is_finite())
            && self.target_min.is_finite()
            && self.target_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::State("normalizer constants are malformed".to_string()))
        }
    }
}
