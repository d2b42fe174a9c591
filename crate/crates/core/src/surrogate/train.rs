use serde::{Deserialize, Serialize};

use super::dataset::BendSample;
use super::network::{Gradients, SurrogateModel, Trace};
use super::normalizer::Normalizer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub learning_rate: f64,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            learning_rate: 1e-3,
            epochs: 5000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean L1 loss (normalized target units) at the start of each epoch.
    pub loss_history: Vec<f64>,
    /// Mean L1 loss after the last update.
    pub final_train_loss: f64,
    pub final_train_mse: f64,
    pub test_mse: Option<f64>,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl TrainReport {
    pub fn initial_loss(&self) -> f64 {
        self.loss_history[0]
    }

    pub fn best_loss(&self) -> f64 {
        self.loss_history.iter().copied().fold(self.final_train_loss, f64::min)
    }
}

/// In which units [`evaluate`] reports squared coefficient errors.
#[derive(Debug, Clone, Copy)]
pub enum CoefficientUnits<'a> {
    /// `(a − ã)/span` with the span of the given normalizer.
    Normalized(&'a Normalizer),
    /// 1/mm, as written to library and dataset files.
    PerMm,
}

/// Anything that maps a sample's inputs to a coefficient in 1/m.
pub trait Predictor {
    fn predict(&self, sample: &BendSample) -> Result<f64>;
}

impl Predictor for SurrogateModel {
    fn predict(&self, sample: &BendSample) -> Result<f64> {
        self.predict_sample(sample)
    }
}

impl<F: Fn(&BendSample) -> f64> Predictor for F {
    fn predict(&self, sample: &BendSample) -> Result<f64> {
        Ok(self(sample))
    }
}

pub fn evaluate<P: Predictor + ?Sized>(model: &P, dataset: &[BendSample], units: CoefficientUnits<'_>) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Argument("cannot evaluate on an empty dataset".to_string()));
    }
    let mut acc = 0.0;
    for s in dataset {
        let pred = model.predict(s)?;
        let err = match units {
            CoefficientUnits::Normalized(n) => n.normalize_target(s.a_hat) - n.normalize_target(pred),
            CoefficientUnits::PerMm => (s.a_hat - pred) * 1e-3,
        };
        acc += err * err;
    }
    Ok(acc / dataset.len() as f64)
}

impl SurrogateModel {
    /// Mean squared error in normalized-coefficient units.
    pub fn evaluate(&self, dataset: &[BendSample]) -> Result<f64> {
        evaluate(self, dataset, CoefficientUnits::Normalized(self.normalizer()?))
    }

    /// Full-batch Adam on the mean L1 loss in normalized target units.
    ///
    /// Fits the normalizer on `train` if none is set yet. `test` only feeds
    /// [`TrainReport::test_mse`].
    pub fn train(
        &mut self,
        train: &[BendSample],
        test: Option<&[BendSample]>,
        opts: &TrainOptions,
    ) -> Result<TrainReport> {
        if train.is_empty() {
            return Err(Error::Argument("training set is empty".to_string()));
        }
        if opts.epochs == 0 {
            return Err(Error::Argument("epochs must be at least 1".to_string()));
        }
        if !(opts.learning_rate > 0.0) {
            return Err(Error::Argument(format!(
                "learning rate must be positive, got {}",
                opts.learning_rate
            )));
        }
        if self.normalizer.is_none() {
            self.fit_normalizer(train)?;
        }
        let norm = self.normalizer()?.clone();
        let inputs: Vec<_> = train.iter().map(|s| norm.normalize_inputs(&s.features())).collect();
        let targets: Vec<f64> = train.iter().map(|s| norm.normalize_target(s.a_hat)).collect();

        let mut grad = Gradients::zeros(self);
        let mut m = Gradients::zeros(self);
        let mut v = Gradients::zeros(self);
        let mut trace = Trace::default();
        let mut history = Vec::with_capacity(opts.epochs);
        let scale = 1.0 / train.len() as f64;

        for epoch in 1..=opts.epochs {
            grad.clear();
            let mut loss = 0.0;
            for (x, &y) in inputs.iter().zip(&targets) {
                let r = self.forward_normalized(x, &mut trace) - y;
                loss += r.abs();
                let d = if r > 0.0 {
                    scale
                } else if r < 0.0 {
                    -scale
                } else {
                    0.0
                };
                if d != 0.0 {
                    self.backward(&trace, d, &mut grad);
                }
            }
            loss *= scale;
            if !loss.is_finite() {
                return Err(Error::Diverged(format!(
                    "L1 loss became {loss} at epoch {epoch} with learning rate {}; \
                     try a learning rate an order of magnitude smaller",
                    opts.learning_rate
                )));
            }
            history.push(loss);

            let bc1 = 1.0 - opts.beta1.powi(epoch as i32);
            let bc2 = 1.0 - opts.beta2.powi(epoch as i32);
            for (((p, g), mm), vv) in self.params_mut().zip(grad.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                for i in 0..p.len() {
                    mm[i] = opts.beta1 * mm[i] + (1.0 - opts.beta1) * g[i];
                    vv[i] = opts.beta2 * vv[i] + (1.0 - opts.beta2) * g[i] * g[i];
                    let m_hat = mm[i] / bc1;
                    let v_hat = vv[i] / bc2;
                    p[i] -= opts.learning_rate * m_hat / (v_hat.sqrt() + opts.epsilon);
                }
            }
        }

        let final_train_loss = inputs
            .iter()
            .zip(&targets)
            .map(|(x, &y)| (self.forward_normalized(x, &mut trace) - y).abs())
            .sum::<f64>()
            * scale;
        let final_train_mse = self.evaluate(train)?;
        let test_mse = match test {
            Some(t) if !t.is_empty() => Some(self.evaluate(t)?),
            _ => None,
        };
        Ok(TrainReport {
            loss_history: history,
            final_train_loss,
            final_train_mse,
            test_mse,
            epochs: opts.epochs,
            learning_rate: opts.learning_rate,
        })
    }
}
