//! Kriging with a constant trend: likelihood, fitting and prediction.

mod likelihood;
mod params;

pub use likelihood::{concentrated_log_likelihood, correlation_matrix, MAX_JITTER};
pub use params::{ParamLayout, LOG_THETA_BOUNDS};

use crate::error::{Error, Result};
use crate::kernels::{categorical_matrix, CategoricalKernelKind, ExponentPower, HyperparameterSet, KernelEvaluator};
use crate::linalg::{dot, Cholesky, Mat};
use crate::optimizer::{multistart, SearchConfig, StartLog};
use crate::scalar::Scalar;
use crate::space::{Dataset, DesignSpace, MixedPoint};
use likelihood::{profile, PairCache, Profile};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub n_starts: usize,
    /// Likelihood evaluations per start; `None` means 500 · (number of hyperparameters).
    pub max_evals: Option<usize>,
    /// Initial diagonal jitter added to R; escalated ×10 up to [`MAX_JITTER`] when needed.
    pub jitter: f64,
    pub seed: u64,
    pub initial_step: f64,
    pub final_step: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        let s = SearchConfig::default();
        Self {
            n_starts: 10,
            max_evals: None,
            jitter: 1e-10,
            seed: 0,
            initial_step: s.initial_step,
            final_step: s.final_step,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidSpec("n_starts must be at least 1".into()));
        }
        if !(self.jitter > 0.0 && self.jitter <= MAX_JITTER) {
            return Err(Error::InvalidSpec(format!("jitter must lie in (0, {MAX_JITTER:e}]")));
        }
        self.search().validate()
    }

    fn search(&self) -> SearchConfig {
        SearchConfig {
            initial_step: self.initial_step,
            final_step: self.final_step,
            max_evals: self.max_evals,
            seed: self.seed,
        }
    }
}

/// A fitted (or explicitly parameterized) GP.
///
/// Inputs are mapped to the unit box and targets standardized before the
/// correlation matrix and likelihood are formed; μ̂, σ̂² and predictions are
/// reported in the original target units.
#[derive(Clone, Debug)]
pub struct GpModel<T> {
    dataset: Dataset<T>,
    scaled: Dataset<T>,
    kind: CategoricalKernelKind,
    p: ExponentPower,
    flat: Vec<T>,
    hyper: HyperparameterSet<T>,
    evaluator: KernelEvaluator<T>,
    y_shift: T,
    y_scale: T,
    prof: Profile<T>,
    log_likelihood: T,
    starts: Vec<StartLog>,
}

/// Normalized inputs and standardized targets, plus the target shift/scale.
fn scale_dataset<T: Scalar>(dataset: &Dataset<T>) -> (Dataset<T>, T, T) {
    let space = dataset.space();
    let points = dataset.points().iter().map(|w| space.normalize_unchecked(w)).collect();
    let y = dataset.targets();
    let n = T::c(y.len() as f64);
    let shift = y.iter().copied().sum::<T>() / n;
    let var = y.iter().map(|&v| (v - shift) * (v - shift)).sum::<T>() / n;
    let scale = if var > T::zero() { var.sqrt() } else { T::one() };
    let targets = y.iter().map(|&v| (v - shift) / scale).collect();
    (Dataset::from_parts_unchecked(space.clone(), points, targets), shift, scale)
}

/// Maximizes the concentrated likelihood over the flat hyperparameter box
/// with a multistart local search.
pub fn fit<T: Scalar>(
    dataset: &Dataset<T>,
    kind: CategoricalKernelKind,
    p: ExponentPower,
    config: &FitConfig,
) -> Result<GpModel<T>> {
    config.validate()?;
    let (scaled, _, _) = scale_dataset(dataset);
    let layout = ParamLayout::new(dataset.space(), kind);
    let cache = PairCache::new(scaled.points(), p);
    let y = scaled.targets();
    let jitter = T::c(config.jitter);
    let objective = |flat: &[T]| -> Result<T> {
        let h = layout.unpack(flat)?;
        let cat = h
            .theta_cat
            .iter()
            .map(|m| categorical_matrix(kind, m, h.epsilon))
            .collect::<Result<Vec<_>>>()?;
        let r = cache.correlation(&h, &cat)?;
        Ok(profile(&r, y, jitter)?.value)
    };
    let best = multistart(objective, &layout.bounds(), config.n_starts, &config.search())?;
    let mut model = GpModel::from_flat(dataset.clone(), kind, p, best.point, config.jitter)?;
    debug_assert_eq!(model.log_likelihood, best.value);
    model.log_likelihood = best.value;
    model.starts = best.starts;
    Ok(model)
}

impl<T: Scalar> GpModel<T> {
    /// Model at flat (optimizer-coordinate) hyperparameters.
    pub fn from_flat(dataset: Dataset<T>, kind: CategoricalKernelKind, p: ExponentPower, flat: Vec<T>, jitter: f64) -> Result<Self> {
        let layout = ParamLayout::new(dataset.space(), kind);
        let hyper = layout.unpack(&flat)?;
        Self::build(dataset, hyper, flat, p, jitter)
    }

    /// Model at explicit hyperparameters, skipping the likelihood maximization.
    pub fn with_hyperparameters(dataset: Dataset<T>, hyper: HyperparameterSet<T>, p: ExponentPower, jitter: f64) -> Result<Self> {
        let flat = ParamLayout::new(dataset.space(), hyper.kind).pack(&hyper)?;
        Self::build(dataset, hyper, flat, p, jitter)
    }

    fn build(dataset: Dataset<T>, hyper: HyperparameterSet<T>, flat: Vec<T>, p: ExponentPower, jitter: f64) -> Result<Self> {
        if !(jitter > 0.0) {
            return Err(Error::InvalidSpec("jitter must be positive".into()));
        }
        hyper.check_space(dataset.space())?;
        let (scaled, y_shift, y_scale) = scale_dataset(&dataset);
        let evaluator = KernelEvaluator::new(&hyper, p)?;
        let r = PairCache::new(scaled.points(), p).correlation(&hyper, evaluator.categorical_matrices())?;
        let prof = profile(&r, scaled.targets(), T::c(jitter))?;
        Ok(Self {
            kind: hyper.kind,
            log_likelihood: prof.value,
            dataset,
            scaled,
            p,
            flat,
            hyper,
            evaluator,
            y_shift,
            y_scale,
            prof,
            starts: Vec::new(),
        })
    }

    pub fn dataset(&self) -> &Dataset<T> {
        &self.dataset
    }

    /// Training data as the likelihood sees it: unit-box inputs, standardized targets.
    pub fn scaled_dataset(&self) -> &Dataset<T> {
        &self.scaled
    }

    pub fn space(&self) -> &DesignSpace {
        self.dataset.space()
    }

    pub fn kind(&self) -> CategoricalKernelKind {
        self.kind
    }

    pub fn exponent(&self) -> ExponentPower {
        self.p
    }

    pub fn hyperparameters(&self) -> &HyperparameterSet<T> {
        &self.hyper
    }

    pub fn flat_parameters(&self) -> &[T] {
        &self.flat
    }

    pub fn n_hyper(&self) -> usize {
        self.flat.len()
    }

    /// Trend μ̂ in target units.
    pub fn mu_hat(&self) -> T {
        self.y_shift + self.y_scale * self.prof.mu
    }

    /// Process variance σ̂² in target units.
    pub fn sigma2_hat(&self) -> T {
        self.y_scale * self.y_scale * self.prof.sigma2
    }

    /// Jitter actually added to R (after any escalation).
    pub fn jitter(&self) -> T {
        self.prof.jitter
    }

    /// Concentrated log-likelihood on the scaled data.
    pub fn log_likelihood(&self) -> T {
        self.log_likelihood
    }

    /// Cholesky factor of R(Θ*) + jitter·I.
    pub fn cholesky(&self) -> &Cholesky<T> {
        &self.prof.chol
    }

    /// R_i(Θ*_i) for every categorical variable.
    pub fn categorical_matrices(&self) -> &[Mat<T>] {
        self.evaluator.categorical_matrices()
    }

    /// Per-start outcomes of the fit (empty for models not produced by [`fit`]).
    pub fn start_log(&self) -> &[StartLog] {
        &self.starts
    }

    /// r(w) = [k(w, w¹), …, k(w, wⁿ)].
    ///
    /// The jitter is part of the kernel as a white-noise term, so an entry
    /// whose training input equals `w` exactly also carries it; predictions
    /// at training inputs then reproduce the training targets.
    pub fn correlation_vector(&self, w: &MixedPoint<T>) -> Result<Vec<T>> {
        let wn = self.space().normalize(w)?;
        self.scaled
            .points()
            .iter()
            .map(|t| {
                let k = self.evaluator.eval(&wn, t)?;
                Ok(if *t == wn { k + self.prof.jitter } else { k })
            })
            .collect()
    }

    pub fn predict_mean(&self, w: &MixedPoint<T>) -> Result<T> {
        let r = self.correlation_vector(w)?;
        Ok(self.mean_from(&r))
    }

    pub fn predict_variance(&self, w: &MixedPoint<T>) -> Result<T> {
        let r = self.correlation_vector(w)?;
        Ok(self.variance_from(&r))
    }

    /// (mean, variance) at `w`.
    pub fn predict(&self, w: &MixedPoint<T>) -> Result<(T, T)> {
        let r = self.correlation_vector(w)?;
        Ok((self.mean_from(&r), self.variance_from(&r)))
    }

    /// (mean, variance) at each point, evaluated in parallel.
    pub fn predict_batch(&self, ws: &[MixedPoint<T>]) -> Result<Vec<(T, T)>> {
        ws.par_iter().map(|w| self.predict(w)).collect()
    }

    fn mean_from(&self, r: &[T]) -> T {
        self.y_shift + self.y_scale * (self.prof.mu + dot(r, &self.prof.alpha))
    }

    /// σ̂²[1 − rᵀR⁻¹r + (1 − 1ᵀR⁻¹r)² / 1ᵀR⁻¹1], clamped at 0.
    fn variance_from(&self, r: &[T]) -> T {
        let v = self.prof.chol.solve_lower(r);
        let u = T::one() - dot(&self.prof.rinv_one, r);
        let s = T::one() - dot(&v, &v) + u * u / self.prof.one_rinv_one;
        (self.sigma2_hat() * s).max(T::zero())
    }

    fn document(&self) -> ModelDocument {
        let f = |v: T| v.to_f64_lossy();
        let pt = |w: &MixedPoint<T>| MixedPoint {
            continuous: w.continuous.iter().map(|&v| f(v)).collect(),
            integer: w.integer.iter().map(|&v| f(v)).collect(),
            levels: w.levels.clone(),
        };
        ModelDocument {
            format: MODEL_FORMAT.to_string(),
            space: self.space().clone(),
            kind: self.kind,
            p: self.p,
            epsilon: f(self.hyper.epsilon),
            jitter: f(self.prof.jitter),
            theta: self.flat.iter().map(|&v| f(v)).collect(),
            mu_hat: f(self.mu_hat()),
            sigma2_hat: f(self.sigma2_hat()),
            log_likelihood: f(self.log_likelihood),
            points: self.dataset.points().iter().map(pt).collect(),
            targets: self.dataset.targets().iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.document())?)
    }

    /// Rebuilds a model from [`to_json`](Self::to_json) output; the Cholesky
    /// factor is recomputed from the stored Θ* and jitter.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(s)?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Parse(format!("unknown model format {:?}", doc.format)));
        }
        let pt = |w: &MixedPoint<f64>| MixedPoint {
            continuous: w.continuous.iter().map(|&v| T::c(v)).collect(),
            integer: w.integer.iter().map(|&v| T::c(v)).collect(),
            levels: w.levels.clone(),
        };
        let dataset = Dataset::new(doc.space, doc.points.iter().map(pt).collect(), doc.targets.iter().map(|&v| T::c(v)).collect())?;
        let flat: Vec<T> = doc.theta.iter().map(|&v| T::c(v)).collect();
        let hyper = ParamLayout::new(dataset.space(), doc.kind)
            .unpack(&flat)?
            .with_epsilon(T::c(doc.epsilon));
        let mut model = Self::build(dataset, hyper, flat, doc.p, doc.jitter)?;
        model.log_likelihood = T::c(doc.log_likelihood);
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

const MODEL_FORMAT: &str = "mixgp-model-v1";

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    space: DesignSpace,
    kind: CategoricalKernelKind,
    p: ExponentPower,
    epsilon: f64,
    jitter: f64,
    /// Flat optimizer coordinates (log θ, angles) of Θ*.
    theta: Vec<f64>,
    mu_hat: f64,
    sigma2_hat: f64,
    log_likelihood: f64,
    points: Vec<MixedPoint<f64>>,
    targets: Vec<f64>,
}
