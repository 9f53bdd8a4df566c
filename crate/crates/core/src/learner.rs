//! The model family every selection method trains and scores.
//!
//! Selection code only talks to the [`Learner`] trait: fit on a (re)weighted
//! subsample, evaluate on the target. [`LearnerSpec`] implements it for least
//! squares and logistic regression.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::linalg::{self, Matrix};
use crate::{Error, Result};

/// Relative threshold on the diagonal of R below which a column counts as
/// linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    LeastSquares,
    Logistic,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::LeastSquares => "least-squares",
            Family::Logistic => "logistic",
        }
    }

    pub fn metric(self) -> Metric {
        match self {
            Family::LeastSquares => Metric::Mse,
            Family::Logistic => Metric::ErrorRate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerSpec {
    pub family: Family,
    pub intercept: bool,
    /// Ridge penalty used only when the design (or Newton system) is rank deficient.
    pub ridge_epsilon: f64,
    /// Newton iteration cap (logistic only).
    pub max_iters: usize,
    /// Newton step-size tolerance (logistic only).
    pub tolerance: f64,
}

impl LearnerSpec {
    pub fn least_squares() -> Self {
        LearnerSpec {
            family: Family::LeastSquares,
            intercept: true,
            ridge_epsilon: 1e-10,
            max_iters: 100,
            tolerance: 1e-10,
        }
    }

    pub fn logistic() -> Self {
        LearnerSpec {
            family: Family::Logistic,
            ..Self::least_squares()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge_epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "ridge_epsilon",
                reason: "must be nonnegative",
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                reason: "must be at least 1",
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    ErrorRate,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::ErrorRate => "error-rate",
        }
    }
}

/// A target loss. Lower is better for both metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub metric: Metric,
}

impl LossValue {
    pub fn mse(value: f64) -> Self {
        LossValue {
            value,
            metric: Metric::Mse,
        }
    }

    pub fn error_rate(value: f64) -> Self {
        LossValue {
            value,
            metric: Metric::ErrorRate,
        }
    }

    /// `1 - error rate`; `None` for regression losses.
    pub fn accuracy(&self) -> Option<f64> {
        match self.metric {
            Metric::ErrorRate => Some(1.0 - self.value),
            Metric::Mse => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub family: Family,
    pub intercept: bool,
    /// Intercept first when present, then one coefficient per feature.
    pub coefficients: Vec<f64>,
    /// The ridge fallback was needed.
    pub ridge_used: bool,
    /// Newton reached the tolerance (always true for least squares).
    pub converged: bool,
    /// Negative log-likelihood after each accepted Newton step, starting from zero
    /// coefficients. Empty for least squares.
    pub objective_trace: Vec<f64>,
}

impl FittedModel {
    pub fn n_features(&self) -> usize {
        self.coefficients.len() - usize::from(self.intercept)
    }

    /// Linear predictor `x * coefficients`.
    pub fn linear_predictor(&self, features: &Matrix) -> Result<Vec<f64>> {
        if features.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                context: "feature count",
                expected: self.n_features(),
                found: features.ncols(),
            });
        }
        let (bias, slopes) = if self.intercept {
            (self.coefficients[0], &self.coefficients[1..])
        } else {
            (0.0, &self.coefficients[..])
        };
        Ok(features.rows_iter().map(|r| bias + linalg::dot(r, slopes)).collect())
    }

    /// Regression predictions, or class-1 probabilities for logistic models.
    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        let eta = self.linear_predictor(features)?;
        Ok(match self.family {
            Family::LeastSquares => eta,
            Family::Logistic => eta.into_iter().map(sigmoid).collect(),
        })
    }
}

/// Fit/evaluate contract used by the selection methods.
pub trait Learner {
    type Model;

    fn fit(&self, features: &Matrix, response: &[f64]) -> Result<Self::Model>;

    fn evaluate(&self, model: &Self::Model, features: &Matrix, response: &[f64]) -> Result<LossValue>;

    /// The metric that [`Learner::evaluate`] reports.
    fn metric(&self) -> Metric;
}

impl Learner for LearnerSpec {
    type Model = FittedModel;

    fn fit(&self, features: &Matrix, response: &[f64]) -> Result<FittedModel> {
        fit(self, features, response)
    }

    fn evaluate(&self, model: &FittedModel, features: &Matrix, response: &[f64]) -> Result<LossValue> {
        evaluate_on(model, features, response)
    }

    fn metric(&self) -> Metric {
        self.family.metric()
    }
}

pub fn fit(spec: &LearnerSpec, features: &Matrix, response: &[f64]) -> Result<FittedModel> {
    spec.validate()?;
    if features.nrows() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if features.nrows() != response.len() {
        return Err(Error::DimensionMismatch {
            context: "response length",
            expected: features.nrows(),
            found: response.len(),
        });
    }
    let design = if spec.intercept {
        features.with_intercept()
    } else {
        features.clone()
    };
    match spec.family {
        Family::LeastSquares => fit_least_squares(spec, &design, response),
        Family::Logistic => fit_logistic(spec, &design, response),
    }
}

fn fit_least_squares(spec: &LearnerSpec, design: &Matrix, response: &[f64]) -> Result<FittedModel> {
    let qr = linalg::PivotedQr::new(design, response, RANK_TOLERANCE)?;
    let full_rank = qr.rank() == design.ncols();
    let (coefficients, ridge_used) = if full_rank || spec.ridge_epsilon == 0.0 {
        (qr.basic_solution(), false)
    } else {
        // ridge on the rank-truncated triangular system
        let (reduced, rhs) = qr.truncated_system();
        (ridge_solve(&reduced, &rhs, spec.ridge_epsilon)?, true)
    };
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::Degenerate("least-squares coefficients are not finite"));
    }
    Ok(FittedModel {
        family: Family::LeastSquares,
        intercept: spec.intercept,
        coefficients,
        ridge_used,
        converged: true,
        objective_trace: Vec::new(),
    })
}

/// Solves `min ||a x - b||^2 + eps ||x||^2` as the stacked system `[a; sqrt(eps) I] x = [b; 0]`.
fn ridge_solve(a: &Matrix, b: &[f64], eps: f64) -> Result<Vec<f64>> {
    let p = a.ncols();
    let mut stacked = Matrix::zeros(a.nrows() + p, p);
    for i in 0..a.nrows() {
        stacked.row_mut(i).copy_from_slice(a.row(i));
    }
    let root = libm::sqrt(eps);
    for j in 0..p {
        stacked.set(a.nrows() + j, j, root);
    }
    let mut rhs = b.to_vec();
    rhs.resize(a.nrows() + p, 0.0);
    Ok(linalg::lstsq(&stacked, &rhs, 0.0)?.coefficients)
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + libm::exp(-eta))
    } else {
        let e = libm::exp(eta);
        e / (1.0 + e)
    }
}

/// `log(1 + exp(eta))` without overflow.
fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + libm::log1p(libm::exp(-libm::fabs(eta)))
}

fn negative_log_likelihood(design: &Matrix, response: &[f64], theta: &[f64]) -> f64 {
    design
        .rows_iter()
        .zip(response)
        .map(|(r, &y)| {
            let eta = linalg::dot(r, theta);
            softplus(eta) - y * eta
        })
        .sum()
}

const MAX_HALVINGS: usize = 40;

/// Damped Newton-Raphson on the logistic negative log-likelihood.
fn fit_logistic(spec: &LearnerSpec, design: &Matrix, response: &[f64]) -> Result<FittedModel> {
    if let Some((row, &value)) = response
        .iter()
        .enumerate()
        .find(|(_, &y)| y != 0.0 && y != 1.0)
    {
        return Err(Error::NonBinaryLabel { row, value });
    }
    let p = design.ncols();
    let mut theta = vec![0.0; p];
    let mut objective = negative_log_likelihood(design, response, &theta);
    let mut trace = vec![objective];
    let mut ridge_used = false;
    let mut converged = false;

    for _ in 0..spec.max_iters {
        let mut gradient = vec![0.0; p];
        // upper triangle, row-major
        let mut upper = vec![0.0; p * p];
        for (r, &y) in design.rows_iter().zip(response) {
            let mu = sigmoid(linalg::dot(r, &theta));
            let w = mu * (1.0 - mu);
            for (j, &rj) in r.iter().enumerate() {
                gradient[j] += (mu - y) * rj;
                let wr = w * rj;
                for (h, &rl) in upper[j * p + j..(j + 1) * p].iter_mut().zip(&r[j..]) {
                    *h += wr * rl;
                }
            }
        }
        for j in 0..p {
            for l in 0..j {
                upper[j * p + l] = upper[l * p + j];
            }
        }
        let hessian = Matrix::from_vec(p, p, upper)?;

        let solution = linalg::lstsq(&hessian, &gradient, RANK_TOLERANCE)?;
        let step = if solution.rank < p && spec.ridge_epsilon > 0.0 {
            ridge_used = true;
            let mut damped = hessian.clone();
            for j in 0..p {
                damped.set(j, j, damped.get(j, j) + spec.ridge_epsilon);
            }
            linalg::lstsq(&damped, &gradient, 0.0)?.coefficients
        } else {
            solution.coefficients
        };

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t - scale * s).collect();
            let value = negative_log_likelihood(design, response, &candidate);
            if value.is_finite() && value <= objective {
                accepted = Some((candidate, value));
                break;
            }
            scale *= 0.5;
        }
        let Some((candidate, value)) = accepted else {
            // no descent along the Newton direction: stationary to working precision
            converged = true;
            break;
        };
        let moved = step.iter().map(|s| libm::fabs(scale * s)).fold(0.0, f64::max);
        theta = candidate;
        objective = value;
        trace.push(objective);
        if moved < spec.tolerance {
            converged = true;
            break;
        }
    }

    Ok(FittedModel {
        family: Family::Logistic,
        intercept: spec.intercept,
        coefficients: theta,
        ridge_used,
        converged,
        objective_trace: trace,
    })
}

pub fn evaluate(model: &FittedModel, target: &Dataset) -> Result<LossValue> {
    evaluate_on(model, target.features(), target.response())
}

/// Mean squared error for regression; misclassification rate at probability
/// threshold 0.5 for logistic models.
pub fn evaluate_on(model: &FittedModel, features: &Matrix, response: &[f64]) -> Result<LossValue> {
    if features.nrows() == 0 {
        return Err(Error::EmptyTarget);
    }
    if features.nrows() != response.len() {
        return Err(Error::DimensionMismatch {
            context: "response length",
            expected: features.nrows(),
            found: response.len(),
        });
    }
    let predictions = model.predict(features)?;
    let n = response.len() as f64;
    Ok(match model.family {
        Family::LeastSquares => LossValue::mse(
            predictions
                .iter()
                .zip(response)
                .map(|(p, y)| (p - y) * (p - y))
                .sum::<f64>()
                / n,
        ),
        Family::Logistic => LossValue::error_rate(
            predictions
                .iter()
                .zip(response)
                .filter(|(&p, &y)| (p >= 0.5) != (y == 1.0))
                .count() as f64
                / n,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_intercept() -> LearnerSpec {
        LearnerSpec {
            intercept: false,
            ..LearnerSpec::least_squares()
        }
    }

    #[test]
    fn exact_interpolation() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap();
        let model = fit(&no_intercept(), &x, &[1.0, 3.0]).unwrap();
        assert!((model.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((model.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(!model.ridge_used);
    }

    #[test]
    fn intercept_column_is_prepended() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let model = fit(&LearnerSpec::least_squares(), &x, &[1.0, 3.0, 5.0]).unwrap();
        assert!((model.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((model.coefficients[1] - 2.0).abs() < 1e-12);
        let loss = evaluate_on(&model, &x, &[1.0, 3.0, 5.0]).unwrap();
        assert!(loss.value < 1e-24);
    }

    #[test]
    fn duplicate_column_uses_ridge() {
        let x = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        let model = fit(&no_intercept(), &x, &[2.0, 4.0, 6.0]).unwrap();
        assert!(model.ridge_used);
        // minimum-norm solution splits the slope evenly
        assert!((model.coefficients[0] - 1.0).abs() < 1e-6);
        assert!((model.coefficients[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_zero_model_mse() {
        let model = FittedModel {
            family: Family::LeastSquares,
            intercept: true,
            coefficients: vec![0.0, 0.0],
            ridge_used: false,
            converged: true,
            objective_trace: Vec::new(),
        };
        let x = Matrix::from_rows(&[[3.0], [4.0]]).unwrap();
        let loss = evaluate_on(&model, &x, &[1.0, -1.0]).unwrap();
        assert_eq!(loss, LossValue::mse(1.0));
        let wide = Matrix::zeros(2, 2);
        assert!(matches!(
            evaluate_on(&model, &wide, &[1.0, -1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_training_set() {
        let x = Matrix::zeros(0, 2);
        assert_eq!(
            fit(&LearnerSpec::least_squares(), &x, &[]).unwrap_err(),
            Error::EmptyTrainingSet
        );
    }

    #[test]
    fn logistic_rejects_non_binary() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert_eq!(
            fit(&LearnerSpec::logistic(), &x, &[0.0, 0.5]).unwrap_err(),
            Error::NonBinaryLabel { row: 1, value: 0.5 }
        );
    }

    #[test]
    fn logistic_classifies_overlapping_classes() {
        let x = Matrix::from_rows(&[[-2.0], [-1.0], [-0.5], [0.5], [0.2], [1.0], [2.0], [-0.2]]).unwrap();
        let y = [0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0];
        let model = fit(&LearnerSpec::logistic(), &x, &y).unwrap();
        assert!(model.converged);
        for w in model.objective_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(model.coefficients[1] > 0.0);
        let test = Matrix::from_rows(&[[-3.0], [3.0]]).unwrap();
        let loss = evaluate_on(&model, &test, &[0.0, 1.0]).unwrap();
        assert_eq!(loss.value, 0.0);
        assert_eq!(loss.accuracy(), Some(1.0));
    }

    #[test]
    fn logistic_separable_data_stays_finite() {
        let x = Matrix::from_rows(&[[-2.0], [-1.0], [1.0], [2.0]]).unwrap();
        let model = fit(&LearnerSpec::logistic(), &x, &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(model.coefficients.iter().all(|c| c.is_finite()));
        let loss = evaluate_on(&model, &x, &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(loss.value, 0.0);
    }
}
