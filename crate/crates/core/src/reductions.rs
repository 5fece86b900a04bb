//! Reductions from kernel classifiers to ball problems and back.
//!
//! A 2-norm soft-margin SVM with an added bias regularizer has a dual that
//! is exactly a minimum-enclosing-ball dual over an augmented feature map:
//! append the label and a scaled per-point indicator coordinate to each
//! (implicitly lifted) input. The augmented inner product works out to
//! `ℓᵢℓⱼ (K(pᵢ,pⱼ) + 1) + δᵢⱼ/C`, which has a constant diagonal whenever the
//! base kernel does — precisely the condition the ball machinery needs.
//! Anomaly-detection variants are the same trick with fewer terms: SVDD uses
//! the kernel unchanged, the one-class problem pins every label to +1 and
//! drops the bias coordinate.
//!
//! Solving the ball problem yields simplex weights `x`; the classifier is
//! recovered from them alone: bias `b = Σᵢ xᵢ ℓᵢ`, margin `ρ = xᵀK̃x` (the
//! squared center norm of the ball), slacks `ξᵢ = xᵢ/C`, and the decision
//! value of a fresh input `f(p) = Σᵢ xᵢ ℓᵢ (K(pᵢ, p) + 1)`. These formulas
//! are exercised against explicitly constructed feature vectors and the
//! stationarity conditions of the primal problem in the tests below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meb::Ball;
use crate::point_space::{Kernel, Label, PointId, PointSpace, RawPoint};

/// A binary classification instance with a 2-norm slack penalty.
#[derive(Debug, Clone)]
pub struct SvmProblem {
    pub points: Vec<RawPoint>,
    pub kernel: Kernel,
    /// Slack penalty; larger values approach the hard-margin classifier.
    pub c: f64,
}

impl SvmProblem {
    pub fn new(points: Vec<RawPoint>, kernel: Kernel, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "penalty C must be positive and finite, got {c}"
            )));
        }
        let mut has_pos = false;
        let mut has_neg = false;
        for p in &points {
            match p.label {
                Some(Label::Positive) => has_pos = true,
                Some(Label::Negative) => has_neg = true,
                None => {
                    return Err(Error::InvalidProblem(format!(
                        "point {} has no label",
                        p.id
                    )))
                }
            }
        }
        if !(has_pos && has_neg) {
            return Err(Error::InvalidProblem(
                "training needs at least one point of each label".into(),
            ));
        }
        Ok(SvmProblem { points, kernel, c })
    }
}

/// Lifts a labeled 2-norm SVM instance into the space whose minimum
/// enclosing ball solves it. The returned space's inner product is
/// `K̃(pᵢ,pⱼ) = ℓᵢℓⱼ (K(pᵢ,pⱼ) + 1) + δᵢⱼ/C`, with constant diagonal
/// `c + 1 + 1/C` for a kernel of constant self-similarity `c`.
pub fn svm2norm_to_meb(problem: &SvmProblem) -> Result<PointSpace> {
    PointSpace::augmented_svm(problem.points.clone(), problem.kernel, problem.c)
}

/// Lifts an unlabeled point set into the space whose minimum enclosing ball
/// is the smallest kernel-feature-space sphere around the data (the
/// hard-margin description problem). The inner product is the kernel itself.
pub fn svdd_to_meb(points: Vec<RawPoint>, kernel: Kernel) -> Result<PointSpace> {
    PointSpace::svdd(points, kernel)
}

/// Lifts an unlabeled point set into the ball form of the one-class
/// classifier with 2-norm slacks: every label is fixed to +1 and the bias
/// coordinate is dropped, leaving `dot = K(pᵢ,pⱼ) + δᵢⱼ/C`.
pub fn oneclass_to_meb(points: Vec<RawPoint>, kernel: Kernel, c: f64) -> Result<PointSpace> {
    PointSpace::one_class(points, kernel, c)
}

/// One training point that carries positive weight in the solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportVector {
    pub id: PointId,
    /// Simplex weight from the ball solution.
    pub x: f64,
    pub label: Label,
    /// The raw input, kept so the classifier evaluates without the dataset.
    pub p: Vec<f64>,
}

/// A trained kernel classifier recovered from a ball solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub kernel: Kernel,
    #[serde(rename = "C")]
    pub c: f64,
    pub support: Vec<SupportVector>,
    /// Bias term, `Σᵢ xᵢ ℓᵢ`.
    pub b: f64,
    /// Margin value, `xᵀK̃x`.
    pub rho: f64,
}

impl Classifier {
    /// Slack values implied by the weights, one per support vector.
    pub fn slacks(&self) -> Vec<f64> {
        self.support.iter().map(|sv| sv.x / self.c).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.support.first().map_or(0, |sv| sv.p.len())
    }
}

/// Recovers the classifier from a ball solved over (a subset of) the
/// problem's lift. Weights below the solver's pruning floor are dropped;
/// whatever remains forms the support set.
pub fn extract_classifier(problem: &SvmProblem, ball: &Ball) -> Result<Classifier> {
    let mut support = Vec::new();
    let mut b = 0.0;
    for (&id, &x) in ball.support().iter().zip(ball.weights()) {
        if x <= 0.0 {
            continue;
        }
        let point = problem
            .points
            .iter()
            .find(|p| p.id == id)
            .ok_or(Error::UnknownPoint(id))?;
        let label = point.label.ok_or_else(|| {
            Error::InvalidProblem(format!("point {id} has no label"))
        })?;
        b += x * label.sign();
        support.push(SupportVector {
            id,
            x,
            label,
            p: point.x.clone(),
        });
    }
    if support.is_empty() {
        return Err(Error::InvalidSolution(
            "ball solution has no positive weights".into(),
        ));
    }
    Ok(Classifier {
        kernel: problem.kernel,
        c: problem.c,
        support,
        b,
        rho: ball.center_quad(),
    })
}

/// Decision value `f(p) = Σᵢ xᵢ ℓᵢ (K(pᵢ, p) + 1)`; classify by sign.
pub fn predict(classifier: &Classifier, p: &[f64]) -> Result<f64> {
    let expected = classifier.input_dim();
    if p.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: p.len(),
        });
    }
    let mut f = 0.0;
    for sv in &classifier.support {
        f += sv.x * sv.label.sign() * (classifier.kernel.eval(&sv.p, p) + 1.0);
    }
    Ok(f)
}
