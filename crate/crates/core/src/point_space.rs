//! Points and the inner-product geometry they live in.
//!
//! Every optimization in this crate runs against a [`PointSpace`]: an indexed
//! set of points together with a rule for taking inner products between them.
//! Three geometries are supported:
//!
//! * [`PointSpace::explicit`] — plain Euclidean vectors, `dot(i,j) = s_i·s_j`.
//! * [`PointSpace::augmented_svm`] — the kernel space in which training a
//!   two-norm soft-margin SVM is a minimum-enclosing-ball problem. For a base
//!   kernel `K` with constant diagonal, labels `l` in `{-1,+1}` and penalty
//!   `C`:  `dot(i,j) = l_i*l_j*(K(p_i,p_j) + 1) + delta_ij/C`. The `+1` term
//!   carries the bias; the `delta_ij/C` term carries the squared slacks.
//! * [`PointSpace::svdd`] — kernelized support vector data description;
//!   `dot(i,j) = K(p_i,p_j)` directly.
//!
//! [`PointSpace::one_class`] builds the augmented geometry with all labels
//! fixed to `+1` and the bias term dropped (`dot = K + delta_ij/C`), which is
//! the unbiased one-class variant of the same reduction.
//!
//! All distances are derived from `dot` alone, so downstream code never needs
//! coordinates: for a ball with weights `w` over support points,
//! `dist2(i) = dot(i,i) - 2*sum_j w_j*dot(i,j) + sum_{j,l} w_j*w_l*dot(j,l)`.
//!
//! The kernelized geometries require a constant kernel diagonal (`K(p,p)`
//! equal for all points); this is checked at construction to 1e-9 and
//! rejected otherwise. The Gaussian kernel satisfies it identically; the
//! linear kernel satisfies it only for norm-equalized inputs.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meb::Ball;

/// Index of a point within a [`PointSpace`]. Ids are dense: `0..len`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl PointId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    /// `+1.0` or `-1.0`.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(format!("label must be +1 or -1, got {other}")),
        }
    }
}

/// An input point: id, raw coordinates, and an optional class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPoint {
    pub id: PointId,
    pub x: Vec<f64>,
    pub label: Option<Label>,
}

impl RawPoint {
    pub fn new(id: usize, x: Vec<f64>, label: Option<Label>) -> Self {
        RawPoint {
            id: PointId(id),
            x,
            label,
        }
    }
}

/// Kernel functions with a constant diagonal on valid inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    /// `K(p,q) = p·q`. Constant-diagonal only for norm-equalized inputs.
    Linear,
    /// `K(p,q) = exp(-gamma*|p-q|^2)`; diagonal is identically 1.
    Gaussian { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, p: &[f64], q: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot_coords(p, q),
            Kernel::Gaussian { gamma } => {
                let mut d2 = 0.0;
                for (a, b) in p.iter().zip(q) {
                    let d = a - b;
                    d2 += d * d;
                }
                (-gamma * d2).exp()
            }
        }
    }
}

fn dot_coords(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

/// Absolute spread allowed on the kernel diagonal at construction.
const DIAGONAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
enum SpaceKind {
    Explicit,
    /// Two-norm SVM geometry. `bias = false` drops the `+1` bias term
    /// (the unbiased one-class variant).
    Augmented {
        kernel: Kernel,
        c: f64,
        bias: bool,
    },
    Svdd {
        kernel: Kernel,
    },
}

/// An immutable, indexed point set with an inner-product rule.
///
/// Construction validates ids (dense `0..len`), coordinate dimensions and
/// finiteness, and (for kernelized spaces) the constant-diagonal requirement.
/// The struct is read-only afterwards and safe to share across threads.
#[derive(Debug, Clone)]
pub struct PointSpace {
    kind: SpaceKind,
    points: Vec<RawPoint>,
    dim: usize,
    /// Optional row-major cached Gram matrix; purely a speed knob.
    gram: Option<Vec<f64>>,
}

impl PointSpace {
    /// Plain Euclidean geometry over explicit coordinate vectors.
    pub fn explicit(points: Vec<RawPoint>) -> Result<Self> {
        Self::build(SpaceKind::Explicit, points)
    }

    /// Two-norm soft-margin SVM geometry. Every point must carry a label.
    pub fn augmented_svm(points: Vec<RawPoint>, kernel: Kernel, c: f64) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "penalty C must be positive and finite, got {c}"
            )));
        }
        if let Some(p) = points.iter().find(|p| p.label.is_none()) {
            return Err(Error::InvalidProblem(format!(
                "point {} has no label; the SVM geometry needs one per point",
                p.id
            )));
        }
        Self::build(
            SpaceKind::Augmented {
                kernel,
                c,
                bias: true,
            },
            points,
        )
    }

    /// Unbiased one-class geometry: labels forced to `+1`, bias term dropped,
    /// so `dot(i,j) = K(p_i,p_j) + delta_ij/C`.
    pub fn one_class(mut points: Vec<RawPoint>, kernel: Kernel, c: f64) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "penalty C must be positive and finite, got {c}"
            )));
        }
        for p in &mut points {
            p.label = Some(Label::Positive);
        }
        Self::build(
            SpaceKind::Augmented {
                kernel,
                c,
                bias: false,
            },
            points,
        )
    }

    /// Support vector data description geometry: `dot(i,j) = K(p_i,p_j)`.
    pub fn svdd(points: Vec<RawPoint>, kernel: Kernel) -> Result<Self> {
        Self::build(SpaceKind::Svdd { kernel }, points)
    }

    fn build(kind: SpaceKind, points: Vec<RawPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidProblem("point set is empty".into()));
        }
        let dim = points[0].x.len();
        if dim == 0 {
            return Err(Error::InvalidProblem("points have zero dimensions".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.id.index() != i {
                return Err(Error::InvalidProblem(format!(
                    "ids must be dense 0..{}; position {i} holds id {}",
                    points.len(),
                    p.id
                )));
            }
            if p.x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.x.len(),
                });
            }
            if p.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidProblem(format!(
                    "point {} has a non-finite coordinate",
                    p.id
                )));
            }
        }
        // Kernelized geometries require a constant kernel diagonal; the
        // reduction to an enclosing-ball problem is only exact in that case.
        if let Some(kernel) = match &kind {
            SpaceKind::Explicit => None,
            SpaceKind::Augmented { kernel, .. } | SpaceKind::Svdd { kernel } => Some(kernel),
        } {
            let diag: Vec<f64> = points.iter().map(|p| kernel.eval(&p.x, &p.x)).collect();
            let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo > DIAGONAL_TOLERANCE {
                return Err(Error::InvalidProblem(format!(
                    "kernel diagonal is not constant (spread {:.3e}); \
                     normalize the inputs or use a Gaussian kernel",
                    hi - lo
                )));
            }
        }
        Ok(PointSpace {
            kind,
            points,
            dim,
            gram: None,
        })
    }

    /// Precomputes the full Gram matrix. Semantically transparent: `dot`
    /// answers are the exact values that would be computed on the fly.
    pub fn with_cached_gram(mut self) -> Self {
        let n = self.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.dot_uncached(i, j);
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
        }
        self.gram = Some(gram);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Dimension of the raw input coordinates (not of the kernel feature space).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.kind, SpaceKind::Explicit)
    }

    /// All ids, in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.len()).map(PointId)
    }

    pub fn point(&self, id: PointId) -> Result<&RawPoint> {
        self.points.get(id.index()).ok_or(Error::UnknownPoint(id))
    }

    fn check_id(&self, id: PointId) -> Result<usize> {
        if id.index() < self.len() {
            Ok(id.index())
        } else {
            Err(Error::UnknownPoint(id))
        }
    }

    /// Inner product between points `i` and `j` under this space's rule.
    ///
    /// Arguments are canonicalized to `(min, max)` before evaluation so the
    /// result is bitwise symmetric in `i` and `j`.
    pub fn dot(&self, i: PointId, j: PointId) -> Result<f64> {
        let a = self.check_id(i)?;
        let b = self.check_id(j)?;
        Ok(self.dot_indexed(a.min(b), a.max(b)))
    }

    #[inline]
    fn dot_indexed(&self, a: usize, b: usize) -> f64 {
        if let Some(gram) = &self.gram {
            return gram[a * self.len() + b];
        }
        self.dot_uncached(a, b)
    }

    fn dot_uncached(&self, a: usize, b: usize) -> f64 {
        let pa = &self.points[a];
        let pb = &self.points[b];
        match &self.kind {
            SpaceKind::Explicit => dot_coords(&pa.x, &pb.x),
            SpaceKind::Augmented { kernel, c, bias } => {
                let base = kernel.eval(&pa.x, &pb.x);
                let sign = pa.label.map(Label::sign).unwrap_or(1.0)
                    * pb.label.map(Label::sign).unwrap_or(1.0);
                let offset = if *bias { 1.0 } else { 0.0 };
                let ridge = if a == b { 1.0 / c } else { 0.0 };
                sign * (base + offset) + ridge
            }
            SpaceKind::Svdd { kernel } => kernel.eval(&pa.x, &pb.x),
        }
    }

    /// Squared distance from point `i` to the center of `ball`.
    ///
    /// `dist2 = dot(i,i) - 2*sum_j w_j*dot(i,j) + sum_{j,l} w_j*w_l*dot(j,l)`;
    /// the quadratic term is the ball's cached center quadratic. The value can
    /// be a tiny negative for points numerically at the center.
    pub fn dist2(&self, i: PointId, ball: &Ball) -> Result<f64> {
        self.check_id(i)?;
        let mut cross = 0.0;
        for (&j, &w) in ball.support().iter().zip(ball.weights()) {
            cross += w * self.dot(i, j)?;
        }
        Ok(self.dot(i, i)? - 2.0 * cross + ball.center_quad())
    }

    /// `Some(dot(0,0))` when the diagonal `dot(i,i)` is constant to 1e-9,
    /// `None` otherwise. Kernelized spaces always satisfy this by
    /// construction; explicit spaces only when the points share a norm.
    pub fn constant_diagonal(&self) -> Option<f64> {
        let first = self.dot_indexed(0, 0);
        let mut lo = first;
        let mut hi = first;
        for i in 1..self.len() {
            let v = self.dot_indexed(i, i);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo <= DIAGONAL_TOLERANCE {
            Some(first)
        } else {
            None
        }
    }
}

/// Loads points from CSV: one row per point, feature columns first and, when
/// `labeled` is true, a final `+1`/`-1` label column. A header row is optional
/// and detected by a non-numeric field in the first row.
pub fn load_points_csv(path: impl AsRef<Path>, labeled: bool) -> Result<Vec<RawPoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;

    let mut points = Vec::new();
    let mut dim: Option<usize> = None;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(values) => values,
            // Only the first row may be non-numeric: it is taken as a header.
            Err(_) if points.is_empty() && dim.is_none() => continue,
            Err(_) => {
                return Err(Error::InvalidProblem(format!(
                    "row {}: non-numeric field",
                    row + 1
                )))
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "row {}: non-finite value",
                row + 1
            )));
        }
        let (features, label) = if labeled {
            if values.len() < 2 {
                return Err(Error::InvalidProblem(format!(
                    "row {}: labeled data needs at least one feature and a label",
                    row + 1
                )));
            }
            let (feats, tail) = values.split_at(values.len() - 1);
            let label = if tail[0] == 1.0 {
                Label::Positive
            } else if tail[0] == -1.0 {
                Label::Negative
            } else {
                return Err(Error::InvalidProblem(format!(
                    "row {}: label must be +1 or -1, got {}",
                    row + 1,
                    tail[0]
                )));
            };
            (feats.to_vec(), Some(label))
        } else {
            (values, None)
        };
        match dim {
            None => dim = Some(features.len()),
            Some(d) if d != features.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: features.len(),
                })
            }
            Some(_) => {}
        }
        points.push(RawPoint::new(points.len(), features, label));
    }
    if points.is_empty() {
        return Err(Error::InvalidProblem("dataset has no data rows".into()));
    }
    Ok(points)
}
