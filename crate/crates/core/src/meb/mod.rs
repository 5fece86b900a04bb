//! Minimum enclosing balls over a [`PointSpace`].
//!
//! The primal problem is `min r2 s.t. |z - s_i|^2 <= r2` over the chosen
//! points; its dual maximizes `sum_i dot(i,i)*x_i - sum_{i,j} x_i*x_j*dot(i,j)`
//! over the probability simplex. The optimal value is the squared radius and
//! the optimal weights place the center at `z = sum_i x_i s_i`. Everything
//! here works through inner products only, so kernelized geometries solve the
//! same code path as explicit vectors.
//!
//! [`solve_meb`] is the production solver (Frank-Wolfe with away steps);
//! [`meb_oracle`] is an independent exact reference used by tests and by
//! result verification.

mod oracle;
mod solver;

pub use oracle::meb_oracle;
pub use solver::solve_meb;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point_space::{PointId, PointSpace};

/// Iterative solver knobs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative duality-gap target.
    pub tol: f64,
    /// Iteration cap; exceeding it is an error carrying the best iterate.
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// Weights below this are dropped from solver output.
pub(crate) const WEIGHT_PRUNE: f64 = 1e-12;

/// A ball described in dual form: simplex weights over support points.
///
/// `r2` is the dual objective at the stored weights and `center_quad` is the
/// quadratic term `sum_{j,l} w_j*w_l*dot(j,l)` (the squared norm of the
/// center). For solver output the weights are near-optimal, so `r2` is the
/// squared radius; [`Ball::from_weights`] also accepts arbitrary feasible
/// weights, in which case `r2` is just the objective value there.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    support: Vec<PointId>,
    weights: Vec<f64>,
    r2: f64,
    quad: f64,
}

impl Ball {
    /// Builds a ball from explicit simplex weights over distinct support ids,
    /// computing the objective value and center quadratic from the space.
    ///
    /// Weights must be `>= -1e-12` (tiny negatives are clamped to zero) and
    /// sum to 1 within 1e-9.
    pub fn from_weights(
        space: &PointSpace,
        support: Vec<PointId>,
        weights: Vec<f64>,
    ) -> Result<Ball> {
        if support.len() != weights.len() {
            return Err(Error::InvalidSolution(format!(
                "{} support ids vs {} weights",
                support.len(),
                weights.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::InvalidSolution("empty support".into()));
        }
        let mut seen = support.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSolution("duplicate support id".into()));
        }
        let mut weights = weights;
        let mut sum = 0.0;
        for w in &mut weights {
            if *w < -1e-12 || !w.is_finite() {
                return Err(Error::InvalidSolution(format!("weight {w} out of range")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
            sum += *w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSolution(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        let mut quad = 0.0;
        let mut linear = 0.0;
        for (a, (&i, &wi)) in support.iter().zip(&weights).enumerate() {
            linear += wi * space.dot(i, i)?;
            for (&j, &wj) in support.iter().zip(&weights).skip(a + 1) {
                quad += 2.0 * wi * wj * space.dot(i, j)?;
            }
            quad += wi * wi * space.dot(i, i)?;
        }
        let r2 = (linear - quad).max(0.0);
        Ok(Ball {
            support,
            weights,
            r2,
            quad,
        })
    }

    pub(crate) fn from_parts(support: Vec<PointId>, weights: Vec<f64>, r2: f64, quad: f64) -> Ball {
        Ball {
            support,
            weights,
            r2,
            quad,
        }
    }

    /// Support point ids (ascending, no duplicates).
    pub fn support(&self) -> &[PointId] {
        &self.support
    }

    /// Simplex weights aligned with [`Ball::support`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Squared radius (dual objective at the stored weights).
    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// Radius.
    pub fn radius(&self) -> f64 {
        self.r2.max(0.0).sqrt()
    }

    /// Squared norm of the center, `sum_{j,l} w_j*w_l*dot(j,l)`.
    pub fn center_quad(&self) -> f64 {
        self.quad
    }

    /// Norm of the center. For kernel geometries this is the feature-space
    /// norm; for explicit geometries the Euclidean norm of the center vector.
    pub fn center_norm(&self) -> f64 {
        self.quad.max(0.0).sqrt()
    }

    /// The center as an explicit coordinate vector. Only meaningful for
    /// explicit spaces; kernel geometries have no coordinate center.
    pub fn explicit_center(&self, space: &PointSpace) -> Result<Vec<f64>> {
        if !space.is_explicit() {
            return Err(Error::InvalidProblem(
                "explicit center requires an explicit space".into(),
            ));
        }
        let mut center = vec![0.0; space.dim()];
        for (&id, &w) in self.support.iter().zip(&self.weights) {
            for (c, v) in center.iter_mut().zip(&space.point(id)?.x) {
                *c += w * v;
            }
        }
        Ok(center)
    }
}

/// Sorts ids ascending and removes duplicates.
pub(crate) fn unique_ids(ids: &[PointId]) -> Vec<PointId> {
    let mut out = ids.to_vec();
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_space::RawPoint;

    fn space(coords: &[&[f64]]) -> PointSpace {
        PointSpace::explicit(
            coords
                .iter()
                .enumerate()
                .map(|(i, x)| RawPoint::new(i, x.to_vec(), None))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn from_weights_computes_objective_and_quad() {
        let s = space(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let ball = Ball::from_weights(&s, vec![PointId(0), PointId(1)], vec![0.5, 0.5]).unwrap();
        assert!((ball.r2() - 1.0).abs() < 1e-12);
        assert!((ball.center_quad() - 1.0).abs() < 1e-12);
        assert_eq!(ball.explicit_center(&s).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn from_weights_rejects_bad_input() {
        let s = space(&[&[0.0], &[1.0]]);
        assert!(Ball::from_weights(&s, vec![PointId(0)], vec![0.9]).is_err());
        assert!(Ball::from_weights(&s, vec![PointId(0), PointId(0)], vec![0.5, 0.5]).is_err());
        assert!(Ball::from_weights(&s, vec![PointId(0), PointId(1)], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn tiny_negative_weight_is_clamped() {
        let s = space(&[&[0.0], &[1.0]]);
        let ball =
            Ball::from_weights(&s, vec![PointId(0), PointId(1)], vec![1.0 + 1e-13, -1e-13])
                .unwrap();
        assert_eq!(ball.weights()[1], 0.0);
    }
}
