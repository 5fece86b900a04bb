//! Frank-Wolfe solver with away steps for the simplex-constrained dual.
//!
//! Maximizes `f(x) = d'x - x'Gx` over the probability simplex, where
//! `G[i][j] = dot(i,j)` and `d = diag(G)`. Away steps give linear convergence
//! on this quadratic and actively zero out weights, which keeps the support
//! small. Termination uses the strong gap `max(toward_gap, away_gap)`, so at
//! exit every positive-weight point sits on the ball boundary to within the
//! tolerance.

use crate::error::{Error, Result};
use crate::meb::{unique_ids, Ball, SolverConfig, WEIGHT_PRUNE};
use crate::point_space::{PointId, PointSpace};

/// Solves the minimum enclosing ball of `ids` (duplicates allowed; they are
/// merged before solving). Deterministic: ties in direction selection go to
/// the smallest index, and the arithmetic has a fixed evaluation order.
pub fn solve_meb(space: &PointSpace, ids: &[PointId], config: &SolverConfig) -> Result<Ball> {
    if ids.is_empty() {
        return Err(Error::InvalidProblem(
            "cannot solve a ball over zero points".into(),
        ));
    }
    let ids = unique_ids(ids);
    let m = ids.len();
    if m == 1 {
        let quad = space.dot(ids[0], ids[0])?;
        return Ok(Ball::from_parts(ids, vec![1.0], 0.0, quad));
    }

    // Dense subset Gram matrix; m stays small in every caller (core-set sizes
    // plus a node's working set), so the quadratic memory is fine.
    let mut g = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let v = space.dot(ids[a], ids[b])?;
            g[a * m + b] = v;
            g[b * m + a] = v;
        }
    }
    let diag: Vec<f64> = (0..m).map(|a| g[a * m + a]).collect();

    // Start with uniform weights on the farthest pair (ties toward the
    // smallest index pair), the standard two-point initialization.
    let (mut pi, mut pj, mut best) = (0, 1, f64::NEG_INFINITY);
    for a in 0..m {
        for b in (a + 1)..m {
            let d2 = diag[a] + diag[b] - 2.0 * g[a * m + b];
            if d2 > best {
                best = d2;
                pi = a;
                pj = b;
            }
        }
    }
    let mut x = vec![0.0; m];
    x[pi] = 0.5;
    x[pj] = 0.5;

    // gx = G*x, s1 = d'x, s2 = x'Gx; all maintained incrementally and
    // refreshed periodically to bound drift.
    let mut gx: Vec<f64> = (0..m)
        .map(|a| 0.5 * g[a * m + pi] + 0.5 * g[a * m + pj])
        .collect();
    let mut s1 = 0.5 * diag[pi] + 0.5 * diag[pj];
    let mut s2 = 0.25 * (diag[pi] + 2.0 * g[pi * m + pj] + diag[pj]);

    let scale = diag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    // Absolute floor for the gap test: below this the gap is roundoff noise
    // (matters only for degenerate sets, e.g. coincident points).
    let gap_floor = f64::EPSILON * (1.0 + scale);

    let refresh = |x: &[f64], gx: &mut [f64], s1: &mut f64, s2: &mut f64| {
        for a in 0..m {
            let mut acc = 0.0;
            for b in 0..m {
                acc += g[a * m + b] * x[b];
            }
            gx[a] = acc;
        }
        *s1 = diag.iter().zip(x).map(|(d, w)| d * w).sum();
        *s2 = gx.iter().zip(x).map(|(v, w)| v * w).sum();
    };

    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..config.max_iter {
        iterations = iter;
        if iter > 0 && iter % 4096 == 0 {
            refresh(&x, &mut gx, &mut s1, &mut s2);
        }
        let f = s1 - s2;
        // Gradient g_a = d_a - 2*(Gx)_a; g'x = s1 - 2*s2.
        let gdotx = s1 - 2.0 * s2;
        let mut toward = 0;
        let mut toward_val = f64::NEG_INFINITY;
        let mut away = usize::MAX;
        let mut away_val = f64::INFINITY;
        for a in 0..m {
            let grad = diag[a] - 2.0 * gx[a];
            if grad > toward_val {
                toward_val = grad;
                toward = a;
            }
            if x[a] > 0.0 && grad < away_val {
                away_val = grad;
                away = a;
            }
        }
        let toward_gap = toward_val - gdotx;
        let away_gap = gdotx - away_val;
        let threshold = (config.tol * f.abs()).max(gap_floor);
        if toward_gap.max(away_gap) <= threshold {
            converged = true;
            break;
        }

        if toward_gap >= away_gap {
            // Toward step: x <- (1-t)x + t*e_s.
            let s = toward;
            let curv = diag[s] - 2.0 * gx[s] + s2; // dir'G dir for dir = e_s - x
            let mut t = if curv > 0.0 {
                (toward_gap / (2.0 * curv)).min(1.0)
            } else {
                1.0
            };
            if t <= 0.0 {
                t = 1.0;
            }
            let keep = 1.0 - t;
            let gx_s = gx[s];
            for a in 0..m {
                x[a] *= keep;
                gx[a] = keep * gx[a] + t * g[a * m + s];
            }
            x[s] += t;
            s2 = keep * keep * s2 + 2.0 * t * keep * gx_s + t * t * diag[s];
            s1 = keep * s1 + t * diag[s];
        } else {
            // Away step: x <- (1+t)x - t*e_v, capped so x_v stays nonnegative.
            let v = away;
            let curv = s2 - 2.0 * gx[v] + diag[v]; // dir'G dir for dir = x - e_v
            let t_max = if x[v] < 1.0 {
                x[v] / (1.0 - x[v])
            } else {
                // Whole mass on v: the away gap would be zero, handled above.
                0.0
            };
            let mut t = if curv > 0.0 {
                (away_gap / (2.0 * curv)).min(t_max)
            } else {
                t_max
            };
            if t <= 0.0 {
                t = t_max;
            }
            let grow = 1.0 + t;
            let drop = t >= t_max;
            let gx_v = gx[v];
            for a in 0..m {
                x[a] *= grow;
                gx[a] = grow * gx[a] - t * g[a * m + v];
            }
            x[v] -= t;
            if drop || x[v] < 0.0 {
                x[v] = 0.0;
            }
            s2 = grow * grow * s2 - 2.0 * t * grow * gx_v + t * t * diag[v];
            s1 = grow * s1 - t * diag[v];
        }
    }

    let ball = finish(space, &ids, &x)?;
    if converged {
        Ok(ball)
    } else {
        Err(Error::SolverFailure {
            iterations: iterations + 1,
            best: Box::new(ball),
        })
    }
}

/// Prunes negligible weights, renormalizes, and recomputes the objective and
/// center quadratic in a canonical order so identical id sets always produce
/// bitwise-identical balls.
fn finish(space: &PointSpace, ids: &[PointId], x: &[f64]) -> Result<Ball> {
    let mut support = Vec::new();
    let mut weights = Vec::new();
    let mut sum = 0.0;
    for (a, &w) in x.iter().enumerate() {
        if w >= WEIGHT_PRUNE {
            support.push(ids[a]);
            weights.push(w);
            sum += w;
        }
    }
    if support.is_empty() {
        // All mass pruned can only happen for pathological inputs; fall back
        // to the largest single weight.
        let a = x
            .iter()
            .enumerate()
            .max_by(|l, r| l.1.partial_cmp(r.1).unwrap())
            .map(|(a, _)| a)
            .unwrap_or(0);
        support.push(ids[a]);
        weights.push(1.0);
        sum = 1.0;
    }
    for w in &mut weights {
        *w /= sum;
    }
    Ball::from_weights(space, support, weights)
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

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn single_point_ball() {
        let s = space(&[&[3.0, -1.0]]);
        let ball = solve_meb(&s, &[PointId(0)], &cfg()).unwrap();
        assert_eq!(ball.r2(), 0.0);
        assert_eq!(ball.weights(), &[1.0]);
        assert_eq!(ball.support(), &[PointId(0)]);
    }

    #[test]
    fn two_point_ball_is_midpoint() {
        let s = space(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let ball = solve_meb(&s, &[PointId(0), PointId(1)], &cfg()).unwrap();
        assert!((ball.r2() - 1.0).abs() < 1e-9);
        let c = ball.explicit_center(&s).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-9 && c[1].abs() < 1e-9);
        assert!((ball.weights()[0] - 0.5).abs() < 1e-6);
        assert!((ball.weights()[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn equilateral_triangle_side_two() {
        let h = 3.0f64.sqrt();
        let s = space(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, h]]);
        let ball = solve_meb(&s, &[PointId(0), PointId(1), PointId(2)], &cfg()).unwrap();
        assert!((ball.r2() - 4.0 / 3.0).abs() < 1e-9, "r2 = {}", ball.r2());
    }

    #[test]
    fn duplicate_ids_are_merged() {
        let s = space(&[&[0.0], &[2.0]]);
        let ids = [PointId(0), PointId(0), PointId(1), PointId(0)];
        let ball = solve_meb(&s, &ids, &cfg()).unwrap();
        assert!((ball.r2() - 1.0).abs() < 1e-9);
        assert_eq!(ball.support(), &[PointId(0), PointId(1)]);
    }

    #[test]
    fn coincident_points_give_zero_radius() {
        let s = space(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let ball = solve_meb(&s, &[PointId(0), PointId(1), PointId(2)], &cfg()).unwrap();
        assert!(ball.r2().abs() < 1e-12);
    }

    #[test]
    fn interior_points_get_no_weight() {
        let s = space(&[&[-1.0, 0.0], &[1.0, 0.0], &[0.1, 0.05]]);
        let ball = solve_meb(&s, &[PointId(0), PointId(1), PointId(2)], &cfg()).unwrap();
        assert!(!ball.support().contains(&PointId(2)));
        assert!((ball.r2() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        // Regular pentagon: no diametral pair, so the optimum needs at least
        // three support points and cannot be reached from a two-point start
        // within two iterations at this tolerance.
        let coords: Vec<[f64; 2]> = (0..5)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
                [a.cos(), a.sin()]
            })
            .collect();
        let views: Vec<&[f64]> = coords.iter().map(|c| c.as_slice()).collect();
        let s = space(&views);
        let tight = SolverConfig {
            tol: 1e-10,
            max_iter: 2,
        };
        let ids: Vec<PointId> = (0..5).map(PointId).collect();
        match solve_meb(&s, &ids, &tight) {
            Err(Error::SolverFailure { iterations, best }) => {
                assert_eq!(iterations, 2);
                assert!(best.r2() > 0.0);
            }
            other => panic!("expected SolverFailure, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let s = space(&[&[0.0, 0.0], &[2.0, 0.1], &[1.0, 1.7], &[0.3, 0.9], &[1.5, -0.4]]);
        let ids: Vec<PointId> = (0..5).map(PointId).collect();
        let a = solve_meb(&s, &ids, &cfg()).unwrap();
        let b = solve_meb(&s, &ids, &cfg()).unwrap();
        assert_eq!(a.r2().to_bits(), b.r2().to_bits());
        assert_eq!(a.support(), b.support());
        assert_eq!(
            a.weights()
                .iter()
                .map(|w| w.to_bits())
                .collect::<Vec<_>>(),
            b.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn support_points_lie_on_boundary() {
        let s = space(&[&[0.0, 0.0], &[2.0, 0.1], &[1.0, 1.7], &[0.3, 0.9], &[1.5, -0.4]]);
        let ids: Vec<PointId> = (0..5).map(PointId).collect();
        let ball = solve_meb(&s, &ids, &cfg()).unwrap();
        for (&id, &w) in ball.support().iter().zip(ball.weights()) {
            if w > 1e-9 {
                let d2 = s.dist2(id, &ball).unwrap();
                assert!(
                    (d2 - ball.r2()).abs() <= 1e-6 * ball.r2().max(1.0),
                    "support point {id} off boundary: {d2} vs {}",
                    ball.r2()
                );
            }
        }
    }
}
