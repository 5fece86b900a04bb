//! Exact minimum-enclosing-ball reference, independent of the iterative
//! solver. Used by tests and by result verification, never on the hot path.
//!
//! Two strategies, selected by instance shape:
//!
//! * Subset enumeration (any geometry, at most [`ENUMERATION_LIMIT`] distinct
//!   ids): every support subset's circumsphere is solved as a linear system in
//!   Gram form; the smallest candidate with nonnegative weights that encloses
//!   all points is the answer, because the true ball is the circumsphere of
//!   its own support set and no enclosing ball can be smaller.
//!
//! * Circumcenter walking (explicit geometry, dimension at most
//!   [`WALK_DIM_LIMIT`]): maintain a ball that always encloses all points,
//!   with a support set on its boundary, and shrink it by moving the center
//!   toward the circumcenter of the support. A non-support point that reaches
//!   the shrinking boundary stops the walk and joins the support; a support
//!   point whose barycentric coordinate goes negative leaves it. The radius
//!   decreases monotonically and the finish state (center at the support
//!   circumcenter, nonnegative coordinates, everything enclosed) is exactly
//!   the optimality condition.
//!
//! Both paths re-verify enclosure before returning, so a numerically bad run
//! fails loudly instead of returning a wrong reference value.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::meb::{unique_ids, Ball};
use crate::point_space::{PointId, PointSpace};

/// Enumeration handles up to 2^16 subsets.
pub(crate) const ENUMERATION_LIMIT: usize = 16;
/// Dimension guard for the walking strategy.
pub(crate) const WALK_DIM_LIMIT: usize = 64;

const WALK_MAX_ITER: usize = 100_000;
/// Barycentric coordinates below this drop their support point.
const LAMBDA_DROP: f64 = -1e-11;

/// Computes the exact minimum enclosing ball of `ids` (duplicates merged).
///
/// Instances must either have at most [`ENUMERATION_LIMIT`] distinct ids (any
/// geometry) or live in an explicit space of dimension at most
/// [`WALK_DIM_LIMIT`]; anything else returns [`Error::UnsupportedSize`].
pub fn meb_oracle(space: &PointSpace, ids: &[PointId]) -> Result<Ball> {
    if ids.is_empty() {
        return Err(Error::InvalidProblem(
            "cannot solve a ball over zero points".into(),
        ));
    }
    let ids = unique_ids(ids);
    let ball = if ids.len() <= ENUMERATION_LIMIT {
        enumerate(space, &ids)?
    } else if space.is_explicit() && space.dim() <= WALK_DIM_LIMIT {
        walk(space, &ids)?
    } else {
        return Err(Error::UnsupportedSize(format!(
            "{} points in a non-explicit or high-dimensional space; \
             enumeration handles <= {ENUMERATION_LIMIT} points, walking needs \
             an explicit space with dimension <= {WALK_DIM_LIMIT}",
            ids.len()
        )));
    };
    // Safety net: the reference value must actually enclose its input.
    let tol = 1e-7 * ball.r2().max(1.0);
    for &id in &ids {
        let d2 = space.dist2(id, &ball)?;
        if d2 > ball.r2() + tol {
            return Err(Error::Internal(format!(
                "oracle ball fails enclosure at point {id}: {d2} > {}",
                ball.r2()
            )));
        }
    }
    Ok(ball)
}

/// Solves `a * x = b` by LU and rejects inconsistent or near-singular systems
/// via a residual check.
fn solve_checked(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().lu();
    let x = lu.solve(b)?;
    let residual = (a * &x - b).amax();
    let scale = b.amax().max(a.amax() * x.amax()).max(1.0);
    if residual <= 1e-8 * scale {
        Some(x)
    } else {
        None
    }
}

/// Circumsphere of a support subset in Gram form: weights `x` with
/// `sum x = 1` and all support points equidistant from `sum_j x_j s_j`.
/// Returns `(weights, r2)`; `None` when the subset admits no circumsphere.
fn circumsphere(gram: &[f64], diag: &[f64], subset: &[usize], m: usize) -> Option<(Vec<f64>, f64)> {
    let k = subset.len();
    if k == 1 {
        return Some((vec![1.0], 0.0));
    }
    let mut a = DMatrix::zeros(k + 1, k + 1);
    let mut b = DVector::zeros(k + 1);
    for (r, &i) in subset.iter().enumerate() {
        for (c, &j) in subset.iter().enumerate() {
            a[(r, c)] = 2.0 * gram[i * m + j];
        }
        a[(r, k)] = 1.0;
        a[(k, r)] = 1.0;
        b[r] = diag[i];
    }
    b[k] = 1.0;
    let sol = solve_checked(&a, &b)?;
    let x: Vec<f64> = (0..k).map(|r| sol[r]).collect();
    let mu = sol[k];
    let mut quad = 0.0;
    for (r, &i) in subset.iter().enumerate() {
        for (c, &j) in subset.iter().enumerate() {
            quad += x[r] * x[c] * gram[i * m + j];
        }
    }
    Some((x, mu + quad))
}

/// Exhaustive strategy: try every support subset, keep the smallest
/// nonnegative-weight circumsphere that encloses all points. Deterministic:
/// subsets are visited in ascending bitmask order and only strictly smaller
/// candidates replace the incumbent.
fn enumerate(space: &PointSpace, ids: &[PointId]) -> Result<Ball> {
    let m = ids.len();
    let mut gram = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let v = space.dot(ids[a], ids[b])?;
            gram[a * m + b] = v;
            gram[b * m + a] = v;
        }
    }
    let diag: Vec<f64> = (0..m).map(|a| gram[a * m + a]).collect();

    let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    let mut subset = Vec::with_capacity(m);
    for mask in 1u32..(1u32 << m) {
        subset.clear();
        for a in 0..m {
            if mask & (1 << a) != 0 {
                subset.push(a);
            }
        }
        let Some((x, r2)) = circumsphere(&gram, &diag, &subset, m) else {
            continue;
        };
        if let Some((_, _, incumbent)) = &best {
            if r2 >= *incumbent {
                continue;
            }
        }
        if x.iter().any(|&w| w < -1e-9) {
            continue;
        }
        // Enclosure of every input point.
        let enc_tol = 1e-9 * r2.max(1.0);
        let quad = diag_weighted(&gram, &subset, &x, m);
        let enclosed = (0..m).all(|p| {
            let mut cross = 0.0;
            for (r, &i) in subset.iter().enumerate() {
                cross += x[r] * gram[p * m + i];
            }
            diag[p] - 2.0 * cross + quad <= r2 + enc_tol
        });
        if enclosed {
            best = Some((subset.clone(), x, r2));
        }
    }
    let (subset, x, _) = best.ok_or_else(|| {
        Error::Internal("subset enumeration found no enclosing circumsphere".into())
    })?;
    let support: Vec<PointId> = subset.iter().map(|&a| ids[a]).collect();
    let weights: Vec<f64> = x.iter().map(|&w| w.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    Ball::from_weights(
        space,
        support,
        weights.iter().map(|w| w / total).collect(),
    )
}

fn diag_weighted(gram: &[f64], subset: &[usize], x: &[f64], m: usize) -> f64 {
    let mut quad = 0.0;
    for (r, &i) in subset.iter().enumerate() {
        for (c, &j) in subset.iter().enumerate() {
            quad += x[r] * x[c] * gram[i * m + j];
        }
    }
    quad
}

fn sq_dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Circumcenter of `support` within its affine hull, plus barycentric
/// coordinates. `None` when the support is affinely dependent.
fn affine_circumcenter(pts: &[&[f64]], support: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = support.len();
    let t0 = pts[support[0]];
    if k == 1 {
        return Some((t0.to_vec(), vec![1.0]));
    }
    let mut a = DMatrix::zeros(k - 1, k - 1);
    let mut b = DVector::zeros(k - 1);
    for r in 1..k {
        let vr: Vec<f64> = pts[support[r]]
            .iter()
            .zip(t0)
            .map(|(x, y)| x - y)
            .collect();
        for c in 1..k {
            let mut acc = 0.0;
            for (d, y0) in t0.iter().enumerate() {
                acc += vr[d] * (pts[support[c]][d] - y0);
            }
            a[(r - 1, c - 1)] = acc;
        }
        b[r - 1] = 0.5 * vr.iter().map(|v| v * v).sum::<f64>();
    }
    let mu = solve_checked(&a, &b)?;
    let mut center = t0.to_vec();
    for r in 1..k {
        let w = mu[r - 1];
        for (d, y0) in t0.iter().enumerate() {
            center[d] += w * (pts[support[r]][d] - y0);
        }
    }
    let mut lambda = vec![0.0; k];
    let mut rest = 0.0;
    for r in 1..k {
        lambda[r] = mu[r - 1];
        rest += mu[r - 1];
    }
    lambda[0] = 1.0 - rest;
    Some((center, lambda))
}

/// Walking strategy for explicit spaces; see the module docs.
fn walk(space: &PointSpace, ids: &[PointId]) -> Result<Ball> {
    let pts: Vec<&[f64]> = ids
        .iter()
        .map(|&id| space.point(id).map(|p| p.x.as_slice()))
        .collect::<Result<_>>()?;
    let n = pts.len();

    let mut center: Vec<f64> = pts[0].to_vec();
    let (mut far, mut far_d2) = (0usize, 0.0f64);
    for (i, p) in pts.iter().enumerate() {
        let d2 = sq_dist(&center, p);
        if d2 > far_d2 {
            far_d2 = d2;
            far = i;
        }
    }
    if far_d2 == 0.0 {
        // Every point coincides with the first one.
        return Ball::from_weights(space, vec![ids[0]], vec![1.0]);
    }
    let mut r2 = far_d2;
    let mut support: Vec<usize> = vec![far];
    let mut in_support = vec![false; n];
    in_support[far] = true;

    for _ in 0..WALK_MAX_ITER {
        let Some((cc, lambda)) = affine_circumcenter(&pts, &support) else {
            // Affinely dependent support: retreat by dropping the most recent
            // addition and keep going; the cap bounds pathological cases.
            let dropped = support.pop().expect("support never empty");
            in_support[dropped] = false;
            continue;
        };
        let dir: Vec<f64> = cc.iter().zip(&center).map(|(a, b)| a - b).collect();
        let step2: f64 = dir.iter().map(|v| v * v).sum();

        if step2 <= 1e-24 * r2.max(1e-300) {
            // Center reached the support circumcenter.
            if let Some(worst) = lambda
                .iter()
                .enumerate()
                .filter(|(_, &l)| l < LAMBDA_DROP)
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
            {
                let dropped = support.remove(worst);
                in_support[dropped] = false;
                continue;
            }
            // Optimal: center is the circumcenter of an enclosing support with
            // nonnegative coordinates.
            let mut pairs: Vec<(PointId, f64)> = support
                .iter()
                .zip(&lambda)
                .map(|(&s, &l)| (ids[s], l.max(0.0)))
                .collect();
            pairs.sort_by_key(|&(id, _)| id);
            let total: f64 = pairs.iter().map(|&(_, l)| l).sum();
            let (sup, w): (Vec<PointId>, Vec<f64>) =
                pairs.into_iter().map(|(id, l)| (id, l / total)).unzip();
            return Ball::from_weights(space, sup, w);
        }

        // Walk toward the circumcenter; the ball shrinks, so the first
        // non-support point to reach the boundary stops the walk.
        let t0 = pts[support[0]];
        let mut fraction = 1.0;
        let mut stopper: Option<usize> = None;
        for (q, pq) in pts.iter().enumerate() {
            if in_support[q] {
                continue;
            }
            let mut den = 0.0;
            for (d, v) in dir.iter().enumerate() {
                den += v * (t0[d] - pq[d]);
            }
            den *= 2.0;
            if den <= 1e-14 * step2.sqrt() {
                continue;
            }
            let num = (r2 - sq_dist(&center, pq)).max(0.0);
            let f = num / den;
            if f < fraction {
                fraction = f;
                stopper = Some(q);
            }
        }

        for (c, v) in center.iter_mut().zip(&dir) {
            *c += fraction * v;
        }
        r2 = support
            .iter()
            .map(|&s| sq_dist(&center, pts[s]))
            .fold(0.0, f64::max);
        if let Some(q) = stopper {
            support.push(q);
            in_support[q] = true;
        }
    }
    Err(Error::Internal(
        "circumcenter walk did not terminate".into(),
    ))
}
