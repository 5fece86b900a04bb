//! Fixed-size core-sets and their farthest-point/swap refinement.
//!
//! A core-set is an ordered multiset of exactly `ceil(1/epsilon)` point ids
//! (duplicates allowed; a node that starts with a single point fills every
//! slot with it). Refinement repeatedly:
//!
//! 1. finds the point farthest from the current core-set ball,
//! 2. appends it,
//! 3. removes whichever member's removal keeps the radius largest,
//! 4. keeps the swap only if the radius strictly grew.
//!
//! The radius sequence is strictly increasing and bounded, so the loop
//! terminates; on exit no single swap can grow the ball, which is what makes
//! the result an epsilon-accurate core-set of the scanned points.

use crate::error::{Error, Result};
use crate::meb::{solve_meb, unique_ids, Ball, SolverConfig};
use crate::point_space::{PointId, PointSpace};

/// Relative slack a swap must beat to count as an improvement. Plain `>`
/// comparisons would let roundoff-sized wobbles drive unbounded loops.
const IMPROVEMENT_ETA: f64 = 1e-9;

/// Number of core-set slots for accuracy `epsilon`: `ceil(1/epsilon)`.
///
/// The division is snapped by 1e-9 before rounding up so values like
/// `1/epsilon = 3 + 4e-16` (from a decimal epsilon with no exact binary
/// representation) do not gain a spurious extra slot.
pub fn core_set_size(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must be in (0, 1], got {epsilon}"
        )));
    }
    Ok(((1.0 / epsilon - 1e-9).ceil() as usize).max(1))
}

/// A candidate core-set: sorted id multiset plus the ball of its distinct
/// points. Equality is by the sorted id list alone, which is the canonical
/// form consensus detection compares.
#[derive(Debug, Clone)]
pub struct CoreSet {
    ids: Vec<PointId>,
    ball: Ball,
}

impl CoreSet {
    /// Builds a core-set from an id multiset, solving its ball.
    pub fn new(space: &PointSpace, mut ids: Vec<PointId>, config: &SolverConfig) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidProblem("empty core-set".into()));
        }
        ids.sort_unstable();
        let ball = solve_meb(space, &ids, config)?;
        Ok(CoreSet { ids, ball })
    }

    /// Sorted id multiset.
    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    /// Number of slots (counting duplicates).
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Ball of the distinct member points.
    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn r2(&self) -> f64 {
        self.ball.r2()
    }
}

impl PartialEq for CoreSet {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
    }
}

impl Eq for CoreSet {}

/// Id of the point in `candidates` farthest from the center of `ball`.
/// Ties go to the smallest id.
pub fn farthest_point(
    space: &PointSpace,
    candidates: &[PointId],
    ball: &Ball,
) -> Result<PointId> {
    let candidates = unique_ids(candidates);
    if candidates.is_empty() {
        return Err(Error::InvalidProblem("no candidates to scan".into()));
    }
    let mut best = candidates[0];
    let mut best_d2 = f64::NEG_INFINITY;
    for id in candidates {
        let d2 = space.dist2(id, ball)?;
        if d2 > best_d2 {
            best_d2 = d2;
            best = id;
        }
    }
    Ok(best)
}

/// Removes one member of `ids` (a multiset, length >= 2) so that the ball of
/// the remaining members has the largest radius, and returns the removed id
/// with that ball. Ties go to the smallest removed id.
pub fn best_removal(
    space: &PointSpace,
    ids: &[PointId],
    config: &SolverConfig,
) -> Result<(PointId, Ball)> {
    if ids.len() < 2 {
        return Err(Error::InvalidProblem(
            "removal needs at least two members".into(),
        ));
    }
    // Positions holding duplicate ids leave identical remainders, so solves
    // are cached by the remainder's distinct-id key.
    let mut cache: std::collections::BTreeMap<Vec<PointId>, Ball> = Default::default();
    let mut best: Option<(PointId, Ball)> = None;
    let mut remaining = Vec::with_capacity(ids.len() - 1);
    for pos in 0..ids.len() {
        remaining.clear();
        remaining.extend(ids.iter().take(pos).chain(ids.iter().skip(pos + 1)));
        let key = unique_ids(&remaining);
        let ball = match cache.get(&key) {
            Some(ball) => ball.clone(),
            None => {
                let ball = solve_meb(space, &remaining, config)?;
                cache.insert(key, ball.clone());
                ball
            }
        };
        let removed = ids[pos];
        let better = match &best {
            None => true,
            Some((best_id, best_ball)) => {
                ball.r2() > best_ball.r2() || (ball.r2() == best_ball.r2() && removed < *best_id)
            }
        };
        if better {
            best = Some((removed, ball));
        }
    }
    Ok(best.expect("len >= 2 guarantees a candidate"))
}

/// Farthest-point/swap refinement of `init` against the points `scan`.
/// The scan always includes the current core-set members themselves.
/// The output has exactly as many slots as `init`.
pub fn coreset_refine(
    space: &PointSpace,
    scan: &[PointId],
    init: &CoreSet,
    config: &SolverConfig,
) -> Result<CoreSet> {
    refine_inner(space, scan, init, config, None)
}

/// Same as [`coreset_refine`], also returning the squared radius after the
/// initial state and after every accepted swap (strictly increasing).
pub fn coreset_refine_with_history(
    space: &PointSpace,
    scan: &[PointId],
    init: &CoreSet,
    config: &SolverConfig,
) -> Result<(CoreSet, Vec<f64>)> {
    let mut history = Vec::new();
    let out = refine_inner(space, scan, init, config, Some(&mut history))?;
    Ok((out, history))
}

fn refine_inner(
    space: &PointSpace,
    scan: &[PointId],
    init: &CoreSet,
    config: &SolverConfig,
    mut history: Option<&mut Vec<f64>>,
) -> Result<CoreSet> {
    let base = unique_ids(scan);
    let mut ids = init.ids().to_vec();
    let mut ball = init.ball().clone();
    if let Some(h) = history.as_deref_mut() {
        h.push(ball.r2());
    }
    // Generous safety rail; the strict-improvement rule terminates the loop
    // long before this in any non-degenerate run.
    let cap = 10_000 + 10 * base.len() * ids.len();
    for _ in 0..cap {
        let mut pool = base.clone();
        pool.extend_from_slice(&ids);
        let farthest = farthest_point(space, &pool, &ball)?;

        let mut grown = ids.clone();
        let at = grown.partition_point(|&id| id < farthest);
        grown.insert(at, farthest);

        let (removed, candidate) = best_removal(space, &grown, config)?;
        if candidate.r2() > ball.r2() * (1.0 + IMPROVEMENT_ETA) {
            let at = grown
                .iter()
                .position(|&id| id == removed)
                .expect("removed id comes from the multiset");
            grown.remove(at);
            ids = grown;
            ball = candidate;
            if let Some(h) = history.as_deref_mut() {
                h.push(ball.r2());
            }
        } else {
            return Ok(CoreSet { ids, ball });
        }
    }
    Err(Error::Internal(
        "core-set refinement exceeded its iteration rail".into(),
    ))
}
