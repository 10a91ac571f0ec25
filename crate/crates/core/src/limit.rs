//! The limit pseudometric of a monotone sequence and the lemmas around it.
//!
//! For a monotone sequence `(d_n)` the limit pseudometric is
//! `d∞(x,y) = min Σ d_{|x_{i-1},x_i|}(x_{i-1},x_i)` over chains from `x` to
//! `y`. Weights are nonnegative, so simple chains suffice and the minimum is
//! an all-pairs shortest path on the complete graph with edge weights
//! `d_{|x,y|}(x,y)`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::relation::{multiple, Entourage, EntourageSequence, TailPolicy};
use crate::tower::{MonotonePseudometricSequence, Pseudometric, Tower};

/// A nonempty list of points `x_0, …, x_n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Chain {
    pub points: Vec<usize>,
}

impl Chain {
    pub fn new(points: Vec<usize>) -> Result<Chain> {
        if points.is_empty() {
            return Err(Error::Shape("a chain needs at least one point".into()));
        }
        Ok(Chain { points })
    }
}

/// `d_{|x,y|}(x,y)`: the distance of a single link.
pub fn link_weight(tower: &Tower, seq: &MonotonePseudometricSequence, x: usize, y: usize) -> Result<Rational> {
    let level = tower.pair_height(x, y)?;
    Ok(seq.metric(level).get(x, y).clone())
}

pub fn chain_weight(tower: &Tower, seq: &MonotonePseudometricSequence, chain: &Chain) -> Result<Rational> {
    let mut total = rational::zero();
    if let Some(&first) = chain.points.first() {
        tower.check_index(first)?;
    }
    for link in chain.points.windows(2) {
        total += link_weight(tower, seq, link[0], link[1])?;
    }
    Ok(total)
}

/// `d∞` on the whole ground set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LimitPseudometric {
    pub dist: Pseudometric,
}

impl LimitPseudometric {
    pub fn get(&self, x: usize, y: usize) -> &Rational {
        self.dist.get(x, y)
    }
}

fn link_table(tower: &Tower, seq: &MonotonePseudometricSequence) -> Vec<Vec<Rational>> {
    let size = tower.size();
    (0..size)
        .map(|x| {
            (0..size)
                .map(|y| {
                    let level = tower.height_unchecked(x).max(tower.height_unchecked(y));
                    seq.metric(level).get(x, y).clone()
                })
                .collect()
        })
        .collect()
}

pub fn limit_pseudometric(tower: &Tower, seq: &MonotonePseudometricSequence) -> LimitPseudometric {
    let links = link_table(tower, seq);
    LimitPseudometric {
        dist: Pseudometric::closure(tower.size(), |x, y| links[x][y].clone()),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Phase {
    Descending,
    Ascending,
}

/// Shortest chains whose heights strictly fall to a valley and then strictly
/// rise, `|x_0| > … > |x_s| ≤ |x_{s+1}| < … < |x_n|`. Equivalently no
/// interior point is at least as high as both neighbours.
///
/// States are `(point, phase)`. From a descending state at height `h` the
/// next point either lies lower (still descending) or not lower (the chain
/// turns); an ascending state only moves strictly up. Heights strictly
/// change inside each phase, so the state graph is acyclic and one pass in
/// topological order settles every state.
struct ValleyGraph {
    links: Vec<Vec<Rational>>,
    heights: Vec<usize>,
    /// Descending states by falling height, then ascending states by rising
    /// height.
    order: Vec<(usize, Phase)>,
}

impl ValleyGraph {
    fn new(tower: &Tower, seq: &MonotonePseudometricSequence) -> Self {
        let size = tower.size();
        let heights: Vec<usize> = (0..size).map(|x| tower.height_unchecked(x)).collect();
        let mut by_height: Vec<usize> = (0..size).collect();
        by_height.sort_by_key(|&x| (heights[x], x));
        let mut order: Vec<(usize, Phase)> = by_height.iter().rev().map(|&x| (x, Phase::Descending)).collect();
        order.extend(by_height.iter().map(|&x| (x, Phase::Ascending)));
        ValleyGraph {
            links: link_table(tower, seq),
            heights,
            order,
        }
    }

    fn index(&self, point: usize, phase: Phase) -> usize {
        match phase {
            Phase::Descending => point,
            Phase::Ascending => self.heights.len() + point,
        }
    }

    /// Successor phase when moving from `(from, phase)` to `to`, if allowed.
    fn step(&self, from: usize, phase: Phase, to: usize) -> Option<Phase> {
        if from == to {
            return None;
        }
        let (h, g) = (self.heights[from], self.heights[to]);
        match phase {
            Phase::Descending if g < h => Some(Phase::Descending),
            Phase::Descending => Some(Phase::Ascending),
            Phase::Ascending if g > h => Some(Phase::Ascending),
            Phase::Ascending => None,
        }
    }

    fn forward(&self, source: usize) -> Vec<Option<Rational>> {
        let size = self.heights.len();
        let mut dist: Vec<Option<Rational>> = vec![None; 2 * size];
        dist[self.index(source, Phase::Descending)] = Some(rational::zero());
        for &(point, phase) in &self.order {
            let Some(here) = dist[self.index(point, phase)].clone() else {
                continue;
            };
            for next in 0..size {
                if let Some(next_phase) = self.step(point, phase, next) {
                    let cand = &here + &self.links[point][next];
                    let slot = &mut dist[self.index(next, next_phase)];
                    if slot.as_ref().is_none_or(|old| cand < *old) {
                        *slot = Some(cand);
                    }
                }
            }
        }
        dist
    }

    /// Cheapest completion from each state to `target` (either phase).
    fn backward(&self, target: usize) -> Vec<Option<Rational>> {
        let size = self.heights.len();
        let mut dist: Vec<Option<Rational>> = vec![None; 2 * size];
        for &(point, phase) in self.order.iter().rev() {
            let mut best = (point == target).then(rational::zero);
            for next in 0..size {
                if let Some(next_phase) = self.step(point, phase, next) {
                    if let Some(rest) = &dist[self.index(next, next_phase)] {
                        let cand = &self.links[point][next] + rest;
                        if best.as_ref().is_none_or(|b| cand < *b) {
                            best = Some(cand);
                        }
                    }
                }
            }
            dist[self.index(point, phase)] = best;
        }
        dist
    }
}

/// The minimum weight over valley-shaped chains from `x` to `y`.
pub fn valley_distance(tower: &Tower, seq: &MonotonePseudometricSequence, x: usize, y: usize) -> Result<Rational> {
    tower.check_index(x)?;
    tower.check_index(y)?;
    let graph = ValleyGraph::new(tower, seq);
    Ok(valley_row(&graph, x)[y].clone())
}

fn valley_row(graph: &ValleyGraph, x: usize) -> Vec<Rational> {
    let fwd = graph.forward(x);
    (0..graph.heights.len())
        .map(|y| {
            let desc = &fwd[graph.index(y, Phase::Descending)];
            let asc = &fwd[graph.index(y, Phase::Ascending)];
            match (desc, asc) {
                (Some(a), Some(b)) => a.min(b).clone(),
                (Some(a), None) | (None, Some(a)) => a.clone(),
                // Every point is reachable by the single link x, y.
                (None, None) => unreachable!("valley graph always links x to y"),
            }
        })
        .collect()
}

/// All valley distances at once.
pub fn valley_matrix(tower: &Tower, seq: &MonotonePseudometricSequence) -> Vec<Vec<Rational>> {
    let graph = ValleyGraph::new(tower, seq);
    (0..tower.size()).map(|x| valley_row(&graph, x)).collect()
}

/// An optimal valley chain from `x` to `y`, lexicographically smallest among
/// the optimal ones.
pub fn valley_witness(tower: &Tower, seq: &MonotonePseudometricSequence, x: usize, y: usize) -> Result<Chain> {
    tower.check_index(x)?;
    tower.check_index(y)?;
    let graph = ValleyGraph::new(tower, seq);
    let back = graph.backward(y);
    let mut points = vec![x];
    let (mut point, mut phase) = (x, Phase::Descending);
    loop {
        if point == y {
            break;
        }
        let need = back[graph.index(point, phase)].clone().expect("target reachable");
        let mut chosen = None;
        for next in 0..tower.size() {
            let Some(next_phase) = graph.step(point, phase, next) else {
                continue;
            };
            if let Some(rest) = &back[graph.index(next, next_phase)] {
                if &graph.links[point][next] + rest == need {
                    chosen = Some((next, next_phase));
                    break;
                }
            }
        }
        let (next, next_phase) = chosen.expect("an optimal successor exists");
        points.push(next);
        point = next;
        phase = next_phase;
    }
    Chain::new(points)
}

/// Extends a uniform pseudometric `rho` on `X_k` to `X_n`, `n ≥ k`, keeping
/// it unchanged on `X_k²`.
///
/// With `L = max ρ / min{d⁽ⁿ⁾(a,b) : ρ(a,b) > 0}` the scaled metric
/// `D = L·d⁽ⁿ⁾` dominates `ρ` on `X_k²`, and
/// `ρ̃(x,y) = min(D(x,y), min_{a,b ∈ X_k} D(x,a) + ρ(a,b) + D(b,y))`.
pub fn extend_pseudometric(tower: &Tower, rho: &Pseudometric, k: usize, n: usize) -> Result<Pseudometric> {
    tower.check_level(k)?;
    tower.check_level(n)?;
    if n < k {
        return Err(Error::LevelMismatch(format!(
            "cannot extend from level {k} down to {n}"
        )));
    }
    let mk = tower.level_size(k);
    if rho.size() != mk {
        return Err(Error::Shape(format!(
            "pseudometric of size {} on level {k} of size {mk}",
            rho.size()
        )));
    }
    let base = tower.metric(k);
    for i in 0..mk {
        for j in 0..mk {
            if base.get(i, j).is_zero() && !rho.get(i, j).is_zero() {
                return Err(Error::NotUniform { level: k, i, j });
            }
        }
    }
    if n == k {
        return Ok(rho.clone());
    }
    let mn = tower.level_size(n);
    let dn = tower.metric(n);
    let max_rho = rho.max_value();
    if max_rho.is_zero() {
        return Ok(Pseudometric::zero(mn));
    }
    let min_d = (0..mk)
        .flat_map(|i| (0..mk).map(move |j| (i, j)))
        .filter(|&(i, j)| !rho.get(i, j).is_zero())
        .map(|(i, j)| dn.get(i, j).clone())
        .min()
        .expect("rho has a positive value");
    let scale = max_rho / min_d;
    let d = |x: usize, y: usize| dn.get(x, y) * &scale;
    // to_core[x][b] = min_a D(x,a) + ρ(a,b)
    let to_core: Vec<Vec<Rational>> = (0..mn)
        .map(|x| {
            (0..mk)
                .map(|b| (0..mk).map(|a| d(x, a) + rho.get(a, b)).min().unwrap())
                .collect()
        })
        .collect();
    Ok(Pseudometric::from_fn_unchecked(mn, |x, y| {
        if x < mk && y < mk {
            return rho.get(x, y).clone();
        }
        let glued = (0..mk).map(|b| &to_core[x][b] + d(b, y)).min().unwrap();
        glued.min(d(x, y))
    }))
}

/// The largest threshold `ε` of the level grid with `{d < ε} ⊆ U`.
fn largest_grid_inside(tower: &Tower, level: usize, u: &Entourage) -> Rational {
    let grid = tower.grid(level);
    let mut best = grid.thresholds[0].clone();
    for eps in &grid.thresholds {
        if tower.metric(level).below(eps).is_subset(u.relation()) {
            best = eps.clone();
        } else {
            break;
        }
    }
    best
}

/// A monotone sequence `(d_n)` with `{d_n < 1} ⊆ U_n` for every level.
///
/// Each `ρ_k = min(1, d⁽ᵏ⁾/ε_k)` uses the largest grid threshold `ε_k` with
/// `{d⁽ᵏ⁾ < ε_k} ⊆ U_k`, so `{ρ_k < 1}` is exactly that grid entourage; a
/// full target gets `ρ_k ≡ 0`. Each `ρ_k` is carried up one level at a time
/// so that `ρ̃_{k,n+1}` restricts to `ρ̃_{k,n}`, and `d_n = Σ_{k≤n} ρ̃_{k,n}`.
pub fn adequate_sequence(tower: &Tower, targets: &EntourageSequence) -> Result<MonotonePseudometricSequence> {
    if targets.start() != 0 {
        return Err(Error::LevelMismatch(format!(
            "targets must start at level 0, not {}",
            targets.start()
        )));
    }
    for target in targets.entries() {
        target.check_uniform_entourage(tower)?;
    }
    let mut carried: Vec<Pseudometric> = Vec::new();
    let mut metrics = Vec::new();
    for n in 0..tower.levels() {
        for (k, rho) in carried.iter_mut().enumerate() {
            *rho = extend_pseudometric(tower, rho, n - 1, n).map_err(|e| match e {
                Error::NotUniform { .. } => unreachable!("extensions of level {k} stay uniform"),
                other => other,
            })?;
        }
        let target = targets.entry(n);
        let rho = if target.relation().is_full() {
            Pseudometric::zero(tower.level_size(n))
        } else {
            let eps = largest_grid_inside(tower, n, target);
            let one = Rational::one();
            let dn = tower.metric(n);
            Pseudometric::from_fn_unchecked(dn.size(), |i, j| (dn.get(i, j) / &eps).min(one.clone()))
        };
        carried.push(rho);
        let size = tower.level_size(n);
        metrics.push(Pseudometric::from_fn_unchecked(size, |i, j| {
            carried.iter().map(|r| r.get(i, j)).sum()
        }));
    }
    MonotonePseudometricSequence::new(tower, metrics)
}

/// A ladder `U_0, …, U_N` of top-level entourages with `5U_0 ⊆ U` and
/// `2U_{n+1} ⊆ U_n`, each the largest top-level grid entourage that fits.
/// The zero relation of the top level always fits since it is an
/// equivalence relation contained in `U`.
pub fn halving_ladder(tower: &Tower, u: &Entourage) -> Result<Vec<Entourage>> {
    let top = tower.top();
    if u.level() != top {
        return Err(Error::LevelMismatch(format!("U must live on the top level {top}")));
    }
    u.check_uniform_entourage(tower)?;
    let candidates: Vec<Entourage> = tower.grid(top).entourages(tower).collect();
    let fit = |k: usize, outer: &Entourage| -> Result<Entourage> {
        let mut best = candidates[0].clone();
        for e in &candidates {
            if multiple(e, k)?.is_subset(outer) {
                best = e.clone();
            } else {
                break;
            }
        }
        Ok(best)
    };
    let mut ladder = vec![fit(5, u)?];
    for _ in 0..top {
        let next = fit(2, ladder.last().unwrap())?;
        ladder.push(next);
    }
    Ok(ladder)
}

/// The adequate sequence for the restrictions `U_n|X_n` of a ladder.
pub fn ladder_sequence(tower: &Tower, ladder: &[Entourage]) -> Result<MonotonePseudometricSequence> {
    if ladder.len() != tower.levels() {
        return Err(Error::LevelMismatch(format!(
            "a ladder needs {} rungs, got {}",
            tower.levels(),
            ladder.len()
        )));
    }
    let targets = EntourageSequence::from_fn(
        tower,
        0,
        |n| Entourage::from_relation_unchecked(n, ladder[n].relation().restrict(tower.level_size(n))),
        TailPolicy::RepeatLast,
    )?;
    adequate_sequence(tower, &targets)
}

/// Outcome of checking `{d∞ < 1} ⊆ U`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GenerationVerdict {
    pub confirmed: bool,
    pub counterexample: Option<(usize, usize)>,
}

/// Checks the ladder preconditions and then `{d∞ < 1} ⊆ U`.
pub fn verify_generation(
    tower: &Tower,
    u: &Entourage,
    seq: &MonotonePseudometricSequence,
    ladder: &[Entourage],
) -> Result<GenerationVerdict> {
    let top = tower.top();
    if u.level() != top || ladder.len() != tower.levels() || ladder.iter().any(|e| e.level() != top) {
        return Err(Error::LevelMismatch(
            "U and the ladder U_0..U_N must all live on the top level".into(),
        ));
    }
    if !multiple(&ladder[0], 5)?.is_subset(u) {
        return Err(Error::PreconditionFailed("5U_0 is not inside U".into()));
    }
    for n in 0..top {
        if !multiple(&ladder[n + 1], 2)?.is_subset(&ladder[n]) {
            return Err(Error::PreconditionFailed(format!("2U_{} is not inside U_{n}", n + 1)));
        }
    }
    let one = Rational::one();
    for (n, rung) in ladder.iter().enumerate() {
        if let Some((i, j)) = seq.metric(n).below(&one).pairs().find(|&(i, j)| !rung.contains(i, j)) {
            return Err(Error::PreconditionFailed(format!(
                "{{d_{n} < 1}} is not inside U_{n}: misses ({i},{j})"
            )));
        }
    }
    let limit = limit_pseudometric(tower, seq);
    let counterexample = limit.dist.below(&one).pairs().find(|&(i, j)| !u.contains(i, j));
    Ok(GenerationVerdict {
        confirmed: counterexample.is_none(),
        counterexample,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub use crate::fixtures::m1;
}
