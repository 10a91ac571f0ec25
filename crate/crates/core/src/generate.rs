//! Seeded random instances.
//!
//! Everything is drawn from a ChaCha stream seeded with the instance seed,
//! so a seed and a profile determine an instance on every platform.
//! Distances come from a small value pool and are repaired into
//! pseudometrics by shortest-path closure.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constructions::{GroupTower, PointedSpace};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::regularity::SpaceMap;
use crate::relation::{Entourage, EntourageSequence, Relation, TailPolicy};
use crate::tower::{MonotonePseudometricSequence, Pseudometric, Tower};

/// Largest top-level size the generator accepts.
pub const MAX_TOP_SIZE: usize = 12;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Profile {
    pub levels: usize,
    pub max_size: usize,
    pub value_pool: Vec<Rational>,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            levels: 3,
            max_size: 6,
            value_pool: default_pool(),
        }
    }
}

impl Profile {
    pub fn new(levels: usize, max_size: usize) -> Profile {
        Profile {
            levels,
            max_size,
            value_pool: default_pool(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.max_size > MAX_TOP_SIZE {
            return Err(Error::ProfileTooLarge {
                size: self.max_size,
                limit: MAX_TOP_SIZE,
            });
        }
        if self.levels == 0 || self.max_size == 0 {
            return Err(Error::Shape("a profile needs at least one level and one point".into()));
        }
        if !self.value_pool.iter().any(rational::is_positive) {
            return Err(Error::Shape("the value pool needs a positive value".into()));
        }
        Ok(())
    }
}

/// Zero appears so that generated towers have glued points.
fn default_pool() -> Vec<Rational> {
    vec![
        rational::zero(),
        rational::frac(1, 2),
        rational::one(),
        rational::frac(3, 2),
        rational::int(2),
        rational::int(3),
    ]
}

/// Independent streams per kind of instance, so that e.g. the sequence for
/// seed `s` does not replay the draws of the tower for seed `s`.
#[derive(Clone, Copy)]
enum Stream {
    Tower = 0,
    Sequence,
    Targets,
    Map,
    Bijection,
    Pair,
    Group,
    Radii,
    Factors,
    Entourage,
    MapInstance,
}

fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn positive_pool(pool: &[Rational]) -> Vec<Rational> {
    pool.iter().filter(|v| rational::is_positive(v)).cloned().collect()
}

/// Symmetric weights drawn from `pool` in row-major order over `i < j`,
/// zero where `keep_zero` holds.
fn symmetric_weights<F: Fn(usize, usize) -> bool>(
    rng: &mut ChaCha8Rng,
    n: usize,
    pool: &[Rational],
    keep_zero: F,
) -> Vec<Vec<Rational>> {
    let mut weights = vec![vec![rational::zero(); n]; n];
    for (i, j) in (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))) {
        if !keep_zero(i, j) {
            let w = pool.choose(rng).unwrap().clone();
            weights[i][j] = w.clone();
            weights[j][i] = w;
        }
    }
    weights
}

/// A pseudometric whose zero pairs are exactly those of `zero` (an
/// equivalence relation), with positive distances drawn from `pool`.
fn metric_with_zeros(rng: &mut ChaCha8Rng, zero: &Relation, pool: &[Rational]) -> Pseudometric {
    let weights = symmetric_weights(rng, zero.size(), &positive_pool(pool), |i, j| zero.contains(i, j));
    // Paths through zero pairs only join points of one class, so the
    // closure keeps every other distance positive.
    Pseudometric::closure(zero.size(), |i, j| weights[i][j].clone())
}

fn random_metric(rng: &mut ChaCha8Rng, n: usize, pool: &[Rational]) -> Pseudometric {
    let weights = symmetric_weights(rng, n, pool, |_, _| false);
    Pseudometric::closure(n, |i, j| weights[i][j].clone())
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// A valid tower. Level count is `profile.levels` (fewer if the size bound
/// forbids it), the top size lies between the level count and
/// `profile.max_size`. Lower levels are either restrictions of the top
/// metric (a strict tower) or fresh metrics with the same zero pairs.
pub fn generate_tower(seed: u64, profile: &Profile) -> Result<Tower> {
    profile.check()?;
    let mut rng = rng(seed, Stream::Tower);
    tower_from_rng(&mut rng, profile)
}

fn tower_from_rng(rng: &mut ChaCha8Rng, profile: &Profile) -> Result<Tower> {
    let levels = profile.levels.min(profile.max_size);
    let top = rng.gen_range(levels..=profile.max_size);
    build_tower(rng, levels, top, &profile.value_pool)
}

fn build_tower(rng: &mut ChaCha8Rng, levels: usize, top: usize, pool: &[Rational]) -> Result<Tower> {
    let mut cuts: Vec<usize> = (1..top).collect::<Vec<_>>();
    cuts.shuffle(rng);
    let mut level_sizes: Vec<usize> = cuts[..levels - 1].to_vec();
    level_sizes.sort_unstable();
    level_sizes.push(top);
    let top_metric = random_metric(rng, top, pool);
    let strict = rng.gen_bool(0.5);
    let zero = top_metric.zero_relation();
    let mut metrics: Vec<Pseudometric> = level_sizes[..levels - 1]
        .iter()
        .map(|&m| {
            if strict {
                top_metric.restrict(m)
            } else {
                metric_with_zeros(rng, &zero.restrict(m), pool)
            }
        })
        .collect();
    metrics.push(top_metric);
    Tower::new(labels(top), level_sizes, metrics, strict)
}

/// A monotone sequence over `tower`: `d_N` is random and uniform, and each
/// lower `d_n` is the closure of `min(e_n, d_{n+1}|X_n)` for a random uniform
/// `e_n`.
pub fn generate_sequence(seed: u64, tower: &Tower, pool: &[Rational]) -> MonotonePseudometricSequence {
    let mut rng = rng(seed, Stream::Sequence);
    sequence_from_rng(&mut rng, tower, pool)
}

fn uniform_weights(rng: &mut ChaCha8Rng, zero: &Relation, pool: &[Rational]) -> Vec<Vec<Rational>> {
    symmetric_weights(rng, zero.size(), pool, |i, j| zero.contains(i, j))
}

fn sequence_from_rng(rng: &mut ChaCha8Rng, tower: &Tower, pool: &[Rational]) -> MonotonePseudometricSequence {
    let top = tower.top();
    let mut metrics = vec![Pseudometric::zero(0); tower.levels()];
    let w = uniform_weights(rng, &tower.metric(top).zero_relation(), pool);
    metrics[top] = Pseudometric::closure(tower.size(), |i, j| w[i][j].clone());
    for n in (0..top).rev() {
        let e = uniform_weights(rng, &tower.metric(n).zero_relation(), pool);
        let above = &metrics[n + 1];
        let below = Pseudometric::closure(tower.level_size(n), |i, j| e[i][j].clone().min(above.get(i, j).clone()));
        metrics[n] = below;
    }
    MonotonePseudometricSequence::new(tower, metrics).expect("generated sequences are monotone and uniform")
}

/// Random entourage targets `U_n ⊇ {d⁽ⁿ⁾ = 0}`, not necessarily symmetric.
pub fn generate_targets(seed: u64, tower: &Tower) -> EntourageSequence {
    let mut rng = rng(seed, Stream::Targets);
    EntourageSequence::from_fn(
        tower,
        0,
        |n| random_entourage(&mut rng, tower, n),
        TailPolicy::RepeatLast,
    )
    .expect("one target per level")
}

/// A random entourage of level `n`: a grid entourage half of the time, the
/// zero relation plus random pairs otherwise.
pub fn random_entourage(rng: &mut ChaCha8Rng, tower: &Tower, n: usize) -> Entourage {
    let grid = tower.grid(n).thresholds;
    if rng.gen_bool(0.5) {
        return tower.grid_entourage(n, grid.choose(rng).unwrap());
    }
    let zero = tower.metric(n).zero_relation();
    let density: f64 = rng.gen_range(0.0..0.6);
    let extra = Relation::from_fn(zero.size(), |_, _| rng.gen_bool(density));
    Entourage::new(tower, n, zero.union(&extra).union(&Relation::diagonal(zero.size()))).expect("reflexive")
}

/// A random entourage of the top level.
pub fn generate_top_entourage(seed: u64, tower: &Tower) -> Entourage {
    let mut rng = rng(seed, Stream::Entourage);
    random_entourage(&mut rng, tower, tower.top())
}

/// A map between two fresh towers drawn from `profile`.
pub fn generate_map_instance(seed: u64, profile: &Profile) -> Result<SpaceMap> {
    profile.check()?;
    let mut rng = rng(seed, Stream::MapInstance);
    let source = tower_from_rng(&mut rng, profile)?;
    let target = tower_from_rng(&mut rng, profile)?;
    Ok(map_from_rng(&mut rng, source, target))
}

/// A map between two towers. Half of the maps respect zero classes (so the
/// criterion's hypothesis has a chance to hold), the rest are arbitrary.
pub fn generate_map(seed: u64, source: &Tower, target: &Tower) -> SpaceMap {
    map_from_rng(&mut rng(seed, Stream::Map), source.clone(), target.clone())
}

fn map_from_rng(rng: &mut ChaCha8Rng, source: Tower, target: Tower) -> SpaceMap {
    let n = source.size();
    let m = target.size();
    let values = if rng.gen_bool(0.5) {
        let zero = source.metric(source.top()).zero_relation();
        let target_zero = target.metric(target.top()).zero_relation();
        let mut values: Vec<Option<usize>> = vec![None; n];
        for x in 0..n {
            if values[x].is_some() {
                continue;
            }
            let anchor = rng.gen_range(0..m);
            let class: Vec<usize> = target_zero.row(anchor).iter().collect();
            for y in zero.row(x).iter() {
                values[y] = Some(*class.choose(rng).unwrap());
            }
        }
        values.into_iter().map(Option::unwrap).collect()
    } else {
        (0..n).map(|_| rng.gen_range(0..m)).collect()
    };
    SpaceMap::new(source, target, values).expect("values in range")
}

/// Two towers with the same number of levels and a random bijection between
/// their top levels.
pub fn generate_bijection(seed: u64, profile: &Profile) -> Result<(SpaceMap, SpaceMap)> {
    profile.check()?;
    let mut rng = rng(seed, Stream::Bijection);
    let source = tower_from_rng(&mut rng, profile)?;
    let target = build_tower(&mut rng, source.levels(), source.size(), &profile.value_pool)?;
    let mut h: Vec<usize> = (0..source.size()).collect();
    if rng.gen_bool(0.5) {
        h.shuffle(&mut rng);
    }
    let mut inverse = vec![0; h.len()];
    for (x, &y) in h.iter().enumerate() {
        inverse[y] = x;
    }
    let forward = SpaceMap::new(source.clone(), target.clone(), h)?;
    let backward = SpaceMap::new(target, source, inverse)?;
    Ok((forward, backward))
}

/// Two towers with a common level count whose product has at most
/// `max_factor²` points.
pub fn generate_pair(seed: u64, levels: usize, max_factor: usize) -> Result<(Tower, Tower)> {
    let mut rng = rng(seed, Stream::Pair);
    let levels = rng.gen_range(1..=levels.min(max_factor));
    let profile = Profile::new(levels, max_factor);
    profile.check()?;
    Ok((tower_from_rng(&mut rng, &profile)?, tower_from_rng(&mut rng, &profile)?))
}

/// A finite abelian group tower: a product of one to three cyclic groups,
/// level `n` being the subgroup of the first `n + 1` factors. Coordinates are
/// mixed-radix digits with the first factor least significant, so levels
/// are prefixes. Level metrics weight the circular distance in each
/// coordinate; weights of one coordinate are zero on every level or on
/// none.
pub fn generate_group(seed: u64) -> GroupTower {
    let mut rng = rng(seed, Stream::Group);
    let mut orders: Vec<usize> = Vec::new();
    let count = rng.gen_range(1..=3);
    while orders.len() < count {
        let k = *[2usize, 3, 4].choose(&mut rng).unwrap();
        if orders.iter().product::<usize>() * k <= MAX_TOP_SIZE {
            orders.push(k);
        } else {
            break;
        }
    }
    let size: usize = orders.iter().product();
    let digits = |mut x: usize| -> Vec<usize> {
        orders
            .iter()
            .map(|&k| {
                let d = x % k;
                x /= k;
                d
            })
            .collect()
    };
    let index = |ds: &[usize]| -> usize { ds.iter().zip(&orders).rev().fold(0, |acc, (&d, &k)| acc * k + d) };
    let op: Vec<Vec<usize>> = (0..size)
        .map(|x| {
            (0..size)
                .map(|y| {
                    let (a, b) = (digits(x), digits(y));
                    let sum: Vec<usize> = a.iter().zip(&b).zip(&orders).map(|((p, q), k)| (p + q) % k).collect();
                    index(&sum)
                })
                .collect()
        })
        .collect();
    let positive = positive_pool(&default_pool());
    let glued: Vec<bool> = orders.iter().map(|_| rng.gen_bool(0.25)).collect();
    let level_sizes: Vec<usize> = (1..=orders.len()).map(|n| orders[..n].iter().product()).collect();
    let metrics = level_sizes
        .iter()
        .map(|&m| {
            let weights: Vec<Rational> = glued
                .iter()
                .map(|&g| {
                    if g {
                        rational::zero()
                    } else {
                        positive.choose(&mut rng).unwrap().clone()
                    }
                })
                .collect();
            Pseudometric::from_fn(m, |x, y| {
                let (a, b) = (digits(x), digits(y));
                (0..orders.len())
                    .map(|i| {
                        let r = (a[i] + orders[i] - b[i]) % orders[i];
                        let circular = r.min(orders[i] - r);
                        &weights[i] * rational::int(circular as i64)
                    })
                    .sum()
            })
            .expect("weighted circular distance is a pseudometric")
        })
        .collect();
    let tower = Tower::new(labels(size), level_sizes, metrics, false).expect("valid group tower");
    GroupTower::new(tower, op).expect("cyclic products are abelian groups")
}

/// One positive radius per level, drawn from the distances of the group
/// plus a few values in between.
pub fn generate_radii(seed: u64, group: &GroupTower) -> Vec<Rational> {
    let mut rng = rng(seed, Stream::Radii);
    (0..group.tower.levels())
        .map(|n| {
            let mut candidates = group.tower.grid(n).thresholds;
            candidates.extend(default_pool().into_iter().filter(|v| !v.is_zero()));
            candidates.push(rational::frac(1, 4));
            candidates.choose(&mut rng).unwrap().clone()
        })
        .collect()
}

/// One to three pointed factors of two or three points each (a one-point
/// factor would repeat a level of the box tower).
pub fn generate_factors(seed: u64) -> Vec<PointedSpace> {
    let mut rng = rng(seed, Stream::Factors);
    let count = rng.gen_range(1..=3);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(2..=3);
            let metric = random_metric(&mut rng, n, &default_pool());
            let basepoint = rng.gen_range(0..n);
            let labels = (0..n).map(|p| format!("p{i}_{p}")).collect();
            PointedSpace::new(labels, metric, basepoint).expect("valid factor")
        })
        .collect()
}
