//! Finite towers `X_0 ⊂ X_1 ⊂ … ⊂ X_N` of pseudometric spaces.
//!
//! Each level is a prefix of the top-level element list and carries one
//! exact rational pseudometric. On a finite set two pseudometrics generate
//! the same uniformity iff they vanish on the same pairs, so "X_n is a
//! uniform subspace of X_{n+1}" is checked as zero-pair agreement; strict
//! mode additionally demands literal restriction.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bits::PointSet;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::relation::{Entourage, Relation};

/// A symmetric, zero-diagonal table of nonnegative rationals satisfying the
/// triangle inequality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Pseudometric {
    size: usize,
    dist: Vec<Rational>,
}

fn first_violation<T: PartialOrd, D: Fn(usize, usize) -> T, A: Fn(T, T) -> T>(
    n: usize,
    d: D,
    add: A,
) -> Option<(usize, usize, usize)> {
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d(i, k) > add(d(i, j), d(j, k)) {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// First defect found when checking pseudometric axioms.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MetricDefect {
    Negative(usize, usize),
    Diagonal(usize),
    Asymmetric(usize, usize),
    Triangle(usize, usize, usize),
}

impl MetricDefect {
    pub(crate) fn at_level(self, level: usize) -> Error {
        match self {
            MetricDefect::Negative(i, j) => Error::InvalidMetric {
                level,
                i,
                j,
                reason: "negative",
            },
            MetricDefect::Diagonal(i) => Error::InvalidMetric {
                level,
                i,
                j: i,
                reason: "nonzero diagonal",
            },
            MetricDefect::Asymmetric(i, j) => Error::InvalidMetric {
                level,
                i,
                j,
                reason: "asymmetric",
            },
            MetricDefect::Triangle(i, j, k) => Error::TriangleViolation { level, i, j, k },
        }
    }
}

impl Pseudometric {
    /// Builds from a full square table, checking every axiom.
    pub fn new(rows: Vec<Vec<Rational>>) -> std::result::Result<Self, MetricDefect> {
        let metric = Self::from_rows_unchecked(rows);
        match metric.first_defect() {
            Some(defect) => Err(defect),
            None => Ok(metric),
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Rational>(size: usize, f: F) -> std::result::Result<Self, MetricDefect> {
        let metric = Self::from_fn_unchecked(size, f);
        match metric.first_defect() {
            Some(defect) => Err(defect),
            None => Ok(metric),
        }
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<Rational>>) -> Self {
        let size = rows.len();
        let dist = rows.into_iter().flatten().collect::<Vec<_>>();
        assert_eq!(dist.len(), size * size, "table must be square");
        Pseudometric { size, dist }
    }

    pub(crate) fn from_fn_unchecked<F: FnMut(usize, usize) -> Rational>(size: usize, mut f: F) -> Self {
        let mut dist = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                dist.push(f(i, j));
            }
        }
        Pseudometric { size, dist }
    }

    /// The identically zero pseudometric.
    pub fn zero(size: usize) -> Self {
        Self::from_fn_unchecked(size, |_, _| rational::zero())
    }

    /// Largest pseudometric below a symmetric nonnegative weight table:
    /// shortest-path distances of the complete graph with those weights.
    pub fn closure<F: FnMut(usize, usize) -> Rational>(size: usize, weight: F) -> Self {
        let mut metric = Self::from_fn_unchecked(size, weight);
        for i in 0..size {
            metric.dist[i * size + i] = rational::zero();
        }
        for k in 0..size {
            for i in 0..size {
                for j in 0..size {
                    let via = &metric.dist[i * size + k] + &metric.dist[k * size + j];
                    if via < metric.dist[i * size + j] {
                        metric.dist[i * size + j] = via;
                    }
                }
            }
        }
        metric
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i * self.size + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.dist.chunks(self.size.max(1)).take(self.size)
    }

    pub fn first_defect(&self) -> Option<MetricDefect> {
        let n = self.size;
        for i in 0..n {
            if !self.get(i, i).is_zero() {
                return Some(MetricDefect::Diagonal(i));
            }
            for j in 0..n {
                if self.get(i, j).is_negative() {
                    return Some(MetricDefect::Negative(i, j));
                }
                if self.get(i, j) != self.get(j, i) {
                    return Some(MetricDefect::Asymmetric(i.min(j), i.max(j)));
                }
            }
        }
        self.first_triangle_violation()
            .map(|(i, j, k)| MetricDefect::Triangle(i, j, k))
    }

    /// First `(i, j, k)` in lexicographic order with `d(i,k) > d(i,j) + d(j,k)`.
    pub fn first_triangle_violation(&self) -> Option<(usize, usize, usize)> {
        match self.scaled_integers() {
            Some(d) => first_violation(self.size, |i, k| d[i * self.size + k], |a, b| a + b),
            None => first_violation(self.size, |i, k| self.get(i, k).clone(), |a, b| a + b),
        }
    }

    /// The table over a common denominator, if every entry then fits in an
    /// `i64` with room for one addition.
    fn scaled_integers(&self) -> Option<Vec<i64>> {
        let common = self.dist.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
        self.dist
            .iter()
            .map(|v| {
                (v.numer() * (&common / v.denom()))
                    .to_i64()
                    .filter(|x| x.abs() <= i64::MAX / 2)
            })
            .collect()
    }

    /// Restriction to the first `m` points.
    pub fn restrict(&self, m: usize) -> Pseudometric {
        assert!(m <= self.size);
        Self::from_fn_unchecked(m, |i, j| self.get(i, j).clone())
    }

    pub fn scaled(&self, factor: &Rational) -> Pseudometric {
        Self::from_fn_unchecked(self.size, |i, j| self.get(i, j) * factor)
    }

    /// Distinct positive values, ascending.
    pub fn positive_values(&self) -> Vec<Rational> {
        self.dist
            .iter()
            .filter(|v| v.is_positive())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn max_value(&self) -> Rational {
        self.dist.iter().max().cloned().unwrap_or_else(rational::zero)
    }

    /// The relation `{d < eps}`.
    pub fn below(&self, eps: &Rational) -> Relation {
        Relation::from_fn(self.size, |i, j| self.get(i, j) < eps)
    }

    /// The relation `{d = 0}`, always an equivalence relation.
    pub fn zero_relation(&self) -> Relation {
        Relation::from_fn(self.size, |i, j| self.get(i, j).is_zero())
    }
}

/// Raw, unvalidated tower data as read from an instance file. Metrics are
/// full square tables.
#[derive(Clone, Debug)]
pub struct RawTower {
    pub labels: Vec<String>,
    pub level_sizes: Vec<usize>,
    pub metrics: Vec<Vec<Vec<Rational>>>,
    pub strict: bool,
}

/// A validated finite tower.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Tower {
    labels: Vec<String>,
    level_sizes: Vec<usize>,
    metrics: Vec<Pseudometric>,
    strict: bool,
}

/// Checks every structural invariant, reporting the first violation in this
/// order: shape and nesting, per-level metric axioms other than the
/// triangle inequality, subspace zero-pair agreement, strict restriction,
/// and finally the triangle inequality level by level.
pub fn validate_tower(raw: RawTower) -> Result<Tower> {
    let RawTower {
        labels,
        level_sizes,
        metrics,
        strict,
    } = raw;
    if level_sizes.is_empty() {
        return Err(Error::NestingViolation("no levels".into()));
    }
    if level_sizes[0] == 0 {
        return Err(Error::NestingViolation("level 0 is empty".into()));
    }
    for (n, pair) in level_sizes.windows(2).enumerate() {
        if pair[0] >= pair[1] {
            return Err(Error::NestingViolation(format!(
                "level sizes must strictly increase (level {} has {}, level {} has {})",
                n,
                pair[0],
                n + 1,
                pair[1]
            )));
        }
    }
    let top = *level_sizes.last().unwrap();
    if top != labels.len() {
        return Err(Error::NestingViolation(format!(
            "top level has {top} points but {} labels were given",
            labels.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for label in &labels {
        if !seen.insert(label) {
            return Err(Error::Shape(format!("duplicate label {label:?}")));
        }
    }
    if metrics.len() != level_sizes.len() {
        return Err(Error::Shape(format!(
            "{} levels but {} metrics",
            level_sizes.len(),
            metrics.len()
        )));
    }
    for (n, (rows, &m)) in metrics.iter().zip(&level_sizes).enumerate() {
        if rows.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Shape(format!("metric of level {n} is not {m}x{m}")));
        }
    }
    let metrics = metrics.into_iter().map(Pseudometric::from_rows_unchecked).collect();
    Tower::assemble(labels, level_sizes, metrics, strict)
}

impl Tower {
    /// Builds and validates a tower from already-constructed metrics.
    pub fn new(
        labels: Vec<String>,
        level_sizes: Vec<usize>,
        metrics: Vec<Pseudometric>,
        strict: bool,
    ) -> Result<Tower> {
        let raw = RawTower {
            labels,
            level_sizes,
            metrics: metrics.iter().map(|m| m.rows().map(|r| r.to_vec()).collect()).collect(),
            strict,
        };
        validate_tower(raw)
    }

    fn assemble(
        labels: Vec<String>,
        level_sizes: Vec<usize>,
        metrics: Vec<Pseudometric>,
        strict: bool,
    ) -> Result<Tower> {
        for (n, metric) in metrics.iter().enumerate() {
            if let Some(defect) = metric.first_defect() {
                if !matches!(defect, MetricDefect::Triangle(..)) {
                    return Err(defect.at_level(n));
                }
            }
        }
        for n in 0..metrics.len().saturating_sub(1) {
            let (lower, upper) = (&metrics[n], &metrics[n + 1]);
            for i in 0..level_sizes[n] {
                for j in i + 1..level_sizes[n] {
                    if lower.get(i, j).is_zero() != upper.get(i, j).is_zero() {
                        return Err(Error::SubspaceViolation { level: n, i, j });
                    }
                }
            }
        }
        if strict {
            for n in 0..metrics.len().saturating_sub(1) {
                for i in 0..level_sizes[n] {
                    for j in i + 1..level_sizes[n] {
                        if metrics[n].get(i, j) != metrics[n + 1].get(i, j) {
                            return Err(Error::StrictViolation { level: n, i, j });
                        }
                    }
                }
            }
        }
        for (n, metric) in metrics.iter().enumerate() {
            if let Some((i, j, k)) = metric.first_triangle_violation() {
                return Err(Error::TriangleViolation { level: n, i, j, k });
            }
        }
        Ok(Tower {
            labels,
            level_sizes,
            metrics,
            strict,
        })
    }

    /// A one-level tower over a single pseudometric.
    pub fn single(labels: Vec<String>, metric: Pseudometric) -> Result<Tower> {
        let size = metric.size();
        Tower::new(labels, vec![size], vec![metric], true)
    }

    /// The same tower with `labels` replaced; used by constructions that
    /// invent names.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Tower> {
        if labels.len() != self.labels.len() {
            return Err(Error::Shape("label count changed".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn level_sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    /// Number of levels, `N + 1`.
    pub fn levels(&self) -> usize {
        self.level_sizes.len()
    }

    /// Index `N` of the top level.
    pub fn top(&self) -> usize {
        self.level_sizes.len() - 1
    }

    /// Number of points of the whole ground set `X_N`.
    pub fn size(&self) -> usize {
        *self.level_sizes.last().unwrap()
    }

    pub fn level_size(&self, n: usize) -> usize {
        self.level_sizes[n]
    }

    pub fn metric(&self, n: usize) -> &Pseudometric {
        &self.metrics[n]
    }

    pub fn metrics(&self) -> &[Pseudometric] {
        &self.metrics
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn check_index(&self, x: usize) -> Result<()> {
        if x < self.size() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: x,
                size: self.size(),
            })
        }
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        if n < self.levels() {
            Ok(())
        } else {
            Err(Error::LevelOutOfRange {
                level: n,
                levels: self.levels(),
            })
        }
    }

    /// `|x|`: the first level containing `x`.
    pub fn height(&self, x: usize) -> Result<usize> {
        self.check_index(x)?;
        Ok(self.height_unchecked(x))
    }

    pub(crate) fn height_unchecked(&self, x: usize) -> usize {
        self.level_sizes.partition_point(|&m| m <= x)
    }

    /// `|x,y| = max(|x|, |y|)`.
    pub fn pair_height(&self, x: usize, y: usize) -> Result<usize> {
        Ok(self.height(x)?.max(self.height(y)?))
    }

    /// `X_n` as a subset of the top ground set.
    pub fn level_set(&self, n: usize) -> PointSet {
        PointSet::prefix(self.size(), self.level_sizes[n])
    }

    /// The zero relation `{d⁽ⁿ⁾ = 0}`, the smallest entourage of level `n`.
    pub fn zero_entourage(&self, n: usize) -> Entourage {
        Entourage::from_relation_unchecked(n, self.metrics[n].zero_relation())
    }

    pub fn grid(&self, n: usize) -> GridScale {
        GridScale::of(self, n)
    }

    /// `{d⁽ⁿ⁾ < eps}` as an entourage of level `n`.
    pub fn grid_entourage(&self, n: usize, eps: &Rational) -> Entourage {
        Entourage::from_relation_unchecked(n, self.metrics[n].below(eps))
    }

    /// Whether `X_{n-1}` is closed in `X_n`: no zero pair of `d⁽ⁿ⁾` links a
    /// point of `X_{n-1}` to a point outside it.
    pub fn is_closed_below(&self, n: usize) -> bool {
        if n == 0 {
            return true;
        }
        let inner = self.level_sizes[n - 1];
        let metric = &self.metrics[n];
        (0..inner).all(|a| (inner..self.level_sizes[n]).all(|x| !metric.get(a, x).is_zero()))
    }
}

/// A finite base of one level's uniformity: the entourages `{d < ε}` for
/// ε ranging over the distinct positive distances plus one value above the
/// maximum. The first threshold always yields the zero relation and the last
/// the full relation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GridScale {
    pub level: usize,
    pub thresholds: Vec<Rational>,
}

impl GridScale {
    pub fn of(tower: &Tower, level: usize) -> GridScale {
        let mut thresholds = tower.metric(level).positive_values();
        let above = thresholds
            .last()
            .map(|m| m + rational::one())
            .unwrap_or_else(rational::one);
        thresholds.push(above);
        GridScale { level, thresholds }
    }

    pub fn entourages<'a>(&'a self, tower: &'a Tower) -> impl Iterator<Item = Entourage> + 'a {
        self.thresholds
            .iter()
            .map(move |eps| tower.grid_entourage(self.level, eps))
    }
}

/// Per-level uniform pseudometrics `d_n` on `X_n` with `d_n ≤ d_{n+1}` on
/// `X_n²`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonotonePseudometricSequence {
    metrics: Vec<Pseudometric>,
}

impl MonotonePseudometricSequence {
    pub fn new(tower: &Tower, metrics: Vec<Pseudometric>) -> Result<Self> {
        if metrics.len() != tower.levels() {
            return Err(Error::Shape(format!(
                "sequence has {} metrics for {} levels",
                metrics.len(),
                tower.levels()
            )));
        }
        for (n, metric) in metrics.iter().enumerate() {
            if metric.size() != tower.level_size(n) {
                return Err(Error::Shape(format!(
                    "sequence metric {n} has size {} but level has {}",
                    metric.size(),
                    tower.level_size(n)
                )));
            }
            if let Some(defect) = metric.first_defect() {
                return Err(defect.at_level(n));
            }
            let level = tower.metric(n);
            for i in 0..metric.size() {
                for j in 0..metric.size() {
                    if level.get(i, j).is_zero() && !metric.get(i, j).is_zero() {
                        return Err(Error::NotUniform { level: n, i, j });
                    }
                }
            }
        }
        for n in 0..metrics.len().saturating_sub(1) {
            let m = metrics[n].size();
            for i in 0..m {
                for j in 0..m {
                    if metrics[n].get(i, j) > metrics[n + 1].get(i, j) {
                        return Err(Error::NotMonotone { level: n, i, j });
                    }
                }
            }
        }
        Ok(MonotonePseudometricSequence { metrics })
    }

    /// The level metrics themselves; monotone exactly when the tower is
    /// strict.
    pub fn from_tower(tower: &Tower) -> Result<Self> {
        Self::new(tower, tower.metrics().to_vec())
    }

    pub fn metric(&self, n: usize) -> &Pseudometric {
        &self.metrics[n]
    }

    pub fn metrics(&self) -> &[Pseudometric] {
        &self.metrics
    }

    pub fn levels(&self) -> usize {
        self.metrics.len()
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::int;

    #[test]
    fn t1_is_valid() {
        let t = t1();
        assert_eq!(t.levels(), 3);
        assert_eq!(t.size(), 3);
        assert!(t.is_closed_below(1) && t.is_closed_below(2));
    }

    #[test]
    fn triangle_violation_names_first_witness() {
        let mut raw = raw_t1();
        raw.metrics[2][0][2] = int(3);
        raw.metrics[2][2][0] = int(3);
        assert_eq!(
            validate_tower(raw).unwrap_err(),
            Error::TriangleViolation {
                level: 2,
                i: 0,
                j: 1,
                k: 2
            }
        );
    }

    #[test]
    fn subspace_violation_reported_before_triangle() {
        let mut raw = raw_t1();
        raw.metrics[2][0][1] = int(0);
        raw.metrics[2][1][0] = int(0);
        assert_eq!(
            validate_tower(raw).unwrap_err(),
            Error::SubspaceViolation { level: 1, i: 0, j: 1 }
        );
    }

    #[test]
    fn nesting_and_shape_errors() {
        let mut raw = raw_t1();
        raw.level_sizes = vec![2, 2, 3];
        assert!(matches!(validate_tower(raw).unwrap_err(), Error::NestingViolation(_)));
        let mut raw = raw_t1();
        raw.level_sizes = vec![1, 2, 4];
        assert!(matches!(validate_tower(raw).unwrap_err(), Error::NestingViolation(_)));
        let mut raw = raw_t1();
        raw.metrics.pop();
        assert!(matches!(validate_tower(raw).unwrap_err(), Error::Shape(_)));
        let mut raw = raw_t1();
        raw.metrics[1][0][1] = int(-1);
        raw.metrics[1][1][0] = int(-1);
        assert!(matches!(
            validate_tower(raw).unwrap_err(),
            Error::InvalidMetric { level: 1, .. }
        ));
    }

    #[test]
    fn strict_mode_requires_restriction() {
        // T1 is strict-compatible: d⁽¹⁾ and d⁽²⁾ agree on {a,b}.
        let mut raw = raw_t1();
        raw.strict = true;
        assert!(validate_tower(raw).is_ok());
        let mut raw = raw_t1();
        raw.strict = true;
        raw.metrics[2] = square(&[&[0, 2, 2], &[2, 0, 1], &[2, 1, 0]]);
        assert_eq!(
            validate_tower(raw).unwrap_err(),
            Error::StrictViolation { level: 1, i: 0, j: 1 }
        );
    }

    #[test]
    fn heights() {
        let t = t1();
        assert_eq!(t.height(0).unwrap(), 0);
        assert_eq!(t.height(1).unwrap(), 1);
        assert_eq!(t.height(2).unwrap(), 2);
        assert_eq!(t.pair_height(0, 1).unwrap(), 1);
        assert_eq!(t.pair_height(0, 2).unwrap(), 2);
        assert_eq!(t.pair_height(0, 0).unwrap(), 0);
        assert_eq!(t.height(3).unwrap_err(), Error::IndexOutOfRange { index: 3, size: 3 });
        for x in 0..3 {
            for n in 0..3 {
                assert_eq!(t.height(x).unwrap() <= n, x < t.level_size(n));
            }
        }
    }

    #[test]
    fn grid_scale_of_t1() {
        let t = t1();
        assert_eq!(t.grid(0).thresholds, vec![int(1)]);
        assert_eq!(t.grid(1).thresholds, vec![int(1), int(2)]);
        assert_eq!(t.grid(2).thresholds, vec![int(1), int(2), int(3)]);
        let grid = t.grid(2);
        let mut ents = grid.entourages(&t);
        assert_eq!(ents.next().unwrap(), t.zero_entourage(2));
        assert!(ents.last().unwrap().relation().is_full());
    }

    #[test]
    fn strict_levels_form_a_monotone_sequence() {
        let t = t1();
        assert!(MonotonePseudometricSequence::from_tower(&t).is_ok());
    }

    #[test]
    fn sequence_validation() {
        let t = t1();
        let bad = vec![
            Pseudometric::zero(1),
            Pseudometric::new(square(&[&[0, 3], &[3, 0]])).unwrap(),
            t.metric(2).clone(),
        ];
        assert_eq!(
            MonotonePseudometricSequence::new(&t, bad).unwrap_err(),
            Error::NotMonotone { level: 1, i: 0, j: 1 }
        );
    }

    #[test]
    fn closure_repairs_triangle() {
        let m = Pseudometric::closure(3, |i, j| if i.abs_diff(j) == 2 { int(5) } else { int(1) });
        assert_eq!(m.get(0, 2), &int(2));
        assert!(m.first_defect().is_none());
    }
}
