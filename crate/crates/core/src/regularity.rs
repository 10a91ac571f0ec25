//! Regularity of maps at the lower levels of a tower, and the continuity
//! criterion built on it.
//!
//! The target of a map is a tower `Y` read as the uniform space
//! `(Y_top, d_top)`. Its topology is the partition into zero-classes of the
//! top metric, which is also the u-lim topology of `Y`.

use num_traits::Zero;

use crate::bits::PointSet;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::relation::Relation;
use crate::topology::{compare_topologies, ulim_topology, Comparison, TopologyFamily};
use crate::tower::{Pseudometric, Tower};

/// A function from the top level of `source` to the top level of `target`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpaceMap {
    pub source: Tower,
    pub target: Tower,
    values: Vec<usize>,
}

impl SpaceMap {
    pub fn new(source: Tower, target: Tower, values: Vec<usize>) -> Result<SpaceMap> {
        if values.len() != source.size() {
            return Err(Error::Shape(format!(
                "map has {} values for {} source points",
                values.len(),
                source.size()
            )));
        }
        if let Some(&index) = values.iter().find(|&&v| v >= target.size()) {
            return Err(Error::IndexOutOfRange {
                index,
                size: target.size(),
            });
        }
        Ok(SpaceMap { source, target, values })
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, x: usize) -> usize {
        self.values[x]
    }

    fn target_metric(&self) -> &Pseudometric {
        self.target.metric(self.target.top())
    }
}

/// One cell of a regularity certificate: for the target entourage
/// `{d_Y < u}` and the source entourage `{d⁽ⁿ⁾ < v}`, the largest grid
/// threshold `w` whose entourage `{d⁽ⁿ⁾ < w}` works.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegularityCell {
    pub u: Rational,
    pub v: Rational,
    pub w: Rational,
}

/// A target threshold `u`, source threshold `v` and a point `x` near
/// `X_{n-1}` that no point of `X_{n-1}` approximates, whatever `W` is.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegularityCounterexample {
    pub u: Rational,
    pub v: Rational,
    pub x: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegularityVerdict {
    pub level: usize,
    pub regular: bool,
    pub witnesses: Vec<RegularityCell>,
    pub counterexample: Option<RegularityCounterexample>,
}

/// Whether `x` is approximated from `X_{n-1}` within `v` in the source and
/// `u` in the target.
fn approximated(f: &SpaceMap, n: usize, x: usize, u: &Relation, v: &Relation) -> bool {
    let inner = f.source.level_size(n - 1);
    (0..inner).any(|a| v.contains(a, x) && u.contains(f.apply(x), f.apply(a)))
}

fn works(f: &SpaceMap, n: usize, u: &Relation, v: &Relation, w: &Relation) -> Option<usize> {
    let inner = PointSet::prefix(f.source.level_size(n), f.source.level_size(n - 1));
    w.image(&inner).iter().find(|&x| !approximated(f, n, x, u, v))
}

/// Checks regularity of `f|X_n` at `X_{n-1}` over grid entourages: for
/// every `U` of the target and `V` of `X_n` some `W` of `X_n` makes every
/// `x ∈ B(X_{n-1}; W)` have `a ∈ X_{n-1}` with `(a,x) ∈ V` and
/// `(f(x), f(a)) ∈ U`.
///
/// A smaller `W` means a smaller ball `B(X_{n-1}; W)`, so some `W` works iff
/// the zero relation does; only that one decides the verdict.
pub fn is_regular_at(f: &SpaceMap, n: usize) -> Result<RegularityVerdict> {
    if n == 0 || n >= f.source.levels() {
        return Err(Error::LevelOutOfRange {
            level: n,
            levels: f.source.levels(),
        });
    }
    let dy = f.target_metric();
    let dn = f.source.metric(n);
    let u_grid = f.target.grid(f.target.top()).thresholds;
    let x_grid = f.source.grid(n).thresholds;
    let mut witnesses = Vec::new();
    for u_eps in &u_grid {
        let u = dy.below(u_eps);
        for v_eps in &x_grid {
            let v = dn.below(v_eps);
            if let Some(x) = works(f, n, &u, &v, &dn.zero_relation()) {
                return Ok(RegularityVerdict {
                    level: n,
                    regular: false,
                    witnesses: Vec::new(),
                    counterexample: Some(RegularityCounterexample {
                        u: u_eps.clone(),
                        v: v_eps.clone(),
                        x,
                    }),
                });
            }
            let w = x_grid
                .iter()
                .take_while(|w| works(f, n, &u, &v, &dn.below(w)).is_none())
                .last()
                .expect("the zero relation works")
                .clone();
            witnesses.push(RegularityCell {
                u: u_eps.clone(),
                v: v_eps.clone(),
                w,
            });
        }
    }
    Ok(RegularityVerdict {
        level: n,
        regular: true,
        witnesses,
        counterexample: None,
    })
}

/// The same verdict by trying every grid `W`, without the shortcut.
pub fn is_regular_at_naive(f: &SpaceMap, n: usize) -> Result<bool> {
    if n == 0 || n >= f.source.levels() {
        return Err(Error::LevelOutOfRange {
            level: n,
            levels: f.source.levels(),
        });
    }
    let dy = f.target_metric();
    let dn = f.source.metric(n);
    let x_grid = f.source.grid(n).thresholds;
    Ok(f.target.grid(f.target.top()).thresholds.iter().all(|u_eps| {
        let u = dy.below(u_eps);
        x_grid.iter().all(|v_eps| {
            let v = dn.below(v_eps);
            x_grid
                .iter()
                .any(|w_eps| works(f, n, &u, &v, &dn.below(w_eps)).is_none())
        })
    }))
}

/// Whether `f|X_n` is continuous: it maps zero pairs of `d⁽ⁿ⁾` to zero
/// pairs of the target. Returns the first broken pair.
pub fn level_discontinuity(f: &SpaceMap, n: usize) -> Option<(usize, usize)> {
    let dy = f.target_metric();
    f.source
        .metric(n)
        .zero_relation()
        .pairs()
        .find(|&(x, y)| !dy.get(f.apply(x), f.apply(y)).is_zero())
}

/// The topology of the target space: zero-classes of its top metric.
pub fn target_topology(f: &SpaceMap) -> TopologyFamily {
    let zero = f.target_metric().zero_relation();
    TopologyFamily::from_neighbourhoods((0..zero.size()).map(|y| zero.row(y).clone()).collect())
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ContinuityVerdict {
    pub continuous: bool,
    /// An open set of the target whose preimage is not open in the source.
    pub witness_open: Option<PointSet>,
    pub witness_preimage: Option<PointSet>,
}

/// Continuity of `f` from the u-lim topology of the source.
pub fn is_continuous(f: &SpaceMap) -> ContinuityVerdict {
    is_continuous_from(f, &ulim_topology(&f.source))
}

fn is_continuous_from(f: &SpaceMap, source: &TopologyFamily) -> ContinuityVerdict {
    let target = target_topology(f);
    for x in 0..f.source.size() {
        let around = target.neighbourhood(f.apply(x));
        if source.neighbourhood(x).iter().any(|y| !around.contains(f.apply(y))) {
            let preimage = PointSet::from_indices(
                f.source.size(),
                (0..f.source.size()).filter(|&y| around.contains(f.apply(y))),
            );
            return ContinuityVerdict {
                continuous: false,
                witness_open: Some(around.clone()),
                witness_preimage: Some(preimage),
            };
        }
    }
    ContinuityVerdict {
        continuous: true,
        witness_open: None,
        witness_preimage: None,
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CriterionVerdict {
    /// First zero pair broken by `f|X_n`, per level `n = 0..=N`.
    pub level_continuity: Vec<Option<(usize, usize)>>,
    /// Regularity at `X_{n-1}` for `n = 1..=N`.
    pub regularity: Vec<RegularityVerdict>,
    pub hypothesis: bool,
    pub conclusion: ContinuityVerdict,
    /// Hypothesis true but `f` discontinuous. Never expected.
    pub violation: bool,
    /// Whether `X_{n-1}` is closed in `X_n`, per level `n = 0..=N`.
    pub closed_levels: Vec<bool>,
}

/// Evaluates the hypothesis "every `f|X_n` is continuous and regular at
/// `X_{n-1}`" next to the conclusion "f is continuous on the u-lim".
pub fn continuity_criterion(f: &SpaceMap) -> CriterionVerdict {
    let levels = f.source.levels();
    let level_continuity: Vec<_> = (0..levels).map(|n| level_discontinuity(f, n)).collect();
    let regularity: Vec<_> = (1..levels)
        .map(|n| is_regular_at(f, n).expect("level in range"))
        .collect();
    let hypothesis = level_continuity.iter().all(Option::is_none) && regularity.iter().all(|r| r.regular);
    let conclusion = is_continuous(f);
    let violation = hypothesis && !conclusion.continuous;
    CriterionVerdict {
        level_continuity,
        regularity,
        hypothesis,
        violation,
        conclusion,
        closed_levels: (0..levels).map(|n| f.source.is_closed_below(n)).collect(),
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HomeoVerdict {
    pub forward: CriterionVerdict,
    pub backward: CriterionVerdict,
    pub homeomorphism: bool,
    /// The source u-lim topology carried along `h`, compared with the target
    /// u-lim topology.
    pub transported: Comparison,
    /// `homeomorphism` agrees with the transported comparison being equal.
    pub consistent: bool,
}

pub fn homeo_criterion(h: &SpaceMap, h_inv: &SpaceMap) -> Result<HomeoVerdict> {
    let n = h.source.size();
    if h.target.size() != n || h_inv.source != h.target || h_inv.target != h.source {
        return Err(Error::NotInverse(
            "the maps do not run between the same two towers".into(),
        ));
    }
    if let Some(x) = (0..n).find(|&x| h_inv.apply(h.apply(x)) != x) {
        return Err(Error::NotInverse(format!("h_inv(h({x})) != {x}")));
    }
    if let Some(y) = (0..n).find(|&y| h.apply(h_inv.apply(y)) != y) {
        return Err(Error::NotInverse(format!("h(h_inv({y})) != {y}")));
    }
    let forward = continuity_criterion(h);
    let backward = continuity_criterion(h_inv);
    let homeomorphism = forward.conclusion.continuous && backward.conclusion.continuous;
    let carried = ulim_topology(&h.source).transport(h.values());
    let transported = compare_topologies(&carried, &ulim_topology(&h.target))?.verdict;
    Ok(HomeoVerdict {
        forward,
        backward,
        homeomorphism,
        consistent: homeomorphism == (transported == Comparison::Equal),
        transported,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub use crate::fixtures::{glued, two_level, two_points};
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::tower::fixtures::t1;

    #[test]
    fn separated_points_are_regular() {
        let f = SpaceMap::new(two_level(1), two_points(), vec![0, 1]).unwrap();
        let verdict = is_regular_at(&f, 1).unwrap();
        assert!(verdict.regular);
        assert!(!verdict.witnesses.is_empty());
        assert!(is_regular_at_naive(&f, 1).unwrap());
    }

    #[test]
    fn glued_points_are_not_regular() {
        let f = glued();
        let verdict = is_regular_at(&f, 1).unwrap();
        assert!(!verdict.regular);
        assert_eq!(verdict.counterexample.unwrap().x, 1);
        assert!(!is_regular_at_naive(&f, 1).unwrap());
        let cont = is_continuous(&f);
        assert!(!cont.continuous);
        assert_eq!(cont.witness_open.unwrap().to_vec(), vec![0]);
        assert_eq!(cont.witness_preimage.unwrap().to_vec(), vec![0]);
        let crit = continuity_criterion(&f);
        assert!(!crit.hypothesis && !crit.conclusion.continuous && !crit.violation);
        assert_eq!(crit.closed_levels, vec![true, false]);
    }

    #[test]
    fn constant_maps() {
        let f = SpaceMap::new(t1(), two_points(), vec![1, 1, 1]).unwrap();
        for n in 1..3 {
            assert!(is_regular_at(&f, n).unwrap().regular);
        }
        let crit = continuity_criterion(&f);
        assert!(crit.hypothesis && crit.conclusion.continuous);
        assert!(is_regular_at(&f, 0).is_err());
        assert!(is_regular_at(&f, 3).is_err());
    }

    #[test]
    fn identity_on_t1() {
        let f = SpaceMap::new(t1(), t1(), vec![0, 1, 2]).unwrap();
        let crit = continuity_criterion(&f);
        assert!(crit.hypothesis && crit.conclusion.continuous);
    }

    #[test]
    fn maps_into_indiscrete_targets_are_continuous() {
        let target = Tower::single(vec!["p".into(), "q".into()], Pseudometric::zero(2)).unwrap();
        let f = SpaceMap::new(two_level(0), target, vec![0, 1]).unwrap();
        assert!(is_continuous(&f).continuous);
    }

    #[test]
    fn target_topology_is_its_ulim() {
        let f = glued();
        assert_eq!(target_topology(&f), ulim_topology(&f.target));
    }

    #[test]
    fn homeomorphisms() {
        let t = t1();
        let id = SpaceMap::new(t.clone(), t.clone(), vec![0, 1, 2]).unwrap();
        let v = homeo_criterion(&id, &id).unwrap();
        assert!(v.homeomorphism && v.consistent);

        let two = crate::rational::int(2);
        let scaled = Tower::new(
            t.labels().to_vec(),
            t.level_sizes().to_vec(),
            t.metrics().iter().map(|m| m.scaled(&two)).collect(),
            false,
        )
        .unwrap();
        let h = SpaceMap::new(t.clone(), scaled.clone(), vec![0, 1, 2]).unwrap();
        let back = SpaceMap::new(scaled, t, vec![0, 1, 2]).unwrap();
        let v = homeo_criterion(&h, &back).unwrap();
        assert!(v.homeomorphism && v.consistent && v.transported == Comparison::Equal);

        let apart = two_level(1);
        let glued = two_level(0);
        let h = SpaceMap::new(apart.clone(), glued.clone(), vec![0, 1]).unwrap();
        let back = SpaceMap::new(glued, apart, vec![0, 1]).unwrap();
        let v = homeo_criterion(&h, &back).unwrap();
        assert!(!v.homeomorphism && v.consistent);
        assert!(v.forward.conclusion.continuous && !v.backward.conclusion.continuous);
    }

    #[test]
    fn not_inverse() {
        let t = t1();
        let h = SpaceMap::new(t.clone(), t.clone(), vec![1, 0, 2]).unwrap();
        let id = SpaceMap::new(t.clone(), t, vec![0, 1, 2]).unwrap();
        assert!(matches!(homeo_criterion(&h, &id).unwrap_err(), Error::NotInverse(_)));
    }
}
