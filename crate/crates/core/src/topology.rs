//! Topologies on the finite ground set of a tower.
//!
//! Every topology on a finite set is determined by the smallest open set
//! around each point, so a [`TopologyFamily`] stores exactly those minimal
//! neighbourhoods. Open sets are the unions of them and are enumerated only
//! on request.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::bits::PointSet;
use crate::error::{Error, Result};
use crate::relation::{ball, sigma_sum, Entourage, EntourageSequence, Relation, Upto};
use crate::tower::Tower;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TopologyFamily {
    ground_size: usize,
    minimal: Vec<PointSet>,
}

impl TopologyFamily {
    /// The topology in which `sets[x]` is declared open around `x`, closed
    /// up so that the minimal neighbourhoods become transitive.
    pub fn from_neighbourhoods(sets: Vec<PointSet>) -> Self {
        let n = sets.len();
        let rel = Relation::from_fn(n, |x, y| x == y || sets[x].contains(y));
        let closed = rel.closure();
        TopologyFamily {
            ground_size: n,
            minimal: (0..n).map(|x| closed.row(x).clone()).collect(),
        }
    }

    /// The coarsest topology in which every set of `family` is open.
    pub fn generated_by<'a, I>(ground_size: usize, family: I) -> Self
    where
        I: IntoIterator<Item = &'a PointSet>,
    {
        let mut minimal = vec![PointSet::full(ground_size); ground_size];
        for set in family {
            for x in set.iter() {
                minimal[x].intersect_with(set);
            }
        }
        TopologyFamily { ground_size, minimal }
    }

    pub fn discrete(n: usize) -> Self {
        TopologyFamily {
            ground_size: n,
            minimal: (0..n).map(|x| PointSet::singleton(n, x)).collect(),
        }
    }

    pub fn indiscrete(n: usize) -> Self {
        TopologyFamily {
            ground_size: n,
            minimal: vec![PointSet::full(n); n],
        }
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    /// The smallest open set containing `x`.
    pub fn neighbourhood(&self, x: usize) -> &PointSet {
        &self.minimal[x]
    }

    pub fn is_open(&self, set: &PointSet) -> bool {
        set.iter().all(|x| self.minimal[x].is_subset(set))
    }

    /// Smallest open set containing `set`.
    pub fn interior_hull(&self, set: &PointSet) -> PointSet {
        let mut out = PointSet::empty(self.ground_size);
        for x in set.iter() {
            out.union_with(&self.minimal[x]);
        }
        out
    }

    /// All open sets, sorted. Exponential in general; meant for small
    /// ground sets and for display.
    pub fn opens(&self) -> Vec<PointSet> {
        let mut opens = BTreeSet::new();
        opens.insert(PointSet::empty(self.ground_size));
        for x in 0..self.ground_size {
            let with_x: Vec<PointSet> = opens.iter().map(|o| o.union(&self.minimal[x])).collect();
            opens.extend(with_x);
        }
        opens.into_iter().collect()
    }

    pub fn is_discrete(&self) -> bool {
        self.minimal.iter().all(|n| n.len() == 1)
    }

    pub fn is_indiscrete(&self) -> bool {
        self.minimal.iter().all(|n| n.len() == self.ground_size)
    }

    /// The topology carried over along a bijection: `h(O)` is open iff `O`
    /// is.
    pub fn transport(&self, h: &[usize]) -> TopologyFamily {
        let n = self.ground_size;
        let mut minimal = vec![PointSet::empty(n); n];
        for x in 0..n {
            minimal[h[x]] = PointSet::from_indices(n, self.minimal[x].iter().map(|y| h[y]));
        }
        TopologyFamily {
            ground_size: n,
            minimal,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Comparison {
    Equal,
    AFiner,
    BFiner,
    Incomparable,
}

impl Comparison {
    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::Equal => "equal",
            Comparison::AFiner => "A_finer",
            Comparison::BFiner => "B_finer",
            Comparison::Incomparable => "incomparable",
        }
    }
}

/// Verdict of [`compare_topologies`]. The witness is an open set of one
/// family that is not open in the other (absent when equal).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TopologyComparison {
    pub verdict: Comparison,
    pub witness: Option<PointSet>,
}

pub fn compare_topologies(a: &TopologyFamily, b: &TopologyFamily) -> Result<TopologyComparison> {
    if a.ground_size != b.ground_size {
        return Err(Error::GroundMismatch {
            left: a.ground_size,
            right: b.ground_size,
        });
    }
    // A is finer iff each minimal B-neighbourhood is A-open, i.e.
    // N_A(x) ⊆ N_B(x) everywhere.
    let a_only = (0..a.ground_size).find(|&x| !b.is_open(&a.minimal[x]));
    let b_only = (0..a.ground_size).find(|&x| !a.is_open(&b.minimal[x]));
    let (verdict, witness) = match (a_only, b_only) {
        (None, None) => (Comparison::Equal, None),
        (Some(x), None) => (Comparison::AFiner, Some(a.minimal[x].clone())),
        (None, Some(x)) => (Comparison::BFiner, Some(b.minimal[x].clone())),
        (Some(x), Some(_)) => (Comparison::Incomparable, Some(a.minimal[x].clone())),
    };
    Ok(TopologyComparison { verdict, witness })
}

/// `B(x; Σ_{i ≥ |x|} U_i)` for a sequence starting at the height of `x`.
pub fn base_ball(tower: &Tower, x: usize, seq: &EntourageSequence) -> Result<PointSet> {
    let height = tower.height(x)?;
    if seq.start() != height {
        return Err(Error::StartMismatch {
            expected: height,
            found: seq.start(),
        });
    }
    for entry in seq.entries() {
        entry.check_uniform_entourage(tower)?;
    }
    seq.tail_entourage().check_uniform_entourage(tower)?;
    ball(x, &sigma_sum(seq, Upto::Omega)?)
}

/// A base ball together with its center.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CenteredBall {
    pub center: usize,
    pub set: PointSet,
}

/// Every distinct base ball `B(x; Σ U_i)` whose entries are grid entourages
/// and whose tail repeats one top-level grid entourage `E`.
///
/// Balls grow summand by summand, `B(x; U+V) = B(B(x;U); V)`, so the balls
/// after level `n` are the images of the balls after level `n-1`; keeping
/// only distinct sets keeps each frontier small. A constant tail `E` adds
/// `E + E + …`, whose image is the reflexive–transitive closure `E*`.
pub fn base_balls(tower: &Tower) -> Vec<CenteredBall> {
    let top = tower.top();
    let size = tower.size();
    let grids: Vec<Vec<Entourage>> = (0..tower.levels())
        .map(|n| tower.grid(n).entourages(tower).collect())
        .collect();
    let tails: Vec<Relation> = grids[top].iter().map(|e| e.relation().closure()).collect();
    let per_center: Vec<Vec<CenteredBall>> = (0..size)
        .into_par_iter()
        .map(|x| {
            let height = tower.height_unchecked(x);
            let mut frontier: BTreeSet<PointSet> = grids[height]
                .iter()
                .map(|u| u.relation().row(x).resized(size))
                .collect();
            for grid in &grids[height + 1..] {
                frontier = frontier
                    .iter()
                    .flat_map(|s| {
                        grid.iter()
                            .map(move |u| u.relation().image(&s.resized(u.size())).resized(size))
                    })
                    .collect();
            }
            let finished: BTreeSet<PointSet> = frontier
                .iter()
                .flat_map(|s| tails.iter().map(move |t| t.image(s)))
                .collect();
            finished
                .into_iter()
                .map(|set| CenteredBall { center: x, set })
                .collect()
        })
        .collect();
    per_center.into_iter().flatten().collect()
}

/// The topology of the uniform direct limit, generated by its base balls.
pub fn ulim_topology(tower: &Tower) -> TopologyFamily {
    let balls = base_balls(tower);
    TopologyFamily::generated_by(tower.size(), balls.iter().map(|b| &b.set))
}

/// The final topology of the inclusions `X_n → X`: `O` is open iff every
/// `O ∩ X_n` is a union of zero-classes of `d⁽ⁿ⁾`.
pub fn tlim_topology(tower: &Tower) -> TopologyFamily {
    let size = tower.size();
    let mut rel = Relation::diagonal(size);
    for n in 0..tower.levels() {
        rel = rel.union(&tower.metric(n).zero_relation().promote(size));
    }
    let closed = rel.closure();
    TopologyFamily {
        ground_size: size,
        minimal: (0..size).map(|x| closed.row(x).clone()).collect(),
    }
}

/// `‖x‖ = min{n ≤ |x| : x lies in the closure of X_n inside X_{|x|}}`.
pub fn seminorm_height(tower: &Tower, x: usize) -> Result<usize> {
    let height = tower.height(x)?;
    let metric = tower.metric(height);
    Ok((0..=height)
        .find(|&n| (0..tower.level_size(n)).any(|a| num_traits::Zero::is_zero(metric.get(a, x))))
        .unwrap_or(height))
}

/// Result of checking that the grid base balls form a base of the topology
/// they generate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BaseReport {
    pub balls: usize,
    /// A ball and a point of it around which no ball fits inside.
    pub not_open: Option<(CenteredBall, usize)>,
    /// A point whose smallest open neighbourhood contains no ball at it.
    pub not_base_at: Option<usize>,
}

impl BaseReport {
    pub fn holds(&self) -> bool {
        self.not_open.is_none() && self.not_base_at.is_none()
    }
}

/// Checks, over every grid base ball, that each is open (every point of it
/// is the center of some ball inside it) and that the balls centered at each
/// point form a neighbourhood base there.
pub fn check_base(tower: &Tower) -> BaseReport {
    let balls = base_balls(tower);
    let size = tower.size();
    let mut at: Vec<Vec<&PointSet>> = vec![Vec::new(); size];
    for b in &balls {
        at[b.center].push(&b.set);
    }
    let not_open = balls.par_iter().find_map_first(|b| {
        b.set
            .iter()
            .find(|&y| !at[y].iter().any(|s| s.is_subset(&b.set)))
            .map(|y| (b.clone(), y))
    });
    let topology = TopologyFamily::generated_by(size, balls.iter().map(|b| &b.set));
    let not_base_at = (0..size).find(|&x| !at[x].iter().any(|s| s.is_subset(topology.neighbourhood(x))));
    BaseReport {
        balls: balls.len(),
        not_open,
        not_base_at,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use crate::relation::TailPolicy;
    use crate::tower::fixtures::{square, t1};
    use crate::tower::{validate_tower, Pseudometric, RawTower};

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    fn zero_tail(t: &Tower) -> TailPolicy {
        TailPolicy::Given(t.zero_entourage(t.top()))
    }

    #[test]
    fn base_ball_examples() {
        let t = t1();
        let r = frac(3, 2);
        let seq = EntourageSequence::new(
            &t,
            0,
            vec![
                Entourage::diagonal(&t, 0),
                t.grid_entourage(1, &r),
                t.grid_entourage(2, &r),
            ],
            zero_tail(&t),
        )
        .unwrap();
        assert_eq!(base_ball(&t, A, &seq).unwrap().to_vec(), vec![A, B, C]);
        let zeros = EntourageSequence::from_fn(&t, 0, |n| t.zero_entourage(n), zero_tail(&t)).unwrap();
        assert_eq!(base_ball(&t, A, &zeros).unwrap().to_vec(), vec![A]);
        let single = EntourageSequence::new(&t, 2, vec![t.grid_entourage(2, &r)], zero_tail(&t)).unwrap();
        assert_eq!(base_ball(&t, C, &single).unwrap().to_vec(), vec![B, C]);
        assert_eq!(
            base_ball(&t, A, &single).unwrap_err(),
            Error::StartMismatch { expected: 0, found: 2 }
        );
    }

    #[test]
    fn base_ball_rejects_non_entourages() {
        let raw = RawTower {
            labels: vec!["a".into(), "b".into()],
            level_sizes: vec![2],
            metrics: vec![square(&[&[0, 0], &[0, 0]])],
            strict: false,
        };
        let t = validate_tower(raw).unwrap();
        let seq = EntourageSequence::new(&t, 0, vec![Entourage::diagonal(&t, 0)], TailPolicy::RepeatLast).unwrap();
        assert_eq!(
            base_ball(&t, A, &seq).unwrap_err(),
            Error::NotAnEntourage { level: 0, i: 0, j: 1 }
        );
    }

    /// The frontier enumeration must produce exactly the balls obtained by
    /// summing every grid sequence explicitly.
    #[test]
    fn frontier_matches_explicit_sums() {
        let t = t1();
        let mut explicit = BTreeSet::new();
        for x in 0..t.size() {
            let h = t.height(x).unwrap();
            let grids: Vec<Vec<Entourage>> = (h..t.levels()).map(|n| t.grid(n).entourages(&t).collect()).collect();
            let mut choices: Vec<Vec<Entourage>> = vec![Vec::new()];
            for g in &grids {
                choices = choices
                    .iter()
                    .flat_map(|c| {
                        g.iter().map(move |e| {
                            let mut c = c.clone();
                            c.push(e.clone());
                            c
                        })
                    })
                    .collect();
            }
            for entries in choices {
                for tail in t.grid(t.top()).entourages(&t) {
                    let seq = EntourageSequence::new(&t, h, entries.clone(), TailPolicy::Given(tail)).unwrap();
                    explicit.insert(CenteredBall {
                        center: x,
                        set: base_ball(&t, x, &seq).unwrap(),
                    });
                }
            }
        }
        let fast: BTreeSet<CenteredBall> = base_balls(&t).into_iter().collect();
        assert_eq!(fast, explicit);
    }

    #[test]
    fn t1_topologies_are_discrete() {
        let t = t1();
        assert!(ulim_topology(&t).is_discrete());
        assert!(tlim_topology(&t).is_discrete());
        let cmp = compare_topologies(&ulim_topology(&t), &tlim_topology(&t)).unwrap();
        assert_eq!(cmp.verdict, Comparison::Equal);
        assert!(check_base(&t).holds());
    }

    #[test]
    fn indiscrete_tower() {
        let t = Tower::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![1, 3],
            vec![Pseudometric::zero(1), Pseudometric::zero(3)],
            false,
        )
        .unwrap();
        assert!(ulim_topology(&t).is_indiscrete());
        assert!(tlim_topology(&t).is_indiscrete());
        assert_eq!(ulim_topology(&t).opens().len(), 2);
    }

    #[test]
    fn glued_points_are_never_separated() {
        let raw = RawTower {
            labels: vec!["a".into(), "b".into(), "c".into()],
            level_sizes: vec![1, 3],
            metrics: vec![square(&[&[0]]), square(&[&[0, 0, 1], &[0, 0, 1], &[1, 1, 0]])],
            strict: false,
        };
        let t = validate_tower(raw).unwrap();
        let top = ulim_topology(&t);
        assert!(top.opens().iter().all(|o| o.contains(A) == o.contains(B)));
        assert_eq!(top.neighbourhood(C).to_vec(), vec![C]);
    }

    #[test]
    fn comparison_examples() {
        let d = TopologyFamily::discrete(2);
        let i = TopologyFamily::indiscrete(2);
        let cmp = compare_topologies(&d, &i).unwrap();
        assert_eq!(cmp.verdict, Comparison::AFiner);
        assert_eq!(cmp.witness.unwrap().to_vec(), vec![0]);
        assert_eq!(compare_topologies(&i, &d).unwrap().verdict, Comparison::BFiner);
        assert_eq!(compare_topologies(&d, &d).unwrap().verdict, Comparison::Equal);
        assert!(compare_topologies(&d, &TopologyFamily::discrete(3)).is_err());
        // Sierpiński against its mirror image.
        let s = TopologyFamily::from_neighbourhoods(vec![PointSet::full(2), PointSet::singleton(2, 1)]);
        let m = s.transport(&[1, 0]);
        assert_eq!(compare_topologies(&s, &m).unwrap().verdict, Comparison::Incomparable);
    }

    #[test]
    fn opens_of_sierpinski() {
        let s = TopologyFamily::from_neighbourhoods(vec![PointSet::full(2), PointSet::singleton(2, 1)]);
        let opens: Vec<Vec<usize>> = s.opens().iter().map(PointSet::to_vec).collect();
        assert_eq!(opens.len(), 3);
        assert!(opens.contains(&vec![1]) && !opens.contains(&vec![0]));
    }

    #[test]
    fn seminorm_height_sees_closure() {
        let raw = RawTower {
            labels: vec!["a".into(), "b".into(), "c".into()],
            level_sizes: vec![1, 2, 3],
            metrics: vec![
                square(&[&[0]]),
                square(&[&[0, 1], &[1, 0]]),
                square(&[&[0, 1, 1], &[1, 0, 0], &[1, 0, 0]]),
            ],
            strict: false,
        };
        let t = validate_tower(raw).unwrap();
        assert_eq!(seminorm_height(&t, A).unwrap(), 0);
        assert_eq!(seminorm_height(&t, B).unwrap(), 1);
        // c is glued to b, so it lies in the closure of X_1.
        assert_eq!(seminorm_height(&t, C).unwrap(), 1);
    }
}
