//! Towers built from other towers: binary products, abelian group towers
//! with invariant metrics, and box products of pointed spaces.
//!
//! Every construction orders its points layer by layer (the points new at
//! level `n` come right after those of level `n-1`), lexicographically
//! within a layer, so levels stay prefixes of the ground set.

use num_traits::Zero;

use crate::bits::PointSet;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::relation::{ball, sigma_sum, EntourageSequence, TailPolicy, Upto};
use crate::topology::{compare_topologies, ulim_topology, TopologyComparison, TopologyFamily};
use crate::tower::{Pseudometric, Tower};

/// All tuples below `bounds`, lexicographically.
fn lex_tuples(bounds: &[usize]) -> Vec<Vec<usize>> {
    bounds.iter().fold(vec![Vec::new()], |acc, &b| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..b).map(move |v| {
                    let mut t = prefix.clone();
                    t.push(v);
                    t
                })
            })
            .collect()
    })
}

/// Orders the tuples of a growing family of boxes layer by layer.
/// `sizes[n][i]` is the size of coordinate `i` at level `n`; sizes never
/// shrink. Returns the tuples and the level sizes.
fn layered_tuples(sizes: &[Vec<usize>]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut tuples = Vec::new();
    let mut level_sizes = Vec::new();
    let mut previous: Option<&Vec<usize>> = None;
    for bounds in sizes {
        let is_old = |t: &Vec<usize>| previous.is_some_and(|p| t.iter().zip(p).all(|(c, b)| c < b));
        tuples.extend(lex_tuples(bounds).into_iter().filter(|t| !is_old(t)));
        level_sizes.push(tuples.len());
        previous = Some(bounds);
    }
    (tuples, level_sizes)
}

/// A product tower together with the coordinates of each of its points.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProductTower {
    pub tower: Tower,
    pub pairs: Vec<(usize, usize)>,
}

/// `X_n × Y_n` at every level with the max metric.
pub fn product_tower(a: &Tower, b: &Tower) -> Result<ProductTower> {
    if a.levels() != b.levels() {
        return Err(Error::LevelCountMismatch {
            left: a.levels(),
            right: b.levels(),
        });
    }
    let sizes: Vec<Vec<usize>> = (0..a.levels())
        .map(|n| vec![a.level_size(n), b.level_size(n)])
        .collect();
    let (tuples, level_sizes) = layered_tuples(&sizes);
    let pairs: Vec<(usize, usize)> = tuples.iter().map(|t| (t[0], t[1])).collect();
    let labels = pairs
        .iter()
        .map(|&(x, y)| format!("({},{})", a.label(x), b.label(y)))
        .collect();
    let metrics = (0..a.levels())
        .map(|n| {
            let (da, db) = (a.metric(n), b.metric(n));
            Pseudometric::from_fn(level_sizes[n], |i, j| {
                let ((x, y), (u, v)) = (pairs[i], pairs[j]);
                da.get(x, u).max(db.get(y, v)).clone()
            })
            .map_err(|d| d.at_level(n))
        })
        .collect::<Result<Vec<_>>>()?;
    let tower = Tower::new(labels, level_sizes, metrics, a.is_strict() && b.is_strict())?;
    Ok(ProductTower { tower, pairs })
}

/// The product of two topologies, laid out along `pairs`.
pub fn product_topology(a: &TopologyFamily, b: &TopologyFamily, pairs: &[(usize, usize)]) -> TopologyFamily {
    let n = pairs.len();
    let rectangles: Vec<PointSet> = pairs
        .iter()
        .map(|&(x, y)| {
            PointSet::from_indices(
                n,
                (0..n).filter(|&i| a.neighbourhood(x).contains(pairs[i].0) && b.neighbourhood(y).contains(pairs[i].1)),
            )
        })
        .collect();
    TopologyFamily::generated_by(n, rectangles.iter())
}

/// Compares the u-lim topology of `A × B` with the product of the u-lim
/// topologies of `A` and `B`.
pub fn check_multiplicativity(a: &Tower, b: &Tower) -> Result<TopologyComparison> {
    let product = product_tower(a, b)?;
    let rectangles = product_topology(&ulim_topology(a), &ulim_topology(b), &product.pairs);
    compare_topologies(&ulim_topology(&product.tower), &rectangles)
}

/// An abelian group on the top level of a tower whose levels are subgroups
/// and whose level metrics are translation invariant. The identity is point
/// `0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupTower {
    pub tower: Tower,
    op: Vec<Vec<usize>>,
    neg: Vec<usize>,
}

impl GroupTower {
    pub fn new(tower: Tower, op: Vec<Vec<usize>>) -> Result<GroupTower> {
        let n = tower.size();
        if op.len() != n || op.iter().any(|row| row.len() != n) {
            return Err(Error::Shape(format!("addition table must be {n}x{n}")));
        }
        if let Some(&bad) = op.iter().flatten().find(|&&v| v >= n) {
            return Err(Error::IndexOutOfRange { index: bad, size: n });
        }
        if let Some(x) = (0..n).find(|&x| op[0][x] != x) {
            return Err(Error::GroupAxiom(format!("0 + {x} != {x}")));
        }
        for x in 0..n {
            for y in 0..n {
                if op[x][y] != op[y][x] {
                    return Err(Error::GroupAxiom(format!("{x} + {y} != {y} + {x}")));
                }
                for z in 0..n {
                    if op[op[x][y]][z] != op[x][op[y][z]] {
                        return Err(Error::GroupAxiom(format!("({x} + {y}) + {z} != {x} + ({y} + {z})")));
                    }
                }
            }
        }
        let neg = (0..n)
            .map(|x| {
                (0..n)
                    .find(|&y| op[x][y] == 0)
                    .ok_or_else(|| Error::GroupAxiom(format!("{x} has no inverse")))
            })
            .collect::<Result<Vec<_>>>()?;
        for level in 0..tower.levels() {
            let m = tower.level_size(level);
            for x in 0..m {
                if neg[x] >= m || (0..m).any(|y| op[x][y] >= m) {
                    return Err(Error::GroupAxiom(format!("level {level} is not a subgroup")));
                }
            }
            let d = tower.metric(level);
            let triples = (0..m).flat_map(|g| (0..m).flat_map(move |x| (0..m).map(move |y| (g, x, y))));
            if let Some((g, x, y)) = triples
                .into_iter()
                .find(|&(g, x, y)| d.get(op[x][g], op[y][g]) != d.get(x, y))
            {
                return Err(Error::InvarianceViolation { level, x, y, g });
            }
        }
        Ok(GroupTower { tower, op, neg })
    }

    pub fn op(&self) -> &[Vec<usize>] {
        &self.op
    }

    pub fn add(&self, x: usize, y: usize) -> usize {
        self.op[x][y]
    }

    pub fn neg(&self, x: usize) -> usize {
        self.neg[x]
    }

    pub fn size(&self) -> usize {
        self.tower.size()
    }

    /// `A·B = {a + b}`.
    pub fn set_sum(&self, a: &PointSet, b: &PointSet) -> PointSet {
        let mut out = PointSet::empty(self.size());
        for x in a.iter() {
            for y in b.iter() {
                out.insert(self.add(x, y));
            }
        }
        out
    }

    /// `{g ∈ G_n : d⁽ⁿ⁾(g, e) < ε}` as a subset of the top group.
    pub fn identity_ball(&self, level: usize, eps: &Rational) -> PointSet {
        let d = self.tower.metric(level);
        PointSet::from_indices(self.size(), (0..d.size()).filter(|&g| d.get(g, 0) < eps))
    }
}

/// `(ℤ₂)¹ ⊂ (ℤ₂)² ⊂ (ℤ₂)³` with `x + y = x XOR y` on bit masks and the
/// Hamming metric weighting bit `i` by `2^{-i}`.
pub fn g1() -> GroupTower {
    let weight = |x: usize, y: usize| -> Rational {
        (0..3)
            .filter(|i| (x ^ y) >> i & 1 == 1)
            .map(|i| rational::frac(1, 1 << i))
            .sum()
    };
    let labels = (0..8).map(|x| format!("{x:03b}")).collect();
    let metrics = [2, 4, 8]
        .iter()
        .map(|&m| Pseudometric::from_fn(m, weight).expect("weighted Hamming is a metric"))
        .collect();
    let tower = Tower::new(labels, vec![2, 4, 8], metrics, true).expect("valid tower");
    let op = (0..8).map(|x| (0..8).map(|y| x ^ y).collect()).collect();
    GroupTower::new(tower, op).expect("valid group tower")
}

fn check_radii(group: &GroupTower, radii: &[Rational]) -> Result<()> {
    if radii.len() != group.tower.levels() {
        return Err(Error::Shape(format!(
            "{} radii for {} levels",
            radii.len(),
            group.tower.levels()
        )));
    }
    if radii.iter().any(|r| !rational::is_positive(r)) {
        return Err(Error::Shape("radii must be positive".into()));
    }
    Ok(())
}

/// `U_0·U_1·…·U_m` with `U_n = {g ∈ G_n : d⁽ⁿ⁾(g,e) < ε_n}`, for the first
/// `m + 1` radii.
pub fn ordered_product_ball(group: &GroupTower, radii: &[Rational]) -> Result<PointSet> {
    if radii.len() > group.tower.levels() || radii.iter().any(|r| !rational::is_positive(r)) {
        return Err(Error::Shape("need one positive radius per level".into()));
    }
    let mut acc = PointSet::singleton(group.size(), 0);
    for (n, eps) in radii.iter().enumerate() {
        acc = group.set_sum(&acc, &group.identity_ball(n, eps));
    }
    Ok(acc)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupVerdict {
    /// `B(e; Σ U_n^{LR})`.
    pub ball: PointSet,
    pub ordered_product: PointSet,
    pub ball_matches: bool,
    /// First pair `n < m` whose balls do not commute.
    pub noncommuting: Option<(usize, usize)>,
    /// Every `V_n·V_n ⊆ U_n` for the halved radii.
    pub halves_fit: bool,
    /// First prefix length `m` with `(∏V)·(∏V) ⊄ ∏U` over levels `0..=m`.
    pub eq_failure: Option<usize>,
}

impl GroupVerdict {
    pub fn passes(&self) -> bool {
        self.ball_matches && self.noncommuting.is_none() && self.halves_fit && self.eq_failure.is_none()
    }
}

/// The three group checks for one choice of radii.
///
/// The ω-sum uses the zero relation of the top level as its tail: the zero
/// subgroup lies in every `U_n`, so it changes nothing.
pub fn check_group_limit(group: &GroupTower, radii: &[Rational]) -> Result<GroupVerdict> {
    check_radii(group, radii)?;
    let t = &group.tower;
    let seq = EntourageSequence::from_fn(
        t,
        0,
        |n| t.grid_entourage(n, &radii[n]),
        TailPolicy::Given(t.zero_entourage(t.top())),
    )?;
    let ball = ball(0, &sigma_sum(&seq, Upto::Omega)?)?;
    let ordered_product = ordered_product_ball(group, radii)?;
    let balls: Vec<PointSet> = radii
        .iter()
        .enumerate()
        .map(|(n, r)| group.identity_ball(n, r))
        .collect();
    let noncommuting = (0..balls.len())
        .flat_map(|n| (n + 1..balls.len()).map(move |m| (n, m)))
        .find(|&(n, m)| group.set_sum(&balls[n], &balls[m]) != group.set_sum(&balls[m], &balls[n]));
    let two = rational::int(2);
    let halves: Vec<Rational> = radii.iter().map(|r| r / &two).collect();
    let halves_fit = (0..balls.len()).all(|n| {
        let v = group.identity_ball(n, &halves[n]);
        group.set_sum(&v, &v).is_subset(&balls[n])
    });
    let eq_failure = (0..radii.len()).find(|&m| {
        let v = ordered_product_ball(group, &halves[..=m]).expect("positive radii");
        let u = ordered_product_ball(group, &radii[..=m]).expect("positive radii");
        !group.set_sum(&v, &v).is_subset(&u)
    });
    Ok(GroupVerdict {
        ball_matches: ball == ordered_product,
        ball,
        ordered_product,
        noncommuting,
        halves_fit,
        eq_failure,
    })
}

/// A pseudometric space with a distinguished point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PointedSpace {
    pub labels: Vec<String>,
    pub metric: Pseudometric,
    pub basepoint: usize,
}

impl PointedSpace {
    pub fn new(labels: Vec<String>, metric: Pseudometric, basepoint: usize) -> Result<PointedSpace> {
        if labels.len() != metric.size() || metric.size() == 0 {
            return Err(Error::Shape("a pointed space needs one label per point".into()));
        }
        if basepoint >= metric.size() {
            return Err(Error::IndexOutOfRange {
                index: basepoint,
                size: metric.size(),
            });
        }
        Ok(PointedSpace {
            labels,
            metric,
            basepoint,
        })
    }

    pub fn size(&self) -> usize {
        self.metric.size()
    }
}

/// A box-product tower with the tuple behind each point. Tuple entries are
/// point indices of the factors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BoxTower {
    pub tower: Tower,
    pub tuples: Vec<Vec<usize>>,
}

/// Level `n` holds the tuples of the first `depth` factors that sit at the
/// basepoint in every coordinate past `n`; all levels carry the max metric.
pub fn box_tower(factors: &[PointedSpace], depth: usize) -> Result<BoxTower> {
    if depth == 0 || depth > factors.len() {
        return Err(Error::Shape(format!(
            "depth must lie in 1..={}, got {depth}",
            factors.len()
        )));
    }
    let factors = &factors[..depth];
    // Relabel each factor so that its basepoint comes first; a coordinate
    // past `n` is then confined to the prefix {0} of size one.
    let order: Vec<Vec<usize>> = factors
        .iter()
        .map(|f| {
            std::iter::once(f.basepoint)
                .chain((0..f.size()).filter(|&p| p != f.basepoint))
                .collect()
        })
        .collect();
    let sizes: Vec<Vec<usize>> = (0..depth)
        .map(|n| {
            factors
                .iter()
                .enumerate()
                .map(|(i, f)| if i <= n { f.size() } else { 1 })
                .collect()
        })
        .collect();
    let (ranked, level_sizes) = layered_tuples(&sizes);
    let tuples: Vec<Vec<usize>> = ranked
        .iter()
        .map(|t| t.iter().enumerate().map(|(i, &r)| order[i][r]).collect())
        .collect();
    let labels = tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t
                .iter()
                .enumerate()
                .map(|(i, &p)| factors[i].labels[p].as_str())
                .collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let distance = |i: usize, j: usize| -> Rational {
        factors
            .iter()
            .enumerate()
            .map(|(c, f)| f.metric.get(tuples[i][c], tuples[j][c]).clone())
            .max()
            .unwrap_or_else(rational::zero)
    };
    let metrics = level_sizes
        .iter()
        .enumerate()
        .map(|(n, &m)| Pseudometric::from_fn(m, distance).map_err(|d| d.at_level(n)))
        .collect::<Result<Vec<_>>>()?;
    let tower = Tower::new(labels, level_sizes, metrics, true)?;
    Ok(BoxTower { tower, tuples })
}

/// The box topology on the points of a box tower: the smallest open set
/// around a tuple is the product of the zero-classes of its coordinates.
pub fn box_topology(factors: &[PointedSpace], boxed: &BoxTower) -> TopologyFamily {
    let n = boxed.tuples.len();
    let neighbourhoods = boxed
        .tuples
        .iter()
        .map(|t| {
            PointSet::from_indices(
                n,
                (0..n).filter(|&j| {
                    boxed.tuples[j]
                        .iter()
                        .enumerate()
                        .all(|(c, &p)| factors[c].metric.get(t[c], p).is_zero())
                }),
            )
        })
        .collect::<Vec<_>>();
    TopologyFamily::generated_by(n, neighbourhoods.iter())
}

pub fn check_box_limit(factors: &[PointedSpace], depth: usize) -> Result<TopologyComparison> {
    let boxed = box_tower(factors, depth)?;
    compare_topologies(&ulim_topology(&boxed.tower), &box_topology(factors, &boxed))
}

/// Two-point factors `{*, 1}` with `d_i(*, 1) = 2^{-i}`.
pub fn halving_factors(count: usize) -> Vec<PointedSpace> {
    (0..count)
        .map(|i| {
            let d = rational::frac(1, 1 << i);
            let metric = Pseudometric::new(vec![vec![rational::zero(), d.clone()], vec![d, rational::zero()]])
                .expect("two-point metric");
            PointedSpace::new(vec!["*".into(), "1".into()], metric, 0).expect("valid factor")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use crate::topology::Comparison;
    use crate::tower::fixtures::t1;

    #[test]
    fn layered_order() {
        let (tuples, sizes) = layered_tuples(&[vec![1, 1], vec![2, 2]]);
        assert_eq!(sizes, vec![1, 4]);
        assert_eq!(tuples, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn t1_squared() {
        let t = t1();
        let p = product_tower(&t, &t).unwrap();
        assert_eq!(p.tower.level_sizes(), &[1, 4, 9]);
        let ab = p.pairs.iter().position(|&x| x == (0, 1)).unwrap();
        let ba = p.pairs.iter().position(|&x| x == (1, 0)).unwrap();
        assert_eq!(p.tower.metric(1).get(ab, ba), &int(1));
        for (i, &(x, y)) in p.pairs.iter().enumerate() {
            let h = t.height(x).unwrap().max(t.height(y).unwrap());
            assert_eq!(p.tower.height(i).unwrap(), h);
        }
        assert_eq!(check_multiplicativity(&t, &t).unwrap().verdict, Comparison::Equal);
    }

    #[test]
    fn product_with_a_point() {
        let point = Tower::single(vec!["o".into()], Pseudometric::zero(1)).unwrap();
        let a = Tower::single(
            vec!["p".into(), "q".into()],
            Pseudometric::new(vec![vec![int(0), int(3)], vec![int(3), int(0)]]).unwrap(),
        )
        .unwrap();
        let p = product_tower(&a, &point).unwrap();
        assert_eq!(p.tower.metric(0), a.metric(0));
        assert_eq!(
            product_tower(&a, &t1()).unwrap_err(),
            Error::LevelCountMismatch { left: 1, right: 3 }
        );
    }

    #[test]
    fn indiscrete_product() {
        let z = Tower::single(vec!["p".into(), "q".into()], Pseudometric::zero(2)).unwrap();
        let cmp = check_multiplicativity(&z, &z).unwrap();
        assert_eq!(cmp.verdict, Comparison::Equal);
        assert!(ulim_topology(&product_tower(&z, &z).unwrap().tower).is_indiscrete());
    }

    #[test]
    fn g1_balls() {
        let g = g1();
        let big = vec![int(5), int(5), int(5)];
        assert_eq!(ordered_product_ball(&g, &big).unwrap().len(), 8);
        let small = vec![frac(1, 8), frac(1, 8), frac(1, 8)];
        assert_eq!(ordered_product_ball(&g, &small).unwrap().to_vec(), vec![0]);
        let radii = vec![frac(1, 2), frac(3, 4), frac(3, 8)];
        let v = check_group_limit(&g, &radii).unwrap();
        // Level 1 admits bit 1 (weight 1/2), level 2 bit 2 (weight 1/4).
        assert_eq!(v.ordered_product.to_vec(), vec![0, 2, 4, 6]);
        assert!(v.passes(), "{v:?}");
        assert!(check_group_limit(&g, &big).unwrap().passes());
        assert!(check_group_limit(&g, &small).unwrap().passes());
    }

    #[test]
    fn group_validation() {
        let g = g1();
        let mut metrics: Vec<Pseudometric> = g.tower.metrics().to_vec();
        // Make d(000, 011) = 1 while d(001, 010) stays 3/2.
        metrics[1] = Pseudometric::from_fn(4, |x, y| {
            if x == y {
                int(0)
            } else if (x, y) == (0, 3) || (x, y) == (3, 0) {
                int(1)
            } else {
                g.tower.metric(1).get(x, y).clone()
            }
        })
        .unwrap();
        let tower = Tower::new(g.tower.labels().to_vec(), vec![2, 4, 8], metrics, false).unwrap();
        assert!(matches!(
            GroupTower::new(tower, g.op().to_vec()).unwrap_err(),
            Error::InvarianceViolation { level: 1, .. }
        ));
        let mut op = g.op().to_vec();
        op[1][2] = 2;
        assert!(matches!(
            GroupTower::new(g.tower.clone(), op).unwrap_err(),
            Error::GroupAxiom(_)
        ));
    }

    #[test]
    fn halving_box() {
        let factors = halving_factors(3);
        let b = box_tower(&factors, 3).unwrap();
        assert_eq!(b.tower.level_sizes(), &[2, 4, 8]);
        let x = b.tuples.iter().position(|t| t == &vec![1, 0, 0]).unwrap();
        let y = b.tuples.iter().position(|t| t == &vec![1, 1, 0]).unwrap();
        assert_eq!(b.tower.metric(1).get(x, y), &frac(1, 2));
        assert_eq!(check_box_limit(&factors, 3).unwrap().verdict, Comparison::Equal);
        assert!(ulim_topology(&b.tower).is_discrete());
    }

    #[test]
    fn box_of_one_factor_is_the_factor() {
        let factors = halving_factors(1);
        let b = box_tower(&factors, 1).unwrap();
        assert_eq!(b.tower.metric(0), &factors[0].metric);
        assert!(box_tower(&factors, 2).is_err());
    }

    #[test]
    fn box_with_moved_basepoint() {
        let metric = Pseudometric::new(vec![
            vec![int(0), int(1), int(0)],
            vec![int(1), int(0), int(1)],
            vec![int(0), int(1), int(0)],
        ])
        .unwrap();
        let f = PointedSpace::new(vec!["x".into(), "y".into(), "z".into()], metric, 1).unwrap();
        let factors = vec![f.clone(), f];
        let b = box_tower(&factors, 2).unwrap();
        assert_eq!(b.tower.level_sizes(), &[3, 9]);
        assert!(b.tuples[..3].iter().all(|t| t[1] == 1));
        assert_eq!(check_box_limit(&factors, 2).unwrap().verdict, Comparison::Equal);
    }
}
