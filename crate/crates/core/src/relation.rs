//! Arithmetic of relations on a finite ground set.
//!
//! Addition is relational composition,
//! `U + V = {(x,z) : ∃y (x,y) ∈ U, (y,z) ∈ V}`, which is associative but not
//! commutative. Balls are taken so that summation order is the order in
//! which balls are grown: `B(B(x;U);V) = B(x;U+V)`. With this composition
//! that forces `B(x;U) = {y : (x,y) ∈ U}`, the `U`-image of `x`. For the
//! symmetric entourages `{d < ε}` this is the same set as the preimage.

use crate::bits::PointSet;
use crate::error::{Error, Result};
use crate::tower::Tower;

/// A binary relation on `{0, …, size-1}`, stored as one bit row per point:
/// row `x` is `{y : (x,y) ∈ R}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Relation {
    size: usize,
    rows: Vec<PointSet>,
}

impl Relation {
    pub fn empty(size: usize) -> Self {
        Relation {
            size,
            rows: vec![PointSet::empty(size); size],
        }
    }

    pub fn diagonal(size: usize) -> Self {
        Relation {
            size,
            rows: (0..size).map(|i| PointSet::singleton(size, i)).collect(),
        }
    }

    pub fn full(size: usize) -> Self {
        Relation {
            size,
            rows: vec![PointSet::full(size); size],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> bool>(size: usize, mut f: F) -> Self {
        let mut rel = Self::empty(size);
        for i in 0..size {
            for j in 0..size {
                if f(i, j) {
                    rel.rows[i].insert(j);
                }
            }
        }
        rel
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(size: usize, pairs: I) -> Result<Self> {
        let mut rel = Self::empty(size);
        for (i, j) in pairs {
            for index in [i, j] {
                if index >= size {
                    return Err(Error::IndexOutOfRange { index, size });
                }
            }
            rel.rows[i].insert(j);
        }
        Ok(rel)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.size && self.rows[x].contains(y)
    }

    pub fn insert(&mut self, x: usize, y: usize) {
        self.rows[x].insert(y);
    }

    /// Row `x`: the set `{y : (x,y) ∈ R}`.
    pub fn row(&self, x: usize) -> &PointSet {
        &self.rows[x]
    }

    /// All pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |j| (i, j)))
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(PointSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(PointSet::is_empty)
    }

    pub fn is_full(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.size)
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.size).all(|i| self.contains(i, i))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(i, j)| self.contains(j, i))
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.size == other.size && self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }

    pub fn transpose(&self) -> Relation {
        Relation::from_fn(self.size, |i, j| self.contains(j, i))
    }

    pub fn union(&self, other: &Relation) -> Relation {
        assert_eq!(self.size, other.size);
        Relation {
            size: self.size,
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a.union(b)).collect(),
        }
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        assert_eq!(self.size, other.size);
        Relation {
            size: self.size,
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.intersection(b))
                .collect(),
        }
    }

    /// `R ∪ R⁻¹`.
    pub fn symmetrize(&self) -> Relation {
        self.union(&self.transpose())
    }

    /// Relational composition on one ground set: `(x,z)` iff some `y` has
    /// `(x,y) ∈ self` and `(y,z) ∈ other`.
    pub fn compose(&self, other: &Relation) -> Relation {
        assert_eq!(self.size, other.size);
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = PointSet::empty(self.size);
                for y in row.iter() {
                    out.union_with(&other.rows[y]);
                }
                out
            })
            .collect();
        Relation { size: self.size, rows }
    }

    /// `{y : (x,y) ∈ R for some x ∈ set}`.
    pub fn image(&self, set: &PointSet) -> PointSet {
        let mut out = PointSet::empty(self.size);
        for x in set.iter().filter(|&x| x < self.size) {
            out.union_with(&self.rows[x]);
        }
        out
    }

    /// Embeds into a larger ground set whose first `self.size()` points are
    /// this one's, adding the diagonal of the new points.
    pub fn promote(&self, size: usize) -> Relation {
        assert!(size >= self.size);
        let mut rows: Vec<PointSet> = self.rows.iter().map(|r| r.resized(size)).collect();
        rows.extend((self.size..size).map(|i| PointSet::singleton(size, i)));
        Relation { size, rows }
    }

    /// Restriction to the first `size` points.
    pub fn restrict(&self, size: usize) -> Relation {
        assert!(size <= self.size);
        Relation {
            size,
            rows: self.rows[..size].iter().map(|r| r.resized(size)).collect(),
        }
    }

    /// Reflexive–transitive closure.
    pub fn closure(&self) -> Relation {
        let mut out = self.union(&Relation::diagonal(self.size));
        for k in 0..self.size {
            let via = out.rows[k].clone();
            for i in 0..self.size {
                if out.rows[i].contains(k) {
                    out.rows[i].union_with(&via);
                }
            }
        }
        out
    }
}

/// A reflexive relation on the ground set of one tower level.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Entourage {
    level: usize,
    relation: Relation,
}

impl Entourage {
    /// Checks that `relation` has the size of level `level` and is reflexive.
    pub fn new(tower: &Tower, level: usize, relation: Relation) -> Result<Self> {
        tower.check_level(level)?;
        if relation.size() != tower.level_size(level) {
            return Err(Error::LevelMismatch(format!(
                "relation of size {} on level {level} of size {}",
                relation.size(),
                tower.level_size(level)
            )));
        }
        Self::on_level(level, relation)
    }

    /// Like [`Entourage::new`] without a tower: only reflexivity is checked.
    pub fn on_level(level: usize, relation: Relation) -> Result<Self> {
        if let Some(index) = (0..relation.size()).find(|&i| !relation.contains(i, i)) {
            return Err(Error::NotReflexive { level, index });
        }
        Ok(Entourage { level, relation })
    }

    pub(crate) fn from_relation_unchecked(level: usize, relation: Relation) -> Self {
        debug_assert!(relation.is_reflexive());
        Entourage { level, relation }
    }

    /// The listed pairs plus the diagonal.
    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(tower: &Tower, level: usize, pairs: I) -> Result<Self> {
        tower.check_level(level)?;
        let size = tower.level_size(level);
        let rel = Relation::from_pairs(size, pairs)?.union(&Relation::diagonal(size));
        Ok(Entourage { level, relation: rel })
    }

    pub fn diagonal(tower: &Tower, level: usize) -> Self {
        Entourage {
            level,
            relation: Relation::diagonal(tower.level_size(level)),
        }
    }

    pub fn full(tower: &Tower, level: usize) -> Self {
        Entourage {
            level,
            relation: Relation::full(tower.level_size(level)),
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }

    pub fn size(&self) -> usize {
        self.relation.size()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.relation.contains(x, y)
    }

    pub fn is_symmetric(&self) -> bool {
        self.relation.is_symmetric()
    }

    pub fn symmetrize(&self) -> Entourage {
        Entourage {
            level: self.level,
            relation: self.relation.symmetrize(),
        }
    }

    pub fn is_subset(&self, other: &Entourage) -> bool {
        self.level == other.level && self.relation.is_subset(&other.relation)
    }

    /// Re-embeds on a higher level of size `size`.
    pub fn promote(&self, level: usize, size: usize) -> Result<Entourage> {
        if level < self.level || size < self.size() || (level == self.level && size != self.size()) {
            return Err(Error::LevelMismatch(format!(
                "cannot promote level {} (size {}) to level {level} (size {size})",
                self.level,
                self.size()
            )));
        }
        Ok(Entourage {
            level,
            relation: self.relation.promote(size),
        })
    }

    /// Whether this is an entourage of its level's uniformity, i.e. contains
    /// the zero relation of that level. Returns the first missing pair.
    pub fn missing_zero_pair(&self, tower: &Tower) -> Option<(usize, usize)> {
        tower
            .metric(self.level)
            .zero_relation()
            .pairs()
            .find(|&(i, j)| !self.contains(i, j))
    }

    pub fn check_uniform_entourage(&self, tower: &Tower) -> Result<()> {
        tower.check_level(self.level)?;
        if self.size() != tower.level_size(self.level) {
            return Err(Error::LevelMismatch(format!(
                "entourage of size {} on level {} of size {}",
                self.size(),
                self.level,
                tower.level_size(self.level)
            )));
        }
        match self.missing_zero_pair(tower) {
            Some((i, j)) => Err(Error::NotAnEntourage {
                level: self.level,
                i,
                j,
            }),
            None => Ok(()),
        }
    }
}

/// `U + V`, after promoting both summands to the higher of their levels.
pub fn compose(u: &Entourage, v: &Entourage) -> Result<Entourage> {
    let (level, size) = if u.level >= v.level {
        (u.level, u.size())
    } else {
        (v.level, v.size())
    };
    let u = u.promote(level, size)?;
    let v = v.promote(level, size)?;
    Ok(Entourage {
        level,
        relation: u.relation.compose(&v.relation),
    })
}

/// `k·U` with `1·U = U` and `(k+1)·U = k·U + U`.
pub fn multiple(u: &Entourage, k: usize) -> Result<Entourage> {
    if k == 0 {
        return Err(Error::ZeroMultiple);
    }
    let mut acc = u.clone();
    for _ in 1..k {
        acc = compose(&acc, u)?;
    }
    Ok(acc)
}

/// What `U_i` is for `i > N`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TailPolicy {
    RepeatLast,
    Given(Entourage),
}

/// Entourages `U_k, …, U_N` on the levels `k..=N` of one tower, with a tail
/// policy for the levels past the top.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EntourageSequence {
    start: usize,
    entries: Vec<Entourage>,
    tail: TailPolicy,
}

/// Upper limit of a sum.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Upto {
    Level(usize),
    Omega,
}

impl EntourageSequence {
    pub fn new(tower: &Tower, start: usize, entries: Vec<Entourage>, tail: TailPolicy) -> Result<Self> {
        tower.check_level(start)?;
        if entries.len() != tower.levels() - start {
            return Err(Error::LevelMismatch(format!(
                "sequence from level {start} needs {} entries, got {}",
                tower.levels() - start,
                entries.len()
            )));
        }
        for (offset, entry) in entries.iter().enumerate() {
            let level = start + offset;
            if entry.level != level || entry.size() != tower.level_size(level) {
                return Err(Error::LevelMismatch(format!(
                    "entry {offset} lives on level {} (size {}), expected level {level}",
                    entry.level,
                    entry.size()
                )));
            }
        }
        if let TailPolicy::Given(tail) = &tail {
            if tail.level != tower.top() || tail.size() != tower.size() {
                return Err(Error::LevelMismatch("tail entourage must live on the top level".into()));
            }
        }
        Ok(EntourageSequence { start, entries, tail })
    }

    /// Level `n` gets `f(n)` for every `n ≥ start`.
    pub fn from_fn<F: FnMut(usize) -> Entourage>(tower: &Tower, start: usize, f: F, tail: TailPolicy) -> Result<Self> {
        let entries = (start..tower.levels()).map(f).collect();
        Self::new(tower, start, entries, tail)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn entries(&self) -> &[Entourage] {
        &self.entries
    }

    pub fn entry(&self, level: usize) -> &Entourage {
        &self.entries[level - self.start]
    }

    pub fn tail(&self) -> &TailPolicy {
        &self.tail
    }

    pub fn tail_entourage(&self) -> &Entourage {
        match &self.tail {
            TailPolicy::RepeatLast => self.entries.last().unwrap(),
            TailPolicy::Given(e) => e,
        }
    }

    /// `U_i` for any `i ≥ start`, including past the top level.
    pub fn term(&self, i: usize) -> &Entourage {
        let top = self.start + self.entries.len() - 1;
        if i <= top {
            self.entry(i)
        } else {
            self.tail_entourage()
        }
    }
}

/// `Σ_{start ≤ i ≤ upto} U_i`, or the union over all finite sums for
/// [`Upto::Omega`]. The ω-sum is reached as a fixpoint: partial sums only
/// grow (every summand is reflexive) and relations on a finite set form a
/// finite lattice.
pub fn sigma_sum(seq: &EntourageSequence, upto: Upto) -> Result<Entourage> {
    let top = seq.start + seq.entries.len() - 1;
    let last = match upto {
        Upto::Level(n) if n < seq.start => {
            return Err(Error::LevelMismatch(format!("sum up to {n} starts at {}", seq.start)))
        }
        Upto::Level(n) => n,
        Upto::Omega => top,
    };
    let mut acc = seq.term(seq.start).clone();
    for i in seq.start + 1..=last {
        acc = compose(&acc, seq.term(i))?;
    }
    if upto == Upto::Omega {
        let tail = seq.tail_entourage();
        loop {
            let next = compose(&acc, tail)?;
            if next == acc {
                break;
            }
            acc = next;
        }
    }
    Ok(acc)
}

/// `B(x;U) = {y : (x,y) ∈ U}`.
pub fn ball(x: usize, u: &Entourage) -> Result<PointSet> {
    if x >= u.size() {
        return Err(Error::IndexOutOfRange {
            index: x,
            size: u.size(),
        });
    }
    Ok(u.relation.row(x).clone())
}

/// `B(A;U) = ⋃_{a ∈ A} B(a;U)`.
pub fn ball_set(set: &PointSet, u: &Entourage) -> Result<PointSet> {
    if let Some(index) = set.iter().find(|&a| a >= u.size()) {
        return Err(Error::IndexOutOfRange { index, size: u.size() });
    }
    Ok(u.relation.image(&set.resized(u.size())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::fixtures::t1;
    use proptest::prelude::*;

    fn e(t: &Tower, level: usize, pairs: &[(usize, usize)]) -> Entourage {
        Entourage::from_pairs(t, level, pairs.iter().copied()).unwrap()
    }

    /// Independent composition oracle: enumerate all witness triples.
    fn compose_by_triples(u: &Relation, v: &Relation) -> Relation {
        let n = u.size();
        let mut out = Relation::empty(n);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if u.contains(x, y) && v.contains(y, z) {
                        out.insert(x, z);
                    }
                }
            }
        }
        out
    }

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    #[test]
    fn compose_examples() {
        let t = t1();
        let eu = e(&t, 2, &[(A, B), (B, A)]);
        let ev = e(&t, 2, &[(B, C), (C, B)]);
        let uv = compose(&eu, &ev).unwrap();
        let expected = e(&t, 2, &[(A, B), (B, A), (B, C), (C, B), (A, C)]);
        assert_eq!(uv, expected);
        assert_eq!(uv.relation(), &compose_by_triples(eu.relation(), ev.relation()));
        let vu = compose(&ev, &eu).unwrap();
        assert!(vu.contains(C, A) && !vu.contains(A, C));
        let diag = Entourage::diagonal(&t, 2);
        assert_eq!(compose(&eu, &diag).unwrap(), eu);
    }

    #[test]
    fn multiple_examples() {
        let t = t1();
        let eu = e(&t, 2, &[(A, B), (B, A)]);
        assert_eq!(multiple(&eu, 2).unwrap(), eu);
        assert_eq!(multiple(&eu, 1).unwrap(), eu);
        let diag = Entourage::diagonal(&t, 2);
        assert_eq!(multiple(&diag, 5).unwrap(), diag);
        assert_eq!(multiple(&eu, 0).unwrap_err(), Error::ZeroMultiple);
    }

    #[test]
    fn sigma_example() {
        let t = t1();
        let seq = EntourageSequence::new(
            &t,
            0,
            vec![
                Entourage::diagonal(&t, 0),
                e(&t, 1, &[(A, B), (B, A)]),
                e(&t, 2, &[(B, C), (C, B)]),
            ],
            TailPolicy::RepeatLast,
        )
        .unwrap();
        let sum = sigma_sum(&seq, Upto::Omega).unwrap();
        // (c,c) ∈ U_1 and (c,b) ∈ U_2 put (c,b) in the sum; nothing exits c
        // towards a.
        assert_eq!(sum, e(&t, 2, &[(A, B), (B, A), (B, C), (C, B), (A, C)]));
        assert!(!sum.contains(C, A));
        let again = compose(&sum, seq.tail_entourage()).unwrap();
        assert_eq!(again, sum);
    }

    #[test]
    fn sigma_trivial_cases() {
        let t = t1();
        let diag = EntourageSequence::from_fn(&t, 0, |n| Entourage::diagonal(&t, n), TailPolicy::RepeatLast).unwrap();
        assert_eq!(sigma_sum(&diag, Upto::Omega).unwrap(), Entourage::diagonal(&t, 2));
        let single = EntourageSequence::new(&t, 2, vec![e(&t, 2, &[(A, C)])], TailPolicy::RepeatLast).unwrap();
        assert_eq!(sigma_sum(&single, Upto::Level(2)).unwrap(), e(&t, 2, &[(A, C)]));
        assert!(sigma_sum(&single, Upto::Level(1)).is_err());
    }

    #[test]
    fn ball_examples() {
        let t = t1();
        let eu = e(&t, 2, &[(A, B), (B, A)]);
        let ev = e(&t, 2, &[(B, C), (C, B)]);
        // Image orientation: the ball of a sum grows through the summands in
        // order, a → b via E_U, then b → c via E_V.
        let uv = compose(&eu, &ev).unwrap();
        assert_eq!(ball(A, &uv).unwrap().to_vec(), vec![A, B, C]);
        let vu = compose(&ev, &eu).unwrap();
        assert_eq!(ball(A, &vu).unwrap().to_vec(), vec![A, B]);
        assert_eq!(ball(B, &Entourage::diagonal(&t, 2)).unwrap().to_vec(), vec![B]);
        assert!(ball(3, &uv).is_err());
    }

    #[test]
    fn ball_set_examples() {
        let t = t1();
        let ev = e(&t, 2, &[(B, C), (C, B)]);
        let ab = PointSet::from_indices(3, [A, B]);
        assert_eq!(ball_set(&ab, &ev).unwrap().to_vec(), vec![A, B, C]);
        assert!(ball_set(&PointSet::empty(3), &ev).unwrap().is_empty());
        assert_eq!(ball_set(&ab, &Entourage::diagonal(&t, 2)).unwrap(), ab);
    }

    #[test]
    fn promotion_keeps_pairs_and_adds_diagonal() {
        let t = t1();
        let low = Entourage::full(&t, 1);
        let high = low.promote(2, 3).unwrap();
        assert!(high.contains(A, B) && high.contains(C, C) && !high.contains(A, C));
        assert!(Entourage::full(&t, 2).promote(1, 2).is_err());
    }

    #[test]
    fn uniform_entourage_check() {
        let t = t1();
        assert!(t.zero_entourage(2).check_uniform_entourage(&t).is_ok());
        let diag = Entourage::diagonal(&t, 2);
        assert!(diag.check_uniform_entourage(&t).is_ok());
    }

    #[test]
    fn associativity_exhaustive_on_two_points() {
        let rels: Vec<Relation> = (0u32..16)
            .map(|bits| Relation::from_fn(2, |i, j| bits >> (i * 2 + j) & 1 == 1))
            .collect();
        for u in &rels {
            for v in &rels {
                for w in &rels {
                    assert_eq!(u.compose(v).compose(w), u.compose(&v.compose(w)));
                }
            }
        }
    }

    fn relation(n: usize) -> impl Strategy<Value = Relation> {
        proptest::collection::vec(any::<bool>(), n * n)
            .prop_map(move |bits| Relation::from_fn(n, |i, j| bits[i * n + j]))
    }

    fn reflexive(n: usize) -> impl Strategy<Value = Relation> {
        relation(n).prop_map(move |r| r.union(&Relation::diagonal(n)))
    }

    fn triple() -> impl Strategy<Value = (Relation, Relation, Relation)> {
        (1usize..=5).prop_flat_map(|n| (relation(n), relation(n), relation(n)))
    }

    proptest! {
        #[test]
        fn compose_matches_triples((u, v, _w) in triple()) {
            prop_assert_eq!(u.compose(&v), compose_by_triples(&u, &v));
        }

        #[test]
        fn associative((u, v, w) in triple()) {
            prop_assert_eq!(u.compose(&v).compose(&w), u.compose(&v.compose(&w)));
        }

        #[test]
        fn monotone((u, v, w) in triple()) {
            let bigger = u.union(&w);
            prop_assert!(u.compose(&v).is_subset(&bigger.compose(&v)));
            prop_assert!(v.compose(&u).is_subset(&v.compose(&bigger)));
        }

        #[test]
        fn diagonal_absorption((u, v) in (1usize..=5).prop_flat_map(|n| (reflexive(n), reflexive(n)))) {
            prop_assert!(u.union(&v).is_subset(&u.compose(&v)));
        }

        #[test]
        fn ball_of_sum_grows_in_summand_order(
            (u, v, x) in (1usize..=5).prop_flat_map(|n| (reflexive(n), reflexive(n), 0..n))
        ) {
            let u = Entourage::on_level(0, u).unwrap();
            let v = Entourage::on_level(0, v).unwrap();
            let nested = ball_set(&ball(x, &u).unwrap(), &v).unwrap();
            let direct = ball(x, &compose(&u, &v).unwrap()).unwrap();
            prop_assert_eq!(nested, direct);
        }
    }
}
