//! Brute-force reference computations.
//!
//! These deliberately share no code with the fast paths they check: heights
//! are recomputed from the level sizes and chains are enumerated one by one.

use crate::rational::Rational;
use crate::tower::{MonotonePseudometricSequence, Tower};

fn heights(tower: &Tower) -> Vec<usize> {
    (0..tower.size())
        .map(|x| {
            tower
                .level_sizes()
                .iter()
                .position(|&m| x < m)
                .expect("every point lies in the top level")
        })
        .collect()
}

/// Visits every simple chain extending `path`, passing the chain and its
/// weight to `visit`.
fn walk<F: FnMut(&[usize], &Rational)>(
    links: &[Vec<Rational>],
    path: &mut Vec<usize>,
    used: &mut Vec<bool>,
    weight: Rational,
    visit: &mut F,
) {
    visit(path, &weight);
    let last = *path.last().unwrap();
    for next in 0..links.len() {
        if !used[next] {
            used[next] = true;
            path.push(next);
            walk(links, path, used, &weight + &links[last][next], visit);
            path.pop();
            used[next] = false;
        }
    }
}

fn links(tower: &Tower, seq: &MonotonePseudometricSequence) -> Vec<Vec<Rational>> {
    let h = heights(tower);
    (0..tower.size())
        .map(|x| {
            (0..tower.size())
                .map(|y| seq.metric(h[x].max(h[y])).get(x, y).clone())
                .collect()
        })
        .collect()
}

fn minimize<P: Fn(&[usize]) -> bool>(tower: &Tower, seq: &MonotonePseudometricSequence, keep: P) -> Vec<Vec<Rational>> {
    let n = tower.size();
    let links = links(tower, seq);
    let mut best: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    for x in 0..n {
        let mut used = vec![false; n];
        used[x] = true;
        let mut path = vec![x];
        let row = &mut best[x];
        walk(&links, &mut path, &mut used, crate::rational::zero(), &mut |p, w| {
            if keep(p) {
                let y = *p.last().unwrap();
                if row[y].as_ref().is_none_or(|b| w < b) {
                    row[y] = Some(w.clone());
                }
            }
        });
    }
    best.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| v.expect("the direct link is a chain"))
                .collect()
        })
        .collect()
}

/// Minimum chain weight over all simple chains, for every pair.
pub fn chain_minimum(tower: &Tower, seq: &MonotonePseudometricSequence) -> Vec<Vec<Rational>> {
    minimize(tower, seq, |_| true)
}

/// Minimum over simple chains in which no interior point is at least as
/// high as both of its neighbours.
pub fn valley_chain_minimum(tower: &Tower, seq: &MonotonePseudometricSequence) -> Vec<Vec<Rational>> {
    let h = heights(tower);
    minimize(tower, seq, |p| p.windows(3).all(|w| h[w[1]] < h[w[0]].max(h[w[2]])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::fixtures::m1;
    use crate::rational::int;

    #[test]
    fn m1_by_enumeration() {
        let (t, seq) = m1();
        let d = chain_minimum(&t, &seq);
        assert_eq!(d[0][2], int(2));
        assert_eq!(d[0][1], int(1));
        assert_eq!(d[1][2], int(1));
        assert_eq!(valley_chain_minimum(&t, &seq), d);
    }
}
