//! Small named instances used by the suite, the CLI and the tests.

use crate::rational::{int, Rational};
use crate::regularity::SpaceMap;
use crate::tower::{MonotonePseudometricSequence, Pseudometric, Tower};

fn metric(rows: &[&[i64]]) -> Pseudometric {
    let rows: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
    Pseudometric::new(rows).expect("fixture metrics are valid")
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Three points `a`, `b`, `c` added one per level, on a path of unit steps.
pub fn t1() -> Tower {
    Tower::new(
        labels(&["a", "b", "c"]),
        vec![1, 2, 3],
        vec![
            metric(&[&[0]]),
            metric(&[&[0, 1], &[1, 0]]),
            metric(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]),
        ],
        false,
    )
    .expect("valid fixture")
}

/// A sequence over [`t1`] whose top metric (`ac = 3`) is beaten by the
/// chain through `b`: the limit distance of `a` and `c` is 2.
pub fn m1() -> (Tower, MonotonePseudometricSequence) {
    let t = t1();
    let metrics = vec![
        Pseudometric::zero(1),
        metric(&[&[0, 1], &[1, 0]]),
        metric(&[&[0, 2, 3], &[2, 0, 1], &[3, 1, 0]]),
    ];
    let seq = MonotonePseudometricSequence::new(&t, metrics).expect("valid fixture");
    (t, seq)
}

/// Two points at distance `d_ab` on the top level, one on level 0.
pub fn two_level(d_ab: i64) -> Tower {
    Tower::new(
        labels(&["a", "b"]),
        vec![1, 2],
        vec![metric(&[&[0]]), metric(&[&[0, d_ab], &[d_ab, 0]])],
        false,
    )
    .expect("valid fixture")
}

/// Two points at distance 1, one level.
pub fn two_points() -> Tower {
    Tower::single(labels(&["p", "q"]), metric(&[&[0, 1], &[1, 0]])).expect("valid fixture")
}

/// `b` glued to `a` at distance zero, sent to a different point: every
/// restriction is continuous on its own, yet the map is not.
pub fn glued() -> SpaceMap {
    SpaceMap::new(two_level(0), two_points(), vec![0, 1]).expect("valid fixture")
}
