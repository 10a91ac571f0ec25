//! The theorem suite: every check run over fixtures and seeded instances.
//!
//! A report line records the check, the instance, a pass/fail verdict and a
//! JSON certificate. Passing lines carry the computed witness data, failing
//! lines the counterexample. Reports come out ordered by check, then
//! fixtures before seeds, whatever order the instances ran in.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bits::PointSet;
use crate::constructions::{check_box_limit, check_group_limit, check_multiplicativity, g1, halving_factors};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::generate::{self, Profile};
use crate::limit::{
    adequate_sequence, halving_ladder, ladder_sequence, limit_pseudometric, valley_matrix, verify_generation,
};
use crate::oracle::chain_minimum;
use crate::rational::{self, Rational};
use crate::regularity::{continuity_criterion, homeo_criterion, SpaceMap};
use crate::relation::{EntourageSequence, TailPolicy};
use crate::topology::{check_base, compare_topologies, tlim_topology, ulim_topology, Comparison};
use crate::tower::{MonotonePseudometricSequence, Pseudometric, Tower};

/// The checks of the suite, in report order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Check {
    NeighbourhoodBase,
    Multiplicativity,
    ChainLimit,
    Valley,
    Adequate,
    Generation,
    ContinuityCriterion,
    Homeomorphism,
    GroupLimit,
    BoxLimit,
    LocallyCompact,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::NeighbourhoodBase,
        Check::Multiplicativity,
        Check::ChainLimit,
        Check::Valley,
        Check::Adequate,
        Check::Generation,
        Check::ContinuityCriterion,
        Check::Homeomorphism,
        Check::GroupLimit,
        Check::BoxLimit,
        Check::LocallyCompact,
    ];

    /// The identifier used on the command line and in reports.
    pub fn id(self) -> &'static str {
        match self {
            Check::NeighbourhoodBase => "T1",
            Check::Multiplicativity => "T2",
            Check::ChainLimit => "T3",
            Check::Valley => "L-mod",
            Check::Adequate => "L-adeq",
            Check::Generation => "L-pseudo",
            Check::ContinuityCriterion => "T5",
            Check::Homeomorphism => "C6",
            Check::GroupLimit => "P-group",
            Check::BoxLimit => "P-box",
            Check::LocallyCompact => "P-lc",
        }
    }

    fn fixtures(self) -> &'static [&'static str] {
        match self {
            Check::NeighbourhoodBase | Check::LocallyCompact | Check::Adequate | Check::Generation => &["T1"],
            Check::Multiplicativity => &["T1xT1"],
            Check::ChainLimit | Check::Valley => &["M1"],
            Check::ContinuityCriterion => &["glued"],
            Check::Homeomorphism => &["T1-identity"],
            Check::GroupLimit => &["G1"],
            Check::BoxLimit => &["halving"],
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Check> {
        Check::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::UnknownTheoremId(s.to_string()))
    }
}

impl Serialize for Check {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

/// Parses a comma-separated list of check identifiers.
pub fn parse_checks(text: &str) -> Result<Vec<Check>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Check::from_str)
        .collect()
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Instance {
    Fixture(&'static str),
    Seed(u64),
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instance::Fixture(name) => write!(f, "fixture:{name}"),
            Instance::Seed(seed) => write!(f, "seed:{seed}"),
        }
    }
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct VerifyReport {
    pub theorem: Check,
    pub instance: Instance,
    pub verdict: Verdict,
    pub certificate: Value,
    /// Milliseconds, only when timing was requested; timings would make
    /// reports differ between runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// Profiles of the seeded instances.
fn tower_profile(check: Check) -> Profile {
    match check {
        Check::NeighbourhoodBase | Check::LocallyCompact => Profile::new(4, 8),
        _ => Profile::new(3, 6),
    }
}

/// Runs `checks` on their fixtures and on every seed of `seeds`.
pub fn verify_suite(checks: &[Check], seeds: Range<u64>, timing: bool) -> Vec<VerifyReport> {
    let mut checks = checks.to_vec();
    checks.sort();
    checks.dedup();
    let jobs: Vec<(Check, Instance)> = checks
        .iter()
        .flat_map(|&c| {
            c.fixtures()
                .iter()
                .map(move |&f| (c, Instance::Fixture(f)))
                .chain(seeds.clone().map(move |s| (c, Instance::Seed(s))))
        })
        .collect();
    jobs.into_par_iter()
        .map(|(check, instance)| {
            let start = Instant::now();
            let outcome = run(check, &instance);
            let wall_ms = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            let (verdict, certificate) = match outcome {
                Ok((true, c)) => (Verdict::Pass, c),
                Ok((false, c)) => (Verdict::Fail, c),
                Err(e) => (Verdict::Fail, json!({ "error": e.to_string() })),
            };
            VerifyReport {
                theorem: check,
                instance,
                verdict,
                certificate,
                wall_ms,
            }
        })
        .collect()
}

type Outcome = Result<(bool, Value)>;

fn run(check: Check, instance: &Instance) -> Outcome {
    let profile = tower_profile(check);
    let tower = |seed: u64| generate::generate_tower(seed, &profile);
    match (check, instance) {
        (Check::NeighbourhoodBase, Instance::Fixture(_)) => neighbourhood_base(&fixtures::t1()),
        (Check::NeighbourhoodBase, &Instance::Seed(s)) => neighbourhood_base(&tower(s)?),
        (Check::Multiplicativity, Instance::Fixture(_)) => multiplicativity(&fixtures::t1(), &fixtures::t1()),
        (Check::Multiplicativity, &Instance::Seed(s)) => {
            let (a, b) = generate::generate_pair(s, 3, 9)?;
            multiplicativity(&a, &b)
        }
        (Check::ChainLimit | Check::Valley, Instance::Fixture(_)) => {
            let (t, seq) = fixtures::m1();
            limit_check(check, &t, &seq)
        }
        (Check::ChainLimit | Check::Valley, &Instance::Seed(s)) => {
            let t = tower(s)?;
            let seq = generate::generate_sequence(s, &t, &profile.value_pool);
            limit_check(check, &t, &seq)
        }
        (Check::Adequate, Instance::Fixture(_)) => {
            let t = fixtures::t1();
            let targets =
                EntourageSequence::from_fn(&t, 0, |n| t.grid_entourage(n, &rational::one()), TailPolicy::RepeatLast)?;
            adequate(&t, &targets)
        }
        (Check::Adequate, &Instance::Seed(s)) => {
            let t = tower(s)?;
            adequate(&t, &generate::generate_targets(s, &t))
        }
        (Check::Generation, Instance::Fixture(_)) => {
            let t = fixtures::t1();
            let u = t.grid_entourage(t.top(), &rational::int(2));
            generation(&t, &u)
        }
        (Check::Generation, &Instance::Seed(s)) => {
            let t = tower(s)?;
            generation(&t, &generate::generate_top_entourage(s, &t))
        }
        (Check::ContinuityCriterion, Instance::Fixture(_)) => {
            let (holds, certificate) = criterion(&fixtures::glued());
            let v = &certificate;
            // The glued map must defeat both the hypothesis and continuity.
            let expected = v["hypothesis"] == json!(false) && v["continuous"] == json!(false);
            Ok((holds && expected, certificate))
        }
        (Check::ContinuityCriterion, &Instance::Seed(s)) => {
            Ok(criterion(&generate::generate_map_instance(s, &profile)?))
        }
        (Check::Homeomorphism, Instance::Fixture(_)) => {
            let t = fixtures::t1();
            let id: Vec<usize> = (0..t.size()).collect();
            let h = SpaceMap::new(t.clone(), t.clone(), id.clone())?;
            let h_inv = SpaceMap::new(t.clone(), t, id)?;
            homeomorphism(&h, &h_inv)
        }
        (Check::Homeomorphism, &Instance::Seed(s)) => {
            let (h, h_inv) = generate::generate_bijection(s, &profile)?;
            homeomorphism(&h, &h_inv)
        }
        (Check::GroupLimit, Instance::Fixture(_)) => {
            let radii = vec![rational::frac(1, 2), rational::frac(3, 4), rational::frac(3, 8)];
            group_limit(&g1(), &radii)
        }
        (Check::GroupLimit, &Instance::Seed(s)) => {
            let g = generate::generate_group(s);
            let radii = generate::generate_radii(s, &g);
            group_limit(&g, &radii)
        }
        (Check::BoxLimit, Instance::Fixture(_)) => box_limit(&halving_factors(3)),
        (Check::BoxLimit, &Instance::Seed(s)) => box_limit(&generate::generate_factors(s)),
        (Check::LocallyCompact, Instance::Fixture(_)) => locally_compact(&fixtures::t1()),
        (Check::LocallyCompact, &Instance::Seed(s)) => locally_compact(&tower(s)?),
    }
}

fn set_json(set: &PointSet) -> Value {
    json!(set.to_vec())
}

fn triangle_json(n: usize, get: impl Fn(usize, usize) -> Rational) -> Value {
    Value::Array(
        (0..n)
            .map(|i| Value::Array((0..=i).map(|j| rational::to_json(&get(i, j))).collect()))
            .collect(),
    )
}

fn neighbourhood_base(t: &Tower) -> Outcome {
    let report = check_base(t);
    let mut certificate = json!({ "points": t.size(), "balls": report.balls });
    if let Some((ball, y)) = &report.not_open {
        certificate["not_open"] = json!({ "center": ball.center, "ball": set_json(&ball.set), "point": y });
    }
    if let Some(x) = report.not_base_at {
        certificate["not_base_at"] = json!(x);
    }
    Ok((report.holds(), certificate))
}

fn comparison_json(verdict: Comparison, witness: Option<&PointSet>) -> Value {
    let mut v = json!({ "verdict": verdict.as_str() });
    if let Some(w) = witness {
        v["witness"] = set_json(w);
    }
    v
}

fn multiplicativity(a: &Tower, b: &Tower) -> Outcome {
    let c = check_multiplicativity(a, b)?;
    let mut certificate = comparison_json(c.verdict, c.witness.as_ref());
    certificate["product_size"] = json!(a.size() * b.size());
    Ok((c.verdict == Comparison::Equal, certificate))
}

fn limit_check(check: Check, t: &Tower, seq: &MonotonePseudometricSequence) -> Outcome {
    let limit = limit_pseudometric(t, seq);
    let other = if check == Check::ChainLimit {
        chain_minimum(t, seq)
    } else {
        valley_matrix(t, seq)
    };
    let n = t.size();
    let mismatch = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .find(|&(x, y)| limit.get(x, y) != &other[x][y]);
    let name = if check == Check::ChainLimit { "oracle" } else { "valley" };
    Ok(match mismatch {
        None => (
            true,
            json!({ "d_inf": triangle_json(n, |i, j| limit.get(i, j).clone()) }),
        ),
        Some((x, y)) => (
            false,
            json!({
                "pair": [x, y],
                "limit": rational::to_json(limit.get(x, y)),
                name: rational::to_json(&other[x][y]),
            }),
        ),
    })
}

fn adequate(t: &Tower, targets: &EntourageSequence) -> Outcome {
    let seq = adequate_sequence(t, targets)?;
    // Re-validate monotonicity and uniformity from the raw metrics.
    let metrics: Vec<Pseudometric> = seq.metrics().to_vec();
    if let Err(e) = MonotonePseudometricSequence::new(t, metrics) {
        return Ok((false, json!({ "invalid_sequence": e.to_string() })));
    }
    let one = rational::one();
    for n in 0..t.levels() {
        let target = targets.entry(n);
        if let Some((i, j)) = seq.metric(n).below(&one).pairs().find(|&(i, j)| !target.contains(i, j)) {
            return Ok((false, json!({ "level": n, "pair": [i, j] })));
        }
    }
    let metrics: Vec<Value> = seq
        .metrics()
        .iter()
        .map(|d| triangle_json(d.size(), |i, j| d.get(i, j).clone()))
        .collect();
    Ok((true, json!({ "metrics": metrics })))
}

fn generation(t: &Tower, u: &crate::relation::Entourage) -> Outcome {
    let ladder = halving_ladder(t, u)?;
    let seq = ladder_sequence(t, &ladder)?;
    let verdict = verify_generation(t, u, &seq, &ladder)?;
    let rungs: Vec<usize> = ladder.iter().map(|e| e.relation().len()).collect();
    let mut certificate = json!({ "u_pairs": u.relation().len(), "ladder_pairs": rungs });
    if let Some((x, y)) = verdict.counterexample {
        certificate["counterexample"] = json!([x, y]);
    }
    Ok((verdict.confirmed, certificate))
}

fn criterion(f: &SpaceMap) -> (bool, Value) {
    let v = continuity_criterion(f);
    let regular: Vec<bool> = v.regularity.iter().map(|r| r.regular).collect();
    let mut certificate = json!({
        "hypothesis": v.hypothesis,
        "continuous": v.conclusion.continuous,
        "level_continuous": v.level_continuity.iter().map(Option::is_none).collect::<Vec<_>>(),
        "regular": regular,
        "closed_levels": v.closed_levels,
    });
    if let (Some(open), Some(pre)) = (&v.conclusion.witness_open, &v.conclusion.witness_preimage) {
        certificate["open"] = set_json(open);
        certificate["preimage"] = set_json(pre);
    }
    (!v.violation, certificate)
}

fn homeomorphism(h: &SpaceMap, h_inv: &SpaceMap) -> Outcome {
    let v = homeo_criterion(h, h_inv)?;
    let certificate = json!({
        "homeomorphism": v.homeomorphism,
        "transported": v.transported.as_str(),
        "forward_hypothesis": v.forward.hypothesis,
        "backward_hypothesis": v.backward.hypothesis,
    });
    let sound = v.consistent && !v.forward.violation && !v.backward.violation;
    Ok((sound, certificate))
}

fn group_limit(g: &crate::constructions::GroupTower, radii: &[Rational]) -> Outcome {
    let v = check_group_limit(g, radii)?;
    let mut certificate = json!({
        "radii": radii.iter().map(rational::to_json).collect::<Vec<_>>(),
        "ball": set_json(&v.ball),
        "ordered_product": set_json(&v.ordered_product),
        "halves_fit": v.halves_fit,
    });
    if let Some((n, m)) = v.noncommuting {
        certificate["noncommuting"] = json!([n, m]);
    }
    if let Some(m) = v.eq_failure {
        certificate["eq_failure"] = json!(m);
    }
    Ok((v.passes(), certificate))
}

fn box_limit(factors: &[crate::constructions::PointedSpace]) -> Outcome {
    let depth = factors.len();
    let c = check_box_limit(factors, depth)?;
    let mut certificate = comparison_json(c.verdict, c.witness.as_ref());
    certificate["depth"] = json!(depth);
    Ok((c.verdict == Comparison::Equal, certificate))
}

fn locally_compact(t: &Tower) -> Outcome {
    let c = compare_topologies(&ulim_topology(t), &tlim_topology(t))?;
    let mut certificate = comparison_json(c.verdict, c.witness.as_ref());
    certificate["points"] = json!(t.size());
    Ok((c.verdict == Comparison::Equal, certificate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.id().parse::<Check>().unwrap(), c);
        }
        assert_eq!("T4".parse::<Check>().unwrap_err(), Error::UnknownTheoremId("T4".into()));
        assert_eq!(parse_checks("").unwrap(), vec![]);
        assert_eq!(
            parse_checks("T3, P-lc").unwrap(),
            vec![Check::ChainLimit, Check::LocallyCompact]
        );
    }

    #[test]
    fn empty_selection_gives_empty_report() {
        assert!(verify_suite(&[], 0..10, false).is_empty());
    }

    #[test]
    fn m1_matches_oracle() {
        let reports = verify_suite(&[Check::ChainLimit], 0..0, false);
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert!(r.passed());
        assert_eq!(r.certificate["d_inf"], json!([[0], [1, 0], [2, 1, 0]]));
        assert_eq!(
            r.to_json_line(),
            r#"{"theorem":"T3","instance":"fixture:M1","verdict":"pass","certificate":{"d_inf":[[0],[1,0],[2,1,0]]}}"#
        );
    }

    #[test]
    fn every_fixture_passes() {
        for r in verify_suite(&Check::ALL, 0..3, false) {
            assert!(r.passed(), "{}", r.to_json_line());
        }
    }

    #[test]
    fn order_is_by_check_then_instance() {
        let reports = verify_suite(&[Check::LocallyCompact, Check::ChainLimit], 0..3, true);
        let keys: Vec<String> = reports
            .iter()
            .map(|r| format!("{} {}", r.theorem, r.instance))
            .collect();
        assert_eq!(
            keys,
            [
                "T3 fixture:M1",
                "T3 seed:0",
                "T3 seed:1",
                "T3 seed:2",
                "P-lc fixture:T1",
                "P-lc seed:0",
                "P-lc seed:1",
                "P-lc seed:2",
            ]
        );
        assert!(reports.iter().all(|r| r.wall_ms.is_some()));
    }
}
