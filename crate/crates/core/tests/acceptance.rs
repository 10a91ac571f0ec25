//! Acceptance run: one PASS/FAIL line per criterion, exact arithmetic
//! throughout. Exits nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::json;
use unilim::fixtures::m1;
use unilim::limit::limit_pseudometric;
use unilim::rational::int;
use unilim::suite::{verify_suite, Check, Instance, VerifyReport};

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Runs one check over `count` seeds and requires every report to pass.
fn sweep(check: Check, count: u64) -> (Vec<VerifyReport>, Option<String>) {
    let reports = verify_suite(&[check], 0..count, false);
    let failure = reports.iter().find(|r| !r.passed()).map(|r| r.to_json_line());
    (reports, failure)
}

fn seeded(reports: &[VerifyReport]) -> usize {
    reports
        .iter()
        .filter(|r| matches!(r.instance, Instance::Seed(_)))
        .count()
}

fn summarize(
    reports: &[VerifyReport],
    failure: Option<String>,
    elapsed: Duration,
    budget: Option<Duration>,
) -> Outcome {
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let detail = match (&failure, in_time) {
        (Some(line), _) => format!("first failure {line}"),
        (None, false) => format!("took {elapsed:.1?}, over budget {:.0?}", budget.unwrap()),
        (None, true) => format!(
            "{} instances ({} seeded) in {elapsed:.1?}",
            reports.len(),
            seeded(reports)
        ),
    };
    outcome(failure.is_none() && in_time, detail)
}

fn timed_sweep(check: Check, count: u64, budget: Option<Duration>) -> Outcome {
    let start = Instant::now();
    let (reports, failure) = sweep(check, count);
    summarize(&reports, failure, start.elapsed(), budget)
}

fn chain_limit() -> Outcome {
    let (t, seq) = m1();
    let d = limit_pseudometric(&t, &seq);
    let fixture = d.get(0, 2) == &int(2) && d.get(0, 1) == &int(1) && d.get(1, 2) == &int(1);
    if !fixture {
        return outcome(
            false,
            format!("M1 gives ac={} ab={} bc={}", d.get(0, 2), d.get(0, 1), d.get(1, 2)),
        );
    }
    let start = Instant::now();
    let (reports, failure) = sweep(Check::ChainLimit, 500);
    summarize(&reports, failure, start.elapsed(), Some(Duration::from_secs(10)))
}

fn continuity_criterion() -> Outcome {
    let (reports, failure) = sweep(Check::ContinuityCriterion, 300);
    if let Some(line) = failure {
        return outcome(false, format!("first failure {line}"));
    }
    let glued = reports
        .iter()
        .find(|r| r.instance == Instance::Fixture("glued"))
        .expect("fixture runs");
    let glued_ok = glued.certificate["hypothesis"] == json!(false) && glued.certificate["continuous"] == json!(false);
    let hypothesis_true = reports
        .iter()
        .filter(|r| r.certificate["hypothesis"] == json!(true))
        .count();
    outcome(
        glued_ok && hypothesis_true > 0,
        format!(
            "{} maps, {hypothesis_true} with the hypothesis, all continuous; glued map: hypothesis and continuity false",
            seeded(&reports)
        ),
    )
}

fn multiplicativity() -> Outcome {
    let (reports, failure) = sweep(Check::Multiplicativity, 50);
    let largest = reports
        .iter()
        .filter_map(|r| r.certificate["product_size"].as_u64())
        .max()
        .unwrap_or(0);
    let mut o = summarize(&reports, failure, Duration::ZERO, None);
    o.passed &= largest <= 81;
    o.detail = format!(
        "{}; largest product {largest} points",
        o.detail.split(" in ").next().unwrap()
    );
    o
}

fn box_limit() -> Outcome {
    let (reports, failure) = sweep(Check::BoxLimit, 20);
    let deepest = reports
        .iter()
        .filter_map(|r| r.certificate["depth"].as_u64())
        .max()
        .unwrap_or(0);
    let mut o = summarize(&reports, failure, Duration::ZERO, None);
    o.passed &= deepest <= 3;
    o.detail = format!("{}; depth at most {deepest}", o.detail.split(" in ").next().unwrap());
    o
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_unilim"))
            .args(["verify", "--all", "--seeds", "0..200"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let lines = a.stdout.iter().filter(|&&c| c == b'\n').count();
    let both_ok = a.status.success() && b.status.success();
    outcome(
        both_ok && a.stdout == b.stdout && lines > 0,
        format!(
            "{lines} report lines, identical: {}, exit codes {:?} {:?}",
            a.stdout == b.stdout,
            a.status.code(),
            b.status.code()
        ),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (
            "limit pseudometric equals simple-chain enumeration (M1, 500 towers, < 10 s)",
            Box::new(chain_limit),
        ),
        (
            "valley distance equals the limit pseudometric (500 towers)",
            Box::new(|| timed_sweep(Check::Valley, 500, None)),
        ),
        (
            "adequate sequences are monotone, uniform and inside their targets (200)",
            Box::new(|| timed_sweep(Check::Adequate, 200, None)),
        ),
        (
            "halving ladders generate {d_inf < 1} inside U (200)",
            Box::new(|| timed_sweep(Check::Generation, 200, None)),
        ),
        (
            "grid base balls are open and form a base (200 towers, < 60 s)",
            Box::new(|| timed_sweep(Check::NeighbourhoodBase, 200, Some(Duration::from_secs(60)))),
        ),
        (
            "regularity criterion is sound (300 maps + glued map)",
            Box::new(continuity_criterion),
        ),
        (
            "u-lim of a product is the product topology (50 pairs)",
            Box::new(multiplicativity),
        ),
        (
            "u-lim equals t-lim on generated towers (200)",
            Box::new(|| timed_sweep(Check::LocallyCompact, 200, None)),
        ),
        (
            "group balls, commutation and halving inclusion (G1 + 20)",
            Box::new(|| timed_sweep(Check::GroupLimit, 20, None)),
        ),
        (
            "box tower u-lim equals the box topology (halving + 20)",
            Box::new(box_limit),
        ),
        (
            "verify --all --seeds 0..200 is byte-identical across runs",
            Box::new(determinism),
        ),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
