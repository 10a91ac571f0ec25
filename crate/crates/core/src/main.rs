use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use unilim::bits::PointSet;
use unilim::constructions::{box_tower, check_box_limit, check_group_limit, check_multiplicativity, product_tower};
use unilim::error::{Error, Result};
use unilim::expr::{self, evaluate};
use unilim::format::{self, entourage_wire};
use unilim::generate::{self, Profile};
use unilim::limit::{limit_pseudometric, valley_distance, valley_witness};
use unilim::rational;
use unilim::regularity::{continuity_criterion, homeo_criterion, is_continuous, SpaceMap};
use unilim::suite::{parse_checks, verify_suite, Check};
use unilim::topology::{compare_topologies, tlim_topology, ulim_topology, Comparison, TopologyFamily};
use unilim::tower::Tower;

/// Computations with finite towers of rational pseudometric spaces and their
/// uniform direct limit.
///
/// Exit status: 0 for success or a true verdict, 1 for a false verdict, 2
/// for invalid input, 3 when a check that should always hold fails.
#[derive(Parser)]
#[command(name = "unilim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an entourage expression such as `(ball a (sum U V))`.
    Rel {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long)]
        expr: String,
    },
    /// Print the limit pseudometric of a monotone sequence.
    Limit {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long)]
        seq: PathBuf,
        /// Also print an optimal valley chain between two points.
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        witness: Option<Vec<String>>,
    },
    /// Print the u-lim topology as minimal neighbourhoods.
    Topo {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long, value_enum)]
        compare: Option<Other>,
        /// List every open set as well.
        #[arg(long)]
        opens: bool,
    },
    /// Decide continuity of a map between towers.
    Check(CheckArgs),
    /// Build the product tower, or compare its topology with the product
    /// topology.
    Product {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        check: bool,
    },
    /// Ball of the identity in a group tower for one radius per level.
    Group {
        group: PathBuf,
        #[arg(long)]
        radii: String,
        #[arg(long)]
        check: bool,
    },
    /// Build the box tower of pointed factors, or compare its topology with
    /// the box topology.
    Box {
        factors: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        check: bool,
    },
    /// Generate a seeded instance.
    Gen {
        /// Defaults to UNILIM_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
        #[arg(long, value_enum, default_value_t = Kind::Tower)]
        kind: Kind,
        /// The tower a sequence is generated over.
        #[arg(long, required_if_eq("kind", "sequence"))]
        tower: Option<PathBuf>,
    },
    /// Run the theorem suite and write one JSON report per line.
    Verify {
        #[arg(long, conflicts_with = "targets")]
        all: bool,
        /// Comma-separated check ids: T1, T2, T3, L-mod, L-adeq, L-pseudo,
        /// T5, C6, P-group, P-box, P-lc.
        #[arg(long)]
        targets: Option<String>,
        /// A range `a..b` or a single seed; defaults to UNILIM_SEED, then 0.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Add wall times to the reports (makes them run-dependent).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Other {
    Tlim,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Tower,
    Sequence,
    Group,
    Factors,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    tower: PathBuf,
    #[arg(long)]
    map: PathBuf,
    /// Target tower; defaults to the source tower.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Evaluate the regularity criterion (the default).
    #[arg(long, group = "mode")]
    criterion: bool,
    /// Decide continuity directly from the u-lim topology.
    #[arg(long, group = "mode")]
    direct: bool,
    /// Inverse map file: decide whether the map is a homeomorphism.
    #[arg(long, group = "mode", value_name = "INV")]
    homeo: Option<PathBuf>,
}

/// How a successful run ended.
enum Status {
    True,
    False,
    Unsound,
}

impl Status {
    fn of(verdict: bool) -> Status {
        if verdict {
            Status::True
        } else {
            Status::False
        }
    }

    /// For checks that hold on every instance.
    fn sound(holds: bool) -> Status {
        if holds {
            Status::True
        } else {
            Status::Unsound
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_tower(path: &Path) -> Result<Tower> {
    format::parse_tower(&read(path)?)
}

fn print(value: &Value) {
    println!("{}", serde_json::to_string(value).expect("serializable"));
}

fn point(tower: &Tower, text: &str) -> Result<usize> {
    let x = match tower.index_of(text) {
        Some(x) => x,
        None => text
            .parse()
            .map_err(|_| Error::Parse(format!("{text:?} is neither a label nor an index")))?,
    };
    tower.check_index(x)?;
    Ok(x)
}

fn labelled(tower: &Tower, set: &PointSet) -> Value {
    json!(set.iter().map(|x| tower.label(x)).collect::<Vec<_>>())
}

fn comparison(verdict: Comparison, witness: Option<&PointSet>) -> Value {
    let mut v = json!({ "verdict": verdict.as_str() });
    if let Some(w) = witness {
        v["witness"] = json!(w.to_vec());
    }
    v
}

fn topology_json(tower: &Tower, topology: &TopologyFamily, opens: bool) -> Value {
    let minimal: Vec<Value> = (0..topology.ground_size())
        .map(|x| labelled(tower, topology.neighbourhood(x)))
        .collect();
    let mut v = json!({ "neighbourhoods": minimal });
    if opens {
        v["opens"] = Value::Array(topology.opens().iter().map(|o| labelled(tower, o)).collect());
    }
    v
}

fn parse_seeds(text: &str) -> Result<Range<u64>> {
    let bad = || Error::Parse(format!("seeds must be `a..b` or a single seed, got {text:?}"));
    match text.split_once("..") {
        Some((a, b)) => Ok(a.trim().parse().map_err(|_| bad())?..b.trim().parse().map_err(|_| bad())?),
        None => {
            let s: u64 = text.trim().parse().map_err(|_| bad())?;
            Ok(s..s + 1)
        }
    }
}

fn default_seed() -> Result<u64> {
    match std::env::var("UNILIM_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("UNILIM_SEED is not a seed: {s:?}"))),
        Err(_) => Ok(0),
    }
}

fn criterion_json(v: &unilim::regularity::CriterionVerdict) -> Value {
    let regularity: Vec<Value> = v
        .regularity
        .iter()
        .map(|r| {
            let witnesses: Vec<Value> = r
                .witnesses
                .iter()
                .map(|c| json!({ "u": rational::to_json(&c.u), "v": rational::to_json(&c.v), "w": rational::to_json(&c.w) }))
                .collect();
            let mut cell = json!({ "level": r.level, "regular": r.regular, "witnesses": witnesses });
            if let Some(c) = &r.counterexample {
                cell["counterexample"] = json!({
                    "u": rational::to_json(&c.u),
                    "v": rational::to_json(&c.v),
                    "x": c.x,
                });
            }
            cell
        })
        .collect();
    json!({
        "hypothesis": v.hypothesis,
        "continuous": v.conclusion.continuous,
        "level_discontinuity": v.level_continuity,
        "regularity": regularity,
        "closed_levels": v.closed_levels,
        "violation": v.violation,
    })
}

fn check(args: &CheckArgs) -> Result<Status> {
    let source = load_tower(&args.tower)?;
    let target = match &args.target {
        Some(p) => load_tower(p)?,
        None => source.clone(),
    };
    let f = SpaceMap::new(source.clone(), target.clone(), format::parse_map(&read(&args.map)?)?)?;
    if let Some(inv) = &args.homeo {
        let g = SpaceMap::new(target, source, format::parse_map(&read(inv)?)?)?;
        let v = homeo_criterion(&f, &g)?;
        print(&json!({
            "homeomorphism": v.homeomorphism,
            "transported": v.transported.as_str(),
            "forward": criterion_json(&v.forward),
            "backward": criterion_json(&v.backward),
        }));
        if !v.consistent || v.forward.violation || v.backward.violation {
            return Ok(Status::Unsound);
        }
        return Ok(Status::of(v.homeomorphism));
    }
    if args.direct {
        let v = is_continuous(&f);
        let mut out = json!({ "continuous": v.continuous });
        if let (Some(open), Some(pre)) = (&v.witness_open, &v.witness_preimage) {
            out["open"] = json!(open.to_vec());
            out["preimage"] = json!(pre.to_vec());
        }
        print(&out);
        return Ok(Status::of(v.continuous));
    }
    let v = continuity_criterion(&f);
    print(&criterion_json(&v));
    if v.violation {
        return Ok(Status::Unsound);
    }
    Ok(Status::of(v.hypothesis))
}

fn run(command: Command) -> Result<Status> {
    match command {
        Command::Rel { tower, expr } => {
            let doc = format::parse_tower_doc(&read(&tower)?)?;
            match evaluate(&doc.tower, &doc.entourages, &expr)? {
                expr::Value::Entourage(e) => print(&serde_json::to_value(entourage_wire(&e)).expect("serializable")),
                expr::Value::Ball { center, set } => print(&json!({
                    "center": center,
                    "ball": set.to_vec(),
                    "labels": labelled(&doc.tower, &set),
                })),
            }
            Ok(Status::True)
        }
        Command::Limit { tower, seq, witness } => {
            let t = load_tower(&tower)?;
            let seq = format::parse_sequence(&t, &read(&seq)?)?;
            let limit = limit_pseudometric(&t, &seq);
            let d: Vec<Value> = (0..t.size())
                .map(|i| Value::Array((0..=i).map(|j| rational::to_json(limit.get(i, j))).collect()))
                .collect();
            let mut out = json!({ "labels": t.labels(), "d_inf": d });
            if let Some(pair) = witness {
                let (x, y) = (point(&t, &pair[0])?, point(&t, &pair[1])?);
                let chain = valley_witness(&t, &seq, x, y)?;
                out["witness"] = json!({
                    "distance": rational::to_json(&valley_distance(&t, &seq, x, y)?),
                    "chain": chain.points,
                });
            }
            print(&out);
            Ok(Status::True)
        }
        Command::Topo { tower, compare, opens } => {
            let t = load_tower(&tower)?;
            let ulim = ulim_topology(&t);
            let mut out = topology_json(&t, &ulim, opens);
            let mut status = Status::True;
            if let Some(Other::Tlim) = compare {
                let c = compare_topologies(&ulim, &tlim_topology(&t))?;
                out["compare_tlim"] = comparison(c.verdict, c.witness.as_ref());
                status = Status::sound(c.verdict == Comparison::Equal);
            }
            print(&out);
            Ok(status)
        }
        Command::Check(args) => check(&args),
        Command::Product { a, b, check } => {
            let (a, b) = (load_tower(&a)?, load_tower(&b)?);
            if check {
                let c = check_multiplicativity(&a, &b)?;
                print(&comparison(c.verdict, c.witness.as_ref()));
                Ok(Status::sound(c.verdict == Comparison::Equal))
            } else {
                print!("{}", format::tower_to_string(&product_tower(&a, &b)?.tower));
                Ok(Status::True)
            }
        }
        Command::Group { group, radii, check } => {
            let g = format::parse_group(&read(&group)?)?;
            let radii = format::parse_rational_list(&radii)?;
            let v = check_group_limit(&g, &radii)?;
            let mut out = json!({
                "ball": labelled(&g.tower, &v.ball),
                "ordered_product": labelled(&g.tower, &v.ordered_product),
            });
            if !check {
                print(&out);
                return Ok(Status::True);
            }
            out["ball_matches"] = json!(v.ball_matches);
            out["commute"] = json!(v.noncommuting.is_none());
            out["halves_fit"] = json!(v.halves_fit);
            out["eq_holds"] = json!(v.eq_failure.is_none());
            if let Some((n, m)) = v.noncommuting {
                out["noncommuting"] = json!([n, m]);
            }
            print(&out);
            Ok(Status::sound(v.passes()))
        }
        Command::Box { factors, depth, check } => {
            let factors = format::parse_factors(&read(&factors)?)?;
            if check {
                let c = check_box_limit(&factors, depth)?;
                print(&comparison(c.verdict, c.witness.as_ref()));
                Ok(Status::sound(c.verdict == Comparison::Equal))
            } else {
                print!("{}", format::tower_to_string(&box_tower(&factors, depth)?.tower));
                Ok(Status::True)
            }
        }
        Command::Gen {
            seed,
            levels,
            max_size,
            kind,
            tower,
        } => {
            let seed = match seed {
                Some(s) => s,
                None => default_seed()?,
            };
            let profile = Profile::new(levels, max_size);
            let text = match kind {
                Kind::Tower => format::tower_to_string(&generate::generate_tower(seed, &profile)?),
                Kind::Sequence => {
                    let t = load_tower(tower.as_deref().expect("required by clap"))?;
                    format::sequence_to_string(&generate::generate_sequence(seed, &t, &profile.value_pool)) + "\n"
                }
                Kind::Group => format::group_to_string(&generate::generate_group(seed)) + "\n",
                Kind::Factors => format::factors_to_string(&generate::generate_factors(seed)) + "\n",
            };
            print!("{text}");
            Ok(Status::True)
        }
        Command::Verify {
            all,
            targets,
            seeds,
            output,
            timing,
        } => {
            let checks = if all {
                Check::ALL.to_vec()
            } else {
                parse_checks(targets.as_deref().unwrap_or(""))?
            };
            let seeds = match seeds {
                Some(s) => parse_seeds(&s)?,
                None => {
                    let s = default_seed()?;
                    s..s + 1
                }
            };
            let reports = verify_suite(&checks, seeds, timing);
            let mut text = String::new();
            for r in &reports {
                text.push_str(&r.to_json_line());
                text.push('\n');
            }
            match output {
                Some(path) => fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            eprintln!("{} reports, {failed} failed", reports.len());
            Ok(Status::sound(failed == 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Status::True) => ExitCode::SUCCESS,
        Ok(Status::False) => ExitCode::from(1),
        Ok(Status::Unsound) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
