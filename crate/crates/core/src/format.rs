//! JSON instance files.
//!
//! A tower file has `labels`, `level_sizes`, `metrics` (one lower-triangular
//! matrix per level: row `i` lists `d(i,0), …, d(i,i)`), an optional
//! `"strict": true` and an optional `entourages` object of named relations
//! `{"level": n, "pairs": [[i,j], …]}` whose diagonal is implied.
//! Rationals are JSON integers or `"p/q"` strings. Group files add an `op`
//! table to a tower file; factor files list pointed spaces; sequence files
//! hold `metrics` only; map files are arrays of target indices.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constructions::{GroupTower, PointedSpace};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::relation::Entourage;
use crate::tower::{validate_tower, MonotonePseudometricSequence, Pseudometric, RawTower, Tower};

/// A rational as it appears on the wire.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WireRational(pub Rational);

impl Serialize for WireRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational::to_json(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WireRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        rational::from_json(&value)
            .map(WireRational)
            .map_err(serde::de::Error::custom)
    }
}

type Triangle = Vec<Vec<WireRational>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntourageWire {
    pub level: usize,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerWire {
    pub labels: Vec<String>,
    pub level_sizes: Vec<usize>,
    pub metrics: Vec<Triangle>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub strict: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub entourages: BTreeMap<String, EntourageWire>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupWire {
    labels: Vec<String>,
    level_sizes: Vec<usize>,
    metrics: Vec<Triangle>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    strict: bool,
    op: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceWire {
    metrics: Vec<Triangle>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorWire {
    labels: Vec<String>,
    metric: Triangle,
    basepoint: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorsWire {
    factors: Vec<FactorWire>,
}

/// Expands a lower-triangular matrix into a full square table.
fn square_from_triangle(rows: &Triangle, what: &str) -> Result<Vec<Vec<Rational>>> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != i + 1 {
            return Err(Error::Shape(format!(
                "{what}: row {i} must have {} entries (lower triangle with diagonal), has {}",
                i + 1,
                row.len()
            )));
        }
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j <= i {
                        rows[i][j].0.clone()
                    } else {
                        rows[j][i].0.clone()
                    }
                })
                .collect()
        })
        .collect())
}

fn triangle(metric: &Pseudometric) -> Triangle {
    (0..metric.size())
        .map(|i| (0..=i).map(|j| WireRational(metric.get(i, j).clone())).collect())
        .collect()
}

fn checked_metric(rows: &Triangle, level: usize, what: &str) -> Result<Pseudometric> {
    Pseudometric::new(square_from_triangle(rows, what)?).map_err(|d| d.at_level(level))
}

/// A tower together with the named entourages of its file.
#[derive(Clone, Debug)]
pub struct TowerDoc {
    pub tower: Tower,
    pub entourages: BTreeMap<String, Entourage>,
}

fn tower_from_parts(labels: Vec<String>, level_sizes: Vec<usize>, metrics: &[Triangle], strict: bool) -> Result<Tower> {
    let metrics = metrics
        .iter()
        .enumerate()
        .map(|(n, m)| square_from_triangle(m, &format!("metric {n}")))
        .collect::<Result<Vec<_>>>()?;
    validate_tower(RawTower {
        labels,
        level_sizes,
        metrics,
        strict,
    })
}

pub fn parse_tower_doc(text: &str) -> Result<TowerDoc> {
    let wire: TowerWire = serde_json::from_str(text)?;
    let tower = tower_from_parts(wire.labels, wire.level_sizes, &wire.metrics, wire.strict)?;
    let mut entourages = BTreeMap::new();
    for (name, e) in wire.entourages {
        tower.check_level(e.level)?;
        entourages.insert(name, Entourage::from_pairs(&tower, e.level, e.pairs)?);
    }
    Ok(TowerDoc { tower, entourages })
}

pub fn parse_tower(text: &str) -> Result<Tower> {
    Ok(parse_tower_doc(text)?.tower)
}

pub fn tower_wire(tower: &Tower) -> TowerWire {
    TowerWire {
        labels: tower.labels().to_vec(),
        level_sizes: tower.level_sizes().to_vec(),
        metrics: tower.metrics().iter().map(triangle).collect(),
        strict: tower.is_strict(),
        entourages: BTreeMap::new(),
    }
}

/// Pretty-printed tower file, newline terminated.
pub fn tower_to_string(tower: &Tower) -> String {
    let mut text = serde_json::to_string_pretty(&tower_wire(tower)).expect("serializable");
    text.push('\n');
    text
}

pub fn entourage_wire(e: &Entourage) -> EntourageWire {
    EntourageWire {
        level: e.level(),
        pairs: e.relation().pairs().filter(|(i, j)| i != j).collect(),
    }
}

pub fn parse_sequence(tower: &Tower, text: &str) -> Result<MonotonePseudometricSequence> {
    let wire: SequenceWire = serde_json::from_str(text)?;
    let metrics = wire
        .metrics
        .iter()
        .enumerate()
        .map(|(n, m)| checked_metric(m, n, &format!("sequence metric {n}")))
        .collect::<Result<Vec<_>>>()?;
    MonotonePseudometricSequence::new(tower, metrics)
}

pub fn sequence_to_string(seq: &MonotonePseudometricSequence) -> String {
    let wire = SequenceWire {
        metrics: seq.metrics().iter().map(triangle).collect(),
    };
    serde_json::to_string(&wire).expect("serializable")
}

pub fn parse_map(text: &str) -> Result<Vec<usize>> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_group(text: &str) -> Result<GroupTower> {
    let wire: GroupWire = serde_json::from_str(text)?;
    let tower = tower_from_parts(wire.labels, wire.level_sizes, &wire.metrics, wire.strict)?;
    GroupTower::new(tower, wire.op)
}

pub fn group_to_string(group: &GroupTower) -> String {
    let t = tower_wire(&group.tower);
    let wire = GroupWire {
        labels: t.labels,
        level_sizes: t.level_sizes,
        metrics: t.metrics,
        strict: t.strict,
        op: group.op().to_vec(),
    };
    serde_json::to_string(&wire).expect("serializable")
}

pub fn parse_factors(text: &str) -> Result<Vec<PointedSpace>> {
    let wire: FactorsWire = serde_json::from_str(text)?;
    wire.factors
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let metric = checked_metric(&f.metric, 0, &format!("factor {i}"))?;
            PointedSpace::new(f.labels.clone(), metric, f.basepoint)
        })
        .collect()
}

pub fn factors_to_string(factors: &[PointedSpace]) -> String {
    let wire = FactorsWire {
        factors: factors
            .iter()
            .map(|f| FactorWire {
                labels: f.labels.clone(),
                metric: triangle(&f.metric),
                basepoint: f.basepoint,
            })
            .collect(),
    };
    serde_json::to_string(&wire).expect("serializable")
}

/// Parses a comma-separated list of rationals such as `1/2,3/4,3/8`.
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(rational::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{g1, halving_factors};
    use crate::rational::int;
    use crate::tower::fixtures::t1;

    const T1: &str = r#"{
        "labels": ["a", "b", "c"],
        "level_sizes": [1, 2, 3],
        "metrics": [[[0]], [[0], [1, 0]], [[0], [1, 0], ["2", "1/1", 0]]],
        "entourages": {"E_U": {"level": 2, "pairs": [[0, 1], [1, 0]]}}
    }"#;

    #[test]
    fn reads_t1() {
        let doc = parse_tower_doc(T1).unwrap();
        assert_eq!(doc.tower, t1());
        let e = &doc.entourages["E_U"];
        assert!(e.contains(0, 1) && e.contains(2, 2) && !e.contains(0, 2));
    }

    #[test]
    fn round_trip() {
        let t = t1();
        assert_eq!(parse_tower(&tower_to_string(&t)).unwrap(), t);
        let g = g1();
        assert_eq!(parse_group(&group_to_string(&g)).unwrap(), g);
        let f = halving_factors(3);
        assert_eq!(parse_factors(&factors_to_string(&f)).unwrap(), f);
        let seq = MonotonePseudometricSequence::from_tower(&t).unwrap();
        assert_eq!(parse_sequence(&t, &sequence_to_string(&seq)).unwrap(), seq);
    }

    #[test]
    fn rationals_in_lowest_terms() {
        let text = tower_to_string(&g1().tower);
        assert!(text.contains("\"3/4\"") && !text.contains("6/8"));
    }

    #[test]
    fn rejects_bad_shapes() {
        let bad = T1.replace("[[0], [1, 0]]", "[[0, 1], [1, 0]]");
        assert!(matches!(parse_tower(&bad).unwrap_err(), Error::Shape(_)));
        assert!(matches!(parse_tower("{").unwrap_err(), Error::Parse(_)));
        let outside = T1.replace("[[0, 1], [1, 0]]}", "[[0, 3]]}");
        assert_eq!(
            parse_tower_doc(&outside).unwrap_err(),
            Error::IndexOutOfRange { index: 3, size: 3 }
        );
    }

    #[test]
    fn rational_lists() {
        assert_eq!(
            parse_rational_list("1/2,3").unwrap(),
            vec![crate::rational::frac(1, 2), int(3)]
        );
    }
}
