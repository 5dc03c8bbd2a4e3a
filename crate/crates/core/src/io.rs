//! JSON documents for spaces, partitions, morphisms, filtrations,
//! processes and finite metric spaces.
//!
//! Rationals are `{"num": n, "den": d}` objects; readers also accept bare
//! integers and `"n/d"` strings. Atom indices are 1-based on the wire.

use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::hyperspace::FiniteMetricSpace;
use crate::morphism::Morphism;
use crate::partition::Partition;
use crate::rational::{self, Rational};
use crate::space::{ProbSpace, RokhlinInvariant};

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn big_number(n: &BigInt) -> Value {
    serde_json::from_str(&n.to_string()).expect("integer literal")
}

pub fn rational_to_json(q: &Rational) -> Value {
    json!({"num": big_number(q.numer()), "den": big_number(q.denom())})
}

fn integer_from_json(v: &Value, what: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => n.to_string().parse().map_err(|_| schema(format!("{what}: expected an integer, got {n}"))),
        _ => Err(schema(format!("{what}: expected an integer"))),
    }
}

pub fn rational_from_json(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::Number(_) => Ok(Rational::from_integer(integer_from_json(v, what)?)),
        Value::String(s) => rational::parse(s).map_err(|_| schema(format!("{what}: malformed fraction {s:?}"))),
        Value::Object(m) => {
            if m.keys().any(|k| k != "num" && k != "den") {
                return Err(schema(format!("{what}: unexpected key in fraction")));
            }
            let num = integer_from_json(m.get("num").ok_or_else(|| schema(format!("{what}: missing num")))?, what)?;
            let den = integer_from_json(m.get("den").ok_or_else(|| schema(format!("{what}: missing den")))?, what)?;
            if den == BigInt::from(0) {
                return Err(schema(format!("{what}: zero denominator")));
            }
            Ok(Rational::new(num, den))
        }
        _ => Err(schema(format!("{what}: expected a fraction"))),
    }
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(format!("{what}: expected an object")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(format!("{what}: expected an array")))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| schema(format!("{what}: missing \"{key}\"")))
}

fn only_keys(m: &Map<String, Value>, allowed: &[&str], what: &str) -> Result<()> {
    match m.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{what}: unexpected key \"{k}\""))),
        None => Ok(()),
    }
}

fn rationals(v: &Value, what: &str) -> Result<Vec<Rational>> {
    array(v, what)?.iter().enumerate().map(|(i, x)| rational_from_json(x, &format!("{what}[{i}]"))).collect()
}

fn index(v: &Value, n: usize, what: &str) -> Result<usize> {
    let i = v.as_u64().ok_or_else(|| schema(format!("{what}: expected a positive index")))? as usize;
    if i == 0 || i > n {
        return Err(schema(format!("{what}: index {i} outside 1..={n}")));
    }
    Ok(i - 1)
}

/// Reads a JSON document from a file.
pub fn read_document(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| schema(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))
}

/// Pretty-printed JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn space_to_json(s: &ProbSpace) -> Value {
    let mut m = Map::new();
    m.insert("atoms".into(), Value::Array(s.atoms().iter().map(rational_to_json).collect()));
    m.insert("continuum".into(), rational_to_json(s.continuum()));
    if let Some(l) = s.labels() {
        m.insert("labels".into(), json!(l));
    }
    Value::Object(m)
}

pub fn space_from_json(v: &Value) -> Result<ProbSpace> {
    let m = object(v, "space")?;
    only_keys(m, &["atoms", "continuum", "labels"], "space")?;
    let atoms = rationals(field(m, "atoms", "space")?, "space.atoms")?;
    let continuum = match m.get("continuum") {
        Some(c) => rational_from_json(c, "space.continuum")?,
        None => rational::zero(),
    };
    match m.get("labels") {
        None => ProbSpace::new(atoms, continuum),
        Some(l) => {
            let labels = array(l, "space.labels")?
                .iter()
                .map(|x| x.as_str().map(str::to_owned).ok_or_else(|| schema("space.labels: expected strings")))
                .collect::<Result<Vec<_>>>()?;
            ProbSpace::with_labels(atoms, continuum, labels)
        }
    }
}

/// Same layout as a space document, atoms in canonical order.
pub fn invariant_to_json(inv: &RokhlinInvariant) -> Value {
    space_to_json(&inv.to_space())
}

/// Blocks only; the ambient is left to the enclosing document.
fn blocks_to_json(e: &Partition) -> Value {
    Value::Array(e.blocks().iter().map(|b| json!(b.iter().map(|a| a + 1).collect::<Vec<_>>())).collect())
}

fn is_default_uniform(s: &ProbSpace, n: usize) -> bool {
    s.labels().is_none() && s.same_measure(&ProbSpace::uniform(n))
}

/// Embeds the ambient unless it is uniform and unlabeled.
pub fn partition_to_json(e: &Partition) -> Value {
    let mut m = Map::new();
    m.insert("blocks".into(), blocks_to_json(e));
    if !is_default_uniform(e.ambient(), e.ambient().len()) {
        m.insert("space".into(), space_to_json(e.ambient()));
    }
    Value::Object(m)
}

fn parse_blocks(v: &Value, n: Option<usize>, what: &str) -> Result<Vec<Vec<usize>>> {
    let raw = array(v, what)?;
    let limit = n.unwrap_or(usize::MAX);
    raw.iter()
        .enumerate()
        .map(|(i, b)| {
            array(b, &format!("{what}[{i}]"))?.iter().map(|a| index(a, limit, &format!("{what}[{i}]"))).collect()
        })
        .collect()
}

fn ambient_of(
    m: &Map<String, Value>,
    default: Option<&Arc<ProbSpace>>,
    blocks: &[Vec<usize>],
    resolution: Option<u32>,
) -> Result<Arc<ProbSpace>> {
    match (m.get("space"), default) {
        (Some(s), _) => {
            let s = space_from_json(s)?;
            match resolution {
                Some(r) if !s.is_atomic() => Ok(Arc::new(s.materialize(r))),
                _ => Ok(Arc::new(s)),
            }
        }
        (None, Some(d)) => Ok(d.clone()),
        (None, None) => {
            let n = blocks.iter().flatten().max().map_or(0, |a| a + 1);
            if n == 0 {
                return Err(schema("partition: no atoms and no space"));
            }
            Ok(Arc::new(ProbSpace::uniform(n)))
        }
    }
}

/// Reads a partition; with no embedded space, `default` is used, and
/// failing that the uniform space on the mentioned atoms.
pub fn partition_from_json(v: &Value, default: Option<&Arc<ProbSpace>>, resolution: Option<u32>) -> Result<Partition> {
    let m = object(v, "partition")?;
    only_keys(m, &["blocks", "space"], "partition")?;
    let blocks = parse_blocks(field(m, "blocks", "partition")?, None, "partition.blocks")?;
    let ambient = ambient_of(m, default, &blocks, resolution)?;
    ambient.require_atomic()?;
    if let Some(a) = blocks.iter().flatten().find(|&&a| a >= ambient.len()) {
        return Err(schema(format!("partition.blocks: index {} outside 1..={}", a + 1, ambient.len())));
    }
    Partition::from_blocks(ambient, blocks)
}

pub fn morphism_to_json(f: &Morphism) -> Value {
    json!({
        "source": space_to_json(f.source()),
        "target": space_to_json(f.target()),
        "map": f.map().iter().map(|b| b + 1).collect::<Vec<_>>(),
    })
}

pub fn morphism_from_json(v: &Value) -> Result<Morphism> {
    let m = object(v, "morphism")?;
    only_keys(m, &["source", "target", "map"], "morphism")?;
    let source = Arc::new(space_from_json(field(m, "source", "morphism")?)?);
    let target = Arc::new(space_from_json(field(m, "target", "morphism")?)?);
    let map = array(field(m, "map", "morphism")?, "morphism.map")?
        .iter()
        .map(|b| index(b, target.len(), "morphism.map"))
        .collect::<Result<Vec<_>>>()?;
    Morphism::new(source, target, map)
}

pub fn filtration_to_json(f: &Filtration) -> Value {
    let mut m = Map::new();
    m.insert("times".into(), Value::Array(f.times().iter().map(rational_to_json).collect()));
    m.insert("stages".into(), Value::Array(f.stages().iter().map(|e| json!({"blocks": blocks_to_json(e)})).collect()));
    if !is_default_uniform(f.ambient(), f.ambient().len()) {
        m.insert("space".into(), space_to_json(f.ambient()));
    }
    Value::Object(m)
}

/// Reads a filtration, or the `"filtration"` member of a generated bundle.
pub fn filtration_from_json(v: &Value, resolution: Option<u32>) -> Result<Filtration> {
    let m = object(v, "filtration")?;
    if let Some(inner) = m.get("filtration") {
        return filtration_from_json(inner, resolution);
    }
    only_keys(m, &["times", "stages", "space"], "filtration")?;
    let raw = array(field(m, "stages", "filtration")?, "filtration.stages")?;
    let mut block_lists = Vec::with_capacity(raw.len());
    for (i, s) in raw.iter().enumerate() {
        let sm = object(s, &format!("filtration.stages[{i}]"))?;
        only_keys(sm, &["blocks"], &format!("filtration.stages[{i}]"))?;
        block_lists.push(parse_blocks(field(sm, "blocks", "stage")?, None, &format!("filtration.stages[{i}].blocks"))?);
    }
    let all: Vec<Vec<usize>> = block_lists.iter().flatten().cloned().collect();
    let ambient = ambient_of(m, None, &all, resolution)?;
    let stages =
        block_lists.into_iter().map(|b| Partition::from_blocks(ambient.clone(), b)).collect::<Result<Vec<_>>>()?;
    let times = match m.get("times") {
        Some(t) => rationals(t, "filtration.times")?,
        None => (0..stages.len() as i64).map(rational::int).collect(),
    };
    Filtration::new(ambient, times, stages)
}

/// `{"values": [[f_t(path) for path] for t]}`.
pub fn process_to_json(values: &[Vec<Rational>]) -> Value {
    json!({"values": values.iter().map(|row| row.iter().map(rational_to_json).collect::<Vec<_>>()).collect::<Vec<_>>()})
}

/// Reads a process, or the `"process"` member of a generated bundle.
pub fn process_from_json(v: &Value) -> Result<Vec<Vec<Rational>>> {
    let m = object(v, "process")?;
    if let Some(inner) = m.get("process") {
        return process_from_json(inner);
    }
    only_keys(m, &["values"], "process")?;
    array(field(m, "values", "process")?, "process.values")?
        .iter()
        .enumerate()
        .map(|(t, row)| rationals(row, &format!("process.values[{t}]")))
        .collect()
}

pub fn metric_space_to_json(x: &FiniteMetricSpace) -> Value {
    json!({
        "points": x.labels(),
        "dist": x.matrix().iter().map(|r| r.iter().map(rational_to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn metric_space_from_json(v: &Value) -> Result<FiniteMetricSpace> {
    let m = object(v, "metric space")?;
    only_keys(m, &["points", "dist"], "metric space")?;
    let labels = array(field(m, "points", "metric space")?, "points")?
        .iter()
        .map(|x| x.as_str().map(str::to_owned).ok_or_else(|| schema("points: expected strings")))
        .collect::<Result<Vec<_>>>()?;
    let dist = array(field(m, "dist", "metric space")?, "dist")?
        .iter()
        .enumerate()
        .map(|(i, r)| rationals(r, &format!("dist[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    FiniteMetricSpace::new(labels, dist)
}

/// Exact value plus a labeled decimal approximation.
pub fn value_json(q: &Rational) -> Value {
    json!({"exact": rational::fmt_exact(q), "approx": rational::fmt_decimal(q)})
}
