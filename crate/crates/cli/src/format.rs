//! JSON instance and solution files.
//!
//! Files number vertices from 1; the library numbers them from 0. Every
//! document carries a `format_version`, and unknown fields are rejected.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use hmatch::{HMatching, Instance, InstanceError, SolveReport};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("{0}")]
    Vertex(String),
    #[error("invalid instance: {0}")]
    Invalid(#[from] InstanceError),
}

impl FormatError {
    /// Whether the text was readable but describes an invalid instance.
    pub fn is_validation(&self) -> bool {
        matches!(self, FormatError::Vertex(_) | FormatError::Invalid(_))
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub c: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetRecord {
    pub members: Vec<usize>,
    pub b: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootRecord {
    pub b: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format_version: u32,
    pub n: usize,
    pub edges: Vec<EdgeRecord>,
    pub vertex_b: Vec<u64>,
    #[serde(default)]
    pub sets: Vec<SetRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<RootRecord>,
}

fn to_zero_based(v: usize, n: usize, what: &str) -> Result<usize, FormatError> {
    if v == 0 || v > n {
        return Err(FormatError::Vertex(format!("{what}: vertex {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance, FormatError> {
        if self.format_version != FORMAT_VERSION {
            return Err(FormatError::Version(self.format_version));
        }
        let n = self.n;
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let what = format!("edge #{i}");
            let (u, v) = (to_zero_based(e.u, n, &what)?, to_zero_based(e.v, n, &what)?);
            if u == v {
                return Err(FormatError::Vertex(format!("{what} is a loop at vertex {}", e.u)));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(FormatError::Vertex(format!("{what} repeats edge {{{}, {}}}", e.u, e.v)));
            }
            edges.push((u, v, e.c));
        }
        let mut sets = Vec::with_capacity(self.sets.len());
        for (i, s) in self.sets.iter().enumerate() {
            let what = format!("set #{i}");
            let members = s
                .members
                .iter()
                .map(|&v| to_zero_based(v, n, &what))
                .collect::<Result<Vec<_>, _>>()?;
            sets.push((members, s.b));
        }
        Ok(Instance::from_parts(n, &edges, &self.vertex_b, &sets, self.root.as_ref().map(|r| r.b))?)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let n = inst.vertex_count();
        let fam = inst.family();
        let edges = inst
            .graph()
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| EdgeRecord { u: u + 1, v: v + 1, c: inst.capacity(e) })
            .collect();
        let sets = (n..inst.set_count())
            .filter(|&k| !fam.is_root(k))
            .map(|k| SetRecord {
                members: fam.members(k).iter().map(|v| v + 1).collect(),
                b: inst.bound(k),
            })
            .collect();
        InstanceFile {
            format_version: FORMAT_VERSION,
            n,
            edges,
            vertex_b: inst.bounds()[..n].to_vec(),
            sets,
            root: (n > 1).then(|| RootRecord { b: inst.bound(inst.root()) }),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.to_instance()
}

pub fn emit_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeValue {
    pub u: usize,
    pub v: usize,
    pub x: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetValue {
    pub members: Vec<usize>,
    pub b: u64,
    pub d: u64,
    pub s: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterValues {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_value: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounding_loss_halves: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounded_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filled_size: Option<u64>,
    pub augmentations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_nodes: Option<u64>,
    pub elapsed_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub format_version: u32,
    pub instance_digest: String,
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub size: u64,
    pub edges: Vec<EdgeValue>,
    pub sets: Vec<SetValue>,
    pub counters: CounterValues,
}

impl SolutionFile {
    pub fn from_report(inst: &Instance, report: &SolveReport, seed: Option<u64>) -> Self {
        let fam = inst.family();
        let c = &report.counters;
        SolutionFile {
            format_version: FORMAT_VERSION,
            instance_digest: report.digest.clone(),
            algorithm: report.algorithm.name().to_string(),
            seed,
            size: report.cardinality,
            edges: inst
                .graph()
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(u, v))| EdgeValue { u: u + 1, v: v + 1, x: report.x.get(e) })
                .collect(),
            sets: (0..inst.set_count())
                .map(|k| SetValue {
                    members: fam.members(k).iter().map(|v| v + 1).collect(),
                    b: inst.bound(k),
                    d: report.degrees[k],
                    s: report.slacks[k],
                })
                .collect(),
            counters: CounterValues {
                flow_value: c.flow_value,
                rounding_loss_halves: c.rounding_loss_halves,
                rounded_size: c.rounded_size,
                filled_size: c.filled_size,
                augmentations: c.augmentations,
                oracle_nodes: c.oracle_nodes,
                elapsed_us: c.elapsed_us,
            },
        }
    }

    /// Multiplicities in the instance's edge order. Edges missing from the
    /// file count as 0.
    pub fn to_hmatching(&self, inst: &Instance) -> Result<HMatching, FormatError> {
        if self.format_version != FORMAT_VERSION {
            return Err(FormatError::Version(self.format_version));
        }
        let n = inst.vertex_count();
        let mut x = HMatching::empty(inst.edge_count());
        for (i, ev) in self.edges.iter().enumerate() {
            let what = format!("solution edge #{i}");
            let (u, v) = (to_zero_based(ev.u, n, &what)?, to_zero_based(ev.v, n, &what)?);
            let e = inst
                .graph()
                .find_edge(u, v)
                .ok_or_else(|| FormatError::Vertex(format!("{what}: {{{}, {}}} is not an edge", ev.u, ev.v)))?;
            x.set(e, ev.x);
        }
        Ok(x)
    }
}

pub fn emit_solution(inst: &Instance, report: &SolveReport, seed: Option<u64>) -> String {
    let mut s =
        serde_json::to_string_pretty(&SolutionFile::from_report(inst, report, seed)).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, FormatError> {
    let file: SolutionFile = serde_json::from_str(text)?;
    if file.format_version != FORMAT_VERSION {
        return Err(FormatError::Version(file.format_version));
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hmatch::{solve, Algorithm, SolveOptions};

    const FX1: &str = r#"{"format_version": 1, "n": 2, "edges": [{"u": 1, "v": 2, "c": 1}],
        "vertex_b": [1, 1], "root": {"b": 2}}"#;

    #[test]
    fn fx1_round_trip() {
        let inst = parse_instance(FX1).unwrap();
        assert_eq!(inst.edge_count(), 1);
        assert_eq!(inst.set_count(), 3);
        let text = emit_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
        assert_eq!(emit_instance(&parse_instance(&text).unwrap()), text);
    }

    #[test]
    fn missing_root_defaults_to_vertex_sum() {
        let inst = parse_instance(r#"{"format_version": 1, "n": 3, "edges": [], "vertex_b": [1, 2, 4]}"#).unwrap();
        assert_eq!(inst.bound(inst.root()), 7);
    }

    #[test]
    fn overlapping_sets_are_invalid() {
        let text = r#"{"format_version": 1, "n": 3, "edges": [], "vertex_b": [1, 1, 1],
            "sets": [{"members": [1, 2], "b": 1}, {"members": [2, 3], "b": 1}]}"#;
        let err = parse_instance(text).unwrap_err();
        assert!(err.is_validation(), "{err}");
    }

    #[test]
    fn unknown_fields_and_versions_rejected() {
        let extra = FX1.replace("\"n\": 2", "\"n\": 2, \"weights\": []");
        assert!(matches!(parse_instance(&extra), Err(FormatError::Parse { .. })));
        let v2 = FX1.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(parse_instance(&v2), Err(FormatError::Version(2))));
        let float = FX1.replace("\"c\": 1", "\"c\": 1.5");
        assert!(matches!(parse_instance(&float), Err(FormatError::Parse { .. })));
    }

    #[test]
    fn parse_errors_carry_position() {
        let Err(FormatError::Parse { line, .. }) = parse_instance("{\n\"format_version\": 1,\n\"n\": }") else {
            panic!("expected a parse error");
        };
        assert_eq!(line, 3);
    }

    #[test]
    fn vertex_numbering_is_checked() {
        for bad in [
            FX1.replace("\"u\": 1", "\"u\": 0"),
            FX1.replace("\"v\": 2", "\"v\": 3"),
            FX1.replace("\"v\": 2", "\"v\": 1"),
        ] {
            assert!(matches!(parse_instance(&bad), Err(FormatError::Vertex(_))), "{bad}");
        }
    }

    #[test]
    fn solution_round_trip() {
        let inst = parse_instance(FX1).unwrap();
        let report = solve(&inst, Algorithm::Poly, &SolveOptions::default()).unwrap();
        let text = emit_solution(&inst, &report, Some(3));
        let file = parse_solution(&text).unwrap();
        assert_eq!(file.size, 1);
        assert_eq!(file.seed, Some(3));
        assert_eq!(file.sets.len(), 3);
        assert_eq!(file.to_hmatching(&inst).unwrap(), report.x);
        let again = serde_json::to_string_pretty(&file).unwrap() + "\n";
        assert_eq!(parse_solution(&again).unwrap(), file);
    }
}
