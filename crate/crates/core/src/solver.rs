//! Pipeline dispatch and run reports.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::augment::{augment_to_optimal, AugmentError};
use crate::flow::{greedy_fill, near_optimal};
use crate::instance::{HMatching, Instance, Violation};
use crate::oracle::{brute_force_max, OracleError, DEFAULT_BUDGET};
use crate::repr::{solve_pseudo, ReprError, ReprLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Flow relaxation, rounding, then augmentation in the gadget graph.
    Poly,
    /// Maximum matching in the full representing graph.
    Pseudo,
    /// Exhaustive search.
    Oracle,
    /// Flow relaxation and rounding only.
    FlowOnly,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Poly, Algorithm::Pseudo, Algorithm::Oracle, Algorithm::FlowOnly];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Poly => "poly",
            Algorithm::Pseudo => "pseudo",
            Algorithm::Oracle => "oracle",
            Algorithm::FlowOnly => "flow-only",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected poly, pseudo, oracle or flow-only)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub oracle_budget: u64,
    /// In the poly pipeline, greedily top up the rounded solution before
    /// augmenting.
    pub greedy_fill: bool,
    pub repr_limits: ReprLimits,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            oracle_budget: DEFAULT_BUDGET,
            greedy_fill: true,
            repr_limits: ReprLimits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
}

impl SolveError {
    /// Whether the failure is a size or budget limit rather than a bug.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, SolveError::Repr(ReprError::SizeOverflow { .. }) | SolveError::Oracle(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    /// Value of the maximum flow (twice the fractional optimum).
    pub flow_value: Option<u64>,
    /// Half-units lost while rounding the fractional solution.
    pub rounding_loss_halves: Option<u64>,
    /// Size right after rounding.
    pub rounded_size: Option<u64>,
    /// Size after the greedy top-up, when it ran.
    pub filled_size: Option<u64>,
    pub augmentations: u64,
    /// Search nodes visited by the oracle.
    pub oracle_nodes: Option<u64>,
    /// Wall time in microseconds; not part of the determinism contract.
    pub elapsed_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub digest: String,
    pub algorithm: Algorithm,
    pub x: HMatching,
    pub cardinality: u64,
    pub degrees: Vec<u64>,
    pub slacks: Vec<u64>,
    pub counters: Counters,
}

/// SHA-256 over a canonical text rendering of the instance.
pub fn instance_digest(inst: &Instance) -> String {
    let mut h = Sha256::new();
    h.update(format!("n {}\n", inst.vertex_count()));
    for (e, &(u, v)) in inst.graph().edges().iter().enumerate() {
        h.update(format!("e {u} {v} {}\n", inst.capacity(e)));
    }
    for (k, members) in inst.family().sets().iter().enumerate() {
        let list: Vec<String> = members.iter().map(|v| v.to_string()).collect();
        h.update(format!("s {} {}\n", inst.bound(k), list.join(" ")));
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Solves `inst` (normalizing internally) with the chosen pipeline. Degrees
/// and slacks in the report refer to the bounds as given.
pub fn solve(inst: &Instance, algo: Algorithm, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let norm = inst.normalized();
    let mut counters = Counters::default();
    let x = match algo {
        Algorithm::Poly | Algorithm::FlowOnly => {
            let near = near_optimal(&norm);
            counters.flow_value = Some(near.flow_value);
            counters.rounding_loss_halves = Some(near.round.loss_halves);
            counters.rounded_size = Some(near.x.cardinality());
            if algo == Algorithm::Poly {
                let start = if opts.greedy_fill {
                    let y = greedy_fill(&norm, &near.x);
                    counters.filled_size = Some(y.cardinality());
                    y
                } else {
                    near.x
                };
                let (x, steps) = augment_to_optimal(&norm, start)?;
                counters.augmentations = steps;
                x
            } else {
                near.x
            }
        }
        Algorithm::Pseudo => solve_pseudo(&norm, opts.repr_limits)?,
        Algorithm::Oracle => {
            let r = brute_force_max(&norm, opts.oracle_budget)?;
            counters.oracle_nodes = Some(r.nodes_explored);
            r.best_x
        }
    };
    debug_assert!(inst.is_feasible(&x));
    let degrees = inst.set_degrees(&x);
    let slacks = degrees.iter().enumerate().map(|(k, &d)| inst.bound(k) - d).collect();
    counters.elapsed_us = start.elapsed().as_micros() as u64;
    Ok(SolveReport {
        digest: instance_digest(inst),
        algorithm: algo,
        cardinality: x.cardinality(),
        x,
        degrees,
        slacks,
        counters,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Feasible and matched by an exhaustive search.
    Optimal,
    /// Feasible; the oracle did not finish within its budget.
    FeasibleOnly,
    /// Feasible but smaller than the optimum.
    Suboptimal { optimum: u64 },
    Infeasible(Vec<Violation>),
}

impl Certificate {
    pub fn is_ok(&self) -> bool {
        matches!(self, Certificate::Optimal | Certificate::FeasibleOnly)
    }
}

pub fn verify_certificate(inst: &Instance, x: &HMatching, oracle_budget: u64) -> Certificate {
    if let Err(v) = inst.check_feasible(x) {
        return Certificate::Infeasible(v);
    }
    match brute_force_max(&inst.normalized(), oracle_budget) {
        Ok(r) if r.best_size == x.cardinality() => Certificate::Optimal,
        Ok(r) => Certificate::Suboptimal { optimum: r.best_size },
        Err(_) => Certificate::FeasibleOnly,
    }
}
