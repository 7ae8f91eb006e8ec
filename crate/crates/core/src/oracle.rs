//! Exhaustive search for a maximum H-matching on small instances.

use thiserror::Error;

use crate::instance::{HMatching, Instance};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle explored more than {0} nodes")]
    BudgetExceeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub best_x: HMatching,
    pub best_size: u64,
    pub nodes_explored: u64,
}

struct Search<'a> {
    inst: &'a Instance,
    /// Sets containing each endpoint, per edge; a set containing both
    /// endpoints appears twice.
    touched: Vec<Vec<usize>>,
    /// `suffix_cap[i]` = sum of capacities of edges `i..`.
    suffix_cap: Vec<u64>,
    degree: Vec<u64>,
    x: Vec<u64>,
    size: u64,
    best: Vec<u64>,
    best_size: u64,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn fits(&self, e: usize, k: u64) -> bool {
        self.touched[e].iter().all(|&s| self.degree[s] + k <= self.inst.bound(s))
            && self.touched[e].windows(2).all(|w| w[0] != w[1] || self.degree[w[0]] + 2 * k <= self.inst.bound(w[0]))
    }

    fn apply(&mut self, e: usize, k: u64, add: bool) {
        for &s in &self.touched[e] {
            if add {
                self.degree[s] += k;
            } else {
                self.degree[s] -= k;
            }
        }
    }

    fn go(&mut self, e: usize) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        if self.size > self.best_size {
            self.best_size = self.size;
            self.best.copy_from_slice(&self.x);
        }
        if e == self.x.len() {
            return Ok(());
        }
        let root = self.inst.root();
        let root_room = (self.inst.bound(root) - self.degree[root]) / 2;
        if self.size + self.suffix_cap[e].min(root_room) <= self.best_size {
            return Ok(());
        }
        for k in (0..=self.inst.capacity(e)).rev() {
            if k > 0 && !self.fits(e, k) {
                continue;
            }
            self.apply(e, k, true);
            self.x[e] = k;
            self.size += k;
            let r = self.go(e + 1);
            self.size -= k;
            self.x[e] = 0;
            self.apply(e, k, false);
            r?;
        }
        Ok(())
    }
}

/// Depth-first search over multiplicity vectors, edges in lexicographic
/// order and multiplicities tried from `c_e` down to 0. Prunes infeasible
/// prefixes and branches whose optimistic completion cannot beat the
/// incumbent.
pub fn brute_force_max(inst: &Instance, budget: u64) -> Result<OracleResult, OracleError> {
    let m = inst.edge_count();
    let fam = inst.family();
    let touched = inst
        .graph()
        .edges()
        .iter()
        .map(|&(u, v)| {
            let mut t: Vec<usize> = fam.chain(u).chain(fam.chain(v)).collect();
            t.sort_unstable();
            t
        })
        .collect();
    let mut suffix_cap = vec![0; m + 1];
    for e in (0..m).rev() {
        suffix_cap[e] = suffix_cap[e + 1] + inst.capacity(e);
    }
    let mut s = Search {
        inst,
        touched,
        suffix_cap,
        degree: vec![0; inst.set_count()],
        x: vec![0; m],
        size: 0,
        best: vec![0; m],
        best_size: 0,
        nodes: 0,
        budget,
    };
    s.go(0)?;
    Ok(OracleResult {
        best_x: HMatching::from_vec(s.best),
        best_size: s.best_size,
        nodes_explored: s.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;

    #[test]
    fn fixture_optima() {
        for (inst, want) in [(fx1(), 1), (fx5(), 1), (fx3(), 2), (fx6(), 2), (fx2(), 1)] {
            let r = brute_force_max(&inst.normalized(), DEFAULT_BUDGET).unwrap();
            assert_eq!(r.best_size, want);
            assert_eq!(r.best_x.cardinality(), want);
            assert!(inst.is_feasible(&r.best_x));
        }
        let r = brute_force_max(&fx4().normalized(), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.best_size, 2);
    }

    /// FX3 by plain subset enumeration: every 3-edge subset of the 4-cycle
    /// puts two units of degree on {0, 1}, whose bound is 1.
    #[test]
    fn fx3_matches_subset_enumeration() {
        let inst = fx3();
        let mut best = 0;
        for mask in 0u32..16 {
            let x = HMatching::from_vec((0..4).map(|e| u64::from(mask >> e & 1)).collect());
            if inst.is_feasible(&x) {
                best = best.max(x.cardinality());
            }
        }
        assert_eq!(best, 2);
        assert_eq!(brute_force_max(&inst, DEFAULT_BUDGET).unwrap().best_size, best);
    }

    #[test]
    fn budget_is_enforced() {
        assert_eq!(brute_force_max(&fx3(), 3).unwrap_err(), OracleError::BudgetExceeded(3));
    }

    #[test]
    fn single_vertex_instance() {
        let inst = Instance::from_parts(1, &[], &[4], &[], None).unwrap();
        assert_eq!(brute_force_max(&inst, 10).unwrap().best_size, 0);
    }
}
