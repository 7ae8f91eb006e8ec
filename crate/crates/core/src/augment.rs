//! One augmentation step without the pseudo-polynomial blow-up.
//!
//! The representing graph of a feasible `x` is never built. Instead a few
//! positions of every group are kept: the first two down-matched and the
//! last two slack positions of each set, the first two used and the last
//! two unused units of each edge, the partners of the kept down-matched
//! vertices, and the two lowest exposed root positions. Every induced edge
//! of the representing graph among those vertices is added, red when it
//! belongs to the canonical matching and blue otherwise. An alternating
//! path between the two exposed vertices is then exactly one unit of
//! improvement.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::blossom::{self, Matching, WorkGraph};
use crate::instance::{HMatching, Instance, Violation};
use crate::repr::{adjacency, neighbor_groups, Adjacency, CanonicalLayout, Group, Slot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AugmentError {
    #[error("the root has fewer than two free units; no augmentation is possible")]
    NoExposedPair,
    #[error("multiplicities are not an H-matching ({} violations)", .0.len())]
    InfeasibleInput(Vec<Violation>),
}

#[derive(Debug, Clone)]
pub struct AugGraph {
    graph: WorkGraph,
    slots: Vec<Slot>,
    red: Matching,
    x1: usize,
    x2: usize,
}

impl AugGraph {
    pub fn graph(&self) -> &WorkGraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Where vertex `v` sits in the representing graph.
    pub fn slot(&self, v: usize) -> Slot {
        self.slots[v]
    }

    /// The red edges, as a matching of the gadget graph.
    pub fn red(&self) -> &Matching {
        &self.red
    }

    pub fn is_red(&self, u: usize, v: usize) -> bool {
        self.red.mate(u) == Some(v)
    }

    pub fn terminals(&self) -> (usize, usize) {
        (self.x1, self.x2)
    }

    /// An alternating path between the two terminals, if any.
    pub fn find_path(&self) -> Option<Vec<usize>> {
        blossom::find_augmenting_path(&self.graph, &self.red, &[self.x1, self.x2])
    }
}

/// Pushes positions `0..min(2, used)` and the last `min(2, size - used)`
/// positions of a group.
fn marked_positions(used: u64, size: u64) -> (std::ops::Range<u64>, std::ops::Range<u64>) {
    let free = size - used;
    (0..used.min(2), size - free.min(2)..size)
}

pub fn build_aug(inst: &Instance, x: &HMatching) -> Result<AugGraph, AugmentError> {
    inst.check_feasible(x).map_err(AugmentError::InfeasibleInput)?;
    let root = inst.root();
    let layout = CanonicalLayout::new(inst, x);
    let d_root = layout.degree(root);
    if inst.bound(root) < d_root + 2 {
        return Err(AugmentError::NoExposedPair);
    }
    let fam = inst.family();

    let mut kept: BTreeSet<Slot> = BTreeSet::new();
    let keep_blue = |kept: &mut BTreeSet<Slot>, a: Slot, b: Slot| {
        for s in [a, b] {
            kept.insert(s);
            if let Some(p) = layout.mate(s) {
                kept.insert(p);
            }
        }
    };
    for k in 0..inst.set_count() {
        if fam.is_root(k) {
            continue;
        }
        let (blue, red) = marked_positions(layout.degree(k), inst.bound(k));
        for q in blue {
            keep_blue(&mut kept, Slot::new(Group::Bottom(k), q), Slot::new(Group::Top(k), q));
        }
        for q in red {
            kept.insert(Slot::new(Group::Bottom(k), q));
            kept.insert(Slot::new(Group::Top(k), q));
        }
    }
    for e in 0..inst.edge_count() {
        let (blue, red) = marked_positions(x.get(e), inst.capacity(e));
        for q in blue {
            keep_blue(&mut kept, Slot::new(Group::EdgeEnd(e, 0), q), Slot::new(Group::EdgeEnd(e, 1), q));
        }
        for q in red {
            kept.insert(Slot::new(Group::EdgeEnd(e, 0), q));
            kept.insert(Slot::new(Group::EdgeEnd(e, 1), q));
        }
    }
    let t1 = Slot::new(Group::Bottom(root), d_root);
    let t2 = Slot::new(Group::Bottom(root), d_root + 1);
    kept.insert(t1);
    kept.insert(t2);

    let slots: Vec<Slot> = kept.into_iter().collect();
    let mut by_group: BTreeMap<Group, Vec<(u64, usize)>> = BTreeMap::new();
    for (id, s) in slots.iter().enumerate() {
        by_group.entry(s.group).or_default().push((s.pos, id));
    }

    let mut graph = WorkGraph::new(slots.len());
    let mut red = Matching::empty(slots.len());
    for (&ga, va) in &by_group {
        for gb in neighbor_groups(inst, ga) {
            if gb <= ga {
                continue;
            }
            let Some(vb) = by_group.get(&gb) else { continue };
            match adjacency(inst, ga, gb) {
                Adjacency::None => {}
                Adjacency::Paired => {
                    for &(p, a) in va {
                        if let Ok(j) = vb.binary_search_by_key(&p, |&(q, _)| q) {
                            graph.add_edge(a, vb[j].1);
                        }
                    }
                }
                Adjacency::Complete => {
                    for &(_, a) in va {
                        for &(_, b) in vb {
                            graph.add_edge(a, b);
                        }
                    }
                }
            }
        }
    }
    for (a, &s) in slots.iter().enumerate() {
        if let Some(p) = layout.mate(s) {
            if let Ok(b) = slots.binary_search(&p) {
                if a < b {
                    red.pair(a, b);
                }
            }
        }
    }
    let x1 = slots.binary_search(&t1).expect("terminal kept");
    let x2 = slots.binary_search(&t2).expect("terminal kept");
    Ok(AugGraph { graph, slots, red, x1, x2 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Improved(HMatching),
    Optimal,
}

/// Applies an alternating path of the gadget graph to `x`: an edge-end pair
/// that was red (unused unit) becomes used, a blue one becomes unused.
pub fn apply_path(aug: &AugGraph, x: &HMatching, path: &[usize]) -> HMatching {
    let mut y = x.clone();
    for w in path.windows(2) {
        let (a, b) = (aug.slot(w[0]), aug.slot(w[1]));
        if let (Group::EdgeEnd(e, s), Group::EdgeEnd(f, t)) = (a.group, b.group) {
            if e == f && s != t {
                if aug.is_red(w[0], w[1]) {
                    y.set(e, y.get(e) + 1);
                } else {
                    y.set(e, y.get(e) - 1);
                }
            }
        }
    }
    y
}

/// Tries to grow `x` by one unit.
pub fn augment_step(inst: &Instance, x: &HMatching) -> Result<StepOutcome, AugmentError> {
    let aug = match build_aug(inst, x) {
        Ok(a) => a,
        Err(AugmentError::NoExposedPair) => return Ok(StepOutcome::Optimal),
        Err(e) => return Err(e),
    };
    match aug.find_path() {
        None => Ok(StepOutcome::Optimal),
        Some(path) => {
            let y = apply_path(&aug, x, &path);
            debug_assert!(inst.is_feasible(&y) && y.cardinality() == x.cardinality() + 1);
            Ok(StepOutcome::Improved(y))
        }
    }
}

/// Repeats [`augment_step`] until no improvement exists; returns the final
/// H-matching and the number of successful steps.
pub fn augment_to_optimal(inst: &Instance, x: HMatching) -> Result<(HMatching, u64), AugmentError> {
    let mut x = x;
    let mut steps = 0;
    loop {
        match augment_step(inst, &x)? {
            StepOutcome::Improved(y) => {
                x = y;
                steps += 1;
            }
            StepOutcome::Optimal => return Ok((x, steps)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;
    use crate::oracle::{brute_force_max, DEFAULT_BUDGET};
    use crate::repr::{build_repr, repr_can_augment, repr_matching, ReprLimits};
    use crate::test_support::random_instance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fx1_from_empty() {
        let inst = fx1().normalized();
        let x = HMatching::empty(1);
        let aug = build_aug(&inst, &x).unwrap();
        assert_eq!(aug.vertex_count(), 8);
        let (x1, x2) = aug.terminals();
        assert_eq!(aug.slot(x1), Slot::new(Group::Bottom(2), 0));
        assert_eq!(aug.slot(x2), Slot::new(Group::Bottom(2), 1));
        assert_eq!(aug.red().size(), 3);
        let path = aug.find_path().unwrap();
        assert_eq!(path.len(), 8);
        assert_eq!(augment_step(&inst, &x).unwrap(), StepOutcome::Improved(HMatching::from_vec(vec![1])));
    }

    #[test]
    fn fx4_full_is_no_pair() {
        let inst = fx4().normalized();
        let x = HMatching::from_vec(vec![2]);
        assert_eq!(build_aug(&inst, &x).unwrap_err(), AugmentError::NoExposedPair);
        assert_eq!(augment_step(&inst, &x).unwrap(), StepOutcome::Optimal);
    }

    #[test]
    fn fx3_optimal_has_no_path() {
        let raw = fx3();
        let x = x_of(&raw, &[(1, 2, 1), (2, 3, 1)]);
        assert!(raw.is_feasible(&x));
        let aug = build_aug(&raw, &x).unwrap();
        assert!(aug.find_path().is_none());
        assert_eq!(augment_step(&raw, &x).unwrap(), StepOutcome::Optimal);
        // Normalization pulls the root bound down to 5, leaving one free unit.
        let inst = raw.normalized();
        assert_eq!(build_aug(&inst, &x).unwrap_err(), AugmentError::NoExposedPair);
        assert_eq!(augment_step(&inst, &x).unwrap(), StepOutcome::Optimal);
    }

    #[test]
    fn fx3_grows_from_one_edge() {
        let inst = fx3().normalized();
        let x = x_of(&inst, &[(2, 3, 1)]);
        let StepOutcome::Improved(y) = augment_step(&inst, &x).unwrap() else { panic!("expected growth") };
        assert_eq!(y.cardinality(), 2);
        assert!(inst.is_feasible(&y));
        let candidates = [x_of(&inst, &[(2, 3, 1), (1, 2, 1)]), x_of(&inst, &[(2, 3, 1), (0, 3, 1)])];
        assert!(candidates.contains(&y));
    }

    #[test]
    fn infeasible_input_rejected() {
        let inst = fx3().normalized();
        let x = x_of(&inst, &[(0, 1, 1)]);
        assert!(matches!(augment_step(&inst, &x), Err(AugmentError::InfeasibleInput(_))));
    }

    #[test]
    fn gadget_is_consistent_subgraph() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let limits = ReprLimits::default();
        for _ in 0..150 {
            let inst = random_instance(&mut rng, 2..=7, 0.5, 3, 3);
            let (x, _) = augment_to_optimal(&inst, HMatching::empty(inst.edge_count())).unwrap();
            let mut partial = x.clone();
            for e in 0..inst.edge_count() {
                if rng.gen_bool(0.5) {
                    partial.set(e, 0);
                }
            }
            let Ok(aug) = build_aug(&inst, &partial) else { continue };
            let repr = build_repr(&inst, limits).unwrap();
            let full = repr_matching(&inst, &repr, &partial).unwrap();
            for (a, b) in aug.graph().edge_list() {
                let (ra, rb) = (repr.vertex(aug.slot(a)), repr.vertex(aug.slot(b)));
                assert!(repr.graph().has_edge(ra, rb));
                assert_eq!(aug.is_red(a, b), full.mate(ra) == Some(rb));
            }
            aug.red().validate(aug.graph()).unwrap();
            let mut exposed = aug.red().exposed();
            exposed.sort_unstable();
            let (x1, x2) = aug.terminals();
            assert_eq!(exposed, vec![x1.min(x2), x1.max(x2)]);
            let bound = 14 * (inst.set_count() + inst.edge_count()) + 2;
            assert!(aug.vertex_count() <= bound);
        }
    }

    #[test]
    fn steps_reach_oracle_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let inst = random_instance(&mut rng, 2..=6, 0.6, 3, 2);
            let (x, steps) = augment_to_optimal(&inst, HMatching::empty(inst.edge_count())).unwrap();
            assert!(inst.is_feasible(&x));
            assert_eq!(steps, x.cardinality());
            assert_eq!(x.cardinality(), brute_force_max(&inst, DEFAULT_BUDGET).unwrap().best_size);
        }
    }

    /// Optimal is reported exactly when the full representing graph has no
    /// augmenting path, starting from arbitrary feasible points.
    #[test]
    fn completeness_against_full_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let limits = ReprLimits::default();
        for _ in 0..200 {
            let inst = random_instance(&mut rng, 2..=7, 0.5, 4, 3);
            let mut x = HMatching::empty(inst.edge_count());
            for e in 0..inst.edge_count() {
                for _ in 0..rng.gen_range(0..=inst.capacity(e)) {
                    x.set(e, x.get(e) + 1);
                    if !inst.is_feasible(&x) {
                        x.set(e, x.get(e) - 1);
                        break;
                    }
                }
            }
            loop {
                let full = repr_can_augment(&inst, &x, limits).unwrap();
                match augment_step(&inst, &x).unwrap() {
                    StepOutcome::Improved(y) => {
                        assert!(full);
                        assert!(inst.is_feasible(&y));
                        assert_eq!(y.cardinality(), x.cardinality() + 1);
                        x = y;
                    }
                    StepOutcome::Optimal => {
                        assert!(!full, "missed augmentation on {inst:?} at {x:?}");
                        break;
                    }
                }
            }
        }
    }
}
