//! The representing graph: a pseudo-polynomial expansion of an instance in
//! which ordinary matchings that expose only root-bottom vertices encode
//! H-matchings.
//!
//! Every set `k` owns a bottom group of `b_k` vertices and, unless it is the
//! root, a top group of `b_k` vertices; every edge `uv` owns two end groups
//! of `c_uv` vertices, one attached to `u` and one to `v`. Bottom and top
//! groups of a set are joined position by position, a top group is complete
//! to its parent's bottom group, an edge end is complete to its endpoint's
//! bottom group, and the two ends of an edge are joined position by position.

use thiserror::Error;

use crate::blossom::{self, Matching, WorkGraph};
use crate::instance::{HMatching, Instance, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReprError {
    #[error("representing graph too large: {vertices} vertices, {edges} edges (caps {max_vertices}, {max_edges})")]
    SizeOverflow {
        vertices: u64,
        edges: u64,
        max_vertices: u64,
        max_edges: u64,
    },
    #[error("multiplicities are not an H-matching ({} violations)", .0.len())]
    InfeasibleInput(Vec<Violation>),
    #[error("vertex {0:?} is exposed but not in the root bottom group")]
    BadExposure(Slot),
    #[error("vertex {0:?} is matched inconsistently")]
    Inconsistent(Slot),
}

/// Guards the pseudo-polynomial blow-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReprLimits {
    pub max_vertices: u64,
    pub max_edges: u64,
}

impl Default for ReprLimits {
    fn default() -> Self {
        ReprLimits {
            max_vertices: 2_000_000,
            max_edges: 50_000_000,
        }
    }
}

/// A vertex group of the representing graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    /// Bottom copy of set `k`.
    Bottom(usize),
    /// Top copy of set `k` (never the root).
    Top(usize),
    /// Edge end: `EdgeEnd(e, 0)` hangs off the lower endpoint of `e`,
    /// `EdgeEnd(e, 1)` off the upper one.
    EdgeEnd(usize, usize),
}

/// A vertex named by its group and 0-based position inside the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub group: Group,
    pub pos: u64,
}

impl Slot {
    pub fn new(group: Group, pos: u64) -> Self {
        Slot { group, pos }
    }
}

/// Canonical layout of `repr(M)` for a fixed H-matching, computed with
/// prefix sums instead of materializing anything.
///
/// Under the canonical construction, positions below `d_k` of a bottom group
/// are matched downwards (to child tops or edge ends, packed in child/edge
/// order), positions from `d_k` on are matched to the same position of the
/// top group (or exposed, for the root). Top positions below `d_k` are
/// matched into the parent's bottom group; edge-end positions below `x_e` are
/// matched into the endpoint's bottom group and the rest to their twins.
#[derive(Debug, Clone)]
pub struct CanonicalLayout<'a> {
    inst: &'a Instance,
    x: &'a HMatching,
    degree: Vec<u64>,
    /// Offset of each non-root set inside its parent's bottom group.
    set_offset: Vec<u64>,
    /// Offset of each edge end inside its endpoint's bottom group.
    edge_offset: Vec<[u64; 2]>,
    /// Per set, start offsets of its children (or incident edges, for a
    /// singleton) inside its bottom group.
    starts: Vec<Vec<u64>>,
}

impl<'a> CanonicalLayout<'a> {
    pub fn new(inst: &'a Instance, x: &'a HMatching) -> Self {
        let fam = inst.family();
        let graph = inst.graph();
        let n = inst.vertex_count();
        let degree = inst.set_degrees(x);
        let mut set_offset = vec![0; inst.set_count()];
        let mut edge_offset = vec![[0; 2]; inst.edge_count()];
        let mut starts = vec![Vec::new(); inst.set_count()];
        for k in 0..inst.set_count() {
            let mut acc = 0;
            if k < n && n > 1 {
                for &e in graph.incident(k) {
                    let side = usize::from(graph.endpoints(e).0 != k);
                    edge_offset[e][side] = acc;
                    starts[k].push(acc);
                    acc += x.get(e);
                }
            } else {
                for &c in fam.children(k) {
                    set_offset[c] = acc;
                    starts[k].push(acc);
                    acc += degree[c];
                }
            }
        }
        CanonicalLayout {
            inst,
            x,
            degree,
            set_offset,
            edge_offset,
            starts,
        }
    }

    pub fn degree(&self, k: usize) -> u64 {
        self.degree[k]
    }

    pub fn set_offset(&self, k: usize) -> u64 {
        self.set_offset[k]
    }

    pub fn edge_offset(&self, e: usize, side: usize) -> u64 {
        self.edge_offset[e][side]
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    pub fn multiplicities(&self) -> &HMatching {
        self.x
    }

    /// Partner of `slot` in the canonical `repr(M)`; `None` for exposed
    /// root-bottom positions.
    pub fn mate(&self, slot: Slot) -> Option<Slot> {
        let inst = self.inst;
        let q = slot.pos;
        match slot.group {
            Group::Bottom(k) => {
                if q >= self.degree[k] {
                    return (!inst.family().is_root(k)).then(|| Slot::new(Group::Top(k), q));
                }
                let idx = self.starts[k].partition_point(|&s| s <= q) - 1;
                let rel = q - self.starts[k][idx];
                if k < inst.vertex_count() {
                    let e = inst.graph().incident(k)[idx];
                    let side = usize::from(inst.graph().endpoints(e).0 != k);
                    Some(Slot::new(Group::EdgeEnd(e, side), rel))
                } else {
                    Some(Slot::new(Group::Top(inst.family().children(k)[idx]), rel))
                }
            }
            Group::Top(k) => {
                if q >= self.degree[k] {
                    Some(Slot::new(Group::Bottom(k), q))
                } else {
                    let p = inst.family().parent(k).expect("top groups belong to non-root sets");
                    Some(Slot::new(Group::Bottom(p), self.set_offset[k] + q))
                }
            }
            Group::EdgeEnd(e, side) => {
                if q >= self.x.get(e) {
                    Some(Slot::new(Group::EdgeEnd(e, 1 - side), q))
                } else {
                    let (u, v) = inst.graph().endpoints(e);
                    let end = if side == 0 { u } else { v };
                    Some(Slot::new(Group::Bottom(end), self.edge_offset[e][side] + q))
                }
            }
        }
    }
}

/// Size of a group for the given instance.
pub fn group_size(inst: &Instance, g: Group) -> u64 {
    match g {
        Group::Bottom(k) | Group::Top(k) => inst.bound(k),
        Group::EdgeEnd(e, _) => inst.capacity(e),
    }
}

/// Whether two groups are joined in the representing graph, and how.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    None,
    /// Position `q` joined to position `q`.
    Paired,
    /// Every vertex joined to every vertex.
    Complete,
}

pub fn adjacency(inst: &Instance, a: Group, b: Group) -> Adjacency {
    let fam = inst.family();
    let endpoint = |e: usize, side: usize| {
        let (u, v) = inst.graph().endpoints(e);
        if side == 0 {
            u
        } else {
            v
        }
    };
    match (a, b) {
        (Group::Bottom(k), Group::Top(j)) | (Group::Top(j), Group::Bottom(k)) => {
            if k == j {
                Adjacency::Paired
            } else if fam.parent(j) == Some(k) {
                Adjacency::Complete
            } else {
                Adjacency::None
            }
        }
        (Group::EdgeEnd(e, s), Group::Bottom(k)) | (Group::Bottom(k), Group::EdgeEnd(e, s)) => {
            if endpoint(e, s) == k && inst.vertex_count() > 1 {
                Adjacency::Complete
            } else {
                Adjacency::None
            }
        }
        (Group::EdgeEnd(e, s), Group::EdgeEnd(f, t)) if e == f && s != t => Adjacency::Paired,
        _ => Adjacency::None,
    }
}

/// Groups joined to `g` in the representing graph.
pub fn neighbor_groups(inst: &Instance, g: Group) -> Vec<Group> {
    let fam = inst.family();
    match g {
        Group::Bottom(k) => {
            let mut out = Vec::new();
            if !fam.is_root(k) {
                out.push(Group::Top(k));
            }
            out.extend(fam.children(k).iter().map(|&c| Group::Top(c)));
            if k < inst.vertex_count() && inst.vertex_count() > 1 {
                for &e in inst.graph().incident(k) {
                    let side = usize::from(inst.graph().endpoints(e).0 != k);
                    out.push(Group::EdgeEnd(e, side));
                }
            }
            out
        }
        Group::Top(k) => {
            let p = fam.parent(k).expect("top groups belong to non-root sets");
            vec![Group::Bottom(k), Group::Bottom(p)]
        }
        Group::EdgeEnd(e, side) => {
            let (u, v) = inst.graph().endpoints(e);
            vec![Group::Bottom(if side == 0 { u } else { v }), Group::EdgeEnd(e, 1 - side)]
        }
    }
}

/// Edge counts per class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeClassCounts {
    pub inner: u64,
    pub up: u64,
    pub twin: u64,
}

/// The representing graph, materialized.
#[derive(Debug, Clone)]
pub struct ReprGraph {
    graph: WorkGraph,
    /// `(first vertex id, group)` sorted by first id.
    groups: Vec<(usize, Group)>,
    bottom_start: Vec<usize>,
    top_start: Vec<Option<usize>>,
    edge_start: Vec<[usize; 2]>,
    counts: EdgeClassCounts,
}

/// Vertex and edge counts of the representing graph, without building it.
pub fn repr_size(inst: &Instance) -> (u64, u64) {
    let fam = inst.family();
    let root = inst.root();
    let sum_b: u64 = inst.bounds().iter().sum();
    let sum_c: u64 = inst.capacities().iter().sum();
    let vertices = 2 * sum_b - inst.bound(root) + 2 * sum_c;
    let mut edges = 0u64;
    for k in 0..inst.set_count() {
        if let Some(p) = fam.parent(k) {
            edges += inst.bound(k) + inst.bound(k).saturating_mul(inst.bound(p));
        }
    }
    for (e, &(u, v)) in inst.graph().edges().iter().enumerate() {
        let c = inst.capacity(e);
        edges += c + c.saturating_mul(inst.bound(u)) + c.saturating_mul(inst.bound(v));
    }
    (vertices, edges)
}

pub fn build_repr(inst: &Instance, limits: ReprLimits) -> Result<ReprGraph, ReprError> {
    let (vertices, edges) = repr_size(inst);
    if vertices > limits.max_vertices || edges > limits.max_edges {
        return Err(ReprError::SizeOverflow {
            vertices,
            edges,
            max_vertices: limits.max_vertices,
            max_edges: limits.max_edges,
        });
    }
    let fam = inst.family();
    let m = inst.set_count();
    let mut groups = Vec::new();
    let mut next = 0usize;
    let mut bottom_start = vec![0; m];
    for (k, start) in bottom_start.iter_mut().enumerate() {
        *start = next;
        groups.push((next, Group::Bottom(k)));
        next += inst.bound(k) as usize;
    }
    let mut top_start = vec![None; m];
    for (k, start) in top_start.iter_mut().enumerate() {
        if !fam.is_root(k) {
            *start = Some(next);
            groups.push((next, Group::Top(k)));
            next += inst.bound(k) as usize;
        }
    }
    let mut edge_start = vec![[0; 2]; inst.edge_count()];
    for (e, start) in edge_start.iter_mut().enumerate() {
        for (side, s) in start.iter_mut().enumerate() {
            *s = next;
            groups.push((next, Group::EdgeEnd(e, side)));
            next += inst.capacity(e) as usize;
        }
    }
    debug_assert_eq!(next as u64, vertices);

    let mut graph = WorkGraph::new(next);
    let mut counts = EdgeClassCounts::default();
    for k in 0..m {
        let Some(p) = fam.parent(k) else { continue };
        let (bk, tk, bp) = (bottom_start[k], top_start[k].unwrap(), bottom_start[p]);
        for q in 0..inst.bound(k) as usize {
            graph.add_edge(bk + q, tk + q);
            counts.inner += 1;
            for r in 0..inst.bound(p) as usize {
                graph.add_edge(tk + q, bp + r);
                counts.up += 1;
            }
        }
    }
    for (e, &(u, v)) in inst.graph().edges().iter().enumerate() {
        let c = inst.capacity(e) as usize;
        for (side, end) in [(0, u), (1, v)] {
            for q in 0..c {
                for r in 0..inst.bound(end) as usize {
                    graph.add_edge(edge_start[e][side] + q, bottom_start[end] + r);
                    counts.up += 1;
                }
            }
        }
        for q in 0..c {
            graph.add_edge(edge_start[e][0] + q, edge_start[e][1] + q);
            counts.twin += 1;
        }
    }
    Ok(ReprGraph {
        graph,
        groups,
        bottom_start,
        top_start,
        edge_start,
        counts,
    })
}

impl ReprGraph {
    pub fn graph(&self) -> &WorkGraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn class_counts(&self) -> EdgeClassCounts {
        self.counts
    }

    pub fn vertex(&self, slot: Slot) -> usize {
        let base = match slot.group {
            Group::Bottom(k) => self.bottom_start[k],
            Group::Top(k) => self.top_start[k].expect("root has no top group"),
            Group::EdgeEnd(e, s) => self.edge_start[e][s],
        };
        base + slot.pos as usize
    }

    pub fn slot(&self, v: usize) -> Slot {
        let i = self.groups.partition_point(|&(start, _)| start <= v) - 1;
        let (start, group) = self.groups[i];
        Slot::new(group, (v - start) as u64)
    }

    /// Number of matched pairs between the bottom and top groups of `k`.
    pub fn inner_pairs(&self, m: &Matching, inst: &Instance, k: usize) -> u64 {
        let Some(t) = self.top_start[k] else { return 0 };
        let b = self.bottom_start[k];
        (0..inst.bound(k) as usize).filter(|&q| m.mate(b + q) == Some(t + q)).count() as u64
    }

    /// Number of matched vertices in the root bottom group.
    pub fn matched_in_root(&self, m: &Matching, inst: &Instance) -> u64 {
        let b = self.bottom_start[inst.root()];
        (0..inst.bound(inst.root()) as usize).filter(|&q| !m.is_exposed(b + q)).count() as u64
    }

    pub fn root_bottom(&self, inst: &Instance) -> std::ops::Range<usize> {
        let b = self.bottom_start[inst.root()];
        b..b + inst.bound(inst.root()) as usize
    }
}

/// The canonical representing matching of a feasible `x`, built by the
/// greedy fill: edge ends first (edges in lexicographic order), then sets
/// in postorder, each group filling its lowest free positions and taking
/// slack from its highest ones.
pub fn repr_matching(inst: &Instance, repr: &ReprGraph, x: &HMatching) -> Result<Matching, ReprError> {
    inst.check_feasible(x).map_err(ReprError::InfeasibleInput)?;
    let fam = inst.family();
    let mut m = Matching::empty(repr.vertex_count());
    let mut fill = vec![0u64; inst.set_count()];
    for (e, &(u, v)) in inst.graph().edges().iter().enumerate() {
        let (c, xe) = (inst.capacity(e), x.get(e));
        for q in xe..c {
            m.pair(
                repr.vertex(Slot::new(Group::EdgeEnd(e, 0), q)),
                repr.vertex(Slot::new(Group::EdgeEnd(e, 1), q)),
            );
        }
        for q in 0..xe {
            for (side, end) in [(0, u), (1, v)] {
                m.pair(
                    repr.vertex(Slot::new(Group::EdgeEnd(e, side), q)),
                    repr.vertex(Slot::new(Group::Bottom(end), fill[end])),
                );
                fill[end] += 1;
            }
        }
    }
    for &k in fam.postorder() {
        let Some(p) = fam.parent(k) else { continue };
        let d = fill[k];
        for q in d..inst.bound(k) {
            m.pair(
                repr.vertex(Slot::new(Group::Bottom(k), q)),
                repr.vertex(Slot::new(Group::Top(k), q)),
            );
        }
        for q in 0..d {
            m.pair(
                repr.vertex(Slot::new(Group::Top(k), q)),
                repr.vertex(Slot::new(Group::Bottom(p), fill[p])),
            );
            fill[p] += 1;
        }
    }
    Ok(m)
}

/// Recovers the H-matching encoded by a matching of the representing graph
/// whose exposed vertices all lie in the root bottom group: `x_e` counts
/// the positions of an edge's lower end matched into its endpoint's bottom
/// group instead of to their twin.
pub fn extract_hmatching(inst: &Instance, repr: &ReprGraph, m: &Matching) -> Result<HMatching, ReprError> {
    let root = repr.root_bottom(inst);
    for v in 0..repr.vertex_count() {
        if m.is_exposed(v) && !root.contains(&v) {
            return Err(ReprError::BadExposure(repr.slot(v)));
        }
    }
    let mut x = HMatching::empty(inst.edge_count());
    for (e, &(u, v)) in inst.graph().edges().iter().enumerate() {
        let mut count = 0;
        for q in 0..inst.capacity(e) {
            let lo = repr.vertex(Slot::new(Group::EdgeEnd(e, 0), q));
            let hi = repr.vertex(Slot::new(Group::EdgeEnd(e, 1), q));
            let in_bottom = |w: usize, end: usize| {
                let start = repr.bottom_start[end];
                m.mate(w).is_some_and(|t| (start..start + inst.bound(end) as usize).contains(&t))
            };
            match (m.mate(lo) == Some(hi), in_bottom(lo, u), in_bottom(hi, v)) {
                (true, _, _) => {}
                (false, true, true) => count += 1,
                (false, false, _) => return Err(ReprError::Inconsistent(repr.slot(lo))),
                (false, true, false) => return Err(ReprError::Inconsistent(repr.slot(hi))),
            }
        }
        x.set(e, count);
    }
    if !inst.is_feasible(&x) {
        return Err(ReprError::Inconsistent(Slot::new(Group::Bottom(inst.root()), 0)));
    }
    Ok(x)
}

/// Maximum H-matching through the representing graph: start from the
/// canonical matching of the empty H-matching, augment to a maximum
/// matching (exposed vertices only ever get matched, so they stay in the
/// root bottom group) and read the result back.
pub fn solve_pseudo(inst: &Instance, limits: ReprLimits) -> Result<HMatching, ReprError> {
    if inst.edge_count() == 0 {
        return Ok(HMatching::empty(0));
    }
    let repr = build_repr(inst, limits)?;
    let seed = repr_matching(inst, &repr, &HMatching::empty(inst.edge_count()))?;
    let best = blossom::max_matching_from_seed(repr.graph(), seed);
    extract_hmatching(inst, &repr, &best)
}

/// Whether `repr(x)` admits an augmenting path in the full representing
/// graph, i.e. whether `x` is not maximum.
pub fn repr_can_augment(inst: &Instance, x: &HMatching, limits: ReprLimits) -> Result<bool, ReprError> {
    if inst.edge_count() == 0 {
        return Ok(false);
    }
    let repr = build_repr(inst, limits)?;
    let m = repr_matching(inst, &repr, x)?;
    let exposed: Vec<usize> = repr.root_bottom(inst).filter(|&v| m.is_exposed(v)).collect();
    Ok(blossom::find_augmenting_path(repr.graph(), &m, &exposed).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;
    use crate::oracle::{brute_force_max, DEFAULT_BUDGET};
    use crate::test_support::random_instance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lims() -> ReprLimits {
        ReprLimits::default()
    }

    #[test]
    fn fx1_counts() {
        let inst = fx1().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        assert_eq!(r.vertex_count(), 8);
        assert_eq!(r.edge_count(), 9);
        assert_eq!(r.class_counts(), EdgeClassCounts { inner: 2, up: 6, twin: 1 });
        assert_eq!(repr_size(&inst), (8, 9));
    }

    #[test]
    fn fx4_twin_edges() {
        let inst = fx4().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        assert_eq!(r.class_counts().twin, 2);
    }

    #[test]
    fn inner_edges_count_non_root_bounds() {
        let inst = fx3().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        let want: u64 = (0..inst.set_count() - 1).map(|k| inst.bound(k)).sum();
        assert_eq!(r.class_counts().inner, want);
        let sum_b: u64 = inst.bounds().iter().sum();
        let sum_c: u64 = inst.capacities().iter().sum();
        assert_eq!(r.vertex_count() as u64, 2 * sum_b - inst.bound(inst.root()) + 2 * sum_c);
    }

    #[test]
    fn size_cap_is_enforced() {
        let inst = fx3().normalized();
        let err = build_repr(&inst, ReprLimits { max_vertices: 10, max_edges: 1000 }).unwrap_err();
        assert!(matches!(err, ReprError::SizeOverflow { .. }));
    }

    #[test]
    fn slot_round_trip() {
        let inst = fx3().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        for v in 0..r.vertex_count() {
            assert_eq!(r.vertex(r.slot(v)), v);
        }
    }

    #[test]
    fn fx1_empty_matching() {
        let inst = fx1().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        let m = repr_matching(&inst, &r, &HMatching::empty(1)).unwrap();
        let pairs: Vec<(Slot, Slot)> = m.pairs().into_iter().map(|(a, b)| (r.slot(a), r.slot(b))).collect();
        assert_eq!(pairs.len(), 3);
        assert!(pairs.contains(&(Slot::new(Group::Bottom(0), 0), Slot::new(Group::Top(0), 0))));
        assert!(pairs.contains(&(Slot::new(Group::Bottom(1), 0), Slot::new(Group::Top(1), 0))));
        assert!(pairs.contains(&(Slot::new(Group::EdgeEnd(0, 0), 0), Slot::new(Group::EdgeEnd(0, 1), 0))));
        assert_eq!(r.matched_in_root(&m, &inst), 0);
    }

    #[test]
    fn fx1_single_edge_matching() {
        let inst = fx1().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        let x = HMatching::from_vec(vec![1]);
        let m = repr_matching(&inst, &r, &x).unwrap();
        assert!(m.exposed().is_empty());
        assert_eq!(r.matched_in_root(&m, &inst), 2);
        assert_eq!(extract_hmatching(&inst, &r, &m).unwrap(), x);
    }

    #[test]
    fn fx1_cross_matched_extracts_one() {
        let inst = fx1().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        let v = |g, p| r.vertex(Slot::new(g, p));
        let m = Matching::from_pairs(
            r.vertex_count(),
            &[
                (v(Group::EdgeEnd(0, 0), 0), v(Group::Bottom(0), 0)),
                (v(Group::EdgeEnd(0, 1), 0), v(Group::Bottom(1), 0)),
                (v(Group::Top(0), 0), v(Group::Bottom(2), 0)),
                (v(Group::Top(1), 0), v(Group::Bottom(2), 1)),
            ],
        )
        .unwrap();
        m.validate(r.graph()).unwrap();
        assert_eq!(extract_hmatching(&inst, &r, &m).unwrap().as_slice(), &[1]);
    }

    #[test]
    fn fx4_both_pairs_cross_matched() {
        let inst = fx4().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        let x = HMatching::from_vec(vec![2]);
        let m = repr_matching(&inst, &r, &x).unwrap();
        for q in 0..2 {
            let end = r.vertex(Slot::new(Group::EdgeEnd(0, 0), q));
            assert_eq!(r.slot(m.mate(end).unwrap()).group, Group::Bottom(0));
        }
        assert_eq!(extract_hmatching(&inst, &r, &m).unwrap(), x);
    }

    #[test]
    fn exposure_outside_root_is_rejected() {
        let inst = fx1().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        let err = extract_hmatching(&inst, &r, &Matching::empty(r.vertex_count())).unwrap_err();
        assert!(matches!(err, ReprError::BadExposure(_)));
    }

    #[test]
    fn infeasible_input_rejected() {
        let inst = fx3().normalized();
        let r = build_repr(&inst, lims()).unwrap();
        let x = x_of(&inst, &[(0, 1, 1)]);
        assert!(matches!(repr_matching(&inst, &r, &x), Err(ReprError::InfeasibleInput(_))));
    }

    /// Four-cycle with sets {0,1} and {2,3}; the solution leaves slack 3 at
    /// vertex 1, none at {0,1} and 2 at {2,3}.
    #[test]
    fn four_cycle_slack_pairs() {
        let inst = Instance::from_parts(
            4,
            &[(0, 1, 3), (1, 2, 3), (2, 3, 3), (0, 3, 3)],
            &[3, 4, 3, 3],
            &[(vec![0, 1], 4), (vec![2, 3], 6)],
            Some(10),
        )
        .unwrap();
        let x = x_of(&inst, &[(0, 3, 3), (1, 2, 1)]);
        assert!(inst.is_feasible(&x));
        let r = build_repr(&inst, lims()).unwrap();
        let m = repr_matching(&inst, &r, &x).unwrap();
        assert_eq!(r.inner_pairs(&m, &inst, 0), 0);
        assert_eq!(r.inner_pairs(&m, &inst, 1), 3);
        assert_eq!(r.inner_pairs(&m, &inst, 4), 0);
        assert_eq!(r.inner_pairs(&m, &inst, 5), 2);
        assert_eq!(r.matched_in_root(&m, &inst), 2 * x.cardinality());
    }

    #[test]
    fn canonical_layout_agrees_with_fill_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..150 {
            let (inst, x) = random_instance_with_x(&mut rng);
            let r = build_repr(&inst, lims()).unwrap();
            let m = repr_matching(&inst, &r, &x).unwrap();
            let layout = CanonicalLayout::new(&inst, &x);
            for v in 0..r.vertex_count() {
                let want = m.mate(v).map(|w| r.slot(w));
                assert_eq!(layout.mate(r.slot(v)), want, "vertex {:?}", r.slot(v));
            }
        }
    }

    fn random_instance_with_x(rng: &mut ChaCha8Rng) -> (Instance, HMatching) {
        let inst = random_instance(rng, 2..=6, 0.6, 3, 2);
        let mut x = HMatching::empty(inst.edge_count());
        for e in 0..inst.edge_count() {
            let want = rng.gen_range(0..=inst.capacity(e));
            for _ in 0..want {
                x.set(e, x.get(e) + 1);
                if !inst.is_feasible(&x) {
                    x.set(e, x.get(e) - 1);
                    break;
                }
            }
        }
        (inst, x)
    }

    #[test]
    fn canonical_relations_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (inst, x) = random_instance_with_x(&mut rng);
            let r = build_repr(&inst, lims()).unwrap();
            let m = repr_matching(&inst, &r, &x).unwrap();
            m.validate(r.graph()).unwrap();
            assert_eq!(r.matched_in_root(&m, &inst), 2 * x.cardinality());
            for k in 0..inst.set_count() - 1 {
                assert_eq!(r.inner_pairs(&m, &inst, k) as i64, inst.slack_set(&x, k));
            }
            let root = r.root_bottom(&inst);
            assert!(m.exposed().iter().all(|v| root.contains(v)));
            assert_eq!(extract_hmatching(&inst, &r, &m).unwrap(), x);
        }
    }

    #[test]
    fn pseudo_solves_fixtures() {
        assert_eq!(solve_pseudo(&fx1().normalized(), lims()).unwrap().cardinality(), 1);
        assert_eq!(solve_pseudo(&fx5().normalized(), lims()).unwrap().cardinality(), 1);
        assert_eq!(solve_pseudo(&fx3().normalized(), lims()).unwrap().cardinality(), 2);
    }

    #[test]
    fn pseudo_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let inst = random_instance(&mut rng, 2..=6, 0.5, 3, 2);
            let x = solve_pseudo(&inst, lims()).unwrap();
            assert!(inst.is_feasible(&x));
            let best = brute_force_max(&inst, DEFAULT_BUDGET).unwrap().best_size;
            assert_eq!(x.cardinality(), best);
        }
    }

    #[test]
    fn exposure_shrinks_monotonically() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let inst = random_instance(&mut rng, 2..=5, 0.6, 3, 2);
            if inst.edge_count() == 0 {
                continue;
            }
            let r = build_repr(&inst, lims()).unwrap();
            let mut m = repr_matching(&inst, &r, &HMatching::empty(inst.edge_count())).unwrap();
            let root = r.root_bottom(&inst);
            loop {
                let exposed = m.exposed();
                assert!(exposed.iter().all(|v| root.contains(v)));
                let Some(p) = blossom::find_augmenting_path(r.graph(), &m, &exposed) else { break };
                m.augment(r.graph(), &p).unwrap();
                let after = m.exposed();
                assert!(after.len() < exposed.len() && after.iter().all(|v| exposed.contains(v)));
            }
        }
    }
}
