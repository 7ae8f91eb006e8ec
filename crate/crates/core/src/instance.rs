//! Graphs, problem instances and H-matchings.

use std::fmt;

use thiserror::Error;

use crate::family::{validate_family, FamilyError, LaminarFamily, SetOrigin};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("edge ({0}, {0}) is a loop")]
    Loop(usize),
    #[error("edge ({u}, {v}) has an endpoint outside 0..{n}")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },
    #[error("edge ({0}, {1}) appears twice")]
    ParallelEdge(usize, usize),
    #[error("bound vector has {got} entries, expected {expected}")]
    BoundLength { got: usize, expected: usize },
    #[error("capacity vector has {got} entries, expected {expected}")]
    CapacityLength { got: usize, expected: usize },
    #[error("set {0} has a zero bound")]
    ZeroBound(usize),
    #[error("edge {0} has a zero capacity")]
    ZeroCapacity(usize),
    #[error("set record {{{0}}} duplicates a vertex bound")]
    SingletonRecord(usize),
    #[error("root bound given both as a set record and separately")]
    RootGivenTwice,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Simple undirected graph on `0..n`. Edges are stored as `(u, v)` with
/// `u < v`, sorted lexicographically; an edge's index is its rank in that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, InstanceError> {
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(InstanceError::Loop(a));
            }
            if a >= n || b >= n {
                return Err(InstanceError::EndpointOutOfRange { u: a, v: b, n });
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(InstanceError::ParallelEdge(w[0].0, w[0].1));
        }
        let mut incident = vec![Vec::new(); n];
        for (e, &(u, v)) in list.iter().enumerate() {
            incident[u].push(e);
            incident[v].push(e);
        }
        for inc in &mut incident {
            inc.sort_unstable();
        }
        Ok(Graph { n, edges: list, incident })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Edge indices incident to `v`, ascending (i.e. lexicographic order).
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }
}

/// An instance `(G, L, b, c)`: a graph, a laminar family over its vertices,
/// a positive bound per set and a positive capacity per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    graph: Graph,
    family: LaminarFamily,
    b: Vec<u64>,
    c: Vec<u64>,
}

impl Instance {
    pub fn new(graph: Graph, family: LaminarFamily, b: Vec<u64>, c: Vec<u64>) -> Result<Self, InstanceError> {
        if b.len() != family.len() {
            return Err(InstanceError::BoundLength { got: b.len(), expected: family.len() });
        }
        if c.len() != graph.edge_count() {
            return Err(InstanceError::CapacityLength { got: c.len(), expected: graph.edge_count() });
        }
        if let Some(k) = b.iter().position(|&x| x == 0) {
            return Err(InstanceError::ZeroBound(k));
        }
        if let Some(e) = c.iter().position(|&x| x == 0) {
            return Err(InstanceError::ZeroCapacity(e));
        }
        Ok(Instance { graph, family, b, c })
    }

    /// Assembles an instance from loose parts, filling defaults: edges are
    /// `(u, v, c)`, `vertex_b[v]` bounds each singleton, `sets` are the
    /// remaining sets with their bounds, and a missing root gets
    /// `root_b` or, failing that, the sum of the vertex bounds.
    pub fn from_parts(
        n: usize,
        edges: &[(usize, usize, u64)],
        vertex_b: &[u64],
        sets: &[(Vec<usize>, u64)],
        root_b: Option<u64>,
    ) -> Result<Self, InstanceError> {
        if vertex_b.len() != n {
            return Err(InstanceError::BoundLength { got: vertex_b.len(), expected: n });
        }
        let pairs: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        let graph = Graph::new(n, &pairs)?;
        let mut c = vec![0; graph.edge_count()];
        for &(u, v, cap) in edges {
            c[graph.find_edge(u, v).expect("edge just inserted")] = cap;
        }
        if let Some((set, _)) = sets.iter().find(|(s, _)| s.len() == 1) {
            return Err(InstanceError::SingletonRecord(set[0]));
        }
        if root_b.is_some() && n > 1 && sets.iter().any(|(s, _)| s.len() == n) {
            return Err(InstanceError::RootGivenTwice);
        }
        let raw: Vec<Vec<usize>> = sets.iter().map(|(s, _)| s.clone()).collect();
        let (family, origin) = validate_family(n, &raw, true)?;
        let vertex_sum: u64 = vertex_b.iter().sum();
        let b = origin
            .iter()
            .enumerate()
            .map(|(k, o)| match (k < n, o) {
                (true, _) => vertex_b[k],
                (false, SetOrigin::Input(i)) => sets[*i].1,
                (false, SetOrigin::Inserted) => root_b.unwrap_or(vertex_sum),
            })
            .collect();
        Instance::new(graph, family, b, c)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn family(&self) -> &LaminarFamily {
        &self.family
    }

    pub fn bounds(&self) -> &[u64] {
        &self.b
    }

    pub fn bound(&self, k: usize) -> u64 {
        self.b[k]
    }

    pub fn capacities(&self) -> &[u64] {
        &self.c
    }

    pub fn capacity(&self, e: usize) -> u64 {
        self.c[e]
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn set_count(&self) -> usize {
        self.family.len()
    }

    pub fn root(&self) -> usize {
        self.family.root()
    }

    /// Tightens `b` and `c` without changing the set of H-matchings:
    /// cap each bound by its parent's (preorder), then by the sum of its
    /// children's (postorder), then cap each capacity by both endpoint bounds.
    pub fn normalized(&self) -> Instance {
        let fam = &self.family;
        let mut b = self.b.clone();
        for &k in fam.preorder() {
            if let Some(p) = fam.parent(k) {
                b[k] = b[k].min(b[p]);
            }
        }
        for &k in fam.postorder() {
            let kids = fam.children(k);
            if !kids.is_empty() {
                let sum: u64 = kids.iter().map(|&c| b[c]).sum();
                b[k] = b[k].min(sum);
            }
        }
        let c = self
            .graph
            .edges()
            .iter()
            .zip(&self.c)
            .map(|(&(u, v), &cap)| cap.min(b[u]).min(b[v]))
            .collect();
        Instance {
            graph: self.graph.clone(),
            family: self.family.clone(),
            b,
            c,
        }
    }

    pub fn is_normalized(&self) -> bool {
        *self == self.normalized()
    }

    pub fn vertex_degrees(&self, x: &HMatching) -> Vec<u64> {
        let mut deg = vec![0; self.vertex_count()];
        for (e, &(u, v)) in self.graph.edges().iter().enumerate() {
            deg[u] += x.get(e);
            deg[v] += x.get(e);
        }
        deg
    }

    /// `d(L)` for every set, accumulated up the laminar tree.
    pub fn set_degrees(&self, x: &HMatching) -> Vec<u64> {
        let mut d = vec![0; self.set_count()];
        let vd = self.vertex_degrees(x);
        d[..vd.len()].copy_from_slice(&vd);
        for &k in self.family.postorder() {
            if let Some(p) = self.family.parent(k) {
                d[p] += d[k];
            }
        }
        d
    }

    pub fn degree(&self, x: &HMatching, set: usize) -> u64 {
        self.family
            .members(set)
            .iter()
            .map(|&v| self.graph.incident(v).iter().map(|&e| x.get(e)).sum::<u64>())
            .sum()
    }

    pub fn slack_set(&self, x: &HMatching, set: usize) -> i64 {
        self.b[set] as i64 - self.degree(x, set) as i64
    }

    pub fn slack_edge(&self, x: &HMatching, e: usize) -> i64 {
        self.c[e] as i64 - x.get(e) as i64
    }

    /// Lists every violated capacity or bound; empty means `x` is an H-matching.
    pub fn violations(&self, x: &HMatching) -> Vec<Violation> {
        let mut out = Vec::new();
        if x.len() != self.edge_count() {
            out.push(Violation::Length { got: x.len(), expected: self.edge_count() });
            return out;
        }
        for e in 0..self.edge_count() {
            if x.get(e) > self.c[e] {
                out.push(Violation::Edge { edge: e, multiplicity: x.get(e), capacity: self.c[e] });
            }
        }
        for (k, &d) in self.set_degrees(x).iter().enumerate() {
            if d > self.b[k] {
                out.push(Violation::Set { set: k, degree: d, bound: self.b[k] });
            }
        }
        out
    }

    pub fn check_feasible(&self, x: &HMatching) -> Result<(), Vec<Violation>> {
        let v = self.violations(x);
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn is_feasible(&self, x: &HMatching) -> bool {
        self.violations(x).is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Length { got: usize, expected: usize },
    Edge { edge: usize, multiplicity: u64, capacity: u64 },
    Set { set: usize, degree: u64, bound: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Length { got, expected } => {
                write!(f, "multiplicity vector has {got} entries, expected {expected}")
            }
            Violation::Edge { edge, multiplicity, capacity } => {
                write!(f, "edge {edge}: multiplicity {multiplicity} exceeds capacity {capacity}")
            }
            Violation::Set { set, degree, bound } => {
                write!(f, "set {set}: degree {degree} exceeds bound {bound}")
            }
        }
    }
}

/// Edge multiplicities `x_e`, indexed like [`Graph::edges`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct HMatching {
    x: Vec<u64>,
}

impl HMatching {
    pub fn empty(edges: usize) -> Self {
        HMatching { x: vec![0; edges] }
    }

    pub fn from_vec(x: Vec<u64>) -> Self {
        HMatching { x }
    }

    pub fn get(&self, e: usize) -> u64 {
        self.x[e]
    }

    pub fn set(&mut self, e: usize, value: u64) {
        self.x[e] = value;
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `|M|`, the sum of multiplicities.
    pub fn cardinality(&self) -> u64 {
        self.x.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.x
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.x
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    fn build(n: usize, edges: &[(usize, usize, u64)], vertex_b: &[u64], sets: &[(Vec<usize>, u64)], root: u64) -> Instance {
        Instance::from_parts(n, edges, vertex_b, sets, Some(root)).unwrap()
    }

    /// Vertices are shifted to 0-based: the fixture's vertex 1 is 0 here.
    pub fn fx1() -> Instance {
        build(2, &[(0, 1, 1)], &[1, 1], &[], 2)
    }

    pub fn fx2() -> Instance {
        build(3, &[(0, 1, 1), (1, 2, 1)], &[1, 1, 1], &[], 4)
    }

    pub fn fx3() -> Instance {
        fx3_with(4)
    }

    pub fn fx3_with(b6: u64) -> Instance {
        build(
            4,
            &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)],
            &[2, 2, 2, 2],
            &[(vec![0, 1], 1), (vec![2, 3], b6)],
            8,
        )
    }

    pub fn fx4() -> Instance {
        build(2, &[(0, 1, 3)], &[2, 3], &[], 5)
    }

    pub fn fx5() -> Instance {
        fx5_with(3)
    }

    pub fn fx5_with(root: u64) -> Instance {
        build(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)], &[1, 1, 1], &[], root)
    }

    pub fn fx6() -> Instance {
        build(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)], &[1, 1, 1, 1], &[], 4)
    }

    /// Multiplicities given as `(u, v, x)` on 0-based vertices.
    pub fn x_of(inst: &Instance, entries: &[(usize, usize, u64)]) -> HMatching {
        let mut x = HMatching::empty(inst.edge_count());
        for &(u, v, m) in entries {
            x.set(inst.graph().find_edge(u, v).unwrap(), m);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn graph_rejects_bad_edges() {
        assert_eq!(Graph::new(3, &[(1, 1)]).unwrap_err(), InstanceError::Loop(1));
        assert_eq!(Graph::new(3, &[(0, 1), (1, 0)]).unwrap_err(), InstanceError::ParallelEdge(0, 1));
        assert!(matches!(Graph::new(3, &[(0, 3)]).unwrap_err(), InstanceError::EndpointOutOfRange { .. }));
        let g = Graph::new(4, &[(2, 3), (1, 0), (0, 3)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 3), (2, 3)]);
        assert_eq!(g.incident(3), &[1, 2]);
    }

    #[test]
    fn zero_bounds_and_capacities_rejected() {
        assert_eq!(
            Instance::from_parts(2, &[(0, 1, 0)], &[1, 1], &[], None).unwrap_err(),
            InstanceError::ZeroCapacity(0)
        );
        assert_eq!(
            Instance::from_parts(2, &[(0, 1, 1)], &[1, 0], &[], None).unwrap_err(),
            InstanceError::ZeroBound(1)
        );
    }

    #[test]
    fn root_defaults_to_sum_of_vertex_bounds() {
        let inst = Instance::from_parts(3, &[(0, 1, 1)], &[1, 2, 3], &[], None).unwrap();
        assert_eq!(inst.bound(inst.root()), 6);
    }

    #[test]
    fn explicit_root_set_record_keeps_its_bound() {
        let inst = Instance::from_parts(2, &[(0, 1, 1)], &[1, 1], &[(vec![0, 1], 7)], None).unwrap();
        assert_eq!(inst.bound(inst.root()), 7);
        assert_eq!(
            Instance::from_parts(2, &[], &[1, 1], &[(vec![0, 1], 7)], Some(3)).unwrap_err(),
            InstanceError::RootGivenTwice
        );
        assert_eq!(
            Instance::from_parts(2, &[], &[1, 1], &[(vec![1], 7)], None).unwrap_err(),
            InstanceError::SingletonRecord(1)
        );
    }

    #[test]
    fn normalize_caps_by_children_sum() {
        let inst = fx3_with(9).normalized();
        assert_eq!(inst.bound(5), 4);
        assert_eq!(inst.bound(4), 1);
    }

    #[test]
    fn normalize_caps_capacity_by_endpoint_bounds() {
        let inst = fx4().normalized();
        assert_eq!(inst.capacity(0), 2);
        assert_eq!(inst.bound(2), 5);
    }

    #[test]
    fn normalize_caps_root() {
        assert_eq!(fx5_with(100).normalized().bound(3), 3);
    }

    #[test]
    fn normalize_caps_child_by_parent() {
        let inst = Instance::from_parts(3, &[(0, 1, 5)], &[5, 5, 5], &[(vec![0, 1], 2)], Some(10)).unwrap();
        let norm = inst.normalized();
        assert_eq!(norm.bounds(), &[2, 2, 5, 2, 7]);
        assert_eq!(norm.capacity(0), 2);
        assert!(norm.is_normalized());
    }

    #[test]
    fn degree_and_slack() {
        let inst = fx3();
        let x = x_of(&inst, &[(1, 2, 1), (2, 3, 1)]);
        assert_eq!(inst.degree(&x, 4), 1);
        assert_eq!(inst.slack_set(&x, 4), 0);
        let zero = HMatching::empty(inst.edge_count());
        assert_eq!(inst.degree(&zero, inst.root()), 0);
        assert_eq!(inst.slack_set(&zero, inst.root()), 8);

        let inst = fx4().normalized();
        let x = HMatching::from_vec(vec![2]);
        assert_eq!(inst.slack_edge(&x, 0), 0);
        assert_eq!(x.cardinality(), 2);
    }

    #[test]
    fn feasibility_reports_violations() {
        let inst = fx3();
        let x = x_of(&inst, &[(0, 1, 1)]);
        assert_eq!(inst.check_feasible(&x).unwrap_err(), vec![Violation::Set { set: 4, degree: 2, bound: 1 }]);

        let inst = fx1();
        assert!(inst.check_feasible(&x_of(&inst, &[(0, 1, 1)])).is_ok());

        let inst = fx2();
        let x = x_of(&inst, &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(inst.check_feasible(&x).unwrap_err(), vec![Violation::Set { set: 1, degree: 2, bound: 1 }]);

        let over = HMatching::from_vec(vec![2]);
        assert!(matches!(fx1().violations(&over)[0], Violation::Edge { edge: 0, .. }));
        assert!(matches!(fx1().violations(&HMatching::empty(3))[0], Violation::Length { .. }));
    }

    #[test]
    fn cardinality_examples() {
        assert_eq!(HMatching::empty(4).cardinality(), 0);
        let inst = fx3();
        assert_eq!(x_of(&inst, &[(1, 2, 1), (2, 3, 1)]).cardinality(), 2);
    }

    #[test]
    fn set_degrees_match_direct_count() {
        let inst = fx3();
        let x = x_of(&inst, &[(1, 2, 1), (0, 3, 1)]);
        let d = inst.set_degrees(&x);
        for k in 0..inst.set_count() {
            assert_eq!(d[k], inst.degree(&x, k));
        }
        assert_eq!(d[inst.root()], 2 * x.cardinality());
    }
}
