//! Maximum-cardinality matching in general graphs (Edmonds' blossom
//! algorithm). Searches grow one alternating tree from a single exposed root
//! and contract odd cycles on the fly through a union-find over blossom
//! bases, so one search costs near-linear time in the graph size.

use std::collections::VecDeque;

use thiserror::Error;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("invalid augmenting path: {0}")]
    InvalidPath(&'static str),
    #[error("mate of {0} is not mutual")]
    NotMutual(usize),
    #[error("matched pair ({0}, {1}) is not an edge")]
    MissingEdge(usize, usize),
}

/// Undirected graph given by adjacency lists. Callers keep it simple.
#[derive(Debug, Clone, Default)]
pub struct WorkGraph {
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl WorkGraph {
    pub fn new(n: usize) -> Self {
        WorkGraph { adj: vec![Vec::new(); n], edges: 0 }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = WorkGraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v, "loop at {u}");
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.edges += 1;
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].contains(&b)
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edges);
        for (u, nb) in self.adj.iter().enumerate() {
            out.extend(nb.iter().filter(|&&v| u < v).map(|&v| (u, v)));
        }
        out
    }
}

/// A matching stored as a symmetric mate array.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    mate: Vec<usize>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching { mate: vec![NONE; n] }
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, MatchingError> {
        let mut m = Matching::empty(n);
        for &(u, v) in pairs {
            if m.mate[u] != NONE {
                return Err(MatchingError::NotMutual(u));
            }
            if m.mate[v] != NONE {
                return Err(MatchingError::NotMutual(v));
            }
            m.mate[u] = v;
            m.mate[v] = u;
        }
        Ok(m)
    }

    pub fn vertex_count(&self) -> usize {
        self.mate.len()
    }

    pub fn mate(&self, v: usize) -> Option<usize> {
        (self.mate[v] != NONE).then_some(self.mate[v])
    }

    pub fn is_exposed(&self, v: usize) -> bool {
        self.mate[v] == NONE
    }

    pub fn size(&self) -> usize {
        self.mate.iter().filter(|&&m| m != NONE).count() / 2
    }

    pub fn exposed(&self) -> Vec<usize> {
        (0..self.mate.len()).filter(|&v| self.mate[v] == NONE).collect()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.mate.len())
            .filter(|&v| self.mate[v] != NONE && v < self.mate[v])
            .map(|v| (v, self.mate[v]))
            .collect()
    }

    /// Pairs `u` and `v`, which must both be exposed.
    pub fn pair(&mut self, u: usize, v: usize) {
        assert!(self.mate[u] == NONE && self.mate[v] == NONE);
        self.mate[u] = v;
        self.mate[v] = u;
    }

    pub fn validate(&self, graph: &WorkGraph) -> Result<(), MatchingError> {
        for (v, &m) in self.mate.iter().enumerate() {
            if m == NONE {
                continue;
            }
            if self.mate[m] != v {
                return Err(MatchingError::NotMutual(v));
            }
            if v < m && !graph.has_edge(v, m) {
                return Err(MatchingError::MissingEdge(v, m));
            }
        }
        Ok(())
    }

    /// Flips the matching along an augmenting path, growing it by one.
    pub fn augment(&mut self, graph: &WorkGraph, path: &[usize]) -> Result<(), MatchingError> {
        if path.len() < 2 || !path.len().is_multiple_of(2) {
            return Err(MatchingError::InvalidPath("path must have an odd number of edges"));
        }
        let (first, last) = (path[0], path[path.len() - 1]);
        if self.mate[first] != NONE || self.mate[last] != NONE {
            return Err(MatchingError::InvalidPath("endpoints must be exposed"));
        }
        let mut seen = std::collections::HashSet::with_capacity(path.len());
        if !path.iter().all(|&v| seen.insert(v)) {
            return Err(MatchingError::InvalidPath("path repeats a vertex"));
        }
        for (t, w) in path.windows(2).enumerate() {
            if !graph.has_edge(w[0], w[1]) {
                return Err(MatchingError::InvalidPath("consecutive vertices are not adjacent"));
            }
            let matched = self.mate[w[0]] == w[1];
            if matched != (t % 2 == 1) {
                return Err(MatchingError::InvalidPath("edges do not alternate"));
            }
        }
        for w in path.chunks(2) {
            self.mate[w[0]] = w[1];
            self.mate[w[1]] = w[0];
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Label {
    Free,
    Even,
    Odd,
}

/// Scratch state for alternating-tree searches; reusable across searches on
/// graphs of the same size.
pub struct BlossomSearch {
    label: Vec<Label>,
    parent: Vec<usize>,
    base: Vec<usize>,
    stamp: Vec<u32>,
    clock: u32,
    queue: VecDeque<usize>,
}

impl BlossomSearch {
    pub fn new(n: usize) -> Self {
        BlossomSearch {
            label: vec![Label::Free; n],
            parent: vec![NONE; n],
            base: (0..n).collect(),
            stamp: vec![0; n],
            clock: 0,
            queue: VecDeque::new(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        let mut root = v;
        while self.base[root] != root {
            root = self.base[root];
        }
        while self.base[v] != root {
            let next = self.base[v];
            self.base[v] = root;
            v = next;
        }
        root
    }

    fn lca(&mut self, m: &Matching, a: usize, b: usize) -> usize {
        self.clock += 1;
        let (mut u, mut w) = (self.find(a), self.find(b));
        loop {
            if u != NONE {
                if self.stamp[u] == self.clock {
                    return u;
                }
                self.stamp[u] = self.clock;
                u = match m.mate[u] {
                    NONE => NONE,
                    mu => {
                        let p = self.parent[mu];
                        self.find(p)
                    }
                };
            }
            std::mem::swap(&mut u, &mut w);
        }
    }

    /// Walks from `v` to the blossom base `top`, redirecting tree pointers
    /// across the new edge `(v, across)` and turning odd vertices even.
    fn shrink(&mut self, m: &Matching, mut v: usize, mut across: usize, top: usize) {
        while self.find(v) != top {
            self.parent[v] = across;
            across = m.mate[v];
            if self.label[across] == Label::Odd {
                self.label[across] = Label::Even;
                self.queue.push_back(across);
            }
            if self.find(v) == v {
                self.base[v] = top;
            }
            if self.find(across) == across {
                self.base[across] = top;
            }
            v = self.parent[across];
        }
    }

    /// Searches for an augmenting path from the exposed vertex `root` to any
    /// other exposed vertex accepted by `target`. Returns the path from the
    /// far endpoint back to `root`.
    pub fn search_from(
        &mut self,
        graph: &WorkGraph,
        m: &Matching,
        root: usize,
        target: &dyn Fn(usize) -> bool,
    ) -> Option<Vec<usize>> {
        let n = graph.vertex_count();
        if self.label.len() != n {
            *self = BlossomSearch::new(n);
        }
        debug_assert!(m.mate[root] == NONE);
        self.label.fill(Label::Free);
        self.parent.fill(NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.queue.clear();
        self.label[root] = Label::Even;
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &x in graph.neighbors(v) {
                match self.label[x] {
                    Label::Free => {
                        self.label[x] = Label::Odd;
                        self.parent[x] = v;
                        match m.mate[x] {
                            NONE if target(x) => return Some(self.trace(m, x)),
                            NONE => {}
                            mx => {
                                self.label[mx] = Label::Even;
                                self.queue.push_back(mx);
                            }
                        }
                    }
                    Label::Even => {
                        if self.find(v) != self.find(x) {
                            let top = self.lca(m, v, x);
                            self.shrink(m, x, v, top);
                            self.shrink(m, v, x, top);
                        }
                    }
                    Label::Odd => {}
                }
            }
        }
        None
    }

    fn trace(&self, m: &Matching, end: usize) -> Vec<usize> {
        let mut path = vec![end];
        let mut v = end;
        loop {
            let p = self.parent[v];
            path.push(p);
            match m.mate[p] {
                NONE => break,
                next => {
                    path.push(next);
                    v = next;
                }
            }
        }
        path
    }
}

/// Finds an augmenting path whose endpoints both lie in `allowed`, trying
/// allowed exposed roots in ascending order. `None` iff no such path exists.
pub fn find_augmenting_path(graph: &WorkGraph, m: &Matching, allowed: &[usize]) -> Option<Vec<usize>> {
    let mut ok = vec![false; graph.vertex_count()];
    for &v in allowed {
        ok[v] = true;
    }
    let mut roots: Vec<usize> = allowed.iter().copied().filter(|&v| m.is_exposed(v)).collect();
    roots.sort_unstable();
    roots.dedup();
    let mut search = BlossomSearch::new(graph.vertex_count());
    let target = |v: usize| ok[v];
    roots.into_iter().find_map(|r| search.search_from(graph, m, r, &target))
}

/// Grows `seed` by augmenting paths until none remains. Only exposed
/// vertices of the seed get matched, so the exposed set can only shrink.
pub fn max_matching_from_seed(graph: &WorkGraph, seed: Matching) -> Matching {
    let mut m = seed;
    let mut search = BlossomSearch::new(graph.vertex_count());
    let any = |_: usize| true;
    for r in 0..graph.vertex_count() {
        if !m.is_exposed(r) {
            continue;
        }
        // A root with no augmenting path now never gains one later.
        if let Some(path) = search.search_from(graph, &m, r, &any) {
            m.augment(graph, &path).expect("search returns valid augmenting paths");
        }
    }
    m
}

pub fn max_matching(graph: &WorkGraph) -> Matching {
    max_matching_from_seed(graph, Matching::empty(graph.vertex_count()))
}
