//! The flow relaxation and its rounding.
//!
//! Every set gets an "in" node `k` and an "out" node `k'`. Flow enters at the
//! root, descends the tree through arcs `p -> k` of capacity `b_k`, crosses
//! from vertex `i` to vertex `j'` along an edge (capacity `c_ij`, in both
//! directions), and climbs back through `k' -> p'`. Averaging a maximum flow
//! with its mirror image gives a half-integral H-matching at least as large
//! as the optimum; rounding it loses at most about `2n/3` units.

use std::collections::VecDeque;

use crate::instance::{HMatching, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    sets: usize,
    arcs: Vec<Arc>,
    mirror: Vec<usize>,
    /// Per graph edge `ij` (i < j): the arcs `i -> j'` and `j -> i'`.
    edge_arcs: Vec<[usize; 2]>,
    /// Per non-root set: the arcs `p -> k` and `k' -> p'`.
    set_arcs: Vec<Option<[usize; 2]>>,
    root_arcs: [usize; 2],
}

impl FlowNetwork {
    pub fn node_count(&self) -> usize {
        2 * self.sets + 2
    }

    pub fn source(&self) -> usize {
        2 * self.sets
    }

    pub fn sink(&self) -> usize {
        2 * self.sets + 1
    }

    /// The out-copy `k'` of set node `k`.
    pub fn primed(&self, k: usize) -> usize {
        self.sets + k
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn mirror(&self, a: usize) -> usize {
        self.mirror[a]
    }

    pub fn edge_arcs(&self, e: usize) -> [usize; 2] {
        self.edge_arcs[e]
    }

    /// Checks capacities and conservation at every node but the terminals;
    /// returns the flow value.
    pub fn check_flow(&self, f: &[u64]) -> Result<u64, String> {
        self.check_scaled(f, 1)
    }

    /// Like [`FlowNetwork::check_flow`] with every capacity multiplied by
    /// `scale`.
    pub fn check_scaled(&self, f: &[u64], scale: u64) -> Result<u64, String> {
        if f.len() != self.arcs.len() {
            return Err(format!("flow has {} entries, network has {} arcs", f.len(), self.arcs.len()));
        }
        let mut balance = vec![0i128; self.node_count()];
        for (a, (arc, &fa)) in self.arcs.iter().zip(f).enumerate() {
            if fa > arc.cap * scale {
                return Err(format!("arc {a} carries {fa} over capacity {}", arc.cap * scale));
            }
            balance[arc.from] -= i128::from(fa);
            balance[arc.to] += i128::from(fa);
        }
        for (v, &bal) in balance.iter().enumerate() {
            if v != self.source() && v != self.sink() && bal != 0 {
                return Err(format!("node {v} is unbalanced by {bal}"));
            }
        }
        Ok((-balance[self.source()]) as u64)
    }

    /// The flow induced by an H-matching: `x_e` on both edge arcs, `d(L_k)`
    /// on both arcs of every set. Its value is `2|x|`.
    pub fn flow_of(&self, inst: &Instance, x: &HMatching) -> Vec<u64> {
        let d = inst.set_degrees(x);
        let mut f = vec![0; self.arcs.len()];
        for (e, arcs) in self.edge_arcs.iter().enumerate() {
            f[arcs[0]] = x.get(e);
            f[arcs[1]] = x.get(e);
        }
        for (k, arcs) in self.set_arcs.iter().enumerate() {
            if let Some([a, b]) = *arcs {
                f[a] = d[k];
                f[b] = d[k];
            }
        }
        let r = inst.root();
        f[self.root_arcs[0]] = d[r];
        f[self.root_arcs[1]] = d[r];
        f
    }
}

pub fn build_network(inst: &Instance) -> FlowNetwork {
    let m = inst.set_count();
    let fam = inst.family();
    let (s, t) = (2 * m, 2 * m + 1);
    let mut arcs = Vec::with_capacity(2 * m + 2 * inst.edge_count());
    let mut mirror = Vec::with_capacity(arcs.capacity());
    let mut push_pair = |arcs: &mut Vec<Arc>, a: Arc, b: Arc| {
        let i = arcs.len();
        arcs.push(a);
        arcs.push(b);
        mirror.push(i + 1);
        mirror.push(i);
        [i, i + 1]
    };
    let mut set_arcs = vec![None; m];
    for (k, slot) in set_arcs.iter_mut().enumerate() {
        if let Some(p) = fam.parent(k) {
            let cap = inst.bound(k);
            *slot = Some(push_pair(
                &mut arcs,
                Arc { from: p, to: k, cap },
                Arc { from: m + k, to: m + p, cap },
            ));
        }
    }
    let r = inst.root();
    let cap = inst.bound(r);
    let root_arcs = push_pair(&mut arcs, Arc { from: s, to: r, cap }, Arc { from: m + r, to: t, cap });
    let edge_arcs = inst
        .graph()
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| {
            let cap = inst.capacity(e);
            push_pair(&mut arcs, Arc { from: i, to: m + j, cap }, Arc { from: j, to: m + i, cap })
        })
        .collect();
    FlowNetwork {
        sets: m,
        arcs,
        mirror,
        edge_arcs,
        set_arcs,
        root_arcs,
    }
}

/// Dinic's blocking-flow algorithm on a residual copy of the network.
struct Dinic {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u64>,
    level: Vec<u32>,
    iter: Vec<usize>,
}

const NIL: usize = usize::MAX;

impl Dinic {
    fn new(net: &FlowNetwork) -> Self {
        let nodes = net.node_count();
        let mut d = Dinic {
            head: vec![NIL; nodes],
            next: Vec::with_capacity(2 * net.arcs.len()),
            to: Vec::with_capacity(2 * net.arcs.len()),
            cap: Vec::with_capacity(2 * net.arcs.len()),
            level: vec![0; nodes],
            iter: vec![0; nodes],
        };
        for a in &net.arcs {
            d.push(a.from, a.to, a.cap);
            d.push(a.to, a.from, 0);
        }
        d
    }

    fn push(&mut self, u: usize, v: usize, cap: u64) {
        self.to.push(v);
        self.cap.push(cap);
        self.next.push(self.head[u]);
        self.head[u] = self.to.len() - 1;
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(u32::MAX);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let mut a = self.head[u];
            while a != NIL {
                let v = self.to[a];
                if self.cap[a] > 0 && self.level[v] == u32::MAX {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
                a = self.next[a];
            }
        }
        self.level[t] != u32::MAX
    }

    /// One augmenting path in the level graph, found iteratively.
    fn dfs(&mut self, s: usize, t: usize) -> u64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let push = path.iter().map(|&a| self.cap[a]).min().unwrap_or(0);
                for &a in &path {
                    self.cap[a] -= push;
                    self.cap[a ^ 1] += push;
                }
                return push;
            }
            let mut advanced = false;
            while self.iter[u] != NIL {
                let a = self.iter[u];
                let v = self.to[a];
                if self.cap[a] > 0 && self.level[v] == self.level[u] + 1 {
                    path.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                self.iter[u] = self.next[a];
            }
            if !advanced {
                self.level[u] = u32::MAX;
                match path.pop() {
                    None => return 0,
                    Some(a) => {
                        u = self.to[a ^ 1];
                        self.iter[u] = self.next[a];
                    }
                }
            }
        }
    }
}

/// An integral maximum flow, one value per arc of `net`.
pub fn max_flow(net: &FlowNetwork) -> Vec<u64> {
    let mut d = Dinic::new(net);
    let (s, t) = (net.source(), net.sink());
    while d.bfs(s, t) {
        d.iter.copy_from_slice(&d.head);
        while d.dfs(s, t) > 0 {}
    }
    net.arcs.iter().enumerate().map(|(a, arc)| arc.cap - d.cap[2 * a]).collect()
}

/// The flow plus its mirror image, in doubled units: `g(a) = f(a) + f(a')`.
pub fn symmetric_doubled(net: &FlowNetwork, f: &[u64]) -> Vec<u64> {
    (0..f.len()).map(|a| f[a] + f[net.mirror(a)]).collect()
}

/// Half-integral multiplicities, stored doubled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfIntegral {
    pub x2: Vec<u64>,
}

impl HalfIntegral {
    pub fn halves(&self) -> u64 {
        self.x2.iter().sum()
    }

    /// Whether the halved values respect every capacity and set bound.
    pub fn is_feasible(&self, inst: &Instance) -> bool {
        if self.x2.len() != inst.edge_count() {
            return false;
        }
        let doubled = HMatching::from_vec(self.x2.clone());
        self.x2.iter().enumerate().all(|(e, &v)| v <= 2 * inst.capacity(e))
            && inst
                .set_degrees(&doubled)
                .iter()
                .enumerate()
                .all(|(k, &d)| d <= 2 * inst.bound(k))
    }
}

/// Averages `f` with its mirror and reads off the doubled multiplicities.
pub fn symmetrize(net: &FlowNetwork, f: &[u64]) -> HalfIntegral {
    HalfIntegral {
        x2: net.edge_arcs.iter().map(|&[a, b]| f[a] + f[b]).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundStats {
    pub even_trails: u64,
    pub odd_cycles: u64,
    pub forest_edges: u64,
    /// Doubled units lost: input halves minus twice the output size.
    pub loss_halves: u64,
}

/// Graph of the edges with odd doubled value.
struct OddGraph {
    adj: Vec<Vec<(usize, usize)>>,
}

impl OddGraph {
    fn new(inst: &Instance, x2: &[u64]) -> Self {
        let mut adj = vec![Vec::new(); inst.vertex_count()];
        for (e, &(u, v)) in inst.graph().edges().iter().enumerate() {
            if x2[e] % 2 == 1 {
                adj[u].push((v, e));
                adj[v].push((u, e));
            }
        }
        OddGraph { adj }
    }

    /// Biconnected components as edge lists (edge ids), found by an
    /// iterative Tarjan walk from the lowest vertex of each component.
    fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.adj.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut time = 0;
        let mut blocks = Vec::new();
        let mut edge_stack: Vec<usize> = Vec::new();
        for r in 0..n {
            if disc[r] != usize::MAX || self.adj[r].is_empty() {
                continue;
            }
            disc[r] = time;
            low[r] = time;
            time += 1;
            // (vertex, parent edge, next neighbor index)
            let mut stack: Vec<(usize, usize, usize)> = vec![(r, usize::MAX, 0)];
            while let Some(&mut (u, pe, ref mut i)) = stack.last_mut() {
                if *i < self.adj[u].len() {
                    let (w, e) = self.adj[u][*i];
                    *i += 1;
                    if e == pe {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        edge_stack.push(e);
                        disc[w] = time;
                        low[w] = time;
                        time += 1;
                        stack.push((w, e, 0));
                    } else if disc[w] < disc[u] {
                        edge_stack.push(e);
                        low[u] = low[u].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[u]);
                        if low[u] >= disc[p] {
                            let mut block = Vec::new();
                            while let Some(e) = edge_stack.pop() {
                                block.push(e);
                                if e == pe {
                                    break;
                                }
                            }
                            blocks.push(block);
                        }
                    }
                }
            }
        }
        blocks
    }
}

/// Orders a simple cycle given by its vertices so that it starts at the
/// lowest vertex and heads to the lower of its two neighbors.
fn canonical_cycle(mut cycle: Vec<usize>) -> Vec<usize> {
    let k = cycle.len();
    let (i, _) = cycle.iter().enumerate().min_by_key(|&(_, &v)| v).unwrap();
    cycle.rotate_left(i);
    if k > 2 && cycle[k - 1] < cycle[1] {
        cycle[1..].reverse();
    }
    cycle
}

/// Rotates a simple cycle to start at `v`, heading to its lower neighbor.
fn cycle_from(mut cycle: Vec<usize>, v: usize) -> Vec<usize> {
    let k = cycle.len();
    let i = cycle.iter().position(|&w| w == v).unwrap();
    cycle.rotate_left(i);
    if cycle[k - 1] < cycle[1] {
        cycle[1..].reverse();
    }
    cycle
}

/// Vertex sequence of a block that is a simple cycle.
fn cycle_of_block(inst: &Instance, block: &[usize]) -> Vec<usize> {
    let mut adj: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &e in block {
        let (u, v) = inst.graph().endpoints(e);
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let start = *adj.keys().next().unwrap();
    let mut seq = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let next = *adj[&cur].iter().find(|&&w| w != prev).unwrap();
        if next == start {
            break;
        }
        seq.push(next);
        prev = cur;
        cur = next;
    }
    canonical_cycle(seq)
}

/// An even simple cycle inside a biconnected block that is not a cycle:
/// take any cycle and an ear between two of its vertices; among the
/// cycle and the two cycles formed with the ear, one is even.
fn even_cycle_in_block(inst: &Instance, block: &[usize]) -> Vec<usize> {
    use std::collections::{BTreeMap, BTreeSet, HashSet};
    let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &e in block {
        let (u, v) = inst.graph().endpoints(e);
        adj.entry(u).or_default().push((v, e));
        adj.entry(v).or_default().push((u, e));
    }
    for list in adj.values_mut() {
        list.sort_unstable();
    }
    // Any cycle: walk a DFS until the first back edge.
    let start = *adj.keys().next().unwrap();
    let mut parent: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut depth: BTreeMap<usize, usize> = BTreeMap::from([(start, 0)]);
    let mut stack = vec![(start, usize::MAX, 0usize)];
    let mut cycle = Vec::new();
    'dfs: while let Some(&mut (u, pe, ref mut i)) = stack.last_mut() {
        if *i == adj[&u].len() {
            stack.pop();
            continue;
        }
        let (w, e) = adj[&u][*i];
        *i += 1;
        if e == pe {
            continue;
        }
        match depth.get(&w) {
            None => {
                depth.insert(w, depth[&u] + 1);
                parent.insert(w, (u, e));
                stack.push((w, e, 0));
            }
            Some(_) => {
                let mut v = u;
                cycle.push(v);
                while v != w {
                    v = parent[&v].0;
                    cycle.push(v);
                }
                break 'dfs;
            }
        }
    }
    if cycle.len() % 2 == 0 {
        return canonical_cycle(cycle);
    }
    let k = cycle.len();
    let on_cycle: BTreeMap<usize, usize> = cycle.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let cycle_edges: HashSet<(usize, usize)> = (0..k)
        .map(|i| {
            let (a, b) = (cycle[i], cycle[(i + 1) % k]);
            (a.min(b), a.max(b))
        })
        .collect();
    let is_cycle_edge = |a: usize, b: usize| cycle_edges.contains(&(a.min(b), a.max(b)));
    for &a in &cycle {
        for &(w, _) in &adj[&a] {
            if is_cycle_edge(a, w) {
                continue;
            }
            // Breadth-first search from w avoiding cycle vertices until a
            // cycle vertex other than a is adjacent.
            let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
            let mut seen: BTreeSet<usize> = BTreeSet::from([w]);
            let mut queue = VecDeque::from([w]);
            let mut hit = None;
            if on_cycle.contains_key(&w) {
                hit = Some((w, w));
            }
            while hit.is_none() {
                let Some(u) = queue.pop_front() else { break };
                for &(z, _) in &adj[&u] {
                    if on_cycle.contains_key(&z) {
                        if z != a {
                            hit = Some((u, z));
                            break;
                        }
                    } else if seen.insert(z) {
                        prev.insert(z, u);
                        queue.push_back(z);
                    }
                }
            }
            let Some((last, b)) = hit else { continue };
            let mut inner = Vec::new();
            if last != b {
                let mut u = last;
                inner.push(u);
                while u != w {
                    u = prev[&u];
                    inner.push(u);
                }
                inner.reverse();
            }
            // Close the ear a, inner..., b through one of the two cycle arcs:
            // `forward` runs from a towards b, `backward` from b towards a.
            let (i, j) = (on_cycle[&a], on_cycle[&b]);
            let forward: Vec<usize> = (1..).map(|t| cycle[(i + t) % k]).take_while(|&v| v != b).collect();
            let backward: Vec<usize> = (1..).map(|t| cycle[(j + t) % k]).take_while(|&v| v != a).collect();
            let mut seq = vec![a];
            seq.extend(&inner);
            seq.push(b);
            if (inner.len() + 1 + forward.len() + 1).is_multiple_of(2) {
                seq.extend(forward.iter().rev());
            } else {
                seq.extend(&backward);
            }
            return canonical_cycle(seq);
        }
    }
    unreachable!("a biconnected block with more edges than vertices has an ear")
}

/// Adds +1, -1, +1, ... along a closed trail given by its vertex sequence.
fn alternate(inst: &Instance, x2: &mut [u64], trail: &[usize]) {
    let k = trail.len();
    for i in 0..k {
        let e = inst.graph().find_edge(trail[i], trail[(i + 1) % k]).expect("trail edge");
        if i % 2 == 0 {
            x2[e] += 1;
        } else {
            x2[e] -= 1;
        }
    }
}

/// One pass of even-trail elimination; returns how many trails were
/// flipped. Blocks are edge-disjoint, so one trail per block can be
/// removed per pass. Two odd cycles meeting at a vertex are flipped as a
/// single even closed trail, but only when no block held an even cycle.
fn eliminate_even_trails(inst: &Instance, x2: &mut [u64]) -> u64 {
    let h = OddGraph::new(inst, x2);
    let blocks = h.blocks();
    let mut flipped = 0;
    let mut odd_cycles: Vec<Vec<usize>> = Vec::new();
    for block in &blocks {
        if block.len() < 3 {
            continue;
        }
        let mut verts: Vec<usize> = block
            .iter()
            .flat_map(|&e| {
                let (u, v) = inst.graph().endpoints(e);
                [u, v]
            })
            .collect();
        verts.sort_unstable();
        verts.dedup();
        if block.len() > verts.len() {
            let c = even_cycle_in_block(inst, block);
            alternate(inst, x2, &c);
            flipped += 1;
        } else {
            let c = cycle_of_block(inst, block);
            if c.len().is_multiple_of(2) {
                alternate(inst, x2, &c);
                flipped += 1;
            } else {
                odd_cycles.push(c);
            }
        }
    }
    if flipped > 0 {
        return flipped;
    }
    let mut owner: Vec<Option<usize>> = vec![None; inst.vertex_count()];
    let mut used = vec![false; odd_cycles.len()];
    for ci in 0..odd_cycles.len() {
        for &v in &odd_cycles[ci] {
            match owner[v] {
                Some(cj) if !used[ci] && !used[cj] => {
                    let mut trail = cycle_from(odd_cycles[cj].clone(), v);
                    trail.extend(cycle_from(odd_cycles[ci].clone(), v));
                    alternate(inst, x2, &trail);
                    used[ci] = true;
                    used[cj] = true;
                    flipped += 1;
                }
                None => owner[v] = Some(ci),
                _ => {}
            }
        }
    }
    flipped
}

/// Rounds half-integral multiplicities to an H-matching without raising any
/// degree: flip even closed trails of odd edges, then take alternate edges
/// of each remaining (vertex-disjoint, odd) cycle, then drop what is left.
pub fn round(inst: &Instance, half: &HalfIntegral) -> (HMatching, RoundStats) {
    let mut x2 = half.x2.clone();
    let mut stats = RoundStats::default();
    loop {
        let flipped = eliminate_even_trails(inst, &mut x2);
        if flipped == 0 {
            break;
        }
        stats.even_trails += flipped;
    }
    let h = OddGraph::new(inst, &x2);
    for block in h.blocks() {
        if block.len() < 3 {
            continue;
        }
        let c = cycle_of_block(inst, &block);
        debug_assert!(c.len() % 2 == 1);
        let k = c.len();
        for i in 0..k {
            let e = inst.graph().find_edge(c[i], c[(i + 1) % k]).expect("cycle edge");
            if i % 2 == 1 {
                x2[e] += 1;
            } else {
                x2[e] -= 1;
            }
        }
        stats.odd_cycles += 1;
    }
    for v in x2.iter_mut() {
        if *v % 2 == 1 {
            *v -= 1;
            stats.forest_edges += 1;
        }
    }
    let x = HMatching::from_vec(x2.iter().map(|v| v / 2).collect());
    stats.loss_halves = half.halves() - 2 * x.cardinality();
    (x, stats)
}

/// Raises each edge, in order, as far as capacities and set slacks allow.
/// Sets containing both endpoints pay twice per unit.
pub fn greedy_fill(inst: &Instance, x: &HMatching) -> HMatching {
    let fam = inst.family();
    let mut y = x.clone();
    let mut slack: Vec<u64> = inst
        .set_degrees(x)
        .iter()
        .enumerate()
        .map(|(k, &d)| inst.bound(k) - d)
        .collect();
    for (e, &(u, v)) in inst.graph().edges().iter().enumerate() {
        let cu: Vec<usize> = fam.chain(u).collect();
        let cv: Vec<usize> = fam.chain(v).collect();
        let shared = cu.iter().rev().zip(cv.iter().rev()).take_while(|(a, b)| a == b).count();
        let (own_u, own_v, common) = (&cu[..cu.len() - shared], &cv[..cv.len() - shared], &cu[cu.len() - shared..]);
        let mut add = inst.capacity(e) - y.get(e);
        for &k in own_u.iter().chain(own_v) {
            add = add.min(slack[k]);
        }
        for &k in common {
            add = add.min(slack[k] / 2);
        }
        if add == 0 {
            continue;
        }
        for &k in own_u.iter().chain(own_v) {
            slack[k] -= add;
        }
        for &k in common {
            slack[k] -= 2 * add;
        }
        y.set(e, y.get(e) + add);
    }
    y
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearOptimal {
    pub x: HMatching,
    pub flow_value: u64,
    pub fractional: HalfIntegral,
    pub round: RoundStats,
}

/// Max flow, symmetrization and rounding in one go.
pub fn near_optimal(inst: &Instance) -> NearOptimal {
    let net = build_network(inst);
    let f = max_flow(&net);
    let flow_value = net.check_flow(&f).expect("max flow is feasible");
    let fractional = symmetrize(&net, &f);
    let (x, round) = round(inst, &fractional);
    NearOptimal {
        x,
        flow_value,
        fractional,
        round,
    }
}

/// `ceil(2n/3)`, the rounding loss bound in whole units.
pub fn gap_bound(n: usize) -> u64 {
    (2 * n as u64).div_ceil(3)
}
