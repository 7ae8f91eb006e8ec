//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    /// Probability that any given vertex pair becomes an edge.
    pub density: f64,
    pub max_b: u64,
    pub max_c: u64,
    /// Levels of non-singleton sets below the root.
    pub depth: usize,
    /// Inclusive range for the number of parts a set is split into.
    pub branching: (usize, usize),
    /// Keep a random subset of at most this many edges.
    pub max_edges: Option<usize>,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n: 8,
            density: 0.3,
            max_b: 3,
            max_c: 2,
            depth: 3,
            branching: (2, 4),
            max_edges: None,
            seed: 0,
        }
    }
}

struct Builder<'a> {
    rng: ChaCha8Rng,
    cfg: &'a GeneratorConfig,
    vertex_b: Vec<u64>,
    sets: Vec<(Vec<usize>, u64)>,
}

impl Builder<'_> {
    /// Splits `members` into random parts, recursing until singletons or the
    /// depth budget runs out; returns the bound drawn for the set itself.
    fn split(&mut self, members: &mut [usize], depth: usize) -> u64 {
        if members.len() == 1 {
            return self.vertex_b[members[0]];
        }
        let (lo, hi) = self.cfg.branching;
        let parts = if depth == 0 {
            members.len()
        } else {
            self.rng.gen_range(lo.max(2)..=hi.max(2)).min(members.len())
        };
        members.shuffle(&mut self.rng);
        let mut cuts: Vec<usize> = (1..members.len()).collect();
        cuts.shuffle(&mut self.rng);
        cuts.truncate(parts - 1);
        cuts.sort_unstable();
        cuts.push(members.len());
        let (mut lo_b, mut sum_b, mut start) = (0, 0, 0);
        for end in cuts {
            let part = &mut members[start..end];
            let b = self.split(part, depth.saturating_sub(1));
            if part.len() > 1 {
                let mut set = part.to_vec();
                set.sort_unstable();
                self.sets.push((set, b));
            }
            lo_b = lo_b.max(b);
            sum_b += b;
            start = end;
        }
        self.rng.gen_range(lo_b..=sum_b)
    }
}

/// Draws an instance. The family comes from a recursive random partition of
/// the vertices (every non-singleton set has at least two children), bounds
/// are drawn bottom-up between the largest and the sum of the children's,
/// and the result is normalized.
pub fn generate(cfg: &GeneratorConfig) -> Instance {
    assert!(cfg.n >= 1, "generator needs at least one vertex");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_b = cfg.max_b.max(1);
    let vertex_b: Vec<u64> = (0..cfg.n).map(|_| rng.gen_range(1..=max_b)).collect();
    let mut edges = Vec::new();
    for u in 0..cfg.n {
        for v in u + 1..cfg.n {
            if rng.gen_bool(cfg.density.clamp(0.0, 1.0)) {
                edges.push((u, v, rng.gen_range(1..=cfg.max_c.max(1))));
            }
        }
    }
    if let Some(cap) = cfg.max_edges {
        if edges.len() > cap {
            edges.shuffle(&mut rng);
            edges.truncate(cap);
        }
    }
    let mut b = Builder {
        rng,
        cfg,
        vertex_b,
        sets: Vec::new(),
    };
    let mut all: Vec<usize> = (0..cfg.n).collect();
    let root_b = b.split(&mut all, cfg.depth);
    let root = (cfg.n > 1).then_some(root_b);
    Instance::from_parts(cfg.n, &edges, &b.vertex_b, &b.sets, root)
        .expect("generated parts form a valid instance")
        .normalized()
}
