//! Maximum hierarchical b-matching.
//!
//! Given a graph, a laminar family of vertex sets with degree-sum bounds and
//! per-edge multiplicity capacities, find a largest multiset of edges that
//! respects every bound. The main pipeline rounds a max-flow relaxation and
//! then repairs the gap with augmenting paths in a compact gadget graph;
//! a pseudo-polynomial matching reduction and an exhaustive search serve as
//! cross-checks.

pub mod augment;
pub mod blossom;
pub mod family;
pub mod flow;
pub mod generate;
pub mod instance;
pub mod oracle;
pub mod repr;
pub mod solver;

pub use family::{validate_family, FamilyError, LaminarFamily, SetOrigin};
pub use generate::{generate, GeneratorConfig};
pub use instance::{Graph, HMatching, Instance, InstanceError, Violation};
pub use solver::{solve, verify_certificate, Algorithm, Certificate, Counters, SolveError, SolveOptions, SolveReport};

#[cfg(test)]
pub(crate) mod test_support {
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use crate::{generate, GeneratorConfig, Instance};

    pub fn random_instance(rng: &mut ChaCha8Rng, n: std::ops::RangeInclusive<usize>, density: f64, max_b: u64, max_c: u64) -> Instance {
        let n = rng.gen_range(n);
        generate(&GeneratorConfig {
            n,
            density,
            max_b,
            max_c,
            depth: rng.gen_range(0..=3),
            branching: (2, 3),
            max_edges: None,
            seed: rng.gen(),
        })
    }
}
