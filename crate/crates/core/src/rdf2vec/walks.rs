use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Rdf2VecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    /// Maximum number of edges traversed per walk.
    pub max_depth: usize,
    /// Walks started at every node (an upper bound when `distinct`).
    pub walks_per_node: usize,
    pub seed: u64,
    /// Drop repeated walks from the same root.
    pub distinct: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { max_depth: 5, walks_per_node: 5, seed: 42, distinct: true }
    }
}

/// Node-index sequences, grouped by root in node order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<usize>>,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }
}

/// Uniform random walks over `neighbors` (no self-loops expected).
///
/// Every root gets its own generator, seeded from `seed` and the root
/// index, so the corpus does not depend on scheduling.
pub fn generate_walks(neighbors: &[Vec<usize>], cfg: &WalkConfig) -> Result<WalkCorpus, Rdf2VecError> {
    if cfg.max_depth == 0 || cfg.walks_per_node == 0 {
        return Err(Rdf2VecError::InvalidConfig("max_depth and walks_per_node must be >= 1".into()));
    }
    let per_root: Vec<Vec<Vec<usize>>> = (0..neighbors.len())
        .into_par_iter()
        .map(|root| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(root as u64);
            let mut walks: Vec<Vec<usize>> = Vec::with_capacity(cfg.walks_per_node);
            for _ in 0..cfg.walks_per_node {
                let mut walk = Vec::with_capacity(cfg.max_depth + 1);
                walk.push(root);
                let mut at = root;
                for _ in 0..cfg.max_depth {
                    let next = &neighbors[at];
                    if next.is_empty() {
                        break;
                    }
                    at = next[rng.gen_range(0..next.len())];
                    walk.push(at);
                }
                if !(cfg.distinct && walks.contains(&walk)) {
                    walks.push(walk);
                }
            }
            walks
        })
        .collect();
    Ok(WalkCorpus { walks: per_root.into_iter().flatten().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_node_walks_are_the_root() {
        let cfg = WalkConfig { distinct: false, ..WalkConfig::default() };
        let c = generate_walks(&[vec![]], &cfg).unwrap();
        assert_eq!(c.walks, vec![vec![0]; 5]);
        let c = generate_walks(&[vec![]], &WalkConfig::default()).unwrap();
        assert_eq!(c.walks, vec![vec![0]]);
    }

    #[test]
    fn forced_move() {
        let cfg = WalkConfig { max_depth: 1, distinct: false, ..WalkConfig::default() };
        let c = generate_walks(&[vec![1], vec![0]], &cfg).unwrap();
        assert!(c.walks.iter().filter(|w| w[0] == 0).all(|w| w == &[0, 1]));
        assert_eq!(c.len(), 10);
    }

    #[test]
    fn invalid_config() {
        let cfg = WalkConfig { max_depth: 0, ..WalkConfig::default() };
        assert!(generate_walks(&[vec![]], &cfg).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let adj = vec![vec![1, 2], vec![0, 2], vec![0, 1, 3], vec![2]];
        let cfg = WalkConfig { walks_per_node: 20, ..WalkConfig::default() };
        let a = generate_walks(&adj, &cfg).unwrap();
        assert_eq!(a, generate_walks(&adj, &cfg).unwrap());
        let other = generate_walks(&adj, &WalkConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a, other);
        for w in &a.walks {
            assert!(w.len() <= cfg.max_depth + 1);
            for pair in w.windows(2) {
                assert!(adj[pair[0]].contains(&pair[1]));
            }
        }
    }
}
