//! Seeded generators for Java methods, mutated method pairs and small Git
//! repositories. Used by the test suites.

pub mod fixtures;
pub mod gen;
pub mod model;
pub mod mutate;
pub mod repo;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use model::{render_class, Case, Expr, Method, Stmt};
pub use mutate::Mutation;
pub use repo::{synthetic_history, RepoBuilder};

/// A random method and a copy mutated one to three times, as source text,
/// with the mutations applied in order.
pub fn random_pair(seed: u64) -> (String, String, Vec<Mutation>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pre = gen::method(&mut rng, "subject");
    let mut post = pre.clone();
    let mut applied = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let (next, kind) = mutate::mutate(&post, 0.7, &mut rng);
        post = next;
        applied.push(kind);
    }
    (pre.render(), post.render(), applied)
}
