//! Test support: brute-force oracles, bundled fixtures, seeded generators.

pub mod dataset;
pub mod fixtures;
pub mod kg;
pub mod mutate;
pub mod records;
pub mod responder;
pub mod ted;
pub mod trees;
pub mod world;

pub use fixtures::{data_dir, fixture_schema, fixture_schemas, fixture_texts, fixtures_dir};
pub use kg::{CountingTransport, EndpointRouter, SyntheticEndpoint, SyntheticKg};
pub use dataset::separable_dataset;
pub use mutate::{drop_constraints, mutate_schema, Mutated};
pub use ted::brute_force_ted;
pub use records::{organizer_record, record};
pub use responder::SyntheticResponder;
pub use trees::random_tree;
pub use world::{kind_of, synthesize_world, synthesize_worlds, WorldParams};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
