//! Seeded inputs shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qws::loop_sl::random_mcell;
use qws::{CoxeterData, LatticeConnection, LoopMatrix, MiuraData, RootSystem};

pub const SEED: u64 = 0x9e37;

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

pub fn coxeter(label: &str) -> CoxeterData {
    CoxeterData::new(&RootSystem::from_label(label).expect("known label"))
}

pub fn cell_point(n: usize) -> LoopMatrix {
    random_mcell(&mut rng(), n, -1, 1)
}

pub fn miura_data(n: usize) -> MiuraData {
    MiuraData::random(&mut rng(), n, -2, 2, 8)
}

pub fn lattice_point(n: usize, len: usize) -> LatticeConnection {
    LatticeConnection::random_sl(&mut rng(), n, len)
}
