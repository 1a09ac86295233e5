//! Fixed instances for the criterion benchmarks.

use mapfe::bench::{gen_instance, InstanceSpec};
use mapfe::Instance;

/// A random 8x8, two-floor instance with three elevators.
pub fn warehouse(agents: usize, t_floor: u32, seed: u64) -> Instance {
    let spec = InstanceSpec { width: 8, height: 8, obstacle_rate: 0.1, floors: 2, elevators: 3, t_floor, agents };
    gen_instance(&spec, seed).expect("fixture parameters are valid")
}

/// Instances that every variant solves in well under a second, keyed by a
/// short label.
pub fn suite() -> Vec<(String, Instance)> {
    [(4, 1), (6, 8), (8, 1)]
        .into_iter()
        .map(|(n, seed)| (format!("n{n}-s{seed}"), warehouse(n, 3, seed)))
        .collect()
}
