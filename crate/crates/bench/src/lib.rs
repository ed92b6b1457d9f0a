//! Benchmark fixtures shared by the criterion targets.

use apsn::cases::{diffusion_case, table3_case, Discretization};
use apsn::problem::BcMode;

/// Diffusion-limit problem at `ε = 1e-4` on the square mesh with
/// `nodes_per_side` nodes per side.
pub fn diffusion_fixture(nodes_per_side: usize) -> Discretization {
    diffusion_case(nodes_per_side, 1e-4, BcMode::WeakPenalty).expect("fixture builds")
}

/// Thick scattering slab, the slowest case for source iteration.
pub fn thick_slab_fixture() -> Discretization {
    table3_case(4).expect("fixture builds")
}
