//! Shared fixtures for unit tests: the recurring two-route instance and a
//! three-route instance whose first two routes tie exactly on the
//! free-vs-saturated boundary.

use crate::equilibrium::GameInstance;
use crate::fundamental::{Link, LinkParams, ParallelNetwork, Route};

pub fn link(capacity: f64, jam_density: f64, free_speed: f64, length: f64) -> Link {
    Link::new(LinkParams {
        capacity,
        jam_density,
        free_speed,
        length,
    })
    .unwrap()
}

/// Lengths used when the two-route instance is analyzed for equilibria
/// (route 1 free-flow 3.75 min, saturated 11.25 min; route 2 at 12 min).
pub const EX2_LENGTHS: [f64; 7] = [1.0, 1.0, 0.5, 2.0, 2.0, 2.0, 2.0];

/// Lengths that stretch route 1 (free-flow 6.75 min, saturated 18 min) so
/// the equilibrium lands strictly inside the critical family.
pub const EX3_LENGTHS: [f64; 7] = [1.5, 1.5, 1.5, 2.0, 2.0, 2.0, 2.0];

/// The recurring two-route parallel instance: route 1 has capacities
/// (1500, 1500, 1000) — bottleneck on its last link — and route 2 has four
/// links all at capacity 1500. Every free speed is 40 km/h; jam densities
/// are 187.5 veh/km except the bottleneck's 100 veh/km.
pub fn example_network(lengths: [f64; 7]) -> ParallelNetwork {
    let route1 = Route::new(vec![
        link(1500.0, 187.5, 40.0, lengths[0]),
        link(1500.0, 187.5, 40.0, lengths[1]),
        link(1000.0, 100.0, 40.0, lengths[2]),
    ])
    .unwrap();
    let route2 = Route::new(vec![
        link(1500.0, 187.5, 40.0, lengths[3]),
        link(1500.0, 187.5, 40.0, lengths[4]),
        link(1500.0, 187.5, 40.0, lengths[5]),
        link(1500.0, 187.5, 40.0, lengths[6]),
    ])
    .unwrap();
    ParallelNetwork::new(vec![route1, route2]).unwrap()
}

pub fn example_game(lengths: [f64; 7], phi: f64) -> GameInstance {
    GameInstance::new(example_network(lengths), phi).unwrap()
}

/// Three-route instance engineered so route 2's free-flow time equals
/// route 1's saturated time exactly (0.1 h), putting the equilibrium on the
/// boundary family. Capacities 1000 / 1200 / 800; saturated times
/// 0.1 / 0.1625 / 0.2 h; free-flow times 0.0375 / 0.1 / 0.2 h.
pub fn boundary_network() -> ParallelNetwork {
    let route1 = Route::new(vec![
        link(1500.0, 187.5, 40.0, 1.0),
        link(1000.0, 100.0, 40.0, 0.5),
    ])
    .unwrap();
    let route2 = Route::new(vec![
        link(1500.0, 187.5, 40.0, 2.0),
        link(1200.0, 150.0, 40.0, 2.0),
    ])
    .unwrap();
    let route3 = Route::new(vec![link(800.0, 100.0, 40.0, 8.0)]).unwrap();
    ParallelNetwork::new(vec![route1, route2, route3]).unwrap()
}

pub fn boundary_game(phi: f64) -> GameInstance {
    GameInstance::new(boundary_network(), phi).unwrap()
}
