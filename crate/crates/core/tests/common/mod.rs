//! Shared fixtures for the integration suites: the two bundled example
//! geometries and a seeded random-game generator with margin guards, so
//! closed-form branch selection and the brute-force oracle cannot disagree
//! merely because two quantities landed within rounding of each other.

#![allow(dead_code)]

use ctm_routing::equilibrium::GameInstance;
use ctm_routing::{Link, LinkParams, ParallelNetwork, Route};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn link(capacity: f64, jam_density: f64, free_speed: f64, length: f64) -> Link {
    Link::new(LinkParams {
        capacity,
        jam_density,
        free_speed,
        length,
    })
    .expect("fixture link parameters are valid")
}

/// Two-route network: a short route with a 1000 veh/h bottleneck on its
/// third link, and a long uniform route. `lengths` gives the seven link
/// lengths (route 1 first).
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

/// Link lengths of the short-first-route variant (free-flow times
/// 3.75 min vs 12 min).
pub const SHORT_LENGTHS: [f64; 7] = [1.0, 1.0, 0.5, 2.0, 2.0, 2.0, 2.0];

/// Link lengths of the lengthened-first-route variant (free-flow times
/// 6.75 min vs 12 min).
pub const LONG_LENGTHS: [f64; 7] = [1.5, 1.5, 1.5, 2.0, 2.0, 2.0, 2.0];

pub fn example_game(lengths: [f64; 7], phi: f64) -> GameInstance {
    GameInstance::new(example_network(lengths), phi).unwrap()
}

/// A deterministic generator of valid games.
///
/// Parameters come from coarse lattices (capacities as integer multiples
/// of a per-game unit, quarter-km lengths, a handful of speeds), and a
/// candidate is resampled whenever any two of the free-flow/saturated
/// route times, or the inflow and a cumulative capacity, fall suspiciously
/// close without being exactly equal. Half the games draw their inflow as
/// 200 capacity units, which puts every route's capacity share exactly on
/// a 1/200 grid.
pub fn random_game(rng: &mut ChaCha8Rng) -> GameInstance {
    loop {
        if let Some(game) = try_random_game(rng) {
            return game;
        }
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_link(rng: &mut ChaCha8Rng, capacity: f64) -> Link {
    let free_speed = *[30.0, 40.0, 50.0, 60.0].choose(rng).unwrap();
    let length = 0.25 * rng.random_range(2..=20) as f64;
    let ratio = *[2.0, 2.5, 3.0, 4.0].choose(rng).unwrap();
    link(capacity, ratio * capacity / free_speed, free_speed, length)
}

fn try_random_game(rng: &mut ChaCha8Rng) -> Option<GameInstance> {
    let unit: f64 = rng.random_range(5.0..15.0);
    let n_routes = rng.random_range(2..=3);
    let snapped = rng.random_bool(0.5);

    let mut routes = Vec::with_capacity(n_routes);
    for _ in 0..n_routes {
        let n_links = rng.random_range(1..=4);
        let bottleneck = rng.random_range(0..n_links);
        let base = rng.random_range(100..=300u32);
        let links: Vec<Link> = (0..n_links)
            .map(|l| {
                let extra = if l == bottleneck {
                    0
                } else {
                    rng.random_range(5..=100u32)
                };
                random_link(rng, unit * f64::from(base + extra))
            })
            .collect();
        routes.push(Route::new(links).ok()?);
    }
    let net = ParallelNetwork::new(routes).ok()?;

    // Margin guard on route times: all pairwise gaps among free-flow and
    // saturated times must either be exact ties (handled upstream) or
    // comfortably larger than every tolerance in play.
    let mut times = Vec::new();
    for p in 0..net.len() {
        times.push(net.route(p).free_flow_time());
        times.push(net.route(p).saturated_time());
    }
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let gap = (times[i] - times[j]).abs();
            let scale = times[i].abs().max(times[j].abs());
            if gap > 1e-12 * scale && gap < 1e-3 * scale {
                return None;
            }
        }
    }

    let min_cut = net.min_cut_capacity();
    let phi = if snapped {
        200.0 * unit
    } else {
        rng.random_range(0.15..0.995) * min_cut
    };
    if !(phi > 0.0) || phi > min_cut {
        return None;
    }
    // Same guard between the inflow and each cumulative capacity.
    let mut cum = 0.0;
    for p in 0..net.len() {
        cum += net.route(p).capacity();
        let gap = (phi - cum).abs();
        if gap > 1e-12 * phi && gap < 1e-4 * phi {
            return None;
        }
    }
    GameInstance::new(net, phi).ok()
}

/// A routing vector drawn uniformly-ish on the simplex, with some mass
/// zeroed out now and then; the last share absorbs rounding so the sum is
/// exactly one.
pub fn random_routing(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0_f64)).collect();
        if rng.random_bool(0.3) {
            let drop = rng.random_range(0..n);
            w[drop] = 0.0;
        }
        let sum: f64 = w.iter().sum();
        if sum < 1e-3 {
            continue;
        }
        for x in w.iter_mut() {
            *x /= sum;
        }
        let head: f64 = w[..n - 1].iter().sum();
        w[n - 1] = 1.0 - head;
        if w[n - 1] >= 0.0 {
            return w;
        }
    }
}

/// All share vectors with entries in multiples of `1/denominator`.
pub fn simplex_grid(n: usize, denominator: u32) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut counts = vec![0u32; n];
    fn rec(denominator: u32, pos: usize, counts: &mut Vec<u32>, out: &mut Vec<Vec<f64>>) {
        let used: u32 = counts[..pos].iter().sum();
        if pos + 1 == counts.len() {
            counts[pos] = denominator - used;
            out.push(
                counts
                    .iter()
                    .map(|&c| f64::from(c) / f64::from(denominator))
                    .collect(),
            );
            return;
        }
        for c in 0..=(denominator - used) {
            counts[pos] = c;
            rec(denominator, pos + 1, counts, out);
        }
    }
    rec(denominator, 0, &mut counts, &mut out);
    out
}
