//! Wardrop equilibria, social optima, and the price of anarchy for routing
//! games on parallel networks of capacitated routes.
//!
//! With routes sorted by free-flow time and an exogenous flow `phi`, the
//! equilibrium structure is governed by a handful of indices: the shortest
//! prefix of routes whose capacities cover `phi`, the set of routes whose
//! saturated time is undercut by a slower route's free-flow time, and the
//! first such undercutting route. Depending on how the comparison falls,
//! the equilibrium either transfers all demand, drops a positive remainder
//! at the origin of one saturated route, or forms a one-parameter family
//! sweeping between those behaviours.

use crate::assignment::{
    classify, consistent_density, RouteClass, RoutingVector, TrafficAssignment,
};
use crate::error::{Error, Result};
use crate::fundamental::{Flow, Hours, ParallelNetwork};
use crate::traveltime::{route_travel_time, tau_inverse, InverseMode};
use crate::{num, REL_TOL};

/// A routing game: a parallel network and a positive exogenous flow not
/// exceeding the network's total capacity.
#[derive(Debug, Clone)]
pub struct GameInstance {
    network: ParallelNetwork,
    phi: Flow,
}

impl GameInstance {
    pub fn new(network: ParallelNetwork, phi: Flow) -> Result<Self> {
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::NonPositiveInflow { phi });
        }
        let min_cut = network.min_cut_capacity();
        if !num::le(phi, min_cut, REL_TOL) {
            return Err(Error::InflowExceedsThroughput { phi, min_cut });
        }
        Ok(GameInstance { network, phi })
    }

    pub fn network(&self) -> &ParallelNetwork {
        &self.network
    }

    pub fn phi(&self) -> Flow {
        self.phi
    }
}

/// The structural indices of a game. Route indices are 0-based positions
/// in the network's sorted route order; `k` is a 1-based count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumIndices {
    /// Length of the shortest route prefix whose capacities cover `phi`.
    pub k: usize,
    /// Routes whose saturated time is matched or beaten by the free-flow
    /// time of some strictly later route within the prefix.
    pub u_set: Vec<usize>,
    /// The member of `u_set` with the smallest saturated time.
    pub u: Option<usize>,
    /// The first route after `u` whose free-flow time matches or beats
    /// `u`'s saturated time.
    pub j: Option<usize>,
}

/// Computes the structural indices of a game.
pub fn indices(game: &GameInstance) -> EquilibriumIndices {
    let net = game.network();
    let phi = game.phi();
    let mut cumulative = 0.0;
    let mut k = net.len();
    for (p, route) in net.routes().iter().enumerate() {
        cumulative += route.capacity();
        if num::le(phi, cumulative, REL_TOL) {
            k = p + 1;
            break;
        }
    }
    let mut u_set = Vec::new();
    for p in 0..k {
        let saturated = net.route(p).saturated_time();
        let undercut =
            (p + 1..k).any(|q| num::le(saturated, net.route(q).free_flow_time(), REL_TOL));
        if undercut {
            u_set.push(p);
        }
    }
    let u = u_set.iter().copied().min_by(|&a, &b| {
        net.route(a)
            .saturated_time()
            .partial_cmp(&net.route(b).saturated_time())
            .unwrap()
    });
    let j = u.map(|u| {
        let saturated = net.route(u).saturated_time();
        (u + 1..k)
            .find(|&q| num::le(saturated, net.route(q).free_flow_time(), REL_TOL))
            .expect("membership in u_set guarantees a witness")
    });
    EquilibriumIndices { k, u_set, u, j }
}

/// The qualitative shape of a Wardrop equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WardropKind {
    /// All exogenous flow enters the network.
    FullyTransferring,
    /// A unique equilibrium in which one route is saturated and a positive
    /// remainder never enters the network.
    PartiallyTransferring,
    /// A one-parameter family of equilibria trading inflow on the
    /// saturated route against the last used route.
    Family,
}

impl WardropKind {
    pub fn tag(self) -> &'static str {
        match self {
            WardropKind::FullyTransferring => "fully-transferring",
            WardropKind::PartiallyTransferring => "partially-transferring",
            WardropKind::Family => "family",
        }
    }
}

impl std::fmt::Display for WardropKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A Wardrop equilibrium (its representative, for family kinds).
#[derive(Debug, Clone)]
pub struct WardropSolution {
    pub kind: WardropKind,
    /// Representative routing vector. For `Family` this is the member with
    /// the least inflow on the saturated route (least non-transferred
    /// demand).
    pub routing: RoutingVector,
    /// Concrete consistent densities realizing the representative.
    pub assignment: TrafficAssignment,
    /// The common travel time of used routes, in hours.
    pub common_time: Hours,
    /// Non-transferred demand of the representative, veh/h.
    pub psi: Flow,
    /// Range of non-transferred demand across all equilibria of the game.
    pub psi_range: (Flow, Flow),
    /// For `Family`: the admissible inflow range of the saturated route.
    pub saturated_inflow_range: Option<(Flow, Flow)>,
    pub indices: EquilibriumIndices,
    /// Per-route `achieved - target` travel-time residuals of the density
    /// inversion (zero where no inversion was needed).
    pub residuals: Vec<Hours>,
}

/// Computes the Wardrop equilibrium of a game.
///
/// Used routes share a common travel time no unused route can beat; routes
/// are filled in free-flow order. When some route's saturated time is still
/// competitive against later routes' free-flow times, demand beyond that
/// route's capacity piles up at its origin instead of entering, and the
/// equilibrium partially transfers.
pub fn wardrop(game: &GameInstance) -> Result<WardropSolution> {
    let net = game.network();
    let phi = game.phi();
    let idx = indices(game);
    let k = idx.k;
    let caps: Vec<Flow> = net.routes().iter().map(|r| r.capacity()).collect();

    let (kind, nominal, common_time, saturated_inflow_range) = match (idx.u, idx.j) {
        (None, _) | (_, None) => {
            // every route in the prefix outruns its own congestion: fill the
            // first k-1 routes to capacity, the rest of phi on route k
            let mut nominal = vec![0.0; net.len()];
            for p in 0..k - 1 {
                nominal[p] = caps[p];
            }
            nominal[k - 1] = phi - caps[..k - 1].iter().sum::<f64>();
            let t = net.route(k - 1).free_flow_time();
            (WardropKind::FullyTransferring, nominal, t, None)
        }
        (Some(u), Some(j)) => {
            let t = net.route(u).saturated_time();
            let others: f64 = (0..j).filter(|&p| p != u).map(|p| caps[p]).sum();
            let hi = phi - others;
            if num::close(net.route(j).free_flow_time(), t, REL_TOL) {
                // the undercutting route ties exactly: a family, swept by
                // the inflow a on route u, with route j taking hi - a
                let lo = caps[u].max(hi - caps[j]);
                let mut nominal = vec![0.0; net.len()];
                for p in 0..j {
                    nominal[p] = caps[p];
                }
                nominal[u] = lo;
                nominal[j] = hi - lo;
                (WardropKind::Family, nominal, t, Some((lo, hi)))
            } else {
                // route j is strictly slower: everything beyond the first
                // j routes queues at route u's origin
                let mut nominal = vec![0.0; net.len()];
                for p in 0..j {
                    nominal[p] = caps[p];
                }
                nominal[u] = hi;
                (WardropKind::PartiallyTransferring, nominal, t, None)
            }
        }
    };

    let shares: Vec<f64> = nominal.iter().map(|&n| n / phi).collect();
    let routing = RoutingVector::new(shares)?;

    let family = consistent_density(net, phi, &routing)?;
    let mut densities = Vec::with_capacity(net.len());
    let mut residuals = vec![0.0; net.len()];
    for (p, route) in net.routes().iter().enumerate() {
        match classify(route, nominal[p]) {
            RouteClass::Critical => {
                // a critical route can realize any time between free-flow
                // and fully congested; pick the member matching t
                let (x, residual) = tau_inverse(route, common_time, InverseMode::Nearest)?;
                residuals[p] = residual;
                densities.push(x);
            }
            _ => densities.push(family.per_route[p].canonical().to_vec()),
        }
    }
    let assignment = TrafficAssignment::new(net, phi, routing.clone(), densities)?;
    let psi = assignment.psi();
    let psi_range = psi_bounds_from(net, phi, &idx);

    Ok(WardropSolution {
        kind,
        routing,
        assignment,
        common_time,
        psi,
        psi_range,
        saturated_inflow_range,
        indices: idx,
        residuals,
    })
}

/// Range of non-transferred demand across all Wardrop equilibria of the
/// game (a point for the unique kinds).
pub fn psi_bounds(game: &GameInstance) -> (Flow, Flow) {
    psi_bounds_from(game.network(), game.phi(), &indices(game))
}

fn psi_bounds_from(net: &ParallelNetwork, phi: Flow, idx: &EquilibriumIndices) -> (Flow, Flow) {
    let caps: Vec<Flow> = net.routes().iter().map(|r| r.capacity()).collect();
    let Some(u) = idx.u else {
        return (0.0, 0.0);
    };
    let j = idx.j.expect("u and j are defined together");
    let t = net.route(u).saturated_time();
    let upper = (phi - caps[..j].iter().sum::<f64>()).max(0.0);
    if num::close(net.route(j).free_flow_time(), t, REL_TOL) {
        let lower = (phi - caps[..=j].iter().sum::<f64>()).max(0.0);
        (lower, upper)
    } else {
        (upper, upper)
    }
}

/// Diagnostic outcome of checking a concrete assignment against the
/// equilibrium conditions.
#[derive(Debug, Clone)]
pub struct WardropCheck {
    /// Whether no user can improve their time by more than `eps` hours.
    pub holds: bool,
    /// Largest travel time among used routes.
    pub common_time: Option<Hours>,
    /// Largest improvement available to any user, in hours (zero when the
    /// assignment is an equilibrium).
    pub worst_violation: Hours,
    /// Structural observations (equilibria of these games use a prefix of
    /// the routes and fill earlier routes to capacity first).
    pub notes: Vec<String>,
}

/// Checks whether a concrete assignment satisfies the equilibrium
/// conditions within `eps` hours: used routes share a common travel time
/// and no route (at its given densities) is faster.
pub fn is_wardrop(
    game: &GameInstance,
    assignment: &TrafficAssignment,
    eps: Hours,
) -> Result<WardropCheck> {
    let net = game.network();
    if assignment.routing().len() != net.len() {
        return Err(Error::ShareCountMismatch {
            expected: net.len(),
            got: assignment.routing().len(),
        });
    }
    let mut times = Vec::with_capacity(net.len());
    for (p, route) in net.routes().iter().enumerate() {
        times.push(route_travel_time(
            route,
            &assignment.densities()[p],
            assignment.realized()[p],
        )?);
    }
    let used: Vec<usize> = assignment.routing().support();
    let max_used = used
        .iter()
        .map(|&p| times[p])
        .fold(f64::NEG_INFINITY, f64::max);
    let min_all = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst_violation = if used.is_empty() {
        0.0
    } else {
        (max_used - min_all).max(0.0)
    };
    let holds = worst_violation <= eps;

    let mut notes = Vec::new();
    if let Some(&last_used) = used.last() {
        if used.len() != last_used + 1 {
            notes.push(format!(
                "support {{{}}} is not a prefix of the route order",
                used.iter()
                    .map(|p| (p + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        let phi = game.phi();
        for &p in &used {
            for q in 0..p {
                let inflow = phi * assignment.routing().get(q);
                let cap = net.route(q).capacity();
                if !num::le(cap, inflow, REL_TOL) {
                    notes.push(format!(
                        "route {} is used while route {} is below capacity ({inflow:.6} < {cap:.6} veh/h)",
                        p + 1,
                        q + 1,
                    ));
                }
            }
        }
    }

    Ok(WardropCheck {
        holds,
        common_time: if used.is_empty() {
            None
        } else {
            Some(max_used)
        },
        worst_violation,
        notes,
    })
}

/// The system-optimal assignment of a game.
#[derive(Debug, Clone)]
pub struct SocialOptimum {
    pub routing: RoutingVector,
    pub assignment: TrafficAssignment,
    /// Total travel cost, veh·h.
    pub cost: f64,
    /// Per-route travel times at the optimum, hours.
    pub route_times: Vec<Hours>,
}

/// Computes the social optimum: fill routes to capacity in free-flow
/// order, keep every link free-flowing. All demand enters the network and
/// the total cost is the free-flow cost of the filled prefix.
pub fn social_optimum(game: &GameInstance) -> Result<SocialOptimum> {
    let net = game.network();
    let phi = game.phi();
    let k = indices(game).k;
    let mut nominal = vec![0.0; net.len()];
    for p in 0..k - 1 {
        nominal[p] = net.route(p).capacity();
    }
    nominal[k - 1] = phi - nominal[..k - 1].iter().sum::<f64>();
    let routing = RoutingVector::new(nominal.iter().map(|&n| n / phi).collect())?;
    let densities: Vec<Vec<f64>> = net
        .routes()
        .iter()
        .zip(&nominal)
        .map(|(route, &n)| route.links().iter().map(|l| l.free_density(n)).collect())
        .collect();
    let assignment = TrafficAssignment::new(net, phi, routing.clone(), densities)?;
    let route_times: Vec<Hours> = net.routes().iter().map(|r| r.free_flow_time()).collect();
    let cost = nominal.iter().zip(&route_times).map(|(n, t)| n * t).sum();
    Ok(SocialOptimum {
        routing,
        assignment,
        cost,
        route_times,
    })
}

/// The price of anarchy, when the equilibrium cost is well defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceOfAnarchy {
    /// Equilibrium cost over optimal cost.
    Defined(f64),
    /// The representative equilibrium leaves demand outside the network;
    /// the cost of the queued demand is unbounded and the ratio undefined.
    UndefinedPartialTransfer { psi: Flow },
}

/// Computes the price of anarchy of a game: the ratio of the equilibrium
/// travel cost to the optimal travel cost, or an undefined marker when the
/// equilibrium does not transfer all demand.
pub fn price_of_anarchy(game: &GameInstance) -> Result<PriceOfAnarchy> {
    let we = wardrop(game)?;
    if we.psi > REL_TOL * game.phi() {
        return Ok(PriceOfAnarchy::UndefinedPartialTransfer { psi: we.psi });
    }
    let optimum = social_optimum(game)?;
    let net = game.network();
    let mut we_cost = 0.0;
    for (p, route) in net.routes().iter().enumerate() {
        let flow = we.assignment.realized()[p];
        if flow > 0.0 {
            we_cost += flow * route_travel_time(route, &we.assignment.densities()[p], flow)?;
        }
    }
    Ok(PriceOfAnarchy::Defined(we_cost / optimum.cost))
}

/// Result of the brute-force equilibrium search on a share grid.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    /// Grid points satisfying the equilibrium conditions within `eps`.
    pub survivors: Vec<RoutingVector>,
    pub grid_denominator: u32,
    /// Set when no grid point survives (the equilibrium lies off-grid).
    pub warning: Option<String>,
}

/// Brute-force equilibrium search, independent of the closed-form
/// construction: enumerates all routing vectors with shares in multiples
/// of `1/denominator` and keeps those admitting a consistent state that
/// satisfies the equilibrium conditions within `eps` hours.
///
/// A grid point survives when some member of its consistent-density family
/// equalizes the used routes' times (free routes pin their free-flow time,
/// saturated routes their saturated time, critical routes may realize
/// anything in between) without any route being faster. Supported for up
/// to 4 routes.
pub fn oracle_wardrop(game: &GameInstance, denominator: u32, eps: Hours) -> Result<OracleOutcome> {
    const MAX_ROUTES: usize = 4;
    let net = game.network();
    if net.len() > MAX_ROUTES {
        return Err(Error::TooManyRoutes {
            count: net.len(),
            limit: MAX_ROUTES,
        });
    }
    if denominator == 0 {
        return Err(Error::BadResolution {
            resolution: format!("1/{denominator}"),
        });
    }
    let phi = game.phi();
    let mut survivors = Vec::new();
    let mut counts = vec![0u32; net.len()];
    enumerate_compositions(denominator, 0, &mut counts, &mut |counts| {
        let shares: Vec<f64> = counts
            .iter()
            .map(|&c| c as f64 / denominator as f64)
            .collect();
        if grid_point_survives(net, phi, &shares, eps) {
            survivors.push(RoutingVector::new(shares).expect("grid shares sum to one"));
        }
    });
    let warning = if survivors.is_empty() {
        Some(format!(
            "no routing vector on the 1/{denominator} grid satisfies the equilibrium conditions within {eps} h"
        ))
    } else {
        None
    };
    Ok(OracleOutcome {
        survivors,
        grid_denominator: denominator,
        warning,
    })
}

pub(crate) fn enumerate_compositions(
    remaining: u32,
    position: usize,
    counts: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32]),
) {
    if position == counts.len() - 1 {
        counts[position] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[position] = c;
        enumerate_compositions(remaining - c, position + 1, counts, visit);
    }
}

/// Whether a grid point admits an equilibrium member of its
/// consistent-density family, by scanning candidate common times.
fn grid_point_survives(net: &ParallelNetwork, phi: Flow, shares: &[f64], eps: Hours) -> bool {
    // per used route: the travel times its consistent states can realize
    let mut allowed: Vec<(usize, Hours, Hours)> = Vec::new();
    let mut min_unused_free = f64::INFINITY;
    for (p, route) in net.routes().iter().enumerate() {
        if shares[p] == 0.0 {
            min_unused_free = min_unused_free.min(route.free_flow_time());
            continue;
        }
        let (lo, hi) = match classify(route, phi * shares[p]) {
            RouteClass::FreeFlow => {
                let t = route.free_flow_time();
                (t, t)
            }
            RouteClass::Critical => (route.free_flow_time(), route.saturated_time()),
            RouteClass::Saturated => (route.saturated_time(), route.saturated_time()),
        };
        allowed.push((p, lo, hi));
    }
    if allowed.is_empty() {
        return false;
    }
    let mut candidates: Vec<Hours> = Vec::with_capacity(2 * allowed.len() + 1);
    for &(_, lo, hi) in &allowed {
        candidates.push(lo);
        candidates.push(hi);
    }
    if min_unused_free.is_finite() {
        candidates.push(min_unused_free);
    }
    let mut best = f64::INFINITY;
    for &t in &candidates {
        let realized: Vec<Hours> = allowed.iter().map(|&(_, lo, hi)| t.clamp(lo, hi)).collect();
        let max_used = realized.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_used = realized.iter().cloned().fold(f64::INFINITY, f64::min);
        let violation = (max_used - min_used.min(min_unused_free)).max(0.0);
        best = best.min(violation);
    }
    best <= eps
}

/// L-infinity distance from a routing vector to the solution set of a
/// game's equilibrium (the representative point, or the whole family
/// segment for family kinds).
pub fn solution_distance(solution: &WardropSolution, game: &GameInstance, point: &[f64]) -> f64 {
    let linf = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let rep = solution.routing.shares();
    let base = linf(rep, point);
    let (Some((lo, hi)), Some(u), Some(j)) = (
        solution.saturated_inflow_range,
        solution.indices.u,
        solution.indices.j,
    ) else {
        return base;
    };
    let phi = game.phi();
    // family member with inflow a on route u: shares differ from the
    // representative only on coordinates u and j
    let member_distance = |a: f64| {
        let mut m = rep.to_vec();
        m[u] = a / phi;
        m[j] = (hi - a) / phi;
        linf(&m, point)
    };
    let mut best = base;
    for a in [
        lo,
        hi,
        (phi * point[u]).clamp(lo, hi),
        (hi - phi * point[j]).clamp(lo, hi),
    ] {
        best = best.min(member_distance(a));
    }
    best
}
