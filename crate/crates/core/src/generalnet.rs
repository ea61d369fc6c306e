//! Routing games on general directed networks, solved numerically.
//!
//! Routes here may share links, so the closed-form machinery for parallel
//! networks does not apply. Instead, densities are tracked per (link,
//! route) commodity and evolved with a forward-Euler cell-transmission
//! update until they stop changing: link outflows follow the link's demand,
//! split across commodities in proportion to their share of the density,
//! and inflows are capped by the receiving link's supply, allocated in
//! proportion to what each sender offers. The origin offers each route its
//! nominal share of the exogenous flow; whatever the first links cannot
//! accept never enters the network.
//!
//! This module is experimental: steady states are found by simulation, and
//! equilibria by brute-force search over a grid of routing vectors.

use crate::assignment::RoutingVector;
use crate::equilibrium::enumerate_compositions;
use crate::error::{Error, Result};
use crate::fundamental::{Density, Flow, Hours, Link};
use crate::REL_TOL;

/// A link embedded in a directed network.
#[derive(Debug, Clone)]
pub struct GeneralLink {
    id: String,
    tail: String,
    head: String,
    link: Link,
}

impl GeneralLink {
    pub fn new(
        id: impl Into<String>,
        tail: impl Into<String>,
        head: impl Into<String>,
        link: Link,
    ) -> Self {
        GeneralLink {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
            link,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tail(&self) -> &str {
        &self.tail
    }

    pub fn head(&self) -> &str {
        &self.head
    }

    pub fn link(&self) -> &Link {
        &self.link
    }
}

/// A directed acyclic network with a fixed set of origin-destination
/// routes. Routes may share links; every link must lie on some route.
#[derive(Debug, Clone)]
pub struct GeneralNetwork {
    links: Vec<GeneralLink>,
    /// Per route, the indices of its links in traversal order.
    routes: Vec<Vec<usize>>,
    origin: String,
    destination: String,
}

impl GeneralNetwork {
    pub fn new(
        links: Vec<GeneralLink>,
        routes_by_id: Vec<Vec<String>>,
        origin: impl Into<String>,
        destination: impl Into<String>,
    ) -> Result<Self> {
        let origin = origin.into();
        let destination = destination.into();
        if links.is_empty() || routes_by_id.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        let mut index_of = std::collections::HashMap::new();
        for (i, l) in links.iter().enumerate() {
            if index_of.insert(l.id.clone(), i).is_some() {
                return Err(Error::DuplicateLinkId { id: l.id.clone() });
            }
        }
        let mut routes = Vec::with_capacity(routes_by_id.len());
        let mut used = vec![false; links.len()];
        for (r, ids) in routes_by_id.iter().enumerate() {
            if ids.is_empty() {
                return Err(Error::EmptyRoute);
            }
            let mut route = Vec::with_capacity(ids.len());
            for id in ids {
                let &i = index_of.get(id).ok_or_else(|| Error::UnknownLinkId {
                    route: r,
                    id: id.clone(),
                })?;
                used[i] = true;
                route.push(i);
            }
            if links[route[0]].tail != origin {
                return Err(Error::BrokenRoute {
                    route: r,
                    reason: format!(
                        "first link {} starts at {}, not at the origin {origin}",
                        links[route[0]].id, links[route[0]].tail
                    ),
                });
            }
            if links[*route.last().unwrap()].head != destination {
                return Err(Error::BrokenRoute {
                    route: r,
                    reason: format!(
                        "last link {} ends at {}, not at the destination {destination}",
                        links[*route.last().unwrap()].id,
                        links[*route.last().unwrap()].head
                    ),
                });
            }
            for w in route.windows(2) {
                if links[w[0]].head != links[w[1]].tail {
                    return Err(Error::BrokenRoute {
                        route: r,
                        reason: format!(
                            "link {} ends at {} but link {} starts at {}",
                            links[w[0]].id, links[w[0]].head, links[w[1]].id, links[w[1]].tail
                        ),
                    });
                }
            }
            routes.push(route);
        }
        if let Some(i) = used.iter().position(|&u| !u) {
            return Err(Error::LinkOnNoRoute {
                id: links[i].id.clone(),
            });
        }
        check_acyclic(&links)?;
        Ok(GeneralNetwork {
            links,
            routes,
            origin,
            destination,
        })
    }

    /// The braess-style test network: two outer routes of 24 km and an
    /// inner route of 20 km through a low-capacity shortcut.
    pub fn wheatstone() -> Self {
        let l = |id: &str, tail: &str, head: &str, cap: f64, jam: f64, len: f64| {
            GeneralLink::new(
                id,
                tail,
                head,
                Link::new(crate::fundamental::LinkParams {
                    capacity: cap,
                    jam_density: jam,
                    free_speed: 40.0,
                    length: len,
                })
                .expect("wheatstone links are valid"),
            )
        };
        GeneralNetwork::new(
            vec![
                l("1", "O", "A", 1500.0, 187.5, 8.0),
                l("2", "O", "B", 1500.0, 187.5, 16.0),
                l("3", "A", "B", 800.0, 100.0, 4.0),
                l("4", "A", "D", 1500.0, 187.5, 16.0),
                l("5", "B", "D", 1500.0, 187.5, 8.0),
            ],
            vec![
                vec!["1".into(), "4".into()],
                vec!["1".into(), "3".into(), "5".into()],
                vec!["2".into(), "5".into()],
            ],
            "O",
            "D",
        )
        .expect("wheatstone network is valid")
    }

    /// Embeds a parallel network, giving every route its own disjoint
    /// chain of links between the shared origin and destination.
    pub fn from_parallel(net: &crate::fundamental::ParallelNetwork) -> Self {
        let mut links = Vec::new();
        let mut routes = Vec::new();
        for (p, route) in net.routes().iter().enumerate() {
            let mut ids = Vec::new();
            for (i, link) in route.links().iter().enumerate() {
                let tail = if i == 0 {
                    "o".to_string()
                } else {
                    format!("r{}-n{}", p + 1, i)
                };
                let head = if i + 1 == route.len() {
                    "d".to_string()
                } else {
                    format!("r{}-n{}", p + 1, i + 1)
                };
                let id = format!("r{}-l{}", p + 1, i + 1);
                links.push(GeneralLink::new(id.clone(), tail, head, link.clone()));
                ids.push(id);
            }
            routes.push(ids);
        }
        GeneralNetwork::new(links, routes, "o", "d").expect("parallel networks embed cleanly")
    }

    pub fn links(&self) -> &[GeneralLink] {
        &self.links
    }

    pub fn routes(&self) -> &[Vec<usize>] {
        &self.routes
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn destination(&self) -> &str {
        &self.destination
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn n_routes(&self) -> usize {
        self.routes.len()
    }
}

/// Rejects graphs with directed cycles (Kahn's algorithm over node names).
fn check_acyclic(links: &[GeneralLink]) -> Result<()> {
    use std::collections::HashMap;
    let mut out_edges: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut in_degree: HashMap<&str, usize> = HashMap::new();
    for l in links {
        out_edges
            .entry(l.tail.as_str())
            .or_default()
            .push(l.head.as_str());
        in_degree.entry(l.tail.as_str()).or_insert(0);
        *in_degree.entry(l.head.as_str()).or_insert(0) += 1;
    }
    let mut queue: Vec<&str> = in_degree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&n, _)| n)
        .collect();
    let mut seen = 0;
    while let Some(n) = queue.pop() {
        seen += 1;
        for &m in out_edges.get(n).map(|v| v.as_slice()).unwrap_or(&[]) {
            let d = in_degree.get_mut(m).unwrap();
            *d -= 1;
            if *d == 0 {
                queue.push(m);
            }
        }
    }
    if seen != in_degree.len() {
        let node = in_degree
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(&n, _)| n)
            .min()
            .unwrap_or("")
            .to_string();
        return Err(Error::CyclicGraph { node });
    }
    Ok(())
}

/// Options for the fixed-point iteration.
#[derive(Debug, Clone, Copy)]
pub struct SteadyOptions {
    /// Euler step in hours; defaults to half the stability bound.
    pub step: Option<Hours>,
    /// Convergence threshold on the largest per-step density change,
    /// relative to the link's jam density.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            step: None,
            tol: 1e-8,
            max_steps: 1_000_000,
        }
    }
}

/// The largest Euler step that keeps the update stable: the tightest
/// `length / max(free_speed, wave_speed)` over all links.
pub fn max_stable_step(net: &GeneralNetwork) -> Hours {
    net.links()
        .iter()
        .map(|gl| {
            let l = gl.link();
            l.length() / l.free_speed().max(l.wave_speed())
        })
        .fold(f64::INFINITY, f64::min)
}

/// A (possibly converged) state of the network dynamics.
#[derive(Debug, Clone)]
pub struct GeneralState {
    /// Per-link, per-route densities, veh/km.
    pub density: Vec<Vec<Density>>,
    /// Aggregate density per link.
    pub link_density: Vec<Density>,
    /// Outflow per link at the final step, veh/h.
    pub link_flow: Vec<Flow>,
    /// Flow each route actually pushes into its first link, veh/h.
    pub admitted: Vec<Flow>,
    /// Exogenous flow that never enters the network, veh/h.
    pub psi: Flow,
    pub converged: bool,
    pub steps: usize,
}

/// Runs the network dynamics from the empty state until the densities
/// settle (or `max_steps` elapse).
pub fn steady_state(
    net: &GeneralNetwork,
    phi: Flow,
    routing: &RoutingVector,
    options: SteadyOptions,
) -> Result<GeneralState> {
    if routing.len() != net.n_routes() {
        return Err(Error::ShareCountMismatch {
            expected: net.n_routes(),
            got: routing.len(),
        });
    }
    if !(phi >= 0.0) || !phi.is_finite() {
        return Err(Error::NegativeInflow { phi });
    }
    let bound = max_stable_step(net);
    let dt = options.step.unwrap_or(0.5 * bound);
    if dt > bound * (1.0 + REL_TOL) || !(dt > 0.0) {
        return Err(Error::StepTooLarge { step: dt, bound });
    }

    let n_links = net.n_links();
    let n_routes = net.n_routes();
    let nominal: Vec<Flow> = routing.shares().iter().map(|&r| phi * r).collect();

    let mut density = vec![vec![0.0; n_routes]; n_links];
    let mut link_density = vec![0.0; n_links];
    let mut demand = vec![0.0; n_links];
    let mut supply = vec![0.0; n_links];
    let mut offered = vec![0.0; n_links];
    let mut inflow = vec![vec![0.0; n_routes]; n_links];
    let mut outflow = vec![vec![0.0; n_routes]; n_links];
    let mut admitted = vec![0.0; n_routes];

    let mut converged = false;
    let mut steps = 0;
    while steps < options.max_steps {
        steps += 1;
        for l in 0..n_links {
            link_density[l] = density[l].iter().sum();
            let link = net.links()[l].link();
            demand[l] = link.demand_clamped(link_density[l]);
            supply[l] = link.supply_clamped(link_density[l]);
            offered[l] = 0.0;
            inflow[l].iter_mut().for_each(|f| *f = 0.0);
            outflow[l].iter_mut().for_each(|f| *f = 0.0);
        }
        // each sender offers its per-route share of its demand to the
        // receiving link; origins offer the nominal route inflows
        for (r, route) in net.routes().iter().enumerate() {
            offered[route[0]] += nominal[r];
            for w in route.windows(2) {
                let (from, to) = (w[0], w[1]);
                if link_density[from] > 0.0 {
                    offered[to] += demand[from] * density[from][r] / link_density[from];
                }
            }
        }
        // receivers accept offers pro rata up to their supply
        let ratio: Vec<f64> = (0..n_links)
            .map(|l| {
                if offered[l] > supply[l] {
                    supply[l] / offered[l]
                } else {
                    1.0
                }
            })
            .collect();
        for (r, route) in net.routes().iter().enumerate() {
            admitted[r] = nominal[r] * ratio[route[0]];
            inflow[route[0]][r] = admitted[r];
            for w in route.windows(2) {
                let (from, to) = (w[0], w[1]);
                if link_density[from] > 0.0 {
                    let sent = demand[from] * density[from][r] / link_density[from] * ratio[to];
                    outflow[from][r] = sent;
                    inflow[to][r] = sent;
                }
            }
            let last = *route.last().unwrap();
            if link_density[last] > 0.0 {
                outflow[last][r] = demand[last] * density[last][r] / link_density[last];
            }
        }
        let mut worst = 0.0f64;
        for l in 0..n_links {
            let link = net.links()[l].link();
            let scale = dt / link.length();
            for r in 0..n_routes {
                let delta = scale * (inflow[l][r] - outflow[l][r]);
                if delta != 0.0 {
                    density[l][r] = (density[l][r] + delta).max(0.0);
                    worst = worst.max(delta.abs() / link.jam_density());
                }
            }
        }
        if worst <= options.tol {
            converged = true;
            break;
        }
    }

    for l in 0..n_links {
        link_density[l] = density[l].iter().sum();
    }
    let link_flow: Vec<Flow> = outflow
        .iter()
        .map(|per_route| per_route.iter().sum())
        .collect();
    let mut psi = phi - admitted.iter().sum::<f64>();
    if psi.abs() <= REL_TOL * phi.max(1.0) {
        psi = 0.0;
    }
    Ok(GeneralState {
        density,
        link_density,
        link_flow,
        admitted,
        psi,
        converged,
        steps,
    })
}

/// Travel time of every route at a network state, using each link's
/// aggregate density and flow: empty links at free speed, blocked links
/// forever.
pub fn general_route_times(net: &GeneralNetwork, state: &GeneralState) -> Vec<Hours> {
    net.routes()
        .iter()
        .map(|route| {
            route
                .iter()
                .map(|&l| {
                    let link = net.links()[l].link();
                    let x = state.link_density[l];
                    let f = state.link_flow[l];
                    if x == 0.0 {
                        link.free_flow_time()
                    } else if f == 0.0 {
                        f64::INFINITY
                    } else {
                        link.length() * x / f
                    }
                })
                .sum()
        })
        .collect()
}

/// A grid point that passed the equilibrium filter.
#[derive(Debug, Clone)]
pub struct SearchHit {
    pub routing: RoutingVector,
    /// Largest improvement available to any user, hours.
    pub violation: Hours,
    /// Non-transferred demand, veh/h.
    pub psi: Flow,
    /// Per-route travel times at the steady state, hours.
    pub times: Vec<Hours>,
    pub admitted: Vec<Flow>,
}

/// Brute-force equilibrium search on a general network: runs the dynamics
/// for every routing vector with shares in multiples of `1/denominator`
/// and keeps the converged states where no route beats the used routes by
/// more than `eps` hours. Hits are sorted by violation, then by
/// non-transferred demand.
pub fn search_equilibrium(
    net: &GeneralNetwork,
    phi: Flow,
    denominator: u32,
    eps: Hours,
    options: SteadyOptions,
) -> Result<Vec<SearchHit>> {
    if denominator == 0 {
        return Err(Error::BadResolution {
            resolution: "1/0".into(),
        });
    }
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::NonPositiveInflow { phi });
    }
    let mut hits = Vec::new();
    let mut counts = vec![0u32; net.n_routes()];
    let mut error = None;
    enumerate_compositions(denominator, 0, &mut counts, &mut |counts| {
        if error.is_some() {
            return;
        }
        let shares: Vec<f64> = counts
            .iter()
            .map(|&c| c as f64 / denominator as f64)
            .collect();
        let routing = RoutingVector::new(shares).expect("grid shares sum to one");
        let state = match steady_state(net, phi, &routing, options) {
            Ok(s) => s,
            Err(e) => {
                error = Some(e);
                return;
            }
        };
        if !state.converged {
            return;
        }
        let times = general_route_times(net, &state);
        let max_used = routing
            .support()
            .into_iter()
            .map(|r| times[r])
            .fold(f64::NEG_INFINITY, f64::max);
        let min_all = times.iter().cloned().fold(f64::INFINITY, f64::min);
        if !max_used.is_finite() {
            return;
        }
        let violation = (max_used - min_all).max(0.0);
        // The iteration stops once per-step density changes fall below
        // `options.tol` of jam, which leaves residue of the same order in
        // the route times; states on the eps boundary should not flip on
        // that residue.
        let slack = (eps * REL_TOL).max(1e-6);
        if violation <= eps + slack {
            hits.push(SearchHit {
                routing,
                violation,
                psi: state.psi,
                times,
                admitted: state.admitted,
            });
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    hits.sort_by(|a, b| {
        (a.violation, a.psi)
            .partial_cmp(&(b.violation, b.psi))
            .unwrap()
    });
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{example_network, EX3_LENGTHS};

    fn shares(v: &[f64]) -> RoutingVector {
        RoutingVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn wheatstone_geometry() {
        let net = GeneralNetwork::wheatstone();
        assert_eq!(net.n_links(), 5);
        assert_eq!(net.n_routes(), 3);
        let free: Vec<Hours> = net
            .routes()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&l| net.links()[l].link().free_flow_time())
                    .sum()
            })
            .collect();
        for (got, want) in free.iter().zip([0.6, 0.5, 0.6]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((max_stable_step(&net) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_malformed_networks() {
        let link = |id: &str, tail: &str, head: &str| {
            GeneralLink::new(
                id,
                tail,
                head,
                crate::testutil::link(1000.0, 100.0, 40.0, 1.0),
            )
        };
        // unknown id on a route
        let err = GeneralNetwork::new(vec![link("a", "o", "d")], vec![vec!["b".into()]], "o", "d")
            .unwrap_err();
        assert!(matches!(err, Error::UnknownLinkId { .. }));
        // disconnected chain
        let err = GeneralNetwork::new(
            vec![link("a", "o", "m"), link("b", "x", "d")],
            vec![vec!["a".into(), "b".into()]],
            "o",
            "d",
        )
        .unwrap_err();
        assert!(matches!(err, Error::BrokenRoute { .. }));
        // unused link
        let err = GeneralNetwork::new(
            vec![link("a", "o", "d"), link("b", "o", "d")],
            vec![vec!["a".into()]],
            "o",
            "d",
        )
        .unwrap_err();
        assert!(matches!(err, Error::LinkOnNoRoute { .. }));
        // directed cycle off the route
        let err = GeneralNetwork::new(
            vec![
                link("a", "o", "m"),
                link("b", "m", "d"),
                link("c", "m", "m2"),
                link("c2", "m2", "m"),
            ],
            vec![
                vec!["a".into(), "b".into()],
                vec!["a".into(), "c".into(), "c2".into(), "b".into()],
            ],
            "o",
            "d",
        )
        .unwrap_err();
        assert!(matches!(err, Error::CyclicGraph { .. }));
        // duplicate ids
        let err = GeneralNetwork::new(
            vec![link("a", "o", "d"), link("a", "o", "d")],
            vec![vec!["a".into()]],
            "o",
            "d",
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateLinkId { .. }));
    }

    #[test]
    fn empty_inflow_stays_empty() {
        let net = GeneralNetwork::wheatstone();
        let state = steady_state(
            &net,
            0.0,
            &shares(&[1.0, 0.0, 0.0]),
            SteadyOptions::default(),
        )
        .unwrap();
        assert!(state.converged);
        assert_eq!(state.steps, 1);
        assert!(state.link_density.iter().all(|&x| x == 0.0));
        assert_eq!(state.psi, 0.0);
        let times = general_route_times(&net, &state);
        for (got, want) in times.iter().zip([0.6, 0.5, 0.6]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn step_bound_is_enforced() {
        let net = GeneralNetwork::wheatstone();
        let options = SteadyOptions {
            step: Some(0.2),
            ..SteadyOptions::default()
        };
        assert!(matches!(
            steady_state(&net, 100.0, &shares(&[1.0, 0.0, 0.0]), options),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn shortcut_overload_throttles_at_the_shared_entrance() {
        // the middle route wants 900 through the 800-capacity shortcut;
        // the queue spills onto shared link 1
        let net = GeneralNetwork::wheatstone();
        let state = steady_state(
            &net,
            1600.0,
            &shares(&[0.0, 9.0 / 16.0, 7.0 / 16.0]),
            SteadyOptions::default(),
        )
        .unwrap();
        assert!(state.converged);
        let expected = [107.5, 17.5, 20.0, 0.0, 37.5];
        for (got, want) in state.link_density.iter().zip(expected) {
            assert!(
                (got - want).abs() < 1e-2,
                "densities {:?} != {expected:?}",
                state.link_density
            );
        }
        assert!((state.admitted[0] - 0.0).abs() < 1e-6);
        assert!((state.admitted[1] - 800.0).abs() < 1e-3);
        assert!((state.admitted[2] - 700.0).abs() < 1e-3);
        assert!((state.psi - 100.0).abs() < 1e-3);
        let times = general_route_times(&net, &state);
        assert!((times[0] - 88.5 / 60.0).abs() < 1e-3);
        assert!((times[1] - 82.5 / 60.0).abs() < 1e-3);
        assert!((times[2] - 36.0 / 60.0).abs() < 1e-3);
    }

    #[test]
    fn outer_route_carries_what_it_can() {
        let net = GeneralNetwork::wheatstone();
        let state = steady_state(
            &net,
            1600.0,
            &shares(&[0.0, 0.0, 1.0]),
            SteadyOptions::default(),
        )
        .unwrap();
        assert!(state.converged);
        assert!((state.admitted[2] - 1500.0).abs() < 1e-3);
        assert!((state.psi - 100.0).abs() < 1e-3);
        // both links settle just below critical density: free flow at capacity
        assert!((state.link_density[1] - 37.5).abs() < 1e-3);
        assert!((state.link_density[4] - 37.5).abs() < 1e-3);
        let times = general_route_times(&net, &state);
        assert!((times[2] - 0.6).abs() < 1e-4);
        // the idle shortcut route stays free and faster
        assert!((times[1] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn parallel_embedding_reproduces_the_closed_form() {
        let net = example_network(EX3_LENGTHS);
        let general = GeneralNetwork::from_parallel(&net);
        assert_eq!(general.n_links(), 7);
        assert_eq!(general.n_routes(), 2);
        let state = steady_state(
            &general,
            1500.0,
            &shares(&[2.0 / 3.0, 1.0 / 3.0]),
            SteadyOptions::default(),
        )
        .unwrap();
        assert!(state.converged);
        assert_eq!(state.psi, 0.0);
        // from the empty state the critical route settles on the all-free
        // member: densities at capacity over free speed
        for (l, want) in [25.0, 25.0, 25.0, 12.5, 12.5, 12.5, 12.5]
            .iter()
            .enumerate()
        {
            assert!((state.link_density[l] - want).abs() < 1e-3);
        }
    }

    #[test]
    fn grid_search_on_the_embedded_example() {
        let net = GeneralNetwork::from_parallel(&example_network(EX3_LENGTHS));
        let options = SteadyOptions {
            max_steps: 50_000,
            ..SteadyOptions::default()
        };
        let hits = search_equilibrium(&net, 1500.0, 3, 0.1, options).unwrap();
        // all four grid points survive at this loose tolerance; the
        // saturated corner carries a 500 veh/h queue
        assert_eq!(hits.len(), 4);
        assert!(hits
            .iter()
            .any(|h| (h.routing.get(0) - 2.0 / 3.0).abs() < 1e-12));
        let corner = hits
            .iter()
            .find(|h| (h.routing.get(0) - 1.0).abs() < 1e-12)
            .expect("saturated corner survives");
        assert!((corner.psi - 500.0).abs() < 1e-3);
        assert!(corner.violation > 0.09);
        // every interior/free point should be cheaper than the corner
        assert!(hits.first().unwrap().violation < corner.violation);
    }

    #[test]
    fn single_route_search_is_trivial() {
        let parallel = crate::fundamental::ParallelNetwork::new(vec![
            crate::fundamental::Route::new(vec![crate::testutil::link(1000.0, 100.0, 40.0, 2.0)])
                .unwrap(),
        ])
        .unwrap();
        let net = GeneralNetwork::from_parallel(&parallel);
        let hits = search_equilibrium(&net, 900.0, 4, 1e-6, SteadyOptions::default()).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].routing.shares(), &[1.0]);
        assert!(hits[0].violation <= 1e-6);
    }
}
