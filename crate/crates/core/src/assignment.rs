//! Routing vectors, route classification, consistent density vectors, and
//! the accounting of how much exogenous flow actually enters the network.
//!
//! Given a routing vector `R` and exogenous flow `phi`, each route is
//! *nominally* asked to carry `phi * R_p`. A density vector is consistent
//! when every interface along the route — entrance, link-to-link boundaries,
//! exit — carries the same flow. Routes asked for less than their capacity
//! have a unique consistent vector (everything free-flowing); routes asked
//! for more also have a unique one (congested up to the bottleneck); routes
//! asked for *exactly* their capacity admit a one-parameter family of
//! consistent vectors described by a frontier link.

use crate::error::{Error, Result};
use crate::fundamental::{Density, Flow, ParallelNetwork, Route};
use crate::num;
use crate::REL_TOL;

/// Nonnegative route shares summing to one (within 1e-12).
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingVector(Vec<f64>);

impl RoutingVector {
    /// Absolute tolerance on the share sum.
    pub const SUM_TOL: f64 = 1e-12;

    pub fn new(shares: Vec<f64>) -> Result<Self> {
        for (index, &value) in shares.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeShare { index, value });
            }
        }
        let sum: f64 = shares.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::SharesDoNotSumToOne { sum });
        }
        Ok(RoutingVector(shares))
    }

    pub fn shares(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: usize) -> f64 {
        self.0[p]
    }

    /// Routes with a strictly positive share.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0.0)
            .map(|(p, _)| p)
            .collect()
    }
}

/// How a route's nominal inflow compares with its capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteClass {
    /// Nominal inflow strictly below capacity.
    FreeFlow,
    /// Nominal inflow equal to capacity (1e-9 relative; equality wins over
    /// the strict comparisons, since the branch structure of the
    /// equilibrium needs exact-equality semantics).
    Critical,
    /// Nominal inflow strictly above capacity.
    Saturated,
}

impl RouteClass {
    pub fn tag(self) -> &'static str {
        match self {
            RouteClass::FreeFlow => "free-flow",
            RouteClass::Critical => "critical",
            RouteClass::Saturated => "saturated",
        }
    }
}

/// Classifies one route for a given nominal inflow.
pub fn classify(route: &Route, nominal_inflow: Flow) -> RouteClass {
    let z = route.capacity();
    if num::close(nominal_inflow, z, REL_TOL) {
        RouteClass::Critical
    } else if nominal_inflow < z {
        RouteClass::FreeFlow
    } else {
        RouteClass::Saturated
    }
}

/// Classifies every route of the network under `phi` and `routing`.
pub fn classify_routes(
    network: &ParallelNetwork,
    phi: Flow,
    routing: &RoutingVector,
) -> Result<Vec<RouteClass>> {
    check_inputs(network, phi, routing)?;
    Ok(network
        .routes()
        .iter()
        .zip(routing.shares())
        .map(|(route, &r)| classify(route, phi * r))
        .collect())
}

fn check_inputs(network: &ParallelNetwork, phi: Flow, routing: &RoutingVector) -> Result<()> {
    if routing.len() != network.len() {
        return Err(Error::ShareCountMismatch {
            expected: network.len(),
            got: routing.len(),
        });
    }
    if !(phi >= 0.0) || !phi.is_finite() {
        return Err(Error::NegativeInflow { phi });
    }
    Ok(())
}

/// One admissible frontier position of a critical route's density family.
///
/// Links before the frontier are free at `capacity / v`, links after it up
/// to (excluding) the bottleneck are congested at `jam - capacity / w`, the
/// bottleneck and everything downstream are free, and the frontier link
/// itself may take any density in `interval`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierChoice {
    /// 0-based link index of the frontier.
    pub frontier: usize,
    /// Admissible frontier densities `[capacity/v_k, jam_k - capacity/w_k]`.
    pub interval: (Density, Density),
    base: Vec<Density>,
}

impl FrontierChoice {
    /// The family member with the frontier link at density `x`.
    pub fn member(&self, x: Density) -> Result<Vec<Density>> {
        let (lo, hi) = self.interval;
        let slack = REL_TOL * hi.max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::InvalidArgument(format!(
                "frontier density {x} outside [{lo}, {hi}]"
            )));
        }
        let mut v = self.base.clone();
        v[self.frontier] = x.clamp(lo, hi);
        Ok(v)
    }

    /// Member at the free end of the interval.
    pub fn lower_member(&self) -> Vec<Density> {
        self.base.clone()
    }

    /// Member at the congested end of the interval.
    pub fn upper_member(&self) -> Vec<Density> {
        let mut v = self.base.clone();
        v[self.frontier] = self.interval.1;
        v
    }
}

/// The consistent density vectors of one route at a given nominal inflow.
#[derive(Debug, Clone, PartialEq)]
pub enum RouteDensities {
    /// Free-flowing or saturated routes: exactly one consistent vector.
    Unique(Vec<Density>),
    /// Critical routes: the all-free canonical member plus one interval of
    /// members per admissible frontier position, listed with the frontier
    /// closest to the bottleneck first (ascending travel time).
    Family {
        canonical: Vec<Density>,
        choices: Vec<FrontierChoice>,
    },
}

impl RouteDensities {
    /// The canonical representative: the unique vector, or the all-free
    /// member of a family (the minimal-travel-time member).
    pub fn canonical(&self) -> &[Density] {
        match self {
            RouteDensities::Unique(x) => x,
            RouteDensities::Family { canonical, .. } => canonical,
        }
    }

    pub fn is_unique(&self) -> bool {
        matches!(self, RouteDensities::Unique(_))
    }
}

/// Per-route consistent densities for a whole routing vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistentFamily {
    pub per_route: Vec<RouteDensities>,
}

impl ConsistentFamily {
    pub fn canonical_densities(&self) -> Vec<Vec<Density>> {
        self.per_route
            .iter()
            .map(|d| d.canonical().to_vec())
            .collect()
    }
}

/// Builds the consistent density description of every route.
///
/// Free-flow routes get `nominal / v_l` on every link; saturated routes get
/// the congested prefix (`jam - capacity/w` strictly before the bottleneck)
/// and `capacity / v` from the bottleneck on; critical routes get the
/// frontier family plus the all-free canonical member. Every returned
/// member balances its interface flows.
pub fn consistent_density(
    network: &ParallelNetwork,
    phi: Flow,
    routing: &RoutingVector,
) -> Result<ConsistentFamily> {
    check_inputs(network, phi, routing)?;
    let per_route = network
        .routes()
        .iter()
        .zip(routing.shares())
        .map(|(route, &r)| route_densities(route, phi * r))
        .collect();
    Ok(ConsistentFamily { per_route })
}

fn route_densities(route: &Route, nominal: Flow) -> RouteDensities {
    let z = route.capacity();
    let b = route.bottleneck();
    match classify(route, nominal) {
        RouteClass::FreeFlow => RouteDensities::Unique(
            route
                .links()
                .iter()
                .map(|l| l.free_density(nominal))
                .collect(),
        ),
        RouteClass::Saturated => RouteDensities::Unique(saturated_vector(route)),
        RouteClass::Critical => {
            let canonical: Vec<Density> = route.links().iter().map(|l| l.free_density(z)).collect();
            if b == 0 {
                // no link upstream of the bottleneck: the family collapses
                return RouteDensities::Unique(canonical);
            }
            let mut choices = Vec::with_capacity(b);
            // frontier closest to the bottleneck first: ascending travel time
            for k in (0..b).rev() {
                let mut base = canonical.clone();
                for l in (k + 1)..b {
                    base[l] = route.link(l).congested_density(z);
                }
                let link = route.link(k);
                choices.push(FrontierChoice {
                    frontier: k,
                    interval: (link.free_density(z), link.congested_density(z)),
                    base,
                });
            }
            RouteDensities::Family { canonical, choices }
        }
    }
}

/// The unique consistent vector of a route run above capacity: congested
/// before the bottleneck, free at capacity from the bottleneck on.
fn saturated_vector(route: &Route) -> Vec<Density> {
    let z = route.capacity();
    let b = route.bottleneck();
    route
        .links()
        .iter()
        .enumerate()
        .map(|(l, link)| {
            if l < b {
                link.congested_density(z)
            } else {
                link.free_density(z)
            }
        })
        .collect()
}

/// The `n + 1` interface flows of one route at the given densities.
///
/// Entry 0 is what the origin pushes into the first link (nominal inflow
/// capped by the first link's supply); entry `l` for `0 < l < n` is the flow
/// across the boundary between links `l-1` and `l` (upstream demand capped
/// by downstream supply); entry `n` is the demand of the last link,
/// discharged freely at the destination.
pub fn interface_flows(
    route: &Route,
    densities: &[Density],
    nominal_inflow: Flow,
) -> Result<Vec<Flow>> {
    let n = route.len();
    if densities.len() != n {
        return Err(Error::DensityCountMismatch {
            route: 0,
            expected: n,
            got: densities.len(),
        });
    }
    if !(nominal_inflow >= 0.0) || !nominal_inflow.is_finite() {
        return Err(Error::NegativeFlow {
            value: nominal_inflow,
        });
    }
    let mut flows = Vec::with_capacity(n + 1);
    flows.push(nominal_inflow.min(route.link(0).supply(densities[0])?));
    for l in 1..n {
        let upstream = route.link(l - 1).demand(densities[l - 1])?;
        let downstream = route.link(l).supply(densities[l])?;
        flows.push(upstream.min(downstream));
    }
    flows.push(route.link(n - 1).demand(densities[n - 1])?);
    Ok(flows)
}

/// Whether all flows agree within `tol` relative.
pub fn flows_balanced(flows: &[Flow], tol: f64) -> bool {
    let min = flows.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = flows.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (max - min).abs() <= tol * min.abs().max(max.abs()) || max == min
}

/// Whether `densities` is a consistent density vector for `(phi, routing)`:
/// every route's interface flows balance within `tol` relative.
pub fn is_consistent(
    network: &ParallelNetwork,
    phi: Flow,
    routing: &RoutingVector,
    densities: &[Vec<Density>],
    tol: f64,
) -> Result<bool> {
    check_inputs(network, phi, routing)?;
    if densities.len() != network.len() {
        return Err(Error::ShareCountMismatch {
            expected: network.len(),
            got: densities.len(),
        });
    }
    for (p, route) in network.routes().iter().enumerate() {
        if densities[p].len() != route.len() {
            return Err(Error::DensityCountMismatch {
                route: p,
                expected: route.len(),
                got: densities[p].len(),
            });
        }
        let flows = interface_flows(route, &densities[p], phi * routing.get(p))?;
        if !flows_balanced(&flows, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// How much of the nominal inflow each route transfers, and the remainder
/// `psi` that never enters the network: route `p` transfers
/// `min(phi * R_p, capacity_p)`.
pub fn transfer_accounting(
    network: &ParallelNetwork,
    phi: Flow,
    routing: &RoutingVector,
) -> Result<(Vec<Flow>, Flow)> {
    check_inputs(network, phi, routing)?;
    let transferred: Vec<Flow> = network
        .routes()
        .iter()
        .zip(routing.shares())
        .map(|(route, &r)| (phi * r).min(route.capacity()))
        .collect();
    let mut psi = phi - transferred.iter().sum::<f64>();
    if psi.abs() <= REL_TOL * phi.max(1.0) {
        psi = 0.0;
    }
    Ok((transferred, psi))
}

/// A routing vector together with a concrete consistent density vector and
/// the interface flows it realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficAssignment {
    routing: RoutingVector,
    exogenous_flow: Flow,
    nominal: Vec<Flow>,
    densities: Vec<Vec<Density>>,
    flows: Vec<Vec<Flow>>,
    realized: Vec<Flow>,
}

impl TrafficAssignment {
    /// Wraps concrete densities, verifying consistency (1e-9 relative) per
    /// route. The realized flow of a route is its common interface flow.
    pub fn new(
        network: &ParallelNetwork,
        phi: Flow,
        routing: RoutingVector,
        densities: Vec<Vec<Density>>,
    ) -> Result<Self> {
        check_inputs(network, phi, &routing)?;
        if densities.len() != network.len() {
            return Err(Error::ShareCountMismatch {
                expected: network.len(),
                got: densities.len(),
            });
        }
        let mut flows = Vec::with_capacity(network.len());
        let mut realized = Vec::with_capacity(network.len());
        for (p, route) in network.routes().iter().enumerate() {
            if densities[p].len() != route.len() {
                return Err(Error::DensityCountMismatch {
                    route: p,
                    expected: route.len(),
                    got: densities[p].len(),
                });
            }
            let f = interface_flows(route, &densities[p], phi * routing.get(p))?;
            if !flows_balanced(&f, REL_TOL) {
                let min = f.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                return Err(Error::InconsistentState { route: p, min, max });
            }
            realized.push(f[0]);
            flows.push(f);
        }
        let nominal = routing.shares().iter().map(|&r| phi * r).collect();
        Ok(TrafficAssignment {
            routing,
            exogenous_flow: phi,
            nominal,
            densities,
            flows,
            realized,
        })
    }

    /// The assignment using every route's canonical consistent member.
    pub fn canonical(network: &ParallelNetwork, phi: Flow, routing: RoutingVector) -> Result<Self> {
        let family = consistent_density(network, phi, &routing)?;
        Self::new(network, phi, routing, family.canonical_densities())
    }

    pub fn routing(&self) -> &RoutingVector {
        &self.routing
    }

    pub fn exogenous_flow(&self) -> Flow {
        self.exogenous_flow
    }

    /// `phi * R_p` per route.
    pub fn nominal(&self) -> &[Flow] {
        &self.nominal
    }

    pub fn densities(&self) -> &[Vec<Density>] {
        &self.densities
    }

    /// All `n_p + 1` interface flows per route.
    pub fn flows(&self) -> &[Vec<Flow>] {
        &self.flows
    }

    /// The common interface flow per route.
    pub fn realized(&self) -> &[Flow] {
        &self.realized
    }

    /// Exogenous flow that never enters the network.
    pub fn psi(&self) -> Flow {
        let mut psi = self.exogenous_flow - self.realized.iter().sum::<f64>();
        if psi.abs() <= REL_TOL * self.exogenous_flow.max(1.0) {
            psi = 0.0;
        }
        psi
    }

    pub fn is_fully_transferring(&self) -> bool {
        self.psi() == 0.0
    }
}
