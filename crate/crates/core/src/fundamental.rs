//! Links with a triangular fundamental diagram, routes, and the validated
//! parallel network.
//!
//! A link is one homogeneous road segment. Its *supply* is the largest flow
//! it can accept at a given density, its *demand* the largest flow it can
//! discharge; both are piecewise-linear with a single kink at the critical
//! density `x_c = capacity / free_speed`. Below `x_c` the link is in free
//! flow (demand rises with the free speed `v`, supply is pinned at
//! capacity); above it the link is congested (demand pinned at capacity,
//! supply falls with the backward wave speed `w`).

use crate::error::{Error, Result};
use crate::num;
use crate::REL_TOL;

/// Flow in veh/h.
pub type Flow = f64;
/// Density in veh/km.
pub type Density = f64;
/// Speed in km/h.
pub type Speed = f64;
/// Duration in hours.
pub type Hours = f64;
/// Length in km.
pub type Km = f64;

/// Raw physical parameters of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Maximum flow the link sustains, veh/h.
    pub capacity: Flow,
    /// Density at which traffic stands still, veh/km.
    pub jam_density: Density,
    /// Free-flow speed, km/h.
    pub free_speed: Speed,
    /// Link length, km.
    pub length: Km,
}

/// A validated link with its derived diagram quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    params: LinkParams,
    critical_density: Density,
    wave_speed: Speed,
}

impl Link {
    /// Validates the parameters and derives the critical density and the
    /// backward wave speed.
    ///
    /// The degenerate diagram with `capacity = free_speed * jam_density`
    /// (critical density equal to jam density) is rejected: it has no
    /// congested branch and the wave speed is undefined.
    pub fn new(params: LinkParams) -> Result<Self> {
        let check = |name: &'static str, value: f64| -> Result<()> {
            if !value.is_finite() {
                return Err(Error::InvalidLinkParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
            if value <= 0.0 {
                return Err(Error::InvalidLinkParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
            Ok(())
        };
        check("capacity", params.capacity)?;
        check("jam_density", params.jam_density)?;
        check("free_speed", params.free_speed)?;
        check("length", params.length)?;

        let critical_density = params.capacity / params.free_speed;
        if critical_density >= params.jam_density {
            return Err(Error::InvalidLinkParameter {
                name: "capacity",
                value: params.capacity,
                reason: "critical density capacity/free_speed must stay below the jam density",
            });
        }
        let wave_speed = params.capacity / (params.jam_density - critical_density);
        Ok(Link {
            params,
            critical_density,
            wave_speed,
        })
    }

    pub fn params(&self) -> LinkParams {
        self.params
    }

    pub fn capacity(&self) -> Flow {
        self.params.capacity
    }

    pub fn jam_density(&self) -> Density {
        self.params.jam_density
    }

    pub fn free_speed(&self) -> Speed {
        self.params.free_speed
    }

    pub fn length(&self) -> Km {
        self.params.length
    }

    /// Density `capacity / free_speed` where supply and demand meet.
    pub fn critical_density(&self) -> Density {
        self.critical_density
    }

    /// Slope of the congested supply branch, `capacity / (jam - critical)`.
    pub fn wave_speed(&self) -> Speed {
        self.wave_speed
    }

    fn check_density(&self, x: Density) -> Result<()> {
        if !x.is_finite() || x < 0.0 || x > self.params.jam_density {
            return Err(Error::DensityOutOfRange {
                value: x,
                jam: self.params.jam_density,
            });
        }
        Ok(())
    }

    /// Largest flow the link can accept at density `x`:
    /// `min(capacity, wave_speed * (jam - x))`. Non-increasing in `x`.
    pub fn supply(&self, x: Density) -> Result<Flow> {
        self.check_density(x)?;
        Ok(self.supply_clamped(x))
    }

    /// Largest flow the link can discharge at density `x`:
    /// `min(free_speed * x, capacity)`. Non-decreasing in `x`.
    pub fn demand(&self, x: Density) -> Result<Flow> {
        self.check_density(x)?;
        Ok(self.demand_clamped(x))
    }

    /// Flow the link sustains in isolation at density `x`: `min(supply, demand)`.
    pub fn flow_at(&self, x: Density) -> Result<Flow> {
        self.check_density(x)?;
        Ok(self.supply_clamped(x).min(self.demand_clamped(x)))
    }

    /// `supply` without the domain check, for hot loops that maintain the
    /// density invariant themselves.
    #[inline]
    pub(crate) fn supply_clamped(&self, x: Density) -> Flow {
        debug_assert!(x >= 0.0 && x <= self.params.jam_density);
        self.params
            .capacity
            .min(self.wave_speed * (self.params.jam_density - x))
    }

    /// `demand` without the domain check.
    #[inline]
    pub(crate) fn demand_clamped(&self, x: Density) -> Flow {
        debug_assert!(x >= 0.0 && x <= self.params.jam_density);
        (self.params.free_speed * x).min(self.params.capacity)
    }

    /// Time to traverse the empty link, `length / free_speed`.
    pub fn free_flow_time(&self) -> Hours {
        self.params.length / self.params.free_speed
    }

    /// Free-branch density carrying `flow`: `flow / free_speed`.
    /// Callers keep `flow <= capacity`.
    pub fn free_density(&self, flow: Flow) -> Density {
        debug_assert!(flow >= 0.0 && flow <= self.params.capacity * (1.0 + 1e-9));
        flow / self.params.free_speed
    }

    /// Congested-branch density whose supply equals `flow`:
    /// `jam - flow / wave_speed`. For `flow = capacity` this is the critical
    /// density. Callers keep `flow <= capacity`.
    pub fn congested_density(&self, flow: Flow) -> Density {
        debug_assert!(flow >= 0.0 && flow <= self.params.capacity * (1.0 + 1e-9));
        self.params.jam_density - flow / self.wave_speed
    }
}

/// An ordered chain of links with a single well-defined bottleneck.
///
/// The route capacity is the minimum link capacity. The bottleneck is the
/// first link attaining it, and the minimum must be attained exactly once —
/// otherwise the congested density shapes are not unique — except in the
/// degenerate case where *every* link has the same capacity, which degrades
/// consistently (the whole route pins at critical density when run at
/// capacity, and the saturated travel time collapses onto the free-flow one).
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    links: Vec<Link>,
    bottleneck: usize,
    capacity: Flow,
}

impl Route {
    pub fn new(links: Vec<Link>) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::EmptyRoute);
        }
        let capacity = links
            .iter()
            .map(|l| l.capacity())
            .fold(f64::INFINITY, f64::min);
        let at_min: Vec<usize> = links
            .iter()
            .enumerate()
            .filter(|(_, l)| num::close(l.capacity(), capacity, REL_TOL))
            .map(|(i, _)| i)
            .collect();
        if at_min.len() > 1 && at_min.len() < links.len() {
            return Err(Error::AmbiguousBottleneck {
                first: at_min[0],
                second: at_min[1],
                capacity,
            });
        }
        Ok(Route {
            links,
            bottleneck: at_min[0],
            capacity,
        })
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a validated route has at least one link
    }

    pub fn link(&self, l: usize) -> &Link {
        &self.links[l]
    }

    /// Minimum link capacity along the route.
    pub fn capacity(&self) -> Flow {
        self.capacity
    }

    /// 0-based index of the first link attaining the minimum capacity.
    pub fn bottleneck(&self) -> usize {
        self.bottleneck
    }

    /// Travel time with every link empty: sum of `length / free_speed`.
    pub fn free_flow_time(&self) -> Hours {
        self.links.iter().map(Link::free_flow_time).sum()
    }

    /// Travel time of the route run exactly at capacity with every link
    /// before the bottleneck congested: those links sit on the congested
    /// branch at flow `capacity`, the rest are free. This is the largest
    /// travel time the route attains while still carrying its capacity.
    pub fn saturated_time(&self) -> Hours {
        let z = self.capacity;
        self.links
            .iter()
            .enumerate()
            .map(|(l, link)| {
                if l < self.bottleneck {
                    link.length() * link.congested_density(z) / z
                } else {
                    link.free_flow_time()
                }
            })
            .sum()
    }
}

/// Routes of a parallel network, sorted by increasing free-flow travel time.
///
/// Construction enforces the two tie rules the equilibrium theory needs:
/// free-flow route times strictly increasing and saturated route times
/// pairwise distinct (both at 1e-9 relative tolerance). Cross ties — some
/// route's free-flow time equal to another route's saturated time — are
/// allowed and select the boundary equilibrium family.
#[derive(Debug, Clone)]
pub struct ParallelNetwork {
    routes: Vec<Route>,
    source_order: Vec<usize>,
}

impl ParallelNetwork {
    pub fn new(routes: Vec<Route>) -> Result<Self> {
        if routes.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        let mut order: Vec<usize> = (0..routes.len()).collect();
        order.sort_by(|&a, &b| {
            routes[a]
                .free_flow_time()
                .partial_cmp(&routes[b].free_flow_time())
                .expect("travel times are finite")
        });
        let routes_sorted: Vec<Route> = order.iter().map(|&i| routes[i].clone()).collect();

        for p in 1..routes_sorted.len() {
            let prev = routes_sorted[p - 1].free_flow_time();
            let here = routes_sorted[p].free_flow_time();
            if num::close(prev, here, REL_TOL) {
                return Err(Error::TiedRouteTimes {
                    a: p - 1,
                    b: p,
                    which: "free-flow",
                    value: here,
                });
            }
        }
        for p in 0..routes_sorted.len() {
            for q in (p + 1)..routes_sorted.len() {
                let a = routes_sorted[p].saturated_time();
                let b = routes_sorted[q].saturated_time();
                if num::close(a, b, REL_TOL) {
                    return Err(Error::TiedRouteTimes {
                        a: p,
                        b: q,
                        which: "saturated",
                        value: a,
                    });
                }
            }
        }
        Ok(ParallelNetwork {
            routes: routes_sorted,
            source_order: order,
        })
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a validated network has at least one route
    }

    pub fn route(&self, p: usize) -> &Route {
        &self.routes[p]
    }

    /// For sorted position `p`, the index the route had in the input list.
    pub fn source_order(&self) -> &[usize] {
        &self.source_order
    }

    /// Sum of route capacities — the throughput ceiling of the network.
    pub fn min_cut_capacity(&self) -> Flow {
        self.routes.iter().map(Route::capacity).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{example_network, link, EX2_LENGTHS};

    // The recurring two-route instance: route 1 capacities (1500,1500,1000),
    // route 2 all at 1500, every free speed 40 km/h.

    #[test]
    fn supply_examples() {
        let link3 = link(1000.0, 100.0, 40.0, 0.5);
        assert_eq!(link3.critical_density(), 25.0);
        assert!((link3.wave_speed() - 1000.0 / 75.0).abs() < 1e-12);
        assert!((link3.supply(25.0).unwrap() - 1000.0).abs() < 1e-9);
        assert_eq!(link3.supply(100.0).unwrap(), 0.0);

        let link1 = link(1500.0, 187.5, 40.0, 1.0);
        assert_eq!(link1.wave_speed(), 10.0);
        assert!((link1.supply(87.5).unwrap() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn demand_examples() {
        let link3 = link(1000.0, 100.0, 40.0, 0.5);
        assert_eq!(link3.demand(0.0).unwrap(), 0.0);
        assert!((link3.demand(25.0).unwrap() - 1000.0).abs() < 1e-9);

        let link1 = link(1500.0, 187.5, 40.0, 1.0);
        assert!((link1.demand(87.5).unwrap() - 1500.0).abs() < 1e-9);
    }

    #[test]
    fn supply_and_demand_meet_at_critical_density() {
        let l = link(1234.0, 150.0, 37.0, 2.5);
        let xc = l.critical_density();
        assert!(num::close(l.supply(xc).unwrap(), l.capacity(), 1e-12));
        assert!(num::close(l.demand(xc).unwrap(), l.capacity(), 1e-12));
    }

    #[test]
    fn density_domain_is_checked() {
        let l = link(1000.0, 100.0, 40.0, 0.5);
        assert!(matches!(
            l.supply(-1.0),
            Err(Error::DensityOutOfRange { .. })
        ));
        assert!(matches!(
            l.demand(100.5),
            Err(Error::DensityOutOfRange { .. })
        ));
    }

    #[test]
    fn degenerate_diagram_rejected() {
        // capacity = v * jam puts the critical density on the jam density
        let r = Link::new(LinkParams {
            capacity: 4000.0,
            jam_density: 100.0,
            free_speed: 40.0,
            length: 1.0,
        });
        assert!(matches!(r, Err(Error::InvalidLinkParameter { .. })));
    }

    #[test]
    fn nonpositive_parameters_rejected() {
        for (c, x, v, l) in [
            (0.0, 100.0, 40.0, 1.0),
            (1000.0, -1.0, 40.0, 1.0),
            (1000.0, 100.0, 0.0, 1.0),
            (1000.0, 100.0, 40.0, f64::NAN),
        ] {
            assert!(Link::new(LinkParams {
                capacity: c,
                jam_density: x,
                free_speed: v,
                length: l,
            })
            .is_err());
        }
    }

    #[test]
    fn route_capacity_examples() {
        let net = example_network(EX2_LENGTHS);
        assert_eq!(net.route(0).capacity(), 1000.0);
        assert_eq!(net.route(1).capacity(), 1500.0);

        let single = Route::new(vec![link(800.0, 100.0, 40.0, 3.0)]).unwrap();
        assert_eq!(single.capacity(), 800.0);
        assert_eq!(single.bottleneck(), 0);
    }

    #[test]
    fn duplicated_minimum_capacity_rejected() {
        let r = Route::new(vec![
            link(1000.0, 100.0, 40.0, 1.0),
            link(1000.0, 100.0, 40.0, 1.0),
            link(1500.0, 187.5, 40.0, 1.0),
        ]);
        assert!(matches!(r, Err(Error::AmbiguousBottleneck { .. })));
    }

    #[test]
    fn all_equal_capacities_allowed_and_degrade_consistently() {
        let r = Route::new(vec![
            link(1500.0, 187.5, 40.0, 2.0),
            link(1500.0, 187.5, 40.0, 2.0),
            link(1500.0, 187.5, 40.0, 2.0),
            link(1500.0, 187.5, 40.0, 2.0),
        ])
        .unwrap();
        assert_eq!(r.bottleneck(), 0);
        assert_eq!(r.capacity(), 1500.0);
        // with the bottleneck on the first link there is no congested prefix
        assert!(num::close(r.saturated_time(), r.free_flow_time(), 1e-12));
    }

    #[test]
    fn example_network_validates_in_given_order() {
        // lengths (1,1,0.5,2,2,2,2): free-flow 3.75 min vs 12 min
        let net = example_network(EX2_LENGTHS);
        assert_eq!(net.source_order(), &[0, 1]);
        assert!((net.route(0).free_flow_time() - 0.0625).abs() < 1e-12);
        assert!((net.route(1).free_flow_time() - 0.2).abs() < 1e-12);
        assert_eq!(net.min_cut_capacity(), 2500.0);
    }

    #[test]
    fn saturated_time_examples() {
        let net = example_network(EX2_LENGTHS);
        // two congested links at 87.5 veh/km over 1 km each, then 0.5 km free
        assert!((net.route(0).saturated_time() - 0.1875).abs() < 1e-12);
        // bottleneck on the first link: saturated = free-flow
        assert!((net.route(1).saturated_time() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn tied_free_flow_times_rejected() {
        let mk = || {
            Route::new(vec![
                link(1500.0, 187.5, 40.0, 1.0),
                link(1000.0, 100.0, 40.0, 0.5),
            ])
            .unwrap()
        };
        let r = ParallelNetwork::new(vec![mk(), mk()]);
        assert!(matches!(
            r,
            Err(Error::TiedRouteTimes {
                which: "free-flow",
                ..
            })
        ));
    }

    #[test]
    fn tied_saturated_times_rejected() {
        // distinct free-flow times (0.0375 vs 0.1) but both saturated times
        // land on 0.1 h — the single-link route has saturated = free-flow
        let a = Route::new(vec![
            link(1500.0, 187.5, 40.0, 1.0),
            link(1000.0, 100.0, 40.0, 0.5),
        ])
        .unwrap();
        assert!((a.saturated_time() - 0.1).abs() < 1e-12);
        let b = Route::new(vec![link(900.0, 100.0, 40.0, 4.0)]).unwrap();
        assert!((b.free_flow_time() - 0.1).abs() < 1e-12);
        let r = ParallelNetwork::new(vec![a, b]);
        assert!(matches!(
            r,
            Err(Error::TiedRouteTimes {
                which: "saturated",
                ..
            })
        ));
    }

    #[test]
    fn network_sorts_by_free_flow_time() {
        let slow = Route::new(vec![link(800.0, 100.0, 40.0, 8.0)]).unwrap();
        let fast = Route::new(vec![link(1500.0, 187.5, 40.0, 1.0)]).unwrap();
        let net = ParallelNetwork::new(vec![slow, fast]).unwrap();
        assert_eq!(net.source_order(), &[1, 0]);
        assert!(net.route(0).free_flow_time() < net.route(1).free_flow_time());
        // idempotent: re-validating the sorted routes keeps the order
        let again = ParallelNetwork::new(net.routes().to_vec()).unwrap();
        assert_eq!(again.source_order(), &[0, 1]);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(Route::new(vec![]), Err(Error::EmptyRoute)));
        assert!(matches!(
            ParallelNetwork::new(vec![]),
            Err(Error::EmptyNetwork)
        ));
    }
}
