//! Travel times along links and routes, the set of travel times a route can
//! realize while carrying exactly its capacity, and the inverse map from a
//! target travel time back to a consistent density vector.
//!
//! A link traversed at density `x` and flow `f` takes `L * x / f` hours; an
//! empty link is traversed at free speed, and a blocked one (positive
//! density, zero flow) takes forever. For a route at capacity the travel
//! time depends on which links upstream of the bottleneck are congested:
//! sorting those configurations by time yields a union of closed intervals
//! separated by gaps, because congesting one more link jumps the time by a
//! positive amount before the frontier density can vary continuously.

use crate::error::{Error, Result};
use crate::fundamental::{Density, Flow, Hours, Link, Route};
use crate::REL_TOL;

/// Travel time of one link at density `x` carrying flow `flow`.
///
/// Empty links are traversed at free speed regardless of flow; a positive
/// density with zero flow means standstill, reported as infinite time.
pub fn link_travel_time(link: &Link, x: Density, flow: Flow) -> Result<Hours> {
    if !(x >= 0.0) || x > link.jam_density() || !x.is_finite() {
        return Err(Error::DensityOutOfRange {
            value: x,
            jam: link.jam_density(),
        });
    }
    if !(flow >= 0.0) || !flow.is_finite() {
        return Err(Error::NegativeFlow { value: flow });
    }
    if x == 0.0 {
        Ok(link.free_flow_time())
    } else if flow == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(link.length() * x / flow)
    }
}

/// Travel time along a route whose links all carry the same flow.
pub fn route_travel_time(route: &Route, densities: &[Density], flow: Flow) -> Result<Hours> {
    if densities.len() != route.len() {
        return Err(Error::DensityCountMismatch {
            route: 0,
            expected: route.len(),
            got: densities.len(),
        });
    }
    let mut total = 0.0;
    for (link, &x) in route.links().iter().zip(densities) {
        total += link_travel_time(link, x, flow)?;
    }
    Ok(total)
}

/// The travel times a route can realize while carrying exactly its
/// capacity, as a union of closed intervals sorted by time.
///
/// The first interval is the degenerate `[free_flow_time, free_flow_time]`
/// (every link free). Each further interval corresponds to one frontier
/// link `k` upstream of the bottleneck: links past `k` congested, links
/// before it free, and the frontier density sweeping from the link's
/// critical density up to its congested value. Between consecutive
/// intervals lies a gap of width `L_k (cap_k - z) / (v_k z)`, the time
/// jump from congesting the frontier link's own upstream neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTimeBounds {
    /// Travel time with every link free.
    pub free_flow_time: Hours,
    /// Travel time with every link upstream of the bottleneck congested.
    pub max_time: Hours,
    /// Closed intervals `[lo, hi]`, ascending, pairwise disjoint.
    pub attainable: Vec<(Hours, Hours)>,
}

impl RouteTimeBounds {
    /// Whether `t` lies in some attainable interval, within `tol` hours.
    pub fn contains(&self, t: Hours, tol: f64) -> bool {
        self.attainable
            .iter()
            .any(|&(lo, hi)| t >= lo - tol && t <= hi + tol)
    }

    /// The attainable time closest to `t` (clamps into the nearest
    /// interval; `t` itself when attainable).
    pub fn nearest(&self, t: Hours) -> Hours {
        let mut best = self.free_flow_time;
        let mut dist = f64::INFINITY;
        for &(lo, hi) in &self.attainable {
            let candidate = t.clamp(lo, hi);
            let d = (candidate - t).abs();
            if d < dist {
                dist = d;
                best = candidate;
            }
        }
        best
    }

    /// The open gaps between consecutive attainable intervals.
    pub fn gaps(&self) -> Vec<(Hours, Hours)> {
        self.attainable
            .windows(2)
            .map(|w| (w[0].1, w[1].0))
            .collect()
    }
}

/// Per-frontier data shared by `route_time_bounds` and `tau_inverse`.
///
/// `suffix[k]` is the extra time over free flow when links `k..bottleneck`
/// are all fully congested at capacity flow.
fn congestion_suffix(route: &Route) -> Vec<Hours> {
    let z = route.capacity();
    let b = route.bottleneck();
    let mut suffix = vec![0.0; b + 1];
    for k in (0..b).rev() {
        let link = route.link(k);
        let congested = link.length() * link.congested_density(z) / z;
        suffix[k] = suffix[k + 1] + (congested - link.free_flow_time());
    }
    suffix
}

/// Computes the attainable travel-time set of a route at capacity.
pub fn route_time_bounds(route: &Route) -> RouteTimeBounds {
    let z = route.capacity();
    let b = route.bottleneck();
    let free = route.free_flow_time();
    let suffix = congestion_suffix(route);
    let mut attainable = vec![(free, free)];
    for k in (0..b).rev() {
        let link = route.link(k);
        let gap = link.length() * (link.capacity() - z) / (link.free_speed() * z);
        attainable.push((free + suffix[k + 1] + gap, free + suffix[k]));
    }
    RouteTimeBounds {
        free_flow_time: free,
        max_time: free + suffix[0],
        attainable,
    }
}

/// How `tau_inverse` treats targets falling in a gap between attainable
/// intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseMode {
    /// Gap targets are an error.
    Exact,
    /// Gap targets snap to the nearest interval endpoint.
    Nearest,
}

/// Inverts the travel-time map of a route at capacity: finds a consistent
/// density vector whose travel time is `target` (or nearest attainable, in
/// `Nearest` mode).
///
/// Returns the densities and the signed residual `achieved - target`.
/// Targets outside `[free_flow_time, max_time]` are an error in both modes.
pub fn tau_inverse(
    route: &Route,
    target: Hours,
    mode: InverseMode,
) -> Result<(Vec<Density>, Hours)> {
    let bounds = route_time_bounds(route);
    let slack = REL_TOL * bounds.max_time.max(1.0);
    if !target.is_finite()
        || target < bounds.free_flow_time - slack
        || target > bounds.max_time + slack
    {
        return Err(Error::TimeOutOfRange {
            target,
            min: bounds.free_flow_time,
            max: bounds.max_time,
        });
    }
    let effective = match locate(&bounds, target, slack) {
        Ok(t) => t,
        Err((below, above)) => match mode {
            InverseMode::Exact => {
                return Err(Error::UnattainableTime {
                    target,
                    below,
                    above,
                })
            }
            InverseMode::Nearest => {
                if target - below <= above - target {
                    below
                } else {
                    above
                }
            }
        },
    };
    let densities = densities_for_time(route, &bounds, effective);
    let achieved = route_travel_time(route, &densities, route.capacity())?;
    Ok((densities, achieved - target))
}

/// Clamps `target` into the interval that contains it, or reports the
/// endpoints of the surrounding gap.
fn locate(
    bounds: &RouteTimeBounds,
    target: Hours,
    slack: f64,
) -> std::result::Result<Hours, (Hours, Hours)> {
    for &(lo, hi) in &bounds.attainable {
        if target >= lo - slack && target <= hi + slack {
            return Ok(target.clamp(lo, hi));
        }
    }
    for &(below, above) in &bounds.gaps() {
        if target > below && target < above {
            return Err((below, above));
        }
    }
    // only reachable through rounding at interval borders
    Ok(bounds.nearest(target))
}

/// Builds the density vector realizing an attainable `target` exactly:
/// frontier link `k` at the density solving the time equation, links past
/// it congested up to the bottleneck, everything else free.
fn densities_for_time(route: &Route, bounds: &RouteTimeBounds, target: Hours) -> Vec<Density> {
    let z = route.capacity();
    let b = route.bottleneck();
    let free: Vec<Density> = route.links().iter().map(|l| l.free_density(z)).collect();
    let suffix = congestion_suffix(route);
    // interval i > 0 corresponds to frontier link b - i
    let mut chosen = None;
    for (i, &(lo, hi)) in bounds.attainable.iter().enumerate().skip(1) {
        if target >= lo && target <= hi {
            chosen = Some(b - i);
            break;
        }
    }
    let Some(k) = chosen else {
        return free;
    };
    let link = route.link(k);
    let x = (target - bounds.free_flow_time - suffix[k + 1] + link.free_flow_time()) * z
        / link.length();
    let mut densities = free;
    densities[k] = x.clamp(link.critical_density(), link.congested_density(z));
    for l in (k + 1)..b {
        densities[l] = route.link(l).congested_density(z);
    }
    densities
}
