//! Traffic assignment and selfish-routing analysis on networks whose links
//! carry a triangular (Daganzo-type) fundamental diagram.
//!
//! The core model is a parallel network: `N` disjoint routes between one
//! origin and one destination, each route an ordered chain of links. Every
//! link accepts flow up to its *supply* and discharges flow up to its
//! *demand*, both piecewise-linear functions of the link density. A routing
//! vector splits an exogenous inflow across routes; a density vector is
//! *consistent* when all interface flows along each route balance. On top of
//! that sit the closed-form Wardrop equilibrium, the social optimum, the
//! price of anarchy, and the accounting of demand that never makes it into
//! the network (`psi`).
//!
//! The [`generalnet`] module extends the machinery to acyclic non-parallel
//! topologies with an explicit (and documented) merge rule; it is
//! experimental and only qualitative claims are made for it.
//!
//! Internal units are fixed: veh/h for flows, veh/km for densities, km/h for
//! speeds, km for lengths, hours for times. The CLI converts to minutes for
//! human-readable tables only.

pub mod assignment;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod fundamental;
pub mod generalnet;
pub mod traveltime;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use fundamental::{Link, LinkParams, ParallelNetwork, Route};

/// Relative tolerance for structural equality checks (tie detection,
/// class boundaries, flow balance). All model quantities are short chains of
/// products and quotients of user inputs, so 1e-9 relative is far above
/// accumulated rounding yet far below any meaningful parameter difference.
pub const REL_TOL: f64 = 1e-9;

pub(crate) mod num {
    /// `a` and `b` agree within `rel` relative tolerance (scale = larger magnitude).
    pub fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    /// `a <= b` allowing `rel`-relative slack.
    pub fn le(a: f64, b: f64, rel: f64) -> bool {
        a <= b + rel * a.abs().max(b.abs())
    }
}
