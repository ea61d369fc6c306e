//! Error type shared by all modules.

/// Everything that can go wrong when building or analyzing a network.
///
/// Variants split into three classes, which the CLI maps to exit codes:
/// input/validation problems, violations of the model assumptions the
/// closed-form theory depends on, and numerical-domain errors raised by
/// individual operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("link parameter `{name}` = {value} is invalid: {reason}")]
    InvalidLinkParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("density {value} veh/km outside [0, {jam}]")]
    DensityOutOfRange { value: f64, jam: f64 },

    #[error("negative flow {value} veh/h")]
    NegativeFlow { value: f64 },

    #[error("route has no links")]
    EmptyRoute,

    /// Two links tie for the minimum capacity without the whole route tying.
    /// A route needs a single well-defined bottleneck for the congested
    /// density shapes to be unique (all-equal routes degrade consistently and
    /// are allowed).
    #[error(
        "route bottleneck is ambiguous: links {first} and {second} (0-based) both have the \
         minimum capacity {capacity} veh/h while other links differ"
    )]
    AmbiguousBottleneck {
        first: usize,
        second: usize,
        capacity: f64,
    },

    #[error("network has no routes")]
    EmptyNetwork,

    /// Route travel times must order the routes unambiguously: free-flow
    /// times strictly increasing, saturated times pairwise distinct.
    #[error("routes {a} and {b} (0-based, sorted order) have indistinguishable {which} travel times ({value} h)")]
    TiedRouteTimes {
        a: usize,
        b: usize,
        which: &'static str,
        value: f64,
    },

    #[error("routing shares must be nonnegative (share {index} = {value})")]
    NegativeShare { index: usize, value: f64 },

    #[error("routing shares must sum to 1 within 1e-12 (sum = {sum})")]
    SharesDoNotSumToOne { sum: f64 },

    #[error("expected {expected} routing shares, got {got}")]
    ShareCountMismatch { expected: usize, got: usize },

    #[error("expected {expected} densities on route {route}, got {got}")]
    DensityCountMismatch {
        route: usize,
        expected: usize,
        got: usize,
    },

    #[error("exogenous flow must be positive (got {phi} veh/h)")]
    NonPositiveInflow { phi: f64 },

    #[error(
        "exogenous flow {phi} veh/h exceeds the network throughput {min_cut} veh/h \
         (sum of route capacities)"
    )]
    InflowExceedsThroughput { phi: f64, min_cut: f64 },

    #[error("negative exogenous flow {phi} veh/h")]
    NegativeInflow { phi: f64 },

    #[error("target time {target} h outside the attainable range [{min} h, {max} h]")]
    TimeOutOfRange { target: f64, min: f64, max: f64 },

    /// The target lies between two attainable-time intervals of a route held
    /// exactly at capacity. Exact inversion is impossible; the nearest
    /// attainable values bracket the request.
    #[error(
        "target time {target} h is not attainable for this route at capacity; nearest \
         attainable times are {below} h and {above} h"
    )]
    UnattainableTime { target: f64, below: f64, above: f64 },

    #[error(
        "interface flows along route {route} do not balance: min {min} veh/h, max {max} veh/h"
    )]
    InconsistentState { route: usize, min: f64, max: f64 },

    #[error("{count} routes exceed the exhaustive-search limit of {limit}")]
    TooManyRoutes { count: usize, limit: usize },

    #[error("grid resolution {resolution} is not a fraction in (0, 1]")]
    BadResolution { resolution: String },

    #[error("time step {step} h exceeds the stability bound {bound} h")]
    StepTooLarge { step: f64, bound: f64 },

    #[error("duplicate link id `{id}`")]
    DuplicateLinkId { id: String },

    #[error("route {route} references unknown link id `{id}`")]
    UnknownLinkId { route: usize, id: String },

    #[error("unknown link id `{id}`")]
    UnknownLink { id: String },

    #[error("link `{id}` appears on more than one route of a parallel network")]
    LinkSharedBetweenRoutes { id: String },

    #[error("link `{id}` lies on no route of a parallel network")]
    LinkOnNoRoute { id: String },

    #[error("route {route} is not a connected origin→destination path: {reason}")]
    BrokenRoute { route: usize, reason: String },

    #[error("the link graph contains a cycle (through node `{node}`)")]
    CyclicGraph { node: String },

    #[error("document field `{field}` is required for kind `{kind}`")]
    MissingField { field: String, kind: &'static str },

    #[error("document field `{field}` is not allowed for kind `{kind}`")]
    UnexpectedField { field: String, kind: &'static str },

    #[error("unsupported schema_version `{found}` (this build reads \"1\")")]
    UnsupportedSchema { found: String },

    #[error("document has kind `{found}`, but this command needs a {expected} network")]
    KindMismatch {
        found: &'static str,
        expected: &'static str,
    },

    #[error("cannot read `{path}`: {reason}")]
    Io { path: String, reason: String },

    #[error("invalid JSON in `{path}`: {reason}")]
    Json { path: String, reason: String },

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for violations of the structural assumptions the closed-form
    /// equilibrium theory depends on (unique bottleneck, distinguishable
    /// routes, inflow within the min-cut capacity). The CLI reports these
    /// with exit code 2; every other error is an input problem (exit 1).
    pub fn is_assumption_violation(&self) -> bool {
        matches!(
            self,
            Error::AmbiguousBottleneck { .. }
                | Error::TiedRouteTimes { .. }
                | Error::InflowExceedsThroughput { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
