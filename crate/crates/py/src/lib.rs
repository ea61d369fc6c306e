//! Python bindings for the ctm-routing solvers.
//!
//! The module mirrors the CLI: networks load from the same JSON documents,
//! and every list in a result dict is ordered like the document's `routes`
//! array. Indices in result dicts (`u_index`, `j_index`, supports) are
//! 0-based positions into those lists.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ctm_routing::assignment::{classify, RoutingVector, TrafficAssignment};
use ctm_routing::cli::document::{parse_network, to_parallel, validate_document, NetworkDocument};
use ctm_routing::equilibrium::{
    price_of_anarchy as poa_of, social_optimum as so_of, wardrop as wardrop_of, GameInstance,
    PriceOfAnarchy,
};
use ctm_routing::generalnet::{search_equilibrium, GeneralNetwork, SteadyOptions};
use ctm_routing::traveltime::route_travel_time;
use ctm_routing::ParallelNetwork;

fn err(e: ctm_routing::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parallel-route network loaded from a JSON document.
#[pyclass(frozen)]
struct Network {
    net: ParallelNetwork,
    default_phi: Option<f64>,
    description: Option<String>,
}

impl Network {
    /// `order[p]` is the document position of internally-sorted route `p`.
    fn order(&self) -> &[usize] {
        self.net.source_order()
    }

    /// Reorders a sorted-order vector into document order.
    fn to_doc<T: Copy + Default>(&self, sorted: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); sorted.len()];
        for (p, &doc) in self.order().iter().enumerate() {
            out[doc] = sorted[p];
        }
        out
    }

    fn to_doc_vecs(&self, sorted: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); sorted.len()];
        for (p, &doc) in self.order().iter().enumerate() {
            out[doc] = sorted[p].clone();
        }
        out
    }

    fn game(&self, phi: Option<f64>) -> PyResult<GameInstance> {
        let phi = phi.or(self.default_phi).ok_or_else(|| {
            PyValueError::new_err(
                "no exogenous flow: pass phi= or set exogenous_flow_veh_per_h in the document",
            )
        })?;
        GameInstance::new(self.net.clone(), phi).map_err(err)
    }
}

#[pymethods]
impl Network {
    /// Loads a `kind: parallel` JSON document.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let doc = parse_network(&path).map_err(err)?;
        Self::from_document(&doc)
    }

    /// Parses a JSON document from a string.
    #[staticmethod]
    fn loads(text: &str) -> PyResult<Self> {
        let doc: NetworkDocument = serde_json::from_str(text)
            .map_err(|e| PyValueError::new_err(format!("invalid document: {e}")))?;
        Self::from_document(&doc)
    }

    #[getter]
    fn route_count(&self) -> usize {
        self.net.len()
    }

    #[getter]
    fn default_phi(&self) -> Option<f64> {
        self.default_phi
    }

    #[getter]
    fn description(&self) -> Option<String> {
        self.description.clone()
    }

    /// Free-flow travel time of each route, hours.
    #[getter]
    fn free_flow_times_h(&self) -> Vec<f64> {
        let sorted: Vec<f64> = self
            .net
            .routes()
            .iter()
            .map(|r| r.free_flow_time())
            .collect();
        self.to_doc(&sorted)
    }

    /// Saturated travel time of each route, hours.
    #[getter]
    fn saturated_times_h(&self) -> Vec<f64> {
        let sorted: Vec<f64> = self
            .net
            .routes()
            .iter()
            .map(|r| r.saturated_time())
            .collect();
        self.to_doc(&sorted)
    }

    /// Bottleneck capacity of each route, veh/h.
    #[getter]
    fn route_capacities_veh_per_h(&self) -> Vec<f64> {
        let sorted: Vec<f64> = self.net.routes().iter().map(|r| r.capacity()).collect();
        self.to_doc(&sorted)
    }

    /// Largest exogenous flow the network can transfer, veh/h.
    #[getter]
    fn min_cut_capacity_veh_per_h(&self) -> f64 {
        self.net.min_cut_capacity()
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(routes={}, min_cut={} veh/h)",
            self.net.len(),
            self.net.min_cut_capacity()
        )
    }
}

impl Network {
    fn from_document(doc: &NetworkDocument) -> PyResult<Self> {
        validate_document(doc).map_err(err)?;
        let net = to_parallel(doc).map_err(err)?;
        Ok(Network {
            net,
            default_phi: doc.exogenous_flow_veh_per_h,
            description: doc.description.clone(),
        })
    }
}

/// Computes the Wardrop equilibrium at exogenous flow `phi` (veh/h).
///
/// Returns a dict with the routing shares, common travel time, the
/// non-transferred demand `psi`, and the realizing densities.
#[pyfunction]
#[pyo3(signature = (network, phi=None))]
fn wardrop<'py>(
    py: Python<'py>,
    network: &Network,
    phi: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let game = network.game(phi)?;
    let solution = wardrop_of(&game).map_err(err)?;

    let out = PyDict::new(py);
    out.set_item("kind", solution.kind.tag())?;
    out.set_item("phi_veh_per_h", game.phi())?;
    out.set_item("shares", network.to_doc(solution.routing.shares()))?;
    out.set_item("common_time_h", solution.common_time)?;
    out.set_item("psi_veh_per_h", solution.psi)?;
    out.set_item(
        "psi_range_veh_per_h",
        vec![solution.psi_range.0, solution.psi_range.1],
    )?;
    out.set_item("k", solution.indices.k)?;
    out.set_item("u_index", solution.indices.u.map(|u| network.order()[u]))?;
    out.set_item("j_index", solution.indices.j.map(|j| network.order()[j]))?;
    out.set_item(
        "saturated_inflow_range_veh_per_h",
        solution.saturated_inflow_range.map(|(lo, hi)| vec![lo, hi]),
    )?;

    let net = game.network();
    let mut times = Vec::with_capacity(net.len());
    for (p, route) in net.routes().iter().enumerate() {
        times.push(
            route_travel_time(
                route,
                &solution.assignment.densities()[p],
                solution.assignment.realized()[p],
            )
            .map_err(err)?,
        );
    }
    out.set_item("route_times_h", network.to_doc(&times))?;
    out.set_item(
        "densities_veh_per_km",
        network.to_doc_vecs(solution.assignment.densities()),
    )?;
    out.set_item(
        "admitted_veh_per_h",
        network.to_doc(solution.assignment.realized()),
    )?;
    out.set_item("residuals_h", network.to_doc(&solution.residuals))?;
    Ok(out)
}

/// Computes the social optimum: the cheapest fully transferring assignment.
#[pyfunction]
#[pyo3(signature = (network, phi=None))]
fn social_optimum<'py>(
    py: Python<'py>,
    network: &Network,
    phi: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let game = network.game(phi)?;
    let optimum = so_of(&game).map_err(err)?;

    let out = PyDict::new(py);
    out.set_item("phi_veh_per_h", game.phi())?;
    out.set_item(
        "shares",
        network.to_doc(optimum.assignment.routing().shares()),
    )?;
    out.set_item("cost_veh_h", optimum.cost)?;
    out.set_item("route_times_h", network.to_doc(&optimum.route_times))?;
    out.set_item(
        "densities_veh_per_km",
        network.to_doc_vecs(optimum.assignment.densities()),
    )?;
    Ok(out)
}

/// Computes the price of anarchy; `poa` is None when the equilibrium
/// leaves demand outside the network.
#[pyfunction]
#[pyo3(signature = (network, phi=None))]
fn price_of_anarchy<'py>(
    py: Python<'py>,
    network: &Network,
    phi: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let game = network.game(phi)?;
    let out = PyDict::new(py);
    out.set_item("phi_veh_per_h", game.phi())?;
    match poa_of(&game).map_err(err)? {
        PriceOfAnarchy::Defined(value) => {
            out.set_item("poa", value)?;
            out.set_item("psi_veh_per_h", 0.0)?;
        }
        PriceOfAnarchy::UndefinedPartialTransfer { psi } => {
            out.set_item("poa", py.None())?;
            out.set_item("psi_veh_per_h", psi)?;
        }
    }
    Ok(out)
}

/// Evaluates a fixed routing vector: classes, consistent densities,
/// transferred flows, and the non-transferred remainder.
///
/// `shares` follows the document's route order and must sum to 1.
#[pyfunction]
#[pyo3(signature = (network, shares, phi=None))]
fn assignment<'py>(
    py: Python<'py>,
    network: &Network,
    shares: Vec<f64>,
    phi: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let game = network.game(phi)?;
    if shares.len() != network.net.len() {
        return Err(PyValueError::new_err(format!(
            "expected {} shares, got {}",
            network.net.len(),
            shares.len()
        )));
    }
    let sorted: Vec<f64> = network.order().iter().map(|&doc| shares[doc]).collect();
    let routing = RoutingVector::new(sorted).map_err(err)?;
    let assignment =
        TrafficAssignment::canonical(game.network(), game.phi(), routing.clone()).map_err(err)?;

    let net = game.network();
    let mut classes = Vec::with_capacity(net.len());
    let mut times = Vec::with_capacity(net.len());
    for (p, route) in net.routes().iter().enumerate() {
        classes.push(classify(route, game.phi() * routing.get(p)).tag());
        times.push(
            route_travel_time(route, &assignment.densities()[p], assignment.realized()[p])
                .map_err(err)?,
        );
    }

    let out = PyDict::new(py);
    out.set_item("phi_veh_per_h", game.phi())?;
    out.set_item("shares", shares)?;
    out.set_item("classes", network.to_doc(&classes))?;
    out.set_item(
        "transferred_veh_per_h",
        network.to_doc(assignment.realized()),
    )?;
    out.set_item("psi_veh_per_h", assignment.psi())?;
    out.set_item("fully_transferring", assignment.is_fully_transferring())?;
    out.set_item("route_times_h", network.to_doc(&times))?;
    out.set_item(
        "densities_veh_per_km",
        network.to_doc_vecs(assignment.densities()),
    )?;
    Ok(out)
}

/// Grid-searches equilibria of the built-in crossing (Wheatstone) network.
///
/// Routes are (top, top-shortcut-bottom, bottom); shares step in multiples
/// of `1/denominator`. A state survives when no route beats the used routes
/// by more than `eps_h` hours at the converged densities.
#[pyfunction]
#[pyo3(signature = (phi, denominator=16, eps_h=0.1, max_steps=200_000))]
fn wheatstone_search<'py>(
    py: Python<'py>,
    phi: f64,
    denominator: u32,
    eps_h: f64,
    max_steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let net = GeneralNetwork::wheatstone();
    let options = SteadyOptions {
        max_steps,
        ..SteadyOptions::default()
    };
    let hits = search_equilibrium(&net, phi, denominator, eps_h, options).map_err(err)?;

    let survivors: Vec<Bound<'py, PyDict>> = hits
        .iter()
        .map(|hit| {
            let entry = PyDict::new(py);
            entry.set_item("shares", hit.routing.shares().to_vec())?;
            entry.set_item("violation_h", hit.violation)?;
            entry.set_item("psi_veh_per_h", hit.psi)?;
            entry.set_item("times_h", hit.times.clone())?;
            entry.set_item("admitted_veh_per_h", hit.admitted.clone())?;
            Ok(entry)
        })
        .collect::<PyResult<_>>()?;

    let out = PyDict::new(py);
    out.set_item("phi_veh_per_h", phi)?;
    out.set_item("denominator", denominator)?;
    out.set_item("eps_h", eps_h)?;
    out.set_item("survivors", survivors)?;
    Ok(out)
}

#[pymodule]
fn ctm_routing_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_function(wrap_pyfunction!(wardrop, m)?)?;
    m.add_function(wrap_pyfunction!(social_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(price_of_anarchy, m)?)?;
    m.add_function(wrap_pyfunction!(assignment, m)?)?;
    m.add_function(wrap_pyfunction!(wheatstone_search, m)?)?;
    Ok(())
}
