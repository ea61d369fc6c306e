//! Command-line entry points over JSON network documents: equilibrium,
//! social optimum, price of anarchy, fixed assignments, inflow sweeps,
//! per-link diagram samples, and an equilibrium search on a built-in
//! non-parallel demo network.
//!
//! Exit codes: 0 success; 1 input error; 2 modeling-assumption violation
//! (ambiguous bottleneck, tied route times, inflow beyond network
//! throughput); 3 success where the result partially transfers (some
//! demand never enters the network).
//!
//! Human-readable tables report times in minutes; JSON and CSV carry hours
//! and unit-suffixed keys. JSON reports embed the network document with the
//! effective exogenous flow filled in, so re-running a command on the
//! embedded document reproduces the report bit for bit.

pub mod document;

use crate::assignment::{
    classify, consistent_density, transfer_accounting, RouteDensities, RoutingVector,
    TrafficAssignment,
};
use crate::equilibrium::{
    price_of_anarchy, social_optimum, wardrop, GameInstance, PriceOfAnarchy, WardropSolution,
};
use crate::error::{Error, Result};
use crate::fundamental::{Flow, Hours, ParallelNetwork};
use crate::generalnet::{
    general_route_times, search_equilibrium, steady_state, GeneralNetwork, SteadyOptions,
};
use crate::traveltime::route_travel_time;
use crate::{num, REL_TOL};
use clap::{Parser, Subcommand, ValueEnum};
use document::{parse_network, to_parallel, NetworkDocument};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Acceptance band, in hours, for the demo equilibrium search.
const DEMO_EPS: Hours = 0.1;

#[derive(Parser)]
#[command(
    name = "ctm-routing",
    version,
    about = "Selfish routing on networks of capacitated links",
    max_term_width = 100
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Compute the Wardrop equilibrium of a parallel network
    Wardrop(WardropArgs),
    /// Compute the social optimum of a parallel network
    Optimum(CommonArgs),
    /// Compute the price of anarchy (equilibrium cost over optimal cost)
    Poa(CommonArgs),
    /// Evaluate a fixed routing vector on a parallel network
    Assign(AssignArgs),
    /// Sweep the exogenous flow and write one equilibrium summary per row
    Sweep(SweepArgs),
    /// Sample one link's supply, demand, flow, and travel time over density
    Diagram(DiagramArgs),
    /// Grid-search equilibria of the built-in crossing network
    DemoWheatstone(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(clap::Args)]
pub struct CommonArgs {
    /// Path to a network document (JSON)
    pub network: PathBuf,
    /// Exogenous inflow in veh/h (defaults to the document's value)
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(clap::Args)]
pub struct WardropArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(clap::Args)]
pub struct AssignArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated routing shares in document route order
    /// (decimals or fractions, e.g. 1/3,2/3)
    #[arg(long)]
    pub ratios: String,
}

#[derive(clap::Args)]
pub struct SweepArgs {
    /// Path to a network document (JSON)
    pub network: PathBuf,
    /// First exogenous inflow of the sweep, veh/h
    #[arg(long)]
    pub phi_from: f64,
    /// Last exogenous inflow of the sweep, veh/h
    #[arg(long)]
    pub phi_to: f64,
    /// Number of rows (inflows are evenly spaced, endpoints included)
    #[arg(long, default_value_t = 25)]
    pub steps: usize,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct DiagramArgs {
    /// Path to a network document (JSON)
    pub network: PathBuf,
    /// Id of the link to sample
    #[arg(long)]
    pub link: String,
    /// Number of density samples, evenly spaced over [0, jam]
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct DemoArgs {
    /// Exogenous inflow in veh/h
    #[arg(long, default_value_t = 1600.0)]
    pub phi: f64,
    /// Grid resolution for routing shares ("1/64" or a decimal)
    #[arg(long, default_value = "1/64")]
    pub resolution: String,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

/// Parses the process arguments, runs the selected command, prints its
/// report, and returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_assumption_violation() {
                2
            } else {
                1
            }
        }
    }
}

/// Runs one command and returns its stdout text and exit code.
pub fn dispatch(command: Command) -> Result<(String, i32)> {
    match command {
        Command::Wardrop(args) => cmd_wardrop(&args.common),
        Command::Optimum(args) => cmd_optimum(&args),
        Command::Poa(args) => cmd_poa(&args),
        Command::Assign(args) => cmd_assign(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Diagram(args) => cmd_diagram(&args),
        Command::DemoWheatstone(args) => cmd_demo_wheatstone(&args),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing

/// Shortest exact decimal representation; "inf" for unbounded times.
fn fnum(x: f64) -> String {
    format!("{x}")
}

/// Hours to minutes, rounded to 1e-9 min so tables stay free of
/// floating-point dust.
fn minutes(h: Hours) -> f64 {
    if h.is_finite() {
        (h * 60.0 * 1e9).round() / 1e9
    } else {
        h
    }
}

fn join_nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| fnum(x)).collect::<Vec<_>>().join(" ")
}

/// Replaces non-finite times before JSON serialization (JSON has no inf).
fn finite(h: Hours) -> Option<f64> {
    h.is_finite().then_some(h)
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    let mut row = fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",");
    row.push_str("\r\n");
    row
}

fn csv_pairs(rows: &[(String, String)]) -> String {
    let mut out = csv_row(&["key".into(), "value".into()]);
    for (k, v) in rows {
        out.push_str(&csv_row(&[k.clone(), v.clone()]));
    }
    out
}

fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::Json {
        path: "<report>".into(),
        reason: e.to_string(),
    })?;
    text.push('\n');
    Ok(text)
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<String> {
    match path {
        Some(p) => {
            std::fs::write(p, contents).map_err(|e| Error::Io {
                path: p.display().to_string(),
                reason: e.to_string(),
            })?;
            Ok(format!("wrote {}\n", p.display()))
        }
        None => Ok(contents.to_string()),
    }
}

/// The effective exogenous flow: `--phi` wins, then the document default.
fn effective_phi(doc: &NetworkDocument, cli_phi: Option<f64>) -> Result<Flow> {
    cli_phi.or(doc.exogenous_flow_veh_per_h).ok_or_else(|| {
        Error::InvalidArgument("the document sets no exogenous_flow_veh_per_h; pass --phi".into())
    })
}

/// Parses one routing share, either a decimal or a fraction `a/b`.
fn parse_share(s: &str) -> Result<f64> {
    let bad = || {
        Error::InvalidArgument(format!(
            "cannot parse `{s}` as a share (use a decimal or a fraction like 2/3)"
        ))
    };
    if let Some((a, b)) = s.split_once('/') {
        let num: f64 = a.trim().parse().map_err(|_| bad())?;
        let den: f64 = b.trim().parse().map_err(|_| bad())?;
        if den == 0.0 {
            return Err(bad());
        }
        Ok(num / den)
    } else {
        s.trim().parse().map_err(|_| bad())
    }
}

fn parse_ratios(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_share).collect()
}

/// Parses a grid resolution "1/d" (or a decimal equal to one) into `d`.
fn parse_resolution(s: &str) -> Result<u32> {
    let bad = || Error::BadResolution {
        resolution: s.to_string(),
    };
    if let Some((a, b)) = s.split_once('/') {
        if a.trim() != "1" {
            return Err(bad());
        }
        let d: u32 = b.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ok(d)
    } else {
        let v: f64 = s.trim().parse().map_err(|_| bad())?;
        if !(v > 0.0 && v <= 1.0) {
            return Err(bad());
        }
        let d = (1.0 / v).round();
        if ((1.0 / v) - d).abs() > 1e-6 * d {
            return Err(bad());
        }
        Ok(d as u32)
    }
}

/// Report routes in the order the document lists them. `source_order[p]`
/// is the document index of the route at sorted position `p`; this wrapper
/// adds the inverse map.
struct RouteOrder {
    doc_of_sorted: Vec<usize>,
    sorted_of_doc: Vec<usize>,
}

impl RouteOrder {
    fn of(net: &ParallelNetwork) -> Self {
        let doc_of_sorted = net.source_order().to_vec();
        let mut sorted_of_doc = vec![0; doc_of_sorted.len()];
        for (p, &d) in doc_of_sorted.iter().enumerate() {
            sorted_of_doc[d] = p;
        }
        RouteOrder {
            doc_of_sorted,
            sorted_of_doc,
        }
    }

    /// 1-based document route number of sorted position `p`.
    fn route_no(&self, p: usize) -> usize {
        self.doc_of_sorted[p] + 1
    }
}

/// Whether ψ counts as positive for exit-code purposes.
fn partial(psi: Flow, phi: Flow) -> bool {
    psi > REL_TOL * phi.max(1.0)
}

fn exit_code(psi: Flow, phi: Flow) -> i32 {
    if partial(psi, phi) {
        3
    } else {
        0
    }
}

/// Embeds the document with the effective inflow filled in, so the report
/// is self-contained and reproducible.
fn embedded_doc(doc: &NetworkDocument, phi: Flow) -> NetworkDocument {
    let mut doc = doc.clone();
    doc.exogenous_flow_veh_per_h = Some(phi);
    doc
}

#[derive(Serialize)]
struct RouteReport {
    route: usize,
    share: f64,
    class: &'static str,
    nominal_veh_per_h: f64,
    admitted_veh_per_h: f64,
    time_h: Option<f64>,
    densities_veh_per_km: Vec<f64>,
    inversion_residual_h: f64,
}

/// Builds per-route rows (document order) for a realized assignment.
fn route_reports(
    net: &ParallelNetwork,
    order: &RouteOrder,
    assignment: &TrafficAssignment,
    residuals: Option<&[Hours]>,
) -> Result<Vec<RouteReport>> {
    let mut rows = Vec::with_capacity(net.len());
    for doc_i in 0..net.len() {
        let p = order.sorted_of_doc[doc_i];
        let route = net.route(p);
        let nominal = assignment.nominal()[p];
        let admitted = assignment.realized()[p];
        let time = route_travel_time(route, &assignment.densities()[p], admitted)?;
        rows.push(RouteReport {
            route: doc_i + 1,
            share: assignment.routing().get(p),
            class: classify(route, nominal).tag(),
            nominal_veh_per_h: nominal,
            admitted_veh_per_h: admitted,
            time_h: finite(time),
            densities_veh_per_km: assignment.densities()[p].clone(),
            inversion_residual_h: residuals.map_or(0.0, |r| r[p]),
        });
    }
    Ok(rows)
}

fn route_table(rows: &[RouteReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5}  {:>10}  {:<12} {:>9}  {:>9}  {:>9}  {}",
        "route", "share", "class", "nominal", "admitted", "time_min", "densities_veh_per_km"
    );
    for r in rows {
        let time = r.time_h.map_or("inf".to_string(), |t| fnum(minutes(t)));
        let _ = writeln!(
            out,
            "{:>5}  {:>10.6}  {:<12} {:>9}  {:>9}  {:>9}  {}",
            r.route,
            r.share,
            r.class,
            fnum(r.nominal_veh_per_h),
            fnum(r.admitted_veh_per_h),
            time,
            join_nums(&r.densities_veh_per_km),
        );
    }
    out
}

fn kv(out: &mut String, label: &str, value: impl AsRef<str>) {
    let _ = writeln!(out, "{:<22} {}", label, value.as_ref());
}

/// CSV key/value rows shared by every scalar command: summary pairs first,
/// then per-route vectors.
fn scalar_csv(
    command: &str,
    phi: Flow,
    summary: Vec<(String, String)>,
    rows: &[RouteReport],
) -> String {
    let mut pairs = vec![
        ("command".to_string(), command.to_string()),
        ("phi_veh_per_h".to_string(), fnum(phi)),
    ];
    pairs.extend(summary);
    pairs.push((
        "shares".into(),
        rows.iter()
            .map(|r| fnum(r.share))
            .collect::<Vec<_>>()
            .join(" "),
    ));
    pairs.push((
        "classes".into(),
        rows.iter()
            .map(|r| r.class.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    ));
    pairs.push((
        "nominal_veh_per_h".into(),
        rows.iter()
            .map(|r| fnum(r.nominal_veh_per_h))
            .collect::<Vec<_>>()
            .join(" "),
    ));
    pairs.push((
        "admitted_veh_per_h".into(),
        rows.iter()
            .map(|r| fnum(r.admitted_veh_per_h))
            .collect::<Vec<_>>()
            .join(" "),
    ));
    pairs.push((
        "route_times_h".into(),
        rows.iter()
            .map(|r| r.time_h.map_or("inf".into(), fnum))
            .collect::<Vec<_>>()
            .join(" "),
    ));
    for r in rows {
        pairs.push((
            format!("densities_route_{}_veh_per_km", r.route),
            join_nums(&r.densities_veh_per_km),
        ));
    }
    csv_pairs(&pairs)
}

// ---------------------------------------------------------------------------
// wardrop

#[derive(Serialize)]
struct WardropReport {
    command: &'static str,
    phi_veh_per_h: f64,
    kind: &'static str,
    common_time_h: f64,
    psi_veh_per_h: f64,
    psi_range_veh_per_h: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    saturated_inflow_range_veh_per_h: Option<[f64; 2]>,
    k: usize,
    used_routes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u_route: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j_route: Option<usize>,
    routes: Vec<RouteReport>,
    network: NetworkDocument,
}

fn wardrop_report(
    doc: &NetworkDocument,
    net: &ParallelNetwork,
    phi: Flow,
    we: &WardropSolution,
) -> Result<WardropReport> {
    let order = RouteOrder::of(net);
    let mut used: Vec<usize> = we
        .routing
        .support()
        .iter()
        .map(|&p| order.route_no(p))
        .collect();
    used.sort_unstable();
    Ok(WardropReport {
        command: "wardrop",
        phi_veh_per_h: phi,
        kind: we.kind.tag(),
        common_time_h: we.common_time,
        psi_veh_per_h: we.psi,
        psi_range_veh_per_h: [we.psi_range.0, we.psi_range.1],
        saturated_inflow_range_veh_per_h: we.saturated_inflow_range.map(|(a, b)| [a, b]),
        k: we.indices.k,
        used_routes: used,
        u_route: we.indices.u.map(|u| order.route_no(u)),
        j_route: we.indices.j.map(|j| order.route_no(j)),
        routes: route_reports(net, &order, &we.assignment, Some(&we.residuals))?,
        network: embedded_doc(doc, phi),
    })
}

fn render_wardrop(report: &WardropReport, format: Format, path: &Path) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut summary = vec![
                ("kind".to_string(), report.kind.to_string()),
                ("common_time_h".to_string(), fnum(report.common_time_h)),
                (
                    "common_time_min".to_string(),
                    fnum(minutes(report.common_time_h)),
                ),
                ("psi_veh_per_h".to_string(), fnum(report.psi_veh_per_h)),
                (
                    "psi_range_veh_per_h".to_string(),
                    format!(
                        "{} {}",
                        fnum(report.psi_range_veh_per_h[0]),
                        fnum(report.psi_range_veh_per_h[1])
                    ),
                ),
                ("k".to_string(), report.k.to_string()),
                (
                    "u_route".to_string(),
                    report.u_route.map_or(String::new(), |u| u.to_string()),
                ),
                (
                    "j_route".to_string(),
                    report.j_route.map_or(String::new(), |j| j.to_string()),
                ),
            ];
            if let Some([lo, hi]) = report.saturated_inflow_range_veh_per_h {
                summary.push((
                    "saturated_inflow_range_veh_per_h".to_string(),
                    format!("{} {}", fnum(lo), fnum(hi)),
                ));
            }
            Ok(scalar_csv(
                report.command,
                report.phi_veh_per_h,
                summary,
                &report.routes,
            ))
        }
        Format::Table => {
            let mut out = String::new();
            kv(&mut out, "network", path.display().to_string());
            kv(
                &mut out,
                "exogenous flow",
                format!("{} veh/h", fnum(report.phi_veh_per_h)),
            );
            kv(&mut out, "equilibrium", report.kind);
            kv(
                &mut out,
                "common time",
                format!("{} min", fnum(minutes(report.common_time_h))),
            );
            let psi_line = if report.psi_range_veh_per_h[0] == report.psi_range_veh_per_h[1] {
                format!("{} veh/h", fnum(report.psi_veh_per_h))
            } else {
                format!(
                    "{} veh/h (over all equilibria: {} to {})",
                    fnum(report.psi_veh_per_h),
                    fnum(report.psi_range_veh_per_h[0]),
                    fnum(report.psi_range_veh_per_h[1])
                )
            };
            kv(&mut out, "non-transferred psi", psi_line);
            if let Some([lo, hi]) = report.saturated_inflow_range_veh_per_h {
                kv(
                    &mut out,
                    "saturated-route inflow",
                    format!("{} to {} veh/h", fnum(lo), fnum(hi)),
                );
            }
            kv(
                &mut out,
                "used routes",
                format!(
                    "{} (k = {})",
                    report
                        .used_routes
                        .iter()
                        .map(|r| r.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                    report.k
                ),
            );
            if let Some(u) = report.u_route {
                kv(&mut out, "saturated route u", u.to_string());
            }
            if let Some(j) = report.j_route {
                kv(&mut out, "undercutting route j", j.to_string());
            }
            out.push('\n');
            out.push_str(&route_table(&report.routes));
            Ok(out)
        }
    }
}

fn cmd_wardrop(args: &CommonArgs) -> Result<(String, i32)> {
    let doc = parse_network(&args.network)?;
    let phi = effective_phi(&doc, args.phi)?;
    let net = to_parallel(&doc)?;
    let game = GameInstance::new(net, phi)?;
    let we = wardrop(&game)?;
    let report = wardrop_report(&doc, game.network(), phi, &we)?;
    let out = render_wardrop(&report, args.format, &args.network)?;
    Ok((out, exit_code(we.psi, phi)))
}

// ---------------------------------------------------------------------------
// optimum

#[derive(Serialize)]
struct OptimumReport {
    command: &'static str,
    phi_veh_per_h: f64,
    cost_veh_h: f64,
    routes: Vec<RouteReport>,
    network: NetworkDocument,
}

fn cmd_optimum(args: &CommonArgs) -> Result<(String, i32)> {
    let doc = parse_network(&args.network)?;
    let phi = effective_phi(&doc, args.phi)?;
    let net = to_parallel(&doc)?;
    let game = GameInstance::new(net, phi)?;
    let so = social_optimum(&game)?;
    let order = RouteOrder::of(game.network());
    let report = OptimumReport {
        command: "optimum",
        phi_veh_per_h: phi,
        cost_veh_h: so.cost,
        routes: route_reports(game.network(), &order, &so.assignment, None)?,
        network: embedded_doc(&doc, phi),
    };
    let out = match args.format {
        Format::Json => to_json(&report)?,
        Format::Csv => scalar_csv(
            report.command,
            phi,
            vec![("cost_veh_h".to_string(), fnum(so.cost))],
            &report.routes,
        ),
        Format::Table => {
            let mut out = String::new();
            kv(&mut out, "network", args.network.display().to_string());
            kv(&mut out, "exogenous flow", format!("{} veh/h", fnum(phi)));
            kv(
                &mut out,
                "social-optimum cost",
                format!("{} veh*h", fnum(so.cost)),
            );
            out.push('\n');
            out.push_str(&route_table(&report.routes));
            out
        }
    };
    Ok((out, 0))
}

// ---------------------------------------------------------------------------
// poa

#[derive(Serialize)]
struct PoaReport {
    command: &'static str,
    phi_veh_per_h: f64,
    poa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    undefined_reason: Option<String>,
    we_kind: &'static str,
    we_cost_veh_h: f64,
    so_cost_veh_h: f64,
    psi_veh_per_h: f64,
    network: NetworkDocument,
}

/// Total realized cost (veh*h) of an assignment: admitted flow times
/// travel time, summed over routes.
fn realized_cost(net: &ParallelNetwork, assignment: &TrafficAssignment) -> Result<f64> {
    let mut cost = 0.0;
    for p in 0..net.len() {
        let admitted = assignment.realized()[p];
        if admitted > 0.0 {
            cost +=
                admitted * route_travel_time(net.route(p), &assignment.densities()[p], admitted)?;
        }
    }
    Ok(cost)
}

fn cmd_poa(args: &CommonArgs) -> Result<(String, i32)> {
    let doc = parse_network(&args.network)?;
    let phi = effective_phi(&doc, args.phi)?;
    let net = to_parallel(&doc)?;
    let game = GameInstance::new(net, phi)?;
    let we = wardrop(&game)?;
    let so = social_optimum(&game)?;
    let poa = price_of_anarchy(&game)?;
    let (value, reason) = match poa {
        PriceOfAnarchy::Defined(v) => (Some(v), None),
        PriceOfAnarchy::UndefinedPartialTransfer { psi } => (
            None,
            Some(format!(
                "undefined (partially transferring equilibrium, psi = {} veh/h)",
                fnum(psi)
            )),
        ),
    };
    let report = PoaReport {
        command: "poa",
        phi_veh_per_h: phi,
        poa: value,
        undefined_reason: reason.clone(),
        we_kind: we.kind.tag(),
        we_cost_veh_h: realized_cost(game.network(), &we.assignment)?,
        so_cost_veh_h: so.cost,
        psi_veh_per_h: we.psi,
        network: embedded_doc(&doc, phi),
    };
    let poa_text = match (value, &reason) {
        (Some(v), _) => fnum(v),
        (None, Some(r)) => r.clone(),
        (None, None) => unreachable!(),
    };
    let out = match args.format {
        Format::Json => to_json(&report)?,
        Format::Csv => csv_pairs(&[
            ("command".to_string(), "poa".to_string()),
            ("phi_veh_per_h".to_string(), fnum(phi)),
            ("poa".to_string(), value.map_or(String::new(), fnum)),
            (
                "undefined_reason".to_string(),
                reason.clone().unwrap_or_default(),
            ),
            ("we_kind".to_string(), report.we_kind.to_string()),
            ("we_cost_veh_h".to_string(), fnum(report.we_cost_veh_h)),
            ("so_cost_veh_h".to_string(), fnum(report.so_cost_veh_h)),
            ("psi_veh_per_h".to_string(), fnum(report.psi_veh_per_h)),
        ]),
        Format::Table => {
            let mut out = String::new();
            kv(&mut out, "network", args.network.display().to_string());
            kv(&mut out, "exogenous flow", format!("{} veh/h", fnum(phi)));
            kv(&mut out, "equilibrium", report.we_kind);
            kv(
                &mut out,
                "equilibrium cost",
                format!("{} veh*h", fnum(report.we_cost_veh_h)),
            );
            kv(
                &mut out,
                "social-optimum cost",
                format!("{} veh*h", fnum(report.so_cost_veh_h)),
            );
            kv(&mut out, "price of anarchy", &poa_text);
            out
        }
    };
    Ok((out, exit_code(we.psi, phi)))
}

// ---------------------------------------------------------------------------
// assign

#[derive(Serialize)]
struct FamilyChoiceReport {
    /// 1-based link position along the route holding the free interval.
    frontier_link: usize,
    density_interval_veh_per_km: [f64; 2],
}

#[derive(Serialize)]
struct AssignRouteReport {
    route: usize,
    share: f64,
    class: &'static str,
    nominal_veh_per_h: f64,
    transferred_veh_per_h: f64,
    time_h: Option<f64>,
    densities_veh_per_km: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<Vec<FamilyChoiceReport>>,
}

#[derive(Serialize)]
struct AssignReport {
    command: &'static str,
    phi_veh_per_h: f64,
    psi_veh_per_h: f64,
    fully_transferring: bool,
    routes: Vec<AssignRouteReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    network: NetworkDocument,
}

fn cmd_assign(args: &AssignArgs) -> Result<(String, i32)> {
    let doc = parse_network(&args.common.network)?;
    let phi = effective_phi(&doc, args.common.phi)?;
    let net = to_parallel(&doc)?;
    let order = RouteOrder::of(&net);

    let doc_shares = parse_ratios(&args.ratios)?;
    if doc_shares.len() != net.len() {
        return Err(Error::ShareCountMismatch {
            expected: net.len(),
            got: doc_shares.len(),
        });
    }
    let sorted_shares: Vec<f64> = order.doc_of_sorted.iter().map(|&d| doc_shares[d]).collect();
    let routing = RoutingVector::new(sorted_shares)?;

    let family = consistent_density(&net, phi, &routing)?;
    let (transferred, psi) = transfer_accounting(&net, phi, &routing)?;
    let assignment =
        TrafficAssignment::new(&net, phi, routing.clone(), family.canonical_densities())?;

    let mut routes = Vec::with_capacity(net.len());
    for doc_i in 0..net.len() {
        let p = order.sorted_of_doc[doc_i];
        let route = net.route(p);
        let nominal = assignment.nominal()[p];
        let time = route_travel_time(route, &assignment.densities()[p], assignment.realized()[p])?;
        let family_rows = match &family.per_route[p] {
            RouteDensities::Unique(_) => None,
            RouteDensities::Family { choices, .. } => Some(
                choices
                    .iter()
                    .map(|c| FamilyChoiceReport {
                        frontier_link: c.frontier + 1,
                        density_interval_veh_per_km: [c.interval.0, c.interval.1],
                    })
                    .collect(),
            ),
        };
        routes.push(AssignRouteReport {
            route: doc_i + 1,
            share: routing.get(p),
            class: classify(route, nominal).tag(),
            nominal_veh_per_h: nominal,
            transferred_veh_per_h: transferred[p],
            time_h: finite(time),
            densities_veh_per_km: assignment.densities()[p].clone(),
            family: family_rows,
        });
    }
    let report = AssignReport {
        command: "assign",
        phi_veh_per_h: phi,
        psi_veh_per_h: psi,
        fully_transferring: !partial(psi, phi),
        routes,
        note: doc.description.clone(),
        network: embedded_doc(&doc, phi),
    };

    let out = match args.common.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut pairs = vec![
                ("command".to_string(), "assign".to_string()),
                ("phi_veh_per_h".to_string(), fnum(phi)),
                ("psi_veh_per_h".to_string(), fnum(psi)),
                (
                    "fully_transferring".to_string(),
                    report.fully_transferring.to_string(),
                ),
                (
                    "shares".to_string(),
                    report
                        .routes
                        .iter()
                        .map(|r| fnum(r.share))
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
                (
                    "classes".to_string(),
                    report
                        .routes
                        .iter()
                        .map(|r| r.class.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
                (
                    "nominal_veh_per_h".to_string(),
                    report
                        .routes
                        .iter()
                        .map(|r| fnum(r.nominal_veh_per_h))
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
                (
                    "transferred_veh_per_h".to_string(),
                    report
                        .routes
                        .iter()
                        .map(|r| fnum(r.transferred_veh_per_h))
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
                (
                    "route_times_h".to_string(),
                    report
                        .routes
                        .iter()
                        .map(|r| r.time_h.map_or("inf".into(), fnum))
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
            ];
            for r in &report.routes {
                pairs.push((
                    format!("densities_route_{}_veh_per_km", r.route),
                    join_nums(&r.densities_veh_per_km),
                ));
            }
            if let Some(note) = &report.note {
                pairs.push(("note".to_string(), note.clone()));
            }
            csv_pairs(&pairs)
        }
        Format::Table => {
            let mut out = String::new();
            kv(
                &mut out,
                "network",
                args.common.network.display().to_string(),
            );
            kv(&mut out, "exogenous flow", format!("{} veh/h", fnum(phi)));
            kv(
                &mut out,
                "non-transferred psi",
                format!("{} veh/h", fnum(psi)),
            );
            kv(
                &mut out,
                "fully transferring",
                report.fully_transferring.to_string(),
            );
            out.push('\n');
            let _ = writeln!(
                out,
                "{:>5}  {:>10}  {:<12} {:>9}  {:>11}  {:>9}  {}",
                "route",
                "share",
                "class",
                "nominal",
                "transferred",
                "time_min",
                "densities_veh_per_km"
            );
            for r in &report.routes {
                let time = r.time_h.map_or("inf".to_string(), |t| fnum(minutes(t)));
                let _ = writeln!(
                    out,
                    "{:>5}  {:>10.6}  {:<12} {:>9}  {:>11}  {:>9}  {}",
                    r.route,
                    r.share,
                    r.class,
                    fnum(r.nominal_veh_per_h),
                    fnum(r.transferred_veh_per_h),
                    time,
                    join_nums(&r.densities_veh_per_km),
                );
            }
            let mut family_lines = String::new();
            for r in &report.routes {
                if let Some(choices) = &r.family {
                    for c in choices {
                        let _ = writeln!(
                            family_lines,
                            "  route {}: link {} may hold any density in [{}, {}] veh/km (upstream links congested, downstream free)",
                            r.route,
                            c.frontier_link,
                            fnum(c.density_interval_veh_per_km[0]),
                            fnum(c.density_interval_veh_per_km[1]),
                        );
                    }
                }
            }
            if !family_lines.is_empty() {
                out.push('\n');
                out.push_str("equivalent density choices (canonical shown above is all-free):\n");
                out.push_str(&family_lines);
            }
            if let Some(note) = &report.note {
                out.push('\n');
                let _ = writeln!(out, "note: {note}");
            }
            out
        }
    };
    Ok((out, exit_code(psi, phi)))
}

// ---------------------------------------------------------------------------
// sweep

fn cmd_sweep(args: &SweepArgs) -> Result<(String, i32)> {
    let doc = parse_network(&args.network)?;
    let net = to_parallel(&doc)?;
    let order = RouteOrder::of(&net);
    if !(args.phi_from > 0.0) || !args.phi_from.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "--phi-from must be positive, got {}",
            args.phi_from
        )));
    }
    if !(args.phi_to >= args.phi_from) || !args.phi_to.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "--phi-to must be at least --phi-from, got {}",
            args.phi_to
        )));
    }
    if args.steps == 0 {
        return Err(Error::InvalidArgument("--steps must be positive".into()));
    }

    let min_cut = net.min_cut_capacity();
    let mut csv = csv_row(&[
        "phi".into(),
        "we_tag".into(),
        "common_time_min".into(),
        "psi_min".into(),
        "psi_max".into(),
        "poa_or_blank".into(),
        "k".into(),
        "u_or_blank".into(),
        "j_or_blank".into(),
    ]);
    let mut flagged = false;
    for i in 0..args.steps {
        let phi = if args.steps == 1 {
            args.phi_from
        } else {
            args.phi_from + (args.phi_to - args.phi_from) * i as f64 / (args.steps - 1) as f64
        };
        if !num::le(phi, min_cut, REL_TOL) {
            flagged = true;
            csv.push_str(&csv_row(&[
                fnum(phi),
                "outside-capacity".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]));
            continue;
        }
        let game = GameInstance::new(net.clone(), phi)?;
        let we = wardrop(&game)?;
        let poa = match price_of_anarchy(&game)? {
            PriceOfAnarchy::Defined(v) => fnum(v),
            PriceOfAnarchy::UndefinedPartialTransfer { .. } => String::new(),
        };
        csv.push_str(&csv_row(&[
            fnum(phi),
            we.kind.tag().into(),
            fnum(minutes(we.common_time)),
            fnum(we.psi_range.0),
            fnum(we.psi_range.1),
            poa,
            we.indices.k.to_string(),
            we.indices
                .u
                .map_or(String::new(), |u| order.route_no(u).to_string()),
            we.indices
                .j
                .map_or(String::new(), |j| order.route_no(j).to_string()),
        ]));
    }
    let out = write_output(args.out.as_deref(), &csv)?;
    Ok((out, if flagged { 2 } else { 0 }))
}

// ---------------------------------------------------------------------------
// diagram

fn cmd_diagram(args: &DiagramArgs) -> Result<(String, i32)> {
    let doc = parse_network(&args.network)?;
    let record = doc
        .links
        .iter()
        .find(|l| l.id == args.link)
        .ok_or_else(|| Error::UnknownLink {
            id: args.link.clone(),
        })?;
    let link = record.to_link()?;
    if args.samples < 2 {
        return Err(Error::InvalidArgument(
            "--samples must be at least 2".into(),
        ));
    }

    let mut csv = csv_row(&[
        "x".into(),
        "supply".into(),
        "demand".into(),
        "flow".into(),
        "travel_time".into(),
    ]);
    let n = args.samples;
    for i in 0..n {
        let x = link.jam_density() * i as f64 / (n - 1) as f64;
        let supply = link.supply(x)?;
        let demand = link.demand(x)?;
        let flow = supply.min(demand);
        let time = if x == 0.0 {
            link.free_flow_time()
        } else if flow == 0.0 {
            f64::INFINITY
        } else {
            link.length() * x / flow
        };
        csv.push_str(&csv_row(&[
            fnum(x),
            fnum(supply),
            fnum(demand),
            fnum(flow),
            fnum(time),
        ]));
    }
    let out = write_output(args.out.as_deref(), &csv)?;
    Ok((out, 0))
}

// ---------------------------------------------------------------------------
// demo-wheatstone

#[derive(Serialize)]
struct SurvivorReport {
    shares: Vec<f64>,
    violation_h: f64,
    psi_veh_per_h: f64,
    times_min: Vec<Option<f64>>,
    admitted_veh_per_h: Vec<f64>,
}

#[derive(Serialize)]
struct ReferenceReport {
    shares: Vec<f64>,
    converged: bool,
    psi_veh_per_h: f64,
    violation_h: f64,
    times_min: Vec<Option<f64>>,
    admitted_veh_per_h: Vec<f64>,
    link_densities_veh_per_km: Vec<f64>,
}

#[derive(Serialize)]
struct DemoReport {
    command: &'static str,
    phi_veh_per_h: f64,
    resolution: String,
    grid_denominator: u32,
    eps_h: f64,
    free_flow_times_min: Vec<f64>,
    survivor_count: usize,
    survivors: Vec<SurvivorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<ReferenceReport>,
    note: String,
    network: NetworkDocument,
}

const DEMO_NOTE: &str = "The reference static solution for this crossing network at 1600 veh/h \
puts shares (0, 9/16, 7/16) on the three routes, quotes 51.41 veh/km on link 2, and holds back \
about 100 veh/h. That density does not solve link 2's flow-density relation at the implied \
700 veh/h (the consistent values are 17.5 veh/km free-flow or 117.5 veh/km congested), and under \
the merge dynamics used here the quoted split leaves the used routes with unequal travel times. \
The search below agrees with the reference qualitatively: route 1 goes unused and roughly \
100 veh/h never enter the network.";

/// Travel-time spread of a searched state: worst used-route time minus the
/// best time over all routes (so an unused faster route counts against it).
fn state_violation(shares: &[f64], times: &[Hours]) -> Hours {
    let mut max_used = f64::NEG_INFINITY;
    let mut min_all = f64::INFINITY;
    for (p, &t) in times.iter().enumerate() {
        min_all = min_all.min(t);
        if shares[p] > 0.0 {
            max_used = max_used.max(t);
        }
    }
    if !max_used.is_finite() {
        return f64::INFINITY;
    }
    (max_used - min_all).max(0.0)
}

fn cmd_demo_wheatstone(args: &DemoArgs) -> Result<(String, i32)> {
    let net = GeneralNetwork::wheatstone();
    let denominator = parse_resolution(&args.resolution)?;
    if !(args.phi >= 0.0) || !args.phi.is_finite() {
        return Err(Error::NegativeInflow { phi: args.phi });
    }
    let free_times: Vec<f64> = net
        .routes()
        .iter()
        .map(|r| {
            minutes(
                r.iter()
                    .map(|&l| net.links()[l].link().free_flow_time())
                    .sum(),
            )
        })
        .collect();
    let doc = document_from_demo(&net, args.phi);

    let options = SteadyOptions {
        max_steps: 20_000,
        ..SteadyOptions::default()
    };
    let (survivors, reference) = if args.phi == 0.0 {
        (Vec::new(), None)
    } else {
        let hits = search_equilibrium(&net, args.phi, denominator, DEMO_EPS, options.clone())?;
        let survivors = hits
            .iter()
            .map(|h| SurvivorReport {
                shares: h.routing.shares().to_vec(),
                violation_h: h.violation,
                psi_veh_per_h: h.psi,
                times_min: h.times.iter().map(|&t| finite(t).map(minutes)).collect(),
                admitted_veh_per_h: h.admitted.clone(),
            })
            .collect();

        let ref_shares = vec![0.0, 9.0 / 16.0, 7.0 / 16.0];
        let routing = RoutingVector::new(ref_shares.clone())?;
        let state = steady_state(&net, args.phi, &routing, options)?;
        let times = general_route_times(&net, &state);
        let reference = ReferenceReport {
            shares: ref_shares.clone(),
            converged: state.converged,
            psi_veh_per_h: state.psi,
            violation_h: state_violation(&ref_shares, &times),
            times_min: times.iter().map(|&t| finite(t).map(minutes)).collect(),
            admitted_veh_per_h: state.admitted.clone(),
            link_densities_veh_per_km: state.link_density.clone(),
        };
        (survivors, Some(reference))
    };

    let report = DemoReport {
        command: "demo-wheatstone",
        phi_veh_per_h: args.phi,
        resolution: args.resolution.clone(),
        grid_denominator: denominator,
        eps_h: DEMO_EPS,
        free_flow_times_min: free_times,
        survivor_count: survivors.len(),
        survivors,
        reference,
        note: DEMO_NOTE.to_string(),
        network: doc,
    };

    let code = report
        .survivors
        .first()
        .map_or(0, |best| exit_code(best.psi_veh_per_h, args.phi));
    let out = match args.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut csv = csv_row(&[
                "rank".into(),
                "shares".into(),
                "violation_h".into(),
                "psi_veh_per_h".into(),
                "times_min".into(),
                "admitted_veh_per_h".into(),
            ]);
            for (rank, s) in report.survivors.iter().enumerate() {
                csv.push_str(&csv_row(&[
                    (rank + 1).to_string(),
                    join_nums(&s.shares),
                    fnum(s.violation_h),
                    fnum(s.psi_veh_per_h),
                    s.times_min
                        .iter()
                        .map(|t| t.map_or("inf".into(), fnum))
                        .collect::<Vec<_>>()
                        .join(" "),
                    join_nums(&s.admitted_veh_per_h),
                ]));
            }
            csv
        }
        Format::Table => render_demo_table(&report),
    };
    Ok((out, code))
}

fn document_from_demo(net: &GeneralNetwork, phi: f64) -> NetworkDocument {
    document::document_from_general(
        net,
        Some(
            "Crossing network: two outer routes and one route through a low-capacity \
             shortcut link between them."
                .into(),
        ),
        Some(phi),
    )
}

fn render_demo_table(report: &DemoReport) -> String {
    let mut out = String::new();
    kv(&mut out, "network", "built-in crossing demo");
    kv(
        &mut out,
        "exogenous flow",
        format!("{} veh/h", fnum(report.phi_veh_per_h)),
    );
    kv(
        &mut out,
        "grid",
        format!("1/{} on the 3-route simplex", report.grid_denominator),
    );
    kv(
        &mut out,
        "tolerance",
        format!("{} min", fnum(minutes(report.eps_h))),
    );
    kv(
        &mut out,
        "free-flow times",
        format!("{} min", join_nums(&report.free_flow_times_min)),
    );
    kv(&mut out, "survivors", report.survivor_count.to_string());

    if report.phi_veh_per_h == 0.0 {
        out.push('\n');
        out.push_str("zero exogenous flow: the network stays empty.\n");
        return out;
    }

    if let Some(best) = report.survivors.first() {
        out.push('\n');
        out.push_str("best state found (least time spread, then least held-back demand):\n");
        kv(&mut out, "  shares", join_nums(&best.shares));
        kv(
            &mut out,
            "  admitted",
            format!("{} veh/h", join_nums(&best.admitted_veh_per_h)),
        );
        kv(
            &mut out,
            "  non-transferred psi",
            format!("{} veh/h", fnum(best.psi_veh_per_h)),
        );
        kv(
            &mut out,
            "  route times",
            format!(
                "{} min",
                best.times_min
                    .iter()
                    .map(|t| t.map_or("inf".into(), fnum))
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
        );
        kv(
            &mut out,
            "  time spread",
            format!("{} min", fnum(minutes(best.violation_h))),
        );

        out.push('\n');
        let shown = report.survivors.len().min(10);
        let _ = writeln!(
            out,
            "{:>4}  {:<22} {:>12}  {:>8}  {}",
            "rank", "shares", "spread_min", "psi", "times_min"
        );
        for (rank, s) in report.survivors.iter().take(shown).enumerate() {
            let _ = writeln!(
                out,
                "{:>4}  {:<22} {:>12}  {:>8}  {}",
                rank + 1,
                join_nums(&s.shares),
                fnum(minutes(s.violation_h)),
                fnum(s.psi_veh_per_h),
                s.times_min
                    .iter()
                    .map(|t| t.map_or("inf".into(), fnum))
                    .collect::<Vec<_>>()
                    .join(" "),
            );
        }
        if report.survivors.len() > shown {
            let _ = writeln!(out, "  ... and {} more", report.survivors.len() - shown);
        }
    } else {
        out.push('\n');
        out.push_str("no state on the grid met the tolerance.\n");
    }

    if let Some(r) = &report.reference {
        out.push('\n');
        out.push_str("reference split (0, 9/16, 7/16), simulated:\n");
        kv(
            &mut out,
            "  admitted",
            format!("{} veh/h", join_nums(&r.admitted_veh_per_h)),
        );
        kv(
            &mut out,
            "  non-transferred psi",
            format!("{} veh/h", fnum(r.psi_veh_per_h)),
        );
        kv(
            &mut out,
            "  route times",
            format!(
                "{} min",
                r.times_min
                    .iter()
                    .map(|t| t.map_or("inf".into(), fnum))
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
        );
        kv(
            &mut out,
            "  link densities",
            format!("{} veh/km", join_nums(&r.link_densities_veh_per_km)),
        );
    }

    out.push('\n');
    let _ = writeln!(out, "note: {}", report.note);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shares_parse_as_decimals_and_fractions() {
        assert_eq!(parse_ratios("0.75,0.25").unwrap(), vec![0.75, 0.25]);
        assert_eq!(
            parse_ratios("1/3, 2/3").unwrap(),
            vec![1.0 / 3.0, 2.0 / 3.0]
        );
        assert!(parse_ratios("a,b").is_err());
        assert!(parse_ratios("1/0").is_err());
    }

    #[test]
    fn resolutions_parse_to_denominators() {
        assert_eq!(parse_resolution("1/64").unwrap(), 64);
        assert_eq!(parse_resolution("0.015625").unwrap(), 64);
        assert_eq!(parse_resolution("1").unwrap(), 1);
        assert!(parse_resolution("2/64").is_err());
        assert!(parse_resolution("0").is_err());
        assert!(parse_resolution("1/0").is_err());
        assert!(parse_resolution("-0.5").is_err());
    }

    #[test]
    fn csv_fields_escape_commas_and_quotes() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_row(&["a,b".into(), "c".into()]), "\"a,b\",c\r\n");
    }

    #[test]
    fn minutes_round_cleanly() {
        assert_eq!(minutes(0.2), 12.0);
        assert_eq!(minutes(0.1875), 11.25);
        assert!(minutes(f64::INFINITY).is_infinite());
        assert_eq!(fnum(minutes(0.2)), "12");
    }
}
