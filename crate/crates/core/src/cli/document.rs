//! The JSON network interchange format and its conversion into validated
//! networks.
//!
//! A document carries a schema version, a network kind, links with
//! explicitly unit-suffixed parameters, routes as ordered lists of link
//! ids, and an optional default exogenous flow. Parallel documents leave
//! node fields out entirely; general documents name each link's tail and
//! head node plus the origin and destination.

use crate::error::{Error, Result};
use crate::fundamental::{Link, LinkParams, ParallelNetwork, Route};
use crate::generalnet::{GeneralLink, GeneralNetwork};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Parallel,
    General,
}

impl NetworkKind {
    pub fn tag(self) -> &'static str {
        match self {
            NetworkKind::Parallel => "parallel",
            NetworkKind::General => "general",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head: Option<String>,
    pub capacity_veh_per_h: f64,
    pub jam_density_veh_per_km: f64,
    pub free_speed_km_per_h: f64,
    pub length_km: f64,
}

impl LinkRecord {
    pub fn to_link(&self) -> Result<Link> {
        Link::new(LinkParams {
            capacity: self.capacity_veh_per_h,
            jam_density: self.jam_density_veh_per_km,
            free_speed: self.free_speed_km_per_h,
            length: self.length_km,
        })
    }

    pub fn from_link(id: &str, link: &Link) -> Self {
        LinkRecord {
            id: id.to_string(),
            tail: None,
            head: None,
            capacity_veh_per_h: link.capacity(),
            jam_density_veh_per_km: link.jam_density(),
            free_speed_km_per_h: link.free_speed(),
            length_km: link.length(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub schema_version: String,
    pub kind: NetworkKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub destination: Option<String>,
    pub links: Vec<LinkRecord>,
    /// Routes as ordered lists of link ids.
    pub routes: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exogenous_flow_veh_per_h: Option<f64>,
}

/// Reads and validates a network document from a JSON file.
pub fn parse_network(path: &Path) -> Result<NetworkDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let doc: NetworkDocument = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    validate_document(&doc)?;
    Ok(doc)
}

/// Structural checks beyond what serde enforces: schema version, and the
/// node fields matching the declared kind.
pub fn validate_document(doc: &NetworkDocument) -> Result<()> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::UnsupportedSchema {
            found: doc.schema_version.clone(),
        });
    }
    match doc.kind {
        NetworkKind::Parallel => {
            for l in &doc.links {
                if l.tail.is_some() {
                    return Err(Error::UnexpectedField {
                        field: format!("links[{}].tail", l.id),
                        kind: "parallel",
                    });
                }
                if l.head.is_some() {
                    return Err(Error::UnexpectedField {
                        field: format!("links[{}].head", l.id),
                        kind: "parallel",
                    });
                }
            }
            if doc.origin.is_some() {
                return Err(Error::UnexpectedField {
                    field: "origin".into(),
                    kind: "parallel",
                });
            }
            if doc.destination.is_some() {
                return Err(Error::UnexpectedField {
                    field: "destination".into(),
                    kind: "parallel",
                });
            }
        }
        NetworkKind::General => {
            for l in &doc.links {
                if l.tail.is_none() {
                    return Err(Error::MissingField {
                        field: format!("links[{}].tail", l.id),
                        kind: "general",
                    });
                }
                if l.head.is_none() {
                    return Err(Error::MissingField {
                        field: format!("links[{}].head", l.id),
                        kind: "general",
                    });
                }
            }
            if doc.origin.is_none() {
                return Err(Error::MissingField {
                    field: "origin".into(),
                    kind: "general",
                });
            }
            if doc.destination.is_none() {
                return Err(Error::MissingField {
                    field: "destination".into(),
                    kind: "general",
                });
            }
        }
    }
    Ok(())
}

/// Builds the validated parallel network of a `kind = parallel` document.
/// Every link must appear on exactly one route.
pub fn to_parallel(doc: &NetworkDocument) -> Result<ParallelNetwork> {
    if doc.kind != NetworkKind::Parallel {
        return Err(Error::KindMismatch {
            found: doc.kind.tag(),
            expected: "parallel",
        });
    }
    let mut by_id = std::collections::HashMap::new();
    for record in &doc.links {
        if by_id.insert(record.id.as_str(), record).is_some() {
            return Err(Error::DuplicateLinkId {
                id: record.id.clone(),
            });
        }
    }
    let mut used = std::collections::HashMap::new();
    let mut routes = Vec::with_capacity(doc.routes.len());
    for ids in &doc.routes {
        let mut links = Vec::with_capacity(ids.len());
        for id in ids {
            let record = *by_id
                .get(id.as_str())
                .ok_or_else(|| Error::UnknownLink { id: id.clone() })?;
            if used.insert(id.as_str(), ()).is_some() {
                return Err(Error::LinkSharedBetweenRoutes { id: id.clone() });
            }
            links.push(record.to_link()?);
        }
        routes.push(Route::new(links)?);
    }
    for record in &doc.links {
        if !used.contains_key(record.id.as_str()) {
            return Err(Error::LinkOnNoRoute {
                id: record.id.clone(),
            });
        }
    }
    ParallelNetwork::new(routes)
}

/// Builds the validated general network of a `kind = general` document.
pub fn to_general(doc: &NetworkDocument) -> Result<GeneralNetwork> {
    if doc.kind != NetworkKind::General {
        return Err(Error::KindMismatch {
            found: doc.kind.tag(),
            expected: "general",
        });
    }
    let mut links = Vec::with_capacity(doc.links.len());
    for record in &doc.links {
        links.push(GeneralLink::new(
            record.id.clone(),
            record.tail.clone().expect("validated"),
            record.head.clone().expect("validated"),
            record.to_link()?,
        ));
    }
    GeneralNetwork::new(
        links,
        doc.routes.clone(),
        doc.origin.clone().expect("validated"),
        doc.destination.clone().expect("validated"),
    )
}

/// Renders a general network back into a document (used by the built-in
/// demo instance so its reports embed a reusable network file).
pub fn document_from_general(
    net: &GeneralNetwork,
    description: Option<String>,
    exogenous_flow: Option<f64>,
) -> NetworkDocument {
    NetworkDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        kind: NetworkKind::General,
        description,
        origin: Some(net.origin().to_string()),
        destination: Some(net.destination().to_string()),
        links: net
            .links()
            .iter()
            .map(|gl| {
                let mut r = LinkRecord::from_link(gl.id(), gl.link());
                r.tail = Some(gl.tail().to_string());
                r.head = Some(gl.head().to_string());
                r
            })
            .collect(),
        routes: net
            .routes()
            .iter()
            .map(|route| {
                route
                    .iter()
                    .map(|&l| net.links()[l].id().to_string())
                    .collect()
            })
            .collect(),
        exogenous_flow_veh_per_h: exogenous_flow,
    }
}
