//! Functional matching: boolean filtering of the catalog against hard
//! requirements, before any scoring happens.
//!
//! A service matches iff its software versions and render engines are
//! supersets of the required ones, its node configuration meets every
//! minimum, and its delivery model is acceptable. Checks run in a fixed
//! order (software, engines, node, model) and the first failing check
//! determines the rejection reason, so diagnostics are deterministic.

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, ServiceOffering};
use crate::requirements::FunctionalRequirements;

/// Why a service was rejected; the first failing check in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectReason {
    Software,
    Engine,
    NodeConfig,
    Model,
}

/// One rejected service with its primary reason and a human-readable detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub service_id: String,
    pub reason: RejectReason,
    pub detail: String,
}

/// Outcome of functional matching. `matched` preserves catalog order and is
/// disjoint from the rejected ids; together they cover the whole catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub matched: Vec<String>,
    pub rejected: Vec<Rejection>,
}

impl MatchResult {
    pub fn is_empty(&self) -> bool {
        self.matched.is_empty()
    }
}

/// Case-insensitive, whitespace-trimmed name comparison. No semantic
/// version ranges: versions are matched as opaque strings.
fn norm(s: &str) -> String {
    s.trim().to_lowercase()
}

fn check(offering: &ServiceOffering, req: &FunctionalRequirements) -> Option<(RejectReason, String)> {
    for sw in &req.required_software {
        let offered = offering.software_versions.iter().any(|o| {
            norm(&o.name) == norm(&sw.name) && norm(&o.version) == norm(&sw.version)
        });
        if !offered {
            return Some((
                RejectReason::Software,
                format!("missing software {} {}", sw.name, sw.version),
            ));
        }
    }
    for engine in &req.required_engines {
        if !offering.render_engines.iter().any(|e| norm(e) == norm(engine)) {
            return Some((RejectReason::Engine, format!("missing render engine {engine}")));
        }
    }
    let node = &offering.node_config;
    let min = &req.min_node;
    if node.memory_gb < min.memory_gb {
        return Some((
            RejectReason::NodeConfig,
            format!("memory {} GB < required {} GB", node.memory_gb, min.memory_gb),
        ));
    }
    if node.cpu_cores < min.cpu_cores {
        return Some((
            RejectReason::NodeConfig,
            format!("{} cores < required {}", node.cpu_cores, min.cpu_cores),
        ));
    }
    if node.disk_gb < min.disk_gb {
        return Some((
            RejectReason::NodeConfig,
            format!("disk {} GB < required {} GB", node.disk_gb, min.disk_gb),
        ));
    }
    if min.gpu && !node.gpu {
        return Some((RejectReason::NodeConfig, "GPU required but not offered".into()));
    }
    if !req.required_model.accepts(offering.service_model) {
        return Some((
            RejectReason::Model,
            format!("model {:?} not acceptable", offering.service_model),
        ));
    }
    None
}

/// Filters the catalog down to offerings satisfying the functional
/// requirements. An empty result is not an error here; the ranking layer
/// raises it. Pure over its inputs.
pub fn match_offerings(catalog: &Catalog, req: &FunctionalRequirements) -> MatchResult {
    let mut result = MatchResult {
        matched: Vec::new(),
        rejected: Vec::new(),
    };
    for offering in &catalog.offerings {
        match check(offering, req) {
            None => result.matched.push(offering.service_id.clone()),
            Some((reason, detail)) => result.rejected.push(Rejection {
                service_id: offering.service_id.clone(),
                reason,
                detail,
            }),
        }
    }
    result
}
