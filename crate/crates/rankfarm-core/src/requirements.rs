//! The end user's side of the template pair: functional requirements,
//! requested QoS values, and weight preferences.
//!
//! Requested values for ratio-tendency attributes (inequalities like "< 1 $")
//! are stored and echoed in reports but never enter matrix construction -
//! pairwise ratios use only the offered values. Plain-number targets are
//! consumed by close/exact tendencies.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{QosHierarchy, ServiceModel, SoftwareVersion};
use crate::error::{from_json_err, Error};
use crate::Result;

/// Direction of an inequality-form requested value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lt,
    Gt,
}

/// A requested QoS value: either a plain target or an inequality bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RequestedValue {
    Target {
        value: f64,
    },
    Bound {
        bound: f64,
        direction: Direction,
    },
}

impl RequestedValue {
    /// The plain target, if this is one. Bounds have no target semantics.
    pub fn target(&self) -> Option<f64> {
        match self {
            RequestedValue::Target { value } => Some(*value),
            RequestedValue::Bound { .. } => None,
        }
    }
}

/// Minimum render node configuration; zero fields mean no constraint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodeRequirements {
    pub memory_gb: f64,
    pub cpu_cores: u32,
    pub disk_gb: f64,
    /// True if a GPU node is required.
    pub gpu: bool,
}

/// Requested service model; `Any` places no constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ModelRequirement {
    #[serde(rename = "IaaS")]
    IaaS,
    #[serde(rename = "PaaS")]
    PaaS,
    #[serde(rename = "any")]
    #[default]
    Any,
}

impl ModelRequirement {
    pub fn accepts(self, model: ServiceModel) -> bool {
        match self {
            ModelRequirement::Any => true,
            ModelRequirement::IaaS => model == ServiceModel::IaaS,
            ModelRequirement::PaaS => model == ServiceModel::PaaS,
        }
    }
}

/// Hard functional requirements; empty sets place no constraint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionalRequirements {
    #[serde(rename = "software")]
    pub required_software: BTreeSet<SoftwareVersion>,
    #[serde(rename = "engines")]
    pub required_engines: BTreeSet<String>,
    pub min_node: NodeRequirements,
    #[serde(rename = "model")]
    pub required_model: ModelRequirement,
}

/// Everything the user asks for: functional constraints, requested QoS
/// values, and optional weight overrides applied before ranking.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RequirementSet {
    pub functional: FunctionalRequirements,
    #[serde(rename = "qos_requested")]
    pub requested_qos: BTreeMap<String, RequestedValue>,
    #[serde(rename = "weights")]
    pub weight_overrides: BTreeMap<String, f64>,
}

impl RequirementSet {
    /// Parses and validates a requirements template against the hierarchy.
    pub fn from_json(text: &str, hierarchy: &QosHierarchy) -> Result<RequirementSet> {
        let set: RequirementSet =
            serde_json::from_str(text).map_err(|e| from_json_err(e, "requirements template"))?;
        set.validate(hierarchy)?;
        Ok(set)
    }

    /// Checks that every referenced attribute and override node exists and
    /// that overrides lie in (0, 1].
    pub fn validate(&self, hierarchy: &QosHierarchy) -> Result<()> {
        for attr in self.requested_qos.keys() {
            if hierarchy.find_sub(attr).is_none() {
                return Err(Error::UnknownAttribute(format!(
                    "{attr} (requested QoS value)"
                )));
            }
        }
        for (node, &w) in &self.weight_overrides {
            if !hierarchy.contains_node(node) {
                return Err(Error::UnknownAttribute(format!("{node} (weight override)")));
            }
            if !(w.is_finite() && w > 0.0 && w <= 1.0) {
                return Err(Error::Weight(format!(
                    "override for {node} must lie in (0, 1], got {w}"
                )));
            }
        }
        let n = &self.functional.min_node;
        if n.memory_gb < 0.0 || n.disk_gb < 0.0 {
            return Err(Error::Schema("min_node values must be >= 0".into()));
        }
        Ok(())
    }

    /// The hierarchy with this set's weight overrides applied and all
    /// sibling families renormalized.
    pub fn effective_hierarchy(&self, hierarchy: &QosHierarchy) -> Result<QosHierarchy> {
        if self.weight_overrides.is_empty() {
            return Ok(hierarchy.clone());
        }
        hierarchy.with_weight_overrides(&self.weight_overrides)
    }

    /// Requested target for a close/exact attribute, if one was given.
    pub fn target_for(&self, attribute: &str) -> Option<f64> {
        self.requested_qos.get(attribute).and_then(RequestedValue::target)
    }
}

/// Loads and validates a requirements template file.
pub fn load_requirements(
    path: impl AsRef<Path>,
    hierarchy: &QosHierarchy,
) -> Result<RequirementSet> {
    let text = std::fs::read_to_string(path.as_ref())?;
    RequirementSet::from_json(&text, hierarchy)
}
