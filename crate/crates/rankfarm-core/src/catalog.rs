//! File-backed registry of service offerings and the QoS hierarchy.
//!
//! Offerings and requirements are collected in templates with identical
//! fields and units, so values are comparable without conversion: units are
//! opaque labels here. Both template formats are UTF-8 JSON with exact,
//! case-sensitive field names.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{from_json_err, Error};
use crate::Result;

/// Group id for optional QoS attributes.
pub const OPTIONAL_GROUP: &str = "Q_O";
/// Group id for required QoS attributes.
pub const REQUIRED_GROUP: &str = "Q_R";

/// Sibling weights are accepted as already normalized when they sum to 1
/// within this tolerance.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Impact direction of a QoS attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tendency {
    /// Higher values are better.
    Positive,
    /// Lower values are better.
    Negative,
    /// Values nearer the requested target are better.
    Close,
    /// Only the exact requested value is best.
    Exact,
}

impl Tendency {
    /// True for the ratio tendencies whose values must be strictly positive.
    pub fn is_ratio(self) -> bool {
        matches!(self, Tendency::Positive | Tendency::Negative)
    }
}

/// One QoS attribute group (optional vs required attributes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub id: String,
    pub weight: f64,
}

/// A top-level attribute: an aggregate of sub-level attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopAttribute {
    pub name: String,
    pub weight: f64,
    /// Id of the enclosing group.
    pub parent: String,
}

/// A sub-level (leaf) attribute carrying measured QoS values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    /// Free-text unit label, e.g. "Average Time (Sec)" or "$ Per Core Hour".
    pub unit: String,
    pub tendency: Tendency,
    pub weight: f64,
    /// Name of the enclosing top-level attribute.
    pub parent: String,
}

/// The three-tier weight tree: groups, top-level attributes, sub-level
/// attributes. Immutable after load; sibling weights under every parent sum
/// to 1 after the normalization pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QosHierarchy {
    pub groups: Vec<GroupSpec>,
    pub top_level: Vec<TopAttribute>,
    pub sub_level: Vec<AttributeSpec>,
}

/// Whether weight deviations are repaired (with warnings) or rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Renormalize sibling weights that do not sum to 1, reporting a warning
    /// per repaired parent.
    #[default]
    Lenient,
    /// Reject any sibling family whose weights do not sum to 1.
    Strict,
}

// ---------------------------------------------------------------------------
// Hierarchy template file
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HierarchyFile {
    groups: Vec<GroupFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    id: String,
    weight: f64,
    attributes: Vec<TopFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TopFile {
    name: String,
    weight: f64,
    sub: Vec<SubFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubFile {
    name: String,
    weight: f64,
    unit: String,
    tendency: Tendency,
    /// Only "numeric" is supported; fuzzy/multiple/complex value types are
    /// rejected at load.
    value_type: Option<String>,
}

impl QosHierarchy {
    /// Parses and validates a hierarchy template, returning the normalized
    /// hierarchy and any renormalization warnings.
    pub fn from_json(text: &str, mode: LoadMode) -> Result<(Self, Vec<String>)> {
        let file: HierarchyFile =
            serde_json::from_str(text).map_err(|e| from_json_err(e, "hierarchy template"))?;

        if file.groups.is_empty() {
            return Err(Error::Schema("hierarchy has no groups".into()));
        }
        if file.groups.len() > 2 {
            return Err(Error::Schema(format!(
                "hierarchy has {} groups; at most 2 ({OPTIONAL_GROUP}, {REQUIRED_GROUP}) are allowed",
                file.groups.len()
            )));
        }

        let mut hierarchy = QosHierarchy {
            groups: Vec::new(),
            top_level: Vec::new(),
            sub_level: Vec::new(),
        };
        for group in &file.groups {
            if group.id != OPTIONAL_GROUP && group.id != REQUIRED_GROUP {
                return Err(Error::Schema(format!(
                    "unknown group id {:?}; expected {OPTIONAL_GROUP} or {REQUIRED_GROUP}",
                    group.id
                )));
            }
            if group.attributes.is_empty() {
                return Err(Error::Schema(format!("group {} has no attributes", group.id)));
            }
            hierarchy.groups.push(GroupSpec {
                id: group.id.clone(),
                weight: group.weight,
            });
            for top in &group.attributes {
                if top.sub.is_empty() {
                    return Err(Error::Schema(format!(
                        "top-level attribute {} has no sub-level attributes",
                        top.name
                    )));
                }
                hierarchy.top_level.push(TopAttribute {
                    name: top.name.clone(),
                    weight: top.weight,
                    parent: group.id.clone(),
                });
                for sub in &top.sub {
                    if let Some(vt) = &sub.value_type {
                        if vt != "numeric" {
                            return Err(Error::Schema(format!(
                                "attribute {} has unsupported value type {vt:?}; only numeric single values are supported",
                                sub.name
                            )));
                        }
                    }
                    hierarchy.sub_level.push(AttributeSpec {
                        name: sub.name.clone(),
                        unit: sub.unit.clone(),
                        tendency: sub.tendency,
                        weight: sub.weight,
                        parent: top.name.clone(),
                    });
                }
            }
        }

        hierarchy.check_names_unique()?;
        hierarchy.check_weights_positive()?;
        let warnings = hierarchy.normalize(mode)?;
        Ok((hierarchy, warnings))
    }

    /// Serializes back to the hierarchy template format.
    pub fn to_json(&self) -> String {
        let groups: Vec<serde_json::Value> = self
            .groups
            .iter()
            .map(|g| {
                let attributes: Vec<serde_json::Value> = self
                    .tops_under(&g.id)
                    .iter()
                    .map(|t| {
                        let sub: Vec<serde_json::Value> = self
                            .subs_under(&t.name)
                            .iter()
                            .map(|s| {
                                serde_json::json!({
                                    "name": s.name,
                                    "weight": s.weight,
                                    "unit": s.unit,
                                    "tendency": s.tendency,
                                })
                            })
                            .collect();
                        serde_json::json!({"name": t.name, "weight": t.weight, "sub": sub})
                    })
                    .collect();
                serde_json::json!({"id": g.id, "weight": g.weight, "attributes": attributes})
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({ "groups": groups }))
            .expect("hierarchy serialization cannot fail")
    }

    fn check_names_unique(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let names = self
            .groups
            .iter()
            .map(|g| &g.id)
            .chain(self.top_level.iter().map(|t| &t.name))
            .chain(self.sub_level.iter().map(|s| &s.name));
        for name in names {
            if !seen.insert(name.clone()) {
                return Err(Error::Schema(format!("duplicate node name {name:?} in hierarchy")));
            }
        }
        Ok(())
    }

    fn check_weights_positive(&self) -> Result<()> {
        let weights = self
            .groups
            .iter()
            .map(|g| (&g.id, g.weight))
            .chain(self.top_level.iter().map(|t| (&t.name, t.weight)))
            .chain(self.sub_level.iter().map(|s| (&s.name, s.weight)));
        for (name, w) in weights {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Weight(format!("weight of {name} must be > 0, got {w}")));
            }
        }
        Ok(())
    }

    /// Renormalizes every sibling family so that weights under each parent
    /// sum to 1. Lenient mode repairs and reports; strict mode rejects.
    pub(crate) fn normalize(&mut self, mode: LoadMode) -> Result<Vec<String>> {
        fn renorm(
            label: String,
            weights: Vec<&mut f64>,
            mode: LoadMode,
            warnings: &mut Vec<String>,
        ) -> Result<()> {
            let sum: f64 = weights.iter().map(|w| **w).sum();
            if (sum - 1.0).abs() <= WEIGHT_TOL {
                return Ok(());
            }
            match mode {
                LoadMode::Strict => Err(Error::Weight(format!("{label} sum to {sum}, expected 1"))),
                LoadMode::Lenient => {
                    warnings.push(format!("{label} sum to {sum}; renormalized to 1"));
                    for w in weights {
                        *w /= sum;
                    }
                    Ok(())
                }
            }
        }

        let mut warnings = Vec::new();
        renorm(
            "group weights".to_string(),
            self.groups.iter_mut().map(|g| &mut g.weight).collect(),
            mode,
            &mut warnings,
        )?;
        let group_ids: Vec<String> = self.groups.iter().map(|g| g.id.clone()).collect();
        for gid in &group_ids {
            renorm(
                format!("top-level weights under {gid}"),
                self.top_level
                    .iter_mut()
                    .filter(|t| t.parent == *gid)
                    .map(|t| &mut t.weight)
                    .collect(),
                mode,
                &mut warnings,
            )?;
        }
        let top_names: Vec<String> = self.top_level.iter().map(|t| t.name.clone()).collect();
        for top in &top_names {
            renorm(
                format!("sub-level weights under {top}"),
                self.sub_level
                    .iter_mut()
                    .filter(|s| s.parent == *top)
                    .map(|s| &mut s.weight)
                    .collect(),
                mode,
                &mut warnings,
            )?;
        }
        Ok(warnings)
    }

    /// Top-level attributes under a group, in declaration order.
    pub fn tops_under(&self, group_id: &str) -> Vec<&TopAttribute> {
        self.top_level.iter().filter(|t| t.parent == group_id).collect()
    }

    /// Sub-level attributes under a top-level attribute, in declaration order.
    pub fn subs_under(&self, top_name: &str) -> Vec<&AttributeSpec> {
        self.sub_level.iter().filter(|s| s.parent == top_name).collect()
    }

    pub fn find_sub(&self, name: &str) -> Option<&AttributeSpec> {
        self.sub_level.iter().find(|s| s.name == name)
    }

    /// True if `name` names any node (group, top-level, or sub-level).
    pub fn contains_node(&self, name: &str) -> bool {
        self.groups.iter().any(|g| g.id == name)
            || self.top_level.iter().any(|t| t.name == name)
            || self.sub_level.iter().any(|s| s.name == name)
    }

    /// Returns a copy with the given node weights replaced. Overridden
    /// weights are taken as-is; the non-overridden siblings in each touched
    /// family are rescaled to fill the remainder, so re-applying the same
    /// overrides is a no-op. Keys must name existing nodes and weights must
    /// lie in (0, 1].
    pub fn with_weight_overrides(&self, overrides: &BTreeMap<String, f64>) -> Result<QosHierarchy> {
        for (name, &w) in overrides {
            if !self.contains_node(name) {
                return Err(Error::UnknownAttribute(format!(
                    "weight override names unknown node {name}"
                )));
            }
            if !(w.is_finite() && w > 0.0 && w <= 1.0) {
                return Err(Error::Weight(format!(
                    "override for {name} must lie in (0, 1], got {w}"
                )));
            }
        }

        fn apply_family(
            label: &str,
            mut members: Vec<(&str, &mut f64)>,
            overrides: &BTreeMap<String, f64>,
        ) -> Result<()> {
            let flags: Vec<bool> = members
                .iter()
                .map(|(name, _)| overrides.contains_key(*name))
                .collect();
            if !flags.iter().any(|&f| f) {
                return Ok(());
            }
            let mut overridden_sum = 0.0;
            let mut rest_sum = 0.0;
            for ((name, w), &is_overridden) in members.iter_mut().zip(&flags) {
                if is_overridden {
                    **w = overrides[*name];
                    overridden_sum += **w;
                } else {
                    rest_sum += **w;
                }
            }
            if rest_sum == 0.0 {
                // Every sibling overridden: renormalize among themselves.
                for (_, w) in members.iter_mut() {
                    **w /= overridden_sum;
                }
                return Ok(());
            }
            let remaining = 1.0 - overridden_sum;
            if remaining <= 0.0 {
                return Err(Error::Weight(format!(
                    "overrides for {label} sum to {overridden_sum}, leaving no weight for the remaining siblings"
                )));
            }
            for ((_, w), &is_overridden) in members.iter_mut().zip(&flags) {
                if !is_overridden {
                    **w *= remaining / rest_sum;
                }
            }
            Ok(())
        }

        let mut out = self.clone();
        apply_family(
            "group weights",
            out.groups.iter_mut().map(|g| (g.id.as_str(), &mut g.weight)).collect(),
            overrides,
        )?;
        let group_ids: Vec<String> = out.groups.iter().map(|g| g.id.clone()).collect();
        for gid in &group_ids {
            apply_family(
                gid,
                out.top_level
                    .iter_mut()
                    .filter(|t| t.parent == *gid)
                    .map(|t| (t.name.as_str(), &mut t.weight))
                    .collect(),
                overrides,
            )?;
        }
        let top_names: Vec<String> = out.top_level.iter().map(|t| t.name.clone()).collect();
        for top in &top_names {
            apply_family(
                top,
                out.sub_level
                    .iter_mut()
                    .filter(|s| s.parent == *top)
                    .map(|s| (s.name.as_str(), &mut s.weight))
                    .collect(),
                overrides,
            )?;
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Service offerings
// ---------------------------------------------------------------------------

/// Cloud delivery model of a renderfarm service.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServiceModel {
    IaaS,
    PaaS,
}

/// A supported software package at an exact version.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftwareVersion {
    pub name: String,
    pub version: String,
}

/// Render node hardware configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub memory_gb: f64,
    pub cpu_cores: u32,
    pub disk_gb: f64,
    pub gpu: bool,
}

/// One provider's functional offerings plus numeric QoS values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceOffering {
    #[serde(rename = "id")]
    pub service_id: String,
    #[serde(rename = "model")]
    pub service_model: ServiceModel,
    #[serde(rename = "software")]
    pub software_versions: BTreeSet<SoftwareVersion>,
    #[serde(rename = "engines")]
    pub render_engines: BTreeSet<String>,
    #[serde(rename = "node")]
    pub node_config: NodeConfig,
    #[serde(rename = "qos")]
    pub qos_values: BTreeMap<String, f64>,
}

impl ServiceOffering {
    /// Checks that every QoS key names a sub-level attribute and that values
    /// for ratio-tendency attributes are strictly positive.
    pub fn validate(&self, hierarchy: &QosHierarchy) -> Result<()> {
        for (attr, &value) in &self.qos_values {
            let spec = hierarchy.find_sub(attr).ok_or_else(|| {
                Error::UnknownAttribute(format!("{attr} (service {})", self.service_id))
            })?;
            if !value.is_finite() {
                return Err(Error::Schema(format!(
                    "service {} attribute {attr} value is not finite",
                    self.service_id
                )));
            }
            if spec.tendency.is_ratio() && value <= 0.0 {
                return Err(Error::NonPositiveValue(format!(
                    "service {} attribute {attr} value {value} (must be > 0 for {:?} tendency)",
                    self.service_id, spec.tendency
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OfferingsFile {
    services: Vec<ServiceOffering>,
}

/// A validated set of offerings bound to the hierarchy they were checked
/// against. `source_path` is informational and excluded from equality.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub offerings: Vec<ServiceOffering>,
    pub hierarchy: QosHierarchy,
    pub source_path: Option<PathBuf>,
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.offerings == other.offerings && self.hierarchy == other.hierarchy
    }
}

impl Catalog {
    /// Parses and validates an offerings template against `hierarchy`.
    /// Rejection is total: any error returns no catalog at all.
    pub fn from_json(text: &str, hierarchy: &QosHierarchy) -> Result<Catalog> {
        let file: OfferingsFile =
            serde_json::from_str(text).map_err(|e| from_json_err(e, "offerings template"))?;
        if file.services.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        let mut seen = BTreeSet::new();
        for offering in &file.services {
            if !seen.insert(offering.service_id.clone()) {
                return Err(Error::DuplicateService(offering.service_id.clone()));
            }
            offering.validate(hierarchy)?;
        }
        Ok(Catalog {
            offerings: file.services,
            hierarchy: hierarchy.clone(),
            source_path: None,
        })
    }

    pub fn offering(&self, service_id: &str) -> Option<&ServiceOffering> {
        self.offerings.iter().find(|o| o.service_id == service_id)
    }

    pub fn service_ids(&self) -> Vec<String> {
        self.offerings.iter().map(|o| o.service_id.clone()).collect()
    }
}

// ---------------------------------------------------------------------------
// File operations
// ---------------------------------------------------------------------------

/// Loads, validates, and normalizes a hierarchy template file.
pub fn load_hierarchy(path: impl AsRef<Path>, mode: LoadMode) -> Result<(QosHierarchy, Vec<String>)> {
    let text = std::fs::read_to_string(path.as_ref())?;
    QosHierarchy::from_json(&text, mode)
}

/// Loads and validates an offerings template file against a loaded hierarchy.
pub fn load_offerings(path: impl AsRef<Path>, hierarchy: &QosHierarchy) -> Result<Catalog> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut catalog = Catalog::from_json(&text, hierarchy)?;
    catalog.source_path = Some(path.as_ref().to_path_buf());
    Ok(catalog)
}

/// Writes the catalog's offerings back in the template format, so that
/// `load_offerings(save_catalog(c), c.hierarchy) == c`.
pub fn save_catalog(catalog: &Catalog, path: impl AsRef<Path>) -> Result<()> {
    let file = OfferingsFile {
        services: catalog.offerings.clone(),
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(path.as_ref(), text)?;
    Ok(())
}
