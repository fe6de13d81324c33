//! In-memory broker state: the active hierarchy, the offering registry, and
//! stored ranking responses, with optional file snapshots.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rankfarm_core::{
    ahp_rank_with, match_offerings, select_best, Catalog, Error as CoreError,
    FunctionalRequirements, LoadMode, QosHierarchy, RankConfig, RankingReport, RequestedValue,
    RequirementSet, Rejection, ServiceOffering, SubVectorSet,
};

/// Broker-level failures, mapped onto HTTP statuses by the server layer.
#[derive(Debug)]
pub enum StateError {
    /// No hierarchy configured yet (409).
    NoHierarchy,
    /// Request or registry validation failure (400).
    Validation(CoreError),
    /// Ranking preconditions not met: empty match or missing value (422).
    Unprocessable(CoreError),
}

impl StateError {
    pub fn code(&self) -> &'static str {
        match self {
            StateError::NoHierarchy => "NoHierarchy",
            StateError::Validation(e) | StateError::Unprocessable(e) => e.code(),
        }
    }

    pub fn detail(&self) -> String {
        match self {
            StateError::NoHierarchy => "no hierarchy configured".to_string(),
            StateError::Validation(e) | StateError::Unprocessable(e) => e.to_string(),
        }
    }
}

fn classify(err: CoreError) -> StateError {
    match err {
        CoreError::EmptyMatch | CoreError::MissingQoSValue { .. } => {
            StateError::Unprocessable(err)
        }
        other => StateError::Validation(other),
    }
}

/// Ranking request body: the requirements template plus optional sub-level
/// vectors that replace matrix construction.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RankRequest {
    pub functional: FunctionalRequirements,
    pub qos_requested: BTreeMap<String, RequestedValue>,
    pub weights: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_sub_vectors: Option<SubVectorSet>,
}

impl RankRequest {
    fn requirements(&self) -> RequirementSet {
        RequirementSet {
            functional: self.functional.clone(),
            requested_qos: self.qos_requested.clone(),
            weight_overrides: self.weights.clone(),
        }
    }
}

/// Ranking response; also the stored report format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankResponse {
    /// Stable report id: a digest of (revision, request body), so replaying
    /// an identical request yields the identical id.
    pub id: String,
    pub revision: u64,
    pub matched: Vec<String>,
    pub rejected: Vec<Rejection>,
    pub best: String,
    pub report: RankingReport,
}

#[derive(Default, Serialize, Deserialize)]
struct Registry {
    revision: u64,
    hierarchy: Option<QosHierarchy>,
    hierarchy_warnings: Vec<String>,
    services: BTreeMap<String, ServiceOffering>,
}

/// Thread-safe broker state. Mutations take the write lock and bump the
/// revision; ranking clones a read snapshot and computes outside the lock.
#[derive(Default)]
pub struct BrokerState {
    registry: RwLock<Registry>,
    reports: Mutex<BTreeMap<String, serde_json::Value>>,
    config: RankConfig,
}

impl BrokerState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Restores a snapshot if the file exists, otherwise starts empty.
    pub fn load_or_default(snapshot: Option<&Path>) -> std::io::Result<Self> {
        let state = Self::new();
        if let Some(path) = snapshot {
            if path.exists() {
                let text = std::fs::read_to_string(path)?;
                let registry: Registry =
                    serde_json::from_str(&text).map_err(std::io::Error::other)?;
                *state.registry.write().unwrap() = registry;
            }
        }
        Ok(state)
    }

    /// Writes the registry (not the stored reports) to the snapshot file.
    pub fn save_snapshot(&self, path: &Path) -> std::io::Result<()> {
        let registry = self.registry.read().unwrap();
        let text = serde_json::to_string_pretty(&*registry).map_err(std::io::Error::other)?;
        std::fs::write(path, text)
    }

    pub fn revision(&self) -> u64 {
        self.registry.read().unwrap().revision
    }

    /// Parses, validates, and activates a hierarchy template. Fails without
    /// touching anything if any already-registered offering would no longer
    /// validate.
    pub fn set_hierarchy(&self, template_json: &str) -> Result<(u64, Vec<String>), StateError> {
        let (hierarchy, warnings) = QosHierarchy::from_json(template_json, LoadMode::Lenient)
            .map_err(StateError::Validation)?;
        let mut registry = self.registry.write().unwrap();
        for offering in registry.services.values() {
            offering.validate(&hierarchy).map_err(StateError::Validation)?;
        }
        registry.hierarchy = Some(hierarchy);
        registry.hierarchy_warnings = warnings.clone();
        registry.revision += 1;
        Ok((registry.revision, warnings))
    }

    /// Upserts one offering by id. The path id must match the body id.
    pub fn put_offering(&self, id: &str, body_json: &str) -> Result<u64, StateError> {
        let offering: ServiceOffering = serde_json::from_str(body_json)
            .map_err(|e| StateError::Validation(CoreError::Parse(format!("offering body: {e}"))))?;
        if offering.service_id != id {
            return Err(StateError::Validation(CoreError::Schema(format!(
                "body id {:?} does not match path id {id:?}",
                offering.service_id
            ))));
        }
        let mut registry = self.registry.write().unwrap();
        let hierarchy = registry.hierarchy.as_ref().ok_or(StateError::NoHierarchy)?;
        offering.validate(hierarchy).map_err(StateError::Validation)?;
        registry.services.insert(id.to_string(), offering);
        registry.revision += 1;
        Ok(registry.revision)
    }

    /// Matches and ranks against the current registry snapshot. Read-only
    /// with respect to the registry; the response is stored for retrieval.
    pub fn rank(&self, body: &[u8]) -> Result<RankResponse, StateError> {
        let request: RankRequest = serde_json::from_slice(body)
            .map_err(|e| StateError::Validation(CoreError::Parse(format!("rank body: {e}"))))?;

        let (hierarchy, offerings, revision) = {
            let registry = self.registry.read().unwrap();
            let hierarchy = registry.hierarchy.clone().ok_or(StateError::NoHierarchy)?;
            let offerings: Vec<ServiceOffering> = registry.services.values().cloned().collect();
            (hierarchy, offerings, registry.revision)
        };

        let requirements = request.requirements();
        requirements.validate(&hierarchy).map_err(StateError::Validation)?;
        let catalog = Catalog {
            offerings,
            hierarchy,
            source_path: None,
        };
        let matched = match_offerings(&catalog, &requirements.functional);
        let report = ahp_rank_with(
            &catalog,
            &matched.matched,
            &requirements,
            request.inject_sub_vectors.as_ref(),
            &self.config,
        )
        .map_err(classify)?;

        let response = RankResponse {
            id: report_id(revision, body),
            revision,
            matched: matched.matched,
            rejected: matched.rejected,
            best: select_best(&report).to_string(),
            report,
        };
        let value = serde_json::to_value(&response)
            .map_err(|e| StateError::Validation(CoreError::Schema(e.to_string())))?;
        self.reports.lock().unwrap().insert(response.id.clone(), value);
        Ok(response)
    }

    pub fn get_report(&self, id: &str) -> Option<serde_json::Value> {
        self.reports.lock().unwrap().get(id).cloned()
    }
}

fn report_id(revision: u64, body: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(revision.to_le_bytes());
    hasher.update(body);
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
