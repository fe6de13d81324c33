//! Ranking engine for cloud renderfarm services.
//!
//! The engine selects a renderfarm provider in two stages: hard functional
//! filtering (software, render engines, node configuration, service model)
//! followed by multi-criteria ranking with the Analytic Hierarchy Process
//! over a weighted two-level QoS attribute hierarchy. Pairwise comparison
//! matrices are built directly from numeric QoS values, so no subjective
//! judgment scale is involved and the matrices are perfectly consistent.
//!
//! Modules:
//! - [`catalog`]: file-backed registry of service offerings and the QoS
//!   hierarchy definition.
//! - [`requirements`]: the end user's functional requirements, requested
//!   QoS values, and weight overrides.
//! - [`matcher`]: boolean filtering of offerings against functional
//!   requirements.
//! - [`ahp`]: comparison matrices, principal eigenvectors, hierarchy
//!   aggregation, and the final ranking.
//! - [`report`]: text/json/csv rendering and radar-chart data export.
//!
//! Everything here is pure and immutable after load; values may be shared
//! freely across threads.

pub mod ahp;
pub mod catalog;
pub mod error;
pub mod matcher;
pub mod report;
pub mod requirements;

pub use ahp::{
    ahp_rank, ahp_rank_with, aggregate_level, build_matrix, consistency_ratio, final_rank,
    principal_eigenvector, rank_from_sub_vectors, select_best, Choice, ComparisonMatrix,
    RankConfig, RankingReport, RankingVector, SubVectorSet,
};
pub use catalog::{
    load_hierarchy, load_offerings, save_catalog, AttributeSpec, Catalog, GroupSpec, LoadMode,
    NodeConfig, QosHierarchy, ServiceModel, ServiceOffering, SoftwareVersion, Tendency,
    TopAttribute,
};
pub use error::Error;
pub use matcher::{match_offerings, MatchResult, RejectReason, Rejection};
pub use report::{
    kiviat_export, render_kiviat, render_report, KiviatAxis, KiviatData, ReportFormat,
    ReportSection,
};
pub use requirements::{
    load_requirements, Direction, FunctionalRequirements, ModelRequirement, NodeRequirements,
    RequestedValue, RequirementSet,
};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
