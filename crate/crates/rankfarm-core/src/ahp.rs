//! Pairwise comparison matrices, principal eigenvectors, and weighted
//! aggregation up the QoS hierarchy.
//!
//! Matrices are built from raw value ratios (no judgment-scale capping), so
//! a matrix derived from one attribute's values is perfectly consistent and
//! its principal eigenvector has a closed form: the normalized values for a
//! positive tendency, the normalized reciprocals for a negative one. The
//! power iteration is still used as the general solver; the closed form
//! serves as an independent oracle in the test suites.
//!
//! All operations are pure functions over immutable inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, QosHierarchy, Tendency};
use crate::error::{from_json_err, Error};
use crate::requirements::RequirementSet;
use crate::Result;

/// Vectors are accepted as normalized when they sum to 1 within this bound.
pub const SUM_TOL: f64 = 1e-9;

/// Numeric knobs of the ranking pipeline.
#[derive(Debug, Clone)]
pub struct RankConfig {
    /// Max-norm convergence threshold of the power iteration.
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    /// Relative smoothing for close/exact deviations, so that an exact match
    /// dominates without dividing by zero.
    pub epsilon: f64,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            eigen_tol: 1e-12,
            eigen_max_iter: 1000,
            epsilon: 1e-9,
        }
    }
}

/// Pairwise ratio matrix of the candidate services for one attribute.
///
/// Entries are positive with a unit diagonal, and `entries[m][n] *
/// entries[n][m] == 1` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMatrix {
    pub attribute: String,
    pub service_order: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl ComparisonMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    fn check_square_positive(&self) -> Result<()> {
        let n = self.entries.len();
        if n == 0 || self.entries.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "comparison matrix for {} is not square and non-empty",
                self.attribute
            )));
        }
        if self.service_order.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "comparison matrix for {} has {} services but size {n}",
                self.attribute,
                self.service_order.len()
            )));
        }
        for row in &self.entries {
            for &e in row {
                if !(e.is_finite() && e > 0.0) {
                    return Err(Error::NonPositiveValue(format!(
                        "comparison matrix for {} contains entry {e}",
                        self.attribute
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A relative ranking vector at any hierarchy level: non-negative components
/// over the same service order, summing to 1 when engine-computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingVector {
    /// Attribute or group this vector ranks the services on.
    pub name: String,
    pub service_order: Vec<String>,
    pub values: Vec<f64>,
}

impl RankingVector {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn value_for(&self, service_id: &str) -> Option<f64> {
        self.service_order
            .iter()
            .position(|s| s == service_id)
            .map(|i| self.values[i])
    }
}

/// Builds the pairwise comparison matrix for one attribute.
///
/// Positive tendency compares offered values directly (`v_m / v_n`); negative
/// tendency inverts the ratio (`v_n / v_m`). Close and exact tendencies
/// compare smoothed deviations from the requested target, lower deviation
/// being better. A single service yields the 1x1 matrix `[1]`.
pub fn build_matrix(
    attribute: &str,
    values: &[(String, f64)],
    tendency: Tendency,
    requested: Option<f64>,
    epsilon: f64,
) -> Result<ComparisonMatrix> {
    if values.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "no services to compare for attribute {attribute}"
        )));
    }
    for (service, v) in values {
        if !v.is_finite() {
            return Err(Error::Schema(format!(
                "service {service} attribute {attribute} value is not finite"
            )));
        }
        if tendency.is_ratio() && *v <= 0.0 {
            return Err(Error::NonPositiveValue(format!(
                "service {service} attribute {attribute} value {v} (must be > 0 for {tendency:?} tendency)"
            )));
        }
    }

    // For close/exact, rank by deviation from the target with negative
    // tendency: the smoothing term keeps exact matches finite yet dominant.
    let keys: Vec<f64> = match tendency {
        Tendency::Positive | Tendency::Negative => values.iter().map(|(_, v)| *v).collect(),
        Tendency::Close | Tendency::Exact => {
            let target = requested
                .ok_or_else(|| Error::MissingRequestedValue(attribute.to_string()))?;
            let smoothing = if target == 0.0 { 1e-12 } else { epsilon * target.abs() };
            values
                .iter()
                .map(|(_, v)| {
                    let deviation = match tendency {
                        Tendency::Close => (v - target).abs(),
                        Tendency::Exact => {
                            if *v == target {
                                0.0
                            } else {
                                1.0
                            }
                        }
                        _ => unreachable!(),
                    };
                    deviation + smoothing
                })
                .collect()
        }
    };

    let invert = match tendency {
        Tendency::Positive => false,
        Tendency::Negative | Tendency::Close | Tendency::Exact => true,
    };
    let n = values.len();
    let mut entries = vec![vec![1.0; n]; n];
    for row in 0..n {
        for col in 0..n {
            if row == col {
                continue;
            }
            entries[row][col] = if invert {
                keys[col] / keys[row]
            } else {
                keys[row] / keys[col]
            };
        }
    }
    Ok(ComparisonMatrix {
        attribute: attribute.to_string(),
        service_order: values.iter().map(|(s, _)| s.clone()).collect(),
        entries,
    })
}

struct PowerIteration {
    vector: Vec<f64>,
    lambda: f64,
    residual: f64,
    converged: bool,
    iterations: usize,
}

/// Power iteration with a uniform start vector and L1 normalization per
/// step. A positive matrix always has a simple dominant eigenvalue, and
/// value-derived matrices converge in one step.
fn power_iteration(entries: &[Vec<f64>], tol: f64, max_iter: usize) -> PowerIteration {
    let n = entries.len();
    let mut x = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iter {
        let mut y = vec![0.0; n];
        for (i, row) in entries.iter().enumerate() {
            y[i] = row.iter().zip(&x).map(|(e, xi)| e * xi).sum();
        }
        let norm: f64 = y.iter().sum();
        for yi in &mut y {
            *yi /= norm;
        }
        residual = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = y;
        if residual < tol {
            let lambda = rayleigh(entries, &x);
            return PowerIteration {
                vector: x,
                lambda,
                residual,
                converged: true,
                iterations: iter,
            };
        }
    }
    let lambda = rayleigh(entries, &x);
    PowerIteration {
        vector: x,
        lambda,
        residual,
        converged: false,
        iterations: max_iter,
    }
}

/// Dominant-eigenvalue estimate: mean of (Mv)_i / v_i.
fn rayleigh(entries: &[Vec<f64>], v: &[f64]) -> f64 {
    let n = entries.len();
    let mut acc = 0.0;
    for (i, row) in entries.iter().enumerate() {
        let mv: f64 = row.iter().zip(v).map(|(e, vi)| e * vi).sum();
        acc += mv / v[i];
    }
    acc / n as f64
}

/// Extracts the dominant eigenvector, L1-normalized to sum 1.
///
/// For a consistent ratio matrix the result equals the normalized weight
/// vector the matrix was built from.
pub fn principal_eigenvector(
    matrix: &ComparisonMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<RankingVector> {
    matrix.check_square_positive()?;
    let run = power_iteration(&matrix.entries, tol, max_iter);
    if !run.converged {
        return Err(Error::NoConvergence {
            iterations: run.iterations,
            residual: run.residual,
        });
    }
    Ok(RankingVector {
        name: matrix.attribute.clone(),
        service_order: matrix.service_order.clone(),
        values: run.vector,
    })
}

/// Component-wise weighted sum of child vectors. Children must share length
/// and service order; weights must be non-negative and sum to 1.
pub fn aggregate_level(
    name: &str,
    children: &[RankingVector],
    weights: &[f64],
) -> Result<RankingVector> {
    if children.is_empty() {
        return Err(Error::DimensionMismatch(format!("{name}: no child vectors")));
    }
    if children.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{name}: {} children but {} weights",
            children.len(),
            weights.len()
        )));
    }
    let order = &children[0].service_order;
    for child in children {
        if child.service_order != *order || child.values.len() != order.len() {
            return Err(Error::DimensionMismatch(format!(
                "{name}: child {} has a different service order",
                child.name
            )));
        }
    }
    // Zero is allowed at this level so a group can be switched off entirely;
    // hierarchy and override validation keep file-supplied weights above 0.
    let weight_sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| !(w.is_finite() && w >= 0.0)) || (weight_sum - 1.0).abs() > SUM_TOL {
        return Err(Error::Weight(format!(
            "{name}: weights must be non-negative and sum to 1, got sum {weight_sum}"
        )));
    }
    let mut values = vec![0.0; order.len()];
    for (child, &w) in children.iter().zip(weights) {
        for (acc, &v) in values.iter_mut().zip(&child.values) {
            *acc += w * v;
        }
    }
    Ok(RankingVector {
        name: name.to_string(),
        service_order: order.clone(),
        values,
    })
}

/// Aggregation specialized to the group tier: combines the group vectors
/// with the group weights into the final ranking vector.
pub fn final_rank(group_vectors: &[RankingVector], group_weights: &[f64]) -> Result<RankingVector> {
    aggregate_level("final", group_vectors, group_weights)
}

/// Saaty's consistency diagnostic. Value-derived matrices are perfectly
/// consistent, so this is ~0 for every matrix the engine builds itself;
/// it is exposed as a self-check and for hand-entered matrices.
///
/// Defined as 0 for sizes below 3.
pub fn consistency_ratio(matrix: &ComparisonMatrix) -> f64 {
    let n = matrix.size();
    if n <= 2 {
        return 0.0;
    }
    // Random-index table; sizes beyond the table reuse the largest entry.
    let ri = match n {
        3 => 0.58,
        4 => 0.90,
        5 => 1.12,
        6 => 1.24,
        7 => 1.32,
        8 => 1.41,
        9 => 1.45,
        _ => 1.49,
    };
    let cfg = RankConfig::default();
    let run = power_iteration(&matrix.entries, cfg.eigen_tol, cfg.eigen_max_iter);
    let ci = (run.lambda - n as f64) / (n as f64 - 1.0);
    ci / ri
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

/// One entry of the sorted choice list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub rank: usize,
    #[serde(rename = "service")]
    pub service_id: String,
    pub value: f64,
    /// Ordinal preference label, e.g. "First Choice".
    pub label: String,
}

/// Every intermediate ranking vector plus the final sorted choice list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub service_order: Vec<String>,
    /// Per sub-level attribute, in hierarchy order.
    pub sub_level: Vec<RankingVector>,
    /// Per top-level attribute, in hierarchy order.
    pub top_level: Vec<RankingVector>,
    /// Per group, in hierarchy order.
    pub groups: Vec<RankingVector>,
    #[serde(rename = "final")]
    pub final_vector: RankingVector,
    /// Sorted by final value descending; ties broken by ascending service id
    /// and reported in `warnings`.
    pub choices: Vec<Choice>,
    /// The user's requested QoS values, echoed for context. Only close/exact
    /// tendencies consume them during ranking.
    #[serde(default)]
    pub requested_qos: BTreeMap<String, crate::requirements::RequestedValue>,
    pub warnings: Vec<String>,
}

impl RankingReport {
    pub fn sub_vector(&self, attribute: &str) -> Option<&RankingVector> {
        self.sub_level.iter().find(|v| v.name == attribute)
    }

    pub fn top_vector(&self, attribute: &str) -> Option<&RankingVector> {
        self.top_level.iter().find(|v| v.name == attribute)
    }

    pub fn group_vector(&self, group_id: &str) -> Option<&RankingVector> {
        self.groups.iter().find(|v| v.name == group_id)
    }
}

/// Pre-computed sub-level vectors that replace matrix construction, e.g. to
/// feed published reference vectors through the aggregation tiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubVectorSet {
    pub service_order: Vec<String>,
    /// Attribute name to vector, aligned with `service_order`.
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl SubVectorSet {
    pub fn from_json(text: &str) -> Result<SubVectorSet> {
        serde_json::from_str(text).map_err(|e| from_json_err(e, "sub-vector file"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SubVectorSet> {
        let text = std::fs::read_to_string(path.as_ref())?;
        SubVectorSet::from_json(&text)
    }

    fn to_vectors(
        &self,
        hierarchy: &QosHierarchy,
        matched: &[String],
        warnings: &mut Vec<String>,
    ) -> Result<Vec<RankingVector>> {
        if self.service_order != matched {
            return Err(Error::DimensionMismatch(format!(
                "injected service order {:?} differs from matched list {:?}",
                self.service_order, matched
            )));
        }
        let known: BTreeSet<&str> = hierarchy.sub_level.iter().map(|s| s.name.as_str()).collect();
        for name in self.vectors.keys() {
            if !known.contains(name.as_str()) {
                return Err(Error::UnknownAttribute(format!("{name} (injected vector)")));
            }
        }
        warnings.push("sub-level vectors supplied externally; comparison matrices were not computed".to_string());
        let mut out = Vec::new();
        for attr in &hierarchy.sub_level {
            let values = self.vectors.get(&attr.name).ok_or_else(|| {
                Error::DimensionMismatch(format!("no injected vector for attribute {}", attr.name))
            })?;
            if values.len() != matched.len() {
                return Err(Error::DimensionMismatch(format!(
                    "injected vector for {} has {} entries for {} services",
                    attr.name,
                    values.len(),
                    matched.len()
                )));
            }
            for &v in values {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Schema(format!(
                        "injected vector for {} contains invalid component {v}",
                        attr.name
                    )));
                }
            }
            let sum: f64 = values.iter().sum();
            if (sum - 1.0).abs() > SUM_TOL {
                warnings.push(format!(
                    "injected vector for {} sums to {sum}, not 1; used as-is",
                    attr.name
                ));
            }
            out.push(RankingVector {
                name: attr.name.clone(),
                service_order: matched.to_vec(),
                values: values.clone(),
            });
        }
        Ok(out)
    }
}

fn compute_sub_vectors(
    catalog: &Catalog,
    matched: &[String],
    req: &RequirementSet,
    hierarchy: &QosHierarchy,
    config: &RankConfig,
) -> Result<Vec<RankingVector>> {
    let mut vectors = Vec::with_capacity(hierarchy.sub_level.len());
    for attr in &hierarchy.sub_level {
        let mut values = Vec::with_capacity(matched.len());
        for service_id in matched {
            let offering = catalog.offering(service_id).ok_or_else(|| {
                Error::Schema(format!("matched service {service_id} is not in the catalog"))
            })?;
            let value = offering.qos_values.get(&attr.name).copied().ok_or_else(|| {
                Error::MissingQoSValue {
                    service: service_id.clone(),
                    attribute: attr.name.clone(),
                }
            })?;
            values.push((service_id.clone(), value));
        }
        let requested = req.target_for(&attr.name);
        let matrix = build_matrix(&attr.name, &values, attr.tendency, requested, config.epsilon)?;
        vectors.push(principal_eigenvector(&matrix, config.eigen_tol, config.eigen_max_iter)?);
    }
    Ok(vectors)
}

/// Aggregates ready-made sub-level vectors through the top and group tiers
/// and assembles the report. `sub_vectors` must cover every sub-level
/// attribute and share one service order.
pub fn rank_from_sub_vectors(
    hierarchy: &QosHierarchy,
    sub_vectors: Vec<RankingVector>,
    mut warnings: Vec<String>,
) -> Result<RankingReport> {
    if sub_vectors.is_empty() {
        return Err(Error::DimensionMismatch("no sub-level vectors".into()));
    }
    let service_order = sub_vectors[0].service_order.clone();

    let by_name = |name: &str, pool: &[RankingVector]| -> Result<RankingVector> {
        pool.iter()
            .find(|v| v.name == name)
            .cloned()
            .ok_or_else(|| Error::DimensionMismatch(format!("no vector named {name}")))
    };

    let mut top_level = Vec::new();
    for top in &hierarchy.top_level {
        let subs = hierarchy.subs_under(&top.name);
        let children: Vec<RankingVector> = subs
            .iter()
            .map(|s| by_name(&s.name, &sub_vectors))
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = subs.iter().map(|s| s.weight).collect();
        top_level.push(aggregate_level(&top.name, &children, &weights)?);
    }

    let mut groups = Vec::new();
    for group in &hierarchy.groups {
        let tops = hierarchy.tops_under(&group.id);
        let children: Vec<RankingVector> = tops
            .iter()
            .map(|t| by_name(&t.name, &top_level))
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = tops.iter().map(|t| t.weight).collect();
        groups.push(aggregate_level(&group.id, &children, &weights)?);
    }

    let group_weights: Vec<f64> = hierarchy.groups.iter().map(|g| g.weight).collect();
    let final_vector = final_rank(&groups, &group_weights)?;

    let mut order: Vec<usize> = (0..service_order.len()).collect();
    order.sort_by(|&a, &b| {
        final_vector.values[b]
            .partial_cmp(&final_vector.values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| service_order[a].cmp(&service_order[b]))
    });
    for pair in order.windows(2) {
        if final_vector.values[pair[0]] == final_vector.values[pair[1]] {
            let (a, b) = (&service_order[pair[0]], &service_order[pair[1]]);
            warnings.push(format!(
                "tie between {} and {} on final value {}; ordered by service id",
                a.min(b),
                a.max(b),
                final_vector.values[pair[0]]
            ));
        }
    }
    let choices: Vec<Choice> = order
        .iter()
        .enumerate()
        .map(|(i, &idx)| Choice {
            rank: i + 1,
            service_id: service_order[idx].clone(),
            value: final_vector.values[idx],
            label: ordinal_label(i + 1),
        })
        .collect();

    Ok(RankingReport {
        service_order,
        sub_level: sub_vectors,
        top_level,
        groups,
        final_vector,
        choices,
        requested_qos: BTreeMap::new(),
        warnings,
    })
}

/// Runs the full pipeline for the matched services: one comparison matrix
/// and eigenvector per sub-level attribute, then aggregation through the
/// top-level and group tiers into the final sorted ranking.
pub fn ahp_rank(
    catalog: &Catalog,
    matched: &[String],
    req: &RequirementSet,
    config: &RankConfig,
) -> Result<RankingReport> {
    ahp_rank_with(catalog, matched, req, None, config)
}

/// Like [`ahp_rank`], but sub-level vectors can be supplied externally
/// instead of being computed from the offered values.
pub fn ahp_rank_with(
    catalog: &Catalog,
    matched: &[String],
    req: &RequirementSet,
    injected: Option<&SubVectorSet>,
    config: &RankConfig,
) -> Result<RankingReport> {
    if matched.is_empty() {
        return Err(Error::EmptyMatch);
    }
    let hierarchy = req.effective_hierarchy(&catalog.hierarchy)?;
    let mut warnings = Vec::new();
    let sub_vectors = match injected {
        None => compute_sub_vectors(catalog, matched, req, &hierarchy, config)?,
        Some(set) => set.to_vectors(&hierarchy, matched, &mut warnings)?,
    };
    let mut report = rank_from_sub_vectors(&hierarchy, sub_vectors, warnings)?;
    report.requested_qos = req.requested_qos.clone();
    Ok(report)
}

/// The top-ranked service.
pub fn select_best(report: &RankingReport) -> &str {
    &report.choices[0].service_id
}

fn ordinal_label(rank: usize) -> String {
    const WORDS: [&str; 20] = [
        "First",
        "Second",
        "Third",
        "Fourth",
        "Fifth",
        "Sixth",
        "Seventh",
        "Eighth",
        "Ninth",
        "Tenth",
        "Eleventh",
        "Twelfth",
        "Thirteenth",
        "Fourteenth",
        "Fifteenth",
        "Sixteenth",
        "Seventeenth",
        "Eighteenth",
        "Nineteenth",
        "Twentieth",
    ];
    if (1..=WORDS.len()).contains(&rank) {
        return format!("{} Choice", WORDS[rank - 1]);
    }
    let suffix = match (rank % 10, rank % 100) {
        (1, n) if n != 11 => "st",
        (2, n) if n != 12 => "nd",
        (3, n) if n != 13 => "rd",
        _ => "th",
    };
    format!("{rank}{suffix} Choice")
}
