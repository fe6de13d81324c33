//! Property suites over randomized instances: matrix reciprocity, vector
//! normalization, the closed-form eigenvector oracle, scale invariance,
//! permutation equivariance, and matcher monotonicity.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use rankfarm_core::{
    ahp_rank, aggregate_level, build_matrix, consistency_ratio, final_rank, match_offerings,
    principal_eigenvector, save_catalog, select_best, Catalog, FunctionalRequirements, LoadMode,
    NodeConfig, QosHierarchy, RankConfig, RankingVector, RequirementSet, ServiceModel,
    ServiceOffering, SoftwareVersion, Tendency,
};

fn service_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("S{i:02}")).collect()
}

fn pairs(values: &[f64]) -> Vec<(String, f64)> {
    service_ids(values.len()).into_iter().zip(values.iter().copied()).collect()
}

fn closed_form(values: &[f64], tendency: Tendency) -> Vec<f64> {
    let keys: Vec<f64> = match tendency {
        Tendency::Positive => values.to_vec(),
        Tendency::Negative => values.iter().map(|v| 1.0 / v).collect(),
        _ => panic!("oracle covers ratio tendencies only"),
    };
    let sum: f64 = keys.iter().sum();
    keys.iter().map(|k| k / sum).collect()
}

/// Log-uniform QoS values spanning six decades.
fn qos_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((-3.0f64..3.0).prop_map(|e| 10f64.powf(e)), n..=n)
}

fn tendency() -> impl Strategy<Value = Tendency> {
    prop_oneof![Just(Tendency::Positive), Just(Tendency::Negative)]
}

proptest! {
    #[test]
    fn matrix_is_reciprocal_with_unit_diagonal(
        values in (1usize..=10).prop_flat_map(qos_values),
        t in tendency(),
    ) {
        let m = build_matrix("attr", &pairs(&values), t, None, 1e-9).unwrap();
        let n = m.size();
        for i in 0..n {
            prop_assert_eq!(m.entries[i][i], 1.0);
            for j in 0..n {
                let product = m.entries[i][j] * m.entries[j][i];
                prop_assert!((product - 1.0).abs() <= 1e-9, "({i},{j}): {product}");
            }
        }
    }

    #[test]
    fn eigenvector_is_normalized_and_matches_the_closed_form(
        values in (1usize..=10).prop_flat_map(qos_values),
        t in tendency(),
    ) {
        let m = build_matrix("attr", &pairs(&values), t, None, 1e-9).unwrap();
        let v = principal_eigenvector(&m, 1e-12, 1000).unwrap();
        prop_assert!((v.sum() - 1.0).abs() <= 1e-9);
        prop_assert!(v.values.iter().all(|&x| x >= 0.0));
        let oracle = closed_form(&values, t);
        for (got, want) in v.values.iter().zip(&oracle) {
            prop_assert!((got - want).abs() <= 1e-9, "got {got}, oracle {want}");
        }
    }

    #[test]
    fn scaling_all_values_leaves_the_vector_unchanged(
        values in (1usize..=10).prop_flat_map(qos_values),
        t in tendency(),
        scale in (-3.0f64..3.0).prop_map(|e| 10f64.powf(e)),
    ) {
        let base = principal_eigenvector(
            &build_matrix("attr", &pairs(&values), t, None, 1e-9).unwrap(),
            1e-12,
            1000,
        )
        .unwrap();
        let scaled_values: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let scaled = principal_eigenvector(
            &build_matrix("attr", &pairs(&scaled_values), t, None, 1e-9).unwrap(),
            1e-12,
            1000,
        )
        .unwrap();
        for (a, b) in base.values.iter().zip(&scaled.values) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn value_derived_matrices_are_consistent(
        values in (3usize..=10).prop_flat_map(qos_values),
        t in tendency(),
    ) {
        let m = build_matrix("attr", &pairs(&values), t, None, 1e-9).unwrap();
        prop_assert!(consistency_ratio(&m).abs() < 1e-6);
    }

    #[test]
    fn aggregation_output_sums_to_one(
        columns in (2usize..=6).prop_flat_map(|n| {
            (proptest::collection::vec(qos_values(n), 1..=4), Just(n))
        }),
    ) {
        let (vals, n) = columns;
        let order = service_ids(n);
        let children: Vec<RankingVector> = vals
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let total: f64 = v.iter().sum();
                RankingVector {
                    name: format!("c{i}"),
                    service_order: order.clone(),
                    values: v.iter().map(|x| x / total).collect(),
                }
            })
            .collect();
        let weights = vec![1.0 / children.len() as f64; children.len()];
        let out = aggregate_level("parent", &children, &weights).unwrap();
        prop_assert!((out.sum() - 1.0).abs() <= 1e-9);
    }
}

// ---------------------------------------------------------------------------
// Full-pipeline properties on a synthetic catalog
// ---------------------------------------------------------------------------

fn two_group_hierarchy() -> QosHierarchy {
    let json = r#"{"groups":[
        {"id":"Q_O","weight":0.4,"attributes":[
            {"name":"Agility","weight":1.0,"sub":[
                {"name":"Adaptability","weight":0.3,"unit":"s","tendency":"negative"},
                {"name":"Elasticity","weight":0.7,"unit":"s","tendency":"negative"}]}]},
        {"id":"Q_R","weight":0.6,"attributes":[
            {"name":"Cost","weight":1.0,"sub":[
                {"name":"NodeCost","weight":1.0,"unit":"$","tendency":"negative"}]},
            {"name":"Performance","weight":0.0001,"sub":[
                {"name":"SRT","weight":1.0,"unit":"s","tendency":"positive"}]}]}]}"#;
    // top-level weights under Q_R intentionally unnormalized; lenient load
    // repairs them, which keeps this fixture terse
    QosHierarchy::from_json(json, LoadMode::Lenient).unwrap().0
}

fn synthetic_catalog(ids: &[String], columns: &BTreeMap<String, Vec<f64>>) -> Catalog {
    let hierarchy = two_group_hierarchy();
    let offerings: Vec<ServiceOffering> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| ServiceOffering {
            service_id: id.clone(),
            service_model: ServiceModel::PaaS,
            software_versions: BTreeSet::new(),
            render_engines: BTreeSet::new(),
            node_config: NodeConfig {
                memory_gb: 32.0,
                cpu_cores: 16,
                disk_gb: 500.0,
                gpu: false,
            },
            qos_values: columns.iter().map(|(attr, vals)| (attr.clone(), vals[i])).collect(),
        })
        .collect();
    Catalog {
        offerings,
        hierarchy,
        source_path: None,
    }
}

fn attr_columns(n: usize) -> impl Strategy<Value = BTreeMap<String, Vec<f64>>> {
    let attrs = ["Adaptability", "Elasticity", "NodeCost", "SRT"];
    proptest::collection::vec(qos_values(n), attrs.len()).prop_map(move |cols| {
        attrs
            .iter()
            .map(|a| a.to_string())
            .zip(cols)
            .collect::<BTreeMap<_, _>>()
    })
}

proptest! {
    #[test]
    fn permuting_services_permutes_vectors_and_keeps_labels(
        (n, columns, seed) in (2usize..=8)
            .prop_flat_map(|n| (Just(n), attr_columns(n), any::<u64>())),
    ) {
        let ids = service_ids(n);
        let catalog = synthetic_catalog(&ids, &columns);
        let req = RequirementSet::default();
        let cfg = RankConfig::default();
        let report = ahp_rank(&catalog, &ids, &req, &cfg).unwrap();

        // deterministic permutation from the seed
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let permuted_ids: Vec<String> = perm.iter().map(|&i| ids[i].clone()).collect();
        let mut permuted_catalog = catalog.clone();
        permuted_catalog.offerings =
            perm.iter().map(|&i| catalog.offerings[i].clone()).collect();
        let permuted = ahp_rank(&permuted_catalog, &permuted_ids, &req, &cfg).unwrap();

        // every vector is the same permutation of the original
        for (a, b) in report.sub_level.iter().zip(&permuted.sub_level) {
            for (k, &p) in perm.iter().enumerate() {
                prop_assert!((a.values[p] - b.values[k]).abs() <= 1e-12);
            }
        }
        for (k, &p) in perm.iter().enumerate() {
            prop_assert!(
                (report.final_vector.values[p] - permuted.final_vector.values[k]).abs() <= 1e-12
            );
        }
        // labels assigned to each service id are unchanged
        let labels = |r: &rankfarm_core::RankingReport| -> BTreeMap<String, String> {
            r.choices
                .iter()
                .map(|c| (c.service_id.clone(), c.label.clone()))
                .collect()
        };
        prop_assert_eq!(labels(&report), labels(&permuted));
        prop_assert_eq!(select_best(&report), select_best(&permuted));
    }

    #[test]
    fn monotonicity_adding_constraints_never_grows_the_match(
        (n, columns, engines, min_mem) in (2usize..=8).prop_flat_map(|n| {
            (
                Just(n),
                attr_columns(n),
                proptest::collection::vec(proptest::bool::ANY, n),
                0.0f64..128.0,
            )
        }),
    ) {
        let ids = service_ids(n);
        let mut catalog = synthetic_catalog(&ids, &columns);
        for (offering, has_engine) in catalog.offerings.iter_mut().zip(&engines) {
            if *has_engine {
                offering.render_engines.insert("V-Ray".to_string());
            }
            offering.node_config.memory_gb = 16.0 + (offering.service_id.len() as f64) * 7.0;
        }

        // a chain of successively tighter requirement sets
        let empty = FunctionalRequirements::default();
        let with_engine = FunctionalRequirements {
            required_engines: BTreeSet::from(["V-Ray".to_string()]),
            ..Default::default()
        };
        let mut with_node = with_engine.clone();
        with_node.min_node.memory_gb = min_mem;
        let mut with_model = with_node.clone();
        with_model.required_model = rankfarm_core::ModelRequirement::IaaS;

        let chain = [&empty, &with_engine, &with_node, &with_model];
        let mut previous: Option<BTreeSet<String>> = None;
        for req in chain {
            let matched: BTreeSet<String> =
                match_offerings(&catalog, req).matched.into_iter().collect();
            if let Some(prev) = &previous {
                prop_assert!(matched.is_subset(prev), "{matched:?} vs {prev:?}");
            }
            previous = Some(matched);
        }
        // empty constraints are the identity filter
        let all = match_offerings(&catalog, &empty);
        prop_assert_eq!(all.matched, ids);
    }

    #[test]
    fn catalog_save_load_round_trip_is_identity(
        (n, columns) in (1usize..=6).prop_flat_map(|n| (Just(n), attr_columns(n))),
    ) {
        let ids = service_ids(n);
        let catalog = synthetic_catalog(&ids, &columns);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("offerings.json");
        save_catalog(&catalog, &path).unwrap();
        let reloaded = rankfarm_core::load_offerings(&path, &catalog.hierarchy).unwrap();
        prop_assert_eq!(catalog, reloaded);
    }
}

#[test]
fn all_weight_on_one_group_reproduces_its_vector_exactly() {
    let order = service_ids(4);
    let q_o = RankingVector {
        name: "Q_O".into(),
        service_order: order.clone(),
        values: vec![0.1, 0.2, 0.3, 0.4],
    };
    let q_r = RankingVector {
        name: "Q_R".into(),
        service_order: order,
        values: vec![0.4, 0.3, 0.2, 0.1],
    };
    let fin = final_rank(&[q_o, q_r.clone()], &[0.0, 1.0]).unwrap();
    assert_eq!(fin.values, q_r.values, "bitwise equality, not approximate");
}

#[test]
fn software_version_matching_ignores_case_and_whitespace() {
    let ids = service_ids(2);
    let columns: BTreeMap<String, Vec<f64>> = [
        ("Adaptability", vec![1.0, 2.0]),
        ("Elasticity", vec![1.0, 2.0]),
        ("NodeCost", vec![1.0, 2.0]),
        ("SRT", vec![1.0, 2.0]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let mut catalog = synthetic_catalog(&ids, &columns);
    catalog.offerings[0].software_versions.insert(SoftwareVersion {
        name: "3ds Max".into(),
        version: "2009".into(),
    });
    let req = FunctionalRequirements {
        required_software: BTreeSet::from([SoftwareVersion {
            name: "  3DS MAX ".into(),
            version: "2009".into(),
        }]),
        ..Default::default()
    };
    let result = match_offerings(&catalog, &req);
    assert_eq!(result.matched, [ids[0].clone()]);
}
