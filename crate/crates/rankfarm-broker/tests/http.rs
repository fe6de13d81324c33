//! End-to-end tests of the HTTP surface against a real listener.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rankfarm_broker::{router, BrokerState};
use serde_json::{json, Value};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

async fn spawn_server() -> String {
    let state = Arc::new(BrokerState::new());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, router(state)).await.unwrap();
    });
    format!("http://{addr}")
}

async fn put(client: &reqwest::Client, url: String, body: String) -> (u16, Value) {
    let response = client.put(url).body(body).send().await.unwrap();
    let status = response.status().as_u16();
    (status, response.json().await.unwrap())
}

async fn register_reference_catalog(client: &reqwest::Client, base: &str) {
    let (status, body) = put(
        client,
        format!("{base}/v1/hierarchy"),
        fixture_text("hierarchy.json"),
    )
    .await;
    assert_eq!(status, 200, "{body}");
    let offerings: Value = serde_json::from_str(&fixture_text("offerings.json")).unwrap();
    for service in offerings["services"].as_array().unwrap() {
        let id = service["id"].as_str().unwrap();
        let (status, body) = put(
            client,
            format!("{base}/v1/offerings/{id}"),
            service.to_string(),
        )
        .await;
        assert_eq!(status, 200, "{body}");
    }
}

#[tokio::test]
async fn healthz_answers_ok() {
    let base = spawn_server().await;
    let response = reqwest::get(format!("{base}/v1/healthz")).await.unwrap();
    assert_eq!(response.status().as_u16(), 200);
    let body: Value = response.json().await.unwrap();
    assert_eq!(body["status"], "ok");
}

#[tokio::test]
async fn offering_put_before_hierarchy_is_409() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    let body = json!({
        "id": "RF1", "model": "PaaS", "software": [], "engines": [],
        "node": {"memory_gb": 32, "cpu_cores": 16, "disk_gb": 500, "gpu": false},
        "qos": {}
    });
    let (status, response) = put(
        &client,
        format!("{base}/v1/offerings/RF1"),
        body.to_string(),
    )
    .await;
    assert_eq!(status, 409);
    assert_eq!(response["error"]["code"], "NoHierarchy");
}

#[tokio::test]
async fn invalid_offering_is_400_with_machine_readable_reason() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    register_reference_catalog(&client, &base).await;
    let bad = json!({
        "id": "RF9", "model": "PaaS", "software": [], "engines": [],
        "node": {"memory_gb": 32, "cpu_cores": 16, "disk_gb": 500, "gpu": false},
        "qos": {"NodeCost": 0}
    });
    let (status, response) = put(
        &client,
        format!("{base}/v1/offerings/RF9"),
        bad.to_string(),
    )
    .await;
    assert_eq!(status, 400);
    assert_eq!(response["error"]["code"], "NonPositiveValue");
}

#[tokio::test]
async fn mismatched_path_and_body_ids_are_rejected() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    register_reference_catalog(&client, &base).await;
    let body = json!({
        "id": "RF1", "model": "PaaS", "software": [], "engines": [],
        "node": {"memory_gb": 32, "cpu_cores": 16, "disk_gb": 500, "gpu": false},
        "qos": {}
    });
    let (status, _) = put(
        &client,
        format!("{base}/v1/offerings/OTHER"),
        body.to_string(),
    )
    .await;
    assert_eq!(status, 400);
}

#[tokio::test]
async fn upsert_is_idempotent_while_revision_increments() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    register_reference_catalog(&client, &base).await;
    let offerings: Value = serde_json::from_str(&fixture_text("offerings.json")).unwrap();
    let rf2 = offerings["services"][1].to_string();
    let (_, first) = put(&client, format!("{base}/v1/offerings/RF2"), rf2.clone()).await;
    let (_, second) = put(&client, format!("{base}/v1/offerings/RF2"), rf2).await;
    let (r1, r2) = (
        first["revision"].as_u64().unwrap(),
        second["revision"].as_u64().unwrap(),
    );
    assert_eq!(r2, r1 + 1);
}

#[tokio::test]
async fn rank_on_the_reference_catalog_selects_the_derived_best() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    register_reference_catalog(&client, &base).await;
    let response = client
        .post(format!("{base}/v1/rank"))
        .body(fixture_text("requirements.json"))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status().as_u16(), 200);
    let body: Value = response.json().await.unwrap();
    assert_eq!(body["matched"], json!(["RF1", "RF2", "RF3", "RF4", "RF5"]));
    // with the derived cost column the cheapest offering wins
    assert_eq!(body["best"], "RF3");
}

#[tokio::test]
async fn rank_with_injected_vectors_reproduces_the_published_choice() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    register_reference_catalog(&client, &base).await;
    let mut request: Value = serde_json::from_str(&fixture_text("requirements.json")).unwrap();
    let injected: Value =
        serde_json::from_str(&fixture_text("reference_sub_vectors.json")).unwrap();
    request["inject_sub_vectors"] = injected;
    let response = client
        .post(format!("{base}/v1/rank"))
        .body(request.to_string())
        .send()
        .await
        .unwrap();
    assert_eq!(response.status().as_u16(), 200);
    let body: Value = response.json().await.unwrap();
    assert_eq!(body["best"], "RF2");
    assert_eq!(body["report"]["choices"][0]["label"], "First Choice");
}

#[tokio::test]
async fn unmatchable_constraints_are_422_empty_match() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    register_reference_catalog(&client, &base).await;
    let request = json!({"functional": {"min_node": {"memory_gb": 4096}}});
    let response = client
        .post(format!("{base}/v1/rank"))
        .body(request.to_string())
        .send()
        .await
        .unwrap();
    assert_eq!(response.status().as_u16(), 422);
    let body: Value = response.json().await.unwrap();
    assert_eq!(body["error"]["code"], "EmptyMatch");
}

#[tokio::test]
async fn rank_without_hierarchy_is_409() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    let response = client
        .post(format!("{base}/v1/rank"))
        .body("{}")
        .send()
        .await
        .unwrap();
    assert_eq!(response.status().as_u16(), 409);
}

#[tokio::test]
async fn single_registered_service_is_the_best_choice() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    let (status, _) = put(
        &client,
        format!("{base}/v1/hierarchy"),
        fixture_text("hierarchy.json"),
    )
    .await;
    assert_eq!(status, 200);
    let offerings: Value = serde_json::from_str(&fixture_text("offerings.json")).unwrap();
    let rf4 = offerings["services"][3].to_string();
    put(&client, format!("{base}/v1/offerings/RF4"), rf4).await;
    let response = client
        .post(format!("{base}/v1/rank"))
        .body("{}")
        .send()
        .await
        .unwrap();
    let body: Value = response.json().await.unwrap();
    assert_eq!(body["best"], "RF4");
    assert_eq!(body["report"]["final"]["values"], json!([1.0]));
}

#[tokio::test]
async fn stored_report_is_returned_verbatim_and_unknown_ids_are_404() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    register_reference_catalog(&client, &base).await;
    let rank_body: Value = client
        .post(format!("{base}/v1/rank"))
        .body("{}")
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let id = rank_body["id"].as_str().unwrap();
    let stored: Value = client
        .get(format!("{base}/v1/reports/{id}"))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(stored, rank_body);

    let missing = client
        .get(format!("{base}/v1/reports/no-such-id"))
        .send()
        .await
        .unwrap();
    assert_eq!(missing.status().as_u16(), 404);
}

#[tokio::test]
async fn replaying_a_rank_request_yields_byte_identical_bodies() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    register_reference_catalog(&client, &base).await;
    let body = fixture_text("requirements.json");
    let mut raw = Vec::new();
    for _ in 0..2 {
        let response = client
            .post(format!("{base}/v1/rank"))
            .body(body.clone())
            .send()
            .await
            .unwrap();
        raw.push(response.bytes().await.unwrap());
    }
    assert_eq!(raw[0], raw[1]);
}

#[tokio::test]
async fn two_distinct_rank_requests_store_two_reports() {
    let base = spawn_server().await;
    let client = reqwest::Client::new();
    register_reference_catalog(&client, &base).await;
    let first: Value = client
        .post(format!("{base}/v1/rank"))
        .body("{}")
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let second: Value = client
        .post(format!("{base}/v1/rank"))
        .body(json!({"weights": {"Q_O": 0.5, "Q_R": 0.5}}).to_string())
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_ne!(first["id"], second["id"]);
    for report in [&first, &second] {
        let id = report["id"].as_str().unwrap();
        let status = client
            .get(format!("{base}/v1/reports/{id}"))
            .send()
            .await
            .unwrap()
            .status();
        assert_eq!(status.as_u16(), 200);
    }
}
