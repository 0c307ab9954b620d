use std::f64::consts::PI;
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use chainforge::{
    effective_model, generate_linear, reference_chains, run_experiment, solve, ChainCouplings,
    DisorderConfig, DisorderReport, Spectrum,
};
use chainforge_service::{
    router, ApiError, EigensystemResponse, ErrorCode, JobAccepted, JobState, JobStatus,
    ServiceConfig, SolveResponse, Trace,
};
use http_body_util::BodyExt;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(ServiceConfig::default())
}

async fn send(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, bytes)
}

async fn post<T: DeserializeOwned>(app: &Router, uri: &str, body: Value) -> (StatusCode, T) {
    let (status, bytes) = send(app, Method::POST, uri, Some(body)).await;
    let parsed = serde_json::from_slice(&bytes)
        .unwrap_or_else(|e| panic!("{uri}: {e}: {}", String::from_utf8_lossy(&bytes)));
    (status, parsed)
}

async fn get<T: DeserializeOwned>(app: &Router, uri: &str) -> (StatusCode, T) {
    let (status, bytes) = send(app, Method::GET, uri, None).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[tokio::test]
async fn spectrum_from_family_with_shift() {
    let (status, s): (_, Spectrum) = post(
        &app(),
        "/api/spectrum",
        json!({"family": "linear", "n": 31, "a": 7, "shift": 6}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s.len(), 31);
    assert!(s.values().contains(&1.0) && s.values().contains(&-1.0));
}

#[tokio::test]
async fn spectrum_from_values() {
    let (status, s): (_, Spectrum) =
        post(&app(), "/api/spectrum", json!({"values": [1, -1, 0]})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s.values(), &[-1.0, 0.0, 1.0]);

    let (status, err): (_, ApiError) =
        post(&app(), "/api/spectrum", json!({"values": [1, 1, 2]})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err.code, ErrorCode::InvalidSpectrum);
}

#[tokio::test]
async fn spectrum_request_validation() {
    for body in [
        json!({}),
        json!({"family": "linear", "n": 5}),
        json!({"family": "linear", "n": 5, "a": 2}),
        json!({"family": "cosine", "values": [1, 2]}),
        json!({"family": "banana", "n": 5}),
    ] {
        let (status, err): (_, ApiError) = post(&app(), "/api/spectrum", body.clone()).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(err.code, ErrorCode::BadRequest, "{body}");
    }
    let (status, err): (_, ApiError) = post(
        &app(),
        "/api/spectrum",
        json!({"family": "linear", "n": 5, "a": 1, "shift": 1}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err.code, ErrorCode::InvalidSpectrum);
}

#[tokio::test]
async fn malformed_json_is_a_bad_request() {
    let req = Request::post("/api/solve")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    let resp = app().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::UNPROCESSABLE_ENTITY);
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let err: ApiError = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(err.code, ErrorCode::BadRequest);
}

#[tokio::test]
async fn solve_examples_over_the_wire() {
    let cases: [(&[f64], &[f64]); 3] = [
        (&[-1.0, 1.0], &[1.0]),
        (&[-2.0, 0.0, 2.0], &[2f64.sqrt(), 2f64.sqrt()]),
        (
            &[-2.0, -1.0, 0.0, 1.0, 2.0],
            &[1.0, 1.5f64.sqrt(), 1.5f64.sqrt(), 1.0],
        ),
    ];
    for (values, b) in cases {
        let (status, resp): (_, SolveResponse) =
            post(&app(), "/api/solve", json!({"values": values})).await;
        assert_eq!(status, StatusCode::OK);
        assert!(resp.couplings.a().iter().all(|a| a.abs() < 1e-14));
        for (x, y) in resp.couplings.b().iter().zip(b) {
            assert!(
                (x - y).abs() < 1e-12,
                "{values:?}: {:?}",
                resp.couplings.b()
            );
        }
        // stateless: identical to the direct call
        let direct = solve(&Spectrum::new(values.to_vec()).unwrap()).unwrap();
        assert_eq!(resp.couplings, direct);
    }
}

#[tokio::test]
async fn solve_reports_pst_and_boundary_metric() {
    let s = chainforge::shift_spectrum(&generate_linear(31, 7).unwrap(), 6.0).unwrap();
    let body = serde_json::to_value(&s).unwrap();
    let (status, resp): (_, SolveResponse) = post(&app(), "/api/solve", body.clone()).await;
    assert_eq!(status, StatusCode::OK);
    assert!(resp.pst.is_pst);
    assert_eq!(resp.pst.tau, PI);

    let mut with_count = body.clone();
    with_count["central_count"] = json!(2);
    with_count["tau"] = json!(PI / 7.0);
    let (_, resp): (_, SolveResponse) = post(&app(), "/api/solve", with_count).await;
    assert!(resp.boundary_metric < 0.1);
    assert!(!resp.pst.is_pst);

    let mut too_many = body;
    too_many["central_count"] = json!(31);
    let (status, err): (_, ApiError) = post(&app(), "/api/solve", too_many).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err.code, ErrorCode::BadRequest);
}

#[tokio::test]
async fn oversized_spectrum_reports_solver_overflow() {
    let s = generate_linear(2000, 1).unwrap();
    let (status, err): (_, ApiError) =
        post(&app(), "/api/solve", json!({"values": s.values()})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err.code, ErrorCode::SolverOverflow);
    assert!(err.detail.unwrap()["index"].is_u64());
}

#[tokio::test]
async fn evolve_trace() {
    let c = solve(&generate_linear(9, 3).unwrap()).unwrap();
    let (status, trace): (_, Trace) = post(
        &app(),
        "/api/evolve",
        json!({"couplings": c, "t_grid": [0.0, PI / 3.0]}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(trace.f[0], 0.0);
    assert!((trace.f[1] - 1.0).abs() < 1e-8);
    assert_eq!(trace.fidelity[0], 0.5);

    let (_, trace): (_, Trace) = post(
        &app(),
        "/api/evolve",
        json!({"couplings": c, "t_max": PI, "points": 101}),
    )
    .await;
    assert_eq!(trace.t.len(), 101);
    assert_eq!(*trace.t.last().unwrap(), PI);

    let (status, err): (_, ApiError) =
        post(&app(), "/api/evolve", json!({"couplings": c, "t_max": PI})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err.code, ErrorCode::BadRequest);
}

#[tokio::test]
async fn bad_couplings_are_rejected() {
    let (status, err): (_, ApiError) = post(
        &app(),
        "/api/evolve",
        json!({"couplings": {"a": [0, 0], "b": [-1]}, "t_grid": [0]}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err.code, ErrorCode::BadRequest);
}

#[tokio::test]
async fn eigensystem_and_effective_model() {
    let c = ChainCouplings::uniform(5, 1.0).unwrap();
    let (status, es): (_, EigensystemResponse) =
        post(&app(), "/api/eigensystem", json!({"couplings": c})).await;
    assert_eq!(status, StatusCode::OK);
    for (k, l) in es.eigenvalues.iter().enumerate() {
        let expected = -2.0 * (PI * (k + 1) as f64 / 6.0).cos();
        assert!((l - expected).abs() < 1e-12);
    }
    assert_eq!(es.parities, vec![1, -1, 1, -1, 1]);

    let weak = ChainCouplings::new(vec![0.0; 5], vec![0.01, 1.0, 1.0, 0.01]).unwrap();
    let (status, model): (_, Value) =
        post(&app(), "/api/effective", json!({"couplings": weak})).await;
    assert_eq!(status, StatusCode::OK);
    let direct = serde_json::to_value(effective_model(&weak).unwrap()).unwrap();
    assert_eq!(model, direct);
    assert_eq!(model["parity"], "odd_n");
}

#[tokio::test]
async fn presets_are_the_four_reference_chains() {
    let (status, presets): (_, Vec<chainforge::ReferenceChain>) = get(&app(), "/api/presets").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(presets, reference_chains().unwrap());
}

fn disorder_body(c: &ChainCouplings, cfg: &DisorderConfig) -> Value {
    let mut body = serde_json::to_value(cfg).unwrap();
    body["couplings"] = serde_json::to_value(c).unwrap();
    body
}

#[tokio::test]
async fn small_disorder_runs_answer_directly() {
    let chain = &reference_chains().unwrap()[0];
    let cfg = DisorderConfig::new(0.05, 200, 42, chain.tau);
    let (status, report): (_, DisorderReport) = post(
        &app(),
        "/api/disorder",
        disorder_body(&chain.couplings, &cfg),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report, run_experiment(&chain.couplings, &cfg).unwrap());

    let bad = DisorderConfig::new(1.5, 200, 42, chain.tau);
    let (status, err): (_, ApiError) = post(
        &app(),
        "/api/disorder",
        disorder_body(&chain.couplings, &bad),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err.code, ErrorCode::BadRequest);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_disorder_runs_match_serial_results() {
    let app = app();
    let chain = reference_chains().unwrap().remove(1);
    let tasks: Vec<_> = (0..16u64)
        .map(|seed| {
            let app = app.clone();
            let cfg = DisorderConfig::new(0.05, 300, 1000 + seed, chain.tau);
            let body = disorder_body(&chain.couplings, &cfg);
            tokio::spawn(async move {
                let (status, report): (_, DisorderReport) = post(&app, "/api/disorder", body).await;
                assert_eq!(status, StatusCode::OK);
                (cfg, report)
            })
        })
        .collect();
    for task in tasks {
        let (cfg, report) = task.await.unwrap();
        assert_eq!(report, run_experiment(&chain.couplings, &cfg).unwrap());
    }
}

async fn wait_for(app: &Router, id: u64, state: JobState) -> JobStatus {
    for _ in 0..600 {
        let (status, job): (_, JobStatus) = get(app, &format!("/api/jobs/{id}")).await;
        assert_eq!(status, StatusCode::OK);
        if job.state == state {
            return job;
        }
        assert_eq!(job.state, JobState::Running, "{job:?}");
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    panic!("job {id} never reached {state:?}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn large_disorder_runs_become_jobs() {
    let app = app();
    let chain = &reference_chains().unwrap()[3];
    let cfg = DisorderConfig::new(0.05, 3000, 9, chain.tau);
    let (status, accepted): (_, JobAccepted) =
        post(&app, "/api/disorder", disorder_body(&chain.couplings, &cfg)).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_eq!(accepted.total, 3000);
    let done = wait_for(&app, accepted.job_id, JobState::Completed).await;
    assert_eq!(done.completed, 3000);
    assert_eq!(
        done.report.unwrap(),
        run_experiment(&chain.couplings, &cfg).unwrap()
    );
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn job_events_stream_progress_then_result() {
    let app = app();
    let chain = &reference_chains().unwrap()[0];
    let cfg = DisorderConfig::new(0.05, 5000, 3, chain.tau);
    let (_, accepted): (_, JobAccepted) =
        post(&app, "/api/disorder", disorder_body(&chain.couplings, &cfg)).await;
    let (status, bytes) = send(&app, Method::GET, &accepted.events_url, None).await;
    assert_eq!(status, StatusCode::OK);
    let text = String::from_utf8(bytes).unwrap();
    let mut names = Vec::new();
    let mut last_data = String::new();
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("event: ") {
            names.push(name.to_owned());
        } else if let Some(data) = line.strip_prefix("data: ") {
            last_data = data.to_owned();
        }
    }
    assert!(names.len() >= 2, "{text}");
    assert!(names[..names.len() - 1].iter().all(|n| n == "progress"));
    assert_eq!(names.last().unwrap(), "completed");
    let status: JobStatus = serde_json::from_str(&last_data).unwrap();
    assert_eq!(status.report.unwrap().overlaps.len(), 5000);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn jobs_can_be_cancelled() {
    let app = app();
    let chain = &reference_chains().unwrap()[0];
    let cfg = DisorderConfig::new(0.05, 5_000_000, 1, chain.tau);
    let (_, accepted): (_, JobAccepted) =
        post(&app, "/api/disorder", disorder_body(&chain.couplings, &cfg)).await;
    let (status, bytes) = send(&app, Method::DELETE, &accepted.status_url, None).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let _: JobStatus = serde_json::from_slice(&bytes).unwrap();
    let job = wait_for(&app, accepted.job_id, JobState::Cancelled).await;
    assert!(job.completed < job.total);
    assert!(job.report.is_none());
}

#[tokio::test]
async fn unknown_jobs_are_not_found() {
    let (status, err): (_, ApiError) = get(&app(), "/api/jobs/987654").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err.code, ErrorCode::BadRequest);
}

#[tokio::test]
async fn cors_allows_only_local_origins() {
    for (origin, allowed) in [
        ("http://localhost:5173", true),
        ("http://evil.example", false),
    ] {
        let req = Request::builder()
            .method(Method::OPTIONS)
            .uri("/api/solve")
            .header(header::ORIGIN, origin)
            .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
            .body(Body::empty())
            .unwrap();
        let resp = app().oneshot(req).await.unwrap();
        let header = resp.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN);
        assert_eq!(header.is_some(), allowed, "{origin}");
        if allowed {
            assert_eq!(header.unwrap(), origin);
        }
    }
}

#[tokio::test]
async fn serves_the_ui_bundle_when_configured() {
    let dir = std::env::temp_dir().join(format!("chainforge-ui-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<title>designer</title>").unwrap();
    let app = router(ServiceConfig {
        static_dir: Some(dir.clone()),
        ..Default::default()
    });
    let (status, body) = send(&app, Method::GET, "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<title>designer</title>");
    let (status, _) = send(&app, Method::GET, "/api/presets", None).await;
    assert_eq!(status, StatusCode::OK);
    std::fs::remove_dir_all(dir).unwrap();
}
