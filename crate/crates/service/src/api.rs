use std::convert::Infallible;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::Json;
use chainforge::dynamics::uniform_grid;
use chainforge::effective::EffectiveModel;
use chainforge::spectrum::SpectrumParams;
use chainforge::{
    average_fidelity, boundary_metric, effective_model, eigendecompose, generate, overlap_trace,
    reference_chains, run_experiment_with, shift_spectrum, solve, verify_pst, ChainCouplings,
    DisorderConfig, DisorderReport, Family, PstReport, ReferenceChain, RunOptions, Spectrum,
};
use futures::stream::{self, Stream};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiJson, HttpError};
use crate::jobs::{Job, JobStatus};
use crate::AppState;

type ApiResult<T> = Result<T, HttpError>;

/// Runs a CPU-bound closure off the async executor.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> chainforge::Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| HttpError::from(ApiError::bad_request(format!("worker failed: {e}"))))?
        .map_err(HttpError::from)
}

#[derive(Debug, Deserialize)]
pub struct SpectrumRequest {
    pub family: Option<Family>,
    pub n: Option<usize>,
    pub a: Option<u32>,
    pub values: Option<Vec<f64>>,
    pub shift: Option<f64>,
}

pub async fn spectrum(ApiJson(req): ApiJson<SpectrumRequest>) -> ApiResult<Json<Spectrum>> {
    let base = match (req.values, req.family) {
        (Some(values), None | Some(Family::Custom)) => Spectrum::new(values)?,
        (None, Some(family)) => {
            let n = req
                .n
                .ok_or_else(|| ApiError::bad_request("field `n` is required with `family`"))?;
            generate(family, n, req.a)?
        }
        (Some(_), Some(_)) => {
            return Err(ApiError::bad_request("give either `family` or `values`, not both").into())
        }
        (None, None) => return Err(ApiError::bad_request("give `family` or `values`").into()),
    };
    Ok(Json(match req.shift {
        Some(c) => shift_spectrum(&base, c)?,
        None => base,
    }))
}

#[derive(Debug, Deserialize)]
pub struct SolveRequest {
    pub values: Vec<f64>,
    #[serde(default)]
    pub family: Family,
    #[serde(default)]
    pub params: Option<SpectrumParams>,
    pub tau: Option<f64>,
    #[serde(default)]
    pub central_count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveResponse {
    pub couplings: ChainCouplings,
    pub pst: PstReport,
    pub boundary_metric: f64,
    pub central_count: usize,
}

pub async fn solve_chain(ApiJson(req): ApiJson<SolveRequest>) -> ApiResult<Json<SolveResponse>> {
    let s = Spectrum::with_family(req.values, req.family, req.params)?;
    let tau = req.tau.unwrap_or(PI);
    let central_count = req.central_count;
    let out = blocking(move || {
        let couplings = solve(&s)?;
        Ok(SolveResponse {
            couplings,
            pst: verify_pst(&s, tau)?,
            boundary_metric: boundary_metric(&s, central_count)?,
            central_count,
        })
    })
    .await?;
    Ok(Json(out))
}

#[derive(Debug, Deserialize)]
pub struct EvolveRequest {
    pub couplings: ChainCouplings,
    pub t_grid: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Trace {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    /// Average fidelity `F = 1/2 + f/3 + f²/6` at each time.
    pub fidelity: Vec<f64>,
}

pub async fn evolve_chain(ApiJson(req): ApiJson<EvolveRequest>) -> ApiResult<Json<Trace>> {
    let grid = match (req.t_grid, req.t_max, req.points) {
        (Some(grid), None, None) => grid,
        (None, Some(t_max), Some(points)) => uniform_grid(t_max, points)?,
        _ => {
            return Err(
                ApiError::bad_request("give either `t_grid` or both `t_max` and `points`").into(),
            )
        }
    };
    let trace = blocking(move || {
        let es = eigendecompose(&req.couplings)?;
        let f = overlap_trace(&es, &grid)?;
        let fidelity = f
            .iter()
            .map(|x| average_fidelity(*x))
            .collect::<Result<_, _>>()?;
        Ok(Trace {
            t: grid,
            f,
            fidelity,
        })
    })
    .await?;
    Ok(Json(trace))
}

#[derive(Debug, Deserialize)]
pub struct ChainRequest {
    pub couplings: ChainCouplings,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EigensystemResponse {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// `+1`/`−1` for symmetric/antisymmetric eigenvectors, `0` otherwise.
    pub parities: Vec<i8>,
}

pub async fn eigensystem(
    ApiJson(req): ApiJson<ChainRequest>,
) -> ApiResult<Json<EigensystemResponse>> {
    let es = blocking(move || eigendecompose(&req.couplings)).await?;
    let parities = es.parities(1e-8);
    Ok(Json(EigensystemResponse {
        eigenvalues: es.eigenvalues,
        eigenvectors: es.eigenvectors,
        parities,
    }))
}

pub async fn effective(ApiJson(req): ApiJson<ChainRequest>) -> ApiResult<Json<EffectiveModel>> {
    Ok(Json(
        blocking(move || effective_model(&req.couplings)).await?,
    ))
}

#[derive(Debug, Deserialize)]
pub struct DisorderRequest {
    pub couplings: ChainCouplings,
    #[serde(flatten)]
    pub config: DisorderConfig,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JobAccepted {
    pub job_id: u64,
    pub total: usize,
    pub status_url: String,
    pub events_url: String,
}

pub async fn disorder(
    State(state): State<Arc<AppState>>,
    ApiJson(req): ApiJson<DisorderRequest>,
) -> ApiResult<Response> {
    req.config.validate()?;
    let threads = state.config.threads;
    if req.config.samples <= state.config.sync_limit {
        let report: DisorderReport = blocking(move || {
            let opts = RunOptions {
                threads,
                ..Default::default()
            };
            run_experiment_with(&req.couplings, &req.config, opts)
        })
        .await?;
        return Ok(Json(report).into_response());
    }
    let job = state.jobs.spawn(req.couplings, req.config, threads);
    let id = job.id();
    let accepted = JobAccepted {
        job_id: id,
        total: req.config.samples,
        status_url: format!("/api/jobs/{id}"),
        events_url: format!("/api/jobs/{id}/events"),
    };
    Ok((
        StatusCode::ACCEPTED,
        [(header::LOCATION, accepted.status_url.clone())],
        Json(accepted),
    )
        .into_response())
}

fn find_job(state: &AppState, id: u64) -> ApiResult<Arc<Job>> {
    state
        .jobs
        .get(id)
        .ok_or_else(|| HttpError::not_found(format!("no job with id {id}")))
}

pub async fn job_status(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
) -> ApiResult<Json<JobStatus>> {
    Ok(Json(find_job(&state, id)?.status()))
}

pub async fn cancel_job(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
) -> ApiResult<(StatusCode, Json<JobStatus>)> {
    let job = find_job(&state, id)?;
    job.cancel();
    Ok((StatusCode::ACCEPTED, Json(job.status())))
}

/// `progress` events carry `{completed, total}`; the stream ends with one
/// event named after the final state carrying the full job status.
pub async fn job_events(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u64>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let job = find_job(&state, id)?;
    let interval = state.config.progress_interval;
    let events = stream::unfold(
        (job, None::<usize>, false),
        move |(job, last, done)| async move {
            if done {
                return None;
            }
            loop {
                if job.is_finished() {
                    let status = job.status();
                    let name = serde_json::to_value(status.state)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_owned))
                        .unwrap_or_default();
                    let event = Event::default()
                        .event(name)
                        .json_data(&status)
                        .unwrap_or_default();
                    return Some((Ok(event), (job, last, true)));
                }
                let completed = job.completed();
                if last != Some(completed) {
                    let event = Event::default()
                        .event("progress")
                        .json_data(ProgressEvent {
                            completed,
                            total: job.total(),
                        })
                        .unwrap_or_default();
                    return Some((Ok(event), (job, Some(completed), false)));
                }
                tokio::time::sleep(interval).await;
            }
        },
    );
    Ok(Sse::new(events).keep_alive(KeepAlive::new().interval(Duration::from_secs(15))))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProgressEvent {
    pub completed: usize,
    pub total: usize,
}

pub async fn presets() -> ApiResult<Json<Vec<ReferenceChain>>> {
    Ok(Json(blocking(reference_chains).await?))
}
