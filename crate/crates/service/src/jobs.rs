//! Background disorder runs with progress and cancellation.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use chainforge::{run_experiment_with, ChainCouplings, DisorderConfig, DisorderReport, RunOptions};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Running,
    Completed,
    Failed,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub id: u64,
    pub state: JobState,
    pub completed: usize,
    pub total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<DisorderReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

enum Outcome {
    Report(DisorderReport),
    Failed(ApiError),
    Cancelled,
}

pub struct Job {
    id: u64,
    total: usize,
    progress: AtomicUsize,
    cancel: AtomicBool,
    outcome: Mutex<Option<Outcome>>,
}

impl Job {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn completed(&self) -> usize {
        self.progress.load(Ordering::Relaxed)
    }

    pub fn cancel(&self) {
        self.cancel.store(true, Ordering::Relaxed);
    }

    pub fn is_finished(&self) -> bool {
        self.outcome.lock().unwrap().is_some()
    }

    pub fn status(&self) -> JobStatus {
        let outcome = self.outcome.lock().unwrap();
        let (state, report, error) = match &*outcome {
            None => (JobState::Running, None, None),
            Some(Outcome::Report(r)) => (JobState::Completed, Some(r.clone()), None),
            Some(Outcome::Failed(e)) => (JobState::Failed, None, Some(e.clone())),
            Some(Outcome::Cancelled) => (JobState::Cancelled, None, None),
        };
        JobStatus {
            id: self.id,
            state,
            completed: self.completed(),
            total: self.total,
            report,
            error,
        }
    }

    fn run(&self, couplings: &ChainCouplings, config: &DisorderConfig, threads: Option<usize>) {
        let opts = RunOptions {
            threads,
            progress: Some(&self.progress),
            cancel: Some(&self.cancel),
        };
        let outcome = match run_experiment_with(couplings, config, opts) {
            Ok(report) => Outcome::Report(report),
            Err(chainforge::Error::Cancelled { .. }) => Outcome::Cancelled,
            Err(e) => Outcome::Failed(ApiError::from(&e)),
        };
        *self.outcome.lock().unwrap() = Some(outcome);
    }
}

#[derive(Default)]
pub struct JobTable {
    next_id: AtomicU64,
    jobs: Mutex<HashMap<u64, Arc<Job>>>,
}

impl JobTable {
    pub fn get(&self, id: u64) -> Option<Arc<Job>> {
        self.jobs.lock().unwrap().get(&id).cloned()
    }

    /// Registers a job and starts it on the blocking thread pool.
    pub fn spawn(
        &self,
        couplings: ChainCouplings,
        config: DisorderConfig,
        threads: Option<usize>,
    ) -> Arc<Job> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let job = Arc::new(Job {
            id,
            total: config.samples,
            progress: AtomicUsize::new(0),
            cancel: AtomicBool::new(false),
            outcome: Mutex::new(None),
        });
        self.jobs.lock().unwrap().insert(id, job.clone());
        let worker = job.clone();
        tokio::task::spawn_blocking(move || worker.run(&couplings, &config, threads));
        job
    }
}
