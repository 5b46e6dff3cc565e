//! Background layout jobs and their progress fan-out.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use indexmap::IndexMap;
use serde::Serialize;
use tgforge_core::engine::ProgressEvent;
use tgforge_core::{run_layout, EngineOptions, Layout, LayoutParams, TheoryGraph};
use tokio::sync::broadcast;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Pending,
    Running,
    Converged,
    Stopped,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            JobState::Converged | JobState::Stopped | JobState::Failed
        )
    }
}

/// One progress or terminal event as sent to subscribers.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProgressMessage {
    pub job_id: String,
    pub state: JobState,
    pub iteration: usize,
    pub max_displacement: f64,
    pub mean_edge_length: f64,
    pub converged: bool,
    pub terminal: bool,
    /// Positions rounded to six significant digits.
    pub positions: IndexMap<String, [f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn rounded_positions(layout: &Layout) -> IndexMap<String, [f64; 3]> {
    layout
        .positions
        .iter()
        .map(|(id, p)| {
            (
                id.clone(),
                [round_sig6(p.x), round_sig6(p.y), round_sig6(p.z)],
            )
        })
        .collect()
}

#[derive(Debug)]
pub struct JobStatus {
    pub state: JobState,
    pub latest: Option<ProgressMessage>,
    pub result: Option<Layout>,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct Job {
    pub id: String,
    pub params: LayoutParams,
    status: Mutex<JobStatus>,
    events: broadcast::Sender<ProgressMessage>,
    cancel: AtomicBool,
}

impl Job {
    pub fn new(id: String, params: LayoutParams) -> Self {
        let (events, _) = broadcast::channel(1024);
        Self {
            id,
            params,
            status: Mutex::new(JobStatus {
                state: JobState::Pending,
                latest: None,
                result: None,
                error: None,
            }),
            events,
            cancel: AtomicBool::new(false),
        }
    }

    pub fn state(&self) -> JobState {
        self.status.lock().unwrap().state
    }

    /// Runs `f` on the current status under the job lock.
    pub fn with_status<R>(&self, f: impl FnOnce(&JobStatus) -> R) -> R {
        f(&self.status.lock().unwrap())
    }

    /// Subscribes and reads the status atomically, so a subscriber that sees a
    /// non-terminal state is guaranteed to receive the terminal event.
    pub fn subscribe(
        &self,
    ) -> (
        broadcast::Receiver<ProgressMessage>,
        Option<ProgressMessage>,
    ) {
        let status = self.status.lock().unwrap();
        let rx = self.events.subscribe();
        let terminal = status
            .state
            .is_terminal()
            .then(|| status.latest.clone())
            .flatten();
        (rx, terminal)
    }

    pub fn request_stop(&self) {
        self.cancel.store(true, Ordering::SeqCst);
    }

    fn publish(&self, message: ProgressMessage, update: impl FnOnce(&mut JobStatus)) {
        let mut status = self.status.lock().unwrap();
        update(&mut status);
        status.latest = Some(message.clone());
        // No receivers is fine.
        let _ = self.events.send(message);
    }

    /// Runs the layout on the calling (blocking) thread, publishing a snapshot
    /// every `every` iterations and a terminal event at the end. `on_finish`
    /// sees a successful result before the terminal event goes out.
    pub fn run(
        &self,
        graph: &TheoryGraph,
        every: usize,
        pool: Option<&rayon::ThreadPool>,
        on_finish: impl FnOnce(&Layout),
    ) -> Option<Layout> {
        {
            let mut status = self.status.lock().unwrap();
            status.state = JobState::Running;
        }
        let every = every.max(1);
        let mut on_progress = |e: &ProgressEvent<'_>| {
            if e.iteration.is_multiple_of(every) {
                let snapshot = e.snapshot();
                let message = ProgressMessage {
                    job_id: self.id.clone(),
                    state: JobState::Running,
                    iteration: e.iteration,
                    max_displacement: e.max_displacement,
                    mean_edge_length: e.mean_edge_length,
                    converged: false,
                    terminal: false,
                    positions: rounded_positions(&snapshot),
                    error: None,
                };
                self.publish(message, |s| s.result = Some(snapshot));
            }
            if self.cancel.load(Ordering::SeqCst) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        };
        let mut run = || {
            run_layout(
                graph,
                &self.params,
                EngineOptions::default(),
                Some(&mut on_progress),
            )
        };
        let outcome = match pool {
            Some(pool) => pool.install(run),
            None => run(),
        };

        match outcome {
            Ok(layout) => {
                let state = if layout.converged {
                    JobState::Converged
                } else {
                    JobState::Stopped
                };
                let message = ProgressMessage {
                    job_id: self.id.clone(),
                    state,
                    iteration: layout.iterations_run,
                    max_displacement: layout.final_max_displacement,
                    mean_edge_length: tgforge_core::engine::mean_edge_length(
                        graph,
                        &layout.points_for(graph).expect("layout covers graph"),
                    ),
                    converged: layout.converged,
                    terminal: true,
                    positions: rounded_positions(&layout),
                    error: None,
                };
                on_finish(&layout);
                let result = layout.clone();
                self.publish(message, |s| {
                    s.state = state;
                    s.result = Some(result);
                });
                Some(layout)
            }
            Err(e) => {
                let iteration = self.with_status(|s| s.latest.as_ref().map_or(0, |m| m.iteration));
                let message = ProgressMessage {
                    job_id: self.id.clone(),
                    state: JobState::Failed,
                    iteration,
                    max_displacement: f64::NAN,
                    mean_edge_length: f64::NAN,
                    converged: false,
                    terminal: true,
                    positions: IndexMap::new(),
                    error: Some(e.to_string()),
                };
                self.publish(message, |s| {
                    s.state = JobState::Failed;
                    s.error = Some(e.to_string());
                });
                None
            }
        }
    }
}

/// Shared handle used by the HTTP layer.
pub type JobHandle = Arc<Job>;
