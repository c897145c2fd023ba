//! In-memory registry of background jobs.

use bordernet_client::wire::{JobInfo, JobKind, JobProgress, JobResultWire, JobState};
use std::collections::HashMap;
use std::sync::Mutex;
use uuid::Uuid;

#[derive(Default)]
pub struct JobRegistry {
    inner: Mutex<Inner>,
}

#[derive(Default)]
struct Inner {
    jobs: HashMap<Uuid, JobInfo>,
    /// Creation order, for stable listings.
    order: Vec<Uuid>,
}

fn now() -> String {
    bordernet_core::grid::now_rfc3339()
}

impl JobRegistry {
    pub fn create(&self, kind: JobKind) -> Uuid {
        let id = Uuid::new_v4();
        let info = JobInfo {
            id,
            kind,
            state: JobState::Queued,
            created_at: now(),
            finished_at: None,
            progress: None,
            result: None,
            error: None,
        };
        let mut inner = self.inner.lock().unwrap();
        inner.jobs.insert(id, info);
        inner.order.push(id);
        id
    }

    pub fn get(&self, id: Uuid) -> Option<JobInfo> {
        self.inner.lock().unwrap().jobs.get(&id).cloned()
    }

    pub fn list(&self) -> Vec<JobInfo> {
        let inner = self.inner.lock().unwrap();
        inner
            .order
            .iter()
            .filter_map(|id| inner.jobs.get(id).cloned())
            .collect()
    }

    pub fn mark_running(&self, id: Uuid) {
        self.update(id, |j| j.state = JobState::Running);
    }

    pub fn set_progress(&self, id: Uuid, progress: JobProgress) {
        self.update(id, |j| j.progress = Some(progress));
    }

    pub fn complete(&self, id: Uuid, result: JobResultWire) {
        self.update(id, |j| {
            j.state = JobState::Completed;
            j.finished_at = Some(now());
            j.result = Some(result);
        });
    }

    pub fn fail(&self, id: Uuid, error: String) {
        self.update(id, |j| {
            j.state = JobState::Failed;
            j.finished_at = Some(now());
            j.error = Some(error);
        });
    }

    fn update(&self, id: Uuid, f: impl FnOnce(&mut JobInfo)) {
        if let Some(job) = self.inner.lock().unwrap().jobs.get_mut(&id) {
            f(job);
        }
    }
}
