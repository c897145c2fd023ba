//! Lazy, shared access to the MNIST datasets.

use bordernet_core::mnist::{load_mnist, Dataset};
use bordernet_core::Result;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

/// Loads the train/test pair on first use and shares it across requests.
///
/// A failed load (missing files) is not cached, so fixing the data directory
/// and retrying works without a restart.
pub struct DataStore {
    dir: PathBuf,
    slot: Mutex<Option<Arc<(Dataset, Dataset)>>>,
}

impl std::fmt::Debug for DataStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DataStore")
            .field("dir", &self.dir)
            .field("loaded", &self.slot.lock().unwrap().is_some())
            .finish()
    }
}

impl DataStore {
    pub fn new(dir: PathBuf) -> Self {
        DataStore {
            dir,
            slot: Mutex::new(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// The (train, test) pair, loading it on first call. Blocking.
    pub fn get_or_load(&self) -> Result<Arc<(Dataset, Dataset)>> {
        let mut slot = self.slot.lock().unwrap();
        if let Some(data) = slot.as_ref() {
            return Ok(Arc::clone(data));
        }
        let pair = Arc::new(load_mnist(&self.dir)?);
        *slot = Some(Arc::clone(&pair));
        Ok(pair)
    }
}
