use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

type Source = Arc<dyn Fn() -> Option<f64> + Send + Sync>;

/// A named algorithm parameter polled whenever a row is stored.
#[derive(Clone)]
pub struct Watcher {
    name: String,
    source: Source,
}

impl fmt::Debug for Watcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Watcher").field("name", &self.name).finish()
    }
}

impl Watcher {
    /// `source` returns `None` when the value is unavailable (logged as `nan`).
    pub fn new(
        name: impl Into<String>,
        source: impl Fn() -> Option<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let name = name.into();
        if name.is_empty()
            || name
                .chars()
                .any(|c| c.is_whitespace() || c == '"' || c == '\'' || c.is_control())
        {
            return Err(Error::InvalidParameter(format!(
                "watcher name {name:?} is not column-safe"
            )));
        }
        Ok(Watcher {
            name,
            source: Arc::new(source),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn poll(&self) -> f64 {
        (self.source)().unwrap_or(f64::NAN)
    }
}

/// Named scalars an algorithm publishes for watchers to read.
#[derive(Debug, Clone, Default)]
pub struct Parameters {
    values: Arc<Mutex<BTreeMap<String, f64>>>,
}

impl Parameters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&self, name: &str, value: f64) {
        self.lock().insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.lock().get(name).copied()
    }

    pub fn clear(&self) {
        self.lock().clear();
    }

    pub fn watcher(&self, name: &str) -> Result<Watcher> {
        let values = self.clone();
        let key = name.to_string();
        Watcher::new(name, move || values.get(&key))
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, BTreeMap<String, f64>> {
        self.values.lock().unwrap_or_else(|p| p.into_inner())
    }
}
