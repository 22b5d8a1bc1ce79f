//! Adjustable artificial delays, shared between the component that sleeps
//! and whoever tunes the latency profile.

use std::sync::Arc;
use std::time::Duration;

use parking_lot::RwLock;

#[derive(Debug, Clone, Default)]
pub struct Delay(Arc<RwLock<Duration>>);

impl Delay {
    pub fn new(d: Duration) -> Self {
        Self(Arc::new(RwLock::new(d)))
    }

    pub fn get(&self) -> Duration {
        *self.0.read()
    }

    pub fn set(&self, d: Duration) {
        *self.0.write() = d;
    }

    pub fn set_secs(&self, secs: f64) {
        self.set(Duration::from_secs_f64(secs.max(0.0)));
    }

    pub async fn wait(&self) {
        let d = self.get();
        if !d.is_zero() {
            tokio::time::sleep(d).await;
        }
    }
}
