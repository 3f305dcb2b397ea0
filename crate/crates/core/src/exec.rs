//! Job execution abstraction: the experiment code describes independent jobs
//! and a [`Runner`] decides how to execute them. Results always come back in
//! job order, so reductions are deterministic regardless of the runner.
use alloc::vec::Vec;

pub trait Runner: Sync {
    fn map<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Runner for Sequential {
    fn map<T, F>(&self, jobs: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..jobs).map(f).collect()
    }
}
