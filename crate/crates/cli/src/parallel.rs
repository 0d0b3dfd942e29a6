//! Chains on worker threads. Chain `i` always uses random stream `i`, and
//! traces are merged in index order, so the result does not depend on the
//! thread count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use asi_core::mcmc::{run_chain, ChainConfig, ChainTrace};
use asi_core::{Hyperparameters, JDataset, ModelState};

pub fn run_chains_parallel(
    data: &JDataset,
    hyper: &Hyperparameters,
    config: &ChainConfig,
    init: Option<&ModelState>,
    threads: usize,
) -> asi_core::Result<ChainTrace> {
    config.validate()?;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<asi_core::Result<ChainTrace>>>> = Mutex::new((0..config.chains).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, config.chains) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= config.chains {
                    break;
                }
                let result = run_chain(data, hyper, config, i, init);
                slots.lock().expect("no poisoned workers")[i] = Some(result);
            });
        }
    });
    let mut merged = ChainTrace::default();
    for slot in slots.into_inner().expect("no poisoned workers") {
        merged.merge(slot.expect("every chain ran")?);
    }
    Ok(merged)
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
