//! File formats, the example catalog, sphere rendering and the `nilhom`
//! command line on top of `nilhom-core`.

pub mod catalog;
pub mod cli;
pub mod io;
pub mod render;

use nilhom_core::metric::{verify_axioms_range, AxiomReport, Distance, MetricError};
use nilhom_core::spectral::DilationFlow;

/// [`verify_axioms_range`] over `0..samples` split across `threads` workers.
/// The merged report does not depend on the number of threads.
pub fn axioms_parallel<D: Distance + Sync>(
    d: &D,
    flow: Option<&DilationFlow>,
    samples: usize,
    seed: u64,
    radius: f64,
    threads: usize,
) -> Result<AxiomReport, MetricError> {
    let threads = threads.clamp(1, samples.max(1));
    let chunk = samples.div_ceil(threads);
    let parts: Vec<Result<AxiomReport, MetricError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let range = (t * chunk).min(samples)..((t + 1) * chunk).min(samples);
                s.spawn(move || verify_axioms_range(d, flow, range, seed, radius))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("axiom worker panicked")).collect()
    });
    let mut parts = parts.into_iter();
    let first = parts.next().expect("at least one worker")?;
    parts.try_fold(first, |acc, p| Ok(acc.merge(&p?)))
}
