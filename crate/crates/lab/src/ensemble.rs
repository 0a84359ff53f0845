//! Parallel Born-sampled ensembles with a thread-count-independent merge.

use std::ops::Range;

use arrival_core::arrivals::{run_ensemble, ArrivalHistogram, EnsembleConfig};
use arrival_core::fields::WaveField;
use arrival_core::guidance::{BornSampler, Surface};
use arrival_core::{Error, Result};
use rayon::prelude::*;

/// Trajectories per work item.
pub const CHUNK: u64 = 256;

/// Stream-index ranges of `n` trajectories in fixed chunks.
pub fn chunks(n: u64) -> Vec<Range<u64>> {
    (0..n.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(n)).collect()
}

/// Arrival histogram of `n` Born-distributed trajectories, computed on the current rayon
/// pool. Chunks are merged in index order, so the result does not depend on the number
/// of threads.
pub fn parallel_arrivals(
    field: &WaveField,
    surface: &Surface,
    n: u64,
    seed: u64,
    cfg: &EnsembleConfig,
) -> Result<ArrivalHistogram> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", reason: "need at least one trajectory".into() });
    }
    if !cfg.t_max.is_finite() {
        return Err(Error::InvalidParameter { name: "t_max", reason: "must be finite".into() });
    }
    let sampler = BornSampler::new(field, cfg.t0, seed, cfg.region)?;
    let parts: Vec<Result<ArrivalHistogram>> =
        chunks(n).into_par_iter().map(|r| run_ensemble(&sampler, field, surface, cfg, r)).collect();
    let mut total = ArrivalHistogram::new(cfg.edges()?)?;
    for part in parts {
        total.merge(&part?)?;
    }
    Ok(total)
}
