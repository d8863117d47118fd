use rayon::prelude::*;

use crate::error::{Error, Result};

/// Maps `f` over `items` on `workers` threads, keeping input order.
///
/// One worker runs on the calling thread; zero uses rayon's default pool
/// size. The result never depends on the worker count.
pub(crate) fn par_map<I, R, F>(workers: usize, items: Vec<I>, f: F) -> Result<Vec<R>>
where
    I: Send,
    R: Send,
    F: Fn(I) -> R + Sync + Send,
{
    if workers == 1 {
        return Ok(items.into_iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Pool(e.to_string()))?;
    Ok(pool.install(|| items.into_par_iter().map(f).collect()))
}
