//! Torus scans parallelised over rows.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use rumkit_core::symbol::{self, SpectrumScan};
use rumkit_core::CrystalFramework;

use crate::error::{FileError, Result};

pub const THREADS_VAR: &str = "RUMKIT_THREADS";

/// Thread cap from `RUMKIT_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(FileError::Usage(format!("{THREADS_VAR} must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Same samples as the sequential scan in any thread count. `progress` is
/// called with the number of finished rows.
pub fn scan_parallel(
    c: &CrystalFramework,
    resolution: usize,
    tol: f64,
    threads: Option<usize>,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<SpectrumScan> {
    if resolution < 8 {
        return Err(FileError::Usage("scan resolution must be at least 8".into()));
    }
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(FileError::Usage("tolerance must be a finite non-negative number".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| FileError::Usage(format!("cannot start worker threads: {e}")))?;
    let done = AtomicUsize::new(0);
    let rows: Vec<Vec<f64>> = pool.install(|| {
        (0..resolution)
            .into_par_iter()
            .map(|i| {
                let row = symbol::scan_row(c, resolution, i);
                progress(done.fetch_add(1, Ordering::Relaxed) + 1, resolution);
                row
            })
            .collect()
    });
    Ok(SpectrumScan::from_rows(resolution, rows, tol)?)
}
