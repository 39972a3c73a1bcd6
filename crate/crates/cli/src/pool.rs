use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::PipelineError;
use crate::layout::ImageRecord;
use crate::report::Outcome;

pub fn ensure_dirs(root: &Path, dirs: &[&str]) -> Result<(), PipelineError> {
    for d in dirs {
        let p = root.join(d);
        fs::create_dir_all(&p).map_err(|e| PipelineError::io(p, e))?;
    }
    Ok(())
}

/// Runs `f` over every record on a pool of `jobs` threads; results keep input order.
pub fn run_records<F>(jobs: usize, records: &[ImageRecord], f: F) -> Result<Vec<Outcome>, PipelineError>
where
    F: Fn(&ImageRecord) -> Outcome + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    Ok(pool.install(|| {
        records
            .par_iter()
            .map(|r| {
                let start = Instant::now();
                let out = f(r);
                log::info!("{} {} in {:.2?}", r.id, out.status, start.elapsed());
                out
            })
            .collect()
    }))
}
