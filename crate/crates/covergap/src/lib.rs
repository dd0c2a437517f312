//! File formats around `covergap-core`: the sieve cache, covering JSON lines
//! and proof logs.

pub mod formats;
pub mod sieve_cache;

use std::path::Path;

use anyhow::Result;
use covergap_core::FactorTable;

/// Load the table from `cache` when it holds at least `limit` entries, else sieve
/// (and write the cache if a path was given).
pub fn load_table(limit: u64, cache: Option<&Path>) -> Result<FactorTable> {
    if let Some(path) = cache {
        if path.exists() {
            let table = sieve_cache::read(path)?;
            if table.limit() >= limit {
                return Ok(table);
            }
        }
        let table = FactorTable::build(limit)?;
        sieve_cache::write(path, &table)?;
        return Ok(table);
    }
    Ok(FactorTable::build(limit)?)
}
