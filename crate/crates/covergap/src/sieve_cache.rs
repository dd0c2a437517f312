//! Binary sieve cache.
//!
//! Layout: `b"CGSV1"`, the limit as `u64` LE, then `limit` `u32` LE largest
//! prime factors followed by `limit` `u32` LE smallest prime factors, both for
//! `n = 1..=limit`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use covergap_core::FactorTable;

pub const MAGIC: &[u8; 5] = b"CGSV1";

pub fn encode<W: Write>(mut w: W, table: &FactorTable) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&table.limit().to_le_bytes())?;
    for v in table.lpf_entries().iter().chain(table.spf_entries()) {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32s<R: Read>(r: &mut R, n: usize) -> Result<Vec<u32>> {
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes).context("sieve cache is truncated")?;
    Ok(bytes.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

pub fn decode<R: Read>(mut r: R) -> Result<FactorTable> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).context("sieve cache is truncated")?;
    if &magic != MAGIC {
        bail!("not a sieve cache (bad magic)");
    }
    let mut limit = [0u8; 8];
    r.read_exact(&mut limit).context("sieve cache is truncated")?;
    let limit = u64::from_le_bytes(limit);
    if limit == 0 || limit > u64::from(u32::MAX) {
        bail!("sieve cache limit {limit} out of range");
    }
    let lpf = read_u32s(&mut r, limit as usize)?;
    let spf = read_u32s(&mut r, limit as usize)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        bail!("trailing bytes after sieve cache");
    }
    Ok(FactorTable::from_parts(limit, &lpf, &spf)?)
}

pub fn write(path: &Path, table: &FactorTable) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    encode(BufWriter::new(f), table)
}

pub fn read(path: &Path) -> Result<FactorTable> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    decode(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}
