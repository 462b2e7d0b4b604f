//! On-disk and in-memory caches of simulated reject boundaries.
//!
//! File layout, all integers and floats little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 8 | magic `TKTPBND1` |
//! | 4 | format version (`u32`, currently 1) |
//! | 2 | length `L` of the code version string (`u16`) |
//! | L | code version, UTF-8 |
//! | 8 | `n` (`u64`) |
//! | 8 | `window` (`u64`) |
//! | 8 | `alpha` (`f64` bits) |
//! | 8 | `nsim` (`u64`) |
//! | 8 | `seed` (`u64`) |
//! | 1 | tie rule: 0 first, 1 random |
//! | 8 | quantile count `c` (`u64`) |
//! | 8c | quantiles `q` (`f64` bits), stage `window + 1` first |
//!
//! A file whose header does not match the request exactly, or that was
//! written by another code version, is regenerated. Writes go to a temporary
//! file in the same directory and are renamed into place.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use tktp_core::multistage::generate_reject_boundary;
use tktp_core::taupath::TieRule;
use tktp_core::{BoundaryParams, BoundarySource, RejectBoundary};

use crate::error::{AppError, Result};

pub const MAGIC: &[u8; 8] = b"TKTPBND1";
pub const FORMAT_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

fn tie_byte(t: TieRule) -> u8 {
    match t {
        TieRule::First => 0,
        TieRule::Random => 1,
    }
}

pub fn encode(b: &RejectBoundary) -> Vec<u8> {
    encode_with_version(b, FORMAT_VERSION, CODE_VERSION)
}

fn encode_with_version(b: &RejectBoundary, format: u32, code: &str) -> Vec<u8> {
    let p = &b.params;
    let mut out = Vec::with_capacity(64 + code.len() + 8 * b.q.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&format.to_le_bytes());
    out.extend_from_slice(&(code.len() as u16).to_le_bytes());
    out.extend_from_slice(code.as_bytes());
    for v in [p.n as u64, p.window as u64, p.alpha.to_bits(), p.nsim as u64, p.seed] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(tie_byte(p.tie_rule));
    out.extend_from_slice(&(b.q.len() as u64).to_le_bytes());
    for q in &b.q {
        out.extend_from_slice(&q.to_bits().to_le_bytes());
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("not a boundary file")]
    Magic,
    #[error("format version {0} is not supported")]
    Format(u32),
    #[error("written by code version {0}")]
    CodeVersion(String),
    #[error("truncated or malformed file")]
    Malformed,
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], DecodeError> {
        if self.0.len() < k {
            return Err(DecodeError::Malformed);
        }
        let (head, tail) = self.0.split_at(k);
        self.0 = tail;
        Ok(head)
    }

    fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<RejectBoundary, DecodeError> {
    let mut c = Cursor(bytes);
    if c.take(8)? != MAGIC {
        return Err(DecodeError::Magic);
    }
    let format = u32::from_le_bytes(c.take(4)?.try_into().expect("4 bytes"));
    if format != FORMAT_VERSION {
        return Err(DecodeError::Format(format));
    }
    let len = u16::from_le_bytes(c.take(2)?.try_into().expect("2 bytes")) as usize;
    let code = std::str::from_utf8(c.take(len)?).map_err(|_| DecodeError::Malformed)?;
    if code != CODE_VERSION {
        return Err(DecodeError::CodeVersion(code.to_string()));
    }
    let n = c.u64()? as usize;
    let window = c.u64()? as usize;
    let alpha = f64::from_bits(c.u64()?);
    let nsim = c.u64()? as usize;
    let seed = c.u64()?;
    let tie_rule = match c.take(1)?[0] {
        0 => TieRule::First,
        1 => TieRule::Random,
        _ => return Err(DecodeError::Malformed),
    };
    let count = c.u64()? as usize;
    if c.0.len() != count.checked_mul(8).ok_or(DecodeError::Malformed)? {
        return Err(DecodeError::Malformed);
    }
    let q = (0..count).map(|_| c.u64().map(f64::from_bits)).collect::<Result<Vec<_>, _>>()?;
    Ok(RejectBoundary { params: BoundaryParams { n, window, alpha, nsim, seed, tie_rule }, q })
}

/// Boundaries stored as one file per parameter set under `dir`.
#[derive(Debug)]
pub struct DiskCache {
    dir: PathBuf,
    memory: MemoryCache,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiskCache { dir: dir.into(), memory: MemoryCache::default() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, p: &BoundaryParams) -> PathBuf {
        let tie = match p.tie_rule {
            TieRule::First => "first",
            TieRule::Random => "random",
        };
        self.dir.join(format!(
            "boundary-n{}-w{}-a{:016x}-nsim{}-seed{}-{tie}-v{}.bin",
            p.n,
            p.window,
            p.alpha.to_bits(),
            p.nsim,
            p.seed,
            CODE_VERSION
        ))
    }

    /// Reads a cached boundary; `None` when absent, stale or not matching.
    pub fn load(&self, p: &BoundaryParams) -> Option<RejectBoundary> {
        let bytes = fs::read(self.path_for(p)).ok()?;
        decode(&bytes).ok().filter(|b| b.params == *p)
    }

    pub fn store(&self, b: &RejectBoundary) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).map_err(|e| AppError::io(&self.dir, e))?;
        let path = self.path_for(&b.params);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| AppError::io(&self.dir, e))?;
        tmp.write_all(&encode(b)).map_err(|e| AppError::io(tmp.path(), e))?;
        tmp.persist(&path).map_err(|e| AppError::io(&path, e.error))?;
        Ok(path)
    }

    /// Cached boundary if present and valid, otherwise simulated and stored.
    /// The flag tells whether the disk cache was hit.
    pub fn get_or_generate(&self, p: &BoundaryParams) -> Result<(RejectBoundary, bool)> {
        if let Some(b) = self.memory.get(p) {
            return Ok((b, true));
        }
        if let Some(b) = self.load(p) {
            self.memory.insert(b.clone());
            return Ok((b, true));
        }
        let b = generate_reject_boundary(p)?;
        self.store(&b)?;
        self.memory.insert(b.clone());
        Ok((b, false))
    }
}

impl BoundarySource for DiskCache {
    fn boundary(&self, params: &BoundaryParams) -> tktp_core::Result<RejectBoundary> {
        self.get_or_generate(params).map(|(b, _)| b).map_err(|e| match e {
            AppError::Core(e) => e,
            other => tktp_core::Error::InvalidArgument(other.to_string()),
        })
    }
}

/// Process-local boundary memo keyed by the exact parameters.
#[derive(Debug, Default)]
pub struct MemoryCache {
    map: Mutex<HashMap<Key, RejectBoundary>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key(usize, usize, u64, usize, u64, TieRule);

impl From<&BoundaryParams> for Key {
    fn from(p: &BoundaryParams) -> Self {
        Key(p.n, p.window, p.alpha.to_bits(), p.nsim, p.seed, p.tie_rule)
    }
}

impl MemoryCache {
    pub fn get(&self, p: &BoundaryParams) -> Option<RejectBoundary> {
        self.map.lock().expect("cache lock").get(&Key::from(p)).cloned()
    }

    pub fn insert(&self, b: RejectBoundary) {
        self.map.lock().expect("cache lock").insert(Key::from(&b.params), b);
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl BoundarySource for MemoryCache {
    fn boundary(&self, params: &BoundaryParams) -> tktp_core::Result<RejectBoundary> {
        if let Some(b) = self.get(params) {
            return Ok(b);
        }
        let b = generate_reject_boundary(params)?;
        self.insert(b.clone());
        Ok(b)
    }
}
