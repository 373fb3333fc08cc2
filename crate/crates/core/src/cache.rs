//! Memoized channel spectra, in memory and optionally on disk.
//!
//! On-disk layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size      field
//! 0       8         magic "HVDWSPEC"
//! 8       4         format version (u32, currently 1)
//! 12      4         l (u32)
//! 16      8         size N (u64)
//! 24      8         scale (f64)
//! 32      8         fine-structure constant of the run (f64)
//! 40      8 N       energies, ascending (f64)
//! 40+8N   8 N^2     transform, column-major (f64)
//! ```
//!
//! Files are named `l{l}_n{N}_s{scale bits as hex}.bin` inside the cache
//! directory, which defaults to `$HVDW_CACHE_DIR` when that is set.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;

use crate::basis::{build_channel_basis, RadialChannelBasis};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HVDWSPEC";
const VERSION: u32 = 1;

/// Environment variable naming the on-disk cache directory.
pub const CACHE_DIR_ENV: &str = "HVDW_CACHE_DIR";

type Key = (u32, usize, u64);

/// Thread-safe store of diagonalized channels keyed by (l, size, scale).
#[derive(Debug, Default)]
pub struct SpectralCache {
    entries: RwLock<HashMap<Key, Arc<RadialChannelBasis>>>,
    dir: Option<PathBuf>,
}

impl SpectralCache {
    /// Memory-only cache.
    pub fn new() -> Self {
        Self::default()
    }

    /// Cache backed by files in `dir`.
    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            entries: RwLock::default(),
            dir: Some(dir.into()),
        }
    }

    /// Memory cache, plus disk persistence when `HVDW_CACHE_DIR` is set.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::with_dir(PathBuf::from(d)),
            _ => Self::new(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Returns the channel, building (or loading) it on first use.
    pub fn channel(&self, l: u32, size: usize, scale: f64) -> Result<Arc<RadialChannelBasis>> {
        let key = (l, size, scale.to_bits());
        if let Some(hit) = self.entries.read().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        // Built outside the lock: a racing duplicate build is cheaper than
        // stalling every reader behind a diagonalization.
        let basis = Arc::new(self.load_or_build(l, size, scale)?);
        let mut map = self.entries.write().expect("cache lock poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(basis)))
    }

    fn file_for(&self, l: u32, size: usize, scale: f64) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("l{l}_n{size}_s{:016x}.bin", scale.to_bits())))
    }

    fn load_or_build(&self, l: u32, size: usize, scale: f64) -> Result<RadialChannelBasis> {
        let Some(path) = self.file_for(l, size, scale) else {
            return build_channel_basis(l, size, scale);
        };
        if path.exists() {
            let (basis, _) = read_basis(&path)?;
            if basis.l() == l && basis.size() == size && basis.scale().to_bits() == scale.to_bits()
            {
                return Ok(basis);
            }
        }
        let basis = build_channel_basis(l, size, scale)?;
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        }
        write_basis(&path, &basis, crate::constants::FINE_STRUCTURE)?;
        Ok(basis)
    }
}

/// Process-wide cache, initialized from the environment on first use.
pub fn global() -> &'static SpectralCache {
    static CACHE: OnceLock<SpectralCache> = OnceLock::new();
    CACHE.get_or_init(SpectralCache::from_env)
}

/// Writes one channel in the documented binary layout.
pub fn write_basis(path: &Path, basis: &RadialChannelBasis, fine_structure: f64) -> Result<()> {
    let n = basis.size();
    let mut buf = Vec::with_capacity(40 + 8 * n * (n + 1));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&basis.l().to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&basis.scale().to_le_bytes());
    buf.extend_from_slice(&fine_structure.to_le_bytes());
    for e in basis.energies() {
        buf.extend_from_slice(&e.to_le_bytes());
    }
    for v in basis.transform().iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    // write-then-rename so concurrent readers never see a torn file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
    fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Reads a channel file; returns the basis and the recorded fine-structure constant.
pub fn read_basis(path: &Path) -> Result<(RadialChannelBasis, f64)> {
    let bad = |what: &str| Error::Cache(format!("{}: {what}", path.display()));
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| bad(&e.to_string()))?;
    if bytes.len() < 40 || &bytes[..8] != MAGIC {
        return Err(bad("not a spectral cache file"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != VERSION {
        return Err(bad(&format!("unsupported format version {version}")));
    }
    let l = u32_at(12);
    let n = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let scale = f64_at(24);
    let alpha = f64_at(32);
    if bytes.len() != 40 + 8 * n * (n + 1) {
        return Err(bad("truncated payload"));
    }
    let energies: Vec<f64> = (0..n).map(|k| f64_at(40 + 8 * k)).collect();
    let base = 40 + 8 * n;
    let transform = DMatrix::from_iterator(n, n, (0..n * n).map(|k| f64_at(base + 8 * k)));
    Ok((
        RadialChannelBasis::from_parts(l, scale, energies, transform),
        alpha,
    ))
}
