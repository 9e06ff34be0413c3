//! On-disk cache of auto-correlation maps.
//!
//! File layout, all integers little-endian `u64`:
//! `MAGIC`, 32-byte key, rows, cols, h, w, m, n, then `rows * cols` `f64`
//! values in row-major order.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use transmatch_core::{local_autocorrelation, AutoCorrMap, GroupGrid, Image};

const MAGIC: &[u8; 8] = b"TMACORR1";

pub type CacheKey = [u8; 32];

/// Content hash of the image together with the template and group sizes.
pub fn cache_key(img: &Image, m: usize, n: usize, h: usize, w: usize) -> CacheKey {
    let mut hasher = Sha256::new();
    for v in [img.width(), img.height(), m, n, h, w] {
        hasher.update((v as u64).to_le_bytes());
    }
    for v in img.data() {
        hasher.update(v.to_bits().to_le_bytes());
    }
    hasher.finalize().into()
}

pub fn key_hex(key: &CacheKey) -> String {
    key.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_map(mut out: impl Write, key: &CacheKey, map: &AutoCorrMap) -> io::Result<()> {
    let (rows, cols) = map.extent();
    let (h, w) = map.group_size();
    let (m, n) = map.template_size();
    out.write_all(MAGIC)?;
    out.write_all(key)?;
    for v in [rows, cols, h, w, m, n] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(map.values().len() * 8);
    for v in map.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

/// Reads a map and the key it was stored under.
pub fn read_map(mut input: impl Read) -> io::Result<(CacheKey, AutoCorrMap)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not an auto-correlation cache file"));
    }
    let mut key = [0u8; 32];
    input.read_exact(&mut key)?;
    let mut header = [0usize; 6];
    for slot in &mut header {
        let mut b = [0u8; 8];
        input.read_exact(&mut b)?;
        *slot = usize::try_from(u64::from_le_bytes(b)).map_err(|_| invalid("header field overflows usize"))?;
    }
    let [rows, cols, h, w, m, n] = header;
    let count = rows.checked_mul(cols).ok_or_else(|| invalid("extent overflows"))?;
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    if raw.len() != count * 8 {
        return Err(invalid("payload length does not match header"));
    }
    let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let map = AutoCorrMap::from_parts(rows, cols, h, w, m, n, values).map_err(|e| invalid(&e.to_string()))?;
    Ok((key, map))
}

/// Directory of cached maps, one file per key.
#[derive(Debug, Clone)]
pub struct AutoCorrCache {
    dir: PathBuf,
}

impl AutoCorrCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.acorr", key_hex(key)))
    }

    /// Returns the cached map, or `None` when missing or unreadable.
    pub fn load(&self, key: &CacheKey) -> Option<AutoCorrMap> {
        let file = fs::File::open(self.path_for(key)).ok()?;
        match read_map(io::BufReader::new(file)) {
            Ok((stored, map)) if &stored == key => Some(map),
            _ => None,
        }
    }

    pub fn store(&self, key: &CacheKey, map: &AutoCorrMap) -> io::Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(key);
        let tmp = path.with_extension("tmp");
        write_map(io::BufWriter::new(fs::File::create(&tmp)?), key, map)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Loads the map for `img` on `grid`, computing and storing it on a miss.
    pub fn get_or_build(&self, img: &Image, m: usize, n: usize, grid: &GroupGrid) -> anyhow::Result<AutoCorrMap> {
        let key = cache_key(img, m, n, grid.group_height(), grid.group_width());
        if let Some(map) = self.load(&key) {
            if map.matches_grid(grid) {
                return Ok(map);
            }
        }
        let map = local_autocorrelation(img, m, n, grid)?;
        self.store(&key, &map)?;
        Ok(map)
    }
}
