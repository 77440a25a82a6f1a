//! Versioned binary dump of propagator blocks.
//!
//! Layout (little endian): magic, version `u32`, `n` as `u64`, grid, medium,
//! profile and pump digests (32 bytes each), the stripped `2n x 2n` matrix in
//! column-major `(re, im)` pairs, the `2n` free phases, and a trailing SHA-256
//! of everything before it.

use faer::{c64, Mat};
use sha2::{Digest, Sha256};

use super::Propagator;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::medium::MediumSpec;
use crate::poling::PolingProfile;
use crate::pump::PumpSpectrum;

pub const CACHE_MAGIC: &[u8; 8] = b"TWBPROP\0";
pub const CACHE_VERSION: u32 = 1;
const MAX_DIM: u64 = 1 << 14;
const HEADER_LEN: usize = 8 + 4 + 8 + 4 * 32;

/// Identity of the inputs a cached propagator was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheHeader {
    pub version: u32,
    pub n: u64,
    pub grid_hash: [u8; 32],
    pub medium_hash: [u8; 32],
    pub profile_hash: [u8; 32],
    pub pump_hash: [u8; 32],
}

fn digest(f: impl FnOnce(&mut Sha256)) -> [u8; 32] {
    let mut h = Sha256::new();
    f(&mut h);
    h.finalize().into()
}

impl CacheHeader {
    pub fn for_inputs(
        grid: &FrequencyGrid,
        medium: &MediumSpec,
        profiles: &[&PolingProfile],
        pump: &PumpSpectrum,
    ) -> Self {
        Self {
            version: CACHE_VERSION,
            n: grid.len() as u64,
            grid_hash: digest(|h| grid.hash_into(h)),
            medium_hash: digest(|h| medium.hash_into(h)),
            profile_hash: digest(|h| {
                for p in profiles {
                    p.hash_into(h)
                }
            }),
            pump_hash: digest(|h| pump.hash_into(h)),
        }
    }

    /// Short hexadecimal tag combining all digests, usable as a file name.
    pub fn tag(&self) -> String {
        let d = digest(|h| {
            h.update(self.grid_hash);
            h.update(self.medium_hash);
            h.update(self.profile_hash);
            h.update(self.pump_hash);
        });
        d[..12].iter().map(|b| format!("{b:02x}")).collect()
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(k)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| Error::Cache("truncated input".into()))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn hash(&mut self) -> Result<[u8; 32]> {
        Ok(self.take(32)?.try_into().unwrap())
    }

    fn complex(&mut self) -> Result<c64> {
        let re = self.f64()?;
        let im = self.f64()?;
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::Cache("non-finite matrix entry".into()));
        }
        Ok(c64::new(re, im))
    }
}

impl Propagator {
    pub fn to_cache_bytes(&self, header: &CacheHeader) -> Vec<u8> {
        let m = self.matrix.nrows();
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * (m * m + m) + 32);
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim() as u64).to_le_bytes());
        for h in [
            &header.grid_hash,
            &header.medium_hash,
            &header.profile_hash,
            &header.pump_hash,
        ] {
            out.extend_from_slice(h);
        }
        for j in 0..m {
            for i in 0..m {
                let z = self.matrix[(i, j)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        for z in &self.free {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        let check: [u8; 32] = Sha256::digest(&out).into();
        out.extend_from_slice(&check);
        out
    }

    pub fn from_cache_bytes(bytes: &[u8]) -> Result<(CacheHeader, Propagator)> {
        let mut r = Reader { data: bytes, pos: 0 };
        if r.take(8)? != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let version = r.u32()?;
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let n = r.u64()?;
        if n == 0 || n > MAX_DIM {
            return Err(Error::Cache(format!("implausible dimension {n}")));
        }
        let m = 2 * n as usize;
        let expected = HEADER_LEN + 16 * (m * m + m) + 32;
        if bytes.len() != expected {
            return Err(Error::Cache(format!(
                "length {} does not match dimension {n} (expected {expected})",
                bytes.len()
            )));
        }
        let body = &bytes[..expected - 32];
        let check: [u8; 32] = Sha256::digest(body).into();
        if check[..] != bytes[expected - 32..] {
            return Err(Error::Cache("checksum mismatch".into()));
        }
        let header = CacheHeader {
            version,
            n,
            grid_hash: r.hash()?,
            medium_hash: r.hash()?,
            profile_hash: r.hash()?,
            pump_hash: r.hash()?,
        };
        let mut matrix = Mat::<c64>::zeros(m, m);
        for j in 0..m {
            for i in 0..m {
                matrix[(i, j)] = r.complex()?;
            }
        }
        let mut free = Vec::with_capacity(m);
        for _ in 0..m {
            free.push(r.complex()?);
        }
        Ok((header, Propagator::from_parts(matrix, free)))
    }
}
