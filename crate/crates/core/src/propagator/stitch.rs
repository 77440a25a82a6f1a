use faer::{c64, Mat};

use super::{assemble_generator, GeneratorBlocks, Propagator};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg::{expm, CMat};
use crate::medium::MediumSpec;
use crate::poling::PolingProfile;
use crate::pump::PumpSpectrum;

const CHUNK: usize = 4;

/// How the ordered product over domains is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StitchMethod {
    /// Paired when the generator allows it, general otherwise.
    Auto,
    /// Two `N x N` chains; requires `H = -G` and a real symmetric pump kernel.
    Paired,
    /// Full `2N x 2N` products.
    General,
}

/// Propagator of a poled region, ordered last domain leftmost.
pub fn stitch(
    profile: &PolingProfile,
    grid: &FrequencyGrid,
    medium: &MediumSpec,
    pump: &PumpSpectrum,
) -> Result<Propagator> {
    stitch_with(profile, grid, medium, pump, StitchMethod::Auto)
}

fn paired_compatible(b: &GeneratorBlocks) -> bool {
    let scale = b.g.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mirrored = b.g.iter().zip(&b.h).all(|(g, h)| (g + h).abs() <= 1e-13 * scale);
    let n = b.dim();
    let real_symmetric = (0..n).all(|j| (0..n).all(|i| b.f[(i, j)].im == 0.0 && b.f[(i, j)] == b.f[(j, i)]));
    mirrored && real_symmetric
}

struct Setup {
    n: usize,
    dz: f64,
    pumped: GeneratorBlocks,
    free: Vec<c64>,
}

fn setup(profile: &PolingProfile, grid: &FrequencyGrid, medium: &MediumSpec, pump: &PumpSpectrum) -> Result<Setup> {
    profile.validate()?;
    let pumped = assemble_generator(grid, medium, pump, 1)?;
    let n = grid.len();
    let dz = profile.domain_length;
    let len = profile.length();
    let mut free = Vec::with_capacity(2 * n);
    free.extend(pumped.g.iter().map(|&g| c64::cis(len * g)));
    free.extend(pumped.h.iter().map(|&h| c64::cis(-len * h)));
    Ok(Setup { n, dz, pumped, free })
}

fn strip(raw: CMat, free: Vec<c64>) -> Propagator {
    let m = raw.nrows();
    let matrix = Mat::from_fn(m, m, |i, j| raw[(i, j)] / free[i]);
    Propagator::from_parts(matrix, free)
}

fn sign_index(s: i8) -> usize {
    (s + 1) as usize
}

fn chunk_code(chunk: &[i8]) -> usize {
    chunk.iter().rev().fold(0, |acc, &s| 3 * acc + sign_index(s))
}

/// Lazily filled cache of chunk products `E_4 E_3 E_2 E_1`.
struct ChunkCache<'a> {
    base: &'a [Option<CMat>; 3],
    entries: Vec<Option<CMat>>,
}

impl<'a> ChunkCache<'a> {
    fn new(base: &'a [Option<CMat>; 3]) -> Self {
        Self {
            base,
            entries: vec![None; 3usize.pow(CHUNK as u32)],
        }
    }

    fn product(&self, chunk: &[i8]) -> CMat {
        let mut acc = self.base[sign_index(chunk[0])].clone().unwrap();
        for &s in &chunk[1..] {
            acc = self.base[sign_index(s)].as_ref().unwrap() * &acc;
        }
        acc
    }

    fn get(&mut self, chunk: &[i8]) -> CMat {
        if chunk.len() < CHUNK {
            return self.product(chunk);
        }
        let code = chunk_code(chunk);
        if self.entries[code].is_none() {
            self.entries[code] = Some(self.product(chunk));
        }
        self.entries[code].clone().unwrap()
    }

    fn chain(&mut self, signs: &[i8]) -> CMat {
        let mut acc: Option<CMat> = None;
        for chunk in signs.chunks(CHUNK) {
            let c = self.get(chunk);
            acc = Some(match acc {
                None => c,
                Some(a) => &c * &a,
            });
        }
        acc.unwrap()
    }

    fn filled(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }
}

fn scaled(a: &CMat, z: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| z * a[(i, j)])
}

/// Stitch with an explicit evaluation strategy.
pub fn stitch_with(
    profile: &PolingProfile,
    grid: &FrequencyGrid,
    medium: &MediumSpec,
    pump: &PumpSpectrum,
    method: StitchMethod,
) -> Result<Propagator> {
    if profile.is_empty() {
        log::warn!("empty poling profile; returning the identity propagator");
        profile.validate()?;
        return Ok(Propagator::identity(grid.len()));
    }
    let st = setup(profile, grid, medium, pump)?;
    let paired = match method {
        StitchMethod::General => false,
        StitchMethod::Paired => {
            if !paired_compatible(&st.pumped) {
                return Err(Error::param(
                    "method",
                    "paired stitching needs symmetric group-velocity matching",
                ));
            }
            true
        }
        StitchMethod::Auto => paired_compatible(&st.pumped),
    };
    if paired {
        stitch_paired(profile, st)
    } else {
        stitch_general(profile, st)
    }
}

fn stitch_general(profile: &PolingProfile, st: Setup) -> Result<Propagator> {
    let present = |s: i8| profile.signs.contains(&s);
    let mut base: [Option<CMat>; 3] = [None, None, None];
    for s in [-1i8, 0, 1] {
        if present(s) {
            base[sign_index(s)] = Some(domain_exponential(&st.pumped, s, st.dz)?);
        }
    }
    let mut cache = ChunkCache::new(&base);
    let raw = cache.chain(&profile.signs);
    log::debug!("general stitch used {} cached chunk products", cache.filled());
    Ok(strip(raw, st.free))
}

fn domain_exponential(pumped: &GeneratorBlocks, sign: i8, dz: f64) -> Result<CMat> {
    let b = GeneratorBlocks {
        g: pumped.g.clone(),
        h: pumped.h.clone(),
        f: scaled(&pumped.f, c64::new(sign as f64, 0.0)),
    };
    let q = b.q_matrix();
    expm(scaled(&q, c64::new(0.0, dz)).as_ref())
}

/// Uses the block structure `i dz Q = [[X, Y], [-Y, X]]`, which maps
/// homomorphically onto the pair `(X + iY, X - iY)`. The `2N` product is
/// recovered from two `N x N` chains.
fn stitch_paired(profile: &PolingProfile, st: Setup) -> Result<Propagator> {
    let n = st.n;
    let dz = st.dz;
    let g = &st.pumped.g;
    let f = &st.pumped.f;
    let half = |s: f64| {
        Mat::from_fn(n, n, |i, j| {
            let d = if i == j {
                c64::new(0.0, dz * g[i])
            } else {
                c64::new(0.0, 0.0)
            };
            d + c64::new(s * dz, 0.0) * f[(i, j)]
        })
    };
    let present = |s: i8| profile.signs.contains(&s);
    // Chain letters for the `X + iY` chain, indexed by sign.
    let mut base: [Option<CMat>; 3] = [None, None, None];
    if present(1) || present(-1) {
        base[sign_index(1)] = Some(expm(half(-1.0).as_ref())?);
        base[sign_index(-1)] = Some(expm(half(1.0).as_ref())?);
    }
    if present(0) {
        base[sign_index(0)] = Some(Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::cis(dz * g[i])
            } else {
                c64::new(0.0, 0.0)
            }
        }));
    }
    let mut cache = ChunkCache::new(&base);
    let plus = cache.chain(&profile.signs);
    let flipped: Vec<i8> = profile.signs.iter().map(|s| -s).collect();
    let minus = cache.chain(&flipped);
    log::debug!("paired stitch used {} cached chunk products", cache.filled());

    let half_i = c64::new(0.0, -0.5);
    let raw = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let (r, c) = (i % n, j % n);
        let x = (plus[(r, c)] + minus[(r, c)]) * 0.5;
        let y = (plus[(r, c)] - minus[(r, c)]) * half_i;
        match (i < n, j < n) {
            (true, true) | (false, false) => x,
            (true, false) => y,
            (false, true) => -y,
        }
    });
    // Use the same free phase for both fields so stripping matches the chain.
    let mut free = st.free;
    for k in 0..n {
        free[n + k] = free[k];
    }
    Ok(strip(raw, free))
}

/// Reference product taken one domain at a time on the full generator.
///
/// With `exponentiate_each` the exponential is recomputed for every domain.
pub fn stitch_naive(
    profile: &PolingProfile,
    grid: &FrequencyGrid,
    medium: &MediumSpec,
    pump: &PumpSpectrum,
    exponentiate_each: bool,
) -> Result<Propagator> {
    if profile.is_empty() {
        profile.validate()?;
        return Ok(Propagator::identity(grid.len()));
    }
    let st = setup(profile, grid, medium, pump)?;
    let mut base: [Option<CMat>; 3] = [None, None, None];
    let mut raw: Option<CMat> = None;
    for &s in &profile.signs {
        let e = if exponentiate_each {
            domain_exponential(&st.pumped, s, st.dz)?
        } else {
            if base[sign_index(s)].is_none() {
                base[sign_index(s)] = Some(domain_exponential(&st.pumped, s, st.dz)?);
            }
            base[sign_index(s)].clone().unwrap()
        };
        raw = Some(match raw {
            None => e,
            Some(r) => &e * &r,
        });
    }
    Ok(strip(raw.unwrap(), st.free))
}
