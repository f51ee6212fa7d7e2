//! Gauss discretization onto the lattice `tZ^d`.
//!
//! Lattice index `v` is black iff the point `t (v - shift)` lies in the
//! closed solid, i.e. `tv ∈ K + t·shift`. Equivalently the lattice is moved
//! by `-t·shift` and the solid stays put.

use crate::geometry::{GeometryError, RowSpan, Solid};
use rayon::prelude::*;
use std::io::{Read, Write};
use thiserror::Error;

/// Default upper bound on the number of bits in one image window.
pub const DEFAULT_MEMORY_CAP_BITS: u64 = 1 << 31;

const MAGIC: &[u8; 8] = b"SURFLAT1";

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("lattice distance must be finite and > 0, got {0}")]
    InvalidSpacing(f64),
    #[error("shift components must lie in [0, 1), got {0:?}")]
    InvalidShift(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("image window needs {bits} bits, above the memory cap of {cap} bits")]
    MemoryCap { bits: u64, cap: u64 },
    #[error("black pixel at {0:?} lies inside the margin")]
    MarginViolated(Vec<usize>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("malformed image file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, LatticeError>;

/// Binary image on a box of lattice indices.
///
/// Bits are stored row by row, a row being the indices along axis 0 with
/// the other coordinates fixed; rows are ordered with axis 1 fastest. Each
/// row occupies `stride` words and the tail bits of the last word are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeImage {
    d: usize,
    origin: Vec<i64>,
    dims: Vec<usize>,
    margin: usize,
    t: f64,
    shift: Vec<f64>,
    stride: usize,
    words: Vec<u64>,
}

impl LatticeImage {
    fn empty(
        origin: Vec<i64>,
        dims: Vec<usize>,
        margin: usize,
        t: f64,
        shift: Vec<f64>,
    ) -> LatticeImage {
        let d = dims.len();
        let stride = dims[0] / 64 + 1;
        let rows: usize = dims[1..].iter().product();
        LatticeImage {
            d,
            origin,
            dims,
            margin,
            t,
            shift,
            stride,
            words: vec![0; rows * stride],
        }
    }

    /// Builds an image from a predicate on window indices. Fails if a black
    /// pixel falls within `margin` of the window border.
    pub fn from_fn(
        dims: Vec<usize>,
        margin: usize,
        mut black: impl FnMut(&[usize]) -> bool,
    ) -> Result<LatticeImage> {
        let d = dims.len();
        if d == 0 || dims.iter().any(|&n| n == 0) {
            return Err(LatticeError::Format(
                "image extents must be positive".into(),
            ));
        }
        let mut img = LatticeImage::empty(vec![0; d], dims.clone(), margin, 1.0, vec![0.0; d]);
        let total: usize = dims.iter().product();
        let mut z = vec![0usize; d];
        for _ in 0..total {
            if black(&z) {
                if z.iter()
                    .zip(&dims)
                    .any(|(&zk, &n)| zk < margin || zk + margin >= n)
                {
                    return Err(LatticeError::MarginViolated(z));
                }
                img.set(&z);
            }
            for k in 0..d {
                z[k] += 1;
                if z[k] < dims[k] {
                    break;
                }
                z[k] = 0;
            }
        }
        Ok(img)
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn origin(&self) -> &[i64] {
        &self.origin
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn margin(&self) -> usize {
        self.margin
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn shift(&self) -> &[f64] {
        &self.shift
    }
    pub(crate) fn stride(&self) -> usize {
        self.stride
    }
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn rows(&self) -> usize {
        self.dims[1..].iter().product()
    }

    fn row_of(&self, z: &[usize]) -> usize {
        let mut r = 0;
        for k in (1..self.d).rev() {
            r = r * self.dims[k] + z[k];
        }
        r
    }

    fn set(&mut self, z: &[usize]) {
        let w = self.row_of(z) * self.stride + z[0] / 64;
        self.words[w] |= 1u64 << (z[0] % 64);
    }

    /// Pixel at window index `z`; indices outside the window are white.
    pub fn get(&self, z: &[i64]) -> bool {
        let mut u = [0usize; 8];
        for k in 0..self.d {
            if z[k] < 0 || z[k] as usize >= self.dims[k] {
                return false;
            }
            u[k] = z[k] as usize;
        }
        let w = self.row_of(&u[..self.d]) * self.stride + u[0] / 64;
        self.words[w] >> (u[0] % 64) & 1 == 1
    }

    pub fn black_count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Absolute lattice indices (`origin + z`) of all black pixels, in
    /// storage order.
    pub fn black_indices(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for r in 0..self.rows() {
            let mut rest = r;
            let mut coords = vec![0i64; self.d];
            for k in 1..self.d {
                coords[k] = self.origin[k] + (rest % self.dims[k]) as i64;
                rest /= self.dims[k];
            }
            for (wi, &word) in self.words[r * self.stride..(r + 1) * self.stride]
                .iter()
                .enumerate()
            {
                let mut bits = word;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let mut c = coords.clone();
                    c[0] = self.origin[0] + (wi * 64 + b) as i64;
                    out.push(c);
                }
            }
        }
        out
    }

    /// Writes the binary dump: magic, `d`, margin, origin, dims, `t`, shift
    /// (8 bytes each, little-endian), then the pixels packed LSB-first in
    /// linear order with axis 0 fastest.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.d as u64).to_le_bytes());
        buf.extend_from_slice(&(self.margin as u64).to_le_bytes());
        for o in &self.origin {
            buf.extend_from_slice(&o.to_le_bytes());
        }
        for n in &self.dims {
            buf.extend_from_slice(&(*n as u64).to_le_bytes());
        }
        buf.extend_from_slice(&self.t.to_le_bytes());
        for s in &self.shift {
            buf.extend_from_slice(&s.to_le_bytes());
        }
        let total: usize = self.dims.iter().product();
        let mut packed = vec![0u8; total.div_ceil(8)];
        let mut lin = 0usize;
        for r in 0..self.rows() {
            let row = &self.words[r * self.stride..(r + 1) * self.stride];
            for x in 0..self.dims[0] {
                if row[x / 64] >> (x % 64) & 1 == 1 {
                    packed[lin / 8] |= 1 << (lin % 8);
                }
                lin += 1;
            }
        }
        buf.extend_from_slice(&packed);
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut input: impl Read) -> Result<LatticeImage> {
        let mut data = Vec::new();
        input.read_to_end(&mut data)?;
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = data
                .get(pos..pos + n)
                .ok_or_else(|| LatticeError::Format("truncated header".into()))?;
            pos += n;
            Ok(s)
        };
        if take(8)? != MAGIC {
            return Err(LatticeError::Format("bad magic".into()));
        }
        let word = |s: &[u8]| <[u8; 8]>::try_from(s).unwrap();
        let d = u64::from_le_bytes(word(take(8)?)) as usize;
        if d == 0 || d > 8 {
            return Err(LatticeError::Format(format!("unsupported dimension {d}")));
        }
        let margin = u64::from_le_bytes(word(take(8)?)) as usize;
        let mut origin = Vec::with_capacity(d);
        for _ in 0..d {
            origin.push(i64::from_le_bytes(word(take(8)?)));
        }
        let mut dims = Vec::with_capacity(d);
        for _ in 0..d {
            dims.push(u64::from_le_bytes(word(take(8)?)) as usize);
        }
        let t = f64::from_le_bytes(word(take(8)?));
        let mut shift = Vec::with_capacity(d);
        for _ in 0..d {
            shift.push(f64::from_le_bytes(word(take(8)?)));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(LatticeError::Format("zero extent".into()));
        }
        let total: usize = dims.iter().product();
        let packed = take(total.div_ceil(8))?.to_vec();
        if pos != data.len() {
            return Err(LatticeError::Format("trailing bytes".into()));
        }
        let mut img = LatticeImage::empty(origin, dims, margin, t, shift);
        let mut lin = 0usize;
        for r in 0..img.rows() {
            for x in 0..img.dims[0] {
                if packed[lin / 8] >> (lin % 8) & 1 == 1 {
                    img.words[r * img.stride + x / 64] |= 1 << (x % 64);
                }
                lin += 1;
            }
        }
        Ok(img)
    }
}

/// Digitizes `solid` at lattice distance `t` with the given shift, keeping
/// `margin` white lattice steps around the dilated bounding box.
pub fn digitize(solid: &Solid, t: f64, shift: &[f64], margin: usize) -> Result<LatticeImage> {
    digitize_capped(solid, t, shift, margin, DEFAULT_MEMORY_CAP_BITS)
}

pub fn digitize_capped(
    solid: &Solid,
    t: f64,
    shift: &[f64],
    margin: usize,
    cap_bits: u64,
) -> Result<LatticeImage> {
    let d = solid.dim();
    let (origin, dims) = frame(solid, t, shift, margin, cap_bits)?;
    let mut img = LatticeImage::empty(origin, dims, margin, t, shift.to_vec());
    let stride = img.stride;
    let (origin, dims) = (&img.origin, &img.dims);
    let wlo = origin[0];
    let whi = origin[0] + dims[0] as i64 - 1;
    img.words
        .par_chunks_mut(stride)
        .enumerate()
        .with_min_len(64)
        .for_each_init(
            || vec![0.0; d],
            |x, (r, row)| match row_run(solid, t, shift, origin, dims, r, x) {
                Some(None) => {}
                Some(Some((l, h))) => fill(row, l, h),
                None => {
                    for v in wlo..=whi {
                        x[0] = t * (v as f64 - shift[0]);
                        if solid.contains_unchecked(x) {
                            let z = (v - wlo) as usize;
                            row[z / 64] |= 1 << (z % 64);
                        }
                    }
                }
            },
        );
    Ok(img)
}

/// A digitization stored as one black run per row, for solids whose rows
/// along axis 0 are intervals. Rows are ordered as in [`LatticeImage`].
#[derive(Clone, Debug, PartialEq)]
pub struct RowRuns {
    origin: Vec<i64>,
    dims: Vec<usize>,
    margin: usize,
    /// Inclusive black range of each row, relative to the window start.
    runs: Vec<Option<(usize, usize)>>,
}

impl RowRuns {
    pub fn dim(&self) -> usize {
        self.dims.len()
    }
    pub fn origin(&self) -> &[i64] {
        &self.origin
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn margin(&self) -> usize {
        self.margin
    }
    pub fn runs(&self) -> &[Option<(usize, usize)>] {
        &self.runs
    }
}

/// Run form of [`digitize`], or `None` when some row of the solid is not
/// known to be an interval.
pub fn digitize_runs(
    solid: &Solid,
    t: f64,
    shift: &[f64],
    margin: usize,
) -> Result<Option<RowRuns>> {
    let d = solid.dim();
    let (origin, dims) = frame(solid, t, shift, margin, DEFAULT_MEMORY_CAP_BITS)?;
    let rows: usize = dims[1..].iter().product();
    let mut x = vec![0.0; d];
    let runs: Option<Vec<Option<(usize, usize)>>> = (0..rows)
        .map(|r| row_run(solid, t, shift, &origin, &dims, r, &mut x))
        .collect();
    Ok(runs.map(|runs| RowRuns {
        origin,
        dims,
        margin,
        runs,
    }))
}

/// Validates the inputs and returns the window origin and extents.
fn frame(
    solid: &Solid,
    t: f64,
    shift: &[f64],
    margin: usize,
    cap_bits: u64,
) -> Result<(Vec<i64>, Vec<usize>)> {
    let d = solid.dim();
    if !(t.is_finite() && t > 0.0) {
        return Err(LatticeError::InvalidSpacing(t));
    }
    if shift.len() != d {
        return Err(LatticeError::DimensionMismatch {
            expected: d,
            got: shift.len(),
        });
    }
    if !shift.iter().all(|s| (0.0..1.0).contains(s)) {
        return Err(LatticeError::InvalidShift(shift.to_vec()));
    }
    let (lo, hi) = solid.bounding_box();
    let mut origin = Vec::with_capacity(d);
    let mut dims = Vec::with_capacity(d);
    let mut bits: u64 = 1;
    for k in 0..d {
        let a = (lo[k] / t + shift[k]).floor() - 1.0 - margin as f64;
        let b = (hi[k] / t + shift[k]).ceil() + 1.0 + margin as f64;
        let extent = b - a + 1.0;
        if !(extent.is_finite() && extent < 1e15) {
            return Err(LatticeError::MemoryCap {
                bits: u64::MAX,
                cap: cap_bits,
            });
        }
        origin.push(a as i64);
        dims.push(extent as usize);
        let padded = if k == 0 {
            (extent as u64 / 64 + 1) * 64
        } else {
            extent as u64
        };
        bits = bits.saturating_mul(padded);
    }
    if bits > cap_bits {
        return Err(LatticeError::MemoryCap {
            bits,
            cap: cap_bits,
        });
    }
    Ok((origin, dims))
}

/// Black run of image row `r`: `Some(None)` if empty, `None` if the row is
/// not known to be an interval. `x` is scratch space of length `d`.
fn row_run(
    solid: &Solid,
    t: f64,
    shift: &[f64],
    origin: &[i64],
    dims: &[usize],
    r: usize,
    x: &mut [f64],
) -> Option<Option<(usize, usize)>> {
    let mut rest = r;
    for k in 1..dims.len() {
        let v = origin[k] + (rest % dims[k]) as i64;
        rest /= dims[k];
        x[k] = t * (v as f64 - shift[k]);
    }
    let wlo = origin[0];
    let whi = origin[0] + dims[0] as i64 - 1;
    match solid.row_span(&x[1..]) {
        RowSpan::Empty => Some(None),
        RowSpan::Interval(a, b) => {
            let est_lo = ((a / t + shift[0]).ceil() as i64).clamp(wlo, whi);
            let est_hi = ((b / t + shift[0]).floor() as i64).clamp(wlo, whi);
            let mut inside = |v: i64| {
                x[0] = t * (v as f64 - shift[0]);
                solid.contains_unchecked(x)
            };
            let run = refine_interval(est_lo, est_hi, wlo, whi, &mut inside);
            Some(run.map(|(l, h)| ((l - wlo) as usize, (h - wlo) as usize)))
        }
        RowSpan::Scan => None,
    }
}

/// Exact extent of a row whose black set is known to be an interval, given
/// floating-point estimates of its endpoints.
fn refine_interval(
    est_lo: i64,
    est_hi: i64,
    wlo: i64,
    whi: i64,
    inside: &mut impl FnMut(i64) -> bool,
) -> Option<(i64, i64)> {
    let candidates = [
        est_lo,
        est_hi,
        est_lo + (est_hi - est_lo) / 2,
        est_lo - 1,
        est_hi + 1,
    ];
    let seed = candidates
        .iter()
        .copied()
        .filter(|v| (wlo..=whi).contains(v))
        .find(|&v| inside(v))?;
    let mut probe = |v: i64| v == seed || inside(v);
    let mut lo = est_lo.min(seed);
    if probe(lo) {
        while lo > wlo && probe(lo - 1) {
            lo -= 1;
        }
    } else {
        while !probe(lo) {
            lo += 1;
        }
    }
    let mut hi = est_hi.max(seed);
    if probe(hi) {
        while hi < whi && probe(hi + 1) {
            hi += 1;
        }
    } else {
        while !probe(hi) {
            hi -= 1;
        }
    }
    Some((lo, hi))
}

/// Sets bits `a..=b` of a row.
fn fill(row: &mut [u64], a: usize, b: usize) {
    let (wa, wb) = (a / 64, b / 64);
    let lo_mask = !0u64 << (a % 64);
    let hi_mask = !0u64 >> (63 - b % 64);
    if wa == wb {
        row[wa] |= lo_mask & hi_mask;
    } else {
        row[wa] |= lo_mask;
        for w in &mut row[wa + 1..wb] {
            *w = !0;
        }
        row[wb] |= hi_mask;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_spaced_square_is_three_by_three() {
        let sq = Solid::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let img = digitize(&sq, 0.5, &[0.0, 0.0], 1).unwrap();
        let mut black = img.black_indices();
        black.sort();
        let expected: Vec<Vec<i64>> = (0..3)
            .flat_map(|y| (0..3).map(move |x| vec![x, y]))
            .collect();
        let mut expected = expected;
        expected.sort();
        assert_eq!(black, expected);
    }

    #[test]
    fn unit_disk_at_unit_spacing() {
        let disk = Solid::ball(vec![0.0, 0.0], 1.0).unwrap();
        let img = digitize(&disk, 1.0, &[0.0, 0.0], 1).unwrap();
        let mut black = img.black_indices();
        black.sort();
        assert_eq!(
            black,
            vec![vec![-1, 0], vec![0, -1], vec![0, 0], vec![0, 1], vec![1, 0]]
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let sq = Solid::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            digitize(&sq, 0.0, &[0.0, 0.0], 1),
            Err(LatticeError::InvalidSpacing(_))
        ));
        assert!(matches!(
            digitize(&sq, 0.1, &[1.0, 0.0], 1),
            Err(LatticeError::InvalidShift(_))
        ));
        assert!(matches!(
            digitize_capped(&sq, 1e-4, &[0.0, 0.0], 1, 1 << 20),
            Err(LatticeError::MemoryCap { .. })
        ));
    }

    #[test]
    fn fill_covers_word_boundaries() {
        let mut row = vec![0u64; 3];
        fill(&mut row, 60, 130);
        let count: u32 = row.iter().map(|w| w.count_ones()).sum();
        assert_eq!(count, 71);
        assert_eq!(row[0] >> 60, 0xF);
        assert_eq!(row[2], 0b111);
    }

    #[test]
    fn dump_round_trip() {
        let ball = Solid::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let img = digitize(&ball, 0.2, &[0.3, 0.1, 0.7], 1).unwrap();
        let mut buf = Vec::new();
        img.write_to(&mut buf).unwrap();
        let back = LatticeImage::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, img);
        assert!(LatticeImage::read_from(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn margin_is_enforced_by_from_fn() {
        assert!(LatticeImage::from_fn(vec![4, 4], 1, |z| z[0] == 0).is_err());
        let img = LatticeImage::from_fn(vec![4, 4], 1, |z| z == [1, 2]).unwrap();
        assert!(img.get(&[1, 2]));
        assert_eq!(img.black_count(), 1);
    }
}
