//! Pixel configuration codes and their counts in a binary image.
//!
//! Bit `p` of a code stands for the window offset `x` with
//! `p = x_0 + n x_1 + n^2 x_2 + ...`; a set bit means the pixel is black.

use crate::lattice::{LatticeImage, RowRuns};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Windows with at most this many pixels get a dense count array.
pub const DENSE_MAX_PIXELS: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("window n={n}, d={d} has {pixels} pixels; codes support at most 63")]
    WindowTooLarge { n: usize, d: usize, pixels: u64 },
    #[error("window side must be >= 1")]
    ZeroWindow,
    #[error("offset {offset:?} is outside {{0..{n}}}^{d}")]
    OffsetOutOfRange {
        offset: Vec<usize>,
        n: usize,
        d: usize,
    },
    #[error("image margin {margin} is below n - 1 = {needed}")]
    InsufficientMargin { margin: usize, needed: usize },
    #[error("histogram CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Number of pixels `n^d` in a window, if codes can hold it.
pub fn window_pixels(n: usize, d: usize) -> Result<usize> {
    if n == 0 {
        return Err(ConfigError::ZeroWindow);
    }
    let pixels = (n as u64).checked_pow(d as u32).unwrap_or(u64::MAX);
    if pixels > 63 {
        return Err(ConfigError::WindowTooLarge { n, d, pixels });
    }
    Ok(pixels as usize)
}

/// Window offsets in bit order.
pub fn window_offsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut p| {
            (0..d)
                .map(|_| {
                    let x = p % n;
                    p /= n;
                    x
                })
                .collect()
        })
        .collect()
}

/// Code of the configuration whose black pixels are `black`.
pub fn encode_config(black: &[Vec<usize>], n: usize, d: usize) -> Result<u64> {
    window_pixels(n, d)?;
    let mut code = 0u64;
    for x in black {
        if x.len() != d || x.iter().any(|&c| c >= n) {
            return Err(ConfigError::OffsetOutOfRange {
                offset: x.clone(),
                n,
                d,
            });
        }
        let p = x.iter().rev().fold(0usize, |acc, &c| acc * n + c);
        code |= 1 << p;
    }
    Ok(code)
}

/// Black offsets of `code`, in bit order.
pub fn decode_config(code: u64, n: usize, d: usize) -> Vec<Vec<usize>> {
    window_offsets(n, d)
        .into_iter()
        .enumerate()
        .filter(|(p, _)| code >> p & 1 == 1)
        .map(|(_, x)| x)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Counts {
    Dense(Vec<u64>),
    Sparse(BTreeMap<u64, u64>),
}

/// Counts `N_j` of each configuration code `j`. The all-white count is
/// kept at zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigHistogram {
    n: usize,
    d: usize,
    counts: Counts,
}

impl ConfigHistogram {
    pub fn new(n: usize, d: usize) -> Result<ConfigHistogram> {
        let pixels = window_pixels(n, d)?;
        let counts = if pixels <= DENSE_MAX_PIXELS {
            Counts::Dense(vec![0; 1 << pixels])
        } else {
            Counts::Sparse(BTreeMap::new())
        };
        Ok(ConfigHistogram { n, d, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn pixels(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Code of the all-black configuration.
    pub fn full_code(&self) -> u64 {
        (1u64 << self.pixels()) - 1
    }

    pub fn get(&self, j: u64) -> u64 {
        match &self.counts {
            Counts::Dense(v) => v.get(j as usize).copied().unwrap_or(0),
            Counts::Sparse(m) => m.get(&j).copied().unwrap_or(0),
        }
    }

    /// Adds `c` occurrences of code `j`; code 0 is ignored.
    pub fn add(&mut self, j: u64, c: u64) {
        if j == 0 || c == 0 {
            return;
        }
        debug_assert!(j <= self.full_code());
        match &mut self.counts {
            Counts::Dense(v) => {
                let slot = &mut v[j as usize];
                debug_assert!(slot.checked_add(c).is_some(), "count overflow");
                *slot += c;
            }
            Counts::Sparse(m) => *m.entry(j).or_insert(0) += c,
        }
    }

    /// Nonzero counts in ascending code order.
    pub fn nonzero(&self) -> Vec<(u64, u64)> {
        match &self.counts {
            Counts::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(j, &c)| (j as u64, c))
                .collect(),
            Counts::Sparse(m) => m
                .iter()
                .filter(|(_, &c)| c > 0)
                .map(|(&j, &c)| (j, c))
                .collect(),
        }
    }

    /// Number of window positions with at least one black pixel.
    pub fn total(&self) -> u64 {
        self.nonzero().iter().map(|(_, c)| c).sum()
    }

    fn merge(mut self, other: &ConfigHistogram) -> ConfigHistogram {
        match (&mut self.counts, &other.counts) {
            (Counts::Dense(a), Counts::Dense(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            _ => {
                for (j, c) in other.nonzero() {
                    self.add(j, c);
                }
            }
        }
        self
    }

    /// Stable 64-bit FNV-1a digest of `(n, d, nonzero counts)`, printed as
    /// hex. Used as a provenance id for estimates.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.n as u64);
        eat(self.d as u64);
        for (j, c) in self.nonzero() {
            eat(j);
            eat(c);
        }
        format!("{h:016x}")
    }

    /// `index,count` with one row per nonzero count.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,count\n");
        for (j, c) in self.nonzero() {
            writeln!(s, "{j},{c}").unwrap();
        }
        s
    }

    pub fn from_csv(text: &str, n: usize, d: usize) -> Result<ConfigHistogram> {
        let mut h = ConfigHistogram::new(n, d)?;
        let mut seen = std::collections::BTreeSet::new();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, head)) if head.trim() == "index,count" => {}
            _ => {
                return Err(ConfigError::Csv {
                    line: 1,
                    reason: "expected header `index,count`".into(),
                })
            }
        }
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: &str| ConfigError::Csv {
                line: line_no,
                reason: reason.to_string(),
            };
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| bad("expected two fields"))?;
            let j: u64 = a
                .trim()
                .parse()
                .map_err(|_| bad("index is not an integer"))?;
            let c: u64 = b
                .trim()
                .parse()
                .map_err(|_| bad("count is not an integer"))?;
            if j > h.full_code() {
                return Err(bad("index out of range"));
            }
            if j == 0 && c != 0 {
                return Err(bad("the all-white configuration is not counted"));
            }
            if !seen.insert(j) {
                return Err(bad("duplicate index"));
            }
            h.add(j, c);
        }
        Ok(h)
    }

    /// Histogram of the transformed image: count of `j` moves to `sym(j)`.
    pub fn mapped(&self, sym: &Symmetry) -> ConfigHistogram {
        let mut out = ConfigHistogram::new(self.n, self.d).expect("same shape");
        for (j, c) in self.nonzero() {
            out.add(sym.map_code(j, self.n), c);
        }
        out
    }
}

fn check_margin(img: &LatticeImage, n: usize) -> Result<()> {
    window_pixels(n, img.dim())?;
    if img.margin() + 1 < n {
        return Err(ConfigError::InsufficientMargin {
            margin: img.margin(),
            needed: n - 1,
        });
    }
    Ok(())
}

/// Counts all `n x ... x n` configurations of `img`.
///
/// Windows are processed a row of positions at a time: the `n^(d-1)` image
/// rows under the window are combined with OR and AND, so all-white
/// positions are skipped and all-black positions are counted by popcount;
/// only positions with mixed pixels have their code assembled.
pub fn count_configurations(img: &LatticeImage, n: usize) -> Result<ConfigHistogram> {
    check_margin(img, n)?;
    let d = img.dim();
    let dims = img.dims();
    let stride = img.stride();
    let words = img.words();
    let empty = ConfigHistogram::new(n, d)?;
    if dims.iter().any(|&m| m < n) {
        return Ok(empty);
    }
    let full = empty.full_code();
    let positions_0 = dims[0] - n + 1;
    let pos_dims: Vec<usize> = dims[1..].iter().map(|&m| m - n + 1).collect();
    let window_rows: usize = pos_dims.iter().product();
    let sub = n.pow(d as u32 - 1);
    let mask = (1u64 << n) - 1;
    // Bits of the following word that windows in a word can reach.
    let carry = mask >> 1;
    // Row offset (in rows) of each sub-row of the window relative to the
    // window's first row.
    let row_steps: Vec<usize> = (0..sub)
        .map(|mut q| {
            let mut step = 0;
            let mut scale = 1;
            for &m in &dims[1..] {
                step += (q % n) * scale;
                q /= n;
                scale *= m;
            }
            step
        })
        .collect();

    // Words holding window positions, and the valid-position mask of the
    // last one.
    let used = positions_0.div_ceil(64);
    let last_valid = match positions_0 % 64 {
        0 => !0u64,
        r => (1u64 << r) - 1,
    };

    let extents: Vec<RowExtent> = words
        .par_chunks(stride)
        .with_min_len(256)
        .map(RowExtent::of)
        .collect();

    let hist = (0..window_rows)
        .into_par_iter()
        .with_min_len(64)
        .fold(
            || (empty.clone(), vec![0usize; sub], vec![0u128; sub]),
            |(mut hist, mut starts, mut pairs), wr| {
                let mut rest = wr;
                let mut base = 0;
                let mut scale = 1;
                for (k, &pd) in pos_dims.iter().enumerate() {
                    base += (rest % pd) * scale;
                    rest /= pd;
                    scale *= dims[k + 1];
                }
                // Union of the nonzero word ranges and intersection of the
                // all-black runs of the rows under the window.
                let (mut nz_lo, mut nz_hi) = (stride, 0);
                let (mut full_lo, mut full_hi) = (0, stride);
                for (start, step) in starts.iter_mut().zip(&row_steps) {
                    let e = &extents[base + step];
                    nz_lo = nz_lo.min(e.nonzero.0);
                    nz_hi = nz_hi.max(e.nonzero.1);
                    full_lo = full_lo.max(e.full.0);
                    full_hi = full_hi.min(e.full.1);
                    *start = (base + step) * stride;
                }
                if nz_lo >= nz_hi {
                    return (hist, starts, pairs);
                }
                // OR and AND of word i over the rows under the window; zero
                // past the end of the row.
                let combine = |i: usize| {
                    if i == stride {
                        return (0, 0);
                    }
                    starts.iter().fold((0u64, !0u64), |(o, a), &st| {
                        let w = words[st + i];
                        (o | w, a & w)
                    })
                };
                // Words whose windows are all black: the word and the bits
                // it reaches in the next one lie in every row's black run.
                let end = nz_hi.min(used);
                let inner_hi = if n == 1 {
                    full_hi
                } else {
                    full_hi.saturating_sub(1)
                }
                .min(end);
                let inner = if full_lo < inner_hi {
                    full_lo..inner_hi
                } else {
                    0..0
                };
                let mut full_count = 0u64;
                if !inner.is_empty() {
                    full_count += 64 * inner.len() as u64;
                    if inner.end == used {
                        full_count -= 64 - last_valid.count_ones() as u64;
                    }
                }
                for i in nz_lo.saturating_sub(1)..end {
                    if inner.contains(&i) {
                        continue;
                    }
                    let (o, a) = combine(i);
                    let (o1, a1) = combine(i + 1);
                    if o == 0 && o1 & carry == 0 {
                        continue;
                    }
                    let valid = if i + 1 == used { last_valid } else { !0 };
                    if a == !0 && a1 & carry == carry {
                        full_count += valid.count_ones() as u64;
                        continue;
                    }
                    let op = (o1 as u128) << 64 | o as u128;
                    let ap = (a1 as u128) << 64 | a as u128;
                    let mut any = 0u64;
                    let mut all = !0u64;
                    for s in 0..n {
                        any |= (op >> s) as u64;
                        all &= (ap >> s) as u64;
                    }
                    any &= valid;
                    all &= valid;
                    full_count += all.count_ones() as u64;
                    let mut mixed = any & !all;
                    if mixed == 0 {
                        continue;
                    }
                    // Two consecutive words per window row, so the n bits at
                    // any position of word i are one 128-bit shift away.
                    for (pair, &st) in pairs.iter_mut().zip(&starts) {
                        let next = if i + 1 < stride { words[st + i + 1] } else { 0 };
                        *pair = (next as u128) << 64 | words[st + i] as u128;
                    }
                    while mixed != 0 {
                        let b = mixed.trailing_zeros();
                        mixed &= mixed - 1;
                        let mut code = 0u64;
                        for (q, pair) in pairs.iter().enumerate() {
                            code |= ((pair >> b) as u64 & mask) << (n * q);
                        }
                        hist.add(code, 1);
                    }
                }
                hist.add(full, full_count);
                (hist, starts, pairs)
            },
        )
        .map(|(h, _, _)| h)
        .reduce(|| empty.clone(), |a, b| a.merge(&b));
    Ok(hist)
}

/// Counts all `n x ... x n` configurations of a run-form digitization.
///
/// Along a row of window positions the column pattern of the rows under
/// the window only changes at run ends. Positions whose window sits inside
/// one constant stretch are counted in bulk; only windows straddling a run
/// end have their code assembled.
pub fn count_runs(img: &RowRuns, n: usize) -> Result<ConfigHistogram> {
    let d = img.dim();
    window_pixels(n, d)?;
    if img.margin() + 1 < n {
        return Err(ConfigError::InsufficientMargin {
            margin: img.margin(),
            needed: n - 1,
        });
    }
    let dims = img.dims();
    let runs = img.runs();
    let empty = ConfigHistogram::new(n, d)?;
    if dims.iter().any(|&m| m < n) {
        return Ok(empty);
    }
    let positions_0 = dims[0] - n + 1;
    let pos_dims: Vec<usize> = dims[1..].iter().map(|&m| m - n + 1).collect();
    let window_rows: usize = pos_dims.iter().product();
    let sub = n.pow(d as u32 - 1);
    let mask = (1u64 << n) - 1;
    let row_steps: Vec<usize> = (0..sub)
        .map(|mut q| {
            let mut step = 0;
            let mut scale = 1;
            for &m in &dims[1..] {
                step += (q % n) * scale;
                q /= n;
                scale *= m;
            }
            step
        })
        .collect();

    let (hist, _, _) = (0..window_rows).fold(
        (empty, Vec::with_capacity(sub), Vec::with_capacity(2 * sub)),
        |(mut hist, mut rows, mut ends): (
            ConfigHistogram,
            Vec<(usize, usize, usize)>,
            Vec<usize>,
        ),
         wr| {
            let mut rest = wr;
            let mut base = 0;
            let mut scale = 1;
            for (k, &pd) in pos_dims.iter().enumerate() {
                base += (rest % pd) * scale;
                rest /= pd;
                scale *= dims[k + 1];
            }
            rows.clear();
            ends.clear();
            for (q, step) in row_steps.iter().enumerate() {
                if let Some((l, h)) = runs[base + step] {
                    rows.push((q, l, h));
                    ends.push(l);
                    ends.push(h + 1);
                }
            }
            if rows.is_empty() {
                return (hist, rows, ends);
            }
            ends.sort_unstable();
            ends.dedup();
            // Bulk: windows inside one stretch between consecutive ends.
            for pair in ends.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                if b - a < n {
                    continue;
                }
                let mut code = 0u64;
                for &(q, l, h) in &rows {
                    if l <= a && a <= h {
                        code |= mask << (n * q);
                    }
                }
                hist.add(code, (b - a - n + 1) as u64);
            }
            // Windows with a run end strictly inside them.
            let mut next = 0;
            for &e in &ends {
                let from = (e + 1).saturating_sub(n).max(next);
                let to = e.min(positions_0);
                for p in from..to {
                    let mut code = 0u64;
                    for &(q, l, h) in &rows {
                        let lo = l.max(p);
                        let hi = h.min(p + n - 1);
                        if lo <= hi {
                            code |= ((1u64 << (hi - lo + 1)) - 1) << (lo - p + n * q);
                        }
                    }
                    hist.add(code, 1);
                }
                next = next.max(to);
            }
            (hist, rows, ends)
        },
    );
    Ok(hist)
}

/// Word ranges of one image row: the span from the first to the last
/// nonzero word and the longest run of all-black words, both half-open.
struct RowExtent {
    nonzero: (usize, usize),
    full: (usize, usize),
}

impl RowExtent {
    fn of(row: &[u64]) -> RowExtent {
        let first = row.iter().position(|&w| w != 0);
        let Some(first) = first else {
            return RowExtent {
                nonzero: (row.len(), 0),
                full: (0, 0),
            };
        };
        let last = row.iter().rposition(|&w| w != 0).unwrap_or(first);
        let mut full = (0, 0);
        let mut i = first;
        while i <= last {
            if row[i] == !0 {
                let start = i;
                while i <= last && row[i] == !0 {
                    i += 1;
                }
                if i - start > full.1 - full.0 {
                    full = (start, i);
                }
            } else {
                i += 1;
            }
        }
        RowExtent {
            nonzero: (first, last + 1),
            full,
        }
    }
}

/// Reference counter: visits every window position that can touch the
/// image and reads its pixels one by one.
pub fn count_configurations_naive(img: &LatticeImage, n: usize) -> Result<ConfigHistogram> {
    check_margin(img, n)?;
    let d = img.dim();
    let mut hist = ConfigHistogram::new(n, d)?;
    let offsets = window_offsets(n, d);
    let lo = -(n as i64 - 1);
    let extents: Vec<i64> = img
        .dims()
        .iter()
        .map(|&m| m as i64 + n as i64 - 1)
        .collect();
    let total: i64 = extents.iter().product();
    let mut corner = vec![0i64; d];
    let mut z = vec![0i64; d];
    for lin in 0..total {
        let mut rest = lin;
        for k in 0..d {
            corner[k] = lo + rest % extents[k];
            rest /= extents[k];
        }
        let mut code = 0u64;
        for (p, x) in offsets.iter().enumerate() {
            for k in 0..d {
                z[k] = corner[k] + x[k] as i64;
            }
            if img.get(&z) {
                code |= 1 << p;
            }
        }
        hist.add(code, 1);
    }
    Ok(hist)
}

/// Element of the hyperoctahedral group: coordinate `k` of the image of `x`
/// is `x[perm[k]]`, reflected when `flips[k]` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symmetry {
    pub perm: Vec<usize>,
    pub flips: Vec<bool>,
}

impl Symmetry {
    /// All `2^d d!` lattice symmetries, identity first.
    pub fn all(d: usize) -> Vec<Symmetry> {
        let mut perms: Vec<Vec<usize>> = vec![vec![]];
        for k in 0..d {
            perms = perms
                .into_iter()
                .flat_map(|p| {
                    (0..=k).map(move |pos| {
                        let mut q = p.clone();
                        q.insert(pos, k);
                        q
                    })
                })
                .collect();
        }
        perms.sort();
        let mut out = Vec::new();
        for p in perms {
            for mask in 0..(1usize << d) {
                out.push(Symmetry {
                    perm: p.clone(),
                    flips: (0..d).map(|k| mask >> k & 1 == 1).collect(),
                });
            }
        }
        out
    }

    pub fn map_offset(&self, x: &[usize], n: usize) -> Vec<usize> {
        self.perm
            .iter()
            .zip(&self.flips)
            .map(|(&src, &flip)| if flip { n - 1 - x[src] } else { x[src] })
            .collect()
    }

    /// Image of a direction; half-space configurations follow their normals.
    pub fn map_direction(&self, u: &[f64]) -> Vec<f64> {
        self.perm
            .iter()
            .zip(&self.flips)
            .map(|(&src, &flip)| if flip { -u[src] } else { u[src] })
            .collect()
    }

    pub fn map_code(&self, code: u64, n: usize) -> u64 {
        let d = self.perm.len();
        let black: Vec<Vec<usize>> = decode_config(code, n, d)
            .iter()
            .map(|x| self.map_offset(x, n))
            .collect();
        encode_config(&black, n, d).expect("symmetry preserves the window")
    }

    /// Image of a window-indexed pixel array with extents `dims`.
    pub fn map_index(&self, z: &[usize], dims: &[usize]) -> Vec<usize> {
        self.perm
            .iter()
            .zip(&self.flips)
            .map(|(&src, &flip)| if flip { dims[src] - 1 - z[src] } else { z[src] })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block3() -> LatticeImage {
        LatticeImage::from_fn(vec![5, 5], 1, |z| {
            (1..4).contains(&z[0]) && (1..4).contains(&z[1])
        })
        .unwrap()
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_config(&[], 2, 2).unwrap(), 0);
        assert_eq!(encode_config(&[vec![0, 0]], 2, 2).unwrap(), 1);
        let all = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        assert_eq!(encode_config(&all, 2, 2).unwrap(), 15);
        assert!(encode_config(&[vec![2, 0]], 2, 2).is_err());
        for j in 0..512u64 {
            assert_eq!(encode_config(&decode_config(j, 3, 2), 3, 2).unwrap(), j);
        }
    }

    #[test]
    fn block_histogram() {
        let h = count_configurations(&block3(), 2).unwrap();
        assert_eq!(h.get(15), 4);
        for j in [1, 2, 4, 8] {
            assert_eq!(h.get(j), 1);
        }
        for j in [3, 5, 10, 12] {
            assert_eq!(h.get(j), 2);
        }
        assert_eq!(h.total(), 16);
        assert_eq!(h, count_configurations_naive(&block3(), 2).unwrap());
    }

    #[test]
    fn single_pixel_and_empty() {
        let one = LatticeImage::from_fn(vec![3, 3], 1, |z| z == [1, 1]).unwrap();
        let h = count_configurations(&one, 2).unwrap();
        assert_eq!(h.nonzero(), vec![(1, 1), (2, 1), (4, 1), (8, 1)]);
        let none = LatticeImage::from_fn(vec![3, 3], 1, |_| false).unwrap();
        assert_eq!(count_configurations(&none, 2).unwrap().total(), 0);
        assert_eq!(count_configurations_naive(&none, 2).unwrap().total(), 0);
    }

    #[test]
    fn margin_check() {
        assert_eq!(
            count_configurations(&block3(), 3),
            Err(ConfigError::InsufficientMargin {
                margin: 1,
                needed: 2
            })
        );
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let img = LatticeImage::from_fn(vec![200, 4], 1, |z| {
            (z[0] * 7 + z[1] * 3) % 5 < 2 && (1..199).contains(&z[0]) && (1..3).contains(&z[1])
        })
        .unwrap();
        assert_eq!(
            count_configurations(&img, 2).unwrap(),
            count_configurations_naive(&img, 2).unwrap()
        );
    }

    #[test]
    fn sparse_histograms_for_large_windows() {
        let img = LatticeImage::from_fn(vec![8, 8, 8], 2, |z| {
            z.iter().all(|&c| (2..6).contains(&c)) && (z[0] + z[1] + z[2]) % 3 != 0
        })
        .unwrap();
        let fast = count_configurations(&img, 3).unwrap();
        assert!(matches!(fast.counts, Counts::Sparse(_)));
        assert_eq!(fast, count_configurations_naive(&img, 3).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let h = count_configurations(&block3(), 2).unwrap();
        assert_eq!(ConfigHistogram::from_csv(&h.to_csv(), 2, 2).unwrap(), h);
        assert!(ConfigHistogram::from_csv("index,count\n0,3\n", 2, 2).is_err());
        assert!(ConfigHistogram::from_csv("index,count\n16,3\n", 2, 2).is_err());
    }

    #[test]
    fn symmetry_group_sizes() {
        assert_eq!(Symmetry::all(2).len(), 8);
        assert_eq!(Symmetry::all(3).len(), 48);
        let id = &Symmetry::all(3)[0];
        assert_eq!(id.map_code(0b1011_0001, 2), 0b1011_0001);
    }
}
