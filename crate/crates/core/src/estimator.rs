//! Weighted local estimators `t^(d-1) Σ_j w_j N_j`, weight tables, and the
//! asymptotic mean for polytopes.

use crate::configcount::{
    window_offsets, window_pixels, ConfigError, ConfigHistogram, Symmetry, DENSE_MAX_PIXELS,
};
use crate::geometry::{GeometryError, Solid};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use thiserror::Error;

/// Seed used for the shipped weight tables and as the CLI default.
pub const DEFAULT_SEED: u64 = 1729;

/// Training directions (before symmetrization) for the shipped tables.
pub fn default_calibration_samples(d: usize) -> usize {
    if d == 2 {
        64
    } else {
        256
    }
}

const DEFAULT_D2_N2: &str = include_str!("../data/weights_d2_n2.csv");
const DEFAULT_D3_N2: &str = include_str!("../data/weights_d3_n2.csv");

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("shape mismatch: histogram is n={hn}, d={hd}; weights are n={wn}, d={wd}")]
    ShapeMismatch {
        hn: usize,
        hd: usize,
        wn: usize,
        wd: usize,
    },
    #[error("lattice distance must be finite and > 0, got {0}")]
    InvalidSpacing(f64),
    #[error(
        "weights of the all-white and all-black configurations must be 0 (got {white}, {black})"
    )]
    NonzeroEndpoints { white: f64, black: f64 },
    #[error("weight CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("direction must be a finite unit vector, got {0:?}")]
    NotUnit(Vec<f64>),
    #[error("no shipped weight table for n={n}, d={d}")]
    NoDefault { n: usize, d: usize },
    #[error("calibration needs at least {needed} direction samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("calibration supports windows of at most {DENSE_MAX_PIXELS} pixels")]
    CalibrationTooLarge,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type Result<T> = std::result::Result<T, EstimatorError>;

/// Weights `w_j` per configuration code; unlisted codes weigh 0.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    n: usize,
    d: usize,
    weights: BTreeMap<u64, f64>,
}

impl WeightTable {
    pub fn zeros(n: usize, d: usize) -> Result<WeightTable> {
        window_pixels(n, d)?;
        Ok(WeightTable {
            n,
            d,
            weights: BTreeMap::new(),
        })
    }

    /// Table from `(code, weight)` pairs, enforcing zero endpoint weights.
    pub fn from_pairs(
        n: usize,
        d: usize,
        pairs: impl IntoIterator<Item = (u64, f64)>,
    ) -> Result<WeightTable> {
        let mut w = WeightTable::zeros(n, d)?;
        for (j, x) in pairs {
            w.set(j, x);
        }
        w.check_endpoints()?;
        Ok(w)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn full_code(&self) -> u64 {
        (1u64 << self.n.pow(self.d as u32)) - 1
    }

    pub fn get(&self, j: u64) -> f64 {
        self.weights.get(&j).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, j: u64, w: f64) {
        assert!(j <= self.full_code(), "code {j} out of range");
        assert!(w.is_finite(), "weights must be finite");
        if w == 0.0 {
            self.weights.remove(&j);
        } else {
            self.weights.insert(j, w);
        }
    }

    /// Nonzero weights in ascending code order.
    pub fn nonzero(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights.iter().map(|(&j, &w)| (j, w))
    }

    pub fn check_endpoints(&self) -> Result<()> {
        let (white, black) = (self.get(0), self.get(self.full_code()));
        if white != 0.0 || black != 0.0 {
            return Err(EstimatorError::NonzeroEndpoints { white, black });
        }
        Ok(())
    }

    /// `index,weight` rows for nonzero weights, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,weight\n");
        for (j, w) in self.nonzero() {
            writeln!(s, "{j},{w:?}").unwrap();
        }
        s
    }

    pub fn from_csv(
        text: &str,
        n: usize,
        d: usize,
        allow_nonzero_endpoints: bool,
    ) -> Result<WeightTable> {
        let mut w = WeightTable::zeros(n, d)?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, head)) if head.trim() == "index,weight" => {}
            _ => {
                return Err(EstimatorError::Csv {
                    line: 1,
                    reason: "expected header `index,weight`".into(),
                })
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: &str| EstimatorError::Csv {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| bad("expected two fields"))?;
            let j: u64 = a
                .trim()
                .parse()
                .map_err(|_| bad("index is not an integer"))?;
            let x: f64 = b
                .trim()
                .parse()
                .map_err(|_| bad("weight is not a number"))?;
            if j > w.full_code() {
                return Err(bad("index out of range"));
            }
            if !x.is_finite() {
                return Err(bad("weight is not finite"));
            }
            if !seen.insert(j) {
                return Err(bad("duplicate index"));
            }
            w.set(j, x);
        }
        if !allow_nonzero_endpoints {
            w.check_endpoints()?;
        }
        Ok(w)
    }

    /// The shipped calibrated table for `(n, d)`.
    pub fn default_for(n: usize, d: usize) -> Result<WeightTable> {
        match (n, d) {
            (2, 2) => WeightTable::from_csv(DEFAULT_D2_N2, 2, 2, false),
            (2, 3) => WeightTable::from_csv(DEFAULT_D3_N2, 2, 3, false),
            _ => Err(EstimatorError::NoDefault { n, d }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateResult {
    pub value: f64,
    pub t: f64,
    /// Fingerprint of the histogram the estimate was computed from.
    pub provenance: String,
}

/// `t^(d-1) Σ_j w_j N_j`, summed in ascending code order.
pub fn estimate(hist: &ConfigHistogram, w: &WeightTable, t: f64) -> Result<EstimateResult> {
    let value = estimate_value(hist, w, t)?;
    Ok(EstimateResult {
        value,
        t,
        provenance: hist.fingerprint(),
    })
}

/// The value of [`estimate`] without computing the provenance id.
pub fn estimate_value(hist: &ConfigHistogram, w: &WeightTable, t: f64) -> Result<f64> {
    if hist.n() != w.n || hist.d() != w.d {
        return Err(EstimatorError::ShapeMismatch {
            hn: hist.n(),
            hd: hist.d(),
            wn: w.n,
            wd: w.d,
        });
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(EstimatorError::InvalidSpacing(t));
    }
    let mut sum = 0.0;
    for (j, wj) in w.nonzero() {
        sum += wj * hist.get(j) as f64;
    }
    Ok(t.powi(w.d as i32 - 1) * sum)
}

fn check_unit(u: &[f64]) -> Result<()> {
    let len2: f64 = u.iter().map(|x| x * x).sum();
    if u.is_empty() || !u.iter().all(|x| x.is_finite()) || (len2 - 1.0).abs() > 1e-9 {
        return Err(EstimatorError::NotUnit(u.to_vec()));
    }
    Ok(())
}

/// Code of the configuration with black offsets `{x : <x, u> <= c}`.
pub fn halfspace_config(u: &[f64], c: f64, n: usize) -> Result<u64> {
    check_unit(u)?;
    let d = u.len();
    window_pixels(n, d)?;
    let mut code = 0u64;
    for (p, x) in window_offsets(n, d).iter().enumerate() {
        let ip: f64 = x.iter().zip(u).map(|(&xi, ui)| xi as f64 * ui).sum();
        if ip <= c {
            code |= 1 << p;
        }
    }
    Ok(code)
}

/// The difference set `W - B` of a configuration, which carries
/// `(-h(B ⊕ W̌, u))^+ = max(0, min_{δ ∈ W - B} <δ, u>)`.
#[derive(Clone, Debug)]
pub struct Response {
    diffs: Vec<Vec<f64>>,
}

impl Response {
    pub fn new(code: u64, n: usize, d: usize) -> Response {
        let offsets = window_offsets(n, d);
        let mut diffs: Vec<Vec<f64>> = Vec::new();
        for (pb, b) in offsets.iter().enumerate() {
            if code >> pb & 1 == 0 {
                continue;
            }
            for (pw, w) in offsets.iter().enumerate() {
                if code >> pw & 1 == 1 {
                    continue;
                }
                let delta: Vec<f64> = w
                    .iter()
                    .zip(b)
                    .map(|(&a, &c)| a as f64 - c as f64)
                    .collect();
                if !diffs.contains(&delta) {
                    diffs.push(delta);
                }
            }
        }
        Response { diffs }
    }

    /// Asymptotic count of the configuration per unit area of a flat
    /// boundary piece with exterior normal `u`, in units of `t^(1-d)`.
    pub fn at(&self, u: &[f64]) -> f64 {
        if self.diffs.is_empty() {
            return 0.0;
        }
        let m = self
            .diffs
            .iter()
            .map(|delta| delta.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        m.max(0.0)
    }
}

/// `Σ_j w_j Σ_faces (-h(B_j ⊕ W̌_j, ν_f))^+ area_f` for a polytope or box.
pub fn asymptotic_mean(solid: &Solid, w: &WeightTable) -> Result<f64> {
    match solid {
        Solid::Polytope(_) | Solid::AxisBox(_) => {}
        _ => {
            return Err(GeometryError::Unsupported(
                "asymptotic mean needs a polytope or box".into(),
            )
            .into())
        }
    }
    if solid.dim() != w.d {
        return Err(EstimatorError::ShapeMismatch {
            hn: w.n,
            hd: solid.dim(),
            wn: w.n,
            wd: w.d,
        });
    }
    let faces = solid.faces()?;
    let mut total = 0.0;
    for (j, wj) in w.nonzero() {
        let r = Response::new(j, w.n, w.d);
        let s: f64 = faces.iter().map(|f| r.at(&f.normal) * f.area).sum();
        total += wj * s;
    }
    Ok(total)
}

/// Per-area estimator response to a flat boundary with normal `u`.
pub fn direction_response(w: &WeightTable, u: &[f64]) -> f64 {
    w.nonzero()
        .map(|(j, wj)| wj * Response::new(j, w.n, w.d).at(u))
        .sum()
}

/// Root-mean-square of `response(u) - 1` over the given directions.
pub fn response_rms(w: &WeightTable, dirs: &[Vec<f64>]) -> f64 {
    let responses: Vec<(f64, Response)> = w
        .nonzero()
        .map(|(j, wj)| (wj, Response::new(j, w.n, w.d)))
        .collect();
    let ss: f64 = dirs
        .iter()
        .map(|u| {
            let r: f64 = responses.iter().map(|(wj, resp)| wj * resp.at(u)).sum();
            (r - 1.0) * (r - 1.0)
        })
        .sum();
    (ss / dirs.len() as f64).sqrt()
}

/// Uniform random unit vectors.
pub fn random_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len > 1e-12 {
                break v.iter().map(|x| x / len).collect();
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub weights: WeightTable,
    /// Numerical rank of the least-squares system.
    pub rank: usize,
    /// Number of free weights (symmetry orbits excluding the endpoints).
    pub unknowns: usize,
    pub training_rms: f64,
}

impl Calibration {
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.unknowns
    }
}

/// Least-squares weights making the estimator exact on digitized half-spaces.
///
/// Weights are constant on orbits of the lattice symmetry group and the
/// training directions are closed under the group. The system is solved in
/// the minimum-norm sense, so identical or vanishing orbit responses do not
/// make the problem fail; `rank` reports how many combinations were
/// actually determined.
pub fn calibrate_halfspace_weights(
    n: usize,
    d: usize,
    samples: usize,
    seed: u64,
) -> Result<Calibration> {
    let pixels = window_pixels(n, d)?;
    if pixels > DENSE_MAX_PIXELS {
        return Err(EstimatorError::CalibrationTooLarge);
    }
    let full = (1u64 << pixels) - 1;
    let group = Symmetry::all(d);
    let mut orbit_of: HashMap<u64, usize> = HashMap::new();
    let mut orbits: Vec<Vec<u64>> = Vec::new();
    for j in 1..full {
        if orbit_of.contains_key(&j) {
            continue;
        }
        let mut members: Vec<u64> = group.iter().map(|g| g.map_code(j, n)).collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            orbit_of.insert(m, orbits.len());
        }
        orbits.push(members);
    }
    let unknowns = orbits.len();
    if samples == 0 || samples * group.len() < unknowns {
        return Err(EstimatorError::TooFewSamples {
            needed: unknowns.div_ceil(group.len()),
            got: samples,
        });
    }
    let dirs: Vec<Vec<f64>> = random_directions(d, samples, seed)
        .iter()
        .flat_map(|u| group.iter().map(move |g| g.map_direction(u)))
        .collect();
    let responses: Vec<Vec<Response>> = orbits
        .iter()
        .map(|o| o.iter().map(|&j| Response::new(j, n, d)).collect())
        .collect();
    let full_a = DMatrix::from_fn(dirs.len(), unknowns, |r, o| {
        responses[o].iter().map(|f| f.at(&dirs[r])).sum()
    });
    // Orbits that never respond to a flat boundary keep weight exactly 0.
    let active: Vec<usize> = (0..unknowns)
        .filter(|&o| full_a.column(o).iter().any(|&x| x != 0.0))
        .collect();
    let a = full_a.select_columns(&active);
    let b = DVector::from_element(dirs.len(), 1.0);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = 1e-9 * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let solved = svd
        .solve(&b, tol)
        .expect("SVD was computed with both factors");
    let mut theta = DVector::zeros(unknowns);
    for (k, &o) in active.iter().enumerate() {
        theta[o] = solved[k];
    }
    let residual = &full_a * &theta - &b;
    let training_rms = (residual.norm_squared() / dirs.len() as f64).sqrt();
    let mut weights = WeightTable::zeros(n, d)?;
    for (o, members) in orbits.iter().enumerate() {
        for &j in members {
            weights.set(j, theta[o]);
        }
    }
    Ok(Calibration {
        weights,
        rank,
        unknowns,
        training_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configcount::{count_configurations, encode_config};
    use crate::lattice::LatticeImage;

    #[test]
    fn estimate_arithmetic() {
        let img = LatticeImage::from_fn(vec![4, 4, 4], 1, |z| z == [1, 1, 1]).unwrap();
        let h = count_configurations(&img, 2).unwrap();
        let w = WeightTable::from_pairs(2, 3, [(1, 0.5), (2, 0.5), (4, 0.5), (8, 0.5)]).unwrap();
        let r = estimate(&h, &w, 0.1).unwrap();
        assert!((r.value - 0.02).abs() < 1e-15);
        assert_eq!(r.provenance, h.fingerprint());
        let zero = WeightTable::zeros(2, 3).unwrap();
        assert_eq!(estimate(&h, &zero, 0.1).unwrap().value, 0.0);
        let w2 = WeightTable::zeros(2, 2).unwrap();
        assert!(matches!(
            estimate(&h, &w2, 0.1),
            Err(EstimatorError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn halfspace_examples() {
        assert_eq!(halfspace_config(&[0.0, 1.0], 0.5, 2).unwrap(), 3);
        assert_eq!(halfspace_config(&[1.0, 0.0], -0.1, 2).unwrap(), 0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(halfspace_config(&[s, s], 0.9, 2).unwrap(), 7);
        assert!(halfspace_config(&[1.0, 1.0], 0.0, 2).is_err());
    }

    #[test]
    fn endpoint_constraint() {
        assert!(WeightTable::from_pairs(2, 2, [(15, 1.0)]).is_err());
        assert!(WeightTable::from_csv("index,weight\n0,1\n", 2, 2, false).is_err());
        let w = WeightTable::from_csv("index,weight\n0,1\n3,0.25\n", 2, 2, true).unwrap();
        assert_eq!(w.get(0), 1.0);
        assert_eq!(w.get(3), 0.25);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let w = WeightTable::from_pairs(2, 2, [(1, 0.1), (6, -1.0 / 3.0), (14, 1e-300)]).unwrap();
        assert_eq!(WeightTable::from_csv(&w.to_csv(), 2, 2, false).unwrap(), w);
    }

    #[test]
    fn left_column_response_on_square() {
        let left = encode_config(&[vec![0, 0], vec![0, 1]], 2, 2).unwrap();
        let w = WeightTable::from_pairs(2, 2, [(left, 1.0)]).unwrap();
        let sq = Solid::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(asymptotic_mean(&sq, &w).unwrap(), 1.0);
        let bottom = encode_config(
            &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]],
            2,
            3,
        )
        .unwrap();
        let w3 = WeightTable::from_pairs(2, 3, [(bottom, 1.0)]).unwrap();
        let cube = Solid::axis_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert_eq!(asymptotic_mean(&cube, &w3).unwrap(), 1.0);
        assert_eq!(
            asymptotic_mean(&cube, &WeightTable::zeros(2, 3).unwrap()).unwrap(),
            0.0
        );
        assert!(asymptotic_mean(&Solid::ball(vec![0.0; 3], 1.0).unwrap(), &w3).is_err());
    }

    #[test]
    fn calibration_fits_planar_directions() {
        let cal = calibrate_halfspace_weights(2, 2, 64, DEFAULT_SEED).unwrap();
        cal.weights.check_endpoints().unwrap();
        assert!(cal.rank_deficient());
        let held_out = random_directions(2, 500, 99);
        assert!(response_rms(&cal.weights, &held_out) < 0.05);
    }
}
