//! Shift sweeps, variance curves over a lattice-distance schedule, envelope
//! slope fits, and the cusp counterexample study.

use crate::configcount::{count_configurations, count_runs, ConfigError};
use crate::estimator::{estimate_value, EstimatorError, WeightTable};
use crate::geometry::Solid;
use crate::lattice::{digitize, digitize_runs, LatticeError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("cannot fit slope: {0}")]
    Fit(String),
    #[error("invalid sampler: {0}")]
    Sampler(String),
    #[error("weights are for d={weights}, solid has d={solid}")]
    DimensionMismatch { weights: usize, solid: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

type Result<T> = std::result::Result<T, ExperimentError>;

/// Source of sub-lattice shifts in `[0,1)^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShiftSampler {
    /// The `m^d` cell midpoints `((i_1+1/2)/m, ..., (i_d+1/2)/m)`.
    Grid { m: usize },
    /// `runs` independent uniform shifts. Shift `i` at lattice distance `t`
    /// is drawn from ChaCha8 stream `i` of a generator keyed by
    /// `(seed, bits of t)`, so every value depends only on those three.
    MonteCarlo { runs: usize, seed: u64 },
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl ShiftSampler {
    pub fn count(&self, d: usize) -> usize {
        match *self {
            ShiftSampler::Grid { m } => m.pow(d as u32),
            ShiftSampler::MonteCarlo { runs, .. } => runs,
        }
    }

    pub fn shift(&self, d: usize, t: f64, index: usize) -> Vec<f64> {
        match *self {
            ShiftSampler::Grid { m } => {
                let mut rest = index;
                (0..d)
                    .map(|_| {
                        let i = rest % m;
                        rest /= m;
                        (i as f64 + 0.5) / m as f64
                    })
                    .collect()
            }
            ShiftSampler::MonteCarlo { seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(t.to_bits())));
                rng.set_stream(index as u64);
                (0..d).map(|_| rng.random::<f64>()).collect()
            }
        }
    }

    pub fn shifts(&self, d: usize, t: f64) -> Vec<Vec<f64>> {
        (0..self.count(d)).map(|i| self.shift(d, t, i)).collect()
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ShiftSampler::Grid { m: 0 } => {
                Err(ExperimentError::Sampler("grid needs m >= 1".into()))
            }
            ShiftSampler::MonteCarlo { runs: 0, .. } => {
                Err(ExperimentError::Sampler("needs at least one run".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Statistics of the estimator over the sampled shifts at one `t`.
///
/// Mean and variance are the exact values of the sample, rounded once;
/// the variance is the population variance (divisor `runs`).
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    pub sup: f64,
    pub inf: f64,
    pub variance: f64,
    /// Whether `variance <= (sup - inf)^2 / 4` holds in exact arithmetic.
    pub range_bound_holds: bool,
}

impl CurvePoint {
    pub fn from_values(t: f64, values: &[f64]) -> CurvePoint {
        assert!(!values.is_empty());
        let n = values.len();
        // Every finite value is m 2^e; scaled to the smallest exponent the
        // values become integers and the sums stay exact.
        let parts: Vec<(i64, i16)> = values
            .iter()
            .map(|&v| {
                let (m, e, sign) = num_traits::Float::integer_decode(v);
                (sign as i64 * m as i64, e)
            })
            .collect();
        let e0 = parts
            .iter()
            .filter(|p| p.0 != 0)
            .map(|p| p.1)
            .min()
            .unwrap_or(0);
        let scaled: Vec<BigInt> = parts
            .iter()
            .map(|&(m, e)| BigInt::from(m) << (e - e0).max(0) as usize)
            .collect();
        let mut s1 = BigInt::zero();
        let mut s2 = BigInt::zero();
        for x in &scaled {
            s2 += x * x;
            s1 += x;
        }
        let count = BigInt::from(n);
        let (max, min) = (scaled.iter().max().unwrap(), scaled.iter().min().unwrap());
        // n^2 var 2^(-2 e0) = n s2 - s1^2, and (sup - inf) 2^(-e0) = max - min.
        let spread = &count * &s2 - &s1 * &s1;
        let range = max - min;
        let range_bound_holds = BigInt::from(4) * &spread <= &count * &count * &range * &range;
        let unit = if e0 >= 0 {
            BigRational::from_integer(BigInt::from(1) << e0 as usize)
        } else {
            BigRational::new(BigInt::from(1), BigInt::from(1) << (-e0) as usize)
        };
        let mean = BigRational::new(s1, count.clone()) * &unit;
        let var = BigRational::new(spread, &count * &count) * &unit * &unit;
        let variance = var.to_f64().expect("finite");
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
        CurvePoint {
            t,
            runs: n,
            mean: mean.to_f64().expect("finite"),
            std: variance.sqrt(),
            sup,
            inf,
            variance,
            range_bound_holds,
        }
    }
}

/// Estimates over all sampled shifts, in sampler order.
pub fn sweep_values(
    solid: &Solid,
    t: f64,
    w: &WeightTable,
    sampler: &ShiftSampler,
) -> Result<Vec<f64>> {
    sampler.validate()?;
    let d = solid.dim();
    if w.d() != d {
        return Err(ExperimentError::DimensionMismatch {
            weights: w.d(),
            solid: d,
        });
    }
    let n = w.n();
    (0..sampler.count(d))
        .into_par_iter()
        .map(|i| {
            let shift = sampler.shift(d, t, i);
            let hist = match digitize_runs(solid, t, &shift, n - 1)? {
                Some(runs) => count_runs(&runs, n)?,
                None => count_configurations(&digitize(solid, t, &shift, n - 1)?, n)?,
            };
            Ok(estimate_value(&hist, w, t)?)
        })
        .collect()
}

pub fn sweep_shifts(
    solid: &Solid,
    t: f64,
    w: &WeightTable,
    sampler: &ShiftSampler,
) -> Result<CurvePoint> {
    Ok(CurvePoint::from_values(
        t,
        &sweep_values(solid, t, w, sampler)?,
    ))
}

#[derive(Clone, Debug, Default)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
    /// Scheduled values of `t` that failed, with the error message.
    pub failures: Vec<(f64, String)>,
}

impl Curve {
    /// `t,runs,mean,std,sup,inf` with shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,runs,mean,std,sup,inf\n");
        for p in &self.points {
            writeln!(
                s,
                "{:?},{},{:?},{:?},{:?},{:?}",
                p.t, p.runs, p.mean, p.std, p.sup, p.inf
            )
            .unwrap();
        }
        s
    }

    pub fn std_series(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.t, p.std)).collect()
    }

    pub fn range_series(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.t, p.sup - p.inf)).collect()
    }
}

/// Sweeps every scheduled `t`, in schedule order. A failing point is
/// recorded and the curve continues.
pub fn variance_curve(
    solid: &Solid,
    w: &WeightTable,
    schedule: &[f64],
    sampler: &ShiftSampler,
) -> Curve {
    let mut curve = Curve::default();
    for &t in schedule {
        match sweep_shifts(solid, t, w, sampler) {
            Ok(p) => curve.points.push(p),
            Err(e) => curve.failures.push((t, e.to_string())),
        }
    }
    curve
}

/// Lattice distances `t_max ratio^k >= t_min`, descending, where for each
/// integer `l` with `1/l` in range the largest value below `1/l` is
/// replaced by `1/l` itself.
///
/// Values already equal to some `1/l` stay as they are. A value is only
/// replaced when it lies above `1/(l+1)`, so a coarse ratio never drags a
/// value past another reciprocal; when two reciprocals would replace the
/// same value the larger one wins.
pub fn t_schedule(t_max: f64, ratio: f64, t_min: f64) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min < t_max && t_max < 1.0) {
        return Err(ExperimentError::Schedule(format!(
            "need 0 < t_min < t_max < 1, got [{t_min}, {t_max}]"
        )));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(ExperimentError::Schedule(format!(
            "need 0 < ratio < 1, got {ratio}"
        )));
    }
    let mut orig = Vec::new();
    for k in 0.. {
        let t = t_max * ratio.powi(k);
        if t < t_min {
            break;
        }
        orig.push(t);
    }
    if orig.is_empty() {
        return Err(ExperimentError::Schedule(
            "no lattice distance in range".into(),
        ));
    }
    let mut values = orig.clone();
    let mut replaced = vec![false; orig.len()];
    let first = (1.0 / t_max).ceil() as u64;
    let last = (1.0 / t_min).floor() as u64;
    for l in first.max(1)..=last {
        let target = 1.0 / l as f64;
        if target > t_max || target < t_min || orig.contains(&target) {
            continue;
        }
        let next = 1.0 / (l + 1) as f64;
        if let Some(idx) = orig.iter().position(|&t| t < target) {
            if !replaced[idx] && orig[idx] > next {
                values[idx] = target;
                replaced[idx] = true;
            }
        }
    }
    values.sort_by(|a, b| b.total_cmp(a));
    values.dedup();
    Ok(values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    /// Running maximum over a centered window of the log t axis.
    Upper,
    /// Every point with a positive statistic.
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points_used: usize,
}

/// Least-squares slope of `log(stat)` against `log(t)`.
///
/// The input must span at least two octaves of `t`. In `Upper` mode each
/// point is replaced by the maximum over the points within half a window
/// (in octaves) on either side, and only points whose whole window lies
/// inside the data range are kept. Non-positive statistics are dropped.
pub fn fit_envelope_slope(
    points: &[(f64, f64)],
    envelope: Envelope,
    window_octaves: f64,
) -> Result<SlopeFit> {
    let fit_err = |m: &str| ExperimentError::Fit(m.to_string());
    if points
        .iter()
        .any(|(t, s)| !(t.is_finite() && *t > 0.0) || !s.is_finite())
    {
        return Err(fit_err("t must be positive and statistics finite"));
    }
    let lt: Vec<f64> = points.iter().map(|(t, _)| t.log2()).collect();
    let (lo, hi) = lt
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if !(hi - lo >= 2.0 - 1e-9) {
        return Err(fit_err("data must span at least two octaves of t"));
    }
    let series: Vec<(f64, f64)> = match envelope {
        Envelope::All => lt.iter().zip(points).map(|(&x, &(_, s))| (x, s)).collect(),
        Envelope::Upper => {
            if !(window_octaves > 0.0 && window_octaves.is_finite()) {
                return Err(fit_err("window must be a positive number of octaves"));
            }
            let half = window_octaves / 2.0;
            let tol = 1e-9;
            lt.iter()
                .filter(|&&x| x - half >= lo - tol && x + half <= hi + tol)
                .map(|&x| {
                    let m = lt
                        .iter()
                        .zip(points)
                        .filter(|(&y, _)| (y - x).abs() <= half + tol)
                        .map(|(_, &(_, s))| s)
                        .fold(f64::NEG_INFINITY, f64::max);
                    (x, m)
                })
                .collect()
        }
    };
    let data: Vec<(f64, f64)> = series
        .into_iter()
        .filter(|&(_, s)| s > 0.0)
        .map(|(x, s)| (x * std::f64::consts::LN_2, s.ln()))
        .collect();
    if data.len() < 2 {
        return Err(fit_err("fewer than two positive points after filtering"));
    }
    let m = data.len() as f64;
    let mx = data.iter().map(|p| p.0).sum::<f64>() / m;
    let my = data.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = data.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = data.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(fit_err("all remaining points share one t"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if data.len() > 2 {
        let ssr: f64 = data
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope,
        stderr,
        intercept,
        points_used: data.len(),
    })
}

#[derive(Clone, Debug)]
pub struct CuspResult {
    pub curve: Curve,
    pub fit: std::result::Result<SlopeFit, String>,
    pub warning: Option<String>,
}

/// Codes of the two 2x2 configurations with one full black row and one full
/// white row.
pub const ROW_CODES: [u64; 2] = [0b0011, 0b1100];

/// Variance curve of the cusp union with exponent `k` and the upper-envelope
/// slope of its standard deviation.
pub fn cusp_experiment(
    k: u32,
    schedule: &[f64],
    sampler: &ShiftSampler,
    w: &WeightTable,
    window_octaves: f64,
) -> Result<CuspResult> {
    let solid = Solid::cusp(k).map_err(|e| ExperimentError::Sampler(e.to_string()))?;
    if w.d() != 2 {
        return Err(ExperimentError::DimensionMismatch {
            weights: w.d(),
            solid: 2,
        });
    }
    let warning = if w.n() != 2 || w.get(ROW_CODES[0]) + w.get(ROW_CODES[1]) == 0.0 {
        Some("the weights of the two row configurations sum to zero; the slow variance decay need not appear".into())
    } else {
        None
    };
    let curve = variance_curve(&solid, w, schedule, sampler);
    let fit = fit_envelope_slope(&curve.std_series(), Envelope::Upper, window_octaves)
        .map_err(|e| e.to_string());
    Ok(CuspResult {
        curve,
        fit,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_starts_at_t_max() {
        let s = t_schedule(0.1, 0.999, 0.05).unwrap();
        assert_eq!(s[0], 0.1);
        assert!((s[1] - 0.0999).abs() < 1e-15);
        assert!(s.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn reciprocal_snapping() {
        let s = t_schedule(0.1, 0.999, 0.05).unwrap();
        let target = 1.0 / 11.0;
        assert_eq!(s.iter().filter(|&&t| t == target).count(), 1);
        let orig: Vec<f64> = (0..)
            .map(|k| 0.1 * 0.999f64.powi(k))
            .take_while(|&t| t >= 0.05)
            .collect();
        let replaced = orig.iter().copied().find(|&t| t < target).unwrap();
        assert!(!s.contains(&replaced));
        assert_eq!(s.len(), orig.len());
        for l in 10..20 {
            assert!(s.contains(&(1.0 / l as f64)), "missing 1/{l}");
        }
    }

    #[test]
    fn coarse_schedule() {
        assert_eq!(t_schedule(0.1, 0.5, 0.02).unwrap(), vec![0.1, 0.05, 0.025]);
        assert!(t_schedule(0.1, 0.5, 0.2).is_err());
    }

    #[test]
    fn slope_of_power_laws() {
        let ts = t_schedule(0.1, 0.99, 0.01).unwrap();
        let lin: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 3.0 * t)).collect();
        let fit = fit_envelope_slope(&lin, Envelope::All, 1.0).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9);
        let pow: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 0.2 * t.powf(1.5))).collect();
        assert!(
            (fit_envelope_slope(&pow, Envelope::Upper, 1.0)
                .unwrap()
                .slope
                - 1.5)
                .abs()
                < 1e-2
        );
    }

    #[test]
    fn slope_of_oscillating_envelope() {
        let ts = t_schedule(0.1, 0.999, 0.001).unwrap();
        let osc: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| (t, t * (1.0 + 0.5 * (1.0 / t).sin())))
            .collect();
        let fit = fit_envelope_slope(&osc, Envelope::Upper, 1.0).unwrap();
        assert!((0.9..=1.1).contains(&fit.slope), "{fit:?}");
    }

    #[test]
    fn degenerate_fits_fail() {
        let flat = vec![(0.1, 0.0), (0.05, 0.0), (0.025, 0.0)];
        assert!(fit_envelope_slope(&flat, Envelope::All, 1.0).is_err());
        let short = vec![(0.1, 1.0), (0.05, 0.5)];
        assert!(fit_envelope_slope(&short, Envelope::All, 1.0).is_err());
    }

    #[test]
    fn identical_values_have_zero_spread() {
        let p = CurvePoint::from_values(0.1, &[0.1, 0.1, 0.1]);
        assert_eq!(p.std, 0.0);
        assert_eq!(p.mean, 0.1);
        assert!(p.range_bound_holds);
        let q = CurvePoint::from_values(0.1, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(q.variance, 1.25);
        assert!(q.range_bound_holds);
    }

    #[test]
    fn sampler_shifts() {
        let g = ShiftSampler::Grid { m: 4 };
        assert_eq!(g.shifts(2, 0.1).len(), 16);
        assert_eq!(g.shift(2, 0.1, 5), vec![0.375, 0.375]);
        let mc = ShiftSampler::MonteCarlo { runs: 10, seed: 7 };
        let a = mc.shifts(3, 0.05);
        assert_eq!(a, mc.shifts(3, 0.05));
        assert_ne!(a, mc.shifts(3, 0.04));
        assert!(a.iter().flatten().all(|s| (0.0..1.0).contains(s)));
        assert_eq!(mc.shift(3, 0.05, 4), a[4]);
    }
}
