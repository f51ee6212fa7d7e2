//! Boundary decomposition into normal regions and components, multi-component
//! cell counts, and exact checks of the pixel-count bounds per component.
//!
//! All geometry here is exact: polygon vertices, scaled copies and cell
//! classifications use rational arithmetic, and lattice-point membership uses
//! integer half-plane tests.

use crate::configcount::{window_offsets, window_pixels, ConfigError};
use crate::exact::rational;
use crate::geometry::{GeometryError, Solid};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

type Q = BigRational;

#[derive(Debug, Error)]
pub enum DecompositionError {
    #[error("unsupported solid: {0}")]
    Unsupported(String),
    #[error("scale must be finite and > 0, got {0}")]
    InvalidScale(f64),
    #[error("shift must be finite with one entry per dimension")]
    InvalidShift,
    #[error("at most 64 boundary components are supported, got {0}")]
    TooManyComponents(usize),
    #[error("cell coordinate out of range")]
    Overflow,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type Result<T> = std::result::Result<T, DecompositionError>;

fn floor_i64(x: &Q) -> Result<i64> {
    x.floor()
        .to_integer()
        .to_i64()
        .ok_or(DecompositionError::Overflow)
}

fn ceil_i64(x: &Q) -> Result<i64> {
    x.ceil()
        .to_integer()
        .to_i64()
        .ok_or(DecompositionError::Overflow)
}

fn int(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// Closed region of normal directions on which the window offsets appear in
/// a fixed order of increasing `<x, u>`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalRegion {
    /// Offset bit indices, ordered by increasing inner product.
    pub order: Vec<usize>,
}

impl NormalRegion {
    /// Code of the configuration made of the first `m` offsets in the order,
    /// i.e. the half-space configuration with `m` black pixels.
    pub fn prefix_code(&self, m: usize) -> u64 {
        self.order[..m].iter().fold(0u64, |acc, &p| acc | 1 << p)
    }
}

/// The lexicographically smallest region whose closure contains `normal`.
///
/// Candidate regions are reached by perturbing the normal lexicographically
/// along signed coordinate axes, which breaks every tie between distinct
/// offsets; each perturbation lands in the interior of a region adjacent to
/// `normal`.
pub fn region_of(normal: &[Q], n: usize) -> Result<NormalRegion> {
    let d = normal.len();
    window_pixels(n, d)?;
    let offsets = window_offsets(n, d);
    let key = |x: &Vec<usize>| -> Q { x.iter().zip(normal).map(|(&c, u)| int(c as i64) * u).sum() };
    let keys: Vec<Q> = offsets.iter().map(key).collect();
    let mut best: Option<Vec<usize>> = None;
    let mut axes: Vec<Vec<usize>> = vec![vec![]];
    for k in 0..d {
        axes = axes
            .into_iter()
            .flat_map(|p| {
                (0..=p.len()).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    q
                })
            })
            .collect();
    }
    for axis_order in &axes {
        for signs in 0..(1usize << d) {
            let mut order: Vec<usize> = (0..offsets.len()).collect();
            order.sort_by(|&a, &b| {
                keys[a].cmp(&keys[b]).then_with(|| {
                    for &ax in axis_order {
                        let (xa, xb) = (offsets[a][ax] as i64, offsets[b][ax] as i64);
                        let (xa, xb) = if signs >> ax & 1 == 1 {
                            (-xa, -xb)
                        } else {
                            (xa, xb)
                        };
                        if xa != xb {
                            return xa.cmp(&xb);
                        }
                    }
                    std::cmp::Ordering::Equal
                })
            });
            if best.as_ref().is_none_or(|b| order < *b) {
                best = Some(order);
            }
        }
    }
    Ok(NormalRegion {
        order: best.expect("at least one perturbation"),
    })
}

/// Convex polygon with exact vertices in counterclockwise order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPolygon {
    pub vertices: Vec<[Q; 2]>,
}

fn cross(o: &[Q; 2], a: &[Q; 2], b: &[Q; 2]) -> Q {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

impl ExactPolygon {
    /// Exact polygon of a 2D box or polytope (the latter as the intersection
    /// of its constraints exactly as stored).
    pub fn from_solid(solid: &Solid) -> Result<ExactPolygon> {
        match solid {
            Solid::AxisBox(b) if b.min.len() == 2 => {
                let lo = [rational(b.min[0]), rational(b.min[1])];
                let hi = [&lo[0] + rational(b.sides[0]), &lo[1] + rational(b.sides[1])];
                Ok(ExactPolygon {
                    vertices: vec![
                        [lo[0].clone(), lo[1].clone()],
                        [hi[0].clone(), lo[1].clone()],
                        [hi[0].clone(), hi[1].clone()],
                        [lo[0].clone(), hi[1].clone()],
                    ],
                })
            }
            Solid::Polytope(p) if p.dim() == 2 => {
                let cons: Vec<([Q; 2], Q)> = p
                    .constraints()
                    .iter()
                    .map(|(a, c)| ([rational(a[0]), rational(a[1])], rational(*c)))
                    .collect();
                let mut pts: Vec<[Q; 2]> = Vec::new();
                for i in 0..cons.len() {
                    for j in i + 1..cons.len() {
                        let (a, b) = (&cons[i].0, &cons[j].0);
                        let det = &a[0] * &b[1] - &a[1] * &b[0];
                        if det.is_zero() {
                            continue;
                        }
                        let x = (&cons[i].1 * &b[1] - &a[1] * &cons[j].1) / &det;
                        let y = (&a[0] * &cons[j].1 - &cons[i].1 * &b[0]) / &det;
                        let feasible = cons.iter().all(|(n, c)| &n[0] * &x + &n[1] * &y <= *c);
                        if feasible {
                            pts.push([x, y]);
                        }
                    }
                }
                pts.sort();
                pts.dedup();
                let mut hull: Vec<[Q; 2]> = Vec::new();
                for pass in 0..2 {
                    let start = hull.len();
                    let seq: Vec<&[Q; 2]> = if pass == 0 {
                        pts.iter().collect()
                    } else {
                        pts.iter().rev().collect()
                    };
                    for pnt in seq {
                        while hull.len() >= start + 2
                            && !cross(&hull[hull.len() - 2], &hull[hull.len() - 1], pnt)
                                .is_positive()
                        {
                            hull.pop();
                        }
                        hull.push(pnt.clone());
                    }
                    hull.pop();
                }
                if hull.len() < 3 {
                    return Err(GeometryError::Invalid("polygon has empty interior".into()).into());
                }
                Ok(ExactPolygon { vertices: hull })
            }
            _ => Err(DecompositionError::Unsupported(
                "expected a 2D convex polygon or box".into(),
            )),
        }
    }

    /// The polygon `r P + v`.
    pub fn scaled(&self, r: &Q, v: &[Q; 2]) -> ExactPolygon {
        ExactPolygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| [r * &p[0] + &v[0], r * &p[1] + &v[1]])
                .collect(),
        }
    }

    /// Edges `(a, b)` in counterclockwise order.
    pub fn edges(&self) -> Vec<([Q; 2], [Q; 2])> {
        let m = self.vertices.len();
        (0..m)
            .map(|i| (self.vertices[i].clone(), self.vertices[(i + 1) % m].clone()))
            .collect()
    }
}

/// Geometric support of a boundary component.
#[derive(Clone, Debug, PartialEq)]
pub enum Carrier {
    /// Edge of a polygon, from `a` to `b` counterclockwise.
    Segment { a: [Q; 2], b: [Q; 2] },
    /// Facet of a box: coordinate `axis` fixed at its lower (`upper = false`)
    /// or upper bound.
    BoxFacet { axis: usize, upper: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryComponent {
    pub index: usize,
    pub carrier: Carrier,
    /// Exterior normal, not normalized.
    pub normal: Vec<Q>,
    pub region: NormalRegion,
}

/// Components of a convex polygon boundary: its edges, each tagged with the
/// smallest normal region containing its exterior normal.
pub fn decompose_polygon_boundary(solid: &Solid, n: usize) -> Result<Vec<BoundaryComponent>> {
    let poly = ExactPolygon::from_solid(solid)?;
    polygon_components(&poly, n)
}

fn polygon_components(poly: &ExactPolygon, n: usize) -> Result<Vec<BoundaryComponent>> {
    let mut out = Vec::new();
    for (a, b) in poly.edges() {
        if a == b {
            continue;
        }
        let normal = vec![&b[1] - &a[1], &a[0] - &b[0]];
        let region = region_of(&normal, n)?;
        out.push(BoundaryComponent {
            index: out.len(),
            carrier: Carrier::Segment { a, b },
            normal,
            region,
        });
    }
    Ok(out)
}

fn box_components(d: usize, n: usize) -> Result<Vec<BoundaryComponent>> {
    let mut out = Vec::new();
    for axis in 0..d {
        for upper in [false, true] {
            let mut normal = vec![Q::zero(); d];
            normal[axis] = int(if upper { 1 } else { -1 });
            let region = region_of(&normal, n)?;
            out.push(BoundaryComponent {
                index: out.len(),
                carrier: Carrier::BoxFacet { axis, upper },
                normal,
                region,
            });
        }
    }
    Ok(out)
}

/// Cells `[l, l+n-1]^d` meeting at least two boundary components of
/// `r K + v`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellReport {
    pub r: f64,
    pub v: Vec<f64>,
    pub n: usize,
    /// Sum of `per_pair`: each cell counts once for every unordered pair of
    /// components it meets.
    pub nprime: u64,
    pub per_pair: BTreeMap<(usize, usize), u64>,
    /// Per component, the number of cells meeting it and some other one.
    pub per_component: Vec<u64>,
}

/// Clips segment `a..b` to the closed box `[lo, hi]`; returns the clipped
/// endpoints.
fn clip_segment(a: &[Q; 2], b: &[Q; 2], lo: &[Q; 2], hi: &[Q; 2]) -> Option<([Q; 2], [Q; 2])> {
    let mut t0 = Q::zero();
    let mut t1 = int(1);
    for k in 0..2 {
        let dir = &b[k] - &a[k];
        if dir.is_zero() {
            if a[k] < lo[k] || a[k] > hi[k] {
                return None;
            }
            continue;
        }
        let ta = (&lo[k] - &a[k]) / &dir;
        let tb = (&hi[k] - &a[k]) / &dir;
        let (enter, leave) = if ta < tb { (ta, tb) } else { (tb, ta) };
        if enter > t0 {
            t0 = enter;
        }
        if leave < t1 {
            t1 = leave;
        }
        if t0 > t1 {
            return None;
        }
    }
    let at = |t: &Q| [&a[0] + (&b[0] - &a[0]) * t, &a[1] + (&b[1] - &a[1]) * t];
    Some((at(&t0), at(&t1)))
}

/// Cells meeting a segment, as lower-left corners.
fn segment_cells(a: &[Q; 2], b: &[Q; 2], n: usize, out: &mut impl FnMut(i64, i64)) -> Result<()> {
    let span = n as i64 - 1;
    let (xlo, xhi) = if a[0] <= b[0] {
        (&a[0], &b[0])
    } else {
        (&b[0], &a[0])
    };
    for l1 in ceil_i64(xlo)? - span..=floor_i64(xhi)? {
        let cx_lo = if int(l1) > *xlo { int(l1) } else { xlo.clone() };
        let cx_hi = if int(l1 + span) < *xhi {
            int(l1 + span)
        } else {
            xhi.clone()
        };
        let (ylo, yhi) = if a[0] == b[0] {
            if a[1] <= b[1] {
                (a[1].clone(), b[1].clone())
            } else {
                (b[1].clone(), a[1].clone())
            }
        } else {
            let slope = (&b[1] - &a[1]) / (&b[0] - &a[0]);
            let y0 = &a[1] + &slope * (&cx_lo - &a[0]);
            let y1 = &a[1] + &slope * (&cx_hi - &a[0]);
            if y0 <= y1 {
                (y0, y1)
            } else {
                (y1, y0)
            }
        };
        for l2 in ceil_i64(&ylo)? - span..=floor_i64(&yhi)? {
            out(l1, l2);
        }
    }
    Ok(())
}

struct PolygonCells {
    comps: Vec<BoundaryComponent>,
    cells: HashMap<(i64, i64), u64>,
}

fn polygon_cells(poly: &ExactPolygon, n: usize) -> Result<PolygonCells> {
    let comps = polygon_components(poly, n)?;
    if comps.len() > 64 {
        return Err(DecompositionError::TooManyComponents(comps.len()));
    }
    let mut cells: HashMap<(i64, i64), u64> = HashMap::new();
    for c in &comps {
        let Carrier::Segment { a, b } = &c.carrier else {
            unreachable!()
        };
        segment_cells(a, b, n, &mut |l1, l2| {
            *cells.entry((l1, l2)).or_insert(0) |= 1 << c.index
        })?;
    }
    Ok(PolygonCells { comps, cells })
}

fn check_rv(solid: &Solid, r: f64, v: &[f64]) -> Result<(Q, Vec<Q>)> {
    if !(r.is_finite() && r > 0.0) {
        return Err(DecompositionError::InvalidScale(r));
    }
    if v.len() != solid.dim() || !v.iter().all(|x| x.is_finite()) {
        return Err(DecompositionError::InvalidShift);
    }
    Ok((rational(r), v.iter().map(|&x| rational(x)).collect()))
}

fn report_from_masks<'a>(
    r: f64,
    v: &[f64],
    n: usize,
    components: usize,
    masks: impl Iterator<Item = &'a u64>,
) -> CellReport {
    let mut per_pair = BTreeMap::new();
    let mut per_component = vec![0u64; components];
    for &mask in masks {
        if mask.count_ones() < 2 {
            continue;
        }
        for a in 0..components {
            if mask >> a & 1 == 0 {
                continue;
            }
            per_component[a] += 1;
            for b in a + 1..components {
                if mask >> b & 1 == 1 {
                    *per_pair.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
    }
    CellReport {
        r,
        v: v.to_vec(),
        n,
        nprime: per_pair.values().sum(),
        per_pair,
        per_component,
    }
}

/// Exact count of cells meeting two or more boundary components of
/// `r K + v`, for 2D convex polygons and boxes of any dimension.
pub fn nprime_count(solid: &Solid, r: f64, v: &[f64], n: usize) -> Result<CellReport> {
    let (rq, vq) = check_rv(solid, r, v)?;
    window_pixels(n, solid.dim())?;
    match solid {
        Solid::AxisBox(b) if b.min.len() > 2 => {
            box_nprime(b.min.as_slice(), b.sides.as_slice(), r, v, &rq, &vq, n)
        }
        Solid::AxisBox(_) | Solid::Polytope(_) if solid.dim() == 2 => {
            let poly =
                ExactPolygon::from_solid(solid)?.scaled(&rq, &[vq[0].clone(), vq[1].clone()]);
            let pc = polygon_cells(&poly, n)?;
            Ok(report_from_masks(
                r,
                v,
                n,
                pc.comps.len(),
                pc.cells.values(),
            ))
        }
        _ => Err(DecompositionError::Unsupported(
            "cell counts need a 2D convex polygon or an axis box".into(),
        )),
    }
}

fn box_nprime(
    min: &[f64],
    sides: &[f64],
    r: f64,
    v: &[f64],
    rq: &Q,
    vq: &[Q],
    n: usize,
) -> Result<CellReport> {
    let d = min.len();
    let span = n as i64 - 1;
    let lo: Vec<Q> = (0..d).map(|k| rq * rational(min[k]) + &vq[k]).collect();
    let hi: Vec<Q> = (0..d)
        .map(|k| rq * (rational(min[k]) + rational(sides[k])) + &vq[k])
        .collect();
    let comps = box_components(d, n)?;
    // Cells meeting a facet form a product of index ranges.
    let mut ranges: Vec<Vec<(i64, i64)>> = Vec::new();
    for c in &comps {
        let Carrier::BoxFacet { axis, upper } = c.carrier else {
            unreachable!()
        };
        let mut rg = Vec::with_capacity(d);
        for k in 0..d {
            if k == axis {
                let level = if upper { &hi[k] } else { &lo[k] };
                rg.push((ceil_i64(level)? - span, floor_i64(level)?));
            } else {
                rg.push((ceil_i64(&lo[k])? - span, floor_i64(&hi[k])?));
            }
        }
        ranges.push(rg);
    }
    let mut shared: HashMap<Vec<i64>, u64> = HashMap::new();
    for a in 0..comps.len() {
        for b in a + 1..comps.len() {
            let common: Vec<(i64, i64)> = (0..d)
                .map(|k| {
                    (
                        ranges[a][k].0.max(ranges[b][k].0),
                        ranges[a][k].1.min(ranges[b][k].1),
                    )
                })
                .collect();
            if common.iter().any(|(x, y)| x > y) {
                continue;
            }
            let mut cell: Vec<i64> = common.iter().map(|(x, _)| *x).collect();
            loop {
                *shared.entry(cell.clone()).or_insert(0) |= (1 << a) | (1 << b);
                let mut k = 0;
                while k < d {
                    cell[k] += 1;
                    if cell[k] <= common[k].1 {
                        break;
                    }
                    cell[k] = common[k].0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
    }
    // A cell may meet a third facet that was not part of the pair that
    // inserted it; complete every mask against all facet ranges.
    for (cell, mask) in shared.iter_mut() {
        for (c, rg) in ranges.iter().enumerate() {
            if rg
                .iter()
                .zip(cell.iter())
                .all(|(&(x, y), &l)| x <= l && l <= y)
            {
                *mask |= 1 << c;
            }
        }
    }
    Ok(report_from_masks(r, v, n, comps.len(), shared.values()))
}

/// One instance of the two-sided bound `N - N'_κ <= I <= N + N'_κ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub kappa: usize,
    pub epsilon: usize,
    pub gamma: usize,
    /// Coordinate index, 1-based: the pixel pair is separated along axis
    /// `i` and `I` is the projection onto the hyperplane orthogonal to it.
    pub i: usize,
    pub n_minus: u64,
    pub n_prime: u64,
    pub projection: Q,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Two-sided bound on a sum of half-space configuration counts of one
/// component (window side 2), with the configurations given as prefix
/// lengths of the component's region order.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixCheck {
    pub kappa: usize,
    pub prefixes: Vec<usize>,
    pub i: usize,
    pub count: u64,
    pub n_prime: u64,
    pub projection: Q,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

#[derive(Clone, Debug)]
pub struct PixelBoundsReport {
    pub r: f64,
    pub v: Vec<f64>,
    pub n: usize,
    pub components: Vec<BoundaryComponent>,
    pub checks: Vec<BoundCheck>,
    pub prefix_checks: Vec<PrefixCheck>,
    /// Per component, cells lying on that component alone whose
    /// configuration is not a half-space configuration of its region.
    pub non_halfspace: Vec<u64>,
}

impl PixelBoundsReport {
    pub fn violations(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| !(c.lower_ok && c.upper_ok))
            .count()
            + self
                .prefix_checks
                .iter()
                .filter(|c| !(c.lower_ok && c.upper_ok))
                .count()
    }

    pub fn all_hold(&self) -> bool {
        self.violations() == 0
    }
}

/// Integer half-plane `a x + b y <= c` per edge, for exact lattice-point
/// membership.
struct IntPolygon {
    lines: Vec<(BigInt, BigInt, BigInt)>,
}

impl IntPolygon {
    fn new(poly: &ExactPolygon) -> IntPolygon {
        let lines = poly
            .edges()
            .iter()
            .map(|(a, b)| {
                let na = &b[1] - &a[1];
                let nb = &a[0] - &b[0];
                let c = &na * &a[0] + &nb * &a[1];
                let den = na.denom() * nb.denom() * c.denom();
                let scale = |x: &Q| (x * Q::from_integer(den.clone())).to_integer();
                (scale(&na), scale(&nb), scale(&c))
            })
            .collect();
        IntPolygon { lines }
    }

    fn contains(&self, x: i64, y: i64) -> bool {
        let (x, y) = (BigInt::from(x), BigInt::from(y));
        self.lines.iter().all(|(a, b, c)| a * &x + b * &y <= *c)
    }
}

/// Exact check of the per-component pixel-count bounds on `r P + v` for a
/// convex polygon `P`.
///
/// For every component `κ`, `ε ∈ {0..n-1}`, `γ ∈ {0..n-2}` and axis `i`,
/// counts the cells that meet the boundary only within `κ` and whose two
/// pixels `l + [ε]^i_γ`, `l + [ε]^i_{γ+1}` straddle the boundary, and
/// compares the count with the projection length of the component. For
/// `n = 2` the specialized bounds on half-space configuration counts are
/// checked as well.
pub fn verify_pixel_bounds_2d(
    solid: &Solid,
    r: f64,
    v: &[f64],
    n: usize,
) -> Result<PixelBoundsReport> {
    if solid.dim() != 2 {
        return Err(DecompositionError::Unsupported(
            "pixel bounds are checked for 2D polygons".into(),
        ));
    }
    let (rq, vq) = check_rv(solid, r, v)?;
    window_pixels(n, 2)?;
    if n < 2 {
        return Err(DecompositionError::Unsupported(
            "window side must be at least 2".into(),
        ));
    }
    let poly = ExactPolygon::from_solid(solid)?.scaled(&rq, &[vq[0].clone(), vq[1].clone()]);
    let pc = polygon_cells(&poly, n)?;
    let ip = IntPolygon::new(&poly);
    let span = n as i64 - 1;
    let comps = &pc.comps;
    let mut inside: HashMap<(i64, i64), bool> = HashMap::new();
    let mut is_in = |x: i64, y: i64| *inside.entry((x, y)).or_insert_with(|| ip.contains(x, y));

    // Cells meeting the boundary only within a single component, with
    // their configuration codes.
    let mut clean: Vec<Vec<((i64, i64), u64)>> = vec![Vec::new(); comps.len()];
    let mut nprime_k = vec![0u64; comps.len()];
    let mut keys: Vec<&(i64, i64)> = pc.cells.keys().collect();
    keys.sort();
    for &(l1, l2) in keys {
        let mask = pc.cells[&(l1, l2)];
        let lo = [int(l1), int(l2)];
        let hi = [int(l1 + span), int(l2 + span)];
        for (k, comp) in comps.iter().enumerate() {
            if mask >> k & 1 == 0 {
                continue;
            }
            if mask.count_ones() >= 2 {
                nprime_k[k] += 1;
            }
            let Carrier::Segment { a: ka, b: kb } = &comp.carrier else {
                unreachable!()
            };
            let only_k = comps.iter().enumerate().all(|(m, other)| {
                if m == k || mask >> m & 1 == 0 {
                    return true;
                }
                let Carrier::Segment { a, b } = &other.carrier else {
                    unreachable!()
                };
                match clip_segment(a, b, &lo, &hi) {
                    None => true,
                    Some((p, q)) => p == q && (p == *ka || p == *kb),
                }
            });
            if only_k {
                let mut code = 0u64;
                for (p, x) in window_offsets(n, 2).iter().enumerate() {
                    if is_in(l1 + x[0] as i64, l2 + x[1] as i64) {
                        code |= 1 << p;
                    }
                }
                clean[k].push(((l1, l2), code));
            }
        }
    }

    let mut checks = Vec::new();
    let mut prefix_checks = Vec::new();
    let mut non_halfspace = Vec::new();
    let pixels = n * n;
    for (k, comp) in comps.iter().enumerate() {
        let Carrier::Segment { a, b } = &comp.carrier else {
            unreachable!()
        };
        // I_1 projects onto the y-axis, I_2 onto the x-axis.
        let proj = [(&b[1] - &a[1]).abs(), (&b[0] - &a[0]).abs()];
        let bit = |code: u64, x: usize, y: usize| code >> (x + n * y) & 1 == 1;
        for i in 1..=2 {
            for eps in 0..n {
                for gamma in 0..n - 1 {
                    let count = clean[k]
                        .iter()
                        .filter(|(_, code)| {
                            let (p, q) = if i == 1 {
                                (bit(*code, gamma, eps), bit(*code, gamma + 1, eps))
                            } else {
                                (bit(*code, eps, gamma), bit(*code, eps, gamma + 1))
                            };
                            p != q
                        })
                        .count() as u64;
                    let projection = proj[i - 1].clone();
                    checks.push(BoundCheck {
                        kappa: k,
                        epsilon: eps,
                        gamma,
                        i,
                        n_minus: count,
                        n_prime: nprime_k[k],
                        lower_ok: int(count as i64 - nprime_k[k] as i64) <= projection,
                        upper_ok: projection <= int((count + nprime_k[k]) as i64),
                        projection,
                    });
                }
            }
        }
        let prefixes: HashSet<u64> = (0..=pixels).map(|m| comp.region.prefix_code(m)).collect();
        non_halfspace.push(
            clean[k]
                .iter()
                .filter(|(_, code)| !prefixes.contains(code))
                .count() as u64,
        );
        if n == 2 {
            let count_prefix = |m: usize| {
                let code = comp.region.prefix_code(m);
                clean[k].iter().filter(|(_, c)| *c == code).count() as u64
            };
            let offsets = window_offsets(2, 2);
            let (first, second) = (
                &offsets[comp.region.order[0]],
                &offsets[comp.region.order[1]],
            );
            // Axis along which the first two pixels of the order differ.
            let step_axis = if first[0] != second[0] { 0 } else { 1 };
            let i_step = step_axis + 1;
            let i_other = 2 - step_axis;
            for (sum, i) in [
                (vec![3], i_step),
                (vec![1], i_step),
                (vec![3, 2], i_other),
                (vec![1, 2], i_other),
            ] {
                let count: u64 = sum.iter().map(|&m| count_prefix(m)).sum();
                let projection = proj[i - 1].clone();
                prefix_checks.push(PrefixCheck {
                    kappa: k,
                    prefixes: sum,
                    i,
                    count,
                    n_prime: nprime_k[k],
                    lower_ok: int(count as i64 - nprime_k[k] as i64) <= projection,
                    upper_ok: projection <= int((count + nprime_k[k]) as i64),
                    projection,
                });
            }
        }
    }
    Ok(PixelBoundsReport {
        r,
        v: v.to_vec(),
        n,
        components: pc.comps,
        checks,
        prefix_checks,
        non_halfspace,
    })
}
