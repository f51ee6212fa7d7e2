//! Solids with exact closed-set membership and analytic reference values.

use crate::exact::{affine_sign, power_sign, sphere_sign};
use serde::Deserialize;
use std::cmp::Ordering;
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: solid has d={expected}, point has {got} coordinates")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid solid: {0}")]
    Invalid(String),
    #[error("no analytic reference for {0}")]
    NoAnalyticReference(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("cannot parse shape `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
    #[error("cannot read polytope file {path}: {reason}")]
    File { path: String, reason: String },
}

type Result<T> = std::result::Result<T, GeometryError>;

/// A half-space `<normal, x> <= offset` with unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// A facet of a polytope.
#[derive(Clone, Debug)]
pub struct Face {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub area: f64,
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub struct AxisBox {
    pub min: Vec<f64>,
    pub sides: Vec<f64>,
}

/// Bounded convex polytope with nonempty interior, `d` in {2, 3}.
///
/// Membership is decided on the constraints as given (`raw`), so a polytope
/// built from exactly representable data has exact membership. The unit
/// normals in `halfspaces` are the normalized view of the same constraints.
#[derive(Clone, Debug)]
pub struct Polytope {
    d: usize,
    raw: Vec<(Vec<f64>, f64)>,
    halfspaces: Vec<HalfSpace>,
    vertices: Vec<Vec<f64>>,
}

/// `{|x|^k <= y <= 1} ∪ [-1,1] x [-1,0]` in the plane.
#[derive(Clone, Debug)]
pub struct Cusp {
    pub k: u32,
}

/// Closure of the union of the positive parts minus the negative parts.
#[derive(Clone, Debug)]
pub struct Csg {
    pub positive: Vec<Solid>,
    pub negative: Vec<Solid>,
}

#[derive(Clone, Debug)]
pub enum Solid {
    Ball(Ball),
    AxisBox(AxisBox),
    Polytope(Polytope),
    Cusp(Cusp),
    Csg(Csg),
}

/// Intersection of a solid with a line parallel to axis 0, in terms of the
/// axis-0 coordinate. Floating-point approximation only; exact membership
/// is settled by [`Solid::contains_unchecked`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RowSpan {
    Empty,
    Interval(f64, f64),
    /// Not known to be an interval; every point must be tested.
    Scan,
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::Invalid(format!(
            "{what} has non-finite coordinates"
        )))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl Solid {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Solid> {
        check_finite(&center, "ball center")?;
        if center.is_empty() {
            return Err(GeometryError::Invalid("ball needs d >= 1".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::Invalid(format!(
                "ball radius must be > 0, got {radius}"
            )));
        }
        Ok(Solid::Ball(Ball { center, radius }))
    }

    pub fn axis_box(min: Vec<f64>, sides: Vec<f64>) -> Result<Solid> {
        check_finite(&min, "box corner")?;
        check_finite(&sides, "box sides")?;
        if min.is_empty() || min.len() != sides.len() {
            return Err(GeometryError::Invalid(
                "box corner and sides must have equal length d >= 1".into(),
            ));
        }
        if sides.iter().any(|&s| s <= 0.0) {
            return Err(GeometryError::Invalid(
                "box side lengths must be > 0".into(),
            ));
        }
        Ok(Solid::AxisBox(AxisBox { min, sides }))
    }

    /// Polytope `{x : <a_i, x> <= c_i}`. Normals need not be unit length.
    pub fn polytope(constraints: Vec<(Vec<f64>, f64)>) -> Result<Solid> {
        Polytope::new(constraints).map(Solid::Polytope)
    }

    /// Convex hull of a finite point set.
    pub fn polytope_from_vertices(points: &[Vec<f64>]) -> Result<Solid> {
        let constraints = hull_constraints(points)?;
        Solid::polytope(constraints)
    }

    pub fn cusp(k: u32) -> Result<Solid> {
        if k < 2 {
            return Err(GeometryError::Invalid(format!(
                "cusp exponent must be >= 2, got {k}"
            )));
        }
        Ok(Solid::Cusp(Cusp { k }))
    }

    pub fn csg(positive: Vec<Solid>, negative: Vec<Solid>) -> Result<Solid> {
        if positive.is_empty() {
            return Err(GeometryError::Invalid(
                "CSG body needs at least one positive part".into(),
            ));
        }
        let d = positive[0].dim();
        for part in positive.iter().chain(&negative) {
            match part {
                Solid::Ball(_) | Solid::AxisBox(_) | Solid::Polytope(_) => {}
                _ => {
                    return Err(GeometryError::Invalid(
                        "CSG parts must be convex solids".into(),
                    ))
                }
            }
            if part.dim() != d {
                return Err(GeometryError::Invalid(
                    "CSG parts must share one dimension".into(),
                ));
            }
        }
        Ok(Solid::Csg(Csg { positive, negative }))
    }

    /// The skewed parallelepiped with base vertices (0,0), (1,-1), (-1,2),
    /// (0,1) and height 1.
    pub fn parallelepiped() -> Solid {
        let mut pts = Vec::new();
        for z in [0.0, 1.0] {
            for (x, y) in [(0.0, 0.0), (1.0, -1.0), (-1.0, 2.0), (0.0, 1.0)] {
                pts.push(vec![x, y, z]);
            }
        }
        Solid::polytope_from_vertices(&pts).expect("preset parallelepiped is valid")
    }

    pub fn dim(&self) -> usize {
        match self {
            Solid::Ball(b) => b.center.len(),
            Solid::AxisBox(b) => b.min.len(),
            Solid::Polytope(p) => p.d,
            Solid::Cusp(_) => 2,
            Solid::Csg(c) => c.positive[0].dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        check_finite(x, "point")?;
        Ok(self.contains_unchecked(x))
    }

    /// Closed-set membership without dimension checks.
    pub fn contains_unchecked(&self, x: &[f64]) -> bool {
        match self {
            Solid::Ball(b) => sphere_sign(&b.center, x, b.radius) != Ordering::Greater,
            Solid::AxisBox(b) => b.min.iter().zip(&b.sides).zip(x).all(|((&m, &s), &xi)| {
                xi >= m && affine_sign(&[1.0, -1.0], &[xi, m], s) != Ordering::Greater
            }),
            Solid::Polytope(p) => p
                .raw
                .iter()
                .all(|(a, c)| affine_sign(a, x, *c) != Ordering::Greater),
            Solid::Cusp(c) => {
                let (u, v) = (x[0], x[1]);
                let lower = (-1.0..=1.0).contains(&u) && (-1.0..=0.0).contains(&v);
                lower || (v <= 1.0 && power_sign(u, c.k, v) != Ordering::Greater)
            }
            Solid::Csg(c) => {
                c.positive.iter().any(|s| s.contains_unchecked(x))
                    && !c.negative.iter().any(|s| s.interior_contains(x))
            }
        }
    }

    /// Strict interior membership for the convex variants.
    fn interior_contains(&self, x: &[f64]) -> bool {
        match self {
            Solid::Ball(b) => sphere_sign(&b.center, x, b.radius) == Ordering::Less,
            Solid::AxisBox(b) => b.min.iter().zip(&b.sides).zip(x).all(|((&m, &s), &xi)| {
                xi > m && affine_sign(&[1.0, -1.0], &[xi, m], s) == Ordering::Less
            }),
            Solid::Polytope(p) => p
                .raw
                .iter()
                .all(|(a, c)| affine_sign(a, x, *c) == Ordering::Less),
            _ => unreachable!("CSG parts are convex"),
        }
    }

    pub fn surface_area(&self) -> Result<f64> {
        match self {
            Solid::Ball(b) => {
                let d = b.center.len();
                Ok(sphere_area(d) * b.radius.powi(d as i32 - 1))
            }
            Solid::AxisBox(b) => {
                if b.sides.len() == 1 {
                    return Ok(2.0);
                }
                let mut total = 0.0;
                for k in 0..b.sides.len() {
                    let prod: f64 = b
                        .sides
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != k)
                        .map(|(_, s)| s)
                        .product();
                    total += 2.0 * prod;
                }
                Ok(total)
            }
            Solid::Polytope(p) => Ok(p.faces().iter().map(|f| f.area).sum()),
            Solid::Cusp(_) => Err(GeometryError::NoAnalyticReference("cusp union")),
            Solid::Csg(_) => Err(GeometryError::NoAnalyticReference("CSG body")),
        }
    }

    /// Facets with exterior unit normals and areas.
    pub fn faces(&self) -> Result<Vec<Face>> {
        match self {
            Solid::AxisBox(b) => Ok(box_faces(b)),
            Solid::Polytope(p) => Ok(p.faces()),
            _ => Err(GeometryError::Unsupported(
                "faces exist only for polytopes and boxes".into(),
            )),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Solid::Ball(b) => (
                b.center.iter().map(|c| c - b.radius).collect(),
                b.center.iter().map(|c| c + b.radius).collect(),
            ),
            Solid::AxisBox(b) => (
                b.min.clone(),
                b.min.iter().zip(&b.sides).map(|(m, s)| m + s).collect(),
            ),
            Solid::Polytope(p) => {
                let mut lo = vec![f64::INFINITY; p.d];
                let mut hi = vec![f64::NEG_INFINITY; p.d];
                for v in &p.vertices {
                    for k in 0..p.d {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Solid::Cusp(_) => (vec![-1.0, -1.0], vec![1.0, 1.0]),
            Solid::Csg(c) => {
                let d = self.dim();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for part in &c.positive {
                    let (l, h) = part.bounding_box();
                    for k in 0..d {
                        lo[k] = lo[k].min(l[k]);
                        hi[k] = hi[k].max(h[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Approximate intersection with the line `{(s, rest) : s real}`.
    pub fn row_span(&self, rest: &[f64]) -> RowSpan {
        match self {
            Solid::Ball(b) => {
                let mut r2 = b.radius * b.radius;
                for (c, x) in b.center[1..].iter().zip(rest) {
                    r2 -= (x - c) * (x - c);
                }
                if r2 < -1e-9 * b.radius * b.radius {
                    RowSpan::Empty
                } else {
                    let h = r2.max(0.0).sqrt();
                    RowSpan::Interval(b.center[0] - h, b.center[0] + h)
                }
            }
            Solid::AxisBox(b) => {
                let inside =
                    b.min[1..]
                        .iter()
                        .zip(&b.sides[1..])
                        .zip(rest)
                        .all(|((&m, &s), &x)| {
                            x >= m && affine_sign(&[1.0, -1.0], &[x, m], s) != Ordering::Greater
                        });
                if inside {
                    RowSpan::Interval(b.min[0], b.min[0] + b.sides[0])
                } else {
                    RowSpan::Empty
                }
            }
            Solid::Polytope(p) => {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for (a, c) in &p.raw {
                    let rhs = c - dot(&a[1..], rest);
                    if a[0] > 0.0 {
                        hi = hi.min(rhs / a[0]);
                    } else if a[0] < 0.0 {
                        lo = lo.max(rhs / a[0]);
                    } else {
                        // Only a clearly violated constraint empties the row;
                        // near zero the exact refinement decides.
                        let scale = c.abs()
                            + a[1..]
                                .iter()
                                .zip(rest)
                                .map(|(ak, xk)| (ak * xk).abs())
                                .sum::<f64>();
                        if rhs < -1e-9 * (1.0 + scale) {
                            return RowSpan::Empty;
                        }
                    }
                }
                if lo > hi {
                    RowSpan::Empty
                } else {
                    RowSpan::Interval(lo, hi)
                }
            }
            Solid::Cusp(c) => {
                let y = rest[0];
                if (-1.0..=0.0).contains(&y) {
                    RowSpan::Interval(-1.0, 1.0)
                } else if y > 0.0 && y <= 1.0 {
                    let h = y.powf(1.0 / c.k as f64);
                    RowSpan::Interval(-h, h)
                } else {
                    RowSpan::Empty
                }
            }
            Solid::Csg(_) => RowSpan::Scan,
        }
    }

    /// The image of the solid under `x -> x + by`.
    pub fn translated(&self, by: &[f64]) -> Result<Solid> {
        if by.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: by.len(),
            });
        }
        match self {
            Solid::Ball(b) => Solid::ball(
                b.center.iter().zip(by).map(|(c, v)| c + v).collect(),
                b.radius,
            ),
            Solid::AxisBox(b) => Solid::axis_box(
                b.min.iter().zip(by).map(|(c, v)| c + v).collect(),
                b.sides.clone(),
            ),
            Solid::Polytope(p) => Solid::polytope(
                p.raw
                    .iter()
                    .map(|(a, c)| (a.clone(), c + dot(a, by)))
                    .collect(),
            ),
            Solid::Cusp(_) => Err(GeometryError::Unsupported(
                "the cusp union is fixed at the origin".into(),
            )),
            Solid::Csg(c) => Solid::csg(
                c.positive
                    .iter()
                    .map(|s| s.translated(by))
                    .collect::<Result<_>>()?,
                c.negative
                    .iter()
                    .map(|s| s.translated(by))
                    .collect::<Result<_>>()?,
            ),
        }
    }

    /// The image of the solid under `x -> r x`.
    pub fn scaled(&self, r: f64) -> Result<Solid> {
        if !(r.is_finite() && r > 0.0) {
            return Err(GeometryError::Invalid(format!(
                "scale must be > 0, got {r}"
            )));
        }
        match self {
            Solid::Ball(b) => Solid::ball(b.center.iter().map(|c| c * r).collect(), b.radius * r),
            Solid::AxisBox(b) => Solid::axis_box(
                b.min.iter().map(|c| c * r).collect(),
                b.sides.iter().map(|s| s * r).collect(),
            ),
            Solid::Polytope(p) => {
                Solid::polytope(p.raw.iter().map(|(a, c)| (a.clone(), c * r)).collect())
            }
            Solid::Cusp(_) => Err(GeometryError::Unsupported(
                "the cusp union has fixed size".into(),
            )),
            Solid::Csg(c) => Solid::csg(
                c.positive
                    .iter()
                    .map(|s| s.scaled(r))
                    .collect::<Result<_>>()?,
                c.negative
                    .iter()
                    .map(|s| s.scaled(r))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

/// (d-1)-measure of the unit sphere in R^d.
fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI * sphere_area(d - 2) / (d as f64 - 2.0),
    }
}

fn box_faces(b: &AxisBox) -> Vec<Face> {
    let d = b.min.len();
    let mut faces = Vec::with_capacity(2 * d);
    for k in 0..d {
        let area: f64 = b
            .sides
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, s)| s)
            .product();
        for sign in [-1.0, 1.0] {
            let mut normal = vec![0.0; d];
            normal[k] = sign;
            let level = if sign > 0.0 {
                b.min[k] + b.sides[k]
            } else {
                b.min[k]
            };
            let others: Vec<usize> = (0..d).filter(|&i| i != k).collect();
            let mut vertices = Vec::new();
            for mask in 0..(1usize << others.len()) {
                let mut v = b.min.clone();
                v[k] = level;
                for (bit, &i) in others.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        v[i] += b.sides[i];
                    }
                }
                vertices.push(v);
            }
            faces.push(Face {
                normal,
                offset: sign * level,
                area,
                vertices,
            });
        }
    }
    faces
}

impl Polytope {
    pub fn new(constraints: Vec<(Vec<f64>, f64)>) -> Result<Polytope> {
        let d = constraints.first().map(|(a, _)| a.len()).unwrap_or(0);
        if !(d == 2 || d == 3) {
            return Err(GeometryError::Unsupported(
                "polytopes are supported in d = 2 and d = 3".into(),
            ));
        }
        let mut halfspaces = Vec::with_capacity(constraints.len());
        for (a, c) in &constraints {
            if a.len() != d {
                return Err(GeometryError::Invalid(
                    "half-space normals differ in dimension".into(),
                ));
            }
            check_finite(a, "half-space normal")?;
            if !c.is_finite() {
                return Err(GeometryError::Invalid(
                    "half-space offset is not finite".into(),
                ));
            }
            let len = norm(a);
            if len == 0.0 {
                return Err(GeometryError::Invalid("half-space normal is zero".into()));
            }
            halfspaces.push(HalfSpace {
                normal: a.iter().map(|x| x / len).collect(),
                offset: c / len,
            });
        }
        if !bounded(&halfspaces, d) {
            return Err(GeometryError::Invalid("polytope is unbounded".into()));
        }
        let vertices = enumerate_vertices(&halfspaces, d);
        if vertices.len() < d + 1 {
            return Err(GeometryError::Invalid("polytope has empty interior".into()));
        }
        let centroid: Vec<f64> = (0..d)
            .map(|k| vertices.iter().map(|v| v[k]).sum::<f64>() / vertices.len() as f64)
            .collect();
        let scale = vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(1.0f64, |m, x| m.max(x.abs()));
        for h in &halfspaces {
            if dot(&h.normal, &centroid) - h.offset > -1e-9 * scale {
                return Err(GeometryError::Invalid("polytope has empty interior".into()));
            }
        }
        Ok(Polytope {
            d,
            raw: constraints,
            halfspaces,
            vertices,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Constraints `(a, c)` exactly as supplied, meaning `<a, x> <= c`.
    pub fn constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.raw
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    fn faces(&self) -> Vec<Face> {
        let scale = self
            .vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(1.0f64, |m, x| m.max(x.abs()));
        let tol = 1e-9 * scale;
        let mut faces: Vec<Face> = Vec::new();
        for h in &self.halfspaces {
            let duplicate = faces.iter().any(|f| {
                (f.offset - h.offset).abs() <= tol
                    && sub(&f.normal, &h.normal).iter().all(|x| x.abs() <= 1e-12)
            });
            if duplicate {
                continue;
            }
            let on: Vec<&Vec<f64>> = self
                .vertices
                .iter()
                .filter(|v| (dot(&h.normal, v) - h.offset).abs() <= tol)
                .collect();
            if on.len() < self.d {
                continue;
            }
            let (area, vertices) = if self.d == 2 {
                let dir = [-h.normal[1], h.normal[0]];
                let lo = on
                    .iter()
                    .min_by(|a, b| dot(&dir, a).total_cmp(&dot(&dir, b)))
                    .unwrap();
                let hi = on
                    .iter()
                    .max_by(|a, b| dot(&dir, a).total_cmp(&dot(&dir, b)))
                    .unwrap();
                (norm(&sub(hi, lo)), vec![(*lo).clone(), (*hi).clone()])
            } else {
                planar_polygon(&h.normal, &on)
            };
            if area > tol * tol {
                faces.push(Face {
                    normal: h.normal.clone(),
                    offset: h.offset,
                    area,
                    vertices,
                });
            }
        }
        faces
    }
}

/// Orders coplanar points counterclockwise around `normal` and returns the
/// polygon area with the ordered vertices.
fn planar_polygon(normal: &[f64], pts: &[&Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
    let n = pts.len() as f64;
    let c: Vec<f64> = (0..3)
        .map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / n)
        .collect();
    let helper = if normal[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = cross(normal, &helper);
    let len = norm(&e1);
    let e1: Vec<f64> = e1.iter().map(|x| x / len).collect();
    let e2 = cross(normal, &e1);
    let mut ordered: Vec<(f64, Vec<f64>)> = pts
        .iter()
        .map(|p| {
            let q = sub(p, &c);
            (dot(&q, &e2).atan2(dot(&q, &e1)), (*p).clone())
        })
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let verts: Vec<Vec<f64>> = ordered.into_iter().map(|(_, p)| p).collect();
    let mut acc = [0.0; 3];
    for i in 0..verts.len() {
        let a = sub(&verts[i], &c);
        let b = sub(&verts[(i + 1) % verts.len()], &c);
        let x = cross(&a, &b);
        for k in 0..3 {
            acc[k] += x[k];
        }
    }
    (0.5 * dot(&acc, normal).abs(), verts)
}

/// True when the recession cone `{y : <a_i, y> <= 0}` is trivial.
fn bounded(hs: &[HalfSpace], d: usize) -> bool {
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if d == 2 {
        for h in hs {
            candidates.push(vec![-h.normal[1], h.normal[0]]);
        }
        if hs.len() < 3 {
            return false;
        }
    } else {
        // A pointed nontrivial cone has an extreme ray on two independent
        // constraint planes; a non-pointed one forces rank < 3.
        let rank_full = hs.iter().any(|a| {
            hs.iter().any(|b| {
                hs.iter()
                    .any(|c| dot(&cross(&a.normal, &b.normal), &c.normal).abs() > 1e-12)
            })
        });
        if !rank_full {
            return false;
        }
        for (i, a) in hs.iter().enumerate() {
            for b in &hs[i + 1..] {
                let y = cross(&a.normal, &b.normal);
                if norm(&y) > 1e-12 {
                    candidates.push(y.to_vec());
                }
            }
        }
    }
    for y in candidates {
        for sign in [1.0, -1.0] {
            let y: Vec<f64> = y.iter().map(|v| v * sign).collect();
            let ny = norm(&y);
            if hs.iter().all(|h| dot(&h.normal, &y) <= 1e-12 * ny) {
                return false;
            }
        }
    }
    true
}

fn enumerate_vertices(hs: &[HalfSpace], d: usize) -> Vec<Vec<f64>> {
    let scale = hs.iter().fold(1.0f64, |m, h| m.max(h.offset.abs()));
    let tol = 1e-9 * scale;
    let feasible = |x: &[f64]| hs.iter().all(|h| dot(&h.normal, x) - h.offset <= tol);
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut push = |x: Vec<f64>| {
        if !out
            .iter()
            .any(|v| sub(v, &x).iter().all(|e| e.abs() <= tol))
        {
            out.push(x);
        }
    };
    let m = hs.len();
    if d == 2 {
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (&hs[i].normal, &hs[j].normal);
                let det = a[0] * b[1] - a[1] * b[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = vec![
                    (hs[i].offset * b[1] - a[1] * hs[j].offset) / det,
                    (a[0] * hs[j].offset - hs[i].offset * b[0]) / det,
                ];
                if feasible(&x) {
                    push(x);
                }
            }
        }
    } else {
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let (a, b, c) = (&hs[i].normal, &hs[j].normal, &hs[k].normal);
                    let bc = cross(b, c);
                    let det = dot(a, &bc);
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let ca = cross(c, a);
                    let ab = cross(a, b);
                    let x: Vec<f64> = (0..3)
                        .map(|q| {
                            (hs[i].offset * bc[q] + hs[j].offset * ca[q] + hs[k].offset * ab[q])
                                / det
                        })
                        .collect();
                    if feasible(&x) {
                        push(x);
                    }
                }
            }
        }
    }
    out
}

/// Facet constraints `(a, c)` of the convex hull of `points`. Normals are
/// raw cross products, so integer input yields exact constraints.
fn hull_constraints(points: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, f64)>> {
    let d = points.first().map(|p| p.len()).unwrap_or(0);
    for p in points {
        if p.len() != d {
            return Err(GeometryError::Invalid(
                "vertices differ in dimension".into(),
            ));
        }
        check_finite(p, "vertex")?;
    }
    match d {
        2 => {
            let mut pts: Vec<&Vec<f64>> = points.iter().collect();
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            pts.dedup();
            let turn = |o: &Vec<f64>, a: &Vec<f64>, b: &Vec<f64>| {
                (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
            };
            let mut hull: Vec<&Vec<f64>> = Vec::new();
            for pass in 0..2 {
                let start = hull.len();
                let iter: Box<dyn Iterator<Item = &&Vec<f64>>> = if pass == 0 {
                    Box::new(pts.iter())
                } else {
                    Box::new(pts.iter().rev())
                };
                for p in iter {
                    while hull.len() >= start + 2
                        && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
                    {
                        hull.pop();
                    }
                    hull.push(p);
                }
                hull.pop();
            }
            if hull.len() < 3 {
                return Err(GeometryError::Invalid("vertices span no interior".into()));
            }
            Ok((0..hull.len())
                .map(|i| {
                    let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
                    let normal = vec![b[1] - a[1], a[0] - b[0]];
                    let offset = normal[0] * a[0] + normal[1] * a[1];
                    (normal, offset)
                })
                .collect())
        }
        3 => {
            let m = points.len();
            let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        let n = cross(&sub(&points[j], &points[i]), &sub(&points[k], &points[i]));
                        if n == [0.0; 3] {
                            continue;
                        }
                        let c = dot(&n, &points[i]);
                        let side: Vec<Ordering> =
                            points.iter().map(|p| affine_sign(&n, p, c)).collect();
                        let (a, c) = if side.iter().all(|s| *s != Ordering::Greater) {
                            (n.to_vec(), c)
                        } else if side.iter().all(|s| *s != Ordering::Less) {
                            (n.iter().map(|x| -x).collect(), -c)
                        } else {
                            continue;
                        };
                        let ln = norm(&a);
                        let same = out.iter().any(|(b, e)| {
                            let lb = norm(b);
                            sub(
                                &a.iter().map(|x| x / ln).collect::<Vec<_>>(),
                                &b.iter().map(|x| x / lb).collect::<Vec<_>>(),
                            )
                            .iter()
                            .all(|x| x.abs() <= 1e-12)
                                && (c / ln - e / lb).abs() <= 1e-12 * (1.0 + (c / ln).abs())
                        });
                        if !same {
                            out.push((a, c));
                        }
                    }
                }
            }
            if out.len() < 4 {
                return Err(GeometryError::Invalid("vertices span no interior".into()));
            }
            Ok(out)
        }
        _ => Err(GeometryError::Unsupported(
            "polytopes are supported in d = 2 and d = 3".into(),
        )),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeFile {
    halfspaces: Option<Vec<HalfSpaceEntry>>,
    vertices: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HalfSpaceEntry {
    normal: Vec<f64>,
    offset: f64,
}

/// Reads `{"halfspaces": [{"normal": [..], "offset": c}, ..]}` or
/// `{"vertices": [[..], ..]}`.
pub fn polytope_from_json(text: &str) -> Result<Solid> {
    let invalid = |reason: String| GeometryError::Invalid(reason);
    let file: PolytopeFile =
        serde_json::from_str(text).map_err(|e| invalid(format!("polytope JSON: {e}")))?;
    match (file.halfspaces, file.vertices) {
        (Some(hs), None) => Solid::polytope(hs.into_iter().map(|h| (h.normal, h.offset)).collect()),
        (None, Some(vs)) => Solid::polytope_from_vertices(&vs),
        _ => Err(invalid(
            "polytope JSON needs exactly one of `halfspaces`, `vertices`".into(),
        )),
    }
}

/// Parses `ball:r=1[,d=3][,c=x;y;z]`, `box:0.5,1,1`, `poly:FILE`,
/// `cusp:k=2` and `preset:parallelepiped`.
pub fn parse_shape(spec: &str) -> Result<Solid> {
    let err = |reason: &str| GeometryError::Parse {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| err("expected KIND:ARGS"))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| err(&format!("`{s}` is not a number")))
    };
    match kind {
        "ball" => {
            let (mut r, mut d, mut center) = (None, 3usize, None);
            for kv in args.split(',') {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| err("ball arguments are key=value"))?;
                match k.trim() {
                    "r" => r = Some(num(v)?),
                    "d" => {
                        d = v
                            .trim()
                            .parse()
                            .map_err(|_| err("d must be a positive integer"))?
                    }
                    "c" => center = Some(v.split(';').map(num).collect::<Result<Vec<f64>>>()?),
                    other => return Err(err(&format!("unknown ball key `{other}`"))),
                }
            }
            let r = r.ok_or_else(|| err("ball needs r="))?;
            let center = center.unwrap_or_else(|| vec![0.0; d]);
            Solid::ball(center, r)
        }
        "box" => {
            let sides = args.split(',').map(num).collect::<Result<Vec<f64>>>()?;
            Solid::axis_box(vec![0.0; sides.len()], sides)
        }
        "poly" => {
            let text =
                std::fs::read_to_string(Path::new(args)).map_err(|e| GeometryError::File {
                    path: args.to_string(),
                    reason: e.to_string(),
                })?;
            polytope_from_json(&text)
        }
        "cusp" => {
            let k = args
                .strip_prefix("k=")
                .and_then(|v| v.trim().parse::<u32>().ok())
                .ok_or_else(|| err("cusp needs k=INTEGER"))?;
            Solid::cusp(k)
        }
        "preset" => match args {
            "parallelepiped" => Ok(Solid::parallelepiped()),
            other => Err(err(&format!("unknown preset `{other}`"))),
        },
        other => Err(err(&format!("unknown shape kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Solid {
        Solid::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn closed_square_contains_corner() {
        assert!(unit_square().contains(&[1.0, 1.0]).unwrap());
        assert!(!unit_square().contains(&[1.0, 1.0000000000000002]).unwrap());
    }

    #[test]
    fn ball_excludes_point_just_outside() {
        let b = Solid::ball(vec![0.0; 3], 1.0).unwrap();
        assert!(!b.contains(&[0.0, 0.0, 1.0000001]).unwrap());
        assert!(b.contains(&[0.0, 0.0, 1.0]).unwrap());
    }

    #[test]
    fn cusp_membership() {
        let c = Solid::cusp(2).unwrap();
        assert!(c.contains(&[0.5, 0.25]).unwrap());
        assert!(!c.contains(&[0.5, 0.24]).unwrap());
        assert!(c.contains(&[-1.0, -1.0]).unwrap());
        assert!(!c.contains(&[0.0, 1.01]).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            unit_square().contains(&[0.0, 0.0, 0.0]),
            Err(GeometryError::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn reference_areas() {
        assert_eq!(unit_square().surface_area().unwrap(), 4.0);
        let b = Solid::ball(vec![0.0; 3], 1.0).unwrap();
        assert!((b.surface_area().unwrap() - 4.0 * PI).abs() < 1e-15);
        let cuboid = parse_shape("box:0.5,1,1").unwrap();
        assert_eq!(cuboid.surface_area().unwrap(), 4.0);
        assert!(matches!(
            Solid::cusp(2).unwrap().surface_area(),
            Err(GeometryError::NoAnalyticReference(_))
        ));
    }

    #[test]
    fn cuboid_face_areas() {
        let cuboid = parse_shape("box:0.5,1,1").unwrap();
        let mut areas: Vec<f64> = cuboid.faces().unwrap().iter().map(|f| f.area).collect();
        areas.sort_by(f64::total_cmp);
        assert_eq!(areas, vec![0.5, 0.5, 0.5, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn unbounded_and_flat_polytopes_rejected() {
        let strip = vec![
            (vec![0.0, 1.0], 1.0),
            (vec![0.0, -1.0], 0.0),
            (vec![1.0, 0.0], 1.0),
        ];
        assert!(Solid::polytope(strip).is_err());
        let flat = vec![
            (vec![1.0, 0.0], 0.0),
            (vec![-1.0, 0.0], 0.0),
            (vec![0.0, 1.0], 1.0),
            (vec![0.0, -1.0], 0.0),
        ];
        assert!(Solid::polytope(flat).is_err());
        let open_cube = vec![
            (vec![1.0, 0.0, 0.0], 1.0),
            (vec![-1.0, 0.0, 0.0], 0.0),
            (vec![0.0, 1.0, 0.0], 1.0),
            (vec![0.0, -1.0, 0.0], 0.0),
            (vec![0.0, 0.0, 1.0], 1.0),
        ];
        assert!(Solid::polytope(open_cube).is_err());
    }

    #[test]
    fn shape_parsing() {
        assert_eq!(parse_shape("ball:r=1").unwrap().dim(), 3);
        assert_eq!(parse_shape("ball:r=2,d=2").unwrap().dim(), 2);
        assert!(parse_shape("ball:r=0").is_err());
        assert!(parse_shape("torus:r=1").is_err());
        assert!(parse_shape("cusp:k=1").is_err());
        assert_eq!(parse_shape("preset:parallelepiped").unwrap().dim(), 3);
    }

    #[test]
    fn row_span_of_ball() {
        let b = Solid::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(b.row_span(&[0.0]), RowSpan::Interval(-1.0, 1.0));
        assert_eq!(b.row_span(&[1.5]), RowSpan::Empty);
    }

    #[test]
    fn csg_removes_open_interior() {
        let outer = Solid::axis_box(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        let hole = Solid::ball(vec![1.0, 1.0], 0.5).unwrap();
        let body = Solid::csg(vec![outer], vec![hole]).unwrap();
        assert!(!body.contains(&[1.0, 1.0]).unwrap());
        assert!(body.contains(&[1.5, 1.0]).unwrap());
        assert!(body.contains(&[0.1, 0.1]).unwrap());
    }
}
