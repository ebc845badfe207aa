//! Computational domains: containment predicates, parametric boundaries and
//! analytic outward normals for every supported shape.

use std::f64::consts::{FRAC_PI_3, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{config, input, Error, Result};
use crate::point::{self, Point};

/// Closed-form shape descriptions. Coordinates are in domain units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Interval { a: f64, b: f64 },
    Disc { center: [f64; 2], radius: f64 },
    Ball { center: [f64; 3], radius: f64 },
    Annulus { center: [f64; 2], r_inner: f64, r_outer: f64 },
    Triangle { vertices: [[f64; 2]; 3] },
    /// Disc minus the quadrant `x > cx, y < cy`, rotated about the center.
    PacMan { center: [f64; 2], radius: f64, rotation: f64 },
    /// `x(t) = 0.75 cos t - 0.5 cos^3 t`, `y(t) = 0.5 sin^3 t`, rotated about
    /// the origin, then translated.
    Nephroid { rotation: f64, translation: [f64; 2] },
    /// `r(phi) = 0.25 |cos(1.5 phi)|^sin(3 phi)` around `translation`.
    PolarRose { translation: [f64; 2] },
}

/// A validated shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Shape", into = "Shape")]
pub struct Domain {
    shape: Shape,
}

impl TryFrom<Shape> for Domain {
    type Error = Error;

    fn try_from(shape: Shape) -> Result<Self> {
        Domain::new(shape)
    }
}

impl From<Domain> for Shape {
    fn from(d: Domain) -> Shape {
        d.shape
    }
}

/// A sampled boundary location.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub position: Point,
    /// Unit outward normal.
    pub normal: Point,
    /// Curve parameter the sample was taken at (polar angle for the ball).
    pub arc_parameter: f64,
    /// Set for non-smooth boundary points (vertices, notches, cusps).
    pub corner: bool,
}

/// Result of an analytic normal query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceNormal {
    pub normal: Point,
    pub corner: bool,
}

/// Rotation about the origin followed by a translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rigid2 {
    pub angle: f64,
    pub translation: [f64; 2],
}

impl Rigid2 {
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        [
            c * p[0] - s * p[1] + self.translation[0],
            s * p[0] + c * p[1] + self.translation[1],
        ]
    }

    pub fn rotate(&self, v: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }

    pub fn inverse(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        let x = p[0] - self.translation[0];
        let y = p[1] - self.translation[1];
        [c * x + s * y, -s * x + c * y]
    }
}

/// One smooth boundary piece of a planar shape.
#[derive(Clone, Copy, Debug)]
struct Piece {
    t0: f64,
    t1: f64,
    /// The start point is a corner.
    corner_start: bool,
}

const CUSP_EPS: f64 = 1e-12;

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match &shape {
            Shape::Interval { a, b } => {
                if !finite(&[*a, *b]) || a >= b {
                    return input("interval requires a < b");
                }
            }
            Shape::Disc { center, radius } | Shape::PacMan { center, radius, .. } => {
                if !finite(center) || !(*radius > 0.0) {
                    return input("radius must be positive");
                }
            }
            Shape::Ball { center, radius } => {
                if !finite(center) || !(*radius > 0.0) {
                    return input("radius must be positive");
                }
            }
            Shape::Annulus { center, r_inner, r_outer } => {
                if !finite(center) || !(*r_inner > 0.0) || !(r_inner < r_outer) {
                    return input("annulus requires 0 < r_inner < r_outer");
                }
            }
            Shape::Triangle { vertices: [a, b, c] } => {
                let area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
                let scale = [a, b, c]
                    .iter()
                    .flat_map(|v| v.iter())
                    .fold(1.0f64, |m, x| m.max(x.abs()));
                if !area.is_finite() || area.abs() <= 1e-12 * scale * scale {
                    return input("triangle vertices are collinear");
                }
            }
            Shape::Nephroid { rotation, translation } => {
                if !rotation.is_finite() || !finite(translation) {
                    return input("nephroid transform must be finite");
                }
            }
            Shape::PolarRose { translation } => {
                if !finite(translation) {
                    return input("polar rose translation must be finite");
                }
            }
        }
        Ok(Domain { shape })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Interval { a, b })
    }

    pub fn disc(center: [f64; 2], radius: f64) -> Result<Self> {
        Self::new(Shape::Disc { center, radius })
    }

    pub fn ball(center: [f64; 3], radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { center, radius })
    }

    pub fn annulus(center: [f64; 2], r_inner: f64, r_outer: f64) -> Result<Self> {
        Self::new(Shape::Annulus { center, r_inner, r_outer })
    }

    pub fn triangle(vertices: [[f64; 2]; 3]) -> Result<Self> {
        Self::new(Shape::Triangle { vertices })
    }

    /// Unit interval (0, 1).
    pub fn unit_interval() -> Self {
        Self { shape: Shape::Interval { a: 0.0, b: 1.0 } }
    }

    /// Disc of radius 0.5 centered at (0.5, 0.5).
    pub fn unit_disc() -> Self {
        Self { shape: Shape::Disc { center: [0.5, 0.5], radius: 0.5 } }
    }

    /// Ball of radius 0.5 centered at (0.5, 0.5, 0.5).
    pub fn unit_ball() -> Self {
        Self { shape: Shape::Ball { center: [0.5; 3], radius: 0.5 } }
    }

    /// Looks up one of the named benchmark domains.
    pub fn named(name: &str) -> Result<Self> {
        let shape = match name {
            "interval" => Shape::Interval { a: 0.0, b: 1.0 },
            "disc" => Shape::Disc { center: [0.5, 0.5], radius: 0.5 },
            "ball" => Shape::Ball { center: [0.5; 3], radius: 0.5 },
            "annulus" => Shape::Annulus { center: [0.5, 0.5], r_inner: 0.1, r_outer: 0.5 },
            "triangle" => Shape::Triangle { vertices: [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] },
            "pacman" => Shape::PacMan { center: [0.5, 0.5], radius: 0.5, rotation: PI / 4.0 },
            "nephroid" => Shape::Nephroid { rotation: PI / 4.0, translation: [0.5, 0.5] },
            "rose" | "polar_rose" => Shape::PolarRose { translation: [0.5, 0.5] },
            other => return config(format!("unknown domain '{other}'")),
        };
        Self::new(shape)
    }

    pub const NAMES: [&'static str; 8] =
        ["interval", "disc", "ball", "annulus", "triangle", "pacman", "nephroid", "rose"];

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Interval { .. } => 1,
            Shape::Ball { .. } => 3,
            _ => 2,
        }
    }

    /// Open-interior containment test.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return input(format!(
                "point has dimension {} but domain has dimension {}",
                x.len(),
                self.dim()
            ));
        }
        Ok(self.inside(&point::from_slice(x)))
    }

    /// Containment on zero-padded points; no dimension check.
    pub fn inside(&self, p: &Point) -> bool {
        match &self.shape {
            Shape::Interval { a, b } => p[0] > *a && p[0] < *b,
            Shape::Disc { center, radius } => {
                planar_dist(p, center) < *radius
            }
            Shape::Ball { center, radius } => point::dist(p, center) < *radius,
            Shape::Annulus { center, r_inner, r_outer } => {
                let r = planar_dist(p, center);
                r > *r_inner && r < *r_outer
            }
            Shape::Triangle { vertices } => {
                let v = ccw(vertices);
                (0..3).all(|i| {
                    let a = v[i];
                    let b = v[(i + 1) % 3];
                    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) > 0.0
                })
            }
            Shape::PacMan { center, radius, rotation } => {
                let l = Rigid2 { angle: *rotation, translation: *center }.inverse([p[0], p[1]]);
                let in_disc = (l[0] * l[0] + l[1] * l[1]).sqrt() < *radius;
                let in_notch = l[0] >= 0.0 && l[1] <= 0.0;
                in_disc && !in_notch
            }
            Shape::Nephroid { rotation, translation } => {
                let l = Rigid2 { angle: *rotation, translation: *translation }
                    .inverse([p[0], p[1]]);
                let ay = l[1].abs();
                if ay >= 0.5 {
                    return false;
                }
                let s = (2.0 * ay).cbrt();
                let c = (1.0 - s * s).max(0.0).sqrt();
                l[0].abs() < 0.75 * c - 0.5 * c * c * c
            }
            Shape::PolarRose { translation } => {
                let dx = p[0] - translation[0];
                let dy = p[1] - translation[1];
                let rho = (dx * dx + dy * dy).sqrt();
                rho < rose_radius(dy.atan2(dx))
            }
        }
    }

    /// Samples the boundary at spacing `h`.
    pub fn discretize_boundary(&self, h: f64) -> Result<Vec<BoundaryPoint>> {
        if !(h > 0.0) || !h.is_finite() {
            return config("spacing h must be positive");
        }
        if h > self.diameter() {
            return config(format!(
                "spacing h = {h} exceeds the domain diameter {}",
                self.diameter()
            ));
        }
        match &self.shape {
            Shape::Interval { a, b } => Ok(vec![
                BoundaryPoint {
                    position: [*a, 0.0, 0.0],
                    normal: [-1.0, 0.0, 0.0],
                    arc_parameter: 0.0,
                    corner: false,
                },
                BoundaryPoint {
                    position: [*b, 0.0, 0.0],
                    normal: [1.0, 0.0, 0.0],
                    arc_parameter: 1.0,
                    corner: false,
                },
            ]),
            Shape::Ball { center, radius } => Ok(sphere_latitude_bands(center, *radius, h)),
            _ => Ok(self.march_pieces(h)),
        }
    }

    /// Analytic outward normal at a boundary point.
    pub fn outward_normal(&self, b: &[f64]) -> Result<SurfaceNormal> {
        if b.len() != self.dim() {
            return input("boundary point dimension mismatch");
        }
        let p = point::from_slice(b);
        let smooth = |n: Point| SurfaceNormal { normal: n, corner: false };
        match &self.shape {
            Shape::Interval { a, b } => {
                let n = if (p[0] - a).abs() <= (p[0] - b).abs() { -1.0 } else { 1.0 };
                Ok(smooth([n, 0.0, 0.0]))
            }
            Shape::Disc { center, .. } => radial2(&p, center, 1.0).map(smooth),
            Shape::Ball { center, .. } => point::normalized(&point::sub(&p, center))
                .map(smooth)
                .ok_or_else(|| Error::Input("normal undefined at the ball center".into())),
            Shape::Annulus { center, r_inner, r_outer } => {
                let r = planar_dist(&p, center);
                let sign = if (r - r_inner).abs() < (r - r_outer).abs() { -1.0 } else { 1.0 };
                radial2(&p, center, sign).map(smooth)
            }
            _ => {
                let t_piece = self.locate_parameter(&p)?;
                Ok(self.piece_normal(t_piece.0, t_piece.1))
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`, zero-padded.
    pub fn bounding_box(&self) -> (Point, Point) {
        match &self.shape {
            Shape::Interval { a, b } => ([*a, 0.0, 0.0], [*b, 0.0, 0.0]),
            Shape::Disc { center, radius }
            | Shape::PacMan { center, radius, .. }
            | Shape::Annulus { center, r_outer: radius, .. } => (
                [center[0] - radius, center[1] - radius, 0.0],
                [center[0] + radius, center[1] + radius, 0.0],
            ),
            Shape::Ball { center, radius } => (
                [center[0] - radius, center[1] - radius, center[2] - radius],
                [center[0] + radius, center[1] + radius, center[2] + radius],
            ),
            Shape::Triangle { vertices } => {
                let mut lo = [f64::INFINITY, f64::INFINITY, 0.0];
                let mut hi = [f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Shape::Nephroid { .. } | Shape::PolarRose { .. } => {
                let mut lo = [f64::INFINITY, f64::INFINITY, 0.0];
                let mut hi = [f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0];
                for (idx, piece) in self.pieces().iter().enumerate() {
                    for s in 0..=2000 {
                        let t = piece.t0 + (piece.t1 - piece.t0) * s as f64 / 2000.0;
                        let (q, _) = self.eval_piece(idx, t);
                        for k in 0..2 {
                            lo[k] = lo[k].min(q[k]);
                            hi[k] = hi[k].max(q[k]);
                        }
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Largest bounding-box extent.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        let d = point::sub(&hi, &lo);
        point::norm(&d)
    }

    /// Lebesgue measure (length, area or volume).
    pub fn measure(&self) -> f64 {
        match &self.shape {
            Shape::Interval { a, b } => b - a,
            Shape::Disc { radius, .. } => PI * radius * radius,
            Shape::Ball { radius, .. } => 4.0 / 3.0 * PI * radius.powi(3),
            Shape::Annulus { r_inner, r_outer, .. } => PI * (r_outer * r_outer - r_inner * r_inner),
            Shape::Triangle { vertices: [a, b, c] } => {
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
            }
            Shape::PacMan { radius, .. } => 0.75 * PI * radius * radius,
            _ => {
                // Shoelace on a dense boundary polygon.
                let mut area = 0.0;
                for (idx, piece) in self.pieces().iter().enumerate() {
                    let k = 20_000;
                    let mut prev = self.eval_piece(idx, piece.t0).0;
                    for s in 1..=k {
                        let t = piece.t0 + (piece.t1 - piece.t0) * s as f64 / k as f64;
                        let q = self.eval_piece(idx, t).0;
                        area += prev[0] * q[1] - q[0] * prev[1];
                        prev = q;
                    }
                }
                0.5 * area.abs()
            }
        }
    }

    fn pieces(&self) -> Vec<Piece> {
        let p = |t0, t1, corner_start| Piece { t0, t1, corner_start };
        match &self.shape {
            Shape::Disc { .. } => vec![p(0.0, TAU, false)],
            Shape::Annulus { .. } => vec![p(0.0, TAU, false), p(0.0, TAU, false)],
            Shape::Triangle { .. } => (0..3).map(|_| p(0.0, 1.0, true)).collect(),
            Shape::PacMan { radius, .. } => {
                vec![p(0.0, 1.5 * PI, true), p(0.0, *radius, true), p(0.0, *radius, true)]
            }
            Shape::Nephroid { .. } => vec![p(0.0, PI, true), p(PI, TAU, true)],
            Shape::PolarRose { .. } => vec![
                p(FRAC_PI_3, PI, true),
                p(PI, 5.0 * FRAC_PI_3, true),
                p(5.0 * FRAC_PI_3, 7.0 * FRAC_PI_3, true),
            ],
            Shape::Interval { .. } | Shape::Ball { .. } => Vec::new(),
        }
    }

    /// Position and parameter derivative of boundary piece `idx` at `t`.
    /// Pieces are oriented so the domain lies to the left.
    fn eval_piece(&self, idx: usize, t: f64) -> (Point, Point) {
        match &self.shape {
            Shape::Disc { center, radius } => {
                let (s, c) = t.sin_cos();
                (
                    [center[0] + radius * c, center[1] + radius * s, 0.0],
                    [-radius * s, radius * c, 0.0],
                )
            }
            Shape::Annulus { center, r_inner, r_outer } => {
                let (s, c) = t.sin_cos();
                if idx == 0 {
                    (
                        [center[0] + r_outer * c, center[1] + r_outer * s, 0.0],
                        [-r_outer * s, r_outer * c, 0.0],
                    )
                } else {
                    // clockwise
                    (
                        [center[0] + r_inner * c, center[1] - r_inner * s, 0.0],
                        [-r_inner * s, -r_inner * c, 0.0],
                    )
                }
            }
            Shape::Triangle { vertices } => {
                let v = ccw(vertices);
                let a = v[idx];
                let b = v[(idx + 1) % 3];
                let d = [b[0] - a[0], b[1] - a[1], 0.0];
                ([a[0] + t * d[0], a[1] + t * d[1], 0.0], d)
            }
            Shape::PacMan { center, radius, rotation } => {
                let tr = Rigid2 { angle: *rotation, translation: *center };
                let (local, dlocal) = match idx {
                    0 => {
                        let (s, c) = t.sin_cos();
                        ([radius * c, radius * s], [-radius * s, radius * c])
                    }
                    1 => ([0.0, -radius + t], [0.0, 1.0]),
                    _ => ([t, 0.0], [1.0, 0.0]),
                };
                let q = tr.apply(local);
                let dq = tr.rotate(dlocal);
                ([q[0], q[1], 0.0], [dq[0], dq[1], 0.0])
            }
            Shape::Nephroid { rotation, translation } => {
                let tr = Rigid2 { angle: *rotation, translation: *translation };
                let (s, c) = t.sin_cos();
                let local = [0.75 * c - 0.5 * c * c * c, 0.5 * s * s * s];
                let dlocal = [s * (1.5 * c * c - 0.75), 1.5 * s * s * c];
                let q = tr.apply(local);
                let dq = tr.rotate(dlocal);
                ([q[0], q[1], 0.0], [dq[0], dq[1], 0.0])
            }
            Shape::PolarRose { translation } => {
                let r = rose_radius(t);
                let dr = rose_radius_derivative(t);
                let (s, c) = t.sin_cos();
                (
                    [translation[0] + r * c, translation[1] + r * s, 0.0],
                    [dr * c - r * s, dr * s + r * c, 0.0],
                )
            }
            Shape::Interval { .. } | Shape::Ball { .. } => unreachable!("no planar pieces"),
        }
    }

    fn piece_normal(&self, idx: usize, t: f64) -> SurfaceNormal {
        let pieces = self.pieces();
        let piece = pieces[idx];
        let at_start = (t - piece.t0).abs() <= CUSP_EPS * (1.0 + piece.t0.abs());
        let at_end = (t - piece.t1).abs() <= CUSP_EPS * (1.0 + piece.t1.abs());
        // Corners take the normal of the adjacent piece with the lower parameter.
        let (pidx, tt, corner) = if at_start && piece.corner_start {
            let prev = (idx + pieces.len() - 1) % pieces.len();
            (prev, pieces[prev].t1, true)
        } else if at_end && pieces[(idx + 1) % pieces.len()].corner_start {
            (idx, piece.t1, true)
        } else {
            (idx, t, false)
        };
        let mut tangent = self.eval_piece(pidx, tt).1;
        if corner || point::norm(&tangent) < 1e-9 {
            let p = pieces[pidx];
            let delta = 1e-7 * (p.t1 - p.t0);
            tangent = self.eval_piece(pidx, tt - delta).1;
        }
        let n = point::normalized(&[tangent[1], -tangent[0], 0.0]).unwrap_or([1.0, 0.0, 0.0]);
        SurfaceNormal { normal: n, corner: corner || point::norm(&self.eval_piece(idx, t).1) < 1e-9 }
    }

    /// Finds the `(piece, parameter)` of a boundary point of a piecewise shape.
    fn locate_parameter(&self, p: &Point) -> Result<(usize, f64)> {
        let pieces = self.pieces();
        match &self.shape {
            Shape::Triangle { vertices } => {
                let v = ccw(vertices);
                let mut best = (0, 0.0, f64::INFINITY);
                for i in 0..3 {
                    let a = v[i];
                    let b = v[(i + 1) % 3];
                    let d = [b[0] - a[0], b[1] - a[1]];
                    let len2 = d[0] * d[0] + d[1] * d[1];
                    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
                    let q = [a[0] + t * d[0], a[1] + t * d[1]];
                    let e = (q[0] - p[0]).hypot(q[1] - p[1]);
                    if e < best.2 - 1e-14 {
                        best = (i, t, e);
                    }
                }
                Ok(snap_to_start(&pieces, best.0, best.1))
            }
            Shape::PacMan { center, radius, rotation } => {
                let l = Rigid2 { angle: *rotation, translation: *center }.inverse([p[0], p[1]]);
                let tol = 1e-9 * radius;
                let candidates = [
                    (0usize, {
                        let mut a = l[1].atan2(l[0]);
                        if a < -0.5 * PI + tol {
                            a += TAU;
                        }
                        a.clamp(0.0, 1.5 * PI)
                    }, ((l[0] * l[0] + l[1] * l[1]).sqrt() - radius).abs()),
                    (1, (l[1] + radius).clamp(0.0, *radius), l[0].abs()),
                    (2, l[0].clamp(0.0, *radius), l[1].abs()),
                ];
                let best = candidates
                    .iter()
                    .filter(|c| {
                        let (q, _) = self.eval_piece(c.0, c.1);
                        point::dist(&q, p) <= 1e-7 * radius.max(1.0)
                    })
                    .min_by(|a, b| a.2.total_cmp(&b.2))
                    .ok_or_else(|| Error::Input("point is not on the Pac-Man boundary".into()))?;
                Ok(snap_to_start(&pieces, best.0, best.1))
            }
            Shape::Nephroid { rotation, translation } => {
                let l = Rigid2 { angle: *rotation, translation: *translation }
                    .inverse([p[0], p[1]]);
                let base = (2.0 * l[1]).clamp(-1.0, 1.0).cbrt().clamp(-1.0, 1.0).asin();
                let t = if l[1] >= 0.0 {
                    if l[0] >= 0.0 { base } else { PI - base }
                } else if l[0] >= 0.0 {
                    TAU + base
                } else {
                    PI - base
                };
                let t = if t >= TAU - CUSP_EPS { 0.0 } else { t };
                if t < PI {
                    Ok(snap_to_start(&pieces, 0, t))
                } else {
                    Ok(snap_to_start(&pieces, 1, t))
                }
            }
            Shape::PolarRose { translation } => {
                let mut phi = (p[1] - translation[1]).atan2(p[0] - translation[0]);
                if phi < FRAC_PI_3 {
                    phi += TAU;
                }
                let idx = pieces
                    .iter()
                    .position(|pc| phi >= pc.t0 - CUSP_EPS && phi < pc.t1 - CUSP_EPS)
                    .unwrap_or(0);
                let phi = if idx == 0 && phi >= pieces[2].t1 - CUSP_EPS { pieces[0].t0 } else { phi };
                Ok(snap_to_start(&pieces, idx, phi))
            }
            _ => unreachable!("handled by caller"),
        }
    }

    /// Arc-length marching over every planar piece.
    fn march_pieces(&self, h: f64) -> Vec<BoundaryPoint> {
        let pieces = self.pieces();
        let mut out = Vec::new();
        for (idx, piece) in pieces.iter().enumerate() {
            let coarse = 2000;
            let length = chord_length(self, idx, piece, coarse);
            let samples = ((20.0 * length / h).ceil() as usize).max(coarse);
            let (ts, cum) = chord_table(self, idx, piece, samples);
            let total = *cum.last().unwrap();
            let count = ((total / h).round() as usize).max(1);
            for k in 0..count {
                let target = total * k as f64 / count as f64;
                let t = if k == 0 {
                    piece.t0
                } else {
                    let j = cum.partition_point(|&c| c < target).clamp(1, cum.len() - 1);
                    let frac = (target - cum[j - 1]) / (cum[j] - cum[j - 1]);
                    ts[j - 1] + frac * (ts[j] - ts[j - 1])
                };
                let (pos, _) = self.eval_piece(idx, t);
                let n = self.piece_normal(idx, t);
                out.push(BoundaryPoint {
                    position: pos,
                    normal: n.normal,
                    arc_parameter: t,
                    corner: n.corner,
                });
            }
        }
        out
    }
}

fn snap_to_start(pieces: &[Piece], idx: usize, t: f64) -> (usize, f64) {
    let p = pieces[idx];
    if (t - p.t1).abs() <= CUSP_EPS * (1.0 + p.t1.abs()) * 1e3 {
        let next = (idx + 1) % pieces.len();
        (next, pieces[next].t0)
    } else if (t - p.t0).abs() <= CUSP_EPS * (1.0 + p.t0.abs()) * 1e3 {
        (idx, p.t0)
    } else {
        (idx, t)
    }
}

fn chord_length(d: &Domain, idx: usize, piece: &Piece, samples: usize) -> f64 {
    *chord_table(d, idx, piece, samples).1.last().unwrap()
}

fn chord_table(d: &Domain, idx: usize, piece: &Piece, samples: usize) -> (Vec<f64>, Vec<f64>) {
    let mut ts = Vec::with_capacity(samples + 1);
    let mut cum = Vec::with_capacity(samples + 1);
    let mut prev = d.eval_piece(idx, piece.t0).0;
    let mut acc = 0.0;
    for s in 0..=samples {
        let t = piece.t0 + (piece.t1 - piece.t0) * s as f64 / samples as f64;
        let q = d.eval_piece(idx, t).0;
        acc += point::dist(&prev, &q);
        prev = q;
        ts.push(t);
        cum.push(acc);
    }
    (ts, cum)
}

fn sphere_latitude_bands(center: &[f64; 3], radius: f64, h: f64) -> Vec<BoundaryPoint> {
    let bands = ((PI * radius / h).round() as usize).max(1);
    let mut out = Vec::new();
    for k in 0..=bands {
        let theta = PI * k as f64 / bands as f64;
        let ring = radius * theta.sin();
        let count = if k == 0 || k == bands {
            1
        } else {
            ((TAU * ring / h).round() as usize).max(1)
        };
        let offset = if k % 2 == 1 { 0.5 } else { 0.0 };
        for j in 0..count {
            let phi = TAU * (j as f64 + offset) / count as f64;
            let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let n = if k == 0 {
                [0.0, 0.0, 1.0]
            } else if k == bands {
                [0.0, 0.0, -1.0]
            } else {
                n
            };
            out.push(BoundaryPoint {
                position: [
                    center[0] + radius * n[0],
                    center[1] + radius * n[1],
                    center[2] + radius * n[2],
                ],
                normal: n,
                arc_parameter: theta,
                corner: false,
            });
        }
    }
    out
}

fn planar_dist(p: &Point, c: &[f64; 2]) -> f64 {
    (p[0] - c[0]).hypot(p[1] - c[1])
}

fn radial2(p: &Point, c: &[f64; 2], sign: f64) -> Result<Point> {
    point::normalized(&[sign * (p[0] - c[0]), sign * (p[1] - c[1]), 0.0])
        .ok_or_else(|| Error::Input("normal undefined at the center".into()))
}

fn ccw(v: &[[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let area = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    if area > 0.0 {
        *v
    } else {
        [v[0], v[2], v[1]]
    }
}

/// `0.25 |cos(1.5 phi)|^sin(3 phi)`; the removable `0^0` points map to 0.25.
pub fn rose_radius(phi: f64) -> f64 {
    let c = (1.5 * phi).cos().abs();
    let e = (3.0 * phi).sin();
    if c < 1e-300 {
        return 0.25;
    }
    0.25 * (e * c.ln()).exp()
}

fn rose_radius_derivative(phi: f64) -> f64 {
    let c = (1.5 * phi).cos();
    if c.abs() < 1e-300 {
        return 0.0;
    }
    let r = rose_radius(phi);
    let ln = c.abs().ln();
    r * (3.0 * (3.0 * phi).cos() * ln - 1.5 * (3.0 * phi).sin() * (1.5 * phi).tan())
}
