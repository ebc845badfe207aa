//! Fixed-size points shared by every dimension. Unused trailing coordinates
//! are kept at zero so distances and dot products need no dimension checks.

pub type Point = [f64; 3];

pub const ORIGIN: Point = [0.0; 3];

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist2(a: &Point, b: &Point) -> f64 {
    let d = sub(a, b);
    dot(&d, &d)
}

#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    dist2(a, b).sqrt()
}

/// Returns `a / |a|`, or `None` for a (numerically) zero vector.
pub fn normalized(a: &Point) -> Option<Point> {
    let n = norm(a);
    if n > 1e-300 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

/// Builds a zero-padded point from a slice of length 1..=3.
pub fn from_slice(x: &[f64]) -> Point {
    let mut p = ORIGIN;
    for (dst, src) in p.iter_mut().zip(x) {
        *dst = *src;
    }
    p
}
