//! Planar polygon helpers: areas, centroids, clipping and kernels.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn lerp(self, other: Self, t: T) -> Self {
        self + (other - self) * t
    }

    pub fn cast<U: Real>(self) -> Point2<U> {
        Point2::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Neg for Point2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Shoelace signed area (positive for counterclockwise polygons).
pub fn signed_area<T: Real>(poly: &[Point2<T>]) -> T {
    let n = poly.len();
    let mut twice = T::zero();
    for i in 0..n {
        twice += poly[i].cross(poly[(i + 1) % n]);
    }
    twice * T::lit(0.5)
}

/// Area-weighted centroid. Vertex coordinates are shifted to the first
/// vertex first so that large offsets do not cancel.
pub fn centroid<T: Real>(poly: &[Point2<T>]) -> Point2<T> {
    let n = poly.len();
    let origin = poly[0];
    let mut a = T::zero();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for i in 0..n {
        let p = poly[i] - origin;
        let q = poly[(i + 1) % n] - origin;
        let w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    let three_a = a * T::lit(3.0);
    origin + Point2::new(cx / three_a, cy / three_a)
}

/// Largest distance between two vertices.
pub fn diameter<T: Real>(poly: &[Point2<T>]) -> T {
    let mut d = T::zero();
    for i in 0..poly.len() {
        for j in (i + 1)..poly.len() {
            d = d.max((poly[i] - poly[j]).norm());
        }
    }
    d
}

fn segments_cross<T: Real>(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    let z = T::zero();
    if ((o1 > z && o2 < z) || (o1 < z && o2 > z)) && ((o3 > z && o4 < z) || (o3 < z && o4 > z)) {
        return true;
    }
    // collinear overlap
    let on_seg = |p: Point2<T>, q: Point2<T>, r: Point2<T>| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (o1 == z && on_seg(a, b, c))
        || (o2 == z && on_seg(a, b, d))
        || (o3 == z && on_seg(c, d, a))
        || (o4 == z && on_seg(c, d, b))
}

/// True when no two non-adjacent edges intersect.
pub fn is_simple<T: Real>(poly: &[Point2<T>]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Clips a convex (or arbitrary, for a single pass) polygon against the
/// half-plane `normal · (p - origin) >= -tol`, with `tol >= 0`.
pub fn clip_halfplane<T: Real>(
    poly: &[Point2<T>],
    origin: Point2<T>,
    normal: Point2<T>,
    tol: T,
) -> Vec<Point2<T>> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    if n == 0 {
        return out;
    }
    let side = |p: Point2<T>| normal.dot(p - origin);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = side(p);
        let sq = side(q);
        let p_in = sp >= -tol;
        let q_in = sq >= -tol;
        if p_in {
            out.push(p);
        }
        if p_in != q_in {
            // strict crossing; interpolate on the exact line
            let t = sp / (sp - sq);
            if t > T::zero() && t < T::one() {
                out.push(p.lerp(q, t));
            }
        }
    }
    out
}

/// Kernel of a counterclockwise polygon: the set of points that see the whole
/// boundary. Returned as a convex polygon (possibly empty).
pub fn kernel<T: Real>(poly: &[Point2<T>]) -> Vec<Point2<T>> {
    let n = poly.len();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (poly[0].x, poly[0].x, poly[0].y, poly[0].y);
    for p in poly {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let mut k = vec![
        Point2::new(xmin, ymin),
        Point2::new(xmax, ymin),
        Point2::new(xmax, ymax),
        Point2::new(xmin, ymax),
    ];
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let d = b - a;
        // interior lies to the left of a counterclockwise edge
        let inward = Point2::new(-d.y, d.x);
        k = clip_halfplane(&k, a, inward, T::zero());
        if k.len() < 3 {
            return Vec::new();
        }
    }
    k
}

/// Point strictly inside a convex polygon (counterclockwise), with margin `tol`.
pub fn inside_convex<T: Real>(convex: &[Point2<T>], p: Point2<T>, tol: T) -> bool {
    let n = convex.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| {
        let a = convex[i];
        let b = convex[(i + 1) % n];
        (b - a).cross(p - a) > tol
    })
}

/// Distance from `p` to the boundary of a convex counterclockwise polygon
/// (negative when outside).
pub fn inset_distance<T: Real>(convex: &[Point2<T>], p: Point2<T>) -> T {
    let n = convex.len();
    let mut d = T::infinity();
    for i in 0..n {
        let a = convex[i];
        let b = convex[(i + 1) % n];
        let e = b - a;
        let len = e.norm();
        if len > T::zero() {
            d = d.min(e.cross(p - a) / len);
        }
    }
    d
}
