//! Deterministic generators for the six mesh families.
//!
//! On the unit square and the L-shape the refinement parameter `n` is the
//! number of elements per unit length; on the disk it is the target element
//! count.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{self, Point2};
use super::{PolygonMesh, PolygonSoup};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyTag {
    T1Triangles,
    T2Hexagons,
    T3DistortedSquares,
    T4Voronoi,
    T5DistortedHexagons,
    T6Disk,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 6] = [
        FamilyTag::T1Triangles,
        FamilyTag::T2Hexagons,
        FamilyTag::T3DistortedSquares,
        FamilyTag::T4Voronoi,
        FamilyTag::T5DistortedHexagons,
        FamilyTag::T6Disk,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            FamilyTag::T1Triangles => "t1",
            FamilyTag::T2Hexagons => "t2",
            FamilyTag::T3DistortedSquares => "t3",
            FamilyTag::T4Voronoi => "t4",
            FamilyTag::T5DistortedHexagons => "t5",
            FamilyTag::T6Disk => "t6",
        }
    }

    pub fn default_amplitude(self) -> f64 {
        match self {
            FamilyTag::T3DistortedSquares | FamilyTag::T5DistortedHexagons => 0.1,
            FamilyTag::T4Voronoi => 0.25,
            _ => 0.0,
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown mesh family '{s}' (expected t1..t6)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    UnitSquare,
    LShape,
    UnitDisk,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::UnitSquare => "square",
            Domain::LShape => "lshape",
            Domain::UnitDisk => "disk",
        }
    }

    /// Exact area of the continuous domain.
    pub fn area(self) -> f64 {
        match self {
            Domain::UnitSquare => 1.0,
            Domain::LShape => 3.0,
            Domain::UnitDisk => PI,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" | "unit_square" => Ok(Domain::UnitSquare),
            "lshape" | "l_shape" | "l-shape" => Ok(Domain::LShape),
            "disk" | "unit_disk" | "circle" => Ok(Domain::UnitDisk),
            _ => Err(Error::InvalidArgument(format!("unknown domain '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshFamily {
    pub tag: FamilyTag,
    pub distortion_seed: u64,
    /// Relative to the element size; must lie in `[0, 0.3)`.
    pub distortion_amplitude: f64,
}

impl MeshFamily {
    pub fn new(tag: FamilyTag) -> Self {
        Self { tag, distortion_seed: 1, distortion_amplitude: tag.default_amplitude() }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.distortion_amplitude = amplitude;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.distortion_seed = seed;
        self
    }
}

impl From<FamilyTag> for MeshFamily {
    fn from(tag: FamilyTag) -> Self {
        MeshFamily::new(tag)
    }
}

/// Generates a mesh of `domain` from `family` at refinement `n`.
pub fn generate_mesh<T: Real>(family: &MeshFamily, n: usize, domain: Domain) -> Result<PolygonMesh<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("refinement parameter must be >= 2, got {n}")));
    }
    let amp = family.distortion_amplitude;
    if !(0.0..0.3).contains(&amp) {
        return Err(Error::InvalidArgument(format!("distortion amplitude {amp} outside [0, 0.3)")));
    }
    match (family.tag, domain) {
        (FamilyTag::T6Disk, Domain::UnitDisk) => disk_rings(n),
        (FamilyTag::T6Disk, _) => Err(Error::Unsupported("t6 requires disk".into())),
        (_, Domain::UnitDisk) => Err(Error::Unsupported(format!("{} requires square or lshape", family.tag))),
        (FamilyTag::T1Triangles, d) => structured_grid(n, d, true),
        (FamilyTag::T2Hexagons, d) => hexagons(n, d),
        (FamilyTag::T3DistortedSquares, d) => {
            let m = structured_grid(n, d, false)?;
            distort(m, n, amp, family.distortion_seed)
        }
        (FamilyTag::T4Voronoi, d) => voronoi(n, d, amp, family.distortion_seed),
        (FamilyTag::T5DistortedHexagons, d) => {
            let m = hexagons(n, d)?;
            distort(m, n, amp, family.distortion_seed)
        }
    }
}

/// Lattice box `[lo, hi]^2` covering the domain, in units of cells of size `1/n`.
fn lattice_box(domain: Domain) -> (f64, f64) {
    match domain {
        Domain::LShape => (-1.0, 1.0),
        _ => (0.0, 1.0),
    }
}

fn in_l_notch(x: f64, y: f64) -> bool {
    x < 0.0 && y < 0.0
}

fn pt<T: Real>(x: f64, y: f64) -> Point2<T> {
    Point2::new(T::lit(x), T::lit(y))
}

fn structured_grid<T: Real>(n: usize, domain: Domain, triangles: bool) -> Result<PolygonMesh<T>> {
    let (lo, hi) = lattice_box(domain);
    let cells_per_side = ((hi - lo) * n as f64).round() as usize;
    let h = 1.0 / n as f64;
    let coord = |i: usize| lo + i as f64 * h;
    let mut soup = PolygonSoup::new(T::lit(1e-8 * h));
    for j in 0..cells_per_side {
        for i in 0..cells_per_side {
            let (x0, x1, y0, y1) = (coord(i), coord(i + 1), coord(j), coord(j + 1));
            if domain == Domain::LShape && in_l_notch(0.5 * (x0 + x1), 0.5 * (y0 + y1)) {
                continue;
            }
            let p00 = pt::<T>(x0, y0);
            let p10 = pt::<T>(x1, y0);
            let p11 = pt::<T>(x1, y1);
            let p01 = pt::<T>(x0, y1);
            if triangles {
                soup.push(&[p00, p10, p11]);
                soup.push(&[p00, p11, p01]);
            } else {
                soup.push(&[p00, p10, p11, p01]);
            }
        }
    }
    let (v, c) = soup.into_parts();
    PolygonMesh::new(v, c)
}

/// Clips a convex polygon to the domain. The result is empty, one piece, or on
/// the L-shape possibly two pieces joined only through the notch.
fn clip_to_domain(poly: &[Point2<f64>], domain: Domain, h: f64) -> Vec<Vec<Point2<f64>>> {
    let tol = 1e-10 * h;
    let (lo, hi) = lattice_box(domain);
    let mut p = poly.to_vec();
    let planes = [
        (Point2::new(lo, 0.0), Point2::new(1.0, 0.0)),
        (Point2::new(hi, 0.0), Point2::new(-1.0, 0.0)),
        (Point2::new(0.0, lo), Point2::new(0.0, 1.0)),
        (Point2::new(0.0, hi), Point2::new(0.0, -1.0)),
    ];
    for (o, nrm) in planes {
        p = geometry::clip_halfplane(&p, o, nrm, tol);
        if p.len() < 3 {
            return Vec::new();
        }
    }
    let min_area = 1e-8 * h * h;
    if geometry::signed_area(&p) <= min_area {
        return Vec::new();
    }
    if domain == Domain::LShape {
        return subtract_notch(&p, h);
    }
    vec![p]
}

/// Removes the quadrant `x < 0, y < 0` from a convex polygon.
fn subtract_notch(p: &[Point2<f64>], h: f64) -> Vec<Vec<Point2<f64>>> {
    let tol = 1e-10 * h;
    let min_area = 1e-8 * h * h;
    let origin = Point2::new(0.0, 0.0);
    let in_notch = geometry::clip_halfplane(
        &geometry::clip_halfplane(p, origin, Point2::new(-1.0, 0.0), 0.0),
        origin,
        Point2::new(0.0, -1.0),
        0.0,
    );
    if in_notch.len() < 3 || geometry::signed_area(&in_notch) <= min_area {
        return vec![p.to_vec()];
    }
    let upper = geometry::clip_halfplane(p, origin, Point2::new(0.0, 1.0), tol);
    let lower_right = geometry::clip_halfplane(
        &geometry::clip_halfplane(p, origin, Point2::new(1.0, 0.0), tol),
        origin,
        Point2::new(0.0, -1.0),
        tol,
    );
    let upper_ok = upper.len() >= 3 && geometry::signed_area(&upper) > min_area;
    let lower_ok = lower_right.len() >= 3 && geometry::signed_area(&lower_right) > min_area;
    match (upper_ok, lower_ok) {
        (false, false) => Vec::new(),
        (true, false) => vec![upper],
        (false, true) => vec![lower_right],
        (true, true) => {
            // upper's chord on y = 0 runs left to right, lower_right's runs right to left
            let on_axis = |q: Point2<f64>| q.y.abs() <= tol;
            let nu = upper.len();
            let nl = lower_right.len();
            let chord_a = (0..nu).find(|&i| {
                on_axis(upper[i]) && on_axis(upper[(i + 1) % nu]) && upper[(i + 1) % nu].x > upper[i].x + tol
            });
            let chord_b = (0..nl).find(|&i| {
                on_axis(lower_right[i])
                    && on_axis(lower_right[(i + 1) % nl])
                    && lower_right[(i + 1) % nl].x + tol < lower_right[i].x
            });
            // no shared chord on x > 0: the pieces only meet inside the notch
            let (Some(ia), Some(ib)) = (chord_a, chord_b) else {
                return vec![upper, lower_right];
            };
            let mut out = Vec::with_capacity(nu + nl + 1);
            // upper from the chord's right end round to its left end
            for k in 0..nu {
                out.push(upper[(ia + 1 + k) % nu]);
            }
            let a_left = upper[ia];
            if a_left.x < -tol {
                out.push(origin);
            }
            // lower_right from the chord's left end round to its right end (exclusive)
            for k in 1..nl {
                out.push(lower_right[(ib + k) % nl]);
            }
            // the chord endpoints that fell inside the domain are collinear artefacts
            let mut cleaned = Vec::with_capacity(out.len());
            let m = out.len();
            for k in 0..m {
                let prev = out[(k + m - 1) % m];
                let cur = out[k];
                let next = out[(k + 1) % m];
                let collinear = (prev - cur).cross(next - cur).abs() <= 1e-9 * h * h;
                let interior = cur.y.abs() <= tol && cur.x > tol;
                if collinear && interior {
                    continue;
                }
                cleaned.push(cur);
            }
            vec![cleaned]
        }
    }
}

fn hexagons<T: Real>(n: usize, domain: Domain) -> Result<PolygonMesh<T>> {
    let (lo, hi) = lattice_box(domain);
    let w = 1.0 / n as f64;
    // rows per unit length chosen so that rows land on y = lo, 0, hi
    let rows_per_unit = ((2.0 * n as f64) / 3f64.sqrt()).round().max(1.0);
    let dy = 1.0 / rows_per_unit;
    let r = dy / 1.5;
    let nrows = ((hi - lo) / dy).round() as i64;
    let ncols = ((hi - lo) / w).round() as i64;
    // the unshifted parity is pinned to the row through y = 0 so the lattice
    // meets the L-shape corner the same way at every n
    let j0 = (-lo / dy).round() as i64;
    let mut soup = PolygonSoup::new(T::lit(1e-8 * w));
    for j in -1..=nrows + 1 {
        let cy = lo + j as f64 * dy;
        let shift = if (j - j0).rem_euclid(2) == 1 { 0.5 * w } else { 0.0 };
        for i in -1..=ncols + 1 {
            let cx = lo + i as f64 * w + shift;
            let hex = [
                Point2::new(cx, cy - r),
                Point2::new(cx + 0.5 * w, cy - 0.5 * r),
                Point2::new(cx + 0.5 * w, cy + 0.5 * r),
                Point2::new(cx, cy + r),
                Point2::new(cx - 0.5 * w, cy + 0.5 * r),
                Point2::new(cx - 0.5 * w, cy - 0.5 * r),
            ];
            for piece in clip_to_domain(&hex, domain, w) {
                let cast: Vec<Point2<T>> = piece.iter().map(|p| p.cast()).collect();
                soup.push(&cast);
            }
        }
    }
    let (v, c) = soup.into_parts();
    PolygonMesh::new(v, c)
}

fn voronoi<T: Real>(n: usize, domain: Domain, jitter: f64, seed: u64) -> Result<PolygonMesh<T>> {
    let (lo, hi) = lattice_box(domain);
    let h = 1.0 / n as f64;
    let side = ((hi - lo) * n as f64).round() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds: HashMap<(i64, i64), Point2<f64>> = HashMap::new();
    let mut order = Vec::new();
    for j in 0..side {
        for i in 0..side {
            let jx: f64 = rng.random_range(-1.0..1.0);
            let jy: f64 = rng.random_range(-1.0..1.0);
            let x = lo + (i as f64 + 0.5 + jitter * jx) * h;
            let y = lo + (j as f64 + 0.5 + jitter * jy) * h;
            let cx = lo + (i as f64 + 0.5) * h;
            let cy = lo + (j as f64 + 0.5) * h;
            if domain == Domain::LShape && in_l_notch(cx, cy) {
                continue;
            }
            seeds.insert((i, j), Point2::new(x, y));
            order.push((i, j));
        }
    }
    let bbox = [
        Point2::new(lo, lo),
        Point2::new(hi, lo),
        Point2::new(hi, hi),
        Point2::new(lo, hi),
    ];
    let mut soup = PolygonSoup::new(T::lit(1e-3 * h));
    const WINDOW: i64 = 3;
    for &(i, j) in &order {
        let s = seeds[&(i, j)];
        let mut cell = bbox.to_vec();
        for dj in -WINDOW..=WINDOW {
            for di in -WINDOW..=WINDOW {
                if di == 0 && dj == 0 {
                    continue;
                }
                if let Some(&t) = seeds.get(&(i + di, j + dj)) {
                    let mid = (s + t) * 0.5;
                    cell = geometry::clip_halfplane(&cell, mid, s - t, 0.0);
                }
            }
        }
        for piece in clip_to_domain(&cell, domain, h) {
            let cast: Vec<Point2<T>> = piece.iter().map(|p| p.cast()).collect();
            soup.push(&cast);
        }
    }
    let (v, c) = soup.into_parts();
    PolygonMesh::new(v, c)
}

/// Moves interior vertices by a smooth field plus seeded jitter, both of
/// size `amplitude / n`.
fn distort<T: Real>(mesh: PolygonMesh<T>, n: usize, amplitude: f64, seed: u64) -> Result<PolygonMesh<T>> {
    if amplitude == 0.0 {
        return Ok(mesh);
    }
    let h = 1.0 / n as f64;
    let fixed = mesh.boundary_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moved: Vec<Point2<T>> = mesh
        .vertices()
        .iter()
        .zip(&fixed)
        .map(|(p, &is_fixed)| {
            let jx: f64 = rng.random_range(-1.0..1.0);
            let jy: f64 = rng.random_range(-1.0..1.0);
            if is_fixed {
                return *p;
            }
            let (x, y) = (p.x.to_f64_lossy(), p.y.to_f64_lossy());
            let s = (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
            let dx = amplitude * h * (s + jx);
            let dy = amplitude * h * (s + jy);
            Point2::new(p.x + T::lit(dx), p.y + T::lit(dy))
        })
        .collect();
    mesh.with_vertices(moved)
}

/// Vertex counts on the circles `ρ_k = (k + 1) / (rings + 1)`, `k = 0..=rings`.
/// Each is about `scale · 2πρ_k / Δr`, so cells stay close to unit aspect.
fn disk_circle_counts(rings: usize, scale: f64) -> Vec<usize> {
    (0..=rings)
        .map(|k| ((2.0 * PI * (k as f64 + 1.0) * scale).round() as usize).max(3))
        .collect()
}

/// Picks `(rings, scale)` with the scale closest to 1 among layouts whose
/// element count is within 2% of `target`; the closest count otherwise.
fn disk_layout(target: usize) -> (usize, f64) {
    let slack = (target as f64 * 0.02).floor() as usize;
    let mut best = (usize::MAX, f64::INFINITY, 1, 1.0);
    for rings in 1..=200 {
        for step in 0..=160 {
            let scale = 0.6 + 0.005 * step as f64;
            let total = 1 + disk_circle_counts(rings, scale)[1..].iter().sum::<usize>();
            let diff = total.abs_diff(target).saturating_sub(slack);
            let dev = (scale - 1.0).abs();
            if diff < best.0 || (diff == best.0 && dev < best.1) {
                best = (diff, dev, rings, scale);
            }
        }
    }
    (best.2, best.3)
}

fn disk_rings<T: Real>(target: usize) -> Result<PolygonMesh<T>> {
    let (rings, scale) = disk_layout(target);
    let counts = disk_circle_counts(rings, scale);
    let dr = 1.0 / (rings as f64 + 1.0);
    let point = |k: usize, idx: usize| -> Point2<T> {
        let g = counts[k];
        let theta = 2.0 * PI * (idx % g) as f64 / g as f64;
        if k == rings {
            pt(theta.cos(), theta.sin())
        } else {
            let rho = (k as f64 + 1.0) * dr;
            pt(rho * theta.cos(), rho * theta.sin())
        }
    };
    let mut soup = PolygonSoup::new(T::lit(1e-8 * dr));
    let center_poly: Vec<Point2<T>> = (0..counts[0]).map(|i| point(0, i)).collect();
    soup.push(&center_poly);
    for k in 1..=rings {
        let (inner, outer) = (counts[k - 1], counts[k]);
        // cell i spans outer vertices i, i+1 and the inner vertices between
        // the matching angular positions
        let split = |i: usize| ((i * inner) as f64 / outer as f64).round() as usize;
        for i in 0..outer {
            let (l0, l1) = (split(i), split(i + 1));
            let mut poly = vec![point(k - 1, l0), point(k, i), point(k, i + 1)];
            poly.extend(((l0 + 1)..=l1).rev().map(|l| point(k - 1, l)));
            soup.push(&poly);
        }
    }
    let (v, c) = soup.into_parts();
    PolygonMesh::new(v, c)
}

/// Area enclosed by the disk mesh's polygonal boundary.
#[cfg(test)]
pub(crate) fn inscribed_polygon_area(sides: usize) -> f64 {
    0.5 * sides as f64 * (2.0 * PI / sides as f64).sin()
}
