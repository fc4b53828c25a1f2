use std::f64::consts::PI;

use crate::polymesh::geometry::Point2;
use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Points and weights on the segment `[a, b]`, exact to `degree`.
pub fn edge_quadrature<T: Real>(a: Point2<T>, b: Point2<T>, degree: usize) -> (Vec<Point2<T>>, Vec<T>) {
    let (x, w) = gauss_legendre(degree / 2 + 1);
    let half = (b - a).norm() * T::lit(0.5);
    let pts = x.iter().map(|&s| a.lerp(b, T::lit(0.5 * (s + 1.0)))).collect();
    let wts = w.iter().map(|&wi| half * T::lit(wi)).collect();
    (pts, wts)
}

fn orbit3(a: f64, w: f64, out: &mut Vec<[f64; 3]>, ws: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for l in [[b, a, a], [a, b, a], [a, a, b]] {
        out.push(l);
        ws.push(w);
    }
}

/// Barycentric points and weights (summing to 1) on a triangle, exact to
/// `degree`. Symmetric rules up to degree 5, collapsed Gauss beyond.
pub fn triangle_rule(degree: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let mut pts = Vec::new();
    let mut ws = Vec::new();
    match degree {
        0 | 1 => {
            pts.push([1.0 / 3.0; 3]);
            ws.push(1.0);
        }
        2 => orbit3(1.0 / 6.0, 1.0 / 3.0, &mut pts, &mut ws),
        3 | 4 => {
            orbit3(0.445_948_490_915_965, 0.223_381_589_678_011, &mut pts, &mut ws);
            orbit3(0.091_576_213_509_771, 0.109_951_743_655_322, &mut pts, &mut ws);
        }
        5 => {
            pts.push([1.0 / 3.0; 3]);
            ws.push(0.225);
            let s = 15f64.sqrt();
            orbit3((6.0 - s) / 21.0, (155.0 - s) / 1200.0, &mut pts, &mut ws);
            orbit3((6.0 + s) / 21.0, (155.0 + s) / 1200.0, &mut pts, &mut ws);
        }
        _ => {
            // Duffy map of the square: x = u, y = v (1 - u) on the unit triangle
            let n = degree / 2 + 2;
            let (gx, gw) = gauss_legendre(n);
            for (&su, &wu) in gx.iter().zip(&gw) {
                let u = 0.5 * (su + 1.0);
                for (&sv, &wv) in gx.iter().zip(&gw) {
                    let v = 0.5 * (sv + 1.0);
                    let y = v * (1.0 - u);
                    pts.push([1.0 - u - y, u, y]);
                    // reference area 1/2 normalised to 1
                    ws.push(2.0 * 0.25 * wu * wv * (1.0 - u));
                }
            }
        }
    }
    (pts, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn triangle_rules_are_exact() {
        for deg in 0..=12 {
            let (p, w) = triangle_rule(deg);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for a in 0..=deg as u32 {
                for b in 0..=(deg as u32 - a) {
                    // mean of l1^a l2^b over the triangle
                    let exact = 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2);
                    let got: f64 = p.iter().zip(&w).map(|(l, w)| w * l[1].powi(a as i32) * l[2].powi(b as i32)).sum();
                    assert!((got - exact).abs() < 1e-13, "deg={deg} a={a} b={b}");
                }
            }
        }
    }
}
