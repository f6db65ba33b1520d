//! Triangle and line quadrature, and element integrals of the Helmholtz kernels.

use hrtf_core::Vec3;
use num_complex::Complex64;

use crate::error::{BemError, Result};
use crate::green::{kernels, FOUR_PI};

/// Symmetric triangle rule; barycentric points, weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Point counts accepted by [`TriangleRule::new`].
pub const SUPPORTED_ORDERS: [usize; 4] = [1, 3, 6, 7];

impl TriangleRule {
    /// Dunavant rule with `points` nodes (1, 3, 6 or 7).
    pub fn new(points: usize) -> Result<Self> {
        let mut rule = Self {
            points: Vec::new(),
            weights: Vec::new(),
        };
        match points {
            1 => rule.centroid(1.0),
            3 => rule.orbit(1.0 / 6.0, 1.0 / 3.0),
            6 => {
                rule.orbit(0.445_948_490_915_965, 0.223_381_589_678_011);
                rule.orbit(0.091_576_213_509_771, 0.109_951_743_655_322);
            }
            7 => {
                rule.centroid(0.225);
                rule.orbit(0.470_142_064_105_115, 0.132_394_152_788_506);
                rule.orbit(0.101_286_507_323_456, 0.125_939_180_544_827);
            }
            _ => {
                return Err(BemError::InvalidConfig(format!(
                    "quadrature_order {points} unsupported (use one of {SUPPORTED_ORDERS:?})"
                )))
            }
        }
        Ok(rule)
    }

    fn centroid(&mut self, w: f64) {
        self.points.push([1.0 / 3.0; 3]);
        self.weights.push(w);
    }

    /// The three points `(a, a, 1-2a)` and rotations.
    fn orbit(&mut self, a: f64, w: f64) {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a, b], [a, b, a], [b, a, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Flat triangular element.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub vertices: [Vec3; 3],
    pub centroid: Vec3,
    /// Unit outward normal.
    pub normal: Vec3,
    pub area: f64,
    /// Longest edge.
    pub diameter: f64,
}

impl Element {
    pub fn new(vertices: [Vec3; 3]) -> Option<Self> {
        let [a, b, c] = vertices;
        let cross = (b - a).cross(&(c - a));
        let twice = cross.norm();
        if !(twice > 0.0) || !twice.is_finite() {
            return None;
        }
        Some(Self {
            vertices,
            centroid: (a + b + c) / 3.0,
            normal: cross / twice,
            area: 0.5 * twice,
            diameter: (b - a).norm().max((c - b).norm()).max((a - c).norm()),
        })
    }

    fn split(&self) -> [Element; 4] {
        let [a, b, c] = self.vertices;
        let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
        let child = |v: [Vec3; 3]| Element {
            vertices: v,
            centroid: (v[0] + v[1] + v[2]) / 3.0,
            normal: self.normal,
            area: 0.25 * self.area,
            diameter: 0.5 * self.diameter,
        };
        [child([a, ab, ca]), child([ab, b, bc]), child([ca, bc, c]), child([ab, bc, ca])]
    }
}

/// Elements closer than this many diameters are split before quadrature.
pub const NEAR_FIELD_RATIO: f64 = 2.0;
/// Maximum number of near-field splitting levels.
pub const MAX_REFINE_DEPTH: usize = 4;

/// `(∫ G dS, ∫ ∂G/∂n_y dS)` over a source element for a point `x` off the element.
pub fn regular_integrals(k: f64, x: &Vec3, el: &Element, rule: &TriangleRule, max_depth: usize) -> (Complex64, Complex64) {
    if max_depth > 0 && (x - el.centroid).norm() < NEAR_FIELD_RATIO * el.diameter {
        let mut s = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for c in el.split() {
            let (a, b) = regular_integrals(k, x, &c, rule, max_depth - 1);
            s += a;
            d += b;
        }
        return (s, d);
    }
    let [a, b, c] = el.vertices;
    let mut s = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let y = a * l[0] + b * l[1] + c * l[2];
        let (g, dg) = kernels(k, &(y - x), &el.normal);
        s += g * *w;
        d += dg * *w;
    }
    (s * el.area, d * el.area)
}

/// Angular Gauss points for the singular integral.
const SINGULAR_ANGLE_POINTS: usize = 16;

/// `∫ G dS` over an element from its own centroid.
///
/// The element is split into three triangles at the centroid; each is
/// integrated in polar coordinates about the centroid with the radial integral
/// done in closed form. The `1/r` part is exact, the smooth remainder uses
/// Gauss-Legendre in the angle. The double-layer term vanishes on a flat element.
pub fn singular_single_layer(k: f64, el: &Element) -> Complex64 {
    let (nodes, weights) = gauss_legendre(SINGULAR_ANGLE_POINTS);
    let x = el.centroid;
    let mut total = Complex64::new(0.0, 0.0);
    for e in 0..3 {
        let a = el.vertices[e];
        let b = el.vertices[(e + 1) % 3];
        let len = (b - a).norm();
        let u = (b - a) / len;
        let t0 = (x - a).dot(&u);
        let h = (x - a - u * t0).norm();
        // Edge parameter measured from the foot of the perpendicular.
        let (sa, sb) = (-t0, len - t0);
        total += Complex64::new(h * ((sb / h).asinh() - (sa / h).asinh()) / FOUR_PI, 0.0);
        if k == 0.0 {
            continue;
        }
        let (ta, tb) = ((sa / h).atan(), (sb / h).atan());
        let (mid, half) = (0.5 * (ta + tb), 0.5 * (tb - ta));
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, w) in nodes.iter().zip(&weights) {
            let r = h / (mid + half * t).cos();
            acc += radial_remainder(k, r) * *w;
        }
        total += acc * half / FOUR_PI;
    }
    total
}

/// `∫_0^R (e^{ikr} - 1) dr`-style remainder: `(e^{ikR} - 1 - ikR)/(ik)`.
fn radial_remainder(k: f64, r: f64) -> Complex64 {
    let z = Complex64::new(0.0, k * r);
    if z.norm() < 0.5 {
        // R · Σ_{m≥1} z^m/(m+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for m in 1..20 {
            term = term * z / (m + 1) as f64;
            sum += term;
        }
        sum * r
    } else {
        (z.exp() - 1.0 - z) / Complex64::new(0.0, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> Element {
        Element::new([Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.03, 0.002, 0.0), Vec3::new(0.01, 0.025, 0.004)]).unwrap()
    }

    #[test]
    fn rules_integrate_polynomials_exactly() {
        // Reference triangle (0,0),(1,0),(0,1): ∫ x^p y^q = p! q! / (p+q+2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for (n, degree) in [(1usize, 1u32), (3, 2), (6, 4), (7, 5)] {
            let rule = TriangleRule::new(n).unwrap();
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for p in 0..=degree {
                for q in 0..=(degree - p) {
                    let approx: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(l, w)| w * 0.5 * l[1].powi(p as i32) * l[2].powi(q as i32))
                        .sum();
                    let exact = fact(p) * fact(q) / fact(p + q + 2);
                    assert!((approx - exact).abs() < 1e-13, "n={n} p={p} q={q}");
                }
            }
        }
        assert!(TriangleRule::new(5).is_err());
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in [1, 2, 5, 16] {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p + 1) as f64 };
                assert!((approx - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn well_separated_elements_match_one_point_rule() {
        let el = tri();
        let x = el.centroid + Vec3::new(3.0, -2.0, 1.5);
        let k = 2.0;
        let seven = TriangleRule::new(7).unwrap();
        let one = TriangleRule::new(1).unwrap();
        let (s7, d7) = regular_integrals(k, &x, &el, &seven, MAX_REFINE_DEPTH);
        let (s1, d1) = regular_integrals(k, &x, &el, &one, 0);
        assert!((s7 - s1).norm() < 1e-3 * s7.norm());
        assert!((d7 - d1).norm() < 1e-3 * d7.norm());
    }

    /// Brute-force reference: split recursively, skipping only the child that
    /// contains the centroid at the finest level.
    fn brute_single_layer(k: f64, x: &Vec3, el: &Element, depth: usize, rule: &TriangleRule) -> Complex64 {
        let contains = |e: &Element| {
            let [a, b, c] = e.vertices;
            let n = e.normal;
            [(a, b), (b, c), (c, a)].iter().all(|(p, q)| (q - p).cross(&(x - p)).dot(&n) >= -1e-15)
        };
        if depth == 0 {
            return if contains(el) {
                Complex64::new(0.0, 0.0)
            } else {
                regular_integrals(k, x, el, rule, 0).0
            };
        }
        if !contains(el) && (x - el.centroid).norm() > 4.0 * el.diameter {
            return regular_integrals(k, x, el, rule, 0).0;
        }
        el.split().iter().map(|c| brute_single_layer(k, x, c, depth - 1, rule)).sum()
    }

    #[test]
    fn singular_integral_matches_brute_force() {
        let el = tri();
        let rule = TriangleRule::new(7).unwrap();
        for k in [0.0, 30.0, 120.0] {
            let exact = singular_single_layer(k, &el);
            let brute = brute_single_layer(k, &el.centroid, &el, 10, &rule);
            assert!((exact - brute).norm() < 2e-3 * exact.norm(), "k={k}: {exact} vs {brute}");
        }
    }

    #[test]
    fn static_singular_integral_of_equilateral_triangle() {
        // Closed form from the centroid of an equilateral triangle with side s:
        // ∫ 1/r dS = √3·s·ln(2+√3).
        let s = 0.02;
        let h = s * 3f64.sqrt() / 2.0;
        let el = Element::new([Vec3::zeros(), Vec3::new(s, 0.0, 0.0), Vec3::new(0.5 * s, h, 0.0)]).unwrap();
        let expect = s * 3f64.sqrt() * (2.0 + 3f64.sqrt()).ln() / FOUR_PI;
        let got = singular_single_layer(0.0, &el);
        assert!((got.re - expect).abs() < 1e-14 && got.im == 0.0, "{got} vs {expect}");
    }

    #[test]
    fn degenerate_element_rejected() {
        assert!(Element::new([Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0]).is_none());
    }
}
