//! Sampled Hausdorff distance between two surfaces.

use rayon::prelude::*;

use crate::bvh::TriangleBvh;
use crate::mesh::{TriangleMesh, Vec3};

pub const DEFAULT_SAMPLES_PER_FACE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HausdorffDistance {
    /// Max over samples of A of the distance to surface B.
    pub forward: f64,
    /// Max over samples of B of the distance to surface A.
    pub backward: f64,
    pub symmetric: f64,
}

/// Mesh vertices followed by `samples_per_face` interior points per face.
///
/// Interior points come from the R2 low-discrepancy sequence folded into the
/// triangle, so they are spread uniformly and reproducible.
pub fn sample_points(mesh: &TriangleMesh, samples_per_face: usize) -> Vec<Vec3> {
    let mut pts = mesh.vertices.clone();
    if samples_per_face == 0 {
        return pts;
    }
    let bary = r2_barycentric(samples_per_face);
    pts.reserve(mesh.faces.len() * samples_per_face);
    for f in 0..mesh.faces.len() {
        let [a, b, c] = mesh.triangle(f);
        for w in &bary {
            pts.push(a * w[0] + b * w[1] + c * w[2]);
        }
    }
    pts
}

fn r2_barycentric(n: usize) -> Vec<[f64; 3]> {
    // Plastic-number additive recurrence.
    const G: f64 = 1.324_717_957_244_746;
    let (a1, a2) = (1.0 / G, 1.0 / (G * G));
    (0..n)
        .map(|i| {
            let i = i as f64 + 1.0;
            let mut u = (0.5 + a1 * i).fract();
            let mut v = (0.5 + a2 * i).fract();
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            [1.0 - u - v, u, v]
        })
        .collect()
}

/// Largest distance from any point to the surface. Parallel, but the max
/// reduction is order independent.
pub fn max_distance_to(points: &[Vec3], surface: &TriangleBvh) -> f64 {
    points
        .par_iter()
        .map(|p| surface.distance(p))
        .reduce(|| 0.0, f64::max)
}

pub fn hausdorff(a: &TriangleMesh, b: &TriangleMesh, samples_per_face: usize) -> HausdorffDistance {
    let bvh_a = TriangleBvh::build(a);
    let bvh_b = TriangleBvh::build(b);
    hausdorff_with(a, &bvh_a, b, &bvh_b, samples_per_face)
}

/// Same as [`hausdorff`] with prebuilt hierarchies.
pub fn hausdorff_with(
    a: &TriangleMesh,
    bvh_a: &TriangleBvh,
    b: &TriangleMesh,
    bvh_b: &TriangleBvh,
    samples_per_face: usize,
) -> HausdorffDistance {
    let forward = max_distance_to(&sample_points(a, samples_per_face), bvh_b);
    let backward = max_distance_to(&sample_points(b, samples_per_face), bvh_a);
    HausdorffDistance {
        forward,
        backward,
        symmetric: forward.max(backward),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn identical_meshes_are_zero() {
        let m = shapes::icosphere(2, 1.0);
        let h = hausdorff(&m, &m, 4);
        // Interior samples carry rounding of order 1e-16.
        assert!(h.symmetric < 1e-12 && h.forward >= 0.0 && h.backward >= 0.0);
        assert_eq!(h.symmetric, h.forward.max(h.backward));
    }

    #[test]
    fn concentric_spheres() {
        let a = shapes::icosphere(5, 1.0);
        let b = shapes::icosphere(5, 1.1);
        let h = hausdorff(&a, &b, 4);
        assert!((h.symmetric - 0.1).abs() < 0.005, "{h:?}");
    }

    #[test]
    fn barycentric_samples_inside() {
        for w in r2_barycentric(64) {
            assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
