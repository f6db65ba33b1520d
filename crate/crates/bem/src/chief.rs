//! Interior CHIEF points.

use hrtf_core::{TriangleBvh, TriangleMesh, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BemError, Result};

/// Draws per point before giving up.
pub const MAX_DRAWS: usize = 100;
/// Minimum depth below the surface as a fraction of the reference inradius.
pub const MIN_DEPTH_FRACTION: f64 = 0.2;

/// `count` points drawn uniformly in the bounding box and kept when they lie
/// inside the body at least `MIN_DEPTH_FRACTION` of the reference inradius
/// below the surface.
///
/// The reference inradius is the surface distance of the volume centroid, or
/// of the deepest of 256 interior draws when the centroid is outside.
pub fn chief_points(mesh: &TriangleMesh, count: usize, seed: u64) -> Result<Vec<Vec3>> {
    let bvh = TriangleBvh::build(mesh);
    let inside = |p: &Vec3| mesh.winding_number(p) > 0.5;
    let depth = |p: &Vec3| bvh.distance(p);
    let (lo, hi) = mesh.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Vec3::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y), rng.gen_range(lo.z..hi.z))
    };

    let centroid = volume_centroid(mesh);
    let reference = match centroid {
        Some(c) if inside(&c) => depth(&c),
        _ => {
            let mut best = 0.0f64;
            for _ in 0..256 {
                let p = draw(&mut rng);
                if inside(&p) {
                    best = best.max(depth(&p));
                }
            }
            best
        }
    };
    if !(reference > 0.0) {
        return Err(BemError::ChiefPlacement { index: 0, attempts: 256 });
    }
    let min_depth = MIN_DEPTH_FRACTION * reference;

    let mut points = Vec::with_capacity(count);
    for index in 0..count {
        let mut placed = false;
        for _ in 0..MAX_DRAWS {
            let p = draw(&mut rng);
            if inside(&p) && depth(&p) >= min_depth {
                points.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(BemError::ChiefPlacement { index, attempts: MAX_DRAWS });
        }
    }
    Ok(points)
}

fn volume_centroid(mesh: &TriangleMesh) -> Option<Vec3> {
    let mut vol = 0.0;
    let mut acc = Vec3::zeros();
    for &[a, b, c] in &mesh.faces {
        let (a, b, c) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        let v = a.dot(&b.cross(&c)) / 6.0;
        vol += v;
        acc += (a + b + c) * (v / 4.0);
    }
    (vol.abs() > 0.0).then(|| acc / vol)
}
