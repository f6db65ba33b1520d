//! Procedural fixture meshes: platonic solids, spheres, tori, boxes and capsules.
//!
//! All closed shapes are outward oriented.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::mesh::{TriangleMesh, Vec3};
use crate::subdivide::midpoint_subdivide;

/// Regular icosahedron with unit circumradius.
pub fn icosahedron() -> TriangleMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let vertices = raw
        .iter()
        .map(|p| Vec3::new(p[0], p[1], p[2]).normalize())
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    TriangleMesh {
        vertices,
        faces,
        labels: None,
    }
}

/// Icosahedron subdivided `level` times with vertices projected onto a sphere.
///
/// Face count is `20 · 4^level`.
pub fn icosphere(level: usize, radius: f64) -> TriangleMesh {
    let mut mesh = icosahedron();
    for _ in 0..level {
        mesh = midpoint_subdivide(&mesh).mesh;
        for v in &mut mesh.vertices {
            *v = v.normalize();
        }
    }
    mesh.scaled(radius)
}

/// Icosphere mapped onto the ellipsoid with the given semi-axes.
pub fn ellipsoid(level: usize, semi_axes: Vec3) -> TriangleMesh {
    let mut mesh = icosphere(level, 1.0);
    for v in &mut mesh.vertices {
        *v = v.component_mul(&semi_axes);
    }
    mesh
}

/// Torus around the z axis with `major` × `minor` quads split into triangles.
pub fn torus(major: usize, minor: usize, major_radius: f64, minor_radius: f64) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(major * minor);
    for i in 0..major {
        let u = 2.0 * PI * i as f64 / major as f64;
        for j in 0..minor {
            let v = 2.0 * PI * j as f64 / minor as f64;
            let rho = major_radius + minor_radius * v.cos();
            vertices.push(Vec3::new(rho * u.cos(), rho * u.sin(), minor_radius * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % major) * minor + (j % minor);
    let mut faces = Vec::with_capacity(2 * major * minor);
    for i in 0..major {
        for j in 0..minor {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh {
        vertices,
        faces,
        labels: None,
    }
}

/// Unit cube `[0,1]^3` with 8 vertices and 12 faces.
pub fn cube() -> TriangleMesh {
    box_grid(Vec3::zeros(), Vec3::repeat(1.0), 1)
}

/// Axis-aligned box with each side divided into `n × n` quads.
pub fn box_grid(min: Vec3, max: Vec3, n: usize) -> TriangleMesh {
    assert!(n >= 1);
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut vid = |p: [usize; 3], vertices: &mut Vec<Vec3>| -> usize {
        *index.entry(p).or_insert_with(|| {
            let t = Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64) / n as f64;
            vertices.push(min + (max - min).component_mul(&t));
            vertices.len() - 1
        })
    };
    // (fixed axis, fixed value, u axis, v axis); u × v points outward.
    let sides: [(usize, usize, usize, usize); 6] = [
        (0, n, 1, 2),
        (0, 0, 2, 1),
        (1, n, 2, 0),
        (1, 0, 0, 2),
        (2, n, 0, 1),
        (2, 0, 1, 0),
    ];
    for &(axis, value, ua, va) in &sides {
        for i in 0..n {
            for j in 0..n {
                let corner = |di: usize, dj: usize| {
                    let mut p = [0usize; 3];
                    p[axis] = value;
                    p[ua] = i + di;
                    p[va] = j + dj;
                    p
                };
                let a = vid(corner(0, 0), &mut vertices);
                let b = vid(corner(1, 0), &mut vertices);
                let c = vid(corner(1, 1), &mut vertices);
                let d = vid(corner(0, 1), &mut vertices);
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
    }
    TriangleMesh {
        vertices,
        faces,
        labels: None,
    }
}

/// Closed surface of revolution about the z axis.
///
/// `profile` lists `(rho, z)` from the south pole to the north pole; the first
/// and last entries must have `rho == 0`.
pub fn revolve(profile: &[(f64, f64)], segments: usize) -> TriangleMesh {
    assert!(profile.len() >= 3 && segments >= 3);
    let rings = &profile[1..profile.len() - 1];
    let mut vertices = vec![Vec3::new(0.0, 0.0, profile[0].1)];
    for &(rho, z) in rings {
        for s in 0..segments {
            let t = 2.0 * PI * s as f64 / segments as f64;
            vertices.push(Vec3::new(rho * t.cos(), rho * t.sin(), z));
        }
    }
    let north = vertices.len();
    vertices.push(Vec3::new(0.0, 0.0, profile[profile.len() - 1].1));
    let ring = |r: usize, s: usize| 1 + r * segments + s % segments;
    let mut faces = Vec::new();
    for s in 0..segments {
        faces.push([0, ring(0, s + 1), ring(0, s)]);
    }
    for r in 0..rings.len() - 1 {
        for s in 0..segments {
            let (a, b) = (ring(r, s), ring(r, s + 1));
            let (c, d) = (ring(r + 1, s + 1), ring(r + 1, s));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    let last = rings.len() - 1;
    for s in 0..segments {
        faces.push([north, ring(last, s), ring(last, s + 1)]);
    }
    TriangleMesh {
        vertices,
        faces,
        labels: None,
    }
}

/// Cylinder of the given radius and straight length closed by hemispherical caps.
pub fn capsule(radius: f64, length: f64, cap_rings: usize, side_rings: usize, segments: usize) -> TriangleMesh {
    let half = 0.5 * length;
    let mut profile = Vec::new();
    for i in 0..=cap_rings {
        let a = -0.5 * PI + 0.5 * PI * i as f64 / cap_rings as f64;
        profile.push((radius * a.cos(), -half + radius * a.sin()));
    }
    for i in 1..side_rings {
        profile.push((radius, -half + length * i as f64 / side_rings as f64));
    }
    for i in 0..=cap_rings {
        let a = 0.5 * PI * i as f64 / cap_rings as f64;
        profile.push((radius * a.cos(), half + radius * a.sin()));
    }
    profile[0].0 = 0.0;
    let last = profile.len() - 1;
    profile[last].0 = 0.0;
    revolve(&profile, segments)
}

/// Open square grid in the xy plane, `n × n` quads, centered at the origin.
pub fn grid_plane(n: usize, size: f64) -> TriangleMesh {
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Vec3::new(
                size * (i as f64 / n as f64 - 0.5),
                size * (j as f64 / n as f64 - 0.5),
                0.0,
            ));
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriangleMesh {
        vertices,
        faces,
        labels: None,
    }
}
