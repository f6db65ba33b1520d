//! Learned coarse-to-fine subdivision: forward pass and reverse-mode gradients.
//!
//! Per level, with `X`/`F` the level-input positions and features:
//!
//! - every half-flap `h = (i, j, k, l)` runs `vertex_net([geo_h, F_i, F_j, F_k, F_l])`;
//!   even vertex `i` moves by the mean of its outgoing flaps' displacements and
//!   takes the mean of their feature outputs;
//! - every flap then runs `edge_net` on the updated even features; the new
//!   vertex of edge `{a, b}` sits at the midpoint of the moved endpoints plus the
//!   mean displacement of the edge's two flaps.
//!
//! Displacements are network outputs mapped from the flap frame and scaled by
//! the edge length, which makes the scheme rigid-motion equivariant. Level 0
//! features come from `init_net` averaged over outgoing flaps.
//!
//! Gradients treat flap geometry and frames as constants.

use std::collections::HashMap;

use hrtf_core::{build_half_edge, midpoint_subdivide as split_faces, validate, TriangleMesh, Vec3};
use rayon::prelude::*;

use crate::error::{Result, SubdivError};
use crate::flap::{flap_input, half_flaps, HalfFlap};
use crate::mlp::Mlp;
use crate::params::{SubdivNetParams, GEO_DIM, NET_NAMES};

/// Flaps per parallel work unit. Fixed so that reductions do not depend on the thread count.
const FLAP_CHUNK: usize = 128;

/// Everything one level needs for the backward pass.
#[derive(Debug, Clone)]
pub struct LevelTape {
    /// Level-input mesh.
    pub input: TriangleMesh,
    /// Level-input features, `feature_dim` per vertex.
    pub features: Vec<f64>,
    /// Even-vertex features after the vertex step (inputs of `edge_net`).
    pub even_features: Vec<f64>,
    pub flaps: Vec<HalfFlap>,
    geometry: Vec<[f64; GEO_DIM]>,
    vertex_flaps: Vec<Vec<usize>>,
    edge_flaps: Vec<Vec<usize>>,
    edge_of_flap: Vec<usize>,
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub mesh: TriangleMesh,
    /// Output features, `feature_dim` per vertex of `mesh`.
    pub features: Vec<f64>,
    pub levels: Vec<LevelTape>,
}

/// Checks the watertight, manifold, genus-0 precondition.
pub fn check_input(mesh: &TriangleMesh) -> Result<()> {
    mesh.check()?;
    let report = validate(mesh);
    if report.is_closed_sphere() {
        Ok(())
    } else {
        Err(SubdivError::Topology(format!(
            "watertight {}, manifold {}, genus {:?}",
            report.is_watertight, report.is_manifold, report.genus
        )))
    }
}

/// Midpoint subdivision with the manifold precondition enforced.
pub fn midpoint_subdivide(mesh: &TriangleMesh) -> Result<TriangleMesh> {
    mesh.check()?;
    let report = validate(mesh);
    if !report.is_manifold {
        return Err(SubdivError::Topology(format!(
            "{} non-manifold edges, {} non-manifold vertices",
            report.non_manifold_edge_count, report.non_manifold_vertex_count
        )));
    }
    Ok(split_faces(mesh).mesh)
}

fn par_map_flaps<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().with_min_len(FLAP_CHUNK).map(f).collect()
}

/// Mean of per-flap outputs over each group: displacement (world) and features.
fn average_outputs(
    groups: &[Vec<usize>],
    flaps: &[HalfFlap],
    outputs: &[Vec<f64>],
    d: usize,
) -> (Vec<Vec3>, Vec<f64>) {
    let mut disp = vec![Vec3::zeros(); groups.len()];
    let mut feat = vec![0.0; groups.len() * d];
    for (g, members) in groups.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let n = members.len() as f64;
        let mut sum = Vec3::zeros();
        let row = &mut feat[g * d..(g + 1) * d];
        for &fl in members {
            let out = &outputs[fl];
            sum += flaps[fl].to_world(&out[..3]);
            for (r, o) in row.iter_mut().zip(&out[3..]) {
                *r += o;
            }
        }
        disp[g] = sum / n;
        for r in row.iter_mut() {
            *r /= n;
        }
    }
    (disp, feat)
}

fn initial_features(
    net: &Mlp,
    geometry: &[[f64; GEO_DIM]],
    vertex_flaps: &[Vec<usize>],
    d: usize,
) -> Vec<f64> {
    let outs = par_map_flaps(geometry.len(), |fl| net.forward(&geometry[fl]));
    let mut feat = vec![0.0; vertex_flaps.len() * d];
    for (v, members) in vertex_flaps.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let row = &mut feat[v * d..(v + 1) * d];
        for &fl in members {
            for (r, o) in row.iter_mut().zip(&outs[fl]) {
                *r += o;
            }
        }
        let n = members.len() as f64;
        for r in row.iter_mut() {
            *r /= n;
        }
    }
    feat
}

/// Runs `levels` learned subdivision steps, keeping the per-level tapes.
pub fn forward(params: &SubdivNetParams, coarse: &TriangleMesh, levels: usize) -> Result<ForwardPass> {
    params.check()?;
    check_input(coarse)?;
    let d = params.feature_dim;
    let mut mesh = coarse.clone();
    let mut features = Vec::new();
    let mut tapes = Vec::with_capacity(levels);
    for level in 0..levels {
        let he = build_half_edge(&mesh)?;
        let flaps = half_flaps(&mesh, &he)?;
        let nv = mesh.vertex_count();
        let geometry: Vec<[f64; GEO_DIM]> = flaps.iter().map(|f| f.geometry(&mesh.vertices)).collect();
        let mut vertex_flaps = vec![Vec::new(); nv];
        for (fl, f) in flaps.iter().enumerate() {
            vertex_flaps[f.stencil[0]].push(fl);
        }
        if level == 0 {
            features = initial_features(&params.init_net, &geometry, &vertex_flaps, d);
        }

        let vertex_out = par_map_flaps(flaps.len(), |fl| {
            params
                .vertex_net
                .forward(&flap_input(&geometry[fl], &flaps[fl].stencil, &features, d))
        });
        let (even_disp, even_features) = average_outputs(&vertex_flaps, &flaps, &vertex_out, d);
        let moved: Vec<Vec3> = mesh.vertices.iter().zip(&even_disp).map(|(x, u)| x + u).collect();

        let edge_out = par_map_flaps(flaps.len(), |fl| {
            params
                .edge_net
                .forward(&flap_input(&geometry[fl], &flaps[fl].stencil, &even_features, d))
        });
        let sub = split_faces(&mesh);
        let edge_index: HashMap<(usize, usize), usize> =
            sub.edges.iter().enumerate().map(|(e, &[a, b])| ((a, b), e)).collect();
        let mut edge_flaps = vec![Vec::new(); sub.edges.len()];
        let mut edge_of_flap = Vec::with_capacity(flaps.len());
        for (fl, f) in flaps.iter().enumerate() {
            let (i, j) = (f.stencil[0], f.stencil[1]);
            let e = edge_index[&(i.min(j), i.max(j))];
            edge_flaps[e].push(fl);
            edge_of_flap.push(e);
        }
        let (odd_disp, odd_features) = average_outputs(&edge_flaps, &flaps, &edge_out, d);

        let mut next = sub.mesh;
        next.vertices[..nv].copy_from_slice(&moved);
        for (e, &[a, b]) in sub.edges.iter().enumerate() {
            next.vertices[nv + e] = (moved[a] + moved[b]) * 0.5 + odd_disp[e];
        }
        let mut next_features = even_features.clone();
        next_features.extend_from_slice(&odd_features);

        tapes.push(LevelTape {
            input: std::mem::replace(&mut mesh, next),
            features: std::mem::replace(&mut features, next_features),
            even_features,
            flaps,
            geometry,
            vertex_flaps,
            edge_flaps,
            edge_of_flap,
            edges: sub.edges,
        });
    }
    Ok(ForwardPass {
        mesh,
        features,
        levels: tapes,
    })
}

/// Forward pass returning only the refined mesh.
pub fn subdivide(params: &SubdivNetParams, coarse: &TriangleMesh, levels: usize) -> Result<TriangleMesh> {
    Ok(forward(params, coarse, levels)?.mesh)
}

/// Backpropagates `net` over every flap for which `make` yields `(input, dout)`.
///
/// Returns the accumulated parameter gradient and each flap's input gradient.
fn backprop_flaps(
    net: &Mlp,
    n: usize,
    make: impl Fn(usize) -> (Vec<f64>, Vec<f64>) + Sync + Send,
) -> (Mlp, Vec<Vec<f64>>) {
    let dims = net.dims();
    let chunks: Vec<(Mlp, Vec<Vec<f64>>)> = (0..n.div_ceil(FLAP_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut grad = Mlp::zeros(&dims);
            let range = c * FLAP_CHUNK..((c + 1) * FLAP_CHUNK).min(n);
            let dinputs = range
                .map(|fl| {
                    let (input, dout) = make(fl);
                    let cache = net.forward_cached(&input);
                    net.backward(&cache, &dout, &mut grad)
                })
                .collect();
            (grad, dinputs)
        })
        .collect();
    let mut total = Mlp::zeros(&dims);
    let mut dinputs = Vec::with_capacity(n);
    for (grad, di) in chunks {
        for (t, g) in total.params_mut().zip(grad.params()) {
            *t += g;
        }
        dinputs.extend(di);
    }
    (total, dinputs)
}

fn add_into(dst: &mut Mlp, src: &Mlp) {
    for (a, b) in dst.params_mut().zip(src.params()) {
        *a += b;
    }
}

/// Scatters the feature slices of flap input gradients onto stencil vertices.
fn scatter_features(dst: &mut [f64], flaps: &[HalfFlap], dinputs: &[Vec<f64>], d: usize) {
    for (f, di) in flaps.iter().zip(dinputs) {
        for (slot, &s) in f.stencil.iter().enumerate() {
            let src = &di[GEO_DIM + slot * d..GEO_DIM + (slot + 1) * d];
            for (a, b) in dst[s * d..(s + 1) * d].iter_mut().zip(src) {
                *a += b;
            }
        }
    }
}

/// Parameter gradients given `∂L/∂(output vertex positions)`.
pub fn backward_pass(params: &SubdivNetParams, pass: &ForwardPass, d_vertices: &[Vec3]) -> Result<SubdivNetParams> {
    let d = params.feature_dim;
    if d_vertices.len() != pass.mesh.vertex_count() {
        return Err(SubdivError::DimensionMismatch(format!(
            "{} vertex gradients for {} vertices",
            d_vertices.len(),
            pass.mesh.vertex_count()
        )));
    }
    let mut grad = params.zeros_like();
    let mut dx = d_vertices.to_vec();
    let mut df = vec![0.0; pass.features.len()];

    for (level, tape) in pass.levels.iter().enumerate().rev() {
        let nv = tape.input.vertex_count();
        let flaps = &tape.flaps;

        // Odd vertices: midpoint share to the moved endpoints, the rest into edge_net.
        let mut dx_even = dx[..nv].to_vec();
        for (e, &[a, b]) in tape.edges.iter().enumerate() {
            let half = dx[nv + e] * 0.5;
            dx_even[a] += half;
            dx_even[b] += half;
        }
        let (g_edge, dinputs) = backprop_flaps(&params.edge_net, flaps.len(), |fl| {
            let e = tape.edge_of_flap[fl];
            let c = tape.edge_flaps[e].len() as f64;
            let f = &flaps[fl];
            let mut dout = f.to_local(&dx[nv + e]).as_slice().to_vec();
            dout.extend_from_slice(&df[(nv + e) * d..(nv + e + 1) * d]);
            dout.iter_mut().for_each(|v| *v /= c);
            (flap_input(&tape.geometry[fl], &f.stencil, &tape.even_features, d), dout)
        });
        add_into(&mut grad.edge_net, &g_edge);
        let mut df_even = df[..nv * d].to_vec();
        scatter_features(&mut df_even, flaps, &dinputs, d);

        // Even vertices.
        let (g_vertex, dinputs) = backprop_flaps(&params.vertex_net, flaps.len(), |fl| {
            let f = &flaps[fl];
            let i = f.stencil[0];
            let n = tape.vertex_flaps[i].len() as f64;
            let mut dout = f.to_local(&dx_even[i]).as_slice().to_vec();
            dout.extend_from_slice(&df_even[i * d..(i + 1) * d]);
            dout.iter_mut().for_each(|v| *v /= n);
            (flap_input(&tape.geometry[fl], &f.stencil, &tape.features, d), dout)
        });
        add_into(&mut grad.vertex_net, &g_vertex);
        let mut df_prev = vec![0.0; nv * d];
        scatter_features(&mut df_prev, flaps, &dinputs, d);

        if level == 0 {
            let (g_init, _) = backprop_flaps(&params.init_net, flaps.len(), |fl| {
                let i = flaps[fl].stencil[0];
                let n = tape.vertex_flaps[i].len() as f64;
                let dout = df_prev[i * d..(i + 1) * d].iter().map(|v| v / n).collect();
                (tape.geometry[fl].to_vec(), dout)
            });
            add_into(&mut grad.init_net, &g_init);
        }
        dx = dx_even;
        df = df_prev;
    }

    for (net, name) in grad.nets().iter().zip(NET_NAMES) {
        if net.params().any(|p| !p.is_finite()) {
            return Err(SubdivError::NonFiniteGradient(name));
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DEFAULT_HIDDEN;
    use hrtf_core::{shapes, RigidTransform};

    #[test]
    fn zero_network_is_midpoint_subdivision() {
        let p = SubdivNetParams::zeros(8, &[16], 2);
        let m = shapes::ellipsoid(1, Vec3::new(1.0, 0.8, 0.5));
        let out = subdivide(&p, &m, 2).unwrap();
        let reference = split_faces(&split_faces(&m).mesh).mesh;
        assert_eq!(out.faces, reference.faces);
        assert!(out.vertices.iter().zip(&reference.vertices).all(|(a, b)| a == b));
    }

    #[test]
    fn face_count_and_topology() {
        let p = SubdivNetParams::new_random(8, &[16], 2, 1);
        let m = shapes::icosahedron();
        for levels in 0..3 {
            let out = subdivide(&p, &m, levels).unwrap();
            assert_eq!(out.face_count(), 20 * 4usize.pow(levels as u32));
            assert!(validate(&out).is_closed_sphere());
        }
    }

    #[test]
    fn rigid_equivariance() {
        let p = SubdivNetParams::new_random(8, &DEFAULT_HIDDEN, 2, 3);
        let m = shapes::ellipsoid(1, Vec3::new(1.0, 0.7, 0.5));
        let t = RigidTransform::from_axis_angle(Vec3::new(0.2, -1.0, 0.4), 1.1, Vec3::new(3.0, -2.0, 5.0));
        let moved = hrtf_core::apply_transform(&m, &t).unwrap();
        let a = subdivide(&p, &moved, 2).unwrap();
        let b = subdivide(&p, &m, 2).unwrap();
        let scale = 1.0 + t.translation.norm();
        for (x, y) in a.vertices.iter().zip(&b.vertices) {
            assert!((x - t.apply(y)).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = SubdivNetParams::new_random(4, &[8], 1, 1);
        assert!(matches!(subdivide(&p, &shapes::grid_plane(3, 1.0), 1), Err(SubdivError::Topology(_))));
        assert!(matches!(
            subdivide(&p, &shapes::torus(8, 6, 2.0, 0.5), 1),
            Err(SubdivError::Topology(_))
        ));
        let mut bad = p.clone();
        bad.feature_dim = 6;
        assert!(matches!(subdivide(&bad, &shapes::icosahedron(), 1), Err(SubdivError::DimensionMismatch(_))));
    }

    #[test]
    fn midpoint_refine_counts() {
        let m = midpoint_subdivide(&shapes::icosahedron()).unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (42, 80));
        assert_eq!(midpoint_subdivide(&m).unwrap().face_count(), 320);
        assert_eq!(validate(&m).genus, Some(0));
    }

    #[test]
    fn backward_linear_in_output_gradient() {
        let p = SubdivNetParams::new_random(4, &[8], 2, 5);
        let m = shapes::icosahedron();
        let pass = forward(&p, &m, 2).unwrap();
        let dv: Vec<Vec3> = (0..pass.mesh.vertex_count())
            .map(|i| Vec3::new((i as f64).sin(), (i as f64 * 0.3).cos(), 0.1))
            .collect();
        let g1 = backward_pass(&p, &pass, &dv).unwrap();
        let dv2: Vec<Vec3> = dv.iter().map(|v| v * 2.0).collect();
        let g2 = backward_pass(&p, &pass, &dv2).unwrap();
        for (a, b) in g1.params().zip(g2.params()) {
            assert_eq!(2.0 * a, *b);
        }
    }
}
