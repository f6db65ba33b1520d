//! Collocation system for the exterior Neumann problem.
//!
//! With `q = ∂p/∂n = iωρ·v_n` on the surface and outward normals, the
//! centroid rows read `½p_i - Σ_j K_ij p_j = -Σ_j S_ij q_j` and each CHIEF row
//! reads `-Σ_j K_cj p_j = -Σ_j S_cj q_j`, where `S` and `K` are element
//! integrals of `G` and `∂G/∂n_y`.

use faer::Mat;
use hrtf_core::{validate, Region, TriangleMesh, Vec3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::chief::chief_points;
use crate::config::AcousticConfig;
use crate::error::{BemError, Result};
use crate::quadrature::{regular_integrals, singular_single_layer, Element, TriangleRule, MAX_REFINE_DEPTH};

#[derive(Debug, Clone)]
pub struct BemSystem {
    /// `(N + C) × N`.
    pub matrix: Mat<Complex64>,
    /// One column per source.
    pub rhs: Mat<Complex64>,
    /// `∂p/∂n` on every face, per source.
    pub flux: Vec<Vec<Complex64>>,
    pub sources: Vec<Region>,
    pub chief_points: Vec<Vec3>,
    pub wavenumber: f64,
}

impl BemSystem {
    pub fn surface_rows(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Elements of a closed, outward-oriented mesh.
pub fn elements(mesh: &TriangleMesh) -> Result<Vec<Element>> {
    let report = validate(mesh);
    if !report.is_manifold || !report.is_watertight {
        return Err(BemError::Topology(format!(
            "{} boundary edges, {} non-manifold edges",
            report.boundary_edge_count, report.non_manifold_edge_count
        )));
    }
    if mesh.signed_volume() <= 0.0 {
        return Err(BemError::Topology("faces point inward".into()));
    }
    (0..mesh.face_count())
        .map(|f| Element::new(mesh.triangle(f)).ok_or(BemError::DegenerateElement(f)))
        .collect()
}

/// System for unit normal velocity on the faces labeled `source`.
pub fn assemble(mesh: &TriangleMesh, k: f64, cfg: &AcousticConfig, source: Region) -> Result<BemSystem> {
    assemble_sources(mesh, k, cfg, &[source])
}

/// One matrix with a right-hand side per source region.
pub fn assemble_sources(mesh: &TriangleMesh, k: f64, cfg: &AcousticConfig, sources: &[Region]) -> Result<BemSystem> {
    cfg.check()?;
    if !(k >= 0.0 && k.is_finite()) {
        return Err(BemError::InvalidConfig(format!("wavenumber must be non-negative, got {k}")));
    }
    let els = elements(mesh)?;
    let chief = chief_points(mesh, cfg.chief_point_count, cfg.chief_seed)?;
    let rule = TriangleRule::new(cfg.quadrature_order)?;
    let iwr = Complex64::new(0.0, k * cfg.sound_speed * cfg.density);

    let mut flux = Vec::with_capacity(sources.len());
    for &region in sources {
        let faces = mesh.faces_with_label(region);
        if faces.is_empty() {
            return Err(BemError::NoSourceFaces(region));
        }
        let mut q = vec![Complex64::new(0.0, 0.0); els.len()];
        for f in faces {
            q[f] = iwr;
        }
        flux.push(q);
    }
    let (matrix, rhs) = build(k, &els, &chief, &rule, &flux);
    Ok(BemSystem {
        matrix,
        rhs,
        flux,
        sources: sources.to_vec(),
        chief_points: chief,
        wavenumber: k,
    })
}

/// Dense matrix and right-hand sides. Every entry is computed independently,
/// so the result does not depend on scheduling.
pub(crate) fn build(
    k: f64,
    els: &[Element],
    chief: &[Vec3],
    rule: &TriangleRule,
    flux: &[Vec<Complex64>],
) -> (Mat<Complex64>, Mat<Complex64>) {
    let n = els.len();
    let m = n + chief.len();
    let row_point = |i: usize| if i < n { els[i].centroid } else { chief[i - n] };

    let mut matrix = Mat::<Complex64>::zeros(m, n);
    matrix.as_mut().par_col_iter_mut().enumerate().for_each(|(j, col)| {
        let col = col.try_as_col_major_mut().expect("owned matrix is column major").as_slice_mut();
        for (i, entry) in col.iter_mut().enumerate() {
            *entry = if i == j {
                Complex64::new(0.5, 0.0)
            } else {
                -regular_integrals(k, &row_point(i), &els[j], rule, MAX_REFINE_DEPTH).1
            };
        }
    });

    // Single-layer columns are needed only where some source has flux.
    let active: Vec<usize> = (0..n).filter(|&j| flux.iter().any(|q| q[j] != Complex64::new(0.0, 0.0))).collect();
    let rows: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = row_point(i);
            let mut out = vec![Complex64::new(0.0, 0.0); flux.len()];
            for &j in &active {
                let s = if i == j {
                    singular_single_layer(k, &els[j])
                } else {
                    regular_integrals(k, &x, &els[j], rule, MAX_REFINE_DEPTH).0
                };
                for (o, q) in out.iter_mut().zip(flux) {
                    *o -= s * q[j];
                }
            }
            out
        })
        .collect();
    let rhs = Mat::from_fn(m, flux.len(), |i, c| rows[i][c]);
    (matrix, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hrtf_core::shapes;

    fn labeled_sphere(level: usize, r: f64) -> TriangleMesh {
        let m = shapes::icosphere(level, r);
        let labels = (0..m.face_count())
            .map(|f| if m.face_centroid(f).x > 0.8 * r { Region::LeftEar } else { Region::Skin })
            .collect();
        m.with_labels(labels).unwrap()
    }

    #[test]
    fn row_count_includes_chief_points() {
        let m = labeled_sphere(1, 0.1);
        let cfg = AcousticConfig { chief_point_count: 6, ..Default::default() };
        let s = assemble(&m, 10.0, &cfg, Region::LeftEar).unwrap();
        assert_eq!(s.matrix.nrows(), 80 + 6);
        assert_eq!(s.matrix.ncols(), 80);
        assert_eq!(s.rhs.nrows(), 86);
        assert_eq!(s.rhs.ncols(), 1);
    }

    #[test]
    fn missing_source_and_open_mesh_rejected() {
        let m = labeled_sphere(1, 0.1);
        let cfg = AcousticConfig::default();
        assert!(matches!(assemble(&m, 1.0, &cfg, Region::RightEar), Err(BemError::NoSourceFaces(Region::RightEar))));
        let open = shapes::grid_plane(3, 1.0);
        let open = open.clone().with_labels(vec![Region::LeftEar; open.face_count()]).unwrap();
        assert!(matches!(assemble(&open, 1.0, &cfg, Region::LeftEar), Err(BemError::Topology(_))));
    }

    #[test]
    fn static_double_layer_rows_sum_to_solid_angle() {
        // Gauss: ∫ ∂(1/4πr)/∂n_y dS = -½ at a smooth surface point and -1 inside,
        // so surface rows sum to ≈ 1 and CHIEF rows to ≈ 1 at k = 0.
        let m = labeled_sphere(3, 0.1);
        let cfg = AcousticConfig::default();
        let s = assemble(&m, 0.0, &cfg, Region::LeftEar).unwrap();
        for i in 0..s.matrix.nrows() {
            let sum: Complex64 = (0..s.matrix.ncols()).map(|j| s.matrix[(i, j)]).sum();
            let tol = if i < s.matrix.ncols() { 2e-2 } else { 1e-6 };
            assert!((sum.re - 1.0).abs() < tol && sum.im.abs() < 1e-12, "row {i}: {sum}");
        }
    }

    #[test]
    fn assembly_is_bitwise_repeatable_across_pools() {
        let m = labeled_sphere(1, 0.1);
        let cfg = AcousticConfig::default();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| assemble(&m, 25.0, &cfg, Region::LeftEar).unwrap())
        };
        let (a, b) = (run(1), run(3));
        assert!(a.matrix == b.matrix);
        assert!(a.rhs == b.rhs);
    }
}
