//! HRTF synthesis by reciprocity: each ear is driven with unit normal velocity
//! and the radiated pressure is sampled on the evaluation grid.

use hrtf_core::{Region, TriangleMesh, Vec3};
use num_complex::Complex64;

use crate::analytic::{analytic_sphere_response, required_terms, SphereSource};
use crate::assemble::{assemble_sources, elements};
use crate::config::{AcousticConfig, EvalGrid, Medium};
use crate::error::{BemError, Result};
use crate::field::{evaluate_field, SurfaceData};
use crate::green::FOUR_PI;
use crate::hrtf::{Ear, GridPoint, HrtfSet};
use crate::solve::solve;

/// A frequency that could not be solved.
#[derive(Debug)]
pub struct FrequencyFailure {
    pub frequency: f64,
    pub error: BemError,
}

#[derive(Debug)]
pub struct Synthesis {
    /// Holds only the frequencies that succeeded.
    pub set: HrtfSet,
    pub failures: Vec<FrequencyFailure>,
}

/// Free-field pressure at distance `r` from a point source of volume velocity `q`:
/// `-iωρQ e^{ikr}/(4πr)`.
pub fn free_field_reference(k: f64, r: f64, q: f64, medium: &Medium) -> Complex64 {
    let iwr = Complex64::new(0.0, k * medium.sound_speed * medium.density);
    -iwr * q * Complex64::cis(k * r) / (FOUR_PI * r)
}

/// Transfer value from a radiated pressure. The conjugate turns the solver's
/// `e^{-iωt}` phase into the `e^{+iωt}` convention used for impulse responses.
pub fn transfer_value(p: Complex64, reference: Complex64) -> Complex64 {
    (p / reference).conj()
}

/// Largest edge allowed at `frequency` for six elements per wavelength.
pub fn max_edge_for(frequency: f64, sound_speed: f64) -> f64 {
    sound_speed / frequency / 6.0
}

pub fn synthesize_hrtf(mesh: &TriangleMesh, cfg: &AcousticConfig, grid: &EvalGrid) -> Result<Synthesis> {
    cfg.check()?;
    grid.check()?;
    let els = elements(mesh)?;
    let ears: Vec<Ear> = [Ear::Left, Ear::Right]
        .into_iter()
        .filter(|e| !mesh.faces_with_label(e.region()).is_empty())
        .collect();
    if ears.is_empty() {
        return Err(BemError::NoSourceFaces(Region::LeftEar));
    }
    let circumradius = mesh.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if grid.radius <= circumradius {
        return Err(BemError::InvalidGrid(format!(
            "radius {} m does not exceed the mesh circumradius {circumradius} m",
            grid.radius
        )));
    }
    let f_max = *cfg.frequencies.last().expect("checked non-empty");
    let edge = mesh.max_edge_length();
    let limit = max_edge_for(f_max, cfg.sound_speed);
    if edge > limit {
        log::warn!("max edge {edge:.4} m exceeds λ/6 = {limit:.4} m at {f_max} Hz");
    }

    let regions: Vec<Region> = ears.iter().map(|e| e.region()).collect();
    let volume_velocity: Vec<f64> = regions
        .iter()
        .map(|r| mesh.faces_with_label(*r).iter().map(|&f| els[f].area).sum())
        .collect();
    let points: Vec<Vec3> = grid.points();
    let medium = cfg.medium();

    let mut frequencies = Vec::new();
    // columns[f][ear][direction]
    let mut columns: Vec<Vec<Vec<Complex64>>> = Vec::new();
    let mut failures = Vec::new();
    for &f in &cfg.frequencies {
        let k = cfg.wavenumber(f);
        let solved = (|| -> Result<Vec<Vec<Complex64>>> {
            let system = assemble_sources(mesh, k, cfg, &regions)?;
            let surface = solve(&system)?;
            let mut per_ear = Vec::with_capacity(regions.len());
            for (e, q) in volume_velocity.iter().enumerate() {
                let data = SurfaceData {
                    pressure: &surface.pressure[e],
                    flux: &system.flux[e],
                };
                let p = evaluate_field(mesh, &data, k, &points, cfg.quadrature_order)?;
                let reference = free_field_reference(k, grid.radius, *q, &medium);
                per_ear.push(p.iter().map(|p| transfer_value(*p, reference)).collect());
            }
            Ok(per_ear)
        })();
        match solved {
            Ok(v) => {
                log::info!("{f} Hz solved");
                frequencies.push(f);
                columns.push(v);
            }
            Err(error) => {
                log::error!("{f} Hz failed: {error}");
                failures.push(FrequencyFailure { frequency: f, error });
            }
        }
    }
    if frequencies.is_empty() {
        return Err(failures.remove(0).error);
    }

    let mut values = Vec::with_capacity(points.len() * ears.len() * frequencies.len());
    for d in 0..points.len() {
        for e in 0..ears.len() {
            values.extend(columns.iter().map(|c| c[e][d]));
        }
    }
    let directions = grid
        .directions
        .iter()
        .map(|d| GridPoint { az: d.az, el: d.el, r: grid.radius })
        .collect();
    let set = HrtfSet::new(directions, frequencies, ears, values)?;
    Ok(Synthesis { set, failures })
}

/// Series terms added beyond [`required_terms`] by default.
pub const DEFAULT_EXTRA_TERMS: usize = 20;

/// HRTF set of a rigid sphere with cap sources, from the analytic series.
///
/// Uses the same reference and conjugation as [`synthesize_hrtf`], so the two
/// are directly comparable. `terms` defaults to the required count plus
/// [`DEFAULT_EXTRA_TERMS`].
pub fn sphere_oracle(
    radius: f64,
    sources: &[(Ear, SphereSource)],
    cfg: &AcousticConfig,
    grid: &EvalGrid,
    terms: Option<usize>,
) -> Result<HrtfSet> {
    cfg.check()?;
    grid.check()?;
    if sources.is_empty() {
        return Err(BemError::InvalidConfig("no oracle sources".into()));
    }
    let points = grid.points();
    let medium = cfg.medium();
    let nf = cfg.frequencies.len();
    // per_ear[e][d * nf + f]
    let mut per_ear = vec![vec![Complex64::new(0.0, 0.0); points.len() * nf]; sources.len()];
    for (fi, &f) in cfg.frequencies.iter().enumerate() {
        let k = cfg.wavenumber(f);
        let n = terms.unwrap_or(required_terms(k, radius) + DEFAULT_EXTRA_TERMS);
        for (e, (_, src)) in sources.iter().enumerate() {
            let series = analytic_sphere_response(radius, src, &points, k, n, &medium)?;
            let reference = free_field_reference(k, grid.radius, src.volume_velocity, &medium);
            for (d, p) in series.pressure.iter().enumerate() {
                per_ear[e][d * nf + fi] = transfer_value(*p, reference);
            }
        }
    }
    let mut values = Vec::with_capacity(points.len() * sources.len() * nf);
    for d in 0..points.len() {
        for ear in &per_ear {
            values.extend_from_slice(&ear[d * nf..(d + 1) * nf]);
        }
    }
    let directions = grid
        .directions
        .iter()
        .map(|d| GridPoint { az: d.az, el: d.el, r: grid.radius })
        .collect();
    HrtfSet::new(directions, cfg.frequencies.clone(), sources.iter().map(|s| s.0).collect(), values)
}

/// Uniform spherical cap with the area and area-weighted direction of the
/// faces labeled `region` on a sphere of radius `radius` about the origin.
pub fn equivalent_cap_source(mesh: &TriangleMesh, region: Region, radius: f64) -> Result<SphereSource> {
    let faces = mesh.faces_with_label(region);
    if faces.is_empty() {
        return Err(BemError::NoSourceFaces(region));
    }
    let area: f64 = faces.iter().map(|&f| mesh.face_area(f)).sum();
    let center: Vec3 = faces.iter().map(|&f| mesh.face_centroid(f) * mesh.face_area(f)).sum();
    let cos_alpha = 1.0 - area / (2.0 * std::f64::consts::PI * radius * radius);
    if !(-1.0..1.0).contains(&cos_alpha) || center.norm() == 0.0 {
        return Err(BemError::InvalidConfig(format!("patch of area {area} m² has no equivalent cap")));
    }
    Ok(SphereSource {
        position: center.normalize() * radius,
        volume_velocity: area,
        cap_half_angle: cos_alpha.acos(),
    })
}

/// Labels the faces whose centroids lie within `patch_radius` of each center
/// (the nearest face when none does); all other faces become skin.
pub fn label_patches(mesh: TriangleMesh, patches: &[(Region, Vec3)], patch_radius: f64) -> Result<TriangleMesh> {
    let centroids: Vec<Vec3> = (0..mesh.face_count()).map(|f| mesh.face_centroid(f)).collect();
    let mut labels = vec![Region::Skin; mesh.face_count()];
    for (region, center) in patches {
        let mut any = false;
        for (f, c) in centroids.iter().enumerate() {
            if (c - center).norm() <= patch_radius {
                labels[f] = *region;
                any = true;
            }
        }
        if !any {
            let nearest = (0..centroids.len())
                .min_by(|&a, &b| (centroids[a] - center).norm().total_cmp(&(centroids[b] - center).norm()))
                .ok_or(BemError::NoSourceFaces(*region))?;
            labels[nearest] = *region;
        }
    }
    Ok(mesh.with_labels(labels)?)
}
