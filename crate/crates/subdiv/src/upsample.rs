use hrtf_core::distance::DEFAULT_SAMPLES_PER_FACE;
use hrtf_core::{hausdorff, HausdorffDistance, TriangleMesh};

use crate::error::Result;
use crate::model::{check_input, subdivide};
use crate::params::SubdivNetParams;

#[derive(Debug, Clone)]
pub struct Upsampled {
    pub mesh: TriangleMesh,
    /// Against the ground truth, when one was supplied.
    pub hausdorff: Option<HausdorffDistance>,
}

/// Inference-only refinement. `levels = 0` returns the input unchanged.
pub fn upsample(
    params: &SubdivNetParams,
    mesh: &TriangleMesh,
    levels: usize,
    truth: Option<&TriangleMesh>,
) -> Result<Upsampled> {
    let out = if levels == 0 {
        params.check()?;
        check_input(mesh)?;
        mesh.clone()
    } else {
        subdivide(params, mesh, levels)?
    };
    let hausdorff = truth.map(|t| hausdorff(&out, t, DEFAULT_SAMPLES_PER_FACE));
    Ok(Upsampled { mesh: out, hausdorff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hrtf_core::{shapes, validate};

    #[test]
    fn zero_levels_is_identity() {
        let p = SubdivNetParams::new_random(4, &[8], 2, 0);
        let m = shapes::icosphere(1, 1.0);
        let out = upsample(&p, &m, 0, None).unwrap();
        assert_eq!(out.mesh, m);
    }

    #[test]
    fn output_is_closed_sphere_with_report() {
        let p = SubdivNetParams::new_random(4, &[8], 2, 0);
        let m = shapes::icosphere(1, 1.0);
        let truth = shapes::icosphere(3, 1.0);
        let out = upsample(&p, &m, 2, Some(&truth)).unwrap();
        assert!(validate(&out.mesh).is_closed_sphere());
        assert!(out.hausdorff.unwrap().symmetric > 0.0);
    }
}
