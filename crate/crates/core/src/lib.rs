//! Geometry foundation for the HRTF synthesis pipeline.
//!
//! The crate covers three layers:
//!
//! - mesh representation, STL/OBJ interchange, validation, half-edge
//!   connectivity, closest-point queries and Hausdorff distances;
//! - the pre-simulation preparation stages (alignment, beheading, clean-up,
//!   curvature-adaptive grading and ear/skin labeling) under [`prep`];
//! - normal-gated surface correspondence used as training supervision.
//!
//! All lengths are meters. Faces are counter-clockwise when viewed from
//! outside, so face normals point away from the enclosed volume.

pub mod bvh;
pub mod correspondence;
pub mod distance;
pub mod error;
pub mod halfedge;
pub mod io;
pub mod mesh;
pub mod prep;
pub mod shapes;
pub mod subdivide;
pub mod transform;
pub mod validate;

pub use bvh::{closest_on_triangle, point_to_triangle, ClosestHit, TriangleBvh};
pub use correspondence::{
    build_correspondence, project_point, resolve, CorrespondenceMap, Projection, SurfacePoint,
    TargetSurface,
};
pub use distance::{hausdorff, sample_points, HausdorffDistance};
pub use error::{MeshError, Result};
pub use halfedge::{build_half_edge, HalfEdge, HalfEdgeMesh};
pub use mesh::{Region, TriangleMesh, Vec3};
pub use subdivide::{midpoint_subdivide, MidpointSubdivision};
pub use transform::{apply_transform, RigidTransform};
pub use validate::{validate, ValidationReport};
