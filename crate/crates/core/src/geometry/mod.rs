//! Triangle scenes with two-sided material tags, ray casting, and the launch aperture.

mod bvh;
mod launch;
pub mod mesh;
mod scene;

pub use launch::{launch_rect, transverse_axes, LaunchRect};
pub use mesh::{parse_material_map, parse_obj, write_obj, MaterialMap, ObjMesh};
pub use scene::{load_scene, Hit, Interaction, Scene, TriangleSpec, AMBIENT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("mesh line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("material map: {0}")]
    MaterialMap(String),
    #[error("unknown material '{0}'")]
    UnknownMaterial(String),
    #[error("mesh group '{0}' has no entry in the material map")]
    UnknownGroup(String),
    #[error("triangle {0} references a missing vertex or material")]
    BadIndex(usize),
    #[error("triangle {0} has zero area")]
    DegenerateTriangle(usize),
    #[error("region '{material}' is not a closed, consistently oriented surface: {detail}")]
    NonManifold { material: String, detail: String },
    #[error("scene has no triangles")]
    Empty,
}
