use std::collections::HashMap;

use super::bvh::{Aabb, Bvh};
use super::mesh::{parse_material_map, parse_obj};
use super::SceneError;
use crate::em::Material;
use crate::Vec3;

/// One triangle before scene assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriangleSpec {
    /// Counter-clockwise around the front normal.
    pub v: [u32; 3],
    pub front: u16,
    pub back: u16,
}

#[derive(Debug, Clone, Copy)]
struct TriData {
    v0: Vec3,
    e1: Vec3,
    e2: Vec3,
    normal: Vec3,
}

/// How a surface interaction is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    /// Either side is a conductor.
    Pec,
    /// From the ambient medium into a dielectric.
    Entering,
    /// From a dielectric out into the ambient medium.
    Exiting,
    /// Between two non-ambient dielectrics, or ambient on both sides.
    Internal,
}

/// Nearest ray/surface intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub point: Vec3,
    /// Faces the incoming ray.
    pub normal: Vec3,
    pub triangle: u32,
    pub near_material: u16,
    pub far_material: u16,
    pub n_incident: f64,
    pub n_transmit: f64,
    pub far_side_pec: bool,
    pub exterior_facing: bool,
}

impl Hit {
    pub fn interaction(&self) -> Interaction {
        if self.far_side_pec {
            Interaction::Pec
        } else if self.near_material == AMBIENT && self.far_material != AMBIENT {
            Interaction::Entering
        } else if self.near_material != AMBIENT && self.far_material == AMBIENT {
            Interaction::Exiting
        } else {
            Interaction::Internal
        }
    }
}

/// Material id of the surrounding medium.
pub const AMBIENT: u16 = 0;

/// Immutable triangle scene with two-sided material tags and a BVH.
#[derive(Debug, Clone)]
pub struct Scene {
    vertices: Vec<Vec3>,
    triangles: Vec<TriangleSpec>,
    tri: Vec<TriData>,
    materials: Vec<Material>,
    bvh: Bvh,
    center: Vec3,
    radius: f64,
}

impl Scene {
    /// Assembles and validates a scene. `materials[0]` is the ambient medium.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<TriangleSpec>, materials: Vec<Material>) -> Result<Self, SceneError> {
        if triangles.is_empty() {
            return Err(SceneError::Empty);
        }
        if materials.is_empty() || materials[0].is_pec {
            return Err(SceneError::MaterialMap("material 0 must be a non-conducting ambient medium".into()));
        }
        for m in &materials {
            m.validate().map_err(SceneError::MaterialMap)?;
        }
        let mut bbox = Aabb::empty();
        for v in &vertices {
            if !v.is_finite() {
                return Err(SceneError::MaterialMap("non-finite vertex coordinate".into()));
            }
            bbox.grow(*v);
        }
        let center = bbox.centroid();
        let radius = vertices.iter().map(|v| (*v - center).norm()).fold(0.0, f64::max);
        let scale2 = (2.0 * radius).powi(2).max(f64::MIN_POSITIVE);

        let mut tri = Vec::with_capacity(triangles.len());
        let mut prim_bounds = Vec::with_capacity(triangles.len());
        for (id, t) in triangles.iter().enumerate() {
            if t.v.iter().any(|&i| i as usize >= vertices.len()) {
                return Err(SceneError::BadIndex(id));
            }
            if t.front as usize >= materials.len() || t.back as usize >= materials.len() {
                return Err(SceneError::BadIndex(id));
            }
            let [a, b, c] = t.v.map(|i| vertices[i as usize]);
            let e1 = b - a;
            let e2 = c - a;
            let cr = e1.cross(e2);
            if cr.norm_squared() <= 1e-24 * scale2 * scale2 {
                return Err(SceneError::DegenerateTriangle(id));
            }
            tri.push(TriData { v0: a, e1, e2, normal: cr.normalize() });
            let mut bb = Aabb::empty();
            bb.grow(a);
            bb.grow(b);
            bb.grow(c);
            prim_bounds.push(bb);
        }
        let bvh = Bvh::build(&prim_bounds);
        let scene = Self { vertices, triangles, tri, materials, bvh, center, radius };
        scene.validate_regions()?;
        Ok(scene)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[TriangleSpec] {
        &self.triangles
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn ambient_index(&self) -> f64 {
        self.materials[AMBIENT as usize].refractive_index()
    }

    /// Unit front normal of a triangle.
    pub fn normal(&self, id: u32) -> Vec3 {
        self.tri[id as usize].normal
    }

    pub fn triangle_area(&self, id: u32) -> f64 {
        let t = &self.tri[id as usize];
        0.5 * t.e1.cross(t.e2).norm()
    }

    /// Centre and radius of a sphere enclosing every vertex.
    pub fn bounding_sphere(&self) -> (Vec3, f64) {
        (self.center, self.radius)
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// Self-intersection offset applied to secondary ray origins.
    pub fn epsilon(&self) -> f64 {
        1e-6 * self.diameter().max(f64::MIN_POSITIVE)
    }

    /// Nearest hit with `t > t_min`. Ties in `t` go to the smallest triangle id.
    pub fn intersect(&self, origin: Vec3, dir: Vec3, t_min: f64) -> Option<Hit> {
        let mut best_t = f64::INFINITY;
        let mut best_id = u32::MAX;
        self.bvh.traverse(origin, dir, t_min, f64::INFINITY, |id| {
            if let Some(t) = self.tri_hit(id, origin, dir, t_min) {
                if t < best_t || (t == best_t && id < best_id) {
                    best_t = t;
                    best_id = id;
                }
            }
            best_t
        });
        (best_id != u32::MAX).then(|| self.make_hit(best_id, best_t, origin, dir))
    }

    /// Reference intersector testing every triangle.
    pub fn intersect_brute_force(&self, origin: Vec3, dir: Vec3, t_min: f64) -> Option<Hit> {
        let mut best: Option<(f64, u32)> = None;
        for id in 0..self.tri.len() as u32 {
            if let Some(t) = self.tri_hit(id, origin, dir, t_min) {
                if best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, id));
                }
            }
        }
        best.map(|(t, id)| self.make_hit(id, t, origin, dir))
    }

    /// True when anything lies along `dir` beyond the self-intersection offset.
    pub fn occluded(&self, point: Vec3, dir: Vec3) -> bool {
        let origin = point + dir * self.epsilon();
        let mut found = false;
        self.bvh.traverse(origin, dir, 0.0, f64::INFINITY, |id| {
            if found || self.tri_hit(id, origin, dir, 0.0).is_some() {
                found = true;
                return f64::NEG_INFINITY;
            }
            f64::INFINITY
        });
        found
    }

    /// Möller–Trumbore with a slightly inclusive barycentric test so shared edges are never missed.
    #[inline]
    fn tri_hit(&self, id: u32, origin: Vec3, dir: Vec3, t_min: f64) -> Option<f64> {
        const EDGE_TOL: f64 = 1e-12;
        let t = &self.tri[id as usize];
        let p = dir.cross(t.e2);
        let det = t.e1.dot(p);
        if det.abs() < 1e-300 {
            return None;
        }
        let inv = 1.0 / det;
        let s = origin - t.v0;
        let u = s.dot(p) * inv;
        if !(-EDGE_TOL..=1.0 + EDGE_TOL).contains(&u) {
            return None;
        }
        let q = s.cross(t.e1);
        let v = dir.dot(q) * inv;
        if v < -EDGE_TOL || u + v > 1.0 + EDGE_TOL {
            return None;
        }
        let dist = t.e2.dot(q) * inv;
        (dist > t_min && dist.is_finite()).then_some(dist)
    }

    fn make_hit(&self, id: u32, t: f64, origin: Vec3, dir: Vec3) -> Hit {
        let spec = &self.triangles[id as usize];
        let n = self.tri[id as usize].normal;
        let (normal, mut near, far) = if dir.dot(n) < 0.0 { (n, spec.front, spec.back) } else { (-n, spec.back, spec.front) };
        let near_pec = self.materials[near as usize].is_pec;
        let far_pec = self.materials[far as usize].is_pec;
        if near_pec {
            near = AMBIENT;
        }
        let index = |m: u16| {
            let mat = &self.materials[m as usize];
            if mat.is_pec {
                self.ambient_index()
            } else {
                mat.refractive_index()
            }
        };
        Hit {
            t,
            point: origin + dir * t,
            normal,
            triangle: id,
            near_material: near,
            far_material: far,
            n_incident: index(near),
            n_transmit: index(far),
            far_side_pec: near_pec || far_pec,
            exterior_facing: near == AMBIENT || far == AMBIENT,
        }
    }

    /// Every dielectric region must be bounded by closed shells whose normals point out of it.
    fn validate_regions(&self) -> Result<(), SceneError> {
        // weld coincident vertices so meshes with duplicated corners still validate
        let mut weld: HashMap<[u64; 3], u32> = HashMap::new();
        let canon: Vec<u32> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| *weld.entry([v.x.to_bits(), v.y.to_bits(), v.z.to_bits()]).or_insert(i as u32))
            .collect();

        for (mid, mat) in self.materials.iter().enumerate().skip(1) {
            if mat.is_pec {
                continue;
            }
            let mid = mid as u16;
            let mut edges: HashMap<(u32, u32), i32> = HashMap::new();
            let mut any = false;
            for t in &self.triangles {
                if t.front == t.back {
                    continue;
                }
                let v = t.v.map(|i| canon[i as usize]);
                let ordered = if t.back == mid {
                    v
                } else if t.front == mid {
                    [v[0], v[2], v[1]]
                } else {
                    continue;
                };
                any = true;
                for k in 0..3 {
                    *edges.entry((ordered[k], ordered[(k + 1) % 3])).or_default() += 1;
                }
            }
            if !any {
                continue;
            }
            for (&(a, b), &count) in &edges {
                let reverse = edges.get(&(b, a)).copied().unwrap_or(0);
                if count != 1 || reverse != 1 {
                    return Err(SceneError::NonManifold {
                        material: mat.name.clone(),
                        detail: format!("edge ({a}, {b}) used {count} times, reverse {reverse} times"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Parses an OBJ mesh and its TOML material map into a scene.
pub fn load_scene(mesh_text: &str, material_map_text: &str) -> Result<Scene, SceneError> {
    let mesh = parse_obj(mesh_text)?;
    let map = parse_material_map(material_map_text)?;
    let mut tris = Vec::with_capacity(mesh.faces.len());
    for (group, v) in &mesh.faces {
        let &(front, back) = map.groups.get(group).ok_or_else(|| SceneError::UnknownGroup(group.clone()))?;
        tris.push(TriangleSpec { v: *v, front, back });
    }
    Scene::new(mesh.vertices, tris, map.materials)
}
