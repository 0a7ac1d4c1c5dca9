//! Parameterised test scenes, produced as an OBJ mesh plus a material map so they go
//! through the same loader as user files.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::geometry::{load_scene, write_obj, ObjMesh, Scene, SceneError};
use crate::oracles::LayerStack;
use crate::Vec3;

pub const BUILTIN_NAMES: [&str; 9] =
    ["plate", "sphere", "pec_cube", "dihedral", "glass_cube", "glass_cube_pec_bottom", "nested", "airplane_stub", "layered"];

/// Mesh and material-map text of one scene.
#[derive(Debug, Clone)]
pub struct SceneSource {
    pub mesh: ObjMesh,
    pub material_map: String,
}

impl SceneSource {
    pub fn obj_text(&self) -> String {
        write_obj(&self.mesh)
    }

    pub fn load(&self) -> Result<Scene, SceneError> {
        load_scene(&self.obj_text(), &self.material_map)
    }
}

/// Accumulates triangles by group, sharing identical vertices.
#[derive(Debug, Default)]
pub struct MeshBuilder {
    mesh: ObjMesh,
    index: HashMap<[u64; 3], u32>,
}

impl MeshBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, p: Vec3) -> u32 {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        let n = self.mesh.vertices.len() as u32;
        *self.index.entry(key).or_insert_with(|| {
            self.mesh.vertices.push(p);
            n
        })
    }

    /// Triangle with counter-clockwise winding seen from the front side.
    pub fn triangle(&mut self, group: &str, a: Vec3, b: Vec3, c: Vec3) {
        let v = [self.vertex(a), self.vertex(b), self.vertex(c)];
        self.mesh.faces.push((group.to_string(), v));
    }

    /// Planar quad `a b c d` in counter-clockwise order from the front.
    pub fn quad(&mut self, group: &str, a: Vec3, b: Vec3, c: Vec3, d: Vec3) {
        self.triangle(group, a, b, c);
        self.triangle(group, a, c, d);
    }

    /// Axis-aligned box with outward normals. `groups` names the faces in the order
    /// −x, +x, −y, +y, −z, +z.
    pub fn cuboid(&mut self, groups: [&str; 6], lo: Vec3, hi: Vec3) {
        let p = |i: usize| {
            Vec3::new(if i & 1 == 0 { lo.x } else { hi.x }, if i & 2 == 0 { lo.y } else { hi.y }, if i & 4 == 0 { lo.z } else { hi.z })
        };
        let faces = [[0, 4, 6, 2], [1, 3, 7, 5], [0, 1, 5, 4], [2, 6, 7, 3], [0, 2, 3, 1], [4, 5, 7, 6]];
        for (g, f) in groups.iter().zip(faces) {
            self.quad(g, p(f[0]), p(f[1]), p(f[2]), p(f[3]));
        }
    }

    /// Cube of side `size` centred at `center`, every face in `group`.
    pub fn cube(&mut self, group: &str, center: Vec3, size: f64) {
        let h = Vec3::new(size, size, size) * 0.5;
        self.cuboid([group; 6], center - h, center + h);
    }

    /// Geodesic sphere: an icosahedron split `subdivisions` times, vertices on the sphere.
    pub fn icosphere(&mut self, group: &str, center: Vec3, radius: f64, subdivisions: u32) {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vec3> = [
            (-1.0, t, 0.0),
            (1.0, t, 0.0),
            (-1.0, -t, 0.0),
            (1.0, -t, 0.0),
            (0.0, -1.0, t),
            (0.0, 1.0, t),
            (0.0, -1.0, -t),
            (0.0, 1.0, -t),
            (t, 0.0, -1.0),
            (t, 0.0, 1.0),
            (-t, 0.0, -1.0),
            (-t, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
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
        for _ in 0..subdivisions {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(faces.len() * 4);
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                    verts.len() - 1
                })
            };
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let pts: Vec<Vec3> = verts.iter().map(|v| center + *v * radius).collect();
        for [a, b, c] in faces {
            self.triangle(group, pts[a], pts[b], pts[c]);
        }
    }

    pub fn finish(self) -> ObjMesh {
        self.mesh
    }
}

fn map_text(materials: &[(&str, Option<f64>)], groups: &[(&str, &str, &str)]) -> String {
    let mut s = String::new();
    for (name, eps) in materials {
        match eps {
            Some(e) => {
                let _ = writeln!(s, "[materials.{name}]\neps_r = {e:?}\n");
            }
            None => {
                let _ = writeln!(s, "[materials.{name}]\npec = true\n");
            }
        }
    }
    for (g, front, back) in groups {
        let _ = writeln!(s, "[groups.{g}]\nfront = \"{front}\"\nback = \"{back}\"\n");
    }
    s
}

/// Conducting `a × b` plate in the plane `z = height`, facing +z.
pub fn plate(a: f64, b: f64, height: f64) -> SceneSource {
    let mut m = MeshBuilder::new();
    let (x, y) = (a / 2.0, b / 2.0);
    let p = |u: f64, v: f64| Vec3::new(u, v, height);
    m.quad("plate", p(-x, -y), p(x, -y), p(x, y), p(-x, y));
    SceneSource { mesh: m.finish(), material_map: map_text(&[("metal", None)], &[("plate", "air", "metal")]) }
}

pub fn pec_sphere(radius: f64, subdivisions: u32) -> SceneSource {
    let mut m = MeshBuilder::new();
    m.icosphere("sphere", Vec3::zero(), radius, subdivisions);
    SceneSource { mesh: m.finish(), material_map: map_text(&[("metal", None)], &[("sphere", "air", "metal")]) }
}

pub fn pec_cube(size: f64) -> SceneSource {
    let mut m = MeshBuilder::new();
    m.cube("cube", Vec3::zero(), size);
    SceneSource { mesh: m.finish(), material_map: map_text(&[("metal", None)], &[("cube", "air", "metal")]) }
}

/// Right-angle conducting dihedral opening towards +z. The seam runs along the y axis
/// through the origin; each face is `leg` wide and `length` long.
pub fn dihedral(leg: f64, length: f64) -> SceneSource {
    let mut m = MeshBuilder::new();
    let s = leg / 2f64.sqrt();
    let y = length / 2.0;
    let seam = |v: f64| Vec3::new(0.0, v, 0.0);
    let right = |v: f64| Vec3::new(s, v, s);
    let left = |v: f64| Vec3::new(-s, v, s);
    // inner faces look into the opening
    m.quad("right", seam(y), seam(-y), right(-y), right(y));
    m.quad("left", seam(-y), seam(y), left(y), left(-y));
    let map = map_text(&[("metal", None)], &[("right", "air", "metal"), ("left", "air", "metal")]);
    SceneSource { mesh: m.finish(), material_map: map }
}

/// Dielectric cube of side `size` centred at the origin.
pub fn glass_cube(size: f64, eps_r: f64) -> SceneSource {
    let mut m = MeshBuilder::new();
    m.cube("cube", Vec3::zero(), size);
    SceneSource { mesh: m.finish(), material_map: map_text(&[("glass", Some(eps_r))], &[("cube", "air", "glass")]) }
}

/// Dielectric cube whose bottom (−z) face is a conductor.
pub fn glass_cube_pec_bottom(size: f64, eps_r: f64) -> SceneSource {
    let mut m = MeshBuilder::new();
    let h = Vec3::new(size, size, size) * 0.5;
    m.cuboid(["sides", "sides", "sides", "sides", "bottom", "sides"], -h, h);
    let map = map_text(&[("glass", Some(eps_r)), ("metal", None)], &[("sides", "air", "glass"), ("bottom", "metal", "glass")]);
    SceneSource { mesh: m.finish(), material_map: map }
}

/// Outer dielectric cube holding a denser cube that holds a conducting sphere.
pub fn nested(outer: f64, outer_eps: f64, inner: f64, inner_eps: f64, sphere_radius: f64, subdivisions: u32) -> SceneSource {
    let mut m = MeshBuilder::new();
    m.cube("outer", Vec3::zero(), outer);
    m.cube("inner", Vec3::zero(), inner);
    m.icosphere("core", Vec3::zero(), sphere_radius, subdivisions);
    let map = map_text(
        &[("outer_glass", Some(outer_eps)), ("inner_glass", Some(inner_eps)), ("metal", None)],
        &[("outer", "air", "outer_glass"), ("inner", "outer_glass", "inner_glass"), ("core", "inner_glass", "metal")],
    );
    SceneSource { mesh: m.finish(), material_map: map }
}

/// Stack of dielectric slabs of width `width` with the top surface at `z = 0`,
/// optionally on a conducting floor. The ambient medium must surround the stack.
pub fn layered(stack: &LayerStack, width: f64, pec_backed: bool) -> Result<SceneSource, SceneError> {
    if stack.layers.is_empty() || stack.n_before != 1.0 || (!pec_backed && stack.n_after != 1.0) {
        return Err(SceneError::MaterialMap("a layered scene needs at least one layer in air".into()));
    }
    let mut m = MeshBuilder::new();
    let w = width / 2.0;
    let names: Vec<String> = (0..stack.layers.len()).map(|i| format!("layer{i}")).collect();
    let mut groups: Vec<(String, String, String)> = Vec::new();
    let mut z = 0.0;
    for (i, &(_, d)) in stack.layers.iter().enumerate() {
        let z_lo = z - d;
        let side = format!("side{i}");
        let bottom = format!("bottom{i}");
        let (lo, hi) = (Vec3::new(-w, -w, z_lo), Vec3::new(w, w, z));
        if i == 0 {
            m.cuboid([&side, &side, &side, &side, &bottom, "top"], lo, hi);
            groups.push(("top".into(), "air".into(), names[0].clone()));
        } else {
            // the interface above was emitted by the previous layer as its bottom
            m.cuboid([&side, &side, &side, &side, &bottom, "__drop"], lo, hi);
        }
        groups.push((side, "air".into(), names[i].clone()));
        let below = if i + 1 < stack.layers.len() {
            names[i + 1].clone()
        } else if pec_backed {
            "metal".into()
        } else {
            "air".into()
        };
        groups.push((bottom, below, names[i].clone()));
        z = z_lo;
    }
    let mut mesh = m.finish();
    mesh.faces.retain(|(g, _)| g != "__drop");
    let mut mats: Vec<(&str, Option<f64>)> = names.iter().zip(&stack.layers).map(|(n, l)| (n.as_str(), Some(l.0 * l.0))).collect();
    if pec_backed {
        mats.push(("metal", None));
    }
    let g: Vec<(&str, &str, &str)> = groups.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    Ok(SceneSource { mesh, material_map: map_text(&mats, &g) })
}

/// Closed prism over the planar polygon `outline` (counter-clockwise seen from
/// +`axis`), extruded by `thickness` along `axis` and centred on the outline plane.
fn prism(m: &mut MeshBuilder, group: &str, outline: &[Vec3], axis: Vec3, thickness: f64) {
    let off = axis * (thickness / 2.0);
    let top: Vec<Vec3> = outline.iter().map(|p| *p + off).collect();
    let bot: Vec<Vec3> = outline.iter().map(|p| *p - off).collect();
    let n = outline.len();
    for k in 1..n - 1 {
        m.triangle(group, top[0], top[k], top[k + 1]);
        m.triangle(group, bot[0], bot[k + 1], bot[k]);
    }
    for k in 0..n {
        let j = (k + 1) % n;
        m.quad(group, bot[k], bot[j], top[j], top[k]);
    }
}

/// Conducting aircraft-like stub: box fuselage along y (nose at +y), swept wing,
/// tailplane and a vertical fin. `span` sets both wingspan and fuselage length.
pub fn airplane_stub(span: f64, fin_height: f64) -> SceneSource {
    let mut m = MeshBuilder::new();
    let len = span;
    let r = 0.06 * len;
    m.cuboid(["body"; 6], Vec3::new(-len / 2.0, -r, -r), Vec3::new(len / 2.0, r, r));
    let z = Vec3::unit_z();
    let wing_root = 0.3 * len;
    let wing_tip = 0.1 * len;
    let sweep = 0.2 * len;
    let x0 = 0.15 * len;
    for side in [1.0, -1.0] {
        let y = span / 2.0 * side;
        let mut outline = vec![
            Vec3::new(x0, r * side, 0.0),
            Vec3::new(x0 - wing_root, r * side, 0.0),
            Vec3::new(x0 - sweep - wing_tip, y, 0.0),
            Vec3::new(x0 - sweep, y, 0.0),
        ];
        if side > 0.0 {
            outline.reverse();
        }
        prism(&mut m, "wing", &outline, z, 0.02 * len);
        let t = 0.18 * span;
        let tx = -0.32 * len;
        let mut tail = vec![
            Vec3::new(tx, r * side, 0.0),
            Vec3::new(tx - 0.12 * len, r * side, 0.0),
            Vec3::new(tx - 0.17 * len, t * side, 0.0),
            Vec3::new(tx - 0.1 * len, t * side, 0.0),
        ];
        if side > 0.0 {
            tail.reverse();
        }
        prism(&mut m, "tail", &tail, z, 0.012 * len);
    }
    let fin = [
        Vec3::new(-0.3 * len, 0.0, r),
        Vec3::new(-0.5 * len, 0.0, r),
        Vec3::new(-0.5 * len, 0.0, r + fin_height),
        Vec3::new(-0.4 * len, 0.0, r + fin_height),
    ];
    prism(&mut m, "fin", &fin, Vec3::unit_y(), 0.012 * len);
    let map = map_text(&[("metal", None)], &[("body", "air", "metal"), ("wing", "air", "metal"), ("tail", "air", "metal"), ("fin", "air", "metal")]);
    SceneSource { mesh: m.finish(), material_map: map }
}

/// A named scene with its default dimensions.
pub fn builtin(name: &str) -> Result<SceneSource, SceneError> {
    Ok(match name {
        "plate" => plate(1.0, 1.0, 0.0),
        "sphere" => pec_sphere(1.0, 5),
        "pec_cube" => pec_cube(3.0),
        "dihedral" => dihedral(1.0, 1.0),
        "glass_cube" => glass_cube(3.0, 1.5),
        "glass_cube_pec_bottom" => glass_cube_pec_bottom(3.0, 1.5),
        "nested" => nested(3.0, 1.5, 2.0, 2.0, 0.5, 3),
        "airplane_stub" => airplane_stub(7.0, 1.5),
        "layered" => layered(&LayerStack { layers: vec![(1.5, 0.3), (2.0, 0.2)], n_before: 1.0, n_after: 1.0 }, 2.0, false)?,
        other => return Err(SceneError::MaterialMap(format!("unknown builtin scene '{other}'; expected one of {}", BUILTIN_NAMES.join(", ")))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signed_volume(mesh: &ObjMesh, group: &str) -> f64 {
        mesh.faces
            .iter()
            .filter(|(g, _)| g == group)
            .map(|(_, f)| {
                let [a, b, c] = f.map(|i| mesh.vertices[i as usize]);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    #[test]
    fn every_builtin_loads() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            s.load().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(builtin("teapot").is_err());
    }

    #[test]
    fn simple_counts() {
        assert_eq!(builtin("plate").unwrap().load().unwrap().triangles().len(), 2);
        assert_eq!(builtin("glass_cube").unwrap().load().unwrap().triangles().len(), 12);
        assert_eq!(pec_sphere(1.0, 2).mesh.faces.len(), 20 * 16);
    }

    #[test]
    fn closed_parts_face_outwards() {
        let v = signed_volume(&glass_cube(3.0, 1.5).mesh, "cube");
        assert!((v - 27.0).abs() < 1e-9);
        let s = pec_sphere(1.0, 4);
        let v = signed_volume(&s.mesh, "sphere");
        assert!(v > 0.98 * 4.0 / 3.0 * std::f64::consts::PI && v < 4.0 / 3.0 * std::f64::consts::PI);
        let n = nested(3.0, 1.5, 2.0, 2.0, 0.5, 3);
        for (g, expect) in [("outer", 27.0), ("inner", 8.0)] {
            assert!((signed_volume(&n.mesh, g) - expect).abs() < 1e-9);
        }
        let a = airplane_stub(7.0, 1.5);
        for g in ["body", "wing", "tail", "fin"] {
            assert!(signed_volume(&a.mesh, g) > 0.0, "{g}");
        }
    }

    #[test]
    fn airplane_dimensions() {
        let a = airplane_stub(7.0, 1.5);
        let (lo, hi) = a.mesh.vertices.iter().fold((Vec3::new(f64::MAX, f64::MAX, f64::MAX), Vec3::new(f64::MIN, f64::MIN, f64::MIN)), |(l, h), v| {
            (l.min_by_component(*v), h.max_by_component(*v))
        });
        assert!((hi.y - lo.y - 7.0).abs() < 1e-9);
        assert!((hi.x - lo.x - 7.0).abs() < 1e-9);
        assert!(hi.z > 1.5);
    }

    #[test]
    fn dihedral_faces_look_into_the_opening() {
        let scene = builtin("dihedral").unwrap().load().unwrap();
        for id in 0..scene.triangles().len() as u32 {
            assert!(scene.normal(id).z > 0.7);
        }
    }

    #[test]
    fn layered_stack_interfaces() {
        let stack = LayerStack { layers: vec![(1.5, 0.3), (2.0, 0.2)], n_before: 1.0, n_after: 1.0 };
        let s = layered(&stack, 2.0, true).unwrap();
        let scene = s.load().unwrap();
        let h = scene.intersect(Vec3::new(0.1, 0.2, 1.0), Vec3::new(0.0, 0.0, -1.0), 0.0).unwrap();
        assert!(h.point.z.abs() < 1e-12 && (h.n_transmit - 1.5).abs() < 1e-12);
        let h = scene.intersect(Vec3::new(0.1, 0.2, -0.1), Vec3::new(0.0, 0.0, -1.0), 0.0).unwrap();
        assert!((h.point.z + 0.3).abs() < 1e-12 && (h.n_transmit - 2.0).abs() < 1e-12);
        let h = scene.intersect(Vec3::new(0.1, 0.2, -0.4), Vec3::new(0.0, 0.0, -1.0), 0.0).unwrap();
        assert!((h.point.z + 0.5).abs() < 1e-12 && h.far_side_pec);
        assert!(layered(&LayerStack { layers: vec![], n_before: 1.0, n_after: 1.0 }, 1.0, false).is_err());
    }
}
