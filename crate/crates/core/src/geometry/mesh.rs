//! Text formats: Wavefront OBJ meshes with named groups, and the TOML material map
//! binding each group to the materials on its front (normal) and back side.
//!
//! ```toml
//! ambient = "air"            # optional; "air" (eps_r = 1) is always defined
//!
//! [materials.glass]
//! eps_r = 1.5
//!
//! [materials.metal]
//! pec = true
//!
//! [groups.cube]              # OBJ `g cube` / `o cube`
//! front = "air"
//! back = "glass"
//! ```

use std::collections::BTreeMap;

use serde::Deserialize;

use super::SceneError;
use crate::em::Material;
use crate::Vec3;

/// Triangles grouped by OBJ group name, in file order.
#[derive(Debug, Clone, Default)]
pub struct ObjMesh {
    pub vertices: Vec<Vec3>,
    /// `(group name, vertex indices)`.
    pub faces: Vec<(String, [u32; 3])>,
}

pub fn parse_obj(text: &str) -> Result<ObjMesh, SceneError> {
    let mut mesh = ObjMesh::default();
    let mut group = String::from("default");
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let bad = |msg: &str| SceneError::Parse { line: lineno + 1, message: msg.to_string() };
        match tok.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    *slot = tok
                        .next()
                        .ok_or_else(|| bad("vertex needs 3 coordinates"))?
                        .parse()
                        .map_err(|_| bad("bad vertex coordinate"))?;
                }
                mesh.vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::with_capacity(4);
                for t in tok {
                    let first = t.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|_| bad("bad face index"))?;
                    let n = mesh.vertices.len() as i64;
                    let resolved = if i > 0 { i - 1 } else { n + i };
                    if resolved < 0 || resolved >= n {
                        return Err(bad("face index out of range"));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(bad("face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    mesh.faces.push((group.clone(), [idx[0], idx[k], idx[k + 1]]));
                }
            }
            Some("g") | Some("o") => {
                group = tok.next().unwrap_or("default").to_string();
            }
            _ => {}
        }
    }
    Ok(mesh)
}

pub fn write_obj(mesh: &ObjMesh) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    let mut current: Option<&str> = None;
    for (g, f) in &mesh.faces {
        if current != Some(g.as_str()) {
            let _ = writeln!(s, "g {g}");
            current = Some(g);
        }
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialEntry {
    #[serde(default = "one")]
    eps_r: f64,
    #[serde(default = "one")]
    mu_r: f64,
    #[serde(default)]
    pec: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SideAssignment {
    pub front: String,
    pub back: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialMapFile {
    ambient: Option<String>,
    #[serde(default)]
    materials: BTreeMap<String, MaterialEntry>,
    #[serde(default)]
    groups: BTreeMap<String, SideAssignment>,
}

/// Parsed material map. Material 0 is always the ambient medium.
#[derive(Debug, Clone)]
pub struct MaterialMap {
    pub materials: Vec<Material>,
    pub groups: BTreeMap<String, (u16, u16)>,
}

impl MaterialMap {
    pub fn id(&self, name: &str) -> Option<u16> {
        self.materials.iter().position(|m| m.name == name).map(|i| i as u16)
    }
}

pub fn parse_material_map(text: &str) -> Result<MaterialMap, SceneError> {
    let file: MaterialMapFile = toml::from_str(text).map_err(|e| SceneError::MaterialMap(e.to_string()))?;
    let mut all: BTreeMap<String, Material> = BTreeMap::new();
    all.insert("air".into(), Material::vacuum());
    for (name, e) in &file.materials {
        let m = if e.pec {
            Material::pec(name.clone())
        } else {
            Material { name: name.clone(), eps_r: e.eps_r, mu_r: e.mu_r, is_pec: false }
        };
        m.validate().map_err(SceneError::MaterialMap)?;
        all.insert(name.clone(), m);
    }
    let ambient_name = file.ambient.clone().unwrap_or_else(|| "air".into());
    let ambient = all
        .remove(&ambient_name)
        .ok_or_else(|| SceneError::UnknownMaterial(ambient_name.clone()))?;
    if ambient.is_pec {
        return Err(SceneError::MaterialMap("ambient medium cannot be a conductor".into()));
    }
    let mut materials = vec![ambient];
    materials.extend(all.into_values());
    let lookup = |n: &str| -> Result<u16, SceneError> {
        materials
            .iter()
            .position(|m| m.name == n)
            .map(|i| i as u16)
            .ok_or_else(|| SceneError::UnknownMaterial(n.to_string()))
    };
    let mut groups = BTreeMap::new();
    for (g, side) in &file.groups {
        let f = lookup(&side.front)?;
        let b = lookup(&side.back)?;
        groups.insert(g.clone(), (f, b));
    }
    Ok(MaterialMap { materials, groups })
}
