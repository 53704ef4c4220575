//! Plain-text geometry description.
//!
//! ```text
//! # two unit spheres, surfaces 2 apart
//! object a sphere(1, 2)
//! object b sphere(1, 2) move 0 0 4
//! object c mesh part.msh pivot 0 0 1 rot 30 x move 5 0 0
//! ```
//!
//! Generators are `sphere(R,s)`, `capsule(R,L,res)` and `tetrahedron(L,s)`.
//! Clauses `rot <deg> <axis>`, `move <dx> <dy> <dz>` and `pivot <x> <y> <z>`
//! apply left to right; `pivot` sets the fixed point of later `rot` clauses.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use super::{compose, Axis, Configuration, ObjectInstance, RigidTransform};
use crate::error::{Error, Result};
use crate::meshio::{generate_capsule, generate_sphere, generate_tetrahedron, parse_msh, RwgBasisSet, Vec3};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Geometry {
        line,
        message: message.into(),
    }
}

fn number(token: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let token = token.ok_or_else(|| err(line, format!("missing {what}")))?;
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, format!("invalid {what} `{token}`")))
}

/// Objects read from a geometry file, in file order.
#[derive(Debug, Clone)]
pub struct GeometryFile {
    pub objects: Vec<ObjectInstance>,
}

impl GeometryFile {
    pub fn into_configuration(self) -> Result<Configuration> {
        Configuration::new(self.objects)
    }
}

/// Parse a geometry description. Mesh paths are resolved against `base_dir`.
pub fn parse_geometry(text: &str, base_dir: &Path) -> Result<GeometryFile> {
    let mut cache: HashMap<String, Arc<RwgBasisSet>> = HashMap::new();
    let mut objects = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace().peekable();
        if tokens.next() != Some("object") {
            return Err(err(line, format!("expected `object`, found `{content}`")));
        }
        let label = tokens.next().ok_or_else(|| err(line, "missing object label"))?;
        let kind = tokens.next().ok_or_else(|| err(line, "missing mesh source"))?;

        let (key, basis) = if kind == "mesh" {
            let path = tokens.next().ok_or_else(|| err(line, "missing mesh path"))?;
            let full = base_dir.join(path);
            let key = format!("mesh:{}", full.display());
            let basis = match cache.get(&key) {
                Some(b) => b.clone(),
                None => {
                    let text = std::fs::read_to_string(&full)
                        .map_err(|e| err(line, format!("cannot read {}: {e}", full.display())))?;
                    let mesh = parse_msh(&text).map_err(|e| err(line, format!("{}: {e}", full.display())))?;
                    Arc::new(RwgBasisSet::new(Arc::new(mesh)))
                }
            };
            (key, basis)
        } else {
            let mut spec = kind.to_string();
            while !spec.contains(')') {
                let next = tokens.next().ok_or_else(|| err(line, format!("unterminated generator `{spec}`")))?;
                spec.push_str(next);
            }
            let key: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
            let basis = match cache.get(&key) {
                Some(b) => b.clone(),
                None => Arc::new(RwgBasisSet::new(Arc::new(generate(&key, line)?))),
            };
            (key, basis)
        };
        cache.insert(key, basis.clone());

        let mut transform = RigidTransform::identity();
        let mut pivot = Vec3::zeros();
        while let Some(clause) = tokens.next() {
            match clause {
                "rot" => {
                    let deg = number(tokens.next(), line, "rotation angle")?;
                    let axis: Axis = tokens
                        .next()
                        .ok_or_else(|| err(line, "missing rotation axis"))?
                        .parse()
                        .map_err(|e: Error| err(line, e.to_string()))?;
                    transform = compose(&RigidTransform::rotation_deg(axis, deg).about(pivot), &transform);
                }
                "move" => {
                    let d = Vec3::new(
                        number(tokens.next(), line, "dx")?,
                        number(tokens.next(), line, "dy")?,
                        number(tokens.next(), line, "dz")?,
                    );
                    transform = compose(&RigidTransform::translation(d), &transform);
                }
                "pivot" => {
                    pivot = Vec3::new(
                        number(tokens.next(), line, "pivot x")?,
                        number(tokens.next(), line, "pivot y")?,
                        number(tokens.next(), line, "pivot z")?,
                    );
                }
                other => return Err(err(line, format!("unknown clause `{other}`"))),
            }
        }
        objects.push(ObjectInstance::new(label, basis, transform));
    }
    if objects.is_empty() {
        return Err(err(1, "no objects defined"));
    }
    Ok(GeometryFile { objects })
}

/// Read and parse a geometry file and validate the resulting configuration.
pub fn load_geometry(path: &Path) -> Result<Configuration> {
    let text = std::fs::read_to_string(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_geometry(&text, dir)?.into_configuration()
}

fn generate(spec: &str, line: usize) -> Result<crate::meshio::TriangleMesh> {
    let open = spec.find('(').ok_or_else(|| err(line, format!("expected `name(args)`, found `{spec}`")))?;
    if !spec.ends_with(')') {
        return Err(err(line, format!("trailing characters after generator `{spec}`")));
    }
    let name = &spec[..open];
    let args: Vec<&str> = spec[open + 1..spec.len() - 1].split(',').collect();
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(err(line, format!("{name} takes {n} arguments, got {}", args.len())))
        }
    };
    let real = |i: usize| number(Some(args[i]), line, "generator argument");
    let count = |i: usize| {
        args[i]
            .parse::<usize>()
            .map_err(|_| err(line, format!("invalid integer argument `{}`", args[i])))
    };
    let mesh = match name {
        "sphere" => {
            arity(2)?;
            generate_sphere(real(0)?, count(1)?)
        }
        "capsule" => {
            arity(3)?;
            generate_capsule(real(0)?, real(1)?, count(2)?)
        }
        "tetrahedron" => {
            arity(2)?;
            generate_tetrahedron(real(0)?, count(1)?)
        }
        other => return Err(err(line, format!("unknown generator `{other}`"))),
    };
    mesh.map_err(|e| err(line, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshio::write_msh;

    #[test]
    fn generators_and_clauses() {
        let text = "# spheres\nobject a sphere(1, 1)\nobject b sphere(1,1) rot 90 z move 0 0 4  # shifted\n";
        let file = parse_geometry(text, Path::new(".")).unwrap();
        assert_eq!(file.objects.len(), 2);
        assert!(Arc::ptr_eq(file.objects[0].basis(), file.objects[1].basis()));
        let config = file.into_configuration().unwrap();
        let t = config.objects()[1].transform();
        assert!((t.apply(&Vec3::x()) - Vec3::new(0.0, 1.0, 4.0)).norm() < 1e-15);
    }

    #[test]
    fn pivot_sets_rotation_origin() {
        let text = "object a tetrahedron(1,0) pivot 1 0 0 rot 180 z";
        let file = parse_geometry(text, Path::new(".")).unwrap();
        let t = file.objects[0].transform();
        assert!((t.apply(&Vec3::zeros()) - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mesh_paths_relative_to_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("ico.msh"), write_msh(&generate_sphere(1.0, 0).unwrap())).unwrap();
        let geo = dir.path().join("pair.geo");
        std::fs::write(&geo, "object a mesh ico.msh\nobject b mesh ico.msh move 3 0 0\n").unwrap();
        let config = load_geometry(&geo).unwrap();
        assert_eq!(config.dimension(), 60);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("object a sphere(1,1)\nobjekt b sphere(1,1)", 2),
            ("\n\nobject a sphere(1)", 3),
            ("object a sphere(1,1) spin 3 x", 1),
            ("object a cube(1)", 1),
            ("object a sphere(1,1) rot 3 w", 1),
            ("object a capsule(1,1,8)", 1),
        ];
        for (text, expected) in cases {
            match parse_geometry(text, Path::new(".")) {
                Err(Error::Geometry { line, .. }) => assert_eq!(line, expected, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
