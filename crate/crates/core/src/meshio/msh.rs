//! Reader for the ASCII MSH 2.2 subset: `$MeshFormat`, `$Nodes` and
//! `$Elements`. Only three-node triangles (element type 2) are kept.

use std::collections::HashMap;

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

const TRIANGLE: u32 = 2;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next().ok_or_else(|| Error::Parse {
            line: self.last + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }

    fn expect_exact(&mut self, tag: &str) -> Result<()> {
        let (line, text) = self.expect(tag)?;
        if text != tag {
            return Err(Error::Parse {
                line,
                message: format!("expected `{tag}`, found `{text}`"),
            });
        }
        Ok(())
    }
}

fn field<T: std::str::FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{token}`"),
    })
}

/// Parse an MSH 2.2 ASCII document into a validated mesh.
///
/// Node ids may be sparse; vertices not referenced by any triangle are
/// dropped and the rest renumbered in order of first appearance in `$Nodes`.
pub fn parse_msh(text: &str) -> Result<TriangleMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let mut nodes: Vec<(u64, Vec3)> = Vec::new();
    let mut triangles: Vec<[u64; 3]> = Vec::new();
    let mut seen_format = false;

    while let Some((line, header)) = lines.next() {
        match header {
            "$MeshFormat" => {
                let (line, spec) = lines.expect("format line")?;
                let mut it = spec.split_whitespace();
                let version: String = field(it.next(), line, "version")?;
                let file_type: u32 = field(it.next(), line, "file type")?;
                if !version.starts_with("2.") || file_type != 0 {
                    return Err(Error::Parse {
                        line,
                        message: format!("unsupported format `{spec}`, expected ASCII 2.2"),
                    });
                }
                lines.expect_exact("$EndMeshFormat")?;
                seen_format = true;
            }
            "$Nodes" => {
                let (line, count) = lines.expect("node count")?;
                let count: usize = field(Some(count), line, "node count")?;
                nodes.reserve(count);
                for _ in 0..count {
                    let (line, text) = lines.expect("node")?;
                    let mut it = text.split_whitespace();
                    let id: u64 = field(it.next(), line, "node id")?;
                    let x: f64 = field(it.next(), line, "x coordinate")?;
                    let y: f64 = field(it.next(), line, "y coordinate")?;
                    let z: f64 = field(it.next(), line, "z coordinate")?;
                    nodes.push((id, Vec3::new(x, y, z)));
                }
                lines.expect_exact("$EndNodes")?;
            }
            "$Elements" => {
                let (line, count) = lines.expect("element count")?;
                let count: usize = field(Some(count), line, "element count")?;
                for _ in 0..count {
                    let (line, text) = lines.expect("element")?;
                    let mut it = text.split_whitespace();
                    let _id: u64 = field(it.next(), line, "element id")?;
                    let kind: u32 = field(it.next(), line, "element type")?;
                    let ntags: usize = field(it.next(), line, "tag count")?;
                    for _ in 0..ntags {
                        let _: i64 = field(it.next(), line, "tag")?;
                    }
                    if kind == TRIANGLE {
                        let a = field(it.next(), line, "node reference")?;
                        let b = field(it.next(), line, "node reference")?;
                        let c = field(it.next(), line, "node reference")?;
                        triangles.push([a, b, c]);
                    }
                }
                lines.expect_exact("$EndElements")?;
            }
            other if other.starts_with("$End") => {
                return Err(Error::Parse {
                    line,
                    message: format!("unmatched `{other}`"),
                });
            }
            other if other.starts_with('$') => {
                // unknown section: skip to its end marker
                let end = format!("$End{}", &other[1..]);
                loop {
                    let (_, text) = lines.expect(&end)?;
                    if text == end {
                        break;
                    }
                }
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected a section header, found `{other}`"),
                });
            }
        }
    }
    if !seen_format {
        return Err(Error::Parse {
            line: 1,
            message: "missing $MeshFormat section".into(),
        });
    }
    if triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }

    let by_id: HashMap<u64, usize> = nodes.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
    let mut used = vec![false; nodes.len()];
    for t in &triangles {
        for id in t {
            let &i = by_id.get(id).ok_or_else(|| {
                Error::InvalidArgument(format!("triangle references unknown node {id}"))
            })?;
            used[i] = true;
        }
    }
    let mut renumber = vec![usize::MAX; nodes.len()];
    let mut vertices = Vec::new();
    for (i, (_, p)) in nodes.iter().enumerate() {
        if used[i] {
            renumber[i] = vertices.len();
            vertices.push(*p);
        }
    }
    let panels = triangles
        .iter()
        .map(|t| t.map(|id| renumber[by_id[&id]]))
        .collect();
    TriangleMesh::new(vertices, panels)
}

/// Serialize a mesh in the same MSH 2.2 subset, one triangle per element.
pub fn write_msh(mesh: &TriangleMesh) -> String {
    use std::fmt::Write;
    let mut out = String::from("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(out, "{}", mesh.num_vertices());
    for (i, v) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(out, "{} {:.17e} {:.17e} {:.17e}", i + 1, v.x, v.y, v.z);
    }
    out.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(out, "{}", mesh.num_panels());
    for (i, p) in mesh.panels().iter().enumerate() {
        let [a, b, c] = p.vertices;
        let _ = writeln!(out, "{} 2 2 0 1 {} {} {}", i + 1, a + 1, b + 1, c + 1);
    }
    out.push_str("$EndElements\n");
    out
}
