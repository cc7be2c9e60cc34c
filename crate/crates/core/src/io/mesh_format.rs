//! Versioned text format for [`HexMesh`].
//!
//! ```text
//! gelmesh 1
//! element_size <dx> <dy> <dz>
//! nodes <n>
//! <x> <y> <z>            (n lines, meters)
//! elements <m>
//! <i0> ... <i7>          (m lines, corner order of the mesh module)
//! fixed <k>
//! <i>                    (k lines)
//! top <t>
//! <i>                    (t lines)
//! end
//! ```
//!
//! Floats are written in shortest round-trip form, so reading back is exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::HexMesh;

pub const MESH_HEADER: &str = "gelmesh 1";

pub fn encode_mesh(mesh: &HexMesh) -> String {
    let mut s = String::new();
    let [dx, dy, dz] = mesh.element_size();
    writeln!(s, "{MESH_HEADER}").unwrap();
    writeln!(s, "element_size {dx} {dy} {dz}").unwrap();
    writeln!(s, "nodes {}", mesh.node_count()).unwrap();
    for p in mesh.nodes() {
        writeln!(s, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    writeln!(s, "elements {}", mesh.element_count()).unwrap();
    for e in mesh.elements() {
        let line: Vec<String> = e.iter().map(usize::to_string).collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    for (name, set) in [("fixed", mesh.fixed_nodes()), ("top", mesh.top_nodes())] {
        writeln!(s, "{name} {}", set.len()).unwrap();
        for i in set {
            writeln!(s, "{i}").unwrap();
        }
    }
    s.push_str("end\n");
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        for (no, line) in self.inner.by_ref() {
            self.last = no + 1;
            let t = line.trim();
            if !t.is_empty() {
                return Ok(t);
            }
        }
        Err(self.err("unexpected end of file"))
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::format("mesh", format!("line {}: {msg}", self.last))
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let line = self.next()?;
        let mut it = line.split_whitespace();
        if it.next() != Some(name) {
            return Err(self.err(format!("expected `{name} <count>`")));
        }
        it.next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| self.err("bad count"))
    }

    fn numbers<T: std::str::FromStr, const N: usize>(&mut self) -> Result<[T; N]> {
        let line = self.next()?;
        let parsed: Vec<T> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| self.err(format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        let n = parsed.len();
        parsed
            .try_into()
            .map_err(|_| self.err(format!("expected {N} values, found {n}")))
    }
}

pub fn decode_mesh(text: &str) -> Result<HexMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    if lines.next()? != MESH_HEADER {
        return Err(lines.err(format!("expected header `{MESH_HEADER}`")));
    }
    let size_line = lines.next()?;
    let element_size: [f64; 3] = {
        let rest = size_line
            .strip_prefix("element_size")
            .ok_or_else(|| lines.err("expected `element_size`"))?;
        let v: Vec<f64> = rest
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| lines.err("bad element size")))
            .collect::<Result<_>>()?;
        v.try_into()
            .map_err(|_| lines.err("element_size needs 3 values"))?
    };
    let n = lines.section("nodes")?;
    let nodes = (0..n)
        .map(|_| lines.numbers::<f64, 3>())
        .collect::<Result<Vec<_>>>()?;
    let m = lines.section("elements")?;
    let elements = (0..m)
        .map(|_| lines.numbers::<usize, 8>())
        .collect::<Result<Vec<_>>>()?;
    let k = lines.section("fixed")?;
    let fixed = (0..k)
        .map(|_| lines.numbers::<usize, 1>().map(|[i]| i))
        .collect::<Result<Vec<_>>>()?;
    let t = lines.section("top")?;
    let top = (0..t)
        .map(|_| lines.numbers::<usize, 1>().map(|[i]| i))
        .collect::<Result<Vec<_>>>()?;
    if lines.next()? != "end" {
        return Err(lines.err("expected `end`"));
    }
    HexMesh::new(nodes, elements, fixed, top, element_size)
}

pub fn write_mesh(mesh: &HexMesh, path: &Path) -> Result<()> {
    std::fs::write(path, encode_mesh(mesh)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: &Path) -> Result<HexMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_mesh(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_grid, Rect};

    #[test]
    fn roundtrip_exact() {
        let m = generate_grid(
            Rect::new([0.1, -0.3], [0.7, 0.2]),
            [0.1 / 3.0, 0.07],
            0.0021,
        )
        .unwrap();
        assert_eq!(decode_mesh(&encode_mesh(&m)).unwrap(), m);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = decode_mesh("gelmesh 1\nelement_size 1 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(decode_mesh("gelmesh 2\n").is_err());
    }
}
