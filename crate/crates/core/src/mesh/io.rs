//! Plain-text mesh format:
//!
//! ```text
//! quadmesh 2
//! V <count>
//! x y
//! ...
//! C <count>
//! i j k l
//! ...
//! ```
//!
//! Cells list four vertex indices counter-clockwise. Coordinates are written
//! with Rust's shortest round-trip formatting, so export/import is lossless.

use std::fmt::Write as _;
use std::path::Path;

use super::Mesh;
use crate::error::{Error, Result};

impl Mesh {
    pub fn to_text(&self) -> String {
        let mut s = String::from("quadmesh 2\n");
        let _ = writeln!(s, "V {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
        }
        let _ = writeln!(s, "C {}", self.cells.len());
        for c in &self.cells {
            let v = c.vertices;
            let _ = writeln!(s, "{} {} {} {}", v[0], v[1], v[2], v[3]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line: usize, msg: &str| Error::MeshParse { line, msg: msg.to_string() };

        let (ln, header) = lines.next().ok_or_else(|| err(0, "empty file"))?;
        if header.split_whitespace().collect::<Vec<_>>() != ["quadmesh", "2"] {
            return Err(err(ln, "expected header `quadmesh 2`"));
        }
        let nv = count_line(&mut lines, "V")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| err(0, "missing vertex line"))?;
            let xs: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(ln, "bad coordinate"))?;
            if xs.len() != 2 {
                return Err(err(ln, "vertex needs two coordinates"));
            }
            vertices.push([xs[0], xs[1]]);
        }
        let nc = count_line(&mut lines, "C")?;
        let mut quads = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (ln, l) = lines.next().ok_or_else(|| err(0, "missing cell line"))?;
            let ids: Vec<usize> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(ln, "bad vertex index"))?;
            if ids.len() != 4 {
                return Err(err(ln, "cell needs four vertex indices"));
            }
            quads.push([ids[0], ids[1], ids[2], ids[3]]);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(err(ln, "trailing content"));
        }
        Mesh::from_quads(vertices, quads)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Mesh> {
        Mesh::from_text(&std::fs::read_to_string(path)?)
    }
}

fn count_line<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, tag: &str) -> Result<usize> {
    let (ln, l) = lines.next().ok_or(Error::MeshParse { line: 0, msg: "unexpected end of file".into() })?;
    let mut it = l.split_whitespace();
    if it.next() != Some(tag) {
        return Err(Error::MeshParse { line: ln, msg: format!("expected `{tag} <count>`") });
    }
    it.next()
        .and_then(|c| c.parse().ok())
        .ok_or(Error::MeshParse { line: ln, msg: "bad count".into() })
}
