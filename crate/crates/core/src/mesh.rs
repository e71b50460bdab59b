//! Triangle meshes and their OBJ / PLY serializations.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let m = Mesh { vertices, faces };
        m.validate()?;
        Ok(m)
    }

    /// Every face index is in range and every coordinate finite.
    pub fn validate(&self) -> Result<()> {
        if self.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let nv = self.vertices.len();
        for f in &self.faces {
            if let Some(&bad) = f.iter().find(|&&i| i >= nv) {
                return Err(Error::InvalidParameter(format!(
                    "face index {bad} out of range ({nv} vertices)"
                )));
            }
        }
        Ok(())
    }

    /// Grid of `rows x cols` vertices (row-major) triangulated into quads split
    /// in two; columns wrap around when `wrap` is set.
    pub fn grid(vertices: Vec<[f64; 3]>, rows: usize, cols: usize, wrap: bool) -> Result<Self> {
        if rows * cols != vertices.len() {
            return Err(Error::InvalidParameter(format!(
                "grid {rows}x{cols} does not match {} vertices",
                vertices.len()
            )));
        }
        let mut faces = Vec::new();
        let col_steps = if wrap { cols } else { cols.saturating_sub(1) };
        for i in 0..rows.saturating_sub(1) {
            for j in 0..col_steps {
                let j1 = (j + 1) % cols;
                let a = i * cols + j;
                let b = i * cols + j1;
                let c = (i + 1) * cols + j;
                let d = (i + 1) * cols + j1;
                faces.push([a, b, d]);
                faces.push([a, d, c]);
            }
        }
        Mesh::new(vertices, faces)
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# horoconv mesh");
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", fmt(v[0]), fmt(v[1]), fmt(v[2]));
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }

    pub fn to_ply(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ply");
        let _ = writeln!(out, "format ascii 1.0");
        let _ = writeln!(out, "element vertex {}", self.vertices.len());
        let _ = writeln!(out, "property double x");
        let _ = writeln!(out, "property double y");
        let _ = writeln!(out, "property double z");
        let _ = writeln!(out, "element face {}", self.faces.len());
        let _ = writeln!(out, "property list uchar int vertex_indices");
        let _ = writeln!(out, "end_header");
        for v in &self.vertices {
            let _ = writeln!(out, "{} {} {}", fmt(v[0]), fmt(v[1]), fmt(v[2]));
        }
        for f in &self.faces {
            let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
        }
        out
    }
}

fn fmt(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.12e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_index() {
        let m = Mesh {
            vertices: vec![[0.0; 3]; 2],
            faces: vec![[0, 1, 2]],
        };
        assert!(m.validate().is_err());
    }

    #[test]
    fn single_triangle_and_empty_mesh() {
        let tri = Mesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        let obj = tri.to_obj();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).collect::<Vec<_>>(), ["f 1 2 3"]);
        assert_eq!(obj, tri.clone().to_obj());
        let empty = Mesh::default();
        empty.validate().unwrap();
        assert_eq!(empty.to_obj(), "# horoconv mesh\n");
        let ply = empty.to_ply();
        assert!(ply.contains("element vertex 0\n") && ply.contains("element face 0\n"));
        assert!(ply.ends_with("end_header\n"));
    }

    #[test]
    fn wrapped_grid() {
        let vs: Vec<[f64; 3]> = (0..6).map(|i| [i as f64, 0.0, 0.0]).collect();
        let m = Mesh::grid(vs, 2, 3, true).unwrap();
        assert_eq!(m.faces.len(), 6);
        let obj = m.to_obj();
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 6);
        let ply = m.to_ply();
        assert!(ply.contains("element face 6"));
    }
}
