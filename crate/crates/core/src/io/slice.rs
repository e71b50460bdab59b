//! Meshes of two-parameter slices of the hypersurface.
//!
//! The slice is the great 2-sphere of `S^n` spanned by three ambient axes
//! `(a, b, c)` (1-based), sampled on a `rows x cols` grid in polar angle from
//! `e_c` and azimuth in the `(e_a, e_b)` plane. Vertices are the Poincare-ball
//! coordinates of `phi` along the same three axes; for `n > 3` the remaining
//! coordinates are dropped from the mesh and kept in the jets file.

use std::f64::consts::PI;

use crate::chart::SpherePoint;
use crate::conformal::ConformalMetricField;
use crate::correspondence::{jet, HypersurfaceJet};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone)]
pub struct Slice {
    pub mesh: Mesh,
    pub jets: Vec<HypersurfaceJet>,
    /// Grid points outside the metric's domain.
    pub skipped: usize,
    /// Largest Euclidean norm of a full Poincare-ball point.
    pub max_ball_radius: f64,
}

/// Default slice axes `(n-1, n, n+1)`.
pub fn default_axes(n: usize) -> [usize; 3] {
    [n - 1, n, n + 1]
}

pub fn slice_point(n: usize, axes: [usize; 3], theta: f64, azimuth: f64) -> Result<SpherePoint> {
    let mut y = vec![0.0; n + 1];
    y[axes[0] - 1] = theta.sin() * azimuth.cos();
    y[axes[1] - 1] = theta.sin() * azimuth.sin();
    y[axes[2] - 1] = theta.cos();
    SpherePoint::normalized(y)
}

pub fn hypersurface_slice(
    f: &ConformalMetricField,
    axes: [usize; 3],
    rows: usize,
    cols: usize,
) -> Result<Slice> {
    let n = f.n();
    for (i, &a) in axes.iter().enumerate() {
        if a == 0 || a > n + 1 {
            return Err(Error::InvalidAxis { index: a, min: 1, max: n + 1 });
        }
        if axes[..i].contains(&a) {
            return Err(Error::InvalidParameter("slice axes must be distinct".into()));
        }
    }
    if rows < 2 || cols < 3 {
        return Err(Error::InvalidParameter("slice grid needs at least 2 rows and 3 columns".into()));
    }
    let mut index = vec![None; rows * cols];
    let mut vertices = Vec::new();
    let mut jets = Vec::new();
    let mut skipped = 0;
    let mut max_ball_radius = 0.0f64;
    for i in 0..rows {
        let theta = PI * (i as f64 + 0.5) / rows as f64;
        for j in 0..cols {
            let x = slice_point(n, axes, theta, 2.0 * PI * j as f64 / cols as f64)?;
            if !f.contains(&x) {
                skipped += 1;
                continue;
            }
            let h = jet(f, &x)?;
            let p = h.phi.coords();
            let d = 1.0 + p[0];
            let ball: Vec<f64> = p[1..].iter().map(|v| v / d).collect();
            max_ball_radius = max_ball_radius.max(ball.iter().map(|v| v * v).sum::<f64>().sqrt());
            index[i * cols + j] = Some(vertices.len());
            vertices.push([ball[axes[0] - 1], ball[axes[1] - 1], ball[axes[2] - 1]]);
            jets.push(h);
        }
    }
    let mut faces = Vec::new();
    for i in 0..rows - 1 {
        for j in 0..cols {
            let j1 = (j + 1) % cols;
            let q = [
                index[i * cols + j],
                index[i * cols + j1],
                index[(i + 1) * cols + j],
                index[(i + 1) * cols + j1],
            ];
            if let [Some(a), Some(b), Some(c), Some(d)] = q {
                faces.push([a, b, d]);
                faces.push([a, d, c]);
            }
        }
    }
    Ok(Slice {
        mesh: Mesh::new(vertices, faces)?,
        jets,
        skipped,
        max_ball_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geodesic_sphere_slice_is_round() {
        let f = ConformalMetricField::constant(3, 1.0).unwrap();
        let s = hypersurface_slice(&f, default_axes(3), 6, 8).unwrap();
        assert_eq!(s.mesh.vertices.len(), 48);
        assert_eq!(s.mesh.faces.len(), 2 * 5 * 8);
        for v in &s.mesh.vertices {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((r - 0.5f64.tanh()).abs() < 1e-12);
        }
    }
}
