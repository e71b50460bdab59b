//! Lorentz-Minkowski space `L^{n+2}` with signature `(-, +, ..., +)`.
//!
//! Coordinates are `(x_0, x_1, ..., x_{n+1})` with `x_0` timelike. The
//! hyperbolic space, de Sitter space and the future null cone are the
//! hyperquadrics `<x,x> = -1 (x_0 > 0)`, `<x,x> = 1` and `<x,x> = 0 (x_0 > 0)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default absolute tolerance for hyperquadric membership.
pub const QUADRIC_TOL: f64 = 1e-9;

/// A point of `L^{n+2}`, tagged with the sphere dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzVector {
    coords: DVector<f64>,
    n: usize,
}

impl LorentzVector {
    pub fn new(n: usize, coords: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        if coords.len() != n + 2 {
            return Err(Error::DimensionMismatch {
                expected: n + 2,
                found: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(LorentzVector {
            coords: DVector::from_vec(coords),
            n,
        })
    }

    /// `(t, t * x)` for a spatial vector `x` of length `n+1`.
    pub fn from_time_space(n: usize, t: f64, space: &[f64]) -> Result<Self> {
        let mut c = Vec::with_capacity(space.len() + 1);
        c.push(t);
        c.extend_from_slice(space);
        LorentzVector::new(n, c)
    }

    /// The base point `O = (1, 0, ..., 0)` of the hyperboloid.
    pub fn origin(n: usize) -> Result<Self> {
        let mut c = vec![0.0; n + 2];
        c[0] = 1.0;
        LorentzVector::new(n, c)
    }

    pub(crate) fn from_dvector(n: usize, coords: DVector<f64>) -> Self {
        debug_assert_eq!(coords.len(), n + 2);
        LorentzVector { coords, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn time(&self) -> f64 {
        self.coords[0]
    }

    /// Spatial part `(x_1, ..., x_{n+1})`.
    pub fn space(&self) -> &[f64] {
        &self.coords.as_slice()[1..]
    }

    pub fn scale(&self, s: f64) -> LorentzVector {
        LorentzVector::from_dvector(self.n, &self.coords * s)
    }

    pub fn add(&self, other: &LorentzVector) -> Result<LorentzVector> {
        check_same(self, other)?;
        Ok(LorentzVector::from_dvector(self.n, &self.coords + &other.coords))
    }

    pub fn sub(&self, other: &LorentzVector) -> Result<LorentzVector> {
        check_same(self, other)?;
        Ok(LorentzVector::from_dvector(self.n, &self.coords - &other.coords))
    }

    /// Max-norm distance between coordinates.
    pub fn max_abs_diff(&self, other: &LorentzVector) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_same(a: &LorentzVector, b: &LorentzVector) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n + 2,
            found: b.n + 2,
        });
    }
    Ok(())
}

/// Minkowski inner product on raw coordinate slices.
pub fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let spatial: f64 = a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum();
    -a[0] * b[0] + spatial
}

/// `<a, b> = -a_0 b_0 + sum a_i b_i`.
pub fn minkowski_inner(a: &LorentzVector, b: &LorentzVector) -> Result<f64> {
    check_same(a, b)?;
    Ok(minkowski_dot(a.coords(), b.coords()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadric {
    Hyperbolic,
    DeSitter,
    NullConePlus,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperquadricClass {
    pub tag: Quadric,
    pub tolerance: f64,
}

pub fn classify(v: &LorentzVector, tol: f64) -> HyperquadricClass {
    let q = minkowski_dot(v.coords(), v.coords());
    let tag = if (q + 1.0).abs() <= tol && v.time() > 0.0 {
        Quadric::Hyperbolic
    } else if (q - 1.0).abs() <= tol {
        Quadric::DeSitter
    } else if q.abs() <= tol && v.time() > 0.0 {
        Quadric::NullConePlus
    } else {
        Quadric::None
    };
    HyperquadricClass {
        tag,
        tolerance: tol,
    }
}

/// `J = diag(-1, 1, ..., 1)`.
pub fn minkowski_metric(dim: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(dim, dim);
    j[(0, 0)] = -1.0;
    j
}

/// An element of the time-orientation preserving Lorentz group `O+(1, n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzIsometry {
    matrix: DMatrix<f64>,
    n: usize,
}

/// Generators of `O+(1, n+1)` used throughout the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum IsometryKind {
    /// Rotation in the plane of spatial axes `(a, b)`, both in `1..=n+1`.
    Rotation { axes: (usize, usize), angle: f64 },
    /// Boost mixing `x_0` with spatial axis `axis` in `1..=n+1`.
    Boost { axis: usize, rapidity: f64 },
    /// Matrix product, applied right to left.
    Composition(Vec<IsometryKind>),
}

impl LorentzIsometry {
    /// Validates `M^T J M = J` (entrywise, scaled by the matrix size) and
    /// time orientation `M_00 > 0`.
    pub fn from_matrix(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        LorentzIsometry::from_matrix_with_tol(n, matrix, 1e-12)
    }

    /// As [`LorentzIsometry::from_matrix`] with residual bound
    /// `tol * max(1, max|M_ij|)^2`.
    pub fn from_matrix_with_tol(n: usize, matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let dim = n + 2;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        let residual = isometry_residual(&matrix);
        let scale = matrix.amax().max(1.0);
        if !(residual <= tol * scale * scale) {
            return Err(Error::NotAnIsometry(residual));
        }
        if matrix[(0, 0)] <= 0.0 {
            return Err(Error::TimeOrientation);
        }
        Ok(LorentzIsometry { matrix, n })
    }

    pub fn identity(n: usize) -> Self {
        LorentzIsometry {
            matrix: DMatrix::identity(n + 2, n + 2),
            n,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn preserves_time_orientation(&self) -> bool {
        self.matrix[(0, 0)] > 0.0
    }

    pub fn compose(&self, right: &LorentzIsometry) -> Result<LorentzIsometry> {
        if self.n != right.n {
            return Err(Error::DimensionMismatch {
                expected: self.n + 2,
                found: right.n + 2,
            });
        }
        Ok(LorentzIsometry {
            matrix: &self.matrix * &right.matrix,
            n: self.n,
        })
    }

    /// `J M^T J`.
    pub fn inverse(&self) -> LorentzIsometry {
        let j = minkowski_metric(self.n + 2);
        LorentzIsometry {
            matrix: &j * self.matrix.transpose() * &j,
            n: self.n,
        }
    }
}

/// `max |M^T J M - J|`.
pub fn isometry_residual(m: &DMatrix<f64>) -> f64 {
    let j = minkowski_metric(m.nrows());
    (m.transpose() * &j * m - j).amax()
}

pub fn apply_isometry(t: &LorentzIsometry, v: &LorentzVector) -> Result<LorentzVector> {
    if t.n != v.n {
        return Err(Error::DimensionMismatch {
            expected: t.n + 2,
            found: v.n + 2,
        });
    }
    Ok(LorentzVector::from_dvector(v.n, &t.matrix * &v.coords))
}

pub fn make_isometry(kind: &IsometryKind, n: usize) -> Result<LorentzIsometry> {
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    let dim = n + 2;
    let check_axis = |a: usize| {
        if a == 0 || a > n + 1 {
            Err(Error::InvalidAxis {
                index: a,
                min: 1,
                max: n + 1,
            })
        } else {
            Ok(())
        }
    };
    match kind {
        IsometryKind::Rotation {
            axes: (a, b),
            angle,
        } => {
            check_axis(*a)?;
            check_axis(*b)?;
            if a == b {
                return Err(Error::InvalidParameter(
                    "rotation axes must be distinct".into(),
                ));
            }
            let mut m = DMatrix::identity(dim, dim);
            let (s, c) = angle.sin_cos();
            m[(*a, *a)] = c;
            m[(*b, *b)] = c;
            m[(*a, *b)] = -s;
            m[(*b, *a)] = s;
            Ok(LorentzIsometry { matrix: m, n })
        }
        IsometryKind::Boost { axis, rapidity } => {
            check_axis(*axis)?;
            let mut m = DMatrix::identity(dim, dim);
            let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
            m[(0, 0)] = ch;
            m[(*axis, *axis)] = ch;
            m[(0, *axis)] = sh;
            m[(*axis, 0)] = sh;
            Ok(LorentzIsometry { matrix: m, n })
        }
        IsometryKind::Composition(parts) => {
            let mut acc = LorentzIsometry::identity(n);
            for p in parts {
                acc = acc.compose(&make_isometry(p, n)?)?;
            }
            Ok(acc)
        }
    }
}

/// Poincaré ball chart `(x_1, ..., x_{n+1}) / (1 + x_0)` of the hyperboloid.
pub fn poincare_projection(p: &LorentzVector) -> Result<Vec<f64>> {
    if classify(p, QUADRIC_TOL).tag != Quadric::Hyperbolic {
        return Err(Error::NotHyperbolic);
    }
    let d = 1.0 + p.time();
    Ok(p.space().iter().map(|x| x / d).collect())
}
