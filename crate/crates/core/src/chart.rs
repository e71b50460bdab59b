//! Points of the round sphere `S^n` and stereographic charts on it.

use nalgebra::DVector;

use crate::dual::Dual2;
use crate::error::{Error, Result};

/// Unit vector of `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: DVector<f64>,
}

impl SpherePoint {
    /// Accepts `coords` only if `| |x|^2 - 1 | <= 1e-12`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let dev = (coords.iter().map(|c| c * c).sum::<f64>() - 1.0).abs();
        if dev > 1e-12 {
            return Err(Error::NotOnSphere(dev));
        }
        Ok(SpherePoint {
            coords: DVector::from_vec(coords),
        })
    }

    /// Projects any nonzero vector onto the sphere.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(SpherePoint {
            coords: DVector::from_vec(coords.into_iter().map(|c| c / norm).collect()),
        })
    }

    /// `e_{axis}` (0-based ambient index).
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[axis] = 1.0;
        SpherePoint {
            coords: DVector::from_vec(c),
        }
    }

    /// The north pole `e_{n+1}`.
    pub fn north(n: usize) -> Self {
        SpherePoint::basis(n + 1, n)
    }

    /// The south pole `-e_{n+1}`.
    pub fn south(n: usize) -> Self {
        let mut p = SpherePoint::north(n);
        p.coords[n] = -1.0;
        p
    }

    pub fn coords(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.coords
    }

    /// Sphere dimension `n` (ambient dimension minus one).
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint {
            coords: -&self.coords,
        }
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.coords.dot(&other.coords)
    }

    /// Great-circle distance.
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        let d = (&self.coords - &other.coords).norm();
        let s = (&self.coords + &other.coords).norm();
        2.0 * d.atan2(s)
    }
}

/// Stereographic projection from `pole` onto the tangent hyperplane at the
/// antipode, expressed in an orthonormal `frame` of `pole^\perp`.
///
/// `u = (<x, E_i> / (1 - <x, p>))_i`, with inverse
/// `x = (2 sum u_i E_i + (|u|^2 - 1) p) / (1 + |u|^2)`. The round metric pulls
/// back to `(2 / (1 + |u|^2))^2 |du|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoChart {
    pole: SpherePoint,
    frame: Vec<DVector<f64>>,
}

impl StereoChart {
    /// Builds the frame by Gram-Schmidt on the standard basis.
    pub fn new(pole: SpherePoint) -> Self {
        let dim = pole.coords.len();
        let p = pole.coords.clone();
        let mut frame: Vec<DVector<f64>> = Vec::with_capacity(dim - 1);
        // visit basis vectors least aligned with the pole first
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| p[a].abs().partial_cmp(&p[b].abs()).unwrap().then(a.cmp(&b)));
        for &k in &order {
            if frame.len() == dim - 1 {
                break;
            }
            let mut v = DVector::zeros(dim);
            v[k] = 1.0;
            v -= &p * p[k];
            for f in &frame {
                let d = f.dot(&v);
                v -= f * d;
            }
            let norm = v.norm();
            if norm > 1e-8 {
                frame.push(v / norm);
            }
        }
        StereoChart { pole, frame }
    }

    /// Chart projecting from the south pole, frame `e_1, ..., e_n`; the usual
    /// flat coordinates `u = y_{1..n} / (1 + y_{n+1})`.
    pub fn south(n: usize) -> Self {
        let dim = n + 1;
        let frame = (0..n)
            .map(|i| {
                let mut v = DVector::zeros(dim);
                v[i] = 1.0;
                v
            })
            .collect();
        StereoChart {
            pole: SpherePoint::south(n),
            frame,
        }
    }

    /// Chart whose origin is `center` (pole at the antipode).
    pub fn centered_at(center: &SpherePoint) -> Self {
        StereoChart::new(center.antipode())
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    pub fn frame(&self) -> &[DVector<f64>] {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.frame.len()
    }

    pub fn to_chart(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        if x.coords.len() != self.pole.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.pole.coords.len(),
                found: x.coords.len(),
            });
        }
        let denom = 1.0 - x.dot(&self.pole);
        if denom <= 1e-14 {
            return Err(Error::AtPole);
        }
        Ok(self
            .frame
            .iter()
            .map(|e| e.dot(&x.coords) / denom)
            .collect())
    }

    pub fn from_chart(&self, u: &[f64]) -> Result<SpherePoint> {
        if u.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: u.len(),
            });
        }
        let u2: f64 = u.iter().map(|c| c * c).sum();
        let mut x = &self.pole.coords * (u2 - 1.0);
        for (ui, e) in u.iter().zip(&self.frame) {
            x += e * (2.0 * ui);
        }
        x /= 1.0 + u2;
        // renormalize away rounding so SpherePoint's invariant holds
        let norm = x.norm();
        Ok(SpherePoint { coords: x / norm })
    }

    /// Inverse chart evaluated on dual numbers (ambient coordinates as jets
    /// of the chart coordinates).
    pub fn from_chart_dual(&self, u: &[Dual2]) -> Vec<Dual2> {
        let u2 = Dual2::norm_sq(u);
        let inv = (&u2 + 1.0).recip();
        let dim = self.pole.coords.len();
        (0..dim)
            .map(|k| {
                let mut acc = (&u2 - 1.0) * self.pole.coords[k];
                for (ui, e) in u.iter().zip(&self.frame) {
                    if e[k] != 0.0 {
                        acc = acc + ui * (2.0 * e[k]);
                    }
                }
                &acc * &inv
            })
            .collect()
    }

    /// Tangent vectors `d x / d u_i` at chart point `u`, as ambient vectors.
    pub fn tangent_basis(&self, u: &[f64]) -> Vec<DVector<f64>> {
        let u2: f64 = u.iter().map(|c| c * c).sum();
        let d = 1.0 + u2;
        let mut n_vec = &self.pole.coords * (u2 - 1.0);
        for (ui, e) in u.iter().zip(&self.frame) {
            n_vec += e * (2.0 * ui);
        }
        let x = &n_vec / d;
        (0..self.n())
            .map(|i| {
                let dn = &self.frame[i] * 2.0 + &self.pole.coords * (2.0 * u[i]);
                (dn - &x * (2.0 * u[i])) / d
            })
            .collect()
    }

    /// Conformal factor `2 / (1 + |u|^2)` of the chart.
    pub fn conformal_factor(u: &[f64]) -> f64 {
        2.0 / (1.0 + u.iter().map(|c| c * c).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn antipode_of_pole_maps_to_origin() {
        let pole = SpherePoint::normalized(vec![0.3, -0.2, 0.5, 0.7]).unwrap();
        let chart = StereoChart::new(pole.clone());
        let u = chart.to_chart(&pole.antipode()).unwrap();
        assert!(u.iter().all(|c| c.abs() < 1e-15));
        let back = chart.from_chart(&[0.0, 0.0, 0.0]).unwrap();
        assert!((back.as_dvector() - pole.antipode().as_dvector()).amax() < 1e-15);
    }

    #[test]
    fn pole_is_rejected() {
        let chart = StereoChart::south(3);
        assert_eq!(chart.to_chart(&SpherePoint::south(3)), Err(Error::AtPole));
    }

    #[test]
    fn frame_is_orthonormal_and_orthogonal_to_pole() {
        let pole = SpherePoint::normalized(vec![1.0, 2.0, -0.5, 0.1, 0.3]).unwrap();
        let chart = StereoChart::new(pole.clone());
        assert_eq!(chart.frame().len(), 4);
        for (i, a) in chart.frame().iter().enumerate() {
            assert!(a.dot(pole.as_dvector()).abs() < 1e-14);
            for (j, b) in chart.frame().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((a.dot(b) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn south_chart_is_standard_stereographic() {
        let chart = StereoChart::south(3);
        let y = SpherePoint::normalized(vec![0.2, -0.4, 0.1, 0.5]).unwrap();
        let u = chart.to_chart(&y).unwrap();
        for i in 0..3 {
            assert!((u[i] - y.coords()[i] / (1.0 + y.coords()[3])).abs() < 1e-15);
        }
    }

    #[test]
    fn tangent_basis_is_conformal_with_factor() {
        let chart = StereoChart::new(SpherePoint::normalized(vec![0.1, 0.9, -0.3, 0.2]).unwrap());
        let u = [0.4, -1.3, 0.25];
        let f = StereoChart::conformal_factor(&u);
        let es = chart.tangent_basis(&u);
        let x = chart.from_chart(&u).unwrap();
        for (i, a) in es.iter().enumerate() {
            assert!(a.dot(x.as_dvector()).abs() < 1e-14);
            for (j, b) in es.iter().enumerate() {
                let want = if i == j { f * f } else { 0.0 };
                assert!((a.dot(b) - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn dual_inverse_matches_plain_inverse() {
        let chart = StereoChart::new(SpherePoint::normalized(vec![0.5, 0.5, 0.5, 0.5]).unwrap());
        let u = [0.3, 0.1, -0.7];
        let xs = chart.from_chart_dual(&Dual2::variables(&u));
        let x = chart.from_chart(&u).unwrap();
        let es = chart.tangent_basis(&u);
        for k in 0..4 {
            assert!((xs[k].value() - x.coords()[k]).abs() < 1e-15);
            for i in 0..3 {
                assert!((xs[k].grad()[i] - es[i][k]).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn chart_round_trip(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0,
                            pa in -1.0f64..1.0, pb in -1.0f64..1.0) {
            let x = SpherePoint::normalized(vec![a, b, c, d + 1e-3]).unwrap();
            let pole = SpherePoint::normalized(vec![pa, pb, 0.3, -0.8]).unwrap();
            prop_assume!(x.dot(&pole) < 0.999);
            let chart = StereoChart::new(pole);
            let u = chart.to_chart(&x).unwrap();
            let back = chart.from_chart(&u).unwrap();
            prop_assert!((back.as_dvector() - x.as_dvector()).amax() < 1e-10);
        }
    }
}
