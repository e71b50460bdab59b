//! Conformal metrics `g = e^{2 rho} g_0` on domains of the round sphere.
//!
//! A [`ConformalMetricField`] stores `rho` as a function of ambient
//! coordinates written over [`Dual2`], so the same closure yields values,
//! exact chart derivatives (analytic mode) or values for finite differences
//! (finite-difference mode).
//!
//! The Schouten endomorphism is computed in a stereographic chart `u` where
//! `g = e^{2U} |du|^2` with `U = rho + log(2 / (1 + |u|^2))`:
//!
//! ```text
//! Sch_g = -Hess(U) + dU (x) dU - 1/2 |dU|^2 Id,     g^{-1} Sch_g = e^{-2U} Sch_g
//! ```

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::chart::{SpherePoint, StereoChart};
use crate::dual::Dual2;
use crate::error::{Error, Result};

/// Exponent `rho` as a function of the ambient coordinates `y in R^{n+1}`.
pub type RhoFn = Arc<dyn Fn(&[Dual2]) -> Dual2 + Send + Sync>;
/// Membership predicate for the domain `Omega` (ambient coordinates).
pub type DomainFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Margin used by [`normalize_below_half`].
pub const HALF_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaConvention {
    #[default]
    Raw,
    Normalized,
}

impl fmt::Display for SigmaConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaConvention::Raw => write!(f, "raw"),
            SigmaConvention::Normalized => write!(f, "normalized"),
        }
    }
}

#[derive(Clone)]
pub struct ConformalMetricField {
    n: usize,
    rho: RhoFn,
    domain: DomainFn,
    mode: DerivativeMode,
    offset: f64,
}

impl fmt::Debug for ConformalMetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalMetricField")
            .field("n", &self.n)
            .field("mode", &self.mode)
            .field("offset", &self.offset)
            .finish_non_exhaustive()
    }
}

impl ConformalMetricField {
    /// Field defined on all of `S^n`.
    pub fn new<F>(n: usize, rho: F) -> Result<Self>
    where
        F: Fn(&[Dual2]) -> Dual2 + Send + Sync + 'static,
    {
        ConformalMetricField::with_domain(n, rho, |_: &[f64]| true)
    }

    pub fn with_domain<F, D>(n: usize, rho: F, domain: D) -> Result<Self>
    where
        F: Fn(&[Dual2]) -> Dual2 + Send + Sync + 'static,
        D: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        ConformalMetricField::from_parts(n, Arc::new(rho), Arc::new(domain))
    }

    pub fn from_parts(n: usize, rho: RhoFn, domain: DomainFn) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        Ok(ConformalMetricField {
            n,
            rho,
            domain,
            mode: DerivativeMode::Analytic,
            offset: 0.0,
        })
    }

    /// `rho` identically equal to `c`.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        ConformalMetricField::new(n, move |y: &[Dual2]| y[0].lift(c))
    }

    /// The round metric `g_0`.
    pub fn round(n: usize) -> Result<Self> {
        ConformalMetricField::constant(n, 0.0)
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    /// Constant added to `rho` by dilations.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn rho_fn(&self) -> &RhoFn {
        &self.rho
    }

    pub fn domain_fn(&self) -> &DomainFn {
        &self.domain
    }

    pub fn contains(&self, x: &SpherePoint) -> bool {
        x.coords().len() == self.n + 1 && (self.domain)(x.coords())
    }

    /// `rho(x)`.
    pub fn rho(&self, x: &SpherePoint) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.rho_unchecked(x.coords()))
    }

    fn rho_unchecked(&self, y: &[f64]) -> f64 {
        (self.rho)(&Dual2::plain(y)).value() + self.offset
    }

    /// `rho` evaluated on ambient jets, offset included.
    pub fn rho_dual(&self, y: &[Dual2]) -> Dual2 {
        (self.rho)(y) + self.offset
    }

    fn check_point(&self, x: &SpherePoint) -> Result<()> {
        if x.coords().len() != self.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                found: x.coords().len(),
            });
        }
        if !(self.domain)(x.coords()) {
            return Err(Error::OutsideDomain);
        }
        Ok(())
    }

    /// Second-order jet of `rho` at `x` in the chart centered at `x`.
    pub fn jet(&self, x: &SpherePoint) -> Result<SphereJet> {
        self.jet_in_chart(x, &StereoChart::centered_at(x))
    }

    /// Second-order jet of `rho` at `x` in an arbitrary chart.
    pub fn jet_in_chart(&self, x: &SpherePoint, chart: &StereoChart) -> Result<SphereJet> {
        self.check_point(x)?;
        let u = chart.to_chart(x)?;
        let n = self.n;
        let (value, grad, hess) = match self.mode {
            DerivativeMode::Analytic => {
                let seeds = Dual2::variables(&u);
                let y = chart.from_chart_dual(&seeds);
                let r = self.rho_dual(&y);
                if !r.value().is_finite() {
                    return Err(Error::NonFinite);
                }
                let grad = DVector::from_column_slice(r.grad());
                let hess = DMatrix::from_row_slice(n, n, r.hess_flat());
                (r.value(), grad, hess)
            }
            DerivativeMode::FiniteDifference => self.fd_jet(chart, &u)?,
        };
        Ok(SphereJet {
            x: x.clone(),
            basis: chart.tangent_basis(&u),
            chart: chart.clone(),
            u,
            value,
            grad,
            hess,
        })
    }

    fn fd_jet(&self, chart: &StereoChart, u: &[f64]) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let eval = |p: &[f64]| -> Result<f64> {
            let y = chart.from_chart(p)?;
            if !(self.domain)(y.coords()) {
                return Err(Error::StencilOutsideDomain);
            }
            let v = self.rho_unchecked(y.coords());
            if !v.is_finite() {
                return Err(Error::StencilOutsideDomain);
            }
            Ok(v)
        };
        let f0 = eval(u)?;
        let hg: Vec<f64> = u.iter().map(|c| FD_GRAD_STEP * (1.0 + c.abs())).collect();
        let hh: Vec<f64> = u.iter().map(|c| FD_HESS_STEP * (1.0 + c.abs())).collect();
        // one Richardson level: (4 D(h/2) - D(h)) / 3
        let g1 = central_gradient(&eval, u, &hg, 1.0)?;
        let g2 = central_gradient(&eval, u, &hg, 0.5)?;
        let grad = (g2 * 4.0 - g1) / 3.0;
        let h1 = central_hessian(&eval, u, f0, &hh, 1.0)?;
        let h2 = central_hessian(&eval, u, f0, &hh, 0.5)?;
        let hess = (h2 * 4.0 - h1) / 3.0;
        Ok((f0, grad, hess))
    }
}

fn central_gradient(
    eval: &dyn Fn(&[f64]) -> Result<f64>,
    u: &[f64],
    h: &[f64],
    scale: f64,
) -> Result<DVector<f64>> {
    let n = u.len();
    let mut grad = DVector::zeros(n);
    let mut p = u.to_vec();
    for i in 0..n {
        let hi = h[i] * scale;
        p[i] = u[i] + hi;
        let fp = eval(&p)?;
        p[i] = u[i] - hi;
        let fm = eval(&p)?;
        p[i] = u[i];
        grad[i] = (fp - fm) / (2.0 * hi);
    }
    Ok(grad)
}

fn central_hessian(
    eval: &dyn Fn(&[f64]) -> Result<f64>,
    u: &[f64],
    f0: f64,
    h: &[f64],
    scale: f64,
) -> Result<DMatrix<f64>> {
    let n = u.len();
    let mut hess = DMatrix::zeros(n, n);
    let mut p = u.to_vec();
    for i in 0..n {
        let hi = h[i] * scale;
        p[i] = u[i] + hi;
        let fp = eval(&p)?;
        p[i] = u[i] - hi;
        let fm = eval(&p)?;
        p[i] = u[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in (i + 1)..n {
            let hj = h[j] * scale;
            let mut corner = |si: f64, sj: f64| -> Result<f64> {
                p[i] = u[i] + si * hi;
                p[j] = u[j] + sj * hj;
                let v = eval(&p);
                p[i] = u[i];
                p[j] = u[j];
                v
            };
            let v = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?)
                / (4.0 * hi * hj);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// Central-difference step for gradients, `cbrt(eps)`.
pub const FD_GRAD_STEP: f64 = 6.055454452393343e-6;
/// Central-difference step for Hessians, `eps^{1/4}`.
pub const FD_HESS_STEP: f64 = 1.220703125e-4;

/// Value, chart gradient and chart Hessian of `rho` at a point.
#[derive(Debug, Clone)]
pub struct SphereJet {
    pub x: SpherePoint,
    pub chart: StereoChart,
    pub u: Vec<f64>,
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    /// `d x / d u_i` as ambient vectors.
    pub basis: Vec<DVector<f64>>,
}

impl SphereJet {
    pub fn n(&self) -> usize {
        self.grad.len()
    }

    /// Chart conformal factor `F = 2 / (1 + |u|^2)`.
    pub fn factor(&self) -> f64 {
        StereoChart::conformal_factor(&self.u)
    }

    fn log_factor_grad(&self) -> DVector<f64> {
        let d = 1.0 + self.u.iter().map(|c| c * c).sum::<f64>();
        DVector::from_iterator(self.n(), self.u.iter().map(|c| -2.0 * c / d))
    }

    /// `grad^{g_0} rho` as an ambient vector tangent to the sphere at `x`.
    pub fn sphere_gradient(&self) -> DVector<f64> {
        let f2 = self.factor().powi(2);
        let mut v = DVector::zeros(self.x.coords().len());
        for (g, e) in self.grad.iter().zip(&self.basis) {
            v += e * (g / f2);
        }
        v
    }

    /// `|grad^{g_0} rho|^2_{g_0}`.
    pub fn gradient_norm_sq(&self) -> f64 {
        self.grad.norm_squared() / self.factor().powi(2)
    }

    /// Covariant `g_0`-Hessian components in the chart basis.
    pub fn covariant_hessian(&self) -> DMatrix<f64> {
        let w = self.log_factor_grad();
        let wg = w.dot(&self.grad);
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { wg } else { 0.0 };
            self.hess[(i, j)] - (w[j] * self.grad[i] + w[i] * self.grad[j] - delta)
        })
    }

    /// Schouten endomorphism `g^{-1} Sch_g` in the chart basis.
    pub fn schouten_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let d = 1.0 + self.u.iter().map(|c| c * c).sum::<f64>();
        let w = self.log_factor_grad();
        let big_u = self.value + (2.0 / d).ln();
        let du = &self.grad + &w;
        let du2 = du.norm_squared();
        let scale = (-2.0 * big_u).exp();
        DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            let w_ij = -2.0 * delta / d + 4.0 * self.u[i] * self.u[j] / (d * d);
            let hess_u = self.hess[(i, j)] + w_ij;
            scale * (-hess_u + du[i] * du[j] - 0.5 * du2 * delta)
        })
    }
}

/// Schouten endomorphism and its sorted eigenvalues at a point.
#[derive(Debug, Clone)]
pub struct SchoutenAtPoint {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl SchoutenAtPoint {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eigenvalues = sorted(SymmetricEigen::new(sym).eigenvalues.iter().copied().collect());
        SchoutenAtPoint {
            matrix,
            eigenvalues,
        }
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("n >= 3")
    }

    /// `max |A_ij - A_ji|` of the chart matrix.
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }
}

pub(crate) fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn to_chart(chart: &StereoChart, x: &SpherePoint) -> Result<Vec<f64>> {
    chart.to_chart(x)
}

pub fn from_chart(chart: &StereoChart, u: &[f64]) -> Result<SpherePoint> {
    chart.from_chart(u)
}

/// `grad^{g_0} rho` at `x` as an ambient vector of length `n + 1`.
pub fn sphere_gradient(f: &ConformalMetricField, x: &SpherePoint) -> Result<Vec<f64>> {
    Ok(f.jet(x)?.sphere_gradient().as_slice().to_vec())
}

pub fn schouten(f: &ConformalMetricField, x: &SpherePoint) -> Result<SchoutenAtPoint> {
    Ok(SchoutenAtPoint::from_matrix(f.jet(x)?.schouten_matrix()))
}

pub fn schouten_in_chart(
    f: &ConformalMetricField,
    x: &SpherePoint,
    chart: &StereoChart,
) -> Result<SchoutenAtPoint> {
    Ok(SchoutenAtPoint::from_matrix(f.jet_in_chart(x, chart)?.schouten_matrix()))
}

/// A chart distinct from the default one at `x`: its pole is the antipode
/// of `x` tilted by about 0.5 rad.
pub fn secondary_chart(x: &SpherePoint) -> StereoChart {
    let base = StereoChart::centered_at(x);
    let tilt = &base.frame()[0] * 0.5;
    let pole = SpherePoint::normalized((x.antipode().as_dvector() + tilt).as_slice().to_vec())
        .expect("nonzero");
    StereoChart::new(pole)
}

/// Elementary symmetric polynomial `e_k(eigs)`, optionally divided by
/// `binomial(n, k)`.
pub fn sigma_k(eigs: &[f64], k: usize, normalized: bool) -> Result<f64> {
    let n = eigs.len();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let e = elementary_symmetric(eigs, k);
    Ok(if normalized { e / binomial(n, k) } else { e })
}

/// All elementary symmetric polynomials `e_0, ..., e_k`.
pub fn elementary_symmetric_all(eigs: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &l in eigs {
        for j in (1..=k).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e
}

fn elementary_symmetric(eigs: &[f64], k: usize) -> f64 {
    elementary_symmetric_all(eigs, k)[k]
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `g_t = e^t g`, i.e. `rho + t / 2`.
pub fn dilate(f: &ConformalMetricField, t: f64) -> ConformalMetricField {
    let mut out = f.clone();
    out.offset += 0.5 * t;
    out
}

/// Dilates until every sampled eigenvalue is below `1/2 - HALF_MARGIN`.
/// Returns `t = 0` when the field already satisfies the bound.
pub fn normalize_below_half(
    f: &ConformalMetricField,
    samples: &[SpherePoint],
) -> Result<(ConformalMetricField, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut max = f64::NEG_INFINITY;
    for x in samples {
        max = max.max(schouten(f, x)?.max());
    }
    if !max.is_finite() {
        return Err(Error::NonFinite);
    }
    let t = dilation_for_max(max);
    Ok((dilate(f, t), t))
}

/// Dilation parameter bringing a maximum eigenvalue `max` below
/// `1/2 - HALF_MARGIN` (target `1/2 - 2 HALF_MARGIN`).
pub fn dilation_for_max(max: f64) -> f64 {
    let bound = 0.5 - HALF_MARGIN;
    if max < bound {
        0.0
    } else {
        (max / (0.5 - 2.0 * HALF_MARGIN)).ln()
    }
}

/// Groups sorted eigenvalues into clusters of (mean value, multiplicity)
/// using the gap threshold `rel * (1 + spread)`.
pub fn cluster_eigenvalues(sorted_eigs: &[f64], rel: f64) -> Vec<(f64, usize)> {
    if sorted_eigs.is_empty() {
        return Vec::new();
    }
    let spread = sorted_eigs[sorted_eigs.len() - 1] - sorted_eigs[0];
    let gap = rel * (1.0 + spread.abs());
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted_eigs.len() {
        if i == sorted_eigs.len() || sorted_eigs[i] - sorted_eigs[i - 1] > gap {
            let chunk = &sorted_eigs[start..i];
            out.push((chunk.iter().sum::<f64>() / chunk.len() as f64, chunk.len()));
            start = i;
        }
    }
    out
}

/// Default multiplicity threshold for eigenvalue clustering.
pub const MULTIPLICITY_REL_TOL: f64 = 1e-5;
