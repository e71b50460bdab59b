//! Conformal metrics on `S^n` and horospherically convex hypersurfaces of
//! `H^{n+1}`, in both directions.
//!
//! Given `rho` with `|v|^2 = |grad rho|^2_{g_0}` the immersion is
//!
//! ```text
//! phi = e^rho / 2 (1 + e^{-2 rho}(1 + |v|^2)) (1, x) + e^{-rho} (0, -x + grad rho)
//! psi = e^rho (1, x)          eta = psi - phi
//! ```
//!
//! Principal curvatures are the eigenvalues of `S = -(d phi)^{-1} d eta`; they
//! relate to the Schouten eigenvalues by `lambda = 1/2 - 1 / (1 - kappa)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::chart::SpherePoint;
use crate::conformal::{
    sigma_k, sorted, ConformalMetricField, DerivativeMode, SchoutenAtPoint, SphereJet,
};
use crate::error::{Error, Result};
use crate::lorentz::{minkowski_dot, LorentzVector};

/// Dictionary tolerance with exact derivatives.
pub const DICTIONARY_TOL_ANALYTIC: f64 = 1e-8;
/// Dictionary tolerance with finite-difference derivatives.
pub const DICTIONARY_TOL_FD: f64 = 1e-5;

pub fn dictionary_tol(mode: DerivativeMode) -> f64 {
    match mode {
        DerivativeMode::Analytic => DICTIONARY_TOL_ANALYTIC,
        DerivativeMode::FiniteDifference => DICTIONARY_TOL_FD,
    }
}

/// Slack on the bound `lambda < 1/2` before a point is rejected.
pub fn bound_tol(mode: DerivativeMode) -> f64 {
    match mode {
        DerivativeMode::Analytic => 1e-9,
        DerivativeMode::FiniteDifference => 1e-5,
    }
}

/// `phi(x)` with a flag set when some eigenvalue sits on `1/2`, where the
/// immersion degenerates.
#[derive(Debug, Clone)]
pub struct Representation {
    pub phi: LorentzVector,
    pub degenerate: bool,
}

/// `phi`, `eta`, `psi` and their differentials along the chart basis.
#[derive(Debug, Clone)]
pub struct ImmersionFrame {
    pub phi: DVector<f64>,
    pub eta: DVector<f64>,
    pub psi: DVector<f64>,
    pub dphi: Vec<DVector<f64>>,
    pub deta: Vec<DVector<f64>>,
    pub dpsi: Vec<DVector<f64>>,
}

fn lorentz(n: usize, space_time: DVector<f64>) -> Result<LorentzVector> {
    LorentzVector::new(n, space_time.as_slice().to_vec())
}

fn time_space(t: f64, space: &DVector<f64>) -> DVector<f64> {
    let mut v = DVector::zeros(space.len() + 1);
    v[0] = t;
    v.rows_mut(1, space.len()).copy_from(space);
    v
}

/// Evaluates the immersion and its first derivatives from a 2-jet of `rho`.
pub fn immersion_frame(jet: &SphereJet) -> ImmersionFrame {
    let n = jet.n();
    let x = jet.x.as_dvector();
    let f2 = jet.factor().powi(2);
    let g = &jet.grad;
    let hcov = jet.covariant_hessian();
    let v = jet.sphere_gradient();
    let v2 = jet.gradient_norm_sq();
    let (ep, em) = (jet.value.exp(), (-jet.value).exp());
    let a = 0.5 * (ep + em * (1.0 + v2));
    let b = em;

    let phi_space = x * a + (v.clone() - x) * b;
    let phi = time_space(a, &phi_space);
    let psi = time_space(ep, &(x * ep));
    let eta = &psi - &phi;

    let mut dphi = Vec::with_capacity(n);
    let mut dpsi = Vec::with_capacity(n);
    for j in 0..n {
        // D_{e_j} grad rho = sum_i Hcov_ij e_i / F^2 - g_j x
        let mut hv = DVector::zeros(x.len());
        let mut hg = 0.0;
        for i in 0..n {
            hv += &jet.basis[i] * (hcov[(i, j)] / f2);
            hg += hcov[(i, j)] * g[i] / f2;
        }
        let da = 0.5 * (ep * g[j] - em * (1.0 + v2) * g[j] + 2.0 * em * hg);
        let space = x * da + &jet.basis[j] * (a - b) + (hv - &v * g[j]) * b;
        dphi.push(time_space(da, &space));
        dpsi.push(time_space(ep * g[j], &(x * (ep * g[j]) + &jet.basis[j] * ep)));
    }
    let deta = dpsi.iter().zip(&dphi).map(|(p, q)| p - q).collect();
    ImmersionFrame {
        phi,
        eta,
        psi,
        dphi,
        deta,
        dpsi,
    }
}

impl ImmersionFrame {
    /// Eigenvalues of `-(d phi)^{-1} d eta`, sorted ascending.
    pub fn principal_curvatures(&self) -> Result<Vec<f64>> {
        let n = self.dphi.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            minkowski_dot(self.dphi[i].as_slice(), self.dphi[j].as_slice())
        });
        let nn = DMatrix::from_fn(n, n, |i, j| {
            minkowski_dot(self.dphi[i].as_slice(), self.deta[j].as_slice())
        });
        let scale = m.amax();
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::RankDeficient);
        }
        let m_eigs = SymmetricEigen::new(m.clone()).eigenvalues;
        if m_eigs.min() <= 1e-12 * scale {
            return Err(Error::RankDeficient);
        }
        let chol = m.cholesky().ok_or(Error::RankDeficient)?;
        let l = chol.l();
        let b = (&nn + nn.transpose()) * -0.5;
        let linv = l.clone().try_inverse().ok_or(Error::RankDeficient)?;
        let c = &linv * b * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        Ok(sorted(SymmetricEigen::new(c).eigenvalues.iter().copied().collect()))
    }

    /// `max |<d psi_i, d psi_j> - e^{2 rho} F^2 delta_ij|`, the pullback of the
    /// Minkowski metric under `psi` compared with `e^{2 rho} g_0`.
    pub fn metric_consistency_residual(&self, jet: &SphereJet) -> f64 {
        let n = self.dpsi.len();
        let target = (2.0 * jet.value).exp() * jet.factor().powi(2);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { target } else { 0.0 };
                let got = minkowski_dot(self.dpsi[i].as_slice(), self.dpsi[j].as_slice());
                worst = worst.max((got - want).abs() / (1.0 + target));
            }
        }
        worst
    }
}

fn bounded_schouten(f: &ConformalMetricField, jet: &SphereJet) -> Result<(SchoutenAtPoint, bool)> {
    let sch = SchoutenAtPoint::from_matrix(jet.schouten_matrix());
    let max = sch.max();
    let tol = bound_tol(f.mode());
    if !max.is_finite() {
        return Err(Error::NonFinite);
    }
    if max > 0.5 + tol {
        return Err(Error::EigenvalueBound { max });
    }
    Ok((sch, max >= 0.5 - tol))
}

/// `phi(x)`. Fails when an eigenvalue of the Schouten tensor exceeds `1/2`;
/// dilate with [`crate::conformal::normalize_below_half`] first.
pub fn representation(f: &ConformalMetricField, x: &SpherePoint) -> Result<Representation> {
    let jet = f.jet(x)?;
    let (_, degenerate) = bounded_schouten(f, &jet)?;
    let frame = immersion_frame(&jet);
    Ok(Representation {
        phi: lorentz(f.n(), frame.phi)?,
        degenerate,
    })
}

/// `psi(x) = e^{rho(x)} (1, x)`.
pub fn light_cone_map(f: &ConformalMetricField, x: &SpherePoint) -> Result<LorentzVector> {
    let e = f.rho(x)?.exp();
    let space: Vec<f64> = x.coords().iter().map(|c| e * c).collect();
    LorentzVector::from_time_space(f.n(), e, &space)
}

/// `eta = psi - phi`.
pub fn normal(f: &ConformalMetricField, x: &SpherePoint) -> Result<LorentzVector> {
    let jet = f.jet(x)?;
    bounded_schouten(f, &jet)?;
    lorentz(f.n(), immersion_frame(&jet).eta)
}

pub fn principal_curvatures(f: &ConformalMetricField, x: &SpherePoint) -> Result<Vec<f64>> {
    let jet = f.jet(x)?;
    bounded_schouten(f, &jet)?;
    immersion_frame(&jet).principal_curvatures()
}

pub fn lambda_from_kappa(kappa: f64) -> Result<f64> {
    let d = 1.0 - kappa;
    if d == 0.0 || !kappa.is_finite() {
        return Err(Error::DictionaryPole);
    }
    Ok(0.5 - 1.0 / d)
}

pub fn kappa_from_lambda(lambda: f64) -> Result<f64> {
    let d = 0.5 - lambda;
    if d == 0.0 || !lambda.is_finite() {
        return Err(Error::DictionaryPole);
    }
    Ok(1.0 - 1.0 / d)
}

/// All principal curvatures on the same side of `1`.
pub fn is_horospherically_convex(kappas: &[f64]) -> bool {
    if kappas.is_empty() {
        return false;
    }
    let max = kappas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = kappas.iter().copied().fold(f64::INFINITY, f64::min);
    max < 1.0 || min > 1.0
}

/// `sigma_k((1 + kappa_i) / (2 (1 - kappa_i)))`, which equals
/// `(-1)^k sigma_k(lambda_i)`.
pub fn weingarten_sigma(kappas: &[f64], k: usize, normalized: bool) -> Result<f64> {
    let mut vals = Vec::with_capacity(kappas.len());
    for &kappa in kappas {
        let d = 1.0 - kappa;
        if d == 0.0 {
            return Err(Error::DictionaryPole);
        }
        vals.push((1.0 + kappa) / (2.0 * d));
    }
    sigma_k(&vals, k, normalized)
}

/// Everything known at one point of the correspondence.
#[derive(Debug, Clone)]
pub struct HypersurfaceJet {
    pub x: SpherePoint,
    pub rho: f64,
    pub phi: LorentzVector,
    pub eta: LorentzVector,
    pub psi: LorentzVector,
    pub kappas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// `max |lambda_i - (1/2 - 1/(1 - kappa_i))|` over sorted lists.
    pub dictionary_residual: f64,
    pub metric_residual: f64,
}

/// Residuals of the quadric relations of a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetResiduals {
    pub phi_phi: f64,
    pub eta_eta: f64,
    pub phi_eta: f64,
    pub psi_psi: f64,
    pub psi_closed: f64,
}

impl JetResiduals {
    pub fn max(&self) -> f64 {
        [self.phi_phi, self.eta_eta, self.phi_eta, self.psi_psi, self.psi_closed]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

impl HypersurfaceJet {
    pub fn residuals(&self) -> JetResiduals {
        let (p, e, s) = (self.phi.coords(), self.eta.coords(), self.psi.coords());
        let er = self.rho.exp();
        let mut psi_closed = (s[0] - er).abs();
        for (a, b) in s[1..].iter().zip(self.x.coords()) {
            psi_closed = psi_closed.max((a - er * b).abs());
        }
        JetResiduals {
            phi_phi: (minkowski_dot(p, p) + 1.0).abs(),
            eta_eta: (minkowski_dot(e, e) - 1.0).abs(),
            phi_eta: minkowski_dot(p, e).abs(),
            psi_psi: minkowski_dot(s, s).abs(),
            psi_closed,
        }
    }

    /// Sorted `1/2 - 1/(1 - kappa_i)`.
    pub fn lambdas_from_kappas(&self) -> Result<Vec<f64>> {
        lambdas_from_kappas(&self.kappas)
    }
}

pub fn lambdas_from_kappas(kappas: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(kappas.len());
    for &k in kappas {
        out.push(lambda_from_kappa(k)?);
    }
    Ok(sorted(out))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Builds the jet at `x` and checks the eigenvalue dictionary at the mode's
/// tolerance.
pub fn jet(f: &ConformalMetricField, x: &SpherePoint) -> Result<HypersurfaceJet> {
    jet_with_tol(f, x, dictionary_tol(f.mode()))
}

pub fn jet_with_tol(f: &ConformalMetricField, x: &SpherePoint, tol: f64) -> Result<HypersurfaceJet> {
    let sj = f.jet(x)?;
    let (sch, _) = bounded_schouten(f, &sj)?;
    let frame = immersion_frame(&sj);
    let kappas = frame.principal_curvatures()?;
    let from_kappa = lambdas_from_kappas(&kappas)?;
    let dictionary_residual = max_diff(&sch.eigenvalues, &from_kappa);
    if !(dictionary_residual <= tol) {
        return Err(Error::DictionaryMismatch {
            schouten: sch.eigenvalues,
            from_kappa,
        });
    }
    let n = f.n();
    Ok(HypersurfaceJet {
        x: x.clone(),
        rho: sj.value,
        metric_residual: frame.metric_consistency_residual(&sj),
        phi: lorentz(n, frame.phi)?,
        eta: lorentz(n, frame.eta)?,
        psi: lorentz(n, frame.psi)?,
        kappas,
        lambdas: sch.eigenvalues,
        dictionary_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::StereoChart;
    use crate::dual::Dual2;
    use proptest::prelude::*;

    fn pt(c: &[f64]) -> SpherePoint {
        SpherePoint::normalized(c.to_vec()).unwrap()
    }

    fn samples(n: usize, count: usize) -> Vec<SpherePoint> {
        (0..count)
            .map(|i| {
                let c: Vec<f64> = (0..=n)
                    .map(|j| ((i * 7 + j * 13) as f64 * 0.731).sin() + 0.05 * j as f64)
                    .collect();
                pt(&c)
            })
            .collect()
    }

    /// Shape operator from central differences of `phi` and `eta` in the
    /// chart centered at `x`; shares no derivative code with the immersion.
    fn fd_kappas(f: &ConformalMetricField, x: &SpherePoint) -> Vec<f64> {
        let chart = StereoChart::centered_at(x);
        let n = f.n();
        let h = 1e-5;
        let at = |u: &[f64]| {
            let y = chart.from_chart(u).unwrap();
            let j = f.jet(&y).unwrap();
            let fr = immersion_frame(&j);
            (fr.phi, fr.eta)
        };
        let mut dphi = Vec::new();
        let mut deta = Vec::new();
        for i in 0..n {
            let mut up = vec![0.0; n];
            up[i] = h;
            let mut um = vec![0.0; n];
            um[i] = -h;
            let (pp, ep) = at(&up);
            let (pm, em) = at(&um);
            dphi.push((pp - pm) / (2.0 * h));
            deta.push((ep - em) / (2.0 * h));
        }
        let m = DMatrix::from_fn(n, n, |i, j| minkowski_dot(dphi[i].as_slice(), dphi[j].as_slice()));
        let nn = DMatrix::from_fn(n, n, |i, j| minkowski_dot(dphi[i].as_slice(), deta[j].as_slice()));
        let s = -m.try_inverse().unwrap() * nn;
        let mut e: Vec<f64> = s.complex_eigenvalues().iter().map(|c| c.re).collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn round_metric_collapses_to_origin() {
        let f = ConformalMetricField::round(3).unwrap();
        for x in samples(3, 10) {
            let r = representation(&f, &x).unwrap();
            assert!(r.degenerate);
            let o = LorentzVector::origin(3).unwrap();
            assert!(r.phi.max_abs_diff(&o) < 1e-12);
            assert_eq!(principal_curvatures(&f, &x).unwrap_err(), Error::RankDeficient);
        }
    }

    #[test]
    fn constant_rho_gives_geodesic_sphere() {
        for t in [0.5, 1.0, 2.0] {
            let f = ConformalMetricField::constant(4, t).unwrap();
            for x in samples(4, 20) {
                let r = representation(&f, &x).unwrap();
                assert!(!r.degenerate);
                let p = r.phi.coords();
                assert!((p[0] - t.cosh()).abs() < 1e-12);
                for (a, b) in p[1..].iter().zip(x.coords()) {
                    assert!((a - t.sinh() * b).abs() < 1e-12);
                }
                let e = normal(&f, &x).unwrap();
                assert!((e.coords()[0] - t.sinh()).abs() < 1e-12);
                let k = principal_curvatures(&f, &x).unwrap();
                for kk in &k {
                    assert!((kk + 1.0 / t.tanh()).abs() < 1e-10);
                }
                let j = jet(&f, &x).unwrap();
                assert!(j.residuals().max() < 1e-12);
                for l in &j.lambdas {
                    assert!((l - (-2.0 * t).exp() / 2.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn shape_operator_matches_finite_differences() {
        let f = ConformalMetricField::new(3, |y: &[Dual2]| {
            &(&y[0] * 0.2) + &(&(&y[1] * &y[3]) * 0.15) + 0.9
        })
        .unwrap();
        for x in samples(3, 6) {
            let an = principal_curvatures(&f, &x).unwrap();
            let fd = fd_kappas(&f, &x);
            for (a, b) in an.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-6, "{an:?} {fd:?}");
            }
        }
    }

    #[test]
    fn dictionary_holds_for_generic_metrics() {
        let f = ConformalMetricField::new(4, |y: &[Dual2]| {
            (&y[2] * 0.3).sin() + (&y[4] * &y[4]) * 0.2 + &y[0] * 0.1 + 1.2
        })
        .unwrap();
        for mode in [DerivativeMode::Analytic, DerivativeMode::FiniteDifference] {
            let f = f.clone().with_mode(mode);
            for x in samples(4, 8) {
                let j = jet(&f, &x).unwrap();
                assert!(j.dictionary_residual <= dictionary_tol(mode));
                assert!(j.residuals().max() < 1e-9);
                assert!(j.metric_residual < 1e-6);
                assert!(is_horospherically_convex(&j.kappas));
            }
        }
    }

    #[test]
    fn eigenvalue_bound_is_reported() {
        let f = ConformalMetricField::constant(3, -0.5).unwrap();
        let x = pt(&[0.1, 0.2, 0.3, 0.4]);
        assert!(matches!(representation(&f, &x), Err(Error::EigenvalueBound { .. })));
        assert!(light_cone_map(&f, &x).is_ok());
    }

    #[test]
    fn light_cone_map_values() {
        let x = pt(&[0.5, -0.5, 0.5, 0.5]);
        let f = ConformalMetricField::round(3).unwrap();
        let p = light_cone_map(&f, &x).unwrap();
        assert_eq!(p.coords()[0], 1.0);
        let f = ConformalMetricField::constant(3, 0.7).unwrap();
        let p = light_cone_map(&f, &x).unwrap();
        assert!((p.coords()[2] + 0.5 * 0.7f64.exp()).abs() < 1e-15);
        assert!(minkowski_dot(p.coords(), p.coords()).abs() < 1e-14);
    }

    #[test]
    fn dictionary_values() {
        assert_eq!(lambda_from_kappa(0.0).unwrap(), -0.5);
        assert_eq!(lambda_from_kappa(-1.0).unwrap(), 0.0);
        for t in [0.5f64, 1.0, 2.0] {
            let l = lambda_from_kappa(-1.0 / t.tanh()).unwrap();
            assert!((l - (-2.0 * t).exp() / 2.0).abs() < 1e-14);
        }
        assert_eq!(lambda_from_kappa(1.0).unwrap_err(), Error::DictionaryPole);
        assert_eq!(kappa_from_lambda(0.5).unwrap_err(), Error::DictionaryPole);
    }

    proptest! {
        #[test]
        fn dictionary_round_trip(k in -50.0f64..0.99) {
            let back = kappa_from_lambda(lambda_from_kappa(k).unwrap()).unwrap();
            prop_assert!((back - k).abs() <= 1e-12 * (1.0 + k.abs()));
        }

        #[test]
        fn weingarten_is_signed_sigma_of_lambda(ks in proptest::collection::vec(-5.0f64..0.9, 3..6)) {
            let lambdas: Vec<f64> = ks.iter().map(|k| lambda_from_kappa(*k).unwrap()).collect();
            for k in 1..=ks.len() {
                let w = weingarten_sigma(&ks, k, false).unwrap();
                let s = sigma_k(&lambdas, k, false).unwrap();
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                prop_assert!((w - sign * s).abs() <= 1e-9 * (1.0 + s.abs()));
            }
        }
    }

    #[test]
    fn convexity_and_weingarten_examples() {
        assert!(is_horospherically_convex(&[-2.0, -3.0, -0.5]));
        assert!(!is_horospherically_convex(&[0.5, 2.0]));
        assert!(is_horospherically_convex(&[0.0; 4]));
        assert_eq!(weingarten_sigma(&[0.0; 3], 1, false).unwrap(), 1.5);
        assert_eq!(weingarten_sigma(&[-1.0; 4], 2, false).unwrap(), 0.0);
        assert!(weingarten_sigma(&[1.0, 0.0, 0.0], 1, false).is_err());
    }
}
