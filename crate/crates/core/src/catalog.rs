//! Isoparametric conformal metrics and their hypersurfaces in closed form.
//!
//! Each entry carries a parametrization `p -> (phi(p), eta(p))` of a
//! hypersurface with constant principal curvatures, the support function
//! `rho(p)` and Gauss map `G(p)` written out independently, and the
//! conformal metric `e^{2 rho} g_0` on `G(Omega)` expressed in ambient sphere
//! coordinates. Verification ties these three descriptions together through
//! the correspondence pipeline.
//!
//! The light cone map of every entry is `psi = phi + eta`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{SpherePoint, StereoChart};
use crate::conformal::{cluster_eigenvalues, ConformalMetricField, DerivativeMode, MULTIPLICITY_REL_TOL};
use crate::correspondence::{
    dictionary_tol, is_horospherically_convex, jet_with_tol, lambda_from_kappa, HypersurfaceJet,
};
use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::lorentz::{classify, minkowski_dot, LorentzVector, Quadric, QUADRIC_TOL};
use crate::report::{fmt_list, CheckRecord, VerificationReport};

/// Relative inset from the boundary of `Omega` used when sampling.
pub const SAMPLE_INSET: f64 = 1e-3;
/// Radius of the parameter ball sampled in unbounded directions.
pub const UNBOUNDED_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub enum EntryKind {
    TotallyGeodesic { r: f64 },
    Equidistant { r: f64, t: f64 },
    Product { k: usize, r: f64 },
    GeodesicSphere { t: f64 },
    Horosphere { rho0: f64, x0: SpherePoint },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    n: usize,
    kind: EntryKind,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::DimensionTooSmall(n))
    } else {
        Ok(())
    }
}

pub fn totally_geodesic(r: f64, n: usize) -> Result<CatalogEntry> {
    check_n(n)?;
    positive("r", r)?;
    Ok(CatalogEntry {
        n,
        kind: EntryKind::TotallyGeodesic { r },
    })
}

pub fn equidistant(r: f64, t: f64, n: usize) -> Result<CatalogEntry> {
    check_n(n)?;
    positive("r", r)?;
    positive("t", t)?;
    Ok(CatalogEntry {
        n,
        kind: EntryKind::Equidistant { r, t },
    })
}

pub fn product_hk_snk(k: usize, r: f64, n: usize) -> Result<CatalogEntry> {
    check_n(n)?;
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n: n - 1 });
    }
    positive("r", r)?;
    Ok(CatalogEntry {
        n,
        kind: EntryKind::Product { k, r },
    })
}

pub fn geodesic_sphere(t: f64, n: usize) -> Result<CatalogEntry> {
    check_n(n)?;
    positive("t", t)?;
    Ok(CatalogEntry {
        n,
        kind: EntryKind::GeodesicSphere { t },
    })
}

pub fn horosphere_entry(rho0: f64, x0: SpherePoint, n: usize) -> Result<CatalogEntry> {
    check_n(n)?;
    if x0.coords().len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: x0.coords().len(),
        });
    }
    if !rho0.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(CatalogEntry {
        n,
        kind: EntryKind::Horosphere { rho0, x0 },
    })
}

/// A principal curvature / Schouten eigenvalue pairing proposed for an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub label: String,
    pub kappa: f64,
    pub lambda: f64,
}

fn lv(c: Vec<f64>) -> DVector<f64> {
    DVector::from_vec(c)
}

impl CatalogEntry {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &EntryKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            EntryKind::TotallyGeodesic { .. } => "totally-geodesic",
            EntryKind::Equidistant { .. } => "equidistant",
            EntryKind::Product { .. } => "product",
            EntryKind::GeodesicSphere { .. } => "geodesic-sphere",
            EntryKind::Horosphere { .. } => "horosphere",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match &self.kind {
            EntryKind::TotallyGeodesic { r } => vec![("r", *r)],
            EntryKind::Equidistant { r, t } => vec![("r", *r), ("t", *t)],
            EntryKind::Product { k, r } => vec![("k", *k as f64), ("r", *r)],
            EntryKind::GeodesicSphere { t } => vec![("t", *t)],
            EntryKind::Horosphere { rho0, .. } => vec![("rho0", *rho0)],
        }
    }

    /// `name:key=value,...` with `n` appended.
    pub fn label(&self) -> String {
        let ps: Vec<String> = self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}:{} n={}", self.name(), ps.join(","), self.n)
    }

    /// The horosphere has a constant Gauss map and no metric.
    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind, EntryKind::Horosphere { .. })
    }

    /// Whether `p` lies in the parameter domain `Omega`.
    pub fn in_parameter_domain(&self, p: &[f64]) -> bool {
        if p.len() != self.n {
            return false;
        }
        let sq = |s: &[f64]| s.iter().map(|c| c * c).sum::<f64>();
        match &self.kind {
            EntryKind::TotallyGeodesic { r } | EntryKind::Equidistant { r, .. } => sq(p) < r * r,
            EntryKind::Product { k, r } => sq(&p[*k..]) < r * r,
            EntryKind::GeodesicSphere { .. } | EntryKind::Horosphere { .. } => true,
        }
    }

    /// Draws `count` parameters by rejection sampling with the boundary
    /// inset; deterministic in `seed`.
    pub fn sample_parameters(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.n;
        let ball = |rng: &mut ChaCha8Rng, dim: usize, radius: f64| -> Vec<f64> {
            loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if v.iter().map(|c| c * c).sum::<f64>() < 1.0 {
                    return v.into_iter().map(|c| c * radius).collect();
                }
            }
        };
        let inset = 1.0 - SAMPLE_INSET;
        (0..count)
            .map(|_| match &self.kind {
                EntryKind::TotallyGeodesic { r } | EntryKind::Equidistant { r, .. } => {
                    ball(&mut rng, n, r * inset)
                }
                EntryKind::Product { k, r } => {
                    let mut p = ball(&mut rng, *k, UNBOUNDED_RADIUS);
                    p.extend(ball(&mut rng, n - k, r * inset));
                    p
                }
                EntryKind::GeodesicSphere { .. } | EntryKind::Horosphere { .. } => {
                    ball(&mut rng, n, UNBOUNDED_RADIUS)
                }
            })
            .collect()
    }

    /// The immersion `phi(p)` in `L^{n+2}`.
    pub fn phi_closed(&self, p: &[f64]) -> DVector<f64> {
        let sq = |s: &[f64]| s.iter().map(|c| c * c).sum::<f64>();
        match &self.kind {
            EntryKind::TotallyGeodesic { r } => {
                let s = (r * r - sq(p)).sqrt();
                let mut c = vec![(1.0 + r * r) / (2.0 * s)];
                c.extend(p.iter().map(|x| x / s));
                c.push((1.0 - r * r) / (2.0 * s));
                lv(c)
            }
            EntryKind::Equidistant { r, t } => {
                let p2 = sq(p);
                let big_r2 = t * t + r * r;
                let b = -t + (big_r2 - p2).sqrt();
                let mut c = vec![(1.0 + p2 + b * b) / (2.0 * b)];
                c.extend(p.iter().map(|x| x / b));
                c.push((1.0 - p2 - b * b) / (2.0 * b));
                lv(c)
            }
            EntryKind::Product { k, r } => {
                let (x, z) = p.split_at(*k);
                let mut c = vec![(sq(x) + 1.0 + r * r).sqrt()];
                c.extend_from_slice(x);
                c.extend_from_slice(z);
                c.push((r * r - sq(z)).sqrt());
                lv(c)
            }
            EntryKind::GeodesicSphere { t } => {
                let y = south_chart_point(p);
                let mut c = vec![t.cosh()];
                c.extend(y.iter().map(|v| t.sinh() * v));
                lv(c)
            }
            EntryKind::Horosphere { rho0, x0 } => {
                let (v, w, frame) = horosphere_frame(*rho0, x0);
                let u2 = sq(p);
                let mut out = &w + &v * (0.5 * (1.0 + u2));
                for (ui, e) in p.iter().zip(&frame) {
                    out += e * *ui;
                }
                out
            }
        }
    }

    /// The unit normal `eta(p)`.
    pub fn eta_closed(&self, p: &[f64]) -> DVector<f64> {
        let sq = |s: &[f64]| s.iter().map(|c| c * c).sum::<f64>();
        match &self.kind {
            EntryKind::TotallyGeodesic { r } => {
                let mut c = vec![0.0; self.n + 2];
                c[0] = (1.0 - r * r) / (2.0 * r);
                c[self.n + 1] = (1.0 + r * r) / (2.0 * r);
                lv(c)
            }
            EntryKind::Equidistant { r, t } => {
                let p2 = sq(p);
                let big_r2 = t * t + r * r;
                let big_r = big_r2.sqrt();
                let s = (big_r2 - p2).sqrt();
                let b = -t + s;
                let d = 2.0 * big_r * b;
                let mut c = vec![((1.0 - t * t - big_r2) * s + 2.0 * t * big_r2) / d];
                c.extend(p.iter().map(|x| t * x / (big_r * b)));
                c.push(((1.0 + t * t + big_r2) * s - 2.0 * t * big_r2) / d);
                lv(c)
            }
            EntryKind::Product { k, r } => {
                let (x, z) = p.split_at(*k);
                let q = (1.0 + r * r).sqrt();
                let mut c = vec![r * (sq(x) + 1.0 + r * r).sqrt() / q];
                c.extend(x.iter().map(|v| r * v / q));
                c.extend(z.iter().map(|v| q * v / r));
                c.push(q * (r * r - sq(z)).sqrt() / r);
                lv(c)
            }
            EntryKind::GeodesicSphere { t } => {
                let y = south_chart_point(p);
                let mut c = vec![t.sinh()];
                c.extend(y.iter().map(|v| t.cosh() * v));
                lv(c)
            }
            EntryKind::Horosphere { rho0, x0 } => {
                let (v, _, _) = horosphere_frame(*rho0, x0);
                v - self.phi_closed(p)
            }
        }
    }

    /// `psi = phi + eta`.
    pub fn psi_closed(&self, p: &[f64]) -> DVector<f64> {
        self.phi_closed(p) + self.eta_closed(p)
    }

    /// Support function written out on its own (not read off `psi`).
    pub fn rho_closed(&self, p: &[f64]) -> f64 {
        let sq = |s: &[f64]| s.iter().map(|c| c * c).sum::<f64>();
        match &self.kind {
            EntryKind::TotallyGeodesic { r } => {
                let s = (r * r - sq(p)).sqrt();
                ((r * (1.0 + r * r) + (1.0 - r * r) * s) / (2.0 * r * s)).ln()
            }
            EntryKind::Equidistant { r, t } => {
                let big_r2 = t * t + r * r;
                let big_r = big_r2.sqrt();
                let s = (big_r2 - sq(p)).sqrt();
                let b = -t + s;
                (equidistant_alpha(big_r, *t, s) / (2.0 * big_r * b)).ln()
            }
            EntryKind::Product { k, r } => {
                let q = (1.0 + r * r).sqrt();
                ((r + q) * (sq(&p[..*k]) + 1.0 + r * r).sqrt() / q).ln()
            }
            EntryKind::GeodesicSphere { t } => *t,
            EntryKind::Horosphere { rho0, .. } => *rho0,
        }
    }

    /// Gauss map written out on its own (not read off `psi`).
    pub fn gauss_closed(&self, p: &[f64]) -> SpherePoint {
        let sq = |s: &[f64]| s.iter().map(|c| c * c).sum::<f64>();
        let c: Vec<f64> = match &self.kind {
            EntryKind::TotallyGeodesic { r } => {
                let s = (r * r - sq(p)).sqrt();
                let d = r * (1.0 + r * r) + (1.0 - r * r) * s;
                let mut c: Vec<f64> = p.iter().map(|x| 2.0 * r * x / d).collect();
                c.push((r * (1.0 - r * r) + (1.0 + r * r) * s) / d);
                c
            }
            EntryKind::Equidistant { r, t } => {
                let big_r = (t * t + r * r).sqrt();
                let s = (big_r * big_r - sq(p)).sqrt();
                let a = equidistant_alpha(big_r, *t, s);
                let mut c: Vec<f64> = p.iter().map(|x| 2.0 * (big_r + t) * x / a).collect();
                c.push(equidistant_gauss_last(big_r, *t, s) / a);
                c
            }
            EntryKind::Product { k, r } => {
                let (x, z) = p.split_at(*k);
                let q = (1.0 + r * r).sqrt();
                let w = (sq(x) + 1.0 + r * r).sqrt();
                let mut c: Vec<f64> = x.iter().map(|v| v / w).collect();
                c.extend(z.iter().map(|v| q * v / (r * w)));
                c.push(q * (r * r - sq(z)).sqrt() / (r * w));
                c
            }
            EntryKind::GeodesicSphere { .. } => south_chart_point(p),
            EntryKind::Horosphere { x0, .. } => x0.coords().to_vec(),
        };
        SpherePoint::normalized(c).expect("closed-form Gauss map is nonzero")
    }

    /// `(kappa, multiplicity)` pairs for non-degenerate entries, using the sign
    /// of the computed immersion for the equidistant family.
    pub fn expected_kappas(&self) -> Vec<(f64, usize)> {
        let n = self.n;
        match &self.kind {
            EntryKind::TotallyGeodesic { .. } => vec![(0.0, n)],
            EntryKind::Equidistant { r, t } => vec![(-t / (t * t + r * r).sqrt(), n)],
            EntryKind::Product { k, r } => {
                let q = (1.0 + r * r).sqrt();
                vec![(-q / r, n - k), (-r / q, *k)]
            }
            EntryKind::GeodesicSphere { t } => vec![(-1.0 / t.tanh(), n)],
            EntryKind::Horosphere { .. } => vec![(-1.0, n)],
        }
    }

    /// `(lambda, multiplicity)` pairs sorted by value.
    pub fn expected_lambdas(&self) -> Vec<(f64, usize)> {
        let n = self.n;
        match &self.kind {
            EntryKind::TotallyGeodesic { .. } => vec![(-0.5, n)],
            EntryKind::Equidistant { r, t } => {
                let big_r = (t * t + r * r).sqrt();
                vec![(-(big_r - t) / (2.0 * (big_r + t)), n)]
            }
            EntryKind::Product { k, r } => {
                let a = r * r - r * (1.0 + r * r).sqrt();
                vec![(-0.5 - a, *k), (0.5 + a, n - k)]
            }
            EntryKind::GeodesicSphere { t } => vec![((-2.0 * t).exp() / 2.0, n)],
            EntryKind::Horosphere { .. } => vec![(0.0, n)],
        }
    }

    /// Both sign pairings for the equidistant family: the printed curvature
    /// `-t/R` and the printed eigenvalue `-(R+t)/(2(R-t))` belong to opposite
    /// signs of `kappa`.
    pub fn kappa_sign_candidates(&self) -> Vec<Candidate> {
        match &self.kind {
            EntryKind::Equidistant { r, t } => {
                let big_r = (t * t + r * r).sqrt();
                vec![
                    Candidate {
                        label: "kappa = -t/R".into(),
                        kappa: -t / big_r,
                        lambda: -(big_r - t) / (2.0 * (big_r + t)),
                    },
                    Candidate {
                        label: "kappa = +t/R".into(),
                        kappa: t / big_r,
                        lambda: -(big_r + t) / (2.0 * (big_r - t)),
                    },
                ]
            }
            _ => Vec::new(),
        }
    }

    /// The conformal metric on `G(Omega)` in ambient sphere coordinates.
    /// `None` for the horosphere.
    pub fn metric_field(&self) -> Option<ConformalMetricField> {
        let n = self.n;
        let cap = |r: f64, c: f64| {
            // c - ln((1 + r^2) y_{n+1} - (1 - r^2)), positive on a cap around e_{n+1}
            let a = 1.0 + r * r;
            let b = 1.0 - r * r;
            ConformalMetricField::with_domain(
                n,
                move |y: &[Dual2]| c - (&y[n] * a - b).ln(),
                move |y: &[f64]| a * y[n] - b > 0.0,
            )
            .expect("n >= 3")
        };
        match &self.kind {
            EntryKind::TotallyGeodesic { r } => Some(cap(*r, (2.0 * r).ln())),
            EntryKind::Equidistant { r, t } => {
                let big_r = (t * t + r * r).sqrt();
                Some(cap(*r, (2.0 * (big_r + t)).ln()))
            }
            EntryKind::Product { k, r } => {
                let k = *k;
                let q = (1.0 + r * r).sqrt();
                let c = ((r + q) / q).ln() + 0.5 * (1.0 + r * r).ln();
                Some(
                    ConformalMetricField::with_domain(
                        n,
                        move |y: &[Dual2]| {
                            let yx2 = Dual2::norm_sq(&y[..k]);
                            c - (1.0 - yx2).ln() * 0.5
                        },
                        move |y: &[f64]| y[..k].iter().map(|v| v * v).sum::<f64>() < 1.0 && y[n] > 0.0,
                    )
                    .expect("n >= 3"),
                )
            }
            EntryKind::GeodesicSphere { t } => Some(ConformalMetricField::constant(n, *t).expect("n >= 3")),
            EntryKind::Horosphere { .. } => None,
        }
    }
}

fn south_chart_point(u: &[f64]) -> Vec<f64> {
    StereoChart::south(u.len())
        .from_chart(u)
        .expect("dimension matches")
        .coords()
        .to_vec()
}

/// `R + s + (R+t)^2 (R - s)` with `s = sqrt(R^2 - |x|^2)`.
fn equidistant_alpha(big_r: f64, t: f64, s: f64) -> f64 {
    big_r + s + (big_r + t).powi(2) * (big_r - s)
}

/// Numerator of the last Gauss map coordinate, `R + s - (R+t)^2 (R - s)`.
fn equidistant_gauss_last(big_r: f64, t: f64, s: f64) -> f64 {
    big_r + s - (big_r + t).powi(2) * (big_r - s)
}

/// Null vectors `v = psi`, `w` with `<v, w> = -1` and an orthonormal frame of
/// `span(v, w)^perp` spanning the horosphere.
fn horosphere_frame(rho0: f64, x0: &SpherePoint) -> (DVector<f64>, DVector<f64>, Vec<DVector<f64>>) {
    let e = rho0.exp();
    let mut v = vec![e];
    v.extend(x0.coords().iter().map(|c| e * c));
    let mut w = vec![0.5 / e];
    w.extend(x0.coords().iter().map(|c| -0.5 * c / e));
    let chart = StereoChart::centered_at(x0);
    let frame = chart
        .frame()
        .iter()
        .map(|f| {
            let mut c = vec![0.0];
            c.extend(f.iter());
            lv(c)
        })
        .collect();
    (lv(v), lv(w), frame)
}

fn max_abs(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

fn quadric_residual(phi: &DVector<f64>, eta: &DVector<f64>, psi: &DVector<f64>) -> f64 {
    let d = |a: &DVector<f64>, b: &DVector<f64>| minkowski_dot(a.as_slice(), b.as_slice());
    [
        (d(phi, phi) + 1.0).abs(),
        (d(eta, eta) - 1.0).abs(),
        d(phi, eta).abs(),
        d(psi, psi).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Options for [`verify_entry_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub mode: DerivativeMode,
    /// Tolerance for closed-form quadric relations.
    pub quadric_tol: f64,
    /// Tolerance against the published eigenvalues and curvatures.
    pub value_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: DerivativeMode::Analytic,
            quadric_tol: 1e-9,
            value_tol: 1e-6,
        }
    }
}

impl VerifyOptions {
    pub fn with_mode(mode: DerivativeMode) -> Self {
        VerifyOptions {
            mode,
            ..Default::default()
        }
    }

    fn constancy_tol(&self) -> f64 {
        match self.mode {
            DerivativeMode::Analytic => 1e-9,
            DerivativeMode::FiniteDifference => 1e-6,
        }
    }

    fn immersion_tol(&self) -> f64 {
        match self.mode {
            DerivativeMode::Analytic => 1e-9,
            DerivativeMode::FiniteDifference => 1e-6,
        }
    }
}

pub fn verify_entry(e: &CatalogEntry, sample_count: usize, seed: u64) -> VerificationReport {
    verify_entry_with(e, sample_count, seed, VerifyOptions::default())
}

pub fn verify_entry_with(
    e: &CatalogEntry,
    sample_count: usize,
    seed: u64,
    opts: VerifyOptions,
) -> VerificationReport {
    let mut rep = VerificationReport::new(e.label(), e.label());
    rep.note("derivatives", format!("{:?}", opts.mode).to_lowercase());
    let count = sample_count.max(1);
    let params = e.sample_parameters(count, seed);
    let rec = |name: &str, res: f64, tol: f64| CheckRecord::new(name, res, tol, count, seed);

    // closed-form relations
    let mut quad = 0.0f64;
    let mut psi_form = 0.0f64;
    let mut gauss: Vec<SpherePoint> = Vec::with_capacity(count);
    for p in &params {
        let (phi, eta) = (e.phi_closed(p), e.eta_closed(p));
        let psi = &phi + &eta;
        quad = quad.max(quadric_residual(&phi, &eta, &psi));
        let g = e.gauss_closed(p);
        let er = e.rho_closed(p).exp();
        let mut want = vec![er];
        want.extend(g.coords().iter().map(|c| er * c));
        psi_form = psi_form.max(max_abs(&psi, &lv(want)) / (1.0 + er));
        gauss.push(g);
    }
    rep.push(rec("closed.quadrics", quad, opts.quadric_tol));
    rep.push(rec("closed.psi_is_exp_rho_times_gauss", psi_form, opts.quadric_tol));

    if let EntryKind::Horosphere { x0, .. } = &e.kind {
        let psi0 = e.psi_closed(&params[0]);
        let mut spread = 0.0f64;
        let mut ideal = 0.0f64;
        let mut null_fail = 0usize;
        for p in &params {
            let psi = e.psi_closed(p);
            spread = spread.max(max_abs(&psi, &psi0));
            for (a, b) in psi.iter().skip(1).zip(x0.coords()) {
                ideal = ideal.max((a / psi[0] - b).abs());
            }
            let v = LorentzVector::new(e.n, psi.as_slice().to_vec()).expect("finite");
            if classify(&v, QUADRIC_TOL).tag != Quadric::NullConePlus {
                null_fail += 1;
            }
        }
        rep.push(rec("horosphere.light_cone_map_constant", spread, opts.quadric_tol));
        rep.push(rec("horosphere.ideal_point", ideal, opts.quadric_tol));
        rep.push(rec("horosphere.psi_null", null_fail as f64, 0.0));
        rep.note("degenerate", "true (constant Gauss map; no metric)");
        return rep;
    }

    // injectivity of the Gauss map on the samples
    let mut min_sep = f64::INFINITY;
    for i in 0..gauss.len() {
        for j in (i + 1)..gauss.len() {
            if params[i] != params[j] {
                min_sep = min_sep.min(gauss[i].distance(&gauss[j]));
            }
        }
    }
    if gauss.len() > 1 {
        rep.push(CheckRecord::with_verdict(
            "closed.gauss_injective_min_separation",
            min_sep,
            0.0,
            min_sep > 0.0,
            count,
            seed,
        ));
    }

    let field = e.metric_field().expect("non-degenerate").with_mode(opts.mode);
    let mut rho_res = 0.0f64;
    let mut jets: Vec<HypersurfaceJet> = Vec::with_capacity(count);
    let mut failure: Option<Error> = None;
    for (p, g) in params.iter().zip(&gauss) {
        match field.rho(g) {
            Ok(v) => rho_res = rho_res.max((v - e.rho_closed(p)).abs() / (1.0 + v.abs())),
            Err(err) => {
                failure.get_or_insert(err);
                continue;
            }
        }
        match jet_with_tol(&field, g, f64::INFINITY) {
            Ok(j) => jets.push(j),
            Err(err) => {
                failure.get_or_insert(err);
            }
        }
    }
    rep.push(rec("field.rho_matches_closed_form", rho_res, opts.quadric_tol));
    rep.push(CheckRecord::new(
        "jet.evaluated",
        (count - jets.len()) as f64,
        0.0,
        count,
        seed,
    ));
    if let Some(err) = failure {
        rep.note("first_error", err.to_string());
    }
    if jets.is_empty() {
        return rep;
    }

    let mut jq = 0.0f64;
    let mut phi_res = 0.0f64;
    let mut eta_res = 0.0f64;
    let mut dict = 0.0f64;
    let mut metric = 0.0f64;
    let mut convex_fail = 0usize;
    for (j, p) in jets.iter().zip(&params) {
        jq = jq.max(j.residuals().max());
        let phi_c = e.phi_closed(p);
        let scale = 1.0 + phi_c.amax();
        phi_res = phi_res.max(max_abs(j.phi.as_dvector(), &phi_c) / scale);
        eta_res = eta_res.max(max_abs(j.eta.as_dvector(), &e.eta_closed(p)) / scale);
        dict = dict.max(j.dictionary_residual);
        metric = metric.max(j.metric_residual);
        if !is_horospherically_convex(&j.kappas) {
            convex_fail += 1;
        }
    }
    let jn = jets.len();
    let jrec = |name: &str, res: f64, tol: f64| CheckRecord::new(name, res, tol, jn, seed);
    rep.push(jrec("jet.quadrics", jq, opts.quadric_tol));
    rep.push(jrec("jet.phi_matches_closed_form", phi_res, opts.immersion_tol()));
    rep.push(jrec("jet.eta_matches_closed_form", eta_res, opts.immersion_tol()));
    rep.push(jrec("jet.metric_consistency", metric, 1e-6));
    rep.push(jrec("dictionary", dict, dictionary_tol(opts.mode)));
    rep.push(jrec("convexity.failures", convex_fail as f64, 0.0));

    // constancy of kappa_i and lambda_i
    let spread = |get: &dyn Fn(&HypersurfaceJet) -> &Vec<f64>| {
        let n = e.n;
        (0..n)
            .map(|i| {
                let vals = jets.iter().map(|j| get(j)[i]);
                let lo = vals.clone().fold(f64::INFINITY, f64::min);
                let hi = vals.fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0, f64::max)
    };
    rep.push(jrec("constancy.kappa", spread(&|j| &j.kappas), opts.constancy_tol()));
    rep.push(jrec("constancy.lambda", spread(&|j| &j.lambdas), opts.constancy_tol()));

    let expand = |pairs: Vec<(f64, usize)>| {
        let mut v: Vec<f64> = pairs.into_iter().flat_map(|(x, m)| std::iter::repeat(x).take(m)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let exp_l = expand(e.expected_lambdas());
    let exp_k = expand(e.expected_kappas());
    let err_vs = |get: &dyn Fn(&HypersurfaceJet) -> &Vec<f64>, want: &[f64]| {
        jets.iter()
            .flat_map(|j| get(j).iter().zip(want).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    };
    rep.push(jrec("expected.lambda", err_vs(&|j| &j.lambdas, &exp_l), opts.value_tol));
    rep.push(jrec("expected.kappa", err_vs(&|j| &j.kappas, &exp_k), opts.value_tol));

    let clusters = cluster_eigenvalues(&jets[0].lambdas, MULTIPLICITY_REL_TOL);
    let mults: Vec<String> = clusters.iter().map(|(_, m)| m.to_string()).collect();
    rep.note("lambda_multiplicities", format!("({})", mults.join(",")));
    rep.note("lambda_values", fmt_list(&clusters.iter().map(|c| c.0).collect::<Vec<_>>()));
    let kc = cluster_eigenvalues(&jets[0].kappas, MULTIPLICITY_REL_TOL);
    rep.note("kappa_values", fmt_list(&kc.iter().map(|c| c.0).collect::<Vec<_>>()));

    let candidates = e.kappa_sign_candidates();
    if !candidates.is_empty() {
        let tol = dictionary_tol(opts.mode).max(opts.value_tol);
        let mut matching = Vec::new();
        let mut best = f64::INFINITY;
        for c in &candidates {
            // the candidate pairing must be internally consistent and match
            // the computed Schouten eigenvalues at every sample
            let pair_ok = lambda_from_kappa(c.kappa)
                .map(|l| (l - c.lambda).abs() <= 1e-12)
                .unwrap_or(false);
            let err = jets
                .iter()
                .flat_map(|j| j.lambdas.iter().map(|l| (l - lambda_from_kappa(c.kappa).unwrap_or(f64::NAN)).abs()))
                .fold(0.0, f64::max);
            best = best.min(err);
            if pair_ok && err <= tol {
                matching.push(c.label.clone());
            }
            rep.note(
                format!("candidate[{}]", c.label),
                format!(
                    "lambda_stated={} lambda_from_kappa={} max_error={}",
                    crate::report::fmt_f64(c.lambda),
                    crate::report::fmt_f64(lambda_from_kappa(c.kappa).unwrap_or(f64::NAN)),
                    crate::report::fmt_f64(err)
                ),
            );
        }
        rep.push(CheckRecord::with_verdict(
            "adjudication.unique_candidate",
            best,
            tol,
            matching.len() == 1,
            jn,
            seed,
        ));
        let verdict = match matching.as_slice() {
            [one] => one.clone(),
            [] => "none".to_string(),
            _ => "ambiguous".to_string(),
        };
        rep.adjudicate("kappa_sign", verdict);
        rep.adjudicate(
            "published_pairing",
            "printed kappa = -t/R with printed lambda = -(R+t)/(2(R-t)) is inconsistent with lambda = 1/2 - 1/(1-kappa)",
        );
    }
    rep
}

/// The default parameter sweep used by `verify-catalog`.
pub fn default_sweep(name: &str, n: usize) -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    match name {
        "totally-geodesic" => {
            for r in [0.5, 1.0, 2.0] {
                out.push(totally_geodesic(r, n)?);
            }
        }
        "equidistant" => {
            for t in [0.5, 1.0] {
                out.push(equidistant(1.0, t, n)?);
            }
        }
        "product" => {
            for k in [1, n - 1] {
                for r in [0.5, 1.0] {
                    out.push(product_hk_snk(k, r, n)?);
                }
            }
        }
        "geodesic-sphere" => {
            for t in [0.5, 1.0, 2.0] {
                out.push(geodesic_sphere(t, n)?);
            }
        }
        "horosphere" => {
            out.push(horosphere_entry(0.0, SpherePoint::north(n), n)?);
            out.push(horosphere_entry(0.7, SpherePoint::basis(n + 1, 0), n)?);
        }
        other => return Err(Error::InvalidParameter(format!("unknown catalog entry '{other}'"))),
    }
    Ok(out)
}

pub const ENTRY_NAMES: [&str; 5] = [
    "totally-geodesic",
    "equidistant",
    "product",
    "geodesic-sphere",
    "horosphere",
];
