//! Radial solutions of `sigma_k(lambda) = c` for metrics `g = e^{2u(r)}|dx|^2`
//! on annuli of `R^n`, integrated in `s = ln r`, and their lift to rotational
//! hypersurfaces of `H^{n+1}`.
//!
//! The flat-chart Schouten tensor of a radial metric has the tangential
//! eigenvalue `lambda_tan` with multiplicity `n - 1` and the radial eigenvalue
//! `lambda_rad` once, so `sigma_k` is linear in `lambda_rad` and the equation
//! can be solved for `u''`.
//!
//! In the cylindrical exponent `w = u + s` with `p = dw/ds` the equation has
//! the first integral
//! `H = e^{(n-2k)w} ((1 - p^2)/2)^k - (c / C(n,k)) e^{nw}` (raw `c`), which is
//! reported as a diagnostic.
//!
//! Grid residuals are `(sigma_k - c) / (1 + |terms|)`: far from `r = 1` the
//! two summands of `sigma_k` grow like `e^{-2kw}` and cancel.

use std::sync::Arc;

use crate::chart::SpherePoint;
use crate::conformal::{
    binomial, dilation_for_max, ConformalMetricField, DerivativeMode, SigmaConvention,
};
use crate::correspondence::{
    bound_tol, jet_with_tol, weingarten_sigma, HypersurfaceJet, DICTIONARY_TOL_FD,
};
use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::lorentz::LorentzVector;
use crate::mesh::Mesh;

/// `|1 - p^2| / 2` below which integration stops at a singular point (k >= 2).
pub const SINGULAR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEigenvalues {
    pub lambda_tangential: f64,
    pub lambda_radial: f64,
}

impl RadialEigenvalues {
    /// `sigma_k` of `(lambda_tan x (n-1), lambda_rad)`.
    pub fn sigma_k(&self, n: usize, k: usize, convention: SigmaConvention) -> Result<f64> {
        split_sigma(self.lambda_tangential, self.lambda_radial, n, k, convention)
    }

    pub fn max(&self) -> f64 {
        self.lambda_tangential.max(self.lambda_radial)
    }
}

/// Eigenvalues of the Schouten tensor of `e^{2u(r)}|dx|^2` (primes are `d/dr`).
pub fn radial_eigenvalues(u: f64, du: f64, ddu: f64, r: f64) -> Result<RadialEigenvalues> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let e = (-2.0 * u).exp();
    Ok(RadialEigenvalues {
        lambda_tangential: e * (-du / r - 0.5 * du * du),
        lambda_radial: e * (-ddu + 0.5 * du * du),
    })
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    Ok(())
}

fn split_sigma(lt: f64, lr: f64, n: usize, k: usize, convention: SigmaConvention) -> Result<f64> {
    check_k(n, k)?;
    let raw = binomial(n - 1, k) * lt.powi(k as i32)
        + lr * binomial(n - 1, k - 1) * lt.powi(k as i32 - 1);
    Ok(match convention {
        SigmaConvention::Raw => raw,
        SigmaConvention::Normalized => raw / binomial(n, k),
    })
}

/// `(sigma_k - c) / (1 + |terms|)`, where `|terms|` is the sum of the absolute
/// values of the two summands of `sigma_k`; they grow like `e^{-2kw}` and
/// cancel, so the unscaled difference is dominated by rounding far out.
fn scaled_residual(
    ev: &RadialEigenvalues,
    n: usize,
    k: usize,
    c: f64,
    convention: SigmaConvention,
) -> Result<f64> {
    let (lt, lr) = (ev.lambda_tangential, ev.lambda_radial);
    let t1 = binomial(n - 1, k) * lt.powi(k as i32);
    let t2 = lr * binomial(n - 1, k - 1) * lt.powi(k as i32 - 1);
    let scale = match convention {
        SigmaConvention::Raw => 1.0,
        SigmaConvention::Normalized => binomial(n, k),
    };
    Ok((ev.sigma_k(n, k, convention)? - c) / (1.0 + (t1.abs() + t2.abs()) / scale))
}

fn raw_level(c: f64, n: usize, k: usize, convention: SigmaConvention) -> f64 {
    match convention {
        SigmaConvention::Raw => c,
        SigmaConvention::Normalized => c * binomial(n, k),
    }
}

/// `sigma_k(1/2, ..., 1/2)` in the given convention.
pub fn round_level(n: usize, k: usize, convention: SigmaConvention) -> f64 {
    let raw = binomial(n, k) * 0.5f64.powi(k as i32);
    match convention {
        SigmaConvention::Raw => raw,
        SigmaConvention::Normalized => raw / binomial(n, k),
    }
}

/// `u''` with `sigma_k(lambda(u, u', u'', r)) = c`.
pub fn solve_second_derivative(
    u: f64,
    du: f64,
    r: f64,
    n: usize,
    k: usize,
    c: f64,
    convention: SigmaConvention,
) -> Result<f64> {
    check_k(n, k)?;
    let ev = radial_eigenvalues(u, du, 0.0, r)?;
    let lt = ev.lambda_tangential;
    let coef = binomial(n - 1, k - 1) * lt.powi(k as i32 - 1);
    // scale-free tangential factor (1 - p^2)/2
    let a = (-du * r - 0.5 * du * du * r * r).abs();
    if k >= 2 && (coef == 0.0 || a < 1e-14) {
        return Err(Error::SingularOde { s: r.ln() });
    }
    let lr = (raw_level(c, n, k, convention) - binomial(n - 1, k) * lt.powi(k as i32)) / coef;
    let ddu = 0.5 * du * du - (2.0 * u).exp() * lr;
    if !ddu.is_finite() {
        return Err(Error::SingularOde { s: r.ln() });
    }
    Ok(ddu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Inward,
    Outward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Shot,
    ClosedForm,
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    SpanEnd,
    Singular { s: f64 },
    Blowup { s: f64 },
    StepUnderflow { s: f64 },
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::SpanEnd => write!(f, "span-end"),
            Termination::Singular { s } => write!(f, "singular at s = {s:.9e}"),
            Termination::Blowup { s } => write!(f, "blowup at s = {s:.9e}"),
            Termination::StepUnderflow { s } => write!(f, "step-underflow at s = {s:.9e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootConfig {
    /// Length of the integration interval in `s`.
    pub span: f64,
    /// Relative and absolute local error tolerance.
    pub ode_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub singular_tol: f64,
    /// Stop when both `|u|` and `|u + s|` exceed this.
    pub blowup: f64,
    pub convention: SigmaConvention,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig {
            span: 40.0,
            ode_tol: 1e-10,
            max_step: 0.05,
            min_step: 1e-12,
            singular_tol: SINGULAR_TOL,
            blowup: 50.0,
            convention: SigmaConvention::Raw,
        }
    }
}

/// A radial solution sampled on an increasing grid in `s = ln r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    n: usize,
    k: usize,
    c: f64,
    convention: SigmaConvention,
    s: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    ddu: Vec<f64>,
    lambda_tan: Vec<f64>,
    lambda_rad: Vec<f64>,
    residual: Vec<f64>,
    provenance: Provenance,
    termination: Termination,
}

impl RadialProfile {
    /// Builds a profile from grid values; eigenvalues and residuals are
    /// computed here.
    #[allow(clippy::too_many_arguments)]
    pub fn from_samples(
        n: usize,
        k: usize,
        c: f64,
        convention: SigmaConvention,
        s: Vec<f64>,
        u: Vec<f64>,
        du: Vec<f64>,
        ddu: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        check_k(n, k)?;
        let m = s.len();
        if m < 2 {
            return Err(Error::EmptySamples);
        }
        for len in [u.len(), du.len(), ddu.len()] {
            if len != m {
                return Err(Error::DimensionMismatch { expected: m, found: len });
            }
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
        }
        if s.iter().chain(&u).chain(&du).chain(&ddu).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut lambda_tan = Vec::with_capacity(m);
        let mut lambda_rad = Vec::with_capacity(m);
        let mut residual = Vec::with_capacity(m);
        for i in 0..m {
            let ev = radial_eigenvalues(u[i], du[i], ddu[i], s[i].exp())?;
            lambda_tan.push(ev.lambda_tangential);
            lambda_rad.push(ev.lambda_radial);
            residual.push(scaled_residual(&ev, n, k, c, convention)?);
        }
        Ok(RadialProfile {
            n,
            k,
            c,
            convention,
            s,
            u,
            du,
            ddu,
            lambda_tan,
            lambda_rad,
            residual,
            provenance,
            termination: Termination::SpanEnd,
        })
    }

    /// Profile of a known solution `r -> (u, u', u'')` on `count` equally
    /// spaced points of `[s0, s1]`; `c` is taken as `sigma_k` at the first point.
    pub fn closed_form<F>(
        n: usize,
        k: usize,
        convention: SigmaConvention,
        (s0, s1): (f64, f64),
        count: usize,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> (f64, f64, f64),
    {
        if count < 2 || !(s1 > s0) {
            return Err(Error::InvalidParameter("closed-form grid needs s1 > s0 and two points".into()));
        }
        let s: Vec<f64> = (0..count)
            .map(|i| s0 + (s1 - s0) * i as f64 / (count - 1) as f64)
            .collect();
        let vals: Vec<(f64, f64, f64)> = s.iter().map(|&si| f(si.exp())).collect();
        let (r0, v0) = (s[0].exp(), vals[0]);
        let c = radial_eigenvalues(v0.0, v0.1, v0.2, r0)?.sigma_k(n, k, convention)?;
        RadialProfile::from_samples(
            n,
            k,
            c,
            convention,
            s,
            vals.iter().map(|v| v.0).collect(),
            vals.iter().map(|v| v.1).collect(),
            vals.iter().map(|v| v.2).collect(),
            Provenance::ClosedForm,
        )
    }

    /// Round metric `u = t + ln(2/(1+r^2))`.
    pub fn round(
        n: usize,
        k: usize,
        convention: SigmaConvention,
        t: f64,
        range: (f64, f64),
        count: usize,
    ) -> Result<Self> {
        RadialProfile::closed_form(n, k, convention, range, count, |r| round_solution(r, t))
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn convention(&self) -> SigmaConvention {
        self.convention
    }
    pub fn len(&self) -> usize {
        self.s.len()
    }
    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
    pub fn s(&self) -> &[f64] {
        &self.s
    }
    pub fn r(&self) -> Vec<f64> {
        self.s.iter().map(|s| s.exp()).collect()
    }
    pub fn u(&self) -> &[f64] {
        &self.u
    }
    /// `du/dr`.
    pub fn du(&self) -> &[f64] {
        &self.du
    }
    /// `d^2u/dr^2`.
    pub fn ddu(&self) -> &[f64] {
        &self.ddu
    }
    pub fn lambda_tan(&self) -> &[f64] {
        &self.lambda_tan
    }
    pub fn lambda_rad(&self) -> &[f64] {
        &self.lambda_rad
    }
    /// Scaled `sigma_k(lambda) - c` on the grid (see the module docs).
    pub fn residual(&self) -> &[f64] {
        &self.residual
    }
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }

    pub fn max_lambda(&self) -> f64 {
        self.lambda_tan
            .iter()
            .chain(&self.lambda_rad)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn span(&self) -> f64 {
        self.s[self.s.len() - 1] - self.s[0]
    }

    /// `du/ds` on the grid.
    pub fn q(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.s[i].exp() * self.du[i]).collect()
    }

    fn q_s(&self, i: usize) -> f64 {
        let r = self.s[i].exp();
        r * r * self.ddu[i] + r * self.du[i]
    }

    /// First integral `H` on the grid (raw level).
    pub fn first_integral(&self) -> Vec<f64> {
        let (n, k) = (self.n, self.k);
        let c = raw_level(self.c, n, k, self.convention);
        (0..self.len())
            .map(|i| {
                let w = self.u[i] + self.s[i];
                let p = 1.0 + self.s[i].exp() * self.du[i];
                first_integral(n, k, c, w, p)
            })
            .collect()
    }

    /// `max |H - H(s_0)|`.
    pub fn first_integral_drift(&self) -> f64 {
        let h = self.first_integral();
        h.iter().map(|v| (v - h[0]).abs()).fold(0.0, f64::max)
    }

    fn interval(&self, s: f64) -> Option<usize> {
        let m = self.s.len();
        if !(s >= self.s[0] && s <= self.s[m - 1]) {
            return None;
        }
        let i = self.s.partition_point(|&x| x <= s);
        Some(i.clamp(1, m - 1) - 1)
    }

    /// `(u, du/ds, d^2u/ds^2)` at `s` by quintic Hermite interpolation of the
    /// grid data. `None` outside the grid.
    pub fn interpolate(&self, s: f64) -> Option<(f64, f64, f64)> {
        let i = self.interval(s)?;
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let r0 = s0.exp();
        let r1 = s1.exp();
        let y0 = [self.u[i], r0 * self.du[i], self.q_s(i)];
        let y1 = [self.u[i + 1], r1 * self.du[i + 1], self.q_s(i + 1)];
        Some(quintic_hermite(s0, s1, y0, y1, s))
    }

    /// `(u, u', u'')` in `r` at radius `r`.
    pub fn interpolate_r(&self, r: f64) -> Option<(f64, f64, f64)> {
        if !(r > 0.0) {
            return None;
        }
        let (u, us, uss) = self.interpolate(r.ln())?;
        Some((u, us / r, (uss - us) / (r * r)))
    }

    fn with_termination(mut self, t: Termination) -> Self {
        self.termination = t;
        self
    }
}

/// `(u, u', u'')` of `t + ln(2/(1+r^2))`.
pub fn round_solution(r: f64, t: f64) -> (f64, f64, f64) {
    let d = 1.0 + r * r;
    (
        t + (2.0 / d).ln(),
        -2.0 * r / d,
        -2.0 * (1.0 - r * r) / (d * d),
    )
}

/// `e^{(n-2k)w} ((1-p^2)/2)^k - (c / C(n,k)) e^{nw}` for raw `c`.
pub fn first_integral(n: usize, k: usize, c_raw: f64, w: f64, p: f64) -> f64 {
    let a = 0.5 * (1.0 - p * p);
    ((n as f64 - 2.0 * k as f64) * w).exp() * a.powi(k as i32)
        - c_raw / binomial(n, k) * (n as f64 * w).exp()
}

fn quintic_hermite(s0: f64, s1: f64, y0: [f64; 3], y1: [f64; 3], s: f64) -> (f64, f64, f64) {
    let h = s1 - s0;
    let t = (s - s0) / h;
    let a0 = y0[0];
    let a1 = h * y0[1];
    let a2 = 0.5 * h * h * y0[2];
    let big_y = y1[0] - (a0 + a1 + a2);
    let big_d = h * y1[1] - (a1 + 2.0 * a2);
    let big_s = h * h * y1[2] - 2.0 * a2;
    let a3 = 10.0 * big_y - 4.0 * big_d + 0.5 * big_s;
    let a4 = -15.0 * big_y + 7.0 * big_d - big_s;
    let a5 = 6.0 * big_y - 3.0 * big_d + 0.5 * big_s;
    let v = a0 + t * (a1 + t * (a2 + t * (a3 + t * (a4 + t * a5))));
    let d1 = a1 + t * (2.0 * a2 + t * (3.0 * a3 + t * (4.0 * a4 + t * 5.0 * a5)));
    let d2 = 2.0 * a2 + t * (6.0 * a3 + t * (12.0 * a4 + t * 20.0 * a5));
    (v, d1 / h, d2 / (h * h))
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

struct Rhs {
    n: usize,
    k: usize,
    c: f64,
    convention: SigmaConvention,
}

impl Rhs {
    /// State `(u, q = du/ds)`; returns `(q, dq/ds)`.
    fn eval(&self, s: f64, y: &State) -> Result<State> {
        let r = s.exp();
        let ddu = solve_second_derivative(y[0], y[1] / r, r, self.n, self.k, self.c, self.convention)?;
        Ok([y[1], r * r * ddu + y[1]])
    }
}

/// Integrates from `(u_0, u_0')` at `r_0` in the given direction for
/// `config.span` in `s`.
#[allow(clippy::too_many_arguments)]
pub fn shoot(
    initial: (f64, f64),
    r0: f64,
    direction: Direction,
    n: usize,
    k: usize,
    c: f64,
    config: &ShootConfig,
) -> Result<RadialProfile> {
    check_k(n, k)?;
    if !(r0 > 0.0) {
        return Err(Error::InvalidParameter(format!("r0 must be positive, got {r0}")));
    }
    if !(config.span > 0.0 && config.ode_tol > 0.0 && config.max_step > 0.0) {
        return Err(Error::InvalidParameter("span, ode_tol and max_step must be positive".into()));
    }
    let rhs = Rhs {
        n,
        k,
        c,
        convention: config.convention,
    };
    let s0 = r0.ln();
    let (u0, du0) = initial;
    let mut y: State = [u0, r0 * du0];
    let singular = |y: &State| k >= 2 && (0.5 * (1.0 - (1.0 + y[1]).powi(2))).abs() < config.singular_tol;
    if singular(&y) {
        return Err(Error::SingularOde { s: s0 });
    }
    let mut f = rhs.eval(s0, &y)?;
    let dir = match direction {
        Direction::Outward => 1.0,
        Direction::Inward => -1.0,
    };
    let s_end = s0 + dir * config.span;
    let mut s = s0;
    let mut pts = vec![(s, y, f)];
    let mut h = dir * config.max_step.min(0.01);
    let tol = config.ode_tol;
    let mut termination = Termination::SpanEnd;
    loop {
        if (s_end - s) * dir <= 0.0 {
            break;
        }
        if (s + h - s_end) * dir > 0.0 {
            h = s_end - s;
        }
        let step = dopri_step(&rhs, s, &y, &f, h);
        let (y_new, f_new, err) = match step {
            Ok(v) => v,
            Err(_) => {
                // singular stage: shrink
                h *= 0.25;
                if h.abs() < config.min_step {
                    termination = Termination::StepUnderflow { s };
                    break;
                }
                continue;
            }
        };
        let scale = |i: usize| tol + tol * y[i].abs().max(y_new[i].abs());
        let e = (err[0] / scale(0)).abs().max((err[1] / scale(1)).abs());
        if e <= 1.0 {
            s += h;
            y = y_new;
            f = f_new;
            pts.push((s, y, f));
            let bounded = y[0].abs() <= config.blowup || (y[0] + s).abs() <= config.blowup;
            if !(bounded && y[1].is_finite()) {
                termination = Termination::Blowup { s };
                break;
            }
            if singular(&y) {
                termination = Termination::Singular { s };
                break;
            }
            let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            h = dir * (h.abs() * fac).min(config.max_step);
        } else {
            h *= (0.9 * e.powf(-0.2)).clamp(0.1, 1.0);
            if h.abs() < config.min_step {
                termination = Termination::StepUnderflow { s };
                break;
            }
        }
    }
    if dir < 0.0 {
        pts.reverse();
    }
    let mut ss = Vec::with_capacity(pts.len());
    let mut u = Vec::with_capacity(pts.len());
    let mut du = Vec::with_capacity(pts.len());
    let mut ddu = Vec::with_capacity(pts.len());
    for (si, yi, fi) in &pts {
        let r = si.exp();
        ss.push(*si);
        u.push(yi[0]);
        du.push(yi[1] / r);
        ddu.push((fi[1] - yi[1]) / (r * r));
    }
    if ss.len() < 2 {
        return Err(match termination {
            Termination::StepUnderflow { s } => Error::StepUnderflow { s },
            _ => Error::SingularOde { s: s0 },
        });
    }
    Ok(RadialProfile::from_samples(n, k, c, config.convention, ss, u, du, ddu, Provenance::Shot)?
        .with_termination(termination))
}

/// Shoots inward and outward from `r0` over `config.span` each and joins the
/// two halves. The termination reported is the first non-`SpanEnd` one.
#[allow(clippy::too_many_arguments)]
pub fn shoot_both(
    initial: (f64, f64),
    r0: f64,
    n: usize,
    k: usize,
    c: f64,
    config: &ShootConfig,
) -> Result<RadialProfile> {
    let inner = shoot(initial, r0, Direction::Inward, n, k, c, config)?;
    let outer = shoot(initial, r0, Direction::Outward, n, k, c, config)?;
    let m = inner.len() - 1;
    let join = |a: &[f64], b: &[f64]| -> Vec<f64> { a[..m].iter().chain(b).copied().collect() };
    let termination = match (inner.termination, outer.termination) {
        (Termination::SpanEnd, t) => t,
        (t, _) => t,
    };
    Ok(RadialProfile::from_samples(
        n,
        k,
        c,
        config.convention,
        join(&inner.s, &outer.s),
        join(&inner.u, &outer.u),
        join(&inner.du, &outer.du),
        join(&inner.ddu, &outer.ddu),
        Provenance::Shot,
    )?
    .with_termination(termination))
}

fn dopri_step(rhs: &Rhs, s: f64, y: &State, k1: &State, h: f64) -> Result<(State, State, State)> {
    let k2 = rhs.eval(s + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = rhs.eval(s + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = rhs.eval(s + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = rhs.eval(
        s + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = rhs.eval(
        s + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = rhs.eval(s + h, &y_new)?;
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok((y_new, k7, err))
}

/// Outcome of [`detect_period`].
#[derive(Debug, Clone, PartialEq)]
pub enum PeriodDetection {
    /// Eigenvalues constant along the profile: every shift is a period.
    Degenerate,
    Periodic {
        period: f64,
        /// `u(s + P) - u(s)` (zero for a periodic `u`, `-P` for a periodic
        /// cylindrical exponent `u + s`).
        drift: f64,
        /// Largest mismatch of `(u - drift, du/ds)` over the overlap.
        mismatch: f64,
        crossings: usize,
    },
    NotFound {
        crossings: usize,
    },
}

impl PeriodDetection {
    /// The period, `0` for a degenerate profile.
    pub fn period(&self) -> Option<f64> {
        match self {
            PeriodDetection::Degenerate => Some(0.0),
            PeriodDetection::Periodic { period, .. } => Some(*period),
            PeriodDetection::NotFound { .. } => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, PeriodDetection::Degenerate)
    }
}

/// Period of `(u modulo a linear drift, du/ds)` from the return map of the
/// section `du/ds = mid-range`, crossed downward.
pub fn detect_period(p: &RadialProfile, tol: f64) -> PeriodDetection {
    let spread = |v: &[f64]| {
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        hi - lo
    };
    if spread(&p.lambda_tan).max(spread(&p.lambda_rad)) <= tol {
        return PeriodDetection::Degenerate;
    }
    let q = p.q();
    let qs: Vec<f64> = (0..p.len()).map(|i| p.q_s(i)).collect();
    let (lo, hi) = q
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let level = 0.5 * (lo + hi);
    let mut crossings = Vec::new();
    for i in 0..p.len() - 1 {
        let (a, b) = (q[i] - level, q[i + 1] - level);
        if a > 0.0 && b <= 0.0 {
            crossings.push(refine_crossing(p.s[i], p.s[i + 1], [a, qs[i]], [b, qs[i + 1]]));
        }
    }
    let m = crossings.len();
    if m < 3 {
        return PeriodDetection::NotFound { crossings: m };
    }
    let period = (crossings[m - 1] - crossings[0]) / (m - 1) as f64;
    if !(period > 0.0 && period <= 0.5 * p.span()) {
        return PeriodDetection::NotFound { crossings: m };
    }
    let end = p.s[p.len() - 1];
    let mut diffs = Vec::new();
    let mut dq: f64 = 0.0;
    for i in 0..p.len() {
        let s = p.s[i];
        if s + period > end {
            break;
        }
        if let Some((u1, q1, _)) = p.interpolate(s + period) {
            diffs.push(u1 - p.u[i]);
            dq = dq.max((q1 - q[i]).abs());
        }
    }
    if diffs.is_empty() {
        return PeriodDetection::NotFound { crossings: m };
    }
    let drift = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let du = diffs.iter().map(|d| (d - drift).abs()).fold(0.0, f64::max);
    let mismatch = du.max(dq);
    if mismatch <= tol {
        PeriodDetection::Periodic {
            period,
            drift,
            mismatch,
            crossings: m,
        }
    } else {
        PeriodDetection::NotFound { crossings: m }
    }
}

/// Root of the cubic Hermite interpolant of `(value, slope)` data on `[s0, s1]`
/// whose endpoint values bracket zero.
fn refine_crossing(s0: f64, s1: f64, y0: [f64; 2], y1: [f64; 2]) -> f64 {
    let h = s1 - s0;
    let eval = |t: f64| {
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0[0]
            + (t3 - 2.0 * t2 + t) * h * y0[1]
            + (-2.0 * t3 + 3.0 * t2) * y1[0]
            + (t3 - t2) * h * y1[1]
    };
    let (mut a, mut b) = (0.0, 1.0);
    let fa = eval(a);
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        let fm = eval(mid);
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    s0 + h * 0.5 * (a + b)
}

/// One meridian sample of the lifted hypersurface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileCurvePoint {
    pub s: f64,
    /// Hyperbolic distance to the rotation axis.
    pub distance: f64,
    /// Signed position of the foot point along the axis.
    pub axial: f64,
    /// Hyperbolic arc length along the sampled meridian from its first point.
    pub arc: f64,
}

#[derive(Debug, Clone)]
pub struct LiftedHypersurface {
    /// Dilation `t` applied before lifting (`g -> e^t g`).
    pub dilation: f64,
    pub jets: Vec<HypersurfaceJet>,
    pub curve: Vec<ProfileCurvePoint>,
    /// `weingarten_sigma(kappa, k)` per jet.
    pub weingarten: Vec<f64>,
    /// `sigma_k(lambda)` of the dilated metric, `e^{-kt} c`.
    pub sigma_lambda: f64,
    /// All curvatures equal to `-1` (`lambda = 0`): horosphere-type jets.
    pub horosphere_type: bool,
    pub mesh: Mesh,
}

impl LiftedHypersurface {
    pub fn weingarten_spread(&self) -> f64 {
        let lo = self.weingarten.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.weingarten.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }
}

/// The radial metric as a field on the sphere: `x = y_{1..n}/(1 + y_{n+1})`
/// and `rho = u(|x|) - ln(2/(1+|x|^2))`, with `t/2` added for a dilation `t`.
pub fn profile_field(p: &RadialProfile, dilation: f64) -> Result<ConformalMetricField> {
    shifted_profile_field(p, dilation, 0.0)
}

/// [`profile_field`] pulled back by the chart dilation `x -> e^a x`, i.e. the
/// profile `u(e^a r) + a`. Samples at `s = a` sit on the equator `|x| = 1`.
pub fn shifted_profile_field(p: &RadialProfile, dilation: f64, a: f64) -> Result<ConformalMetricField> {
    let n = p.n();
    let prof = Arc::new(p.clone());
    let ea = a.exp();
    let (r_lo, r_hi) = (p.s[0].exp() / ea, p.s[p.len() - 1].exp() / ea);
    let rho = move |y: &[Dual2]| -> Dual2 {
        let z = &y[n];
        let one = z.lift(1.0);
        let r2 = &(&one - z) / &(&one + z);
        let r = r2.value().max(0.0).sqrt();
        let (u, du, ddu) = prof
            .interpolate_r(ea * r.clamp(r_lo, r_hi))
            .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        let (u, du, ddu) = (u + a, ea * du, ea * ea * ddu);
        let big_u = r2.chain(u, du / (2.0 * r), (ddu - du / r) / (4.0 * r * r));
        &(&big_u - std::f64::consts::LN_2) + &(&one + &r2).ln() + 0.5 * dilation
    };
    let domain = move |y: &[f64]| {
        let z = y[n];
        if !(z > -1.0) {
            return false;
        }
        let r = ((1.0 - z) / (1.0 + z)).max(0.0).sqrt();
        r >= r_lo * (1.0 - DOMAIN_SLACK) && r <= r_hi * (1.0 + DOMAIN_SLACK)
    };
    ConformalMetricField::with_domain(n, rho, domain)
}

/// Boost in the `(e_0, e_{n+1})` plane whose action on the sphere is the chart
/// dilation `x -> e^a x`, applied to `v`.
fn dilation_boost(v: &LorentzVector, a: f64) -> Result<LorentzVector> {
    let n = v.n();
    let mut c = v.coords().to_vec();
    let (ch, sh) = (a.cosh(), a.sinh());
    let (t, z) = (c[0], c[n + 1]);
    c[0] = ch * t - sh * z;
    c[n + 1] = -sh * t + ch * z;
    LorentzVector::new(n, c)
}

/// Relative slack on the radial range of [`profile_field`], absorbing the
/// rounding of `r -> y -> r`.
const DOMAIN_SLACK: f64 = 1e-12;

/// Point of the meridian in the `(y_1, y_{n+1})` plane at radius `r`.
pub fn meridian_point(n: usize, r: f64) -> Result<SpherePoint> {
    let d = 1.0 + r * r;
    let mut y = vec![0.0; n + 1];
    y[0] = 2.0 * r / d;
    y[n] = (1.0 - r * r) / d;
    SpherePoint::normalized(y)
}

/// Jet of the lifted hypersurface over the meridian point at `s` (inside the
/// profile's grid range).
///
/// The jet is taken on the equator for the field pulled back by `x -> e^s x`,
/// where the sphere coordinates are well conditioned for any `s`, and carried
/// back by the boost inducing that dilation.
pub fn lift_point(p: &RadialProfile, dilation: f64, s: f64) -> Result<HypersurfaceJet> {
    Ok(lift_point_with_axis(p, dilation, s)?.0)
}

/// [`lift_point`] plus the distance to the rotation axis and the axial
/// coordinate, both read off before boosting back.
fn lift_point_with_axis(p: &RadialProfile, dilation: f64, s: f64) -> Result<(HypersurfaceJet, f64, f64)> {
    let n = p.n();
    let field = shifted_profile_field(p, dilation, s)?;
    let mut j = jet_with_tol(&field, &meridian_point(n, 1.0)?, DICTIONARY_TOL_FD)?;
    let (distance, axial) = axis_coordinates(&j.phi);
    j.x = meridian_point(n, s.exp())?;
    j.rho -= s + std::f64::consts::LN_2 - (1.0 + (2.0 * s).exp()).ln();
    j.phi = dilation_boost(&j.phi, s)?;
    j.eta = dilation_boost(&j.eta, s)?;
    j.psi = dilation_boost(&j.psi, s)?;
    Ok((j, distance, axial - s))
}

/// Distance to the geodesic `(cosh a, 0, .., sinh a)` and the position of the
/// foot point on it.
fn axis_coordinates(phi: &LorentzVector) -> (f64, f64) {
    let c = phi.coords();
    let n = phi.n();
    let radial = c[1..=n].iter().map(|v| v * v).sum::<f64>().sqrt();
    (radial.asinh(), (c[n + 1] / c[0]).atanh())
}

/// Lifts `samples` evenly spaced grid points of the profile to the
/// hypersurface and revolves the meridian with `segments` angular steps.
/// Dilates first when some eigenvalue reaches `1/2`, if `allow_dilation`.
pub fn profile_to_hypersurface(
    p: &RadialProfile,
    samples: usize,
    segments: usize,
    allow_dilation: bool,
) -> Result<LiftedHypersurface> {
    if samples < 2 || segments < 3 {
        return Err(Error::InvalidParameter("need at least 2 samples and 3 segments".into()));
    }
    let max = p.max_lambda();
    let dilation = if max >= 0.5 - bound_tol(DerivativeMode::Analytic) {
        if !allow_dilation {
            return Err(Error::EigenvalueBound { max });
        }
        dilation_for_max(max)
    } else {
        0.0
    };
    let m = p.len();
    let idx: Vec<usize> = (0..samples)
        .map(|i| ((m - 1) as f64 * i as f64 / (samples - 1) as f64).round() as usize)
        .collect();
    let mut jets = Vec::with_capacity(samples);
    let mut weingarten = Vec::with_capacity(samples);
    let normalized = p.convention() == SigmaConvention::Normalized;
    let mut curve: Vec<ProfileCurvePoint> = Vec::with_capacity(samples);
    for &i in &idx {
        let (j, distance, axial) = lift_point_with_axis(p, dilation, p.s[i])?;
        weingarten.push(weingarten_sigma(&j.kappas, p.k(), normalized)?);
        jets.push(j);
        let arc = match curve.last() {
            None => 0.0,
            Some(prev) => {
                let ch = prev.distance.cosh() * distance.cosh() * (prev.axial - axial).cosh()
                    - prev.distance.sinh() * distance.sinh();
                prev.arc + ch.max(1.0).acosh()
            }
        };
        curve.push(ProfileCurvePoint {
            s: p.s[i],
            distance,
            axial,
            arc,
        });
    }
    let horosphere_type = jets
        .iter()
        .all(|j| j.kappas.iter().all(|kp| (kp + 1.0).abs() <= 1e-8));
    let mut vertices = Vec::with_capacity(samples * segments);
    for pt in &curve {
        let (ch, sh) = (pt.distance.cosh(), pt.distance.sinh());
        for j in 0..segments {
            let th = 2.0 * std::f64::consts::PI * j as f64 / segments as f64;
            // Poincare ball coordinates of (ch cosh a, sh cos th, sh sin th, 0.., ch sinh a)
            let d = 1.0 + ch * pt.axial.cosh();
            vertices.push([sh * th.cos() / d, sh * th.sin() / d, ch * pt.axial.sinh() / d]);
        }
    }
    let mesh = Mesh::grid(vertices, samples, segments, true)?;
    Ok(LiftedHypersurface {
        dilation,
        jets,
        curve,
        weingarten,
        sigma_lambda: (-(p.k() as f64) * dilation).exp() * p.c(),
        horosphere_type,
        mesh,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::conformal::schouten;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigenvalue_examples() {
        let e = radial_eigenvalues(0.0, 0.0, 0.0, 1.3).unwrap();
        assert_eq!((e.lambda_tangential, e.lambda_radial), (0.0, 0.0));
        for &r in &[0.1, 0.7, 1.0, 2.5] {
            let (u, du, ddu) = round_solution(r, 0.0);
            let e = radial_eigenvalues(u, du, ddu, r).unwrap();
            assert!((e.lambda_tangential - 0.5).abs() < 1e-14);
            assert!((e.lambda_radial - 0.5).abs() < 1e-14);
            let (u, du, ddu) = round_solution(r, 0.4);
            let e = radial_eigenvalues(u, du, ddu, r).unwrap();
            assert!((e.lambda_tangential - 0.5 * (-0.8f64).exp()).abs() < 1e-14);
        }
        assert!(radial_eigenvalues(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn second_derivative_examples() {
        let (u, du, r, c) = (0.2, -0.3, 0.8, 1.1);
        let ddu = solve_second_derivative(u, du, r, 3, 1, c, SigmaConvention::Raw).unwrap();
        let lt = radial_eigenvalues(u, du, 0.0, r).unwrap().lambda_tangential;
        let expect = 0.5 * du * du - (2.0 * u).exp() * (c - 2.0 * lt);
        assert!((ddu - expect).abs() < 1e-12);
        let back = radial_eigenvalues(u, du, ddu, r).unwrap().sigma_k(3, 1, SigmaConvention::Raw).unwrap();
        assert!((back - c).abs() < 1e-12);
        assert_eq!(solve_second_derivative(0.0, 0.0, 1.0, 3, 1, 0.0, SigmaConvention::Raw).unwrap(), 0.0);
        for (n, k) in [(3, 1), (4, 2), (5, 3)] {
            for conv in [SigmaConvention::Raw, SigmaConvention::Normalized] {
                let c = round_level(n, k, conv);
                for &r in &[0.3, 1.0, 1.7] {
                    let (u, du, ddu) = round_solution(r, 0.0);
                    let got = solve_second_derivative(u, du, r, n, k, c, conv).unwrap();
                    assert!((got - ddu).abs() < 1e-12, "{n} {k} {r}");
                }
            }
        }
        // r u' = -2 gives lambda_tan = 0: singular for k = 2
        let err = solve_second_derivative(0.0, -2.0, 1.0, 4, 2, 1.0, SigmaConvention::Raw);
        assert!(matches!(err, Err(Error::SingularOde { .. })));
    }

    #[test]
    fn eigenvalues_match_schouten_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 4;
        let p = RadialProfile::closed_form(n, 1, SigmaConvention::Raw, (-1.5, 1.5), 301, |r| {
            let u = 0.3 * (r * r).sin() - (1.0 + r * r).ln();
            let du = 0.6 * r * (r * r).cos() - 2.0 * r / (1.0 + r * r);
            let ddu = 0.6 * (r * r).cos() - 1.2 * r * r * (r * r).sin()
                - 2.0 * (1.0 - r * r) / ((1.0 + r * r) * (1.0 + r * r));
            (u, du, ddu)
        })
        .unwrap();
        let f = profile_field(&p, 0.0).unwrap();
        for _ in 0..20 {
            let i = rng.gen_range(0..p.len());
            let r = p.s()[i].exp();
            let sch = schouten(&f, &meridian_point(n, r).unwrap()).unwrap();
            let mut expect = vec![p.lambda_tan()[i]; n - 1];
            expect.push(p.lambda_rad()[i]);
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in sch.eigenvalues.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-6, "{a} {b} at r = {r}");
            }
        }
    }

    #[test]
    fn round_branch_is_preserved() {
        for (n, k) in [(3, 1), (4, 2), (5, 2)] {
            let c = round_level(n, k, SigmaConvention::Raw);
            let cfg = ShootConfig {
                span: 2.0,
                ..Default::default()
            };
            let (u0, du0, _) = round_solution(1.0, 0.0);
            let p = shoot_both((u0, du0), 1.0, n, k, c, &cfg).unwrap();
            assert!((p.span() - 4.0).abs() < 1e-12);
            assert_eq!(p.termination(), Termination::SpanEnd);
            let dev = p
                .s()
                .iter()
                .zip(p.u())
                .map(|(s, u)| (u - round_solution(s.exp(), 0.0).0).abs())
                .fold(0.0, f64::max);
            assert!(dev <= 1e-8, "deviation {dev}");
            assert!(p.max_residual() <= 1e-8);
            assert!(detect_period(&p, 1e-6).is_degenerate());
        }
    }

    #[test]
    fn flat_branch() {
        let cfg = ShootConfig {
            span: 3.0,
            ..Default::default()
        };
        let p = shoot((0.0, 0.0), 1.0, Direction::Inward, 3, 1, 0.0, &cfg).unwrap();
        assert!(p.u().iter().all(|u| *u == 0.0));
        assert_eq!(p.max_residual(), 0.0);
        assert!(p.s().windows(2).all(|w| w[1] > w[0]));
        let lifted = profile_to_hypersurface(&p, 8, 12, false).unwrap();
        assert!(lifted.horosphere_type);
        assert_eq!(lifted.dilation, 0.0);
    }

    #[test]
    fn synthetic_period() {
        let w = 2.0 * std::f64::consts::PI / 3.0;
        let p = RadialProfile::closed_form(3, 1, SigmaConvention::Raw, (0.0, 10.0), 2001, |r| {
            let s = r.ln();
            let u = 0.1 * (w * s).sin();
            let us = 0.1 * w * (w * s).cos();
            let uss = -0.1 * w * w * (w * s).sin();
            (u, us / r, (uss - us) / (r * r))
        })
        .unwrap();
        match detect_period(&p, 1e-6) {
            PeriodDetection::Periodic { period, drift, .. } => {
                assert!((period - 3.0).abs() < 1e-6, "{period}");
                assert!(drift.abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    fn delaunay(n: usize, k: usize, delta: f64, tol: f64, span: f64) -> RadialProfile {
        let cfg = ShootConfig {
            span,
            ode_tol: tol,
            ..Default::default()
        };
        let c = round_level(n, k, SigmaConvention::Raw);
        shoot((-delta, -1.0), 1.0, Direction::Outward, n, k, c, &cfg).unwrap()
    }

    #[test]
    fn delaunay_n5_k2_period() {
        let a = delaunay(5, 2, 0.05, 1e-10, 40.0);
        let b = delaunay(5, 2, 0.05, 5e-11, 40.0);
        assert!(a.max_residual() <= 1e-8);
        assert!(a.first_integral_drift() < 1e-9);
        let pa = detect_period(&a, 1e-6).period().unwrap();
        let pb = detect_period(&b, 1e-6).period().unwrap();
        assert!(pa > 0.0 && (pa - pb).abs() < 1e-4, "{pa} {pb}");
        // same orbit restarted from a later phase point
        let i = a.len() / 3;
        let c = round_level(5, 2, SigmaConvention::Raw);
        let r0 = a.s()[i].exp();
        let cfg = ShootConfig::default();
        let re = shoot((a.u()[i], a.du()[i]), r0, Direction::Outward, 5, 2, c, &cfg).unwrap();
        let pr = detect_period(&re, 1e-6).period().unwrap();
        assert!((pa - pr).abs() < 1e-4, "{pa} {pr}");
    }

    #[test]
    fn delaunay_n4_k2_has_no_period() {
        for delta in [0.01, 0.05, 0.1] {
            let p = delaunay(4, 2, delta, 1e-10, 40.0);
            assert!(p.max_residual() <= 1e-8);
            let d = detect_period(&p, 1e-6);
            assert!(matches!(d, PeriodDetection::NotFound { .. }), "{d:?}");
            // w = u + s never returns above its starting value
            let wmax = p.s().iter().zip(p.u()).map(|(s, u)| s + u).fold(f64::MIN, f64::max);
            assert!(wmax <= -delta + 1e-9);
        }
    }

    #[test]
    fn constant_branch_lifts_to_geodesic_sphere() {
        let p = RadialProfile::round(4, 2, SigmaConvention::Raw, 0.0, (-1.0, 1.0), 81).unwrap();
        assert!(matches!(profile_to_hypersurface(&p, 5, 8, false), Err(Error::EigenvalueBound { .. })));
        let l = profile_to_hypersurface(&p, 9, 16, true).unwrap();
        assert!(l.dilation > 0.0);
        let g = catalog::geodesic_sphere(0.5 * l.dilation, 4).unwrap();
        let kappa = g.expected_kappas()[0].0;
        for j in &l.jets {
            for kp in &j.kappas {
                assert!((kp - kappa).abs() < 1e-8);
            }
        }
        assert!(l.weingarten_spread() < 1e-6);
        assert!((l.weingarten[0] - l.sigma_lambda).abs() < 1e-8);
        l.mesh.validate().unwrap();
    }

    #[test]
    fn shifted_lift_matches_direct_jets() {
        let p = delaunay(5, 2, 0.1, 1e-10, 6.0);
        let t = dilation_for_max(p.max_lambda());
        let f = profile_field(&p, t).unwrap();
        for s in [0.0f64, 0.7, 1.9, 3.2] {
            let direct = jet_with_tol(&f, &meridian_point(5, s.exp()).unwrap(), DICTIONARY_TOL_FD).unwrap();
            let (lifted, d, ax) = lift_point_with_axis(&p, t, s).unwrap();
            let (d0, ax0) = axis_coordinates(&direct.phi);
            assert!((d - d0).abs() < 1e-7 && (ax - ax0).abs() < 1e-7);
            assert!(direct.phi.max_abs_diff(&lifted.phi) < 1e-7, "s = {s}");
            assert!(direct.eta.max_abs_diff(&lifted.eta) < 1e-7);
            assert!(direct.psi.max_abs_diff(&lifted.psi) < 1e-7);
            assert!((direct.rho - lifted.rho).abs() < 1e-9);
            assert!(lifted.residuals().max() < 1e-8);
        }
    }

    #[test]
    fn delaunay_lift_is_periodic() {
        let p = delaunay(5, 2, 0.1, 1e-10, 30.0);
        let period = detect_period(&p, 1e-6).period().unwrap();
        let l = profile_to_hypersurface(&p, 200, 8, true).unwrap();
        assert!(l.weingarten_spread() < 1e-6, "{}", l.weingarten_spread());
        // distance to the axis at s and s + P agree
        let dist = |s: f64| lift_point_with_axis(&p, l.dilation, s).unwrap().1;
        for s in [1.0, 2.3, 4.1] {
            assert!((dist(s) - dist(s + period)).abs() < 1e-4);
        }
    }
}
