//! Metric and generator specifications as accepted on the command line.
//!
//! Metric specs:
//!
//! * `round`
//! * `<entry>:<key>=<value>,...` for catalog entries, e.g. `geodesic-sphere:t=1`,
//!   `totally-geodesic:r=1`, `equidistant:r=1,t=0.5`, `product:k=1,r=1`
//! * `expr:<formula>[;pole=south|north|<c1>,...,<c{n+1}>]`, the formula in
//!   ambient coordinates `x1..` and/or chart coordinates `u1..` of the
//!   stereographic chart from `pole` (default `south`, so
//!   `u = x_{1..n} / (1 + x_{n+1})`)
//! * `profile:<path>` for a radial profile CSV written by `horoconv radial`
//!
//! Generator specs: `rotation:a,b[,angle]` and `boost:axis[,rapidity]` with
//! axes in `1..=n+1`; an omitted parameter stands for the sweep
//! `{+-1, +-0.3, +-0.05}`.

use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::catalog::{self, CatalogEntry};
use crate::chart::{SpherePoint, StereoChart};
use crate::conformal::{ConformalMetricField, SigmaConvention};
use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::io::expr::{self, Expr};
use crate::io::table;
use crate::lorentz::IsometryKind;
use crate::radial::{profile_field, RadialProfile};

/// Parameter values swept when a generator omits its parameter.
pub const GENERATOR_SWEEP: [f64; 6] = [1.0, -1.0, 0.3, -0.3, 0.05, -0.05];

#[derive(Debug, Clone)]
pub enum MetricKind {
    Round,
    Catalog(CatalogEntry),
    Expression { expr: Expr, pole: SpherePoint },
    Profile { path: PathBuf, profile: Arc<RadialProfile> },
}

#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub text: String,
    pub n: usize,
    pub convention: SigmaConvention,
    pub kind: MetricKind,
}

fn perr(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

impl MetricSpec {
    pub fn parse(text: &str, n: usize, convention: SigmaConvention) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        let kind = parse_kind(text, n)?;
        Ok(MetricSpec {
            text: text.to_string(),
            n,
            convention,
            kind,
        })
    }

    /// Spec text plus dimension, as echoed in reports.
    pub fn label(&self) -> String {
        format!("{} n={} sigma={}", self.text, self.n, self.convention)
    }

    pub fn catalog_entry(&self) -> Option<&CatalogEntry> {
        match &self.kind {
            MetricKind::Catalog(e) => Some(e),
            _ => None,
        }
    }

    pub fn field(&self) -> Result<ConformalMetricField> {
        let n = self.n;
        match &self.kind {
            MetricKind::Round => ConformalMetricField::round(n),
            MetricKind::Catalog(e) => e.metric_field().ok_or_else(|| {
                Error::InvalidParameter(format!("{} has no metric field on the sphere", e.name()))
            }),
            MetricKind::Expression { expr, pole } => expression_field(n, expr.clone(), pole.clone()),
            MetricKind::Profile { profile, .. } => profile_field(profile, 0.0),
        }
    }

    /// `count` seeded points inside the metric's domain. Catalog entries use
    /// their own parameter sampling; other specs draw uniformly on `S^n` and
    /// keep points in the domain.
    pub fn samples(&self, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
        if let MetricKind::Catalog(e) = &self.kind {
            return Ok(e
                .sample_parameters(count, seed)
                .iter()
                .map(|p| e.gauss_closed(p))
                .collect());
        }
        let f = self.field()?;
        uniform_samples(&f, count, seed)
    }
}

/// Uniform points on `S^n` inside the domain of `f`, seeded.
pub fn uniform_samples(f: &ConformalMetricField, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 10_000 * count.max(1) {
            return Err(Error::OutsideDomain);
        }
        let v: Vec<f64> = (0..=f.n()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let Ok(x) = SpherePoint::normalized(v) else {
            continue;
        };
        if f.contains(&x) && f.rho(&x).map(f64::is_finite).unwrap_or(false) {
            out.push(x);
        }
    }
    Ok(out)
}

fn parse_kind(text: &str, n: usize) -> Result<MetricKind> {
    if text == "round" {
        return Ok(MetricKind::Round);
    }
    let Some((head, rest)) = text.split_once(':') else {
        return Err(perr(0, format!("unknown metric spec '{text}'")));
    };
    let body = head.len() + 1;
    match head {
        "expr" => parse_expression(rest, n, body),
        "profile" => {
            let path = PathBuf::from(rest);
            let profile = table::read_profile(&path, n)?;
            Ok(MetricKind::Profile {
                path,
                profile: Arc::new(profile),
            })
        }
        name if catalog::ENTRY_NAMES.contains(&name) => parse_catalog(name, rest, n, body),
        _ => Err(perr(0, format!("unknown metric kind '{head}'"))),
    }
}

fn parse_expression(rest: &str, n: usize, offset: usize) -> Result<MetricKind> {
    let (formula, options) = match rest.split_once(';') {
        Some((f, o)) => (f, Some(o)),
        None => (rest, None),
    };
    let expr = expr::parse(formula, n, offset)?;
    let mut pole = SpherePoint::south(n);
    if let Some(opts) = options {
        let opt_at = offset + formula.len() + 1;
        let Some(value) = opts.strip_prefix("pole=") else {
            return Err(perr(opt_at, "expected 'pole=' option"));
        };
        let at = opt_at + "pole=".len();
        pole = match value {
            "south" => SpherePoint::south(n),
            "north" => SpherePoint::north(n),
            _ => {
                let coords = parse_numbers(value, at)?;
                if coords.len() != n + 1 {
                    return Err(perr(at, format!("pole needs {} coordinates", n + 1)));
                }
                SpherePoint::normalized(coords).map_err(|_| perr(at, "pole must be nonzero"))?
            }
        };
    }
    Ok(MetricKind::Expression { expr, pole })
}

fn parse_numbers(text: &str, at: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut pos = at;
    for part in text.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| perr(pos, format!("expected a number, got '{part}'")))?;
        out.push(v);
        pos += part.len() + 1;
    }
    Ok(out)
}

fn parse_catalog(name: &str, rest: &str, n: usize, offset: usize) -> Result<MetricKind> {
    let mut params: Vec<(String, f64, usize)> = Vec::new();
    let mut pos = offset;
    if !rest.is_empty() {
        for part in rest.split(',') {
            let Some((k, v)) = part.split_once('=') else {
                return Err(perr(pos, format!("expected key=value, got '{part}'")));
            };
            let val: f64 = v
                .trim()
                .parse()
                .map_err(|_| perr(pos + k.len() + 1, format!("bad value '{v}'")))?;
            params.push((k.trim().to_string(), val, pos));
            pos += part.len() + 1;
        }
    }
    let allowed: &[&str] = match name {
        "totally-geodesic" => &["r"],
        "equidistant" => &["r", "t"],
        "product" => &["k", "r"],
        "geodesic-sphere" => &["t"],
        _ => &["rho0"],
    };
    for (k, _, at) in &params {
        if !allowed.contains(&k.as_str()) {
            return Err(perr(*at, format!("unknown parameter '{k}' for {name}")));
        }
    }
    let get = |key: &str, default: f64| {
        params
            .iter()
            .rev()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| *v)
            .unwrap_or(default)
    };
    let entry = match name {
        "totally-geodesic" => catalog::totally_geodesic(get("r", 1.0), n),
        "equidistant" => catalog::equidistant(get("r", 1.0), get("t", 0.5), n),
        "product" => {
            let k = get("k", 1.0);
            if k.fract() != 0.0 || k < 1.0 {
                return Err(perr(offset, format!("product needs an integer k >= 1, got {k}")));
            }
            catalog::product_hk_snk(k as usize, get("r", 1.0), n)
        }
        "geodesic-sphere" => catalog::geodesic_sphere(get("t", 1.0), n),
        _ => catalog::horosphere_entry(get("rho0", 0.0), SpherePoint::north(n), n),
    }
    .map_err(|e| perr(offset, e.to_string()))?;
    Ok(MetricKind::Catalog(entry))
}

fn expression_field(n: usize, expr: Expr, pole: SpherePoint) -> Result<ConformalMetricField> {
    let chart = if pole == SpherePoint::south(n) {
        StereoChart::south(n)
    } else {
        StereoChart::new(pole)
    };
    let p: Vec<f64> = chart.pole().coords().to_vec();
    let frame: Vec<Vec<f64>> = chart.frame().iter().map(|v| v.iter().copied().collect()).collect();
    let uses_chart = expr.uses_chart();
    let (e1, e2) = (expr.clone(), expr);
    let (p1, f1) = (p.clone(), frame.clone());
    let chart_coords = move |y: &[Dual2], p: &[f64], frame: &[Vec<f64>]| -> Vec<Dual2> {
        let mut den = y[0].lift(1.0);
        for (yj, pj) in y.iter().zip(p) {
            den = &den - &(yj * *pj);
        }
        frame
            .iter()
            .map(|e| {
                let mut num = y[0].lift(0.0);
                for (yj, ej) in y.iter().zip(e) {
                    num = &num + &(yj * *ej);
                }
                &num / &den
            })
            .collect()
    };
    let rho = move |y: &[Dual2]| {
        let u = if uses_chart {
            chart_coords(y, &p1, &f1)
        } else {
            Vec::new()
        };
        e1.eval(y, &u)
    };
    let domain = move |y: &[f64]| {
        let den = 1.0 - y.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
        if uses_chart && den <= 1e-12 {
            return false;
        }
        let u: Vec<f64> = if uses_chart {
            frame
                .iter()
                .map(|e| y.iter().zip(e).map(|(a, b)| a * b).sum::<f64>() / den)
                .collect()
        } else {
            Vec::new()
        };
        e2.eval_f64(y, &u).is_finite()
    };
    ConformalMetricField::with_domain(n, rho, domain)
}

/// One parsed generator and the isometries it stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub text: String,
    pub elements: Vec<(String, IsometryKind)>,
}

pub fn parse_generator(text: &str, n: usize) -> Result<GeneratorSpec> {
    let Some((head, rest)) = text.split_once(':') else {
        return Err(perr(0, format!("expected rotation:a,b[,angle] or boost:axis[,rapidity], got '{text}'")));
    };
    let at = head.len() + 1;
    let nums = parse_numbers(rest, at)?;
    let axis = |v: f64, pos: usize| -> Result<usize> {
        if v.fract() != 0.0 || v < 1.0 || v > (n + 1) as f64 {
            return Err(perr(pos, format!("axis must be an integer in 1..={}, got {v}", n + 1)));
        }
        Ok(v as usize)
    };
    let (needed, make): (usize, Box<dyn Fn(f64) -> IsometryKind>) = match head {
        "rotation" => {
            if nums.len() < 2 || nums.len() > 3 {
                return Err(perr(at, "rotation takes a,b[,angle]"));
            }
            let a = axis(nums[0], at)?;
            let b = axis(nums[1], at)?;
            if a == b {
                return Err(perr(at, "rotation axes must be distinct"));
            }
            (
                2,
                Box::new(move |angle| IsometryKind::Rotation { axes: (a, b), angle }),
            )
        }
        "boost" => {
            if nums.is_empty() || nums.len() > 2 {
                return Err(perr(at, "boost takes axis[,rapidity]"));
            }
            let a = axis(nums[0], at)?;
            (1, Box::new(move |rapidity| IsometryKind::Boost { axis: a, rapidity }))
        }
        _ => return Err(perr(0, format!("unknown generator '{head}'"))),
    };
    let values: Vec<f64> = if nums.len() > needed {
        vec![nums[needed]]
    } else {
        GENERATOR_SWEEP.to_vec()
    };
    let base = if nums.len() > needed {
        text.rsplit_once(',').map(|(b, _)| b).unwrap_or(text).to_string()
    } else {
        text.to_string()
    };
    let elements = values
        .into_iter()
        .map(|v| (format!("{base},{}", crate::report::fmt_f64(v)), make(v)))
        .collect();
    Ok(GeneratorSpec {
        text: text.to_string(),
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::schouten;

    fn spec(s: &str) -> Result<MetricSpec> {
        MetricSpec::parse(s, 3, SigmaConvention::Raw)
    }

    #[test]
    fn catalog_and_round() {
        assert!(matches!(spec("round").unwrap().kind, MetricKind::Round));
        let s = spec("geodesic-sphere:t=1").unwrap();
        let f = s.field().unwrap();
        let x = &s.samples(3, 1).unwrap()[0];
        assert!((schouten(&f, x).unwrap().max() - (-2.0f64).exp() / 2.0).abs() < 1e-12);
        assert!(spec("product:k=1,r=0.5").is_ok());
        match spec("product:k=1,q=2") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(spec("nosuch:t=1"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(spec("geodesic-sphere:t=-1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn expression_matches_catalog() {
        // geodesic sphere t = 0.3 written in chart coordinates is just a constant
        let s = spec("expr:0.3").unwrap();
        let f = s.field().unwrap();
        let x = SpherePoint::normalized(vec![0.2, -0.4, 0.1, 0.5]).unwrap();
        assert!((schouten(&f, &x).unwrap().max() - (-0.6f64).exp() / 2.0).abs() < 1e-12);
        // the round metric pulled to the flat chart: rho = ln(2/(1+|u|^2)) - ln(2/(1+|u|^2)) = 0,
        // while rho = ln((1+|u|^2)/2) is the flat metric with lambda = 0
        let flat = spec("expr:ln((1 + u1^2 + u2^2 + u3^2)/2)").unwrap().field().unwrap();
        let eig = schouten(&flat, &x).unwrap().eigenvalues;
        assert!(eig.iter().all(|l| l.abs() < 1e-10), "{eig:?}");
        let ambient = spec("expr:0.1*x4^2").unwrap().field().unwrap();
        assert!((ambient.rho(&x).unwrap() - 0.1 * 0.25 / 0.46).abs() < 1e-15);
        assert!(spec("expr:u1;pole=north").is_ok());
        assert!(spec("expr:u1;pole=0,0,1,0").is_ok());
        assert!(matches!(spec("expr:u1;pole=0,0,1"), Err(Error::Parse { pos: 13, .. })));
        assert!(matches!(spec("expr:u1 +* 2"), Err(Error::Parse { pos: 9, .. })));
    }

    #[test]
    fn generators() {
        let g = parse_generator("rotation:1,2", 3).unwrap();
        assert_eq!(g.elements.len(), GENERATOR_SWEEP.len());
        let g = parse_generator("boost:4,0.5", 3).unwrap();
        assert_eq!(g.elements.len(), 1);
        assert_eq!(
            g.elements[0].1,
            IsometryKind::Boost {
                axis: 4,
                rapidity: 0.5
            }
        );
        assert!(parse_generator("boost:5", 3).is_err());
        assert!(parse_generator("rotation:1,1", 3).is_err());
        assert!(parse_generator("shear:1", 3).is_err());
    }
}
