//! Lorentz isometries acting on the sphere at infinity, invariance of
//! metrics and hypersurfaces, and the eigenvalue-structure detector.
//!
//! An isometry `T` acts on the future null cone; at `(1, x)` it gives
//! `T(1, x) = e^{-omega(x)} (1, Phi(x))`, which defines a conformal map `Phi`
//! of `S^n` with `Phi^* g_0 = e^{2 omega} g_0`.

use nalgebra::{DMatrix, DVector};

use crate::chart::SpherePoint;
use crate::conformal::{cluster_eigenvalues, schouten, ConformalMetricField};
use crate::correspondence::representation;
use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::lorentz::LorentzIsometry;

/// Bound on `|M^T J M - J|` (scaled by `max(1, |M|)^2`) accepted for
/// matrices reconstructed from samples.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// The conformal map of `S^n` induced by a Lorentz isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusMap {
    isometry: LorentzIsometry,
}

pub fn mobius_from_isometry(t: &LorentzIsometry) -> Result<MobiusMap> {
    if !t.preserves_time_orientation() {
        return Err(Error::TimeOrientation);
    }
    Ok(MobiusMap { isometry: t.clone() })
}

impl MobiusMap {
    pub fn isometry(&self) -> &LorentzIsometry {
        &self.isometry
    }

    pub fn n(&self) -> usize {
        self.isometry.n()
    }

    fn image(&self, x: &SpherePoint) -> DVector<f64> {
        let mut v = DVector::zeros(x.coords().len() + 1);
        v[0] = 1.0;
        v.rows_mut(1, x.coords().len()).copy_from_slice(x.coords());
        self.isometry.matrix() * v
    }

    /// `(Phi(x), omega(x))`.
    pub fn apply(&self, x: &SpherePoint) -> (SpherePoint, f64) {
        let v = self.image(x);
        let t = v[0];
        let c: Vec<f64> = v.iter().skip(1).map(|c| c / t).collect();
        (
            SpherePoint::normalized(c).expect("image of a null vector is null"),
            -t.ln(),
        )
    }

    pub fn phi(&self, x: &SpherePoint) -> SpherePoint {
        self.apply(x).0
    }

    pub fn omega(&self, x: &SpherePoint) -> f64 {
        self.apply(x).1
    }

    /// `Phi` and `omega` on jets of ambient coordinates.
    pub fn apply_dual(&self, y: &[Dual2]) -> (Vec<Dual2>, Dual2) {
        let m = self.isometry.matrix();
        let dim = m.nrows();
        let row = |i: usize| {
            let mut acc = y[0].lift(m[(i, 0)]);
            for (j, yj) in y.iter().enumerate() {
                let c = m[(i, j + 1)];
                if c != 0.0 {
                    acc = acc + yj * c;
                }
            }
            acc
        };
        let t = row(0);
        let inv = t.recip();
        let phi = (1..dim).map(|i| row(i) * &inv).collect();
        (phi, -t.ln())
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            isometry: self.isometry.inverse(),
        }
    }
}

/// Null directions `(1, x)` spanning `L^{n+2}`: `e_1, ..., e_{n+1}`, `-e_1`
/// and two diagonal points for validation.
pub fn default_null_samples(n: usize) -> Vec<SpherePoint> {
    let dim = n + 1;
    let mut out: Vec<SpherePoint> = (0..dim).map(|i| SpherePoint::basis(dim, i)).collect();
    out.push(SpherePoint::basis(dim, 0).antipode());
    out.push(SpherePoint::normalized(vec![1.0; dim]).expect("nonzero"));
    out.push(
        SpherePoint::normalized((0..dim).map(|i| if i % 2 == 0 { 1.0 } else { -0.5 }).collect())
            .expect("nonzero"),
    );
    out
}

/// Solves `M (1, x_j) = e^{-omega(x_j)} (1, Phi(x_j))` in least squares and
/// checks that `M` is a time-orientation preserving Lorentz isometry.
pub fn isometry_from_mobius(
    phi: &dyn Fn(&SpherePoint) -> SpherePoint,
    omega: &dyn Fn(&SpherePoint) -> f64,
    samples: &[SpherePoint],
) -> Result<LorentzIsometry> {
    let first = samples.first().ok_or(Error::EmptySamples)?;
    let dim = first.coords().len() + 1;
    let n = dim - 2;
    let m = samples.len();
    if m < dim {
        return Err(Error::DegenerateSamples);
    }
    let mut xs = DMatrix::zeros(m, dim);
    let mut bs = DMatrix::zeros(m, dim);
    for (j, x) in samples.iter().enumerate() {
        if x.coords().len() != dim - 1 {
            return Err(Error::DimensionMismatch {
                expected: dim - 1,
                found: x.coords().len(),
            });
        }
        let y = phi(x);
        let s = (-omega(x)).exp();
        if !s.is_finite() || y.coords().len() != dim - 1 {
            return Err(Error::NonFinite);
        }
        xs[(j, 0)] = 1.0;
        bs[(j, 0)] = s;
        for i in 0..dim - 1 {
            xs[(j, i + 1)] = x.coords()[i];
            bs[(j, i + 1)] = s * y.coords()[i];
        }
    }
    let svd = xs.clone().svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-10 * sv.max() {
        return Err(Error::DegenerateSamples);
    }
    // rows: (1, x_j)^T M^T = b_j^T
    let mt = svd.solve(&bs, 1e-14).map_err(|_| Error::DegenerateSamples)?;
    let matrix = mt.transpose();
    let fit = (&xs * &mt - &bs).amax();
    let scale = matrix.amax().max(1.0);
    if !(fit <= RECONSTRUCTION_TOL * scale) {
        return Err(Error::NotAnIsometry(fit));
    }
    LorentzIsometry::from_matrix_with_tol(n, matrix, RECONSTRUCTION_TOL)
}

/// The exponent `rho(Phi(x)) + omega(x)` of `Phi^* g`.
pub fn pullback_exponent(m: &MobiusMap, f: &ConformalMetricField) -> Result<ConformalMetricField> {
    if m.n() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n() + 2,
            found: m.n() + 2,
        });
    }
    let (m1, f1) = (m.clone(), f.clone());
    let (m2, f2) = (m.clone(), f.clone());
    let out = ConformalMetricField::with_domain(
        f.n(),
        move |y: &[Dual2]| {
            let (phi, omega) = m1.apply_dual(y);
            f1.rho_dual(&phi) + omega
        },
        move |y: &[f64]| {
            let x = match SpherePoint::normalized(y.to_vec()) {
                Ok(x) => x,
                Err(_) => return false,
            };
            f2.contains(&m2.phi(&x))
        },
    )?;
    Ok(out.with_mode(f.mode()))
}

/// Verdict and worst residual over admissible samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceResult {
    pub invariant: bool,
    pub max_residual: f64,
    pub admissible: usize,
}

/// `max |rho(x) - rho(Phi(x)) - omega(x)| <= tol` over samples with `x` and
/// `Phi(x)` in the domain.
pub fn is_metric_invariant(
    f: &ConformalMetricField,
    m: &MobiusMap,
    samples: &[SpherePoint],
    tol: f64,
) -> Result<InvarianceResult> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for x in samples {
        let (y, omega) = m.apply(x);
        if !f.contains(x) || !f.contains(&y) {
            continue;
        }
        let r = (f.rho(x)? - f.rho(&y)? - omega).abs();
        worst = worst.max(r);
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptySamples);
    }
    Ok(InvarianceResult {
        invariant: worst <= tol,
        max_residual: worst,
        admissible: count,
    })
}

/// `max |T phi(x) - phi(Phi(x))|_inf <= tol`, with `Phi` induced by `T`.
pub fn is_hypersurface_invariant(
    f: &ConformalMetricField,
    t: &LorentzIsometry,
    samples: &[SpherePoint],
    tol: f64,
) -> Result<InvarianceResult> {
    let m = mobius_from_isometry(t)?;
    let mut worst = 0.0f64;
    let mut count = 0;
    for x in samples {
        let y = m.phi(x);
        if !f.contains(x) || !f.contains(&y) {
            continue;
        }
        let px = representation(f, x)?.phi;
        let py = representation(f, &y)?.phi;
        let moved = t.matrix() * px.as_dvector();
        worst = worst.max((moved - py.as_dvector()).amax());
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptySamples);
    }
    Ok(InvarianceResult {
        invariant: worst <= tol,
        max_residual: worst,
        admissible: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureThresholds {
    /// Relative gap for eigenvalue clustering.
    pub multiplicity_rel: f64,
    /// Score above which the second eigenvalue is reported as a function of
    /// the first.
    pub dependence: f64,
}

impl Default for StructureThresholds {
    fn default() -> Self {
        StructureThresholds {
            multiplicity_rel: crate::conformal::MULTIPLICITY_REL_TOL,
            dependence: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    /// Cluster multiplicities per sample, in ascending eigenvalue order.
    pub patterns: Vec<Vec<usize>>,
    /// Every sample splits as one eigenvalue of multiplicity `n - 1` and a
    /// distinct simple one.
    pub two_eigenvalues: bool,
    /// Every sample has an eigenvalue of multiplicity at least `n - 1`.
    pub multiplicity_n_minus_1: bool,
    /// `1 - mean((nu_i - nu_nn(i))^2) / var(nu)` with `nn` the nearest
    /// neighbour in `lambda`; 1 when `nu` does not vary. `None` when fewer than
    /// two samples have the split.
    pub dependence_score: Option<f64>,
    pub dependence_threshold: f64,
    /// `min |lambda - nu|` over split samples.
    pub gap: Option<f64>,
    /// `(lambda, nu)` per split sample.
    pub pairs: Vec<(f64, f64)>,
}

impl StructureReport {
    /// Most common multiplicity pattern and how many samples show it.
    pub fn dominant_pattern(&self) -> Option<(Vec<usize>, usize)> {
        let mut counts: Vec<(Vec<usize>, usize)> = Vec::new();
        for p in &self.patterns {
            match counts.iter_mut().find(|(q, _)| q == p) {
                Some(entry) => entry.1 += 1,
                None => counts.push((p.clone(), 1)),
            }
        }
        counts.into_iter().max_by_key(|(_, c)| *c)
    }

    pub fn dependence_above_threshold(&self) -> Option<bool> {
        self.dependence_score.map(|s| s >= self.dependence_threshold)
    }
}

pub fn detect_radial_structure(
    f: &ConformalMetricField,
    samples: &[SpherePoint],
    thresholds: StructureThresholds,
) -> Result<StructureReport> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter(
            "structure detection needs at least 2 samples".into(),
        ));
    }
    let n = f.n();
    let mut patterns = Vec::with_capacity(samples.len());
    let mut pairs = Vec::new();
    let mut all_two = true;
    let mut all_big = true;
    for x in samples {
        let eig = schouten(f, x)?.eigenvalues;
        let clusters = cluster_eigenvalues(&eig, thresholds.multiplicity_rel);
        patterns.push(clusters.iter().map(|c| c.1).collect());
        let big = clusters.iter().position(|c| c.1 + 1 >= n);
        all_big &= big.is_some();
        if clusters.len() == 2 {
            if let Some(b) = big {
                pairs.push((clusters[b].0, clusters[1 - b].0));
                continue;
            }
        }
        all_two = false;
    }
    let gap = pairs
        .iter()
        .map(|(l, v)| (l - v).abs())
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))));
    Ok(StructureReport {
        patterns,
        two_eigenvalues: all_two,
        multiplicity_n_minus_1: all_big,
        dependence_score: dependence_score(&pairs),
        dependence_threshold: thresholds.dependence,
        gap,
        pairs,
    })
}

fn dependence_score(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let m = pairs.len() as f64;
    let mean = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let var = pairs.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / m;
    if var <= 1e-20 * (1.0 + mean * mean) {
        return Some(1.0);
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut scatter = 0.0;
    for i in 0..sorted.len() {
        let left = i.checked_sub(1).map(|j| sorted[j]);
        let right = sorted.get(i + 1).copied();
        let nn = match (left, right) {
            (Some(a), Some(b)) => {
                if (sorted[i].0 - a.0).abs() <= (b.0 - sorted[i].0).abs() {
                    a
                } else {
                    b
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!(),
        };
        scatter += (sorted[i].1 - nn.1).powi(2);
    }
    Some((1.0 - scatter / m / var).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{geodesic_sphere, product_hk_snk};
    use crate::lorentz::{make_isometry, IsometryKind};
    use proptest::prelude::*;

    fn pts(n: usize, count: usize, seed: u64) -> Vec<SpherePoint> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                SpherePoint::normalized((0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
            })
            .collect()
    }

    fn boost(axis: usize, s: f64, n: usize) -> LorentzIsometry {
        make_isometry(&IsometryKind::Boost { axis, rapidity: s }, n).unwrap()
    }

    fn rot(a: usize, b: usize, angle: f64, n: usize) -> LorentzIsometry {
        make_isometry(&IsometryKind::Rotation { axes: (a, b), angle }, n).unwrap()
    }

    #[test]
    fn identity_and_rotation_maps() {
        let m = mobius_from_isometry(&LorentzIsometry::identity(3)).unwrap();
        let r = mobius_from_isometry(&rot(1, 2, 0.4, 3)).unwrap();
        for x in pts(3, 10, 1) {
            let (y, w) = m.apply(&x);
            assert!((y.as_dvector() - x.as_dvector()).amax() < 1e-15);
            assert_eq!(w, 0.0);
            let (y, w) = r.apply(&x);
            assert!(w.abs() < 1e-15);
            let c = x.coords();
            let want0 = 0.4f64.cos() * c[0] - 0.4f64.sin() * c[1];
            assert!((y.coords()[0] - want0).abs() < 1e-15);
        }
    }

    #[test]
    fn boost_map_closed_form() {
        let (n, s) = (3, 0.8f64);
        let m = mobius_from_isometry(&boost(n + 1, s, n)).unwrap();
        for x in pts(n, 20, 2) {
            let (y, w) = m.apply(&x);
            let xn = x.coords()[n];
            let d = s.cosh() + s.sinh() * xn;
            assert!(((-w).exp() - d).abs() < 1e-13);
            for i in 0..n {
                assert!((y.coords()[i] - x.coords()[i] / d).abs() < 1e-13);
            }
            assert!((y.coords()[n] - (s.sinh() + s.cosh() * xn) / d).abs() < 1e-13);
            let norm: f64 = y.coords().iter().map(|c| c * c).sum();
            assert!((norm - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn time_reversal_is_rejected() {
        let mut m = DMatrix::identity(5, 5);
        m[(0, 0)] = -1.0;
        let t = LorentzIsometry::from_matrix(3, m);
        assert_eq!(t.unwrap_err(), Error::TimeOrientation);
    }

    #[test]
    fn reconstruction_round_trip() {
        let n = 4;
        let t = make_isometry(
            &IsometryKind::Composition(vec![
                IsometryKind::Boost { axis: 2, rapidity: 0.7 },
                IsometryKind::Rotation { axes: (1, 5), angle: 1.1 },
                IsometryKind::Boost { axis: 5, rapidity: -0.3 },
            ]),
            n,
        )
        .unwrap();
        let m = mobius_from_isometry(&t).unwrap();
        let back = isometry_from_mobius(&|x| m.phi(x), &|x| m.omega(x), &default_null_samples(n)).unwrap();
        assert!((back.matrix() - t.matrix()).amax() < 1e-9);
    }

    #[test]
    fn identity_reconstructs_and_scaling_is_rejected() {
        let s = default_null_samples(3);
        let id = isometry_from_mobius(&|x| x.clone(), &|_| 0.0, &s).unwrap();
        assert!((id.matrix() - DMatrix::identity(5, 5)).amax() < 1e-12);
        let err = isometry_from_mobius(&|x| x.clone(), &|_| 1.0, &s).unwrap_err();
        assert!(matches!(err, Error::NotAnIsometry(_)));
        let few = &s[..3];
        assert_eq!(
            isometry_from_mobius(&|x| x.clone(), &|_| 0.0, few).unwrap_err(),
            Error::DegenerateSamples
        );
    }

    #[test]
    fn functoriality() {
        let n = 3;
        let t1 = boost(2, 0.6, n).compose(&rot(1, 3, 0.3, n)).unwrap();
        let t2 = rot(2, 4, -0.9, n).compose(&boost(4, 0.4, n)).unwrap();
        let (m1, m2) = (mobius_from_isometry(&t1).unwrap(), mobius_from_isometry(&t2).unwrap());
        let m12 = mobius_from_isometry(&t1.compose(&t2).unwrap()).unwrap();
        for x in pts(n, 30, 3) {
            let (y2, w2) = m2.apply(&x);
            let (y12, w12) = m1.apply(&y2);
            let (z, w) = m12.apply(&x);
            assert!((z.as_dvector() - y12.as_dvector()).amax() < 1e-9);
            assert!((w - (w12 + w2)).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn boost_factor_bounded_by_rapidity(s in -3.0f64..3.0, a in -1.0f64..1.0, b in -1.0f64..1.0, c in 0.1f64..1.0) {
            let m = mobius_from_isometry(&boost(2, s, 3)).unwrap();
            let x = SpherePoint::normalized(vec![a, b, c, 0.3]).unwrap();
            prop_assert!(m.omega(&x).abs() <= s.abs() + 1e-12);
        }
    }

    #[test]
    fn pullback_examples() {
        let n = 3;
        let radial = ConformalMetricField::new(n, move |y: &[Dual2]| (&y[n] * 0.7).sin() + 0.3).unwrap();
        let id = mobius_from_isometry(&LorentzIsometry::identity(n)).unwrap();
        let rot_fix = mobius_from_isometry(&rot(1, 2, 0.8, n)).unwrap();
        let round = ConformalMetricField::round(n).unwrap();
        let b = mobius_from_isometry(&boost(1, 0.5, n)).unwrap();
        let pb_round = pullback_exponent(&b, &round).unwrap();
        for x in pts(n, 10, 4) {
            let a = pullback_exponent(&id, &radial).unwrap().rho(&x).unwrap();
            assert!((a - radial.rho(&x).unwrap()).abs() < 1e-14);
            let r = pullback_exponent(&rot_fix, &radial).unwrap().rho(&x).unwrap();
            assert!((r - radial.rho(&x).unwrap()).abs() < 1e-14);
            assert!((pb_round.rho(&x).unwrap() - b.omega(&x)).abs() < 1e-14);
        }
        assert!(pts(n, 10, 4).iter().any(|x| b.omega(x).abs() > 1e-3));
        // the pullback of the round metric by a Mobius map is round
        for x in pts(n, 5, 5) {
            for l in schouten(&pb_round, &x).unwrap().eigenvalues {
                assert!((l - 0.5).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn metric_and_hypersurface_invariance_agree() {
        let n = 3;
        let sphere = geodesic_sphere(1.0, n).unwrap().metric_field().unwrap();
        let samples = pts(n, 20, 6);
        for t in [rot(1, 3, 0.7, n), rot(2, 4, -1.2, n)] {
            let m = mobius_from_isometry(&t).unwrap();
            let a = is_metric_invariant(&sphere, &m, &samples, 1e-7).unwrap();
            let b = is_hypersurface_invariant(&sphere, &t, &samples, 1e-7).unwrap();
            assert!(a.invariant && b.invariant);
            assert!(b.max_residual < 1e-9);
        }
        let t = boost(2, 0.3, n);
        let m = mobius_from_isometry(&t).unwrap();
        assert!(!is_metric_invariant(&sphere, &m, &samples, 1e-7).unwrap().invariant);
        assert!(!is_hypersurface_invariant(&sphere, &t, &samples, 1e-7).unwrap().invariant);

        let product = product_hk_snk(1, 1.0, n).unwrap().metric_field().unwrap();
        let block = rot(2, 3, 0.4, n);
        let m = mobius_from_isometry(&block).unwrap();
        let a = is_metric_invariant(&product, &m, &samples, 1e-9).unwrap();
        let b = is_hypersurface_invariant(&product, &block, &samples, 1e-7).unwrap();
        assert!(a.invariant && b.invariant, "{a:?} {b:?}");
    }

    #[test]
    fn structure_detector() {
        let n = 4;
        let samples = pts(n, 30, 7);
        let product = product_hk_snk(n - 1, 1.0, n).unwrap().metric_field().unwrap();
        let inside: Vec<SpherePoint> = samples
            .iter()
            .map(|x| {
                let mut c: Vec<f64> = x.coords().iter().map(|v| 0.5 * v).collect();
                c[n] = c[n].abs() + 0.2;
                SpherePoint::normalized(c).unwrap()
            })
            .filter(|x| product.contains(x))
            .collect();
        let rep = detect_radial_structure(&product, &inside, StructureThresholds::default()).unwrap();
        assert!(rep.two_eigenvalues && rep.multiplicity_n_minus_1);
        assert_eq!(rep.dominant_pattern().unwrap().0, vec![n - 1, 1]);
        assert_eq!(rep.dependence_score, Some(1.0));
        let r = 1.0f64;
        let l = 0.5 + r * r - r * (1.0 + r * r).sqrt();
        assert!((rep.gap.unwrap() - 2.0 * l).abs() < 1e-9);

        let round = ConformalMetricField::round(n).unwrap();
        let rep = detect_radial_structure(&round, &samples, StructureThresholds::default()).unwrap();
        assert!(!rep.two_eigenvalues);
        assert!(rep.multiplicity_n_minus_1);

        let radial = ConformalMetricField::new(n, move |y: &[Dual2]| &y[n] * &y[n] * 0.1).unwrap();
        let off_poles: Vec<SpherePoint> =
            samples.iter().filter(|x| x.coords()[n].abs() < 0.9 && x.coords()[n].abs() > 0.05).cloned().collect();
        let rep = detect_radial_structure(&radial, &off_poles, StructureThresholds::default()).unwrap();
        assert!(rep.two_eigenvalues, "{:?}", rep.patterns);
        assert!(detect_radial_structure(&radial, &samples[..1], StructureThresholds::default()).is_err());
    }
}
