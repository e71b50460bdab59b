//! CSV side files: radial profiles and hypersurface jets. Numbers are written
//! with 17 significant digits so files reload bit for bit.

use std::path::Path;

use crate::conformal::SigmaConvention;
use crate::correspondence::HypersurfaceJet;
use crate::error::{Error, Result};
use crate::radial::{radial_eigenvalues, Provenance, RadialProfile};

pub const PROFILE_HEADER: [&str; 7] = [
    "s",
    "r",
    "u",
    "du_dr",
    "lambda_tan",
    "lambda_rad",
    "sigma_k_residual",
];

fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Profile as CSV text with header row.
pub fn profile_csv(p: &RadialProfile) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PROFILE_HEADER).map_err(csv_err)?;
    let r = p.r();
    for i in 0..p.len() {
        w.write_record([
            num(p.s()[i]),
            num(r[i]),
            num(p.u()[i]),
            num(p.du()[i]),
            num(p.lambda_tan()[i]),
            num(p.lambda_rad()[i]),
            num(p.residual()[i]),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Reads a profile written by [`profile_csv`]. `u''` is recovered from
/// `lambda_rad`; the profile is tagged `k = 1` with `c` equal to `sigma_1` at
/// the first row, which only matters for its residual column.
pub fn read_profile(path: &Path, n: usize) -> Result<RadialProfile> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != PROFILE_HEADER {
        return Err(Error::Parse {
            pos: 0,
            msg: format!("profile header must be {}", PROFILE_HEADER.join(",")),
        });
    }
    let (mut s, mut u, mut du, mut ddu) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse {
                    pos: line + 2,
                    msg: format!("row {} column {} is not a number", line + 2, PROFILE_HEADER[i]),
                })
        };
        let (si, ui, dui, lr) = (field(0)?, field(2)?, field(3)?, field(5)?);
        s.push(si);
        u.push(ui);
        du.push(dui);
        ddu.push(0.5 * dui * dui - (2.0 * ui).exp() * lr);
    }
    if s.len() < 2 {
        return Err(Error::EmptySamples);
    }
    let c = radial_eigenvalues(u[0], du[0], ddu[0], s[0].exp())?.sigma_k(n, 1, SigmaConvention::Raw)?;
    RadialProfile::from_samples(n, 1, c, SigmaConvention::Raw, s, u, du, ddu, Provenance::ClosedForm)
}

/// Jets as CSV: `x1..x{n+1}, rho, phi0..phi{n+1}, eta0..eta{n+1},
/// kappa1..kappan, lambda1..lambdan`.
pub fn jets_csv(n: usize, jets: &[HypersurfaceJet]) -> Result<String> {
    let mut header: Vec<String> = (1..=n + 1).map(|i| format!("x{i}")).collect();
    header.push("rho".into());
    header.extend((0..n + 2).map(|i| format!("phi{i}")));
    header.extend((0..n + 2).map(|i| format!("eta{i}")));
    header.extend((1..=n).map(|i| format!("kappa{i}")));
    header.extend((1..=n).map(|i| format!("lambda{i}")));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(csv_err)?;
    for j in jets {
        let row: Vec<String> = j
            .x
            .coords()
            .iter()
            .chain(std::iter::once(&j.rho))
            .chain(j.phi.coords())
            .chain(j.eta.coords())
            .chain(&j.kappas)
            .chain(&j.lambdas)
            .map(|v| num(*v))
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_round_trip() {
        let p = RadialProfile::round(4, 2, SigmaConvention::Raw, 0.2, (-1.0, 1.0), 21).unwrap();
        let text = profile_csv(&p).unwrap();
        assert!(text.starts_with("s,r,u,du_dr,lambda_tan,lambda_rad,sigma_k_residual\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, &text).unwrap();
        let q = read_profile(&path, 4).unwrap();
        assert_eq!(q.s(), p.s());
        for (a, b) in q.ddu().iter().zip(p.ddu()) {
            assert!((a - b).abs() < 1e-13);
        }
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_profile(&path, 4), Err(Error::Parse { .. })));
    }
}
