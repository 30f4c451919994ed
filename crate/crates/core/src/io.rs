//! File formats: series JSON and the CSV tables.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::almost_periodic::{AlmostPeriods, Displacement};
use crate::config::ToleranceConfig;
use crate::diffraction::GrowthProfile;
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::poisson::{PoissonCheck, TestFunction};
use crate::wiener::ExponentialSum;
use crate::zeros::ZeroSet;

#[derive(Serialize, Deserialize)]
struct SeriesTerm {
    omega: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesFile {
    terms: Vec<SeriesTerm>,
}

/// `{"terms": [{"omega": …, "re": …, "im": …}, …]}`, normalized on read.
pub fn read_series_json<R: Read>(reader: R, cfg: &ToleranceConfig) -> Result<ExponentialSum> {
    let file: SeriesFile = serde_json::from_reader(reader)?;
    ExponentialSum::normalize(
        file.terms.into_iter().map(|t| (t.omega, Complex64::new(t.re, t.im))),
        cfg,
    )
}

pub fn write_series_json<W: Write>(mut writer: W, q: &ExponentialSum) -> Result<()> {
    let file = SeriesFile {
        terms: q
            .terms()
            .iter()
            .map(|t| SeriesTerm {
                omega: t.omega,
                re: t.coeff.re,
                im: t.coeff.im,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut writer, &file)?;
    writeln!(writer)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ZeroRow {
    position: f64,
    multiplicity: u32,
}

/// `position,multiplicity`. Without a window, the span of the rows is used.
pub fn read_zeros_csv<R: Read>(reader: R, window: Option<(f64, f64)>) -> Result<ZeroSet> {
    let mut zeros = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let row: ZeroRow = row?;
        zeros.push((row.position, row.multiplicity));
    }
    let window = match window {
        Some(w) => w,
        None if zeros.is_empty() => return Err(Error::InvalidInput("empty zero set needs a window".into())),
        None => (zeros[0].0, zeros[zeros.len() - 1].0),
    };
    ZeroSet::new(window, zeros)
}

pub fn write_zeros_csv<W: Write>(writer: W, zs: &ZeroSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["position", "multiplicity"])?;
    for &(x, m) in zs.zeros() {
        w.serialize((x, m))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct MeasureRow {
    position: f64,
    mass_re: f64,
    mass_im: f64,
}

/// `position,mass_re,mass_im`. Without a window, the span of the rows is used.
pub fn read_measure_csv<R: Read>(reader: R, window: Option<(f64, f64)>) -> Result<AtomicMeasure> {
    let mut atoms = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let row: MeasureRow = row?;
        atoms.push((row.position, Complex64::new(row.mass_re, row.mass_im)));
    }
    let window = match window {
        Some(w) => w,
        None if atoms.is_empty() => return Err(Error::InvalidInput("empty measure needs a window".into())),
        None => (atoms[0].0, atoms[atoms.len() - 1].0),
    };
    AtomicMeasure::new(window, atoms)
}

pub fn write_measure_csv<W: Write>(writer: W, m: &AtomicMeasure) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["position", "mass_re", "mass_im"])?;
    for a in m.atoms() {
        w.serialize((a.position, a.mass.re, a.mass.im))?;
    }
    w.flush()?;
    Ok(())
}

/// `radius,total_variation,log_tv_over_r`; an empty field marks an undefined log.
pub fn write_growth_csv<W: Write>(writer: W, g: &GrowthProfile) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["radius", "total_variation", "log_tv_over_r"])?;
    for s in &g.samples {
        w.serialize((s.radius, s.total_variation, s.log_tv_over_r))?;
    }
    w.flush()?;
    Ok(())
}

/// `sigma,t0,omega0,lhs_re,lhs_im,rhs_re,rhs_im,residual`.
pub fn write_verification_csv<W: Write>(writer: W, rows: &[(TestFunction, PoissonCheck)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "sigma", "t0", "omega0", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual",
    ])?;
    for (f, c) in rows {
        w.serialize((
            f.sigma, f.t0, f.omega0, c.lhs.re, c.lhs.im, c.rhs.re, c.rhs.im, c.residual,
        ))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_periods_csv<W: Write>(writer: W, ap: &AlmostPeriods) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["tau"])?;
    for &t in &ap.periods {
        w.serialize((t,))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_displacement_csv<W: Write>(writer: W, d: &Displacement) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "phi"])?;
    for &(n, phi) in &d.phi {
        w.serialize((n, phi))?;
    }
    w.flush()?;
    Ok(())
}
