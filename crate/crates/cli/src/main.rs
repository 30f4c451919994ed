#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use serde::Serialize;

use qclab::io::{
    read_measure_csv, read_series_json, read_zeros_csv, write_measure_csv, write_periods_csv, write_series_json,
    write_verification_csv, write_zeros_csv,
};
use qclab::{
    almost_periods, comb_measure, default_gaussian_family, density, diffraction_spectrum, find_real_zeros,
    probe_corollary1, probe_lattice_structure, probe_uniqueness, reconstruct_series, round_trip_report, select_height,
    verify_family, AtomicMeasure, Error, ExponentialSum, LatticeOptions, ProbeReport, ReconstructOptions, Result,
    RoundTripOptions, SampledFunction, ToleranceConfig, Triangle, ZeroSet,
};

#[derive(Parser)]
#[command(
    name = "qclab",
    version,
    about = "Zero sets of exponential sums and their pure point spectra"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Series JSON, or a zero set / measure CSV
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file; standard output if absent
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    /// Line height `s` (spectrum, zeros) or reconstruction height `y0`
    #[arg(long, global = true)]
    height: Option<f64>,
    /// Spectral window half-width
    #[arg(long = "gamma-window", global = true)]
    gamma_window: Option<f64>,
    /// Root tolerance; also the atom matching tolerance of the probes
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long = "max-terms", global = true)]
    max_terms: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Real zeros of a series on the window
    Zeros,
    /// Spectrum atoms of the zero comb of a series
    Spectrum,
    /// Series whose zero comb has the given spectrum
    Reconstruct {
        /// Density `D`; the mass at 0 if absent
        #[arg(long)]
        density: Option<f64>,
    },
    /// Zeros, spectrum, reconstruction and zeros again
    Roundtrip,
    /// Both sides of the summation formula over the default Gaussian family
    VerifyPoisson,
    /// Sliding-window density of a zero set
    Density {
        #[arg(long, default_value_t = 10.0)]
        length: f64,
    },
    /// ε-almost periods of the zero comb smoothed by a triangle kernel
    AlmostPeriods {
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long = "kernel-width", default_value_t = 0.4)]
        kernel_width: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Largest shift searched; half the span if absent
        #[arg(long = "max-shift")]
        max_shift: Option<f64>,
    },
    /// |μ − ν|(B(0,R))/R for two measures
    ProbeUniqueness {
        /// Second measure CSV
        #[arg(long)]
        other: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        radii: Vec<f64>,
    },
    /// Period and residue classes of a zero set
    ProbeLattice {
        /// Spectrum CSV, needed when the input is a zero set
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// μ(B(0,R))/R for one measure
    ProbeCorollary1 {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        radii: Vec<f64>,
    },
}

impl Common {
    fn config(&self) -> Result<ToleranceConfig> {
        let mut cfg = ToleranceConfig::default();
        if let Some(t) = self.tol {
            cfg.root_tol = t;
        }
        if let Some(m) = self.max_terms {
            cfg.max_terms = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("--input is required".into()))
    }

    fn window(&self) -> Option<(f64, f64)> {
        self.window.as_ref().map(|w| (w[0], w[1]))
    }

    fn require_window(&self) -> Result<(f64, f64)> {
        self.window()
            .ok_or_else(|| Error::InvalidInput("--window A B is required".into()))
    }

    fn is_series(&self) -> Result<bool> {
        Ok(self.input()?.extension().is_some_and(|e| e == "json"))
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn read_series(c: &Common, cfg: &ToleranceConfig) -> Result<ExponentialSum> {
    read_series_json(open(c.input()?)?, cfg)
}

fn strip_height(q: &ExponentialSum, c: &Common, cfg: &ToleranceConfig) -> Result<f64> {
    match c.height {
        Some(s) => Ok(s),
        None => select_height(q, cfg),
    }
}

fn zeros_of(q: &ExponentialSum, c: &Common, cfg: &ToleranceConfig) -> Result<ZeroSet> {
    let s = strip_height(q, c, cfg)?;
    let w = c.require_window()?;
    info!("searching zeros on {w:?} with strip half-height {s}");
    find_real_zeros(q, w, s, cfg)
}

/// Zero set from a series JSON (solved on the window) or a zero set CSV.
fn load_zeros(c: &Common, cfg: &ToleranceConfig) -> Result<ZeroSet> {
    if c.is_series()? {
        zeros_of(&read_series(c, cfg)?, c, cfg)
    } else {
        read_zeros_csv(open(c.input()?)?, c.window())
    }
}

fn emit(c: &Common, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &c.output {
        Some(p) => {
            let f = File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(f);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

#[derive(Serialize)]
struct AtomRow {
    position: f64,
    mass_re: f64,
    mass_im: f64,
}

fn atom_rows(m: &AtomicMeasure) -> Vec<AtomRow> {
    m.atoms()
        .iter()
        .map(|a| AtomRow {
            position: a.position,
            mass_re: a.mass.re,
            mass_im: a.mass.im,
        })
        .collect()
}

fn report_csv(w: &mut dyn Write, r: &ProbeReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["radius", "value"])?;
    for &row in &r.per_radius {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let cfg = c.config()?;
    match &cli.command {
        Command::Zeros => {
            let zs = zeros_of(&read_series(c, &cfg)?, c, &cfg)?;
            info!("found {} zeros", zs.total_multiplicity());
            emit(c, |w| match c.format {
                Format::Csv => write_zeros_csv(w, &zs),
                Format::Json => json(w, &serde_json::json!({ "window": zs.window(), "zeros": zs.zeros() })),
            })
        }
        Command::Spectrum => {
            let q = read_series(c, &cfg)?;
            let s = strip_height(&q, c, &cfg)?;
            let gamma = c.gamma_window.unwrap_or(5.0);
            let sp = diffraction_spectrum(&q, s, gamma, &cfg)?;
            info!(
                "{} atoms, height {s}, budget {:e}, dropped {:e}",
                sp.measure.len(),
                sp.truncation_budget,
                sp.dropped_mass
            );
            emit(c, |w| match c.format {
                Format::Csv => write_measure_csv(w, &sp.measure),
                Format::Json => json(
                    w,
                    &serde_json::json!({
                        "height": sp.height,
                        "gamma_window": gamma,
                        "truncation_budget": sp.truncation_budget,
                        "dropped_mass": sp.dropped_mass,
                        "atoms": atom_rows(&sp.measure),
                    }),
                ),
            })
        }
        Command::Reconstruct { density } => {
            let gamma = c.gamma_window;
            let mhat = read_measure_csv(open(c.input()?)?, gamma.map(|g| (-g, g)))?;
            let d = density.unwrap_or_else(|| mhat.mass_at(0.0, cfg.freq_merge_tol).re);
            let opts = ReconstructOptions::default();
            let y0 = match c.height {
                Some(y) => y,
                None => qclab::reconstruction::default_height(&mhat, &opts)?,
            };
            let r = reconstruct_series(&mhat, d, y0, &cfg, &opts)?;
            info!(
                "y0 {}, growth exponent {}, leakage {:e}",
                r.y0, r.growth_exponent, r.leakage
            );
            emit(c, |w| write_series_json(w, &r.remapped))
        }
        Command::Roundtrip => {
            let q = read_series(c, &cfg)?;
            let opts = RoundTripOptions {
                height: c.height,
                gamma: c.gamma_window,
                ..Default::default()
            };
            let r = round_trip_report(&q, c.require_window()?, &cfg, &opts)?;
            info!("max displacement {:e}, residual {:e}", r.max_displacement, r.residual);
            emit(c, |w| match c.format {
                Format::Json => json(w, &r),
                Format::Csv => {
                    let mut out = csv::Writer::from_writer(w);
                    out.write_record(["original", "reconstructed"])?;
                    for &p in &r.matched_zero_pairs {
                        out.serialize(p)?;
                    }
                    out.flush()?;
                    Ok(())
                }
            })
        }
        Command::VerifyPoisson => {
            let q = read_series(c, &cfg)?;
            let mu = comb_measure(&zeros_of(&q, c, &cfg)?);
            let s = strip_height(&q, c, &cfg)?;
            let sp = diffraction_spectrum(&q, s, c.gamma_window.unwrap_or(13.0), &cfg)?;
            let family = default_gaussian_family();
            let checks = verify_family(&mu, &sp.measure, &family, sp.truncation_budget)?;
            let worst = checks.iter().map(|k| k.residual).fold(0.0, f64::max);
            info!("{} test functions, worst residual {worst:e}", checks.len());
            let rows: Vec<_> = family.into_iter().zip(checks).collect();
            emit(c, |w| match c.format {
                Format::Csv => write_verification_csv(w, &rows),
                Format::Json => json(w, &rows),
            })
        }
        Command::Density { length } => {
            let zs = load_zeros(c, &cfg)?;
            let d = density(&zs, *length)?;
            emit(c, |w| {
                let row = serde_json::json!({
                    "density": d.density, "uncertainty": d.uncertainty, "min": d.min, "max": d.max,
                });
                match c.format {
                    Format::Json => json(w, &row),
                    Format::Csv => {
                        let mut out = csv::Writer::from_writer(w);
                        out.write_record(["density", "uncertainty", "min", "max"])?;
                        out.serialize((d.density, d.uncertainty, d.min, d.max))?;
                        out.flush()?;
                        Ok(())
                    }
                }
            })
        }
        Command::AlmostPeriods {
            eps,
            kernel_width,
            step,
            max_shift,
        } => {
            let zs = load_zeros(c, &cfg)?;
            let mu = comb_measure(&zs);
            let kernel = Triangle {
                half_width: *kernel_width,
            };
            let (a, b) = zs.window();
            let (lo, hi) = (a + kernel_width, b - kernel_width);
            if !(hi > lo) || !(*step > 0.0) {
                return Err(Error::WindowTooSmall(format!(
                    "window {:?} vs kernel {kernel_width}",
                    zs.window()
                )));
            }
            let count = ((hi - lo) / step).floor() as usize + 1;
            debug!("sampling {count} points");
            let g = SampledFunction::convolution(&mu, &kernel, lo, *step, count)?;
            let reach = max_shift.unwrap_or(0.5 * g.span());
            let ap = almost_periods(&g, *eps, (0.0, reach), *step)?;
            info!("{} almost periods, max gap {}", ap.periods.len(), ap.max_gap);
            emit(c, |w| match c.format {
                Format::Csv => write_periods_csv(w, &ap),
                Format::Json => json(w, &ap),
            })
        }
        Command::ProbeUniqueness { other, radii } => {
            let mu = read_measure_csv(open(c.input()?)?, c.window())?;
            let nu = read_measure_csv(open(other)?, c.window())?;
            let r = probe_uniqueness(&mu, &nu, radii, c.tol.unwrap_or(1e-9))?;
            emit(c, |w| match c.format {
                Format::Csv => report_csv(w, &r),
                Format::Json => json(w, &r),
            })
        }
        Command::ProbeCorollary1 { radii } => {
            let mu = read_measure_csv(open(c.input()?)?, c.window())?;
            let r = probe_corollary1(&mu, radii)?;
            emit(c, |w| match c.format {
                Format::Csv => report_csv(w, &r),
                Format::Json => json(w, &r),
            })
        }
        Command::ProbeLattice { spectrum } => {
            let (zs, mhat) = if c.is_series()? {
                let q = read_series(c, &cfg)?;
                let s = strip_height(&q, c, &cfg)?;
                let gamma = c.gamma_window.unwrap_or(5.0);
                (
                    zeros_of(&q, c, &cfg)?,
                    diffraction_spectrum(&q, s, gamma, &cfg)?.measure,
                )
            } else {
                let path = spectrum
                    .as_deref()
                    .ok_or_else(|| Error::InvalidInput("--spectrum is required with a zero set input".into()))?;
                let gamma = c.gamma_window.map(|g| (-g, g));
                (load_zeros(c, &cfg)?, read_measure_csv(open(path)?, gamma)?)
            };
            let p = probe_lattice_structure(&zs, &mhat, &cfg, &LatticeOptions::default())?;
            info!(
                "period {}, {} classes, width {:e}",
                p.best.period,
                p.best.residues.len(),
                p.best.width
            );
            emit(c, |w| match c.format {
                Format::Json => json(w, &p),
                Format::Csv => {
                    let mut out = csv::Writer::from_writer(w);
                    out.write_record(["period", "width"])?;
                    for &row in &p.report.per_radius {
                        out.serialize(row)?;
                    }
                    out.flush()?;
                    Ok(())
                }
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QCLAB_LOG", "error")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qclab: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
