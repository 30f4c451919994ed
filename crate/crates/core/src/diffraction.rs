//! Pure point spectrum of the zero-counting comb of an exponential sum.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::wiener::{ExponentialSum, Side};
use crate::zeros::find_real_zeros;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const HEIGHT_GRID: [f64; 9] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Smallest height on the doubling grid `1/4, 1/2, …, 64` at which both edge
/// remainders have Wiener norm below 1/2.
pub fn select_height(q: &ExponentialSum, cfg: &ToleranceConfig) -> Result<f64> {
    cfg.validate()?;
    if q.len() < 2 {
        return Err(Error::NoHeightFound(64.0));
    }
    HEIGHT_GRID
        .iter()
        .copied()
        .find(|&s| q.edge_remainder_norm(s, Side::Upper) < 0.5 && q.edge_remainder_norm(s, Side::Lower) < 0.5)
        .ok_or(Error::NoHeightFound(64.0))
}

/// A computed spectrum together with its error accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Atoms `b_γ` on `(−Γ, Γ)`.
    pub measure: AtomicMeasure,
    pub height: f64,
    /// Largest per-atom error bound (series truncation plus roundoff, both
    /// amplified by `e^{2π|γ|s}`).
    pub truncation_budget: f64,
    /// Total modulus of atoms dropped as below resolution.
    pub dropped_mass: f64,
}

impl Spectrum {
    /// The mass at 0, i.e. the density `κ′ − κ`.
    pub fn b0(&self) -> f64 {
        self.measure.mass_at(0.0, 0.0).re
    }
}

/// Atoms `b_γ`, `|γ| < Γ`, of the Fourier transform of the zero comb of `q`.
///
/// Each side line `Im z = ±s` gives `Q′/Q = 2πi·edge + d/dx log(1 + H)`; with
/// `L_γ` the coefficients of `log(1 + H)` on that line, `b_γ = −|γ|·L_γ·e^{2π|γ|s}`
/// (upper line for `γ > 0`, lower line for `γ < 0`) and `b_0 = κ′ − κ`.
pub fn diffraction_spectrum(q: &ExponentialSum, s: f64, gamma: f64, cfg: &ToleranceConfig) -> Result<Spectrum> {
    cfg.validate()?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("height must be positive, got {s}")));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "spectral window must be positive, got {gamma}"
        )));
    }
    if q.is_empty() {
        return Err(Error::EmptySeries);
    }
    // Factorization first: it is cheap and validates s.
    let sides = [Side::Upper, Side::Lower];
    for side in sides {
        q.edge_factorization(s, side)?;
    }
    verify_real_zeros(q, s, cfg)?;

    let amplify = (TWO_PI * gamma * s).exp();
    let mut series_cfg = cfg.without_pruning();
    series_cfg.series_tail_target =
        (cfg.prune_threshold / (amplify * gamma.max(1.0)) * 1e-2).min(cfg.series_tail_target);

    let per_side: Vec<Result<Vec<RawAtom>>> = sides
        .par_iter()
        .map(|&side| side_atoms(q, s, side, gamma, cfg, &series_cfg))
        .collect();

    let d = q.spectral_width();
    let mut atoms: Vec<RawAtom> = Vec::new();
    if d > 0.0 {
        atoms.push(RawAtom {
            gamma: 0.0,
            mass: Complex64::new(d, 0.0),
            tail_error: 0.0,
            error: 0.0,
        });
    }
    for side in per_side {
        atoms.extend(side?);
    }
    let tail_budget = atoms.iter().map(|a| a.tail_error).fold(0.0, f64::max);
    if tail_budget > cfg.prune_threshold {
        return Err(Error::TruncationBudgetExceeded { budget: tail_budget });
    }
    atoms.retain(|a| a.gamma.abs() < gamma);
    atoms.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));

    let mut kept = Vec::with_capacity(atoms.len());
    let mut dropped_mass = 0.0;
    let mut budget: f64 = 0.0;
    for a in atoms {
        let resolution = cfg.prune_threshold.max(a.error);
        budget = budget.max(a.error);
        if a.mass.norm() <= resolution {
            dropped_mass += a.mass.norm();
        } else {
            kept.push((a.gamma, a.mass));
        }
    }
    Ok(Spectrum {
        measure: AtomicMeasure::new((-gamma, gamma), kept)?,
        height: s,
        truncation_budget: budget,
        dropped_mass,
    })
}

struct RawAtom {
    gamma: f64,
    mass: Complex64,
    tail_error: f64,
    error: f64,
}

fn side_atoms(
    q: &ExponentialSum,
    s: f64,
    side: Side,
    band: f64,
    cfg: &ToleranceConfig,
    series_cfg: &ToleranceConfig,
) -> Result<Vec<RawAtom>> {
    let (_, h) = q.edge_factorization(s, side)?;
    if h.is_empty() {
        return Ok(Vec::new());
    }
    let budget_error = |e: Error| match e {
        Error::TooManyTerms { .. } => Error::TruncationBudgetExceeded { budget: f64::INFINITY },
        other => other,
    };
    let (log, tail) = h.log1p_sum_one_sided(band, series_cfg).map_err(budget_error)?;
    // Majorant −log(1 − |H|): per-frequency bound on the moduli summed into L_γ.
    let negated_moduli = ExponentialSum::normalize(
        h.terms()
            .iter()
            .map(|t| (t.omega, Complex64::new(-t.coeff.norm(), 0.0))),
        series_cfg,
    )?;
    let (majorant, _) = negated_moduli
        .log1p_sum_one_sided(band, series_cfg)
        .map_err(budget_error)?;
    let nearest = h.terms().iter().map(|t| t.omega.abs()).fold(f64::INFINITY, f64::min);
    let depth = (band / nearest).floor() + 2.0;
    let roundoff = 4.0 * f64::EPSILON * depth;

    Ok(log
        .terms()
        .iter()
        .map(|t| {
            let g = t.omega.abs();
            let amp = g * (TWO_PI * g * s).exp();
            let m = majorant.coefficient_at(t.omega, cfg.freq_merge_tol).norm();
            RawAtom {
                gamma: t.omega,
                mass: -t.coeff * amp,
                tail_error: tail * amp,
                error: (tail + roundoff * m) * amp,
            }
        })
        .collect())
}

/// All zeros of `q` in the strip `|Im z| < s` over a sample window must be real.
fn verify_real_zeros(q: &ExponentialSum, s: f64, cfg: &ToleranceConfig) -> Result<()> {
    if q.len() < 2 {
        return Ok(());
    }
    let w = (8.0 / q.spectral_width()).clamp(2.0, 64.0);
    find_real_zeros(q, (-w, w), s, cfg).map(|_| ())
}

/// `Σ_{0<γ<1} |b_γ|/γ` over the atoms present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntCondition {
    pub value: f64,
    /// Positions in `(0, freq_merge_tol]`, left out of the sum.
    pub excluded: Vec<f64>,
}

pub fn check_int_condition(mhat: &AtomicMeasure, cfg: &ToleranceConfig) -> Result<IntCondition> {
    let (lo, hi) = mhat.window();
    if lo > 0.0 || hi < 1.0 {
        return Err(Error::WindowTooSmall(format!(
            "window {:?} does not contain (0, 1)",
            mhat.window()
        )));
    }
    let mut value = 0.0;
    let mut excluded = Vec::new();
    for a in mhat.atoms_in_open(0.0, 1.0) {
        if a.position <= cfg.freq_merge_tol {
            excluded.push(a.position);
        } else {
            value += a.mass.norm() / a.position;
        }
    }
    Ok(IntCondition { value, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub radius: f64,
    pub total_variation: f64,
    /// `log(total_variation)/radius`; `None` when the ball carries no mass.
    pub log_tv_over_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub samples: Vec<GrowthSample>,
}

impl GrowthProfile {
    /// Largest observed `log_tv_over_r`.
    pub fn max_slope(&self) -> Option<f64> {
        self.samples.iter().filter_map(|s| s.log_tv_over_r).reduce(f64::max)
    }
}

/// `|μ̂|(B(0, r))` for each radius.
pub fn growth_profile(mhat: &AtomicMeasure, radii: &[f64]) -> Result<GrowthProfile> {
    let (lo, hi) = mhat.window();
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("radii must increase strictly".into()));
    }
    let samples = radii
        .iter()
        .map(|&r| {
            if !(r > 0.0) || -r < lo || r > hi {
                return Err(Error::WindowTooSmall(format!(
                    "ball of radius {r} does not fit in {:?}",
                    mhat.window()
                )));
            }
            let tv: f64 = mhat.atoms_in_open(-r, r).iter().map(|a| a.mass.norm()).sum();
            Ok(GrowthSample {
                radius: r,
                total_variation: tv,
                log_tv_over_r: (tv > 0.0).then(|| tv.ln() / r),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GrowthProfile { samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightIndependence {
    /// Largest spread of `b_γ` across heights over all atom positions.
    pub spread: f64,
    /// Sum of the largest two per-height budgets.
    pub budget: f64,
}

/// Compare spectra computed on several line heights.
pub fn height_independence_report(
    q: &ExponentialSum,
    heights: &[f64],
    gamma: f64,
    cfg: &ToleranceConfig,
) -> Result<HeightIndependence> {
    let spectra = heights
        .par_iter()
        .map(|&s| diffraction_spectrum(q, s, gamma, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut positions: Vec<f64> = spectra
        .iter()
        .flat_map(|sp| sp.measure.atoms().iter().map(|a| a.position))
        .collect();
    positions.sort_by(f64::total_cmp);
    positions.dedup_by(|a, b| (*a - *b).abs() <= cfg.freq_merge_tol);
    let mut spread: f64 = 0.0;
    for &x in &positions {
        let values: Vec<Complex64> = spectra
            .iter()
            .map(|sp| sp.measure.mass_at(x, cfg.freq_merge_tol))
            .collect();
        for (i, a) in values.iter().enumerate() {
            for b in &values[i + 1..] {
                spread = spread.max((a - b).norm());
            }
        }
    }
    let mut budgets: Vec<f64> = spectra
        .iter()
        .map(|sp| sp.truncation_budget.max(cfg.prune_threshold))
        .collect();
    budgets.sort_by(|a, b| b.total_cmp(a));
    Ok(HeightIndependence {
        spread,
        budget: budgets.iter().take(2).sum(),
    })
}
