//! Rebuilding an exponential sum from a zero set or its spectrum.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::diffraction::{check_int_condition, diffraction_spectrum, growth_profile, select_height};
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::wiener::ExponentialSum;
use crate::zeros::{find_real_zeros, SignedZeros, ZeroSet};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const CHUNK: usize = 4096;

/// A truncated infinite sum or product with a rough estimate of what was left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partial {
    pub value: Complex64,
    pub tail: f64,
}

fn signed_with_pairs(zs: &ZeroSet, pair_count: usize) -> Result<SignedZeros> {
    let signed = zs.signed()?;
    if signed.pairs_available() < pair_count {
        return Err(Error::InsufficientZeros {
            needed: pair_count,
            have: signed.pairs_available(),
        });
    }
    Ok(signed)
}

fn pair(signed: &SignedZeros, n: usize) -> (f64, f64) {
    let n = n as i64;
    (signed.get(n).unwrap(), signed.get(-n).unwrap())
}

/// `Σ_{n=1}^{N} term(n)` in fixed chunks, combined in order.
fn chunked_sum(n: usize, term: impl Fn(usize) -> Complex64 + Sync) -> Complex64 {
    let chunks: Vec<Complex64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK + 1..=((c + 1) * CHUNK).min(n)).map(&term).sum())
        .collect();
    chunks.into_iter().sum()
}

/// `(1 − z/a_0)·Π_{n=1}^{N} (1 − z/a_n)(1 − z/a_{−n})` with the symmetric
/// numbering of [`ZeroSet::signed`].
pub fn canonical_product_eval(zs: &ZeroSet, z: Complex64, pair_count: usize) -> Result<Partial> {
    if zs.zeros().iter().any(|&(x, _)| x == 0.0) {
        return Err(Error::ZeroAtOrigin);
    }
    let signed = signed_with_pairs(zs, pair_count)?;
    let a0 = signed.get(0).unwrap();
    let factor = |n: usize| {
        let (a, b) = pair(&signed, n);
        (1.0 - z / a) * (1.0 - z / b)
    };
    // Products of unit-size factors, chunked like the sums.
    let chunks: Vec<Complex64> = (0..pair_count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            (c * CHUNK + 1..=((c + 1) * CHUNK).min(pair_count))
                .map(&factor)
                .product()
        })
        .collect();
    let value = chunks.into_iter().fold(1.0 - z / a0, |acc, p| acc * p);
    let tail = if pair_count == 0 {
        f64::INFINITY
    } else {
        let (a, b) = pair(&signed, pair_count);
        pair_count as f64 * ((z / a + z / b).norm() + (z * z / (a * b)).norm()) * value.norm()
    };
    Ok(Partial { value, tail })
}

/// `1/(z − a_0) + Σ_{n=1}^{N} [1/(z − a_n) + 1/(z − a_{−n})]`.
pub fn log_derivative_partial_fractions(zs: &ZeroSet, z: Complex64, pair_count: usize) -> Result<Partial> {
    let signed = signed_with_pairs(zs, pair_count)?;
    let lo = signed.min_index().max(-(pair_count as i64));
    let hi = signed.max_index().min(pair_count as i64);
    if (lo..=hi).any(|n| (z - signed.get(n).unwrap()).norm() == 0.0) {
        return Err(Error::EvaluationAtZero);
    }
    let term = |n: usize| {
        let (a, b) = pair(&signed, n);
        1.0 / (z - a) + 1.0 / (z - b)
    };
    let value = 1.0 / (z - signed.get(0).unwrap()) + chunked_sum(pair_count, term);
    let tail = if pair_count == 0 {
        f64::INFINITY
    } else {
        pair_count as f64 * term(pair_count).norm()
    };
    Ok(Partial { value, tail })
}

/// `1/a_0 + Σ_{n=1}^{N} (1/a_n + 1/a_{−n})`, the partial reciprocal sum whose
/// limit is the linear exponent separating the canonical product from the
/// genus-one product.
pub fn partial_reciprocal_sum(zs: &ZeroSet, pair_count: usize) -> Result<f64> {
    if zs.zeros().iter().any(|&(x, _)| x == 0.0) {
        return Err(Error::ZeroAtOrigin);
    }
    let signed = signed_with_pairs(zs, pair_count)?;
    let rest = chunked_sum(pair_count, |n| {
        let (a, b) = pair(&signed, n);
        Complex64::new(1.0 / a + 1.0 / b, 0.0)
    });
    Ok(1.0 / signed.get(0).unwrap() + rest.re)
}

/// `−2πi·Σ_{γ>0} b_γ e^{2πiγz} − πiD` over the atoms present.
///
/// The tail estimate extrapolates the outermost unit shell of the window
/// geometrically.
pub fn log_derivative_from_spectrum(mhat: &AtomicMeasure, d: f64, z: Complex64) -> Result<Partial> {
    if !(z.im > 0.0) {
        return Err(Error::NonPositiveImaginaryPart);
    }
    let gamma = mhat.window().1;
    let positive = mhat.atoms_in_open(0.0, f64::INFINITY);
    let sum: Complex64 = positive
        .iter()
        .map(|a| a.mass * crate::wiener::unit_wave(a.position, z))
        .sum();
    let value = Complex64::new(0.0, -TWO_PI) * sum - Complex64::new(0.0, std::f64::consts::PI * d);
    let shell: f64 = mhat
        .atoms_in_open((gamma - 1.0).max(0.0), f64::INFINITY)
        .iter()
        .map(|a| a.mass.norm())
        .sum();
    let q = (-TWO_PI * z.im).exp();
    let tail = TWO_PI * shell * (-TWO_PI * gamma * z.im).exp() / (1.0 - q);
    Ok(Partial { value, tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    /// Largest accepted `Σ_{0<γ<1} |b_γ|/γ`.
    pub int_cap: f64,
    /// Number of radii in the growth profile used for the height check.
    pub growth_radii: usize,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            int_cap: 1e6,
            growth_radii: 32,
        }
    }
}

/// Output of [`reconstruct_series`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// `S(x) = f(x + iy0)·e^{iπDx}/f(iy0)`, frequencies in `[0, D]`.
    pub line_series: ExponentialSum,
    /// `f(z)/f(iy0)` as an exponential sum in `z`.
    pub remapped: ExponentialSum,
    pub y0: f64,
    /// `|b_0 − D|`.
    pub density_mismatch: f64,
    /// Wiener norm of the part of `S` computed beyond frequency `D`; zero in
    /// exact arithmetic.
    pub leakage: f64,
    /// Observed growth exponent: max of `log|μ̂|(B(0,r))/(2πr)`.
    pub growth_exponent: f64,
}

/// Evenly spaced radii on `[1, Γ]`; below radius 1 the ratio only reflects `b_0`.
fn radii(gamma: f64, count: usize) -> Vec<f64> {
    if gamma <= 1.0 {
        return vec![gamma];
    }
    let count = count.max(2);
    (0..count)
        .map(|k| 1.0 + (gamma - 1.0) * k as f64 / (count - 1) as f64)
        .collect()
}

/// Observed growth exponent of a spectrum over its window.
pub fn growth_exponent(mhat: &AtomicMeasure, count: usize) -> Result<f64> {
    let profile = growth_profile(mhat, &radii(mhat.window().1, count))?;
    Ok(profile.max_slope().unwrap_or(0.0).max(0.0) / TWO_PI)
}

/// Default line height: twice the largest observed `log_tv_over_r`, at least 1.
pub fn default_height(mhat: &AtomicMeasure, opts: &ReconstructOptions) -> Result<f64> {
    let profile = growth_profile(mhat, &radii(mhat.window().1, opts.growth_radii))?;
    Ok((2.0 * profile.max_slope().unwrap_or(0.0)).max(1.0))
}

/// The series `f`, normalized by `f(iy0)`, whose zero comb has spectrum `mhat`.
///
/// `G(x) = −Σ_{γ>0} b_γ(e^{2πiγx} − 1)e^{−2πγy0}/γ` and `S = exp G`, computed
/// only up to frequency `D` (plus a margin) since `S` has no spectrum beyond
/// `D`. Each term `(ω, β)` of `S` becomes `(ω − D/2, β·e^{2π(ω − D/2)y0})`.
pub fn reconstruct_series(
    mhat: &AtomicMeasure,
    d: f64,
    y0: f64,
    cfg: &ToleranceConfig,
    opts: &ReconstructOptions,
) -> Result<Reconstruction> {
    cfg.validate()?;
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidInput(format!("density must be positive, got {d}")));
    }
    let gamma = mhat.window().1;
    if !(gamma > d) {
        return Err(Error::InvalidInput(format!(
            "spectral window {gamma} must extend beyond the density {d}"
        )));
    }
    let k = growth_exponent(mhat, opts.growth_radii)?;
    if !(y0 > 2.0 * k) || !y0.is_finite() {
        return Err(Error::HeightTooLow { y0, slope: k });
    }
    let int = check_int_condition(mhat, cfg)?;
    if !(int.value <= opts.int_cap) {
        return Err(Error::IntConditionDiverging {
            value: int.value,
            cap: opts.int_cap,
        });
    }

    let margin = (0.5 * (gamma - d)).min(0.25);
    let band = d + margin;
    let mut constant = Complex64::new(0.0, 0.0);
    let mut raw = Vec::new();
    for a in mhat.atoms_in_open(cfg.freq_merge_tol, band + cfg.freq_merge_tol) {
        let c = -a.mass * (-TWO_PI * a.position * y0).exp() / a.position;
        raw.push((a.position, c));
        constant -= c;
    }
    raw.push((0.0, constant));
    let g = ExponentialSum::normalize(raw, &cfg.without_pruning())?;
    // Coefficients near D are tiny on this line; they must survive until the remap.
    let mut series_cfg = cfg.without_pruning();
    series_cfg.series_tail_target = cfg.series_tail_target * (-TWO_PI * band * y0).exp();
    let (s, _) = g.exp_sum_one_sided(band, &series_cfg)?;
    let cut = d + 1e-6 * d.max(1.0);
    let leakage = s.band_limit(cut, f64::INFINITY).wiener_norm();
    let line_series = s.band_limit(f64::NEG_INFINITY, cut);
    let remapped = ExponentialSum::normalize(
        line_series.terms().iter().map(|t| {
            let nu = t.omega - 0.5 * d;
            (nu, t.coeff * (TWO_PI * nu * y0).exp())
        }),
        &cfg.without_pruning(),
    )?;
    let largest = remapped.terms().iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
    let remapped = ExponentialSum::normalize(
        remapped
            .terms()
            .iter()
            .filter(|t| t.coeff.norm() >= cfg.prune_threshold * largest)
            .map(|t| (t.omega, t.coeff)),
        &cfg.without_pruning(),
    )?;
    Ok(Reconstruction {
        line_series,
        remapped,
        y0,
        density_mismatch: (mhat.mass_at(0.0, cfg.freq_merge_tol).re - d).abs(),
        leakage,
        growth_exponent: k,
    })
}

/// Undo the `f(iy0)` normalization using the canonical product of `zs`.
pub fn scale_by_product(r: &Reconstruction, zs: &ZeroSet, pair_count: usize) -> Result<ExponentialSum> {
    let f_iy0 = canonical_product_eval(zs, Complex64::new(0.0, r.y0), pair_count)?;
    Ok(r.remapped.scale(f_iy0.value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub matched_zero_pairs: Vec<(f64, f64)>,
    pub max_displacement: f64,
    /// `λ = α + iβ` with `Q = C·e^{λz}·f`.
    pub ratio_log_slope: Complex64,
    /// `max |Q′/Q − f′/f − λ|` over sample points above the axis.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RoundTripOptions {
    /// Line height for the spectrum; chosen by [`select_height`] if absent.
    pub height: Option<f64>,
    /// Spectral window `Γ`; `D + 1` if absent.
    pub gamma: Option<f64>,
    /// Reconstruction height; [`default_height`] if absent.
    pub y0: Option<f64>,
    pub reconstruct: ReconstructOptions,
}

/// Zeros → spectrum → reconstructed series → zeros, with diagnostics.
pub fn round_trip_report(
    q: &ExponentialSum,
    window: (f64, f64),
    cfg: &ToleranceConfig,
    opts: &RoundTripOptions,
) -> Result<RoundTripReport> {
    let s = match opts.height {
        Some(s) => s,
        None => select_height(q, cfg)?,
    };
    let d = q.spectral_width();
    let gamma = opts.gamma.unwrap_or(d + 1.0);
    let original = find_real_zeros(q, window, s, cfg)?;
    let spectrum = diffraction_spectrum(q, s, gamma, cfg)?;
    let y0 = match opts.y0 {
        Some(y) => y,
        None => default_height(&spectrum.measure, &opts.reconstruct)?,
    };
    let rec = reconstruct_series(&spectrum.measure, d, y0, cfg, &opts.reconstruct)?;
    let f = &rec.remapped;

    // Search a slightly wider window so zeros on the edges are not lost.
    let pad = 0.25 / d;
    let f_height = select_height(f, cfg).unwrap_or(s);
    let rebuilt = find_real_zeros(f, (window.0 - pad, window.1 + pad), f_height, cfg)?;
    let matched_zero_pairs = match_in_order(&original.expanded(), &rebuilt.expanded())?;
    let max_displacement = matched_zero_pairs
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let xm = 0.5 * (window.0 + window.1);
    let h = 0.5 * s.min(1.0);
    let (z1, z2) = (Complex64::new(xm, h), Complex64::new(xm, 2.0 * h));
    let ratio = |z: Complex64| q.evaluate(z) / f.evaluate(z);
    let lambda = (ratio(z2) / ratio(z1)).ln() / (z2 - z1);

    let samples = 64;
    let residual = (0..=samples)
        .map(|j| {
            let x = window.0 + (window.1 - window.0) * j as f64 / samples as f64;
            let z = Complex64::new(x, h);
            let (qv, qd) = q.evaluate_with_derivative(z);
            let (fv, fd) = f.evaluate_with_derivative(z);
            (qd / qv - fd / fv - lambda).norm()
        })
        .fold(0.0, f64::max);

    Ok(RoundTripReport {
        matched_zero_pairs,
        max_displacement,
        ratio_log_slope: lambda,
        residual,
    })
}

/// Pair `original[i]` with `rebuilt[k + i]`, `k` aligning the first zeros.
fn match_in_order(original: &[f64], rebuilt: &[f64]) -> Result<Vec<(f64, f64)>> {
    let Some(&first) = original.first() else {
        return Ok(Vec::new());
    };
    let k = rebuilt
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - first).abs().total_cmp(&(b.1 - first).abs()))
        .map(|(i, _)| i)
        .ok_or(Error::CountMismatch(original.len(), 0))?;
    if rebuilt.len() < k + original.len() {
        return Err(Error::CountMismatch(original.len(), rebuilt.len() - k));
    }
    Ok(original.iter().zip(&rebuilt[k..]).map(|(&a, &b)| (a, b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn i() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    fn lattice(offset: f64, n: i64) -> ZeroSet {
        ZeroSet::from_positions((-(n as f64) - 1.0, n as f64 + 1.0), (-n..=n).map(|k| k as f64 + offset)).unwrap()
    }

    fn comb_spectrum(beta: f64, gamma: f64) -> AtomicMeasure {
        let q = ExponentialSum::comb_generator(1.0, beta);
        diffraction_spectrum(&q, 0.5, gamma, &cfg()).unwrap().measure
    }

    #[test]
    fn cosine_product() {
        let zs = lattice(0.5, 20_000);
        let p = canonical_product_eval(&zs, Complex64::new(1.0, 0.0), 10_000).unwrap();
        assert!((p.value + 1.0).norm() < 1e-3, "{p:?}");
        let p = canonical_product_eval(&zs, Complex64::new(0.0, 0.0), 10_000).unwrap();
        assert_eq!(p.value, Complex64::new(1.0, 0.0));
        let p = canonical_product_eval(&zs, Complex64::new(0.5, 0.0), 100).unwrap();
        assert_eq!(p.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn product_errors() {
        assert!(matches!(
            canonical_product_eval(&lattice(0.0, 5), i(), 2),
            Err(Error::ZeroAtOrigin)
        ));
        assert!(matches!(
            canonical_product_eval(&lattice(0.5, 5), i(), 10),
            Err(Error::InsufficientZeros { .. })
        ));
    }

    #[test]
    fn cotangent_and_tangent_partial_fractions() {
        let n = 200_000;
        let v = log_derivative_partial_fractions(&lattice(0.0, n + 1), i(), n as usize).unwrap();
        let exact = Complex64::new(0.0, -PI / PI.tanh());
        assert!((v.value - exact).norm() < 2e-5, "{v:?}");
        assert!((v.value - exact).norm() <= 2.0 * v.tail);
        let v = log_derivative_partial_fractions(&lattice(0.5, n + 1), i(), n as usize).unwrap();
        let exact = Complex64::new(0.0, -PI * PI.tanh());
        assert!((v.value - exact).norm() < 2e-5, "{v:?}");
        let zs = lattice(0.25, 100);
        let z = Complex64::new(0.3, 0.7);
        let a = log_derivative_partial_fractions(&zs, z, 50).unwrap().value;
        let b = log_derivative_partial_fractions(&zs, z.conj(), 50).unwrap().value;
        assert!((a.conj() - b).norm() < 1e-14);
        assert!(matches!(
            log_derivative_partial_fractions(&zs, Complex64::new(0.25, 0.0), 50),
            Err(Error::EvaluationAtZero)
        ));
    }

    #[test]
    fn log_derivative_of_product_matches_partial_fractions() {
        let zs = lattice(0.5, 10_001);
        let z = Complex64::new(0.3, 1.2);
        let h = 1e-5;
        let lp = |z: Complex64| canonical_product_eval(&zs, z, 10_000).unwrap().value.ln();
        let numeric = (lp(z + h) - lp(z - h)) / (2.0 * h);
        let exact = log_derivative_partial_fractions(&zs, z, 10_000).unwrap().value;
        assert!((numeric - exact).norm() / exact.norm() < 1e-5);
    }

    #[test]
    fn spectrum_side_of_the_identity() {
        let m = comb_spectrum(0.0, 12.0);
        let v = log_derivative_from_spectrum(&m, 1.0, i()).unwrap();
        let q = (-TWO_PI).exp();
        let exact = Complex64::new(0.0, -PI - TWO_PI * q / (1.0 - q));
        assert!((v.value - exact).norm() < 1e-12);
        assert!((v.value - Complex64::new(0.0, -3.153348)).norm() < 1e-6);
        let pf = log_derivative_partial_fractions(&lattice(0.0, 100_001), i(), 100_000).unwrap();
        assert!((pf.value - v.value).norm() < 1e-4);
        let empty = AtomicMeasure::empty((-3.0, 3.0));
        let v = log_derivative_from_spectrum(&empty, 2.0, i()).unwrap();
        assert_eq!(v.value, Complex64::new(0.0, -2.0 * PI));
        assert!(matches!(
            log_derivative_from_spectrum(&m, 1.0, Complex64::new(0.0, 0.0)),
            Err(Error::NonPositiveImaginaryPart)
        ));
    }

    #[test]
    fn identity_holds_above_the_axis() {
        let m = comb_spectrum(0.25, 40.0);
        let zs = lattice(0.25, 100_001);
        for k in 0..20 {
            let z = Complex64::new(-2.0 + 0.2 * k as f64, 1.0 + 0.1 * k as f64);
            let a = log_derivative_from_spectrum(&m, 1.0, z).unwrap();
            let b = log_derivative_partial_fractions(&zs, z, 100_000).unwrap();
            assert!((a.value - b.value).norm() <= a.tail + 2.0 * b.tail + 1e-10, "{z}");
        }
    }

    fn real_zeros(f: &ExponentialSum, window: (f64, f64)) -> Vec<f64> {
        let s = select_height(f, &cfg()).unwrap();
        find_real_zeros(f, window, s, &cfg()).unwrap().expanded()
    }

    #[test]
    fn comb_round_trip_by_hand() {
        let m = comb_spectrum(0.0, 3.0);
        let r = reconstruct_series(&m, 1.0, 1.0, &cfg(), &ReconstructOptions::default()).unwrap();
        assert_eq!(r.line_series.len(), 2);
        let zeros = real_zeros(&r.remapped, (-10.5, 10.5));
        assert_eq!(zeros.len(), 21);
        for (k, x) in (-10..=10).zip(zeros) {
            assert!((x - k as f64).abs() < 1e-5);
        }
        assert!(r.density_mismatch < 1e-12);
    }

    #[test]
    fn shifted_comb_round_trip() {
        let beta = 0.3;
        let m = comb_spectrum(beta, 3.0);
        let r = reconstruct_series(&m, 1.0, 1.0, &cfg(), &ReconstructOptions::default()).unwrap();
        let zeros = real_zeros(&r.remapped, (-10.0, 10.0));
        assert_eq!(zeros.len(), 20);
        for (k, x) in (-10..10).zip(zeros) {
            assert!((x - (k as f64 + beta)).abs() < 1e-5);
        }
    }

    #[test]
    fn empty_positive_spectrum_gives_pure_exponential() {
        let m = AtomicMeasure::new((-3.0, 3.0), vec![(0.0, Complex64::new(2.0, 0.0))]).unwrap();
        let r = reconstruct_series(&m, 2.0, 1.0, &cfg(), &ReconstructOptions::default()).unwrap();
        assert_eq!(r.line_series.len(), 1);
        assert_eq!(r.line_series.terms()[0].omega, 0.0);
        assert_eq!(r.remapped.len(), 1);
        assert!((r.remapped.terms()[0].omega + 1.0).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_preconditions() {
        let m = comb_spectrum(0.0, 3.0);
        assert!(matches!(
            reconstruct_series(&m, 1.0, 0.05, &cfg(), &ReconstructOptions::default()),
            Err(Error::HeightTooLow { .. })
        ));
        let q = ExponentialSum::comb_generator(0.4, 0.0);
        let m = diffraction_spectrum(&q, 1.0, 3.0, &cfg()).unwrap().measure;
        let opts = ReconstructOptions {
            int_cap: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            reconstruct_series(&m, 0.4, 2.0, &cfg(), &opts),
            Err(Error::IntConditionDiverging { .. })
        ));
    }

    #[test]
    fn product_normalization_restores_value() {
        let m = comb_spectrum(0.5, 3.0);
        let r = reconstruct_series(&m, 1.0, 1.0, &cfg(), &ReconstructOptions::default()).unwrap();
        let zs = lattice(0.5, 20_001);
        let f = scale_by_product(&r, &zs, 20_000).unwrap();
        // The canonical product over Z + 1/2 is cos πz.
        let z = Complex64::new(0.2, 0.3);
        let expected = (PI * z).cos();
        assert!((f.evaluate(z) - expected).norm() < 1e-3 * expected.norm());
    }

    #[test]
    fn round_trip_reports() {
        let q = ExponentialSum::comb_generator(1.0, 0.0);
        let r = round_trip_report(&q, (-10.0, 10.0), &cfg(), &RoundTripOptions::default()).unwrap();
        assert_eq!(r.matched_zero_pairs.len(), 21);
        assert!(r.max_displacement < 1e-5, "{r:?}");
        assert!(r.ratio_log_slope.re.abs() < 1e-4, "{r:?}");
        let sqrt2 = ExponentialSum::comb_generator(2f64.sqrt(), 0.0);
        let q = q.mul(&sqrt2, &cfg()).unwrap();
        let r = round_trip_report(&q, (-10.0, 10.0), &cfg(), &RoundTripOptions::default()).unwrap();
        assert!(r.max_displacement < 1e-4, "{r:?}");
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn identical_lists_match_exactly() {
        let xs = [1.0, 2.0, 3.5];
        let pairs = match_in_order(&xs, &xs).unwrap();
        assert!(pairs.iter().all(|(a, b)| a == b));
        assert!(match_in_order(&xs, &xs[..2]).is_err());
    }

    #[test]
    fn reciprocal_sum_of_symmetric_set_vanishes() {
        let zs = lattice(0.5, 100);
        // a_0 = −1/2 pairs 1/2 with −3/2, …; the partial sums telescope to −1/(N + 1/2)·…
        let l = partial_reciprocal_sum(&zs, 50).unwrap();
        assert!((l - (-1.0 / 50.5)).abs() < 1e-12, "{l}");
    }
}
