//! Bohr means, Fourier coefficients and ε-almost periods of sampled functions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, Kernel};
use crate::zeros::ZeroSet;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Values on the uniform grid `start + k·step`, `k = 0..values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    start: f64,
    step: f64,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(start: f64, step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(Error::InvalidInput(format!("bad grid start={start}, step={step}")));
        }
        Ok(SampledFunction { start, step, values })
    }

    pub fn from_fn(start: f64, step: f64, count: usize, f: impl Fn(f64) -> Complex64 + Sync) -> Result<Self> {
        let values = (0..count).into_par_iter().map(|k| f(start + step * k as f64)).collect();
        Self::new(start, step, values)
    }

    /// `μ⋆ψ` sampled on the grid.
    pub fn convolution<K: Kernel + Sync>(
        mu: &AtomicMeasure,
        kernel: &K,
        start: f64,
        step: f64,
        count: usize,
    ) -> Result<Self> {
        let values = (0..count)
            .into_par_iter()
            .map(|k| mu.convolve(kernel, start + step * k as f64).map(|c| c.value))
            .collect::<Result<Vec<_>>>()?;
        Self::new(start, step, values)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn x(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }

    /// Length of the sampled interval.
    pub fn span(&self) -> f64 {
        self.step * self.values.len().saturating_sub(1) as f64
    }

    /// Largest minus smallest modulus; the scale for default tolerances.
    pub fn oscillation(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .map(|v| v.norm())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if hi >= lo {
            hi - lo
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BohrMean {
    /// `(T, mean over the window of length T)` per requested length.
    pub estimates: Vec<(f64, Complex64)>,
    /// The estimate for the last length.
    pub mean: Complex64,
    /// Largest deviation of an estimate from `mean`.
    pub spread: f64,
}

/// Trapezoid means `(1/T)∫ g` over windows of length `T` centred on the
/// middle of the grid. Each window is snapped outward to grid nodes.
pub fn bohr_mean(g: &SampledFunction, lengths: &[f64]) -> Result<BohrMean> {
    mean_of(g, lengths, |_, v| v)
}

/// `bohr_mean` of `g(x)e^{−2πiωx}`, for the last length.
pub fn fourier_coefficient(g: &SampledFunction, omega: f64, lengths: &[f64]) -> Result<Complex64> {
    Ok(mean_of(g, lengths, |x, v| v * Complex64::from_polar(1.0, -TWO_PI * omega * x))?.mean)
}

fn mean_of(g: &SampledFunction, lengths: &[f64], f: impl Fn(f64, Complex64) -> Complex64) -> Result<BohrMean> {
    if lengths.is_empty() {
        return Err(Error::InvalidInput("need at least one averaging length".into()));
    }
    let n = g.len();
    if n < 2 {
        return Err(Error::GridTooShort);
    }
    let center = 0.5 * (n - 1) as f64;
    let mut estimates = Vec::with_capacity(lengths.len());
    for &t in lengths {
        let half = 0.5 * t / g.step;
        if !(t > 0.0) || half > center + 1e-9 {
            return Err(Error::GridTooShort);
        }
        // Snap outward, but never beyond the grid.
        let i0 = (center - half + 1e-9).floor().max(0.0) as usize;
        let i1 = ((center + half - 1e-9).ceil() as usize).min(n - 1).max(i0 + 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in i0..=i1 {
            let w = if k == i0 || k == i1 { 0.5 } else { 1.0 };
            acc += f(g.x(k), g.values[k]) * w;
        }
        estimates.push((t, acc / (i1 - i0) as f64));
    }
    let mean = estimates.last().unwrap().1;
    let spread = estimates.iter().map(|(_, e)| (e - mean).norm()).fold(0.0, f64::max);
    Ok(BohrMean {
        estimates,
        mean,
        spread,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostPeriods {
    pub periods: Vec<f64>,
    /// Largest gap between consecutive periods; infinite with fewer than two.
    pub max_gap: f64,
}

/// All `τ = lo + k·stride` in `[lo, hi]` with `max |g(x + τ) − g(x)| < ε` over
/// the sampled overlap. Shifts are rounded to whole grid steps.
pub fn almost_periods(g: &SampledFunction, eps: f64, search: (f64, f64), stride: f64) -> Result<AlmostPeriods> {
    let (lo, hi) = search;
    if !(stride >= g.step * (1.0 - 1e-9)) || !(lo <= hi) || !(eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need stride ≥ step, lo ≤ hi and ε > 0 (stride={stride}, step={}, search={search:?}, ε={eps})",
            g.step
        )));
    }
    let n = g.len();
    let reach = lo.abs().max(hi.abs());
    if n < 2 || reach >= g.span() {
        return Err(Error::GridTooShort);
    }
    let count = ((hi - lo) / stride + 1e-9).floor() as usize + 1;
    let values = &g.values;
    let hits: Vec<Option<f64>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let tau = lo + stride * k as f64;
            let m = (tau / g.step).round() as i64;
            let shift = m.unsigned_abs() as usize;
            let (a, b) = if m >= 0 {
                (&values[..n - shift], &values[shift..])
            } else {
                (&values[shift..], &values[..n - shift])
            };
            let ok = a.iter().zip(b).all(|(x, y)| (y - x).norm() < eps);
            ok.then_some(m as f64 * g.step)
        })
        .collect();
    let mut periods: Vec<f64> = hits.into_iter().flatten().collect();
    periods.dedup();
    let max_gap = if periods.len() < 2 {
        f64::INFINITY
    } else {
        periods.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    };
    Ok(AlmostPeriods { periods, max_gap })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    /// `(n, a_n − n/D)` in the symmetric numbering.
    pub phi: Vec<(i64, f64)>,
    pub sup_abs: f64,
    /// Largest gap between ε-almost periods of `n ↦ φ(n)`, `ε = 0.2·sup_abs`.
    pub ap_score: f64,
}

/// `φ(n) = a_n − n/D` and an almost-periodicity score for it.
pub fn ap_displacement(zs: &ZeroSet, d: f64) -> Result<Displacement> {
    if !(d > 0.0) {
        return Err(Error::InvalidInput(format!("density must be positive, got {d}")));
    }
    let signed = zs.signed()?;
    let phi: Vec<(i64, f64)> = signed.iter().map(|(n, a)| (n, a - n as f64 / d)).collect();
    let sup_abs = phi.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let ap_score = if phi.len() < 3 {
        f64::INFINITY
    } else {
        let seq = SampledFunction::new(
            phi[0].0 as f64,
            1.0,
            phi.iter().map(|p| Complex64::new(p.1, 0.0)).collect(),
        )?;
        // A constant sequence has every shift as a period.
        let eps = (0.2 * sup_abs).max(1e-12);
        let reach = (0.5 * seq.span()).floor();
        almost_periods(&seq, eps, (0.0, reach), 1.0)?.max_gap
    };
    Ok(Displacement { phi, sup_abs, ap_score })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{comb_measure, Triangle};

    fn sampled(f: impl Fn(f64) -> f64 + Sync, start: f64, step: f64, count: usize) -> SampledFunction {
        SampledFunction::from_fn(start, step, count, |x| Complex64::new(f(x), 0.0)).unwrap()
    }

    #[test]
    fn bohr_mean_examples() {
        let wave = SampledFunction::from_fn(-500.0, 0.01, 100_001, |x| Complex64::from_polar(1.0, TWO_PI * x)).unwrap();
        let m = bohr_mean(&wave, &[100.0, 500.0, 1000.0]).unwrap();
        assert!(m.mean.norm() < 1e-3);
        let c = sampled(|_| 2.5, 0.0, 0.1, 101);
        assert!((bohr_mean(&c, &[10.0]).unwrap().mean - Complex64::new(2.5, 0.0)).norm() < 1e-15);
        let sq = sampled(|x| (TWO_PI * x).cos().powi(2), 0.0, 0.01, 100_001);
        let m = bohr_mean(&sq, &[333.3, 999.9]).unwrap();
        assert!((m.mean.re - 0.5).abs() < 1e-3);
        assert!(matches!(bohr_mean(&c, &[20.0]), Err(Error::GridTooShort)));
    }

    #[test]
    fn fourier_coefficient_examples() {
        let g =
            SampledFunction::from_fn(-1000.0, 0.02, 100_001, |x| Complex64::from_polar(3.0, TWO_PI * x) + 5.0).unwrap();
        let ts = [1000.0, 2000.0];
        assert!((fourier_coefficient(&g, 1.0, &ts).unwrap() - Complex64::new(3.0, 0.0)).norm() < 1e-2);
        assert!((fourier_coefficient(&g, 0.0, &ts).unwrap() - Complex64::new(5.0, 0.0)).norm() < 1e-2);
        assert!(fourier_coefficient(&g, 2f64.sqrt(), &ts).unwrap().norm() < 1e-2);
    }

    #[test]
    fn periodic_and_constant_functions() {
        let g = sampled(|x| (TWO_PI * x).sin(), 0.0, 0.05, 2001);
        let ap = almost_periods(&g, 1e-6, (0.0, 50.0), 0.05).unwrap();
        let expected: Vec<f64> = (0..=50).map(|k| k as f64).collect();
        assert_eq!(ap.periods.len(), expected.len());
        for (p, e) in ap.periods.iter().zip(&expected) {
            assert!((p - e).abs() < 1e-9);
        }
        assert!((ap.max_gap - 1.0).abs() < 1e-9);
        let c = sampled(|_| 1.0, 0.0, 0.05, 401);
        let ap = almost_periods(&c, 0.1, (0.0, 10.0), 0.5).unwrap();
        assert_eq!(ap.periods.len(), 21);
        assert!((ap.max_gap - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quasi_periodic_sum_has_relatively_dense_periods() {
        let g = sampled(
            |x| (TWO_PI * x).sin() + (TWO_PI * 2f64.sqrt() * x).sin(),
            0.0,
            0.01,
            1_020_001,
        );
        let ap = almost_periods(&g, 0.1, (0.0, 10_000.0), 1.0).unwrap();
        assert!(ap.periods.len() > 2);
        assert!(ap.max_gap.is_finite());
    }

    #[test]
    fn search_must_fit_the_grid() {
        let g = sampled(|x| x, 0.0, 0.1, 11);
        assert!(matches!(
            almost_periods(&g, 0.1, (0.0, 1.0), 0.1),
            Err(Error::GridTooShort)
        ));
        assert!(almost_periods(&g, 0.1, (0.0, 0.5), 0.01).is_err());
    }

    #[test]
    fn displacement_examples() {
        let z = ZeroSet::from_positions((-50.0, 50.0), (-50..=50).map(|n| n as f64)).unwrap();
        let d = ap_displacement(&z, 1.0).unwrap();
        assert_eq!(d.sup_abs, 0.0);
        assert_eq!(d.ap_score, 1.0);
        let beta = 2f64.sqrt();
        let pts = (-500..=500).map(|n| n as f64 + 0.2 * (TWO_PI * beta * n as f64).cos());
        let z = ZeroSet::from_positions((-501.0, 501.0), pts).unwrap();
        let d = ap_displacement(&z, 1.0).unwrap();
        assert!(d.sup_abs <= 0.2);
        assert!(d.ap_score.is_finite());
        let z = ZeroSet::from_positions((-30.0, 30.0), (-20..=20).map(|n| 1.5 * n as f64)).unwrap();
        let d = ap_displacement(&z, 2.0 / 3.0).unwrap();
        assert!(d.sup_abs < 1e-12);
        assert!(matches!(
            ap_displacement(&ZeroSet::empty((0.0, 1.0)), 1.0),
            Err(Error::EmptyZeroSet)
        ));
    }

    #[test]
    fn comb_convolution_is_periodic() {
        let z = ZeroSet::from_positions((-1.0, 101.0), (-1..=101).map(|n| n as f64)).unwrap();
        let g =
            SampledFunction::convolution(&comb_measure(&z), &Triangle { half_width: 0.4 }, 0.0, 0.05, 2001).unwrap();
        let ap = almost_periods(&g, 0.05, (0.0, 50.0), 0.05).unwrap();
        assert!((ap.max_gap - 1.0).abs() < 1e-9);
    }
}
