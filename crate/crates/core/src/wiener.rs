//! Finite exponential sums `Q(z) = Σ q_ω e^{2πiωz}` with real frequencies.
//!
//! These are the elements of the Wiener-type algebra of absolutely convergent
//! Dirichlet series restricted to finitely many terms. Every value is kept in
//! canonical form: frequencies strictly increasing and separated by more than
//! the merge tolerance, no coefficient below the prune threshold.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Hard ceiling on the order of a truncated power series.
const MAX_SERIES_ORDER: usize = 4096;

/// Raw products above this count are refused before allocation.
const MAX_RAW_PRODUCTS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    /// Frequency in cycles per unit length.
    pub omega: f64,
    pub coeff: Complex64,
}

impl Term {
    pub fn new(omega: f64, coeff: Complex64) -> Self {
        Term { omega, coeff }
    }
}

/// Which horizontal line a log-derivative expansion lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `Im z = +s`; the lowest frequency is factored out.
    Upper,
    /// `Im z = -s`; the highest frequency is factored out.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExponentialSum {
    terms: Vec<Term>,
}

impl ExponentialSum {
    pub fn zero() -> Self {
        ExponentialSum { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0.0, c)
    }

    /// `c·e^{2πiωz}`; a zero coefficient gives the empty sum.
    pub fn monomial(omega: f64, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        ExponentialSum {
            terms: vec![Term::new(omega, c)],
        }
    }

    /// `e^{2πiα(z-β)} - 1`, whose zeros are the progression `β + Z/α`.
    pub fn comb_generator(alpha: f64, beta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, -TWO_PI * alpha * beta);
        let mut terms = vec![Term::new(0.0, Complex64::new(-1.0, 0.0)), Term::new(alpha, phase)];
        terms.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        ExponentialSum { terms }
    }

    /// Canonical form of an arbitrary finite term list.
    ///
    /// Frequencies within `freq_merge_tol` of each other (chained) are merged:
    /// coefficients add, the new frequency is the modulus-weighted mean.
    /// Coefficients below `prune_threshold` are then dropped.
    pub fn normalize<I>(raw: I, cfg: &ToleranceConfig) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Complex64)>,
    {
        let mut terms = Vec::new();
        for (omega, coeff) in raw {
            if !omega.is_finite() || !coeff.re.is_finite() || !coeff.im.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite term ({omega}, {coeff})")));
            }
            terms.push(Term::new(omega, coeff));
        }
        Self::from_unsorted(terms, cfg)
    }

    fn from_unsorted(mut terms: Vec<Term>, cfg: &ToleranceConfig) -> Result<Self> {
        terms.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        let mut merged = merge_sorted(&terms, cfg.freq_merge_tol);
        // A merged frequency can drift within tolerance of its neighbour.
        while merged.windows(2).any(|w| w[1].omega - w[0].omega <= cfg.freq_merge_tol) {
            merged = merge_sorted(&merged, cfg.freq_merge_tol);
        }
        merged.retain(|t| t.coeff.norm() >= cfg.prune_threshold);
        if merged.len() > cfg.max_terms {
            return Err(Error::TooManyTerms {
                got: merged.len(),
                limit: cfg.max_terms,
            });
        }
        Ok(ExponentialSum { terms: merged })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest frequency (κ).
    pub fn min_frequency(&self) -> Option<f64> {
        self.terms.first().map(|t| t.omega)
    }

    /// Largest frequency (κ′).
    pub fn max_frequency(&self) -> Option<f64> {
        self.terms.last().map(|t| t.omega)
    }

    /// Width κ′ − κ of the spectrum; 0 for empty or single-term sums.
    pub fn spectral_width(&self) -> f64 {
        match (self.min_frequency(), self.max_frequency()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Coefficient stored at `omega`, if any frequency lies within `tol`.
    pub fn coefficient_at(&self, omega: f64, tol: f64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| (t.omega - omega).abs() <= tol)
            .map(|t| t.coeff)
            .sum()
    }

    pub fn wiener_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, |a, b| a + b)
    }

    /// `Σ 2π|ω||q|`, the Wiener norm of the derivative.
    pub fn derivative_norm(&self) -> f64 {
        self.terms.iter().map(|t| TWO_PI * t.omega.abs() * t.coeff.norm()).sum()
    }

    pub fn add(&self, other: &Self, cfg: &ToleranceConfig) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.len() + other.len());
        terms.extend_from_slice(&self.terms);
        terms.extend_from_slice(&other.terms);
        Self::from_unsorted(terms, cfg)
    }

    pub fn sub(&self, other: &Self, cfg: &ToleranceConfig) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)), cfg)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        ExponentialSum {
            terms: self.terms.iter().map(|t| Term::new(t.omega, t.coeff * c)).collect(),
        }
    }

    /// Multiply by `e^{2πi·shift·z}`.
    pub fn shift_frequencies(&self, shift: f64) -> Self {
        ExponentialSum {
            terms: self.terms.iter().map(|t| Term::new(t.omega + shift, t.coeff)).collect(),
        }
    }

    pub fn mul(&self, other: &Self, cfg: &ToleranceConfig) -> Result<Self> {
        self.mul_in_band(other, f64::NEG_INFINITY, f64::INFINITY, cfg)
    }

    /// Product keeping only frequencies in `[lo, hi]`.
    pub fn mul_in_band(&self, other: &Self, lo: f64, hi: f64, cfg: &ToleranceConfig) -> Result<Self> {
        let raw = self.len().saturating_mul(other.len());
        if raw > MAX_RAW_PRODUCTS {
            return Err(Error::TooManyTerms {
                got: raw,
                limit: cfg.max_terms,
            });
        }
        let slack = cfg.freq_merge_tol;
        let mut terms = Vec::with_capacity(raw);
        for a in &self.terms {
            for b in &other.terms {
                let omega = a.omega + b.omega;
                if omega < lo - slack || omega > hi + slack {
                    continue;
                }
                terms.push(Term::new(omega, a.coeff * b.coeff));
            }
        }
        Self::from_unsorted(terms, cfg)
    }

    /// Keep only the terms with frequency in `[lo, hi]`.
    pub fn band_limit(&self, lo: f64, hi: f64) -> Self {
        ExponentialSum {
            terms: self
                .terms
                .iter()
                .copied()
                .filter(|t| t.omega >= lo && t.omega <= hi)
                .collect(),
        }
    }

    pub fn differentiate(&self) -> Self {
        ExponentialSum {
            terms: self
                .terms
                .iter()
                .filter(|t| t.omega != 0.0)
                .map(|t| Term::new(t.omega, t.coeff * Complex64::new(0.0, TWO_PI * t.omega)))
                .collect(),
        }
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.coeff * unit_wave(t.omega, z)).sum()
    }

    /// `(Q(z), Q′(z))` in one pass.
    pub fn evaluate_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let w = t.coeff * unit_wave(t.omega, z);
            value += w;
            deriv += w * Complex64::new(0.0, TWO_PI * t.omega);
        }
        (value, deriv)
    }

    /// `(Q, Q′, Q″)` at `z`.
    pub fn evaluate_jet(&self, z: Complex64) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for t in &self.terms {
            let w = t.coeff * unit_wave(t.omega, z);
            let k = Complex64::new(0.0, TWO_PI * t.omega);
            out[0] += w;
            out[1] += w * k;
            out[2] += w * k * k;
        }
        out
    }

    /// The sum `x ↦ Q(x + iy)` as a function of real `x`.
    pub fn restrict_to_line(&self, y: f64) -> Self {
        ExponentialSum {
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.omega, t.coeff * (-TWO_PI * t.omega * y).exp()))
                .collect(),
        }
    }

    /// `exp Q` by its power series.
    ///
    /// The frequency-zero term is split off and exponentiated exactly; the rest
    /// is summed until `‖R‖^N/N!·e^{‖R‖}` drops below the tail target.
    pub fn exp_sum(&self, cfg: &ToleranceConfig) -> Result<Self> {
        let (c0, rest) = self.split_constant(cfg.freq_merge_tol);
        let r = rest.wiener_norm();
        let order = exp_order(r, cfg.series_tail_target);
        let series = rest.power_series(order, 0, |n| 1.0 / factorial(n), None, cfg)?;
        Ok(series.scale(c0.exp()))
    }

    /// Band-limited `exp Q` for sums whose non-constant frequencies are all
    /// positive (or all negative).
    ///
    /// Only frequencies with `|ω| ≤ band` are computed. Because powers can only
    /// move further from zero, the result is exact inside the band once the
    /// order exceeds `band / min|ω|`. Returns the sum and the Wiener-norm
    /// truncation bound still outstanding (0 when the band closed the series).
    pub fn exp_sum_one_sided(&self, band: f64, cfg: &ToleranceConfig) -> Result<(Self, f64)> {
        let (c0, rest) = self.split_constant(cfg.freq_merge_tol);
        let (lo, hi, closing) = one_sided_window(&rest, band)?;
        let r = rest.wiener_norm();
        let tail_order = exp_order(r, cfg.series_tail_target);
        let (order, tail) = if closing < tail_order {
            (closing, 0.0)
        } else {
            (tail_order, exp_tail(r, tail_order))
        };
        let series = rest.power_series(order, 0, |n| 1.0 / factorial(n), Some((lo, hi)), cfg)?;
        Ok((series.scale(c0.exp()), tail))
    }

    /// `log(1 + H)` by the Mercator series; requires `‖H‖_W < 1`.
    pub fn log1p_sum(&self, cfg: &ToleranceConfig) -> Result<Self> {
        let r = self.wiener_norm();
        if r >= 1.0 {
            return Err(Error::NormNotLessThanOne(r));
        }
        if self.is_empty() {
            return Ok(Self::zero());
        }
        let order = log1p_order(r, cfg.series_tail_target)?;
        self.power_series(order, 1, mercator_coefficient, None, cfg)
    }

    /// Band-limited `log(1 + H)` for one-sided `H` (no constant term).
    /// Returns the sum and the outstanding truncation bound, as in
    /// [`ExponentialSum::exp_sum_one_sided`].
    pub fn log1p_sum_one_sided(&self, band: f64, cfg: &ToleranceConfig) -> Result<(Self, f64)> {
        let r = self.wiener_norm();
        if r >= 1.0 {
            return Err(Error::NormNotLessThanOne(r));
        }
        if self.is_empty() {
            return Ok((Self::zero(), 0.0));
        }
        if self.coefficient_at(0.0, cfg.freq_merge_tol).norm() > 0.0 {
            return Err(Error::InvalidInput(
                "one-sided log1p needs a remainder without constant term".into(),
            ));
        }
        let (lo, hi, closing) = one_sided_window(self, band)?;
        let (order, tail) = match log1p_order(r, cfg.series_tail_target) {
            Ok(n) if n < closing => (n, log1p_tail(r, n)),
            _ => (closing, 0.0),
        };
        let series = self.power_series(order, 1, mercator_coefficient, Some((lo, hi)), cfg)?;
        Ok((series, tail))
    }

    /// The expansion of `x ↦ Q′(x ± is)/Q(x ± is)` as an exponential sum.
    ///
    /// The edge term (κ for the upper line, κ′ for the lower) is factored out,
    /// leaving `1 + H` with `‖H‖_W < 1` required at height `s`. The constant
    /// term of the result is `2πiκ` (upper) or `2πiκ′` (lower); the remaining
    /// frequencies are all positive (upper) or all negative (lower).
    pub fn log_derivative_series(&self, s: f64, side: Side, cfg: &ToleranceConfig) -> Result<Self> {
        let (edge, remainder) = self.edge_factorization(s, side)?;
        let log = remainder.log1p_sum(cfg)?;
        log_derivative_from_log(edge, &log, cfg)
    }

    /// Band-limited form of [`ExponentialSum::log_derivative_series`]: only
    /// frequencies with `|γ| ≤ band` are produced, without magnitude pruning.
    /// Also returns the Wiener-norm truncation bound of the underlying log series.
    pub fn log_derivative_series_in_band(
        &self,
        s: f64,
        side: Side,
        band: f64,
        cfg: &ToleranceConfig,
    ) -> Result<(Self, f64)> {
        let (edge, remainder) = self.edge_factorization(s, side)?;
        let (log, tail) = remainder.log1p_sum_one_sided(band, &cfg.without_pruning())?;
        Ok((log_derivative_from_log(edge, &log, &cfg.without_pruning())?, tail))
    }

    /// Factor the edge term out of the sum restricted to `Im z = ±s`.
    ///
    /// Returns the edge frequency and `H`, where on that line
    /// `Q = q_edge·e^{2πi·edge·z}·(1 + H(x))`.
    pub fn edge_factorization(&self, s: f64, side: Side) -> Result<(f64, Self)> {
        let (edge, others): (&Term, Vec<&Term>) = match side {
            Side::Upper => {
                let (first, rest) = self.terms.split_first().ok_or(Error::EmptySeries)?;
                (first, rest.iter().collect())
            }
            Side::Lower => {
                let (last, rest) = self.terms.split_last().ok_or(Error::EmptySeries)?;
                (last, rest.iter().collect())
            }
        };
        let y = match side {
            Side::Upper => s,
            Side::Lower => -s,
        };
        let terms: Vec<Term> = others
            .into_iter()
            .map(|t| {
                let d = t.omega - edge.omega;
                Term::new(d, t.coeff / edge.coeff * (-TWO_PI * d * y).exp())
            })
            .collect();
        let remainder = ExponentialSum { terms };
        let norm = remainder.wiener_norm();
        if norm >= 1.0 || !norm.is_finite() {
            return Err(Error::FactorizationFailed { height: s, norm });
        }
        Ok((edge.omega, remainder))
    }

    /// Wiener norm of the factored remainder on the given line, without the
    /// `< 1` check.
    pub fn edge_remainder_norm(&self, s: f64, side: Side) -> f64 {
        match self.edge_factorization(s, side) {
            Ok((_, h)) => h.wiener_norm(),
            Err(Error::FactorizationFailed { norm, .. }) => norm,
            Err(_) => f64::INFINITY,
        }
    }

    fn split_constant(&self, tol: f64) -> (Complex64, Self) {
        let mut c0 = Complex64::new(0.0, 0.0);
        let mut rest = Vec::with_capacity(self.len());
        for t in &self.terms {
            if t.omega.abs() <= tol {
                c0 += t.coeff;
            } else {
                rest.push(*t);
            }
        }
        (c0, ExponentialSum { terms: rest })
    }

    /// `Σ_{n=start}^{order-1} a(n)·Hⁿ` with optional band `[lo, hi]` on every power.
    fn power_series(
        &self,
        order: usize,
        start: usize,
        a: impl Fn(usize) -> f64,
        band: Option<(f64, f64)>,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let (lo, hi) = band.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        let mut power = Self::constant(Complex64::new(1.0, 0.0));
        let mut acc: Vec<Term> = Vec::new();
        for n in 0..order {
            if n > 0 {
                power = power.mul_in_band(self, lo, hi, cfg)?;
                if power.is_empty() {
                    break;
                }
            }
            if n >= start {
                let an = a(n);
                acc.extend(power.terms.iter().map(|t| Term::new(t.omega, t.coeff * an)));
                if acc.len() > 4 * cfg.max_terms {
                    acc = Self::from_unsorted(acc, cfg)?.terms;
                }
            }
        }
        Self::from_unsorted(acc, cfg)
    }
}

fn log_derivative_from_log(edge: f64, log: &ExponentialSum, cfg: &ToleranceConfig) -> Result<ExponentialSum> {
    let constant = ExponentialSum::constant(Complex64::new(0.0, TWO_PI * edge));
    log.differentiate().add(&constant, cfg)
}

/// `e^{2πiωz}`.
#[inline]
pub(crate) fn unit_wave(omega: f64, z: Complex64) -> Complex64 {
    let a = TWO_PI * omega;
    Complex64::from_polar((-a * z.im).exp(), a * z.re)
}

fn merge_sorted(terms: &[Term], tol: f64) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    let mut i = 0;
    while i < terms.len() {
        let mut j = i + 1;
        while j < terms.len() && terms[j].omega - terms[j - 1].omega <= tol {
            j += 1;
        }
        if j == i + 1 {
            out.push(terms[i]);
        } else {
            let cluster = &terms[i..j];
            let coeff: Complex64 = cluster.iter().map(|t| t.coeff).sum();
            let weight: f64 = cluster.iter().map(|t| t.coeff.norm()).sum();
            let omega = if weight > 0.0 {
                cluster.iter().map(|t| t.omega * t.coeff.norm()).sum::<f64>() / weight
            } else {
                cluster.iter().map(|t| t.omega).sum::<f64>() / cluster.len() as f64
            };
            out.push(Term::new(omega, coeff));
        }
        i = j;
    }
    out
}

/// Band `[lo, hi]` for a one-sided sum and the power at which it closes.
fn one_sided_window(sum: &ExponentialSum, band: f64) -> Result<(f64, f64, usize)> {
    let (Some(lo), Some(hi)) = (sum.min_frequency(), sum.max_frequency()) else {
        return Ok((0.0, band, 1));
    };
    let (window, nearest) = if lo > 0.0 {
        ((0.0, band), lo)
    } else if hi < 0.0 {
        ((-band, 0.0), -hi)
    } else {
        return Err(Error::InvalidInput(
            "band-limited series needs all frequencies on one side of zero".into(),
        ));
    };
    let closing = (band / nearest).floor();
    if closing > MAX_SERIES_ORDER as f64 {
        return Err(Error::TooManyTerms {
            got: closing as usize,
            limit: MAX_SERIES_ORDER,
        });
    }
    Ok((window.0, window.1, closing as usize + 1))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn mercator_coefficient(n: usize) -> f64 {
    if n % 2 == 1 {
        1.0 / n as f64
    } else {
        -1.0 / n as f64
    }
}

/// Bound on `Σ_{n≥N} rⁿ/n!`, namely `r^N/N!·e^r`.
fn exp_tail(r: f64, n: usize) -> f64 {
    let mut t = r.exp();
    for k in 1..=n {
        t *= r / k as f64;
    }
    t
}

fn exp_order(r: f64, target: f64) -> usize {
    if r == 0.0 {
        return 1;
    }
    let mut t = r.exp();
    let mut n = 0;
    while t > target && n < MAX_SERIES_ORDER {
        n += 1;
        t *= r / n as f64;
    }
    n.max(1)
}

/// Bound on `Σ_{n≥N} rⁿ/n`.
fn log1p_tail(r: f64, n: usize) -> f64 {
    r.powi(n as i32) / (n as f64 * (1.0 - r))
}

fn log1p_order(r: f64, target: f64) -> Result<usize> {
    let mut n = 1;
    while log1p_tail(r, n) > target {
        n += 1;
        if n > MAX_SERIES_ORDER {
            return Err(Error::TooManyTerms {
                got: n,
                limit: MAX_SERIES_ORDER,
            });
        }
    }
    Ok(n)
}
