//! Real zeros of exponential sums, counted with multiplicity.
//!
//! Zeros are located by scanning the window in cells. A cell that the
//! Lipschitz bound cannot certify zero-free gets a winding-number count on a
//! small rectangle; cells holding one zero are finished by complex Newton,
//! cells holding several by Schröder's iteration plus a shrinking-rectangle
//! multiplicity test, falling back to bisection for clusters. Finally the
//! count over a rectangle covering the whole window and the requested strip
//! must equal the number of real zeros found.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::wiener::ExponentialSum;

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    window: (f64, f64),
    zeros: Vec<(f64, u32)>,
}

impl ZeroSet {
    /// Validating constructor: positions strictly increasing inside the
    /// closed window, multiplicities at least one.
    pub fn new(window: (f64, f64), zeros: Vec<(f64, u32)>) -> Result<Self> {
        if !(window.0 <= window.1) {
            return Err(Error::InvalidInput(format!("bad window {window:?}")));
        }
        for w in zeros.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidInput("zero positions must increase".into()));
            }
        }
        for &(x, m) in &zeros {
            if m == 0 {
                return Err(Error::InvalidInput("multiplicity must be positive".into()));
            }
            if !(x >= window.0 && x <= window.1) {
                return Err(Error::InvalidInput(format!("zero {x} outside window")));
            }
        }
        Ok(ZeroSet { window, zeros })
    }

    /// Build from a list of positions, repeated positions adding multiplicity.
    pub fn from_positions(window: (f64, f64), positions: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut xs: Vec<f64> = positions.into_iter().collect();
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite position".into()));
        }
        xs.sort_by(f64::total_cmp);
        let mut zeros: Vec<(f64, u32)> = Vec::with_capacity(xs.len());
        for x in xs {
            match zeros.last_mut() {
                Some((p, m)) if *p == x => *m += 1,
                _ => zeros.push((x, 1)),
            }
        }
        ZeroSet::new(window, zeros)
    }

    pub fn empty(window: (f64, f64)) -> Self {
        ZeroSet {
            window,
            zeros: Vec::new(),
        }
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn zeros(&self) -> &[(f64, u32)] {
        &self.zeros
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.zeros.iter().map(|&(_, m)| m as u64).sum()
    }

    /// Positions repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.zeros
            .iter()
            .flat_map(|&(x, m)| std::iter::repeat_n(x, m as usize))
            .collect()
    }

    /// Largest multiset count in an open interval of unit length.
    pub fn max_per_unit(&self) -> u64 {
        let xs = self.expanded();
        let mut best = 0u64;
        let mut j = 0;
        for i in 0..xs.len() {
            if j < i {
                j = i;
            }
            while j < xs.len() && xs[j] < xs[i] + 1.0 {
                j += 1;
            }
            best = best.max((j - i) as u64);
        }
        best
    }

    /// Zeros restricted to `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> ZeroSet {
        ZeroSet {
            window: (a.max(self.window.0), b.min(self.window.1)),
            zeros: self.zeros.iter().copied().filter(|&(x, _)| x >= a && x <= b).collect(),
        }
    }

    /// Minimum distance between consecutive distinct positions; 0 when any
    /// zero is multiple.
    pub fn min_gap(&self) -> Result<f64> {
        if self.zeros.len() < 2 {
            return Err(Error::NotEnoughPoints);
        }
        if self.zeros.iter().any(|&(_, m)| m >= 2) {
            return Ok(0.0);
        }
        Ok(self
            .zeros
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .fold(f64::INFINITY, f64::min))
    }

    /// Signed indexing `a_0, a_{±1}, …`: `a_0` is the zero closest to the
    /// origin (ties go to the negative one) and indices run outward in sorted
    /// order, repeating multiple zeros.
    pub fn signed(&self) -> Result<SignedZeros> {
        let positions = self.expanded();
        if positions.is_empty() {
            return Err(Error::EmptyZeroSet);
        }
        let mut center = 0;
        for (i, &x) in positions.iter().enumerate() {
            let best = positions[center].abs();
            if x.abs() < best {
                center = i;
            }
        }
        Ok(SignedZeros { positions, center })
    }
}

/// A zero multiset with the symmetric outward numbering.
#[derive(Debug, Clone)]
pub struct SignedZeros {
    positions: Vec<f64>,
    center: usize,
}

impl SignedZeros {
    /// `a_n`, if present.
    pub fn get(&self, n: i64) -> Option<f64> {
        let idx = self.center as i64 + n;
        if idx < 0 {
            return None;
        }
        self.positions.get(idx as usize).copied()
    }

    /// Most negative available index.
    pub fn min_index(&self) -> i64 {
        -(self.center as i64)
    }

    /// Largest available index.
    pub fn max_index(&self) -> i64 {
        (self.positions.len() - 1 - self.center) as i64
    }

    /// Number of complete symmetric pairs `(a_n, a_{-n})`, `n ≥ 1`.
    pub fn pairs_available(&self) -> usize {
        self.center.min(self.positions.len() - 1 - self.center)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let c = self.center as i64;
        self.positions.iter().enumerate().map(move |(i, &x)| (i as i64 - c, x))
    }
}

/// Closed rectangle `[x_lo, x_hi] × [-y_half, y_half]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_half: f64,
}

impl Rectangle {
    pub fn new(x_lo: f64, x_hi: f64, y_half: f64) -> Result<Self> {
        if !(x_lo < x_hi) || !(y_half > 0.0) {
            return Err(Error::InvalidInput(format!(
                "degenerate rectangle [{x_lo}, {x_hi}] x ±{y_half}"
            )));
        }
        Ok(Rectangle { x_lo, x_hi, y_half })
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x_lo && z.re <= self.x_hi && z.im.abs() <= self.y_half
    }
}

/// Number of zeros of `q` inside `rect`, with multiplicity, as the rounded
/// value of `(1/2πi)∮ Q′/Q dz`.
pub fn argument_principle_count(q: &ExponentialSum, rect: &Rectangle, cfg: &ToleranceConfig) -> Result<i64> {
    if q.is_empty() {
        return Err(Error::EmptySeries);
    }
    winding_number(&centered(q), rect, cfg)
}

/// Multiply by `e^{-2πimz}`, `m` the spectral midpoint. Zeros and winding
/// numbers are unchanged and the dynamic range over tall rectangles shrinks.
fn centered(q: &ExponentialSum) -> ExponentialSum {
    let mid = 0.5 * (q.min_frequency().unwrap_or(0.0) + q.max_frequency().unwrap_or(0.0));
    q.shift_frequencies(-mid)
}

fn winding_number(q: &ExponentialSum, rect: &Rectangle, cfg: &ToleranceConfig) -> Result<i64> {
    let bandwidth = q.spectral_width().max(1e-3);
    let corners = [
        Complex64::new(rect.x_lo, -rect.y_half),
        Complex64::new(rect.x_hi, -rect.y_half),
        Complex64::new(rect.x_hi, rect.y_half),
        Complex64::new(rect.x_lo, rect.y_half),
    ];

    // Boundary clearance on a sample fine enough to see every oscillation.
    let mut min_mod = f64::INFINITY;
    let mut max_mod: f64 = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let len = (b - a).norm();
        let samples = ((len * bandwidth * 16.0).ceil() as usize).clamp(16, 1 << 20);
        for j in 0..samples {
            let v = q.evaluate(a + (b - a) * (j as f64 / samples as f64)).norm();
            min_mod = min_mod.min(v);
            max_mod = max_mod.max(v);
        }
    }
    if !(min_mod > 10.0 * cfg.root_tol * max_mod) {
        return Err(Error::BoundaryTooCloseToZero {
            min_modulus: min_mod,
            max_modulus: max_mod,
        });
    }

    let mut last = f64::NAN;
    for tol in [1e-4, 1e-7, 1e-10] {
        let mut total = Complex64::new(0.0, 0.0);
        let mut ok = true;
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            let dir = b - a;
            let len = dir.norm();
            let panels = ((len * bandwidth * 2.0).ceil() as usize).clamp(1, 1 << 22);
            let f = |t: f64| {
                let (v, d) = q.evaluate_with_derivative(a + dir * t);
                d / v * dir
            };
            match quadrature::integrate(&f, 0.0, 1.0, panels, tol * 2.0 * PI, 40) {
                Some(v) => total += v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let value = total / Complex64::new(0.0, 2.0 * PI);
        last = value.re;
        let nearest = value.re.round();
        if (value.re - nearest).abs() < 0.25 && value.im.abs() < 0.25 {
            return Ok(nearest as i64);
        }
    }
    Err(Error::QuadratureNotConverged(last))
}

/// Real zeros of `q` in the closed window `[a, b]`.
///
/// `strip_half_height` is the half-height of the covering rectangle used for
/// the final completeness check: a zero off the real axis but inside the
/// strip makes the call fail with [`Error::NonRealZeroDetected`].
pub fn find_real_zeros(
    q: &ExponentialSum,
    window: (f64, f64),
    strip_half_height: f64,
    cfg: &ToleranceConfig,
) -> Result<ZeroSet> {
    cfg.validate()?;
    let (a, b) = window;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("bad window {window:?}")));
    }
    if !(strip_half_height > 0.0) {
        return Err(Error::InvalidInput("strip half-height must be positive".into()));
    }
    if q.len() < 2 {
        return Err(Error::InvalidInput(
            "need a nonconstant exponential sum with at least two terms".into(),
        ));
    }
    let scanner = Scanner::new(q, cfg);
    let h = scanner.step;

    let x_lo = scanner.best_of(a, &[-0.5 * h, -0.3 * h, -0.7 * h, -0.4 * h, -0.6 * h]);
    let x_hi = scanner.best_of(b, &[0.5 * h, 0.3 * h, 0.7 * h, 0.4 * h, 0.6 * h]);
    let n = ((x_hi - x_lo) / h).ceil().max(1.0) as usize;
    let raw_step = (x_hi - x_lo) / n as f64;
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(x_lo);
    for i in 1..n {
        let x = x_lo + raw_step * i as f64;
        nodes.push(scanner.best_of(x, &[0.0, 0.2 * raw_step, -0.2 * raw_step]));
    }
    nodes.push(x_hi);

    let found: Vec<Vec<(f64, u32)>> = nodes
        .par_windows(2)
        .map(|w| scanner.scan_cell(w[0], w[1], strip_half_height))
        .collect::<Result<_>>()?;
    let mut roots: Vec<(f64, u32)> = found.into_iter().flatten().collect();
    roots.sort_by(|x, y| x.0.total_cmp(&y.0));

    let real_total: i64 = roots.iter().map(|&(_, m)| m as i64).sum();
    let covering = scanner.covering_count(x_lo, x_hi, strip_half_height)?;
    if covering > real_total {
        return Err(Error::NonRealZeroDetected {
            total: covering,
            real: real_total,
        });
    }
    if covering < real_total {
        return Err(Error::ConvergenceFailure(0.5 * (a + b)));
    }

    let bound = cfg.root_tol * q.wiener_norm();
    for &(x, _) in &roots {
        if q.evaluate(Complex64::new(x, 0.0)).norm() > bound {
            return Err(Error::ConvergenceFailure(x));
        }
    }
    // Zeros on the window ends may be computed a hair outside.
    let slack = |x: f64| cfg.root_tol * scanner.scale * (1.0 + x.abs());
    roots.retain(|&(x, _)| x >= a - slack(a) && x <= b + slack(b));
    for r in &mut roots {
        r.0 = r.0.clamp(a, b);
    }
    // Distinct cells can polish one cluster into identical positions.
    let mut merged: Vec<(f64, u32)> = Vec::with_capacity(roots.len());
    for (x, m) in roots {
        match merged.last_mut() {
            Some((p, k)) if *p == x => *k += m,
            _ => merged.push((x, m)),
        }
    }
    ZeroSet::new(window, merged)
}

/// `min_gap` as a free function.
pub fn min_gap(zs: &ZeroSet) -> Result<f64> {
    zs.min_gap()
}

struct Scanner<'a> {
    q: ExponentialSum,
    cfg: &'a ToleranceConfig,
    /// Natural length scale `1/(κ′−κ)`.
    scale: f64,
    step: f64,
}

impl<'a> Scanner<'a> {
    fn new(q: &ExponentialSum, cfg: &'a ToleranceConfig) -> Self {
        let width = q.spectral_width();
        let scale = 1.0 / width;
        let step = cfg.quadrature_step.min(scale / 8.0);
        Scanner {
            q: centered(q),
            cfg,
            scale,
            step,
        }
    }

    fn modulus(&self, x: f64) -> f64 {
        self.q.evaluate(Complex64::new(x, 0.0)).norm()
    }

    /// Among `x + offsets`, the point where `|Q|` is largest.
    fn best_of(&self, x: f64, offsets: &[f64]) -> f64 {
        offsets
            .iter()
            .map(|d| x + d)
            .map(|p| (p, self.modulus(p)))
            .fold((x + offsets[0], f64::NEG_INFINITY), |best, cand| {
                if cand.1 > best.1 {
                    cand
                } else {
                    best
                }
            })
            .0
    }

    /// `sup |Q′|` over `|Im z| ≤ eta`.
    fn derivative_bound(&self, eta: f64) -> f64 {
        self.q
            .terms()
            .iter()
            .map(|t| 2.0 * PI * t.omega.abs() * t.coeff.norm() * (2.0 * PI * t.omega.abs() * eta).exp())
            .sum()
    }

    /// Roundoff-level uncertainty of a computed simple zero: the evaluation
    /// error of `Q` (phases lose `2π|ω||x|ε`) divided by `|Q′|`.
    fn root_error(&self, z: Complex64) -> f64 {
        let eval: f64 = self
            .q
            .terms()
            .iter()
            .map(|t| t.coeff.norm() * (-2.0 * PI * t.omega * z.im).exp() * (1.0 + 2.0 * PI * (t.omega * z).norm()))
            .sum::<f64>()
            * 4.0
            * f64::EPSILON;
        let (_, d) = self.q.evaluate_with_derivative(z);
        eval / d.norm()
    }

    fn count(&self, lo: f64, hi: f64, eta: f64) -> Result<i64> {
        winding_number(&self.q, &Rectangle::new(lo, hi, eta)?, self.cfg)
    }

    /// Count in `[lo, hi] × [-eta, eta]`, retrying with slightly different
    /// heights when the top or bottom edge grazes a zero.
    fn count_flexible(&self, lo: f64, hi: f64, eta: f64) -> Result<i64> {
        let mut last = None;
        for f in [1.0, 0.73, 1.21, 0.57] {
            match self.count(lo, hi, eta * f) {
                Ok(k) => return Ok(k),
                Err(e @ Error::BoundaryTooCloseToZero { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or(Error::ConvergenceFailure(lo)))
    }

    fn scan_cell(&self, lo: f64, hi: f64, strip: f64) -> Result<Vec<(f64, u32)>> {
        let w = 0.5 * (hi - lo);
        let eta = w.min(strip);
        let mid = lo + w;
        let reach = (w * w + eta * eta).sqrt();
        if self.modulus(mid) > reach * self.derivative_bound(eta) {
            return Ok(Vec::new());
        }
        let k = self.count_flexible(lo, hi, eta)?;
        let mut out = Vec::new();
        self.refine(lo, hi, eta, k, 0, &mut out)?;
        Ok(out)
    }

    fn refine(&self, lo: f64, hi: f64, eta: f64, k: i64, depth: u32, out: &mut Vec<(f64, u32)>) -> Result<()> {
        if k <= 0 {
            return Ok(());
        }
        let rect = Rectangle {
            x_lo: lo,
            x_hi: hi,
            y_half: eta,
        };
        let start = self.start_point(lo, hi);
        if hi - lo < 1e-12 * self.scale.max(1.0) || depth > 60 {
            let x = self.polish_multiple(start, &rect).map(|z| z.re).unwrap_or(start);
            out.push((x, k as u32));
            return Ok(());
        }
        if k == 1 {
            if let Some(z) = self.newton(Complex64::new(start, 0.0), &rect) {
                // Near a close pair |Q′| is small and roundoff alone can lift the
                // computed zero off the axis by evaluation error / |Q′|.
                if z.im.abs() <= 1e-9 * self.scale + 100.0 * self.root_error(z) {
                    out.push((z.re, 1));
                }
                // Otherwise a single nonreal zero: nothing real to report here.
                return Ok(());
            }
        } else if let Some(z) = self.polish_multiple(start, &rect) {
            if z.im.abs() <= 1e-6 * self.scale {
                if let Some(m) = self.multiplicity_at(z.re, k, lo, hi) {
                    out.push((self.sharpen(z, m, &rect), m));
                    return Ok(());
                }
            }
        }
        self.bisect(lo, hi, eta, depth, out)
    }

    fn bisect(&self, lo: f64, hi: f64, eta: f64, depth: u32, out: &mut Vec<(f64, u32)>) -> Result<()> {
        let w = hi - lo;
        let mid = self.best_of(lo + 0.5 * w, &[0.0, 0.1 * w, -0.1 * w, 0.2 * w, -0.2 * w]);
        for (l, r) in [(lo, mid), (mid, hi)] {
            let e = eta.min(0.5 * (r - l));
            let k = self.count_flexible(l, r, e)?;
            self.refine(l, r, e, k, depth + 1, out)?;
        }
        Ok(())
    }

    /// Real point of smallest `|Q|` among a few samples inside the cell.
    fn start_point(&self, lo: f64, hi: f64) -> f64 {
        (1..10)
            .map(|j| lo + (hi - lo) * j as f64 / 10.0)
            .map(|x| (x, self.modulus(x)))
            .fold(
                (0.5 * (lo + hi), f64::INFINITY),
                |best, c| if c.1 < best.1 { c } else { best },
            )
            .0
    }

    fn newton(&self, mut z: Complex64, rect: &Rectangle) -> Option<Complex64> {
        for _ in 0..100 {
            let (v, d) = self.q.evaluate_with_derivative(z);
            if v.norm() == 0.0 {
                return Some(z);
            }
            if d.norm() == 0.0 {
                return None;
            }
            let step = v / d;
            z -= step;
            if !rect.contains(z) {
                return None;
            }
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                return Some(z);
            }
        }
        // Converged to roundoff without meeting the step criterion.
        let (v, _) = self.q.evaluate_with_derivative(z);
        (v.norm() <= self.cfg.root_tol * self.q.wiener_norm()).then_some(z)
    }

    /// Schröder iteration `z ← z − u/u′`, `u = Q/Q′`, which converges
    /// quadratically to multiple zeros.
    fn polish_multiple(&self, start: f64, rect: &Rectangle) -> Option<Complex64> {
        let mut z = Complex64::new(start, 0.0);
        let mut best = (z, f64::INFINITY);
        for _ in 0..100 {
            let [v, d, dd] = self.q.evaluate_jet(z);
            if v.norm() < best.1 {
                best = (z, v.norm());
            }
            if v.norm() == 0.0 {
                return Some(z);
            }
            let denom = d * d - v * dd;
            if denom.norm() == 0.0 {
                break;
            }
            let step = v * d / denom;
            let next = z - step;
            if !rect.contains(next) {
                break;
            }
            z = next;
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        rect.contains(best.0).then_some(best.0)
    }

    /// A zero of multiplicity `m` is a simple zero of `Q^{(m-1)}`; Newton on
    /// that derivative recovers full precision where Schröder stalls near
    /// `ε^{1/m}`.
    fn sharpen(&self, z: Complex64, m: u32, rect: &Rectangle) -> f64 {
        let mut d = self.q.clone();
        for _ in 1..m {
            d = d.differentiate();
        }
        let mut w = z;
        for _ in 0..50 {
            let (v, dv) = d.evaluate_with_derivative(w);
            if dv.norm() == 0.0 || v.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            w -= step;
            if step.norm() <= 1e-15 * (1.0 + w.norm()) {
                break;
            }
        }
        if rect.contains(w) && (w - z).norm() < 1e-4 * self.scale {
            w.re
        } else {
            z.re
        }
    }

    /// `k` if exactly `k` zeros sit in some small square around `x` that still
    /// has clean boundary clearance; `None` if they only separate at a larger
    /// scale.
    fn multiplicity_at(&self, x: f64, k: i64, lo: f64, hi: f64) -> Option<u32> {
        let limit = (x - lo).min(hi - x);
        let mut r = (10.0 * self.cfg.root_tol).max(1e-7) * self.scale;
        while r < limit {
            match self.count(x - r, x + r, r) {
                Ok(c) if c == k => return Some(k as u32),
                Ok(_) => return None,
                Err(_) => r *= 4.0,
            }
        }
        None
    }

    fn covering_count(&self, x_lo: f64, x_hi: f64, strip: f64) -> Result<i64> {
        let mut last = None;
        for f in [1.0, 0.93, 1.07, 0.87] {
            match self.count(x_lo, x_hi, strip * f) {
                Ok(k) => return Ok(k),
                Err(e @ Error::BoundaryTooCloseToZero { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or(Error::ConvergenceFailure(x_lo)))
    }
}
