//! Windowed atomic measures on the line.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::zeros::ZeroSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub mass: Complex64,
}

/// Finitely many point masses inside a window. Sup-over-the-line quantities
/// are computed as sups over the window.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    window: (f64, f64),
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(window: (f64, f64), atoms: Vec<(f64, Complex64)>) -> Result<Self> {
        if !(window.0 <= window.1) {
            return Err(Error::InvalidInput(format!("bad window {window:?}")));
        }
        for w in atoms.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidInput("atom positions must increase".into()));
            }
        }
        for &(x, m) in &atoms {
            if !(x >= window.0 && x <= window.1) {
                return Err(Error::InvalidInput(format!("atom {x} outside window {window:?}")));
            }
            if m == Complex64::new(0.0, 0.0) || !m.re.is_finite() || !m.im.is_finite() {
                return Err(Error::InvalidInput(format!("bad mass {m} at {x}")));
            }
        }
        Ok(AtomicMeasure {
            window,
            atoms: atoms
                .into_iter()
                .map(|(position, mass)| Atom { position, mass })
                .collect(),
        })
    }

    pub fn empty(window: (f64, f64)) -> Self {
        AtomicMeasure {
            window,
            atoms: Vec::new(),
        }
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Mass at `position` (within `tol`), zero if there is no atom.
    pub fn mass_at(&self, position: f64, tol: f64) -> Complex64 {
        self.atoms
            .iter()
            .filter(|a| (a.position - position).abs() <= tol)
            .map(|a| a.mass)
            .sum()
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass.norm()).sum()
    }

    pub fn total_mass(&self) -> Complex64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// The measure translated by `h` (window moves with it).
    pub fn shift(&self, h: f64) -> Self {
        AtomicMeasure {
            window: (self.window.0 + h, self.window.1 + h),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    position: a.position + h,
                    mass: a.mass,
                })
                .collect(),
        }
    }

    /// Atoms with position in the open interval `(lo, hi)`.
    pub fn atoms_in_open(&self, lo: f64, hi: f64) -> &[Atom] {
        let start = self.atoms.partition_point(|a| a.position <= lo);
        let end = self.atoms.partition_point(|a| a.position < hi);
        &self.atoms[start..end.max(start)]
    }

    fn check_ball(&self, center: f64, radius: f64) -> Result<()> {
        let (lo, hi) = (center - radius, center + radius);
        if !(radius >= 0.0) || lo < self.window.0 || hi > self.window.1 {
            return Err(Error::BallExceedsWindow { lo, hi });
        }
        Ok(())
    }

    /// `μ(B(center, radius))` over the open ball.
    pub fn ball_mass(&self, center: f64, radius: f64) -> Result<Complex64> {
        self.check_ball(center, radius)?;
        Ok(self
            .atoms_in_open(center - radius, center + radius)
            .iter()
            .map(|a| a.mass)
            .sum())
    }

    /// `|μ|(B(center, radius))` over the open ball.
    pub fn ball_variation(&self, center: f64, radius: f64) -> Result<f64> {
        self.check_ball(center, radius)?;
        Ok(self
            .atoms_in_open(center - radius, center + radius)
            .iter()
            .map(|a| a.mass.norm())
            .sum())
    }

    /// `Σ mass·f(t − position)`, the convolution `μ⋆f` at `t`, over atoms
    /// within the kernel's support radius of `t`.
    ///
    /// That support must lie in the window. What lies beyond it is bounded
    /// through the measure's per-ball mass and reported alongside the value.
    pub fn convolve<K: Kernel + ?Sized>(&self, kernel: &K, t: f64) -> Result<Convolution> {
        let r = kernel.support_radius();
        let (lo, hi) = (t - r, t + r);
        if lo < self.window.0 || hi > self.window.1 {
            return Err(Error::SupportExceedsWindow { lo, hi });
        }
        let start = self.atoms.partition_point(|a| a.position < lo);
        let end = self.atoms.partition_point(|a| a.position <= hi);
        let value = self.atoms[start..end]
            .iter()
            .map(|a| a.mass * kernel.value(t - a.position))
            .sum();
        let truncation_bound = if kernel.is_compact() {
            0.0
        } else {
            kernel.tail_bound(self.translation_bound().unwrap_or_else(|_| self.total_variation()))
        };
        Ok(Convolution {
            value,
            truncation_bound,
        })
    }

    /// `sup_x |μ|(B(x, 1))`, sampled at unit balls centred on the atoms.
    pub fn translation_bound(&self) -> Result<f64> {
        if self.window.1 - self.window.0 < 2.0 {
            return Err(Error::WindowTooShort(format!(
                "translation bound needs a window of length 2, have {:?}",
                self.window
            )));
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| {
                // Atoms at distance exactly 1 (up to roundoff) are outside.
                let r = 1.0 - 1e-9;
                self.atoms_in_open(a.position - r, a.position + r)
                    .iter()
                    .map(|b| b.mass.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max))
    }
}

/// Counting measure of a zero multiset: mass = multiplicity.
pub fn comb_measure(zs: &ZeroSet) -> AtomicMeasure {
    AtomicMeasure {
        window: zs.window(),
        atoms: zs
            .zeros()
            .iter()
            .map(|&(x, m)| Atom {
                position: x,
                mass: Complex64::new(m as f64, 0.0),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convolution {
    pub value: Complex64,
    /// Bound on the contribution of atoms outside the kernel's effective support.
    pub truncation_bound: f64,
}

/// A convolution kernel with an effective support radius.
pub trait Kernel {
    fn value(&self, x: f64) -> Complex64;
    /// Beyond this radius the kernel is treated as zero.
    fn support_radius(&self) -> f64;
    /// Bound on `Σ |mass|·|f(x)|` over atoms beyond the support radius, for a
    /// measure with at most `per_ball` total variation in any unit ball.
    fn tail_bound(&self, per_ball: f64) -> f64;
    /// Whether the kernel vanishes identically beyond its support radius.
    fn is_compact(&self) -> bool {
        false
    }
}

/// `max(0, 1 − |x|/half_width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub half_width: f64,
}

impl Kernel for Triangle {
    fn value(&self, x: f64) -> Complex64 {
        Complex64::new((1.0 - x.abs() / self.half_width).max(0.0), 0.0)
    }

    fn support_radius(&self) -> f64 {
        self.half_width
    }

    fn tail_bound(&self, _per_ball: f64) -> f64 {
        0.0
    }

    fn is_compact(&self) -> bool {
        true
    }
}

/// Sliding-window density estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    /// Midpoint of the extreme window counts divided by the probe length.
    pub density: f64,
    /// Half the spread between the extremes.
    pub uncertainty: f64,
    pub min: f64,
    pub max: f64,
}

/// Extremes of `#A ∩ (x, x + l) / l` over windows `(x, x + l)` inside the
/// zero set's window, multiplicities counted.
pub fn density(zs: &ZeroSet, probe_length: f64) -> Result<DensityEstimate> {
    let (a, b) = zs.window();
    let l = probe_length;
    if !(l > 0.0) || l > 0.5 * (b - a) {
        return Err(Error::WindowTooShort(format!(
            "probe length {l} must be positive and at most half the window length {}",
            b - a
        )));
    }
    let xs = zs.expanded();
    // Multiset count in (lo, hi) and in [lo, hi).
    let open = |lo: f64, hi: f64| xs.partition_point(|&x| x < hi) - xs.partition_point(|&x| x <= lo);
    let half_open = |lo: f64, hi: f64| xs.partition_point(|&x| x < hi) - xs.partition_point(|&x| x < lo);
    let (x_min, x_max) = (a, b - l);
    let mut lo_count = usize::MAX;
    let mut hi_count = 0usize;
    let mut visit = |count: usize| {
        lo_count = lo_count.min(count);
        hi_count = hi_count.max(count);
    };
    visit(open(x_min, x_min + l));
    visit(open(x_max, x_max + l));
    for &p in &xs {
        // Intervals starting at a point exclude it; those starting just
        // before it include it.
        if p >= x_min && p <= x_max {
            visit(open(p, p + l));
        }
        if p > x_min && p <= x_max {
            visit(half_open(p, p + l));
        }
        let q = p - l;
        if q >= x_min && q <= x_max {
            visit(open(q, p));
        }
    }
    let (min, max) = (lo_count as f64 / l, hi_count as f64 / l);
    Ok(DensityEstimate {
        density: 0.5 * (min + max),
        uncertainty: 0.5 * (max - min),
        min,
        max,
    })
}
