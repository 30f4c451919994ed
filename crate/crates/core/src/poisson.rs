//! Checking `Σ a_λ g(λ) = Σ b_γ ĝ(−γ)` against Gaussian test functions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;

const PI: f64 = std::f64::consts::PI;
/// Truncation radius in units of the width, on both sides.
const RADIUS_FACTOR: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Gaussian,
}

/// `g(x) = e^{−π(x−t0)²/σ²}·e^{2πiω0x}` with
/// `ĝ(ξ) = σ·e^{−πσ²(ξ−ω0)²}·e^{−2πit0(ξ−ω0)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub kind: TestKind,
    pub t0: f64,
    pub sigma: f64,
    pub omega0: f64,
    pub truncation_radius: f64,
}

impl TestFunction {
    pub fn gaussian(sigma: f64, t0: f64, omega0: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !t0.is_finite() || !omega0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bad Gaussian parameters sigma={sigma}, t0={t0}, omega0={omega0}"
            )));
        }
        Ok(TestFunction {
            kind: TestKind::Gaussian,
            t0,
            sigma,
            omega0,
            truncation_radius: RADIUS_FACTOR * sigma,
        })
    }

    /// Truncation radius on the transform side.
    pub fn dual_radius(&self) -> f64 {
        RADIUS_FACTOR / self.sigma
    }

    pub fn value(&self, x: f64) -> Complex64 {
        self.value_at(Complex64::new(x, 0.0))
    }

    /// The entire extension of `g`.
    pub fn value_at(&self, z: Complex64) -> Complex64 {
        let u = (z - self.t0) / self.sigma;
        (-PI * u * u + Complex64::new(0.0, 2.0 * PI * self.omega0) * z).exp()
    }

    pub fn transform(&self, xi: f64) -> Complex64 {
        let d = xi - self.omega0;
        let u = d * self.sigma;
        Complex64::from_polar(self.sigma * (-PI * u * u).exp(), -2.0 * PI * self.t0 * d)
    }

    /// Bound on `Σ|a||g|` over atoms beyond the truncation radius, for a
    /// measure with at most `per_ball` variation in any unit ball.
    fn tail(&self, per_ball: f64) -> f64 {
        gaussian_tail(self.truncation_radius / self.sigma, 2.0 / self.sigma, per_ball)
    }

    fn dual_tail(&self, per_ball: f64) -> f64 {
        self.sigma * gaussian_tail(self.dual_radius() * self.sigma, 2.0 * self.sigma, per_ball)
    }
}

/// `2·m·Σ_{k≥0} e^{−π(u + k·du)²}` bounded by a geometric series.
fn gaussian_tail(u: f64, du: f64, m: f64) -> f64 {
    let ratio = (-2.0 * PI * u * du).exp();
    2.0 * m * (-PI * u * u).exp() / (1.0 - ratio)
}

/// Widths × centers × modulations, in that nesting order.
pub fn gaussian_family(widths: &[f64], centers: &[f64], modulations: &[f64]) -> Result<Vec<TestFunction>> {
    if let Some(w) = widths.iter().find(|w| !(0.2..=5.0).contains(*w)) {
        return Err(Error::InvalidInput(format!("width {w} outside [0.2, 5]")));
    }
    let mut out = Vec::with_capacity(widths.len() * centers.len() * modulations.len());
    for &s in widths {
        for &t in centers {
            for &w in modulations {
                out.push(TestFunction::gaussian(s, t, w)?);
            }
        }
    }
    Ok(out)
}

/// The 27-member default family.
pub fn default_gaussian_family() -> Vec<TestFunction> {
    gaussian_family(&[0.5, 1.0, 2.0], &[-1.0, 0.0, 1.0], &[-0.25, 0.0, 0.25]).expect("default family is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// Truncation tails on both sides plus the propagated spectrum budget.
    pub budget: f64,
}

fn per_ball(m: &AtomicMeasure) -> f64 {
    m.translation_bound().unwrap_or_else(|_| m.total_variation())
}

/// Both sides of the summation formula by direct summation.
///
/// With `μ̂ = Σ b_γ δ_γ` the transform `∫e^{−2πixξ}dμ(x)`, the identity reads
/// `Σ a_λ g(λ) = Σ b_γ ĝ(−γ)`; for the Hermitian spectra of real combs this is
/// the same as pairing with `conj(b_γ)`. `spectrum_budget` is the per-atom
/// error bound of `muhat`.
pub fn verify_poisson(
    mu: &AtomicMeasure,
    muhat: &AtomicMeasure,
    f: &TestFunction,
    spectrum_budget: f64,
) -> Result<PoissonCheck> {
    let (lo, hi) = (f.t0 - f.truncation_radius, f.t0 + f.truncation_radius);
    if lo < mu.window().0 || hi > mu.window().1 {
        return Err(Error::SupportExceedsWindow { lo, hi });
    }
    let rho = f.dual_radius();
    let (dlo, dhi) = (-f.omega0 - rho, -f.omega0 + rho);
    if dlo < muhat.window().0 || dhi > muhat.window().1 {
        return Err(Error::SupportExceedsWindow { lo: dlo, hi: dhi });
    }
    let lhs = mu.atoms().iter().map(|a| a.mass * f.value(a.position)).sum();
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut weight = 0.0;
    for a in muhat.atoms() {
        let g = f.transform(-a.position);
        rhs += a.mass * g;
        weight += g.norm();
    }
    let budget = f.tail(per_ball(mu)) + f.dual_tail(per_ball(muhat)) + spectrum_budget * weight;
    Ok(PoissonCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        budget,
    })
}

/// [`verify_poisson`] for every member of `family`, in order.
pub fn verify_family(
    mu: &AtomicMeasure,
    muhat: &AtomicMeasure,
    family: &[TestFunction],
    spectrum_budget: f64,
) -> Result<Vec<PoissonCheck>> {
    family
        .par_iter()
        .map(|f| verify_poisson(mu, muhat, f, spectrum_budget))
        .collect()
}
