//! Finite-window probes of uniqueness, perturbation and lattice structure.

use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::zeros::ZeroSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe_name: String,
    pub per_radius: Vec<(f64, f64)>,
    pub verdict_metric: f64,
}

fn check_radii(radii: &[f64], windows: &[(f64, f64)]) -> Result<()> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[0] < w[1])) || !(radii[0] > 0.0) {
        return Err(Error::InvalidInput(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    let r = radii[radii.len() - 1];
    for &(lo, hi) in windows {
        if -r < lo || r > hi {
            return Err(Error::WindowTooSmall(format!(
                "ball of radius {r} does not fit in ({lo}, {hi})"
            )));
        }
    }
    Ok(())
}

/// `|μ − ν|(B(0, R))/R` per radius; the verdict is the smallest value.
pub fn probe_uniqueness(mu: &AtomicMeasure, nu: &AtomicMeasure, radii: &[f64], tol: f64) -> Result<ProbeReport> {
    check_radii(radii, &[mu.window(), nu.window()])?;
    let per_radius: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let a = mu.atoms_in_open(-r, r);
            let b = nu.atoms_in_open(-r, r);
            // Merge the two sorted atom lists, matching positions within tol.
            let (mut i, mut j, mut tv) = (0, 0, 0.0);
            while i < a.len() || j < b.len() {
                let take_a = j >= b.len() || (i < a.len() && a[i].position < b[j].position - tol);
                let take_b = i >= a.len() || (j < b.len() && b[j].position < a[i].position - tol);
                if take_a {
                    tv += a[i].mass.norm();
                    i += 1;
                } else if take_b {
                    tv += b[j].mass.norm();
                    j += 1;
                } else {
                    tv += (a[i].mass - b[j].mass).norm();
                    i += 1;
                    j += 1;
                }
            }
            (r, tv / r)
        })
        .collect();
    let verdict_metric = per_radius.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(ProbeReport {
        probe_name: "uniqueness".into(),
        per_radius,
        verdict_metric,
    })
}

/// `|μ(B(0, R))|/R` per radius; the verdict is the smallest value.
pub fn probe_corollary1(mu: &AtomicMeasure, radii: &[f64]) -> Result<ProbeReport> {
    check_radii(radii, &[mu.window()])?;
    let per_radius: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| Ok((r, mu.ball_mass(0.0, r)?.norm() / r)))
        .collect::<Result<_>>()?;
    let verdict_metric = per_radius.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(ProbeReport {
        probe_name: "corollary1".into(),
        per_radius,
        verdict_metric,
    })
}

/// Largest `|a_n − c_n|` over pairs in each shell `R_{k−1} ≤ |a_n| < R_k`,
/// `R_k = kW/8` with `W` the half-width of the common window.
///
/// Both sets use the symmetric numbering; the index offset between them
/// (within ±2) is chosen to minimise the summed displacement. The verdict is
/// the value on the outermost nonempty shell.
pub fn probe_perturbation(a: &ZeroSet, c: &ZeroSet) -> Result<ProbeReport> {
    const SHELLS: usize = 8;
    const EDGE_MARGIN: usize = 2;
    let (sa, sc) = (a.signed()?, c.signed()?);
    let lo = a.window().0.max(c.window().0);
    let hi = a.window().1.min(c.window().1);
    let w = (-lo).min(hi);
    if !(w > 0.0) {
        return Err(Error::WindowTooSmall("common window must contain 0".into()));
    }
    let count_a = a.restrict(-w, w).total_multiplicity() as usize;
    let count_c = c.restrict(-w, w).total_multiplicity() as usize;
    if count_a.abs_diff(count_c) > EDGE_MARGIN {
        return Err(Error::CountMismatch(count_a, count_c));
    }
    let pairs_for = |offset: i64| -> Vec<(f64, f64)> {
        sa.iter()
            .filter_map(|(n, x)| sc.get(n + offset).map(|y| (x, y)))
            .filter(|&(x, y)| x.abs() < w && y.abs() < w)
            .collect()
    };
    let total = |p: &[(f64, f64)]| p.iter().map(|(x, y)| (x - y).abs()).sum::<f64>();
    let pairs = (-2..=2)
        .map(pairs_for)
        .filter(|p| p.len() + 2 * EDGE_MARGIN >= count_a.min(count_c))
        .min_by(|p, q| total(p).total_cmp(&total(q)))
        .ok_or(Error::CountMismatch(count_a, count_c))?;
    let per_radius: Vec<(f64, f64)> = (1..=SHELLS)
        .map(|k| {
            let (r0, r1) = (w * (k - 1) as f64 / SHELLS as f64, w * k as f64 / SHELLS as f64);
            let v = pairs
                .iter()
                .filter(|(x, _)| x.abs() >= r0 && x.abs() < r1)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            (r1, v)
        })
        .collect();
    let verdict_metric = per_radius.iter().rev().map(|p| p.1).find(|&v| v > 0.0).unwrap_or(0.0);
    Ok(ProbeReport {
        probe_name: "perturbation".into(),
        per_radius,
        verdict_metric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeOptions {
    pub max_classes: usize,
    /// Number of largest positive atoms used to propose periods.
    pub dominant_atoms: usize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions {
            max_classes: 8,
            dominant_atoms: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeFit {
    pub period: f64,
    /// One representative residue per class, in `[0, period)`.
    pub residues: Vec<f64>,
    /// Largest spread of residues within a class.
    pub width: f64,
    /// Whether every class is fully occupied across the window.
    pub occupied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeProbe {
    /// `per_radius` holds `(candidate period, best width)`.
    pub report: ProbeReport,
    pub best: LatticeFit,
}

/// Fit the zero set by a union of at most `max_classes` progressions with a
/// common period taken from the spectrum.
///
/// Candidates are `1/γ` for the dominant positive atoms and for their pairwise
/// differences. Fits whose classes are not fully occupied lose to any fit that
/// is; among the rest the smallest width wins, then the fewest classes.
pub fn probe_lattice_structure(
    zs: &ZeroSet,
    mhat: &AtomicMeasure,
    cfg: &ToleranceConfig,
    opts: &LatticeOptions,
) -> Result<LatticeProbe> {
    let gap = zs.min_gap()?;
    if !(gap > 0.0) {
        return Err(Error::InvalidInput("zero set has a vanishing gap".into()));
    }
    let candidates = candidate_periods(mhat, cfg, opts);
    if candidates.is_empty() {
        return Err(Error::NoCandidatePeriods);
    }
    let xs: Vec<f64> = zs.zeros().iter().map(|z| z.0).collect();
    let mut per_radius = Vec::with_capacity(candidates.len());
    let mut best: Option<(LatticeFit, usize)> = None;
    for &p in &candidates {
        let mut best_here: Option<(LatticeFit, usize)> = None;
        for n in 1..=opts.max_classes {
            let Some(fit) = fit_classes(&xs, zs.window(), p, n) else {
                continue;
            };
            if better(&fit, n, best_here.as_ref()) {
                best_here = Some((fit, n));
            }
        }
        if let Some((fit, n)) = best_here {
            per_radius.push((p, fit.width));
            if better(&fit, n, best.as_ref()) {
                best = Some((fit, n));
            }
        }
    }
    let (best, _) = best.ok_or(Error::NoCandidatePeriods)?;
    Ok(LatticeProbe {
        report: ProbeReport {
            probe_name: "lattice".into(),
            per_radius,
            verdict_metric: best.width,
        },
        best,
    })
}

fn better(fit: &LatticeFit, n: usize, incumbent: Option<&(LatticeFit, usize)>) -> bool {
    const SAME: f64 = 1e-9;
    let Some((b, bn)) = incumbent else {
        return true;
    };
    if fit.occupied != b.occupied {
        return fit.occupied;
    }
    if (fit.width - b.width).abs() > SAME {
        return fit.width < b.width;
    }
    if n != *bn {
        return n < *bn;
    }
    fit.period < b.period - SAME
}

fn candidate_periods(mhat: &AtomicMeasure, cfg: &ToleranceConfig, opts: &LatticeOptions) -> Vec<f64> {
    let mut atoms: Vec<(f64, f64)> = mhat
        .atoms_in_open(cfg.freq_merge_tol, f64::INFINITY)
        .iter()
        .map(|a| (a.position, a.mass.norm()))
        .collect();
    atoms.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.total_cmp(&y.0)));
    atoms.truncate(opts.dominant_atoms);
    let mut freqs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            let d = (a.0 - b.0).abs();
            if d > cfg.freq_merge_tol {
                freqs.push(d);
            }
        }
    }
    let mut periods: Vec<f64> = freqs.into_iter().map(|g| 1.0 / g).collect();
    periods.sort_by(f64::total_cmp);
    periods.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    periods
}

/// Split residues mod `p` into `n` circular clusters at the `n` largest gaps.
fn fit_classes(xs: &[f64], window: (f64, f64), p: f64, n: usize) -> Option<LatticeFit> {
    if xs.len() < n {
        return None;
    }
    let mut res: Vec<f64> = xs.iter().map(|x| x.rem_euclid(p)).collect();
    res.sort_by(f64::total_cmp);
    let m = res.len();
    // Gap after residue i (circularly).
    let mut gaps: Vec<(f64, usize)> = (0..m)
        .map(|i| {
            let next = if i + 1 < m { res[i + 1] } else { res[0] + p };
            (next - res[i], i)
        })
        .collect();
    gaps.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut cuts: Vec<usize> = gaps[..n].iter().map(|g| g.1).collect();
    cuts.sort_unstable();
    let expected = (window.1 - window.0) / p;
    let mut width: f64 = 0.0;
    let mut residues = Vec::with_capacity(n);
    let mut occupied = true;
    for (k, &cut) in cuts.iter().enumerate() {
        // Cluster runs from just after the previous cut to `cut`, circularly.
        let prev = cuts[(k + n - 1) % n];
        let start = (prev + 1) % m;
        let len = if cut >= start {
            cut - start + 1
        } else {
            cut + m - start + 1
        };
        let first = res[start];
        let last = res[cut] + if cut < start { p } else { 0.0 };
        width = width.max(last - first);
        residues.push(first);
        if (len as f64 - expected).abs() > 1.0 + 1e-9 {
            occupied = false;
        }
    }
    residues.sort_by(f64::total_cmp);
    Some(LatticeFit {
        period: p,
        residues,
        width,
        occupied,
    })
}
