//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qclab::{
    almost_periods, argument_principle_count, check_int_condition, comb_measure, density, diffraction_spectrum,
    find_real_zeros, log_derivative_from_spectrum, log_derivative_partial_fractions, probe_uniqueness,
    round_trip_report, select_height, verify_poisson, ExponentialSum, Rectangle, RoundTripOptions, SampledFunction,
    TestFunction, ToleranceConfig, Triangle, ZeroSet,
};

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn zeros(q: &ExponentialSum, window: (f64, f64)) -> Result<ZeroSet, String> {
    let s = select_height(q, &cfg()).map_err(e)?;
    find_real_zeros(q, window, s, &cfg()).map_err(e)
}

fn product_comb() -> ExponentialSum {
    ExponentialSum::comb_generator(1.0, 0.0)
        .mul(&ExponentialSum::comb_generator(2f64.sqrt(), 0.0), &cfg())
        .unwrap()
}

fn comb_self_duality() -> Outcome {
    let start = Instant::now();
    let q = ExponentialSum::comb_generator(1.0, 0.0);
    let zs = zeros(&q, (-20.0, 20.0))?;
    ensure!(zs.zeros().len() == 41, "{} zeros on [-20, 20]", zs.zeros().len());
    for (&(x, m), k) in zs.zeros().iter().zip(-20..=20) {
        ensure!((x - k as f64).abs() < 1e-9 && m == 1, "zero {x} (mult {m}) vs {k}");
    }
    let mut spectra = Vec::new();
    for s in [0.4, 0.8, 1.2] {
        let sp = diffraction_spectrum(&q, s, 5.0, &cfg()).map_err(e)?;
        for k in -4..=4 {
            let b = sp.measure.mass_at(k as f64, 1e-9);
            ensure!((b - 1.0).norm() < 1e-8, "s={s}: b_{k} = {b}");
        }
        let stray = sp
            .measure
            .atoms()
            .iter()
            .filter(|a| (a.position - a.position.round()).abs() > 1e-9 && a.mass.norm() > 1e-8)
            .count();
        ensure!(stray == 0, "s={s}: {stray} atoms off the integers");
        spectra.push(sp.measure);
    }
    let mut spread: f64 = 0.0;
    for k in -4..=4 {
        let b: Vec<Complex64> = spectra.iter().map(|m| m.mass_at(k as f64, 1e-9)).collect();
        spread = spread.max((b[0] - b[1]).norm()).max((b[0] - b[2]).norm());
    }
    ensure!(spread < 1e-8, "height spread {spread:e}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!(
        "41 integer zeros, b_k = 1 across heights (spread {spread:.1e}), {elapsed:.2?}"
    ))
}

fn density_equals_mass_at_origin() -> Outcome {
    let q = ExponentialSum::comb_generator(2.0 / 3.0, 0.0);
    let s = select_height(&q, &cfg()).map_err(e)?;
    let b0 = diffraction_spectrum(&q, s, 3.0, &cfg()).map_err(e)?.b0();
    ensure!((b0 - 2.0 / 3.0).abs() < 1e-8, "b0 = {b0}");
    let zs = zeros(&q, (0.0, 300.0))?;
    let est = density(&zs, 150.0).map_err(e)?;
    ensure!((est.density - b0).abs() < 1e-2, "density {} vs b0 {b0}", est.density);
    Ok(format!("b0 = {b0:.12}, windowed density {:.6}", est.density))
}

fn poisson_formula() -> Outcome {
    let g = TestFunction::gaussian(1.0, 0.0, 0.0).map_err(e)?;
    let direct = |shift: f64| -> f64 { (-60..=60).map(|n| (-PI * (n as f64 + shift).powi(2)).exp()).sum() };
    let alternating: f64 = (-60..=60)
        .map(|k: i32| (-PI * (k * k) as f64).exp() * if k % 2 == 0 { 1.0 } else { -1.0 })
        .sum();
    ensure!((direct(0.0) - 1.08643481).abs() < 1e-8, "theta oracle {}", direct(0.0));
    let mut lines = Vec::new();
    for (beta, lhs_oracle, rhs_oracle) in [(0.0, direct(0.0), direct(0.0)), (0.5, direct(0.5), alternating)] {
        let q = ExponentialSum::comb_generator(1.0, beta);
        let mu = comb_measure(&zeros(&q, (-8.0, 8.0))?);
        let s = select_height(&q, &cfg()).map_err(e)?;
        let sp = diffraction_spectrum(&q, s, 8.0, &cfg()).map_err(e)?;
        let c = verify_poisson(&mu, &sp.measure, &g, sp.truncation_budget).map_err(e)?;
        ensure!(
            (c.lhs - lhs_oracle).norm() < 1e-8,
            "beta={beta}: lhs {} vs {lhs_oracle}",
            c.lhs
        );
        ensure!(
            (c.rhs - rhs_oracle).norm() < 1e-8,
            "beta={beta}: rhs {} vs {rhs_oracle}",
            c.rhs
        );
        ensure!(c.residual < 1e-8, "beta={beta}: residual {:e}", c.residual);
        lines.push(format!("beta={beta}: {:.10} (res {:.1e})", c.lhs.re, c.residual));
    }
    Ok(lines.join(", "))
}

fn log_derivative_identity() -> Outcome {
    let n = 100_000;
    let zs = ZeroSet::from_positions(
        (-(n as f64) - 1.0, n as f64 + 1.0),
        (-(n + 1)..=(n + 1)).map(|k| k as f64),
    )
    .map_err(e)?;
    let z = Complex64::new(0.0, 1.0);
    let pf = log_derivative_partial_fractions(&zs, z, n as usize).map_err(e)?;
    let q = ExponentialSum::comb_generator(1.0, 0.0);
    let sp = diffraction_spectrum(&q, 1.0, 12.0, &cfg()).map_err(e)?;
    let ls = log_derivative_from_spectrum(&sp.measure, sp.b0(), z).map_err(e)?;
    let oracle = Complex64::new(0.0, -PI / PI.tanh());
    ensure!((oracle.im + 3.153348).abs() < 1e-6, "oracle {oracle}");
    ensure!(
        (pf.value - oracle).norm() < 1e-4,
        "partial fractions {} vs {oracle}",
        pf.value
    );
    ensure!(
        (ls.value - oracle).norm() < 1e-4,
        "spectrum side {} vs {oracle}",
        ls.value
    );
    Ok(format!(
        "partial fractions {:.7}i, spectrum side {:.7}i",
        pf.value.im, ls.value.im
    ))
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let opts = RoundTripOptions {
        y0: Some(1.0),
        ..Default::default()
    };
    let cases = [
        ("comb", ExponentialSum::comb_generator(1.0, 0.0), 1e-5),
        ("shifted comb", ExponentialSum::comb_generator(1.0, 0.3), 1e-5),
        ("product comb", product_comb(), 1e-4),
    ];
    let mut lines = Vec::new();
    for (name, q, tol) in cases {
        let r = round_trip_report(&q, (-10.0, 10.0), &cfg(), &opts).map_err(e)?;
        let expected = zeros(&q, (-10.0, 10.0))?.expanded().len();
        ensure!(
            r.matched_zero_pairs.len() == expected,
            "{name}: matched {} of {expected}",
            r.matched_zero_pairs.len()
        );
        ensure!(
            r.max_displacement < tol,
            "{name}: displacement {:e}",
            r.max_displacement
        );
        ensure!(
            r.ratio_log_slope.re.abs() < 1e-4,
            "{name}: alpha {:e}",
            r.ratio_log_slope.re
        );
        lines.push(format!(
            "{name} {:.1e}/{:.1e}",
            r.max_displacement,
            r.ratio_log_slope.re.abs()
        ));
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("{} ({elapsed:.2?})", lines.join(", ")))
}

fn random_sum(max_terms: usize) -> impl Strategy<Value = ExponentialSum> {
    prop::collection::vec((-3.0..3.0f64, -1.0..1.0f64, -1.0..1.0f64), 0..=max_terms).prop_map(|raw| {
        ExponentialSum::normalize(raw.into_iter().map(|(w, a, b)| (w, Complex64::new(a, b))), &cfg()).unwrap()
    })
}

/// Sum of `|q|·|e^{2πiωz}|`, the scale against which evaluation error is measured.
fn majorant(s: &ExponentialSum, z: Complex64) -> f64 {
    s.terms()
        .iter()
        .map(|t| t.coeff.norm() * (-2.0 * PI * t.omega * z.im).exp())
        .sum()
}

/// `H` on the lattice `(1/den)Z ∩ [-3, 3]` (two-sided) or `(1/den)Z ∩ (0, 3]`,
/// rescaled to Wiener norm `r`.
fn lattice_remainder(max_terms: usize, den: i32, two_sided: bool) -> impl Strategy<Value = ExponentialSum> {
    let lo = if two_sided { -3 * den } else { 1 };
    (
        prop::collection::vec((lo..=3 * den, -1.0..1.0f64, -1.0..1.0f64), 1..=max_terms),
        0.05..0.9f64,
    )
        .prop_map(move |(raw, r)| {
            let h = ExponentialSum::normalize(
                raw.into_iter()
                    .filter(|&(k, _, _)| k != 0)
                    .map(|(k, a, b)| (k as f64 / den as f64, Complex64::new(a, b))),
                &cfg(),
            )
            .unwrap();
            let norm = h.wiener_norm();
            if norm == 0.0 {
                h
            } else {
                h.scale(Complex64::new(r / norm, 0.0))
            }
        })
}

fn algebra_laws() -> Outcome {
    let config = Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config.clone(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (random_sum(50), random_sum(50), -2.0..2.0f64, -0.5..0.5f64);
    runner
        .run(&strategy, |(p, q, x, y)| {
            let c = cfg();
            let (np, nq) = (p.wiener_norm(), q.wiener_norm());
            let prod = p.mul(&q, &c).unwrap();
            prop_assert!(prod.wiener_norm() <= np * nq * (1.0 + 1e-12) + 1e-12);
            prop_assert!(p.add(&q, &c).unwrap().wiener_norm() <= (np + nq) * (1.0 + 1e-12) + 1e-12);
            let z = Complex64::new(x, y);
            let err = (prod.evaluate(z) - p.evaluate(z) * q.evaluate(z)).norm();
            let scale = majorant(&p, z) * majorant(&q, z);
            prop_assert!(
                err <= 1e-10 * scale.max(1e-300),
                "evaluation error {err:e} at scale {scale:e}"
            );
            let sum_err = (p.add(&q, &c).unwrap().evaluate(z) - p.evaluate(z) - q.evaluate(z)).norm();
            prop_assert!(sum_err <= 1e-10 * (majorant(&p, z) + majorant(&q, z)).max(1e-300));
            Ok(())
        })
        .map_err(|f| format!("sum laws: {f}"))?;

    let one = ExponentialSum::constant(Complex64::new(1.0, 0.0));
    let worst = std::cell::Cell::new(0.0f64);
    let mut runner = TestRunner::new_with_rng(config.clone(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&lattice_remainder(50, 8, false), |h| {
            let c = cfg();
            let band = 3.0;
            let (l, _) = h.log1p_sum_one_sided(band, &c).unwrap();
            let (back, _) = l.exp_sum_one_sided(band, &c).unwrap();
            let err = back.sub(&one.add(&h, &c).unwrap(), &c).unwrap().wiener_norm();
            prop_assert!(err < 1e-8, "one-sided round trip error {err:e}");
            worst.set(worst.get().max(err));
            Ok(())
        })
        .map_err(|f| format!("one-sided exp/log1p: {f}"))?;
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&lattice_remainder(3, 2, true), |h| {
            let c = cfg();
            let l = h.log1p_sum(&c).map_err(|err| TestCaseError::fail(err.to_string()))?;
            let back = l.exp_sum(&c).map_err(|err| TestCaseError::fail(err.to_string()))?;
            let err = back.sub(&one.add(&h, &c).unwrap(), &c).unwrap().wiener_norm();
            prop_assert!(err < 1e-8, "two-sided round trip error {err:e}");
            worst.set(worst.get().max(err));
            Ok(())
        })
        .map_err(|f| format!("two-sided exp/log1p: {f}"))?;
    Ok(format!("3 x 200 cases, worst exp(log1p H) error {:.1e}", worst.get()))
}

fn zero_count_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = cfg();
    let mut total = 0;
    for case in 0..50 {
        let factors = rng.gen_range(1..=4);
        let mut q = ExponentialSum::constant(Complex64::new(1.0, 0.0));
        let mut progressions = Vec::new();
        for _ in 0..factors {
            let alpha = rng.gen_range(0.3..2.0);
            let beta = rng.gen_range(0.0..1.0);
            progressions.push((alpha, beta));
            q = q.mul(&ExponentialSum::comb_generator(alpha, beta), &c).map_err(e)?;
        }
        // Window ends kept 0.05 away from every zero.
        let clear = |x: f64| {
            progressions
                .iter()
                .all(|&(a, b)| ((x - b) * a - ((x - b) * a).round()).abs() / a > 0.05)
        };
        let mut lo = -rng.gen_range(3.0..8.0);
        while !clear(lo) {
            lo -= 0.01;
        }
        let mut hi = rng.gen_range(3.0..8.0);
        while !clear(hi) {
            hi += 0.01;
        }
        let s = select_height(&q, &c).map_err(e)?;
        let found = find_real_zeros(&q, (lo, hi), s, &c).map_err(|err| format!("case {case}: {err}"))?;
        let rect = Rectangle::new(lo, hi, s).map_err(e)?;
        let counted = argument_principle_count(&q, &rect, &c).map_err(|err| format!("case {case}: {err}"))?;
        let expected: i64 = progressions
            .iter()
            .map(|&(a, b)| (((hi - b) * a).floor() - ((lo - b) * a).ceil()) as i64 + 1)
            .sum();
        ensure!(
            found.total_multiplicity() as i64 == counted && counted == expected,
            "case {case}: real {}, contour {counted}, progressions {expected}",
            found.total_multiplicity()
        );
        total += counted;
    }
    Ok(format!("50 products, {total} zeros, all counts agree"))
}

fn uniqueness_probe() -> Outcome {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let w = (-201.0, 201.0);
    let mu = comb_measure(&zeros(&ExponentialSum::comb_generator(1.0, 0.0), w)?);
    let nu = comb_measure(&zeros(&ExponentialSum::comb_generator(1.0 / phi, 0.0), w)?);
    let radii = [50.0, 100.0, 200.0];
    let r = probe_uniqueness(&mu, &nu, &radii, 1e-9).map_err(e)?;
    for (&(radius, value), &big_r) in r.per_radius.iter().zip(&radii) {
        // Open-ball counts of Z and φZ; the origin atom cancels.
        let count = |step: f64| 2.0 * ((big_r / step).ceil() - 1.0) + 1.0;
        let oracle = (count(1.0) + count(phi) - 2.0) / big_r;
        ensure!(radius == big_r, "radius {radius}");
        ensure!((value - oracle).abs() < 1e-12, "R={big_r}: {value} vs count {oracle}");
        ensure!(value >= 0.5, "R={big_r}: {value}");
    }
    Ok(format!("min |mu - nu|(B)/R = {:.4}", r.verdict_metric))
}

fn almost_periodicity() -> Outcome {
    let q = product_comb();
    let kernel = Triangle { half_width: 0.4 };
    // Shifts up to 1e4 are compared over at least 1e4 of overlap.
    let mu = comb_measure(&zeros(&q, (-1.0, 20_001.0))?);
    let step = 0.05;
    let g = SampledFunction::convolution(&mu, &kernel, 0.0, step, 400_001).map_err(e)?;
    let span = 10_000.0;
    let ap = almost_periods(&g, 0.1, (0.0, span), step).map_err(e)?;
    let mut gap: f64 = 0.0;
    let mut last = 0.0;
    for &t in ap.periods.iter().chain(std::iter::once(&span)) {
        gap = gap.max(t - last);
        last = t;
    }
    ensure!(gap <= 100.0, "largest gap {gap}");
    Ok(format!(
        "{} almost periods on [0, 1e4], largest gap {gap:.2}",
        ap.periods.len()
    ))
}

fn int_condition() -> Outcome {
    let q = ExponentialSum::comb_generator(0.4, 0.0);
    let s = select_height(&q, &cfg()).map_err(e)?;
    let sp = diffraction_spectrum(&q, s, 3.0, &cfg()).map_err(e)?;
    let v = check_int_condition(&sp.measure, &cfg()).map_err(e)?.value;
    // 0.4/0.4 + 0.4/0.8.
    ensure!((v - 1.5).abs() < 1e-6, "sum {v}");
    Ok(format!("sum |b|/gamma over (0,1) = {v:.10}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("comb self-duality", comb_self_duality),
        ("density equals b0", density_equals_mass_at_origin),
        ("Poisson summation", poisson_formula),
        ("log-derivative identity", log_derivative_identity),
        ("round trip", round_trip),
        ("algebra laws", algebra_laws),
        ("zero-count cross-validation", zero_count_cross_validation),
        ("uniqueness probe", uniqueness_probe),
        ("almost periodicity", almost_periodicity),
        ("int condition", int_condition),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{:.1?}]", k + 1, start.elapsed()),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {reason} [{:.1?}]", k + 1, start.elapsed());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
