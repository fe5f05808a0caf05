use std::f64::consts::{FRAC_PI_2, PI, TAU};

use pdamp_core::fit::{fit_linear, fit_sinusoid, phase_lead, slope_stats, wrap_angle, LinearFit};
use pdamp_core::forces::{crushing_force, max_force_vs_wavelength, shear_force, Monotonicity};
use pdamp_core::model::{SinusoidFit, Trace, Unit};
use pdamp_core::Error;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves the 3×3 normal equations of the fixed-λ sinusoid basis by
/// Cramer's rule. Also returns the pseudo-inverse rows (AᵀA)⁻¹Aᵀ so noise
/// propagation can be bounded.
fn normal_equations(xs: &[f64], ys: &[f64], lambda: f64) -> ([f64; 3], Vec<[f64; 3]>) {
    let basis = |x: f64| {
        let t = TAU * x / lambda;
        [1.0, t.cos(), t.sin()]
    };
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let b = basis(x);
        for i in 0..3 {
            aty[i] += b[i] * y;
            for j in 0..3 {
                ata[i][j] += b[i] * b[j];
            }
        }
    }
    let d = det3(ata);
    let solve = |rhs: [f64; 3]| {
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut m = ata;
            for r in 0..3 {
                m[r][k] = rhs[r];
            }
            *o = det3(m) / d;
        }
        out
    };
    let pinv_cols = xs.iter().map(|&x| solve(basis(x))).collect();
    (solve(aty), pinv_cols)
}

#[test]
fn noisy_sinusoid_matches_normal_equations_and_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0153);
    let truth = [4.6, 0.166, 0.712];
    let lambda = 40.0;
    for &eps in &[0.01, 0.1, 0.5] {
        let n = 97;
        let xs: Vec<f64> = (0..n).map(|i| 3.0 + i as f64 * 1.5 * lambda / n as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let t = TAU * x / lambda;
                truth[0] + truth[1] * t.cos() + truth[2] * t.sin() + rng.random_range(-eps..eps)
            })
            .collect();
        let fit = fit_sinusoid(&Trace::new(xs.clone(), ys.clone(), Unit::Lbf).unwrap(), lambda).unwrap();
        let got = [fit.a0, fit.a1, fit.a2];
        let (oracle, pinv) = normal_equations(&xs, &ys, lambda);
        for k in 0..3 {
            assert!((got[k] - oracle[k]).abs() < 1e-9, "ε={eps} coef {k}: {} vs {}", got[k], oracle[k]);
            let bound = eps * pinv.iter().map(|row| row[k].abs()).sum::<f64>();
            assert!((got[k] - truth[k]).abs() <= bound, "ε={eps} coef {k} outside {bound}");
        }
    }
}

#[test]
fn sinusoid_residual_orthogonal_to_basis() {
    let lambda = 60.0;
    let xs: Vec<f64> = (0..50).map(|i| i as f64 * 1.3).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| (0.05 * x).exp() + (x / 7.0).sin()).collect();
    let fit = fit_sinusoid(&Trace::new(xs.clone(), ys.clone(), Unit::Lbf).unwrap(), lambda).unwrap();
    let scale: f64 = ys.iter().map(|y| y.abs()).sum();
    for col in 0..3 {
        let dot: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let t = TAU * x / lambda;
                let b = [1.0, t.cos(), t.sin()][col];
                b * (y - fit.evaluate(x))
            })
            .sum();
        assert!(dot.abs() < 1e-9 * scale, "column {col}: {dot}");
    }
}

#[test]
fn tabulated_slope_fits() {
    let fits = |slopes: &[f64]| -> Vec<LinearFit> {
        slopes.iter().map(|&m| LinearFit { slope: m, intercept: 0.0, rms_error: 0.0 }).collect()
    };
    let (mean, sd) = slope_stats(&fits(&[1.102, 1.132, 1.184, 1.305])).unwrap();
    assert!((mean - 1.18).abs() < 0.005 && (sd - 0.089).abs() < 0.0005, "{mean} ± {sd}");
    let (mean, sd) = slope_stats(&fits(&[0.548, 0.234, 0.207, 0.167])).unwrap();
    assert!((mean - 0.289).abs() < 0.0005 && (sd - 0.175).abs() < 0.0005, "{mean} ± {sd}");
}

#[test]
fn lead_sign_depends_on_chip_alignment() {
    let len = SinusoidFit::new(40.0, 4.6, 0.166, 0.712).unwrap();
    let plus_sin = SinusoidFit::new(40.0, 12.0, 0.0, 1.0).unwrap();
    let minus_sin = SinusoidFit::new(40.0, 12.0, 0.0, -1.0).unwrap();
    let lead = phase_lead(&len, &plus_sin).unwrap();
    assert!((lead - 0.166f64.atan2(0.712)).abs() < 1e-12 && lead > 0.0);
    let flipped = phase_lead(&len, &minus_sin).unwrap();
    assert!((flipped - (lead - PI)).abs() < 1e-12);
}

#[test]
fn pulse_recovered_through_interpolation() {
    // Nocrush sampled on a different, coarser grid; the base is linear so interpolation is exact.
    let base = |x: f64| 20.0 + 0.3 * x;
    let pulse = |x: f64| if (10.0..=14.0).contains(&x) { 5.0 * (1.0 - ((x - 12.0) / 2.0).abs()) } else { 0.0 };
    let crush = Trace::sample(0.0, 40.0, 400, Unit::Lbf, |x| base(x) + pulse(x)).unwrap();
    let nocrush = Trace::sample(-1.0, 43.0, 37, Unit::Lbf, base).unwrap();
    let out = crushing_force(&crush, &nocrush).unwrap();
    assert_eq!(out.len(), crush.len());
    for (x, v) in out.points() {
        assert!((v - pulse(x)).abs() < 1e-12, "x={x}: {v}");
    }
}

#[test]
fn disjoint_traces_fail_alignment() {
    let a = Trace::sample(0.0, 10.0, 20, Unit::Lbf, |x| x).unwrap();
    let b = Trace::sample(20.0, 30.0, 20, Unit::Lbf, |x| x).unwrap();
    assert!(matches!(crushing_force(&a, &b), Err(Error::Alignment(_))));
}

#[test]
fn single_wavelength_padded_is_indeterminate() {
    let loop_max = [1.0, 3.0, 2.0];
    let m = max_force_vs_wavelength(&[(40.0, &loop_max[..]), (40.0, &loop_max[..])]).unwrap();
    assert_eq!(m.trend, Monotonicity::Indeterminate);
}

fn fit_strategy() -> impl Strategy<Value = SinusoidFit> {
    (-5.0f64..5.0, -3.0f64..3.0, -3.0f64..3.0)
        .prop_filter("nonzero fundamental", |(_, a1, a2)| a1.hypot(*a2) > 1e-3)
        .prop_map(|(a0, a1, a2)| SinusoidFit::new(40.0, a0, a1, a2).unwrap())
}

proptest! {
    #[test]
    fn shear_force_is_projection(fx in -500.0f64..500.0, fy in -500.0f64..500.0, phi in 0.0f64..(FRAC_PI_2 - 1e-6)) {
        prop_assume!(fx.hypot(fy) > 1e-6);
        let fs = shear_force(fx, fy, phi).unwrap();
        let projected = fx * phi.cos() - fy * phi.sin();
        prop_assert!((fs - projected).abs() <= 1e-9 * (1.0 + fx.abs() + fy.abs()));
    }

    #[test]
    fn lead_antisymmetric(a in fit_strategy(), b in fit_strategy()) {
        let ab = phase_lead(&a, &b).unwrap();
        let ba = phase_lead(&b, &a).unwrap();
        prop_assert_eq!(phase_lead(&a, &a).unwrap(), 0.0);
        // −π and π are the same angle; the wrap keeps π.
        prop_assert!(wrap_angle(ab + ba).abs() < 1e-12 || (ab.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn lagging_force_follows_from_ordering(
        chip in fit_strategy(),
        lead_f in 1e-6f64..(PI - 1e-3),
        frac in 1e-3f64..1.0,
        r_l in 0.1f64..5.0,
        r_f in 0.1f64..5.0,
    ) {
        let lead_l = lead_f + frac * (PI - lead_f);
        let p_chip = -chip.a2.atan2(chip.a1);
        let with_phase = |r: f64, p: f64| SinusoidFit::new(40.0, 0.0, r * p.cos(), -r * p.sin()).unwrap();
        let l = with_phase(r_l, p_chip + lead_l);
        let f = with_phase(r_f, p_chip + lead_f);
        let ll = phase_lead(&l, &chip).unwrap();
        let lf = phase_lead(&f, &chip).unwrap();
        prop_assume!(ll > lf && lf > 0.0);
        prop_assert!(phase_lead(&f, &l).unwrap() < 0.0);
    }

    #[test]
    fn sinusoid_exact_recovery(a0 in -10.0f64..10.0, a1 in -5.0f64..5.0, a2 in -5.0f64..5.0, lambda in 10.0f64..120.0, n in 8usize..200) {
        let t = Trace::sample(0.0, lambda, n, Unit::Mils, |x| {
            let th = TAU * x / lambda;
            a0 + a1 * th.cos() + a2 * th.sin()
        }).unwrap();
        let fit = fit_sinusoid(&t, lambda).unwrap();
        prop_assert!((fit.a0 - a0).abs() < 1e-9 && (fit.a1 - a1).abs() < 1e-9 && (fit.a2 - a2).abs() < 1e-9);
        prop_assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn linear_exact_recovery_and_orthogonality(
        m in -10.0f64..10.0,
        b in -50.0f64..50.0,
        xs in prop::collection::vec(-100.0f64..100.0, 3..40),
        noise in prop::collection::vec(-1.0f64..1.0, 40),
    ) {
        let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1.0);
        let exact: Vec<f64> = xs.iter().map(|x| m * x + b).collect();
        let fit = fit_linear(&xs, &exact).unwrap();
        prop_assert!((fit.slope - m).abs() < 1e-9 && (fit.intercept - b).abs() < 1e-9 * (1.0 + b.abs()));

        let ys: Vec<f64> = exact.iter().zip(&noise).map(|(y, e)| y + e).collect();
        let fit = fit_linear(&xs, &ys).unwrap();
        let r: Vec<f64> = xs.iter().zip(&ys).map(|(&x, &y)| y - fit.predict(x)).collect();
        let scale: f64 = xs.iter().zip(&ys).map(|(x, y)| (1.0 + x.abs()) * y.abs()).sum::<f64>();
        prop_assert!(r.iter().sum::<f64>().abs() < 1e-9 * scale);
        prop_assert!(xs.iter().zip(&r).map(|(x, r)| x * r).sum::<f64>().abs() < 1e-9 * scale);
    }

    #[test]
    fn crushing_is_linear(shift in -20.0f64..20.0, k in 0.01f64..0.5, offset in -0.4f64..0.4) {
        let u = Trace::sample(0.0, 30.0, 120, Unit::Lbf, |x| (k * x).sin() * 10.0).unwrap();
        let v = Trace::sample(offset, 30.0 + offset, 77, Unit::Lbf, |x| (k * x).cos() + x).unwrap();
        let w = |x: f64| shift + 0.1 * x * x;
        let uw = Trace::new(u.xs().to_vec(), u.points().map(|(x, y)| y + w(x)).collect(), Unit::Lbf).unwrap();
        let lhs = crushing_force(&uw, &v).unwrap();
        let rhs = crushing_force(&u, &v).unwrap();
        prop_assert_eq!(lhs.xs(), rhs.xs());
        for ((x, l), r) in lhs.points().zip(rhs.values()) {
            prop_assert!((l - (r + w(x))).abs() < 1e-9);
        }
        let zero = crushing_force(&u, &u).unwrap();
        prop_assert!(zero.values().iter().all(|&z| z == 0.0));
    }
}
