//! Least-squares fits used by the force analysis: fixed-wavelength sinusoids
//! and straight lines.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{SinusoidFit, Trace};

/// Relative singular-value floor below which a design matrix is rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

/// Fits `a0 + a1·cos(2πx/λ) + a2·sin(2πx/λ)` to a trace by linear least
/// squares with λ held fixed.
///
/// The trace must contain at least 8 points and its samples must cover one
/// wavelength (span plus one mean spacing).
pub fn fit_sinusoid(trace: &Trace, wavelength: f64) -> Result<SinusoidFit> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return domain(format!("wavelength must be positive, got {wavelength}"));
    }
    let n = trace.len();
    if n < 8 {
        return Err(Error::Fit(format!("sinusoid fit needs at least 8 points, got {n}")));
    }
    let (x_lo, x_hi) = trace.x_range();
    let coverage = (x_hi - x_lo) * n as f64 / (n - 1) as f64;
    if coverage < wavelength * (1.0 - 1e-9) {
        return Err(Error::Fit(format!(
            "trace covers {coverage} mils, less than one wavelength ({wavelength})"
        )));
    }

    let design = DMatrix::from_fn(n, 3, |i, j| {
        let theta = TAU * trace.xs()[i] / wavelength;
        match j {
            0 => 1.0,
            1 => theta.cos(),
            _ => theta.sin(),
        }
    });
    let rhs = DVector::from_column_slice(trace.values());
    let coef = solve_least_squares(design.clone(), &rhs)?;
    let residual = &rhs - &design * &coef;
    Ok(SinusoidFit {
        wavelength,
        a0: coef[0],
        a1: coef[1],
        a2: coef[2],
        rms_residual: (residual.norm_squared() / n as f64).sqrt(),
    })
}

fn solve_least_squares(design: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= RANK_TOLERANCE * smax {
        return Err(Error::Fit(format!(
            "rank-deficient design (singular values {smin:e} / {smax:e})"
        )));
    }
    svd.solve(rhs, 0.0).map_err(|e| Error::Fit(e.to_string()))
}

/// Phase at the origin of the fundamental, written as `r·cos(2πx/λ + p)`.
pub fn fundamental_phase(fit: &SinusoidFit) -> Result<f64> {
    if fit.amplitude() == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    Ok(-fit.a2.atan2(fit.a1))
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Phase by which `a` leads `b`, in (−π, π]. Positive means `a` peaks at a
/// smaller x than `b`.
pub fn phase_lead(a: &SinusoidFit, b: &SinusoidFit) -> Result<f64> {
    let tol = 1e-12 * a.wavelength.max(b.wavelength);
    if (a.wavelength - b.wavelength).abs() > tol {
        return domain(format!(
            "phase comparison needs equal wavelengths ({} vs {})",
            a.wavelength, b.wavelength
        ));
    }
    Ok(wrap_angle(fundamental_phase(a)? - fundamental_phase(b)?))
}

/// `y = slope·x + intercept`, with the root-mean-square residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_error: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Table-style summary, e.g. `Y = 1.102 * X + 0.397`.
    pub fn equation(&self) -> String {
        let sign = if self.intercept < 0.0 { '-' } else { '+' };
        format!("Y = {:.3} * X {} {:.3}", self.slope, sign, self.intercept.abs())
    }
}

/// Ordinary least-squares line through `(x, y)`.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return domain(format!("{} abscissae but {} ordinates", x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Fit(format!("linear fit needs at least 3 points, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite input".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&xi, &yi)| (xi - mx) * (yi - my)).sum();
    let spread = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if sxx <= (1e-12 * spread).powi(2) * nf {
        return Err(Error::Fit("degenerate abscissae: all x equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - slope * xi - intercept).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        rms_error: (sse / nf).sqrt(),
    })
}

/// Sample mean and sample standard deviation of the fitted slopes.
pub fn slope_stats(fits: &[LinearFit]) -> Result<(f64, f64)> {
    if fits.len() < 2 {
        return domain("slope statistics need at least two fits");
    }
    let n = fits.len() as f64;
    // Shifted by the first slope so identical inputs give exactly zero spread.
    let s0 = fits[0].slope;
    let mean = s0 + fits.iter().map(|f| f.slope - s0).sum::<f64>() / n;
    let var = fits.iter().map(|f| (f.slope - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Unit;

    fn fit(lam: f64, a0: f64, a1: f64, a2: f64) -> SinusoidFit {
        SinusoidFit::new(lam, a0, a1, a2).unwrap()
    }

    #[test]
    fn recovers_exact_sinusoid() {
        let truth = fit(40.0, 4.6, 0.166, 0.712);
        let t = Trace::sample(0.0, 40.0, 64, Unit::Dimensionless, |x| truth.evaluate(x)).unwrap();
        let f = fit_sinusoid(&t, 40.0).unwrap();
        assert!((f.a0 - 4.6).abs() < 1e-9);
        assert!((f.a1 - 0.166).abs() < 1e-9);
        assert!((f.a2 - 0.712).abs() < 1e-9);
        assert!(f.rms_residual < 1e-9);
    }

    #[test]
    fn constant_trace() {
        let t = Trace::sample(0.0, 80.0, 40, Unit::Lbf, |_| 3.25).unwrap();
        let f = fit_sinusoid(&t, 40.0).unwrap();
        assert!((f.a0 - 3.25).abs() < 1e-12);
        assert!(f.a1.abs() < 1e-12 && f.a2.abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_design() {
        // Every abscissa congruent to 0 or λ/2 mod λ: the sine column vanishes.
        let xs: Vec<f64> = (0..10).map(|i| 20.0 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + x * 0.01).collect();
        let t = Trace::new(xs, ys, Unit::Lbf).unwrap();
        assert!(matches!(fit_sinusoid(&t, 40.0), Err(Error::Fit(_))));
    }

    #[test]
    fn short_trace_rejected() {
        let t = Trace::sample(0.0, 20.0, 32, Unit::Lbf, |x| x).unwrap();
        assert!(matches!(fit_sinusoid(&t, 40.0), Err(Error::Fit(_))));
        let t = Trace::sample(0.0, 40.0, 7, Unit::Lbf, |x| x).unwrap();
        assert!(matches!(fit_sinusoid(&t, 40.0), Err(Error::Fit(_))));
    }

    #[test]
    fn phase_lead_examples() {
        let cos = fit(40.0, 0.0, 1.0, 0.0);
        let sin = fit(40.0, 0.0, 0.0, 1.0);
        assert!((phase_lead(&cos, &sin).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(phase_lead(&cos, &cos).unwrap(), 0.0);
        let l = fit(40.0, 4.6, 0.166, 0.712);
        let rising = fit(40.0, 12.0, 0.0, 1.5);
        assert!(phase_lead(&l, &rising).unwrap() > 0.0);
    }

    #[test]
    fn phase_lead_errors() {
        let a = fit(40.0, 1.0, 0.0, 0.0);
        let b = fit(40.0, 0.0, 1.0, 0.0);
        assert_eq!(phase_lead(&a, &b), Err(Error::UndefinedPhase));
        let c = fit(41.0, 0.0, 1.0, 0.0);
        assert!(matches!(phase_lead(&b, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f = fit_linear(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!(f.rms_error < 1e-12);
        assert_eq!(f.equation(), "Y = 2.000 * X + 1.000");
    }

    #[test]
    fn centroid_identity() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [2.0, 2.9, 4.2, 4.8, 6.1, 7.3];
        let f = fit_linear(&x, &y).unwrap();
        let (mx, my) = (3.5, y.iter().sum::<f64>() / 6.0);
        assert!((f.intercept - (my - f.slope * mx)).abs() < 1e-12);
    }

    #[test]
    fn equation_formatting() {
        let f = LinearFit { slope: 1.132, intercept: -1.539, rms_error: 3.75 };
        assert_eq!(f.equation(), "Y = 1.132 * X - 1.539");
        let f = LinearFit { slope: 1.102, intercept: 0.397, rms_error: 2.34 };
        assert_eq!(f.equation(), "Y = 1.102 * X + 0.397");
    }

    #[test]
    fn degenerate_linear_inputs() {
        assert!(matches!(fit_linear(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::Fit(_))));
        assert!(matches!(fit_linear(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::Fit(_))));
    }

    #[test]
    fn slope_statistics() {
        let mk = |s: f64| LinearFit { slope: s, intercept: 0.0, rms_error: 0.0 };
        let long: Vec<_> = [1.102, 1.132, 1.184, 1.305].map(mk).to_vec();
        let (m, sd) = slope_stats(&long).unwrap();
        assert!((m - 1.18).abs() < 0.005);
        assert!((sd - 0.089).abs() < 0.001);
        let short: Vec<_> = [0.548, 0.234, 0.207, 0.167].map(mk).to_vec();
        let (m, sd) = slope_stats(&short).unwrap();
        assert!((m - 0.289).abs() < 0.0005);
        assert!((sd - 0.175).abs() < 0.001);
        let same = vec![mk(0.7); 3];
        assert_eq!(slope_stats(&same).unwrap().1, 0.0);
        assert!(slope_stats(&long[..1]).is_err());
    }
}
