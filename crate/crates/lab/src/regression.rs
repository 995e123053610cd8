//! Closed-form simple linear regression with the full significance table,
//! and the threshold-time estimate built on it.
//!
//! Used to check that a cost sequence's cumulative variation grows linearly:
//! regress `v_t` against `t`, read off slope/intercept significance, and
//! find the first integer time at which the fitted line reaches `1/m`.

use mnb_core::adversary::VariationBudget;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("regression needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("regressor is constant; the fit is undefined")]
    DegenerateInput,
    #[error("fitted slope {0} is not positive; the variation line never reaches the threshold")]
    NoCrossing(f64),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnovaRow {
    pub df: u64,
    pub ss: f64,
    /// Mean square; absent on the total row.
    pub ms: Option<f64>,
    /// F statistic; present on the regression row only. `+inf` flags an
    /// exact fit.
    pub f: Option<f64>,
    /// Upper-tail probability of F; present on the regression row only.
    pub significance: Option<f64>,
}

/// Ordinary least squares of y on x with intercept, plus the ANOVA
/// decomposition of the fit.
#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    pub n: usize,
    pub intercept: f64,
    pub slope: f64,
    pub se_intercept: f64,
    pub se_slope: f64,
    pub t_intercept: f64,
    pub t_slope: f64,
    pub p_intercept: f64,
    pub p_slope: f64,
    pub r_squared: f64,
    pub regression: AnovaRow,
    pub residual: AnovaRow,
    pub total: AnovaRow,
}

/// Fits `y = intercept + slope·x` by least squares.
///
/// Sums of squares are computed independently (`SS_reg = slope²·S_xx`,
/// `SS_res` from the residuals), so `SS_tot = SS_reg + SS_res` is a checked
/// identity rather than a bookkeeping artifact.
pub fn regress_points(x: &[f64], y: &[f64]) -> Result<RegressionReport, AnalysisError> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(AnalysisError::TooFewPoints(n.min(y.len())));
    }
    let nf = n as f64;
    let x_mean = x.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y.iter()) {
        let dx = xi - x_mean;
        let dy = yi - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(AnalysisError::DegenerateInput);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let ss_reg = slope * slope * sxx;
    let mut ss_res = 0.0;
    for (&xi, &yi) in x.iter().zip(y.iter()) {
        let r = yi - (intercept + slope * xi);
        ss_res += r * r;
    }
    // Residuals at the float-noise floor mean a noiseless fit; report the
    // exact-fit sentinel instead of an astronomically large finite F.
    if ss_res <= syy * 1e-24 {
        ss_res = 0.0;
    }
    let df_res = (n - 2) as u64;
    let ms_res = ss_res / df_res as f64;
    let variance = ms_res;

    let se_slope = (variance / sxx).sqrt();
    let se_intercept = (variance * (1.0 / nf + x_mean * x_mean / sxx)).sqrt();
    let t_of = |coef: f64, se: f64| if se == 0.0 { f64::INFINITY * coef.signum() } else { coef / se };
    let t_slope = t_of(slope, se_slope);
    let t_intercept = t_of(intercept, se_intercept);
    let p_of = |t: f64| two_sided_t_p(t, df_res as f64);

    let f_stat = if ms_res == 0.0 { f64::INFINITY } else { ss_reg / ms_res };
    let significance = f_upper_tail(f_stat, 1.0, df_res as f64);

    let r_squared = if syy == 0.0 { 1.0 } else { ss_reg / syy };
    Ok(RegressionReport {
        n,
        intercept,
        slope,
        se_intercept,
        se_slope,
        t_intercept,
        t_slope,
        p_intercept: p_of(t_intercept),
        p_slope: p_of(t_slope),
        r_squared,
        regression: AnovaRow {
            df: 1,
            ss: ss_reg,
            ms: Some(ss_reg),
            f: Some(f_stat),
            significance: Some(significance),
        },
        residual: AnovaRow { df: df_res, ss: ss_res, ms: Some(ms_res), f: None, significance: None },
        total: AnovaRow { df: (n - 1) as u64, ss: syy, ms: None, f: None, significance: None },
    })
}

/// Regression of the cumulative variation path against time.
///
/// The first point (`v_1 = 0` by convention, no transition behind it) is
/// excluded; the fit runs over `t = 2..=T`.
pub fn regress_variation(budget: &VariationBudget) -> Result<RegressionReport, AnalysisError> {
    let path = budget.path();
    if path.len() < 4 {
        return Err(AnalysisError::TooFewPoints(path.len().saturating_sub(1)));
    }
    let x: Vec<f64> = (2..=path.len()).map(|t| t as f64).collect();
    let y: Vec<f64> = path[1..].to_vec();
    regress_points(&x, &y)
}

/// Smallest integer time at which the fitted line reaches `1/m`.
pub fn estimate_t0(report: &RegressionReport, truncation: u32) -> Result<usize, AnalysisError> {
    let threshold = 1.0 / truncation as f64;
    if report.intercept >= threshold {
        return Ok(1);
    }
    if report.slope <= 0.0 {
        return Err(AnalysisError::NoCrossing(report.slope));
    }
    let fitted = |t: f64| report.intercept + report.slope * t;
    let mut t = ((threshold - report.intercept) / report.slope).ceil().max(1.0) as usize;
    // Settle float edges on the exact first-crossing integer.
    while t > 1 && fitted((t - 1) as f64) >= threshold {
        t -= 1;
    }
    while fitted(t as f64) < threshold {
        t += 1;
    }
    Ok(t)
}

fn two_sided_t_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

fn f_upper_tail(f_stat: f64, d1: f64, d2: f64) -> f64 {
    if f_stat.is_infinite() {
        return 0.0;
    }
    if f_stat <= 0.0 {
        return 1.0;
    }
    let dist = FisherSnedecor::new(d1, d2).expect("dfs >= 1");
    (1.0 - dist.cdf(f_stat)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computable_four_points() {
        // {(1,1),(2,2),(3,2),(4,3)} → slope 0.6, intercept 0.5.
        let report = regress_points(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert!((report.slope - 0.6).abs() < 1e-12);
        assert!((report.intercept - 0.5).abs() < 1e-12);
        // Classical identity for simple regression: t² of the slope = F.
        let f = report.regression.f.unwrap();
        assert!((report.t_slope * report.t_slope - f).abs() < 1e-9);
        // df bookkeeping.
        assert_eq!(report.total.df, report.regression.df + report.residual.df);
        // Decomposition.
        let reassembled = report.regression.ss + report.residual.ss;
        assert!((report.total.ss - reassembled).abs() <= 1e-6 * report.total.ss.max(1e-12));
    }

    #[test]
    fn exact_line_gets_infinite_f() {
        let x: Vec<f64> = (1..=20).map(|t| t as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.5 + 0.03 * t).collect();
        let report = regress_points(&x, &y).unwrap();
        assert!((report.slope - 0.03).abs() < 1e-12);
        assert!(report.residual.ss < 1e-20);
        assert_eq!(report.regression.f, Some(f64::INFINITY));
        assert_eq!(report.regression.significance, Some(0.0));
        assert_eq!(report.p_slope, 0.0);
    }

    #[test]
    fn matches_normal_equations_oracle() {
        // Independent route: solve the 2×2 normal equations directly.
        let x: Vec<f64> = (0..40).map(|i| 3.0 + 0.7 * i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| 2.0 + 0.45 * xi + ((i * 29 % 13) as f64 - 6.0) * 0.11)
            .collect();
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let det = n * sxx - sx * sx;
        let intercept = (sy * sxx - sx * sxy) / det;
        let slope = (n * sxy - sx * sy) / det;
        let report = regress_points(&x, &y).unwrap();
        assert!((report.slope - slope).abs() <= 1e-10 * slope.abs());
        assert!((report.intercept - intercept).abs() <= 1e-10 * intercept.abs().max(1.0));
    }

    #[test]
    fn tail_probabilities_match_tabulated_values() {
        // References computed with an independent statistics library.
        assert!((two_sided_t_p(2.0, 5.0) - 0.10193947882985828).abs() < 1e-10);
        assert!((two_sided_t_p(1.5, 100.0) - 0.13676505812468887).abs() < 1e-10);
        assert!((two_sided_t_p(12.7062047361747, 3.0) - 0.001051533266591937).abs() < 1e-10);
        assert!(two_sided_t_p(218.5, 669.0) < 1e-300);
        assert_eq!(two_sided_t_p(0.0, 10.0), 1.0);
        assert!((f_upper_tail(4.964602743730711, 1.0, 10.0) - 0.05).abs() < 1e-10);
        assert!((f_upper_tail(19.0, 1.0, 2.0) - 0.04881026878865815).abs() < 1e-10);
    }

    #[test]
    fn noisy_linear_variation_recovers_tabled_shape() {
        // v_t = 1.56 + 0.02648·t + N(0, 0.6), n = 671 points.
        let mut noise_state = 0x9e3779b97f4a7c15u64;
        let mut next_u = || {
            noise_state = noise_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((noise_state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        let mut gauss = || {
            let u1: f64 = next_u().max(1e-12);
            let u2: f64 = next_u();
            (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
        };
        let x: Vec<f64> = (2..=672).map(|t| t as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.56 + 0.02648 * t + 0.6 * gauss()).collect();
        let report = regress_points(&x, &y).unwrap();
        assert_eq!(report.n, 671);
        assert_eq!(report.residual.df, 669);
        assert!((report.slope - 0.02648).abs() < 1e-3, "slope {}", report.slope);
        assert!((report.intercept - 1.56).abs() < 0.2, "intercept {}", report.intercept);
        assert!(report.regression.significance.unwrap() < 0.01);
        assert!(report.p_slope < 1e-10);
        let identity = (report.total.ss - (report.regression.ss + report.residual.ss)).abs();
        assert!(identity <= 1e-6 * report.total.ss);
        // t₀ from the fitted line with m = 4: the intercept already clears
        // 1/4, so the first crossing is t = 1.
        assert_eq!(estimate_t0(&report, 4).unwrap(), 1);
    }

    #[test]
    fn threshold_time_arithmetic() {
        let mk = |intercept: f64, slope: f64| RegressionReport {
            n: 10,
            intercept,
            slope,
            se_intercept: 0.0,
            se_slope: 0.0,
            t_intercept: 0.0,
            t_slope: 0.0,
            p_intercept: 0.0,
            p_slope: 0.0,
            r_squared: 1.0,
            regression: AnovaRow { df: 1, ss: 0.0, ms: Some(0.0), f: None, significance: None },
            residual: AnovaRow { df: 8, ss: 0.0, ms: Some(0.0), f: None, significance: None },
            total: AnovaRow { df: 9, ss: 0.0, ms: None, f: None, significance: None },
        };
        // intercept 0, slope 0.05, m=4: 0.05·5 = 0.25 exactly.
        assert_eq!(estimate_t0(&mk(0.0, 0.05), 4).unwrap(), 5);
        assert_eq!(estimate_t0(&mk(0.3, 0.01), 4).unwrap(), 1);
        assert!(matches!(
            estimate_t0(&mk(0.1, 0.0), 4),
            Err(AnalysisError::NoCrossing(_))
        ));
        assert_eq!(estimate_t0(&mk(0.0, 0.25), 4).unwrap(), 1);
        assert_eq!(estimate_t0(&mk(-0.5, 0.25), 4).unwrap(), 3);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(
            regress_points(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(AnalysisError::DegenerateInput)
        ));
        assert!(matches!(
            regress_points(&[1.0, 2.0], &[1.0, 2.0]),
            Err(AnalysisError::TooFewPoints(_))
        ));
    }
}
