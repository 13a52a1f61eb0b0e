//! Least-squares line fits used by the asymptotic scans.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
}

/// Ordinary least squares `y ~ slope * x + intercept`.
///
/// Returns `None` with fewer than two points or constant `x`.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let m = xs.len().min(ys.len());
    if m < 2 {
        return None;
    }
    let mf = m as f64;
    let mx = xs[..m].iter().sum::<f64>() / mf;
    let my = ys[..m].iter().sum::<f64>() / mf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys).take(m) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Fit of `log y` against `log x`.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    line_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = line_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
    }

    #[test]
    fn power_law() {
        let xs = [1e-3, 1e-2, 1e-1];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        let f = log_log_fit(&xs, &ys).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate() {
        assert!(line_fit(&[1.0], &[2.0]).is_none());
        assert!(line_fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }
}
