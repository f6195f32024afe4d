//! Linear least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares coefficients for `y ≈ X β` where `rows[i]` is the i-th row of `X`.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n < p || p == 0 {
        return Err(Error::InsufficientData(format!("{n} observations for {p} parameters")));
    }
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = x.svd(true, true);
    let beta = svd.solve(&b, 1e-14).map_err(|e| Error::InsufficientData(e.to_string()))?;
    Ok(beta.iter().copied().collect())
}

/// Straight-line fit `y ≈ a + b x` with the standard error of the slope.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_stderr: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::InsufficientData(format!("{n} points")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit { intercept, slope, slope_stderr })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.intercept - 2.0).abs() < 1e-13);
        assert!(f.slope_stderr < 1e-12);
    }

    #[test]
    fn recovers_quadratic_coefficients() {
        let xs: Vec<f64> = (1..20).map(|i| i as f64 * 0.01).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![x * x, x * x * x]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 0.75 * x * x - 0.1 * x * x * x).collect();
        let b = least_squares(&rows, &y).unwrap();
        assert!((b[0] - 0.75).abs() < 1e-9 && (b[1] + 0.1).abs() < 1e-7);
    }
}
