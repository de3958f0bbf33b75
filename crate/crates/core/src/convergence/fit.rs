use crate::error::{QcError, Result};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `ln y = slope · ln x + intercept`. Needs two or more positive points.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(QcError::TooFewPoints(points.len()));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(QcError::NonPositiveData(x, y));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(QcError::TooFewPoints(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // a flat line fits perfectly
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (6..=10)
            .map(|k| {
                let e = 2f64.powi(-k);
                (e, 3.0 * e.powf(1.5))
            })
            .collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(fit_slope(&[(0.5, 1.0)]), Err(QcError::TooFewPoints(1)));
        assert!(matches!(fit_slope(&[(0.5, 1.0), (0.25, 0.0)]), Err(QcError::NonPositiveData(..))));
        let flat = fit_slope(&[(0.5, 2.0), (0.25, 2.0), (0.125, 2.0)]).unwrap();
        assert!(flat.slope.abs() < 1e-15);
    }
}
