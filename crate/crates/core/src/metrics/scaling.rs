use crate::error::{Error, Result};
use crate::linalg::{fit_line, LineFit};

pub const MIN_SCALING_POINTS: usize = 4;

/// Least-squares fit of `log(calls)` against `log(κ)`.
///
/// Points are `(κ, calls)`; repeated `κ` values (several seeds) are allowed
/// but at least four distinct `κ` are required.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<LineFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < MIN_SCALING_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_SCALING_POINTS,
            got: distinct.len(),
        });
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "log-log fit needs positive values, got ({}, {})",
            p.0, p.1
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(fit_line(&xs, &ys))
}

/// Mean of `calls` per distinct `κ`, in increasing `κ` order.
pub fn average_by_kappa(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for (k, c) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == k => {
                last.1 += c;
                last.2 += 1;
            }
            _ => out.push((k, c, 1)),
        }
    }
    out.into_iter().map(|(k, s, m)| (k, s / m as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [4.0, 16.0, 64.0, 256.0].iter().map(|&k: &f64| (k, 7.0 * k.sqrt())).collect();
        let fit = fit_scaling(&pts).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-9);
        assert!((fit.intercept - 7.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn three_points_rejected() {
        let pts = [(1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (3.0, 4.0)];
        assert!(matches!(fit_scaling(&pts), Err(Error::TooFewPoints { needed: 4, got: 3 })));
    }

    #[test]
    fn averages_repeated_kappa() {
        let avg = average_by_kappa(&[(4.0, 1.0), (2.0, 5.0), (4.0, 3.0)]);
        assert_eq!(avg, vec![(2.0, 5.0), (4.0, 2.0)]);
    }
}
