use crate::error::{invalid, Error, Result};

/// Least-squares slope of `log(mean regret)` against `log T`.
///
/// `points` holds `(horizon, mean regret)` pairs. Any nonpositive mean
/// makes the slope undefined for the series.
pub fn fit_regret_slope(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(invalid("horizons", "at least two horizons are needed"));
    }
    for &(horizon, value) in points {
        if horizon == 0 {
            return Err(invalid("horizons", "horizon must be positive"));
        }
        if value.is_nan() || value <= 0.0 {
            return Err(Error::NonPositiveRegret { horizon, value });
        }
    }
    let xs: Vec<f64> = points.iter().map(|(t, _)| (*t as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, r)| r.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("horizons", "horizons must not all be equal"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
