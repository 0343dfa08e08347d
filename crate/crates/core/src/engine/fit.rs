use crate::error::{Error, Result};

/// Least-squares slope of `ln error` against `ln k`.
pub fn convergence_order_fit(ks: &[f64], errors: &[f64]) -> Result<f64> {
    if ks.len() != errors.len() {
        return Err(Error::InvalidConfig(format!(
            "{} k values but {} errors",
            ks.len(),
            errors.len()
        )));
    }
    if ks.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "need at least 3 samples, got {}",
            ks.len()
        )));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "errors must be positive, got {e}"
        )));
    }
    if let Some(k) = ks.iter().find(|k| !(**k > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "k values must be positive, got {k}"
        )));
    }
    let xs: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig(
            "k values must not all coincide".into(),
        ));
    }
    Ok(sxy / sxx)
}
