use crate::{Error, Result};

/// Uniform time grid on `[0, t_max]` whose step is the largest value not
/// exceeding `dt` that divides `t_max` evenly. Both endpoints are included.
pub fn uniform_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be non-negative, got {t_max}"
        )));
    }
    let steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(vec![0.0]);
    }
    let h = t_max / steps as f64;
    Ok((0..=steps)
        .map(|k| if k == steps { t_max } else { k as f64 * h })
        .collect())
}
