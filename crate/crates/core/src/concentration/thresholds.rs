use super::ConcentrationError;

fn check_delta(delta: f64) -> Result<(), ConcentrationError> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(ConcentrationError::InvalidDelta(delta))
    }
}

/// Time-uniform sub-exponential threshold `(lambda/2) sum sigma_t^2 + log(1/delta)/lambda`.
///
/// `alpha = 0` allows any positive `lambda`.
pub fn ville_threshold(lambda: f64, alpha: f64, sigma2_sum: f64, delta: f64) -> Result<f64, ConcentrationError> {
    check_delta(delta)?;
    if !(lambda > 0.0) || lambda * alpha > 1.0 {
        return Err(ConcentrationError::LambdaOutOfRange { lambda, alpha });
    }
    Ok(0.5 * lambda * sigma2_sum + (1.0 / delta).ln() / lambda)
}

/// Fixed-`n` sub-Gaussian threshold `sigma sqrt(2 n log(1/delta))`.
pub fn hoeffding_threshold(n: u64, sigma: f64, delta: f64) -> Result<f64, ConcentrationError> {
    check_delta(delta)?;
    Ok(sigma * (2.0 * n as f64 * (1.0 / delta).ln()).sqrt())
}

/// Threshold for the `c`-clipped running mean,
/// `2 (sigma v sqrt(alpha c / 2)) sqrt(log(2 (log e^2 n)^2 / delta) / n)`.
pub fn clipped_timeuniform_threshold(
    n: u64,
    sigma: f64,
    alpha: f64,
    c: f64,
    delta: f64,
) -> Result<f64, ConcentrationError> {
    check_delta(delta)?;
    if !(c > 0.0) {
        return Err(ConcentrationError::NonPositiveClip(c));
    }
    let nf = n as f64;
    let inner = 2.0 + nf.ln();
    let coef = 2.0 * sigma.max((alpha * c / 2.0).sqrt());
    Ok(coef * ((2.0 * inner * inner / delta).ln() / nf).sqrt())
}

/// Time-uniform unit sub-Gaussian threshold
/// `sqrt(2 (1+eta) n log(4 (2 + log(1/eta))^2 (1 + (2e/eta) log n)^2 / delta))`.
pub fn peeling_threshold(n: u64, eta: f64, delta: f64) -> Result<f64, ConcentrationError> {
    check_delta(delta)?;
    if !(eta > 0.0 && eta < std::f64::consts::E) {
        return Err(ConcentrationError::EtaOutOfRange(eta));
    }
    let nf = n as f64;
    let a = 2.0 + (1.0 / eta).ln();
    let b = 1.0 + 2.0 * std::f64::consts::E / eta * nf.ln();
    Ok((2.0 * (1.0 + eta) * nf * (4.0 * a * a * b * b / delta).ln()).sqrt())
}
