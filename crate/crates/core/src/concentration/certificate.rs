use crate::scalar::Real;

/// `g(x) = (e^x - 1 - x) / x^2`, with `g(0) = 1/2`.
///
/// A degree-6 Taylor expansion is used for `|x| < 1e-4`.
pub fn g<T: Real>(x: T) -> T {
    if x.abs() < T::of(1e-4) {
        // sum_{j>=0} x^j / (j+2)!
        let coeffs = [
            1.0 / 2.0,
            1.0 / 6.0,
            1.0 / 24.0,
            1.0 / 120.0,
            1.0 / 720.0,
            1.0 / 5040.0,
            1.0 / 40320.0,
        ];
        return coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + T::of(c));
    }
    (x.exp() - T::one() - x) / (x * x)
}

/// Sub-exponential certificate `(g(c/alpha) 2V, alpha)` of a centred variable in `[-c, c]` with variance `V`.
pub fn bounded_subexp_cert<T: Real>(c: T, variance: T, alpha: T) -> (T, T) {
    (g(c / alpha) * T::of(2.0) * variance, alpha)
}
