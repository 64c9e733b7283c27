use crate::scalar::{ExtReal, Real};

/// Exploration bonus for one state-action pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bonus<T: Real = f64> {
    /// Unvisited pair: the estimate is set to `V_max` directly.
    ForceVmax,
    Value(ExtReal<T>),
}

/// `c1 / n ^ c2 / sqrt(n)`, with `inf` absorbed by the min.
///
/// The count is unsigned, so a negative count cannot be passed.
pub fn bonus<T: Real>(c1: ExtReal<T>, c2: ExtReal<T>, n: u64) -> Bonus<T> {
    if n == 0 {
        return Bonus::ForceVmax;
    }
    let nf = T::of_u64(n);
    let first = match c1 {
        ExtReal::Finite(c) => ExtReal::Finite(c / nf),
        ExtReal::Infinite => ExtReal::Infinite,
    };
    let second = match c2 {
        ExtReal::Finite(c) => ExtReal::Finite(c / nf.sqrt()),
        ExtReal::Infinite => ExtReal::Infinite,
    };
    Bonus::Value(first.min(second))
}
