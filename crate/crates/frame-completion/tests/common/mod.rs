//! Shared helpers for the integration tests.

use frame_completion::{Ratio, Spectrum};
use rand::Rng;

pub fn ratio(numer: i64, denom: i64) -> Ratio {
    Ratio::new(numer, denom)
}

pub fn spectrum(pairs: &[(i64, i64)]) -> Spectrum {
    Spectrum::new(pairs.iter().map(|&(n, d)| Ratio::new(n, d)).collect()).expect("valid spectrum")
}

pub fn sorted_spectrum(mut values: Vec<Ratio>) -> Spectrum {
    values.sort_by(|a, b| b.cmp(a));
    Spectrum::new(values).expect("sorted values form a spectrum")
}

/// Nonincreasing nonnegative rationals in `[0, max_value]` with denominators
/// at most `max_denom`.
pub fn random_spectrum(
    rng: &mut impl Rng,
    len: usize,
    max_value: i64,
    max_denom: i64,
) -> Spectrum {
    let values = (0..len)
        .map(|_| {
            let d = rng.gen_range(1..=max_denom);
            let n = rng.gen_range(0..=max_value * d);
            Ratio::new(n, d)
        })
        .collect();
    sorted_spectrum(values)
}

/// The worked instance used throughout: starting spectrum, squared lengths,
/// and the known minimal completion spectrum.
pub fn golden_alpha() -> Spectrum {
    spectrum(&[(7, 4), (3, 4), (1, 2), (1, 2)])
}

pub fn golden_mu() -> Spectrum {
    spectrum(&[(2, 1), (1, 1), (1, 4), (1, 4), (1, 4)])
}

pub fn golden_beta() -> Spectrum {
    spectrum(&[(5, 2), (7, 4), (3, 2), (3, 2)])
}
