//! Helpers shared by the unit tests.

use proptest::prelude::*;
use rand::Rng;

use crate::ratio::Ratio;
use crate::spectrum::Spectrum;

pub fn spectrum(pairs: &[(i64, i64)]) -> Spectrum {
    Spectrum::new(pairs.iter().map(|&(n, d)| Ratio::new(n, d)).collect()).unwrap()
}

fn sorted_spectrum(mut values: Vec<Ratio>) -> Spectrum {
    values.sort_by(|a, b| b.cmp(a));
    Spectrum::new(values).unwrap()
}

pub fn ratio_strategy(max_numer: i64, max_denom: i64) -> impl Strategy<Value = Ratio> {
    (0..=max_numer, 1..=max_denom).prop_map(|(n, d)| Ratio::new(n, d))
}

pub fn fixed_length_spectrum_strategy(
    len: usize,
    max_numer: i64,
    max_denom: i64,
) -> impl Strategy<Value = Spectrum> {
    proptest::collection::vec(ratio_strategy(max_numer, max_denom), len).prop_map(sorted_spectrum)
}

pub fn rational_spectrum_strategy(
    max_len: usize,
    max_numer: i64,
    max_denom: i64,
) -> impl Strategy<Value = Spectrum> {
    proptest::collection::vec(ratio_strategy(max_numer, max_denom), 0..=max_len)
        .prop_map(sorted_spectrum)
}

/// Two spectra of the same (random) length.
pub fn equal_length_pair_strategy(
    max_len: usize,
    max_numer: i64,
    max_denom: i64,
) -> impl Strategy<Value = (Spectrum, Spectrum)> {
    (0..=max_len).prop_flat_map(move |len| {
        (
            fixed_length_spectrum_strategy(len, max_numer, max_denom),
            fixed_length_spectrum_strategy(len, max_numer, max_denom),
        )
    })
}

/// Pairs `(lambda, mu)` with `len(lambda) <= len(mu)`. Half of the cases
/// rescale `lambda` to share `mu`'s total so that feasible instances occur.
pub fn classical_pair_strategy(
    max_m: usize,
    max_n: usize,
) -> impl Strategy<Value = (Spectrum, Spectrum)> {
    (0..=max_m).prop_flat_map(move |m| {
        (m..=max_n).prop_flat_map(move |n| {
            (
                fixed_length_spectrum_strategy(m, 64, 16),
                fixed_length_spectrum_strategy(n, 64, 16),
                any::<bool>(),
            )
                .prop_map(|(lambda, mu, rescale)| {
                    if rescale && !lambda.sum().is_zero() {
                        let scale = mu.sum() / lambda.sum();
                        let values = lambda.iter().map(|v| v * &scale).collect();
                        (Spectrum::new(values).unwrap(), mu)
                    } else {
                        (lambda, mu)
                    }
                })
        })
    })
}

/// Random spectrum with `len` entries in `[0, max_value]` and denominators up
/// to `max_denom`.
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
