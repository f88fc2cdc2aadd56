//! Seeded random models and strategies shared by the unit tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::market::{Asset, MarketModel, Strategy, StrategyClass};
use crate::scalar::Scalar;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Scalar {
    Scalar::ratio(rng.gen_range(lo..=hi), rng.gen_range(1..=den))
}

/// Random rational model: `n ≤ max_n`, `d ≤ max_d`, `T ≤ max_t`, rate in
/// `{0, 1/10, 1/4}`, random refining filtration, nonnegative adapted prices.
pub fn rational_model(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize, max_t: usize) -> MarketModel {
    let n = rng.gen_range(2..=max_n);
    let d = rng.gen_range(1..=max_d);
    let periods = rng.gen_range(1..=max_t);
    let rate = [Scalar::zero(), Scalar::ratio(1, 10), Scalar::ratio(1, 4)][rng.gen_range(0..3)].clone();
    // Intermediate partitions: coarsen the next one by merging neighbours.
    let mut filtration: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|i| vec![i]).collect()];
    for _ in 1..periods {
        let finer = filtration.last().unwrap();
        let mut coarse: Vec<Vec<usize>> = Vec::new();
        for b in finer {
            match coarse.last_mut() {
                Some(last) if rng.gen_bool(0.5) => last.extend(b),
                _ => coarse.push(b.clone()),
            }
        }
        filtration.push(coarse);
    }
    filtration.push(vec![(0..n).collect()]);
    filtration.reverse();
    let assets = (0..d)
        .map(|j| {
            let prices = (0..=periods)
                .map(|t| {
                    let mut row = vec![Scalar::zero(); n];
                    for block in &filtration[t] {
                        let v = small_rational(rng, 0, 12, 3);
                        for &w in block {
                            row[w] = v.clone();
                        }
                    }
                    row
                })
                .collect();
            Asset { name: format!("S{}", j + 1), prices }
        })
        .collect();
    let mut m = MarketModel::new(periods, rate, assets, n);
    m.filtration = filtration;
    // Random strictly positive probabilities.
    let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = weights.iter().sum();
    m.probabilities = weights.iter().map(|&w| Scalar::ratio(w, total)).collect();
    m
}

/// Random predictable strategy of the given class with rational entries.
pub fn strategy(rng: &mut ChaCha8Rng, m: &MarketModel, class: StrategyClass) -> Strategy {
    let positions = (0..m.periods)
        .map(|t| {
            (0..m.filtration[t].len())
                .map(|_| {
                    (0..m.d())
                        .map(|_| match class {
                            StrategyClass::Integer => Scalar::int(rng.gen_range(-4..=4)),
                            _ => small_rational(rng, -8, 8, 4),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Strategy::new(class, positions, small_rational(rng, -5, 5, 3)).unwrap()
}
