//! Seeded families of nonnegative unit-mass test densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bump::BumpFunction;
use crate::error::Result;
use crate::grid::{cell_count, GridDensity};
use crate::measures::{cantor_measure, mollify, CantorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Normalized indicator of a union of one to three arcs.
    Indicator,
    /// Stage of a deterministic or randomized Cantor construction.
    CantorIterate,
    /// One to five weighted point masses smeared by the plateau bump.
    MollifiedSpikes,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Indicator, Family::CantorIterate, Family::MollifiedSpikes];
}

fn normalized(level: u32, values: Vec<f64>) -> Result<GridDensity> {
    let g = GridDensity::new(level, values)?;
    let m = g.mass();
    g.scaled(1.0 / m)
}

/// One member of `family` on the dyadic grid of `level >= 8`.
pub fn sample(family: Family, level: u32, seed: u64) -> Result<GridDensity> {
    let n = cell_count(2, level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        Family::Indicator => {
            let mut values = vec![0.0; n];
            for _ in 0..rng.random_range(1..=3) {
                let len = (n as f64 * 2f64.powf(rng.random_range(-6.0..-1.0))) as usize;
                let start = rng.random_range(0..n);
                for j in 0..len.max(1) {
                    values[(start + j) % n] = 1.0;
                }
            }
            normalized(level, values)
        }
        Family::CantorIterate => {
            let (branching, survivors) = [(3, 2), (5, 2), (5, 3), (7, 3), (7, 4)][rng.random_range(0..5)];
            let max_depth = ((level as f64) * 2f64.ln() / (branching as f64).ln()).floor() as u32;
            let depth = rng.random_range(1..=max_depth.clamp(1, 5));
            let spec = if rng.random_bool(0.5) {
                CantorSpec::random(branching, survivors, depth, rng.random())
            } else {
                CantorSpec {
                    branching,
                    survivors,
                    depth,
                    randomized: false,
                    seed: 0,
                }
            };
            cantor_measure(&spec, level)
        }
        Family::MollifiedSpikes => {
            let mut values = vec![0.0; n];
            for _ in 0..rng.random_range(1..=5) {
                values[rng.random_range(0..n)] += rng.random_range(0.2..1.0);
            }
            let eps = 2f64.powf(rng.random_range(-8.0..-3.0));
            let g = normalized(level, values)?;
            mollify(&g, eps, BumpFunction::THETA)
        }
    }
}

/// `count` densities cycling through the three families; the seeds of
/// `corpus_id` are disjoint from those of any other id.
pub fn bourgain_corpus(corpus_id: u64, count: usize, level: u32) -> Result<Vec<GridDensity>> {
    (0..count)
        .map(|i| {
            let family = Family::ALL[i % 3];
            sample(family, level, corpus_id << 32 | i as u64)
        })
        .collect()
}
