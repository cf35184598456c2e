//! Cantor-type probability measures, mollification and the ball condition.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bump::BumpFunction;
use crate::error::{invalid, Error, Result};
use crate::grid::{cell_count, GridDensity, MAX_CELLS};
use crate::quad::gauss;

/// Recipe for a Cantor-type set: at each of `depth` steps every surviving
/// interval is cut into `branching` equal pieces of which `survivors` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub branching: u32,
    pub survivors: u32,
    pub depth: u32,
    pub randomized: bool,
    pub seed: u64,
}

impl CantorSpec {
    /// The middle-thirds construction.
    pub fn middle_thirds(depth: u32) -> Self {
        Self {
            branching: 3,
            survivors: 2,
            depth,
            randomized: false,
            seed: 0,
        }
    }

    pub fn random(branching: u32, survivors: u32, depth: u32, seed: u64) -> Self {
        Self {
            branching,
            survivors,
            depth,
            randomized: true,
            seed,
        }
    }

    /// `log t / log n`.
    pub fn dimension(&self) -> f64 {
        (self.survivors as f64).ln() / (self.branching as f64).ln()
    }

    pub fn validate(&self) -> Result<()> {
        if self.branching < 2 {
            return Err(invalid("branching", "must be at least 2"));
        }
        if self.survivors == 0 {
            return Err(invalid("survivors", "must be at least 1"));
        }
        if self.survivors > self.branching {
            return Err(Error::SurvivorsExceedBranching {
                survivors: self.survivors,
                branching: self.branching,
            });
        }
        let mass = (self.survivors as f64).powi(-(self.depth as i32));
        if !(mass.is_normal()) {
            return Err(Error::DepthTooLarge {
                depth: self.depth,
                reason: format!("survivors^-depth = {mass:e} underflows"),
            });
        }
        if cell_count(self.branching, self.depth).is_err() {
            return Err(Error::DepthTooLarge {
                depth: self.depth,
                reason: format!(
                    "{}^{} construction cells exceed {MAX_CELLS}",
                    self.branching, self.depth
                ),
            });
        }
        Ok(())
    }

    /// Fixed survivor pattern: `t` indices spread evenly over `0..n`, always
    /// including the first and last piece (`{0, 2}` for thirds).
    pub fn pattern(&self) -> Vec<u32> {
        let (n, t) = (self.branching as u64, self.survivors as u64);
        if t == 1 {
            return vec![0];
        }
        (0..t)
            .map(|i| ((2 * i * (n - 1) + (t - 1)) / (2 * (t - 1))) as u32)
            .collect()
    }

    /// Indices of the surviving cells of the `branching^depth` partition, sorted.
    pub fn surviving_cells(&self) -> Result<Vec<u64>> {
        self.validate()?;
        let n = self.branching as u64;
        let fixed = self.pattern();
        let mut cells = vec![0u64];
        for level in 0..self.depth {
            cells = if self.randomized {
                cells
                    .par_iter()
                    .flat_map_iter(|&p| {
                        random_children(self, level, p)
                            .into_iter()
                            .map(move |c| p * n + c as u64)
                    })
                    .collect()
            } else {
                cells
                    .iter()
                    .flat_map(|&p| fixed.iter().map(move |&c| p * n + c as u64))
                    .collect()
            };
        }
        Ok(cells)
    }
}

// Counter-based: the child choice of a parent depends only on
// (seed, level, parent index), never on traversal order.
fn random_children(spec: &CantorSpec, level: u32, parent: u64) -> Vec<u32> {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&spec.seed.to_le_bytes());
    key[8..12].copy_from_slice(&spec.branching.to_le_bytes());
    key[12..16].copy_from_slice(&spec.survivors.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream((level as u64) << 40 | parent);
    let mut chosen: Vec<u32> = sample(&mut rng, spec.branching as usize, spec.survivors as usize)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    chosen.sort_unstable();
    chosen
}

/// The construction on its own `branching^depth` grid, where it is exact:
/// every surviving cell carries density `(n / t)^depth`.
pub fn cantor_measure_native(spec: &CantorSpec) -> Result<GridDensity> {
    let cells = spec.surviving_cells()?;
    let n = cell_count(spec.branching, spec.depth)?;
    let d = spec.depth as i32;
    let height = (spec.branching as f64).powi(d) / (spec.survivors as f64).powi(d);
    let mut values = vec![0.0; n];
    for c in cells {
        values[c as usize] = height;
    }
    GridDensity::with_base(spec.branching, spec.depth, values)
}

/// The construction on the dyadic grid of level `grid_level`, cells assigned
/// by exact proportional overlap.
pub fn cantor_measure(spec: &CantorSpec, grid_level: u32) -> Result<GridDensity> {
    spec.validate()?;
    let n = spec.branching;
    if n.is_power_of_two() {
        let need = n.trailing_zeros() * spec.depth;
        if grid_level < need {
            return Err(Error::GridTooCoarse(format!(
                "branching {n} at depth {} needs grid level >= {need}, got {grid_level}",
                spec.depth
            )));
        }
    }
    cantor_measure_native(spec)?.project(2, grid_level)
}

/// Randomized construction; `spec.randomized` is forced on.
pub fn random_salem_measure(spec: &CantorSpec, grid_level: u32) -> Result<GridDensity> {
    let spec = CantorSpec {
        randomized: true,
        ..*spec
    };
    cantor_measure(&spec, grid_level)
}

/// Discrete kernel of `theta_eps` acting on cell averages:
/// `K_m = int (1 - |u|/h)_+ theta_eps(m h + u) du`, for `m` in `first..first+len`.
pub fn mollifier_kernel(h: f64, eps: f64, bump: BumpFunction) -> (i64, Vec<f64>) {
    let (lo, hi) = bump.support();
    let first = (eps * lo / h).floor() as i64 - 1;
    let last = (eps * hi / h).ceil() as i64 + 1;
    let g = gauss(16);
    let knots: Vec<f64> = bump.knots().iter().map(|k| k * eps).collect();
    let mut kernel: Vec<f64> = (first..=last)
        .map(|m| {
            let c = m as f64 * h;
            let mut br = vec![-h, 0.0, h];
            br.extend(knots.iter().map(|k| k - c).filter(|u| u.abs() < h));
            br.sort_by(f64::total_cmp);
            br.windows(2)
                .filter(|w| w[1] > w[0])
                .map(|w| {
                    g.integrate(w[0], w[1], |u| {
                        (1.0 - u.abs() / h) * bump.eval((c + u) / eps) / eps
                    })
                })
                .sum()
        })
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);
    (first, kernel)
}

const DIRECT_KERNEL_MAX: usize = 129;

/// Circular convolution `mu * bump_eps` on the grid of `mu`.
pub fn mollify(mu: &GridDensity, eps: f64, bump: BumpFunction) -> Result<GridDensity> {
    let h = mu.cell_width();
    if !(eps >= h) || !eps.is_finite() {
        return Err(Error::MollifierTooNarrow { eps, cell: h });
    }
    let (first, kernel) = mollifier_kernel(h, eps, bump);
    let values = circular_convolve(mu.values(), first, &kernel);
    GridDensity::with_base(mu.base(), mu.level(), values)
}

/// `out_i = sum_m kernel[m - first] v_{i - m}`, indices mod `n`; small kernels
/// directly, large ones by FFT (tiny negative round-off is clipped).
pub(crate) fn circular_convolve(v: &[f64], first: i64, kernel: &[f64]) -> Vec<f64> {
    let n = v.len();
    if kernel.len() <= DIRECT_KERNEL_MAX {
        return (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for (j, k) in kernel.iter().enumerate() {
                    let src = (i as i64 - first - j as i64).rem_euclid(n as i64) as usize;
                    acc += k * v[src];
                }
                acc
            })
            .collect();
    }
    let mut wrapped = vec![Complex64::new(0.0, 0.0); n];
    for (j, k) in kernel.iter().enumerate() {
        wrapped[(first + j as i64).rem_euclid(n as i64) as usize].re += k;
    }
    let mut data: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    fwd.process(&mut wrapped);
    fwd.process(&mut data);
    for (d, w) in data.iter_mut().zip(&wrapped) {
        *d *= w;
    }
    inv.process(&mut data);
    let scale = 1.0 / n as f64;
    data.iter().map(|z| (z.re * scale).max(0.0)).collect()
}

/// `mu(I) / |I|^alpha` for the grid-aligned interval of `cells` cells starting at `start`.
pub fn ball_ratio(mu: &GridDensity, start: usize, cells: usize, alpha: f64) -> f64 {
    let h = mu.cell_width();
    let m: f64 = mu.values()[start..start + cells].iter().sum::<f64>() * h;
    m / (cells as f64 * h).powf(alpha)
}

/// `sup_I mu(I) / |I|^alpha` over every grid-aligned interval `I` of `[0, 1]`.
pub fn ball_constant(mu: &GridDensity, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid("alpha", "must lie in (0, 1]"));
    }
    let h = mu.cell_width();
    let n = mu.len();
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for v in mu.values() {
        acc += v * h;
        prefix.push(acc);
    }
    let best = (1..=n)
        .into_par_iter()
        .map(|m| {
            let mut top = 0.0f64;
            for i in 0..=n - m {
                top = top.max(prefix[i + m] - prefix[i]);
            }
            top / (m as f64 * h).powf(alpha)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// The constants `(alpha, beta, C1, C2, B)` of the two measure conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureConditions {
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub b: f64,
}

impl MeasureConditions {
    pub fn new(alpha: f64, beta: f64, c1: f64, c2: f64, b: f64) -> Result<Self> {
        let c = Self {
            alpha,
            beta,
            c1,
            c2,
            b,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        if !open(self.alpha) {
            return Err(invalid("alpha", "must lie in (0, 1)"));
        }
        if !open(self.beta) {
            return Err(invalid("beta", "must lie in (0, 1)"));
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("b", self.b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive and finite"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn depth_one_thirds() {
        let g = cantor_measure_native(&CantorSpec::middle_thirds(1)).unwrap();
        assert_eq!(g.values(), &[1.5, 0.0, 1.5]);
        let u = cantor_measure(&CantorSpec::middle_thirds(0), 4).unwrap();
        assert!(u.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn depth_six_matches_recursion_oracle() {
        // Independent recursion over exact rational intervals.
        let mut ivs = vec![(Ratio::new(0i64, 1), Ratio::new(1i64, 1))];
        for _ in 0..6 {
            ivs = ivs
                .into_iter()
                .flat_map(|(a, b)| {
                    let third = (b - a) / 3;
                    [(a, a + third), (b - third, b)]
                })
                .collect();
        }
        assert_eq!(ivs.len(), 64);
        let g = cantor_measure_native(&CantorSpec::middle_thirds(6)).unwrap();
        let h = Ratio::new(1, 729);
        for (a, b) in &ivs {
            assert_eq!(*b - *a, h);
            let cell = (*a / h).to_integer() as usize;
            let mass = g.values()[cell] / 729.0;
            assert!((mass - 1.0 / 64.0).abs() < 1e-17);
        }
        let support = g.values().iter().filter(|&&v| v > 0.0).count();
        assert_eq!(support, 64);
        assert!((g.mass() - 1.0).abs() < 1e-12);
        // The dyadic projection keeps the mass of each surviving interval.
        let d = cantor_measure(&CantorSpec::middle_thirds(6), 14).unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn self_similarity() {
        let s = CantorSpec {
            branching: 5,
            survivors: 3,
            depth: 3,
            randomized: false,
            seed: 0,
        };
        let coarse = cantor_measure_native(&CantorSpec { depth: 2, ..s }).unwrap();
        let fine = cantor_measure_native(&s).unwrap();
        let one = cantor_measure_native(&CantorSpec { depth: 1, ..s }).unwrap();
        for (p, &v) in coarse.values().iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for c in 0..5 {
                let rel = fine.values()[5 * p + c] / v;
                assert!((rel - one.values()[c]).abs() <= 1e-15 * one.values()[c].max(1.0));
            }
        }
    }

    #[test]
    fn errors() {
        let bad = CantorSpec {
            survivors: 4,
            ..CantorSpec::middle_thirds(2)
        };
        assert!(matches!(
            cantor_measure(&bad, 8),
            Err(Error::SurvivorsExceedBranching { .. })
        ));
        let deep = CantorSpec {
            branching: 2000,
            survivors: 1000,
            depth: 120,
            ..CantorSpec::middle_thirds(0)
        };
        assert!(matches!(deep.validate(), Err(Error::DepthTooLarge { .. })));
        let quad = CantorSpec {
            branching: 4,
            survivors: 2,
            depth: 5,
            ..CantorSpec::middle_thirds(0)
        };
        assert!(matches!(cantor_measure(&quad, 9), Err(Error::GridTooCoarse(_))));
        assert!(cantor_measure(&quad, 10).is_ok());
    }

    #[test]
    fn random_measure_is_reproducible() {
        let s = CantorSpec::random(4, 2, 5, 42);
        let a = random_salem_measure(&s, 10).unwrap();
        let b = random_salem_measure(&s, 10).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        assert!((a.mass() - 1.0).abs() < 1e-12);
        let c = random_salem_measure(&CantorSpec { seed: 43, ..s }, 10).unwrap();
        assert_ne!(a, c);
        let full = random_salem_measure(&CantorSpec::random(4, 4, 3, 7), 6).unwrap();
        assert!(full.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn mollify_basics() {
        let u = GridDensity::uniform(8).unwrap();
        let m = mollify(&u, 0.05, BumpFunction::THETA).unwrap();
        assert!(m.values().iter().all(|&v| (v - 1.0).abs() < 1e-13));
        assert!(matches!(
            mollify(&u, 1e-4, BumpFunction::THETA),
            Err(Error::MollifierTooNarrow { .. })
        ));

        let c = cantor_measure(&CantorSpec::middle_thirds(5), 10).unwrap();
        let mc = mollify(&c, 1.0 / 64.0, BumpFunction::THETA).unwrap();
        assert!((mc.mass() - 1.0).abs() < 1e-12);
        assert!(mc.values().iter().all(|&v| v >= 0.0));
        // Same result through the FFT path and the direct path.
        let big = mollify(&c, 0.25, BumpFunction::THETA).unwrap();
        assert!((big.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mollify_spike_matches_direct_summation() {
        let level = 8;
        let n = 1usize << level;
        let h = 1.0 / n as f64;
        let j = 100;
        let mut v = vec![0.0; n];
        v[j] = n as f64;
        let spike = GridDensity::new(level, v).unwrap();
        let eps = 4.0 * h;
        let out = mollify(&spike, eps, BumpFunction::THETA).unwrap();
        // Oracle: cell average of theta_eps(x - y) over both cells, by a
        // fine midpoint double sum.
        let sub = 400;
        for i in j - 12..j + 12 {
            let mut acc = 0.0;
            for a in 0..sub {
                let x = (i as f64 + (a as f64 + 0.5) / sub as f64) * h;
                for b in 0..sub {
                    let y = (j as f64 + (b as f64 + 0.5) / sub as f64) * h;
                    acc += crate::bump::theta_scaled(x - y, eps);
                }
            }
            let oracle = acc / (sub * sub) as f64;
            assert!(
                (out.values()[i] - oracle).abs() < 1e-4 * (1.0 + oracle),
                "cell {i}: {} vs {oracle}",
                out.values()[i]
            );
        }
        assert!((out.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_constant_values() {
        let u = GridDensity::uniform(6).unwrap();
        assert!((ball_constant(&u, 1.0).unwrap() - 1.0).abs() < 1e-12);

        let alpha = 2f64.ln() / 3f64.ln();
        let t = cantor_measure_native(&CantorSpec::middle_thirds(4)).unwrap();
        // Surviving triadic intervals at every generation give ratio 1.
        for gen in 0..=4u32 {
            let len = 3usize.pow(4 - gen);
            let r = ball_ratio(&t, 0, len, alpha);
            assert!((r - 1.0).abs() < 1e-12, "gen {gen}: {r}");
        }

        let c = cantor_measure(&CantorSpec::middle_thirds(6), 12).unwrap();
        let bc = ball_constant(&c, alpha).unwrap();
        assert!((1.0..=4.0).contains(&bc), "{bc}");
        // Non-decreasing in alpha because every width is at most 1.
        let lower = ball_constant(&c, 0.5).unwrap();
        assert!(lower <= bc);
    }
}
