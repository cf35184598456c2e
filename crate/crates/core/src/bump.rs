//! The two smooth bumps: `tau0` on `[1, 2]` (scale localisation of `t`) and
//! the even plateau bump `theta` on `[-2, 2]` (mollifier).

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quad::{gauss, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpKind {
    /// `c * exp(-1/((t-1)(2-t)))` on `(1, 2)`, unit mass.
    Tau0,
    /// Even, `1/3` on `[-1, 1]`, smooth monotone descent to zero on `1 <= |x| <= 2`, unit mass.
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub kind: BumpKind,
}

impl BumpFunction {
    pub const TAU0: BumpFunction = BumpFunction {
        kind: BumpKind::Tau0,
    };
    pub const THETA: BumpFunction = BumpFunction {
        kind: BumpKind::Theta,
    };

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            BumpKind::Tau0 => tau0(x),
            BumpKind::Theta => theta(x),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            BumpKind::Tau0 => (1.0, 2.0),
            BumpKind::Theta => (-2.0, 2.0),
        }
    }

    /// Normalisation constant multiplying the raw profile.
    pub fn normalization(&self) -> f64 {
        match self.kind {
            BumpKind::Tau0 => tau0_table().norm,
            BumpKind::Theta => THETA_NORM,
        }
    }

    /// Points where the profile changes character; quadrature splits there.
    pub fn knots(&self) -> &'static [f64] {
        match self.kind {
            BumpKind::Tau0 => &[1.0, 2.0],
            BumpKind::Theta => &[-2.0, -1.0, 1.0, 2.0],
        }
    }
}

fn raw_tau0(s: f64) -> f64 {
    if s <= 1.0 || s >= 2.0 {
        0.0
    } else {
        (-1.0 / ((s - 1.0) * (2.0 - s))).exp()
    }
}

/// `tau0(s)`, normalised to unit mass on `[1, 2]`.
pub fn tau0(s: f64) -> f64 {
    tau0_table().norm * raw_tau0(s)
}

/// Smooth step: 0 for `u <= 0`, 1 for `u >= 1`, `step(u) + step(1-u) = 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

// The plateau contributes 2, each flank integrates to 1/2 by the symmetry of
// the smooth step, so the raw mass is exactly 3.
const THETA_NORM: f64 = 1.0 / 3.0;

/// `theta(x)`: even, supported on `[-2, 2]`, constant on `[-1, 1]`, unit mass.
pub fn theta(x: f64) -> f64 {
    THETA_NORM * smooth_step(2.0 - x.abs())
}

/// `theta_eps(x) = theta(x / eps) / eps`.
pub fn theta_scaled(x: f64, eps: f64) -> f64 {
    theta(x / eps) / eps
}

const TAU0_TABLE_CELLS: usize = 8192;

struct Tau0Table {
    norm: f64,
    /// Cumulative mass at `1 + i / TAU0_TABLE_CELLS`, normalised.
    cdf: Vec<f64>,
    /// Normalised density at the same nodes.
    dens: Vec<f64>,
}

fn tau0_table() -> &'static Tau0Table {
    static TABLE: OnceLock<Tau0Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let g = gauss(16);
        let m = TAU0_TABLE_CELLS;
        let h = 1.0 / m as f64;
        let mut cdf = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 0..m {
            let a = 1.0 + i as f64 * h;
            acc += g.integrate(a, a + h, raw_tau0);
            cdf.push(acc);
        }
        let norm = 1.0 / acc;
        for c in cdf.iter_mut() {
            *c *= norm;
        }
        let dens = (0..=m)
            .map(|i| norm * raw_tau0(1.0 + i as f64 * h))
            .collect();
        Tau0Table { norm, cdf, dens }
    })
}

/// `int_1^s tau0`, by cubic Hermite interpolation of a fine cumulative table
/// (the derivative data is `tau0` itself).
pub fn tau0_cdf(s: f64) -> f64 {
    if s <= 1.0 {
        return 0.0;
    }
    if s >= 2.0 {
        return 1.0;
    }
    let t = tau0_table();
    let m = TAU0_TABLE_CELLS;
    let x = (s - 1.0) * m as f64;
    let i = (x.floor() as usize).min(m - 1);
    let u = x - i as f64;
    let h = 1.0 / m as f64;
    let (y0, y1) = (t.cdf[i], t.cdf[i + 1]);
    let (d0, d1) = (t.dens[i] * h, t.dens[i + 1] * h);
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * d0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * d1
}

/// `int tau0(s) e^{i omega s} ds` by a fixed composite Gauss rule; an
/// independent route used to cross-check the adaptive multiplier integrator.
pub fn tau0_transform(omega: f64) -> Complex64 {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (xs, ws) = RULE.get_or_init(|| GaussLegendre::new(32).composite_nodes(1.0, 2.0, 256));
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &w) in xs.iter().zip(ws) {
        acc += Complex64::from_polar(w * tau0(x), omega * x);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau0_has_unit_mass_and_support() {
        let m = GaussLegendre::new(32).composite(1.0, 2.0, 64, tau0);
        assert!((m - 1.0).abs() < 1e-13);
        assert_eq!(tau0(1.0), 0.0);
        assert_eq!(tau0(2.0), 0.0);
        assert_eq!(tau0(0.5), 0.0);
        assert!(tau0(1.5) > 0.0);
        assert!((tau0_transform(0.0).re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn tau0_cdf_matches_direct_quadrature() {
        let g = GaussLegendre::new(32);
        for s in [1.05, 1.2, 1.37, 1.5, 1.81, 1.99] {
            let direct = g.composite(1.0, s, 64, tau0);
            assert!((tau0_cdf(s) - direct).abs() < 1e-13, "s={s}");
        }
        assert_eq!(tau0_cdf(2.5), 1.0);
    }

    #[test]
    fn theta_shape() {
        let m = GaussLegendre::new(32).composite(-2.0, 2.0, 64, theta);
        assert!((m - 1.0).abs() < 1e-13);
        assert_eq!(theta(0.3), theta(-0.3));
        assert_eq!(theta(0.0), theta(1.0));
        assert_eq!(theta(2.0), 0.0);
        let mut prev = theta(1.0);
        for i in 1..=100 {
            let v = theta(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }
}
