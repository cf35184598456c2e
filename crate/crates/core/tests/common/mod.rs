//! Exhaustive configuration oracle over all triples of a middle-thirds
//! Cantor stage, independent of the library's search.

use std::cmp::Ordering;

use num_rational::Ratio;

pub type Q = Ratio<i128>;

fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

/// Intervals `[c 3^-d, (c + 1) 3^-d]` of the depth-`d` middle-thirds stage,
/// in increasing order.
pub fn cantor_intervals(depth: u32) -> Vec<(Q, Q)> {
    let den = 3i128.pow(depth);
    (0..1u64 << depth)
        .map(|bits| {
            let c: i128 = (0..depth)
                .filter(|j| bits >> (depth - 1 - j) & 1 == 1)
                .map(|j| 2 * 3i128.pow(depth - 1 - j))
                .sum();
            (q(c, den), q(c + 1, den))
        })
        .collect()
}

/// Linear `P(t) = c t`: the polygon in `(x, t)` cut out by the four slabs is
/// nonempty iff one of its candidate vertices satisfies every slab.
fn linear_feasible(slabs: &[(Q, Q, Q, Q); 4]) -> bool {
    let inside = |x: &Q, t: &Q| {
        slabs
            .iter()
            .all(|(a, b, lo, hi)| {
                let v = a * x + b * t;
                *lo <= v && v <= *hi
            })
    };
    for i in 0..4 {
        for j in i + 1..4 {
            let (a1, b1, lo1, hi1) = &slabs[i];
            let (a2, b2, lo2, hi2) = &slabs[j];
            let det = a1 * b2 - a2 * b1;
            if det == Q::from_integer(0) {
                continue;
            }
            for r1 in [lo1, hi1] {
                for r2 in [lo2, hi2] {
                    let x = (r1 * b2 - r2 * b1) / det;
                    let t = (a1 * r2 - a2 * r1) / det;
                    if inside(&x, &t) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Real numbers of the forms met by `P(t) = t + t^2`: rationals, the
/// nonnegative root of `t + t^2 = a`, and `sqrt(b)`.
#[derive(Clone, Debug)]
enum Alg {
    Rat(Q),
    RootP(Q),
    Sqrt(Q),
}

fn f(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

impl Alg {
    fn approx(&self) -> f64 {
        match self {
            Alg::Rat(r) => f(r),
            Alg::RootP(a) => 2.0 * f(a) / (1.0 + (1.0 + 4.0 * f(a)).sqrt()),
            Alg::Sqrt(b) => f(b).sqrt(),
        }
    }

    fn exactly_equal(&self, o: &Alg) -> bool {
        let zero = Q::from_integer(0);
        match (self, o) {
            (Alg::Rat(r), Alg::Rat(s)) => r == s,
            (Alg::Rat(r), Alg::RootP(a)) | (Alg::RootP(a), Alg::Rat(r)) => {
                *r >= zero && r * r + r == *a
            }
            (Alg::Rat(r), Alg::Sqrt(b)) | (Alg::Sqrt(b), Alg::Rat(r)) => *r >= zero && r * r == *b,
            (Alg::RootP(a), Alg::RootP(c)) => a == c,
            (Alg::Sqrt(b), Alg::Sqrt(c)) => b == c,
            (Alg::RootP(a), Alg::Sqrt(b)) | (Alg::Sqrt(b), Alg::RootP(a)) => {
                let t = a - b;
                t >= zero && t * t == *b
            }
        }
    }

    fn cmp(&self, o: &Alg) -> Ordering {
        let (x, y) = (self.approx(), o.approx());
        if (x - y).abs() > 1e-10 {
            return x.total_cmp(&y);
        }
        assert!(self.exactly_equal(o), "oracle cannot separate {self:?} and {o:?}");
        Ordering::Equal
    }
}

/// Some `t >= 0` in `[t_lo, t_hi]` with `t + t^2` in `a` and `t^2` in `b`.
fn quadratic_feasible(t_lo: Q, t_hi: Q, a: (Q, Q), b: (Q, Q)) -> bool {
    let zero = Q::from_integer(0);
    if t_lo > t_hi || a.1 < zero || b.1 < zero {
        return false;
    }
    let lows = [
        Alg::Rat(t_lo.max(zero)),
        if a.0 > zero { Alg::RootP(a.0) } else { Alg::Rat(zero) },
        if b.0 > zero { Alg::Sqrt(b.0) } else { Alg::Rat(zero) },
    ];
    let highs = [Alg::Rat(t_hi), Alg::RootP(a.1), Alg::Sqrt(b.1)];
    let low = lows.iter().max_by(|x, y| x.cmp(y)).unwrap();
    let high = highs.iter().min_by(|x, y| x.cmp(y)).unwrap();
    low.cmp(high) != Ordering::Greater
}

pub enum OraclePoly {
    /// `P(t) = c t`.
    Linear(i128),
    /// `P(t) = t + t^2`.
    TPlusT2,
}

/// All `(i, j, k)` such that some `x in I_i`, `t in [2^-l0, 2^(1-l0)]` put
/// `x + t in I_j` and `x + P(t) in I_k`.
pub fn oracle_triples(intervals: &[(Q, Q)], poly: &OraclePoly, l0: u32) -> Vec<(usize, usize, usize)> {
    let one = Q::from_integer(1);
    let zero = Q::from_integer(0);
    let w = (q(1, 1 << l0), q(2, 1 << l0));
    let mut out = Vec::new();
    for (i, (i0, i1)) in intervals.iter().enumerate() {
        for (j, (j0, j1)) in intervals.iter().enumerate() {
            for (k, (k0, k1)) in intervals.iter().enumerate() {
                let ok = match poly {
                    OraclePoly::Linear(c) => {
                        let cq = Q::from_integer(*c);
                        let slabs = [
                            (one, zero, *i0, *i1),
                            (zero, one, w.0, w.1),
                            (one, one, *j0, *j1),
                            (one, cq, *k0, *k1),
                        ];
                        linear_feasible(&slabs)
                    }
                    OraclePoly::TPlusT2 => {
                        let t_lo = w.0.max(j0 - i1);
                        let t_hi = w.1.min(j1 - i0);
                        quadratic_feasible(t_lo, t_hi, (k0 - i1, k1 - i0), (k0 - j1, k1 - j0))
                    }
                };
                if ok {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}
