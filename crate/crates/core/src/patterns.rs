//! Configurations `(x, x + t, x + P(t))` inside finite approximations of
//! Cantor-type sets, and the pattern mass `<nu, 1>`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bump::BumpFunction;
use crate::error::{Error, Result};
use crate::grid::GridDensity;
use crate::measures::{mollify, CantorSpec};
use crate::polynomial::Polynomial;
use crate::trilinear::trilinear_physical;

/// Default number of node expansions of [`find_configurations`].
pub const DEFAULT_BUDGET: u64 = 1_000_000;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow2(e: i32) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn half(x: &BigRational, y: &BigRational) -> BigRational {
    (x + y) / BigInt::from(2)
}

/// Closed interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::IntervalSet(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: BigRational) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn intersects(&self, o: &Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&o.lo).clone();
        let hi = (&self.hi).min(&o.hi).clone();
        (lo <= hi).then_some(Interval { lo, hi })
    }

    fn mid(&self) -> BigRational {
        half(&self.lo, &self.hi)
    }

    fn f64_bounds(&self) -> (f64, f64) {
        (to_f64(&self.lo), to_f64(&self.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Sorted closed intervals of one common length covering a finite stage
/// of a Cantor-type construction. Neighbours may share an endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    depth: u32,
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(depth: u32, intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::IntervalSet("no intervals".into()));
        }
        let len = intervals[0].length();
        for (i, iv) in intervals.iter().enumerate() {
            if iv.length() != len {
                return Err(Error::IntervalSet(format!(
                    "interval {i} has length {}, expected {len}",
                    iv.length()
                )));
            }
            if i > 0 && intervals[i - 1].hi > iv.lo {
                return Err(Error::IntervalSet(format!(
                    "intervals {} and {i} overlap or are unsorted",
                    i - 1
                )));
            }
        }
        Ok(Self { depth, intervals })
    }

    /// `[0, 1]`.
    pub fn unit() -> Self {
        Self {
            depth: 0,
            intervals: vec![Interval::new(rat(0, 1), rat(1, 1)).expect("valid")],
        }
    }

    /// The stage-`spec.depth` approximation of the construction.
    pub fn from_cantor(spec: &CantorSpec) -> Result<Self> {
        let cells = spec.surviving_cells()?;
        let n = BigInt::from(spec.branching).pow(spec.depth);
        let intervals = cells
            .into_iter()
            .map(|c| Interval {
                lo: BigRational::new(BigInt::from(c), n.clone()),
                hi: BigRational::new(BigInt::from(c + 1), n.clone()),
            })
            .collect();
        Self::new(spec.depth, intervals)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn interval_length(&self) -> BigRational {
        self.intervals[0].length()
    }

    /// Largest `l0` with interval length at most `2^{-l0-2}`; `None` for a
    /// single interval, which resolves every window.
    pub fn max_resolvable_l0(&self) -> Option<i32> {
        if self.len() <= 1 {
            return None;
        }
        let len = self.interval_length();
        let mut l0 = (-len.to_f64()?.log2()).floor() as i32 - 2;
        while len > pow2(-l0 - 2) {
            l0 -= 1;
        }
        while len <= pow2(-l0 - 3) {
            l0 += 1;
        }
        Some(l0)
    }

    /// Indices of the intervals containing `x` (two when `x` is a shared
    /// endpoint).
    pub fn containing(&self, x: &BigRational) -> Vec<usize> {
        let start = self.intervals.partition_point(|iv| &iv.hi < x);
        (start..self.intervals.len())
            .take_while(|&i| &self.intervals[i].lo <= x)
            .collect()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        !self.containing(x).is_empty()
    }

    /// Every interval of `finer` lies in an interval of `self`.
    pub fn is_refined_by(&self, finer: &IntervalSet) -> bool {
        finer.intervals.iter().all(|iv| {
            self.containing(&iv.lo)
                .iter()
                .any(|&i| self.intervals[i].contains_interval(iv))
        })
    }

    fn is_endpoint(&self, x: &BigRational) -> bool {
        self.containing(x)
            .iter()
            .any(|&i| &self.intervals[i].lo == x || &self.intervals[i].hi == x)
    }

    // Indices whose intervals meet [lo, hi], found in floating point with a
    // margin wide enough to never miss one.
    fn candidates(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let slack = 1e-9 * (1.0 + hi.abs());
        let a = self
            .intervals
            .partition_point(|iv| to_f64(&iv.hi) < lo - slack);
        let b = self
            .intervals
            .partition_point(|iv| to_f64(&iv.lo) <= hi + slack);
        a..b.max(a)
    }
}

/// Exact polynomial with rational coefficients.
#[derive(Debug, Clone)]
struct RatPoly {
    terms: Vec<(BigRational, u32)>,
}

impl RatPoly {
    fn from_polynomial(p: &Polynomial) -> Self {
        Self {
            terms: p
                .terms()
                .iter()
                .map(|t| {
                    (
                        BigRational::from_float(t.coeff).expect("finite coefficient"),
                        t.exponent,
                    )
                })
                .collect(),
        }
    }

    /// `self - t`.
    fn minus_identity(&self) -> Self {
        let mut terms = self.terms.clone();
        match terms.iter_mut().find(|(_, e)| *e == 1) {
            Some(t) => t.0 -= BigRational::one(),
            None => terms.insert(0, (-BigRational::one(), 1)),
        }
        terms.retain(|(c, _)| !c.is_zero());
        Self { terms }
    }

    fn derivative(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(c, e)| (c * BigInt::from(*e), e - 1))
                .filter(|(c, _)| !c.is_zero())
                .collect(),
        }
    }

    fn eval(&self, t: &BigRational) -> BigRational {
        self.terms
            .iter()
            .fold(BigRational::zero(), |acc, (c, e)| acc + c * t.pow(*e as i32))
    }

    // Termwise enclosure on an interval of nonnegative reals.
    fn enclosure_nonneg(&self, iv: &Interval) -> Interval {
        let (mut lo, mut hi) = (BigRational::zero(), BigRational::zero());
        for (c, e) in &self.terms {
            let (a, b) = (iv.lo.pow(*e as i32), iv.hi.pow(*e as i32));
            if c.is_positive() {
                lo += c * a;
                hi += c * b;
            } else {
                lo += c * b;
                hi += c * a;
            }
        }
        Interval { lo, hi }
    }

    /// Outer enclosure of the image of `iv` (inside `t > 0`), exact when
    /// the derivative keeps one sign.
    fn image(&self, iv: &Interval) -> Interval {
        let d = self.derivative().enclosure_nonneg(iv);
        if !d.lo.is_negative() || !d.hi.is_positive() {
            let (a, b) = (self.eval(&iv.lo), self.eval(&iv.hi));
            if a <= b {
                Interval { lo: a, hi: b }
            } else {
                Interval { lo: b, hi: a }
            }
        } else {
            self.enclosure_nonneg(iv)
        }
    }
}

/// A certified configuration: `x_box` lies in interval `indices.0`,
/// `x_box + t_box` in `indices.1` and `x_box + P(t_box)` in `indices.2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationTriple {
    pub indices: (usize, usize, usize),
    pub x_box: Interval,
    pub t_box: Interval,
    pub certified: bool,
    /// `(x, x + t, x + P(t))` at the box centres.
    pub witnesses: [BigRational; 3],
    /// All three witnesses are endpoints of the approximation, so they
    /// persist into the limit set.
    pub endpoint_witness: bool,
}

impl ConfigurationTriple {
    /// Recheck the witnesses and boxes against `set` in exact arithmetic.
    pub fn verify(&self, set: &IntervalSet, p: &Polynomial, l0: i32) -> bool {
        let rp = RatPoly::from_polynomial(p);
        let iv = set.intervals();
        let (i, j, k) = self.indices;
        let window = Interval {
            lo: pow2(-l0),
            hi: pow2(1 - l0),
        };
        let [x, y, z] = &self.witnesses;
        let t = y - x;
        let pt = rp.image(&self.t_box);
        window.contains_interval(&self.t_box)
            && self.t_box.contains(&t)
            && self.x_box.contains(x)
            && &(x + rp.eval(&t)) == z
            && iv[i].contains_interval(&self.x_box)
            && iv[j].contains(&(&self.x_box.lo + &self.t_box.lo))
            && iv[j].contains(&(&self.x_box.hi + &self.t_box.hi))
            && iv[k].contains(&(&self.x_box.lo + &pt.lo))
            && iv[k].contains(&(&self.x_box.hi + &pt.hi))
            && iv[i].contains(x)
            && iv[j].contains(y)
            && iv[k].contains(z)
    }

    pub fn to_line(&self) -> String {
        let (i, j, k) = self.indices;
        let [x, y, z] = &self.witnesses;
        format!(
            "{i} {j} {k} x_box={} t_box={} witness=({x}, {y}, {z}) endpoints={}",
            self.x_box, self.t_box, self.endpoint_witness
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Certified triples, sorted by `x_box` and then by indices.
    pub triples: Vec<ConfigurationTriple>,
    /// Candidate triples left undecided when the budget ran out.
    pub inconclusive: Vec<(usize, usize, usize)>,
    pub expansions: u64,
}

impl SearchResult {
    pub fn is_inconclusive(&self) -> bool {
        !self.inconclusive.is_empty()
    }

    pub fn index_set(&self) -> Vec<(usize, usize, usize)> {
        let mut v: Vec<_> = self.triples.iter().map(|t| t.indices).collect();
        v.sort_unstable();
        v
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# certified {} inconclusive {} expansions {}\n",
            self.triples.len(),
            self.inconclusive.len(),
            self.expansions
        );
        for t in &self.triples {
            s.push_str(&t.to_line());
            s.push('\n');
        }
        s
    }
}

enum Decision {
    Feasible(Box<ConfigurationTriple>),
    Infeasible,
    Undecided,
}

struct Problem<'a> {
    set: &'a IntervalSet,
    p: RatPoly,
    q: RatPoly,
    window: Interval,
}

impl Problem<'_> {
    // Exists t in t0 with P(t) in a and P(t) - t in b; then some x in I has
    // x + t in J and x + P(t) in K.
    fn decide(&self, (i, j, k): (usize, usize, usize), budget: &mut u64) -> Decision {
        let iv = self.set.intervals();
        let (ii, jj, kk) = (&iv[i], &iv[j], &iv[k]);
        let Some(t0) = self.window.intersect(&Interval {
            lo: &jj.lo - &ii.hi,
            hi: &jj.hi - &ii.lo,
        }) else {
            return Decision::Infeasible;
        };
        let a = Interval {
            lo: &kk.lo - &ii.hi,
            hi: &kk.hi - &ii.lo,
        };
        let b = Interval {
            lo: &kk.lo - &jj.hi,
            hi: &kk.hi - &jj.lo,
        };
        let ok = |t: &BigRational| {
            t0.contains(t) && a.contains(&self.p.eval(t)) && b.contains(&self.q.eval(t))
        };
        // Endpoint witnesses first, then the remaining points where two
        // constraints can be active together.
        let mut points = Vec::new();
        for x in [&ii.lo, &ii.hi] {
            for y in [&jj.lo, &jj.hi] {
                points.push(y - x);
            }
        }
        points.push(t0.lo.clone());
        points.push(t0.hi.clone());
        for u in [&a.lo, &a.hi] {
            for v in [&b.lo, &b.hi] {
                points.push(u - v);
            }
        }
        let mut first: Option<ConfigurationTriple> = None;
        for t in &points {
            if ok(t) {
                let c = self.point_certificate((i, j, k), t);
                if c.endpoint_witness {
                    return Decision::Feasible(Box::new(c));
                }
                first.get_or_insert(c);
            }
        }
        if let Some(c) = first {
            return Decision::Feasible(Box::new(c));
        }
        let mut stack = vec![t0.clone()];
        while let Some(tau) = stack.pop() {
            if *budget == 0 {
                return Decision::Undecided;
            }
            *budget -= 1;
            let (pi, qi) = (self.p.image(&tau), self.q.image(&tau));
            if !pi.intersects(&a) || !qi.intersects(&b) {
                continue;
            }
            if a.contains_interval(&pi) && b.contains_interval(&qi) {
                return Decision::Feasible(Box::new(self.box_certificate((i, j, k), &tau, &pi)));
            }
            let m = tau.mid();
            if ok(&m) {
                return Decision::Feasible(Box::new(self.point_certificate((i, j, k), &m)));
            }
            stack.push(Interval {
                lo: m.clone(),
                hi: tau.hi.clone(),
            });
            stack.push(Interval { lo: tau.lo, hi: m });
        }
        Decision::Infeasible
    }

    fn finish(
        &self,
        idx: (usize, usize, usize),
        x_box: Interval,
        t_box: Interval,
        t: BigRational,
    ) -> ConfigurationTriple {
        let x = x_box.mid();
        let y = &x + &t;
        let z = &x + self.p.eval(&t);
        let endpoint_witness =
            self.set.is_endpoint(&x) && self.set.is_endpoint(&y) && self.set.is_endpoint(&z);
        ConfigurationTriple {
            indices: idx,
            x_box,
            t_box,
            certified: true,
            witnesses: [x, y, z],
            endpoint_witness,
        }
    }

    fn point_certificate(&self, idx: (usize, usize, usize), t: &BigRational) -> ConfigurationTriple {
        let iv = self.set.intervals();
        let (ii, jj, kk) = (&iv[idx.0], &iv[idx.1], &iv[idx.2]);
        let pt = self.p.eval(t);
        let lo = [&ii.lo, &(&jj.lo - t), &(&kk.lo - &pt)]
            .into_iter()
            .max()
            .expect("nonempty")
            .clone();
        let hi = [&ii.hi, &(&jj.hi - t), &(&kk.hi - &pt)]
            .into_iter()
            .min()
            .expect("nonempty")
            .clone();
        // Prefer an endpoint of I as the witness x when it works.
        let x_box = if self.set.is_endpoint(&lo) {
            Interval::point(lo)
        } else if self.set.is_endpoint(&hi) {
            Interval::point(hi)
        } else {
            Interval { lo, hi }
        };
        self.finish(idx, x_box, Interval::point(t.clone()), t.clone())
    }

    fn box_certificate(
        &self,
        idx: (usize, usize, usize),
        tau: &Interval,
        ptau: &Interval,
    ) -> ConfigurationTriple {
        let iv = self.set.intervals();
        let (ii, jj, kk) = (&iv[idx.0], &iv[idx.1], &iv[idx.2]);
        let lo = [&ii.lo, &(&jj.lo - &tau.lo), &(&kk.lo - &ptau.lo)]
            .into_iter()
            .max()
            .expect("nonempty")
            .clone();
        let hi = [&ii.hi, &(&jj.hi - &tau.hi), &(&kk.hi - &ptau.hi)]
            .into_iter()
            .min()
            .expect("nonempty")
            .clone();
        if lo <= hi {
            let t = tau.mid();
            self.finish(idx, Interval { lo, hi }, tau.clone(), t)
        } else {
            self.point_certificate(idx, &tau.mid())
        }
    }
}

/// Every triple `(I, J, K)` of intervals of `set` for which some `x in I`
/// and `t in [2^{-l0}, 2^{1-l0}]` give `x + t in J` and `x + P(t) in K`,
/// each with an exact certificate. Candidates come from a floating-point
/// sweep; each is decided by exact bisection in `t`. The budget is shared
/// evenly between the intervals `I`, so the outcome is schedule-independent.
pub fn find_configurations(
    set: &IntervalSet,
    p: &Polynomial,
    l0: i32,
    budget: u64,
) -> Result<SearchResult> {
    if set.len() > 1 && set.interval_length() > pow2(-l0 - 2) {
        return Err(Error::IntervalSet(format!(
            "interval length {} exceeds 2^-{} needed to resolve t",
            set.interval_length(),
            l0 + 2
        )));
    }
    let rp = RatPoly::from_polynomial(p);
    let problem = Problem {
        set,
        q: rp.minus_identity(),
        p: rp,
        window: Interval {
            lo: pow2(-l0),
            hi: pow2(1 - l0),
        },
    };
    let dense = p.dense();
    let (w_lo, w_hi) = problem.window.f64_bounds();
    let share = budget / set.len() as u64 + 1;
    let per_root: Vec<(Vec<ConfigurationTriple>, Vec<(usize, usize, usize)>, u64)> = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let mut left = share;
            let mut found = Vec::new();
            let mut undecided = Vec::new();
            let (ilo, ihi) = set.intervals[i].f64_bounds();
            for j in set.candidates(ilo + w_lo, ihi + w_hi) {
                let (jlo, jhi) = set.intervals[j].f64_bounds();
                let (tlo, thi) = ((jlo - ihi).max(w_lo), (jhi - ilo).min(w_hi));
                if tlo > thi + 1e-9 {
                    continue;
                }
                let (plo, phi) = dense.range_on(tlo.min(thi), thi.max(tlo));
                for k in set.candidates(ilo + plo, ihi + phi) {
                    match problem.decide((i, j, k), &mut left) {
                        Decision::Feasible(c) => found.push(*c),
                        Decision::Infeasible => {}
                        Decision::Undecided => undecided.push((i, j, k)),
                    }
                }
            }
            (found, undecided, share - left)
        })
        .collect();
    let mut triples = Vec::new();
    let mut inconclusive = Vec::new();
    let mut expansions = 0;
    for (f, u, e) in per_root {
        triples.extend(f);
        inconclusive.extend(u);
        expansions += e;
    }
    triples.sort_by(|a, b| match a.x_box.cmp(&b.x_box) {
        Ordering::Equal => a.indices.cmp(&b.indices),
        o => o,
    });
    Ok(SearchResult {
        triples,
        inconclusive,
        expansions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuMassResult {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    /// `|v(eps_k) - v(eps_{k+1})|`.
    pub cauchy: Vec<f64>,
    /// Linear extrapolation in `eps` through the last two values.
    pub limit_estimate: f64,
    /// Last Cauchy difference relative to `|limit_estimate|`.
    pub residual: f64,
}

impl NuMassResult {
    pub fn cauchy_decreasing(&self) -> bool {
        self.cauchy.windows(2).all(|w| w[1] < w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,value\n");
        for (e, v) in self.epsilons.iter().zip(&self.values) {
            s.push_str(&format!("{e:e},{v:.17e}\n"));
        }
        s
    }
}

/// `int int mu_eps(x + P(y - x)) tau_l0(y - x) dmu_eps(x) dmu_eps(y)` for
/// each `eps`, with `mu_eps = mu * theta_eps`. After `y = x + t` this is the
/// trilinear form of `mu_eps` with itself.
pub fn nu_mass(mu: &GridDensity, p: &Polynomial, l0: i32, epsilons: &[f64]) -> Result<NuMassResult> {
    if epsilons.is_empty()
        || epsilons.iter().any(|e| !(*e > 0.0))
        || epsilons.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(Error::NonMonotoneEpsilon);
    }
    let values = epsilons
        .iter()
        .map(|&eps| {
            let m = mollify(mu, eps, BumpFunction::THETA)?;
            trilinear_physical(&m, &m, &m, l0, p)
        })
        .collect::<Result<Vec<f64>>>()?;
    let cauchy: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let n = values.len();
    let limit_estimate = if n >= 2 {
        let (e1, e2) = (epsilons[n - 2], epsilons[n - 1]);
        (e1 * values[n - 1] - e2 * values[n - 2]) / (e1 - e2)
    } else {
        values[0]
    };
    let residual = match cauchy.last() {
        Some(c) if limit_estimate != 0.0 => c / limit_estimate.abs(),
        Some(_) => f64::INFINITY,
        None => f64::NAN,
    };
    Ok(NuMassResult {
        epsilons: epsilons.to_vec(),
        values,
        cauchy,
        limit_estimate,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin2() -> Polynomial {
        Polynomial::from_pairs(&[(2.0, 1)]).unwrap()
    }

    #[test]
    fn unit_interval_certifies() {
        let p = Polynomial::from_pairs(&[(1.0, 2)]).unwrap();
        let r = find_configurations(&IntervalSet::unit(), &p, 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.index_set(), vec![(0, 0, 0)]);
        let t = &r.triples[0];
        assert!(t.verify(&IntervalSet::unit(), &p, 4));
        assert!(t.witnesses[0].is_zero());
    }

    #[test]
    fn gap_forces_empty() {
        let w = rat(1, 1024);
        let e = IntervalSet::new(
            10,
            vec![
                Interval::new(rat(0, 1), w.clone()).unwrap(),
                Interval::new(rat(1, 2), rat(1, 2) + w).unwrap(),
            ],
        )
        .unwrap();
        let r = find_configurations(&e, &lin2(), 4, DEFAULT_BUDGET).unwrap();
        assert!(r.triples.is_empty() && !r.is_inconclusive());
    }

    #[test]
    fn validation() {
        let a = Interval::new(rat(0, 1), rat(1, 4)).unwrap();
        let b = Interval::new(rat(1, 8), rat(3, 8)).unwrap();
        assert!(IntervalSet::new(2, vec![a.clone(), b]).is_err());
        let c = Interval::new(rat(1, 2), rat(1, 1)).unwrap();
        assert!(IntervalSet::new(2, vec![a, c]).is_err());
        let cantor = IntervalSet::from_cantor(&CantorSpec::middle_thirds(2)).unwrap();
        assert!(matches!(
            find_configurations(&cantor, &lin2(), 3, 10),
            Err(Error::IntervalSet(_))
        ));
        assert_eq!(cantor.max_resolvable_l0(), Some(1));
        let deep = IntervalSet::from_cantor(&CantorSpec::middle_thirds(8)).unwrap();
        assert_eq!(deep.max_resolvable_l0(), Some(10));
        assert_eq!(IntervalSet::unit().max_resolvable_l0(), None);
    }

    #[test]
    fn refinement_nests() {
        let a = IntervalSet::from_cantor(&CantorSpec::middle_thirds(3)).unwrap();
        let b = IntervalSet::from_cantor(&CantorSpec::middle_thirds(4)).unwrap();
        assert!(a.is_refined_by(&b) && !b.is_refined_by(&a));
        assert_eq!(a.containing(&rat(1, 3)), vec![3]);
        assert!(a.contains(&rat(2, 9)) && !a.contains(&rat(1, 2)));
    }

    #[test]
    fn certificates_verify_and_nest() {
        let p = Polynomial::t_plus_t2();
        let e5 = IntervalSet::from_cantor(&CantorSpec::middle_thirds(5)).unwrap();
        let e6 = IntervalSet::from_cantor(&CantorSpec::middle_thirds(6)).unwrap();
        let r6 = find_configurations(&e6, &p, 3, DEFAULT_BUDGET).unwrap();
        let r5 = find_configurations(&e5, &p, 3, DEFAULT_BUDGET).unwrap();
        assert!(!r6.triples.is_empty());
        assert!(r6.triples.iter().all(|t| t.verify(&e6, &p, 3)));
        let parent = |i: usize| e5.containing(&e6.intervals()[i].lo)[0];
        let coarse = r5.index_set();
        for (i, j, k) in r6.index_set() {
            assert!(coarse.binary_search(&(parent(i), parent(j), parent(k))).is_ok());
        }
    }

    #[test]
    fn nu_mass_basics() {
        let p = Polynomial::t_plus_t2();
        let u = GridDensity::uniform(10).unwrap();
        let r = nu_mass(&u, &p, 3, &[1.0 / 64.0, 1.0 / 128.0]).unwrap();
        assert!(r.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let narrow = GridDensity::from_fn(10, |x| if (x - 0.5).abs() < 0.004 { 1.0 } else { 0.0 }).unwrap();
        let r = nu_mass(&narrow, &p, 3, &[1.0 / 512.0]).unwrap();
        assert!(r.values[0].abs() < 1e-12);
        assert!(matches!(
            nu_mass(&u, &p, 3, &[0.01, 0.02]),
            Err(Error::NonMonotoneEpsilon)
        ));
    }
}
