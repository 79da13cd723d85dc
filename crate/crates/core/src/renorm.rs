//! Good-box hierarchy of the renormalization scheme.
//!
//! Scales are `m_0 = a_0` and `m_n = a_n m_{n-1}` with `a_n = n^2`, so
//! `m_n = a_0 (n!)^2`. A level-0 box `B_{m_0}(x) = x + [0, m_0 - 1]^d` is good
//! if it holds no occupied edge longer than `m_0 / 100`. A level-`n` box is
//! good if for every shift `j in {-1, 0, 1}^d` the box shifted by
//! `j floor(m_{n-1} / 2)` holds no occupied edge longer than `m_{n-1} / 100`
//! and at most `3^d` of its `a_n^d` level-`(n-1)` children are bad.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::edges::{sample_graph, EdgeList, SamplingMode};
use crate::error::{invalid, Error, Result};
use crate::lattice::BoxSpec;
use crate::params::ModelParams;
use crate::rng::replicate_seeds;
use crate::stats::{wilson, z_for_confidence, Proportion};
use crate::weights::sample_weights;

/// Default cap on the number of vertex pairs of one sampled region.
pub const DEFAULT_PAIR_BUDGET: u64 = 2_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenormSchedule {
    a0: u64,
    m: Vec<u64>,
}

impl RenormSchedule {
    pub fn new(a0: u64, n_max: usize) -> Result<Self> {
        if a0 == 0 {
            return Err(invalid("a0 must be at least 1"));
        }
        let mut m = vec![a0];
        for n in 1..=n_max as u64 {
            let prev = *m.last().unwrap();
            let next = n
                .checked_mul(n)
                .and_then(|a| a.checked_mul(prev))
                .filter(|&v| v <= i64::MAX as u64)
                .ok_or_else(|| invalid(format!("m_{n} = a0 (n!)^2 overflows 63 bits for a0 = {a0}")))?;
            m.push(next);
        }
        Ok(RenormSchedule { a0, m })
    }

    pub fn a0(&self) -> u64 {
        self.a0
    }

    pub fn n_max(&self) -> usize {
        self.m.len() - 1
    }

    /// Children per axis at level `n`: `a_0` at level 0, `n^2` above.
    pub fn a(&self, n: usize) -> u64 {
        if n == 0 {
            self.a0
        } else {
            (n * n) as u64
        }
    }

    pub fn m(&self, n: usize) -> u64 {
        self.m[n]
    }

    pub fn scales(&self) -> &[u64] {
        &self.m
    }

    /// Shift `floor(m_{n-1} / 2)` applied at level `n >= 1`.
    pub fn shift(&self, n: usize) -> u64 {
        if n == 0 {
            0
        } else {
            self.m[n - 1] / 2
        }
    }

    /// Margin a level-`n` verdict needs around its anchor box.
    pub fn padding(&self, n: usize) -> u64 {
        (1..=n).map(|k| self.shift(k)).sum()
    }

    /// Region a level-`n` verdict at `x` reads.
    pub fn required_region(&self, n: usize, x: &[i64]) -> Result<BoxSpec> {
        let pad = self.padding(n) as i64;
        let side = self.m[n] + 2 * pad as u64;
        BoxSpec::corner(x.iter().map(|c| c - pad).collect(), side as usize)
    }
}

pub fn renorm_schedule(a0: u64, n_max: usize) -> Result<RenormSchedule> {
    RenormSchedule::new(a0, n_max)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FailingCondition {
    /// A box shifted by `shift` holds an occupied edge that is too long.
    LongEdge(Vec<i64>),
    /// A box shifted by `shift` has more than `3^d` bad children.
    TooManyBadChildren(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodBoxVerdict {
    pub level: usize,
    pub anchor: Vec<i64>,
    pub good: bool,
    /// First violated condition in lexicographic order of the shifts.
    pub failing_condition: Option<FailingCondition>,
}

struct LongEdge {
    lo: Vec<i64>,
    hi: Vec<i64>,
    len2: u64,
}

/// Evaluates verdicts on one edge set, memoizing child verdicts.
pub struct GoodBoxChecker<'a> {
    schedule: &'a RenormSchedule,
    region: BoxSpec,
    long: Vec<LongEdge>,
    memo: HashMap<(usize, Vec<i64>), bool>,
}

/// `true` iff `len2 > (m / 100)^2`, exactly.
fn exceeds(len2: u64, m: u64) -> bool {
    10_000u128 * len2 as u128 > (m as u128) * (m as u128)
}

fn shifts(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                [-1i64, 0, 1].into_iter().map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

impl<'a> GoodBoxChecker<'a> {
    pub fn new(edges: &EdgeList, schedule: &'a RenormSchedule) -> Self {
        let region = edges.region().clone();
        let m0 = schedule.m(0);
        let long = edges
            .edges()
            .iter()
            .filter_map(|&(a, b)| {
                let len2 = region.dist2(a as usize, b as usize);
                if !exceeds(len2, m0) {
                    return None;
                }
                let (ca, cb) = (region.coord(a as usize), region.coord(b as usize));
                let lo = ca.iter().zip(&cb).map(|(p, q)| *p.min(q)).collect();
                let hi = ca.iter().zip(&cb).map(|(p, q)| *p.max(q)).collect();
                Some(LongEdge { lo, hi, len2 })
            })
            .collect();
        GoodBoxChecker { schedule, region, long, memo: HashMap::new() }
    }

    fn has_long_edge(&self, corner: &[i64], side: u64, m_thr: u64) -> bool {
        self.long.iter().any(|e| {
            exceeds(e.len2, m_thr)
                && e.lo.iter().zip(corner).all(|(l, c)| l >= c)
                && e.hi.iter().zip(corner).all(|(h, c)| *h < c + side as i64)
        })
    }

    fn good(&mut self, n: usize, x: &[i64]) -> bool {
        if let Some(&g) = self.memo.get(&(n, x.to_vec())) {
            return g;
        }
        let g = self.evaluate(n, x).1.is_none();
        self.memo.insert((n, x.to_vec()), g);
        g
    }

    fn evaluate(&mut self, n: usize, x: &[i64]) -> (usize, Option<FailingCondition>) {
        let s = self.schedule;
        let d = x.len();
        if n == 0 {
            let bad = self.has_long_edge(x, s.m(0), s.m(0));
            return (0, bad.then(|| FailingCondition::LongEdge(vec![0; d])));
        }
        let (mn, mp, sh, a) = (s.m(n), s.m(n - 1), s.shift(n) as i64, s.a(n));
        let allowed = 3usize.pow(d as u32);
        for j in shifts(d) {
            let corner: Vec<i64> = x.iter().zip(&j).map(|(c, k)| c + k * sh).collect();
            if self.has_long_edge(&corner, mn, mp) {
                return (n, Some(FailingCondition::LongEdge(j)));
            }
            let mut bad = 0;
            let mut idx = vec![0u64; d];
            'children: loop {
                let child: Vec<i64> = corner.iter().zip(&idx).map(|(c, i)| c + (i * mp) as i64).collect();
                if !self.good(n - 1, &child) {
                    bad += 1;
                    if bad > allowed {
                        return (n, Some(FailingCondition::TooManyBadChildren(j)));
                    }
                }
                for k in (0..d).rev() {
                    idx[k] += 1;
                    if idx[k] < a {
                        continue 'children;
                    }
                    idx[k] = 0;
                }
                break;
            }
        }
        (n, None)
    }

    pub fn verdict(&mut self, n: usize, x: &[i64]) -> Result<GoodBoxVerdict> {
        if n > self.schedule.n_max() {
            return Err(invalid(format!("level {n} exceeds the schedule's n_max = {}", self.schedule.n_max())));
        }
        if x.len() != self.region.d() {
            return Err(invalid("anchor dimension does not match the region"));
        }
        let need = self.schedule.required_region(n, x)?;
        if !self.region.contains_box(&need) {
            return Err(Error::RegionTooSmall(format!(
                "a level-{n} verdict at {x:?} reads the box of side {} at corner {:?}",
                need.side(),
                need.low()
            )));
        }
        let (_, failing) = self.evaluate(n, x);
        Ok(GoodBoxVerdict { level: n, anchor: x.to_vec(), good: failing.is_none(), failing_condition: failing })
    }
}

pub fn is_good_box(edges: &EdgeList, schedule: &RenormSchedule, n: usize, x: &[i64]) -> Result<GoodBoxVerdict> {
    GoodBoxChecker::new(edges, schedule).verdict(n, x)
}

/// Target bound `3^-d 2^(-4d-1) e^-2 (n+1)^(-4d) e^(-2n)` on the bad-box probability.
pub fn psi_bound(n: usize, d: usize) -> f64 {
    let d = d as i32;
    let ln = -(d as f64) * 3f64.ln() - (4 * d + 1) as f64 * 2f64.ln() - 2.0
        - 4.0 * d as f64 * ((n + 1) as f64).ln()
        - 2.0 * n as f64;
    ln.exp()
}

/// `sum_{k >= n} psi_bound(k, d)`, summed until the terms vanish.
pub fn psi_bound_tail(n: usize, d: usize) -> f64 {
    let mut s = crate::stats::CompensatedSum::default();
    for k in n.. {
        let t = psi_bound(k, d);
        s.add(t);
        if t < s.value() * 1e-18 {
            break;
        }
    }
    s.value()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiEstimate {
    pub level: usize,
    pub a0: u64,
    pub m: u64,
    pub bad: Proportion,
    pub warning: Option<String>,
}

/// Monte Carlo frequency of `B_{m_n}(0)` not being good, each replicate on a
/// freshly sampled exact-mode region padded for the shifted boxes.
pub fn estimate_psi(
    params: &ModelParams,
    schedule: &RenormSchedule,
    n: usize,
    replicates: u64,
    base_seed: u64,
    pair_budget: u64,
) -> Result<PsiEstimate> {
    if replicates == 0 {
        return Err(invalid("at least one replicate is required"));
    }
    if n > schedule.n_max() {
        return Err(invalid(format!("level {n} exceeds the schedule's n_max = {}", schedule.n_max())));
    }
    let d = params.d();
    let side = schedule.m(n) as u128 + 2 * schedule.padding(n) as u128;
    let pairs = side.checked_pow(d as u32).map(|v| v * v.saturating_sub(1) / 2);
    if pairs.map_or(true, |p| p > pair_budget as u128) {
        // side grows linearly in a0 at fixed level
        let per_a0 = side as f64 / schedule.a0() as f64;
        let max_side = ((2.0 * pair_budget as f64).sqrt()).powf(1.0 / d as f64);
        let suggest = (max_side / per_a0).floor().max(0.0) as u64;
        return Err(Error::Budget(format!(
            "level {n} with a0 = {} needs a region of side {side} (over the budget of {pair_budget} pairs); \
             the largest feasible a0 is about {suggest}",
            schedule.a0()
        )));
    }
    let origin = vec![0i64; d];
    let region = schedule.required_region(n, &origin)?;
    let bad: u64 = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<u64> {
            let (ws, es) = replicate_seeds(base_seed, r);
            let w = sample_weights(&region, params.beta(), ws)?;
            let e = sample_graph(&w, params, SamplingMode::Exact, es)?.edges;
            Ok(!is_good_box(&e, schedule, n, &origin)?.good as u64)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let (a, ba) = (params.alpha(), params.alpha() * params.beta());
    let warning = (a.min(ba) <= 2.0 * d as f64)
        .then(|| format!("min(alpha, beta alpha) = {} <= 2d: the bad-box bound is not expected to hold", a.min(ba)));
    Ok(PsiEstimate {
        level: n,
        a0: schedule.a0(),
        m: schedule.m(n),
        bad: wilson(bad, replicates, z_for_confidence(crate::metrics::DEFAULT_CONFIDENCE)),
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        let s = renorm_schedule(100, 4).unwrap();
        assert_eq!(s.scales(), &[100, 100, 400, 3600, 57600]);
        for n in 1..=4 {
            assert_eq!(s.m(n) / s.m(n - 1), (n * n) as u64);
        }
        assert_eq!(renorm_schedule(1, 1).unwrap().m(1), 1);
        assert_eq!(s.padding(2), 100);
        assert!(renorm_schedule(100, 30).is_err());
        assert!(renorm_schedule(0, 1).is_err());
    }

    #[test]
    fn psi_bound_values() {
        assert!((psi_bound(0, 1) - (-2f64).exp() / 96.0).abs() < 1e-18);
        for n in 1..20 {
            let ratio = psi_bound(n, 1) / psi_bound(n - 1, 1);
            let expect = (n as f64 / (n + 1) as f64).powi(4) * (-2f64).exp();
            assert!((ratio - expect).abs() < 1e-12 * expect);
        }
        let t0 = psi_bound_tail(0, 1);
        assert!(t0.is_finite() && t0 > psi_bound(0, 1));
        assert!(psi_bound_tail(1, 1) < t0);
    }

    #[test]
    fn empty_and_single_edge() {
        let s = renorm_schedule(100, 2).unwrap();
        let region = s.required_region(2, &[0]).unwrap();
        let empty = EdgeList::empty(region.clone());
        for n in 0..=2 {
            assert!(is_good_box(&empty, &s, n, &[0]).unwrap().good);
        }
        // length m0/50 = 2 inside B_100(0)
        let i = region.index_of(&[10]).unwrap();
        let j = region.index_of(&[12]).unwrap();
        let e = EdgeList::new(region.clone(), vec![(i, j)], 1.0).unwrap();
        let v = is_good_box(&e, &s, 0, &[0]).unwrap();
        assert!(!v.good);
        assert_eq!(v.failing_condition, Some(FailingCondition::LongEdge(vec![0])));
        // length exactly m0/100 is allowed
        let k = region.index_of(&[11]).unwrap();
        let e = EdgeList::new(region, vec![(i, k)], 1.0).unwrap();
        assert!(is_good_box(&e, &s, 0, &[0]).unwrap().good);
    }

    #[test]
    fn region_too_small() {
        let s = renorm_schedule(10, 2).unwrap();
        let e = EdgeList::empty(BoxSpec::at_origin(1, 40).unwrap());
        assert!(matches!(is_good_box(&e, &s, 2, &[0]), Err(Error::RegionTooSmall(_))));
        assert!(is_good_box(&e, &s, 0, &[0]).is_ok());
    }

    #[test]
    fn zero_lambda_psi_and_budget() {
        let p = ModelParams::new(1, 3.0, 1.5, 0.0).unwrap();
        let s = renorm_schedule(100, 2).unwrap();
        let e = estimate_psi(&p, &s, 0, 20, 1, DEFAULT_PAIR_BUDGET).unwrap();
        assert_eq!(e.bad.estimate, 0.0);
        assert!(e.warning.is_none());
        assert!(matches!(estimate_psi(&p, &s, 2, 20, 1, 1000), Err(Error::Budget(_))));
    }
}
