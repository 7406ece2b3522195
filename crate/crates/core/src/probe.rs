//! Seeded tuple sampling and numeric probes of the defining mean properties.
//!
//! Sample `i` draws only from its own block of the counter stream, so any
//! partition of `0..sample_count` merges back into the same report.

use std::ops::Range;

use crate::domain::{max_of, min_of, Domain};
use crate::means::Mean;
use crate::rng::{Cursor, SampleStream};
use crate::scalar::{cst, rel_diff, to_f64, Real};

/// Draws reserved per sample in the counter stream.
const DRAWS_PER_SAMPLE: u64 = 64;

/// Minimum spread for a tuple to count as a strictness witness.
pub const STRICTNESS_GAP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Independent coordinates across the whole range.
    Wide,
    /// Small relative perturbations of one base point.
    NearDiagonal,
    /// Coordinates crowding the seam at 1.
    NearOne,
}

/// Generates tuples inside a domain. On `AboveOne`, `x − 1` is log-uniform in
/// `(min_gap, max − 1)`; `UnitInterval` mirrors that through `x ↦ 1/x`.
#[derive(Debug, Clone, Copy)]
pub struct TupleSampler {
    pub domain: Domain,
    pub min_gap: f64,
    pub max: f64,
    pub shapes: &'static [Shape],
}

impl TupleSampler {
    pub fn new(domain: Domain) -> Self {
        Self {
            domain,
            min_gap: 1e-6,
            max: 1e3,
            shapes: &[Shape::Wide, Shape::NearDiagonal, Shape::NearOne],
        }
    }

    pub fn with_range(mut self, min_gap: f64, max: f64) -> Self {
        self.min_gap = min_gap;
        self.max = max;
        self
    }

    pub fn with_shapes(mut self, shapes: &'static [Shape]) -> Self {
        self.shapes = shapes;
        self
    }

    fn above_one(&self, c: &mut Cursor, shape: Shape, base: f64) -> f64 {
        match shape {
            Shape::Wide => 1.0 + c.log_uniform(self.min_gap, self.max - 1.0),
            Shape::NearDiagonal => {
                let gap = base - 1.0;
                let g = gap * (1.0 + c.uniform(-1e-3, 1e-3));
                1.0 + g.clamp(self.min_gap, (self.max - 1.0) * (1.0 - 1e-9))
            }
            Shape::NearOne => 1.0 + c.log_uniform(self.min_gap, (self.min_gap * 1e4).min(self.max - 1.0)),
        }
    }

    fn side(&self, c: &mut Cursor, shape: Shape, base: f64, below: bool) -> f64 {
        let x = self.above_one(c, shape, base);
        if below {
            1.0 / x
        } else {
            x
        }
    }

    /// Tuple number `index` of arity `k`.
    pub fn tuple(&self, stream: &SampleStream, index: u64, k: usize) -> Vec<f64> {
        let mut c = stream.cursor(index * DRAWS_PER_SAMPLE);
        let shape = self.shapes[c.below(self.shapes.len() as u64) as usize];
        let base = 1.0 + c.log_uniform(self.min_gap, self.max - 1.0);
        match self.domain {
            Domain::AboveOne => (0..k).map(|_| self.side(&mut c, shape, base, false)).collect(),
            Domain::UnitInterval => (0..k).map(|_| self.side(&mut c, shape, base, true)).collect(),
            Domain::Positive => {
                // half the tuples one-sided, half with independent sides
                let mode = c.below(3);
                (0..k)
                    .map(|_| {
                        let below = match mode {
                            0 => false,
                            1 => true,
                            _ => c.below(2) == 1,
                        };
                        self.side(&mut c, shape, base, below)
                    })
                    .collect()
            }
        }
    }
}

/// Aggregated outcome of [`probe_mean_properties`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport<T> {
    pub samples: usize,
    /// Evaluations that returned an error or a non-finite value.
    pub failed_evaluations: usize,
    /// Largest `max(min − M, M − max, 0)`.
    pub max_bounds_violation: T,
    pub bounds_violations: usize,
    /// Largest `|M(x,…,x) − x|`.
    pub max_reflexivity_residual: T,
    /// Tuples with spread ≥ [`STRICTNESS_GAP`] that were checked for strictness.
    pub strictness_checked: usize,
    pub strictness_witness: Option<Vec<T>>,
    pub strictness_counterexample: Option<Vec<T>>,
    /// Largest relative change under a random permutation.
    pub max_symmetry_residual: T,
    /// Signed `t·M(x) − M(t·x)` with the largest magnitude.
    pub worst_homogeneity_residual: T,
    /// Signed `(M(x) + t) − M(x + t)` with the largest magnitude.
    pub worst_translativity_residual: T,
    /// Times increasing one coordinate decreased the value (informational).
    pub monotonicity_violations: usize,
    witness_index: Option<u64>,
    counterexample_index: Option<u64>,
}

impl<T: Real> PropertyReport<T> {
    fn empty() -> Self {
        Self {
            samples: 0,
            failed_evaluations: 0,
            max_bounds_violation: T::zero(),
            bounds_violations: 0,
            max_reflexivity_residual: T::zero(),
            strictness_checked: 0,
            strictness_witness: None,
            strictness_counterexample: None,
            max_symmetry_residual: T::zero(),
            worst_homogeneity_residual: T::zero(),
            worst_translativity_residual: T::zero(),
            monotonicity_violations: 0,
            witness_index: None,
            counterexample_index: None,
        }
    }

    /// Combines reports of disjoint sample ranges. Order-independent.
    pub fn merge(mut self, other: Self) -> Self {
        self.samples += other.samples;
        self.failed_evaluations += other.failed_evaluations;
        self.max_bounds_violation = self.max_bounds_violation.max(other.max_bounds_violation);
        self.bounds_violations += other.bounds_violations;
        self.max_reflexivity_residual = self.max_reflexivity_residual.max(other.max_reflexivity_residual);
        self.strictness_checked += other.strictness_checked;
        self.max_symmetry_residual = self.max_symmetry_residual.max(other.max_symmetry_residual);
        self.worst_homogeneity_residual = worse(self.worst_homogeneity_residual, other.worst_homogeneity_residual);
        self.worst_translativity_residual =
            worse(self.worst_translativity_residual, other.worst_translativity_residual);
        self.monotonicity_violations += other.monotonicity_violations;
        if earlier(other.witness_index, self.witness_index) {
            self.witness_index = other.witness_index;
            self.strictness_witness = other.strictness_witness;
        }
        if earlier(other.counterexample_index, self.counterexample_index) {
            self.counterexample_index = other.counterexample_index;
            self.strictness_counterexample = other.strictness_counterexample;
        }
        self
    }

    /// Mean axioms hold on every sample at the given tolerance.
    pub fn is_strict_mean(&self, reflexivity_tol: T) -> bool {
        self.failed_evaluations == 0
            && self.bounds_violations == 0
            && self.strictness_counterexample.is_none()
            && self.max_reflexivity_residual <= reflexivity_tol
    }
}

fn earlier(a: Option<u64>, b: Option<u64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    }
}

fn worse<T: Real>(a: T, b: T) -> T {
    if b.abs() > a.abs() || (b.abs() == a.abs() && b < a) {
        b
    } else {
        a
    }
}

fn eval_ok<T: Real, M: Mean<T> + ?Sized>(m: &M, xs: &[T]) -> Option<T> {
    m.eval(xs).ok().filter(|v| v.is_finite())
}

/// Scale factor range keeping `t·x` inside the domain.
fn scale_for(domain: Domain, c: &mut Cursor) -> f64 {
    match domain {
        Domain::AboveOne => c.uniform(1.0, 2.0),
        Domain::UnitInterval => c.uniform(0.5, 1.0),
        Domain::Positive => c.uniform(0.5, 2.0),
    }
}

fn shift_for(domain: Domain, c: &mut Cursor, max: f64) -> Option<f64> {
    match domain {
        Domain::AboveOne | Domain::Positive => Some(c.uniform(0.0, 2.0)),
        Domain::UnitInterval => {
            let room = 1.0 - max;
            (room > 0.0).then(|| c.unit() * room * 0.5)
        }
    }
}

fn probe_one<T: Real, M: Mean<T> + ?Sized>(
    m: &M,
    sampler: &TupleSampler,
    stream: &SampleStream,
    k: usize,
    index: u64,
    report: &mut PropertyReport<T>,
) {
    report.samples += 1;
    let raw = sampler.tuple(stream, index, k);
    let xs: Vec<T> = raw.iter().map(|&v| cst(v)).collect();
    // auxiliary draws come from a sibling stream so the tuple block stays fixed
    let mut aux = stream.split(1).cursor(index * DRAWS_PER_SAMPLE);

    let Some(value) = eval_ok(m, &xs) else {
        report.failed_evaluations += 1;
        return;
    };
    let (lo, hi) = (min_of(&xs), max_of(&xs));

    let violation = (lo - value).max(value - hi).max(T::zero());
    if violation > T::zero() {
        report.bounds_violations += 1;
        report.max_bounds_violation = report.max_bounds_violation.max(violation);
    }

    if hi - lo >= cst(STRICTNESS_GAP) {
        report.strictness_checked += 1;
        let strict = lo < value && value < hi;
        if strict && report.witness_index.is_none() {
            report.witness_index = Some(index);
            report.strictness_witness = Some(xs.clone());
        }
        if !strict && report.counterexample_index.is_none() {
            report.counterexample_index = Some(index);
            report.strictness_counterexample = Some(xs.clone());
        }
    }

    let x0 = xs[0];
    match eval_ok(m, &vec![x0; k]) {
        Some(r) => {
            report.max_reflexivity_residual = report.max_reflexivity_residual.max((r - x0).abs())
        }
        None => report.failed_evaluations += 1,
    }

    // Fisher–Yates with stream draws
    let mut perm = xs.clone();
    for i in (1..k).rev() {
        let j = aux.below(i as u64 + 1) as usize;
        perm.swap(i, j);
    }
    match eval_ok(m, &perm) {
        Some(p) => report.max_symmetry_residual = report.max_symmetry_residual.max(rel_diff(p, value)),
        None => report.failed_evaluations += 1,
    }

    let t: T = cst(scale_for(sampler.domain, &mut aux));
    let scaled: Vec<T> = xs.iter().map(|&x| t * x).collect();
    if scaled.iter().all(|&x| sampler.domain.contains(x)) {
        if let Some(s) = eval_ok(m, &scaled) {
            report.worst_homogeneity_residual = worse(report.worst_homogeneity_residual, t * value - s);
        }
    }

    if let Some(shift) = shift_for(sampler.domain, &mut aux, to_f64(hi)) {
        let t: T = cst(shift);
        let shifted: Vec<T> = xs.iter().map(|&x| x + t).collect();
        if shifted.iter().all(|&x| sampler.domain.contains(x)) {
            if let Some(s) = eval_ok(m, &shifted) {
                report.worst_translativity_residual = worse(report.worst_translativity_residual, value + t - s);
            }
        }
    }

    // monotone probe: nudge one coordinate up by 1%
    let i = aux.below(k as u64) as usize;
    let mut bumped = xs.clone();
    bumped[i] = bumped[i] * cst(1.01);
    if bumped.iter().all(|&x| sampler.domain.contains(x)) {
        if let Some(b) = eval_ok(m, &bumped) {
            if b < value {
                report.monotonicity_violations += 1;
            }
        }
    }
}

/// Probes a contiguous range of sample indices.
pub fn probe_range<T: Real, M: Mean<T> + ?Sized>(
    m: &M,
    sampler: &TupleSampler,
    k: usize,
    seed: u64,
    range: Range<u64>,
) -> PropertyReport<T> {
    let stream = SampleStream::new(seed);
    let mut report = PropertyReport::empty();
    for index in range {
        probe_one(m, sampler, &stream, k, index, &mut report);
    }
    report
}

/// Seeded probe of bounds, strictness, reflexivity, symmetry, homogeneity,
/// translativity and (informationally) monotonicity.
pub fn probe_mean_properties<T: Real, M: Mean<T> + ?Sized>(
    m: &M,
    domain: Domain,
    k: usize,
    sample_count: usize,
    seed: u64,
) -> PropertyReport<T> {
    probe_range(m, &TupleSampler::new(domain), k, seed, 0..sample_count as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::means::{Arithmetic, Extended, FnMean, Geometric, LogCauchy};

    #[test]
    fn sampler_respects_domain() {
        let s = SampleStream::new(7);
        for d in [Domain::AboveOne, Domain::UnitInterval, Domain::Positive] {
            let sampler = TupleSampler::new(d);
            for i in 0..2000 {
                for x in sampler.tuple(&s, i, 4) {
                    assert!(d.contains(x), "{d}: {x}");
                }
            }
        }
    }

    #[test]
    fn sampler_respects_range() {
        let s = SampleStream::new(3);
        let sampler = TupleSampler::new(Domain::AboveOne).with_range(1e-6, 1e3);
        for i in 0..5000 {
            for x in sampler.tuple(&s, i, 3) {
                assert!(x > 1.0 + 0.99e-6 && x < 1e3, "{x}");
            }
        }
    }

    #[test]
    fn log_cauchy_is_strict_symmetric_mean() {
        for d in [Domain::AboveOne, Domain::UnitInterval] {
            for k in 2..=5 {
                let r = probe_mean_properties::<f64, _>(&LogCauchy, d, k, 2000, 11);
                assert!(r.is_strict_mean(1e-12), "{d} k={k}: {r:?}");
                assert!(r.strictness_checked > 0 && r.strictness_witness.is_some());
                assert!(r.max_symmetry_residual < 1e-13);
            }
        }
    }

    #[test]
    fn log_cauchy_not_homogeneous_nor_translative() {
        let r = probe_mean_properties::<f64, _>(&LogCauchy, Domain::AboveOne, 2, 500, 5);
        assert!(r.worst_homogeneity_residual.abs() > 1e-3);
        assert!(r.worst_translativity_residual.abs() > 1e-3);
        let g = probe_mean_properties::<f64, _>(&Geometric, Domain::AboveOne, 3, 500, 5);
        assert!(g.worst_homogeneity_residual.abs() < 1e-10);
        let a = probe_mean_properties::<f64, _>(&Arithmetic, Domain::AboveOne, 3, 500, 5);
        assert!(a.worst_translativity_residual.abs() < 1e-10);
    }

    #[test]
    fn extended_on_positive() {
        let r = probe_mean_properties::<f64, _>(&Extended, Domain::Positive, 3, 3000, 1);
        assert!(r.is_strict_mean(1e-12), "{r:?}");
    }

    #[test]
    fn detects_non_mean() {
        let twice = FnMean::new("2A", |xs: &[f64]| Ok(2.0 * xs.iter().sum::<f64>() / xs.len() as f64));
        let r = probe_mean_properties(&twice, Domain::AboveOne, 2, 200, 9);
        assert!(r.bounds_violations > 0);
        assert!(r.strictness_counterexample.is_some());
        assert!(r.max_reflexivity_residual > 1.0);
    }

    #[test]
    fn failed_evaluations_are_counted() {
        let r = probe_mean_properties::<f64, _>(&LogCauchy, Domain::Positive, 2, 300, 2);
        assert!(r.failed_evaluations > 0);
        assert!(r.samples == 300);
    }

    #[test]
    fn partitioned_runs_match() {
        let sampler = TupleSampler::new(Domain::AboveOne);
        let full = probe_range::<f64, _>(&LogCauchy, &sampler, 3, 77, 0..1000);
        let a = probe_range::<f64, _>(&LogCauchy, &sampler, 3, 77, 0..313);
        let b = probe_range::<f64, _>(&LogCauchy, &sampler, 3, 77, 313..1000);
        assert_eq!(full, b.clone().merge(a.clone()));
        assert_eq!(full, a.merge(b));
    }

    #[test]
    fn identical_seed_identical_report() {
        let a = probe_mean_properties::<f64, _>(&LogCauchy, Domain::UnitInterval, 4, 500, 123);
        let b = probe_mean_properties::<f64, _>(&LogCauchy, Domain::UnitInterval, 4, 500, 123);
        assert_eq!(a, b);
    }
}
