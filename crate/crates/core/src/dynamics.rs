//! Iteration of mean-type mappings `(x, y) ↦ (M₁(x, y), M₂(x, y))`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::means::Mean;
use crate::scalar::{format_number, to_f64, Real};

/// Header of [`IterationTrace::to_csv`].
pub const TRACE_HEADER: &str = "iter,x,y,gap,invariance_residual";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep<T> {
    pub iter: usize,
    pub x: T,
    pub y: T,
    pub gap: T,
    /// `K(xₙ, yₙ) − K(x₀, y₀)` for the reference mean `K`.
    pub invariance_residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace<T> {
    pub steps: Vec<TraceStep<T>>,
    pub limit: Option<T>,
    pub iterations_used: usize,
    /// Steps (after the first) at which the gap grew.
    pub gap_increases: usize,
    /// Set when a mean failed mid-orbit; the trace stops before that step.
    pub error: Option<String>,
}

impl<T: Real> IterationTrace<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.iter,
                format_number(to_f64(s.x)),
                format_number(to_f64(s.y)),
                format_number(to_f64(s.gap)),
                format_number(to_f64(s.invariance_residual))
            );
        }
        out
    }

    pub fn max_abs_invariance_residual(&self) -> T {
        self.steps.iter().fold(T::zero(), |m, s| m.max(s.invariance_residual.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Compare `|x − y| / max(|x|, |y|)` against `tol` instead of `|x − y|`.
    pub relative_gap: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200, relative_gap: false }
    }
}

fn gap<T: Real>(x: T, y: T, relative: bool) -> T {
    let g = (x - y).abs();
    if relative && g > T::zero() {
        g / x.abs().max(y.abs())
    } else {
        g
    }
}

/// Runs the orbit from `start` until the gap drops below `opts.tol` or
/// `opts.max_iter` steps have been taken.
pub fn iterate_pair<T: Real>(
    m1: &dyn Mean<T>,
    m2: &dyn Mean<T>,
    start: (T, T),
    opts: &IterationOptions,
    reference: &dyn Mean<T>,
) -> Result<IterationTrace<T>> {
    if !(opts.tol > 0.0) {
        return Err(Error::Parameter(format!("tol must be positive, got {}", opts.tol)));
    }
    let tol = T::from_f64(opts.tol).unwrap();
    let (mut x, mut y) = start;
    let k0 = reference.eval(&[x, y])?;
    let mut g = gap(x, y, opts.relative_gap);
    let mut steps = vec![TraceStep { iter: 0, x, y, gap: g, invariance_residual: T::zero() }];
    let mut gap_increases = 0;
    let mut error = None;
    let mut n = 0;
    while g >= tol && n < opts.max_iter {
        let next = m1.eval(&[x, y]).and_then(|a| Ok((a, m2.eval(&[x, y])?)));
        let (nx, ny) = match next {
            Ok(p) => p,
            Err(e) => {
                error = Some(format!("step {}: {e}", n + 1));
                break;
            }
        };
        let residual = match reference.eval(&[nx, ny]) {
            Ok(k) => k - k0,
            Err(e) => {
                error = Some(format!("step {}: reference mean: {e}", n + 1));
                break;
            }
        };
        n += 1;
        let ng = gap(nx, ny, opts.relative_gap);
        if n > 1 && ng > g {
            gap_increases += 1;
        }
        x = nx;
        y = ny;
        g = ng;
        steps.push(TraceStep { iter: n, x, y, gap: g, invariance_residual: residual });
    }
    let two = T::one() + T::one();
    let limit = (error.is_none() && g < tol).then(|| if x == y { x } else { (x + y) / two });
    Ok(IterationTrace { steps, limit, iterations_used: n, gap_increases, error })
}

/// `K(M₁(x, y), M₂(x, y)) − K(x, y)`.
pub fn invariance_residual<T: Real>(
    k: &dyn Mean<T>,
    m1: &dyn Mean<T>,
    m2: &dyn Mean<T>,
    point: (T, T),
) -> Result<T> {
    let xy = [point.0, point.1];
    let next = [m1.eval(&xy)?, m2.eval(&xy)?];
    Ok(k.eval(&next)? - k.eval(&xy)?)
}

#[derive(Debug, Clone)]
pub struct InvariantEstimate<T> {
    pub limit: Option<T>,
    /// `|limit − K(point)|` when a candidate invariant `K` was supplied.
    pub deviation: Option<T>,
    pub trace: IterationTrace<T>,
}

/// The common limit of the orbit from `point`, optionally compared against a
/// candidate invariant mean.
pub fn estimate_invariant_mean<T: Real>(
    m1: &dyn Mean<T>,
    m2: &dyn Mean<T>,
    point: (T, T),
    opts: &IterationOptions,
    candidate: Option<&dyn Mean<T>>,
) -> Result<InvariantEstimate<T>> {
    let reference: &dyn Mean<T> = match candidate {
        Some(k) => k,
        None => &crate::means::Geometric,
    };
    let trace = iterate_pair(m1, m2, point, opts, reference)?;
    let deviation = match (trace.limit, candidate) {
        (Some(l), Some(k)) => Some((l - k.eval(&[point.0, point.1])?).abs()),
        _ => None,
    };
    Ok(InvariantEstimate { limit: trace.limit, deviation, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::means::{complementary_mean, Arithmetic, Geometric, Harmonic, LogCauchy, LogCauchyConjugate};
    use crate::rng::SampleStream;

    const SQRT6: f64 = 2.449_489_742_783_178;
    // (Linv, L2) orbit limit from (2, 3), computed to 30 digits independently
    const INVOLUTORY_LIMIT: f64 = 2.339_993_404_581_639;

    fn opts() -> IterationOptions {
        IterationOptions::default()
    }

    #[test]
    fn complementary_pair_preserves_geometric_mean() {
        let comp = complementary_mean(LogCauchy);
        let t = iterate_pair::<f64>(&comp, &LogCauchy, (2.0, 3.0), &opts(), &Geometric).unwrap();
        assert!((t.limit.unwrap() - SQRT6).abs() < 1e-12);
        assert!(t.iterations_used <= 200);
        assert!(t.max_abs_invariance_residual() < 1e-14);
        for s in &t.steps {
            assert!(((s.x * s.y) / 6.0 - 1.0).abs() < 1e-13 * (s.iter.max(1) as f64));
        }
    }

    #[test]
    fn identical_means_collapse() {
        let t = iterate_pair::<f64>(&Geometric, &Geometric, (2.0, 3.0), &opts(), &Geometric).unwrap();
        assert_eq!(t.iterations_used, 1);
        assert_eq!(t.steps[1].gap, 0.0);
        assert!((t.limit.unwrap() - SQRT6).abs() < 1e-15);
    }

    #[test]
    fn diagonal_start_takes_no_steps() {
        let t = iterate_pair::<f64>(&LogCauchyConjugate, &LogCauchy, (5.0, 5.0), &opts(), &Geometric).unwrap();
        assert_eq!(t.iterations_used, 0);
        assert_eq!(t.limit, Some(5.0));
    }

    #[test]
    fn involutory_pair_examples() {
        let t = iterate_pair::<f64>(&LogCauchyConjugate, &LogCauchy, (2.0, 3.0), &opts(), &Geometric).unwrap();
        let s1 = t.steps[1];
        assert!((s1.x - 2.296_081_910_965_865).abs() < 1e-12);
        assert!((s1.y - 2.386_852_807_234_541_6).abs() < 1e-12);
        assert!((s1.invariance_residual + 0.10841).abs() < 1e-4);
        assert!((s1.invariance_residual + 0.108_462_285_697_438_1).abs() < 1e-12);
        let limit = t.limit.unwrap();
        assert!(limit > s1.x && limit < s1.y);
        assert!((limit - INVOLUTORY_LIMIT).abs() < 1e-12);
        let r = invariance_residual::<f64>(&Geometric, &LogCauchyConjugate, &LogCauchy, (2.0, 3.0)).unwrap();
        assert_eq!(r, s1.invariance_residual);
    }

    #[test]
    fn invariance_residual_examples() {
        let comp = complementary_mean(LogCauchy);
        let s = SampleStream::new(3);
        let mut cur = s.cursor(0);
        for _ in 0..500 {
            let p = (cur.log_uniform(1.001, 1e3), cur.log_uniform(1.001, 1e3));
            let r = invariance_residual::<f64>(&Geometric, &comp, &LogCauchy, p).unwrap();
            assert!(r.abs() <= 1e-14 * (p.0 * p.1).sqrt());
        }
        assert_eq!(invariance_residual::<f64>(&Geometric, &Geometric, &Geometric, (2.0, 3.0)).unwrap(), 0.0);
    }

    #[test]
    fn swapping_the_pair_keeps_the_limit() {
        let comp = complementary_mean(LogCauchy);
        let pairs: Vec<(&dyn Mean<f64>, &dyn Mean<f64>)> =
            vec![(&LogCauchyConjugate, &LogCauchy), (&comp, &LogCauchy), (&Arithmetic, &Harmonic), (&Geometric, &LogCauchy)];
        let s = SampleStream::new(8);
        let mut cur = s.cursor(0);
        for (a, b) in pairs {
            for _ in 0..20 {
                let p = (cur.uniform(1.01, 100.0), cur.uniform(1.01, 100.0));
                let t1 = iterate_pair(a, b, p, &opts(), &Geometric).unwrap();
                let t2 = iterate_pair(b, a, p, &opts(), &Geometric).unwrap();
                let (l1, l2) = (t1.limit.unwrap(), t2.limit.unwrap());
                assert!((l1 - l2).abs() < 1e-11, "{} {} at {p:?}", a.name(), b.name());
                assert!(l1 >= p.0.min(p.1) && l1 <= p.0.max(p.1));
                assert!(t1.iterations_used <= 200);
                assert_eq!(t1.gap_increases, 0);
            }
        }
    }

    #[test]
    fn orbit_errors_truncate_the_trace() {
        let failing = crate::means::FnMean::new("fails", |xs: &[f64]| {
            if xs[0] < 2.5 {
                Err(Error::Evaluation("nope".into()))
            } else {
                Ok(xs[0])
            }
        });
        let t = iterate_pair::<f64>(&Arithmetic, &failing, (2.0, 3.0), &opts(), &Geometric).unwrap();
        assert_eq!(t.limit, None);
        assert!(t.error.is_some());
        assert_eq!(t.steps.len(), 1);
    }

    #[test]
    fn non_convergence_reports_no_limit() {
        let o = IterationOptions { max_iter: 2, ..opts() };
        let est = estimate_invariant_mean::<f64>(&LogCauchyConjugate, &LogCauchy, (2.0, 3.0), &o, None).unwrap();
        assert_eq!(est.limit, None);
        assert_eq!(est.trace.iterations_used, 2);
    }

    #[test]
    fn estimate_against_candidate() {
        let comp = complementary_mean(LogCauchy);
        let est = estimate_invariant_mean::<f64>(&comp, &LogCauchy, (2.0, 3.0), &opts(), Some(&Geometric)).unwrap();
        assert!(est.deviation.unwrap() < 1e-12);
    }

    #[test]
    fn relative_gap_handles_large_coordinates() {
        let o = IterationOptions { tol: 1e-13, relative_gap: true, ..opts() };
        let t = iterate_pair::<f64>(&Arithmetic, &Harmonic, (1e200, 3e200), &o, &Geometric).unwrap();
        assert!(((t.limit.unwrap() / (3f64.sqrt() * 1e200)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_csv_layout() {
        let t = iterate_pair::<f64>(&Geometric, &Geometric, (4.0, 9.0), &opts(), &Geometric).unwrap();
        assert_eq!(t.to_csv(), "iter,x,y,gap,invariance_residual\n0,4,9,5,0\n1,6,6,0,0\n");
    }
}
