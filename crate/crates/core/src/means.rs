//! Closed-form means and the generic constructions built on top of them.
//!
//! Every kernel works on natural logarithms of the coordinates, so products
//! such as `x₁⋯x_k` or leave-one-out geometric means never form explicitly.

use std::str::FromStr;
use std::sync::Arc;

use crate::domain::{check_arity, check_positive_finite, max_of, min_of, one_sided, side_of_one, MeanReport};
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

/// A k-variable mean evaluator.
pub trait Mean<T: Real>: Send + Sync {
    fn eval(&self, xs: &[T]) -> Result<T>;

    fn name(&self) -> String {
        "mean".to_string()
    }

    fn report(&self, xs: &[T]) -> Result<MeanReport<T>> {
        Ok(MeanReport::new(xs, self.eval(xs)?))
    }
}

impl<T: Real, M: Mean<T> + ?Sized> Mean<T> for &M {
    fn eval(&self, xs: &[T]) -> Result<T> {
        (**self).eval(xs)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: Real, M: Mean<T> + ?Sized> Mean<T> for Box<M> {
    fn eval(&self, xs: &[T]) -> Result<T> {
        (**self).eval(xs)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: Real, M: Mean<T> + ?Sized> Mean<T> for Arc<M> {
    fn eval(&self, xs: &[T]) -> Result<T> {
        (**self).eval(xs)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// Adapts a closure into a [`Mean`].
pub struct FnMean<F> {
    name: String,
    f: F,
}

impl<F> FnMean<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<T: Real, F> Mean<T> for FnMean<F>
where
    F: Fn(&[T]) -> Result<T> + Send + Sync,
{
    fn eval(&self, xs: &[T]) -> Result<T> {
        (self.f)(xs)
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

fn clamp_to_hull<T: Real>(xs: &[T], v: T) -> T {
    v.max(min_of(xs)).min(max_of(xs))
}

/// Geometric mean `exp(mean(log xᵢ))` of a nonempty list.
pub fn geometric_mean<T: Real>(xs: &[T]) -> Result<T> {
    if xs.is_empty() {
        return Err(Error::Arity { got: 0 });
    }
    check_positive_finite(xs)?;
    let n = T::from_usize(xs.len()).unwrap();
    let s = xs.iter().fold(T::zero(), |acc, &x| acc + x.ln());
    Ok((s / n).exp().max(min_of(xs)).min(max_of(xs)))
}

/// 𝓛ₖ on log-coordinates; no validation, no clamping.
pub(crate) fn log_cauchy_kernel<T: Real>(logs: &[T]) -> T {
    let km1 = T::from_usize(logs.len() - 1).unwrap();
    let total = logs.iter().fold(T::zero(), |a, &l| a + l);
    logs.iter().fold(T::zero(), |acc, &l| {
        // leave-one-out geometric mean of the other k-1 coordinates
        let g = ((total - l) / km1).exp();
        acc + (l / total) * g
    })
}

fn log_cauchy_unchecked<T: Real>(xs: &[T]) -> T {
    let logs: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    clamp_to_hull(xs, log_cauchy_kernel(&logs))
}

/// The logarithmic Cauchy quotient mean
/// `𝓛ₖ(x) = Σᵢ (log xᵢ / Σₗ log xₗ) · 𝒢ₖ₋₁(x without xᵢ)`.
///
/// The tuple must lie entirely in (1, +∞) or entirely in (0, 1).
pub fn log_cauchy_mean<T: Real>(xs: &[T]) -> Result<T> {
    one_sided(xs)?;
    Ok(log_cauchy_unchecked(xs))
}

/// 𝔏ₖ: 𝓛ₖ on (0,1)ᵏ ∪ (1,+∞)ᵏ and 1 on every tuple that straddles or touches 1.
pub fn extended_mean<T: Real>(xs: &[T]) -> Result<T> {
    check_arity(xs)?;
    check_positive_finite(xs)?;
    match side_of_one(xs) {
        Some(_) => Ok(log_cauchy_unchecked(xs)),
        None => Ok(T::one()),
    }
}

/// The involutory conjugate of 𝓛ₖ, `1 / 𝓛ₖ(1/x₁, …, 1/x_k)`, computed as
/// `Σₗ log xₗ / Σᵢ log xᵢ / 𝒢ₖ₋₁(x without xᵢ)`.
///
/// For k = 2 this is `xy (log x + log y) / (x log x + y log y)`. The weighted
/// form `Σᵢ xᵢ log xᵢ 𝒢ₖ₋₁(…) / Σₗ xₗ log xₗ` coincides with it only for k = 2.
/// Accepted on both one-sided domains.
pub fn log_cauchy_conjugate<T: Real>(xs: &[T]) -> Result<T> {
    one_sided(xs)?;
    let neg_logs: Vec<T> = xs.iter().map(|x| -x.ln()).collect();
    Ok(clamp_to_hull(xs, log_cauchy_kernel(&neg_logs).recip()))
}

pub fn arithmetic_mean<T: Real>(xs: &[T]) -> Result<T> {
    if xs.is_empty() {
        return Err(Error::Arity { got: 0 });
    }
    let n = T::from_usize(xs.len()).unwrap();
    Ok(xs.iter().fold(T::zero(), |a, &x| a + x) / n)
}

pub fn harmonic_mean<T: Real>(xs: &[T]) -> Result<T> {
    if xs.is_empty() {
        return Err(Error::Arity { got: 0 });
    }
    check_positive_finite(xs)?;
    let n = T::from_usize(xs.len()).unwrap();
    Ok(n / xs.iter().fold(T::zero(), |a, &x| a + x.recip()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Geometric;

#[derive(Debug, Clone, Copy, Default)]
pub struct LogCauchy;

#[derive(Debug, Clone, Copy, Default)]
pub struct Extended;

#[derive(Debug, Clone, Copy, Default)]
pub struct LogCauchyConjugate;

#[derive(Debug, Clone, Copy, Default)]
pub struct Arithmetic;

#[derive(Debug, Clone, Copy, Default)]
pub struct Harmonic;

macro_rules! closed_form_mean {
    ($ty:ident, $f:ident, $name:expr) => {
        impl<T: Real> Mean<T> for $ty {
            fn eval(&self, xs: &[T]) -> Result<T> {
                $f(xs)
            }
            fn name(&self) -> String {
                $name.to_string()
            }
        }
    };
}

closed_form_mean!(Geometric, geometric_mean, "G");
closed_form_mean!(LogCauchy, log_cauchy_mean, "Lk");
closed_form_mean!(Extended, extended_mean, "Ext");
closed_form_mean!(LogCauchyConjugate, log_cauchy_conjugate, "Linv");
closed_form_mean!(Arithmetic, arithmetic_mean, "A");
closed_form_mean!(Harmonic, harmonic_mean, "H");

/// `x ↦ 1 / M(1/x₁, …, 1/x_k)`.
#[derive(Debug, Clone)]
pub struct Involutory<M> {
    inner: M,
}

pub fn involutory_conjugate<M>(inner: M) -> Involutory<M> {
    Involutory { inner }
}

impl<T: Real, M: Mean<T>> Mean<T> for Involutory<M> {
    fn eval(&self, xs: &[T]) -> Result<T> {
        check_positive_finite(xs)?;
        let recips: Vec<T> = xs.iter().map(|x| x.recip()).collect();
        let v = self.inner.eval(&recips)?;
        if v <= T::zero() || !v.is_finite() {
            return Err(Error::Evaluation(format!("conjugated mean returned {}", to_f64(v))));
        }
        Ok(v.recip())
    }

    fn name(&self) -> String {
        format!("inv({})", self.inner.name())
    }
}

/// `N(x, y) = x·y / M(x, y)`, the partner of `M` that keeps 𝒢 invariant.
#[derive(Debug, Clone)]
pub struct Complementary<M> {
    inner: M,
}

pub fn complementary_mean<M>(inner: M) -> Complementary<M> {
    Complementary { inner }
}

impl<T: Real, M: Mean<T>> Mean<T> for Complementary<M> {
    fn eval(&self, xs: &[T]) -> Result<T> {
        if xs.len() != 2 {
            return Err(Error::ArityMismatch { expected: 2, got: xs.len() });
        }
        check_positive_finite(xs)?;
        let m = self.inner.eval(xs)?;
        if m <= T::zero() || !m.is_finite() {
            return Err(Error::Evaluation(format!("inner mean returned {}", to_f64(m))));
        }
        let (x, y) = (xs[0], xs[1]);
        let p = x * y;
        if p.is_finite() {
            Ok(p / m)
        } else {
            Ok((x.ln() + y.ln() - m.ln()).exp())
        }
    }

    fn name(&self) -> String {
        format!("comp({})", self.inner.name())
    }
}

/// Named means usable from the command line and the iteration engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanKind {
    Geometric,
    LogCauchy,
    Extended,
    Conjugate,
    ComplementaryLogCauchy,
    Arithmetic,
    Harmonic,
}

impl MeanKind {
    pub fn build<T: Real>(self) -> Box<dyn Mean<T>> {
        match self {
            MeanKind::Geometric => Box::new(Geometric),
            MeanKind::LogCauchy => Box::new(LogCauchy),
            MeanKind::Extended => Box::new(Extended),
            MeanKind::Conjugate => Box::new(LogCauchyConjugate),
            MeanKind::ComplementaryLogCauchy => Box::new(complementary_mean(LogCauchy)),
            MeanKind::Arithmetic => Box::new(Arithmetic),
            MeanKind::Harmonic => Box::new(Harmonic),
        }
    }
}

impl FromStr for MeanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "G" | "geometric" => MeanKind::Geometric,
            "Lk" | "L2" | "L" => MeanKind::LogCauchy,
            "Ext" => MeanKind::Extended,
            "Linv" | "Linv2" | "L2inv" => MeanKind::Conjugate,
            "comp-L2" | "comp-Lk" => MeanKind::ComplementaryLogCauchy,
            "A" | "arithmetic" => MeanKind::Arithmetic,
            "H" | "harmonic" => MeanKind::Harmonic,
            other => return Err(Error::Parameter(format!("unknown mean `{other}`"))),
        })
    }
}

/// `t·M(x) − M(t·x)`; zero for every `t > 0` iff `M` is homogeneous.
pub fn homogeneity_residual<T: Real, M: Mean<T> + ?Sized>(m: &M, xs: &[T], t: T) -> Result<T> {
    let scaled: Vec<T> = xs.iter().map(|&x| t * x).collect();
    Ok(t * m.eval(xs)? - m.eval(&scaled)?)
}

/// `(M(x) + t) − M(x + t)`.
pub fn translativity_residual<T: Real, M: Mean<T> + ?Sized>(m: &M, xs: &[T], t: T) -> Result<T> {
    let shifted: Vec<T> = xs.iter().map(|&x| x + t).collect();
    Ok(m.eval(xs)? + t - m.eval(&shifted)?)
}
