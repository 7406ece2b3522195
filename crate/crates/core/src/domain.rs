//! Multiplicatively closed domains and validated argument tuples.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{cst, to_f64, Real};

/// Coordinates closer than this to 1 are rejected on the one-sided domains:
/// `Σ log xᵢ` loses its relative accuracy there.
pub const SEAM_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// (1, +∞)
    AboveOne,
    /// (0, 1)
    UnitInterval,
    /// (0, +∞)
    Positive,
}

impl Domain {
    /// Strict membership: endpoints are excluded.
    pub fn contains<T: Real>(&self, x: T) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            Domain::AboveOne => x > T::one(),
            Domain::UnitInterval => x > T::zero() && x < T::one(),
            Domain::Positive => x > T::zero(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::AboveOne => "above-one",
            Domain::UnitInterval => "unit",
            Domain::Positive => "positive",
        }
    }

    /// The domain `{1/x : x ∈ self}`.
    pub fn reciprocal(&self) -> Domain {
        match self {
            Domain::AboveOne => Domain::UnitInterval,
            Domain::UnitInterval => Domain::AboveOne,
            Domain::Positive => Domain::Positive,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "above-one" | "AboveOne" | "gt1" => Ok(Domain::AboveOne),
            "unit" | "UnitInterval" | "lt1" => Ok(Domain::UnitInterval),
            "positive" | "Positive" => Ok(Domain::Positive),
            other => Err(Error::Parameter(format!("unknown domain `{other}`"))),
        }
    }
}

/// Which side of 1 a tuple lies on, if it lies on one side only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

pub(crate) fn check_positive_finite<T: Real>(xs: &[T]) -> Result<()> {
    for &x in xs {
        if !x.is_finite() || x <= T::zero() {
            return Err(Error::domain(to_f64(x), "coordinates must be finite and positive"));
        }
    }
    Ok(())
}

pub(crate) fn check_arity<T>(xs: &[T]) -> Result<()> {
    if xs.len() < 2 {
        Err(Error::Arity { got: xs.len() })
    } else {
        Ok(())
    }
}

/// Side of 1 shared by every coordinate, or `None` for a tuple that straddles or touches 1.
pub fn side_of_one<T: Real>(xs: &[T]) -> Option<Side> {
    let one = T::one();
    if xs.iter().all(|&x| x > one) {
        Some(Side::Above)
    } else if xs.iter().all(|&x| x < one) {
        Some(Side::Below)
    } else {
        None
    }
}

/// Rejects tuples that are not strictly on one side of 1 or that sit within
/// [`SEAM_GUARD`] of 1.
pub(crate) fn one_sided<T: Real>(xs: &[T]) -> Result<Side> {
    check_arity(xs)?;
    check_positive_finite(xs)?;
    let side = side_of_one(xs).ok_or_else(|| {
        let offender = xs
            .iter()
            .copied()
            .find(|&x| x == T::one())
            .unwrap_or_else(|| xs[0]);
        Error::domain(to_f64(offender), "tuple is not strictly on one side of 1")
    })?;
    let guard = cst::<T>(SEAM_GUARD);
    if let Some(&x) = xs.iter().find(|&&x| (x - T::one()).abs() <= guard) {
        return Err(Error::domain(to_f64(x), "coordinate within 1e-12 of 1"));
    }
    Ok(side)
}

/// A k-tuple (k ≥ 2) of finite coordinates lying strictly inside a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanPoint<T> {
    values: Vec<T>,
    domain: Domain,
}

impl<T: Real> MeanPoint<T> {
    pub fn new(values: Vec<T>, domain: Domain) -> Result<Self> {
        check_arity(&values)?;
        for &x in &values {
            if !domain.contains(x) {
                return Err(Error::domain(to_f64(x), format!("coordinate outside {domain}")));
            }
        }
        Ok(Self { values, domain })
    }

    /// Picks `AboveOne` or `UnitInterval` from the coordinates, falling back to `Positive`.
    pub fn infer(values: Vec<T>) -> Result<Self> {
        check_arity(&values)?;
        check_positive_finite(&values)?;
        let domain = match side_of_one(&values) {
            Some(Side::Above) => Domain::AboveOne,
            Some(Side::Below) => Domain::UnitInterval,
            None => Domain::Positive,
        };
        Ok(Self { values, domain })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> T {
        min_of(&self.values)
    }

    pub fn max(&self) -> T {
        max_of(&self.values)
    }
}

pub(crate) fn min_of<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::infinity(), T::min)
}

pub(crate) fn max_of<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::neg_infinity(), T::max)
}

/// Value of a mean at a tuple together with the tuple's hull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanReport<T> {
    pub min: T,
    pub max: T,
    pub value: T,
    /// Tuple is nonconstant and `min < value < max`.
    pub strict: bool,
}

impl<T: Real> MeanReport<T> {
    pub fn new(xs: &[T], value: T) -> Self {
        let min = min_of(xs);
        let max = max_of(xs);
        Self { min, max, value, strict: min < max && min < value && value < max }
    }

    pub fn within_bounds(&self) -> bool {
        self.min <= self.value && self.value <= self.max
    }
}
