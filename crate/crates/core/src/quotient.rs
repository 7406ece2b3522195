//! Generators and the logarithmic Cauchy quotient
//! `L_{f,k}(x₁,…,x_k) = (f(x₁)+⋯+f(x_k)) / f(x₁⋯x_k)`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::domain::{Domain, MeanPoint};
use crate::error::{Error, Result};
use crate::funceq::{Table, TiledExtension};
use crate::probe::TupleSampler;
use crate::rng::SampleStream;
use crate::scalar::{cst, to_f64, Real};

/// Stabilization threshold for one-sided limit estimates.
pub const STABILIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    fn of<T: Real>(v: T) -> Option<Sign> {
        if v > T::zero() {
            Some(Sign::Positive)
        } else if v < T::zero() {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum GeneratorKind<T> {
    /// `c · log x · x^(−1/(k−1))`
    Canonical { c: T, k: usize },
    /// `c · log x · x^(−α)`
    PowerLog { c: T, alpha: T },
    /// `a · x + b`
    Affine { a: T, b: T },
    /// Reconstructed from a fundamental-domain table.
    Tabulated(Arc<TiledExtension<T>>),
    Scaled { factor: T, inner: Arc<Generator<T>> },
    Custom { f: RealFn<T>, f_log: Option<RealFn<T>> },
}

impl<T: fmt::Debug> fmt::Debug for GeneratorKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorKind::Canonical { c, k } => write!(f, "Canonical {{ c: {c:?}, k: {k} }}"),
            GeneratorKind::PowerLog { c, alpha } => write!(f, "PowerLog {{ c: {c:?}, alpha: {alpha:?} }}"),
            GeneratorKind::Affine { a, b } => write!(f, "Affine {{ a: {a:?}, b: {b:?} }}"),
            GeneratorKind::Tabulated(_) => f.write_str("Tabulated"),
            GeneratorKind::Scaled { factor, inner } => write!(f, "Scaled {{ factor: {factor:?}, inner: {inner:?} }}"),
            GeneratorKind::Custom { f_log, .. } => write!(f, "Custom {{ log_entry: {} }}", f_log.is_some()),
        }
    }
}

/// A real function of one variable on a multiplicatively closed domain, with a
/// declared sign.
#[derive(Clone)]
pub struct Generator<T> {
    kind: GeneratorKind<T>,
    domain: Domain,
    sign: Sign,
    label: String,
}

impl<T: fmt::Debug> fmt::Debug for Generator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("sign", &self.sign)
            .field("label", &self.label)
            .finish()
    }
}

/// The mean-inducing generator `x ↦ c · log x / x^(1/(k−1))`.
///
/// On (1, +∞) `c` must be positive, on (0, 1) negative, so the values are
/// positive in both cases.
pub fn canonical_generator<T: Real>(c: T, k: usize, domain: Domain) -> Result<Generator<T>> {
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    if c == T::zero() || !c.is_finite() {
        return Err(Error::Parameter("c must be finite and nonzero".into()));
    }
    match (domain, c > T::zero()) {
        (Domain::AboveOne, true) | (Domain::UnitInterval, false) => {}
        _ => {
            return Err(Error::Parameter(format!(
                "c = {c} does not match domain {domain}: need c > 0 on (1,+inf) and c < 0 on (0,1)"
            )))
        }
    }
    Ok(Generator {
        kind: GeneratorKind::Canonical { c, k },
        domain,
        sign: Sign::Positive,
        label: format!("canonical(c={c},k={k})"),
    })
}

impl<T: Real> Generator<T> {
    /// `c · log x · x^(−α)`; sign follows from `c` and the side of 1.
    pub fn power_log(c: T, alpha: T, domain: Domain) -> Result<Self> {
        if c == T::zero() || !c.is_finite() || !alpha.is_finite() {
            return Err(Error::Parameter("power-log needs finite nonzero c and finite alpha".into()));
        }
        let sign = match domain {
            Domain::AboveOne => Sign::of(c).unwrap(),
            Domain::UnitInterval => Sign::of(c).unwrap().flip(),
            Domain::Positive => {
                return Err(Error::Parameter("power-log changes sign at 1; pick a one-sided domain".into()))
            }
        };
        Ok(Self {
            kind: GeneratorKind::PowerLog { c, alpha },
            domain,
            sign,
            label: format!("powerlog(c={c},alpha={alpha})"),
        })
    }

    /// `a · x + b`, rejected unless it keeps one sign on the whole domain.
    pub fn affine(a: T, b: T, domain: Domain) -> Result<Self> {
        // values at the two ends of the domain (limits for open ends)
        let (lo, hi) = match domain {
            Domain::AboveOne => (a + b, if a == T::zero() { b } else { a * T::infinity() }),
            Domain::UnitInterval => (b, a + b),
            Domain::Positive => (b, if a == T::zero() { b } else { a * T::infinity() }),
        };
        let sign = if lo >= T::zero() && hi >= T::zero() && !(lo == T::zero() && hi == T::zero()) {
            Sign::Positive
        } else if lo <= T::zero() && hi <= T::zero() && !(lo == T::zero() && hi == T::zero()) {
            Sign::Negative
        } else {
            return Err(Error::Parameter(format!("affine {a}x+{b} changes sign on {domain}")));
        };
        Ok(Self { kind: GeneratorKind::Affine { a, b }, domain, sign, label: format!("affine(a={a},b={b})") })
    }

    pub fn tabulated(ext: TiledExtension<T>) -> Self {
        let sign = ext.sign();
        Self {
            kind: GeneratorKind::Tabulated(Arc::new(ext)),
            domain: Domain::AboveOne,
            sign,
            label: "table".into(),
        }
    }

    /// Wraps an arbitrary closure. Without a log-argument entry point,
    /// `eval_log(L)` falls back to `f(exp L)`.
    pub fn custom<F>(label: impl Into<String>, domain: Domain, sign: Sign, f: F) -> Self
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        Self {
            kind: GeneratorKind::Custom { f: Arc::new(f), f_log: None },
            domain,
            sign,
            label: label.into(),
        }
    }

    /// Attaches `L ↦ f(exp L)` evaluated without forming `exp L`.
    pub fn with_log_entry<F>(mut self, f_log: F) -> Self
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        if let GeneratorKind::Custom { f_log: slot, .. } = &mut self.kind {
            *slot = Some(Arc::new(f_log));
        }
        self
    }

    /// `x ↦ factor · f(x)`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let sign = match Sign::of(factor) {
            Some(Sign::Positive) => self.sign,
            Some(Sign::Negative) => self.sign.flip(),
            None => return Err(Error::Parameter("scale factor must be nonzero".into())),
        };
        Ok(Self {
            kind: GeneratorKind::Scaled { factor, inner: Arc::new(self.clone()) },
            domain: self.domain,
            sign,
            label: format!("{factor}*{}", self.label),
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &GeneratorKind<T> {
        &self.kind
    }

    pub fn has_log_entry(&self) -> bool {
        match &self.kind {
            GeneratorKind::Canonical { .. } | GeneratorKind::PowerLog { .. } | GeneratorKind::Tabulated(_) => true,
            GeneratorKind::Affine { .. } => false,
            GeneratorKind::Scaled { inner, .. } => inner.has_log_entry(),
            GeneratorKind::Custom { f_log, .. } => f_log.is_some(),
        }
    }

    fn finite(&self, v: T, at: T) -> Result<T> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("{} is not finite at {}", self.label, to_f64(at))))
        }
    }

    /// `f(x)` for `x` inside the domain.
    pub fn eval(&self, x: T) -> Result<T> {
        if !self.domain.contains(x) {
            return Err(Error::domain(to_f64(x), format!("outside the domain {} of {}", self.domain, self.label)));
        }
        let v = match &self.kind {
            GeneratorKind::Affine { a, b } => *a * x + *b,
            GeneratorKind::Custom { f, .. } => f(x),
            GeneratorKind::Tabulated(ext) => ext.extend(x)?,
            GeneratorKind::Scaled { factor, inner } => *factor * inner.eval(x)?,
            GeneratorKind::Canonical { .. } | GeneratorKind::PowerLog { .. } => self.closed_form_log(x.ln()),
        };
        self.finite(v, x)
    }

    fn closed_form_log(&self, l: T) -> T {
        match &self.kind {
            GeneratorKind::Canonical { c, k } => {
                let km1 = T::from_usize(k - 1).unwrap();
                *c * l * (-l / km1).exp()
            }
            GeneratorKind::PowerLog { c, alpha } => *c * l * (-*alpha * l).exp(),
            _ => unreachable!("closed form only for log-type generators"),
        }
    }

    fn check_log_arg(&self, l: T) -> Result<()> {
        let ok = l.is_finite()
            && match self.domain {
                Domain::AboveOne => l > T::zero(),
                Domain::UnitInterval => l < T::zero(),
                Domain::Positive => true,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(to_f64(l), format!("log-argument outside the domain {}", self.domain)))
        }
    }

    /// `f(exp(log_x))`, without forming `exp(log_x)` when the generator allows it.
    pub fn eval_log(&self, log_x: T) -> Result<T> {
        self.check_log_arg(log_x)?;
        let v = match &self.kind {
            GeneratorKind::Canonical { .. } | GeneratorKind::PowerLog { .. } => self.closed_form_log(log_x),
            GeneratorKind::Tabulated(ext) => ext.extend_log(log_x)?,
            GeneratorKind::Scaled { factor, inner } => *factor * inner.eval_log(log_x)?,
            GeneratorKind::Custom { f_log: Some(g), .. } => g(log_x),
            GeneratorKind::Affine { .. } | GeneratorKind::Custom { f_log: None, .. } => {
                let x = log_x.exp();
                if !x.is_finite() {
                    return Err(Error::Evaluation(format!(
                        "{} has no log-argument entry and exp({}) overflows",
                        self.label,
                        to_f64(log_x)
                    )));
                }
                return self.eval(x);
            }
        };
        self.finite(v, log_x.exp())
    }

    /// `log |f(exp(log_x))|`, in closed form where one exists so that it stays
    /// finite when `f` itself would underflow.
    pub fn ln_abs_at_log(&self, log_x: T) -> Result<T> {
        self.check_log_arg(log_x)?;
        match &self.kind {
            GeneratorKind::Canonical { c, k } => {
                let km1 = T::from_usize(k - 1).unwrap();
                Ok(c.abs().ln() + log_x.abs().ln() - log_x / km1)
            }
            GeneratorKind::PowerLog { c, alpha } => Ok(c.abs().ln() + log_x.abs().ln() - *alpha * log_x),
            GeneratorKind::Tabulated(ext) => ext.ln_abs_extend_log(log_x),
            GeneratorKind::Scaled { factor, inner } => Ok(factor.abs().ln() + inner.ln_abs_at_log(log_x)?),
            _ => {
                let v = self.eval_log(log_x)?;
                if v == T::zero() {
                    return Err(Error::Evaluation(format!("{} vanishes", self.label)));
                }
                Ok(v.abs().ln())
            }
        }
    }

    /// Spot-checks the declared sign on `samples` seeded points of the domain.
    pub fn check_sign(&self, samples: usize, seed: u64) -> Result<()> {
        let sampler = TupleSampler::new(self.domain);
        let stream = SampleStream::new(seed);
        for i in 0..samples as u64 {
            for x in sampler.tuple(&stream, i, 1) {
                let v = self.eval(cst(x))?;
                if Sign::of(v) != Some(self.sign) {
                    return Err(Error::Parameter(format!(
                        "{} has value {} at {x}, contradicting its declared sign",
                        self.label,
                        to_f64(v)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A generator paired with an arity.
#[derive(Clone, Debug)]
pub struct QuotientSpec<T> {
    pub f: Generator<T>,
    pub k: usize,
}

impl<T: Real> QuotientSpec<T> {
    pub fn new(f: Generator<T>, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Arity { got: k });
        }
        Ok(Self { f, k })
    }
}

fn quotient_raw<T: Real>(f: &Generator<T>, xs: &[T]) -> Result<T> {
    let mut num = T::zero();
    let mut log_product = T::zero();
    for &x in xs {
        num = num + f.eval(x)?;
        log_product = log_product + x.ln();
    }
    let den = f.eval_log(log_product)?;
    if den == T::zero() {
        return Err(Error::Evaluation(format!("{} vanishes at the product", f.label)));
    }
    let v = num / den;
    if !v.is_finite() || v <= T::zero() {
        return Err(Error::Evaluation(format!("quotient of {} is {}", f.label, to_f64(v))));
    }
    Ok(v)
}

/// `L_{f,k}` at a point of the generator's domain. The product `x₁⋯x_k` is
/// passed to the generator as `Σ log xᵢ`.
pub fn quotient_eval<T: Real>(spec: &QuotientSpec<T>, point: &MeanPoint<T>) -> Result<T> {
    if point.domain() != spec.f.domain {
        return Err(Error::Parameter(format!(
            "point domain {} differs from generator domain {}",
            point.domain(),
            spec.f.domain
        )));
    }
    if point.arity() != spec.k {
        return Err(Error::ArityMismatch { expected: spec.k, got: point.arity() });
    }
    quotient_raw(&spec.f, point.values())
}

/// Default probe points approaching 1 from inside the domain: `1 ± 2⁻ʲ`, j = 10..=40.
pub fn default_probe_points<T: Real>(domain: Domain) -> Vec<T> {
    (10..=40)
        .map(|j| {
            let h = 2f64.powi(-j);
            cst(if domain == Domain::UnitInterval { 1.0 - h } else { 1.0 + h })
        })
        .collect()
}

/// Estimate of `lim_{x→1} g(x)/f(x)` along `probe_points`; `None` when the
/// last three ratios are not within [`STABILIZATION_TOL`] of each other.
pub fn proportionality_constant<T: Real>(
    f: &Generator<T>,
    g: &Generator<T>,
    probe_points: &[T],
) -> Result<Option<T>> {
    if probe_points.len() < 3 {
        return Err(Error::Parameter("need at least three probe points".into()));
    }
    let mut ratios = Vec::with_capacity(probe_points.len());
    for &p in probe_points {
        let fp = f.eval(p)?;
        if fp == T::zero() {
            return Err(Error::Evaluation(format!("{} vanishes at probe point {}", f.label, to_f64(p))));
        }
        ratios.push(g.eval(p)? / fp);
    }
    Ok(stabilized(&ratios))
}

/// Last value of a sequence whose final three entries agree to
/// [`STABILIZATION_TOL`] relative.
pub(crate) fn stabilized<T: Real>(seq: &[T]) -> Option<T> {
    let n = seq.len();
    if n < 3 {
        return None;
    }
    let tail = &seq[n - 3..];
    if tail.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let tol = cst::<T>(STABILIZATION_TOL);
    let close = |a: T, b: T| (a - b).abs() <= tol * a.abs().max(b.abs()).max(cst(1e-300));
    (close(tail[0], tail[1]) && close(tail[1], tail[2]) && close(tail[0], tail[2])).then_some(tail[2])
}

/// Sampling-based verdict on `L_{f,k} = L_{g,k}`, cross-checked against the
/// proportionality constant of `g/f` at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityReport<T> {
    pub equal: bool,
    /// Largest `|L_g − L_f| / |L_f|` over the samples.
    pub max_residual: T,
    /// Tuple attaining `max_residual` when the verdict is "unequal".
    pub witness: Option<Vec<T>>,
    pub evaluated: usize,
    pub failures: usize,
    pub proportionality: Option<T>,
    /// `equal` agrees with whether a proportionality constant was found.
    pub consistent: bool,
}

pub fn quotient_equal<T: Real>(
    f: &Generator<T>,
    g: &Generator<T>,
    k: usize,
    sample_count: usize,
    seed: u64,
    tol: T,
) -> Result<EqualityReport<T>> {
    if f.domain != g.domain {
        return Err(Error::Parameter(format!("generators live on {} and {}", f.domain, g.domain)));
    }
    if k < 2 {
        return Err(Error::Arity { got: k });
    }
    let sampler = TupleSampler::new(f.domain);
    let stream = SampleStream::new(seed);
    let mut max_residual = T::zero();
    let mut worst: Option<Vec<T>> = None;
    let (mut evaluated, mut failures) = (0, 0);
    for i in 0..sample_count as u64 {
        let xs: Vec<T> = sampler.tuple(&stream, i, k).into_iter().map(cst).collect();
        match (quotient_raw(f, &xs), quotient_raw(g, &xs)) {
            (Ok(lf), Ok(lg)) => {
                evaluated += 1;
                let r = (lg - lf).abs() / lf.abs();
                if r > max_residual || worst.is_none() {
                    max_residual = r.max(max_residual);
                    worst = Some(xs);
                }
            }
            _ => failures += 1,
        }
    }
    let equal = evaluated > 0 && max_residual < tol;
    let proportionality = proportionality_constant(f, g, &default_probe_points(f.domain)).ok().flatten();
    Ok(EqualityReport {
        equal,
        max_residual,
        witness: if equal { None } else { worst },
        evaluated,
        failures,
        proportionality,
        consistent: equal == proportionality.is_some(),
    })
}

/// Parsed form of the command-line generator grammar:
///
/// ```text
/// canonical:c=<real>,k=<int>
/// powerlog:c=<real>,alpha=<real>
/// affine:a=<real>,b=<real>[,domain=<above-one|unit|positive>]
/// table:<path>
/// ```
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Canonical { c: f64, k: usize },
    PowerLog { c: f64, alpha: f64 },
    Affine { a: f64, b: f64, domain: Domain },
    Table(PathBuf),
}

fn key_values(body: &str) -> Result<Vec<(&str, &str)>> {
    body.split(',')
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Parameter(format!("expected key=value, got `{kv}`")))
        })
        .collect()
}

fn lookup<'a>(kvs: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    kvs.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parameter(format!("missing `{key}`")))
}

fn number<N: FromStr>(kvs: &[(&str, &str)], key: &str) -> Result<N> {
    let raw = lookup(kvs, key)?;
    raw.parse().map_err(|_| Error::Parameter(format!("`{key}={raw}` is not a number")))
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("generator spec `{s}` lacks a `kind:` prefix")))?;
        match head {
            "canonical" => {
                let kv = key_values(body)?;
                Ok(GeneratorSpec::Canonical { c: number(&kv, "c")?, k: number(&kv, "k")? })
            }
            "powerlog" => {
                let kv = key_values(body)?;
                Ok(GeneratorSpec::PowerLog { c: number(&kv, "c")?, alpha: number(&kv, "alpha")? })
            }
            "affine" => {
                let kv = key_values(body)?;
                let domain = match lookup(&kv, "domain") {
                    Ok(d) => d.parse()?,
                    Err(_) => Domain::AboveOne,
                };
                Ok(GeneratorSpec::Affine { a: number(&kv, "a")?, b: number(&kv, "b")?, domain })
            }
            "table" if !body.is_empty() => Ok(GeneratorSpec::Table(PathBuf::from(body))),
            _ => Err(Error::Parameter(format!("unknown generator spec `{s}`"))),
        }
    }
}

impl GeneratorSpec {
    /// Builds the generator; `k` is the arity used for tables (fundamental domain `[p, pᵏ)`).
    pub fn build(&self, k: usize) -> Result<Generator<f64>> {
        match self {
            GeneratorSpec::Canonical { c, k } => {
                let domain = if *c < 0.0 { Domain::UnitInterval } else { Domain::AboveOne };
                canonical_generator(*c, *k, domain)
            }
            GeneratorSpec::PowerLog { c, alpha } => {
                let domain = if *c < 0.0 { Domain::UnitInterval } else { Domain::AboveOne };
                // keep values positive: negative c lives on (0,1)
                Generator::power_log(*c, *alpha, domain)
            }
            GeneratorSpec::Affine { a, b, domain } => Generator::affine(*a, *b, *domain),
            GeneratorSpec::Table(path) => {
                let table = Table::from_path(path)?;
                Ok(Generator::tabulated(TiledExtension::from_table(table.xs()[0], k, table)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::means::log_cauchy_mean;
    use crate::scalar::rel_diff;

    const E: f64 = std::f64::consts::E;

    fn canon(k: usize) -> Generator<f64> {
        canonical_generator(1.0, k, Domain::AboveOne).unwrap()
    }

    #[test]
    fn canonical_examples() {
        assert!(rel_diff(canon(2).eval(E).unwrap(), 1.0 / E) < 1e-15);
        let f = canon(2);
        let lhs = f.eval(3.0).unwrap();
        let rhs = 1.5 * f.eval(9.0).unwrap();
        assert!(rel_diff(lhs, 3f64.ln() / 3.0) < 1e-15);
        assert!(rel_diff(lhs, rhs) < 1e-15);
        for k in 2..7 {
            for x in [1.0001, 2.0, 1e5] {
                assert!(canon(k).eval(x).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn canonical_parameter_errors() {
        assert!(matches!(canonical_generator(0.0, 2, Domain::AboveOne), Err(Error::Parameter(_))));
        assert!(matches!(canonical_generator(-1.0, 2, Domain::AboveOne), Err(Error::Parameter(_))));
        assert!(matches!(canonical_generator(1.0, 2, Domain::UnitInterval), Err(Error::Parameter(_))));
        assert!(matches!(canonical_generator(1.0, 1, Domain::AboveOne), Err(Error::Parameter(_))));
        let g = canonical_generator(-1.0, 3, Domain::UnitInterval).unwrap();
        assert!(g.eval(0.3).unwrap() > 0.0);
        g.check_sign(500, 1).unwrap();
    }

    #[test]
    fn quotient_examples() {
        let id = Generator::custom("x", Domain::AboveOne, Sign::Positive, |x: f64| x);
        let spec = QuotientSpec::new(id, 2).unwrap();
        let p = MeanPoint::new(vec![2.0, 3.0], Domain::AboveOne).unwrap();
        assert!(rel_diff(quotient_eval(&spec, &p).unwrap(), 5.0 / 6.0) < 1e-15);

        let spec = QuotientSpec::new(canon(2), 2).unwrap();
        let v = quotient_eval(&spec, &p).unwrap();
        assert!(rel_diff(v, 72f64.ln() / 6f64.ln()) < 1e-12);
        assert!(rel_diff(v, log_cauchy_mean(&[2.0, 3.0]).unwrap()) < 1e-12);

        let spec = QuotientSpec::new(canon(3), 3).unwrap();
        for x in [1.001, 1.7, 40.0, 999.0] {
            let p = MeanPoint::new(vec![x; 3], Domain::AboveOne).unwrap();
            assert!(rel_diff(quotient_eval(&spec, &p).unwrap(), x) < 1e-12);
        }
    }

    #[test]
    fn quotient_errors() {
        let spec = QuotientSpec::new(canon(2), 2).unwrap();
        let p = MeanPoint::new(vec![0.2, 0.3], Domain::UnitInterval).unwrap();
        assert!(quotient_eval(&spec, &p).is_err());
        let p3 = MeanPoint::new(vec![2.0, 3.0, 4.0], Domain::AboveOne).unwrap();
        assert!(matches!(quotient_eval(&spec, &p3), Err(Error::ArityMismatch { .. })));
        let vanishing = Generator::custom("x-2", Domain::AboveOne, Sign::Positive, |x: f64| (x - 2.0).abs());
        let spec = QuotientSpec::new(vanishing, 2).unwrap();
        let p = MeanPoint::new(vec![2.0_f64.sqrt(), 2.0_f64.sqrt()], Domain::AboveOne).unwrap();
        assert!(matches!(quotient_eval(&spec, &p), Err(Error::Evaluation(_))));
    }

    #[test]
    fn log_entry_avoids_overflow() {
        // the product 1e360 overflows, the log-argument path does not
        let spec = QuotientSpec::new(canon(6), 6).unwrap();
        let p = MeanPoint::new(vec![1e60; 6], Domain::AboveOne).unwrap();
        assert!(rel_diff(quotient_eval(&spec, &p).unwrap(), 1e60) < 1e-12);
    }

    #[test]
    fn unit_interval_mirror_is_log_cauchy() {
        let f = canonical_generator(-1.0, 3, Domain::UnitInterval).unwrap();
        let spec = QuotientSpec::new(f, 3).unwrap();
        let p = MeanPoint::new(vec![0.1, 0.5, 0.9], Domain::UnitInterval).unwrap();
        let v = quotient_eval(&spec, &p).unwrap();
        assert!(rel_diff(v, log_cauchy_mean(p.values()).unwrap()) < 1e-13);
        assert!(v > 0.1 && v < 0.9);
    }

    #[test]
    fn proportionality_examples() {
        let f = canon(2);
        let g = f.scaled(2.5).unwrap();
        let c = proportionality_constant(&f, &g, &default_probe_points(Domain::AboveOne)).unwrap();
        assert!((c.unwrap() - 2.5).abs() < 1e-10);

        let log = Generator::custom("log", Domain::AboveOne, Sign::Positive, |x: f64| x.ln());
        let c = proportionality_constant(&f, &log, &default_probe_points(Domain::AboveOne)).unwrap();
        assert!((c.unwrap() - 1.0).abs() < 1e-10);

        let ff = f.clone();
        let wobble = Generator::custom("wobble", Domain::AboveOne, Sign::Positive, move |x: f64| {
            ff.eval(x).unwrap() * (1.0 + (1.0 / (x - 1.0)).sin())
        });
        let c = proportionality_constant(&f, &wobble, &default_probe_points(Domain::AboveOne)).unwrap();
        assert_eq!(c, None);
    }

    #[test]
    fn proportionality_vanishing_f() {
        let zero = Generator::custom("0", Domain::AboveOne, Sign::Positive, |_: f64| 0.0);
        let r = proportionality_constant(&zero, &canon(2), &default_probe_points(Domain::AboveOne));
        assert!(matches!(r, Err(Error::Evaluation(_))));
    }

    #[test]
    fn equality_verdicts() {
        let f = canon(2);
        let same = quotient_equal(&f, &f, 2, 500, 1, 1e-9).unwrap();
        assert!(same.equal && same.max_residual == 0.0 && same.consistent);

        let g = f.scaled(2.5).unwrap();
        let r = quotient_equal(&f, &g, 2, 500, 1, 1e-9).unwrap();
        assert!(r.equal && r.max_residual < 1e-13 && r.consistent, "{r:?}");
        assert!((r.proportionality.unwrap() - 2.5).abs() < 1e-10);

        let ff = f.clone();
        let bumped = Generator::custom("f+0.1", Domain::AboveOne, Sign::Positive, move |x: f64| {
            ff.eval(x).unwrap() + 0.1
        });
        let r = quotient_equal(&f, &bumped, 2, 500, 1, 1e-9).unwrap();
        assert!(!r.equal && r.consistent, "{r:?}");
        let w = r.witness.unwrap();
        let direct = |g: &Generator<f64>| quotient_raw(g, &w).unwrap();
        assert!(rel_diff(direct(&f), direct(&bumped)) > 1e-9);
    }

    #[test]
    fn scale_invariance() {
        let f = canon(4);
        let sampler = TupleSampler::new(Domain::AboveOne);
        let stream = SampleStream::new(5);
        for c in [1e-3, 0.7, 3.0, 1e4] {
            let g = f.scaled(c).unwrap();
            for i in 0..200 {
                let xs = sampler.tuple(&stream, i, 4);
                let a = quotient_raw(&f, &xs).unwrap();
                let b = quotient_raw(&g, &xs).unwrap();
                assert!(rel_diff(a, b) < 1e-13);
            }
        }
    }

    #[test]
    fn grammar() {
        assert_eq!("canonical:c=1,k=3".parse::<GeneratorSpec>().unwrap(), GeneratorSpec::Canonical { c: 1.0, k: 3 });
        assert_eq!(
            "powerlog:c=2,alpha=0.5".parse::<GeneratorSpec>().unwrap(),
            GeneratorSpec::PowerLog { c: 2.0, alpha: 0.5 }
        );
        assert_eq!(
            "affine:a=1,b=0".parse::<GeneratorSpec>().unwrap(),
            GeneratorSpec::Affine { a: 1.0, b: 0.0, domain: Domain::AboveOne }
        );
        assert_eq!("table:f.csv".parse::<GeneratorSpec>().unwrap(), GeneratorSpec::Table("f.csv".into()));
        for bad in ["canonical", "canonical:c=1", "canonical:c=x,k=2", "foo:a=1", "table:"] {
            assert!(bad.parse::<GeneratorSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn affine_sign_rules() {
        assert_eq!(Generator::affine(1.0, 0.0, Domain::AboveOne).unwrap().sign(), Sign::Positive);
        assert_eq!(Generator::affine(-1.0, 0.5, Domain::AboveOne).unwrap().sign(), Sign::Negative);
        assert!(Generator::affine(1.0, -2.0, Domain::AboveOne).is_err());
        assert!(Generator::affine(1.0, -0.5, Domain::UnitInterval).is_err());
    }
}
