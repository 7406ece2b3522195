//! Fundamental-domain solutions of the reflexivity equation
//! `f(x) = (x/k) · f(xᵏ)` on (1, +∞).
//!
//! Any `f₀` on the tile `[p, pᵏ)` extends uniquely to a solution through
//!
//! ```text
//! f(x) = kⁿ · x^((k⁻ⁿ − 1)/(k − 1)) · f₀(x^(k⁻ⁿ)),   x ∈ [p^(kⁿ), p^(kⁿ⁺¹)), n ∈ ℤ
//! ```
//!
//! and the extension is continuous iff `f₀` is and `f₀(pᵏ−) = (k/p) · f₀(p)`.
//! All tile arithmetic runs on `log x`, so tiles far from the base are
//! reachable without forming `x` itself.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quotient::{stabilized, Generator, Sign};
use crate::scalar::{cst, to_f64, Real};

/// Default cap on `|n|`.
pub const DEFAULT_MAX_TILE: i64 = 64;

/// Snap distance around a tile boundary `B = kⁿ·log p` in log space.
fn boundary_tol<T: Real>(b: T) -> T {
    cst::<T>(1e-15) + cst::<T>(4.0) * T::epsilon() * b.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileLocation {
    pub n: i64,
    /// Input lay within snapping distance of the tile's lower boundary.
    pub on_boundary: bool,
}

fn tile_boundary<T: Real>(log_p: T, k: usize, n: i64) -> T {
    let kf = T::from_usize(k).unwrap();
    let n32 = n.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    log_p * kf.powi(n32)
}

/// Tile of `exp(log_x)` for base `exp(log_p)`: the `n` with
/// `kⁿ·log p ≤ log x < kⁿ⁺¹·log p`.
pub fn locate_tile_log<T: Real>(log_x: T, log_p: T, k: usize) -> Result<TileLocation> {
    if !(log_x.is_finite() && log_x > T::zero()) {
        return Err(Error::domain(to_f64(log_x.exp()), "tile index needs x > 1"));
    }
    if !(log_p.is_finite() && log_p > T::zero()) {
        return Err(Error::Parameter(format!("base point must exceed 1, got {}", to_f64(log_p.exp()))));
    }
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    let kf = T::from_usize(k).unwrap();
    let estimate = ((log_x / log_p).ln() / kf.ln()).floor();
    let mut n = estimate.to_i64().unwrap_or(0);
    for _ in 0..2 {
        let lower = tile_boundary(log_p, k, n);
        let upper = tile_boundary(log_p, k, n + 1);
        if log_x < lower - boundary_tol(lower) {
            n -= 1;
        } else if log_x >= upper - boundary_tol(upper) {
            n += 1;
        } else {
            break;
        }
    }
    let lower = tile_boundary(log_p, k, n);
    Ok(TileLocation { n, on_boundary: (log_x - lower).abs() <= boundary_tol(lower) })
}

pub fn locate_tile<T: Real>(x: T, p: T, k: usize) -> Result<TileLocation> {
    if !(x.is_finite() && x > T::one()) {
        return Err(Error::domain(to_f64(x), "tile index needs x > 1"));
    }
    locate_tile_log(x.ln(), p.ln(), k)
}

/// The unique `n ∈ ℤ` with `p^(kⁿ) ≤ x < p^(kⁿ⁺¹)`.
pub fn tile_index<T: Real>(x: T, p: T, k: usize) -> Result<i64> {
    locate_tile(x, p, k).map(|t| t.n)
}

/// Samples of `f₀`, interpolated linearly in `log x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    xs: Vec<T>,
    fs: Vec<T>,
    log_xs: Vec<T>,
}

#[derive(serde::Deserialize)]
struct Row {
    x: f64,
    f: f64,
}

impl<T: Real> Table<T> {
    pub fn new(xs: Vec<T>, fs: Vec<T>) -> Result<Self> {
        if xs.len() != fs.len() {
            return Err(Error::Parameter("table columns differ in length".into()));
        }
        if xs.len() < 2 {
            return Err(Error::Parameter("table needs at least two rows".into()));
        }
        for (i, w) in xs.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(Error::Table { line: i as u64 + 3, message: "x is not strictly increasing".into() });
            }
        }
        if let Some(i) = xs.iter().chain(&fs).position(|v| !v.is_finite()) {
            return Err(Error::Table { line: (i % xs.len()) as u64 + 2, message: "non-finite value".into() });
        }
        let log_xs = xs.iter().map(|x| x.ln()).collect();
        Ok(Self { xs, fs, log_xs })
    }

    /// Parses CSV with header `x,f`. Errors carry 1-based line numbers.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Table { line: 1, message: e.to_string() })?
            .clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "f" {
            return Err(Error::Table { line: 1, message: "header must be `x,f`".into() });
        }
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        let mut prev: Option<f64> = None;
        for record in reader.records() {
            let record = record.map_err(|e| Error::Table {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let row: Row = record
                .deserialize(Some(&headers))
                .map_err(|e| Error::Table { line, message: e.to_string() })?;
            if !row.x.is_finite() || !row.f.is_finite() {
                return Err(Error::Table { line, message: "non-finite value".into() });
            }
            if prev.is_some_and(|p| row.x <= p) {
                return Err(Error::Table { line, message: "x is not strictly increasing".into() });
            }
            prev = Some(row.x);
            xs.push(cst(row.x));
            fs.push(cst(row.f));
        }
        Self::new(xs, fs)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn fs(&self) -> &[T] {
        &self.fs
    }

    fn segment_value(&self, i: usize, lx: T) -> T {
        let t = (lx - self.log_xs[i]) / (self.log_xs[i + 1] - self.log_xs[i]);
        self.fs[i] + t * (self.fs[i + 1] - self.fs[i])
    }

    pub fn interpolate(&self, x: T) -> Result<T> {
        let (lo, hi) = (self.xs[0], *self.xs.last().unwrap());
        if !(x >= lo && x <= hi) {
            return Err(Error::Interpolation { x: to_f64(x), lo: to_f64(lo), hi: to_f64(hi) });
        }
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            j => (j - 1).min(self.xs.len() - 2),
        };
        if x == self.xs[i] {
            return Ok(self.fs[i]);
        }
        Ok(self.segment_value(i, x.ln()))
    }

    /// Value of the last segment continued linearly (in `log x`) past the last abscissa.
    fn continue_last(&self, x: T) -> T {
        self.segment_value(self.xs.len() - 2, x.ln())
    }
}

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
enum Base<T> {
    Closed(RealFn<T>),
    Table(Table<T>),
}

/// Which tiles an extension covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileRange {
    /// `n ∈ ℤ`, i.e. all of (1, +∞).
    Integers,
    /// `n ≥ 0`, i.e. `[p, +∞)`.
    NonNegative,
}

/// `f₀` on `[p, pᵏ)` together with everything needed to evaluate its extension.
#[derive(Clone)]
pub struct TiledExtension<T> {
    p: T,
    log_p: T,
    k: usize,
    base: Base<T>,
    sign: Sign,
    range: TileRange,
    max_tile: i64,
}

impl<T: Real> fmt::Debug for TiledExtension<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TiledExtension")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("table", &matches!(self.base, Base::Table(_)))
            .field("sign", &self.sign)
            .field("range", &self.range)
            .field("max_tile", &self.max_tile)
            .finish()
    }
}

fn check_base<T: Real>(p: T, k: usize) -> Result<()> {
    if !(p.is_finite() && p > T::one()) {
        return Err(Error::Parameter(format!("base point must exceed 1, got {}", to_f64(p))));
    }
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    Ok(())
}

impl<T: Real> TiledExtension<T> {
    pub fn from_fn<F>(p: T, k: usize, sign: Sign, f0: F) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        check_base(p, k)?;
        Ok(Self {
            p,
            log_p: p.ln(),
            k,
            base: Base::Closed(Arc::new(f0)),
            sign,
            range: TileRange::Integers,
            max_tile: DEFAULT_MAX_TILE,
        })
    }

    /// Seeds `f₀` from the restriction of a generator to `[p, pᵏ)`.
    pub fn from_generator(p: T, k: usize, g: Generator<T>) -> Result<Self> {
        let sign = g.sign();
        Self::from_fn(p, k, sign, move |x| g.eval(x).unwrap_or_else(|_| T::nan()))
    }

    pub fn from_table(p: T, k: usize, table: Table<T>) -> Result<Self> {
        check_base(p, k)?;
        let log_p = p.ln();
        let kf = T::from_usize(k).unwrap();
        let first = table.xs[0];
        let last = *table.xs.last().unwrap();
        if first < p {
            return Err(Error::Table { line: 2, message: format!("x = {} lies below p = {}", to_f64(first), to_f64(p)) });
        }
        if last.ln() >= kf * log_p {
            return Err(Error::Table {
                line: table.xs.len() as u64 + 1,
                message: format!("x = {} is not below p^k", to_f64(last)),
            });
        }
        let sign = if table.fs.iter().all(|&v| v > T::zero()) {
            Sign::Positive
        } else if table.fs.iter().all(|&v| v < T::zero()) {
            Sign::Negative
        } else {
            return Err(Error::Table { line: 0, message: "f values must all share one strict sign".into() });
        };
        Ok(Self { p, log_p, k, base: Base::Table(table), sign, range: TileRange::Integers, max_tile: DEFAULT_MAX_TILE })
    }

    pub fn with_range(mut self, range: TileRange) -> Self {
        self.range = range;
        self
    }

    pub fn with_max_tile(mut self, max_tile: i64) -> Self {
        self.max_tile = max_tile;
        self
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// `f₀` itself; only meaningful on `[p, pᵏ)`.
    pub fn base(&self, y: T) -> Result<T> {
        let v = match &self.base {
            Base::Closed(f) => f(y),
            Base::Table(t) => t.interpolate(y)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("f0 is not finite at {}", to_f64(y))))
        }
    }

    fn locate(&self, log_x: T) -> Result<TileLocation> {
        let loc = locate_tile_log(log_x, self.log_p, self.k)?;
        if self.range == TileRange::NonNegative && loc.n < 0 {
            return Err(Error::domain(to_f64(log_x.exp()), "extension is defined on [p, +inf) only"));
        }
        Ok(loc)
    }

    fn check_tile(&self, n: i64) -> Result<()> {
        let kf = T::from_usize(self.k).unwrap();
        let limit = 1023.0 * std::f64::consts::LN_2 / to_f64(kf.ln());
        if n.abs() > self.max_tile || n.abs() as f64 > limit {
            return Err(Error::Range { n });
        }
        Ok(())
    }

    /// (kⁿ, exponent (k⁻ⁿ − 1)/(k − 1), rescaled argument y = x^(k⁻ⁿ) ∈ [p, pᵏ)).
    fn tile_terms(&self, log_x: T, n: i64) -> (T, T, T) {
        let kf = T::from_usize(self.k).unwrap();
        let kn = kf.powi(n as i32);
        let exponent = (kn.recip() - T::one()) / (kf - T::one());
        // boundary points can round just below p
        let y = (log_x / kn).exp().max(self.p);
        (kn, exponent, y)
    }

    /// The extension at `x > 1`.
    pub fn extend(&self, x: T) -> Result<T> {
        if !(x.is_finite() && x > T::one()) {
            return Err(Error::domain(to_f64(x), "extension is defined for x > 1"));
        }
        let log_x = x.ln();
        let loc = self.locate(log_x)?;
        if loc.n == 0 {
            return self.base(x.max(self.p));
        }
        self.extend_in_tile(log_x, loc.n)
    }

    /// The extension at `exp(log_x)`.
    pub fn extend_log(&self, log_x: T) -> Result<T> {
        let loc = self.locate(log_x)?;
        self.extend_in_tile(log_x, loc.n)
    }

    fn extend_in_tile(&self, log_x: T, n: i64) -> Result<T> {
        self.check_tile(n)?;
        let (kn, exponent, y) = self.tile_terms(log_x, n);
        let v = kn * (exponent * log_x).exp() * self.base(y)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow(format!("extension value at log x = {}", to_f64(log_x))))
        }
    }

    /// `log |f(exp(log_x))|`, finite even where `f` under- or overflows.
    pub fn ln_abs_extend_log(&self, log_x: T) -> Result<T> {
        let loc = self.locate(log_x)?;
        self.check_tile(loc.n)?;
        let kf = T::from_usize(self.k).unwrap();
        let (_, exponent, y) = self.tile_terms(log_x, loc.n);
        let n = T::from_i64(loc.n).unwrap();
        Ok(n * kf.ln() + exponent * log_x + self.base(y)?.abs().ln())
    }

    fn left_limit_probe(&self, x: T) -> Result<T> {
        match &self.base {
            Base::Closed(f) => Ok(f(x)),
            Base::Table(t) if x > *t.xs.last().unwrap() => Ok(t.continue_last(x)),
            Base::Table(t) => t.interpolate(x),
        }
    }
}

/// `|f₀(pᵏ−) − (k/p)·f₀(p)|`, with the one-sided limit estimated along
/// `pᵏ·(1 − 2⁻ʲ)`, j = 20..=40. `None` when the estimates do not stabilize.
pub fn continuity_defect<T: Real>(ext: &TiledExtension<T>) -> Result<Option<T>> {
    let kf = T::from_usize(ext.k).unwrap();
    let target = kf / ext.p * ext.base(ext.p)?;
    let pk = (kf * ext.log_p).exp();
    let estimates = (20..=40)
        .map(|j| ext.left_limit_probe(pk * (T::one() - cst::<T>(2f64.powi(-j)))))
        .collect::<Result<Vec<T>>>()?;
    Ok(stabilized(&estimates).map(|limit| (limit - target).abs()))
}

/// A function that [`reflexivity_residual`] can evaluate, optionally from `log x`.
pub trait RealFunction<T: Real> {
    fn value(&self, x: T) -> Result<T>;
    /// `Some` when the function can be evaluated from `log x` directly.
    fn value_log(&self, log_x: T) -> Option<Result<T>>;
    /// `Some((sign, log |f|))` when available from `log x`.
    fn signed_ln_abs_log(&self, _log_x: T) -> Option<Result<(T, T)>> {
        None
    }
}

fn sign_value<T: Real>(s: Sign) -> T {
    match s {
        Sign::Positive => T::one(),
        Sign::Negative => -T::one(),
    }
}

impl<T: Real> RealFunction<T> for Generator<T> {
    fn value(&self, x: T) -> Result<T> {
        self.eval(x)
    }
    fn value_log(&self, log_x: T) -> Option<Result<T>> {
        self.has_log_entry().then(|| self.eval_log(log_x))
    }
    fn signed_ln_abs_log(&self, log_x: T) -> Option<Result<(T, T)>> {
        self.has_log_entry()
            .then(|| self.ln_abs_at_log(log_x).map(|l| (sign_value(self.sign()), l)))
    }
}

impl<T: Real> RealFunction<T> for TiledExtension<T> {
    fn value(&self, x: T) -> Result<T> {
        self.extend(x)
    }
    fn value_log(&self, log_x: T) -> Option<Result<T>> {
        Some(self.extend_log(log_x))
    }
    fn signed_ln_abs_log(&self, log_x: T) -> Option<Result<(T, T)>> {
        Some(self.ln_abs_extend_log(log_x).map(|l| (sign_value(self.sign), l)))
    }
}

/// `f(x) − (x/k)·f(xᵏ)`.
pub fn reflexivity_residual<T: Real, F: RealFunction<T> + ?Sized>(f: &F, x: T, k: usize) -> Result<T> {
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    let kf = T::from_usize(k).unwrap();
    let fx = f.value(x)?;
    let log_xk = kf * x.ln();
    let fxk = match f.value_log(log_xk) {
        Some(v) => v?,
        None => {
            let xk = x.powi(k as i32);
            if !xk.is_finite() {
                return Err(Error::Overflow(format!("{}^{k} without a log-argument entry", to_f64(x))));
            }
            f.value(xk)?
        }
    };
    let rhs = x / kf * fxk;
    if fxk.abs() < T::min_positive_value() || !rhs.is_finite() {
        // f(x^k) itself is out of range; (x/k)·f(x^k) may still be fine
        if let Some(r) = f.signed_ln_abs_log(log_xk) {
            let (s, l) = r?;
            return Ok(fx - s * (x.ln() - kf.ln() + l).exp());
        }
    }
    Ok(fx - rhs)
}

/// [`reflexivity_residual`] divided by `|f(x)|`.
pub fn relative_reflexivity_residual<T: Real, F: RealFunction<T> + ?Sized>(f: &F, x: T, k: usize) -> Result<T> {
    let r = reflexivity_residual(f, x, k)?;
    Ok(r / f.value(x)?.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::quotient::canonical_generator;
    use crate::scalar::rel_diff;

    fn log_over_x() -> TiledExtension<f64> {
        TiledExtension::from_fn(2.0, 2, Sign::Positive, |x: f64| x.ln() / x).unwrap()
    }

    #[test]
    fn tile_index_examples() {
        assert_eq!(tile_index(2.0, 2.0, 2).unwrap(), 0);
        assert_eq!(tile_index(4.0, 2.0, 2).unwrap(), 1);
        assert_eq!(tile_index(16.0, 2.0, 2).unwrap(), 2);
        assert_eq!(tile_index(2f64.sqrt(), 2.0, 2).unwrap(), -1);
        assert_eq!(tile_index(3.9999999, 2.0, 2).unwrap(), 0);
        assert_eq!(tile_index(4.0000001, 2.0, 2).unwrap(), 1);
        assert!(matches!(tile_index(1.0, 2.0, 2), Err(Error::Domain { .. })));
        assert!(matches!(tile_index(0.5, 2.0, 2), Err(Error::Domain { .. })));
    }

    #[test]
    fn tile_boundaries_map_to_their_tile() {
        for &(p, k) in &[(2.0, 2usize), (1.5, 3), (3.0, 5), (1.01, 2)] {
            for n in -20i32..=20 {
                let x = f64::powf(p, (k as f64).powi(n));
                if !x.is_finite() || x <= 1.0 {
                    continue;
                }
                let loc = locate_tile(x, p, k).unwrap();
                assert_eq!(loc.n, n as i64, "p={p} k={k} n={n}");
                assert!(loc.on_boundary);
            }
        }
    }

    #[test]
    fn extend_example_closed_form() {
        let ext = log_over_x();
        let v = ext.extend(16.0).unwrap();
        assert!(rel_diff(v, 4.0 * 0.125 * (2f64.ln() / 2.0)) < 1e-15);
        assert!(rel_diff(v, 16f64.ln() / 16.0) < 1e-14);
    }

    #[test]
    fn identity_tile_is_exact() {
        let ext = log_over_x();
        for i in 0..100 {
            let x = 2.0 + 2.0 * i as f64 / 100.0;
            assert_eq!(ext.extend(x).unwrap(), x.ln() / x);
        }
    }

    #[test]
    fn canonical_seed_reproduces_closed_form() {
        let k = 3;
        let g = canonical_generator(1.0, k, Domain::AboveOne).unwrap();
        let ext = TiledExtension::from_generator(2.0, k, g.clone()).unwrap();
        for n in -6i32..=6 {
            for t in [0.0, 0.25, 0.5, 0.9] {
                // point at fraction t of tile n in log-log coordinates
                let log_x = 2f64.ln() * 3f64.powf(n as f64 + t);
                let a = ext.ln_abs_extend_log(log_x).unwrap();
                let b = g.ln_abs_at_log(log_x).unwrap();
                assert!((a - b).abs() < 1e-10, "n={n} t={t}");
                let x = log_x.exp();
                if x.is_finite() && g.eval(x).unwrap() > 1e-300 {
                    assert!(rel_diff(ext.extend(x).unwrap(), g.eval(x).unwrap()) < 1e-10, "n={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn continuity_defect_examples() {
        let g = canonical_generator(1.0, 2, Domain::AboveOne).unwrap();
        let ext = TiledExtension::from_generator(2.0, 2, g).unwrap();
        assert!(continuity_defect(&ext).unwrap().unwrap() < 1e-10);

        let one22 = TiledExtension::from_fn(2.0, 2, Sign::Positive, |_: f64| 1.0).unwrap();
        assert!(continuity_defect(&one22).unwrap().unwrap() < 1e-15);
        let one23 = TiledExtension::from_fn(2.0, 3, Sign::Positive, |_: f64| 1.0).unwrap();
        assert!((continuity_defect(&one23).unwrap().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn continuity_defect_indeterminate() {
        let wild = TiledExtension::from_fn(2.0, 2, Sign::Positive, |x: f64| 2.0 + (1.0 / (4.0 - x)).sin()).unwrap();
        assert_eq!(continuity_defect(&wild).unwrap(), None);
    }

    #[test]
    fn reflexivity_residual_examples() {
        let g = canonical_generator(1.0, 4, Domain::AboveOne).unwrap();
        for x in [1.001f64, 3.0, 50.0, 1e5] {
            assert!(relative_reflexivity_residual(&g, x, 4).unwrap().abs() < 1e-12);
        }
        let log = Generator::custom("log", Domain::AboveOne, Sign::Positive, |x: f64| x.ln());
        let r = reflexivity_residual(&log, 3.0, 2).unwrap();
        assert!((r + 2.0 * 3f64.ln()).abs() < 1e-14);
        assert!((r + 2.197_224_577_336_219_6).abs() < 1e-12);
    }

    #[test]
    fn reflexivity_overflow_without_log_entry() {
        let lin = Generator::custom("x", Domain::AboveOne, Sign::Positive, |x: f64| x);
        assert!(matches!(reflexivity_residual(&lin, 1e200, 2), Err(Error::Overflow(_))));
    }

    #[test]
    fn arbitrary_seed_satisfies_equation() {
        // f0 has nothing to do with the canonical solution
        let ext = TiledExtension::from_fn(1.7, 3, Sign::Positive, |x: f64| 1.0 + (3.0 * x).sin().powi(2)).unwrap();
        for i in 1..200 {
            let log_x = 1e-4 * 1.09f64.powi(i);
            let x = log_x.exp();
            let loc = locate_tile_log(log_x, 1.7f64.ln(), 3).unwrap();
            if loc.on_boundary || !x.is_finite() || loc.n.abs() > 20 {
                continue;
            }
            let r = relative_reflexivity_residual(&ext, x, 3).unwrap();
            assert!(r.abs() < 1e-11, "x={x} r={r}");
        }
    }

    #[test]
    fn range_guard() {
        let ext = log_over_x().with_max_tile(3);
        assert!(ext.extend_log(2f64.ln() * 2f64.powi(3) * 1.5).is_ok());
        assert_eq!(ext.extend_log(2f64.ln() * 2f64.powi(4) * 1.5), Err(Error::Range { n: 4 }));
        assert_eq!(ext.extend_log(2f64.ln() * 2f64.powi(-5) * 1.5), Err(Error::Range { n: -5 }));
    }

    #[test]
    fn nonnegative_range_agrees() {
        let full = log_over_x();
        let half = log_over_x().with_range(TileRange::NonNegative);
        assert!(half.extend(1.5).is_err());
        for x in [2.0, 3.3, 4.0, 17.0, 1e6] {
            assert_eq!(full.extend(x).unwrap(), half.extend(x).unwrap());
        }
    }

    #[test]
    fn table_parsing() {
        let t = Table::<f64>::from_csv_str("x,f\n2,1\n3,2\n").unwrap();
        assert_eq!(t.xs(), &[2.0, 3.0]);
        match Table::<f64>::from_csv_str("x,f\n2,1\n3,oops\n") {
            Err(Error::Table { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match Table::<f64>::from_csv_str("x,f\n2,1\n3,2\n3,4\n") {
            Err(Error::Table { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Table::<f64>::from_csv_str("a,b\n2,1\n3,1\n"), Err(Error::Table { line: 1, .. })));
        assert!(Table::<f64>::from_csv_str("x,f\n2,1\n").is_err());
    }

    #[test]
    fn table_interpolation_is_linear_in_log_x() {
        let t = Table::<f64>::new(vec![2.0, 8.0], vec![1.0, 3.0]).unwrap();
        assert!((t.interpolate(4.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(t.interpolate(8.0).unwrap(), 3.0);
        assert!(matches!(t.interpolate(9.0), Err(Error::Interpolation { .. })));
    }

    #[test]
    fn table_extension_tracks_closed_form() {
        let (p, k) = (2.0f64, 2usize);
        let n = 256;
        let xs: Vec<f64> = (0..n).map(|i| p * (p.powi(k as i32) / p).powf(i as f64 / n as f64)).collect();
        let fs: Vec<f64> = xs.iter().map(|x| x.ln() / x).collect();
        let ext = TiledExtension::from_table(p, k, Table::new(xs, fs).unwrap()).unwrap();
        for x in [1.1, 2.5, 3.7, 10.0, 300.0] {
            let y = f64::ln(x) / x;
            assert!(rel_diff(ext.extend(x).unwrap(), y) < 1e-5, "{x}");
        }
        // O(h²) from the extrapolated last segment, h = ln 2 / 256
        assert!(continuity_defect(&ext).unwrap().unwrap() < 1e-5);
    }

    #[test]
    fn table_hull_checks() {
        let t = Table::new(vec![2.0, 3.0, 4.5], vec![1.0, 1.0, 1.0]).unwrap();
        assert!(TiledExtension::from_table(2.0, 2, t.clone()).is_err());
        let t = Table::new(vec![2.0, 3.0], vec![1.0, -1.0]).unwrap();
        assert!(TiledExtension::from_table(2.0, 2, t).is_err());
        let t = Table::new(vec![2.0, 3.0], vec![1.0, 1.0]).unwrap();
        let ext = TiledExtension::from_table(2.0, 2, t).unwrap();
        assert!(matches!(ext.extend(3.5), Err(Error::Interpolation { .. })));
    }
}
