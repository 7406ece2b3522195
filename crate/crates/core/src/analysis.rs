//! Characterization checks for reflexive generators: the double-exponential
//! transform and its difference equation, a concavity probe, the boundedness
//! quotient φ near 1, the contraction factor κ, and the Jensen residual.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::funceq::{reflexivity_residual, RealFunction};
use crate::quotient::{stabilized, Generator};
use crate::scalar::{cst, to_f64, Real};

/// `h(τ) = log f(exp(exp τ))` for a positive generator on (1, +∞).
#[derive(Debug, Clone)]
pub struct TransformedGenerator<T> {
    source: Generator<T>,
}

pub fn h_transform<T: Real>(f: &Generator<T>) -> Result<TransformedGenerator<T>> {
    if f.domain() != Domain::AboveOne {
        return Err(Error::Transform(format!("{} is not defined on (1, +inf)", f.label())));
    }
    let t = TransformedGenerator { source: f.clone() };
    for tau in [-1.0, 0.0, 1.0] {
        t.eval(cst(tau))?;
    }
    Ok(t)
}

impl<T: Real> TransformedGenerator<T> {
    pub fn source(&self) -> &Generator<T> {
        &self.source
    }

    pub fn eval(&self, tau: T) -> Result<T> {
        let f = &self.source;
        let log_x = tau.exp();
        if !(log_x > T::zero() && log_x.is_finite()) {
            return Err(Error::Transform(format!("exp({}) is not a usable log-argument", to_f64(tau))));
        }
        // the sign is read off f itself; the log is taken separately so that
        // underflowing values still have a finite transform
        match f.eval_log(log_x) {
            Ok(v) if v < T::zero() || (v == T::zero() && !f.has_log_entry()) => {
                return Err(Error::Transform(format!(
                    "{} is not positive at exp(exp({}))",
                    f.label(),
                    to_f64(tau)
                )))
            }
            Ok(_) => {}
            Err(e) if f.has_log_entry() => return Err(Error::Transform(e.to_string())),
            Err(e) => return Err(e),
        }
        f.ln_abs_at_log(log_x).map_err(|e| Error::Transform(e.to_string()))
    }
}

/// `h(τ + log k) − h(τ) − (log k − e^τ)`.
pub fn krull_residual<T: Real>(t: &TransformedGenerator<T>, tau: T, k: usize) -> Result<T> {
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    let lnk = T::from_usize(k).unwrap().ln();
    Ok(t.eval(tau + lnk)? - t.eval(tau)? - (lnk - tau.exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Concave,
    Convex,
    Neither,
}

#[derive(Debug, Clone)]
pub struct ConcavityReport<T> {
    pub verdict: Curvature,
    /// `(τ, h(τ−δ) − 2h(τ) + h(τ+δ))` per node.
    pub nodes: Vec<(T, T)>,
    pub min_second_difference: T,
    pub max_second_difference: T,
    pub delta: T,
}

impl<T: Real> ConcavityReport<T> {
    /// The second difference closest to contradicting the verdict.
    pub fn worst_second_difference(&self) -> T {
        match self.verdict {
            Curvature::Convex => self.min_second_difference,
            _ => self.max_second_difference,
        }
    }
}

/// Central second differences on `points` equispaced nodes of `[lo, hi]`.
pub fn concavity_probe<T: Real>(
    t: &TransformedGenerator<T>,
    lo: T,
    hi: T,
    points: usize,
    delta: T,
) -> Result<ConcavityReport<T>> {
    if !(delta > T::zero()) || points < 1 || !(lo <= hi) {
        return Err(Error::Parameter("concavity probe needs delta > 0, points >= 1 and lo <= hi".into()));
    }
    let two = cst::<T>(2.0);
    let mut nodes = Vec::with_capacity(points);
    for i in 0..points {
        let tau = if points == 1 {
            lo
        } else {
            lo + (hi - lo) * T::from_usize(i).unwrap() / T::from_usize(points - 1).unwrap()
        };
        let d2 = t.eval(tau - delta)? - two * t.eval(tau)? + t.eval(tau + delta)?;
        nodes.push((tau, d2));
    }
    let tol = cst::<T>(1e-7) * delta * delta;
    let min = nodes.iter().fold(T::infinity(), |m, n| m.min(n.1));
    let max = nodes.iter().fold(T::neg_infinity(), |m, n| m.max(n.1));
    let verdict = if max <= tol && min < -tol {
        Curvature::Concave
    } else if min >= -tol && max > tol {
        Curvature::Convex
    } else {
        Curvature::Neither
    };
    Ok(ConcavityReport { verdict, nodes, min_second_difference: min, max_second_difference: max, delta })
}

/// `φ(x) = (f(x) − c(x−1))/(x−1)²` sampled towards 1⁺.
#[derive(Debug, Clone)]
pub struct BoundednessProbe<T> {
    pub c: T,
    pub window_r: T,
    /// `(x, φ(x))`, with `x` decreasing to 1.
    pub samples: Vec<(T, T)>,
    pub bounded: bool,
    /// Limit of φ at 1⁺ when the last samples settle.
    pub tail: Option<T>,
}

const PHI_DECADES: i32 = 6;

fn phi<T: Real>(f: &Generator<T>, c: T, x: T) -> Result<T> {
    let t = x - T::one();
    Ok((f.eval(x)? - c * t) / (t * t))
}

pub fn phi_probe<T: Real>(f: &Generator<T>, c: T, window_r: T, samples: usize) -> Result<BoundednessProbe<T>> {
    if !(window_r > T::zero()) || samples < 10 {
        return Err(Error::Parameter("phi probe needs window_r > 0 and at least 10 samples".into()));
    }
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let e = -f64::from(PHI_DECADES) * i as f64 / (samples - 1) as f64;
        let x = T::one() + window_r * cst(10f64.powf(e));
        let v = phi(f, c, x).map_err(|e| Error::Evaluation(format!("phi probe: {e}")))?;
        if !v.is_finite() {
            return Err(Error::Evaluation(format!("phi is not finite at {}", to_f64(x))));
        }
        out.push((x, v));
    }
    let mut mags: Vec<f64> = out.iter().map(|s| to_f64(s.1.abs())).collect();
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    let last_decade = (samples - 1) / PHI_DECADES as usize + 1;
    let tail_max = out[samples - last_decade..].iter().fold(0.0, |m: f64, s| m.max(to_f64(s.1.abs())));
    let tail_vals: Vec<T> = out[samples - 3..].iter().map(|s| s.1).collect();
    Ok(BoundednessProbe {
        c,
        window_r,
        bounded: tail_max <= 10.0 * median,
        tail: stabilized(&tail_vals),
        samples: out,
    })
}

/// `κ(x) = k·x^(−1/k)·((x^(1/k) − 1)/(x − 1))²`, via the telescoped
/// `k / (y·(1 + y + … + y^(k−1))²)`, `y = x^(1/k)`.
pub fn contraction_factor<T: Real>(x: T, k: usize) -> Result<T> {
    if !(x.is_finite() && x > T::one()) {
        return Err(Error::domain(to_f64(x), "contraction factor needs x > 1"));
    }
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    let kf = T::from_usize(k).unwrap();
    let y = x.powf(kf.recip());
    let mut s = T::zero();
    let mut term = T::one();
    for _ in 0..k {
        s = s + term;
        term = term * y;
    }
    Ok(kf / (y * s * s))
}

#[derive(Debug, Clone)]
pub struct PsiReport<T> {
    /// max over samples of `|ψ(x) − κ(x)·ψ(x^(1/k))| / max(ψ(x), 1)`.
    pub max_identity_residual: T,
    pub sup_kappa: T,
    /// max ψ over the samples; 0 means the generators agree to second order.
    pub max_psi: T,
    pub samples: usize,
}

/// Checks the recursion `ψ(x) = κ(x)·ψ(x^(1/k))` for `ψ = |φ₁ − φ₂|` on
/// `(1, 1 + window_r]`.
pub fn psi_contraction_check<T: Real>(
    f1: &Generator<T>,
    f2: &Generator<T>,
    c: T,
    k: usize,
    window_r: T,
    samples: usize,
) -> Result<PsiReport<T>> {
    if !(window_r > T::zero()) || samples < 2 {
        return Err(Error::Parameter("psi check needs window_r > 0 and at least 2 samples".into()));
    }
    for f in [f1, f2] {
        for x in [1.5, 2.0, 7.0] {
            let x = cst::<T>(x);
            let r = reflexivity_residual(f, x, k)? / f.value(x)?.abs();
            if r.abs() > cst(1e-10) {
                return Err(Error::Parameter(format!(
                    "{} does not satisfy the reflexivity equation for k = {k} (relative residual {} at {})",
                    f.label(),
                    to_f64(r),
                    to_f64(x)
                )));
            }
        }
    }
    let kf = T::from_usize(k).unwrap();
    let psi = |x: T| -> Result<T> { Ok((phi(f1, c, x)? - phi(f2, c, x)?).abs()) };
    let mut max_res = T::zero();
    let mut sup_kappa = T::zero();
    let mut max_psi = T::zero();
    for i in 0..samples {
        let e = -f64::from(PHI_DECADES) * i as f64 / (samples - 1) as f64;
        let x = T::one() + window_r * cst(10f64.powf(e));
        let kappa = contraction_factor(x, k)?;
        let px = psi(x)?;
        let py = psi(x.powf(kf.recip()))?;
        max_res = max_res.max((px - kappa * py).abs() / px.max(T::one()));
        sup_kappa = sup_kappa.max(kappa);
        max_psi = max_psi.max(px);
    }
    Ok(PsiReport { max_identity_residual: max_res, sup_kappa, max_psi, samples })
}

/// `h(mean of points) − mean of h(points)`.
pub fn jensen_residual<T: Real, H: Fn(T) -> T + ?Sized>(h: &H, points: &[T]) -> Result<T> {
    if points.len() < 2 {
        return Err(Error::Arity { got: points.len() });
    }
    let n = T::from_usize(points.len()).unwrap();
    let mean = points.iter().fold(T::zero(), |a, &p| a + p) / n;
    let avg = points.iter().fold(T::zero(), |a, &p| a + h(p)) / n;
    let v = h(mean) - avg;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation("jensen residual is not finite".into()))
    }
}
