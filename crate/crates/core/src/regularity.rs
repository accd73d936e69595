//! Exponent algebra: Brennan ranges, admissible `p` and `q` intervals,
//! Hölder conjugates, and the α-regularity probe.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcmap::QcMap;
use crate::quad::{power_exponent_probe, IntegralResult, QuadratureRule};

/// Largest exponent for which the conformal Brennan integrability is proved.
pub const PROVED_BETA0: f64 = 3.752;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegularityError {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("empty {what} interval: lower endpoint {lo} is not below upper endpoint {hi}")]
    EmptyInterval { what: &'static str, lo: f64, hi: f64 },
    #[error("{what}: {value} lies outside the admissible interval {interval}")]
    OutsideInterval {
        what: &'static str,
        value: f64,
        interval: Interval,
    },
    #[error("invalid exponent context: {0}")]
    InvalidContext(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Brennan integrability up to the proved exponent `β₀`.
    Proved,
    /// Brennan integrability on the full conjectured range.
    Conjectured,
}

impl Mode {
    /// The eigenvalue-bound range that governs `p` in this mode.
    pub fn eigenvalue_theorem(self) -> Theorem {
        match self {
            Mode::Proved => Theorem::EigenvalueProved,
            Mode::Conjectured => Theorem::EigenvalueConjectured,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Proved => "proved",
            Mode::Conjectured => "conjectured",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = RegularityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proved" => Ok(Mode::Proved),
            "conjectured" => Ok(Mode::Conjectured),
            other => Err(RegularityError::InvalidContext(format!(
                "unknown mode `{other}` (expected proved or conjectured)"
            ))),
        }
    }
}

/// Which result's `p` range to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Boundedness of the inverse composition operator `L¹_p(Ω) → L¹_q(𝔻)`.
    CompositionOperator,
    /// The `(s, p)` Poincaré–Sobolev constant on an α-regular domain.
    GeneralPoincare,
    /// The eigenvalue bound with the proved Brennan exponent.
    EigenvalueProved,
    /// The eigenvalue bound assuming the full Brennan conjecture.
    EigenvalueConjectured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentContext {
    /// Distortion coefficient `K ≥ 1`.
    pub k: f64,
    /// Regularity exponent `α > 2`.
    pub alpha: f64,
    pub beta0: f64,
    pub mode: Mode,
}

impl ExponentContext {
    pub fn new(k: f64, alpha: f64) -> Result<Self, RegularityError> {
        let ctx = Self {
            k,
            alpha,
            beta0: PROVED_BETA0,
            mode: Mode::Proved,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn with_beta0(mut self, beta0: f64) -> Result<Self, RegularityError> {
        self.beta0 = beta0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), RegularityError> {
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return Err(RegularityError::InvalidContext(format!("K must be >= 1, got {}", self.k)));
        }
        if !(self.alpha > 2.0) {
            return Err(RegularityError::InvalidContext(format!(
                "alpha must be > 2, got {}",
                self.alpha
            )));
        }
        if !(self.beta0 > 2.0 && self.beta0 <= 4.0) {
            return Err(RegularityError::InvalidContext(format!(
                "beta0 must lie in (2, 4], got {}",
                self.beta0
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// `[lo, hi)`.
    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        if self.lo_closed && self.hi_closed {
            !(self.lo <= self.hi)
        } else {
            !(self.lo < self.hi)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

fn nonempty(what: &'static str, iv: Interval) -> Result<Interval, RegularityError> {
    if iv.is_empty() {
        Err(RegularityError::EmptyInterval {
            what,
            lo: iv.lo,
            hi: iv.hi,
        })
    } else {
        Ok(iv)
    }
}

/// Range of β for which `∫|Dφ|^β < ∞` holds for K-quasiconformal maps onto the disc.
pub fn brennan_range(ctx: &ExponentContext) -> Interval {
    let k = ctx.k;
    let lo = 4.0 * k / (2.0 * k + 1.0);
    let hi = match ctx.mode {
        Mode::Proved => 2.0 * k * ctx.beta0 / ((k - 1.0) * ctx.beta0 + 2.0),
        Mode::Conjectured => 4.0 * k / (2.0 * k - 1.0),
    };
    Interval::open(lo, hi)
}

/// `q = pβ/(p+β-2)`, the target exponent of the composition operator for `p > 2`.
pub fn q_of_p_beta(p: f64, beta: f64) -> Result<f64, RegularityError> {
    if !(p > 2.0) {
        return Err(RegularityError::InvalidExponent(format!("need p > 2, got {p}")));
    }
    if !(beta > 0.0) {
        return Err(RegularityError::InvalidExponent(format!("need beta > 0, got {beta}")));
    }
    Ok(p * beta / (p + beta - 2.0))
}

pub fn holder_conjugate(p: f64) -> Result<f64, RegularityError> {
    if !(p > 1.0) {
        return Err(RegularityError::InvalidExponent(format!("need p > 1, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// Open interval of admissible `p` for the named result.
pub fn admissible_p(ctx: &ExponentContext, theorem: Theorem) -> Result<Interval, RegularityError> {
    let (k, a, b) = (ctx.k, ctx.alpha, ctx.beta0);
    let floor = 4.0 * k / (2.0 * k + 1.0);
    let lo = match theorem {
        Theorem::CompositionOperator => 2.0 * k * b / ((k + 1.0) * b - 2.0),
        Theorem::GeneralPoincare => {
            let denom = (k + 2.0) * a * b - 4.0 * (a + b - 2.0);
            floor.max(2.0 * k * a * b / denom)
        }
        Theorem::EigenvalueProved => {
            floor.max((2.0 * (k - 1.0) * a * b + 4.0 * (a + b - 2.0)) / (k * a * b))
        }
        Theorem::EigenvalueConjectured => floor.max((a * (2.0 * k - 1.0) + 2.0) / (a * k)),
    };
    nonempty("p", Interval::open(lo, 2.0))
}

/// Checks `p` against [`admissible_p`].
pub fn require_admissible(ctx: &ExponentContext, theorem: Theorem, p: f64) -> Result<Interval, RegularityError> {
    let iv = admissible_p(ctx, theorem)?;
    if iv.contains(p) {
        Ok(iv)
    } else {
        Err(RegularityError::OutsideInterval {
            what: "p",
            value: p,
            interval: iv,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QInterval {
    /// `[1, (2β₀-4)p / (2Kβ₀ - ((K-1)β₀+2)p)]`
    pub exact: Interval,
    /// `[1, 2p/(4K-(2K-1)p))`, the range the infimum is taken over.
    pub weak: Interval,
}

pub fn q_interval(ctx: &ExponentContext, p: f64) -> Result<QInterval, RegularityError> {
    require_admissible(ctx, Theorem::CompositionOperator, p)?;
    let (k, b) = (ctx.k, ctx.beta0);
    let exact_den = 2.0 * k * b - ((k - 1.0) * b + 2.0) * p;
    let weak_den = 4.0 * k - (2.0 * k - 1.0) * p;
    if !(exact_den > 0.0 && weak_den > 0.0) {
        return Err(RegularityError::EmptyInterval {
            what: "q",
            lo: 1.0,
            hi: f64::NAN,
        });
    }
    let exact = Interval::closed(1.0, (2.0 * b - 4.0) * p / exact_den);
    let weak = Interval::closed_open(1.0, 2.0 * p / weak_den);
    Ok(QInterval {
        exact: nonempty("q", exact)?,
        weak: nonempty("q", weak)?,
    })
}

/// Weak interval `[1, 2p/(4K-(2K-1)p))` without the composition-operator range check.
pub fn weak_q_interval(k: f64, p: f64) -> Result<Interval, RegularityError> {
    let den = 4.0 * k - (2.0 * k - 1.0) * p;
    if !(den > 0.0) {
        return Err(RegularityError::EmptyInterval {
            what: "q",
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    nonempty("q", Interval::closed_open(1.0, 2.0 * p / den))
}

/// Upper end of the admissible `r` for the weighted Poincaré–Sobolev inequality.
pub fn r_max(ctx: &ExponentContext, p: f64) -> Result<f64, RegularityError> {
    if !(p < 2.0) {
        return Err(RegularityError::InvalidExponent(format!("need p < 2, got {p}")));
    }
    let b = ctx.beta0;
    Ok((b - 2.0) / (ctx.k * b) * 2.0 * p / (2.0 - p))
}

/// Unweighted exponent `s = r(α-2)/α` reached from a weighted `L_r` norm.
pub fn s_of_r(alpha: f64, r: f64) -> Result<f64, RegularityError> {
    if !(alpha > 2.0) {
        return Err(RegularityError::InvalidExponent(format!("need alpha > 2, got {alpha}")));
    }
    let r_min = alpha / (alpha - 2.0);
    if !(r >= r_min * (1.0 - 1e-12)) {
        return Err(RegularityError::InvalidExponent(format!(
            "need r >= alpha/(alpha-2) = {r_min}, got {r}"
        )));
    }
    Ok((r * (alpha - 2.0) / alpha).max(1.0))
}

/// Integrates `J^(α/2)` of the map over its model domain; `Converged`
/// certifies α-regularity at this α.
pub fn alpha_regularity(
    map: &QcMap,
    alpha: f64,
    rule: &QuadratureRule,
) -> Result<IntegralResult, RegularityError> {
    if !(alpha > 2.0) {
        return Err(RegularityError::InvalidExponent(format!("need alpha > 2, got {alpha}")));
    }
    let rule = rule.for_domain(map.source_domain());
    Ok(power_exponent_probe(
        |z| map.wirtinger(z).map(|d| d.jac).unwrap_or(f64::NAN),
        0.5 * alpha,
        &map.singular_points(),
        &rule,
    ))
}

/// A-priori cap on α from the local integrability of quasiconformal Jacobians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum AlphaCap {
    Finite(f64),
    /// Conformal maps (`K = 1`) impose no cap.
    Infinite,
}

/// `2K/(K-1)`: `|J|^(α/2)` can be locally integrable only for `α/2 < K/(K-1)`.
pub fn astala_alpha_cap(k: f64) -> Result<AlphaCap, RegularityError> {
    if !(k >= 1.0) {
        return Err(RegularityError::InvalidExponent(format!("need K >= 1, got {k}")));
    }
    if k == 1.0 {
        Ok(AlphaCap::Infinite)
    } else {
        Ok(AlphaCap::Finite(2.0 * k / (k - 1.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcmap::SourceDomain;
    use crate::quad::Status;
    use std::f64::consts::PI;

    fn ctx(k: f64, alpha: f64) -> ExponentContext {
        ExponentContext::new(k, alpha).unwrap()
    }

    fn near(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn brennan_examples() {
        let r = brennan_range(&ctx(1.0, 4.0));
        near(r.lo, 4.0 / 3.0, 1e-15);
        near(r.hi, 3.752, 1e-12);
        let r = brennan_range(&ctx(1.0, 4.0).with_mode(Mode::Conjectured));
        near(r.hi, 4.0, 1e-15);
        let r = brennan_range(&ctx(2.0, 4.0));
        near(r.lo, 1.6, 1e-15);
        near(r.hi, 4.0 * 3.752 / 5.752, 1e-12);
        near(r.hi, 2.609179, 1e-6);
    }

    #[test]
    fn q_of_p_beta_examples() {
        near(q_of_p_beta(4.0, 2.0).unwrap(), 2.0, 1e-15);
        near(q_of_p_beta(3.0, 4.0 / 3.0).unwrap(), 12.0 / 7.0, 1e-14);
        near(q_of_p_beta(10.0, 3.752).unwrap(), 37.52 / 11.752, 1e-14);
        assert!(q_of_p_beta(2.0, 3.0).is_err());
    }

    #[test]
    fn holder_examples() {
        assert_eq!(holder_conjugate(2.0).unwrap(), 2.0);
        near(holder_conjugate(4.0).unwrap(), 4.0 / 3.0, 1e-15);
        near(holder_conjugate(1.9).unwrap(), 1.9 / 0.9, 1e-15);
        assert!(holder_conjugate(1.0).is_err());
    }

    #[test]
    fn admissible_p_examples() {
        let c = ctx(1.0, 4.0);
        let iv = admissible_p(&c, Theorem::CompositionOperator).unwrap();
        near(iv.lo, 7.504 / 5.504, 1e-14);
        assert_eq!(iv.hi, 2.0);
        assert!(!iv.lo_closed && !iv.hi_closed);
        near(admissible_p(&c, Theorem::EigenvalueProved).unwrap().lo, 23.008 / 15.008, 1e-14);
        near(admissible_p(&c, Theorem::EigenvalueConjectured).unwrap().lo, 1.5, 1e-15);
    }

    #[test]
    fn general_poincare_range_is_bounded_below_by_floor() {
        let c = ctx(1.0, 100.0);
        let iv = admissible_p(&c, Theorem::GeneralPoincare).unwrap();
        assert!(iv.lo >= 4.0 / 3.0);
    }

    #[test]
    fn p_ranges_stay_nonempty_as_alpha_approaches_two() {
        // every lower endpoint < 2 reduces to (alpha-2)(beta0-2) > 0
        let c = ctx(3.0, 2.01);
        for t in [
            Theorem::CompositionOperator,
            Theorem::GeneralPoincare,
            Theorem::EigenvalueProved,
            Theorem::EigenvalueConjectured,
        ] {
            let iv = admissible_p(&c, t).unwrap();
            assert!(iv.lo < 2.0);
        }
        assert!(admissible_p(&c, Theorem::EigenvalueProved).unwrap().lo > 1.99);
    }

    #[test]
    fn q_interval_examples() {
        let c = ctx(1.0, 4.0);
        let q = q_interval(&c, 1.9).unwrap();
        near(q.weak.hi, 3.8 / 2.1, 1e-14);
        near(q.exact.hi, 6.6576 / 3.704, 1e-12);
        assert!(q.exact.hi < q.weak.hi);
        assert!(q.exact.hi_closed && !q.weak.hi_closed);
        let q = q_interval(&c, 2.0 - 1e-12).unwrap();
        near(q.weak.hi, 2.0, 1e-9);
        assert!(q_interval(&c, 1.2).is_err());
    }

    #[test]
    fn r_max_examples() {
        let c = ctx(1.0, 4.0);
        near(r_max(&c, 1.9).unwrap(), 1.752 / 3.752 * 38.0, 1e-10);
        let c4 = ctx(1.0, 4.0).with_beta0(4.0).unwrap();
        near(r_max(&c4, 1.0).unwrap(), 1.0, 1e-15);
        let c2 = ctx(2.0, 4.0);
        near(r_max(&c2, 1.9).unwrap(), 0.5 * r_max(&c, 1.9).unwrap(), 1e-12);
        assert!(r_max(&c, 2.0).is_err());
    }

    #[test]
    fn s_of_r_examples() {
        assert_eq!(s_of_r(4.0, 2.0).unwrap(), 1.0);
        assert_eq!(s_of_r(4.0, 4.0).unwrap(), 2.0);
        assert_eq!(s_of_r(6.0, 3.0).unwrap(), 2.0);
        assert!(s_of_r(4.0, 1.5).is_err());
        for alpha in [2.1, 2.7, 3.3, 5.0, 17.0] {
            assert_eq!(s_of_r(alpha, alpha / (alpha - 2.0)).unwrap(), 1.0);
        }
    }

    #[test]
    fn astala_examples() {
        assert_eq!(astala_alpha_cap(2.0).unwrap(), AlphaCap::Finite(4.0));
        assert_eq!(astala_alpha_cap(3.0).unwrap(), AlphaCap::Finite(3.0));
        assert_eq!(astala_alpha_cap(1.0).unwrap(), AlphaCap::Infinite);
    }

    #[test]
    fn context_validation() {
        assert!(ExponentContext::new(0.5, 4.0).is_err());
        assert!(ExponentContext::new(1.0, 2.0).is_err());
        assert!(ctx(1.0, 4.0).with_beta0(4.5).is_err());
        assert!(ctx(1.0, 4.0).with_beta0(2.0).is_err());
    }

    #[test]
    fn alpha_regularity_examples() {
        let rule = QuadratureRule::new(SourceDomain::UnitDisc);
        let r = alpha_regularity(&QcMap::identity(), 10.0, &rule).unwrap();
        assert_eq!(r.status, Status::Converged);
        near(r.value, PI, 1e-10);
        let r = alpha_regularity(&QcMap::ellipse(2.0, 1.0).unwrap(), 4.0, &rule).unwrap();
        assert_eq!(r.status, Status::Converged);
        near(r.value, 9.0 * PI, 1e-9);
        // ∫_Q (2|z|²)² = 4 · 112 a⁶/45 with a⁶ = 1/8
        let r = alpha_regularity(&QcMap::star(1.0).unwrap(), 4.0, &rule).unwrap();
        assert_eq!(r.status, Status::Converged);
        near(r.value, 56.0 / 45.0, 1e-9);
        assert!(alpha_regularity(&QcMap::identity(), 2.0, &rule).is_err());
    }

    #[test]
    fn mode_parses() {
        assert_eq!("Proved".parse::<Mode>().unwrap(), Mode::Proved);
        assert_eq!("conjectured".parse::<Mode>().unwrap(), Mode::Conjectured);
        assert!("maybe".parse::<Mode>().is_err());
    }
}
