//! The constant chain from the disc Poincaré–Sobolev constant to the
//! eigenvalue lower bound, with closed forms for the built-in families.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::qcmap::{MapSpec, QcMap, QcMapError, SourceDomain};
use crate::quad::{power_of, IntegralResult, Integrator, QuadratureRule, SampledField, Status};
use crate::regularity::{
    self, admissible_p, require_admissible, ExponentContext, Interval, Mode, RegularityError, Theorem,
};

pub mod classical;
mod closed_form;
pub mod search;

pub use classical::{ent_bound, payne_weinberger, pi_p, polya_upper};
pub use closed_form::{cardioid_closed_form, ellipse_closed_form, star_closed_form};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("disc constant undefined at r={r}, q={q}: d = 1/q - 1/r = {d} must lie in (0, 1/2)")]
    OutOfValidity { r: f64, q: f64, d: f64 },
    #[error("{factor} integral diverges")]
    DivergentIntegral { factor: &'static str },
    #[error("no admissible q in {interval} yields a finite {what}")]
    EmptyFeasibleSet { what: &'static str, interval: Interval },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Regularity(#[from] RegularityError),
    #[error(transparent)]
    Map(#[from] QcMapError),
}

/// Estimate of the disc Poincaré–Sobolev constant `B_{r,q}(𝔻)`:
/// `(2/π^d)·((1-d)/(1/2-d))^(1-d)` with `d = 1/q - 1/r`.
pub fn disc_poincare_constant(r: f64, q: f64) -> Result<f64, BoundsError> {
    Ok(log_disc_constant(r, q)?.exp())
}

fn log_disc_constant(r: f64, q: f64) -> Result<f64, BoundsError> {
    if !(q >= 1.0 && r.is_finite() && r > 0.0) {
        return Err(BoundsError::InvalidArgument(format!("need q >= 1 and finite r > 0, got r={r}, q={q}")));
    }
    let d = 1.0 / q - 1.0 / r;
    if !(d > 0.0 && d < 0.5) {
        return Err(BoundsError::OutOfValidity { r, q, d });
    }
    Ok(2f64.ln() - d * PI.ln() + (1.0 - d) * ((1.0 - d) / (0.5 - d)).ln())
}

fn rule_for(map: &QcMap, rule: &QuadratureRule) -> Result<QuadratureRule, BoundsError> {
    let rule = rule.for_domain(map.source_domain());
    rule.validate().map_err(BoundsError::InvalidArgument)?;
    Ok(rule)
}

/// `(∫ (|Dw|^p / J)^(q/(p-q)))^((p-q)/(pq))` over the model domain.
pub fn composition_norm_raw(
    map: &QcMap,
    p: f64,
    q: f64,
    rule: &QuadratureRule,
) -> Result<IntegralResult, BoundsError> {
    if !(q >= 1.0 && q < p) {
        return Err(BoundsError::InvalidArgument(format!("need 1 <= q < p, got p={p}, q={q}")));
    }
    let rule = rule_for(map, rule)?;
    let integrator = Integrator::new(&rule, &map.singular_points());
    let failure = RefCell::new(None);
    let field = integrator.sample(|z| match map.wirtinger(z) {
        Ok(d) => d.opnorm.powf(p) / d.jac,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    let e = q / (p - q);
    let raw = integrator.integrate_sampled(&field, |v| power_of(v, e));
    Ok(IntegralResult {
        value: raw_power(raw.value, (p - q) / (p * q)),
        error_estimate: raw.error_estimate * (p - q) / (p * q) * raw_power(raw.value, (p - q) / (p * q) - 1.0),
        status: raw.status,
    })
}

fn raw_power(v: f64, e: f64) -> f64 {
    if v.is_finite() {
        (e * v.ln()).exp()
    } else {
        f64::INFINITY
    }
}

/// A positive factor together with the status of the integral behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factor {
    pub value: f64,
    pub status: Status,
}

/// Wirtinger data of a map sampled once on the quadrature nodes, so that the
/// q-dependent factors can be re-integrated cheaply.
pub struct BoundProblem<'a> {
    map: &'a QcMap,
    ctx: ExponentContext,
    p: f64,
    integrator: Integrator,
    opnorm: SampledField,
    jac: SampledField,
}

impl<'a> BoundProblem<'a> {
    pub fn new(map: &'a QcMap, p: f64, ctx: ExponentContext, rule: &QuadratureRule) -> Result<Self, BoundsError> {
        ctx.validate()?;
        if !(p > 1.0 && p < 2.0) {
            return Err(BoundsError::InvalidArgument(format!("need 1 < p < 2, got {p}")));
        }
        let rule = rule_for(map, rule)?;
        let integrator = Integrator::new(&rule, &map.singular_points());
        let failure = RefCell::new(None);
        let sample = |pick: fn(&crate::qcmap::WirtingerData) -> f64| {
            integrator.sample(|z| match map.wirtinger(z) {
                Ok(d) => pick(&d),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            })
        };
        let opnorm = sample(|d| d.opnorm);
        let jac = sample(|d| d.jac);
        if let Some(e) = failure.into_inner() {
            return Err(e.into());
        }
        Ok(Self {
            map,
            ctx,
            p,
            integrator,
            opnorm,
            jac,
        })
    }

    pub fn map(&self) -> &QcMap {
        self.map
    }

    pub fn context(&self) -> &ExponentContext {
        &self.ctx
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `∫ |Dw|^((p-2)q/(p-q))`.
    pub fn opnorm_integral(&self, q: f64) -> IntegralResult {
        let p = self.p;
        let e = (p - 2.0) * q / (p - q);
        self.integrator.integrate_sampled(&self.opnorm, |v| power_of(v, e))
    }

    /// `∫ J^(α/2)`.
    pub fn jac_integral(&self) -> IntegralResult {
        let e = 0.5 * self.ctx.alpha;
        self.integrator.integrate_sampled(&self.jac, |v| power_of(v, e))
    }

    fn log_k_tilde(&self, q: f64) -> Result<(f64, Status), BoundsError> {
        let p = self.p;
        if !(q >= 1.0 && q < p) {
            return Err(BoundsError::InvalidArgument(format!("need 1 <= q < p, got p={p}, q={q}")));
        }
        let integral = self.opnorm_integral(q);
        if integral.status == Status::Diverged || !(integral.value > 0.0 && integral.value.is_finite()) {
            return Err(BoundsError::DivergentIntegral { factor: "composition norm" });
        }
        Ok((self.ctx.k.ln() / p + (p - q) / (p * q) * integral.value.ln(), integral.status))
    }

    /// `K̃_{p,q} = K^(1/p) (∫ |Dw|^((p-2)q/(p-q)))^((p-q)/(pq))`.
    pub fn k_tilde(&self, q: f64) -> Result<Factor, BoundsError> {
        let (v, status) = self.log_k_tilde(q)?;
        Ok(Factor { value: v.exp(), status })
    }

    fn log_jac(&self) -> Result<(f64, Status), BoundsError> {
        let integral = self.jac_integral();
        if integral.status == Status::Diverged || !(integral.value > 0.0 && integral.value.is_finite()) {
            return Err(BoundsError::DivergentIntegral { factor: "jacobian" });
        }
        Ok((integral.value.ln(), integral.status))
    }

    /// `(∫ J^(α/2))^(2/α)`.
    pub fn jac_factor(&self) -> Result<Factor, BoundsError> {
        let (v, status) = self.log_jac()?;
        Ok(Factor {
            value: (2.0 / self.ctx.alpha * v).exp(),
            status,
        })
    }

    /// `(∫ J^(α/2))^((2/α)(1/s))`.
    pub fn embedding_factor(&self, s: f64) -> Result<Factor, BoundsError> {
        if !(s >= 1.0) {
            return Err(BoundsError::InvalidArgument(format!("need s >= 1, got {s}")));
        }
        let (v, status) = self.log_jac()?;
        Ok(Factor {
            value: (2.0 / (self.ctx.alpha * s) * v).exp(),
            status,
        })
    }

    /// `ln(B_{r,q}·K̃_{p,q}) + jac_exp·ln ∫J^(α/2)` at one `q`.
    fn log_product(&self, q: f64, r: f64, jac_exp: f64) -> Result<f64, BoundsError> {
        let b = log_disc_constant(r, q)?;
        let (kt, _) = self.log_k_tilde(q)?;
        let jac = if jac_exp == 0.0 { 0.0 } else { jac_exp * self.log_jac()?.0 };
        Ok(b + kt + jac)
    }

    /// The eigenvalue objective `B^p_{αp/(α-2),q} · K̃^p_{p,q} · (∫J^(α/2))^(2/α)` at one `q`.
    pub fn pp_objective(&self, q: f64) -> Result<f64, BoundsError> {
        let (p, a) = (self.p, self.ctx.alpha);
        Ok((p * self.log_product(q, a * p / (a - 2.0), 2.0 / (a * p))?).exp())
    }

    /// Weak q-interval `[1, 2p/(4K-(2K-1)p))` the infimum runs over.
    pub fn q_range(&self) -> Result<Interval, BoundsError> {
        Ok(regularity::weak_q_interval(self.ctx.k, self.p)?)
    }

    fn infimum(&self, r: f64, jac_exp: f64, scale: f64) -> Result<search::Minimum, BoundsError> {
        let iv = self.q_range()?;
        let mut divergent = false;
        let found = search::minimize(iv.lo, iv.hi, !iv.hi_closed, |q| match self.log_product(q, r, jac_exp) {
            Ok(v) => Some(scale * v),
            Err(BoundsError::DivergentIntegral { .. }) => {
                divergent = true;
                None
            }
            Err(_) => None,
        });
        match found {
            Some(m) => Ok(search::Minimum {
                arg: m.arg,
                value: m.value.exp(),
            }),
            None if divergent => Err(BoundsError::DivergentIntegral { factor: "composition norm" }),
            None => Err(BoundsError::EmptyFeasibleSet {
                what: "disc constant",
                interval: iv,
            }),
        }
    }

    /// Minimizes [`pp_objective`](Self::pp_objective) over the weak q-interval.
    pub fn minimize_pp(&self) -> Result<search::Minimum, BoundsError> {
        let (p, a) = (self.p, self.ctx.alpha);
        self.log_jac()?;
        self.infimum(a * p / (a - 2.0), 2.0 / (a * p), p)
    }
}

fn check_distortion(map: &QcMap, ctx: &ExponentContext) -> Result<(), BoundsError> {
    let k = map.distortion()?;
    if k > ctx.k * (1.0 + 1e-9) {
        return Err(BoundsError::InvalidArgument(format!(
            "context K = {} is below the map's distortion {k}",
            ctx.k
        )));
    }
    Ok(())
}

/// `K̃_{p,q}` for `p < 2`, `1 ≤ q < p`.
pub fn k_tilde(map: &QcMap, p: f64, q: f64, k: f64, rule: &QuadratureRule) -> Result<f64, BoundsError> {
    let ctx = ExponentContext::new(k, 4.0)?;
    Ok(BoundProblem::new(map, p, ctx, rule)?.k_tilde(q)?.value)
}

/// `(∫ J^(α/2))^(2/α)`.
pub fn jac_factor(map: &QcMap, alpha: f64, rule: &QuadratureRule) -> Result<f64, BoundsError> {
    embedding_factor(map, alpha, 1.0, rule)
}

/// `(∫ J^(α/2))^((2/α)(1/s))`.
pub fn embedding_factor(map: &QcMap, alpha: f64, s: f64, rule: &QuadratureRule) -> Result<f64, BoundsError> {
    if !(alpha > 2.0) {
        return Err(BoundsError::InvalidArgument(format!("need alpha > 2, got {alpha}")));
    }
    if !(s >= 1.0) {
        return Err(BoundsError::InvalidArgument(format!("need s >= 1, got {s}")));
    }
    let rule = rule_for(map, rule)?;
    let integrator = Integrator::new(&rule, &map.singular_points());
    let failure = RefCell::new(None);
    let field = integrator.sample(|z| match map.wirtinger(z) {
        Ok(d) => d.jac,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    let integral = integrator.integrate_sampled(&field, |v| power_of(v, 0.5 * alpha));
    if integral.status == Status::Diverged || !(integral.value > 0.0 && integral.value.is_finite()) {
        return Err(BoundsError::DivergentIntegral { factor: "jacobian" });
    }
    Ok((2.0 / (alpha * s) * integral.value.ln()).exp())
}

/// `inf_q K̃_{p,q}·B_{r,q}(𝔻)` over the weak q-interval.
pub fn weighted_poincare_constant(
    map: &QcMap,
    p: f64,
    r: f64,
    rule: &QuadratureRule,
    ctx: &ExponentContext,
) -> Result<f64, BoundsError> {
    require_admissible(ctx, Theorem::CompositionOperator, p)?;
    let r_max = regularity::r_max(ctx, p)?;
    if !(r >= 1.0 && r <= r_max) {
        return Err(BoundsError::InvalidArgument(format!("need 1 <= r <= r_max = {r_max}, got {r}")));
    }
    check_distortion(map, ctx)?;
    let problem = BoundProblem::new(map, p, *ctx, rule)?;
    Ok(problem.infimum(r, 0.0, 1.0)?.value)
}

/// `inf_q B_{αs/(α-2),q}(𝔻)·K̃_{p,q}·(∫J^(α/2))^((2/α)(1/s))`.
pub fn general_poincare_constant(
    map: &QcMap,
    p: f64,
    s: f64,
    alpha: f64,
    ctx: &ExponentContext,
    rule: &QuadratureRule,
) -> Result<f64, BoundsError> {
    let ctx = ExponentContext { alpha, ..*ctx };
    require_admissible(&ctx, Theorem::GeneralPoincare, p)?;
    let s_max = (alpha - 2.0) / alpha * regularity::r_max(&ctx, p)?;
    if !(s >= 1.0 && s <= s_max) {
        return Err(BoundsError::InvalidArgument(format!("need 1 <= s <= {s_max}, got {s}")));
    }
    check_distortion(map, &ctx)?;
    let problem = BoundProblem::new(map, p, ctx, rule)?;
    problem.log_jac()?;
    Ok(problem.infimum(alpha * s / (alpha - 2.0), 2.0 / (alpha * s), 1.0)?.value)
}

/// Upper bound on `B^p_{p,p}(Ω)`, the reciprocal of the eigenvalue lower bound.
pub fn pp_constant(
    map: &QcMap,
    p: f64,
    alpha: f64,
    ctx: &ExponentContext,
    rule: &QuadratureRule,
) -> Result<f64, BoundsError> {
    Ok(eigenvalue_lower_bound(map, p, alpha, ctx, rule)?.bound_value)
}

/// The same bound arranged as `K·‖J‖_{α/2}·inf_q{B^p_{r,q}·‖|Dw|^(p-2)‖_{q/(p-q)}}`.
///
/// Algebraically equal to [`pp_constant`]; evaluated through explicit
/// Lebesgue norms so the two arrangements can be compared.
pub fn norm_arrangement_bound(
    map: &QcMap,
    p: f64,
    alpha: f64,
    ctx: &ExponentContext,
    rule: &QuadratureRule,
) -> Result<f64, BoundsError> {
    let ctx = ExponentContext { alpha, ..*ctx };
    require_admissible(&ctx, ctx.mode.eigenvalue_theorem(), p)?;
    check_distortion(map, &ctx)?;
    let problem = BoundProblem::new(map, p, ctx, rule)?;
    let jac = problem.jac_integral();
    if jac.status == Status::Diverged {
        return Err(BoundsError::DivergentIntegral { factor: "jacobian" });
    }
    let j_norm = jac.value.powf(2.0 / alpha);
    let r = alpha * p / (alpha - 2.0);
    let iv = problem.q_range()?;
    let m = search::minimize(iv.lo, iv.hi, !iv.hi_closed, |q| {
        let b = disc_poincare_constant(r, q).ok()?;
        let m = q / (p - q);
        let g = problem
            .integrator
            .integrate_sampled(&problem.opnorm, |v| power_of(power_of(v, p - 2.0), m));
        if g.status == Status::Diverged {
            return None;
        }
        Some(b.powf(p) * g.value.powf(1.0 / m))
    })
    .ok_or(BoundsError::EmptyFeasibleSet {
        what: "disc constant",
        interval: iv,
    })?;
    Ok(ctx.k * j_norm * m.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub map: MapSpec,
    pub p: f64,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub beta0: f64,
    pub mode: Mode,
    pub admissible_p: Interval,
    pub q_interval: Interval,
    /// `αp/(α-2)`, the first index of the disc constant.
    pub r: f64,
    pub q_star: f64,
    /// Estimate of `B_{r,q*}(𝔻)`, not raised to `p`.
    pub disc_constant: f64,
    /// `K̃_{p,q*}`, not raised to `p`.
    pub comp_norm: f64,
    pub comp_norm_status: Status,
    pub jac_integral: IntegralResult,
    pub jac_factor: f64,
    /// Upper bound on `1/μ_p`.
    pub bound_value: f64,
    pub mu_lower: f64,
    pub status: Status,
    pub source_domain: SourceDomain,
    /// The map's source is the centered square rather than the disc.
    pub square_source: bool,
}

/// Lower bound on the first nontrivial Neumann p-eigenvalue of the map's image.
pub fn eigenvalue_lower_bound(
    map: &QcMap,
    p: f64,
    alpha: f64,
    ctx: &ExponentContext,
    rule: &QuadratureRule,
) -> Result<BoundReport, BoundsError> {
    let ctx = ExponentContext { alpha, ..*ctx };
    ctx.validate()?;
    let admissible = require_admissible(&ctx, ctx.mode.eigenvalue_theorem(), p)?;
    check_distortion(map, &ctx)?;
    let problem = BoundProblem::new(map, p, ctx, rule)?;
    let jac_integral = problem.jac_integral();
    let jac = problem.jac_factor()?;
    let best = problem.minimize_pp()?;
    let q = best.arg;
    let r = alpha * p / (alpha - 2.0);
    let comp = problem.k_tilde(q)?;
    let bound_value = best.value;
    Ok(BoundReport {
        map: MapSpec::from(map),
        p,
        alpha,
        k: ctx.k,
        beta0: ctx.beta0,
        mode: ctx.mode,
        admissible_p: admissible,
        q_interval: problem.q_range()?,
        r,
        q_star: q,
        disc_constant: disc_poincare_constant(r, q)?,
        comp_norm: comp.value,
        comp_norm_status: comp.status,
        jac_integral,
        jac_factor: jac.value,
        bound_value,
        mu_lower: 1.0 / bound_value,
        status: comp.status.worst(jac.status),
        source_domain: map.source_domain(),
        square_source: map.source_domain() == SourceDomain::CenteredSquare,
    })
}

/// `admissible_p` for the eigenvalue bound in the context's mode.
pub fn eigenvalue_p_range(ctx: &ExponentContext) -> Result<Interval, BoundsError> {
    Ok(admissible_p(ctx, ctx.mode.eigenvalue_theorem())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc_rule() -> QuadratureRule {
        QuadratureRule::new(SourceDomain::UnitDisc)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn disc_constant_examples() {
        let expected = 2.0 / PI.powf(1.0 / 6.0) * 2.5f64.powf(5.0 / 6.0);
        assert!(rel(disc_poincare_constant(2.0, 1.5).unwrap(), expected) < 1e-14);
        assert!(matches!(
            disc_poincare_constant(2.0, 1.0),
            Err(BoundsError::OutOfValidity { .. })
        ));
        assert!(matches!(
            disc_poincare_constant(2.0, 2.0),
            Err(BoundsError::OutOfValidity { .. })
        ));
    }

    #[test]
    fn composition_norm_examples() {
        let r = composition_norm_raw(&QcMap::identity(), 2.0, 1.0, &disc_rule()).unwrap();
        assert!(rel(r.value, PI.sqrt()) < 1e-10);
        let r = composition_norm_raw(&QcMap::ellipse(2.0, 1.0).unwrap(), 2.0, 1.0, &disc_rule()).unwrap();
        assert!(rel(r.value, (3.0 * PI).sqrt()) < 1e-10);
        let r = composition_norm_raw(&QcMap::star(1.0).unwrap(), 2.0, 1.0, &disc_rule()).unwrap();
        assert!(rel(r.value, 2.0) < 1e-10);
    }

    #[test]
    fn k_tilde_examples() {
        let v = k_tilde(&QcMap::identity(), 1.9, 1.5, 1.0, &disc_rule()).unwrap();
        assert!(rel(v, PI.powf(0.4 / 2.85)) < 1e-10);
        let (a, b, p, q) = (2.0, 1.0, 1.9, 1.2);
        let k = 3.0;
        let v = k_tilde(&QcMap::ellipse(a, b).unwrap(), p, q, k, &disc_rule()).unwrap();
        let e = (p - 2.0) * q / (p - q);
        let expected = k.powf(1.0 / p) * (f64::powf(a + b, e) * PI).powf((p - q) / (p * q));
        assert!(rel(v, expected) < 1e-10);
    }

    #[test]
    fn jac_and_embedding_examples() {
        let id = QcMap::identity();
        let el = QcMap::ellipse(2.0, 1.0).unwrap();
        assert!(rel(jac_factor(&id, 4.0, &disc_rule()).unwrap(), PI.sqrt()) < 1e-10);
        assert!(rel(jac_factor(&el, 4.0, &disc_rule()).unwrap(), (9.0 * PI).sqrt()) < 1e-10);
        assert!(rel(embedding_factor(&id, 4.0, 2.0, &disc_rule()).unwrap(), PI.powf(0.25)) < 1e-10);
        assert!(rel(embedding_factor(&el, 4.0, 2.0, &disc_rule()).unwrap(), (9.0 * PI).powf(0.25)) < 1e-10);
    }

    #[test]
    fn report_identities() {
        let ctx = ExponentContext::new(1.0, 8.0).unwrap();
        let rep = eigenvalue_lower_bound(&QcMap::identity(), 1.9, 8.0, &ctx, &disc_rule()).unwrap();
        assert!((rep.mu_lower * rep.bound_value - 1.0).abs() < 1e-15);
        assert!(rep.q_interval.contains(rep.q_star));
        let product = rep.disc_constant.powf(rep.p) * rep.comp_norm.powf(rep.p) * rep.jac_factor;
        assert!(rel(product, rep.bound_value) < 1e-12);
        assert_eq!(rep.status, Status::Converged);
        assert!(!rep.square_source);
    }

    #[test]
    fn rejects_p_outside_admissible_range() {
        let ctx = ExponentContext::new(3.0, 4.0).unwrap();
        let map = QcMap::ellipse(2.0, 1.0).unwrap();
        assert!(matches!(
            eigenvalue_lower_bound(&map, 1.8, 4.0, &ctx, &disc_rule()),
            Err(BoundsError::Regularity(RegularityError::OutsideInterval { .. }))
        ));
    }

    #[test]
    fn rejects_context_below_distortion() {
        let ctx = ExponentContext::new(1.0, 8.0).unwrap();
        let map = QcMap::ellipse(2.0, 1.0).unwrap();
        assert!(matches!(
            eigenvalue_lower_bound(&map, 1.9, 8.0, &ctx, &disc_rule()),
            Err(BoundsError::InvalidArgument(_))
        ));
    }
}
