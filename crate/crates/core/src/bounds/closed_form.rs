//! Closed-form evaluations of the eigenvalue objective for the built-in maps.

use std::f64::consts::PI;

use super::{log_disc_constant, BoundsError};
use crate::qcmap::{Point2, SourceDomain};
use crate::quad::{power_of, Integrator, QuadratureRule, Status};

fn check_exponents(p: f64, alpha: f64, q: f64) -> Result<f64, BoundsError> {
    if !(p > 1.0 && p < 2.0 && alpha > 2.0 && q >= 1.0 && q < p) {
        return Err(BoundsError::InvalidArgument(format!(
            "need 1 < p < 2, alpha > 2, 1 <= q < p; got p={p}, alpha={alpha}, q={q}"
        )));
    }
    log_disc_constant(alpha * p / (alpha - 2.0), q)
}

/// `B^p·(A+B)^p·π^((2q+α(p-q))/(αq))` with `B = B_{αp/(α-2),q}(𝔻)`.
pub fn ellipse_closed_form(a: f64, b: f64, p: f64, alpha: f64, q: f64) -> Result<f64, BoundsError> {
    if !(b >= 0.0 && a > b) {
        return Err(BoundsError::InvalidArgument(format!("need A > B >= 0, got A={a}, B={b}")));
    }
    let log_b = check_exponents(p, alpha, q)?;
    let pi_exp = (2.0 * q + alpha * (p - q)) / (alpha * q);
    Ok((p * log_b + p * (a + b).ln() + pi_exp * PI.ln()).exp())
}

fn log_integral(
    integrator: &Integrator,
    f: impl Fn(Point2) -> f64,
    factor: &'static str,
) -> Result<f64, BoundsError> {
    let r = integrator.integrate(f);
    if r.status == Status::Diverged || !(r.value > 0.0 && r.value.is_finite()) {
        return Err(BoundsError::DivergentIntegral { factor });
    }
    Ok(r.value.ln())
}

/// `(2k)^p·B^p·(∫∫(ρ^(2k-2)(ρ^(2k)+2ρ^k cosψ+1))^(α/2) ρ)^(2/α)
///  ·(∫∫(ρ^(k-1)(ρ^(2k)+2ρ^k cosψ+1)^(1/2))^((p-2)q/(p-q)) ρ)^((p-q)/q)`.
pub fn cardioid_closed_form(k: f64, p: f64, alpha: f64, q: f64, rule: &QuadratureRule) -> Result<f64, BoundsError> {
    if !(k >= 1.0) {
        return Err(BoundsError::InvalidArgument(format!("need k >= 1, got {k}")));
    }
    let log_b = check_exponents(p, alpha, q)?;
    let mut singular = vec![Point2::new(-1.0, 0.0)];
    if k > 1.0 {
        singular.push(Point2::ORIGIN);
    }
    let integrator = Integrator::new(&rule.for_domain(SourceDomain::UnitDisc), &singular);
    // ρ^(2k) + 2ρ^k cosψ + 1 = |ρ^(k-1) z + 1|², evaluated without cancellation near z = -1
    let inner = |z: Point2| {
        let rho = z.norm();
        let s = if rho == 0.0 { 0.0 } else { rho.powf(k - 1.0) };
        (rho, (s * z.x + 1.0).powi(2) + (s * z.y).powi(2))
    };
    let log_jac = log_integral(
        &integrator,
        |z| {
            let (rho, s) = inner(z);
            power_of(rho.powf(2.0 * k - 2.0) * s, 0.5 * alpha)
        },
        "jacobian",
    )?;
    let e = (p - 2.0) * q / (p - q);
    let log_d = log_integral(
        &integrator,
        |z| {
            let (rho, s) = inner(z);
            power_of(rho.powf(k - 1.0) * s.max(0.0).sqrt(), e)
        },
        "composition norm",
    )?;
    Ok((p * (2.0 * k).ln() + p * log_b + 2.0 / alpha * log_jac + (p - q) / q * log_d).exp())
}

/// `(k+1)^p·B^p·(∫_Q |z|^(kα))^(2/α)·(∫_Q |z|^(k(p-2)q/(p-q)))^((p-q)/q)`.
pub fn star_closed_form(k: f64, p: f64, alpha: f64, q: f64, rule: &QuadratureRule) -> Result<f64, BoundsError> {
    if !(k >= 0.0) {
        return Err(BoundsError::InvalidArgument(format!("need k >= 0, got {k}")));
    }
    let log_b = check_exponents(p, alpha, q)?;
    let singular = if k > 0.0 { vec![Point2::ORIGIN] } else { vec![] };
    let integrator = Integrator::new(&rule.for_domain(SourceDomain::CenteredSquare), &singular);
    let e = (p - 2.0) * q / (p - q);
    let log_jac = log_integral(&integrator, |z| power_of(z.norm(), k * alpha), "jacobian")?;
    let log_d = log_integral(&integrator, |z| power_of(z.norm(), k * e), "composition norm")?;
    Ok((p * (k + 1.0).ln() + p * log_b + 2.0 / alpha * log_jac + (p - q) / q * log_d).exp())
}
