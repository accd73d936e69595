//! Classical two-dimensional Neumann eigenvalue inequalities.

use std::f64::consts::PI;

use super::BoundsError;

fn positive(name: &str, v: f64) -> Result<(), BoundsError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

/// Lower bound `π²/d²` on `μ₂` for convex domains of diameter `d`.
pub fn payne_weinberger(diameter: f64) -> Result<f64, BoundsError> {
    positive("diameter", diameter)?;
    Ok(PI * PI / (diameter * diameter))
}

/// `π_p = 2π (p-1)^(1/p) / (p sin(π/p))`.
pub fn pi_p(p: f64) -> f64 {
    2.0 * PI * (p - 1.0).powf(1.0 / p) / (p * (PI / p).sin())
}

/// Lower bound `(π_p/d)^p` on `μ_p` for convex domains, valid for `p ≥ 2`.
pub fn ent_bound(p: f64, diameter: f64) -> Result<f64, BoundsError> {
    if !(p >= 2.0) {
        return Err(BoundsError::InvalidArgument(format!("ent bound needs p >= 2, got {p}")));
    }
    positive("diameter", diameter)?;
    Ok((pi_p(p) / diameter).powf(p))
}

/// Upper bound `4π/|Ω|` on `μ₂` for plane-covering domains.
pub fn polya_upper(area: f64) -> Result<f64, BoundsError> {
    positive("area", area)?;
    Ok(4.0 * PI / area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((payne_weinberger(1.0).unwrap() - 9.869604401089358).abs() < 1e-12);
        assert!((ent_bound(2.0, 3.0).unwrap() - PI * PI / 9.0).abs() < 1e-12);
        assert!((polya_upper(PI).unwrap() - 4.0).abs() < 1e-15);
        assert!((pi_p(2.0) - PI).abs() < 1e-14);
    }

    #[test]
    fn invalid_arguments() {
        assert!(ent_bound(1.9, 1.0).is_err());
        assert!(payne_weinberger(0.0).is_err());
        assert!(polya_upper(-1.0).is_err());
    }

    #[test]
    fn pi_p_matches_its_integral_form() {
        // 2 ∫_0^{(p-1)^{1/p}} (1 - t^p/(p-1))^{-1/p} dt via t = (p-1)^{1/p} sin^{2/p}-free substitution:
        // u = t^p/(p-1) turns it into a Beta integral 2 (p-1)^{1/p} B(1/p, 1-1/p) / p.
        for p in [1.5, 2.0, 3.0, 4.5] {
            let a = 1.0 / p;
            // B(a, 1-a) = π / sin(π a)
            let beta = PI / (PI * a).sin();
            let integral = 2.0 * (p - 1.0).powf(1.0 / p) * beta / p;
            assert!((pi_p(p) - integral).abs() < 1e-12);
        }
    }
}
