//! Integrals of radial functions over sup-norm shells.
//!
//! For `φ` depending only on `‖x‖_∞`, the layer-cake identity gives
//! `∫_{Q(0,R) \ Q(0,r)} φ(‖x‖_∞) dx = n 2^n ∫_r^R φ(t) t^{n-1} dt`.

use super::quadrature;
use super::AnalysisError;

/// Relative accuracy requested from the adaptive rule.
pub const SHELL_REL_TOL: f64 = 1e-10;

/// Radial integrand `φ(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radial {
    /// `φ ≡ c`.
    Constant(f64),
    /// `φ(t) = coef · t^exponent`.
    Power { coef: f64, exponent: f64 },
    /// `φ(t) = (alpha + beta/t)^power`, the max-of-partials `|Df|^p` on an
    /// annulus.
    Affine { alpha: f64, beta: f64, power: f64 },
}

impl Radial {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Radial::Constant(c) => c,
            Radial::Power { coef, exponent } => coef * t.powf(exponent),
            Radial::Affine { alpha, beta, power } => (alpha + beta / t).powf(power),
        }
    }
}

/// `R^q - r^q` without cancellation for `r` close to `R`.
fn power_difference(r: f64, big_r: f64, q: f64) -> f64 {
    -big_r.powf(q) * (q * (r / big_r).ln()).exp_m1()
}

/// `∫_r^R t^q dt`.
fn monomial_integral(r: f64, big_r: f64, q: f64) -> f64 {
    let e = q + 1.0;
    if e == 0.0 {
        (big_r / r).ln()
    } else {
        power_difference(r, big_r, e) / e
    }
}

fn binomial(p: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * f64::from(p - i) / f64::from(i + 1))
}

/// Closed form of `∫_r^R φ(t) t^{n-1} dt` where one exists.
fn closed_form(phi: &Radial, r: f64, big_r: f64, n: usize) -> Option<f64> {
    let nm1 = n as f64 - 1.0;
    match *phi {
        Radial::Constant(c) => Some(c * monomial_integral(r, big_r, nm1)),
        Radial::Power { coef, exponent } => Some(coef * monomial_integral(r, big_r, exponent + nm1)),
        Radial::Affine { alpha, beta, power } => {
            if beta == 0.0 {
                Some(alpha.powf(power) * monomial_integral(r, big_r, nm1))
            } else if alpha == 0.0 {
                Some(beta.powf(power) * monomial_integral(r, big_r, nm1 - power))
            } else if power >= 0.0 && power.fract() == 0.0 && power <= 64.0 {
                let p = power as u32;
                Some(
                    (0..=p)
                        .map(|j| {
                            binomial(p, j)
                                * alpha.powi((p - j) as i32)
                                * beta.powi(j as i32)
                                * monomial_integral(r, big_r, nm1 - f64::from(j))
                        })
                        .sum(),
                )
            } else {
                None
            }
        }
    }
}

/// `∫_r^R φ(t) t^{n-1} dt` by adaptive quadrature in `u = ln t`.
pub fn radial_quadrature(phi: &Radial, r: f64, big_r: f64, n: usize) -> Result<f64, AnalysisError> {
    let n = n as i32;
    let g = |u: f64| {
        let t = u.exp();
        phi.eval(t) * t.powi(n)
    };
    quadrature::integrate(g, r.ln(), big_r.ln(), SHELL_REL_TOL * 1e-2, 0.0, 4000)
        .map(|q| q.value)
        .ok_or(AnalysisError::Tolerance { r, big_r })
}

fn check_radii(r: f64, big_r: f64) -> Result<(), AnalysisError> {
    if !(r > 0.0 && big_r.is_finite() && r <= big_r) {
        return Err(AnalysisError::Argument(format!("need 0 < r <= R, got r={r}, R={big_r}")));
    }
    Ok(())
}

/// Integral of `φ(‖x‖_∞)` over the shell `Q(0, R) \ Q(0, r)` in `R^n`.
///
/// Closed forms are used for constants, monomials, and integer powers of
/// the affine integrand; everything else goes through adaptive quadrature.
/// An empty shell (`r = R`) integrates to zero.
pub fn shell_integral(phi: &Radial, r: f64, big_r: f64, n: usize) -> Result<f64, AnalysisError> {
    check_radii(r, big_r)?;
    if r == big_r {
        return Ok(0.0);
    }
    let radial = match closed_form(phi, r, big_r, n) {
        Some(v) => v,
        None => radial_quadrature(phi, r, big_r, n)?,
    };
    Ok(n as f64 * 2f64.powi(n as i32) * radial)
}

/// [`shell_integral`] forced through the quadrature path.
pub fn shell_integral_quadrature(phi: &Radial, r: f64, big_r: f64, n: usize) -> Result<f64, AnalysisError> {
    check_radii(r, big_r)?;
    if r == big_r {
        return Ok(0.0);
    }
    Ok(n as f64 * 2f64.powi(n as i32) * radial_quadrature(phi, r, big_r, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gives_volume_difference() {
        for n in 2..=4 {
            let (r, big_r) = (0.1, 0.7);
            let v = shell_integral(&Radial::Constant(1.0), r, big_r, n).unwrap();
            let want = (2.0 * big_r).powi(n as i32) - (2.0 * r).powi(n as i32);
            assert!((v - want).abs() < 1e-14 * want);
        }
    }

    #[test]
    fn inverse_radius_in_the_plane() {
        // 2·4·∫_{1/4}^{1/2} dt = 2
        let phi = Radial::Power { coef: 1.0, exponent: -1.0 };
        assert!((shell_integral(&phi, 0.25, 0.5, 2).unwrap() - 2.0).abs() < 1e-15);
        let q = shell_integral_quadrature(&phi, 0.25, 0.5, 2).unwrap();
        assert!((q - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_term_for_critical_power() {
        let phi = Radial::Power { coef: 1.0, exponent: -3.0 };
        let v = shell_integral(&phi, 1e-3, 0.5, 3).unwrap();
        assert!((v - 24.0 * 500f64.ln()).abs() < 1e-12 * v);
    }

    #[test]
    fn binomial_closed_form_matches_quadrature() {
        for &(alpha, beta, p, n) in &[(0.5, 0.125, 2.0, 2), (0.5, 1e-3, 3.0, 3), (0.5, 2f64.powi(-21), 2.0, 2)] {
            let phi = Radial::Affine { alpha, beta, power: p };
            let (r, big_r) = (beta * 0.3, beta * 0.9);
            let c = shell_integral(&phi, r, big_r, n).unwrap();
            let q = shell_integral_quadrature(&phi, r, big_r, n).unwrap();
            assert!((c - q).abs() < 1e-10 * c, "{c} vs {q}");
        }
    }

    #[test]
    fn wide_shells_converge() {
        let phi = Radial::Affine { alpha: 0.5, beta: 1e-30, power: 1.5 };
        let v = shell_integral(&phi, 1e-60, 1e-30, 2).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn bad_radii() {
        assert!(shell_integral(&Radial::Constant(1.0), 0.5, 0.25, 2).is_err());
        assert!(shell_integral(&Radial::Constant(1.0), 0.0, 0.25, 2).is_err());
        assert_eq!(shell_integral(&Radial::Constant(1.0), 0.25, 0.25, 2).unwrap(), 0.0);
    }
}
