//! Node model: parameters, logistic transfer function, synchronous
//! equilibrium and linearization coefficients.
//!
//! Every node couples an excitatory population E, an inhibitory population I
//! and a plastic inhibitory-to-excitatory weight W^EI that slowly drives E
//! toward the target rate p. The quantities computed here feed the
//! characteristic factors in [`crate::spectral`] and the curve formulas in
//! [`crate::hopf`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exponent clamp for the logistic; beyond this `exp` would overflow and the
/// output is saturated anyway.
const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter `{name}` = {value} out of range ({constraint})")]
    ParamRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("sigmoid_inverse argument {0} outside (0, 1)")]
    InverseDomain(f64),
}

/// Scalar model constants.
///
/// `w_e` is the total between-node excitatory weight (the constant row sum of
/// the coupling matrix); `w_ie` the fixed within-node excitatory-to-inhibitory
/// weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Target excitatory rate, 0 < p < 1.
    pub p: f64,
    /// Sigmoid steepness, a > 0.
    pub a: f64,
    /// Excitatory time constant, > 0.
    pub tau1: f64,
    /// Plasticity time constant, > 0.
    pub tau2: f64,
    /// Excitatory-to-inhibitory weight, >= 0.
    pub w_ie: f64,
    /// Total between-node excitatory weight, >= 0.
    pub w_e: f64,
}

impl ModelParams {
    /// Reference parameter set used throughout the numerical studies:
    /// p = 0.2, a = 5, tau1 = 1, tau2 = 5.
    pub fn preset(w_ie: f64, w_e: f64) -> Self {
        Self {
            p: 0.2,
            a: 5.0,
            tau1: 1.0,
            tau2: 5.0,
            w_ie,
            w_e,
        }
    }

    /// Same constants, different coupling weights.
    pub fn with_weights(&self, w_ie: f64, w_e: f64) -> Self {
        Self {
            w_ie,
            w_e,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let checks: [(&'static str, f64, bool, &'static str); 6] = [
            ("p", self.p, self.p > 0.0 && self.p < 1.0, "0 < p < 1"),
            ("a", self.a, self.a > 0.0, "a > 0"),
            ("tau1", self.tau1, self.tau1 > 0.0, "tau1 > 0"),
            ("tau2", self.tau2, self.tau2 > 0.0, "tau2 > 0"),
            ("w_ie", self.w_ie, self.w_ie >= 0.0, "w_ie >= 0"),
            ("w_e", self.w_e, self.w_e >= 0.0, "w_e >= 0"),
        ];
        for (name, value, ok, constraint) in checks {
            if !(ok && value.is_finite()) {
                return Err(ModelError::ParamRange {
                    name,
                    value,
                    constraint,
                });
            }
        }
        Ok(())
    }
}

/// The equilibrium with every node identical, guaranteed to exist by the
/// row-sum-1 coupling condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Excitatory equilibrium, equals the target rate p.
    pub e_star: f64,
    /// Inhibitory equilibrium, phi(w_ie * p).
    pub i_star: f64,
    /// Plastic-weight equilibrium, (w_e * p - phi^{-1}(p)) / i_star.
    pub w_ei_star: f64,
}

impl Equilibrium {
    /// The plastic weight can come out negative for small w_e; such points
    /// are outside the biologically meaningful regime and curve computations
    /// skip them.
    pub fn is_admissible(&self) -> bool {
        self.w_ei_star >= 0.0
    }
}

/// Coefficients of the linearization about the synchronous equilibrium.
///
/// The cubic part of each characteristic factor is
/// `lambda^3 + p2 lambda^2 + p1 lambda + p0`, the coupling part carries
/// `q = k1 / tau1`. `p1` splits as `p1 = p1a + p1b * w_e * q` into a part
/// independent of the coupling weight and a part linear in it; the split is
/// what makes the pure-imaginary-root equation independent of W^E.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinCoeffs {
    /// Transfer-function gain at the excitatory operating point, a*p*(1-p).
    pub k1: f64,
    /// Inhibitory branch gain, a*w_ie*i_star*(1-i_star).
    pub k2: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
    pub p1a: f64,
    pub p1b: f64,
}

/// Logistic transfer function 1 / (1 + e^{-a x}).
pub fn sigmoid(x: f64, a: f64) -> f64 {
    let arg = (-a * x).clamp(-EXP_CLAMP, EXP_CLAMP);
    1.0 / (1.0 + arg.exp())
}

/// Inverse of [`sigmoid`]: (1/a) ln(y / (1 - y)), defined for y in (0, 1).
pub fn sigmoid_inverse(y: f64, a: f64) -> Result<f64, ModelError> {
    if !(y > 0.0 && y < 1.0) {
        return Err(ModelError::InverseDomain(y));
    }
    Ok((y / (1.0 - y)).ln() / a)
}

/// Derivative of the logistic, a*phi(x)*(1-phi(x)).
pub fn sigmoid_deriv(x: f64, a: f64) -> f64 {
    let s = sigmoid(x, a);
    a * s * (1.0 - s)
}

/// Synchronous equilibrium of the network.
pub fn equilibrium(params: &ModelParams) -> Equilibrium {
    let i_star = sigmoid(params.w_ie * params.p, params.a);
    // p in (0,1) by validation, so the inverse cannot fail here.
    let phi_inv_p = (params.p / (1.0 - params.p)).ln() / params.a;
    Equilibrium {
        e_star: params.p,
        i_star,
        w_ei_star: (params.w_e * params.p - phi_inv_p) / i_star,
    }
}

/// Linearization coefficients about the synchronous equilibrium.
pub fn lin_coeffs(params: &ModelParams) -> LinCoeffs {
    let eq = equilibrium(params);
    let i_star = eq.i_star;
    let k1 = params.a * params.p * (1.0 - params.p);
    let k2 = params.a * params.w_ie * i_star * (1.0 - i_star);
    let q = k1 / params.tau1;
    let p2 = 1.0 / params.tau1 + 1.0;
    let p0 = i_star * i_star * k1 / (params.tau1 * params.tau2);
    let p1 = 1.0 / params.tau1
        + eq.w_ei_star * k1 * k2 / params.tau1
        + i_star * i_star * k1 / (params.tau1 * params.tau2);
    let phi_inv_p = (params.p / (1.0 - params.p)).ln() / params.a;
    // W^E-independent part of p1; the remainder is p1b * w_e * q.
    let p1a = p0 + (1.0 - phi_inv_p * k1 * k2 / i_star) / params.tau1;
    let p1b = params.p * k2 / i_star;
    LinCoeffs {
        k1,
        k2,
        p0,
        p1,
        p2,
        q,
        p1a,
        p1b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigmoid_midpoint_and_saturation() {
        assert_abs_diff_eq!(sigmoid(0.0, 5.0), 0.5);
        assert_abs_diff_eq!(sigmoid(1e6, 5.0), 1.0);
        assert_abs_diff_eq!(sigmoid(-1e6, 5.0), 0.0);
        // overflow guard: huge arguments saturate instead of producing NaN
        assert!(sigmoid(f64::MAX, 5.0).is_finite());
        assert!(sigmoid(-f64::MAX, 5.0).is_finite());
    }

    #[test]
    fn sigmoid_direct_value() {
        // 1 / (1 + e^{-2})
        assert_relative_eq!(sigmoid(0.4, 5.0), 0.8807970779778823, epsilon = 1e-12);
    }

    #[test]
    fn sigmoid_inverse_values_and_domain() {
        assert_abs_diff_eq!(sigmoid_inverse(0.5, 5.0).unwrap(), 0.0);
        assert_relative_eq!(
            sigmoid_inverse(0.2, 5.0).unwrap(),
            0.25f64.ln() / 5.0,
            epsilon = 1e-12
        );
        assert!(sigmoid_inverse(0.0, 5.0).is_err());
        assert!(sigmoid_inverse(1.0, 5.0).is_err());
        assert!(sigmoid_inverse(-0.3, 5.0).is_err());
    }

    #[test]
    fn sigmoid_round_trip() {
        for i in 0..=60 {
            let x = -3.0 + 0.1 * i as f64;
            let y = sigmoid(x, 5.0);
            assert_relative_eq!(sigmoid_inverse(y, 5.0).unwrap(), x, epsilon = 1e-9);
        }
    }

    #[test]
    fn equilibrium_uncoupled_inhibition() {
        let params = ModelParams::preset(0.0, 2.0);
        let eq = equilibrium(&params);
        assert_abs_diff_eq!(eq.e_star, 0.2);
        assert_abs_diff_eq!(eq.i_star, 0.5);
        assert_relative_eq!(eq.w_ei_star, 1.3545177444479562, epsilon = 1e-12);
        assert!(eq.is_admissible());
    }

    #[test]
    fn equilibrium_with_inhibitory_drive() {
        let params = ModelParams::preset(2.0, 2.0);
        let eq = equilibrium(&params);
        assert_relative_eq!(eq.i_star, 0.8807970779778823, epsilon = 1e-12);
        assert_relative_eq!(eq.w_ei_star, 0.7689158935209192, epsilon = 1e-12);
    }

    #[test]
    fn gain_at_preset() {
        let params = ModelParams::preset(1.0, 2.0);
        let c = lin_coeffs(&params);
        assert_abs_diff_eq!(c.k1, 0.8, epsilon = 1e-15);
        assert!(c.k2 > 0.0);
    }

    #[test]
    fn coeffs_decouple_when_w_ie_zero() {
        let params = ModelParams::preset(0.0, 2.0);
        let c = lin_coeffs(&params);
        assert_abs_diff_eq!(c.k2, 0.0);
        assert_abs_diff_eq!(c.p1b, 0.0);
        assert_relative_eq!(c.p1a, c.p0 + 1.0 / params.tau1, epsilon = 1e-12);
    }

    fn random_valid_params(rng: &mut impl Rng) -> ModelParams {
        loop {
            let params = ModelParams {
                p: rng.gen_range(0.05..0.95),
                a: rng.gen_range(0.5..10.0),
                tau1: rng.gen_range(0.2..3.0),
                tau2: rng.gen_range(0.5..10.0),
                w_ie: rng.gen_range(0.0..6.0),
                w_e: rng.gen_range(0.0..4.0),
            };
            if equilibrium(&params).is_admissible() {
                return params;
            }
        }
    }

    #[test]
    fn p1_split_identity_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let params = random_valid_params(&mut rng);
            let c = lin_coeffs(&params);
            assert!(c.p0 > 0.0 && c.p2 > 0.0 && c.q > 0.0);
            assert!(c.p1 > 0.0, "p1 must be positive when w_ei_star >= 0");
            assert!(c.k1 > 0.0 && c.k2 >= 0.0);
            assert!((0.0..0.2785).contains(&c.p1b), "p1b = {}", c.p1b);
            assert!(c.p1a > c.p0, "p1a = {} p0 = {}", c.p1a, c.p0);
            let recomposed = c.p1a + c.p1b * params.w_e * c.q;
            assert_relative_eq!(c.p1, recomposed, max_relative = 1e-12);
        }
    }

    #[test]
    fn validate_rejects_bad_params() {
        let mut params = ModelParams::preset(1.0, 2.0);
        params.p = 1.5;
        assert!(params.validate().is_err());
        params.p = 0.2;
        params.tau1 = 0.0;
        assert!(params.validate().is_err());
        params.tau1 = 1.0;
        params.w_ie = -0.1;
        assert!(params.validate().is_err());
        params.w_ie = 0.0;
        assert!(params.validate().is_ok());
    }
}
