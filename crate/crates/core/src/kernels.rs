//! Delay distribution kernels.
//!
//! Coupling between nodes enters as a convolution of past excitatory
//! activity with a probability kernel g(s). Four kernels are supported:
//! no delay (delta at the origin), a shifted Dirac delta (discrete delay),
//! a uniform distribution and gamma distributions of integer order. The
//! quantities needed by the linear analysis are the Laplace transform
//! G(lambda) and the trigonometric moments
//! S(w) = int sin(w s) g(s) ds, C(w) = int cos(w s) g(s) ds,
//! which satisfy G(i w) = C(w) - i S(w).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this magnitude sinc/sinhc switch to their Taylor series; the direct
/// quotient loses digits to cancellation near zero.
const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("kernel parameter `{name}` = {value} out of range ({constraint})")]
    ParamRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("gamma kernel shape m must be >= 1")]
    ZeroShape,
    #[error("Laplace transform pole: lambda = -gamma for gamma kernel")]
    LaplacePole,
    #[error("kernel spec: {0}")]
    Spec(String),
}

/// A delay distribution. `Gamma` uses integer shape m and rate gamma, giving
/// mean delay m/gamma; the other delayed kernels are parameterized by their
/// mean delay directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayKernel {
    NoDelay,
    DiracShifted { tau_m: f64 },
    Uniform { tau_m: f64, sigma: f64 },
    Gamma { m: u32, gamma: f64 },
}

impl DelayKernel {
    /// Shifted Dirac delta; a zero shift is the same kernel as `NoDelay` and
    /// is normalized to it.
    pub fn dirac(tau_m: f64) -> Result<Self, KernelError> {
        if !(tau_m >= 0.0 && tau_m.is_finite()) {
            return Err(KernelError::ParamRange {
                name: "tau_m",
                value: tau_m,
                constraint: "tau_m >= 0",
            });
        }
        if tau_m == 0.0 {
            Ok(Self::NoDelay)
        } else {
            Ok(Self::DiracShifted { tau_m })
        }
    }

    pub fn uniform(tau_m: f64, sigma: f64) -> Result<Self, KernelError> {
        if !(tau_m > 0.0 && tau_m.is_finite()) {
            return Err(KernelError::ParamRange {
                name: "tau_m",
                value: tau_m,
                constraint: "tau_m > 0",
            });
        }
        if !(sigma > 0.0 && sigma <= tau_m) {
            return Err(KernelError::ParamRange {
                name: "sigma",
                value: sigma,
                constraint: "0 < sigma <= tau_m",
            });
        }
        Ok(Self::Uniform { tau_m, sigma })
    }

    pub fn gamma(m: u32, gamma: f64) -> Result<Self, KernelError> {
        if m == 0 {
            return Err(KernelError::ZeroShape);
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(KernelError::ParamRange {
                name: "gamma",
                value: gamma,
                constraint: "gamma > 0",
            });
        }
        Ok(Self::Gamma { m, gamma })
    }

    /// Weak (order 1) gamma kernel with the given mean delay.
    pub fn weak_gamma(tau_m: f64) -> Result<Self, KernelError> {
        Self::gamma(1, 1.0 / tau_m)
    }

    /// Strong (order 2) gamma kernel with the given mean delay.
    pub fn strong_gamma(tau_m: f64) -> Result<Self, KernelError> {
        Self::gamma(2, 2.0 / tau_m)
    }

    pub fn mean_delay(&self) -> f64 {
        match *self {
            Self::NoDelay => 0.0,
            Self::DiracShifted { tau_m } | Self::Uniform { tau_m, .. } => tau_m,
            Self::Gamma { m, gamma } => f64::from(m) / gamma,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::NoDelay | Self::DiracShifted { .. } => 0.0,
            Self::Uniform { sigma, .. } => sigma * sigma / 3.0,
            Self::Gamma { m, gamma } => f64::from(m) / (gamma * gamma),
        }
    }

    /// How much past history an integrator has to retain. Gamma kernels need
    /// none: the linear chain reduction replaces the convolution with
    /// auxiliary state.
    pub fn history_span(&self) -> f64 {
        match *self {
            Self::NoDelay | Self::Gamma { .. } => 0.0,
            Self::DiracShifted { tau_m } => tau_m,
            Self::Uniform { tau_m, sigma } => tau_m + sigma,
        }
    }

    /// Laplace transform G(lambda) = int e^{-lambda s} g(s) ds.
    pub fn laplace(&self, lambda: Complex64) -> Result<Complex64, KernelError> {
        match *self {
            Self::NoDelay => Ok(Complex64::new(1.0, 0.0)),
            Self::DiracShifted { tau_m } => Ok((-lambda * tau_m).exp()),
            Self::Uniform { tau_m, sigma } => Ok((-lambda * tau_m).exp() * sinhc(lambda * sigma)),
            Self::Gamma { m, gamma } => {
                let denom = lambda + gamma;
                if denom.norm() == 0.0 {
                    return Err(KernelError::LaplacePole);
                }
                Ok((Complex64::new(gamma, 0.0) / denom).powi(m as i32))
            }
        }
    }

    /// d/dlambda of the Laplace transform; used by root polishing.
    pub fn laplace_deriv(&self, lambda: Complex64) -> Result<Complex64, KernelError> {
        match *self {
            Self::NoDelay => Ok(Complex64::new(0.0, 0.0)),
            Self::DiracShifted { tau_m } => Ok(-(tau_m) * (-lambda * tau_m).exp()),
            Self::Uniform { tau_m, sigma } => {
                let e = (-lambda * tau_m).exp();
                Ok(e * (sigma * sinhc_deriv(lambda * sigma) - tau_m * sinhc(lambda * sigma)))
            }
            Self::Gamma { m, gamma } => {
                let denom = lambda + gamma;
                if denom.norm() == 0.0 {
                    return Err(KernelError::LaplacePole);
                }
                let g = Complex64::new(gamma, 0.0) / denom;
                Ok(-f64::from(m) * g.powi(m as i32) / denom)
            }
        }
    }

    /// Trigonometric moments (S(w), C(w)). Closed forms per kernel; for
    /// gamma kernels of order above 2 the moments come from the Laplace
    /// transform on the imaginary axis.
    pub fn trig_moments(&self, omega: f64) -> (f64, f64) {
        match *self {
            Self::NoDelay => (0.0, 1.0),
            Self::DiracShifted { tau_m } => ((omega * tau_m).sin(), (omega * tau_m).cos()),
            Self::Uniform { tau_m, sigma } => {
                let s = sinc(omega * sigma);
                (s * (omega * tau_m).sin(), s * (omega * tau_m).cos())
            }
            Self::Gamma { m: 1, gamma } => {
                let tau_m = 1.0 / gamma;
                let d = omega * omega * tau_m * tau_m + 1.0;
                (omega * tau_m / d, 1.0 / d)
            }
            Self::Gamma { m: 2, gamma } => {
                let tau_m = 2.0 / gamma;
                let x2 = 0.25 * omega * omega * tau_m * tau_m;
                let d = (1.0 + x2) * (1.0 + x2);
                (omega * tau_m / d, (1.0 - x2) / d)
            }
            Self::Gamma { .. } => {
                // pole is at -gamma, never on the imaginary axis
                let g = self.laplace(Complex64::new(0.0, omega)).unwrap();
                (-g.im, g.re)
            }
        }
    }
}

/// sinc(u) = sin(u)/u with the removable singularity filled in.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// sinhc(u) = sinh(u)/u on the complex plane.
pub fn sinhc(u: Complex64) -> Complex64 {
    if u.norm() < SERIES_CUTOFF {
        let u2 = u * u;
        Complex64::new(1.0, 0.0) + u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sinh() / u
    }
}

/// d/du sinhc(u) = (u cosh u - sinh u) / u^2.
fn sinhc_deriv(u: Complex64) -> Complex64 {
    if u.norm() < SERIES_CUTOFF {
        let u2 = u * u;
        u / 3.0 + u * u2 / 30.0
    } else {
        (u * u.cosh() - u.sinh()) / (u * u)
    }
}

/// Kernel description as it appears in config files. Gamma kernels may give
/// either the rate or the mean delay (or both, checked for consistency).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl TryFrom<&KernelSpec> for DelayKernel {
    type Error = KernelError;

    fn try_from(spec: &KernelSpec) -> Result<Self, KernelError> {
        let reject_fields = |fields: &[(&str, bool)]| -> Result<(), KernelError> {
            for (name, present) in fields {
                if *present {
                    return Err(KernelError::Spec(format!(
                        "field `{name}` not valid for kind `{}`",
                        spec.kind
                    )));
                }
            }
            Ok(())
        };
        match spec.kind.as_str() {
            "none" => {
                reject_fields(&[
                    ("tau_m", spec.tau_m.is_some()),
                    ("sigma", spec.sigma.is_some()),
                    ("m", spec.m.is_some()),
                    ("gamma", spec.gamma.is_some()),
                ])?;
                Ok(DelayKernel::NoDelay)
            }
            "dirac" => {
                reject_fields(&[("sigma", spec.sigma.is_some()), ("m", spec.m.is_some()), ("gamma", spec.gamma.is_some())])?;
                let tau_m = spec
                    .tau_m
                    .ok_or_else(|| KernelError::Spec("dirac kernel needs `tau_m`".into()))?;
                DelayKernel::dirac(tau_m)
            }
            "uniform" => {
                reject_fields(&[("m", spec.m.is_some()), ("gamma", spec.gamma.is_some())])?;
                let tau_m = spec
                    .tau_m
                    .ok_or_else(|| KernelError::Spec("uniform kernel needs `tau_m`".into()))?;
                let sigma = spec
                    .sigma
                    .ok_or_else(|| KernelError::Spec("uniform kernel needs `sigma`".into()))?;
                DelayKernel::uniform(tau_m, sigma)
            }
            "gamma" => {
                reject_fields(&[("sigma", spec.sigma.is_some())])?;
                let m = spec
                    .m
                    .ok_or_else(|| KernelError::Spec("gamma kernel needs `m`".into()))?;
                let gamma = match (spec.gamma, spec.tau_m) {
                    (Some(g), None) => g,
                    (None, Some(tau_m)) => {
                        if tau_m <= 0.0 {
                            return Err(KernelError::ParamRange {
                                name: "tau_m",
                                value: tau_m,
                                constraint: "tau_m > 0",
                            });
                        }
                        f64::from(m) / tau_m
                    }
                    (Some(g), Some(tau_m)) => {
                        if (f64::from(m) / g - tau_m).abs() > 1e-9 * tau_m.abs().max(1.0) {
                            return Err(KernelError::Spec(format!(
                                "gamma kernel over-specified: m/gamma = {} but tau_m = {}",
                                f64::from(m) / g,
                                tau_m
                            )));
                        }
                        g
                    }
                    (None, None) => {
                        return Err(KernelError::Spec(
                            "gamma kernel needs `gamma` or `tau_m`".into(),
                        ))
                    }
                };
                DelayKernel::gamma(m, gamma)
            }
            other => Err(KernelError::Spec(format!("unknown kernel kind `{other}`"))),
        }
    }
}

impl From<&DelayKernel> for KernelSpec {
    fn from(k: &DelayKernel) -> Self {
        match *k {
            DelayKernel::NoDelay => KernelSpec {
                kind: "none".into(),
                ..Default::default()
            },
            DelayKernel::DiracShifted { tau_m } => KernelSpec {
                kind: "dirac".into(),
                tau_m: Some(tau_m),
                ..Default::default()
            },
            DelayKernel::Uniform { tau_m, sigma } => KernelSpec {
                kind: "uniform".into(),
                tau_m: Some(tau_m),
                sigma: Some(sigma),
                ..Default::default()
            },
            DelayKernel::Gamma { m, gamma } => KernelSpec {
                kind: "gamma".into(),
                m: Some(m),
                gamma: Some(gamma),
                ..Default::default()
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Adaptive Simpson quadrature, used as an independent check of the
    /// closed-form moments.
    fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
        }
        fn recurse(
            f: &impl Fn(f64) -> f64,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            whole: f64,
            m: f64,
            fm: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let (left, lm, flm) = simpson(f, a, fa, m, fm);
            let (right, rm, frm) = simpson(f, m, fm, b, fb);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                    + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
            }
        }
        let fa = f(a);
        let fb = f(b);
        let (whole, m, fm) = simpson(f, a, fa, b, fb);
        recurse(f, a, fa, b, fb, whole, m, fm, tol, 40)
    }

    fn density(kernel: &DelayKernel, s: f64) -> f64 {
        match *kernel {
            DelayKernel::Uniform { tau_m, sigma } => {
                if (tau_m - sigma..=tau_m + sigma).contains(&s) {
                    1.0 / (2.0 * sigma)
                } else {
                    0.0
                }
            }
            DelayKernel::Gamma { m, gamma } => {
                let mf = f64::from(m);
                let fact: f64 = (1..m).map(f64::from).product();
                s.powf(mf - 1.0) * gamma.powf(mf) * (-gamma * s).exp() / fact.max(1.0)
            }
            _ => panic!("density only defined for continuous kernels"),
        }
    }

    fn support(kernel: &DelayKernel) -> (f64, f64) {
        match *kernel {
            DelayKernel::Uniform { tau_m, sigma } => (tau_m - sigma, tau_m + sigma),
            DelayKernel::Gamma { m, gamma } => (0.0, (f64::from(m) + 40.0) / gamma),
            _ => panic!(),
        }
    }

    #[test]
    fn means_and_variances() {
        assert_abs_diff_eq!(DelayKernel::NoDelay.mean_delay(), 0.0);
        assert_abs_diff_eq!(DelayKernel::gamma(1, 10.0).unwrap().mean_delay(), 0.1);
        assert_abs_diff_eq!(DelayKernel::gamma(2, 20.0).unwrap().mean_delay(), 0.1);
        assert_relative_eq!(
            DelayKernel::uniform(0.1, 0.1).unwrap().variance(),
            0.01 / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(DelayKernel::gamma(1, 10.0).unwrap().variance(), 0.01);
        assert_abs_diff_eq!(DelayKernel::dirac(0.5).unwrap().variance(), 0.0);
    }

    #[test]
    fn dirac_zero_shift_normalizes() {
        assert_eq!(DelayKernel::dirac(0.0).unwrap(), DelayKernel::NoDelay);
    }

    #[test]
    fn laplace_at_zero_is_one() {
        let kernels = [
            DelayKernel::NoDelay,
            DelayKernel::dirac(0.3).unwrap(),
            DelayKernel::uniform(0.4, 0.2).unwrap(),
            DelayKernel::gamma(2, 5.0).unwrap(),
        ];
        for k in kernels {
            let v = k.laplace(Complex64::new(0.0, 0.0)).unwrap();
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn laplace_weak_gamma_value() {
        let k = DelayKernel::gamma(1, 10.0).unwrap();
        let v = k.laplace(Complex64::new(0.0, 10.0)).unwrap();
        assert_relative_eq!(v.re, 0.5, epsilon = 1e-14);
        assert_relative_eq!(v.im, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn laplace_pole_rejected() {
        let k = DelayKernel::gamma(1, 10.0).unwrap();
        assert!(matches!(
            k.laplace(Complex64::new(-10.0, 0.0)),
            Err(KernelError::LaplacePole)
        ));
    }

    #[test]
    fn uniform_laplace_near_zero_uses_series() {
        let k = DelayKernel::uniform(0.4, 0.2).unwrap();
        let v = k.laplace(Complex64::new(0.0, 1e-9)).unwrap();
        assert_relative_eq!(v.re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trig_moment_closed_forms() {
        assert_eq!(DelayKernel::NoDelay.trig_moments(3.7), (0.0, 1.0));
        let weak = DelayKernel::gamma(1, 10.0).unwrap();
        let (s, c) = weak.trig_moments(10.0);
        assert_relative_eq!(s, 0.5, epsilon = 1e-14);
        assert_relative_eq!(c, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn trig_moments_match_laplace_on_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let kernel = match rng.gen_range(0..5) {
                0 => DelayKernel::NoDelay,
                1 => DelayKernel::dirac(rng.gen_range(0.01..2.0)).unwrap(),
                2 => {
                    let tau_m: f64 = rng.gen_range(0.01..2.0);
                    DelayKernel::uniform(tau_m, rng.gen_range(0.0..1.0f64).max(1e-3) * tau_m)
                        .unwrap()
                }
                3 => DelayKernel::gamma(rng.gen_range(1..3), rng.gen_range(0.5..40.0)).unwrap(),
                _ => DelayKernel::gamma(rng.gen_range(3..7), rng.gen_range(0.5..40.0)).unwrap(),
            };
            let omega = rng.gen_range(1e-3..20.0);
            let (s, c) = kernel.trig_moments(omega);
            let g = kernel.laplace(Complex64::new(0.0, omega)).unwrap();
            assert_abs_diff_eq!(g.re, c, epsilon = 1e-12);
            assert_abs_diff_eq!(g.im, -s, epsilon = 1e-12);
            assert!(s * s + c * c <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let kernels = [
            DelayKernel::uniform(0.5, 0.3).unwrap(),
            DelayKernel::uniform(0.1, 0.1).unwrap(),
            DelayKernel::gamma(1, 10.0).unwrap(),
            DelayKernel::gamma(2, 20.0).unwrap(),
        ];
        for kernel in kernels {
            let (lo, hi) = support(&kernel);
            let mass = adaptive_simpson(&|s| density(&kernel, s), lo, hi, 1e-12);
            assert_relative_eq!(mass, 1.0, epsilon = 1e-8);
            let mean = adaptive_simpson(&|s| s * density(&kernel, s), lo, hi, 1e-12);
            assert_relative_eq!(mean, kernel.mean_delay(), epsilon = 1e-8);
            let mu = kernel.mean_delay();
            let var =
                adaptive_simpson(&|s| (s - mu) * (s - mu) * density(&kernel, s), lo, hi, 1e-12);
            assert_abs_diff_eq!(var, kernel.variance(), epsilon = 1e-8);
            for omega in [0.3, 1.0, 4.0, 11.0] {
                let (s_cf, c_cf) = kernel.trig_moments(omega);
                let s_q =
                    adaptive_simpson(&|s| (omega * s).sin() * density(&kernel, s), lo, hi, 1e-11);
                let c_q =
                    adaptive_simpson(&|s| (omega * s).cos() * density(&kernel, s), lo, hi, 1e-11);
                assert_abs_diff_eq!(s_cf, s_q, epsilon = 1e-8);
                assert_abs_diff_eq!(c_cf, c_q, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn spec_parsing() {
        let spec: KernelSpec =
            serde_json::from_str(r#"{"kind": "gamma", "m": 1, "tau_m": 0.1}"#).unwrap();
        let k = DelayKernel::try_from(&spec).unwrap();
        assert_eq!(k, DelayKernel::Gamma { m: 1, gamma: 10.0 });

        // consistent redundant spec is accepted
        let spec: KernelSpec =
            serde_json::from_str(r#"{"kind": "gamma", "m": 2, "gamma": 20.0, "tau_m": 0.1}"#)
                .unwrap();
        assert!(DelayKernel::try_from(&spec).is_ok());

        // inconsistent redundant spec is not
        let spec: KernelSpec =
            serde_json::from_str(r#"{"kind": "gamma", "m": 2, "gamma": 20.0, "tau_m": 0.3}"#)
                .unwrap();
        assert!(DelayKernel::try_from(&spec).is_err());

        let spec: KernelSpec =
            serde_json::from_str(r#"{"kind": "uniform", "tau_m": 0.1, "sigma": 0.2}"#).unwrap();
        assert!(DelayKernel::try_from(&spec).is_err(), "sigma > tau_m");

        let spec: KernelSpec = serde_json::from_str(r#"{"kind": "nodelay"}"#).unwrap();
        assert!(DelayKernel::try_from(&spec).is_err(), "unknown kind");

        let spec: KernelSpec =
            serde_json::from_str(r#"{"kind": "none", "tau_m": 0.1}"#).unwrap();
        assert!(DelayKernel::try_from(&spec).is_err(), "stray field");

        let spec: KernelSpec = serde_json::from_str(r#"{"kind": "dirac", "tau_m": 0.0}"#).unwrap();
        assert_eq!(DelayKernel::try_from(&spec).unwrap(), DelayKernel::NoDelay);
    }
}
