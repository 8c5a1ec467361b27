//! Characteristic factors of the network linearization and root scans.
//!
//! Diagonalizing the coupling matrix splits the linearization about the
//! synchronous equilibrium into one 3-dimensional subsystem per connectivity
//! eigenvalue r_k. Each subsystem contributes the factor
//!
//! ```text
//! C_k(lambda) = lambda^3 + p2 lambda^2 + p1 lambda + p0
//!               - r_k W^E q lambda (lambda + 1) G(lambda)
//! ```
//!
//! to the characteristic equation, where G is the Laplace transform of the
//! delay kernel. For the no-delay and gamma kernels the factor clears to a
//! polynomial (degree 3 and 3+m) whose roots come from a companion-matrix
//! eigensolve; for the shifted-Dirac and uniform kernels the factor is
//! transcendental and roots inside a disk are located by argument-principle
//! subdivision with Newton polishing.

pub mod contour;

use crate::connectivity::Connectivity;
use crate::kernels::{DelayKernel, KernelError};
use crate::model::{lin_coeffs, LinCoeffs, ModelParams};
use crate::poly::{self, PolyError};
use num_complex::Complex64;
use thiserror::Error;

use contour::{ContourError, ContourOpts, Region};

/// Factors with max real part below this margin count as stable.
pub const DEFAULT_STABILITY_MARGIN: f64 = 1e-9;

/// Disk radius used throughout the parameter-plane scans.
pub const DEFAULT_DISK_RADIUS: f64 = 8.0;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("kernel {0:?} has a transcendental characteristic factor; no polynomial form exists")]
    NotPolynomial(DelayKernel),
}

/// One factor of the network characteristic equation.
///
/// `w_e` lives on the factor itself; the p1 coefficient is recomputed from
/// the split `p1 = p1a + p1b w_e q`, so a factor can be re-weighted without
/// rebuilding the linearization.
#[derive(Debug, Clone, Copy)]
pub struct CharFactor {
    pub coeffs: LinCoeffs,
    pub w_e: f64,
    pub rk: Complex64,
    pub kernel: DelayKernel,
}

impl CharFactor {
    pub fn from_params(params: &ModelParams, rk: Complex64, kernel: DelayKernel) -> Self {
        Self {
            coeffs: lin_coeffs(params),
            w_e: params.w_e,
            rk,
            kernel,
        }
    }

    pub fn from_parts(coeffs: LinCoeffs, w_e: f64, rk: Complex64, kernel: DelayKernel) -> Self {
        Self {
            coeffs,
            w_e,
            rk,
            kernel,
        }
    }

    /// p1 evaluated at this factor's coupling weight.
    pub fn p1(&self) -> f64 {
        self.coeffs.p1a + self.coeffs.p1b * self.w_e * self.coeffs.q
    }

    /// C_k(lambda).
    pub fn eval(&self, lambda: Complex64) -> Result<Complex64, SpectralError> {
        let c = &self.coeffs;
        let cubic = ((lambda + c.p2) * lambda + self.p1()) * lambda + c.p0;
        let g = self.kernel.laplace(lambda)?;
        Ok(cubic - self.rk * self.w_e * c.q * lambda * (lambda + 1.0) * g)
    }

    /// d/dlambda C_k(lambda).
    pub fn eval_deriv(&self, lambda: Complex64) -> Result<Complex64, SpectralError> {
        let c = &self.coeffs;
        let dcubic = (3.0 * lambda + 2.0 * c.p2) * lambda + self.p1();
        let g = self.kernel.laplace(lambda)?;
        let dg = self.kernel.laplace_deriv(lambda)?;
        let coupling = (2.0 * lambda + 1.0) * g + lambda * (lambda + 1.0) * dg;
        Ok(dcubic - self.rk * self.w_e * c.q * coupling)
    }

    /// The factor as an exact monic polynomial (ascending coefficients):
    /// the cubic itself for no delay, the cubic times (lambda + gamma)^m with
    /// the coupling term cleared for gamma kernels.
    pub fn as_polynomial(&self) -> Result<Vec<Complex64>, SpectralError> {
        let (base, lin) = self.polynomial_split()?;
        Ok(base
            .iter()
            .zip(&lin)
            .map(|(b, l)| b + self.w_e * l)
            .collect())
    }

    /// Split of the cleared polynomial into a W^E-independent part and a part
    /// linear in W^E: `poly = base + w_e * lin`.
    pub fn polynomial_split(&self) -> Result<(Vec<Complex64>, Vec<Complex64>), SpectralError> {
        let c = &self.coeffs;
        match self.kernel {
            DelayKernel::NoDelay => {
                let base = poly::real_to_complex(&[c.p0, c.p1a, c.p2, 1.0]);
                let mut lin = vec![Complex64::new(0.0, 0.0); 4];
                lin[1] = Complex64::new(c.p1b * c.q, 0.0) - self.rk * c.q;
                lin[2] = -self.rk * c.q;
                Ok((base, lin))
            }
            DelayKernel::Gamma { m, gamma } => {
                // (lambda + gamma)^m
                let mut shift = vec![1.0];
                for _ in 0..m {
                    shift = poly::mul(&shift, &[gamma, 1.0]);
                }
                let base = poly::real_to_complex(&poly::mul(&[c.p0, c.p1a, c.p2, 1.0], &shift));
                let p1b_term = poly::mul(&[0.0, c.p1b * c.q], &shift);
                let mut lin = poly::real_to_complex(&p1b_term);
                if lin.len() < base.len() {
                    lin.resize(base.len(), Complex64::new(0.0, 0.0));
                }
                let gm = gamma.powi(m as i32);
                lin[1] -= self.rk * c.q * gm;
                lin[2] -= self.rk * c.q * gm;
                Ok((base, lin))
            }
            k => Err(SpectralError::NotPolynomial(k)),
        }
    }

    /// Upper bound on |lambda| for any root with Re(lambda) >= 0: there
    /// |G| <= 1, so the Cauchy bound of the cubic with the coupling folded
    /// into its coefficients applies. A scan disk at least this large sees
    /// every unstable root.
    pub fn unstable_root_bound(&self) -> f64 {
        let c = &self.coeffs;
        let b = self.rk.norm() * self.w_e * c.q;
        1.0 + (c.p2 + b).max(self.p1() + b).max(c.p0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMethod {
    Polynomial,
    Contour,
}

/// Outcome of a root scan over a disk.
#[derive(Debug, Clone)]
pub struct RootScan {
    /// Largest real part among roots in the disk; -inf when the disk holds
    /// no roots at all.
    pub max_real_part: f64,
    pub witness_root: Option<Complex64>,
    pub disk_radius: f64,
    pub method: ScanMethod,
    /// Every root found inside the disk, sorted by descending real part.
    pub roots: Vec<Complex64>,
}

impl RootScan {
    fn from_roots(mut roots: Vec<Complex64>, radius: f64, method: ScanMethod) -> Self {
        roots.retain(|z| z.norm() <= radius + 1e-9);
        roots.sort_by(|a, b| b.re.total_cmp(&a.re));
        let witness = roots.first().copied();
        Self {
            max_real_part: witness.map_or(f64::NEG_INFINITY, |z| z.re),
            witness_root: witness,
            disk_radius: radius,
            method,
            roots,
        }
    }
}

/// Largest real part among the roots of the factor inside `|lambda| <= radius`.
/// Polynomial kernels go through the companion matrix, transcendental ones
/// through the contour scan.
pub fn max_real_part(factor: &CharFactor, radius: f64) -> Result<RootScan, SpectralError> {
    match factor.kernel {
        DelayKernel::NoDelay | DelayKernel::Gamma { .. } => max_real_part_polynomial(factor, radius),
        _ => max_real_part_contour(factor, radius, &ContourOpts::default()),
    }
}

pub fn max_real_part_polynomial(
    factor: &CharFactor,
    radius: f64,
) -> Result<RootScan, SpectralError> {
    let coeffs = factor.as_polynomial()?;
    let roots = poly::roots(&coeffs)?;
    Ok(RootScan::from_roots(roots, radius, ScanMethod::Polynomial))
}

/// Contour-based scan. Works for every kernel; for gamma kernels the cleared
/// polynomial is scanned so the Laplace pole at -gamma never enters the
/// integrand.
pub fn max_real_part_contour(
    factor: &CharFactor,
    radius: f64,
    opts: &ContourOpts,
) -> Result<RootScan, SpectralError> {
    // slightly asymmetric padding keeps roots off the outer edges and the
    // first split lines off the axes where roots tend to sit
    let pad = 1e-3 * radius;
    let region = Region::new(
        -radius - 1.7 * pad,
        radius + 1.3 * pad,
        -radius - 1.1 * pad,
        radius + 1.9 * pad,
    );
    let roots = match factor.kernel {
        DelayKernel::NoDelay | DelayKernel::Gamma { .. } => {
            let coeffs = factor.as_polynomial()?;
            contour::find_roots(
                &|z| poly::eval(&coeffs, z),
                &|z| poly::eval_deriv(&coeffs, z),
                region,
                opts,
            )?
        }
        _ => {
            // Dirac and uniform kernels have entire transforms
            let f = |z| factor.eval(z).expect("entire characteristic factor");
            let df = |z| factor.eval_deriv(z).expect("entire characteristic factor");
            contour::find_roots(&f, &df, region, opts)?
        }
    };
    Ok(RootScan::from_roots(roots, radius, ScanMethod::Contour))
}

/// Stability verdict for the synchronous equilibrium of a whole network.
#[derive(Debug, Clone, Copy)]
pub struct StabilityReport {
    pub stable: bool,
    /// Connectivity eigenvalue whose factor has the largest root real part.
    pub worst_eigenvalue: Complex64,
    pub max_real_part: f64,
}

pub fn stability_test(
    params: &ModelParams,
    kernel: DelayKernel,
    conn: &Connectivity,
    radius: f64,
) -> Result<StabilityReport, SpectralError> {
    stability_test_with_margin(params, kernel, conn, radius, DEFAULT_STABILITY_MARGIN)
}

/// Scans the factor of every distinct connectivity eigenvalue (conjugates
/// collapsed). The scan disk is enlarged to the factor's unstable-root bound
/// when that exceeds `radius`, so a verdict of stable really means no roots
/// in the closed right half plane.
pub fn stability_test_with_margin(
    params: &ModelParams,
    kernel: DelayKernel,
    conn: &Connectivity,
    radius: f64,
    margin: f64,
) -> Result<StabilityReport, SpectralError> {
    let coeffs = lin_coeffs(params);
    let mut worst_eigenvalue = Complex64::new(1.0, 0.0);
    let mut worst = f64::NEG_INFINITY;
    for rk in conn.distinct_eigenvalues() {
        let factor = CharFactor::from_parts(coeffs, params.w_e, rk, kernel);
        let r_eff = radius.max(1.02 * factor.unstable_root_bound());
        let scan = max_real_part(&factor, r_eff)?;
        if scan.max_real_part > worst {
            worst = scan.max_real_part;
            worst_eigenvalue = rk;
        }
    }
    Ok(StabilityReport {
        stable: worst < -margin,
        worst_eigenvalue,
        max_real_part: worst,
    })
}
