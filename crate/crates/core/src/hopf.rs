//! Curves of pure imaginary eigenvalues in the (W^IE, W^E)-plane.
//!
//! Writing a pure imaginary root i w into a characteristic factor with
//! connectivity eigenvalue r_k = alpha + i beta and splitting into real and
//! imaginary parts eliminates W^E and leaves one real equation in w:
//!
//! ```text
//! -(C a + S b) w^4 + (p2 - 1)(C b - S a) w^3
//!   + ((C a + S b)(p1a - p2) + p1b p2) w^2
//!   - (p0 - p1a)(C b - S a) w + p0 (C a + S b - p1b) = 0
//! ```
//!
//! with the kernel moments S(w), C(w). Each admissible root maps back to
//!
//! ```text
//! W^E(w) = (p2 w^2 - p0) / (q w ((a w + b) C - (a - b w) S))
//! ```
//!
//! For the no-delay and gamma kernels the moments are rational and the w
//! equation clears to a polynomial solved by companion matrix; for the
//! shifted-Dirac and uniform kernels it is transcendental and roots are
//! bracketed by sign scanning and bisected. Sweeping W^IE yields the curve.
//! Every accepted sample is re-checked through [`crate::spectral`]: the
//! factor evaluated at i w must vanish to 1e-7.
//!
//! A curve for r_k = 1 signals oscillations of the whole network in step
//! (synchronous); curves for other eigenvalues signal phase-shifted patterns.
//! For a complex eigenvalue only w > 0 is scanned; the mirrored roots belong
//! to the conjugate eigenvalue's factor, so conjugate pairs are handled by
//! computing curves for both members.

use crate::kernels::DelayKernel;
use crate::model::{equilibrium, lin_coeffs, LinCoeffs, ModelParams};
use crate::poly;
use crate::spectral::{self, CharFactor, SpectralError};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Residual bound |C_k(i w)| for accepting a curve sample.
pub const CURVE_RESIDUAL_TOL: f64 = 1e-7;
/// Refinement target for double-Hopf intersection points.
pub const INTERSECTION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum HopfError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
    #[error("curves do not overlap in w_ie")]
    EmptyOverlap,
    #[error("grid must have at least 32 points per axis, got {0}x{1}")]
    GridTooCoarse(usize, usize),
    #[error("grid ranges must be positive and ordered")]
    BadRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Synchronous,
    Asynchronous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    ClosedForm,
    GridBoundary,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveSample {
    pub w_ie: f64,
    pub w_e: f64,
    pub omega: f64,
}

/// One branch of a Hopf curve for a single connectivity eigenvalue.
#[derive(Debug, Clone)]
pub struct HopfCurve {
    pub rk: Complex64,
    pub kernel: DelayKernel,
    /// Samples sorted by w_ie; grid columns or w_ie entries with no
    /// admissible point are simply absent.
    pub samples: Vec<CurveSample>,
    pub branch: Branch,
    pub method: CurveMethod,
}

impl HopfCurve {
    pub fn w_ie_range(&self) -> Option<(f64, f64)> {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => Some((a.w_ie, b.w_ie)),
            _ => None,
        }
    }

    /// Linear interpolation of (w_e, omega) at the given w_ie; None outside
    /// the sampled range.
    pub fn interpolate(&self, w_ie: f64) -> Option<(f64, f64)> {
        let s = &self.samples;
        if s.is_empty() || w_ie < s[0].w_ie || w_ie > s[s.len() - 1].w_ie {
            return None;
        }
        let idx = s.partition_point(|p| p.w_ie < w_ie);
        if idx == 0 {
            return Some((s[0].w_e, s[0].omega));
        }
        let (a, b) = (&s[idx - 1], &s[idx.min(s.len() - 1)]);
        if (b.w_ie - a.w_ie).abs() < 1e-300 {
            return Some((a.w_e, a.omega));
        }
        let t = (w_ie - a.w_ie) / (b.w_ie - a.w_ie);
        Some((a.w_e + t * (b.w_e - a.w_e), a.omega + t * (b.omega - a.omega)))
    }

    /// Largest |C_k(i w)| over all samples, evaluated through the spectral
    /// module; the independent check that the curve really is a locus of
    /// pure imaginary roots.
    pub fn max_residual(&self, params: &ModelParams) -> Result<f64, HopfError> {
        let mut worst = 0.0f64;
        for s in &self.samples {
            let p = params.with_weights(s.w_ie, s.w_e);
            let factor = CharFactor::from_params(&p, self.rk, self.kernel);
            let r = factor.eval(Complex64::new(0.0, s.omega))?.norm();
            worst = worst.max(r);
        }
        Ok(worst)
    }
}

fn branch_of(rk: Complex64) -> Branch {
    if (rk - Complex64::new(1.0, 0.0)).norm() <= 1e-9 {
        Branch::Synchronous
    } else {
        Branch::Asynchronous
    }
}

/// Default W^IE grid: [0, 6] with 241 samples.
pub fn default_w_ie_grid() -> Vec<f64> {
    linspace(0.0, 6.0, 241)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Value of the w-equation with the kernel moments substituted.
pub fn omega_equation_value(
    c: &LinCoeffs,
    rk: Complex64,
    kernel: DelayKernel,
    omega: f64,
) -> f64 {
    let (s, co) = kernel.trig_moments(omega);
    let a = rk.re * co + rk.im * s;
    let b = rk.im * co - rk.re * s;
    -a * omega.powi(4)
        + (c.p2 - 1.0) * b * omega.powi(3)
        + (a * (c.p1a - c.p2) + c.p1b * c.p2) * omega * omega
        - (c.p0 - c.p1a) * b * omega
        + c.p0 * (a - c.p1b)
}

/// W^E at which the factor has the pure imaginary root i w.
pub fn w_e_hopf(c: &LinCoeffs, rk: Complex64, kernel: DelayKernel, omega: f64) -> f64 {
    let (s, co) = kernel.trig_moments(omega);
    let t1 = (rk.re * omega + rk.im) * co - (rk.re - rk.im * omega) * s;
    (c.p2 * omega * omega - c.p0) / (c.q * omega * t1)
}

/// Rational form of the kernel moments: (C_num, S_num, D) with
/// C = C_num / D and S = S_num / D, all real polynomials in w.
/// None for kernels with transcendental moments.
fn rational_moments(kernel: DelayKernel) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    match kernel {
        DelayKernel::NoDelay => Some((vec![1.0], vec![0.0], vec![1.0])),
        DelayKernel::Gamma { m, gamma } => {
            // C - iS = gamma^m (gamma - i w)^m / (gamma^2 + w^2)^m
            let mut c_num = vec![0.0; m as usize + 1];
            let mut s_num = vec![0.0; m as usize + 1];
            let gm = gamma.powi(m as i32);
            let mut binom = 1.0;
            for k in 0..=m as usize {
                let coeff = binom * gamma.powi((m as usize - k) as i32) * gm;
                if k % 2 == 0 {
                    c_num[k] = coeff * if k % 4 == 0 { 1.0 } else { -1.0 };
                } else {
                    s_num[k] = coeff * if k % 4 == 1 { 1.0 } else { -1.0 };
                }
                binom *= (m as usize - k) as f64 / (k + 1) as f64;
            }
            let mut d = vec![1.0];
            for _ in 0..m {
                d = poly::mul(&d, &[gamma * gamma, 0.0, 1.0]);
            }
            Some((c_num, s_num, d))
        }
        _ => None,
    }
}

/// Positive real roots w of the w-equation for this factor. The list may be
/// empty: no pure imaginary eigenvalues for that eigenvalue/kernel/weight
/// combination.
pub fn hopf_omega_equation(
    c: &LinCoeffs,
    rk: Complex64,
    kernel: DelayKernel,
) -> Result<Vec<f64>, HopfError> {
    hopf_omega_equation_with(c, rk, kernel, &OmegaScanOpts::default())
}

#[derive(Debug, Clone)]
pub struct OmegaScanOpts {
    /// Upper end of the bracketing scan for transcendental kernels.
    pub omega_max: f64,
    pub scan_points: usize,
}

impl Default for OmegaScanOpts {
    fn default() -> Self {
        Self {
            omega_max: 8.0,
            scan_points: 4096,
        }
    }
}

pub fn hopf_omega_equation_with(
    c: &LinCoeffs,
    rk: Complex64,
    kernel: DelayKernel,
    opts: &OmegaScanOpts,
) -> Result<Vec<f64>, HopfError> {
    if let Some((c_num, s_num, d)) = rational_moments(kernel) {
        let a_num = poly::add(&poly::scale(&c_num, rk.re), &poly::scale(&s_num, rk.im));
        let b_num = poly::add(&poly::scale(&c_num, rk.im), &poly::scale(&s_num, -rk.re));
        let shift = |p: &[f64], k: usize| {
            let mut out = vec![0.0; k];
            out.extend_from_slice(p);
            out
        };
        let mut f = poly::scale(&shift(&a_num, 4), -1.0);
        f = poly::add(&f, &shift(&poly::scale(&b_num, c.p2 - 1.0), 3));
        let quad = poly::add(
            &poly::scale(&a_num, c.p1a - c.p2),
            &poly::scale(&d, c.p1b * c.p2),
        );
        f = poly::add(&f, &shift(&quad, 2));
        f = poly::add(&f, &shift(&poly::scale(&b_num, c.p1a - c.p0), 1));
        f = poly::add(
            &f,
            &poly::add(&poly::scale(&a_num, c.p0), &poly::scale(&d, -c.p0 * c.p1b)),
        );
        let roots = poly::real_roots(&f, 1e-9)?;
        return Ok(roots.into_iter().filter(|&w| w > 1e-9).collect());
    }

    // transcendental moments: sign scan on (0, omega_max] then bisection
    let n = opts.scan_points.max(64);
    let f = |w: f64| omega_equation_value(c, rk, kernel, w);
    let mut roots = Vec::new();
    let mut w_prev = opts.omega_max * 1e-7;
    let mut f_prev = f(w_prev);
    for k in 1..=n {
        let w = opts.omega_max * k as f64 / n as f64;
        let fw = f(w);
        if f_prev == 0.0 {
            roots.push(w_prev);
        } else if f_prev * fw < 0.0 {
            let (mut lo, mut hi) = (w_prev, w);
            let mut flo = f_prev;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if hi - lo < 1e-12 * (1.0 + mid) {
                    break;
                }
                let fm = f(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        w_prev = w;
        f_prev = fw;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(roots)
}

/// Admissible (W^E, w) points of the pure-imaginary-root locus at one W^IE,
/// sorted by W^E. Filters: W^E > 0, biologically admissible equilibrium, and
/// residual |C_k(i w)| below [`CURVE_RESIDUAL_TOL`].
pub fn curve_points_at(
    params: &ModelParams,
    rk: Complex64,
    kernel: DelayKernel,
    opts: &OmegaScanOpts,
) -> Result<Vec<(f64, f64)>, HopfError> {
    let c = lin_coeffs(params);
    let omegas = hopf_omega_equation_with(&c, rk, kernel, opts)?;
    let mut out = Vec::new();
    for w in omegas {
        let we = w_e_hopf(&c, rk, kernel, w);
        if !(we.is_finite() && we > 0.0) {
            continue;
        }
        let candidate = params.with_weights(params.w_ie, we);
        if !equilibrium(&candidate).is_admissible() {
            continue;
        }
        let factor = CharFactor::from_params(&candidate, rk, kernel);
        if factor.eval(Complex64::new(0.0, w))?.norm() < CURVE_RESIDUAL_TOL {
            out.push((we, w));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Hopf curves for one eigenvalue by sweeping the w-equation over the W^IE
/// grid. Multiple admissible roots per W^IE are split into branches by
/// ascending W^E (branch 0 is the lowest).
pub fn hopf_curve_closed(
    params: &ModelParams,
    rk: Complex64,
    kernel: DelayKernel,
    w_ie_grid: &[f64],
) -> Result<Vec<HopfCurve>, HopfError> {
    let opts = OmegaScanOpts::default();
    let columns: Result<Vec<Vec<(f64, f64)>>, HopfError> = w_ie_grid
        .par_iter()
        .map(|&w_ie| curve_points_at(&params.with_weights(w_ie, 0.0), rk, kernel, &opts))
        .collect();
    let columns = columns?;
    let branches = columns.iter().map(Vec::len).max().unwrap_or(0);
    let mut curves = Vec::with_capacity(branches);
    for b in 0..branches {
        let samples: Vec<CurveSample> = w_ie_grid
            .iter()
            .zip(&columns)
            .filter_map(|(&w_ie, col)| {
                col.get(b).map(|&(w_e, omega)| CurveSample { w_ie, w_e, omega })
            })
            .collect();
        curves.push(HopfCurve {
            rk,
            kernel,
            samples,
            branch: branch_of(rk),
            method: CurveMethod::ClosedForm,
        });
    }
    Ok(curves)
}

/// The synchronous (r_k = 1) Hopf curve.
pub fn sync_curve(
    params: &ModelParams,
    kernel: DelayKernel,
    w_ie_grid: &[f64],
) -> Result<HopfCurve, HopfError> {
    let mut curves = hopf_curve_closed(params, Complex64::new(1.0, 0.0), kernel, w_ie_grid)?;
    if curves.is_empty() {
        return Ok(HopfCurve {
            rk: Complex64::new(1.0, 0.0),
            kernel,
            samples: Vec::new(),
            branch: Branch::Synchronous,
            method: CurveMethod::ClosedForm,
        });
    }
    Ok(curves.remove(0))
}

/// All asynchronous curves for an eigenvalue, including the conjugate
/// partner's when the eigenvalue is complex (its w > 0 roots are this
/// factor's w < 0 roots). Curves are sorted by their median W^E, lowest
/// first.
pub fn asynchronous_curves(
    params: &ModelParams,
    rk: Complex64,
    kernel: DelayKernel,
    w_ie_grid: &[f64],
) -> Result<Vec<HopfCurve>, HopfError> {
    let mut curves = hopf_curve_closed(params, rk, kernel, w_ie_grid)?;
    if rk.im.abs() > 1e-12 {
        curves.extend(hopf_curve_closed(params, rk.conj(), kernel, w_ie_grid)?);
    }
    curves.retain(|c| !c.samples.is_empty());
    curves.sort_by(|a, b| median_w_e(a).total_cmp(&median_w_e(b)));
    Ok(curves)
}

fn median_w_e(curve: &HopfCurve) -> f64 {
    let mut v: Vec<f64> = curve.samples.iter().map(|s| s.w_e).collect();
    if v.is_empty() {
        return f64::INFINITY;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Grid-boundary extraction: evaluate the max root real part of the factor
/// on a (W^IE, W^E) lattice and mark, per column, the crossings where the
/// sign flips from negative to positive while scanning W^E upward. The k-th
/// crossing of each column forms curve k. The crossing W^E is placed by
/// linear interpolation of the max real part along the column edge; w comes
/// from the witness root at the nearest grid node.
pub fn hopf_curve_grid(
    params: &ModelParams,
    rk: Complex64,
    kernel: DelayKernel,
    w_ie_range: (f64, f64),
    w_e_range: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<Vec<HopfCurve>, HopfError> {
    if nx < 32 || ny < 32 {
        return Err(HopfError::GridTooCoarse(nx, ny));
    }
    if !(w_ie_range.1 > w_ie_range.0 && w_e_range.1 > w_e_range.0 && w_ie_range.0 >= 0.0) {
        return Err(HopfError::BadRange);
    }
    let xs = linspace(w_ie_range.0, w_ie_range.1, nx);
    let ys = linspace(w_e_range.0, w_e_range.1, ny);
    let radius = spectral::DEFAULT_DISK_RADIUS;

    let columns: Result<Vec<Vec<(f64, f64)>>, HopfError> = xs
        .par_iter()
        .map(|&w_ie| {
            let coeffs = lin_coeffs(&params.with_weights(w_ie, 0.0));
            let mut crossings = Vec::new();
            let mut prev: Option<(f64, f64, f64)> = None; // (w_e, max_re, |Im witness|)
            for &w_e in &ys {
                let factor = CharFactor::from_parts(coeffs, w_e, rk, kernel);
                let scan = spectral::max_real_part(&factor, radius)?;
                let om = scan.witness_root.map_or(0.0, |z| z.im.abs());
                let re = scan.max_real_part;
                if let Some((we_prev, re_prev, om_prev)) = prev {
                    if re_prev < 0.0 && re >= 0.0 && re_prev.is_finite() {
                        let t = -re_prev / (re - re_prev);
                        let w_cross = we_prev + t * (w_e - we_prev);
                        let omega = if re_prev.abs() <= re.abs() { om_prev } else { om };
                        crossings.push((w_cross, omega));
                    }
                }
                prev = Some((w_e, re, om));
            }
            Ok(crossings)
        })
        .collect();
    let columns = columns?;

    let branches = columns.iter().map(Vec::len).max().unwrap_or(0);
    let mut curves = Vec::with_capacity(branches);
    for b in 0..branches {
        let samples: Vec<CurveSample> = xs
            .iter()
            .zip(&columns)
            .filter_map(|(&w_ie, col)| {
                col.get(b).map(|&(w_e, omega)| CurveSample { w_ie, w_e, omega })
            })
            .collect();
        curves.push(HopfCurve {
            rk,
            kernel,
            samples,
            branch: branch_of(rk),
            method: CurveMethod::GridBoundary,
        });
    }
    Ok(curves)
}

/// Pointwise ordering report between a synchronous and an asynchronous curve
/// on the overlap of their w_ie ranges.
#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    /// (w_ie, async W^E - sync W^E) on the comparison grid.
    pub differences: Vec<(f64, f64)>,
    /// Intervals of w_ie where the asynchronous curve lies below.
    pub async_below: Vec<(f64, f64)>,
    /// Samples of real-eigenvalue zero-delay curves violating
    /// 1/(alpha K1) <= W^E < (1 + tau1)/(alpha K1).
    pub bound_violations: usize,
}

impl OrderReport {
    pub fn async_above_everywhere(&self) -> bool {
        self.async_below.is_empty() && self.differences.iter().all(|&(_, d)| d > 0.0)
    }
}

pub fn curve_order_check(
    sync: &HopfCurve,
    async_curve: &HopfCurve,
    params: &ModelParams,
) -> Result<OrderReport, HopfError> {
    let (lo_s, hi_s) = sync.w_ie_range().ok_or(HopfError::EmptyOverlap)?;
    let (lo_a, hi_a) = async_curve.w_ie_range().ok_or(HopfError::EmptyOverlap)?;
    let lo = lo_s.max(lo_a);
    let hi = hi_s.min(hi_a);
    if !(hi > lo) {
        return Err(HopfError::EmptyOverlap);
    }
    let grid: Vec<f64> = sync
        .samples
        .iter()
        .map(|s| s.w_ie)
        .filter(|&w| w >= lo && w <= hi)
        .collect();
    let mut differences = Vec::with_capacity(grid.len());
    let mut async_below: Vec<(f64, f64)> = Vec::new();
    let mut below_start: Option<f64> = None;
    for &w in &grid {
        let (ws, _) = sync.interpolate(w).ok_or(HopfError::EmptyOverlap)?;
        let (wa, _) = async_curve.interpolate(w).ok_or(HopfError::EmptyOverlap)?;
        let d = wa - ws;
        differences.push((w, d));
        if d < 0.0 {
            below_start.get_or_insert(w);
        } else if let Some(start) = below_start.take() {
            async_below.push((start, w));
        }
    }
    if let Some(start) = below_start {
        async_below.push((start, hi));
    }

    let mut bound_violations = 0;
    let k1 = lin_coeffs(params).k1;
    for curve in [sync, async_curve] {
        if curve.kernel == DelayKernel::NoDelay && curve.rk.im.abs() <= 1e-12 && curve.rk.re > 0.0
        {
            let lo_bound = 1.0 / (curve.rk.re * k1);
            let hi_bound = (1.0 + params.tau1) / (curve.rk.re * k1);
            for s in &curve.samples {
                if s.w_e < lo_bound - 1e-9 || s.w_e >= hi_bound {
                    bound_violations += 1;
                }
            }
        }
    }
    Ok(OrderReport {
        differences,
        async_below,
        bound_violations,
    })
}

/// Intersection of a synchronous and an asynchronous Hopf curve: a point
/// where two distinct pairs of eigenvalues sit on the imaginary axis at
/// once.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DoubleHopfPoint {
    pub w_ie: f64,
    pub w_e: f64,
    pub omega_sync: f64,
    pub omega_async: f64,
}

/// Locates sign changes of async - sync along the overlap and refines each
/// crossing. Curves built per-W^IE are refined by bisection on fresh curve
/// evaluations until the W^E gap drops below [`INTERSECTION_TOL`];
/// grid-boundary curves fall back to the interpolated crossing.
pub fn find_double_hopf(
    params: &ModelParams,
    sync: &HopfCurve,
    async_curve: &HopfCurve,
) -> Result<Vec<DoubleHopfPoint>, HopfError> {
    let (lo_s, hi_s) = match sync.w_ie_range() {
        Some(r) => r,
        None => return Ok(Vec::new()),
    };
    let (lo_a, hi_a) = match async_curve.w_ie_range() {
        Some(r) => r,
        None => return Ok(Vec::new()),
    };
    let lo = lo_s.max(lo_a);
    let hi = hi_s.min(hi_a);
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    let mut grid: Vec<f64> = sync
        .samples
        .iter()
        .chain(&async_curve.samples)
        .map(|s| s.w_ie)
        .filter(|&w| w >= lo && w <= hi)
        .collect();
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let diff = |w: f64| -> Option<f64> {
        let (ws, _) = sync.interpolate(w)?;
        let (wa, _) = async_curve.interpolate(w)?;
        Some(wa - ws)
    };
    let mut points = Vec::new();
    for pair in grid.windows(2) {
        let (w0, w1) = (pair[0], pair[1]);
        let (d0, d1) = match (diff(w0), diff(w1)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        if d0 == 0.0 {
            // exact touch at a sample
            if let Some(p) = refine_crossing(params, sync, async_curve, w0, w0) {
                points.push(p);
            }
            continue;
        }
        if d0 * d1 < 0.0 {
            if let Some(p) = refine_crossing(params, sync, async_curve, w0, w1) {
                points.push(p);
            }
        }
    }
    points.dedup_by(|a, b| (a.w_ie - b.w_ie).abs() < 1e-6);
    Ok(points)
}

fn refine_crossing(
    params: &ModelParams,
    sync: &HopfCurve,
    async_curve: &HopfCurve,
    mut lo: f64,
    mut hi: f64,
) -> Option<DoubleHopfPoint> {
    let closed =
        sync.method == CurveMethod::ClosedForm && async_curve.method == CurveMethod::ClosedForm;
    let eval = |curve: &HopfCurve, w: f64| -> Option<(f64, f64)> {
        let hint = curve.interpolate(w)?;
        if !closed {
            return Some(hint);
        }
        let opts = OmegaScanOpts::default();
        let pts = curve_points_at(&params.with_weights(w, 0.0), curve.rk, curve.kernel, &opts)
            .ok()?;
        pts.into_iter()
            .min_by(|a, b| (a.0 - hint.0).abs().total_cmp(&(b.0 - hint.0).abs()))
            .map(|(we, om)| (we, om))
    };
    let d = |w: f64| -> Option<(f64, f64, f64, f64)> {
        let (ws, os) = eval(sync, w)?;
        let (wa, oa) = eval(async_curve, w)?;
        Some((wa - ws, 0.5 * (wa + ws), os, oa))
    };
    let (mut dlo, ..) = d(lo)?;
    let mut best = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let (dm, we, os, oa) = d(mid)?;
        best = Some(DoubleHopfPoint {
            w_ie: mid,
            w_e: we,
            omega_sync: os,
            omega_async: oa,
        });
        if dm.abs() < INTERSECTION_TOL || hi - lo < 1e-13 * (1.0 + mid) {
            break;
        }
        if dlo * dm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            dlo = dm;
        }
    }
    best
}
