//! Polynomial utilities: evaluation, arithmetic on real coefficient vectors,
//! and root finding through a companion-matrix eigensolve.
//!
//! Coefficients are stored in ascending order, `c[0] + c[1] x + ... + c[n] x^n`.
//! The eigensolver is a shifted QR iteration on the (upper Hessenberg)
//! companion matrix with complex arithmetic, so polynomials with complex
//! coefficients are handled directly; roots are tightened afterwards with a
//! few Newton steps.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("polynomial has no nonzero coefficients")]
    ZeroPolynomial,
    #[error("QR iteration failed to converge after {0} sweeps")]
    QrNoConvergence(usize),
}

/// Horner evaluation.
pub fn eval(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Horner evaluation of the derivative.
pub fn eval_deriv(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * x + c * k as f64;
    }
    acc
}

pub fn real_to_complex(coeffs: &[f64]) -> Vec<Complex64> {
    coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect()
}

/// Product of two real polynomials.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Sum of two real polynomials.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        out[i] += ai;
    }
    for (i, &bi) in b.iter().enumerate() {
        out[i] += bi;
    }
    out
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|&c| c * s).collect()
}

/// All complex roots of the polynomial. Exact zero roots are peeled off,
/// near-zero leading coefficients are dropped relative to the largest
/// coefficient magnitude.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, PolyError> {
    let max_mag = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_mag == 0.0 {
        return Err(PolyError::ZeroPolynomial);
    }
    let mut trimmed: Vec<Complex64> = coeffs.to_vec();
    while let Some(last) = trimmed.last() {
        if last.norm() <= 1e-14 * max_mag && trimmed.len() > 1 {
            trimmed.pop();
        } else {
            break;
        }
    }
    let mut c = trimmed.clone();
    let mut zero_roots = 0usize;
    while c.len() > 1 && c[0].norm() == 0.0 {
        c.remove(0);
        zero_roots += 1;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); zero_roots];
    let deg = c.len() - 1;
    match deg {
        0 => {}
        1 => out.push(-c[0] / c[1]),
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = (b * b - 4.0 * a * cc).sqrt();
            // pick the sign that avoids cancellation in -b -+ disc
            let s = if (b + disc).norm() >= (b - disc).norm() {
                disc
            } else {
                -disc
            };
            let q = -0.5 * (b + s);
            out.push(q / a);
            out.push(cc / q);
        }
        _ => {
            let monic: Vec<Complex64> = c[..deg].iter().map(|&ci| ci / c[deg]).collect();
            let eigs = companion_eigenvalues(&monic)?;
            out.extend(eigs);
        }
    }
    // Newton touch-up against the untrimmed polynomial; keep a step only
    // while the residual improves.
    for root in out.iter_mut() {
        let mut best = *root;
        let mut best_res = eval(&trimmed, best).norm();
        let mut z = best;
        for _ in 0..4 {
            let d = eval_deriv(&trimmed, z);
            if d.norm() == 0.0 {
                break;
            }
            z -= eval(&trimmed, z) / d;
            let res = eval(&trimmed, z).norm();
            if res < best_res {
                best_res = res;
                best = z;
            } else {
                break;
            }
        }
        *root = best;
    }
    Ok(out)
}

/// Real roots of a real-coefficient polynomial, deduplicated. A complex root
/// is accepted as real when |Im| <= im_tol * (1 + |Re|).
pub fn real_roots(coeffs: &[f64], im_tol: f64) -> Result<Vec<f64>, PolyError> {
    let mut out: Vec<f64> = roots(&real_to_complex(coeffs))?
        .into_iter()
        .filter(|z| z.im.abs() <= im_tol * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * (1.0 + a.abs()));
    Ok(out)
}

/// Eigenvalues of the companion matrix of a monic polynomial
/// `x^n + m[n-1] x^{n-1} + ... + m[0]` via complex shifted QR.
fn companion_eigenvalues(monic: &[Complex64]) -> Result<Vec<Complex64>, PolyError> {
    let n = monic.len();
    // top-row companion form, upper Hessenberg
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        h[j] = -monic[n - 1 - j];
    }
    for i in 1..n {
        h[i * n + i - 1] = Complex64::new(1.0, 0.0);
    }
    balance(&mut h, n);
    hessenberg_qr(h, n)
}

/// Parlett-Reinsch balancing restricted to the Hessenberg band; scales by
/// powers of two so it is exact in floating point.
fn balance(h: &mut [Complex64], n: usize) {
    let radix = 2.0f64;
    for _ in 0..32 {
        let mut converged = true;
        for i in 0..n {
            let mut row = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                if j != i {
                    row += h[i * n + j].norm();
                    col += h[j * n + i].norm();
                }
            }
            if row == 0.0 || col == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let mut c = col;
            let s = col + row;
            while c < row / radix {
                c *= radix;
                f *= radix;
            }
            while c > row * radix {
                c /= radix;
                f /= radix;
            }
            if (col * f + row / f) < 0.95 * s && f != 1.0 {
                converged = false;
                for j in 0..n {
                    h[i * n + j] /= f;
                    h[j * n + i] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Shifted QR iteration on a complex upper Hessenberg matrix.
fn hessenberg_qr(mut h: Vec<Complex64>, n: usize) -> Result<Vec<Complex64>, PolyError> {
    let eps = f64::EPSILON;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter_in_block = 0usize;
    let max_total = 60 * n;
    let mut total = 0usize;
    while hi > 0 {
        if total > max_total {
            return Err(PolyError::QrNoConvergence(max_total));
        }
        // deflate negligible subdiagonals
        for k in 1..hi {
            let sub = h[k * n + k - 1].norm();
            if sub <= eps * (h[(k - 1) * n + k - 1].norm() + h[k * n + k].norm()) {
                h[k * n + k - 1] = Complex64::new(0.0, 0.0);
            }
        }
        if hi == 1 || h[(hi - 1) * n + hi - 2].norm() == 0.0 {
            eigs.push(h[(hi - 1) * n + hi - 1]);
            hi -= 1;
            iter_in_block = 0;
            continue;
        }
        // active block [lo, hi)
        let mut lo = hi - 1;
        while lo > 0 && h[lo * n + lo - 1].norm() != 0.0 {
            lo -= 1;
        }
        let shift = if iter_in_block > 0 && iter_in_block % 12 == 0 {
            // exceptional shift to break stagnation
            Complex64::new(
                1.5 * h[(hi - 1) * n + hi - 2].norm(),
                0.75 * h[(hi - 1) * n + hi - 1].norm(),
            )
        } else {
            wilkinson_shift(
                h[(hi - 2) * n + hi - 2],
                h[(hi - 2) * n + hi - 1],
                h[(hi - 1) * n + hi - 2],
                h[(hi - 1) * n + hi - 1],
            )
        };
        qr_step(&mut h, n, lo, hi, shift);
        iter_in_block += 1;
        total += 1;
    }
    Ok(eigs)
}

/// Eigenvalue of the trailing 2x2 block closest to its bottom-right entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR sweep on rows/cols [lo, hi): factor H - sI with
/// Givens rotations, then form RQ + sI.
fn qr_step(h: &mut [Complex64], n: usize, lo: usize, hi: usize, shift: Complex64) {
    for k in lo..hi {
        h[k * n + k] -= shift;
    }
    let mut rot = Vec::with_capacity(hi - lo);
    for k in lo..hi - 1 {
        let (c, s) = givens(h[k * n + k], h[(k + 1) * n + k]);
        rot.push((c, s));
        for j in k..hi {
            let x = h[k * n + j];
            let y = h[(k + 1) * n + j];
            h[k * n + j] = c * x + s * y;
            h[(k + 1) * n + j] = -s.conj() * x + c * y;
        }
    }
    for (idx, &(c, s)) in rot.iter().enumerate() {
        let k = lo + idx;
        // right-multiply by G^H on columns (k, k+1)
        for i in lo..(k + 2).min(hi) {
            let x = h[i * n + k];
            let y = h[i * n + k + 1];
            h[i * n + k] = c * x + s.conj() * y;
            h[i * n + k + 1] = -s * x + c * y;
        }
    }
    for k in lo..hi {
        h[k * n + k] += shift;
    }
}

/// Complex Givens rotation: returns (c, s) with c real such that
/// [c s; -conj(s) c] * [a; b] = [r; 0].
fn givens(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (Complex64::new(0.0, 0.0), b.conj() / nb);
    }
    let r = (na * na + nb * nb).sqrt();
    let c = Complex64::new(na / r, 0.0);
    let s = (a / na) * b.conj() / r;
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        c
    }

    fn assert_root_sets_match(found: &[Complex64], expected: &[Complex64], tol: f64) {
        assert_eq!(found.len(), expected.len());
        let mut used = vec![false; expected.len()];
        for f in found {
            let mut hit = false;
            for (i, e) in expected.iter().enumerate() {
                if !used[i] && (f - e).norm() <= tol {
                    used[i] = true;
                    hit = true;
                    break;
                }
            }
            assert!(hit, "no match for root {f} (tol {tol}) in {expected:?}");
        }
    }

    #[test]
    fn linear_and_quadratic() {
        let r = roots(&real_to_complex(&[-6.0, 3.0])).unwrap();
        assert_abs_diff_eq!(r[0].re, 2.0, epsilon = 1e-14);
        // (x-1)(x-4) = 4 - 5x + x^2
        let r = roots(&real_to_complex(&[4.0, -5.0, 1.0])).unwrap();
        assert_root_sets_match(
            &r,
            &[Complex64::new(1.0, 0.0), Complex64::new(4.0, 0.0)],
            1e-12,
        );
    }

    #[test]
    fn roots_of_unity() {
        for n in [3usize, 5, 8, 12] {
            let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
            c[0] = Complex64::new(-1.0, 0.0);
            c[n] = Complex64::new(1.0, 0.0);
            let found = roots(&c).unwrap();
            let expected: Vec<Complex64> = (0..n)
                .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
                .collect();
            assert_root_sets_match(&found, &expected, 1e-10);
        }
    }

    #[test]
    fn zero_roots_peeled() {
        // x^2 (x - 3)
        let r = roots(&real_to_complex(&[0.0, 0.0, -3.0, 1.0])).unwrap();
        let zeros = r.iter().filter(|z| z.norm() < 1e-12).count();
        assert_eq!(zeros, 2);
        assert!(r.iter().any(|z| (z - Complex64::new(3.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn random_complex_polynomials_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let deg = rng.gen_range(3..9);
            let expected: Vec<Complex64> = (0..deg)
                .map(|_| Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
                .collect();
            let c = poly_from_roots(&expected);
            let found = roots(&c).unwrap();
            assert_root_sets_match(&found, &expected, 1e-7);
            for z in &found {
                assert!(eval(&c, *z).norm() < 1e-8 * c.iter().map(|x| x.norm()).sum::<f64>());
            }
        }
    }

    #[test]
    fn widely_scaled_roots() {
        // mimics a cleared gamma factor: one root near -200, others near origin
        let expected = vec![
            Complex64::new(-200.0, 0.0),
            Complex64::new(-0.3, 0.9),
            Complex64::new(-0.3, -0.9),
            Complex64::new(0.05, 0.0),
        ];
        let c = poly_from_roots(&expected);
        let found = roots(&c).unwrap();
        assert_root_sets_match(&found, &expected, 1e-8);
    }

    #[test]
    fn real_root_filter() {
        // (x^2 + 1)(x - 2)(x + 5)
        let c = mul(&[1.0, 0.0, 1.0], &mul(&[-2.0, 1.0], &[5.0, 1.0]));
        let rr = real_roots(&c, 1e-9).unwrap();
        assert_eq!(rr.len(), 2);
        assert_abs_diff_eq!(rr[0], -5.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rr[1], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn degree_drop_when_leading_vanishes() {
        // leading coefficient ~ 0 relative to the rest
        let c = [
            Complex64::new(-2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1e-18, 0.0),
        ];
        let r = roots(&c).unwrap();
        assert_eq!(r.len(), 1);
        assert_abs_diff_eq!(r[0].re, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn real_poly_arithmetic() {
        let a = [1.0, 2.0];
        let b = [3.0, 0.0, 1.0];
        assert_eq!(mul(&a, &b), vec![3.0, 6.0, 1.0, 2.0]);
        assert_eq!(add(&a, &b), vec![4.0, 2.0, 1.0]);
        assert_eq!(scale(&a, -2.0), vec![-2.0, -4.0]);
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(roots(&[]).is_err());
        assert!(roots(&[Complex64::new(0.0, 0.0)]).is_err());
    }
}
