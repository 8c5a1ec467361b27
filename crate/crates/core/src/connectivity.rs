//! Row-sum-1 connectivity matrices and their eigenstructure.
//!
//! The coupling matrix of the network is `W^E * L` where every row of L sums
//! to one and the diagonal is zero (no excitatory self-coupling). The
//! eigenvalues of L drive the whole linear analysis: each eigenvalue r_k
//! contributes one factor to the network characteristic equation. For
//! circulant matrices the eigenpairs are written down analytically; general
//! matrices go through a numerical eigensolve with an explicit
//! diagonalizability check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

const ROW_SUM_TOL: f64 = 1e-9;
const DEFAULT_COND_LIMIT: f64 = 1e8;

#[derive(Debug, Error)]
pub enum ConnectivityError {
    #[error("ring needs at least 3 nodes, got {0}")]
    RingTooSmall(usize),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must be at least 2x2")]
    TooSmall,
    #[error("row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("nonzero diagonal entry {value} at row {row}")]
    NonzeroDiagonal { row: usize, value: f64 },
    #[error("eigenvector matrix condition number {cond:.3e} exceeds {limit:.1e}; matrix treated as non-diagonalizable")]
    NotDiagonalizable { cond: f64, limit: f64 },
    #[error("all eigenvalues equal 1; no nontrivial eigenvalue exists")]
    Degenerate,
    #[error("unrecognized connectivity spec `{0}` (expected \"uni:N\" or \"bi:N\")")]
    BadSpec(String),
    #[error("CSV parse error: {0}")]
    Csv(String),
}

/// A validated coupling structure: the normalized matrix together with its
/// eigenvalues (sorted by descending real part, ties by ascending imaginary
/// part) and matching eigenvectors.
#[derive(Debug, Clone)]
pub struct Connectivity {
    pub n: usize,
    pub l_matrix: DMatrix<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Vec<DVector<Complex64>>,
    pub is_circulant: bool,
    /// Circulant generator (l_0 = 0, l_1, ..., l_{n-1}) when built from one.
    pub first_row: Option<Vec<f64>>,
}

impl Connectivity {
    /// Eigenvalues with conjugate pairs collapsed to their upper-half-plane
    /// representative; stability scans only need one member of each pair.
    pub fn distinct_eigenvalues(&self) -> Vec<Complex64> {
        let mut reps: Vec<Complex64> = Vec::new();
        for ev in &self.eigenvalues {
            let rep = Complex64::new(ev.re, ev.im.abs());
            if !reps.iter().any(|r| (r - rep).norm() <= 1e-12) {
                reps.push(rep);
            }
        }
        reps
    }

    /// Eigenvalue(s) with the largest real part among those different from 1,
    /// as (value, multiplicity) pairs. A conjugate pair ties by construction
    /// and both members are returned.
    pub fn dominant_nontrivial(&self) -> Result<Vec<(Complex64, usize)>, ConnectivityError> {
        let one = Complex64::new(1.0, 0.0);
        let nontrivial: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .copied()
            .filter(|ev| (ev - one).norm() > 1e-9)
            .collect();
        if nontrivial.is_empty() {
            return Err(ConnectivityError::Degenerate);
        }
        let best = nontrivial.iter().map(|ev| ev.re).fold(f64::MIN, f64::max);
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        for ev in nontrivial {
            if ev.re >= best - 1e-12 {
                if let Some(entry) = out.iter_mut().find(|(v, _)| (*v - ev).norm() <= 1e-12) {
                    entry.1 += 1;
                } else {
                    out.push((ev, 1));
                }
            }
        }
        out.sort_by(|a, b| a.0.im.total_cmp(&b.0.im));
        Ok(out)
    }
}

fn sort_eigenpairs(pairs: &mut Vec<(Complex64, DVector<Complex64>)>) {
    // real parts within 1e-12 count as tied so floating noise cannot
    // scramble conjugate pairs
    pairs.sort_by(|a, b| {
        if (a.0.re - b.0.re).abs() <= 1e-12 {
            a.0.im.total_cmp(&b.0.im)
        } else {
            b.0.re.total_cmp(&a.0.re)
        }
    });
}

fn circulant(n: usize, first_row: Vec<f64>) -> Connectivity {
    let mut l = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = first_row[(j + n - i) % n];
        }
    }
    let mut pairs: Vec<(Complex64, DVector<Complex64>)> = (0..n)
        .map(|k| {
            let rho = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
            let ev = (0..n)
                .map(|j| first_row[j] * rho.powu(j as u32))
                .sum::<Complex64>();
            let v = DVector::from_iterator(n, (0..n).map(|j| rho.powu(j as u32)));
            (ev, v)
        })
        .collect();
    sort_eigenpairs(&mut pairs);
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Connectivity {
        n,
        l_matrix: l,
        eigenvalues,
        eigenvectors,
        is_circulant: true,
        first_row: Some(first_row),
    }
}

/// Unidirectional ring: circ{0, 1, 0, ..., 0}. Eigenvalues are the n-th
/// roots of unity.
pub fn uni_ring(n: usize) -> Result<Connectivity, ConnectivityError> {
    if n < 3 {
        return Err(ConnectivityError::RingTooSmall(n));
    }
    let mut row = vec![0.0; n];
    row[1] = 1.0;
    Ok(circulant(n, row))
}

/// Bidirectional ring: circ{0, 1/2, 0, ..., 0, 1/2}. Eigenvalues are
/// cos(2 pi j / n), all real.
pub fn bi_ring(n: usize) -> Result<Connectivity, ConnectivityError> {
    if n < 3 {
        return Err(ConnectivityError::RingTooSmall(n));
    }
    let mut row = vec![0.0; n];
    row[1] = 0.5;
    row[n - 1] = 0.5;
    Ok(circulant(n, row))
}

/// Build from a raw matrix: validates the row-sum/diagonal/sign constraints,
/// then computes the eigen-decomposition numerically. Rejects matrices whose
/// eigenvector basis is too ill-conditioned to trust the factorization.
pub fn from_matrix(raw: DMatrix<f64>) -> Result<Connectivity, ConnectivityError> {
    from_matrix_with(raw, DEFAULT_COND_LIMIT)
}

pub fn from_matrix_with(
    raw: DMatrix<f64>,
    cond_limit: f64,
) -> Result<Connectivity, ConnectivityError> {
    let (rows, cols) = raw.shape();
    if rows != cols {
        return Err(ConnectivityError::NotSquare { rows, cols });
    }
    if rows < 2 {
        return Err(ConnectivityError::TooSmall);
    }
    let n = rows;
    for i in 0..n {
        if raw[(i, i)] != 0.0 {
            return Err(ConnectivityError::NonzeroDiagonal {
                row: i,
                value: raw[(i, i)],
            });
        }
        let mut sum = 0.0;
        for j in 0..n {
            let v = raw[(i, j)];
            if v < 0.0 {
                return Err(ConnectivityError::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(ConnectivityError::RowSum { row: i, sum });
        }
    }

    let complex: DMatrix<Complex64> = raw.map(|v| Complex64::new(v, 0.0));
    let eigenvalues = raw.clone().complex_eigenvalues();
    let mut pairs: Vec<(Complex64, DVector<Complex64>)> = Vec::with_capacity(n);
    // Group numerically coincident eigenvalues so repeated ones get a full
    // set of independent eigenvectors out of the nullspace SVD.
    let mut evs: Vec<Complex64> = eigenvalues.iter().copied().collect();
    evs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut idx = 0;
    while idx < evs.len() {
        let mut mult = 1;
        while idx + mult < evs.len() && (evs[idx + mult] - evs[idx]).norm() <= 1e-8 {
            mult += 1;
        }
        let lambda: Complex64 =
            evs[idx..idx + mult].iter().sum::<Complex64>() / mult as f64;
        let mut shifted = complex.clone();
        for d in 0..n {
            shifted[(d, d)] -= lambda;
        }
        let svd = shifted.svd(false, true);
        let v_t = svd
            .v_t
            .expect("requested right singular vectors");
        // nullspace basis: rows of V^H for the smallest singular values
        for r in 0..mult {
            let row = v_t.row(n - 1 - r);
            let vec = DVector::from_iterator(n, row.iter().map(|c| c.conj()));
            pairs.push((lambda, vec));
        }
        idx += mult;
    }

    // condition number of the eigenvector matrix
    let mut p = DMatrix::<Complex64>::zeros(n, n);
    for (k, (_, v)) in pairs.iter().enumerate() {
        p.set_column(k, v);
    }
    let sv = p.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = sv.iter().fold(f64::MAX, |a, &b| a.min(b));
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond < cond_limit) {
        return Err(ConnectivityError::NotDiagonalizable {
            cond,
            limit: cond_limit,
        });
    }

    sort_eigenpairs(&mut pairs);
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(Connectivity {
        n,
        l_matrix: raw,
        eigenvalues,
        eigenvectors,
        is_circulant: false,
        first_row: None,
    })
}

/// Parse a preset spec: "uni:N" or "bi:N".
pub fn parse_spec(spec: &str) -> Result<Connectivity, ConnectivityError> {
    let (kind, count) = spec
        .split_once(':')
        .ok_or_else(|| ConnectivityError::BadSpec(spec.to_string()))?;
    let n: usize = count
        .trim()
        .parse()
        .map_err(|_| ConnectivityError::BadSpec(spec.to_string()))?;
    match kind.trim() {
        "uni" => uni_ring(n),
        "bi" => bi_ring(n),
        _ => Err(ConnectivityError::BadSpec(spec.to_string())),
    }
}

/// Parse an n x n matrix from CSV text (n rows of n comma-separated floats).
pub fn from_csv(text: &str) -> Result<Connectivity, ConnectivityError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|tok| tok.trim().parse()).collect();
        let row =
            row.map_err(|e| ConnectivityError::Csv(format!("line {}: {e}", lineno + 1)))?;
        rows.push(row);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(ConnectivityError::Csv(format!(
            "expected {n} columns in each of {n} rows"
        )));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    from_matrix(DMatrix::from_row_slice(n, n, &flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn assert_eigenvalue_sets_match(a: &[Complex64], b: &[Complex64], tol: f64) {
        assert_eq!(a.len(), b.len());
        let mut used = vec![false; b.len()];
        for x in a {
            let hit = b
                .iter()
                .enumerate()
                .find(|(i, y)| !used[*i] && (*y - x).norm() <= tol);
            match hit {
                Some((i, _)) => used[i] = true,
                None => panic!("eigenvalue {x} unmatched (tol {tol})"),
            }
        }
    }

    #[test]
    fn uni_ring_four_has_fourth_roots_of_unity() {
        let c = uni_ring(4).unwrap();
        let expected = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        assert_eigenvalue_sets_match(&c.eigenvalues, &expected, 1e-14);
    }

    #[test]
    fn uni_ring_rows_sum_to_one_and_av_equals_rv() {
        for n in [3usize, 5, 10, 17] {
            let c = uni_ring(n).unwrap();
            for i in 0..n {
                assert_abs_diff_eq!(c.l_matrix.row(i).sum(), 1.0);
                assert_eq!(c.l_matrix[(i, i)], 0.0);
            }
            for (ev, v) in c.eigenvalues.iter().zip(&c.eigenvectors) {
                let av = c.l_matrix.map(|x| Complex64::new(x, 0.0)) * v;
                for i in 0..n {
                    assert!((av[i] - ev * v[i]).norm() < 1e-12);
                }
                assert!(ev.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn uni_ring_dominant_pair() {
        let c = uni_ring(10).unwrap();
        let dom = c.dominant_nontrivial().unwrap();
        assert_eq!(dom.len(), 2);
        let angle = TAU / 10.0;
        assert_relative_eq!(dom[0].0.re, angle.cos(), epsilon = 1e-12);
        assert_relative_eq!(dom[1].0.re, angle.cos(), epsilon = 1e-12);
        assert_relative_eq!(dom[0].0.im, -angle.sin(), epsilon = 1e-12);
        assert_relative_eq!(dom[1].0.im, angle.sin(), epsilon = 1e-12);
        assert_eq!(dom[0].1, 1);

        let c4 = uni_ring(4).unwrap();
        let dom4 = c4.dominant_nontrivial().unwrap();
        assert_eq!(dom4.len(), 2);
        assert_abs_diff_eq!(dom4[0].0.im, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dom4[1].0.im, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bi_ring_real_spectrum_and_symmetry() {
        let c = bi_ring(8).unwrap();
        assert_eq!(c.l_matrix, c.l_matrix.transpose());
        for ev in &c.eigenvalues {
            assert_abs_diff_eq!(ev.im, 0.0, epsilon = 1e-14);
        }
        let dom = c.dominant_nontrivial().unwrap();
        assert_eq!(dom.len(), 1);
        assert_relative_eq!(dom[0].0.re, (TAU / 8.0).cos(), epsilon = 1e-12);
        assert_eq!(dom[0].1, 2, "conjugate slot collapses to multiplicity 2");
    }

    #[test]
    fn bi_ring_four_spectrum() {
        let c = bi_ring(4).unwrap();
        let expected = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ];
        assert_eigenvalue_sets_match(&c.eigenvalues, &expected, 1e-14);
    }

    #[test]
    fn ring_size_guard() {
        assert!(uni_ring(2).is_err());
        assert!(bi_ring(1).is_err());
    }

    #[test]
    fn from_matrix_round_trips_uni_ring() {
        let reference = uni_ring(5).unwrap();
        let rebuilt = from_matrix(reference.l_matrix.clone()).unwrap();
        assert_eigenvalue_sets_match(&rebuilt.eigenvalues, &reference.eigenvalues, 1e-10);
        assert!(!rebuilt.is_circulant);
    }

    #[test]
    fn from_matrix_validates() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 0.9, 1.0, 0.0]);
        assert!(matches!(
            from_matrix(bad),
            Err(ConnectivityError::RowSum { row: 0, .. })
        ));
        let negative = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 2.0]);
        assert!(from_matrix(negative).is_err());
        let diag = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 1.0, 0.0]);
        assert!(matches!(
            from_matrix(diag),
            Err(ConnectivityError::NonzeroDiagonal { .. })
        ));
    }

    #[test]
    fn all_to_all_spectrum() {
        for n in [4usize, 7] {
            let w = 1.0 / (n as f64 - 1.0);
            let m = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { w });
            let c = from_matrix(m).unwrap();
            let mut expected = vec![Complex64::new(-w, 0.0); n - 1];
            expected.push(Complex64::new(1.0, 0.0));
            assert_eigenvalue_sets_match(&c.eigenvalues, &expected, 1e-9);
        }
    }

    #[test]
    fn diagonalization_quality_of_presets() {
        for n in [8usize, 16, 64] {
            let c = uni_ring(n).unwrap();
            let mut p = DMatrix::<Complex64>::zeros(n, n);
            for (k, v) in c.eigenvectors.iter().enumerate() {
                p.set_column(k, v);
            }
            let a = c.l_matrix.map(|x| Complex64::new(x, 0.0));
            let d = p.clone().lu().solve(&(a * &p)).expect("P invertible");
            let mut off = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off += d[(i, j)].norm_sqr();
                    }
                    if i == j {
                        assert!((d[(i, j)] - c.eigenvalues[i]).norm() < 1e-9);
                    }
                }
            }
            assert!(off.sqrt() < 1e-9, "off-diagonal norm {}", off.sqrt());
        }
    }

    #[test]
    fn eigenvalue_ordering_convention() {
        let c = uni_ring(6).unwrap();
        for w in c.eigenvalues.windows(2) {
            let tied = (w[0].re - w[1].re).abs() <= 1e-12;
            assert!(
                (tied && w[0].im <= w[1].im) || (!tied && w[0].re > w[1].re),
                "ordering violated: {} then {}",
                w[0],
                w[1]
            );
        }
        assert_relative_eq!(c.eigenvalues[0].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spec_and_csv_parsing() {
        let c = parse_spec("bi:6").unwrap();
        assert_eq!(c.n, 6);
        assert!(parse_spec("tri:6").is_err());
        assert!(parse_spec("uni").is_err());

        let csv = "0, 0.5, 0.5\n0.5, 0, 0.5\n0.5, 0.5, 0\n";
        let c = from_csv(csv).unwrap();
        assert_eq!(c.n, 3);
        assert!(from_csv("0, 1\n1").is_err());
    }
}
