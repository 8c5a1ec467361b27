//! Root isolation for analytic functions by the argument principle.
//!
//! A rectangular region is subdivided until each sub-rectangle encloses a
//! single zero (counted by the winding number of f around the boundary),
//! which is then polished with a damped Newton iteration. Winding numbers
//! come from the trapezoid rule applied to f'/f along the rectangle edges,
//! with the node count doubled until the estimate settles on an integer.
//! Split lines are jittered between attempts so a zero sitting on an edge
//! cannot wedge the subdivision.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("winding number did not converge on region [{x0}, {x1}] x [{y0}, {y1}]")]
    WindingFailed { x0: f64, x1: f64, y0: f64, y1: f64 },
    #[error("subdivision exceeded depth {0} without isolating all roots")]
    DepthExceeded(usize),
    #[error("child winding numbers sum to {children} but parent encloses {parent}")]
    CountMismatch { children: i64, parent: i64 },
    #[error("root polish failed in region [{x0}, {x1}] x [{y0}, {y1}]")]
    PolishFailed { x0: f64, x1: f64, y0: f64, y1: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Region {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Region {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn max_dim(&self) -> f64 {
        (self.x1 - self.x0).max(self.y1 - self.y0)
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    fn expand(&self, frac: f64) -> Self {
        let dx = frac * (self.x1 - self.x0);
        let dy = frac * (self.y1 - self.y0);
        Self::new(self.x0 - dx, self.x1 + dx, self.y0 - dy, self.y1 + dy)
    }

    /// Split into four children at the given interior fractions. The children
    /// partition the region exactly.
    fn split4(&self, fx: f64, fy: f64) -> [Region; 4] {
        let xm = self.x0 + fx * (self.x1 - self.x0);
        let ym = self.y0 + fy * (self.y1 - self.y0);
        [
            Region::new(self.x0, xm, self.y0, ym),
            Region::new(xm, self.x1, self.y0, ym),
            Region::new(self.x0, xm, ym, self.y1),
            Region::new(xm, self.x1, ym, self.y1),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct ContourOpts {
    /// Accepted residual |f| at a root.
    pub residual_tol: f64,
    /// Distance of the winding estimate from an integer before it counts.
    pub winding_tol: f64,
    pub min_nodes_per_edge: usize,
    pub max_nodes_per_edge: usize,
    pub max_depth: usize,
    pub newton_max_iter: usize,
    /// Boxes smaller than this are treated as fully isolated even if the
    /// winding count is above one (root of higher multiplicity). Shrinking
    /// further would push |f| below what the evaluation noise resolves.
    pub min_box: f64,
}

impl Default for ContourOpts {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            winding_tol: 1e-3,
            min_nodes_per_edge: 24,
            max_nodes_per_edge: 24_576,
            max_depth: 48,
            newton_max_iter: 80,
            min_box: 2e-6,
        }
    }
}

/// All zeros of `f` inside `region` (counted with multiplicity). `f` must be
/// analytic on the closed region; `df` is its derivative.
pub fn find_roots<F, D>(
    f: &F,
    df: &D,
    region: Region,
    opts: &ContourOpts,
) -> Result<Vec<Complex64>, ContourError>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    // A zero close to the outer boundary stalls the winding integral; nudge
    // the boundary outward until it converges.
    let mut outer = region;
    let mut count = None;
    for attempt in 0..6 {
        match winding(f, df, &outer, opts) {
            Ok(w) => {
                count = Some(w);
                break;
            }
            Err(_) => outer = outer.expand(1.5e-3 * (attempt + 1) as f64),
        }
    }
    let count = count.ok_or(ContourError::WindingFailed {
        x0: outer.x0,
        x1: outer.x1,
        y0: outer.y0,
        y1: outer.y1,
    })?;
    let mut roots = Vec::with_capacity(count.max(0) as usize);
    subdivide(f, df, &outer, count, 0, opts, &mut roots)?;
    Ok(roots)
}

fn subdivide<F, D>(
    f: &F,
    df: &D,
    region: &Region,
    count: i64,
    depth: usize,
    opts: &ContourOpts,
    out: &mut Vec<Complex64>,
) -> Result<(), ContourError>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    if count == 0 {
        return Ok(());
    }
    let tiny = region.max_dim() <= opts.min_box;
    if count == 1 || tiny {
        if let Some(root) = newton(f, df, region.center(), opts) {
            // boxes partition the plane, so strict containment keeps each
            // root claimed exactly once
            if region.contains(root) || tiny {
                for _ in 0..count {
                    out.push(root);
                }
                return Ok(());
            }
        }
        if tiny {
            return Err(ContourError::PolishFailed {
                x0: region.x0,
                x1: region.x1,
                y0: region.y0,
                y1: region.y1,
            });
        }
    }
    if depth >= opts.max_depth {
        return Err(ContourError::DepthExceeded(opts.max_depth));
    }
    // jitter the split point between attempts so roots on a split line are
    // eventually missed by it
    const JITTER: [f64; 4] = [0.0, 0.033, -0.041, 0.057];
    let mut last_err = None;
    for &j in &JITTER {
        let children = region.split4(0.5 + j, 0.5 - j);
        let ws: Result<Vec<i64>, _> = children
            .iter()
            .map(|c| winding(f, df, c, opts))
            .collect();
        match ws {
            Ok(ws) => {
                let total: i64 = ws.iter().sum();
                if total != count {
                    last_err = Some(ContourError::CountMismatch {
                        children: total,
                        parent: count,
                    });
                    continue;
                }
                for (child, w) in children.iter().zip(ws) {
                    subdivide(f, df, child, w, depth + 1, opts, out)?;
                }
                return Ok(());
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(ContourError::DepthExceeded(depth)))
}

/// Winding number of f around the rectangle boundary, counterclockwise.
fn winding<F, D>(f: &F, df: &D, region: &Region, opts: &ContourOpts) -> Result<i64, ContourError>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let corners = region.corners();
    let fail = || ContourError::WindingFailed {
        x0: region.x0,
        x1: region.x1,
        y0: region.y0,
        y1: region.y1,
    };
    let mut nodes = opts.min_nodes_per_edge;
    let mut prev: Option<f64> = None;
    while nodes <= opts.max_nodes_per_edge {
        let mut integral = Complex64::new(0.0, 0.0);
        for e in 0..4 {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            let step = (b - a) / nodes as f64;
            let mut edge_sum = Complex64::new(0.0, 0.0);
            for k in 0..=nodes {
                let z = a + step * k as f64;
                let fz = f(z);
                if fz.norm() == 0.0 {
                    return Err(fail());
                }
                let g = df(z) / fz;
                let w = if k == 0 || k == nodes { 0.5 } else { 1.0 };
                edge_sum += g * w;
            }
            integral += edge_sum * step;
        }
        let est = integral / Complex64::new(0.0, std::f64::consts::TAU);
        let rounded = est.re.round();
        let settled = (est.re - rounded).abs() < opts.winding_tol
            && est.im.abs() < opts.winding_tol
            && prev == Some(rounded);
        if settled && rounded >= 0.0 {
            return Ok(rounded as i64);
        }
        prev = ((est.re - rounded).abs() < opts.winding_tol).then_some(rounded);
        nodes *= 2;
    }
    Err(fail())
}

/// Damped Newton iteration; returns the polished root when the residual
/// drops below the configured tolerance.
fn newton<F, D>(f: &F, df: &D, start: Complex64, opts: &ContourOpts) -> Option<Complex64>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let mut z = start;
    let mut fz = f(z);
    for _ in 0..opts.newton_max_iter {
        if fz.norm() <= opts.residual_tol {
            // a couple of undamped steps to tighten toward machine precision
            for _ in 0..3 {
                let d = df(z);
                if d.norm() == 0.0 {
                    break;
                }
                let zn = z - f(z) / d;
                if f(zn).norm() < f(z).norm() {
                    z = zn;
                } else {
                    break;
                }
            }
            return Some(z);
        }
        let d = df(z);
        if d.norm() == 0.0 {
            z += Complex64::new(1e-12, 1e-12);
            fz = f(z);
            continue;
        }
        let full = fz / d;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let zn = z - full * t;
            let fn_ = f(zn);
            if fn_.norm() < fz.norm() {
                z = zn;
                fz = fn_;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (fz.norm() <= opts.residual_tol).then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly;

    fn assert_sets_match(found: &[Complex64], expected: &[Complex64], tol: f64) {
        assert_eq!(found.len(), expected.len(), "{found:?} vs {expected:?}");
        let mut used = vec![false; expected.len()];
        for z in found {
            let hit = expected
                .iter()
                .enumerate()
                .find(|(i, e)| !used[*i] && (*e - z).norm() <= tol);
            match hit {
                Some((i, _)) => used[i] = true,
                None => panic!("root {z} unmatched"),
            }
        }
    }

    #[test]
    fn polynomial_roots_recovered() {
        let expected = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.2),
            Complex64::new(0.0, -0.2),
            Complex64::new(2.5, 1.5),
        ];
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for r in expected {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        let f = |z| poly::eval(&coeffs, z);
        let df = |z| poly::eval_deriv(&coeffs, z);
        let roots = find_roots(&f, &df, Region::new(-4.0, 4.0, -4.0, 4.0), &ContourOpts::default())
            .unwrap();
        assert_sets_match(&roots, &expected, 1e-9);
    }

    #[test]
    fn transcendental_roots() {
        // sin(z) has zeros at k*pi
        let f = |z: Complex64| z.sin();
        let df = |z: Complex64| z.cos();
        let roots = find_roots(
            &f,
            &df,
            Region::new(-7.0, 7.1, -3.0, 3.2),
            &ContourOpts::default(),
        )
        .unwrap();
        let pi = std::f64::consts::PI;
        let expected: Vec<Complex64> = (-2..=2).map(|k| Complex64::new(k as f64 * pi, 0.0)).collect();
        assert_sets_match(&roots, &expected, 1e-10);
    }

    #[test]
    fn empty_region_gives_no_roots() {
        let f = |z: Complex64| z.exp(); // entire, no zeros
        let df = |z: Complex64| z.exp();
        let roots = find_roots(
            &f,
            &df,
            Region::new(-3.0, 3.0, -3.0, 3.0),
            &ContourOpts::default(),
        )
        .unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn double_root_multiplicity() {
        // (z - 0.3)^2
        let r = Complex64::new(0.3, 0.0);
        let coeffs = [r * r, -2.0 * r, Complex64::new(1.0, 0.0)];
        let f = |z| poly::eval(&coeffs, z);
        let df = |z| poly::eval_deriv(&coeffs, z);
        let roots = find_roots(
            &f,
            &df,
            Region::new(-1.0, 1.0, -1.0, 1.0),
            &ContourOpts::default(),
        )
        .unwrap();
        assert_eq!(roots.len(), 2);
        for z in roots {
            assert!((z - r).norm() < 1e-5, "double root off: {z}");
        }
    }

    #[test]
    fn root_on_initial_boundary_survives_via_expansion() {
        // zero exactly on the requested boundary
        let coeffs = [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)];
        let f = |z| poly::eval(&coeffs, z);
        let df = |z| poly::eval_deriv(&coeffs, z);
        let roots = find_roots(
            &f,
            &df,
            Region::new(-1.0, 1.0, -1.0, 1.0),
            &ContourOpts::default(),
        )
        .unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }
}
