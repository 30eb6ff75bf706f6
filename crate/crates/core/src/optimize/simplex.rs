//! Downhill simplex (Nelder–Mead) on a box.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexConfig {
    /// Stop when every vertex is within this distance of the best one.
    pub x_tol: f64,
    /// Stop when the spread of objective values falls below this.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        SimplexConfig {
            x_tol: 1e-5,
            f_tol: 1e-9,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&p, &q)| p + t * (q - p)).collect()
}

/// Minimizes `f` from `start`, with axis steps `step` for the initial
/// simplex. Trial points are clamped into `bounds`; `f` may return `+∞` to
/// reject a point.
pub fn nelder_mead<F>(
    mut f: F,
    start: &[f64],
    step: &[f64],
    bounds: &[(f64, f64)],
    cfg: &SimplexConfig,
) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    clamp(&mut x0, bounds);
    pts.push(x0.clone());
    for i in 0..n {
        let mut p = x0.clone();
        // Step inward when the start sits on the upper face of the box.
        let s = if p[i] + step[i] > bounds[i].1 { -step[i] } else { step[i] };
        p[i] += s;
        clamp(&mut p, bounds);
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let diam = pts[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diam <= cfg.x_tol || (spread.is_finite() && spread.abs() <= cfg.f_tol) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let worst = pts[n].clone();
        let mut xr = affine(&centroid, &worst, -1.0);
        clamp(&mut xr, bounds);
        let fr = f(&xr);
        if fr < vals[0] {
            let mut xe = affine(&centroid, &worst, -2.0);
            clamp(&mut xe, bounds);
            let fe = f(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = affine(&centroid, &xr, 0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = affine(&centroid, &worst, 0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        let best = pts[0].clone();
        for i in 1..=n {
            pts[i] = affine(&best, &pts[i], 0.5);
            vals[i] = f(&pts[i]);
        }
    }
    let (bi, _) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty simplex");
    SimplexOutcome {
        x: pts[bi].clone(),
        f: vals[bi],
        iterations,
        converged,
    }
}
