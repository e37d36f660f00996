//! Small deterministic optimizers for low-dimensional problems.

/// Result of a scalar or vector minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Bisection for a sign change of `f` on `[lo, hi]` with `f(lo) <= 0 <= f(hi)`.
/// Runs until the bracket stops shrinking in floating point.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, usize) {
    let mut it = 0;
    while it < 2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        it += 1;
    }
    let (flo, fhi) = (f(lo).abs(), f(hi).abs());
    (if flo <= fhi { lo } else { hi }, it)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal `f` on `[a, b]` until the
/// bracket is narrower than `tol`.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Minimum {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut it = 0;
    while (b - a).abs() > tol && it < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        it += 1;
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    Minimum { x: vec![x], value, iterations: it, converged: (b - a).abs() <= tol }
}

/// Scans `points` equally spaced abscissae on `[a, b]`, then refines the best
/// bracket by golden section. Non-finite samples are never selected unless
/// all are non-finite.
pub fn scan_then_golden(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, points: usize, tol: f64) -> Minimum {
    let h = (b - a) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| if i + 1 == points { b } else { a + h * i as f64 }).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let best = (0..points)
        .min_by(|&i, &j| fs[i].partial_cmp(&fs[j]).unwrap_or(std::cmp::Ordering::Equal))
        .expect("points >= 2");
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(points - 1)];
    let mut refined = golden_section(&mut f, lo, hi, tol);
    // endpoints are not visited by golden section; keep the grid winner if better
    if fs[best] < refined.value {
        refined.x = vec![xs[best]];
        refined.value = fs[best];
    }
    refined.iterations += points;
    refined
}

/// Nelder–Mead minimization with the standard coefficients. Stops when the
/// spread of simplex values falls below `ftol` and its diameter below `xtol`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Minimum {
    let d = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += step[i];
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut it = 0;
    let mut converged = false;
    while it < max_iter {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[d] - values[0]).abs();
        let diameter = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= ftol && diameter <= xtol {
            converged = true;
            break;
        }
        it += 1;

        let centroid: Vec<f64> = (0..d).map(|k| simplex[..d].iter().map(|p| p[k]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|k| centroid[k] + t * (simplex[d][k] - centroid[k])).collect() };

        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
        } else if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
        } else {
            let (xc, fc) = if fr < values[d] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < values[d].min(fr) {
                simplex[d] = xc;
                values[d] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=d {
                    for k in 0..d {
                        simplex[i][k] = best[k] + 0.5 * (simplex[i][k] - best[k]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=d)
        .min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty simplex");
    Minimum { x: simplex[best].clone(), value: values[best], iterations: it, converged }
}

/// BFGS with Armijo backtracking. `fg` returns the value and writes the
/// gradient into its second argument. Stops when the gradient max-norm is at
/// most `gtol`.
pub fn bfgs(mut fg: impl FnMut(&[f64], &mut [f64]) -> f64, x0: &[f64], gtol: f64, max_iter: usize) -> Minimum {
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut fx = fg(&x, &mut g);
    let mut h = identity(d);
    let mut it = 0;
    let mut converged = false;
    let mut g_new = vec![0.0; d];
    while it < max_iter {
        if g.iter().all(|v| v.abs() <= gtol) {
            converged = true;
            break;
        }
        it += 1;
        let mut p: Vec<f64> = (0..d).map(|i| -(0..d).map(|j| h[i][j] * g[j]).sum::<f64>()).collect();
        let mut slope: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 || !slope.is_finite() {
            h = identity(d);
            p = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            let ft = fg(&xt, &mut g_new);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((xt, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xt, ft)) = accepted else { break };
        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..d).map(|i| (0..d).map(|j| h[i][j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..d {
                for j in 0..d {
                    h[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        x = xt;
        fx = ft;
        g.copy_from_slice(&g_new);
    }
    converged |= g.iter().all(|v| v.abs() <= gtol);
    Minimum { x, value: fx, iterations: it, converged }
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting; `None`
/// when a pivot is below `1e-12` times the largest entry of `A`.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let r = golden_section(|x| (x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((r.x[0] - 0.3).abs() < 1e-9);
        assert!(r.converged);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let r = nelder_mead(
            |p| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            1e-20,
            1e-10,
            20_000,
        );
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn bfgs_quadratic() {
        let r = bfgs(
            |p, g| {
                g[0] = 2.0 * (p[0] - 1.0) + p[1];
                g[1] = 4.0 * (p[1] + 2.0) + p[0];
                (p[0] - 1.0).powi(2) + 2.0 * (p[1] + 2.0).powi(2) + p[0] * p[1]
            },
            &[0.0, 0.0],
            1e-12,
            200,
        );
        assert!(r.converged, "{r:?}");
        let x = solve_linear(vec![vec![2.0, 1.0], vec![1.0, 4.0]], vec![2.0, -8.0]).unwrap();
        assert!((r.x[0] - x[0]).abs() < 1e-10 && (r.x[1] - x[1]).abs() < 1e-10);
    }

    #[test]
    fn bisect_sqrt2() {
        let (x, _) = bisect(|x| x * x - 2.0, 0.0, 2.0);
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
        assert!(solve_linear(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }
}
