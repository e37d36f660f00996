//! Solvers for the low-dimensional variational problems behind the explicit
//! rate functions: the degree fixed point, `ψ(y)`, the inner infimum of the
//! edge rate, the annealed Ising free energy and the Legendre dual of `I_ω`.

pub mod optim;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::math::{entropy_term, xlnx};
use crate::measures::{product_kernel_measure, ColorMeasure, Kernel, PairMeasure};
use optim::{bfgs, bisect, nelder_mead, scan_then_golden, solve_linear};

/// Outcome of a numerical solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Optimizer or root.
    pub argument: Vec<f64>,
    #[serde(with = "crate::math::ext_real")]
    pub value: f64,
    /// Problem-specific residual (fixed-point defect, constraint violation,
    /// bracket width); see each solver.
    #[serde(with = "crate::math::ext_real")]
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Residual tolerance of [`solve_degree_fixed_point`], relative to `max(1, c)`.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Constraint violation accepted by [`psi`].
pub const CONSTRAINT_TOL: f64 = 1e-8;
/// Bracket width at which [`zeta_inner`] stops.
pub const ZETA_Y_TOL: f64 = 1e-10;

/// Solves `x = c e^{-2(1 - mean/x)}` on `[max(mean, c e^{-2}), c]` by bisection.
///
/// `residual` is `|x - c e^{-2(1-mean/x)}|`; `converged` means it is at most
/// `FIXED_POINT_TOL · max(1, c)`.
pub fn solve_degree_fixed_point(mean: f64, c: f64) -> Result<SolveReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain("degree fixed point needs a finite c > 0"));
    }
    if !(mean >= 0.0) || mean > c {
        return Err(domain(format!("fixed point requires 0 <= mean <= c, got mean {mean}, c {c}")));
    }
    let map = |x: f64| c * (-2.0 * (1.0 - mean / x)).exp();
    let lo = mean.max(c * (-2.0f64).exp());
    let (x, iterations) = bisect(|x| x - map(x), lo, c);
    let residual = (x - map(x)).abs();
    Ok(SolveReport {
        argument: vec![x],
        value: x,
        residual,
        iterations,
        converged: residual <= FIXED_POINT_TOL * c.max(1.0),
    })
}

/// Extremes of `ωᵀCω` over probability vectors supported in `support`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticRange {
    pub min: f64,
    pub max: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

/// Largest support handled by the face enumeration in [`quadratic_range`].
pub const MAX_RANGE_SUPPORT: usize = 16;

/// Computes the attainable range of `ωᵀCω` exactly by enumerating the faces
/// of the simplex over `support` and solving the stationarity system
/// `2 C_F ω = λ 1, 1ᵀω = 1` on each. Faces where the system is singular are
/// skipped; the form is then affine along some direction of that face, so its
/// extremes lie on a smaller face.
pub fn quadratic_range(kernel: &Kernel, support: &[usize]) -> Result<QuadraticRange> {
    let k = support.len();
    if k == 0 {
        return Err(domain("empty support"));
    }
    if k > MAX_RANGE_SUPPORT {
        return Err(Error::Resource(format!("support of size {k} exceeds {MAX_RANGE_SUPPORT}")));
    }
    let m = kernel.alphabet().size();
    let mut best = QuadraticRange { min: f64::INFINITY, max: f64::NEG_INFINITY, argmin: vec![], argmax: vec![] };
    for mask in 1u32..(1 << k) {
        let face: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| support[i]).collect();
        let f = face.len();
        let omega_face = if f == 1 {
            vec![1.0]
        } else {
            let mut a = vec![vec![0.0; f + 1]; f + 1];
            for (i, &ai) in face.iter().enumerate() {
                for (j, &bj) in face.iter().enumerate() {
                    a[i][j] = 2.0 * kernel.get(ai, bj);
                }
                a[i][f] = -1.0;
                a[f][i] = 1.0;
            }
            let mut rhs = vec![0.0; f + 1];
            rhs[f] = 1.0;
            match solve_linear(a, rhs) {
                Some(sol) if sol[..f].iter().all(|&w| w >= -1e-12) => sol[..f].iter().map(|w| w.max(0.0)).collect(),
                _ => continue,
            }
        };
        let mut omega = vec![0.0; m];
        let total: f64 = omega_face.iter().sum();
        for (&a, &w) in face.iter().zip(&omega_face) {
            omega[a] = w / total;
        }
        let y = kernel.quadratic_form(&omega);
        if y < best.min {
            best.min = y;
            best.argmin = omega.clone();
        }
        if y > best.max {
            best.max = y;
            best.argmax = omega;
        }
    }
    Ok(best)
}

fn support_of(mu: &ColorMeasure) -> Vec<usize> {
    (0..mu.alphabet().size()).filter(|&a| mu.weight(a) > 0.0).collect()
}

fn range_tolerance(range: &QuadraticRange) -> f64 {
    1e-12 * range.max.abs().max(1.0)
}

fn entropy_dense(omega: &[f64], mu: &ColorMeasure) -> f64 {
    omega.iter().zip(mu.weights()).map(|(&w, &m)| entropy_term(w, m)).sum()
}

/// Number of deterministic starting points used by [`psi`] when `μ` has
/// three or more support points.
pub const PSI_STARTS: usize = 32;

/// `ψ(y) = inf { H(ω‖μ) : ωᵀCω = y }` over probability vectors `ω`.
///
/// Only `ω ≪ μ` can be finite, so the problem lives on the support of `μ`.
/// Values of `y` outside the attainable range give `+inf`. One- and two-point
/// supports are solved exactly (the constraint is a quadratic in one
/// variable); larger supports use an augmented Lagrangian in softmax
/// coordinates from [`PSI_STARTS`] starts. `residual` is `|ωᵀCω - y|`.
pub fn psi(y: f64, mu: &ColorMeasure, kernel: &Kernel) -> Result<SolveReport> {
    mu.alphabet().check_same(kernel.alphabet(), "ψ")?;
    mu.require_probability("μ")?;
    let support = support_of(mu);
    let range = quadratic_range(kernel, &support)?;
    psi_in_range(y, mu, kernel, &support, &range)
}

fn psi_in_range(
    y: f64,
    mu: &ColorMeasure,
    kernel: &Kernel,
    support: &[usize],
    range: &QuadraticRange,
) -> Result<SolveReport> {
    let tol = range_tolerance(range);
    let infeasible = |gap: f64| SolveReport {
        argument: vec![],
        value: f64::INFINITY,
        residual: gap,
        iterations: 0,
        converged: true,
    };
    if y < range.min - tol {
        return Ok(infeasible(range.min - y));
    }
    if y > range.max + tol {
        return Ok(infeasible(y - range.max));
    }
    let y0 = kernel.quadratic_form(mu.weights());
    if range.max - range.min <= tol || (y - y0).abs() <= tol {
        return Ok(SolveReport {
            argument: mu.weights().to_vec(),
            value: 0.0,
            residual: (y - y0).abs(),
            iterations: 0,
            converged: true,
        });
    }
    match support.len() {
        2 => Ok(psi_two_point(y, mu, kernel, support[0], support[1])),
        _ => Ok(psi_augmented_lagrangian(y, mu, kernel, support, range)),
    }
}

fn psi_two_point(y: f64, mu: &ColorMeasure, kernel: &Kernel, s: usize, u: usize) -> SolveReport {
    // ω = t e_s + (1-t) e_u gives ωᵀCω = A t² + B t + D
    let (css, csu, cuu) = (kernel.get(s, s), kernel.get(s, u), kernel.get(u, u));
    let a = css - 2.0 * csu + cuu;
    let b = 2.0 * (csu - cuu);
    let d = cuu - y;
    let mut roots = Vec::new();
    if a.abs() <= 1e-15 * (css.abs() + csu.abs() + cuu.abs()) {
        if b != 0.0 {
            roots.push(-d / b);
        }
    } else {
        let disc = (b * b - 4.0 * a * d).max(0.0);
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q != 0.0 {
            roots.push(q / a);
            roots.push(d / q);
        } else {
            roots.push(-b / (2.0 * a));
        }
    }
    let m = mu.alphabet().size();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for t in roots {
        if !(-1e-9..=1.0 + 1e-9).contains(&t) {
            continue;
        }
        let t = t.clamp(0.0, 1.0);
        let mut omega = vec![0.0; m];
        omega[s] = t;
        omega[u] = 1.0 - t;
        let h = entropy_dense(&omega, mu);
        if best.as_ref().is_none_or(|(v, _)| h < *v) {
            best = Some((h, omega));
        }
    }
    match best {
        Some((value, omega)) => SolveReport {
            residual: (kernel.quadratic_form(&omega) - y).abs(),
            argument: omega,
            value,
            iterations: 0,
            converged: true,
        },
        None => SolveReport {
            argument: vec![],
            value: f64::INFINITY,
            residual: f64::INFINITY,
            iterations: 0,
            converged: false,
        },
    }
}

/// First `k` coordinates of the Halton point with index `i` (bases are the
/// first primes).
fn halton(i: usize, k: usize) -> Vec<f64> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    PRIMES[..k]
        .iter()
        .map(|&base| {
            let (mut f, mut r, mut n) = (1.0, 0.0, i as u64);
            while n > 0 {
                f /= base as f64;
                r += f * (n % base) as f64;
                n /= base;
            }
            r
        })
        .collect()
}

fn psi_augmented_lagrangian(
    y: f64,
    mu: &ColorMeasure,
    kernel: &Kernel,
    support: &[usize],
    range: &QuadraticRange,
) -> SolveReport {
    let k = support.len();
    let m = mu.alphabet().size();
    let ln_mu: Vec<f64> = support.iter().map(|&a| mu.weight(a).ln()).collect();
    let sub: Vec<Vec<f64>> = support.iter().map(|&a| support.iter().map(|&b| kernel.get(a, b)).collect()).collect();
    let scale = range.max.abs().max(1.0);

    let omega_of = |theta: &[f64]| -> Vec<f64> {
        let z: Vec<f64> = theta.iter().zip(&ln_mu).map(|(t, l)| t + l).collect();
        let top = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|v| (v - top).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect()
    };
    let constraint = |w: &[f64]| -> f64 {
        let mut q = 0.0;
        for i in 0..k {
            for j in 0..k {
                q += sub[i][j] * w[i] * w[j];
            }
        }
        q - y
    };
    let theta_from = |w: &[f64]| -> Vec<f64> { w.iter().zip(&ln_mu).map(|(&v, l)| v.max(1e-300).ln() - l).collect() };

    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; k]];
    for ext in [&range.argmin, &range.argmax] {
        let w: Vec<f64> = support.iter().map(|&a| 0.9 * ext[a] + 0.1 / k as f64).collect();
        starts.push(theta_from(&w));
    }
    let mut idx = 1;
    while starts.len() < PSI_STARTS {
        let w: Vec<f64> = halton(idx, k).into_iter().map(|u| -(u.max(1e-12)).ln()).collect();
        let s: f64 = w.iter().sum();
        starts.push(theta_from(&w.iter().map(|v| v / s).collect::<Vec<_>>()));
        idx += 1;
    }

    let mut best: Option<SolveReport> = None;
    let mut total_iterations = 0;
    for start in starts {
        let mut theta = start;
        let (mut lambda, mut rho) = (0.0f64, 1e2f64);
        let mut last_violation = f64::INFINITY;
        for _ in 0..60 {
            let inner = |th: &[f64], grad: &mut [f64]| -> f64 {
                let w = omega_of(th);
                let g = constraint(&w);
                let mut h = 0.0;
                let mut dfdw = vec![0.0; k];
                for i in 0..k {
                    let lw = w[i].max(1e-300).ln();
                    h += w[i] * (lw - ln_mu[i]);
                    let cw: f64 = (0..k).map(|j| sub[i][j] * w[j]).sum();
                    dfdw[i] = lw - ln_mu[i] + 1.0 + (lambda + rho * g) * 2.0 * cw;
                }
                let mean: f64 = (0..k).map(|i| w[i] * dfdw[i]).sum();
                for j in 0..k {
                    grad[j] = w[j] * (dfdw[j] - mean);
                }
                h + lambda * g + 0.5 * rho * g * g
            };
            let r = bfgs(inner, &theta, 1e-12, 400);
            total_iterations += r.iterations;
            theta = r.x;
            let g = constraint(&omega_of(&theta));
            lambda += rho * g;
            if g.abs() <= 1e-3 * CONSTRAINT_TOL * scale {
                break;
            }
            if g.abs() > 0.25 * last_violation {
                rho = (rho * 10.0).min(1e8);
            }
            last_violation = g.abs();
        }
        let w_sub = omega_of(&theta);
        let mut omega = vec![0.0; m];
        for (&a, &w) in support.iter().zip(&w_sub) {
            omega[a] = w;
        }
        let residual = (kernel.quadratic_form(&omega) - y).abs();
        let report = SolveReport {
            value: entropy_dense(&omega, mu),
            argument: omega,
            residual,
            iterations: 0,
            converged: residual <= CONSTRAINT_TOL * scale,
        };
        let better = match &best {
            None => true,
            Some(b) => {
                (report.converged && !b.converged) || (report.converged == b.converged && report.value < b.value)
            }
        };
        if better {
            best = Some(report);
        }
    }
    let mut best = best.expect("at least one start");
    best.iterations = total_iterations;
    best
}

/// Number of grid points scanned by [`zeta_inner`] before golden section.
pub const ZETA_SCAN_POINTS: usize = 65;

/// `inf_{y>0} { ψ(y) - x ln(y/2) + y/2 }` with the convention `0 ln 0 = 0`.
///
/// `ψ` is finite only on the attainable range of `ωᵀCω`, so the search runs
/// over that interval: a scan of [`ZETA_SCAN_POINTS`] points followed by
/// golden section in the best bracket down to [`ZETA_Y_TOL`]. The argument is
/// the minimizing `y`; `residual` is the final bracket width.
pub fn zeta_inner(x: f64, mu: &ColorMeasure, kernel: &Kernel) -> Result<SolveReport> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(domain(format!("edge density x = {x} must be finite and nonnegative")));
    }
    mu.alphabet().check_same(kernel.alphabet(), "ζ")?;
    mu.require_probability("μ")?;
    let support = support_of(mu);
    let range = quadratic_range(kernel, &support)?;
    let outer = |y: f64, psi_value: f64| -> f64 {
        let log_term = if x == 0.0 {
            0.0
        } else if y <= 0.0 {
            f64::INFINITY
        } else {
            -x * (0.5 * y).ln()
        };
        psi_value + log_term + 0.5 * y
    };

    if range.max - range.min <= range_tolerance(&range) {
        let y = kernel.quadratic_form(mu.weights());
        return Ok(SolveReport {
            argument: vec![y],
            value: outer(y, 0.0),
            residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let mut all_converged = true;
    let h = |y: f64| -> f64 {
        match psi_in_range(y, mu, kernel, &support, &range) {
            Ok(r) => {
                all_converged &= r.converged || !r.value.is_finite();
                outer(y, r.value)
            }
            Err(_) => f64::INFINITY,
        }
    };
    let r = scan_then_golden(h, range.min, range.max, ZETA_SCAN_POINTS, ZETA_Y_TOL);
    Ok(SolveReport {
        argument: r.x,
        value: r.value,
        residual: if r.converged { ZETA_Y_TOL } else { f64::INFINITY },
        iterations: r.iterations,
        converged: r.converged && all_converged && r.value.is_finite(),
    })
}

/// The annealed Ising objective at `(x, ϖ(+,+), ϖ(-,-), ϖ(+,-))`, where the
/// off-diagonal entry appears twice in `ϖ`.
pub fn ising_objective(beta: f64, c: f64, v: &[f64; 4]) -> f64 {
    let [x, pp, mm, pm] = *v;
    let wpp = c * x * x;
    let wmm = c * (1.0 - x) * (1.0 - x);
    let wpm = c * x * (1.0 - x);
    let rel = entropy_term(pp, wpp) + entropy_term(mm, wmm) + 2.0 * entropy_term(pm, wpm);
    let mass = pp + mm + 2.0 * pm;
    0.5 * beta * (pp + mm - 2.0 * pm) - xlnx(x) - xlnx(1.0 - x) - 0.5 * (rel + c - mass)
}

/// Grid resolution per variable in [`ising_annealed`].
pub const ISING_GRID: usize = 40;
/// Objective tolerance of the Nelder–Mead refinement in [`ising_annealed`].
pub const ISING_FTOL: f64 = 1e-10;

/// `lim (1/n) ln E Z(β)` for the Ising model on the Erdős–Rényi graph with
/// mean degree `c`, as a maximization over `x ∈ [0,1]` and the three free
/// entries of a symmetric finite measure `ϖ` on `{+,-}²`.
///
/// A `40⁴` grid over `x ∈ [0,1]` and `ϖ` entries in `[0, 1.25 c e^β]` seeds
/// Nelder–Mead from the best grid points; refinements are restarted until the
/// value moves by less than [`ISING_FTOL`]. The argument is
/// `(x, ϖ(+,+), ϖ(-,-), ϖ(+,-))`.
pub fn ising_annealed(beta: f64, c: f64) -> Result<SolveReport> {
    if !(beta >= 0.0 && beta.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("Ising parameters need β >= 0 and c > 0, got β {beta}, c {c}")));
    }
    let top = 1.25 * c * beta.exp();
    let g = ISING_GRID;
    let xs: Vec<f64> = (0..g).map(|i| i as f64 / (g - 1) as f64).collect();
    let ws: Vec<f64> = (0..g).map(|i| top * i as f64 / (g - 1) as f64).collect();
    let penalty = |v: &[f64]| -> f64 {
        let p = [v[0].clamp(0.0, 1.0), v[1].max(0.0), v[2].max(0.0), v[3].max(0.0)];
        let val = ising_objective(beta, c, &p);
        if val.is_nan() {
            f64::INFINITY
        } else {
            -val
        }
    };

    // keep a handful of the best grid points as seeds
    const SEEDS: usize = 6;
    let mut seeds: Vec<(f64, [f64; 4])> = Vec::with_capacity(SEEDS + 1);
    for &x in &xs {
        for &pp in &ws {
            for &mm in &ws {
                for &pm in &ws {
                    let v = [x, pp, mm, pm];
                    let f = -ising_objective(beta, c, &v);
                    if f.is_finite() && (seeds.len() < SEEDS || f < seeds[seeds.len() - 1].0) {
                        seeds.push((f, v));
                        seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                        seeds.truncate(SEEDS);
                    }
                }
            }
        }
    }

    let h = 1.0 / (g - 1) as f64;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut converged = false;
    for (_, seed) in seeds {
        let mut point = seed.to_vec();
        let mut step = vec![h, h * top, h * top, h * top];
        let mut prev = f64::INFINITY;
        let mut settled = false;
        for _ in 0..12 {
            let r = nelder_mead(penalty, &point, &step, 1e-16, 1e-12, 20_000);
            iterations += r.iterations;
            point = r.x;
            point[0] = point[0].clamp(0.0, 1.0);
            for v in &mut point[1..] {
                *v = v.max(0.0);
            }
            if (prev - r.value).abs() <= ISING_FTOL * 1e-2 {
                settled = true;
                break;
            }
            prev = r.value;
            step = step.iter().map(|s| s * 0.1).collect();
            for (s, p) in step.iter_mut().zip(&point) {
                *s = s.max(1e-6 * p.abs().max(1e-3));
            }
        }
        let value = -penalty(&point);
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, point));
            converged = settled;
        }
    }
    let (value, argument) = best.ok_or_else(|| Error::Construction("Ising objective is nowhere finite".into()))?;
    Ok(SolveReport { argument, value, residual: ISING_FTOL, iterations, converged })
}

/// Configuration of the numerical Legendre supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendreGrid {
    /// Box `[-g_max, g_max]` for every entry of the test function.
    pub g_max: f64,
    /// Scan points per coordinate before Newton refinement.
    pub points: usize,
}

impl Default for LegendreGrid {
    fn default() -> Self {
        LegendreGrid { g_max: 50.0, points: 201 }
    }
}

/// `½ sup_g { ⟨ϖ, g⟩ + ⟨Cω⊗ω, 1 - e^g⟩ }` over symmetric `g` in the box.
///
/// The objective separates over unordered color pairs; each coordinate is
/// maximized by a grid scan followed by Newton steps on the concave
/// one-dimensional function. Returns `+inf` when `ϖ` charges a pair where
/// `Cω⊗ω` vanishes (the supremum is unbounded).
pub fn legendre_i_omega(pair: &PairMeasure, omega: &ColorMeasure, kernel: &Kernel, grid: &LegendreGrid) -> Result<f64> {
    pair.alphabet().check_same(omega.alphabet(), "Legendre dual")?;
    omega.require_probability("ω")?;
    if !(grid.g_max > 0.0) || grid.points < 2 {
        return Err(domain("Legendre grid needs g_max > 0 and at least two points"));
    }
    let w = product_kernel_measure(kernel, omega)?;
    let m = pair.alphabet().size();
    let gm = grid.g_max;
    let mut total = 0.0;
    for a in 0..m {
        for b in a..m {
            let mult = if a == b { 1.0 } else { 2.0 };
            let (p, q) = (mult * pair.get(a, b), mult * w.get(a, b));
            if q == 0.0 {
                if p > 0.0 {
                    return Ok(f64::INFINITY);
                }
                continue;
            }
            let phi = |t: f64| p * t + q * (1.0 - t.exp());
            let mut t = (0..grid.points)
                .map(|i| -gm + 2.0 * gm * i as f64 / (grid.points - 1) as f64)
                .max_by(|&s, &u| phi(s).partial_cmp(&phi(u)).unwrap())
                .expect("points >= 2");
            for _ in 0..100 {
                let d1 = p - q * t.exp();
                let d2 = -q * t.exp();
                let next = (t - d1 / d2).clamp(-gm, gm);
                let done = (next - t).abs() <= 1e-15 * t.abs().max(1.0);
                t = next;
                if done {
                    break;
                }
            }
            total += phi(t);
        }
    }
    Ok(0.5 * total)
}
