use colored_ldp::math::xlnx;
use colored_ldp::measures::{
    degree_distribution, product_kernel_measure, ColorMeasure, DegreeDistribution, Kernel, PairMeasure,
};
use colored_ldp::oracles::ising_oracle;
use colored_ldp::rates::{
    limit_law, rate_delta, rate_delta_detailed, rate_i, rate_i_omega, rate_j, rate_j_tilde, rate_zeta, rate_zeta_er,
    DegreeBranch,
};
use colored_ldp::seed::rng_from_seed;
use colored_ldp::validation::{random_kernel, random_probability, random_sub_consistent};
use colored_ldp::varsolve::{
    ising_annealed, legendre_i_omega, psi, solve_degree_fixed_point, zeta_inner, LegendreGrid,
};
use proptest::prelude::*;

fn relative_entropy(w: &[f64], mu: &[f64]) -> f64 {
    w.iter().zip(mu).map(|(&a, &b)| if a == 0.0 { 0.0 } else { a * (a / b).ln() }).sum()
}

fn form(k: &Kernel, w: &[f64]) -> f64 {
    let m = w.len();
    (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| k.get(a, b) * w[a] * w[b]).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rate_j_is_nonnegative_and_additive(seed in any::<u64>(), m in 1usize..=3) {
        let mut rng = rng_from_seed(seed);
        let (pair, nu) = random_sub_consistent(&mut rng, m);
        let mu = random_probability(&mut rng, m, 0.05);
        let kernel = random_kernel(&mut rng, m, 0.2, 5.0);
        let j = rate_j(&pair, &nu, &mu, &kernel).unwrap();
        prop_assert!(j.is_finite());
        prop_assert!(j.value() >= 0.0);
        let parts: f64 = j.breakdown.values().map(|v| v.0).sum();
        prop_assert!((parts - j.value()).abs() <= 1e-12 * j.value().max(1.0));
        let i = rate_i(&nu.color_marginal(), &pair, &mu, &kernel).unwrap();
        prop_assert!(i.value() >= 0.0);
        prop_assert!(rate_j_tilde(&nu, &nu.color_marginal(), &pair).unwrap() >= 0.0);
    }

    #[test]
    fn legendre_dual_matches_closed_form(seed in any::<u64>(), m in 1usize..=3) {
        let mut rng = rng_from_seed(seed);
        let omega = random_probability(&mut rng, m, 0.05);
        let kernel = random_kernel(&mut rng, m, 0.2, 5.0);
        let w = product_kernel_measure(&kernel, &omega).unwrap();
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|a| (0..m).map(|b| w.get(a, b) * (((a + 1) * (b + 1)) as f64 * seed as f64 % 7.0 / 3.5 - 1.0).exp()).collect())
            .collect();
        let pair = PairMeasure::from_rows(&rows).unwrap();
        let closed = rate_i_omega(&pair, &omega, &kernel).unwrap();
        let dual = legendre_i_omega(&pair, &omega, &kernel, &LegendreGrid::default()).unwrap();
        prop_assert!((closed - dual).abs() <= 1e-4, "{closed} vs {dual}");
        prop_assert!(closed >= 0.0);
    }

    #[test]
    fn degree_rate_is_nonnegative(probs in prop::collection::vec(0.0f64..1.0, 1..12), c in 0.2f64..6.0) {
        let s: f64 = probs.iter().sum();
        prop_assume!(s > 1e-3);
        let mut p: Vec<f64> = probs.iter().map(|x| x / s).collect();
        let rest: f64 = p[1..].iter().sum();
        p[0] = (1.0 - rest).max(0.0);
        let d = DegreeDistribution::new(p).unwrap();
        prop_assert!(rate_delta(&d, c).unwrap() >= 0.0);
    }
}

#[test]
fn pair_rate_vanishes_at_its_center() {
    let mut rng = rng_from_seed(4);
    for m in 1..=3 {
        let omega = random_probability(&mut rng, m, 0.05);
        let kernel = random_kernel(&mut rng, m, 0.2, 5.0);
        let w = product_kernel_measure(&kernel, &omega).unwrap();
        assert!(rate_i_omega(&w, &omega, &kernel).unwrap().abs() < 1e-14);
        assert!(legendre_i_omega(&w, &omega, &kernel, &LegendreGrid::default()).unwrap().abs() < 1e-12);
    }
    let (omega, kernel) = (ColorMeasure::uniform(1).unwrap(), Kernel::constant(1, 2.0).unwrap());
    let half = PairMeasure::new(1, vec![1.0]).unwrap();
    let expected = 0.5 * (1.0 - 2f64.ln());
    assert!((rate_i_omega(&half, &omega, &kernel).unwrap() - expected).abs() < 1e-14);
    assert!((legendre_i_omega(&half, &omega, &kernel, &LegendreGrid::default()).unwrap() - expected).abs() < 1e-10);
}

#[test]
fn limit_law_is_the_zero_of_j() {
    for (mu, kernel) in [
        (ColorMeasure::uniform(1).unwrap(), Kernel::constant(1, 3.0).unwrap()),
        (ColorMeasure::uniform(2).unwrap(), Kernel::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap()),
    ] {
        let q = limit_law(&mu, &kernel, 1e-14).unwrap();
        let pair = product_kernel_measure(&kernel, &mu).unwrap();
        assert!(rate_j(&pair, &q, &mu, &kernel).unwrap().value() <= 1e-9);
    }
    let q = limit_law(&ColorMeasure::uniform(1).unwrap(), &Kernel::constant(1, 3.0).unwrap(), 1e-14).unwrap();
    let d = degree_distribution(&q);
    let poisson = DegreeDistribution::poisson(3.0, 1e-14).unwrap();
    for k in 0..20 {
        assert!((d.get(k) - poisson.get(k)).abs() < 1e-13);
    }
}

#[test]
fn degree_fixed_point_agrees_with_iteration() {
    let (c, mean) = (2.0, 1.0);
    let r = solve_degree_fixed_point(mean, c).unwrap();
    let x = r.argument[0];
    assert!(r.residual <= 1e-12 && x >= mean.max(c * (-2f64).exp()) && x <= c);
    // damped iteration; the plain map has slope -2 mean / x < -1 here
    let mut y = c;
    for _ in 0..1_000_000 {
        y = 0.5 * (y + c * (-2.0 * (1.0 - mean / y)).exp());
    }
    assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    let zero = solve_degree_fixed_point(0.0, c).unwrap();
    assert!((zero.argument[0] - c * (-2f64).exp()).abs() < 1e-12);
    assert!((solve_degree_fixed_point(c, c).unwrap().argument[0] - c).abs() < 1e-12);
    assert!(solve_degree_fixed_point(2.5, c).is_err());
}

#[test]
fn degree_rate_continuous_on_poisson_family() {
    for c in [1.0, 2.0, 4.0] {
        let h = 1e-12;
        let below = rate_delta_detailed(&DegreeDistribution::poisson(c * (1.0 - h), 1e-16).unwrap(), c).unwrap();
        let above = rate_delta_detailed(&DegreeDistribution::poisson(c * (1.0 + h), 1e-16).unwrap(), c).unwrap();
        assert_eq!(below.branch, DegreeBranch::FixedPoint);
        assert_eq!(above.branch, DegreeBranch::Mean);
        assert!((below.value.0 - above.value.0).abs() <= 1e-10);
        assert!(rate_delta(&DegreeDistribution::poisson(c, 1e-16).unwrap(), c).unwrap() <= 1e-10);
    }
}

/// `min H(ω‖μ)` over the two-color constraint set: every sign change of
/// `ωᵀCω - y` on a 2000-point grid is refined by bisection.
fn psi_grid_two(y: f64, mu: &[f64], k: &Kernel) -> f64 {
    let g = |t: f64| form(k, &[t, 1.0 - t]) - y;
    let mut best = f64::INFINITY;
    for i in 0..2000 {
        let (mut lo, mut hi) = (i as f64 / 2000.0, (i + 1) as f64 / 2000.0);
        let (glo, ghi) = (g(lo), g(hi));
        if glo == 0.0 {
            best = best.min(relative_entropy(&[lo, 1.0 - lo], mu));
        }
        if glo * ghi >= 0.0 {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) < 0.0) == (glo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        best = best.min(relative_entropy(&[t, 1.0 - t], mu));
    }
    if g(1.0) == 0.0 {
        best = best.min(relative_entropy(&[1.0, 0.0], mu));
    }
    best
}

/// `min H(ω‖μ)` over the three-color constraint curve: for each `ω₀` on a fine
/// grid the constraint is a quadratic in `ω₁` and is solved exactly.
fn psi_curve_three(y: f64, mu: &[f64], k: &Kernel) -> f64 {
    let mut best = f64::INFINITY;
    let steps = 200_000;
    for i in 0..=steps {
        let w0 = i as f64 / steps as f64;
        let r = 1.0 - w0;
        // ω = (w0, t, r - t); f(t) = ωᵀCω - y = A t² + B t + D
        let f = |t: f64| form(k, &[w0, t, r - t]) - y;
        let (f0, f1, fh) = (f(0.0), f(r), f(0.5 * r));
        if r == 0.0 {
            if f0.abs() < 1e-12 {
                best = best.min(relative_entropy(&[w0, 0.0, 0.0], mu));
            }
            continue;
        }
        let a = 2.0 * (f1 + f0 - 2.0 * fh) / (r * r);
        let b = (f1 - f0) / r - a * r;
        let roots: Vec<f64> = if a.abs() < 1e-14 {
            if b.abs() < 1e-14 {
                vec![]
            } else {
                vec![-f0 / b]
            }
        } else {
            let disc = b * b - 4.0 * a * f0;
            if disc < 0.0 {
                vec![]
            } else {
                let s = disc.sqrt();
                vec![(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
            }
        };
        for t in roots {
            if (-1e-12..=r + 1e-12).contains(&t) {
                let t = t.clamp(0.0, r);
                best = best.min(relative_entropy(&[w0, t, r - t], mu));
            }
        }
    }
    best
}

#[test]
fn psi_matches_grid_oracles() {
    let mut rng = rng_from_seed(12);
    for _ in 0..20 {
        let mu = random_probability(&mut rng, 2, 0.1);
        let k = random_kernel(&mut rng, 2, 0.5, 5.0);
        let (lo, hi) = {
            let v: Vec<f64> = (0..=2000).map(|i| form(&k, &[i as f64 / 2000.0, 1.0 - i as f64 / 2000.0])).collect();
            (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        };
        for frac in [0.1, 0.35, 0.6, 0.9] {
            let y = lo + frac * (hi - lo);
            let solver = psi(y, &mu, &k).unwrap();
            let oracle = psi_grid_two(y, mu.weights(), &k);
            assert!((solver.value - oracle).abs() <= 1e-6, "m=2 y={y}: {} vs {oracle}", solver.value);
        }
    }
    for _ in 0..6 {
        let mu = random_probability(&mut rng, 3, 0.1);
        let k = random_kernel(&mut rng, 3, 0.5, 5.0);
        let center = form(&k, mu.weights());
        for y in [center * 0.9, center * 1.05, center * 1.15] {
            let oracle = psi_curve_three(y, mu.weights(), &k);
            let solver = psi(y, &mu, &k).unwrap();
            if oracle.is_finite() {
                assert!(solver.converged, "{solver:?}");
                assert!((solver.value - oracle).abs() <= 1e-4, "m=3 y={y}: {} vs {oracle}", solver.value);
            } else {
                assert!(solver.value.is_infinite());
            }
        }
    }
}

#[test]
fn psi_vanishes_exactly_at_the_center() {
    let mut rng = rng_from_seed(13);
    for _ in 0..20 {
        let mu = random_probability(&mut rng, 2, 0.1);
        let k = random_kernel(&mut rng, 2, 0.5, 5.0);
        let center = form(&k, mu.weights());
        assert!(psi(center, &mu, &k).unwrap().value.abs() <= 1e-10);
        for y in [center * 0.97, center * 1.03] {
            let v = psi(y, &mu, &k).unwrap().value;
            assert!(v > 1e-8, "ψ({y}) = {v} near center {center}");
        }
    }
    let (mu, k) = (ColorMeasure::uniform(1).unwrap(), Kernel::constant(1, 2.5).unwrap());
    assert_eq!(psi(2.5, &mu, &k).unwrap().value, 0.0);
    assert_eq!(psi(2.4, &mu, &k).unwrap().value, f64::INFINITY);
}

#[test]
fn zeta_is_convex_and_matches_closed_form() {
    let (mu, k) = (ColorMeasure::uniform(1).unwrap(), Kernel::constant(1, 2.0).unwrap());
    for x in [0.5, 1.0, 1.5, 3.0] {
        assert!((rate_zeta(x, &mu, &k).unwrap().value - rate_zeta_er(x, 2.0)).abs() <= 1e-8);
    }
    assert!((zeta_inner(0.0, &mu, &k).unwrap().value - 1.0).abs() <= 1e-10);
    assert!((rate_zeta_er(1.5, 2.0) - (1.5 * 1.5f64.ln() - 0.5)).abs() < 1e-15);
    let mut rng = rng_from_seed(14);
    for kernel in [k.clone(), random_kernel(&mut rng, 2, 0.5, 5.0)] {
        let mu = ColorMeasure::uniform(kernel.alphabet().size()).unwrap();
        let xs: Vec<f64> = (1..=24).map(|i| 0.125 * i as f64).collect();
        let z: Vec<f64> = xs.iter().map(|&x| rate_zeta(x, &mu, &kernel).unwrap().value).collect();
        for i in 1..z.len() - 1 {
            assert!(z[i] <= 0.5 * (z[i - 1] + z[i + 1]) + 1e-8, "not convex at x = {}", xs[i]);
        }
        assert!(z.iter().all(|&v| v >= -1e-10));
    }
    assert_eq!(xlnx(0.0), 0.0);
}

#[test]
fn ising_is_monotone_and_matches_oracle() {
    let betas = [0.0, 0.3, 0.6, 0.9, 1.2];
    let cs = [0.4, 0.8, 1.2, 1.6, 2.0];
    let mut grid = vec![vec![0.0; cs.len()]; betas.len()];
    for (i, &b) in betas.iter().enumerate() {
        for (j, &c) in cs.iter().enumerate() {
            let v = ising_annealed(b, c).unwrap();
            let o = ising_oracle(b, c).unwrap();
            assert!((v.value - o.value).abs() <= 1e-6, "β={b}, c={c}: {} vs {}", v.value, o.value);
            grid[i][j] = v.value;
        }
    }
    for i in 0..betas.len() {
        for j in 0..cs.len() {
            if i > 0 {
                assert!(grid[i][j] >= grid[i - 1][j] - 1e-10);
            }
            if j > 0 {
                assert!(grid[i][j] >= grid[i][j - 1] - 1e-10);
            }
        }
    }
    let zero = ising_annealed(0.0, 1.7).unwrap();
    assert!((zero.value - std::f64::consts::LN_2).abs() <= 1e-10);
    let x = zero.argument[0];
    assert!((x - 0.5).abs() < 1e-4, "{:?}", zero.argument);
    let expected = [1.7 * 0.25, 1.7 * 0.25, 1.7 * 0.25];
    for (got, want) in zero.argument[1..].iter().zip(expected) {
        assert!((got - want).abs() < 1e-3, "{:?}", zero.argument);
    }
}
