use colored_ldp::measures::approx::CONSISTIFY_TOL;
use colored_ldp::measures::quantize;
use colored_ldp::measures::{
    cap_degrees, consistify, degree_distribution, is_consistent, is_sub_consistent, phi, relative_entropy,
    total_variation, ColorCounts, ColorMeasure, DegreeVector, NeighborhoodMeasure, PairCounts, PairMeasure,
};
use colored_ldp::seed::rng_from_seed;
use colored_ldp::validation::{random_neighborhood, random_sub_consistent};
use proptest::prelude::*;

fn simplex(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, m).prop_filter_map("nonzero", |w| {
        let s: f64 = w.iter().sum();
        if s < 1e-6 {
            return None;
        }
        let mut w: Vec<f64> = w.iter().map(|x| x / s).collect();
        let rest: f64 = w[1..].iter().sum();
        w[0] = (1.0 - rest).max(0.0);
        Some(w)
    })
}

fn pair_of_simplices() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|m| (simplex(m), simplex(m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn relative_entropy_is_nonnegative((a, b) in pair_of_simplices()) {
        let (nu, mu) = (ColorMeasure::new(a.clone()).unwrap(), ColorMeasure::new(b).unwrap());
        let h = relative_entropy(&nu, &mu).unwrap();
        prop_assert!(h >= 0.0 || h.abs() < 1e-14, "H = {h}");
        prop_assert_eq!(relative_entropy(&nu, &ColorMeasure::new(a).unwrap()).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn total_variation_is_a_metric(seed in any::<u64>(), m in 1usize..=3) {
        let mut rng = rng_from_seed(seed);
        let x = random_neighborhood(&mut rng, m, 5, 2);
        let y = random_neighborhood(&mut rng, m, 5, 2);
        let z = random_neighborhood(&mut rng, m, 5, 2);
        let (xy, yx) = (total_variation(&x, &y).unwrap(), total_variation(&y, &x).unwrap());
        prop_assert!((xy - yx).abs() <= 1e-15);
        prop_assert_eq!(total_variation(&x, &x).unwrap(), 0.0);
        let (yz, xz) = (total_variation(&y, &z).unwrap(), total_variation(&x, &z).unwrap());
        prop_assert!(xz <= xy + yz + 1e-15);
        prop_assert!((0.0..=1.0).contains(&xy));
    }

    #[test]
    fn pair_mass_is_mean_degree(seed in any::<u64>(), m in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let nu = random_neighborhood(&mut rng, m, 8, 5);
        let (nu1, phi2) = phi(&nu);
        let direct: f64 = nu.iter().map(|(_, l, w)| w * l.magnitude() as f64).sum();
        prop_assert!((phi2.mass() - direct).abs() <= 1e-12 * direct.max(1.0));
        prop_assert!((nu1.mass() - 1.0).abs() <= 1e-12);
        prop_assert!((degree_distribution(&nu).mean() - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn consistify_reaches_consistency(seed in any::<u64>(), m in 1usize..=3, eps in 0.005f64..0.5) {
        let mut rng = rng_from_seed(seed);
        let (pair, nu) = random_sub_consistent(&mut rng, m);
        prop_assert!(is_sub_consistent(&pair, &nu, 0.0).unwrap());
        let out = consistify(&pair, &nu, eps).unwrap();
        prop_assert!(is_consistent(&out.pairs, &out.neighborhoods, CONSISTIFY_TOL).unwrap());
        prop_assert!(pair.matrix().max_abs_diff(&out.pairs).unwrap() <= eps);
        prop_assert!(total_variation(&nu, &out.neighborhoods).unwrap() <= eps);
    }
}

#[test]
fn consistify_identity_on_consistent_input() {
    let v = |x: &[u32]| DegreeVector::new(x.to_vec());
    let nu = NeighborhoodMeasure::probability(2, [(0, v(&[1, 1]), 0.5), (1, v(&[1, 1]), 0.5)]).unwrap();
    let pair = PairMeasure::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
    let out = consistify(&pair, &nu, 0.1).unwrap();
    assert_eq!(out.neighborhoods, nu);
    assert_eq!(out.scale, None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantize_and_cap_preserve_phi(seed in any::<u64>(), k in 1u64..=20) {
        // ν = one atom per degree 0..=4 at mass 1/5; n = 100k keeps every target integral
        let v = |x: u32| DegreeVector::new(vec![x]);
        let nu = NeighborhoodMeasure::probability(1, (0..5).map(|d| (0, v(d), 0.2))).unwrap();
        let n = 100 * k;
        let colors = ColorCounts::new(vec![n]).unwrap();
        let pairs = PairCounts::new(n, 1, vec![2 * n]).unwrap();
        let nu_n = quantize(&colors, &pairs, &nu, seed).unwrap();
        prop_assert!(nu_n.matches(&colors, &pairs));
        prop_assert_eq!(nu_n.n(), n);
        let capped = cap_degrees(&nu_n).unwrap();
        prop_assert_eq!(capped.phi_counts(), nu_n.phi_counts());
        prop_assert!(capped.max_magnitude() <= colored_ldp::math::icbrt(n));
    }
}

#[test]
fn quantize_median_distance_shrinks() {
    let v = |x: u32| DegreeVector::new(vec![x]);
    let nu = NeighborhoodMeasure::probability(1, (0..5).map(|d| (0, v(d), 0.2))).unwrap();
    let mut medians = Vec::new();
    for n in [100u64, 1000, 10_000] {
        let colors = ColorCounts::new(vec![n]).unwrap();
        let pairs = PairCounts::new(n, 1, vec![2 * n]).unwrap();
        let mut tvs: Vec<f64> = (0..20)
            .map(|s| total_variation(&quantize(&colors, &pairs, &nu, s).unwrap().to_measure(), &nu).unwrap())
            .collect();
        tvs.sort_by(f64::total_cmp);
        medians.push(0.5 * (tvs[9] + tvs[10]));
    }
    assert!(medians[0] >= medians[1] && medians[1] >= medians[2], "{medians:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn measures_round_trip_through_json(seed in any::<u64>(), m in 1usize..=3) {
        let mut rng = rng_from_seed(seed);
        let (pair, nu) = random_sub_consistent(&mut rng, m);
        let nu1 = nu.color_marginal();
        let back: NeighborhoodMeasure = serde_json::from_str(&serde_json::to_string(&nu).unwrap()).unwrap();
        prop_assert_eq!(back, nu);
        let back: PairMeasure = serde_json::from_str(&serde_json::to_string(&pair).unwrap()).unwrap();
        prop_assert_eq!(back, pair);
        let back: ColorMeasure = serde_json::from_str(&serde_json::to_string(&nu1).unwrap()).unwrap();
        prop_assert_eq!(back, nu1);
    }
}
