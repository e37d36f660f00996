//! Constructive approximation of a sub-consistent pair `(ϖ, ν)` by exact
//! `n`-empirical measures with bounded degrees.
//!
//! The three steps are [`consistify`] (make `Φ₂(ν) = ϖ` by moving a small
//! amount of mass onto very high degree atoms), [`quantize`] (draw `n`
//! vertices and repair Φ exactly) and [`cap_degrees`] (redistribute degree
//! mass so that no vertex exceeds `⌊n^{1/3}⌋`).

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::counts::{ColorCounts, NeighborhoodCounts, PairCounts};
use super::{phi, DegreeVector, NeighborhoodMeasure, PairMatrix};
use crate::error::{domain, Error, Result};
use crate::math::{i4rt, icbrt};
use crate::seed::rng_from_seed;

/// Slack allowed on the sub-consistency precondition of [`consistify`].
pub const CONSISTIFY_TOL: f64 = 1e-12;

/// Output of [`consistify`].
#[derive(Clone, Debug, PartialEq)]
pub struct Consistified {
    /// `ϖ̂ = Φ₂(ν̂)`; symmetric whenever the input pair measure is.
    pub pairs: PairMatrix,
    pub neighborhoods: NeighborhoodMeasure,
    /// Scale of the added atoms `ℓ = n e^(b)`; `None` when the input was
    /// already consistent and returned unchanged.
    pub scale: Option<u64>,
}

/// Makes `(ϖ, ν)` consistent while moving at most `ε` in total variation and
/// at most `ε` in every entry of `ϖ`.
///
/// With deficit `D = ϖ - Φ₂(ν)` of total mass `s`, the result is
/// `ν̂ = (1 - s/n) ν + Σ_{a,b} D(a,b)/n · δ_{(a, n e^(b))}`, so
/// `Φ₂(ν̂) = ϖ - (s/n) Φ₂(ν)`. Taking `n ≥ (‖ϖ‖+1)²/ε` bounds both errors.
pub fn consistify(pair: impl AsRef<PairMatrix>, nu: &NeighborhoodMeasure, eps: f64) -> Result<Consistified> {
    let pair = pair.as_ref();
    pair.alphabet().check_same(nu.alphabet(), "consistify")?;
    nu.require_probability("consistify input ν")?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(domain("consistify needs a finite ε > 0"));
    }
    let m = pair.alphabet().size();
    let (_, induced) = phi(nu);
    let mut deficit = vec![0.0; m * m];
    for (i, (&w, &x)) in pair.entries().iter().zip(induced.entries()).enumerate() {
        if x > w + CONSISTIFY_TOL {
            return Err(domain(format!(
                "(ϖ, ν) is not sub-consistent at ({}, {}): Φ₂(ν) = {x} > ϖ = {w}",
                i / m,
                i % m
            )));
        }
        deficit[i] = (w - x).max(0.0);
    }
    let s: f64 = deficit.iter().sum();
    if s == 0.0 {
        return Ok(Consistified { pairs: pair.clone(), neighborhoods: nu.clone(), scale: None });
    }

    let norm = pair.mass();
    let n = ((norm + 1.0).powi(2) / eps).ceil().max(s.floor() + 1.0);
    if n > u32::MAX as f64 {
        return Err(Error::Resource(format!(
            "consistify scale n = {n:.3e} exceeds the degree vector range; use a larger ε"
        )));
    }
    let n_int = n as u32;
    let keep = 1.0 - s / n;
    let atoms = nu
        .iter()
        .map(|(a, ell, mass)| (a, ell.clone(), mass * keep))
        .chain((0..m).flat_map(|a| {
            let deficit = &deficit;
            (0..m).filter_map(move |b| {
                let d = deficit[a * m + b];
                (d > 0.0).then(|| (a, DegreeVector::unit(m, b, n_int), d / n))
            })
        }))
        .collect::<Vec<_>>();
    let nu_hat = NeighborhoodMeasure::new(m, atoms)?;
    let (_, pairs) = phi(&nu_hat);
    Ok(Consistified { pairs, neighborhoods: nu_hat, scale: Some(n_int as u64) })
}

/// Draws an `n`-empirical neighborhood measure with `Φ = (ω_n, ϖ_n)` exactly.
///
/// For each color `a`, `n ω_n(a)` degree vectors are drawn i.i.d. from
/// `ν(·|a)`. Each entry sum `Σ_v ℓ_v(b)` is then repaired to `n ϖ_n(a,b)`: a
/// shortfall is added to the last vector of that color, an excess is removed
/// one unit at a time from nonzero entries, scanning vertices in index order.
pub fn quantize(
    colors: &ColorCounts,
    pairs: &PairCounts,
    nu: &NeighborhoodMeasure,
    seed: u64,
) -> Result<NeighborhoodCounts> {
    let m = colors.alphabet().size();
    colors.alphabet().check_same(pairs.alphabet(), "quantize")?;
    colors.alphabet().check_same(nu.alphabet(), "quantize")?;
    if colors.n() != pairs.n() {
        return Err(domain(format!("ω_n has n = {} but ϖ_n has n = {}", colors.n(), pairs.n())));
    }
    let mut rng = rng_from_seed(seed);
    let mut vertices: Vec<(usize, DegreeVector)> = Vec::with_capacity(colors.n() as usize);

    for a in 0..m {
        let count = colors.get(a) as usize;
        let row_target: u64 = (0..m).map(|b| pairs.get(a, b)).sum();
        if count == 0 {
            if row_target > 0 {
                return Err(Error::Construction(format!(
                    "color {a} has no vertices but needs {row_target} edge endpoints"
                )));
            }
            continue;
        }
        let support: Vec<(&DegreeVector, f64)> =
            nu.iter().filter(|(c, _, _)| *c == a).map(|(_, l, w)| (l, w)).collect();
        let mut block: Vec<DegreeVector> = if support.is_empty() {
            vec![DegreeVector::zeros(m); count]
        } else {
            let index = WeightedIndex::new(support.iter().map(|(_, w)| *w))
                .map_err(|e| Error::Construction(format!("cannot sample ν(·|{a}): {e}")))?;
            (0..count).map(|_| support[index.sample(&mut rng)].0.clone()).collect()
        };

        for b in 0..m {
            let target = pairs.get(a, b);
            let current: u64 = block.iter().map(|l| l.get(b) as u64).sum();
            if current < target {
                let last = block.last_mut().expect("count > 0");
                let raised = last.get(b) as u64 + (target - current);
                last.counts_mut()[b] = u32::try_from(raised)
                    .map_err(|_| Error::Construction(format!("repair of entry ({a},{b}) overflows")))?;
            } else {
                let mut excess = current - target;
                while excess > 0 {
                    for l in block.iter_mut() {
                        if excess == 0 {
                            break;
                        }
                        if l.get(b) > 0 {
                            l.counts_mut()[b] -= 1;
                            excess -= 1;
                        }
                    }
                }
            }
        }
        vertices.extend(block.into_iter().map(|l| (a, l)));
    }

    let out = NeighborhoodCounts::from_vertices(m, vertices)?;
    debug_assert!(out.matches(colors, pairs));
    Ok(out)
}

/// Rebuilds `ν_n` so that every vertex has degree at most `⌊n^{1/3}⌋`,
/// keeping Φ exact.
///
/// Vertices above the cap (V⁺) are trimmed round-robin over their nonzero
/// entries. The removed units of each `(a,b)` go first to color-`a` vertices
/// of original degree at most `⌊n^{1/4}⌋` (V⁻), then to any color-`a` vertex
/// with spare capacity.
pub fn cap_degrees(nu_n: &NeighborhoodCounts) -> Result<NeighborhoodCounts> {
    let n = nu_n.n();
    let cap = icbrt(n);
    if nu_n.max_magnitude() <= cap {
        return Ok(nu_n.clone());
    }
    let m = nu_n.alphabet().size();
    let small = i4rt(n);
    let mut vertices = nu_n.vertices();

    let mut per_color = vec![(0u64, 0u64); m];
    for (a, l) in &vertices {
        per_color[*a].0 += 1;
        per_color[*a].1 += l.magnitude();
    }
    for (a, &(count, mass)) in per_color.iter().enumerate() {
        if mass > cap * count {
            return Err(domain(format!(
                "color {a} carries degree mass {mass} but {count} vertices with cap {cap} hold at most {}",
                cap * count
            )));
        }
    }

    let original: Vec<u64> = vertices.iter().map(|(_, l)| l.magnitude()).collect();
    let mut removed = vec![0u64; m * m];
    for (a, l) in vertices.iter_mut() {
        let mut excess = l.magnitude().saturating_sub(cap);
        while excess > 0 {
            for b in 0..m {
                if excess == 0 {
                    break;
                }
                if l.get(b) > 0 {
                    l.counts_mut()[b] -= 1;
                    removed[*a * m + b] += 1;
                    excess -= 1;
                }
            }
        }
    }

    for pass_small in [true, false] {
        for (i, (a, l)) in vertices.iter_mut().enumerate() {
            if pass_small && original[i] > small {
                continue;
            }
            for b in 0..m {
                let spare = cap - l.magnitude();
                let give = spare.min(removed[*a * m + b]);
                if give > 0 {
                    l.counts_mut()[b] += give as u32;
                    removed[*a * m + b] -= give;
                }
            }
        }
    }
    debug_assert!(removed.iter().all(|&r| r == 0));

    NeighborhoodCounts::from_vertices(m, vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{is_consistent, total_variation, PairMeasure};

    #[test]
    fn consistify_identity_on_consistent_input() {
        let nu = NeighborhoodMeasure::point(1, 0, DegreeVector::new(vec![2])).unwrap();
        let pair = PairMeasure::new(1, vec![2.0]).unwrap();
        let out = consistify(&pair, &nu, 0.1).unwrap();
        assert_eq!(out.scale, None);
        assert_eq!(out.neighborhoods, nu);
        assert_eq!(&out.pairs, pair.matrix());
    }

    #[test]
    fn consistify_single_color_formula() {
        let delta = 0.75;
        let nu = NeighborhoodMeasure::point(1, 0, DegreeVector::zeros(1)).unwrap();
        let pair = PairMeasure::new(1, vec![delta]).unwrap();
        let eps = 0.01;
        let out = consistify(&pair, &nu, eps).unwrap();
        let n = out.scale.unwrap();
        assert_eq!(n, ((1.0f64 + delta).powi(2) / eps).ceil() as u64);
        let top = DegreeVector::new(vec![n as u32]);
        assert!((out.neighborhoods.get(0, &top) - delta / n as f64).abs() < 1e-18);
        assert!((out.pairs.get(0, 0) - delta).abs() < 1e-12);
        assert!(is_consistent(&out.pairs, &out.neighborhoods, 1e-12).unwrap());
        assert!(total_variation(&nu, &out.neighborhoods).unwrap() <= eps);
    }

    #[test]
    fn consistify_rejects_non_sub_consistent() {
        let nu = NeighborhoodMeasure::point(1, 0, DegreeVector::new(vec![5])).unwrap();
        let pair = PairMeasure::new(1, vec![1.0]).unwrap();
        assert!(matches!(consistify(&pair, &nu, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn quantize_keeps_exact_input() {
        let colors = ColorCounts::new(vec![2]).unwrap();
        let pairs = PairCounts::new(2, 1, vec![2]).unwrap();
        let nu = NeighborhoodMeasure::point(1, 0, DegreeVector::new(vec![1])).unwrap();
        let out = quantize(&colors, &pairs, &nu, 3).unwrap();
        assert!(out.matches(&colors, &pairs));
        assert_eq!(out.to_measure(), nu);
    }

    #[test]
    fn cap_moves_excess_to_isolated_vertices() {
        // n = 64, cap 4: one vertex of degree 8 above the cap
        let mut vertices = vec![(0usize, DegreeVector::new(vec![8]))];
        vertices.extend((0..8).map(|_| (0, DegreeVector::new(vec![1]))));
        vertices.extend((0..55).map(|_| (0, DegreeVector::zeros(1))));
        let before = NeighborhoodCounts::from_vertices(1, vertices).unwrap();
        let after = cap_degrees(&before).unwrap();
        assert_eq!(after.n(), 64);
        assert!(after.max_magnitude() <= 4);
        assert_eq!(after.phi_counts(), before.phi_counts());
    }

    #[test]
    fn cap_rejects_overfull_color() {
        let vertices = vec![(0usize, DegreeVector::new(vec![3])), (0, DegreeVector::new(vec![3]))];
        let nu = NeighborhoodCounts::from_vertices(1, vertices).unwrap();
        assert!(matches!(cap_degrees(&nu), Err(Error::Domain(_))));
    }
}
