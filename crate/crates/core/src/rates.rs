//! Rate functions of the colored random graph and the limit laws at their
//! zeros. Everything here is a formula; numerical sub-problems are delegated
//! to [`crate::varsolve`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::math::{ln_poisson, poisson_truncation_point, xlnx, ExtReal};
use crate::measures::{
    is_sub_consistent, product_kernel_measure, relative_entropy, ColorMeasure, DegreeDistribution, DegreeVector,
    Kernel, NeighborhoodMeasure, PairMatrix, PairMeasure,
};
use crate::varsolve::{solve_degree_fixed_point, zeta_inner, SolveReport};

/// Absolute tolerance of the sub-consistency and marginal tests.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// A rate value with its named sub-costs.
///
/// Finite values equal the sum of the breakdown; infinite values carry a
/// reason.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateValue {
    pub value: ExtReal,
    pub breakdown: BTreeMap<String, ExtReal>,
    pub reason: Option<String>,
}

impl RateValue {
    fn from_terms(terms: &[(&str, f64)]) -> Self {
        let value: f64 = terms.iter().map(|(_, v)| v).sum();
        let breakdown = terms.iter().map(|(k, v)| (k.to_string(), ExtReal(*v))).collect();
        let reason = (!value.is_finite()).then(|| {
            let names: Vec<&str> = terms.iter().filter(|(_, v)| !v.is_finite()).map(|(k, _)| *k).collect();
            format!("infinite {} cost", names.join(" and "))
        });
        RateValue { value: ExtReal(value), breakdown, reason }
    }

    fn infinite(reason: impl Into<String>) -> Self {
        RateValue { value: ExtReal(f64::INFINITY), breakdown: BTreeMap::new(), reason: Some(reason.into()) }
    }

    pub fn value(&self) -> f64 {
        self.value.0
    }

    pub fn is_finite(&self) -> bool {
        self.value.0.is_finite()
    }
}

/// `𝔥_C(ϖ‖ω) = H(ϖ‖Cω⊗ω) + ‖Cω⊗ω‖ - ‖ϖ‖`.
pub fn h_c(pair: &PairMeasure, omega: &ColorMeasure, kernel: &Kernel) -> Result<f64> {
    pair.alphabet().check_same(omega.alphabet(), "𝔥_C")?;
    omega.require_probability("ω")?;
    let reference = product_kernel_measure(kernel, omega)?;
    let h = relative_entropy(pair, &reference)?;
    Ok(h + reference.mass() - pair.mass())
}

/// `ln Q(a,ℓ)` with `Q(a,ℓ) = ν₁(a) Π_b Poisson(ℓ(b); ϖ(a,b)/ν₁(a))`, and
/// `Q(a,·) = 0` when `ν₁(a) = 0`.
pub fn ln_q(pair: &PairMatrix, nu1: &ColorMeasure, a: usize, ell: &DegreeVector) -> f64 {
    let mass = nu1.weight(a);
    if mass == 0.0 {
        return f64::NEG_INFINITY;
    }
    let m = nu1.alphabet().size();
    let mut total = mass.ln();
    for b in 0..m {
        total += ln_poisson(pair.get(a, b) / mass, ell.get(b) as u64);
    }
    total
}

/// `Q[ϖ, ν₁]` evaluated on the given atoms (its support is infinite, so
/// callers choose which atoms they need).
pub fn q_measure<'a>(
    pair: impl AsRef<PairMatrix>,
    nu1: &ColorMeasure,
    support: impl IntoIterator<Item = (usize, &'a DegreeVector)>,
) -> Result<NeighborhoodMeasure> {
    let pair = pair.as_ref();
    pair.alphabet().check_same(nu1.alphabet(), "Q")?;
    let m = nu1.alphabet().size();
    let atoms = support.into_iter().map(|(a, ell)| (a, ell.clone(), ln_q(pair, nu1, a, ell).exp())).collect::<Vec<_>>();
    NeighborhoodMeasure::new(m, atoms)
}

/// The law at which all rates vanish: color `a ~ μ`, then independent
/// `ℓ(b) ~ Poisson(C(a,b) μ(b))`.
///
/// Each coordinate is truncated where its Poisson tail drops below
/// `tail_mass / m`, and each color block is rescaled to total `μ(a)` so the
/// result is a probability measure.
pub fn limit_law(mu: &ColorMeasure, kernel: &Kernel, tail_mass: f64) -> Result<NeighborhoodMeasure> {
    mu.alphabet().check_same(kernel.alphabet(), "limit law")?;
    mu.require_probability("μ")?;
    if !(tail_mass > 0.0 && tail_mass < 1.0) {
        return Err(domain("tail mass must lie in (0, 1)"));
    }
    let m = mu.alphabet().size();
    let per_coordinate = tail_mass / m as f64;
    let mut atoms = Vec::new();
    for a in 0..m {
        if mu.weight(a) == 0.0 {
            continue;
        }
        let lambdas: Vec<f64> = (0..m).map(|b| kernel.get(a, b) * mu.weight(b)).collect();
        let tops: Vec<u32> = lambdas.iter().map(|&l| poisson_truncation_point(l, per_coordinate) as u32).collect();
        let mut block = Vec::new();
        let mut ell = vec![0u32; m];
        loop {
            let ln_p: f64 = (0..m).map(|b| ln_poisson(lambdas[b], ell[b] as u64)).sum();
            block.push((DegreeVector::new(ell.clone()), ln_p.exp()));
            // odometer increment over the box Π [0, tops[b]]
            let mut b = 0;
            while b < m && ell[b] == tops[b] {
                ell[b] = 0;
                b += 1;
            }
            if b == m {
                break;
            }
            ell[b] += 1;
        }
        let total: f64 = block.iter().map(|(_, p)| p).sum();
        let scale = mu.weight(a) / total;
        atoms.extend(block.into_iter().map(|(l, p)| (a, l, p * scale)));
    }
    NeighborhoodMeasure::new(m, atoms)
}

/// `H(ν‖Q[ϖ, ν₁])`, summed over the support of `ν` only.
fn entropy_against_q(nu: &NeighborhoodMeasure, pair: &PairMatrix, nu1: &ColorMeasure) -> f64 {
    nu.iter()
        .map(|(a, ell, mass)| {
            let lq = ln_q(pair, nu1, a, ell);
            if lq == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                mass * (mass.ln() - lq)
            }
        })
        .sum()
}

/// `J(ϖ, ν) = H(ν‖Q) + H(ν₁‖μ) + ½𝔥_C(ϖ‖ν₁)` on sub-consistent pairs, `+inf`
/// otherwise. The breakdown names the `neighborhood`, `color` and `pair`
/// costs.
pub fn rate_j(pair: &PairMeasure, nu: &NeighborhoodMeasure, mu: &ColorMeasure, kernel: &Kernel) -> Result<RateValue> {
    pair.alphabet().check_same(nu.alphabet(), "J")?;
    pair.alphabet().check_same(mu.alphabet(), "J")?;
    pair.alphabet().check_same(kernel.alphabet(), "J")?;
    mu.require_probability("μ")?;
    nu.require_probability("ν")?;
    if !is_sub_consistent(pair, nu, CONSISTENCY_TOL)? {
        return Ok(RateValue::infinite("(ϖ, ν) is not sub-consistent"));
    }
    let nu1 = nu.color_marginal();
    let neighborhood = entropy_against_q(nu, pair.matrix(), &nu1);
    let color = relative_entropy(&nu1, mu)?;
    let pair_cost = 0.5 * h_c(pair, &nu1, kernel)?;
    Ok(RateValue::from_terms(&[("neighborhood", neighborhood), ("color", color), ("pair", pair_cost)]))
}

/// `I(ω, ϖ) = H(ω‖μ) + ½𝔥_C(ϖ‖ω)`.
pub fn rate_i(omega: &ColorMeasure, pair: &PairMeasure, mu: &ColorMeasure, kernel: &Kernel) -> Result<RateValue> {
    omega.alphabet().check_same(mu.alphabet(), "I")?;
    mu.require_probability("μ")?;
    let color = relative_entropy(omega, mu)?;
    let pair_cost = rate_i_omega(pair, omega, kernel)?;
    Ok(RateValue::from_terms(&[("color", color), ("pair", pair_cost)]))
}

/// `I_ω(ϖ) = ½𝔥_C(ϖ‖ω)`, the rate of `L²` given `L¹ = ω`.
pub fn rate_i_omega(pair: &PairMeasure, omega: &ColorMeasure, kernel: &Kernel) -> Result<f64> {
    Ok(0.5 * h_c(pair, omega, kernel)?)
}

/// `J̃(ν) = H(ν‖Q[ϖ, ν])` when `(ϖ, ν)` is sub-consistent and `ν₁ = ω`,
/// `+inf` otherwise.
pub fn rate_j_tilde(nu: &NeighborhoodMeasure, omega: &ColorMeasure, pair: &PairMeasure) -> Result<f64> {
    nu.alphabet().check_same(omega.alphabet(), "J̃")?;
    nu.alphabet().check_same(pair.alphabet(), "J̃")?;
    omega.require_probability("ω")?;
    nu.require_probability("ν")?;
    let nu1 = nu.color_marginal();
    let same_marginal = nu1.weights().iter().zip(omega.weights()).all(|(x, y)| (x - y).abs() <= CONSISTENCY_TOL);
    if !same_marginal || !is_sub_consistent(pair, nu, CONSISTENCY_TOL)? {
        return Ok(f64::INFINITY);
    }
    Ok(entropy_against_q(nu, pair.matrix(), &nu1))
}

/// Which formula [`rate_delta_detailed`] used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeBranch {
    /// `⟨d⟩ <= c`: `x` solves the fixed point.
    FixedPoint,
    /// `c < ⟨d⟩ < ∞`: `x = ⟨d⟩`.
    Mean,
    /// `⟨d⟩ = ∞`.
    InfiniteMean,
}

/// The degree rate with the intermediate `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeRate {
    pub value: ExtReal,
    pub x: ExtReal,
    pub branch: DegreeBranch,
    pub fixed_point: Option<SolveReport>,
}

/// `δ(d) = ½ x ln(x/c) - x/2 + c/2 + H(d‖Poisson(x))` for the Erdős–Rényi
/// graph with mean degree `c`.
pub fn rate_delta_detailed(d: &DegreeDistribution, c: f64) -> Result<DegreeRate> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("mean degree c = {c} must be finite and positive")));
    }
    if d.has_infinite_mean() {
        return Ok(DegreeRate {
            value: ExtReal(f64::INFINITY),
            x: ExtReal(f64::INFINITY),
            branch: DegreeBranch::InfiniteMean,
            fixed_point: None,
        });
    }
    let mean = d.mean();
    let (x, branch, fixed_point) = if mean <= c {
        let r = solve_degree_fixed_point(mean, c)?;
        (r.value, DegreeBranch::FixedPoint, Some(r))
    } else {
        (mean, DegreeBranch::Mean, None)
    };
    let relative: f64 = d
        .probs()
        .iter()
        .enumerate()
        .map(|(k, &p)| if p == 0.0 { 0.0 } else { p * (p.ln() - ln_poisson(x, k as u64)) })
        .sum();
    let value = 0.5 * x * (x / c).ln() - 0.5 * x + 0.5 * c + relative;
    Ok(DegreeRate { value: ExtReal(value), x: ExtReal(x), branch, fixed_point })
}

pub fn rate_delta(d: &DegreeDistribution, c: f64) -> Result<f64> {
    Ok(rate_delta_detailed(d, c)?.value.0)
}

/// `ζ(x) = x ln x - x + inf_y { ψ(y) - x ln(y/2) + y/2 }`, the rate of
/// `|E|/n`. The report's argument is the minimizing `y`.
pub fn rate_zeta(x: f64, mu: &ColorMeasure, kernel: &Kernel) -> Result<SolveReport> {
    let mut r = zeta_inner(x, mu, kernel)?;
    // ζ >= 0; the sum cancels to rounding error at the mean edge density
    r.value = (r.value + xlnx(x) - x).max(0.0);
    Ok(r)
}

/// Erdős–Rényi closed form `x ln x - x - x ln(c/2) + c/2`.
pub fn rate_zeta_er(x: f64, c: f64) -> f64 {
    xlnx(x) - x - if x == 0.0 { 0.0 } else { x * (0.5 * c).ln() } + 0.5 * c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_c_examples() {
        let k = Kernel::new(1, vec![2.0]).unwrap();
        let w = ColorMeasure::probability(vec![1.0]).unwrap();
        let v = h_c(&PairMeasure::new(1, vec![1.0]).unwrap(), &w, &k).unwrap();
        assert!((v - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!((v - 0.306853).abs() < 1e-6);
        assert_eq!(h_c(&PairMeasure::new(1, vec![2.0]).unwrap(), &w, &k).unwrap(), 0.0);
        let k2 = Kernel::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let off = PairMeasure::from_rows(&[vec![0.0, 0.1], vec![0.1, 0.0]]).unwrap();
        assert_eq!(h_c(&off, &ColorMeasure::uniform(2).unwrap(), &k2).unwrap(), f64::INFINITY);
        assert_eq!(rate_i_omega(&off, &ColorMeasure::uniform(2).unwrap(), &k2).unwrap(), f64::INFINITY);
    }

    #[test]
    fn zeta_er_closed_points() {
        let c = 2.0;
        assert_eq!(rate_zeta_er(0.0, c), 1.0);
        assert!(rate_zeta_er(1.0, c).abs() < 1e-16);
        assert!((rate_zeta_er(2.0, c) - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!((rate_zeta_er(1.5, c) - (1.5 * 1.5f64.ln() - 0.5)).abs() < 1e-15);
        assert!((rate_zeta_er(1.5, c) - 0.108198).abs() < 1e-6);
    }

    #[test]
    fn delta_closed_points() {
        for c in [1.0, 2.0, 4.0] {
            let v = rate_delta(&DegreeDistribution::point(0), c).unwrap();
            assert!((v - 0.5 * c * (1.0 - (-2.0f64).exp())).abs() < 1e-10, "c={c}: {v}");
            let p = DegreeDistribution::poisson(c, 1e-14).unwrap();
            assert!(rate_delta(&p, c).unwrap().abs() < 1e-10);
        }
        assert_eq!(rate_delta(&DegreeDistribution::with_infinite_mean(), 2.0).unwrap(), f64::INFINITY);
        assert!(rate_delta(&DegreeDistribution::point(0), 0.0).is_err());
    }

    #[test]
    fn rate_i_examples() {
        let mu = ColorMeasure::probability(vec![0.25, 0.75]).unwrap();
        let k = Kernel::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let zero = rate_i(&mu, &product_kernel_measure(&k, &mu).unwrap(), &mu, &k).unwrap();
        assert_eq!(zero.value(), 0.0);
        let omega = ColorMeasure::uniform(2).unwrap();
        let r = rate_i(&omega, &product_kernel_measure(&k, &omega).unwrap(), &mu, &k).unwrap();
        assert_eq!(r.value(), relative_entropy(&omega, &mu).unwrap());

        // one color: I(1, mass 2x) equals the Erdős–Rényi edge rate
        let c = 2.0;
        let one = ColorMeasure::probability(vec![1.0]).unwrap();
        let kc = Kernel::constant(1, c).unwrap();
        for x in [0.3, 1.0, 2.5] {
            let v = rate_i(&one, &PairMeasure::new(1, vec![2.0 * x]).unwrap(), &one, &kc).unwrap().value();
            assert!((v - rate_zeta_er(x, c)).abs() < 1e-14);
        }
    }

    #[test]
    fn rate_value_json() {
        let r = RateValue::infinite("not sub-consistent");
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"value":"inf","breakdown":{},"reason":"not sub-consistent"}"#);
        let f = RateValue::from_terms(&[("color", 0.5), ("pair", 0.25)]);
        assert_eq!(f.value(), 0.75);
        assert_eq!(f.reason, None);
    }
}
