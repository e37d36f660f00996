//! Exact reference computations: binomial tails, composition and vector
//! partition counts with their bounds, and Ising partition functions by
//! direct summation.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Error, Result};
use crate::graphs::ColoredGraph;
use crate::math::{ln_one_minus_exp, log_add_exp, xlnx};
use crate::measures::{DegreeVector, NeighborhoodCounts};
use crate::seed::rng_from_seed;
use crate::varsolve::optim::scan_then_golden;
use crate::varsolve::SolveReport;

/// An exact nonnegative integer, serialized as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn ln(&self) -> f64 {
        big_ln(&self.0)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl Serialize for BigCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_str_radix(10))
    }
}

impl<'de> Deserialize<'de> for BigCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10)
            .map(BigCount)
            .ok_or_else(|| serde::de::Error::custom(format!("`{s}` is not a decimal integer")))
    }
}

/// Natural log of a big integer (`-inf` for zero), exact to double precision.
pub fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("64-bit mantissa").ln() + shift as f64 * std::f64::consts::LN_2
}

// ---------------------------------------------------------------------------
// Binomial tails

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Stirling remainder `ln k! - (k + ½) ln k + k - ln √(2π)` for `k >= 1`.
fn stirlerr(k: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if k > 15.0 {
        let kk = k * k;
        (S0 - (S1 - (S2 - (S3 - S4 / kk) / kk) / kk) / kk) / k
    } else {
        ln_gamma(k + 1.0) - (k + 0.5) * k.ln() + k - LN_SQRT_2PI
    }
}

/// Deviance term `x ln(x/μ) + μ - x`, by series when `x ≈ μ`.
fn bd0(x: f64, mu: f64) -> f64 {
    if (x - mu).abs() < 0.1 * (x + mu) {
        let v = (x - mu) / (x + mu);
        let mut s = (x - mu) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s;
            }
            s = s1;
        }
        s
    } else {
        x * (x / mu).ln() + mu - x
    }
}

/// `ln P(X = x)` for `X ~ Binomial(n, p)` with `0 < p < 1`.
fn ln_dbinom(x: u64, n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    if x == 0 {
        return n as f64 * (-p).ln_1p();
    }
    if x == n {
        return n as f64 * p.ln();
    }
    let (xf, nf) = (x as f64, n as f64);
    let y = nf - xf;
    stirlerr(nf)
        - stirlerr(xf)
        - stirlerr(y)
        - bd0(xf, nf * p)
        - bd0(y, nf * q)
        - 0.5 * (2.0 * std::f64::consts::PI * xf * y / nf).ln()
}

/// Terms this far below the first (in nats) are dropped from tail sums.
const TAIL_CUTOFF: f64 = 40.0;

/// `ln P(X >= k)` for `X ~ Binomial(N, p)`.
///
/// Above the mode the upper tail is summed directly; otherwise the result is
/// `ln(1 - P(X < k))` with the lower tail summed downwards. Point masses use
/// the saddle-point form with Stirling remainders and deviance terms, so no
/// probability is ever formed outside the log domain. `k = N + 1` gives
/// `-inf`.
pub fn binomial_log_tail(n: u64, p: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("probability {p} outside [0, 1]")));
    }
    if k > n.saturating_add(1) {
        return Err(domain(format!("threshold {k} exceeds N + 1 = {}", n + 1)));
    }
    if k == 0 {
        return Ok(0.0);
    }
    if k > n || p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let mode = ((n as f64 + 1.0) * p).floor() as u64;
    if k > mode {
        let first = ln_dbinom(k, n, p);
        let mut acc = first;
        for j in k + 1..=n {
            let t = ln_dbinom(j, n, p);
            if t < first - TAIL_CUTOFF {
                break;
            }
            acc = log_add_exp(acc, t);
        }
        Ok(acc)
    } else {
        let first = ln_dbinom(k - 1, n, p);
        let mut acc = first;
        for j in (0..k - 1).rev() {
            let t = ln_dbinom(j, n, p);
            if t < first - TAIL_CUTOFF {
                break;
            }
            acc = log_add_exp(acc, t);
        }
        Ok(ln_one_minus_exp(acc.min(0.0)))
    }
}

// ---------------------------------------------------------------------------
// Compositions and partitions

/// Number of `(l_1, .., l_parts) ∈ ℕ^parts` with sum `j`, by dynamic
/// programming over the number of parts.
pub fn composition_count(j: u64, parts: u32) -> Result<BigCount> {
    if parts == 0 {
        return Err(domain("compositions need at least one part"));
    }
    let len = j as usize + 1;
    let mut ways: Vec<BigUint> = vec![BigUint::one(); len];
    for _ in 1..parts {
        let mut running = BigUint::zero();
        for w in ways.iter_mut() {
            running += &*w;
            *w = running.clone();
        }
    }
    Ok(BigCount(ways[j as usize].clone()))
}

/// Both sides of `j^{p-1} <= count · (p-1)! <= (j+p)^{p-1}`, compared in
/// exact integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub j: u64,
    pub parts: u32,
    pub count: BigCount,
    pub lower: BigCount,
    pub scaled_count: BigCount,
    pub upper: BigCount,
    pub holds: bool,
}

pub fn composition_sandwich(j: u64, parts: u32) -> Result<Sandwich> {
    let count = composition_count(j, parts)?;
    let e = parts - 1;
    let factorial: BigUint = (1..=e as u64).map(BigUint::from).product();
    let lower = BigUint::from(j).pow(e);
    let upper = BigUint::from(j + parts as u64).pow(e);
    let scaled = &count.0 * factorial;
    let holds = lower <= scaled && scaled <= upper;
    Ok(Sandwich {
        j,
        parts,
        count,
        lower: BigCount(lower),
        scaled_count: BigCount(scaled),
        upper: BigCount(upper),
        holds,
    })
}

/// Largest magnitude accepted by [`vector_partition_count`].
pub const PARTITION_BUDGET: u64 = 14;

/// Number of multisets of nonzero vectors summing to `ℓ`.
///
/// Parts are listed in decreasing order (magnitude first, then
/// lexicographic) and partitions are generated depth-first as nonincreasing
/// sequences in that order; counts of the remaining sub-problems are
/// memoized by `(remainder, smallest allowed part)`.
pub fn vector_partition_count(ell: &DegreeVector) -> Result<BigCount> {
    let total = ell.magnitude();
    if total > PARTITION_BUDGET {
        return Err(Error::Resource(format!(
            "vector partitions of magnitude {total} exceed the budget of {PARTITION_BUDGET}"
        )));
    }
    let bounds = ell.counts();
    let mut parts: Vec<Vec<u32>> = Vec::new();
    let mut v = vec![0u32; bounds.len()];
    loop {
        if v.iter().any(|&x| x > 0) {
            parts.push(v.clone());
        }
        let mut i = 0;
        while i < v.len() && v[i] == bounds[i] {
            v[i] = 0;
            i += 1;
        }
        if i == v.len() {
            break;
        }
        v[i] += 1;
    }
    let magnitude = |p: &Vec<u32>| p.iter().map(|&x| x as u64).sum::<u64>();
    parts.sort_by(|a, b| magnitude(b).cmp(&magnitude(a)).then_with(|| b.cmp(a)));

    fn count(
        rest: &[u32],
        start: usize,
        parts: &[Vec<u32>],
        memo: &mut HashMap<(Vec<u32>, usize), BigUint>,
    ) -> BigUint {
        if rest.iter().all(|&x| x == 0) {
            return BigUint::one();
        }
        let key = (rest.to_vec(), start);
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let mut total = BigUint::zero();
        let mut next = rest.to_vec();
        for (i, part) in parts.iter().enumerate().skip(start) {
            if part.iter().zip(rest).all(|(a, b)| a <= b) {
                for (n, (r, a)) in next.iter_mut().zip(rest.iter().zip(part)) {
                    *n = r - a;
                }
                total += count(&next.clone(), i, parts, memo);
            }
        }
        memo.insert(key, total.clone());
        total
    }

    let mut memo = HashMap::new();
    Ok(BigCount(count(bounds, 0, &parts, &mut memo)))
}

/// Scalar partition numbers `p(0..=max)` by Euler's pentagonal recurrence.
pub fn partition_numbers(max: usize) -> Vec<BigUint> {
    let mut p: Vec<BigUint> = vec![BigUint::one()];
    for s in 1..=max {
        let (mut plus, mut minus) = (BigUint::zero(), BigUint::zero());
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > s {
                break;
            }
            let g2 = k * (3 * k + 1) / 2;
            let target = if k % 2 == 1 { &mut plus } else { &mut minus };
            *target += &p[s - g1];
            if g2 <= s {
                *target += &p[s - g2];
            }
        }
        p.push(plus - minus);
    }
    p
}

/// Surrogate constant for the vector partition exponent, per color.
pub const THETA_PER_COLOR: f64 = 3.0;
/// Surrogate constant for scalar partitions, `ln p(S) <= 2.57 √S`.
pub const SCALAR_PARTITION_CONSTANT: f64 = 2.57;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionBoundRow {
    pub magnitude: u64,
    pub max_count: BigCount,
    pub argmax: DegreeVector,
    pub theta_hat: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarPartitionRow {
    pub s: u64,
    pub count: BigCount,
    pub ln_count: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionBoundReport {
    pub m: usize,
    pub theta_bound: f64,
    pub rows: Vec<PartitionBoundRow>,
    pub scalar: Vec<ScalarPartitionRow>,
    pub all_hold: bool,
}

/// `ϑ̂(S) = ln count / (ln S · S^{(2m-1)/(2m)})`, zero at `S = 1`.
pub fn theta_hat(count: &BigCount, s: u64, m: usize) -> f64 {
    if s <= 1 {
        return 0.0;
    }
    let sf = s as f64;
    count.ln() / (sf.ln() * sf.powf((2 * m - 1) as f64 / (2 * m) as f64))
}

/// For each magnitude `S`, the largest vector partition count over
/// `‖ℓ‖ = S` in dimension `m` and its exponent `ϑ̂(S)` against `3m`; plus
/// `p(S) <= exp(2.57 √S)` for scalar `S <= scalar_max`.
pub fn partition_bound_check(m: usize, magnitudes: &[u64], scalar_max: usize) -> Result<PartitionBoundReport> {
    if m == 0 {
        return Err(domain("m must be positive"));
    }
    let theta_bound = THETA_PER_COLOR * m as f64;
    let mut rows = Vec::new();
    for &s in magnitudes {
        let mut best: Option<(BigCount, DegreeVector)> = None;
        for v in vectors_of_magnitude(m, s) {
            let c = vector_partition_count(&v)?;
            if best.as_ref().is_none_or(|(b, _)| c > *b) {
                best = Some((c, v));
            }
        }
        let (max_count, argmax) = best.expect("at least one vector");
        let th = theta_hat(&max_count, s, m);
        rows.push(PartitionBoundRow { magnitude: s, holds: th <= theta_bound, max_count, argmax, theta_hat: th });
    }
    let p = partition_numbers(scalar_max);
    let scalar: Vec<ScalarPartitionRow> = (1..=scalar_max)
        .map(|s| {
            let count = BigCount(p[s].clone());
            let ln_count = count.ln();
            let bound = SCALAR_PARTITION_CONSTANT * (s as f64).sqrt();
            ScalarPartitionRow { s: s as u64, holds: ln_count <= bound, count, ln_count, bound }
        })
        .collect();
    let all_hold = rows.iter().all(|r| r.holds) && scalar.iter().all(|r| r.holds);
    Ok(PartitionBoundReport { m, theta_bound, rows, scalar, all_hold })
}

/// All vectors in `ℕ^m` with entry sum `s`.
pub fn vectors_of_magnitude(m: usize, s: u64) -> Vec<DegreeVector> {
    fn rec(prefix: &mut Vec<u32>, m: usize, rest: u64, out: &mut Vec<DegreeVector>) {
        if prefix.len() + 1 == m {
            prefix.push(rest as u32);
            out.push(DegreeVector::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for x in 0..=rest {
            prefix.push(x as u32);
            rec(prefix, m, rest - x, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(m), m, s, &mut out);
    out
}

/// The support-size bound for `n`-empirical neighborhood measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBound {
    pub support: usize,
    /// `n ‖ϖ_n‖`, the total degree.
    pub degree_mass: u64,
    pub bound: f64,
    pub holds: bool,
}

/// Constants `(C, D)` of the support bound in dimension `m`.
pub fn support_bound_constants(m: usize) -> (f64, f64) {
    let mf = m as f64;
    let two_m = 2f64.powi(m as i32);
    let c = two_m * gamma(mf + 2.0).powf(mf / (mf + 1.0)) / gamma(mf);
    let d = two_m * (mf + 1.0).powi(m as i32) / gamma(mf);
    (c, d)
}

/// `♯supp(ν_n) <= C (n‖ϖ_n‖)^{m/(m+1)} + D`.
pub fn support_bound_check(nu_n: &NeighborhoodCounts) -> SupportBound {
    let m = nu_n.alphabet().size();
    let (c, d) = support_bound_constants(m);
    let (_, pairs) = nu_n.phi_counts();
    let degree_mass: u64 = pairs.iter().sum();
    let bound = c * (degree_mass as f64).powf(m as f64 / (m as f64 + 1.0)) + d;
    let support = nu_n.iter().count();
    SupportBound { support, degree_mass, bound, holds: support as f64 <= bound }
}

// ---------------------------------------------------------------------------
// Ising

/// Number of scan points before golden-section refinement in [`ising_oracle`].
const ISING_ORACLE_SCAN: usize = 2001;

/// `max_α [ -α ln α - (1-α) ln(1-α)
///          + (c/2)((α² + (1-α)²)(e^β - 1) + 2α(1-α)(e^{-β} - 1)) ]`,
/// the annealed free energy obtained by fixing the fraction `α` of `+`
/// spins and averaging each edge independently.
pub fn ising_oracle(beta: f64, c: f64) -> Result<SolveReport> {
    if !(beta >= 0.0 && beta.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("Ising parameters need β >= 0 and c > 0, got β {beta}, c {c}")));
    }
    let (up, down) = (beta.exp_m1(), (-beta).exp_m1());
    let g = |a: f64| -> f64 {
        let a = a.clamp(0.0, 1.0);
        -xlnx(a) - xlnx(1.0 - a) + 0.5 * c * ((a * a + (1.0 - a) * (1.0 - a)) * up + 2.0 * a * (1.0 - a) * down)
    };
    let r = scan_then_golden(|a| -g(a), 0.0, 1.0, ISING_ORACLE_SCAN, 1e-12);
    Ok(SolveReport {
        argument: r.x,
        value: -r.value,
        residual: 1e-12,
        iterations: r.iterations,
        converged: r.converged,
    })
}

/// Largest graph accepted by the spin enumerations below.
pub const SPIN_BUDGET: usize = 20;

/// `Z(β) = Σ_η exp(β Σ_{(u,v) ∈ E} η(u) η(v))` by enumerating all spin
/// configurations.
pub fn spin_partition_function(g: &ColoredGraph, beta: f64) -> Result<f64> {
    let n = g.n();
    if n > SPIN_BUDGET {
        return Err(Error::Resource(format!("spin enumeration over {n} vertices exceeds {SPIN_BUDGET}")));
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let mut energy = 0i64;
        for &(u, v) in g.edges() {
            let same = ((mask >> u) ^ (mask >> v)) & 1 == 0;
            energy += if same { 1 } else { -1 };
        }
        total += (beta * energy as f64).exp();
    }
    Ok(total)
}

/// `E Z(β)` on `G(n, p)` computed as `Σ_η Π_{u<v} (1 - p + p e^{β η_u η_v})`:
/// edges are independent given the spins.
pub fn exact_annealed_partition_function(n: usize, p: f64, beta: f64) -> Result<f64> {
    if n > SPIN_BUDGET {
        return Err(Error::Resource(format!("spin enumeration over {n} vertices exceeds {SPIN_BUDGET}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("edge probability {p} outside [0, 1]")));
    }
    let same = 1.0 - p + p * beta.exp();
    let diff = 1.0 - p + p * (-beta).exp();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let plus = mask.count_ones() as i32;
        let minus = n as i32 - plus;
        let same_pairs = plus * (plus - 1) / 2 + minus * (minus - 1) / 2;
        total += same.powi(same_pairs) * diff.powi(plus * minus);
    }
    Ok(total)
}

/// `E Z(β)` on `G(n, p)` by summing over every graph on `n` vertices with its
/// probability; feasible for `n <= 6`.
pub fn annealed_partition_function_by_graphs(n: usize, p: f64, beta: f64) -> Result<f64> {
    if n > 6 {
        return Err(Error::Resource(format!("graph enumeration over {n} vertices exceeds 6")));
    }
    let pairs: Vec<(u32, u32)> = (0..n as u32).flat_map(|v| (0..v).map(move |u| (u, v))).collect();
    let mut total = 0.0;
    for mask in 0u64..(1 << pairs.len()) {
        let edges: Vec<(u32, u32)> =
            pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let k = edges.len() as i32;
        let weight = p.powi(k) * (1.0 - p).powi(pairs.len() as i32 - k);
        if weight == 0.0 {
            continue;
        }
        let g = ColoredGraph::new(1, vec![0; n], edges)?;
        total += weight * spin_partition_function(&g, beta)?;
    }
    Ok(total)
}

/// Partition functions of a tiny Erdős–Rényi instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TinyPartition {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    /// `Z(β)` of the graph drawn from `seed`.
    pub sampled_z: f64,
    pub sampled_edges: usize,
    /// `E Z(β)` over the graph law.
    pub expected_z: f64,
    /// `(1/n) ln E Z(β)`.
    pub free_energy: f64,
}

/// Samples `G(n, p)` from `seed`, computes its `Z(β)` by spin enumeration,
/// and `E Z(β)` exactly.
pub fn exact_tiny_partition_function(n: usize, p: f64, beta: f64, seed: u64) -> Result<TinyPartition> {
    if n == 0 || n > 14 {
        return Err(Error::Resource(format!("tiny partition functions need 1 <= n <= 14, got {n}")));
    }
    let expected_z = exact_annealed_partition_function(n, p, beta)?;
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for v in 0..n as u32 {
        for u in 0..v {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let g = ColoredGraph::new(1, vec![0; n], edges)?;
    Ok(TinyPartition {
        n,
        p,
        beta,
        sampled_z: spin_partition_function(&g, beta)?,
        sampled_edges: g.edge_count(),
        expected_z,
        free_energy: expected_z.ln() / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_tail_examples() {
        assert_eq!(binomial_log_tail(10, 0.3, 0).unwrap(), 0.0);
        assert!((binomial_log_tail(2, 0.5, 2).unwrap() - 0.25f64.ln()).abs() < 1e-15);
        assert_eq!(binomial_log_tail(10, 0.3, 11).unwrap(), f64::NEG_INFINITY);
        assert!(binomial_log_tail(10, 1.3, 1).is_err());
        assert!(binomial_log_tail(10, 0.3, 12).is_err());
    }

    #[test]
    fn composition_examples() {
        assert_eq!(composition_count(0, 4).unwrap(), BigCount::from(1));
        assert_eq!(composition_count(3, 2).unwrap(), BigCount::from(4));
        assert_eq!(composition_count(5, 3).unwrap(), BigCount::from(21));
        assert!(composition_sandwich(7, 4).unwrap().holds);
    }

    #[test]
    fn vector_partition_examples() {
        assert_eq!(vector_partition_count(&DegreeVector::zeros(3)).unwrap(), BigCount::from(1));
        assert_eq!(vector_partition_count(&DegreeVector::new(vec![4])).unwrap(), BigCount::from(5));
        // {(1,1)} and {(1,0),(0,1)}
        assert_eq!(vector_partition_count(&DegreeVector::new(vec![1, 1])).unwrap(), BigCount::from(2));
        assert_eq!(vector_partition_count(&DegreeVector::new(vec![2, 1])).unwrap(), BigCount::from(4));
        assert!(matches!(vector_partition_count(&DegreeVector::new(vec![8, 7])), Err(Error::Resource(_))));
    }

    #[test]
    fn partition_numbers_known_values() {
        let p = partition_numbers(100);
        assert_eq!(p[4], BigUint::from(5u32));
        assert_eq!(p[10], BigUint::from(42u32));
        assert_eq!(p[60], BigUint::from(966_467u32));
        assert_eq!(p[100], BigUint::from(190_569_292u64));
    }

    #[test]
    fn ising_oracle_beta_zero() {
        for c in [0.5, 1.0, 2.0] {
            let r = ising_oracle(0.0, c).unwrap();
            assert!((r.value - std::f64::consts::LN_2).abs() < 1e-15);
        }
    }

    #[test]
    fn spin_partition_examples() {
        let beta = 0.7;
        let g = ColoredGraph::new(1, vec![0, 0], vec![(0, 1)]).unwrap();
        let z = spin_partition_function(&g, beta).unwrap();
        assert!((z - (2.0 * beta.exp() + 2.0 * (-beta).exp())).abs() < 1e-12);
        let empty = ColoredGraph::new(1, vec![0; 5], vec![]).unwrap();
        assert_eq!(spin_partition_function(&empty, beta).unwrap(), 32.0);
    }

    #[test]
    fn big_count_json() {
        let c = BigCount(BigUint::from(10u32).pow(30));
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, "\"1000000000000000000000000000000\"");
        assert_eq!(serde_json::from_str::<BigCount>(&s).unwrap(), c);
    }
}
