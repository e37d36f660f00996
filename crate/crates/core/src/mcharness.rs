//! Monte Carlo estimation of tail exponents on simulated graphs, the exact
//! Erdős–Rényi edge-count exponent, and law-of-large-numbers checks.
//!
//! Replicas draw child seeds `derive_seed(base, [n, replica])`, so any split
//! of the replica range reproduces the same hit counts.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graphs::{
    empirical_measures, for_each_bernoulli_edge, sample_colored_graph, sample_colors, slot_count, ModelParams,
};
use crate::math::{ext_real, ln_poisson};
use crate::measures::{product_kernel_measure, ColorMeasure, Kernel, PairMatrix};
use crate::oracles::binomial_log_tail;
use crate::rates::ln_q;
use crate::seed::{derive_seed, rng_from_seed};

/// Replicas per parallel work unit; results are folded in chunk order.
pub const CHUNK: u64 = 4096;

/// Integer threshold `⌈t⌉`, treating values within `1e-9` of an integer as
/// that integer.
pub fn ceil_threshold(t: f64) -> i64 {
    let r = t.round();
    if (t - r).abs() <= 1e-9 {
        r as i64
    } else {
        t.ceil() as i64
    }
}

/// An event on `(L¹, L², M)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailEvent {
    /// `|E| = n‖L²‖/2 >= x n`.
    EdgesAtLeast { x: f64 },
    /// `|E| < x n`.
    EdgesBelow { x: f64 },
    /// `D(0) >= t`: at least a fraction `t` of vertices is isolated.
    IsolatedAtLeast { t: f64 },
    /// `L²(a,b) >= s`.
    PairMassAtLeast { a: usize, b: usize, s: f64 },
}

impl TailEvent {
    fn needs_degrees(&self) -> bool {
        matches!(self, TailEvent::IsolatedAtLeast { .. })
    }

    fn check(&self, m: usize) -> Result<()> {
        match *self {
            TailEvent::PairMassAtLeast { a, b, .. } if a >= m || b >= m => {
                Err(domain(format!("color pair ({a},{b}) outside alphabet of size {m}")))
            }
            TailEvent::EdgesAtLeast { x } | TailEvent::EdgesBelow { x } if !x.is_finite() => {
                Err(domain("edge threshold must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// `pair_edges` holds edge counts per unordered color pair, row-major
    /// over `a <= b`; `isolated` is the number of degree-zero vertices.
    fn holds(&self, n: usize, m: usize, pair_edges: &[u64], isolated: u64) -> bool {
        let total: u64 = pair_edges.iter().sum();
        let nf = n as f64;
        match *self {
            TailEvent::EdgesAtLeast { x } => total as i64 >= ceil_threshold(x * nf),
            TailEvent::EdgesBelow { x } => (total as i64) < ceil_threshold(x * nf),
            TailEvent::IsolatedAtLeast { t } => isolated as i64 >= ceil_threshold(t * nf),
            TailEvent::PairMassAtLeast { a, b, s } => {
                let (lo, hi) = (a.min(b), a.max(b));
                let e = pair_edges[upper_index(m, lo, hi)];
                let ordered = if a == b { 2 * e } else { e };
                ordered as i64 >= ceil_threshold(s * nf)
            }
        }
    }
}

fn upper_index(m: usize, a: usize, b: usize) -> usize {
    a * m - a * (a + 1) / 2 + b
}

/// How replicas are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// Draw from the model itself; the estimate is the hit frequency.
    Plain,
    /// Draw edges with kernel `factor · C` (colors unchanged) and weight each
    /// hit by the likelihood ratio back to `C`.
    KernelTilt { factor: f64 },
}

impl Sampling {
    /// Tilt that moves the mean edge count to `x n`.
    pub fn edge_tilt(x: f64, mu: &ColorMeasure, kernel: &Kernel) -> Self {
        Sampling::KernelTilt { factor: 2.0 * x / kernel.quadratic_form(mu.weights()) }
    }
}

/// A rare-event experiment over a family of sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailExperiment {
    pub mu: ColorMeasure,
    pub kernel: Kernel,
    pub event: TailEvent,
    pub sizes: Vec<usize>,
    /// Replicas at each size, aligned with `sizes`.
    pub replicas: Vec<u64>,
    pub sampling: Sampling,
    pub seed: u64,
}

impl TailExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.len() != self.replicas.len() {
            return Err(domain("sizes and replicas must be nonempty and of equal length"));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("sizes must be strictly increasing"));
        }
        if self.replicas.contains(&0) {
            return Err(domain("replicas must be at least 1"));
        }
        if let Sampling::KernelTilt { factor } = self.sampling {
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(domain(format!("tilt factor {factor} must be positive")));
            }
        }
        self.event.check(self.mu.alphabet().size())?;
        ModelParams::new(self.mu.clone(), self.kernel.clone(), self.sizes[0]).map(|_| ())
    }
}

/// Hit statistics of a replica range at one size. `weight_sum` and
/// `weight_sq_sum` hold the importance weights of hits (1 under plain
/// sampling).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeTally {
    pub n: usize,
    pub replicas: u64,
    pub hits: u64,
    pub weight_sum: f64,
    pub weight_sq_sum: f64,
}

impl SizeTally {
    pub fn empty(n: usize) -> Self {
        SizeTally { n, replicas: 0, hits: 0, weight_sum: 0.0, weight_sq_sum: 0.0 }
    }

    pub fn merge(&mut self, other: &SizeTally) {
        debug_assert_eq!(self.n, other.n);
        self.replicas += other.replicas;
        self.hits += other.hits;
        self.weight_sum += other.weight_sum;
        self.weight_sq_sum += other.weight_sq_sum;
    }

    /// Estimated probability, in `[0, 1]`.
    pub fn p_hat(&self) -> f64 {
        (self.weight_sum / self.replicas as f64).clamp(0.0, 1.0)
    }

    /// Standard error of [`SizeTally::p_hat`] from the sample variance.
    pub fn standard_error(&self) -> f64 {
        let r = self.replicas as f64;
        let mean = self.weight_sum / r;
        let var = (self.weight_sq_sum / r - mean * mean).max(0.0);
        (var / (r - 1.0).max(1.0)).sqrt()
    }
}

/// Runs replicas `range` of `exp` at size `n`.
pub fn tally_replicas(exp: &TailExperiment, n: usize, range: std::ops::Range<u64>) -> Result<SizeTally> {
    exp.validate()?;
    let params = ModelParams::new(exp.mu.clone(), exp.kernel.clone(), n)?;
    let m = params.mu().alphabet().size();
    let draw = match exp.sampling {
        Sampling::Plain => params.clone(),
        Sampling::KernelTilt { factor } => {
            let scaled: Vec<f64> = params.kernel().matrix().entries().iter().map(|c| c * factor).collect();
            let tilted = ModelParams::new(params.mu().clone(), Kernel::new(m, scaled)?, n)?;
            for a in 0..m {
                for b in a..m {
                    let (p, q) = (params.edge_probability(a, b), tilted.edge_probability(a, b));
                    if q >= 1.0 && p < 1.0 {
                        return Err(domain(format!("tilted edge probability for ({a},{b}) reaches 1 at n = {n}")));
                    }
                }
            }
            tilted
        }
    };
    // per unordered pair: (ln(p/p'), ln((1-p)/(1-p')))
    let log_ratios: Vec<(f64, f64)> = (0..m)
        .flat_map(|a| (a..m).map(move |b| (a, b)))
        .map(|(a, b)| {
            let (p, q) = (params.edge_probability(a, b), draw.edge_probability(a, b));
            if p == q {
                (0.0, 0.0)
            } else {
                ((p / q).ln(), (-p).ln_1p() - (-q).ln_1p())
            }
        })
        .collect();
    let tilted = !matches!(exp.sampling, Sampling::Plain);
    let needs_degrees = exp.event.needs_degrees();

    let start = range.start;
    let chunks: Vec<(u64, u64)> =
        range.clone().step_by(CHUNK as usize).map(|s| (s, (s + CHUNK).min(range.end))).collect();
    let partials: Vec<SizeTally> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut tally = SizeTally::empty(n);
            let mut pair_edges = vec![0u64; m * (m + 1) / 2];
            let mut degree = vec![0u32; if needs_degrees { n } else { 0 }];
            for replica in lo..hi {
                let mut rng = rng_from_seed(derive_seed(exp.seed, &[n as u64, replica]));
                let colors = sample_colors(&draw, &mut rng);
                pair_edges.iter_mut().for_each(|e| *e = 0);
                degree.iter_mut().for_each(|d| *d = 0);
                for_each_bernoulli_edge(&draw, &colors, &mut rng, |a, b, u, v| {
                    pair_edges[upper_index(m, a, b)] += 1;
                    if needs_degrees {
                        degree[u as usize] += 1;
                        degree[v as usize] += 1;
                    }
                });
                let isolated = degree.iter().filter(|&&d| d == 0).count() as u64;
                tally.replicas += 1;
                if exp.event.holds(n, m, &pair_edges, isolated) {
                    tally.hits += 1;
                    let w = if tilted {
                        let mut sizes = vec![0usize; m];
                        colors.iter().for_each(|&c| sizes[c] += 1);
                        let mut llr = 0.0;
                        for a in 0..m {
                            for b in a..m {
                                let k = upper_index(m, a, b);
                                let e = pair_edges[k] as f64;
                                let slots = slot_count(&sizes, a, b) as f64;
                                let (lp, lq) = log_ratios[k];
                                if e > 0.0 {
                                    llr += e * lp;
                                }
                                if slots > e {
                                    llr += (slots - e) * lq;
                                }
                            }
                        }
                        llr.exp()
                    } else {
                        1.0
                    };
                    tally.weight_sum += w;
                    tally.weight_sq_sum += w * w;
                }
            }
            tally
        })
        .collect();
    let mut total = SizeTally::empty(n);
    for p in &partials {
        total.merge(p);
    }
    debug_assert_eq!(total.replicas, range.end - start);
    Ok(total)
}

/// Per-size outcome of [`estimate_tail_exponent`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeEstimate {
    pub n: usize,
    pub replicas: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub standard_error: f64,
    /// `-ln p̂ / n`; absent when there are no hits.
    pub exponent: Option<f64>,
    /// With no hits: `-ln(3/R)/n`, a one-sided 95% lower bound on the
    /// exponent under plain sampling.
    pub exponent_lower_bound: Option<f64>,
    /// Delta-method 95% half-width of the exponent.
    #[serde(with = "ext_real")]
    pub ci_half_width: f64,
}

/// Least-squares fit of `y = rate + slope / n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub rate: f64,
    pub slope: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_inverse_n(points: &[(usize, f64)]) -> Result<AffineFit> {
    if points.len() < 2 {
        return Err(domain("an affine fit in 1/n needs at least two sizes"));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| 1.0 / n as f64).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(domain("an affine fit in 1/n needs distinct sizes"));
    }
    let slope = sxy / sxx;
    let rate = my - slope * mx;
    let residuals = xs.iter().zip(points).map(|(x, p)| p.1 - rate - slope * x).collect();
    Ok(AffineFit { rate, slope, residuals })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub sizes: Vec<SizeEstimate>,
    /// Fit over sizes with hits; absent when fewer than two sizes have hits.
    pub fit: Option<AffineFit>,
    /// No size produced a hit.
    pub inconclusive: bool,
}

impl ExponentEstimate {
    /// CSV with columns `n, replicas, hits, p_hat, exponent, rate_prediction,
    /// ci_half_width`; missing exponents are written as `>bound`.
    pub fn to_csv(&self, rate_prediction: Option<f64>) -> String {
        let mut out = String::from("n,replicas,hits,p_hat,exponent,rate_prediction,ci_half_width\n");
        let pred = rate_prediction.map(|r| r.to_string()).unwrap_or_default();
        for s in &self.sizes {
            let exponent = match (s.exponent, s.exponent_lower_bound) {
                (Some(e), _) => e.to_string(),
                (None, Some(b)) => format!(">{b}"),
                (None, None) => String::new(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.n, s.replicas, s.hits, s.p_hat, exponent, pred, s.ci_half_width
            );
        }
        out
    }
}

/// Estimates `-(1/n) ln P(event)` at every size and extrapolates in `1/n`.
pub fn estimate_tail_exponent(exp: &TailExperiment) -> Result<ExponentEstimate> {
    exp.validate()?;
    let mut sizes = Vec::with_capacity(exp.sizes.len());
    for (&n, &r) in exp.sizes.iter().zip(&exp.replicas) {
        let t = tally_replicas(exp, n, 0..r)?;
        sizes.push(size_estimate(&t));
    }
    let points: Vec<(usize, f64)> = sizes.iter().filter_map(|s| s.exponent.map(|e| (s.n, e))).collect();
    let fit = if points.len() >= 2 { Some(fit_inverse_n(&points)?) } else { None };
    Ok(ExponentEstimate { inconclusive: points.is_empty(), sizes, fit })
}

pub fn size_estimate(t: &SizeTally) -> SizeEstimate {
    let nf = t.n as f64;
    let p = t.p_hat();
    let se = t.standard_error();
    if t.hits == 0 || p == 0.0 {
        return SizeEstimate {
            n: t.n,
            replicas: t.replicas,
            hits: t.hits,
            p_hat: 0.0,
            standard_error: se,
            exponent: None,
            exponent_lower_bound: Some(-(3.0 / t.replicas as f64).min(1.0).ln() / nf),
            ci_half_width: f64::INFINITY,
        };
    }
    SizeEstimate {
        n: t.n,
        replicas: t.replicas,
        hits: t.hits,
        p_hat: p,
        standard_error: se,
        exponent: Some(-p.ln() / nf),
        exponent_lower_bound: None,
        ci_half_width: 1.96 * se / (p * nf),
    }
}

/// `-(1/n) ln P(Bin(n(n-1)/2, c/n) >= ⌈x n⌉)`: the exact exponent of the
/// edge-count tail in `G(n, c/n)`. `+inf` when the threshold exceeds the
/// number of vertex pairs.
pub fn exact_er_edge_exponent(n: u64, c: f64, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("n = {n} must be at least 2")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(domain(format!("c = {c} must be finite and nonnegative")));
    }
    let k = ceil_threshold(x * n as f64);
    if k <= 0 {
        return Ok(0.0);
    }
    let pairs = n * (n - 1) / 2;
    if k as u64 > pairs {
        return Ok(f64::INFINITY);
    }
    let p = (c / n as f64).min(1.0);
    Ok(-binomial_log_tail(pairs, p, k as u64)? / n as f64)
}

// ---------------------------------------------------------------------------
// Law of large numbers

/// Per-seed distances between a sampled graph's empirical measures and
/// their limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlnSample {
    pub seed: u64,
    /// TV between the empirical degree law and the Poisson mixture
    /// `Σ_a μ(a) Poisson(Σ_b C(a,b) μ(b))`.
    pub degree_tv: f64,
    /// TV between `M` and the limiting law restricted to `M`'s support, the
    /// limit's mass outside that support counted in full.
    pub neighborhood_tv: f64,
    /// `max_a |L¹(a) - μ(a)|`.
    pub color_deviation: f64,
    /// `max_a |L¹(a) - μ(a)| / √(μ(a)(1-μ(a))/n)`, in standard errors.
    pub color_z: f64,
    /// `max_{a,b} |L²(a,b) - C(a,b)μ(a)μ(b)|`.
    pub pair_deviation: f64,
    pub max_magnitude: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
}

impl Quantiles {
    fn of(mut xs: Vec<f64>) -> Self {
        xs.sort_by(f64::total_cmp);
        let at = |q: f64| xs[((xs.len() - 1) as f64 * q).round() as usize];
        Quantiles { min: xs[0], median: at(0.5), q95: at(0.95), max: xs[xs.len() - 1] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlnReport {
    pub n: usize,
    pub samples: Vec<LlnSample>,
    pub degree_tv: Quantiles,
    pub neighborhood_tv: Quantiles,
    pub color_z: Quantiles,
    pub pair_deviation: Quantiles,
    /// `5 ln n`, the envelope for `max_magnitude`.
    pub magnitude_envelope: f64,
}

impl LlnReport {
    /// Number of seeds for which `metric` is at most `bound`.
    pub fn count_within(&self, metric: impl Fn(&LlnSample) -> f64, bound: f64) -> usize {
        self.samples.iter().filter(|s| metric(s) <= bound).count()
    }
}

/// Samples one graph per seed at size `n` and measures how far its empirical
/// structures are from their limits.
pub fn lln_check(params: &ModelParams, n: usize, seeds: &[u64]) -> Result<LlnReport> {
    if n < 1000 {
        return Err(domain(format!("law-of-large-numbers checks need n >= 1000, got {n}")));
    }
    if seeds.is_empty() {
        return Err(domain("at least one seed is required"));
    }
    let params = params.with_n(n)?;
    let (mu, kernel) = (params.mu(), params.kernel());
    let m = mu.alphabet().size();
    let limit_pairs = product_kernel_measure(kernel, mu)?;
    let limit_matrix: PairMatrix = limit_pairs.matrix().clone();
    let means: Vec<f64> = (0..m).map(|a| (0..m).map(|b| kernel.get(a, b) * mu.weight(b)).sum()).collect();

    let samples: Vec<LlnSample> = seeds
        .par_iter()
        .map(|&seed| -> Result<LlnSample> {
            let g = sample_colored_graph(&params, seed);
            let emp = empirical_measures(&g);
            let nf = n as f64;

            let mut degree_counts: Vec<u64> = Vec::new();
            for d in g.degrees() {
                let d = d as usize;
                if d >= degree_counts.len() {
                    degree_counts.resize(d + 1, 0);
                }
                degree_counts[d] += 1;
            }
            let mixture = |k: u64| -> f64 { (0..m).map(|a| mu.weight(a) * ln_poisson(means[a], k).exp()).sum() };
            let mut covered = 0.0;
            let mut diff = 0.0;
            for (k, &cnt) in degree_counts.iter().enumerate() {
                let q = mixture(k as u64);
                covered += q;
                diff += (cnt as f64 / nf - q).abs();
            }
            let degree_tv = (0.5 * (diff + (1.0 - covered).max(0.0))).min(1.0);

            let mut covered = 0.0;
            let mut diff = 0.0;
            for (a, ell, cnt) in emp.neighborhoods.iter() {
                let q = ln_q(&limit_matrix, mu, a, ell).exp();
                covered += q;
                diff += (cnt as f64 / nf - q).abs();
            }
            let neighborhood_tv = (0.5 * (diff + (1.0 - covered).max(0.0))).min(1.0);

            let mut color_deviation: f64 = 0.0;
            let mut color_z: f64 = 0.0;
            for a in 0..m {
                let dev = (emp.colors.get(a) as f64 / nf - mu.weight(a)).abs();
                color_deviation = color_deviation.max(dev);
                let sd = (mu.weight(a) * (1.0 - mu.weight(a)) / nf).sqrt();
                let z = if sd > 0.0 {
                    dev / sd
                } else if dev > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                color_z = color_z.max(z);
            }
            let mut pair_deviation: f64 = 0.0;
            for a in 0..m {
                for b in 0..m {
                    let dev = (emp.pairs.get(a, b) as f64 / nf - limit_matrix.get(a, b)).abs();
                    pair_deviation = pair_deviation.max(dev);
                }
            }
            Ok(LlnSample {
                seed,
                degree_tv,
                neighborhood_tv,
                color_deviation,
                color_z,
                pair_deviation,
                max_magnitude: emp.neighborhoods.max_magnitude(),
            })
        })
        .collect::<Result<_>>()?;
    let q = |f: fn(&LlnSample) -> f64| Quantiles::of(samples.iter().map(f).collect());
    Ok(LlnReport {
        n,
        degree_tv: q(|s| s.degree_tv),
        neighborhood_tv: q(|s| s.neighborhood_tv),
        color_z: q(|s| s.color_z),
        pair_deviation: q(|s| s.pair_deviation),
        magnitude_envelope: 5.0 * (n as f64).ln(),
        samples,
    })
}

/// Raises a `Resource` error when `replicas · n` is beyond what a desk run
/// should attempt.
pub fn check_budget(exp: &TailExperiment, max_work: f64) -> Result<()> {
    let work: f64 = exp.sizes.iter().zip(&exp.replicas).map(|(&n, &r)| n as f64 * r as f64).sum();
    if work > max_work {
        return Err(Error::Resource(format!("experiment needs {work:.3e} vertex-replicas, budget is {max_work:.3e}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn er(c: f64) -> (ColorMeasure, Kernel) {
        (ColorMeasure::uniform(1).unwrap(), Kernel::constant(1, c).unwrap())
    }

    fn experiment(event: TailEvent, sizes: Vec<usize>, replicas: Vec<u64>, sampling: Sampling) -> TailExperiment {
        let (mu, kernel) = er(2.0);
        TailExperiment { mu, kernel, event, sizes, replicas, sampling, seed: 7 }
    }

    #[test]
    fn exact_exponent_edges() {
        assert_eq!(exact_er_edge_exponent(50, 2.0, 0.0).unwrap(), 0.0);
        assert_eq!(exact_er_edge_exponent(50, 2.0, -1.0).unwrap(), 0.0);
        assert_eq!(exact_er_edge_exponent(4, 2.0, 10.0).unwrap(), f64::INFINITY);
        let e1 = exact_er_edge_exponent(200, 2.0, 1.0).unwrap();
        let e2 = exact_er_edge_exponent(2000, 2.0, 1.0).unwrap();
        assert!(e2 < e1 && e2 < 0.001);
    }

    #[test]
    fn typical_and_impossible_events() {
        let typical = experiment(TailEvent::EdgesAtLeast { x: 0.5 }, vec![100, 200], vec![400, 400], Sampling::Plain);
        let r = estimate_tail_exponent(&typical).unwrap();
        assert!(r.sizes.iter().all(|s| s.exponent.unwrap() < 0.01));
        let impossible = experiment(TailEvent::EdgesBelow { x: 0.0 }, vec![50, 100], vec![200, 200], Sampling::Plain);
        let r = estimate_tail_exponent(&impossible).unwrap();
        assert!(r.inconclusive);
        assert!(r.sizes.iter().all(|s| s.exponent.is_none() && s.exponent_lower_bound.is_some()));
    }

    #[test]
    fn split_replicas_merge_exactly() {
        let exp = experiment(TailEvent::EdgesAtLeast { x: 1.1 }, vec![60], vec![10_000], Sampling::Plain);
        let full = tally_replicas(&exp, 60, 0..10_000).unwrap();
        let mut half = tally_replicas(&exp, 60, 0..3_333).unwrap();
        half.merge(&tally_replicas(&exp, 60, 3_333..10_000).unwrap());
        assert_eq!(full.hits, half.hits);
        assert_eq!(full.replicas, half.replicas);
        assert!(full.hits > 0);
    }

    #[test]
    fn tilted_estimate_matches_exact() {
        let (mu, kernel) = er(2.0);
        let n = 100;
        let exp = experiment(
            TailEvent::EdgesAtLeast { x: 1.5 },
            vec![n],
            vec![20_000],
            Sampling::edge_tilt(1.5, &mu, &kernel),
        );
        let t = tally_replicas(&exp, n, 0..20_000).unwrap();
        let exact = (-exact_er_edge_exponent(n as u64, 2.0, 1.5).unwrap() * n as f64).exp();
        assert!((t.p_hat() - exact).abs() <= 3.0 * t.standard_error(), "{} vs {exact}", t.p_hat());
    }

    #[test]
    fn pair_and_isolated_events() {
        let mu = ColorMeasure::uniform(2).unwrap();
        let kernel = Kernel::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let exp = TailExperiment {
            mu,
            kernel,
            event: TailEvent::PairMassAtLeast { a: 0, b: 0, s: 0.0 },
            sizes: vec![100],
            replicas: vec![50],
            sampling: Sampling::Plain,
            seed: 1,
        };
        assert_eq!(tally_replicas(&exp, 100, 0..50).unwrap().hits, 50);
        let iso = TailExperiment { event: TailEvent::IsolatedAtLeast { t: 0.9 }, ..exp };
        assert_eq!(tally_replicas(&iso, 100, 0..50).unwrap().hits, 0);
    }

    #[test]
    fn affine_fit_recovers_line() {
        let pts: Vec<(usize, f64)> = [100usize, 200, 400].iter().map(|&n| (n, 0.1 + 3.0 / n as f64)).collect();
        let f = fit_inverse_n(&pts).unwrap();
        assert!((f.rate - 0.1).abs() < 1e-12 && (f.slope - 3.0).abs() < 1e-9);
    }
}
