//! Measures on a finite color alphabet and on (color, degree-vector) pairs.
//!
//! Color and pair measures are dense (the alphabet is small); neighborhood
//! measures are sparse maps keyed by `(color, DegreeVector)`. Exact empirical
//! versions backed by integer counts live in [`counts`], the approximation
//! pipeline (consistify / quantize / cap) in [`approx`].

pub mod approx;
pub mod counts;
mod json;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Result};
use crate::math::entropy_term;

pub use approx::{cap_degrees, consistify, quantize, Consistified};
pub use counts::{ColorCounts, EmpiricalMeasures, NeighborhoodCounts, PairCounts};

/// Absolute tolerance used for probability normalization checks.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// A finite color set `{0, .., m-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(domain("alphabet must contain at least one color"));
        }
        Ok(Alphabet(m))
    }

    #[inline]
    pub fn size(self) -> usize {
        self.0
    }

    pub fn colors(self) -> std::ops::Range<usize> {
        0..self.0
    }

    pub(crate) fn check_same(self, other: Alphabet, what: &str) -> Result<()> {
        if self != other {
            return Err(shape(format!("{what}: alphabet sizes {} and {} differ", self.0, other.0)));
        }
        Ok(())
    }
}

fn check_weight(w: f64, what: &str) -> Result<()> {
    if !w.is_finite() || w < 0.0 {
        return Err(domain(format!("{what}: weight {w} is not a finite nonnegative number")));
    }
    Ok(())
}

/// A finite measure on the color alphabet (μ, ω, ν₁, L¹).
#[derive(Clone, Debug, PartialEq)]
pub struct ColorMeasure {
    alphabet: Alphabet,
    weights: Vec<f64>,
}

impl ColorMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(weights.len())?;
        for &w in &weights {
            check_weight(w, "color measure")?;
        }
        Ok(ColorMeasure { alphabet, weights })
    }

    /// Like [`ColorMeasure::new`] but also requires total mass 1.
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        let mu = Self::new(weights)?;
        if !mu.is_probability() {
            return Err(domain(format!("color weights sum to {}, expected 1", mu.mass())));
        }
        Ok(mu)
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::probability(vec![1.0 / m as f64; m])
    }

    pub fn point(m: usize, color: usize) -> Result<Self> {
        if color >= m {
            return Err(domain(format!("color {color} outside alphabet of size {m}")));
        }
        let mut w = vec![0.0; m];
        w[color] = 1.0;
        Self::new(w)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, a: usize) -> f64 {
        self.weights[a]
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() <= PROBABILITY_TOL
    }

    pub(crate) fn require_probability(&self, what: &str) -> Result<()> {
        if !self.is_probability() {
            return Err(domain(format!("{what} must be a probability measure (mass {})", self.mass())));
        }
        Ok(())
    }
}

/// A nonnegative `m × m` matrix of masses on ordered color pairs.
///
/// Not necessarily symmetric: the induced pair measure of an arbitrary
/// neighborhood measure can be asymmetric. [`PairMeasure`] adds symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMatrix {
    alphabet: Alphabet,
    entries: Vec<f64>,
}

impl PairMatrix {
    /// Builds from row-major entries.
    pub fn new(m: usize, entries: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(m)?;
        if entries.len() != m * m {
            return Err(shape(format!("expected {} entries for an {m}x{m} matrix, got {}", m * m, entries.len())));
        }
        for &w in &entries {
            check_weight(w, "pair matrix")?;
        }
        Ok(PairMatrix { alphabet, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(shape("pair matrix rows must all have length m"));
        }
        Self::new(m, rows.iter().flatten().copied().collect())
    }

    pub fn zero(m: usize) -> Result<Self> {
        Self::new(m, vec![0.0; m * m])
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.alphabet.size() + b]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.alphabet.size()).map(|r| r.to_vec()).collect()
    }

    pub fn mass(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        let m = self.alphabet.size();
        (0..m).all(|a| (0..a).all(|b| self.get(a, b) == self.get(b, a)))
    }

    /// Largest `|self(a,b) - other(a,b)|`.
    pub fn max_abs_diff(&self, other: &PairMatrix) -> Result<f64> {
        self.alphabet.check_same(other.alphabet, "pair matrices")?;
        Ok(self.entries.iter().zip(&other.entries).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
    }
}

impl AsRef<PairMatrix> for PairMatrix {
    fn as_ref(&self) -> &PairMatrix {
        self
    }
}

/// A symmetric finite measure on color pairs (ϖ, L², Cω⊗ω).
#[derive(Clone, Debug, PartialEq)]
pub struct PairMeasure(PairMatrix);

impl PairMeasure {
    /// Builds from row-major entries; symmetry must hold exactly.
    pub fn new(m: usize, entries: Vec<f64>) -> Result<Self> {
        Self::from_matrix(PairMatrix::new(m, entries)?)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_matrix(PairMatrix::from_rows(rows)?)
    }

    pub fn from_matrix(matrix: PairMatrix) -> Result<Self> {
        if !matrix.is_symmetric() {
            return Err(domain("pair measure must be symmetric"));
        }
        Ok(PairMeasure(matrix))
    }

    /// Averages `(a,b)` and `(b,a)` when they differ by at most `tol`.
    pub fn symmetrized(matrix: &PairMatrix, tol: f64) -> Result<Self> {
        let m = matrix.alphabet.size();
        let mut entries = matrix.entries.clone();
        for a in 0..m {
            for b in 0..a {
                let (x, y) = (matrix.get(a, b), matrix.get(b, a));
                if (x - y).abs() > tol {
                    return Err(domain(format!("entries ({a},{b})={x} and ({b},{a})={y} differ by more than {tol}")));
                }
                let avg = 0.5 * (x + y);
                entries[a * m + b] = avg;
                entries[b * m + a] = avg;
            }
        }
        Ok(PairMeasure(PairMatrix { alphabet: matrix.alphabet, entries }))
    }

    pub fn zero(m: usize) -> Result<Self> {
        Ok(PairMeasure(PairMatrix::zero(m)?))
    }

    pub fn matrix(&self) -> &PairMatrix {
        &self.0
    }

    pub fn alphabet(&self) -> Alphabet {
        self.0.alphabet
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0.get(a, b)
    }

    pub fn mass(&self) -> f64 {
        self.0.mass()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows()
    }
}

impl AsRef<PairMatrix> for PairMeasure {
    fn as_ref(&self) -> &PairMatrix {
        &self.0
    }
}

/// The connection kernel `C`: symmetric, nonnegative, not identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel(PairMatrix);

impl Kernel {
    pub fn new(m: usize, entries: Vec<f64>) -> Result<Self> {
        Self::from_matrix(PairMatrix::new(m, entries)?)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_matrix(PairMatrix::from_rows(rows)?)
    }

    pub fn from_matrix(matrix: PairMatrix) -> Result<Self> {
        let m = matrix.alphabet.size();
        let mut offending = Vec::new();
        for a in 0..m {
            for b in 0..a {
                if matrix.get(a, b) != matrix.get(b, a) {
                    offending.push(format!("({a},{b})/({b},{a})"));
                }
            }
        }
        if !offending.is_empty() {
            return Err(domain(format!("kernel is not symmetric at entries {}", offending.join(", "))));
        }
        if matrix.entries.iter().all(|&c| c == 0.0) {
            return Err(domain("kernel must not be identically zero"));
        }
        Ok(Kernel(matrix))
    }

    /// The Erdős–Rényi kernel `C ≡ c`.
    pub fn constant(m: usize, c: f64) -> Result<Self> {
        Self::new(m, vec![c; m * m])
    }

    pub fn matrix(&self) -> &PairMatrix {
        &self.0
    }

    pub fn alphabet(&self) -> Alphabet {
        self.0.alphabet
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0.get(a, b)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows()
    }

    /// `ωᵀ C ω`.
    pub fn quadratic_form(&self, omega: &[f64]) -> f64 {
        let m = self.alphabet().size();
        let mut total = 0.0;
        for a in 0..m {
            for b in 0..m {
                total += self.get(a, b) * omega[a] * omega[b];
            }
        }
        total
    }

    /// `Some(c)` when every entry equals `c`.
    pub fn as_constant(&self) -> Option<f64> {
        let c = self.0.entries[0];
        self.0.entries.iter().all(|&x| x == c).then_some(c)
    }
}

/// A degree vector ℓ: the number of neighbors of each color.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeVector(Vec<u32>);

impl DegreeVector {
    pub fn new(counts: Vec<u32>) -> Self {
        DegreeVector(counts)
    }

    pub fn zeros(m: usize) -> Self {
        DegreeVector(vec![0; m])
    }

    /// `k · e^(b)`.
    pub fn unit(m: usize, b: usize, k: u32) -> Self {
        let mut v = vec![0; m];
        v[b] = k;
        DegreeVector(v)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn counts_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, b: usize) -> u32 {
        self.0[b]
    }

    /// ‖ℓ‖, the sum of the entries (the degree).
    pub fn magnitude(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }
}

/// A finite-support measure on `color × degree vector` (ν, M, Q).
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodMeasure {
    alphabet: Alphabet,
    atoms: BTreeMap<(usize, DegreeVector), f64>,
}

impl NeighborhoodMeasure {
    /// Builds from `(color, ℓ, mass)` triples. Repeated atoms are merged and
    /// zero masses dropped.
    pub fn new(m: usize, atoms: impl IntoIterator<Item = (usize, DegreeVector, f64)>) -> Result<Self> {
        let alphabet = Alphabet::new(m)?;
        let mut map = BTreeMap::new();
        for (a, ell, mass) in atoms {
            if a >= m {
                return Err(domain(format!("atom color {a} outside alphabet of size {m}")));
            }
            if ell.len() != m {
                return Err(shape(format!("degree vector of length {} in alphabet of size {m}", ell.len())));
            }
            check_weight(mass, "neighborhood measure")?;
            if mass > 0.0 {
                *map.entry((a, ell)).or_insert(0.0) += mass;
            }
        }
        Ok(NeighborhoodMeasure { alphabet, atoms: map })
    }

    pub fn probability(m: usize, atoms: impl IntoIterator<Item = (usize, DegreeVector, f64)>) -> Result<Self> {
        let nu = Self::new(m, atoms)?;
        nu.require_probability("neighborhood measure")?;
        Ok(nu)
    }

    pub fn point(m: usize, color: usize, ell: DegreeVector) -> Result<Self> {
        Self::new(m, [(color, ell, 1.0)])
    }

    pub(crate) fn from_map(alphabet: Alphabet, atoms: BTreeMap<(usize, DegreeVector), f64>) -> Self {
        NeighborhoodMeasure { alphabet, atoms }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn get(&self, a: usize, ell: &DegreeVector) -> f64 {
        // BTreeMap lookup needs an owned key; clone is cheap for tiny vectors
        self.atoms.get(&(a, ell.clone())).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &DegreeVector, f64)> {
        self.atoms.iter().map(|((a, l), &w)| (*a, l, w))
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn mass(&self) -> f64 {
        self.atoms.values().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() <= PROBABILITY_TOL
    }

    pub(crate) fn require_probability(&self, what: &str) -> Result<()> {
        if !self.is_probability() {
            return Err(domain(format!("{what} must be a probability measure (mass {})", self.mass())));
        }
        Ok(())
    }

    /// The color marginal ν₁.
    pub fn color_marginal(&self) -> ColorMeasure {
        let mut w = vec![0.0; self.alphabet.size()];
        for (a, _, mass) in self.iter() {
            w[a] += mass;
        }
        ColorMeasure { alphabet: self.alphabet, weights: w }
    }

    /// Largest degree magnitude on the support.
    pub fn max_magnitude(&self) -> u64 {
        self.atoms.keys().map(|(_, l)| l.magnitude()).max().unwrap_or(0)
    }
}

/// Relative entropy `H(ν‖μ) = Σ ν log(ν/μ)` with the conventions
/// `0 log 0 = 0` and `H = +inf` when ν is not absolutely continuous.
pub trait RelativeEntropy {
    fn relative_entropy(&self, reference: &Self) -> Result<f64>;
}

fn dense_entropy(nu: &[f64], mu: &[f64]) -> f64 {
    nu.iter().zip(mu).map(|(&x, &y)| entropy_term(x, y)).sum()
}

impl RelativeEntropy for ColorMeasure {
    fn relative_entropy(&self, reference: &Self) -> Result<f64> {
        self.alphabet.check_same(reference.alphabet, "relative entropy")?;
        Ok(dense_entropy(&self.weights, &reference.weights))
    }
}

impl RelativeEntropy for PairMatrix {
    fn relative_entropy(&self, reference: &Self) -> Result<f64> {
        self.alphabet.check_same(reference.alphabet, "relative entropy")?;
        Ok(dense_entropy(&self.entries, &reference.entries))
    }
}

impl RelativeEntropy for PairMeasure {
    fn relative_entropy(&self, reference: &Self) -> Result<f64> {
        self.0.relative_entropy(&reference.0)
    }
}

impl RelativeEntropy for NeighborhoodMeasure {
    fn relative_entropy(&self, reference: &Self) -> Result<f64> {
        self.alphabet.check_same(reference.alphabet, "relative entropy")?;
        Ok(self.atoms.iter().map(|(key, &x)| entropy_term(x, reference.atoms.get(key).copied().unwrap_or(0.0))).sum())
    }
}

pub fn relative_entropy<M: RelativeEntropy>(nu: &M, mu: &M) -> Result<f64> {
    nu.relative_entropy(mu)
}

/// Total variation distance `½ Σ |ν - ν̃|` between probability measures.
pub fn total_variation(nu: &NeighborhoodMeasure, other: &NeighborhoodMeasure) -> Result<f64> {
    nu.alphabet.check_same(other.alphabet, "total variation")?;
    nu.require_probability("total variation argument")?;
    other.require_probability("total variation argument")?;
    let mut sum = 0.0;
    for (key, &x) in &nu.atoms {
        sum += (x - other.atoms.get(key).copied().unwrap_or(0.0)).abs();
    }
    for (key, &y) in &other.atoms {
        if !nu.atoms.contains_key(key) {
            sum += y;
        }
    }
    Ok((0.5 * sum).min(1.0))
}

/// `Cω⊗ω(a,b) = C(a,b) ω(a) ω(b)`.
pub fn product_kernel_measure(kernel: &Kernel, omega: &ColorMeasure) -> Result<PairMeasure> {
    kernel.alphabet().check_same(omega.alphabet, "kernel product")?;
    let m = omega.alphabet.size();
    let mut entries = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            // ω(a)ω(b) first so the result is exactly symmetric
            entries.push(kernel.get(a, b) * (omega.weight(a) * omega.weight(b)));
        }
    }
    PairMeasure::new(m, entries)
}

/// Φ(ν) = (ν₁, ⟨ν(·,ℓ), ℓ(·)⟩). The second component is returned as a raw
/// matrix; it is symmetric only when ν comes from a graph.
pub fn phi(nu: &NeighborhoodMeasure) -> (ColorMeasure, PairMatrix) {
    let m = nu.alphabet.size();
    let mut pair = vec![0.0; m * m];
    for (a, ell, mass) in nu.iter() {
        for b in 0..m {
            let k = ell.get(b);
            if k > 0 {
                pair[a * m + b] += mass * k as f64;
            }
        }
    }
    (nu.color_marginal(), PairMatrix { alphabet: nu.alphabet, entries: pair })
}

/// `⟨ν(·,ℓ),ℓ(·)⟩(a,b) <= ϖ(a,b) + tol` for all `a, b`.
pub fn is_sub_consistent(pair: impl AsRef<PairMatrix>, nu: &NeighborhoodMeasure, tol: f64) -> Result<bool> {
    let pair = pair.as_ref();
    pair.alphabet.check_same(nu.alphabet, "sub-consistency")?;
    let (_, induced) = phi(nu);
    Ok(induced.entries.iter().zip(&pair.entries).all(|(&x, &w)| x <= w + tol))
}

/// `|⟨ν(·,ℓ),ℓ(·)⟩(a,b) - ϖ(a,b)| <= tol` for all `a, b`.
pub fn is_consistent(pair: impl AsRef<PairMatrix>, nu: &NeighborhoodMeasure, tol: f64) -> Result<bool> {
    let pair = pair.as_ref();
    pair.alphabet.check_same(nu.alphabet, "consistency")?;
    let (_, induced) = phi(nu);
    Ok(induced.max_abs_diff(pair)? <= tol)
}

/// A law on degrees `{0, 1, 2, ..}` with finite support, optionally flagged
/// as having infinite mean (the finite part is then ignored by rates).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    probs: Vec<f64>,
    #[serde(default)]
    infinite_mean: bool,
}

impl DegreeDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for &p in &probs {
            check_weight(p, "degree distribution")?;
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(domain(format!("degree distribution has mass {total}, expected 1")));
        }
        Ok(DegreeDistribution { probs, infinite_mean: false })
    }

    /// A law whose mean is infinite; only the flag matters downstream.
    pub fn with_infinite_mean() -> Self {
        DegreeDistribution { probs: Vec::new(), infinite_mean: true }
    }

    pub fn point(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        DegreeDistribution { probs, infinite_mean: false }
    }

    /// Poisson(λ) truncated where the remaining tail mass is below `tail`.
    pub fn poisson(lambda: f64, tail: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(domain("Poisson parameter must be finite and nonnegative"));
        }
        let top = crate::math::poisson_truncation_point(lambda, tail);
        let probs = (0..=top).map(|k| crate::math::ln_poisson(lambda, k).exp()).collect();
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn has_infinite_mean(&self) -> bool {
        self.infinite_mean
    }

    /// ⟨d⟩ = Σ k d(k).
    pub fn mean(&self) -> f64 {
        if self.infinite_mean {
            return f64::INFINITY;
        }
        self.probs.iter().enumerate().map(|(k, &p)| k as f64 * p).sum()
    }
}

/// `D(k) = Σ_{a, ‖ℓ‖ = k} ν(a,ℓ)`.
pub fn degree_distribution(nu: &NeighborhoodMeasure) -> DegreeDistribution {
    let top = nu.max_magnitude() as usize;
    let mut probs = vec![0.0; top + 1];
    for (_, ell, mass) in nu.iter() {
        probs[ell.magnitude() as usize] += mass;
    }
    DegreeDistribution { probs, infinite_mean: false }
}
