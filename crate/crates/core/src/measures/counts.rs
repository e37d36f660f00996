//! Exact `n`-empirical measures backed by integer counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Alphabet, ColorMeasure, DegreeVector, NeighborhoodMeasure, PairMatrix, PairMeasure};
use crate::error::{domain, shape, Result};

/// Relative tolerance for recognizing `n · w` as an integer.
const INTEGRALITY_TOL: f64 = 1e-9;

fn to_count(x: f64, what: &str) -> Result<u64> {
    let r = x.round();
    if !(x >= 0.0) || (x - r).abs() > INTEGRALITY_TOL * x.abs().max(1.0) {
        return Err(domain(format!("{what}: {x} is not a nonnegative integer")));
    }
    Ok(r as u64)
}

/// Color counts `n ω(a)`, summing to `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorCounts {
    n: u64,
    counts: Vec<u64>,
}

impl ColorCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        Alphabet::new(counts.len())?;
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(domain("color counts must describe at least one vertex"));
        }
        Ok(ColorCounts { n, counts })
    }

    /// Recovers counts from a measure whose entries are multiples of `1/n`.
    pub fn from_measure(omega: &ColorMeasure, n: u64) -> Result<Self> {
        let counts = omega.weights().iter().map(|&w| to_count(w * n as f64, "n·ω(a)")).collect::<Result<Vec<_>>>()?;
        let c = Self::new(counts)?;
        if c.n != n {
            return Err(domain(format!("n·ω sums to {}, expected {n}", c.n)));
        }
        Ok(c)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.counts.len())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    #[inline]
    pub fn get(&self, a: usize) -> u64 {
        self.counts[a]
    }

    pub fn to_measure(&self) -> ColorMeasure {
        let n = self.n as f64;
        ColorMeasure { alphabet: self.alphabet(), weights: self.counts.iter().map(|&k| k as f64 / n).collect() }
    }
}

/// Pair counts `n ϖ(a,b)`: symmetric with even diagonal, so that
/// `n(a,b) = n ϖ(a,b) / (1 + 1{a=b})` is the number of edges between
/// colors `a` and `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    n: u64,
    m: usize,
    counts: Vec<u64>,
}

impl PairCounts {
    pub fn new(n: u64, m: usize, counts: Vec<u64>) -> Result<Self> {
        Alphabet::new(m)?;
        if n == 0 {
            return Err(domain("pair counts need n >= 1"));
        }
        if counts.len() != m * m {
            return Err(shape(format!("expected {} pair counts, got {}", m * m, counts.len())));
        }
        for a in 0..m {
            if counts[a * m + a] % 2 != 0 {
                return Err(domain(format!("diagonal count n·ϖ({a},{a}) = {} is odd", counts[a * m + a])));
            }
            for b in 0..a {
                if counts[a * m + b] != counts[b * m + a] {
                    return Err(domain(format!("pair counts not symmetric at ({a},{b})")));
                }
            }
        }
        Ok(PairCounts { n, m, counts })
    }

    /// Builds from per-pair edge numbers `n(a,b)` (upper triangle read).
    pub fn from_edge_numbers(n: u64, m: usize, edges: &[u64]) -> Result<Self> {
        if edges.len() != m * m {
            return Err(shape(format!("expected {} edge numbers, got {}", m * m, edges.len())));
        }
        let mut counts = vec![0; m * m];
        for a in 0..m {
            counts[a * m + a] = 2 * edges[a * m + a];
            for b in a + 1..m {
                counts[a * m + b] = edges[a * m + b];
                counts[b * m + a] = edges[a * m + b];
            }
        }
        Self::new(n, m, counts)
    }

    pub fn zero(n: u64, m: usize) -> Result<Self> {
        Self::new(n, m, vec![0; m * m])
    }

    pub fn from_measure(pair: &PairMeasure, n: u64) -> Result<Self> {
        let m = pair.alphabet().size();
        let counts =
            pair.matrix().entries().iter().map(|&w| to_count(w * n as f64, "n·ϖ(a,b)")).collect::<Result<Vec<_>>>()?;
        Self::new(n, m, counts)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.m)
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.m + b]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `n(a,b)`: edges with one endpoint of each color.
    pub fn edges_between(&self, a: usize, b: usize) -> u64 {
        if a == b {
            self.get(a, a) / 2
        } else {
            self.get(a, b)
        }
    }

    pub fn total_edges(&self) -> u64 {
        self.counts.iter().sum::<u64>() / 2
    }

    pub fn to_measure(&self) -> PairMeasure {
        let n = self.n as f64;
        PairMeasure(PairMatrix {
            alphabet: self.alphabet(),
            entries: self.counts.iter().map(|&k| k as f64 / n).collect(),
        })
    }
}

/// Neighborhood counts: the multiset of `(color, ℓ)` over `n` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodCounts {
    n: u64,
    m: usize,
    counts: BTreeMap<(usize, DegreeVector), u64>,
}

impl NeighborhoodCounts {
    pub fn from_vertices(m: usize, vertices: impl IntoIterator<Item = (usize, DegreeVector)>) -> Result<Self> {
        Alphabet::new(m)?;
        let mut counts = BTreeMap::new();
        let mut n = 0u64;
        for (a, ell) in vertices {
            if a >= m || ell.len() != m {
                return Err(shape(format!("vertex ({a}, {:?}) does not fit an alphabet of size {m}", ell.counts())));
            }
            *counts.entry((a, ell)).or_insert(0) += 1;
            n += 1;
        }
        if n == 0 {
            return Err(domain("neighborhood counts must describe at least one vertex"));
        }
        Ok(NeighborhoodCounts { n, m, counts })
    }

    /// Recovers counts from a measure whose masses are multiples of `1/n`.
    pub fn from_measure(nu: &NeighborhoodMeasure, n: u64) -> Result<Self> {
        let m = nu.alphabet().size();
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for (a, ell, mass) in nu.iter() {
            let k = to_count(mass * n as f64, "n·ν(a,ℓ)")?;
            if k > 0 {
                counts.insert((a, ell.clone()), k);
                total += k;
            }
        }
        if total != n {
            return Err(domain(format!("n·ν sums to {total}, expected {n}")));
        }
        Ok(NeighborhoodCounts { n, m, counts })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &DegreeVector, u64)> {
        self.counts.iter().map(|((a, l), &k)| (*a, l, k))
    }

    /// One `(color, ℓ)` per vertex, in sorted order.
    pub fn vertices(&self) -> Vec<(usize, DegreeVector)> {
        let mut out = Vec::with_capacity(self.n as usize);
        for ((a, l), &k) in &self.counts {
            for _ in 0..k {
                out.push((*a, l.clone()));
            }
        }
        out
    }

    pub fn max_magnitude(&self) -> u64 {
        self.counts.keys().map(|(_, l)| l.magnitude()).max().unwrap_or(0)
    }

    /// Exact Φ in counts: `(n ν₁, n Φ₂(ν))`. The pair part is a raw
    /// row-major matrix and need not be symmetric.
    pub fn phi_counts(&self) -> (Vec<u64>, Vec<u64>) {
        let m = self.m;
        let mut colors = vec![0u64; m];
        let mut pairs = vec![0u64; m * m];
        for ((a, ell), &k) in &self.counts {
            colors[*a] += k;
            for b in 0..m {
                pairs[a * m + b] += k * ell.get(b) as u64;
            }
        }
        (colors, pairs)
    }

    /// True when Φ of these counts equals `(ω_n, ϖ_n)` exactly.
    pub fn matches(&self, colors: &ColorCounts, pairs: &PairCounts) -> bool {
        let (c, p) = self.phi_counts();
        self.n == colors.n() && self.n == pairs.n() && c == colors.counts() && p == pairs.counts()
    }

    pub fn to_measure(&self) -> NeighborhoodMeasure {
        let n = self.n as f64;
        NeighborhoodMeasure::from_map(
            self.alphabet(),
            self.counts.iter().map(|(key, &k)| (key.clone(), k as f64 / n)).collect(),
        )
    }
}

/// `(L¹, L², M)` of a graph in exact counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalMeasures {
    pub colors: ColorCounts,
    pub pairs: PairCounts,
    pub neighborhoods: NeighborhoodCounts,
}

impl EmpiricalMeasures {
    pub fn n(&self) -> u64 {
        self.colors.n()
    }

    /// Φ(M) = (L¹, L²) in integer arithmetic.
    pub fn is_consistent(&self) -> bool {
        self.neighborhoods.matches(&self.colors, &self.pairs)
    }

    pub fn to_measures(&self) -> (ColorMeasure, PairMeasure, NeighborhoodMeasure) {
        (self.colors.to_measure(), self.pairs.to_measure(), self.neighborhoods.to_measure())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_counts_validate_membership() {
        assert!(PairCounts::new(4, 1, vec![3]).is_err());
        assert!(PairCounts::new(4, 2, vec![0, 1, 2, 0]).is_err());
        let p = PairCounts::from_edge_numbers(5, 2, &[1, 2, 0, 3]).unwrap();
        assert_eq!(p.counts(), &[2, 2, 2, 6]);
        assert_eq!(p.edges_between(0, 0), 1);
        assert_eq!(p.edges_between(1, 0), 2);
        assert_eq!(p.total_edges(), 6);
    }

    #[test]
    fn roundtrip_through_measures() {
        let c = ColorCounts::new(vec![3, 1]).unwrap();
        assert_eq!(ColorCounts::from_measure(&c.to_measure(), 4).unwrap(), c);
        assert!(ColorCounts::from_measure(&c.to_measure(), 5).is_err());
        let p = PairCounts::new(7, 2, vec![2, 3, 3, 4]).unwrap();
        assert_eq!(PairCounts::from_measure(&p.to_measure(), 7).unwrap(), p);
        let nbh = NeighborhoodCounts::from_vertices(
            2,
            [
                (0, DegreeVector::new(vec![1, 0])),
                (0, DegreeVector::new(vec![1, 0])),
                (1, DegreeVector::new(vec![0, 0])),
            ],
        )
        .unwrap();
        assert_eq!(NeighborhoodCounts::from_measure(&nbh.to_measure(), 3).unwrap(), nbh);
        assert_eq!(nbh.phi_counts(), (vec![2, 1], vec![2, 0, 0, 0]));
    }
}
