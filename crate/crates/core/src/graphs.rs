//! Colored random graphs: the i.i.d.-color Bernoulli model, the law
//! conditioned on exact color and pair counts, and empirical measures.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Error, Result};
use crate::measures::{
    ColorCounts, ColorMeasure, DegreeVector, EmpiricalMeasures, Kernel, NeighborhoodCounts, PairCounts,
};
use crate::seed::{rng_from_seed, SimRng};

/// A simple graph on vertices `0..n` with a color per vertex.
///
/// Edges are stored as `(u, v)` with `u < v`, sorted, without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct ColoredGraph {
    m: usize,
    colors: Vec<usize>,
    edges: Vec<(u32, u32)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRepr {
    n: usize,
    m: usize,
    colors: Vec<usize>,
    edges: Vec<(u32, u32)>,
}

impl From<ColoredGraph> for GraphRepr {
    fn from(g: ColoredGraph) -> Self {
        GraphRepr { n: g.colors.len(), m: g.m, colors: g.colors, edges: g.edges }
    }
}

impl TryFrom<GraphRepr> for ColoredGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        if r.colors.len() != r.n {
            return Err(shape(format!("graph declares n = {} but lists {} colors", r.n, r.colors.len())));
        }
        ColoredGraph::new(r.m, r.colors, r.edges)
    }
}

impl ColoredGraph {
    /// Validates simplicity and color range; edges may be given in any order
    /// and orientation.
    pub fn new(m: usize, colors: Vec<usize>, edges: Vec<(u32, u32)>) -> Result<Self> {
        if m == 0 {
            return Err(domain("graph alphabet must contain at least one color"));
        }
        if colors.is_empty() {
            return Err(domain("graph must have at least one vertex"));
        }
        if let Some(&bad) = colors.iter().find(|&&c| c >= m) {
            return Err(domain(format!("color {bad} outside alphabet of size {m}")));
        }
        let n = colors.len();
        if n > u32::MAX as usize {
            return Err(domain("graph too large"));
        }
        let mut norm = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(domain(format!("loop at vertex {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(domain(format!("edge ({u}, {v}) references a vertex outside 0..{n}")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(domain(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        Ok(ColoredGraph { m, colors, edges: norm })
    }

    pub(crate) fn from_parts_unchecked(m: usize, colors: Vec<usize>, mut edges: Vec<(u32, u32)>) -> Self {
        edges.sort_unstable();
        ColoredGraph { m, colors, edges }
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    /// Alphabet size.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<u64> {
        let mut d = vec![0; self.n()];
        for &(u, v) in &self.edges {
            d[u as usize] += 1;
            d[v as usize] += 1;
        }
        d
    }

    /// Text form: a header `n m`, the color list, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n(), self.m);
        let colors: Vec<String> = self.colors.iter().map(|c| c.to_string()).collect();
        s.push_str(&colors.join(" "));
        s.push('\n');
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    /// Parses [`ColoredGraph::to_edge_list`] output. Blank lines and lines
    /// starting with `#` are skipped; errors name the offending line.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_err = |line: usize, msg: String| Error::Parse(format!("line {line}: {msg}"));
        let nums = |line: usize, l: &str| -> Result<Vec<u64>> {
            l.split_whitespace()
                .map(|t| t.parse::<u64>().map_err(|_| parse_err(line, format!("`{t}` is not a nonnegative integer"))))
                .collect()
        };

        let (hl, header) = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let header = nums(hl, header)?;
        let [n, m] = header[..] else {
            return Err(parse_err(hl, "header must be `n m`".into()));
        };
        let (cl, colors) = lines.next().ok_or_else(|| parse_err(hl + 1, "missing color list".into()))?;
        let colors: Vec<usize> = nums(cl, colors)?.into_iter().map(|c| c as usize).collect();
        if colors.len() as u64 != n {
            return Err(parse_err(cl, format!("expected {n} colors, found {}", colors.len())));
        }
        let mut edges = Vec::new();
        for (el, l) in lines {
            let e = nums(el, l)?;
            let [u, v] = e[..] else {
                return Err(parse_err(el, "edge lines must be `u v`".into()));
            };
            if u >= n || v >= n {
                return Err(parse_err(el, format!("vertex index out of range 0..{n}")));
            }
            edges.push((u as u32, v as u32));
        }
        ColoredGraph::new(m as usize, colors, edges)
    }
}

/// Model parameters `(μ, C, n)`; pairs of colors `a, b` are joined with
/// probability `p_n(a,b) = min(C(a,b)/n, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    mu: ColorMeasure,
    kernel: Kernel,
    n: usize,
}

impl ModelParams {
    pub fn new(mu: ColorMeasure, kernel: Kernel, n: usize) -> Result<Self> {
        mu.require_probability("color law μ")?;
        mu.alphabet().check_same(kernel.alphabet(), "model parameters")?;
        if n == 0 || n > u32::MAX as usize {
            return Err(domain(format!("vertex count {n} out of range")));
        }
        Ok(ModelParams { mu, kernel, n })
    }

    pub fn mu(&self) -> &ColorMeasure {
        &self.mu
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.mu.clone(), self.kernel.clone(), n)
    }

    #[inline]
    pub fn edge_probability(&self, a: usize, b: usize) -> f64 {
        (self.kernel.get(a, b) / self.n as f64).min(1.0)
    }
}

/// Number of vertex pairs with colors `{a, b}` given per-color vertex counts.
pub fn slot_count(sizes: &[usize], a: usize, b: usize) -> u64 {
    let (na, nb) = (sizes[a] as u64, sizes[b] as u64);
    if a == b {
        na * na.saturating_sub(1) / 2
    } else {
        na * nb
    }
}

/// Maps a slot index to a vertex pair within one color block. Within-color
/// slots use the triangular order `idx = j(j-1)/2 + i` for `i < j`.
#[inline]
fn slot_to_pair(idx: u64, same: bool, a_list: &[u32], b_list: &[u32]) -> (u32, u32) {
    if same {
        let mut j = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0) as u64;
        while j * (j - 1) / 2 > idx {
            j -= 1;
        }
        while (j + 1) * j / 2 <= idx {
            j += 1;
        }
        let i = idx - j * (j - 1) / 2;
        let (u, v) = (a_list[i as usize], a_list[j as usize]);
        (u.min(v), u.max(v))
    } else {
        let nb = b_list.len() as u64;
        let (u, v) = (a_list[(idx / nb) as usize], b_list[(idx % nb) as usize]);
        (u.min(v), u.max(v))
    }
}

fn vertices_by_color(colors: &[usize], m: usize) -> Vec<Vec<u32>> {
    let mut lists = vec![Vec::new(); m];
    for (v, &c) in colors.iter().enumerate() {
        lists[c].push(v as u32);
    }
    lists
}

pub(crate) fn sample_colors(params: &ModelParams, rng: &mut SimRng) -> Vec<usize> {
    let index = WeightedIndex::new(params.mu.weights()).expect("μ is a probability vector");
    (0..params.n).map(|_| index.sample(rng)).collect()
}

/// Calls `emit(a, b, u, v)` for every edge of a Bernoulli draw given colors,
/// skipping geometrically over absent pairs within each color block.
pub(crate) fn for_each_bernoulli_edge(
    params: &ModelParams,
    colors: &[usize],
    rng: &mut SimRng,
    mut emit: impl FnMut(usize, usize, u32, u32),
) {
    let m = params.mu.alphabet().size();
    let lists = vertices_by_color(colors, m);
    let sizes: Vec<usize> = lists.iter().map(Vec::len).collect();
    for a in 0..m {
        for b in a..m {
            let slots = slot_count(&sizes, a, b);
            let p = params.edge_probability(a, b);
            if slots == 0 || p <= 0.0 {
                continue;
            }
            if p >= 1.0 {
                for idx in 0..slots {
                    let (u, v) = slot_to_pair(idx, a == b, &lists[a], &lists[b]);
                    emit(a, b, u, v);
                }
                continue;
            }
            let log_q = (-p).ln_1p();
            let mut idx: u64 = 0;
            loop {
                let u: f64 = rng.random();
                let skip = ((-u).ln_1p() / log_q).floor();
                if skip >= (slots - idx) as f64 {
                    break;
                }
                idx += skip as u64;
                let (x, y) = slot_to_pair(idx, a == b, &lists[a], &lists[b]);
                emit(a, b, x, y);
                idx += 1;
                if idx >= slots {
                    break;
                }
            }
        }
    }
}

/// Samples colors i.i.d. from `μ` and each pair independently with
/// probability `p_n`. Deterministic per seed.
pub fn sample_colored_graph(params: &ModelParams, seed: u64) -> ColoredGraph {
    let mut rng = rng_from_seed(seed);
    let colors = sample_colors(params, &mut rng);
    let mut edges = Vec::new();
    for_each_bernoulli_edge(params, &colors, &mut rng, |_, _, u, v| edges.push((u, v)));
    ColoredGraph::from_parts_unchecked(params.mu.alphabet().size(), colors, edges)
}

/// `(L¹, L², M)` of a graph as exact counts.
pub fn empirical_measures(g: &ColoredGraph) -> EmpiricalMeasures {
    let (n, m) = (g.n(), g.m);
    let mut color_counts = vec![0u64; m];
    for &c in &g.colors {
        color_counts[c] += 1;
    }
    let mut pair = vec![0u64; m * m];
    let mut ell = vec![0u32; n * m];
    for &(u, v) in &g.edges {
        let (cu, cv) = (g.colors[u as usize], g.colors[v as usize]);
        pair[cu * m + cv] += 1;
        pair[cv * m + cu] += 1;
        ell[u as usize * m + cv] += 1;
        ell[v as usize * m + cu] += 1;
    }
    let vertices = (0..n).map(|v| (g.colors[v], DegreeVector::new(ell[v * m..(v + 1) * m].to_vec())));
    EmpiricalMeasures {
        colors: ColorCounts::new(color_counts).expect("n >= 1"),
        pairs: PairCounts::new(n as u64, m, pair).expect("graph pair counts are symmetric with even diagonal"),
        neighborhoods: NeighborhoodCounts::from_vertices(m, vertices).expect("valid graph"),
    }
}

/// Samples uniformly from colored graphs with `L¹ = ω_n` and `L² = ϖ_n`.
///
/// Colors are a seeded shuffle of the color multiset; for each color pair
/// exactly `n(a,b)` distinct vertex pairs are drawn by Floyd's algorithm over
/// the slot index space. `max_retries` must be at least 1; the sampler never
/// rejects, so the budget is not consumed.
pub fn sample_conditional(
    colors: &ColorCounts,
    pairs: &PairCounts,
    seed: u64,
    max_retries: u32,
) -> Result<ColoredGraph> {
    let m = colors.alphabet().size();
    colors.alphabet().check_same(pairs.alphabet(), "conditional sampler")?;
    if colors.n() != pairs.n() {
        return Err(domain(format!("ω_n has n = {} but ϖ_n has n = {}", colors.n(), pairs.n())));
    }
    if max_retries == 0 {
        return Err(Error::Construction("retry budget of zero".into()));
    }
    let sizes: Vec<usize> = colors.counts().iter().map(|&k| k as usize).collect();
    for a in 0..m {
        for b in a..m {
            let want = pairs.edges_between(a, b);
            let slots = slot_count(&sizes, a, b);
            if want > slots {
                return Err(domain(format!(
                    "{want} edges requested between colors {a} and {b} but only {slots} vertex pairs exist"
                )));
            }
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut assignment: Vec<usize> = sizes.iter().enumerate().flat_map(|(a, &k)| std::iter::repeat_n(a, k)).collect();
    assignment.shuffle(&mut rng);
    let lists = vertices_by_color(&assignment, m);

    let mut edges = Vec::with_capacity(pairs.total_edges() as usize);
    let mut chosen: HashSet<u64> = HashSet::new();
    for a in 0..m {
        for b in a..m {
            let want = pairs.edges_between(a, b);
            if want == 0 {
                continue;
            }
            let slots = slot_count(&sizes, a, b);
            chosen.clear();
            for j in slots - want..slots {
                let t = rng.random_range(0..=j);
                if !chosen.insert(t) {
                    chosen.insert(j);
                }
            }
            edges.extend(chosen.iter().map(|&idx| slot_to_pair(idx, a == b, &lists[a], &lists[b])));
        }
    }
    Ok(ColoredGraph::from_parts_unchecked(m, assignment, edges))
}
