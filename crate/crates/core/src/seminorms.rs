//! Truncated oscillation seminorm, r-variation, maximal function,
//! worst-sequence search, long/short splitting and the Rademacher–Menshov
//! blocking bound.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::lp_norm_of;

/// Finite strictly increasing set of truncation radii.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationGrid {
    times: Vec<f64>,
}

impl TruncationGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Domain("truncation grid must be nonempty".into()));
        }
        if times[0] <= 0.0 {
            return Err(Error::Domain("truncation times must be positive".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("truncation times must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    /// `count` log-spaced times between `lo` and `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && count >= 2) {
            return Err(Error::Domain("log grid requires 0 < lo < hi and count >= 2".into()));
        }
        let times = (0..count)
            .map(|i| {
                let s = i as f64 / (count - 1) as f64;
                lo * (hi / lo).powf(s)
            })
            .collect();
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn position(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&x| x == t)
    }
}

/// Increasing sequence I ∈ 𝔖_N with N+1 entries drawn from a truncation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceI {
    entries: Vec<f64>,
}

impl SequenceI {
    pub fn new(entries: Vec<f64>, grid: &TruncationGrid) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Domain("sequence needs at least two entries".into()));
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("sequence entries must be strictly increasing".into()));
        }
        for &e in &entries {
            if grid.position(e).is_none() {
                return Err(Error::Precondition(format!(
                    "sequence entry {} is not a grid time",
                    e
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_indices(indices: &[usize], grid: &TruncationGrid) -> Result<Self> {
        let entries = indices.iter().map(|&i| grid.times()[i]).collect();
        Self::new(entries, grid)
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Number of oscillation blocks N (entries minus one).
    pub fn blocks(&self) -> usize {
        self.entries.len() - 1
    }
}

/// Values a_t(x) for every grid time t at every spatial point x.
#[derive(Debug, Clone)]
pub struct SampledFamily {
    grid: TruncationGrid,
    /// values[point][time index]
    values: Vec<Vec<Complex64>>,
}

impl SampledFamily {
    pub fn new(grid: TruncationGrid, values: Vec<Vec<Complex64>>) -> Result<Self> {
        let m = grid.len();
        if values.iter().any(|row| row.len() != m) {
            return Err(Error::Domain("each point needs one value per grid time".into()));
        }
        if values
            .iter()
            .flatten()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Domain("family values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TruncationGrid {
        &self.grid
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }
}

/// Truncated oscillation seminorm of a single value vector:
/// `( Σ_j max_{t ∈ grid, I_j ≤ t < I_{j+1}} |a_t − a_{I_j}|² )^{1/2}`.
/// A window with no grid point beyond its left endpoint contributes 0; the
/// final entry caps the last window.
pub fn oscillation_pointwise(
    values: &[Complex64],
    grid: &TruncationGrid,
    seq: &SequenceI,
) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::Domain("value count must match grid length".into()));
    }
    let idx: Vec<usize> = seq
        .entries()
        .iter()
        .map(|&e| {
            grid.position(e)
                .ok_or_else(|| Error::Precondition("sequence is not a subsequence of the grid".into()))
        })
        .collect::<Result<_>>()?;
    let mut sum = 0.0;
    for w in idx.windows(2) {
        let (s, e) = (w[0], w[1]);
        let base = values[s];
        let mut block: f64 = 0.0;
        for t in s..e {
            block = block.max((values[t] - base).norm_sqr());
        }
        sum += block;
    }
    Ok(sum.sqrt())
}

/// ℓ^p (counting measure scaled by `cell_measure`) norm over points of the
/// pointwise oscillation.
pub fn oscillation_norm(
    family: &SampledFamily,
    seq: &SequenceI,
    p: f64,
    cell_measure: f64,
) -> Result<f64> {
    let per_point: Vec<Complex64> = family
        .values()
        .iter()
        .map(|row| oscillation_pointwise(row, family.grid(), seq).map(|v| Complex64::new(v, 0.0)))
        .collect::<Result<_>>()?;
    lp_norm_of(&per_point, p, cell_measure)
}

/// r-variation: sup over increasing subsequences of (Σ |increments|^r)^{1/r},
/// computed exactly by dynamic programming in O(m²). `r = ∞` gives the sup of
/// pairwise differences.
pub fn variation_pointwise(values: &[Complex64], r: f64) -> Result<f64> {
    if r.is_infinite() && r > 0.0 {
        let mut best: f64 = 0.0;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                best = best.max((values[j] - values[i]).norm());
            }
        }
        return Ok(best);
    }
    if !(r >= 1.0) {
        return Err(Error::Domain(format!("variation exponent r = {} must be >= 1", r)));
    }
    let m = values.len();
    // best[i] = max over subsequences ending at i of Σ |increment|^r
    let mut best = vec![0.0f64; m];
    let mut overall: f64 = 0.0;
    for i in 0..m {
        for j in 0..i {
            let cand = best[j] + (values[i] - values[j]).norm().powf(r);
            if cand > best[i] {
                best[i] = cand;
            }
        }
        overall = overall.max(best[i]);
    }
    Ok(overall.powf(1.0 / r))
}

/// Pointwise sup_t |a_t(x)| over the grid.
pub fn maximal_function(family: &SampledFamily) -> Vec<f64> {
    family
        .values()
        .iter()
        .map(|row| row.iter().map(|v| v.norm()).fold(0.0, f64::max))
        .collect()
}

/// Rademacher–Menshov right-hand side: with c zero-padded to length 2^m,
/// `Σ_{i=0}^{m} ( Σ_j |Σ_{k ∈ [j2^i, (j+1)2^i)} c_k|² )^{1/2}`.
pub fn rademacher_menshov_rhs(c: &[Complex64]) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    let len = c.len().next_power_of_two();
    let m = len.trailing_zeros();
    let mut padded = vec![Complex64::new(0.0, 0.0); len];
    padded[..c.len()].copy_from_slice(c);
    let mut total = 0.0;
    for i in 0..=m {
        let block = 1usize << i;
        let mut level = 0.0;
        for j in (0..len).step_by(block) {
            let s: Complex64 = padded[j..j + block].iter().sum();
            level += s.norm_sqr();
        }
        total += level.sqrt();
    }
    total
}

/// Sequence-search strategy for approximating the sup over 𝔖_N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Coordinate-ascent from the equally spaced start.
    Greedy,
    /// Greedy plus `restarts` random restarts with deterministic seeding.
    RandomRestarts { restarts: usize, seed: u64 },
    /// True maximum by enumeration; requires C(m, N+1) ≤ 10⁶.
    Exhaustive,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Searches for the sequence I ∈ 𝔖_N(grid) maximizing the oscillation norm.
/// Returns the best sequence found and its value; the exhaustive strategy
/// returns the true maximum.
pub fn worst_sequence_search(
    family: &SampledFamily,
    p: f64,
    n_blocks: usize,
    strategy: SearchStrategy,
    cell_measure: f64,
) -> Result<(SequenceI, f64)> {
    let m = family.grid().len();
    let len = n_blocks + 1;
    if len > m {
        return Err(Error::Precondition(format!(
            "need N+1 = {} grid times but the grid has {}",
            len, m
        )));
    }
    if len < 2 {
        return Err(Error::Domain("need at least one block".into()));
    }

    // For p = 2 the squared norm is additive over blocks, so precompute
    // C[s][e] = cell · Σ_x max_{s ≤ t < e} |a_t(x) − a_s(x)|² once and score a
    // candidate in O(N).
    let pair_cost: Option<Vec<Vec<f64>>> = if p == 2.0 {
        let mut c = vec![vec![0.0f64; m]; m];
        for s in 0..m {
            let mut running: Vec<f64> = vec![0.0; family.points()];
            for e in s + 1..m {
                // extend every window max by column e-1
                let t = e - 1;
                let mut total = 0.0;
                for (x, row) in family.values().iter().enumerate() {
                    let d = (row[t] - row[s]).norm_sqr();
                    if d > running[x] {
                        running[x] = d;
                    }
                    total += running[x];
                }
                c[s][e] = total * cell_measure;
            }
        }
        Some(c)
    } else {
        None
    };

    let score = |indices: &[usize]| -> Result<f64> {
        if let Some(c) = &pair_cost {
            let mut acc = 0.0;
            for w in indices.windows(2) {
                acc += c[w[0]][w[1]];
            }
            Ok(acc.sqrt())
        } else {
            let seq = SequenceI::from_indices(indices, family.grid())?;
            oscillation_norm(family, &seq, p, cell_measure)
        }
    };

    let hill_climb = |start: Vec<usize>| -> Result<(Vec<usize>, f64)> {
        let mut cur = start;
        let mut val = score(&cur)?;
        for _ in 0..200 {
            let mut improved = false;
            for i in 0..cur.len() {
                let lo = if i == 0 { 0 } else { cur[i - 1] + 1 };
                let hi = if i + 1 == cur.len() { m - 1 } else { cur[i + 1] - 1 };
                let orig = cur[i];
                let mut best_pos = orig;
                let mut best_val = val;
                for pos in lo..=hi {
                    if pos == orig {
                        continue;
                    }
                    cur[i] = pos;
                    let v = score(&cur)?;
                    if v > best_val {
                        best_val = v;
                        best_pos = pos;
                    }
                }
                cur[i] = best_pos;
                if best_val > val {
                    val = best_val;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        Ok((cur, val))
    };

    let equally_spaced: Vec<usize> = (0..len)
        .map(|i| i * (m - 1) / (len - 1))
        .collect();
    // the formula can collide for tiny m; repair into a strict chain
    let equally_spaced = repair_strict(equally_spaced, m);

    // deterministic start set for the greedy strategy: equally spaced plus the
    // two extreme packings, each refined by coordinate ascent
    let greedy = |first: Vec<usize>| -> Result<(Vec<usize>, f64)> {
        let starts = [
            first,
            (0..len).collect::<Vec<usize>>(),
            (m - len..m).collect::<Vec<usize>>(),
        ];
        let mut best: Option<(Vec<usize>, f64)> = None;
        for s in starts {
            let (i, v) = hill_climb(s)?;
            if best.as_ref().map_or(true, |b| v > b.1) {
                best = Some((i, v));
            }
        }
        Ok(best.expect("nonempty start set"))
    };

    let (best_idx, best_val) = match strategy {
        SearchStrategy::Greedy => greedy(equally_spaced)?,
        SearchStrategy::RandomRestarts { restarts, seed } => {
            let (mut bi, mut bv) = greedy(equally_spaced)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..restarts {
                let start = random_combination(&mut rng, m, len);
                let (i, v) = hill_climb(start)?;
                if v > bv {
                    bv = v;
                    bi = i;
                }
            }
            (bi, bv)
        }
        SearchStrategy::Exhaustive => {
            if binomial(m, len) > 1_000_000 {
                return Err(Error::Budget(format!(
                    "exhaustive search over C({}, {}) sequences exceeds 10^6",
                    m, len
                )));
            }
            let mut best_idx: Option<Vec<usize>> = None;
            let mut best_val = -1.0;
            let mut comb: Vec<usize> = (0..len).collect();
            loop {
                let v = score(&comb)?;
                if v > best_val {
                    best_val = v;
                    best_idx = Some(comb.clone());
                }
                if !next_combination(&mut comb, m) {
                    break;
                }
            }
            (best_idx.unwrap(), best_val)
        }
    };

    let seq = SequenceI::from_indices(&best_idx, family.grid())?;
    Ok((seq, best_val))
}

/// Advances `comb` to the next k-combination of {0..m-1} in lexicographic
/// order; returns false after the last one.
fn next_combination(comb: &mut [usize], m: usize) -> bool {
    let len = comb.len();
    let mut i = len;
    while i > 0 {
        i -= 1;
        if comb[i] != i + m - len {
            comb[i] += 1;
            for j in i + 1..len {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn repair_strict(mut v: Vec<usize>, m: usize) -> Vec<usize> {
    for i in 1..v.len() {
        if v[i] <= v[i - 1] {
            v[i] = v[i - 1] + 1;
        }
    }
    let len = v.len();
    if v[len - 1] >= m {
        for (off, item) in v.iter_mut().rev().enumerate() {
            let cap = m - 1 - off;
            if *item > cap {
                *item = cap;
            }
        }
    }
    v
}

fn random_combination<R: Rng>(rng: &mut R, m: usize, len: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..m).collect();
    for i in 0..len {
        let j = rng.random_range(i..m);
        pool.swap(i, j);
    }
    let mut chosen: Vec<usize> = pool[..len].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Long part (family restricted to the snapped subexponential nodes 2^{n^τ})
/// and per-block short 2-variations.
#[derive(Debug, Clone)]
pub struct LongShortSplit {
    /// Snapped node times actually present in the grid, one per nonempty block.
    pub node_times: Vec<f64>,
    /// Family restricted to the snapped nodes.
    pub long: SampledFamily,
    /// `short[b][x]` = V² of the values over grid ∩ [2^{n_b^τ}, 2^{(n_b+1)^τ}).
    pub short: Vec<Vec<f64>>,
    /// Half-open block ranges [2^{n^τ}, 2^{(n+1)^τ}) that meet the grid.
    pub block_ranges: Vec<(f64, f64)>,
}

/// Splits a family into long oscillations at the nodes 2^{n^τ}, n ∈ ℕ₀, and
/// short variations within the gaps. Grid times below 1 fall outside every
/// block and are ignored.
pub fn long_short_split(family: &SampledFamily, tau: f64) -> Result<LongShortSplit> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain("τ must lie in (0,1)".into()));
    }
    let grid = family.grid();
    if grid.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    let t_max = *grid.times().last().unwrap();
    let mut node_indices: Vec<usize> = Vec::new();
    let mut short: Vec<Vec<f64>> = Vec::new();
    let mut block_ranges = Vec::new();
    let mut n: u32 = 0;
    loop {
        let node = 2f64.powf((n as f64).powf(tau));
        if node > t_max {
            break;
        }
        let next = 2f64.powf(((n + 1) as f64).powf(tau));
        // snap: largest grid time ≤ node
        let snapped = grid
            .times()
            .iter()
            .rposition(|&t| t <= node);
        let in_block: Vec<usize> = (0..grid.len())
            .filter(|&i| {
                let t = grid.times()[i];
                t >= node && t < next
            })
            .collect();
        if snapped.is_some() || !in_block.is_empty() {
            if let Some(s) = snapped {
                if node_indices.last() != Some(&s) {
                    node_indices.push(s);
                }
            }
            if !in_block.is_empty() {
                let vs: Vec<f64> = family
                    .values()
                    .iter()
                    .map(|row| {
                        let sub: Vec<Complex64> = in_block.iter().map(|&i| row[i]).collect();
                        variation_pointwise(&sub, 2.0)
                    })
                    .collect::<Result<_>>()?;
                short.push(vs);
                block_ranges.push((node, next));
            }
        }
        n += 1;
        if n > 10_000 {
            break;
        }
    }
    let node_times: Vec<f64> = node_indices.iter().map(|&i| grid.times()[i]).collect();
    let long_grid = TruncationGrid::new(if node_times.is_empty() {
        vec![*grid.times().first().unwrap()]
    } else {
        node_times.clone()
    })?;
    let long_values: Vec<Vec<Complex64>> = family
        .values()
        .iter()
        .map(|row| {
            if node_indices.is_empty() {
                vec![row[0]]
            } else {
                node_indices.iter().map(|&i| row[i]).collect()
            }
        })
        .collect();
    let long = SampledFamily::new(long_grid, long_values)?;
    Ok(LongShortSplit {
        node_times,
        long,
        short,
        block_ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn grid(ts: &[f64]) -> TruncationGrid {
        TruncationGrid::new(ts.to_vec()).unwrap()
    }

    /// Brute-force V^r over all subsequences; oracle for the DP.
    fn variation_exhaustive(values: &[Complex64], r: f64) -> f64 {
        let m = values.len();
        let mut best: f64 = 0.0;
        for mask in 0u32..(1 << m) {
            let sub: Vec<Complex64> = (0..m)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| values[i])
                .collect();
            if sub.len() < 2 {
                continue;
            }
            let s: f64 = sub.windows(2).map(|w| (w[1] - w[0]).norm().powf(r)).sum();
            best = best.max(s.powf(1.0 / r));
        }
        best
    }

    #[test]
    fn oscillation_constant_is_zero() {
        let g = grid(&[1.0, 2.0, 3.0, 4.0]);
        let vals = vec![c(5.0); 4];
        let seq = SequenceI::new(vec![1.0, 3.0], &g).unwrap();
        assert_eq!(oscillation_pointwise(&vals, &g, &seq).unwrap(), 0.0);
    }

    #[test]
    fn oscillation_hand_example() {
        // grid {1,2,3,4}, a_t = t, I = (1,3): block [1,3) gives max(0, |2-1|) = 1
        let g = grid(&[1.0, 2.0, 3.0, 4.0]);
        let vals: Vec<Complex64> = g.times().iter().map(|&t| c(t)).collect();
        let seq = SequenceI::new(vec![1.0, 3.0], &g).unwrap();
        assert_eq!(oscillation_pointwise(&vals, &g, &seq).unwrap(), 1.0);
    }

    #[test]
    fn oscillation_homogeneity_and_shift() {
        let g = grid(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let vals = [c(0.3), c(-1.0), c(2.0), c(0.7), c(0.0)];
        let seq = SequenceI::new(vec![1.0, 3.0, 5.0], &g).unwrap();
        let base = oscillation_pointwise(&vals, &g, &seq).unwrap();
        let scaled: Vec<Complex64> = vals.iter().map(|v| v * 3.5).collect();
        assert!((oscillation_pointwise(&scaled, &g, &seq).unwrap() - 3.5 * base).abs() < 1e-12);
        let shifted: Vec<Complex64> = vals.iter().map(|v| v + c(17.0)).collect();
        assert!((oscillation_pointwise(&shifted, &g, &seq).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn oscillation_rejects_non_subsequence() {
        let g = grid(&[1.0, 2.0, 3.0]);
        assert!(SequenceI::new(vec![1.0, 2.5], &g).is_err());
    }

    #[test]
    fn oscillation_monotone_in_refinement() {
        let g = grid(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let vals = [c(0.0), c(1.0), c(-0.5), c(2.0), c(1.5)];
        let short = SequenceI::new(vec![1.0, 3.0], &g).unwrap();
        let longer = SequenceI::new(vec![1.0, 3.0, 5.0], &g).unwrap();
        assert!(
            oscillation_pointwise(&vals, &g, &longer).unwrap()
                >= oscillation_pointwise(&vals, &g, &short).unwrap()
        );
    }

    #[test]
    fn variation_hand_examples() {
        // values (0,1,0,1): V² uses all four points, sqrt(3)
        let vals = [c(0.0), c(1.0), c(0.0), c(1.0)];
        let v = variation_pointwise(&vals, 2.0).unwrap();
        assert!((v - 3f64.sqrt()).abs() < 1e-14);
        assert!((v - variation_exhaustive(&vals, 2.0)).abs() < 1e-14);

        assert_eq!(variation_pointwise(&[c(7.0); 5], 2.0).unwrap(), 0.0);
        // r = ∞: sup pairwise difference
        let vinf = variation_pointwise(&vals, f64::INFINITY).unwrap();
        assert_eq!(vinf, 1.0);
        assert!(variation_pointwise(&vals, 0.5).is_err());
    }

    #[test]
    fn variation_monotone_total_increase() {
        let vals = [c(0.0), c(0.5), c(1.25), c(3.0)];
        let v = variation_pointwise(&vals, 1.0).unwrap();
        assert!((v - 3.0).abs() < 1e-14);
    }

    #[test]
    fn variation_dp_matches_exhaustive_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let m = rng.random_range(2..=12);
            let vals: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let r = *[1.0, 2.0, 3.0].choose(&mut rng).unwrap();
            let dp = variation_pointwise(&vals, r).unwrap();
            let ex = variation_exhaustive(&vals, r);
            assert!((dp - ex).abs() < 1e-10, "dp {} vs exhaustive {}", dp, ex);
        }
    }

    #[test]
    fn oscillation_dominated_by_two_variation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10_000 {
            let m = rng.random_range(3..=10);
            let g = TruncationGrid::new((1..=m).map(|i| i as f64).collect()).unwrap();
            let vals: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let len = rng.random_range(2..=m);
            let idx = random_combination(&mut rng, m, len);
            let seq = SequenceI::from_indices(&idx, &g).unwrap();
            let osc = oscillation_pointwise(&vals, &g, &seq).unwrap();
            let var = variation_pointwise(&vals, 2.0).unwrap();
            assert!(osc <= var + 1e-12, "osc {} var {}", osc, var);
        }
    }

    #[test]
    fn rm_single_entry() {
        let mut c8 = vec![Complex64::new(0.0, 0.0); 8];
        c8[3] = Complex64::new(2.0, 0.0);
        // every level sees one block: (m+1)·|v| with m = 3
        assert!((rademacher_menshov_rhs(&c8) - 4.0 * 2.0).abs() < 1e-14);
    }

    #[test]
    fn rm_alternating() {
        let m = 6;
        let len = 1usize << m;
        let cvec: Vec<Complex64> = (0..len)
            .map(|i| c(if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        // level 0 contributes sqrt(2^m); levels >= 1 are all zero-sum blocks
        assert!((rademacher_menshov_rhs(&cvec) - (len as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rm_dominates_partial_sum_variation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..2000 {
            let m: u32 = rng.random_range(1..=6);
            let len = 1usize << m;
            let cvec: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let mut partial = Vec::with_capacity(len + 1);
            let mut acc = Complex64::new(0.0, 0.0);
            partial.push(acc);
            for v in &cvec {
                acc += v;
                partial.push(acc);
            }
            let v2 = variation_pointwise(&partial, 2.0).unwrap();
            let rhs = rademacher_menshov_rhs(&cvec);
            if rhs > 0.0 {
                worst = worst.max(v2 / rhs);
            }
            assert!(v2 <= 2.0 * rhs + 1e-12, "V² {} rhs {}", v2, rhs);
        }
        assert!(worst <= 2.0);
    }

    #[test]
    fn maximal_function_cases() {
        let g = grid(&[1.0, 2.0]);
        let fam = SampledFamily::new(g.clone(), vec![vec![c(3.0), c(-4.0)]]).unwrap();
        assert_eq!(maximal_function(&fam), vec![4.0]);
        let zero = SampledFamily::new(g, vec![vec![c(0.0), c(0.0)]]).unwrap();
        assert_eq!(maximal_function(&zero), vec![0.0]);
    }

    #[test]
    fn maximal_dominated_by_first_plus_v1() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let m = rng.random_range(2..=10);
            let vals: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let maxv = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let v1 = variation_pointwise(&vals, 1.0).unwrap();
            assert!(maxv <= vals[0].norm() + v1 + 1e-12);
        }
    }

    #[test]
    fn worst_sequence_full_grid() {
        let g = grid(&[1.0, 2.0, 3.0]);
        let fam = SampledFamily::new(g.clone(), vec![vec![c(0.0), c(1.0), c(-1.0)]]).unwrap();
        let (seq, val) =
            worst_sequence_search(&fam, 2.0, 2, SearchStrategy::Exhaustive, 1.0).unwrap();
        assert_eq!(seq.entries(), &[1.0, 2.0, 3.0]);
        let direct = oscillation_norm(&fam, &seq, 2.0, 1.0).unwrap();
        assert!((val - direct).abs() < 1e-12);
    }

    #[test]
    fn greedy_close_to_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut exact_hits = 0;
        let trials = 100;
        for _ in 0..trials {
            let m = 12;
            let g = TruncationGrid::new((1..=m).map(|i| i as f64).collect()).unwrap();
            let vals: Vec<Vec<Complex64>> = (0..3)
                .map(|_| {
                    (0..m)
                        .map(|_| {
                            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                        })
                        .collect()
                })
                .collect();
            let fam = SampledFamily::new(g, vals).unwrap();
            let (_, exact) =
                worst_sequence_search(&fam, 2.0, 3, SearchStrategy::Exhaustive, 1.0).unwrap();
            let (_, greedy) =
                worst_sequence_search(&fam, 2.0, 3, SearchStrategy::Greedy, 1.0).unwrap();
            assert!(greedy <= exact + 1e-12);
            assert!(greedy >= 0.7 * exact, "greedy {} exact {}", greedy, exact);
            if greedy >= exact - 1e-9 {
                exact_hits += 1;
            }
        }
        assert!(exact_hits * 100 >= trials * 80, "greedy exact in {}/{}", exact_hits, trials);
    }

    #[test]
    fn restarts_never_worse_than_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = 14;
        let g = TruncationGrid::new((1..=m).map(|i| i as f64).collect()).unwrap();
        let vals: Vec<Vec<Complex64>> = (0..4)
            .map(|_| {
                (0..m)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let fam = SampledFamily::new(g, vals).unwrap();
        let (_, greedy) = worst_sequence_search(&fam, 2.0, 4, SearchStrategy::Greedy, 1.0).unwrap();
        let (_, rr) = worst_sequence_search(
            &fam,
            2.0,
            4,
            SearchStrategy::RandomRestarts { restarts: 30, seed: 99 },
            1.0,
        )
        .unwrap();
        assert!(rr >= greedy - 1e-12);
    }

    #[test]
    fn infeasible_n_rejected() {
        let g = grid(&[1.0, 2.0]);
        let fam = SampledFamily::new(g, vec![vec![c(0.0), c(1.0)]]).unwrap();
        assert!(worst_sequence_search(&fam, 2.0, 5, SearchStrategy::Greedy, 1.0).is_err());
    }

    #[test]
    fn long_short_constant_family() {
        let g = TruncationGrid::log_spaced(1.0, 50.0, 20).unwrap();
        let fam = SampledFamily::new(g.clone(), vec![vec![c(2.0); 20]]).unwrap();
        let split = long_short_split(&fam, 0.5).unwrap();
        for block in &split.short {
            for &v in block {
                assert_eq!(v, 0.0);
            }
        }
        // long part of a constant family oscillates by 0
        let lg = split.long.grid().clone();
        if lg.len() >= 2 {
            let seq = SequenceI::new(lg.times().to_vec(), &lg).unwrap();
            assert_eq!(oscillation_norm(&split.long, &seq, 2.0, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_block_oscillation_vs_short_variation() {
        // grid entirely inside the block [2, 2^{2^τ}) for τ = 0.8
        let tau = 0.8;
        let lo = 2.0_f64;
        let hi = 2f64.powf(2f64.powf(tau)) - 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let g = TruncationGrid::log_spaced(lo, hi, 8).unwrap();
            let vals: Vec<Complex64> = (0..8)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let fam = SampledFamily::new(g.clone(), vec![vals.clone()]).unwrap();
            let split = long_short_split(&fam, tau).unwrap();
            assert_eq!(split.short.len(), 1);
            // full oscillation (any I) ≤ √2 · V² of the block
            let v2 = split.short[0][0];
            for len in 2..=4 {
                let idx: Vec<usize> = (0..len).map(|i| i * 7 / (len - 1)).collect();
                let idx = repair_strict(idx, 8);
                let seq = SequenceI::from_indices(&idx, &g).unwrap();
                let osc = oscillation_pointwise(&vals, &g, &seq).unwrap();
                assert!(osc <= 2f64.sqrt() * v2 + 1e-9, "osc {} v2 {}", osc, v2);
            }
        }
    }

    #[test]
    fn split_bound_empirical() {
        // oscillation ≤ C (long oscillation + ℓ² aggregate of short variations)
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let tau = 0.6;
        for _ in 0..1000 {
            let m = 16;
            let g = TruncationGrid::log_spaced(1.0, 100.0, m).unwrap();
            let vals: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let fam = SampledFamily::new(g.clone(), vec![vals.clone()]).unwrap();
            let split = long_short_split(&fam, tau).unwrap();

            // a random admissible sequence; full sequences oscillate trivially
            let len = rng.random_range(2..=6);
            let idx = random_combination(&mut rng, m, len);
            let seq = SequenceI::from_indices(&idx, &g).unwrap();
            let osc = oscillation_pointwise(&vals, &g, &seq).unwrap();

            // long contribution: V² over the snapped nodes dominates the
            // oscillation along any induced node sequence
            let long_osc = variation_pointwise(&split.long.values()[0], 2.0).unwrap();
            let short_l2: f64 = split
                .short
                .iter()
                .map(|b| b[0] * b[0])
                .sum::<f64>()
                .sqrt();
            let rhs = long_osc + short_l2;
            if rhs > 1e-12 {
                assert!(osc <= 4.0 * rhs, "osc {} long {} short {}", osc, long_osc, short_l2);
            } else {
                assert!(osc < 1e-9);
            }
        }
    }
}
