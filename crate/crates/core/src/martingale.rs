//! Anisotropic Christ dyadic cubes, the associated martingale conditional
//! expectations and approximation square function, measure dilates with their
//! low/high decomposition, and the telescoping annulus pieces of the
//! complement Radon transform.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::CZKernel;
use crate::lattice::{
    canonical_map_int, canonical_map_real, dilate_point, lattice_points_in_annulus,
    lattice_points_in_dilate, ConvexBody, DilationMatrix, GridFunction, LatticeFunction,
};
use crate::lattice::MultiIndexSet;
use crate::seminorms::{
    worst_sequence_search, SampledFamily, SearchStrategy, TruncationGrid,
};

/// Floor of x/side with a relative snap guard so that points that are exact
/// cell boundaries up to roundoff land in the cell they open.
fn cell_index(x: f64, side: f64) -> i64 {
    let u = x / side;
    let f = u.floor();
    if u - f > 1.0 - 1e-9 {
        f as i64 + 1
    } else {
        f as i64
    }
}

/// System of anisotropic D-dyadic rectangles adapted to the dilations t^A:
/// the level-k cell indexed by m ∈ ℤ^Γ is ∏_γ [m_γ·D^{k|γ|}, (m_γ+1)·D^{k|γ|}).
/// Larger k means coarser cells. Each level partitions ℝ^Γ and each cell is
/// contained in exactly one cell of the next level.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristCubeSystem {
    base: u32,
    dilation: DilationMatrix,
    k_min: i32,
    k_max: i32,
}

impl ChristCubeSystem {
    pub fn new(base: u32, dilation: DilationMatrix, k_min: i32, k_max: i32) -> Result<Self> {
        if base < 2 {
            return Err(Error::Domain("cube base D must be at least 2".into()));
        }
        if k_min > k_max {
            return Err(Error::Domain("level range is empty".into()));
        }
        Ok(Self {
            base,
            dilation,
            k_min,
            k_max,
        })
    }

    /// Default base D = 2.
    pub fn binary(dilation: DilationMatrix, k_min: i32, k_max: i32) -> Result<Self> {
        Self::new(2, dilation, k_min, k_max)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dilation(&self) -> &DilationMatrix {
        &self.dilation
    }

    pub fn dim(&self) -> usize {
        self.dilation.dim()
    }

    pub fn levels(&self) -> (i32, i32) {
        (self.k_min, self.k_max)
    }

    /// Side length of a level-k cell along the axis with weight w: D^{k·w}.
    pub fn cell_side(&self, k: i32, weight: u32) -> f64 {
        (self.base as f64).powi(k * weight as i32)
    }

    /// Cell volume ∏_γ D^{k|γ|} = D^{k·tr(A)}.
    pub fn cell_volume(&self, k: i32) -> f64 {
        (self.base as f64).powi(k * self.dilation.trace() as i32)
    }

    /// The unique level-k cell containing x: m_γ = ⌊x_γ / D^{k|γ|}⌋.
    pub fn cube_containing(&self, x: &[f64], k: i32) -> Result<Vec<i64>> {
        if x.len() != self.dim() {
            return Err(Error::Domain("point has wrong dimension".into()));
        }
        if k < self.k_min || k > self.k_max {
            return Err(Error::Domain(format!(
                "level {} outside range [{}, {}]",
                k, self.k_min, self.k_max
            )));
        }
        Ok(x.iter()
            .zip(self.dilation.weights())
            .map(|(&xi, &w)| cell_index(xi, self.cell_side(k, w)))
            .collect())
    }

    /// Quasi-norm ρ(x) = max_γ |x_γ|^{1/|γ|}, homogeneous under t^A:
    /// ρ(t^A x) = t·ρ(x) for t > 0.
    pub fn rho(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.dilation.weights())
            .map(|(&xi, &w)| xi.abs().powf(1.0 / w as f64))
            .fold(0.0, f64::max)
    }

    /// Comparability constants (c_in, c_out): every level-k cell contains a
    /// ρ-ball of radius c_in·D^k about its center and is contained in one of
    /// radius c_out·D^k. The ratio c_out/c_in is at most 2.
    pub fn ball_constants(&self) -> (f64, f64) {
        let min_w = *self.dilation.weights().iter().min().expect("nonempty") as f64;
        let max_w = *self.dilation.weights().iter().max().expect("nonempty") as f64;
        (0.5f64.powf(1.0 / min_w), 0.5f64.powf(1.0 / max_w))
    }

    /// Center of the level-k cell with index m.
    pub fn cell_center(&self, m: &[i64], k: i32) -> Vec<f64> {
        m.iter()
            .zip(self.dilation.weights())
            .map(|(&mi, &w)| (mi as f64 + 0.5) * self.cell_side(k, w))
            .collect()
    }
}

/// Checks that the grid resolves level-k cells exactly: along every axis the
/// cell side must be an integer multiple (≥ 1) of the grid spacing.
fn check_resolution(f: &GridFunction, system: &ChristCubeSystem, k: i32) -> Result<()> {
    if f.dim() != system.dim() {
        return Err(Error::Domain("grid dimension does not match cube system".into()));
    }
    for &w in system.dilation().weights() {
        let side = system.cell_side(k, w);
        let ratio = side / f.spacing();
        if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::Resolution(format!(
                "grid spacing {} does not divide the level-{} cell side {}",
                f.spacing(),
                k,
                side
            )));
        }
    }
    Ok(())
}

/// Martingale conditional expectation 𝔼_k f: the average of f over the
/// level-k cell containing each node, piecewise constant on cells. Averages
/// are taken over the nodes actually present, so clipped boundary cells still
/// give an exact averaging projection on the grid.
pub fn conditional_expectation(
    f: &GridFunction,
    k: i32,
    system: &ChristCubeSystem,
) -> Result<GridFunction> {
    check_resolution(f, system, k)?;
    let n = f.len();
    // group nodes by cell index
    let mut keys: Vec<Vec<i64>> = Vec::with_capacity(n);
    for idx in 0..n {
        keys.push(system.cube_containing(&f.node(idx), k)?);
    }
    use std::collections::HashMap;
    let mut sums: HashMap<&[i64], (Complex64, usize)> = HashMap::new();
    for (idx, key) in keys.iter().enumerate() {
        let e = sums
            .entry(key.as_slice())
            .or_insert((Complex64::new(0.0, 0.0), 0));
        e.0 += f.values()[idx];
        e.1 += 1;
    }
    let mut out = f.clone();
    for (idx, key) in keys.iter().enumerate() {
        let (s, c) = sums[key.as_slice()];
        out.values_mut()[idx] = s / c as f64;
    }
    Ok(out)
}

/// Result of a worst-sequence oscillation probe over martingale levels.
#[derive(Debug, Clone)]
pub struct MartingaleOscReport {
    /// Levels actually probed, ascending.
    pub levels: Vec<i32>,
    /// Best (largest) ‖O²_{I,N}(𝔼_n f)‖_p found.
    pub best_value: f64,
    /// Level-sequence (as levels) achieving it.
    pub best_sequence: Vec<i32>,
    /// ‖f‖_p on the same grid.
    pub f_norm: f64,
    /// best_value / ‖f‖_p (0 when f = 0).
    pub ratio: f64,
}

/// Searches level-sequences I for the largest oscillation norm of the
/// martingale family (𝔼_n f : n ∈ levels), normalized by ‖f‖_p.
pub fn martingale_oscillation_probe(
    f: &GridFunction,
    system: &ChristCubeSystem,
    levels: &[i32],
    p: f64,
    n_blocks: usize,
    strategy: SearchStrategy,
) -> Result<MartingaleOscReport> {
    if levels.len() < 2 {
        return Err(Error::Domain("need at least two levels".into()));
    }
    for w in levels.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Domain("levels must be strictly increasing".into()));
        }
    }
    let times: Vec<f64> = levels
        .iter()
        .map(|&k| (system.base() as f64).powi(k))
        .collect();
    let grid = TruncationGrid::new(times.clone())?;
    let mut rows: Vec<Vec<Complex64>> = vec![Vec::with_capacity(levels.len()); f.len()];
    for &k in levels {
        let ek = conditional_expectation(f, k, system)?;
        for (x, v) in ek.values().iter().enumerate() {
            rows[x].push(*v);
        }
    }
    let family = SampledFamily::new(grid, rows)?;
    let cell = f.spacing().powi(f.dim() as i32);
    let (seq, best_value) = worst_sequence_search(&family, p, n_blocks, strategy, cell)?;
    let f_norm = f.lp_norm(p)?;
    let best_sequence: Vec<i32> = seq
        .entries()
        .iter()
        .map(|&t| {
            let pos = times.iter().position(|&u| u == t).expect("grid time");
            levels[pos]
        })
        .collect();
    Ok(MartingaleOscReport {
        levels: levels.to_vec(),
        best_value,
        best_sequence,
        f_norm,
        ratio: if f_norm > 0.0 { best_value / f_norm } else { 0.0 },
    })
}

/// Mollifier dilate φ_{D^k}(x) = D^{−tr(A)k}·φ(D^{−kA}x) sampled at x.
fn mollifier_dilate(
    phi: &GridFunction,
    system: &ChristCubeSystem,
    k: i32,
    x: &[f64],
) -> Result<Complex64> {
    let d = system.base() as f64;
    let jac = d.powi(-(system.dilation().trace() as i32) * k);
    let arg = dilate_point(d.powi(-k), system.dilation(), x)?;
    Ok(phi.interp(&arg) * jac)
}

/// Convolution φ_{D^k} ∗ f on f's grid by direct Riemann summation; treats f
/// as zero outside its box and errors if the dilated mollifier support lets
/// mass escape the box (so integrals would be silently clipped).
pub fn mollified(
    f: &GridFunction,
    phi: &GridFunction,
    system: &ChristCubeSystem,
    k: i32,
) -> Result<GridFunction> {
    if f.dim() != phi.dim() || f.dim() != system.dim() {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let integral = phi.integral();
    if (integral - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::Precondition(format!(
            "mollifier must have unit integral; got {}",
            integral
        )));
    }
    let d = system.base() as f64;
    // dilated support bounds per axis
    let weights = system.dilation().weights();
    let mut sup_lo = vec![0.0f64; f.dim()];
    let mut sup_hi = vec![0.0f64; f.dim()];
    for i in 0..f.dim() {
        let scale = d.powi(k * weights[i] as i32);
        let lo = phi.lo()[i];
        let hi = phi.lo()[i] + (phi.shape()[i] - 1) as f64 * phi.spacing();
        sup_lo[i] = lo * scale;
        sup_hi[i] = hi * scale;
    }
    // support of f (nonzero nodes)
    let mut f_lo = vec![f64::INFINITY; f.dim()];
    let mut f_hi = vec![f64::NEG_INFINITY; f.dim()];
    let mut any = false;
    for idx in 0..f.len() {
        if f.values()[idx].norm() > 0.0 {
            any = true;
            let x = f.node(idx);
            for i in 0..f.dim() {
                f_lo[i] = f_lo[i].min(x[i]);
                f_hi[i] = f_hi[i].max(x[i]);
            }
        }
    }
    if any {
        for i in 0..f.dim() {
            let box_lo = f.lo()[i];
            let box_hi = f.lo()[i] + (f.shape()[i] - 1) as f64 * f.spacing();
            if f_lo[i] + sup_lo[i] < box_lo - 1e-9 || f_hi[i] + sup_hi[i] > box_hi + 1e-9 {
                return Err(Error::Resolution(format!(
                    "dilated mollifier support escapes the grid box on axis {} at level {}",
                    i, k
                )));
            }
        }
    }
    let h = f.spacing();
    let cell = h.powi(f.dim() as i32);
    // quadrature nodes: f-grid offsets y covering the dilated support
    let mut out = f.clone();
    for v in out.values_mut() {
        *v = Complex64::new(0.0, 0.0);
    }
    let ranges: Vec<(i64, i64)> = (0..f.dim())
        .map(|i| {
            (
                (sup_lo[i] / h).floor() as i64,
                (sup_hi[i] / h).ceil() as i64,
            )
        })
        .collect();
    let mut offs = Vec::new();
    let mut m: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let y: Vec<f64> = m.iter().map(|&c| c as f64 * h).collect();
        let w = mollifier_dilate(phi, system, k, &y)?;
        if w.norm() > 0.0 {
            offs.push((m.clone(), w * cell));
        }
        let mut i = f.dim();
        let mut done = false;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if m[i] < ranges[i].1 {
                m[i] += 1;
                for (j, mj) in m.iter_mut().enumerate().skip(i + 1) {
                    *mj = ranges[j].0;
                }
                break;
            }
        }
        if done {
            break;
        }
    }
    let shape = f.shape().to_vec();
    for oi in 0..out.len() {
        let mi = out.multi_index(oi);
        let mut acc = Complex64::new(0.0, 0.0);
        for (off, w) in &offs {
            // f(x − y) with both on the grid: shift multi-index
            let mut src = Vec::with_capacity(shape.len());
            let mut inside = true;
            for i in 0..shape.len() {
                let s = mi[i] as i64 - off[i];
                if s < 0 || s as usize >= shape[i] {
                    inside = false;
                    break;
                }
                src.push(s as usize);
            }
            if inside {
                acc += f.values()[f.flat_index(&src)] * w;
            }
        }
        out.values_mut()[oi] = acc;
    }
    Ok(out)
}

/// Martingale-approximation square function
/// 𝒮f(x) = (Σ_{k ∈ levels} |φ_{D^k}∗f(x) − 𝔼_k f(x)|²)^{1/2}.
pub fn approx_square_function(
    f: &GridFunction,
    phi: &GridFunction,
    system: &ChristCubeSystem,
    levels: &[i32],
) -> Result<GridFunction> {
    let mut sq = f.clone();
    for v in sq.values_mut() {
        *v = Complex64::new(0.0, 0.0);
    }
    for &k in levels {
        let conv = mollified(f, phi, system, k)?;
        let ek = conditional_expectation(f, k, system)?;
        for ((s, c), e) in sq
            .values_mut()
            .iter_mut()
            .zip(conv.values())
            .zip(ek.values())
        {
            *s += Complex64::new((c - e).norm_sqr(), 0.0);
        }
    }
    for v in sq.values_mut() {
        *v = Complex64::new(v.re.sqrt(), 0.0);
    }
    Ok(sq)
}

/// Compactly supported finite complex measure given by weighted atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<Complex64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<Complex64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::Domain("points and weights must pair up".into()));
        }
        let d = points.first().map(|p| p.len()).unwrap_or(0);
        for p in &points {
            if p.len() != d || p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain("atoms must be finite and consistent".into()));
            }
        }
        if weights.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::Domain("weights must be finite".into()));
        }
        Ok(Self { points, weights })
    }

    /// Unit point mass at the origin of ℝ^d.
    pub fn dirac(d: usize) -> Self {
        Self {
            points: vec![vec![0.0; d]],
            weights: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.points.first().map(|p| p.len()).unwrap_or(0)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn total_mass(&self) -> Complex64 {
        self.weights.iter().sum()
    }

    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).sum()
    }

    /// Radius of the smallest Euclidean ball about 0 containing the support.
    pub fn support_radius(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Fourier transform σ̂(ξ) = Σ_j w_j·e^{−2πi ξ·p_j}.
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| {
                let theta: f64 = xi.iter().zip(p).map(|(a, b)| a * b).sum();
                w * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * theta)
            })
            .sum()
    }
}

/// Dilate σ_t with ⟨σ_t, f⟩ = ∫ f(t^A x) dσ(x): atoms move by x ↦ t^A x...
/// more precisely the atom p becomes the atom at t^{−A} p so that test
/// functions compose correctly — with the paper's convention ⟨σ_t, f⟩ =
/// Σ w_j f(t^A p_j), the new support point is t^A p_j and weights are kept.
pub fn measure_dilate(sigma: &DiscreteMeasure, t: f64, a: &DilationMatrix) -> Result<DiscreteMeasure> {
    if !(t > 0.0) {
        return Err(Error::Domain("dilation parameter must be positive".into()));
    }
    let points: Result<Vec<Vec<f64>>> = sigma
        .points()
        .iter()
        .map(|p| dilate_point(t, a, p))
        .collect();
    DiscreteMeasure::new(points?, sigma.weights().to_vec())
}

/// Low/high decomposition σ = φ∗σ + (δ₀ − φ)∗σ.
#[derive(Debug, Clone)]
pub struct LowHighSplit {
    /// Low part φ∗σ as a density on its own grid.
    pub low: GridFunction,
    /// The original atoms; the high part is `atoms − low` as a distribution.
    pub atoms: DiscreteMeasure,
}

impl LowHighSplit {
    /// Mean of the high part: Σw − ∫low; vanishes (to quadrature accuracy)
    /// because ∫φ = 1.
    pub fn high_mean(&self) -> Complex64 {
        self.atoms.total_mass() - self.low.integral()
    }

    /// Fourier transform of the high part at ξ (e^{−2πi} convention):
    /// σ̂(ξ) − Σ_x low(x)·e^{−2πiξ·x}·h^d.
    pub fn high_fourier(&self, xi: &[f64]) -> Complex64 {
        let h = self.low.spacing().powi(self.low.dim() as i32);
        let mut low_hat = Complex64::new(0.0, 0.0);
        for idx in 0..self.low.len() {
            let x = self.low.node(idx);
            let theta: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
            low_hat += self.low.values()[idx]
                * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * theta);
        }
        self.atoms.fourier(xi) - low_hat * h
    }
}

/// Splits σ into φ∗σ (smooth low part) and (δ₀ − φ)∗σ (mean-zero high part).
/// The low-part grid is φ's grid enlarged to cover every atom translate.
pub fn low_high_split(sigma: &DiscreteMeasure, phi: &GridFunction) -> Result<LowHighSplit> {
    if sigma.dim() != phi.dim() {
        return Err(Error::Domain("measure and mollifier dimension mismatch".into()));
    }
    let integral = phi.integral();
    if (integral - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::Precondition(format!(
            "mollifier must have unit integral; got {}",
            integral
        )));
    }
    let d = phi.dim();
    let h = phi.spacing();
    // output grid covers φ support + atom positions
    let mut lo = phi.lo().to_vec();
    let mut hi: Vec<f64> = phi
        .lo()
        .iter()
        .zip(phi.shape())
        .map(|(&l, &s)| l + (s - 1) as f64 * h)
        .collect();
    for p in sigma.points() {
        for i in 0..d {
            lo[i] = lo[i].min(phi.lo()[i] + p[i]);
            hi[i] = hi[i].max(phi.lo()[i] + (phi.shape()[i] - 1) as f64 * h + p[i]);
        }
    }
    let shape: Vec<usize> = (0..d)
        .map(|i| ((hi[i] - lo[i]) / h).round() as usize + 1)
        .collect();
    let mut low = GridFunction::zeros(lo, h, shape)?;
    for idx in 0..low.len() {
        let x = low.node(idx);
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, w) in sigma.points().iter().zip(sigma.weights()) {
            let shifted: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
            acc += w * phi.interp(&shifted);
        }
        low.values_mut()[idx] = acc;
    }
    Ok(LowHighSplit {
        low,
        atoms: sigma.clone(),
    })
}

/// Telescoping annulus pieces μ_{D^j}∗f = Σ_{y ∈ (Ω_{D^{j+1}}\Ω_{D^j}) ∩ ℤ^k}
/// f(· − (y)^Γ)K(y) for j = k_lo, …, k_hi − 1, all on the shared box sized
/// for Ω_{D^{k_hi}}, so that Σ_j pieces = H_{D^{k_hi}}f − H_{D^{k_lo}}f
/// exactly.
#[allow(clippy::too_many_arguments)]
pub fn telescoping_pieces(
    f: &LatticeFunction,
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    base: u32,
    k_lo: i32,
    k_hi: i32,
    max_cells: usize,
) -> Result<Vec<LatticeFunction>> {
    if base < 2 {
        return Err(Error::Domain("base D must be at least 2".into()));
    }
    if k_lo >= k_hi {
        return Err(Error::Domain("level range must be nonempty".into()));
    }
    let d_f = base as f64;
    let t_max = d_f.powi(k_hi);
    let all_points = lattice_points_in_dilate(body, t_max, max_cells)?;
    let d = f.bounds().dim();
    let mut lo_img = vec![0i64; d];
    let mut hi_img = vec![0i64; d];
    for y in &all_points {
        let z = canonical_map_int(y, gamma)?;
        for i in 0..d {
            lo_img[i] = lo_img[i].min(z[i]);
            hi_img[i] = hi_img[i].max(z[i]);
        }
    }
    let out_box = f.bounds().expanded(&lo_img, &hi_img)?;
    let mut pieces = Vec::with_capacity((k_hi - k_lo) as usize);
    for j in k_lo..k_hi {
        let t0 = d_f.powi(j);
        let t1 = d_f.powi(j + 1);
        let annulus = lattice_points_in_annulus(body, t0, t1, max_cells)?;
        let mut piece = LatticeFunction::zeros(out_box.clone());
        for y in &annulus {
            let yf: Vec<f64> = y.iter().map(|&c| c as f64).collect();
            let kv = kernel.eval(&yf);
            if kv == Complex64::new(0.0, 0.0) {
                continue;
            }
            let z = canonical_map_int(y, gamma)?;
            for (idx, fv) in f.values().iter().enumerate() {
                if *fv == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let x_in = f.bounds().point_at(idx);
                let shifted: Vec<i64> = x_in.iter().zip(&z).map(|(a, b)| a + b).collect();
                let oi = out_box
                    .index_of(&shifted)
                    .expect("shared box contains all shifts");
                piece.values_mut()[oi] += fv * kv;
            }
        }
        pieces.push(piece);
    }
    Ok(pieces)
}

/// Continuous annulus piece ∫_{Ω_{t_hi}\Ω_{t_lo}} f(x − (y)^Γ)K(y)dy by the
/// same symmetric-pair midpoint rule as the continuous Radon operator;
/// constants are annihilated exactly by the pairing when K is odd.
pub fn continuous_annulus_piece(
    f: &GridFunction,
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    t_lo: f64,
    t_hi: f64,
    quad_level: u32,
) -> Result<GridFunction> {
    if !(0.0 < t_lo && t_lo < t_hi) {
        return Err(Error::Domain("need 0 < t_lo < t_hi".into()));
    }
    let k = body.dim();
    if k > 2 {
        return Err(Error::Domain("continuous piece supports k ≤ 2".into()));
    }
    let n = 1usize << quad_level;
    let h = 2.0 * t_hi / n as f64;
    let cell = h.powi(k as i32);
    let mut out = f.clone();
    for v in out.values_mut() {
        *v = Complex64::new(0.0, 0.0);
    }
    let mut m = vec![0usize; k];
    let mut y = vec![0.0f64; k];
    loop {
        for i in 0..k {
            y[i] = -t_hi + (m[i] as f64 + 0.5) * h;
        }
        let lex_positive = y.iter().find(|&&c| c != 0.0).map_or(false, |&c| c > 0.0);
        if lex_positive
            && body.contains_in_dilate(&y, t_hi)
            && !body.contains_in_dilate(&y, t_lo)
        {
            let neg: Vec<f64> = y.iter().map(|c| -c).collect();
            let zp = canonical_map_real(&y, gamma);
            let zn = canonical_map_real(&neg, gamma);
            let kp = kernel.eval(&y) * cell;
            let kn = kernel.eval(&neg) * cell;
            for (oi, ov) in out.values_mut().iter_mut().enumerate() {
                let x = f.node(oi);
                let xp: Vec<f64> = x.iter().zip(&zp).map(|(a, b)| a - b).collect();
                let xn: Vec<f64> = x.iter().zip(&zn).map(|(a, b)| a - b).collect();
                *ov += f.interp(&xp) * kp + f.interp(&xn) * kn;
            }
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if m[i] + 1 < n {
                m[i] += 1;
                for mj in m.iter_mut().skip(i + 1) {
                    *mj = 0;
                }
                break;
            }
        }
    }
}

/// Brute-force oscillation maximum over all level sequences with at most
/// `max_blocks` blocks; used as an oracle for the probe.
pub fn martingale_oscillation_exhaustive(
    f: &GridFunction,
    system: &ChristCubeSystem,
    levels: &[i32],
    p: f64,
    max_blocks: usize,
) -> Result<f64> {
    let mut best: f64 = 0.0;
    for n in 1..=max_blocks.min(levels.len() - 1) {
        let r = martingale_oscillation_probe(f, system, levels, p, n, SearchStrategy::Exhaustive)?;
        best = best.max(r.best_value);
    }
    Ok(best)
}

// re-export used by downstream probes
pub use crate::seminorms::SearchStrategy as LevelSearchStrategy;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::make_hilbert_kernel;
    use crate::lattice::IntBox;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system_12() -> ChristCubeSystem {
        // Γ = {1, 2} on the line: weights (1, 2)
        let a = DilationMatrix::from_weights(vec![1, 2]).unwrap();
        ChristCubeSystem::binary(a, -4, 8).unwrap()
    }

    fn system_1d() -> ChristCubeSystem {
        let a = DilationMatrix::from_weights(vec![1]).unwrap();
        ChristCubeSystem::binary(a, -4, 8).unwrap()
    }

    #[test]
    fn cube_containing_examples() {
        let s = system_12();
        for k in -2..=4 {
            assert_eq!(s.cube_containing(&[0.0, 0.0], k).unwrap(), vec![0, 0]);
        }
        // D=2, k=1: cells are 2 × 4; x = (3, 5) → (1, 1)
        assert_eq!(s.cube_containing(&[3.0, 5.0], 1).unwrap(), vec![1, 1]);
    }

    #[test]
    fn parent_child_nesting() {
        let s = system_12();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let x = [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)];
            let k = rng.random_range(-3..7);
            let child = s.cube_containing(&x, k).unwrap();
            let parent = s.cube_containing(&x, k + 1).unwrap();
            // child cell corner must lie in the parent cell
            for (i, &w) in s.dilation().weights().iter().enumerate() {
                let corner = child[i] as f64 * s.cell_side(k, w);
                let p_side = s.cell_side(k + 1, w);
                assert_eq!(cell_index(corner, p_side), parent[i]);
            }
        }
    }

    #[test]
    fn partition_uniqueness() {
        let s = system_12();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let x = [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)];
            let m = s.cube_containing(&x, 2).unwrap();
            // x inside its claimed cell
            for (i, &w) in s.dilation().weights().iter().enumerate() {
                let side = s.cell_side(2, w);
                assert!(m[i] as f64 * side <= x[i] + 1e-9);
                assert!(x[i] < (m[i] + 1) as f64 * side + 1e-9);
            }
        }
    }

    #[test]
    fn rho_homogeneity_and_ball_constants() {
        let s = system_12();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let t = rng.random_range(0.1..10.0);
            let tx = dilate_point(t, s.dilation(), &x).unwrap();
            assert!((s.rho(&tx) - t * s.rho(&x)).abs() < 1e-9 * (1.0 + s.rho(&x)));
        }
        let (c_in, c_out) = s.ball_constants();
        assert!(c_in <= c_out && c_out / c_in <= 2.0 + 1e-12);
        // inner ρ-ball fits: every x with ρ(x − center) < c_in·D^k stays in the cell
        let k = 1;
        let center = s.cell_center(&[0, 0], k);
        let dk = 2f64.powi(k);
        for _ in 0..2000 {
            let r = rng.random_range(0.0..c_in * dk);
            let sgn0: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let sgn1: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let x = [
                center[0] + sgn0 * r.powi(1) * rng.random_range(0.0..1.0),
                center[1] + sgn1 * r.powi(2) * rng.random_range(0.0..1.0),
            ];
            assert_eq!(s.cube_containing(&x, k).unwrap(), vec![0, 0]);
        }
        // outer ρ-ball covers: every cell point is within ρ-distance c_out·D^k of center
        for _ in 0..2000 {
            let x = [
                rng.random_range(0.0..s.cell_side(k, 1)),
                rng.random_range(0.0..s.cell_side(k, 2)),
            ];
            let diff: Vec<f64> = x.iter().zip(&center).map(|(a, b)| a - b).collect();
            assert!(s.rho(&diff) <= c_out * dk + 1e-9);
        }
    }

    fn random_grid_1d(rng: &mut ChaCha8Rng, n: usize, h: f64) -> GridFunction {
        GridFunction::from_fn(vec![0.0], h, vec![n], |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .unwrap()
    }

    #[test]
    fn expectation_constant_and_indicator() {
        let s = system_1d();
        let c = Complex64::new(2.5, -1.0);
        let f = GridFunction::from_fn(vec![0.0], 0.5, vec![32], |_| c).unwrap();
        for k in 0..4 {
            let e = conditional_expectation(&f, k, &s).unwrap();
            assert!(e.values().iter().all(|v| (v - c).norm() < 1e-12));
        }
        // indicator of cell [2, 4) at level 1
        let ind = GridFunction::from_fn(vec![0.0], 0.5, vec![32], |x| {
            if (2.0..4.0).contains(&x[0]) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let e = conditional_expectation(&ind, 1, &s).unwrap();
        for (a, b) in e.values().iter().zip(ind.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn expectation_tower_idempotent_contractive() {
        let s = system_1d();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let f = random_grid_1d(&mut rng, 64, 0.25);
            let e1 = conditional_expectation(&f, 1, &s).unwrap();
            let e2_of_e1 = conditional_expectation(&e1, 2, &s).unwrap();
            let e2 = conditional_expectation(&f, 2, &s).unwrap();
            for (a, b) in e2_of_e1.values().iter().zip(e2.values()) {
                assert!((a - b).norm() < 1e-12);
            }
            let ee = conditional_expectation(&e1, 1, &s).unwrap();
            for (a, b) in ee.values().iter().zip(e1.values()) {
                assert!((a - b).norm() < 1e-12);
            }
            for p in [1.0, 2.0, f64::INFINITY] {
                assert!(e1.lp_norm(p).unwrap() <= f.lp_norm(p).unwrap() + 1e-12);
            }
            // mean preservation over the whole (resolvable) box
            let diff = (e1.integral() - f.integral()).norm();
            assert!(diff < 1e-10);
        }
    }

    #[test]
    fn expectation_resolution_rejected() {
        let s = system_1d();
        let f = GridFunction::from_fn(vec![0.0], 0.3, vec![20], |x| Complex64::new(x[0], 0.0))
            .unwrap();
        assert!(matches!(
            conditional_expectation(&f, 1, &s),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn oscillation_probe_cases() {
        let s = system_1d();
        // cell-measurable at the coarsest level → ratio 0
        let f = GridFunction::from_fn(vec![0.0], 0.5, vec![32], |_| Complex64::new(1.5, 0.0))
            .unwrap();
        let r = martingale_oscillation_probe(&f, &s, &[0, 1, 2, 3], 2.0, 2, SearchStrategy::Exhaustive)
            .unwrap();
        assert_eq!(r.best_value, 0.0);
        assert_eq!(r.ratio, 0.0);

        // spike: probe equals the exhaustive oracle by construction; check
        // greedy is close to exhaustive
        let mut spike = GridFunction::zeros(vec![0.0], 0.5, vec![32]).unwrap();
        spike.values_mut()[7] = Complex64::new(1.0, 0.0);
        let levels = [0, 1, 2, 3, 4];
        let exact =
            martingale_oscillation_probe(&spike, &s, &levels, 2.0, 3, SearchStrategy::Exhaustive)
                .unwrap();
        let greedy =
            martingale_oscillation_probe(&spike, &s, &levels, 2.0, 3, SearchStrategy::Greedy)
                .unwrap();
        assert!(exact.best_value > 0.0);
        assert!(greedy.best_value <= exact.best_value + 1e-12);
        assert!(greedy.best_value >= 0.7 * exact.best_value);

        // translation by a coarsest-cell period leaves the ratio unchanged
        let period = s.cell_side(4, 1); // 16 = 32·0.5
        let shifted = GridFunction::from_fn(vec![period], 0.5, vec![32], |x| {
            if (x[0] - period - 3.5).abs() < 1e-9 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let moved =
            martingale_oscillation_probe(&shifted, &s, &levels, 2.0, 3, SearchStrategy::Exhaustive)
                .unwrap();
        assert!((moved.best_value - exact.best_value).abs() < 1e-10);
    }

    fn hat_mollifier() -> GridFunction {
        // triangular hat on [−1, 1], ∫ = 1 by the trapezoid-exact Riemann sum
        let n = 41;
        let h = 2.0 / (n - 1) as f64;
        let mut phi = GridFunction::from_fn(vec![-1.0], h, vec![n], |x| {
            Complex64::new((1.0 - x[0].abs()).max(0.0), 0.0)
        })
        .unwrap();
        let integral = phi.integral().re;
        for v in phi.values_mut() {
            *v /= integral;
        }
        phi
    }

    #[test]
    fn square_function_constant_is_zero() {
        let s = system_1d();
        let phi = hat_mollifier();
        // constant on a wide grid; support check needs interior support, so
        // use a constant-on-support function instead: f ≡ c everywhere makes
        // the support run to the box edge, so test through the plateau region
        let f = GridFunction::from_fn(vec![-16.0], 0.5, vec![129], |x| {
            if x[0].abs() <= 8.0 {
                Complex64::new(2.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let sf = approx_square_function(&f, &phi, &s, &[0, 1, 2]).unwrap();
        // in the deep interior both φ_{D^k}∗f and 𝔼_k f equal the constant
        for idx in 0..sf.len() {
            let x = sf.node(idx);
            if x[0].abs() <= 2.0 {
                assert!(sf.values()[idx].norm() < 1e-10, "x = {}", x[0]);
            }
        }
    }

    #[test]
    fn mollified_mass_preserved() {
        let s = system_1d();
        let phi = hat_mollifier();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = GridFunction::from_fn(vec![-16.0], 0.5, vec![129], |x| {
            if x[0].abs() <= 6.0 {
                Complex64::new(rng.random_range(-1.0..1.0), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        for k in [0, 1, 2] {
            let conv = mollified(&f, &phi, &s, k).unwrap();
            assert!(
                (conv.integral() - f.integral()).norm() < 1e-8,
                "level {}: {} vs {}",
                k,
                conv.integral(),
                f.integral()
            );
        }
    }

    #[test]
    fn mollified_support_escape_rejected() {
        let s = system_1d();
        let phi = hat_mollifier();
        let f = GridFunction::from_fn(vec![-2.0], 0.5, vec![9], |x| {
            Complex64::new(if x[0].abs() < 1.6 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        // level 3 dilates φ's support to [−8, 8], far beyond the box
        assert!(matches!(
            mollified(&f, &phi, &s, 3),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn square_function_boundedness_probe() {
        let s = system_1d();
        let phi = hat_mollifier();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let f = GridFunction::from_fn(vec![-32.0], 0.5, vec![257], |x| {
            if x[0].abs() <= 4.0 {
                Complex64::new(rng.random_range(-1.0..1.0), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let short = approx_square_function(&f, &phi, &s, &[0, 1]).unwrap();
        let long = approx_square_function(&f, &phi, &s, &[0, 1, 2, 3]).unwrap();
        let fp = f.lp_norm(2.0).unwrap();
        let r_short = short.lp_norm(2.0).unwrap() / fp;
        let r_long = long.lp_norm(2.0).unwrap() / fp;
        // doubling the level range must not blow the ratio up
        assert!(r_long <= 4.0 * r_short.max(0.5), "{} vs {}", r_long, r_short);
    }

    #[test]
    fn measure_dilate_laws() {
        let a = DilationMatrix::from_weights(vec![1, 2]).unwrap();
        let sigma = DiscreteMeasure::new(
            vec![vec![1.0, 2.0], vec![-0.5, 0.25], vec![0.0, 0.0]],
            vec![
                Complex64::new(1.0, 0.5),
                Complex64::new(-2.0, 0.0),
                Complex64::new(0.0, 1.0),
            ],
        )
        .unwrap();
        let id = measure_dilate(&sigma, 1.0, &a).unwrap();
        assert_eq!(id, sigma);
        let d3 = measure_dilate(&sigma, 3.0, &a).unwrap();
        assert_eq!(d3.total_mass(), sigma.total_mass());
        assert!((d3.total_variation() - sigma.total_variation()).abs() < 1e-12);
        assert!((d3.points()[0][0] - 3.0).abs() < 1e-12);
        assert!((d3.points()[0][1] - 18.0).abs() < 1e-12);
        // group law
        let st = measure_dilate(&sigma, 6.0, &a).unwrap();
        let s_then_t = measure_dilate(&measure_dilate(&sigma, 2.0, &a).unwrap(), 3.0, &a).unwrap();
        for (p, q) in st.points().iter().zip(s_then_t.points()) {
            for (u, v) in p.iter().zip(q) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn low_high_split_dirac() {
        let phi = hat_mollifier();
        let sigma = DiscreteMeasure::dirac(1);
        let split = low_high_split(&sigma, &phi).unwrap();
        // low part = φ
        for idx in 0..phi.len() {
            let x = phi.node(idx);
            let v = split.low.interp(&x);
            assert!((v - phi.values()[idx]).norm() < 1e-10);
        }
        assert!(split.high_mean().norm() < 1e-10);
        assert!(split.high_fourier(&[0.0]).norm() < 1e-10);
    }

    #[test]
    fn low_high_split_general() {
        let phi = hat_mollifier();
        let sigma = DiscreteMeasure::new(
            vec![vec![0.5], vec![-1.25]],
            vec![Complex64::new(2.0, -1.0), Complex64::new(0.5, 0.5)],
        )
        .unwrap();
        let split = low_high_split(&sigma, &phi).unwrap();
        // low + high = σ as distributions: total masses match
        assert!(
            (split.low.integral() - sigma.total_mass()).norm() < 1e-9,
            "{} vs {}",
            split.low.integral(),
            sigma.total_mass()
        );
        assert!(split.high_mean().norm() < 1e-9);
        assert!(split.high_fourier(&[0.0]).norm() < 1e-9);
    }

    #[test]
    fn telescoping_identity() {
        use crate::radon::{discrete_radon_direct, restrict_to_box};
        let kern = make_hilbert_kernel();
        let body = ConvexBody::max_ball(1);
        let g = MultiIndexSet::one_dim(&[1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let b = IntBox::centered(1, 4);
            let mut f = LatticeFunction::zeros(b);
            for v in f.values_mut() {
                *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let pieces =
                telescoping_pieces(&f, &kern, &body, &g, 2, 0, 4, 1 << 22).unwrap();
            assert_eq!(pieces.len(), 4);
            let mut sum = LatticeFunction::zeros(pieces[0].bounds().clone());
            for p in &pieces {
                sum = sum.add(p).unwrap();
            }
            let hi = discrete_radon_direct(&f, &kern, &body, &g, 16.0, 1 << 22).unwrap();
            let lo = discrete_radon_direct(&f, &kern, &body, &g, 1.0, 1 << 22).unwrap();
            // H_{D^4} − H_{D^0}; both live inside the shared box
            let hi_e = restrict_to_box(&hi, sum.bounds()).unwrap();
            let lo_e = restrict_to_box(&lo, sum.bounds()).unwrap();
            let want = hi_e.add(&lo_e.scaled(Complex64::new(-1.0, 0.0))).unwrap();
            assert!(sum.max_abs_diff(&want) <= 1e-12, "err {}", sum.max_abs_diff(&want));
        }
    }

    #[test]
    fn telescoping_empty_annulus() {
        let kern = make_hilbert_kernel();
        // Euclidean unit ball in 1D: Ω_t ∩ ℤ \ {0} empty for t ≤ 1
        let body = ConvexBody::euclidean_ball(1);
        let g = MultiIndexSet::one_dim(&[1]).unwrap();
        let f = LatticeFunction::delta(IntBox::centered(1, 1), &[0]).unwrap();
        let pieces = telescoping_pieces(&f, &kern, &body, &g, 2, -3, -1, 1 << 20).unwrap();
        for p in &pieces {
            assert!(p.values().iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn continuous_piece_kills_constants() {
        let kern = make_hilbert_kernel();
        let body = ConvexBody::max_ball(1);
        let g = MultiIndexSet::one_dim(&[1]).unwrap();
        let f = GridFunction::from_fn(vec![-8.0], 0.25, vec![65], |_| Complex64::new(4.0, 1.0))
            .unwrap();
        let piece = continuous_annulus_piece(&f, &kern, &body, &g, 1.0, 2.0, 9).unwrap();
        let mid = piece.flat_index(&[32]);
        assert!(piece.values()[mid].norm() < 1e-12);
    }
}
