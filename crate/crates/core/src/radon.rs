//! Truncated singular Radon transforms: the discrete operator (direct and
//! FFT-accelerated), the continuous principal-value operator, general
//! polynomial mappings with their canonical decomposition, and incremental
//! computation of whole truncation families.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::kernels::CZKernel;
use crate::lattice::{
    canonical_map_int, canonical_map_real, lattice_points_in_annulus,
    lattice_points_in_dilate, ConvexBody, GridFunction, IntBox, LatticeFunction,
    MultiIndexSet,
};
use crate::seminorms::TruncationGrid;

/// Above this term count the direct path switches to compensated summation.
const COMPENSATED_THRESHOLD: u128 = 1 << 24;

/// Componentwise min/max of a set of image points; `None` for an empty set.
fn image_bounds(images: &[Vec<i64>]) -> Option<(Vec<i64>, Vec<i64>)> {
    let first = images.first()?;
    let mut lo = first.clone();
    let mut hi = first.clone();
    for z in images.iter().skip(1) {
        for (i, &c) in z.iter().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    Some((lo, hi))
}

/// Shared direct-summation core: Σ_y f(· − image(y))·K(y), summed over the
/// given lattice points in their given (lexicographic) order. The output box
/// is the input box enlarged by the exact image extent.
fn radon_direct_core(
    f: &LatticeFunction,
    kernel: &CZKernel,
    points: &[Vec<i64>],
    images: &[Vec<i64>],
) -> Result<LatticeFunction> {
    let d = f.bounds().dim();
    let (lo_img, hi_img) = match image_bounds(images) {
        Some(b) => b,
        None => return Ok(LatticeFunction::zeros(f.bounds().clone())),
    };
    if lo_img.len() != d {
        return Err(Error::Domain(format!(
            "image dimension {} does not match function dimension {}",
            lo_img.len(),
            d
        )));
    }
    let out_box = f.bounds().expanded(&lo_img, &hi_img)?;
    let mut out = LatticeFunction::zeros(out_box);
    let terms = points.len() as u128 * f.bounds().volume() as u128;
    let compensated = terms > COMPENSATED_THRESHOLD;
    let mut comp = if compensated {
        vec![Complex64::new(0.0, 0.0); out.bounds().volume()]
    } else {
        Vec::new()
    };
    let in_box = f.bounds().clone();
    let out_box = out.bounds().clone();
    for (y, z) in points.iter().zip(images) {
        let yf: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let kv = kernel.eval(&yf);
        if kv == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut shifted = vec![0i64; d];
        for (idx, fv) in f.values().iter().enumerate() {
            if *fv == Complex64::new(0.0, 0.0) {
                continue;
            }
            let x_in = in_box.point_at(idx);
            for i in 0..d {
                shifted[i] = x_in[i] + z[i];
            }
            let oi = out_box
                .index_of(&shifted)
                .expect("output box contains input box + image");
            let term = fv * kv;
            if compensated {
                let t1 = term - comp[oi];
                let t2 = out.values()[oi] + t1;
                comp[oi] = (t2 - out.values()[oi]) - t1;
                out.values_mut()[oi] = t2;
            } else {
                out.values_mut()[oi] += term;
            }
        }
    }
    Ok(out)
}

/// Discrete truncated Radon operator
/// H_t f(x) = Σ_{y ∈ Ω_t ∩ ℤ^k \ {0}} f(x − (y)^Γ)·K(y),
/// summed in lexicographic order of y. The output box is the input box
/// enlarged by the exact image extent of Ω_t under the canonical map.
pub fn discrete_radon_direct(
    f: &LatticeFunction,
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    t: f64,
    max_cells: usize,
) -> Result<LatticeFunction> {
    let points = lattice_points_in_dilate(body, t, max_cells)?;
    let images: Result<Vec<Vec<i64>>> =
        points.iter().map(|y| canonical_map_int(y, gamma)).collect();
    radon_direct_core(f, kernel, &points, &images?)
}

/// Restricts a lattice function back to a (sub)box, dropping outside values.
pub fn restrict_to_box(f: &LatticeFunction, target: &IntBox) -> Result<LatticeFunction> {
    if target.dim() != f.bounds().dim() {
        return Err(Error::Domain("restriction box has wrong dimension".into()));
    }
    let mut out = LatticeFunction::zeros(target.clone());
    for idx in 0..target.volume() {
        let p = target.point_at(idx);
        out.values_mut()[idx] = f.get(&p);
    }
    Ok(out)
}

/// Everything the FFT path computes: the operator output plus the periodic
/// arrays and pushforward kernel, so that Fourier-side identities can be
/// checked on the exact data used.
#[derive(Debug, Clone)]
pub struct FftRadon {
    /// Operator output on the enlarged box (identical box to the direct path).
    pub output: LatticeFunction,
    /// Pushforward kernel g(z) = Σ_{(y)^Γ = z} K(y) on its own box.
    pub pushforward: LatticeFunction,
    /// Side lengths of the periodic box (input extent + padding per axis).
    pub periodic_dims: Vec<usize>,
    /// f embedded in the periodic box, index 0 ↔ input box corner.
    pub periodic_input: Vec<Complex64>,
    /// Circular convolution result on the periodic box.
    pub periodic_output: Vec<Complex64>,
}

/// In-place multidimensional FFT on row-major data. `forward` selects the
/// e^{−2πi} transform; the inverse direction is left unnormalized.
pub(crate) fn fftn(data: &mut [Complex64], dims: &[usize], forward: bool) {
    let mut planner = FftPlanner::new();
    let total: usize = dims.iter().product();
    assert_eq!(data.len(), total);
    for (axis, &n) in dims.iter().enumerate() {
        if n == 1 {
            continue;
        }
        let fft = if forward {
            planner.plan_fft_forward(n)
        } else {
            planner.plan_fft_inverse(n)
        };
        let stride: usize = dims[axis + 1..].iter().product();
        let block = n * stride;
        let lines = total / n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for line in 0..lines {
            let outer = line / stride;
            let inner = line % stride;
            let base = outer * block + inner;
            for j in 0..n {
                buf[j] = data[base + j * stride];
            }
            fft.process(&mut buf);
            for j in 0..n {
                data[base + j * stride] = buf[j];
            }
        }
    }
}

/// FFT-accelerated discrete Radon transform. Identical to
/// [`discrete_radon_direct`] up to roundoff; rejects insufficient padding
/// before computing anything, so aliasing can never happen silently.
pub fn discrete_radon_fft(
    f: &LatticeFunction,
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    t: f64,
    padding: usize,
    max_cells: usize,
) -> Result<FftRadon> {
    let d = f.bounds().dim();
    let points = lattice_points_in_dilate(body, t, max_cells)?;
    let images: Result<Vec<Vec<i64>>> =
        points.iter().map(|y| canonical_map_int(y, gamma)).collect();
    let images = images?;
    let (lo_img, hi_img) = match image_bounds(&images) {
        Some(b) => b,
        None => {
            return Ok(FftRadon {
                output: LatticeFunction::zeros(f.bounds().clone()),
                pushforward: LatticeFunction::zeros(IntBox::centered(d, 0)),
                periodic_dims: f.bounds().extents(),
                periodic_input: f.values().to_vec(),
                periodic_output: f.values().iter().map(|_| Complex64::new(0.0, 0.0)).collect(),
            })
        }
    };
    if lo_img.len() != d {
        return Err(Error::Domain(format!(
            "image dimension {} does not match function dimension {}",
            lo_img.len(),
            d
        )));
    }
    for i in 0..d {
        let diameter = (hi_img[i] - lo_img[i]) as usize;
        if padding < diameter {
            return Err(Error::Precondition(format!(
                "padding {} is below the image diameter {} on axis {}",
                padding, diameter, i
            )));
        }
    }
    // pushforward kernel on its exact box
    let g_box = IntBox::new(lo_img.clone(), hi_img.clone())?;
    let mut g = LatticeFunction::zeros(g_box);
    for (y, z) in points.iter().zip(&images) {
        let yf: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let idx = g.bounds().index_of(z).expect("image inside its bounds");
        g.values_mut()[idx] += kernel.eval(&yf);
    }
    // periodic embedding
    let in_box = f.bounds().clone();
    let dims: Vec<usize> = in_box.extents().iter().map(|&e| e + padding).collect();
    let total: usize = dims.iter().product();
    let flat = |m: &[usize]| -> usize {
        let mut idx = 0;
        for (i, &mi) in m.iter().enumerate() {
            idx = idx * dims[i] + mi;
        }
        idx
    };
    let mut fp = vec![Complex64::new(0.0, 0.0); total];
    for idx in 0..in_box.volume() {
        let p = in_box.point_at(idx);
        let m: Vec<usize> = p
            .iter()
            .zip(in_box.lo())
            .map(|(&c, &l)| (c - l) as usize)
            .collect();
        fp[flat(&m)] = f.values()[idx];
    }
    let mut gp = vec![Complex64::new(0.0, 0.0); total];
    for idx in 0..g.bounds().volume() {
        let z = g.bounds().point_at(idx);
        let m: Vec<usize> = z
            .iter()
            .enumerate()
            .map(|(i, &c)| c.rem_euclid(dims[i] as i64) as usize)
            .collect();
        gp[flat(&m)] += g.values()[idx];
    }
    // circular convolution via forward transform, product, inverse transform
    let mut fa = fp.clone();
    let mut ga = gp;
    fftn(&mut fa, &dims, true);
    fftn(&mut ga, &dims, true);
    for (a, b) in fa.iter_mut().zip(&ga) {
        *a *= b;
    }
    fftn(&mut fa, &dims, false);
    let scale = 1.0 / total as f64;
    for a in fa.iter_mut() {
        *a *= scale;
    }
    // read off the enlarged box
    let out_box = in_box.expanded(&lo_img, &hi_img)?;
    let mut out = LatticeFunction::zeros(out_box.clone());
    for idx in 0..out_box.volume() {
        let x = out_box.point_at(idx);
        let m: Vec<usize> = x
            .iter()
            .zip(in_box.lo())
            .enumerate()
            .map(|(i, (&c, &l))| (c - l).rem_euclid(dims[i] as i64) as usize)
            .collect();
        out.values_mut()[idx] = fa[flat(&m)];
    }
    Ok(FftRadon {
        output: out,
        pushforward: g,
        periodic_dims: dims,
        periodic_input: fp,
        periodic_output: fa,
    })
}

/// Continuous truncated Radon transform
/// 𝓗_t f(x) = p.v.∫_{Ω_t} f(x − (y)^Γ)K(y) dy
/// by symmetric-pair quadrature on Ω_t \ Ω_ε. Returns the result together
/// with an error estimate combining the inner-region cancellation bound and a
/// two-level quadrature comparison. Limited to k ≤ 2 and |Γ| ≤ 3.
pub fn continuous_radon_quadrature(
    f: &GridFunction,
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    t: f64,
    eps: f64,
    quad_level: u32,
) -> Result<(GridFunction, f64)> {
    let k = body.dim();
    if k > 2 {
        return Err(Error::Domain("continuous operator supports k ≤ 2".into()));
    }
    if gamma.len() > 3 {
        return Err(Error::Domain("continuous operator supports |Γ| ≤ 3".into()));
    }
    if gamma.ambient_dim() != k {
        return Err(Error::Domain("Γ ambient dimension must equal k".into()));
    }
    if f.dim() != gamma.len() {
        return Err(Error::Domain("f dimension must equal |Γ|".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Domain("t must be positive".into()));
    }
    if !(eps > 0.0 && eps < body.inner_radius() * t) {
        return Err(Error::Domain(format!(
            "inner cutoff ε = {} must lie in (0, c_Ω·t) = (0, {})",
            eps,
            body.inner_radius() * t
        )));
    }
    // local variation of f per unit distance, from neighboring grid nodes
    let lip = grid_lipschitz(f);
    if !lip.is_finite() {
        return Err(Error::Resolution("grid values are not finite".into()));
    }
    let eval = |level: u32| -> GridFunction {
        let n = 1usize << level;
        let h = 2.0 * t / n as f64;
        let cell = h.powi(k as i32);
        let mut out = f.clone();
        for v in out.values_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        let mut y = vec![0.0f64; k];
        let mut m = vec![0usize; k];
        loop {
            for i in 0..k {
                y[i] = -t + (m[i] as f64 + 0.5) * h;
            }
            let lex_positive = y.iter().find(|&&c| c != 0.0).map_or(false, |&c| c > 0.0);
            if lex_positive {
                let rho: f64 = y.iter().map(|c| c * c).sum::<f64>().sqrt();
                // both members of the pair share |y|; skip the inner region
                let inside = body.contains_in_dilate(&y, t) && rho >= eps;
                if inside {
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
            }
            // odometer over the quadrature grid
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
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
    };
    let coarse = eval(quad_level.saturating_sub(1).max(3));
    let fine = eval(quad_level.max(4));
    let mut quad_err: f64 = 0.0;
    for (a, b) in fine.values().iter().zip(coarse.values()) {
        quad_err = quad_err.max((a - b).norm());
    }
    // inner region: paired nodes cancel K's odd part against f's constancy,
    // leaving at most Lip(f)·diam((Ω_ε)^Γ)·∫_{Ω_ε}|K| per pair
    let min_w = gamma.min_weight();
    let inner_err = 2.0
        * lip
        * (gamma.len() as f64)
        * eps.powi(min_w as i32)
        * (surface_constant(k))
        * (1.0 + (body.inner_radius() * t / eps).ln());
    let total_err = quad_err + inner_err;
    let scale = 1.0 + sup_abs(f.values());
    if inner_err > 0.5 * scale {
        return Err(Error::Resolution(format!(
            "grid too coarse: inner-region error estimate {} exceeds tolerance {}",
            inner_err,
            0.5 * scale
        )));
    }
    Ok((fine, total_err))
}

fn sup_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn surface_constant(k: usize) -> f64 {
    match k {
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI,
    }
}

/// Max difference quotient between neighboring grid nodes.
fn grid_lipschitz(f: &GridFunction) -> f64 {
    let d = f.dim();
    let shape = f.shape().to_vec();
    let mut lip: f64 = 0.0;
    for idx in 0..f.len() {
        let m = f.multi_index(idx);
        for axis in 0..d {
            if m[axis] + 1 < shape[axis] {
                let mut m2 = m.clone();
                m2[axis] += 1;
                let j = f.flat_index(&m2);
                lip = lip.max((f.values()[j] - f.values()[idx]).norm() / f.spacing());
            }
        }
    }
    lip
}

/// A polynomial in k integer variables with integer coefficients, stored as
/// (coefficient, exponent vector) terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    arg_dim: usize,
    terms: Vec<(i64, Vec<u32>)>,
}

impl Polynomial {
    /// Builds a polynomial; duplicate exponent vectors are merged and zero
    /// coefficients dropped.
    pub fn new(arg_dim: usize, terms: Vec<(i64, Vec<u32>)>) -> Result<Self> {
        if arg_dim == 0 {
            return Err(Error::Domain("argument dimension must be positive".into()));
        }
        let mut merged: Vec<(Vec<u32>, i64)> = Vec::new();
        for (c, e) in terms {
            if e.len() != arg_dim {
                return Err(Error::Domain(format!(
                    "exponent vector {:?} does not have length {}",
                    e, arg_dim
                )));
            }
            match merged.iter_mut().find(|(me, _)| *me == e) {
                Some((_, mc)) => {
                    *mc = mc
                        .checked_add(c)
                        .ok_or_else(|| Error::Overflow("coefficient overflow".into()))?
                }
                None => merged.push((e, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        merged.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self {
            arg_dim,
            terms: merged.into_iter().map(|(e, c)| (c, e)).collect(),
        })
    }

    pub fn arg_dim(&self) -> usize {
        self.arg_dim
    }

    pub fn terms(&self) -> &[(i64, Vec<u32>)] {
        &self.terms
    }

    /// True when the constant term (all-zero exponent) is absent.
    pub fn vanishes_at_zero(&self) -> bool {
        self.terms.iter().all(|(_, e)| e.iter().any(|&x| x != 0))
    }

    /// Exact integer evaluation with overflow checking.
    pub fn eval_int(&self, y: &[i64]) -> Result<i64> {
        if y.len() != self.arg_dim {
            return Err(Error::Domain("argument has wrong dimension".into()));
        }
        let mut acc: i64 = 0;
        for (c, e) in &self.terms {
            let mut mono: i64 = 1;
            for (&yi, &ei) in y.iter().zip(e) {
                for _ in 0..ei {
                    mono = mono
                        .checked_mul(yi)
                        .ok_or_else(|| Error::Overflow("monomial overflow".into()))?;
                }
            }
            let term = c
                .checked_mul(mono)
                .ok_or_else(|| Error::Overflow("term overflow".into()))?;
            acc = acc
                .checked_add(term)
                .ok_or_else(|| Error::Overflow("polynomial sum overflow".into()))?;
        }
        Ok(acc)
    }
}

/// Polynomial mapping 𝓟 = (P₁, …, P_d): ℤ^k → ℤ^d with P_j(0) = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMap {
    arg_dim: usize,
    components: Vec<Polynomial>,
}

impl PolyMap {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let arg_dim = components
            .first()
            .ok_or_else(|| Error::Domain("mapping needs at least one component".into()))?
            .arg_dim();
        for p in &components {
            if p.arg_dim() != arg_dim {
                return Err(Error::Domain("components disagree on argument dimension".into()));
            }
            if !p.vanishes_at_zero() {
                return Err(Error::Domain(
                    "polynomial mapping must satisfy P_j(0) = 0".into(),
                ));
            }
        }
        Ok(Self { arg_dim, components })
    }

    /// The canonical map of Γ as a polynomial mapping.
    pub fn canonical(gamma: &MultiIndexSet) -> Self {
        let components = gamma
            .exponents()
            .iter()
            .map(|e| Polynomial::new(gamma.ambient_dim(), vec![(1, e.clone())]).expect("valid"))
            .collect();
        Self {
            arg_dim: gamma.ambient_dim(),
            components,
        }
    }

    pub fn arg_dim(&self) -> usize {
        self.arg_dim
    }

    pub fn out_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn eval(&self, y: &[i64]) -> Result<Vec<i64>> {
        self.components.iter().map(|p| p.eval_int(y)).collect()
    }
}

/// General-mapping truncated Radon operator
/// H_t^𝓟 f(x) = Σ_{y ∈ Ω_t ∩ ℤ^k \ {0}} f(x − 𝓟(y))K(y).
pub fn radon_general_poly(
    f: &LatticeFunction,
    kernel: &CZKernel,
    body: &ConvexBody,
    mapping: &PolyMap,
    t: f64,
    max_cells: usize,
) -> Result<LatticeFunction> {
    if body.dim() != mapping.arg_dim() {
        return Err(Error::Domain("body dimension must equal mapping arity".into()));
    }
    let points = lattice_points_in_dilate(body, t, max_cells)?;
    let images: Result<Vec<Vec<i64>>> = points.iter().map(|y| mapping.eval(y)).collect();
    radon_direct_core(f, kernel, &points, &images?)
}

/// Canonical decomposition 𝓟(y) = C·(y)^Γ: Γ is exactly the set of monomials
/// appearing with a nonzero coefficient in some component, C the integer
/// coefficient matrix (rows = components, columns = Γ in lexicographic
/// order). The identity is re-verified by exact evaluation on |y|_∞ ≤ 2.
pub fn canonical_decomposition(mapping: &PolyMap) -> Result<(MultiIndexSet, Vec<Vec<i64>>)> {
    let k = mapping.arg_dim();
    let mut monomials: Vec<Vec<u32>> = Vec::new();
    for p in mapping.components() {
        for (_, e) in p.terms() {
            if !monomials.contains(e) {
                monomials.push(e.clone());
            }
        }
    }
    monomials.sort();
    if monomials.is_empty() {
        return Err(Error::Domain(
            "zero mapping has no canonical decomposition".into(),
        ));
    }
    let gamma = MultiIndexSet::new(k, monomials.clone())?;
    let mut c = vec![vec![0i64; monomials.len()]; mapping.out_dim()];
    for (row, p) in mapping.components().iter().enumerate() {
        for (coeff, e) in p.terms() {
            let col = monomials.iter().position(|m| m == e).expect("collected above");
            c[row][col] = *coeff;
        }
    }
    // verification sweep on the deterministic test set |y|_∞ ≤ 2
    let mut y = vec![-2i64; k];
    loop {
        let direct = mapping.eval(&y)?;
        let z = canonical_map_int(&y, &gamma)?;
        for (row, want) in direct.iter().enumerate() {
            let got: i64 = c[row]
                .iter()
                .zip(&z)
                .map(|(&ci, &zi)| ci * zi)
                .sum();
            if got != *want {
                return Err(Error::Precondition(format!(
                    "decomposition mismatch at y = {:?}: {} vs {}",
                    y, got, want
                )));
            }
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok((gamma, c));
            }
            i -= 1;
            if y[i] < 2 {
                y[i] += 1;
                for yj in y.iter_mut().skip(i + 1) {
                    *yj = -2;
                }
                break;
            }
        }
    }
}

/// All truncations {H_t f : t ∈ grid}, computed in one pass: consecutive
/// members differ by the annulus sum over (Ω_{t_{i+1}} \ Ω_{t_i}) ∩ ℤ^k.
/// Every member lives on the shared box sized for t_max.
pub fn radon_family(
    f: &LatticeFunction,
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    grid: &TruncationGrid,
    max_cells: usize,
) -> Result<Vec<LatticeFunction>> {
    let times = grid.times();
    let t_max = *times.last().ok_or_else(|| Error::Domain("empty grid".into()))?;
    let all_points = lattice_points_in_dilate(body, t_max, max_cells)?;
    let all_images: Result<Vec<Vec<i64>>> =
        all_points.iter().map(|y| canonical_map_int(y, gamma)).collect();
    let all_images = all_images?;
    let d = f.bounds().dim();
    let (lo_img, hi_img) = image_bounds(&all_images)
        .unwrap_or_else(|| (vec![0; d], vec![0; d]));
    let out_box = f.bounds().expanded(&lo_img, &hi_img)?;
    let mut acc = LatticeFunction::zeros(out_box.clone());
    let mut family = Vec::with_capacity(times.len());
    let mut prev_t = 0.0f64;
    for &t in times {
        let annulus = lattice_points_in_annulus(body, prev_t, t, max_cells)?;
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
                acc.values_mut()[oi] += fv * kv;
            }
        }
        family.push(acc.clone());
        prev_t = t;
    }
    Ok(family)
}
