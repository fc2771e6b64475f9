//! Multi-index sets, the canonical polynomial map, anisotropic dilations,
//! convex truncation bodies and function containers on the lattice and on grids.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Finite set of multi-indices `γ ∈ ℕ₀^k \ {0}`, kept in strictly increasing
/// lexicographic order. Coordinates of the target space ℤ^Γ / ℝ^Γ are labelled
/// by its elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    k: usize,
    exponents: Vec<Vec<u32>>,
}

impl MultiIndexSet {
    pub fn new(k: usize, exponents: Vec<Vec<u32>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("ambient dimension k must be positive".into()));
        }
        if exponents.is_empty() {
            return Err(Error::Domain("multi-index set must be nonempty".into()));
        }
        for gamma in &exponents {
            if gamma.len() != k {
                return Err(Error::Domain(format!(
                    "multi-index {:?} does not have length {}",
                    gamma, k
                )));
            }
            if gamma.iter().all(|&e| e == 0) {
                return Err(Error::Domain("zero multi-index is not allowed".into()));
            }
        }
        for w in exponents.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Domain(
                    "multi-indices must be strictly increasing in lexicographic order".into(),
                ));
            }
        }
        Ok(Self { k, exponents })
    }

    /// Convenience constructor for k = 1: each exponent is a single degree.
    pub fn one_dim(degrees: &[u32]) -> Result<Self> {
        Self::new(1, degrees.iter().map(|&d| vec![d]).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.k
    }

    /// Number of multi-indices, i.e. the dimension of ℝ^Γ.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Weights |γ| = γ₁ + … + γ_k, one per multi-index.
    pub fn weights(&self) -> Vec<u32> {
        self.exponents.iter().map(|g| g.iter().sum()).collect()
    }

    pub fn min_weight(&self) -> u32 {
        self.weights().into_iter().min().unwrap()
    }

    pub fn max_weight(&self) -> u32 {
        self.weights().into_iter().max().unwrap()
    }

    /// tr(A) = Σ_γ |γ|, the homogeneous dimension of the dilation group.
    pub fn total_weight(&self) -> u32 {
        self.weights().into_iter().sum()
    }

    pub fn dilation(&self) -> DilationMatrix {
        DilationMatrix {
            weights: self.weights(),
        }
    }
}

/// Diagonal dilation matrix A with entry |γ| at coordinate γ; `t^A` scales
/// coordinate γ by `t^{|γ|}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilationMatrix {
    weights: Vec<u32>,
}

impl DilationMatrix {
    pub fn from_weights(weights: Vec<u32>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| w == 0) {
            return Err(Error::Domain("dilation weights must be positive".into()));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn trace(&self) -> u32 {
        self.weights.iter().sum()
    }
}

/// Applies `t^A` to a point of ℝ^Γ: coordinate γ is multiplied by `t^{|γ|}`.
pub fn dilate_point(t: f64, a: &DilationMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("dilation parameter t = {} must be positive", t)));
    }
    if v.len() != a.dim() {
        return Err(Error::Domain("point dimension does not match dilation matrix".into()));
    }
    Ok(v.iter()
        .zip(a.weights.iter())
        .map(|(&x, &w)| t.powi(w as i32) * x)
        .collect())
}

/// Shape of a built-in convex truncation body Ω with B(0,c_Ω) ⊆ Ω ⊆ B(0,1).
#[derive(Debug, Clone, PartialEq)]
pub enum BodyShape {
    /// Open Euclidean unit ball {|x|₂ < 1}.
    EuclideanBall,
    /// Open cube {|x|_∞ < 1/√k}, scaled to sit inside the unit ball.
    MaxBall,
    /// Open diagonal ellipsoid {Σ (x_i/w_i)² < 1} with weights in (0,1].
    Ellipsoid(Vec<f64>),
}

/// Bounded convex open 0-symmetric set Ω with B(0, c_Ω) ⊆ Ω ⊆ B(0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    shape: BodyShape,
    dim: usize,
    inner_radius: f64,
}

impl ConvexBody {
    /// Builds a body with an explicit inner radius c_Ω ∈ (0,1). The radius must
    /// not exceed the natural inscribed radius of the shape.
    pub fn new(shape: BodyShape, dim: usize, inner_radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("body dimension must be positive".into()));
        }
        if !(inner_radius > 0.0 && inner_radius < 1.0) {
            return Err(Error::Domain(format!(
                "inner radius c_Ω = {} must lie in (0,1)",
                inner_radius
            )));
        }
        let natural = Self::natural_inner_radius(&shape, dim)?;
        if inner_radius > natural {
            return Err(Error::Domain(format!(
                "inner radius {} exceeds the inscribed radius {} of the shape",
                inner_radius, natural
            )));
        }
        Ok(Self { shape, dim, inner_radius })
    }

    /// Euclidean unit ball with the default inner radius.
    pub fn euclidean_ball(dim: usize) -> Self {
        Self::new(BodyShape::EuclideanBall, dim, 0.999).expect("valid ball")
    }

    /// Cube {|x|_∞ < 1/√k}; for k = 1 this is the interval (−1, 1).
    pub fn max_ball(dim: usize) -> Self {
        let natural = Self::natural_inner_radius(&BodyShape::MaxBall, dim).expect("dim > 0");
        let c = natural.min(0.999);
        Self::new(BodyShape::MaxBall, dim, c).expect("valid cube")
    }

    pub fn ellipsoid(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !(w > 0.0 && w <= 1.0)) {
            return Err(Error::Domain("ellipsoid weights must lie in (0,1]".into()));
        }
        let dim = weights.len();
        let min_w = weights.iter().cloned().fold(f64::INFINITY, f64::min);
        let c = min_w.min(0.999);
        Self::new(BodyShape::Ellipsoid(weights), dim, c)
    }

    fn natural_inner_radius(shape: &BodyShape, dim: usize) -> Result<f64> {
        Ok(match shape {
            BodyShape::EuclideanBall => 1.0,
            BodyShape::MaxBall => 1.0 / (dim as f64).sqrt(),
            BodyShape::Ellipsoid(w) => {
                if w.len() != dim {
                    return Err(Error::Domain("ellipsoid weight count must equal dim".into()));
                }
                w.iter().cloned().fold(f64::INFINITY, f64::min)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn shape(&self) -> &BodyShape {
        &self.shape
    }

    /// Open membership test x ∈ Ω.
    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            BodyShape::EuclideanBall => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
            BodyShape::MaxBall => {
                let s = 1.0 / (self.dim as f64).sqrt();
                x.iter().all(|v| v.abs() < s)
            }
            BodyShape::Ellipsoid(w) => {
                x.iter().zip(w).map(|(v, wi)| (v / wi) * (v / wi)).sum::<f64>() < 1.0
            }
        }
    }

    /// Membership of y in the dilate Ω_t = {x : t⁻¹x ∈ Ω}.
    pub fn contains_in_dilate(&self, y: &[f64], t: f64) -> bool {
        let scaled: Vec<f64> = y.iter().map(|v| v / t).collect();
        self.contains(&scaled)
    }

    /// Checks B(0, c_Ω) ⊆ Ω ⊆ B(0, 1) on `samples` random directions.
    pub fn validate_geometry(&self, samples: usize, seed: u64) -> Result<()> {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let dir = random_direction(&mut rng, self.dim);
            // just inside the inner ball
            let inner: Vec<f64> = dir.iter().map(|d| d * self.inner_radius * (1.0 - 1e-9)).collect();
            if !self.contains(&inner) {
                return Err(Error::Precondition(format!(
                    "inner ball of radius {} escapes the body along {:?}",
                    self.inner_radius, dir
                )));
            }
            // just outside the unit ball
            let outer: Vec<f64> = dir.iter().map(|d| d * (1.0 + 1e-9)).collect();
            if self.contains(&outer) {
                return Err(Error::Precondition(format!(
                    "body exceeds the unit ball along {:?}",
                    dir
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn random_direction<R: rand::Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                // Box-Muller
                let u1: f64 = rng.random::<f64>().max(1e-300);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Exact canonical polynomial map on integer points: coordinate γ of the output
/// is x₁^{γ₁}···x_k^{γ_k}, with overflow detected and reported.
pub fn canonical_map_int(x: &[i64], gamma: &MultiIndexSet) -> Result<Vec<i64>> {
    if x.len() != gamma.ambient_dim() {
        return Err(Error::Domain("point dimension does not match Γ".into()));
    }
    gamma
        .exponents()
        .iter()
        .map(|g| {
            let mut acc: i64 = 1;
            for (xi, &e) in x.iter().zip(g) {
                for _ in 0..e {
                    acc = acc.checked_mul(*xi).ok_or_else(|| {
                        Error::Overflow(format!("monomial {:?}^{:?} overflows i64", x, g))
                    })?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Canonical polynomial map on real points.
pub fn canonical_map_real(x: &[f64], gamma: &MultiIndexSet) -> Vec<f64> {
    debug_assert_eq!(x.len(), gamma.ambient_dim());
    gamma
        .exponents()
        .iter()
        .map(|g| x.iter().zip(g).map(|(xi, &e)| xi.powi(e as i32)).product())
        .collect()
}

/// Enumerates all nonzero integer points of the dilate Ω_t, in lexicographic
/// order. `max_cells` bounds the enumeration box volume.
pub fn lattice_points_in_dilate(
    body: &ConvexBody,
    t: f64,
    max_cells: usize,
) -> Result<Vec<Vec<i64>>> {
    lattice_points_in_annulus(body, 0.0, t, max_cells)
}

/// Nonzero integer points of Ω_{t_hi} \ Ω_{t_lo} (pass `t_lo = 0` for the full
/// dilate), lexicographic order.
pub fn lattice_points_in_annulus(
    body: &ConvexBody,
    t_lo: f64,
    t_hi: f64,
    max_cells: usize,
) -> Result<Vec<Vec<i64>>> {
    if !(t_hi > 0.0) {
        return Err(Error::Domain(format!("dilate parameter t = {} must be positive", t_hi)));
    }
    if t_lo < 0.0 || t_lo >= t_hi {
        if t_lo != 0.0 {
            return Err(Error::Domain("annulus requires 0 <= t_lo < t_hi".into()));
        }
    }
    let k = body.dim();
    let b = t_hi.floor() as i64;
    let side = (2 * b + 1) as u128;
    let volume = side.checked_pow(k as u32).unwrap_or(u128::MAX);
    if volume > max_cells as u128 {
        return Err(Error::Budget(format!(
            "enumeration box volume {} exceeds budget {}",
            volume, max_cells
        )));
    }
    let mut out = Vec::new();
    let mut point = vec![-b; k];
    loop {
        if point.iter().any(|&c| c != 0) {
            let y: Vec<f64> = point.iter().map(|&c| c as f64).collect();
            let in_outer = body.contains_in_dilate(&y, t_hi);
            let in_inner = t_lo > 0.0 && body.contains_in_dilate(&y, t_lo);
            if in_outer && !in_inner {
                out.push(point.clone());
            }
        }
        // lexicographic increment
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if point[i] < b {
                point[i] += 1;
                for c in point.iter_mut().skip(i + 1) {
                    *c = -b;
                }
                break;
            }
        }
    }
}

/// Per-coordinate integer box with inclusive bounds; index space of a
/// [`LatticeFunction`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl IntBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Domain("box bounds must be nonempty and matching".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::Domain("box lower bound exceeds upper bound".into()));
        }
        Ok(Self { lo, hi })
    }

    /// Centered box with the given half-width in every coordinate.
    pub fn centered(dim: usize, half_width: i64) -> Self {
        Self {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn extents(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| self.extent(i)).collect()
    }

    pub fn volume(&self) -> usize {
        (0..self.dim()).map(|i| self.extent(i)).product()
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&c, (&l, &h))| c >= l && c <= h)
    }

    /// Row-major flat index of a point inside the box.
    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let mut idx = 0usize;
        for i in 0..self.dim() {
            idx = idx * self.extent(i) + (p[i] - self.lo[i]) as usize;
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut p = vec![0i64; d];
        for i in (0..d).rev() {
            let e = self.extent(i);
            p[i] = self.lo[i] + (idx % e) as i64;
            idx /= e;
        }
        p
    }

    /// Box enlarged by `lo_shift` below and `hi_shift` above, per coordinate.
    pub fn expanded(&self, lo_shift: &[i64], hi_shift: &[i64]) -> Result<Self> {
        let lo = self.lo.iter().zip(lo_shift).map(|(l, s)| l + s).collect();
        let hi = self.hi.iter().zip(hi_shift).map(|(h, s)| h + s).collect();
        Self::new(lo, hi)
    }
}

/// Finitely supported complex function on ℤ^Γ, stored densely on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    bounds: IntBox,
    values: Vec<Complex64>,
}

impl LatticeFunction {
    pub fn zeros(bounds: IntBox) -> Self {
        let n = bounds.volume();
        Self {
            bounds,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Point mass at `point` on the given box.
    pub fn delta(bounds: IntBox, point: &[i64]) -> Result<Self> {
        let mut f = Self::zeros(bounds);
        let idx = f
            .bounds
            .index_of(point)
            .ok_or_else(|| Error::Domain("delta point outside box".into()))?;
        f.values[idx] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn from_values(bounds: IntBox, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != bounds.volume() {
            return Err(Error::Domain("value count does not match box volume".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("lattice function values must be finite".into()));
        }
        Ok(Self { bounds, values })
    }

    pub fn bounds(&self) -> &IntBox {
        &self.bounds
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Value at a lattice point; zero outside the box.
    pub fn get(&self, p: &[i64]) -> Complex64 {
        self.bounds
            .index_of(p)
            .map(|i| self.values[i])
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn set(&mut self, p: &[i64], v: Complex64) -> Result<()> {
        let idx = self
            .bounds
            .index_of(p)
            .ok_or_else(|| Error::Domain("point outside box".into()))?;
        self.values[idx] = v;
        Ok(())
    }

    /// Counting-measure ℓ^p norm; `p = f64::INFINITY` gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_of(&self.values, p, 1.0)
    }

    /// Translate by z: (shifted f)(x) = f(x − z); the box moves with it.
    pub fn shifted(&self, z: &[i64]) -> Result<Self> {
        let lo = self.bounds.lo.iter().zip(z).map(|(l, s)| l + s).collect();
        let hi = self.bounds.hi.iter().zip(z).map(|(h, s)| h + s).collect();
        Ok(Self {
            bounds: IntBox::new(lo, hi)?,
            values: self.values.clone(),
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            bounds: self.bounds.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            bounds: self.bounds.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Pointwise sum on the union box.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let d = self.bounds.dim();
        if other.bounds.dim() != d {
            return Err(Error::Domain("dimension mismatch".into()));
        }
        let lo: Vec<i64> = (0..d)
            .map(|i| self.bounds.lo[i].min(other.bounds.lo[i]))
            .collect();
        let hi: Vec<i64> = (0..d)
            .map(|i| self.bounds.hi[i].max(other.bounds.hi[i]))
            .collect();
        let bounds = IntBox::new(lo, hi)?;
        let mut out = Self::zeros(bounds);
        for idx in 0..out.bounds.volume() {
            let p = out.bounds.point_at(idx);
            out.values[idx] = self.get(&p) + other.get(&p);
        }
        Ok(out)
    }

    /// Maximum absolute difference, comparing on the union of both boxes.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for idx in 0..self.bounds.volume() {
            let p = self.bounds.point_at(idx);
            m = m.max((self.values[idx] - other.get(&p)).norm());
        }
        for idx in 0..other.bounds.volume() {
            let p = other.bounds.point_at(idx);
            m = m.max((other.values[idx] - self.get(&p)).norm());
        }
        m
    }
}

/// Complex samples on a uniform grid over a real box; node i sits at
/// `lo + i*spacing` per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lo: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(lo: Vec<f64>, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::Domain("grid spacing must be positive".into()));
        }
        if lo.len() != shape.len() || shape.iter().any(|&s| s == 0) {
            return Err(Error::Domain("grid shape must be nonempty and match lo".into()));
        }
        let n: usize = shape.iter().product();
        Ok(Self {
            lo,
            spacing,
            shape,
            values: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(
        lo: Vec<f64>,
        spacing: f64,
        shape: Vec<usize>,
        mut f: F,
    ) -> Result<Self> {
        let mut g = Self::zeros(lo, spacing, shape)?;
        for idx in 0..g.values.len() {
            let x = g.node(idx);
            g.values[idx] = f(&x);
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multi-index of a flat node index.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let d = self.dim();
        let mut m = vec![0usize; d];
        for i in (0..d).rev() {
            m[i] = idx % self.shape[i];
            idx /= self.shape[i];
        }
        m
    }

    pub fn flat_index(&self, m: &[usize]) -> usize {
        let mut idx = 0usize;
        for i in 0..self.dim() {
            idx = idx * self.shape[i] + m[i];
        }
        idx
    }

    /// Coordinates of the node with flat index `idx`.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.lo)
            .map(|(&m, &l)| l + m as f64 * self.spacing)
            .collect()
    }

    /// Multilinear interpolation; zero outside the grid box.
    pub fn interp(&self, x: &[f64]) -> Complex64 {
        let d = self.dim();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0f64; d];
        for i in 0..d {
            let u = (x[i] - self.lo[i]) / self.spacing;
            if u < 0.0 || u > (self.shape[i] - 1) as f64 {
                return Complex64::new(0.0, 0.0);
            }
            let b = u.floor().min((self.shape[i] - 1) as f64);
            base[i] = b as usize;
            frac[i] = u - b;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut m = base.clone();
            for i in 0..d {
                if corner >> i & 1 == 1 {
                    if base[i] + 1 >= self.shape[i] {
                        w = if frac[i] == 0.0 { 0.0 } else { w * frac[i] };
                        // clamp to the last node; weight is zero unless frac > 0
                        m[i] = self.shape[i] - 1;
                        continue;
                    }
                    m[i] = base[i] + 1;
                    w *= frac[i];
                } else {
                    w *= 1.0 - frac[i];
                }
            }
            if w != 0.0 {
                acc += self.values[self.flat_index(&m)] * w;
            }
        }
        acc
    }

    /// Riemann-sum L^p norm (h^{d}·Σ|f|^p)^{1/p}; sup norm for p = ∞.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_of(&self.values, p, self.spacing.powi(self.dim() as i32))
    }

    /// Riemann-sum integral h^d Σ f.
    pub fn integral(&self) -> Complex64 {
        let h = self.spacing.powi(self.dim() as i32);
        self.values.iter().sum::<Complex64>() * h
    }
}

pub(crate) fn lp_norm_of(values: &[Complex64], p: f64, cell_measure: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("ℓ^p norm requires p >= 1, got {}", p)));
    }
    let s: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
    Ok((cell_measure * s).powf(1.0 / p))
}
