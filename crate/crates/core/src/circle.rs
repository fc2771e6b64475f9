//! Frequency-side machinery: exponential-sum multipliers, continuous
//! multipliers, Gauss sums, Ionescu–Wainger denominator/fraction sets, dyadic
//! shells and projection multipliers.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::CZKernel;
use crate::lattice::{
    canonical_map_real, lattice_points_in_dilate, ConvexBody, MultiIndexSet,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// e(θ) = exp(2πiθ), with the phase reduced to [−1/2, 1/2) first so that
/// integer phases map to 1 exactly.
pub fn unit_phase(theta: f64) -> Complex64 {
    let reduced = theta - theta.round();
    Complex64::from_polar(1.0, TWO_PI * reduced)
}

/// Sine integral Si(z) = ∫₀^z sin(u)/u du, accurate to about 1e-15.
/// Power series for small arguments, a Lentz continued fraction for the
/// auxiliary functions otherwise.
pub fn sine_integral(z: f64) -> f64 {
    if z < 0.0 {
        return -sine_integral(-z);
    }
    if z == 0.0 {
        return 0.0;
    }
    if z <= 4.0 {
        // Σ_{n≥0} (−1)^n z^{2n+1} / ((2n+1)(2n+1)!), term recurrence on
        // t_n = (−1)^n z^{2n+1}/(2n+1)!
        let mut term = z;
        let mut sum = z;
        for n in 1u32..=60 {
            term *= -z * z / ((2 * n) as f64 * (2 * n + 1) as f64);
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        return sum;
    }
    // Continued fraction for the complex exponential integral at i·z:
    // evaluates h with Si(z) = π/2 + Im(h·e^{-iz}) and Ci(z) = −Re(h·e^{-iz}).
    let mut b = Complex64::new(1.0, z);
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 2..200 {
        let a = -((i - 1) as f64) * ((i - 1) as f64);
        b += Complex64::new(2.0, 0.0);
        d = 1.0 / (d * a + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    let phase = Complex64::from_polar(1.0, -z);
    let h = h * phase;
    std::f64::consts::FRAC_PI_2 + h.im
}

/// Discrete truncated multiplier m_t(ξ) = Σ_{y ∈ Ω_t ∩ ℤ^k \ {0}} e(ξ·(y)^Γ)K(y),
/// summed in lexicographic order with compensated accumulation. Phases are
/// reduced mod 1 before evaluation, so integer frequencies are exact.
pub fn exp_multiplier(
    xi: &[f64],
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    t: f64,
    max_cells: usize,
) -> Result<Complex64> {
    if xi.len() != gamma.len() {
        return Err(Error::Domain("frequency dimension must equal |Γ|".into()));
    }
    let points = lattice_points_in_dilate(body, t, max_cells)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for y in &points {
        let yf: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let z = canonical_map_real(&yf, gamma);
        let theta: f64 = xi.iter().zip(&z).map(|(a, b)| a * b).sum();
        let term = unit_phase(theta) * kernel.eval(&yf);
        // Kahan step
        let t1 = term - comp;
        let t2 = sum + t1;
        comp = (t2 - sum) - t1;
        sum = t2;
    }
    Ok(sum)
}

/// Continuous multiplier Ψ_t(ξ) = p.v.∫_{Ω_t} e(ξ·(y)^Γ)K(y)dy by
/// symmetric-pair quadrature, with a reported error estimate. The pairing
/// y ↦ −y realizes the symmetric principal value. Supports k ≤ 2.
pub fn cont_multiplier(
    xi: &[f64],
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    t: f64,
    quad_level: u32,
) -> Result<(Complex64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain("t must be positive".into()));
    }
    let k = kernel.dim();
    if k > 2 {
        return Err(Error::Domain("continuous multiplier supports k ≤ 2".into()));
    }
    if xi.len() != gamma.len() {
        return Err(Error::Domain("frequency dimension must equal |Γ|".into()));
    }
    match k {
        1 => cont_multiplier_1d(xi, kernel, body, gamma, t, quad_level),
        _ => cont_multiplier_2d(xi, kernel, body, gamma, t, quad_level),
    }
}

/// 1D path: dyadic annuli (t·2^{-j-1}, t·2^{-j}] with composite midpoint rule
/// on the paired integrand g(y) = e(ξ·(y)^Γ)K(y) + e(ξ·(−y)^Γ)K(−y), plus a
/// tail bound for the innermost annuli.
fn cont_multiplier_1d(
    xi: &[f64],
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    t: f64,
    quad_level: u32,
) -> Result<(Complex64, f64)> {
    let tol = 0.5e-8;
    let paired = |y: f64| -> Complex64 {
        let zp = canonical_map_real(&[y], gamma);
        let zn = canonical_map_real(&[-y], gamma);
        let tp: f64 = xi.iter().zip(&zp).map(|(a, b)| a * b).sum();
        let tn: f64 = xi.iter().zip(&zn).map(|(a, b)| a * b).sum();
        let mut acc = Complex64::new(0.0, 0.0);
        if body.contains_in_dilate(&[y], t) {
            acc += unit_phase(tp) * kernel.eval(&[y]);
        }
        if body.contains_in_dilate(&[-y], t) {
            acc += unit_phase(tn) * kernel.eval(&[-y]);
        }
        acc
    };
    // inner tail: |pair(y)| ≤ |y|^{-1}·2π Σ_γ |ξ_γ| |y|^{|γ|} for odd K with
    // |K| ≤ |y|^{-1}; integrating over (0, r] bounds the dropped mass.
    let tail_bound = |r: f64| -> f64 {
        TWO_PI
            * xi.iter()
                .zip(gamma.weights())
                .map(|(x, w)| x.abs() * r.powi(w as i32) / w as f64)
                .sum::<f64>()
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0f64;
    let mut outer = t;
    let mut j = 0u32;
    loop {
        let inner = outer / 2.0;
        // oscillation count on the annulus sets the node budget
        let phase_span: f64 = xi
            .iter()
            .zip(gamma.weights())
            .map(|(x, w)| x.abs() * outer.powi(w as i32))
            .sum();
        let base = 128usize.max((48.0 * phase_span) as usize);
        let n1 = base.min(1 << quad_level);
        let n2 = 2 * n1;
        let mid = |n: usize| -> Complex64 {
            let h = (outer - inner) / n as f64;
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let y = inner + (i as f64 + 0.5) * h;
                s += paired(y) * h;
            }
            s
        };
        let coarse = mid(n1);
        let fine = mid(n2);
        // midpoint Richardson: error of fine ≈ |fine − coarse| / 3
        total += fine + (fine - coarse) / 3.0;
        err += (fine - coarse).norm() / 3.0;
        j += 1;
        let tb = tail_bound(inner);
        if tb < tol || j >= 60 {
            err += tb;
            break;
        }
        outer = inner;
    }
    Ok((total, err))
}

/// 2D path: uniform midpoint tensor grid over [−t, t]² with lexicographic
/// pairing; Richardson between two refinement levels supplies the estimate.
fn cont_multiplier_2d(
    xi: &[f64],
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    t: f64,
    quad_level: u32,
) -> Result<(Complex64, f64)> {
    let eval_level = |level: u32| -> Complex64 {
        let n = 1usize << level;
        let h = 2.0 * t / n as f64;
        let cell = h * h;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let y0 = -t + (i as f64 + 0.5) * h;
            for jj in 0..n {
                let y1 = -t + (jj as f64 + 0.5) * h;
                let lex_positive = y0 > 0.0 || (y0 == 0.0 && y1 > 0.0);
                if !lex_positive {
                    continue;
                }
                let y = [y0, y1];
                if !body.contains_in_dilate(&y, t) {
                    continue;
                }
                let neg = [-y0, -y1];
                let zp = canonical_map_real(&y, gamma);
                let zn = canonical_map_real(&neg, gamma);
                let tp: f64 = xi.iter().zip(&zp).map(|(a, b)| a * b).sum();
                let tn: f64 = xi.iter().zip(&zn).map(|(a, b)| a * b).sum();
                s += (unit_phase(tp) * kernel.eval(&y) + unit_phase(tn) * kernel.eval(&neg))
                    * cell;
            }
        }
        s
    };
    let level = quad_level.max(6);
    let coarse = eval_level(level - 1);
    let fine = eval_level(level);
    Ok((fine, (fine - coarse).norm()))
}

/// Closed-form multiplier of the 1D cubic example: ψ_t(ξ) = i·(2/3)·Si(2πξt³)
/// (odd in ξ, purely imaginary).
pub fn cubic_example_psi(xi: f64, t: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 / 3.0 * sine_integral(TWO_PI * xi * t * t * t))
}

/// Reduced rational point a/q ∈ ℚ^Γ ∩ 𝕋^Γ with coordinates in [0, q).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalPoint {
    q: u64,
    numerators: Vec<i64>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl RationalPoint {
    /// Builds the reduced representative of a/q as a torus point.
    pub fn reduced(numerators: &[i64], q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("denominator must be positive".into()));
        }
        let reduced_num: Vec<u64> = numerators
            .iter()
            .map(|&a| a.rem_euclid(q as i64) as u64)
            .collect();
        let g = reduced_num.iter().fold(q, |acc, &a| gcd(acc, a));
        let g = if g == 0 { q } else { g };
        Ok(Self {
            q: q / g,
            numerators: reduced_num.iter().map(|&a| (a / g) as i64).collect(),
        })
    }

    pub fn denominator(&self) -> u64 {
        self.q
    }

    pub fn numerators(&self) -> &[i64] {
        &self.numerators
    }

    pub fn dim(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_reduced(&self) -> bool {
        let g = self
            .numerators
            .iter()
            .fold(self.q, |acc, &a| gcd(acc, a as u64));
        g == 1 || self.q == 1
    }

    /// Coordinates as real torus values in [0, 1).
    pub fn torus_coords(&self) -> Vec<f64> {
        self.numerators
            .iter()
            .map(|&a| a as f64 / self.q as f64)
            .collect()
    }
}

/// Parameters of the Ionescu–Wainger construction; τ and χ are validated
/// against the recorded p₀ exactly as the admissibility conditions demand.
#[derive(Debug, Clone, PartialEq)]
pub struct IWConfig {
    pub rho: f64,
    pub u: u32,
    pub tau: f64,
    pub chi: f64,
    pub p0: f64,
}

impl IWConfig {
    pub fn new(rho: f64, u: u32, tau: f64, chi: f64, p0: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Domain("ϱ must be positive".into()));
        }
        if u == 0 {
            return Err(Error::Domain("u must be a positive integer".into()));
        }
        if !(p0 > 1.0 && p0 < 2.0) {
            return Err(Error::Domain("p₀ must lie in (1,2)".into()));
        }
        let tau_cap = 0.5 * (p0 - 1.0).min(1.0);
        if !(tau > 0.0 && tau < tau_cap) {
            return Err(Error::Domain(format!(
                "τ = {} must lie in (0, {}) for p₀ = {}",
                tau, tau_cap, p0
            )));
        }
        if !(chi > 0.0 && chi < 0.1) {
            return Err(Error::Domain("χ must lie in (0, 1/10)".into()));
        }
        Ok(Self { rho, u, tau, chi, p0 })
    }

    /// A permissive default for desk-scale experiments.
    pub fn default_desk() -> Self {
        Self::new(0.1, 1, 0.2, 0.05, 1.5).expect("valid config")
    }
}

/// C² bump: ≡1 on |x| ≤ 1/(32d), ≡0 on |x| ≥ 1/(16d), quintic smoothstep
/// between; values in [0,1].
#[derive(Debug, Clone, Copy)]
pub struct BumpEta {
    dim: usize,
}

impl BumpEta {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("bump dimension must be positive".into()));
        }
        Ok(Self { dim })
    }

    pub fn inner_radius(&self) -> f64 {
        1.0 / (32.0 * self.dim as f64)
    }

    pub fn outer_radius(&self) -> f64 {
        1.0 / (16.0 * self.dim as f64)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r_in = self.inner_radius();
        let r_out = self.outer_radius();
        if r <= r_in {
            1.0
        } else if r >= r_out {
            0.0
        } else {
            let s = (r_out - r) / (r_out - r_in);
            s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
        }
    }
}

/// Normalized Gauss sum G(a/q) = q^{-k} Σ_{r ∈ {1..q}^k} e((a/q)·(r)^Γ);
/// phases are reduced in exact modular arithmetic before evaluation.
pub fn gauss_sum(point: &RationalPoint, gamma: &MultiIndexSet, max_terms: usize) -> Result<Complex64> {
    if point.dim() != gamma.len() {
        return Err(Error::Domain("rational point dimension must equal |Γ|".into()));
    }
    if !point.is_reduced() {
        return Err(Error::Precondition("gauss_sum requires a reduced fraction".into()));
    }
    let q = point.denominator();
    let k = gamma.ambient_dim();
    let terms = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if terms > max_terms as u128 {
        return Err(Error::Budget(format!(
            "Gauss sum needs {} terms, budget {}",
            terms, max_terms
        )));
    }
    let modpow = |base: u64, exp: u32, m: u64| -> u64 {
        let mut acc: u128 = 1;
        let mut b: u128 = (base % m) as u128;
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % m as u128;
            }
            b = b * b % m as u128;
            e >>= 1;
        }
        acc as u64
    };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut r = vec![1u64; k];
    loop {
        // exact phase numerator mod q
        let mut phase_num: u128 = 0;
        for (a, g) in point.numerators().iter().zip(gamma.exponents()) {
            let mut mono: u128 = 1;
            for (ri, &e) in r.iter().zip(g) {
                mono = mono * modpow(*ri, e, q) as u128 % q as u128;
            }
            phase_num = (phase_num + (*a as u128) * mono) % q as u128;
        }
        sum += unit_phase(phase_num as f64 / q as f64);
        let mut i = k;
        loop {
            if i == 0 {
                let norm = (q as f64).powi(k as i32);
                return Ok(sum / norm);
            }
            i -= 1;
            if r[i] < q {
                r[i] += 1;
                for rj in r.iter_mut().skip(i + 1) {
                    *rj = 1;
                }
                break;
            }
        }
    }
}

/// Per-denominator table of max_{a reduced} |G(a/q)| and the least-squares
/// slope of log max|G| against log q (zeros are tabulated but excluded from
/// the fit).
#[derive(Debug, Clone)]
pub struct GaussDecayFit {
    /// (q, max over reduced a of |G(a/q)|)
    pub table: Vec<(u64, f64)>,
    /// δ̂ = −slope of the least-squares fit.
    pub exponent: f64,
}

/// Brute-force Gauss-sum magnitudes over the given denominators.
pub fn gauss_decay_fit(
    gamma: &MultiIndexSet,
    denominators: &[u64],
    max_terms: usize,
) -> Result<GaussDecayFit> {
    let d = gamma.len();
    let mut table = Vec::new();
    for &q in denominators {
        let mut max_abs: f64 = 0.0;
        if q == 1 {
            max_abs = 1.0;
        } else {
            let mut a = vec![0i64; d];
            loop {
                let g = a.iter().fold(q, |acc, &ai| gcd(acc, ai as u64));
                if g == 1 {
                    let point = RationalPoint::reduced(&a, q)?;
                    let val = gauss_sum(&point, gamma, max_terms)?.norm();
                    if val > max_abs {
                        max_abs = val;
                    }
                }
                let mut i = d;
                let mut done = false;
                loop {
                    if i == 0 {
                        done = true;
                        break;
                    }
                    i -= 1;
                    if (a[i] as u64) < q - 1 {
                        a[i] += 1;
                        for aj in a.iter_mut().skip(i + 1) {
                            *aj = 0;
                        }
                        break;
                    }
                }
                if done {
                    break;
                }
            }
        }
        table.push((q, max_abs));
    }
    // least squares on log-log, nonzero entries only
    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|&&(_, v)| v > 1e-14)
        .map(|&(q, v)| ((q as f64).ln(), v.ln()))
        .collect();
    let exponent = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        -slope
    } else {
        f64::NAN
    };
    Ok(GaussDecayFit { table, exponent })
}

/// Ionescu–Wainger denominator set P_{≤N} = {1, …, N}: contains ℕ_N, is
/// monotone in N and divisor-closed.
pub fn iw_denominators(n: u64, _config: &IWConfig) -> Vec<u64> {
    (1..=n).collect()
}

/// Ordered set of reduced rational torus points with controlled denominators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FareySet {
    dim: usize,
    points: Vec<RationalPoint>,
}

impl FareySet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[RationalPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &RationalPoint) -> bool {
        self.points.binary_search_by(|x| cmp_points(x, p)).is_ok()
    }
}

fn cmp_points(a: &RationalPoint, b: &RationalPoint) -> std::cmp::Ordering {
    a.denominator()
        .cmp(&b.denominator())
        .then_with(|| a.numerators().cmp(b.numerators()))
}

/// All reduced fractions a/q ∈ ℚ^Γ ∩ 𝕋^Γ with q ∈ P_{≤N}, deduplicated as
/// torus points and ordered by (q, a lexicographic).
pub fn iw_fractions(
    n: u64,
    dim: usize,
    config: &IWConfig,
    max_points: usize,
) -> Result<FareySet> {
    let denoms = iw_denominators(n, config);
    let mut set: BTreeSet<RationalPoint> = BTreeSet::new();
    for q in denoms {
        let count = (q as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
        if count > max_points as u128 {
            return Err(Error::Budget(format!(
                "fraction enumeration for q = {} exceeds budget",
                q
            )));
        }
        let mut a = vec![0i64; dim];
        loop {
            let g = a.iter().fold(q, |acc, &ai| gcd(acc, ai as u64));
            if g == 1 {
                set.insert(RationalPoint::reduced(&a, q)?);
            }
            let mut i = dim;
            let mut done = false;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                if (a[i] as u64) < q - 1 {
                    a[i] += 1;
                    for aj in a.iter_mut().skip(i + 1) {
                        *aj = 0;
                    }
                    break;
                }
            }
            if done {
                break;
            }
        }
        if set.len() > max_points {
            return Err(Error::Budget("fraction set exceeds budget".into()));
        }
    }
    let mut points: Vec<RationalPoint> = set.into_iter().collect();
    points.sort_by(cmp_points);
    Ok(FareySet { dim, points })
}

/// Dyadic shell Σ_S: equal to Σ_{≤S} for the base shell S = 2^u, otherwise
/// Σ_{≤S} \ Σ_{≤S/2^u}. S must be a power 2^{u·n}, n ≥ 1.
pub fn shell_fractions(
    s: u64,
    dim: usize,
    config: &IWConfig,
    max_points: usize,
) -> Result<FareySet> {
    let base: u64 = 1u64 << config.u;
    let mut p = base;
    let mut valid = false;
    while p <= s {
        if p == s {
            valid = true;
            break;
        }
        p = p.saturating_mul(base);
    }
    if !valid {
        return Err(Error::Precondition(format!(
            "shell index {} is not a power of 2^u = {}",
            s, base
        )));
    }
    let outer = iw_fractions(s, dim, config, max_points)?;
    if s == base {
        return Ok(outer);
    }
    let inner = iw_fractions(s / base, dim, config, max_points)?;
    let inner_set: BTreeSet<&RationalPoint> = inner.points().iter().collect();
    let points: Vec<RationalPoint> = outer
        .points()
        .iter()
        .filter(|p| !inner_set.contains(p))
        .cloned()
        .collect();
    Ok(FareySet { dim, points })
}

/// Ionescu–Wainger projection multiplier
/// Π_{≤n^τ}(ξ) = Σ_{a/q ∈ Σ_{≤n^{τu}}} η(2^{n^τ(A−χI)}(ξ − a/q)),
/// with the difference taken in the torus fundamental domain [−1/2, 1/2)^Γ.
/// Errors if the dilated bump supports could overlap.
pub fn projection_multiplier(
    xi: &[f64],
    n: u64,
    gamma: &MultiIndexSet,
    config: &IWConfig,
    eta: &BumpEta,
    max_points: usize,
) -> Result<f64> {
    let fractions = major_arc_centers(n, gamma, config, max_points)?;
    projection_multiplier_with_set(xi, n, gamma, config, eta, &fractions)
}

/// The rational centers Σ_{≤n^{τu}} used by [`projection_multiplier`]:
/// the set Σ_{≤S₀} for the largest shell index S₀ = 2^{um} ≤ n^{τu}.
pub fn major_arc_centers(
    n: u64,
    gamma: &MultiIndexSet,
    config: &IWConfig,
    max_points: usize,
) -> Result<FareySet> {
    let cap = (n as f64).powf(config.tau * config.u as f64);
    let base = 1u64 << config.u;
    let mut s0 = 0u64;
    let mut p = base;
    while (p as f64) <= cap {
        s0 = p;
        let next = p.saturating_mul(base);
        if next == p {
            break;
        }
        p = next;
    }
    if s0 == 0 {
        return Err(Error::Precondition(format!(
            "n = {} is too small: no shell 2^u ≤ n^(τu) = {:.3}",
            n, cap
        )));
    }
    iw_fractions(s0, gamma.len(), config, max_points)
}

/// Evaluates Π with an explicit center set (the set must come from
/// [`major_arc_centers`] for the same parameters).
pub fn projection_multiplier_with_set(
    xi: &[f64],
    n: u64,
    gamma: &MultiIndexSet,
    config: &IWConfig,
    eta: &BumpEta,
    centers: &FareySet,
) -> Result<f64> {
    if xi.len() != gamma.len() {
        return Err(Error::Domain("frequency dimension must equal |Γ|".into()));
    }
    let weights = gamma.weights();
    let n_tau = (n as f64).powf(config.tau);
    // separation: distinct centers differ by ≥ 1/q_max² in some coordinate;
    // the dilated support has coordinate radius r_out·2^{−n^τ(|γ|−χ)}
    let q_max = centers
        .points()
        .iter()
        .map(|p| p.denominator())
        .max()
        .unwrap_or(1);
    let min_sep = 1.0 / (q_max as f64 * q_max as f64);
    let max_support: f64 = weights
        .iter()
        .map(|&w| eta.outer_radius() * 2f64.powf(-n_tau * (w as f64 - config.chi)))
        .fold(0.0, f64::max);
    if centers.len() > 1 && 2.0 * max_support >= min_sep {
        return Err(Error::Precondition(format!(
            "bump supports may overlap: support radius {} vs separation {}",
            max_support, min_sep
        )));
    }
    let mut total = 0.0;
    for center in centers.points() {
        let c = center.torus_coords();
        let arg: Vec<f64> = xi
            .iter()
            .zip(&c)
            .zip(&weights)
            .map(|((x, ci), &w)| {
                let mut d = x - ci;
                d -= d.round(); // fundamental domain
                2f64.powf(n_tau * (w as f64 - config.chi)) * d
            })
            .collect();
        total += eta.eval(&arg);
    }
    Ok(total)
}

/// One sampled row of a van der Corput probe.
#[derive(Debug, Clone)]
pub struct VdcRow {
    pub t: f64,
    pub xi: Vec<f64>,
    pub scale: f64,
    pub diff: f64,
    pub small_ratio: f64,
    pub large_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct VdcReport {
    pub rows: Vec<VdcRow>,
    /// max of |Ψ_t − Ψ_{ct}| / |t^A ξ|_∞
    pub max_small_ratio: f64,
    /// max of |Ψ_t − Ψ_{ct}| · |t^A ξ|_∞^{σ/|Γ|}
    pub max_large_ratio: f64,
}

/// Probes both van der Corput bounds for Ψ_t − Ψ_{ct} over log-spaced
/// (t, ξ)-samples along each frequency axis; reports the empirical implied
/// constants.
#[allow(clippy::too_many_arguments)]
pub fn vdc_bounds_check(
    kernel: &CZKernel,
    body: &ConvexBody,
    gamma: &MultiIndexSet,
    c: f64,
    t_range: (f64, f64),
    xi_range: (f64, f64),
    samples: usize,
    quad_level: u32,
) -> Result<VdcReport> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain("c must lie in (0,1)".into()));
    }
    if samples < 2 {
        return Err(Error::Domain("need at least 2 samples per axis".into()));
    }
    let weights = gamma.weights();
    let sigma = kernel.sigma();
    let d = gamma.len();
    let mut rows = Vec::new();
    let mut max_small: f64 = 0.0;
    let mut max_large: f64 = 0.0;
    for axis in 0..d {
        for i in 0..samples {
            let ft = i as f64 / (samples - 1) as f64;
            let t = t_range.0 * (t_range.1 / t_range.0).powf(ft);
            for j in 0..samples {
                let fx = j as f64 / (samples - 1) as f64;
                let x = xi_range.0 * (xi_range.1 / xi_range.0).powf(fx);
                let mut xi = vec![0.0; d];
                xi[axis] = x;
                let (a, ea) = cont_multiplier(&xi, kernel, body, gamma, t, quad_level)?;
                let (b, eb) = cont_multiplier(&xi, kernel, body, gamma, c * t, quad_level)?;
                if ea + eb > 1e-4 {
                    return Err(Error::Quadrature(format!(
                        "multiplier error estimate {} too large at t = {}",
                        ea + eb,
                        t
                    )));
                }
                let diff = (a - b).norm();
                let scale: f64 = xi
                    .iter()
                    .zip(&weights)
                    .map(|(v, &w)| v.abs() * t.powi(w as i32))
                    .fold(0.0, f64::max);
                let small_ratio = diff / scale;
                let large_ratio = diff * scale.powf(sigma / d as f64);
                max_small = max_small.max(small_ratio);
                max_large = max_large.max(large_ratio);
                rows.push(VdcRow {
                    t,
                    xi,
                    scale,
                    diff,
                    small_ratio,
                    large_ratio,
                });
            }
        }
    }
    Ok(VdcReport {
        rows,
        max_small_ratio: max_small,
        max_large_ratio: max_large,
    })
}
