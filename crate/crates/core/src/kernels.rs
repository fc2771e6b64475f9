//! Calderón–Zygmund kernels with numerically checkable size, cancellation and
//! Hölder axioms.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{random_direction, ConvexBody};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    None,
}

#[derive(Debug, Clone)]
enum KernelEval {
    /// K(y) = 1/y on ℝ \ {0}.
    Hilbert,
    /// K(y) = y_component / |y|^{k+1}.
    Riesz { component: usize },
    /// Fixed function, for tests and violators.
    Custom(fn(&[f64]) -> Complex64),
    /// Scalar multiple of another kernel.
    Scaled { base: Box<KernelEval>, factor: f64 },
}

impl KernelEval {
    fn eval(&self, y: &[f64]) -> Complex64 {
        match self {
            KernelEval::Hilbert => Complex64::new(1.0 / y[0], 0.0),
            KernelEval::Riesz { component } => {
                let r2: f64 = y.iter().map(|v| v * v).sum();
                let k = y.len() as i32;
                Complex64::new(y[*component] / r2.sqrt().powi(k + 1), 0.0)
            }
            KernelEval::Custom(f) => f(y),
            KernelEval::Scaled { base, factor } => base.eval(y) * *factor,
        }
    }
}

/// Kernel on ℝ^k \ {0} with Hölder exponent σ, parity flag and homogeneity
/// degree −k; the validator operations below probe the three axioms.
#[derive(Debug, Clone)]
pub struct CZKernel {
    dim: usize,
    sigma: f64,
    parity: Parity,
    homogeneity: f64,
    /// Measured sup of the Hölder ratio over admissible pairs; the size
    /// constant of the built-ins is exactly 1.
    holder_constant: f64,
    eval: KernelEval,
}

impl CZKernel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn homogeneity(&self) -> f64 {
        self.homogeneity
    }

    pub fn holder_constant(&self) -> f64 {
        self.holder_constant
    }

    pub fn eval(&self, y: &[f64]) -> Complex64 {
        debug_assert_eq!(y.len(), self.dim);
        self.eval.eval(y)
    }

    /// Kernel multiplied by a real scalar (useful as a size-condition violator).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            sigma: self.sigma,
            parity: self.parity,
            homogeneity: self.homogeneity,
            holder_constant: self.holder_constant * factor.abs(),
            eval: KernelEval::Scaled {
                base: Box::new(self.eval.clone()),
                factor,
            },
        }
    }

    /// Arbitrary evaluator with caller-declared attributes; intended for tests.
    pub fn custom(
        dim: usize,
        sigma: f64,
        parity: Parity,
        holder_constant: f64,
        f: fn(&[f64]) -> Complex64,
    ) -> Self {
        Self {
            dim,
            sigma,
            parity,
            homogeneity: -(dim as f64),
            holder_constant,
            eval: KernelEval::Custom(f),
        }
    }
}

/// The one-dimensional Hilbert kernel K(y) = 1/y.
pub fn make_hilbert_kernel() -> CZKernel {
    CZKernel {
        dim: 1,
        sigma: 1.0,
        parity: Parity::Odd,
        homogeneity: -1.0,
        // sup over |y| <= |x|/2 of |1/x - 1/(x+y)|·|x|²/|y| = sup |x|/|x+y| = 2
        holder_constant: 2.0,
        eval: KernelEval::Hilbert,
    }
}

/// Riesz-type kernel K(y) = y_component/|y|^{k+1}; its size constant
/// sup |K(y)|·|y|^k = sup |y_component|/|y| is exactly 1 already.
pub fn make_riesz_type_kernel(dim: usize, component: usize) -> Result<CZKernel> {
    if component >= dim {
        return Err(Error::Domain(format!(
            "component {} out of range for dimension {}",
            component, dim
        )));
    }
    Ok(CZKernel {
        dim,
        sigma: 1.0,
        parity: Parity::Odd,
        homogeneity: -(dim as f64),
        // sharp in dimension 2: attained at x = e_c, y = -e_c/2, where
        // |K(x) - K(x+y)|·|x|^{k+1}/|y| = |1 - 4|/(1/2) = 6
        holder_constant: 6.0,
        eval: KernelEval::Riesz { component },
    })
}

/// Absolute value of the numerical integral of K over the annulus Ω_R \ Ω_r,
/// using a midpoint tensor grid whose nodes are paired under y ↦ −y. For an
/// odd kernel and a symmetric body the pairs cancel exactly.
pub fn verify_cancellation(
    kernel: &CZKernel,
    body: &ConvexBody,
    r: f64,
    big_r: f64,
    quad_level: u32,
) -> Result<f64> {
    if !(0.0 < r && r < big_r && big_r.is_finite()) {
        return Err(Error::Domain("cancellation check requires 0 < r < R < ∞".into()));
    }
    let k = kernel.dim();
    if body.dim() != k {
        return Err(Error::Domain("body and kernel dimension mismatch".into()));
    }
    let n: usize = 1usize << quad_level;
    if (n as u128).pow(k as u32) > (1u128 << 28) {
        return Err(Error::Budget("quadrature node count exceeds budget".into()));
    }
    let h = 2.0 * big_r / n as f64;
    let cell = h.powi(k as i32);
    // iterate lexicographically positive nodes and add the mirrored partner
    let mut idx = vec![0usize; k];
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        let y: Vec<f64> = idx
            .iter()
            .map(|&i| -big_r + (i as f64 + 0.5) * h)
            .collect();
        // take each ± pair once: first strictly positive coordinate decides
        let lex_positive = y.iter().find(|&&c| c != 0.0).map(|&c| c > 0.0).unwrap_or(false);
        if lex_positive {
            let in_annulus =
                body.contains_in_dilate(&y, big_r) && !body.contains_in_dilate(&y, r);
            if in_annulus {
                let neg: Vec<f64> = y.iter().map(|c| -c).collect();
                acc += (kernel.eval(&y) + kernel.eval(&neg)) * cell;
            }
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(acc.norm());
            }
            i -= 1;
            if idx[i] + 1 < n {
                idx[i] += 1;
                for j in idx.iter_mut().skip(i + 1) {
                    *j = 0;
                }
                break;
            }
        }
    }
}

/// Maxima over random admissible pairs of the size ratio |K(x)|·|x|^k and the
/// Hölder ratio |K(x) − K(x+y)|·|x|^{k+σ}/|y|^σ, with |y| ≤ |x|/2 and |x|
/// spanning [1e-3, 1e3] log-uniformly.
pub fn verify_size_and_holder(kernel: &CZKernel, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = kernel.dim();
    let sigma = kernel.sigma();
    let mut max_size: f64 = 0.0;
    let mut max_holder: f64 = 0.0;
    for _ in 0..samples {
        let dir = random_direction(&mut rng, k);
        let log_r = rng.random_range(-3.0f64..3.0);
        let r = 10f64.powf(log_r);
        let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
        let size_ratio = kernel.eval(&x).norm() * r.powi(k as i32);
        max_size = max_size.max(size_ratio);

        let ydir = random_direction(&mut rng, k);
        let ylen = rng.random_range(0.0..0.5) * r;
        if ylen == 0.0 {
            continue;
        }
        let xy: Vec<f64> = x.iter().zip(&ydir).map(|(a, d)| a + d * ylen).collect();
        let diff = (kernel.eval(&x) - kernel.eval(&xy)).norm();
        let ratio = diff * r.powf(k as f64 + sigma) / ylen.powf(sigma);
        max_holder = max_holder.max(ratio);
    }
    (max_size, max_holder)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_values_and_oddness() {
        let k = make_hilbert_kernel();
        assert_eq!(k.eval(&[2.0]), Complex64::new(0.5, 0.0));
        assert_eq!(k.eval(&[-2.0]), Complex64::new(-0.5, 0.0));
    }

    #[test]
    fn hilbert_size_equality() {
        let k = make_hilbert_kernel();
        for y in [0.1, 0.7, 3.0, 250.0] {
            assert!((k.eval(&[y]).norm() * y - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn riesz_values_and_oddness() {
        let k = make_riesz_type_kernel(2, 0).unwrap();
        assert_eq!(k.eval(&[1.0, 0.0]), Complex64::new(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let y = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            if y[0] == 0.0 && y[1] == 0.0 {
                continue;
            }
            let neg = [-y[0], -y[1]];
            assert!((k.eval(&y) + k.eval(&neg)).norm() < 1e-14);
        }
        assert!(make_riesz_type_kernel(2, 2).is_err());
    }

    #[test]
    fn riesz_size_ratio_bounded_by_one() {
        let k = make_riesz_type_kernel(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r < 1e-6 {
                continue;
            }
            assert!(k.eval(&y).norm() * r.powi(3) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn cancellation_exact_for_odd_kernels() {
        let k = make_hilbert_kernel();
        let body = ConvexBody::max_ball(1);
        let res = verify_cancellation(&k, &body, 0.5, 2.0, 10).unwrap();
        assert!(res <= 1e-15, "residual {}", res);

        let k2 = make_riesz_type_kernel(2, 0).unwrap();
        let ball = ConvexBody::euclidean_ball(2);
        let res2 = verify_cancellation(&k2, &ball, 0.3, 1.7, 8).unwrap();
        assert!(res2 <= 1e-13, "residual {}", res2);
    }

    fn abs_violator(y: &[f64]) -> Complex64 {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        Complex64::new(1.0 / r, 0.0)
    }

    #[test]
    fn cancellation_flags_violator() {
        // K = |y|^{-1} over (r, R) with R/r = e: integral = 2·ln(R/r) = 2
        let k = CZKernel::custom(1, 1.0, Parity::None, 1.0, abs_violator);
        let body = ConvexBody::max_ball(1);
        let r = 0.5;
        let big_r = r * std::f64::consts::E;
        let res = verify_cancellation(&k, &body, r, big_r, 12).unwrap();
        assert!((res - 2.0).abs() < 0.01, "residual {}", res);
        assert!(res > 0.1);
    }

    #[test]
    fn cancellation_scale_consistent() {
        // homogeneous degree -k: residual invariant under (r,R) -> (cr,cR)
        let k = CZKernel::custom(1, 1.0, Parity::None, 1.0, abs_violator);
        let body = ConvexBody::max_ball(1);
        let a = verify_cancellation(&k, &body, 0.25, 1.0, 12).unwrap();
        let b = verify_cancellation(&k, &body, 0.75, 3.0, 12).unwrap();
        assert!((a - b).abs() < 0.01, "{} vs {}", a, b);
    }

    #[test]
    fn size_and_holder_hilbert() {
        let k = make_hilbert_kernel();
        let (size, holder) = verify_size_and_holder(&k, 20_000, 21);
        assert!((size - 1.0).abs() < 1e-12);
        assert!(holder <= 4.0, "holder ratio {}", holder);
        assert!(holder <= k.holder_constant() * 1.01);
    }

    #[test]
    fn size_violator_flagged() {
        let k = make_hilbert_kernel().scaled(2.0);
        let (size, _) = verify_size_and_holder(&k, 5_000, 22);
        assert!((size - 2.0).abs() < 1e-9, "size ratio {}", size);
    }
}
