//! The experiment drivers behind each subcommand. Every experiment is a pure
//! function of (config, seed, budget) and produces a [`Report`] whose rows can
//! be reproduced by calling the named library operation with the logged
//! arguments.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radonlab::circle::{
    cubic_example_psi, cont_multiplier, exp_multiplier, gauss_decay_fit, gauss_sum,
    iw_fractions, major_arc_centers, projection_multiplier_with_set, shell_fractions, BumpEta,
    IWConfig, RationalPoint,
};
use radonlab::kernels::{
    make_hilbert_kernel, make_riesz_type_kernel, verify_cancellation, verify_size_and_holder,
    CZKernel,
};
use radonlab::lattice::{ConvexBody, DilationMatrix, GridFunction, IntBox, LatticeFunction,
    MultiIndexSet};
use radonlab::martingale::{
    conditional_expectation, martingale_oscillation_probe, telescoping_pieces, ChristCubeSystem,
};
use radonlab::radon::{discrete_radon_direct, radon_family, restrict_to_box};
use radonlab::seminorms::{
    long_short_split, oscillation_pointwise, variation_pointwise, worst_sequence_search,
    SampledFamily, SearchStrategy, SequenceI, TruncationGrid,
};

use crate::config::{Config, ConfigError};
use crate::report::Report;

/// Driver-level failure, mapped to an exit code by the binary.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config → exit 2.
    Usage(String),
    /// Budget exceeded → exit 3 (with a partial report when possible).
    Budget(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {}", m),
            CliError::Budget(m) => write!(f, "budget exceeded: {}", m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<radonlab::Error> for CliError {
    fn from(e: radonlab::Error) -> Self {
        match e {
            radonlab::Error::Budget(m) => CliError::Budget(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Config keys each experiment reads; anything else in the file is a typo
/// and is rejected as a usage error.
pub fn known_keys(experiment: &str) -> &'static [&'static str] {
    match experiment {
        "verify-kernel" => &["kernel", "annuli", "samples", "quad_level"],
        "probe-oscillation" => &[
            "m_list", "degree", "t_count", "t_max", "n_blocks", "restarts", "p", "zero_input",
        ],
        "gauss-table" => &["degree", "q_max"],
        "multiplier-scan" => &["preset", "pairs", "quad_level"],
        "martingale-probe" => &["nodes", "spacing", "n_blocks", "trials"],
        "split-check" => &["families", "grid_len", "tau"],
        _ => &[],
    }
}

/// Shared run parameters from the command line.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub seed: u64,
    pub budget_cells: usize,
    pub threads: usize,
}

fn echo_base(cfg: &mut BTreeMap<String, String>, ctx: &RunContext) {
    cfg.insert("seed".into(), ctx.seed.to_string());
    cfg.insert("budget_cells".into(), ctx.budget_cells.to_string());
    cfg.insert("threads".into(), ctx.threads.to_string());
}

fn ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// `verify-kernel`: Calderón–Zygmund axiom checks for a built-in kernel.
pub fn verify_kernel(config: &Config, ctx: &RunContext) -> Result<Report, CliError> {
    let kernel_name = config.get_str("kernel", "hilbert");
    let annuli = config.get_usize("annuli", 100)?;
    let samples = config.get_usize("samples", 100_000)?;
    let quad_level = config.get_usize("quad_level", 10)? as u32;
    let kernel = build_kernel(&kernel_name)?;
    let body = ConvexBody::euclidean_ball(kernel.dim());

    let mut cfg = BTreeMap::new();
    cfg.insert("kernel".into(), kernel_name.clone());
    cfg.insert("annuli".into(), annuli.to_string());
    cfg.insert("samples".into(), samples.to_string());
    cfg.insert("quad_level".into(), quad_level.to_string());
    echo_base(&mut cfg, ctx);
    let mut report = Report::new("verify-kernel", cfg);

    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut worst_residual: f64 = 0.0;
    for _ in 0..annuli {
        let r = 10f64.powf(rng.random_range(-2.0f64..1.0));
        let big_r = r * 10f64.powf(rng.random_range(0.3f64..2.0));
        let res = verify_cancellation(&kernel, &body, r, big_r, quad_level)?;
        worst_residual = worst_residual.max(res.abs());
    }
    report.record_timing("cancellation", ms(t0));
    report.push_stat(
        0.0,
        0.0,
        annuli as u64,
        "cancellation_residual",
        worst_residual,
        1e-13,
        worst_residual <= 1e-13,
    );

    let t1 = Instant::now();
    let (size_ratio, holder_a) = verify_size_and_holder(&kernel, samples, ctx.seed);
    let (_, holder_b) = verify_size_and_holder(&kernel, 2 * samples, ctx.seed);
    report.record_timing("size_holder", ms(t1));
    report.push_stat(
        0.0,
        0.0,
        samples as u64,
        "size_ratio",
        size_ratio,
        1.0 + 1e-12,
        size_ratio <= 1.0 + 1e-12,
    );
    let drift = if holder_b > 0.0 {
        (holder_a / holder_b - 1.0).abs()
    } else {
        0.0
    };
    report.push_stat(
        0.0,
        0.0,
        samples as u64,
        "holder_ratio_drift",
        drift,
        0.01,
        drift <= 0.01,
    );
    report.push_stat(
        0.0,
        0.0,
        samples as u64,
        "holder_ratio",
        holder_b,
        kernel.holder_constant(),
        holder_b <= kernel.holder_constant(),
    );
    Ok(report)
}

fn build_kernel(name: &str) -> Result<CZKernel, CliError> {
    match name {
        "hilbert" => Ok(make_hilbert_kernel()),
        "riesz" => Ok(make_riesz_type_kernel(2, 0)?),
        other => Err(CliError::Usage(format!(
            "config field `kernel`: unknown kernel `{}` (expected hilbert|riesz)",
            other
        ))),
    }
}

/// `probe-oscillation`: Theorem-1 style uniformity probe — worst oscillation
/// ratio across input supports of doubling size.
pub fn probe_oscillation(config: &Config, ctx: &RunContext) -> Result<Report, CliError> {
    let m_list = config.get_usize_list("m_list", &[64, 128, 256, 512])?;
    let degree = config.get_usize("degree", 3)? as u32;
    let t_count = config.get_usize("t_count", 64)?;
    let t_max = config.get_f64("t_max", 16.0)?;
    let n_blocks = config.get_usize("n_blocks", 8)?;
    let restarts = config.get_usize("restarts", 200)?;
    let p = config.get_f64("p", 2.0)?;
    let zero_input = config.get_u64("zero_input", 0)? != 0;

    let mut cfg = BTreeMap::new();
    cfg.insert(
        "m_list".into(),
        m_list.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","),
    );
    cfg.insert("degree".into(), degree.to_string());
    cfg.insert("t_count".into(), t_count.to_string());
    cfg.insert("t_max".into(), t_max.to_string());
    cfg.insert("n_blocks".into(), n_blocks.to_string());
    cfg.insert("restarts".into(), restarts.to_string());
    cfg.insert("p".into(), p.to_string());
    cfg.insert("zero_input".into(), (zero_input as u8).to_string());
    echo_base(&mut cfg, ctx);
    let mut report = Report::new("probe-oscillation", cfg);

    let kernel = make_hilbert_kernel();
    let body = ConvexBody::max_ball(1);
    let gamma = MultiIndexSet::one_dim(&[degree]).map_err(CliError::from)?;
    let grid = TruncationGrid::log_spaced(1.0, t_max, t_count)?;

    let mut ratios: Vec<(f64, f64)> = Vec::new();
    for &half_width in &m_list {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ half_width as u64);
        let bounds = IntBox::centered(1, half_width as i64);
        let mut f = LatticeFunction::zeros(bounds);
        if !zero_input {
            for v in f.values_mut() {
                *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let norm = f.lp_norm(p)?;
            let inv = Complex64::new(1.0 / norm, 0.0);
            f = f.scaled(inv);
        }
        let family_fns = radon_family(&f, &kernel, &body, &gamma, &grid, ctx.budget_cells)?;
        let points = family_fns[0].bounds().volume();
        let mut rows: Vec<Vec<Complex64>> = vec![Vec::with_capacity(t_count); points];
        for member in &family_fns {
            for (x, v) in member.values().iter().enumerate() {
                rows[x].push(*v);
            }
        }
        let family = SampledFamily::new(grid.clone(), rows)?;
        let strategy = SearchStrategy::RandomRestarts {
            restarts,
            seed: ctx.seed,
        };
        let (_, best) = worst_sequence_search(&family, p, n_blocks, strategy, 1.0)?;
        let f_norm = if zero_input { 1.0 } else { f.lp_norm(p)? };
        let ratio = best / f_norm;
        report.record_timing(&format!("m_{}", half_width), ms(t0));
        report.push_stat(
            half_width as f64,
            p,
            n_blocks as u64,
            "oscillation_ratio",
            ratio,
            f64::INFINITY,
            true,
        );
        ratios.push((half_width as f64, ratio));
    }

    if zero_input {
        for &(m, r) in &ratios {
            report.push_stat(m, p, n_blocks as u64, "zero_input_ratio", r, 1e-12, r <= 1e-12);
        }
        return Ok(report);
    }

    let max = ratios.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    let min = ratios.iter().map(|r| r.1).fold(f64::MAX, f64::min);
    let spread = if min > 0.0 { max / min - 1.0 } else { 0.0 };
    report.push_stat(
        0.0,
        p,
        ratios.len() as u64,
        "ratio_spread",
        spread,
        0.25,
        spread <= 0.25,
    );
    let slope = log_log_slope(&ratios);
    report.push_stat(
        0.0,
        p,
        ratios.len() as u64,
        "loglog_slope",
        slope,
        0.05,
        slope.abs() <= 0.05,
    );
    Ok(report)
}

fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// `gauss-table`: brute-force Gauss sums over primes, with the decay-exponent
/// fit for the quadratic canonical map.
pub fn gauss_table(config: &Config, ctx: &RunContext) -> Result<Report, CliError> {
    let degree = config.get_usize("degree", 2)? as u32;
    let q_max = config.get_u64("q_max", 101)?;

    let mut cfg = BTreeMap::new();
    cfg.insert("degree".into(), degree.to_string());
    cfg.insert("q_max".into(), q_max.to_string());
    echo_base(&mut cfg, ctx);
    let mut report = Report::new("gauss-table", cfg);

    let gamma = MultiIndexSet::one_dim(&[degree]).map_err(CliError::from)?;
    let primes: Vec<u64> = (2..=q_max).filter(|&q| is_prime(q)).collect();
    let t0 = Instant::now();
    let fit = gauss_decay_fit(&gamma, &primes, ctx.budget_cells)?;
    report.record_timing("table", ms(t0));

    let trivial = gauss_sum(&RationalPoint::reduced(&[0], 1)?, &gamma, ctx.budget_cells)?;
    let dev = (trivial - Complex64::new(1.0, 0.0)).norm();
    report.push_stat(1.0, 0.0, 0, "gauss_trivial_dev", dev, 0.0, dev == 0.0);

    for &(q, v) in &fit.table {
        report.push_stat(q as f64, 0.0, 0, "gauss_max_abs", v, 1.0 + 1e-12, v <= 1.0 + 1e-12);
    }
    if degree == 2 {
        let err = (fit.exponent - 0.5).abs();
        report.push_stat(
            0.0,
            0.0,
            fit.table.len() as u64,
            "gauss_decay_exponent",
            fit.exponent,
            0.05,
            err <= 0.05,
        );
    } else {
        report.push_stat(
            0.0,
            0.0,
            fit.table.len() as u64,
            "gauss_decay_exponent",
            fit.exponent,
            f64::INFINITY,
            true,
        );
    }
    Ok(report)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `multiplier-scan`: the "cubic-hilbert" checks — integer-frequency
/// vanishing of m_t and the sine-integral closed form for Ψ_t.
pub fn multiplier_scan(config: &Config, ctx: &RunContext) -> Result<Report, CliError> {
    let preset = config.get_str("preset", "cubic-hilbert");
    if preset != "cubic-hilbert" {
        return Err(CliError::Usage(format!(
            "config field `preset`: unknown preset `{}`",
            preset
        )));
    }
    let pairs = config.get_usize("pairs", 100)?;
    let quad_level = config.get_usize("quad_level", 16)? as u32;

    let mut cfg = BTreeMap::new();
    cfg.insert("preset".into(), preset.clone());
    cfg.insert("pairs".into(), pairs.to_string());
    cfg.insert("quad_level".into(), quad_level.to_string());
    echo_base(&mut cfg, ctx);
    let mut report = Report::new("multiplier-scan", cfg);

    let kernel = make_hilbert_kernel();
    let body = ConvexBody::max_ball(1);
    let gamma = MultiIndexSet::one_dim(&[3]).map_err(CliError::from)?;

    let t0 = Instant::now();
    for xi in -3i64..=3 {
        for &t in &[10.0, 100.0, 1000.0] {
            let m = exp_multiplier(&[xi as f64], &kernel, &body, &gamma, t, ctx.budget_cells)?;
            report.push_stat(
                t,
                0.0,
                xi.unsigned_abs(),
                "integer_freq_abs",
                m.norm(),
                1e-10,
                m.norm() <= 1e-10,
            );
        }
    }
    report.record_timing("integer_vanishing", ms(t0));

    let t1 = Instant::now();
    // 10 × 10 log-spaced grid in (ξ, t)
    let side = (pairs as f64).sqrt().round() as usize;
    for i in 0..side {
        let xi = 0.01 * (1.0f64 / 0.01).powf(i as f64 / (side - 1) as f64);
        for j in 0..side {
            let t = 0.5 * (4.0f64 / 0.5).powf(j as f64 / (side - 1) as f64);
            let (v, _) = cont_multiplier(&[xi], &kernel, &body, &gamma, t, quad_level)?;
            let want = cubic_example_psi(xi, t);
            let err = (v - want).norm();
            report.push_stat(t, 0.0, i as u64, "psi_closed_form_err", err, 1e-6, err <= 1e-6);
        }
    }
    report.record_timing("closed_form", ms(t1));
    Ok(report)
}

/// `martingale-probe`: conditional-expectation axioms plus the oscillation
/// probe with its refinement-stability check.
pub fn martingale_probe(config: &Config, ctx: &RunContext) -> Result<Report, CliError> {
    let nodes = config.get_usize("nodes", 64)?;
    let spacing = config.get_f64("spacing", 0.5)?;
    let n_blocks = config.get_usize("n_blocks", 3)?;
    let trials = config.get_usize("trials", 20)?;

    let mut cfg = BTreeMap::new();
    cfg.insert("nodes".into(), nodes.to_string());
    cfg.insert("spacing".into(), spacing.to_string());
    cfg.insert("n_blocks".into(), n_blocks.to_string());
    cfg.insert("trials".into(), trials.to_string());
    echo_base(&mut cfg, ctx);
    let mut report = Report::new("martingale-probe", cfg);

    let a = DilationMatrix::from_weights(vec![1]).map_err(CliError::from)?;
    let system = ChristCubeSystem::binary(a, -6, 10).map_err(CliError::from)?;
    let levels = [0, 1, 2, 3, 4];
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);

    let t0 = Instant::now();
    let mut worst_idem: f64 = 0.0;
    let mut worst_tower: f64 = 0.0;
    let mut worst_contract: f64 = 0.0;
    for _ in 0..trials {
        let f = GridFunction::from_fn(vec![0.0], spacing, vec![nodes], |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .map_err(CliError::from)?;
        let e1 = conditional_expectation(&f, 1, &system)?;
        let e11 = conditional_expectation(&e1, 1, &system)?;
        let e2 = conditional_expectation(&f, 2, &system)?;
        let e21 = conditional_expectation(&e1, 2, &system)?;
        for i in 0..f.len() {
            worst_idem = worst_idem.max((e11.values()[i] - e1.values()[i]).norm());
            worst_tower = worst_tower.max((e21.values()[i] - e2.values()[i]).norm());
        }
        for p in [1.0, 2.0, f64::INFINITY] {
            let excess = e1.lp_norm(p)? - f.lp_norm(p)?;
            worst_contract = worst_contract.max(excess);
        }
    }
    report.record_timing("axioms", ms(t0));
    report.push_stat(0.0, 0.0, trials as u64, "idempotence_residual", worst_idem, 1e-12, worst_idem <= 1e-12);
    report.push_stat(0.0, 0.0, trials as u64, "tower_residual", worst_tower, 1e-12, worst_tower <= 1e-12);
    report.push_stat(0.0, 0.0, trials as u64, "contractivity_excess", worst_contract, 1e-12, worst_contract <= 1e-12);

    // oscillation probe vs exhaustive oracle and refinement stability
    let t1 = Instant::now();
    let coarse = GridFunction::from_fn(vec![0.0], spacing, vec![nodes], |x| {
        Complex64::new((0.37 * x[0]).sin() + 0.2 * (1.7 * x[0]).cos(), 0.0)
    })
    .map_err(CliError::from)?;
    let greedy = martingale_oscillation_probe(
        &coarse,
        &system,
        &levels,
        2.0,
        n_blocks,
        SearchStrategy::RandomRestarts { restarts: 50, seed: ctx.seed },
    )?;
    let exact = martingale_oscillation_probe(
        &coarse,
        &system,
        &levels,
        2.0,
        n_blocks,
        SearchStrategy::Exhaustive,
    )?;
    let gap = (exact.best_value - greedy.best_value).abs();
    report.push_stat(0.0, 2.0, n_blocks as u64, "probe_vs_exhaustive_gap", gap, 1e-9, gap <= 1e-9);

    let fine = GridFunction::from_fn(vec![0.0], spacing / 2.0, vec![2 * nodes], |x| {
        Complex64::new((0.37 * x[0]).sin() + 0.2 * (1.7 * x[0]).cos(), 0.0)
    })
    .map_err(CliError::from)?;
    let refined = martingale_oscillation_probe(
        &fine,
        &system,
        &levels,
        2.0,
        n_blocks,
        SearchStrategy::Exhaustive,
    )?;
    let drift = if exact.ratio > 0.0 {
        (refined.ratio / exact.ratio - 1.0).abs()
    } else {
        refined.ratio
    };
    report.record_timing("probe", ms(t1));
    report.push_stat(0.0, 2.0, n_blocks as u64, "refinement_drift", drift, 0.25, drift <= 0.25);

    // telescoping identity on random discrete instances
    let t2 = Instant::now();
    let kernel = make_hilbert_kernel();
    let body = ConvexBody::max_ball(1);
    let gamma = MultiIndexSet::one_dim(&[1]).map_err(CliError::from)?;
    let mut worst_tel: f64 = 0.0;
    for _ in 0..trials {
        let mut f = LatticeFunction::zeros(IntBox::centered(1, 4));
        for v in f.values_mut() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let pieces = telescoping_pieces(&f, &kernel, &body, &gamma, 2, 0, 4, ctx.budget_cells)?;
        let mut sum = LatticeFunction::zeros(pieces[0].bounds().clone());
        for piece in &pieces {
            sum = sum.add(piece)?;
        }
        let hi = discrete_radon_direct(&f, &kernel, &body, &gamma, 16.0, ctx.budget_cells)?;
        let lo = discrete_radon_direct(&f, &kernel, &body, &gamma, 1.0, ctx.budget_cells)?;
        let hi_e = restrict_to_box(&hi, sum.bounds())?;
        let lo_e = restrict_to_box(&lo, sum.bounds())?;
        let want = hi_e.add(&lo_e.scaled(Complex64::new(-1.0, 0.0)))?;
        worst_tel = worst_tel.max(sum.max_abs_diff(&want));
    }
    report.record_timing("telescoping", ms(t2));
    report.push_stat(0.0, 0.0, trials as u64, "telescoping_residual", worst_tel, 1e-12, worst_tel <= 1e-12);
    Ok(report)
}

/// `split-check`: empirical long/short split bound plus the projection
/// multiplier scan and shell partition identity.
pub fn split_check(config: &Config, ctx: &RunContext) -> Result<Report, CliError> {
    let families = config.get_usize("families", 1000)?;
    let grid_len = config.get_usize("grid_len", 16)?;
    let tau = config.get_f64("tau", 0.6)?;

    let mut cfg = BTreeMap::new();
    cfg.insert("families".into(), families.to_string());
    cfg.insert("grid_len".into(), grid_len.to_string());
    cfg.insert("tau".into(), tau.to_string());
    echo_base(&mut cfg, ctx);
    let mut report = Report::new("split-check", cfg);

    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let grid = TruncationGrid::log_spaced(1.0, 100.0, grid_len)?;
    let mut worst_c: f64 = 0.0;
    for _ in 0..families {
        let vals: Vec<Complex64> = (0..grid_len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let family = SampledFamily::new(grid.clone(), vec![vals.clone()])?;
        let split = long_short_split(&family, tau)?;
        let len = rng.random_range(2..=6.min(grid_len));
        let mut idx: Vec<usize> = (0..grid_len).collect();
        for i in 0..len {
            let j = rng.random_range(i..grid_len);
            idx.swap(i, j);
        }
        let mut idx: Vec<usize> = idx[..len].to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() < 2 {
            continue;
        }
        let seq = SequenceI::from_indices(&idx, &grid)?;
        let osc = oscillation_pointwise(&vals, &grid, &seq)?;
        let long_v2 = variation_pointwise(&split.long.values()[0], 2.0)?;
        let short_l2: f64 = split.short.iter().map(|b| b[0] * b[0]).sum::<f64>().sqrt();
        let rhs = long_v2 + short_l2;
        if rhs > 1e-12 {
            worst_c = worst_c.max(osc / rhs);
        }
    }
    report.record_timing("split", ms(t0));
    report.push_stat(0.0, 2.0, families as u64, "split_constant", worst_c, 4.0, worst_c <= 4.0);

    // projection multiplier scan
    let t1 = Instant::now();
    let iw = IWConfig::default_desk();
    let gamma = MultiIndexSet::one_dim(&[2]).map_err(CliError::from)?;
    let eta = BumpEta::new(1).map_err(CliError::from)?;
    let n = 64;
    let centers = major_arc_centers(n, &gamma, &iw, ctx.budget_cells)?;
    let mut min_v = f64::MAX;
    let mut max_v = f64::MIN;
    for i in 0..10_000 {
        let xi = i as f64 / 10_000.0;
        let v = projection_multiplier_with_set(&[xi], n, &gamma, &iw, &eta, &centers)?;
        min_v = min_v.min(v);
        max_v = max_v.max(v);
    }
    let mut center_dev: f64 = 0.0;
    for c in centers.points() {
        let v = projection_multiplier_with_set(&c.torus_coords(), n, &gamma, &iw, &eta, &centers)?;
        center_dev = center_dev.max((v - 1.0).abs());
    }
    report.record_timing("projection", ms(t1));
    report.push_stat(0.0, 0.0, 10_000, "projection_min", min_v, 0.0, min_v >= -1e-12);
    report.push_stat(0.0, 0.0, 10_000, "projection_max", max_v, 1.0, max_v <= 1.0 + 1e-12);
    report.push_stat(
        0.0,
        0.0,
        centers.len() as u64,
        "projection_center_dev",
        center_dev,
        1e-12,
        center_dev <= 1e-12,
    );

    // shell disjoint-union identity for u = 1, S ≤ 32
    let t2 = Instant::now();
    let full = iw_fractions(32, 1, &iw, ctx.budget_cells)?;
    let mut count = 0usize;
    let mut disjoint = true;
    let mut seen: std::collections::BTreeSet<RationalPoint> = std::collections::BTreeSet::new();
    let mut s = 2u64;
    while s <= 32 {
        let shell = shell_fractions(s, 1, &iw, ctx.budget_cells)?;
        for pt in shell.points() {
            if !seen.insert(pt.clone()) {
                disjoint = false;
            }
            count += 1;
        }
        s *= 2;
    }
    let union_ok = disjoint && count == full.len() && full.points().iter().all(|p| seen.contains(p));
    report.record_timing("shells", ms(t2));
    report.push_stat(
        32.0,
        0.0,
        count as u64,
        "shell_partition_exact",
        if union_ok { 1.0 } else { 0.0 },
        1.0,
        union_ok,
    );
    Ok(report)
}
