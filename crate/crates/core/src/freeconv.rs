//! Free additive convolution by subordination fixed-point iteration, n-fold
//! convolution by binary folding, and the exact atom calculus.
//!
//! For laws m1, m2 with reciprocal-shift functions H_j(u) = 1/G_j(u) - u, the
//! subordination pair (w1, w2) satisfies w2(z) = z + H1(w1(z)) and
//! w1(z) = z + H2(w2(z)); w2 is the attracting fixed point of
//! w -> z + H1(z + H2(w)) on the upper half-plane. The convolution transform
//! is G(z) = G_{m1}(w1(z)), inverted to a grid density.

use crate::measure::{linspace, Measure, MeasureError};
use crate::textio::fmt17;
use crate::transforms::cauchy_transform_c;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvolveError {
    #[error(
        "subordination failed to converge at {failed}/{total} grid points \
         (worst residual {worst_residual:.3e} at x = {worst_at})"
    )]
    NonConvergence {
        failed: usize,
        total: usize,
        worst_residual: f64,
        worst_at: f64,
    },
    #[error("Cauchy transform vanished on the iteration path at x = {at}")]
    ZeroDenominator { at: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Tuning knobs for [`free_convolve`].
#[derive(Debug, Clone)]
pub struct ConvolveOptions {
    /// Output window; defaults to the Minkowski sum of the input supports
    /// padded by 1 on each side (free convolution support is contained in
    /// the Minkowski sum).
    pub window: Option<(f64, f64)>,
    /// Output grid resolution.
    pub resolution: usize,
    /// Inversion offset; defaults to 4 * (window width) / resolution.
    pub eta: Option<f64>,
    /// Fixed-point residual tolerance (must be >= 1e-14).
    pub tol: f64,
    /// Iteration cap per grid point.
    pub max_iter: usize,
}

impl Default for ConvolveOptions {
    fn default() -> Self {
        Self {
            window: None,
            resolution: 2048,
            eta: None,
            tol: 1e-12,
            max_iter: 2000,
        }
    }
}

/// Per-grid-point record of the subordination solve.
#[derive(Debug, Clone)]
pub struct SubordinationResult {
    pub grid: Vec<f64>,
    pub eta: f64,
    pub omega1: Vec<Complex64>,
    pub omega2: Vec<Complex64>,
    pub iterations: Vec<u32>,
    pub residuals: Vec<f64>,
}

impl SubordinationResult {
    /// Convergence diagnostics as CSV (x, iterations, residual, im w1, im w2).
    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("x,iterations,residual,im_omega1,im_omega2\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt17(self.grid[i]),
                self.iterations[i],
                fmt17(self.residuals[i]),
                fmt17(self.omega1[i].im),
                fmt17(self.omega2[i].im)
            ));
        }
        out
    }

    /// Smallest Im w_j(z) - Im z margin over the grid (should be >= 0).
    pub fn worst_halfplane_margin(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for (w1, w2) in self.omega1.iter().zip(&self.omega2) {
            worst = worst.min(w1.im - self.eta).min(w2.im - self.eta);
        }
        worst
    }
}

/// Free convolution output: the recovered density plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct ConvolveOutput {
    pub measure: Measure,
    pub diagnostics: SubordinationResult,
    /// Trapezoidal mass of the raw inverted density before renormalization.
    pub raw_mass: f64,
}

const DAMPING_AFTER: usize = 200;
const DAMPING: f64 = 0.5;
/// Densities below this fraction of the peak are clipped to zero so that
/// smearing tails do not inflate the reported support.
const TAIL_CLIP: f64 = 1e-10;

struct PointSolve {
    omega1: Complex64,
    omega2: Complex64,
    g: Complex64,
    iterations: u32,
    residual: f64,
    zero_denominator: bool,
}

/// One fixed-point solve at z. The warm start from the neighbouring grid
/// point is usually excellent, but it traps the iterate when the
/// subordination map has a pole between the two abscissas (spectral gaps,
/// where the convolution transform crosses zero); a cold restart from
/// z + i recovers those points, and the better of the two runs wins.
fn solve_point(
    m1: &Measure,
    m2: &Measure,
    z: Complex64,
    w0: Complex64,
    tol: f64,
    max_iter: usize,
) -> PointSolve {
    let warm_budget = max_iter.min(600);
    let warm = solve_point_from(m1, m2, z, w0, tol, warm_budget);
    if warm.residual < tol || warm.zero_denominator {
        return warm;
    }
    let cold_start = z + Complex64::i();
    let mut cold = solve_point_from(m1, m2, z, cold_start, tol, max_iter - warm_budget);
    cold.iterations += warm.iterations;
    if cold.residual <= warm.residual || cold.zero_denominator {
        cold
    } else {
        warm
    }
}

fn solve_point_from(
    m1: &Measure,
    m2: &Measure,
    z: Complex64,
    w0: Complex64,
    tol: f64,
    max_iter: usize,
) -> PointSolve {
    let floor = 1e-14 * z.im.max(1.0);
    let lift = |u: Complex64| {
        if u.im > floor {
            u
        } else {
            Complex64::new(u.re, floor)
        }
    };
    let zero_denominator = std::cell::Cell::new(false);
    let shift = |m: &Measure, u: Complex64| -> Complex64 {
        let g = cauchy_transform_c(m, lift(u));
        if g.norm_sqr() < 1e-280 {
            zero_denominator.set(true);
            return Complex64::new(0.0, 0.0);
        }
        1.0 / g - u
    };
    let step = |w: Complex64| z + shift(m1, z + shift(m2, w));
    let mut w = if w0.im > z.im { w0 } else { z + Complex64::i() };
    let mut residual = f64::INFINITY;
    let mut iterations = 0u32;
    for it in 0..max_iter {
        let next = step(w);
        if zero_denominator.get() {
            break;
        }
        residual = (next - w).norm();
        iterations = it as u32 + 1;
        if residual < tol {
            w = next;
            break;
        }
        w = if it >= DAMPING_AFTER {
            w + DAMPING * (next - w)
        } else {
            next
        };
        // Rescue for near-neutral fixed points (spectral edges; atom-mass
        // pairs summing to ~1), where plain iteration decays like 1/k:
        // one vector-extrapolation step on a fresh iterate triple, accepted
        // only when it strictly reduces the residual and stays in the
        // half-plane.
        if it >= 256 && it % 128 == 0 {
            let a1 = step(w);
            let a2 = step(a1);
            if zero_denominator.get() {
                break;
            }
            let d1 = a1 - w;
            let d2 = a2 - a1;
            let denom = d2 - d1;
            if denom.norm_sqr() > 1e-300 {
                let cand = w - d1 * d1 / denom;
                if cand.im > floor {
                    let probe = step(cand);
                    if zero_denominator.get() {
                        break;
                    }
                    let cand_residual = (probe - cand).norm();
                    if cand_residual < (a2 - a1).norm() {
                        w = cand;
                        residual = cand_residual;
                        if residual < tol {
                            break;
                        }
                        continue;
                    }
                }
            }
            w = a2;
            residual = (a2 - a1).norm();
            if residual < tol {
                break;
            }
        }
    }
    let omega2 = w;
    let omega1 = z + shift(m2, omega2);
    let g = cauchy_transform_c(m1, lift(omega1));
    PointSolve {
        omega1,
        omega2,
        g,
        iterations,
        residual,
        zero_denominator: zero_denominator.get(),
    }
}

/// Default output window: Minkowski sum of the supports, padded by 1.
pub fn default_window(m1: &Measure, m2: &Measure) -> (f64, f64) {
    let (a1, b1) = m1.support_interval();
    let (a2, b2) = m2.support_interval();
    (a1 + a2 - 1.0, b1 + b2 + 1.0)
}

/// Free additive convolution of two laws with finite second moment.
///
/// Fails when more than 1% of grid points miss the residual tolerance, or
/// when the transform vanishes on the iteration path.
pub fn free_convolve(
    m1: &Measure,
    m2: &Measure,
    opts: &ConvolveOptions,
) -> Result<ConvolveOutput, ConvolveError> {
    if opts.tol < 1e-14 {
        return Err(ConvolveError::Precondition(format!(
            "tol {} < 1e-14",
            opts.tol
        )));
    }
    if opts.resolution < 8 {
        return Err(ConvolveError::Precondition(format!(
            "resolution {} < 8",
            opts.resolution
        )));
    }
    if opts.max_iter == 0 {
        return Err(ConvolveError::Precondition("max_iter = 0".into()));
    }
    let window = opts.window.unwrap_or_else(|| default_window(m1, m2));
    if !(window.0 < window.1) {
        return Err(ConvolveError::Precondition(format!(
            "window {window:?} is empty"
        )));
    }
    let width = window.1 - window.0;
    let eta = opts
        .eta
        .unwrap_or(4.0 * width / opts.resolution as f64)
        .max(1.0000001e-6);
    let grid = linspace(window.0, window.1, opts.resolution);

    // Independent solves per z; chunked so warm starts stay sequential
    // within a chunk while chunks run concurrently.
    let chunk = 64usize;
    let solves: Vec<PointSolve> = grid
        .par_chunks(chunk)
        .flat_map_iter(|xs| {
            let mut out = Vec::with_capacity(xs.len());
            let mut warm = Complex64::new(xs[0], eta) + Complex64::i();
            for &x in xs {
                let z = Complex64::new(x, eta);
                let s = solve_point(m1, m2, z, warm, opts.tol, opts.max_iter);
                warm = s.omega2;
                out.push(s);
            }
            out
        })
        .collect();

    if let Some(idx) = solves.iter().position(|s| s.zero_denominator) {
        return Err(ConvolveError::ZeroDenominator { at: grid[idx] });
    }

    let total = grid.len();
    let mut failed = 0usize;
    let mut worst_residual: f64 = 0.0;
    let mut worst_at = grid[0];
    for (i, s) in solves.iter().enumerate() {
        let halfplane_ok = s.omega1.im >= eta - 1e-9 && s.omega2.im >= eta - 1e-9;
        if s.residual >= opts.tol || !halfplane_ok {
            failed += 1;
            if s.residual > worst_residual {
                worst_residual = s.residual;
                worst_at = grid[i];
            }
        }
    }
    if failed * 100 > total {
        return Err(ConvolveError::NonConvergence {
            failed,
            total,
            worst_residual,
            worst_at,
        });
    }

    let mut density: Vec<f64> = solves
        .iter()
        .map(|s| (-s.g.im / std::f64::consts::PI).max(0.0))
        .collect();
    let peak = density.iter().cloned().fold(0.0, f64::max);
    // Everything outside the Minkowski sum of the input supports is pure
    // smearing artifact (the convolution support is contained in it). The
    // margin keeps the bumps of atoms sitting on the Minkowski corners
    // essentially intact at small eta while still removing the heavy
    // Cauchy dust in the padding at the default eta.
    let (a1, b1) = m1.support_interval();
    let (a2, b2) = m2.support_interval();
    let margin = (10.0 * eta).max(0.03 * width);
    let (true_lo, true_hi) = (a1 + a2 - margin, b1 + b2 + margin);
    for (i, d) in density.iter_mut().enumerate() {
        if *d < peak * TAIL_CLIP || grid[i] < true_lo || grid[i] > true_hi {
            *d = 0.0;
        }
    }
    let mut raw_mass = 0.0;
    for i in 1..grid.len() {
        raw_mass += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
    }
    let measure = Measure::grid_density(grid.clone(), density)?;

    let diagnostics = SubordinationResult {
        grid,
        eta,
        omega1: solves.iter().map(|s| s.omega1).collect(),
        omega2: solves.iter().map(|s| s.omega2).collect(),
        iterations: solves.iter().map(|s| s.iterations).collect(),
        residuals: solves.iter().map(|s| s.residual).collect(),
    };
    Ok(ConvolveOutput {
        measure,
        diagnostics,
        raw_mass,
    })
}

/// Options for the n-fold free central limit construction.
#[derive(Debug, Clone)]
pub struct CltOptions {
    /// Grid resolution of intermediate and final densities.
    pub resolution: usize,
    /// Resolution of the first (atomic-input) convolution, which must
    /// resolve inverse-square-root edges; coarsened afterwards.
    pub first_level_resolution: usize,
    /// Iteration budget for the first level. Atomic transforms cost O(1)
    /// per step, while the thin slow band hugging each spectral edge needs
    /// budgets well beyond the later grid-input levels.
    pub first_level_max_iter: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CltOptions {
    fn default() -> Self {
        Self {
            resolution: 4096,
            first_level_resolution: 32768,
            first_level_max_iter: 60_000,
            tol: 1e-9,
            max_iter: 4000,
        }
    }
}

/// Window policy for iterated folds: quantile-trimmed support, so the
/// smearing tails of intermediate grid densities do not inflate the
/// Minkowski window geometrically in the number of levels.
fn effective_support(m: &Measure) -> (f64, f64) {
    match m {
        Measure::GridDensity(_) => (m.quantile(5e-4), m.quantile(1.0 - 5e-4)),
        _ => m.support_interval(),
    }
}

fn fold_convolve(
    m1: &Measure,
    m2: &Measure,
    resolution: usize,
    eta_pitch: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Measure, ConvolveError> {
    let (a1, b1) = effective_support(m1);
    let (a2, b2) = effective_support(m2);
    let window = (a1 + a2 - 1.0, b1 + b2 + 1.0);
    let width = window.1 - window.0;
    let opts = ConvolveOptions {
        window: Some(window),
        resolution,
        eta: Some((eta_pitch * width / resolution as f64).max(1.0000001e-6)),
        tol,
        max_iter,
    };
    Ok(free_convolve(m1, m2, &opts)?.measure)
}

/// Re-grids a density onto `resolution` nodes over its effective support.
/// Mass-conserving: each node receives the CDF mass of its Voronoi cell, so
/// features narrower than the target pitch (smeared atom bumps) keep their
/// exact mass instead of being aliased by pointwise sampling.
fn coarsen(m: &Measure, resolution: usize) -> Result<Measure, ConvolveError> {
    let (lo, hi) = effective_support(m);
    let grid = linspace(lo, hi, resolution);
    let h = grid[1] - grid[0];
    let n = grid.len();
    let mut density = vec![0.0; n];
    for (i, d) in density.iter_mut().enumerate() {
        let (mass, weight) = if i == 0 {
            (m.cdf(lo + 0.5 * h), 0.5 * h)
        } else if i == n - 1 {
            (1.0 - m.cdf(hi - 0.5 * h), 0.5 * h)
        } else {
            (
                m.cdf(grid[i] + 0.5 * h) - m.cdf(grid[i] - 0.5 * h),
                h,
            )
        };
        *d = (mass / weight).max(0.0);
    }
    Ok(Measure::grid_density(grid, density)?)
}

/// Distribution of the normalized free sum of `n` copies of `base`:
/// the n-fold free convolution power dilated by 1/sqrt(n). `base` must be
/// centered with unit variance (checked to 1e-8); n <= 4096.
///
/// The power is computed by binary folding (log2 n convolutions along the
/// squaring chain), which halves accumulated inversion smearing relative to
/// a sequential fold.
pub fn free_clt_distribution(
    base: &Measure,
    n: u32,
    opts: &CltOptions,
) -> Result<Measure, ConvolveError> {
    let mut out = free_clt_series(base, &[n], opts)?;
    Ok(out.pop().expect("one requested size").1)
}

/// Normalized free-sum distributions for several sample sizes at once,
/// sharing one squaring ladder across all of them.
pub fn free_clt_series(
    base: &Measure,
    sizes: &[u32],
    opts: &CltOptions,
) -> Result<Vec<(u32, Measure)>, ConvolveError> {
    if sizes.is_empty() {
        return Err(ConvolveError::Precondition("no sample sizes given".into()));
    }
    for &n in sizes {
        if !(2..=4096).contains(&n) {
            return Err(ConvolveError::Precondition(format!(
                "n = {n} outside 2..=4096"
            )));
        }
    }
    let mean = base.mean();
    let var = base.variance();
    if mean.abs() > 1e-8 {
        return Err(ConvolveError::Precondition(format!(
            "base mean {mean:e} != 0"
        )));
    }
    if (var - 1.0).abs() > 1e-8 {
        return Err(ConvolveError::Precondition(format!(
            "base variance {var} != 1"
        )));
    }

    // Shared ladder of 2^k-fold powers; ladder[0] = base.
    let max_n = *sizes.iter().max().expect("non-empty");
    let levels = 32 - max_n.leading_zeros() - 1;
    let mut ladder: Vec<Measure> = vec![base.clone()];
    for level in 0..levels {
        let prev = &ladder[level as usize];
        let next = if level == 0 {
            // Atomic inputs: cheap transform, fine grid for the
            // inverse-square-root edges, then a mass-conserving re-grid.
            let fine = fold_convolve(
                prev,
                prev,
                opts.first_level_resolution,
                1.0,
                opts.tol,
                opts.first_level_max_iter,
            )?;
            coarsen(&fine, opts.resolution)?
        } else {
            fold_convolve(prev, prev, opts.resolution, 2.0, opts.tol, opts.max_iter)?
        };
        ladder.push(next);
    }

    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        // Combine ladder entries along the binary expansion of n.
        let mut result: Option<Measure> = None;
        for bit in 0..=levels {
            if n & (1 << bit) != 0 {
                let power = &ladder[bit as usize];
                result = Some(match result {
                    None => power.clone(),
                    Some(r) => fold_convolve(
                        &r,
                        power,
                        opts.resolution,
                        2.0,
                        opts.tol,
                        opts.max_iter,
                    )?,
                });
            }
        }
        let power_n = result.expect("n >= 2");
        out.push((n, power_n.dilate(1.0 / (n as f64).sqrt())?));
    }
    Ok(out)
}

/// Atoms of a (sub-)probability measure: distinct locations with masses in
/// (0, 1], total mass at most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomList {
    entries: Vec<(f64, f64)>,
}

impl AtomList {
    pub fn new(mut entries: Vec<(f64, f64)>) -> Result<Self, MeasureError> {
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(MeasureError::InvalidParameter {
                what: "atom locations must be distinct".into(),
            });
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if entries.iter().any(|e| !(e.1 > 0.0 && e.1 <= 1.0)) || total > 1.0 + 1e-12 {
            return Err(MeasureError::InvalidParameter {
                what: format!("atom masses must lie in (0,1] and sum to <= 1 (sum {total})"),
            });
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn from_measure(m: &Measure) -> Self {
        Self { entries: m.atoms() }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// Exact atom calculus of the free convolution: gamma = alpha + beta is an
/// atom of m1 ⊞ m2 precisely when m1({alpha}) + m2({beta}) > 1, with mass
/// m1({alpha}) + m2({beta}) - 1.
pub fn convolution_atoms(a1: &AtomList, a2: &AtomList) -> AtomList {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &(alpha, ma) in &a1.entries {
        for &(beta, mb) in &a2.entries {
            let mass = ma + mb - 1.0;
            if mass > 0.0 {
                out.push((alpha + beta, mass));
            }
        }
    }
    // Distinctness of the output locations is automatic: two qualifying
    // pairs cannot share a coordinate without exceeding total mass 1.
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    debug_assert!(out.windows(2).all(|w| w[0].0 < w[1].0));
    AtomList { entries: out }
}

/// Left fold of [`convolution_atoms`] over n copies.
pub fn nfold_atoms(a: &AtomList, n: u32) -> AtomList {
    assert!(n >= 2, "nfold_atoms needs n >= 2");
    let mut acc = a.clone();
    for _ in 1..n {
        acc = convolution_atoms(&acc, a);
        if acc.is_empty() {
            return acc;
        }
    }
    acc
}
