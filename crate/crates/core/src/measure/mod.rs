//! Probability measures on the real line in five canonical representations.
//!
//! All measures are immutable after construction and validated at
//! construction time; every operation on them is a pure function, so values
//! can be shared freely across threads.

mod kolmogorov;
mod serialize;

pub use kolmogorov::{kolmogorov_distance, kolmogorov_distance_detailed, KolmogorovDistance};

use crate::quad::integrate_gl;
use rand::Rng;
use thiserror::Error;

/// Mass-normalization slack accepted for atomic and empirical measures.
pub const MASS_TOL: f64 = 1e-12;

/// Trapezoidal-mass slack guaranteed by grid densities after construction.
pub const GRID_MASS_TOL: f64 = 1e-9;

/// Largest moment degree served for density-backed variants.
pub const MAX_MOMENT_DEGREE: u32 = 16;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("{context}: values must be strictly increasing")]
    NotIncreasing { context: &'static str },
    #[error("masses must be positive and sum to 1 within {MASS_TOL} (got sum {sum})")]
    MassNotNormalized { sum: f64 },
    #[error("negative density value at index {index}")]
    NegativeDensity { index: usize },
    #[error("total mass must be positive and finite (got {mass})")]
    BadTotalMass { mass: f64 },
    #[error("{context}: empty input")]
    Empty { context: &'static str },
    #[error("{context}: non-finite value encountered")]
    NonFinite { context: &'static str },
    #[error("invalid parameter: {what}")]
    InvalidParameter { what: String },
    #[error("moment degree {degree} exceeds the supported cap {MAX_MOMENT_DEGREE}")]
    DegreeTooLarge { degree: u32 },
    #[error("dilation scale must be non-zero")]
    ZeroScale,
    #[error("operation not representable for this variant: {what}")]
    Unrepresentable { what: String },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Grid-density payload: piecewise-linear density on a strictly increasing
/// grid, renormalized to unit trapezoidal mass at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
    /// Cumulative trapezoidal mass at each grid node; `cum[0] == 0`,
    /// `cum[last] == 1`.
    cum: Vec<f64>,
}

impl GridDensity {
    fn new(grid: Vec<f64>, mut density: Vec<f64>) -> Result<Self, MeasureError> {
        if grid.len() < 2 {
            return Err(MeasureError::Empty {
                context: "grid density",
            });
        }
        if grid.len() != density.len() {
            return Err(MeasureError::InvalidParameter {
                what: format!(
                    "grid ({}) and density ({}) lengths differ",
                    grid.len(),
                    density.len()
                ),
            });
        }
        if grid.iter().any(|x| !x.is_finite()) || density.iter().any(|d| !d.is_finite()) {
            return Err(MeasureError::NonFinite {
                context: "grid density",
            });
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MeasureError::NotIncreasing {
                context: "grid density",
            });
        }
        if let Some(index) = density.iter().position(|&d| d < 0.0) {
            return Err(MeasureError::NegativeDensity { index });
        }
        let mut mass = 0.0;
        for i in 1..grid.len() {
            mass += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(MeasureError::BadTotalMass { mass });
        }
        // Stieltjes-inversion output carries an O(eta) mass defect, so the
        // constructor renormalizes instead of erroring on drift. Skipping the
        // division when the mass is already 1 to rounding keeps construction
        // idempotent, so serialized measures round-trip bit-exactly.
        if (mass - 1.0).abs() > 1e-13 {
            for d in density.iter_mut() {
                *d /= mass;
            }
        }
        let mut cum = Vec::with_capacity(grid.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 1..grid.len() {
            acc += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
            cum.push(acc);
        }
        let last = *cum.last().unwrap();
        debug_assert!((last - 1.0).abs() <= GRID_MASS_TOL);
        for c in cum.iter_mut() {
            *c /= last;
        }
        Ok(Self { grid, density, cum })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Finds the cell index i with grid[i] <= x < grid[i+1].
    fn cell_of(&self, x: f64) -> Option<usize> {
        if x < self.grid[0] || x >= *self.grid.last().unwrap() {
            return None;
        }
        let i = self.grid.partition_point(|&g| g <= x);
        Some(i - 1)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x < self.grid[0] {
            return 0.0;
        }
        let Some(i) = self.cell_of(x) else {
            return 1.0;
        };
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let (d0, d1) = (self.density[i], self.density[i + 1]);
        let h = x1 - x0;
        let t = x - x0;
        let partial = d0 * t + 0.5 * (d1 - d0) * t * t / h;
        (self.cum[i] + partial).min(1.0)
    }

    fn density_at(&self, x: f64) -> f64 {
        match self.cell_of(x) {
            None => {
                if x == *self.grid.last().unwrap() {
                    *self.density.last().unwrap()
                } else {
                    0.0
                }
            }
            Some(i) => {
                let (x0, x1) = (self.grid[i], self.grid[i + 1]);
                let w = (x - x0) / (x1 - x0);
                self.density[i] * (1.0 - w) + self.density[i + 1] * w
            }
        }
    }

    /// Exact integral of x^k against the stored linear interpolant.
    fn moment(&self, k: u32) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            let (x0, x1) = (self.grid[i - 1], self.grid[i]);
            let (d0, d1) = (self.density[i - 1], self.density[i]);
            let h = x1 - x0;
            // density(t) = alpha + beta t on the cell
            let beta = (d1 - d0) / h;
            let alpha = d0 - beta * x0;
            let p1 = (x1.powi(k as i32 + 1) - x0.powi(k as i32 + 1)) / (k as f64 + 1.0);
            let p2 = (x1.powi(k as i32 + 2) - x0.powi(k as i32 + 2)) / (k as f64 + 2.0);
            acc += alpha * p1 + beta * p2;
        }
        acc
    }

    /// Smallest interval of grid nodes outside which the density vanishes.
    fn support(&self) -> (f64, f64) {
        let n = self.grid.len();
        let mut lo = 0;
        while lo + 1 < n && self.density[lo] == 0.0 && self.density[lo + 1] == 0.0 {
            lo += 1;
        }
        let mut hi = n - 1;
        while hi > lo + 1 && self.density[hi] == 0.0 && self.density[hi - 1] == 0.0 {
            hi -= 1;
        }
        (self.grid[lo], self.grid[hi])
    }
}

/// A probability law on the real line.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    /// Finitely many atoms at strictly increasing points.
    Atomic { points: Vec<f64>, masses: Vec<f64> },
    /// Piecewise-linear density on a grid.
    GridDensity(GridDensity),
    /// Uniform mass 1/n on n sorted sample values.
    Empirical { samples: Vec<f64> },
    /// Semicircle law with variance sigma^2 (support [-2 sigma, 2 sigma]).
    Semicircle { variance: f64 },
    /// Free Poisson (Marchenko-Pastur) law with given rate and jump size.
    FreePoisson { rate: f64, jump: f64 },
}

impl Measure {
    pub fn atomic(points: Vec<f64>, masses: Vec<f64>) -> Result<Self, MeasureError> {
        if points.is_empty() || points.len() != masses.len() {
            return Err(MeasureError::Empty { context: "atomic" });
        }
        if points.iter().chain(masses.iter()).any(|x| !x.is_finite()) {
            return Err(MeasureError::NonFinite { context: "atomic" });
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MeasureError::NotIncreasing { context: "atomic" });
        }
        let sum: f64 = masses.iter().sum();
        if masses.iter().any(|&m| m <= 0.0) || (sum - 1.0).abs() > MASS_TOL {
            return Err(MeasureError::MassNotNormalized { sum });
        }
        Ok(Measure::Atomic { points, masses })
    }

    /// Point mass at `a`.
    pub fn dirac(a: f64) -> Self {
        Measure::Atomic {
            points: vec![a],
            masses: vec![1.0],
        }
    }

    pub fn grid_density(grid: Vec<f64>, density: Vec<f64>) -> Result<Self, MeasureError> {
        Ok(Measure::GridDensity(GridDensity::new(grid, density)?))
    }

    pub fn empirical(mut samples: Vec<f64>) -> Result<Self, MeasureError> {
        if samples.is_empty() {
            return Err(MeasureError::Empty {
                context: "empirical",
            });
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(MeasureError::NonFinite {
                context: "empirical",
            });
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Measure::Empirical { samples })
    }

    pub fn semicircle(variance: f64) -> Result<Self, MeasureError> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(MeasureError::InvalidParameter {
                what: format!("semicircle variance must be positive (got {variance})"),
            });
        }
        Ok(Measure::Semicircle { variance })
    }

    /// The standard semicircle law (variance 1, support [-2, 2]).
    pub fn standard_semicircle() -> Self {
        Measure::Semicircle { variance: 1.0 }
    }

    pub fn free_poisson(rate: f64, jump: f64) -> Result<Self, MeasureError> {
        if !(rate.is_finite() && rate > 0.0 && jump.is_finite() && jump > 0.0) {
            return Err(MeasureError::InvalidParameter {
                what: format!("free Poisson rate/jump must be positive (got {rate}, {jump})"),
            });
        }
        Ok(Measure::FreePoisson { rate, jump })
    }

    /// Right-continuous distribution function F(x) = mu((-inf, x]).
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Measure::Atomic { points, masses } => {
                let k = points.partition_point(|&p| p <= x);
                masses[..k].iter().sum()
            }
            Measure::GridDensity(g) => g.cdf(x),
            Measure::Empirical { samples } => {
                samples.partition_point(|&s| s <= x) as f64 / samples.len() as f64
            }
            Measure::Semicircle { variance } => semicircle_cdf(x, *variance),
            Measure::FreePoisson { rate, jump } => free_poisson_cdf(x, *rate, *jump),
        }
    }

    /// Left limit F(x-) = mu((-inf, x)).
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Measure::Atomic { points, masses } => {
                let k = points.partition_point(|&p| p < x);
                masses[..k].iter().sum()
            }
            Measure::Empirical { samples } => {
                samples.partition_point(|&s| s < x) as f64 / samples.len() as f64
            }
            Measure::FreePoisson { rate, .. } if *rate < 1.0 && x == 0.0 => 0.0,
            _ => self.cdf(x),
        }
    }

    /// Density at x for variants that carry one (zero elsewhere).
    /// Atoms are not reflected here.
    pub fn density_at(&self, x: f64) -> f64 {
        match self {
            Measure::Atomic { .. } | Measure::Empirical { .. } => 0.0,
            Measure::GridDensity(g) => g.density_at(x),
            Measure::Semicircle { variance } => semicircle_density(x, *variance),
            Measure::FreePoisson { rate, jump } => free_poisson_density(x, *rate, *jump),
        }
    }

    /// k-th raw moment. Exact for atomic/empirical variants; quadrature at
    /// better than 1e-10 relative accuracy for density variants (k <= 16).
    pub fn moment(&self, k: u32) -> Result<f64, MeasureError> {
        if k == 0 {
            return Ok(1.0);
        }
        if k > MAX_MOMENT_DEGREE {
            return Err(MeasureError::DegreeTooLarge { degree: k });
        }
        Ok(match self {
            Measure::Atomic { points, masses } => points
                .iter()
                .zip(masses)
                .map(|(&p, &m)| m * p.powi(k as i32))
                .sum(),
            Measure::Empirical { samples } => {
                samples.iter().map(|&s| s.powi(k as i32)).sum::<f64>() / samples.len() as f64
            }
            Measure::GridDensity(g) => g.moment(k),
            Measure::Semicircle { variance } => semicircle_moment(k, *variance),
            Measure::FreePoisson { rate, jump } => free_poisson_moment(k, *rate, *jump),
        })
    }

    /// Absolute moment E|X|^k, same accuracy contract as [`Measure::moment`].
    pub fn abs_moment(&self, k: u32) -> Result<f64, MeasureError> {
        if k > MAX_MOMENT_DEGREE {
            return Err(MeasureError::DegreeTooLarge { degree: k });
        }
        Ok(match self {
            Measure::Atomic { points, masses } => points
                .iter()
                .zip(masses)
                .map(|(&p, &m)| m * p.abs().powi(k as i32))
                .sum(),
            Measure::Empirical { samples } => {
                samples.iter().map(|&s| s.abs().powi(k as i32)).sum::<f64>()
                    / samples.len() as f64
            }
            Measure::GridDensity(g) => {
                // Split at zero so each side is a polynomial integral.
                let mut acc = 0.0;
                for i in 1..g.grid.len() {
                    let (x0, x1) = (g.grid[i - 1], g.grid[i]);
                    let (d0, d1) = (g.density[i - 1], g.density[i]);
                    acc += abs_power_cell(x0, x1, d0, d1, k);
                }
                acc
            }
            Measure::Semicircle { variance } => semicircle_abs_moment(k, *variance),
            Measure::FreePoisson { rate, jump } => {
                // Support is non-negative.
                free_poisson_moment(k, *rate, *jump)
            }
        })
    }

    pub fn mean(&self) -> f64 {
        self.moment(1).expect("degree 1 is always available")
    }

    pub fn variance(&self) -> f64 {
        let m1 = self.mean();
        self.moment(2).expect("degree 2 is always available") - m1 * m1
    }

    /// Smallest closed interval carrying all mass.
    pub fn support_interval(&self) -> (f64, f64) {
        match self {
            Measure::Atomic { points, .. } => (points[0], *points.last().unwrap()),
            Measure::Empirical { samples } => (samples[0], *samples.last().unwrap()),
            Measure::GridDensity(g) => g.support(),
            Measure::Semicircle { variance } => {
                let r = 2.0 * variance.sqrt();
                (-r, r)
            }
            Measure::FreePoisson { rate, jump } => {
                let (a, b) = free_poisson_edges(*rate, *jump);
                if *rate < 1.0 {
                    (0.0, b)
                } else {
                    (a, b)
                }
            }
        }
    }

    /// Law of c X for X distributed as `self`. Moments scale as c^k.
    pub fn dilate(&self, c: f64) -> Result<Measure, MeasureError> {
        if c == 0.0 || !c.is_finite() {
            return Err(MeasureError::ZeroScale);
        }
        Ok(match self {
            Measure::Atomic { points, masses } => {
                let mut pairs: Vec<(f64, f64)> = points
                    .iter()
                    .zip(masses)
                    .map(|(&p, &m)| (c * p, m))
                    .collect();
                pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                Measure::Atomic {
                    points: pairs.iter().map(|p| p.0).collect(),
                    masses: pairs.iter().map(|p| p.1).collect(),
                }
            }
            Measure::Empirical { samples } => {
                let mut s: Vec<f64> = samples.iter().map(|&x| c * x).collect();
                s.sort_by(|a, b| a.partial_cmp(b).unwrap());
                Measure::Empirical { samples: s }
            }
            Measure::GridDensity(g) => {
                let mut pairs: Vec<(f64, f64)> = g
                    .grid
                    .iter()
                    .zip(&g.density)
                    .map(|(&x, &d)| (c * x, d / c.abs()))
                    .collect();
                if c < 0.0 {
                    pairs.reverse();
                }
                Measure::GridDensity(GridDensity::new(
                    pairs.iter().map(|p| p.0).collect(),
                    pairs.iter().map(|p| p.1).collect(),
                )?)
            }
            // The semicircle law is symmetric, so only |c| matters.
            Measure::Semicircle { variance } => Measure::Semicircle {
                variance: variance * c * c,
            },
            Measure::FreePoisson { rate, jump } => {
                if c > 0.0 {
                    Measure::FreePoisson {
                        rate: *rate,
                        jump: jump * c,
                    }
                } else if *rate >= 1.0 {
                    // No atom: materialize the reflected density on a grid.
                    self.to_grid(4097)?.dilate(c)?
                } else {
                    return Err(MeasureError::Unrepresentable {
                        what: "negative dilation of a free Poisson law with an atom".into(),
                    });
                }
            }
        })
    }

    /// Law of X + a.
    pub fn shift(&self, a: f64) -> Result<Measure, MeasureError> {
        if !a.is_finite() {
            return Err(MeasureError::NonFinite { context: "shift" });
        }
        if a == 0.0 {
            return Ok(self.clone());
        }
        Ok(match self {
            Measure::Atomic { points, masses } => Measure::Atomic {
                points: points.iter().map(|&p| p + a).collect(),
                masses: masses.clone(),
            },
            Measure::Empirical { samples } => Measure::Empirical {
                samples: samples.iter().map(|&s| s + a).collect(),
            },
            Measure::GridDensity(g) => Measure::GridDensity(GridDensity::new(
                g.grid.iter().map(|&x| x + a).collect(),
                g.density.clone(),
            )?),
            Measure::Semicircle { .. } | Measure::FreePoisson { .. } => {
                self.to_grid(8193)?.shift(a)?
            }
        })
    }

    /// Materializes a density variant on an equispaced grid of `resolution`
    /// nodes over its support. Errors for purely atomic variants and for
    /// laws whose density is unbounded (free Poisson with rate <= 1, whose
    /// density or atom cannot be carried by a finite grid).
    pub fn to_grid(&self, resolution: usize) -> Result<Measure, MeasureError> {
        if resolution < 8 {
            return Err(MeasureError::InvalidParameter {
                what: format!("grid resolution {resolution} < 8"),
            });
        }
        match self {
            Measure::GridDensity(_) => Ok(self.clone()),
            Measure::Semicircle { .. } => {
                let (lo, hi) = self.support_interval();
                let grid = linspace(lo, hi, resolution);
                let density = grid.iter().map(|&x| self.density_at(x)).collect();
                Measure::grid_density(grid, density)
            }
            Measure::FreePoisson { rate, .. } => {
                if *rate <= 1.0 {
                    return Err(MeasureError::Unrepresentable {
                        what: "free Poisson with rate <= 1 has an atom or unbounded density"
                            .into(),
                    });
                }
                let (lo, hi) = self.support_interval();
                let grid = linspace(lo, hi, resolution);
                let density = grid.iter().map(|&x| self.density_at(x)).collect();
                Measure::grid_density(grid, density)
            }
            _ => Err(MeasureError::Unrepresentable {
                what: "cannot materialize an atomic measure as a density".into(),
            }),
        }
    }

    /// Atoms of the law as (location, mass) pairs in increasing order.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Measure::Atomic { points, masses } => {
                points.iter().copied().zip(masses.iter().copied()).collect()
            }
            Measure::Empirical { samples } => {
                let n = samples.len() as f64;
                let mut out: Vec<(f64, f64)> = Vec::new();
                for &s in samples {
                    match out.last_mut() {
                        Some((p, m)) if *p == s => *m += 1.0 / n,
                        _ => out.push((s, 1.0 / n)),
                    }
                }
                out
            }
            Measure::FreePoisson { rate, .. } if *rate < 1.0 => vec![(0.0, 1.0 - rate)],
            _ => Vec::new(),
        }
    }

    /// Quantile function: smallest x with F(x) >= p, by monotone bisection
    /// with 1e-12 bracket width.
    pub fn quantile(&self, p: f64) -> f64 {
        let (lo, hi) = self.support_interval();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        let (mut lo, mut hi) = (lo - 1.0, hi + 1.0);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Draws one value. Atomic/empirical variants sample directly; density
    /// variants invert the CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Measure::Atomic { points, masses } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (&p, &m) in points.iter().zip(masses) {
                    acc += m;
                    if u <= acc {
                        return p;
                    }
                }
                *points.last().unwrap()
            }
            Measure::Empirical { samples } => samples[rng.gen_range(0..samples.len())],
            _ => self.quantile(rng.gen()),
        }
    }

    /// Natural evaluation nodes used when a sup over x must be discretized.
    pub(crate) fn natural_nodes(&self, fallback_resolution: usize) -> Vec<f64> {
        match self {
            Measure::Atomic { points, .. } => points.clone(),
            Measure::Empirical { samples } => samples.clone(),
            Measure::GridDensity(g) => g.grid.clone(),
            _ => {
                let (lo, hi) = self.support_interval();
                linspace(lo, hi, fallback_resolution)
            }
        }
    }
}

/// Equispaced grid with `n` nodes from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    let h = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
    v[n - 1] = hi;
    v
}

fn semicircle_density(x: f64, variance: f64) -> f64 {
    let r2 = 4.0 * variance;
    if x * x >= r2 {
        return 0.0;
    }
    (r2 - x * x).sqrt() / (2.0 * std::f64::consts::PI * variance)
}

fn semicircle_cdf(x: f64, variance: f64) -> f64 {
    let s = variance.sqrt();
    if x <= -2.0 * s {
        return 0.0;
    }
    if x >= 2.0 * s {
        return 1.0;
    }
    let pi = std::f64::consts::PI;
    0.5 + x * (4.0 * variance - x * x).sqrt() / (4.0 * pi * variance) + (x / (2.0 * s)).asin() / pi
}

/// Even semicircle moments by quadrature on the half-support (odd moments
/// vanish by symmetry). The substitution t = 2 sigma sin(theta) removes the
/// square-root edge, so Gauss-Legendre panels converge spectrally.
fn semicircle_moment(k: u32, variance: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    semicircle_abs_moment(k, variance)
}

fn semicircle_abs_moment(k: u32, variance: f64) -> f64 {
    let s = variance.sqrt();
    let f = |theta: f64| {
        let c = theta.cos();
        (2.0 * s * theta.sin()).powi(k as i32) * (2.0 / std::f64::consts::PI) * c * c
    };
    integrate_gl(f, 0.0, std::f64::consts::FRAC_PI_2, 8) * 2.0
}

/// Support edges of the free Poisson density component.
pub(crate) fn free_poisson_edges(rate: f64, jump: f64) -> (f64, f64) {
    let r = rate.sqrt();
    (jump * (1.0 - r) * (1.0 - r), jump * (1.0 + r) * (1.0 + r))
}

fn free_poisson_density(x: f64, rate: f64, jump: f64) -> f64 {
    let (a, b) = free_poisson_edges(rate, jump);
    if x <= a || x >= b || x <= 0.0 {
        return 0.0;
    }
    ((x - a) * (b - x)).sqrt() / (2.0 * std::f64::consts::PI * jump * x)
}

/// Integral of the free Poisson density from the lower edge to x, via the
/// trigonometric substitution x = m + r sin(theta), which removes the
/// square-root endpoints.
fn free_poisson_density_integral(x: f64, rate: f64, jump: f64) -> f64 {
    let (a, b) = free_poisson_edges(rate, jump);
    if x <= a {
        return 0.0;
    }
    let continuous_mass = rate.min(1.0);
    if x >= b {
        return continuous_mass;
    }
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let theta = ((x - m) / r).clamp(-1.0, 1.0).asin();
    let f = |t: f64| {
        let xt = m + r * t.sin();
        let c = t.cos();
        r * r * c * c / (2.0 * std::f64::consts::PI * jump * xt)
    };
    integrate_gl(f, -std::f64::consts::FRAC_PI_2, theta, 8).min(continuous_mass)
}

fn free_poisson_cdf(x: f64, rate: f64, jump: f64) -> f64 {
    let atom = if rate < 1.0 { 1.0 - rate } else { 0.0 };
    let atom_part = if x >= 0.0 { atom } else { 0.0 };
    (atom_part + free_poisson_density_integral(x, rate, jump)).min(1.0)
}

fn free_poisson_moment(k: u32, rate: f64, jump: f64) -> f64 {
    let (a, b) = free_poisson_edges(rate, jump);
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let f = |t: f64| {
        let xt = m + r * t.sin();
        let c = t.cos();
        xt.powi(k as i32 - 1) * r * r * c * c / (2.0 * std::f64::consts::PI * jump)
    };
    integrate_gl(
        f,
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
        32,
    )
}

/// Exact integral of |x|^k against the linear density (d0 at x0, d1 at x1),
/// splitting at zero when the cell straddles it.
fn abs_power_cell(x0: f64, x1: f64, d0: f64, d1: f64, k: u32) -> f64 {
    let h = x1 - x0;
    let beta = (d1 - d0) / h;
    let alpha = d0 - beta * x0;
    let piece = |lo: f64, hi: f64, sign: f64| -> f64 {
        let p1 = (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / (k as f64 + 1.0);
        let p2 = (hi.powi(k as i32 + 2) - lo.powi(k as i32 + 2)) / (k as f64 + 2.0);
        sign * (alpha * p1 + beta * p2)
    };
    if x1 <= 0.0 {
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        piece(x0, x1, sign)
    } else if x0 >= 0.0 {
        piece(x0, x1, 1.0)
    } else {
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        piece(x0, 0.0, sign) + piece(0.0, x1, 1.0)
    }
}
