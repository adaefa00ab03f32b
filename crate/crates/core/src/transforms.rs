//! Cauchy transform evaluation on the upper half-plane and density recovery
//! by Stieltjes inversion.

use crate::measure::{linspace, Measure, MeasureError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("inversion resolution {0} < 8")]
    ResolutionTooSmall(usize),
    #[error("inversion offset eta = {0} outside (1e-6, 1)")]
    EtaOutOfRange(f64),
    #[error("inversion window must satisfy lo < hi (got {0}..{1})")]
    BadWindow(f64, f64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// A point of the open upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    re: f64,
    im: f64,
}

impl HalfPlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self, TransformError> {
        if !(re.is_finite() && im.is_finite() && im > 0.0) {
            return Err(TransformError::EtaOutOfRange(im));
        }
        Ok(Self { re, im })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<HalfPlanePoint> for Complex64 {
    fn from(z: HalfPlanePoint) -> Self {
        z.to_complex()
    }
}

/// Cauchy transform G(z) = integral of 1/(z - t) against the measure, for z
/// in the open upper half-plane. Exact rational sums for atomic/empirical
/// variants, closed forms for semicircle and free Poisson, and exact
/// per-cell log-kernel integration for grid densities.
pub fn cauchy_transform(m: &Measure, z: HalfPlanePoint) -> Complex64 {
    cauchy_transform_c(m, z.to_complex())
}

/// Internal variant taking a raw complex point (callers must keep Im z > 0).
pub(crate) fn cauchy_transform_c(m: &Measure, z: Complex64) -> Complex64 {
    debug_assert!(z.im > 0.0);
    match m {
        Measure::Atomic { points, masses } => points
            .iter()
            .zip(masses)
            .map(|(&p, &w)| w / (z - p))
            .sum(),
        Measure::Empirical { samples } => {
            let w = 1.0 / samples.len() as f64;
            samples.iter().map(|&s| w / (z - s)).sum()
        }
        Measure::Semicircle { variance } => semicircle_cauchy_c(z, *variance),
        Measure::FreePoisson { rate, jump } => free_poisson_cauchy_c(z, *rate, *jump),
        Measure::GridDensity(g) => {
            let grid = g.grid();
            let density = g.density();
            let mut acc = Complex64::new(0.0, 0.0);
            // Integrate the linear interpolant against 1/(z - t) exactly on
            // each cell:  -beta h + (alpha + beta z) ln((z-t0)/(z-t1)).
            // Im(z - t) = Im z > 0 throughout, so the principal logarithm is
            // continuous across cells and safe at small Im z. Far from the
            // cell the two logarithms cancel catastrophically, so the ratio
            // form ln(1 + h/(z - t1)) switches to a series there.
            for i in 1..grid.len() {
                let (t0, t1) = (grid[i - 1], grid[i]);
                let (d0, d1) = (density[i - 1], density[i]);
                if d0 == 0.0 && d1 == 0.0 {
                    continue;
                }
                let h = t1 - t0;
                let beta = (d1 - d0) / h;
                let alpha = d0 - beta * t0;
                let log_ratio = ln_ratio(z - t1, h);
                acc += -beta * h + (alpha + beta * z) * log_ratio;
            }
            acc
        }
    }
}

/// ln((w + h) / w) = ln(1 + h/w), by series when |h/w| is small (the direct
/// log difference loses all significant digits far from the cell).
fn ln_ratio(w: Complex64, h: f64) -> Complex64 {
    let u = h / w;
    if u.norm_sqr() < 2.5e-3 {
        // |u| < 0.05: alternating series to machine precision.
        let mut term = u;
        let mut acc = u;
        for k in 2..=12 {
            term *= -u;
            acc += term / k as f64;
        }
        acc
    } else {
        ((w + h) / w).ln()
    }
}

/// Closed-form Cauchy transform of the semicircle law with variance sigma^2:
/// (z - sqrt(z^2 - 4 sigma^2)) / (2 sigma^2), square-root branch chosen so
/// that Im G < 0 and z G(z) -> 1 at infinity.
pub fn semicircle_cauchy(z: HalfPlanePoint, variance: f64) -> Complex64 {
    semicircle_cauchy_c(z.to_complex(), variance)
}

pub(crate) fn semicircle_cauchy_c(z: Complex64, variance: f64) -> Complex64 {
    // The principal square root flips sign across Re z = 0; selecting the
    // root with positive imaginary part restores the Nevanlinna branch.
    let mut w = (z * z - 4.0 * variance).sqrt();
    if w.im < 0.0 || (w.im == 0.0 && w.re < 0.0) {
        w = -w;
    }
    (z - w) / (2.0 * variance)
}

/// Closed-form Cauchy transform of the free Poisson law, from the quadratic
/// jump z G^2 - (z + jump - rate*jump) G/jump ... solved stably; the root
/// with negative imaginary part is the transform.
pub fn free_poisson_cauchy(z: HalfPlanePoint, rate: f64, jump: f64) -> Complex64 {
    free_poisson_cauchy_c(z.to_complex(), rate, jump)
}

pub(crate) fn free_poisson_cauchy_c(z: Complex64, rate: f64, jump: f64) -> Complex64 {
    // jump*z*G^2 - (z + jump - rate*jump)*G + 1 = 0
    let a = jump * z;
    let b = -(z + jump - rate * jump);
    let c = Complex64::new(1.0, 0.0);
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Stable quadratic: pick the larger-magnitude numerator first.
    let q = if (b + disc).norm() >= (b - disc).norm() {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    let g1 = q / a;
    let g2 = c / q;
    if g1.im < 0.0 {
        g1
    } else {
        g2
    }
}

/// Output of [`stieltjes_invert`]: the recovered grid density, the smoothing
/// offset used, and the raw trapezoidal mass before renormalization.
#[derive(Debug, Clone)]
pub struct InvertedDensity {
    pub measure: Measure,
    pub eta: f64,
    pub raw_mass: f64,
}

/// Convention used throughout: eta = 4 * (window width) / resolution, which
/// keeps the Poisson-kernel smearing within a few grid cells.
pub fn default_inversion_eta(window: (f64, f64), resolution: usize) -> f64 {
    4.0 * (window.1 - window.0) / resolution as f64
}

/// Stieltjes-Perron recovery: density(x) = (-1/pi) Im g(x + i eta), clamped
/// at zero and renormalized. `g` must be analytic on the upper half-plane.
pub fn stieltjes_invert<G: Fn(Complex64) -> Complex64>(
    g: G,
    window: (f64, f64),
    resolution: usize,
    eta: f64,
) -> Result<InvertedDensity, TransformError> {
    if resolution < 8 {
        return Err(TransformError::ResolutionTooSmall(resolution));
    }
    if !(eta > 1e-6 && eta < 1.0) {
        return Err(TransformError::EtaOutOfRange(eta));
    }
    if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
        return Err(TransformError::BadWindow(window.0, window.1));
    }
    let grid = linspace(window.0, window.1, resolution);
    let density: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let v = -g(Complex64::new(x, eta)).im / std::f64::consts::PI;
            v.max(0.0)
        })
        .collect();
    let mut raw_mass = 0.0;
    for i in 1..grid.len() {
        raw_mass += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
    }
    let measure = Measure::grid_density(grid, density)?;
    Ok(InvertedDensity {
        measure,
        eta,
        raw_mass,
    })
}

/// One CSV row per evaluation point: re(z), im(z), re(G), im(G).
pub fn transform_trace_csv(m: &Measure, points: &[HalfPlanePoint]) -> String {
    use crate::textio::fmt17;
    let mut out = String::from("re_z,im_z,re_g,im_g\n");
    for &z in points {
        let g = cauchy_transform(m, z);
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(z.re()),
            fmt17(z.im()),
            fmt17(g.re),
            fmt17(g.im)
        ));
    }
    out
}
