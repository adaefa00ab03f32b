//! Matrix self-normalized sums and the operator-inequality checks backing
//! them.
//!
//! For a family X_1..X_n of Hermitian matrices, the normalized sums are
//! S = n^{-1/2} (X_1 + .. + X_n) and V2 = n^{-1} (X_1^2 + .. + X_n^2); the
//! self-normalized sum is U = (V2)^{-1/4} S (V2)^{-1/4}, built through the
//! spectral decomposition of V2. U is invariant under rescaling all X_i by
//! a common factor, so normalization conventions only affect V2 itself.

use super::{
    hermitian_eigen, hermitian_eigenvalues, ComplexMatrix, HermitianMatrix, MatrixError,
};
use crate::textio::fmt17;
use num_complex::Complex64;

/// Self-normalization output: numerator sum S, squared sum V2, the
/// self-normalized matrix U, and the spectrum of V2.
#[derive(Debug, Clone)]
pub struct SelfNormalizedSum {
    pub numerator: HermitianMatrix,
    pub sum_of_squares: HermitianMatrix,
    pub normalized: HermitianMatrix,
    pub v2_eigenvalues: Vec<f64>,
}

/// Default invertibility floor: 1e-12 times the spectral norm of V2.
/// Numerically degenerate draws must fail loudly rather than be silently
/// regularized, mirroring the almost-sure (not sure) invertibility of V2.
pub fn default_pinv_floor(v2_spectral_norm: f64) -> f64 {
    1e-12 * v2_spectral_norm
}

/// Streaming builder for (S, V2, U): push matrices one at a time so large
/// families never need to be held in memory together.
#[derive(Debug, Clone)]
pub struct SelfNormalizedAccumulator {
    dim: usize,
    count: usize,
    sum: ComplexMatrix,
    sum_of_squares: ComplexMatrix,
}

impl SelfNormalizedAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            count: 0,
            sum: ComplexMatrix::zeros(dim),
            sum_of_squares: ComplexMatrix::zeros(dim),
        }
    }

    pub fn push(&mut self, x: &HermitianMatrix) -> Result<(), MatrixError> {
        if x.dim() != self.dim {
            return Err(MatrixError::DimensionMismatch(self.dim, x.dim()));
        }
        self.sum = self.sum.add(x.as_complex());
        self.sum_of_squares = self.sum_of_squares.add(x.square().as_complex());
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Finalizes S = sum / sqrt(n), V2 = sum of squares / n, and
    /// U = (V2)^{-1/4} S (V2)^{-1/4}.
    pub fn finalize(self, pinv_floor: Option<f64>) -> Result<SelfNormalizedSum, MatrixError> {
        if self.count == 0 {
            return Err(MatrixError::EmptyFamily);
        }
        let n = self.count as f64;
        let numerator = HermitianMatrix::from_symmetrized(self.sum.scale(1.0 / n.sqrt()));
        let sum_of_squares =
            HermitianMatrix::from_symmetrized(self.sum_of_squares.scale(1.0 / n));
        finalize_from_sums(numerator, sum_of_squares, pinv_floor)
    }
}

/// Builds (S, V2, U) from a matrix family. `pinv_floor` guards the inverse
/// fourth root; `None` selects [`default_pinv_floor`].
pub fn build_self_normalized(
    xs: &[HermitianMatrix],
    pinv_floor: Option<f64>,
) -> Result<SelfNormalizedSum, MatrixError> {
    if xs.is_empty() {
        return Err(MatrixError::EmptyFamily);
    }
    let mut acc = SelfNormalizedAccumulator::new(xs[0].dim());
    for x in xs {
        acc.push(x)?;
    }
    acc.finalize(pinv_floor)
}

fn finalize_from_sums(
    numerator: HermitianMatrix,
    sum_of_squares: HermitianMatrix,
    pinv_floor: Option<f64>,
) -> Result<SelfNormalizedSum, MatrixError> {
    let dim = numerator.dim();
    let dec = hermitian_eigen(&sum_of_squares)?;
    let min_eig = dec.eigenvalues[0];
    let spectral = dec.eigenvalues[dim - 1].abs().max(min_eig.abs());
    let floor = pinv_floor.unwrap_or_else(|| default_pinv_floor(spectral));
    if min_eig <= floor {
        return Err(MatrixError::NotInvertible {
            min_eigenvalue: min_eig,
            floor,
        });
    }

    // R = Q diag(eig^{-1/4}) Q*, then U = R S R.
    let mut scaled = dec.eigenvectors.clone();
    {
        let dimn = dim;
        let (re, im) = scaled.parts_mut();
        for i in 0..dimn {
            for j in 0..dimn {
                let f = dec.eigenvalues[j].powf(-0.25);
                re[i * dimn + j] *= f;
                im[i * dimn + j] *= f;
            }
        }
    }
    let quarter_inv = HermitianMatrix::from_symmetrized(scaled.matmul(&dec.eigenvectors.adjoint()));
    let u = quarter_inv
        .as_complex()
        .matmul(numerator.as_complex())
        .matmul(quarter_inv.as_complex());
    let normalized = HermitianMatrix::from_symmetrized(u);

    Ok(SelfNormalizedSum {
        numerator,
        sum_of_squares,
        normalized,
        v2_eigenvalues: dec.eigenvalues,
    })
}

/// Normalized resolvent trace (1/N) tr (z - M)^{-1} via the spectrum.
pub fn trace_resolvent(m: &HermitianMatrix, z: Complex64) -> Result<Complex64, MatrixError> {
    assert!(z.im > 0.0, "resolvent trace needs Im z > 0");
    let vals = hermitian_eigenvalues(m)?;
    Ok(trace_resolvent_from_eigenvalues(&vals, z))
}

/// Same as [`trace_resolvent`] when the spectrum is already known.
pub fn trace_resolvent_from_eigenvalues(eigenvalues: &[f64], z: Complex64) -> Complex64 {
    let n = eigenvalues.len() as f64;
    eigenvalues
        .iter()
        .map(|&l| 1.0 / (z - l))
        .sum::<Complex64>()
        / n
}

/// One named inequality with both sides and the slack rhs - lhs.
#[derive(Debug, Clone)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
}

impl InequalityCheck {
    fn of(name: &'static str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            margin: rhs + slack - lhs,
            passed: lhs <= rhs + slack,
        }
    }
}

/// Report of the five operator-inequality checks on a matrix family.
#[derive(Debug, Clone)]
pub struct OperatorInequalityReport {
    pub family_size: usize,
    pub dim: usize,
    /// Geometric-series inversion: partial sums of (I - V2)^k against the
    /// direct inverse, present when ||I - V2|| < 1.
    pub neumann_series: Option<InequalityCheck>,
    /// ||(V2)^{-1}|| <= 1 / (1 - ||I - V2||), present with the above.
    pub neumann_inverse_norm: Option<InequalityCheck>,
    /// Positive-semidefiniteness of sum(w_i |T_i|^2) - |sum(w_i T_i)|^2.
    pub psd_ordering: InequalityCheck,
    /// ||U|| <= sqrt(n).
    pub norm_bound: InequalityCheck,
    /// ||U||_2 <= 2 + 3 sqrt(2n) ||V2/B^2 - I||_2 with B^2 = tr_N((sum X)^2).
    pub frobenius_bound: InequalityCheck,
    /// Norm of a centered free-type sum against max norm + 2 sqrt(sum of
    /// traces of squares); exact only for free variables, so it is checked
    /// statistically with additive slack 0.2.
    pub voiculescu_sum_norm: InequalityCheck,
}

impl OperatorInequalityReport {
    pub fn csv_header() -> &'static str {
        "check,lhs,rhs,margin,passed"
    }

    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        let mut push = |c: &InequalityCheck| {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.name,
                fmt17(c.lhs),
                fmt17(c.rhs),
                fmt17(c.margin),
                c.passed
            ));
        };
        if let Some(c) = &self.neumann_series {
            push(c);
        }
        if let Some(c) = &self.neumann_inverse_norm {
            push(c);
        }
        push(&self.psd_ordering);
        push(&self.norm_bound);
        push(&self.frobenius_bound);
        push(&self.voiculescu_sum_norm);
        out
    }
}

fn spectral_norm(m: &HermitianMatrix) -> Result<f64, MatrixError> {
    let vals = hermitian_eigenvalues(m)?;
    Ok(vals[0].abs().max(vals[vals.len() - 1].abs()))
}

/// Runs the five named checks. Deterministic violations — PSD ordering, the
/// sqrt(n) norm bound, the normalized-Frobenius bound — are hard errors;
/// the statistical check is only recorded in the report.
pub fn check_operator_inequalities(
    xs: &[HermitianMatrix],
    weights: Option<&[f64]>,
) -> Result<OperatorInequalityReport, MatrixError> {
    if xs.is_empty() {
        return Err(MatrixError::EmptyFamily);
    }
    let dim = xs[0].dim();
    let n = xs.len();
    let uniform = vec![1.0 / n as f64; n];
    let w = weights.unwrap_or(&uniform);
    if w.len() != n {
        return Err(MatrixError::DimensionMismatch(w.len(), n));
    }
    let total_weight: f64 = w.iter().sum();
    if w.iter().any(|&x| x <= 0.0) || total_weight > 1.0 + 1e-12 {
        return Err(MatrixError::Degenerate(format!(
            "weights must be positive with sum <= 1 (sum {total_weight})"
        )));
    }

    let sns = build_self_normalized(xs, None)?;
    let v2 = &sns.sum_of_squares;
    let u = &sns.normalized;

    // (a) Geometric-series inversion, when the contraction condition holds.
    let mut id_minus = v2.as_complex().scale(-1.0);
    id_minus.add_scaled_identity(1.0);
    let dev = spectral_norm(&HermitianMatrix::from_symmetrized(id_minus.clone()))?;
    let (neumann_series, neumann_inverse_norm) = if dev < 1.0 {
        // Direct inverse from the spectrum.
        let dec = hermitian_eigen(v2)?;
        let mut scaled = dec.eigenvectors.clone();
        {
            let (re, im) = scaled.parts_mut();
            for i in 0..dim {
                for j in 0..dim {
                    let f = 1.0 / dec.eigenvalues[j];
                    re[i * dim + j] *= f;
                    im[i * dim + j] *= f;
                }
            }
        }
        let inverse = scaled.matmul(&dec.eigenvectors.adjoint());
        // Horner partial sums P_{k+1} = I + (I - V2) P_k.
        let budget = ((-8.0 * std::f64::consts::LN_10) / dev.ln()).ceil() as usize;
        let budget = budget.clamp(4, 20_000);
        let mut partial = ComplexMatrix::identity(dim);
        let mut err = f64::INFINITY;
        for _ in 0..budget {
            partial = id_minus.matmul(&partial);
            partial.add_scaled_identity(1.0);
            err = partial.sub(&inverse).frobenius_norm() / inverse.frobenius_norm().max(1e-300);
            if err <= 1e-8 {
                break;
            }
        }
        let series = InequalityCheck::of("neumann_series_converges", err, 1e-8, 0.0);
        let inv_norm = spectral_norm(&HermitianMatrix::from_symmetrized(inverse))?;
        let bound = InequalityCheck::of(
            "neumann_inverse_norm",
            inv_norm,
            1.0 / (1.0 - dev),
            1e-9 * (1.0 / (1.0 - dev)),
        );
        (Some(series), Some(bound))
    } else {
        (None, None)
    };

    // (b) PSD ordering: min eig of sum(w |T|^2) - |sum(w T)|^2 >= -1e-9.
    let mut weighted_sq = ComplexMatrix::zeros(dim);
    let mut weighted_sum = ComplexMatrix::zeros(dim);
    for (x, &wi) in xs.iter().zip(w) {
        weighted_sq = weighted_sq.add(&x.square().as_complex().scale(wi));
        weighted_sum = weighted_sum.add(&x.as_complex().scale(wi));
    }
    let weighted_sum_sq = weighted_sum.matmul(&weighted_sum);
    let gap = HermitianMatrix::from_symmetrized(weighted_sq.sub(&weighted_sum_sq));
    let min_gap_eig = hermitian_eigenvalues(&gap)?[0];
    let psd_ordering = InequalityCheck::of("psd_ordering_min_eig", -min_gap_eig, 0.0, 1e-9);

    // (c) ||U|| <= sqrt(n).
    let u_norm = spectral_norm(u)?;
    let norm_bound = InequalityCheck::of("self_normalized_norm", u_norm, (n as f64).sqrt(), 1e-9);

    // (d) ||U||_2 <= 2 + 3 sqrt(2n) ||V2' - I||_2, where V2' renormalizes by
    // B^2 = tr_N((sum X)^2) so that the numerator has unit normalized
    // Frobenius norm; with that normalization the bound is a theorem for
    // arbitrary Hermitian families (traciality of tr_N suffices), and U is
    // unchanged by the renormalization.
    let mut raw_sum = ComplexMatrix::zeros(dim);
    let mut raw_sq = ComplexMatrix::zeros(dim);
    for x in xs {
        raw_sum = raw_sum.add(x.as_complex());
        raw_sq = raw_sq.add(x.square().as_complex());
    }
    let b_sq = HermitianMatrix::from_symmetrized(raw_sum.matmul(&raw_sum)).normalized_trace();
    if b_sq <= 0.0 {
        return Err(MatrixError::Degenerate(
            "tr_N((sum X)^2) vanishes; the family sums to zero".into(),
        ));
    }
    let mut v2_renorm = raw_sq.scale(1.0 / b_sq);
    v2_renorm.add_scaled_identity(-1.0);
    let delta2 = HermitianMatrix::from_symmetrized(v2_renorm).normalized_frobenius();
    let frobenius_bound = InequalityCheck::of(
        "self_normalized_frobenius",
        u.normalized_frobenius(),
        2.0 + 3.0 * (2.0 * n as f64).sqrt() * delta2,
        1e-9,
    );

    // (e) Sum-norm bound, exact for free summands only: statistical check
    // with slack 0.2.
    let sum_h = HermitianMatrix::from_symmetrized(raw_sum);
    let lhs = spectral_norm(&sum_h)?;
    let mut max_norm: f64 = 0.0;
    let mut trace_sq_sum = 0.0;
    for x in xs {
        max_norm = max_norm.max(spectral_norm(x)?);
        trace_sq_sum += x.square().normalized_trace();
    }
    let voiculescu_sum_norm = InequalityCheck::of(
        "free_sum_norm",
        lhs,
        max_norm + 2.0 * trace_sq_sum.sqrt(),
        0.2,
    );

    for c in [&psd_ordering, &norm_bound, &frobenius_bound] {
        if !c.passed {
            return Err(MatrixError::InequalityViolation {
                name: c.name,
                lhs: c.lhs,
                rhs: c.rhs,
            });
        }
    }

    Ok(OperatorInequalityReport {
        family_size: n,
        dim,
        neumann_series,
        neumann_inverse_norm,
        psd_ordering,
        norm_bound,
        frobenius_bound,
        voiculescu_sum_norm,
    })
}
