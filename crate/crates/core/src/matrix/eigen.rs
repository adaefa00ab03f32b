//! Complex Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal (with phase absorption into the accumulated frame) followed
//! by implicit-shift QL iteration.

use super::{ComplexMatrix, HermitianMatrix, MatrixError, SpectralDecomposition};

struct Reflector {
    offset: usize,
    tau: f64,
    vre: Vec<f64>,
    vim: Vec<f64>,
}

/// Reduction output: real diagonal `d`, real subdiagonal moduli `e`, the
/// reflector stack, and the raw complex subdiagonal entries whose phases
/// must be absorbed into the frame.
struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
    reflectors: Vec<Reflector>,
    sub: Vec<(f64, f64)>,
}

/// Householder reduction of a Hermitian matrix (consumed as a dense copy)
/// to tridiagonal form.
#[allow(clippy::needless_range_loop)]
fn tridiagonalize(a: &mut ComplexMatrix, keep_reflectors: bool) -> Tridiagonal {
    let n = a.dim();
    let mut reflectors: Vec<Reflector> = Vec::new();
    let mut sub: Vec<(f64, f64)> = vec![(0.0, 0.0); n.saturating_sub(1)]; // complex e_k
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        // x = A[k+1.., k]
        let mut xre = vec![0.0; m];
        let mut xim = vec![0.0; m];
        for i in 0..m {
            let v = a.get(k + 1 + i, k);
            xre[i] = v.re;
            xim[i] = v.im;
        }
        let sigma: f64 = xre.iter().zip(&xim).map(|(r, s)| r * r + s * s).sum();
        let tail: f64 = xre[1..]
            .iter()
            .zip(&xim[1..])
            .map(|(r, s)| r * r + s * s)
            .sum();
        if tail == 0.0 {
            // Already tridiagonal at this column.
            sub[k] = (xre[0], xim[0]);
            if keep_reflectors {
                reflectors.push(Reflector {
                    offset: k + 1,
                    tau: 0.0,
                    vre: Vec::new(),
                    vim: Vec::new(),
                });
            }
            continue;
        }
        let norm = sigma.sqrt();
        let x0 = (xre[0], xim[0]);
        let x0n = (x0.0 * x0.0 + x0.1 * x0.1).sqrt();
        // alpha = -phase(x0) * norm, with phase 1 for a vanishing pivot.
        let (phre, phim) = if x0n > 0.0 {
            (x0.0 / x0n, x0.1 / x0n)
        } else {
            (1.0, 0.0)
        };
        let alre = -phre * norm;
        let alim = -phim * norm;
        // v = x - alpha e0; ||v||^2 = 2 sigma + 2 |x0| norm (no cancellation).
        let mut vre = xre;
        let mut vim = xim;
        vre[0] -= alre;
        vim[0] -= alim;
        let vnorm2 = 2.0 * sigma + 2.0 * x0n * norm;
        let tau = 2.0 / vnorm2;

        // New subdiagonal entry and zeros below it.
        sub[k] = (alre, alim);

        // p = tau * B v on the trailing block B = A[k+1.., k+1..].
        let (are, aim) = a.parts_mut();
        let mut pre = vec![0.0; m];
        let mut pim = vec![0.0; m];
        for i in 0..m {
            let row = (k + 1 + i) * n + (k + 1);
            let rre = &are[row..row + m];
            let rim = &aim[row..row + m];
            let mut accre = 0.0;
            let mut accim = 0.0;
            for j in 0..m {
                let br = rre[j];
                let bi = rim[j];
                accre += br * vre[j] - bi * vim[j];
                accim += br * vim[j] + bi * vre[j];
            }
            pre[i] = tau * accre;
            pim[i] = tau * accim;
        }
        // K = tau (v* p) / 2; v* B v is real, so K is real to rounding.
        let mut vp_re = 0.0;
        for j in 0..m {
            vp_re += vre[j] * pre[j] + vim[j] * pim[j];
        }
        let kappa = 0.5 * tau * vp_re;
        // w = p - K v
        let mut wre = pre;
        let mut wim = pim;
        for j in 0..m {
            wre[j] -= kappa * vre[j];
            wim[j] -= kappa * vim[j];
        }
        // B <- B - v w* - w v*
        for i in 0..m {
            let row = (k + 1 + i) * n + (k + 1);
            let (vr, vi, wr, wi) = (vre[i], vim[i], wre[i], wim[i]);
            let rre = &mut are[row..row + m];
            let rim = &mut aim[row..row + m];
            for j in 0..m {
                rre[j] -= vr * wre[j] + vi * wim[j] + wr * vre[j] + wi * vim[j];
                rim[j] -= vi * wre[j] - vr * wim[j] + wi * vre[j] - wr * vim[j];
            }
        }
        if keep_reflectors {
            reflectors.push(Reflector {
                offset: k + 1,
                tau,
                vre,
                vim,
            });
        }
    }
    if n >= 2 {
        let v = a.get(n - 1, n - 2);
        sub[n - 2] = (v.re, v.im);
    }
    let d: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    let e: Vec<f64> = sub
        .iter()
        .map(|&(r, s)| (r * r + s * s).sqrt())
        .collect();
    Tridiagonal {
        d,
        e,
        reflectors,
        sub,
    }
}

/// Accumulates qt = (H_0 ... H_{n-3} D)^T, where D absorbs the subdiagonal
/// phases, as row-major rows (row j of qt is column j of the frame).
#[allow(clippy::needless_range_loop)]
fn accumulate_frame(
    n: usize,
    reflectors: &[Reflector],
    sub: &[(f64, f64)],
) -> ComplexMatrix {
    let mut qt = ComplexMatrix::zeros(n);
    // Phase chain: D_0 = 1, D_{k+1} = D_k * e_k / |e_k|.
    let mut phre = vec![1.0; n];
    let mut phim = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let (er, ei) = sub[k];
        let m = (er * er + ei * ei).sqrt();
        if m > 0.0 {
            let (pr, pi) = (phre[k], phim[k]);
            phre[k + 1] = (pr * er - pi * ei) / m;
            phim[k + 1] = (pr * ei + pi * er) / m;
        } else {
            phre[k + 1] = phre[k];
            phim[k + 1] = phim[k];
        }
    }
    // qt starts as D (transposed diagonal is itself).
    {
        let nn = n;
        let (re, im) = qt.parts_mut();
        for j in 0..nn {
            re[j * nn + j] = phre[j];
            im[j * nn + j] = phim[j];
        }
    }
    // qt <- qt * conj(H_k) for k = last..0, i.e.
    // qt <- qt - conj(tau) (qt conj(v)) v^T restricted to the active block.
    for refl in reflectors.iter().rev() {
        if refl.tau == 0.0 {
            continue;
        }
        let off = refl.offset;
        let m = refl.vre.len();
        let (re, im) = qt.parts_mut();
        for row in 0..n {
            let base = row * n + off;
            let rre = &re[base..base + m];
            let rim = &im[base..base + m];
            // t = sum_j qt[row][off+j] * conj(v_j)
            let mut tre = 0.0;
            let mut tim = 0.0;
            for j in 0..m {
                let (vr, vi) = (refl.vre[j], refl.vim[j]);
                tre += rre[j] * vr + rim[j] * vi;
                tim += rim[j] * vr - rre[j] * vi;
            }
            tre *= refl.tau;
            tim *= refl.tau;
            let rre = &mut re[base..base + m];
            let rim = &mut im[base..base + m];
            for j in 0..m {
                let (vr, vi) = (refl.vre[j], refl.vim[j]);
                rre[j] -= tre * vr - tim * vi;
                rim[j] -= tre * vi + tim * vr;
            }
        }
    }
    qt
}

/// Implicit-shift QL on the real tridiagonal (d, e), rotating the rows of
/// `qt` alongside when present. The iteration budget is 30 sweeps per
/// eigenvalue and 30 n overall.
fn ql_implicit(
    d: &mut [f64],
    e: &mut [f64],
    mut qt: Option<&mut ComplexMatrix>,
    n: usize,
) -> Result<(), MatrixError> {
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut total = 0usize;
    let budget = 30 * n.max(1);
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // Locate the first negligible subdiagonal at or after l.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if iter > 30 || total > budget {
                return Err(MatrixError::EigenNonConvergence { block: l });
            }
            // Wilkinson-style shift from the leading 2x2 of the block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign);
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut restarted = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Deflate without finishing the sweep and retry.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    restarted = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(q) = qt.as_deref_mut() {
                    rotate_rows(q, i, s, c);
                }
            }
            if restarted {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Applies the plane rotation to rows i and i+1 of qt:
/// row_{i+1} <- s row_i + c row_{i+1}, row_i <- c row_i - s row_{i+1,old}.
fn rotate_rows(qt: &mut ComplexMatrix, i: usize, s: f64, c: f64) {
    let n = qt.dim();
    let (re, im) = qt.parts_mut();
    let (lo, hi) = re.split_at_mut((i + 1) * n);
    let ra = &mut lo[i * n..];
    let rb = &mut hi[..n];
    for j in 0..n {
        let f = rb[j];
        rb[j] = s * ra[j] + c * f;
        ra[j] = c * ra[j] - s * f;
    }
    let (lo, hi) = im.split_at_mut((i + 1) * n);
    let ia = &mut lo[i * n..];
    let ib = &mut hi[..n];
    for j in 0..n {
        let f = ib[j];
        ib[j] = s * ia[j] + c * f;
        ia[j] = c * ia[j] - s * f;
    }
}

fn sort_ascending(d: &mut [f64], qt: Option<&mut ComplexMatrix>) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    d.copy_from_slice(&sorted);
    if let Some(qt) = qt {
        let src = qt.clone();
        let (dre, dim) = qt.parts_mut();
        for (new_row, &old_row) in order.iter().enumerate() {
            dre[new_row * n..(new_row + 1) * n]
                .copy_from_slice(&src.re_slice()[old_row * n..(old_row + 1) * n]);
            dim[new_row * n..(new_row + 1) * n]
                .copy_from_slice(&src.im_slice()[old_row * n..(old_row + 1) * n]);
        }
    }
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &HermitianMatrix) -> Result<Vec<f64>, MatrixError> {
    let n = m.dim();
    let mut a = m.as_complex().clone();
    let tri = tridiagonalize(&mut a, false);
    let (mut d, mut e) = (tri.d, tri.e);
    e.push(0.0);
    ql_implicit(&mut d, &mut e, None, n)?;
    sort_ascending(&mut d, None);
    Ok(d)
}

/// Full spectral decomposition with residual and unitarity certificates.
pub fn hermitian_eigen(m: &HermitianMatrix) -> Result<SpectralDecomposition, MatrixError> {
    let n = m.dim();
    let mut a = m.as_complex().clone();
    let tri = tridiagonalize(&mut a, true);
    let (mut d, mut e) = (tri.d, tri.e);
    let mut qt = accumulate_frame(n, &tri.reflectors, &tri.sub);
    e.push(0.0);
    ql_implicit(&mut d, &mut e, Some(&mut qt), n)?;
    sort_ascending(&mut d, Some(&mut qt));
    let q = qt.adjoint_transpose_rows();

    // Residual ||M Q - Q Lambda||_F / ||M||_F.
    let mq = m.as_complex().matmul(&q);
    let mut ql = q.clone();
    {
        let (re, im) = ql.parts_mut();
        for i in 0..n {
            for j in 0..n {
                re[i * n + j] *= d[j];
                im[i * n + j] *= d[j];
            }
        }
    }
    let m_norm = m.as_complex().frobenius_norm().max(f64::MIN_POSITIVE);
    let residual = mq.sub(&ql).frobenius_norm() / m_norm;

    let qhq = q.adjoint().matmul(&q);
    let mut unitarity_defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            let g = qhq.get(i, j);
            unitarity_defect = unitarity_defect
                .max(((g.re - want).powi(2) + g.im * g.im).sqrt());
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues: d,
        eigenvectors: q,
        residual,
        unitarity_defect,
    })
}

impl ComplexMatrix {
    /// Plain transpose (no conjugation): turns the row-stored frame back
    /// into a column frame.
    fn adjoint_transpose_rows(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let idx = i * n + j;
                out.re[j * n + i] = self.re[idx];
                out.im[j * n + i] = self.im[idx];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn from_rows(rows: &[&[Complex64]]) -> HermitianMatrix {
        let n = rows.len();
        let mut m = ComplexMatrix::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn identity_eigen() {
        let m = HermitianMatrix::identity(5);
        let dec = hermitian_eigen(&m).unwrap();
        for &l in &dec.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
        assert!(dec.residual < 1e-14);
        assert!(dec.unitarity_defect < 1e-12);
    }

    #[test]
    fn pauli_x_spectrum() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let m = from_rows(&[&[zero, one], &[one, zero]]);
        let vals = hermitian_eigenvalues(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_two_by_two() {
        // [[0, i], [-i, 0]] has spectrum {-1, 1}.
        let m = from_rows(&[
            &[Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
            &[Complex64::new(0.0, -1.0), Complex64::new(0.0, 0.0)],
        ]);
        let dec = hermitian_eigen(&m).unwrap();
        assert!((dec.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((dec.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(dec.residual < 1e-13);
    }

    #[test]
    fn conjugation_invariance() {
        // diag(3, 1, 2) conjugated by a fixed unitary keeps spectrum {1,2,3}.
        let d = from_rows(&[
            &[
                Complex64::new(3.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(2.0, 0.0),
            ],
        ]);
        // Unitary from the eigenframe of a fixed Hermitian matrix.
        let h = from_rows(&[
            &[
                Complex64::new(0.3, 0.0),
                Complex64::new(0.2, 0.7),
                Complex64::new(-0.4, 0.1),
            ],
            &[
                Complex64::new(0.2, -0.7),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 0.5),
            ],
            &[
                Complex64::new(-0.4, -0.1),
                Complex64::new(0.0, -0.5),
                Complex64::new(0.4, 0.0),
            ],
        ]);
        let u = hermitian_eigen(&h).unwrap().eigenvectors;
        let conj = u.matmul(d.as_complex()).matmul(&u.adjoint());
        let hm = HermitianMatrix::from_symmetrized(conj);
        let vals = hermitian_eigenvalues(&hm).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-10);
        assert!((vals[1] - 2.0).abs() < 1e-10);
        assert!((vals[2] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn random_matrix_reconstruction() {
        // Deterministic pseudo-random Hermitian, check M = Q L Q*.
        let n = 24;
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            let d = next();
            m.set(i, i, Complex64::new(d, 0.0));
            for j in (i + 1)..n {
                let v = Complex64::new(next(), next());
                m.set(i, j, v);
                m.set(j, i, v.conj());
            }
        }
        let h = HermitianMatrix::new(m).unwrap();
        let dec = hermitian_eigen(&h).unwrap();
        assert!(dec.residual < 1e-12, "residual {}", dec.residual);
        assert!(
            dec.unitarity_defect < 1e-11,
            "unitarity {}",
            dec.unitarity_defect
        );
        // Ascending order.
        assert!(dec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        // Values-only path agrees.
        let vals = hermitian_eigenvalues(&h).unwrap();
        for (a, b) in vals.iter().zip(&dec.eigenvalues) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}
