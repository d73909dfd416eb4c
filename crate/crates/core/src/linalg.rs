//! Dense complex kernels: matrix exponential, principal logarithm,
//! Gauss–Legendre rules and a few SVD helpers.
//!
//! Everything here works on `DMatrix<Complex64>`; the matrices the rest of
//! the crate feeds in are small (4×4 superoperators for a qubit, a few
//! hundred rows for the harmonic-balance systems).

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

use crate::error::{FloquetError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Scaling-and-squaring matrix exponential with diagonal Padé approximants
/// of degree 3, 5, 7, 9 or 13 selected by the 1-norm (Higham 2005 thresholds).
/// Relative accuracy is close to unit roundoff for the well-conditioned
/// generators used here; 1e-12 relative is the documented bound.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm requires a square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    const THETA: [(usize, f64); 4] = [
        (3, 1.495_585_217_958_292e-2),
        (5, 2.539_398_330_063_230e-1),
        (7, 9.504_178_996_162_932e-1),
        (9, 2.097_847_961_257_068),
    ];
    for (degree, theta) in THETA {
        if norm <= theta {
            return pade_low(a, degree);
        }
    }
    const THETA13: f64 = 5.371_920_351_148_152;
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * c(0.5f64.powi(squarings));
    let mut r = pade13(&scaled);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

fn pade_coefficients(degree: usize) -> &'static [f64] {
    match degree {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[
            17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
        ],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        _ => unreachable!("unsupported Padé degree"),
    }
}

fn pade_low(a: &CMatrix, degree: usize) -> CMatrix {
    let b = pade_coefficients(degree);
    let n = a.nrows();
    let ident = CMatrix::identity(n, n);
    let a2 = a * a;
    // Even powers of A up to A^(degree-1).
    let mut even = vec![ident.clone()];
    for _ in 1..=degree / 2 {
        let next = even.last().unwrap() * &a2;
        even.push(next);
    }
    let mut u_inner = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for (k, pow) in even.iter().enumerate() {
        u_inner += pow * c(b[2 * k + 1]);
        v += pow * c(b[2 * k]);
    }
    let u = a * u_inner;
    solve_pade(&u, &v)
}

fn pade13(a: &CMatrix) -> CMatrix {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let ident = CMatrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * (&a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]));
    let u = a * (u_hi + &a6 * c(B[7]) + &a4 * c(B[5]) + &a2 * c(B[3]) + &ident * c(B[1]));
    let v_hi = &a6 * (&a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]));
    let v = v_hi + &a6 * c(B[6]) + &a4 * c(B[4]) + &a2 * c(B[2]) + &ident * c(B[0]);
    solve_pade(&u, &v)
}

fn solve_pade(u: &CMatrix, v: &CMatrix) -> CMatrix {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular inside the scaling thresholds")
}

/// Complex Schur form `A = Q T Q†` with the strictly lower part of `T` zeroed.
pub fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let decomposition = Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or(FloquetError::Decomposition("Schur iteration did not converge"))?;
    let (q, mut t) = decomposition.unpack();
    for j in 0..t.ncols() {
        for i in (j + 1)..t.nrows() {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok((q, t))
}

pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let (_, t) = schur(a)?;
    Ok(t.diagonal().iter().copied().collect())
}

/// Principal matrix logarithm: every eigenvalue of the result has imaginary
/// part in (−π, π].
///
/// Inverse scaling and squaring on the Schur factor: square roots are taken
/// until ‖T − I‖₁ ≤ 1/4, then log(I + X) is evaluated with the 8-point
/// Gauss–Legendre form of the diagonal Padé approximant.
pub fn logm_principal(a: &CMatrix) -> Result<CMatrix> {
    assert!(a.is_square(), "logm requires a square matrix");
    let n = a.nrows();
    let (q, mut t) = schur(a)?;
    let scale = max_norm(a).max(f64::MIN_POSITIVE);
    let mut smallest = f64::INFINITY;
    for &z in t.diagonal().iter() {
        smallest = smallest.min(z.norm());
    }
    if smallest <= 1e-14 * scale {
        return Err(FloquetError::SingularMonodromy { smallest });
    }
    for &z in t.diagonal().iter() {
        if z.re < 0.0 && z.im.abs() <= 1e-12 * z.norm() {
            return Err(FloquetError::BranchAmbiguity {
                eigenvalue: z,
                t0: None,
            });
        }
    }

    let ident = CMatrix::identity(n, n);
    let mut roots = 0;
    while one_norm(&(&t - &ident)) > 0.25 {
        t = sqrt_upper_triangular(&t);
        roots += 1;
        if roots > 64 {
            return Err(FloquetError::Decomposition(
                "square-root sequence did not approach the identity",
            ));
        }
    }
    let x = &t - &ident;
    let (nodes, weights) = gauss_legendre(8);
    let mut log_t = CMatrix::zeros(n, n);
    for (s, w) in nodes.iter().zip(&weights) {
        let denom = &ident + &x * c(*s);
        let term = denom
            .solve_upper_triangular(&x)
            .ok_or(FloquetError::Decomposition("singular Padé denominator"))?;
        log_t += term * c(*w);
    }
    log_t *= c(2f64.powi(roots));
    Ok(&q * log_t * q.adjoint())
}

/// Principal square root of an upper-triangular matrix whose diagonal avoids
/// the closed negative real axis.
fn sqrt_upper_triangular(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let mut r = CMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = t[(i, i)].sqrt();
    }
    for d in 1..n {
        for i in 0..(n - d) {
            let j = i + d;
            let mut s = t[(i, j)];
            for k in (i + 1)..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

/// Gauss–Legendre nodes and weights mapped to [0, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre(n, x);
            dp = nf * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (p, p_prev) = legendre(n, x);
                dp = nf * (x * p - p_prev) / (x * x - 1.0);
                break;
            }
        }
        nodes.push(0.5 * (1.0 + x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    let mut pairs: Vec<_> = nodes.into_iter().zip(weights).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    if n == 1 {
        (x, 1.0)
    } else {
        (p, p_prev)
    }
}

fn svd(a: &CMatrix, vectors: bool) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(a.clone(), vectors, vectors, f64::EPSILON, 0)
        .ok_or(FloquetError::Decomposition("SVD did not converge"))
}

/// Singular values in ascending order.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = svd(a, false)?.singular_values.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub fn condition_number(a: &CMatrix) -> Result<f64> {
    let values = singular_values(a)?;
    let smallest = values[0];
    let largest = *values.last().unwrap();
    Ok(if smallest == 0.0 {
        f64::INFINITY
    } else {
        largest / smallest
    })
}

/// The right singular vector of the smallest singular value, together with
/// the two smallest singular values.
pub struct NullDirection {
    pub vector: CVector,
    pub smallest: f64,
    pub second: f64,
}

pub fn null_direction(a: &CMatrix) -> Result<NullDirection> {
    assert!(a.nrows() >= a.ncols(), "null_direction expects a tall or square matrix");
    let decomposition = svd(a, true)?;
    let values = &decomposition.singular_values;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let v_t = decomposition
        .v_t
        .as_ref()
        .ok_or(FloquetError::Decomposition("SVD right vectors missing"))?;
    let row = v_t.row(order[0]);
    let vector = CVector::from_iterator(row.len(), row.iter().map(|z| z.conj()));
    Ok(NullDirection {
        vector,
        smallest: values[order[0]],
        second: if order.len() > 1 {
            values[order[1]]
        } else {
            f64::INFINITY
        },
    })
}

/// Least-squares solution of `A x = b` together with the relative smallest
/// singular value of `A` (σ_min / σ_max).
pub fn least_squares(a: &CMatrix, b: &CVector) -> Result<(CVector, f64)> {
    let decomposition = svd(a, true)?;
    let values = &decomposition.singular_values;
    let largest = values.iter().copied().fold(0.0, f64::max);
    let smallest = values.iter().copied().fold(f64::INFINITY, f64::min);
    let x = decomposition
        .solve(b, 0.0)
        .map_err(|_| FloquetError::Decomposition("least-squares back substitution failed"))?;
    Ok((x, smallest / largest.max(f64::MIN_POSITIVE)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, seed: u64, scale: f64) -> CMatrix {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        CMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()) * scale)
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMatrix::zeros(4, 4);
        assert!(max_norm(&(expm(&z) - CMatrix::identity(4, 4))) == 0.0);
    }

    #[test]
    fn expm_diagonal() {
        let d = [Complex64::new(0.3, 1.0), Complex64::new(-2.0, 0.5), Complex64::new(7.0, -3.0)];
        let a = CMatrix::from_diagonal(&CVector::from_row_slice(&d));
        let e = expm(&a);
        for (i, z) in d.iter().enumerate() {
            assert!((e[(i, i)] - z.exp()).norm() <= 1e-13 * z.exp().norm());
        }
    }

    #[test]
    fn expm_matches_taylor_series_across_degrees() {
        for scale in [1e-3, 0.05, 0.2, 0.5, 1.0, 3.0] {
            let a = random_matrix(4, 7, scale);
            // Taylor with exact squaring as an independent reference.
            let s = 10;
            let small = &a * c(0.5f64.powi(s));
            let mut term = CMatrix::identity(4, 4);
            let mut sum = term.clone();
            for k in 1..30 {
                term = &term * &small * c(1.0 / k as f64);
                sum += &term;
            }
            for _ in 0..s {
                sum = &sum * &sum;
            }
            let e = expm(&a);
            assert!(max_norm(&(e - &sum)) <= 1e-12 * max_norm(&sum).max(1.0), "scale {scale}");
        }
    }

    #[test]
    fn logm_inverts_expm() {
        for seed in 0..20 {
            let a = random_matrix(4, seed, 0.6);
            let l = logm_principal(&expm(&a)).unwrap();
            // Spectrum of `a` stays inside the principal strip at this scale.
            assert!(max_norm(&(l - &a)) < 1e-11, "seed {seed}");
        }
    }

    #[test]
    fn expm_of_logm_round_trip_non_normal() {
        let mut a = random_matrix(6, 99, 1.0);
        a += CMatrix::identity(6, 6) * c(4.0);
        let l = logm_principal(&a).unwrap();
        let back = expm(&l);
        assert!(max_norm(&(back - &a)) <= 1e-10 * max_norm(&a));
        for z in eigenvalues(&l).unwrap() {
            assert!(z.im > -std::f64::consts::PI && z.im <= std::f64::consts::PI);
        }
    }

    #[test]
    fn logm_handles_repeated_eigenvalues() {
        let mut a = CMatrix::identity(4, 4);
        a[(0, 1)] = c(0.5);
        let l = logm_principal(&a).unwrap();
        assert!(max_norm(&(expm(&l) - &a)) < 1e-14);
    }

    #[test]
    fn logm_rejects_negative_real_eigenvalue() {
        let a = CMatrix::from_diagonal(&CVector::from_row_slice(&[c(-1.0), c(2.0)]));
        match logm_principal(&a) {
            Err(FloquetError::BranchAmbiguity { eigenvalue, .. }) => {
                assert!((eigenvalue - c(-1.0)).norm() < 1e-12)
            }
            other => panic!("expected branch error, got {other:?}"),
        }
    }

    #[test]
    fn logm_rejects_singular() {
        let a = CMatrix::from_diagonal(&CVector::from_row_slice(&[c(0.0), c(2.0)]));
        assert!(matches!(
            logm_principal(&a),
            Err(FloquetError::SingularMonodromy { .. })
        ));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(6);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // Exact up to degree 11.
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(11)).sum();
        assert!((integral - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn null_direction_of_rank_deficient_matrix() {
        let mut a = CMatrix::identity(3, 3);
        a[(2, 2)] = c(0.0);
        let nd = null_direction(&a).unwrap();
        assert!(nd.smallest < 1e-15);
        assert!((nd.vector[2].norm() - 1.0).abs() < 1e-14);
    }
}
