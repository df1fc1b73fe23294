//! Thin helpers over `faer` dense complex matrices.

use faer::{Mat, Side};

use crate::{Error, Result, C64};

pub type DMat = Mat<C64>;

pub fn zeros(n: usize, m: usize) -> DMat {
    Mat::zeros(n, m)
}

pub fn identity(n: usize) -> DMat {
    Mat::identity(n, n)
}

pub fn matmul(a: &DMat, b: &DMat) -> DMat {
    a * b
}

pub fn adjoint(a: &DMat) -> DMat {
    a.adjoint().to_owned()
}

pub fn add(a: &DMat, b: &DMat) -> DMat {
    a + b
}

pub fn sub(a: &DMat, b: &DMat) -> DMat {
    a - b
}

pub fn scale(a: &DMat, s: C64) -> DMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn commutator(a: &DMat, b: &DMat) -> DMat {
    &(a * b) - &(b * a)
}

pub fn frobenius(a: &DMat) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn max_abs_diff(a: &DMat, b: &DMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn power(a: &DMat, k: usize) -> DMat {
    let mut out = identity(a.nrows());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

pub fn kron(a: &DMat, b: &DMat) -> DMat {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

/// Largest `|a - a†|` entry.
pub fn hermiticity_error(a: &DMat) -> f64 {
    max_abs_diff(a, &adjoint(a))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &DMat) -> Result<(Vec<f64>, DMat)> {
    let e = a.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let vals = e.S().column_vector().iter().map(|x| x.re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: &DMat) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigen)
}

/// `exp(-i t a)` for Hermitian `a`.
pub fn expm_hermitian(a: &DMat, t: f64) -> Result<DMat> {
    let (vals, v) = hermitian_eigen(a)?;
    let n = a.nrows();
    let vd = Mat::from_fn(n, n, |i, k| v[(i, k)] * C64::from_polar(1.0, -vals[k] * t));
    Ok(&vd * v.adjoint())
}

pub fn singular_values(a: &DMat) -> Result<Vec<f64>> {
    a.singular_values().map_err(|_| Error::Eigen)
}

/// Maps an angle into `(-π, π]`; values within `tol` of `-π` go to `+π`.
pub fn principal_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut x = theta.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    if (x + PI).abs() < 1e-12 || (x - PI).abs() < 1e-12 {
        x = PI;
    }
    x
}

/// `h` with `exp(-i h) = u` and eigenvalues in `(-π, π]`, for unitary `u`.
///
/// The eigenbasis comes from the Hermitian pencil `Re u + c Im u`, which shares
/// eigenvectors with `u` and separates distinct eigenphases for generic `c`.
pub fn unitary_log(u: &DMat) -> Result<DMat> {
    let n = u.nrows();
    let c = 0.618_033_988_749_894_9;
    let ud = adjoint(u);
    let mix = Mat::from_fn(n, n, |i, j| {
        let re = (u[(i, j)] + ud[(i, j)]) * 0.5;
        let im = (u[(i, j)] - ud[(i, j)]) * C64::new(0.0, -0.5);
        re + im * c
    });
    let (_, v) = hermitian_eigen(&mix)?;
    let uv = u * &v;
    let phases: Vec<f64> = (0..n)
        .map(|k| {
            let z: C64 = (0..n).map(|i| v[(i, k)].conj() * uv[(i, k)]).sum();
            principal_angle(z.arg())
        })
        .collect();
    let vd = Mat::from_fn(n, n, |i, k| v[(i, k)] * (-phases[k]));
    Ok(&vd * v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn principal_angle_interval() {
        assert_eq!(principal_angle(-PI), PI);
        assert_eq!(principal_angle(PI), PI);
        assert!((principal_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((principal_angle(0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unitary_log_round_trip() {
        let h = Mat::from_fn(5, 5, |i, j| {
            let x = ((i * 7 + j * 3) % 5) as f64 / 5.0 + ((j * 7 + i * 3) % 5) as f64 / 5.0;
            let y = if i == j { 0.0 } else if i < j { 0.3 * (i + j) as f64 } else { -0.3 * (i + j) as f64 };
            C64::new(x * 0.4, y * 0.2)
        });
        let u = expm_hermitian(&h, 1.0).unwrap();
        let back = unitary_log(&u).unwrap();
        assert!(max_abs_diff(&back, &h) < 1e-10);
    }

    #[test]
    fn kron_shapes() {
        let a = identity(2);
        let b = Mat::from_fn(2, 2, |i, j| C64::new((i * 2 + j) as f64, 0.0));
        let k = kron(&a, &b);
        assert_eq!(k.nrows(), 4);
        assert_eq!(k[(3, 2)], C64::new(2.0, 0.0));
        assert_eq!(k[(1, 2)], C64::new(0.0, 0.0));
    }
}
