//! Seeded random matrices for imperfect networks and property tests.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, hermitian_norm};
use crate::scalar::{c, cis, cr, CMatrix, Real};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = StandardNormal.sample(rng);
    T::lit(x)
}

/// `n × n` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix<T> {
    let half = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    CMatrix::from_fn(n, n, |_, _| c(gaussian::<T, R>(rng) * half, gaussian::<T, R>(rng) * half))
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix<T> {
    let qr = ginibre::<T, R>(rng, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let m = d.norm_sqr().sqrt();
        if m > T::zero() {
            let phase = d / cr(m);
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Random Hermitian matrix normalized to unit spectral norm.
pub fn unit_hermitian<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix<T> {
    let a = ginibre::<T, R>(rng, n);
    let h = (&a + a.adjoint()) * cr(T::lit(0.5));
    let norm = hermitian_norm(&h);
    if norm > T::zero() {
        h / cr(norm)
    } else {
        linalg::identity(n)
    }
}

/// Uniform phase in `[0, 2π)`.
pub fn phase<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    T::lit(x)
}

/// Random partial permutation with `m` nonzero unit-modulus entries,
/// `W[to, from]`, returned with the `(from, to)` pairs.
pub fn partial_permutation<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
) -> (CMatrix<T>, Vec<(usize, usize)>) {
    let m = m.min(n);
    let mut outs: Vec<usize> = (0..n).collect();
    let mut ins: Vec<usize> = (0..n).collect();
    outs.shuffle(rng);
    ins.shuffle(rng);
    let mut w = linalg::zeros(n, n);
    let mut pairs = Vec::with_capacity(m);
    for k in 0..m {
        w[(ins[k], outs[k])] = cis(phase::<T, R>(rng));
        pairs.push((outs[k], ins[k]));
    }
    (w, pairs)
}


/// Haar-random `S` on `n` ports with a random `m`-link connection matrix.
pub fn random_feedback_pair<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
) -> (CMatrix<T>, CMatrix<T>) {
    let s = haar_unitary(rng, n);
    let (w, _) = partial_permutation(rng, n, m);
    (s, w)
}
