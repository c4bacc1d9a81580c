//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::scalar::{cis, cr, CMatrix, Real};

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    DMatrix::identity(n, n)
}

pub fn zeros<T: Real>(rows: usize, cols: usize) -> CMatrix<T> {
    DMatrix::zeros(rows, cols)
}

/// Largest entry modulus, `‖A‖_max`.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// `‖A − B‖_max`.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).modulus()))
}

/// `‖B†B − 1‖_max`, the deviation of `B` from unitarity.
pub fn unitarity_deviation<T: Real>(b: &CMatrix<T>) -> T {
    if !b.is_square() {
        return T::max_value().unwrap_or_else(T::one);
    }
    let n = b.nrows();
    let gram = b.adjoint() * b;
    max_abs_diff(&gram, &identity(n))
}

/// `‖H − H†‖_max`.
pub fn hermiticity_deviation<T: Real>(h: &CMatrix<T>) -> T {
    if !h.is_square() {
        return T::max_value().unwrap_or_else(T::one);
    }
    max_abs_diff(h, &h.adjoint())
}

/// Nearest unitary in Frobenius norm, `U = B (B†B)^{-1/2}`, computed from
/// the SVD as `U = W V†`.
pub fn nearest_unitary<T: Real>(b: &CMatrix<T>) -> CMatrix<T> {
    let svd = b.clone().svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    u * v_t
}

/// Kronecker product `A ⊗ B`.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// Embed a local operator acting on factor `index` of a tensor product with
/// factor dimensions `dims` (identity on every other factor, first factor
/// most significant).
pub fn embed<T: Real>(op: &CMatrix<T>, dims: &[usize], index: usize) -> CMatrix<T> {
    let mut out = identity::<T>(1);
    for (k, &d) in dims.iter().enumerate() {
        out = if k == index {
            kron(&out, op)
        } else {
            kron(&out, &identity(d))
        };
    }
    out
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<Complex<T>> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

pub fn spectral_radius<T: Real>(m: &CMatrix<T>) -> T {
    eigenvalues(m)
        .into_iter()
        .fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

pub fn sigma_max<T: Real>(m: &CMatrix<T>) -> T {
    singular_values(m)
        .into_iter()
        .fold(T::zero(), |acc, s| acc.max(s))
}

/// 2-norm condition number `σ_max / σ_min`; infinite for singular input.
pub fn condition_number<T: Real>(m: &CMatrix<T>) -> T {
    let sv = singular_values(m);
    if sv.is_empty() {
        return T::one();
    }
    let hi = sv.iter().fold(T::zero(), |acc, &s| acc.max(s));
    let lo = sv.iter().fold(hi, |acc, &s| acc.min(s));
    if lo == T::zero() {
        T::max_value().unwrap_or_else(|| T::lit(f64::MAX))
    } else {
        hi / lo
    }
}

/// `exp(i·s·H)` for Hermitian `H`, via its eigendecomposition. The result is
/// unitary up to round-off.
pub fn exp_i_hermitian<T: Real>(h: &CMatrix<T>, s: T) -> CMatrix<T> {
    let eig = h.clone().symmetric_eigen();
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| cis(s * l)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Largest eigenvalue magnitude of a Hermitian matrix.
pub fn hermitian_norm<T: Real>(h: &CMatrix<T>) -> T {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(T::zero(), |acc, l| acc.max(l.abs()))
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    m.diagonal().iter().fold(cr(T::zero()), |acc, z| acc + *z)
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub fn anticommutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b + b * a
}

/// Single-qubit operators in the basis `{|↑⟩, |↓⟩}` (excited state first).
pub mod qubit {
    use super::*;
    use crate::scalar::c;

    pub fn sigma_minus<T: Real>() -> CMatrix<T> {
        let z = cr(T::zero());
        let o = cr(T::one());
        DMatrix::from_row_slice(2, 2, &[z, z, o, z])
    }

    pub fn sigma_plus<T: Real>() -> CMatrix<T> {
        sigma_minus::<T>().adjoint()
    }

    pub fn sigma_x<T: Real>() -> CMatrix<T> {
        let z = cr(T::zero());
        let o = cr(T::one());
        DMatrix::from_row_slice(2, 2, &[z, o, o, z])
    }

    pub fn sigma_y<T: Real>() -> CMatrix<T> {
        let z = cr(T::zero());
        DMatrix::from_row_slice(2, 2, &[z, c(T::zero(), -T::one()), c(T::zero(), T::one()), z])
    }

    pub fn sigma_z<T: Real>() -> CMatrix<T> {
        let z = cr(T::zero());
        DMatrix::from_row_slice(2, 2, &[cr(T::one()), z, z, cr(-T::one())])
    }

    /// Pauli matrix by letter (`I`, `X`, `Y`, `Z`, case-insensitive).
    pub fn pauli<T: Real>(letter: char) -> Option<CMatrix<T>> {
        match letter.to_ascii_uppercase() {
            'I' => Some(identity(2)),
            'X' => Some(sigma_x()),
            'Y' => Some(sigma_y()),
            'Z' => Some(sigma_z()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn nearest_unitary_is_unitary_and_fixes_unitaries() {
        let b = DMatrix::from_row_slice(
            2,
            2,
            &[c(0.9, 0.1), c(0.3, 0.0), c(-0.2, 0.05), c(0.95, -0.1)],
        );
        let u = nearest_unitary(&b);
        assert!(unitarity_deviation(&u) < 1e-14);
        let again = nearest_unitary(&u);
        assert!(max_abs_diff(&u, &again) < 1e-14);
    }

    #[test]
    fn embed_places_operator_on_requested_factor() {
        let sm = qubit::sigma_minus::<f64>();
        let a = embed(&sm, &[2, 2], 0);
        let b = embed(&sm, &[2, 2], 1);
        assert_eq!(a, kron(&sm, &identity(2)));
        assert_eq!(b, kron(&identity(2), &sm));
    }

    #[test]
    fn spectral_radius_of_triangular_matrix() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.5, 0.0),
                c(1.0, 2.0),
                c(0.0, 1.0),
                c(0.0, 0.0),
                c(0.0, -0.7),
                c(3.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.1, 0.1),
            ],
        );
        assert!((spectral_radius(&m) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_of_complex_rotation() {
        // eigenvalues ±i·0.8 of a non-triangular complex matrix
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.8, 0.0), c(-0.8, 0.0), c(0.0, 0.0)]);
        assert!((spectral_radius(&m) - 0.8).abs() < 1e-12);
        let p = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.9, 0.0),
                c(0.9, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.9, 0.0),
                c(0.0, 0.0),
            ],
        );
        assert!((spectral_radius(&p) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn exp_of_hermitian_is_unitary() {
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.3), c(0.2, -0.3), c(-0.5, 0.0)]);
        let u = exp_i_hermitian(&h, 0.7);
        assert!(unitarity_deviation(&u) < 1e-14);
    }

    #[test]
    fn sigma_minus_lowers_excited_state() {
        let sm = qubit::sigma_minus::<f64>();
        // |↑⟩ = e0 → |↓⟩ = e1
        assert_eq!(sm[(1, 0)], c(1.0, 0.0));
        assert_eq!(sm[(0, 1)], c(0.0, 0.0));
        let sz = qubit::sigma_z::<f64>();
        assert_eq!(sm.adjoint() * &sm - (sz + identity(2)) * c(0.5, 0.0), zeros(2, 2));
    }
}
