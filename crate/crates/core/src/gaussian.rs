//! Covariance-matrix algebra for Gaussian states.
//!
//! Quadratures are `X = (a + a†)/√2`, `Y = -i(a - a†)/√2`, so the vacuum has
//! variance ½. Mode `i` occupies rows/columns `2i` (X) and `2i + 1` (Y).

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_PHYSICALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    data: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a `2N × 2N` matrix, enforcing symmetry by averaging with its
    /// transpose.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let (r, c) = data.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::Domain(format!(
                "covariance matrix must be 2N x 2N, got {r} x {c}"
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("covariance matrix has non-finite entries".into()));
        }
        let sym = (&data + data.transpose()) * 0.5;
        Ok(Self { data: sym })
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::thermal(&vec![0.0; modes])
    }

    /// Product of thermal states with the given mean occupations.
    pub fn thermal(occupations: &[f64]) -> Self {
        let diag: Vec<f64> = occupations.iter().flat_map(|n| [n + 0.5, n + 0.5]).collect();
        Self {
            data: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
        }
    }

    /// Two-mode squeezed vacuum in standard form,
    /// `A = B = cosh(2r)/2 · I`, `C = sinh(2r)/2 · diag(1, -1)`.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let a = 0.5 * (2.0 * r).cosh();
        let c = 0.5 * (2.0 * r).sinh();
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[a, 0.0, c, 0.0, 0.0, a, 0.0, -c, c, 0.0, a, 0.0, 0.0, -c, 0.0, a],
        );
        Self { data: m }
    }

    pub fn modes(&self) -> usize {
        self.data.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes() {
            return Err(Error::ModeOutOfRange {
                index: mode,
                modes: self.modes(),
            });
        }
        Ok(())
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &CovarianceMatrix) -> CovarianceMatrix {
        let n = self.data.nrows();
        let m = other.data.nrows();
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.data);
        out.view_mut((n, n), (m, m)).copy_from(&other.data);
        CovarianceMatrix { data: out }
    }

    /// The 4×4 covariance matrix of modes `(mode_a, mode_b)`, in that order.
    pub fn extract_bipartite(&self, mode_a: usize, mode_b: usize) -> Result<CovarianceMatrix> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(Error::Domain("bipartition needs two distinct modes".into()));
        }
        let idx = [2 * mode_a, 2 * mode_a + 1, 2 * mode_b, 2 * mode_b + 1];
        let sub = DMatrix::from_fn(4, 4, |i, j| self.data[(idx[i], idx[j])]);
        Ok(CovarianceMatrix { data: sub })
    }

    /// Residual quanta `(⟨δX²⟩ + ⟨δY²⟩ − 1)/2` in one mode.
    pub fn excitation_number(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        let i = 2 * mode;
        Ok(0.5 * (self.data[(i, i)] + self.data[(i + 1, i + 1)] - 1.0))
    }

    /// Uncertainty-principle check: smallest eigenvalue of the Hermitian
    /// matrix `V + (i/2)Ω` is at least `-tol`.
    pub fn check_physicality(&self, tol: f64) -> bool {
        match self.min_uncertainty_eigenvalue() {
            Some(lambda) => lambda >= -tol,
            None => false,
        }
    }

    pub fn min_uncertainty_eigenvalue(&self) -> Option<f64> {
        let n = self.data.nrows();
        let h = DMatrix::from_fn(n, n, |i, j| {
            let omega = if i / 2 != j / 2 {
                0.0
            } else if i % 2 == 0 && j == i + 1 {
                1.0
            } else if i % 2 == 1 && j + 1 == i {
                -1.0
            } else {
                0.0
            };
            Complex64::new(self.data[(i, j)], 0.5 * omega)
        });
        let eig = SymmetricEigen::try_new(h, 1e-15, 10_000)?;
        eig.eigenvalues.iter().copied().reduce(f64::min)
    }

    /// Logarithmic negativity of a two-mode state (natural log).
    ///
    /// With `V = [[A, C], [Cᵀ, B]]`, the smallest symplectic eigenvalue of the
    /// partial transpose is `ν⁻² = (Δ̃ − √(Δ̃² − 4 det V))/2`,
    /// `Δ̃ = det A + det B − 2 det C`, and `E_N = max(0, −ln 2ν⁻)`.
    ///
    /// The determinants are accumulated in double-word arithmetic and the
    /// small root is taken from `ν⁻² ν⁺² = det V`, so strongly squeezed
    /// states keep full relative accuracy in `ν⁻`.
    pub fn log_negativity(&self) -> Result<f64> {
        if self.modes() != 2 {
            return Err(Error::Domain(format!(
                "log negativity is defined here for two modes, got {}",
                self.modes()
            )));
        }
        let nu_sq = pt_min_symplectic_sq(&self.data)?;
        Ok((-0.5 * (4.0 * nu_sq).ln()).max(0.0))
    }

    /// Smallest symplectic eigenvalue of the partially transposed two-mode CM.
    pub fn pt_min_symplectic(&self) -> Result<f64> {
        if self.modes() != 2 {
            return Err(Error::Domain("two-mode covariance matrix required".into()));
        }
        Ok(pt_min_symplectic_sq(&self.data)?.sqrt())
    }
}

fn block(v: &DMatrix<f64>, r: usize, c: usize) -> Matrix2<f64> {
    Matrix2::new(v[(r, c)], v[(r, c + 1)], v[(r + 1, c)], v[(r + 1, c + 1)])
}

fn pt_min_symplectic_sq(v: &DMatrix<f64>) -> Result<f64> {
    use compensated::Dd;

    let det_a = Dd::det2(&block(v, 0, 0));
    let det_b = Dd::det2(&block(v, 2, 2));
    let det_c = Dd::det2(&block(v, 0, 2));
    let det_v = Dd::det4(v);
    let delta = det_a + det_b - det_c.scale(2.0);
    let disc = delta * delta - det_v.scale(4.0);

    let delta_f = delta.value();
    let disc_f = disc.value();
    if disc_f < -1e-9 * delta_f.powi(2).max(1.0) {
        return Err(Error::Unphysical(format!(
            "negative symplectic discriminant {disc_f:e}"
        )));
    }
    let det_f = det_v.value();
    let denom = delta_f + disc_f.max(0.0).sqrt();
    if !(det_f > 0.0) || !(denom > 0.0) {
        return Err(Error::Unphysical(format!(
            "non-positive invariants (det V = {det_f:e}, Δ̃ = {delta_f:e})"
        )));
    }
    Ok(2.0 * det_f / denom)
}

/// Double-word ("double-double") accumulation built on the exact
/// `fma`-based product error.
mod compensated {
    use nalgebra::{DMatrix, Matrix2};
    use std::ops::{Add, Mul, Sub};

    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        hi: f64,
        lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        (s, err)
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    impl Dd {
        pub fn from_f64(x: f64) -> Self {
            Dd { hi: x, lo: 0.0 }
        }

        fn from_prod(a: f64, b: f64) -> Self {
            let (hi, lo) = two_prod(a, b);
            Dd { hi, lo }
        }

        pub fn value(self) -> f64 {
            self.hi + self.lo
        }

        pub fn scale(self, k: f64) -> Self {
            self * Dd::from_f64(k)
        }

        pub fn det2(m: &Matrix2<f64>) -> Self {
            Dd::from_prod(m[(0, 0)], m[(1, 1)]) - Dd::from_prod(m[(0, 1)], m[(1, 0)])
        }

        /// Laplace expansion along the first two rows.
        pub fn det4(m: &DMatrix<f64>) -> Self {
            let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
                Dd::from_prod(m[(r0, c0)], m[(r1, c1)]) - Dd::from_prod(m[(r0, c1)], m[(r1, c0)])
            };
            // (column pair, complementary pair, sign)
            type Term = ((usize, usize), (usize, usize), f64);
            const TERMS: [Term; 6] = [
                ((0, 1), (2, 3), 1.0),
                ((0, 2), (1, 3), -1.0),
                ((0, 3), (1, 2), 1.0),
                ((1, 2), (0, 3), 1.0),
                ((1, 3), (0, 2), -1.0),
                ((2, 3), (0, 1), 1.0),
            ];
            TERMS.iter().fold(Dd::from_f64(0.0), |acc, &((a, b), (c, d), sign)| {
                let t = minor(0, 1, a, b) * minor(2, 3, c, d);
                if sign > 0.0 {
                    acc + t
                } else {
                    acc - t
                }
            })
        }
    }

    impl Add for Dd {
        type Output = Dd;
        fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.hi, o.hi);
            let (t, f) = two_sum(self.lo, o.lo);
            let (s, e) = two_sum(s, e + t);
            let (hi, lo) = two_sum(s, e + f);
            Dd { hi, lo }
        }
    }

    impl Sub for Dd {
        type Output = Dd;
        fn sub(self, o: Dd) -> Dd {
            self + Dd { hi: -o.hi, lo: -o.lo }
        }
    }

    impl Mul for Dd {
        type Output = Dd;
        fn mul(self, o: Dd) -> Dd {
            let (p, e) = two_prod(self.hi, o.hi);
            let e = e + (self.hi * o.lo + self.lo * o.hi);
            let (hi, lo) = two_sum(p, e);
            Dd { hi, lo }
        }
    }

}
