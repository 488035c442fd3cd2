use nalgebra::{DMatrix, DVector, Schur};

use super::UPSTREAM_DIM;
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

const SCHUR_MAX_ITERATIONS: usize = 10_000;

/// Hurwitz test of the full drift matrix and of the two diagonal blocks
/// belonging to the upstream (`c`, `b`) and downstream (`a₁`, `a₂`, `m`)
/// nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stability {
    pub full: bool,
    pub upstream: bool,
    pub downstream: bool,
}

impl Stability {
    pub fn all(&self) -> bool {
        self.full && self.upstream && self.downstream
    }
}

fn max_real_eigenvalue(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if n == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITERATIONS).ok_or(Error::EigenFailure(n))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

fn is_hurwitz(a: &DMatrix<f64>) -> Result<bool> {
    Ok(max_real_eigenvalue(a)? < 0.0)
}

/// Eigenvalue stability of a drift matrix. The upstream block is the leading
/// 4×4 principal submatrix and the downstream block the trailing one; for
/// matrices smaller than 4×4 only `full` is meaningful and the block flags
/// mirror it.
pub fn check_stability(a: &DMatrix<f64>) -> Result<Stability> {
    if !a.is_square() {
        return Err(Error::Domain("drift matrix must be square".into()));
    }
    let n = a.nrows();
    let full = is_hurwitz(a)?;
    if n <= UPSTREAM_DIM {
        return Ok(Stability {
            full,
            upstream: full,
            downstream: full,
        });
    }
    let up = a.view((0, 0), (UPSTREAM_DIM, UPSTREAM_DIM)).clone_owned();
    let down = a
        .view((UPSTREAM_DIM, UPSTREAM_DIM), (n - UPSTREAM_DIM, n - UPSTREAM_DIM))
        .clone_owned();
    Ok(Stability {
        full,
        upstream: is_hurwitz(&up)?,
        downstream: is_hurwitz(&down)?,
    })
}

/// Solves `A X + X Bᵀ + Q = 0` for `X` (`n × m`, with `A` `n × n` and `B`
/// `m × m`) through the vectorized system
/// `(I_m ⊗ A + B ⊗ I_n) vec X = −vec Q`, followed by one step of iterative
/// refinement.
pub fn solve_sylvester(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let m = b.nrows();
    if !a.is_square() || !b.is_square() || q.shape() != (n, m) {
        return Err(Error::Domain("incompatible Sylvester operand shapes".into()));
    }
    let system = DMatrix::<f64>::identity(m, m).kronecker(a) + b.kronecker(&DMatrix::<f64>::identity(n, n));
    let rhs = -DVector::from_column_slice(q.as_slice());
    let lu = system.clone().lu();
    let mut x = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
    let correction = lu.solve(&(&rhs - &system * &x)).ok_or(Error::SingularSystem)?;
    x += correction;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(DMatrix::from_column_slice(n, m, x.as_slice()))
}

fn symmetrize(v: &DMatrix<f64>) -> DMatrix<f64> {
    (v + v.transpose()) * 0.5
}

/// Steady-state covariance matrix from `A V + V Aᵀ + D = 0`, solved as one
/// dense vectorized linear system.
pub fn solve_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    if !is_hurwitz(a)? {
        return Err(Error::Unstable);
    }
    let v = solve_sylvester(a, a, d)?;
    CovarianceMatrix::new(symmetrize(&v))
}

/// Lyapunov solve exploiting the one-way coupling of the cascade.
///
/// With `A = [[A_u, 0], [A_du, A_d]]` the upstream block obeys its own
/// Lyapunov equation, the cross block a Sylvester equation driven by it, and
/// the downstream block a Lyapunov equation with an augmented source. The
/// upstream covariance therefore depends on upstream inputs only, bit for
/// bit. Falls back to the dense solve when `A` has upstream-facing entries.
pub fn solve_lyapunov_cascaded(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let n = a.nrows();
    let u = UPSTREAM_DIM;
    let one_way = n > u && a.view((0, u), (u, n - u)).iter().all(|&x| x == 0.0);
    if !one_way {
        return solve_lyapunov(a, d);
    }
    if !is_hurwitz(a)? {
        return Err(Error::Unstable);
    }
    let k = n - u;
    let a_u = a.view((0, 0), (u, u)).clone_owned();
    let a_du = a.view((u, 0), (k, u)).clone_owned();
    let a_d = a.view((u, u), (k, k)).clone_owned();
    let d_u = d.view((0, 0), (u, u)).clone_owned();
    let d_ud = d.view((0, u), (u, k)).clone_owned();
    let d_d = d.view((u, u), (k, k)).clone_owned();

    let v_u = symmetrize(&solve_sylvester(&a_u, &a_u, &d_u)?);
    let v_ud = solve_sylvester(&a_u, &a_d, &(d_ud + &v_u * a_du.transpose()))?;
    let source = &a_du * &v_ud;
    let q = d_d + &source + source.transpose();
    let v_d = symmetrize(&solve_sylvester(&a_d, &a_d, &q)?);

    let mut v = DMatrix::zeros(n, n);
    v.view_mut((0, 0), (u, u)).copy_from(&v_u);
    v.view_mut((0, u), (u, k)).copy_from(&v_ud);
    v.view_mut((u, 0), (k, u)).copy_from(&v_ud.transpose());
    v.view_mut((u, u), (k, k)).copy_from(&v_d);
    // already symmetric; `new` re-averages, which leaves the blocks unchanged
    CovarianceMatrix::new(v)
}

/// `‖A V + V Aᵀ + D‖_F / ‖D‖_F`.
pub fn relative_residual(a: &DMatrix<f64>, v: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let r = a * v + v * a.transpose() + d;
    r.norm() / d.norm()
}
