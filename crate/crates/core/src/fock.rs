//! Truncated Fock-space simulation of the pulsed protocol.
//!
//! States are dense density matrices over `n_modes` bosonic modes, each cut
//! at `dim` levels. The basis index of `|n₀, n₁, …⟩` is
//! `Σ n_i · dim^(n_modes − 1 − i)` (mode 0 most significant).
//!
//! Beam splitters conserve total photon number, so with a vacuum ancilla the
//! two-mode unitary only acts inside photon-number sectors that fit the
//! truncation. Each sector block is obtained by exponentiating the generator
//! restricted to it, and the ancilla is contracted directly into the system
//! indices. [`TruncatedDensityMatrix::with_vacuum_ancilla`],
//! [`TruncatedDensityMatrix::apply_two_mode_unitary`] and
//! [`TruncatedDensityMatrix::partial_trace`] spell out the same channel on the
//! enlarged space for small truncations.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

/// Largest probability that may be cut off by the truncation.
pub const TRUNCATION_TOL: f64 = 1e-8;

const MAX_MODES: usize = 3;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDensityMatrix {
    n_modes: usize,
    dim: usize,
    /// Upper bound on the probability lost to the truncation.
    tail: f64,
    data: DMatrix<Complex64>,
}

/// Smallest truncation for which a two-mode squeezed vacuum of parameter `r`
/// leaks less than [`TRUNCATION_TOL`] (never below 2).
pub fn adaptive_dim(r: f64) -> usize {
    let t2 = r.tanh().powi(2);
    if t2 == 0.0 {
        return 2;
    }
    let d = (TRUNCATION_TOL.ln() / t2.ln()).floor() as usize + 1;
    d.max(2)
}

fn check_leak(dim: usize, leak: f64) -> Result<()> {
    if leak > TRUNCATION_TOL {
        return Err(Error::TruncationTooSmall {
            dim,
            leak,
            tol: TRUNCATION_TOL,
        });
    }
    Ok(())
}

/// Amplitudes `⟨m, N−m| U |N−k, k⟩` of `U = exp(θ(e^{iφ} a†b − e^{−iφ} a b†))`
/// inside the `N`-photon sector, indexed `[m, k]` by the photons in the
/// second mode.
pub fn beam_splitter_sector(total: usize, theta: f64, phi: f64) -> DMatrix<Complex64> {
    let n = total + 1;
    let phase = Complex64::from_polar(1.0, phi);
    let mut gen = DMatrix::<Complex64>::zeros(n, n);
    // basis |total − k, k⟩; a†b moves one photon from the second mode to the first
    for k in 1..n {
        let first = (total - k) as f64;
        let amp = ((first + 1.0) * k as f64).sqrt() * theta;
        gen[(k - 1, k)] += phase * amp;
        gen[(k, k - 1)] -= phase.conj() * amp;
    }
    gen.exp()
}

/// Split amplitudes `A[n][j]` of a vacuum-ancilla beam splitter: the
/// amplitude for `n` input photons to leave `j` in the kept output port.
struct SplitTable(Vec<Vec<Complex64>>);

impl SplitTable {
    /// Kept port is the input mode itself (loss channel).
    fn loss(dim: usize, transmittance: f64) -> Self {
        let theta = transmittance.sqrt().acos();
        let rows = (0..dim)
            .map(|n| {
                let u = beam_splitter_sector(n, theta, 0.0);
                // input |n, 0⟩ is column 0; output |j, n−j⟩ is row n − j
                (0..=n).map(|j| u[(n - j, 0)]).collect()
            })
            .collect();
        Self(rows)
    }

    /// Kept port is the second mode of the splitter (state transfer onto a
    /// fresh mode). The phase makes `b₂ → √(1−W) b₂ + i√W C`.
    fn transfer(dim: usize, efficiency: f64) -> Self {
        let theta = efficiency.sqrt().asin();
        let rows = (0..dim)
            .map(|n| {
                let u = beam_splitter_sector(n, theta, std::f64::consts::FRAC_PI_2);
                (0..=n).map(|j| u[(j, 0)]).collect()
            })
            .collect();
        Self(rows)
    }

    fn get(&self, n: usize, j: usize) -> Complex64 {
        self.0[n][j]
    }
}

impl TruncatedDensityMatrix {
    fn check_shape(n_modes: usize, dim: usize) -> Result<usize> {
        if !(1..=MAX_MODES).contains(&n_modes) {
            return Err(Error::Domain(format!(
                "1 to {MAX_MODES} modes supported, got {n_modes}"
            )));
        }
        if dim < 2 {
            return Err(Error::Domain(format!("truncation must be at least 2, got {dim}")));
        }
        dim.checked_pow(n_modes as u32)
            .ok_or_else(|| Error::Domain("state space too large".into()))
    }

    /// Wraps an explicit matrix; `tail` is the declared truncation leak.
    pub fn from_matrix(n_modes: usize, dim: usize, data: DMatrix<Complex64>, tail: f64) -> Result<Self> {
        let size = Self::check_shape(n_modes, dim)?;
        if data.shape() != (size, size) {
            return Err(Error::Domain(format!(
                "expected a {size}x{size} matrix, got {:?}",
                data.shape()
            )));
        }
        Ok(Self {
            n_modes,
            dim,
            tail,
            data,
        })
    }

    pub fn vacuum(n_modes: usize, dim: usize) -> Result<Self> {
        let size = Self::check_shape(n_modes, dim)?;
        let mut data = DMatrix::zeros(size, size);
        data[(0, 0)] = Complex64::new(1.0, 0.0);
        Self::from_matrix(n_modes, dim, data, 0.0)
    }

    /// Single-mode thermal state with mean occupation `n`, cut at `dim`
    /// levels without renormalization.
    pub fn thermal(n: f64, dim: usize) -> Result<Self> {
        if !(n >= 0.0) {
            return Err(Error::Domain(format!("occupation must be non-negative, got {n}")));
        }
        let q = n / (n + 1.0);
        let leak = q.powi(dim as i32);
        check_leak(dim, leak)?;
        let size = Self::check_shape(1, dim)?;
        let mut data = DMatrix::zeros(size, size);
        for k in 0..dim {
            data[(k, k)] = Complex64::new(q.powi(k as i32) / (n + 1.0), 0.0);
        }
        Self::from_matrix(1, dim, data, leak)
    }

    /// Two-mode squeezed vacuum over (mechanics, optical temporal mode) with
    /// amplitudes `sech r · (i tanh r)ⁿ` on `|n, n⟩`. Not renormalized; the
    /// missing weight `tanh^{2·dim} r` is the declared tail.
    pub fn tmsv(r: f64, dim: usize) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!(
                "squeeze parameter must be finite and >= 0, got {r}"
            )));
        }
        let size = Self::check_shape(2, dim)?;
        let t = r.tanh();
        let leak = t.powi(2 * dim as i32);
        check_leak(dim, leak)?;
        let sech = 1.0 / r.cosh();
        let amp: Vec<Complex64> = (0..dim).map(|n| I.powu(n as u32) * (sech * t.powi(n as i32))).collect();
        let mut data = DMatrix::zeros(size, size);
        for n in 0..dim {
            for m in 0..dim {
                data[(n * dim + n, m * dim + m)] = amp[n] * amp[m].conj();
            }
        }
        Self::from_matrix(2, dim, data, leak)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn index(&self, occupations: &[usize]) -> usize {
        occupations.iter().fold(0, |acc, &n| acc * self.dim + n)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.n_modes];
        for slot in occ.iter_mut().rev() {
            *slot = index % self.dim;
            index /= self.dim;
        }
        occ
    }

    fn stride(&self, mode: usize) -> usize {
        self.dim.pow((self.n_modes - 1 - mode) as u32)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::ModeOutOfRange {
                index: mode,
                modes: self.n_modes,
            });
        }
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// Largest `|ρ − ρ†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.data - self.data.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(blockwise_hermitian_eigenvalues(&self.data)?
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }

    /// Applies a channel that keeps `j` of the `n` photons in `mode` with
    /// amplitude `table[n][j]`, summing over the discarded count.
    fn apply_split(&self, mode: usize, table: &SplitTable) -> Self {
        let size = self.data.nrows();
        let stride = self.stride(mode);
        let mut out = DMatrix::<Complex64>::zeros(size, size);
        for col in 0..size {
            let nc = (col / stride) % self.dim;
            let base_c = col - nc * stride;
            for row in 0..size {
                let v = self.data[(row, col)];
                if v == ZERO {
                    continue;
                }
                let nr = (row / stride) % self.dim;
                let base_r = row - nr * stride;
                for k in 0..=nr.min(nc) {
                    let (jr, jc) = (nr - k, nc - k);
                    let amp = table.get(nr, jr) * table.get(nc, jc).conj();
                    out[(base_r + jr * stride, base_c + jc * stride)] += amp * v;
                }
            }
        }
        Self {
            n_modes: self.n_modes,
            dim: self.dim,
            tail: self.tail,
            data: out,
        }
    }

    /// Mixes `mode` with a vacuum ancilla on a beam splitter of the given
    /// transmittance and discards the ancilla.
    pub fn apply_beamsplitter_loss(&self, mode: usize, transmittance: f64) -> Result<Self> {
        self.check_mode(mode)?;
        check_leak(self.dim, self.tail)?;
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::Domain(format!(
                "transmittance must lie in [0, 1], got {transmittance}"
            )));
        }
        Ok(self.apply_split(mode, &SplitTable::loss(self.dim, transmittance)))
    }

    /// Swaps the optical mode (index 1) onto a vacuum mechanical mode with
    /// efficiency `W` and traces out the optical output. The result is over
    /// `(b₁, b₂)`.
    pub fn apply_transfer(&self, efficiency: f64) -> Result<Self> {
        if self.n_modes != 2 {
            return Err(Error::Domain(format!(
                "transfer expects (mechanics, optical) modes, got {} modes",
                self.n_modes
            )));
        }
        check_leak(self.dim, self.tail)?;
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::Domain(format!(
                "transfer efficiency must lie in [0, 1], got {efficiency}"
            )));
        }
        Ok(self.apply_split(1, &SplitTable::transfer(self.dim, efficiency)))
    }

    /// Appends a vacuum mode at the end.
    pub fn with_vacuum_ancilla(&self) -> Result<Self> {
        let size = Self::check_shape(self.n_modes + 1, self.dim)?;
        let mut data = DMatrix::zeros(size, size);
        for c in 0..self.data.ncols() {
            for r in 0..self.data.nrows() {
                data[(r * self.dim, c * self.dim)] = self.data[(r, c)];
            }
        }
        Ok(Self {
            n_modes: self.n_modes + 1,
            dim: self.dim,
            tail: self.tail,
            data,
        })
    }

    /// `ρ → UρU†` for the beam splitter `exp(θ(e^{iφ} a†b − e^{−iφ} a b†))`
    /// on modes `(first, second)`. Sectors whose photon number exceeds the
    /// truncation are left untouched, so this is exact only for states with
    /// no weight there (for instance after [`Self::with_vacuum_ancilla`]).
    pub fn apply_two_mode_unitary(&self, first: usize, second: usize, theta: f64, phi: f64) -> Result<Self> {
        self.check_mode(first)?;
        self.check_mode(second)?;
        if first == second {
            return Err(Error::Domain("beam splitter needs two distinct modes".into()));
        }
        let size = self.data.nrows();
        let (s1, s2) = (self.stride(first), self.stride(second));
        let mut u = DMatrix::<Complex64>::zeros(size, size);
        let sectors: Vec<_> = (0..self.dim).map(|n| beam_splitter_sector(n, theta, phi)).collect();
        for idx in 0..size {
            let n1 = (idx / s1) % self.dim;
            let n2 = (idx / s2) % self.dim;
            let total = n1 + n2;
            let base = idx - n1 * s1 - n2 * s2;
            if total >= self.dim {
                u[(idx, idx)] = Complex64::new(1.0, 0.0);
                continue;
            }
            let block = &sectors[total];
            for m in 0..=total {
                u[(base + (total - m) * s1 + m * s2, idx)] = block[(m, n2)];
            }
        }
        Ok(Self {
            data: &u * &self.data * u.adjoint(),
            ..self.clone()
        })
    }

    /// Traces out one mode.
    pub fn partial_trace(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        if self.n_modes == 1 {
            return Err(Error::Domain("cannot trace out the only mode".into()));
        }
        let size = self.data.nrows() / self.dim;
        let stride = self.stride(mode);
        let expand = |reduced: usize, k: usize| {
            let high = reduced / stride;
            let low = reduced % stride;
            (high * self.dim + k) * stride + low
        };
        let mut data = DMatrix::zeros(size, size);
        for c in 0..size {
            for r in 0..size {
                data[(r, c)] = (0..self.dim).map(|k| self.data[(expand(r, k), expand(c, k))]).sum();
            }
        }
        Ok(Self {
            n_modes: self.n_modes - 1,
            dim: self.dim,
            tail: self.tail,
            data,
        })
    }

    /// `Tr(ρ O)` for an operator given by its action on basis states:
    /// `O|t⟩ = amp(t) |shift(t)⟩`.
    fn expect(&self, action: impl Fn(&[usize]) -> Option<(Vec<usize>, f64)>) -> Complex64 {
        let size = self.data.nrows();
        let mut sum = ZERO;
        for t in 0..size {
            let occ = self.occupations(t);
            if let Some((s, amp)) = action(&occ) {
                if s.iter().all(|&n| n < self.dim) {
                    sum += self.data[(t, self.index(&s))] * amp;
                }
            }
        }
        sum
    }

    fn lower(occ: &[usize], mode: usize, times: usize) -> Option<(Vec<usize>, f64)> {
        let n = occ[mode];
        if n < times {
            return None;
        }
        let mut s = occ.to_vec();
        s[mode] -= times;
        let amp = (n + 1 - times..=n).map(|k| (k as f64).sqrt()).product();
        Some((s, amp))
    }

    /// Quadrature covariance matrix from the truncated ladder operators,
    /// with first moments subtracted.
    pub fn numeric_cm(&self) -> Result<CovarianceMatrix> {
        let modes = self.n_modes;
        let norm = self.trace().re;
        let mut mean = vec![ZERO; modes];
        let mut v = DMatrix::<f64>::zeros(2 * modes, 2 * modes);
        for i in 0..modes {
            mean[i] = self.expect(|o| Self::lower(o, i, 1)) / norm;
            let a2 = self.expect(|o| Self::lower(o, i, 2)) / norm;
            let n = self.expect(|o| Some((o.to_vec(), o[i] as f64))).re / norm;
            let (mx, my) = (2f64.sqrt() * mean[i].re, 2f64.sqrt() * mean[i].im);
            v[(2 * i, 2 * i)] = a2.re + n + 0.5 - mx * mx;
            v[(2 * i + 1, 2 * i + 1)] = -a2.re + n + 0.5 - my * my;
            v[(2 * i, 2 * i + 1)] = a2.im - mx * my;
            v[(2 * i + 1, 2 * i)] = v[(2 * i, 2 * i + 1)];
        }
        for i in 0..modes {
            for j in i + 1..modes {
                let ab = self.expect(|o| {
                    let (s, x) = Self::lower(o, i, 1)?;
                    let (s, y) = Self::lower(&s, j, 1)?;
                    Some((s, x * y))
                }) / norm;
                // a_i† a_j |t⟩ = √(t_j (t_i + 1)) |t − e_j + e_i⟩
                let adag_b = self.expect(|o| {
                    let (mut s, y) = Self::lower(o, j, 1)?;
                    s[i] += 1;
                    Some((s, y * ((o[i] + 1) as f64).sqrt()))
                }) / norm;
                let (xi, yi) = (2f64.sqrt() * mean[i].re, 2f64.sqrt() * mean[i].im);
                let (xj, yj) = (2f64.sqrt() * mean[j].re, 2f64.sqrt() * mean[j].im);
                let block = [
                    ab.re + adag_b.re - xi * xj,
                    ab.im + adag_b.im - xi * yj,
                    ab.im - adag_b.im - yi * xj,
                    -ab.re + adag_b.re - yi * yj,
                ];
                for (k, value) in block.into_iter().enumerate() {
                    let (r, c) = (2 * i + k / 2, 2 * j + k % 2);
                    v[(r, c)] = value;
                    v[(c, r)] = value;
                }
            }
        }
        CovarianceMatrix::new(v)
    }

    /// Partial transpose on `mode`.
    pub fn partial_transpose(&self, mode: usize) -> Result<DMatrix<Complex64>> {
        self.check_mode(mode)?;
        let size = self.data.nrows();
        let stride = self.stride(mode);
        let mut out = DMatrix::zeros(size, size);
        for c in 0..size {
            let nc = (c / stride) % self.dim;
            for r in 0..size {
                let nr = (r / stride) % self.dim;
                let r2 = r - nr * stride + nc * stride;
                let c2 = c - nc * stride + nr * stride;
                out[(r2, c2)] = self.data[(r, c)];
            }
        }
        Ok(out)
    }

    /// `ln ‖ρ^{T_B}‖₁` with the partial transpose taken on `transposed_mode`.
    pub fn numeric_log_negativity(&self, transposed_mode: usize) -> Result<f64> {
        if self.n_modes != 2 {
            return Err(Error::Domain("negativity is defined here for two modes".into()));
        }
        let pt = self.partial_transpose(transposed_mode)?;
        let norm: f64 = blockwise_hermitian_eigenvalues(&pt)?.iter().map(|x| x.abs()).sum();
        Ok(norm.ln())
    }
}

/// Eigenvalues of a Hermitian matrix, diagonalizing each connected component
/// of its sparsity pattern separately.
fn blockwise_hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for c in 0..n {
        for r in 0..c {
            if m[(r, c)] != ZERO || m[(c, r)] != ZERO {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut eigenvalues = Vec::with_capacity(n);
    for members in groups.values() {
        let k = members.len();
        let block = DMatrix::from_fn(k, k, |r, c| m[(members[r], members[c])]);
        let eig = SymmetricEigen::try_new(block, f64::EPSILON, 10_000).ok_or(Error::EigenFailure(k))?;
        eigenvalues.extend(eig.eigenvalues.iter().copied());
    }
    Ok(eigenvalues)
}

/// Two-mode squeezing, fiber loss and state transfer: the full pulsed
/// pipeline in Fock space. Returns the state over `(b₁, b₂)`.
pub fn pulse_pipeline(r: f64, w: f64, reflectivity: f64, dim: usize) -> Result<TruncatedDensityMatrix> {
    TruncatedDensityMatrix::tmsv(r, dim)?
        .apply_beamsplitter_loss(1, 1.0 - reflectivity)?
        .apply_transfer(w)
}
