//! Dense-matrix reference implementation.
//!
//! Everything here is built from explicit tensor products of 2x2 blocks and
//! shares no code with the bitmask kernels in [`crate::fock`], so the two can
//! be compared against each other.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    apply_operator_string, LadderKind, LadderOp, ModeIndex, OperatorString, RegisterLayout,
    StateVector,
};

pub const DEFAULT_ORACLE_MAX_MODES: usize = 12;
pub const ORACLE_MAX_MODES_ENV: &str = "EXCHANGE_LAB_ORACLE_MAX_MODES";
/// Maximum operator-string length drawn by [`cross_check`].
pub const CROSS_CHECK_MAX_STRING: usize = 8;
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Mode cap for dense matrices, overridable through `EXCHANGE_LAB_ORACLE_MAX_MODES`.
pub fn max_modes() -> usize {
    std::env::var(ORACLE_MAX_MODES_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_MAX_MODES)
}

pub fn check_cap(modes: usize) -> Result<()> {
    let cap = max_modes();
    if modes > cap {
        Err(Error::OracleCapExceeded { modes, cap })
    } else {
        Ok(())
    }
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("matrix rows must form a square".into()));
        }
        Ok(DenseMatrix { dim, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.dim + col] = v;
    }

    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let dim = self.dim * other.dim;
        let mut out = DenseMatrix::zeros(dim);
        for ar in 0..self.dim {
            for ac in 0..self.dim {
                let a = self.get(ar, ac);
                if a == ZERO {
                    continue;
                }
                for br in 0..other.dim {
                    for bc in 0..other.dim {
                        out.set(ar * other.dim + br, ac * other.dim + bc, a * other.get(br, bc));
                    }
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> DenseMatrix {
        DenseMatrix { dim: self.dim, data: self.data.iter().map(|&a| a * s).collect() }
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

fn two_by_two(a: [[f64; 2]; 2]) -> DenseMatrix {
    DenseMatrix {
        dim: 2,
        data: a.iter().flatten().map(|&x| Complex64::new(x, 0.0)).collect(),
    }
}

/// Ladder operator on `mode` as an explicit tensor product.
///
/// Factors run from mode `M` (most significant) down to mode 1, so the basis
/// ordering matches the bitmask encoding. Lower-ordered modes whose species
/// anticommutes with the target's species carry `diag(1, -1)`.
pub fn dense_ladder(layout: &RegisterLayout, mode: ModeIndex, kind: LadderKind) -> Result<DenseMatrix> {
    check_cap(layout.modes())?;
    layout.check_mode(mode)?;
    let local = match kind {
        LadderKind::Annihilate => two_by_two([[0.0, 1.0], [0.0, 0.0]]),
        LadderKind::Create => two_by_two([[0.0, 0.0], [1.0, 0.0]]),
    };
    let z = two_by_two([[1.0, 0.0], [0.0, -1.0]]);
    let id = DenseMatrix::identity(2);
    let target = mode.value();
    let mut out = DenseMatrix::identity(1);
    for m in (1..=layout.modes() as u32).rev() {
        let q = ModeIndex::new(m)?;
        let factor = if m == target {
            &local
        } else if m < target && layout.exchange_sign(q, mode).is_minus() {
            &z
        } else {
            &id
        };
        out = out.kron(factor);
    }
    Ok(out)
}

/// Matrix of an operator string: the product of its factors in written order.
pub fn dense_string(layout: &RegisterLayout, s: &OperatorString) -> Result<DenseMatrix> {
    check_cap(layout.modes())?;
    let dim = 1usize << layout.modes();
    s.ops.iter().try_fold(DenseMatrix::identity(dim), |acc, op| {
        Ok(acc.matmul(&dense_ladder(layout, op.mode, op.kind)?))
    })
}

/// Applies an operator string to a dense vector one factor at a time, rightmost
/// first. Equal to `dense_string(s) * v` without forming the product matrix.
pub fn dense_apply_string(
    layout: &RegisterLayout,
    s: &OperatorString,
    v: &[Complex64],
) -> Result<Vec<Complex64>> {
    s.application_order().try_fold(v.to_vec(), |acc, op| {
        Ok(dense_ladder(layout, op.mode, op.kind)?.matvec(&acc))
    })
}

pub fn to_dense(psi: &StateVector) -> Vec<Complex64> {
    let mut v = vec![ZERO; 1usize << psi.layout().modes()];
    for (idx, a) in psi.iter() {
        v[idx as usize] = a;
    }
    v
}

pub fn from_dense(layout: Arc<RegisterLayout>, v: &[Complex64]) -> Result<StateVector> {
    StateVector::from_amplitudes(layout, v.iter().enumerate().map(|(i, &a)| (i as u64, a)))
}

/// Largest amplitude difference between a sparse state and a dense vector.
pub fn deviation(psi: &StateVector, v: &[Complex64]) -> f64 {
    let dense = to_dense(psi);
    dense.iter().zip(v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Random normalized state with Gaussian amplitudes on every basis index.
pub fn random_state(layout: Arc<RegisterLayout>, rng: &mut impl Rng) -> StateVector {
    let dim = 1usize << layout.modes();
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let scaled: Vec<Complex64> = amps.iter().map(|a| a / norm).collect();
    from_dense(layout, &scaled).expect("finite amplitudes within the layout")
}

pub fn random_string(modes: usize, max_len: usize, rng: &mut impl Rng) -> OperatorString {
    let len = rng.random_range(0..=max_len);
    let ops = (0..len)
        .map(|_| {
            let mode = ModeIndex::new(rng.random_range(1..=modes as u32)).unwrap();
            if rng.random_bool(0.5) {
                LadderOp::create(mode)
            } else {
                LadderOp::annihilate(mode)
            }
        })
        .collect();
    OperatorString::new(ops)
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckReport {
    pub modes: usize,
    pub trials: usize,
    pub seed: u64,
    pub max_deviation: f64,
    /// Trial index and string of the largest deviation.
    pub worst: Option<(usize, String)>,
    pub passed: bool,
}

/// Compares the bitmask kernels with the dense oracle on random strings and states.
pub fn cross_check(layout: &Arc<RegisterLayout>, trials: usize, seed: u64) -> Result<CrossCheckReport> {
    check_cap(layout.modes())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation = 0.0f64;
    let mut worst = None;
    for t in 0..trials {
        let psi = random_state(layout.clone(), &mut rng);
        let s = random_string(layout.modes(), CROSS_CHECK_MAX_STRING, &mut rng);
        let fast = apply_operator_string(&s, &psi)?;
        let dense = dense_apply_string(layout, &s, &to_dense(&psi))?;
        let d = deviation(&fast, &dense);
        if worst.is_none() || d > max_deviation {
            max_deviation = d;
            worst = Some((t, s.to_string()));
        }
    }
    Ok(CrossCheckReport {
        modes: layout.modes(),
        trials,
        seed,
        max_deviation,
        worst,
        passed: max_deviation <= CROSS_CHECK_TOLERANCE,
    })
}

pub fn hermitian_residual(h: &DenseMatrix) -> f64 {
    let n = h.dim;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h.get(i, j) - h.get(j, i).conj()).norm());
        }
    }
    worst
}

/// `exp(-iH)` for Hermitian `H` via eigendecomposition.
pub fn dense_expm_hermitian(h: &DenseMatrix) -> Result<DenseMatrix> {
    let residual = hermitian_residual(h);
    if residual > 1e-12 || !h.is_finite() {
        return Err(Error::NotHermitian { residual });
    }
    let n = h.dim;
    let m = DMatrix::from_row_slice(n, n, &h.data);
    let eig = SymmetricEigen::new(m);
    let v = &eig.eigenvectors;
    let phases: Vec<Complex64> =
        eig.eigenvalues.iter().map(|&l| Complex64::new(0.0, -l).exp()).collect();
    let mut out = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for (k, &p) in phases.iter().enumerate() {
                acc += v[(i, k)] * p * v[(j, k)].conj();
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// `f†_j f_i + f†_i f_j` built from dense ladder matrices.
pub fn dense_hop_generator(layout: &RegisterLayout, i: ModeIndex, j: ModeIndex) -> Result<DenseMatrix> {
    let forward = dense_ladder(layout, j, LadderKind::Create)?
        .matmul(&dense_ladder(layout, i, LadderKind::Annihilate)?);
    let backward = dense_ladder(layout, i, LadderKind::Create)?
        .matmul(&dense_ladder(layout, j, LadderKind::Annihilate)?);
    Ok(forward.add(&backward))
}
