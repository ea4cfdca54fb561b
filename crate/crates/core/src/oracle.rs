//! Dense density-matrix reference for the Bell-vector fast path.
//!
//! Qubits are ordered (A₁, B₁, A₂, B₂) with the first qubit most
//! significant; a single pair is (A, B). The control pair is (A₁, B₁).
//! Everything here is slow and allocation-heavy by design.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bellvec::{BellVector, NoiseModel};
use crate::error::{Error, Result};
use crate::protocols::Protocol;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hermitian, unit-trace, positive semidefinite matrix of dimension 4 or 16.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
    pub const TRACE_TOLERANCE: f64 = 1e-12;
    pub const PSD_TOLERANCE: f64 = 1e-10;

    pub fn new(m: CMatrix) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.validate()?;
        Ok(rho)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.0;
        if !m.is_square() || !(m.nrows() == 4 || m.nrows() == 16) {
            return Err(Error::InvalidVector(format!(
                "density matrix must be 4x4 or 16x16, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let skew = (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if skew > Self::HERMITIAN_TOLERANCE {
            return Err(Error::InvalidVector(format!(
                "not Hermitian (deviation {skew})"
            )));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > Self::TRACE_TOLERANCE {
            return Err(Error::InvalidVector(format!("trace {tr}")));
        }
        let low = self.min_eigenvalue();
        if low < -Self::PSD_TOLERANCE {
            return Err(Error::InvalidVector(format!("eigenvalue {low}")));
        }
        Ok(())
    }
}

/// Computational-basis amplitudes of |Φ⁺⟩, |Φ⁻⟩, |Ψ⁺⟩, |Ψ⁻⟩.
pub fn bell_basis() -> [DVector<Complex64>; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: [f64; 4]| DVector::from_iterator(4, a.iter().map(|&x| Complex64::new(x * h, 0.0)));
    [
        v([1.0, 0.0, 0.0, 1.0]),
        v([1.0, 0.0, 0.0, -1.0]),
        v([0.0, 1.0, 1.0, 0.0]),
        v([0.0, 1.0, -1.0, 0.0]),
    ]
}

pub fn bell_vector_to_density(q: &BellVector) -> DensityMatrix {
    let basis = bell_basis();
    let m = q
        .weights()
        .iter()
        .zip(&basis)
        .fold(CMatrix::zeros(4, 4), |acc, (&w, b)| {
            acc + b * b.adjoint() * Complex64::new(w, 0.0)
        });
    DensityMatrix(m)
}

/// Diagonal of a two-qubit state in the Bell basis; coherences are dropped.
pub fn bell_diagonal_part(rho: &DensityMatrix) -> Result<BellVector> {
    if rho.dim() != 4 {
        return Err(Error::InvalidVector(format!(
            "expected a 4x4 state, got {}",
            rho.dim()
        )));
    }
    let w = bell_basis().map(|b| (b.adjoint() * rho.matrix() * &b)[(0, 0)].re);
    BellVector::new(w)
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn qubit_count(m: &CMatrix) -> usize {
    m.nrows().trailing_zeros() as usize
}

fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

/// `Tr_k(ρ) ⊗ I/2` with the identity reinserted at qubit `k`.
fn replace_with_mixed(rho: &CMatrix, k: usize) -> CMatrix {
    let n = qubit_count(rho);
    let mask = 1usize << (n - 1 - k);
    CMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| {
        if bit(i, k, n) != bit(j, k, n) {
            return ZERO;
        }
        let (i0, j0) = (i & !mask, j & !mask);
        (rho[(i0, j0)] + rho[(i0 | mask, j0 | mask)]) * 0.5
    })
}

pub fn depolarize_qubit(rho: &CMatrix, k: usize, lambda: f64) -> CMatrix {
    rho * Complex64::new(1.0 - lambda, 0.0)
        + replace_with_mixed(rho, k) * Complex64::new(lambda, 0.0)
}

pub fn dephase_qubit(rho: &CMatrix, k: usize, zeta: f64) -> CMatrix {
    let n = qubit_count(rho);
    CMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| {
        let sign = if bit(i, k, n) == bit(j, k, n) {
            1.0
        } else {
            1.0 - 2.0 * zeta
        };
        rho[(i, j)] * sign
    })
}

fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u * rho * u.adjoint()
}

/// `R_X(θ) = cos(θ/2) I − i sin(θ/2) X`.
pub fn rx(theta: f64) -> CMatrix {
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let off = Complex64::new(0.0, -s);
    CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(c, 0.0), off, off, Complex64::new(c, 0.0)],
    )
}

/// CNOT from `control` to `target` on `n` qubits.
pub fn cnot(control: usize, target: usize, n: usize) -> CMatrix {
    let dim = 1 << n;
    let tmask = 1usize << (n - 1 - target);
    CMatrix::from_fn(dim, dim, |i, j| {
        let image = if bit(j, control, n) == 1 {
            j ^ tmask
        } else {
            j
        };
        if i == image {
            ONE
        } else {
            ZERO
        }
    })
}

fn povm_up(basis: crate::bellvec::Basis, eta: f64) -> CMatrix {
    let (hit, miss) = (Complex64::new(eta, 0.0), Complex64::new(1.0 - eta, 0.0));
    match basis {
        crate::bellvec::Basis::Z => CMatrix::from_row_slice(2, 2, &[hit, ZERO, ZERO, miss]),
        crate::bellvec::Basis::X => {
            // η|+⟩⟨+| + (1 − η)|−⟩⟨−|
            let diag = Complex64::new(0.5, 0.0);
            let off = Complex64::new(eta - 0.5, 0.0);
            CMatrix::from_row_slice(2, 2, &[diag, off, off, diag])
        }
    }
}

fn trace_out_first_pair(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| (0..4).map(|k| m[(4 * k + i, 4 * k + j)]).sum())
}

fn trace_out_second_pair(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| (0..4).map(|k| m[(4 * i + k, 4 * j + k)]).sum())
}

/// Memory noise on one stored pair: Bob's qubit, then Alice's.
pub fn memory_noise_dense(rho: &DensityMatrix, model: &NoiseModel, dt: f64) -> DensityMatrix {
    let p = model.memory_parameters(dt);
    let m = depolarize_qubit(rho.matrix(), 1, p.lambda_b);
    let m = dephase_qubit(&m, 1, p.zeta_b);
    let m = depolarize_qubit(&m, 0, p.lambda_a);
    DensityMatrix(dephase_qubit(&m, 0, p.zeta_a))
}

/// Noisy `R_X(−π/2) ⊗ R_X(+π/2)` on one pair.
pub fn rotate_dense(rho: &DensityMatrix, m_a: f64, m_b: f64) -> DensityMatrix {
    let u = kron(
        &rx(-std::f64::consts::FRAC_PI_2),
        &rx(std::f64::consts::FRAC_PI_2),
    );
    let m = conjugate(&u, rho.matrix());
    let m = depolarize_qubit(&m, 0, m_a);
    DensityMatrix(depolarize_qubit(&m, 1, m_b))
}

/// Noisy bilateral CNOT on `ctrl ⊗ tgt`.
pub fn bilateral_cnot_dense(joint: &CMatrix, y_a: f64, y_b: f64) -> CMatrix {
    let u = cnot(1, 3, 4) * cnot(0, 2, 4);
    let keep = (1.0 - y_a) * (1.0 - y_b);
    conjugate(&u, joint) * Complex64::new(keep, 0.0)
        + identity(16) * Complex64::new((1.0 - keep) / 16.0, 0.0)
}

/// Full protocol on dense inputs: success probability and the kept pair.
pub fn run_protocol_dense(
    protocol: Protocol,
    rho_ctrl: &DensityMatrix,
    rho_tgt: &DensityMatrix,
    model: &NoiseModel,
    dt: f64,
) -> Result<(f64, DensityMatrix)> {
    model.validate()?;
    for rho in [rho_ctrl, rho_tgt] {
        if rho.dim() != 4 {
            return Err(Error::InvalidVector(format!(
                "expected a 4x4 state, got {}",
                rho.dim()
            )));
        }
    }
    let (a, b) = (&model.alice, &model.bob);
    let mut ctrl = memory_noise_dense(rho_ctrl, model, dt);
    let mut tgt = rho_tgt.clone();
    if protocol == Protocol::C {
        ctrl = rotate_dense(&ctrl, a.m, b.m);
        tgt = rotate_dense(&tgt, a.m, b.m);
    }
    let joint = bilateral_cnot_dense(&kron(ctrl.matrix(), tgt.matrix()), a.y, b.y);
    let basis = protocol.basis();
    let (measured, kept) = match basis {
        crate::bellvec::Basis::Z => {
            let m = kron(
                &identity(4),
                &kron(&povm_up(basis, a.eta_z), &povm_up(basis, b.eta_z)),
            );
            let mr = m * &joint;
            (mr.trace().re, trace_out_second_pair(&mr))
        }
        crate::bellvec::Basis::X => {
            let m = kron(
                &kron(&povm_up(basis, a.eta_x), &povm_up(basis, b.eta_x)),
                &identity(4),
            );
            let mr = m * &joint;
            (mr.trace().re, trace_out_first_pair(&mr))
        }
    };
    if measured <= 0.0 {
        return Err(Error::Degenerate(format!("both-up probability {measured}")));
    }
    // Tr_measured[(M ⊗ I) ρ] is Hermitian only up to rounding; symmetrize.
    let kept = (&kept + kept.adjoint()) * Complex64::new(0.5 / measured, 0.0);
    Ok((measured, DensityMatrix(kept)))
}
