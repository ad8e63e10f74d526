//! Completely positive, trace non-increasing maps on two qubits.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat4 = Matrix4<Complex64>;

const TRACE_SLACK: f64 = 1e-12;

/// Anything that maps two-qubit (possibly unnormalized) density operators.
pub trait QuantumProcess {
    fn apply(&self, rho: &Mat4) -> Mat4;
}

/// Operator-sum representation `ρ ↦ Σ_k K_k ρ K_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitChannel {
    kraus: Vec<Mat4>,
}

impl TwoQubitChannel {
    /// Validates `Σ K†K ≤ 1`.
    pub fn from_kraus(kraus: Vec<Mat4>) -> Result<Self> {
        let channel = Self { kraus };
        let largest = channel.max_success_probability();
        if largest > 1.0 + TRACE_SLACK {
            return Err(Error::TraceIncreasing(largest));
        }
        Ok(channel)
    }

    pub fn identity() -> Self {
        Self {
            kraus: vec![Mat4::identity()],
        }
    }

    pub fn kraus(&self) -> &[Mat4] {
        &self.kraus
    }

    /// `Σ K†K`; its expectation in the input state is the success probability.
    pub fn effect(&self) -> Mat4 {
        self.kraus.iter().map(|k| k.adjoint() * k).sum()
    }

    pub fn max_success_probability(&self) -> f64 {
        hermitian_eigenvalues(&self.effect())
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Weighted union of Kraus sets, `w₁ E₁ + w₂ E₂`.
    pub fn mix(&self, weight: f64, other: &TwoQubitChannel, other_weight: f64) -> Result<Self> {
        let a = weight.max(0.0).sqrt();
        let b = other_weight.max(0.0).sqrt();
        let kraus = self
            .kraus
            .iter()
            .map(|k| k * Complex64::new(a, 0.0))
            .chain(other.kraus.iter().map(|k| k * Complex64::new(b, 0.0)))
            .filter(|k| k.norm() > 0.0)
            .collect();
        Self::from_kraus(kraus)
    }

    /// Follows the channel by `σ ↦ (1 − p) σ + p tr(σ) 1/4`.
    pub fn depolarized(&self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                name: "depol",
                value: p,
            });
        }
        if p == 0.0 {
            return Ok(self.clone());
        }
        // Σ_P P X P = 4 tr(X) 1 over the sixteen two-qubit Paulis.
        let keep = Complex64::new((1.0 - p).sqrt(), 0.0);
        let noise = Complex64::new(p.sqrt() / 4.0, 0.0);
        let paulis = pauli_basis();
        let mut kraus: Vec<Mat4> = self.kraus.iter().map(|k| k * keep).collect();
        for k in &self.kraus {
            for pauli in &paulis {
                kraus.push(pauli * k * noise);
            }
        }
        kraus.retain(|k| k.norm() > 0.0);
        Self::from_kraus(kraus)
    }
}

impl QuantumProcess for TwoQubitChannel {
    fn apply(&self, rho: &Mat4) -> Mat4 {
        self.kraus.iter().map(|k| k * rho * k.adjoint()).sum()
    }
}

/// Single-qubit Paulis `[1, X, Y, Z]`.
pub fn single_paulis() -> [Matrix2<Complex64>; 4] {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Matrix2::new(l, o, o, l),
        Matrix2::new(o, l, l, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(l, o, o, -l),
    ]
}

/// Two-qubit Paulis `σ_a ⊗ σ_b` at index `4a + b`, signal qubit first.
pub fn pauli_basis() -> Vec<Mat4> {
    let singles = single_paulis();
    let mut out = Vec::with_capacity(16);
    for a in &singles {
        for b in &singles {
            out.push(kron2(a, b));
        }
    }
    out
}

pub const PAULI_LABELS: [&str; 4] = ["I", "X", "Y", "Z"];

pub fn pauli_label(index: usize) -> String {
    format!("{}{}", PAULI_LABELS[index / 4], PAULI_LABELS[index % 4])
}

pub fn kron2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
pub fn hermitian_eigenvalues(m: &Mat4) -> Vec<f64> {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn trace(m: &Mat4) -> f64 {
    m.trace().re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_density(seed: u64) -> Mat4 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = Mat4::from_fn(|_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let rho = a * a.adjoint();
        let t = rho.trace();
        rho / t
    }

    #[test]
    fn identity_preserves_states() {
        let rho = random_density(1);
        assert!((TwoQubitChannel::identity().apply(&rho) - rho).norm() < 1e-15);
    }

    #[test]
    fn paulis_are_orthogonal() {
        let basis = pauli_basis();
        for (i, p) in basis.iter().enumerate() {
            for (j, q) in basis.iter().enumerate() {
                let ip = (p.adjoint() * q).trace();
                let want = if i == j { 4.0 } else { 0.0 };
                assert!((ip - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
        assert_eq!(pauli_label(0), "II");
        assert_eq!(pauli_label(7), "XZ");
    }

    #[test]
    fn full_depolarization_gives_maximally_mixed_output() {
        let ch = TwoQubitChannel::identity().depolarized(1.0).unwrap();
        let out = ch.apply(&random_density(2));
        assert!((out - Mat4::identity() * Complex64::new(0.25, 0.0)).norm() < 1e-14);
        assert!((ch.max_success_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_increasing_kraus_rejected() {
        let k = Mat4::identity() * Complex64::new(1.1, 0.0);
        assert!(matches!(
            TwoQubitChannel::from_kraus(vec![k]),
            Err(Error::TraceIncreasing(_))
        ));
    }
}
