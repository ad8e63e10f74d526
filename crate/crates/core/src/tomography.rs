//! Two-qubit process tomography by linear inversion.
//!
//! The process is probed with the sixteen product inputs
//! `{H, V, D, R}⊗{H, V, D, R}`. Each output is reconstructed from the 36
//! projector outcomes `{H, V, D, A, R, L}⊗{H, V, D, A, R, L}`, and the chi
//! matrix in the Pauli basis then follows from one 256×256 linear solve:
//!
//! ```text
//! E(ρ) = Σ_mn χ_mn P_m ρ P_n†
//! ```

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::channel::{kron2, pauli_basis, pauli_label, Mat4, QuantumProcess};
use crate::device::TwoQubitState;
use crate::error::{Error, Result};
use crate::weak::Polarization;

/// 16×16 process matrix over the two-qubit Pauli basis (signal first).
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix {
    data: DMatrix<Complex64>,
}

impl ChiMatrix {
    pub fn from_matrix(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != 16 || data.ncols() != 16 {
            return Err(Error::InvalidState(format!(
                "chi matrix must be 16x16, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { data })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex64 {
        self.data[(m, n)]
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    /// Largest `|χ − χ†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.data - self.data.adjoint()).camax()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0);
        let mut values: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        values
    }

    /// Number of eigenvalues above `rel_tol` times the largest one.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let values = self.eigenvalues();
        let top = values.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        values.iter().filter(|v| **v > rel_tol * top).count()
    }

    /// Clips negative eigenvalues and rescales to the original trace.
    pub fn project_psd(&self) -> Self {
        let herm = (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0);
        let original = herm.trace().re;
        let eig = SymmetricEigen::new(herm);
        let clipped = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0), 0.0));
        let vectors = &eig.eigenvectors;
        let mut rebuilt = vectors * DMatrix::from_diagonal(&clipped) * vectors.adjoint();
        let t = rebuilt.trace().re;
        if t > 0.0 {
            rebuilt *= Complex64::new(original / t, 0.0);
        }
        Self { data: rebuilt }
    }

    /// Writes the matrix as CSV: a header, then one row per Pauli index
    /// with real and imaginary parts interleaved.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..16)
            .flat_map(|n| {
                let l = pauli_label(n);
                [format!("{l}_re"), format!("{l}_im")]
            })
            .collect();
        writeln!(out, "row,{}", header.join(","))?;
        for m in 0..16 {
            let cells: Vec<String> = (0..16)
                .flat_map(|n| {
                    let c = self.data[(m, n)];
                    [format_real(c.re), format_real(c.im)]
                })
                .collect();
            writeln!(out, "{},{}", pauli_label(m), cells.join(","))?;
        }
        Ok(())
    }
}

impl QuantumProcess for ChiMatrix {
    fn apply(&self, rho: &Mat4) -> Mat4 {
        let paulis = pauli_basis();
        let mut out = Mat4::zeros();
        for (m, pm) in paulis.iter().enumerate() {
            let left = pm * rho;
            for (n, pn) in paulis.iter().enumerate() {
                let c = self.data[(m, n)];
                if c != Complex64::default() {
                    out += left * pn.adjoint() * c;
                }
            }
        }
        out
    }
}

/// Seventeen significant digits, `.` separator.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn probe_states() -> [Polarization; 4] {
    [Polarization::h(), Polarization::v(), Polarization::d(), Polarization::r()]
}

fn analyzer_states() -> [Polarization; 6] {
    [
        Polarization::h(),
        Polarization::v(),
        Polarization::d(),
        Polarization::a(),
        Polarization::r(),
        Polarization::l(),
    ]
}

fn projector(p: &Polarization) -> nalgebra::Matrix2<Complex64> {
    let v = nalgebra::Vector2::new(p.alpha(), p.beta());
    v * v.adjoint()
}

/// Outcome weights `tr(Π_ab ρ)` for the 36 analyzer settings, index `6a + b`.
pub fn measure_outcomes(rho: &Mat4) -> [f64; 36] {
    let analyzers = analyzer_states();
    let mut out = [0.0; 36];
    for (a, pa) in analyzers.iter().enumerate() {
        for (b, pb) in analyzers.iter().enumerate() {
            let proj = kron2(&projector(pa), &projector(pb));
            out[6 * a + b] = (proj * rho).trace().re;
        }
    }
    out
}

/// Linear-inversion state estimate from [`measure_outcomes`]. The trace is
/// preserved, so sub-normalized outputs keep their success weight.
pub fn reconstruct_state(outcomes: &[f64; 36]) -> Mat4 {
    // single-qubit Pauli expectation from (analyzer, sign) pairs:
    // 1: H + V, X: D − A, Y: R − L, Z: H − V
    const TERMS: [[(usize, f64); 2]; 4] = [
        [(0, 1.0), (1, 1.0)],
        [(2, 1.0), (3, -1.0)],
        [(4, 1.0), (5, -1.0)],
        [(0, 1.0), (1, -1.0)],
    ];
    let paulis = pauli_basis();
    let mut rho = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mut expect = 0.0;
            for (a, sa) in TERMS[i] {
                for (b, sb) in TERMS[j] {
                    expect += sa * sb * outcomes[6 * a + b];
                }
            }
            rho += paulis[4 * i + j] * Complex64::new(expect / 4.0, 0.0);
        }
    }
    rho
}

/// Reconstructs the chi matrix of `process` from simulated, noiseless
/// measurements on the sixteen product probes.
pub fn process_tomography<P: QuantumProcess + ?Sized>(process: &P) -> Result<ChiMatrix> {
    let probes = probe_states();
    let mut inputs = Vec::with_capacity(16);
    let mut outputs = Vec::with_capacity(16);
    for s in &probes {
        for m in &probes {
            let rho = TwoQubitState::product(s, m).density_matrix();
            let measured = measure_outcomes(&process.apply(&rho));
            outputs.push(reconstruct_state(&measured));
            inputs.push(rho);
        }
    }
    chi_from_pairs(&inputs, &outputs)
}

/// Solves `Σ_mn χ_mn P_m ρ_j P_n† = σ_j` for the given input/output pairs.
pub fn chi_from_pairs(inputs: &[Mat4], outputs: &[Mat4]) -> Result<ChiMatrix> {
    if inputs.len() != 16 || outputs.len() != 16 {
        return Err(Error::SingularBasis);
    }
    let paulis = pauli_basis();
    let mut system = DMatrix::<Complex64>::zeros(256, 256);
    let mut rhs = DVector::<Complex64>::zeros(256);
    for (j, (rho, sigma)) in inputs.iter().zip(outputs).enumerate() {
        for m in 0..16 {
            let left = paulis[m] * rho;
            for n in 0..16 {
                let term = left * paulis[n].adjoint();
                for e in 0..16 {
                    system[(16 * j + e, 16 * m + n)] = term[(e / 4, e % 4)];
                }
            }
        }
        for e in 0..16 {
            rhs[16 * j + e] = sigma[(e / 4, e % 4)];
        }
    }
    let solution = system.lu().solve(&rhs).ok_or(Error::SingularBasis)?;
    if solution.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::SingularBasis);
    }
    ChiMatrix::from_matrix(DMatrix::from_fn(16, 16, |m, n| solution[16 * m + n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::TwoQubitChannel;

    #[test]
    fn identity_channel_has_single_unit_entry() {
        let chi = process_tomography(&TwoQubitChannel::identity()).unwrap();
        for m in 0..16 {
            for n in 0..16 {
                let want = if m == 0 && n == 0 { 1.0 } else { 0.0 };
                assert!((chi.entry(m, n) - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        assert_eq!(chi.rank(1e-9), 1);
    }

    #[test]
    fn state_reconstruction_round_trips() {
        let rho = TwoQubitState::product(&Polarization::from_angle_deg(20.0), &Polarization::r()).density_matrix()
            * Complex64::new(0.3, 0.0);
        let back = reconstruct_state(&measure_outcomes(&rho));
        assert!((back - rho).norm() < 1e-14);
    }

    #[test]
    fn csv_layout() {
        let chi = process_tomography(&TwoQubitChannel::identity()).unwrap();
        let mut buf = Vec::new();
        chi.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 17);
        assert!(lines[0].starts_with("row,II_re,II_im,IX_re"));
        assert_eq!(lines[1].split(',').count(), 33);
        assert!(lines[1].starts_with("II,1.0000000000000000e0,"));
    }

    #[test]
    fn psd_projection_clips_negative_weight() {
        let mut m = DMatrix::<Complex64>::zeros(16, 16);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(1, 1)] = Complex64::new(-0.1, 0.0);
        let chi = ChiMatrix::from_matrix(m).unwrap().project_psd();
        assert!(chi.eigenvalues().iter().all(|v| *v > -1e-14));
        assert!((chi.trace() - 0.9).abs() < 1e-12);
    }
}
