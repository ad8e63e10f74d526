//! The nondeterministic entangling measurement device as a Fock network.
//!
//! Layout on modes `sH, sV, mH, mV`:
//!
//! 1. 50:50 splitter across `mH/mV` (meter into the diagonal basis),
//! 2. η = 1/3 splitter between `sV` and `mV`, where two-photon
//!    interference gives the `(sV, mV)` branch amplitude `2η − 1 = −1/3`,
//! 3. η = 1/3 balancing losses on `sH` and `mH` into ancilla modes,
//! 4. the inverse 50:50 splitter on `mH/mV`,
//! 5. coincidence projection onto one photon per qubit.
//!
//! With the default configuration every coincidence branch carries amplitude
//! 1/3, so the device applies a signal-controlled meter flip with success
//! probability 1/9 regardless of the inputs.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, BeamSplitterSpec, FockState, ModeId, ModeRegistry};
use crate::weak::{MeterSetting, Polarization};

const NORM_TOL: f64 = 1e-12;

/// Polarization basis label; H is index 0, V is index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }
}

/// Splitter transmissivities of the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub interfering_eta: f64,
    pub balance_eta: f64,
    pub hadamard_eta: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            interfering_eta: 1.0 / 3.0,
            balance_eta: 1.0 / 3.0,
            hadamard_eta: 0.5,
        }
    }
}

impl DeviceConfig {
    pub fn validate(&self) -> Result<()> {
        for eta in [self.interfering_eta, self.balance_eta, self.hadamard_eta] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::InvalidTransmissivity(eta));
            }
        }
        Ok(())
    }
}

/// Normalized signal⊗meter state in the coincidence subspace, together with
/// the probability of landing in that subspace.
///
/// Amplitudes are indexed `2·signal + meter`: HH, HV, VH, VV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    amplitudes: [Complex64; 4],
    success_prob: f64,
}

impl TwoQubitState {
    /// Normalizes raw branch amplitudes; the squared norm becomes the
    /// success probability. A zero branch gives [`TwoQubitState::empty`].
    pub fn from_unnormalized(amplitudes: [Complex64; 4]) -> Self {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr == 0.0 {
            return Self::empty();
        }
        let scale = norm_sqr.sqrt();
        Self {
            amplitudes: amplitudes.map(|a| a / scale),
            success_prob: norm_sqr,
        }
    }

    pub fn new(amplitudes: [Complex64; 4], success_prob: f64) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        if !(0.0..=1.0).contains(&success_prob) {
            return Err(Error::OutOfRange {
                name: "success_prob",
                value: success_prob,
            });
        }
        Ok(Self {
            amplitudes,
            success_prob,
        })
    }

    /// `|signal⟩ ⊗ |meter⟩`
    pub fn product(signal: &Polarization, meter: &Polarization) -> Self {
        let [a, b] = signal.amplitudes();
        let [c, d] = meter.amplitudes();
        Self {
            amplitudes: [a * c, a * d, b * c, b * d],
            success_prob: 1.0,
        }
    }

    /// Flagged result of a projection that never succeeds.
    pub fn empty() -> Self {
        Self {
            amplitudes: [Complex64::default(); 4],
            success_prob: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.success_prob == 0.0
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }

    pub fn amplitude(&self, signal: Pol, meter: Pol) -> Complex64 {
        self.amplitudes[2 * signal.index() + meter.index()]
    }

    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }

    /// Outcome probabilities in HH, HV, VH, VV order.
    pub fn probabilities(&self) -> [f64; 4] {
        self.amplitudes.map(|a| a.norm_sqr())
    }

    /// Wootters concurrence `2|a_HH a_VV − a_HV a_VH|` of the pure state.
    pub fn concurrence(&self) -> f64 {
        let [hh, hv, vh, vv] = self.amplitudes;
        2.0 * (hh * vv - hv * vh).norm()
    }

    pub fn density_matrix(&self) -> Matrix4<Complex64> {
        let v = nalgebra::Vector4::from(self.amplitudes);
        v * v.adjoint()
    }

    /// Fidelity `|⟨self|other⟩|²` maximized over independent phase rotations
    /// `diag(1, e^{iφ})` on each qubit (global phase drops out of the modulus).
    pub fn fidelity_up_to_local_phases(&self, other: &TwoQubitState) -> f64 {
        let c: [Complex64; 4] = std::array::from_fn(|k| self.amplitudes[k].conj() * other.amplitudes[k]);
        // For a fixed signal phase the optimal meter phase aligns the two
        // partial sums, leaving |c_HH + c_VH e^{iφ}| + |c_HV + c_VV e^{iφ}|.
        let objective = |phi: f64| {
            let e = Complex64::from_polar(1.0, phi);
            (c[0] + c[2] * e).norm() + (c[1] + c[3] * e).norm()
        };
        let overlap = maximize_periodic(objective);
        overlap * overlap
    }
}

fn maximize_periodic(f: impl Fn(f64) -> f64) -> f64 {
    const GRID: usize = 720;
    let step = std::f64::consts::TAU / GRID as f64;
    let best = (0..GRID)
        .map(|i| i as f64 * step)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(0.0);
    // golden-section refinement inside the neighbouring grid cells
    let (mut lo, mut hi) = (best - step, best + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    f(best).max(f1).max(f2)
}

/// Signal and meter port pairs `(H, V)` of a network copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ports {
    pub signal: (ModeId, ModeId),
    pub meter: (ModeId, ModeId),
}

/// The device's beam-splitter sequence over a mode registry.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    modes: ModeRegistry,
    steps: Vec<BeamSplitterSpec>,
    copies: Vec<Ports>,
}

impl Network {
    pub fn new(cfg: &DeviceConfig) -> Result<Self> {
        Self::with_copies(cfg, 1)
    }

    /// Builds `copies` identical, mutually non-interfering instances of the
    /// network. Photons placed in different copies behave as if they carried
    /// distinguishing hidden labels.
    pub fn with_copies(cfg: &DeviceConfig, copies: usize) -> Result<Self> {
        cfg.validate()?;
        let mut modes = ModeRegistry::new();
        let mut steps = Vec::new();
        let mut ports = Vec::new();
        for copy in 0..copies {
            let suffix = if copies == 1 {
                String::new()
            } else {
                format!("#{copy}")
            };
            let mut reg = |name: &str| modes.register(format!("{name}{suffix}"));
            let s_h = reg("sH")?;
            let s_v = reg("sV")?;
            let m_h = reg("mH")?;
            let m_v = reg("mV")?;
            let loss_s = reg("loss_s")?;
            let loss_m = reg("loss_m")?;

            let hadamard = BeamSplitterSpec::new(m_h, m_v, cfg.hadamard_eta)?;
            steps.push(hadamard);
            steps.push(BeamSplitterSpec::new(s_v, m_v, cfg.interfering_eta)?);
            steps.push(BeamSplitterSpec::new(s_h, loss_s, cfg.balance_eta)?);
            steps.push(BeamSplitterSpec::new(m_h, loss_m, cfg.balance_eta)?);
            steps.push(hadamard.inverse());
            ports.push(Ports {
                signal: (s_h, s_v),
                meter: (m_h, m_v),
            });
        }
        Ok(Self {
            modes,
            steps,
            copies: ports,
        })
    }

    pub fn modes(&self) -> &ModeRegistry {
        &self.modes
    }

    pub fn steps(&self) -> &[BeamSplitterSpec] {
        &self.steps
    }

    pub fn ports(&self, copy: usize) -> Ports {
        self.copies[copy]
    }

    pub fn copies(&self) -> usize {
        self.copies.len()
    }

    /// Two photons: signal in copy `signal_copy`, meter in copy `meter_copy`.
    pub fn input_state(
        &self,
        signal: &Polarization,
        meter: &Polarization,
        signal_copy: usize,
        meter_copy: usize,
    ) -> Result<FockState> {
        let sp = self.copies[signal_copy];
        let mp = self.copies[meter_copy];
        let [a, b] = signal.amplitudes();
        let [c, d] = meter.amplitudes();
        FockState::vacuum(self.modes.clone())
            .create(&[(sp.signal.0, a), (sp.signal.1, b)])?
            .create(&[(mp.meter.0, c), (mp.meter.1, d)])
    }

    pub fn propagate(&self, state: &FockState) -> Result<FockState> {
        self.steps
            .iter()
            .try_fold(state.clone(), |s, bs| fock::apply_beam_splitter(&s, bs))
    }
}

/// Runs the ideal device on a signal and meter preparation.
pub fn run_device(
    signal: &Polarization,
    meter: &MeterSetting,
    cfg: &DeviceConfig,
) -> Result<TwoQubitState> {
    let net = Network::new(cfg)?;
    let input = net.input_state(signal, &meter.state(), 0, 0)?;
    let out = net.propagate(&input)?;
    let ports = net.ports(0);
    fock::project_coincidence(&out, ports.signal, ports.meter)
}

/// The device's action on the two-qubit input as a 4×4 operator, including
/// the `√success` amplitude scale. Columns are the images of HH, HV, VH, VV.
pub fn device_operator(cfg: &DeviceConfig) -> Result<Matrix4<Complex64>> {
    let net = Network::new(cfg)?;
    let ports = net.ports(0);
    let basis = [Polarization::h(), Polarization::v()];
    let mut op = Matrix4::zeros();
    for (s, sig) in basis.iter().enumerate() {
        for (m, met) in basis.iter().enumerate() {
            let out = net.propagate(&net.input_state(sig, met, 0, 0)?)?;
            let amps = fock::coincidence_amplitudes(&out, ports.signal, ports.meter)?;
            for (row, amp) in amps.iter().enumerate() {
                op[(row, 2 * s + m)] = *amp;
            }
        }
    }
    Ok(op)
}

/// Joint signal/meter outcome distribution of a coincidence state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointDistribution {
    pub hh: f64,
    pub hv: f64,
    pub vh: f64,
    pub vv: f64,
}

impl JointDistribution {
    pub fn as_array(&self) -> [f64; 4] {
        [self.hh, self.hv, self.vh, self.vv]
    }

    /// `P_HH + P_VV − P_HV − P_VH`
    pub fn knowledge(&self) -> f64 {
        self.hh + self.vv - self.hv - self.vh
    }

    /// Meter marginal `(P(H), P(V))`.
    pub fn meter_marginal(&self) -> (f64, f64) {
        (self.hh + self.vh, self.hv + self.vv)
    }
}

pub fn device_meter_distribution(state: &TwoQubitState) -> JointDistribution {
    let [hh, hv, vh, vv] = state.probabilities();
    JointDistribution { hh, hv, vh, vv }
}
