//! Simulation and analysis of postselected weak measurements of
//! single-photon polarization.
//!
//! The crate is layered bottom-up:
//!
//! * [`fock`]: multimode photon-number states and beam splitters,
//! * [`device`]: the coincidence-basis entangling measurement device,
//! * [`weak`]: POVM, expectation values, postselection and weak values,
//! * [`channel`], [`imperfection`], [`tomography`]: the mode-mismatch model
//!   as a two-qubit process and its chi-matrix reconstruction,
//! * [`counting`]: Poissonian counting runs and their estimators,
//! * [`cli`]: the `photonweak` command-line front end.

pub mod channel;
pub mod cli;
pub mod counting;
pub mod device;
pub mod error;
pub mod fock;
pub mod imperfection;
pub mod tomography;
pub mod weak;

pub use channel::{QuantumProcess, TwoQubitChannel};
pub use counting::{
    estimate_knowledge, estimate_weak_value, run_fig2, sample_counts, CountSample, Estimate, DEFAULT_K_GRID,
    Fig2Table, RunPlan,
};
pub use device::{device_meter_distribution, run_device, DeviceConfig, Pol, TwoQubitState};
pub use error::{Error, Result};
pub use fock::{apply_beam_splitter, number_expectation, project_coincidence, BeamSplitterSpec, FockState, ModeRegistry};
pub use imperfection::{
    distinguishable_device, fit_depolarization, fit_visibility, imperfect_channel, invert_s1, model_weak_value_curve,
    DeviceModel, ImperfectionParams,
};
pub use tomography::{process_tomography, ChiMatrix};
pub use weak::{
    expectation_decomposition, expectation_s1, knowledge_from_probs, povm_elements,
    postselected_probs, weak_value_analytic, weak_value_from_probs, MeterSetting, Polarization,
    Povm, PostselectState,
};
