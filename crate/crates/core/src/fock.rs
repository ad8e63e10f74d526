//! Multimode photon-number states and passive linear optics.
//!
//! A [`FockState`] is a sparse map from occupation vectors to complex
//! amplitudes over the modes of a [`ModeRegistry`]. Beam splitters act on
//! creation operators with the real orthogonal convention
//!
//! ```text
//! a† -> √η a† − √(1−η) b†
//! b† -> √(1−η) a† + √η b†
//! ```
//!
//! so multi-photon terms pick up the usual bosonic `√n!` factors. States are
//! capped at [`PHOTON_CAP`] photons.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::device::TwoQubitState;
use crate::error::{Error, Result};

/// Maximum total photon number carried by any term.
pub const PHOTON_CAP: u32 = 2;

/// Amplitudes with magnitude below this are dropped after every operation.
pub const PRUNE_TOLERANCE: f64 = 1e-15;

const NORM_SLACK: f64 = 1e-12;

/// Index of a registered mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId(usize);

impl ModeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Ordered set of uniquely labelled optical modes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModeRegistry {
    labels: Vec<String>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut registry = Self::new();
        for label in labels {
            registry.register(label)?;
        }
        Ok(registry)
    }

    pub fn register(&mut self, label: impl Into<String>) -> Result<ModeId> {
        let label = label.into();
        if self.labels.contains(&label) {
            return Err(Error::DuplicateMode(label));
        }
        self.labels.push(label);
        Ok(ModeId(self.labels.len() - 1))
    }

    pub fn id(&self, label: &str) -> Result<ModeId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(ModeId)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn label(&self, id: ModeId) -> Option<&str> {
        self.labels.get(id.0).map(String::as_str)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn check(&self, id: ModeId) -> Result<()> {
        if id.0 < self.labels.len() {
            Ok(())
        } else {
            Err(Error::UnknownMode(format!("#{}", id.0)))
        }
    }
}

/// Photon counts per mode, in registry order.
pub type Occupation = Vec<u8>;

/// Sparse, possibly sub-normalized, multimode Fock state.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    modes: ModeRegistry,
    terms: BTreeMap<Occupation, Complex64>,
}

impl FockState {
    pub fn vacuum(modes: ModeRegistry) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; modes.len()], Complex64::new(1.0, 0.0));
        Self { modes, terms }
    }

    /// Builds a state from explicit terms. Repeated occupations accumulate.
    pub fn from_terms<I>(modes: ModeRegistry, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut map: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != modes.len() {
                return Err(Error::ModeCountMismatch {
                    got: occ.len(),
                    expected: modes.len(),
                });
            }
            let photons = total_photons(&occ);
            if photons > PHOTON_CAP {
                return Err(Error::PhotonCapExceeded {
                    photons,
                    cap: PHOTON_CAP,
                });
            }
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::InvalidState("non-finite amplitude".into()));
            }
            *map.entry(occ).or_default() += amp;
        }
        let state = Self { modes, terms: map }.pruned();
        let norm = state.norm_sqr();
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::InvalidState(format!("squared norm {norm} exceeds 1")));
        }
        Ok(state)
    }

    pub fn modes(&self) -> &ModeRegistry {
        &self.modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, occupation: &[u8]) -> Complex64 {
        self.terms.get(occupation).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Appends a fresh empty mode, e.g. a loss ancilla.
    pub fn add_mode(&mut self, label: impl Into<String>) -> Result<ModeId> {
        let id = self.modes.register(label)?;
        let old = std::mem::take(&mut self.terms);
        self.terms = old
            .into_iter()
            .map(|(mut occ, amp)| {
                occ.push(0);
                (occ, amp)
            })
            .collect();
        Ok(id)
    }

    /// Applies the one-photon creation operator `Σ c_k a_k†` to the state.
    ///
    /// The operator is not normalized here; pass a normalized coefficient
    /// vector to add one photon in a normalized single-particle mode.
    pub fn create(&self, coefficients: &[(ModeId, Complex64)]) -> Result<Self> {
        for (mode, _) in coefficients {
            self.modes.check(*mode)?;
        }
        let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let photons = total_photons(occ) + 1;
            if photons > PHOTON_CAP {
                return Err(Error::PhotonCapExceeded {
                    photons,
                    cap: PHOTON_CAP,
                });
            }
            for (mode, c) in coefficients {
                let mut next = occ.clone();
                let n = next[mode.0];
                next[mode.0] = n + 1;
                let bosonic = f64::from(n + 1).sqrt();
                *out.entry(next).or_default() += amp * c * bosonic;
            }
        }
        Ok(Self {
            modes: self.modes.clone(),
            terms: out,
        }
        .pruned())
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, a| a.norm() >= PRUNE_TOLERANCE);
        self
    }
}

fn total_photons(occ: &[u8]) -> u32 {
    occ.iter().map(|&n| u32::from(n)).sum()
}

/// Two-mode beam splitter with transmissivity `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    pub mode_a: ModeId,
    pub mode_b: ModeId,
    eta: f64,
}

impl BeamSplitterSpec {
    pub fn new(mode_a: ModeId, mode_b: ModeId, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidTransmissivity(eta));
        }
        if mode_a == mode_b {
            return Err(Error::DegenerateBeamSplitter);
        }
        Ok(Self {
            mode_a,
            mode_b,
            eta,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The splitter that undoes this one (same η, modes swapped).
    pub fn inverse(&self) -> Self {
        Self {
            mode_a: self.mode_b,
            mode_b: self.mode_a,
            eta: self.eta,
        }
    }

    /// Single-particle transfer matrix `[[t, −r], [r, t]]` acting on the
    /// creation-operator coefficients of `(a, b)`.
    pub fn transfer(&self) -> [[f64; 2]; 2] {
        let t = self.eta.sqrt();
        let r = (1.0 - self.eta).sqrt();
        [[t, -r], [r, t]]
    }
}

/// Propagates `state` through a beam splitter.
pub fn apply_beam_splitter(state: &FockState, bs: &BeamSplitterSpec) -> Result<FockState> {
    state.modes.check(bs.mode_a)?;
    state.modes.check(bs.mode_b)?;
    if !(0.0..=1.0).contains(&bs.eta) {
        return Err(Error::InvalidTransmissivity(bs.eta));
    }
    let (ia, ib) = (bs.mode_a.0, bs.mode_b.0);
    let [[t, neg_r], [r, _]] = bs.transfer();

    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, amp) in &state.terms {
        let na = u32::from(occ[ia]);
        let nb = u32::from(occ[ib]);
        let norm_in = factorial(na) * factorial(nb);
        // (t a† − r b†)^na (r a† + t b†)^nb, choosing i a† from the first
        // factor and j a† from the second.
        for i in 0..=na {
            let c1 = binomial(na, i) * t.powi(i as i32) * neg_r.powi((na - i) as i32);
            if c1 == 0.0 {
                continue;
            }
            for j in 0..=nb {
                let c2 = binomial(nb, j) * r.powi(j as i32) * t.powi((nb - j) as i32);
                if c2 == 0.0 {
                    continue;
                }
                let ka = i + j;
                let kb = na + nb - ka;
                let bosonic = (factorial(ka) * factorial(kb) / norm_in).sqrt();
                let mut next = occ.clone();
                next[ia] = ka as u8;
                next[ib] = kb as u8;
                *out.entry(next).or_default() += amp * (c1 * c2 * bosonic);
            }
        }
    }
    Ok(FockState {
        modes: state.modes.clone(),
        terms: out,
    }
    .pruned())
}

/// Raw (unnormalized) amplitudes of the coincidence component, indexed
/// `2·signal + meter` with H = 0, V = 1.
///
/// Errors if any term does not carry exactly two photons.
pub fn coincidence_amplitudes(
    state: &FockState,
    signal_modes: (ModeId, ModeId),
    meter_modes: (ModeId, ModeId),
) -> Result<[Complex64; 4]> {
    for id in [signal_modes.0, signal_modes.1, meter_modes.0, meter_modes.1] {
        state.modes.check(id)?;
    }
    let mut amps = [Complex64::default(); 4];
    for (occ, amp) in &state.terms {
        if total_photons(occ) != 2 {
            return Err(Error::NotTwoPhoton);
        }
        let (sh, sv) = (occ[signal_modes.0 .0], occ[signal_modes.1 .0]);
        let (mh, mv) = (occ[meter_modes.0 .0], occ[meter_modes.1 .0]);
        if sh + sv != 1 || mh + mv != 1 {
            continue;
        }
        let s = usize::from(sv == 1);
        let m = usize::from(mv == 1);
        amps[2 * s + m] += amp;
    }
    Ok(amps)
}

/// Keeps the branch with one photon in the signal pair and one in the meter
/// pair, renormalizes it and records its probability.
///
/// A vanishing branch yields [`TwoQubitState::empty`] rather than an error.
pub fn project_coincidence(
    state: &FockState,
    signal_modes: (ModeId, ModeId),
    meter_modes: (ModeId, ModeId),
) -> Result<TwoQubitState> {
    let amps = coincidence_amplitudes(state, signal_modes, meter_modes)?;
    Ok(TwoQubitState::from_unnormalized(amps))
}

/// Mean photon number in `mode`, on the renormalized state.
pub fn number_expectation(state: &FockState, mode: ModeId) -> Result<f64> {
    state.modes.check(mode)?;
    let norm = state.norm_sqr();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let weighted: f64 = state
        .terms
        .iter()
        .map(|(occ, amp)| f64::from(occ[mode.0]) * amp.norm_sqr())
        .sum();
    Ok(weighted / norm)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_modes() -> (ModeRegistry, ModeId, ModeId) {
        let modes = ModeRegistry::with_labels(["a", "b"]).unwrap();
        let a = modes.id("a").unwrap();
        let b = modes.id("b").unwrap();
        (modes, a, b)
    }

    fn one_one(modes: &ModeRegistry, a: ModeId, b: ModeId) -> FockState {
        let one = Complex64::new(1.0, 0.0);
        FockState::vacuum(modes.clone())
            .create(&[(a, one)])
            .unwrap()
            .create(&[(b, one)])
            .unwrap()
    }

    #[test]
    fn hong_ou_mandel_null_at_balanced_splitter() {
        let (modes, a, b) = two_modes();
        let state = one_one(&modes, a, b);
        let bs = BeamSplitterSpec::new(a, b, 0.5).unwrap();
        let out = apply_beam_splitter(&state, &bs).unwrap();
        assert_eq!(out.amplitude(&[1, 1]), Complex64::default());
        assert!((out.amplitude(&[2, 0]).norm_sqr() - 0.5).abs() < 1e-14);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn one_third_splitter_coincidence_amplitude() {
        let (modes, a, b) = two_modes();
        let state = one_one(&modes, a, b);
        let bs = BeamSplitterSpec::new(a, b, 1.0 / 3.0).unwrap();
        let out = apply_beam_splitter(&state, &bs).unwrap();
        // 2η − 1 by expanding (t a† − r b†)(r a† + t b†)
        assert!((out.amplitude(&[1, 1]).re + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn full_transmission_is_identity() {
        let (modes, a, b) = two_modes();
        let state = FockState::from_terms(
            modes,
            [
                (vec![2, 0], Complex64::new(0.6, 0.0)),
                (vec![0, 1], Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let bs = BeamSplitterSpec::new(a, b, 1.0).unwrap();
        assert_eq!(apply_beam_splitter(&state, &bs).unwrap(), state);
    }

    #[test]
    fn double_occupancy_splits_with_half_coincidence() {
        let (modes, a, b) = two_modes();
        let one = Complex64::new(1.0, 0.0);
        let state = FockState::vacuum(modes)
            .create(&[(a, one)])
            .unwrap()
            .create(&[(a, one)])
            .unwrap();
        // a†a†|0> = √2 |2,0>
        let state = FockState::from_terms(
            state.modes().clone(),
            state.terms().map(|(o, c)| (o.clone(), c / 2f64.sqrt())),
        )
        .unwrap();
        let out = apply_beam_splitter(&state, &BeamSplitterSpec::new(a, b, 0.5).unwrap()).unwrap();
        assert!((out.amplitude(&[1, 1]).norm_sqr() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn inverse_restores_state() {
        let (modes, a, b) = two_modes();
        let state = FockState::from_terms(
            modes,
            [
                (vec![1, 1], Complex64::new(0.6, 0.0)),
                (vec![0, 2], Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let bs = BeamSplitterSpec::new(a, b, 0.3).unwrap();
        let there = apply_beam_splitter(&state, &bs).unwrap();
        let back = apply_beam_splitter(&there, &bs.inverse()).unwrap();
        for (occ, amp) in state.terms() {
            assert!((back.amplitude(occ) - amp).norm() < 1e-14);
        }
        assert_eq!(back.len(), state.len());
    }

    #[test]
    fn errors_on_bad_inputs() {
        let (modes, a, b) = two_modes();
        assert_eq!(
            BeamSplitterSpec::new(a, b, 1.5),
            Err(Error::InvalidTransmissivity(1.5))
        );
        assert_eq!(
            BeamSplitterSpec::new(a, a, 0.5),
            Err(Error::DegenerateBeamSplitter)
        );
        let mut bigger = modes.clone();
        let c = bigger.register("c").unwrap();
        let bs = BeamSplitterSpec::new(a, c, 0.5).unwrap();
        let state = FockState::vacuum(modes.clone());
        assert!(matches!(
            apply_beam_splitter(&state, &bs),
            Err(Error::UnknownMode(_))
        ));
        let mut dup = modes.clone();
        assert!(matches!(dup.register("a"), Err(Error::DuplicateMode(_))));
        let three = one_one(&modes, a, b).create(&[(a, Complex64::new(1.0, 0.0))]);
        assert!(matches!(three, Err(Error::PhotonCapExceeded { photons: 3, .. })));
    }

    #[test]
    fn add_mode_extends_occupations() {
        let (modes, a, b) = two_modes();
        let mut state = one_one(&modes, a, b);
        let c = state.add_mode("loss").unwrap();
        assert_eq!(c.index(), 2);
        assert_eq!(state.amplitude(&[1, 1, 0]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn number_expectation_on_dual_rail_photon() {
        let (modes, h, v) = two_modes();
        let theta = 42f64.to_radians();
        let state = FockState::vacuum(modes)
            .create(&[
                (h, Complex64::new(theta.cos(), 0.0)),
                (v, Complex64::new(theta.sin(), 0.0)),
            ])
            .unwrap();
        let nh = number_expectation(&state, h).unwrap();
        let nv = number_expectation(&state, v).unwrap();
        // (1 + cos 84°) / 2
        assert!((nh - 0.552_264_231_633_826_7).abs() < 1e-12);
        assert!((nh - nv - 0.104_528_463_267_653_5).abs() < 1e-12);
    }

    #[test]
    fn vacuum_has_no_photons_and_zero_norm_errors() {
        let (modes, a, _) = two_modes();
        let vac = FockState::vacuum(modes.clone());
        assert_eq!(number_expectation(&vac, a).unwrap(), 0.0);
        let empty = FockState::from_terms(modes, std::iter::empty()).unwrap();
        assert_eq!(number_expectation(&empty, a), Err(Error::ZeroNorm));
    }

    #[test]
    fn projection_of_fully_lost_state_is_flagged_empty() {
        let modes = ModeRegistry::with_labels(["sH", "sV", "mH", "mV", "l0", "l1"]).unwrap();
        let id = |l| modes.id(l).unwrap();
        let state =
            FockState::from_terms(modes.clone(), [(vec![0, 0, 0, 0, 1, 1], Complex64::new(1.0, 0.0))])
                .unwrap();
        let out = project_coincidence(&state, (id("sH"), id("sV")), (id("mH"), id("mV"))).unwrap();
        assert!(out.is_empty());
        assert_eq!(out.success_prob(), 0.0);

        let one = FockState::vacuum(modes.clone())
            .create(&[(id("sH"), Complex64::new(1.0, 0.0))])
            .unwrap();
        assert_eq!(
            project_coincidence(&one, (id("sH"), id("sV")), (id("mH"), id("mV"))),
            Err(Error::NotTwoPhoton)
        );
    }
}
