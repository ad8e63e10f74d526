//! Imperfect mode matching as a mixture of indistinguishable and
//! distinguishable two-photon propagation.
//!
//! With weight `v` the photons interfere and the device acts as its ideal
//! operator. With weight `1 − v` they carry orthogonal hidden labels: each
//! photon crosses the same network on its own, so amplitudes still add within
//! a label but the two ways of producing a coincidence (each photon exits its
//! own port, or the photons trade ports at the interfering splitter) add as
//! probabilities.

use nalgebra::Vector4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{trace, Mat4, QuantumProcess, TwoQubitChannel};
use crate::device::{self, DeviceConfig, JointDistribution, Network, TwoQubitState};
use crate::error::{Error, Result};
use crate::fock;
use crate::weak::{MeterSetting, Polarization, PostselectState, PostselectedProbs};

/// Mode-matching visibility and optional white noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImperfectionParams {
    visibility: f64,
    depol: f64,
}

impl ImperfectionParams {
    pub fn new(visibility: f64, depol: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::OutOfRange {
                name: "visibility",
                value: visibility,
            });
        }
        if !(0.0..=1.0).contains(&depol) {
            return Err(Error::OutOfRange {
                name: "depol",
                value: depol,
            });
        }
        Ok(Self { visibility, depol })
    }

    pub fn ideal() -> Self {
        Self {
            visibility: 1.0,
            depol: 0.0,
        }
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn depol(&self) -> f64 {
        self.depol
    }
}

impl Default for ImperfectionParams {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Normalized coincidence-conditioned density operator (signal ⊗ meter) and
/// the probability of the coincidence.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedOutput {
    pub rho: Mat4,
    pub success_prob: f64,
}

impl MixedOutput {
    fn from_unnormalized(rho: Mat4) -> Result<Self> {
        let success_prob = trace(&rho);
        if success_prob <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            rho: rho / Complex64::new(success_prob, 0.0),
            success_prob,
        })
    }

    pub fn joint_distribution(&self) -> JointDistribution {
        let p = |k: usize| self.rho[(k, k)].re;
        JointDistribution {
            hh: p(0),
            hv: p(1),
            vh: p(2),
            vv: p(3),
        }
    }

    /// Joint weights `P(post, H)` and `P(post, V)`.
    pub fn postselected_joint(&self, post: &PostselectState) -> (f64, f64) {
        let [a, b] = post.state().amplitudes();
        let weight = |meter: usize| {
            let mut v = Vector4::<Complex64>::zeros();
            v[meter] = a;
            v[2 + meter] = b;
            (v.adjoint() * self.rho * v)[(0, 0)].re
        };
        (weight(0), weight(1))
    }

    pub fn postselect(&self, post: &PostselectState) -> Result<PostselectedProbs> {
        let (h, v) = self.postselected_joint(post);
        PostselectedProbs::from_joint(h, v, 1.0)
    }
}

/// Propagates two labelled (distinguishable) photons through the network and
/// returns the coincidence-conditioned mixed state.
pub fn distinguishable_device(
    signal: &Polarization,
    meter: &MeterSetting,
    cfg: &DeviceConfig,
) -> Result<MixedOutput> {
    let net = Network::with_copies(cfg, 2)?;
    let out = net.propagate(&net.input_state(signal, &meter.state(), 0, 1)?)?;
    let (first, second) = (net.ports(0), net.ports(1));
    let direct = fock::coincidence_amplitudes(&out, first.signal, second.meter)?;
    let swapped = fock::coincidence_amplitudes(&out, second.signal, first.meter)?;
    let rho = outer(&direct) + outer(&swapped);
    MixedOutput::from_unnormalized(rho)
}

fn outer(amps: &[Complex64; 4]) -> Mat4 {
    let v = Vector4::from(*amps);
    v * v.adjoint()
}

/// Kraus operators `[direct, swapped]` of the distinguishable branch.
pub fn distinguishable_operators(cfg: &DeviceConfig) -> Result<[Mat4; 2]> {
    let net = Network::with_copies(cfg, 2)?;
    let (first, second) = (net.ports(0), net.ports(1));
    let basis = [Polarization::h(), Polarization::v()];
    let mut direct = Mat4::zeros();
    let mut swapped = Mat4::zeros();
    for (s, sig) in basis.iter().enumerate() {
        for (m, met) in basis.iter().enumerate() {
            let out = net.propagate(&net.input_state(sig, met, 0, 1)?)?;
            let d = fock::coincidence_amplitudes(&out, first.signal, second.meter)?;
            let x = fock::coincidence_amplitudes(&out, second.signal, first.meter)?;
            for row in 0..4 {
                direct[(row, 2 * s + m)] = d[row];
                swapped[(row, 2 * s + m)] = x[row];
            }
        }
    }
    Ok([direct, swapped])
}

/// The device process for given imperfections.
pub fn imperfect_channel(params: &ImperfectionParams, cfg: &DeviceConfig) -> Result<TwoQubitChannel> {
    DeviceModel::new(cfg)?.channel(params)
}

/// Precomputed ideal and distinguishable operators of one device
/// configuration.
#[derive(Debug, Clone)]
pub struct DeviceModel {
    cfg: DeviceConfig,
    ideal: TwoQubitChannel,
    distinguishable: TwoQubitChannel,
}

impl DeviceModel {
    pub fn new(cfg: &DeviceConfig) -> Result<Self> {
        let ideal = TwoQubitChannel::from_kraus(vec![device::device_operator(cfg)?])?;
        let distinguishable = TwoQubitChannel::from_kraus(distinguishable_operators(cfg)?.to_vec())?;
        Ok(Self {
            cfg: *cfg,
            ideal,
            distinguishable,
        })
    }

    pub fn config(&self) -> &DeviceConfig {
        &self.cfg
    }

    /// `v · ideal + (1 − v) · distinguishable`, then depolarized by `p`.
    pub fn channel(&self, params: &ImperfectionParams) -> Result<TwoQubitChannel> {
        let v = params.visibility();
        let mixed = if v == 1.0 {
            self.ideal.clone()
        } else if v == 0.0 {
            self.distinguishable.clone()
        } else {
            self.ideal.mix(v, &self.distinguishable, 1.0 - v)?
        };
        mixed.depolarized(params.depol())
    }

    pub fn output(
        &self,
        params: &ImperfectionParams,
        signal: &Polarization,
        meter: &MeterSetting,
    ) -> Result<MixedOutput> {
        let input = TwoQubitState::product(signal, &meter.state()).density_matrix();
        MixedOutput::from_unnormalized(self.channel(params)?.apply(&input))
    }

    pub fn postselected(
        &self,
        params: &ImperfectionParams,
        signal: &Polarization,
        meter: &MeterSetting,
        post: &PostselectState,
    ) -> Result<PostselectedProbs> {
        self.output(params, signal, meter)?.postselect(post)
    }

    /// Model probability of the `|A⟩` postselection.
    pub fn postselection_probability(
        &self,
        params: &ImperfectionParams,
        signal: &Polarization,
        meter: &MeterSetting,
    ) -> Result<f64> {
        let out = self.output(params, signal, meter)?;
        let (h, v) = out.postselected_joint(&PostselectState::A);
        Ok(h + v)
    }

    /// Visibility (with no extra noise) at which the model's `P(A)` equals
    /// `target`, by bisection on `v ∈ [0, 1]`.
    pub fn fit_visibility(
        &self,
        target: f64,
        signal: &Polarization,
        meter: &MeterSetting,
    ) -> Result<ImperfectionParams> {
        let p_a = |v: f64| {
            self.postselection_probability(&ImperfectionParams::new(v, 0.0)?, signal, meter)
        };
        let at_one = p_a(1.0)?;
        let at_zero = p_a(0.0)?;
        let (min, max) = (at_one.min(at_zero), at_one.max(at_zero));
        if (target - at_one).abs() <= 1e-12 {
            return ImperfectionParams::new(1.0, 0.0);
        }
        if !(min..=max).contains(&target) {
            return Err(Error::InfeasibleTarget { target, min, max });
        }
        let increasing = at_one > at_zero;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let above = p_a(mid)? > target;
            if above != increasing {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        ImperfectionParams::new(0.5 * (lo + hi), 0.0)
    }

    /// Depolarizing weight, at fixed `visibility`, at which the model's
    /// `P(A)` equals `target`.
    ///
    /// Depolarizing replaces the conditioned output by `(1 − p) ρ + p 1/4`,
    /// so `P(A)` moves linearly from its value at `p = 0` towards `1/2`.
    pub fn fit_depolarization(
        &self,
        target: f64,
        visibility: f64,
        signal: &Polarization,
        meter: &MeterSetting,
    ) -> Result<ImperfectionParams> {
        let base = self.postselection_probability(&ImperfectionParams::new(visibility, 0.0)?, signal, meter)?;
        let (min, max) = (base.min(0.5), base.max(0.5));
        if !(min..=max).contains(&target) {
            return Err(Error::InfeasibleTarget { target, min, max });
        }
        if (0.5 - base).abs() < 1e-15 {
            return ImperfectionParams::new(visibility, 0.0);
        }
        let p = ((target - base) / (0.5 - base)).clamp(0.0, 1.0);
        ImperfectionParams::new(visibility, p)
    }

    /// Model postselected weak value `(P(H|A) − P(V|A)) / K` on a strength grid.
    pub fn weak_value_curve(
        &self,
        params: &ImperfectionParams,
        signal: &Polarization,
        strengths: &[f64],
    ) -> Result<Vec<(f64, f64)>> {
        strengths
            .iter()
            .map(|&k| {
                if k == 0.0 {
                    return Err(Error::WeakValueUnbounded);
                }
                if !(0.0..=1.0).contains(&k) {
                    return Err(Error::OutOfRange { name: "K", value: k });
                }
                let meter = MeterSetting::from_strength(k)?;
                let probs = self.postselected(params, signal, &meter, &PostselectState::A)?;
                Ok((k, (probs.meter_h - probs.meter_v) / k))
            })
            .collect()
    }

    /// `(ₐ⟨S₁⟩ · P(A), P(A))` predicted for the real state at `theta_deg`.
    fn weighted_weak_value(
        channel: &TwoQubitChannel,
        meter: &MeterSetting,
        theta_deg: f64,
    ) -> Result<(f64, f64)> {
        let input = TwoQubitState::product(&Polarization::from_angle_deg(theta_deg), &meter.state());
        let out = MixedOutput::from_unnormalized(channel.apply(&input.density_matrix()))?;
        let (h, v) = out.postselected_joint(&PostselectState::A);
        Ok(((h - v) / meter.strength(), h + v))
    }

    /// Recovers `⟨S₁⟩` from a measured weak value and postselection
    /// probability by inverting the model over real input states
    /// `cos θ|H⟩ + sin θ|V⟩`, `θ ∈ [0°, 180°]`.
    ///
    /// The matched quantity is `ₐ⟨S₁⟩ P(A)`, which the ideal device maps to
    /// `⟨S₁⟩ / 2` for every strength. With mixture the relation need not be
    /// monotone in θ, so every root is located and the one whose model
    /// `P(A)` is closest to `p_a` wins.
    pub fn invert_s1(
        &self,
        weak_value: f64,
        p_a: f64,
        params: &ImperfectionParams,
        meter: &MeterSetting,
    ) -> Result<f64> {
        const SCAN: usize = 1440;
        if meter.strength() == 0.0 {
            return Err(Error::IndeterminateStrength("expectation inversion"));
        }
        let channel = self.channel(params)?;
        let target = weak_value * p_a;
        let g = |theta: f64| Self::weighted_weak_value(&channel, meter, theta);

        let grid = (0..=SCAN)
            .map(|i| {
                let theta = 180.0 * i as f64 / SCAN as f64;
                g(theta).map(|(w, _)| (theta, w - target))
            })
            .collect::<Result<Vec<_>>>()?;
        let (min, max) = grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, r)| {
            (lo.min(r + target), hi.max(r + target))
        });
        if !target.is_finite() || target < min - 1e-12 || target > max + 1e-12 {
            return Err(Error::InversionOutOfRange {
                value: target,
                min,
                max,
            });
        }

        let mut best: Option<(f64, f64)> = None;
        for pair in grid.windows(2) {
            let ((mut lo, r_lo), (mut hi, r_hi)) = (pair[0], pair[1]);
            if r_lo == 0.0 {
                hi = lo;
            } else if r_lo.signum() == r_hi.signum() {
                continue;
            }
            let rising = r_hi > r_lo;
            for _ in 0..100 {
                if hi - lo < 1e-13 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let above = g(mid)?.0 > target;
                if above == rising {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let theta = 0.5 * (lo + hi);
            let mismatch = (g(theta)?.1 - p_a).abs();
            if best.is_none_or(|(_, m)| mismatch < m) {
                best = Some((theta, mismatch));
            }
        }
        // target within range but touching only at a grid extremum
        let theta = match best {
            Some((theta, _)) => theta,
            None => grid
                .iter()
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(t, _)| *t)
                .unwrap_or(0.0),
        };
        Ok((2.0 * theta.to_radians()).cos())
    }
}

/// [`DeviceModel::fit_visibility`] on the default device.
pub fn fit_visibility(target_p_a: f64, signal: &Polarization, meter: &MeterSetting) -> Result<ImperfectionParams> {
    DeviceModel::new(&DeviceConfig::default())?.fit_visibility(target_p_a, signal, meter)
}

/// [`DeviceModel::fit_depolarization`] on the default device.
pub fn fit_depolarization(
    target_p_a: f64,
    visibility: f64,
    signal: &Polarization,
    meter: &MeterSetting,
) -> Result<ImperfectionParams> {
    DeviceModel::new(&DeviceConfig::default())?.fit_depolarization(target_p_a, visibility, signal, meter)
}

/// [`DeviceModel::weak_value_curve`] on the default device.
pub fn model_weak_value_curve(
    params: &ImperfectionParams,
    signal: &Polarization,
    strengths: &[f64],
) -> Result<Vec<(f64, f64)>> {
    DeviceModel::new(&DeviceConfig::default())?.weak_value_curve(params, signal, strengths)
}

/// [`DeviceModel::invert_s1`] on the default device.
pub fn invert_s1(
    measured_weak_value: f64,
    measured_p_a: f64,
    params: &ImperfectionParams,
    meter: &MeterSetting,
) -> Result<f64> {
    DeviceModel::new(&DeviceConfig::default())?.invert_s1(measured_weak_value, measured_p_a, params, meter)
}
