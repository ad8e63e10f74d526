//! Qubit-level analysis of the weak polarization measurement.
//!
//! The signal photon `α|H⟩ + β|V⟩` is coupled to a meter photon
//! `γ|H⟩ + γ̄|V⟩`. Reading the meter in the H/V basis realizes the POVM
//! `Π_i = ½[1 ± K S₁]` with strength `K = 2γ² − 1`. Postselecting the
//! signal on `|A⟩` (or `|D⟩`) turns the rescaled meter imbalance into a weak
//! value of `S₁`, which can lie far outside `[−1, 1]`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const DIST_TOL: f64 = 1e-9;
/// Denominators or branch probabilities below this are treated as zero.
const VANISHING: f64 = 1e-14;

/// Single-photon polarization `α|H⟩ + β|V⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization {
    alpha: Complex64,
    beta: Complex64,
}

impl Polarization {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { alpha, beta })
    }

    /// Normalizes the given amplitudes.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// `cos θ |H⟩ + sin θ |V⟩` with θ in degrees.
    pub fn from_angle_deg(theta_deg: f64) -> Self {
        let theta = theta_deg.to_radians();
        Self {
            alpha: Complex64::new(theta.cos(), 0.0),
            beta: Complex64::new(theta.sin(), 0.0),
        }
    }

    pub fn h() -> Self {
        Self::from_angle_deg(0.0)
    }

    pub fn v() -> Self {
        Self {
            alpha: Complex64::default(),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    /// `(|H⟩ + |V⟩)/√2`
    pub fn d() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: Complex64::new(s, 0.0),
            beta: Complex64::new(s, 0.0),
        }
    }

    /// `(|H⟩ − |V⟩)/√2`
    pub fn a() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: Complex64::new(s, 0.0),
            beta: Complex64::new(-s, 0.0),
        }
    }

    /// `(|H⟩ + i|V⟩)/√2`
    pub fn r() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: Complex64::new(s, 0.0),
            beta: Complex64::new(0.0, s),
        }
    }

    /// `(|H⟩ − i|V⟩)/√2`
    pub fn l() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: Complex64::new(s, 0.0),
            beta: Complex64::new(0.0, -s),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.alpha, self.beta]
    }

    /// Real amplitudes after removing a global phase, if the state has any.
    pub fn real_amplitudes(&self) -> Option<(f64, f64)> {
        let pivot = if self.alpha.norm() >= self.beta.norm() {
            self.alpha
        } else {
            self.beta
        };
        let phase = pivot.conj() / pivot.norm();
        let (a, b) = (self.alpha * phase, self.beta * phase);
        if a.im.abs() < NORM_TOL && b.im.abs() < NORM_TOL {
            Some((a.re, b.re))
        } else {
            None
        }
    }

    /// `⟨other|self⟩`
    pub fn overlap(&self, other: &Polarization) -> Complex64 {
        other.alpha.conj() * self.alpha + other.beta.conj() * self.beta
    }
}

/// Meter preparation `γ|H⟩ + γ̄|V⟩` with real `γ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeterSetting {
    gamma: f64,
    gammabar: f64,
    strength: f64,
}

impl MeterSetting {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: gamma,
            });
        }
        Ok(Self {
            gamma,
            gammabar: (1.0 - gamma * gamma).max(0.0).sqrt(),
            strength: 2.0 * gamma * gamma - 1.0,
        })
    }

    /// Meter with measurement strength `K = 2γ² − 1`.
    pub fn from_strength(strength: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&strength) {
            return Err(Error::OutOfRange {
                name: "K",
                value: strength,
            });
        }
        Ok(Self {
            gamma: ((1.0 + strength) / 2.0).sqrt(),
            gammabar: ((1.0 - strength) / 2.0).sqrt(),
            strength,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gammabar(&self) -> f64 {
        self.gammabar
    }

    /// Measurement strength (knowledge) `K = 2γ² − 1`.
    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// `K < 0`, i.e. `γ < 1/√2`. Permitted but outside the studied regime.
    pub fn is_negative_strength(&self) -> bool {
        self.strength < 0.0
    }

    pub fn state(&self) -> Polarization {
        Polarization {
            alpha: Complex64::new(self.gamma, 0.0),
            beta: Complex64::new(self.gammabar, 0.0),
        }
    }
}

/// Two-outcome POVM on the signal photon, in the `{|H⟩, |V⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Povm {
    pub pi_h: Matrix2<Complex64>,
    pub pi_v: Matrix2<Complex64>,
}

impl Povm {
    /// `(⟨ψ|Π_H|ψ⟩, ⟨ψ|Π_V|ψ⟩)`
    pub fn probabilities(&self, psi: &Polarization) -> (f64, f64) {
        let v = nalgebra::Vector2::new(psi.alpha, psi.beta);
        let expect = |m: &Matrix2<Complex64>| (v.adjoint() * m * v)[(0, 0)].re;
        (expect(&self.pi_h), expect(&self.pi_v))
    }
}

/// `Π_i = ½[1 + (δ_iH − δ_iV) K S₁]`
pub fn povm_elements(meter: &MeterSetting) -> Povm {
    let k = meter.strength();
    let diag = |sign: f64| {
        Matrix2::new(
            Complex64::new(0.5 * (1.0 + sign * k), 0.0),
            Complex64::default(),
            Complex64::default(),
            Complex64::new(0.5 * (1.0 - sign * k), 0.0),
        )
    };
    Povm {
        pi_h: diag(1.0),
        pi_v: diag(-1.0),
    }
}

/// `⟨S₁⟩ = |α|² − |β|²`
pub fn expectation_s1(psi: &Polarization) -> f64 {
    psi.alpha.norm_sqr() - psi.beta.norm_sqr()
}

/// `⟨S₁⟩` recovered from meter outcome probabilities, `(P(H) − P(V)) / K`.
pub fn expectation_s1_from_probs(p_h: f64, p_v: f64, strength: f64) -> Result<f64> {
    check_binary(p_h, p_v)?;
    if strength == 0.0 {
        return Err(Error::IndeterminateStrength("<S1> from meter probabilities"));
    }
    Ok((p_h - p_v) / strength)
}

/// Signal postselection target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PostselectState {
    /// `(|H⟩ − |V⟩)/√2`
    A,
    /// `(|H⟩ + |V⟩)/√2`
    D,
    Custom(Polarization),
}

impl PostselectState {
    pub fn state(&self) -> Polarization {
        match self {
            Self::A => Polarization::a(),
            Self::D => Polarization::d(),
            Self::Custom(p) => *p,
        }
    }

    /// The orthogonal postselection, when one of the two named states.
    pub fn complement(&self) -> Option<Self> {
        match self {
            Self::A => Some(Self::D),
            Self::D => Some(Self::A),
            Self::Custom(_) => None,
        }
    }
}

/// Meter statistics conditioned on a successful signal postselection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PostselectedProbs {
    /// `P(H | post)`
    pub meter_h: f64,
    /// `P(V | post)`
    pub meter_v: f64,
    /// `P(post)`
    pub post: f64,
}

impl PostselectedProbs {
    /// Builds conditional probabilities from joint ones `P(post, H)`,
    /// `P(post, V)` and the total weight of all outcomes.
    pub fn from_joint(joint_h: f64, joint_v: f64, total: f64) -> Result<Self> {
        let post = joint_h + joint_v;
        if total <= 0.0 || post / total < VANISHING {
            return Err(Error::PostselectionImpossible);
        }
        Ok(Self {
            meter_h: joint_h / post,
            meter_v: joint_v / post,
            post: post / total,
        })
    }
}

/// Postselected meter probabilities for the ideal post-gate state.
///
/// The signal branch correlated with meter H is `αγ|H⟩ + βγ̄|V⟩`, with
/// meter V it is `αγ̄|H⟩ + βγ|V⟩`; projecting each on the postselection
/// adds amplitudes before squaring.
pub fn postselected_probs(
    psi: &Polarization,
    meter: &MeterSetting,
    post: &PostselectState,
) -> Result<PostselectedProbs> {
    let (g, gb) = (meter.gamma(), meter.gammabar());
    let target = post.state();
    let branch_h = Polarization {
        alpha: psi.alpha * g,
        beta: psi.beta * gb,
    };
    let branch_v = Polarization {
        alpha: psi.alpha * gb,
        beta: psi.beta * g,
    };
    let joint_h = branch_h.overlap(&target).norm_sqr();
    let joint_v = branch_v.overlap(&target).norm_sqr();
    PostselectedProbs::from_joint(joint_h, joint_v, 1.0)
}

/// Postselected mean `(P(H|post) − P(V|post)) / K`.
pub fn weak_value_from_probs(p_h: f64, p_v: f64, strength: f64) -> Result<f64> {
    check_binary(p_h, p_v)?;
    if strength == 0.0 {
        return Err(Error::WeakValueUnbounded);
    }
    Ok((p_h - p_v) / strength)
}

/// Expected postselected value of `S₁`.
///
/// For real amplitudes and `|A⟩`/`|D⟩` postselection this is the closed form
/// `(|α|² − |β|²) / (1 ∓ 4γγ̄ αβ)`; complex amplitudes or other
/// postselections go through [`postselected_probs`] and
/// [`weak_value_from_probs`].
pub fn weak_value_analytic(
    psi: &Polarization,
    meter: &MeterSetting,
    post: &PostselectState,
) -> Result<f64> {
    let sign = match post {
        PostselectState::A => -1.0,
        PostselectState::D => 1.0,
        PostselectState::Custom(_) => return weak_value_via_probs(psi, meter, post),
    };
    let Some((alpha, beta)) = psi.real_amplitudes() else {
        return weak_value_via_probs(psi, meter, post);
    };
    let denom = 1.0 + sign * 4.0 * meter.gamma() * meter.gammabar() * alpha * beta;
    if denom.abs() < VANISHING {
        return Err(Error::WeakValueDiverges);
    }
    Ok((alpha * alpha - beta * beta) / denom)
}

fn weak_value_via_probs(
    psi: &Polarization,
    meter: &MeterSetting,
    post: &PostselectState,
) -> Result<f64> {
    let probs = postselected_probs(psi, meter, post)?;
    weak_value_from_probs(probs.meter_h, probs.meter_v, meter.strength())
}

/// Knowledge `K = P_HH + P_VV − P_HV − P_VH` of the device, measured with a
/// `|D⟩` signal input.
pub fn knowledge_from_probs(p_hh: f64, p_vv: f64, p_hv: f64, p_vh: f64) -> Result<f64> {
    let probs = [p_hh, p_vv, p_hv, p_vh];
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::MalformedDistribution(format!("{probs:?}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > DIST_TOL {
        return Err(Error::MalformedDistribution(format!("sums to {total}")));
    }
    Ok(p_hh + p_vv - p_hv - p_vh)
}

/// `⟨S₁⟩ = ₐ⟨S⟩ P(A) + ᴅ⟨S⟩ P(D)`, split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub weak_a: f64,
    pub prob_a: f64,
    pub weak_d: f64,
    pub prob_d: f64,
    pub term_a: f64,
    pub term_d: f64,
    pub total: f64,
}

pub fn expectation_decomposition(psi: &Polarization, meter: &MeterSetting) -> Result<Decomposition> {
    if meter.strength() == 0.0 {
        return Err(Error::IndeterminateStrength("complementary decomposition"));
    }
    let prob_a = postselected_probs(psi, meter, &PostselectState::A)
        .map(|p| p.post)
        .unwrap_or(0.0);
    let prob_d = postselected_probs(psi, meter, &PostselectState::D)
        .map(|p| p.post)
        .unwrap_or(0.0);
    // A branch that can never occur contributes nothing, whatever its weak value.
    let weak_a = if prob_a > 0.0 {
        weak_value_analytic(psi, meter, &PostselectState::A)?
    } else {
        0.0
    };
    let weak_d = if prob_d > 0.0 {
        weak_value_analytic(psi, meter, &PostselectState::D)?
    } else {
        0.0
    };
    let term_a = weak_a * prob_a;
    let term_d = weak_d * prob_d;
    Ok(Decomposition {
        weak_a,
        prob_a,
        weak_d,
        prob_d,
        term_a,
        term_d,
        total: term_a + term_d,
    })
}

fn check_binary(p_h: f64, p_v: f64) -> Result<()> {
    if !p_h.is_finite() || !p_v.is_finite() || p_h < 0.0 || p_v < 0.0 {
        return Err(Error::MalformedDistribution(format!("({p_h}, {p_v})")));
    }
    if (p_h + p_v - 1.0).abs() > DIST_TOL {
        return Err(Error::MalformedDistribution(format!(
            "sums to {}",
            p_h + p_v
        )));
    }
    Ok(())
}
