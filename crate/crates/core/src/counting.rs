//! Monte Carlo photon counting and the estimators built on it.
//!
//! Every outcome class is an independent Poisson variable with mean
//! `rate · duration · p`. Knowledge `K̂` comes from an unpostselected
//! calibration run with a `|D⟩` signal; the weak value from a postselected
//! run, rescaled by `K̂`. Errors follow the delta method on the Poisson counts.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DeviceConfig;
use crate::error::{Error, Result};
use crate::imperfection::{DeviceModel, ImperfectionParams};
use crate::tomography::format_real;
use crate::weak::{MeterSetting, Polarization, PostselectState};

/// Name of the generator recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha), stream = 2*grid_index + run_type";

pub const CSV_HEADER: &str = "K_true,K_hat,K_sigma,wv,wv_sigma,wv_worst,unbounded";

/// Strength grid used when none is given: dense at small `K`, where the
/// weak value grows fastest.
pub const DEFAULT_K_GRID: [f64; 10] = [0.006, 0.02, 0.05, 0.1, 0.125, 0.2, 0.3, 0.5, 0.75, 1.0];

const DIST_TOL: f64 = 1e-9;

/// Count rates (per second) and acquisition times (seconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub unpostselected_rate: f64,
    pub postselected_rate: f64,
    pub duration_k: f64,
    pub duration_wv: f64,
    pub seed: u64,
}

impl Default for RunPlan {
    fn default() -> Self {
        Self {
            unpostselected_rate: 44.6,
            postselected_rate: 0.52,
            duration_k: 100.0,
            duration_wv: 1000.0,
            seed: 0,
        }
    }
}

impl RunPlan {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("unpostselected_rate", self.unpostselected_rate),
            ("postselected_rate", self.postselected_rate),
            ("duration_k", self.duration_k),
            ("duration_wv", self.duration_wv),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::OutOfRange { name, value });
            }
        }
        Ok(())
    }
}

/// Which of the two acquisitions a random stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunType {
    Knowledge = 0,
    WeakValue = 1,
}

/// Independent, reproducible generator for one (grid point, run type).
pub fn stream_rng(seed: u64, grid_index: usize, run: RunType) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(2 * grid_index as u64 + run as u64);
    rng
}

/// Photon counts per outcome class over one acquisition.
///
/// Knowledge runs order the classes HH, HV, VH, VV (signal, meter);
/// weak-value runs order them meter H, meter V.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountSample {
    pub counts: Vec<u64>,
    /// Seconds.
    pub duration: f64,
}

impl CountSample {
    pub fn new(counts: Vec<u64>, duration: f64) -> Self {
        Self { counts, duration }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Draws Poisson counts with a generator seeded from `seed`.
pub fn sample_counts(probs: &[f64], rate: f64, duration: f64, seed: u64) -> Result<CountSample> {
    sample_counts_with(probs, rate, duration, &mut ChaCha20Rng::seed_from_u64(seed))
}

pub fn sample_counts_with<R: rand::Rng + ?Sized>(
    probs: &[f64],
    rate: f64,
    duration: f64,
    rng: &mut R,
) -> Result<CountSample> {
    if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::MalformedDistribution(format!("{probs:?}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > DIST_TOL {
        return Err(Error::MalformedDistribution(format!("sums to {total}")));
    }
    for (name, value) in [("rate", rate), ("duration", duration)] {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::OutOfRange { name, value });
        }
    }
    let counts = probs
        .iter()
        .map(|p| {
            let mean = rate * duration * p;
            if mean > 0.0 {
                let poisson = Poisson::new(mean)
                    .map_err(|e| Error::MalformedDistribution(e.to_string()))?;
                Ok(poisson.sample(rng) as u64)
            } else {
                Ok(0)
            }
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(CountSample::new(counts, duration))
}

/// Point estimate with a 1σ error bar.
///
/// `upper` is `None` when the error is unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: Option<f64>,
    /// Value recomputed with the strength moved by 1σ towards smaller
    /// `|value|` (the correlated worst case).
    pub worst_case: Option<f64>,
    pub unbounded_above: bool,
}

impl Estimate {
    pub fn symmetric(value: f64, sigma: f64) -> Self {
        Self {
            value,
            sigma,
            lower: value - sigma,
            upper: Some(value + sigma),
            worst_case: None,
            unbounded_above: false,
        }
    }

    /// Whether `[value − σ, value + σ]` contains `x`.
    pub fn covers(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.sigma
    }
}

/// Delta-method standard error of `(A − B)/(A + B)` for independent Poisson
/// `A`, `B` with `A + B = n`: `√((1 − x²)/n)`.
fn normalized_difference_sigma(x: f64, n: f64) -> f64 {
    ((1.0 - x * x).max(0.0) / n).sqrt()
}

/// `K̂ = (N_HH + N_VV − N_HV − N_VH) / N` from a knowledge run.
pub fn estimate_knowledge(sample: &CountSample) -> Result<Estimate> {
    let [hh, hv, vh, vv]: [u64; 4] = sample
        .counts
        .as_slice()
        .try_into()
        .map_err(|_| Error::WrongOutcomeCount {
            got: sample.counts.len(),
            expected: 4,
        })?;
    let n = (hh + hv + vh + vv) as f64;
    if n == 0.0 {
        return Err(Error::NoCounts);
    }
    let k = ((hh + vv) as f64 - (hv + vh) as f64) / n;
    Ok(Estimate::symmetric(k, normalized_difference_sigma(k, n)))
}

/// Weak value `((N_H − N_V)/(N_H + N_V)) / K̂` from a postselected run.
///
/// `sigma` carries only the Poisson error of the meter counts; the
/// strength uncertainty enters through `worst_case` and `unbounded_above`.
pub fn estimate_weak_value(sample: &CountSample, knowledge: &Estimate) -> Result<Estimate> {
    let [h, v]: [u64; 2] = sample
        .counts
        .as_slice()
        .try_into()
        .map_err(|_| Error::WrongOutcomeCount {
            got: sample.counts.len(),
            expected: 2,
        })?;
    let n = (h + v) as f64;
    if n == 0.0 {
        return Err(Error::NoCounts);
    }
    let k = knowledge.value;
    if k == 0.0 {
        return Err(Error::WeakValueUnbounded);
    }
    let imbalance = (h as f64 - v as f64) / n;
    let value = imbalance / k;
    let sigma = normalized_difference_sigma(imbalance, n) / k.abs();
    let shifted = k + k.signum() * knowledge.sigma;
    // the strength is non-negative, so a lower bound at or below zero lets
    // K → 0⁺ and the weak value run off to infinity
    let unbounded_above = k - knowledge.sigma <= 0.0;
    Ok(Estimate {
        value,
        sigma,
        lower: value - sigma,
        upper: (!unbounded_above).then_some(value + sigma),
        worst_case: Some(imbalance / shifted),
        unbounded_above,
    })
}

/// One strength setting of the simulated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Row {
    pub k_true: f64,
    pub knowledge_counts: CountSample,
    pub weak_counts: CountSample,
    /// `None` when the calibration run recorded nothing.
    pub knowledge: Option<Estimate>,
    /// `None` ("no data") when the postselected run recorded nothing or the
    /// strength estimate is unusable.
    pub weak_value: Option<Estimate>,
}

/// Run parameters and provenance written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Metadata {
    pub seed: u64,
    pub plan: RunPlan,
    pub angle_deg: Option<f64>,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub params: ImperfectionParams,
    pub device: DeviceConfig,
    pub k_grid: Vec<f64>,
    pub rng: &'static str,
    pub crate_version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Table {
    pub rows: Vec<Fig2Row>,
    pub metadata: Fig2Metadata,
}

impl Fig2Table {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for row in &self.rows {
            let (k_hat, k_sigma) = match &row.knowledge {
                Some(k) => (format_real(k.value), format_real(k.sigma)),
                None => (String::new(), String::new()),
            };
            let (wv, wv_sigma, worst, flag) = match &row.weak_value {
                Some(w) => (
                    format_real(w.value),
                    format_real(w.sigma),
                    w.worst_case.map(format_real).unwrap_or_default(),
                    w.unbounded_above.to_string(),
                ),
                None => (String::new(), String::new(), String::new(), "no_data".to_string()),
            };
            writeln!(
                out,
                "{},{k_hat},{k_sigma},{wv},{wv_sigma},{worst},{flag}",
                format_real(row.k_true)
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(&self.metadata).expect("metadata is serializable")
    }
}

/// Simulates the strength sweep: for each grid strength, a knowledge
/// calibration run and a postselected weak-value run, each with its own
/// random stream. Grid points run in parallel; rows come back in grid order.
pub fn run_fig2(
    plan: &RunPlan,
    signal: &Polarization,
    params: &ImperfectionParams,
    k_grid: &[f64],
) -> Result<Fig2Table> {
    run_fig2_with(plan, signal, params, k_grid, &DeviceConfig::default())
}

pub fn run_fig2_with(
    plan: &RunPlan,
    signal: &Polarization,
    params: &ImperfectionParams,
    k_grid: &[f64],
    cfg: &DeviceConfig,
) -> Result<Fig2Table> {
    if k_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    plan.validate()?;
    let model = DeviceModel::new(cfg)?;
    let rows = k_grid
        .par_iter()
        .enumerate()
        .map(|(i, &k)| simulate_point(&model, plan, signal, params, i, k))
        .collect::<Result<Vec<_>>>()?;
    let (alpha, beta) = (signal.alpha(), signal.beta());
    Ok(Fig2Table {
        rows,
        metadata: Fig2Metadata {
            seed: plan.seed,
            plan: *plan,
            angle_deg: signal
                .real_amplitudes()
                .map(|(a, b)| b.atan2(a).to_degrees()),
            alpha: [alpha.re, alpha.im],
            beta: [beta.re, beta.im],
            params: *params,
            device: *cfg,
            k_grid: k_grid.to_vec(),
            rng: RNG_ALGORITHM,
            crate_version: env!("CARGO_PKG_VERSION"),
        },
    })
}

fn simulate_point(
    model: &DeviceModel,
    plan: &RunPlan,
    signal: &Polarization,
    params: &ImperfectionParams,
    index: usize,
    k_true: f64,
) -> Result<Fig2Row> {
    let meter = MeterSetting::from_strength(k_true)?;

    let calibration = model.output(params, &Polarization::d(), &meter)?;
    let joint = calibration.joint_distribution().as_array();
    let mut rng = stream_rng(plan.seed, index, RunType::Knowledge);
    let knowledge_counts = sample_counts_with(
        &normalize(joint),
        plan.unpostselected_rate,
        plan.duration_k,
        &mut rng,
    )?;

    let post = model.postselected(params, signal, &meter, &PostselectState::A)?;
    let mut rng = stream_rng(plan.seed, index, RunType::WeakValue);
    let weak_counts = sample_counts_with(
        &normalize([post.meter_h, post.meter_v]),
        plan.postselected_rate,
        plan.duration_wv,
        &mut rng,
    )?;

    let knowledge = estimate_knowledge(&knowledge_counts).ok();
    let weak_value = knowledge
        .as_ref()
        .and_then(|k| estimate_weak_value(&weak_counts, k).ok());
    Ok(Fig2Row {
        k_true,
        knowledge_counts,
        weak_counts,
        knowledge,
        weak_value,
    })
}

/// Clamps round-off negatives and rescales to unit sum.
fn normalize<const N: usize>(probs: [f64; N]) -> [f64; N] {
    let clipped = probs.map(|p| p.max(0.0));
    let total: f64 = clipped.iter().sum();
    clipped.map(|p| p / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_duration_gives_no_counts() {
        let s = sample_counts(&[0.25; 4], 44.6, 0.0, 3).unwrap();
        assert_eq!(s.counts, vec![0; 4]);
        assert_eq!(estimate_knowledge(&s), Err(Error::NoCounts));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let a = sample_counts(&[0.1, 0.2, 0.3, 0.4], 44.6, 100.0, 11).unwrap();
        let b = sample_counts(&[0.1, 0.2, 0.3, 0.4], 44.6, 100.0, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_counts(&[0.1, 0.2, 0.3, 0.4], 44.6, 100.0, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_distribution_rejected() {
        assert!(sample_counts(&[0.5, 0.6], 1.0, 1.0, 0).is_err());
        assert!(sample_counts(&[-0.5, 1.5], 1.0, 1.0, 0).is_err());
        assert!(sample_counts(&[0.5, 0.5], -1.0, 1.0, 0).is_err());
    }

    #[test]
    fn knowledge_estimate_examples() {
        // HH 300, HV 200, VH 210, VV 290
        let s = CountSample::new(vec![300, 200, 210, 290], 100.0);
        let k = estimate_knowledge(&s).unwrap();
        assert!((k.value - 0.18).abs() < 1e-15);
        assert!((k.sigma - (0.9676f64 / 1000.0).sqrt()).abs() < 1e-15);
        assert!((k.sigma - 0.031).abs() < 5e-4);
        let all_hh = CountSample::new(vec![50, 0, 0, 0], 1.0);
        assert_eq!(estimate_knowledge(&all_hh).unwrap().value, 1.0);
        assert!(matches!(
            estimate_knowledge(&CountSample::new(vec![1, 2], 1.0)),
            Err(Error::WrongOutcomeCount { got: 2, expected: 4 })
        ));
    }

    #[test]
    fn weak_value_estimate_examples() {
        let s = CountSample::new(vec![270, 250], 1000.0);
        let k = Estimate::symmetric(0.1, 0.015);
        let w = estimate_weak_value(&s, &k).unwrap();
        assert!((w.value - 20.0 / 520.0 / 0.1).abs() < 1e-12);
        assert!((w.value - 0.3846).abs() < 1e-4);
        assert!(!w.unbounded_above);
        assert!((w.worst_case.unwrap() - 20.0 / 520.0 / 0.115).abs() < 1e-12);

        let tiny = Estimate::symmetric(0.006, 0.015);
        let w = estimate_weak_value(&s, &tiny).unwrap();
        assert!(w.unbounded_above);
        assert!(w.upper.is_none());

        assert_eq!(
            estimate_weak_value(&CountSample::new(vec![0, 0], 1.0), &k),
            Err(Error::NoCounts)
        );
        assert_eq!(
            estimate_weak_value(&s, &Estimate::symmetric(0.0, 0.01)),
            Err(Error::WeakValueUnbounded)
        );
    }

    #[test]
    fn streams_differ_by_grid_point_and_run() {
        use rand::Rng;
        let mut a = stream_rng(5, 0, RunType::Knowledge);
        let mut b = stream_rng(5, 0, RunType::WeakValue);
        let mut c = stream_rng(5, 1, RunType::Knowledge);
        let (x, y, z): (u64, u64, u64) = (a.random(), b.random(), c.random());
        assert!(x != y && y != z && x != z);
    }

    #[test]
    fn no_postselected_data_is_flagged() {
        let plan = RunPlan {
            duration_wv: 0.0,
            seed: 9,
            ..RunPlan::default()
        };
        let table = run_fig2(
            &plan,
            &Polarization::from_angle_deg(42.0),
            &ImperfectionParams::ideal(),
            &[0.006, 0.5, 1.0],
        )
        .unwrap();
        assert!(table.rows.iter().all(|r| r.weak_value.is_none()));
        let csv = table.to_csv_string();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",,,,no_data")));
    }

    #[test]
    fn empty_grid_rejected() {
        assert_eq!(
            run_fig2(&RunPlan::default(), &Polarization::h(), &ImperfectionParams::ideal(), &[]),
            Err(Error::EmptyGrid)
        );
    }
}
