//! Experiment harness: named parameter presets, deterministic Monte Carlo
//! estimation campaigns, per-trial attack runs, and batch analysis.
//!
//! Determinism contract: every trial derives its randomness from
//! (master seed, trial index) via independent ChaCha streams, so results
//! are identical for any thread count and any trial execution order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::analysis::{
    isd_expected_cost, select_threshold, weight_pdf, SecurityReport, WeightDistribution,
    DEFAULT_DELTA_MAX,
};
use crate::attack::{estimate_secret, recover_key, AttackConfig, AttackOutcome};
use crate::scheme::{keygen, sign, ParameterSet, SigningKey, VerificationKey};
use crate::Error;

/// A named instance from the security tables: parameters plus the
/// tabulated threshold.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub params: ParameterSet,
    pub b: usize,
}

fn preset_entry(name: &'static str, tuple: (usize, usize, usize, usize, u64), b: usize) -> Preset {
    let (p, w_e, w_y, w_c, h_seed) = tuple;
    Preset {
        name,
        params: ParameterSet::new(p, w_e, w_y, w_c, h_seed).expect("preset parameters validate"),
        b,
    }
}

/// The nine bundled instances behind the security tables.
pub fn presets() -> Vec<Preset> {
    vec![
        preset_entry("table1-row1", (3072, 85, 85, 7, 1), 5),
        preset_entry("table1-row2", (4801, 90, 100, 10, 2), 7),
        preset_entry("table1-row3", (6272, 125, 125, 10, 3), 7),
        preset_entry("table1-row4", (9857, 150, 200, 15, 4), 9),
        preset_entry("table2-row1", (4801, 90, 300, 8, 11), 6),
        preset_entry("table2-row2", (4801, 100, 400, 6, 12), 4),
        preset_entry("table2-row3", (4801, 90, 1000, 10, 13), 7),
        preset_entry("table2-row4", (4801, 90, 100, 20, 14), 12),
        preset_entry("table2-row5", (4801, 180, 100, 10, 15), 7),
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

/// One estimation trial: fresh key, fresh signature, thresholded estimate,
/// true residual weight wt(e + e').
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TrialRecord {
    pub trial: u64,
    pub residual_weight: usize,
    pub estimator_exact: bool,
}

#[derive(Clone, Debug)]
pub struct SimulationSpec {
    pub params: ParameterSet,
    pub trials: u64,
    pub b: usize,
    pub seed: u64,
    /// 0 picks the rayon default.
    pub threads: usize,
}

/// Empirical residual-weight histogram next to the closed-form pdf.
#[derive(Clone, Debug)]
pub struct SimulationSummary {
    pub trials: u64,
    /// (delta, empirical mass, theoretical mass) for delta = 0..=delta_max.
    pub histogram: Vec<(usize, f64, f64)>,
    pub total_variation: f64,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn estimation_trial(params: &ParameterSet, b: usize, seed: u64, trial: u64) -> TrialRecord {
    let mut rng = trial_rng(seed, trial);
    let (sk, _) = keygen(params, &mut rng);
    let sig = sign(&trial.to_le_bytes(), &sk, params, &mut rng);
    let (estimate, _) = estimate_secret(&sig, params, b).expect("b validated by caller");
    let residual_weight = sk.e.add(&estimate).weight();
    TrialRecord { trial, residual_weight, estimator_exact: residual_weight == 0 }
}

fn run_trials<T: Send>(
    threads: usize,
    trials: u64,
    job: impl Fn(u64) -> T + Sync,
) -> Vec<T> {
    let body = || (0..trials).into_par_iter().map(|t| job(t)).collect();
    if threads == 0 {
        body()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("worker pool");
        pool.install(body)
    }
}

/// Runs keygen/sign/estimate trials and compares the residual-weight
/// histogram against the closed-form distribution.
pub fn simulate(spec: &SimulationSpec) -> Result<(Vec<TrialRecord>, SimulationSummary), Error> {
    spec.params.validate()?;
    if !(1..=spec.params.w_c + 1).contains(&spec.b) {
        return Err(Error::Parameter(format!(
            "threshold b = {} outside [1, {}]",
            spec.b,
            spec.params.w_c + 1
        )));
    }
    assert!(spec.trials >= 1, "need at least one trial");
    let records = run_trials(spec.threads, spec.trials, |t| {
        estimation_trial(&spec.params, spec.b, spec.seed, t)
    });

    // the vacuous threshold b = w_c + 1 forces e' = 0, so the residual is
    // exactly the secret: a point mass at w_e rather than the tabulated pdf
    let pdf = if spec.b <= spec.params.w_c {
        weight_pdf(&spec.params, spec.b, DEFAULT_DELTA_MAX)
    } else {
        let mut masses = vec![0.0; spec.params.w_e + 1];
        masses[spec.params.w_e] = 1.0;
        WeightDistribution::from_masses(masses)
    };
    let observed_max =
        records.iter().map(|r| r.residual_weight).max().expect("at least one trial");
    let delta_max = pdf.delta_max().max(observed_max);
    let mut counts = vec![0u64; delta_max + 1];
    for r in &records {
        counts[r.residual_weight] += 1;
    }
    let mut tv = pdf.tail();
    let histogram: Vec<(usize, f64, f64)> = (0..=delta_max)
        .map(|d| {
            let emp = counts[d] as f64 / spec.trials as f64;
            let theo = pdf.mass(d);
            tv += (emp - theo).abs();
            (d, emp, theo)
        })
        .collect();
    let summary =
        SimulationSummary { trials: spec.trials, histogram, total_variation: tv / 2.0 };
    Ok((records, summary))
}

pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("trial,residual_weight,estimator_exact\n");
    for r in records {
        out.push_str(&format!("{},{},{}\n", r.trial, r.residual_weight, r.estimator_exact));
    }
    out
}

pub fn summary_csv(summary: &SimulationSummary) -> String {
    let mut out = String::from("delta,empirical,theoretical\n");
    for &(d, emp, theo) in &summary.histogram {
        out.push_str(&format!("{d},{emp:.6e},{theo:.6e}\n"));
    }
    out
}

/// One full attack trial against a fresh planted instance: returns the
/// planted key material alongside the outcome so callers can check full
/// recovery. The ISD seed is drawn from the trial stream.
pub fn attack_trial(
    params: &ParameterSet,
    cfg: &AttackConfig,
    seed: u64,
    trial: u64,
) -> (SigningKey, VerificationKey, AttackOutcome) {
    let mut rng = trial_rng(seed, trial);
    let (sk, vk) = keygen(params, &mut rng);
    let sig = sign(&trial.to_le_bytes(), &sk, params, &mut rng);
    let mut cfg = *cfg;
    cfg.isd.rng_seed = rng.random();
    let outcome = recover_key(&sig, &vk, params, &cfg).expect("config validated by caller");
    (sk, vk, outcome)
}

/// One analysis request: a parameter set with an optional pinned threshold
/// (absent means auto-selection).
#[derive(Clone, Copy, Debug, Deserialize)]
pub struct AnalyzeRequest {
    pub p: usize,
    pub w_e: usize,
    pub w_y: usize,
    pub w_c: usize,
    #[serde(default)]
    pub h_seed: u64,
    #[serde(default)]
    pub b: Option<usize>,
}

impl AnalyzeRequest {
    pub fn pinned(params: ParameterSet, b: usize) -> Self {
        AnalyzeRequest {
            p: params.p,
            w_e: params.w_e,
            w_y: params.w_y,
            w_c: params.w_c,
            h_seed: params.h_seed,
            b: Some(b),
        }
    }
}

/// The bundled table instances as analysis requests with their tabulated
/// thresholds pinned.
pub fn bundled_requests() -> Vec<AnalyzeRequest> {
    presets().iter().map(|pr| AnalyzeRequest::pinned(pr.params, pr.b)).collect()
}

/// Evaluates each request, resolving absent thresholds via auto-selection.
/// Per-row failures come back as row-level errors, not a batch abort.
pub fn analyze_sets(
    requests: &[AnalyzeRequest],
    j: usize,
    w_bar: usize,
) -> Vec<Result<SecurityReport, Error>> {
    requests
        .iter()
        .map(|req| {
            let params = ParameterSet::new(req.p, req.w_e, req.w_y, req.w_c, req.h_seed)?;
            match req.b {
                Some(b) => {
                    if !(1..=params.w_c).contains(&b) {
                        return Err(Error::Parameter(format!(
                            "threshold b = {b} outside [1, w_c = {}]",
                            params.w_c
                        )));
                    }
                    isd_expected_cost(&params, b, j, w_bar)
                }
                None => Ok(select_threshold(&params, j, w_bar).1),
            }
        })
        .collect()
}

pub fn reports_csv(rows: &[Result<SecurityReport, Error>]) -> String {
    let mut out = String::from(SecurityReport::CSV_HEADER.to_owned() + "\n");
    for row in rows {
        match row {
            Ok(report) => out.push_str(&(report.csv_row() + "\n")),
            Err(err) => out.push_str(&format!("# error: {err}\n")),
        }
    }
    out
}
