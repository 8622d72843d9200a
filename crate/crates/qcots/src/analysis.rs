//! Closed-form evaluation of the attack: partition probabilities, per-
//! coefficient match/mismatch rates, the weight distribution of the residual
//! e* = e + e', Lee-Brickell cost, and the GV distance.
//!
//! Probabilities are computed in linear f64 with all binomials taken through
//! a cumulative log-factorial table; quantities that overflow f64 (iteration
//! cost, GV partial sums) use exact big integers and are carried in log2.

use num_bigint::BigUint;
use std::collections::HashMap;

use crate::scheme::ParameterSet;
use crate::Error;

/// Residual-weight truncation used when no explicit bound is requested.
pub const DEFAULT_DELTA_MAX: usize = 200;
/// Default cap on the residual weight considered in the ISD success sum.
pub const DEFAULT_W_BAR: usize = 40;
/// Partitions contributing less than this joint probability are skipped.
const PARTITION_PRUNE: f64 = 1e-18;

/// A probability or cost carried in log2; the linear view is derived on
/// demand. Probabilities have log2_value <= 0, costs are positive.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ProbabilityValue {
    pub log2_value: f64,
}

impl ProbabilityValue {
    pub fn from_linear(x: f64) -> Self {
        ProbabilityValue { log2_value: if x > 0.0 { x.log2() } else { f64::NEG_INFINITY } }
    }

    pub fn from_log2(log2_value: f64) -> Self {
        ProbabilityValue { log2_value }
    }

    pub fn linear(&self) -> f64 {
        self.log2_value.exp2()
    }
}

/// P{wt = δ} for δ = 0..delta_max, with the truncated tail made explicit.
#[derive(Clone, Debug)]
pub struct WeightDistribution {
    masses: Vec<f64>,
    tail: f64,
}

impl WeightDistribution {
    pub(crate) fn from_masses(masses: Vec<f64>) -> Self {
        debug_assert!(masses.iter().all(|&m| m >= 0.0));
        let tail = (1.0 - masses.iter().sum::<f64>()).max(0.0);
        WeightDistribution { masses, tail }
    }

    pub fn mass(&self, delta: usize) -> f64 {
        self.masses.get(delta).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn delta_max(&self) -> usize {
        self.masses.len() - 1
    }

    /// Probability mass beyond delta_max.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.masses.iter().copied().enumerate()
    }
}

/// One evaluated parameter set: everything a security table row needs.
#[derive(Clone, Debug)]
pub struct SecurityReport {
    pub params: ParameterSet,
    pub b: usize,
    pub j: usize,
    pub w_bar: usize,
    pub p_zero: ProbabilityValue,
    pub p_iter: ProbabilityValue,
    pub c_iter: ProbabilityValue,
    pub c_isd: ProbabilityValue,
    pub gv: usize,
}

impl SecurityReport {
    pub const CSV_HEADER: &'static str =
        "p,w_e,w_y,w_c,b,j,w_bar,log2_p_zero,log2_P_iter,log2_C_iter,log2_C_ISD,gv";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{}",
            self.params.p,
            self.params.w_e,
            self.params.w_y,
            self.params.w_c,
            self.b,
            self.j,
            self.w_bar,
            self.p_zero.log2_value,
            self.p_iter.log2_value,
            self.c_iter.log2_value,
            self.c_isd.log2_value,
            self.gv
        )
    }
}

/// Cumulative log-factorial table: ln_binom(n,k) = t[n]-t[k]-t[n-k].
struct LnFact {
    t: Vec<f64>,
}

impl LnFact {
    fn new(n_max: usize) -> Self {
        let mut t = vec![0.0; n_max + 1];
        for i in 1..=n_max {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        LnFact { t }
    }

    fn ln_binom(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.t[n] - self.t[k] - self.t[n - k]
    }

    fn log2_binom(&self, n: usize, k: usize) -> f64 {
        self.ln_binom(n, k) / std::f64::consts::LN_2
    }
}

/// Exact C(n,k) for arguments small enough for u128.
fn binom_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 1..=k {
        out = out * (n - k + i) as u128 / i as u128;
    }
    out
}

fn log2_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 53 {
        return (v.iter_u64_digits().next().unwrap_or(0) as f64).log2();
    }
    let top: BigUint = v >> (bits - 53);
    (top.iter_u64_digits().next().unwrap() as f64).log2() + (bits - 53) as f64
}

/// Greatest d with sum_{i=0..d} C(n-1,i) < 2^(n-k): the ball-volume weight
/// threshold below which a random-code syndrome decoding solution is
/// expected to be unique. Exact big-integer partial sums.
pub fn gv_distance(n: usize, k: usize) -> usize {
    assert!(k > 0 && k < n, "need 0 < k < n, got n = {n}, k = {k}");
    let limit = BigUint::from(1u32) << (n - k);
    let mut sum = BigUint::from(1u32);
    let mut term = BigUint::from(1u32);
    for j in 1..n {
        term = term * (n - j) / j;
        sum += &term;
        if sum >= limit {
            return j - 1;
        }
    }
    n - 1
}

/// Hypergeometric term C(p,w0)·C(p,w-w0)/C(2p,w); zero out of range.
fn hypergeometric(p: usize, w: usize, w0: usize, lf: &LnFact) -> f64 {
    if w0 > w {
        return 0.0;
    }
    (lf.ln_binom(p, w0) + lf.ln_binom(p, w - w0) - lf.ln_binom(2 * p, w)).exp()
}

/// Probability that e splits its w_e ones as (w0_e, w_e - w0_e) across the
/// two components and y splits as (w0_y, w_y - w0_y); out-of-range splits
/// have probability zero.
pub fn partition_probability(
    params: &ParameterSet,
    w0_e: usize,
    w0_y: usize,
) -> ProbabilityValue {
    let lf = LnFact::new(2 * params.p);
    ProbabilityValue::from_linear(
        hypergeometric(params.p, params.w_e, w0_e, &lf)
            * hypergeometric(params.p, params.w_y, w0_y, &lf),
    )
}

fn rho_parity_linear(w_c: usize, w_e_i: usize, p: usize) -> f64 {
    // Probability that w_c - 1 independent random weight-w_e_i polynomials
    // sum to zero at a fixed position: the even terms of Binomial(w_c-1, x).
    let x = w_e_i as f64 / p as f64;
    let mut total = 0.0;
    for j in (0..w_c).step_by(2) {
        total += binom_u128(w_c - 1, j) as f64 * x.powi(j as i32) * (1.0 - x).powi((w_c - 1 - j) as i32);
    }
    total
}

/// Probability that the challenge-aligned shift of z_i agrees with e_i at a
/// position touched only by the other w_c - 1 shifts.
pub fn rho_parity(params: &ParameterSet, w_e_i: usize) -> ProbabilityValue {
    assert!(w_e_i <= params.p);
    ProbabilityValue::from_linear(rho_parity_linear(params.w_c, w_e_i, params.p))
}

fn mix_null(rho: f64, w_y_i: usize, p: usize) -> f64 {
    let q = w_y_i as f64 / p as f64;
    (1.0 - rho) * q + rho * (1.0 - q)
}

/// Per-position probability that one shifted-z_i coefficient matches the
/// corresponding e_i coefficient: the parity term perturbed by y_i.
pub fn rho_null(params: &ParameterSet, w_e_i: usize, w_y_i: usize) -> ProbabilityValue {
    assert!(w_e_i <= params.p && w_y_i <= params.p);
    ProbabilityValue::from_linear(mix_null(
        rho_parity_linear(params.w_c, w_e_i, params.p),
        w_y_i,
        params.p,
    ))
}

fn tail_from(w_c: usize, b: usize, r: f64) -> f64 {
    let mut total = 0.0;
    for j in b..=w_c {
        total += binom_u128(w_c, j) as f64 * r.powi(j as i32) * (1.0 - r).powi((w_c - j) as i32);
    }
    total
}

/// Probability that a set coefficient of e_i survives thresholding: at
/// least b of the w_c lifted counts hit, each with rate rho_null.
pub fn rho_set(params: &ParameterSet, rho_null: ProbabilityValue, b: usize) -> ProbabilityValue {
    assert!((1..=params.w_c).contains(&b), "threshold b = {b} outside [1, w_c]");
    ProbabilityValue::from_linear(tail_from(params.w_c, b, rho_null.linear()))
}

/// Probability that a null coefficient of e_i is wrongly declared set.
pub fn rho_negset(params: &ParameterSet, rho_null: ProbabilityValue, b: usize) -> ProbabilityValue {
    assert!((1..=params.w_c).contains(&b), "threshold b = {b} outside [1, w_c]");
    ProbabilityValue::from_linear(tail_from(params.w_c, b, 1.0 - rho_null.linear()))
}

/// Binomial(n, rho) pmf over k = 0..len-1, with saturation handled exactly.
fn binom_pmf(n: usize, rho: f64, len: usize, lf: &LnFact) -> Vec<f64> {
    let mut out = vec![0.0; len];
    if len == 0 {
        return out;
    }
    if rho <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if rho >= 1.0 {
        if n < len {
            out[n] = 1.0;
        }
        return out;
    }
    let lr = rho.ln();
    let l1mr = (-rho).ln_1p();
    for (k, o) in out.iter_mut().enumerate().take(n + 1) {
        *o = (lf.ln_binom(n, k) + k as f64 * lr + (n - k) as f64 * l1mr).exp();
    }
    out
}

/// pdf of wt(e*_i) given the per-coefficient keep/corrupt rates: weight
/// delta_i = (missed set positions) + (false positives).
fn component_pdf_from(
    rset: f64,
    rneg: f64,
    w_e_i: usize,
    p: usize,
    delta_max: usize,
    lf: &LnFact,
) -> Vec<f64> {
    let kept = binom_pmf(w_e_i, rset, w_e_i + 1, lf);
    let nulls = p - w_e_i;
    let false_pos = binom_pmf(nulls, rneg, delta_max.min(nulls) + 1, lf);
    let mut out = vec![0.0; delta_max + 1];
    for (d, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (u, &a) in kept.iter().enumerate() {
            let missed = w_e_i - u;
            if missed > d {
                continue;
            }
            if let Some(&fp) = false_pos.get(d - missed) {
                s += a * fp;
            }
        }
        *o = s;
    }
    out
}

fn component_pdf_truncated(
    params: &ParameterSet,
    w_e_i: usize,
    w_y_i: usize,
    b: usize,
    delta_max: usize,
    lf: &LnFact,
) -> Vec<f64> {
    let rnull = mix_null(rho_parity_linear(params.w_c, w_e_i, params.p), w_y_i, params.p);
    let rset = tail_from(params.w_c, b, rnull);
    let rneg = tail_from(params.w_c, b, 1.0 - rnull);
    component_pdf_from(rset, rneg, w_e_i, params.p, delta_max, lf)
}

/// pdf of wt(e*_i) for one fixed component split (w_e_i, w_y_i) at
/// threshold b, truncated at min(p, DEFAULT_DELTA_MAX).
pub fn component_weight_pdf(
    params: &ParameterSet,
    w_e_i: usize,
    w_y_i: usize,
    b: usize,
) -> WeightDistribution {
    assert!(w_e_i <= params.p && w_y_i <= params.p, "component weights exceed p");
    assert!((1..=params.w_c).contains(&b), "threshold b = {b} outside [1, w_c]");
    let delta_max = params.p.min(DEFAULT_DELTA_MAX);
    let lf = LnFact::new(params.p);
    WeightDistribution::from_masses(component_pdf_truncated(
        params, w_e_i, w_y_i, b, delta_max, &lf,
    ))
}

/// pdf of the full residual weight wt(e*) = wt(e*_0) + wt(e*_1): component
/// pdfs convolved over all weight partitions, truncated at delta_max with
/// the lost mass reported as tail.
pub fn weight_pdf(params: &ParameterSet, b: usize, delta_max: usize) -> WeightDistribution {
    assert!((1..=params.w_c).contains(&b), "threshold b = {b} outside [1, w_c]");
    let lf = LnFact::new(2 * params.p);
    let dmax_c = delta_max.min(params.p);
    let he: Vec<f64> =
        (0..=params.w_e).map(|k| hypergeometric(params.p, params.w_e, k, &lf)).collect();
    let hy: Vec<f64> =
        (0..=params.w_y).map(|k| hypergeometric(params.p, params.w_y, k, &lf)).collect();

    let mut cache: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
    let mut out = vec![0.0; delta_max + 1];
    for ke in 0..=params.w_e {
        if he[ke] == 0.0 {
            continue;
        }
        for ky in 0..=params.w_y {
            let pp = he[ke] * hy[ky];
            if pp < PARTITION_PRUNE {
                continue;
            }
            let k0 = (ke, ky);
            let k1 = (params.w_e - ke, params.w_y - ky);
            for key in [k0, k1] {
                if !cache.contains_key(&key) {
                    let pdf = component_pdf_truncated(params, key.0, key.1, b, dmax_c, &lf);
                    cache.insert(key, pdf);
                }
            }
            let c0 = &cache[&k0];
            let c1 = &cache[&k1];
            for (d0, &m0) in c0.iter().enumerate().take(delta_max + 1) {
                if m0 == 0.0 {
                    continue;
                }
                for (d1, &m1) in c1.iter().enumerate().take(delta_max + 1 - d0) {
                    out[d0 + d1] += pp * m0 * m1;
                }
            }
        }
    }
    WeightDistribution::from_masses(out)
}

/// Exact per-iteration work p^3 + sum_{l<=j} C(p,l), as log2 of the big
/// integer: elimination plus the enumerated patterns.
pub fn isd_iteration_cost(p: usize, j: usize) -> ProbabilityValue {
    let mut total = BigUint::from(p).pow(3);
    let mut term = BigUint::from(1u32);
    total += &term;
    for l in 1..=j {
        term = term * (p - l + 1) / l;
        total += &term;
    }
    ProbabilityValue::from_log2(log2_biguint(&total))
}

/// Success probability of one Lee-Brickell iteration against the residual
/// pdf; the delta = 0 mass is excluded (that case never reaches ISD).
fn p_iter_from(pdf: &WeightDistribution, p: usize, j: usize, w_bar: usize, lf: &LnFact) -> f64 {
    let mut total = 0.0;
    for delta in 1..=w_bar.min(pdf.delta_max()) {
        let m = pdf.mass(delta);
        if m == 0.0 {
            continue;
        }
        let mut covered = 0.0;
        for l in 0..=j.min(delta) {
            covered += (lf.log2_binom(delta, l) + lf.log2_binom(2 * p - delta, p - l)
                - lf.log2_binom(2 * p, p))
            .exp2();
        }
        total += m * covered;
    }
    total
}

/// Probability that a single ISD iteration finds the residual: the weight
/// pdf weighted by the chance that at most j of delta errors fall inside
/// the selected information set.
pub fn isd_success_prob(
    params: &ParameterSet,
    b: usize,
    j: usize,
    w_bar: usize,
) -> ProbabilityValue {
    assert!(w_bar >= 1, "w_bar must be at least 1");
    let pdf = weight_pdf(params, b, DEFAULT_DELTA_MAX.max(w_bar));
    let lf = LnFact::new(2 * params.p);
    ProbabilityValue::from_linear(p_iter_from(&pdf, params.p, j, w_bar, &lf))
}

fn build_report(params: &ParameterSet, b: usize, j: usize, w_bar: usize) -> SecurityReport {
    let pdf = weight_pdf(params, b, DEFAULT_DELTA_MAX.max(w_bar));
    let lf = LnFact::new(2 * params.p);
    let p_iter = p_iter_from(&pdf, params.p, j, w_bar, &lf);
    let c_iter = isd_iteration_cost(params.p, j);
    SecurityReport {
        params: *params,
        b,
        j,
        w_bar,
        p_zero: ProbabilityValue::from_linear(pdf.mass(0)),
        p_iter: ProbabilityValue::from_linear(p_iter),
        c_iter,
        c_isd: ProbabilityValue::from_log2(c_iter.log2_value - p_iter.log2()),
        gv: gv_distance(2 * params.p, params.p),
    }
}

/// Expected ISD cost C_iter / P_iter for one parameter set and threshold.
pub fn isd_expected_cost(
    params: &ParameterSet,
    b: usize,
    j: usize,
    w_bar: usize,
) -> Result<SecurityReport, Error> {
    assert!(w_bar >= 1, "w_bar must be at least 1");
    let report = build_report(params, b, j, w_bar);
    if report.p_iter.linear() <= 0.0 {
        return Err(Error::UndefinedCost(format!(
            "P_iter = 0 at b = {b}: no residual weight <= {w_bar} is reachable"
        )));
    }
    Ok(report)
}

/// Picks the threshold minimizing the attacker's expected total cost
/// (1 - P{wt(e*)=0}) · C_ISD: with probability P{0} the estimate alone is
/// the key and ISD never runs. Ties break toward larger b.
pub fn select_threshold(params: &ParameterSet, j: usize, w_bar: usize) -> (usize, SecurityReport) {
    let mut best: Option<(f64, usize, SecurityReport)> = None;
    for b in 1..=params.w_c {
        let report = build_report(params, b, j, w_bar);
        let p0 = report.p_zero.linear();
        let cost = if p0 >= 1.0 {
            f64::NEG_INFINITY
        } else if report.p_iter.linear() <= 0.0 {
            f64::INFINITY
        } else {
            (1.0 - p0).log2() + report.c_isd.log2_value
        };
        if best.as_ref().is_none_or(|(c, _, _)| cost <= *c) {
            best = Some((cost, b, report));
        }
    }
    let (_, b, report) = best.expect("w_c >= 1 guarantees a candidate");
    (b, report)
}
