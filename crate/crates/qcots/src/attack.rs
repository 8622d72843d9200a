//! Key recovery from a single signature: align the w_c cyclic shifts of z
//! with the challenge support, lift and sum them into integer counts,
//! threshold the counts into an estimate e', then close the gap e* = e + e'
//! with ISD on the residual syndrome.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::isd::{lee_brickell, IsdConfig, IsdResult, ParityCheck};
use crate::ring::{LiftedCounts, RingElement, RingPair};
use crate::scheme::{sign, synd_h, ParameterSet, Signature, SigningKey, VerificationKey};
use crate::Error;

#[derive(Clone, Copy, Debug)]
pub struct AttackConfig {
    /// Count threshold: position j enters e'_i iff at least b of the w_c
    /// aligned shifts have a one there.
    pub b: usize,
    pub w_bar: usize,
    pub isd: IsdConfig,
}

#[derive(Clone, Debug)]
pub struct AttackOutcome {
    pub success: bool,
    /// The validated secret key e, present only on success.
    pub recovered_key: Option<RingPair>,
    /// The thresholded estimate e'.
    pub estimate: RingPair,
    /// Weight of the recovered residual e*; None when ISD gave up.
    pub residual_weight: Option<usize>,
    pub used_isd: bool,
    pub isd_iterations: u64,
    pub isd_singular_resamples: u64,
    pub isd_patterns_tested: u64,
}

impl AttackOutcome {
    fn record_isd(&mut self, r: &IsdResult) {
        self.used_isd = true;
        self.isd_iterations = r.iterations_used;
        self.isd_singular_resamples = r.singular_resamples;
        self.isd_patterns_tested = r.patterns_tested;
    }
}

/// Estimate of the secret from one signature: d_i = sum over v in supp(c)
/// of lift(x^-v·z_i); position j of e'_i is set iff d_i[j] >= b. Accepts
/// b = w_c + 1 as the explicit vacuous threshold (e' = 0).
pub fn estimate_secret(
    sig: &Signature,
    params: &ParameterSet,
    b: usize,
) -> Result<(RingPair, [LiftedCounts; 2]), Error> {
    if !(1..=params.w_c + 1).contains(&b) {
        return Err(Error::Parameter(format!(
            "threshold b = {b} outside [1, {}]",
            params.w_c + 1
        )));
    }
    assert_eq!(sig.c.weight(), params.w_c, "challenge weight differs from w_c");
    let p = params.p;
    let mut d_hats = [LiftedCounts::zero(p), LiftedCounts::zero(p)];
    for &v in sig.c.support().iter() {
        d_hats[0].accumulate(&sig.z.a0.cyclic_shift(-(v as i64)));
        d_hats[1].accumulate(&sig.z.a1.cyclic_shift(-(v as i64)));
    }
    let estimate =
        RingPair::new(d_hats[0].threshold(b as u32), d_hats[1].threshold(b as u32));
    Ok((estimate, d_hats))
}

/// s* = s_e + synd_h(e'), which equals synd_h(e + e') by linearity: the
/// syndrome of the estimation error. Zero iff e' = e (up to code structure).
pub fn residual_syndrome(
    e_prime: &RingPair,
    vk: &VerificationKey,
    h: &RingElement,
) -> RingElement {
    &vk.s_e + &synd_h(e_prime, h)
}

/// Full recovery is claimed only when the candidate reproduces the public
/// syndrome, has the known secret weight, and re-signs a fresh message that
/// verifies under vk.
fn validate_key(
    e: &RingPair,
    vk: &VerificationKey,
    params: &ParameterSet,
    h: &RingElement,
) -> bool {
    if synd_h(e, h) != vk.s_e || e.weight() != params.w_e {
        return false;
    }
    let sk = SigningKey { e: e.clone() };
    let mut rng = ChaCha20Rng::seed_from_u64(0x7265_7369_676e);
    let m = b"key recovery validation probe";
    let probe = sign(m, &sk, params, &mut rng);
    crate::scheme::verify(m, vk, &probe, params)
}

/// The pipeline: estimate_secret, residual_syndrome, then (unless the
/// residual is already zero) Lee-Brickell with cap w_bar, finishing with
/// e = e' + e*. ISD exhaustion is a failure outcome, not an error.
pub fn recover_key(
    sig: &Signature,
    vk: &VerificationKey,
    params: &ParameterSet,
    cfg: &AttackConfig,
) -> Result<AttackOutcome, Error> {
    let (estimate, _) = estimate_secret(sig, params, cfg.b)?;
    let h = params.h();
    let s_star = residual_syndrome(&estimate, vk, &h);

    let mut outcome = AttackOutcome {
        success: false,
        recovered_key: None,
        estimate: estimate.clone(),
        residual_weight: None,
        used_isd: false,
        isd_iterations: 0,
        isd_singular_resamples: 0,
        isd_patterns_tested: 0,
    };

    if s_star.is_zero() {
        outcome.residual_weight = Some(0);
        if validate_key(&estimate, vk, params, &h) {
            outcome.success = true;
            outcome.recovered_key = Some(estimate);
        }
        return Ok(outcome);
    }

    let pc = ParityCheck::new(h.clone());
    let result = lee_brickell(&s_star, &pc, cfg.w_bar, &cfg.isd);
    outcome.record_isd(&result);
    let Some(e_star) = result.solution else {
        return Ok(outcome);
    };
    outcome.residual_weight = Some(e_star.weight());
    let candidate = estimate.add(&e_star);
    if validate_key(&candidate, vk, params, &h) {
        outcome.success = true;
        outcome.recovered_key = Some(candidate);
    }
    Ok(outcome)
}
