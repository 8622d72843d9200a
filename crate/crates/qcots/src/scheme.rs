//! The quasi-cyclic one-time signature scheme: key generation, signing,
//! verification, the syndrome map synd_h, and the fixed-weight hash.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake128;

use crate::ring::{sample_fixed_weight, RingElement, RingPair};
use crate::Error;

/// Scheme parameters. The public polynomial h(x) is derived from `h_seed`,
/// so a parameter set pins the whole public context.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ParameterSet {
    pub p: usize,
    pub w_e: usize,
    pub w_y: usize,
    pub w_c: usize,
    #[serde(default)]
    pub h_seed: u64,
}

impl ParameterSet {
    pub fn new(p: usize, w_e: usize, w_y: usize, w_c: usize, h_seed: u64) -> Result<Self, Error> {
        let params = ParameterSet { p, w_e, w_y, w_c, h_seed };
        params.validate()?;
        Ok(params)
    }

    /// Checks the sparsity constraints: each weight < p/2, w_c >= 1, and the
    /// verification bound w_c*w_e + w_y <= 2p.
    pub fn validate(&self) -> Result<(), Error> {
        if self.p < 2 {
            return Err(Error::Parameter(format!("p = {} is too small", self.p)));
        }
        for (name, w) in [("w_e", self.w_e), ("w_y", self.w_y), ("w_c", self.w_c)] {
            if 2 * w >= self.p {
                return Err(Error::Parameter(format!(
                    "{name} = {w} is not < p/2 (p = {})",
                    self.p
                )));
            }
        }
        if self.w_c == 0 {
            return Err(Error::Parameter("w_c must be at least 1".into()));
        }
        if self.w_c * self.w_e + self.w_y > 2 * self.p {
            return Err(Error::Parameter(format!(
                "w_c*w_e + w_y = {} exceeds 2p = {}",
                self.w_c * self.w_e + self.w_y,
                2 * self.p
            )));
        }
        Ok(())
    }

    /// Maximum weight of an honest z: w_c*w_e + w_y.
    pub fn z_weight_bound(&self) -> usize {
        self.w_c * self.w_e + self.w_y
    }

    /// The public polynomial for this parameter set.
    pub fn h(&self) -> RingElement {
        derive_h(self.p, self.h_seed)
    }
}

/// The secret e(x) in R^2, total weight w_e.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SigningKey {
    pub e: RingPair,
}

/// The public syndrome s_e(x) = synd_h(e).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VerificationKey {
    pub s_e: RingElement,
}

/// A signature {c(x), z(x)}: weight-w_c challenge and response pair.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Signature {
    pub c: RingElement,
    pub z: RingPair,
}

/// Pseudo-random dense public polynomial, deterministic in (p, h_seed);
/// every coefficient is an unbiased bit of the output stream.
pub fn derive_h(p: usize, h_seed: u64) -> RingElement {
    let mut xof = Shake128::default();
    xof.update(b"qcots.h/1");
    xof.update(&(p as u64).to_le_bytes());
    xof.update(&h_seed.to_le_bytes());
    let mut reader = xof.finalize_xof();
    let mut bytes = vec![0u8; p.div_ceil(8)];
    reader.read(&mut bytes);
    let mut words = vec![0u64; p.div_ceil(64)];
    for (i, &b) in bytes.iter().enumerate() {
        words[i / 8] |= (b as u64) << (8 * (i % 8));
    }
    RingElement::from_words(p, words)
}

/// The syndrome map a(x) -> a_0(x) + a_1(x) h(x); linear over R^2.
pub fn synd_h(a: &RingPair, h: &RingElement) -> RingElement {
    assert_eq!(a.p(), h.p(), "mismatched moduli {} vs {}", a.p(), h.p());
    &a.a0 + &(&a.a1 * h)
}

/// Deterministic hash onto weight-delta polynomials: an extendable-output
/// stream is parsed as 32-bit integers and rejection-sampled into delta
/// distinct indices in [0, p-1].
pub fn hash_to_weight(input: &[u8], p: usize, delta: usize) -> RingElement {
    assert!(delta <= p, "target weight {delta} exceeds p = {p}");
    let mut xof = Shake128::default();
    xof.update(b"qcots.hw/1");
    xof.update(&(p as u64).to_le_bytes());
    xof.update(&(delta as u64).to_le_bytes());
    xof.update(input);
    let mut reader = xof.finalize_xof();

    // accept v < zone so v % p is exactly uniform
    let zone = ((1u64 << 32) / p as u64) * p as u64;
    let mut out = RingElement::zero(p);
    let mut picked = 0usize;
    let mut buf = [0u8; 4];
    while picked < delta {
        reader.read(&mut buf);
        let v = u32::from_le_bytes(buf) as u64;
        if v >= zone {
            continue;
        }
        let j = (v % p as u64) as usize;
        if !out.get(j) {
            out.set(j);
            picked += 1;
        }
    }
    out
}

/// Draws e <- D_{2p,w_e} and publishes its syndrome.
pub fn keygen(params: &ParameterSet, rng: &mut impl Rng) -> (SigningKey, VerificationKey) {
    let e = RingPair::sample(params.p, params.w_e, rng);
    let s_e = synd_h(&e, &params.h());
    (SigningKey { e }, VerificationKey { s_e })
}

/// Signs with a caller-supplied ephemeral y; the deterministic core of
/// `sign`, also used by tests that need y pinned.
pub fn sign_with_ephemeral(
    m: &[u8],
    sk: &SigningKey,
    params: &ParameterSet,
    y: &RingPair,
) -> Signature {
    let h = params.h();
    let s_y = synd_h(y, &h);
    let mut input = m.to_vec();
    input.extend_from_slice(&s_y.to_bytes());
    let c = hash_to_weight(&input, params.p, params.w_c);
    let z = sk.e.scale(&c).add(y);
    Signature { c, z }
}

/// One-time signing: fresh y <- D_{2p,w_y}, c = H_{w_c}(m ‖ synd_h(y)),
/// z = c·e + y.
pub fn sign(m: &[u8], sk: &SigningKey, params: &ParameterSet, rng: &mut impl Rng) -> Signature {
    let y = RingPair::from_flat_support(
        params.p,
        &sample_fixed_weight(2 * params.p, params.w_y, rng),
    );
    sign_with_ephemeral(m, sk, params, &y)
}

/// Accepts iff wt(z) <= w_c*w_e + w_y and the recomputed challenge matches:
/// H_{w_c}(m ‖ (c·s_e + synd_h(z))) == c. For honest signatures the hash
/// input equals synd_h(y) by linearity.
pub fn verify(m: &[u8], vk: &VerificationKey, sig: &Signature, params: &ParameterSet) -> bool {
    if sig.z.weight() > params.z_weight_bound() {
        return false;
    }
    let h = params.h();
    let v = &(&sig.c * &vk.s_e) + &synd_h(&sig.z, &h);
    let mut input = m.to_vec();
    input.extend_from_slice(&v.to_bytes());
    hash_to_weight(&input, params.p, params.w_c) == sig.c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn tiny() -> ParameterSet {
        ParameterSet::new(13, 2, 2, 2, 5).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(ParameterSet::new(3072, 85, 85, 7, 0).is_ok());
        assert!(ParameterSet::new(13, 7, 2, 2, 0).is_err()); // w_e >= p/2
        assert!(ParameterSet::new(13, 2, 2, 0, 0).is_err()); // empty challenge
        assert!(ParameterSet::new(1, 0, 0, 1, 0).is_err());
    }

    #[test]
    fn derive_h_is_deterministic_and_seed_sensitive() {
        let a = derive_h(257, 1);
        assert_eq!(a, derive_h(257, 1));
        assert_ne!(a, derive_h(257, 2));
    }

    #[test]
    fn derive_h_density_is_binomial() {
        // Total weight over 100 seeds ~ Binomial(100*p, 1/2).
        let p = 257;
        let total: usize = (0..100u64).map(|s| derive_h(p, s).weight()).sum();
        let n = 100.0 * p as f64;
        let sigma = (n * 0.25).sqrt();
        assert!(
            (total as f64 - n / 2.0).abs() <= 3.0 * sigma,
            "total weight {total} vs {} ± {:.0}",
            n / 2.0,
            3.0 * sigma
        );
    }

    #[test]
    fn synd_h_degenerate_inputs() {
        let h = derive_h(13, 9);
        assert!(synd_h(&RingPair::zero(13), &h).is_zero());
        let a0 = RingElement::from_support(13, &[1, 4]);
        let pair = RingPair::new(a0.clone(), RingElement::zero(13));
        assert_eq!(synd_h(&pair, &h), a0);
        let a1 = RingElement::from_support(13, &[2, 6]);
        let pair = RingPair::new(RingElement::zero(13), a1.clone());
        assert_eq!(synd_h(&pair, &RingElement::monomial(13, 0)), a1);
    }

    #[test]
    fn hash_to_weight_contract() {
        let a = hash_to_weight(b"abc", 97, 5);
        assert_eq!(a, hash_to_weight(b"abc", 97, 5));
        assert_eq!(a.weight(), 5);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let msg: [u8; 8] = rng.random();
            assert_eq!(hash_to_weight(&msg, 61, 4).weight(), 4);
        }
    }

    #[test]
    fn hash_to_weight_bit_flip_sensitivity() {
        // No collision among single-bit perturbations over 1000 trials.
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let mut msg: [u8; 16] = rng.random();
            let before = hash_to_weight(&msg, 3072, 7);
            let bit = rng.random_range(0..128usize);
            msg[bit / 8] ^= 1 << (bit % 8);
            assert_ne!(before, hash_to_weight(&msg, 3072, 7));
        }
    }

    #[test]
    fn keygen_postconditions() {
        let params = ParameterSet::new(3072, 85, 85, 7, 11).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (sk, vk) = keygen(&params, &mut rng);
        assert_eq!(sk.e.weight(), 85);
        assert_eq!(synd_h(&sk.e, &params.h()), vk.s_e);
    }

    #[test]
    fn sign_verify_round_trip() {
        let params = tiny();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (sk, vk) = keygen(&params, &mut rng);
        let sig = sign(b"hello", &sk, &params, &mut rng);
        assert_eq!(sig.c.weight(), params.w_c);
        assert!(sig.z.weight() <= params.z_weight_bound());
        assert!(verify(b"hello", &vk, &sig, &params));
        assert!(!verify(b"hellp", &vk, &sig, &params));
    }

    #[test]
    fn degenerate_single_shift_signature() {
        // With y = 0 and w_c = 1 the challenge is a monomial x^v, so
        // z = x^v · e component-wise.
        let params = ParameterSet::new(13, 2, 2, 1, 5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (sk, _) = keygen(&params, &mut rng);
        let sig = sign_with_ephemeral(b"m", &sk, &params, &RingPair::zero(13));
        let v = sig.c.support()[0] as i64;
        assert_eq!(sig.z.a0, sk.e.a0.cyclic_shift(v));
        assert_eq!(sig.z.a1, sk.e.a1.cyclic_shift(v));
    }

    #[test]
    fn oversized_z_is_rejected_before_hashing() {
        let params = tiny();
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let (sk, vk) = keygen(&params, &mut rng);
        let mut sig = sign(b"m", &sk, &params, &mut rng);
        // force wt(z) above the bound
        let mut j = 0;
        while sig.z.weight() <= params.z_weight_bound() {
            if !sig.z.a0.get(j) {
                sig.z.a0.set(j);
            }
            j += 1;
        }
        assert!(!verify(b"m", &vk, &sig, &params));
    }

    #[test]
    fn synd_h_matches_explicit_circulant_product() {
        // H = [I | C(h)] with C(h) column j = x^j h; H a^T must equal synd_h(a).
        let p = 29;
        let h = derive_h(p, 77);
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for _ in 0..50 {
            let w = rng.random_range(0..=2 * p);
            let a = RingPair::sample(p, w, &mut rng);
            let mut want = RingElement::zero(p);
            for j in 0..p {
                if a.a0.get(j) {
                    want.xor_assign(&RingElement::monomial(p, j));
                }
                if a.a1.get(j) {
                    want.xor_assign(&h.cyclic_shift(j as i64));
                }
            }
            assert_eq!(synd_h(&a, &h), want);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn completeness(seed in any::<u64>(), msg in proptest::collection::vec(any::<u8>(), 0..64)) {
            let params = tiny();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (sk, vk) = keygen(&params, &mut rng);
            let sig = sign(&msg, &sk, &params, &mut rng);
            prop_assert!(verify(&msg, &vk, &sig, &params));
        }

        #[test]
        fn linearity_identity(seed in any::<u64>()) {
            // c·s_e + synd_h(z) == synd_h(y) for honest signatures.
            let params = tiny();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (sk, vk) = keygen(&params, &mut rng);
            let h = params.h();
            let y = RingPair::sample(params.p, params.w_y, &mut rng);
            let sig = sign_with_ephemeral(b"m", &sk, &params, &y);
            let lhs = &(&sig.c * &vk.s_e) + &synd_h(&sig.z, &h);
            prop_assert_eq!(lhs, synd_h(&y, &h));
        }

        #[test]
        fn syndrome_linearity(seed in any::<u64>()) {
            let params = tiny();
            let h = params.h();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let a = RingPair::sample(13, 5, &mut rng);
            let b = RingPair::sample(13, 4, &mut rng);
            prop_assert_eq!(
                synd_h(&a.add(&b), &h),
                &synd_h(&a, &h) + &synd_h(&b, &h)
            );
        }
    }
}
