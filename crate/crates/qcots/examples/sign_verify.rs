//! Keygen, sign, verify, and the two rejection paths.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qcots::scheme::{keygen, sign, verify, ParameterSet};

fn main() {
    let params = ParameterSet::new(257, 20, 20, 5, 7).expect("valid parameters");
    let mut rng = ChaCha20Rng::seed_from_u64(42);

    let (sk, vk) = keygen(&params, &mut rng);
    println!("secret weight {}, syndrome weight {}", sk.e.weight(), vk.s_e.weight());

    let m = b"one-time means one time";
    let sig = sign(m, &sk, &params, &mut rng);
    println!(
        "signature: wt(c) = {}, wt(z) = {} (bound {})",
        sig.c.weight(),
        sig.z.weight(),
        params.z_weight_bound()
    );

    assert!(verify(m, &vk, &sig, &params));
    println!("honest signature accepts");

    assert!(!verify(b"a different message", &vk, &sig, &params));
    println!("wrong message rejects");

    let mut tampered = sig.clone();
    tampered.z.a0.xor_assign(&qcots::ring::RingElement::monomial(params.p, 3));
    assert!(!verify(m, &vk, &tampered, &params));
    println!("flipped response bit rejects");
}
