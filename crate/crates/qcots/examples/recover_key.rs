//! Full key recovery from a single signature: threshold the aligned shifts
//! of z to get e', then close the low-weight gap with Lee-Brickell.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qcots::attack::{recover_key, AttackConfig};
use qcots::isd::IsdConfig;
use qcots::scheme::{keygen, sign, ParameterSet};

fn main() {
    let params = ParameterSet::new(257, 20, 20, 5, 7).expect("valid parameters");
    let mut rng = ChaCha20Rng::seed_from_u64(1);

    let (sk, vk) = keygen(&params, &mut rng);
    let sig = sign(b"the one signature we get to see", &sk, &params, &mut rng);

    let cfg = AttackConfig {
        b: 4,
        w_bar: 40,
        isd: IsdConfig { j: 2, max_iterations: 5_000, rng_seed: 99 },
    };
    let outcome = recover_key(&sig, &vk, &params, &cfg).expect("valid threshold");

    println!(
        "estimate weight {} (true secret weight {})",
        outcome.estimate.weight(),
        params.w_e
    );
    match outcome.residual_weight {
        Some(delta) => println!(
            "ISD closed a residual of weight {delta} in {} iterations",
            outcome.isd_iterations
        ),
        None => println!("ISD gave up after {} iterations", outcome.isd_iterations),
    }

    assert!(outcome.success, "this seed recovers the key");
    let recovered = outcome.recovered_key.expect("present on success");
    assert_eq!(recovered, sk.e);
    println!("recovered key is bit-identical to the planted one");
}
