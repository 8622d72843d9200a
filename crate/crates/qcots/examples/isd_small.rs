//! Lee-Brickell on a planted instance small enough to cross-check against
//! exhaustive search.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qcots::isd::{brute_force_sdp, lee_brickell, IsdConfig, ParityCheck};
use qcots::ring::RingPair;
use qcots::scheme::{derive_h, synd_h};

fn main() {
    let p = 13;
    let h = derive_h(p, 3);
    let pc = ParityCheck::new(h.clone());

    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let planted = RingPair::sample(p, 3, &mut rng);
    let s = synd_h(&planted, &h);
    println!("planted support: {:?} | {:?}", planted.a0.support(), planted.a1.support());

    let cfg = IsdConfig { j: 2, max_iterations: 500, rng_seed: 21 };
    let result = lee_brickell(&s, &pc, 3, &cfg);
    assert!(result.success);
    let found = result.solution.expect("present on success");
    println!(
        "Lee-Brickell found weight {} in {} iterations ({} patterns)",
        found.weight(),
        result.iterations_used,
        result.patterns_tested
    );

    let all = brute_force_sdp(&s, &pc, 3).expect("tiny instance");
    println!("exhaustive search finds {} solution(s) of weight <= 3", all.len());
    assert!(all.contains(&found));
    println!("the ISD solution is one of them");
}
