//! Monte Carlo check of the residual-weight distribution: empirical
//! histogram from keygen/sign/estimate trials vs the closed-form pdf.

use qcots::experiment::{preset, simulate, SimulationSpec};

fn main() {
    let pre = preset("table1-row1").expect("bundled");
    let spec = SimulationSpec {
        params: pre.params,
        trials: 1000,
        b: pre.b,
        seed: 2024,
        threads: 0,
    };
    let (_, summary) = simulate(&spec).expect("valid spec");

    println!("p = {}, b = {}, {} trials", pre.params.p, pre.b, spec.trials);
    println!("delta  empirical  theoretical");
    for &(delta, emp, theo) in summary.histogram.iter().take(16) {
        if emp > 0.0 || theo > 1e-4 {
            println!("{delta:5}  {emp:9.4}  {theo:11.4}");
        }
    }
    println!("total variation = {:.4}", summary.total_variation);
}
