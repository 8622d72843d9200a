//! How the count threshold b trades estimator accuracy against ISD cost,
//! and where the expected-cost minimum lands.

use qcots::analysis::{isd_expected_cost, select_threshold};
use qcots::experiment::preset;

fn main() {
    let params = preset("table1-row1").expect("bundled").params;
    let (j, w_bar) = (2, 40);

    println!("b  log2 P(delta=0)  log2 C_ISD  log2 expected cost");
    for b in 1..=params.w_c {
        match isd_expected_cost(&params, b, j, w_bar) {
            Ok(report) => {
                let p0 = report.p_zero.linear();
                let expected = (1.0 - p0).log2() + report.c_isd.log2_value;
                println!(
                    "{b}  {:15.4}  {:10.4}  {:18.4}",
                    report.p_zero.log2_value, report.c_isd.log2_value, expected
                );
            }
            Err(err) => println!("{b}  ({err})"),
        }
    }

    let (best, report) = select_threshold(&params, j, w_bar);
    println!(
        "chosen b = {best}: P(exact) = 2^{:.2}, C_ISD = 2^{:.2}",
        report.p_zero.log2_value, report.c_isd.log2_value
    );
}
