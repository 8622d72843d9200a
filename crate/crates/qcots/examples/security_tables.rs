//! Closed-form attack-cost reports for the nine bundled instances.

use qcots::experiment::{analyze_sets, bundled_requests, reports_csv};

fn main() {
    let rows = analyze_sets(&bundled_requests(), 2, 40);
    print!("{}", reports_csv(&rows));
}
