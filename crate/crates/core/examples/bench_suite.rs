use rcising::exact::{run_oracle_suite, EnumCaps};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let reports = run_oracle_suite(&EnumCaps::battery(), &[0.2, 0.5, 1.0]);
    let mut pass = 0;
    let mut fail = 0;
    let mut skip = 0;
    for r in &reports {
        match r.status {
            rcising::exact::checks::CheckStatus::Pass => pass += 1,
            rcising::exact::checks::CheckStatus::Fail => {
                fail += 1;
                println!("FAIL {}", r.csv_row());
            }
            rcising::exact::checks::CheckStatus::Skipped(_) => skip += 1,
        }
    }
    println!("pass {pass} fail {fail} skip {skip} in {:.1?}", t0.elapsed());
}
