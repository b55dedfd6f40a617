//! Reruns both published results tables and prints the column diffs.

use fliess::harness::{reproduce_table, Table};

fn main() {
    let mut ok = true;
    for t in [Table::Lc, Table::Gc] {
        let report = reproduce_table(t);
        print!("{}", report.render());
        ok &= report.passed();
    }
    std::process::exit(if ok { 0 } else { 1 });
}
