//! Runs every inequality scan and exact-tail check and prints the reports.

use probcert::verification::lemma_suite;

fn main() -> probcert::Result<()> {
    let reports = lemma_suite(7)?;
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} reports, {failed} failed", reports.len());
    Ok(())
}
