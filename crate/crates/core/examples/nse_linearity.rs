//! Superposition failure of the Newton-Schrodinger flow for two lumps,
//! over a scan of the coupling.

use nslab::nse::TwoLumpScenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = TwoLumpScenario::default();
    println!("{:>8} {:>14}", "G", "violation");
    for g in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let v = TwoLumpScenario { g_newton: g, ..base.clone() }.violation()?;
        println!("{g:>8} {v:>14.6e}");
    }
    Ok(())
}
