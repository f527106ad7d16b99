//! Width sweep of the symmetric five-wire trap at 100 V for 20, 22 and
//! 24 MHz. Prints the q-window candidates near h = 80 um and the deepest
//! of them at 22 MHz.

use surftrap::optimize::{sweep_symmetric, SymmetricSweepConfig};

fn main() -> surftrap::Result<()> {
    let sweep = sweep_symmetric(&SymmetricSweepConfig::default())?;
    println!("{} rows, {} contour points", sweep.rows.len(), sweep.contour.len());
    for c in sweep.rows.iter().filter(|c| c.passes) {
        let m = c.metrics.unwrap();
        println!(
            "f = {:4} MHz  w_c = {:5}  w_r = {:5}  h = {:6.2}  q = {:.4}  depth = {:.4} eV",
            c.drive.frequency_mhz, c.spec.w_c, c.spec.w_r_up, m.h_um, m.q, m.depth_ev
        );
    }
    for f in [20.0, 22.0, 24.0] {
        if let Some(best) = sweep.best_height(f) {
            let m = best.metrics.unwrap();
            println!(
                "best h at {f} MHz: w_c = {}, w_r = {}, h = {:.2} um, depth = {:.4} eV",
                best.spec.w_c, best.spec.w_r_up, m.h_um, m.depth_ev
            );
        }
    }
    Ok(())
}
