//! Exhaustive search of asymmetric five-wire traps at 100 V, 22 MHz,
//! keeping q = 0.300 +- 0.008, h = 80 +- 3 um and a 10-20 degree tilt, and
//! ranking the survivors by depth.

use surftrap::optimize::{search_asymmetric, AsymmetricSearchConfig};

fn main() -> surftrap::Result<()> {
    let search = search_asymmetric(&AsymmetricSearchConfig::default())?;
    println!("{} geometries, {} pass", search.rows.len(), search.ranked.len());
    for &i in search.ranked.iter().take(10) {
        let c = &search.rows[i];
        let m = c.metrics.unwrap();
        println!(
            "w_c = {:4}  w_r_down = {:4}  w_r_up = {:4}  h = {:6.2}  x0 = {:7.2}  alpha = {:5.2}  q = {:.4}  depth = {:.4} eV",
            c.spec.w_c, c.spec.w_r_down, c.spec.w_r_up, m.h_um, m.x0_um, m.alpha_deg, m.q, m.depth_ev
        );
    }
    Ok(())
}
