//! Metrics of the asymmetric five-wire trap (w_c = 40, RF 400 / 160 µm)
//! driven at 100 V, 22 MHz with 171Yb+.

use surftrap::layout::{make_asymmetric, AsymmetricSpec, DEFAULT_AXIAL_LENGTH};
use surftrap::pseudo::{metrics, IonSpecies, RfDrive};

fn main() -> surftrap::Result<()> {
    let layout = make_asymmetric(&AsymmetricSpec::new(40.0, 400.0, 160.0), DEFAULT_AXIAL_LENGTH)?;
    let m = metrics(&layout, &RfDrive::new(100.0, 22.0), &IonSpecies::yb171())?;
    println!("ion height h      {:8.2} um", m.h_um);
    println!("lateral offset x0 {:8.2} um", m.x0_um);
    println!("secular freqs     {:8.3} / {:.3} MHz", m.f_sec_mhz[0], m.f_sec_mhz[1]);
    println!("stability q       {:8.4}", m.q);
    println!("tilt alpha        {:8.2} deg", m.alpha_deg);
    println!("depth             {:8.4} eV", m.depth_ev);
    println!("escape point      ({:.1}, {:.1}) um", m.escape.x, m.escape.y);
    println!("efficiency        {:8.4}", m.efficiency);
    Ok(())
}
