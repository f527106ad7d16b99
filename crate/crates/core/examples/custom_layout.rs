//! Load an electrode layout from JSON, probe the RF field above it and
//! compare against its mirror image.
//!
//!     cargo run --example custom_layout -- examples/data/explicit_five_wire.json

use surftrap::field::{rf_superposition, FieldPoint};
use surftrap::layout::parse_layout;
use surftrap::pseudo::{metrics, IonSpecies, RfDrive};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/asymmetric_40_400_160.json").into());
    let layout = parse_layout(&std::fs::read_to_string(&path)?)?;
    for e in layout.electrodes() {
        println!("{:<10} {:?} x [{:8.1}, {:8.1}] z [{:9.1}, {:9.1}]", e.name, e.role, e.x_lo, e.x_hi, e.z_lo, e.z_hi);
    }

    let rf = rf_superposition(&layout)?;
    println!("\nunit RF potential along x at y = 80 um");
    for i in -4..=4 {
        let x = 25.0 * i as f64;
        let p = FieldPoint::new(x, 80.0, 0.0)?;
        let g = rf.gradient(&p)?;
        println!("  x {x:6.1}  phi {:.5}  |E| {:.3e} /um", rf.potential(&p)?, g.norm());
    }

    let drive = RfDrive::new(100.0, 22.0);
    let ion = IonSpecies::yb171();
    let m = metrics(&layout, &drive, &ion)?;
    let mm = metrics(&layout.mirrored_x(), &drive, &ion)?;
    println!("\n          h_um     x0_um   alpha  depth_eV");
    println!("layout  {:7.2}  {:8.3}  {:6.2}  {:.4}", m.h_um, m.x0_um, m.alpha_signed_deg, m.depth_ev);
    println!("mirror  {:7.2}  {:8.3}  {:6.2}  {:.4}", mm.h_um, mm.x0_um, mm.alpha_signed_deg, mm.depth_ev);
    Ok(())
}
