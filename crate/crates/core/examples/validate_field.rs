//! Cross-check the closed-form patch potential against direct numerical
//! integration, and run the built-in consistency checks.

use surftrap::field::{patch_potential, FieldPoint};
use surftrap::layout::{RectElectrode, Role};
use surftrap::oracle::{quadrature_potential, run_all};

fn main() -> surftrap::Result<()> {
    let rect = RectElectrode::new("pad", (-60.0, 90.0), (-200.0, 150.0), Role::Dc)?;
    println!("{:>8} {:>8} {:>8} {:>14} {:>14} {:>9}", "x", "y", "z", "closed form", "quadrature", "rel err");
    for &(x, y, z) in &[(0.0, 80.0, 0.0), (-60.0, 5.0, 10.0), (200.0, 40.0, -300.0), (15.0, 500.0, 75.0)] {
        let exact = patch_potential(&rect, &FieldPoint::new(x, y, z)?)?;
        let quad = quadrature_potential(&rect, x, y, z, 1e-10);
        println!("{x:8.1} {y:8.1} {z:8.1} {exact:14.10} {quad:14.10} {:9.2e}", (exact - quad).abs() / exact.abs());
    }
    println!();
    for c in run_all(1)? {
        println!("{:<40} {} worst {:.3e} (limit {:.1e}, n = {})", c.name, if c.passed { "pass" } else { "FAIL" }, c.worst, c.limit, c.samples);
    }
    Ok(())
}
