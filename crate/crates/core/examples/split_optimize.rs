//! Search over splitting-segment lengths (r0, r1, r2) for the narrowest
//! well separation once both wells are held at 0.05 eV.

use surftrap::optimize::{optimize_split, SplitConfig};

fn main() -> surftrap::Result<()> {
    let result = optimize_split(&SplitConfig::default())?;
    let mut rows: Vec<_> = result.rows.iter().filter(|c| c.l_um().is_some()).collect();
    rows.sort_by(|a, b| a.l_um().unwrap().total_cmp(&b.l_um().unwrap()));
    println!("{:>6} {:>6} {:>6} {:>8} {:>8} {:>10}", "r0", "r1", "r2", "u [V]", "l [um]", "l@10V");
    for c in rows.iter().take(10) {
        println!(
            "{:6} {:6} {:6} {:8.3} {:8.1} {:10.1}",
            c.spec.r0,
            c.spec.r1,
            c.spec.r2,
            c.u_v.unwrap(),
            c.l_um().unwrap(),
            c.l_at_u_max_um.unwrap_or(f64::NAN)
        );
    }
    let failed = result.rows.iter().filter(|c| c.failure.is_some()).count();
    println!("{} points, {} without a calibrated double well", result.rows.len(), failed);
    if let Some(best) = result.best() {
        println!("best: r0 = {}, r1 = {}, r2 = {} um", best.spec.r0, best.spec.r1, best.spec.r2);
    }
    Ok(())
}
