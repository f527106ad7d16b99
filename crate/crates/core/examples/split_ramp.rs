//! Barrier ramp on the segmented splitting trap: the separation voltage
//! `u` goes from -5 V to 10 V with the middle pairs at +10 V and the locking
//! pairs at -10 V. Prints the well structure per step, the single to double
//! well transition and the voltage that leaves both wells 0.05 eV deep.

use surftrap::axial::{splitting_voltages, AxialBasis, RampSpec, SplitSolver, DEFAULT_HALF_WINDOW, DEFAULT_SAMPLES};
use surftrap::layout::{make_split, AsymmetricSpec, SplitSpec};
use surftrap::pseudo::{IonSpecies, RfDrive};

fn main() -> surftrap::Result<()> {
    let spec = SplitSpec::new(150.0, 300.0, 700.0, AsymmetricSpec::new(40.0, 400.0, 160.0));
    let layout = make_split(&spec)?;
    let basis = AxialBasis::new(
        &layout,
        &RfDrive::new(100.0, 22.0),
        &IonSpecies::yb171(),
        (-DEFAULT_HALF_WINDOW, DEFAULT_HALF_WINDOW),
        DEFAULT_SAMPLES,
    )?;
    let ramp = RampSpec::default();
    let solver = SplitSolver::new(basis, splitting_voltages(0.0), ramp.electrodes.clone())?;
    let result = solver.ramp(&ramp)?;
    println!("{:>7} {:>12} {:>9} {:>10}", "u [V]", "topology", "l [um]", "depth [eV]");
    for step in &result.steps {
        let m = &step.metrics;
        let l = m.l_um.map_or("-".into(), |l| format!("{l:.1}"));
        println!("{:7.2} {:>12} {:>9} {:10.4}", step.u_v, format!("{:?}", m.topology), l, m.min_well_depth());
    }
    match result.transition_u_v {
        Some(u) => println!("transition at u = {u:.2} V ({} flip(s))", result.transitions),
        None => println!("no transition inside the ramp"),
    }
    let (u, m) = solver.calibrate(0.05, ramp.u_start, ramp.u_end)?;
    println!("0.05 eV wells at u = {u:.3} V, l = {:.1} um", m.l_um.unwrap_or(f64::NAN));
    Ok(())
}
