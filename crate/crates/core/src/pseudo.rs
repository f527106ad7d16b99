//! RF pseudopotential: trapping minimum, secular frequencies, stability
//! parameter, depth and principal-axis tilt.
//!
//! For an RF drive `V cos(Ωt)` on the RF electrodes the time-averaged
//! potential energy of an ion of charge `Q` and mass `m` is
//! `Ψ = Q² V² |∇φ_rf|² / (4 m Ω²)`, with `φ_rf` the unit-voltage RF basis.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::field::{dc_superposition, rf_superposition, DcAssignment, FieldPoint, Superposition};
use crate::layout::{ElectrodeLayout, Role};
use crate::{Error, Result};

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const YB171_MASS_AMU: f64 = 170.936;

/// Gradient norm accepted as a stationary point, eV/µm.
pub const GRADIENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    pub mass_amu: f64,
    pub charge: f64,
}

impl IonSpecies {
    pub fn new(mass_amu: f64, charge: f64) -> Result<Self> {
        if !(mass_amu > 0.0 && mass_amu.is_finite()) || !(charge >= 1.0 && charge.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "ion needs mass > 0 and charge >= 1 (got {mass_amu} u, {charge} e)"
            )));
        }
        Ok(Self { mass_amu, charge })
    }

    pub fn yb171() -> Self {
        Self {
            mass_amu: YB171_MASS_AMU,
            charge: 1.0,
        }
    }

    pub fn mass_kg(&self) -> f64 {
        self.mass_amu * ATOMIC_MASS_UNIT
    }

    pub fn charge_coulomb(&self) -> f64 {
        self.charge * ELEMENTARY_CHARGE
    }
}

impl Default for IonSpecies {
    fn default() -> Self {
        Self::yb171()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfDrive {
    pub amplitude_v: f64,
    pub frequency_mhz: f64,
}

impl RfDrive {
    pub fn new(amplitude_v: f64, frequency_mhz: f64) -> Self {
        Self {
            amplitude_v,
            frequency_mhz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.amplitude_v > 0.0
            && self.frequency_mhz > 0.0
            && self.amplitude_v.is_finite()
            && self.frequency_mhz.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "RF drive needs V_rf > 0 and f_rf > 0 (got {} V, {} MHz)",
                self.amplitude_v, self.frequency_mhz
            )))
        }
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency_mhz * 1e6
    }
}

/// Energy of one ion in the RF pseudopotential plus an optional static
/// potential. All energies in eV, lengths in µm.
#[derive(Clone, Debug)]
pub struct TrapPotential {
    rf: Superposition,
    dc: Option<Superposition>,
    /// Ψ = kappa · |∇φ_rf|², eV·µm².
    kappa: f64,
    ion: IonSpecies,
    drive: RfDrive,
}

impl TrapPotential {
    pub fn new(layout: &ElectrodeLayout, drive: &RfDrive, ion: &IonSpecies) -> Result<Self> {
        drive.validate()?;
        let rf = rf_superposition(layout)?;
        let q = ion.charge_coulomb();
        let kappa = q * q * drive.amplitude_v.powi(2) * 1e12 / (4.0 * ion.mass_kg() * drive.omega().powi(2))
            / ELEMENTARY_CHARGE;
        Ok(Self {
            rf,
            dc: None,
            kappa,
            ion: *ion,
            drive: *drive,
        })
    }

    /// Adds the static potential of `volts` (charge × volts, in eV).
    pub fn with_dc(mut self, layout: &ElectrodeLayout, volts: &DcAssignment) -> Result<Self> {
        let dc = dc_superposition(layout, volts)?;
        self.dc = if dc.is_empty() { None } else { Some(dc) };
        Ok(self)
    }

    pub fn ion(&self) -> &IonSpecies {
        &self.ion
    }

    pub fn drive(&self) -> &RfDrive {
        &self.drive
    }

    /// Pseudopotential only, eV.
    pub fn pseudo(&self, p: &FieldPoint) -> Result<f64> {
        Ok(self.kappa * self.rf.gradient(p)?.norm_squared())
    }

    pub fn energy(&self, p: &FieldPoint) -> Result<f64> {
        let mut e = self.pseudo(p)?;
        if let Some(dc) = &self.dc {
            e += self.ion.charge * dc.potential(p)?;
        }
        Ok(e)
    }

    /// Energy, gradient (eV/µm) and Hessian (eV/µm²).
    pub fn derivs(&self, p: &FieldPoint) -> Result<(f64, Vector3<f64>, Matrix3<f64>)> {
        let d = self.rf.derivs(p)?;
        let g = d.gradient;
        let h = d.hessian;
        let mut value = self.kappa * g.norm_squared();
        let mut grad = 2.0 * self.kappa * h * g;
        let mut hess = h * h;
        for k in 0..3 {
            hess += d.third[k] * g[k];
        }
        hess *= 2.0 * self.kappa;
        if let Some(dc) = &self.dc {
            let s = dc.derivs(p)?;
            value += self.ion.charge * s.value;
            grad += self.ion.charge * s.gradient;
            hess += self.ion.charge * s.hessian;
        }
        Ok((value, grad, hess))
    }

    /// Hessian of the unit RF potential, per µm².
    pub fn rf_hessian(&self, p: &FieldPoint) -> Result<Matrix3<f64>> {
        Ok(self.rf.derivs(p)?.hessian)
    }

    fn radial(&self, p: &FieldPoint) -> Result<(f64, Vector2<f64>, Matrix2<f64>)> {
        let (v, g, h) = self.derivs(p)?;
        Ok((v, Vector2::new(g.x, g.y), h.fixed_view::<2, 2>(0, 0).into_owned()))
    }
}

fn at(x: f64, y: f64, z: f64) -> FieldPoint {
    FieldPoint { x, y, z }
}

const NEWTON_ITERATIONS: usize = 200;

/// Damped Newton descent on the radial (x, y) energy at fixed z. Indefinite
/// Hessians are shifted positive definite so every step is a descent step.
fn newton_minimize(trap: &TrapPotential, seed: &FieldPoint) -> Result<FieldPoint> {
    let mut p = *seed;
    let (mut value, mut g, mut h) = trap.radial(&p)?;
    for _ in 0..NEWTON_ITERATIONS {
        if g.norm() < GRADIENT_TOL {
            return Ok(p);
        }
        let eig = SymmetricEigen::new(h);
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max().abs().max(1e-300);
        let shifted = if lo > 1e-8 * hi { h } else { h + Matrix2::identity() * (1e-3 * hi - lo) };
        let mut step = -shifted.lu().solve(&g).unwrap_or(-g);
        let limit = 0.25 * p.y;
        if step.norm() > limit {
            step *= limit / step.norm();
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let q = at(p.x + t * step.x, p.y + t * step.y, p.z);
            if q.y > 0.0 {
                let (qv, qg, qh) = trap.radial(&q)?;
                if qv <= value + 1e-4 * t * g.dot(&step) || qg.norm() < GRADIENT_TOL {
                    p = q;
                    value = qv;
                    g = qg;
                    h = qh;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if g.norm() < GRADIENT_TOL {
        Ok(p)
    } else {
        Err(Error::NoConvergence {
            iterations: NEWTON_ITERATIONS,
            grad_norm: g.norm(),
        })
    }
}

/// Plain Newton on the radial gradient; converges to whatever stationary
/// point is nearby (used for saddles).
fn newton_stationary(trap: &TrapPotential, seed: &FieldPoint, max_step: f64) -> Result<FieldPoint> {
    let mut p = *seed;
    for _ in 0..NEWTON_ITERATIONS {
        let (_, g, h) = trap.radial(&p)?;
        if g.norm() < GRADIENT_TOL {
            return Ok(p);
        }
        let Some(mut step) = h.lu().solve(&(-g)) else {
            break;
        };
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        let mut q = at(p.x + step.x, p.y + step.y, p.z);
        if q.y <= 0.0 {
            q.y = 0.5 * p.y;
        }
        p = q;
    }
    let (_, g, _) = trap.radial(&p)?;
    Err(Error::NoConvergence {
        iterations: NEWTON_ITERATIONS,
        grad_norm: g.norm(),
    })
}

/// Lowest-energy grid cells that are local minima of a coarse scan.
fn grid_seeds(trap: &TrapPotential, layout: &ElectrodeLayout, z: f64) -> Result<Vec<FieldPoint>> {
    let rf: Vec<_> = layout.with_role(Role::Rf).collect();
    let lo = rf.iter().map(|e| e.x_lo).fold(f64::INFINITY, f64::min);
    let hi = rf.iter().map(|e| e.x_hi).fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let (nx, ny) = (49, 48);
    let ys: Vec<f64> = (0..ny).map(|j| span * (0.01 + 1.2 * j as f64 / (ny - 1) as f64)).collect();
    let xs: Vec<f64> = (0..nx).map(|i| lo + span * i as f64 / (nx - 1) as f64).collect();
    let mut grid = vec![0.0; nx * ny];
    for (j, &y) in ys.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            grid[j * nx + i] = trap.energy(&at(x, y, z))?;
        }
    }
    let mut seeds = Vec::new();
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let v = grid[j * nx + i];
            let is_min = (-1i64..=1).all(|dj| {
                (-1i64..=1).all(|di| {
                    (di == 0 && dj == 0) || v <= grid[(j as i64 + dj) as usize * nx + (i as i64 + di) as usize]
                })
            });
            if is_min {
                seeds.push((v, at(xs[i], ys[j], z)));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(seeds.into_iter().map(|s| s.1).collect())
}

/// Locate the radial trapping minimum at fixed `z`. With no seed, a coarse
/// scan over the RF region supplies candidates.
pub fn locate_minimum(trap: &TrapPotential, layout: &ElectrodeLayout, seed: Option<FieldPoint>) -> Result<FieldPoint> {
    let check = |p: FieldPoint| -> Result<FieldPoint> {
        let (_, _, h) = trap.radial(&p)?;
        let eig = SymmetricEigen::new(h);
        if eig.eigenvalues.min() > 0.0 {
            Ok(p)
        } else {
            Err(Error::Saddle { x: p.x, y: p.y })
        }
    };
    let mut first_err = None;
    if let Some(s) = seed {
        if s.y <= 0.0 {
            return Err(Error::BelowPlane(s.y));
        }
        match newton_minimize(trap, &s).and_then(check) {
            Ok(p) => return Ok(p),
            Err(e) => first_err = Some(e),
        }
    }
    let z = seed.map_or(0.0, |s| s.z);
    for s in grid_seeds(trap, layout, z)?.into_iter().take(5) {
        match newton_minimize(trap, &s).and_then(check) {
            Ok(p) => return Ok(p),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or(Error::NoConvergence {
        iterations: 0,
        grad_norm: f64::NAN,
    }))
}

/// [`locate_minimum`] for a layout and drive with the pseudopotential only.
pub fn find_minimum(
    layout: &ElectrodeLayout,
    drive: &RfDrive,
    ion: &IonSpecies,
    seed: &FieldPoint,
) -> Result<FieldPoint> {
    let trap = TrapPotential::new(layout, drive, ion)?;
    locate_minimum(&trap, layout, Some(*seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecularAnalysis {
    /// Radial secular frequencies, MHz, descending.
    pub f_sec_mhz: [f64; 2],
    /// Unit mode directions in the x-y plane matching `f_sec_mhz`.
    pub axes: [[f64; 2]; 2],
    /// Angle between the surface normal and the closest mode axis, degrees.
    pub alpha_deg: f64,
    /// Same angle, signed positive when that axis leans toward `+x`.
    pub alpha_signed_deg: f64,
    pub q: f64,
    pub efficiency: f64,
    /// True when the radial frequencies coincide and the mode axes were
    /// taken from the RF quadrupole eigenbasis.
    pub degenerate: bool,
}

const DEGENERACY_TOL: f64 = 1e-6;

/// Mode analysis at a verified minimum. Frequencies come from the
/// eigenvalues of the radial energy Hessian. At an RF nil that Hessian equals
/// `2κ H_rf²`, so it shares eigenvectors with the RF quadrupole `H_rf`; when
/// the two radial frequencies are degenerate (z-invariant strips with no
/// static field) the quadrupole eigenbasis fixes the axes.
pub fn analyze_secular(trap: &TrapPotential, min: &FieldPoint) -> Result<SecularAnalysis> {
    let (_, _, h) = trap.radial(min)?;
    let eig = SymmetricEigen::new(h);
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let mass = trap.ion.mass_kg();
    let freq = |lambda: f64| (lambda * ELEMENTARY_CHARGE * 1e12 / mass).sqrt() / (2.0 * PI) / 1e6;
    let (l0, l1) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let degenerate = (l0 - l1).abs() <= DEGENERACY_TOL * l0.abs().max(l1.abs());

    let vectors = if degenerate {
        let rf = trap.rf_hessian(min)?;
        SymmetricEigen::new(rf.fixed_view::<2, 2>(0, 0).into_owned()).eigenvectors
    } else {
        eig.eigenvectors
    };
    let mut modes: Vec<(f64, Vector2<f64>)> = (0..2)
        .map(|i| {
            let v: Vector2<f64> = vectors.column(i).into_owned().normalize();
            (freq(v.dot(&(h * v))), v)
        })
        .collect();
    modes.sort_by(|a, b| b.0.total_cmp(&a.0));

    let closest = modes
        .iter()
        .map(|m| m.1)
        .max_by(|a, b| a.y.abs().total_cmp(&b.y.abs()))
        .expect("two modes");
    let alpha = closest.y.abs().min(1.0).acos().to_degrees();
    let signed = alpha * (closest.x * closest.y).signum();

    let f1 = modes[0].0;
    let f_rf = trap.drive.frequency_mhz;
    let q = 2.0 * SQRT_2 * f1 / f_rf;
    let h_m = min.y * 1e-6;
    let efficiency = 2.0 * PI * f1 * 1e6 * SQRT_2 * mass * h_m * h_m * trap.drive.omega()
        / (trap.ion.charge_coulomb() * trap.drive.amplitude_v);

    Ok(SecularAnalysis {
        f_sec_mhz: [modes[0].0, modes[1].0],
        axes: [[modes[0].1.x, modes[0].1.y], [modes[1].1.x, modes[1].1.y]],
        alpha_deg: alpha,
        alpha_signed_deg: if alpha == 0.0 { 0.0 } else { signed },
        q,
        efficiency,
        degenerate,
    })
}

pub fn secular_analysis(
    layout: &ElectrodeLayout,
    drive: &RfDrive,
    ion: &IonSpecies,
    min: &FieldPoint,
) -> Result<SecularAnalysis> {
    analyze_secular(&TrapPotential::new(layout, drive, ion)?, min)
}

/// Number of rays in the basin-rim scan.
pub const DEPTH_RAYS: usize = 72;

#[derive(Clone, Copy, Debug)]
struct RayMax {
    value: f64,
    point: FieldPoint,
}

/// Walk outward along `dir` until the energy peaks; refine the peak by
/// golden-section search. `None` if the ray runs into the plane or never
/// peaks inside the window.
fn ray_peak(trap: &TrapPotential, min: &FieldPoint, dir: (f64, f64), step: f64, reach: f64) -> Result<Option<RayMax>> {
    let point = |s: f64| at(min.x + s * dir.0, min.y + s * dir.1, min.z);
    let floor = 0.02 * min.y;
    let mut prev = trap.energy(min)?;
    let mut s = 0.0;
    let mut rising = false;
    while s < reach {
        let next = s + step;
        let p = point(next);
        if p.y < floor {
            return Ok(None);
        }
        let v = trap.energy(&p)?;
        if v > prev {
            rising = true;
        } else if rising {
            // Peak in [s - step, next]
            let (mut a, mut b) = ((s - step).max(0.0), next);
            let r = 0.5 * (5f64.sqrt() - 1.0);
            let mut c = b - r * (b - a);
            let mut d = a + r * (b - a);
            let mut fc = trap.energy(&point(c))?;
            let mut fd = trap.energy(&point(d))?;
            for _ in 0..40 {
                if fc > fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - r * (b - a);
                    fc = trap.energy(&point(c))?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + r * (b - a);
                    fd = trap.energy(&point(d))?;
                }
            }
            let sm = 0.5 * (a + b);
            return Ok(Some(RayMax {
                value: trap.energy(&point(sm))?,
                point: point(sm),
            }));
        }
        prev = v;
        s = next;
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthResult {
    pub depth_ev: f64,
    pub escape: FieldPoint,
}

/// Trap depth as the height of the lowest saddle on the basin rim above the
/// minimum, found by a radial ray scan followed by Newton refinement.
pub fn locate_escape(trap: &TrapPotential, min: &FieldPoint) -> Result<DepthResult> {
    let e_min = trap.energy(min)?;
    let step = min.y / 25.0;
    let reach = 8.0 * min.y;
    let mut peaks = Vec::with_capacity(DEPTH_RAYS);
    for k in 0..DEPTH_RAYS {
        let theta = 2.0 * PI * k as f64 / DEPTH_RAYS as f64;
        if let Some(m) = ray_peak(trap, min, (theta.cos(), theta.sin()), step, reach)? {
            peaks.push(m);
        }
    }
    peaks.sort_by(|a, b| a.value.total_cmp(&b.value));
    for peak in peaks.iter().take(8) {
        let Ok(s) = newton_stationary(trap, &peak.point, 0.1 * min.y) else {
            continue;
        };
        let (value, _, h) = trap.radial(&s)?;
        let det = h.determinant();
        let near = (s.x - peak.point.x).hypot(s.y - peak.point.y) < 2.0 * min.y;
        // a rim saddle cannot sit above the ray maximum that bracketed it
        if det < 0.0 && near && value <= peak.value * (1.0 + 1e-9) + 1e-15 && value > e_min {
            return Ok(DepthResult {
                depth_ev: value - e_min,
                escape: s,
            });
        }
    }
    Err(Error::Unconfined)
}

pub fn trap_depth(layout: &ElectrodeLayout, drive: &RfDrive, ion: &IonSpecies, min: &FieldPoint) -> Result<DepthResult> {
    locate_escape(&TrapPotential::new(layout, drive, ion)?, min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapMetrics {
    pub x0_um: f64,
    pub h_um: f64,
    pub z_um: f64,
    pub psi_min_ev: f64,
    pub f_sec_mhz: [f64; 2],
    pub axes: [[f64; 2]; 2],
    pub alpha_deg: f64,
    pub alpha_signed_deg: f64,
    pub q: f64,
    pub depth_ev: f64,
    pub escape: FieldPoint,
    pub efficiency: f64,
    pub degenerate_modes: bool,
}

impl TrapMetrics {
    fn assemble(min: FieldPoint, psi_min: f64, sec: SecularAnalysis, depth: DepthResult) -> Self {
        Self {
            x0_um: min.x,
            h_um: min.y,
            z_um: min.z,
            psi_min_ev: psi_min,
            f_sec_mhz: sec.f_sec_mhz,
            axes: sec.axes,
            alpha_deg: sec.alpha_deg,
            alpha_signed_deg: sec.alpha_signed_deg,
            q: sec.q,
            depth_ev: depth.depth_ev,
            escape: depth.escape,
            efficiency: sec.efficiency,
            degenerate_modes: sec.degenerate,
        }
    }
}

/// Minimum, mode analysis and depth for an already-built potential.
pub fn evaluate(trap: &TrapPotential, layout: &ElectrodeLayout, seed: Option<FieldPoint>) -> Result<TrapMetrics> {
    let min = locate_minimum(trap, layout, seed)?;
    let sec = analyze_secular(trap, &min)?;
    let depth = locate_escape(trap, &min)?;
    Ok(TrapMetrics::assemble(min, trap.energy(&min)?, sec, depth))
}

pub fn metrics(layout: &ElectrodeLayout, drive: &RfDrive, ion: &IonSpecies) -> Result<TrapMetrics> {
    evaluate(&TrapPotential::new(layout, drive, ion)?, layout, None)
}

/// Which side of the trap the narrower RF electrode sits on: `-1` for `-x`,
/// `+1` for `+x`, `0` when the RF electrodes are equal or not a pair.
pub fn narrower_rf_side(layout: &ElectrodeLayout) -> i8 {
    let rf: Vec<_> = layout.with_role(Role::Rf).collect();
    if rf.len() != 2 {
        return 0;
    }
    let (a, b) = if rf[0].center().0 < rf[1].center().0 { (rf[0], rf[1]) } else { (rf[1], rf[0]) };
    match a.width().partial_cmp(&b.width()) {
        Some(std::cmp::Ordering::Less) => -1,
        Some(std::cmp::Ordering::Greater) => 1,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{make_asymmetric, make_symmetric, AsymmetricSpec, SymmetricSpec, DEFAULT_AXIAL_LENGTH};

    fn reference_radial() -> ElectrodeLayout {
        make_asymmetric(&AsymmetricSpec::new(40.0, 400.0, 160.0), DEFAULT_AXIAL_LENGTH).unwrap()
    }

    fn drive() -> RfDrive {
        RfDrive::new(100.0, 22.0)
    }

    #[test]
    fn pseudopotential_scales_with_drive() {
        let l = reference_radial();
        let ion = IonSpecies::yb171();
        let p = at(15.0, 60.0, 0.0);
        let base = TrapPotential::new(&l, &drive(), &ion).unwrap().pseudo(&p).unwrap();
        let v2 = TrapPotential::new(&l, &RfDrive::new(200.0, 22.0), &ion).unwrap().pseudo(&p).unwrap();
        let f2 = TrapPotential::new(&l, &RfDrive::new(100.0, 44.0), &ion).unwrap().pseudo(&p).unwrap();
        assert!(((v2 / base) - 4.0).abs() < 1e-12);
        assert!(((f2 / base) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn drive_and_ion_validation() {
        let l = reference_radial();
        assert!(TrapPotential::new(&l, &RfDrive::new(0.0, 22.0), &IonSpecies::yb171()).is_err());
        assert!(TrapPotential::new(&l, &RfDrive::new(100.0, -1.0), &IonSpecies::yb171()).is_err());
        assert!(IonSpecies::new(0.0, 1.0).is_err());
        assert!(IonSpecies::new(40.0, 0.5).is_err());
    }

    #[test]
    fn energy_derivatives_match_differences() {
        let trap = TrapPotential::new(&reference_radial(), &drive(), &IonSpecies::yb171()).unwrap();
        let p = at(-5.0, 130.0, 10.0);
        let (v, g, h) = trap.derivs(&p).unwrap();
        assert!((v - trap.energy(&p).unwrap()).abs() < 1e-15);
        let d = 1e-3;
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = d;
            let (_, gp, _) = trap.derivs(&p.offset(e)).unwrap();
            let (_, gm, _) = trap.derivs(&p.offset(-e)).unwrap();
            let fd = (gp - gm) / (2.0 * d);
            for i in 0..3 {
                assert!((h[(i, k)] - fd[i]).abs() < 1e-6 * h.abs().max(), "H[{i}{k}]");
            }
            let fv = (trap.energy(&p.offset(e)).unwrap() - trap.energy(&p.offset(-e)).unwrap()) / (2.0 * d);
            assert!((g[k] - fv).abs() < 1e-7 * g.norm().max(1e-12));
        }
    }

    #[test]
    fn symmetric_trap_pins_x0_and_alpha() {
        let l = make_symmetric(&SymmetricSpec::new(50.0, 150.0), DEFAULT_AXIAL_LENGTH).unwrap();
        let m = metrics(&l, &drive(), &IonSpecies::yb171()).unwrap();
        assert!(m.x0_um.abs() < 1e-9, "{}", m.x0_um);
        assert!(m.alpha_deg.abs() < 1e-6);
        assert!(m.psi_min_ev < 1e-9);
        // long strips: nil at sqrt(a b) for inner and outer edges a, b
        assert!((m.h_um - (31.0f64 * 181.0).sqrt()).abs() < 0.02, "{}", m.h_um);
        let long = make_symmetric(&SymmetricSpec::new(50.0, 150.0), 1e8).unwrap();
        let m = metrics(&long, &drive(), &IonSpecies::yb171()).unwrap();
        assert!((m.h_um - (31.0f64 * 181.0).sqrt()).abs() < 1e-6, "{}", m.h_um);
        assert!(m.efficiency > 0.15 && m.efficiency < 0.35, "{}", m.efficiency);
        assert!((m.q - 2.0 * SQRT_2 * m.f_sec_mhz[0] / 22.0).abs() < 1e-15);
    }

    #[test]
    fn minimum_from_explicit_seed() {
        let l = reference_radial();
        let p = find_minimum(&l, &drive(), &IonSpecies::yb171(), &at(0.0, 60.0, 0.0)).unwrap();
        let trap = TrapPotential::new(&l, &drive(), &IonSpecies::yb171()).unwrap();
        let (_, g, _) = trap.derivs(&p).unwrap();
        assert!(g.norm() < GRADIENT_TOL);
        assert!(find_minimum(&l, &drive(), &IonSpecies::yb171(), &FieldPoint { x: 0.0, y: -1.0, z: 0.0 }).is_err());
    }

    #[test]
    fn no_rf_is_an_error() {
        let l = make_symmetric(&SymmetricSpec::new(50.0, 150.0), DEFAULT_AXIAL_LENGTH).unwrap();
        let grounded: Vec<_> = l
            .electrodes()
            .iter()
            .cloned()
            .map(|mut e| {
                e.role = Role::Ground;
                e
            })
            .collect();
        let g = ElectrodeLayout::new(grounded, 6.0).unwrap();
        assert!(matches!(metrics(&g, &drive(), &IonSpecies::yb171()), Err(Error::NoRfElectrodes)));
    }

    #[test]
    fn narrower_side() {
        assert_eq!(narrower_rf_side(&reference_radial()), -1);
        let l = make_symmetric(&SymmetricSpec::new(50.0, 150.0), DEFAULT_AXIAL_LENGTH).unwrap();
        assert_eq!(narrower_rf_side(&l), 0);
    }

    #[test]
    fn q_from_secular_frequency() {
        // f_sec = q f_rf / (2√2) for q = 0.3 at 22 MHz
        let f = 0.3 * 22.0 / (2.0 * SQRT_2);
        assert!((f - 2.333_452).abs() < 1e-6);
    }
}
