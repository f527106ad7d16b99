//! Axial potential along the trap and double-well analysis for chain
//! splitting.
//!
//! Profiles are cut along `z` at the transverse position `(x0, h)` of the
//! radial RF minimum. The static part is linear in the electrode voltages, so
//! an [`AxialBasis`] stores one unit-voltage profile per DC electrode and
//! recombines them for any assignment without touching the field code again.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{patch_potential, DcAssignment, FieldPoint};
use crate::layout::{split_segment_name, ElectrodeLayout, Role};
use crate::pseudo::{locate_minimum, IonSpecies, RfDrive, TrapPotential};
use crate::{Error, Result};

/// Default half-window of axial profiles, µm.
pub const DEFAULT_HALF_WINDOW: f64 = 2500.0;
/// Default profile sample count (1 µm spacing over the default window).
pub const DEFAULT_SAMPLES: usize = 5001;
/// Extrema shallower than this are treated as numerical noise, eV.
pub const PROMINENCE_EV: f64 = 1e-9;
/// Resolution of the single/double-well transition voltage, V.
pub const TRANSITION_TOL_V: f64 = 0.01;
pub const CALIBRATION_TOL_V: f64 = 1e-3;
pub const CALIBRATION_TOL_EV: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxialProfile {
    pub z_um: Vec<f64>,
    pub energy_ev: Vec<f64>,
}

impl AxialProfile {
    pub fn len(&self) -> usize {
        self.z_um.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_um.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("z_um,energy_eV\n");
        for (z, e) in self.z_um.iter().zip(&self.energy_ev) {
            writeln!(out, "{z},{e}").expect("write to string");
        }
        out
    }
}

fn sample_grid(z_range: (f64, f64), n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidSpec(format!("profile needs at least 2 samples (got {n})")));
    }
    let (lo, hi) = z_range;
    if !(hi > lo) {
        return Err(Error::InvalidSpec(format!("empty z range [{lo}, {hi}]")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

/// Unit-voltage axial profiles of every DC electrode plus the pseudopotential
/// along the same line.
#[derive(Clone, Debug)]
pub struct AxialBasis {
    pub x0_um: f64,
    pub h_um: f64,
    pub z_um: Vec<f64>,
    pub pseudo_ev: Vec<f64>,
    unit: BTreeMap<String, Vec<f64>>,
    charge: f64,
}

impl AxialBasis {
    pub fn new(
        layout: &ElectrodeLayout,
        drive: &RfDrive,
        ion: &IonSpecies,
        z_range: (f64, f64),
        n: usize,
    ) -> Result<Self> {
        let z = sample_grid(z_range, n)?;
        let trap = TrapPotential::new(layout, drive, ion)?;
        let min = locate_minimum(&trap, layout, None).map_err(|e| Error::RadialMinimum(e.to_string()))?;
        let at = |z: f64| FieldPoint { x: min.x, y: min.y, z };
        let pseudo_ev = z.iter().map(|&z| trap.pseudo(&at(z))).collect::<Result<Vec<_>>>()?;
        let unit = layout
            .with_role(Role::Dc)
            .map(|e| {
                let profile = z.iter().map(|&z| patch_potential(e, &at(z))).collect::<Result<Vec<_>>>()?;
                Ok((e.name.clone(), profile))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self {
            x0_um: min.x,
            h_um: min.y,
            z_um: z,
            pseudo_ev,
            unit,
            charge: ion.charge,
        })
    }

    pub fn electrodes(&self) -> impl Iterator<Item = &str> {
        self.unit.keys().map(String::as_str)
    }

    pub fn profile(&self, volts: &DcAssignment) -> Result<AxialProfile> {
        let mut energy = self.pseudo_ev.clone();
        for (name, v) in volts.iter() {
            if v == 0.0 {
                continue;
            }
            let unit = self.unit.get(name).ok_or_else(|| Error::UnknownElectrode(name.to_string()))?;
            let k = self.charge * v;
            for (e, u) in energy.iter_mut().zip(unit) {
                *e += k * u;
            }
        }
        Ok(AxialProfile {
            z_um: self.z_um.clone(),
            energy_ev: energy,
        })
    }
}

/// Total energy `Q Φ_dc + Ψ` along `z` at the radial RF minimum.
pub fn axial_profile(
    layout: &ElectrodeLayout,
    volts: &DcAssignment,
    drive: &RfDrive,
    ion: &IonSpecies,
    z_range: (f64, f64),
    n: usize,
) -> Result<AxialProfile> {
    AxialBasis::new(layout, drive, ion, z_range, n)?.profile(volts)
}

/// Slow reference: at every `z` the ion is re-minimized in the transverse
/// plane under the combined RF and static potential.
pub fn axial_profile_reminimized(
    layout: &ElectrodeLayout,
    volts: &DcAssignment,
    drive: &RfDrive,
    ion: &IonSpecies,
    z_range: (f64, f64),
    n: usize,
) -> Result<AxialProfile> {
    let z = sample_grid(z_range, n)?;
    let trap = TrapPotential::new(layout, drive, ion)?.with_dc(layout, volts)?;
    let pseudo_only = TrapPotential::new(layout, drive, ion)?;
    let start = locate_minimum(&pseudo_only, layout, None).map_err(|e| Error::RadialMinimum(e.to_string()))?;
    let energy = z
        .par_iter()
        .map(|&z| {
            let seed = FieldPoint { z, ..start };
            let p = locate_minimum(&trap, layout, Some(seed)).map_err(|e| Error::RadialMinimum(e.to_string()))?;
            trap.energy(&p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AxialProfile { z_um: z, energy_ev: energy })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Topology {
    SingleWell,
    DoubleWell,
    /// More than two wells survive the prominence filter.
    MultiWell,
    Unbound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub topology: Topology,
    pub minima_z_um: Vec<f64>,
    pub minima_ev: Vec<f64>,
    pub well_depths_ev: Vec<f64>,
    /// Central barrier between the two wells of a double well.
    pub barrier_z_um: Option<f64>,
    /// Barrier maximum above the higher of the two well minima, eV.
    pub barrier_height_ev: Option<f64>,
    pub l_um: Option<f64>,
    /// Largest |dE/dz| between the two minima, eV/µm.
    pub barrier_max_slope_ev_per_um: Option<f64>,
}

impl SplitMetrics {
    fn unbound() -> Self {
        Self {
            topology: Topology::Unbound,
            minima_z_um: Vec::new(),
            minima_ev: Vec::new(),
            well_depths_ev: Vec::new(),
            barrier_z_um: None,
            barrier_height_ev: None,
            l_um: None,
            barrier_max_slope_ev_per_um: None,
        }
    }

    /// Depth of the shallower well, 0 when there is none.
    pub fn min_well_depth(&self) -> f64 {
        self.well_depths_ev.iter().copied().reduce(f64::min).unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug)]
struct Extremum {
    kind: Kind,
    index: usize,
    z: f64,
    e: f64,
}

/// Parabola through three equally spaced samples centred on `i`.
fn refine(z: &[f64], e: &[f64], i: usize) -> (f64, f64) {
    let (a, b, c) = (e[i - 1], e[i], e[i + 1]);
    let curv = a - 2.0 * b + c;
    if curv == 0.0 {
        return (z[i], b);
    }
    let d = (0.5 * (a - c) / curv).clamp(-1.0, 1.0);
    (z[i] + d * (z[i + 1] - z[i]), b - 0.25 * (a - c) * d)
}

/// Alternating interior extrema with persistence pairs below the prominence
/// dropped.
fn extrema(z: &[f64], e: &[f64]) -> Vec<Extremum> {
    let mut out: Vec<Extremum> = Vec::new();
    for i in 1..e.len() - 1 {
        let kind = if e[i] < e[i - 1] && e[i] <= e[i + 1] {
            Kind::Min
        } else if e[i] > e[i - 1] && e[i] >= e[i + 1] {
            Kind::Max
        } else {
            continue;
        };
        let (zr, er) = refine(z, e, i);
        let x = Extremum { kind, index: i, z: zr, e: er };
        match out.last_mut() {
            Some(last) if last.kind == kind => {
                let better = match kind {
                    Kind::Min => er < last.e,
                    Kind::Max => er > last.e,
                };
                if better {
                    *last = x;
                }
            }
            _ => out.push(x),
        }
    }
    loop {
        let weakest = out
            .windows(2)
            .enumerate()
            .map(|(k, w)| (k, (w[0].e - w[1].e).abs()))
            .filter(|&(_, d)| d < PROMINENCE_EV)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let Some((k, _)) = weakest else {
            break;
        };
        out.drain(k..k + 2);
        // removing a pair can leave two neighbours of the same kind
        let mut merged: Vec<Extremum> = Vec::with_capacity(out.len());
        for x in out.drain(..) {
            match merged.last_mut() {
                Some(last) if last.kind == x.kind => {
                    let better = match x.kind {
                        Kind::Min => x.e < last.e,
                        Kind::Max => x.e > last.e,
                    };
                    if better {
                        *last = x;
                    }
                }
                _ => merged.push(x),
            }
        }
        out = merged;
    }
    out
}

/// Locate wells and the barrier between them. A well's depth is the lower of
/// its two bounding maxima (the profile end stands in where there is none)
/// minus the well minimum.
pub fn analyze_wells(profile: &AxialProfile) -> Result<SplitMetrics> {
    let (z, e) = (&profile.z_um, &profile.energy_ev);
    if z.len() < 3 || z.len() != e.len() {
        return Err(Error::InvalidSpec(format!("profile needs at least 3 samples (got {})", z.len())));
    }
    let ext = extrema(z, e);
    let minima: Vec<usize> = (0..ext.len()).filter(|&k| ext[k].kind == Kind::Min).collect();
    if minima.is_empty() {
        return Ok(SplitMetrics::unbound());
    }
    let (first, last) = (e[0], e[e.len() - 1]);
    let depths: Vec<f64> = minima
        .iter()
        .map(|&k| {
            let left = if k > 0 { ext[k - 1].e } else { first };
            let right = if k + 1 < ext.len() { ext[k + 1].e } else { last };
            (left.min(right) - ext[k].e).max(0.0)
        })
        .collect();
    let topology = match minima.len() {
        1 => Topology::SingleWell,
        2 => Topology::DoubleWell,
        _ => Topology::MultiWell,
    };
    let mut m = SplitMetrics {
        topology,
        minima_z_um: minima.iter().map(|&k| ext[k].z).collect(),
        minima_ev: minima.iter().map(|&k| ext[k].e).collect(),
        well_depths_ev: depths,
        barrier_z_um: None,
        barrier_height_ev: None,
        l_um: None,
        barrier_max_slope_ev_per_um: None,
    };
    if topology == Topology::DoubleWell {
        let (a, b) = (ext[minima[0]], ext[minima[1]]);
        let bar = ext[minima[0] + 1];
        let slope = (a.index..b.index)
            .map(|i| ((e[i + 1] - e[i]) / (z[i + 1] - z[i])).abs())
            .fold(0.0, f64::max);
        m.barrier_z_um = Some(bar.z);
        m.barrier_height_ev = Some(bar.e - a.e.max(b.e));
        m.l_um = Some(b.z - a.z);
        m.barrier_max_slope_ev_per_um = Some(slope);
    }
    Ok(m)
}

/// Static voltages of the splitting sequence: `+10 V` on the middle pairs,
/// `-10 V` on the locking pairs and `u` on the separation pair.
pub fn splitting_voltages(u: f64) -> DcAssignment {
    let mut v = DcAssignment::new();
    for up in [true, false] {
        for positive in [true, false] {
            v.set(split_segment_name("mid", positive, up), 10.0);
            v.set(split_segment_name("lock", positive, up), -10.0);
        }
        v.set(split_segment_name("sep", true, up), u);
    }
    v
}

pub fn separation_electrodes() -> Vec<String> {
    vec![split_segment_name("sep", true, true), split_segment_name("sep", true, false)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampSpec {
    pub u_start: f64,
    pub u_end: f64,
    pub steps: usize,
    /// Electrodes that carry the ramped voltage.
    #[serde(default = "separation_electrodes")]
    pub electrodes: Vec<String>,
}

impl RampSpec {
    pub fn new(u_start: f64, u_end: f64, steps: usize) -> Self {
        Self {
            u_start,
            u_end,
            steps,
            electrodes: separation_electrodes(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 || !self.u_start.is_finite() || !self.u_end.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "ramp needs finite ends and at least 2 steps (got {} steps)",
                self.steps
            )));
        }
        Ok(())
    }

    pub fn voltages(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|i| self.u_start + (self.u_end - self.u_start) * i as f64 / n as f64)
            .collect()
    }
}

impl Default for RampSpec {
    fn default() -> Self {
        Self::new(-5.0, 10.0, 16)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampStep {
    pub u_v: f64,
    pub metrics: SplitMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampResult {
    pub steps: Vec<RampStep>,
    /// Number of single-to-double-well flips between consecutive steps.
    pub transitions: usize,
    /// Bisected voltage of the first such flip.
    pub transition_u_v: Option<f64>,
}

/// Evaluates ramps from a precomputed basis.
#[derive(Clone, Debug)]
pub struct SplitSolver {
    pub basis: AxialBasis,
    pub base: DcAssignment,
    pub electrodes: Vec<String>,
}

impl SplitSolver {
    pub fn new(basis: AxialBasis, base: DcAssignment, electrodes: Vec<String>) -> Result<Self> {
        for name in base.iter().map(|(n, _)| n).chain(electrodes.iter().map(String::as_str)) {
            if !basis.unit.contains_key(name) {
                return Err(Error::UnknownElectrode(name.to_string()));
            }
        }
        Ok(Self { basis, base, electrodes })
    }

    pub fn volts(&self, u: f64) -> DcAssignment {
        let mut v = self.base.clone();
        for name in &self.electrodes {
            v.set(name.clone(), u);
        }
        v
    }

    pub fn profile(&self, u: f64) -> Result<AxialProfile> {
        self.basis.profile(&self.volts(u))
    }

    pub fn metrics(&self, u: f64) -> Result<SplitMetrics> {
        analyze_wells(&self.profile(u)?)
    }

    fn is_double(&self, u: f64) -> Result<bool> {
        Ok(self.metrics(u)?.topology == Topology::DoubleWell)
    }

    /// Smallest `u` in `[lo, hi]` with a double well, assuming `lo` is not
    /// and `hi` is, to within `tol`.
    fn bisect_transition(&self, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.is_double(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    pub fn ramp(&self, ramp: &RampSpec) -> Result<RampResult> {
        ramp.validate()?;
        let us = ramp.voltages();
        let metrics = us.par_iter().map(|&u| self.metrics(u)).collect::<Result<Vec<_>>>()?;
        let mut transitions = 0;
        let mut transition_u = None;
        for k in 1..us.len() {
            let flip = metrics[k - 1].topology == Topology::SingleWell && metrics[k].topology == Topology::DoubleWell;
            if flip {
                transitions += 1;
                if transition_u.is_none() {
                    transition_u = Some(self.bisect_transition(us[k - 1], us[k], TRANSITION_TOL_V)?);
                }
            }
        }
        Ok(RampResult {
            steps: us
                .into_iter()
                .zip(metrics)
                .map(|(u_v, metrics)| RampStep { u_v, metrics })
                .collect(),
            transitions,
            transition_u_v: transition_u,
        })
    }

    /// Voltage at which the shallower well of the double well reaches
    /// `target` eV, searched between the transition and `u_max`.
    pub fn calibrate(&self, target: f64, u_min: f64, u_max: f64) -> Result<(f64, SplitMetrics)> {
        if !(target >= 0.0) {
            return Err(Error::InvalidSpec(format!("target depth must be >= 0 (got {target})")));
        }
        let unreachable = || Error::DepthUnreachable {
            target,
            lo: u_min,
            hi: u_max,
        };
        let top = self.metrics(u_max)?;
        if top.topology != Topology::DoubleWell || top.min_well_depth() < target {
            return Err(unreachable());
        }
        // scan down for the last voltage that is not a double well
        let coarse = 0.25;
        let mut lo = u_max;
        loop {
            let next = (lo - coarse).max(u_min);
            if !self.is_double(next)? {
                lo = next;
                break;
            }
            if next <= u_min {
                lo = u_min;
                break;
            }
            lo = next;
        }
        let u_t = if self.is_double(lo)? { lo } else { self.bisect_transition(lo, lo + coarse, CALIBRATION_TOL_V * 0.1)? };
        let at_t = self.metrics(u_t)?;
        if at_t.min_well_depth() >= target {
            return Ok((u_t, at_t));
        }
        let depth = |u: f64| -> Result<(f64, SplitMetrics)> {
            let m = self.metrics(u)?;
            let d = if m.topology == Topology::DoubleWell { m.min_well_depth() } else { -1.0 };
            Ok((d, m))
        };
        let (mut a, mut b) = (u_t, u_max);
        let mut best = depth(b)?;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let (d, m) = depth(mid)?;
            if d >= target {
                b = mid;
                best = (d, m);
            } else {
                a = mid;
            }
            if b - a < CALIBRATION_TOL_V && best.0 - target < CALIBRATION_TOL_EV {
                break;
            }
        }
        Ok((b, best.1))
    }
}

pub fn ramp_evolution(
    layout: &ElectrodeLayout,
    base_volts: &DcAssignment,
    ramp: &RampSpec,
    drive: &RfDrive,
    ion: &IonSpecies,
) -> Result<RampResult> {
    ramp.validate()?;
    let basis = AxialBasis::new(
        layout,
        drive,
        ion,
        (-DEFAULT_HALF_WINDOW, DEFAULT_HALF_WINDOW),
        DEFAULT_SAMPLES,
    )?;
    SplitSolver::new(basis, base_volts.clone(), ramp.electrodes.clone())?.ramp(ramp)
}

/// Separation voltage that fixes the shallower well depth at `target_depth`,
/// searched on `[-5 V, 10 V]` above the single/double transition.
pub fn calibrate_depth(
    layout: &ElectrodeLayout,
    base_volts: &DcAssignment,
    drive: &RfDrive,
    ion: &IonSpecies,
    target_depth: f64,
) -> Result<(f64, SplitMetrics)> {
    let basis = AxialBasis::new(
        layout,
        drive,
        ion,
        (-DEFAULT_HALF_WINDOW, DEFAULT_HALF_WINDOW),
        DEFAULT_SAMPLES,
    )?;
    let ramp = RampSpec::default();
    SplitSolver::new(basis, base_volts.clone(), ramp.electrodes)?.calibrate(target_depth, ramp.u_start, ramp.u_end)
}
