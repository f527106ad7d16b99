//! Grid studies over electrode widths: the symmetric sweep, the
//! post-selected asymmetric search and the splitting-segment optimization.
//!
//! Grid points are independent; they are evaluated on the rayon pool and
//! collected in grid order, so tables do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axial::{
    separation_electrodes, splitting_voltages, AxialBasis, SplitMetrics, SplitSolver, Topology, DEFAULT_HALF_WINDOW,
    DEFAULT_SAMPLES,
};
use crate::layout::{
    make_asymmetric, make_split, AsymmetricSpec, SplitSpec, SymmetricSpec, DEFAULT_AXIAL_LENGTH, DEFAULT_GAP,
    DEFAULT_OUTER_WIDTH,
};
use crate::pseudo::{analyze_secular, evaluate, locate_minimum, IonSpecies, RfDrive, TrapMetrics, TrapPotential};
use crate::{Error, Result};

/// Inclusive range sampled at `steps` evenly spaced points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

#[derive(Deserialize)]
struct RawRange {
    lo: f64,
    hi: f64,
    steps: Option<usize>,
    step: Option<f64>,
}

impl<'de> Deserialize<'de> for Range {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRange::deserialize(d)?;
        let range = match (raw.steps, raw.step) {
            (Some(steps), None) => Range::new(raw.lo, raw.hi, steps),
            (None, Some(step)) => Range::by(raw.lo, raw.hi, step),
            _ => Err(Error::InvalidSpec("range needs exactly one of `steps` or `step`".into())),
        };
        range.map_err(serde::de::Error::custom)
    }
}

impl Range {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let r = Self { lo, hi, steps };
        r.validate()?;
        Ok(r)
    }

    /// Points spaced by `step`, both ends included.
    pub fn by(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidSpec(format!("range step must be > 0 (got {step})")));
        }
        Self::new(lo, hi, ((hi - lo) / step).round() as usize + 1)
    }

    pub fn single(v: f64) -> Self {
        Self { lo: v, hi: v, steps: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo <= self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidSpec(format!("range needs lo <= hi (got [{}, {}])", self.lo, self.hi)));
        }
        if self.steps == 0 {
            return Err(Error::EmptyGrid);
        }
        if self.steps == 1 && self.lo != self.hi {
            return Err(Error::InvalidSpec(format!(
                "a one-point range needs lo == hi (got [{}, {}])",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let n = (self.steps - 1) as f64;
        // round to 1e-9 so 30 + 10 k comes out exact
        (0..self.steps)
            .map(|i| {
                let v = self.lo + (self.hi - self.lo) * i as f64 / n;
                (v * 1e9).round() / 1e9
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionCriteria {
    pub q_target: f64,
    pub q_tol: f64,
    pub h_target_um: f64,
    pub h_tol_um: f64,
    /// Inclusive tilt window in degrees; `None` accepts any tilt.
    #[serde(default)]
    pub alpha_deg: Option<[f64; 2]>,
}

impl SelectionCriteria {
    /// q = 0.300 ± 0.008 and h = 80 ± 3 µm.
    pub fn symmetric() -> Self {
        Self {
            q_target: 0.3,
            q_tol: 0.008,
            h_target_um: 80.0,
            h_tol_um: 3.0,
            alpha_deg: None,
        }
    }

    /// The symmetric criteria plus a 10-20° tilt window.
    pub fn asymmetric() -> Self {
        Self {
            alpha_deg: Some([10.0, 20.0]),
            ..Self::symmetric()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_tol > 0.0 && self.h_tol_um > 0.0) {
            return Err(Error::InvalidSpec("selection tolerances must be > 0".into()));
        }
        if let Some([a, b]) = self.alpha_deg {
            if !(a <= b) {
                return Err(Error::InvalidSpec(format!("tilt window [{a}, {b}] is empty")));
            }
        }
        Ok(())
    }

    pub fn q_ok(&self, m: &TrapMetrics) -> bool {
        (m.q - self.q_target).abs() <= self.q_tol
    }

    pub fn h_ok(&self, m: &TrapMetrics) -> bool {
        (m.h_um - self.h_target_um).abs() <= self.h_tol_um
    }

    pub fn alpha_ok(&self, m: &TrapMetrics) -> bool {
        self.alpha_deg.is_none_or(|[a, b]| m.alpha_deg >= a && m.alpha_deg <= b)
    }

    pub fn accepts(&self, m: &TrapMetrics) -> bool {
        self.q_ok(m) && self.h_ok(m) && self.alpha_ok(m)
    }
}

/// One evaluated geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub spec: AsymmetricSpec,
    pub drive: RfDrive,
    pub metrics: Option<TrapMetrics>,
    pub failure: Option<String>,
    pub passes: bool,
}

impl Candidate {
    fn evaluate(spec: AsymmetricSpec, drive: RfDrive, ion: &IonSpecies, axial_length: f64, criteria: &SelectionCriteria) -> Self {
        let result = make_asymmetric(&spec, axial_length).and_then(|layout| {
            let trap = TrapPotential::new(&layout, &drive, ion)?;
            evaluate(&trap, &layout, None)
        });
        match result {
            Ok(m) => Self {
                spec,
                drive,
                passes: criteria.accepts(&m),
                metrics: Some(m),
                failure: None,
            },
            Err(e) => Self {
                spec,
                drive,
                metrics: None,
                failure: Some(e.to_string()),
                passes: false,
            },
        }
    }

    fn depth(&self) -> f64 {
        self.metrics.map_or(f64::NEG_INFINITY, |m| m.depth_ev)
    }
}

/// Flat CSV row for a [`Candidate`].
#[derive(Debug, Serialize)]
struct CandidateRow {
    w_c_um: f64,
    w_r_up_um: f64,
    w_r_down_um: f64,
    #[serde(rename = "V_rf_V")]
    v_rf_v: f64,
    #[serde(rename = "f_rf_MHz")]
    f_rf_mhz: f64,
    x0_um: Option<f64>,
    h_um: Option<f64>,
    #[serde(rename = "f_sec1_MHz")]
    f_sec1_mhz: Option<f64>,
    #[serde(rename = "f_sec2_MHz")]
    f_sec2_mhz: Option<f64>,
    q: Option<f64>,
    alpha_deg: Option<f64>,
    #[serde(rename = "depth_eV")]
    depth_ev: Option<f64>,
    efficiency: Option<f64>,
    passes: bool,
    failure: Option<String>,
}

impl From<&Candidate> for CandidateRow {
    fn from(c: &Candidate) -> Self {
        let m = c.metrics.as_ref();
        Self {
            w_c_um: c.spec.w_c,
            w_r_up_um: c.spec.w_r_up,
            w_r_down_um: c.spec.w_r_down,
            v_rf_v: c.drive.amplitude_v,
            f_rf_mhz: c.drive.frequency_mhz,
            x0_um: m.map(|m| m.x0_um),
            h_um: m.map(|m| m.h_um),
            f_sec1_mhz: m.map(|m| m.f_sec_mhz[0]),
            f_sec2_mhz: m.map(|m| m.f_sec_mhz[1]),
            q: m.map(|m| m.q),
            alpha_deg: m.map(|m| m.alpha_deg),
            depth_ev: m.map(|m| m.depth_ev),
            efficiency: m.map(|m| m.efficiency),
            passes: c.passes,
            failure: c.failure.clone(),
        }
    }
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidSpec(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn candidates_csv(rows: &[Candidate]) -> Result<String> {
    to_csv(rows.iter().map(CandidateRow::from))
}

/// Shared geometry and drive settings of the radial studies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadialSettings {
    pub v_rf: f64,
    pub gap: f64,
    pub outer_width: f64,
    pub axial_length: f64,
    pub ion: IonSpecies,
}

impl Default for RadialSettings {
    fn default() -> Self {
        Self {
            v_rf: 100.0,
            gap: DEFAULT_GAP,
            outer_width: DEFAULT_OUTER_WIDTH,
            axial_length: DEFAULT_AXIAL_LENGTH,
            ion: IonSpecies::yb171(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricGrid {
    pub w_c: Range,
    pub w_r: Range,
}

impl Default for SymmetricGrid {
    fn default() -> Self {
        Self {
            w_c: Range::by(30.0, 300.0, 10.0).expect("valid"),
            w_r: Range::by(30.0, 300.0, 10.0).expect("valid"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SymmetricSweepConfig {
    pub grid: SymmetricGrid,
    pub f_rf_mhz: Vec<f64>,
    pub criteria: SelectionCriteria,
    pub settings: RadialSettings,
}

impl Default for SymmetricSweepConfig {
    fn default() -> Self {
        Self {
            grid: SymmetricGrid::default(),
            f_rf_mhz: vec![20.0, 22.0, 24.0],
            criteria: SelectionCriteria::symmetric(),
            settings: RadialSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourPoint {
    #[serde(rename = "f_rf_MHz")]
    pub f_rf_mhz: f64,
    pub w_c_um: f64,
    pub w_r_um: f64,
    pub h_um: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightPoint {
    pub w_c_um: f64,
    pub w_r_um: f64,
    pub h_um: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthPoint {
    #[serde(rename = "f_rf_MHz")]
    pub f_rf_mhz: f64,
    pub w_c_um: f64,
    pub w_r_um: f64,
    pub h_um: f64,
    pub q: f64,
    #[serde(rename = "depth_eV")]
    pub depth_ev: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSweep {
    /// One row per (w_c, w_r, f_rf), w_c outermost.
    pub rows: Vec<Candidate>,
    /// Ion height over the width grid.
    pub heights: Vec<HeightPoint>,
    /// Widths with q exactly on target, per drive frequency.
    pub contour: Vec<ContourPoint>,
    /// Depth against height for rows inside the q window.
    pub depth_vs_h: Vec<DepthPoint>,
}

impl SymmetricSweep {
    /// Passing row with the largest h at `f_rf_mhz`; ties go to the smaller
    /// (w_c, w_r).
    pub fn best_height(&self, f_rf_mhz: f64) -> Option<&Candidate> {
        self.rows
            .iter()
            .filter(|c| c.passes && c.drive.frequency_mhz == f_rf_mhz)
            .fold(None, |best: Option<&Candidate>, c| match best {
                Some(b) if b.metrics.unwrap().h_um >= c.metrics.unwrap().h_um => Some(b),
                _ => Some(c),
            })
    }

    pub fn heights_csv(&self) -> Result<String> {
        to_csv(&self.heights)
    }

    pub fn contour_csv(&self) -> Result<String> {
        to_csv(&self.contour)
    }

    pub fn depth_csv(&self) -> Result<String> {
        to_csv(&self.depth_vs_h)
    }
}

fn symmetric_spec(w_c: f64, w_r: f64, s: &RadialSettings) -> AsymmetricSpec {
    SymmetricSpec {
        w_c,
        w_r,
        outer_width: s.outer_width,
        gap: s.gap,
    }
    .as_asymmetric()
}

/// q of a geometry without the depth search.
fn q_only(spec: &AsymmetricSpec, drive: &RfDrive, s: &RadialSettings) -> Result<(f64, f64)> {
    let layout = make_asymmetric(spec, s.axial_length)?;
    let trap = TrapPotential::new(&layout, drive, &s.ion)?;
    let min = locate_minimum(&trap, &layout, None)?;
    Ok((analyze_secular(&trap, &min)?.q, min.y))
}

/// Contour tolerance on w_r, µm.
pub const CONTOUR_TOL_UM: f64 = 0.1;

fn contour_at(w_c: f64, ws: &[f64], f: f64, target: f64, s: &RadialSettings) -> Vec<ContourPoint> {
    let drive = RfDrive::new(s.v_rf, f);
    let q = |w_r: f64| q_only(&symmetric_spec(w_c, w_r, s), &drive, s);
    let samples: Vec<Option<f64>> = ws.iter().map(|&w| q(w).ok().map(|(q, _)| q - target)).collect();
    let mut out = Vec::new();
    for k in 1..ws.len() {
        let (Some(a), Some(b)) = (samples[k - 1], samples[k]) else {
            continue;
        };
        if a == 0.0 || a.signum() == b.signum() {
            if a == 0.0 {
                if let Ok((_, h)) = q(ws[k - 1]) {
                    out.push(ContourPoint { f_rf_mhz: f, w_c_um: w_c, w_r_um: ws[k - 1], h_um: h });
                }
            }
            continue;
        }
        let (mut lo, mut hi, mut flo) = (ws[k - 1], ws[k], a);
        let mut ok = true;
        while hi - lo > CONTOUR_TOL_UM {
            let mid = 0.5 * (lo + hi);
            match q(mid) {
                Ok((qm, _)) if (qm - target).signum() == flo.signum() => {
                    lo = mid;
                    flo = qm - target;
                }
                Ok(_) => hi = mid,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        let w_r = 0.5 * (lo + hi);
        if let (true, Ok((_, h))) = (ok, q(w_r)) {
            out.push(ContourPoint { f_rf_mhz: f, w_c_um: w_c, w_r_um: w_r, h_um: h });
        }
    }
    out
}

/// Sweep of the symmetric five-wire trap over (w_c, w_r) and the drive
/// frequency set. Per-point solver failures become rows with a reason.
pub fn sweep_symmetric(config: &SymmetricSweepConfig) -> Result<SymmetricSweep> {
    config.grid.w_c.validate()?;
    config.grid.w_r.validate()?;
    config.criteria.validate()?;
    if config.f_rf_mhz.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let s = &config.settings;
    let wcs = config.grid.w_c.values();
    let wrs = config.grid.w_r.values();
    let points: Vec<(f64, f64, f64)> = wcs
        .iter()
        .flat_map(|&c| wrs.iter().flat_map(move |&r| config.f_rf_mhz.iter().map(move |&f| (c, r, f))))
        .collect();
    let rows: Vec<Candidate> = points
        .par_iter()
        .map(|&(c, r, f)| Candidate::evaluate(symmetric_spec(c, r, s), RfDrive::new(s.v_rf, f), &s.ion, s.axial_length, &config.criteria))
        .collect();

    let f0 = config.f_rf_mhz[0];
    let heights = rows
        .iter()
        .filter(|c| c.drive.frequency_mhz == f0)
        .filter_map(|c| {
            c.metrics.map(|m| HeightPoint {
                w_c_um: c.spec.w_c,
                w_r_um: c.spec.w_r_up,
                h_um: m.h_um,
            })
        })
        .collect();
    let depth_vs_h = rows
        .iter()
        .filter_map(|c| {
            let m = c.metrics?;
            config.criteria.q_ok(&m).then_some(DepthPoint {
                f_rf_mhz: c.drive.frequency_mhz,
                w_c_um: c.spec.w_c,
                w_r_um: c.spec.w_r_up,
                h_um: m.h_um,
                q: m.q,
                depth_ev: m.depth_ev,
            })
        })
        .collect();
    let jobs: Vec<(f64, f64)> = config
        .f_rf_mhz
        .iter()
        .flat_map(|&f| wcs.iter().map(move |&c| (f, c)))
        .collect();
    let contour = jobs
        .par_iter()
        .map(|&(f, c)| contour_at(c, &wrs, f, config.criteria.q_target, s))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(SymmetricSweep {
        rows,
        heights,
        contour,
        depth_vs_h,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricGrid {
    pub w_c: Range,
    pub w_r_up: Range,
    pub w_r_down: Range,
}

impl Default for AsymmetricGrid {
    fn default() -> Self {
        Self {
            w_c: Range::by(30.0, 70.0, 10.0).expect("valid"),
            w_r_up: Range::by(140.0, 500.0, 10.0).expect("valid"),
            w_r_down: Range::by(140.0, 500.0, 10.0).expect("valid"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AsymmetricSearchConfig {
    pub grid: AsymmetricGrid,
    pub f_rf_mhz: f64,
    pub criteria: SelectionCriteria,
    pub settings: RadialSettings,
}

impl Default for AsymmetricSearchConfig {
    fn default() -> Self {
        Self {
            grid: AsymmetricGrid::default(),
            f_rf_mhz: 22.0,
            criteria: SelectionCriteria::asymmetric(),
            settings: RadialSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricSearch {
    /// All grid points in (w_c, w_r_down, w_r_up) order.
    pub rows: Vec<Candidate>,
    /// Indices into `rows` of passing candidates, deepest first.
    pub ranked: Vec<usize>,
}

impl AsymmetricSearch {
    pub fn best(&self) -> Option<&Candidate> {
        self.ranked.first().map(|&i| &self.rows[i])
    }
}

/// Exhaustive search of the asymmetric trap; the winner maximizes depth
/// among candidates that pass the criteria.
pub fn search_asymmetric(config: &AsymmetricSearchConfig) -> Result<AsymmetricSearch> {
    let g = &config.grid;
    for r in [&g.w_c, &g.w_r_up, &g.w_r_down] {
        r.validate()?;
    }
    config.criteria.validate()?;
    let s = &config.settings;
    let drive = RfDrive::new(s.v_rf, config.f_rf_mhz);
    drive.validate()?;
    let up = g.w_r_up.values();
    let down = g.w_r_down.values();
    let points: Vec<AsymmetricSpec> = g
        .w_c
        .values()
        .into_iter()
        .flat_map(|c| {
            let up = &up;
            down.iter().flat_map(move |&d| {
                up.iter().map(move |&u| AsymmetricSpec {
                    w_c: c,
                    w_r_up: u,
                    w_r_down: d,
                    outer_width: s.outer_width,
                    gap: s.gap,
                })
            })
        })
        .collect();
    let rows: Vec<Candidate> = points
        .into_par_iter()
        .map(|spec| Candidate::evaluate(spec, drive, &s.ion, s.axial_length, &config.criteria))
        .collect();
    let mut ranked: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].passes).collect();
    // Depths equal to 1e-12 eV (mirror images differ only by rounding) tie;
    // rows are already in tie-break order, so the stable sort keeps it.
    ranked.sort_by_key(|&i| std::cmp::Reverse((rows[i].depth() * 1e12).round() as i64));
    Ok(AsymmetricSearch { rows, ranked })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitGrid {
    pub r0: Range,
    pub r1: Range,
    pub r2: Range,
}

impl Default for SplitGrid {
    fn default() -> Self {
        Self {
            r0: Range::by(50.0, 200.0, 50.0).expect("valid"),
            r1: Range::by(100.0, 300.0, 50.0).expect("valid"),
            r2: Range::by(500.0, 800.0, 50.0).expect("valid"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub grid: SplitGrid,
    pub radial: AsymmetricSpec,
    pub v_rf: f64,
    pub f_rf_mhz: f64,
    pub ion: IonSpecies,
    pub target_depth_ev: f64,
    pub axial_length: f64,
    /// Separation-voltage window, V.
    pub u_range: [f64; 2],
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            grid: SplitGrid::default(),
            radial: AsymmetricSpec::new(40.0, 400.0, 160.0),
            v_rf: 100.0,
            f_rf_mhz: 22.0,
            ion: IonSpecies::yb171(),
            target_depth_ev: 0.05,
            axial_length: DEFAULT_AXIAL_LENGTH,
            u_range: [-5.0, 10.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub spec: SplitSpec,
    /// Calibrated separation voltage.
    pub u_v: Option<f64>,
    pub metrics: Option<SplitMetrics>,
    /// Well separation at the top of the voltage window.
    pub l_at_u_max_um: Option<f64>,
    pub failure: Option<String>,
}

impl SplitCandidate {
    pub fn l_um(&self) -> Option<f64> {
        self.metrics.as_ref().and_then(|m| m.l_um)
    }
}

#[derive(Debug, Serialize)]
struct SplitRow {
    r0_um: f64,
    r1_um: f64,
    r2_um: f64,
    #[serde(rename = "u_V")]
    u_v: Option<f64>,
    l_um: Option<f64>,
    #[serde(rename = "well_depth_eV")]
    well_depth_ev: Option<f64>,
    #[serde(rename = "barrier_eV")]
    barrier_ev: Option<f64>,
    #[serde(rename = "barrier_slope_eV_per_um")]
    barrier_slope: Option<f64>,
    l_at_u_max_um: Option<f64>,
    failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitOptimization {
    pub rows: Vec<SplitCandidate>,
    pub best: Option<usize>,
}

impl SplitOptimization {
    pub fn best(&self) -> Option<&SplitCandidate> {
        self.best.map(|i| &self.rows[i])
    }

    pub fn to_csv(&self) -> Result<String> {
        to_csv(self.rows.iter().map(|c| {
            let m = c.metrics.as_ref();
            SplitRow {
                r0_um: c.spec.r0,
                r1_um: c.spec.r1,
                r2_um: c.spec.r2,
                u_v: c.u_v,
                l_um: c.l_um(),
                well_depth_ev: m.map(|m| m.min_well_depth()),
                barrier_ev: m.and_then(|m| m.barrier_height_ev),
                barrier_slope: m.and_then(|m| m.barrier_max_slope_ev_per_um),
                l_at_u_max_um: c.l_at_u_max_um,
                failure: c.failure.clone(),
            }
        }))
    }
}

fn split_point(spec: SplitSpec, config: &SplitConfig) -> SplitCandidate {
    let drive = RfDrive::new(config.v_rf, config.f_rf_mhz);
    let run = || -> Result<(f64, SplitMetrics, Option<f64>)> {
        let layout = make_split(&spec)?;
        let basis = AxialBasis::new(
            &layout,
            &drive,
            &config.ion,
            (-DEFAULT_HALF_WINDOW, DEFAULT_HALF_WINDOW),
            DEFAULT_SAMPLES,
        )?;
        let solver = SplitSolver::new(basis, splitting_voltages(0.0), separation_electrodes())?;
        let [lo, hi] = config.u_range;
        let top = solver.metrics(hi)?;
        let (u, m) = solver.calibrate(config.target_depth_ev, lo, hi)?;
        Ok((u, m, top.l_um))
    };
    match run() {
        Ok((u, m, top)) => SplitCandidate {
            spec,
            u_v: Some(u),
            metrics: Some(m),
            l_at_u_max_um: top,
            failure: None,
        },
        Err(e) => SplitCandidate {
            spec,
            u_v: None,
            metrics: None,
            l_at_u_max_um: None,
            failure: Some(e.to_string()),
        },
    }
}

/// Splitting-segment search: each point is calibrated to the target well
/// depth and the winner has the smallest well separation `l`.
pub fn optimize_split(config: &SplitConfig) -> Result<SplitOptimization> {
    let g = &config.grid;
    for r in [&g.r0, &g.r1, &g.r2] {
        r.validate()?;
    }
    if !(config.target_depth_ev > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "target depth must be > 0 (got {})",
            config.target_depth_ev
        )));
    }
    RfDrive::new(config.v_rf, config.f_rf_mhz).validate()?;
    config.radial.validate()?;
    let r1s = g.r1.values();
    let r2s = g.r2.values();
    let specs: Vec<SplitSpec> = g
        .r0
        .values()
        .into_iter()
        .flat_map(|r0| {
            let r2s = &r2s;
            r1s.iter().flat_map(move |&r1| {
                r2s.iter().map(move |&r2| SplitSpec {
                    r0,
                    r1,
                    r2,
                    radial: config.radial,
                    axial_length: config.axial_length,
                })
            })
        })
        .collect();
    let rows: Vec<SplitCandidate> = specs.into_par_iter().map(|s| split_point(s, config)).collect();
    let mut best: Option<usize> = None;
    for (i, c) in rows.iter().enumerate() {
        let ok = c.metrics.as_ref().is_some_and(|m| m.topology == Topology::DoubleWell);
        if !ok {
            continue;
        }
        let l = c.l_um().expect("double well has l");
        if best.is_none_or(|b| l < rows[b].l_um().expect("double well has l")) {
            best = Some(i);
        }
    }
    Ok(SplitOptimization { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo::metrics;

    #[test]
    fn range_values() {
        assert_eq!(Range::by(30.0, 300.0, 10.0).unwrap().steps, 28);
        assert_eq!(Range::by(50.0, 200.0, 50.0).unwrap().values(), vec![50.0, 100.0, 150.0, 200.0]);
        assert_eq!(Range::single(7.0).values(), vec![7.0]);
        assert!(Range::new(2.0, 1.0, 3).is_err());
        assert!(matches!(Range::new(1.0, 2.0, 0), Err(Error::EmptyGrid)));
        let r: Range = serde_json::from_str(r#"{"lo": 140, "hi": 500, "step": 10}"#).unwrap();
        assert_eq!(r.steps, 37);
        assert!(serde_json::from_str::<Range>(r#"{"lo": 1, "hi": 2}"#).is_err());
    }

    #[test]
    fn single_point_sweep_matches_metrics() {
        let config = SymmetricSweepConfig {
            grid: SymmetricGrid {
                w_c: Range::single(50.0),
                w_r: Range::single(150.0),
            },
            f_rf_mhz: vec![22.0],
            ..Default::default()
        };
        let sweep = sweep_symmetric(&config).unwrap();
        assert_eq!(sweep.rows.len(), 1);
        let layout = make_asymmetric(&AsymmetricSpec::new(50.0, 150.0, 150.0), DEFAULT_AXIAL_LENGTH).unwrap();
        let m = metrics(&layout, &RfDrive::new(100.0, 22.0), &IonSpecies::yb171()).unwrap();
        assert_eq!(sweep.rows[0].metrics, Some(m));
    }

    #[test]
    fn unattainable_tilt_window_is_empty() {
        let config = AsymmetricSearchConfig {
            grid: AsymmetricGrid {
                w_c: Range::single(40.0),
                w_r_up: Range::new(380.0, 400.0, 2).unwrap(),
                w_r_down: Range::new(160.0, 180.0, 2).unwrap(),
            },
            criteria: SelectionCriteria {
                alpha_deg: Some([89.0, 90.0]),
                ..SelectionCriteria::asymmetric()
            },
            ..Default::default()
        };
        let r = search_asymmetric(&config).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.best().is_none());
    }

    #[test]
    fn passing_rows_satisfy_criteria() {
        let config = AsymmetricSearchConfig {
            grid: AsymmetricGrid {
                w_c: Range::single(40.0),
                w_r_up: Range::new(300.0, 400.0, 3).unwrap(),
                w_r_down: Range::new(140.0, 180.0, 3).unwrap(),
            },
            criteria: SelectionCriteria {
                q_tol: 0.05,
                h_tol_um: 10.0,
                ..SelectionCriteria::asymmetric()
            },
            ..Default::default()
        };
        let r = search_asymmetric(&config).unwrap();
        for c in &r.rows {
            if c.passes {
                let m = c.metrics.unwrap();
                assert!((m.q - 0.3).abs() <= 0.05 && (m.h_um - 80.0).abs() <= 10.0);
                assert!((10.0..=20.0).contains(&m.alpha_deg));
            }
        }
        if let Some(best) = r.best() {
            assert!(r.rows.iter().filter(|c| c.passes).all(|c| c.depth() <= best.depth()));
        }
    }
}
