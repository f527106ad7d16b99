//! Electrode geometry in the trap plane.
//!
//! Frame: the chip surface is `y = 0`, `x` runs across the trap axis and `z`
//! along it. Every electrode is an axis-aligned rectangle; the un-electroded
//! remainder of the plane (including fabrication gaps) is grounded.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default length of the radial strips along `z`, µm.
pub const DEFAULT_AXIAL_LENGTH: f64 = 20_000.0;
/// Default fabrication gap between neighbouring electrodes, µm.
pub const DEFAULT_GAP: f64 = 6.0;
/// Default width of the outer DC rails, µm.
pub const DEFAULT_OUTER_WIDTH: f64 = 1_000.0;

const EDGE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Role {
    Rf,
    Dc,
    Ground,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectElectrode {
    pub name: String,
    pub x_lo: f64,
    pub x_hi: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub role: Role,
}

impl RectElectrode {
    pub fn new(name: impl Into<String>, x: (f64, f64), z: (f64, f64), role: Role) -> Result<Self> {
        let rect = Self {
            name: name.into(),
            x_lo: x.0,
            x_hi: x.1,
            z_lo: z.0,
            z_hi: z.1,
            role,
        };
        rect.validate()?;
        Ok(rect)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_lo, self.x_hi, self.z_lo, self.z_hi].iter().all(|v| v.is_finite());
        if !finite || self.x_lo >= self.x_hi || self.z_lo >= self.z_hi {
            return Err(Error::InvalidSpec(format!(
                "electrode `{}` must have positive area (x: [{}, {}], z: [{}, {}])",
                self.name, self.x_lo, self.x_hi, self.z_lo, self.z_hi
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn length(&self) -> f64 {
        self.z_hi - self.z_lo
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x_lo + self.x_hi), 0.5 * (self.z_lo + self.z_hi))
    }

    /// True when the open interiors intersect. Touching edges do not count.
    pub fn overlaps(&self, other: &RectElectrode) -> bool {
        self.x_lo < other.x_hi - EDGE_EPS
            && other.x_lo < self.x_hi - EDGE_EPS
            && self.z_lo < other.z_hi - EDGE_EPS
            && other.z_lo < self.z_hi - EDGE_EPS
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        x > self.x_lo && x < self.x_hi && z > self.z_lo && z < self.z_hi
    }

    /// Distance from `(x, z)` to the nearest edge of the rectangle.
    pub fn edge_distance(&self, x: f64, z: f64) -> f64 {
        let dx = (x - self.x_lo).abs().min((x - self.x_hi).abs());
        let dz = (z - self.z_lo).abs().min((z - self.z_hi).abs());
        let inside_x = x >= self.x_lo && x <= self.x_hi;
        let inside_z = z >= self.z_lo && z <= self.z_hi;
        match (inside_x, inside_z) {
            (true, true) => dx.min(dz),
            (true, false) => dz,
            (false, true) => dx,
            (false, false) => dx.hypot(dz),
        }
    }

    fn mirrored_x(&self) -> Self {
        Self {
            x_lo: -self.x_hi,
            x_hi: -self.x_lo,
            ..self.clone()
        }
    }

    fn mirrored_z(&self) -> Self {
        Self {
            z_lo: -self.z_hi,
            z_hi: -self.z_lo,
            ..self.clone()
        }
    }
}

/// An ordered set of non-overlapping electrodes with unique names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayout")]
pub struct ElectrodeLayout {
    electrodes: Vec<RectElectrode>,
    gap: f64,
}

#[derive(Deserialize)]
struct RawLayout {
    electrodes: Vec<RectElectrode>,
    #[serde(default = "default_gap")]
    gap: f64,
}

fn default_gap() -> f64 {
    DEFAULT_GAP
}

fn default_outer_width() -> f64 {
    DEFAULT_OUTER_WIDTH
}

fn default_axial_length() -> f64 {
    DEFAULT_AXIAL_LENGTH
}

impl TryFrom<RawLayout> for ElectrodeLayout {
    type Error = Error;

    fn try_from(raw: RawLayout) -> Result<Self> {
        ElectrodeLayout::new(raw.electrodes, raw.gap)
    }
}

impl ElectrodeLayout {
    pub fn new(electrodes: Vec<RectElectrode>, gap: f64) -> Result<Self> {
        if !(gap >= 0.0) {
            return Err(Error::InvalidSpec(format!("gap must be non-negative, got {gap}")));
        }
        let mut names = BTreeSet::new();
        for e in &electrodes {
            e.validate()?;
            if !names.insert(e.name.as_str()) {
                return Err(Error::DuplicateName(e.name.clone()));
            }
        }
        for (i, a) in electrodes.iter().enumerate() {
            for b in &electrodes[i + 1..] {
                if a.overlaps(b) {
                    return Err(Error::Overlap(a.name.clone(), b.name.clone()));
                }
            }
        }
        Ok(Self { electrodes, gap })
    }

    pub fn electrodes(&self) -> &[RectElectrode] {
        &self.electrodes
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn get(&self, name: &str) -> Option<&RectElectrode> {
        self.electrodes.iter().find(|e| e.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.electrodes.iter().position(|e| e.name == name)
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &RectElectrode> {
        self.electrodes.iter().filter(move |e| e.role == role)
    }

    /// Total x-extent covered by electrodes.
    pub fn x_extent(&self) -> (f64, f64) {
        self.electrodes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.x_lo), hi.max(e.x_hi)))
    }

    /// Reflection `x -> -x`. Names are kept.
    pub fn mirrored_x(&self) -> Self {
        Self {
            electrodes: self.electrodes.iter().map(RectElectrode::mirrored_x).collect(),
            gap: self.gap,
        }
    }

    /// Reflection `z -> -z`. Names are kept.
    pub fn mirrored_z(&self) -> Self {
        Self {
            electrodes: self.electrodes.iter().map(RectElectrode::mirrored_z).collect(),
            gap: self.gap,
        }
    }

    /// Geometry-only comparison: same multiset of (rectangle, role), ignoring
    /// names and order.
    pub fn same_geometry(&self, other: &Self, tol: f64) -> bool {
        if self.electrodes.len() != other.electrodes.len() {
            return false;
        }
        let mut used = vec![false; other.electrodes.len()];
        'outer: for a in &self.electrodes {
            for (j, b) in other.electrodes.iter().enumerate() {
                if !used[j]
                    && a.role == b.role
                    && (a.x_lo - b.x_lo).abs() <= tol
                    && (a.x_hi - b.x_hi).abs() <= tol
                    && (a.z_lo - b.z_lo).abs() <= tol
                    && (a.z_hi - b.z_hi).abs() <= tol
                {
                    used[j] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    /// Pairs of neighbouring electrodes whose facing edges are separated by a
    /// strip of bare plane, with the strip width. Neighbours must overlap in
    /// the transverse coordinate and have nothing between them.
    pub fn neighbour_gaps(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, a) in self.electrodes.iter().enumerate() {
            for (j, b) in self.electrodes.iter().enumerate() {
                if i == j {
                    continue;
                }
                let z_overlap = a.z_lo < b.z_hi - EDGE_EPS && b.z_lo < a.z_hi - EDGE_EPS;
                let x_overlap = a.x_lo < b.x_hi - EDGE_EPS && b.x_lo < a.x_hi - EDGE_EPS;
                if z_overlap && b.x_lo >= a.x_hi - EDGE_EPS {
                    let d = b.x_lo - a.x_hi;
                    if !self.blocked_x(i, j, a.x_hi, b.x_lo) {
                        out.push((i, j, d));
                    }
                }
                if x_overlap && b.z_lo >= a.z_hi - EDGE_EPS {
                    let d = b.z_lo - a.z_hi;
                    if !self.blocked_z(i, j, a.z_hi, b.z_lo) {
                        out.push((i, j, d));
                    }
                }
            }
        }
        out
    }

    fn blocked_x(&self, i: usize, j: usize, lo: f64, hi: f64) -> bool {
        let (a, b) = (&self.electrodes[i], &self.electrodes[j]);
        let (zl, zh) = (a.z_lo.max(b.z_lo), a.z_hi.min(b.z_hi));
        self.electrodes.iter().enumerate().any(|(k, c)| {
            k != i && k != j && c.x_lo < hi - EDGE_EPS && c.x_hi > lo + EDGE_EPS && c.z_lo < zh && c.z_hi > zl
        })
    }

    fn blocked_z(&self, i: usize, j: usize, lo: f64, hi: f64) -> bool {
        let (a, b) = (&self.electrodes[i], &self.electrodes[j]);
        let (xl, xh) = (a.x_lo.max(b.x_lo), a.x_hi.min(b.x_hi));
        self.electrodes.iter().enumerate().any(|(k, c)| {
            k != i && k != j && c.z_lo < hi - EDGE_EPS && c.z_hi > lo + EDGE_EPS && c.x_lo < xh && c.x_hi > xl
        })
    }

    /// Alternative gap treatment: every edge that faces a neighbour across
    /// exactly `gap` is pushed out to the gap midline, so the plane between
    /// electrodes is shared rather than grounded. The result has `gap = 0`.
    pub fn with_midline_gaps(&self) -> Self {
        let half = 0.5 * self.gap;
        let mut out = self.electrodes.clone();
        if half > 0.0 {
            for (i, j, d) in self.neighbour_gaps() {
                if (d - self.gap).abs() > 1e-6 {
                    continue;
                }
                let (a, b) = (&self.electrodes[i], &self.electrodes[j]);
                if (b.x_lo - a.x_hi - d).abs() < 1e-9 && b.x_lo >= a.x_hi {
                    out[i].x_hi = a.x_hi + half;
                    out[j].x_lo = b.x_lo - half;
                } else {
                    out[i].z_hi = a.z_hi + half;
                    out[j].z_lo = b.z_lo - half;
                }
            }
        }
        Self { electrodes: out, gap: 0.0 }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{what} must be positive, got {v}")))
    }
}

fn check_gap(gap: f64) -> Result<()> {
    if gap >= 0.0 && gap.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("gap must be non-negative, got {gap}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSpec {
    pub w_c: f64,
    pub w_r: f64,
    #[serde(default = "default_outer_width")]
    pub outer_width: f64,
    #[serde(default = "default_gap")]
    pub gap: f64,
}

impl SymmetricSpec {
    pub fn new(w_c: f64, w_r: f64) -> Self {
        Self {
            w_c,
            w_r,
            outer_width: DEFAULT_OUTER_WIDTH,
            gap: DEFAULT_GAP,
        }
    }

    pub fn as_asymmetric(&self) -> AsymmetricSpec {
        AsymmetricSpec {
            w_c: self.w_c,
            w_r_up: self.w_r,
            w_r_down: self.w_r,
            outer_width: self.outer_width,
            gap: self.gap,
        }
    }
}

/// Five-wire trap with unequal RF strips. `w_r_up` sits on the `+x` side,
/// `w_r_down` on the `-x` side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricSpec {
    pub w_c: f64,
    pub w_r_up: f64,
    pub w_r_down: f64,
    #[serde(default = "default_outer_width")]
    pub outer_width: f64,
    #[serde(default = "default_gap")]
    pub gap: f64,
}

impl AsymmetricSpec {
    pub fn new(w_c: f64, w_r_up: f64, w_r_down: f64) -> Self {
        Self {
            w_c,
            w_r_up,
            w_r_down,
            outer_width: DEFAULT_OUTER_WIDTH,
            gap: DEFAULT_GAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("w_c", self.w_c)?;
        check_positive("w_r_up", self.w_r_up)?;
        check_positive("w_r_down", self.w_r_down)?;
        check_positive("outer_width", self.outer_width)?;
        check_gap(self.gap)
    }

    /// x-ranges of (outer down, RF down, center, RF up, outer up).
    fn strips(&self) -> [(f64, f64); 5] {
        let a = 0.5 * self.w_c + self.gap;
        let up_out = a + self.w_r_up + self.gap;
        let down_out = a + self.w_r_down + self.gap;
        [
            (-(down_out + self.outer_width), -down_out),
            (-(a + self.w_r_down), -a),
            (-0.5 * self.w_c, 0.5 * self.w_c),
            (a, a + self.w_r_up),
            (up_out, up_out + self.outer_width),
        ]
    }
}

/// Segmented splitting trap: the outer rails of an asymmetric five-wire trap
/// are cut along `z` into a central separation pair (`r0`), locking pairs
/// (`r1`) and middle pairs (`r2`) on each side, then grounded pads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    #[serde(flatten)]
    pub radial: AsymmetricSpec,
    #[serde(default = "default_axial_length")]
    pub axial_length: f64,
}

impl SplitSpec {
    pub fn new(r0: f64, r1: f64, r2: f64, radial: AsymmetricSpec) -> Self {
        Self {
            r0,
            r1,
            r2,
            radial,
            axial_length: DEFAULT_AXIAL_LENGTH,
        }
    }

    /// z-centres of the separation, locking and middle segments on the `+z`
    /// side (separation centre is always 0).
    pub fn segment_centers(&self) -> [f64; 3] {
        let g = self.radial.gap;
        [
            0.0,
            0.5 * self.r0 + g + 0.5 * self.r1,
            0.5 * self.r0 + self.r1 + 2.0 * g + 0.5 * self.r2,
        ]
    }
}

fn check_axial_length(axial_length: f64) -> Result<()> {
    check_positive("axial_length", axial_length)
}

/// Symmetric five-wire layout: outer | RF | center | RF | outer.
pub fn make_symmetric(spec: &SymmetricSpec, axial_length: f64) -> Result<ElectrodeLayout> {
    make_asymmetric(&spec.as_asymmetric(), axial_length)
}

pub fn make_asymmetric(spec: &AsymmetricSpec, axial_length: f64) -> Result<ElectrodeLayout> {
    spec.validate()?;
    check_axial_length(axial_length)?;
    let z = (-0.5 * axial_length, 0.5 * axial_length);
    let [dc_down, rf_down, center, rf_up, dc_up] = spec.strips();
    ElectrodeLayout::new(
        vec![
            RectElectrode::new("dc_down", dc_down, z, Role::Ground)?,
            RectElectrode::new("rf_down", rf_down, z, Role::Rf)?,
            RectElectrode::new("center", center, z, Role::Ground)?,
            RectElectrode::new("rf_up", rf_up, z, Role::Rf)?,
            RectElectrode::new("dc_up", dc_up, z, Role::Ground)?,
        ],
        spec.gap,
    )
}

/// Segment families of the splitting layout, in order from `z = 0` outward.
pub const SPLIT_SEGMENTS: [&str; 4] = ["sep", "lock", "mid", "pad"];

/// Name of a split-layout DC segment. `family` is one of
/// [`SPLIT_SEGMENTS`]; `positive_z` is ignored for `sep`; `up` picks the
/// `+x` rail.
pub fn split_segment_name(family: &str, positive_z: bool, up: bool) -> String {
    let side = if up { "up" } else { "down" };
    if family == "sep" {
        format!("sep_{side}")
    } else {
        let half = if positive_z { "p" } else { "n" };
        format!("{family}_{half}_{side}")
    }
}

pub fn make_split(spec: &SplitSpec) -> Result<ElectrodeLayout> {
    let radial = &spec.radial;
    radial.validate()?;
    check_positive("r0", spec.r0)?;
    check_positive("r1", spec.r1)?;
    check_positive("r2", spec.r2)?;
    check_axial_length(spec.axial_length)?;

    let g = radial.gap;
    let half = 0.5 * spec.axial_length;
    let lock_lo = 0.5 * spec.r0 + g;
    let mid_lo = lock_lo + spec.r1 + g;
    let pad_lo = mid_lo + spec.r2 + g;
    if pad_lo >= half {
        return Err(Error::InvalidSpec(format!(
            "axial_length {} too short for segments ending at ±{pad_lo}",
            spec.axial_length
        )));
    }

    let [dc_down, rf_down, center, rf_up, dc_up] = radial.strips();
    let z_full = (-half, half);
    let mut electrodes = vec![
        RectElectrode::new("rf_down", rf_down, z_full, Role::Rf)?,
        RectElectrode::new("center", center, z_full, Role::Ground)?,
        RectElectrode::new("rf_up", rf_up, z_full, Role::Rf)?,
    ];
    for (up, rail) in [(true, dc_up), (false, dc_down)] {
        electrodes.push(RectElectrode::new(
            split_segment_name("sep", true, up),
            rail,
            (-0.5 * spec.r0, 0.5 * spec.r0),
            Role::Dc,
        )?);
        let segments = [
            ("lock", lock_lo, lock_lo + spec.r1, Role::Dc),
            ("mid", mid_lo, mid_lo + spec.r2, Role::Dc),
            ("pad", pad_lo, half, Role::Ground),
        ];
        for (family, lo, hi, role) in segments {
            electrodes.push(RectElectrode::new(split_segment_name(family, true, up), rail, (lo, hi), role)?);
            electrodes.push(RectElectrode::new(split_segment_name(family, false, up), rail, (-hi, -lo), role)?);
        }
    }
    ElectrodeLayout::new(electrodes, g)
}

/// Spec-level layout description as accepted in layout files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Symmetric {
        #[serde(flatten)]
        spec: SymmetricSpec,
        #[serde(default = "default_axial_length")]
        axial_length: f64,
    },
    Asymmetric {
        #[serde(flatten)]
        spec: AsymmetricSpec,
        #[serde(default = "default_axial_length")]
        axial_length: f64,
    },
    Split(SplitSpec),
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<ElectrodeLayout> {
        match self {
            GeneratorSpec::Symmetric { spec, axial_length } => make_symmetric(spec, *axial_length),
            GeneratorSpec::Asymmetric { spec, axial_length } => make_asymmetric(spec, *axial_length),
            GeneratorSpec::Split(spec) => make_split(spec),
        }
    }
}

/// Parse a layout document. Documents with a `type` key are generator
/// specs; anything else must carry an `electrodes` array.
pub fn parse_layout(text: &str) -> Result<ElectrodeLayout> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("type").is_some() {
        let spec: GeneratorSpec = serde_json::from_value(value)?;
        spec.build()
    } else {
        let layout: ElectrodeLayout = serde_json::from_value(value)?;
        Ok(layout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip<'a>(l: &'a ElectrodeLayout, name: &str) -> &'a RectElectrode {
        l.get(name).unwrap()
    }

    #[test]
    fn symmetric_construction_arithmetic() {
        let l = make_symmetric(&SymmetricSpec::new(50.0, 150.0), DEFAULT_AXIAL_LENGTH).unwrap();
        let up = strip(&l, "rf_up");
        assert_eq!((up.x_lo, up.x_hi), (31.0, 181.0));
        let down = strip(&l, "rf_down");
        assert_eq!((down.x_lo, down.x_hi), (-181.0, -31.0));
        assert_eq!(up.role, Role::Rf);
        assert_eq!(strip(&l, "center").role, Role::Ground);
        assert_eq!(strip(&l, "dc_up").role, Role::Ground);
        assert_eq!(strip(&l, "dc_up").width(), 1000.0);
        assert_eq!(up.length(), DEFAULT_AXIAL_LENGTH);
    }

    #[test]
    fn symmetric_is_x_mirror_invariant() {
        let l = make_symmetric(&SymmetricSpec::new(40.0, 160.0), DEFAULT_AXIAL_LENGTH).unwrap();
        assert!(l.same_geometry(&l.mirrored_x(), 1e-12));
    }

    #[test]
    fn grid_lower_bound_is_valid() {
        assert!(make_symmetric(&SymmetricSpec::new(30.0, 30.0), DEFAULT_AXIAL_LENGTH).is_ok());
    }

    #[test]
    fn non_positive_widths_rejected() {
        assert!(matches!(
            make_symmetric(&SymmetricSpec::new(0.0, 30.0), DEFAULT_AXIAL_LENGTH),
            Err(Error::InvalidSpec(_))
        ));
        assert!(make_asymmetric(&AsymmetricSpec::new(40.0, -1.0, 160.0), DEFAULT_AXIAL_LENGTH).is_err());
        let radial = AsymmetricSpec::new(40.0, 400.0, 160.0);
        assert!(make_split(&SplitSpec::new(0.0, 300.0, 700.0, radial)).is_err());
    }

    #[test]
    fn asymmetric_degenerates_to_symmetric() {
        let a = make_asymmetric(&AsymmetricSpec::new(40.0, 160.0, 160.0), DEFAULT_AXIAL_LENGTH).unwrap();
        let s = make_symmetric(&SymmetricSpec::new(40.0, 160.0), DEFAULT_AXIAL_LENGTH).unwrap();
        assert_eq!(a, s);
    }

    #[test]
    fn swapped_widths_mirror() {
        let a = make_asymmetric(&AsymmetricSpec::new(40.0, 400.0, 160.0), DEFAULT_AXIAL_LENGTH).unwrap();
        let b = make_asymmetric(&AsymmetricSpec::new(40.0, 160.0, 400.0), DEFAULT_AXIAL_LENGTH).unwrap();
        assert!(a.same_geometry(&b.mirrored_x(), 1e-12));
        assert!(!a.same_geometry(&b, 1e-12));
    }

    #[test]
    fn reference_asymmetric_layout_valid() {
        let l = make_asymmetric(&AsymmetricSpec::new(40.0, 400.0, 160.0), DEFAULT_AXIAL_LENGTH).unwrap();
        assert_eq!(l.electrodes().len(), 5);
        assert_eq!(l.with_role(Role::Rf).count(), 2);
    }

    #[test]
    fn split_segment_centres() {
        let radial = AsymmetricSpec::new(40.0, 400.0, 160.0);
        let spec = SplitSpec::new(150.0, 300.0, 700.0, radial);
        let l = make_split(&spec).unwrap();
        let c = |n: &str| strip(&l, n).center().1;
        assert_eq!(c("sep_up"), 0.0);
        assert_eq!(c("lock_p_up"), 75.0 + 6.0 + 150.0);
        assert_eq!(c("lock_n_down"), -(75.0 + 6.0 + 150.0));
        assert_eq!(c("mid_p_down"), 75.0 + 300.0 + 12.0 + 350.0);
        assert_eq!(spec.segment_centers(), [0.0, 231.0, 737.0]);
        assert!(l.same_geometry(&l.mirrored_z(), 1e-12));
        assert_eq!(strip(&l, "pad_p_up").role, Role::Ground);
        assert_eq!(strip(&l, "mid_n_up").role, Role::Dc);
    }

    #[test]
    fn split_rejects_short_axis() {
        let radial = AsymmetricSpec::new(40.0, 400.0, 160.0);
        let mut spec = SplitSpec::new(150.0, 300.0, 700.0, radial);
        spec.axial_length = 2000.0;
        assert!(make_split(&spec).is_err());
    }

    #[test]
    fn generated_gaps_are_exact() {
        let radial = AsymmetricSpec::new(40.0, 400.0, 160.0);
        for l in [
            make_asymmetric(&radial, DEFAULT_AXIAL_LENGTH).unwrap(),
            make_split(&SplitSpec::new(150.0, 300.0, 700.0, radial)).unwrap(),
        ] {
            let gaps = l.neighbour_gaps();
            assert!(!gaps.is_empty());
            for (_, _, d) in gaps {
                assert!((d - 6.0).abs() < 1e-9, "gap {d}");
            }
        }
    }

    #[test]
    fn overlap_and_duplicates_rejected() {
        let a = RectElectrode::new("a", (0.0, 10.0), (0.0, 10.0), Role::Dc).unwrap();
        let b = RectElectrode::new("b", (5.0, 15.0), (5.0, 15.0), Role::Dc).unwrap();
        let touching = RectElectrode::new("c", (10.0, 20.0), (0.0, 10.0), Role::Dc).unwrap();
        assert!(matches!(
            ElectrodeLayout::new(vec![a.clone(), b], 0.0),
            Err(Error::Overlap(_, _))
        ));
        assert!(ElectrodeLayout::new(vec![a.clone(), touching], 0.0).is_ok());
        assert!(matches!(
            ElectrodeLayout::new(vec![a.clone(), a], 0.0),
            Err(Error::DuplicateName(_))
        ));
        assert!(RectElectrode::new("z", (1.0, 1.0), (0.0, 1.0), Role::Dc).is_err());
    }

    #[test]
    fn midline_expansion_closes_gaps() {
        let l = make_symmetric(&SymmetricSpec::new(50.0, 150.0), DEFAULT_AXIAL_LENGTH).unwrap();
        let m = l.with_midline_gaps();
        assert_eq!(m.gap(), 0.0);
        let up = strip(&m, "rf_up");
        assert_eq!((up.x_lo, up.x_hi), (28.0, 184.0));
        assert_eq!(strip(&m, "center").x_hi, 28.0);
        assert_eq!(strip(&m, "dc_up").x_lo, 184.0);
        for (_, _, d) in m.neighbour_gaps() {
            assert!(d.abs() < 1e-9);
        }
    }

    #[test]
    fn json_layout_file_and_generator_spec() {
        let l = make_asymmetric(&AsymmetricSpec::new(40.0, 400.0, 160.0), DEFAULT_AXIAL_LENGTH).unwrap();
        let text = l.to_json().unwrap();
        assert_eq!(parse_layout(&text).unwrap(), l);

        let spec = r#"{"type": "asymmetric", "w_c": 40, "w_r_up": 400, "w_r_down": 160}"#;
        assert_eq!(parse_layout(spec).unwrap(), l);

        let split = r#"{"type": "split", "r0": 150, "r1": 300, "r2": 700, "w_c": 40, "w_r_up": 400, "w_r_down": 160}"#;
        assert_eq!(parse_layout(split).unwrap().electrodes().len(), 3 + 2 * 7);

        let bad = r#"{"electrodes": [{"name": "a", "x_lo": 1, "x_hi": 0, "z_lo": 0, "z_hi": 1, "role": "DC"}]}"#;
        assert!(parse_layout(bad).is_err());
    }
}
