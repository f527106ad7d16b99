//! Electrostatics of biased rectangles in an otherwise grounded plane.
//!
//! The Dirichlet half-space solution for a unit-voltage rectangle is
//! `φ(r) = (y / 2π) ∫∫ dA' / |r - r'|³`, which integrates to a sum of four
//! corner terms `atan(X Z / (y R)) / 2π` with alternating signs (the solid
//! angle subtended by the patch). Derivatives come from evaluating the same
//! expression on [`Jet`]s, so they are exact rather than finite-differenced.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::jet::{Dual, Jet, Scalar};
use crate::layout::{ElectrodeLayout, RectElectrode, Role};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let p = Self { x, y, z };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if self.y > 0.0 && self.y.is_finite() {
            Ok(())
        } else {
            Err(Error::BelowPlane(self.y))
        }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn offset(&self, d: Vector3<f64>) -> Self {
        Self {
            x: self.x + d.x,
            y: self.y + d.y,
            z: self.z + d.z,
        }
    }
}

/// Potential and its first three derivative orders at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchDerivs {
    pub value: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
    /// `third[k]` is `∂_k` of the Hessian.
    pub third: [Matrix3<f64>; 3],
}

impl PatchDerivs {
    fn from_jet(j: &Jet) -> Self {
        Self {
            value: j.value(),
            gradient: j.gradient(),
            hessian: j.hessian(),
            third: j.third(),
        }
    }
}

type Bounds = [f64; 4];

fn bounds(rect: &RectElectrode) -> Bounds {
    [rect.x_lo, rect.x_hi, rect.z_lo, rect.z_hi]
}

fn rect_eval<S: Scalar>(b: &Bounds, x: S, y: S, z: S) -> S {
    let corner = |xc: f64, zc: f64| {
        let dx = (-x).add_const(xc);
        let dz = (-z).add_const(zc);
        let r = (dx * dx + dz * dz + y * y).sqrt();
        (dx * dz / (y * r)).atan()
    };
    let sum = corner(b[1], b[3]) - corner(b[1], b[2]) - corner(b[0], b[3]) + corner(b[0], b[2]);
    sum.scale(0.5 / PI)
}

fn jet_point(p: &FieldPoint) -> (Jet, Jet, Jet) {
    (Jet::variable(p.x, 0), Jet::variable(p.y, 1), Jet::variable(p.z, 2))
}

fn dual_point(p: &FieldPoint) -> (Dual, Dual, Dual) {
    (Dual::variable(p.x, 0), Dual::variable(p.y, 1), Dual::variable(p.z, 2))
}

/// Unit-voltage potential of `rect` with the rest of the plane grounded.
pub fn patch_potential(rect: &RectElectrode, p: &FieldPoint) -> Result<f64> {
    p.check()?;
    Ok(rect_eval(&bounds(rect), p.x, p.y, p.z))
}

/// Gradient of [`patch_potential`], per µm.
pub fn patch_gradient(rect: &RectElectrode, p: &FieldPoint) -> Result<Vector3<f64>> {
    p.check()?;
    let (x, y, z) = dual_point(p);
    Ok(rect_eval(&bounds(rect), x, y, z).gradient())
}

/// Hessian of [`patch_potential`], per µm².
pub fn patch_hessian(rect: &RectElectrode, p: &FieldPoint) -> Result<Matrix3<f64>> {
    Ok(patch_derivs(rect, p)?.hessian)
}

pub fn patch_derivs(rect: &RectElectrode, p: &FieldPoint) -> Result<PatchDerivs> {
    p.check()?;
    let (x, y, z) = jet_point(p);
    Ok(PatchDerivs::from_jet(&rect_eval(&bounds(rect), x, y, z)))
}

/// Weighted sum of rectangle potentials, e.g. an RF basis or a DC voltage set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Superposition {
    terms: Vec<(Bounds, f64)>,
}

impl Superposition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rect: &RectElectrode, weight: f64) {
        if weight != 0.0 {
            self.terms.push((bounds(rect), weight));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn eval<S: Scalar>(&self, x: S, y: S, z: S) -> S {
        self.terms
            .iter()
            .fold(S::constant(0.0), |acc, (b, w)| acc + rect_eval(b, x, y, z).scale(*w))
    }

    pub fn potential(&self, p: &FieldPoint) -> Result<f64> {
        p.check()?;
        Ok(self.eval(p.x, p.y, p.z))
    }

    pub fn gradient(&self, p: &FieldPoint) -> Result<Vector3<f64>> {
        p.check()?;
        let (x, y, z) = dual_point(p);
        Ok(self.eval(x, y, z).gradient())
    }

    pub fn value_and_gradient(&self, p: &FieldPoint) -> Result<(f64, Vector3<f64>)> {
        p.check()?;
        let (x, y, z) = dual_point(p);
        let d = self.eval(x, y, z);
        Ok((d.value(), d.gradient()))
    }

    pub fn derivs(&self, p: &FieldPoint) -> Result<PatchDerivs> {
        p.check()?;
        let (x, y, z) = jet_point(p);
        Ok(PatchDerivs::from_jet(&self.eval(x, y, z)))
    }
}

/// Electrode name to DC voltage. Electrodes not listed sit at 0 V.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DcAssignment(BTreeMap<String, f64>);

impl DcAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, volts: f64) -> Self {
        self.set(name, volts);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, volts: f64) {
        self.0.insert(name.into(), volts);
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0.iter().map(|(n, v)| (n.clone(), v * k)).collect())
    }

    /// `a·self + b·other`, name by name.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mut out = self.scaled(a);
        for (n, v) in other.iter() {
            let cur = out.get(n);
            out.set(n, cur + b * v);
        }
        out
    }
}

/// Superposition for a voltage set. Unknown names are an error unless their
/// voltage is zero.
pub fn dc_superposition(layout: &ElectrodeLayout, volts: &DcAssignment) -> Result<Superposition> {
    let mut s = Superposition::new();
    for (name, v) in volts.iter() {
        match layout.get(name) {
            Some(rect) => s.push(rect, v),
            None if v == 0.0 => {}
            None => return Err(Error::UnknownElectrode(name.to_string())),
        }
    }
    Ok(s)
}

/// DC potential in volts.
pub fn dc_potential(layout: &ElectrodeLayout, volts: &DcAssignment, p: &FieldPoint) -> Result<f64> {
    dc_superposition(layout, volts)?.potential(p)
}

pub fn dc_gradient(layout: &ElectrodeLayout, volts: &DcAssignment, p: &FieldPoint) -> Result<Vector3<f64>> {
    dc_superposition(layout, volts)?.gradient(p)
}

pub fn dc_hessian(layout: &ElectrodeLayout, volts: &DcAssignment, p: &FieldPoint) -> Result<Matrix3<f64>> {
    Ok(dc_superposition(layout, volts)?.derivs(p)?.hessian)
}

/// All RF electrodes at unit voltage.
pub fn rf_superposition(layout: &ElectrodeLayout) -> Result<Superposition> {
    let mut s = Superposition::new();
    for rect in layout.with_role(Role::Rf) {
        s.push(rect, 1.0);
    }
    if s.is_empty() {
        return Err(Error::NoRfElectrodes);
    }
    Ok(s)
}

/// Unit-amplitude RF potential with derivatives.
pub fn rf_basis(layout: &ElectrodeLayout, p: &FieldPoint) -> Result<PatchDerivs> {
    rf_superposition(layout)?.derivs(p)
}
