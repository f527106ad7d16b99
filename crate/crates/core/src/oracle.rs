//! Independent numerical checks of the closed-form field core.
//!
//! The quadrature here integrates the Dirichlet half-space kernel directly
//! and shares no code with [`crate::field`]'s corner formula. The remaining
//! checks (harmonicity, boundary values, scale invariance) only use the
//! public field API. `surftrap validate` prints the resulting report.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::field::{dc_superposition, patch_gradient, patch_potential, DcAssignment, FieldPoint};
use crate::layout::{make_split, AsymmetricSpec, RectElectrode, Role, SplitSpec};
use crate::Result;

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod integration to absolute tolerance `tol`,
/// bisecting the worst interval until the error budget is met or the
/// interval limit is reached.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    const LIMIT: usize = 500;
    let (v, e) = gauss_kronrod(f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut total_err = e;
    while total_err > tol && pieces.len() < LIMIT {
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _, err) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let left = gauss_kronrod(f, lo, mid);
        let right = gauss_kronrod(f, mid, hi);
        total_err += left.1 + right.1 - err;
        pieces.push((lo, mid, left.0, left.1));
        pieces.push((mid, hi, right.0, right.1));
        let sum: f64 = pieces.iter().map(|p| p.2).sum();
        if total_err <= 1e-15 * sum.abs() {
            break;
        }
    }
    pieces.iter().map(|p| p.2).sum()
}

/// Breakpoints that split `[lo, hi]` at the projection `c` and at `c ± k·y`.
fn breakpoints(lo: f64, hi: f64, c: f64, y: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for k in [0.0, -1.0, 1.0, -5.0, 5.0, -25.0, 25.0] {
        let p = c + k * y;
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, pts: &[f64], rel: f64) -> f64 {
    // Coarse pass for the scale, then a tolerance-controlled pass.
    let coarse: f64 = pts.windows(2).map(|w| gauss_kronrod(f, w[0], w[1]).0).sum();
    let tol = rel * coarse.abs().max(1e-300) / pts.len() as f64;
    pts.windows(2).map(|w| integrate(f, w[0], w[1], tol)).sum()
}

/// Potential of a unit-voltage rectangle by direct quadrature of
/// `(y / 2π) ∫∫ dA' / |r - r'|³`.
pub fn quadrature_potential(rect: &RectElectrode, x: f64, y: f64, z: f64, rel: f64) -> f64 {
    let xs = breakpoints(rect.x_lo, rect.x_hi, x, y);
    let zs = breakpoints(rect.z_lo, rect.z_hi, z, y);
    let inner = |xp: f64| {
        let a2 = (xp - x).powi(2) + y * y;
        let kernel = |zp: f64| {
            let r2 = a2 + (zp - z).powi(2);
            1.0 / (r2 * r2.sqrt())
        };
        integrate_pieces(&kernel, &zs, rel * 1e-2)
    };
    y / (2.0 * PI) * integrate_pieces(&inner, &xs, rel)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error in the check's own units.
    pub worst: f64,
    pub limit: f64,
    pub samples: usize,
}

impl Check {
    fn new(name: &'static str, worst: f64, limit: f64, samples: usize) -> Self {
        Self {
            name,
            passed: worst < limit,
            worst,
            limit,
            samples,
        }
    }
}

fn random_rect(rng: &mut ChaCha8Rng) -> RectElectrode {
    let x0 = rng.gen_range(-300.0..300.0);
    let z0 = rng.gen_range(-300.0..300.0);
    let w = rng.gen_range(10.0..400.0);
    let l = rng.gen_range(10.0..600.0);
    RectElectrode::new("oracle", (x0, x0 + w), (z0, z0 + l), Role::Dc).expect("positive area")
}

/// Closed form vs quadrature: 5 rectangles, 20 points each; worst relative error.
pub fn check_quadrature(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for _ in 0..5 {
        let rect = random_rect(&mut rng);
        let (cx, cz) = rect.center();
        for _ in 0..20 {
            let x = cx + rng.gen_range(-500.0..500.0);
            let z = cz + rng.gen_range(-500.0..500.0);
            let y = rng.gen_range(5.0..200.0);
            let closed = patch_potential(&rect, &FieldPoint::new(x, y, z)?)?;
            let quad = quadrature_potential(&rect, x, y, z, 1e-10);
            worst = worst.max(((closed - quad) / quad).abs());
            n += 1;
        }
    }
    Ok(Check::new("closed form vs quadrature (rel)", worst, 1e-6, n))
}

fn laplacian_layout() -> Result<crate::layout::ElectrodeLayout> {
    make_split(&SplitSpec::new(150.0, 300.0, 700.0, AsymmetricSpec::new(40.0, 400.0, 160.0)))
}

fn random_voltages(layout: &crate::layout::ElectrodeLayout, rng: &mut ChaCha8Rng) -> DcAssignment {
    let mut v = DcAssignment::new();
    for e in layout.electrodes() {
        v.set(e.name.clone(), rng.gen_range(-2.0..2.0));
    }
    v
}

/// 7-point finite-difference Laplacian of a random DC voltage set; worst |∇²Φ| in V/µm².
pub fn check_laplacian(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = laplacian_layout()?;
    let volts = random_voltages(&layout, &mut rng);
    let field = dc_superposition(&layout, &volts)?;
    let h = 1.0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = FieldPoint::new(
            rng.gen_range(-800.0..800.0),
            rng.gen_range(20.0..300.0),
            rng.gen_range(-1500.0..1500.0),
        )?;
        let centre = field.potential(&p)?;
        let mut lap = -6.0 * centre;
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = h;
            lap += field.potential(&p.offset(e))? + field.potential(&p.offset(-e))?;
        }
        worst = worst.max((lap / (h * h)).abs());
    }
    Ok(Check::new("finite-difference Laplacian (V/um^2)", worst, 1e-6, 100))
}

/// Potential just above the plane equals the local electrode voltage, over
/// the whole region at least 1 µm from any edge: 100 random points plus
/// probes exactly 1 µm either side of every edge midpoint.
pub fn check_boundary(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = laplacian_layout()?;
    let volts = random_voltages(&layout, &mut rng);
    let field = dc_superposition(&layout, &volts)?;
    let (xlo, xhi) = layout.x_extent();
    let y = 0.01;
    let inside = |x: f64, z: f64| layout.electrodes().iter().all(|e| e.edge_distance(x, z) >= 1.0 - 1e-9);

    let mut points = Vec::new();
    while points.len() < 100 {
        let x = rng.gen_range(xlo - 200.0..xhi + 200.0);
        let z = rng.gen_range(-2000.0..2000.0);
        if inside(x, z) {
            points.push((x, z));
        }
    }
    for e in layout.electrodes() {
        let (cx, cz) = e.center();
        for d in [-1.0, 1.0] {
            for p in [(e.x_lo + d, cz), (e.x_hi + d, cz), (cx, e.z_lo + d), (cx, e.z_hi + d)] {
                if inside(p.0, p.1) {
                    points.push(p);
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for &(x, z) in &points {
        let expected = layout
            .electrodes()
            .iter()
            .find(|e| e.contains(x, z))
            .map_or(0.0, |e| volts.get(&e.name));
        let got = field.potential(&FieldPoint::new(x, y, z)?)?;
        worst = worst.max((got - expected).abs());
    }
    Ok(Check::new("boundary values at y = 0.01 um (V)", worst, 1e-3, points.len()))
}

/// Scaling geometry and point by `s` leaves φ unchanged and scales ∇φ by 1/s.
pub fn check_scaling(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = 2.0;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let r = random_rect(&mut rng);
        let scaled = RectElectrode::new("scaled", (s * r.x_lo, s * r.x_hi), (s * r.z_lo, s * r.z_hi), Role::Dc)?;
        let p = FieldPoint::new(rng.gen_range(-400.0..400.0), rng.gen_range(5.0..200.0), rng.gen_range(-400.0..400.0))?;
        let ps = FieldPoint::new(s * p.x, s * p.y, s * p.z)?;
        let v = patch_potential(&r, &p)?;
        let vs = patch_potential(&scaled, &ps)?;
        let g = patch_gradient(&r, &p)?;
        let gs = patch_gradient(&scaled, &ps)?;
        worst = worst.max(((v - vs) / v).abs()).max((g / s - gs).norm() / gs.norm());
    }
    Ok(Check::new("geometry scaling (rel)", worst, 1e-9, 20))
}

pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        check_quadrature(seed)?,
        check_laplacian(seed)?,
        check_boundary(seed)?,
        check_scaling(seed)?,
    ])
}
