//! Design toolkit for surface (planar) Paul ion traps.
//!
//! Electrodes are rectangles in the plane `y = 0`; everything outside an
//! electrode is treated as grounded (gapless-plane approximation), which
//! makes the electrostatics closed-form. On top of the field core the crate
//! computes RF pseudopotential metrics (ion height, secular frequencies,
//! Mathieu `q`, depth, principal-axis tilt), analyses the axial DC potential
//! used for chain splitting, and runs grid-search design studies.
//!
//! Units throughout: lengths in µm, voltages in V, frequencies in MHz, ion
//! mass in atomic mass units, charge in elementary charges, energies in eV.
//!
//! ```
//! use surftrap::layout::{make_asymmetric, AsymmetricSpec, DEFAULT_AXIAL_LENGTH};
//! use surftrap::pseudo::{metrics, IonSpecies, RfDrive};
//!
//! let layout = make_asymmetric(&AsymmetricSpec::new(40.0, 400.0, 160.0), DEFAULT_AXIAL_LENGTH).unwrap();
//! let m = metrics(&layout, &RfDrive::new(100.0, 22.0), &IonSpecies::yb171()).unwrap();
//! assert!((m.h_um - 80.0).abs() < 2.0);
//! ```

pub mod axial;
pub mod cli;
pub mod error;
pub mod field;
pub mod jet;
pub mod layout;
pub mod optimize;
pub mod oracle;
pub mod pseudo;
pub mod svg;

pub use error::{Error, Result};
