//! Asymptotic displacement fields in an unbounded isotropic elastic medium
//! containing a cloud of small traction-free spherical cavities.
//!
//! Each cavity is replaced by a strain dipole whose intensity solves a
//! block linear system coupling all cavities through the second
//! derivatives of the Kelvin solution. The solved intensities feed two
//! approximations: a far-field formula built from the dipole kernel, and a
//! uniform formula built from the closed-form dipole fields of the spheres.
//!
//! ```
//! use mesovoid::cloud::{generate_cloud, CloudSpec, Region, DEFAULT_GATE};
//! use mesovoid::elastic::{LameParams, Point};
//! use mesovoid::field::uniform_field;
//! use mesovoid::solver::{assemble_system, solve_coefficients, BackgroundField, ForcePair, SolveMethod};
//! use nalgebra::Vector3;
//!
//! let cloud = generate_cloud(&CloudSpec {
//!     region: Region { center: Point::zeros(), radius: 1.0 },
//!     n: 10,
//!     d: 0.1,
//!     eps: 0.01,
//!     seed: 7,
//!     gate_c: DEFAULT_GATE,
//!     params: LameParams::new(1.0, 1.0)?,
//! })?;
//! let bg = BackgroundField::new(vec![ForcePair::new(Point::new(3.0, 0.0, 0.0), Vector3::x(), 0.5, 1.0)?]);
//! let system = assemble_system(&cloud, &bg)?;
//! let solution = solve_coefficients(&system, SolveMethod::Dense)?;
//! let u = uniform_field(&Point::new(0.5, 0.5, 0.5), &cloud, &bg, &solution.coefficients())?;
//! assert!(u.norm().is_finite());
//! # Ok::<(), mesovoid::Error>(())
//! ```

pub mod cloud;
pub mod elastic;
pub mod error;
pub mod field;
pub mod io;
pub mod kernels;
pub mod solver;
pub mod sphere;
pub mod validation;

pub use cloud::{generate_cloud, validate_cloud, Cloud, CloudReport, CloudSpec, Region};
pub use elastic::{Displacement, LameParams, Point, StrainVector, StressVector};
pub use error::{Error, Result};
pub use field::{evaluate_grid, far_field, uniform_field, EvaluationGrid, FieldKind, FieldSample, SampleStatus};
pub use kernels::{gamma, gamma_dipole_kernel, gamma_hessian_kernel, FreeSpace, GreenKernel};
pub use solver::{
    assemble_system, background_eval, background_strain, solve_coefficients, system_diagnostics, BackgroundField,
    ForcePair, InteractionSystem, Solution, SolveMethod, SystemDiagnostics,
};
pub use sphere::{dipole_field, dipole_matrix, DipoleMatrix, Void};
