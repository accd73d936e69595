//! Finite element reference values for the Neumann p-Laplace eigenvalue and
//! the classical two-dimensional eigenvalue inequalities.

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{payne_weinberger, polya_upper};
use crate::qcmap::QcMapError;

pub mod fem;
pub mod mesh;
pub mod plaplace;
pub mod sparse;

pub use fem::{neumann_eigen_p2, neumann_eigen_p2_full, FemSystem, P2Eigen};
pub use mesh::{build_mesh, disc_mesh, rectangle_mesh, square_mesh, Mesh, Provenance};
pub use plaplace::{neumann_eigen_p, neumann_eigen_p_full, DescentOptions, PEigen, StartOutcome};

/// Default discretization slack for the classical checks.
pub const CLASSICAL_SLACK: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("triangle {index} has non-positive area {area:e}; refine the mesh")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("classical check failed: {0}")]
    CheckFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Map(#[from] QcMapError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalCheck {
    pub name: &'static str,
    pub statement: &'static str,
    pub applicable: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates the Payne–Weinberger lower bound (convex meshes only) and
/// the Polya upper bound against a computed `μ₂`, with relative `slack`.
pub fn evaluate_classical_checks(mesh: &Mesh, mu2: f64, slack: f64) -> Result<Vec<ClassicalCheck>, OracleError> {
    let bad = |e: crate::bounds::BoundsError| OracleError::InvalidInput(e.to_string());
    let diameter = mesh.diameter();
    let area = mesh.area();
    let convex = mesh.is_convex();
    let pw = payne_weinberger(diameter).map_err(bad)?;
    let polya = polya_upper(area).map_err(bad)?;
    Ok(vec![
        ClassicalCheck {
            name: "payne_weinberger",
            statement: "pi^2/diam^2 <= mu2 (convex)",
            applicable: convex,
            lhs: pw,
            rhs: mu2 * (1.0 + slack),
            holds: !convex || pw <= mu2 * (1.0 + slack),
        },
        ClassicalCheck {
            name: "polya",
            statement: "mu2 <= 4 pi / area",
            applicable: true,
            lhs: mu2,
            rhs: polya * (1.0 + slack),
            holds: mu2 <= polya * (1.0 + slack),
        },
    ])
}

/// [`evaluate_classical_checks`] that fails on the first broken inequality.
pub fn classical_checks(mesh: &Mesh, mu2: f64, slack: f64) -> Result<Vec<ClassicalCheck>, OracleError> {
    let checks = evaluate_classical_checks(mesh, mu2, slack)?;
    if let Some(c) = checks.iter().find(|c| !c.holds) {
        return Err(OracleError::CheckFailed(format!(
            "{}: {} vs {} ({})",
            c.name, c.lhs, c.rhs, c.statement
        )));
    }
    Ok(checks)
}
