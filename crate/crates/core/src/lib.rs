//! Lower bounds for the first nontrivial Neumann p-Laplace eigenvalue of
//! planar domains given as quasiconformal images of the unit disc (or of a
//! centered square), together with a finite element oracle that checks every
//! bound against a discretized eigenvalue.

pub mod bounds;
pub mod cli;
pub mod oracle;
pub mod qcmap;
pub mod quad;
pub mod regularity;

pub use bounds::{BoundReport, BoundsError};
pub use oracle::{Mesh, OracleError};

pub use qcmap::{MapKind, Point2, QcMap, QcMapError, SourceDomain, WirtingerData};
pub use quad::{IntegralResult, QuadratureRule, Status};
pub use regularity::{ExponentContext, Interval, Mode, RegularityError, Theorem};
