//! Quasiconformal maps from a model domain onto a planar domain.
//!
//! Every map is presented in the model-to-domain direction `w = φ⁻¹(z)`,
//! which is the orientation all integrals of the bound pipeline are taken in.
//! Built-in maps carry exact Wirtinger derivatives; custom maps fall back to
//! central differences.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half side of the centered square model domain.
pub const SQUARE_HALF_SIDE: f64 = FRAC_1_SQRT_2;

const BOUNDARY_SLACK: f64 = 1e-12;
const DEFAULT_DISTORTION_DENSITY: usize = 48;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcMapError {
    #[error("point ({x}, {y}) lies outside the source domain {domain}")]
    PointOutsideSource { x: f64, y: f64, domain: SourceDomain },
    #[error("derivative is singular at ({x}, {y})")]
    DerivativeSingularity { x: f64, y: f64 },
    #[error("Jacobian is non-positive at {bad} of {total} distortion samples")]
    DegenerateJacobian { bad: usize, total: usize },
    #[error("invalid map parameters: {0}")]
    InvalidParameters(String),
    #[error("cannot parse map descriptor `{0}` (expected identity, ellipse:A,B, cardioid:k or star:k)")]
    Descriptor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDomain {
    UnitDisc,
    CenteredSquare,
}

impl SourceDomain {
    /// Closed-domain membership; boundary points are accepted.
    pub fn contains(self, z: Point2) -> bool {
        if !z.is_finite() {
            return false;
        }
        match self {
            SourceDomain::UnitDisc => z.x * z.x + z.y * z.y <= 1.0 + BOUNDARY_SLACK,
            SourceDomain::CenteredSquare => {
                z.x.abs() <= SQUARE_HALF_SIDE + BOUNDARY_SLACK
                    && z.y.abs() <= SQUARE_HALF_SIDE + BOUNDARY_SLACK
            }
        }
    }

    pub fn area(self) -> f64 {
        match self {
            SourceDomain::UnitDisc => PI,
            SourceDomain::CenteredSquare => 4.0 * SQUARE_HALF_SIDE * SQUARE_HALF_SIDE,
        }
    }
}

impl fmt::Display for SourceDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceDomain::UnitDisc => f.write_str("unit_disc"),
            SourceDomain::CenteredSquare => f.write_str("centered_square"),
        }
    }
}

/// Pointwise first-order data of a planar map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WirtingerData {
    pub wz: Complex64,
    pub wzbar: Complex64,
    /// Operator norm `|w_z| + |w_z̄|`.
    pub opnorm: f64,
    /// Jacobian `|w_z|² - |w_z̄|²`.
    pub jac: f64,
}

impl WirtingerData {
    pub fn new(wz: Complex64, wzbar: Complex64) -> Self {
        let (a, b) = (wz.norm(), wzbar.norm());
        Self {
            wz,
            wzbar,
            opnorm: a + b,
            jac: a * a - b * b,
        }
    }

    fn is_finite(&self) -> bool {
        self.wz.is_finite() && self.wzbar.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    Identity,
    /// `w = A z + B z̄`, the unit disc onto an ellipse with semi-axes `A+B`, `A-B`.
    EllipseAffine { a: f64, b: f64 },
    /// `w = (|z|^(k-1) z + 1)²`, the unit disc onto the cardioid.
    CardioidPower { k: f64 },
    /// `w = |z|^k z`, the centered square onto a star-shaped domain.
    StarPower { k: f64 },
    Custom,
}

type CustomFn = Arc<dyn Fn(Point2) -> Point2 + Send + Sync>;

#[derive(Clone)]
pub struct QcMap {
    kind: MapKind,
    source: SourceDomain,
    custom: Option<CustomFn>,
    custom_singular: Vec<Point2>,
}

impl fmt::Debug for QcMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QcMap")
            .field("kind", &self.kind)
            .field("source", &self.source)
            .finish()
    }
}

impl QcMap {
    pub fn identity() -> Self {
        Self::builtin(MapKind::Identity, SourceDomain::UnitDisc)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self, QcMapError> {
        if !(a.is_finite() && b.is_finite() && a > b && b >= 0.0) {
            return Err(QcMapError::InvalidParameters(format!(
                "ellipse needs A > B >= 0, got A={a}, B={b}"
            )));
        }
        Ok(Self::builtin(MapKind::EllipseAffine { a, b }, SourceDomain::UnitDisc))
    }

    pub fn cardioid(k: f64) -> Result<Self, QcMapError> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(QcMapError::InvalidParameters(format!(
                "cardioid needs k >= 1, got k={k}"
            )));
        }
        Ok(Self::builtin(MapKind::CardioidPower { k }, SourceDomain::UnitDisc))
    }

    pub fn star(k: f64) -> Result<Self, QcMapError> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(QcMapError::InvalidParameters(format!(
                "star needs k >= 0, got k={k}"
            )));
        }
        Ok(Self::builtin(MapKind::StarPower { k }, SourceDomain::CenteredSquare))
    }

    /// A user map given by forward evaluation only.
    pub fn custom<F>(source: SourceDomain, f: F) -> Self
    where
        F: Fn(Point2) -> Point2 + Send + Sync + 'static,
    {
        Self {
            kind: MapKind::Custom,
            source,
            custom: Some(Arc::new(f)),
            custom_singular: Vec::new(),
        }
    }

    /// Declares points where derivatives of a custom map vanish or blow up.
    pub fn with_singular_points(mut self, points: Vec<Point2>) -> Self {
        self.custom_singular = points;
        self
    }

    fn builtin(kind: MapKind, source: SourceDomain) -> Self {
        Self {
            kind,
            source,
            custom: None,
            custom_singular: Vec::new(),
        }
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn source_domain(&self) -> SourceDomain {
        self.source
    }

    pub fn params(&self) -> Vec<f64> {
        match self.kind {
            MapKind::Identity | MapKind::Custom => Vec::new(),
            MapKind::EllipseAffine { a, b } => vec![a, b],
            MapKind::CardioidPower { k } | MapKind::StarPower { k } => vec![k],
        }
    }

    pub fn kind_tag(&self) -> &'static str {
        match self.kind {
            MapKind::Identity => "identity",
            MapKind::EllipseAffine { .. } => "ellipse",
            MapKind::CardioidPower { .. } => "cardioid",
            MapKind::StarPower { .. } => "star",
            MapKind::Custom => "custom",
        }
    }

    /// `kind:params` text form; `None` for custom maps.
    pub fn descriptor(&self) -> Option<String> {
        match self.kind {
            MapKind::Identity => Some("identity".into()),
            MapKind::EllipseAffine { a, b } => Some(format!("ellipse:{a},{b}")),
            MapKind::CardioidPower { k } => Some(format!("cardioid:{k}")),
            MapKind::StarPower { k } => Some(format!("star:{k}")),
            MapKind::Custom => None,
        }
    }

    /// Points of the model domain where `|Dw|` or `J` degenerate.
    pub fn singular_points(&self) -> Vec<Point2> {
        match self.kind {
            MapKind::Identity | MapKind::EllipseAffine { .. } => Vec::new(),
            MapKind::CardioidPower { k } => {
                let mut pts = vec![Point2::new(-1.0, 0.0)];
                if k > 1.0 {
                    pts.push(Point2::ORIGIN);
                }
                pts
            }
            MapKind::StarPower { k } => {
                if k > 0.0 {
                    vec![Point2::ORIGIN]
                } else {
                    Vec::new()
                }
            }
            MapKind::Custom => self.custom_singular.clone(),
        }
    }

    pub fn evaluate(&self, z: Point2) -> Result<Point2, QcMapError> {
        self.check_source(z)?;
        Ok(self.eval_unchecked(z))
    }

    /// Evaluates the map formula without a domain check.
    pub fn eval_unchecked(&self, z: Point2) -> Point2 {
        let zc = z.to_complex();
        let w = match self.kind {
            MapKind::Identity => zc,
            MapKind::EllipseAffine { a, b } => zc * a + zc.conj() * b,
            MapKind::CardioidPower { k } => {
                let g = zc * z.norm().powf(k - 1.0) + 1.0;
                g * g
            }
            MapKind::StarPower { k } => zc * z.norm().powf(k),
            MapKind::Custom => {
                let f = self.custom.as_ref().expect("custom map without a function");
                return f(z);
            }
        };
        Point2::from_complex(w)
    }

    pub fn wirtinger(&self, z: Point2) -> Result<WirtingerData, QcMapError> {
        self.check_source(z)?;
        let data = match self.kind {
            MapKind::Identity => WirtingerData::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            MapKind::EllipseAffine { a, b } => {
                WirtingerData::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
            }
            MapKind::CardioidPower { k } => {
                let zc = z.to_complex();
                let r = z.norm();
                let g1 = zc * r.powf(k - 1.0) + 1.0;
                let wz = g1 * ((k + 1.0) * r.powf(k - 1.0));
                // |z|^(k-3) z² = |z|^(k-1) (z/|z|)², which tends to 0 at the origin
                let wzbar = if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let phase = zc / r;
                    g1 * phase * phase * ((k - 1.0) * r.powf(k - 1.0))
                };
                WirtingerData::new(wz, wzbar)
            }
            MapKind::StarPower { k } => {
                let zc = z.to_complex();
                let r = z.norm();
                let rk = r.powf(k);
                let wz = Complex64::new((0.5 * k + 1.0) * rk, 0.0);
                let wzbar = if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let phase = zc / r;
                    phase * phase * (0.5 * k * rk)
                };
                WirtingerData::new(wz, wzbar)
            }
            MapKind::Custom => self.wirtinger_numeric(z),
        };
        if data.is_finite() {
            Ok(data)
        } else {
            Err(QcMapError::DerivativeSingularity { x: z.x, y: z.y })
        }
    }

    /// Central-difference Wirtinger derivatives with relative step `1e-6·max(1, |z|)`.
    pub fn wirtinger_numeric(&self, z: Point2) -> WirtingerData {
        let h = 1e-6 * z.norm().max(1.0);
        let f = |p: Point2| self.eval_unchecked(p).to_complex();
        let wx = (f(Point2::new(z.x + h, z.y)) - f(Point2::new(z.x - h, z.y))) / (2.0 * h);
        let wy = (f(Point2::new(z.x, z.y + h)) - f(Point2::new(z.x, z.y - h))) / (2.0 * h);
        let i = Complex64::i();
        WirtingerData::new((wx - i * wy) * 0.5, (wx + i * wy) * 0.5)
    }

    /// Distortion coefficient `K`. Closed form for built-in maps, sampled
    /// maximum of `|Dw|²/J` for custom maps.
    pub fn distortion(&self) -> Result<f64, QcMapError> {
        match self.kind {
            MapKind::Identity => Ok(1.0),
            MapKind::EllipseAffine { a, b } => Ok((a + b) / (a - b)),
            MapKind::CardioidPower { k } => Ok(k),
            MapKind::StarPower { k } => Ok(k + 1.0),
            MapKind::Custom => Ok(self.sampled_distortion(DEFAULT_DISTORTION_DENSITY)?.value),
        }
    }

    /// Maximum of `|Dw|²/J` over an interior grid with `density` points per
    /// direction (polar for the disc, tensor for the square).
    pub fn sampled_distortion(&self, density: usize) -> Result<SampledDistortion, QcMapError> {
        let density = density.max(2);
        let samples = interior_grid(self.source, density);
        let mut worst: f64 = 1.0;
        let mut bad = 0;
        for &z in &samples {
            let d = self.wirtinger(z)?;
            if d.jac <= 0.0 {
                bad += 1;
                continue;
            }
            worst = worst.max(d.opnorm * d.opnorm / d.jac);
        }
        if bad > 0 {
            return Err(QcMapError::DegenerateJacobian {
                bad,
                total: samples.len(),
            });
        }
        Ok(SampledDistortion {
            value: worst,
            samples: samples.len(),
        })
    }

    fn check_source(&self, z: Point2) -> Result<(), QcMapError> {
        if self.source.contains(z) {
            Ok(())
        } else {
            Err(QcMapError::PointOutsideSource {
                x: z.x,
                y: z.y,
                domain: self.source,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledDistortion {
    pub value: f64,
    pub samples: usize,
}

/// Cell-centred sample points strictly inside a model domain.
pub fn interior_grid(domain: SourceDomain, density: usize) -> Vec<Point2> {
    let n = density.max(1);
    let mut pts = Vec::with_capacity(n * n);
    match domain {
        SourceDomain::UnitDisc => {
            for i in 0..n {
                let r = (i as f64 + 0.5) / n as f64;
                for j in 0..n {
                    let t = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                    pts.push(Point2::from_polar(r, t));
                }
            }
        }
        SourceDomain::CenteredSquare => {
            let h = SQUARE_HALF_SIDE;
            for i in 0..n {
                let x = -h + 2.0 * h * (i as f64 + 0.5) / n as f64;
                for j in 0..n {
                    let y = -h + 2.0 * h * (j as f64 + 0.5) / n as f64;
                    pts.push(Point2::new(x, y));
                }
            }
        }
    }
    pts
}

impl FromStr for QcMap {
    type Err = QcMapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (tag, rest) = match s.split_once(':') {
            Some((t, r)) => (t.trim(), Some(r)),
            None => (s, None),
        };
        let params: Vec<f64> = match rest {
            Some(r) => r
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| QcMapError::Descriptor(s.to_string()))?,
            None => Vec::new(),
        };
        match (tag.to_ascii_lowercase().as_str(), params.as_slice()) {
            ("identity" | "disc", []) => Ok(QcMap::identity()),
            ("ellipse", [a, b]) => QcMap::ellipse(*a, *b),
            ("cardioid", [k]) => QcMap::cardioid(*k),
            ("star", [k]) => QcMap::star(*k),
            _ => Err(QcMapError::Descriptor(s.to_string())),
        }
    }
}

/// Serializable descriptor of a map as it appears in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub kind: String,
    pub params: Vec<f64>,
    pub source_domain: SourceDomain,
}

impl From<&QcMap> for MapSpec {
    fn from(map: &QcMap) -> Self {
        Self {
            kind: map.kind_tag().to_string(),
            params: map.params(),
            source_domain: map.source_domain(),
        }
    }
}
