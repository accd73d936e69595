//! Structured triangulations of the model domains and their images.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;

use super::OracleError;
use crate::qcmap::{MapKind, MapSpec, Point2, QcMap, SourceDomain, SQUARE_HALF_SIDE};

/// Centre of the disc automorphism that clusters cardioid meshes toward the cusp preimage.
pub const CUSP_CLUSTERING: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    StructuredDisc,
    StructuredSquare,
    StructuredRectangle { width: f64, height: f64 },
    MappedImage { map: MapSpec },
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point2>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub provenance: Provenance,
}

fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_vertices(&self) -> Vec<Point2> {
        self.vertices
            .iter()
            .zip(&self.boundary)
            .filter(|(_, &b)| b)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Largest distance between two boundary vertices.
    pub fn diameter(&self) -> f64 {
        let b = self.boundary_vertices();
        let mut d: f64 = 0.0;
        for (i, &p) in b.iter().enumerate() {
            for &q in &b[i + 1..] {
                d = d.max(p.dist(q));
            }
        }
        d
    }

    /// Area of the convex hull of the boundary vertices.
    pub fn hull_area(&self) -> f64 {
        let hull = convex_hull(self.boundary_vertices());
        let n = hull.len();
        (0..n)
            .map(|i| {
                let (p, q) = (hull[i], hull[(i + 1) % n]);
                0.5 * (p.x * q.y - q.x * p.y)
            })
            .sum()
    }

    /// Polygonal convexity test with relative slack `1e-9` on the area.
    pub fn is_convex(&self) -> bool {
        self.hull_area() <= self.area() * (1.0 + 1e-9)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        for t in 0..self.triangles.len() {
            let a = self.triangle_area(t);
            if !(a > 0.0) {
                return Err(OracleError::DegenerateTriangle { index: t, area: a });
            }
        }
        Ok(())
    }

    /// Plain-text dump: `vertices N`, then `x y b` per vertex, then
    /// `triangles M`, then `i j k` per triangle.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "vertices {}", self.vertices.len())?;
        for (v, b) in self.vertices.iter().zip(&self.boundary) {
            writeln!(w, "{:e} {:e} {}", v.x, v.y, u8::from(*b))?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for [i, j, k] in &self.triangles {
            writeln!(w, "{i} {j} {k}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a vector");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn convex_hull(mut pts: Vec<Point2>) -> Vec<Point2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn check_resolution(resolution: usize) -> Result<(), OracleError> {
    if resolution < 4 {
        return Err(OracleError::InvalidInput(format!("resolution must be >= 4, got {resolution}")));
    }
    Ok(())
}

/// Unit disc: a centre vertex and `n` concentric rings, ring `i` holding `6i` vertices.
pub fn disc_mesh(n: usize) -> Result<Mesh, OracleError> {
    check_resolution(n)?;
    let mut vertices = vec![Point2::ORIGIN];
    let mut boundary = vec![false];
    let mut ring_start = vec![0usize];
    for i in 1..=n {
        ring_start.push(vertices.len());
        let m = 6 * i;
        let r = i as f64 / n as f64;
        for j in 0..m {
            vertices.push(Point2::from_polar(r, 2.0 * PI * j as f64 / m as f64));
            boundary.push(i == n);
        }
    }
    let mut triangles = Vec::new();
    for j in 0..6 {
        triangles.push([0, ring_start[1] + j, ring_start[1] + (j + 1) % 6]);
    }
    for i in 2..=n {
        let (m_in, m_out) = (6 * (i - 1), 6 * i);
        let inner = |a: usize| ring_start[i - 1] + a % m_in;
        let outer = |b: usize| ring_start[i] + b % m_out;
        let (mut a, mut b) = (0usize, 0usize);
        while a < m_in || b < m_out {
            // advance along whichever ring has the smaller next angle
            let next_in = (a + 1) as f64 / m_in as f64;
            let next_out = (b + 1) as f64 / m_out as f64;
            if b < m_out && (a >= m_in || next_out <= next_in) {
                triangles.push([inner(a), outer(b), outer(b + 1)]);
                b += 1;
            } else {
                triangles.push([inner(a), outer(b), inner(a + 1)]);
                a += 1;
            }
        }
    }
    Ok(Mesh {
        vertices,
        triangles,
        boundary,
        provenance: Provenance::StructuredDisc,
    })
}

fn grid_mesh(width: f64, height: f64, nx: usize, ny: usize) -> Mesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point2::new(
                width * (i as f64 / nx as f64 - 0.5),
                height * (j as f64 / ny as f64 - 0.5),
            ));
            boundary.push(i == 0 || i == nx || j == 0 || j == ny);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    Mesh {
        vertices,
        triangles,
        boundary,
        provenance: Provenance::StructuredRectangle { width, height },
    }
}

/// Centred square of side `√2` with `n` cells per side.
pub fn square_mesh(n: usize) -> Result<Mesh, OracleError> {
    check_resolution(n)?;
    let side = 2.0 * SQUARE_HALF_SIDE;
    let mut mesh = grid_mesh(side, side, n, n);
    mesh.provenance = Provenance::StructuredSquare;
    Ok(mesh)
}

/// Centred `width × height` rectangle; `n` cells along the shorter side.
pub fn rectangle_mesh(width: f64, height: f64, n: usize) -> Result<Mesh, OracleError> {
    check_resolution(n)?;
    if !(width > 0.0 && height > 0.0) {
        return Err(OracleError::InvalidInput(format!(
            "rectangle sides must be positive, got {width} x {height}"
        )));
    }
    let short = width.min(height);
    let nx = ((n as f64) * width / short).round() as usize;
    let ny = ((n as f64) * height / short).round() as usize;
    Ok(grid_mesh(width, height, nx, ny))
}

/// `(z - c)/(1 - c z)` for real `c`, a disc automorphism fixing `±1`.
fn disc_automorphism(z: Point2, c: f64) -> Point2 {
    let z = z.to_complex();
    let w = (z - c) / (Complex64::new(1.0, 0.0) - c * z);
    Point2::from_complex(w)
}

/// Structured mesh of the map's model domain pushed through the map.
pub fn build_mesh(map: &QcMap, resolution: usize) -> Result<Mesh, OracleError> {
    let mut mesh = match map.source_domain() {
        SourceDomain::UnitDisc => disc_mesh(resolution)?,
        SourceDomain::CenteredSquare => square_mesh(resolution)?,
    };
    if let MapKind::CardioidPower { .. } = map.kind() {
        for v in &mut mesh.vertices {
            *v = disc_automorphism(*v, CUSP_CLUSTERING);
        }
        for (v, &b) in mesh.vertices.iter_mut().zip(&mesh.boundary) {
            if b {
                *v = Point2::from_polar(1.0, v.y.atan2(v.x));
            }
        }
    }
    for v in &mut mesh.vertices {
        *v = map.evaluate(*v)?;
    }
    mesh.provenance = Provenance::MappedImage { map: MapSpec::from(map) };
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_mesh_counts_and_area() {
        let m = disc_mesh(8).unwrap();
        assert_eq!(m.vertex_count(), 1 + 3 * 8 * 9);
        assert_eq!(m.triangles.len(), 6 * 64);
        m.validate().unwrap();
        // inscribed 48-gon
        let n = 48.0;
        assert!((m.area() - 0.5 * n * (2.0 * PI / n).sin()).abs() < 1e-12);
        assert_eq!(m.boundary.iter().filter(|&&b| b).count(), 48);
    }

    #[test]
    fn square_and_rectangle() {
        let s = square_mesh(10).unwrap();
        assert!((s.area() - 2.0).abs() < 1e-12);
        assert!((s.diameter() - 2.0).abs() < 1e-12);
        let r = rectangle_mesh(2.0, 1.0, 5).unwrap();
        assert_eq!(r.vertex_count(), 11 * 6);
        assert!((r.area() - 2.0).abs() < 1e-12);
        assert!(r.is_convex());
    }

    #[test]
    fn resolution_floor() {
        assert!(disc_mesh(3).is_err());
        assert!(square_mesh(2).is_err());
    }

    #[test]
    fn cardioid_mesh_is_valid_and_nonconvex() {
        let m = build_mesh(&QcMap::cardioid(1.0).unwrap(), 16).unwrap();
        assert!(!m.is_convex());
        // the cusp preimage is a mesh vertex and maps to the origin
        assert!(m.vertices.iter().any(|v| v.norm() < 1e-12));
    }

    #[test]
    fn automorphism_fixes_boundary_and_clusters() {
        let w = disc_automorphism(Point2::new(-1.0, 0.0), 0.5);
        assert!((w.x + 1.0).abs() < 1e-15 && w.y.abs() < 1e-15);
        let w = disc_automorphism(Point2::ORIGIN, 0.5);
        assert!((w.x + 0.5).abs() < 1e-15);
        let w = disc_automorphism(Point2::from_polar(1.0, 1.0), 0.5);
        assert!((w.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dump_format() {
        let m = rectangle_mesh(1.0, 1.0, 4).unwrap();
        let text = m.to_text();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("vertices 25"));
        assert_eq!(text.lines().nth(26), Some("triangles 32"));
        assert_eq!(text.lines().count(), 1 + 25 + 1 + 32);
    }

    #[test]
    fn image_areas_match_the_jacobian_integral() {
        use crate::quad::{integrate, QuadratureRule};
        let maps = [
            QcMap::identity(),
            QcMap::ellipse(2.0, 1.0).unwrap(),
            QcMap::star(1.0).unwrap(),
            QcMap::cardioid(1.0).unwrap(),
        ];
        for map in maps {
            let rule = QuadratureRule::new(map.source_domain());
            let exact = integrate(|z| map.wirtinger(z).map(|w| w.jac).unwrap_or(0.0), &rule, &map.singular_points()).value;
            let area = build_mesh(&map, 32).unwrap().area();
            assert!((area - exact).abs() / exact < 0.01, "{}: {area} vs {exact}", map.kind_tag());
        }
        let ellipse = build_mesh(&QcMap::ellipse(2.0, 1.0).unwrap(), 32).unwrap().area();
        assert!((ellipse - 3.0 * std::f64::consts::PI).abs() < 0.01);
        // star(1) on the side-√2 square: 2∫_Q |z|² = 4/3
        let star = build_mesh(&QcMap::star(1.0).unwrap(), 32).unwrap().area();
        assert!((star - 4.0 / 3.0).abs() < 1e-3, "{star}");
    }
}

