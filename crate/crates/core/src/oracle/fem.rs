//! Linear finite elements and the `p = 2` Neumann eigenproblem.

use super::mesh::Mesh;
use super::sparse::{dot, CsrMatrix, EnvelopeCholesky};
use super::OracleError;

/// Per-triangle area and barycentric gradients.
#[derive(Debug, Clone)]
pub struct Element {
    pub vertices: [usize; 3],
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

pub fn elements(mesh: &Mesh) -> Vec<Element> {
    mesh.triangles
        .iter()
        .map(|&[a, b, c]| {
            let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
            let det = (pb.x - pa.x) * (pc.y - pa.y) - (pb.y - pa.y) * (pc.x - pa.x);
            let grads = [
                [(pb.y - pc.y) / det, (pc.x - pb.x) / det],
                [(pc.y - pa.y) / det, (pa.x - pc.x) / det],
                [(pa.y - pb.y) / det, (pb.x - pa.x) / det],
            ];
            Element {
                vertices: [a, b, c],
                area: 0.5 * det,
                grads,
            }
        })
        .collect()
}

/// Stiffness and consistent mass matrices.
pub fn assemble(mesh: &Mesh) -> (CsrMatrix, CsrMatrix) {
    let els = elements(mesh);
    let mut k = Vec::with_capacity(9 * els.len());
    let mut m = Vec::with_capacity(9 * els.len());
    for e in &els {
        for i in 0..3 {
            for j in 0..3 {
                let g = e.grads[i][0] * e.grads[j][0] + e.grads[i][1] * e.grads[j][1];
                k.push((e.vertices[i], e.vertices[j], e.area * g));
                let mass = if i == j { e.area / 6.0 } else { e.area / 12.0 };
                m.push((e.vertices[i], e.vertices[j], mass));
            }
        }
    }
    let n = mesh.vertex_count();
    (CsrMatrix::from_triplets(n, &k), CsrMatrix::from_triplets(n, &m))
}

#[derive(Debug, Clone)]
pub struct P2Eigen {
    pub value: f64,
    /// Mass-normalized eigenvector with zero mean.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

const MAX_INVERSE_ITERATIONS: usize = 2000;
const EIGEN_TOLERANCE: f64 = 1e-12;

/// Assembled matrices of a mesh plus a factorization of `K - σM` for a
/// small negative shift `σ`, used both for shift-invert iteration and as
/// an H¹ preconditioner.
pub struct FemSystem {
    pub elements: Vec<Element>,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub shift: f64,
    factor: EnvelopeCholesky,
    ones_mass: Vec<f64>,
    total_mass: f64,
}

impl FemSystem {
    pub fn new(mesh: &Mesh) -> Result<Self, OracleError> {
        mesh.validate()?;
        let (stiffness, mass) = assemble(mesh);
        let n = mesh.vertex_count();
        let shift = -0.05 * 4.0 * std::f64::consts::PI / mesh.area();
        let factor = EnvelopeCholesky::factor(&stiffness.combine(1.0, &mass, -shift))
            .ok_or_else(|| OracleError::SolverFailure("shifted stiffness matrix is not positive definite".into()))?;
        let ones_mass = mass.apply(&vec![1.0; n]);
        let total_mass = ones_mass.iter().sum();
        Ok(Self {
            elements: elements(mesh),
            stiffness,
            mass,
            shift,
            factor,
            ones_mass,
            total_mass,
        })
    }

    pub fn dim(&self) -> usize {
        self.ones_mass.len()
    }

    /// Solves `(K - σM) x = b` in place.
    pub fn precondition(&self, b: &mut [f64]) {
        self.factor.solve_in_place(b);
    }

    /// Removes the mass-weighted mean.
    pub fn deflate_constant(&self, x: &mut [f64]) {
        let c = dot(&self.ones_mass, x) / self.total_mass;
        for v in x.iter_mut() {
            *v -= c;
        }
    }

    /// Smallest nonzero eigenvalue of `K x = μ M x` by shift-invert subspace
    /// iteration with Rayleigh–Ritz and the constants deflated. The block
    /// handles (nearly) repeated eigenvalues from symmetric domains.
    pub fn p2_eigen(&self, start: Vec<f64>) -> Result<P2Eigen, OracleError> {
        let n = self.dim();
        let mut block: Vec<Vec<f64>> = (0..BLOCK)
            .map(|j| {
                start
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v * (1.0 + 0.1 * ((i * (j + 3)) % 7) as f64) + if j == 0 { 0.0 } else { ((i * (2 * j + 1)) % 11) as f64 / 11.0 })
                    .collect()
            })
            .collect();
        let mut lambda = f64::INFINITY;
        for it in 1..=MAX_INVERSE_ITERATIONS {
            for x in &mut block {
                let mut y = self.mass.apply(x);
                self.precondition(&mut y);
                self.deflate_constant(&mut y);
                *x = y;
            }
            let (values, next_block) = self.rayleigh_ritz(&block)?;
            block = next_block;
            let next = values[0];
            if (next - lambda).abs() <= EIGEN_TOLERANCE * next.abs() && it > 3 {
                let mut vector = block.swap_remove(0);
                let norm = self.mass.quad_form(&vector).sqrt();
                for v in &mut vector {
                    *v /= norm;
                }
                debug_assert_eq!(vector.len(), n);
                return Ok(P2Eigen {
                    value: next,
                    vector,
                    iterations: it,
                });
            }
            lambda = next;
        }
        Err(OracleError::SolverFailure(format!(
            "subspace iteration did not converge in {MAX_INVERSE_ITERATIONS} steps"
        )))
    }

    /// Ritz values (ascending) and mass-orthonormal Ritz vectors of the block.
    fn rayleigh_ritz(&self, block: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>), OracleError> {
        let b = block.len();
        let kx: Vec<Vec<f64>> = block.iter().map(|x| self.stiffness.apply(x)).collect();
        let mx: Vec<Vec<f64>> = block.iter().map(|x| self.mass.apply(x)).collect();
        let mut kr = vec![vec![0.0; b]; b];
        let mut mr = vec![vec![0.0; b]; b];
        for i in 0..b {
            for j in 0..b {
                kr[i][j] = dot(&block[i], &kx[j]);
                mr[i][j] = dot(&block[i], &mx[j]);
            }
        }
        let (values, coeffs) = generalized_symmetric_eigen(&kr, &mr)
            .ok_or_else(|| OracleError::SolverFailure("subspace lost rank".into()))?;
        let n = block[0].len();
        let vectors = (0..b)
            .map(|c| {
                let mut v = vec![0.0; n];
                for (x, &w) in block.iter().zip(&coeffs[c]) {
                    for (vi, xi) in v.iter_mut().zip(x) {
                        *vi += w * xi;
                    }
                }
                v
            })
            .collect();
        Ok((values, vectors))
    }
}

const BLOCK: usize = 4;

/// Solves the dense `A c = θ B c` with `B` positive definite; eigenvalues
/// ascending, eigenvectors `B`-orthonormal, by Cholesky reduction and cyclic Jacobi.
fn generalized_symmetric_eigen(a: &[Vec<f64>], b: &[Vec<f64>]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = b[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 1e-14 * b[i][i].abs()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // C = L^-1 A L^-T
    let solve_lower = |v: &[f64]| {
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = (v[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
        }
        y
    };
    let cols: Vec<Vec<f64>> = (0..n).map(|j| solve_lower(&(0..n).map(|i| a[i][j]).collect::<Vec<_>>())).collect();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        let row = solve_lower(&(0..n).map(|j| cols[j][i]).collect::<Vec<_>>());
        c[i] = row;
    }
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (c[i][j] + c[j][i]);
            c[i][j] = m;
            c[j][i] = m;
        }
    }
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| c[i][j] * c[i][j]).sum();
        if off <= 1e-30 * (0..n).map(|i| c[i][i] * c[i][i]).sum::<f64>() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if c[p][q] == 0.0 {
                    continue;
                }
                let theta = (c[q][q] - c[p][p]) / (2.0 * c[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (ckp, ckq) = (c[k][p], c[k][q]);
                    c[k][p] = cs * ckp - sn * ckq;
                    c[k][q] = sn * ckp + cs * ckq;
                }
                for k in 0..n {
                    let (cpk, cqk) = (c[p][k], c[q][k]);
                    c[p][k] = cs * cpk - sn * cqk;
                    c[q][k] = sn * cpk + cs * cqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = cs * vp - sn * vq;
                    row[q] = sn * vp + cs * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| c[i][i].total_cmp(&c[j][j]));
    let values = order.iter().map(|&i| c[i][i]).collect();
    // back-transform y -> L^-T y
    let vectors = order
        .iter()
        .map(|&k| {
            let y: Vec<f64> = (0..n).map(|i| v[i][k]).collect();
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                x[i] = (y[i] - (i + 1..n).map(|m| l[m][i] * x[m]).sum::<f64>()) / l[i][i];
            }
            x
        })
        .collect();
    Some((values, vectors))
}

/// Deterministic start with a component along every low mode.
pub fn default_start(mesh: &Mesh) -> Vec<f64> {
    mesh.vertices
        .iter()
        .map(|v| v.x + 0.7 * v.y + 0.3 * v.x * v.y + 0.1 * v.x * v.x)
        .collect()
}

pub fn neumann_eigen_p2_full(mesh: &Mesh) -> Result<P2Eigen, OracleError> {
    FemSystem::new(mesh)?.p2_eigen(default_start(mesh))
}

/// Smallest nonzero Neumann eigenvalue of the discrete Laplacian.
pub fn neumann_eigen_p2(mesh: &Mesh) -> Result<f64, OracleError> {
    Ok(neumann_eigen_p2_full(mesh)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::mesh::{disc_mesh, rectangle_mesh};

    #[test]
    fn stiffness_annihilates_constants_and_mass_sums_to_area() {
        let mesh = disc_mesh(6).unwrap();
        let (k, m) = assemble(&mesh);
        let ones = vec![1.0; mesh.vertex_count()];
        assert!(k.apply(&ones).iter().all(|v| v.abs() < 1e-12));
        assert!((m.quad_form(&ones) - mesh.area()).abs() < 1e-12);
    }

    #[test]
    fn stiffness_reproduces_linear_energy() {
        let mesh = rectangle_mesh(2.0, 1.0, 6).unwrap();
        let (k, _) = assemble(&mesh);
        let u: Vec<f64> = mesh.vertices.iter().map(|v| 3.0 * v.x - v.y).collect();
        assert!((k.quad_form(&u) - 10.0 * 2.0).abs() < 1e-10);
    }

    #[test]
    fn unit_square_first_mode() {
        let mesh = rectangle_mesh(1.0, 1.0, 24).unwrap();
        let mu = neumann_eigen_p2(&mesh).unwrap();
        let exact = std::f64::consts::PI.powi(2);
        assert!((mu - exact).abs() / exact < 0.01, "{mu}");
    }

    /// `J_n` from its power series; adequate for `x < 5`.
    fn bessel_j(n: i32, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(n) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for m in 1..60 {
            term *= -(x * x / 4.0) / (m as f64 * (m + n) as f64);
            sum += term;
        }
        sum
    }

    /// First positive zero of `J₁'` by bisection.
    fn bessel_j1_prime_root() -> f64 {
        let d = |x: f64| 0.5 * (bessel_j(0, x) - bessel_j(2, x));
        let (mut a, mut b) = (1.0, 3.0);
        assert!(d(a) > 0.0 && d(b) < 0.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if d(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn bessel_oracle_root() {
        assert!((bessel_j1_prime_root() - 1.841_183_781_340_659).abs() < 1e-12);
    }

    #[test]
    fn unit_disc_first_mode() {
        let exact = bessel_j1_prime_root().powi(2);
        let mu = neumann_eigen_p2(&disc_mesh(32).unwrap()).unwrap();
        assert!((mu - exact).abs() / exact < 0.01, "{mu} vs {exact}");
    }

    #[test]
    fn rectangle_first_mode() {
        let mu = neumann_eigen_p2(&rectangle_mesh(2.0, 1.0, 16).unwrap()).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 4.0;
        assert!((mu - exact).abs() / exact < 0.01, "{mu}");
    }

    #[test]
    fn eigenvector_is_mass_normalized_and_mean_free() {
        let mesh = disc_mesh(12).unwrap();
        let sys = FemSystem::new(&mesh).unwrap();
        let e = sys.p2_eigen(default_start(&mesh)).unwrap();
        assert!((sys.mass.quad_form(&e.vector) - 1.0).abs() < 1e-10);
        let mean = dot(&sys.mass.apply(&vec![1.0; mesh.vertex_count()]), &e.vector);
        assert!(mean.abs() < 1e-10);
        let rq = sys.stiffness.quad_form(&e.vector);
        assert!((rq - e.value).abs() < 1e-8 * e.value);
    }

    #[test]
    fn refinement_shrinks_the_error() {
        let exact_disc = bessel_j1_prime_root().powi(2);
        let exact_square = std::f64::consts::PI.powi(2);
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for n in [4, 8, 16, 32] {
            let d = (neumann_eigen_p2(&disc_mesh(n).unwrap()).unwrap() - exact_disc).abs();
            let s = (neumann_eigen_p2(&rectangle_mesh(1.0, 1.0, n).unwrap()).unwrap() - exact_square).abs();
            assert!(d < prev.0 && s < prev.1, "n={n}: {d} {s}");
            prev = (d, s);
        }
    }

    #[test]
    fn small_generalized_eigenproblem() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = vec![vec![2.0, 0.0], vec![0.0, 1.0]];
        let (vals, vecs) = generalized_symmetric_eigen(&a, &b).unwrap();
        // det(A - θB) = 2θ² - 8θ + 5
        let disc = (64.0f64 - 40.0).sqrt();
        assert!((vals[0] - (8.0 - disc) / 4.0).abs() < 1e-12);
        assert!((vals[1] - (8.0 + disc) / 4.0).abs() < 1e-12);
        for (c, &t) in vecs.iter().zip(&vals) {
            let bn = 2.0 * c[0] * c[0] + c[1] * c[1];
            assert!((bn - 1.0).abs() < 1e-12);
            let r0 = (2.0 - 2.0 * t) * c[0] + c[1];
            assert!(r0.abs() < 1e-12);
        }
    }
}
