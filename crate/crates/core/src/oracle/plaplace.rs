//! Discrete p-Rayleigh quotient `∫|∇u|^p / min_c ∫|u-c|^p` and its
//! minimization by preconditioned nonlinear conjugate gradients.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::fem::{default_start, Element, FemSystem};
use super::mesh::Mesh;
use super::sparse::dot;
use super::OracleError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentOptions {
    pub seed: u64,
    pub random_starts: usize,
    /// Regularization in `(|∇u|² + ε²)^(p/2)`.
    pub epsilon: f64,
    /// Target for the relative dual-norm gradient residual.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            random_starts: 8,
            epsilon: 1e-8,
            tolerance: 1e-6,
            max_iterations: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartOutcome {
    pub start: String,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PEigen {
    pub p: f64,
    pub value: f64,
    pub residual: f64,
    /// Minimizer normalized to `min_c ∫|u-c|^p = 1`.
    #[serde(skip)]
    pub field: Vec<f64>,
    pub c_star: f64,
    pub starts: Vec<StartOutcome>,
    /// Largest minus smallest value over the converged starts.
    pub spread: f64,
    pub options: DescentOptions,
}

/// The quotient on a fixed mesh. The denominator uses the edge-midpoint
/// rule (exact for quadratics, so `p = 2` reproduces the consistent mass matrix).
pub struct Rayleigh<'a> {
    elements: &'a [Element],
    /// `(a, b, w)`: midpoint of edge `ab` with weight `w`.
    midpoints: Vec<(usize, usize, f64)>,
    p: f64,
    eps2: f64,
    n: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub c: f64,
}

impl<'a> Rayleigh<'a> {
    pub fn new(system: &'a FemSystem, p: f64, epsilon: f64) -> Self {
        let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in &system.elements {
            let v = e.vertices;
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                let key = (v[i].min(v[j]), v[i].max(v[j]));
                *edges.entry(key).or_insert(0.0) += e.area / 3.0;
            }
        }
        Self {
            elements: &system.elements,
            midpoints: edges.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
            p,
            eps2: epsilon * epsilon,
            n: system.dim(),
        }
    }

    fn grad_of(e: &Element, u: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for i in 0..3 {
            g[0] += u[e.vertices[i]] * e.grads[i][0];
            g[1] += u[e.vertices[i]] * e.grads[i][1];
        }
        g
    }

    pub fn numerator(&self, u: &[f64]) -> f64 {
        let half_p = 0.5 * self.p;
        self.elements
            .iter()
            .map(|e| {
                let g = Self::grad_of(e, u);
                e.area * (g[0] * g[0] + g[1] * g[1] + self.eps2).powf(half_p)
            })
            .sum()
    }

    fn midpoint_values(&self, u: &[f64]) -> Vec<f64> {
        self.midpoints.iter().map(|&(a, b, _)| 0.5 * (u[a] + u[b])).collect()
    }

    /// `sign(x)|x|^(p-1)`
    fn signed_power(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            x.signum() * x.abs().powf(self.p - 1.0)
        }
    }

    /// `argmin_c Σ w |v - c|^p` by safeguarded Newton on the monotone derivative.
    fn optimal_shift(&self, v: &[f64], guess: Option<f64>) -> f64 {
        let (mut lo, mut hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        if !(hi > lo) {
            return lo;
        }
        let phi = |c: f64| -> (f64, f64, f64) {
            let (mut f, mut df, mut scale) = (0.0, 0.0, 0.0);
            for (&(_, _, w), &x) in self.midpoints.iter().zip(v) {
                let d = x - c;
                let s = self.signed_power(d);
                f += w * s;
                scale += w * s.abs();
                if d != 0.0 {
                    df -= w * (self.p - 1.0) * d.abs().powf(self.p - 2.0);
                } else {
                    df = f64::NEG_INFINITY;
                }
            }
            (f, df, scale)
        };
        let mut c = guess.filter(|g| *g > lo && *g < hi).unwrap_or_else(|| {
            let wsum: f64 = self.midpoints.iter().map(|m| m.2).sum();
            self.midpoints.iter().zip(v).map(|(m, x)| m.2 * x).sum::<f64>() / wsum
        });
        let width = hi - lo;
        for _ in 0..200 {
            let (f, df, scale) = phi(c);
            if f.abs() <= 1e-15 * scale {
                break;
            }
            // phi is decreasing in c
            if f > 0.0 {
                lo = c;
            } else {
                hi = c;
            }
            if hi - lo <= 4.0 * f64::EPSILON * width.max(c.abs()) {
                break;
            }
            let newton = c - f / df;
            c = if df.is_finite() && df < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        c
    }

    fn denominator_at(&self, v: &[f64], c: f64) -> f64 {
        self.midpoints
            .iter()
            .zip(v)
            .map(|(&(_, _, w), &x)| w * (x - c).abs().powf(self.p))
            .sum()
    }

    pub fn evaluate(&self, u: &[f64], guess: Option<f64>) -> Evaluation {
        let v = self.midpoint_values(u);
        let c = self.optimal_shift(&v, guess);
        let numerator = self.numerator(u);
        let denominator = self.denominator_at(&v, c);
        Evaluation {
            value: numerator / denominator,
            numerator,
            denominator,
            c,
        }
    }

    /// Gradient of the quotient at `u`; `ev` must be `evaluate(u)`.
    pub fn gradient(&self, u: &[f64], ev: &Evaluation) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        let p = self.p;
        for e in self.elements {
            let gr = Self::grad_of(e, u);
            let coef = e.area * p * (gr[0] * gr[0] + gr[1] * gr[1] + self.eps2).powf(0.5 * p - 1.0);
            for i in 0..3 {
                g[e.vertices[i]] += coef * (gr[0] * e.grads[i][0] + gr[1] * e.grads[i][1]);
            }
        }
        let r = ev.value;
        for &(a, b, w) in &self.midpoints {
            let d = self.signed_power(0.5 * (u[a] + u[b]) - ev.c);
            let t = -r * w * p * d * 0.5;
            g[a] += t;
            g[b] += t;
        }
        for x in &mut g {
            *x /= ev.denominator;
        }
        g
    }

    /// Shifts by the optimal constant and scales to unit denominator.
    pub fn normalize(&self, u: &mut [f64], ev: &Evaluation) -> f64 {
        let s = ev.denominator.powf(1.0 / self.p);
        for x in u.iter_mut() {
            *x = (*x - ev.c) / s;
        }
        s
    }
}

struct Descent<'a> {
    rayleigh: Rayleigh<'a>,
    system: &'a FemSystem,
    opts: DescentOptions,
}

struct Run {
    field: Vec<f64>,
    value: f64,
    c: f64,
    residual: f64,
    iterations: usize,
}

const ARMIJO: f64 = 1e-4;
const STALL_WINDOW: usize = 200;

impl Descent<'_> {
    fn residual(&self, g: &[f64], z: &[f64], value: f64) -> f64 {
        dot(g, z).max(0.0).sqrt() / value
    }

    /// Parabolic step from the value and slope at 0 and one trial value,
    /// falling back to Armijo backtracking.
    fn line_search(
        &self,
        u: &[f64],
        d: &[f64],
        ev: &Evaluation,
        slope: f64,
        t0: f64,
    ) -> Option<(Vec<f64>, Evaluation, f64)> {
        let ray = &self.rayleigh;
        let at = |t: f64| {
            let trial: Vec<f64> = u.iter().zip(d).map(|(a, b)| a + t * b).collect();
            let tev = ray.evaluate(&trial, Some(ev.c));
            (trial, tev)
        };
        let armijo = |t: f64, v: f64| v.is_finite() && v <= ev.value + ARMIJO * t * slope;
        let (trial, tev) = at(t0);
        let curvature = tev.value - ev.value - slope * t0;
        let mut best = armijo(t0, tev.value).then_some((trial, tev, t0));
        if curvature > 0.0 && tev.value.is_finite() {
            let tq = (-slope * t0 * t0 / (2.0 * curvature)).clamp(0.05 * t0, 20.0 * t0);
            let (qtrial, qev) = at(tq);
            if armijo(tq, qev.value) && best.as_ref().is_none_or(|b| qev.value < b.1.value) {
                best = Some((qtrial, qev, tq));
            }
        } else if best.is_some() {
            let te = 4.0 * t0;
            let (etrial, eev) = at(te);
            if armijo(te, eev.value) && eev.value < best.as_ref().map_or(f64::INFINITY, |b| b.1.value) {
                best = Some((etrial, eev, te));
            }
        }
        if best.is_some() {
            return best;
        }
        let mut t = 0.5 * t0;
        for _ in 0..60 {
            let (trial, tev) = at(t);
            if armijo(t, tev.value) {
                return Some((trial, tev, t));
            }
            t *= 0.5;
        }
        None
    }

    fn run(&self, start: Vec<f64>) -> Run {
        let ray = &self.rayleigh;
        let mut u = start;
        let mut ev = ray.evaluate(&u, None);
        ray.normalize(&mut u, &ev);
        ev = ray.evaluate(&u, None);
        let mut g = ray.gradient(&u, &ev);
        let mut z = g.clone();
        self.system.precondition(&mut z);
        let mut d: Vec<f64> = z.iter().map(|x| -x).collect();
        let mut steepest = true;
        let mut step = 1.0;
        let mut residual = self.residual(&g, &z, ev.value);
        let mut history = vec![ev.value];
        let mut it = 0;
        while it < self.opts.max_iterations && residual > self.opts.tolerance {
            it += 1;
            let mut slope = dot(&g, &d);
            if !(slope < 0.0) {
                d = z.iter().map(|x| -x).collect();
                steepest = true;
                slope = dot(&g, &d);
            }
            let Some((mut trial, tev, t)) = self.line_search(&u, &d, &ev, slope, step) else {
                if steepest {
                    break;
                }
                d = z.iter().map(|x| -x).collect();
                steepest = true;
                continue;
            };
            step = t;
            let s = ray.normalize(&mut trial, &tev);
            u = trial;
            ev = ray.evaluate(&u, Some(0.0));
            let g_new = ray.gradient(&u, &ev);
            let mut z_new = g_new.clone();
            self.system.precondition(&mut z_new);
            let denom = dot(&g, &z);
            let beta = if denom > 0.0 {
                ((dot(&g_new, &z_new) - dot(&g_new, &z)) / denom).max(0.0)
            } else {
                0.0
            };
            d = z_new.iter().zip(&d).map(|(zn, dp)| -zn + beta * dp / s).collect();
            steepest = beta == 0.0;
            g = g_new;
            z = z_new;
            residual = self.residual(&g, &z, ev.value);
            history.push(ev.value);
            if history.len() > STALL_WINDOW {
                let old = history[history.len() - 1 - STALL_WINDOW];
                if old - ev.value <= 1e-14 * ev.value {
                    break;
                }
            }
        }
        Run {
            field: u,
            value: ev.value,
            c: ev.c,
            residual,
            iterations: it,
        }
    }
}

fn random_start(mesh: &Mesh, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = mesh.vertex_count() as f64;
    let (cx, cy) = mesh
        .vertices
        .iter()
        .fold((0.0, 0.0), |(x, y), v| (x + v.x / n, y + v.y / n));
    let scale = 0.5 * mesh.diameter().max(f64::MIN_POSITIVE);
    let mut coef = [[0.0; 4]; 4];
    for (i, row) in coef.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            if i + j <= 3 && i + j > 0 {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
    }
    mesh.vertices
        .iter()
        .map(|v| {
            let (x, y) = ((v.x - cx) / scale, (v.y - cy) / scale);
            let mut s = 0.0;
            for (i, row) in coef.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    s += c * x.powi(i as i32) * y.powi(j as i32);
                }
            }
            s
        })
        .collect()
}

/// Minimizes the discrete p-Rayleigh quotient from the `p = 2` eigenvector
/// and `opts.random_starts` random cubic polynomials; returns the best run.
pub fn neumann_eigen_p_full(mesh: &Mesh, p: f64, opts: &DescentOptions) -> Result<PEigen, OracleError> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(OracleError::InvalidInput(format!("p must lie in (1, 2], got {p}")));
    }
    let system = FemSystem::new(mesh)?;
    let eigen = system.p2_eigen(default_start(mesh))?;
    let descent = Descent {
        rayleigh: Rayleigh::new(&system, p, opts.epsilon),
        system: &system,
        opts: *opts,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![("eigenvector".to_string(), eigen.vector)];
    for i in 0..opts.random_starts {
        starts.push((format!("random-{i}"), random_start(mesh, &mut rng)));
    }
    let mut outcomes = Vec::new();
    let mut best: Option<Run> = None;
    for (label, start) in starts {
        let run = descent.run(start);
        let converged = run.residual <= opts.tolerance;
        outcomes.push(StartOutcome {
            start: label,
            value: run.value,
            residual: run.residual,
            iterations: run.iterations,
            converged,
        });
        if converged && best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let Some(best) = best else {
        let worst = outcomes.iter().map(|o| o.residual).fold(f64::INFINITY, f64::min);
        return Err(OracleError::SolverFailure(format!(
            "descent stalled above tolerance {} in every start (best residual {worst:e})",
            opts.tolerance
        )));
    };
    let conv: Vec<f64> = outcomes.iter().filter(|o| o.converged).map(|o| o.value).collect();
    let spread = conv.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - conv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PEigen {
        p,
        value: best.value,
        residual: best.residual,
        field: best.field,
        c_star: best.c,
        starts: outcomes,
        spread,
        options: *opts,
    })
}

/// First nonzero Neumann p-eigenvalue estimate with default options.
pub fn neumann_eigen_p(mesh: &Mesh, p: f64) -> Result<f64, OracleError> {
    Ok(neumann_eigen_p_full(mesh, p, &DescentOptions::default())?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::mesh::{disc_mesh, rectangle_mesh};
    use crate::oracle::neumann_eigen_p2;

    #[test]
    fn descent_at_two_matches_the_eigensolver() {
        let mesh = disc_mesh(12).unwrap();
        let mu2 = neumann_eigen_p2(&mesh).unwrap();
        let e = neumann_eigen_p_full(&mesh, 2.0, &DescentOptions::default()).unwrap();
        assert!((e.value - mu2).abs() / mu2 < 0.005, "{} vs {mu2}", e.value);
    }

    #[test]
    fn minimizer_is_normalized() {
        let mesh = disc_mesh(10).unwrap();
        let e = neumann_eigen_p_full(&mesh, 1.9, &DescentOptions::default()).unwrap();
        let sys = FemSystem::new(&mesh).unwrap();
        let ray = Rayleigh::new(&sys, 1.9, e.options.epsilon);
        let ev = ray.evaluate(&e.field, None);
        assert!((ev.denominator - 1.0).abs() < 1e-8, "{}", ev.denominator);
        assert!((ev.value - e.value).abs() < 1e-9 * e.value);
    }

    #[test]
    fn below_two_on_disc_and_rectangle() {
        let disc = disc_mesh(12).unwrap();
        let mu2 = neumann_eigen_p2(&disc).unwrap();
        let mu = neumann_eigen_p(&disc, 1.9).unwrap();
        assert!(mu > 0.0 && mu <= 1.05 * mu2, "{mu} {mu2}");
        let rect = rectangle_mesh(2.0, 1.0, 8).unwrap();
        let e = neumann_eigen_p_full(&rect, 1.9, &DescentOptions::default()).unwrap();
        assert!(e.value > 0.0 && e.residual < 1e-6);
    }

    #[test]
    fn quotient_scales_like_a_power_of_the_domain() {
        // μ_p(tΩ) = t^{-p} μ_p(Ω)
        let small = rectangle_mesh(1.0, 0.5, 8).unwrap();
        let big = rectangle_mesh(2.0, 1.0, 8).unwrap();
        let a = neumann_eigen_p(&small, 1.8).unwrap();
        let b = neumann_eigen_p(&big, 1.8).unwrap();
        assert!((a / b - 2f64.powf(1.8)).abs() < 1e-4, "{}", a / b);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let mesh = disc_mesh(8).unwrap();
        let opts = DescentOptions { random_starts: 3, ..Default::default() };
        let a = neumann_eigen_p_full(&mesh, 1.8, &opts).unwrap();
        let b = neumann_eigen_p_full(&mesh, 1.8, &opts).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.starts, b.starts);
        assert_eq!(a.starts.len(), 4);
    }

    #[test]
    fn rejects_p_outside_range() {
        let mesh = disc_mesh(4).unwrap();
        for p in [1.0, 2.5, f64::NAN] {
            assert!(matches!(neumann_eigen_p(&mesh, p), Err(OracleError::InvalidInput(_))));
        }
    }
}
