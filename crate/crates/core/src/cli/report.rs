//! Report documents. Every number is a [`Quantity`] carrying its status and
//! the formula it instantiates.

use serde::Serialize;

use crate::bounds::BoundReport;
use crate::oracle::{ClassicalCheck, PEigen, StartOutcome};
use crate::qcmap::{MapSpec, SourceDomain};
use crate::quad::{IntegralResult, Status};
use crate::regularity::{AlphaCap, Interval, Mode};

use super::config::RunConfig;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantityStatus {
    /// Input or closed-form value.
    Exact,
    Converged,
    Diverged,
    Inconclusive,
    /// Output of an iterative solver that met its tolerance.
    Solved,
}

impl From<Status> for QuantityStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Converged => QuantityStatus::Converged,
            Status::Diverged => QuantityStatus::Diverged,
            Status::Inconclusive => QuantityStatus::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub status: QuantityStatus,
    pub formula: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
}

impl Quantity {
    pub fn exact(value: f64, formula: &'static str) -> Self {
        Self {
            value,
            status: QuantityStatus::Exact,
            formula,
            error_estimate: None,
        }
    }

    pub fn with_status(value: f64, status: impl Into<QuantityStatus>, formula: &'static str) -> Self {
        Self {
            value,
            status: status.into(),
            formula,
            error_estimate: None,
        }
    }

    pub fn integral(r: IntegralResult, formula: &'static str) -> Self {
        Self {
            value: r.value,
            status: r.status.into(),
            formula,
            error_estimate: Some(r.error_estimate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalQuantity {
    pub interval: Interval,
    pub formula: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSection {
    pub map: MapSpec,
    pub source_domain: SourceDomain,
    pub square_source: bool,
    pub mode: Mode,
    pub p: Quantity,
    pub alpha: Quantity,
    #[serde(rename = "K")]
    pub k: Quantity,
    pub beta0: Quantity,
    pub admissible_p: IntervalQuantity,
    pub q_interval: IntervalQuantity,
    pub r: Quantity,
    pub q_star: Quantity,
    pub disc_constant: Quantity,
    pub comp_norm: Quantity,
    pub jac_integral: Quantity,
    pub jac_factor: Quantity,
    pub bound_value: Quantity,
    pub mu_lower: Quantity,
    pub status: Status,
}

const PROVED_P_RANGE: &str = "(max(4K/(2K+1), (2(K-1)*alpha*beta0 + 4(alpha+beta0-2))/(K*alpha*beta0)), 2)";
const CONJECTURED_P_RANGE: &str = "(max(4K/(2K+1), (alpha(2K-1)+2)/(alpha*K)), 2)";

impl From<&BoundReport> for BoundSection {
    fn from(b: &BoundReport) -> Self {
        let status = b.status;
        Self {
            map: b.map.clone(),
            source_domain: b.source_domain,
            square_source: b.square_source,
            mode: b.mode,
            p: Quantity::exact(b.p, "input p"),
            alpha: Quantity::exact(b.alpha, "input alpha"),
            k: Quantity::exact(b.k, "sup |Dw|^2 / J"),
            beta0: Quantity::exact(b.beta0, "integrability exponent of |Dphi|"),
            admissible_p: IntervalQuantity {
                interval: b.admissible_p,
                formula: match b.mode {
                    Mode::Proved => PROVED_P_RANGE,
                    Mode::Conjectured => CONJECTURED_P_RANGE,
                },
            },
            q_interval: IntervalQuantity {
                interval: b.q_interval,
                formula: "[1, 2p/(4K-(2K-1)p))",
            },
            r: Quantity::exact(b.r, "alpha*p/(alpha-2)"),
            q_star: Quantity::with_status(b.q_star, status, "argmin_q B^p K~^p (int J^(alpha/2))^(2/alpha)"),
            disc_constant: Quantity::exact(
                b.disc_constant,
                "B_{r,q}(D) = (2/pi^d)((1-d)/(1/2-d))^(1-d), d = 1/q - 1/r",
            ),
            comp_norm: Quantity::with_status(
                b.comp_norm,
                b.comp_norm_status,
                "K~_{p,q} = K^(1/p) (int |Dw|^((p-2)q/(p-q)))^((p-q)/(pq))",
            ),
            jac_integral: Quantity::integral(b.jac_integral, "int J^(alpha/2)"),
            jac_factor: Quantity::with_status(b.jac_factor, b.jac_integral.status, "(int J^(alpha/2))^(2/alpha)"),
            bound_value: Quantity::with_status(
                b.bound_value,
                status,
                "B_{r,q*}^p K~_{p,q*}^p (int J^(alpha/2))^(2/alpha) >= 1/mu_p",
            ),
            mu_lower: Quantity::with_status(b.mu_lower, status, "1/bound_value"),
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSummary {
    pub provenance: crate::oracle::Provenance,
    pub resolution: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub area: Quantity,
    pub diameter: Quantity,
    pub convex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentSummary {
    pub seed: u64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub residual: Quantity,
    pub spread: Quantity,
    pub starts: Vec<StartOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSection {
    pub mesh: MeshSummary,
    pub mu2: Quantity,
    pub p: f64,
    pub mu_p: Quantity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descent: Option<DescentSummary>,
    pub classical: Vec<ClassicalCheck>,
}

impl OracleSection {
    pub fn descent_summary(e: &PEigen) -> DescentSummary {
        DescentSummary {
            seed: e.options.seed,
            epsilon: e.options.epsilon,
            tolerance: e.options.tolerance,
            residual: Quantity::with_status(e.residual, QuantityStatus::Solved, "sqrt(g' P^-1 g)/R"),
            spread: Quantity::with_status(e.spread, QuantityStatus::Solved, "max - min over converged starts"),
            starts: e.starts.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Soundness {
    pub verdict: Verdict,
    pub mu_lower: f64,
    pub oracle: f64,
    pub slack: f64,
    pub statement: &'static str,
    /// Oracle values come from a descent and may overshoot the true infimum.
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityRow {
    pub alpha: f64,
    pub integral: Quantity,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AstalaCap {
    pub cap: AlphaCap,
    pub formula: &'static str,
    pub binding: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularitySection {
    pub map: MapSpec,
    #[serde(rename = "K")]
    pub k: Quantity,
    pub constant_jacobian: bool,
    pub grid: Vec<RegularityRow>,
    pub astala: AstalaCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub map: String,
    pub p: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Body {
    Bound { bound: BoundSection },
    Regularity { regularity: RegularitySection },
    Oracle { oracle: OracleSection },
    Compare {
        bound: BoundSection,
        oracle: OracleSection,
        soundness: Soundness,
    },
    Sweep { sweep: Vec<SweepRow> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Document {
    pub schema: u32,
    pub command: &'static str,
    pub config: RunConfig,
    #[serde(flatten)]
    pub body: Body,
}

impl Document {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let (header, rows) = self.table();
        let mut out = header.join(",");
        out.push('\n');
        for row in rows {
            out.push_str(&row.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        const BOUND_COLS: [&str; 11] = [
            "map", "p", "alpha", "K", "q_star", "disc_constant", "comp_norm", "jac_factor", "bound_value", "mu_lower",
            "status",
        ];
        let bound_row = |map: &str, b: &BoundSection| {
            vec![
                map.to_string(),
                num(b.p.value),
                num(b.alpha.value),
                num(b.k.value),
                num(b.q_star.value),
                num(b.disc_constant.value),
                num(b.comp_norm.value),
                num(b.jac_factor.value),
                num(b.bound_value.value),
                num(b.mu_lower.value),
                status_str(b.status),
            ]
        };
        match &self.body {
            Body::Bound { bound } => (BOUND_COLS.to_vec(), vec![bound_row(&self.config.map, bound)]),
            Body::Sweep { sweep } => {
                let mut cols = BOUND_COLS.to_vec();
                cols.push("error");
                let rows = sweep
                    .iter()
                    .map(|r| {
                        let mut row = match &r.bound {
                            Some(b) => bound_row(&r.map, b),
                            None => {
                                let mut v = vec![r.map.clone(), num(r.p), num(r.alpha)];
                                v.resize(BOUND_COLS.len(), String::new());
                                v
                            }
                        };
                        row.push(r.error.clone().unwrap_or_default());
                        row
                    })
                    .collect();
                (cols, rows)
            }
            Body::Regularity { regularity } => (
                vec!["map", "alpha", "integral", "error_estimate", "status"],
                regularity
                    .grid
                    .iter()
                    .map(|r| {
                        vec![
                            self.config.map.clone(),
                            num(r.alpha),
                            num(r.integral.value),
                            num(r.integral.error_estimate.unwrap_or(f64::NAN)),
                            status_str(r.status),
                        ]
                    })
                    .collect(),
            ),
            Body::Oracle { oracle } => (
                vec!["map", "resolution", "area", "mu2", "p", "mu_p"],
                vec![vec![
                    self.config.map.clone(),
                    oracle.mesh.resolution.to_string(),
                    num(oracle.mesh.area.value),
                    num(oracle.mu2.value),
                    num(oracle.p),
                    num(oracle.mu_p.value),
                ]],
            ),
            Body::Compare {
                bound,
                oracle,
                soundness,
            } => {
                let mut cols = BOUND_COLS.to_vec();
                cols.extend(["mu2", "mu_p", "verdict"]);
                let mut row = bound_row(&self.config.map, bound);
                row.extend([
                    num(oracle.mu2.value),
                    num(oracle.mu_p.value),
                    format!("{:?}", soundness.verdict).to_uppercase(),
                ]);
                (cols, vec![row])
            }
        }
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn status_str(s: Status) -> String {
    match s {
        Status::Converged => "converged",
        Status::Diverged => "diverged",
        Status::Inconclusive => "inconclusive",
    }
    .to_string()
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
