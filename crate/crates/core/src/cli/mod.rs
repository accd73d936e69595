//! Command-line front end: `bound`, `regularity`, `oracle`, `compare`, `sweep`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::bounds::{eigenvalue_lower_bound, BoundsError};
use crate::oracle::{
    build_mesh, evaluate_classical_checks, neumann_eigen_p2, neumann_eigen_p_full, OracleError,
};
use crate::qcmap::{interior_grid, QcMap};
use crate::regularity::{
    alpha_regularity, astala_alpha_cap, require_admissible, AlphaCap, ExponentContext, RegularityError,
};

pub mod config;
pub mod report;

pub use config::{Format, RunConfig};
use report::{
    AstalaCap, Body, BoundSection, Document, MeshSummary, OracleSection, Quantity, QuantityStatus, RegularityRow,
    RegularitySection, Soundness, SweepRow, Verdict, SCHEMA,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_UNSOUND: i32 = 3;

/// Default α grid of the `regularity` command.
pub const DEFAULT_ALPHA_GRID: [f64; 8] = [2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 12.0, 16.0];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("soundness violation: {0}")]
    Unsound(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Unsound(_) => EXIT_UNSOUND,
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::DivergentIntegral { .. }
            | BoundsError::EmptyFeasibleSet { .. }
            | BoundsError::OutOfValidity { .. } => CliError::Infeasible(e.to_string()),
            BoundsError::Regularity(RegularityError::EmptyInterval { .. }) => CliError::Infeasible(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<RegularityError> for CliError {
    fn from(e: RegularityError) -> Self {
        BoundsError::from(e).into()
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::InvalidInput(_) | OracleError::Map(_) => CliError::Usage(e.to_string()),
            _ => CliError::Infeasible(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qcbound", version, about = "Neumann p-Laplace eigenvalue lower bounds for quasiconformal images of the disc")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower bound for the first nontrivial Neumann p-eigenvalue.
    Bound(CommonArgs),
    /// Probe the integrability of J^(α/2) over an α grid.
    Regularity {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated α grid.
        #[arg(long, value_name = "LIST")]
        alpha_values: Option<String>,
    },
    /// Finite element eigenvalues of the image domain.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the mesh as plain text.
        #[arg(long, value_name = "PATH")]
        mesh_out: Option<PathBuf>,
    },
    /// Bound, oracle and classical checks together, with a soundness verdict.
    Compare(CommonArgs),
    /// Bounds over the Cartesian product of map, p and α grids.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Maps separated by `;`, e.g. `ellipse:2,1;star:1`.
        #[arg(long, value_name = "LIST")]
        maps: Option<String>,
        #[arg(long, value_name = "LIST")]
        p_values: Option<String>,
        #[arg(long, value_name = "LIST")]
        alpha_values: Option<String>,
    },
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// `key = value` config file; flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// `identity`, `ellipse:A,B`, `cardioid:k`, `star:k`.
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// `proved` or `conjectured`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// `json` or `csv`.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Any config key, e.g. `--set quad.angular=128`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        let flags: [(&str, Option<String>); 9] = [
            ("map", self.map.clone()),
            ("p", self.p.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("mode", self.mode.clone()),
            ("beta0", self.beta0.map(|v| v.to_string())),
            ("resolution", self.resolution.map(|v| v.to_string())),
            ("format", self.format.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|v| v.display().to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                c.set(k, &v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            c.set(k, v)?;
        }
        Ok(c)
    }
}

/// Parses arguments, runs the command and writes the report; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli.command).and_then(|(config, doc, outcome)| {
        emit(&config, &doc)?;
        outcome.map(|_| ())
    }) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(config: &RunConfig, doc: &Document) -> Result<(), CliError> {
    let text = match config.format {
        Format::Json => doc.to_json(),
        Format::Csv => doc.to_csv(),
    };
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Builds the report. The third element carries a failure that should still
/// produce a report (a failed soundness verdict).
pub fn execute(command: &Command) -> Result<(RunConfig, Document, Result<(), CliError>), CliError> {
    let document = |command: &'static str, config: &RunConfig, body: Body| Document {
        schema: SCHEMA,
        command,
        config: config.clone(),
        body,
    };
    match command {
        Command::Bound(common) => {
            let config = common.resolve()?;
            let bound = cmd_bound(&config)?;
            let doc = document("bound", &config, Body::Bound { bound });
            Ok((config, doc, Ok(())))
        }
        Command::Regularity { common, alpha_values } => {
            let mut config = common.resolve()?;
            if let Some(v) = alpha_values {
                config.set("alpha_values", v)?;
            }
            let regularity = cmd_regularity(&config)?;
            let doc = document("regularity", &config, Body::Regularity { regularity });
            Ok((config, doc, Ok(())))
        }
        Command::Oracle { common, mesh_out } => {
            let config = common.resolve()?;
            let map = config.parsed_map()?;
            if let Some(path) = mesh_out {
                let mesh = build_mesh(&map, config.resolution)?;
                std::fs::write(path, mesh.to_text())?;
            }
            let oracle = cmd_oracle(&config, &map)?;
            let doc = document("oracle", &config, Body::Oracle { oracle });
            Ok((config, doc, Ok(())))
        }
        Command::Compare(common) => {
            let config = common.resolve()?;
            let (bound, oracle, soundness) = cmd_compare(&config)?;
            let outcome = match soundness.verdict {
                Verdict::Pass => Ok(()),
                Verdict::Fail => Err(CliError::Unsound(format!(
                    "mu_lower = {} exceeds oracle {} by more than {}",
                    soundness.mu_lower, soundness.oracle, soundness.slack
                ))),
            };
            let doc = document(
                "compare",
                &config,
                Body::Compare {
                    bound,
                    oracle,
                    soundness,
                },
            );
            Ok((config, doc, outcome))
        }
        Command::Sweep {
            common,
            maps,
            p_values,
            alpha_values,
        } => {
            let mut config = common.resolve()?;
            for (k, v) in [("maps", maps), ("p_values", p_values), ("alpha_values", alpha_values)] {
                if let Some(v) = v {
                    config.set(k, v)?;
                }
            }
            let sweep = cmd_sweep(&config)?;
            let doc = document("sweep", &config, Body::Sweep { sweep });
            Ok((config, doc, Ok(())))
        }
    }
}

/// Exponent context of a map under the config; `p` is checked against the
/// eigenvalue range before anything is integrated.
fn context(config: &RunConfig, map: &QcMap, p: f64, alpha: f64) -> Result<ExponentContext, CliError> {
    let k = map.distortion().map_err(|e| CliError::Usage(e.to_string()))?;
    let ctx = ExponentContext::new(k, alpha)
        .and_then(|c| c.with_beta0(config.beta0))
        .map_err(|e| CliError::Usage(e.to_string()))?
        .with_mode(config.mode);
    require_admissible(&ctx, ctx.mode.eigenvalue_theorem(), p).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(ctx)
}

fn bound_for(config: &RunConfig, map: &QcMap, p: f64, alpha: f64) -> Result<BoundSection, CliError> {
    let ctx = context(config, map, p, alpha)?;
    let rule = config.rule(map.source_domain())?;
    let report = eigenvalue_lower_bound(map, p, alpha, &ctx, &rule)?;
    Ok(BoundSection::from(&report))
}

pub fn cmd_bound(config: &RunConfig) -> Result<BoundSection, CliError> {
    bound_for(config, &config.parsed_map()?, config.p, config.alpha)
}

pub fn cmd_regularity(config: &RunConfig) -> Result<RegularitySection, CliError> {
    let map = config.parsed_map()?;
    let k = map.distortion().map_err(|e| CliError::Usage(e.to_string()))?;
    let rule = config.rule(map.source_domain())?;
    let alphas: Vec<f64> = if config.alpha_values.is_empty() {
        DEFAULT_ALPHA_GRID.to_vec()
    } else {
        config.alpha_values.clone()
    };
    let grid = alphas
        .iter()
        .map(|&alpha| {
            let r = alpha_regularity(&map, alpha, &rule)?;
            Ok(RegularityRow {
                alpha,
                integral: Quantity::integral(r, "int J^(alpha/2)"),
                status: r.status,
            })
        })
        .collect::<Result<Vec<_>, RegularityError>>()?;
    let constant_jacobian = has_constant_jacobian(&map);
    let cap = astala_alpha_cap(k)?;
    let binding = matches!(cap, AlphaCap::Finite(_)) && !constant_jacobian;
    let note = match cap {
        AlphaCap::Infinite => "K = 1: no a-priori cap".to_string(),
        AlphaCap::Finite(c) if constant_jacobian => {
            format!("cap {c} from K = {k} is not binding: the Jacobian is constant")
        }
        AlphaCap::Finite(c) => format!("a K-quasiconformal Jacobian may fail to be integrable beyond alpha = {c}"),
    };
    Ok(RegularitySection {
        map: (&map).into(),
        k: Quantity::exact(k, "sup |Dw|^2 / J"),
        constant_jacobian,
        grid,
        astala: AstalaCap {
            cap,
            formula: "2K/(K-1)",
            binding,
            note,
        },
    })
}

fn has_constant_jacobian(map: &QcMap) -> bool {
    let js: Vec<f64> = interior_grid(map.source_domain(), 16)
        .into_iter()
        .filter_map(|z| map.wirtinger(z).ok().map(|d| d.jac))
        .collect();
    let (lo, hi) = js
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &j| (a.min(j), b.max(j)));
    !js.is_empty() && hi - lo <= 1e-12 * hi.abs()
}

pub fn cmd_oracle(config: &RunConfig, map: &QcMap) -> Result<OracleSection, CliError> {
    let p = config.p;
    if !(p > 1.0 && p <= 2.0) {
        return Err(CliError::Usage(format!("oracle needs p in (1, 2], got {p}")));
    }
    let mesh = build_mesh(map, config.resolution)?;
    let mu2 = neumann_eigen_p2(&mesh)?;
    let (mu_p, descent) = if p == 2.0 {
        (Quantity::with_status(mu2, QuantityStatus::Solved, "min int|grad u|^2 / int|u-c|^2 (P1)"), None)
    } else {
        let e = neumann_eigen_p_full(&mesh, p, &config.descent())?;
        (
            Quantity::with_status(e.value, QuantityStatus::Solved, "min int|grad u|^p / min_c int|u-c|^p (P1)"),
            Some(OracleSection::descent_summary(&e)),
        )
    };
    let classical = if config.oracle.classical {
        evaluate_classical_checks(&mesh, mu2, config.oracle.classical_slack)?
    } else {
        Vec::new()
    };
    Ok(OracleSection {
        mesh: MeshSummary {
            provenance: mesh.provenance.clone(),
            resolution: config.resolution,
            vertices: mesh.vertex_count(),
            triangles: mesh.triangles.len(),
            area: Quantity::exact(mesh.area(), "sum of triangle areas"),
            diameter: Quantity::exact(mesh.diameter(), "max boundary vertex distance"),
            convex: mesh.is_convex(),
        },
        mu2: Quantity::with_status(mu2, QuantityStatus::Solved, "min int|grad u|^2 / int|u-c|^2 (P1)"),
        p,
        mu_p,
        descent,
        classical,
    })
}

pub fn cmd_compare(config: &RunConfig) -> Result<(BoundSection, OracleSection, Soundness), CliError> {
    let map = config.parsed_map()?;
    let bound = bound_for(config, &map, config.p, config.alpha)?;
    let oracle = cmd_oracle(config, &map)?;
    let slack = config.oracle.soundness_slack;
    let holds = bound.mu_lower.value <= oracle.mu_p.value * (1.0 + slack);
    let soundness = Soundness {
        verdict: if holds { Verdict::Pass } else { Verdict::Fail },
        mu_lower: bound.mu_lower.value,
        oracle: oracle.mu_p.value,
        slack,
        statement: "mu_lower <= mu_p(mesh) * (1 + slack)",
        note: "the oracle is a descent estimate of the infimum; multi-start spread is in oracle.descent",
    };
    Ok((bound, oracle, soundness))
}

/// One row per (map, p, α); infeasible points keep their error message.
pub fn cmd_sweep(config: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let maps = if config.maps.is_empty() {
        vec![config.map.clone()]
    } else {
        config.maps.clone()
    };
    let ps = if config.p_values.is_empty() {
        vec![config.p]
    } else {
        config.p_values.clone()
    };
    let alphas = if config.alpha_values.is_empty() {
        vec![config.alpha]
    } else {
        config.alpha_values.clone()
    };
    let mut rows = Vec::new();
    for descriptor in &maps {
        let map = config::parse_map(descriptor)?;
        for &p in &ps {
            for &alpha in &alphas {
                let (bound, error) = match bound_for(config, &map, p, alpha) {
                    Ok(b) => (Some(b), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                rows.push(SweepRow {
                    map: descriptor.clone(),
                    p,
                    alpha,
                    bound,
                    error,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularity::Interval;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let div: CliError = BoundsError::DivergentIntegral { factor: "jacobian" }.into();
        assert_eq!(div.exit_code(), EXIT_INFEASIBLE);
        let empty: CliError = BoundsError::EmptyFeasibleSet {
            what: "disc constant",
            interval: Interval::closed_open(1.0, 1.5),
        }
        .into();
        assert_eq!(empty.exit_code(), EXIT_INFEASIBLE);
        let outside: CliError = RegularityError::OutsideInterval {
            what: "p",
            value: 2.5,
            interval: Interval::open(1.5, 2.0),
        }
        .into();
        assert_eq!(outside.exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(OracleError::SolverFailure("x".into())).exit_code(), EXIT_INFEASIBLE);
        assert_eq!(CliError::Unsound("x".into()).exit_code(), EXIT_UNSOUND);
    }

    #[test]
    fn flags_override_the_file() {
        let args = CommonArgs {
            p: Some(1.8),
            set: vec!["quad.radial=20".into()],
            ..Default::default()
        };
        let c = args.resolve().unwrap();
        assert_eq!(c.p, 1.8);
        assert_eq!(c.quad.radial, 20);
        assert_eq!(c.map, "identity");
    }

    #[test]
    fn sweep_rows_in_product_order() {
        let mut c = RunConfig::default();
        c.set("maps", "identity;star:1").unwrap();
        c.set("p_values", "1.8,1.9").unwrap();
        c.set("alpha_values", "4").unwrap();
        let rows = cmd_sweep(&c).unwrap();
        let keys: Vec<(String, f64)> = rows.iter().map(|r| (r.map.clone(), r.p)).collect();
        assert_eq!(
            keys,
            vec![
                ("identity".into(), 1.8),
                ("identity".into(), 1.9),
                ("star:1".into(), 1.8),
                ("star:1".into(), 1.9)
            ]
        );
    }
}
