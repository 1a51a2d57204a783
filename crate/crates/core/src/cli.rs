//! Command-line front end.
//!
//! Every number printed here is recomputed from the constraint systems;
//! nothing is read off a closed form.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::hardy::{
    best_relabeling, compute_pn, evaluate_pp, max_success_lhv, max_success_ns, quantum_reference,
    ArgumentKind, HardyArgument, HardyError, OptimizationReport, PpOutcome, RelabelSearch,
    Relabeling,
};
use crate::nosignaling::{is_valid_box, JointBox, Scenario};
use crate::rational::{self, Rational};
use crate::vertices::{enumerate_vertices, VertexKind, VertexLabel};

#[derive(Debug, Parser)]
#[command(name = "hardy-ns", version, about = "Exact Hardy-paradox optimization over no-signaling boxes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Conventional,
    Relaxed,
}

impl From<KindArg> for ArgumentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Conventional => ArgumentKind::Conventional,
            KindArg::Relaxed => ArgumentKind::Relaxed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Ns,
    Lhv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VertexKindArg {
    Local,
    Nonlocal,
    All,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ArgumentFlags {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Bound on the last relaxed condition, as num/den.
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    pub p: Rational,
    /// Search every outcome permutation (inputs with at most 4 outcomes)
    /// instead of cyclic shifts and reversals.
    #[arg(long)]
    pub exhaustive_perms: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximize the success probability of a Hardy argument.
    Optimize {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Output cardinalities dA0,dA1,dB0,dB1.
        #[arg(long, value_parser = parse_dims)]
        dims: Scenario,
        #[arg(long, value_parser = parse_rational, default_value = "0")]
        p: Rational,
        #[arg(long, value_enum, default_value = "ns")]
        regime: RegimeArg,
    },
    /// Write q_H, q_RH and PPC for a range of symmetric dimensions as CSV.
    Sweep {
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long, default_value_t = 10)]
        d_max: usize,
        /// Largest dimension accepted.
        #[arg(long, default_value_t = 16)]
        cap: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List closed-form vertices, one JSON object per line.
    Vertices {
        #[arg(long, value_parser = parse_dims)]
        dims: Scenario,
        #[arg(long, value_enum, default_value = "all")]
        kind: VertexKindArg,
    },
    /// Check a box file and evaluate PP, PN and PPC for an argument.
    Verify {
        box_file: PathBuf,
        #[command(flatten)]
        argument: ArgumentFlags,
    },
    /// Show the family of arguments behind PN for a box file.
    Pn {
        box_file: PathBuf,
        #[command(flatten)]
        argument: ArgumentFlags,
    },
}

fn parse_dims(s: &str) -> Result<Scenario, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let dims: [usize; 4] = parts
        .try_into()
        .map_err(|v: Vec<usize>| format!("expected four cardinalities, got {}", v.len()))?;
    Scenario::from_dims(dims).map_err(|e| e.to_string())
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Hardy(#[from] HardyError),
    #[error("{0}")]
    Box(#[from] crate::nosignaling::BoxError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) => 2,
                _ => 1,
            }
        }
    }
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Optimize {
            kind,
            dims,
            p,
            regime,
        } => {
            let report = cmd_optimize(kind.into(), dims, p, regime)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report.to_json()).expect("json"))?;
            Ok(0)
        }
        Command::Sweep {
            d_min,
            d_max,
            cap,
            out: path,
        } => {
            let rows = sweep_rows(d_min, d_max, cap)?;
            match path {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|source| CliError::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    write_sweep_csv(&rows, file)?;
                }
                None => write_sweep_csv(&rows, &mut *out)?,
            }
            Ok(0)
        }
        Command::Vertices { dims, kind } => {
            cmd_vertices(dims, kind, out)?;
            Ok(0)
        }
        Command::Verify { box_file, argument } => cmd_verify(&box_file, &argument, false, out),
        Command::Pn { box_file, argument } => cmd_verify(&box_file, &argument, true, out),
    }
}

pub fn cmd_optimize(
    kind: ArgumentKind,
    dims: Scenario,
    p: Rational,
    regime: RegimeArg,
) -> Result<OptimizationReport, CliError> {
    let arg = HardyArgument::new(kind, dims, p, Relabeling::identity(dims))?;
    Ok(match regime {
        RegimeArg::Ns => max_success_ns(&arg)?,
        RegimeArg::Lhv => max_success_lhv(&arg)?,
    })
}

/// One line of the dimension sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub d: usize,
    pub q_h_gnst: Rational,
    pub q_rh_gnst: Rational,
    pub ppc_gnst: Rational,
    pub quantum_ref: Option<f64>,
}

/// q_H from the conventional LP, q_RH from the relaxed LP, and PPC from the
/// relabeling search on the relaxed LP's witness box.
pub fn sweep_row(d: usize) -> Result<SweepRow, CliError> {
    let s = Scenario::symmetric(d)?;
    let conventional = max_success_ns(&HardyArgument::conventional(s))?;
    let relaxed_arg = HardyArgument::relaxed(s);
    let relaxed = max_success_ns(&relaxed_arg)?;
    let pn = compute_pn(&relaxed.witness, &relaxed_arg, RelabelSearch::Cyclic)?;
    let quantum_ref = if d == 2 {
        quantum_reference(ArgumentKind::Conventional, 2).map(|q| q.approx)
    } else {
        None
    };
    Ok(SweepRow {
        d,
        q_h_gnst: conventional.optimum,
        q_rh_gnst: relaxed.optimum,
        ppc_gnst: pn.ppc(),
        quantum_ref,
    })
}

/// Rows for `d_min..=d_max`, computed on worker threads and returned in `d` order.
pub fn sweep_rows(d_min: usize, d_max: usize, cap: usize) -> Result<Vec<SweepRow>, CliError> {
    if d_min < 2 || d_min > d_max || d_max > cap {
        return Err(CliError::Usage(format!(
            "need 2 <= d-min <= d-max <= {cap}, got d-min={d_min} d-max={d_max}"
        )));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (d_min..=d_max)
            .map(|d| scope.spawn(move || sweep_row(d)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

pub const SWEEP_HEADER: [&str; 8] = [
    "d",
    "q_H_gnst",
    "q_H_gnst_decimal",
    "q_RH_gnst",
    "q_RH_gnst_decimal",
    "PPC_gnst",
    "PPC_gnst_decimal",
    "quantum_ref",
];

pub fn write_sweep_csv(rows: &[SweepRow], w: impl Write) -> Result<(), CliError> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wtr.write_record(SWEEP_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.d.to_string(),
            rational::format(&r.q_h_gnst),
            rational::decimal(&r.q_h_gnst, 6),
            rational::format(&r.q_rh_gnst),
            rational::decimal(&r.q_rh_gnst, 6),
            rational::format(&r.ppc_gnst),
            rational::decimal(&r.ppc_gnst, 6),
            r.quantum_ref.map(|q| format!("{q:.6}")).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct VertexLine {
    kind: &'static str,
    label: Vec<usize>,
    #[serde(flatten)]
    table: crate::nosignaling::BoxJson,
}

/// Streams one JSON object per vertex. Each line is itself a valid box file.
pub fn cmd_vertices(dims: Scenario, kind: VertexKindArg, out: &mut dyn Write) -> Result<usize, CliError> {
    let kind = match kind {
        VertexKindArg::Local => VertexKind::Local,
        VertexKindArg::Nonlocal => VertexKind::Nonlocal,
        VertexKindArg::All => VertexKind::All,
    };
    let vertices = enumerate_vertices(dims, kind);
    for v in &vertices {
        let (kind, label) = match v.label {
            VertexLabel::Local(l) => ("local", vec![l.alpha, l.beta, l.gamma, l.delta]),
            VertexLabel::Nonlocal(l) => ("nonlocal", vec![l.alpha, l.beta, l.gamma]),
        };
        let line = VertexLine {
            kind,
            label,
            table: v.table.to_json(),
        };
        writeln!(out, "{}", serde_json::to_string(&line).expect("json"))?;
    }
    Ok(vertices.len())
}

fn read_box(path: &Path) -> Result<JointBox, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    JointBox::from_json_str(&text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()),
    })
}

fn pp_json(outcome: &PpOutcome) -> serde_json::Value {
    match outcome {
        PpOutcome::Satisfied(v) => json!({ "satisfied": true, "pp": rational::format(v) }),
        PpOutcome::NotSatisfied {
            condition,
            event,
            mass,
        } => json!({
            "satisfied": false,
            "condition": condition,
            "event": event.to_string(),
            "mass": rational::format(mass),
        }),
    }
}

/// Validity report, then PP under the identity relabeling. When the box
/// does not meet the identity argument, the best-scoring relabeling is used
/// for PP/PN/PPC instead and reported alongside. Exit code 1 for invalid boxes.
pub fn cmd_verify(
    path: &Path,
    flags: &ArgumentFlags,
    show_family: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let b = read_box(path)?;
    let s = b.scenario();
    let validity = is_valid_box(&b);
    if !validity.is_valid() {
        let report = json!({
            "valid": false,
            "violations": validity
                .violations
                .iter()
                .map(|v| json!({ "constraint": v.constraint, "description": v.to_string(),
                                 "value": rational::format(&v.value), "bound": rational::format(&v.bound) }))
                .collect::<Vec<_>>(),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("json"))?;
        return Ok(1);
    }
    let search = if flags.exhaustive_perms {
        RelabelSearch::Exhaustive
    } else {
        RelabelSearch::Cyclic
    };
    let base = HardyArgument::new(flags.kind.into(), s, flags.p.clone(), Relabeling::identity(s))?;
    let identity = evaluate_pp(&b, &base)?;
    let chosen = match &identity {
        PpOutcome::Satisfied(_) => Some(base.clone()),
        PpOutcome::NotSatisfied { .. } => best_relabeling(&b, &base, search)?.map(|(a, _)| a),
    };
    let mut report = json!({
        "valid": true,
        "violations": [],
        "identity": pp_json(&identity),
    });
    match chosen {
        Some(arg) => {
            let pn = compute_pn(&b, &arg, search)?;
            report["argument"] = serde_json::to_value(&arg).expect("json");
            report["relabeled"] = json!(!arg.relabeling.is_identity() || arg.reversed);
            report["pp"] = json!(rational::format(&pn.pp));
            report["pn"] = json!(rational::format(&pn.pn));
            report["ppc"] = json!(rational::format(&pn.ppc()));
            if show_family {
                let family: Vec<_> = pn
                    .family
                    .iter()
                    .map(|a| {
                        let ev = a.events();
                        json!({
                            "argument": a,
                            "success_mass": rational::format(&b.mass(&ev.success)),
                            "success_events": ev.success.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                report["family"] = json!(family);
            } else {
                report["family_size"] = json!(pn.family.len());
            }
        }
        None => {
            report["pp"] = serde_json::Value::Null;
            report["note"] = json!("no relabeling in the search space satisfies the argument");
        }
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("json"))?;
    Ok(0)
}
