//! `spaceform classify | manifold | render`
//!
//! Exit codes: 0 success, 1 verification or derivation failure, 2 usage or input error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spaceform::fixture::{load_fixture, resolve_fixture, PairingFixture};
use spaceform::gram::DEFAULT_TOL;
use spaceform::pairing::PairingResult;
use spaceform::pipeline::{run_classify, run_manifold, ManifoldOptions, RunReport};
use spaceform::polytope::{build_catalog, CombinatorialPolyhedron};
use spaceform::render::{render_svg, RenderOptions};
use spaceform::Error;

#[derive(Parser)]
#[command(
    name = "spaceform",
    version,
    about = "Orthoschemes, Archimedean cells and face-pairing space forms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a Coxeter-Schlafli symbol such as `5,3,5` or a branch JSON.
    Classify {
        symbol: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Propagate a pairing file, verify the space form and compute H1.
    Manifold {
        /// Fixture name (looked up in the fixture directory first) or path.
        pairing: String,
        /// Add dihedral-angle sums, pairing isometries and matrix identities.
        #[arg(long)]
        metric: bool,
        /// Angle-sum tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Override the declared number of cells around an edge.
        #[arg(long)]
        cells_per_edge: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Schlegel diagram of a catalog solid, `cobweb:z`, or a fixture's solid.
    Render {
        polyhedron: String,
        #[arg(long)]
        outer: Option<String>,
        /// Manifold report (or bare pairing result) whose edge classes are overlaid.
        #[arg(long)]
        classes: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_verification_failure() { 1 } else { 2 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn emit(report: &RunReport, out: Option<&PathBuf>) -> Result<u8, Failure> {
    let json = report.to_json()?;
    if let Some(path) = out {
        std::fs::write(path, format!("{json}\n"))?;
    }
    print_stdout(&format!("{json}\n"))?;
    Ok(report.exit_status as u8)
}

/// A closed pipe (e.g. `| head`) is not an error.
fn print_stdout(s: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(s.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn polyhedron_arg(name: &str) -> Result<CombinatorialPolyhedron, Failure> {
    match build_catalog(name) {
        Ok(p) => Ok(p),
        Err(Error::CobwebParameter(z)) => Err(Error::CobwebParameter(z).into()),
        Err(_) => {
            let path = resolve_fixture(name).map_err(|_| Failure {
                code: 2,
                message: format!("unknown polyhedron {name}"),
            })?;
            Ok(PairingFixture::load(&path)?.polyhedron.build()?)
        }
    }
}

fn load_classes(path: &PathBuf) -> Result<PairingResult, Failure> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(report) = RunReport::from_json(&text) {
        return report.pairing.ok_or_else(|| Failure {
            code: 2,
            message: format!("{} has no pairing result", path.display()),
        });
    }
    serde_json::from_str(&text).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Classify { symbol, tol } => emit(&run_classify(&symbol, tol)?, None),
        Command::Manifold {
            pairing,
            metric,
            tol,
            cells_per_edge,
            out,
        } => {
            let fixture = load_fixture(&pairing)?;
            let report = run_manifold(
                &fixture,
                &ManifoldOptions {
                    metric,
                    tol,
                    cells_per_edge,
                },
            )?;
            if let Some(e) = &report.error {
                eprintln!("{}: {}", e.kind, e.message);
                for line in &e.trace {
                    eprintln!("  {line}");
                }
            }
            emit(&report, out.as_ref())
        }
        Command::Render {
            polyhedron,
            outer,
            classes,
            out,
        } => {
            let p = polyhedron_arg(&polyhedron)?;
            let outer = match outer {
                Some(o) => o,
                None => p
                    .faces
                    .iter()
                    .max_by_key(|f| f.cycle.len())
                    .map(|f| f.id.clone())
                    .ok_or_else(|| Failure {
                        code: 2,
                        message: "polyhedron has no faces".into(),
                    })?,
            };
            let mut opts = RenderOptions::default();
            if let Some(path) = classes {
                let result = load_classes(&path)?;
                if result.polyhedron != p.name {
                    return Err(Failure {
                        code: 2,
                        message: format!("classes belong to {}, not {}", result.polyhedron, p.name),
                    });
                }
                opts.classes = Some(result.edge_class_map());
                opts.face_labels = Some(result.face_labels);
            }
            let svg = render_svg(&p, &outer, &opts)?;
            match out {
                Some(path) => std::fs::write(path, svg)?,
                None => print_stdout(&svg)?,
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
