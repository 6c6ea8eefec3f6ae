//! Command-line front end: parse diagram programs, normalise classical
//! networks, evaluate terms against a model, and run the measurement
//! and dilation checkers.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check
//! fails, 2 on input errors (missing files, parse errors, malformed
//! JSON).

mod dsl;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use dcnet::matrix::ComplexMatrix;
use dcnet::model::{check_frobenius, eval, Model};
use dcnet::naimark::{naimark_dilate, verify_dilation};
use dcnet::network::{to_network, ClassicalNetwork};
use dcnet::normalizer::{normalize_run, Schedule};
use dcnet::object::ClassicalObject;
use dcnet::povm::{validate_povm, Povm};
use dcnet::random::{random_density, random_network, random_povm};
use dcnet::tol;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dcnet",
    version,
    about = "diagrammatic classical networks workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the classical-structure identities at a dimension.
    CheckFrobenius {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        json: bool,
    },
    /// Normalise the classical network of a diagram (.dsl) or a
    /// network file (.json).
    Normalize {
        file: PathBuf,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
        /// Print the rewrite step trace.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a diagram to its matrix.
    Eval {
        file: PathBuf,
        /// JSON file binding box names to matrices, overriding the
        /// paths declared in the program.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Validate a POVM file: element positivity and completeness.
    PovmCheck {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Dilate a POVM to a projective measurement and verify it against
    /// seeded random states.
    Naimark {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Run the concrete dilation even when a zero-trace element
        /// blocks the X-inverse scalar.
        #[arg(long)]
        allow_zero_trace: bool,
        /// Complete an incomplete POVM with the leftover outcome
        /// 1 − ΣF before dilating.
        #[arg(long)]
        pad_incomplete: bool,
        #[arg(long)]
        json: bool,
    },
    /// Generate a seeded random complete POVM as JSON on stdout.
    RandomPovm {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        outcomes: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Generate a seeded random connected classical network as JSON.
    RandomNet {
        #[arg(long)]
        spiders: usize,
        /// Boundary wire counts as `m,n`.
        #[arg(long)]
        boundary: String,
        #[arg(long)]
        seed: u64,
        /// Dimension of the classical object.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

/// Base tolerance, overridable through `DCNET_TOL`.
fn base_tol(default: f64) -> f64 {
    match std::env::var("DCNET_TOL") {
        Ok(s) => s.parse().unwrap_or(default),
        Err(_) => default,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::CheckFrobenius { dim, json } => {
            if dim == 0 {
                return Err(anyhow!("--dim must be at least 1"));
            }
            let report = check_frobenius(dim, base_tol(tol::STRUCTURAL));
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for c in &report.checks {
                    println!(
                        "{:<26} {}  residual {:.3e}",
                        c.axiom,
                        if c.pass { "pass" } else { "FAIL" },
                        c.residual
                    );
                }
                println!(
                    "{} axioms at dim {}: {}",
                    report.checks.len(),
                    dim,
                    if report.all_pass() {
                        "all pass"
                    } else {
                        "FAILED"
                    }
                );
            }
            Ok(report.all_pass())
        }
        Command::Normalize {
            file,
            emit,
            trace,
            json,
        } => {
            let net = load_network(&file)?;
            let run = normalize_run(&net, Schedule::Deterministic);
            match emit {
                Some(Emit::Dot) => {
                    print!(
                        "{}",
                        run.snapshots.last().expect("snapshots nonempty").to_dot()
                    );
                }
                Some(Emit::Json) => {
                    println!("{}", serde_json::to_string_pretty(&run.normal_form)?);
                }
                None => {
                    if json {
                        let payload = serde_json::json!({
                            "normal_form": run.normal_form,
                            "steps": if trace { Some(&run.steps) } else { None },
                        });
                        println!("{}", serde_json::to_string_pretty(&payload)?);
                    } else {
                        for (i, c) in run.normal_form.components.iter().enumerate() {
                            let kind = if c.bare_wire { "bare wire" } else { "dot" };
                            println!("component {i}: ({}, {}) {kind}", c.m, c.n);
                        }
                        println!("{} rewrite steps", run.steps.len());
                    }
                }
            }
            if trace && !json && emit.is_none() {
                for (i, s) in run.steps.iter().enumerate() {
                    println!(
                        "step {i}: {:?} spiders {:?} edges {:?} dots {} -> {}",
                        s.rule,
                        s.spiders.iter().map(|x| x.0).collect::<Vec<_>>(),
                        s.edges.iter().map(|x| x.0).collect::<Vec<_>>(),
                        s.dots_before,
                        s.dots_after
                    );
                }
            } else if trace && emit.is_some() {
                eprintln!("note: --trace is ignored with --emit");
            }
            Ok(true)
        }
        Command::Eval { file, model, json } => {
            let src = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let prog = dsl::parse(&src)?;
            let base = file.parent().unwrap_or(Path::new("."));
            let m = build_model(&prog, base, model.as_deref())?;
            let out = eval(&prog.main, &m)?;
            if json {
                println!("{}", serde_json::to_string(&out)?);
            } else {
                let objects: Vec<String> = prog
                    .objects
                    .values()
                    .map(|f| format!("{f}(dim {})", f.dim()))
                    .collect();
                println!("objects: {}", objects.join(", "));
                println!("{} : {} -> {}", prog.main, prog.main.dom(), prog.main.cod());
                print_matrix(&out);
            }
            Ok(true)
        }
        Command::PovmCheck { file, json } => {
            let povm = load_povm(&file)?;
            let report = validate_povm(&povm, base_tol(tol::SPECTRAL))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!(
                    "{} outcomes on dim {}, complete={}",
                    povm.outcomes, povm.dim, povm.complete
                );
                for (i, lo) in report.element_min_eigenvalues.iter().enumerate() {
                    println!("element {i}: min eigenvalue {lo:+.3e}");
                }
                println!("completeness residual {:.3e}", report.completeness_residual);
                println!("{}", if report.pass { "pass" } else { "FAILED" });
            }
            Ok(report.pass)
        }
        Command::Naimark {
            povm,
            states,
            seed,
            allow_zero_trace,
            pad_incomplete,
            json,
        } => {
            let mut p = load_povm(&povm)?;
            let tol = base_tol(tol::SPECTRAL);
            if pad_incomplete {
                p = dcnet::povm::pad_incomplete(&p, tol)?;
            }
            let validation = validate_povm(&p, tol)?;
            if !validation.pass {
                eprintln!("POVM fails validation: {validation:?}");
                return Ok(false);
            }
            let dl = match naimark_dilate(&p, tol, allow_zero_trace) {
                Ok(dl) => dl,
                Err(e) => {
                    eprintln!("dilation failed: {e}");
                    return Ok(false);
                }
            };
            let rhos: Vec<ComplexMatrix> = (0..states)
                .map(|k| random_density(p.dim, seed.wrapping_add(k as u64)))
                .collect();
            let report = verify_dilation(&dl, &p, &rhos, tol)?;
            if json {
                let payload = serde_json::json!({
                    "report": report,
                    "dilation": dl.repr(),
                });
                println!("{}", serde_json::to_string_pretty(&payload)?);
            } else {
                println!("ancilla dim {}, system dim {}", dl.ancilla_dim, dl.dim);
                println!("V†V residual        {:.3e}", report.isometry_residual);
                println!("concrete residual   {:.3e}", report.concrete_residual);
                println!("abstract residual   {:.3e}", report.abstract_residual);
                println!(
                    "spectra {}   X-scalars {}",
                    if report.spectrum_ok { "pass" } else { "FAIL" },
                    if report.scalar_check { "pass" } else { "FAIL" }
                );
                println!("{}", if report.pass { "pass" } else { "FAILED" });
            }
            Ok(report.pass)
        }
        Command::RandomPovm {
            dim,
            outcomes,
            seed,
        } => {
            if dim == 0 || outcomes == 0 {
                return Err(anyhow!("--dim and --outcomes must be at least 1"));
            }
            let (p, extra) = random_povm(dim, outcomes, seed)?;
            if extra.resamples > 0 {
                eprintln!(
                    "note: seed resampled {} time(s) past a singular normaliser",
                    extra.resamples
                );
            }
            println!("{}", serde_json::to_string(&p)?);
            Ok(true)
        }
        Command::RandomNet {
            spiders,
            boundary,
            seed,
            dim,
        } => {
            if spiders == 0 {
                return Err(anyhow!("--spiders must be at least 1"));
            }
            let (m, n) = boundary
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| anyhow!("--boundary expects `m,n`"))?;
            let x = ClassicalObject::new("X", dim);
            let net = random_network(&x, spiders, (m, n), seed);
            println!("{}", serde_json::to_string(&net)?);
            Ok(true)
        }
    }
}

fn load_network(file: &Path) -> anyhow::Result<ClassicalNetwork> {
    let src =
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    if file.extension().and_then(|e| e.to_str()) == Some("json") {
        let net: ClassicalNetwork =
            serde_json::from_str(&src).with_context(|| format!("parsing {}", file.display()))?;
        return Ok(net);
    }
    let prog = dsl::parse(&src)?;
    Ok(to_network(&prog.main)?)
}

fn load_povm(file: &Path) -> anyhow::Result<Povm> {
    let src =
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let povm: Povm =
        serde_json::from_str(&src).with_context(|| format!("parsing {}", file.display()))?;
    Povm::new(povm.elements, povm.complete).map_err(Into::into)
}

fn build_model(
    prog: &dsl::DslProgram,
    base: &Path,
    override_file: Option<&Path>,
) -> anyhow::Result<Model> {
    let mut model = Model::new();
    let mut overrides: std::collections::BTreeMap<String, ComplexMatrix> = Default::default();
    if let Some(path) = override_file {
        let src =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        #[derive(serde::Deserialize)]
        struct Overrides {
            boxes: std::collections::BTreeMap<String, ComplexMatrix>,
        }
        let parsed: Overrides =
            serde_json::from_str(&src).with_context(|| format!("parsing {}", path.display()))?;
        overrides = parsed.boxes;
    }
    for (name, decl) in &prog.boxes {
        if let Some(m) = overrides.remove(name) {
            model.bind_box(name, m);
            continue;
        }
        let path = base.join(&decl.path);
        let src = std::fs::read_to_string(&path)
            .with_context(|| format!("reading box matrix {}", path.display()))?;
        let m: ComplexMatrix =
            serde_json::from_str(&src).with_context(|| format!("parsing {}", path.display()))?;
        model.bind_box(name, m);
    }
    for (name, m) in overrides {
        model.bind_box(name, m);
    }
    Ok(model)
}

fn print_matrix(m: &ComplexMatrix) {
    println!("{} x {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|c| {
                let z = m.get(r, c);
                if z.im == 0.0 {
                    format!("{:+.4}", z.re)
                } else {
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                }
            })
            .collect();
        println!("  [{}]", row.join(", "));
    }
}
