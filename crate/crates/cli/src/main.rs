//! Command-line front end: instance generation, spectra, synchronization,
//! brute-force oracles and the bound verification suite.
//!
//! Exit codes: 0 on success (and on all bounds passing), 1 when a
//! non-vacuous bound fails, 2 on usage or I/O errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use consync::fields::{write_field, write_potential};
use consync::frustration::{eta_l1, nu_l1};
use consync::generators::{self, InstanceSpec};
use consync::graph::{read_graph, write_graph, ConnectionGraph};
use consync::laplacian::{bottom_spectrum, LaplacianKind};
use consync::oracle::{brute_force_d1, grid_search_d2, ConstantKind, OracleMethod};
use consync::rounding::{sync_full_sphere, sync_orthogonal, sync_partial_sphere, SyncOutput};
use consync::verify::{
    all_passed, check_appendix, check_lemmas, check_theorems, render_properties, render_records,
    render_reports,
};

#[derive(Parser)]
#[command(name = "consync", version, about = "Synchronization over O(d) via connection Laplacian spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Ring,
    Rainbow,
    #[value(name = "two_cliques_o2")]
    TwoCliquesO2,
    Consistent,
    Outliers,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Partial,
    Full,
    Od,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a named instance and write it in the graph text format.
    Generate {
        #[arg(long)]
        family: Family,
        /// Vertex count (per family; ignored by two_cliques_o2).
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Transform dimension (ring/rainbow/consistent/outliers).
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Edge probability for the random families.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Outlier fraction for the outliers family.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Vertices per clique for two_cliques_o2.
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the k smallest eigenvalues of a normalized Laplacian.
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        /// Use the plain graph Laplacian instead of the connection Laplacian.
        #[arg(long)]
        plain: bool,
    },
    /// Run one synchronization algorithm and print its certificate.
    Sync {
        #[arg(long)]
        mode: Mode,
        #[arg(long = "in")]
        input: PathBuf,
        /// Also report the unsquared frustration of the output.
        #[arg(long)]
        l1: bool,
        /// Write the solution (field or potential) to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a frustration constant by brute force.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        kind: String,
        /// Angle count per quarter scan for the d = 2 grid oracle.
        #[arg(long, default_value_t = 32)]
        steps: usize,
    },
    /// Check every certified inequality on an instance.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write machine-readable records to this path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn fail_usage(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn load_graph(path: &PathBuf) -> Result<ConnectionGraph<f64>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let graph = read_graph::<f64>(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    graph.validated().map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(graph)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { family, n, d, p, eps, m, seed, out } => {
            let spec = match family {
                Family::Ring => InstanceSpec::Ring { n, d },
                Family::Rainbow => InstanceSpec::Rainbow { n, d },
                Family::TwoCliquesO2 => InstanceSpec::TwoCliquesO2 { m },
                Family::Consistent => InstanceSpec::ConsistentRandom { n, d, p, seed },
                Family::Outliers => InstanceSpec::OutlierNoise { n, d, p, eps, seed },
            };
            let instance = match generators::generate::<f64>(&spec) {
                Ok(instance) => instance,
                Err(e) => return fail_usage(e),
            };
            if let Err(e) = fs::write(&out, write_graph(&instance.graph)) {
                return fail_usage(format!("{}: {e}", out.display()));
            }
            println!(
                "generated n={} d={} edges={} -> {}",
                instance.graph.n(),
                instance.graph.d(),
                instance.graph.edges().len(),
                out.display()
            );
            ExitCode::SUCCESS
        }
        Command::Spectrum { input, k, plain } => {
            let graph = match load_graph(&input) {
                Ok(g) => g,
                Err(e) => return fail_usage(e),
            };
            let kind = if plain { LaplacianKind::Plain } else { LaplacianKind::Connection };
            let spectrum = match bottom_spectrum(&graph, kind, k) {
                Ok(s) => s,
                Err(e) => return fail_usage(e),
            };
            println!("# {} laplacian, {} smallest eigenvalues", if plain { "plain" } else { "connection" }, k);
            for (idx, lambda) in spectrum.lambdas.iter().enumerate() {
                println!("{idx} {lambda:.11e}");
            }
            ExitCode::SUCCESS
        }
        Command::Sync { mode, input, l1, out } => {
            let graph = match load_graph(&input) {
                Ok(g) => g,
                Err(e) => return fail_usage(e),
            };
            let solution = match mode {
                Mode::Partial => sync_partial_sphere(&graph),
                Mode::Full => sync_full_sphere(&graph),
                Mode::Od => sync_orthogonal(&graph),
            };
            let solution = match solution {
                Ok(s) => s,
                Err(e) => return fail_usage(e),
            };
            let mode_name = match mode {
                Mode::Partial => "partial",
                Mode::Full => "full",
                Mode::Od => "od",
            };
            let cert = &solution.certificate;
            let lambdas: Vec<String> =
                cert.lambdas.iter().map(|l| format!("{l:.11e}")).collect();
            print!(
                "mode={mode_name} achieved={:.11e} certificate={} lambdas=[{}]",
                solution.achieved,
                if cert.is_vacuous() { "vacuous".to_string() } else { format!("{:.11e}", cert.bound) },
                lambdas.join(", ")
            );
            if let Some(gap) = cert.lambda2_l0 {
                print!(" lambda2_l0={gap:.11e}");
            }
            println!();
            if l1 {
                match &solution.output {
                    SyncOutput::Field(field) => match eta_l1(&graph, field) {
                        Ok(value) => println!("eta_l1={value:.11e}"),
                        Err(e) => return fail_usage(e),
                    },
                    SyncOutput::Potential(p) => match nu_l1(&graph, p) {
                        Ok(value) => println!("nu_l1={value:.11e}"),
                        Err(e) => return fail_usage(e),
                    },
                }
            }
            if let Some(path) = out {
                let text = match &solution.output {
                    SyncOutput::Field(field) => write_field(field),
                    SyncOutput::Potential(p) => write_potential(p),
                };
                if let Err(e) = fs::write(&path, text) {
                    return fail_usage(format!("{}: {e}", path.display()));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Oracle { input, kind, steps } => {
            let graph = match load_graph(&input) {
                Ok(g) => g,
                Err(e) => return fail_usage(e),
            };
            let kind = match ConstantKind::parse(&kind) {
                Some(k) => k,
                None => return fail_usage(format!("unknown constant kind `{kind}`")),
            };
            let result = match graph.d() {
                1 => brute_force_d1(&graph, kind),
                2 => grid_search_d2(&graph, kind, steps),
                other => {
                    return fail_usage(format!("no oracle available for d = {other}"));
                }
            };
            let result = match result {
                Ok(r) => r,
                Err(e) => return fail_usage(e),
            };
            match result.method {
                OracleMethod::ExactEnumeration => {
                    println!("kind={} method=exact value={:.16e}", result.kind.name(), result.value);
                }
                OracleMethod::Grid { steps } => {
                    println!(
                        "kind={} method=grid steps={steps} value={:.16e} # grid value is an upper bound at this resolution",
                        result.kind.name(),
                        result.value
                    );
                }
            }
            ExitCode::SUCCESS
        }
        Command::Verify { input, trials, seed, report } => {
            let graph = match load_graph(&input) {
                Ok(g) => g,
                Err(e) => return fail_usage(e),
            };
            let reports = match check_theorems(&graph, seed) {
                Ok(r) => r,
                Err(e) => return fail_usage(e),
            };
            let checks = match check_lemmas(&graph, trials, seed) {
                Ok(c) => c,
                Err(e) => return fail_usage(e),
            };
            let mut all_checks = checks;
            all_checks.push(check_appendix::<f64>(trials.max(1) * 100, seed));
            print!("{}", render_reports(&reports));
            println!();
            print!("{}", render_properties(&all_checks));
            if let Some(path) = report {
                if let Err(e) = fs::write(&path, render_records(&reports, &all_checks)) {
                    return fail_usage(format!("{}: {e}", path.display()));
                }
            }
            if all_passed(&reports, &all_checks) {
                println!("\nall checks passed");
                ExitCode::SUCCESS
            } else {
                println!("\nsome checks FAILED");
                ExitCode::FAILURE
            }
        }
    }
}
