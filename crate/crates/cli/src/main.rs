use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cghz_core::analysis::{sweep, SweepGrid};
use cghz_core::coherent::CsState;
use cghz_core::dsl::{self, format_real};
use cghz_core::engine::{run_with, Circuit, RunError, RunOptions, RunResult};
use cghz_core::fock::{csstate_to_fock, fock_inner, run_fock, DEFAULT_NMAX};
use cghz_core::optics::SelectionMode;
use cghz_core::protocol::{build_cghz_circuit, ideal_cghz_state, output_modes, ProtocolParams};
use cghz_core::report::{parse_alpha_range, write_csv, write_json};

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cghz",
    version,
    about = "Build, simulate and sweep concatenated GHZ coherent-state circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Branch,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the preparation circuit for N logical qubits of m modes each
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate a circuit file
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "branch")]
        mode: Mode,
        #[arg(long, default_value_t = SelectionMode::DEFAULT_BRANCH_TOL)]
        branch_tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the protocol over a grid; N and m accept comma-separated lists
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        /// START:STOP:STEP
        #[arg(long)]
        alpha: String,
        #[arg(long, value_enum, default_value = "branch")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the ideal target state as a term list
    Target {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        json: bool,
    },
    /// Run a circuit of at most four live modes in the number basis and
    /// compare with the exact simulation
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NMAX)]
        nmax: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        Failure::new(EXIT_RUNTIME, e.to_string())
    }
}

fn run_error(e: RunError) -> Failure {
    match e {
        RunError::Invalid(_) => Failure::new(EXIT_INVALID, e.to_string()),
        RunError::Step { .. } => Failure::runtime(e),
    }
}

fn selection(mode: Mode, tol: f64) -> Result<SelectionMode, Failure> {
    match mode {
        Mode::Exact => Ok(SelectionMode::Exact),
        Mode::Branch if tol >= 0.0 && tol.is_finite() => Ok(SelectionMode::Branch { tol }),
        Mode::Branch => Err(Failure::new(
            EXIT_USAGE,
            format!("--branch-tol must be >= 0, got {tol}"),
        )),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(Failure::runtime),
    }
}

fn load(path: &Path) -> Result<Circuit, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::runtime(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::new(EXIT_INVALID, format!("{}: not valid UTF-8", path.display())))?;
    match dsl::parse(&text) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                eprintln!("{}:{w}", path.display());
            }
            Ok(parsed.circuit)
        }
        Err(diags) => {
            let lines: Vec<String> = diags
                .iter()
                .map(|d| format!("{}:{d}", path.display()))
                .collect();
            Err(Failure::new(EXIT_INVALID, lines.join("\n")))
        }
    }
}

fn complex_json(re: f64, im: f64) -> Value {
    json!([re, im])
}

fn terms_json(s: &CsState) -> Value {
    s.terms()
        .iter()
        .map(|t| {
            json!({
                "coeff": complex_json(t.coeff.re, t.coeff.im),
                "amps": t.amps.iter().map(|a| complex_json(a.re, a.im)).collect::<Vec<_>>(),
            })
        })
        .collect()
}

fn complex_text(re: f64, im: f64) -> String {
    if im == 0.0 {
        return format_real(re);
    }
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{}{sign}{}i", format_real(re), format_real(im.abs()))
}

fn terms_text(s: &CsState, names: &[String]) -> String {
    let mut out = format!("modes: {}\n", names.join(" "));
    for t in s.terms() {
        let amps: Vec<String> = t.amps.iter().map(|a| complex_text(a.re, a.im)).collect();
        out.push_str(&format!(
            "{:>24}  [{}]\n",
            complex_text(t.coeff.re, t.coeff.im),
            amps.join(", ")
        ));
    }
    out
}

fn params(n: usize, m: usize, alpha: f64) -> Result<ProtocolParams, Failure> {
    ProtocolParams::new(n, m, alpha).map_err(Failure::runtime)
}

fn cmd_build(n: usize, m: usize, alpha: f64, output: Option<PathBuf>) -> Result<(), Failure> {
    let circuit = build_cghz_circuit(&params(n, m, alpha)?).map_err(Failure::runtime)?;
    emit(&dsl::serialize(&circuit), output.as_deref())
}

fn run_json(r: &RunResult, mode: SelectionMode) -> Value {
    json!({
        "alpha": r.alpha,
        "mode": mode.tag(),
        "p_success": r.p_success,
        "total_false_vacuum": r.total_false_vacuum,
        "peak_terms": r.peak_terms,
        "term_count": r.final_state.len(),
        "mode_order": r.mode_order,
        "selections": r.selections,
        "terms": terms_json(&r.final_state),
    })
}

fn cmd_run(file: &Path, mode: Mode, tol: f64, as_json: bool) -> Result<(), Failure> {
    let sel = selection(mode, tol)?;
    let circuit = load(file)?;
    let r = run_with(&circuit, &RunOptions::new(sel)).map_err(run_error)?;
    let text = if as_json {
        let mut s = serde_json::to_string_pretty(&run_json(&r, sel)).map_err(Failure::runtime)?;
        s.push('\n');
        s
    } else {
        let mut s = format!(
            "mode: {}\np_success: {}\nfalse_vacuum_total: {}\npeak_terms: {}\n",
            sel.tag(),
            format_real(r.p_success),
            format_real(r.total_false_vacuum),
            r.peak_terms
        );
        for step in &r.selections {
            s.push_str(&format!(
                "select0 {} (instruction {}): kept {} false_vacuum {}\n",
                step.mode_name,
                step.instruction,
                format_real(step.record.kept_prob),
                format_real(step.record.false_vacuum_prob)
            ));
        }
        s.push_str(&terms_text(&r.final_state, &r.mode_order));
        s
    };
    emit(&text, None)
}

fn cmd_sweep(
    n: Vec<usize>,
    m: Vec<usize>,
    alpha: &str,
    mode: Mode,
    format: Format,
    output: Option<PathBuf>,
) -> Result<(), Failure> {
    let alphas = parse_alpha_range(alpha).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let grid = SweepGrid {
        n,
        m,
        alpha: alphas,
        mode: selection(mode, SelectionMode::DEFAULT_BRANCH_TOL)?,
    };
    let outcome = sweep(&grid);
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&outcome.points, &mut buf),
        Format::Json => write_json(&outcome.points, &mut buf),
    }
    .map_err(Failure::runtime)?;
    emit(&String::from_utf8_lossy(&buf), output.as_deref())?;
    if outcome.diagnostics.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = outcome
        .diagnostics
        .iter()
        .map(|d| format!("point n={} m={} alpha={}: {}", d.n, d.m, d.alpha, d.message))
        .collect();
    Err(Failure::runtime(lines.join("\n")))
}

fn cmd_target(n: usize, m: usize, alpha: f64, as_json: bool) -> Result<(), Failure> {
    let p = params(n, m, alpha)?;
    let s = ideal_cghz_state(&p).map_err(Failure::runtime)?;
    let names = output_modes(n, m);
    let text = if as_json {
        let v = json!({ "alpha": alpha, "n": n, "m": m, "modes": names, "terms": terms_json(&s) });
        serde_json::to_string_pretty(&v).map_err(Failure::runtime)? + "\n"
    } else {
        terms_text(&s, &names)
    };
    emit(&text, None)
}

fn cmd_oracle(file: &Path, nmax: usize) -> Result<(), Failure> {
    let circuit = load(file)?;
    let exact = run_with(&circuit, &RunOptions::new(SelectionMode::Exact)).map_err(run_error)?;
    let fock = run_fock(&circuit, nmax).map_err(run_error)?;
    let fock_state = fock
        .state_in_order(&exact.mode_order)
        .map_err(Failure::runtime)?;
    let exact_state = csstate_to_fock(&exact.final_state, nmax).map_err(Failure::runtime)?;
    let overlap = fock_inner(&exact_state, &fock_state)
        .map_err(Failure::runtime)?
        .norm_sqr()
        / (exact_state.norm_sqr() * fock_state.norm_sqr());
    let dp = (exact.p_success - fock.p_success).abs();
    let text = format!(
        "nmax: {nmax}\npeak_modes: {}\np_success exact: {}\np_success fock: {}\n|dp|: {}\nstate overlap: {}\n1 - overlap: {}\n",
        fock.peak_modes,
        format_real(exact.p_success),
        format_real(fock.p_success),
        format_real(dp),
        format_real(overlap),
        format_real(1.0 - overlap),
    );
    emit(&text, None)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build {
            n,
            m,
            alpha,
            output,
        } => cmd_build(n, m, alpha, output),
        Command::Run {
            file,
            mode,
            branch_tol,
            json,
        } => cmd_run(&file, mode, branch_tol, json),
        Command::Sweep {
            n,
            m,
            alpha,
            mode,
            format,
            output,
        } => cmd_sweep(n, m, &alpha, mode, format, output),
        Command::Target { n, m, alpha, json } => cmd_target(n, m, alpha, json),
        Command::Oracle { file, nmax } => cmd_oracle(&file, nmax),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cghz: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
