//! `tempocorr`: analyze, simulate and quantify temporal correlations given as
//! channel spec files.
//!
//! Exit codes: 0 success, 2 parse or validation error, 3 channel not CPTP,
//! 4 operation not supported for this channel.

mod output;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use tempocorr::channels::{self, CptpReport};
use tempocorr::entanglement::ConvexRoofOptions;
use tempocorr::protocol::{analytic_joint, run_protocol};
use tempocorr::qmath;
use tempocorr::quantifier::{self, QOptions, QReport};
use tempocorr::states::{self, BasisPair, PureState};
use tempocorr::tomography::{self, Shots};

use output::{csv, envelope, num, to_json_matrix, JsonMatrix};

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Core(tempocorr::Error),
    NotCptp(CptpReport),
    Unsupported(String),
}

impl From<tempocorr::Error> for CliError {
    fn from(e: tempocorr::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Core(_) => 2,
            CliError::NotCptp(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::NotCptp(r) => write!(
                f,
                "channel is not CPTP: trace-preservation defect {:e}, minimum Choi eigenvalue {:e}",
                r.tp_defect, r.min_choi_eigenvalue
            ),
            CliError::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "tempocorr", version, about = "Temporal correlations as quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
#[group(multiple = false)]
struct Format {
    /// JSON envelope (default).
    #[arg(long)]
    json: bool,
    /// Scalar series as CSV with a header row.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Clone, Copy)]
struct Search {
    /// Optimizer restarts.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Master seed; restart k uses a seed derived from (seed, k).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simplex iterations per restart.
    #[arg(long, default_value_t = 300)]
    iterations: usize,
    /// Stop a restart once the simplex spread is at or below this.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

impl Search {
    fn options(&self) -> QOptions {
        QOptions {
            restarts: self.restarts,
            max_iterations: self.iterations,
            tolerance: self.tolerance,
            ..QOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Choi matrix, CPTP diagnostics, Choi purity and Q in fixed bases.
    Analyze {
        spec: PathBuf,
        /// Use random bases drawn from this seed instead of the computational ones.
        #[arg(long)]
        basis_seed: Option<u64>,
        #[command(flatten)]
        format: Format,
    },
    /// Run the ancilla protocol and compare with the closed-form joint state.
    Protocol {
        spec: PathBuf,
        /// `mu` for the maximally coherent state, or amplitudes as `a,b,...`
        /// (real) or a JSON list of [re, im] pairs. Normalized before use.
        #[arg(long, default_value = "mu")]
        state: String,
        /// Expected input dimension; checked against the spec.
        #[arg(long)]
        d: Option<usize>,
        /// Draw random bases from this seed instead of the computational ones.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Simulated tomography of the Choi state and recovery of the channel.
    Tomo {
        spec: PathBuf,
        /// `exact` or a shot count per observable.
        #[arg(long, default_value = "exact")]
        shots: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Q(Φ): minimum over σ_U of the entanglement of formation.
    Quantify {
        spec: PathBuf,
        #[command(flatten)]
        search: Search,
        /// Random independent basis pairs to compare against.
        #[arg(long, default_value_t = 8)]
        spot_check: usize,
        #[command(flatten)]
        format: Format,
    },
    /// Q over a grid of depolarizing strengths for a depolarized-unitary spec.
    Sweep {
        spec: PathBuf,
        /// Comma-separated ε values in [0, 1].
        #[arg(long, default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
        eps_grid: String,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        format: Format,
    },
    /// List built-in channels or write one as a spec file.
    Zoo {
        #[arg(long, conflicts_with = "emit", required_unless_present = "emit")]
        list: bool,
        #[arg(long, num_args = 2, value_names = ["NAME", "PATH"])]
        emit: Option<Vec<String>>,
    },
}

/// Text for stdout and the exit code to finish with.
struct Finished {
    text: String,
    code: u8,
}

impl Finished {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(done) => {
            print!("{}", done.text);
            ExitCode::from(done.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<Finished, CliError> {
    match command {
        Command::Analyze {
            spec,
            basis_seed,
            format,
        } => analyze(&spec, basis_seed, format),
        Command::Protocol { spec, state, d, seed } => protocol(&spec, &state, d, seed),
        Command::Tomo { spec, shots, seed } => tomo(&spec, &shots, seed),
        Command::Quantify {
            spec,
            search,
            spot_check,
            format,
        } => quantify(&spec, search, spot_check, format),
        Command::Sweep {
            spec,
            eps_grid,
            search,
            format,
        } => sweep(&spec, &eps_grid, search, format),
        Command::Zoo { list, emit } => zoo(list, emit),
    }
}

fn load(path: &Path) -> Result<spec::Resolved, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    spec::parse(&text)
}

#[derive(Serialize)]
struct SpecEcho {
    spec_path: String,
    name: String,
    kind: &'static str,
    d_in: usize,
    d_out: usize,
}

fn echo(path: &Path, r: &spec::Resolved) -> SpecEcho {
    SpecEcho {
        spec_path: path.display().to_string(),
        name: r.spec.name.clone(),
        kind: r.spec.body.kind(),
        d_in: r.spec.d_in,
        d_out: r.spec.d_out,
    }
}

#[derive(Serialize)]
struct CptpOut {
    cptp: bool,
    min_choi_eigenvalue: f64,
    tp_defect: f64,
}

impl From<&CptpReport> for CptpOut {
    fn from(r: &CptpReport) -> Self {
        Self {
            cptp: r.cptp,
            min_choi_eigenvalue: r.min_choi_eigenvalue,
            tp_defect: r.tp_defect,
        }
    }
}

#[derive(Serialize)]
struct Sample {
    seed: u64,
    value: f64,
}

#[derive(Serialize)]
struct QOut {
    q_value: f64,
    kind: &'static str,
    best_u: JsonMatrix,
    landscape_samples: Vec<Sample>,
}

impl From<&QReport> for QOut {
    fn from(q: &QReport) -> Self {
        Self {
            q_value: q.q_value,
            kind: q.kind.as_str(),
            best_u: to_json_matrix(&q.best_u),
            landscape_samples: q
                .landscape_samples
                .iter()
                .map(|&(seed, value)| Sample { seed, value })
                .collect(),
        }
    }
}

fn bases_for(d0: usize, d1: usize, seed: Option<u64>) -> BasisPair {
    match seed {
        Some(s) => BasisPair::random(d0, d1, s),
        None => BasisPair::computational(d0, d1),
    }
}

fn analyze(path: &Path, basis_seed: Option<u64>, format: Format) -> Result<Finished, CliError> {
    #[derive(Serialize)]
    struct Inputs {
        spec: SpecEcho,
        basis_seed: Option<u64>,
        eof_restarts: usize,
    }
    #[derive(Serialize)]
    struct Outputs {
        cptp: CptpOut,
        choi: JsonMatrix,
        choi_purity: f64,
        q_fixed_basis: Option<QOut>,
    }

    let r = load(path)?;
    let report = r.cptp_report()?;
    let choi = channels::choi_of_kraus(&r.kraus)?;
    let purity = qmath::frob_inner(&choi, &choi)?.re;
    let eof = ConvexRoofOptions::default();
    let q = if report.cptp && r.spec.d_in == r.spec.d_out {
        let ch = r.channel()?;
        let bases = bases_for(r.spec.d_in, r.spec.d_out, basis_seed);
        Some(quantifier::q_fixed_basis_with(
            &ch,
            &bases,
            &eof,
            basis_seed.unwrap_or(0),
        )?)
    } else {
        None
    };
    let code = if report.cptp { 0 } else { 3 };
    if !report.cptp {
        eprintln!("error: {}", CliError::NotCptp(report));
    }

    let text = if format.csv {
        let mut rows = vec![
            vec!["cptp".into(), (report.cptp as u8).to_string()],
            vec!["min_choi_eigenvalue".into(), num(report.min_choi_eigenvalue)],
            vec!["tp_defect".into(), num(report.tp_defect)],
            vec!["choi_purity".into(), num(purity)],
        ];
        if let Some(q) = &q {
            rows.push(vec!["q_fixed_basis".into(), num(q.q_value)]);
        }
        csv(&["quantity", "value"], &rows)
    } else {
        envelope(
            "analyze",
            Inputs {
                spec: echo(path, &r),
                basis_seed,
                eof_restarts: eof.restarts,
            },
            Outputs {
                cptp: CptpOut::from(&report),
                choi: to_json_matrix(&choi),
                choi_purity: purity,
                q_fixed_basis: q.as_ref().map(QOut::from),
            },
        )
    };
    Ok(Finished { text, code })
}

fn parse_state(text: &str, d: usize) -> Result<Option<PureState>, CliError> {
    let text = text.trim();
    if text == "mu" {
        return Ok(None);
    }
    let amplitudes: Vec<Complex64> = if text.starts_with('[') {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("--state: {e}")))?;
        pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()
    } else {
        text.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map(|x| Complex64::new(x, 0.0))
                    .map_err(|e| CliError::Parse(format!("--state: {t:?}: {e}")))
            })
            .collect::<Result<_, _>>()?
    };
    if amplitudes.len() != d {
        return Err(CliError::Parse(format!(
            "--state has {} amplitudes, expected {d}",
            amplitudes.len()
        )));
    }
    Ok(Some(PureState::normalized(amplitudes, vec![d])?))
}

fn protocol(path: &Path, state: &str, d: Option<usize>, seed: Option<u64>) -> Result<Finished, CliError> {
    #[derive(Serialize)]
    struct Inputs {
        spec: SpecEcho,
        state: String,
        state_vector: Vec<[f64; 2]>,
        d: usize,
        bases_seed: Option<u64>,
    }
    #[derive(Serialize)]
    struct Outputs {
        success_prob: f64,
        joint: JsonMatrix,
        analytic_deviation: f64,
        b0: JsonMatrix,
        b1: JsonMatrix,
    }

    let r = load(path)?;
    let ch = r.channel()?;
    let d0 = ch.d_in();
    if let Some(d) = d {
        if d != d0 {
            return Err(CliError::Parse(format!("--d {d} does not match the spec's d_in {d0}")));
        }
    }
    let bases = bases_for(d0, ch.d_out(), seed);
    let psi = match parse_state(state, d0)? {
        Some(p) => p,
        None => states::max_coherent(d0, bases.b0())?,
    };
    let rho0 = psi.to_density();
    let run = run_protocol(&rho0, &ch, &bases)?;
    let closed = analytic_joint(&rho0, &ch, &bases)?;
    let text = envelope(
        "protocol",
        Inputs {
            spec: echo(path, &r),
            state: state.trim().to_string(),
            state_vector: psi.vec().iter().map(|z| [z.re, z.im]).collect(),
            d: d0,
            bases_seed: seed,
        },
        Outputs {
            success_prob: run.success_prob,
            joint: to_json_matrix(run.joint.mat()),
            analytic_deviation: run.joint.mat().max_abs_diff(closed.mat()),
            b0: to_json_matrix(bases.b0()),
            b1: to_json_matrix(bases.b1()),
        },
    );
    Ok(Finished::ok(text))
}

fn tomo(path: &Path, shots: &str, seed: u64) -> Result<Finished, CliError> {
    #[derive(Serialize)]
    struct Inputs {
        spec: SpecEcho,
        shots: String,
        seed: u64,
    }
    #[derive(Serialize)]
    struct Estimate {
        label: String,
        value: f64,
    }
    #[derive(Serialize)]
    struct Outputs {
        trace_distance: f64,
        extensional_error: f64,
        reconstructed_choi: JsonMatrix,
        phi: JsonMatrix,
        estimates: Vec<Estimate>,
    }

    let shots = match shots.trim() {
        "exact" => Shots::Exact,
        n => match n.parse::<u64>() {
            Ok(k) if k > 0 => Shots::Finite(k),
            _ => {
                return Err(CliError::Parse(format!(
                    "--shots must be `exact` or a positive count, got {n:?}"
                )))
            }
        },
    };
    let r = load(path)?;
    let ch = r.channel()?;
    let basis = tomography::product_observable_basis(ch.d_in(), ch.d_out())
        .map_err(|e| CliError::Unsupported(e.to_string()))?;
    let comp = BasisPair::computational(ch.d_in(), ch.d_out());
    let mu = states::max_coherent(ch.d_in(), comp.b0())?.to_density();
    let joint = run_protocol(&mu, &ch, &comp)?.joint;
    let record = tomography::measure(&joint, &basis, shots, seed)?;
    let rho = tomography::reconstruct(&record, &basis)?;
    let (phi, recovered) = tomography::channel_from_choi_state(&rho)?;
    let truth = channels::to_choi(&ch);
    let text = envelope(
        "tomo",
        Inputs {
            spec: echo(path, &r),
            shots: match shots {
                Shots::Exact => "exact".into(),
                Shots::Finite(n) => n.to_string(),
            },
            seed,
        },
        Outputs {
            trace_distance: qmath::trace_distance(rho.mat(), truth.mat()),
            extensional_error: channels::extensional_distance(&recovered, &ch)?,
            reconstructed_choi: to_json_matrix(rho.mat()),
            phi: to_json_matrix(phi.as_matrix()),
            estimates: record
                .labels
                .iter()
                .zip(&record.estimates)
                .map(|(label, &value)| Estimate {
                    label: label.clone(),
                    value,
                })
                .collect(),
        },
    );
    Ok(Finished::ok(text))
}

#[derive(Serialize)]
struct SearchEcho {
    restarts: usize,
    seed: u64,
    iterations: usize,
    tolerance: f64,
    eof_restarts: usize,
    eof_iterations: usize,
}

impl SearchEcho {
    fn new(search: Search) -> Self {
        let opts = search.options();
        Self {
            restarts: opts.restarts,
            seed: search.seed,
            iterations: opts.max_iterations,
            tolerance: opts.tolerance,
            eof_restarts: opts.eof.restarts,
            eof_iterations: opts.eof.max_iterations,
        }
    }
}

fn square_channel(r: &spec::Resolved) -> Result<tempocorr::channels::KrausChannel, CliError> {
    let ch = r.channel()?;
    if ch.d_in() != ch.d_out() {
        return Err(CliError::Unsupported(format!(
            "Q is defined for d_in = d_out, got {}→{}",
            ch.d_in(),
            ch.d_out()
        )));
    }
    Ok(ch)
}

fn quantify(path: &Path, search: Search, spot_check: usize, format: Format) -> Result<Finished, CliError> {
    #[derive(Serialize)]
    struct Inputs {
        spec: SpecEcho,
        search: SearchEcho,
        spot_check: usize,
    }
    #[derive(Serialize)]
    struct Outputs {
        q: QOut,
        independent_basis_min: Option<f64>,
    }

    let r = load(path)?;
    let ch = square_channel(&r)?;
    let opts = search.options();
    let q = quantifier::q_inf(&ch, &opts, search.seed)?;
    let spot = if spot_check > 0 {
        Some(quantifier::independent_basis_min(
            &ch,
            spot_check,
            &opts.eof,
            search.seed,
        )?)
    } else {
        None
    };
    let text = if format.csv {
        let rows: Vec<Vec<String>> = q
            .landscape_samples
            .iter()
            .map(|&(s, v)| vec![s.to_string(), num(v)])
            .collect();
        csv(&["seed", "value"], &rows)
    } else {
        envelope(
            "quantify",
            Inputs {
                spec: echo(path, &r),
                search: SearchEcho::new(search),
                spot_check,
            },
            Outputs {
                q: QOut::from(&q),
                independent_basis_min: spot,
            },
        )
    };
    Ok(Finished::ok(text))
}

fn sweep(path: &Path, grid: &str, search: Search, format: Format) -> Result<Finished, CliError> {
    #[derive(Serialize)]
    struct Inputs {
        spec: SpecEcho,
        eps_grid: Vec<f64>,
        search: SearchEcho,
    }
    #[derive(Serialize)]
    struct Point {
        eps: f64,
        q_value: f64,
        kind: &'static str,
    }
    #[derive(Serialize)]
    struct Outputs {
        series: Vec<Point>,
    }

    let eps_grid: Vec<f64> = grid
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Parse(format!("--eps-grid: {t:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let r = load(path)?;
    r.channel()?;
    let Some(v) = r.depolarized_unitary() else {
        return Err(CliError::Unsupported(format!(
            "sweep needs a depolarized_unitary spec, got {}",
            r.spec.body.kind()
        )));
    };
    let series = quantifier::q_sweep(&v, &eps_grid, &search.options(), search.seed)?;
    let text = if format.csv {
        let rows: Vec<Vec<String>> = series
            .iter()
            .map(|(eps, q)| vec![num(*eps), num(q.q_value), q.kind.as_str().to_string()])
            .collect();
        csv(&["eps", "q", "kind"], &rows)
    } else {
        envelope(
            "sweep",
            Inputs {
                spec: echo(path, &r),
                eps_grid: eps_grid.clone(),
                search: SearchEcho::new(search),
            },
            Outputs {
                series: series
                    .iter()
                    .map(|(eps, q)| Point {
                        eps: *eps,
                        q_value: q.q_value,
                        kind: q.kind.as_str(),
                    })
                    .collect(),
            },
        )
    };
    Ok(Finished::ok(text))
}

fn zoo(list: bool, emit: Option<Vec<String>>) -> Result<Finished, CliError> {
    #[derive(Serialize)]
    struct Entry {
        name: &'static str,
        kind: &'static str,
        d: usize,
    }
    #[derive(Serialize)]
    struct Listing {
        channels: Vec<Entry>,
    }
    #[derive(Serialize)]
    struct EmitInputs {
        name: String,
        path: String,
    }
    #[derive(Serialize)]
    struct Emitted {
        written: bool,
    }

    if list {
        let channels = spec::ZOO
            .iter()
            .map(|&name| {
                let s = spec::zoo(name).expect("zoo names resolve");
                Entry {
                    name,
                    kind: s.body.kind(),
                    d: s.d_in,
                }
            })
            .collect();
        return Ok(Finished::ok(envelope("zoo", (), Listing { channels })));
    }
    let args = emit.expect("clap requires --list or --emit");
    let (name, path) = (&args[0], &args[1]);
    let s = spec::zoo(name)
        .ok_or_else(|| CliError::Parse(format!("unknown channel {name:?}; known: {}", spec::ZOO.join(", "))))?;
    fs::write(path, s.to_json()).map_err(|e| CliError::Parse(format!("{path}: {e}")))?;
    Ok(Finished::ok(envelope(
        "zoo",
        EmitInputs {
            name: name.clone(),
            path: path.clone(),
        },
        Emitted { written: true },
    )))
}
