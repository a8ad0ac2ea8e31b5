//! `mgc`: tables and checks for matchgate and Clifford-matchgate commutants.

mod table;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use mgc_core::applications::{
    covariance_matrix, definetti_bound, definetti_ratio, faf, gaussianity_residual, phi0,
    sre_annealed, state_frame_potential, unitary_frame_potential, Ensemble, Estimate, FpMode,
    SreMode, StateVector,
};
use mgc_core::clifford::{cm_dim, cm_twirl, enumerate_occupancies, pattern_operator};
use mgc_core::gt::gt_basis;
use mgc_core::pairing::{all_pairing_operators, span_rank, RANK_TOL};
use mgc_core::verify::{self, Level, Status, VerifyConfig};
use mgc_core::{commutant_dim, matchgate_twirl, MgcError, OperatorExpansion, C64};

use table::Table;

#[derive(Parser, Debug)]
#[command(
    name = "mgc",
    version,
    about = "Matchgate and Clifford-matchgate commutant toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random draw of this invocation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo sample count.
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    /// Multiplier on the default check tolerances.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Commutant dimensions of both ensembles.
    Dim {
        /// Qubit count or inclusive range such as 1..3.
        #[arg(long, default_value = "1..3")]
        n: Span,
        #[arg(long, default_value = "2..4")]
        k: Span,
    },
    /// Run the verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyLevel::Quick)]
        level: VerifyLevel,
    },
    /// Emit a commutant basis.
    Basis {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Which::Gt)]
        which: Which,
    },
    /// Twirl an operator read from a JSON file.
    Twirl {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = EnsembleArg::Matchgate)]
        ensemble: EnsembleArg,
        /// Project onto the span of a basis emitted by `mgc basis` instead.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Unitary or state frame potentials.
    FramePotential {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Kind::State)]
        kind: Kind,
        #[arg(long, value_enum, default_value_t = EnsembleArg::Matchgate)]
        ensemble: EnsembleArg,
        #[arg(long, value_enum, default_value_t = ModeArg::All)]
        mode: ModeArg,
    },
    /// Annealed stabilizer Renyi entropy of the matchgate ensemble.
    Sre {
        #[arg(long)]
        n: usize,
    },
    /// Gaussian de Finetti bound and ratio.
    Definetti {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        l: usize,
    },
    /// Non-Gaussianity measures of a state read from a JSON amplitude list.
    Nongauss {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Measure::Faf, Measure::Phi0, Measure::Residual])]
        measures: Vec<Measure>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VerifyLevel {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Which {
    Gt,
    Pairing,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EnsembleArg {
    Matchgate,
    CliffordMatchgate,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Matchgate => Ensemble::Matchgate,
            EnsembleArg::CliffordMatchgate => Ensemble::CliffordMatchgate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Unitary,
    State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    All,
    Closed,
    Rmt,
    Purity,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Measure {
    Faf,
    Phi0,
    Residual,
    Covariance,
}

/// Inclusive integer range, written `a` or `a..b`.
#[derive(Clone, Copy, Debug)]
struct Span(usize, usize);

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let a = parse(s)?;
                (a, a)
            }
        };
        if a > b {
            return Err(format!("empty range {s}"));
        }
        Ok(Span(a, b))
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] MgcError),
    #[error("{path}: {msg}")]
    Input { path: String, msg: String },
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(MgcError::Capacity { .. }) => 3,
            CliError::Output(_) => 1,
            _ => 2,
        }
    }
}

enum Output {
    Table(Table),
    Document { json: Value, csv: Table },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mgc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let (output, code) = match &cli.command {
        Command::Dim { n, k } => (Output::Table(cmd_dim(*n, *k)), 0),
        Command::Verify { level } => cmd_verify(cli, *level),
        Command::Basis { n, k, which } => (cmd_basis(*n, *k, *which)?, 0),
        Command::Twirl {
            input,
            ensemble,
            basis,
        } => (cmd_twirl(input, *ensemble, basis.as_deref())?, 0),
        Command::FramePotential {
            n,
            k,
            kind,
            ensemble,
            mode,
        } => (
            Output::Table(cmd_frame_potential(cli, *n, *k, *kind, *ensemble, *mode)?),
            0,
        ),
        Command::Sre { n } => (Output::Table(cmd_sre(*n)?), 0),
        Command::Definetti { n, k, l } => (Output::Table(cmd_definetti(*n, *k, *l)?), 0),
        Command::Nongauss { state, k, measures } => {
            (Output::Table(cmd_nongauss(state, *k, measures)?), 0)
        }
    };
    emit(cli, &output)?;
    Ok(code)
}

fn emit(cli: &Cli, output: &Output) -> Result<(), CliError> {
    let text = match (output, cli.format) {
        (Output::Table(t), Format::Json) => pretty(&t.to_json()),
        (Output::Document { json, .. }, Format::Json) => pretty(json),
        (Output::Table(t), Format::Csv) | (Output::Document { csv: t, .. }, Format::Csv) => {
            t.to_csv()
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn cmd_dim(n: Span, k: Span) -> Table {
    let mut t = Table::new(&["n", "k", "dim_matchgate", "dim_clifford_matchgate", "equal"]);
    for n in n.0..=n.1 {
        for k in k.0..=k.1 {
            let (a, b) = (commutant_dim(n, k), cm_dim(n, k));
            t.push(vec![
                json!(n),
                json!(k),
                json!(a as u64),
                json!(b as u64),
                json!(a == b),
            ]);
        }
    }
    t
}

fn cmd_verify(cli: &Cli, level: VerifyLevel) -> (Output, u8) {
    let mut cfg = VerifyConfig::new(
        match level {
            VerifyLevel::Quick => Level::Quick,
            VerifyLevel::Full => Level::Full,
        },
        cli.seed,
    );
    cfg.samples = cli.samples;
    cfg.tolerance_scale = cli.tolerance;
    let results = verify::run_with(&cfg, |r| eprintln!("{r}"));
    let mut t = Table::new(&["id", "name", "status", "detail"]);
    for r in &results {
        let status = match r.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        };
        t.push(vec![
            json!(r.id),
            json!(r.name),
            json!(status),
            json!(r.detail),
        ]);
    }
    let code = if verify::all_passed(&results) { 0 } else { 1 };
    (Output::Table(t), code)
}

fn term_rows(t: &mut Table, element: usize, op: &OperatorExpansion) {
    for (s, c) in op.iter() {
        let masks: Vec<String> = s.masks.iter().map(|m| m.to_string()).collect();
        t.push(vec![
            json!(element),
            json!(masks.join(" ")),
            json!(c.re),
            json!(c.im),
        ]);
    }
}

/// Gram matrix of a list of operators, with its largest deviation from the identity.
fn gram_of(ops: &[&OperatorExpansion]) -> Result<(DMatrix<C64>, f64), MgcError> {
    let m = ops.len();
    let mut g = DMatrix::zeros(m, m);
    let mut dev: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = ops[i].hs_inner(ops[j])?;
            let want = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - C64::new(want, 0.0)).norm());
        }
    }
    Ok((g, dev))
}

fn cmd_basis(n: usize, k: usize, which: Which) -> Result<Output, CliError> {
    let mut csv = Table::new(&["element", "masks", "re", "im"]);
    let (elements, ops): (Vec<Value>, Vec<OperatorExpansion>) = match which {
        Which::Gt => gt_basis(n, k)?
            .into_iter()
            .map(|e| (e.to_json(), e.op))
            .unzip(),
        Which::Pairing => all_pairing_operators(n, k)?
            .into_iter()
            .map(|(c, op)| (json!({"config": c.to_json(), "operator": op.to_json()}), op))
            .unzip(),
        Which::Pattern => enumerate_occupancies(n, k, false)
            .into_iter()
            .map(|o| {
                let op = pattern_operator(&o, n, true)?;
                Ok((
                    json!({"occupancy": o.to_json(), "operator": op.to_json()}),
                    op,
                ))
            })
            .collect::<Result<Vec<_>, MgcError>>()?
            .into_iter()
            .unzip(),
    };
    for (i, op) in ops.iter().enumerate() {
        term_rows(&mut csv, i, op);
    }
    let refs: Vec<&OperatorExpansion> = ops.iter().collect();
    let (_, dev) = gram_of(&refs)?;
    let rank = span_rank(&ops, RANK_TOL)?;
    let json = json!({
        "n": n,
        "k": k,
        "basis": format!("{which:?}").to_lowercase(),
        "size": ops.len(),
        "span_rank": rank,
        "gram_identity_deviation": dev,
        "gram_is_identity": dev <= 1e-8,
        "elements": elements,
    });
    Ok(Output::Document { json, csv })
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let input = |msg: String| CliError::Input {
        path: path.display().to_string(),
        msg,
    };
    let text = fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| input(e.to_string()))
}

/// Operators listed in a basis document, or a bare list of operators.
fn basis_operators(v: &Value) -> Result<Vec<OperatorExpansion>, MgcError> {
    let items = v
        .get("elements")
        .or(Some(v))
        .and_then(Value::as_array)
        .ok_or_else(|| MgcError::Parse("expected a basis document or an operator list".into()))?;
    items
        .iter()
        .map(|e| OperatorExpansion::from_json(e.get("operator").unwrap_or(e)))
        .collect()
}

/// Orthogonal projection onto the span of `ops` through the Gram pseudo-inverse.
fn project_onto(
    w: &OperatorExpansion,
    ops: &[OperatorExpansion],
) -> Result<OperatorExpansion, MgcError> {
    let refs: Vec<&OperatorExpansion> = ops.iter().collect();
    let (g, _) = gram_of(&refs)?;
    let b = nalgebra::DVector::from_iterator(
        ops.len(),
        ops.iter()
            .map(|x| x.hs_inner(w))
            .collect::<Result<Vec<_>, _>>()?,
    );
    let pinv = g
        .pseudo_inverse(1e-10)
        .map_err(|e| MgcError::InvalidState(e.to_string()))?;
    let c = pinv * b;
    let mut out = OperatorExpansion::zero(w.n(), w.k())?;
    for (x, ci) in ops.iter().zip(c.iter()) {
        out = out.combine(C64::new(1.0, 0.0), x, *ci)?;
    }
    Ok(out)
}

fn cmd_twirl(
    input: &Path,
    ensemble: EnsembleArg,
    basis: Option<&Path>,
) -> Result<Output, CliError> {
    let w = OperatorExpansion::from_json(&read_json(input)?).map_err(|e| CliError::Input {
        path: input.display().to_string(),
        msg: e.to_string(),
    })?;
    let out = match (basis, ensemble) {
        (Some(path), _) => {
            let ops = basis_operators(&read_json(path)?).map_err(|e| CliError::Input {
                path: path.display().to_string(),
                msg: e.to_string(),
            })?;
            project_onto(&w, &ops)?
        }
        (None, EnsembleArg::Matchgate) => matchgate_twirl(&w)?,
        (None, EnsembleArg::CliffordMatchgate) => cm_twirl(&w)?,
    };
    let mut csv = Table::new(&["element", "masks", "re", "im"]);
    term_rows(&mut csv, 0, &out);
    Ok(Output::Document {
        json: out.to_json(),
        csv,
    })
}

const RECORD_COLUMNS: [&str; 7] = [
    "quantity",
    "n",
    "k",
    "mode",
    "value",
    "stderr",
    "formula_ref",
];

fn record_row(
    t: &mut Table,
    quantity: &str,
    n: usize,
    k: Option<usize>,
    mode: &str,
    e: Estimate,
    formula: &str,
) {
    t.push(vec![
        json!(quantity),
        json!(n),
        k.map_or(Value::Null, |k| json!(k)),
        json!(mode),
        json!(e.value),
        e.stderr.map_or(Value::Null, |s| json!(s)),
        json!(formula),
    ]);
}

fn cmd_frame_potential(
    cli: &Cli,
    n: usize,
    k: usize,
    kind: Kind,
    ensemble: EnsembleArg,
    mode: ModeArg,
) -> Result<Table, CliError> {
    let modes: Vec<FpMode> = match mode {
        ModeArg::All => vec![FpMode::Closed, FpMode::Rmt, FpMode::Purity, FpMode::Mc],
        ModeArg::Closed => vec![FpMode::Closed],
        ModeArg::Rmt => vec![FpMode::Rmt],
        ModeArg::Purity => vec![FpMode::Purity],
        ModeArg::Mc => vec![FpMode::Mc],
    };
    let mut t = Table::new(&RECORD_COLUMNS);
    for m in modes {
        let (quantity, result) = match kind {
            Kind::Unitary => {
                if ensemble != EnsembleArg::Matchgate {
                    return Err(MgcError::Unsupported(
                        "unitary frame potential is implemented for the matchgate ensemble".into(),
                    )
                    .into());
                }
                (
                    "unitary_frame_potential",
                    unitary_frame_potential(n, k, m, cli.samples, cli.seed),
                )
            }
            Kind::State => (
                match ensemble {
                    EnsembleArg::Matchgate => "state_frame_potential_matchgate",
                    EnsembleArg::CliffordMatchgate => "state_frame_potential_clifford_matchgate",
                },
                state_frame_potential(n, k, ensemble.into(), m, cli.samples, cli.seed),
            ),
        };
        let e = match result {
            Ok(e) => e,
            // `all` lists only the routes that exist for this ensemble and size
            Err(MgcError::Unsupported(_) | MgcError::Capacity { .. }) if mode == ModeArg::All => {
                continue
            }
            Err(e) => return Err(e.into()),
        };
        let name = match m {
            FpMode::Closed => "closed",
            FpMode::Rmt => "rmt",
            FpMode::Purity => "purity",
            FpMode::Mc => "mc",
        };
        let formula = match (kind, m) {
            (Kind::Unitary, FpMode::Closed) => "commutant dimension product formula",
            (Kind::Unitary, FpMode::Rmt) => "Gamma-product random-matrix form",
            (Kind::State, FpMode::Closed) if ensemble == EnsembleArg::Matchgate => "1 / Tr P0",
            (Kind::State, FpMode::Closed) => "binomial generating-function form",
            (Kind::State, FpMode::Rmt) => "Selberg Gamma product",
            (_, FpMode::Purity) => "Tr[(twirled vacuum)^2]",
            (Kind::Unitary, _) => "mean of |Tr U|^(2k)",
            (Kind::State, _) => "mean of |<0|U|0>|^(2k)",
        };
        record_row(&mut t, quantity, n, Some(k), name, e, formula);
    }
    Ok(t)
}

fn cmd_sre(n: usize) -> Result<Table, CliError> {
    let mut t = Table::new(&RECORD_COLUMNS);
    let closed = sre_annealed(n, SreMode::Closed)?;
    let exact = |v| Estimate {
        value: v,
        stderr: None,
        samples: 0,
    };
    record_row(
        &mut t,
        "sre_annealed",
        n,
        Some(4),
        "closed",
        exact(closed),
        "-log2(2^n / C_{n+1})",
    );
    match sre_annealed(n, SreMode::Direct) {
        Ok(d) => record_row(
            &mut t,
            "sre_annealed",
            n,
            Some(4),
            "direct",
            exact(d),
            "-log2(2^-n Tr[twirl(vac^4) Q4])",
        ),
        Err(MgcError::Capacity { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(t)
}

fn cmd_definetti(n: usize, k: usize, l: usize) -> Result<Table, CliError> {
    let mut t = Table::new(&RECORD_COLUMNS);
    let exact = |v| Estimate {
        value: v,
        stderr: None,
        samples: 0,
    };
    record_row(
        &mut t,
        "definetti_bound",
        n,
        Some(k),
        "closed",
        exact(definetti_bound(n, k, l)?),
        "l n (n-1) / (k+1)",
    );
    record_row(
        &mut t,
        "definetti_ratio",
        n,
        Some(k),
        "closed",
        exact(definetti_ratio(n, k, l)?),
        "prod_{i<j} (1 - l/(k+2n-i-j))",
    );
    Ok(t)
}

/// Reads `[a0, a1, ...]` with real or `[re, im]` entries, or `{"amplitudes": [...]}`.
fn read_state(path: &Path) -> Result<StateVector, CliError> {
    let v = read_json(path)?;
    let bad = |msg: String| CliError::Input {
        path: path.display().to_string(),
        msg,
    };
    let list = v
        .get("amplitudes")
        .unwrap_or(&v)
        .as_array()
        .ok_or_else(|| bad("expected an amplitude list".into()))?;
    let amps = list
        .iter()
        .map(|a| match a {
            Value::Number(x) => x.as_f64().map(|re| C64::new(re, 0.0)),
            Value::Array(p) if p.len() == 2 => Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)),
            _ => None,
        })
        .collect::<Option<Vec<C64>>>()
        .ok_or_else(|| bad("amplitudes must be numbers or [re, im] pairs".into()))?;
    if !amps.len().is_power_of_two() || amps.len() < 2 {
        return Err(bad(format!(
            "{} amplitudes is not 2^n with n >= 1",
            amps.len()
        )));
    }
    let n = amps.len().trailing_zeros() as usize;
    StateVector::new(n, amps).map_err(|e| bad(e.to_string()))
}

fn cmd_nongauss(path: &Path, k: usize, measures: &[Measure]) -> Result<Table, CliError> {
    let psi = read_state(path)?;
    let n = psi.n;
    let mut t = Table::new(&["quantity", "n", "k", "value", "detail"]);
    for m in measures {
        match m {
            Measure::Faf => t.push(vec![
                json!("faf"),
                json!(n),
                json!(k),
                json!(faf(&psi, k)),
                Value::Null,
            ]),
            Measure::Phi0 => t.push(vec![
                json!("phi0"),
                json!(n),
                json!(k),
                json!(phi0(&psi, k)?),
                Value::Null,
            ]),
            Measure::Residual => t.push(vec![
                json!("gaussianity_residual"),
                json!(n),
                Value::Null,
                json!(gaussianity_residual(&psi)?),
                Value::Null,
            ]),
            Measure::Covariance => {
                let c = covariance_matrix(&psi);
                let rows: Vec<Vec<f64>> = (0..c.nrows())
                    .map(|i| c.row(i).iter().copied().collect())
                    .collect();
                t.push(vec![
                    json!("covariance_matrix"),
                    json!(n),
                    Value::Null,
                    Value::Null,
                    json!(serde_json::to_string(&rows).expect("floats serialize")),
                ]);
            }
        }
    }
    Ok(t)
}
