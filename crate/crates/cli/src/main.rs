use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use dboson_core::classical::{classical_hamiltonian, commutator_order_check, quantize_bracket};
use dboson_core::deformation::{build_ladder_table, DeformationKind, DeformationSpec, DEFAULT_LEVEL_CAP};
use dboson_core::eigenstate::EigenElement;
use dboson_core::equivalence::build_map;
use dboson_core::numerics::fmt17;
use dboson_core::phase_space::{
    self, eval_omega, DensitySpec, PhaseGrid, DEFAULT_GRID_POINTS, DEFAULT_HALF_WIDTH_FACTOR,
};
use dboson_core::verify::{self, Mode, MAX_RATIONAL_DIM};
use dboson_core::{Complex64, Error};
use nalgebra::DMatrix;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "dboson", version, about = "Deformed boson algebras from the command line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ladder table as CSV `n,F,E,f`.
    Spectrum {
        #[arg(long)]
        spec: PathBuf,
        /// Last level listed; defaults to the level cap.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite and write a JSON report.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value = "float")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equivalence map onto a target deformation and the transformed generators.
    Transform {
        #[arg(long)]
        spec: PathBuf,
        /// Target spec; the standard boson at the source `hbar` when omitted.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a density; observables CSV on the main output.
    Evolve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Also write `t,n,m,re,im` for every step here.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the phase-space function of `|n><m|` as CSV `q,p,re,im`.
    Wigner {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Order of the commutator residual of the continuum Hamiltonian.
    Classical {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        h0: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,3e-2,1e-2,3e-3,1e-3")]
        hbar: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integral of the bracket weight over one level against its expansion.
    Quantize {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        h0: f64,
        #[arg(long)]
        hbar: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    /// Bad input: exit code 2.
    Input(String),
    /// A check ran and failed: exit code 1.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> std::result::Result<DeformationSpec, Failure> {
    DeformationSpec::from_json(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn output(path: &Option<PathBuf>) -> std::result::Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn defaults() -> Value {
    json!({
        "level_cap": DEFAULT_LEVEL_CAP,
        "grid_half_width": format!("{DEFAULT_HALF_WIDTH_FACTOR}*sqrt(hbar)"),
        "grid_points": DEFAULT_GRID_POINTS,
    })
}

fn spec_value(spec: &DeformationSpec) -> Value {
    serde_json::from_str(&spec.to_json()).expect("spec json is valid")
}

fn header(command: &str, spec: &DeformationSpec) -> Value {
    json!({ "command": command, "spec": spec_value(spec), "defaults": defaults() })
}

fn csv_header(out: &mut dyn Write, command: &str, spec: &DeformationSpec) -> io::Result<()> {
    writeln!(
        out,
        "# dboson {command} spec={} level_cap={DEFAULT_LEVEL_CAP} grid_half_width={DEFAULT_HALF_WIDTH_FACTOR}*sqrt(hbar) grid_points={DEFAULT_GRID_POINTS}",
        spec.to_json()
    )
}

fn write_json(out: &mut dyn Write, v: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    out.flush()
}

fn matrix_value(m: &DMatrix<Complex64>) -> Value {
    let rows: Vec<Value> =
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()).collect();
    Value::Array(rows)
}

fn spectrum(spec: &Path, levels: Option<usize>, out: &Option<PathBuf>) -> Outcome {
    let spec = load_spec(spec)?;
    let d = spec.level_cap();
    let k = levels.unwrap_or(d);
    if k > d {
        return Err(Failure::Input(format!("--levels {k} exceeds the level cap {d}")));
    }
    let t = build_ladder_table(&spec);
    for j in 1..=k {
        let v = t.ladder()[j];
        if !(v.is_finite() && v > 0.0) {
            eprintln!("warning: F({j})={v}: degenerate");
        }
    }
    let mut w = output(out)?;
    csv_header(&mut w, "spectrum", &spec)?;
    writeln!(w, "n,F,E,f")?;
    for n in 0..=k {
        let (e, f) = if n < d { (fmt17(t.spectrum()[n]), fmt17(t.f()[n])) } else { (String::new(), String::new()) };
        writeln!(w, "{n},{},{e},{f}", fmt17(t.ladder()[n]))?;
    }
    w.flush()?;
    Ok(())
}

fn verify_cmd(spec: &Path, dim: Option<usize>, mode: Mode, out: &Option<PathBuf>) -> Outcome {
    let spec = load_spec(spec)?;
    let dim = dim.unwrap_or_else(|| {
        let d = match mode {
            Mode::Float => DEFAULT_LEVEL_CAP,
            Mode::Rational => MAX_RATIONAL_DIM,
        };
        match spec.kind() {
            DeformationKind::Table { values } => d.min(values.len()),
            _ => d,
        }
    });
    let report = verify::run(&spec, dim, mode)?;
    let mut v = header("verify", &spec);
    v["report"] = serde_json::to_value(&report).map_err(Error::from)?;
    write_json(&mut *output(out)?, &v)?;
    if report.passed {
        return Ok(());
    }
    let failed: Vec<String> =
        report.checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect();
    Err(Failure::Check(format!("failed checks: {}", failed.join("; "))))
}

fn transform(spec: &Path, target: &Option<PathBuf>, dim: Option<usize>, out: &Option<PathBuf>) -> Outcome {
    let src = load_spec(spec)?;
    let tgt = match target {
        Some(p) => load_spec(p)?,
        None => DeformationSpec::standard(src.hbar(), src.level_cap())?,
    };
    let d = dim.unwrap_or(src.level_cap().min(tgt.level_cap()));
    let (src, tgt) = (src.with_level_cap(d)?, tgt.with_level_cap(d)?);
    let map = build_map(&Arc::new(build_ladder_table(&src)), &Arc::new(build_ladder_table(&tgt)))?;
    let mut v = header("transform", &src);
    v["target"] = spec_value(&tgt);
    v["map"] = serde_json::to_value(map.summary()).map_err(Error::from)?;
    let result = match map.transform_generators() {
        Ok((a, ad)) => {
            v["A"] = matrix_value(a.entries());
            v["A_plus"] = matrix_value(ad.entries());
            Ok(())
        }
        Err(e) => {
            v["A"] = Value::Null;
            v["A_plus"] = Value::Null;
            Err(Failure::Check(e.to_string()))
        }
    };
    write_json(&mut *output(out)?, &v)?;
    result
}

#[allow(clippy::too_many_arguments)]
fn evolve(
    spec: &Path,
    rho: &Path,
    t0: f64,
    t1: f64,
    steps: usize,
    coeffs: &Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Outcome {
    let spec = load_spec(spec)?;
    let text = read(rho)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", rho.display())))?;
    let dim = doc["dim"]
        .as_u64()
        .ok_or_else(|| Failure::Input(format!("{}: missing integer field `dim`", rho.display())))?
        as usize;
    let table = Arc::new(build_ladder_table(&spec.with_level_cap(dim)?));
    let rho0 = DensitySpec::from_element(&EigenElement::from_json(&table, &text)?)?;
    let trace = phase_space::evolve_trace(&rho0, t0, t1, steps)?;
    if let Some(p) = coeffs {
        let mut w = output(&Some(p.clone()))?;
        csv_header(&mut w, "evolve", &spec)?;
        phase_space::write_coefficients_csv(&trace, &mut w)?;
        w.flush()?;
    }
    let mut w = output(out)?;
    csv_header(&mut w, "evolve", &spec)?;
    phase_space::write_observables_csv(&trace, &mut w)?;
    w.flush()?;
    Ok(())
}

fn wigner(spec: &Path, n: usize, m: usize, half_width: Option<f64>, points: usize, out: &Option<PathBuf>) -> Outcome {
    let spec = load_spec(spec)?;
    let d = spec.level_cap();
    if n >= d || m >= d {
        return Err(Failure::Input(format!("indices ({n}, {m}) must be below the level cap {d}")));
    }
    let hbar = spec.hbar();
    let grid = PhaseGrid::new(half_width.unwrap_or(DEFAULT_HALF_WIDTH_FACTOR * hbar.sqrt()), points)?;
    let field = eval_omega(n, m, &grid, hbar);
    let mut w = output(out)?;
    csv_header(&mut w, "wigner", &spec)?;
    field.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn classical(spec: &Path, h0: f64, hbars: &[f64], out: &Option<PathBuf>) -> Outcome {
    let spec = load_spec(spec)?;
    let big_f = classical_hamiltonian(&spec)?;
    let report = commutator_order_check(&big_f, h0, hbars)?;
    let mut v = header("classical", &spec);
    v["h0"] = json!(h0);
    v["report"] = serde_json::to_value(&report).map_err(Error::from)?;
    write_json(&mut *output(out)?, &v)?;
    Ok(())
}

fn quantize(spec: &Path, h0: f64, hbar: f64, out: &Option<PathBuf>) -> Outcome {
    let spec = load_spec(spec)?;
    let big_f = classical_hamiltonian(&spec)?;
    let (integral, expansion) = quantize_bracket(&big_f.differentiate(), h0, hbar)?;
    let mut v = header("quantize", &spec);
    v["h0"] = json!(h0);
    v["hbar"] = json!(hbar);
    v["integral"] = json!(integral);
    v["expansion"] = json!(expansion);
    v["difference"] = json!(big_f.eval(h0 + 0.5 * hbar) - big_f.eval(h0 - 0.5 * hbar));
    v["residual"] = json!(integral - expansion);
    write_json(&mut *output(out)?, &v)?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Spectrum { spec, levels, out } => spectrum(&spec, levels, &out),
        Command::Verify { spec, dim, mode, out } => verify_cmd(&spec, dim, mode, &out),
        Command::Transform { spec, target, dim, out } => transform(&spec, &target, dim, &out),
        Command::Evolve { spec, rho, t0, t1, steps, coeffs, out } => evolve(&spec, &rho, t0, t1, steps, &coeffs, &out),
        Command::Wigner { spec, n, m, half_width, points, out } => wigner(&spec, n, m, half_width, points, &out),
        Command::Classical { spec, h0, hbar, out } => classical(&spec, h0, &hbar, &out),
        Command::Quantize { spec, h0, hbar, out } => quantize(&spec, h0, hbar, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
