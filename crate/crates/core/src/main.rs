use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hsgeom::grid::{Field, Grid1D};
use hsgeom::harness::output::{columns_csv, prepare_dir, write_outputs, OutputError};
use hsgeom::harness::{run_simulation, Problem, RunConfig, RunError};
use hsgeom::waves::{generate_wave, hs_exact, WaveError, WaveSpec};

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "hsgeom", version, about = "Structure-preserving Hunter-Saxton solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a key=value configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides as `--key value` or `--key=value`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Sample one period of a travelling wave.
    #[command(allow_negative_numbers = true)]
    Wave {
        #[arg(long, value_enum)]
        system: WaveSystem,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long = "z")]
        z_min: Option<f64>,
        #[arg(long = "Z")]
        z_max: Option<f64>,
        #[arg(long = "m")]
        m_min: Option<f64>,
        #[arg(long = "M")]
        m_max: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the exact half-line solution at time `t`.
    #[command(allow_negative_numbers = true)]
    Exact {
        #[arg(long)]
        t: f64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WaveSystem {
    Mhs,
    Hs2,
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl ToString) -> Failure {
    Failure { code, msg: msg.to_string() }
}

fn io_fail(e: impl ToString) -> Failure {
    fail(EXIT_FAILURE, e)
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>, Failure> {
    let mut out = Vec::new();
    let mut it = raw.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| fail(EXIT_VALIDATION, format!("expected --key, got '{arg}'")))?;
        match key.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| fail(EXIT_VALIDATION, format!("--{key} needs a value")))?;
                out.push((key.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}

fn run(config: &Path, overrides: &[String]) -> Result<(), Failure> {
    let overrides = parse_overrides(overrides)?;
    let cfg = RunConfig::from_file(config, &overrides).map_err(|e| fail(EXIT_VALIDATION, e))?;
    let out = cfg.out.clone().ok_or_else(|| fail(EXIT_VALIDATION, "missing required key: out"))?;
    prepare_dir(&out).map_err(|e| match e {
        OutputError::NotEmpty(_) => fail(EXIT_VALIDATION, e),
        OutputError::Io(_) => io_fail(e),
    })?;
    match run_simulation(&cfg) {
        Ok(result) => {
            write_outputs(&result, &out).map_err(io_fail)?;
            let (h1, h2) = result.state.invariants();
            println!("t={} H1={h1:.16e} H2={h2:.16e} -> {}", result.state.t(), out.display());
            Ok(())
        }
        Err(RunError::Numerical { step, source, partial }) => {
            write_outputs(&partial, &out).map_err(io_fail)?;
            Err(fail(EXIT_NUMERICAL, format!("step {step} failed: {source}; partial output in {}", out.display())))
        }
        Err(e) if e.is_validation() => Err(fail(EXIT_VALIDATION, e)),
        Err(e) => Err(fail(EXIT_NUMERICAL, e)),
    }
}

#[allow(clippy::too_many_arguments)]
fn wave_spec(
    system: WaveSystem,
    omega: Option<f64>,
    b: Option<f64>,
    z: Option<f64>,
    big_z: Option<f64>,
    m: Option<f64>,
    big_m: Option<f64>,
    c: Option<f64>,
    kappa: Option<f64>,
) -> Result<WaveSpec, Failure> {
    let used = |names: &[(&str, bool)]| -> Result<(), Failure> {
        match names.iter().find(|(_, given)| *given) {
            Some((n, _)) => Err(fail(EXIT_VALIDATION, format!("--{n} does not apply to this system"))),
            None => Ok(()),
        }
    };
    match system {
        WaveSystem::Mhs => {
            used(&[("b", b.is_some()), ("z", z.is_some()), ("Z", big_z.is_some()), ("kappa", kappa.is_some())])?;
            let Some(WaveSpec::Mhs { omega: o, min, max, speed }) = Problem::Mhs.default_wave() else {
                unreachable!()
            };
            Ok(WaveSpec::Mhs {
                omega: omega.unwrap_or(o),
                min: m.unwrap_or(min),
                max: big_m.unwrap_or(max),
                speed: c.unwrap_or(speed),
            })
        }
        WaveSystem::Hs2 => {
            used(&[("omega", omega.is_some()), ("m", m.is_some()), ("M", big_m.is_some())])?;
            let Some(WaveSpec::Hs2 { b: b0, min, max, speed, kappa: k0 }) = Problem::Hs2.default_wave() else {
                unreachable!()
            };
            Ok(WaveSpec::Hs2 {
                b: b.unwrap_or(b0),
                min: z.unwrap_or(min),
                max: big_z.unwrap_or(max),
                speed: c.unwrap_or(speed),
                kappa: kappa.unwrap_or(k0),
            })
        }
    }
}

fn wave(spec: WaveSpec, n: usize, out: &Path) -> Result<(), Failure> {
    let w = generate_wave(&spec, n).map_err(|e| match e {
        WaveError::InvalidParameters(_) | WaveError::Grid(_) => fail(EXIT_VALIDATION, e),
        _ => fail(EXIT_NUMERICAL, e),
    })?;
    let x = w.grid.nodes();
    let mut cols: Vec<(&str, &[f64])> = vec![("x", &x), ("phi", w.phi.values()), ("dphi", w.dphi.values())];
    if let Some(psi) = &w.psi {
        cols.push(("psi", psi.values()));
    }
    std::fs::write(out, columns_csv(&cols)).map_err(io_fail)?;
    println!("L_per={:.16e}", w.period);
    Ok(())
}

fn exact(t: f64, l: f64, n: usize, out: &Path) -> Result<(), Failure> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(fail(EXIT_VALIDATION, format!("t must be non-negative, got {t}")));
    }
    let grid = Grid1D::half_line(l, n).map_err(|e| fail(EXIT_VALIDATION, e))?;
    let u = Field::from_fn(grid, |x| hs_exact(x, t)).map_err(|e| fail(EXIT_VALIDATION, e))?;
    let x = grid.nodes();
    std::fs::write(out, columns_csv(&[("x", &x), ("u_exact", u.values())])).map_err(io_fail)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides } => run(&config, &overrides),
        Command::Wave { system, omega, b, z_min, z_max, m_min, m_max, c, kappa, n, out } => {
            wave_spec(system, omega, b, z_min, z_max, m_min, m_max, c, kappa).and_then(|spec| wave(spec, n, &out))
        }
        Command::Exact { t, l, n, out } => exact(t, l, n, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, msg }) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
