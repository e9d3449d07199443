//! `ris-dof`: sum-DoF calculator, scheme verifier and sweep driver.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use config::{load, parse_values, ConfigFile};
use ris_dof::dof::{achievable_sumdof, DofReport};
use ris_dof::model::{canonicalize, AntennaConfig, RisConfig};
use ris_dof::scheme::{InstanceDump, ZERO_TOL};
use ris_dof::sweep::{gain_table, run_sweep, write_csv, GainRow, SweepSpec};
use ris_dof::transceiver::{run_scheme, SchemeRun};

const SLOPE_TOL: f64 = 0.15;

#[derive(Parser, Debug)]
#[command(name = "ris-dof", version, about = "Achievable sum-DoF of RIS-assisted two-user MIMO interference channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Antennas {
    /// Transmit antennas at Tx1
    #[arg(long, allow_negative_numbers = true)]
    m1: Option<i64>,
    /// Transmit antennas at Tx2
    #[arg(long, allow_negative_numbers = true)]
    m2: Option<i64>,
    /// Receive antennas at Rx1
    #[arg(long, allow_negative_numbers = true)]
    n1: Option<i64>,
    /// Receive antennas at Rx2
    #[arg(long, allow_negative_numbers = true)]
    n2: Option<i64>,
    /// JSON file with default values for any flag
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form sum-DoF, per-case plans, baseline and gain
    Compute {
        #[command(flatten)]
        ant: Antennas,
        /// Number of RIS elements
        #[arg(long, allow_negative_numbers = true)]
        r: Option<i64>,
        #[arg(long)]
        json: bool,
    },
    /// Synthesizes a random instance and checks the scheme numerically
    Verify {
        #[command(flatten)]
        ant: Antennas,
        #[arg(long, allow_negative_numbers = true)]
        r: Option<i64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Tolerance for residuals, cancelled blocks and ZF leakage
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        snr_lo: Option<f64>,
        #[arg(long)]
        snr_hi: Option<f64>,
        #[arg(long)]
        json: bool,
        /// Write the synthesized instance as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluates a grid of configurations and writes CSV
    Sweep {
        #[command(flatten)]
        ant: Antennas,
        #[arg(long, value_enum)]
        variable: Option<Variable>,
        /// Symmetric transmit antennas, e.g. `1..20`
        #[arg(long)]
        m: Option<String>,
        /// Symmetric receive antennas
        #[arg(long)]
        n: Option<i64>,
        /// RIS sizes, e.g. `0,40,80` or `0..400:40`
        #[arg(long)]
        r: Option<String>,
        /// CSV destination (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form symmetric RIS gain against the table value
    Gain {
        #[arg(long)]
        m: Option<i64>,
        #[arg(long)]
        n: Option<i64>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Variable {
    M,
    R,
}

enum Failure {
    Usage(String),
    Check(String),
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, Failure> {
    flag.or(file).ok_or_else(|| usage(format!("missing --{name}")))
}

fn antennas(ant: &Antennas, file: &ConfigFile) -> Result<AntennaConfig, Failure> {
    let m1 = required(ant.m1, file.m1, "m1")?;
    let m2 = required(ant.m2, file.m2, "m2")?;
    let n1 = required(ant.n1, file.n1, "n1")?;
    let n2 = required(ant.n2, file.n2, "n2")?;
    canonicalize(m1, m2, n1, n2).map_err(|e| usage(e.to_string()))
}

fn single_r(flag: Option<i64>, file: &ConfigFile) -> Result<RisConfig, Failure> {
    let r = match (flag, &file.r) {
        (Some(r), _) => r,
        (None, Some(config::Values::One(r))) => *r,
        (None, Some(other)) => return Err(usage(format!("--r must be a single integer, got '{}'", other.render()))),
        (None, None) => return Err(usage("missing --r")),
    };
    usize::try_from(r)
        .map(RisConfig::new)
        .map_err(|_| usage(format!("--r must be non-negative (got {r})")))
}

fn value_list(flag: Option<String>, file: Option<&config::Values>, name: &str) -> Result<Vec<usize>, Failure> {
    let text = flag.or_else(|| file.map(config::Values::render)).ok_or_else(|| usage(format!("missing --{name}")))?;
    parse_values(&text).map_err(|e| usage(format!("--{name}: {e}")))
}

fn positive(v: i64, name: &str) -> Result<usize, Failure> {
    if v < 1 {
        return Err(usage(format!("--{name} must be at least 1 (got {v})")));
    }
    Ok(v as usize)
}

fn load_config(path: Option<&PathBuf>) -> Result<ConfigFile, Failure> {
    load(path.map(PathBuf::as_path)).map_err(usage)
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn render_report(report: &DofReport) {
    let c = &report.config;
    println!("config      {c}{}", if c.swapped { " (users relabeled)" } else { "" });
    println!("r           {}", report.ris.r);
    for entry in &report.per_case {
        let p = &entry.plan;
        println!(
            "{:<11} sum-DoF {:>3}  f1={} ({}) f2={} ({}) cost {}",
            entry.case.name(),
            entry.sumdof,
            p.f1,
            p.mode1,
            p.f2,
            p.mode2,
            p.cost
        );
    }
    println!("achievable  {}", report.achievable);
    println!("baseline    {}", report.baseline);
    println!("gain        {}", report.gain);
    println!("ris helps   {}", if report.ris_helps { "yes" } else { "no" });
}

fn compute(ant: Antennas, r: Option<i64>, json: bool) -> Outcome {
    let file = load_config(ant.config.as_ref())?;
    let cfg = antennas(&ant, &file)?;
    let ris = single_r(r, &file)?;
    let report = achievable_sumdof(&cfg, ris).map_err(|e| usage(e.to_string()))?;
    if json || file.json.unwrap_or(false) {
        print_json(&report);
    } else {
        render_report(&report);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

#[derive(Debug, Serialize)]
struct Verification {
    config: AntennaConfig,
    r: usize,
    seed: u64,
    case: String,
    predicted: usize,
    slope: f64,
    max_psi: f64,
    checks: Vec<Check>,
    pass: bool,
}

fn scheme_checks(run: &SchemeRun, tol: f64, predicted: usize, slope: f64, window: (f64, f64)) -> Vec<Check> {
    let syn = &run.synthesis;
    let eff = &syn.effective;
    let mut checks = Vec::new();
    let mut add = |name: &str, pass: bool, detail: String| {
        checks.push(Check { name: name.to_string(), pass, detail });
    };
    let bound = tol * (1.0 + syn.psi.rhs_norm);
    add("residual", syn.psi.residual <= bound, format!("{:.3e} <= {:.3e}", syn.psi.residual, bound));
    add("zero block hbar21", eff.zero_error21 <= tol, format!("{:.3e} <= {:.1e}", eff.zero_error21, tol));
    add("zero block hbar12", eff.zero_error12 <= tol, format!("{:.3e} <= {:.1e}", eff.zero_error12, tol));
    let (e21, e12) = eff.expected_ranks();
    add("rank hbar21", eff.rank21() == e21, format!("{} (expected {e21})", eff.rank21()));
    add("rank hbar12", eff.rank12() == e12, format!("{} (expected {e12})", eff.rank12()));
    let rep = &run.report;
    add("decodable rx1", rep.rank_rx1 == rep.needed_rx1, format!("rank {} of {}", rep.rank_rx1, rep.needed_rx1));
    add("decodable rx2", rep.rank_rx2 == rep.needed_rx2, format!("rank {} of {}", rep.rank_rx2, rep.needed_rx2));
    let leak = rep.leak_rx1.max(rep.leak_rx2);
    add("zf leakage", leak <= tol, format!("{leak:.3e} <= {tol:.1e}"));
    add(
        "slope",
        (slope - predicted as f64).abs() <= SLOPE_TOL,
        format!("{slope:.4} vs {predicted} ({} -> {} dB)", window.0, window.1),
    );
    checks
}

#[allow(clippy::too_many_arguments)]
fn verify(
    ant: Antennas,
    r: Option<i64>,
    seed: Option<u64>,
    tol: Option<f64>,
    snr_lo: Option<f64>,
    snr_hi: Option<f64>,
    json: bool,
    out: Option<PathBuf>,
) -> Outcome {
    let file = load_config(ant.config.as_ref())?;
    let cfg = antennas(&ant, &file)?;
    let ris = single_r(r, &file)?;
    let seed = seed.or(file.seed).unwrap_or(0);
    let tol = tol.or(file.tol).unwrap_or(ZERO_TOL);
    if tol.is_nan() || tol <= 0.0 {
        return Err(usage(format!("--tol must be positive (got {tol})")));
    }
    let lo = snr_lo.or(file.snr_lo).unwrap_or(80.0);
    let hi = snr_hi.or(file.snr_hi).unwrap_or(120.0);
    if hi <= lo || lo < 60.0 || hi.is_nan() || lo.is_nan() {
        return Err(usage(format!("SNR window must satisfy hi > lo >= 60 (got {lo} -> {hi})")));
    }
    let json = json || file.json.unwrap_or(false);
    let out = out.or(file.out);

    let report = achievable_sumdof(&cfg, ris).map_err(|e| usage(e.to_string()))?;
    let best = *report.best();
    let run = run_scheme(&cfg, ris, best.case, seed).map_err(|e| Failure::Check(format!("FAIL scheme: {e}")))?;
    let slope = run.slope(lo, hi);
    let checks = scheme_checks(&run, tol, best.sumdof, slope, (lo, hi));
    let pass = checks.iter().all(|c| c.pass);
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();

    if let Some(path) = &out {
        let dump = InstanceDump::new(&cfg, ris, seed, &run.synthesis);
        let text = serde_json::to_string_pretty(&dump).expect("instance serializes");
        std::fs::write(path, text).map_err(|e| Failure::Check(format!("cannot write {}: {e}", path.display())))?;
    }

    let a = &run.alloc;
    if json {
        print_json(&Verification {
            config: cfg,
            r: ris.r,
            seed,
            case: best.case.name().to_string(),
            predicted: best.sumdof,
            slope,
            max_psi: run.synthesis.psi.max_magnitude,
            checks,
            pass,
        });
    } else {
        let p = &run.synthesis.effective.plan;
        println!("instance    {cfg} r={} seed={seed} {} f1={} f2={}", ris.r, best.case, p.f1, p.f2);
        println!(
            "streams     zf1={} zf2={} id={} (Tx1 {}, Tx2 {}) total {}",
            a.d1_zf, a.d2_zf, a.d_id, a.id_tx1, a.id_tx2, a.total
        );
        println!("max |psi|   {:.4e}", run.synthesis.psi.max_magnitude);
        for c in &checks {
            println!("{} {:<18} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        println!("{}", if pass { "PASS" } else { "FAIL" });
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
    }
}

fn sweep(
    ant: Antennas,
    variable: Option<Variable>,
    m: Option<String>,
    n: Option<i64>,
    r: Option<String>,
    out: Option<PathBuf>,
) -> Outcome {
    let file = load_config(ant.config.as_ref())?;
    let variable = match (variable, file.variable.as_deref()) {
        (Some(v), _) => v,
        (None, Some(s)) => Variable::from_str(s, true).map_err(|_| usage(format!("unknown variable '{s}'")))?,
        (None, None) => Variable::M,
    };
    let r_values = value_list(r, file.r.as_ref(), "r")?;
    let spec = match variable {
        Variable::M => {
            let ms = value_list(m, file.m.as_ref(), "m")?;
            if ms.contains(&0) {
                return Err(usage("--m values must be at least 1"));
            }
            let n = positive(required(n, file.n, "n")?, "n")?;
            SweepSpec::m_symmetric(ms, n, r_values)
        }
        Variable::R => {
            let symmetric = m.clone().or_else(|| file.m.as_ref().map(config::Values::render));
            let (m1, m2, n1, n2) = match symmetric {
                Some(text) => {
                    let m = match parse_values(&text).map_err(|e| usage(format!("--m: {e}")))?.as_slice() {
                        [m] => *m as i64,
                        _ => return Err(usage("--m must be a single value for an r sweep")),
                    };
                    let n = required(n, file.n, "n")?;
                    (m, m, n, n)
                }
                None => {
                    let c = antennas(&ant, &file)?;
                    let c = if c.swapped { c.relabeled() } else { c };
                    (c.m1 as i64, c.m2 as i64, c.n1 as i64, c.n2 as i64)
                }
            };
            let counts = [("m1", m1), ("m2", m2), ("n1", n1), ("n2", n2)]
                .iter()
                .map(|&(name, v)| positive(v, name))
                .collect::<Result<Vec<_>, _>>()?;
            SweepSpec::r_sweep(counts[0], counts[1], counts[2], counts[3], r_values)
        }
    };
    let rows = run_sweep(&spec).map_err(|e| usage(e.to_string()))?;
    match out.or(file.out) {
        Some(path) => {
            let f = File::create(&path).map_err(|e| Failure::Check(format!("cannot write {}: {e}", path.display())))?;
            write_csv(&rows, BufWriter::new(f)).map_err(|e| Failure::Check(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let stdout = io::stdout();
            write_csv(&rows, stdout.lock()).map_err(|e| Failure::Check(e.to_string()))?;
        }
    }
    Ok(())
}

fn gain(m: Option<i64>, n: Option<i64>, r: Option<String>, json: bool, config: Option<PathBuf>) -> Outcome {
    let file = load_config(config.as_ref())?;
    let m_file = match &file.m {
        Some(config::Values::One(v)) => Some(*v),
        Some(other) => return Err(usage(format!("--m must be a single integer, got '{}'", other.render()))),
        None => None,
    };
    let m = positive(required(m, m_file, "m")?, "m")?;
    let n = positive(required(n, file.n, "n")?, "n")?;
    let r_values = value_list(r, file.r.as_ref(), "r")?;
    let rows = gain_table(m, n, &r_values).map_err(|e| usage(e.to_string()))?;
    if json || file.json.unwrap_or(false) {
        print_json(&rows);
    } else {
        let mut out = io::stdout().lock();
        let _ = writeln!(out, "{:>6} {:>6} {:>6} {:>12} {:>10}", "m", "n", "r", "closed-form", "table");
        for g in &rows {
            let flag = if g.matches() { "" } else { "  MISMATCH" };
            let _ = writeln!(out, "{:>6} {:>6} {:>6} {:>12} {:>10}{flag}", g.m, g.n, g.r, g.closed_form, g.from_table);
        }
    }
    let bad: Vec<&GainRow> = rows.iter().filter(|g| !g.matches()).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} gain mismatches", bad.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Compute { ant, r, json } => compute(ant, r, json),
        Command::Verify { ant, r, seed, tol, snr_lo, snr_hi, json, out } => {
            verify(ant, r, seed, tol, snr_lo, snr_hi, json, out)
        }
        Command::Sweep { ant, variable, m, n, r, out } => sweep(ant, variable, m, n, r, out),
        Command::Gain { m, n, r, json, config } => gain(m, n, r, json, config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
