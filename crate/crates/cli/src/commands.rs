use std::f64::consts::{PI, TAU};
use std::path::Path;

use triphot::experiment::{predict_rate, simulate_counts, source_state, sweep as run_sweep, visibility};
use triphot::io::{self, CountTable, McMeta};
use triphot::observables::{correlators, degree_of_polarization, stokes as stokes_of};
use triphot::state::{BiphotonState, TritLabel};
use triphot::synthesis::{reachability_report, synthesize, Reachability, Retardance, SynthesisProblem};
use triphot::verify::{self, VerifyOptions};
use triphot::{Analysis, ExperimentConfig, SourceSpec, SweepParam};

use crate::{AnalysisArg, Failure, Format, McArgs, Overrides, PlateKind, StokesArgs, SweepArgs, SynthArgs, VerifyArgs};

type CmdResult = Result<(), Failure>;

/// Writes to stdout; a closed pipe (e.g. `| head`) ends the process quietly.
fn write_stdout(args: std::fmt::Arguments) {
    use std::io::Write;
    if let Err(e) = std::io::stdout().lock().write_fmt(args) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
    }
}

macro_rules! outln {
    () => { write_stdout(format_args!("\n")) };
    ($($t:tt)*) => { write_stdout(format_args!("{}\n", format_args!($($t)*))) };
}

/// Angle argument in radians; plain numbers are degrees under `--deg`.
fn angle(s: &str, deg: bool) -> Result<f64, Failure> {
    let has_pi = s.contains("pi") || s.contains('π');
    let v = io::parse_angle(s)?;
    Ok(if deg && !has_pi { v.to_radians() } else { v })
}

fn load_config(path: &Path, o: &Overrides, deg: bool) -> Result<ExperimentConfig, Failure> {
    let mut cfg = io::read_config(path)?;
    if let Some(v) = &o.phi {
        cfg.source.phase = angle(v, deg)?;
    }
    if let Some(v) = &o.chi {
        cfg.plate.angle = angle(v, deg)?;
    }
    match (o.plate, &o.retardance) {
        (Some(_), Some(_)) => return Err(Failure::Usage("--plate and --retardance are exclusive".into())),
        (Some(PlateKind::Hwp), None) => cfg.plate.retardance = PI,
        (Some(PlateKind::Qwp), None) => cfg.plate.retardance = PI / 2.0,
        (None, Some(r)) => cfg.plate.retardance = angle(r, deg)?,
        (None, None) => {}
    }
    if let Some(v) = o.t20 {
        cfg.source.t20 = v;
    }
    if let Some(v) = o.t02 {
        cfg.source.t02 = v;
    }
    if let Some(v) = &o.jitter {
        cfg.source.jitter = angle(v, deg)?;
    }
    if let Some(v) = o.pair_rate {
        cfg.source.pair_rate = v;
    }
    if let Some(a) = o.analysis {
        cfg.analysis = match a {
            AnalysisArg::None => Analysis::None,
            AnalysisArg::X => Analysis::X,
            AnalysisArg::Y => Analysis::Y,
        };
    }
    if let Some(v) = o.eta1 {
        cfg.eta1 = v;
    }
    if let Some(v) = o.eta2 {
        cfg.eta2 = v;
    }
    if let Some(v) = o.accidental_rate {
        cfg.accidental_rate = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn echo_config(cfg: &ExperimentConfig) {
    outln!("# resolved configuration");
    for line in io::config_to_toml(cfg).lines() {
        outln!("#   {line}");
    }
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => {
            io::write_atomic(p, text.as_bytes())?;
            outln!("wrote {}", p.display());
        }
        None => write_stdout(format_args!("{text}")),
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    if a.grid < 2 {
        return Err(Failure::Usage("--grid must be at least 2".into()));
    }
    let opts = VerifyOptions {
        grid: a.grid,
        samples: a.samples,
        seed: a.seed,
    };
    outln!("# resolved: grid={} samples={} seed={}", opts.grid, opts.samples, opts.seed);
    let report = verify::run(opts);
    for c in &report.checks {
        outln!(
            "{:<4} {:<52} residual {:.3e} (tolerance {:.1e})",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.max_residual,
            c.tolerance
        );
    }
    if report.passed() {
        outln!("all checks passed");
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        eprintln!("verification failed: {}", failed.join("; "));
        Err(Failure::Verification)
    }
}

pub fn sweep(a: &SweepArgs, deg: bool) -> CmdResult {
    let param: SweepParam = a.param.parse()?;
    let cfg = load_config(&a.config, &a.overrides, deg)?;
    let from = a.from.as_deref().map(|s| angle(s, deg)).transpose()?.unwrap_or(0.0);
    let to = match &a.to {
        Some(s) => angle(s, deg)?,
        None => match param {
            SweepParam::Phi => TAU,
            SweepParam::Chi => PI,
        },
    };
    let table = run_sweep(&cfg, param, from, to, a.steps)?;
    if a.out.is_some() {
        echo_config(&cfg);
        outln!("# sweep {param} from {from} to {to}, {} steps", a.steps);
        if let Ok(v) = visibility(&table) {
            outln!("visibility {v:.6}");
        }
    }
    let text = match a.format {
        Format::Csv => io::sweep_to_csv(&table)?,
        Format::Json => io::to_json(&table),
    };
    emit(a.out.as_deref(), &text)
}

pub fn mc(a: &McArgs, deg: bool) -> CmdResult {
    let cfg = load_config(&a.config, &a.overrides, deg)?;
    let records = simulate_counts(&cfg, a.seed, a.duration, a.bin)?;
    let table = CountTable {
        config: cfg,
        meta: McMeta {
            seed: a.seed,
            duration: a.duration,
            bin: a.bin,
        },
        records,
    };
    if a.out.is_some() {
        echo_config(&cfg);
        let total: u64 = table.records.iter().map(|r| r.coincidences).sum();
        outln!("# seed {} duration {} s bin {} s", a.seed, a.duration, a.bin);
        outln!(
            "mean rate {:.6} /s (predicted {:.6} /s)",
            total as f64 / a.duration,
            predict_rate(&cfg)?
        );
    }
    let text = match a.format {
        Format::Csv => io::counts_to_csv(&table)?,
        Format::Json => io::to_json(&table),
    };
    emit(a.out.as_deref(), &text)
}

pub fn stokes(a: &StokesArgs) -> CmdResult {
    let s = io::parse_state(&a.state)?;
    let st = stokes_of(&s);
    let p = degree_of_polarization(&s);
    let g = correlators(&s);
    if a.json {
        let v = serde_json::json!({
            "state": s.amplitudes().map(|c| [c.re, c.im]),
            "stokes": st,
            "degree_of_polarization": p,
            "correlators": g,
        });
        outln!("{}", serde_json::to_string_pretty(&v).expect("json"));
        return Ok(());
    }
    outln!("state  {s}");
    outln!("stokes s0={:.12} s1={:.12} s2={:.12} s3={:.12}", st.s0, st.s1, st.s2, st.s3);
    outln!("P      {p:.12}");
    outln!("G      gxy={:.12} gxx={:.12} gyy={:.12}", g.gxy, g.gxx, g.gyy);
    Ok(())
}

fn split_problem(s: &str) -> Result<(&str, &str), Failure> {
    for sep in ["->", "→", ":"] {
        if let Some((a, b)) = s.split_once(sep) {
            return Ok((a.trim(), b.trim()));
        }
    }
    Err(Failure::Usage(format!("problem `{s}` must look like FROM->TO")))
}

fn parse_plates(s: &str) -> Result<Vec<Retardance>, Failure> {
    s.split(',')
        .map(|p| match p.trim().to_ascii_lowercase().as_str() {
            "hwp" | "half" => Ok(Retardance::Half),
            "qwp" | "quarter" => Ok(Retardance::Quarter),
            "free" => Ok(Retardance::Free),
            other => Err(Failure::Usage(format!("unknown plate `{other}` (hwp, qwp, free)"))),
        })
        .collect()
}

pub fn synth(a: &SynthArgs, deg: bool) -> CmdResult {
    let (from, to) = split_problem(&a.problem)?;
    let mut input = io::parse_state(from)?;
    let target = io::parse_state(to)?;
    if let Some(phi) = &a.phi {
        let phi = angle(phi, deg)?;
        let prepared = source_state(
            &SourceSpec {
                phase: phi,
                ..SourceSpec::default()
            },
            0.0,
        )?;
        if !prepared.eq_up_to_phase(&input, 1e-9) {
            return Err(Failure::Usage(format!(
                "source phase {phi} prepares {prepared}, which is not `{from}`"
            )));
        }
        input = prepared;
    }
    let problem = SynthesisProblem::new(input, target)
        .with_plates(a.budget, &parse_plates(&a.plates)?)
        .with_phase(a.optimize_phi);
    let result = synthesize(&problem, a.grid, a.tol, a.seed)?;
    let reach = reachability_report(&problem, &result);
    if a.json {
        let v = serde_json::json!({ "problem": problem, "result": result, "reachability": reach });
        outln!("{}", serde_json::to_string_pretty(&v).expect("json"));
        return Ok(());
    }
    outln!(
        "# resolved: input={} target={} budget={} plates={} optimize_phi={} grid={} tol={:e} seed={}",
        input, target, a.budget, a.plates, a.optimize_phi, a.grid, a.tol, a.seed
    );
    for (i, p) in result.plates.iter().enumerate() {
        outln!("plate {}: retardance {:.10} rad, angle {:.10} rad", i + 1, p.retardance, p.angle);
    }
    if let Some(phi) = result.phase {
        outln!("source phase {phi:.10} rad");
    }
    outln!("fidelity {:.15}", result.fidelity);
    match reach {
        Reachability::Reachable => outln!("reachable"),
        Reachability::Approximate { fidelity } => outln!("approximate (best fidelity {fidelity:.12})"),
    }
    outln!("evaluations {}", result.evaluations);
    Ok(())
}

pub fn info() -> CmdResult {
    outln!("triphot {}", env!("CARGO_PKG_VERSION"));
    outln!("basis        |2,0>, |1,1>, |0,2>  (photons in x, y)");
    for t in TritLabel::ALL {
        let s = BiphotonState::trit(t);
        outln!("trit {}  {:<9}  {s}", t.digit(), t.name());
    }
    outln!("retarder     R(chi) diag(e^(+i delta/2), e^(-i delta/2)) R(-chi)");
    outln!("stokes s3    +2 sqrt2 Im(c1* c2 + c2* c3)");
    outln!("units        radians, seconds, counts per second");
    Ok(())
}
