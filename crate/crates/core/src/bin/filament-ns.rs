use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use filament_ns::harness::criteria;
use filament_ns::harness::io::{fmt, write_table};
use filament_ns::harness::{
    emit_report, evolve, ledger::row_line, run_asymptotics, run_interaction_sweep, run_uniqueness_probe, verify_bs,
    RunConfig, RunLedger,
};
use filament_ns::{exec, Error};

#[derive(Parser)]
#[command(name = "filament-ns", version, about = "Axisymmetric Navier-Stokes with vortex-filament data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (TOML, see docs/config.md).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TimesArg {
    /// Comma-separated checkpoint times; defaults to the config's checkpoints.
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve and write field dumps and diagnostics.csv.
    Evolve(Common),
    /// Oseen-rate sweep; writes energies.csv and a report.
    Asymptotics {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        times: TimesArg,
    },
    /// Cross-induced speed sweep for a pair of filaments.
    Interaction {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        times: TimesArg,
    },
    /// Reference and perturbed run compared through the difference energy.
    UniquenessProbe {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        times: TimesArg,
        /// Relative weighted-L2 size; defaults to `probe.perturbation`.
        #[arg(long)]
        perturbation: Option<f64>,
    },
    /// Stream-function velocity against direct quadrature, as CSV on stdout.
    VerifyBs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
    /// Run the acceptance criteria and write report.json, summary.csv and summary.txt.
    Report(Common),
}

fn load(common: &Common) -> Result<(RunConfig, String), Error> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required for this subcommand".into()))?;
    let (mut cfg, hash) = RunConfig::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok((cfg, hash))
}

fn times_or_default(cfg: &RunConfig, t: &TimesArg) -> Vec<f64> {
    if t.times.is_empty() {
        cfg.checkpoints()
    } else {
        t.times.clone()
    }
}

fn finish(ledger: &mut RunLedger, hash: String, out: &Path) -> Result<(), Error> {
    ledger.config_hash = hash;
    emit_report(ledger, out)?;
    if ledger.all_passed() {
        Ok(())
    } else {
        let bad: Vec<&str> = ledger.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Error::InvariantBreach(bad.join("; ")))
    }
}

fn mkdir(p: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(p).map_err(|e| Error::Io {
        path: p.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Evolve(c) => {
            let (cfg, hash) = load(&c)?;
            let mut ledger = evolve(&cfg, &c.out)?;
            finish(&mut ledger, hash, &c.out)
        }
        Command::Asymptotics { common, times } => {
            let (cfg, hash) = load(&common)?;
            let t = times_or_default(&cfg, &times);
            let mut ledger = run_asymptotics(&cfg, &t)?;
            mkdir(&common.out)?;
            let mut csv = String::from("t,i,eps,E_i,calE_i,l1_dist,rate_ratio\n");
            for r in &ledger.rows {
                csv.push_str(&row_line(r));
                csv.push('\n');
            }
            let p = common.out.join("energies.csv");
            std::fs::write(&p, csv).map_err(|e| Error::Io { path: p, source: e })?;
            finish(&mut ledger, hash, &common.out)
        }
        Command::Interaction { common, times } => {
            let (cfg, hash) = load(&common)?;
            let t = times_or_default(&cfg, &times);
            let mut sweep = run_interaction_sweep(&cfg, &t)?;
            mkdir(&common.out)?;
            let rows: Vec<Vec<f64>> = sweep.times.iter().zip(&sweep.metric).map(|(a, b)| vec![*a, *b]).collect();
            write_table(&common.out.join("interaction.csv"), &["t", "M"], &rows)?;
            if let Some(f) = sweep.fit {
                println!("exponent {} (R^2 {})", fmt(f.slope), fmt(f.r2));
            }
            finish(&mut sweep.ledger, hash, &common.out)
        }
        Command::UniquenessProbe {
            common,
            times,
            perturbation,
        } => {
            let (cfg, hash) = load(&common)?;
            let t = times_or_default(&cfg, &times);
            let size = perturbation.unwrap_or(cfg.probe.perturbation);
            let p = run_uniqueness_probe(&cfg, size, &t)?;
            mkdir(&common.out)?;
            let rows: Vec<Vec<f64>> = (0..p.times.len())
                .map(|k| vec![p.times[k], p.e_delta[k], p.e1[k], p.e2[k]])
                .collect();
            write_table(&common.out.join("probe.csv"), &["t", "E_delta", "E1", "E2"], &rows)?;
            let mut ledger = RunLedger::new("uniqueness-probe", Some(cfg), String::new());
            for (k, &t) in p.times.iter().enumerate() {
                ledger.push_series("t", t);
                ledger.push_series("e_delta", p.e_delta[k]);
                ledger.push_series("e1", p.e1[k]);
                ledger.push_series("e2", p.e2[k]);
            }
            if let Some(f) = p.gronwall_fit {
                ledger.calibrate("gronwall_kappa", -f.slope)?;
                ledger.calibrate("gronwall_r2", f.r2)?;
            }
            if let Some(t) = p.monotone_after {
                ledger.calibrate("monotone_after", t)?;
            }
            ledger.push_check("difference triangle bound", p.triangle_holds(), "E_delta <= 2 (E1 + E2)");
            finish(&mut ledger, hash, &common.out)
        }
        Command::VerifyBs { common, points } => {
            let (cfg, _) = load(&common)?;
            let v = verify_bs(&cfg, points, cfg.seed)?;
            let rows: Vec<Vec<f64>> = v
                .samples
                .iter()
                .map(|s| vec![s.point.0, s.point.1, s.solve.0, s.solve.1, s.quad.0, s.quad.1, s.rel_err])
                .collect();
            println!("point_r,point_z,ur_solve,uz_solve,ur_quad,uz_quad,rel_err");
            for r in &rows {
                println!("{}", r.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join(","));
            }
            eprintln!(
                "max rel err {:.3e}, refined {:.3e}, observed order {:.2}",
                v.max_rel_err, v.refined_max_rel_err, v.observed_order
            );
            Ok(())
        }
        Command::Report(c) => {
            let hash = match &c.config {
                Some(_) => load(&c)?.1,
                None => String::new(),
            };
            let (outcomes, run1) = criteria::run_all(|o| println!("{o}"));
            let mut ledger = RunLedger::new("acceptance", None, String::new());
            if let Some(l) = run1 {
                ledger.checkpoints = l.checkpoints;
                ledger.rows = l.rows;
                ledger.series = l.series;
                ledger.calibration = l.calibration;
                ledger.timings = l.timings;
            }
            for o in &outcomes {
                ledger.push_check(&format!("criterion {} {}", o.id, o.title), o.passed, o.detail.clone());
            }
            finish(&mut ledger, hash, &c.out)
        }
    }
}

fn threads(cli: &Cli) -> Option<usize> {
    match &cli.command {
        Command::Evolve(c) | Command::Report(c) => c.threads,
        Command::Asymptotics { common, .. }
        | Command::Interaction { common, .. }
        | Command::UniquenessProbe { common, .. }
        | Command::VerifyBs { common, .. } => common.threads,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = threads(&cli) {
        exec::init_threads(n);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvariantBreach(_) | Error::StepRejected { .. } | Error::ProbeDiverged(_) => 2,
                Error::SolverFailure { .. } => 3,
                _ => 1,
            })
        }
    }
}
