use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fbms::report::ErrorRecord;
use fbms::{run, CliError, RunConfig};

/// Sweepouts, width bounds and free boundary area descent in the unit ball.
///
/// Settings are layered: defaults, then `--config`, then `--options`, then
/// flags. Exit status: 0 all certificates pass, 1 a certificate failed,
/// 2 usage error, 3 internal error. FBMS_THREADS caps the worker pool.
#[derive(Debug, Parser)]
#[command(name = "fbms", version)]
struct Cli {
    /// catenoid, sweep, width, minimize or all.
    #[arg(value_name = "COMMAND")]
    positional: Option<String>,
    /// Same as the positional command.
    #[arg(long)]
    command: Option<String>,
    /// Flat `key = value` file with any of the settings below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Minimizer options file (step, tol, max_iter, cadence, seed).
    #[arg(long)]
    options: Option<PathBuf>,
    /// Genus of the sweepout.
    #[arg(long)]
    g: Option<String>,
    /// Number of sweep parameters.
    #[arg(long)]
    grid: Option<String>,
    /// Slice resolution, a multiple of g+1.
    #[arg(long)]
    resolution: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Random seed.
    #[arg(long)]
    seed: Option<String>,
    /// Monte Carlo samples per slice.
    #[arg(long)]
    samples: Option<String>,
    /// Volume residual allowance in standard errors.
    #[arg(long)]
    tol_sigma: Option<String>,
    /// Minimizer gradient tolerance.
    #[arg(long)]
    tol_grad: Option<String>,
    /// Free boundary angle tolerance in radians.
    #[arg(long)]
    tol_fb: Option<String>,
    /// Neck radius (schedule) or catenoid radius.
    #[arg(long)]
    r: Option<String>,
    /// Neck height (schedule) or catenoid half height.
    #[arg(long)]
    h: Option<String>,
    /// Stage parameter; tied to h.
    #[arg(long)]
    t0: Option<String>,
    /// Seed OBJ for the minimizer.
    #[arg(long)]
    mesh: Option<String>,
    /// Initial line search step.
    #[arg(long)]
    step: Option<String>,
    /// Minimizer iteration cap.
    #[arg(long)]
    max_iter: Option<String>,
    /// Orbit-averaging cadence.
    #[arg(long)]
    cadence: Option<String>,
    /// Gradient smoothing length scale.
    #[arg(long)]
    smoothing: Option<String>,
    /// Random perturbation amplitude of the minimizer seed.
    #[arg(long)]
    perturb: Option<String>,
}

impl Cli {
    fn resolve(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(p) = &self.config {
            cfg.apply_file(p)?;
        }
        if let Some(p) = &self.options {
            cfg.apply_file(p)?;
        }
        let command = match (&self.positional, &self.command) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Usage(format!("command given twice: {a} and {b}")))
            }
            (Some(c), _) | (None, Some(c)) => Some(c),
            (None, None) => None,
        };
        let flags = [
            ("command", command),
            ("g", self.g.as_ref()),
            ("grid", self.grid.as_ref()),
            ("resolution", self.resolution.as_ref()),
            ("out", self.out.as_ref()),
            ("seed", self.seed.as_ref()),
            ("samples", self.samples.as_ref()),
            ("tol_sigma", self.tol_sigma.as_ref()),
            ("tol_grad", self.tol_grad.as_ref()),
            ("tol_fb", self.tol_fb.as_ref()),
            ("r", self.r.as_ref()),
            ("h", self.h.as_ref()),
            ("t0", self.t0.as_ref()),
            ("mesh", self.mesh.as_ref()),
            ("step", self.step.as_ref()),
            ("max_iter", self.max_iter.as_ref()),
            ("cadence", self.cadence.as_ref()),
            ("smoothing", self.smoothing.as_ref()),
            ("perturb", self.perturb.as_ref()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v).map_err(CliError::Usage)?;
            }
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut cfg = RunConfig::default();
    let result = cli.resolve(&mut cfg).and_then(|()| run(&cfg));
    match result {
        Ok(a) => {
            for f in &a.files {
                println!("{}", f.display());
            }
            if a.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("fbms: certificate failure; see the reports above");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("fbms: {e}");
            let path = cfg.out.join("error.json");
            if std::fs::create_dir_all(&cfg.out).is_ok() {
                if let Err(w) = ErrorRecord::new(&e, Some(&cfg)).write(&path) {
                    eprintln!("fbms: could not write {}: {w}", path.display());
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
