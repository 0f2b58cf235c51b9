//! `wavprof`: generate synthetic corpora, decompose them into profiles,
//! re-verify stored reports and evaluate norms.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavelet_profiles::commands::{
    cmd_decompose, cmd_generate, cmd_norms, cmd_verify, default_config, exit_code, load_sequence,
};
use wavelet_profiles::io::{ext_real, read_json, to_json, ReportFile};
use wavelet_profiles::{BesovParams, Config, Error, Result, Space};

#[derive(Parser)]
#[command(
    name = "wavprof",
    version,
    about = "Profile decomposition of wavelet coefficient sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a synthetic corpus from a spec file.
    Generate {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the spec file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Extract profiles from the u_*.json fields in a directory and verify them.
    Decompose {
        dir: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the verification section of a stored report.
    Verify {
        dir: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the norms of one field file as JSON.
    Norms {
        field: PathBuf,
        /// Besov parameters `s,a,b`; `inf` allowed for `a` and `b`. Repeatable.
        #[arg(long = "besov", value_parser = parse_besov, allow_hyphen_values = true)]
        besov: Vec<BesovParams<f64>>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceKind {
    Lp,
    Besov,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON extraction config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tail_window: Option<usize>,
    #[arg(long)]
    stop_epsilon: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    conv_tol: Option<f64>,
    #[arg(long)]
    bound_threshold: Option<f64>,
    #[arg(long, value_enum)]
    space: Option<SpaceKind>,
    #[arg(long, value_parser = ext_real::parse::<f64>)]
    q: Option<f64>,
    #[arg(long, value_parser = ext_real::parse::<f64>)]
    r: Option<f64>,
    #[arg(long, value_parser = ext_real::parse::<f64>)]
    a: Option<f64>,
    #[arg(long, value_parser = ext_real::parse::<f64>)]
    b: Option<f64>,
}

fn parse_besov(text: &str) -> std::result::Result<BesovParams<f64>, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let [s, a, b] = parts.as_slice() else {
        return Err(format!("expected s,a,b, got {text:?}"));
    };
    let s: f64 = s.trim().parse().map_err(|e| format!("bad s {s:?}: {e}"))?;
    BesovParams::new(s, ext_real::parse(a)?, ext_real::parse(b)?).map_err(|e| e.to_string())
}

impl ConfigArgs {
    fn has_config(&self) -> bool {
        self.config.is_some()
            || self.tail_window.is_some()
            || self.stop_epsilon.is_some()
            || self.max_iterations.is_some()
            || self.conv_tol.is_some()
            || self.bound_threshold.is_some()
            || self.space.is_some()
            || [self.q, self.r, self.a, self.b].iter().any(Option::is_some)
    }

    fn resolve(&self, base: Config) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => read_json::<Config>(path)?,
            None => base,
        };
        if let Some(w) = self.tail_window {
            cfg.tail_window = w;
        }
        if let Some(e) = self.stop_epsilon {
            cfg.stop_epsilon = e;
        }
        if let Some(m) = self.max_iterations {
            cfg.max_iterations = m;
        }
        if let Some(t) = self.conv_tol {
            cfg.conv_tol = t;
        }
        if let Some(t) = self.bound_threshold {
            cfg.bound_threshold = t;
        }
        let p = cfg.space.p();
        let kind = self.space.unwrap_or(match cfg.space {
            Space::Lp { .. } => SpaceKind::Lp,
            Space::Besov { .. } => SpaceKind::Besov,
        });
        cfg.space = match (kind, cfg.space) {
            (SpaceKind::Lp, Space::Lp { q, r, .. }) => Space::Lp {
                p,
                q: self.q.unwrap_or(q),
                r: self.r.unwrap_or(r),
            },
            (SpaceKind::Lp, Space::Besov { .. }) => Space::Lp {
                p,
                q: self.q.unwrap_or(2.0 * p),
                r: self.r.unwrap_or(2.0 * p),
            },
            (SpaceKind::Besov, Space::Besov { a, q, b, r, .. }) => Space::Besov {
                p,
                a: self.a.unwrap_or(a),
                q: self.q.unwrap_or(q),
                b: self.b.unwrap_or(b),
                r: self.r.unwrap_or(r),
            },
            (SpaceKind::Besov, Space::Lp { .. }) => {
                let a = self.a.unwrap_or(2.0);
                let q = self.q.unwrap_or(2.0);
                let b = self.b.unwrap_or(2.0 * a);
                Space::Besov {
                    p,
                    a,
                    q,
                    b,
                    r: self.r.unwrap_or(b / a * q),
                }
            }
        };
        if self.space.is_none()
            && matches!(cfg.space, Space::Lp { .. })
            && (self.a.is_some() || self.b.is_some())
        {
            return Err(Error::Param("--a and --b need --space besov".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { spec, out, seed } => {
            let n = cmd_generate(&spec, &out, seed)?;
            eprintln!("wrote {n} fields and truth.json to {}", out.display());
        }
        Command::Decompose { dir, cfg, out } => {
            let seq = load_sequence(&dir)?;
            let cfg = cfg.resolve(default_config(&seq)?)?;
            let report = cmd_decompose(seq, &cfg)?;
            emit(out.as_deref(), &to_json(&report)?)?;
        }
        Command::Verify {
            dir,
            report,
            cfg,
            out,
        } => {
            let seq = load_sequence(&dir)?;
            let stored: ReportFile = read_json(&report)?;
            let cfg = if cfg.has_config() {
                let base = match stored.config {
                    Some(c) => c,
                    None => default_config(&seq)?,
                };
                Some(cfg.resolve(base)?)
            } else {
                None
            };
            let report = cmd_verify(seq, &stored, cfg)?;
            emit(out.as_deref(), &to_json(&report)?)?;
        }
        Command::Norms { field, besov } => {
            emit(None, &to_json(&cmd_norms(&field, &besov)?)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(3)
        }
    }
}
