use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use socnet::bootstrap::bootstrap_replicate;
use socnet::community::{greedy_communities, measure_l, spectral_communities, DEFAULT_REPLICATES};
use socnet::estimator::{
    fit_network, smooth_network, FitMode, FitOptions, ScreenOptions, DEFAULT_QUANTILE,
    DEFAULT_REPLICATES as SCREEN_REPLICATES,
};
use socnet::generator::generate;
use socnet::model::io::{load_json, load_labels, load_network, matrix_to_csv, save_json, save_labels, save_network};
use socnet::model::{CommunityAssignment, FittedModel, GeneratorSpec, WeightedNetwork};

mod render;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] socnet::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "socnet", version, about = "Sociability models for dense weighted networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a network from a generator spec (JSON).
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the true community labels.
        #[arg(long)]
        labels_out: Option<PathBuf>,
        /// Also write the true sociabilities, one per line.
        #[arg(long)]
        psi_out: Option<PathBuf>,
    },
    /// Fit a model to a network with known communities.
    Fit {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Nsm)]
        mode: Mode,
        /// Screen every pair for spurious structure.
        #[arg(long)]
        screen: bool,
        #[arg(long, default_value_t = SCREEN_REPLICATES)]
        screen_replicates: usize,
        #[arg(long, default_value_t = DEFAULT_QUANTILE)]
        screen_quantile: f64,
        /// Treat zero off-diagonal weights as missing edges.
        #[arg(long)]
        zeros_missing: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the smooth reconstruction as CSV.
        #[arg(long)]
        smooth_out: Option<PathBuf>,
    },
    /// Draw replicate networks from a fitted model.
    Bootstrap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Replicate k is written to <prefix>_<k>.csv, k = 1..=count.
        #[arg(long)]
        out_prefix: String,
    },
    /// Detect communities.
    Communities {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Greedy)]
        method: Method,
        /// Spectral clusterings per K.
        #[arg(long, default_value_t = DEFAULT_REPLICATES)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a network as a heatmap image.
    Render {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Sort::Degree)]
        sort: Sort,
        #[arg(long, value_enum, default_value_t = Format::Pgm)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Nsm,
    NormalLsm,
    Lsm,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Greedy,
    Spectral,
    /// Run both and keep the assignment with the larger L.
    Both,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Sort {
    Degree,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Pgm,
    Ppm,
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| socnet::Error::Io(e).into())
}

fn check_labels(net: &WeightedNetwork, labels: &CommunityAssignment) -> Result<()> {
    if labels.n() != net.n() {
        return Err(socnet::Error::Dimension(format!(
            "{} labels for a network of {} nodes",
            labels.n(),
            net.n()
        ))
        .into());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            spec,
            seed,
            out,
            labels_out,
            psi_out,
        } => {
            let spec: GeneratorSpec = load_json(&spec)?;
            let (net, psi) = generate(&spec, seed)?;
            save_network(&net, &out)?;
            if let Some(p) = labels_out {
                save_labels(&spec.assignment, &p)?;
            }
            if let Some(p) = psi_out {
                let text: String = psi.iter().map(|x| format!("{}\n", socnet::model::io::fmt_g17(*x))).collect();
                write_file(&p, text)?;
            }
        }
        Command::Fit {
            net,
            labels,
            mode,
            screen,
            screen_replicates,
            screen_quantile,
            zeros_missing,
            seed,
            out,
            smooth_out,
        } => {
            let net = load_network(&net, zeros_missing)?;
            let labels = load_labels(&labels)?;
            check_labels(&net, &labels)?;
            let opts = FitOptions {
                mode: match mode {
                    Mode::Nsm => FitMode::Nsm,
                    Mode::NormalLsm => FitMode::NormalLsm,
                    Mode::Lsm => FitMode::Lsm,
                },
                screen: screen.then_some(ScreenOptions {
                    replicates: screen_replicates,
                    quantile: screen_quantile,
                }),
                seed,
                ..FitOptions::default()
            };
            let model = fit_network(&net, &labels, &opts)?;
            for p in &model.pairs {
                println!(
                    "pair ({}, {}): {} sigma {:.4} mse {:.4}{}",
                    p.i,
                    p.j,
                    p.h_hat.label(),
                    p.sigma_hat,
                    p.mse,
                    if p.spurious {
                        " spurious"
                    } else if p.degenerate {
                        " degenerate"
                    } else {
                        ""
                    }
                );
            }
            save_json(&model, &out)?;
            if let Some(p) = smooth_out {
                write_file(&p, matrix_to_csv(&smooth_network(&model)))?;
            }
        }
        Command::Bootstrap {
            model,
            seed,
            count,
            out_prefix,
        } => {
            let model: FittedModel = load_json(&model)?;
            for k in 1..=count {
                let rep = bootstrap_replicate(&model, seed.wrapping_add(k as u64 - 1))?;
                save_network(&rep, format!("{out_prefix}_{k}.csv"))?;
            }
        }
        Command::Communities {
            net,
            method,
            replicates,
            seed,
            out,
        } => {
            let net = load_network(&net, false)?;
            let mut found = Vec::new();
            if method != Method::Spectral {
                found.push(("greedy", greedy_communities(&net)?));
            }
            if method != Method::Greedy {
                found.push(("spectral", spectral_communities(&net, replicates, seed)?));
            }
            let mut best: Option<(f64, CommunityAssignment)> = None;
            for (name, a) in found {
                let l = measure_l(&net, &a).l;
                println!("{name}: K = {} L = {l:.6}", a.k());
                if best.as_ref().is_none_or(|(bl, _)| l > *bl) {
                    best = Some((l, a));
                }
            }
            save_labels(&best.expect("one method ran").1, &out)?;
        }
        Command::Render {
            net,
            labels,
            sort,
            format,
            out,
        } => {
            let net = load_network(&net, false)?;
            let labels = match labels {
                Some(p) => load_labels(&p)?,
                None => CommunityAssignment::single(net.n())?,
            };
            check_labels(&net, &labels)?;
            let order = render::display_order(&net, &labels, sort == Sort::Degree);
            let levels = render::intensities(&net, &order);
            let bytes = match format {
                Format::Pgm => render::pgm(net.n(), &levels),
                Format::Ppm => render::ppm(net.n(), &levels),
            };
            write_file(&out, bytes)?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("SOCNET_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("SOCNET_THREADS must be a positive integer, got {value:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("socnet: {e}");
            ExitCode::from(e.code())
        }
    }
}
