use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fairfront::experiments::{
    cmd_bounds, cmd_certify, cmd_frontier, cmd_synth, cmd_tradeoff, parse_channel, parse_fairness,
    parse_grid, CertifyConfig, DatasetSource, DistSource, Format, FrontierConfig, RunContext,
    RunOutput, SynthConfig, TradeoffConfig,
};
use fairfront::measures::CostParam;
use fairfront::plugin::{SweepConfig, TrainConfig};
use fairfront::{Error, Result};

#[derive(Parser)]
#[command(name = "fairfront", version, about = "Fairness frontiers and plug-in fair classifiers")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Directory holding fetched datasets; overrides FAIRFRONT_DATA_DIR.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// csv or csv+svg
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fairness frontier curves for the interval family or a CSV distribution.
    Frontier(FrontierArgs),
    /// Disparate impact versus its cost-sensitive certificate under label noise.
    Certify(CertifyArgs),
    /// Plug-in lambda sweep: balanced error against mean difference.
    Tradeoff(TradeoffArgs),
    /// DI and BER identities and bounds for one pair of rates.
    Bounds(BoundsArgs),
    /// Rotated two-Gaussian sample.
    Synth(SynthArgs),
}

#[derive(Args)]
struct FrontierArgs {
    /// indicator, sigmoid or a mass,eta,eta_dp,eta_eo CSV file
    #[arg(long, default_value = "indicator")]
    dist: String,
    #[arg(long, default_value = "0,0.25,0.5")]
    t: String,
    #[arg(long, default_value_t = 2001)]
    n_points: usize,
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    cbar: f64,
    /// cs, cs-sym, cs-prior, md, md-sym, di or di-sym
    #[arg(long, default_value = "cs-sym")]
    fairness: String,
    #[arg(long, default_value = "dp")]
    channel: String,
    #[arg(long, default_value = "0:0.5:51")]
    taus: String,
}

#[derive(Args)]
struct DatasetArgs {
    /// german, german-standin, gaussian or a CSV path
    #[arg(long, default_value = "german-standin")]
    dataset: String,
    /// Schema file for a CSV dataset.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Rows for the gaussian dataset.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Rotation for the gaussian dataset.
    #[arg(long, default_value_t = 0.5)]
    phi: f64,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    train_fraction: f64,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
}

impl DatasetArgs {
    fn source(&self) -> Result<DatasetSource> {
        DatasetSource::parse(&self.dataset, self.schema.as_deref(), self.n, self.phi)
    }

    fn train(&self) -> TrainConfig {
        TrainConfig { l2: self.l2, ..TrainConfig::default() }
    }
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, default_value_t = 0.8)]
    tau: f64,
    #[arg(long, default_value = "0:0.4:9")]
    noise: String,
}

#[derive(Args)]
struct TradeoffArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, default_value = "dp")]
    channel: String,
    #[arg(long, allow_hyphen_values = true, default_value = "-2:2:81")]
    lambdas: String,
    /// Target cost, or `auto` for the mean fitted target probability.
    #[arg(long, default_value = "auto")]
    c: String,
    #[arg(long, default_value_t = 0.5)]
    cbar: f64,
    /// Append squares and pairwise products of the features.
    #[arg(long)]
    quadratic: bool,
    /// Use the sensitive feature as an input to the target model.
    #[arg(long)]
    sensitive_aware: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    fnr: f64,
    #[arg(long)]
    fpr: f64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    phi: f64,
}

fn report(out: &RunOutput) {
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    println!("wrote {}", out.manifest_path.display());
}

fn run(cli: Cli) -> Result<bool> {
    let ctx = RunContext {
        out: cli.out,
        seed: cli.seed,
        format: Format::parse(&cli.format)?,
        data_dir: cli.data_dir,
    };
    let degenerate = match cli.command {
        Command::Frontier(a) => {
            let (form, symmetrization) = parse_fairness(&a.fairness)?;
            let dist = match a.dist.as_str() {
                "indicator" => DistSource::Indicator,
                "sigmoid" => DistSource::Sigmoid,
                path => DistSource::Csv(path.into()),
            };
            let cfg = FrontierConfig {
                dist,
                ts: parse_grid(&a.t)?,
                n_points: a.n_points,
                c: CostParam::new(a.c)?,
                cbar: CostParam::new(a.cbar)?,
                form,
                symmetrization,
                channel: parse_channel(&a.channel)?,
                taus: parse_grid(&a.taus)?,
            };
            let (out, curves) = cmd_frontier(&ctx, &cfg)?;
            for (t, c) in cfg.ts.iter().zip(&curves) {
                println!("t={t} tau_star={} tau_max={:?}", c.tau_star, c.tau_max);
            }
            report(&out);
            out.degenerate
        }
        Command::Certify(a) => {
            let cfg = CertifyConfig {
                dataset: a.data.source()?,
                tau: a.tau,
                noise_rates: parse_grid(&a.noise)?,
                train_fraction: a.data.train_fraction,
                train: a.data.train(),
            };
            let (out, rows) = cmd_certify(&ctx, &cfg)?;
            for r in &rows {
                if r.di.is_none() {
                    eprintln!(
                        "level=error code=undefined_ratio msg=\"noise rate {}: fnr = 1 on test, DI undefined\"",
                        r.noise_rate
                    );
                }
            }
            report(&out);
            out.degenerate
        }
        Command::Tradeoff(a) => {
            let c = match a.c.as_str() {
                "auto" => None,
                v => Some(CostParam::new(
                    v.parse().map_err(|_| Error::Config(format!("bad --c `{v}`")))?,
                )?),
            };
            let cfg = TradeoffConfig {
                dataset: a.data.source()?,
                lambdas: parse_grid(&a.lambdas)?,
                quadratic: a.quadratic,
                train_fraction: a.data.train_fraction,
                sweep: SweepConfig {
                    c,
                    cbar: CostParam::new(a.cbar)?,
                    channel: parse_channel(&a.channel)?,
                    sensitive_aware: a.sensitive_aware,
                    train: a.data.train(),
                    ..SweepConfig::default()
                },
            };
            let (out, sweep) = cmd_tradeoff(&ctx, &cfg)?;
            println!("c_used={}", sweep.c_used.get());
            report(&out);
            false
        }
        Command::Bounds(a) => {
            print!("{}", cmd_bounds(a.fnr, a.fpr)?);
            false
        }
        Command::Synth(a) => {
            let (out, _) = cmd_synth(&ctx, &SynthConfig { n: a.n, phi: a.phi })?;
            report(&out);
            false
        }
    };
    Ok(degenerate)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(4),
        Err(e) => {
            let msg = e.to_string().replace('"', "'");
            eprintln!("level=error code={} msg=\"{msg}\"", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
