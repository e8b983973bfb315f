//! The command-line experiments as library calls. Each command writes its
//! CSV files (and optional SVG charts) under an output directory, then a
//! `<command>.manifest.json` recording the resolved configuration, seed,
//! input checksums and output checksums.
//!
//! | command    | CSV header                  |
//! |------------|-----------------------------|
//! | `frontier` | `tau,F,lambda,status`       |
//! | `certify`  | `noise_rate,di,delta,agree` |
//! | `tradeoff` | `lambda,ber,md_sym,di`      |
//! | `synth`    | `x1,x2,y,ybar`              |

pub mod manifest;
pub mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, german, SchemaDescriptor, SplitSpec};
use crate::distributions::{build_interval_dist, sample_rotated_gaussians, DiscreteJoint, EtaKind, SampleSet};
use crate::error::{Error, Result};
use crate::frontier::{compute_frontier, FrontierCurve, LpStatus};
use crate::measures::{
    balanced_cs_risk, bounds_report, cs_certifies_di, di_at_least, di_equiv_cost, disparate_impact,
    CostParam, FairnessForm, FairnessSpec, Rates, SensitiveChannel, Symmetrization, DEFAULT_TOL,
};
use crate::plugin::{evaluate_empirical, sweep_lambda, train_cs_logistic, LabelChannel, SweepConfig, TrainConfig};

pub use manifest::{sha256_hex, FileDigest, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Format {
    #[default]
    Csv,
    CsvSvg,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "csv+svg" => Ok(Format::CsvSvg),
            _ => Err(Error::Config(format!("unknown format `{s}`; expected csv or csv+svg"))),
        }
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunContext {
    pub out: PathBuf,
    pub seed: u64,
    pub format: Format,
    /// Overrides the `FAIRFRONT_DATA_DIR` environment variable.
    pub data_dir: Option<PathBuf>,
}

impl RunContext {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        RunContext {
            out: out.into(),
            seed: 0,
            format: Format::Csv,
            data_dir: None,
        }
    }

    pub fn resolved_data_dir(&self) -> Option<PathBuf> {
        self.data_dir
            .clone()
            .or_else(|| std::env::var_os(data::DATA_DIR_ENV).map(PathBuf::from))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub manifest_path: PathBuf,
    /// Set when some row carries an undefined metric.
    pub degenerate: bool,
}

struct Writer<'a> {
    ctx: &'a RunContext,
    manifest: RunManifest,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(ctx: &'a RunContext, command: &str, config: &impl Serialize) -> Result<Self> {
        Ok(Writer {
            ctx,
            manifest: RunManifest::new(command, config, ctx.seed)?,
            files: Vec::new(),
        })
    }

    fn input(&mut self, digest: FileDigest) {
        self.manifest.inputs.push(digest);
    }

    fn file(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.ctx.out.join(name);
        data::write_atomic(&path, bytes)?;
        self.manifest.outputs.push(FileDigest::of_bytes(name, bytes));
        self.files.push(path);
        Ok(())
    }

    fn chart(&mut self, name: &str, chart: impl FnOnce() -> svg::Chart) -> Result<()> {
        if self.ctx.format == Format::CsvSvg {
            self.file(name, chart().render().as_bytes())?;
        }
        Ok(())
    }

    fn finish(self, degenerate: bool) -> Result<RunOutput> {
        let manifest_path = self.manifest.write(&self.ctx.out)?;
        Ok(RunOutput {
            files: self.files,
            manifest_path,
            degenerate,
        })
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `lo:hi:n` for `n` evenly spaced points, or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad grid `{s}`; expected lo:hi:n or a comma list"));
    let number = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [lo, hi, n] => {
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            crate::frontier::linspace(number(lo)?, number(hi)?, n)
        }
        [_] => s.split(',').map(number).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}

/// `cs`, `cs-sym`, `cs-prior`, `md`, `md-sym`, `di` or `di-sym`.
pub fn parse_fairness(s: &str) -> Result<(FairnessForm, Symmetrization)> {
    let (form, sym) = match s.split_once('-') {
        Some((f, "sym")) => (f, Symmetrization::MinWithAnti),
        Some((f, "prior")) => (f, Symmetrization::PriorWeighted),
        None => (s, Symmetrization::None),
        _ => return Err(Error::Config(format!("unknown fairness form `{s}`"))),
    };
    let form = match form {
        "cs" => FairnessForm::CostSensitive,
        "md" => FairnessForm::MeanDifference,
        "di" => FairnessForm::DisparateImpact,
        _ => return Err(Error::Config(format!("unknown fairness form `{s}`"))),
    };
    if sym == Symmetrization::PriorWeighted && form != FairnessForm::CostSensitive {
        return Err(Error::Config(format!("`{s}`: prior weighting needs the cs form")));
    }
    Ok((form, sym))
}

pub fn parse_channel(s: &str) -> Result<SensitiveChannel> {
    match s {
        "dp" => Ok(SensitiveChannel::Dp),
        "eo" => Ok(SensitiveChannel::Eo),
        _ => Err(Error::Config(format!("unknown channel `{s}`; expected dp or eo"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistSource {
    Indicator,
    Sigmoid,
    /// A `mass,eta,eta_dp,eta_eo` file.
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierConfig {
    pub dist: DistSource,
    /// Family parameters; ignored for a CSV distribution.
    pub ts: Vec<f64>,
    pub n_points: usize,
    pub c: CostParam,
    pub cbar: CostParam,
    pub form: FairnessForm,
    pub symmetrization: Symmetrization,
    pub channel: SensitiveChannel,
    pub taus: Vec<f64>,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        FrontierConfig {
            dist: DistSource::Indicator,
            ts: vec![0.0, 0.25, 0.5],
            n_points: 2001,
            c: CostParam::HALF,
            cbar: CostParam::HALF,
            form: FairnessForm::CostSensitive,
            symmetrization: Symmetrization::MinWithAnti,
            channel: SensitiveChannel::Dp,
            taus: crate::frontier::linspace(0.0, 0.5, 51),
        }
    }
}

fn frontier_csv(curve: &FrontierCurve) -> String {
    let mut s = String::from("tau,F,lambda,status\n");
    for p in &curve.points {
        let _ = writeln!(s, "{},{},{},{}", p.tau, opt(p.value), opt(p.lambda), p.status.as_str());
    }
    s
}

/// One frontier per distribution. Files: `frontier_t<t>.csv` per family
/// parameter (or `frontier.csv` for a CSV distribution), `frontier_summary.csv`
/// with `t,tau_star,tau_max`, and `frontier.svg`.
pub fn cmd_frontier(ctx: &RunContext, cfg: &FrontierConfig) -> Result<(RunOutput, Vec<FrontierCurve>)> {
    if cfg.taus.is_empty() {
        return Err(Error::Config("empty tau grid".into()));
    }
    let mut w = Writer::new(ctx, "frontier", cfg)?;
    let dists: Vec<(String, Option<f64>, DiscreteJoint)> = match &cfg.dist {
        DistSource::Csv(path) => {
            w.input(FileDigest::of_file(path)?);
            vec![("frontier.csv".into(), None, data::load_joint_csv(path)?)]
        }
        family => {
            let kind = if *family == DistSource::Indicator { EtaKind::Indicator } else { EtaKind::Sigmoid };
            if cfg.ts.is_empty() {
                return Err(Error::Config("empty t list".into()));
            }
            cfg.ts
                .iter()
                .map(|&t| Ok((format!("frontier_t{t}.csv"), Some(t), build_interval_dist(kind, t, cfg.n_points)?)))
                .collect::<Result<_>>()?
        }
    };
    let fairness = FairnessSpec {
        form: cfg.form,
        cbar: cfg.cbar,
        symmetrization: cfg.symmetrization,
        tau: 0.0,
        channel: cfg.channel,
    };
    let curves = dists
        .iter()
        .map(|(_, _, d)| compute_frontier(d, cfg.c, &fairness, &cfg.taus))
        .collect::<Result<Vec<_>>>()?;
    if curves.iter().all(|c| c.points.iter().all(|p| p.status == LpStatus::Infeasible)) {
        return Err(Error::Infeasible(format!(
            "no level in the grid is attainable for {}",
            cfg.form.name()
        )));
    }
    let mut summary = String::from("t,tau_star,tau_max\n");
    for ((name, t, _), curve) in dists.iter().zip(&curves) {
        w.file(name, frontier_csv(curve).as_bytes())?;
        let _ = writeln!(summary, "{},{},{}", opt(*t), curve.tau_star, opt(curve.tau_max));
    }
    w.file("frontier_summary.csv", summary.as_bytes())?;
    w.chart("frontier.svg", || svg::Chart {
        title: format!("Fairness frontier ({})", cfg.form.name()),
        x_label: "tau".into(),
        y_label: "F(tau)".into(),
        series: dists
            .iter()
            .zip(&curves)
            .map(|((name, t, _), c)| svg::Series {
                label: t.map_or(name.clone(), |t| format!("t = {t}")),
                points: c.feasible(),
            })
            .collect(),
    })?;
    Ok((w.finish(false)?, curves))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatasetSource {
    /// `german.csv` in the data directory.
    German,
    /// The bundled synthetic file with the german credit columns.
    GermanStandin,
    /// Rotated two-Gaussian sample drawn with the run seed.
    Gaussian { n: usize, phi: f64 },
    Csv { path: PathBuf, schema: PathBuf },
}

impl DatasetSource {
    /// `german`, `german-standin`, `gaussian` or `<csv>` (with a schema).
    pub fn parse(name: &str, schema: Option<&Path>, n: usize, phi: f64) -> Result<Self> {
        Ok(match name {
            "german" => DatasetSource::German,
            "german-standin" => DatasetSource::GermanStandin,
            "gaussian" => DatasetSource::Gaussian { n, phi },
            path => DatasetSource::Csv {
                path: path.into(),
                schema: schema
                    .ok_or_else(|| Error::Config(format!("dataset `{path}` needs --schema")))?
                    .to_path_buf(),
            },
        })
    }
}

fn load_dataset(src: &DatasetSource, ctx: &RunContext, w: &mut Writer) -> Result<SampleSet> {
    match src {
        DatasetSource::German => {
            let dir = ctx.resolved_data_dir().ok_or_else(|| {
                Error::Config(format!("german needs --data-dir or {}", data::DATA_DIR_ENV))
            })?;
            let (s, report) = german::load_fetched(&dir)?;
            if report.rows_dropped > 0 {
                eprintln!("level=warn msg=\"dropped {} rows with missing values\"", report.rows_dropped);
            }
            w.input(FileDigest::of_file(german::fetched_path(&dir))?);
            Ok(s)
        }
        DatasetSource::GermanStandin => {
            w.input(FileDigest::of_bytes("bundled:german_standin.csv", german::STANDIN_CSV.as_bytes()));
            german::load_standin()
        }
        DatasetSource::Gaussian { n, phi } => sample_rotated_gaussians(*n, *phi, ctx.seed),
        DatasetSource::Csv { path, schema } => {
            let schema_desc = SchemaDescriptor::from_path(schema)?;
            let (s, report) = data::load_csv_with_report(path, &schema_desc)?;
            if report.rows_dropped > 0 {
                eprintln!("level=warn msg=\"dropped {} rows with missing values\"", report.rows_dropped);
            }
            w.input(FileDigest::of_file(path)?);
            w.input(FileDigest::of_file(schema)?);
            Ok(s)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub dataset: DatasetSource,
    pub tau: f64,
    pub noise_rates: Vec<f64>,
    pub train_fraction: f64,
    pub train: TrainConfig,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            dataset: DatasetSource::GermanStandin,
            tau: 0.8,
            noise_rates: crate::frontier::linspace(0.0, 0.4, 9),
            train_fraction: 2.0 / 3.0,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyRow {
    pub noise_rate: f64,
    pub rates: Rates,
    /// `None` when FNR = 1 on the test split.
    pub di: Option<f64>,
    /// `CS_bal(f; c) - (1 - c)` with `c = 1 / (1 + tau)`.
    pub delta: f64,
    pub agree: Option<bool>,
}

fn noise_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64 + 1)
}

/// For each noise rate, flips the training sensitive labels, fits a
/// cost-sensitive logistic model for `Ybar` at `c = 1/(1+tau)` and compares
/// `DI >= tau` with `CS_bal >= 1 - c` on the clean test split.
pub fn cmd_certify(ctx: &RunContext, cfg: &CertifyConfig) -> Result<(RunOutput, Vec<CertifyRow>)> {
    if cfg.noise_rates.is_empty() {
        return Err(Error::Config("empty noise grid".into()));
    }
    let c = di_equiv_cost(cfg.tau)?;
    let mut w = Writer::new(ctx, "certify", cfg)?;
    let sample = load_dataset(&cfg.dataset, ctx, &mut w)?;
    let (train, test) = data::split(&sample, SplitSpec { train_fraction: cfg.train_fraction, seed: ctx.seed })?;
    let train_cfg = TrainConfig { c, ..cfg.train };
    let rows = cfg
        .noise_rates
        .par_iter()
        .enumerate()
        .map(|(k, &rate)| {
            let noisy = data::inject_label_noise(&train, LabelChannel::Ybar, rate, noise_seed(ctx.seed, k))?;
            let model = train_cs_logistic(&noisy, LabelChannel::Ybar, &train_cfg)?;
            let rates = evaluate_empirical(&test, LabelChannel::Ybar, |_, x| {
                if model.predict_proba(x) > 0.5 { 1.0 } else { 0.0 }
            })?;
            let di = disparate_impact(rates).ok();
            let agree = match (di_at_least(rates, cfg.tau, DEFAULT_TOL), cs_certifies_di(rates, cfg.tau, DEFAULT_TOL)) {
                (Ok(a), Ok(b)) => Some(a == b),
                _ => None,
            };
            Ok(CertifyRow {
                noise_rate: rate,
                rates,
                di,
                delta: balanced_cs_risk(rates, c) - (1.0 - c.get()),
                agree,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv = String::from("noise_rate,di,delta,agree\n");
    for r in &rows {
        let agree = r.agree.map(|a| a.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{}", r.noise_rate, opt(r.di), r.delta, agree);
    }
    w.file("certify.csv", csv.as_bytes())?;
    w.chart("certify.svg", || svg::Chart {
        title: format!("DI and CS certificate, tau = {}", cfg.tau),
        x_label: "noise rate".into(),
        y_label: "value".into(),
        series: vec![
            svg::Series {
                label: "DI".into(),
                points: rows.iter().filter_map(|r| r.di.map(|d| (r.noise_rate, d))).collect(),
            },
            svg::Series {
                label: "delta".into(),
                points: rows.iter().map(|r| (r.noise_rate, r.delta)).collect(),
            },
            svg::Series {
                label: format!("tau = {}", cfg.tau),
                points: rows.iter().map(|r| (r.noise_rate, cfg.tau)).collect(),
            },
        ],
    })?;
    let degenerate = rows.iter().any(|r| r.di.is_none());
    Ok((w.finish(degenerate)?, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffConfig {
    pub dataset: DatasetSource,
    pub lambdas: Vec<f64>,
    pub quadratic: bool,
    pub train_fraction: f64,
    pub sweep: SweepConfig,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        TradeoffConfig {
            dataset: DatasetSource::GermanStandin,
            lambdas: crate::frontier::linspace(-2.0, 2.0, 81),
            quadratic: false,
            train_fraction: 2.0 / 3.0,
            sweep: SweepConfig::default(),
        }
    }
}

/// Runs the plug-in sweep and writes `tradeoff.csv` and `tradeoff.svg`.
pub fn cmd_tradeoff(ctx: &RunContext, cfg: &TradeoffConfig) -> Result<(RunOutput, crate::plugin::Sweep)> {
    if cfg.lambdas.is_empty() {
        return Err(Error::Config("empty lambda grid".into()));
    }
    let mut w = Writer::new(ctx, "tradeoff", cfg)?;
    let mut sample = load_dataset(&cfg.dataset, ctx, &mut w)?;
    if cfg.quadratic {
        sample = data::quadratic_features(&sample);
    }
    let (train, test) = data::split(&sample, SplitSpec { train_fraction: cfg.train_fraction, seed: ctx.seed })?;
    let sweep = sweep_lambda(&train, &test, &cfg.lambdas, &cfg.sweep)?;
    let mut csv = String::from("lambda,ber,md_sym,di\n");
    for p in &sweep.points {
        let _ = writeln!(csv, "{},{},{},{}", p.lambda, p.ber_target, p.md_sym_sensitive, opt(p.di_sensitive));
    }
    w.file("tradeoff.csv", csv.as_bytes())?;
    w.chart("tradeoff.svg", || svg::Chart {
        title: "Plug-in tradeoff".into(),
        x_label: "|MD| on sensitive feature".into(),
        y_label: "balanced error on target".into(),
        series: vec![
            svg::Series {
                label: "lambda sweep".into(),
                points: sweep.points.iter().map(|p| (p.md_sym_sensitive.abs(), p.ber_target)).collect(),
            },
            svg::Series {
                label: "Pareto front".into(),
                points: crate::plugin::pareto_front(&sweep.points),
            },
        ],
    })?;
    let degenerate = sweep.points.iter().any(|p| p.di_sensitive.is_none());
    Ok((w.finish(degenerate)?, sweep))
}

/// Text table for one pair of rates.
pub fn cmd_bounds(fnr: f64, fpr: f64) -> Result<String> {
    let report = bounds_report(Rates::new(fnr, fpr)?);
    let mut s = String::new();
    let _ = writeln!(s, "fnr        {fnr}");
    let _ = writeln!(s, "fpr        {fpr}");
    let _ = writeln!(s, "ber        {}", report.ber);
    let _ = writeln!(s, "md         {}", report.md);
    match report.di {
        Some(di) => {
            let _ = writeln!(s, "di         {di}");
        }
        None => {
            let _ = writeln!(
                s,
                "di         undefined (fnr = 1: nothing is predicted positive in the Ybar = 1 group)"
            );
        }
    }
    if let Some(id) = report.identities {
        let _ = writeln!(s, "di  via fpr / (1 - 2 ber + fpr)    {}", id.di_from_ber_fpr);
        let _ = writeln!(s, "di  via (2 ber - fnr) / (1 - fnr)  {}", id.di_from_ber_fnr);
        let _ = writeln!(s, "ber via fnr/2 + (1 - fnr) di/2     {}", id.ber_from_di_fnr);
        match id.ber_from_di_fpr {
            Some(v) => {
                let _ = writeln!(s, "ber via fpr/2 + (1 - fpr/di)/2     {v}");
            }
            None => {
                let _ = writeln!(s, "ber via fpr/2 + (1 - fpr/di)/2     undefined (di = 0)");
            }
        }
    }
    for check in &report.checks {
        let verdict = match check.holds {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "n/a",
        };
        let _ = writeln!(s, "[{verdict:>4}] {}", check.name);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub phi: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { n: 10_000, phi: 0.5 }
    }
}

/// Writes `synth.csv` with columns `x1,x2,y,ybar`.
pub fn cmd_synth(ctx: &RunContext, cfg: &SynthConfig) -> Result<(RunOutput, SampleSet)> {
    let sample = sample_rotated_gaussians(cfg.n, cfg.phi, ctx.seed)?;
    let mut w = Writer::new(ctx, "synth", cfg)?;
    let mut buf = Vec::new();
    data::write_csv_to(&mut buf, &sample)?;
    w.file("synth.csv", &buf)?;
    Ok((w.finish(false)?, sample))
}
