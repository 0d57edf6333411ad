//! `phm`: command-line front end for the condition-monitoring toolkit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use phm_core::features::{CoefficientBand, FeatureSeries};
use phm_core::fitness::fitness_table;
use phm_core::io::{
    confusion_svg, line_plot_svg, load_cmapss_text, load_model, read_csv_table, read_signal_csv, read_text,
    roc_svg, save_model, save_tensor, scatter_svg, write_cmapss_text, write_csv_table, write_file,
    write_fitness_csv, write_signal_csv, write_train_report, CsvTable, LineSeries, ScatterPoint,
};
use phm_core::nn::{fit, LayerSpec, Network};
use phm_core::pipeline::{
    default_loss, evaluate_classifier, evaluate_regression, load_split, predict_rul, run_features,
    scaleogram_health_tensors, signal_images, standardize_layer, ArchConfig, DatasetManifest, RulSettings,
    SampleEntry, SeriesTransform, Split, SplitFractions, TaskKind, TransformOrder, IMAGE_SIDE, SCALEOGRAM_SIDE,
};
use phm_core::rng::derive_seed;
use phm_core::signals::Signal;
use phm_core::spectral::Defect;
use phm_core::synth::{
    synth_bearing_channels, synth_fault_signal, synth_turbofan_fleet, BearingSimConfig, FaultSignalConfig,
    FleetSimConfig,
};

#[derive(Parser, Debug)]
#[command(name = "phm", version, about = "Vibration diagnostics and remaining-useful-life toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic bearing runs, turbofan fleets or fault recordings.
    GenSynth(GenSynthArgs),
    /// Cut labelled signals into 64x64 image tensors and write a manifest.
    ImgDataset(ImgDatasetArgs),
    /// Build healthy/faulty scaleogram tensors from bearing runs.
    ScaleogramDataset(ScaleogramArgs),
    /// Per-snapshot features of one bearing run.
    Features(FeaturesArgs),
    /// Monotonicity and trendability of feature tables from several runs.
    Fitness(FitnessArgs),
    /// Train a network described by an architecture file on a manifest.
    Train(TrainArgs),
    /// Evaluate a trained model on one split of a manifest.
    Eval(EvalArgs),
    /// Predict the RUL of one unit at every cycle.
    PredictRul(PredictRulArgs),
    /// Line plot of CSV columns.
    Plot(PlotArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SynthKind {
    /// Run-to-failure bearings, two channels per snapshot.
    Bearing,
    /// Multi-sensor run-to-failure fleet in C-MAPSS text format.
    Turbofan,
    /// One constant-severity recording.
    Signal,
    /// Healthy plus three defects at three severities, one recording each.
    Diagnostic,
}

#[derive(clap::Args, Debug)]
struct GenSynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Bearings or fleet units to generate.
    #[arg(long)]
    count: Option<usize>,
    /// Snapshots per bearing.
    #[arg(long, default_value_t = 200)]
    snapshots: usize,
    #[arg(long, default_value_t = 2560)]
    snapshot_len: usize,
    /// Defect name (inner, outer, rolling, cage) or "none".
    #[arg(long, default_value = "outer")]
    fault: String,
    #[arg(long, default_value_t = 1.0)]
    severity: f64,
    /// Samples per recording (signal and diagnostic kinds).
    #[arg(long, default_value_t = 4096 * 120)]
    len: usize,
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(clap::Args, Debug)]
struct ImgDatasetArgs {
    /// `LABEL=PATH` pairs of signal CSV files; repeat for every recording.
    #[arg(long = "input", required = true)]
    inputs: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = IMAGE_SIDE)]
    side: usize,
}

#[derive(clap::Args, Debug)]
struct ScaleogramArgs {
    /// Bearing run directories, or a directory holding `bearing_*` runs.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 80)]
    k: usize,
    #[arg(long, default_value_t = SCALEOGRAM_SIDE)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Channel {
    H,
    V,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Band {
    Approximation,
    Detail,
}

#[derive(clap::Args, Debug)]
struct FeaturesArgs {
    /// Bearing run directory of snapshot CSVs.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "h")]
    channel: Channel,
    #[arg(long, value_enum, default_value = "approximation")]
    band: Band,
    /// Savitzky-Golay window length; 0 disables smoothing.
    #[arg(long, default_value_t = 0)]
    smooth: usize,
    #[arg(long, default_value_t = 3)]
    poly_order: usize,
    #[arg(long)]
    cumulative: bool,
    /// Accumulate before smoothing instead of after.
    #[arg(long)]
    cumulate_first: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args, Debug)]
struct FitnessArgs {
    /// Feature tables written by `features`, one per run.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    arch: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(clap::Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Directory for metrics.csv and the charts.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "test")]
    split: String,
}

#[derive(clap::Args, Debug)]
struct PredictRulArgs {
    #[arg(long)]
    model: PathBuf,
    /// C-MAPSS-style text file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    unit: u32,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 125)]
    knee: u32,
    #[arg(long, default_value_t = 3)]
    degree: usize,
}

#[derive(clap::Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    /// Column used as abscissa; defaults to the first column.
    #[arg(long)]
    x: Option<String>,
    /// Columns to draw; defaults to every other column.
    #[arg(long)]
    y: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "")]
    title: String,
}

fn parse_fault(name: &str) -> Result<Option<Defect>> {
    if matches!(name, "none" | "healthy") {
        return Ok(None);
    }
    Defect::parse(name).map(Some).ok_or_else(|| anyhow!("unknown fault {name:?}"))
}

fn gen_synth(a: &GenSynthArgs) -> Result<()> {
    match a.kind {
        SynthKind::Bearing => {
            let fault = parse_fault(&a.fault)?;
            for b in 0..a.count.unwrap_or(3) {
                let cfg = BearingSimConfig {
                    fault,
                    snapshots: a.snapshots,
                    snapshot_len: a.snapshot_len,
                    noise: a.noise.unwrap_or(BearingSimConfig::default().noise),
                    seed: derive_seed(a.seed, b as u64),
                    ..BearingSimConfig::default()
                };
                let (h, v) = synth_bearing_channels(&cfg)?;
                let dir = a.out.join(format!("bearing_{:02}", b + 1));
                for (i, (sh, sv)) in h.iter().zip(&v).enumerate() {
                    write_signal_csv(&dir.join(format!("snap_{i:05}_h.csv")), sh)?;
                    write_signal_csv(&dir.join(format!("snap_{i:05}_v.csv")), sv)?;
                }
            }
        }
        SynthKind::Turbofan => {
            let units = synth_turbofan_fleet(&FleetSimConfig {
                units: a.count.unwrap_or(100),
                noise: a.noise.unwrap_or(FleetSimConfig::default().noise),
                seed: a.seed,
                ..FleetSimConfig::default()
            })?;
            write_cmapss_text(&a.out.join("fleet.txt"), &units)?;
            let manifest = DatasetManifest {
                task: TaskKind::RulRegression,
                seed: a.seed,
                classes: Vec::new(),
                split: SplitFractions::default(),
                rul: Some(RulSettings::default()),
                samples: vec![SampleEntry {
                    path: "fleet.txt".into(),
                    label: None,
                }],
            };
            manifest.save(&a.out.join("manifest.toml"))?;
        }
        SynthKind::Signal => {
            let sig = synth_fault_signal(&FaultSignalConfig {
                fault: parse_fault(&a.fault)?,
                severity: a.severity,
                len: a.len,
                noise: a.noise.unwrap_or(FaultSignalConfig::default().noise),
                seed: a.seed,
                ..FaultSignalConfig::default()
            })?;
            write_signal_csv(&a.out.join("signal.csv"), &sig)?;
        }
        SynthKind::Diagnostic => {
            for (i, (name, fault, severity)) in diagnostic_classes().into_iter().enumerate() {
                let sig = synth_fault_signal(&FaultSignalConfig {
                    fault,
                    severity,
                    len: a.len,
                    noise: a.noise.unwrap_or(FaultSignalConfig::default().noise),
                    seed: derive_seed(a.seed, i as u64),
                    ..FaultSignalConfig::default()
                })?;
                write_signal_csv(&a.out.join(format!("{name}.csv")), &sig)?;
            }
        }
    }
    Ok(())
}

/// Healthy plus inner, outer and rolling-element defects at three severities.
fn diagnostic_classes() -> Vec<(String, Option<Defect>, f64)> {
    let mut out = vec![("healthy".to_string(), None, 0.0)];
    for d in [Defect::InnerRing, Defect::OuterRing, Defect::RollingElement] {
        for (i, s) in [0.5, 1.0, 1.5].into_iter().enumerate() {
            out.push((format!("{}_{}", d.name(), i + 1), Some(d), s));
        }
    }
    out
}

fn img_dataset(a: &ImgDatasetArgs) -> Result<()> {
    let mut classes: Vec<String> = Vec::new();
    let mut samples = Vec::new();
    for (i, spec) in a.inputs.iter().enumerate() {
        let (label, path) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("--input expects LABEL=PATH, got {spec:?}"))?;
        let class = match classes.iter().position(|c| c == label) {
            Some(c) => c,
            None => {
                classes.push(label.to_string());
                classes.len() - 1
            }
        };
        let signal = read_signal_csv(Path::new(path))?;
        let images = signal_images(signal.samples(), a.side).with_context(|| format!("imaging {path}"))?;
        let file = format!("{label}_{i:03}.ptk");
        save_tensor(&a.out.join(&file), &images)?;
        samples.push(SampleEntry {
            path: file,
            label: Some(class),
        });
    }
    if classes.len() < 2 {
        bail!("img-dataset needs at least two labels");
    }
    DatasetManifest {
        task: TaskKind::FaultImageClass,
        seed: a.seed,
        classes,
        split: SplitFractions::default(),
        rul: None,
        samples,
    }
    .save(&a.out.join("manifest.toml"))?;
    Ok(())
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    v.sort();
    Ok(v)
}

fn load_channel(dir: &Path, channel: Channel) -> Result<Vec<Signal>> {
    let suffix = match channel {
        Channel::H => "_h.csv",
        Channel::V => "_v.csv",
    };
    let files: Vec<PathBuf> = sorted_entries(dir)?
        .into_iter()
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(suffix)))
        .collect();
    if files.is_empty() {
        bail!("no *{suffix} snapshots in {}", dir.display());
    }
    files.iter().map(|p| Ok(read_signal_csv(p)?)).collect()
}

fn bearing_dirs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for input in inputs {
        let nested: Vec<PathBuf> = sorted_entries(input)?
            .into_iter()
            .filter(|p| p.is_dir() && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("bearing_")))
            .collect();
        if nested.is_empty() {
            dirs.push(input.clone());
        } else {
            dirs.extend(nested);
        }
    }
    Ok(dirs)
}

fn scaleogram_dataset(a: &ScaleogramArgs) -> Result<()> {
    let mut samples = Vec::new();
    for (i, dir) in bearing_dirs(&a.inputs)?.iter().enumerate() {
        let h = load_channel(dir, Channel::H)?;
        let v = load_channel(dir, Channel::V)?;
        let (healthy, faulty) = scaleogram_health_tensors(&[&h, &v], a.k, a.size)
            .with_context(|| format!("scaleograms of {}", dir.display()))?;
        for (label, tensor) in [(0, healthy), (1, faulty)] {
            let file = format!("run_{:02}_{}.ptk", i + 1, ["healthy", "faulty"][label]);
            save_tensor(&a.out.join(&file), &tensor)?;
            samples.push(SampleEntry {
                path: file,
                label: Some(label),
            });
        }
    }
    DatasetManifest {
        task: TaskKind::ScaleogramHealth,
        seed: a.seed,
        classes: vec!["healthy".into(), "faulty".into()],
        split: SplitFractions::default(),
        rul: None,
        samples,
    }
    .save(&a.out.join("manifest.toml"))?;
    Ok(())
}

fn features(a: &FeaturesArgs) -> Result<()> {
    let snapshots = load_channel(&a.input, a.channel)?;
    let band = match a.band {
        Band::Approximation => CoefficientBand::Approximation,
        Band::Detail => CoefficientBand::Detail,
    };
    let transform = SeriesTransform {
        smooth: (a.smooth > 0).then_some((a.smooth, a.poly_order)),
        cumulative: a.cumulative,
        order: if a.cumulate_first {
            TransformOrder::CumulateThenSmooth
        } else {
            TransformOrder::SmoothThenCumulate
        },
    };
    let series = run_features(&snapshots, band)?
        .iter()
        .map(|s| transform.apply(s))
        .collect::<phm_core::Result<Vec<FeatureSeries>>>()?;
    let mut header = vec!["snapshot_index".to_string()];
    header.extend(series.iter().map(|s| s.feature_name.clone()));
    let rows = (0..snapshots.len())
        .map(|i| std::iter::once(i as f64).chain(series.iter().map(|s| s.values[i])).collect())
        .collect();
    write_csv_table(&a.out, &CsvTable { header, rows })?;
    Ok(())
}

fn fitness(a: &FitnessArgs) -> Result<()> {
    let mut table: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for path in &a.inputs {
        let t = read_csv_table(path)?;
        for name in t.header.iter().filter(|h| *h != "snapshot_index") {
            let col = t.column(name).expect("header column");
            table.entry(name.clone()).or_default().push(col);
        }
    }
    if table.is_empty() {
        bail!("no feature columns found");
    }
    let scores = fitness_table(&table)?;
    write_fitness_csv(&a.out, &scores)?;
    if let Some(svg) = &a.svg {
        let points: Vec<ScatterPoint> = scores
            .iter()
            .map(|s| ScatterPoint {
                x: s.monotonicity,
                y: s.trendability,
                group: 0,
                label: Some(s.feature_name.clone()),
            })
            .collect();
        let chart = scatter_svg("Feature fitness", "monotonicity", "trendability", &points, &["features"]);
        write_file(svg, chart.as_bytes())?;
    }
    Ok(())
}

fn train(a: &TrainArgs) -> Result<()> {
    let (manifest, base) = DatasetManifest::load(&a.manifest)?;
    let mut arch = ArchConfig::from_toml(&read_text(&a.arch)?)?;
    let loss = arch.loss.unwrap_or_else(|| default_loss(&manifest));
    let train_split = load_split(&manifest, &base, Split::Train, loss)?;
    let val = if manifest.split.validation > 0.0 {
        match load_split(&manifest, &base, Split::Validation, loss) {
            Ok(v) => Some(v.dataset),
            Err(phm_core::Error::TooSmall(msg)) => {
                eprintln!("warning: {msg}; training without validation");
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let mut layers: Vec<LayerSpec> = Vec::new();
    if manifest.task == TaskKind::RulRegression {
        layers.push(standardize_layer(&train_split.units, &manifest.rul_settings())?);
    }
    layers.extend(arch.layers.iter().cloned());
    arch.train.seed = a.seed;
    if let Some(e) = a.epochs {
        arch.train.epochs = e;
    }
    let input_shape = train_split.dataset.inputs.shape()[1..].to_vec();
    let mut net = Network::<f32>::build(&input_shape, &layers, loss, a.seed)?;
    let report = fit(&mut net, &train_split.dataset, val.as_ref(), &arch.train)?;
    save_model(&a.out, &net)?;
    if let Some(r) = &a.report {
        write_train_report(r, &report)?;
    }
    if let Some(last) = report.last() {
        eprintln!(
            "epoch {}: train loss {:.5}, {} {:.5}",
            last.epoch,
            last.train_loss,
            report.metric.name(),
            last.train_metric
        );
    }
    Ok(())
}

fn write_metrics(path: &Path, rows: &[(String, f64)]) -> Result<()> {
    let mut out = String::from("metric,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{v}\n"));
    }
    write_file(path, out.as_bytes())?;
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let split = Split::parse(&a.split).ok_or_else(|| anyhow!("unknown split {:?}", a.split))?;
    let (manifest, base) = DatasetManifest::load(&a.manifest)?;
    let net = load_model(&a.model)?;
    let data = load_split(&manifest, &base, split, net.loss())?;
    if manifest.task == TaskKind::RulRegression {
        let r = evaluate_regression(&net, &data.dataset.inputs, &data.dataset.targets)?;
        write_metrics(&a.out.join("metrics.csv"), &r.rows())?;
        return Ok(());
    }
    let r = evaluate_classifier(&net, &data.dataset.inputs, &data.labels, manifest.classes.len())?;
    write_metrics(&a.out.join("metrics.csv"), &r.rows(&manifest.classes))?;
    write_file(
        &a.out.join("confusion.svg"),
        confusion_svg(&r.confusion, &manifest.classes).as_bytes(),
    )?;
    if let Some((curve, auc)) = &r.roc {
        write_file(&a.out.join("roc.svg"), roc_svg(curve, *auc).as_bytes())?;
    }
    Ok(())
}

fn predict_rul_cmd(a: &PredictRulArgs) -> Result<()> {
    let net = load_model(&a.model)?;
    let units = load_cmapss_text(&a.input)?;
    let unit = units
        .iter()
        .find(|u| u.unit_id == a.unit)
        .ok_or_else(|| anyhow!("unit {} not found in {}", a.unit, a.input.display()))?;
    let window = *net.input_shape().first().ok_or_else(|| anyhow!("model has no input window"))?;
    let settings = RulSettings {
        window,
        knee: a.knee,
        ..RulSettings::default()
    };
    let trace = predict_rul(&net, unit, &settings, a.degree)?;
    let rows = (0..trace.cycles.len())
        .map(|i| {
            vec![
                f64::from(trace.cycles[i]),
                trace.predicted[i],
                trace.smoothed[i],
                trace.actual[i],
            ]
        })
        .collect();
    write_csv_table(
        &a.out,
        &CsvTable {
            header: ["cycle", "predicted_rul", "smoothed_rul", "actual_rul"].map(String::from).to_vec(),
            rows,
        },
    )?;
    Ok(())
}

fn plot(a: &PlotArgs) -> Result<()> {
    let t = read_csv_table(&a.input)?;
    let x_name = a.x.clone().or_else(|| t.header.first().cloned()).ok_or_else(|| anyhow!("empty CSV"))?;
    let xs = t.column(&x_name).ok_or_else(|| anyhow!("no column {x_name:?}"))?;
    let names: Vec<String> = if a.y.is_empty() {
        t.header.iter().filter(|h| **h != x_name).cloned().collect()
    } else {
        a.y.clone()
    };
    let series = names
        .iter()
        .map(|n| {
            let ys = t.column(n).ok_or_else(|| anyhow!("no column {n:?}"))?;
            Ok(LineSeries {
                name: n,
                points: xs.iter().copied().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite()).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ylabel = if names.len() == 1 { names[0].as_str() } else { "value" };
    write_file(&a.out, line_plot_svg(&a.title, &x_name, ylabel, &series).as_bytes())?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::GenSynth(a) => gen_synth(a),
        Command::ImgDataset(a) => img_dataset(a),
        Command::ScaleogramDataset(a) => scaleogram_dataset(a),
        Command::Features(a) => features(a),
        Command::Fitness(a) => fitness(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::PredictRul(a) => predict_rul_cmd(a),
        Command::Plot(a) => plot(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
