//! Command-line interface. The `orthant-walks` binary is a thin wrapper
//! around [`main_with_args`].

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde_json::{json, Value};

use crate::boltzmann::GENERATOR_NAME;
use crate::error::{Error, Result};
use crate::hull::convex_hull_3d;
use crate::io::{
    export_string, hull_obj_string, points_obj_string, positions_at, read_records, write_records,
    write_summary, ExportFormat, ModelFile, WalkRecord,
};
use crate::pipeline::{
    count_orthant_walks, endpoint_chi_square, endpoint_rmse, endpoint_tally, frequencies,
    naive_sample_parallel, sample_orthant_walks, Model, ModelOptions, SampleReport, SampleRequest,
    DEFAULT_BOLTZMANN_ATTEMPTS, DEFAULT_NAIVE_ATTEMPTS,
};
use crate::stepset::WeightedStepSet3;

#[derive(Parser, Debug)]
#[command(
    name = "orthant-walks",
    version,
    about = "Uniform random 3D lattice walks in the first orthant"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Set-up phase report: drift, half-space, 1D model, grammar, growth.
    Analyze(AnalyzeArgs),
    /// Orthant walks from the Boltzmann pipeline, as walk records.
    Sample(SampleArgs),
    /// Orthant walks by naive rejection of i.i.d. steps.
    Naive(NaiveArgs),
    /// Compares sampled endpoints at one length with exact counts.
    Verify(VerifyArgs),
    /// Attempts per accepted walk, naive versus Boltzmann.
    Bench(BenchArgs),
    /// Converts walk records to CSV, PLY or OBJ.
    Export(ExportArgs),
    /// Convex hull of all walks' positions at one step, as OBJ.
    Hull(HullArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model file (JSON).
    pub model: PathBuf,
    /// Largest denominator tried when rationalizing the projection vector.
    #[arg(long)]
    pub max_den: Option<u32>,
    /// Evaluate generating functions at this point instead of near the singularity.
    #[arg(long, hide = true)]
    pub x0: Option<f64>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Length scale used to place the evaluation point when the series
    /// diverges at the singularity.
    #[arg(long, default_value_t = 1000)]
    pub size_hint: usize,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub min_len: usize,
    #[arg(long)]
    pub max_len: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Free-draw budget.
    #[arg(long, default_value_t = DEFAULT_BOLTZMANN_ATTEMPTS)]
    pub max_attempts: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1, hide = true)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct NaiveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub len: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Budget of started walks.
    #[arg(long, default_value_t = DEFAULT_NAIVE_ATTEMPTS)]
    pub max_attempts: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1, hide = true)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub length: usize,
    /// One or more sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub samples: Vec<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_BOLTZMANN_ATTEMPTS * 100)]
    pub max_attempts: u64,
    #[arg(long, default_value_t = 1, hide = true)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub target_len: usize,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_NAIVE_ATTEMPTS)]
    pub naive_max_attempts: u64,
    #[arg(long, default_value_t = DEFAULT_BOLTZMANN_ATTEMPTS)]
    pub boltzmann_max_attempts: u64,
    #[arg(long, default_value_t = 1, hide = true)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// Walk-record file.
    pub records: PathBuf,
    #[arg(long)]
    pub format: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct HullArgs {
    pub records: PathBuf,
    #[arg(long)]
    pub step: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Errors are reported on stderr as a JSON document.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let doc = json!({ "error": e.code(), "message": e.to_string() });
            eprintln!("{doc}");
            e.exit_code()
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::Naive(a) => cmd_naive(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Export(a) => cmd_export(&a),
        Command::Hull(a) => cmd_hull(&a),
    }
}

struct Loaded {
    file: ModelFile,
    stepset: WeightedStepSet3,
}

fn load(args: &ModelArgs) -> Result<Loaded> {
    let file = ModelFile::load(&args.model)?;
    let stepset = file.stepset()?;
    Ok(Loaded { file, stepset })
}

fn build(args: &ModelArgs, loaded: &Loaded, size_hint: usize) -> Result<Model> {
    let opts = ModelOptions {
        max_den: args
            .max_den
            .or(loaded.file.max_den)
            .unwrap_or(ModelOptions::default().max_den),
        size_hint: size_hint.max(1),
        eval_point: args.x0,
        ..ModelOptions::default()
    };
    Model::build(loaded.stepset.clone(), &opts)
}

fn resolve_seed(flag: Option<u64>, file: &ModelFile) -> u64 {
    flag.or(file.seed).unwrap_or_else(|| {
        let s: u64 = rand::rng().random();
        eprintln!("seed: {s}");
        s
    })
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// The full set-up report for a model.
pub fn analysis_document(m: &Model) -> Value {
    let names: Vec<&str> = m
        .grammar
        .nonterminals()
        .iter()
        .map(|n| n.name.as_str())
        .collect();
    let values: serde_json::Map<String, Value> = names
        .iter()
        .zip(&m.gf.values)
        .map(|(n, v)| (n.to_string(), gf_value(*v)))
        .collect();
    let yield_base = m.minimizer.s_min / m.stepset.total_weight() as f64;
    json!({
        "model": m.stepset.digest(),
        "steps": ModelFile::from_stepset(&m.stepset).steps,
        "total_weight": m.stepset.total_weight(),
        "drift": m.drift,
        "minimizer": m.minimizer,
        "s_min": m.minimizer.s_min,
        "projection_vector": {
            "components": m.vector.components(),
            "branch": m.vector.branch(),
            "reference_axis": m.vector.reference_axis(),
        },
        "integer_projection": m.projection,
        "stepset_1d": m.step1d.atoms(),
        "grammar": {
            "nonterminals": names.len(),
            "productions": m.grammar.production_count(),
            "names": names,
        },
        "tau": m.growth.tau,
        "a_tau": m.growth.a_tau,
        "rho": m.growth.rho,
        "generating_functions": {
            "x0": m.gf.x0,
            "residual": m.gf.residual,
            "kleene_iterations": m.gf.kleene_iterations,
            "newton_iterations": m.gf.newton_iterations,
            "fallback_evaluations": m.gf.fallback_evaluations,
            "values": values,
        },
        "naive_yield": {
            "base": yield_base,
            "log10_per_step": yield_base.log10(),
        },
    })
}

fn gf_value(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    let loaded = load(&a.model)?;
    let m = build(&a.model, &loaded, a.size_hint)?;
    print_json(&analysis_document(&m))
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

/// Writes records and a summary line, then reports exhaustion if it happened.
fn emit_walks(
    out: &Option<PathBuf>,
    digest: &str,
    seed: u64,
    engine: &str,
    result: Result<SampleReport>,
) -> Result<()> {
    let (report, exhausted) = match result {
        Ok(r) => (r, false),
        Err(Error::AttemptsExhausted(r)) => (*r, true),
        Err(e) => return Err(e),
    };
    let mut w = open_out(out)?;
    let records: Vec<WalkRecord> = report
        .walks
        .iter()
        .map(|walk| WalkRecord::new(digest, seed, walk))
        .collect();
    write_records(&mut w, &records)?;
    write_summary(
        &mut w,
        &json!({
            "engine": engine,
            "model": digest,
            "seed": seed,
            "generator": GENERATOR_NAME,
            "counters": report.counters,
            "status": if exhausted { "attempts-exhausted" } else { "complete" },
        }),
    )?;
    w.flush()?;
    eprintln!(
        "{engine}: {} accepted from {} attempts in {:.3} s",
        report.counters.accepted,
        report.counters.free_draws,
        report.wall_time.as_secs_f64()
    );
    if exhausted {
        Err(Error::AttemptsExhausted(Box::new(report)))
    } else {
        Ok(())
    }
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let loaded = load(&a.model)?;
    let seed = resolve_seed(a.seed, &loaded.file);
    let m = build(&a.model, &loaded, a.max_len)?;
    let req = SampleRequest {
        n_min: a.min_len,
        n_max: a.max_len,
        count: a.count,
        max_attempts: a.max_attempts,
        seed,
        workers: a.workers,
    };
    let result = sample_orthant_walks(&m, &req);
    emit_walks(&a.out, &m.stepset.digest(), seed, "boltzmann", result)
}

fn cmd_naive(a: &NaiveArgs) -> Result<()> {
    let loaded = load(&a.model)?;
    let seed = resolve_seed(a.seed, &loaded.file);
    let result = naive_sample_parallel(
        &loaded.stepset,
        a.len,
        a.count,
        a.max_attempts,
        seed,
        a.workers,
    );
    emit_walks(&a.out, &loaded.stepset.digest(), seed, "naive", result)
}

fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let loaded = load(&a.model)?;
    let seed = resolve_seed(a.seed, &loaded.file);
    let m = build(&a.model, &loaded, a.length)?;
    let exact = count_orthant_walks(&m.stepset, a.length)?;
    let mut runs = Vec::new();
    for (i, &samples) in a.samples.iter().enumerate() {
        let req = SampleRequest {
            n_min: a.length,
            n_max: a.length,
            count: samples,
            max_attempts: a.max_attempts,
            seed: crate::boltzmann::worker_seed(seed, 1000 + i as u64),
            workers: a.workers,
        };
        let report = sample_orthant_walks(&m, &req)?;
        let tally = endpoint_tally(&report.walks);
        let rmse = endpoint_rmse(&frequencies(&tally), &exact, a.length)?;
        let chi = endpoint_chi_square(&tally, &exact, a.length)?;
        runs.push(json!({
            "samples": samples,
            "rmse": rmse,
            "chi_square": chi,
            "counters": report.counters,
        }));
    }
    print_json(&json!({
        "model": m.stepset.digest(),
        "seed": seed,
        "length": a.length,
        "endpoints": exact.level(a.length).len(),
        "exact_total": exact.total(a.length).to_string(),
        "runs": runs,
    }))
}

/// Boltzmann window used by `bench`: target length ±5%.
pub fn bench_window(target: usize) -> (usize, usize) {
    let lo = (0.95 * target as f64).ceil() as usize;
    let hi = (1.05 * target as f64).floor() as usize;
    (lo.min(target), hi.max(target))
}

fn bench_row(
    engine: &str,
    window: (usize, usize),
    cap: u64,
    r: Result<SampleReport>,
) -> Result<Value> {
    let (report, status) = match r {
        Ok(r) => (r, "complete"),
        Err(Error::AttemptsExhausted(r)) => (*r, "attempts-exhausted"),
        Err(e) => return Err(e),
    };
    let c = report.counters;
    let per = if c.accepted > 0 {
        json!(c.free_draws as f64 / c.accepted as f64)
    } else {
        Value::Null
    };
    Ok(json!({
        "engine": engine,
        "min_len": window.0,
        "max_len": window.1,
        "max_attempts": cap,
        "attempts": c.free_draws,
        "accepted": c.accepted,
        "attempts_per_accepted": per,
        "wall_time_s": report.wall_time.as_secs_f64(),
        "status": status,
    }))
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let loaded = load(&a.model)?;
    let seed = resolve_seed(a.seed, &loaded.file);
    let window = bench_window(a.target_len);
    let m = build(&a.model, &loaded, window.1)?;
    let naive = naive_sample_parallel(
        &loaded.stepset,
        a.target_len,
        a.count,
        a.naive_max_attempts,
        seed,
        a.workers,
    );
    let boltz = sample_orthant_walks(
        &m,
        &SampleRequest {
            n_min: window.0,
            n_max: window.1,
            count: a.count,
            max_attempts: a.boltzmann_max_attempts,
            seed,
            workers: a.workers,
        },
    );
    let rows = vec![
        bench_row(
            "naive",
            (a.target_len, a.target_len),
            a.naive_max_attempts,
            naive,
        )?,
        bench_row("boltzmann", window, a.boltzmann_max_attempts, boltz)?,
    ];
    let ratio = match (
        rows[0]["attempts_per_accepted"].as_f64(),
        rows[1]["attempts_per_accepted"].as_f64(),
    ) {
        (Some(n), Some(b)) => json!(n / b),
        _ => Value::Null,
    };
    print_json(&json!({
        "model": m.stepset.digest(),
        "seed": seed,
        "target_len": a.target_len,
        "count": a.count,
        "rows": rows,
        "naive_over_boltzmann": ratio,
    }))
}

fn load_walks(path: &Path) -> Result<Vec<crate::pipeline::Walk3D>> {
    read_records(BufReader::new(File::open(path)?))?
        .iter()
        .map(WalkRecord::walk)
        .collect()
}

fn cmd_export(a: &ExportArgs) -> Result<()> {
    let format: ExportFormat = a.format.parse()?;
    let walks = load_walks(&a.records)?;
    std::fs::write(&a.out, export_string(format, &walks))?;
    Ok(())
}

fn cmd_hull(a: &HullArgs) -> Result<()> {
    let walks = load_walks(&a.records)?;
    let points = positions_at(&walks, a.step);
    match convex_hull_3d(&points) {
        Ok(mesh) => {
            std::fs::write(&a.out, hull_obj_string(&mesh))?;
            print_json(&json!({
                "step": a.step,
                "points": points.len(),
                "vertices": mesh.vertices.len(),
                "faces": mesh.faces.len(),
                "degenerate": false,
            }))
        }
        Err(Error::DegenerateHull) => {
            std::fs::write(&a.out, points_obj_string(&points))?;
            print_json(&json!({
                "step": a.step,
                "points": points.len(),
                "degenerate": true,
            }))
        }
        Err(e) => Err(e),
    }
}
