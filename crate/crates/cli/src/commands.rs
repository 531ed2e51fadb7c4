use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use cook_core::engine::TraceFormat;
use cook_core::metrics::{export_chronogram, gnuplot_script};
use cook_core::runtime::{MOCK_DECLARATIONS, MOCK_EXPORTS};
use cook_core::toolchain::{generate_library, loc_report, HookConfig, TemplateSet};
use cook_core::{build_report, run_configuration, Bench, Isol, Report, RunConfig, Strategy};
use serde::Serialize;

use crate::table::Table;
use crate::{CommonArgs, GenHooksArgs, ReportArgs, RunArgs, SweepArgs};

pub const METRICS_FILE: &str = "metrics.json";
pub const SWEEP_FILE: &str = "sweep.json";

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn gen_hooks(args: &GenHooksArgs) -> Result<()> {
    let interface = match &args.interface {
        Some(p) => read(p)?,
        None => MOCK_DECLARATIONS.to_owned(),
    };
    let exports = match &args.exports {
        Some(p) => read(p)?,
        None => MOCK_EXPORTS.to_owned(),
    };
    let config_text = match (&args.config, args.strategy) {
        (Some(p), _) => read(p)?,
        (None, Some(s)) => match s.hook_config() {
            Some(text) => text.to_owned(),
            None => bail!("strategy `{s}` has no hook configuration"),
        },
        (None, None) => unreachable!("clap requires --config or --strategy"),
    };
    let templates = match &args.templates {
        Some(dir) => TemplateSet::load_dir(dir)?,
        None => TemplateSet::shipped(),
    };
    let config = HookConfig::parse(&config_text)?;
    let lib = generate_library(&interface, &exports, &config, &templates)?;
    lib.write(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let loc = loc_report(&config_text, &config, &templates, &lib);
    println!(
        "{} symbols hooked into {}; lines: configuration {}, templates {}, generated {}",
        lib.table.len(),
        args.out.display(),
        loc.configuration,
        loc.templates,
        loc.generated
    );
    Ok(())
}

/// Defaults, then `--config`, then flags, then `--timing`.
fn base_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &common.config {
        cfg = cfg.with_toml(&read(p)?)?;
    }
    macro_rules! set {
        ($($f:ident),+) => { $(if let Some(v) = common.$f { cfg.$f = v; })+ };
    }
    set!(bench, seed, warmup, sample, instances);
    if common.max_inferences.is_some() {
        cfg.max_inferences = common.max_inferences;
    }
    if let Some(p) = &common.timing {
        cfg.timing = cfg.timing.overridden_by(&read(p)?)?;
    }
    Ok(cfg)
}

fn run_one(cfg: &RunConfig, flags: &[String]) -> Result<(cook_core::RunResult, Report)> {
    cfg.validate()?;
    let result = run_configuration(cfg).with_context(|| format!("running {}", cfg.label()))?;
    let report = build_report(&result, flags)?;
    Ok((result, report))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn run(args: &RunArgs, flags: &[String]) -> Result<()> {
    let mut cfg = base_config(&args.common)?;
    if let Some(isol) = args.isol {
        cfg.isol = isol;
    }
    if let Some(strategy) = args.strategy {
        cfg.strategy = strategy;
    }
    let (result, report) = run_one(&cfg, flags)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    fs::write(args.out.join(METRICS_FILE), to_json(&report)?)?;
    let format = TraceFormat::from(args.format);
    let trace_name = format!("trace.{}", format.extension());
    export_chronogram(
        &result.output.trace,
        result.window,
        &args.out.join(&trace_name),
        format,
    )?;
    if format == TraceFormat::Csv {
        fs::write(
            args.out.join("chronogram.gp"),
            gnuplot_script(&trace_name, cfg.app_count()),
        )?;
    }
    print!("{}", summary_table(std::slice::from_ref(&report)));
    Ok(())
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| v.to_string())
}

fn summary_table(reports: &[Report]) -> String {
    let mut t = Table::new([
        "config",
        "seed",
        "makespan",
        "ips",
        "net-med",
        "net-p99.5",
        "net>2",
        "overlap",
        "switches",
        "violations",
    ]);
    for r in reports {
        let net = r.net_summary;
        t.row([
            r.label.clone(),
            r.config.seed.to_string(),
            fmt_opt(r.makespan),
            format!("{:.3}", r.ips),
            fmt_opt(net.map(|n| format!("{:.3}", n.median))),
            fmt_opt(net.map(|n| format!("{:.3}", n.whisker_hi))),
            format!("{:.2}%", r.net_above_2 * 100.0),
            format!("{:.4}", r.overlap_fraction),
            r.context_switches.to_string(),
            (r.order_violations + r.barrier_violations).to_string(),
        ]);
    }
    t.render()
}

fn metrics_path(input: &Path) -> PathBuf {
    if input.is_dir() {
        input.join(METRICS_FILE)
    } else {
        input.to_path_buf()
    }
}

pub fn report(args: &ReportArgs) -> Result<()> {
    let reports = args
        .inputs
        .iter()
        .map(|input| {
            let path = metrics_path(input);
            let text = read(&path)?;
            serde_json::from_str::<Report>(&text)
                .with_context(|| format!("parsing {}", path.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    print!("{}", summary_table(&reports));
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepCell {
    isol: Isol,
    strategy: Strategy,
    /// Mean IPS over the seeds.
    ips: f64,
    reports: Vec<Report>,
}

#[derive(Debug, Serialize)]
struct SweepOutput {
    flags: Vec<String>,
    bench: Bench,
    seeds: Vec<u64>,
    cells: Vec<SweepCell>,
}

/// Runs `jobs` cells at a time; results keep the order of `cells`.
fn run_cells(cells: &[RunConfig], jobs: usize, flags: &[String]) -> Result<Vec<Report>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<Report>>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(cells.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cfg) = cells.get(i) else { break };
                let r = run_one(cfg, flags).map(|(_, report)| report);
                slots.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

pub fn sweep(args: &SweepArgs, flags: &[String]) -> Result<()> {
    let mut base = base_config(&args.common)?;
    if args.common.bench.is_none() {
        base.bench = Bench::Dna;
    }
    let seeds: Vec<u64> = (0..u64::from(args.seeds)).map(|i| base.seed + i).collect();
    let mut configs = Vec::new();
    for &isol in Isol::ALL {
        for &strategy in &args.strategies {
            for &seed in &seeds {
                configs.push(RunConfig {
                    isol,
                    strategy,
                    seed,
                    ..base.clone()
                });
            }
        }
    }
    let mut reports = run_cells(&configs, args.jobs as usize, flags)?.into_iter();
    let mut cells = Vec::new();
    for &isol in Isol::ALL {
        for &strategy in &args.strategies {
            let reports: Vec<Report> = reports.by_ref().take(seeds.len()).collect();
            let ips = reports.iter().map(|r| r.ips).sum::<f64>() / reports.len() as f64;
            cells.push(SweepCell {
                isol,
                strategy,
                ips,
                reports,
            });
        }
    }
    let mut t = Table::new(
        std::iter::once(String::new()).chain(args.strategies.iter().map(|s| s.to_string())),
    );
    for &isol in Isol::ALL {
        t.row(
            std::iter::once(isol.to_string()).chain(
                cells
                    .iter()
                    .filter(|c| c.isol == isol)
                    .map(|c| format!("{:.2}", c.ips)),
            ),
        );
    }
    println!(
        "IPS of {} (mean over seeds {}..={})",
        base.bench,
        seeds[0],
        seeds[seeds.len() - 1]
    );
    print!("{}", t.render());
    if let Some(out) = &args.out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let output = SweepOutput {
            flags: flags.to_vec(),
            bench: base.bench,
            seeds,
            cells,
        };
        fs::write(out.join(SWEEP_FILE), to_json(&output)?)?;
    }
    Ok(())
}
