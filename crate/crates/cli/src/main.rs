//! `evsite` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 input data
//! error, 1 internal error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use evsite_core::dataset::{export_dataset, ExportOptions, Scene, Split, TILE_SIZE, TRAIN_FRACTION};
use evsite_core::image::ImageBuf;
use evsite_core::metrics::{default_ssim_mode, psnr, ssim, SsimMode};
use evsite_core::pipeline::{corridor_distance, run, RunConfig};
use evsite_core::raster::{read_ascii_grid, render_grid, write_ascii_grid, CategoricalGrid, Palette};
use evsite_core::scenario::{generate_to, ScenarioConfig};
use evsite_core::suitability::{classify_regions, RegionThresholds, MILE_M};
use evsite_core::transforms::{AttributeTable, ZoneSet};
use evsite_core::vector::FeatureSet;
use evsite_core::{Error, ErrorClass};

#[derive(Parser)]
#[command(name = "evsite", version, about = "EV charging site suitability engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full suitability pipeline from a JSON run config.
    Run { config: PathBuf },
    /// Compare two PPM images; prints `{"psnr": ..., "ssim": ...}`.
    Metrics {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = SsimArg::Auto)]
        ssim: SsimArg,
    },
    /// Cut aligned input/target PPM scenes into side-by-side tile pairs.
    ExportTiles(ExportArgs),
    /// Write a synthetic scenario bundle and print its content hash.
    GenScenario {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON scenario config; `--seed` overrides its seed.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render an ESRI ASCII grid to PPM.
    Render {
        #[arg(long)]
        grid: PathBuf,
        /// `levels`, `regions` or a JSON palette file.
        #[arg(long)]
        palette: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify zones into TNC, corridor and rural regions.
    ClassifyRegions {
        #[arg(long)]
        zones: PathBuf,
        #[arg(long)]
        attributes: PathBuf,
        #[arg(long)]
        corridor: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200.0)]
        rural_housing_max: f64,
        #[arg(long, default_value_t = MILE_M)]
        corridor_distance_m: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SsimArg {
    /// Windowed when both sides are at least 11 pixels, global otherwise.
    Auto,
    Global,
    Windowed,
}

#[derive(Args)]
struct ExportArgs {
    /// Input scene; repeat together with `--target` for several scenes.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long, required = true)]
    target: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = TILE_SIZE)]
    tile_size: usize,
    #[arg(long, default_value_t = TRAIN_FRACTION)]
    train_fraction: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>().map(Error::class) {
        Some(ErrorClass::Config) => 2,
        Some(ErrorClass::Data) => 3,
        Some(ErrorClass::Internal) | None => 1,
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run { config } => cmd_run(&config),
        Command::Metrics { a, b, ssim } => cmd_metrics(&a, &b, ssim),
        Command::ExportTiles(args) => cmd_export(&args),
        Command::GenScenario { out, seed, config } => cmd_gen(&out, seed, config.as_deref()),
        Command::Render { grid, palette, out } => cmd_render(&grid, &palette, &out),
        Command::ClassifyRegions {
            zones,
            attributes,
            corridor,
            out,
            rural_housing_max,
            corridor_distance_m,
        } => {
            let thresholds = RegionThresholds {
                rural_housing_max,
                corridor_distance_m,
            };
            cmd_classify(&zones, &attributes, &corridor, &out, &thresholds)
        }
    }
}

fn cmd_run(config: &Path) -> anyhow::Result<()> {
    let cfg = RunConfig::read(config)?;
    let report = run(&cfg)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).context("serializing run report")?
    );
    Ok(())
}

fn cmd_metrics(a: &Path, b: &Path, mode: SsimArg) -> anyhow::Result<()> {
    let a = ImageBuf::read_ppm(a)?;
    let b = ImageBuf::read_ppm(b)?;
    let mode = match mode {
        SsimArg::Global => SsimMode::Global,
        SsimArg::Windowed => SsimMode::Windowed,
        SsimArg::Auto => default_ssim_mode(&a),
    };
    let p = psnr(&a, &b)?;
    let s = ssim(&a, &b, mode)?;
    let out = serde_json::json!({ "psnr": p, "ssim": s });
    println!("{out}");
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> anyhow::Result<()> {
    if args.input.len() != args.target.len() {
        return Err(Error::Config(format!(
            "{} --input vs {} --target; they must pair up",
            args.input.len(),
            args.target.len()
        ))
        .into());
    }
    let scenes = args
        .input
        .iter()
        .zip(&args.target)
        .map(|(i, t)| {
            Ok(Scene {
                name: i
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                input: ImageBuf::read_ppm(i)?,
                target: ImageBuf::read_ppm(t)?,
            })
        })
        .collect::<evsite_core::Result<Vec<_>>>()?;
    let opts = ExportOptions {
        tile_size: args.tile_size,
        train_fraction: args.train_fraction,
        seed: args.seed,
    };
    let manifest = export_dataset(&scenes, &args.out, &opts)?;
    let train = manifest.ids_in(Split::Train).len();
    let test = manifest.ids_in(Split::Test).len();
    println!(
        "{} pairs ({train} train, {test} test) -> {}",
        manifest.pairs.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_gen(out: &Path, seed: Option<u64>, config: Option<&Path>) -> anyhow::Result<()> {
    let mut cfg = match config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ScenarioConfig>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let hash = generate_to(&cfg, out)?;
    println!("{hash}");
    Ok(())
}

fn cmd_render(grid: &Path, palette: &str, out: &Path) -> anyhow::Result<()> {
    let palette = match palette {
        "levels" => Palette::levels(),
        "regions" => Palette::regions(),
        path => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("palette {path}: {e}")))?;
            Palette::from_json(&text).map_err(|e| Error::Config(format!("palette {path}: {e}")))?
        }
    };
    let grid = read_ascii_grid(grid)?;
    render_grid(&grid, &palette)?.write_ppm(out)?;
    Ok(())
}

fn cmd_classify(
    zones: &Path,
    attributes: &Path,
    corridor: &Path,
    out: &Path,
    thresholds: &RegionThresholds,
) -> anyhow::Result<()> {
    thresholds.validate()?;
    let zone_grid = CategoricalGrid::from_grid(&read_ascii_grid(zones)?)
        .map_err(|e| Error::InvalidGrid(format!("{}: {e}", zones.display())))?;
    let zone_set = ZoneSet::new(zone_grid, AttributeTable::read_csv(attributes)?)?;
    let lines = FeatureSet::read(corridor)?;
    let distance = corridor_distance(&lines, zone_set.zones().geo()).map_err(|e| match e {
        Error::EmptyFeatureSet => Error::InvalidGrid(format!(
            "corridor does not cross the study area in {}",
            corridor.display()
        )),
        other => other,
    })?;
    let regions = classify_regions(&zone_set, &distance, thresholds)?;
    write_ascii_grid(&regions.raster.to_grid(), out)?;
    let per_zone: serde_json::Map<String, serde_json::Value> = regions
        .per_zone
        .iter()
        .map(|(z, c)| (z.to_string(), c.as_str().into()))
        .collect();
    let counts: serde_json::Map<String, serde_json::Value> = regions
        .zone_counts()
        .iter()
        .map(|(c, n)| (c.as_str().to_string(), (*n).into()))
        .collect();
    println!("{}", serde_json::json!({ "zone_counts": counts, "zones": per_zone }));
    Ok(())
}
