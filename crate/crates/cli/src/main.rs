use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topoblend::io::{load_config, marching_cubes, read_grid, write_diagram, write_grid, write_report, Config, MeshFormat};
use topoblend::pipeline::{blend_many, outside_br_deviation, BlendReport};
use topoblend::topology::{compute_persistence, sample_field};
use topoblend::{Error, Result};

const PROBES: usize = 10_000;

#[derive(Parser)]
#[command(name = "topoblend", version, about = "Blend implicit porous structures without topological defects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blend the structures of a config and write the results.
    Blend {
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-iteration loss and diagrams under `<out>/trace`.
        #[arg(long)]
        trace: bool,
        /// Seed for the random probes that check fields outside the blending regions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Report the topology of the initial blend without optimizing.
    Analyze {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the zero level set of a raw grid.
    Mesh {
        grid: PathBuf,
        /// `.obj` or `.stl`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Stage { source, .. } => exit_code(source),
        Error::Io { .. } | Error::Image { .. } => 4,
        Error::Domain(_) | Error::NonFinite { .. } | Error::Config { .. } | Error::Json(_) => 2,
    }
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn output_dir(config_path: &Path, config: &Config, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| base_dir(config_path).join(&config.output.dir))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn summary(report: &BlendReport) {
    for (i, s) in report.stages.iter().enumerate() {
        let first = s.loss_trace.first().copied().unwrap_or(0.0);
        let last = s.loss_trace.last().copied().unwrap_or(0.0);
        println!(
            "stage {i}: {} iterations, loss {first:.6} -> {last:.6}, converged {}",
            s.iterations, s.converged
        );
    }
    println!(
        "betti at 0: persistence {:?}, flood fill {:?}{}",
        report.betti,
        report.oracle_betti,
        if report.mismatch { " (MISMATCH)" } else { "" }
    );
}

/// Returns whether every stage converged.
fn run_blend(config_path: &Path, out: Option<PathBuf>, trace: bool, seed: u64, analyze: bool) -> Result<bool> {
    let mut config = load_config(config_path)?;
    if analyze {
        config.optimize.max_iters = 0;
    }
    let dir = output_dir(config_path, &config, out);
    create_dir(&dir)?;
    let mut problem = config.to_problem(&base_dir(config_path))?;
    if trace {
        problem.trace = Some(dir.join("trace"));
    }
    let (phi, report) = blend_many(&problem)?;
    write_report(&report, &dir.join("report.json"))?;
    summary(&report);
    if analyze {
        let grid = sample_field(&phi, problem.ter(), report.resolution)?;
        write_diagram(&compute_persistence(&grid), &grid, &dir.join("diagram.csv"))?;
        return Ok(true);
    }
    let deviation = outside_br_deviation(&problem, &phi, PROBES, seed);
    println!("max deviation outside blending regions: {deviation:.3e}");

    let grid = sample_field(&phi, problem.ter(), report.resolution)?;
    if config.output.grid {
        write_grid(&grid, &dir.join("field.raw"))?;
    }
    if config.output.diagram {
        write_diagram(&compute_persistence(&grid), &grid, &dir.join("diagram.csv"))?;
    }
    let mesh_path = match config.output.mesh {
        MeshFormat::Obj => Some(dir.join("mesh.obj")),
        MeshFormat::Stl => Some(dir.join("mesh.stl")),
        MeshFormat::None => None,
    };
    if let Some(path) = mesh_path {
        marching_cubes(&grid, 0.0).save(&path)?;
    }
    Ok(report.converged())
}

fn run_mesh(grid: &Path, out: &Path) -> Result<()> {
    let grid = read_grid(grid)?;
    let mesh = marching_cubes(&grid, 0.0);
    mesh.save(out)?;
    println!("{} vertices, {} triangles", mesh.vertices.len(), mesh.triangles.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Blend {
            config,
            out,
            trace,
            seed,
        } => run_blend(&config, out, trace, seed, false),
        Command::Analyze { config, out } => run_blend(&config, out, false, 0, true),
        Command::Mesh { grid, out } => run_mesh(&grid, &out).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: optimization stopped before the loss reached zero");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
