//! The `hrtf-forge` command line: mesh validation and preparation, training
//! and applying the subdivision network, BEM synthesis, the rigid-sphere
//! oracle, and HRTF comparison reports.
//!
//! Exit codes: 0 success, 1 validation or numerical failure, 2 usage,
//! configuration or parse error.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use manifest::{DatasetManifest, Split, SubjectEntry};

#[derive(Debug, Parser)]
#[command(name = "hrtf-forge", version, about = "Mesh-to-HRTF pipeline")]
pub struct Cli {
    /// JSON configuration document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report mesh topology; exit 1 unless it is a closed genus-0 manifold.
    Validate {
        mesh: PathBuf,
        /// STL coordinate scale; defaults to `io.unit_scale`.
        #[arg(long)]
        unit_scale: Option<f64>,
    },
    /// Clean up, align, behead, grade and label a raw mesh.
    Prep {
        #[arg(long)]
        input: PathBuf,
        /// OBJ file; groups carry the region labels.
        #[arg(long)]
        output: PathBuf,
    },
    /// Train the subdivision network on the manifest's train pairs.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Model file.
        #[arg(long)]
        output: PathBuf,
        /// Loss history; defaults to the model path with a `.csv` extension.
        #[arg(long)]
        loss_csv: Option<PathBuf>,
    },
    /// Refine a mesh with a trained model.
    Upsample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Defaults to the model's level count.
        #[arg(long)]
        levels: Option<usize>,
        /// Ground truth for a Hausdorff report.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Synthesize an HRTF set from a labeled mesh.
    Solve {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare test HRTF sets against a reference and write CSV/SVG/JSON reports.
    Eval {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long = "test", required = true)]
        tests: Vec<PathBuf>,
        /// One per `--test`; defaults to the file stems.
        #[arg(long = "label")]
        labels: Vec<String>,
        #[arg(long)]
        subject: Option<String>,
        #[arg(long, default_value = "reference")]
        reference_tag: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Write the analytic rigid-sphere HRTF set on the configured grid.
    OracleSphere {
        #[arg(long)]
        output: PathBuf,
        /// Labeled sphere mesh whose ear patches define the caps.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads {n}: {e}")))?;
    }
    let config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let seed = cli.seed.unwrap_or(config.seed);
    let needs_config = !matches!(
        cli.command,
        Command::Validate { .. } | Command::Upsample { .. } | Command::Eval { .. }
    );
    if needs_config && cli.config.is_none() {
        return Err(CliError::Usage("this subcommand needs --config".into()));
    }
    match cli.command {
        Command::Validate { mesh, unit_scale } => {
            commands::validate(&mesh, unit_scale.unwrap_or(config.io.unit_scale))
        }
        Command::Prep { input, output } => commands::prep(&config, &input, &output),
        Command::Train {
            manifest,
            output,
            loss_csv,
        } => {
            let loss_csv = loss_csv.unwrap_or_else(|| output.with_extension("csv"));
            commands::train(&config, seed, &manifest, &output, &loss_csv)
        }
        Command::Upsample {
            model,
            input,
            output,
            levels,
            truth,
        } => commands::upsample(&config, &model, &input, &output, levels, truth.as_deref()),
        Command::Solve { mesh, output } => commands::solve(&config, &mesh, &output),
        Command::Eval {
            reference,
            tests,
            labels,
            subject,
            reference_tag,
            out_dir,
        } => commands::eval(
            &config,
            &reference,
            &tests,
            &labels,
            subject,
            reference_tag,
            &out_dir,
        ),
        Command::OracleSphere { output, mesh } => {
            commands::oracle_sphere(&config, &output, mesh.as_deref())
        }
    }
}
