//! The `tropcyl` command line: wall listings, cylinder counts, identity
//! verification and SVG rendering on top of `tropcyl-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use tropcyl_core::{LatticeVector, WallRule};

pub use commands::Output;
pub use config::{Config, CylinderSpec};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "tropcyl",
    version,
    about = "Primitive tropical cylinder counts on log Calabi-Yau surfaces"
)]
pub struct Cli {
    /// Configuration JSON; defaults to the cubic model.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the walls of the configured model.
    Walls {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        norm_bound: Option<i64>,
        #[arg(long)]
        rule: Option<WallRule>,
        /// Print whether the direction `X,Y` is a wall instead of listing.
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        is_wall: Option<LatticeVector>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Contributing classes of a primitive cylinder, or the count of one class.
    Count {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check the closed form and replay the induction, on a spec or on
    /// randomly generated cases.
    Verify {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long)]
        json: bool,
    },
    /// Draw walls, a cylinder, or a deformation family as SVG.
    Render {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// `walls`, `cylinder`, or a family tag such as `L_1`, `M_2`, `N_1`.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        norm_bound: Option<i64>,
        #[arg(long)]
        rule: Option<WallRule>,
    },
}

fn parse_vector(s: &str) -> Result<LatticeVector, String> {
    let bad = || format!("expected `X,Y`, got `{s}`");
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    Ok(LatticeVector::new(
        x.trim().parse().map_err(|_| bad())?,
        y.trim().parse().map_err(|_| bad())?,
    ))
}

/// Whether `TROPCYL_COLOR` asks for terminal colors.
pub fn color_enabled() -> bool {
    std::env::var("TROPCYL_COLOR").is_ok_and(|v| v == "1")
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let config = config::load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Walls {
            steps,
            norm_bound,
            rule,
            is_wall,
            svg,
            json,
        } => commands::cmd_walls(
            &config,
            &commands::WallsArgs {
                steps: *steps,
                norm_bound: *norm_bound,
                rule: *rule,
                is_wall: *is_wall,
                svg: svg.clone(),
                json: *json,
            },
        ),
        Command::Count { spec, table, json } => commands::cmd_count(
            &config,
            &commands::CountArgs {
                spec: spec.clone(),
                table: config::load_table(table.as_deref())?,
                json: *json,
            },
        ),
        Command::Verify {
            spec,
            table,
            seed,
            cases,
            json,
        } => commands::cmd_verify(
            &config,
            &commands::VerifyArgs {
                spec: spec.clone(),
                table: config::load_table(table.as_deref())?,
                seed: *seed,
                cases: *cases,
                json: *json,
                color: color_enabled(),
            },
        ),
        Command::Render {
            spec,
            target,
            svg,
            steps,
            norm_bound,
            rule,
        } => commands::cmd_render(
            &config,
            &commands::RenderArgs {
                spec: spec.clone(),
                target: target.clone(),
                svg: svg.clone(),
                steps: *steps,
                norm_bound: *norm_bound,
                rule: *rule,
            },
        ),
    }
}

/// Runs the command and writes its files; returns the process exit code.
pub fn main_with(cli: &Cli) -> i32 {
    let result = run(cli).and_then(|out| {
        for (path, contents) in &out.files {
            std::fs::write(path, contents)
                .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            0
        }
        Err(e) => {
            eprintln!("tropcyl: {e}");
            e.exit_code()
        }
    }
}
