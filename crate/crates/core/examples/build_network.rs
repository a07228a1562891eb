//! Writes a uniform chain or lattice network file.
//!
//! cargo run --example build_network -- --out lattice.json lattice --rows 30 --cols 30

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emwave::network::{build_chain, build_lattice, save_network, UniformParams};

#[derive(Parser)]
struct Cli {
    #[command(subcommand)]
    shape: Shape,
    #[arg(long, default_value_t = 100.0)]
    spacing: f64,
    #[arg(long, default_value_t = 4.0)]
    h: f64,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    #[arg(long, default_value_t = 4.0)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    /// Per-bus p_mech = p_load.
    #[arg(long, default_value_t = 0.0)]
    generation: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Shape {
    Chain {
        #[arg(long)]
        n: usize,
        /// Power carried along the chain from bus 1 to bus n.
        #[arg(long, default_value_t = 0.0)]
        flow: f64,
    },
    Lattice {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let params = UniformParams::new(cli.spacing, cli.h, cli.d, cli.b, cli.v).with_generation(cli.generation);
    let net = match cli.shape {
        Shape::Chain { n, flow } => build_chain(n, &params, flow),
        Shape::Lattice { rows, cols } => build_lattice(rows, cols, &params, &[]),
    };
    match net.and_then(|net| save_network(&net, &cli.out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
