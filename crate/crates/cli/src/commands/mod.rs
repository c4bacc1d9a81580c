mod contract;
mod paths;
mod simulate;
mod transfer;
mod validate;

use std::io::Write;
use std::path::Path;

use ionet::contraction::ContractionOptions;
use ionet::io::parse_network;
use ionet::network::Tolerances;
use ionet::Network64;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};
use crate::output::{read_input, InputRecord};

pub fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Validate(a) => validate::run(cli, a, stdout),
        Command::Contract(a) => contract::run(cli, a, stdout),
        Command::Paths(a) => paths::run(cli, a, stdout),
        Command::Simulate(a) => simulate::run(cli, a, stdout),
        Command::Transfer(a) => transfer::run(cli, a, stdout, stderr),
    }
}

fn tolerances(cli: &Cli) -> Tolerances<f64> {
    Tolerances {
        unitary: cli.tol_unitary,
        ..Tolerances::default()
    }
}

fn contraction_options(cli: &Cli) -> ContractionOptions<f64> {
    ContractionOptions {
        tol: tolerances(cli),
        ..ContractionOptions::default()
    }
}

fn load_network(path: &Path) -> CliResult<(Network64, InputRecord)> {
    let (text, record) = read_input(path)?;
    Ok((parse_network(&text)?, record))
}

fn emit(stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))
}
