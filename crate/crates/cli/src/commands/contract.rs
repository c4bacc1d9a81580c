use std::io::Write;

use ionet::contraction::contract_network;
use serde_json::json;

use super::{contraction_options, emit, load_network};
use crate::args::{Cli, ContractArgs};
use crate::error::CliResult;
use crate::output::{complex_rows, OutputDir, RunManifest};

pub fn run(cli: &Cli, args: &ContractArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (net, input) = load_network(&args.net)?;
    let model = contract_network(&net, &contraction_options(cli))?;
    let dissipative = model.dissipative_hamiltonian()?;
    let part = model.partition();
    let r = &model.routing;
    let doc = json!({
        "partition": {
            "external_inputs": part.external_inputs,
            "external_outputs": part.external_outputs,
            "internal_inputs": part.internal_inputs,
            "internal_outputs": part.internal_outputs,
        },
        "s_eff": complex_rows(&model.s_eff),
        "l_eff_coeffs": complex_rows(&model.l_eff_coeffs),
        "h_eff": complex_rows(&model.h_eff),
        "h_loss": complex_rows(&dissipative),
        "diagnostics": {
            "spectral_radius_sw": r.spectral_radius_sw,
            "sigma_max_sw": r.sigma_max_sw,
            "condition_number": r.condition,
            "isometry_deviation": model.isometry_deviation(),
        },
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(ionet::Error::from)?;
    text.push('\n');

    match &args.out {
        None => emit(stdout, &text),
        Some(dir) => {
            let mut m = RunManifest::new("contract");
            m.input = Some(input);
            m.param("tol_unitary", cli.tol_unitary);
            let mut out = OutputDir::create(dir, m)?;
            out.write("effective_model.json", &text)?;
            out.finish()?;
            Ok(())
        }
    }
}
