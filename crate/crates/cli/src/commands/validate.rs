use std::fmt::Write as _;
use std::io::Write;

use ionet::contraction::RoutingMatrices;
use ionet::linalg::{max_abs_diff, unitarity_deviation};
use ionet::paths::{validity_check, ValidityOptions};

use super::{contraction_options, emit, load_network, tolerances};
use crate::args::{Cli, ValidateArgs};
use crate::error::{CliError, CliResult};
use crate::output::text_table;

pub fn run(cli: &Cli, args: &ValidateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (net, input) = load_network(&args.net)?;
    let tol = tolerances(cli);
    let mut report = String::new();
    let _ = writeln!(report, "file: {} (sha256 {})", input.path, input.sha256);
    let _ = writeln!(
        report,
        "network: {} ports, {} blocks, {} systems, {} connections",
        net.n_ports(),
        net.blocks.len(),
        net.systems.len(),
        net.connections.len()
    );
    for b in &net.blocks {
        let _ = writeln!(
            report,
            "unitarity {}: {:.3e}",
            b.element,
            unitarity_deviation(&b.matrix)
        );
    }
    // print what we have before a failing check aborts the run
    let checked = net.validate(&tol);
    if checked.is_err() {
        emit(stdout, &report)?;
    }
    checked?;

    let s = net.assemble_s(&tol)?;
    let w = net.assemble_w()?;
    let _ = writeln!(
        report,
        "W: {} internal links, partial-isometry residual {:.3e}",
        net.connections.len(),
        max_abs_diff(&(&w * w.adjoint() * &w), &w)
    );
    let routing = match RoutingMatrices::new(&s, &w, &contraction_options(cli)) {
        Ok(r) => r,
        Err(e) => {
            emit(stdout, &report)?;
            return Err(e.into());
        }
    };
    let _ = writeln!(
        report,
        "rho(SW) = {:.6}, sigma_max(SW) = {:.6}, cond(1 - SW) = {:.3e}",
        routing.spectral_radius_sw, routing.sigma_max_sw, routing.condition
    );

    let opts = ValidityOptions {
        tau_min: cli.tau_min,
        weight_threshold: cli.weight_threshold,
        list_min_weight: args.min_weight,
        max_order: args.max_order,
        ..ValidityOptions::default()
    };
    let validity = match validity_check(&net, &tol, &opts) {
        Ok(v) => v,
        Err(e) => {
            emit(stdout, &report)?;
            return Err(e.into());
        }
    };
    let _ = writeln!(
        report,
        "weak-loop check: tau_min = {:.6e} s, weight threshold = {}, n_cut = {}",
        validity.tau_min,
        validity.weight_threshold,
        validity.n_cut.map_or("-".into(), |n| n.to_string())
    );
    let rows: Vec<Vec<String>> = validity
        .paths
        .iter()
        .map(|p| {
            let significant = p.magnitude() >= validity.weight_threshold
                && p.delay.is_some_and(|d| d >= validity.tau_min);
            vec![
                p.port_string(),
                p.n_traversals.to_string(),
                format!("{:.6e}", p.magnitude()),
                p.delay.map_or("-".into(), |d| format!("{:.6}", d * 1e9)),
                if significant { "VIOLATES" } else { "ok" }.into(),
            ]
        })
        .collect();
    report.push_str(&text_table(&["path", "n", "|w|", "tau_ns", "status"], &rows));

    if validity.is_valid() {
        report.push_str("result: valid\n");
        emit(stdout, &report)
    } else {
        report.push_str("result: INVALID\n");
        emit(stdout, &report)?;
        Err(CliError::Physics {
            kind: "WeakLoopViolation",
            message: format!(
                "{} path(s) with delay >= tau_min carry weight >= {} (largest {:.4e})",
                validity.violating_paths.len(),
                validity.weight_threshold,
                validity.max_violating_weight
            ),
        })
    }
}
