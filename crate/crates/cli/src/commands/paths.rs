use std::io::Write;

use ionet::paths::{EnumerationLimits, PathGraph};

use super::{emit, load_network, tolerances};
use crate::args::{Cli, PathsArgs};
use crate::error::CliResult;
use crate::output::{fmt_f64, Csv, OutputDir, RunManifest};

pub fn run(cli: &Cli, args: &PathsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (net, input) = load_network(&args.net)?;
    let tol = tolerances(cli);
    net.validate(&tol)?;
    let graph = PathGraph::from_network(&net, &tol)?;
    let paths = graph.enumerate(&EnumerationLimits::new(args.max_order, args.min_weight))?;

    let mut csv = Csv::new(&["path", "n", "re_w", "im_w", "abs_w", "tau_ns"]);
    for p in &paths {
        if let Some(tau_min) = cli.tau_min {
            if !p.delay.is_some_and(|d| d >= tau_min) {
                continue;
            }
        }
        csv.row([
            p.port_string(),
            p.n_traversals.to_string(),
            fmt_f64(p.weight.re),
            fmt_f64(p.weight.im),
            fmt_f64(p.magnitude()),
            p.delay.map_or(String::new(), |d| fmt_f64(d * 1e9)),
        ]);
    }

    match &args.out {
        None => emit(stdout, csv.as_str()),
        Some(dir) => {
            let mut m = RunManifest::new("paths");
            m.input = Some(input);
            m.param("max_order", args.max_order);
            m.param("min_weight", args.min_weight);
            m.param("tau_min", cli.tau_min);
            let mut out = OutputDir::create(dir, m)?;
            out.write("paths.csv", csv.as_str())?;
            out.finish()?;
            Ok(())
        }
    }
}
