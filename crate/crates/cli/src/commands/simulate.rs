use std::fs;
use std::io::Write;
use std::path::Path;

use ionet::linalg::{self, qubit};
use ionet::lindblad::{integrate, qubit_label_index, DensityMatrix, IntegrateOptions, OpenSystem, Schedule};
use ionet::scalar::c;
use ionet::CMatrix64;

use super::{contraction_options, emit, load_network};
use crate::args::{Cli, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, Csv, OutputDir, RunManifest};

/// `XZ`-style Pauli string or `P:<label>` projector on `n` qubits.
fn observable(spec: &str, n_qubits: usize) -> CliResult<CMatrix64> {
    let usage = |why: &str| CliError::Usage(format!("observable `{spec}`: {why}"));
    if let Some(label) = spec.strip_prefix("P:") {
        if label.chars().count() != n_qubits {
            return Err(usage(&format!("expected {n_qubits} qubit labels")));
        }
        let k = qubit_label_index(label).ok_or_else(|| usage("labels are u/d, e/g or 1/0"))?;
        let mut p = linalg::zeros(1 << n_qubits, 1 << n_qubits);
        p[(k, k)] = c(1.0, 0.0);
        return Ok(p);
    }
    if spec.chars().count() != n_qubits {
        return Err(usage(&format!("expected {n_qubits} Pauli letters")));
    }
    spec.chars().try_fold(linalg::identity::<f64>(1), |acc, ch| {
        let p = qubit::pauli(ch).ok_or_else(|| usage("Pauli letters are I, X, Y, Z"))?;
        Ok(linalg::kron(&acc, &p))
    })
}

fn initial_state(spec: &str, n_qubits: Option<usize>, dim: usize) -> CliResult<DensityMatrix<f64>> {
    let label = match (spec, n_qubits) {
        ("ground", Some(n)) => Some("d".repeat(n)),
        ("excited", Some(n)) => Some("u".repeat(n)),
        (s, Some(_)) if qubit_label_index(s).is_some() => Some(s.to_string()),
        _ => None,
    };
    if let Some(label) = label {
        if Some(label.chars().count()) != n_qubits {
            return Err(CliError::Usage(format!(
                "initial state `{spec}` does not match the number of qubits"
            )));
        }
        return Ok(DensityMatrix::from_qubit_label(&label)?);
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).map_err(|e| CliError::io(spec, e))?;
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text).map_err(ionet::Error::from)?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(ionet::Error::DimensionMismatch(format!(
            "initial state must be {dim}x{dim}"
        ))
        .into());
    }
    let rho = CMatrix64::from_fn(dim, dim, |i, j| c(rows[i][j][0], rows[i][j][1]));
    Ok(DensityMatrix::with_default_tolerances(rho)?)
}

pub fn run(cli: &Cli, args: &SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (net, input) = load_network(&args.net)?;
    let sys = OpenSystem::from_network(&net, &contraction_options(cli))?;
    let dims = net.joint_dims();
    let n_qubits = dims.iter().all(|&d| d == 2).then_some(dims.len());

    let observables = args
        .observables
        .iter()
        .map(|o| match n_qubits {
            Some(n) => observable(o, n),
            None => Err(CliError::Usage("observables need an all-qubit network".into())),
        })
        .collect::<CliResult<Vec<_>>>()?;
    let rho0 = initial_state(&args.initial, n_qubits, sys.dim())?;
    let dt = args
        .dt
        .unwrap_or_else(|| 1e-3 / net.kappa_max().filter(|&k| k > 0.0).unwrap_or(1.0));
    let traj = integrate(
        &sys,
        &Schedule::new(),
        &rho0,
        args.t_final,
        dt,
        &IntegrateOptions {
            sample_every: args.sample_every,
            ..IntegrateOptions::default()
        },
    )?;

    let mut header = vec!["t".to_string()];
    for o in &args.observables {
        header.push(format!("re_{o}"));
        header.push(format!("im_{o}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&header);
    let values: Vec<_> = observables.iter().map(|o| traj.expectation(o)).collect();
    for (k, t) in traj.times.iter().enumerate() {
        let mut row = vec![fmt_f64(*t)];
        for v in &values {
            row.push(fmt_f64(v[k].re));
            row.push(fmt_f64(v[k].im));
        }
        csv.row(row);
    }

    match &args.out {
        None => emit(stdout, csv.as_str()),
        Some(dir) => {
            let mut m = RunManifest::new("simulate");
            m.input = Some(input);
            m.param("t_final", args.t_final);
            m.param("dt", dt);
            m.param("observables", &args.observables);
            m.param("initial", &args.initial);
            m.param("sample_every", args.sample_every);
            m.param("max_trace_drift", traj.max_trace_drift);
            let mut out = OutputDir::create(dir, m)?;
            out.write("observables.csv", csv.as_str())?;
            out.finish()?;
            Ok(())
        }
    }
}
