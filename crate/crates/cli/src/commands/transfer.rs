use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;

use ionet::io::network_to_json;
use ionet::transfer::{
    dark_state_residual, network_coefficients, random_imperfect_network, reflectances,
    sample_network_class, simulate_transfer, synthesize_controls, NetworkClass, TransferRun,
};
use ionet::{ControlProtocol64, Network64, TransferCoefficients64};

use super::{contraction_options, emit, load_network};
use crate::args::{ClassArg, Cli, TransferArgs};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, Csv, OutputDir, RunManifest};

const MAX_CLASS_TRIES: usize = 1_000_000;

impl ClassArg {
    fn class(self) -> NetworkClass {
        match self {
            ClassArg::Low => NetworkClass::LOW_REFLECTION,
            ClassArg::LowAny => NetworkClass::LOW_REFLECTION_ANY,
            ClassArg::High => NetworkClass::HIGH_REFLECTION,
        }
    }
}

/// Random channel for one seed, with the `(ε, phase)` actually used.
fn random_network(args: &TransferArgs, seed: u64) -> CliResult<(Network64, f64, f64)> {
    match args.class {
        Some(class) => {
            let s = sample_network_class::<f64>(&class.class(), seed, MAX_CLASS_TRIES)?;
            Ok((s.network, s.eps, s.phase))
        }
        None => Ok((random_imperfect_network(args.eps, args.phase, seed)?, args.eps, args.phase)),
    }
}

struct Outcome {
    coeffs: TransferCoefficients64,
    protocol: ControlProtocol64,
    run: TransferRun<f64>,
}

fn run_protocol(cli: &Cli, args: &TransferArgs, net: &Network64, t_final: f64, dt: f64) -> CliResult<Outcome> {
    let coeffs = network_coefficients(net, &contraction_options(cli))?;
    let protocol = synthesize_controls(&coeffs, args.kappa0, args.ratio_db, t_final, dt, args.h_az)?;
    let run = simulate_transfer(&coeffs, &protocol, dt)?;
    Ok(Outcome { coeffs, protocol, run })
}

fn summary(o: &Outcome) -> String {
    format!(
        "success_probability={:.6} dark_bound={:.6} dark_residual={:.6e} cos_delta={:.6} terminal_ratio_db={:.2}\n",
        o.run.success_probability,
        o.run.dark_bound,
        dark_state_residual(&o.coeffs),
        o.coeffs.cos_delta(),
        o.protocol.terminal_ratio_db()
    )
}

pub fn run(cli: &Cli, args: &TransferArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    if !(args.kappa0 > 0.0) {
        return Err(CliError::Usage("--kappa0 must be positive".into()));
    }
    let t_final = args.t_final.unwrap_or(20.0 / args.kappa0);
    let dt = args.dt.unwrap_or(1e-4 / args.kappa0);

    let mut m = RunManifest::new(if args.sweep.is_some() { "transfer --sweep" } else { "transfer" });
    m.param("kappa0", args.kappa0);
    m.param("ratio_db", args.ratio_db);
    m.param("T", t_final);
    m.param("dt", dt);
    m.param("h_az", args.h_az);
    m.param("tol_unitary", cli.tol_unitary);

    if let Some(n) = args.sweep {
        return sweep(cli, args, n, t_final, dt, m, stdout);
    }

    let net = match &args.net {
        Some(path) => {
            let (net, input) = load_network(path)?;
            m.input = Some(input);
            net
        }
        None => {
            let (net, eps, phase) = random_network(args, args.seed)?;
            m.seed = Some(args.seed);
            m.param("eps", eps);
            m.param("phase", phase);
            m.param("class", args.class.map(|c| format!("{c:?}")));
            net
        }
    };
    let o = run_protocol(cli, args, &net, t_final, dt)?;
    for w in &o.protocol.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    m.warnings = o.protocol.warnings.clone();
    m.param("sample_every", args.sample_every);

    let mut controls = Csv::new(&["t", "kappa_b", "h_bz"]);
    for (k, t) in o.protocol.kappa_b.times().enumerate() {
        controls.float_row(&[t, o.protocol.kappa_b.values[k], o.protocol.h_bz.values[k]]);
    }
    let mut traj = Csv::new(&["t", "b0", "bx", "by", "bz", "success", "dark_bound"]);
    let every = args.sample_every.max(1);
    let last = o.run.samples.len() - 1;
    for (k, s) in o.run.samples.iter().enumerate() {
        if k % every == 0 || k == last {
            let b = s.state.b;
            traj.float_row(&[s.t, s.state.b0, b.x, b.y, b.z, s.success, s.dark_bound]);
        }
    }

    let mut out = OutputDir::create(&args.out, m)?;
    if args.net.is_none() {
        let mut json = network_to_json(&net)?;
        json.push('\n');
        out.write("network.json", &json)?;
    }
    out.write("controls.csv", controls.as_str())?;
    out.write("trajectory.csv", traj.as_str())?;
    out.finish()?;
    emit(stdout, &summary(&o))
}

fn sweep(
    cli: &Cli,
    args: &TransferArgs,
    n: u64,
    t_final: f64,
    dt: f64,
    mut m: RunManifest,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let next = AtomicU64::new(0);
    let rows = Mutex::new(Vec::with_capacity(n as usize));
    let workers = thread::available_parallelism().map_or(1, |p| p.get()).min(n.max(1) as usize);
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= n {
                    break;
                }
                let seed = args.seed.wrapping_add(k);
                let row = sweep_row(cli, args, seed, t_final, dt);
                rows.lock().expect("no worker panicked").push((k, row));
            });
        }
    });
    let mut rows = rows.into_inner().expect("no worker panicked");
    rows.sort_by_key(|(k, _)| *k);

    let mut csv = Csv::new(&[
        "seed", "eps", "phase", "min_r2", "max_r2", "dark_residual", "cos_delta", "success", "dark_bound",
        "status",
    ]);
    let mut ok = 0usize;
    for (_, row) in &rows {
        if row.last().is_some_and(|s| s == "ok") {
            ok += 1;
        }
        csv.row(row);
    }
    m.seed = Some(args.seed);
    m.param("sweep", n);
    m.param("eps", args.class.is_none().then_some(args.eps));
    m.param("phase", args.class.is_none().then_some(args.phase));
    m.param("class", args.class.map(|c| format!("{c:?}")));
    let mut out = OutputDir::create(&args.out, m)?;
    out.write("sweep.csv", csv.as_str())?;
    out.finish()?;
    emit(stdout, &format!("sweep: {ok}/{n} seeds completed\n"))
}

fn sweep_row(cli: &Cli, args: &TransferArgs, seed: u64, t_final: f64, dt: f64) -> Vec<String> {
    let blank = || String::new();
    let (net, eps, phase) = match random_network(args, seed) {
        Ok(x) => x,
        Err(e) => {
            let mut row = vec![seed.to_string()];
            row.extend((0..8).map(|_| blank()));
            row.push(format!("error:{}", e.kind()));
            return row;
        }
    };
    let r2 = reflectances(&net);
    let (lo, hi) = r2
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let mut row = vec![seed.to_string(), fmt_f64(eps), fmt_f64(phase), fmt_f64(lo), fmt_f64(hi)];
    match run_protocol(cli, args, &net, t_final, dt) {
        Ok(o) => {
            row.push(fmt_f64(dark_state_residual(&o.coeffs)));
            row.push(fmt_f64(o.coeffs.cos_delta()));
            row.push(fmt_f64(o.run.success_probability));
            row.push(fmt_f64(o.run.dark_bound));
            row.push("ok".into());
        }
        Err(e) => {
            row.extend((0..4).map(|_| blank()));
            row.push(format!("error:{}", e.kind()));
        }
    }
    row
}
