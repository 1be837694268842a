//! `nnapprox`: build, evaluate and verify the constructive networks, evaluate
//! entropy bounds and run the regression harness. Every report is JSON.

mod args;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use nnapprox::approximators::{
    build_cheb_net, build_power_series_net, cheb_fit, cheb_poly_coeffs_exact, AnalyticTarget,
    MonomialPolynomial, PowerSeries, BUILTIN_SERIES,
};
use nnapprox::constructions::{build_mon, build_mult, build_multr, build_sq};
use nnapprox::entropy::{
    empirical_covering, linear_bound, network_bound, sample_points, EntropyBoundSpec,
    UniformCappedSampler,
};
use nnapprox::regression::{fit, generate_data, Lambda, RegressionConfig};
use nnapprox::verify::{sup_error, verify_mon, verify_mult, verify_multr, verify_sq, GridSpec};
use nnapprox::{Error, Network};

use args::*;

#[derive(Debug)]
enum Failure {
    /// A verification ran and its check did not hold.
    Check,
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("NNAPPROX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("NNAPPROX_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Build { which } => build(which),
        Command::Eval { net, input, out } => {
            let net = read_network(&net)?;
            let output = net.eval(&input)?;
            emit(&json!({ "input": input, "output": output }), &out)
        }
        Command::PathNorm { net, out } => {
            let net = read_network(&net)?;
            emit(
                &json!({
                    "path_norm": net.path_norm(),
                    "path_matrix": net.path_matrix(),
                    "per_layer_l1": net.per_layer_l1(),
                    "widths": net.widths(),
                }),
                &out,
            )
        }
        Command::Verify { which } => verify(which),
        Command::Entropy { which } => entropy(which),
        Command::Approx { which } => approx(which),
        Command::Regress(a) => regress(a),
        Command::Cheb { which } => cheb(which),
    }
}

fn build(which: BuildCmd) -> Outcome {
    let (net, out) = match which {
        BuildCmd::Sq { m, out } => (build_sq(m)?, out),
        BuildCmd::Mult { m, variant, out } => (build_mult(m, variant)?, out),
        BuildCmd::Multr { m, r, variant, out } => (build_multr(m, r, variant)?, out),
        BuildCmd::Mon {
            m,
            gamma,
            d,
            variant,
            out,
        } => (build_mon(m, gamma, d, variant)?, out),
    };
    write_text(&net.to_json_pretty()?, &out)
}

fn verify(which: VerifyCmd) -> Outcome {
    let (report, out) = match which {
        VerifyCmd::Sq { m, grid, out } => (verify_sq(m, grid)?, out),
        VerifyCmd::Mult {
            m,
            variant,
            step,
            out,
        } => (verify_mult(m, variant, step)?, out),
        VerifyCmd::Multr {
            m,
            r,
            variant,
            samples,
            seed,
            out,
        } => (verify_multr(m, r, variant, samples, seed)?, out),
        VerifyCmd::Mon {
            m,
            gamma,
            d,
            variant,
            grid,
            out,
        } => (verify_mon(m, gamma, d, variant, grid)?, out),
    };
    emit(&report, &out)?;
    check(report.pass)
}

fn entropy(which: EntropyCmd) -> Outcome {
    match which {
        EntropyCmd::Bound {
            eps,
            depth,
            p,
            b_cap,
            r,
            n,
            out,
        } => {
            let spec = EntropyBoundSpec {
                eps,
                depth,
                widths: p,
                b_cap,
                r,
                n,
            };
            let bound = network_bound(&spec)?;
            let linear = (depth == 0).then(|| linear_bound(b_cap, r, eps, spec.input_dim()));
            emit(&json!({ "spec": spec, "log2_bound": bound, "linear_bound": linear }), &out)
        }
        EntropyCmd::Empirical {
            spec,
            trials,
            activation,
            seed,
            out,
        } => {
            let spec: EntropyBoundSpec = read_json(&spec)?;
            let bound = network_bound(&spec)?;
            let points = sample_points(spec.n, spec.input_dim(), spec.r, seed);
            let sampler = UniformCappedSampler::for_spec(activation.into(), &spec)?;
            let cover = empirical_covering(&sampler, &points, spec.eps, trials, seed)?;
            let within = cover.log2_size <= bound;
            emit(
                &json!({
                    "spec": spec,
                    "seed": seed,
                    "cover": cover,
                    "log2_bound": bound,
                    "within_bound": within,
                }),
                &out,
            )?;
            check(within)
        }
    }
}

fn approx(which: ApproxCmd) -> Outcome {
    match which {
        ApproxCmd::PowerSeries {
            series,
            d,
            f_bound,
            eps,
            delta,
            variant,
            grid,
            net_out,
            out,
        } => {
            let (ps, target) = load_series(&series, d, f_bound)?;
            let (net, mut cert) = build_power_series_net(&ps, eps, delta, variant)?;
            let [lo, hi] = cert.claimed_domain[0];
            let spec = GridSpec::Cube {
                d: ps.dim(),
                lo,
                hi,
                points_per_axis: grid,
                include_lo: false,
            };
            cert.measured_error = Some(sup_error(&net, &spec.points(), |x| target(x)));
            cert.grid = Some(spec);
            if let Some(path) = net_out {
                write_text(&net.to_json_pretty()?, &Some(path))?;
            }
            emit(&cert, &out)?;
            check(cert.claimed_error.is_none_or(|c| cert.measured_error.is_some_and(|e| e <= c)))
        }
        ApproxCmd::Cheb {
            target,
            d,
            eps,
            variant,
            net_out,
            out,
        } => {
            let t = AnalyticTarget::builtin(&target, d)?;
            let (net, cert, poly) = build_cheb_net(&t, eps, variant)?;
            if let Some(path) = net_out {
                write_text(&net.to_json_pretty()?, &Some(path))?;
            }
            emit(&json!({ "certificate": cert, "polynomial": poly }), &out)
        }
    }
}

type TargetFn = Box<dyn Fn(&[f64]) -> f64 + Sync>;

/// A builtin series name, or a path to a polynomial JSON file whose own
/// values serve as the target.
fn load_series(series: &str, d: usize, f_bound: Option<f64>) -> Result<(PowerSeries, TargetFn), Failure> {
    if BUILTIN_SERIES.contains(&series) {
        let ps = PowerSeries::builtin(series, d)?;
        let t = AnalyticTarget::builtin(series, d)?;
        return Ok((ps, Box::new(move |x| t.eval(x))));
    }
    let poly: MonomialPolynomial = read_json(Path::new(series))?;
    let ps = PowerSeries::from_polynomial(poly.clone(), f_bound)?;
    Ok((ps, Box::new(move |x| poly.eval(x))))
}

fn regress(a: RegressArgs) -> Outcome {
    let target = AnalyticTarget::builtin(&a.target, a.d)?;
    let mut config = RegressionConfig::new(target, a.n, a.arch.hidden);
    config.noise_sd = a.noise;
    config.lambda = match a.lambda {
        Lambda::Auto { .. } => Lambda::Auto { c: a.lambda_c },
        fixed => fixed,
    };
    config.remainder_c = a.remainder_c;
    config.optimizer.max_epochs = a.max_epochs;
    config.optimizer.seed = a.seed;
    let data = generate_data(&config, a.seed)?;
    let (net, report) = fit(&config, &data)?;
    match a.net_out {
        Some(path) => {
            write_text(&net.to_json_pretty()?, &Some(path))?;
            emit(&report, &a.out)
        }
        None => emit(&json!({ "report": report, "network": net }), &a.out),
    }
}

fn cheb(which: ChebCmd) -> Outcome {
    match which {
        ChebCmd::Poly { n, out } => {
            let coeffs = cheb_poly_coeffs_exact(n)?;
            let text: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
            let values: Vec<Value> = coeffs
                .iter()
                .zip(&text)
                .map(|(c, s)| match i64::try_from(*c) {
                    Ok(v) => json!(v),
                    Err(_) => json!(s),
                })
                .collect();
            emit(&json!({ "n": n, "coefficients": values }), &out)
        }
        ChebCmd::Fit {
            target,
            d,
            degree,
            out,
        } => {
            let t = AnalyticTarget::builtin(&target, d)?;
            let series = cheb_fit(&t, &vec![degree; d], None)?;
            let rho = t.rho();
            emit(
                &json!({
                    "target": target,
                    "series": series,
                    "rho": rho,
                    "decay_constant": rho.map(|r| series.decay_constant(r)),
                }),
                &out,
            )
        }
    }
}

fn check(pass: bool) -> Outcome {
    if pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_network(path: &Path) -> Result<Network, Failure> {
    Network::from_json(&read_text(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_text(text: &str, out: &Option<PathBuf>) -> Outcome {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    write_text(&text, out)
}
