use std::io::Read;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use smoothcount::evaluator::{conditional_expectation, smoothed_expectation, smoothed_expectation_geometric};
use smoothcount::hypergraph::{matching_instance, perfect_matching_instance, GammaChoice, HypergraphInstance};
use smoothcount::interpolation::WorkOptions;
use smoothcount::io::{InstanceFile, IsingFile};
use smoothcount::ising::{
    field_thresholds, from_ising, lipschitz_condition, partition_bruteforce, to_ising, uniform_lambda_radii,
    DEFAULT_SPIN_CAP,
};
use smoothcount::maxent::{count_bound, smoothed_count_bound, solve_maxent};
use smoothcount::model::{PartialAssignment, ProbabilityVector, SparseSystem};
use smoothcount::oracle::{brute_force_expectation, brute_force_p, count_solutions, proposition31_sum, DEFAULT_CAP};
use smoothcount::rounding::{derandomize, RoundingOptions};
use smoothcount::testgen::{certify_by_shrinking, random_probabilities, random_system, rng, SystemShape};
use smoothcount::zerofree::{
    certify_point, check_polydisc, max_delta, max_gamma_matching, max_gamma_uniform, suggest_gamma_sparse,
    Certificate, Constraint, Degree, FailureReport,
};
use smoothcount::{Error, EvalOptions, EvaluationResult, Hypergraph};

use crate::{Cli, Command, GammaCommand, Global, HyperArgs, HyperCommand, IsingCommand, OracleCommand, ProbArg};

type Complex = num_complex::Complex<f64>;

/// A failed invocation: exit code plus a JSON error document.
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub detail: Map<String, Value>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 4, kind: "input", message: message.into(), detail: Map::new() }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.detail.insert(key.to_string(), value);
        self
    }

    pub fn document(&self) -> Value {
        let mut e = Map::new();
        e.insert("kind".into(), json!(self.kind));
        e.insert("message".into(), json!(self.message));
        e.extend(self.detail.clone());
        json!({ "error": e })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::NotCertified(report) => Failure { code: 2, kind: "certification", message, detail: Map::new() }
                .with("report", failure_json(&report)),
            Error::WorkLimit { required, limit } => {
                Failure { code: 3, kind: "work_limit", message, detail: Map::new() }
                    .with("required", json!(required.to_string()))
                    .with("limit", json!(limit.to_string()))
            }
            Error::InvalidInput(_) | Error::IndexOutOfRange { .. } | Error::DimensionMismatch { .. } => {
                Failure::input(message)
            }
            Error::CapExceeded { n, cap } => Failure::input(message).with("n", json!(n)).with("cap", json!(cap)),
            Error::RoundingStalled { step, fixed, source } => {
                let inner = Failure::from(*source);
                let fixed: Vec<Value> = fixed.iter().map(|&(j, b)| json!([j, u8::from(b)])).collect();
                Failure { message, ..inner }.with("step", json!(step)).with("fixed", json!(fixed))
            }
            Error::Factorization { residual } => {
                Failure { code: 1, kind: "numerical", message, detail: Map::new() }.with("residual", json!(residual))
            }
            Error::NoInterior { residual, iterations } => {
                Failure { code: 1, kind: "no_interior", message, detail: Map::new() }
                    .with("residual", json!(residual))
                    .with("iterations", json!(iterations))
            }
        }
    }
}

type Outcome = Result<Value, Failure>;

fn read_text(global: &Global) -> Result<String, Failure> {
    let mut text = String::new();
    match global.input.as_deref() {
        Some(path) if path.as_os_str() != "-" => {
            text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        }
        _ => {
            std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::input(format!("cannot read stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| {
        Failure::input(format!("malformed JSON: {e}")).with("line", json!(e.line())).with("column", json!(e.column()))
    })
}

fn read<T: DeserializeOwned>(global: &Global) -> Result<T, Failure> {
    parse(&read_text(global)?)
}

fn instance(global: &Global) -> Result<(InstanceFile, SparseSystem<f64>), Failure> {
    let file: InstanceFile = read(global)?;
    let system = file.system()?;
    Ok((file, system))
}

fn probabilities(file: &InstanceFile, prob: &ProbArg) -> Result<ProbabilityVector<f64>, Failure> {
    Ok(file.probabilities(prob.p)?)
}

fn eval_options(global: &Global, force: bool) -> EvalOptions<f64> {
    EvalOptions { work: WorkOptions { work_limit: global.work_limit, parallel: true }, delta: global.delta, force }
}

fn bits(x: &[bool]) -> Value {
    json!(x.iter().map(|&b| u8::from(b)).collect::<Vec<_>>())
}

fn constraint_json(c: &Constraint) -> Value {
    match *c {
        Constraint::Lambda { column, lambda } => json!({"kind": "lambda", "column": column, "lambda": lambda}),
        Constraint::Row { row, value, bound } => json!({"kind": "row", "row": row, "value": value, "bound": bound}),
    }
}

fn failure_json(r: &FailureReport) -> Value {
    json!({
        "violations": r.violations.iter().map(constraint_json).collect::<Vec<_>>(),
        "binding": r.binding.as_ref().map(constraint_json),
        "margin": r.margin,
    })
}

fn certificate_json(c: &Certificate<f64>) -> Value {
    json!({
        "delta": c.delta,
        "margin": c.margin,
        "c": c.c,
        "rho": c.rho,
        "lambda": c.lambda,
        "row_values": c.row_values,
        "row_bound": c.row_bound,
    })
}

fn evaluation_json(e: &EvaluationResult<f64>) -> Value {
    json!({
        "log_value": e.log_value,
        "value": e.value(),
        "epsilon": e.epsilon,
        "delta": e.delta,
        "degree": e.degree,
        "tail_bound": e.tail_bound,
        "certified": e.certified,
        "method": e.method.as_str(),
        "assumes_geometric_zero_free": e.assumes_geometric_zero_free,
    })
}

fn instance_json(system: &SparseSystem<f64>, p: Option<&ProbabilityVector<f64>>) -> Value {
    serde_json::to_value(InstanceFile::from_system(system, p)).expect("instance serializes")
}

pub fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    if !(g.epsilon > 0.0 && g.epsilon < 1.0) {
        return Err(Failure::input(format!("--epsilon {} is not in (0, 1)", g.epsilon)));
    }
    match &cli.command {
        Command::Check(prob) => check(g, prob),
        Command::Gamma(c) => gamma(g, c),
        Command::Eval { prob, geometric, force } => eval(g, prob, *geometric, *force),
        Command::Cond { prob, fix, force } => cond(g, prob, fix, *force),
        Command::Round { prob, order, force } => round(g, prob, order.clone(), *force),
        Command::Hyper(c) => hyper(g, c),
        Command::Ising(c) => ising(g, c),
        Command::Maxent { tolerance } => maxent(g, *tolerance),
        Command::Oracle(c) => oracle(g, c),
        Command::Random { n, m, sparsity, nonnegative, certified } => {
            random(g, *n, *m, *sparsity, *nonnegative, *certified)
        }
    }
}

fn check(g: &Global, prob: &ProbArg) -> Outcome {
    let (file, system) = instance(g)?;
    let x = probabilities(&file, prob)?.odds();
    let best = max_delta(&system, &x);
    let cert = match (g.delta, best) {
        (Some(d), _) => certify_point(&system, &x, d),
        (None, Some(d)) => certify_point(&system, &x, d),
        (None, None) => check_polydisc(&system, &x),
    };
    match cert {
        Ok(c) if g.delta.is_some() || best.is_some() => Ok(json!({
            "certified": true,
            "max_delta": best,
            "certificate": certificate_json(&c),
        })),
        Ok(c) => Err(Failure::from(Error::NotCertified(FailureReport {
            violations: Vec::new(),
            binding: None,
            margin: c.margin,
        }))
        .with("max_delta", Value::Null)),
        Err(report) => Err(Failure::from(Error::NotCertified(report)).with("max_delta", json!(best))),
    }
}

fn gamma(g: &Global, c: &GammaCommand) -> Outcome {
    match c {
        GammaCommand::Uniform { k, degree } => {
            let delta = g.delta.unwrap_or(1e-6);
            let r = max_gamma_uniform(*k, delta, *degree)?;
            let d = match degree {
                Degree::Finite(d) => json!(d),
                Degree::Infinite => json!("inf"),
            };
            Ok(json!({"k": k, "Delta": d, "delta": delta, "t": r.t, "gamma": r.gamma}))
        }
        GammaCommand::Matching { k, degree, omega } => {
            let delta = g.delta.unwrap_or(smoothcount::hypergraph::DEFAULT_DELTA);
            let r = max_gamma_matching(*k, *degree, *omega, delta)?;
            Ok(json!({
                "k": k,
                "Delta": degree,
                "omega": omega,
                "delta": delta,
                "gamma": r.gamma,
                "target": r.target,
                "target_admissible": r.target_admissible,
            }))
        }
        GammaCommand::Sparse => {
            let (_, system) = instance(g)?;
            let r = suggest_gamma_sparse(&system)?;
            Ok(json!({"gamma": r.gamma, "column_sums": r.column_sums, "holds": r.holds}))
        }
    }
}

fn eval(g: &Global, prob: &ProbArg, geometric: bool, force: bool) -> Outcome {
    let (file, system) = instance(g)?;
    let p = probabilities(&file, prob)?;
    let opts = eval_options(g, force);
    let e = if geometric {
        smoothed_expectation_geometric(&system, p.as_slice(), g.epsilon, &opts)?
    } else {
        smoothed_expectation(&system, &p, g.epsilon, &opts)?
    };
    Ok(evaluation_json(&e))
}

fn cond(g: &Global, prob: &ProbArg, fix: &[(usize, bool)], force: bool) -> Outcome {
    let (file, system) = instance(g)?;
    let p = probabilities(&file, prob)?;
    if let Some(&(j, _)) = fix.iter().find(|&&(j, _)| j >= system.n_cols()) {
        return Err(Error::IndexOutOfRange { index: j, size: system.n_cols() }.into());
    }
    let a = PartialAssignment::from_pairs(fix.iter().copied())?;
    let e = conditional_expectation(&system, &p, &a, g.epsilon, &eval_options(g, force))?;
    let mut doc = evaluation_json(&e);
    let fixed: Vec<Value> = a.iter().map(|(j, b)| json!([j, u8::from(b)])).collect();
    doc["fixed"] = json!(fixed);
    Ok(doc)
}

fn round(g: &Global, prob: &ProbArg, order: Option<Vec<usize>>, force: bool) -> Outcome {
    let (file, system) = instance(g)?;
    let p = probabilities(&file, prob)?;
    let r = derandomize(&system, &p, g.epsilon, &RoundingOptions { eval: eval_options(g, force), order })?;
    let steps: Vec<Value> = r
        .steps
        .iter()
        .map(|s| {
            json!({
                "variable": s.variable,
                "log_if_zero": s.log_if_zero,
                "log_if_one": s.log_if_one,
                "chosen": u8::from(s.chosen),
            })
        })
        .collect();
    let reference = r.reference.value();
    Ok(json!({
        "x0": bits(&r.x0),
        "penalty": r.penalty,
        "achieved": r.achieved,
        "reference": evaluation_json(&r.reference),
        "guaranteed_lower_bound": (1.0 - g.epsilon) * reference,
        "steps": steps,
    }))
}

fn hyper(g: &Global, c: &HyperCommand) -> Outcome {
    let h: Hypergraph = read(g)?;
    h.validate()?;
    let (args, omega) = match c {
        HyperCommand::Perfect(a) => (a, None),
        HyperCommand::Matching { args, omega } => (args, Some(*omega)),
    };
    let inst = if args.general { general_instance(&h, args, omega)? } else { regular_instance(g, &h, args, omega)? };
    let e = smoothed_expectation(&inst.system, &inst.p, g.epsilon, &eval_options(g, false))?;
    let mut doc = json!({
        "vertices": h.n_vertices(),
        "edges": h.edges().len(),
        "k": inst.k,
        "Delta": inst.degree,
        "gamma": inst.gamma,
        "p": inst.p.as_slice().first().copied(),
        "evaluation_point": inst.evaluation_point,
        "gamma_delta": inst.delta,
        "evaluation": evaluation_json(&e),
    });
    if let Some((target, ok)) = inst.target_gamma {
        doc["target_gamma"] = json!(target);
        doc["target_admissible"] = json!(ok);
    }
    if args.emit {
        doc["instance"] = instance_json(&inst.system, Some(&inst.p));
    }
    Ok(doc)
}

fn regular_instance(
    g: &Global,
    h: &Hypergraph,
    args: &HyperArgs,
    omega: Option<f64>,
) -> Result<HypergraphInstance<f64>, Failure> {
    let choice = match (args.gamma, g.delta) {
        (Some(v), _) => GammaChoice::Fixed(v),
        (None, Some(delta)) => GammaChoice::Auto { delta },
        (None, None) => GammaChoice::auto(),
    };
    Ok(match omega {
        None => perfect_matching_instance(h, choice)?,
        Some(w) => matching_instance(h, w, choice)?,
    })
}

/// The exact-cover system of an arbitrary hypergraph with caller-chosen weight and edge
/// probability.
fn general_instance(h: &Hypergraph, args: &HyperArgs, omega: Option<f64>) -> Result<HypergraphInstance<f64>, Failure> {
    let (Some(gamma), Some(p)) = (args.gamma, args.p) else {
        return Err(Failure::input("--general requires --gamma and --p"));
    };
    let p = p * omega.unwrap_or(1.0);
    let degrees = h.degrees();
    let k = h.edges().iter().map(Vec::len).max().unwrap_or(0);
    Ok(HypergraphInstance {
        system: h.exact_cover_system(gamma)?,
        p: ProbabilityVector::uniform(h.edges().len(), p)?,
        gamma,
        k,
        degree: degrees.iter().copied().max().unwrap_or(0),
        delta: None,
        evaluation_point: p / (1.0 - p),
        target_gamma: None,
    })
}

fn ising(g: &Global, c: &IsingCommand) -> Outcome {
    match c {
        IsingCommand::To(prob) => {
            let (file, system) = instance(g)?;
            let p = probabilities(&file, prob)?;
            let (model, log_constant) = to_ising(&system, &p)?;
            let file = IsingFile { log_constant: Some(log_constant), ..IsingFile::from_model(&model) };
            Ok(serde_json::to_value(file).expect("model serializes"))
        }
        IsingCommand::From => {
            let file: IsingFile = read(g)?;
            let model = file.model::<f64>()?;
            let r = from_ising(model.g())?;
            let rho = uniform_lambda_radii(&r.system);
            let thresholds = field_thresholds(&r.system, &rho);
            let below = model.f().iter().zip(&thresholds).all(|(f, t)| f < t);
            let mut doc = instance_json(&r.system, None);
            doc["lambda_max"] = json!(r.lambda);
            doc["residual"] = json!(r.residual);
            doc["rho"] = json!(rho);
            doc["field_thresholds"] = json!(thresholds);
            doc["field_below_thresholds"] = json!(below);
            Ok(doc)
        }
        IsingCommand::Check => {
            let file: IsingFile = read(g)?;
            let model = file.model::<f64>()?;
            let delta = g.delta.unwrap_or(0.0);
            let r = lipschitz_condition(&model, delta);
            Ok(json!({"delta": delta, "bound": r.bound, "column_sums": r.sums, "holds": r.holds}))
        }
        IsingCommand::Bruteforce => {
            let file: IsingFile = read(g)?;
            let z = partition_bruteforce(&file.model::<f64>()?, DEFAULT_SPIN_CAP)?;
            let mut doc = json!({"log_value": z.log_value, "value": z.value});
            if let Some(c) = file.log_constant {
                doc["expectation"] = json!({"log_value": c + z.log_value, "value": (c + z.log_value).exp()});
            }
            Ok(doc)
        }
    }
}

fn maxent(g: &Global, tolerance: f64) -> Outcome {
    let (_, system) = instance(g)?;
    let sol = solve_maxent(&system, tolerance)?;
    let plain = count_bound(&sol);
    let mut doc = json!({
        "p": sol.p.as_slice(),
        "dual": sol.dual,
        "entropy": sol.entropy,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "count_bound": {"log_value": plain.log_value, "value": plain.value},
    });
    match smoothed_count_bound(&system, &sol, g.epsilon, &eval_options(g, false)) {
        Ok((b, e)) => {
            doc["smoothed_count_bound"] = json!({
                "log_value": b.log_value,
                "value": b.value,
                "expectation": evaluation_json(&e),
            });
            Ok(doc)
        }
        Err(Error::NotCertified(report)) => {
            doc["smoothed_count_bound"] = Value::Null;
            doc["certification"] = failure_json(&report);
            Ok(doc)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Prop31File {
    a: Vec<Vec<f64>>,
    z: Vec<(f64, f64)>,
}

fn complex_json(z: Complex) -> Value {
    json!({"re": z.re, "im": z.im, "abs": z.norm()})
}

fn oracle(g: &Global, c: &OracleCommand) -> Outcome {
    match c {
        OracleCommand::P { prob, z } => {
            let (file, system) = instance(g)?;
            let z: Vec<Complex> = match z {
                Some(text) => parse::<Vec<(f64, f64)>>(text)?.into_iter().map(|(re, im)| Complex::new(re, im)).collect(),
                None => probabilities(&file, prob)?.odds().into_iter().map(|x| Complex::new(x, 0.0)).collect(),
            };
            Ok(complex_json(brute_force_p(&system, &z, DEFAULT_CAP)?))
        }
        OracleCommand::Expect(prob) => {
            let (file, system) = instance(g)?;
            let v = brute_force_expectation(&system, &probabilities(&file, prob)?, DEFAULT_CAP)?;
            Ok(json!({"value": v, "log_value": v.ln()}))
        }
        OracleCommand::Count { tolerance } => {
            let (_, system) = instance(g)?;
            Ok(json!({"count": count_solutions(&system, *tolerance, DEFAULT_CAP)?, "tolerance": tolerance}))
        }
        OracleCommand::Prop31 => {
            let f: Prop31File = read(g)?;
            let z: Vec<Complex> = f.z.iter().map(|&(re, im)| Complex::new(re, im)).collect();
            Ok(complex_json(proposition31_sum(&f.a, &z)?))
        }
    }
}

fn random(g: &Global, n: usize, m: usize, sparsity: usize, nonnegative: bool, certified: Option<f64>) -> Outcome {
    let mut r = rng(g.seed);
    let shape = SystemShape { max_column_nonzeros: sparsity, nonnegative, ..SystemShape::new(n, m) };
    let system = random_system(&mut r, &shape);
    let mut p = random_probabilities(&mut r, n, (0.05, 0.6));
    if let Some(d) = certified {
        p = certify_by_shrinking(&system, &p, d)
            .ok_or_else(|| Failure::input(format!("no certificate with delta >= {d} found")))?;
    }
    Ok(instance_json(&system, Some(&p)))
}
