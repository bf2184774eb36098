use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use subgrad_core::generate::{random_pa_problem, rng_from_seed};
use subgrad_core::theory::polyak_certificate_multipliers;
use subgrad_core::{
    alternating_projection, build_altproj_tight_instance, build_feasibility_resisting_instance,
    build_polyak_tight_instance, certificate_lemma1, greedy_method, momentum_polyak_method,
    rate_altproj, rate_optimal, rate_polyak, subgradient_method, GreedyVariant, ProjectableSet,
    RunTrace, StepSchedule, SubgradientOracle,
};

use crate::io::{
    feas_trace_jsonl, parse_run_trace, read_json, run_trace_jsonl, to_json, write_file,
    InstanceFile,
};
use crate::{BoundKind, CliError, Command, FeasMethod, SweepKind, WorstcaseKind};

/// Slack below `-CERTIFICATE_TOLERANCE` fails `certify`.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Solver {
    Schedule(StepSchedule),
    MomentumPolyak,
}

fn parse_f64(s: &str, what: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("{what}: cannot parse {s:?} as a number"))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|v| parse_f64(v, what)).collect()
}

pub fn parse_solver(s: &str) -> Result<Solver, String> {
    let (name, arg) = match s.split_once('=') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let schedule = match (name, arg) {
        ("polyak", None) => StepSchedule::Polyak,
        ("adaptive-polyak", None) => StepSchedule::AdaptivePolyak,
        ("momentum-polyak", None) => return Ok(Solver::MomentumPolyak),
        ("polyak-t", Some(t)) => StepSchedule::PolyakT(parse_f64(t, "polyak-t")?),
        ("presized", Some(r)) => StepSchedule::PreSizedOptimal(parse_f64(r, "presized")?),
        ("fixed", Some(h)) => {
            let list = parse_list(h, "fixed")?;
            match list.as_slice() {
                [h] => StepSchedule::Fixed(*h),
                _ => StepSchedule::FixedList(list),
            }
        }
        _ => return Err(format!("unknown solver {s:?}")),
    };
    Ok(Solver::Schedule(schedule))
}

/// `none`, `ball=R[:C1,C2,...]` (center defaults to the origin), or
/// `halfspace=A1,A2,...:B`.
pub fn parse_projection(s: &str) -> Result<ProjectableSet, String> {
    if s == "none" {
        return Ok(ProjectableSet::WholeSpace);
    }
    let Some((kind, arg)) = s.split_once('=') else {
        return Err(format!("unknown projection {s:?}"));
    };
    let set = match kind {
        "ball" => {
            let (r, center) = match arg.split_once(':') {
                Some((r, c)) => (parse_f64(r, "ball radius")?, parse_list(c, "ball center")?),
                None => (parse_f64(arg, "ball radius")?, Vec::new()),
            };
            ProjectableSet::Ball { center, radius: r }
        }
        "halfspace" => {
            let (a, b) = arg
                .rsplit_once(':')
                .ok_or_else(|| "halfspace needs A1,...,An:B".to_string())?;
            ProjectableSet::halfspace(
                parse_list(a, "halfspace normal")?,
                parse_f64(b, "halfspace offset")?,
            )
            .map_err(|e| e.to_string())?
        }
        _ => return Err(format!("unknown projection {s:?}")),
    };
    Ok(set)
}

/// Shortest round-trip form, switching to exponent notation outside
/// `[1e-4, 1e15)`.
pub fn format_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// `v` with 12 significant digits.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:.11}");
    }
    let sci = format!("{v:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..=15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

fn check_iters(n: usize) -> Result<(), CliError> {
    if n == 0 {
        Err(CliError::Usage("--iters must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_horizon(n: usize) -> Result<(), CliError> {
    if n == 0 {
        Err(CliError::Usage("N must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn out<W: Write>(w: &mut W, line: &str) -> Result<(), CliError> {
    writeln!(w, "{line}").map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}

pub fn execute<W: Write>(command: &Command, w: &mut W) -> Result<(), CliError> {
    match command {
        Command::Run {
            instance,
            solver,
            iters,
            project,
            trace,
        } => cmd_run(instance, solver, *iters, project, trace, w),
        Command::Feas {
            instance,
            method,
            iters,
            trace,
        } => cmd_feas(instance, *method, *iters, trace, w),
        Command::Bound { which, n, b, r } => cmd_bound(*which, *n, *b, *r, w),
        Command::Worstcase { which, n, out } => cmd_worstcase(*which, *n, out, w),
        Command::Certify {
            trace,
            instance,
            v,
            h_last,
        } => cmd_certify(trace, instance, v, *h_last, w),
        Command::Sweep {
            which,
            n_min,
            n_max,
            csv,
        } => cmd_sweep(*which, *n_min, *n_max, csv, w),
    }
}

/// Runs `solver` and, when `B`, `R` and `f*` are known, the matching rate.
pub fn run_solver(
    file: &InstanceFile,
    solver: &Solver,
    n: usize,
    feasible: &ProjectableSet,
) -> Result<(RunTrace, Option<f64>), CliError> {
    let oracle = file.oracle()?;
    let trace = match solver {
        Solver::Schedule(schedule) => {
            if schedule.needs_optimal_value() && file.f_star.is_none() {
                return Err(CliError::Precondition(
                    "solver needs f_star, which the instance lacks".into(),
                ));
            }
            subgradient_method(&oracle, feasible, &file.x1, n, schedule)?
        }
        Solver::MomentumPolyak => {
            if file.f_star.is_none() {
                return Err(CliError::Precondition(
                    "solver needs f_star, which the instance lacks".into(),
                ));
            }
            if file.b.is_none() {
                return Err(CliError::Precondition(
                    "solver needs B, which the instance lacks".into(),
                ));
            }
            momentum_polyak_method(&oracle, feasible, &file.x1, n)?
        }
    };
    // without a declared B the largest slope norm is a valid one
    let b = match file.b {
        Some(b) => b,
        None => file.function()?.max_slope_norm(),
    };
    let bound = match (file.radius(), oracle.optimal_value()) {
        (Some(r), Some(_)) if r > 0.0 && b > 0.0 => match solver {
            Solver::Schedule(StepSchedule::Polyak) => Some(rate_polyak(n, b, r)?),
            Solver::Schedule(StepSchedule::AdaptivePolyak | StepSchedule::PreSizedOptimal(_))
            | Solver::MomentumPolyak => Some(rate_optimal(n, b, r)?),
            _ => None,
        },
        _ => None,
    };
    Ok((trace, bound))
}

fn feasible_set(file: &InstanceFile, project: &ProjectableSet) -> Result<ProjectableSet, CliError> {
    let set = match project {
        ProjectableSet::Ball { center, radius } if center.is_empty() => {
            ProjectableSet::ball(vec![0.0; file.dimension], *radius)?
        }
        ProjectableSet::Ball { center, radius } => ProjectableSet::ball(center.clone(), *radius)?,
        ProjectableSet::WholeSpace => match file.sets.as_slice() {
            [] => ProjectableSet::WholeSpace,
            [only] => only.to_set()?,
            _ => {
                return Err(CliError::Usage(
                    "a piecewise_affine instance takes at most one set".into(),
                ))
            }
        },
        other => other.clone(),
    };
    if let Some(d) = set.dimension() {
        if d != file.dimension {
            return Err(CliError::Usage(format!(
                "projection has dimension {d}, instance has {}",
                file.dimension
            )));
        }
    }
    Ok(set)
}

fn cmd_run<W: Write>(
    instance: &Path,
    solver: &Solver,
    n: usize,
    project: &ProjectableSet,
    trace_path: &Path,
    w: &mut W,
) -> Result<(), CliError> {
    check_iters(n)?;
    let file: InstanceFile = read_json(instance)?;
    let feasible = feasible_set(&file, project)?;
    let (trace, bound) = run_solver(&file, solver, n, &feasible)?;
    write_file(trace_path, &run_trace_jsonl(&trace)?)?;
    let last_f = trace.final_f;
    match (bound, file.f_star) {
        (Some(b), Some(f_star)) => out(
            w,
            &format!(
                "last_f={} bound={} gap={}",
                format_num(last_f),
                format_num(b),
                format_num(b - (last_f - f_star))
            ),
        ),
        _ => out(w, &format!("last_f={}", format_num(last_f))),
    }
}

fn cmd_feas<W: Write>(
    instance: &Path,
    method: FeasMethod,
    n: usize,
    trace_path: &Path,
    w: &mut W,
) -> Result<(), CliError> {
    check_iters(n)?;
    let file: InstanceFile = read_json(instance)?;
    let inst = file.feasibility_instance()?;
    let radius = inst.radius_bound();
    let (trace, bound) = match method {
        FeasMethod::Altproj => {
            let [c1, c2] = inst.sets.as_slice() else {
                return Err(CliError::Usage(format!(
                    "altproj needs exactly two sets, the instance has {}",
                    inst.sets.len()
                )));
            };
            let trace = alternating_projection(c1, c2, &inst.x1, n)?;
            (trace, radius.map(|r| rate_altproj(n, r)).transpose()?)
        }
        FeasMethod::Greedy => (greedy_method(&inst, n, GreedyVariant::Plain)?, None),
        FeasMethod::AdaptiveGreedy | FeasMethod::MomentumGreedy => {
            let variant = if method == FeasMethod::AdaptiveGreedy {
                GreedyVariant::Adaptive
            } else {
                GreedyVariant::Momentum
            };
            let bound = radius.map(|r| r / ((n + 1) as f64).sqrt());
            (greedy_method(&inst, n, variant)?, bound)
        }
    };
    write_file(trace_path, &feas_trace_jsonl(&trace)?)?;
    let d = trace.final_distance;
    match bound {
        Some(b) => out(
            w,
            &format!(
                "last_d={} bound={} gap={}",
                format_num(d),
                format_num(b),
                format_num(b - d)
            ),
        ),
        None => out(w, &format!("last_d={}", format_num(d))),
    }
}

fn cmd_bound<W: Write>(
    which: BoundKind,
    n: usize,
    b: f64,
    r: f64,
    w: &mut W,
) -> Result<(), CliError> {
    let usage = |e: subgrad_core::Error| CliError::Usage(e.to_string());
    let value = match which {
        BoundKind::Polyak => rate_polyak(n, b, r).map_err(usage)?,
        BoundKind::Optimal => rate_optimal(n, b, r).map_err(usage)?,
        BoundKind::Altproj => rate_altproj(n, r).map_err(usage)?,
    };
    out(w, &format_sig12(value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub predicted: f64,
    pub achieved: f64,
    pub relative_gap: f64,
}

impl Report {
    fn new(predicted: f64, achieved: f64) -> Self {
        Report {
            predicted,
            achieved,
            relative_gap: (achieved - predicted).abs() / predicted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierFile {
    pub v: Vec<f64>,
    #[serde(default)]
    pub h_last: Option<f64>,
}

fn cmd_worstcase<W: Write>(
    which: WorstcaseKind,
    n: usize,
    dir: &Path,
    w: &mut W,
) -> Result<(), CliError> {
    check_horizon(n)?;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let report = match which {
        WorstcaseKind::Polyak => {
            let inst = build_polyak_tight_instance(n)?;
            let mut file = InstanceFile::piecewise_affine(&inst.function, &inst.x1);
            file.f_star = Some(inst.f_star);
            file.b = Some(1.0);
            file.x_star = Some(inst.x_star.clone());
            file.r = Some(1.0);
            let (trace, _) = run_solver(
                &file,
                &Solver::Schedule(StepSchedule::Polyak),
                n,
                &ProjectableSet::WholeSpace,
            )?;
            let (v, h_last) = polyak_certificate_multipliers(n, 1.0, 1.0)?;
            write_file(&dir.join("instance.json"), &to_json(&file)?)?;
            write_file(&dir.join("trace.jsonl"), &run_trace_jsonl(&trace)?)?;
            write_file(
                &dir.join("certificate.json"),
                &to_json(&MultiplierFile {
                    v,
                    h_last: Some(h_last),
                })?,
            )?;
            Report::new(inst.predicted_last_value, trace.final_f)
        }
        WorstcaseKind::Altproj => {
            let inst = build_altproj_tight_instance(n)?;
            let trace = alternating_projection(&inst.c1, &inst.c2, &inst.x1, n)?;
            write_file(
                &dir.join("instance.json"),
                &to_json(&InstanceFile::feasibility(&inst.as_feasibility()))?,
            )?;
            write_file(&dir.join("trace.jsonl"), &feas_trace_jsonl(&trace)?)?;
            Report::new(inst.predicted, trace.final_distance)
        }
        WorstcaseKind::Feasibility => {
            let inst = build_feasibility_resisting_instance(n, 1.0)?;
            let trace = greedy_method(&inst, n, GreedyVariant::Adaptive)?;
            write_file(
                &dir.join("instance.json"),
                &to_json(&InstanceFile::feasibility(&inst))?,
            )?;
            write_file(&dir.join("trace.jsonl"), &feas_trace_jsonl(&trace)?)?;
            Report::new(1.0 / ((n + 1) as f64).sqrt(), trace.final_distance)
        }
    };
    write_file(&dir.join("report.json"), &to_json(&report)?)?;
    out(
        w,
        &format!(
            "predicted={} achieved={} relative_gap={}",
            format_num(report.predicted),
            format_num(report.achieved),
            format_num(report.relative_gap)
        ),
    )
}

fn cmd_certify<W: Write>(
    trace_path: &Path,
    instance: &Path,
    v_arg: &str,
    h_last: Option<f64>,
    w: &mut W,
) -> Result<(), CliError> {
    let file: InstanceFile = read_json(instance)?;
    let text = std::fs::read_to_string(trace_path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", trace_path.display())))?;
    let trace = parse_run_trace(&text)?;
    let oracle = file.oracle()?;
    let x_star = file.x_star.clone().ok_or_else(|| {
        CliError::Precondition("certificate needs x_star, which the instance lacks".into())
    })?;
    let f_star = file.f_star.ok_or_else(|| {
        CliError::Precondition("certificate needs f_star, which the instance lacks".into())
    })?;

    let (v, file_h) = if v_arg == "auto-constant" {
        (vec![1.0; trace.len() + 2], None)
    } else {
        let text = std::fs::read_to_string(v_arg)
            .map_err(|e| CliError::Usage(format!("cannot read {v_arg}: {e}")))?;
        match serde_json::from_str::<Vec<f64>>(&text) {
            Ok(v) => (v, None),
            Err(_) => {
                let m: MultiplierFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("cannot parse {v_arg}: {e}")))?;
                (m.v, m.h_last)
            }
        }
    };
    let h_last = h_last.or(file_h).unwrap_or(1.0);
    let cert = certificate_lemma1(&oracle, &trace, &v, h_last, &x_star, f_star)?;
    out(w, &format!("slack={}", format_num(cert.slack)))?;
    if cert.holds(CERTIFICATE_TOLERANCE) {
        Ok(())
    } else {
        Err(CliError::NegativeSlack(cert.slack))
    }
}

/// Seed for randomized instances: `SUBGRAD_SEED`, default 0.
pub fn seed_from_env() -> Result<u64, CliError> {
    match std::env::var("SUBGRAD_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("SUBGRAD_SEED={s:?} is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(CliError::Usage(format!("SUBGRAD_SEED: {e}"))),
    }
}

/// `(predicted, achieved)` for one sweep row.
pub fn sweep_point(which: SweepKind, n: usize, seed: u64) -> Result<(f64, f64), CliError> {
    Ok(match which {
        SweepKind::PolyakExact => {
            let inst = build_polyak_tight_instance(n)?;
            let trace = subgradient_method(
                &inst.oracle(),
                &ProjectableSet::WholeSpace,
                &inst.x1,
                n,
                &StepSchedule::Polyak,
            )?;
            (inst.predicted_last_value, trace.final_f)
        }
        SweepKind::AltprojExact => {
            let inst = build_altproj_tight_instance(n)?;
            let trace = alternating_projection(&inst.c1, &inst.c2, &inst.x1, n)?;
            (inst.predicted, trace.final_distance)
        }
        SweepKind::AdaptiveBound => {
            use rand::Rng;
            let mut rng = rng_from_seed(seed);
            rng.set_stream(n as u64);
            let dim = rng.gen_range(1..=10);
            let extra = rng.gen_range(0..5);
            let p = random_pa_problem(&mut rng, dim, extra, false)?;
            let trace = subgradient_method(
                &p.oracle(),
                &p.feasible,
                &p.x1,
                n,
                &StepSchedule::AdaptivePolyak,
            )?;
            (
                rate_optimal(n, p.subgradient_bound(), p.radius())?,
                trace.final_f - p.f_star,
            )
        }
    })
}

fn cmd_sweep<W: Write>(
    which: SweepKind,
    n_min: usize,
    n_max: usize,
    csv: &Path,
    w: &mut W,
) -> Result<(), CliError> {
    if n_min == 0 || n_min > n_max {
        return Err(CliError::Usage(format!(
            "need 1 <= n-min <= n-max, got {n_min}..{n_max}"
        )));
    }
    let seed = seed_from_env()?;
    let rows: Vec<String> = (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let (predicted, achieved) = sweep_point(which, n, seed)?;
            Ok(format!(
                "{n},{},{},{}",
                format_num(predicted),
                format_num(achieved),
                format_num(predicted - achieved)
            ))
        })
        .collect::<Result<_, CliError>>()?;
    let mut text = String::from("N,predicted,achieved,gap\n");
    for row in &rows {
        text.push_str(row);
        text.push('\n');
    }
    write_file(csv, &text)?;
    out(
        w,
        &format!("wrote {} rows to {}", rows.len(), csv.display()),
    )
}
