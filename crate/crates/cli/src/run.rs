//! Executes scenarios and turns reports into result rows.

use std::path::{Path, PathBuf};

use num_complex::Complex64;

use quadlab_core::finite::spaces_equal;
use quadlab_core::polarization::inner_product_characterization;
use quadlab_core::stability::{
    closed_form_directional, dead_zone_sweep, fit_epsilon, fit_theta, series_bound, stabilize,
    verify_scalar_homogeneity, verify_unitary_covariance, ControlFunction, CovarianceReport, Direction, Setting,
    StabilityConfig,
};
use quadlab_core::{BoxSampler, Error, GroupSpec, ModulePoint, PointShape};

use crate::error::Result;
use crate::results::{emit_plotdata, format_point, to_csv, write_atomic, ResultRow, Status};
use crate::scenario::{
    Action, BoundEqualitySpec, ControlSpec, CovarianceSpec, DeadZoneSpec, Experiment, IdentityExpectation,
    InnerProductSpec, OracleSpec, ProbeSpec, Scenario, SpaceExpectation, StabilitySpec,
};

/// Independent random streams derived from the scenario seed.
const FIT_STREAM: u64 = 0;
const PRECHECK_STREAM: u64 = 1;
const PROBE_STREAM: u64 = 2;
const ACTION_STREAM: u64 = 3;

fn stream(seed: u64, s: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Pass,
    /// No failures, at least one expected rejection.
    Rejected,
    Fail,
}

impl RunStatus {
    pub fn exit_code(self) -> u8 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::Fail => 3,
            RunStatus::Rejected => 4,
        }
    }
}

/// Exit code for parse and validation errors.
pub const EXIT_INVALID: u8 = 2;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub scenario: String,
    pub rows: Vec<ResultRow>,
    /// Human-readable lines: fitted constants, warnings, verdicts.
    pub summary: Vec<String>,
}

impl Outcome {
    pub fn status(&self) -> RunStatus {
        if self.rows.iter().any(|r| r.status == Status::Fail) {
            RunStatus::Fail
        } else if self.rows.iter().any(|r| r.status.is_rejection()) {
            RunStatus::Rejected
        } else {
            RunStatus::Pass
        }
    }
}

fn rejection(e: &Error) -> Option<Status> {
    match e {
        Error::Divergent(_) => Some(Status::RejectedDivergent),
        Error::OpenProblem(_) => Some(Status::RejectedOpenProblem),
        _ => None,
    }
}

pub fn run_scenario(s: &Scenario) -> Result<Outcome> {
    s.validate()?;
    let mut out = Outcome {
        scenario: s.name.clone(),
        rows: Vec::new(),
        summary: Vec::new(),
    };
    match &s.experiment {
        Experiment::Stability(spec) => run_stability(s, spec, &mut out)?,
        Experiment::Covariance(spec) => run_covariance(s, spec, &mut out)?,
        Experiment::Oracle(spec) => run_oracle(s, spec, &mut out)?,
        Experiment::InnerProduct(spec) => run_inner_product(s, spec, &mut out)?,
        Experiment::BoundEquality(spec) => run_bound_equality(s, spec, &mut out),
        Experiment::DeadZone(spec) => run_dead_zone(s, spec, &mut out),
    }
    Ok(out)
}

/// Writes the results CSV (and plot data when requested), resolving relative
/// paths against `out_dir`. Returns the paths written.
pub fn write_outputs(s: &Scenario, out: &Outcome, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { out_dir.join(p) };
    let results = s
        .outputs
        .results
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", s.name)));
    let csv = to_csv(&out.rows)?;
    let plot = match &s.outputs.plotdata {
        Some(p) => Some((resolve(p), emit_plotdata(&out.rows)?)),
        None => None,
    };
    let mut written = vec![resolve(&results)];
    write_atomic(&written[0], &csv)?;
    if let Some((path, bytes)) = plot {
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

fn sampler(shape: PointShape, half_width: f64, seed: u64) -> BoxSampler {
    BoxSampler::new(shape, half_width, seed)
}

fn build_config(scenario: &Scenario, spec: &StabilitySpec) -> Result<StabilityConfig> {
    let probes = match &spec.probes {
        ProbeSpec::Points { points } => points.clone(),
        ProbeSpec::Sampled { count, half_width } => {
            let mut smp = sampler(spec.shape(), *half_width, stream(scenario.seed, PROBE_STREAM));
            (0..*count).map(|_| smp.point()).collect()
        }
        ProbeSpec::Ray { direction, norms } => {
            let len = spec.norm.norm_eval(direction)?;
            norms.iter().map(|t| direction.scale_real(t / len)).collect()
        }
    };
    let mut cfg = StabilityConfig::new(spec.n, spec.norm.clone(), probes);
    cfg.codomain_norm = spec.codomain_norm.clone();
    cfg.family = spec.family;
    cfg.direction = spec.direction;
    cfg.m_max = spec.m_max;
    cfg.tol = spec.tol;
    cfg.series_tol = spec.series_tol;
    cfg.field = spec.field;
    cfg.seed = stream(scenario.seed, PRECHECK_STREAM);
    cfg.precheck_samples = spec.precheck_samples;
    Ok(cfg)
}

fn resolve_control(
    scenario: &Scenario,
    spec: &StabilitySpec,
    cfg: &StabilityConfig,
    summary: &mut Vec<String>,
) -> Result<ControlFunction> {
    if let Some(phi) = spec.control.fixed() {
        return Ok(phi);
    }
    let codomain = cfg.codomain_norm_for(&spec.mapping)?;
    let seed = stream(scenario.seed, FIT_STREAM);
    let phi = match spec.control {
        ControlSpec::FitPower { r, trials, half_width } => {
            let mut smp = sampler(spec.shape(), half_width, seed);
            let epsilon = fit_epsilon(&spec.mapping, spec.n, r, &spec.norm, &codomain, &mut smp, trials)?;
            summary.push(format!("fitted epsilon = {epsilon} (r = {r}, {trials} samples)"));
            ControlFunction::Power { epsilon, r }
        }
        ControlSpec::FitConstant { trials, half_width } => {
            let mut smp = sampler(spec.shape(), half_width, seed);
            let theta = fit_theta(&spec.mapping, spec.n, &spec.norm, &codomain, &mut smp, trials)?;
            summary.push(format!("fitted theta = {theta} ({trials} samples)"));
            ControlFunction::Constant { theta }
        }
        _ => unreachable!("fixed controls returned above"),
    };
    Ok(phi)
}

fn run_stability(s: &Scenario, spec: &StabilitySpec, out: &mut Outcome) -> Result<()> {
    let cfg = build_config(s, spec)?;
    let phi = resolve_control(s, spec, &cfg, &mut out.summary)?;
    let report = match stabilize(&spec.mapping, &phi, &cfg) {
        Ok(r) => r,
        Err(e) => {
            let Some(status) = rejection(&e) else {
                return Err(e.into());
            };
            out.summary.push(format!("rejected: {e}"));
            for x in &cfg.probes {
                out.rows.push(ResultRow {
                    norm_x: Some(cfg.norm.norm_eval(x)?),
                    ..ResultRow::labelled(&s.name, format_point(x), status)
                });
            }
            return Ok(());
        }
    };
    let setting = match report.setting {
        Setting::Quasi { k } => format!("modulus K = {k}"),
        Setting::PNorm { p } => format!("exponent p = {p}"),
    };
    let scheme = match report.direction {
        Direction::Forward => "forward",
        Direction::Backward => "backward",
    };
    out.summary.push(format!("{setting}, {scheme} scheme"));
    out.summary.extend(report.warnings.iter().map(|w| format!("warning: {w}")));
    let mut worst = f64::INFINITY;
    for p in &report.probes {
        worst = worst.min(p.margin);
        let ok = p.within_bound && p.converged;
        out.rows.push(ResultRow {
            scenario: s.name.clone(),
            probe: format_point(&p.probe),
            norm_x: Some(p.norm_x),
            q_estimate: format_point(&p.q_estimate),
            deviation: Some(p.deviation),
            bound: Some(p.bound),
            margin: Some(p.margin),
            iterations: Some(p.iterations),
            status: if ok { Status::Pass } else { Status::Fail },
        });
    }
    out.summary.push(format!(
        "{}/{} probes within bound and converged, smallest margin {worst}",
        report.probes.iter().filter(|p| p.within_bound && p.converged).count(),
        report.probes.len()
    ));
    Ok(())
}

fn run_covariance(s: &Scenario, spec: &CovarianceSpec, out: &mut Outcome) -> Result<()> {
    let run = &spec.run;
    let cfg = build_config(s, run)?;
    let phi = resolve_control(s, run, &cfg, &mut out.summary)?;
    let mut smp = sampler(run.shape(), 1.0, stream(s.seed, ACTION_STREAM));
    let (label, report): (&str, CovarianceReport) = match spec.action {
        Action::Unitary { count } => {
            let us: Vec<_> = (0..count).map(|_| smp.unitary()).collect();
            ("Q(ux) = u Q(x) u*", verify_unitary_covariance(&run.mapping, &phi, &cfg, &us, spec.tol)?)
        }
        Action::Scalar { count } => {
            let zs: Vec<_> = (0..count)
                .map(|_| Complex64::new(smp.uniform(-2.0, 2.0), smp.uniform(-2.0, 2.0)))
                .collect();
            ("Q(ax) = |a|^2 Q(x)", verify_scalar_homogeneity(&run.mapping, &phi, &cfg, &zs, spec.tol)?)
        }
    };
    out.summary.push(format!(
        "{label}: {} samples, max defect {:e}, max relative {:e} (tol {:e})",
        report.samples, report.max_defect, report.max_relative, report.tol
    ));
    out.rows.push(ResultRow {
        deviation: Some(report.max_relative),
        bound: Some(report.tol),
        margin: Some(report.tol - report.max_relative),
        ..ResultRow::labelled(
            &s.name,
            format!("{} samples", report.samples),
            if report.passed { Status::Pass } else { Status::Fail },
        )
    });
    Ok(())
}

fn run_oracle(s: &Scenario, spec: &OracleSpec, out: &mut Outcome) -> Result<()> {
    let group = GroupSpec::new(spec.q, spec.d)?;
    let c = spaces_equal(&spec.a, &spec.b, &group)?;
    out.summary.push(c.to_string());
    if c.subsampled {
        out.summary.push("constraint systems were subsampled".to_string());
    }
    let ok = match spec.expect {
        SpaceExpectation::Equal => c.equal,
        SpaceExpectation::Differ => !c.equal,
    };
    out.rows.push(ResultRow::labelled(
        &s.name,
        format!("{} vs {} over F_{}^{}", spec.a, spec.b, spec.q, spec.d),
        if ok { Status::Pass } else { Status::Fail },
    ));
    Ok(())
}

fn run_inner_product(s: &Scenario, spec: &InnerProductSpec, out: &mut Outcome) -> Result<()> {
    let shape = PointShape::real(spec.norm.dim());
    for (i, mode) in spec.modes.iter().enumerate() {
        let mut smp = sampler(shape, 10.0, stream(s.seed, FIT_STREAM).wrapping_add(i as u64));
        let rep = inner_product_characterization(&spec.norm, *mode, &mut smp, spec.trials)?;
        let eq = mode.equation();
        match &rep.witness {
            None => out.summary.push(format!(
                "{eq} holds on {} tuples (sup residual {:e})",
                rep.tuples, rep.sup_residual
            )),
            Some(w) => {
                let pts: Vec<String> = w.tuple.iter().map(|x| format!("({})", format_point(x))).collect();
                out.summary.push(format!(
                    "{eq} violated at {} with residual {}",
                    pts.join(", "),
                    w.residual
                ));
            }
        }
        let ok = match spec.expect {
            IdentityExpectation::Holds => rep.passed,
            IdentityExpectation::Violated => !rep.passed,
        };
        out.rows.push(ResultRow {
            deviation: Some(rep.witness.as_ref().map_or(rep.sup_residual, |w| w.residual.abs())),
            ..ResultRow::labelled(&s.name, eq.to_string(), if ok { Status::Pass } else { Status::Fail })
        });
    }
    Ok(())
}

fn equality_row(name: &str, label: String, norm_x: f64, a: f64, b: f64, rel_tol: f64) -> ResultRow {
    let allowed = rel_tol * a.abs().max(b.abs());
    let deviation = (a - b).abs();
    ResultRow {
        norm_x: Some(norm_x),
        q_estimate: String::new(),
        deviation: Some(deviation),
        bound: Some(allowed),
        margin: Some(allowed - deviation),
        ..ResultRow::labelled(name, label, if deviation <= allowed { Status::Pass } else { Status::Fail })
    }
}

fn run_bound_equality(s: &Scenario, spec: &BoundEqualitySpec, out: &mut Outcome) {
    let unit = quadlab_core::QuasiNormSpec::euclidean(1);
    let (mut compared, mut worst) = (0usize, 0.0f64);
    for &n in &spec.ns {
        for &r in &spec.rs {
            let dir = if r < 2.0 { Direction::Forward } else { Direction::Backward };
            for &epsilon in &spec.epsilons {
                let phi = ControlFunction::Power { epsilon, r };
                for &t in &spec.norms {
                    let label = |what: &str| format!("n={n} r={r} epsilon={epsilon} {dir:?} {what}");
                    let k1 = Setting::Quasi { k: 1.0 };
                    let p1 = Setting::PNorm { p: 1.0 };
                    match (
                        closed_form_directional(&phi, n, k1, dir, t),
                        closed_form_directional(&phi, n, p1, dir, t),
                    ) {
                        (Ok(a), Ok(b)) => {
                            let row = equality_row(&s.name, label("closed"), t, a, b, spec.rel_tol);
                            worst = worst.max(row.deviation.unwrap_or(0.0) / a.abs().max(f64::MIN_POSITIVE));
                            out.rows.push(row);
                        }
                        (Err(e), _) | (_, Err(e)) => out.rows.push(ResultRow {
                            norm_x: Some(t),
                            ..ResultRow::labelled(&s.name, label("closed"), rejection(&e).unwrap_or(Status::Fail))
                        }),
                    }
                    let x = ModulePoint::from_reals(&[t]);
                    match (
                        series_bound(&phi, &unit, n, k1, dir, &x, spec.series_tol),
                        series_bound(&phi, &unit, n, p1, dir, &x, spec.series_tol),
                    ) {
                        (Ok(a), Ok(b)) => {
                            let row = equality_row(&s.name, label("series"), t, a.truncated, b.truncated, spec.rel_tol);
                            worst = worst.max(row.deviation.unwrap_or(0.0) / a.truncated.abs().max(f64::MIN_POSITIVE));
                            out.rows.push(row);
                        }
                        (Err(e), _) | (_, Err(e)) => out.rows.push(ResultRow {
                            norm_x: Some(t),
                            ..ResultRow::labelled(&s.name, label("series"), rejection(&e).unwrap_or(Status::Fail))
                        }),
                    }
                    compared += 2;
                }
            }
        }
    }
    out.summary.push(format!(
        "K = 1 against p = 1: {compared} comparisons, largest relative difference {worst:e}"
    ));
}

fn run_dead_zone(s: &Scenario, spec: &DeadZoneSpec, out: &mut Outcome) {
    let sweep = dead_zone_sweep(spec.n, spec.theta, &spec.ks);
    for p in &sweep {
        let label = format!("K={} denominator={}", p.k, p.denominator);
        match &p.bound {
            Ok(v) => out.rows.push(ResultRow {
                bound: Some(*v),
                ..ResultRow::labelled(&s.name, label, Status::Pass)
            }),
            Err(e) => {
                out.summary.push(format!("K = {}: {e}", p.k));
                out.rows
                    .push(ResultRow::labelled(&s.name, label, rejection(e).unwrap_or(Status::Fail)));
            }
        }
    }
    for w in sweep.windows(2) {
        if (w[0].denominator > 0.0) != (w[1].denominator > 0.0) {
            out.summary.push(format!(
                "denominator (n-1)^2 - K changes sign between K = {} ({}) and K = {} ({})",
                w[0].k, w[0].denominator, w[1].k, w[1].denominator
            ));
        }
    }
}
