//! Acceptance checks C1-C10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{balloon_radius_exact, rel_diff, AffineCase};
use partitioned_fsi::accel::UpdateStrategy;
use partitioned_fsi::config::{ProblemConfig, RunConfig};
use partitioned_fsi::models::{
    BalloonConfig, BalloonProblem, Outlet, TubeConfig, TubeProblem,
};
use partitioned_fsi::report::summary_string;
use partitioned_fsi::schemes::{
    run_simulation, ConvergenceConfig, CoupledProblem, Scheme, SimulationResult,
    SimulationSettings,
};
use partitioned_fsi::sweep::{default_workers, run_all};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS_COUPLING: f64 = 1e-6;
const EPS_PROBLEM: f64 = 1e-10;
const BALLOON_DT: f64 = 0.01;
const BALLOON_STEPS: usize = 500;
const TUBE_DT: f64 = 2.5e-5;
const TUBE_STEPS: usize = 300;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn settings(scheme: Scheme, robin: Option<f64>, n_steps: usize, dt: f64) -> SimulationSettings {
    SimulationSettings {
        scheme,
        robin_parameter: robin,
        convergence: ConvergenceConfig {
            eps_coupling: EPS_COUPLING,
            eps_problem: EPS_PROBLEM,
            max_coupling_iterations: 500,
        },
        n_steps,
        dt,
        sample_stride: 0,
        keep_iterates_steps: 0,
    }
}

fn balloon() -> Box<dyn CoupledProblem> {
    Box::new(BalloonProblem::new(BalloonConfig::default()).unwrap())
}

fn tube(outlet: Outlet) -> Box<dyn CoupledProblem> {
    Box::new(TubeProblem::new(TubeConfig::default(), outlet, EPS_PROBLEM).unwrap())
}

fn run(mut problem: Box<dyn CoupledProblem>, update: UpdateStrategy, s: SimulationSettings) -> SimulationResult {
    run_simulation(problem.as_mut(), &update, &s).unwrap()
}

fn mean(r: &SimulationResult) -> Option<f64> {
    r.mean_iterations()
}

/// Tube runs collected along the way for the mass audit.
#[derive(Default)]
struct TubeRuns(Vec<(String, SimulationResult)>);

impl TubeRuns {
    fn keep(&mut self, label: String, r: &SimulationResult) {
        self.0.push((label, r.clone()));
    }
}

fn c1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_k = String::new();
    let mut failures = Vec::new();
    for i in 0..10 {
        let m = [2, 5, 8][i % 3];
        let radius = rng.gen_range(0.5..1.5);
        let case = AffineCase::random(m, radius, &mut rng);
        let mut s = settings(Scheme::DnQnS, None, 1, 1.0);
        s.convergence.eps_coupling = 1e-13;
        s.sample_stride = 1;
        let mut p = case.problem();
        let r = run_simulation(&mut p, &UpdateStrategy::ils(), &s).unwrap();
        let hit = r
            .steps
            .first()
            .and_then(|st| st.records.iter().find(|rec| rec.residual_norm <= 1e-12))
            .map(|rec| rec.k);
        let d = &r.trajectory.last().unwrap().displacement;
        let oracle_gap = rel_diff(d, &case.fixed_point);
        if !hit.is_some_and(|k| k <= m + 2) || oracle_gap > 1e-9 {
            failures.push(format!("case {i}: m={m} rho={radius:.2} hit={hit:?} gap={oracle_gap:.1e}"));
        }
        worst_k.push_str(&format!("{}/{} ", hit.unwrap_or(0), m + 2));

        if radius > 1.0 {
            let mut p = case.problem();
            let relaxed = run_simulation(
                &mut p,
                &UpdateStrategy::Relax { omega: 1.0 },
                &settings(Scheme::Dn, None, 1, 1.0),
            )
            .unwrap();
            if relaxed.termination.is_completed() {
                failures.push(format!("case {i}: rho={radius:.2} relaxation converged"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("k/(m+2): {}", worst_k.trim())
        } else {
            failures.join("; ")
        },
    )
}

fn c2(tubes: &mut TubeRuns) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (scheme, robin) in [(Scheme::RnQn, Some(1e5)), (Scheme::DnQnS, None)] {
        let mut s = settings(scheme, robin, 1, TUBE_DT);
        s.keep_iterates_steps = 1;
        let a = run(tube(Outlet::Open), UpdateStrategy::ils(), s);
        let b = run(tube(Outlet::Open), UpdateStrategy::imvls(), s);
        tubes.keep(format!("c2 {} ils", scheme.name()), &a);
        tubes.keep(format!("c2 {} imvls", scheme.name()), &b);
        let (xa, xb) = (&a.steps[0].iterates, &b.steps[0].iterates);
        ok &= xa.len() == xb.len() && !xa.is_empty();
        for (x, y) in xa.iter().zip(xb) {
            worst = worst.max(rel_diff(x, y));
        }
    }
    outcome(ok && worst <= 1e-12, format!("max relative gap {worst:.1e}"))
}

fn c3(tubes: &mut TubeRuns) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let cases: [(&str, fn() -> Box<dyn CoupledProblem>, f64, usize); 2] = [
        ("balloon0d", balloon, BALLOON_DT, BALLOON_STEPS),
        ("tube1d_closed", || tube(Outlet::Closed), TUBE_DT, TUBE_STEPS),
    ];
    for (name, make, dt, n) in cases {
        for scheme in [Scheme::Dn, Scheme::DnQnS, Scheme::DnQnF] {
            let update = if scheme == Scheme::Dn { UpdateStrategy::aitken() } else { UpdateStrategy::imvls() };
            let r = run(make(), update, settings(scheme, None, n, dt));
            ok &= !r.termination.is_completed();
            lines.push(format!("{name}/{}={}", scheme.name(), r.termination.label()));
        }
        let r = run(make(), UpdateStrategy::imvls(), settings(Scheme::RnQn, Some(1e5), n, dt));
        ok &= r.termination.is_completed() && r.iterations.per_step.len() == n;
        lines.push(format!("{name}/rn_qn={}", r.termination.label()));
        if name.starts_with("tube") {
            tubes.keep("c3 closed rn_qn".into(), &r);
        }
    }
    outcome(ok, lines.join(" "))
}

const C4_ALPHAS: [f64; 5] = [1e3, 1e4, 1e5, 1e6, 1e7];

fn spread(means: &[f64]) -> f64 {
    let max = means.iter().cloned().fold(f64::MIN, f64::max);
    let min = means.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

fn c4() -> Outcome {
    let s = |scheme, a| settings(scheme, Some(a), BALLOON_STEPS, BALLOON_DT);
    let plain: Vec<Option<f64>> = C4_ALPHAS
        .iter()
        .map(|&a| mean(&run(balloon(), UpdateStrategy::None, s(Scheme::Rn, a))))
        .collect();
    let qn: Vec<Option<f64>> = C4_ALPHAS
        .iter()
        .map(|&a| mean(&run(balloon(), UpdateStrategy::imvls(), s(Scheme::RnQn, a))))
        .collect();

    let plain_done: Vec<f64> = plain.iter().flatten().copied().collect();
    let plain_ok = plain_done.len() < plain.len() || spread(&plain_done) >= 10.0;

    // longest contiguous run of completed rn_qn decades
    let mut best: Vec<f64> = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    for m in &qn {
        match m {
            Some(v) => current.push(*v),
            None => current.clear(),
        }
        if current.len() > best.len() {
            best = current.clone();
        }
    }
    let qn_ok = best.len() >= 3 && spread(&best) <= 3.0;
    let fmt = |v: &[Option<f64>]| {
        v.iter()
            .map(|m| m.map_or("div".to_string(), |x| format!("{x:.1}")))
            .collect::<Vec<_>>()
            .join("/")
    };
    outcome(
        plain_ok && qn_ok,
        format!(
            "alpha 1e3..1e7: rn {} | rn_qn {} (spread {:.2})",
            fmt(&plain),
            fmt(&qn),
            if best.is_empty() { f64::NAN } else { spread(&best) }
        ),
    )
}

fn c5() -> Outcome {
    let eps: Vec<(f64, f64)> = [1e4, 1e5, 1e6]
        .iter()
        .map(|&a| {
            let r = run(balloon(), UpdateStrategy::imvls(), settings(Scheme::RnQn, Some(a), BALLOON_STEPS, BALLOON_DT));
            (a, if r.termination.is_completed() { r.eps_rel } else { f64::NAN })
        })
        .collect();
    let ratios: Vec<f64> = eps.windows(2).map(|w| w[0].1 / w[1].1).collect();
    let ok = ratios.iter().all(|r| (7.5..=12.5).contains(r));
    outcome(
        ok,
        format!(
            "eps_rel {} ratios {}",
            eps.iter().map(|(a, e)| format!("{a:e}:{e:.3e}")).collect::<Vec<_>>().join(" "),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn c6() -> Outcome {
    let config = BalloonConfig::default();
    let q_hat = 0.05 * PI;
    let exact = balloon_radius_exact(1.0, config.r0, q_hat);
    let error = |dt: f64| {
        let mut p = BalloonProblem::new(config.clone()).unwrap();
        let n = (1.0 / dt).round() as usize;
        let r = run_simulation(&mut p, &UpdateStrategy::imvls(), &settings(Scheme::RnQn, Some(1e5), n, dt)).unwrap();
        r.termination.is_completed().then(|| (p.radius() - exact).abs() / exact)
    };
    match (error(0.01), error(0.005)) {
        (Some(e1), Some(e2)) => {
            let ratio = e1 / e2;
            outcome(
                e1 <= 0.01 && (1.6..=2.4).contains(&ratio),
                format!("error dt=0.01 {e1:.3e}, dt=0.005 {e2:.3e}, ratio {ratio:.3}"),
            )
        }
        _ => outcome(false, "a balloon run did not complete"),
    }
}

fn c7(tubes: &mut TubeRuns) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for alpha in [1e5, 1e6, 1e7] {
        let s = settings(Scheme::RnQn, Some(alpha), TUBE_STEPS, TUBE_DT);
        let mut means = Vec::new();
        for u in [UpdateStrategy::imvls(), UpdateStrategy::ils(), UpdateStrategy::aitken()] {
            let r = run(tube(Outlet::Closed), u.clone(), s);
            tubes.keep(format!("c7 closed {} {alpha:e}", u.name()), &r);
            means.push(mean(&r));
        }
        let le = |a: Option<f64>, b: Option<f64>| matches!((a, b), (Some(x), Some(y)) if x <= 1.05 * y);
        ok &= le(means[0], means[1]) && le(means[1], means[2]);
        lines.push(format!(
            "{alpha:e}: {}",
            means.iter().map(|m| m.map_or("div".into(), |v| format!("{v:.2}"))).collect::<Vec<_>>().join(" <= ")
        ));
    }
    outcome(ok, format!("imvls <= ils <= aitken at {}", lines.join(", ")))
}

fn c8(tubes: &mut TubeRuns) -> Outcome {
    let mut s = settings(Scheme::DnQnS, None, TUBE_STEPS, TUBE_DT);
    s.sample_stride = 1;
    let dn_s = run(tube(Outlet::Open), UpdateStrategy::imvls(), s);
    s.scheme = Scheme::DnQnF;
    let dn_f = run(tube(Outlet::Open), UpdateStrategy::imvls(), s);
    tubes.keep("c8 dn_qn_s".into(), &dn_s);
    tubes.keep("c8 dn_qn_f".into(), &dn_f);
    let both = dn_s.termination.is_completed() && dn_f.termination.is_completed();
    let gap = dn_s
        .trajectory
        .iter()
        .zip(&dn_f.trajectory)
        .map(|(a, b)| rel_diff(&a.displacement, &b.displacement).max(rel_diff(&a.traction, &b.traction)))
        .fold(0.0, f64::max);
    let rn_best = [1e3, 1e4, 1e5, 1e6, 1e7]
        .into_iter()
        .filter_map(|a| {
            let r = run(tube(Outlet::Open), UpdateStrategy::imvls(), settings(Scheme::RnQn, Some(a), TUBE_STEPS, TUBE_DT));
            tubes.keep(format!("c8 rn_qn {a:e}"), &r);
            mean(&r).map(|m| (a, m))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1));
    let dn_f_mean = mean(&dn_f);
    let faster = matches!((rn_best, dn_f_mean), (Some((_, r)), Some(f)) if r <= f);
    outcome(
        both && gap <= 10.0 * EPS_COUPLING && faster,
        format!(
            "dn_qn_s {} ({:?}), dn_qn_f {} ({:?}), interface gap {gap:.2e}, best rn_qn {:?}",
            dn_s.termination.label(),
            mean(&dn_s).map(|m| (m * 100.0).round() / 100.0),
            dn_f.termination.label(),
            dn_f_mean.map(|m| (m * 100.0).round() / 100.0),
            rn_best.map(|(a, m)| (a, (m * 100.0).round() / 100.0))
        ),
    )
}

fn c9(tubes: &TubeRuns) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut steps = 0;
    let mut missing = Vec::new();
    for (label, r) in &tubes.0 {
        if !r.termination.is_completed() {
            continue;
        }
        if r.mass_audit.len() != r.iterations.per_step.len() {
            missing.push(label.clone());
        }
        steps += r.mass_audit.len();
        worst = r.mass_audit.iter().cloned().fold(worst, f64::max);
    }
    outcome(
        missing.is_empty() && steps > 0 && worst <= 10.0 * EPS_PROBLEM,
        format!("{} runs, {steps} steps, worst defect {worst:.1e}", tubes.0.len()),
    )
}

fn c10() -> Outcome {
    let balloon = {
        let mut c = RunConfig::new(ProblemConfig::Balloon(BalloonConfig::default()), Scheme::RnQn);
        c.robin_parameter = Some(1e5);
        c
    };
    let open = {
        let mut c = RunConfig::new(ProblemConfig::TubeOpen(TubeConfig::default()), Scheme::DnQnS);
        c.n_steps = Some(60);
        c
    };
    let failing = {
        let mut c = RunConfig::new(ProblemConfig::TubeClosed(TubeConfig::default()), Scheme::Rn);
        c.robin_parameter = Some(1e7);
        c
    };
    let configs = vec![balloon, open, failing];
    let first = summary_string(&run_all(configs.clone(), 1).unwrap()).unwrap();
    let second = summary_string(&run_all(configs, default_workers()).unwrap()).unwrap();
    outcome(first == second, format!("{} bytes, {} rows", first.len(), first.lines().count() - 1))
}

fn main() -> ExitCode {
    let mut tubes = TubeRuns::default();
    let budgets = [1.0, 10.0, 60.0, 300.0, 120.0, 60.0, 300.0, 300.0, 0.0, 60.0];
    let mut all = true;
    let mut report = |id: usize, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let elapsed = t.elapsed();
        let budget = budgets[id - 1];
        let in_time = budget == 0.0 || elapsed <= Duration::from_secs_f64(budget);
        let pass = o.pass && in_time;
        all &= pass;
        println!(
            "C{id} {} {} [{:.2}s{}]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            if in_time { String::new() } else { format!(" over the {budget}s budget") }
        );
    };
    report(1, &mut c1);
    report(2, &mut || c2(&mut tubes));
    report(3, &mut || c3(&mut tubes));
    report(4, &mut c4);
    report(5, &mut c5);
    report(6, &mut c6);
    report(7, &mut || c7(&mut tubes));
    report(8, &mut || c8(&mut tubes));
    report(9, &mut || c9(&tubes));
    report(10, &mut c10);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
