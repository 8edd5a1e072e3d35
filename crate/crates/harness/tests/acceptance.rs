//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every criterion is reported
//! even when an earlier one fails.

use std::fs;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use remnant_core::signals::{resample_at, values};
use remnant_core::{
    compose_schedule, relay_update, run_with_plant, time_transform, Backend, ControllerConfig,
    CurvePlant, DiscretePreisach, GridPlant, InterfaceLine, IterationTrace, Method, PlaneBounds,
    Polarity, PulseSignal, RemnantCurve, WeightField,
};
use remnant_harness::config::{MethodConfig, PlantConfig};
use remnant_harness::output::HISTOGRAM;
use remnant_harness::{emit_outputs, run_monte_carlo, ExperimentConfig};

const HALF: f64 = 400.0;
const LEVELS: usize = 1000;
const AMP_TOL: f64 = 0.8;
const TOL: f64 = 0.005;
const CASES: usize = 200;

struct Report {
    passed: usize,
    failed: usize,
}

impl Report {
    fn record(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        println!(
            "{} criterion {id} ({name}): {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn bounds() -> PlaneBounds {
    PlaneBounds::symmetric(HALF).unwrap()
}

fn uniform() -> WeightField {
    WeightField::uniform_with_mass(bounds(), 1.0).unwrap()
}

fn uniform_plant() -> GridPlant {
    let w = uniform();
    GridPlant::new(DiscretePreisach::new(bounds(), LEVELS, &w).unwrap(), w).unwrap()
}

fn run(plant: &GridPlant, method: Method, target: f64, start: f64) -> IterationTrace {
    let cfg = ControllerConfig::new(method, target, HALF, start);
    run_with_plant(&mut plant.clone(), &cfg, 2.0).unwrap()
}

fn criterion_1(r: &mut Report) {
    let t0 = Instant::now();
    let base = InterfaceLine::after_reset(bounds(), Polarity::Positive).unwrap();
    let curve = RemnantCurve::new(base, uniform(), Backend::Grid { levels: LEVELS }).unwrap();
    let worst = (0..=100)
        .map(|i| {
            let a = 4.0 * i as f64;
            (curve.value(a).unwrap() - (a / HALF - 0.5)).abs()
        })
        .fold(0.0, f64::max);
    let secs = t0.elapsed().as_secs_f64();
    r.record(
        1,
        "uniform-curve exactness",
        worst <= TOL && secs <= 60.0,
        format!("max |rho - (A/400 - 1/2)| = {worst:.3e} over 101 amplitudes (limit {TOL}), {secs:.1} s"),
    );
}

fn criterion_2(r: &mut Report, plant: &GridPlant) {
    let t = run(plant, Method::Newton, 0.1, 100.0);
    let a = t.final_amplitude().unwrap();
    r.record(
        2,
        "one-step Newton",
        t.converged && t.iterations() <= 2 && (a - 240.0).abs() <= AMP_TOL,
        format!(
            "{} iterations, converged {}, final A = {a:.4}, |A - 240| = {:.4} (limit {AMP_TOL})",
            t.iterations(),
            t.converged,
            (a - 240.0).abs()
        ),
    );
}

fn criterion_3(r: &mut Report, plant: &GridPlant) {
    let t = run(
        plant,
        Method::Secant {
            a0: 50.0,
            a1: 100.0,
        },
        0.1,
        0.0,
    );
    let a = t.final_amplitude().unwrap();
    let seeds: Vec<String> = t
        .rows
        .iter()
        .take(2)
        .map(|r| format!("y({}) = {:.4}", r.amplitude, r.output))
        .collect();
    r.record(
        3,
        "secant matches Newton",
        t.converged && t.iterations() <= 3 && (a - 240.0).abs() <= AMP_TOL,
        format!(
            "{} interactions, converged {}, final A = {a:.4}, |A - 240| = {:.4} (limit {AMP_TOL}); seeds {}",
            t.iterations(),
            t.converged,
            (a - 240.0).abs(),
            seeds.join(", ")
        ),
    );
}

fn criterion_4(r: &mut Report, plant: &GridPlant) {
    let slow = run(plant, Method::Proportional { lambda: 100.0 }, 0.1, 50.0);
    // quantization adds up to one output step (0.002) per measurement, so
    // ratios are read while the error is still large against it
    let ratios: Vec<f64> = slow
        .rows
        .windows(2)
        .filter(|w| w[0].error.abs() >= 0.1)
        .map(|w| w[1].error / w[0].error)
        .collect();
    let ratio_ok = !ratios.is_empty() && ratios.iter().all(|q| (q - 0.75).abs() <= 0.02);
    let count = slow.iterations();
    let count_ok = slow.converged && (20..=23).contains(&count);
    let dead = run(plant, Method::Proportional { lambda: 400.0 }, 0.1, 50.0);
    let dead_ok = dead.converged && dead.iterations() <= 2;
    let wild = run(plant, Method::Proportional { lambda: 1200.0 }, 0.1, 50.0);
    let wild_ok = !wild.converged && wild.iterations() <= 50;
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &q| {
            (l.min(q), h.max(q))
        });
    r.record(
        4,
        "proportional contraction",
        ratio_ok && count_ok && dead_ok && wild_ok,
        format!(
            "lambda=100: ratios in [{lo:.4}, {hi:.4}] over {} steps ({}), {count} iterations to |e| <= {TOL} \
             (required 20-23: {}); lambda=400: {} iterations, converged {} ({}); lambda=1200: converged {} \
             after {} iterations, {:?} ({})",
            ratios.len(),
            ok(ratio_ok),
            ok(count_ok),
            dead.iterations(),
            dead.converged,
            ok(dead_ok),
            wild.converged,
            wild.iterations(),
            wild.termination,
            ok(wild_ok)
        ),
    );
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "not met"
    }
}

fn experiment(lambdas: &[f64]) -> ExperimentConfig {
    let mut methods = vec![MethodConfig {
        method: Method::Secant {
            a0: 50.0,
            a1: 100.0,
        },
        initial_amplitude: 0.0,
    }];
    methods.extend(lambdas.iter().map(|&lambda| MethodConfig {
        method: Method::Proportional { lambda },
        initial_amplitude: 50.0,
    }));
    ExperimentConfig {
        samples: 100,
        target_mean: 0.1,
        target_std: 0.0878,
        seed: 42,
        methods,
        plant: PlantConfig::uniform(HALF, 1.0, LEVELS).unwrap(),
        a_max: HALF,
        tolerance: TOL,
        max_iterations: 50,
        period: 2.0,
    }
}

fn criterion_5(r: &mut Report) {
    let t0 = Instant::now();
    let cfg = experiment(&[100.0, 200.0, 300.0]);
    let first = run_monte_carlo(&cfg, 1).unwrap();
    let second = run_monte_carlo(&cfg, 0).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let dir = tempfile::tempdir().unwrap();
    let (d1, d2) = (dir.path().join("a"), dir.path().join("b"));
    emit_outputs(&first, &d1).unwrap();
    emit_outputs(&second, &d2).unwrap();
    let same = fs::read(d1.join(HISTOGRAM)).unwrap() == fs::read(d2.join(HISTOGRAM)).unwrap();

    let n_methods = cfg.methods.len();
    let mut worse = 0;
    for sample in first.runs.chunks(n_methods) {
        let secant = sample[0].iterations;
        if sample[1..].iter().any(|p| secant > p.iterations) || !sample[0].converged {
            worse += 1;
        }
    }
    let counts: Vec<String> = first
        .methods
        .iter()
        .map(|m| {
            let mut it: Vec<usize> = first.runs_for(m).map(|r| r.iterations).collect();
            it.sort_unstable();
            format!("{m} median {}", it[it.len() / 2])
        })
        .collect();
    r.record(
        5,
        "Monte Carlo dominance",
        worse == 0 && same && secs <= 600.0,
        format!(
            "secant slower or unconverged on {worse}/100 samples against lambda in {{100, 200, 300}}; \
             histogram bit-identical across runs with 1 and all threads: {same}; {}; {secs:.1} s",
            counts.join(", ")
        ),
    );

    // the deadbeat gain needs two interactions on a linear curve, the secant
    // law at least three
    let dead = run_monte_carlo(&experiment(&[400.0]), 0).unwrap();
    let beaten = dead
        .runs
        .chunks(2)
        .filter(|s| s[0].iterations > s[1].iterations)
        .count();
    println!(
        "NOTE criterion 5 with lambda = 400: proportional needs fewer interactions than secant on {beaten}/100 samples"
    );
}

fn gaussian() -> WeightField {
    WeightField::gaussian(bounds(), [120.0, -90.0], 110.0, 1.0).unwrap()
}

fn criterion_6(r: &mut Report) {
    let base = InterfaceLine::after_reset(bounds(), Polarity::Positive).unwrap();
    let curve = RemnantCurve::new(base, gaussian(), Backend::Analytic).unwrap();
    let target = curve.value(260.0).unwrap() - 0.01;
    let (mut lo, mut hi) = (0.0, HALF);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if curve.value(mid).unwrap() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a_d = 0.5 * (lo + hi);
    let mut plant =
        CurvePlant::new(InterfaceLine::negative_saturation(bounds()), gaussian()).unwrap();
    let cfg = ControllerConfig {
        tolerance: 1e-14,
        max_iterations: 30,
        ..ControllerConfig::new(Method::Newton, target, HALF, 120.0)
    };
    let trace = run_with_plant(&mut plant, &cfg, 2.0).unwrap();
    let errs: Vec<f64> = trace
        .rows
        .iter()
        .map(|r| (r.amplitude - a_d).abs())
        .collect();
    // pairs whose successor is still above the bisection resolution
    let deltas: Vec<f64> = errs
        .windows(2)
        .filter(|w| w[1] > 1e-8)
        .map(|w| w[1] / (w[0] * w[0]))
        .collect();
    let finite = deltas.len() >= 3 && deltas.iter().all(|d| d.is_finite());
    let delta = deltas.iter().copied().fold(0.0, f64::max);
    // curvature over slope on the interval the iterates sweep
    let amps: Vec<f64> = trace.rows.iter().map(|r| r.amplitude).collect();
    let lo = amps.iter().copied().fold(a_d, f64::min);
    let hi = amps.iter().copied().fold(a_d, f64::max);
    let h = (hi - lo) / 400.0;
    let slopes: Vec<f64> = (0..=400)
        .map(|i| curve.derivative(lo + h * i as f64).unwrap())
        .collect();
    let inf_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let sup_curv = slopes
        .windows(2)
        .map(|w| ((w[1] - w[0]) / h).abs())
        .fold(0.0, f64::max);
    let theory = 2.0 * sup_curv / inf_slope;
    let bounded = delta <= theory;
    r.record(
        6,
        "quadratic convergence",
        finite && bounded && trace.converged,
        format!(
            "A_d = {a_d:.10}; errors {}; |E_k+1|/|E_k|^2 = {} over {} consecutive steps, delta = {delta:.3e} (2 sup|rho''| / inf rho' = {theory:.3e})",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" "),
            deltas.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(" "),
            deltas.len()
        ),
    );
}

fn random_history(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(0..8);
    (0..n).map(|_| rng.random_range(-HALF..=HALF)).collect()
}

fn rest_interface(h: &[f64]) -> InterfaceLine {
    let mut input = h.to_vec();
    input.push(0.0);
    InterfaceLine::negative_saturation(bounds())
        .drive_through(&input)
        .unwrap()
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> WeightField {
    let c = [
        rng.random_range(-200.0..300.0),
        rng.random_range(-300.0..200.0),
    ];
    WeightField::gaussian(
        bounds(),
        c,
        rng.random_range(60.0..300.0),
        rng.random_range(0.2..3.0),
    )
    .unwrap()
}

fn kinks(line: &InterfaceLine) -> Vec<f64> {
    let mut k = vec![0.0];
    for c in line.columns() {
        k.push(c.end);
        k.push(c.level);
    }
    k
}

fn suite_wiping(rng: &mut ChaCha8Rng) -> usize {
    (0..CASES)
        .filter(|_| {
            let h = random_history(rng);
            let a = rng.random_range(-HALF..=HALF);
            let line = rest_interface(&h).wipe_update(a).unwrap();
            let mut input = vec![-HALF];
            input.extend(&h);
            input.extend([0.0, a, 0.0]);
            (0..64).all(|_| {
                let (x, y): (f64, f64) = (
                    rng.random_range(-HALF..=HALF),
                    rng.random_range(-HALF..=HALF),
                );
                let (alpha, beta) = (x.max(y), x.min(y));
                let s = input
                    .iter()
                    .fold(-1, |s, &u| relay_update(s, u, alpha, beta).unwrap());
                line.relay_state(alpha, beta) == s
            })
        })
        .count()
}

fn suite_backends(rng: &mut ChaCha8Rng) -> usize {
    let levels = 80;
    (0..CASES)
        .filter(|_| {
            let base = rest_interface(&random_history(rng));
            let w = random_gaussian(rng);
            let a = rng.random_range(-HALF..=HALF);
            let x = RemnantCurve::new(base.clone(), w.clone(), Backend::Analytic)
                .unwrap()
                .value(a)
                .unwrap();
            let y = RemnantCurve::new(base, w.clone(), Backend::Grid { levels })
                .unwrap()
                .value(a)
                .unwrap();
            let bound = 2.0
                * DiscretePreisach::new(bounds(), levels, &w)
                    .unwrap()
                    .max_column_mass();
            (x - y).abs() <= bound
        })
        .count()
}

fn suite_derivative(rng: &mut ChaCha8Rng) -> usize {
    let step = 1e-3 * HALF;
    let mut passed = 0;
    let mut tried = 0;
    while tried < CASES {
        let base = rest_interface(&random_history(rng));
        let a = rng.random_range(-HALF + 1.0..HALF - 1.0);
        if kinks(&base).iter().any(|k| (k - a).abs() <= 2.0 * step) {
            continue;
        }
        tried += 1;
        let c = RemnantCurve::new(base, random_gaussian(rng), Backend::Analytic).unwrap();
        let fd = (c.value(a + step).unwrap() - c.value(a - step).unwrap()) / (2.0 * step);
        let d = c.derivative(a).unwrap();
        if (d - fd).abs() <= 1e-3 * d.abs() + 1e-12 {
            passed += 1;
        }
    }
    passed
}

fn suite_monotone(rng: &mut ChaCha8Rng) -> usize {
    let h = 2.0 * HALF / 8.0;
    (0..CASES)
        .filter(|_| {
            let values: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..8).map(|_| rng.random_range(0.05..2.0)).collect())
                .collect();
            let w = WeightField::grid(bounds(), h, h, values).unwrap();
            let c = RemnantCurve::new(rest_interface(&random_history(rng)), w, Backend::Analytic)
                .unwrap();
            let rho: Vec<f64> = (0..=100)
                .map(|i| c.value(-HALF + 8.0 * i as f64).unwrap())
                .collect();
            rho.windows(2).all(|p| p[0] <= p[1] + 1e-12)
        })
        .count()
}

fn suite_rate(rng: &mut ChaCha8Rng) -> usize {
    let w = uniform();
    (0..CASES)
        .filter(|_| {
            let amps: Vec<f64> = (0..rng.random_range(1..5))
                .map(|_| rng.random_range(0.0..=HALF))
                .collect();
            let sched = compose_schedule(&amps, HALF, 2.0, Polarity::Positive).unwrap();
            let end = sched.last().unwrap().time;
            let p = rng.random_range(0.3..3.0);
            let warped = time_transform(&sched, |t| end * (t / end).powf(p)).unwrap();
            let times: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..end)).collect();
            let dense = resample_at(&warped, &times);
            let start = rest_interface(&random_history(rng));
            let mut a = DiscretePreisach::from_interface(&start, &w, 60).unwrap();
            let mut b = a.clone();
            a.drive(&values(&sched)).unwrap();
            b.drive(&values(&dense)).unwrap();
            a.states() == b.states() && a.output() == b.output()
        })
        .count()
}

fn suite_shape(rng: &mut ChaCha8Rng) -> usize {
    (0..CASES)
        .filter(|_| {
            let mut a: f64 = rng.random_range(-HALF..=HALF);
            if a == 0.0 {
                a = 1.0;
            }
            let period = rng.random_range(0.1..10.0);
            let c = RemnantCurve::new(
                rest_interface(&random_history(rng)),
                uniform(),
                Backend::Grid { levels: 60 },
            )
            .unwrap();
            let shapes = [
                PulseSignal::triangle(a, 0.5 * period, period).unwrap(),
                PulseSignal::half_sine(a, period).unwrap(),
                PulseSignal::triangle(a, rng.random_range(0.05..0.95) * period, period).unwrap(),
            ];
            let y: Vec<f64> = shapes
                .iter()
                .map(|p| c.value_with_pulse(p, 37).unwrap())
                .collect();
            y.iter().all(|&v| v == y[0])
        })
        .count()
}

type Suite = fn(&mut ChaCha8Rng) -> usize;

fn criterion_7(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let suites: [(&str, Suite); 6] = [
        ("wiping-out", suite_wiping),
        ("backend agreement", suite_backends),
        ("derivative", suite_derivative),
        ("monotonicity", suite_monotone),
        ("rate independence", suite_rate),
        ("shape invariance", suite_shape),
    ];
    let mut all = true;
    let mut parts = Vec::new();
    for (name, suite) in suites {
        let passed = suite(&mut rng);
        all &= passed == CASES;
        parts.push(format!("{name} {passed}/{CASES}"));
    }
    r.record(7, "property suites", all, parts.join(", "));
}

fn main() {
    let mut report = Report {
        passed: 0,
        failed: 0,
    };
    let plant = uniform_plant();
    criterion_1(&mut report);
    criterion_2(&mut report, &plant);
    criterion_3(&mut report, &plant);
    criterion_4(&mut report, &plant);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    println!(
        "acceptance: {} passed, {} failed",
        report.passed, report.failed
    );
}
