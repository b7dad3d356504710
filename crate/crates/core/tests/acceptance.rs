//! Acceptance criteria for the primary component.
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero if any
//! criterion fails. Thresholds are pinned below.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use att_nnsf::config::SimConfig;
use att_nnsf::control::control_innovation;
use att_nnsf::dynamics::Reference;
use att_nnsf::export::csv_string;
use att_nnsf::filter::{innovation, weighted_outer};
use att_nnsf::rng::NoiseStreams;
use att_nnsf::sim::{tick, Diagnostics, LoopState, RunRecord};
use att_nnsf::so3::*;
use att_nnsf::stats::{column_stats, pool, steady_state_stats};
use att_nnsf::{run_simulation, Backend};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const TABLE_SEEDS: u64 = 10;
const TABLE_MEAN_BAND: (f64, f64) = (1.0e-3, 6.0e-3);
const TABLE_STD_BAND: (f64, f64) = (5.0e-4, 5.0e-3);
const MAX_RUN_TIME: Duration = Duration::from_secs(2);

const TREND_SEEDS: u64 = 20;
const TREND_NEURONS: [usize; 3] = [3, 10, 50];
const MAX_TREND_TIME: Duration = Duration::from_secs(180);

const CONVERGED: f64 = 0.01;
const CONVERGE_BY: f64 = 4.0;
const DISTURBANCE_WINDOW: (f64, f64) = (20.0, 50.0);
const DISTURBANCE_LIMIT: f64 = 0.15;
const MIN_GOOD_SEEDS: usize = 8;

const EQUILIBRIUM: [(f64, f64); 2] = [(0.01, 1e-3), (0.001, 1e-5)];
const EQUILIBRIUM_COLUMNS: [&str; 6] = ["Ro_dist", "Rc_dist", "omega_err", "dist_err", "wb_norm", "wsigma_fro"];

const ALGEBRA_CASES: usize = 1000;
const ALGEBRA_TOL: f64 = 1e-10;

const PARITY_STEPS: usize = 5000;
const PARITY_TOL: f64 = 1e-9;
const MANIFOLD_TOL: f64 = 1e-9;

#[derive(Default)]
struct Report {
    passed: usize,
    failed: usize,
    /// Worst integrity figures over every closed-loop run made here.
    integrity: Diagnostics,
    runs: usize,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }

    fn run(&mut self, cfg: &SimConfig) -> RunRecord {
        let rec = run_simulation(cfg).unwrap_or_else(|e| panic!("seed {} q {}: {e}", cfg.seed, cfg.neurons));
        self.absorb(&rec.diagnostics);
        rec
    }

    fn absorb(&mut self, d: &Diagnostics) {
        let w = &mut self.integrity;
        w.truth_orthonormality = w.truth_orthonormality.max(d.truth_orthonormality);
        w.estimate_orthonormality = w.estimate_orthonormality.max(d.estimate_orthonormality);
        w.estimate_quat_norm = w.estimate_quat_norm.max(d.estimate_quat_norm);
        w.sigma_asymmetry = w.sigma_asymmetry.max(d.sigma_asymmetry);
        self.runs += 1;
    }
}

/// First times below the convergence level for `Ro_dist` and `Rc_dist`.
type Crossings = (Option<f64>, Option<f64>);

fn first_below(rec: &RunRecord, column: &str, level: f64) -> Option<f64> {
    let values = rec.column(column).unwrap();
    values.iter().position(|v| *v < level).map(|k| rec.rows[k].t)
}

fn reference_runs(report: &mut Report) -> Vec<RunRecord> {
    let mut records = Vec::new();
    let mut slowest = Duration::ZERO;
    for seed in 0..TABLE_SEEDS {
        let start = Instant::now();
        records.push(report.run(&SimConfig { seed, ..Default::default() }));
        slowest = slowest.max(start.elapsed());
    }
    let stats: Vec<_> = records.iter().map(|r| steady_state_stats(r, 4.0, 50.0).unwrap()).collect();
    let pooled = pool(&stats).unwrap();
    report.check(
        "table1-mean",
        (TABLE_MEAN_BAND.0..=TABLE_MEAN_BAND.1).contains(&pooled.mean),
        format!(
            "pooled mean of Ro_dist over [4, 50] s, q = 3, {TABLE_SEEDS} seeds = {:.3e} (band [{:.1e}, {:.1e}])",
            pooled.mean, TABLE_MEAN_BAND.0, TABLE_MEAN_BAND.1
        ),
    );
    report.check(
        "table1-std",
        (TABLE_STD_BAND.0..=TABLE_STD_BAND.1).contains(&pooled.std),
        format!("pooled std = {:.3e} (band [{:.1e}, {:.1e}])", pooled.std, TABLE_STD_BAND.0, TABLE_STD_BAND.1),
    );
    report.check(
        "table1-wall-time",
        slowest < MAX_RUN_TIME,
        format!("slowest 50 s run took {:.3} s (limit {} s)", slowest.as_secs_f64(), MAX_RUN_TIME.as_secs()),
    );
    records
}

fn neuron_trend(report: &mut Report) {
    let start = Instant::now();
    let mut means = Vec::new();
    for q in TREND_NEURONS {
        let stats: Vec<_> = (0..TREND_SEEDS)
            .map(|seed| {
                steady_state_stats(&report.run(&SimConfig { seed, neurons: q, ..Default::default() }), 4.0, 50.0)
                    .unwrap()
            })
            .collect();
        means.push(pool(&stats).unwrap().mean);
    }
    let elapsed = start.elapsed();
    let listing =
        TREND_NEURONS.iter().zip(&means).map(|(q, m)| format!("q={q}: {m:.3e}")).collect::<Vec<_>>().join(", ");
    report.check(
        "neuron-trend",
        means[2] < means[0],
        format!("pooled means over {TREND_SEEDS} shared seeds {listing}; requires q=50 < q=3"),
    );
    report.check(
        "neuron-trend-wall-time",
        elapsed < MAX_TREND_TIME,
        format!("{} runs took {:.1} s (limit {} s)", 3 * TREND_SEEDS, elapsed.as_secs_f64(), MAX_TREND_TIME.as_secs()),
    );
}

fn convergence(report: &mut Report, records: &[RunRecord]) {
    let start_ok =
        records.iter().all(|r| (r.rows[0].Ro_dist - 0.999).abs() < 1e-3 && (r.rows[0].Rc_dist - 0.999).abs() < 1e-3);
    let times: Vec<Crossings> =
        records.iter().map(|r| (first_below(r, "Ro_dist", CONVERGED), first_below(r, "Rc_dist", CONVERGED))).collect();
    let good = times
        .iter()
        .filter(|(o, c)| o.is_some_and(|t| t <= CONVERGE_BY) && c.is_some_and(|t| t <= CONVERGE_BY))
        .count();
    let worst =
        |f: fn(&Crossings) -> Option<f64>| times.iter().map(|t| f(t).unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    report.check(
        "large-error-convergence",
        start_ok && good >= MIN_GOOD_SEEDS,
        format!(
            "{good}/{} seeds reach Ro_dist and Rc_dist < {CONVERGED} by {CONVERGE_BY} s (need {MIN_GOOD_SEEDS}); \
             slowest Ro {:.2} s, Rc {:.2} s; initial distances ≈ 0.999: {start_ok}",
            records.len(),
            worst(|t| t.0),
            worst(|t| t.1)
        ),
    );
}

fn disturbance(report: &mut Report, records: &[RunRecord]) {
    let means: Vec<f64> = records
        .iter()
        .map(|r| column_stats(r, "dist_err", DISTURBANCE_WINDOW.0, DISTURBANCE_WINDOW.1).unwrap().mean)
        .collect();
    let good = means.iter().filter(|m| **m < DISTURBANCE_LIMIT).count();
    let max = means.iter().cloned().fold(0.0, f64::max);
    report.check(
        "disturbance-rejection",
        good >= MIN_GOOD_SEEDS,
        format!(
            "{good}/{} seeds with mean ‖d − d̂‖ over [{}, {}] s < {DISTURBANCE_LIMIT} (need {MIN_GOOD_SEEDS}); worst {max:.4}",
            means.len(),
            DISTURBANCE_WINDOW.0,
            DISTURBANCE_WINDOW.1
        ),
    );
}

fn equilibrium_config(dt: f64) -> SimConfig {
    let mut cfg = SimConfig { dt, noise_free: true, ..Default::default() };
    cfg.sensors.gyro_bias = [0.0; 3];
    for v in &mut cfg.sensors.vectors {
        v.bias = [0.0; 3];
    }
    cfg.body.disturbance = [0.0; 3];
    cfg.initial.attitude = cfg.initial.desired_attitude;
    cfg.initial.attitude_estimate = cfg.initial.desired_attitude;
    cfg.initial.omega = cfg.initial.desired_omega;
    cfg
}

fn noise_free_equilibrium(report: &mut Report) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (dt, tol) in EQUILIBRIUM {
        let rec = report.run(&equilibrium_config(dt));
        let worst = EQUILIBRIUM_COLUMNS
            .iter()
            .map(|c| rec.column(c).unwrap().into_iter().fold(0.0, f64::max))
            .fold(0.0, f64::max);
        pass &= worst < tol;
        parts.push(format!("dt = {dt}: max error column {worst:.2e} (limit {tol:.0e})"));
    }
    report.check("noise-free-equilibrium", pass, parts.join("; "));
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        if v.norm() > 1e-6 {
            return v.normalize();
        }
    }
}

fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

fn random_rotation(rng: &mut ChaCha8Rng) -> RotationMatrix {
    let axis = random_unit(rng);
    exp_so3(&axis, rng.random_range(0.0..PI))
}

fn random_refs(rng: &mut ChaCha8Rng) -> Vec<Reference> {
    loop {
        let n = rng.random_range(2..5);
        let refs: Vec<Reference> =
            (0..n).map(|_| Reference { direction: random_unit(rng), confidence: rng.random_range(0.1..2.0) }).collect();
        if refs
            .iter()
            .enumerate()
            .any(|(i, a)| refs[i + 1..].iter().any(|b| a.direction.cross(&b.direction).norm() > 0.05))
        {
            return refs;
        }
    }
}

fn sym_eig_range(m: &Mat3) -> (f64, f64) {
    let e = m.symmetric_eigenvalues();
    (e.min(), e.max())
}

/// Worst residual of `f` over the random cases.
fn worst_case(rng: &mut ChaCha8Rng, mut f: impl FnMut(&mut ChaCha8Rng) -> f64) -> f64 {
    (0..ALGEBRA_CASES).map(|_| f(rng)).fold(0.0, f64::max)
}

fn algebra(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let rng = &mut rng;

    let conj = worst_case(rng, |rng| {
        let r = random_rotation(rng);
        let y = random_vec(rng, 10.0);
        (r.matrix() * hat(&y) * r.matrix().transpose() - hat(&r.rotate(&y))).norm()
    });
    report.check(
        "algebra-conjugated-hat",
        conj <= ALGEBRA_TOL,
        format!("max ‖R[y]×Rᵀ − [Ry]×‖ = {conj:.2e} over {ALGEBRA_CASES} cases"),
    );

    let trace = worst_case(rng, |rng| {
        let z = Mat3::from_fn(|_, _| rng.random_range(-5.0..5.0));
        let y = random_vec(rng, 5.0);
        let a = (z * hat(&y)).trace();
        let b = (pa(&z) * hat(&y)).trace();
        let c = -2.0 * upsilon(&z).dot(&y);
        (a - b).abs().max((a - c).abs())
    });
    report.check(
        "algebra-trace-pairing",
        trace <= ALGEBRA_TOL,
        format!("max |Tr{{Z[y]×}} − Tr{{Pa(Z)[y]×}}|, |… + 2Υ(Z)ᵀy| = {trace:.2e}"),
    );

    let round = worst_case(rng, |rng| {
        let u = random_vec(rng, 10.0);
        (vex(&hat(&u)).unwrap() - u).norm().max((upsilon(&hat(&u)) - u).norm())
    });
    report.check(
        "algebra-round-trips",
        round <= ALGEBRA_TOL,
        format!("max ‖vex([u]×) − u‖, ‖Υ([u]×) − u‖ = {round:.2e}"),
    );

    // Sandwich bound exactly as stated: λ_min(M̄)²‖R‖_I ≤ ‖Υ(MR)‖² ≤ λ_max(M̄)²‖R‖_I.
    let mut lower_violations = 0;
    let mut upper_violations = 0;
    let mut worst_lower = 0.0f64;
    for _ in 0..ALGEBRA_CASES {
        let refs = random_refs(rng);
        let m: Mat3 = refs.iter().map(|x| x.direction * x.direction.transpose() * x.confidence).sum();
        let r = random_rotation(rng);
        let (lo, hi) = sym_eig_range(&mbar(&m));
        let d = ecl_dist(&r);
        let ups = upsilon(&(m * r.matrix())).norm_squared();
        if lo * lo * d > ups + ALGEBRA_TOL {
            lower_violations += 1;
            worst_lower = worst_lower.max(lo * lo * d - ups);
        }
        if ups > hi * hi * d + ALGEBRA_TOL {
            upper_violations += 1;
        }
    }
    let r_pi = exp_so3(&Vec3::z(), PI);
    let m_eye = Mat3::identity();
    report.check(
        "algebra-sandwich-bound",
        lower_violations == 0 && upper_violations == 0,
        format!(
            "lower bound violated in {lower_violations}/{ALGEBRA_CASES} cases (worst excess {worst_lower:.3}), \
             upper in {upper_violations}; e.g. M = I, R = π about z: λ_min² ‖R‖_I = {:.1} > ‖Υ(MR)‖² = {:.1e}",
            4.0 * ecl_dist(&r_pi),
            upsilon(&(m_eye * r_pi.matrix())).norm_squared()
        ),
    );

    let est = worst_case(rng, |rng| {
        let refs = random_refs(rng);
        let (r, r_hat) = (random_rotation(rng), random_rotation(rng));
        let y: Vec<Vec3> = refs.iter().map(|x| r.transpose().rotate(&x.direction)).collect();
        let m_y = weighted_outer(&y, &refs);
        let inn = innovation(&y, &refs, &r_hat).unwrap();
        (inn.ups_o - upsilon(&(m_y * (r.transpose() * r_hat).matrix()))).norm()
    });
    report.check(
        "algebra-estimator-cross-sum",
        est <= ALGEBRA_TOL,
        format!("max ‖Σ(s/2)ŷ×y − Υ(M_y R̃_o)‖ = {est:.2e}"),
    );

    let mut dual = 0.0f64;
    let mut doubled = 0.0f64;
    for _ in 0..ALGEBRA_CASES {
        let refs = random_refs(rng);
        let (r, r_d) = (random_rotation(rng), random_rotation(rng));
        let y: Vec<Vec3> = refs.iter().map(|x| r.transpose().rotate(&x.direction)).collect();
        let m_r: Mat3 = refs.iter().map(|x| x.direction * x.direction.transpose() * x.confidence).sum();
        let matrix_form = upsilon(&(m_r * (r * r_d.transpose()).matrix()));
        let cross_sum = control_innovation(&y, &refs, &r_d).unwrap();
        dual = dual.max((cross_sum - matrix_form).norm());
        doubled = doubled.max((cross_sum - matrix_form * 2.0).norm());
    }
    report.check(
        "algebra-controller-dual-form",
        dual <= ALGEBRA_TOL,
        format!("max ‖Σ s R_d y × r − Υ(M_r R̃_c)‖ = {dual:.2e}; against 2Υ(M_r R̃_c) the residual is {doubled:.2e}"),
    );
}

fn backend_parity(report: &mut Report) {
    let seed = 7;
    let setups: Vec<_> = [Backend::Matrix, Backend::Quaternion]
        .into_iter()
        .map(|backend| SimConfig { seed, backend, ..Default::default() }.build().unwrap())
        .collect();
    let mut states: Vec<LoopState> = setups
        .iter()
        .map(|s| LoopState {
            truth: s.truth0,
            desired: s.desired0,
            filter: s.filter0.clone(),
            controller: s.controller0,
        })
        .collect();
    let mut streams: Vec<NoiseStreams> =
        setups.iter().map(|s| NoiseStreams::new(seed, s.sensors.vectors.len())).collect();
    let mut worst = 0.0f64;
    for k in 0..PARITY_STEPS {
        for i in 0..2 {
            states[i] = tick(&setups[i], &states[i], k, &mut streams[i]).unwrap().next;
        }
        let (a, b) = (&states[0], &states[1]);
        let estimate = (a.filter.attitude.rotation().matrix() - b.filter.attitude.rotation().matrix()).norm();
        let truth = (a.truth.attitude.matrix() - b.truth.attitude.matrix()).norm();
        let desired = (a.desired.attitude.matrix() - b.desired.attitude.matrix()).norm();
        worst = worst.max(estimate).max(truth).max(desired);
    }
    report.check(
        "backend-parity",
        worst < PARITY_TOL,
        format!("max Frobenius gap of R̂, R, R_d between matrix and quaternion backends over {PARITY_STEPS} steps = {worst:.2e}"),
    );
}

fn determinism(report: &mut Report) {
    let mut parts = Vec::new();
    let mut pass = true;
    for backend in [Backend::Matrix, Backend::Quaternion] {
        let cfg = SimConfig { seed: 3, backend, ..Default::default() };
        let a = csv_string(&report.run(&cfg));
        let b = csv_string(&report.run(&cfg));
        pass &= a == b;
        parts.push(format!("{backend:?}: {} bytes, identical = {}", a.len(), a == b));
    }
    report.check("determinism", pass, parts.join("; "));
}

fn manifold(report: &mut Report) {
    let w = report.integrity;
    let pass = w.truth_orthonormality < MANIFOLD_TOL
        && w.estimate_orthonormality < MANIFOLD_TOL
        && w.estimate_quat_norm < MANIFOLD_TOL
        && w.sigma_asymmetry < MANIFOLD_TOL;
    let runs = report.runs;
    report.check(
        "manifold-integrity",
        pass,
        format!(
            "over {runs} runs: max ‖RᵀR − I‖ truth {:.1e}, estimate {:.1e}; max |‖Q̂‖ − 1| {:.1e}; max ‖Ŵ_σ − Ŵ_σᵀ‖ {:.1e} (limit {MANIFOLD_TOL:.0e})",
            w.truth_orthonormality, w.estimate_orthonormality, w.estimate_quat_norm, w.sigma_asymmetry
        ),
    );
}

fn main() -> ExitCode {
    let mut report = Report::default();
    let records = reference_runs(&mut report);
    neuron_trend(&mut report);
    convergence(&mut report, &records);
    disturbance(&mut report, &records);
    noise_free_equilibrium(&mut report);
    algebra(&mut report);
    backend_parity(&mut report);
    determinism(&mut report);
    manifold(&mut report);
    println!("acceptance: {} passed, {} failed", report.passed, report.failed);
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
