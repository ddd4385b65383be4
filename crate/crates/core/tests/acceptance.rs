//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.
//!
//! Runs in a few minutes with the optimized test profile.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starcrs_core::baselines::{inclusion_chain, run_ao, run_fast, Scheme};
use starcrs_core::channel::{Scenario, ScenarioSpec};
use starcrs_core::conic::ClarabelSolver;
use starcrs_core::fast::{fast_optimize, precoder_directions, sym, symuni, FastOptions};
use starcrs_core::linalg::{norm_sqr, CMat, CVec, Complex64};
use starcrs_core::model::{DesignPoint, Mode, StarProtocol};
use starcrs_core::rates::{effective_channels, SideSelect};
use starcrs_core::record::RunRecord;
use starcrs_core::sca::surrogates::{nu_bound, varpi_bound};
use starcrs_core::sca::{AoOptions, Problem};

const SNR_DB: f64 = 20.0;

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn check(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        let line = format!("{} [{id:>2}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((id, ok, line));
    }
}

fn scenario(elements: usize, seed: u64) -> Scenario {
    let spec = ScenarioSpec { elements, ..ScenarioSpec::default() }.with_snr_db(SNR_DB).unwrap();
    Scenario::draw(seed, &spec).unwrap()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
}

fn monotone_sca(report: &mut Report, pool: &mut Vec<RunRecord>) {
    let solver = ClarabelSolver::default();
    let opts = AoOptions::default();
    let (mut worst_iters, mut all_ok, mut runs) = (0, true, 0);
    let mut worst_drop: f64 = 0.0;
    for mode in [Mode::FE, Mode::HE] {
        for seed in 0..10 {
            let s = scenario(8, seed);
            let rec = run_ao(Scheme::Crs(mode), &s.config, &s.channels, seed, &opts, &[], &solver).unwrap();
            let traces = std::iter::once(&rec.outer_trace).chain(&rec.passive_traces).chain(&rec.active_traces);
            for t in traces {
                for w in t.windows(2) {
                    worst_drop = worst_drop.max(w[0] - w[1]);
                }
            }
            all_ok &= rec.traces_monotone(1e-6) && rec.flags.converged && rec.iterations <= 30;
            worst_iters = worst_iters.max(rec.iterations);
            runs += 1;
            pool.push(rec);
        }
    }
    report.check(
        1,
        "monotone SCA (FE, HE, N=8, 10 seeds)",
        all_ok,
        format!("{runs} runs, largest trace decrease {worst_drop:.2e}, worst outer iterations {worst_iters}/30"),
    );
}

fn feasibility(report: &mut Report, pool: &[RunRecord]) {
    let mut worst = [0.0f64; 4];
    let mut ok = true;
    for rec in pool {
        let pt = rec.point.transmit_power() + rec.feasibility.power_slack;
        let f = &rec.feasibility;
        let power = (-f.power_slack).max(0.0) / pt;
        let protocol = rec.mode.protocol();
        let star = if protocol == StarProtocol::TimeSwitching { 0.0 } else { f.star_violation };
        let binary = if protocol == StarProtocol::ModeSwitching { f.binary_violation } else { 0.0 };
        let vals = [power, star, binary, f.time_violation];
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
        ok &= power <= 1e-6 && star <= 1e-3 && binary <= 1e-3 && f.time_violation == 0.0;
    }
    report.check(
        2,
        "feasibility of every returned point",
        ok,
        format!(
            "{} points; power {:.1e}·Pt, ES/MS equality {:.1e}, MS binariness {:.1e}, time ordering {:.1e}",
            pool.len(),
            worst[0],
            worst[1],
            worst[2],
            worst[3]
        ),
    );
}

fn all_schemes(pool: &mut Vec<RunRecord>) {
    let solver = ClarabelSolver::default();
    for seed in 0..2 {
        let s = scenario(8, 100 + seed);
        for scheme in Scheme::ALL {
            pool.push(run_ao(scheme, &s.config, &s.channels, seed, &AoOptions::default(), &[], &solver).unwrap());
            pool.push(run_fast(scheme, &s.config, &s.channels, seed, &FastOptions::default(), &solver).unwrap());
        }
    }
}

fn single_user(report: &mut Report, pool: &mut Vec<RunRecord>) {
    let solver = ClarabelSolver::default();
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let spec = ScenarioSpec { users: 1, elements: 0, ..ScenarioSpec::default() }.with_snr_db(SNR_DB).unwrap();
        let mut s = Scenario::draw(seed, &spec).unwrap();
        // a lone user has nobody to relay to
        s.config.relay_users.clear();
        s.config.relay_power.clear();
        s.config.dest_users = vec![0];
        let cap = (1.0 + s.config.bs_power * norm_sqr(&s.channels.g[0]) / s.config.noise_power).log2();
        for mode in [Mode::FE, Mode::HE] {
            let a = run_ao(Scheme::Crs(mode), &s.config, &s.channels, seed, &AoOptions::default(), &[], &solver).unwrap();
            let f = run_fast(Scheme::Crs(mode), &s.config, &s.channels, seed, &FastOptions::default(), &solver).unwrap();
            worst = worst.max(((a.objective - cap) / cap).abs()).max(((f.objective - cap) / cap).abs());
            pool.extend([a, f]);
        }
    }
    report.check(
        3,
        "single-user capacity (K=1, N=0, both optimizers)",
        worst <= 0.01,
        format!("worst relative gap {worst:.2e} (limit 1e-2)"),
    );
}

fn brute_force(report: &mut Report) {
    let solver = ClarabelSolver::default();
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for seed in 0..5 {
        let spec = ScenarioSpec { users: 2, antennas: 2, elements: 0, mode: Mode::HE, ..ScenarioSpec::default() }
            .with_snr_db(SNR_DB)
            .unwrap();
        let s = Scenario::draw(seed, &spec).unwrap();
        let pr = Problem::new(s.config.clone(), s.channels.clone()).unwrap();
        let eff = effective_channels(&pr.config, &pr.channels, &DesignPoint::zeros(&pr.config), SideSelect::PerUser);
        let (dirs, _) = precoder_directions(&eff.gt, 2).unwrap();
        let pt = pr.config.bs_power;
        let mut best: f64 = 0.0;
        let mut p = DesignPoint::zeros(&pr.config);
        for li in 1..=100 {
            p.lambda = li as f64 * 0.01;
            for a in 0..=50 {
                for b in 0..=(50 - a) {
                    let frac = [a as f64 * 0.02, b as f64 * 0.02, (50 - a - b) as f64 * 0.02];
                    for (j, f) in frac.iter().enumerate() {
                        p.precoders.set_column(j, &(dirs.column(j) * Complex64::new((f * pt).sqrt(), 0.0)));
                    }
                    best = best.max(pr.objective(&p));
                }
            }
        }
        let fast = fast_optimize(&pr, &FastOptions::default(), &solver).unwrap();
        let gap = (fast.objective - best).abs() / best;
        worst = worst.max(gap);
        detail.push(format!("{:.3}/{:.3}", fast.objective, best));
    }
    report.check(
        4,
        "grid search (K=2, L=2, N=0, HD, fixed directions)",
        worst <= 0.02,
        format!("fast/grid {}; worst relative gap {worst:.2e} (limit 2e-2)", detail.join(" ")),
    );
}

fn inclusion(report: &mut Report, pool: &mut Vec<RunRecord>) {
    let solver = ClarabelSolver::default();
    let (mut sdma, mut rsma, mut crs) = (Vec::new(), Vec::new(), Vec::new());
    let mut ok = true;
    let mut worst: f64 = f64::NEG_INFINITY;
    for seed in 0..20 {
        let s = scenario(16, seed);
        let [a, b, c] = inclusion_chain(&s.config, &s.channels, seed, &AoOptions::default(), &solver).unwrap();
        ok &= a.objective <= b.objective + 1e-4 && b.objective <= c.objective + 1e-4;
        worst = worst.max(a.objective - b.objective).max(b.objective - c.objective);
        sdma.push(a.objective);
        rsma.push(b.objective);
        crs.push(c.objective);
        pool.extend([a, b, c]);
    }
    let (ms, mr, mc) = (mean(&sdma), mean(&rsma), mean(&crs));
    report.check(
        5,
        "inclusion SDMA-ES <= RSMA-ES <= CRS-HE (N=16, 20 seeds)",
        ok,
        format!(
            "means {ms:.3} <= {mr:.3} <= {mc:.3}; CRS-HE gains {:.1}% over RSMA-ES, {:.1}% over SDMA-ES; worst violation {worst:.2e}",
            100.0 * (mc / mr - 1.0),
            100.0 * (mc / ms - 1.0)
        ),
    );
}

/// FE objectives at N = 16 (cold start) with their records, reused by later checks.
fn protocols(report: &mut Report, pool: &mut Vec<RunRecord>) -> Vec<RunRecord> {
    let solver = ClarabelSolver::default();
    let opts = AoOptions::default();
    let (mut fe, mut fm, mut ft) = (Vec::new(), Vec::new(), Vec::new());
    let mut per_instance = true;
    let mut fe_records = Vec::new();
    for seed in 0..20 {
        let s = scenario(16, seed);
        let m = run_ao(Scheme::Crs(Mode::FM), &s.config, &s.channels, seed, &opts, &[], &solver).unwrap();
        let t = run_ao(Scheme::Crs(Mode::FT), &s.config, &s.channels, seed, &opts, &[], &solver).unwrap();
        let e = run_ao(Scheme::Crs(Mode::FE), &s.config, &s.channels, seed, &opts, &[], &solver).unwrap();
        // an MS point is ES-feasible, so refining it in FE cannot lose rate
        let pr = Scheme::Crs(Mode::FE).problem(&s.config, &s.channels).unwrap();
        let warm = starcrs_core::sca::alternate(&pr, &m.point, &opts, &solver);
        per_instance &= warm.objective >= m.objective - 1e-9 * m.objective.abs().max(1.0);
        fe.push(e.objective);
        fm.push(m.objective);
        ft.push(t.objective);
        pool.extend([m, t]);
        fe_records.push(e);
    }
    let (me, mm, mt) = (mean(&fe), mean(&fm), mean(&ft));
    let stat = me >= 0.99 * mm && me >= 0.99 * mt;
    report.check(
        6,
        "protocol ordering ES over MS and TS (N=16, 20 seeds)",
        per_instance && stat,
        format!(
            "FE warm-started from FM >= FM on every seed: {per_instance}; means FE {me:.3}, FM {mm:.3}, FT {mt:.3}"
        ),
    );
    fe_records
}

fn projection(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut unitary, mut symmetric, mut idem) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let x = random_matrix(16, &mut rng);
        let q = symuni(&x).unwrap();
        unitary = unitary.max(max_abs(&(q.adjoint() * &q - CMat::identity(16, 16))));
        symmetric = symmetric.max(max_abs(&(q.transpose() - &q)));
        let s = sym(&x).unwrap();
        idem = idem.max(max_abs(&(sym(&s).unwrap() - &s)));
    }
    report.check(
        7,
        "projection properties (100 random 16x16)",
        unitary <= 1e-10 && symmetric <= 1e-10 && idem <= 1e-14,
        format!("unitarity {unitary:.1e}, symmetry {symmetric:.1e}, sym idempotence {idem:.1e}"),
    );
}

fn surrogates(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut gap_nu = f64::INFINITY;
    let mut tight_nu: f64 = 0.0;
    for _ in 0..10 {
        let (a0, b0) = (rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0);
        tight_nu = tight_nu.max((nu_bound(a0, b0, a0, b0) - a0 * b0).abs());
        for i in 0..100 {
            for j in 0..100 {
                let a = -5.0 + 10.0 * i as f64 / 99.0;
                let b = -5.0 + 10.0 * j as f64 / 99.0;
                gap_nu = gap_nu.min(nu_bound(a, b, a0, b0) - a * b);
            }
        }
    }
    let mut gap_varpi = f64::INFINITY;
    let mut tight_varpi: f64 = 0.0;
    let n = 8;
    let cv = |rng: &mut ChaCha8Rng| {
        CVec::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
    };
    for _ in 0..10 {
        let psi0 = cv(&mut rng);
        let s = cv(&mut rng);
        let g = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let bound = varpi_bound(&psi0, g, &s);
        let exact = |p: &CVec| (g + s.dotc(p)).norm_sqr();
        tight_varpi = tight_varpi.max((bound.eval(&psi0) - exact(&psi0)).abs());
        for _ in 0..1000 {
            let p = cv(&mut rng);
            gap_varpi = gap_varpi.min(exact(&p) - bound.eval(&p));
        }
    }
    report.check(
        8,
        "surrogate bounds (2 x 10^4 grid points each)",
        gap_nu >= -1e-12 && gap_varpi >= -1e-12 && tight_nu <= 1e-9 && tight_varpi <= 1e-9,
        format!(
            "min(nu - ab) {gap_nu:.1e}, min(|.|^2 - varpi) {gap_varpi:.1e}, tightness {:.1e}",
            tight_nu.max(tight_varpi)
        ),
    );
}

fn fast_vs_ao(report: &mut Report, fe16: &[RunRecord], pool: &mut Vec<RunRecord>) {
    let solver = ClarabelSolver::default();
    let (mut ratios, mut t_ao, mut t_fast) = (Vec::new(), 0.0, 0.0);
    for ao in fe16.iter().take(10) {
        let s = scenario(16, ao.seed);
        let f = run_fast(Scheme::Crs(Mode::FE), &s.config, &s.channels, ao.seed, &FastOptions::default(), &solver)
            .unwrap();
        ratios.push(f.objective / ao.objective);
        t_ao += ao.wall_time.unwrap();
        t_fast += f.wall_time.unwrap();
        pool.push(f);
    }
    let ratio = mean(&ratios);
    let speed = t_ao / t_fast;
    report.check(
        9,
        "fast vs AO (FE, N=16, 10 seeds)",
        ratio >= 0.6 && speed >= 10.0,
        format!("fast reaches {:.1}% of AO on average, {speed:.0}x lower wall time", 100.0 * ratio),
    );
}

fn trend(report: &mut Report, fe16: &[RunRecord], pool: &mut Vec<RunRecord>) {
    let solver = ClarabelSolver::default();
    let mut means = Vec::new();
    for n in [8, 16, 32] {
        let vals: Vec<f64> = if n == 16 {
            fe16.iter().map(|r| r.objective).collect()
        } else {
            (0..20)
                .map(|seed| {
                    let s = scenario(n, seed);
                    let rec = run_ao(Scheme::Crs(Mode::FE), &s.config, &s.channels, seed, &AoOptions::default(), &[], &solver)
                        .unwrap();
                    let v = rec.objective;
                    pool.push(rec);
                    v
                })
                .collect()
        };
        means.push(mean(&vals));
    }
    report.check(
        10,
        "FE grows with N over {8, 16, 32} (20 seeds)",
        means.windows(2).all(|w| w[1] >= w[0]),
        format!("means {:.3}, {:.3}, {:.3}", means[0], means[1], means[2]),
    );
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut report = Report { lines: Vec::new() };
    let mut pool = Vec::new();
    monotone_sca(&mut report, &mut pool);
    single_user(&mut report, &mut pool);
    brute_force(&mut report);
    inclusion(&mut report, &mut pool);
    let fe16 = protocols(&mut report, &mut pool);
    projection(&mut report);
    surrogates(&mut report);
    fast_vs_ao(&mut report, &fe16, &mut pool);
    trend(&mut report, &fe16, &mut pool);
    all_schemes(&mut pool);
    pool.extend(fe16);
    feasibility(&mut report, &pool);

    report.lines.sort_by_key(|l| l.0);
    let failed = report.lines.iter().filter(|l| !l.1).count();
    println!("\nacceptance summary ({:.0} s):", start.elapsed().as_secs_f64());
    for (_, _, line) in &report.lines {
        println!("{line}");
    }
    println!("{} of {} criteria passed", report.lines.len() - failed, report.lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
