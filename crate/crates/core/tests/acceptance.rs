//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Tolerances are fixed here, not tuned per run.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{brute_max_clique, brute_max_hyperclique, planted_hypergraph, random_graph};
use fls_outlier::clique::{
    is_hyperclique, max_clique_hyper4_exact, max_clique_hyper4_heuristic, max_clique_simple,
};
use fls_outlier::coplanarity::{coplanarity_test, Verdict};
use fls_outlier::geometry::{project, spherical_to_cartesian, SphericalPoint};
use fls_outlier::in_range::{length_bounds_noiseless, length_bounds_noisy};
use fls_outlier::sim::{
    generate_scene, loglog_slope, r_distribution_study, run_experiment, timing_benchmark,
    trial_rng, CellSummary, ExperimentGrid, Group, ResultsTable, ScenarioConfig,
};
use fls_outlier::{Case, Measurement, SonarConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const SEED: u64 = 20_240_917;
const THREADS: usize = 8;

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, title: &str, detail: String) {
        println!(
            "{} criterion {id:>2}: {title}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            self.failed.push(id);
        }
    }
}

fn grid(case: Case, groups: &[Group], ratios: &[f64], trials: usize) -> ResultsTable {
    let mut base = ScenarioConfig::new(case);
    base.trials = trials;
    base.seed = SEED;
    let g = ExperimentGrid {
        base,
        groups: groups.to_vec(),
        ratios: ratios.to_vec(),
    };
    run_experiment(&g, THREADS).expect("experiment")
}

fn cell(t: &ResultsTable, g: Group, ratio: f64) -> &CellSummary {
    t.summary(g, ratio).expect("cell")
}

fn ir_mean(t: &ResultsTable, g: Group, ratio: f64) -> f64 {
    cell(t, g, ratio).ir.map_or(0.0, |s| s.mean)
}

fn tpr_mean(t: &ResultsTable, g: Group, ratio: f64) -> f64 {
    cell(t, g, ratio).tpr.mean
}

fn general_headline(rep: &mut Report) {
    let t = grid(
        Case::General,
        &[Group::Standard, Group::ExpandedBound],
        &[0.8],
        500,
    );
    let ir = cell(&t, Group::Standard, 0.8).ir.unwrap();
    let ok = (ir.mean - 0.8861).abs() <= 0.06 && (ir.median - 0.9048).abs() <= 0.06;
    rep.line(
        1,
        ok,
        "general Standard IR at 80% outliers",
        format!(
            "mean {:.4} (0.8861 +- 0.06), median {:.4} (0.9048 +- 0.06)",
            ir.mean, ir.median
        ),
    );

    let exp = ir_mean(&t, Group::ExpandedBound, 0.8);
    let ok = (exp - 0.6216).abs() <= 0.08 && exp < ir.mean;
    rep.line(
        2,
        ok,
        "general Expanded IR at 80% outliers",
        format!(
            "mean {exp:.4} (0.6216 +- 0.08), below Standard {:.4}",
            ir.mean
        ),
    );
}

fn general_ordinals(rep: &mut Report) {
    let groups = [
        Group::Standard,
        Group::ReducedBound,
        Group::HalfScale,
        Group::QuarterScale,
    ];
    let t = grid(Case::General, &groups, &[0.5, 0.8, 0.9], 100);
    let mut ok = true;
    let mut detail = Vec::new();
    // The tighter bound costs true correspondences while Standard still finds
    // the inlier clique. At 0.9 Standard often locks onto an outlier clique
    // and the comparison no longer says anything about the bound.
    for r in [0.5, 0.8, 0.9] {
        let (s, red) = (
            tpr_mean(&t, Group::Standard, r),
            tpr_mean(&t, Group::ReducedBound, r),
        );
        if r < 0.85 {
            ok &= red < s;
            detail.push(format!("TPR reduced {red:.3} < standard {s:.3} @{r}"));
        } else {
            detail.push(format!(
                "(TPR reduced {red:.3}, standard {s:.3} @{r}, not checked)"
            ));
        }
    }
    for r in [0.8, 0.9] {
        let (s, h, q) = (
            ir_mean(&t, Group::Standard, r),
            ir_mean(&t, Group::HalfScale, r),
            ir_mean(&t, Group::QuarterScale, r),
        );
        ok &= h < s && q < h;
        detail.push(format!(
            "IR quarter {q:.3} < half {h:.3} < standard {s:.3} @{r}"
        ));
    }
    rep.line(3, ok, "general group ordering", detail.join("; "));
}

fn coplanar_groups(rep: &mut Report) {
    let ratios = [0.5, 0.8, 0.9];
    let t = grid(
        Case::Coplanar,
        &[
            Group::Standard,
            Group::Underestimated,
            Group::Overestimated,
            Group::NoApprox,
        ],
        &ratios,
        50,
    );
    let beyond = grid(Case::Coplanar, &[Group::Standard], &[0.95], 50);

    let irs: Vec<f64> = ratios
        .iter()
        .map(|&r| ir_mean(&t, Group::Standard, r))
        .collect();
    let ir95 = ir_mean(&beyond, Group::Standard, 0.95);
    let ok = irs.iter().all(|&x| x >= 0.95) && ir95 < irs[2];
    rep.line(
        4,
        ok,
        "coplanar Standard IR",
        format!(
            "IR @0.5 {:.4}, @0.8 {:.4}, @0.9 {:.4} (>= 0.95); @0.95 {ir95:.4} (below @0.9)",
            irs[0], irs[1], irs[2]
        ),
    );

    let mut ok = true;
    let mut detail = Vec::new();
    for &r in &ratios {
        let (s, u) = (
            tpr_mean(&t, Group::Standard, r),
            tpr_mean(&t, Group::Underestimated, r),
        );
        let u_ir = ir_mean(&t, Group::Underestimated, r);
        ok &= u < s && u_ir >= 0.9;
        detail.push(format!(
            "under @{r}: TPR {u:.3} < {s:.3}, IR {u_ir:.3} >= 0.9"
        ));
    }
    // Averaged over the ratios; at 0.9 the group drops further on its own.
    let over: Vec<f64> = ratios
        .iter()
        .map(|&r| ir_mean(&t, Group::Overestimated, r))
        .collect();
    let over_mean = over.iter().sum::<f64>() / over.len() as f64;
    ok &= (over_mean - 0.9).abs() <= 0.08;
    detail.push(format!(
        "over IR {:.3}/{:.3}/{:.3}, mean {over_mean:.3} (0.9 +- 0.08)",
        over[0], over[1], over[2]
    ));
    for &r in &ratios {
        let (s, n) = (
            tpr_mean(&t, Group::Standard, r),
            tpr_mean(&t, Group::NoApprox, r),
        );
        ok &= n <= s;
        detail.push(format!("no-approx @{r}: TPR {n:.3} <= {s:.3}"));
    }
    rep.line(5, ok, "coplanar group ordering", detail.join("; "));
}

fn r_approximation(rep: &mut Report) {
    let near = r_distribution_study(
        2.2,
        0.005,
        7f64.to_radians(),
        1_000_000,
        &mut trial_rng(SEED, 0),
    )
    .unwrap();
    let far = r_distribution_study(
        7.0,
        0.005,
        10f64.to_radians(),
        1_000_000,
        &mut trial_rng(SEED, 1),
    )
    .unwrap();
    let ok = near.tv_distance <= 0.05 && far.tv_distance > near.tv_distance;
    rep.line(
        6,
        ok,
        "range marginal vs Gaussian fit",
        format!(
            "TV {:.4} at (2.2 m, 7 deg) <= 0.05; {:.4} at (7 m, 10 deg) larger",
            near.tv_distance, far.tv_distance
        ),
    );
}

fn fov_point(rng: &mut ChaCha8Rng, cfg: &SonarConfig) -> SphericalPoint {
    SphericalPoint::new(
        rng.random_range(cfg.r_min..cfg.r_max),
        rng.random_range(-cfg.theta_max..cfg.theta_max),
        rng.random_range(-cfg.phi_max..cfg.phi_max),
    )
    .unwrap()
}

fn bound_soundness(rep: &mut Report) {
    let cfg = SonarConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut violations = 0usize;
    for _ in 0..1_000_000 {
        let (xi, xj) = (
            spherical_to_cartesian(&fov_point(&mut rng, &cfg)),
            spherical_to_cartesian(&fov_point(&mut rng, &cfg)),
        );
        let f =
            length_bounds_noiseless(&project(&xi).unwrap(), &project(&xj).unwrap(), cfg.phi_max)
                .unwrap();
        let d = (xi - xj).norm();
        violations += usize::from(d < f.lo - 1e-12 || d > f.hi + 1e-12);
    }

    let nr = Normal::new(0.0, cfg.sigma_r).unwrap();
    let nt = Normal::new(0.0, cfg.sigma_theta).unwrap();
    let noisy = |m: Measurement, rng: &mut ChaCha8Rng| {
        Measurement::new((m.r + nr.sample(rng)).max(1e-9), m.theta + nt.sample(rng)).unwrap()
    };
    let n = 100_000;
    let mut inside = 0usize;
    for _ in 0..n {
        let (xi, xj) = (
            spherical_to_cartesian(&fov_point(&mut rng, &cfg)),
            spherical_to_cartesian(&fov_point(&mut rng, &cfg)),
        );
        let mi = noisy(project(&xi).unwrap(), &mut rng);
        let mj = noisy(project(&xj).unwrap(), &mut rng);
        let g = length_bounds_noisy(&mi, &mj, &cfg).unwrap();
        let d = (xi - xj).norm();
        inside += usize::from(g.lo <= d && d <= g.hi);
    }
    let rate = inside as f64 / n as f64;
    rep.line(
        7,
        violations == 0 && rate >= 0.999,
        "length interval soundness",
        format!("noiseless violations {violations} of 1e6; noisy containment {rate:.5} (>= 0.999)"),
    );
}

fn chi2_calibration(rep: &mut Report) {
    let cfg = ScenarioConfig {
        n_points: 4,
        outlier_ratio: 0.0,
        ..ScenarioConfig::coplanar()
    };
    let eff = cfg.effective().unwrap();
    let n = 10_000;
    let (mut pass, mut degenerate) = (0usize, 0usize);
    for t in 0..n {
        let scene = generate_scene(&cfg, &mut trial_rng(SEED, t)).unwrap();
        let c = &scene.corrs;
        let v = coplanarity_test(
            [&c[0], &c[1], &c[2], &c[3]],
            &eff.estimation,
            eff.use_r_approx,
            cfg.p_value,
        );
        pass += usize::from(v.passed());
        degenerate += usize::from(matches!(v, Verdict::Degenerate(_)));
    }
    let rate = pass as f64 / n as f64;
    rep.line(
        8,
        rate >= 0.97,
        "coplanarity gate on inlier quadruples",
        format!("pass rate {rate:.4} (>= 0.97) over {n} quadruples, {degenerate} degenerate"),
    );
}

fn clique_exactness(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut simple_ok = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=30);
        let g = random_graph(n, rng.random_range(0.05..0.75), rng.random());
        let got = max_clique_simple(&g);
        simple_ok += usize::from(got.is_certified_maximum && got.vertices == brute_max_clique(&g));
    }
    let (mut hyper_ok, mut heur_ok) = (0, 0);
    for _ in 0..100 {
        let n = rng.random_range(4..=20);
        let (h, _) = planted_hypergraph(
            n,
            rng.random_range(0..=9),
            rng.random_range(0.0..0.25),
            rng.random(),
        );
        let exact = max_clique_hyper4_exact(&h).unwrap();
        hyper_ok += usize::from(exact.vertices == brute_max_hyperclique(&h));
        let heur = max_clique_hyper4_heuristic(&h);
        heur_ok += usize::from(
            is_hyperclique(&h, &heur.vertices) && heur.vertices.len() <= exact.vertices.len(),
        );
    }
    rep.line(
        9,
        simple_ok == 200 && hyper_ok == 100 && heur_ok == 100,
        "clique solvers vs enumeration",
        format!(
            "simple {simple_ok}/200, hyper exact {hyper_ok}/100, heuristic valid {heur_ok}/100"
        ),
    );
}

fn performance(rep: &mut Report) {
    let start = Instant::now();
    let g100 = timing_benchmark(Case::General, &[100], 0.8, 50, SEED).unwrap();
    let g1000 = timing_benchmark(Case::General, &[1000], 0.8, 5, SEED).unwrap();
    let c100 = timing_benchmark(Case::Coplanar, &[100], 0.8, 5, SEED).unwrap();

    let gs = [100, 200, 400, 700, 1000];
    let rows = timing_benchmark(Case::General, &gs, 0.8, 5, SEED).unwrap();
    let xs: Vec<f64> = gs.iter().map(|&n| n as f64).collect();
    let g_slope = loglog_slope(
        &xs,
        &rows.iter().map(|r| r.mean_test_ms).collect::<Vec<_>>(),
    );

    let cs = [40, 60, 80, 100, 120];
    let rows = timing_benchmark(Case::Coplanar, &cs, 0.8, 3, SEED).unwrap();
    let xs: Vec<f64> = cs.iter().map(|&n| n as f64).collect();
    let c_slope = loglog_slope(
        &xs,
        &rows.iter().map(|r| r.mean_test_ms).collect::<Vec<_>>(),
    );

    let (a, b, c) = (
        g100[0].mean_total_ms,
        g1000[0].mean_total_ms,
        c100[0].mean_total_ms,
    );
    let ok = a <= 50.0
        && b <= 2000.0
        && c <= 30_000.0
        && (1.7..=2.3).contains(&g_slope)
        && (3.5..=4.5).contains(&c_slope);
    rep.line(
        10,
        ok,
        "runtime",
        format!(
            "general N=100 {a:.2} ms (<= 50), N=1000 {b:.1} ms (<= 2000); coplanar N=100 {c:.0} ms (<= 30000); \
             test-phase slopes {g_slope:.2} in [1.7, 2.3], {c_slope:.2} in [3.5, 4.5]; {} cores; {:.1} s",
            std::thread::available_parallelism().map_or(1, |n| n.get()),
            start.elapsed().as_secs_f64()
        ),
    );
}

fn main() -> ExitCode {
    let mut rep = Report { failed: Vec::new() };
    general_headline(&mut rep);
    general_ordinals(&mut rep);
    coplanar_groups(&mut rep);
    r_approximation(&mut rep);
    bound_soundness(&mut rep);
    chi2_calibration(&mut rep);
    clique_exactness(&mut rep);
    performance(&mut rep);
    if rep.failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {:?}", rep.failed);
        ExitCode::FAILURE
    }
}
