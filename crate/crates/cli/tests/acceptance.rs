//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.
//!
//! Criteria 1-3 run the full convergence studies on N = 32, 64, 128 and take
//! several minutes in release-level optimization. The bands for 1-3 are pinned
//! below; 4-8 use the thresholds pinned in `peterlin::verify`.

use std::process::ExitCode;
use std::time::Instant;

use peterlin::study::{run_level, slopes, LevelResult, StudyConfig};
use peterlin::verify::{self, CheckConfig, SuiteReport};

const LEVELS: [usize; 3] = [32, 64, 128];
/// Relative band around a reference N=32 value.
const BAND: f64 = 0.40;

struct Criterion {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn study(nu: f64, eps: f64) -> Result<Vec<LevelResult>, String> {
    let cfg = StudyConfig::new(nu, eps);
    LEVELS.iter().map(|&n| run_level(&cfg, n).map_err(|e| format!("N={n}: {e}"))).collect()
}

fn within(v: f64, reference: f64) -> bool {
    (v - reference).abs() <= BAND * reference
}

fn column(s: &[[f64; 6]], k: usize) -> Vec<f64> {
    s.iter().map(|row| row[k]).collect()
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn errors_line(levels: &[LevelResult]) -> String {
    levels
        .iter()
        .map(|l| format!("N={} {}", l.n, l.errors))
        .collect::<Vec<_>>()
        .join("; ")
}

fn criterion1() -> (bool, String) {
    let levels = match study(0.1, 0.1) {
        Ok(l) => l,
        Err(e) => return (false, e),
    };
    let s = slopes(&levels);
    let e = levels[0].errors;
    let er1_ok = within(e.er1, 2.07e-2);
    let er5_ok = within(e.er5, 1.12e-2);
    let slope_ok = [0, 1, 4].iter().all(|&k| column(&s, k).iter().all(|v| (1.0..=1.6).contains(v)));
    let wall: f64 = levels.iter().map(|l| l.wall_seconds).sum();
    let detail = format!(
        "Er1(32)={:.3e} [2.07e-2 +-40%: {er1_ok}] Er5(32)={:.3e} [1.12e-2 +-40%: {er5_ok}] slopes Er1 {} Er2 {} Er5 {} [1.0, 1.6] wall {wall:.0}s | {}",
        e.er1,
        e.er5,
        fmt(&column(&s, 0)),
        fmt(&column(&s, 1)),
        fmt(&column(&s, 4)),
        errors_line(&levels)
    );
    (er1_ok && er5_ok && slope_ok, detail)
}

fn criterion2() -> (bool, String) {
    let levels = match study(0.1, 1e-3) {
        Ok(l) => l,
        Err(e) => return (false, e),
    };
    let s = slopes(&levels);
    let er1 = levels[0].errors.er1;
    let er1_ok = within(er1, 1.75e-2);
    let er6 = column(&s, 5);
    let increasing = er6.windows(2).all(|w| w[1] > w[0]);
    let low_ok = (0..5).all(|k| column(&s, k).iter().all(|&v| v >= 1.0));
    let lows: Vec<String> = (0..5).map(|k| format!("Er{} {}", k + 1, fmt(&column(&s, k)))).collect();
    let detail = format!(
        "Er1(32)={er1:.3e} [1.75e-2 +-40%: {er1_ok}] Er6 slopes {} [increasing: {increasing}] {} [>= 1.0: {low_ok}] | {}",
        fmt(&er6),
        lows.join(" "),
        errors_line(&levels)
    );
    (er1_ok && increasing && low_ok, detail)
}

fn criterion3() -> (bool, String) {
    let levels = match study(1.0, 0.0) {
        Ok(l) => l,
        Err(e) => return (false, e),
    };
    let s = slopes(&levels);
    let (er5, er6) = (column(&s, 4), column(&s, 5));
    let er5_ok = er5.iter().all(|&v| v >= 1.0);
    let er6_ok = er6.iter().all(|&v| v < 0.8);
    let detail = format!(
        "Er5 slopes {} [>= 1.0: {er5_ok}] Er6 slopes {} [< 0.8: {er6_ok}] | {}",
        fmt(&er5),
        fmt(&er6),
        errors_line(&levels)
    );
    (er5_ok && er6_ok, detail)
}

fn suites(reports: Vec<SuiteReport>) -> (bool, String) {
    let passed = reports.iter().all(|r| r.passed());
    let detail = reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" | ");
    (passed, detail)
}

fn main() -> ExitCode {
    let cfg = CheckConfig::default();
    assert_eq!(cfg.samples, 100_000);
    type Run = Box<dyn Fn() -> (bool, String)>;
    let cases: Vec<(u32, &'static str, Run)> = vec![
        (1, "convergence (0.1, 0.1)", Box::new(criterion1)),
        (2, "convergence (0.1, 0.001)", Box::new(criterion2)),
        (3, "degenerate (1, 0)", Box::new(criterion3)),
        (
            4,
            "cancellation identity and adjugate",
            Box::new(move || {
                suites(vec![
                    verify::lemma5_suite(cfg.samples, cfg.seed, peterlin::scheme::adjugate),
                    verify::adjugate_suite(cfg.samples, cfg.seed + 1),
                ])
            }),
        ),
        (5, "jacobian vs finite differences", Box::new(|| suites(vec![verify::jacobian_suite(&CheckConfig::default())]))),
        (
            6,
            "reduction oracles",
            Box::new(|| {
                let c = CheckConfig::default();
                suites(vec![verify::transport_reduction_suite(&c), verify::reaction_ode_suite(&c)])
            }),
        ),
        (7, "stokes projection", Box::new(|| suites(vec![verify::stokes_suite(&CheckConfig::default())]))),
        (8, "forcing vs finite differences", Box::new(|| suites(vec![verify::forcing_fd_suite(&CheckConfig::default())]))),
    ];
    let mut results = Vec::new();
    for (id, name, run) in cases {
        let start = Instant::now();
        let (passed, detail) = run();
        let c = Criterion {
            id,
            name,
            passed,
            detail: format!("{detail} ({:.1}s)", start.elapsed().as_secs_f64()),
        };
        println!("{} {}. {} :: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
        results.push(c);
    }
    let failed: Vec<u32> = results.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    println!("{}/{} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
