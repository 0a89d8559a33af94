//! Acceptance run: one PASS/FAIL line per criterion with its wall time and
//! time limit. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use opk::verify::*;

struct Criterion {
    id: &'static str,
    title: &'static str,
    limit_secs: f64,
    run: Box<dyn Fn() -> Vec<Check>>,
}

fn main() -> ExitCode {
    let exact = VerifyConfig::default();
    let mc = VerifyConfig {
        samples: 1_000_000,
        ..VerifyConfig::default()
    };
    let criteria: Vec<Criterion> = vec![
        Criterion {
            id: "01",
            title: "d2 = 0 over Q (A-inf, Mor(A-inf), L-inf{1})",
            limit_secs: 60.0,
            run: Box::new({
                let c = exact.clone();
                move || vec![d2_rational(&c)]
            }),
        },
        Criterion {
            id: "02",
            title: "d2 = 0 over F2 (OCHA, Mor(L-inf), Mor(OCHA))",
            limit_secs: 120.0,
            run: Box::new({
                let c = exact.clone();
                move || vec![d2_mod2(&c)]
            }),
        },
        Criterion {
            id: "03",
            title: "2-cycle composition gives 4 graphs with coefficient +1",
            limit_secs: 1.0,
            run: Box::new(|| vec![composition_example()]),
        },
        Criterion {
            id: "04",
            title: "representation identity on small compositions",
            limit_secs: 60.0,
            run: Box::new({
                let c = exact.clone();
                move || vec![representation_sweep(&c)]
            }),
        },
        Criterion {
            id: "05",
            title: "Schouten bracket identities",
            limit_secs: 30.0,
            run: Box::new({
                let c = exact.clone();
                move || vec![schouten_identities(&c)]
            }),
        },
        Criterion {
            id: "06",
            title: "Bernoulli series and deformed bracket",
            limit_secs: 60.0,
            run: Box::new(|| vec![bernoulli_suite()]),
        },
        Criterion {
            id: "07",
            title: "edge weight, degree vanishing, angle triangles at 1e6 samples",
            limit_secs: 300.0,
            run: Box::new({
                let c = mc.clone();
                move || vec![edge_weights(&c), degree_vanishing(&c), angle_vanishing(&c)]
            }),
        },
        Criterion {
            id: "08",
            title: "Stokes identity on two 4-vertex families at 1e6 samples",
            limit_secs: 600.0,
            run: Box::new({
                let c = mc.clone();
                move || vec![stokes_families(&c)]
            }),
        },
        Criterion {
            id: "09",
            title: "wedge weight snaps to 1/2",
            limit_secs: 300.0,
            run: Box::new({
                let c = mc.clone();
                move || vec![wedge_snap(&c)]
            }),
        },
        Criterion {
            id: "10",
            title: "order-2 star product for constant gamma",
            limit_secs: 600.0,
            run: Box::new({
                let c = mc.clone();
                move || vec![moyal_star(&c)]
            }),
        },
        Criterion {
            id: "11",
            title: "homogeneous propagator recovers the bracket",
            limit_secs: 300.0,
            run: Box::new({
                let c = mc.clone();
                move || vec![homogeneous_recovery(&c)]
            }),
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let checks = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let ok = checks.iter().all(|k| k.passed) && secs < c.limit_secs;
        if !ok {
            failed += 1;
        }
        let status = if ok { "PASS" } else { "FAIL" };
        println!(
            "[{}] {status} {} ({secs:.2}s, limit {:.0}s)",
            c.id, c.title, c.limit_secs
        );
        for k in &checks {
            println!("       {k}");
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
