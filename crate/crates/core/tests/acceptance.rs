//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use empmo::harness::{self, Execution};
use empmo::instances::{fixture_graph, generate_planted, PlantedSpec};
use empmo::oracles::{self, brute_force_pseudoboolean, exact_path_catalog, payoff_runtime_predictor};
use empmo::pseudoboolean::{
    run_algorithm, run_empmo_payoff, BitString, PbAlgorithm, ProblemKind, PseudoBooleanProblem, Start, StopRule,
};
use empmo::shortestpath::{
    box_of, consensus_at_level, population_bound, run_sp, ApproxParams, Path, SpAlgorithm, SpEntry, SpRunConfig,
    WeightedDigraph,
};
use num_traits::ToPrimitive;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pb(kind: ProblemKind, n: usize) -> PseudoBooleanProblem {
    PseudoBooleanProblem::new(kind, n).expect("valid problem")
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_evaluations(alg: PbAlgorithm, kind: ProblemKind, n: usize, phi: Option<f64>, seeds: u64) -> f64 {
    let evals: Vec<f64> = (0..seeds)
        .map(|seed| {
            let t = run_algorithm(alg, pb(kind, n), phi, &Start::Uniform, seed, &StopRule::at_target()).expect("run");
            assert!(t.hit_time.is_some(), "{} n={n} seed={seed} missed the target", alg.id());
            t.evaluations as f64
        })
        .collect();
    mean(&evals)
}

fn c1_pseudoboolean_oracle() -> Check {
    for n in [4usize, 6, 8, 10, 12, 14] {
        let c = brute_force_pseudoboolean(&pb(ProblemKind::Bpaoaz, n)).map_err(|e| e.to_string())?;
        for m in 0..2 {
            ensure(c.party_front(m).len() == n / 2 + 1, || {
                format!("n={n} party {m} front size {}", c.party_front(m).len())
            })?;
            ensure(c.party_solutions(m).len() == 1 << (n / 2), || {
                format!("n={n} party {m} set size {}", c.party_solutions(m).len())
            })?;
        }
        let common = c.common_solutions();
        ensure(common == BTreeSet::from([BitString::ones(n)]), || {
            format!("n={n} common set {common:?}")
        })?;
        let single = brute_force_pseudoboolean(&pb(ProblemKind::Aoaz, n)).map_err(|e| e.to_string())?;
        let size = single.party_solutions(0).len();
        ensure(size == (1 << (n / 2 + 1)) - 1, || {
            format!("n={n} four-objective set size {size}")
        })?;
    }
    Ok("n in 4..=14: fronts n/2+1, sets 2^(n/2), four-objective 2^(n/2+1)-1, common {1^n}".to_string())
}

/// Every simple path from the source to `target`.
fn simple_paths(g: &WeightedDigraph, target: usize) -> Vec<Vec<usize>> {
    fn walk(g: &WeightedDigraph, target: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *stack.last().unwrap();
        if last == target {
            out.push(stack.clone());
            return;
        }
        for v in g.successors(last).collect::<Vec<_>>() {
            if !stack.contains(&v) {
                stack.push(v);
                walk(g, target, stack, out);
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(g, target, &mut vec![1], &mut out);
    out
}

fn c2_fixture_golden() -> Check {
    let g = fixture_graph();
    // (path, party 1, party 2) as tabulated for the five-vertex example.
    let table: [(&[usize], [u64; 2], [u64; 2]); 10] = [
        (&[1, 2, 5], [10, 4], [8, 5]),
        (&[1, 2, 3, 5], [5, 8], [8, 8]),
        (&[1, 2, 3, 4, 5], [8, 7], [6, 7]),
        (&[1, 3, 5], [4, 5], [7, 8]),
        (&[1, 3, 4, 5], [7, 4], [5, 7]),
        (&[1, 2], [1, 2], [2, 4]),
        (&[1, 2, 3], [4, 5], [4, 5]),
        (&[1, 3], [3, 2], [3, 5]),
        (&[1, 3, 4], [5, 3], [4, 6]),
        (&[1, 2, 3, 4], [6, 6], [5, 6]),
    ];
    let mut listed: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (vs, f1, f2) in table {
        let p = Path::new(vs.to_vec()).map_err(|e| e.to_string())?;
        let f = g.eval_path(&p).map_err(|e| e.to_string())?;
        ensure(f.party(0).values() == f1 && f.party(1).values() == f2, || {
            format!("{p} evaluates to {f}")
        })?;
        listed.insert(vs.to_vec());
    }
    let all: BTreeSet<Vec<usize>> = (2..=5).flat_map(|t| simple_paths(&g, t)).collect();
    ensure(all == listed, || format!("graph has simple paths {all:?}"))?;

    let catalog = exact_path_catalog(&g).map_err(|e| e.to_string())?;
    let names = |s: BTreeSet<Path>| s.iter().map(|p| p.to_string()).collect::<Vec<_>>();
    let e5 = catalog.get(5).ok_or("no endpoint 5")?;
    ensure(names(e5.party_solutions(0)) == ["(1,3,4,5)", "(1,3,5)"], || {
        format!("party 1 set {:?}", names(e5.party_solutions(0)))
    })?;
    ensure(names(e5.party_solutions(1)) == ["(1,2,5)", "(1,3,4,5)"], || {
        format!("party 2 set {:?}", names(e5.party_solutions(1)))
    })?;
    ensure(names(e5.common_solutions()) == ["(1,3,4,5)"], || {
        format!("common set {:?}", names(e5.common_solutions()))
    })?;
    for (v, expect) in [(2, "(1,2)"), (3, "(1,3)"), (4, "(1,3,4)")] {
        let c = catalog.get(v).ok_or("missing endpoint")?;
        ensure(names(c.common_solutions()) == [expect], || {
            format!("endpoint {v} common {:?}", names(c.common_solutions()))
        })?;
    }
    Ok("all ten tabulated paths match; endpoint 5 party sets and common sets exact".to_string())
}

fn c3_payoff_predictor() -> Check {
    let n = 50;
    let predicted = payoff_runtime_predictor(n as u64, n as u64)
        .to_f64()
        .ok_or("predictor overflow")?;
    let evals: Vec<f64> = (0..500)
        .map(|seed| {
            let start = Start::Fixed(BitString::zeros(n));
            run_empmo_payoff(pb(ProblemKind::Bpaoaz, n), &start, seed, &StopRule::at_target())
                .expect("run")
                .evaluations as f64
        })
        .collect();
    let m = mean(&evals);
    let rel = (m - predicted).abs() / predicted;
    let msg = format!(
        "mean {m:.2} vs predicted {predicted:.2} (rel. error {:.1}%)",
        rel * 100.0
    );
    ensure(rel <= 0.10, || msg.clone())?;
    Ok(msg)
}

fn c4_runtime_ordering() -> Check {
    let mut lines = Vec::new();
    for n in [40usize, 80] {
        let semo = mean_evaluations(PbAlgorithm::Semo, ProblemKind::Aoaz, n, None, 10);
        let simple = mean_evaluations(PbAlgorithm::EmpmoSimple, ProblemKind::Bpaoaz, n, None, 10);
        let random = mean_evaluations(PbAlgorithm::EmpmoRandom, ProblemKind::Bpaoaz, n, Some(0.5), 10);
        let payoff = mean_evaluations(PbAlgorithm::EmpmoPayoff, ProblemKind::Bpaoaz, n, None, 10);
        let line = format!("n={n}: semo {semo:.0} > simple {simple:.0} > random {random:.0} >= payoff {payoff:.0}");
        ensure(
            semo >= 1.2 * simple && simple >= 1.2 * random && random >= payoff,
            || line.clone(),
        )?;
        lines.push(line);
    }
    Ok(lines.join("; "))
}

fn c5_phi_u_shape() -> Check {
    let at = |phi: f64| mean_evaluations(PbAlgorithm::EmpmoRandom, ProblemKind::Bpaoaz, 60, Some(phi), 10);
    let (low, mid, high) = (at(0.05), at(0.5), at(0.95));
    let msg = format!(
        "phi 0.05: {low:.0} ({:.2}x), 0.5: {mid:.0}, 0.95: {high:.0} ({:.2}x)",
        low / mid,
        high / mid
    );
    ensure(low > 1.5 * mid && high > 1.5 * mid, || msg.clone())?;
    Ok(msg)
}

fn c6_population_bound() -> Check {
    let params = ApproxParams::uniform(1.0, 2.0).map_err(|e| e.to_string())?;
    let mut worst = Vec::new();
    for n in [10usize, 20, 30] {
        let g = generate_planted(&PlantedSpec::new(n, 6))
            .map_err(|e| e.to_string())?
            .graph;
        let r = params.box_base(n);
        let bound = population_bound(&g, r);
        let mut largest = 0;
        for seed in 0..20 {
            let config = SpRunConfig::new(params, 100_000);
            let t = run_sp(SpAlgorithm::EmpmoConsSp, &g, &config, None, seed).map_err(|e| e.to_string())?;
            ensure(t.max_population as u128 <= bound, || {
                format!("n={n} seed={seed}: population {} exceeds {bound}", t.max_population)
            })?;
            largest = largest.max(t.max_population);
        }
        worst.push(format!("n={n} max {largest} <= {bound}"));
    }
    Ok(format!("0 violations over 60 runs; {}", worst.join(", ")))
}

fn prefix_closed(g: &WeightedDigraph) -> Result<usize, String> {
    let catalog = exact_path_catalog(g).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for v in g.endpoints() {
        for p in catalog.get(v).ok_or("missing endpoint")?.common_solutions() {
            let mut prefix = p.parent_prefix();
            while let Some(q) = prefix {
                if q.is_empty() {
                    break;
                }
                let common = catalog.get(q.endpoint()).ok_or("missing endpoint")?.common_solutions();
                ensure(common.contains(&q), || format!("prefix {q} of {p} is not common"))?;
                checked += 1;
                prefix = q.parent_prefix();
            }
        }
    }
    Ok(checked)
}

fn c7_prefix_closure() -> Check {
    let mut checked = prefix_closed(&fixture_graph())?;
    for i in 0..20u64 {
        let spec = PlantedSpec {
            jitter: i % 4,
            ..PlantedSpec::new(5 + (i % 5) as usize, 100 + i)
        };
        checked += prefix_closed(&generate_planted(&spec).map_err(|e| e.to_string())?.graph)?;
    }
    Ok(format!(
        "0 violations; {checked} prefixes checked on the fixture and 20 planted graphs"
    ))
}

fn c8_convergence() -> Check {
    let params = ApproxParams::uniform(1.0, 2.0).map_err(|e| e.to_string())?;
    let config = SpRunConfig::new(params, 1_000_000);
    let mut notes = Vec::new();
    for (name, g) in [
        ("fixture", fixture_graph()),
        (
            "planted n=10",
            generate_planted(&PlantedSpec::new(10, 1))
                .map_err(|e| e.to_string())?
                .graph,
        ),
    ] {
        let reference = oracles::common_reference(&g).map_err(|e| e.to_string())?;
        let cons = run_sp(SpAlgorithm::EmpmoConsSp, &g, &config, Some(&reference), 1).map_err(|e| e.to_string())?;
        let last = cons.metrics.last().ok_or("no metric samples")?;
        ensure(
            last.mean_eps_endpoints == 0.0 && last.covered_endpoints == reference.endpoint_count(),
            || format!("{name}: cons per-endpoint minimum eps {last:?}"),
        )?;

        let simple = run_sp(SpAlgorithm::EmpmoSimpleSp, &g, &config, Some(&reference), 1).map_err(|e| e.to_string())?;
        let outcome = simple.consensus.as_ref().ok_or("simple produced no consensus")?;
        ensure(outcome.failures().is_empty(), || {
            format!("{name}: no consensus at {:?}", outcome.failures())
        })?;
        let relax = outcome.largest_relaxation().unwrap_or(f64::INFINITY);
        ensure(relax <= 2.0, || format!("{name}: relaxation {relax}"))?;
        ensure(outcome.endpoints.len() == g.n() - 1, || {
            format!("{name}: consensus covers {} endpoints", outcome.endpoints.len())
        })?;

        let demo = run_sp(SpAlgorithm::DemoSp, &g, &config, Some(&reference), 1).map_err(|e| e.to_string())?;
        let demo_max = demo.metrics.last().ok_or("no metric samples")?.max_eps;
        if name == "fixture" {
            ensure(demo_max > 0.0, || format!("{name}: demo max eps {demo_max}"))?;
            let kept: BTreeSet<String> = demo
                .archive
                .iter()
                .filter(|e| e.endpoint() == 5)
                .map(|e| e.path.to_string())
                .collect();
            ensure(kept.contains("(1,2,5)") && kept.contains("(1,3,5)"), || {
                format!("demo endpoint-5 members {kept:?}")
            })?;
        }
        notes.push(format!(
            "{name}: cons min-eps 0 (max {}), simple eps2' {relax}, demo max {demo_max}",
            last.max_eps
        ));
    }
    Ok(notes.join("; "))
}

fn entry(g: &WeightedDigraph, vs: &[usize]) -> SpEntry {
    SpEntry::evaluate(g, Path::new(vs.to_vec()).expect("path"), 0).expect("valid path")
}

fn c9_counterexample() -> Check {
    let g = fixture_graph();
    let p1 = vec![entry(&g, &[1, 3, 5]), entry(&g, &[1, 3, 4, 5])];
    let p2 = vec![entry(&g, &[1, 2, 5])];
    let boxes = |set: &[SpEntry], m: usize, r: f64| -> BTreeSet<Vec<u32>> {
        set.iter().map(|e| box_of(e.objectives.party(m).values(), r)).collect()
    };
    ensure(boxes(&p1, 0, 2.0) == BTreeSet::from([vec![2, 2]]), || {
        format!("P1 party-1 boxes {:?}", boxes(&p1, 0, 2.0))
    })?;
    ensure(boxes(&p2, 1, 2.0) == BTreeSet::from([vec![3, 2]]), || {
        format!("P2 boxes {:?}", boxes(&p2, 1, 2.0))
    })?;
    ensure(boxes(&p1, 1, 2.0) == BTreeSet::from([vec![2, 3], vec![2, 2]]), || {
        format!("P1 party-2 boxes {:?}", boxes(&p1, 1, 2.0))
    })?;
    let strict = consensus_at_level(&p1, &p2, 1.0);
    ensure(strict.is_empty(), || format!("intersection at eps 1: {strict:?}"))?;
    ensure(boxes(&p2, 1, 3.0) == BTreeSet::from([vec![1, 1]]), || {
        format!("relaxed P2 boxes {:?}", boxes(&p2, 1, 3.0))
    })?;
    ensure(boxes(&p1, 1, 3.0) == BTreeSet::from([vec![1, 1]]), || {
        format!("relaxed P1 boxes {:?}", boxes(&p1, 1, 3.0))
    })?;
    let relaxed = consensus_at_level(&p1, &p2, 2.0);
    ensure(relaxed == [0, 1], || format!("consensus at eps 2: {relaxed:?}"))?;
    let params = ApproxParams::uniform(1.0, 2.0).map_err(|e| e.to_string())?;
    let game = empmo::shortestpath::ultimatum_consensus(&p1, &p2, &params);
    let e5 = game.get(5).ok_or("no endpoint 5 outcome")?;
    ensure(e5.eps2_prime == Some(2.0) && e5.members.len() == 2, || {
        format!("game outcome {e5:?}")
    })?;
    Ok("empty at eps2'=1; box (1,1) holds (1,3,5) and (1,3,4,5) at eps2'=2".to_string())
}

fn c10_replay() -> Check {
    let sweep = "seeds = 0..4\n\
        [single]\nalgorithm = semo\nproblem = aoaz aorz\nn = 12\n\
        [multi]\nalgorithm = empmo-simple empmo-random empmo-payoff\nproblem = bpaoaz\nn = 12 16\nphi = 0.2 0.5\n\
        [sp]\nalgorithm = empmo-simple-sp empmo-cons-sp demo-sp\ninstance = fixture planted:n=8,seed=2\nbudget = 5000\n";
    let specs = harness::parse_sweep(sweep).map_err(|e| e.to_string())?;
    let outcomes = harness::run_batch(&specs, Execution::Parallel { jobs: 0 });
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = harness::write_outputs(dir.path(), "replay", &outcomes).map_err(|e| e.to_string())?;
    let rows = harness::read_summary_csv(&files.summary).map_err(|e| e.to_string())?;
    let mut ok = 0;
    for row in &rows {
        ensure(row.error.is_empty(), || format!("{} failed: {}", row.run_id, row.error))?;
        let r = harness::replay(&rows, &row.run_id).map_err(|e| e.to_string())?;
        ensure(r.identical(), || {
            format!("{} != {}", r.original.canonical(), r.replayed.canonical())
        })?;
        ok += 1;
    }
    Ok(format!("{ok}/{} rows identical", rows.len()))
}

/// Log-log growth of mean evaluations; reported, never gating.
fn report_slopes() {
    let sweep = "algorithm = empmo-payoff empmo-random\nproblem = bpaoaz\nn = 50 100 200 400\nphi = 0.5\nseeds = 0..10\n";
    let Ok(specs) = harness::parse_sweep(sweep) else {
        println!("INFO slope fits unavailable");
        return;
    };
    let rows: Vec<_> = harness::run_batch(&specs, Execution::Parallel { jobs: 0 })
        .into_iter()
        .map(|o| o.row)
        .collect();
    for fit in harness::fit_slopes(&harness::aggregate(&rows)) {
        let worst = fit.residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
        println!(
            "INFO slope {} over n = {:?}: {:.3} (max |residual| {:.3})",
            fit.key.algorithm,
            fit.points.iter().map(|p| p.0).collect::<Vec<_>>(),
            fit.slope,
            worst
        );
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "1 pseudo-Boolean oracle equivalence",
            Duration::from_secs(60),
            c1_pseudoboolean_oracle,
        ),
        ("2 fixture golden tables", Duration::from_secs(1), c2_fixture_golden),
        (
            "3 payoff runtime predictor",
            Duration::from_secs(60),
            c3_payoff_predictor,
        ),
        ("4 runtime ordering", Duration::from_secs(600), c4_runtime_ordering),
        ("5 phi U-shape", Duration::from_secs(600), c5_phi_u_shape),
        ("6 population bound", Duration::from_secs(600), c6_population_bound),
        ("7 prefix closure", Duration::from_secs(300), c7_prefix_closure),
        ("8 epsilon convergence", Duration::from_secs(900), c8_convergence),
        ("9 consensus counterexample", Duration::from_secs(1), c9_counterexample),
        ("10 replay determinism", Duration::from_secs(600), c10_replay),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let clock = Instant::now();
        let result = check();
        let took = clock.elapsed();
        let result = match result {
            Ok(m) if took > limit => Err(format!("{m}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(m) => println!("PASS criterion {name} [{took:.2?}]: {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL criterion {name} [{took:.2?}]: {m}");
            }
        }
    }
    report_slopes();
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
