//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use common::{data, locale_action_config, locale_config, log_dijkstra, random_instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riskplan::oracle::{batch_failure_band, brute_force_min_risk, simulate_table, EnumerationBudget};
use riskplan::planner::{plan_lookback_n, plan_risk_aware, LookbackDepth, PlanOptions};
use riskplan::risk::{compose_state_risk, round2, RiskConfig, RiskElementSpec, RiskModel, RiskTable, RiskValue};
use riskplan::workspace::{Cell, Connectivity, Graph, GridMap, Path};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Plain product over the listed state risks.
fn product_risk(states: &[f64]) -> f64 {
    let mut survive = 1.0;
    for s in states {
        survive *= 1.0 - s;
    }
    1.0 - survive
}

fn listed(table: &RiskTable) -> Vec<f64> {
    table.rows().iter().map(|r| r.state.unwrap().get()).collect()
}

fn table_rows() -> Outcome {
    let mut bad = Vec::new();
    let mut rows = 0;
    for (name, table) in [("red", RiskTable::demo_red()), ("green", RiskTable::demo_green())] {
        for row in table.rows() {
            rows += 1;
            let composed = round2(compose_state_risk(&row.element_risks).get());
            if composed != round2(row.state.unwrap().get()) {
                bad.push(format!("{name} row {}: {composed}", row.index));
            }
        }
    }
    let example: Vec<RiskValue> = [0.01, 0.01, 0.06, 0.05, 0.02, 0.0]
        .iter()
        .map(|&r| RiskValue::new(r).unwrap())
        .collect();
    let example = round2(compose_state_risk(&example).get());
    check(
        bad.is_empty() && rows == 19 && example == 0.14,
        format!("{rows} rows reproduce the State column to two decimals; mismatches {bad:?}; example row -> {example}"),
    )
}

fn path_risks() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (table, printed, expected_listed, expected_rows) in [
        (RiskTable::demo_red(), 0.714, 0.7166, 0.7143),
        (RiskTable::demo_green(), 0.575, 0.5769, 0.5752),
    ] {
        let from_states = table.listed_path_risk().get();
        let independent = product_risk(&listed(&table));
        let from_rows = table.path_risk().get();
        ok &= (from_states - printed).abs() <= 0.01;
        ok &= (from_states - independent).abs() <= 1e-12;
        ok &= (from_states - expected_listed).abs() < 5e-5;
        ok &= (from_rows - expected_rows).abs() < 5e-5;
        parts.push(format!(
            "{from_states:.4} (printed {printed}, from element rows {from_rows:.4})"
        ));
    }
    check(ok, parts.join("; "))
}

fn monte_carlo() -> Outcome {
    let clock = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (table, physical, seed) in [(RiskTable::demo_red(), 0.8, 11), (RiskTable::demo_green(), 0.6, 12)] {
        let report = simulate_table(&table, 100_000, seed).map_err(|e| e.to_string())?;
        let exact = table.listed_path_risk().get();
        let (lo, hi) = batch_failure_band(&listed(&table), 10, 20_000, 0.95, seed + 100).map_err(|e| e.to_string())?;
        ok &= (report.empirical_failure_rate - exact).abs() <= 0.01;
        ok &= (lo..=hi).contains(&physical);
        parts.push(format!(
            "empirical {:.4} vs {exact:.4}, 10-trial band [{lo:.1}, {hi:.1}] holds {physical}",
            report.empirical_failure_rate
        ));
    }
    let secs = clock.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    parts.push(format!("{secs:.2} s"));
    check(ok, parts.join("; "))
}

fn brute_force_agreement() -> Outcome {
    let clock = Instant::now();
    let budget = EnumerationBudget::default();
    let (mut maps, mut goals, mut worst) = (0, 0, 0.0f64);
    let mut seed = 0u64;
    while maps < 100 {
        seed += 1;
        let config = locale_action_config(seed);
        let conn = if seed.is_multiple_of(4) {
            Connectivity::Eight
        } else {
            Connectivity::Four
        };
        let density = 0.15 + 0.05 * (seed % 4) as f64;
        let Some(inst) = random_instance(6, 6, density, 70_000 + seed, conn, &config) else {
            continue;
        };
        maps += 1;
        let plan = plan_risk_aware(&inst.graph, inst.start, &inst.model, &PlanOptions::default())
            .map_err(|e| e.to_string())?;
        for &goal in inst.graph.vertices() {
            let brute =
                brute_force_min_risk(&inst.graph, inst.start, goal, &inst.model, &budget).map_err(|e| e.to_string())?;
            match (plan.risk(goal), brute) {
                (Some(p), Some(b)) => {
                    worst = worst.max((p.get() - b.risk.get()).abs());
                    goals += 1;
                }
                (None, None) => {}
                _ => return Err(format!("seed {seed}: reachability of {goal} differs")),
            }
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    check(
        worst <= 1e-12 && secs < 60.0,
        format!("{maps} maps, {goals} goals, max |planner - brute force| = {worst:.1e}, {secs:.1} s"),
    )
}

fn locale_reduction() -> Outcome {
    let (mut maps, mut worst) = (0, 0.0f64);
    let mut seed = 0u64;
    while maps < 100 {
        seed += 1;
        let conn = if seed.is_multiple_of(2) {
            Connectivity::Four
        } else {
            Connectivity::Eight
        };
        let (w, h) = (5 + (seed % 6) as usize, 4 + (seed % 5) as usize);
        let Some(inst) = random_instance(w, h, 0.25, 90_000 + seed, conn, &locale_config(seed)) else {
            continue;
        };
        maps += 1;
        let plan = plan_risk_aware(&inst.graph, inst.start, &inst.model, &PlanOptions::default())
            .map_err(|e| e.to_string())?;
        let oracle = log_dijkstra(&inst.graph, &inst.model, inst.start);
        for &v in inst.graph.vertices() {
            match (plan.risk(v), oracle[v.0]) {
                (Some(p), Some(o)) => {
                    let rel = if o > 0.0 { (p.get() - o).abs() / o } else { p.get() };
                    worst = worst.max(rel);
                }
                (None, None) => {}
                _ => return Err(format!("seed {seed}: reachability of {v} differs")),
            }
        }
    }
    check(worst <= 1e-9, format!("{maps} maps, max relative error {worst:.1e}"))
}

fn mud_case() -> Outcome {
    let map = GridMap::load(data("maps/mud.map")).map_err(|e| e.to_string())?;
    let config = RiskConfig::load(data("configs/mud.json")).map_err(|e| e.to_string())?;
    let graph = Graph::build(&map, Connectivity::Four);
    let model = RiskModel::new(&map, &config).map_err(|e| e.to_string())?;
    let (start, goal) = (map.id(Cell::new(1, 0)).unwrap(), map.id(Cell::new(1, 6)).unwrap());
    let brute = brute_force_min_risk(&graph, start, goal, &model, &EnumerationBudget::default())
        .map_err(|e| e.to_string())?
        .ok_or("mud goal unreachable")?
        .risk
        .get();
    let at = |n| -> Result<f64, String> {
        let plan = plan_lookback_n(
            &graph,
            start,
            LookbackDepth::new(n).unwrap(),
            &model,
            &PlanOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        Ok(plan.risk(goal).ok_or("unreachable")?.get())
    };
    let (two, four) = (at(2)?, at(4)?);
    check(
        brute < two && (four - brute).abs() <= 1e-12,
        format!("brute force {brute:.4} < n=2 {two:.4}; n=4 {four:.4}"),
    )
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for _ in 0..1000 {
        let map = GridMap::random(7, 7, rng.random_range(0.0..0.35), rng.random()).map_err(|e| e.to_string())?;
        let conn = if rng.random() {
            Connectivity::Four
        } else {
            Connectivity::Eight
        };
        let graph = Graph::build(&map, conn);
        let Some(&start) = graph.vertices().first() else {
            continue;
        };
        let mut elements =
            vec![RiskElementSpec::distance(rng.random_range(1.0..4.0), rng.random_range(0.0..0.2)).unwrap()];
        if rng.random() {
            elements.push(RiskElementSpec::visibility(rng.random_range(1.0..4.0), rng.random_range(0.0..0.2)).unwrap());
        }
        if rng.random() {
            elements.push(RiskElementSpec::action_length(rng.random_range(0.0..0.1)).unwrap());
            elements.push(RiskElementSpec::turn(rng.random_range(0.0..0.3)).unwrap());
        }
        if rng.random() {
            elements.push(RiskElementSpec::tether_length(rng.random_range(0.0..0.1), 10.0).unwrap());
            elements.push(RiskElementSpec::tether_contacts(0.03, 0.2).unwrap());
        }
        let model = RiskModel::new(&map, &RiskConfig::new(elements)).map_err(|e| e.to_string())?;
        let mut states = vec![start];
        for _ in 0..rng.random_range(1..20) {
            let nb = graph.neighbors(*states.last().unwrap());
            if nb.is_empty() {
                break;
            }
            states.push(nb[rng.random_range(0..nb.len())]);
        }
        let path = Path::new(states).unwrap();
        let mut last = 0.0;
        for len in 1..=path.len() {
            let r = model.path_risk(&path.prefix(len)).map_err(|e| e.to_string())?.get();
            if !(0.0..=1.0).contains(&r) || r < last {
                violations += 1;
            }
            last = r;
        }
        let mut risks: Vec<RiskValue> = (0..rng.random_range(1..8))
            .map(|_| RiskValue::new(rng.random()).unwrap())
            .collect();
        let before = compose_state_risk(&risks);
        for i in (1..risks.len()).rev() {
            risks.swap(i, rng.random_range(0..=i));
        }
        if compose_state_risk(&risks) != before {
            violations += 1;
        }
    }
    check(
        violations == 0,
        format!("1000 (path, config) pairs, {violations} violations"),
    )
}

fn depth_tradeoff() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_riskplan"))
        .args([
            "bench",
            "--size",
            "14",
            "--maps",
            "3",
            "--density",
            "0.1",
            "--connectivity",
            "4,8",
        ])
        .args(["--depth", "1,2,3,4", "--out"])
        .arg(tmp.path())
        .env_remove("RISKPLAN_BUDGET")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let mut reader = csv::Reader::from_path(tmp.path().join("bench.csv")).map_err(|e| e.to_string())?;
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mut ok = rows.len() == 2 * 3 * 4;
    let mut parts = Vec::new();
    for c in [4u128, 8] {
        let group: Vec<_> = rows.iter().filter(|r| r[0].parse::<u128>() == Ok(c)).collect();
        let mut bound_ratios = Vec::new();
        let mut found_ratios = Vec::new();
        for map in group.chunks(4) {
            for w in map.windows(2) {
                let b: (f64, f64) = (w[0][4].parse().unwrap(), w[1][4].parse().unwrap());
                let f: (f64, f64) = (w[0][5].parse().unwrap(), w[1][5].parse().unwrap());
                bound_ratios.push(b.1 / b.0);
                found_ratios.push(f.1 / f.0);
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        ok &= bound_ratios.iter().all(|&r| r == c as f64);
        // Simple paths rule out U-turns, so discovered states grow by about C - 1.
        ok &= found_ratios.iter().all(|&r| r > 1.0 && r <= c as f64);
        parts.push(format!(
            "C={c}: lifted-state bound ratio {:.2}, discovered ratio {:.2}",
            mean(&bound_ratios),
            mean(&found_ratios)
        ));
    }
    check(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("table rows compose to their state risks", table_rows),
        ("path risk of the red and green tables", path_risks),
        ("simulated failure rates", monte_carlo),
        ("planner equals brute force (locale + action)", brute_force_agreement),
        ("locale-only planner equals log-space Dijkstra", locale_reduction),
        ("mud scenario needs deeper history", mud_case),
        ("path risk monotone, composition order-free", monotonicity),
        ("lifted-state growth per unit depth", depth_tradeoff),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
