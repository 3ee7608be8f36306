use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;

use serde::Serialize;
use serde_json::json;

use super::{
    budget_override, BenchArgs, Command, CompareArgs, DemoTable, InstanceArgs, OutputArgs, PlanArgs, SimulateArgs,
    TableArgs,
};
use crate::error::{Error, Result};
use crate::oracle::{
    brute_force_min_risk, failure_location_summary, simulate_hazards, EnumerationBudget, SimulationReport,
};
use crate::planner::{
    plan_additive_baseline, plan_lookback_n, plan_risk_aware, BaselineWeights, LookbackDepth, PlanOptions, PlanResult,
    Reach,
};
use crate::risk::{RiskConfig, RiskModel, RiskTable, RiskValue, StateRisk};
use crate::workspace::{Cell, Connectivity, Graph, GridMap, Path, VertexId};

/// Risks closer than this are reported as a tie.
const TIE_TOLERANCE: f64 = 1e-12;
/// Two-sided normal quantile for the 99.9% binomial interval.
const Z_999: f64 = 3.290_526_731_491_926;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// A requested goal has no feasible path.
    Unreachable,
}

pub fn run_command(command: &Command) -> Result<Outcome> {
    match command {
        Command::Plan(a) => cmd_plan(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Table(a) => cmd_table(a),
    }
}

fn plan_options() -> Result<PlanOptions> {
    let mut options = PlanOptions::default();
    if let Some(b) = budget_override()? {
        options.max_lifted_states = u128::from(b);
    }
    Ok(options)
}

fn enumeration_budget() -> Result<EnumerationBudget> {
    let mut budget = EnumerationBudget::default();
    if let Some(b) = budget_override()? {
        budget.max_paths = b;
    }
    Ok(budget)
}

fn load_config(path: Option<&FsPath>) -> Result<RiskConfig> {
    match path {
        Some(p) => RiskConfig::load(p),
        None => Ok(RiskConfig::demo_profile()),
    }
}

fn vertex(map: &GridMap, graph: &Graph, cell: Cell, what: &str) -> Result<VertexId> {
    let id = map.id(cell).ok_or_else(|| {
        Error::Config(format!(
            "{what} {cell} is outside the {}x{} map",
            map.height(),
            map.width()
        ))
    })?;
    if !graph.is_vertex(id) {
        return Err(Error::Config(format!("{what} {cell} is an occupied cell")));
    }
    Ok(id)
}

/// Loaded map, graph and risk model for one instance.
struct Instance {
    map: GridMap,
    graph: Graph,
    config: RiskConfig,
    model: RiskModel,
    start: VertexId,
    goal: Option<VertexId>,
    depth: LookbackDepth,
}

impl Instance {
    fn load(
        map: &FsPath,
        risk_config: Option<&FsPath>,
        start: Cell,
        goal: Option<Cell>,
        connectivity: u32,
        depth: u32,
    ) -> Result<Self> {
        let map = GridMap::load(map)?;
        let connectivity = Connectivity::from_count(connectivity)?;
        let depth = LookbackDepth::new(depth)?;
        let graph = Graph::build(&map, connectivity);
        let config = load_config(risk_config)?;
        let model = RiskModel::new(&map, &config)?;
        let start = vertex(&map, &graph, start, "start")?;
        let goal = goal.map(|g| vertex(&map, &graph, g, "goal")).transpose()?;
        Ok(Instance {
            map,
            graph,
            config,
            model,
            start,
            goal,
            depth,
        })
    }

    fn from_args(a: &InstanceArgs) -> Result<Self> {
        Self::load(
            &a.map,
            a.risk_config.as_deref(),
            a.start,
            a.goal,
            a.connectivity,
            a.depth,
        )
    }

    fn plan(&self, depth: LookbackDepth) -> Result<PlanResult> {
        let options = plan_options()?;
        if depth.get() == 2 {
            plan_risk_aware(&self.graph, self.start, &self.model, &options)
        } else {
            plan_lookback_n(&self.graph, self.start, depth, &self.model, &options)
        }
    }

    fn cells(&self, path: &Path) -> Vec<[usize; 2]> {
        path.states()
            .iter()
            .map(|&v| {
                let c = self.map.cell(v);
                [c.row, c.col]
            })
            .collect()
    }
}

fn prepare_out(output: &OutputArgs) -> Result<()> {
    fs::create_dir_all(&output.out)?;
    Ok(())
}

fn write(output: &OutputArgs, name: &str, contents: &str) -> Result<()> {
    fs::write(output.out.join(name), contents)?;
    Ok(())
}

#[derive(Serialize)]
struct PerState<'a> {
    element_risks: &'a [RiskValue],
    state_risk: RiskValue,
}

fn per_state_json(states: &[StateRisk]) -> Vec<PerState<'_>> {
    states
        .iter()
        .map(|s| PerState {
            element_risks: &s.element_risks,
            state_risk: s.state_risk,
        })
        .collect()
}

fn cmd_plan(a: &PlanArgs) -> Result<Outcome> {
    let inst = Instance::from_args(&a.instance)?;
    let goal = inst.goal.ok_or_else(|| Error::Config("plan needs --goal".into()))?;
    let plan = inst.plan(inst.depth)?;
    prepare_out(&a.output)?;
    let columns = inst.config.columns();
    let Some(route) = plan.route(goal) else {
        let doc = json!({
            "status": "unreachable",
            "vertex": goal,
            "start": inst.start,
            "depth": inst.depth,
            "connectivity": inst.graph.connectivity().count(),
            "columns": columns,
            "stats": plan.stats,
        });
        write(&a.output, "plan.json", &serde_json::to_string_pretty(&doc)?)?;
        println!(
            "goal {} is unreachable from {}",
            inst.map.cell(goal),
            inst.map.cell(inst.start)
        );
        return Ok(Outcome::Unreachable);
    };
    let states = inst.model.per_state(route.path.states())?;
    if a.output.format.json() {
        let doc = json!({
            "status": "reachable",
            "vertex": goal,
            "start": inst.start,
            "risk": route.risk,
            "path": route.path,
            "cells": inst.cells(&route.path),
            "depth": inst.depth,
            "connectivity": inst.graph.connectivity().count(),
            "columns": columns,
            "per_state": per_state_json(&states),
            "stats": plan.stats,
        });
        write(&a.output, "plan.json", &serde_json::to_string_pretty(&doc)?)?;
    }
    if a.output.format.csv() {
        write(
            &a.output,
            "table.csv",
            &RiskTable::from_states(&columns, &states).to_csv(),
        )?;
    }
    write(&a.output, "overlay.txt", &inst.map.render_overlay(route.path.states()))?;
    println!(
        "risk {:.4} over {} states ({} expansions)",
        route.risk.get(),
        route.path.len(),
        plan.stats.expansions
    );
    Ok(Outcome::Done)
}

fn cmd_compare(a: &CompareArgs) -> Result<Outcome> {
    let inst = Instance::from_args(&a.instance)?;
    let goal = inst.goal.ok_or_else(|| Error::Config("compare needs --goal".into()))?;
    let locale = inst.config.locale_only();
    if locale.is_empty() {
        return Err(Error::Config(
            "baseline needs at least one locale element in the configuration".into(),
        ));
    }
    let locale_model = RiskModel::new(&inst.map, &locale)?;
    let baseline = plan_additive_baseline(
        &inst.graph,
        inst.start,
        &locale_model,
        &BaselineWeights::uniform(locale.len()),
    )?;
    let aware = inst.plan(inst.depth)?;
    prepare_out(&a.output)?;
    let (Some(b), Some(r)) = (baseline.route(goal), aware.route(goal)) else {
        let doc = json!({ "status": "unreachable", "vertex": goal, "start": inst.start });
        write(&a.output, "compare.json", &serde_json::to_string_pretty(&doc)?)?;
        println!("goal {} is unreachable", inst.map.cell(goal));
        return Ok(Outcome::Unreachable);
    };
    let baseline_risk = inst.model.path_risk(&b.path)?.get();
    let aware_risk = inst.model.path_risk(&r.path)?.get();
    let ordering = if (baseline_risk - aware_risk).abs() <= TIE_TOLERANCE {
        "tie"
    } else if aware_risk < baseline_risk {
        "risk_aware_lower"
    } else {
        "baseline_lower"
    };

    let mut sweep = Vec::new();
    for &n in &a.sweep {
        let depth = LookbackDepth::new(n)?;
        let row = match plan_lookback_n(&inst.graph, inst.start, depth, &inst.model, &plan_options()?) {
            Ok(p) => match p.route(goal) {
                Some(route) => json!({
                    "depth": n,
                    "status": "ok",
                    "risk": route.risk,
                    "path": route.path,
                    "expansions": p.stats.expansions,
                    "lifted_states": p.stats.lifted_states,
                }),
                None => json!({ "depth": n, "status": "unreachable" }),
            },
            Err(Error::Budget { .. }) => json!({ "depth": n, "status": "skipped" }),
            Err(e) => return Err(e),
        };
        sweep.push(row);
    }

    let exhaustive = if a.exhaustive {
        match brute_force_min_risk(&inst.graph, inst.start, goal, &inst.model, &enumeration_budget()?) {
            Ok(Some(best)) => json!({
                "status": "ok",
                "risk": best.risk,
                "path": best.path,
                "enumerated": best.enumerated,
            }),
            Ok(None) => json!({ "status": "unreachable" }),
            Err(Error::Budget { .. }) => json!({ "status": "skipped" }),
            Err(e) => return Err(e),
        }
    } else {
        serde_json::Value::Null
    };

    let doc = json!({
        "status": "reachable",
        "vertex": goal,
        "start": inst.start,
        "connectivity": inst.graph.connectivity().count(),
        "baseline": {
            "path": b.path,
            "cells": inst.cells(&b.path),
            "additive_cost": b.additive_cost,
            "locale_risk": b.risk,
            "risk": baseline_risk,
        },
        "risk_aware": {
            "depth": inst.depth,
            "path": r.path,
            "cells": inst.cells(&r.path),
            "risk": aware_risk,
        },
        "ordering": ordering,
        "depth_sweep": sweep,
        "exhaustive": exhaustive,
    });
    write(&a.output, "compare.json", &serde_json::to_string_pretty(&doc)?)?;
    let mut overlays = String::new();
    writeln!(overlays, "baseline (risk {baseline_risk:.4})").unwrap();
    overlays.push_str(&inst.map.render_overlay(b.path.states()));
    writeln!(overlays, "\nrisk-aware (risk {aware_risk:.4})").unwrap();
    overlays.push_str(&inst.map.render_overlay(r.path.states()));
    write(&a.output, "overlay.txt", &overlays)?;
    println!("baseline risk {baseline_risk:.4}, risk-aware risk {aware_risk:.4}: {ordering}");
    Ok(Outcome::Done)
}

/// Normal-approximation binomial interval for the failure rate.
fn binomial_interval(p: f64, trials: u64, z: f64) -> (f64, f64) {
    let half = z * (p * (1.0 - p) / trials as f64).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

fn simulation_doc(report: &SimulationReport, extra: serde_json::Value) -> Result<serde_json::Value> {
    let (lo, hi) = binomial_interval(report.path_risk, report.trials, Z_999);
    let mut doc = serde_json::to_value(report)?;
    let obj = doc.as_object_mut().expect("report serializes to an object");
    obj.insert("interval_99_9".into(), json!([lo, hi]));
    obj.insert(
        "within_interval".into(),
        json!((lo..=hi).contains(&report.empirical_failure_rate)),
    );
    obj.insert(
        "summary".into(),
        serde_json::to_value(failure_location_summary(report))?,
    );
    if let serde_json::Value::Object(more) = extra {
        obj.extend(more);
    }
    Ok(doc)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Outcome> {
    let (hazards, extra) = if let Some(table) = &a.table {
        let table = RiskTable::load(table)?;
        let hazards: Vec<f64> = table.listed_states().iter().map(|r| r.get()).collect();
        (hazards, json!({ "source": "table" }))
    } else {
        let map = a
            .map
            .as_ref()
            .ok_or_else(|| Error::Config("simulate needs --map or --table".into()))?;
        let start = match (&a.path, a.start) {
            (Some(p), _) => *p.0.first().ok_or_else(|| Error::Config("--path is empty".into()))?,
            (None, Some(s)) => s,
            (None, None) => return Err(Error::Config("simulate needs --start and --goal, or --path".into())),
        };
        let inst = Instance::load(map, a.risk_config.as_deref(), start, a.goal, a.connectivity, a.depth)?;
        let path = match &a.path {
            Some(cells) => {
                let ids = cells
                    .0
                    .iter()
                    .map(|&c| vertex(&inst.map, &inst.graph, c, "path cell"))
                    .collect::<Result<Vec<_>>>()?;
                let path = Path::new(ids)?;
                inst.graph.check_feasible(&path)?;
                path
            }
            None => {
                let goal = inst.goal.ok_or_else(|| Error::Config("simulate needs --goal".into()))?;
                match inst.plan(inst.depth)?.get(goal) {
                    Some(Reach::Reachable(route)) => route.path.clone(),
                    _ => {
                        println!("goal {} is unreachable", inst.map.cell(goal));
                        return Ok(Outcome::Unreachable);
                    }
                }
            }
        };
        let hazards: Vec<f64> = inst
            .model
            .per_state(path.states())?
            .iter()
            .map(|s| s.state_risk.get())
            .collect();
        let extra = json!({ "source": "path", "path": path, "cells": inst.cells(&path) });
        (hazards, extra)
    };
    let report = simulate_hazards(&hazards, a.trials, a.seed)?;
    prepare_out(&a.output)?;
    if a.output.format.json() {
        let doc = simulation_doc(&report, extra)?;
        write(&a.output, "simulation.json", &serde_json::to_string_pretty(&doc)?)?;
    }
    if a.output.format.csv() {
        write(&a.output, "histogram.csv", &report.histogram_csv())?;
    }
    println!(
        "empirical failure rate {:.4} over {} trials, path risk {:.4}",
        report.empirical_failure_rate, report.trials, report.path_risk
    );
    Ok(Outcome::Done)
}

pub(crate) const BENCH_HEADER: &str =
    "connectivity,map,depth,vertices,lifted_bound,lifted_states,expansions,relaxations,wall_time_s,status";

fn cmd_bench(a: &BenchArgs) -> Result<Outcome> {
    let config = load_config(a.risk_config.as_deref())?;
    if a.size == 0 || !(0.0..1.0).contains(&a.density) {
        return Err(Error::Config("bench needs --size >= 1 and --density in [0, 1)".into()));
    }
    let depths = a
        .depths
        .iter()
        .map(|&n| LookbackDepth::new(n))
        .collect::<Result<Vec<_>>>()?;
    let options = plan_options()?;
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for &c in &a.connectivity {
        let connectivity = Connectivity::from_count(c)?;
        for m in 0..a.maps {
            let map = GridMap::random(a.size, a.size, a.density, a.seed.wrapping_add(m))?;
            let graph = Graph::build(&map, connectivity);
            let Some(&start) = graph.vertices().first() else {
                continue;
            };
            let model = RiskModel::new(&map, &config)?;
            for &depth in &depths {
                let n = depth.get();
                let row = match plan_lookback_n(&graph, start, depth, &model, &options) {
                    Ok(p) => format!(
                        "{c},{m},{n},{},{},{},{},{},{:.6},ok",
                        graph.vertex_count(),
                        p.stats.lifted_bound,
                        p.stats.lifted_states,
                        p.stats.expansions,
                        p.stats.relaxations,
                        p.stats.wall_time
                    ),
                    Err(Error::Budget { required, .. }) => {
                        format!("{c},{m},{n},{},{required},,,,,skipped", graph.vertex_count())
                    }
                    Err(e) => return Err(e),
                };
                println!("{row}");
                csv.push_str(&row);
                csv.push('\n');
            }
        }
    }
    prepare_out(&a.output)?;
    write(&a.output, "bench.csv", &csv)?;
    Ok(Outcome::Done)
}

fn cmd_table(a: &TableArgs) -> Result<Outcome> {
    let table = match (&a.file, a.demo) {
        (Some(f), _) => RiskTable::load(f)?,
        (None, Some(DemoTable::Red)) => RiskTable::demo_red(),
        (None, Some(DemoTable::Green)) => RiskTable::demo_green(),
        (None, None) => return Err(Error::Config("table needs a file or --demo".into())),
    };
    print!("{}", table.render());
    println!("path risk from State column: {:.4}", table.listed_path_risk().get());
    println!("path risk from element rows: {:.4}", table.path_risk().get());
    Ok(Outcome::Done)
}
