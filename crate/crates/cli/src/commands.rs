//! One function per subcommand. Each returns the JSON summary plus any CSV
//! tables; `execute` adds the common header and writes them.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use nonmarkov::divisibility::{choi_of, divisibility_report, interval_map, rhp_measure, F_EXCESS_TOL};
use nonmarkov::dynamics::{build_map_family, evolve_state, total_system_family, DynamicalMapFamily, ModelSpec, TimeGrid};
use nonmarkov::linalg::random::random_pure_density;
use nonmarkov::linalg::{DensityOperator, TOL_PSD};
use nonmarkov::measures::{
    ancilla_helstrom_series, backflow, blp_measure, bloch_vector, helstrom_series, StatePair, INCREASE_TOL,
};
use nonmarkov::multitime::{
    check_classical_markov, check_divisible, default_qubit_sweep, sweep_markov_defect, COMPOSITION_TOL,
    NONNEGATIVE_TOL, STOCHASTIC_TOL,
};
use nonmarkov::trajectories::{run_nmqj, Direction, JumpEvent, PROBABILITY_CAP};

use crate::output::{self, intervals, matrix, num, Csv};
use crate::scenario::{PairSpec, Scenario};
use crate::{CliError, Command, ARTIFACT_VERSION};

/// What a command produced, before the common header is attached.
pub struct Artifacts {
    pub result: Value,
    pub tolerances: Value,
    pub notes: Vec<String>,
    pub csv: Vec<(String, String)>,
}

impl Artifacts {
    fn new(result: Value, tolerances: Value) -> Self {
        Self {
            result,
            tolerances,
            notes: Vec::new(),
            csv: Vec::new(),
        }
    }

    fn with_csv(mut self, name: &str, body: String) -> Self {
        self.csv.push((name.to_string(), body));
        self
    }
}

pub fn execute(command: Command, scenario: &Scenario, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let art = match command {
        Command::Evolve => evolve(scenario)?,
        Command::Blp => blp(scenario)?,
        Command::Rhp => rhp(scenario)?,
        Command::Divisibility => divisibility(scenario)?,
        Command::Helstrom => helstrom(scenario)?,
        Command::AncillaDistance => ancilla_distance(scenario)?,
        Command::Nmqj => nmqj(scenario)?,
        Command::ClassicalCheck => classical_check(scenario)?,
        Command::CausalBreak => causal_break(scenario)?,
    };
    let name = command.name().replace('-', "_");
    let grid = &scenario.grid;
    let mut doc = json!({
        "command": command.name(),
        "scenario": scenario.name,
        "scenario_hash": output::scenario_hash(&scenario.canonical, ARTIFACT_VERSION),
        "version": ARTIFACT_VERSION,
        "seed": scenario.seed,
        "grid": {"t_max": num(grid.t_max()), "n_steps": grid.n_steps(), "dt": num(grid.dt())},
        "tolerances": art.tolerances,
        "notes": art.notes,
        "result": art.result,
    });
    if matches!(command, Command::ClassicalCheck | Command::CausalBreak) {
        // These do not run on the scenario grid.
        doc.as_object_mut().expect("object").remove("grid");
    }
    let mut paths = vec![output::write_json(out, &format!("{name}.json"), doc)?];
    for (file, body) in &art.csv {
        paths.push(output::write_atomic(out, file, body)?);
    }
    Ok(paths)
}

fn model(s: &Scenario) -> Result<&ModelSpec<f64>, CliError> {
    s.model.as_ref().ok_or_else(|| CliError::invalid("model: required for this command"))
}

fn seed(s: &Scenario, what: &str) -> Result<u64, CliError> {
    s.seed
        .ok_or_else(|| CliError::invalid(format!("seed: {what} is randomized and needs an explicit seed (scenario or --seed)")))
}

fn family(s: &Scenario) -> Result<DynamicalMapFamily<f64>, CliError> {
    Ok(build_map_family(model(s)?, &s.grid)?)
}

/// Column names `re_ij`, `im_ij` for a d×d matrix.
fn state_columns(prefix: &str, d: usize) -> Vec<String> {
    let mut cols = Vec::new();
    for i in 0..d {
        for j in 0..d {
            cols.push(format!("{prefix}re_{i}{j}"));
            cols.push(format!("{prefix}im_{i}{j}"));
        }
    }
    cols
}

fn state_cells(rho: &DensityOperator<f64>, cells: &mut Vec<f64>) {
    for z in rho.matrix().as_slice() {
        cells.push(z.re);
        cells.push(z.im);
    }
}

fn pair_json(p: &StatePair<f64>) -> Value {
    let mut v = json!({
        "rho1": matrix(p.rho1.matrix()),
        "rho2": matrix(p.rho2.matrix()),
        "p1": num(p.p1),
    });
    if p.dim() == 2 {
        if let (Ok(b1), Ok(b2)) = (bloch_vector(&p.rho1), bloch_vector(&p.rho2)) {
            v["bloch1"] = json!(b1.map(num));
            v["bloch2"] = json!(b2.map(num));
        }
    }
    v
}

fn series_csv(label: &str, series: &[(f64, f64)]) -> String {
    let mut csv = Csv::new(&["t", label]);
    for &(t, x) in series {
        csv.row(&[t, x]);
    }
    csv.into_string()
}

fn evolve(s: &Scenario) -> Result<Artifacts, CliError> {
    let m = model(s)?;
    let rho0 = match &s.initial_state {
        Some(st) => st.rho.clone(),
        None if m.dim() == 2 => DensityOperator::basis(2, 1)?,
        None => return Err(CliError::invalid("initial_state: required for non-qubit models")),
    };
    let traj = evolve_state(m, &rho0, &s.grid)?;
    let d = m.dim();
    let mut csv = Csv::new(&[vec!["t".to_string()], state_columns("", d)].concat());
    let mut max_trace_defect = 0.0f64;
    for (k, rho) in traj.states.iter().enumerate() {
        let mut cells = vec![s.grid.time(k)];
        state_cells(rho, &mut cells);
        csv.row(&cells);
        max_trace_defect = max_trace_defect.max((rho.matrix().trace().re - 1.0).abs());
    }
    let last = traj.states.last().expect("grid has at least one point");
    let result = json!({
        "initial_state": matrix(rho0.matrix()),
        "final_state": matrix(last.matrix()),
        "max_trace_defect": num(max_trace_defect),
    });
    Ok(Artifacts::new(result, json!({})).with_csv("evolve.csv", csv.into_string()))
}

fn blp(s: &Scenario) -> Result<Artifacts, CliError> {
    let mut strategy = s.blp.clone();
    strategy.seed = seed(s, "the BLP pair search")?;
    let fam = family(s)?;
    let r = blp_measure(&fam, &strategy)?;
    let result = json!({
        "value": num(r.value),
        "label": r.label,
        "optimizer": pair_json(&r.optimizer),
        "increase_intervals": intervals(&r.increase_intervals),
        "search": {
            "fibonacci_directions": strategy.fibonacci_directions,
            "random_pairs": strategy.random_pairs,
            "refine_best": strategy.refine_best,
            "refine_iterations": strategy.refine_iterations,
            "initial_step": num(strategy.initial_step),
        },
    });
    let mut art = Artifacts::new(result, json!({"increase": INCREASE_TOL}))
        .with_csv("blp_series.csv", series_csv("D", &r.series));
    art.notes.push("value is the best pair found by the search, not a certified supremum".into());
    Ok(art)
}

fn rhp(s: &Scenario) -> Result<Artifacts, CliError> {
    let fam = family(s)?;
    let r = rhp_measure(&fam, s.eps)?;
    let result = json!({
        "value": num(r.value),
        "eps": num(r.eps),
        "truncated_at": num(r.truncated_at),
    });
    let mut art = Artifacts::new(result, json!({"f_excess": F_EXCESS_TOL}))
        .with_csv("rhp_g.csv", series_csv("g", &r.g_series));
    art.notes.push(format!("integral truncated at t = {}", output::fmt(r.truncated_at)));
    Ok(art)
}

fn divisibility(s: &Scenario) -> Result<Artifacts, CliError> {
    let seed = seed(s, "the P-divisibility witness")?;
    let fam = family(s)?;
    let r = divisibility_report(&fam, s.p_samples, seed)?;
    let mut csv = Csv::new(&["t_start", "t_end", "cp_min_eigenvalue", "p_min_eigenvalue", "cp", "p"]);
    for w in &r.intervals {
        csv.row(&[w.t_start, w.t_end, w.cp_min_eigenvalue, w.p_min_eigenvalue, w.cp as u8 as f64, w.p as u8 as f64]);
    }
    let result = json!({
        "cp_divisible": r.cp_divisible,
        "p_divisible": r.p_divisible,
        "cp_violations": intervals(&r.cp_violations),
        "p_violations": intervals(&r.p_violations),
        "samples": r.samples,
    });
    let mut art = Artifacts::new(result, json!({"psd": TOL_PSD})).with_csv("divisibility.csv", csv.into_string());
    art.notes.push(format!("P-divisibility sampled on {} Haar-random pure states", r.samples));
    Ok(art)
}

fn state_pair(p: &PairSpec) -> Result<StatePair<f64>, CliError> {
    Ok(StatePair::new(p.rho1.clone(), p.rho2.clone(), p.p1, 1.0 - p.p1)?)
}

fn helstrom(s: &Scenario) -> Result<Artifacts, CliError> {
    let fam = family(s)?;
    let pair = match &s.helstrom {
        Some(p) => state_pair(p)?,
        None if fam.dim() == 2 => StatePair::equal(DensityOperator::basis(2, 1)?, DensityOperator::basis(2, 0)?)?,
        None => return Err(CliError::invalid("helstrom: a pair is required for non-qubit models")),
    };
    let series = helstrom_series(&fam, &pair)?;
    let bf = backflow(&series);
    let mut csv = Csv::new(&["t", "E", "P_guess"]);
    for &(t, e) in &series {
        csv.row(&[t, e, 0.5 * (1.0 + e)]);
    }
    let (_, e0) = series[0];
    let result = json!({
        "pair": pair_json(&pair),
        "initial_E": num(e0),
        "initial_guess_probability": num(0.5 * (1.0 + e0)),
        "total_increase": num(bf.total_increase),
        "increase_intervals": intervals(&bf.increase_intervals),
        "backflow": !bf.is_empty(),
    });
    Ok(Artifacts::new(result, json!({"increase": INCREASE_TOL})).with_csv("helstrom.csv", csv.into_string()))
}

fn ancilla_distance(s: &Scenario) -> Result<Artifacts, CliError> {
    let task = s
        .ancilla
        .as_ref()
        .ok_or_else(|| CliError::invalid("ancilla: section required for this command"))?;
    let fam = family(s)?;
    let ds = fam.dim();
    let mut pairs: Vec<(&str, StatePair<f64>)> = Vec::new();
    for p in &task.pairs {
        pairs.push(("explicit", state_pair(p)?));
    }
    if task.random_pairs > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed(s, "random joint pairs")?);
        for _ in 0..task.random_pairs {
            let r1 = random_pure_density(&[ds, task.dim_a], &mut rng);
            let r2 = random_pure_density(&[ds, task.dim_a], &mut rng);
            pairs.push(("random", StatePair::equal(r1, r2)?));
        }
    }
    let mut all = Vec::with_capacity(pairs.len());
    for (_, p) in &pairs {
        all.push(ancilla_helstrom_series(&fam, p, task.dim_a)?);
    }
    let header: Vec<String> = std::iter::once("t".to_string()).chain((0..pairs.len()).map(|i| format!("E_{i}"))).collect();
    let mut csv = Csv::new(&header);
    for k in 0..s.grid.len() {
        let mut cells = vec![s.grid.time(k)];
        cells.extend(all.iter().map(|series| series[k].1));
        csv.row(&cells);
    }
    let mut best: Option<(usize, f64)> = None;
    let per_pair: Vec<Value> = pairs
        .iter()
        .zip(&all)
        .enumerate()
        .map(|(i, ((source, p), series))| {
            let bf = backflow(series);
            if best.is_none_or(|(_, v)| bf.total_increase > v) {
                best = Some((i, bf.total_increase));
            }
            json!({
                "index": i,
                "source": source,
                "p1": num(p.p1),
                "total_increase": num(bf.total_increase),
                "increase_intervals": intervals(&bf.increase_intervals),
            })
        })
        .collect();
    let (best_index, best_value) = best.expect("at least one pair");
    let result = json!({
        "dim_system": ds,
        "dim_ancilla": task.dim_a,
        "pairs": per_pair,
        "best_pair": best_index,
        "max_total_increase": num(best_value),
        "backflow": best_value > 0.0,
    });
    Ok(Artifacts::new(result, json!({"increase": INCREASE_TOL})).with_csv("ancilla.csv", csv.into_string()))
}

fn nmqj(s: &Scenario) -> Result<Artifacts, CliError> {
    let m = model(s)?;
    let seed = seed(s, "the jump simulation")?;
    let (rho0, ket) = match &s.initial_state {
        Some(st) => match &st.ket {
            Some(k) => (st.rho.clone(), k.clone()),
            None => return Err(CliError::invalid("initial_state: nmqj needs a pure state")),
        },
        None if m.dim() == 2 => {
            let k = nonmarkov::linalg::operators::named_qubit_state("e").expect("known state");
            (DensityOperator::pure(&k)?, k)
        }
        None => return Err(CliError::invalid("initial_state: required for non-qubit models")),
    };
    let run = run_nmqj(m, &ket, &s.grid, s.ensemble_size, seed)?;
    let reference = evolve_state(m, &rho0, &s.grid)?;
    let estimates = run.estimates()?;
    let d = m.dim();
    let n = s.ensemble_size as f64;

    let header = [vec!["t".to_string()], state_columns("nmqj_", d), state_columns("ode_", d)].concat();
    let mut csv = Csv::new(&header);
    let mut max_abs = 0.0f64;
    let mut max_sigma = 0.0f64;
    for (k, (est, ode)) in estimates.iter().zip(&reference.states).enumerate() {
        let mut cells = vec![s.grid.time(k)];
        state_cells(est, &mut cells);
        state_cells(ode, &mut cells);
        csv.row(&cells);
        max_abs = max_abs.max(est.matrix().max_abs_diff(ode.matrix()));
        for i in 0..d {
            let p = ode.matrix()[(i, i)].re.clamp(0.0, 1.0);
            let sigma = (p * (1.0 - p)).max(1.0 / n).sqrt() / n.sqrt();
            max_sigma = max_sigma.max((est.matrix()[(i, i)].re - ode.matrix()[(i, i)].re).abs() / sigma);
        }
    }
    let forward = run.events.iter().filter(|e| e.direction == Direction::Forward).count();
    let reverse = run.events.len() - forward;
    // Reverse jumps are drawn only where the channel's rate is negative.
    let mut reverse_outside = 0usize;
    for e in run.events.iter().filter(|e| e.direction == Direction::Reverse) {
        if m.rates_at(e.t)?[e.channel] >= 0.0 {
            reverse_outside += 1;
        }
    }
    let result = json!({
        "ensemble_size": s.ensemble_size,
        "final_estimate": matrix(estimates.last().expect("snapshots").matrix()),
        "final_reference": matrix(reference.states.last().expect("states").matrix()),
        "max_abs_deviation": num(max_abs),
        "max_population_deviation_sigma": num(max_sigma),
        "forward_jumps": forward,
        "reverse_jumps": reverse,
        "reverse_jumps_at_nonnegative_rate": reverse_outside,
        "suppressed_reverse_jumps": run.suppressed.len(),
        "branches": run.final_state().states.len(),
    });
    let mut art = Artifacts::new(result, json!({"probability_cap": PROBABILITY_CAP}))
        .with_csv("nmqj_estimates.csv", csv.into_string())
        .with_csv("nmqj_events.csv", events_csv(&run.events));
    if !run.suppressed.is_empty() {
        art.notes.push(format!("{} reverse jumps suppressed for lack of parent members", run.suppressed.len()));
    }
    Ok(art)
}

/// Same columns as the library's event log, with rounded times.
fn events_csv(events: &[JumpEvent<f64>]) -> String {
    let mut out = String::from("t,channel,direction,source_idx,target_idx\n");
    for e in events {
        out.push_str(&format!("{},{},{},{},{}\n", output::fmt(e.t), e.channel, e.direction, e.source, e.target));
    }
    out
}

fn classical_check(s: &Scenario) -> Result<Artifacts, CliError> {
    let task = s
        .classical
        .as_ref()
        .ok_or_else(|| CliError::invalid("classical: section required for this command"))?;
    let mut result = json!({});
    let mut notes = Vec::new();
    if let (Some(t21), Some(t32)) = (&task.t21, &task.t32) {
        let t31 = match &task.t31 {
            Some(t) => t.clone(),
            None => {
                notes.push("t31 not given; using t32 * t21".to_string());
                t32.compose(t21)?
            }
        };
        let r = check_divisible(&t31, t21, t32)?;
        let check = |c: &nonmarkov::multitime::ConditionCheck<f64>| json!({"holds": c.holds, "max_violation": num(c.max_violation)});
        result["divisibility"] = json!({
            "divisible": r.divisible(),
            "failures": r.failures(),
            "stochastic": check(&r.stochastic),
            "nonnegative": check(&r.nonnegative),
            "composition": check(&r.composition),
        });
    }
    if let Some(joint) = &task.joint {
        let m = check_classical_markov(joint, task.tol)?;
        result["markov"] = json!({"markov": m.markov, "max_violation": num(m.max_violation)});
    }
    let tolerances = json!({
        "stochastic": STOCHASTIC_TOL,
        "nonnegative": NONNEGATIVE_TOL,
        "composition": COMPOSITION_TOL,
        "markov": task.tol,
    });
    let mut art = Artifacts::new(result, tolerances);
    art.notes = notes;
    Ok(art)
}

/// Step count for the reduced-dynamics grid shown next to the sweep.
const REDUCED_STEPS: usize = 200;

fn causal_break(s: &Scenario) -> Result<Artifacts, CliError> {
    let task = s
        .causal_break
        .as_ref()
        .ok_or_else(|| CliError::invalid("causal_break: section required for this command"))?;
    if task.total.dim_system() != 2 {
        return Err(CliError::invalid("causal_break.total: the control sweep is defined for a qubit system"));
    }
    let sweep = default_qubit_sweep(task.total.clone(), task.system_state.clone(), task.dt, task.k, task.env_reset)?;
    let report = sweep_markov_defect(&sweep)?;
    let points: Vec<Value> = report
        .points
        .iter()
        .map(|pt| {
            let controls: Vec<&str> = sweep.control_sequences[pt.control].iter().map(|c| c.label.as_str()).collect();
            let mut v = json!({
                "controls": controls,
                "effect": sweep.effects[pt.effect].label,
                "preparation": sweep.preparations[pt.preparation].0,
            });
            match &pt.outcome {
                Some(o) => {
                    v["probability"] = num(o.probability);
                    v["state"] = matrix(o.state.matrix());
                }
                None => v["probability"] = num(0.0),
            }
            v
        })
        .collect();
    let argmax = report.argmax.map(|(p, (c1, e1), (c2, e2))| {
        json!({
            "preparation": sweep.preparations[p].0,
            "variant_a": {"control": c1, "effect": sweep.effects[e1].label},
            "variant_b": {"control": c2, "effect": sweep.effects[e2].label},
        })
    });

    // CP-divisibility of the reduced dynamics on the same window, for comparison.
    let t_end = *sweep.times.last().expect("times");
    let grid = TimeGrid::new(t_end, REDUCED_STEPS)?;
    let fam = total_system_family(&task.total, &grid)?;
    let mut reduced = json!({"t_max": num(t_end), "n_steps": REDUCED_STEPS});
    let mut cp_min = f64::INFINITY;
    let mut failure = None;
    for k in 0..grid.n_steps() {
        match interval_map(&fam, k, k + 1).and_then(|m| choi_of(&m.matrix)?.min_eigenvalue()) {
            Ok(e) => cp_min = cp_min.min(e),
            Err(e) => {
                failure = Some(format!("interval starting at t = {}: {e}", output::fmt(grid.time(k))));
                break;
            }
        }
    }
    match failure {
        Some(f) => {
            reduced["cp_divisible"] = Value::Null;
            reduced["undetermined"] = json!(f);
        }
        None => {
            reduced["cp_divisible"] = json!(cp_min >= -TOL_PSD);
            reduced["min_choi_eigenvalue"] = num(cp_min);
        }
    }

    let result = json!({
        "k": task.k,
        "times": sweep.times.iter().map(|&t| num(t)).collect::<Vec<_>>(),
        "env_reset": task.env_reset,
        "points": points,
        "max_defect": num(report.max_defect),
        "argmax": argmax,
        "memory_witnessed": report.max_defect > 1e-9,
        "reduced_dynamics": reduced,
    });
    let mut art = Artifacts::new(result, json!({"defect": 1e-9, "psd": TOL_PSD}));
    art.notes = report.notes;
    Ok(art)
}
