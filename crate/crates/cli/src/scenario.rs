//! Scenario files: JSON in, fully validated [`Scenario`] out. Validation
//! collects every problem it finds, each prefixed with the offending field.

use std::path::Path;

use serde_json::{Map, Value};

use nonmarkov::dynamics::{Channel, ModelSpec, RateProfile, TimeGrid, TotalSystemModel};
use nonmarkov::linalg::operators::named_qubit_state;
use nonmarkov::linalg::{max_entangled_state, ComplexMatrix, DensityOperator};
use nonmarkov::measures::PairSearchStrategy;
use nonmarkov::multitime::{JointDistribution, TransitionMatrix};
use nonmarkov::C64;

use crate::CliError;

pub const DEFAULT_N_STEPS: usize = 2000;
pub const DEFAULT_P_SAMPLES: usize = 500;
pub const DEFAULT_ENSEMBLE: u64 = 100_000;
pub const DEFAULT_ANCILLA_RANDOM_PAIRS: usize = 50;

/// State given either on its own or together with a pure-state vector.
#[derive(Clone, Debug)]
pub struct StateSpec {
    pub rho: DensityOperator<f64>,
    pub ket: Option<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct PairSpec {
    pub rho1: DensityOperator<f64>,
    pub rho2: DensityOperator<f64>,
    pub p1: f64,
}

#[derive(Clone, Debug)]
pub struct AncillaTask {
    pub dim_a: usize,
    pub pairs: Vec<PairSpec>,
    pub random_pairs: usize,
}

#[derive(Clone, Debug)]
pub struct ClassicalTask {
    pub t21: Option<TransitionMatrix<f64>>,
    pub t32: Option<TransitionMatrix<f64>>,
    pub t31: Option<TransitionMatrix<f64>>,
    pub joint: Option<JointDistribution<f64>>,
    pub tol: f64,
}

#[derive(Clone, Debug)]
pub struct CausalTask {
    pub total: TotalSystemModel<f64>,
    pub system_state: DensityOperator<f64>,
    pub dt: f64,
    pub k: usize,
    pub env_reset: bool,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub model: Option<ModelSpec<f64>>,
    pub grid: TimeGrid<f64>,
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub initial_state: Option<StateSpec>,
    pub blp: PairSearchStrategy,
    pub p_samples: usize,
    pub helstrom: Option<PairSpec>,
    pub ancilla: Option<AncillaTask>,
    pub ensemble_size: u64,
    pub classical: Option<ClassicalTask>,
    pub causal_break: Option<CausalTask>,
    /// Canonical (key-sorted, compact) rendering of the input document.
    pub canonical: String,
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(vec![format!("{}: cannot read scenario: {e}", path.display())]))?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Validation(vec![format!("scenario is not valid JSON: {e}")]))?;
    let mut v = Validator::default();
    let scenario = v.scenario(&doc);
    match scenario {
        Some(s) if v.errors.is_empty() => Ok(s),
        _ => Err(CliError::Validation(v.errors)),
    }
}

#[derive(Clone, Copy)]
struct JointDims {
    ds: usize,
    da: usize,
}

#[derive(Default)]
struct Validator {
    errors: Vec<String>,
    /// Set while parsing system+ancilla states.
    joint_dims: Option<JointDims>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Validator {
    fn err(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Map<String, Value>> {
        let obj = v.as_object();
        if obj.is_none() {
            self.err(path, "expected an object");
        }
        obj
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.err(&join(path, k), "unknown field");
            }
        }
    }

    /// Number, or a string such as `"pi"`, `"2pi"`, `"0.5pi"`.
    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        let x = match v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => parse_pi_multiple(s),
            _ => None,
        };
        match x {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.err(path, "expected a finite number");
                None
            }
        }
    }

    fn opt_number(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<Option<f64>> {
        match obj.get(key) {
            None => Some(None),
            Some(v) => self.number(v, &join(path, key)).map(Some),
        }
    }

    fn count(&mut self, v: &Value, path: &str, min: u64) -> Option<u64> {
        match v.as_u64() {
            Some(n) if n >= min => Some(n),
            _ => {
                self.err(path, format!("expected an integer >= {min}"));
                None
            }
        }
    }

    fn opt_count(&mut self, obj: &Map<String, Value>, path: &str, key: &str, min: u64, default: u64) -> u64 {
        match obj.get(key) {
            None => default,
            Some(v) => self.count(v, &join(path, key), min).unwrap_or(default),
        }
    }

    fn complex(&mut self, v: &Value, path: &str) -> Option<C64> {
        match v {
            Value::Number(_) | Value::String(_) => self.number(v, path).map(|x| C64::new(x, 0.0)),
            Value::Array(a) if a.len() == 2 => {
                let re = self.number(&a[0], path);
                let im = self.number(&a[1], path);
                Some(C64::new(re?, im?))
            }
            _ => {
                self.err(path, "expected a number or [re, im]");
                None
            }
        }
    }

    fn vector(&mut self, v: &Value, path: &str) -> Option<Vec<C64>> {
        let Some(a) = v.as_array().filter(|a| !a.is_empty()) else {
            self.err(path, "expected a non-empty array");
            return None;
        };
        let out: Vec<Option<C64>> = a.iter().enumerate().map(|(i, x)| self.complex(x, &format!("{path}[{i}]"))).collect();
        out.into_iter().collect()
    }

    fn matrix(&mut self, v: &Value, path: &str) -> Option<ComplexMatrix<f64>> {
        let Some(rows) = v.as_array().filter(|a| !a.is_empty()) else {
            self.err(path, "expected a non-empty array of rows");
            return None;
        };
        let parsed: Vec<Option<Vec<C64>>> = rows.iter().enumerate().map(|(i, r)| self.vector(r, &format!("{path}[{i}]"))).collect();
        let parsed: Vec<Vec<C64>> = parsed.into_iter().collect::<Option<_>>()?;
        let cols = parsed[0].len();
        if parsed.iter().any(|r| r.len() != cols) {
            self.err(path, "rows have different lengths");
            return None;
        }
        Some(ComplexMatrix::from_fn(parsed.len(), cols, |i, j| parsed[i][j]))
    }

    fn square(&mut self, v: &Value, path: &str, dim: Option<usize>) -> Option<ComplexMatrix<f64>> {
        let m = self.matrix(v, path)?;
        if !m.is_square() {
            self.err(path, "matrix must be square");
            return None;
        }
        if let Some(d) = dim {
            if m.rows() != d {
                self.err(path, format!("expected a {d}x{d} matrix, got {}x{}", m.rows(), m.cols()));
                return None;
            }
        }
        Some(m)
    }

    /// Named qubit state, `{"ket": [...]}`, `{"basis": k}`, `{"matrix": [[...]]}`
    /// or `"maximally_mixed"`.
    fn state(&mut self, v: &Value, path: &str, dim: usize) -> Option<StateSpec> {
        let checked = |r: nonmarkov::Result<DensityOperator<f64>>, me: &mut Self| match r {
            Ok(rho) => Some(rho),
            Err(e) => {
                me.err(path, e);
                None
            }
        };
        match v {
            Value::String(s) if s == "maximally_mixed" => {
                let rho = checked(DensityOperator::maximally_mixed(dim), self)?;
                Some(StateSpec { rho, ket: None })
            }
            Value::String(s) => {
                if dim != 2 {
                    self.err(path, format!("named states are qubit states but the dimension is {dim}"));
                    return None;
                }
                let Some(ket) = named_qubit_state::<f64>(s) else {
                    self.err(path, format!("unknown state name '{s}' (use g, e, 0, 1, +, -, +i, -i)"));
                    return None;
                };
                let rho = checked(DensityOperator::pure(&ket), self)?;
                Some(StateSpec { rho, ket: Some(ket) })
            }
            Value::Object(obj) if obj.len() == 1 => {
                let (key, inner) = obj.iter().next().unwrap();
                let p = join(path, key);
                match key.as_str() {
                    "ket" => {
                        let ket = self.vector(inner, &p)?;
                        if ket.len() != dim {
                            self.err(&p, format!("expected {dim} amplitudes, got {}", ket.len()));
                            return None;
                        }
                        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                        if !(norm > 0.0) {
                            self.err(&p, "zero vector");
                            return None;
                        }
                        let ket: Vec<C64> = ket.into_iter().map(|z| z / norm).collect();
                        let rho = checked(DensityOperator::pure(&ket), self)?;
                        Some(StateSpec { rho, ket: Some(ket) })
                    }
                    "basis" => {
                        let k = self.count(inner, &p, 0)? as usize;
                        let rho = checked(DensityOperator::basis(dim, k), self)?;
                        let mut ket = vec![C64::new(0.0, 0.0); dim];
                        ket[k] = C64::new(1.0, 0.0);
                        Some(StateSpec { rho, ket: Some(ket) })
                    }
                    "matrix" => {
                        let m = self.square(inner, &p, Some(dim))?;
                        let rho = checked(DensityOperator::from_matrix(m), self)?;
                        Some(StateSpec { rho, ket: None })
                    }
                    _ => {
                        self.err(&p, "unknown state form (use ket, basis or matrix)");
                        None
                    }
                }
            }
            _ => {
                self.err(path, "expected a state name or an object with one of ket, basis, matrix");
                None
            }
        }
    }

    fn rate(&mut self, v: &Value, path: &str) -> Option<RateProfile<f64>> {
        let obj = self.object(v, path)?;
        let kind = obj.get("kind").and_then(Value::as_str);
        let num = |me: &mut Self, key: &str, default: Option<f64>| -> Option<f64> {
            match (obj.get(key), default) {
                (Some(x), _) => me.number(x, &join(path, key)),
                (None, Some(d)) => Some(d),
                (None, None) => {
                    me.err(&join(path, key), "required");
                    None
                }
            }
        };
        match kind {
            Some("constant") => {
                self.unknown_keys(obj, path, &["kind", "value"]);
                Some(RateProfile::constant(num(self, "value", None)?))
            }
            Some("sinusoid") => {
                self.unknown_keys(obj, path, &["kind", "amplitude", "omega", "phase"]);
                let a = num(self, "amplitude", Some(1.0));
                let w = num(self, "omega", Some(1.0));
                let p = num(self, "phase", Some(0.0));
                Some(RateProfile::sinusoid(a?, w?, p?))
            }
            Some("tanh_negative") => {
                self.unknown_keys(obj, path, &["kind", "scale"]);
                Some(RateProfile::TanhNegative {
                    scale: num(self, "scale", Some(1.0))?,
                })
            }
            Some("table") => {
                self.unknown_keys(obj, path, &["kind", "points"]);
                let p = join(path, "points");
                let Some(points) = obj.get("points").and_then(Value::as_array) else {
                    self.err(&p, "expected an array of [t, gamma] pairs");
                    return None;
                };
                let mut pts = Vec::new();
                for (i, pt) in points.iter().enumerate() {
                    let pp = format!("{p}[{i}]");
                    match pt.as_array().map(|a| a.as_slice()) {
                        Some([t, g]) => {
                            let (t, g) = (self.number(t, &pp), self.number(g, &pp));
                            pts.push((t?, g?));
                        }
                        _ => {
                            self.err(&pp, "expected [t, gamma]");
                            return None;
                        }
                    }
                }
                match RateProfile::table(pts) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        self.err(&p, e);
                        None
                    }
                }
            }
            Some(other) => {
                self.err(&join(path, "kind"), format!("unknown rate kind '{other}' (constant, sinusoid, tanh_negative, table)"));
                None
            }
            None => {
                self.err(&join(path, "kind"), "required");
                None
            }
        }
    }

    fn model(&mut self, v: &Value, path: &str) -> Option<ModelSpec<f64>> {
        let obj = self.object(v, path)?;
        let model = if let Some(b) = obj.get("builtin") {
            self.unknown_keys(obj, path, &["builtin", "rate", "dim", "hamiltonian"]);
            let name = b.as_str().unwrap_or("");
            let rate = |me: &mut Self| match obj.get("rate") {
                Some(r) => me.rate(r, &join(path, "rate")),
                None => {
                    me.err(&join(path, "rate"), "required for this model");
                    None
                }
            };
            match name {
                "amplitude_damping" => rate(self).map(ModelSpec::amplitude_damping),
                "dephasing" => rate(self).map(ModelSpec::dephasing),
                "pauli_eternal" => Some(ModelSpec::pauli_eternal()),
                "zero" => {
                    let d = self.opt_count(obj, path, "dim", 1, 2) as usize;
                    Some(ModelSpec::trivial(d))
                }
                other => {
                    self.err(
                        &join(path, "builtin"),
                        format!("unknown model '{other}' (amplitude_damping, dephasing, pauli_eternal, zero)"),
                    );
                    None
                }
            }
            .and_then(|m| match obj.get("hamiltonian") {
                None => Some(m),
                Some(h) => {
                    let hp = join(path, "hamiltonian");
                    let h = self.square(h, &hp, Some(m.dim()))?;
                    match m.with_hamiltonian(h) {
                        Ok(m) => Some(m),
                        Err(e) => {
                            self.err(&hp, e);
                            None
                        }
                    }
                }
            })
        } else {
            self.unknown_keys(obj, path, &["hamiltonian", "channels"]);
            let hp = join(path, "hamiltonian");
            let Some(h) = obj.get("hamiltonian") else {
                self.err(&hp, "required (or give a builtin model)");
                return None;
            };
            let h = self.square(h, &hp, None);
            let dim = h.as_ref().map(|h| h.rows());
            let mut channels = Vec::new();
            if let Some(chs) = obj.get("channels") {
                let cp = join(path, "channels");
                match chs.as_array() {
                    Some(a) => {
                        for (i, ch) in a.iter().enumerate() {
                            let p = format!("{cp}[{i}]");
                            let Some(o) = self.object(ch, &p) else { continue };
                            self.unknown_keys(o, &p, &["operator", "rate"]);
                            let op = match o.get("operator") {
                                Some(m) => self.square(m, &join(&p, "operator"), dim),
                                None => {
                                    self.err(&join(&p, "operator"), "required");
                                    None
                                }
                            };
                            let rate = match o.get("rate") {
                                Some(r) => self.rate(r, &join(&p, "rate")),
                                None => {
                                    self.err(&join(&p, "rate"), "required");
                                    None
                                }
                            };
                            if let (Some(operator), Some(rate)) = (op, rate) {
                                channels.push(Channel { operator, rate });
                            }
                        }
                    }
                    None => self.err(&cp, "expected an array"),
                }
            }
            match ModelSpec::new(h?, channels) {
                Ok(m) => Some(m),
                Err(e) => {
                    self.err(path, e);
                    None
                }
            }
        };
        model
    }

    fn grid(&mut self, v: Option<&Value>) -> Option<TimeGrid<f64>> {
        let default = TimeGrid::<f64>::default_closed_form();
        let Some(v) = v else { return Some(default) };
        let obj = self.object(v, "grid")?;
        self.unknown_keys(obj, "grid", &["t_max", "n_steps"]);
        let t_max = match obj.get("t_max") {
            None => Some(default.t_max()),
            Some(x) => match self.number(x, "grid.t_max") {
                Some(t) if t > 0.0 => Some(t),
                Some(_) => {
                    self.err("grid.t_max", "must be positive");
                    None
                }
                None => None,
            },
        };
        let n_steps = match obj.get("n_steps") {
            None => Some(DEFAULT_N_STEPS),
            Some(x) => self.count(x, "grid.n_steps", 2).map(|n| n as usize),
        };
        match TimeGrid::new(t_max?, n_steps?) {
            Ok(g) => Some(g),
            Err(e) => {
                self.err("grid", e);
                None
            }
        }
    }

    fn pair(&mut self, v: &Value, path: &str, dim: usize) -> Option<PairSpec> {
        let obj = self.object(v, path)?;
        self.unknown_keys(obj, path, &["rho1", "rho2", "p1"]);
        let side = |me: &mut Self, key: &str| match obj.get(key) {
            Some(s) => me.joint_or_state(s, &join(path, key), dim),
            None => {
                me.err(&join(path, key), "required");
                None
            }
        };
        let rho1 = side(self, "rho1");
        let rho2 = side(self, "rho2");
        let p1 = match self.opt_number(obj, path, "p1")? {
            Some(p) if (0.0..=1.0).contains(&p) => p,
            Some(_) => {
                self.err(&join(path, "p1"), "must lie in [0, 1]");
                return None;
            }
            None => 0.5,
        };
        Some(PairSpec {
            rho1: rho1?,
            rho2: rho2?,
            p1,
        })
    }

    /// Plain state of dimension `dim`, or for joint spaces `{"product": [s, a]}`
    /// and `"max_entangled"`.
    fn joint_or_state(&mut self, v: &Value, path: &str, dim: usize) -> Option<DensityOperator<f64>> {
        if let Some(JointDims { ds, da }) = self.joint_dims {
            if v.as_str() == Some("max_entangled") {
                if ds != da {
                    self.err(path, "max_entangled needs an ancilla of the system dimension");
                    return None;
                }
                return max_entangled_state(ds).map_err(|e| self.err(path, e)).ok();
            }
            if let Some(parts) = v.get("product").and_then(Value::as_array) {
                if parts.len() != 2 {
                    self.err(path, "product needs [system state, ancilla state]");
                    return None;
                }
                let s = self.state(&parts[0], &format!("{path}.product[0]"), ds);
                let a = self.state(&parts[1], &format!("{path}.product[1]"), da);
                return Some(s?.rho.tensor(&a?.rho));
            }
            let rho = self.state(v, path, dim)?.rho;
            return rho.with_dims(vec![ds, da]).map_err(|e| self.err(path, e)).ok();
        }
        self.state(v, path, dim).map(|s| s.rho)
    }

    fn ancilla(&mut self, v: &Value, ds: usize) -> Option<AncillaTask> {
        let path = "ancilla";
        let obj = self.object(v, path)?;
        self.unknown_keys(obj, path, &["dim_a", "pairs", "random_pairs"]);
        let dim_a = self.opt_count(obj, path, "dim_a", 1, ds as u64) as usize;
        if dim_a != ds && dim_a != ds + 1 {
            self.err(&join(path, "dim_a"), format!("must be {ds} or {} for this system", ds + 1));
            return None;
        }
        let mut pairs = Vec::new();
        if let Some(ps) = obj.get("pairs") {
            let pp = join(path, "pairs");
            match ps.as_array() {
                Some(a) => {
                    self.joint_dims = Some(JointDims { ds, da: dim_a });
                    for (i, p) in a.iter().enumerate() {
                        if let Some(pair) = self.pair(p, &format!("{pp}[{i}]"), ds * dim_a) {
                            pairs.push(pair);
                        }
                    }
                    self.joint_dims = None;
                }
                None => self.err(&pp, "expected an array"),
            }
        }
        let default_random = if obj.contains_key("pairs") { 0 } else { DEFAULT_ANCILLA_RANDOM_PAIRS as u64 };
        let random_pairs = self.opt_count(obj, path, "random_pairs", 0, default_random) as usize;
        if pairs.is_empty() && random_pairs == 0 {
            self.err(path, "no pairs to evaluate");
        }
        Some(AncillaTask { dim_a, pairs, random_pairs })
    }

    fn total(&mut self, v: &Value, path: &str) -> Option<TotalSystemModel<f64>> {
        let obj = self.object(v, path)?;
        let out = if let Some(b) = obj.get("builtin") {
            self.unknown_keys(obj, path, &["builtin", "coupling"]);
            if b.as_str() != Some("exchange") {
                self.err(&join(path, "builtin"), "unknown total-system model (exchange)");
                return None;
            }
            let g = self.opt_number(obj, path, "coupling")?.unwrap_or(1.0);
            TotalSystemModel::exchange(g)
        } else {
            self.unknown_keys(obj, path, &["h_system", "h_env", "h_int", "env_state"]);
            let req = |me: &mut Self, key: &str, dim: Option<usize>| match obj.get(key) {
                Some(m) => me.square(m, &join(path, key), dim),
                None => {
                    me.err(&join(path, key), "required");
                    None
                }
            };
            let hs = req(self, "h_system", None);
            let he = req(self, "h_env", None);
            let (hs, he) = (hs?, he?);
            let h_int = req(self, "h_int", Some(hs.rows() * he.rows()))?;
            let env = match obj.get("env_state") {
                Some(s) => self.state(s, &join(path, "env_state"), he.rows())?.rho,
                None => {
                    self.err(&join(path, "env_state"), "required");
                    return None;
                }
            };
            TotalSystemModel::from_parts(&hs, &he, &h_int, env)
        };
        out.map_err(|e| self.err(path, e)).ok()
    }

    fn transition(&mut self, v: &Value, path: &str, t0: f64, t1: f64) -> Option<TransitionMatrix<f64>> {
        let rows = v.as_array().map(|rows| {
            rows.iter()
                .enumerate()
                .map(|(i, r)| {
                    r.as_array()
                        .map(|xs| xs.iter().enumerate().map(|(j, x)| self.number(x, &format!("{path}[{i}][{j}]"))).collect::<Option<Vec<_>>>())
                        .unwrap_or(None)
                })
                .collect::<Option<Vec<_>>>()
        });
        match rows.flatten() {
            Some(rows) => TransitionMatrix::new(rows, t0, t1).map_err(|e| self.err(path, e)).ok(),
            None => {
                self.err(path, "expected a square array of numbers");
                None
            }
        }
    }

    fn classical(&mut self, v: &Value, path: &str) -> Option<ClassicalTask> {
        let obj = self.object(v, path)?;
        self.unknown_keys(obj, path, &["t21", "t32", "t31", "joint", "tol"]);
        let t21 = obj.get("t21").map(|m| self.transition(m, &join(path, "t21"), 1.0, 2.0));
        let t32 = obj.get("t32").map(|m| self.transition(m, &join(path, "t32"), 2.0, 3.0));
        let t31 = obj.get("t31").map(|m| self.transition(m, &join(path, "t31"), 1.0, 3.0));
        if t21.is_some() != t32.is_some() {
            self.err(path, "t21 and t32 must be given together");
        }
        let joint = obj.get("joint").map(|j| {
            let p = join(path, "joint");
            let o = self.object(j, &p)?;
            self.unknown_keys(o, &p, &["sizes", "probs", "times"]);
            let sizes: Option<Vec<usize>> = o
                .get("sizes")
                .and_then(Value::as_array)
                .map(|a| a.iter().map(|x| x.as_u64().map(|n| n as usize)).collect())
                .unwrap_or(None);
            let probs: Option<Vec<f64>> = o.get("probs").and_then(Value::as_array).map(|a| a.iter().map(Value::as_f64).collect()).unwrap_or(None);
            let (Some(sizes), Some(probs)) = (sizes, probs) else {
                self.err(&p, "needs integer 'sizes' and numeric 'probs'");
                return None;
            };
            let times: Vec<f64> = match o.get("times").and_then(Value::as_array) {
                Some(a) => a.iter().filter_map(Value::as_f64).collect(),
                None => (0..sizes.len()).map(|i| i as f64).collect(),
            };
            JointDistribution::new(sizes, probs, times).map_err(|e| self.err(&p, e)).ok()
        });
        if t21.is_none() && joint.is_none() {
            self.err(path, "give transition matrices (t21, t32) and/or a joint distribution");
        }
        let tol = self.opt_number(obj, path, "tol")?.unwrap_or(1e-12);
        // An outer Some wrapping None means that part failed to parse.
        let failed = matches!(t21, Some(None)) || matches!(t32, Some(None)) || matches!(t31, Some(None)) || matches!(joint, Some(None));
        if failed {
            return None;
        }
        Some(ClassicalTask {
            t21: t21.flatten(),
            t32: t32.flatten(),
            t31: t31.flatten(),
            joint: joint.flatten(),
            tol,
        })
    }

    fn causal(&mut self, v: &Value, path: &str) -> Option<CausalTask> {
        let obj = self.object(v, path)?;
        self.unknown_keys(obj, path, &["total", "system_state", "dt", "k", "env_reset"]);
        let total = match obj.get("total") {
            Some(t) => self.total(t, &join(path, "total")),
            None => TotalSystemModel::exchange(1.0).ok(),
        };
        let dt = match self.opt_number(obj, path, "dt")? {
            Some(dt) if dt > 0.0 => Some(dt),
            Some(_) => {
                self.err(&join(path, "dt"), "must be positive");
                None
            }
            None => Some(0.7),
        };
        let k = self.opt_count(obj, path, "k", 1, 2) as usize;
        let env_reset = match obj.get("env_reset") {
            None => false,
            Some(Value::Bool(b)) => *b,
            Some(_) => {
                self.err(&join(path, "env_reset"), "expected true or false");
                false
            }
        };
        let total = total?;
        let system_state = match obj.get("system_state") {
            Some(s) => self.state(s, &join(path, "system_state"), total.dim_system())?.rho,
            None if total.dim_system() == 2 => DensityOperator::basis(2, 1).ok()?,
            None => {
                self.err(&join(path, "system_state"), "required for non-qubit systems");
                return None;
            }
        };
        Some(CausalTask {
            total,
            system_state,
            dt: dt?,
            k,
            env_reset,
        })
    }

    fn scenario(&mut self, doc: &Value) -> Option<Scenario> {
        let obj = self.object(doc, "scenario")?;
        self.unknown_keys(
            obj,
            "",
            &[
                "name",
                "model",
                "grid",
                "seed",
                "eps",
                "initial_state",
                "blp",
                "divisibility",
                "helstrom",
                "ancilla",
                "nmqj",
                "classical",
                "causal_break",
            ],
        );
        let name = match obj.get("name") {
            None => "unnamed".to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                self.err("name", "expected a string");
                String::new()
            }
        };
        let model = obj.get("model").map(|m| self.model(m, "model"));
        let grid = self.grid(obj.get("grid"));
        if let (Some(Some(m)), Some(g)) = (&model, &grid) {
            if let Some(end) = m.domain_end() {
                if g.t_max() > end {
                    self.err("grid.t_max", format!("exceeds the rate table domain (ends at {end})"));
                }
            }
        }
        let seed = obj.get("seed").and_then(|s| self.count(s, "seed", 0));
        let eps = match self.opt_number(obj, "", "eps") {
            Some(Some(e)) if e <= 0.0 => {
                self.err("eps", "must be positive");
                None
            }
            Some(e) => e,
            None => None,
        };
        let dim = match &model {
            Some(Some(m)) => Some(m.dim()),
            _ => None,
        };
        let need_dim = |me: &mut Self, key: &str| {
            if dim.is_none() && model.is_none() {
                me.err(key, "needs a model section");
            }
            dim
        };

        let initial_state = match obj.get("initial_state") {
            Some(s) => need_dim(self, "initial_state").and_then(|d| self.state(s, "initial_state", d)),
            None => None,
        };

        let mut blp = PairSearchStrategy::default();
        if let Some(b) = obj.get("blp") {
            if let Some(o) = self.object(b, "blp") {
                self.unknown_keys(o, "blp", &["fibonacci_directions", "random_pairs", "refine_best", "refine_iterations", "initial_step"]);
                blp.fibonacci_directions = self.opt_count(o, "blp", "fibonacci_directions", 0, 200) as usize;
                blp.random_pairs = self.opt_count(o, "blp", "random_pairs", 0, 200) as usize;
                blp.refine_best = self.opt_count(o, "blp", "refine_best", 0, 5) as usize;
                blp.refine_iterations = self.opt_count(o, "blp", "refine_iterations", 0, 20) as usize;
                if let Some(Some(s)) = self.opt_number(o, "blp", "initial_step") {
                    blp.initial_step = s;
                }
            }
        }

        let mut p_samples = DEFAULT_P_SAMPLES;
        if let Some(d) = obj.get("divisibility").and_then(|d| self.object(d, "divisibility")) {
            self.unknown_keys(d, "divisibility", &["samples"]);
            p_samples = self.opt_count(d, "divisibility", "samples", 100, DEFAULT_P_SAMPLES as u64) as usize;
        }

        let helstrom = match obj.get("helstrom") {
            Some(h) => need_dim(self, "helstrom").and_then(|d| self.pair(h, "helstrom", d)),
            None => None,
        };

        let ancilla = match obj.get("ancilla") {
            Some(a) => need_dim(self, "ancilla").and_then(|ds| self.ancilla(a, ds)),
            None => None,
        };

        let mut ensemble_size = DEFAULT_ENSEMBLE;
        let mut nmqj_state = None;
        if let Some(n) = obj.get("nmqj").and_then(|n| self.object(n, "nmqj")) {
            self.unknown_keys(n, "nmqj", &["ensemble_size", "initial_state"]);
            ensemble_size = self.opt_count(n, "nmqj", "ensemble_size", 1000, DEFAULT_ENSEMBLE);
            if let Some(s) = n.get("initial_state") {
                nmqj_state = need_dim(self, "nmqj.initial_state").and_then(|d| self.state(s, "nmqj.initial_state", d));
                if let Some(st) = &nmqj_state {
                    if st.ket.is_none() {
                        self.err("nmqj.initial_state", "must be a pure state (name, ket or basis)");
                    }
                }
            }
        }

        let classical = obj.get("classical").and_then(|c| self.classical(c, "classical"));
        let causal_break = obj.get("causal_break").and_then(|c| self.causal(c, "causal_break"));

        let canonical = serde_json::to_string(doc).expect("JSON value serializes");
        Some(Scenario {
            name,
            model: model.flatten(),
            grid: grid?,
            seed,
            eps,
            initial_state: nmqj_state.or(initial_state),
            blp,
            p_samples,
            helstrom,
            ancilla,
            ensemble_size,
            classical,
            causal_break,
            canonical,
        })
    }
}

/// `"pi"`, `"2pi"`, `"0.5pi"`, `"pi/2"`, `"3pi/2"`, or a plain decimal string.
fn parse_pi_multiple(s: &str) -> Option<f64> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim().parse::<f64>().ok()?)),
        None => (s, None),
    };
    let value = match num.strip_suffix("pi") {
        Some("") => std::f64::consts::PI,
        Some(k) => k.trim().trim_end_matches('*').parse::<f64>().ok()? * std::f64::consts::PI,
        None => num.parse::<f64>().ok()?,
    };
    Some(match den {
        Some(d) if d != 0.0 => value / d,
        Some(_) => return None,
        None => value,
    })
}
