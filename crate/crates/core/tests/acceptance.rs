//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
//! if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nonmarkov::divisibility::{divisibility_report, rhp_measure};
use nonmarkov::dynamics::{
    apply_map, build_map_family, evolve_state, semigroup_defect, ModelSpec, RateProfile, TimeGrid, TotalSystemModel,
};
use nonmarkov::linalg::operators::{named_qubit_state, sigma_x, sigma_z};
use nonmarkov::linalg::random::{random_density, random_hermitian, random_pure_density, random_pure_state, random_unitary};
use nonmarkov::linalg::{trace_norm, ComplexMatrix, DensityOperator};
use nonmarkov::measures::{
    ancilla_distance_series, backflow, binary_guessing_probability, blp_measure, distance_series, helstrom_series,
    PairSearchStrategy, StatePair, EG_PAIR_LABEL,
};
use nonmarkov::multitime::{
    check_classical_markov, check_divisible, conditioned_state, default_qubit_sweep, sweep_markov_defect,
    CausalBreakExperiment, ControlOperation, Effect, JointDistribution, TransitionMatrix,
};
use nonmarkov::trajectories::{run_nmqj, Direction};
use nonmarkov::{Result, C64};

type Outcome = Result<(bool, String)>;

fn sin_rate() -> RateProfile<f64> {
    RateProfile::sinusoid(1.0, 1.0, 0.0)
}

fn default_grid() -> TimeGrid<f64> {
    TimeGrid::new(TAU, 2000).unwrap()
}

fn constant_models() -> Vec<(&'static str, ModelSpec<f64>)> {
    let damp = ModelSpec::amplitude_damping(RateProfile::constant(1.0));
    let deph = ModelSpec::dephasing(RateProfile::constant(0.5));
    let both = ModelSpec::new(
        ComplexMatrix::from_real_diag(&[-0.5, 0.5]),
        [damp.channels(), deph.channels()].concat(),
    )
    .unwrap();
    vec![("damping", damp), ("dephasing", deph), ("damping+dephasing", both)]
}

fn sin_models() -> Vec<(&'static str, ModelSpec<f64>)> {
    vec![
        ("damping", ModelSpec::amplitude_damping(sin_rate())),
        ("dephasing", ModelSpec::dephasing(sin_rate())),
    ]
}

fn named(n: &str) -> DensityOperator<f64> {
    DensityOperator::pure(&named_qubit_state(n).unwrap()).unwrap()
}

fn c1() -> Outcome {
    let grid = default_grid();
    let fam = build_map_family(&ModelSpec::amplitude_damping(sin_rate()), &grid)?;
    let pair = StatePair::equal(named("e"), named("g"))?;
    let d: Vec<f64> = distance_series(&fam, &pair)?.into_iter().map(|(_, x)| x).collect();
    let h = grid.dt();
    let n = d.len();
    let mut worst = 0.0f64;
    for k in 0..n {
        let deriv = if k == 0 {
            (-3.0 * d[0] + 4.0 * d[1] - d[2]) / (2.0 * h)
        } else if k == n - 1 {
            (3.0 * d[k] - 4.0 * d[k - 1] + d[k - 2]) / (2.0 * h)
        } else {
            (d[k + 1] - d[k - 1]) / (2.0 * h)
        };
        let t = grid.time(k);
        let exact = -t.sin() * (-(1.0 - t.cos())).exp();
        worst = worst.max((deriv - exact).abs());
    }
    Ok((worst <= 1e-3, format!("max |dD/dt + gamma e^-Gamma| = {worst:.3e} (tol 1e-3)")))
}

fn c2() -> Outcome {
    let grid = default_grid();
    let strategy = PairSearchStrategy::with_seed(2024);
    let mut ok = true;
    let mut parts = Vec::new();
    for ((name, model), exact) in sin_models().into_iter().zip([1.0 - (-2.0f64).exp(), 1.0 - (-4.0f64).exp()]) {
        let r = blp_measure(&build_map_family(&model, &grid)?, &strategy)?;
        ok &= (r.value - exact).abs() <= 5e-3;
        parts.push(format!("sin {name} {:.5} (exact {exact:.5}, label '{}')", r.value, r.label));
    }
    for (name, model) in constant_models() {
        let r = blp_measure(&build_map_family(&model, &grid)?, &strategy)?;
        ok &= r.value.abs() <= 1e-6;
        parts.push(format!("constant {name} {:.1e}", r.value));
    }
    Ok((ok, parts.join("; ")))
}

fn c3() -> Outcome {
    let grid = default_grid();
    let r = rhp_measure(&build_map_family(&ModelSpec::dephasing(sin_rate()), &grid)?, None)?;
    let mut ok = (r.value - 4.0).abs() <= 0.05;
    let mut parts = vec![format!("sin dephasing {:.4} (exact 4)", r.value)];
    for (name, model) in constant_models() {
        let v = rhp_measure(&build_map_family(&model, &grid)?, None)?.value;
        ok &= v.abs() <= 1e-5;
        parts.push(format!("constant {name} {v:.1e}"));
    }
    Ok((ok, parts.join("; ")))
}

fn c4() -> Outcome {
    let grid = default_grid();
    let tol = 2.0 * grid.dt();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, model) in sin_models() {
        let report = divisibility_report(&build_map_family(&model, &grid)?, 100, 4)?;
        let v = &report.cp_violations;
        ok &= v.len() == 1 && (v[0].0 - PI).abs() <= tol && (v[0].1 - TAU).abs() <= tol;
        parts.push(format!("{name}: {v:?}"));
    }
    Ok((ok, format!("{} (endpoint tol {tol:.2e})", parts.join("; "))))
}

fn c5() -> Outcome {
    let grid = TimeGrid::new(5.0, 2000)?;
    let fam = build_map_family(&ModelSpec::pauli_eternal(), &grid)?;
    let blp: f64 = blp_measure(&fam, &PairSearchStrategy::with_seed(5))?.value;
    let report = divisibility_report(&fam, 500, 5)?;
    let cp_broken = report.intervals.iter().filter(|w| w.t_start >= 0.05).all(|w| !w.cp);
    let ok = blp.abs() <= 1e-6 && report.p_divisible && cp_broken;
    Ok((
        ok,
        format!(
            "BLP {blp:.1e}, P-divisible ({} samples) {}, CP broken on every interval after 0.05: {cp_broken}",
            report.samples, report.p_divisible
        ),
    ))
}

/// Eigenvalues of a 2×2 Hermitian matrix in closed form.
fn trace_norm_2x2(m: &ComplexMatrix<f64>) -> f64 {
    let (a, d, b) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean + radius).abs() + (mean - radius).abs()
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = default_grid();
    let fam = build_map_family(&ModelSpec::amplitude_damping(sin_rate()), &grid)?;

    let mut e_vs_d = 0.0f64;
    for _ in 0..20 {
        let pair = StatePair::equal(random_density(2, &mut rng), random_density(2, &mut rng))?;
        let e = helstrom_series(&fam, &pair)?;
        let d = distance_series(&fam, &pair)?;
        for (x, y) in e.iter().zip(&d) {
            e_vs_d = e_vs_d.max((x.1 - y.1).abs());
        }
    }

    let mut bound_ok = true;
    let mut formula = 0.0f64;
    for _ in 0..1000 {
        let p1: f64 = rng.random();
        let pair = StatePair::new(random_density(2, &mut rng), random_density(2, &mut rng), p1, 1.0 - p1)?;
        let k = rng.random_range(0..grid.len());
        let t = grid.time(k);
        let pg = binary_guessing_probability(&pair, &fam, t)?;
        let out1 = apply_map(fam.map(k), pair.rho1.matrix());
        let out2 = apply_map(fam.map(k), pair.rho2.matrix());
        let delta = &out1.scale_real(p1) - &out2.scale_real(1.0 - p1);
        formula = formula.max((pg - 0.5 * (1.0 + trace_norm_2x2(&delta))).abs());
        // Any two-outcome projective guess does no better.
        let psi = random_pure_state::<f64, _>(2, &mut rng);
        let proj = ComplexMatrix::outer(&psi, &psi);
        let guess = p1 * proj.matmul(&out1).trace().re + (1.0 - p1) * (1.0 - proj.matmul(&out2).trace().re);
        bound_ok &= pg >= p1.max(1.0 - p1) - 1e-12 && pg <= 1.0 + 1e-12 && guess <= pg + 1e-12;
    }

    let mut worst_step = f64::NEG_INFINITY;
    for (_, model) in constant_models() {
        let fam = build_map_family(&model, &grid)?;
        for _ in 0..20 {
            let p1: f64 = rng.random();
            let pair = StatePair::new(random_density(2, &mut rng), random_density(2, &mut rng), p1, 1.0 - p1)?;
            let e = helstrom_series(&fam, &pair)?;
            for w in e.windows(2) {
                worst_step = worst_step.max(w[1].1 - w[0].1);
            }
        }
    }
    let ok = e_vs_d <= 1e-12 && formula <= 1e-12 && bound_ok && worst_step <= 1e-7;
    Ok((
        ok,
        format!(
            "max |E-D| {e_vs_d:.1e}; P_g formula error {formula:.1e}, bounds hold on 1000 pairs: {bound_ok}; largest E step on constant rates {worst_step:.1e}"
        ),
    ))
}

fn max_step_increase(series: &[(f64, f64)]) -> f64 {
    series.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::NEG_INFINITY, f64::max)
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ok = true;
    let mut parts = Vec::new();
    let cp_grid = TimeGrid::new(TAU, 500)?;
    for (name, model) in constant_models() {
        let fam = build_map_family(&model, &cp_grid)?;
        ok &= divisibility_report(&fam, 100, 7)?.cp_divisible;
        for da in [2, 3] {
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..50 {
                let pair = StatePair::equal(random_pure_density(&[2, da], &mut rng), random_pure_density(&[2, da], &mut rng))?;
                worst = worst.max(max_step_increase(&ancilla_distance_series(&fam, &pair, da)?));
            }
            ok &= worst <= 1e-7;
            parts.push(format!("{name} dA={da} max step {worst:.1e}"));
        }
    }
    let grid = default_grid();
    let window = (PI - 2.0 * grid.dt(), TAU + 1e-12);
    for (name, model) in sin_models() {
        let fam = build_map_family(&model, &grid)?;
        for da in [2, 3] {
            let mut found = 0;
            for _ in 0..50 {
                let pair = StatePair::equal(random_pure_density(&[2, da], &mut rng), random_pure_density(&[2, da], &mut rng))?;
                let bf = backflow(&ancilla_distance_series(&fam, &pair, da)?);
                let inside = bf.increase_intervals.iter().all(|&(a, b)| a >= window.0 && b <= window.1);
                if !bf.is_empty() && inside {
                    found += 1;
                }
            }
            ok &= found > 0;
            parts.push(format!("sin {name} dA={da}: {found}/50 pairs increase inside (pi, 2pi)"));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn c8() -> Outcome {
    let start = Instant::now();
    let n = 100_000u64;
    let grid = default_grid();
    let plus: Vec<C64> = named_qubit_state("+").unwrap();
    let excited: Vec<C64> = named_qubit_state("e").unwrap();
    let scenarios = [
        ("constant damping from e", ModelSpec::amplitude_damping(RateProfile::constant(1.0)), excited),
        ("sin damping from +", ModelSpec::amplitude_damping(sin_rate()), plus),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, model, psi0) in &scenarios {
        let ode = evolve_state(model, &DensityOperator::pure(psi0)?, &grid)?;
        let (mut worst, mut reverse, mut misplaced) = (0.0f64, 0usize, 0usize);
        for seed in 0..5 {
            let run = run_nmqj(model, psi0, &grid, n, seed)?;
            for (snap, exact) in run.snapshots.iter().zip(&ode.states) {
                let est = snap.estimate()?;
                let (e, x) = (est.matrix(), exact.matrix());
                for i in 0..2 {
                    let p = x[(i, i)].re.clamp(0.0, 1.0);
                    let sigma = (p * (1.0 - p) / n as f64).sqrt().max(1e-12);
                    worst = worst.max((e[(i, i)].re - x[(i, i)].re).abs() / sigma);
                }
                // Per-member coherences are bounded by 1/2 in modulus.
                let sigma_c = 0.5 / (n as f64).sqrt();
                worst = worst.max((e[(0, 1)] - x[(0, 1)]).norm() / sigma_c);
            }
            for ev in run.events.iter().filter(|ev| ev.direction == Direction::Reverse) {
                reverse += 1;
                if model.rates_at(ev.t)?[ev.channel] >= 0.0 {
                    misplaced += 1;
                }
            }
        }
        ok &= worst <= 5.0 && misplaced == 0;
        parts.push(format!("{name}: worst {worst:.2} sigma, {reverse} reverse jumps, {misplaced} at gamma >= 0"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 300.0;
    Ok((ok, format!("{}; N = {n}, 5 seeds, {secs:.0} s", parts.join("; "))))
}

/// Exchange unitary by hand: |gg⟩, |ee⟩ fixed, cos/−i sin mixing of |ge⟩, |eg⟩.
fn exchange_unitary(g: f64, t: f64) -> ComplexMatrix<f64> {
    let (c, s) = ((g * t).cos(), (g * t).sin());
    let mut u = ComplexMatrix::identity(4);
    u[(1, 1)] = C64::new(c, 0.0);
    u[(2, 2)] = C64::new(c, 0.0);
    u[(1, 2)] = C64::new(0.0, -s);
    u[(2, 1)] = C64::new(0.0, -s);
    u
}

/// 4×4 brute force of the k = 2 protocol with bit flips or identities.
fn exchange_oracle(flip: bool, effect: &ComplexMatrix<f64>, prep: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
    let u = exchange_unitary(1.0, 0.7);
    let x = sigma_x::<f64>().kron(&ComplexMatrix::identity(2));
    let mut sigma = named("e").matrix().kron(&ComplexMatrix::from_real_diag(&[1.0, 0.0]));
    for _ in 0..2 {
        if flip {
            sigma = x.matmul(&sigma).matmul(&x);
        }
        sigma = u.matmul(&sigma).matmul(&u.adjoint());
    }
    let branch = effect.kron(&ComplexMatrix::identity(2)).matmul(&sigma);
    let p = branch.trace().re;
    let env = ComplexMatrix::from_fn(2, 2, |a, b| (branch[(a, b)] + branch[(2 + a, 2 + b)]) / p);
    let sigma = u.matmul(&prep.kron(&env)).matmul(&u.adjoint());
    ComplexMatrix::from_fn(2, 2, |a, b| sigma[(2 * a, 2 * b)] + sigma[(2 * a + 1, 2 * b + 1)])
}

fn c9() -> Outcome {
    let exchange = TotalSystemModel::exchange(1.0)?;
    let uncoupled = TotalSystemModel::from_parts(
        &sigma_z::<f64>().scale_real(0.5),
        &sigma_x::<f64>().scale_real(0.3),
        &ComplexMatrix::zeros(4, 4),
        named("g"),
    )?;
    let sweep = |total: TotalSystemModel<f64>, reset: bool| -> Result<f64> {
        Ok(sweep_markov_defect(&default_qubit_sweep(total, named("e"), 0.7, 2, reset)?)?.max_defect)
    };
    let free = sweep(uncoupled, false)?;
    let reset = sweep(exchange.clone(), true)?;
    let coupled = sweep(exchange.clone(), false)?;

    // Cross-check one variant pair against the hand-written oracle.
    let flip = ControlOperation::unitary("bit flip", &sigma_x())?;
    let mut oracle_err = 0.0f64;
    for (flip_on, eff) in [(false, "g"), (true, "+")] {
        let exp = CausalBreakExperiment {
            total: exchange.clone(),
            system_state: named("e"),
            times: vec![0.0, 0.7, 1.4, 2.1],
            controls: vec![if flip_on { flip.clone() } else { ControlOperation::identity(2) }; 2],
            effect: Effect::projector(eff, &named(eff))?,
            preparation: named("+"),
            env_reset: false,
        };
        let got = conditioned_state(&exp)?;
        let want = exchange_oracle(flip_on, named(eff).matrix(), named("+").matrix());
        oracle_err = oracle_err.max(got.state.matrix().max_abs_diff(&want));
    }
    let ok = free <= 1e-9 && reset <= 1e-9 && coupled > 0.01 && oracle_err <= 1e-10;
    Ok((
        ok,
        format!("H_SE = 0: {free:.1e}; environment reset: {reset:.1e}; exchange: {coupled:.4}; oracle mismatch {oracle_err:.1e}"),
    ))
}

fn tm(rows: &[&[f64]], t0: f64, t1: f64) -> TransitionMatrix<f64> {
    TransitionMatrix::new(rows.iter().map(|r| r.to_vec()).collect(), t0, t1).unwrap()
}

/// Max over histories of |P(x2 | x1, x0) − P(x2 | x1)|, enumerated directly.
fn markov_oracle(p: &[f64; 8]) -> f64 {
    let at = |x0: usize, x1: usize, x2: usize| p[4 * x0 + 2 * x1 + x2];
    let mut worst = 0.0f64;
    for x1 in 0..2 {
        let p1: f64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(x0, x2)| at(x0, x1, x2)).sum();
        for x0 in 0..2 {
            let p01 = at(x0, x1, 0) + at(x0, x1, 1);
            if p01 <= 0.0 {
                continue;
            }
            for x2 in 0..2 {
                let full = at(x0, x1, x2) / p01;
                let reduced = (at(0, x1, x2) + at(1, x1, x2)) / p1;
                worst = worst.max((full - reduced).abs());
            }
        }
    }
    worst
}

fn c10() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;

    let id = TransitionMatrix::identity(2, 0.0, 1.0);
    let r = check_divisible(&id, &id, &id)?;
    ok &= r.divisible();
    parts.push(format!("identities divisible: {}", r.divisible()));

    let t21 = tm(&[&[0.7, 0.2], &[0.3, 0.8]], 1.0, 2.0);
    let t32 = tm(&[&[0.9, 0.4], &[0.1, 0.6]], 2.0, 3.0);
    // T32·T21 by hand.
    let t31 = tm(&[&[0.75, 0.5], &[0.25, 0.5]], 1.0, 3.0);
    let r = check_divisible(&t31, &t21, &t32)?;
    ok &= r.divisible() && r.composition.max_violation <= 1e-15;

    let negative = tm(&[&[1.1, 0.0], &[-0.1, 1.0]], 1.0, 2.0);
    let r = check_divisible(&negative.clone(), &negative, &TransitionMatrix::identity(2, 2.0, 3.0))?;
    let neg_ok = r.failures() == ["nonnegative"] && (r.nonnegative.max_violation - 0.1).abs() <= 1e-15;
    ok &= neg_ok;
    parts.push(format!("-0.1 entry: fails {:?}, violation {:.3}", r.failures(), r.nonnegative.max_violation));

    let perturbed = tm(&[&[0.751, 0.5], &[0.249, 0.5]], 1.0, 3.0);
    let r = check_divisible(&perturbed, &t21, &t32)?;
    let pert_ok = r.failures() == ["composition"] && (r.composition.max_violation - 1e-3).abs() <= 1e-12;
    ok &= pert_ok;
    parts.push(format!("1e-3 perturbation: fails {:?}, violation {:.3e}", r.failures(), r.composition.max_violation));

    let uniform = JointDistribution::new(vec![2, 2, 2], vec![0.125; 8], vec![0.0, 1.0, 2.0])?;
    let m = check_classical_markov(&uniform, 1e-12)?;
    ok &= m.markov && m.max_violation == 0.0;

    let chain = JointDistribution::from_chain(vec![0.3, 0.7], &[t21.clone(), t32.clone()])?;
    let m = check_classical_markov(&chain, 1e-12)?;
    ok &= m.markov && m.max_violation <= 1e-12;
    parts.push(format!("uniform and chain Markov, chain violation {:.1e}", m.max_violation));

    // x2 = x0, x1 independent.
    let copy = [0.25, 0.0, 0.25, 0.0, 0.0, 0.25, 0.0, 0.25];
    let joint = JointDistribution::new(vec![2, 2, 2], copy.to_vec(), vec![0.0, 1.0, 2.0])?;
    let m = check_classical_markov(&joint, 1e-12)?;
    let expect = markov_oracle(&copy);
    ok &= !m.markov && m.max_violation >= 0.25 && (m.max_violation - expect).abs() <= 1e-15;
    parts.push(format!("copy of the past: violation {} (enumerated {expect})", m.max_violation));
    Ok((ok, parts.join("; ")))
}

fn c11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut triangle, mut invariance) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..200 {
        let d = rng.random_range(2..=5);
        let a = random_hermitian::<f64, _>(d, &mut rng);
        let b = random_hermitian::<f64, _>(d, &mut rng);
        triangle = triangle.max(trace_norm(&(&a + &b))? - trace_norm(&a)? - trace_norm(&b)?);
        let u = random_unitary::<f64, _>(d, &mut rng);
        invariance = invariance.max((trace_norm(&u.matmul(&a).matmul(&u.adjoint()))? - trace_norm(&a)?).abs());
    }

    let grid = TimeGrid::new(TAU, 400)?;
    let mut ordering = true;
    for (_, model) in sin_models().into_iter().chain(constant_models()).chain([("pauli", ModelSpec::pauli_eternal())]) {
        let r = divisibility_report(&build_map_family(&model, &grid)?, 100, 11)?;
        ordering &= r.intervals.iter().all(|w| !w.cp || w.p);
    }

    let mut semigroup = 0.0f64;
    for (_, model) in constant_models() {
        let fam = build_map_family(&model, &grid)?;
        for _ in 0..20 {
            let k1 = rng.random_range(1..200);
            let k2 = rng.random_range(1..200);
            semigroup = semigroup.max(semigroup_defect(&fam, grid.time(k1), grid.time(k2))?);
        }
    }

    let rk4_error = |n: usize| -> Result<f64> {
        let g = TimeGrid::new(2.0, n)?;
        let traj = evolve_state(&ModelSpec::amplitude_damping(RateProfile::constant(1.0)), &named("e"), &g)?;
        Ok(traj
            .states
            .iter()
            .enumerate()
            .map(|(k, r)| (r.matrix()[(1, 1)].re - (-g.time(k)).exp()).abs())
            .fold(0.0, f64::max))
    };
    let ratio = rk4_error(20)? / rk4_error(40)?;

    let model = ModelSpec::amplitude_damping(sin_rate());
    let plus: Vec<C64> = vec![C64::new(FRAC_1_SQRT_2, 0.0); 2];
    let replay = run_nmqj(&model, &plus, &grid, 5000, 3)?.events == run_nmqj(&model, &plus, &grid, 5000, 3)?.events;
    let fam = build_map_family(&model, &grid)?;
    let replay = replay && divisibility_report(&fam, 100, 3)? == divisibility_report(&fam, 100, 3)?;
    let strategy = PairSearchStrategy::with_seed(3);
    let (x, y) = (blp_measure(&fam, &strategy)?, blp_measure(&fam, &strategy)?);
    let replay = replay && x.value == y.value && x.label == y.label && x.label == EG_PAIR_LABEL;

    let ok = triangle <= 1e-9 && invariance <= 1e-9 && ordering && semigroup <= 1e-7 && (12.0..=20.0).contains(&ratio) && replay;
    Ok((
        ok,
        format!(
            "triangle slack {triangle:.1e}, unitary invariance {invariance:.1e}, CP=>P {ordering}, semigroup defect {semigroup:.1e}, RK4 ratio {ratio:.2}, replay {replay}"
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("damping trace-distance law", c1),
        ("BLP values", c2),
        ("RHP closed form", c3),
        ("CP-violation window", c4),
        ("eternal channel ordering", c5),
        ("Helstrom identities", c6),
        ("ancilla criteria", c7),
        ("NMQJ statistical equivalence", c8),
        ("causal break", c9),
        ("classical checks", c10),
        ("property suites", c11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1} s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
