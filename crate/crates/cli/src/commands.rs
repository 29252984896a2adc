//! The five experiments behind the subcommands.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use qmlab_core::bloch::{decompose, density_from_ball, recompose};
use qmlab_core::compound::{
    chsh, chsh_empirical, marginals, max_coplanar_chsh, product_joint_probability,
    run_epr_trials_on, singlet_joint_probability, tv_distance, ChshSetting, RodRule, CHSH_SIGNS,
};
use qmlab_core::dynamics::{
    divergence_trajectory_with, uniform_grid, EvolutionKind, EvolutionSpec, MixtureRule,
};
use qmlab_core::hilbert::{
    joint_quantum_probability, partial_trace, pauli_x, pauli_y, pauli_z, projector, schmidt_rank,
    singlet, tensor, trace_probability, ComplexMatrix, Subsystem,
};
use qmlab_core::machine::{analytic_probability, run_trials_sharded};
use qmlab_core::rng::default_shards;
use qmlab_core::{BallState, Decomposition, DensityMatrix, Direction, Error, JointDistribution};

use crate::args::{
    AxisArg, ChshArgs, DynamicsArgs, GlobalArgs, KindArg, MachineArgs, ParadoxArgs, SingletArgs,
};
use crate::format::{Cell, Table};
use crate::{Check, CliError, Report};

/// Exact-algebra tolerance used by the gating checks.
const EXACT: f64 = 1e-12;
/// Linear-evolution control tolerance.
const LINEAR_CONTROL: f64 = 1e-9;

fn angle(g: &GlobalArgs, v: f64) -> f64 {
    if g.deg {
        v.to_radians()
    } else {
        v
    }
}

fn direction(g: &GlobalArgs, theta: f64, phi: f64) -> Result<Direction, CliError> {
    Direction::from_angles(angle(g, theta), angle(g, phi)).map_err(|e| CliError::usage(e.to_string()))
}

fn usage(e: Error) -> CliError {
    CliError::usage(e.to_string())
}

fn seed_and_shards(g: &GlobalArgs) -> (u64, usize) {
    (g.seed.unwrap_or(0), g.shards.unwrap_or_else(default_shards))
}

fn joint_json(j: &JointDistribution) -> Value {
    serde_json::to_value(j).expect("plain struct")
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    let n = m.dim();
    Value::Array(
        (0..n)
            .map(|i| Value::Array((0..n).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

fn max_diff(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Angle of a direction lying in the x-z plane, measured from `+z`.
fn xz_angle(d: &Direction) -> f64 {
    let [x, _, z] = d.vector();
    x.atan2(z)
}

pub fn cmd_machine(g: &GlobalArgs, a: &MachineArgs) -> Result<Report, CliError> {
    let u = direction(g, a.u_theta, a.u_phi)?;
    let decomposition = if a.center {
        decompose(&BallState::CENTER, Some(u)).map_err(usage)?
    } else if a.x.is_some() || a.y.is_some() || a.z.is_some() {
        let w = BallState::new(a.x.unwrap_or(0.0), a.y.unwrap_or(0.0), a.z.unwrap_or(0.0))
            .map_err(usage)?;
        decompose(&w, Some(u)).map_err(usage)?
    } else {
        let v = direction(g, a.theta.unwrap_or(0.0), a.phi)?;
        Decomposition::with_weight(v, a.a).map_err(usage)?
    };
    let w = recompose(&decomposition);

    let (p_up, p_down) = analytic_probability(&w, &u);
    let density = density_from_ball(&decomposition);
    let oracle_up = trace_probability(density.matrix(), &projector(&u)).map_err(|e| CliError::Other(e.into()))?;
    let oracle_down =
        trace_probability(density.matrix(), &projector(&u.antipode())).map_err(|e| CliError::Other(e.into()))?;
    let gap = (p_up - oracle_up).abs().max((p_down - oracle_down).abs());

    let empirical = (g.samples > 0).then(|| {
        let (seed, shards) = seed_and_shards(g);
        run_trials_sharded(&w, &u, g.samples, seed, shards)
    });

    let mut body = Map::new();
    body.insert("state".into(), json!(w.coords()));
    body.insert("decomposition".into(), serde_json::to_value(decomposition).expect("plain struct"));
    body.insert("direction".into(), json!(u.vector()));
    body.insert("analytic".into(), json!({"p_up": p_up, "p_down": p_down}));
    body.insert("oracle".into(), json!({"p_up": oracle_up, "p_down": oracle_down}));
    body.insert("oracle_gap".into(), json!(gap));
    body.insert("empirical".into(), serde_json::to_value(&empirical).expect("plain struct"));

    let mut table = Table::new(vec![
        "p_up", "p_down", "oracle_p_up", "oracle_p_down", "oracle_gap", "n_total", "freq_up", "freq_down",
    ]);
    table.push(vec![
        p_up.into(),
        p_down.into(),
        oracle_up.into(),
        oracle_down.into(),
        gap.into(),
        empirical.as_ref().map_or(Cell::Empty, |e| e.n_total.into()),
        empirical.as_ref().map(|e| e.freq_up).into(),
        empirical.as_ref().map(|e| e.freq_down).into(),
    ]);

    Ok(Report {
        body,
        table,
        checks: vec![Check::at_most("machine.oracle_gap", gap, EXACT)],
    })
}

pub fn cmd_singlet(g: &GlobalArgs, a: &SingletArgs) -> Result<Report, CliError> {
    let (u1, u2) = match a.alpha {
        Some(alpha) => (Direction::PLUS_Z, Direction::in_xz_plane(angle(g, alpha))),
        None => (
            direction(g, a.u1_theta.unwrap_or(0.0), a.u1_phi)?,
            direction(g, a.u2_theta.unwrap_or(0.0), a.u2_phi)?,
        ),
    };
    let alpha = u1.angle_to(&u2);
    let analytic = singlet_joint_probability(&u1, &u2);
    let oracle = joint_quantum_probability(&singlet(), &u1, &u2).map_err(|e| CliError::Other(e.into()))?;
    let gap = max_diff(analytic.as_array(), oracle.as_array());
    let (m1, m2) = marginals(&analytic);
    let marginal_gap = (m1 - 0.5).abs().max((m2 - 0.5).abs());

    let empirical = (g.samples > 0).then(|| {
        let (seed, shards) = seed_and_shards(g);
        run_epr_trials_on(&u1, &u2, g.samples, seed, 0, shards, RodRule::Antipodal)
    });

    let mut body = Map::new();
    body.insert("u1".into(), json!(u1.vector()));
    body.insert("u2".into(), json!(u2.vector()));
    body.insert("alpha".into(), json!(alpha));
    body.insert("analytic".into(), joint_json(&analytic));
    body.insert("oracle".into(), joint_json(&oracle));
    body.insert("oracle_gap".into(), json!(gap));
    body.insert("marginals".into(), json!([m1, m2]));
    body.insert("correlation".into(), json!(analytic.correlation()));
    body.insert("empirical".into(), serde_json::to_value(&empirical).expect("plain struct"));

    let mut checks = vec![
        Check::at_most("singlet.oracle_gap", gap, EXACT),
        Check::at_most("singlet.marginal_gap", marginal_gap, EXACT),
    ];

    let table = match a.sweep {
        Some(steps) => {
            let steps = steps.max(1);
            let mut table = Table::new(vec!["alpha", "p_uu", "p_ud", "p_du", "p_dd", "E"]);
            let mut rows = Vec::with_capacity(steps + 1);
            let mut sweep_gap: f64 = 0.0;
            for k in 0..=steps {
                let alpha = PI * k as f64 / steps as f64;
                let (x, y) = (Direction::PLUS_Z, Direction::in_xz_plane(alpha));
                let j = singlet_joint_probability(&x, &y);
                let o = joint_quantum_probability(&singlet(), &x, &y).map_err(|e| CliError::Other(e.into()))?;
                sweep_gap = sweep_gap.max(max_diff(j.as_array(), o.as_array()));
                let mut row: Vec<Cell> = vec![alpha.into()];
                row.extend(j.as_array().map(Cell::from));
                row.push(j.correlation().into());
                table.push(row);
                rows.push(json!({"alpha": alpha, "joint": joint_json(&j), "E": j.correlation()}));
            }
            body.insert("sweep".into(), Value::Array(rows));
            body.insert("sweep_oracle_gap".into(), json!(sweep_gap));
            checks.push(Check::at_most("singlet.sweep_oracle_gap", sweep_gap, EXACT));
            table
        }
        None => {
            let mut table = Table::new(vec![
                "alpha", "p_uu", "p_ud", "p_du", "p_dd", "E", "f_uu", "f_ud", "f_du", "f_dd", "E_empirical",
            ]);
            let mut row: Vec<Cell> = vec![alpha.into()];
            row.extend(analytic.as_array().map(Cell::from));
            row.push(analytic.correlation().into());
            match &empirical {
                Some(e) => {
                    row.extend(e.frequencies.as_array().map(Cell::from));
                    row.push(e.correlation().into());
                }
                None => row.extend(std::iter::repeat_n(Cell::Empty, 5)),
            }
            table.push(row);
            table
        }
    };

    Ok(Report { body, table, checks })
}

pub fn cmd_chsh(g: &GlobalArgs, a: &ChshArgs) -> Result<Report, CliError> {
    let setting = if a.optimal {
        if a.grid < 4 {
            return Err(CliError::usage("--grid must be at least 4"));
        }
        max_coplanar_chsh(a.grid).1
    } else if let Some(ang) = &a.angles {
        ChshSetting::coplanar(angle(g, ang[0]), angle(g, ang[1]), angle(g, ang[2]), angle(g, ang[3]))
    } else {
        return Err(CliError::usage("chsh needs --optimal or --angles A A' B B'"));
    };

    let s = chsh(&setting);
    let labels = ["a,b", "a,b'", "a',b", "a',b'"];
    let empirical = (g.samples > 0).then(|| {
        let (seed, shards) = seed_and_shards(g);
        chsh_empirical(&setting, g.samples, seed, shards)
    });

    let mut table = Table::new(vec!["pair", "theta_1", "theta_2", "sign", "E", "E_oracle", "E_empirical"]);
    let mut pairs = Vec::new();
    let mut oracle_gap: f64 = 0.0;
    for (k, ((x, y), sign)) in setting.pairs().iter().zip(CHSH_SIGNS).enumerate() {
        let e = singlet_joint_probability(x, y).correlation();
        let e_oracle = joint_quantum_probability(&singlet(), x, y)
            .map_err(|e| CliError::Other(e.into()))?
            .correlation();
        oracle_gap = oracle_gap.max((e - e_oracle).abs());
        let e_emp = empirical.as_ref().map(|c| c.pairs[k].correlation());
        table.push(vec![
            labels[k].into(),
            xz_angle(x).into(),
            xz_angle(y).into(),
            sign.into(),
            e.into(),
            e_oracle.into(),
            e_emp.into(),
        ]);
        pairs.push(json!({
            "pair": labels[k],
            "theta_1": xz_angle(x),
            "theta_2": xz_angle(y),
            "sign": sign,
            "E": e,
            "E_oracle": e_oracle,
            "E_empirical": e_emp,
        }));
    }
    table.push(vec![
        "S".into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        s.into(),
        Cell::Empty,
        empirical.as_ref().map(|c| c.s).into(),
    ]);

    let mut body = Map::new();
    body.insert(
        "setting".into(),
        json!({
            "a": xz_angle(&setting.a),
            "a_prime": xz_angle(&setting.a_prime),
            "b": xz_angle(&setting.b),
            "b_prime": xz_angle(&setting.b_prime),
        }),
    );
    body.insert("pairs".into(), Value::Array(pairs));
    body.insert("S".into(), json!(s));
    body.insert("abs_S".into(), json!(s.abs()));
    body.insert("classical_bound".into(), json!(2.0));
    body.insert("quantum_bound".into(), json!(2.0 * SQRT_2));
    body.insert("violation_factor".into(), json!(s.abs() / 2.0));
    body.insert("violates_classical_bound".into(), json!(s.abs() > 2.0));
    body.insert(
        "empirical".into(),
        match &empirical {
            Some(c) => json!({
                "S": c.s,
                "abs_S": c.s.abs(),
                "violates_classical_bound": c.s.abs() > 2.0,
                "pairs": serde_json::to_value(&c.pairs).expect("plain struct"),
            }),
            None => Value::Null,
        },
    );

    Ok(Report {
        body,
        table,
        checks: vec![
            Check::at_most("chsh.oracle_gap", oracle_gap, EXACT),
            Check::at_most("chsh.above_quantum_bound", (s.abs() - 2.0 * SQRT_2).max(0.0), EXACT),
        ],
    })
}

pub fn cmd_paradox(_g: &GlobalArgs, a: &ParadoxArgs) -> Result<Report, CliError> {
    let steps = a.steps.max(1);
    let other = |e: Error| CliError::Other(e.into());
    let s = singlet();
    let r = s.projector();
    let reduced1 = partial_trace(&r, Subsystem::First).map_err(other)?;
    let reduced2 = partial_trace(&r, Subsystem::Second).map_err(other)?;
    let half = DensityMatrix::maximally_mixed();
    let reduced_gap = reduced1.max_abs_diff(half.matrix()).max(reduced2.max_abs_diff(half.matrix()));
    let product = tensor(half.matrix(), half.matrix()).map_err(other)?;
    let product_reduced = partial_trace(&product, Subsystem::First).map_err(other)?;

    let mut table = Table::new(vec![
        "alpha", "singlet_uu", "singlet_ud", "singlet_du", "singlet_dd", "product_uu", "product_ud",
        "product_du", "product_dd", "tv", "marginal_gap",
    ]);
    let mut sweep = Vec::with_capacity(steps + 1);
    let mut tv_values = Vec::with_capacity(steps + 1);
    let mut marginal_gap: f64 = 0.0;
    for k in 0..=steps {
        let alpha = PI * k as f64 / steps as f64;
        let (u1, u2) = (Direction::PLUS_Z, Direction::in_xz_plane(alpha));
        let js = singlet_joint_probability(&u1, &u2);
        let jp = product_joint_probability(&BallState::CENTER, &BallState::CENTER, &u1, &u2);
        let tv = tv_distance(&js, &jp);
        let (s1, s2) = marginals(&js);
        let (p1, p2) = marginals(&jp);
        let gap = (s1 - p1).abs().max((s2 - p2).abs());
        marginal_gap = marginal_gap.max(gap);
        tv_values.push((alpha, tv));
        let mut row: Vec<Cell> = vec![alpha.into()];
        row.extend(js.as_array().map(Cell::from));
        row.extend(jp.as_array().map(Cell::from));
        row.push(tv.into());
        row.push(gap.into());
        table.push(row);
        sweep.push(json!({
            "alpha": alpha,
            "singlet": joint_json(&js),
            "product": joint_json(&jp),
            "tv": tv,
            "marginal_gap": gap,
        }));
    }
    let max_tv = tv_values.iter().map(|x| x.1).fold(0.0, f64::max);
    let argmax: Vec<f64> = tv_values
        .iter()
        .filter(|(_, tv)| max_tv - tv <= EXACT)
        .map(|(alpha, _)| *alpha)
        .collect();

    let mut body = Map::new();
    body.insert("singlet_schmidt_rank".into(), json!(schmidt_rank(&s)));
    body.insert("reduced_state_1".into(), matrix_json(&reduced1));
    body.insert("reduced_state_2".into(), matrix_json(&reduced2));
    body.insert("reduced_state_gap".into(), json!(reduced_gap));
    body.insert("product_density".into(), matrix_json(&product));
    body.insert("product_reduced_state".into(), matrix_json(&product_reduced));
    body.insert("max_tv".into(), json!(max_tv));
    body.insert("argmax_alpha".into(), json!(argmax));
    body.insert("max_marginal_gap".into(), json!(marginal_gap));
    body.insert("sweep".into(), Value::Array(sweep));

    Ok(Report {
        body,
        table,
        checks: vec![
            Check::at_most("paradox.reduced_state_gap", reduced_gap, EXACT),
            Check::at_most("paradox.marginal_gap", marginal_gap, EXACT),
        ],
    })
}

fn axis_direction(axis: AxisArg) -> Direction {
    match axis {
        AxisArg::X => Direction::PLUS_X,
        AxisArg::Y => Direction::PLUS_Y,
        AxisArg::Z => Direction::PLUS_Z,
        AxisArg::MinusX => Direction::MINUS_X,
        AxisArg::MinusY => Direction::PLUS_Y.antipode(),
        AxisArg::MinusZ => Direction::MINUS_Z,
    }
}

fn generator(a: &DynamicsArgs) -> ComplexMatrix {
    if let Some(h) = &a.hamiltonian {
        let off = Complex64::new(h[1], h[2]);
        return ComplexMatrix::from_rows2([
            [Complex64::new(h[0], 0.0), off],
            [off.conj(), Complex64::new(h[3], 0.0)],
        ]);
    }
    let minus = Complex64::new(-1.0, 0.0);
    match a.generator {
        AxisArg::X => pauli_x(),
        AxisArg::Y => pauli_y(),
        AxisArg::Z => pauli_z(),
        AxisArg::MinusX => pauli_x().scale(minus),
        AxisArg::MinusY => pauli_y().scale(minus),
        AxisArg::MinusZ => pauli_z().scale(minus),
    }
}

pub fn cmd_dynamics(g: &GlobalArgs, a: &DynamicsArgs) -> Result<Report, CliError> {
    let kind = match a.kind {
        KindArg::Unitary => EvolutionKind::Unitary,
        KindArg::Nonlinear => EvolutionKind::Nonlinear,
    };
    let spec = EvolutionSpec::new(generator(a), kind, 0.0).map_err(usage)?;
    let axis = match (a.axis, a.axis_theta) {
        (Some(ax), _) => Some(axis_direction(ax)),
        (None, Some(theta)) => Some(direction(g, theta, a.axis_phi)?),
        (None, None) => None,
    };
    let decomposition = match (axis, &a.point) {
        (Some(v), None) => Decomposition::with_weight(v, a.a).map_err(usage)?,
        (axis, point) => {
            let p = point.clone().unwrap_or_else(|| vec![0.0; 3]);
            let w = BallState::new(p[0], p[1], p[2]).map_err(usage)?;
            decompose(&w, axis).map_err(|e| match e {
                Error::DegenerateDecomposition => CliError::usage(
                    "the initial state is the center of the ball; pass --axis or --axis-theta to choose its diameter",
                ),
                other => usage(other),
            })?
        }
    };
    if !(a.t_max > 0.0 && a.t_max.is_finite()) {
        return Err(CliError::usage("--t-max must be positive and finite"));
    }
    let rule = if a.reweighted_mixture {
        MixtureRule::TraceReweighted
    } else {
        MixtureRule::FixedWeights
    };
    let grid = uniform_grid(a.t_max, a.steps.max(1));
    let traj = divergence_trajectory_with(&decomposition, &spec, &grid, rule).map_err(usage)?;
    let (max_div, argmax_t) = traj.max_divergence();
    let final_div = *traj.divergence.last().expect("grid is nonempty");
    let max_norm = traj
        .mixture_points
        .iter()
        .chain(&traj.pure_points)
        .map(BallState::norm)
        .fold(0.0, f64::max);

    let mut table = Table::new(vec![
        "t", "mix_x", "mix_y", "mix_z", "pure_x", "pure_y", "pure_z", "divergence",
    ]);
    let mut rows = Vec::with_capacity(grid.len());
    for i in 0..traj.times.len() {
        let m = traj.mixture_points[i].coords();
        let p = traj.pure_points[i].coords();
        table.push(vec![
            traj.times[i].into(),
            m[0].into(),
            m[1].into(),
            m[2].into(),
            p[0].into(),
            p[1].into(),
            p[2].into(),
            traj.divergence[i].into(),
        ]);
        rows.push(json!({"t": traj.times[i], "mixture": m, "pure": p, "divergence": traj.divergence[i]}));
    }

    let mut body = Map::new();
    body.insert("kind".into(), serde_json::to_value(kind).expect("enum"));
    body.insert("generator".into(), matrix_json(spec.generator()));
    body.insert("decomposition".into(), serde_json::to_value(decomposition).expect("plain struct"));
    body.insert("mixture_rule".into(), serde_json::to_value(rule).expect("enum"));
    body.insert("summary".into(), json!({"max_divergence": max_div, "argmax_t": argmax_t}));
    body.insert("final".into(), json!({"t": a.t_max, "divergence": final_div}));
    body.insert("trajectory".into(), Value::Array(rows));

    let mut checks = vec![Check::at_most("dynamics.ball_overshoot", (max_norm - 1.0).max(0.0), 1e-10)];
    if kind == EvolutionKind::Unitary {
        checks.push(Check::at_most("dynamics.linear_control", max_div, LINEAR_CONTROL));
    }
    Ok(Report { body, table, checks })
}
