use nalgebra::Matrix2;
use serde_json::json;

use umbrella_core::baroclinic::{merging_portrait, threshold_curves, BaroclinicParams, GROWTH_TOL, RESIDUAL_TOL};
use umbrella_core::beck::{closed_form_load, flutter_load_with, projections, DEFAULT_CEILING};
use umbrella_core::circulatory::{
    hulten_critical_mu, hulten_mu_undamped, hulten_quartic, nu_critical_bisected, nu_critical_damped_approx,
    nu_critical_damped_limit, nu_critical_undamped, quartic_from_system, ziegler_critical_load,
    ziegler_critical_load_bisected, ziegler_quartic, HultenParams, SystemMatrices2, ZieglerParams,
};
use umbrella_core::floquet::{
    analytic_bound, analytic_bound_kappa, tongue_scan, RotorParams, HALVING_TOL, LIOUVILLE_TOL, MULTIPLIER_TOL,
};
use umbrella_core::gyro::{
    find_krein_collision, maxwell_bloch_closed_form, maxwell_bloch_quartic, omega_critical_bisected, pairing_error,
    spectrum, two_dof_omega_cr, GyroSystem, MaxwellBlochParams,
};
use umbrella_core::quartic::oracle_equivalence;
use umbrella_core::sweep::BISECTION_TOL;
use umbrella_core::umbrella::sample_surface;
use umbrella_core::{hurwitz_verdict, par_map, Axis, Exec, QuarticCoeffs, StabilityVerdict, SweepGrid};

use crate::args::*;
use crate::output::{Cell, Report, Table};
use crate::CliError;

type Outcome = Result<Report, CliError>;

const VERDICT_COLUMNS: [&str; 5] = ["label", "left_count", "imag_count", "right_count", "boundary_resolved"];

fn verdict_cells(v: &StabilityVerdict) -> Vec<Cell> {
    vec![
        v.label.as_str().into(),
        v.left_count.into(),
        v.imag_count.into(),
        v.right_count.into(),
        v.boundary_resolved.into(),
    ]
}

fn sym(a: f64, b: f64, c: f64) -> Matrix2<f64> {
    Matrix2::new(a, b, b, c)
}

pub fn run(command: &Command, band: f64, exec: Exec) -> Outcome {
    match command {
        Command::Verdict(a) => verdict(a, band, exec),
        Command::BottemaLimit(a) => bottema_limit(a),
        Command::Ziegler(a) => ziegler(a, exec),
        Command::Hulten(a) => hulten(a, exec),
        Command::GyroSpectrum(a) => gyro_spectrum(a),
        Command::GyroUmbrella(a) => gyro_umbrella(a, exec),
        Command::MaxwellBloch(a) => maxwell_bloch(a, band, exec),
        Command::Floquet(a) => floquet(a, exec),
        Command::Beck(a) => beck(a, exec),
        Command::Baroclinic(a) => baroclinic(a, exec),
        Command::UmbrellaSample(a) => umbrella_sample(a, exec),
        Command::Sweep(a) => sweep(a, band, exec),
    }
}

fn verdict(a: &VerdictArgs, band: f64, exec: Exec) -> Outcome {
    if let Some(samples) = a.samples {
        if !(a.range > 0.0) {
            return Err(CliError::Config("--range must be positive".into()));
        }
        let r = oracle_equivalence(samples, a.seed, a.range, band, 1e-9, exec);
        let mut t = Table::new(&["samples", "compared", "skipped_near_boundary", "disagreements"]);
        t.push(vec![r.samples.into(), r.compared.into(), r.skipped_near_boundary.into(), r.disagreements.into()]);
        return Ok(Report::new(t)
            .line("samples", r.samples)
            .line("compared", r.compared)
            .line("disagreements", r.disagreements)
            .tolerances(json!({ "band": band, "oracle_tol": 1e-9 })));
    }
    let coeffs = [a.a1, a.a2, a.a3, a.a4].map(Option::unwrap_or_default);
    let q = QuarticCoeffs::new(coeffs[0], coeffs[1], coeffs[2], coeffs[3])?;
    let v = hurwitz_verdict(&q, band)?;
    let mut columns = vec!["a1", "a2", "a3", "a4"];
    columns.extend(VERDICT_COLUMNS);
    let mut t = Table::new(&columns);
    let mut row: Vec<Cell> = coeffs.iter().map(|&x| x.into()).collect();
    row.extend(verdict_cells(&v));
    t.push(row);
    Ok(Report::new(t)
        .line("", v.label)
        .line("left_count", v.left_count)
        .line("imag_count", v.imag_count)
        .line("right_count", v.right_count)
        .line("repeated_imag_root", v.has_repeated_imag_root)
        .tolerances(json!({ "band": band })))
}

fn bottema_limit(a: &BottemaArgs) -> Outcome {
    let k = sym(a.k.k11, a.k.k12, a.k.k22);
    let d = sym(a.d11, a.d12, a.d22);
    let nu0 = nu_critical_undamped(&k)?;
    let limit = nu_critical_damped_limit(&k, &d)?;
    let approx = nu_critical_damped_approx(&k, &d).ok();
    let mut t = Table::new(&["delta", "nu_undamped", "nu_damped_limit", "nu_damped_approx", "nu_bisected"]);
    for &delta in &a.deltas.0 {
        if !(delta > 0.0) {
            return Err(CliError::Config(format!("damping magnitudes must be positive, got {delta}")));
        }
        let bisected = nu_critical_bisected(&k, &d, delta)?;
        t.push(vec![delta.into(), nu0.into(), limit.into(), approx.into(), bisected.into()]);
    }
    Ok(Report::new(t).tolerances(json!({ "bisection": BISECTION_TOL })))
}

fn ziegler(a: &ZieglerArgs, exec: Exec) -> Outcome {
    let base = ZieglerParams { m: a.m, l: a.l, c: a.c, ..ZieglerParams::default() };
    let rows = par_map(exec, &a.b.0, |&b| -> umbrella_core::Result<_> {
        Ok((b, ziegler_critical_load(b, &base)?, ziegler_critical_load_bisected(b, &base)?))
    })
    .into_iter()
    .collect::<umbrella_core::Result<Vec<_>>>()?;
    let mut t = Table::new(&["b", "p_cr_analytic", "p_cr_bisected"]);
    for &(b, closed, bisected) in &rows {
        t.push(vec![b.into(), closed.into(), bisected.into()]);
    }
    let mut report = Report::new(t).tolerances(json!({ "bisection": BISECTION_TOL }));
    if let [(_, closed, bisected)] = rows[..] {
        report = report.line("p_cr", closed).line("p_cr_bisected", bisected);
    }
    Ok(report)
}

fn hulten(a: &HultenArgs, exec: Exec) -> Outcome {
    let points: Vec<(f64, f64)> = a.eta1.0.iter().flat_map(|&e1| a.eta2.0.iter().map(move |&e2| (e1, e2))).collect();
    let rows = par_map(exec, &points, |&(eta1, eta2)| {
        let p = HultenParams { omega1: a.omega1, omega2: a.omega2, eta1, eta2, mu: 0.0 };
        hulten_critical_mu(&p).map(|mu| (eta1, eta2, mu))
    })
    .into_iter()
    .collect::<umbrella_core::Result<Vec<_>>>()?;
    let mu0 = hulten_mu_undamped(a.omega1, a.omega2);
    let mut t = Table::new(&["omega1", "omega2", "eta1", "eta2", "mu_undamped", "mu_critical"]);
    for &(eta1, eta2, mu) in &rows {
        t.push(vec![a.omega1.into(), a.omega2.into(), eta1.into(), eta2.into(), mu0.into(), mu.into()]);
    }
    let mut report = Report::new(t).line("mu_undamped", mu0).tolerances(json!({ "bisection": BISECTION_TOL }));
    if let [(_, _, mu)] = rows[..] {
        report = report.line("mu_critical", mu);
    }
    Ok(report)
}

fn gyro_spectrum(a: &GyroSpectrumArgs) -> Outcome {
    let k = sym(a.k.k11, a.k.k12, a.k.k22);
    let d = sym(a.d.d11, a.d.d12, a.d.d22);
    let sys = GyroSystem::two_dof(k, d, 0.0, a.delta, a.nu)?;
    if a.collision {
        let (lo, hi) = a.omegas.0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        let c = find_krein_collision(&sys, lo, hi, 200)?;
        let mut t = Table::new(&["omega0", "freq0", "mu_squared", "d1", "n1", "gamma_star", "chain_residual"]);
        t.push(vec![
            c.omega0.into(),
            c.freq0.into(),
            c.mu_squared.into(),
            c.d1.into(),
            c.n1.into(),
            c.gamma_star.into(),
            c.chain_residual.into(),
        ]);
        return Ok(Report::new(t).line("omega0", c.omega0).line("freq0", c.freq0).line("gamma_star", c.gamma_star));
    }
    let mut t = Table::new(&["omega", "index", "re", "im", "pairing_error"]);
    for &omega in &a.omegas.0 {
        let spec = spectrum(&sys.with_parameters(omega, a.delta, a.nu));
        let err = pairing_error(&spec);
        for (i, z) in spec.iter().enumerate() {
            t.push(vec![omega.into(), i.into(), z.re.into(), z.im.into(), err.into()]);
        }
    }
    Ok(Report::new(t))
}

fn gyro_umbrella(a: &GyroUmbrellaArgs, exec: Exec) -> Outcome {
    let k = sym(a.k.k11, a.k.k12, a.k.k22);
    let d = sym(a.d.d11, a.d.d12, a.d.d22);
    let points: Vec<(f64, f64)> =
        a.deltas.0.iter().flat_map(|&delta| a.gammas.0.iter().map(move |&g| (delta, g * delta))).collect();
    let rows = par_map(exec, &points, |&(delta, nu)| -> umbrella_core::Result<_> {
        let analytic = two_dof_omega_cr(&k, &d, delta, nu)?;
        let sys = GyroSystem::two_dof(k, d, 0.0, delta, nu)?;
        let bisected = omega_critical_bisected(&sys, 0.0, 0.5)?;
        Ok(vec![delta.into(), nu.into(), analytic.into(), bisected.into()])
    })
    .into_iter()
    .collect::<umbrella_core::Result<Vec<Vec<Cell>>>>()?;
    let mut t = Table::new(&["delta", "nu", "omega_cr_analytic", "omega_cr_bisected"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Report::new(t).tolerances(json!({ "bisection": BISECTION_TOL })))
}

fn maxwell_bloch(a: &MaxwellBlochArgs, band: f64, exec: Exec) -> Outcome {
    let points: Vec<(f64, f64)> = a.omegas.0.iter().flat_map(|&o| a.nus.0.iter().map(move |&n| (o, n))).collect();
    let rows = par_map(exec, &points, |&(omega, nu)| -> umbrella_core::Result<Vec<Cell>> {
        let p = MaxwellBlochParams { omega, delta: a.delta, nu, kappa: a.kappa };
        let v = hurwitz_verdict(&maxwell_bloch_quartic(&p)?, band)?;
        let closed: Cell = maxwell_bloch_closed_form(&p).map_or(Cell::Empty, Cell::Bool);
        let mut row: Vec<Cell> = vec![omega.into(), a.delta.into(), nu.into(), a.kappa.into()];
        row.extend(verdict_cells(&v));
        row.push(closed);
        Ok(row)
    })
    .into_iter()
    .collect::<umbrella_core::Result<Vec<_>>>()?;
    let mut columns = vec!["omega", "delta", "nu", "kappa"];
    columns.extend(VERDICT_COLUMNS);
    columns.push("stable_closed_form");
    let mut t = Table::new(&columns);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Report::new(t).tolerances(json!({ "band": band })))
}

fn floquet(a: &FloquetArgs, exec: Exec) -> Outcome {
    let p = RotorParams::with_kappa(a.alpha, a.eps, 1.0, a.kappa)?;
    let eta0 = p.eta0();
    let lo = a.eta_min.unwrap_or(eta0 * (1.0 - 3.0 * a.eps));
    let hi = a.eta_max.unwrap_or(eta0 * (1.0 + 3.0 * a.eps));
    if !(lo > 0.0 && hi >= lo) || a.points == 0 {
        return Err(CliError::Config(format!("bad η range [{lo}, {hi}] with {} points", a.points)));
    }
    let etas = Axis::linear("eta", lo, hi, a.points)?.values();
    let bound = if a.kappa == 0.0 {
        Some(analytic_bound(a.alpha, a.eps))
    } else {
        analytic_bound_kappa(a.alpha, a.eps, a.kappa).ok()
    };
    let rows = tongue_scan(&p, &etas, exec)?;
    let mut t = Table::new(&["eta", "max_modulus", "stable", "eta_b_analytic_lo", "eta_b_analytic_hi"]);
    for r in rows {
        t.push(vec![
            r.eta.into(),
            r.max_modulus.into(),
            r.stable.into(),
            bound.map(|b| b.0).into(),
            bound.map(|b| b.1).into(),
        ]);
    }
    Ok(Report::new(t).tolerances(json!({
        "multiplier": MULTIPLIER_TOL,
        "step_halving": HALVING_TOL,
        "liouville": LIOUVILLE_TOL,
    })))
}

fn beck(a: &BeckArgs, exec: Exec) -> Outcome {
    let proj = projections(a.n_modes)?;
    let points: Vec<(f64, f64)> = a.d1.0.iter().flat_map(|&x| a.d2.0.iter().map(move |&y| (x, y))).collect();
    let rows = par_map(exec, &points, |&(d1, d2)| -> umbrella_core::Result<Vec<Cell>> {
        let numeric = flutter_load_with(&proj, d1, d2, DEFAULT_CEILING)?.q_cr;
        Ok(vec![d1.into(), d2.into(), numeric.into(), closed_form_load(d1, d2).ok().into()])
    })
    .into_iter()
    .collect::<umbrella_core::Result<Vec<_>>>()?;
    let mut t = Table::new(&["d1", "d2", "q_cr_numeric", "q_cr_be12"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Report::new(t).tolerances(json!({ "bisection": BISECTION_TOL * 100.0, "n_modes": a.n_modes })))
}

fn baroclinic(a: &BaroclinicArgs, exec: Exec) -> Outcome {
    let p = BaroclinicParams::with_shear(a.f, a.beta, a.r, a.alpha, a.m, 0.0);
    p.validate()?;
    let tolerances = json!({ "growth": GROWTH_TOL, "residual": RESIDUAL_TOL });
    if let Some(shears) = &a.shears {
        let rows = merging_portrait(&p, &shears.0, a.r, exec)?;
        let mut t = Table::new(&["U", "re_c1", "im_c1", "re_c2", "im_c2"]);
        for r in rows {
            let (c1, c2) = (r.roots.c1, r.roots.c2);
            t.push(vec![r.shear.into(), c1.re.into(), c1.im.into(), c2.re.into(), c2.im.into()]);
        }
        return Ok(Report::new(t).tolerances(tolerances));
    }
    if a.alphas.0.iter().any(|&x| !(x > 0.0)) {
        return Err(CliError::Config("wavenumbers must be positive".into()));
    }
    let mut t = Table::new(&["alpha", "U_cI", "U_cR"]);
    for r in threshold_curves(&p, &a.alphas.0, exec) {
        t.push(vec![r.alpha.into(), r.u_ci.into(), r.u_cr.into()]);
    }
    Ok(Report::new(t).tolerances(tolerances))
}

fn umbrella_sample(a: &UmbrellaSampleArgs, exec: Exec) -> Outcome {
    let samples = sample_surface(a.grid, a.x1_max, a.x2_max, exec)?;
    let mut t = Table::new(&["x1", "x2", "y1", "y2", "y3", "a1", "a2", "a3", "residual"]);
    let mut worst = 0.0f64;
    for s in &samples {
        let residual = s.umbrella_residual.abs().max(s.bottema_residual.abs());
        worst = worst.max(residual);
        t.push([s.x1, s.x2, s.y1, s.y2, s.y3, s.a1, s.a2, s.a3, residual].into_iter().map(Cell::from).collect());
    }
    Ok(Report::new(t).line("rows", samples.len()).line("max_residual", worst))
}

struct SystemSpec {
    names: &'static [&'static str],
    defaults: &'static [f64],
}

fn system_spec(system: System) -> SystemSpec {
    match system {
        System::Quartic => SystemSpec { names: &["a1", "a2", "a3", "a4"], defaults: &[1.0, 1.0, 1.0, 1.0] },
        System::Ziegler => SystemSpec { names: &["m", "l", "c", "b", "p"], defaults: &[1.0, 1.0, 1.0, 0.0, 0.0] },
        System::Hulten => {
            SystemSpec { names: &["omega1", "omega2", "eta1", "eta2", "mu"], defaults: &[1.0, 1.2, 0.0, 0.0, 0.0] }
        }
        System::MaxwellBloch => {
            SystemSpec { names: &["omega", "delta", "nu", "kappa"], defaults: &[0.0, 0.0, 0.0, 0.0] }
        }
        System::Gyro => SystemSpec {
            names: &["k11", "k12", "k22", "d11", "d12", "d22", "omega", "delta", "nu"],
            defaults: &[-1.0, 0.0, -4.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        },
    }
}

fn system_quartic(system: System, v: &[f64]) -> umbrella_core::Result<QuarticCoeffs> {
    match system {
        System::Quartic => QuarticCoeffs::new(v[0], v[1], v[2], v[3]),
        System::Ziegler => ziegler_quartic(&ZieglerParams { m: v[0], l: v[1], c: v[2], b: v[3], p: v[4] }),
        System::Hulten => {
            hulten_quartic(&HultenParams { omega1: v[0], omega2: v[1], eta1: v[2], eta2: v[3], mu: v[4] })
        }
        System::MaxwellBloch => {
            maxwell_bloch_quartic(&MaxwellBlochParams { omega: v[0], delta: v[1], nu: v[2], kappa: v[3] })
        }
        System::Gyro => {
            let s = SystemMatrices2::new(sym(v[0], v[1], v[2]), v[8], sym(v[3], v[4], v[5]), v[7], v[6])?;
            Ok(quartic_from_system(&s))
        }
    }
}

fn sweep(a: &SweepArgs, band: f64, exec: Exec) -> Outcome {
    let spec = system_spec(a.system);
    let index = |name: &str| -> Result<usize, CliError> {
        spec.names.iter().position(|n| *n == name).ok_or_else(|| {
            CliError::Config(format!("unknown parameter `{name}`; expected one of {}", spec.names.join(", ")))
        })
    };
    if a.axes.len() > 3 {
        return Err(CliError::Config("at most three axes".into()));
    }
    let mut base = spec.defaults.to_vec();
    let mut seen = Vec::new();
    for s in &a.set {
        let i = index(&s.name)?;
        if seen.contains(&i) {
            return Err(CliError::Config(format!("parameter `{}` given twice", s.name)));
        }
        seen.push(i);
        base[i] = s.value;
    }
    let mut slots = Vec::new();
    let mut axes = Vec::new();
    for ax in &a.axes {
        let i = index(&ax.name)?;
        if seen.contains(&i) {
            return Err(CliError::Config(format!("parameter `{}` given twice", ax.name)));
        }
        seen.push(i);
        slots.push(i);
        axes.push(Axis::linear(ax.name.clone(), ax.lo, ax.hi, ax.count).map_err(|e| CliError::Config(e.to_string()))?);
    }
    let system = a.system;
    let grid = SweepGrid::evaluate(axes, exec, |x| {
        let mut v = base.clone();
        for (&slot, &value) in slots.iter().zip(x) {
            v[slot] = value;
        }
        system_quartic(system, &v).and_then(|q| hurwitz_verdict(&q, band))
    })?;
    let mut columns: Vec<&str> = a.axes.iter().map(|ax| ax.name.as_str()).collect();
    columns.extend(VERDICT_COLUMNS);
    let mut t = Table::new(&columns);
    for (point, result) in grid.points.iter().zip(grid.results) {
        let v = result?;
        let mut row: Vec<Cell> = point.iter().map(|&x| x.into()).collect();
        row.extend(verdict_cells(&v));
        t.push(row);
    }
    Ok(Report::new(t).tolerances(json!({ "band": band })))
}
