//! Subcommands and named scenarios. Each target computes its files in memory
//! and returns them with a few human-readable summary lines.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;
use vibdimer::interferometry::{
    isolate_from_model, linspace, peak_and_fringe_analysis, refine_peak, semiclassical_match, semiclassical_match_numeric,
    waiting_fraction, InterferogramGrid, Part, PeakReport,
};
use vibdimer::observables::{
    fit_jcm, jcm_curve, mean_momentum, mean_position, population, time_averaged_population, Trajectory,
};
use vibdimer::pulses::{pulse_train, PulseOperator, PulseSpec, TrainStep};
use vibdimer::spectral::eigen_momentum_map;
use vibdimer::states::{coherent_state, fock_rotated, rotated_coherent, write_state_csv, CoherentSpec, Direction, RotatedSpec};
use vibdimer::{
    build_hamiltonian, diagonalize, DimerParams, EigenSystem, Electronic, Error, InterferometryModel, Schedule, StateVector,
    VibronicBasis,
};

use crate::config::{BasisKind, InitialConfig, InitialKind, RunConfig, ScanConfig, ScanVariable};
use crate::error::{CliError, CliResult};
use crate::output::{csv_table, OutputSet};

pub const TARGETS: [&str; 11] =
    ["dynamics", "eigen", "interferogram", "match", "scan", "stepwise", "detuning", "revivals", "table1", "marcus", "perpendicular"];

pub struct Outcome {
    pub files: OutputSet,
    pub summary: Vec<String>,
}

pub fn run_target(name: &str, cfg: &RunConfig) -> CliResult<Outcome> {
    let mut out = Outcome { files: OutputSet::default(), summary: Vec::new() };
    match name {
        "dynamics" => dynamics(cfg, &mut out)?,
        "eigen" => eigen(cfg, &mut out)?,
        "interferogram" => interferogram(cfg, &mut out)?,
        "match" => matching(cfg, &mut out)?,
        "scan" => scan(cfg, &cfg.scan, &cfg.params, "scan.csv", &mut out)?,
        "stepwise" => kinetics_family(cfg, "stepwise", &[0.0, 0.5, 7.0, 7.39], 6.0, 1201, &mut out)?,
        "detuning" => kinetics_family(cfg, "detuning", &[0.0, 1.0 / 16.0, 0.125, 0.25], 20.0, 801, &mut out)?,
        "revivals" => revivals(cfg, &mut out)?,
        "table1" => table1(cfg, &mut out)?,
        "marcus" => marcus(cfg, &mut out)?,
        "perpendicular" => perpendicular(cfg, &mut out)?,
        other => return Err(CliError::Config(format!("unknown target `{other}`"))),
    }
    Ok(out)
}

fn basis_for(cfg: &RunConfig) -> Arc<VibronicBasis> {
    match cfg.basis.states {
        BasisKind::OneExciton => VibronicBasis::one_exciton(cfg.basis.cutoff),
        BasisKind::Full => VibronicBasis::full(cfg.basis.cutoff),
    }
}

fn prepare(st: &InitialConfig, basis: &Arc<VibronicBasis>, params: &DimerParams) -> CliResult<StateVector> {
    let j = st.electronic()?;
    let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
    let psi = match st.kind {
        InitialKind::FranckCondon => coherent_state(&CoherentSpec::franck_condon(j), basis, params)?,
        InitialKind::Coherent => {
            let spec = CoherentSpec { state: j, alpha: c(st.alpha), beta: c(st.beta), frame: st.frame };
            coherent_state(&spec, basis, params)?
        }
        InitialKind::Rotated => {
            let spec = RotatedSpec { direction: st.direction, gamma: st.gamma, phase: st.phase };
            rotated_coherent(&spec, j, basis, params)?
        }
        InitialKind::Fock => fock_rotated(st.p, st.q, j, basis)?,
        InitialKind::Number => StateVector::basis_state(basis, j, st.p, st.q)?,
    };
    Ok(psi)
}

/// Initial state of `dynamics`/`eigen`, with the configured pulses applied and
/// the result renormalized.
fn prepared_state(cfg: &RunConfig, basis: &Arc<VibronicBasis>, eig: &EigenSystem) -> CliResult<StateVector> {
    let psi = prepare(&cfg.initial, basis, &cfg.params)?;
    if cfg.pulses.is_empty() {
        return Ok(psi);
    }
    let tau = cfg.params.tau_vib();
    let steps: Vec<TrainStep> = cfg
        .pulses
        .iter()
        .map(|p| TrainStep {
            pulse: PulseSpec::new(p.label, p.polarization).with_phase(p.phase).with_strength(p.strength),
            order: p.order,
            wait: p.wait * tau,
        })
        .collect();
    let ops = PulseOperator::new(&cfg.params, basis)?;
    let out = pulse_train(&psi, &steps, &ops, eig)?;
    if out.norm_sqr() == 0.0 {
        return Err(CliError::Config("the pulse sequence annihilates the initial state".into()));
    }
    // perturbative pulses scale the norm by θ per interaction; report the conditional state
    Ok(out.normalized()?)
}

fn column_label(j: Electronic) -> &'static str {
    match j {
        Electronic::Ground => "0",
        Electronic::Donor => "1",
        Electronic::Acceptor => "1p",
        Electronic::Doubly => "2",
    }
}

/// Times in periods, inclusive of both ends.
fn period_axis(t0: f64, t1: f64, samples: usize) -> Vec<f64> {
    linspace(t0, t1, samples)
}

/// Block populations at each time (in periods).
fn kinetics(eig: &EigenSystem, psi: &StateVector, periods: &[f64], tau: f64) -> CliResult<Trajectory> {
    let prop = eig.propagator(psi)?;
    let states = psi.basis().states().to_vec();
    let rows: Vec<Vec<f64>> = periods
        .par_iter()
        .map(|&t| {
            let s = prop.at(t * tau);
            states.iter().map(|&j| population(&s, j)).collect::<Result<Vec<f64>, Error>>()
        })
        .collect::<Result<_, _>>()?;
    let names = states.iter().map(|&j| format!("P_{}", column_label(j))).collect();
    Ok(Trajectory::new(periods.to_vec(), names, rows)?)
}

/// Mean positions and momenta of the one-exciton blocks; empty blocks give NaN.
fn phase_space(eig: &EigenSystem, psi: &StateVector, periods: &[f64], params: &DimerParams) -> CliResult<Trajectory> {
    let prop = eig.propagator(psi)?;
    let tau = params.tau_vib();
    let blocks: Vec<Electronic> =
        [Electronic::Donor, Electronic::Acceptor].into_iter().filter(|&j| psi.basis().contains(j)).collect();
    let rows: Vec<Vec<f64>> = periods
        .par_iter()
        .map(|&t| {
            let s = prop.at(t * tau);
            let mut row = Vec::new();
            for &j in &blocks {
                let q = mean_position(&s, j, params);
                let p = mean_momentum(&s, j, params);
                match (q, p) {
                    (Ok(q), Ok(p)) => row.extend([q.0, q.1, p.0, p.1]),
                    (Err(Error::EmptyBlock(_)), _) | (_, Err(Error::EmptyBlock(_))) => row.extend([f64::NAN; 4]),
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
            Ok(row)
        })
        .collect::<Result<_, Error>>()?;
    let names = blocks
        .iter()
        .flat_map(|&j| ["q_a", "q_b", "p_a", "p_b"].map(|c| format!("{c}_{}", column_label(j))))
        .collect();
    Ok(Trajectory::new(periods.to_vec(), names, rows)?)
}

fn csv_of(traj: &Trajectory) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    Ok(buf)
}

fn dynamics(cfg: &RunConfig, out: &mut Outcome) -> CliResult<()> {
    let basis = basis_for(cfg);
    let eig = diagonalize(&build_hamiltonian(&cfg.params, &basis)?)?;
    let psi = prepared_state(cfg, &basis, &eig)?;
    let d = &cfg.dynamics;
    let periods = period_axis(d.t_start, d.t_end, d.samples);
    let kin = kinetics(&eig, &psi, &periods, cfg.params.tau_vib())?;
    out.files.with("initial_state.csv", |w| write_state_csv(&psi, w))?;
    out.files.add("kinetics.csv", csv_of(&kin)?);
    if d.trajectories {
        out.files.add("trajectory.csv", csv_of(&phase_space(&eig, &psi, &periods, &cfg.params)?)?);
    }
    if let (Some(k), Some(last)) = (kin.names.iter().position(|n| n == "P_1p"), kin.rows.last()) {
        out.summary.push(format!("P_1p at t = {} tau: {:.6}", d.t_end, last[k]));
    }
    Ok(())
}

fn eigen(cfg: &RunConfig, out: &mut Outcome) -> CliResult<()> {
    let basis = basis_for(cfg);
    let h = build_hamiltonian(&cfg.params, &basis)?;
    let eig = diagonalize(&h)?;
    let psi = prepared_state(cfg, &basis, &eig)?;
    out.files.with("eigenvalues.csv", |w| eig.write_csv(w))?;
    let moments = eigen_momentum_map(&eig, &cfg.params, &[psi])?;
    let header: Vec<String> =
        ["energy", "p_par", "p_perp", "rms_p_par", "rms_p_perp", "weight_initial"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<f64>> =
        moments.iter().map(|m| vec![m.energy, m.p_par, m.p_perp, m.rms_p_par, m.rms_p_perp, m.weights[0]]).collect();
    out.files.add("momentum_map.csv", csv_table(&header, &rows));
    out.summary.push(format!(
        "{} eigenstates, residual {:.2e}, orthonormality error {:.2e}",
        eig.len(),
        eig.max_residual(&h),
        eig.orthonormality_error()
    ));
    Ok(())
}

fn base_schedule(cfg: &RunConfig, params: &DimerParams) -> CliResult<Schedule> {
    let i = &cfg.interferometry;
    let s = Schedule {
        t_w: i.t_w * params.tau_vib(),
        phi_p: i.phi_p,
        phi_d: i.phi_d,
        strength: i.strength,
        transfer: i.transfer,
        ..Schedule::default()
    };
    s.validate()?;
    Ok(s)
}

struct ScanResult {
    grid: InterferogramGrid,
    peak: PeakReport,
}

fn interferogram_scan(cfg: &RunConfig, params: &DimerParams) -> CliResult<ScanResult> {
    let i = &cfg.interferometry;
    let model = InterferometryModel::new(params, cfg.basis.cutoff, i.reference_coupling)?;
    let base = base_schedule(cfg, params)?;
    let tau = params.tau_vib();
    let tp = linspace(i.t_p[0] * tau, i.t_p[1] * tau, i.t_p_points);
    let td = linspace(i.t_d[0] * tau, i.t_d[1] * tau, i.t_d_points);
    let grid = model.scan(&base, &tp, &td)?;
    let coarse = peak_and_fringe_analysis(&grid)?;
    let peak = if i.refine > 0 {
        refine_peak(&model, &base, &coarse, (tp[1] - tp[0], td[1] - td[0]), i.refine)?
    } else {
        coarse
    };
    Ok(ScanResult { grid, peak })
}

fn add_grid_files(out: &mut Outcome, prefix: &str, grid: &InterferogramGrid) -> CliResult<()> {
    for (part, tag) in [(Part::Re, "re"), (Part::Im, "im"), (Part::Abs, "abs")] {
        out.files.with(format!("{prefix}_{tag}.csv"), |w| grid.write_csv(part, w))?;
    }
    for (part, tag) in [(Part::Re, "re"), (Part::Abs, "abs")] {
        out.files.with(format!("{prefix}_{tag}.pgm"), |w| grid.write_pgm(part, w))?;
    }
    Ok(())
}

/// One line of a peak report; times in periods, rates in units of ω.
struct PeakRow {
    configuration: String,
    method: String,
    t_p: f64,
    t_d: f64,
    gamma: Option<(Complex64, Complex64)>,
    magnitude: Option<f64>,
}

fn peak_row(configuration: &str, p: &PeakReport, tau: f64) -> PeakRow {
    PeakRow {
        configuration: configuration.into(),
        method: "quantum".into(),
        t_p: p.t_p / tau,
        t_d: p.t_d / tau,
        gamma: Some((p.gamma_tp, p.gamma_td)),
        magnitude: Some(p.magnitude),
    }
}

fn peak_csv(rows: &[PeakRow]) -> Vec<u8> {
    let mut s = String::from("configuration,method,t_p,t_d,gamma_p,gamma_d,decay_p,decay_d,magnitude\n");
    let num = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in rows {
        let g = r.gamma;
        s += &format!(
            "{},{},{:.16e},{:.16e},{},{},{},{},{}\n",
            r.configuration,
            r.method,
            r.t_p,
            r.t_d,
            num(g.map(|g| g.0.re)),
            num(g.map(|g| g.1.re)),
            num(g.map(|g| g.0.im)),
            num(g.map(|g| g.1.im)),
            num(r.magnitude)
        );
    }
    s.into_bytes()
}

fn interferogram(cfg: &RunConfig, out: &mut Outcome) -> CliResult<()> {
    let r = interferogram_scan(cfg, &cfg.params)?;
    let tau = cfg.params.tau_vib();
    add_grid_files(out, "interferogram", &r.grid)?;
    out.files.add("peak.csv", peak_csv(&[peak_row("configured", &r.peak, tau)]));
    out.summary.push(format!(
        "peak at t_p = {:.4} tau, t_d = {:.4} tau; Gamma' = ({:+.3}, {:+.3})",
        r.peak.t_p / tau,
        r.peak.t_d / tau,
        r.peak.gamma_tp.re,
        r.peak.gamma_td.re
    ));
    Ok(())
}

fn match_rows(params: &DimerParams, fraction: f64, t_w: f64, m: u32, n: u32, label: &str) -> Vec<(String, Vec<f64>)> {
    let tau = params.tau_vib();
    let mut rows = Vec::new();
    if (t_w - 0.5).abs() < 1e-12 {
        let (tp, td) = semiclassical_match(fraction, m, n, params);
        rows.push((format!("{label}closed_form"), vec![fraction, t_w, tp / tau, td / tau, 0.0]));
    }
    let (tp, td, res) = semiclassical_match_numeric(fraction, t_w * tau, m, n, params);
    rows.push((format!("{label}numeric"), vec![fraction, t_w, tp / tau, td / tau, res]));
    rows
}

fn matching(cfg: &RunConfig, out: &mut Outcome) -> CliResult<()> {
    let m = &cfg.matching;
    let tau = cfg.params.tau_vib();
    let fraction = match m.fraction {
        Some(f) => f,
        None => waiting_fraction(&cfg.params, m.t_w * tau)?,
    };
    let mut s = String::from("method,fraction,t_w,t_p,t_d,residual\n");
    for (label, v) in match_rows(&cfg.params, fraction, m.t_w, m.m, m.n, "") {
        let cells: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
        s += &format!("{label},{}\n", cells.join(","));
        out.summary.push(format!("{label}: t_p = {:.4} tau, t_d = {:.4} tau (fraction {fraction:.4})", v[2], v[3]));
    }
    out.files.add("match.csv", s.into_bytes());
    Ok(())
}

fn scan(cfg: &RunConfig, sc: &ScanConfig, params: &DimerParams, file: &str, out: &mut Outcome) -> CliResult<()> {
    let values = linspace(sc.from, sc.to, sc.points);
    let tau = params.tau_vib();
    let rows: Vec<Vec<f64>> = values
        .par_iter()
        .map(|&v| -> CliResult<Vec<f64>> {
            let p = match sc.variable {
                ScanVariable::Detuning => params.with_detuning(v),
                ScanVariable::Coupling => params.with_coupling(v),
            };
            p.validate()?;
            let basis = basis_for(cfg);
            let eig = diagonalize(&build_hamiltonian(&p, &basis)?)?;
            let mut row = vec![v];
            for st in &sc.initial_states {
                let psi = prepare(st, &basis, &p)?;
                row.push(population(&eig.propagate(&psi, sc.probe_time * tau)?, Electronic::Acceptor)?);
                row.push(time_averaged_population(&eig, &psi, Electronic::Acceptor, sc.average_time * tau)?);
            }
            Ok(row)
        })
        .collect::<CliResult<_>>()?;
    let variable = match sc.variable {
        ScanVariable::Detuning => "detuning",
        ScanVariable::Coupling => "coupling",
    };
    let mut header = vec![variable.to_string()];
    for st in &sc.initial_states {
        header.push(format!("{}_P1p_at_probe", st.label()));
        header.push(format!("{}_P1p_mean", st.label()));
    }
    for (k, st) in sc.initial_states.iter().enumerate() {
        let best = rows.iter().max_by(|a, b| a[2 + 2 * k].total_cmp(&b[2 + 2 * k])).expect("at least one point");
        out.summary.push(format!("{}: largest mean P_1p {:.4} at {variable} = {:+.4}", st.label(), best[2 + 2 * k], best[0]));
    }
    out.files.add(file, csv_table(&header, &rows));
    Ok(())
}

fn fc_kinetics(cfg: &RunConfig, params: &DimerParams, periods: &[f64]) -> CliResult<Trajectory> {
    let basis = basis_for(cfg);
    let eig = diagonalize(&build_hamiltonian(params, &basis)?)?;
    let psi = coherent_state(&CoherentSpec::franck_condon(Electronic::Donor), &basis, params)?;
    kinetics(&eig, &psi, periods, params.tau_vib())
}

/// Franck-Condon kinetics at `J = ω/10` for several detunings.
fn kinetics_family(cfg: &RunConfig, name: &str, detunings: &[f64], t_end: f64, samples: usize, out: &mut Outcome) -> CliResult<()> {
    let periods = period_axis(0.0, t_end, samples);
    for &de in detunings {
        let params = cfg.params.with_coupling(0.1).with_detuning(de);
        let kin = fc_kinetics(cfg, &params, &periods)?;
        let k = kin.names.iter().position(|n| n == "P_1p").expect("acceptor block present");
        let peak = kin.column(k).into_iter().fold(0.0, f64::max);
        out.summary.push(format!("detuning {de}: max P_1p over {t_end} tau = {peak:.4}"));
        out.files.add(format!("{name}_de_{de}.csv"), csv_of(&kin)?);
    }
    Ok(())
}

fn revivals(cfg: &RunConfig, out: &mut Outcome) -> CliResult<()> {
    let params = cfg.params.with_coupling(0.1).with_detuning(0.0);
    let tau = params.tau_vib();
    let periods = period_axis(0.0, 100.0, 10_001);
    let kin = fc_kinetics(cfg, &params, &periods)?;
    let donor = kin.column(kin.names.iter().position(|n| n == "P_1").expect("donor block present"));
    let mut fits = Vec::new();
    for (lo, hi) in [(0.0, 20.0), (20.0, 40.0)] {
        let (t, v): (Vec<f64>, Vec<f64>) =
            periods.iter().zip(&donor).filter(|(t, _)| **t >= lo && **t <= hi).map(|(t, v)| (t * tau, *v)).unzip();
        let f = fit_jcm(&t, &v, (0.0, 0.2), (0.0, 4.0))?;
        out.summary.push(format!("JCM fit on [{lo}, {hi}] tau: g = {:.5}, alpha = {:.4}, rms = {:.4}", f.g, f.alpha, f.rms));
        fits.push(vec![lo, hi, f.g, f.alpha, f.rms]);
    }
    let (g, a) = (fits[0][2], fits[0][3]);
    let rows: Vec<Vec<f64>> = periods.iter().zip(&kin.rows).map(|(t, r)| [r.clone(), vec![jcm_curve(t * tau, g, a)]].concat()).collect();
    let mut header = vec!["t".to_string()];
    header.extend(kin.names.iter().cloned());
    header.push("jcm_donor".into());
    let rows: Vec<Vec<f64>> = periods.iter().zip(rows).map(|(t, r)| [vec![*t], r].concat()).collect();
    out.files.add("revivals.csv", csv_table(&header, &rows));
    let fit_header: Vec<String> = ["window_start", "window_end", "g", "alpha", "rms"].iter().map(|s| s.to_string()).collect();
    out.files.add("revivals_fit.csv", csv_table(&fit_header, &fits));
    Ok(())
}

fn table1(cfg: &RunConfig, out: &mut Outcome) -> CliResult<()> {
    let efc = cfg.params.reorganization_energy();
    let mut rows = Vec::new();
    for (label, de, table_fraction) in [("equal", 0.0, 0.0), ("downhill", 2.0 * efc, 0.5)] {
        let params = cfg.params.with_detuning(de);
        let tau = params.tau_vib();
        let r = interferogram_scan(cfg, &params)?;
        add_grid_files(out, &format!("table1_{label}"), &r.grid)?;
        rows.push(peak_row(label, &r.peak, tau));
        out.summary.push(format!(
            "{label}: peak ({:.4}, {:.4}) tau, Gamma' ({:+.3}, {:+.3})",
            r.peak.t_p / tau,
            r.peak.t_d / tau,
            r.peak.gamma_tp.re,
            r.peak.gamma_td.re
        ));
        let ridge = waiting_fraction(&params, cfg.interferometry.t_w * tau)?;
        for (prefix, f) in [("semiclassical_table_fraction_", table_fraction), ("semiclassical_ridge_fraction_", ridge)] {
            for (method, v) in match_rows(&params, f, cfg.interferometry.t_w, 0, 1, prefix) {
                rows.push(PeakRow { configuration: label.into(), method, t_p: v[2], t_d: v[3], gamma: None, magnitude: None });
            }
        }
    }
    out.files.add("table1.csv", peak_csv(&rows));
    Ok(())
}

fn marcus(cfg: &RunConfig, out: &mut Outcome) -> CliResult<()> {
    let efc = cfg.params.reorganization_energy();
    let sc = ScanConfig {
        variable: ScanVariable::Detuning,
        from: -4.0 * efc,
        to: 4.0 * efc,
        points: 33,
        probe_time: 2.0,
        average_time: 100.0,
        initial_states: vec![InitialConfig::number("donor", 0, 0), InitialConfig::fock("donor", 1, 0)],
    };
    scan(cfg, &sc, &cfg.params.with_coupling(0.5), "marcus.csv", out)
}

/// Two-period acceptor yield for perpendicular coherent excitations of phase 0
/// and π, over the same detuning range as `marcus`.
fn perpendicular(cfg: &RunConfig, out: &mut Outcome) -> CliResult<()> {
    let base = cfg.params.with_coupling(0.5);
    let efc = base.reorganization_energy();
    let values = linspace(-4.0 * efc, 4.0 * efc, 33);
    let rows: Vec<Vec<f64>> = values
        .par_iter()
        .map(|&de| -> CliResult<Vec<f64>> {
            let p = base.with_detuning(de);
            let basis = basis_for(cfg);
            let eig = diagonalize(&build_hamiltonian(&p, &basis)?)?;
            let rate = |phase: f64| -> CliResult<f64> {
                let spec = RotatedSpec { direction: Direction::Perpendicular, gamma: p.delta(), phase };
                let psi = rotated_coherent(&spec, Electronic::Donor, &basis, &p)?;
                Ok(time_averaged_population(&eig, &psi, Electronic::Acceptor, 2.0 * p.tau_vib())?)
            };
            let (a, b) = (rate(0.0)?, rate(PI)?);
            Ok(vec![de, a, b, a - b])
        })
        .collect::<CliResult<_>>()?;
    let header: Vec<String> = ["detuning", "rate_phase_0", "rate_phase_pi", "difference"].iter().map(|s| s.to_string()).collect();
    for target in [2.0 * efc, -2.0 * efc] {
        if let Some(r) = rows.iter().find(|r| (r[0] - target).abs() < 1e-9) {
            out.summary.push(format!("detuning {:+.3}: rate(0) - rate(pi) = {:+.4e}", r[0], r[3]));
        }
    }
    out.files.add("perpendicular.csv", csv_table(&header, &rows));
    Ok(())
}

/// Quick structural checks on a small system; every line is `PASS` or `FAIL`.
pub fn validate(cfg: &RunConfig) -> CliResult<(bool, Vec<String>)> {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        lines.push(format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
    };
    let params = &cfg.params;
    let tau = params.tau_vib();

    let bijective = (0..=25).all(|c| {
        let b = VibronicBasis::full(c);
        b.entries().iter().enumerate().all(|(i, e)| b.index_of(e.state, e.m, e.n) == Some(i))
    });
    check("basis index round trip", bijective, "cutoffs 0..=25".into());

    let lambda = params.delta();
    let worst_row = (0..10)
        .map(|m| {
            let s: f64 = (0..120).map(|n| vibdimer::franck_condon_1d(m, n, lambda).map(|v| v * v).unwrap_or(f64::NAN)).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max);
    check("Franck-Condon completeness", worst_row < 1e-10, format!("max row deviation {worst_row:.2e}"));

    let basis = VibronicBasis::full(8);
    let h = build_hamiltonian(params, &basis)?;
    let eig = diagonalize(&h)?;
    let residual = eig.max_residual(&h) / eig.spectral_norm();
    check("eigen residual", residual < 1e-10, format!("{residual:.2e} relative"));
    let ortho = eig.orthonormality_error();
    check("eigenvector orthonormality", ortho < 1e-12, format!("{ortho:.2e}"));

    let states: Vec<StateVector> = (0..basis.len().min(12))
        .map(|k| {
            let mut amps = vec![Complex64::new(0.0, 0.0); basis.len()];
            for (i, a) in amps.iter_mut().enumerate() {
                let x = ((i * 7 + k * 13) % 17) as f64 - 8.0;
                *a = Complex64::new(x, ((i + 3 * k) % 5) as f64 - 2.0);
            }
            StateVector::from_amplitudes(&basis, amps).and_then(|s| s.normalized())
        })
        .collect::<Result<_, _>>()?;
    let (mut norm_err, mut comp_err) = (0.0f64, 0.0f64);
    for (k, psi) in states.iter().enumerate() {
        let (t1, t2) = (0.37 * (k + 1) as f64 * tau, 1.9 * tau);
        let one = eig.propagate(psi, t1 + t2)?;
        let two = eig.propagate(&eig.propagate(psi, t1)?, t2)?;
        norm_err = norm_err.max((one.norm() - 1.0).abs());
        comp_err = comp_err.max(one.amplitudes().iter().zip(two.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    check("propagation unitarity", norm_err < 1e-12, format!("max |norm - 1| {norm_err:.2e}"));
    check("propagator composition", comp_err < 1e-11, format!("max deviation {comp_err:.2e}"));

    let model = InterferometryModel::new(params, 6, true)?;
    let mut iso_err = 0.0f64;
    let mut fast_err = 0.0f64;
    for (tp, tw, td) in [(0.9, 0.5, 1.1), (0.3, 0.8, 1.7), (1.6, 0.2, 0.4)] {
        let s = Schedule { strength: 0.2, ..Schedule::from_periods(tp, tw, td, params) };
        let direct = model.interference_term(&s)?;
        iso_err = iso_err.max((direct - isolate_from_model(&model, &s)?).norm());
        fast_err = fast_err.max((direct - model.signal(&s, s.t_p, s.t_d)?).norm() / direct.norm().max(1e-300));
    }
    check("phase-cycling isolation", iso_err < 1e-10, format!("max deviation {iso_err:.2e}"));
    check("fast signal path", fast_err < 1e-10, format!("max relative deviation {fast_err:.2e}"));

    let (a, b) = semiclassical_match(0.5, 0, 1, params);
    let sc_ok = (a / tau - 0.75).abs() < 1e-12 && (b / tau - 1.25).abs() < 1e-12;
    check("semiclassical closed form", sc_ok, format!("({:.6}, {:.6}) tau", a / tau, b / tau));
    Ok((ok, lines))
}
