//! Fidelity computation, full-vs-effective comparison, steady-value
//! extraction, and parameter scans.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::{evolve, Tolerances};
use crate::ion_cavity::{
    build_effective_model, build_full_model, derive_dressed, mean_photon_operator,
    thermal_cavity_state, IonCavityParams,
};
use crate::operator::{
    partial_trace_field, protected_state, tensor, DensityDiagnostics, Level, Operator, StateVector,
};

/// Which master equation to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Full,
    Effective,
}

/// Initial atomic state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialAtom {
    Ground,
    Excited,
    Plus,
}

/// Per-sample record of one scenario run. The states are reduced atomic
/// density matrices regardless of the model kind.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
    pub fidelities: Vec<f64>,
    pub trace_errors: Vec<f64>,
    pub purities: Vec<f64>,
    pub mean_photons: Vec<f64>,
    /// Diagnostics of the evolved state (the bipartite state for full runs).
    pub diagnostics: Vec<DensityDiagnostics>,
}

/// F = ⟨ket|ρ|ket⟩, clamped to [0, 1] after a −1e−9 tolerance.
pub fn fidelity(rho_at: &Operator, ket: &StateVector) -> Result<f64> {
    if rho_at.dim() != ket.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity: rho dim {} != ket dim {}",
            rho_at.dim(),
            ket.dim()
        )));
    }
    if rho_at.herm_residual() > 1e-7 {
        return Err(Error::InvalidInput(format!(
            "fidelity: rho is not Hermitian (residual {:.3e})",
            rho_at.herm_residual()
        )));
    }
    let bra = ket.amplitudes().adjoint();
    let f = (&bra * rho_at.matrix() * ket.amplitudes())[(0, 0)];
    let f = f.re;
    if f < -1e-9 || f > 1.0 + 1e-9 {
        return Err(Error::Domain(format!("fidelity {f} outside [0,1] beyond tolerance")));
    }
    Ok(f.clamp(0.0, 1.0))
}

fn atom_ket(initial: InitialAtom, p: &IonCavityParams) -> Result<StateVector> {
    Ok(match initial {
        InitialAtom::Ground => StateVector::basis(2, Level::G.index()),
        InitialAtom::Excited => StateVector::basis(2, Level::E.index()),
        InitialAtom::Plus => derive_dressed(p)?.plus,
    })
}

/// Integrate one scenario and reduce it to atomic quantities per sample.
///
/// Full runs start from the thermal cavity state at n̄_a (vacuum at zero
/// temperature) and score against the rotating protected ket |+(t)⟩ with
/// Φ(t) = φ_c − Δ_c t; effective runs live in the frame where the target
/// |+⟩ is static, so the two fidelity series are directly comparable.
pub fn run_scenario(
    p: &IonCavityParams,
    kind: ModelKind,
    initial: InitialAtom,
    t_max: f64,
    dt_out: f64,
    tol: Tolerances,
) -> Result<Trajectory> {
    p.validate()?;
    if t_max <= 0.0 || dt_out <= 0.0 || dt_out > t_max {
        return Err(Error::InvalidInput(format!(
            "need 0 < dt_out <= t_max, got dt_out = {dt_out}, t_max = {t_max}"
        )));
    }
    let n_samples = (t_max / dt_out).round() as usize;
    let grid: Vec<f64> = (0..=n_samples).map(|k| t_max * k as f64 / n_samples as f64).collect();
    let atom0 = atom_ket(initial, p)?.projector();

    match kind {
        ModelKind::Full => {
            let layout = p.layout()?;
            let model = build_full_model(p)?;
            let chi = derive_dressed(p).map(|b| b.chi).unwrap_or(0.0);
            let rho0 = tensor(&thermal_cavity_state(p.nbar_a, layout.fock_dim())?, &atom0);
            let evo = evolve(&model, &rho0, &grid, tol)?;
            let n_op = mean_photon_operator(layout.fock_dim())?;
            let mut traj = Trajectory {
                times: evo.times.clone(),
                states: Vec::with_capacity(evo.states.len()),
                fidelities: Vec::with_capacity(evo.states.len()),
                trace_errors: evo.trace_errors.clone(),
                purities: Vec::with_capacity(evo.states.len()),
                mean_photons: Vec::with_capacity(evo.states.len()),
                diagnostics: Vec::with_capacity(evo.states.len()),
            };
            for (t, s) in evo.times.iter().zip(&evo.states) {
                traj.diagnostics.push(s.density_diagnostics());
                let red = partial_trace_field(s, &layout)?;
                let target = protected_state(*t, p.phi_c, p.delta_c, chi);
                traj.fidelities.push(fidelity(&red, &target)?);
                traj.purities.push(red.purity());
                traj.mean_photons.push(s.trace_product(&n_op).re);
                traj.states.push(red);
            }
            Ok(traj)
        }
        ModelKind::Effective => {
            let basis = derive_dressed(p)?;
            let model = build_effective_model(p, &basis)?;
            let evo = evolve(&model, &atom0, &grid, tol)?;
            let target = basis.plus;
            let mut traj = Trajectory {
                times: evo.times.clone(),
                states: Vec::with_capacity(evo.states.len()),
                fidelities: Vec::with_capacity(evo.states.len()),
                trace_errors: evo.trace_errors.clone(),
                purities: Vec::with_capacity(evo.states.len()),
                mean_photons: vec![0.0; evo.states.len()],
                diagnostics: Vec::with_capacity(evo.states.len()),
            };
            for s in &evo.states {
                traj.diagnostics.push(s.density_diagnostics());
                traj.fidelities.push(fidelity(s, &target)?);
                traj.purities.push(s.purity());
                traj.states.push(s.clone());
            }
            Ok(traj)
        }
    }
}

/// Steady-window statistics of a fidelity trajectory: mean over the final
/// window plus the window's standard deviation as a convergence diagnostic.
///
/// Window: T_w = max(2π/|Δ_c|, 1/Γ_eng) when Δ_c ≠ 0, else 1/Γ_eng; the
/// trajectory must span at least 10/Γ_eng. When Γ_eng = 0 (no engineered
/// reservoir) the fallback scale is the natural decay: span ≥ 2/γ and
/// T_w = 1/γ.
pub fn steady_value(traj: &Trajectory, p: &IonCavityParams) -> Result<(f64, f64)> {
    let gamma_eng = derive_dressed(p).map(|b| b.gamma_eng).unwrap_or(0.0);
    let (required, window) = if gamma_eng > 0.0 {
        let w = if p.delta_c != 0.0 {
            (2.0 * std::f64::consts::PI / p.delta_c.abs()).max(1.0 / gamma_eng)
        } else {
            1.0 / gamma_eng
        };
        (10.0 / gamma_eng, w)
    } else {
        let g = if p.gamma > 0.0 { p.gamma } else { 1.0 };
        (2.0 / g, 1.0 / g)
    };
    let t_max = *traj.times.last().ok_or_else(|| Error::InvalidInput("empty trajectory".into()))?;
    let span = t_max - traj.times[0];
    if span < required {
        return Err(Error::TrajectoryTooShort { span, required });
    }
    let t_start = t_max - window;
    let vals: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.fidelities)
        .filter(|(t, _)| **t >= t_start)
        .map(|(_, f)| *f)
        .collect();
    if vals.is_empty() {
        return Err(Error::InvalidInput("steady window contains no samples".into()));
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
    Ok((mean, var.sqrt()))
}

/// Outcome of running the full and the effective model side by side.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub steady_fidelity_full: f64,
    pub steady_fidelity_effective: f64,
    pub max_fidelity_gap_after_transient: f64,
    pub steady_trace_distance: f64,
    /// Γ_eng = 0: the effective model is degenerate and nothing is compared.
    pub degenerate: bool,
}

/// Run both model kinds from the atomic ground state and quantify the
/// approximation error of the reduced model.
pub fn compare_full_vs_effective(
    p: &IonCavityParams,
    t_max: f64,
    dt_out: f64,
    tol: Tolerances,
) -> Result<ComparisonReport> {
    let basis = derive_dressed(p)?;
    if basis.gamma_eng == 0.0 {
        return Ok(ComparisonReport {
            steady_fidelity_full: f64::NAN,
            steady_fidelity_effective: f64::NAN,
            max_fidelity_gap_after_transient: f64::NAN,
            steady_trace_distance: f64::NAN,
            degenerate: true,
        });
    }
    let (full, eff) = rayon::join(
        || run_scenario(p, ModelKind::Full, InitialAtom::Ground, t_max, dt_out, tol),
        || run_scenario(p, ModelKind::Effective, InitialAtom::Ground, t_max, dt_out, tol),
    );
    let full = full?;
    let eff = eff?;
    let transient = 10.0 / basis.gamma_eng;
    let mut max_gap: f64 = 0.0;
    for ((t, ff), fe) in full.times.iter().zip(&full.fidelities).zip(&eff.fidelities) {
        if *t >= transient {
            max_gap = max_gap.max((ff - fe).abs());
        }
    }
    // the effective steady state is static while the full state co-rotates
    // with the target; undo the rotation before taking the trace distance
    let last = full.times.len() - 1;
    let t_end = full.times[last];
    let rotated = corotate(&eff.states[last], p.delta_c, t_end);
    let dist = full.states[last].trace_distance(&rotated);
    let (sf, _) = steady_value(&full, p)?;
    let (se, _) = steady_value(&eff, p)?;
    Ok(ComparisonReport {
        steady_fidelity_full: sf,
        steady_fidelity_effective: se,
        max_fidelity_gap_after_transient: max_gap,
        steady_trace_distance: dist,
        degenerate: false,
    })
}

/// Map a state from the frame where |+⟩ is static to the picture where the
/// protected ket carries the phase Φ(t) = φ_c − Δ_c t.
fn corotate(rho: &Operator, delta_c: f64, t: f64) -> Operator {
    use num_complex::Complex64 as C64;
    let mut m = crate::operator::Matrix::zeros(2, 2);
    m[(Level::G.index(), Level::G.index())] = C64::from_polar(1.0, delta_c * t / 2.0);
    m[(Level::E.index(), Level::E.index())] = C64::from_polar(1.0, -delta_c * t / 2.0);
    let w = Operator::from_matrix(m);
    &w * &(rho * &w.dagger())
}

/// Result of a one-dimensional parameter scan.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub axis: Vec<f64>,
    pub steady_fidelities: Vec<f64>,
    pub steady_deviations: Vec<f64>,
    /// Strictly decreasing along the axis (the expected thermal ordering).
    pub strictly_decreasing: bool,
    /// Non-decreasing along the axis (the expected coupling ordering).
    pub non_decreasing: bool,
    pub base_params: IonCavityParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    Nbar,
    Coupling,
    DeltaC,
}

/// Scan one parameter; runs are dispatched concurrently and assembled in
/// axis order.
pub fn scan_axis(
    p: &IonCavityParams,
    axis: ScanAxis,
    values: &[f64],
    t_max: f64,
    dt_out: f64,
    tol: Tolerances,
) -> Result<ScanResult> {
    if values.is_empty() {
        return Err(Error::InvalidInput("scan values list is empty".into()));
    }
    let runs: Vec<Result<(f64, f64)>> = values
        .par_iter()
        .map(|&v| {
            let mut q = *p;
            match axis {
                ScanAxis::Nbar => {
                    if v < 0.0 {
                        return Err(Error::InvalidInput(format!("nbar must be >= 0, got {v}")));
                    }
                    q.nbar_a = v;
                    q.nbar_s = v;
                }
                ScanAxis::Coupling => q.g = v,
                ScanAxis::DeltaC => q.delta_c = v,
            }
            let traj = run_scenario(&q, ModelKind::Full, InitialAtom::Ground, t_max, dt_out, tol)?;
            steady_value(&traj, &q)
        })
        .collect();
    let mut fid = Vec::with_capacity(values.len());
    let mut dev = Vec::with_capacity(values.len());
    for r in runs {
        let (f, d) = r?;
        fid.push(f);
        dev.push(d);
    }
    let strictly_decreasing = fid.windows(2).all(|w| w[1] < w[0]);
    let non_decreasing = fid.windows(2).all(|w| w[1] >= w[0]);
    Ok(ScanResult {
        axis: values.to_vec(),
        steady_fidelities: fid,
        steady_deviations: dev,
        strictly_decreasing,
        non_decreasing,
        base_params: *p,
    })
}

/// Thermal scan with n̄_a = n̄_s = n̄ swept together over the given values.
pub fn scan_nbar(
    p: &IonCavityParams,
    nbar_values: &[f64],
    t_max: f64,
    dt_out: f64,
    tol: Tolerances,
) -> Result<ScanResult> {
    if nbar_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("nbar values must be ascending".into()));
    }
    scan_axis(p, ScanAxis::Nbar, nbar_values, t_max, dt_out, tol)
}
