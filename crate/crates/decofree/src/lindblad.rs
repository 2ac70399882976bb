//! Lindblad generators: time-dependent Hamiltonians, thermal dissipators,
//! the master-equation right-hand side, dense vectorized Liouvillians, and
//! steady-state extraction via null-space solves.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{Matrix, Operator, Vector};

const I: C64 = C64::new(0.0, 1.0);

/// One rotating term: amplitude · e^{i·frequency·t} · base, optionally plus
/// its Hermitian conjugate.
#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub base: Operator,
    pub amplitude: C64,
    pub frequency: f64,
    pub add_conjugate: bool,
}

impl HamiltonianTerm {
    pub fn static_hermitian(base: Operator, amplitude: f64) -> Self {
        Self { base, amplitude: C64::new(amplitude, 0.0), frequency: 0.0, add_conjugate: false }
    }

    pub fn rotating(base: Operator, amplitude: C64, frequency: f64) -> Self {
        Self { base, amplitude, frequency, add_conjugate: true }
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    dim: usize,
    terms: Vec<HamiltonianTerm>,
}

impl HamiltonianSpec {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn push(&mut self, term: HamiltonianTerm) -> Result<()> {
        if term.base.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian term dim {} != spec dim {}",
                term.base.dim(),
                self.dim
            )));
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.frequency == 0.0)
    }

    /// Assemble H(t).
    pub fn at(&self, t: f64) -> Operator {
        let mut h = Matrix::zeros(self.dim, self.dim);
        for term in &self.terms {
            let phase = term.amplitude * C64::from_polar(1.0, term.frequency * t);
            h += term.base.matrix() * phase;
            if term.add_conjugate {
                h += (term.base.matrix() * phase).adjoint();
            }
        }
        Operator::from_matrix(h)
    }
}

/// A collapse operator with its rate (units of γ). C†C is precomputed.
#[derive(Debug, Clone)]
pub struct Dissipator {
    collapse: Operator,
    rate: f64,
    cdag_c: Operator,
}

impl Dissipator {
    pub fn new(collapse: Operator, rate: f64) -> Result<Self> {
        if rate < 0.0 || !rate.is_finite() {
            return Err(Error::InvalidInput(format!("dissipator rate must be >= 0, got {rate}")));
        }
        let cdag_c = &collapse.dagger() * &collapse;
        Ok(Self { collapse, rate, cdag_c })
    }

    pub fn collapse(&self) -> &Operator {
        &self.collapse
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Split a thermal channel into its downward and upward parts:
/// (C, rate·(n̄+1)) and (C†, rate·n̄).
pub fn thermal_dissipator_pair(c: &Operator, rate: f64, nbar: f64) -> Result<Vec<Dissipator>> {
    if nbar < 0.0 || !nbar.is_finite() {
        return Err(Error::InvalidInput(format!("nbar must be >= 0, got {nbar}")));
    }
    let mut out = vec![Dissipator::new(c.clone(), rate * (nbar + 1.0))?];
    if nbar > 0.0 {
        out.push(Dissipator::new(c.dagger(), rate * nbar)?);
    }
    Ok(out)
}

/// Hamiltonian plus dissipators on one Hilbert space; defines dρ/dt.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: HamiltonianSpec,
    dissipators: Vec<Dissipator>,
    dim: usize,
}

impl LindbladModel {
    pub fn new(hamiltonian: HamiltonianSpec, dissipators: Vec<Dissipator>) -> Result<Self> {
        let dim = hamiltonian.dim();
        for d in &dissipators {
            if d.collapse.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "collapse operator dim {} != model dim {dim}",
                    d.collapse.dim()
                )));
            }
        }
        Ok(Self { hamiltonian, dissipators, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &HamiltonianSpec {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    pub fn is_static(&self) -> bool {
        self.hamiltonian.is_static()
    }
}

/// Anything that can supply dρ/dt. Implemented by [`LindbladModel`] and by
/// frame-transformed views of it.
pub trait Generator {
    fn dim(&self) -> usize;
    fn rhs(&self, rho: &Operator, t: f64) -> Result<Operator>;

    /// Upper bound on the generator's spectral radius, used by the
    /// integrator to cap the step at the explicit-stability limit. Infinite
    /// when no bound is known.
    fn stability_bound(&self) -> f64 {
        f64::INFINITY
    }
}

fn spectral_norm(op: &Operator) -> f64 {
    op.matrix().clone().svd(false, false).singular_values.max()
}

impl Generator for LindbladModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, rho: &Operator, t: f64) -> Result<Operator> {
        lindblad_rhs(self, rho, t)
    }

    /// 2‖H‖ + 2 Σ rate·‖C‖² bounds the Liouvillian spectral radius; term
    /// norms are amplitude-weighted so rotating phases drop out.
    fn stability_bound(&self) -> f64 {
        let h: f64 = self
            .hamiltonian
            .terms()
            .iter()
            .map(|term| {
                let factor = if term.add_conjugate { 2.0 } else { 1.0 };
                factor * term.amplitude.norm() * spectral_norm(&term.base)
            })
            .sum();
        let d: f64 = self
            .dissipators
            .iter()
            .map(|di| di.rate() * spectral_norm(di.collapse()).powi(2))
            .sum();
        2.0 * h + 2.0 * d
    }
}

/// −i[H(t),ρ] + Σ_k (rate_k/2)(2 C_k ρ C_k† − C_k†C_k ρ − ρ C_k†C_k)
pub fn lindblad_rhs(model: &LindbladModel, rho: &Operator, t: f64) -> Result<Operator> {
    if rho.dim() != model.dim {
        return Err(Error::DimensionMismatch(format!(
            "rho dim {} != model dim {}",
            rho.dim(),
            model.dim
        )));
    }
    // strictly linear in rho: forming the Hermitian-conjugate halves from
    // rho's adjoint would couple the state to its own conjugate, which turns
    // stray non-Hermitian rounding noise into a parametrically amplified
    // mode under a rotating Hamiltonian
    let h = model.hamiltonian.at(t);
    let mut out: Matrix = (h.matrix() * rho.matrix() - rho.matrix() * h.matrix()) * (-I);
    for d in &model.dissipators {
        if d.rate == 0.0 {
            continue;
        }
        let half_rate = C64::new(0.5 * d.rate, 0.0);
        let c_rho = d.collapse.matrix() * rho.matrix();
        out += (&c_rho * d.collapse.matrix().adjoint()) * (half_rate * 2.0);
        out -= (d.cdag_c.matrix() * rho.matrix() + rho.matrix() * d.cdag_c.matrix()) * half_rate;
    }
    Ok(Operator::from_matrix(out))
}

/// Column-stacked vectorization: v[j·dim + i] = X[i, j].
pub fn vec_col(op: &Operator) -> Vector {
    let d = op.dim();
    Vector::from_fn(d * d, |k, _| op.get(k % d, k / d))
}

pub fn unvec_col(v: &Vector, dim: usize) -> Operator {
    assert_eq!(v.len(), dim * dim);
    Operator::from_matrix(Matrix::from_fn(dim, dim, |i, j| v[j * dim + i]))
}

/// Hard cap on dense superoperator construction.
pub const LIOUVILLIAN_DIM_CAP: usize = 256;

/// Dense superoperator L with L·vec(ρ) = vec(lindblad_rhs(ρ, t)) under
/// column stacking: vec(AXB) = (Bᵀ ⊗ A) vec(X).
pub fn liouvillian_matrix(model: &LindbladModel, t: f64) -> Result<Operator> {
    let d = model.dim;
    if d > LIOUVILLIAN_DIM_CAP {
        return Err(Error::ResourceCap { dim: d, cap: LIOUVILLIAN_DIM_CAP });
    }
    let id = Matrix::identity(d, d);
    let h = model.hamiltonian.at(t);
    let mut l: Matrix = (id.kronecker(h.matrix()) - h.matrix().transpose().kronecker(&id)) * (-I);
    for dis in &model.dissipators {
        if dis.rate == 0.0 {
            continue;
        }
        let half_rate = C64::new(0.5 * dis.rate, 0.0);
        let c = dis.collapse.matrix();
        let cc = dis.cdag_c.matrix();
        l += c.conjugate().kronecker(c) * (half_rate * 2.0);
        l -= id.kronecker(cc) * half_rate;
        l -= cc.transpose().kronecker(&id) * half_rate;
    }
    Ok(Operator::from_matrix(l))
}

/// Relative singular-value threshold below which null directions count.
pub const NULL_SPACE_TOL: f64 = 1e-10;

/// Unique steady state of a time-independent model, from the null space of
/// the vectorized Liouvillian.
pub fn steady_state(model: &LindbladModel) -> Result<Operator> {
    if !model.is_static() {
        return Err(Error::TimeDependent);
    }
    let l = liouvillian_matrix(model, 0.0)?;
    let svd = l.matrix().clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd requested v_t");
    let smax = svd.singular_values.max();
    let tol = NULL_SPACE_TOL * smax.max(1e-300);
    let null_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] < tol)
        .collect();
    if null_rows.len() != 1 {
        return Err(Error::NonUniqueSteadyState(null_rows.len()));
    }
    let null_vec: Vector = v_t.row(null_rows[0]).adjoint();
    let rho = unvec_col(&null_vec, model.dim);
    let rho = rho.hermitize();
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::Domain("null-space candidate has vanishing trace".into()));
    }
    let rho = rho.scale(C64::new(1.0, 0.0) / tr);
    let residual = lindblad_rhs(model, &rho, 0.0)?.max_abs();
    let scale = l.max_abs().max(1.0);
    if residual > NULL_SPACE_TOL * scale {
        return Err(Error::Domain(format!(
            "steady-state residual {residual:.3e} exceeds {:.3e}",
            NULL_SPACE_TOL * scale
        )));
    }
    Ok(rho)
}

/// Number of numerically-null singular directions of L(0); 1 means a unique
/// steady state.
pub fn null_space_dimension(model: &LindbladModel) -> Result<usize> {
    let l = liouvillian_matrix(model, 0.0)?;
    let svd = l.matrix().clone().svd(false, false);
    let smax = svd.singular_values.max();
    let tol = NULL_SPACE_TOL * smax.max(1e-300);
    Ok((0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] < tol).count())
}

/// View of a model in the rotating frame ρ̃ = R†ρR: collapse operators map
/// C → R†CR and the Hamiltonian gains −iR†Ṙ.
pub struct RotatingFrame<'a, R, Rd>
where
    R: Fn(f64) -> Operator,
    Rd: Fn(f64) -> Operator,
{
    base: &'a LindbladModel,
    r: R,
    rdot: Rd,
}

impl<'a, R, Rd> RotatingFrame<'a, R, Rd>
where
    R: Fn(f64) -> Operator,
    Rd: Fn(f64) -> Operator,
{
    pub fn new(base: &'a LindbladModel, r: R, rdot: Rd) -> Self {
        Self { base, r, rdot }
    }

    /// Effective Hamiltonian and collapse set at time t.
    fn transformed(&self, t: f64) -> Result<(Operator, Vec<(Operator, f64)>)> {
        let r = (self.r)(t);
        if r.dim() != self.base.dim() {
            return Err(Error::DimensionMismatch("frame operator dim != model dim".into()));
        }
        let unit_res = (&(&r * &r.dagger()) - &Operator::identity(r.dim())).max_abs();
        if unit_res > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "frame operator is not unitary at t = {t}: residual {unit_res:.3e}"
            )));
        }
        let rd = (self.rdot)(t);
        let rdag = r.dagger();
        let h0 = self.base.hamiltonian().at(t);
        let h = &(&rdag * &(&h0 * &r)) - &(&rdag * &rd).scale(I);
        let collapses = self
            .base
            .dissipators()
            .iter()
            .map(|d| (&rdag * &(d.collapse() * &r), d.rate()))
            .collect();
        Ok((h.hermitize(), collapses))
    }
}

impl<R, Rd> Generator for RotatingFrame<'_, R, Rd>
where
    R: Fn(f64) -> Operator,
    Rd: Fn(f64) -> Operator,
{
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn rhs(&self, rho: &Operator, t: f64) -> Result<Operator> {
        let (h, collapses) = self.transformed(t)?;
        let hr = h.matrix() * rho.matrix();
        let mut out: Matrix = (&hr - hr.adjoint()) * (-I);
        for (c, rate) in &collapses {
            if *rate == 0.0 {
                continue;
            }
            let half_rate = C64::new(0.5 * rate, 0.0);
            let c_rho = c.matrix() * rho.matrix();
            out += (&c_rho * c.matrix().adjoint()) * (half_rate * 2.0);
            let cc = c.matrix().adjoint() * c.matrix();
            let n_rho = &cc * rho.matrix();
            out -= (&n_rho + n_rho.adjoint()) * half_rate;
        }
        Ok(Operator::from_matrix(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{annihilation, atomic_projector, number_operator, Level, StateVector};
    use crate::test_util::{random_density, random_hermitian, rng, C};

    fn damped_cavity(fock_dim: usize, kappa: f64, nbar: f64) -> LindbladModel {
        let a = annihilation(fock_dim).unwrap();
        let h = HamiltonianSpec::new(fock_dim);
        LindbladModel::new(h, thermal_dissipator_pair(&a, kappa, nbar).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_is_dark() {
        let model = damped_cavity(4, 1.0, 0.0);
        let vac = StateVector::basis(4, 0).projector();
        assert!(lindblad_rhs(&model, &vac, 0.0).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn single_photon_decay_rate() {
        // d⟨a†a⟩/dt = -κ for ρ = |1⟩⟨1|
        let kappa = 0.7;
        let model = damped_cavity(4, kappa, 0.0);
        let one = StateVector::basis(4, 1).projector();
        let rhs = lindblad_rhs(&model, &one, 0.0).unwrap();
        let n = number_operator(4).unwrap();
        let dn = rhs.trace_product(&n);
        assert!((dn.re + kappa).abs() < 1e-13);
        assert!(dn.im.abs() < 1e-13);
    }

    #[test]
    fn rhs_is_traceless_and_hermiticity_preserving() {
        let mut r = rng(23);
        let model = damped_cavity(6, 1.3, 0.2);
        for _ in 0..10 {
            let rho = random_hermitian(&mut r, 6);
            let out = lindblad_rhs(&model, &rho, 0.3).unwrap();
            assert!(out.trace().norm() < 1e-12);
            assert!(out.herm_residual() < 1e-12);
        }
    }

    #[test]
    fn thermal_pair_rates() {
        let a = annihilation(3).unwrap();
        let at_zero = thermal_dissipator_pair(&a, 2.0, 0.0).unwrap();
        assert_eq!(at_zero.len(), 1);
        assert!((at_zero[0].rate() - 2.0).abs() < 1e-15);

        let kappa = 3.0;
        let pair = thermal_dissipator_pair(&a, kappa, 0.1).unwrap();
        assert_eq!(pair.len(), 2);
        assert!((pair[0].rate() - 1.1 * kappa).abs() < 1e-12);
        assert!((pair[1].rate() - 0.1 * kappa).abs() < 1e-12);

        let sge = atomic_projector(Level::G, Level::E);
        let pair = thermal_dissipator_pair(&sge, 1.0, 0.01).unwrap();
        assert!((pair[0].rate() - 1.01).abs() < 1e-12);
        assert!((pair[1].rate() - 0.01).abs() < 1e-12);
        assert!((pair[1].collapse() - &sge.dagger()).max_abs() < 1e-15);

        assert!(thermal_dissipator_pair(&a, 1.0, -0.1).is_err());
    }

    #[test]
    fn liouvillian_matches_rhs_on_random_states() {
        let mut r = rng(29);
        let a = annihilation(3).unwrap();
        let mut h = HamiltonianSpec::new(6);
        h.push(HamiltonianTerm::static_hermitian(
            crate::operator::tensor(&number_operator(3).unwrap(), &Operator::identity(2)),
            0.8,
        ))
        .unwrap();
        h.push(HamiltonianTerm::rotating(
            crate::operator::tensor(&a, &atomic_projector(Level::E, Level::G)),
            C(0.3, 0.1),
            0.0,
        ))
        .unwrap();
        let model = LindbladModel::new(
            h,
            thermal_dissipator_pair(
                &crate::operator::tensor(&a, &Operator::identity(2)),
                1.1,
                0.05,
            )
            .unwrap(),
        )
        .unwrap();
        let l = liouvillian_matrix(&model, 0.0).unwrap();
        for _ in 0..8 {
            let rho = random_density(&mut r, 6);
            let lhs = l.matrix() * vec_col(&rho);
            let rhs = vec_col(&lindblad_rhs(&model, &rho, 0.0).unwrap());
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn trace_row_is_left_null_vector() {
        let model = damped_cavity(4, 1.0, 0.1);
        let l = liouvillian_matrix(&model, 0.0).unwrap();
        let id_vec = vec_col(&Operator::identity(4));
        let left = l.matrix().adjoint() * id_vec;
        assert!(left.norm() < 1e-12);
    }

    #[test]
    fn damped_cavity_has_unique_steady_state() {
        let model = damped_cavity(5, 1.0, 0.0);
        assert_eq!(null_space_dimension(&model).unwrap(), 1);
        let ss = steady_state(&model).unwrap();
        let vac = StateVector::basis(5, 0).projector();
        assert!((&ss - &vac).max_abs() < 1e-10);
    }

    #[test]
    fn thermal_steady_state_matches_bose_einstein() {
        // independent oracle: geometric Bose-Einstein diagonal, truncated
        let nbar: f64 = 0.1;
        let n = 20;
        let model = damped_cavity(n, 1.0, nbar);
        let ss = steady_state(&model).unwrap();
        let ratio = nbar / (nbar + 1.0);
        let norm: f64 = (0..n).map(|k| ratio.powi(k as i32)).sum();
        for k in 0..n {
            let expect = ratio.powi(k as i32) / norm;
            assert!((ss.get(k, k).re - expect).abs() < 1e-10, "diagonal {k}");
        }
        let mean_n = ss.trace_product(&number_operator(n).unwrap()).re;
        let oracle: f64 = (0..n).map(|k| k as f64 * ratio.powi(k as i32) / norm).sum();
        assert!((mean_n - oracle).abs() < 1e-10);
        assert!((mean_n - nbar).abs() < 1e-8);
        // detailed balance as an absolute residual: populations below the
        // numerical floor of the null-space solve carry no relative accuracy
        for k in 0..n - 1 {
            let resid = (ss.get(k + 1, k + 1).re - ratio * ss.get(k, k).re).abs();
            assert!(resid < 1e-12, "detailed balance at {k}: {resid:.3e}");
        }
    }

    #[test]
    fn engineered_dissipator_steady_state_is_plus() {
        let (plus, minus) = crate::operator::dressed_states(0.3, 0.2).unwrap();
        let sigma_pm = plus.outer(&minus);
        let model =
            LindbladModel::new(HamiltonianSpec::new(2), vec![Dissipator::new(sigma_pm, 2.0).unwrap()])
                .unwrap();
        let ss = steady_state(&model).unwrap();
        assert!((&ss - &plus.projector()).max_abs() < 1e-10);
    }

    #[test]
    fn steady_state_rejects_time_dependent_models() {
        let a = annihilation(3).unwrap();
        let mut h = HamiltonianSpec::new(3);
        h.push(HamiltonianTerm::rotating(a.clone(), C(0.1, 0.0), 2.0)).unwrap();
        let model = LindbladModel::new(h, vec![Dissipator::new(a, 1.0).unwrap()]).unwrap();
        assert!(matches!(steady_state(&model), Err(Error::TimeDependent)));
    }

    #[test]
    fn steady_state_reports_degeneracy() {
        // no dissipation at all: every density operator commuting with H=0
        // is steady, so the null space is the whole space
        let model = LindbladModel::new(HamiltonianSpec::new(2), vec![]).unwrap();
        match steady_state(&model) {
            Err(Error::NonUniqueSteadyState(d)) => assert!(d > 1),
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn liouvillian_cap() {
        let model = damped_cavity(40, 1.0, 0.0);
        let a = annihilation(300).unwrap();
        let big = LindbladModel::new(
            HamiltonianSpec::new(300),
            vec![Dissipator::new(a, 1.0).unwrap()],
        )
        .unwrap();
        assert!(liouvillian_matrix(&model, 0.0).is_ok());
        assert!(matches!(liouvillian_matrix(&big, 0.0), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn identity_frame_leaves_generator_unchanged() {
        let mut r = rng(31);
        let model = damped_cavity(4, 1.0, 0.1);
        let frame = RotatingFrame::new(&model, |_| Operator::identity(4), |_| Operator::zeros(4));
        for _ in 0..5 {
            let rho = random_density(&mut r, 4);
            let direct = lindblad_rhs(&model, &rho, 0.2).unwrap();
            let framed = frame.rhs(&rho, 0.2).unwrap();
            assert!((&direct - &framed).max_abs() < 1e-12);
        }
    }

    #[test]
    fn static_phase_frame_preserves_populations() {
        // R = e^{-iθσ_z/2}: σ_ge only acquires a phase, population dynamics
        // identical
        let sge = atomic_projector(Level::G, Level::E);
        let model = LindbladModel::new(
            HamiltonianSpec::new(2),
            vec![Dissipator::new(sge, 1.0).unwrap()],
        )
        .unwrap();
        let theta = 0.9;
        let r_op = {
            let mut m = crate::operator::Matrix::zeros(2, 2);
            m[(0, 0)] = C64::from_polar(1.0, theta / 2.0);
            m[(1, 1)] = C64::from_polar(1.0, -theta / 2.0);
            Operator::from_matrix(m)
        };
        let frame = RotatingFrame::new(&model, move |_| r_op.clone(), |_| Operator::zeros(2));
        let mut r = rng(37);
        for _ in 0..5 {
            let rho = random_density(&mut r, 2);
            let direct = lindblad_rhs(&model, &rho, 0.0).unwrap();
            let framed = frame.rhs(&rho, 0.0).unwrap();
            for i in 0..2 {
                assert!((direct.get(i, i) - framed.get(i, i)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn non_unitary_frame_is_rejected() {
        let model = damped_cavity(3, 1.0, 0.0);
        let frame = RotatingFrame::new(
            &model,
            |_| Operator::identity(3).scale(C(1.5, 0.0)),
            |_| Operator::zeros(3),
        );
        let rho = StateVector::basis(3, 0).projector();
        assert!(frame.rhs(&rho, 0.0).is_err());
    }
}
