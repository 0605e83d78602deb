//! Entangled-pair protocol: photon A through medium A, photon B around a
//! cone loop in medium B, and the resulting phase factor Σ acting on the
//! degenerate two-dimensional subspace span{|01⟩, |10⟩}.

use crate::bloch::{make_cone_loop, FieldLoop, Orientation};
use crate::berry::dynamic_phase;
use crate::error::{Error, Result};
use crate::evolution::{
    default_n_steps, instantaneous_eigenstates, propagator_path, Hamiltonian, HamiltonianSchedule,
    PairSchedule, Trajectory,
};
use crate::linalg::{
    kron, kron_vector, pauli_x, CMatrix, CVector, PauliVector, StateVector, UnitaryOperator,
};
use crate::scalar::{Complex, Real};
use crate::tolerance;

fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Sign of the Bell state fed into the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum BellSign {
    #[default]
    Plus,
    Minus,
}

impl BellSign {
    pub fn sign<T: Real>(self) -> T {
        match self {
            BellSign::Plus => T::one(),
            BellSign::Minus => -T::one(),
        }
    }
}

/// `Φ± = (|01⟩ ± |10⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellBasis<T: Real> {
    pub phi_plus: StateVector<T, 4>,
    pub phi_minus: StateVector<T, 4>,
}

impl<T: Real> BellBasis<T> {
    pub fn new() -> Self {
        let h = T::FRAC_1_SQRT_2();
        let z = real(T::zero());
        let v = |s: T| StateVector::from_unit_unchecked(CVector([z, real(h), real(s * h), z]));
        BellBasis {
            phi_plus: v(T::one()),
            phi_minus: v(-T::one()),
        }
    }
}

impl<T: Real> Default for BellBasis<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Non-maximally entangled pair basis:
/// `φ+ = cos β e^{-iα}|01⟩ + sin β e^{iα}|10⟩`,
/// `φ- = sin β e^{-iα}|01⟩ - cos β e^{iα}|10⟩`, the orthogonal complement
/// of `φ+` within the degenerate subspace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralizedBasis<T: Real> {
    pub alpha: T,
    pub beta_mix: T,
    pub phi_plus: StateVector<T, 4>,
    pub phi_minus: StateVector<T, 4>,
}

impl<T: Real> GeneralizedBasis<T> {
    pub fn new(alpha: T, beta_mix: T) -> Self {
        let (s, c) = beta_mix.sin_cos();
        let em = Complex::from_polar(T::one(), -alpha);
        let ep = Complex::from_polar(T::one(), alpha);
        let z = real(T::zero());
        let plus = CVector([z, em * c, ep * s, z]);
        let minus = CVector([z, em * s, -(ep * c), z]);
        GeneralizedBasis {
            alpha,
            beta_mix,
            phi_plus: StateVector::from_unit_unchecked(plus),
            phi_minus: StateVector::from_unit_unchecked(minus),
        }
    }
}

/// Orthonormal basis of the degenerate subspace used for input states and
/// for the coordinates of Σ.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum PairBasis<T> {
    #[default]
    Bell,
    Generalized { alpha: T, beta_mix: T },
}

impl<T: Real> PairBasis<T> {
    /// `(φ+, φ-)`.
    pub fn vectors(&self) -> (StateVector<T, 4>, StateVector<T, 4>) {
        match *self {
            PairBasis::Bell => {
                let b = BellBasis::new();
                (b.phi_plus, b.phi_minus)
            }
            PairBasis::Generalized { alpha, beta_mix } => {
                let g = GeneralizedBasis::new(alpha, beta_mix);
                (g.phi_plus, g.phi_minus)
            }
        }
    }

    /// `(input, partner)` for the chosen sign.
    pub fn input_pair(&self, sign: BellSign) -> (StateVector<T, 4>, StateVector<T, 4>) {
        let (p, m) = self.vectors();
        match sign {
            BellSign::Plus => (p, m),
            BellSign::Minus => (m, p),
        }
    }

    pub fn tag(&self) -> BasisTag<T> {
        match *self {
            PairBasis::Bell => BasisTag::Bell,
            PairBasis::Generalized { alpha, beta_mix } => BasisTag::Generalized { alpha, beta_mix },
        }
    }

    /// Coordinates `(⟨φ+|v⟩, ⟨φ-|v⟩)`.
    pub fn coordinates(&self, v: &CVector<T, 4>) -> CVector<T, 2> {
        let (p, m) = self.vectors();
        CVector([p.vector().inner(v), m.vector().inner(v)])
    }
}

/// Which 2-basis of the degenerate subspace a Σ matrix refers to. `Psi` is
/// the product basis `ψ1 = |01⟩`, `ψ2 = |10⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisTag<T> {
    Bell,
    Psi,
    Generalized { alpha: T, beta_mix: T },
}

/// Unitary action of the protocol on degenerate-subspace coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseFactor<T: Real> {
    sigma: UnitaryOperator<T, 2>,
    basis: BasisTag<T>,
}

impl<T: Real> PhaseFactor<T> {
    pub fn new(sigma: CMatrix<T, 2>, basis: BasisTag<T>) -> Result<Self> {
        let sigma = UnitaryOperator::new(sigma)?;
        if basis == BasisTag::Psi && sigma.matrix().max_off_diagonal() > T::tol(tolerance::UNITARY) {
            return Err(Error::input("phase factor in the psi basis must be diagonal"));
        }
        Ok(PhaseFactor { sigma, basis })
    }

    pub fn sigma(&self) -> &UnitaryOperator<T, 2> {
        &self.sigma
    }

    pub fn matrix(&self) -> &CMatrix<T, 2> {
        self.sigma.matrix()
    }

    pub fn basis(&self) -> BasisTag<T> {
        self.basis
    }
}

/// `(ψ, Φ)` change of coordinates; its columns are Φ± in ψ coordinates.
fn hadamard<T: Real>() -> CMatrix<T, 2> {
    let h = real(T::FRAC_1_SQRT_2());
    CMatrix([[h, h], [h, -h]])
}

/// `Σ(Γ) = cos Γ·I - i sin Γ·X` in Bell coordinates.
pub fn sigma_of_gamma<T: Real>(gamma: T) -> PhaseFactor<T> {
    let (s, c) = gamma.sin_cos();
    let m = CMatrix::identity().scale(real(c)) + pauli_x().scale(cplx(T::zero(), -s));
    PhaseFactor {
        sigma: UnitaryOperator::from_unitary_unchecked(m),
        basis: BasisTag::Bell,
    }
}

/// `diag(e^{-iΓ}, e^{iΓ})` in ψ coordinates.
pub fn psi_phase_factor<T: Real>(gamma: T) -> PhaseFactor<T> {
    let m = CMatrix::from_diag([
        Complex::from_polar(T::one(), -gamma),
        Complex::from_polar(T::one(), gamma),
    ]);
    PhaseFactor {
        sigma: UnitaryOperator::from_unitary_unchecked(m),
        basis: BasisTag::Psi,
    }
}

/// Re-expresses a ψ-basis phase factor in Bell coordinates.
pub fn basis_change_bell<T: Real>(u_psi: &PhaseFactor<T>) -> Result<PhaseFactor<T>> {
    if u_psi.basis != BasisTag::Psi {
        return Err(Error::input("basis change expects a psi-basis phase factor"));
    }
    if u_psi.matrix().max_off_diagonal() > T::tol(tolerance::UNITARY) {
        return Err(Error::input("phase factor in the psi basis must be diagonal"));
    }
    let h = hadamard();
    let m = h * *u_psi.matrix() * h;
    Ok(PhaseFactor {
        sigma: UnitaryOperator::from_unitary_unchecked(m),
        basis: BasisTag::Bell,
    })
}

/// `(e^{-iΓ}|01⟩ ± e^{iΓ}|10⟩)/√2`.
pub fn predicted_final_state<T: Real>(gamma: T, sign: BellSign) -> StateVector<T, 4> {
    let h = T::FRAC_1_SQRT_2();
    let z = real(T::zero());
    let v = CVector([
        z,
        Complex::from_polar(h, -gamma),
        Complex::from_polar(h, gamma) * sign.sign::<T>(),
        z,
    ]);
    StateVector::from_unit_unchecked(v)
}

/// Multiplies the `|01⟩` amplitude by `e^{-iΓ}` and the `|10⟩` amplitude by
/// `e^{iΓ}`: the predicted image of any state in the degenerate subspace.
pub fn phased_state<T: Real>(state: &StateVector<T, 4>, gamma: T) -> StateVector<T, 4> {
    let mut v = *state.vector();
    v.0[1] = v.0[1] * Complex::from_polar(T::one(), -gamma);
    v.0[2] = v.0[2] * Complex::from_polar(T::one(), gamma);
    StateVector::from_unit_unchecked(v)
}

/// Largest commutator entry over all pairs of `Σ(Γ_i)`.
pub fn abelian_check<T: Real>(gammas: &[T]) -> Result<T> {
    if gammas.len() < 2 {
        return Err(Error::input("abelian check needs at least two phases"));
    }
    let sigmas: Vec<_> = gammas.iter().map(|&g| *sigma_of_gamma(g).matrix()).collect();
    let mut worst = T::zero();
    for i in 0..sigmas.len() {
        for j in i + 1..sigmas.len() {
            worst = worst.max(sigmas[i].commutator(&sigmas[j]).max_abs());
        }
    }
    Ok(worst)
}

/// `max |Σ(g1)Σ(g2) - Σ(g1+g2)|`.
pub fn composition_check<T: Real>(g1: T, g2: T) -> T {
    let prod = *sigma_of_gamma(g1).matrix() * *sigma_of_gamma(g2).matrix();
    prod.max_abs_diff(sigma_of_gamma(g1 + g2).matrix())
}

/// Max over the grid of `‖(H_A ⊗ I + I ⊗ H_B)|ψ(s)⟩‖`.
pub fn energy_zero_check<T: Real>(
    trajectory: &Trajectory<T, 4>,
    a: &HamiltonianSchedule<T>,
    b: &HamiltonianSchedule<T>,
) -> Result<T> {
    let pair = PairSchedule::new(a, b)?;
    Ok(max_energy_residual(trajectory, &pair))
}

fn max_energy_residual<T: Real>(trajectory: &Trajectory<T, 4>, pair: &PairSchedule<'_, T>) -> T {
    trajectory
        .states
        .iter()
        .zip(&trajectory.s_grid)
        .fold(T::zero(), |m, (psi, &s)| m.max((pair.matrix_at(s) * *psi).norm()))
}

/// Instantaneous zero-energy pair states `n-(A)⊗n+(B)` and `n+(A)⊗n-(B)`.
fn degenerate_frame<T: Real>(
    a: &PauliVector<T>,
    b: &PauliVector<T>,
) -> [CVector<T, 4>; 2] {
    let (am, ap) = instantaneous_eigenstates(a);
    let (bm, bp) = instantaneous_eigenstates(b);
    [
        kron_vector(am.vector(), bp.vector()),
        kron_vector(ap.vector(), bm.vector()),
    ]
}

/// Protocol settings; `new` fills the defaults (κ = 1, L = 400π, 10⁴ loop
/// samples, Φ+ input in the Bell basis, medium A static).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairProtocol<T> {
    /// Cone half-angle of medium B, radians.
    pub theta: T,
    pub kappa: T,
    pub length: T,
    pub n_samples: usize,
    /// `None` selects [`default_n_steps`].
    pub n_steps: Option<usize>,
    pub bell_sign: BellSign,
    /// Drive medium A around the reversed cone.
    pub counter_rotate_a: bool,
    pub basis: PairBasis<T>,
}

impl<T: Real> PairProtocol<T> {
    pub fn new(theta: T) -> Self {
        PairProtocol {
            theta,
            kappa: T::one(),
            length: T::lit(400.0 * std::f64::consts::PI),
            n_samples: 10_000,
            n_steps: None,
            bell_sign: BellSign::Plus,
            counter_rotate_a: false,
            basis: PairBasis::Bell,
        }
    }

    pub fn steps(&self) -> usize {
        self.n_steps.unwrap_or_else(|| default_n_steps(self.n_samples))
    }

    /// `π(1 - cos θ)`, doubled under counter-rotation.
    pub fn gamma(&self) -> T {
        let g = T::PI() * (T::one() - self.theta.cos());
        if self.counter_rotate_a {
            g + g
        } else {
            g
        }
    }

    /// `(medium A, medium B)`.
    pub fn schedules(&self) -> Result<(HamiltonianSchedule<T>, HamiltonianSchedule<T>)> {
        let loop_b = make_cone_loop(self.theta, self.n_samples, Orientation::Positive)?;
        let loop_a = if self.counter_rotate_a {
            make_cone_loop(self.theta, self.n_samples, Orientation::Negative)?
        } else {
            FieldLoop::constant(PauliVector::unit_z(), self.n_samples)
        };
        Ok((
            HamiltonianSchedule::new(loop_a, self.kappa, self.length)?,
            HamiltonianSchedule::new(loop_b, self.kappa, self.length)?,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolResult<T> {
    pub final_state: CVector<T, 4>,
    /// `Σ_ij = ⟨φ_i|U_A⊗U_B|φ_j⟩`, projected onto the basis pair, so it is
    /// unitary only up to leakage.
    pub sigma_estimated: CMatrix<T, 2>,
    pub sigma_basis: BasisTag<T>,
    pub gamma_used: T,
    /// `|⟨predicted|final⟩|²`.
    pub fidelity_eq4: T,
    /// `|⟨input|final⟩|`.
    pub overlap_initial: T,
    /// `|⟨partner|final⟩|`, the orthogonal basis state.
    pub overlap_partner: T,
    pub energy_residual_max: T,
    /// Max population outside the instantaneous zero-energy subspace.
    pub leakage_max: T,
    pub dynamical_phase: T,
    pub norm_drift: T,
}

/// A protocol run together with its pair trajectory and media.
#[derive(Clone, Debug)]
pub struct PairRun<T> {
    pub result: ProtocolResult<T>,
    pub trajectory: Trajectory<T, 4>,
    pub schedule_a: HamiltonianSchedule<T>,
    pub schedule_b: HamiltonianSchedule<T>,
}

pub fn run_pair_protocol<T: Real>(protocol: &PairProtocol<T>) -> Result<ProtocolResult<T>> {
    run_pair_protocol_detailed(protocol).map(|run| run.result)
}

pub fn run_pair_protocol_detailed<T: Real>(protocol: &PairProtocol<T>) -> Result<PairRun<T>> {
    let (schedule_a, schedule_b) = protocol.schedules()?;
    let pair = PairSchedule::new(&schedule_a, &schedule_b)?;
    let n_steps = protocol.steps();
    let path_a = propagator_path(&schedule_a, n_steps)?;
    let path_b = propagator_path(&schedule_b, n_steps)?;

    let (input, partner) = protocol.basis.input_pair(protocol.bell_sign);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut norm_drift = T::zero();
    let mut leakage_max = T::zero();
    for ((ua, ub), &s) in path_a.operators.iter().zip(&path_b.operators).zip(&path_a.s_grid) {
        let psi = kron(ua, ub) * *input.vector();
        let n2 = psi.norm_sqr();
        norm_drift = norm_drift.max((n2.sqrt() - T::one()).abs());
        let frame = degenerate_frame(&schedule_a.field_at(s), &schedule_b.field_at(s));
        let kept = frame[0].inner(&psi).norm_sqr() + frame[1].inner(&psi).norm_sqr();
        leakage_max = leakage_max.max(T::one() - kept / n2);
        states.push(psi);
    }
    if !(norm_drift <= T::lit(tolerance::NORM_DRIFT_MAX)) {
        return Err(Error::NumericalFailure {
            norm_drift: norm_drift.to_f64().unwrap_or(f64::NAN),
            limit: tolerance::NORM_DRIFT_MAX,
        });
    }
    if !(leakage_max <= T::lit(tolerance::LEAKAGE_MAX)) {
        return Err(Error::ProtocolViolation {
            leakage: leakage_max.to_f64().unwrap_or(f64::NAN),
        });
    }
    let trajectory = Trajectory {
        states,
        s_grid: path_a.s_grid.clone(),
        norm_drift,
    };

    let total = kron(path_a.last(), path_b.last());
    let (bp, bm) = protocol.basis.vectors();
    let cols = [
        protocol.basis.coordinates(&(total * *bp.vector())),
        protocol.basis.coordinates(&(total * *bm.vector())),
    ];
    let sigma_estimated = CMatrix::from_columns(cols);

    let gamma_used = protocol.gamma();
    let final_state = *trajectory.last();
    let predicted = phased_state(&input, gamma_used);
    let result = ProtocolResult {
        final_state,
        sigma_estimated,
        sigma_basis: protocol.basis.tag(),
        gamma_used,
        fidelity_eq4: predicted.vector().inner(&final_state).norm_sqr(),
        overlap_initial: input.vector().inner(&final_state).norm(),
        overlap_partner: partner.vector().inner(&final_state).norm(),
        energy_residual_max: max_energy_residual(&trajectory, &pair),
        leakage_max,
        dynamical_phase: dynamic_phase(&trajectory, &pair),
        norm_drift,
    };
    Ok(PairRun {
        result,
        trajectory,
        schedule_a,
        schedule_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diagonalize_unitary_2x2, su2_exp};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    fn cz(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn minus_i_x() -> CMatrix<f64, 2> {
        pauli_x().scale(cz(0.0, -1.0))
    }

    #[test]
    fn bell_basis_orthonormal() {
        let b = BellBasis::<f64>::new();
        assert!((b.phi_plus.inner(&b.phi_plus).re - 1.0).abs() < 1e-12);
        assert!(b.phi_plus.inner(&b.phi_minus).norm() < 1e-12);
        for v in [b.phi_plus, b.phi_minus] {
            assert_eq!(v.amplitudes()[0], cz(0.0, 0.0));
            assert_eq!(v.amplitudes()[3], cz(0.0, 0.0));
        }
    }

    #[test]
    fn generalized_basis_orthonormal() {
        for (a, b) in [(0.3, 0.5), (1.0, PI / 5.0), (-2.0, 3.0), (0.0, 0.0)] {
            let g = GeneralizedBasis::new(a, b);
            assert!((g.phi_plus.vector().norm_sqr() - 1.0).abs() < 1e-12);
            assert!((g.phi_minus.vector().norm_sqr() - 1.0).abs() < 1e-12);
            assert!(g.phi_plus.inner(&g.phi_minus).norm() < 1e-12);
        }
        let g = GeneralizedBasis::new(0.0, FRAC_PI_4);
        let b = BellBasis::new();
        assert!(g.phi_plus.vector().max_abs_diff(b.phi_plus.vector()) < 1e-15);
        assert!(g.phi_minus.vector().max_abs_diff(b.phi_minus.vector()) < 1e-15);
    }

    #[test]
    fn sigma_examples() {
        assert!(sigma_of_gamma(0.0).matrix().max_abs_diff(&CMatrix::identity()) < 1e-15);
        assert!(sigma_of_gamma(FRAC_PI_2).matrix().max_abs_diff(&minus_i_x()) < 1e-15);
        assert!(sigma_of_gamma(PI).matrix().max_abs_diff(&-CMatrix::identity()) < 1e-15);
        let s = sigma_of_gamma(FRAC_PI_2);
        let phi_plus = CVector::<f64, 2>::basis(0);
        let image = *s.matrix() * phi_plus;
        assert!(image.max_abs_diff(&CVector([cz(0.0, 0.0), cz(0.0, -1.0)])) < 1e-15);
    }

    #[test]
    fn sigma_matches_direct_basis_change() {
        for g in [0.0, 0.4, FRAC_PI_3, 2.9, -1.1] {
            let direct = basis_change_bell(&psi_phase_factor(g)).unwrap();
            assert!(direct.matrix().max_abs_diff(sigma_of_gamma(g).matrix()) < 1e-15);
        }
    }

    #[test]
    fn sigma_periodicity() {
        for g in [0.0, 0.3, -2.0, 3.1] {
            let s = *sigma_of_gamma(g).matrix();
            assert!(sigma_of_gamma(g + 2.0 * PI).matrix().max_abs_diff(&s) < 1e-14);
            assert!(sigma_of_gamma(g + PI).matrix().max_abs_diff(&-s) < 1e-14);
        }
    }

    #[test]
    fn predicted_examples() {
        let b = BellBasis::new();
        let p0 = predicted_final_state(0.0, BellSign::Plus);
        assert!(p0.vector().max_abs_diff(b.phi_plus.vector()) < 1e-15);
        let p = predicted_final_state(FRAC_PI_2, BellSign::Plus);
        let expected = b.phi_minus.vector().scale(cz(0.0, -1.0));
        assert!(p.vector().max_abs_diff(&expected) < 1e-15);
        assert!(p.inner(&b.phi_plus).norm() < 1e-15);
        let q = predicted_final_state(FRAC_PI_4, BellSign::Plus);
        let coords = PairBasis::Bell.coordinates(q.vector());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(coords.max_abs_diff(&CVector([cz(h, 0.0), cz(0.0, -h)])) < 1e-15);
    }

    #[test]
    fn phased_state_agrees_with_prediction() {
        let b = BellBasis::new();
        for (sign, v) in [(BellSign::Plus, b.phi_plus), (BellSign::Minus, b.phi_minus)] {
            let g = 0.77;
            let a = phased_state(&v, g);
            assert!(a.vector().max_abs_diff(predicted_final_state(g, sign).vector()) < 1e-15);
        }
    }

    #[test]
    fn abelian_examples() {
        let g = [0.0, PI / 7.0, FRAC_PI_3, 1.2345];
        assert!(abelian_check(&g).unwrap() < 1e-12);
        assert_eq!(abelian_check(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(abelian_check::<f64>(&[0.3]).is_err());
        let contrast = sigma_of_gamma(FRAC_PI_4)
            .matrix()
            .commutator(su2_exp(&PauliVector::unit_z(), FRAC_PI_4).matrix())
            .max_abs();
        assert!(contrast > 0.5, "{contrast}");
    }

    #[test]
    fn composition_examples() {
        for x in [0.0, 0.5, -3.0, 10.0] {
            assert!(composition_check(0.0, x) < 1e-15);
        }
        assert!(composition_check(FRAC_PI_3, FRAC_PI_6) < 1e-12);
        let prod = *sigma_of_gamma(FRAC_PI_3).matrix() * *sigma_of_gamma(FRAC_PI_6).matrix();
        assert!(prod.max_abs_diff(&minus_i_x()) < 1e-12);
        assert!(composition_check(PI, PI) < 1e-12);
        assert!(sigma_of_gamma(2.0 * PI).matrix().max_abs_diff(&CMatrix::identity()) < 1e-12);
    }

    #[test]
    fn basis_change_examples() {
        let id = basis_change_bell(&psi_phase_factor(0.0)).unwrap();
        assert!(id.matrix().max_abs_diff(&CMatrix::identity()) < 1e-15);
        let q = basis_change_bell(&psi_phase_factor(FRAC_PI_2)).unwrap();
        assert!(q.matrix().max_abs_diff(&minus_i_x()) < 1e-15);
        let g = 1.3;
        let eig = diagonalize_unitary_2x2(basis_change_bell(&psi_phase_factor(g)).unwrap().matrix()).unwrap();
        let d = eig.eigenvalues();
        assert!((d[0] - Complex::from_polar(1.0, -g)).norm() < 1e-9);
        assert!((d[1] - Complex::from_polar(1.0, g)).norm() < 1e-9);
    }

    #[test]
    fn basis_change_rejects_non_psi() {
        assert!(basis_change_bell(&sigma_of_gamma(0.3)).is_err());
        assert!(PhaseFactor::new(pauli_x::<f64>(), BasisTag::Psi).is_err());
        assert!(PhaseFactor::new(pauli_x::<f64>(), BasisTag::Bell).is_ok());
    }

    #[test]
    fn ideal_pair_states_have_zero_energy() {
        let p = PairProtocol::new(FRAC_PI_3);
        let (a, b) = p.schedules().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let grid: Vec<f64> = (0..=200).map(|j| p.length * j as f64 / 200.0).collect();
        let states = grid
            .iter()
            .map(|&s| {
                let f = degenerate_frame(&a.field_at(s), &b.field_at(s));
                (f[0] + f[1]).scale(cz(h, 0.0))
            })
            .collect();
        let traj = Trajectory {
            states,
            s_grid: grid,
            norm_drift: 0.0,
        };
        assert!(energy_zero_check(&traj, &a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn mismatched_kappa_rejected() {
        let p = PairProtocol::new(FRAC_PI_3);
        let (a, b) = p.schedules().unwrap();
        let a2 = HamiltonianSchedule::new(a.field_loop().clone(), 1.01, p.length).unwrap();
        let traj = Trajectory {
            states: vec![CVector::basis(1)],
            s_grid: vec![0.0],
            norm_drift: 0.0,
        };
        assert!(matches!(
            energy_zero_check(&traj, &a2, &b),
            Err(Error::Configuration { .. })
        ));
    }

    #[test]
    fn flat_loop_returns_input() {
        let mut p = PairProtocol::new(0.0);
        p.n_samples = 100;
        p.n_steps = Some(100_000);
        let r = run_pair_protocol(&p).unwrap();
        assert!(r.fidelity_eq4 >= 1.0 - 1e-6);
        assert!(r.overlap_initial >= 1.0 - 1e-6);
    }

    #[test]
    fn sixty_degrees_flips_to_partner() {
        let r = run_pair_protocol(&PairProtocol::new(FRAC_PI_3)).unwrap();
        assert!(r.overlap_initial <= 0.05, "{r:?}");
        assert!(r.overlap_partner >= 0.995, "{r:?}");
        assert!(r.leakage_max <= 1e-4);
        assert!(r.dynamical_phase.abs() <= 1e-6, "{}", r.dynamical_phase);
        let expected = sigma_of_gamma(r.gamma_used);
        assert!(r.sigma_estimated.max_abs_diff(expected.matrix()) < 5e-3);
    }

    #[test]
    fn minus_sign_input() {
        let mut p = PairProtocol::new(FRAC_PI_3);
        p.bell_sign = BellSign::Minus;
        let r = run_pair_protocol(&p).unwrap();
        assert!(r.overlap_partner >= 0.995);
        assert!(r.fidelity_eq4 >= 0.99);
    }

    #[test]
    fn leakage_reported_for_sudden_loop() {
        let mut p = PairProtocol::new(FRAC_PI_3);
        p.length = 4.0 * PI;
        p.n_samples = 1000;
        assert!(matches!(
            run_pair_protocol(&p),
            Err(Error::ProtocolViolation { .. })
        ));
    }
}
