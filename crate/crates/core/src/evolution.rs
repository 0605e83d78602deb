//! Integration of `i dψ/ds = κ (β̂(s)·σ) ψ` along a field loop.
//!
//! Units: ħ = 1, the field magnitude is folded into the coupling `κ`, and `s`
//! is path length through the medium. Integration is classic fixed-step
//! fourth-order Runge–Kutta with no renormalization, so the norm drift of a
//! trajectory measures the integration error directly.

use crate::bloch::{FieldLoop, Orientation};
use crate::error::{Error, Result};
use crate::linalg::{
    gauge_fix, kron, su2_exp, CMatrix, CVector, PauliVector, StateVector, UnitaryOperator,
};
use crate::scalar::{Complex, Real};
use crate::tolerance;

/// Minimum RK4 steps per loop segment.
pub const STEPS_PER_SEGMENT: usize = 10;

/// `max(10⁵, 20 × n_samples)`.
pub fn default_n_steps(n_samples: usize) -> usize {
    100_000.max(20 * n_samples)
}

/// Instantaneous eigenband of `β̂·σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Band {
    /// Eigenvalue -1 (spin anti-aligned with the field).
    Minus,
    /// Eigenvalue +1.
    Plus,
}

impl Band {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Band::Minus => -T::one(),
            Band::Plus => T::one(),
        }
    }

    pub fn eigenstate<T: Real>(self, beta: &PauliVector<T>) -> StateVector<T, 2> {
        let (minus, plus) = instantaneous_eigenstates(beta);
        match self {
            Band::Minus => minus,
            Band::Plus => plus,
        }
    }
}

/// Gauge-fixed eigenvectors of `β̂·σ` for eigenvalues -1 and +1.
pub fn instantaneous_eigenstates<T: Real>(
    beta: &PauliVector<T>,
) -> (StateVector<T, 2>, StateVector<T, 2>) {
    let (x, y, z) = (beta.x(), beta.y(), beta.z());
    let o = T::zero();
    let eig = |lambda: T| {
        let a = CVector([Complex::new(x, y), Complex::new(lambda + z, o)]);
        let b = CVector([Complex::new(lambda - z, o), Complex::new(x, -y)]);
        let v = if a.norm_sqr() >= b.norm_sqr() { a } else { b };
        let v = v.scale(Complex::new(T::one() / v.norm(), o));
        StateVector::from_unit_unchecked(gauge_fix(v))
    };
    (eig(-T::one()), eig(T::one()))
}

/// Position-dependent Hamiltonian on an `N`-dimensional space.
pub trait Hamiltonian<T: Real, const N: usize> {
    fn length(&self) -> T;
    fn matrix_at(&self, s: T) -> CMatrix<T, N>;
}

/// A single medium: unit field following `field_loop` over path length
/// `length`, with coupling `kappa`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSchedule<T> {
    field_loop: FieldLoop<T>,
    kappa: T,
    length: T,
}

impl<T: Real> HamiltonianSchedule<T> {
    pub fn new(field_loop: FieldLoop<T>, kappa: T, length: T) -> Result<Self> {
        if !(kappa > T::zero() && kappa.is_finite()) {
            return Err(Error::input(format!("kappa must be positive, got {kappa}")));
        }
        if !(length > T::zero() && length.is_finite()) {
            return Err(Error::input(format!("length must be positive, got {length}")));
        }
        Ok(HamiltonianSchedule {
            field_loop,
            kappa,
            length,
        })
    }

    /// Constant field along `axis`.
    pub fn constant(axis: PauliVector<T>, kappa: T, length: T) -> Result<Self> {
        Self::new(FieldLoop::constant(axis, 8), kappa, length)
    }

    pub fn field_loop(&self) -> &FieldLoop<T> {
        &self.field_loop
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn field_at(&self, s: T) -> PauliVector<T> {
        self.field_loop.point_at(s / self.length)
    }

    fn check_steps(&self, n_steps: usize) -> Result<()> {
        let needed = STEPS_PER_SEGMENT * self.field_loop.n_segments();
        if n_steps < needed {
            return Err(Error::input(format!(
                "{n_steps} steps is below {STEPS_PER_SEGMENT} per loop segment ({needed})"
            )));
        }
        Ok(())
    }
}

impl<T: Real> Hamiltonian<T, 2> for HamiltonianSchedule<T> {
    fn length(&self) -> T {
        self.length
    }

    fn matrix_at(&self, s: T) -> CMatrix<T, 2> {
        self.field_at(s)
            .sigma()
            .scale(Complex::new(self.kappa, T::zero()))
    }
}

/// Two independent media acting on a pair: `H_A ⊗ I + I ⊗ H_B`.
#[derive(Clone, Copy, Debug)]
pub struct PairSchedule<'a, T> {
    pub a: &'a HamiltonianSchedule<T>,
    pub b: &'a HamiltonianSchedule<T>,
}

impl<'a, T: Real> PairSchedule<'a, T> {
    /// Both media must share coupling and length, otherwise the pair states
    /// are not degenerate.
    pub fn new(a: &'a HamiltonianSchedule<T>, b: &'a HamiltonianSchedule<T>) -> Result<Self> {
        if (a.kappa - b.kappa).abs() > T::tol(tolerance::KAPPA_MATCH) {
            return Err(Error::config(
                "kappa",
                format!(
                    "media couplings differ ({} vs {}); degeneracy broken",
                    a.kappa, b.kappa
                ),
            ));
        }
        let scale = a.length.abs().max(T::one());
        if (a.length - b.length).abs() > T::tol(tolerance::KAPPA_MATCH) * scale {
            return Err(Error::config(
                "length",
                format!("media lengths differ ({} vs {})", a.length, b.length),
            ));
        }
        Ok(PairSchedule { a, b })
    }
}

impl<T: Real> Hamiltonian<T, 4> for PairSchedule<'_, T> {
    fn length(&self) -> T {
        self.a.length
    }

    fn matrix_at(&self, s: T) -> CMatrix<T, 4> {
        let id = CMatrix::identity();
        kron(&self.a.matrix_at(s), &id) + kron(&id, &self.b.matrix_at(s))
    }
}

/// Integrated states on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T, const N: usize> {
    pub states: Vec<CVector<T, N>>,
    pub s_grid: Vec<T>,
    /// Max `| ‖ψ‖ - 1 |` over the grid.
    pub norm_drift: T,
}

impl<T: Real, const N: usize> Trajectory<T, N> {
    pub fn initial(&self) -> &CVector<T, N> {
        &self.states[0]
    }

    pub fn last(&self) -> &CVector<T, N> {
        self.states.last().expect("trajectory is never empty")
    }
}

fn minus_i<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), -T::one())
}

fn grid_point<T: Real>(s0: T, s1: T, j: usize, n: usize) -> T {
    s0 + (s1 - s0) * T::from_count(j) / T::from_count(n)
}

fn drift_error<T: Real>(drift: T, limit: f64) -> Error {
    Error::NumericalFailure {
        norm_drift: drift.to_f64().unwrap_or(f64::NAN),
        limit,
    }
}

/// Fixed-step RK4 of `i ψ' = H(s) ψ` from `s0` to `s1`.
pub fn integrate<T, H, const N: usize>(
    ham: &H,
    psi0: &CVector<T, N>,
    s0: T,
    s1: T,
    n_steps: usize,
) -> Result<Trajectory<T, N>>
where
    T: Real,
    H: Hamiltonian<T, N>,
{
    if n_steps == 0 {
        return Err(Error::input("n_steps must be positive"));
    }
    let dt = (s1 - s0) / T::from_count(n_steps);
    let half = Complex::new(dt * T::lit(0.5), T::zero());
    let full = Complex::new(dt, T::zero());
    let sixth = Complex::new(dt / T::lit(6.0), T::zero());
    let two = Complex::new(T::lit(2.0), T::zero());
    let mi = minus_i::<T>();
    let norm0 = psi0.norm();

    let mut states = Vec::with_capacity(n_steps + 1);
    let mut s_grid = Vec::with_capacity(n_steps + 1);
    let mut psi = *psi0;
    let mut drift = (norm0 - T::one()).abs();
    let mut h_start = ham.matrix_at(s0);
    states.push(psi);
    s_grid.push(s0);
    for j in 0..n_steps {
        let s = grid_point(s0, s1, j, n_steps);
        let s_next = grid_point(s0, s1, j + 1, n_steps);
        let h_mid = ham.matrix_at(s + dt * T::lit(0.5));
        let h_end = ham.matrix_at(s_next);
        let k1 = (h_start * psi).scale(mi);
        let k2 = (h_mid * (psi + k1.scale(half))).scale(mi);
        let k3 = (h_mid * (psi + k2.scale(half))).scale(mi);
        let k4 = (h_end * (psi + k3.scale(full))).scale(mi);
        psi = psi + (k1 + k2.scale(two) + k3.scale(two) + k4).scale(sixth);
        drift = drift.max((psi.norm() - T::one()).abs());
        states.push(psi);
        s_grid.push(s_next);
        h_start = h_end;
    }
    if !(drift <= T::tol(tolerance::NORM_DRIFT_MAX)) {
        return Err(drift_error(drift, tolerance::NORM_DRIFT_MAX));
    }
    Ok(Trajectory {
        states,
        s_grid,
        norm_drift: drift,
    })
}

/// Evolves a single-system state through the whole medium.
pub fn evolve_state<T: Real>(
    schedule: &HamiltonianSchedule<T>,
    psi0: &StateVector<T, 2>,
    n_steps: usize,
) -> Result<Trajectory<T, 2>> {
    schedule.check_steps(n_steps)?;
    integrate(schedule, psi0.vector(), T::zero(), schedule.length, n_steps)
}

/// Evolution operators `U(s_j)` on the integration grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorPath<T> {
    pub operators: Vec<CMatrix<T, 2>>,
    pub s_grid: Vec<T>,
    /// Max unitarity deviation over the grid.
    pub unitarity_drift: T,
}

impl<T: Real> PropagatorPath<T> {
    pub fn last(&self) -> &CMatrix<T, 2> {
        self.operators.last().expect("path is never empty")
    }
}

/// RK4 of the operator equation `i U' = H U`, `U(s0) = I`, recording every step.
pub fn propagator_path_between<T: Real>(
    schedule: &HamiltonianSchedule<T>,
    s0: T,
    s1: T,
    n_steps: usize,
) -> Result<PropagatorPath<T>> {
    if n_steps == 0 {
        return Err(Error::input("n_steps must be positive"));
    }
    let dt = (s1 - s0) / T::from_count(n_steps);
    let half = Complex::new(dt * T::lit(0.5), T::zero());
    let full = Complex::new(dt, T::zero());
    let sixth = Complex::new(dt / T::lit(6.0), T::zero());
    let two = Complex::new(T::lit(2.0), T::zero());
    let mi = minus_i::<T>();

    let mut operators = Vec::with_capacity(n_steps + 1);
    let mut s_grid = Vec::with_capacity(n_steps + 1);
    let mut u = CMatrix::<T, 2>::identity();
    let mut drift = T::zero();
    let mut h_start = schedule.matrix_at(s0);
    operators.push(u);
    s_grid.push(s0);
    for j in 0..n_steps {
        let s = grid_point(s0, s1, j, n_steps);
        let s_next = grid_point(s0, s1, j + 1, n_steps);
        let h_mid = schedule.matrix_at(s + dt * T::lit(0.5));
        let h_end = schedule.matrix_at(s_next);
        let k1 = (h_start * u).scale(mi);
        let k2 = (h_mid * (u + k1.scale(half))).scale(mi);
        let k3 = (h_mid * (u + k2.scale(half))).scale(mi);
        let k4 = (h_end * (u + k3.scale(full))).scale(mi);
        u = u + (k1 + k2.scale(two) + k3.scale(two) + k4).scale(sixth);
        operators.push(u);
        s_grid.push(s_next);
        h_start = h_end;
    }
    // Unitarity drift grows monotonically under RK4, so the endpoint bounds it.
    drift = drift.max(u.unitarity_deviation());
    if !(drift <= T::tol(tolerance::INTEGRATED_UNITARY)) {
        return Err(drift_error(drift, tolerance::INTEGRATED_UNITARY));
    }
    Ok(PropagatorPath {
        operators,
        s_grid,
        unitarity_drift: drift,
    })
}

pub fn propagator_path<T: Real>(
    schedule: &HamiltonianSchedule<T>,
    n_steps: usize,
) -> Result<PropagatorPath<T>> {
    schedule.check_steps(n_steps)?;
    propagator_path_between(schedule, T::zero(), schedule.length, n_steps)
}

/// Full evolution operator through the medium.
pub fn propagator<T: Real>(
    schedule: &HamiltonianSchedule<T>,
    n_steps: usize,
) -> Result<UnitaryOperator<T, 2>> {
    schedule.check_steps(n_steps)?;
    propagator_between(schedule, T::zero(), schedule.length, n_steps)
}

/// Evolution operator from `s0` to `s1` without storing the path.
pub fn propagator_between<T: Real>(
    schedule: &HamiltonianSchedule<T>,
    s0: T,
    s1: T,
    n_steps: usize,
) -> Result<UnitaryOperator<T, 2>> {
    // Columns are the evolved basis vectors.
    let c0 = integrate(schedule, &CVector::basis(0), s0, s1, n_steps)?;
    let c1 = integrate(schedule, &CVector::basis(1), s0, s1, n_steps)?;
    let m = CMatrix::from_columns([*c0.last(), *c1.last()]);
    let dev = m.unitarity_deviation();
    if !(dev <= T::tol(tolerance::INTEGRATED_UNITARY)) {
        return Err(drift_error(dev, tolerance::INTEGRATED_UNITARY));
    }
    Ok(UnitaryOperator::from_unitary_unchecked(m))
}

/// Exact propagator of a cone loop of half-angle `theta`, from the frame
/// rotating about `Z'` at `ω = 2π/L`: there the field is the constant
/// `h = κẑ - (ω/2)Z'`, so `U(L) = exp(-iπ Z'·σ) · exp(-i L h·σ)`.
pub fn exact_cone_propagator<T: Real>(theta: T, kappa: T, length: T) -> UnitaryOperator<T, 2> {
    exact_cone_propagator_at(theta, kappa, length, Orientation::Positive, length)
}

/// Exact cone-loop evolution operator at intermediate path length `s`:
/// `U(s) = exp(-i(ωs/2) Z'·σ) · exp(-i s h·σ)` with `ω = 2π·orientation/L`.
pub fn exact_cone_propagator_at<T: Real>(
    theta: T,
    kappa: T,
    length: T,
    orientation: Orientation,
    s: T,
) -> UnitaryOperator<T, 2> {
    let omega = T::two_pi() * orientation.sign::<T>() / length;
    let axis = PauliVector::from_angles(theta, T::zero());
    let half_omega = omega * T::lit(0.5);
    let a = axis.components();
    let h = [
        -half_omega * a[0],
        -half_omega * a[1],
        kappa - half_omega * a[2],
    ];
    let h_norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let frame = su2_exp(&axis, half_omega * s);
    if h_norm <= T::epsilon() {
        return frame;
    }
    let h_hat = PauliVector::from_unit_unchecked(h.map(|v| v / h_norm));
    frame * su2_exp(&h_hat, h_norm * s)
}

/// `1 - |⟨n_band(β̂(L))|ψ(L)⟩|²` for `ψ(0) = n_band(β̂(0))`.
pub fn adiabatic_infidelity<T: Real>(
    schedule: &HamiltonianSchedule<T>,
    band: Band,
    n_steps: usize,
) -> Result<T> {
    let start = band.eigenstate(&schedule.field_at(T::zero()));
    let target = band.eigenstate(&schedule.field_at(schedule.length));
    let traj = evolve_state(schedule, &start, n_steps)?;
    Ok(T::one() - target.vector().inner(traj.last()).norm_sqr())
}
