//! Geometric-phase extraction: the discrete Wilson loop over instantaneous
//! eigenstates, and the total-minus-dynamical phase of an integrated
//! trajectory. Both are compared against `Γ = ∓Ω/2`.

use crate::bloch::{solid_angle, FieldLoop, SolidAngle};
use crate::error::{Error, Result};
use crate::evolution::{evolve_state, Hamiltonian, HamiltonianSchedule, Trajectory};
use crate::linalg::CVector;
use crate::scalar::{phase_distance, reduce_phase, Complex, Real};
use crate::tolerance;

pub use crate::evolution::Band;

/// `Γ_band = -band_sign · Ω / 2`, reduced into `(-π, π]`. The minus band
/// (state `|0⟩` at `ẑ`) picks up `+Ω/2`.
pub fn analytic_gamma<T: Real>(omega: T, band: Band) -> T {
    reduce_phase(-band.sign::<T>() * omega * T::lit(0.5))
}

/// `-arg ∏_k ⟨v_k|v_{k+1}⟩` over a closed chain (`v_N ≡ v_0`).
pub fn wilson_phase_of_chain<T: Real, const N: usize>(states: &[CVector<T, N>]) -> Result<T> {
    if states.is_empty() {
        return Ok(T::zero());
    }
    let floor = T::lit(tolerance::WILSON_MIN_OVERLAP);
    let n = states.len();
    let mut prod = Complex::new(T::one(), T::zero());
    for k in 0..n {
        let next = (k + 1) % n;
        let ov = states[k].inner(&states[next]);
        let mag = ov.norm();
        if !(mag >= floor) {
            return Err(Error::LoopTooCoarse {
                index: k,
                next,
                magnitude: mag.to_f64().unwrap_or(f64::NAN),
            });
        }
        prod = prod * (ov / mag);
    }
    Ok(reduce_phase(-prod.arg()))
}

/// Gauge-invariant discrete Berry phase of `band` around `lp`.
pub fn wilson_loop_phase<T: Real>(lp: &FieldLoop<T>, band: Band) -> Result<T> {
    let body = &lp.samples()[..lp.n_segments()];
    let states: Vec<_> = body.iter().map(|b| *band.eigenstate(b).vector()).collect();
    wilson_phase_of_chain(&states)
}

/// `-∫ ⟨ψ|H|ψ⟩ ds` by the trapezoid rule on the trajectory grid; unreduced.
pub fn dynamic_phase<T, H, const N: usize>(traj: &Trajectory<T, N>, ham: &H) -> T
where
    T: Real,
    H: Hamiltonian<T, N>,
{
    let energy = |j: usize| {
        let psi = traj.states[j];
        psi.inner(&(ham.matrix_at(traj.s_grid[j]) * psi)).re
    };
    let mut acc = T::zero();
    let mut prev = energy(0);
    for j in 1..traj.states.len() {
        let e = energy(j);
        acc += (traj.s_grid[j] - traj.s_grid[j - 1]) * (prev + e) * T::lit(0.5);
        prev = e;
    }
    -acc
}

/// `arg⟨ψ(0)|ψ(L)⟩ - φ_dyn`, reduced into `(-π, π]`. Requires the final state
/// to return to the initial ray.
pub fn geometric_phase_from_dynamics<T, H, const N: usize>(traj: &Trajectory<T, N>, ham: &H) -> Result<T>
where
    T: Real,
    H: Hamiltonian<T, N>,
{
    let ov = traj.initial().inner(traj.last());
    let mag = ov.norm();
    if !(mag >= T::lit(tolerance::ADIABATIC_MIN_OVERLAP)) {
        return Err(Error::NotAdiabatic {
            overlap: mag.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(reduce_phase(ov.arg() - dynamic_phase(traj, ham)))
}

/// The three phase estimates for one band and loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerryPhaseResult<T> {
    pub band: Band,
    pub omega: SolidAngle<T>,
    pub gamma_wilson: T,
    pub gamma_dynamics: T,
    pub gamma_analytic: T,
    /// `|γ_wilson - γ_dynamics|` on the circle.
    pub method_residual: T,
    /// Unreduced dynamical phase of the trajectory.
    pub dynamical_phase: T,
    /// `|⟨ψ(0)|ψ(L)⟩|`.
    pub final_overlap: T,
    pub norm_drift: T,
    /// `method_residual` within the accepted budget.
    pub accepted: bool,
}

/// Runs every extraction route on `schedule` for `band`.
pub fn analyze_loop<T: Real>(
    schedule: &HamiltonianSchedule<T>,
    band: Band,
    n_steps: usize,
) -> Result<BerryPhaseResult<T>> {
    let lp = schedule.field_loop();
    let omega = solid_angle(lp)?;
    let gamma_wilson = wilson_loop_phase(lp, band)?;
    let psi0 = band.eigenstate(&lp.start());
    let traj = evolve_state(schedule, &psi0, n_steps)?;
    let dynamical_phase = dynamic_phase(&traj, schedule);
    let gamma_dynamics = geometric_phase_from_dynamics(&traj, schedule)?;
    let method_residual = phase_distance(gamma_wilson, gamma_dynamics);
    Ok(BerryPhaseResult {
        band,
        omega,
        gamma_wilson,
        gamma_dynamics,
        gamma_analytic: analytic_gamma(omega.omega, band),
        method_residual,
        dynamical_phase,
        final_overlap: traj.initial().inner(traj.last()).norm(),
        norm_drift: traj.norm_drift,
        accepted: method_residual <= T::lit(tolerance::METHOD_RESIDUAL_MAX),
    })
}
