"""Landau-Zener sweep with and without counter-diabatic driving.

Prepares the ground state at a large field, ramps the field down to the
avoided crossing in time T and compares:

* fidelity with the target ground state,
* the QFI of the final state with respect to the level splitting,
* the trajectory bound 4 T^2 max Var[sigma_x / 2].

Run: ``python3 demos/lz_cd_walkthrough.py``
"""
import numpy as np

from cqmetro import (
    LZParams,
    evolve,
    fidelity,
    lz_default_ramp,
    lz_ground_state,
    lz_h_omega,
    lz_qfi_adiabatic,
    lz_time_dependent_hamiltonian,
    propagate,
    qfi_overlap_path,
    trajectory_bound,
)
from cqmetro.dynamics import PropagationConfig

DELTA = 0.05


def run(T, cd):
    ramp = lz_default_ramp(DELTA, T, g0_factor=500.0)
    psi0 = lz_ground_state(LZParams(DELTA, g=ramp.g0))
    H = lz_time_dependent_hamiltonian(LZParams(DELTA), cd)
    res = propagate(H, ramp, psi0, PropagationConfig(record_trajectory=True))

    def state_at(x):
        return evolve(lz_time_dependent_hamiltonian(LZParams(x, DELTA), cd), ramp, psi0.amplitudes, res.steps)

    qfi = qfi_overlap_path(state_at, DELTA, 1e-6 * DELTA).value
    bound = trajectory_bound(np.vstack([psi0.amplitudes, res.trajectory.states]), lz_h_omega(), T)
    return fidelity(res.state, lz_ground_state(LZParams(DELTA, g=DELTA))), qfi, bound


def main():
    print(f"adiabatic QFI at g = delta: {lz_qfi_adiabatic(LZParams(DELTA, g=DELTA)):.3f}")
    print(f"{'T*delta':>8} {'drive':>6} {'fidelity':>10} {'QFI':>12} {'T^2':>12} {'bound':>12}")
    for td in (0.01, 0.1, 1.0, 10.0, 100.0):
        T = td / DELTA
        for cd in (True, False):
            f, q, b = run(T, cd)
            print(f"{td:8g} {'CD' if cd else 'bare':>6} {f:10.6f} {q:12.5g} {T**2:12.5g} {b:12.5g}")


if __name__ == "__main__":
    main()
