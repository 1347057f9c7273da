"""Ground-state QFI of the Rabi model approaching the critical coupling.

Compares the exact closed form with a finite-difference estimate on the
numerically diagonalized truncated Hamiltonian, with the near-critical
approximation, and with the Heisenberg-limit curve evaluated at the
speed-limit time.

Run: ``python3 demos/critical_qfi.py``
"""
from cqmetro import (
    FockSpace,
    QRMParams,
    bang_off_schedule,
    eigh,
    qfi_overlap_path,
    qrm_hl_curve,
    qrm_mean_photon,
    qrm_qfi_critical_approx,
    qrm_qfi_exact,
    qrm_sw_hamiltonian,
)

DELTA, OMEGA = 0.01, 100.0


def main():
    space = FockSpace(120)
    print(f"{'g/g_c':>6} {'exact':>12} {'numerical':>12} {'near-critical':>14} {'HL(tau)':>12}")
    for ratio in (0.3, 0.6, 0.8, 0.9, 0.95):
        p = QRMParams.at_ratio(DELTA, OMEGA, ratio)

        def ground(x):
            return eigh(qrm_sw_hamiltonian(p.with_delta(x), space)).state(0)

        num = qfi_overlap_path(ground, DELTA, 1e-6 * DELTA).value
        _, tau = bang_off_schedule(DELTA, OMEGA, p.g)
        hl = float(qrm_hl_curve(qrm_mean_photon(p), tau))
        print(f"{ratio:6.2f} {qrm_qfi_exact(p):12.2f} {num:12.2f} {qrm_qfi_critical_approx(p):14.2f} {hl:12.2f}")


if __name__ == "__main__":
    main()
