"""Tabulate the QM high-frequency tail coefficient: closed formula vs free-particle limit."""

from dipole_noise.hydrogen import HydrogenState
from dipole_noise.qm_spectra import tail_coeff_qm, tail_coeff_qm_free_particle

STATES = [(1, 0, 0), (2, 0, 0), (2, 1, 1), (2, 1, 0), (3, 0, 0), (3, 1, 1), (3, 2, 2), (3, 2, 1), (4, 3, 3)]


def main() -> None:
    print(f"{'state':>8} {'exponent':>9} {'formula':>14} {'free particle':>14} {'ratio':>10}")
    for n, l, m in STATES:
        state = HydrogenState(n, l, m)
        coeff, expo = tail_coeff_qm(state)
        free = tail_coeff_qm_free_particle(state)
        ratio = coeff / free if free else float("nan")
        print(f"{state.label:>8} {-expo:>9} {coeff:>14.6e} {free:>14.6e} {ratio:>10.4g}")


if __name__ == "__main__":
    main()
