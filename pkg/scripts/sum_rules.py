"""Zeroth and second spectral moments, exact and from the sampled spectrum, for a few states."""

import sys

from dipole_noise.hydrogen import HydrogenState
from dipole_noise.observables import compare_theories


def main(states) -> None:
    for text in states:
        cmp = compare_theories(HydrogenState.parse(text))
        rep = cmp.report
        print(f"{text}: <x^2> = {rep.gamma0}, gamma2 SQM = {rep.gamma2_sqm}, gamma2 QM = {rep.gamma2_qm}")
        for label, block in (("gamma0", rep.gamma0_numeric), ("gamma2", rep.gamma2_numeric)):
            for key, value in block.items():
                print(f"    {label} {key}: {value}")


if __name__ == "__main__":
    main(sys.argv[1:] or ["2,1,1", "3,2,2", "3,2,1", "3,1,1"])
