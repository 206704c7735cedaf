"""Compare the (n, n-1, n-2) family coefficient derived here with the literature expression."""

from dipole_noise.hydrogen import HydrogenState
from dipole_noise.numerics import bessel_k
from dipole_noise.sqm_spectra import (
    family_bar_coefficient,
    family_bar_coefficient_literature,
    spectral_general,
    z_param,
)


def numeric_coefficient(n: int, omega: float = 1.0) -> float:
    # divide the general integral by the family's Bessel shape
    z = float(z_param(n, n - 2, omega))
    return spectral_general(HydrogenState(n, n - 1, n - 2), omega) / (omega ** -(n + 1) * z * z * bessel_k(2, z))


def main() -> None:
    print(f"{'n':>3} {'derived':>24} {'numeric':>24} {'literature/derived':>20}")
    for n in range(3, 8):
        derived = family_bar_coefficient(n)
        ratio = family_bar_coefficient_literature(n) / derived
        print(f"{n:>3} {str(derived):>24} {numeric_coefficient(n):>24.15e} {str(ratio):>20}")


if __name__ == "__main__":
    main()
