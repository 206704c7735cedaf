"""Write the trajectory-picture spectra of the four reference states to one CSV per state.

Usage: python3 scripts/figure1.py [OUTDIR]
"""

import pathlib
import sys

from click.testing import CliRunner

from dipole_noise import cli

STATES = ["2,1,1", "3,2,2", "3,2,1", "3,1,1"]


def main(outdir: str = "reference_spectra") -> None:
    out = pathlib.Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    runner = CliRunner()
    for state in STATES:
        target = out / f"spectrum_{state.replace(',', '')}.csv"
        res = runner.invoke(cli.main, ["spectrum", "--state", state, "--output", str(target)])
        if res.exit_code != 0:
            sys.exit(f"{state}: exit {res.exit_code}\n{res.output}")
        print(target)


if __name__ == "__main__":
    main(*sys.argv[1:2])
