"""Regenerate the shipped sample CSV datasets with the simopo CLI.

Run from this directory: ``python3 make_sample_data.py``.  Uses small mode
cutoffs and coarse sweeps so the files stay light; the sinc comparison pins
the previously fitted coefficients to keep regeneration quick.
"""

import subprocess
import sys
from pathlib import Path

OUT = Path(__file__).parent / "src" / "figrender" / "sample_data"

RUNS = [
    ("fig2a_xi81.csv", ["mode-spectrum", "--nmax", "12"]),
    ("fig2a_xi9.csv", ["mode-spectrum", "--nmax", "12", "--xi", "0.1111111111111111"]),
    ("fig2bc_ti01.csv", ["gouy-sweep", "--nmax", "10", "--sweep", "0:0.01:26", "--max-order", "3"]),
    ("fig2bc_ti02.csv", ["gouy-sweep", "--nmax", "10", "--sweep", "0:0.01:26", "--max-order", "3",
                         "--ti", "0.2"]),
    ("fig2de_002.csv", ["sideband-sweep", "--nmax", "10", "--sweep", "0:3:61", "--gouy", "0.002",
                        "--max-order", "2"]),
    ("fig2de_006.csv", ["sideband-sweep", "--nmax", "10", "--sweep", "0:3:61", "--gouy", "0.006",
                        "--max-order", "2"]),
    ("fig4a_t000.csv", ["mismatch-sweep", "--nmax", "12", "--sweep", "0:3:31"]),
    ("fig4a_t002.csv", ["mismatch-sweep", "--nmax", "12", "--sweep", "0:3:31", "--gouy", "0.002"]),
    ("fig4a_t004.csv", ["mismatch-sweep", "--nmax", "12", "--sweep", "0:3:31", "--gouy", "0.004"]),
    ("fig4a_t006.csv", ["mismatch-sweep", "--nmax", "12", "--sweep", "0:3:31", "--gouy", "0.006"]),
    ("fig4b_t000.csv", ["mismatch-sweep", "--nmax", "12", "--kind", "size", "--sweep", "0.4:2.5:29"]),
    ("fig4b_t001.csv", ["mismatch-sweep", "--nmax", "12", "--kind", "size", "--sweep", "0.4:2.5:29",
                        "--gouy", "0.001"]),
    ("fig4b_t002.csv", ["mismatch-sweep", "--nmax", "12", "--kind", "size", "--sweep", "0.4:2.5:29",
                        "--gouy", "0.002"]),
    ("fig4b_t003.csv", ["mismatch-sweep", "--nmax", "12", "--kind", "size", "--sweep", "0.4:2.5:29",
                        "--gouy", "0.003"]),
    ("fig5a.csv", ["loss-sweep", "--nmax", "12", "--sweep", "0:3:31"]),
    ("fig5b.csv", ["loss-sweep", "--nmax", "12", "--kind", "size", "--sweep", "0.4:2.5:29"]),
    ("fig6a.csv", ["waist-mismatch", "--nmax", "10", "--sweep", "0:3:31"]),
    ("fig6b.csv", ["waist-mismatch", "--nmax", "10", "--kind", "size", "--sweep", "0.4:2.5:29"]),
    ("fig6c.csv", ["sinc-compare", "--nmax", "8", "--sweep", "0:3:31",
                   "--alpha", "0.457", "--pump-waist", "2.566"]),
    ("fig6d.csv", ["sinc-compare", "--nmax", "8", "--kind", "size", "--sweep", "0.4:2.5:29",
                   "--alpha", "0.457", "--pump-waist", "2.566"]),
    ("fig8_disp.csv", ["gouy-map", "--nmax", "10", "--sweep", "-0.05:0.05:21"]),
    ("fig8_size.csv", ["gouy-map", "--nmax", "10", "--kind", "size", "--sweep", "-0.05:0.05:21"]),
]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, arguments in RUNS:
        command = ["simopo", "run", *arguments, "--out", str(OUT / name)]
        print(" ".join(command))
        subprocess.run(command, check=True)


if __name__ == "__main__":
    sys.exit(main())
