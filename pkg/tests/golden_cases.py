"""CLI invocations whose CSV output is frozen under tests/golden/."""

from pathlib import Path

GOLDEN_DIR = Path(__file__).parent / "golden"

CASES = {
    "bounds.csv": ["bounds", "--config", "cell.toml", "--snr-db", "-10:40:6"],
    "baseline.csv": ["baseline", "--config", "cell.toml", "--snr-db", "-10:40:6"],
    "uplink.csv": ["uplink", "--config", "cell.toml", "--snr-db", "0:30:4", "--subsets", "4,16"],
    "min_power.csv": ["min-power", "--config", "cell.toml", "--eta", "0:4:5"],
    "uniform_capacity.csv": ["uniform-capacity", "--config", "cell.toml"],
    "region_table.csv": ["region", "--config", "table.toml", "--snr-db", "0:20:3"],
    "ccdf_table.csv": ["ccdf", "--config", "table.toml", "--points", "17"],
}


def argv_for(name, out):
    args = list(CASES[name])
    i = args.index("--config") + 1
    args[i] = str(GOLDEN_DIR / args[i])
    return args + ["--out", str(out)]


if __name__ == "__main__":  # regenerate after an intended output change
    from continuum_cap.cli import main

    for name in CASES:
        assert main(argv_for(name, GOLDEN_DIR / name)) == 0
