"""Shared fixtures: random-sample helpers and a synthetic returns file.

The synthetic senate returns file follows the public statewide-returns
schema (year, state_po, party_simplified, candidatevotes, totalvotes) for
the 23 biennial cycles 1976-2020.  Party shares are drawn per state inside
disjoint bands (dem 0.50-0.55, rep 0.40-0.445, other the remainder), so
every aggregated national proportion column is interval-separated from the
others; the case-study ordering assertions then hold for every mean order
by the boundedness of the mean families.

Set the ``WMLE_SENATE_RETURNS`` environment variable to point the
case-study tests at a real returns file instead.
"""

from __future__ import annotations

import os

import numpy as np
import pytest

SCHEMA_HEADER = "year,state_po,party_simplified,candidatevotes,totalvotes"

_STATES = ("AZ", "CA", "MT", "OH", "PA", "VT")


def write_synthetic_returns(path) -> None:
    rng = np.random.default_rng(19762020)
    lines = [SCHEMA_HEADER]
    for year in range(1976, 2021, 2):
        states = _STATES + (("GA",) if year == 1992 else ())  # special election
        for state in states:
            total = int(rng.integers(200_000, 1_400_000))
            dem_share = rng.uniform(0.50, 0.55)
            rep_share = rng.uniform(0.40, 0.445)
            dem = int(round(total * dem_share))
            rep = int(round(total * rep_share))
            other = total - dem - rep
            libertarian = int(other * 0.6)
            writein = other - libertarian
            for party, votes in (
                ("DEMOCRAT", dem),
                ("REPUBLICAN", rep),
                ("LIBERTARIAN", libertarian),
                ("", writein),
            ):
                lines.append(f"{year},{state},{party},{votes},{total}")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines) + "\n")


@pytest.fixture(scope="session")
def synthetic_returns_csv(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("returns") / "senate_synthetic.csv"
    write_synthetic_returns(path)
    return str(path)


@pytest.fixture(scope="session")
def returns_csv(synthetic_returns_csv) -> str:
    """Real returns file when WMLE_SENATE_RETURNS is set, else the fixture."""
    real = os.environ.get("WMLE_SENATE_RETURNS")
    if real:
        if not os.path.exists(real):
            pytest.fail(f"WMLE_SENATE_RETURNS points at a missing file: {real}")
        return real
    return synthetic_returns_csv


def random_positive_sample(rng: np.random.Generator, max_n: int = 20,
                           min_n: int = 1, weighted: bool = True):
    """Unit-scale positive values with optional random positive weights."""
    n = int(rng.integers(min_n, max_n + 1))
    values = rng.uniform(0.05, 3.0, size=n)
    weights = rng.uniform(0.1, 4.0, size=n) if weighted else None
    return values, weights
