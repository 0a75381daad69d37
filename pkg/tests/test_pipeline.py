"""Tests for returns ingestion and per-cycle aggregation."""

import logging

import numpy as np
import pytest

from wmle import (
    AggregationError,
    ConfigError,
    DomainError,
    SchemaError,
    aggregate,
    load_returns,
    to_weighted_dataset,
)
from wmle.pipeline import ProportionMatrix, SchemaConfig

from conftest import SCHEMA_HEADER


def write_file(path, text):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    return str(path)


class TestSchemaConfig:
    def test_defaults_match_public_senate_file(self):
        config = SchemaConfig()
        assert config.required_columns() == (
            "year", "state_po", "party_simplified", "candidatevotes", "totalvotes"
        )
        assert (config.year_min, config.year_max) == (1976, 2020)

    def test_from_file(self, tmp_path):
        path = write_file(
            tmp_path / "schema.cfg",
            "# custom layout\nyear_column = yr\nparty_column= party\nyear_min=1980\n",
        )
        config = SchemaConfig.from_file(path)
        assert config.year_column == "yr"
        assert config.party_column == "party"
        assert config.year_min == 1980
        assert config.total_votes_column == "totalvotes"

    def test_unknown_key_rejected(self, tmp_path):
        path = write_file(tmp_path / "schema.cfg", "not_a_key=1\n")
        with pytest.raises(ConfigError, match="not_a_key"):
            SchemaConfig.from_file(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = write_file(tmp_path / "schema.cfg", "year_column\n")
        with pytest.raises(ConfigError):
            SchemaConfig.from_file(path)


class TestLoadReturns:
    def test_header_only_file(self, tmp_path):
        path = write_file(tmp_path / "r.csv", SCHEMA_HEADER + "\n")
        result = load_returns(path)
        assert result.rows == []
        assert result.rejects == []

    def test_three_row_fixture_roundtrips(self, tmp_path):
        path = write_file(
            tmp_path / "r.csv",
            SCHEMA_HEADER + "\n"
            "1976,AZ,DEMOCRAT,400,1000\n"
            "1976,AZ,REPUBLICAN,500,1000\n"
            "1978,CA,LIBERTARIAN,100,900\n",
        )
        result = load_returns(path)
        assert len(result.rows) == 3 and not result.rejects
        first = result.rows[0]
        assert (first.year, first.state, first.party) == (1976, "AZ", "DEMOCRAT")
        assert (first.candidate_votes, first.total_votes) == (400, 1000)
        assert result.rows[2].party == "LIBERTARIAN"

    def test_candidate_votes_above_total_rejected_with_reason(self, tmp_path):
        path = write_file(
            tmp_path / "r.csv",
            SCHEMA_HEADER + "\n1976,AZ,DEMOCRAT,1200,1000\n",
        )
        result = load_returns(path)
        assert result.rows == []
        assert len(result.rejects) == 1
        assert "exceeds totalvotes" in result.rejects[0].reason
        assert result.rejects[0].line_number == 2

    def test_year_outside_range_rejected(self, tmp_path):
        path = write_file(
            tmp_path / "r.csv",
            SCHEMA_HEADER + "\n1974,AZ,DEMOCRAT,10,100\n1976,AZ,DEMOCRAT,10,100\n",
        )
        result = load_returns(path)
        assert len(result.rows) == 1
        assert len(result.rejects) == 1
        assert "outside configured range" in result.rejects[0].reason

    def test_unparsable_votes_rejected(self, tmp_path):
        path = write_file(
            tmp_path / "r.csv",
            SCHEMA_HEADER + "\n1976,AZ,DEMOCRAT,NA,100\n",
        )
        result = load_returns(path)
        assert not result.rows
        assert "invalid integer" in result.rejects[0].reason

    def test_tab_delimited_detection(self, tmp_path):
        path = write_file(
            tmp_path / "r.tsv",
            SCHEMA_HEADER.replace(",", "\t") + "\n" + "1976\tAZ\tDEMOCRAT\t40\t100\n",
        )
        result = load_returns(path)
        assert len(result.rows) == 1
        assert result.rows[0].candidate_votes == 40

    def test_missing_column_is_schema_error(self, tmp_path):
        path = write_file(tmp_path / "r.csv", "year,state_po,candidatevotes,totalvotes\n")
        with pytest.raises(SchemaError, match="party_simplified"):
            load_returns(path)

    def test_unreadable_file_is_io_error(self, tmp_path):
        with pytest.raises(OSError):
            load_returns(tmp_path / "missing.csv")

    def test_blank_party_kept(self, tmp_path):
        path = write_file(
            tmp_path / "r.csv",
            SCHEMA_HEADER + "\n1976,AZ,,25,100\n",
        )
        result = load_returns(path)
        assert result.rows[0].party == ""

    def test_synthetic_fixture_parses_clean(self, synthetic_returns_csv):
        result = load_returns(synthetic_returns_csv)
        assert result.rejects == []
        assert len(result.rows) > 0

    def test_extra_columns_and_quoted_fields(self, tmp_path):
        # the public file carries many more columns; required ones are
        # picked by name, quoted fields with commas must survive
        path = write_file(
            tmp_path / "r.csv",
            "year,state,state_po,office,candidate,party_detailed,"
            "candidatevotes,totalvotes,party_simplified\n"
            '1976,ARIZONA,AZ,US SENATE,"DOE, JANE",DEMOCRAT,400,1000,DEMOCRAT\n'
            '1976,ARIZONA,AZ,US SENATE,"ROE, RON",REPUBLICAN,600,1000,REPUBLICAN\n',
        )
        result = load_returns(path)
        assert len(result.rows) == 2 and not result.rejects
        assert result.rows[0].candidate_votes == 400
        assert result.rows[1].party == "REPUBLICAN"


class TestAggregate:
    def test_single_state_single_year(self, tmp_path):
        path = write_file(
            tmp_path / "r.csv",
            SCHEMA_HEADER + "\n"
            "1976,AZ,DEMOCRAT,60,100\n"
            "1976,AZ,REPUBLICAN,30,100\n"
            "1976,AZ,GREEN,10,100\n",
        )
        matrix = aggregate(load_returns(path).rows)
        assert matrix.years == (1976,)
        np.testing.assert_allclose(matrix.values[0], [0.6, 0.3, 0.1], atol=1e-15)

    def test_two_states_pool_votes(self, tmp_path, caplog):
        path = write_file(
            tmp_path / "r.csv",
            SCHEMA_HEADER + "\n"
            "1976,AZ,DEMOCRAT,60,100\n"
            "1976,AZ,REPUBLICAN,40,100\n"
            "1976,CA,DEMOCRAT,40,100\n"
            "1976,CA,REPUBLICAN,60,100\n",
        )
        with caplog.at_level(logging.WARNING):
            matrix = aggregate(load_returns(path).rows)
        assert matrix.values[0, 0] == pytest.approx(0.5, abs=1e-9)
        # OTHER got no votes: floored at a tiny epsilon and renormalized
        assert 0.0 < matrix.values[0, 2] < 1e-8
        assert matrix.values[0].sum() == pytest.approx(1.0, abs=1e-12)
        assert any("flooring" in message for message in caplog.messages)

    def test_unmapped_labels_fall_into_other(self, tmp_path):
        path = write_file(
            tmp_path / "r.csv",
            SCHEMA_HEADER + "\n"
            "1976,AZ,DEMOCRAT,50,100\n"
            "1976,AZ,WRITE-IN,25,100\n"
            "1976,AZ,,25,100\n",
        )
        matrix = aggregate(load_returns(path).rows)
        np.testing.assert_allclose(matrix.values[0], [0.5, 1e-9, 0.5], atol=1e-8)

    def test_rows_sum_to_one_before_flooring(self, synthetic_returns_csv):
        matrix = aggregate(load_returns(synthetic_returns_csv).rows)
        np.testing.assert_allclose(matrix.values.sum(axis=1), 1.0, atol=1e-12)

    def test_synthetic_fixture_has_23_biennial_cycles(self, synthetic_returns_csv):
        matrix = aggregate(load_returns(synthetic_returns_csv).rows)
        assert matrix.n_cycles == 23
        assert matrix.years == tuple(range(1976, 2021, 2))

    def test_vote_conservation(self, synthetic_returns_csv):
        rows = load_returns(synthetic_returns_csv).rows
        per_year_total = {}
        for row in rows:
            per_year_total[row.year] = per_year_total.get(row.year, 0) + row.candidate_votes
        matrix = aggregate(rows)
        # proportions are mapped-party sums over the summed candidate votes,
        # so reconstructing the numerators must recover every vote
        for year, proportions in zip(matrix.years, matrix.values):
            reconstructed = proportions.sum() * per_year_total[year]
            assert reconstructed == pytest.approx(per_year_total[year], rel=1e-12)

    def test_bad_mapping_target_rejected(self):
        with pytest.raises(ConfigError):
            aggregate([], party_mapping={"DEMOCRAT": "BLUE"})

    def test_no_rows_is_aggregation_error(self):
        with pytest.raises(AggregationError):
            aggregate([])

    def test_deterministic_csv_bytes(self, synthetic_returns_csv):
        first = aggregate(load_returns(synthetic_returns_csv).rows).to_csv()
        second = aggregate(load_returns(synthetic_returns_csv).rows).to_csv()
        assert first == second


class TestProportionMatrix:
    def test_csv_roundtrip_is_stable(self, synthetic_returns_csv):
        matrix = aggregate(load_returns(synthetic_returns_csv).rows)
        text = matrix.to_csv()
        parsed = ProportionMatrix.from_csv(text)
        assert parsed.years == matrix.years
        np.testing.assert_allclose(parsed.values, matrix.values, rtol=1e-11)
        # 12 significant digits are idempotent: a second serialization is
        # byte-identical to the first
        assert parsed.to_csv() == text

    def test_header_enforced(self):
        with pytest.raises(SchemaError):
            ProportionMatrix.from_csv("a,b,c,d\n1976,0.5,0.4,0.1\n")

    def test_three_columns_enforced(self):
        with pytest.raises(DomainError):
            ProportionMatrix(years=(1976,), values=np.array([[0.5, 0.5]]))


class TestToWeightedDataset:
    def test_unit_weights(self, synthetic_returns_csv):
        matrix = aggregate(load_returns(synthetic_returns_csv).rows)
        data = to_weighted_dataset(matrix)
        assert data.observations.shape == (23, 3)
        assert data.total_weight == pytest.approx(23.0)
        np.testing.assert_array_equal(data.weights, np.ones(23))

    def test_empty_matrix_rejected(self):
        empty = ProportionMatrix(years=(), values=np.empty((0, 3)))
        with pytest.raises(DomainError):
            to_weighted_dataset(empty)
