import numpy as np
import pytest

from vpbias.data_model import (
    CATEGORY_GROUPS,
    DimensionSchema,
    FeatureTable,
    default_schema,
    load_feature_table,
    load_labels,
    load_schema,
    load_vantage_point_set,
    parse_asn_list,
)
from vpbias.complexity import default_score_table
from vpbias.errors import (
    DuplicateAsnError,
    EmptySetError,
    MalformedCsvError,
    MalformedInputError,
    TypeMismatchError,
    UnknownLabelError,
)

from conftest import make_random_table


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadFeatureTable:
    def test_minimal_categorical(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,continent\n1,EU\n2,AS\n")
        table = load_feature_table(path)
        assert len(table) == 2
        assert table.dimension("continent").kind == "categorical"
        assert table.cell(1, "continent") == "EU"

    def test_duplicate_asn(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,continent\n1,EU\n1,AS\n")
        with pytest.raises(DuplicateAsnError):
            load_feature_table(path)

    def test_type_mismatch_with_schema(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,num_neighbors\n1,abc\n")
        schema = [DimensionSchema("num_neighbors", "numerical", "Topology")]
        with pytest.raises(TypeMismatchError):
            load_feature_table(path, schema)

    def test_bad_header(self, tmp_path):
        path = write(tmp_path, "t.csv", "id,continent\n1,EU\n")
        with pytest.raises(MalformedCsvError):
            load_feature_table(path)

    def test_bad_row_arity(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,a,b\n1,x\n")
        with pytest.raises(MalformedCsvError):
            load_feature_table(path)

    def test_non_integer_asn(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,a\nfoo,x\n")
        with pytest.raises(MalformedCsvError):
            load_feature_table(path)

    def test_schema_column_mismatch(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,a\n1,x\n")
        schema = [DimensionSchema("b", "categorical", "Location")]
        with pytest.raises(MalformedCsvError):
            load_feature_table(path, schema)

    def test_empty_cells_become_missing(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,a,b\n1,,2.5\n2,x,\n")
        table = load_feature_table(path)
        assert table.cell(1, "a") is None
        assert table.cell(2, "b") is None
        assert table.cell(1, "b") == 2.5

    def test_inference_numeric_iff_all_parse(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,a,b\n1,1.5,1\n2,,x\n")
        table = load_feature_table(path)
        assert table.dimension("a").kind == "numerical"
        assert table.dimension("b").kind == "categorical"

    def test_inference_deterministic(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,a,b\n1,1.5,y\n2,2.0,x\n")
        assert load_feature_table(path).schema == load_feature_table(path).schema

    def test_inference_borrows_default_categories(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,continent,mystery\n1,EU,5\n")
        table = load_feature_table(path)
        assert table.dimension("continent").category == "Location"
        assert table.dimension("mystery").category == "NetworkType"

    def test_loading_does_not_mutate_file(self, tmp_path):
        path = write(tmp_path, "t.csv", "asn,a\n1,x\n2,y\n")
        before = path.read_bytes()
        load_feature_table(path)
        assert path.read_bytes() == before


class TestRoundTrip:
    def test_csv_round_trip_identical(self, tmp_path):
        rng = np.random.default_rng(3)
        table = make_random_table(rng, 40)
        out = tmp_path / "rt.csv"
        table.to_csv(out)
        reloaded = load_feature_table(out, table.schema)
        assert reloaded == table


class TestDefaultSchema:
    def test_22_dimensions(self):
        schema = default_schema()
        assert len(schema) == 22
        assert len({d.name for d in schema}) == 22

    def test_category_sizes(self):
        by_cat = {}
        for d in default_schema():
            by_cat.setdefault(d.category, []).append(d.name)
        assert len(by_cat["Location"]) == 3
        assert len(by_cat["NetworkSize"]) == 6
        assert len(by_cat["Topology"]) == 4
        assert len(by_cat["IxpRelated"]) == 3
        assert len(by_cat["NetworkType"]) == 6
        assert set(by_cat) == set(CATEGORY_GROUPS)

    def test_loadable_via_file_loader(self, tmp_path):
        rows = "name,kind,category,bin_count\nfoo,numerical,Topology,5\n"
        path = write(tmp_path, "s.csv", rows)
        schema = load_schema(path)
        assert schema[0].bin_count == 5


class TestVantagePointSets:
    def test_resolution(self, tmp_path):
        table = FeatureTable(
            [DimensionSchema("a", "categorical", "Location")],
            {1: ["x"], 2: ["y"], 3: ["z"]},
        )
        vps, warn = load_vantage_point_set(write(tmp_path, "v.txt", "1\n2\n"), table)
        assert vps.members == {1, 2} and warn == []

        vps, warn = load_vantage_point_set(write(tmp_path, "w.txt", "1\n99\n"), table)
        assert vps.members == {1} and warn == [99]

        with pytest.raises(EmptySetError):
            load_vantage_point_set(write(tmp_path, "x.txt", "99\n"), table)

    def test_csv_form(self, tmp_path):
        table = FeatureTable(
            [DimensionSchema("a", "categorical", "Location")], {1: ["x"], 2: ["y"]}
        )
        path = write(tmp_path, "v.csv", "asn,extra\n1,foo\n2,bar\n")
        vps, _ = load_vantage_point_set(path, table)
        assert vps.members == {1, 2}

    def test_malformed(self, tmp_path):
        with pytest.raises(MalformedInputError):
            parse_asn_list(write(tmp_path, "v.txt", "foo\n"))
        with pytest.raises(MalformedInputError):
            parse_asn_list(write(tmp_path, "w.txt", "-3\n"))
        with pytest.raises(MalformedInputError):
            parse_asn_list(write(tmp_path, "y.txt", "\n"))


class TestLabels:
    def test_grouping(self, tmp_path):
        path = write(
            tmp_path, "l.csv", "asn,label\n1,Personal-use\n1,Education\n"
        )
        loaded = load_labels(path)
        assert len(loaded) == 1
        assert loaded[0].labels == {"Personal-use", "Education"}

    def test_two_assignments(self, tmp_path):
        path = write(
            tmp_path, "l.csv", "asn,label\n1,Personal-use\n2,State-owned\n"
        )
        assert len(load_labels(path)) == 2

    def test_unknown_label_validation(self, tmp_path):
        path = write(tmp_path, "l.csv", "asn,label\n1,NoSuchLabel\n")
        with pytest.raises(UnknownLabelError):
            load_labels(path, default_score_table())

    def test_bad_header(self, tmp_path):
        path = write(tmp_path, "l.csv", "asn,tag\n1,x\n")
        with pytest.raises(MalformedCsvError):
            load_labels(path)


class TestFeatureTableValidation:
    def test_rejects_nonpositive_asn(self):
        with pytest.raises(ValueError):
            FeatureTable([DimensionSchema("a", "categorical", "Location")], {0: ["x"]})

    def test_rejects_bad_arity(self):
        with pytest.raises(ValueError):
            FeatureTable([DimensionSchema("a", "categorical", "Location")], {1: ["x", "y"]})

    def test_rejects_nonfinite_numeric(self):
        with pytest.raises(TypeMismatchError):
            FeatureTable(
                [DimensionSchema("a", "numerical", "Location")], {1: [float("inf")]}
            )

    def test_schema_validation(self):
        with pytest.raises(ValueError):
            DimensionSchema("a", "weird", "Location")
        with pytest.raises(ValueError):
            DimensionSchema("a", "numerical", "Nowhere")
