import json

import pytest

from manincert.lmfdb import (
    CatalogEntry,
    Catalog,
    CatalogUnavailableError,
    LabelError,
    coverage_check,
    fixture_entries,
    fixture_manifest,
    parse_label,
    read_cache,
    record_from_entry,
    write_cache,
)


def entry(label="11.a2", conductor=11, ainvs=(0, -1, 1, -10, -20)):
    return CatalogEntry(
        label=label, conductor=conductor, ainvs=tuple(ainvs),
        optimality_flag=True, modular_degree=1, torsion_order=5,
        kodaira=None, source="fixture", fetched_at=0.0)


def test_parse_label():
    assert parse_label("530.a1") == (530, "a", 1)
    assert parse_label("11.ba12") == (11, "ba", 12)
    for bad in ("11a2", "11.2a", "x.a1", "11.a"):
        with pytest.raises(LabelError):
            parse_label(bad)


def test_cache_roundtrip(tmp_path):
    path = str(tmp_path / "cache.jsonl")
    entries = {"11.a2": entry(), "37.a1": entry("37.a1", 37, (0, 0, 1, -1, 0))}
    write_cache(path, entries)
    back = read_cache(path)
    assert back == entries


def test_cache_corrupt_line_skipped(tmp_path, caplog):
    path = str(tmp_path / "cache.jsonl")
    good = entry().to_json()
    with open(path, "w") as fh:
        fh.write(good + "\n")
        fh.write("{this is not json\n")
        fh.write(entry("37.a1", 37, (0, 0, 1, -1, 0)).to_json() + "\n")
    back = read_cache(path)
    assert set(back) == {"11.a2", "37.a1"}


def test_cache_last_write_wins(tmp_path):
    path = str(tmp_path / "cache.jsonl")
    e1 = entry()
    e2 = CatalogEntry(**{**e1.__dict__, "torsion_order": 99})
    with open(path, "w") as fh:
        fh.write(e1.to_json() + "\n")
        fh.write(e2.to_json() + "\n")
    back = read_cache(path)
    assert back["11.a2"].torsion_order == 99


def test_fixture_snapshot_loads():
    entries = fixture_entries()
    assert "11.a2" in entries
    assert entries["11.a2"].ainvs == (0, -1, 1, -10, -20)
    assert "530.a1" in entries
    man = fixture_manifest()
    assert man["max_conductor"] >= 200


def test_fixture_530a1_has_odd_torsion():
    e = fixture_entries()["530.a1"]
    assert e.torsion_order % 2 == 1


def test_coverage_check():
    coverage_check(200)
    with pytest.raises(CatalogUnavailableError):
        coverage_check(10 ** 6)


def test_fetch_range_deterministic(tmp_path):
    cat = Catalog()
    r1 = cat.fetch_range(40)
    r2 = cat.fetch_range(40)
    assert [e.label for e in r1] == [e.label for e in r2]
    assert any(e.label == "30.a8" for e in r1)
    assert cat.fetch_range(0) == []


def test_fetch_range_writes_cache(tmp_path):
    path = str(tmp_path / "c.jsonl")
    cat = Catalog(cache_path=path)
    got = cat.fetch_range(20)
    assert read_cache(path).keys() == {e.label for e in got}


def test_fetch_curve():
    cat = Catalog()
    e = cat.fetch_curve("11.a2")
    assert e.conductor == 11
    with pytest.raises(LabelError):
        cat.fetch_curve("malformed")
    with pytest.raises(LabelError):
        cat.fetch_curve("999999.a1")


def test_offline_remote_disabled():
    cat = Catalog(offline=True, endpoint="http://example.invalid")
    with pytest.raises(CatalogUnavailableError):
        cat._remote_lines("x")


def test_entry_to_record_consistency():
    rec = record_from_entry(fixture_entries()["11.a2"])
    assert rec.conductor == 11 and rec.is_optimal
    assert rec.model.ainvs == (0, -1, 1, -10, -20)
    # discriminant support divides the recorded conductor
    from manincert.modsym import factorize

    for p in factorize(rec.model.delta_min):
        assert rec.conductor % p == 0


def test_two_torsion_agrees_with_ingested_torsion_parity():
    from manincert.elliptic import two_torsion_rank

    for e in fixture_entries().values():
        if e.conductor > 120:
            continue
        rec = record_from_entry(e)
        assert (two_torsion_rank(rec.model) == 0) == (e.torsion_order % 2 == 1), \
            e.label


def test_all_fixture_discriminant_supports():
    from manincert.modsym import factorize

    for e in fixture_entries().values():
        if e.conductor > 60:
            continue
        rec = record_from_entry(e)
        for p in factorize(rec.model.delta_min):
            assert e.conductor % p == 0, e.label
