import pytest

from multispec import (
    CorruptEntry,
    DuplicateId,
    SpectrumFingerprint,
    catalog_add,
    catalog_query,
    catalog_scan_collisions,
    entry_for_map,
    fingerprint,
    lattes_mult2,
    rational_map_from_text,
    spectrum,
)
from multispec.catalog import HEADER, make_entry
from multispec.parser import format_map

STAMP = "2026-08-08T00:00:00+00:00"


@pytest.fixture
def store(tmp_path):
    return tmp_path / "fingerprints.cat"


def fp_of(text, max_period):
    return fingerprint(spectrum(rational_map_from_text(text), max_period))


class TestAdd:
    def test_add_creates_store_with_header(self, store):
        entry = entry_for_map("z^2", 2, created_at=STAMP)
        eid = catalog_add(store, entry)
        lines = store.read_text().splitlines()
        assert lines[0] == HEADER
        assert len(lines) == 2
        assert eid == entry.id

    def test_add_is_idempotent(self, store):
        entry = entry_for_map("z^2", 2, created_at=STAMP)
        first = catalog_add(store, entry)
        second = catalog_add(store, entry)
        assert first == second
        assert len(store.read_text().splitlines()) == 2

    def test_add_is_append_only(self, store):
        catalog_add(store, entry_for_map("z^2", 2, created_at=STAMP))
        before = store.read_text()
        catalog_add(store, entry_for_map("z^3", 2, created_at=STAMP))
        after = store.read_text()
        assert after.startswith(before)

    def test_duplicate_id_with_different_payload(self, store):
        entry = entry_for_map("z^2", 2, created_at=STAMP)
        catalog_add(store, entry)
        clashing = make_entry(
            entry.map_text, entry.degree, entry.max_period,
            SpectrumFingerprint(int(entry.digest, 16), entry.quantum),
            [[(re, im) for re, im in level] for level in entry.levels],
            tags=("different",), created_at=STAMP,
        )
        assert clashing.id == entry.id
        with pytest.raises(DuplicateId):
            catalog_add(store, clashing)

    def test_unwritable_path_raises_oserror(self, tmp_path):
        target = tmp_path / "missing-dir" / "store.cat"
        with pytest.raises(OSError):
            catalog_add(target, entry_for_map("z^2", 2, created_at=STAMP))


class TestQuery:
    def test_round_trip(self, store):
        entry = entry_for_map("z^2", 2, created_at=STAMP)
        catalog_add(store, entry)
        hits = catalog_query(store, fp_of("z^2", 2), 2, 2)
        assert len(hits) == 1
        assert hits.entries[0].map_text == "z^2"

    def test_unseen_fingerprint(self, store):
        catalog_add(store, entry_for_map("z^2", 2, created_at=STAMP))
        hits = catalog_query(store, fp_of("z^3", 2), 3, 2)
        assert len(hits) == 0

    def test_elementary_pair_collision(self, store):
        for text in ("z^4+1", "(z^2+1)^2"):
            catalog_add(store, entry_for_map(text, 3, created_at=STAMP))
        hits = catalog_query(store, fp_of("z^4+1", 3), 4, 3)
        assert sorted(e.map_text for e in hits) == ["z^4+1", "z^4+2*z^2+1"]

    def test_stored_entry_recomputes_to_same_fingerprint(self, store):
        entry = entry_for_map("(z^2+1)/(z-1)", 2, created_at=STAMP)
        catalog_add(store, entry)
        hits = catalog_query(store, fp_of("(z^2+1)/(z-1)", 2), 2, 2)
        stored = hits.entries[0]
        recomputed = entry_for_map(stored.map_text, stored.max_period,
                                   stored.quantum, created_at=STAMP)
        assert recomputed.digest == stored.digest
        assert recomputed.id == stored.id


class TestScan:
    def test_power_maps_do_not_collide(self, store):
        for text in ("z^2", "z^3"):
            catalog_add(store, entry_for_map(text, 2, created_at=STAMP))
        assert catalog_scan_collisions(store).groups == ()

    def test_elementary_pair_one_group(self, store):
        for text in ("z^4+1", "(z^2+1)^2", "z^2"):
            catalog_add(store, entry_for_map(text, 3 if "4" in text or "(" in text else 3,
                                             created_at=STAMP))
        groups = catalog_scan_collisions(store).groups
        assert len(groups) == 1
        assert len(groups[0]) == 2

    def test_lattes_family_groups_as_five(self, store):
        for params in ((1, 0), (0, 1), (-1, 0), (2, 1), (1, -1)):
            text = format_map(lattes_mult2(params))
            catalog_add(store, entry_for_map(text, 2, created_at=STAMP))
        groups = catalog_scan_collisions(store).groups
        assert [len(g) for g in groups] == [5]

    def test_corrupt_final_line_skipped_with_report(self, store):
        for text in ("z^4+1", "(z^2+1)^2"):
            catalog_add(store, entry_for_map(text, 3, created_at=STAMP))
        with open(store, "a", encoding="utf-8") as fh:
            fh.write('{"id": "0123456789abcdef", "map_text爆": truncated')
        result = catalog_scan_collisions(store)
        assert len(result.groups) == 1
        assert len(result.skipped) == 1
        assert result.skipped[0][0] == 4  # 1 header + 2 entries + corrupt line

    def test_unknown_fields_rejected(self, store):
        catalog_add(store, entry_for_map("z^2", 2, created_at=STAMP))
        line = store.read_text().splitlines()[1]
        doctored = line[:-1] + ',"extra":1}'
        with open(store, "a", encoding="utf-8") as fh:
            fh.write(doctored + "\n")
        result = catalog_query(store, fp_of("z^2", 2), 2, 2)
        assert len(result.entries) == 1
        assert len(result.skipped) == 1

    def test_missing_header_is_fatal(self, store):
        store.write_text("not a catalog\n")
        with pytest.raises(CorruptEntry):
            catalog_scan_collisions(store)
