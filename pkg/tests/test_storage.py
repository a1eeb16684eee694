import json
import threading

import pytest

from acdc.errors import StorageUnavailable
from acdc.storage import FileStore, MemoryStore, open_store


@pytest.fixture(params=["memory", "file"])
def store(request, tmp_path):
    if request.param == "memory":
        return MemoryStore()
    return FileStore(tmp_path / "records.json")


def test_put_get_delete(store):
    assert store.get("a") is None
    store.put("a", {"x": 1})
    assert store.get("a") == {"x": 1}
    assert "a" in store
    assert store.delete("a") is True
    assert store.get("a") is None
    assert store.delete("a") is False


def test_items_and_len(store):
    for i in range(5):
        store.put(f"k{i}", {"i": i})
    assert len(store) == 5
    assert sorted(k for k, _ in store.items()) == [f"k{i}" for i in range(5)]


def test_records_are_copied_on_read(store):
    store.put("a", {"x": 1})
    rec = store.get("a")
    rec["x"] = 99
    assert store.get("a") == {"x": 1}


def test_file_store_survives_reopen(tmp_path):
    path = tmp_path / "s.json"
    first = FileStore(path)
    first.put("a", {"n": 1})
    first.put("b", {"n": 2})
    first.delete("a")

    again = FileStore(path)
    assert again.get("a") is None
    assert again.get("b") == {"n": 2}


def test_file_store_ignores_leftover_tmp_file(tmp_path):
    # A crash between writing the temp file and the rename leaves a .tmp
    # behind; the snapshot in place must still win on reload.
    path = tmp_path / "s.json"
    store = FileStore(path)
    store.put("a", {"n": 1})
    (tmp_path / "s.json.tmp").write_text('{"records": {"a": {"n": "torn', encoding="utf-8")

    again = FileStore(path)
    assert again.get("a") == {"n": 1}


def test_file_store_corrupt_snapshot_raises(tmp_path):
    path = tmp_path / "s.json"
    path.write_text("{definitely not json", encoding="utf-8")
    with pytest.raises(StorageUnavailable):
        FileStore(path)


def test_file_store_snapshot_is_valid_json_after_each_mutation(tmp_path):
    path = tmp_path / "s.json"
    store = FileStore(path)
    for i in range(10):
        store.put(f"k{i}", {"i": i})
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert len(payload["records"]) == i + 1


def test_concurrent_writers_lose_nothing(store):
    def put_range(start):
        for i in range(start, start + 50):
            store.put(f"key-{i}", {"i": i})

    threads = [threading.Thread(target=put_range, args=(base,)) for base in (0, 50, 100)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(store) == 150


def test_open_store_dispatch(tmp_path):
    assert isinstance(open_store(None, "x"), MemoryStore)
    file_backed = open_store(tmp_path, "x")
    assert isinstance(file_backed, FileStore)
    file_backed.put("a", {})
    assert (tmp_path / "x.json").exists()
