import os
import threading

import pandas as pd

from utils import helpers
from utils.helpers import ensure_directory_exists, write_table


def test_ensure_directory_creates_nested_path(tmp_path):
    target = str(tmp_path / "runs" / "spectra")
    assert ensure_directory_exists(target)
    assert os.path.isdir(target)
    assert not ensure_directory_exists(target)


def test_ensure_directory_ignores_empty_path():
    assert not ensure_directory_exists("")


def test_directory_created_concurrently_is_not_an_error(tmp_path, monkeypatch):
    target = tmp_path / "shared"
    target.mkdir()
    real_isdir = os.path.isdir
    calls = []

    def stale_isdir(path):
        # Another writer created the directory after the existence check
        calls.append(path)
        return False if len(calls) == 1 else real_isdir(path)

    monkeypatch.setattr(helpers.os.path, "isdir", stale_isdir)
    ensure_directory_exists(str(target))
    assert target.is_dir()


def test_parallel_table_writes_into_fresh_directory(tmp_path):
    frame = pd.DataFrame({"re": [1.0], "im": [0.0]})
    out_dir = tmp_path / "tables"
    errors = []

    def write(index):
        try:
            write_table(frame, str(out_dir / f"table_{index}.csv"))
        except OSError as exc:
            errors.append(exc)

    threads = [threading.Thread(target=write, args=(i,)) for i in range(8)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert errors == []
    assert len(list(out_dir.iterdir())) == 8
