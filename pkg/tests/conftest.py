import shutil
from pathlib import Path

import pytest

from murmurlab.rational_curves import bundled_fixture, ingest


@pytest.fixture(scope="session")
def fixture_records(tmp_path_factory):
    # read a private copy so a regenerating fixture cannot change under the run
    src = bundled_fixture()
    if not src.exists():
        pytest.skip("bundled fixture missing")
    dst = tmp_path_factory.mktemp("fixture") / src.name
    shutil.copy(src, dst)
    return ingest(dst).records


@pytest.fixture(scope="session")
def rank1_path():
    return Path(bundled_fixture()).with_name("rank1_curves.jsonl.gz")
