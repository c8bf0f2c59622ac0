import json
import shutil
from pathlib import Path

import pytest

from webverbs.mockweb import MockWeb
from webverbs.registry import load_registry
from webverbs.suite import MANIFESTS, SITE_PACK, SUITE_DIR

TESTS = Path(__file__).parent
GOLDEN = TESTS / "golden"
CONFORMANCE = TESTS / "conformance"


@pytest.fixture(scope="session")
def reg():
    return load_registry([MANIFESTS])


@pytest.fixture(scope="session")
def pack_sites():
    # parsed once; MockWeb only adds per-session state on top
    return MockWeb.from_pack(SITE_PACK).sites


@pytest.fixture
def world(pack_sites):
    return MockWeb(list(pack_sites.values()))


@pytest.fixture
def pack_copy(tmp_path):
    """A writable copy of the bundled site pack."""
    dst = tmp_path / "pack"
    shutil.copytree(SITE_PACK, dst)
    return dst


def edit_site(pack_dir: Path, site_id: str, fn):
    path = pack_dir / f"{site_id}.site.json"
    doc = json.loads(path.read_text())
    fn(doc)
    path.write_text(json.dumps(doc, indent=1))


@pytest.fixture(scope="session")
def suite_dir():
    return SUITE_DIR


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
