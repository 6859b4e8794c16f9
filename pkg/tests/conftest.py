import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hairforge.fixtures import bare_mesh, make_head_mesh  # noqa: E402


@pytest.fixture(scope="session")
def head_mesh():
    return make_head_mesh()


@pytest.fixture(scope="session")
def no_collision_mesh():
    return bare_mesh()


@pytest.fixture(scope="session")
def fixture_db_dir(tmp_path_factory, head_mesh):
    """Small on-disk copy of the style database (reduced strand counts)."""
    from hairforge.fixtures import make_fixture_database

    directory = tmp_path_factory.mktemp("hairdb")
    make_fixture_database(directory, head_mesh, seed=0, strand_scale=0.08)
    return directory
