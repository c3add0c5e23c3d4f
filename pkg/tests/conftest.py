"""Shared test configuration."""

import gc

import pytest


@pytest.fixture(autouse=True)
def _collect_dropped_contexts():
    # Engine contexts are cyclic (context <-> cached relations), so dropped
    # ones wait for the generational collector; several heavyweight tests in
    # a row can pile up hundreds of MB between passes.  Collect eagerly.
    yield
    gc.collect()
