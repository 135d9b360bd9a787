import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontweave.grid import (
    INF,
    EmptyBandError,
    GridSpec,
    MarchState,
    NarrowBand,
    SurfacePoint,
    grid_set,
    nb_extract_min,
    project_space,
    project_time,
)


def pt(i, j, psi, **kw):
    return SurfacePoint(i, j, 0.1 * i, 0.1 * j, psi, **kw)


def small_state(n=4):
    return MarchState(GridSpec(0.0, 0.0, 0.1, n, 1.0))


@pytest.mark.parametrize(
    "xyz, want",
    [((0.1, 0.2, 0.5), (0.1, 0.2)), ((0.0, 0.0, INF), (0.0, 0.0)), ((-0.25, 0.0, 0.3), (-0.25, 0.0))],
)
def test_project_space(xyz, want):
    p = SurfacePoint(0, 0, xyz[0], xyz[1], xyz[2])
    assert project_space(p) == want
    assert project_time(p) == xyz[2]


def test_extract_min_of_two():
    s = small_state()
    s.narrow_band.push(pt(1, 0, 0.2))
    s.narrow_band.push(pt(0, 0, 0.1))
    assert (nb_extract_min(s).i, s.narrow_band.peek().i) == (0, 1)


def test_extract_min_tie_breaks_on_indices():
    s = small_state()
    s.narrow_band.push(pt(1, 0, 0.1))
    s.narrow_band.push(pt(0, 0, 0.1))
    p = nb_extract_min(s)
    assert (p.i, p.j) == (0, 0)


def test_extract_singleton_empties_band():
    s = small_state()
    p = pt(2, 3, 0.4)
    s.narrow_band.push(p)
    assert nb_extract_min(s) is p
    assert not s.narrow_band
    assert s.grid_fn[2, 3] == 0.4
    with pytest.raises(EmptyBandError):
        nb_extract_min(s)


def test_grid_set_keeps_latest():
    s = small_state()
    assert s.grid_fn[0, 0] == INF
    grid_set(s, 0, 0, 0.1)
    assert s.grid_fn[0, 0] == 0.1
    grid_set(s, 0, 0, 0.4)
    assert s.grid_fn[0, 0] == 0.4


def test_push_replaces_same_cell():
    band = NarrowBand()
    band.push(pt(1, 1, 0.5))
    band.push(pt(1, 1, 0.2))
    assert len(band) == 1 and band.peek().psi == 0.2
    band.push(pt(1, 1, 0.7))
    assert band.get((1, 1)).psi == 0.7
    assert band.remove((1, 1)).psi == 0.7 and (1, 1) not in band


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6), st.floats(0, 10)), min_size=1, max_size=60))
def test_band_pops_in_key_order(entries):
    band = NarrowBand()
    latest = {}
    for i, j, psi in entries:
        band.push(pt(i, j, psi))
        latest[(i, j)] = psi
    got = [band.pop().key for _ in range(len(band))]
    assert got == sorted((psi, i, j) for (i, j), psi in latest.items())


def test_orient_from_normal():
    assert pt(0, 0, 0.1, normal3=(1.0, 0.0, -1.0)).orient == 1
    assert pt(0, 0, 0.1, normal3=(1.0, 0.0, 1.0)).orient == -1
    with pytest.raises(ValueError):
        pt(0, 0, 0.1, source="bogus")


def test_grid_spec_validation():
    g = GridSpec.square(-1.0, 1.0, 20, 1.0)
    assert g.n == 21 and math.isclose(g.h, 0.1)
    assert np.isclose(g.xs[-1], 1.0)
    with pytest.raises(ValueError):
        GridSpec(0.0, 0.0, -0.1, 5, 1.0)
