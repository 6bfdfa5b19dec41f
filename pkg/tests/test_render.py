import re
from fractions import Fraction as F

import numpy as np
import pytest

from advcalc.geometry import GeometryError, GridSet, IntervalSet, parse_norm
from advcalc.morphology import MorphContext
from advcalc.render import bands_svg, layer_array, layers_ppm, render

from oracles import lattice_ball


def _band_titles(svg):
    """Interval titles per band, in band order."""
    bands = svg.split('font-size="12">')[1:]
    return [re.findall(r"<title>([^<]*)</title>", b) for b in bands]


def test_interval_bands():
    svg, suffix = render(IntervalSet([(0, 1)]), MorphContext(parse_norm("l1", 1), F(1, 2)))
    assert suffix == ".svg"
    assert _band_titles(svg) == [["[0, 1]"], ["[-1/2, 3/2]"], ["[1/2, 1/2]"]]
    # the degenerate erosion is drawn as a dot
    assert svg.count("<circle") == 1


def test_empty_set_gives_empty_bands():
    svg = bands_svg(IntervalSet(), MorphContext(parse_norm("l1", 1), 1))
    assert svg.count("<line") == 3
    assert "<rect" not in svg


def test_diamond_raster():
    pt = GridSet.from_indices([(0, 0)], dim=2)
    ctx = MorphContext(parse_norm("l1", 2), 2)
    layer = layer_array(pt, ctx)
    assert layer.shape == (7, 7)
    assert np.count_nonzero(layer) == 13
    # cells in the ring are exactly the l1 diamond minus the centre
    ring = {(i - 3, j - 3) for i, j in zip(*np.nonzero(layer == 1))}
    assert ring == lattice_ball("l1", 2) - {(0, 0)}
    assert layer[3, 3] == 2
    ppm = layers_ppm(pt, ctx)
    head = ppm.split("\n")[:3]
    assert head == ["P3", "28 28", "255"]


def test_render_is_deterministic():
    rng = np.random.default_rng(0)
    G = GridSet((0, 0), 1, rng.random((6, 6)) < 0.6)
    ctx = MorphContext(parse_norm("linf", 2), 1)
    assert render(G, ctx) == render(G, ctx)


def test_dimension_errors():
    cube = GridSet.from_indices([(0, 0, 0)], dim=3)
    with pytest.raises(GeometryError, match="1-D and 2-D"):
        render(cube, MorphContext(parse_norm("l1", 3), 1))
    with pytest.raises(GeometryError):
        render(GridSet.from_indices([(0,)], dim=1), MorphContext(parse_norm("l1", 1), 1))
