import numpy as np
import pytest

from PyNav.Costmap import Costmap
from PyNav.Errors import GridFormatError, MissingMapError
from PyNav.Geometry import Pose2D
from PyNav.GridFile import UNOBSERVED, decode_occupancy, encode_occupancy, read_grid, write_grid
from PyNav.OccupancyGrid import OccupancyGrid


def _write_text(tmp_path, text):
    path = tmp_path / 'grid.txt'
    path.write_text(text)
    return path


def test_occupancy_round_trip(tmp_path, room_grid):
    first = tmp_path / 'first.grid'
    second = tmp_path / 'second.grid'
    write_grid(first, room_grid)
    grid = read_grid(first)
    write_grid(second, grid)

    assert isinstance(grid, OccupancyGrid)
    assert grid.shape() == room_grid.shape()
    assert grid.resolution == room_grid.resolution
    assert grid.origin == room_grid.origin
    assert np.array_equal(encode_occupancy(grid), encode_occupancy(room_grid))
    assert first.read_bytes() == second.read_bytes()


def test_header_layout(tmp_path):
    grid = OccupancyGrid(3, 2, 0.05, Pose2D(-1.5, 2.25, 0.0), [[4.0, -4.0, 0.0], [0.0, 0.0, 0.0]])
    path = tmp_path / 'tiny.grid'
    write_grid(path, grid)
    assert path.read_text().split('\n') == [
        'NAVGRID 1 occupancy',
        '3 2',
        '0.05',
        '-1.5 2.25 0.0',
        '249 5 255',
        '255 255 255',
        '',
    ]


def test_unobserved_survives(tmp_path):
    grid = OccupancyGrid(4, 1, 0.1, cells = [0.0, 1e-12, 2.0, -2.0])
    path = tmp_path / 'grid'
    write_grid(path, grid)
    back = read_grid(path)
    assert back.observed_mask().tolist() == [[False, True, True, True]]
    assert encode_occupancy(back).tolist() == [[UNOBSERVED, 127, 224, 30]]


def test_even_odds_code_is_observed():
    cells = decode_occupancy(np.array([[127, UNOBSERVED]]))
    assert cells[0, 0] != 0.0
    assert cells[0, 1] == 0.0


def test_decoding_raises_no_float_warnings():
    codes = np.array([[0, 1, 127, 253, 254, UNOBSERVED]])
    with np.errstate(invalid = 'raise', over = 'raise'):
        cells = decode_occupancy(codes)
    assert np.isfinite(cells).all()
    assert cells[0, 0] < 0.0 < cells[0, 4]
    assert cells[0, 5] == 0.0


def test_costmap_round_trip(tmp_path, rng):
    costmap = Costmap(7, 5, 0.1, Pose2D(0.3, -0.7, 0.25), rng.integers(0, 256, (5, 7)))
    path = tmp_path / 'cost.grid'
    write_grid(path, costmap)
    assert path.read_text().startswith('NAVGRID 1 cost\n')
    back = read_grid(path)
    assert isinstance(back, Costmap)
    assert np.array_equal(back.cells, costmap.cells)
    assert back.origin == costmap.origin


@pytest.mark.parametrize('text', [
    'GRIDNAV 1 occupancy\n1 1\n0.1\n0 0 0\n0\n',
    'NAVGRID 2 occupancy\n1 1\n0.1\n0 0 0\n0\n',
    'NAVGRID 1 distance\n1 1\n0.1\n0 0 0\n0\n',
    'NAVGRID 1 occupancy\n1 1\n',
    'NAVGRID 1 occupancy\n2 1\n0.1\n0 0 0\n0\n',
    'NAVGRID 1 occupancy\n1 2\n0.1\n0 0 0\n0\n',
    'NAVGRID 1 occupancy\n1 1\n0.1\n0 0 0\n256\n',
    'NAVGRID 1 occupancy\n1 1\n-0.1\n0 0 0\n0\n',
    'NAVGRID 1 occupancy\n1 1\n0.1\n0 0 nan\n0\n',
    'NAVGRID 1 occupancy\n1 1\nfine\n0 0 0\n0\n',
])
def test_malformed_files(tmp_path, text):
    with pytest.raises(GridFormatError):
        read_grid(_write_text(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(MissingMapError):
        read_grid(tmp_path / 'nowhere.grid')


def test_only_grids_are_written(tmp_path):
    with pytest.raises(GridFormatError):
        write_grid(tmp_path / 'x.grid', np.zeros((2, 2)))
