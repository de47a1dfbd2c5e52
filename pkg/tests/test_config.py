import numpy as np
import pytest

from fractalbound.config import ConfigError, load_config
from fractalbound.graphs import Family


def write(tmp_path, text):
    p = tmp_path / "cfg.ini"
    p.write_text(text)
    return p


MINIMAL = "[lattice]\nfamily = gasket_b2\ngeneration = 5\n"


def test_minimal_config_defaults(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL))
    assert cfg.lattice.family is Family.GASKET_B2
    assert cfg.lattice.generation == 5
    assert cfg.physics.j_hop == 1.0
    assert cfg.farfield.r_min == 5.0
    assert cfg.nearfield.emitter_cap == 200
    grid = cfg.physics.delta_grid()
    assert len(grid) == 10
    assert grid[0] == pytest.approx(1e-3) and grid[-1] == pytest.approx(1e-1)


def test_full_config_roundtrip(tmp_path):
    cfg = load_config(write(tmp_path, """
[lattice]
family = carpet
generation = 3
m_side = 4
n_removed = 4

[physics]
j_hop = 2.0
deltas = 1e-3, 1e-2 1e-1
coupling_rule = ratio:0.05

[farfield]
r_min = 4
step = 2
variance_width = 7

[nearfield]
r_bulk = 6
delta = 5e-4

[solver]
tol_eig = 1e-10

[output]
directory = results
formats = json
figures = off
"""))
    assert cfg.lattice.m_side == 4 and cfg.lattice.n_removed == 4
    assert np.allclose(cfg.physics.delta_grid(), [1e-3, 1e-2, 1e-1])
    assert cfg.physics.coupling(0.01) == pytest.approx(5e-4)
    assert cfg.farfield.variance_width == 7
    assert cfg.nearfield.delta == 5e-4
    assert cfg.solver.tol_eig == 1e-10
    assert cfg.output.formats == ("json",)
    assert cfg.output.figures is False


def test_coupling_rules(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL))
    assert cfg.physics.coupling(1e-4) == pytest.approx(1e-5)
    cfg.physics.coupling_rule = "fixed:2e-4"
    assert cfg.physics.coupling(0.5) == pytest.approx(2e-4)
    cfg.physics.coupling_rule = "banana:1"
    with pytest.raises(ConfigError):
        cfg.physics.coupling(0.5)


@pytest.mark.parametrize("text,fragment", [
    (MINIMAL + "[physics]\ndetla_min = 1e-3\n", "detla_min"),
    (MINIMAL + "[phsyics]\nj_hop = 1\n", "phsyics"),
    (MINIMAL + "[output]\nformats = csv, yaml\n", "yaml"),
    (MINIMAL + "[output]\nfigures = maybe\n", "maybe"),
    ("[lattice]\nfamily = moebius\n", "moebius"),
    ("[lattice]\nfamily = gasket_b2\ngeneration = 5\nbogus = 1\n", "bogus"),
    ("[physics]\nj_hop = 1\n", "lattice"),
])
def test_strict_rejection(tmp_path, text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        load_config(write(tmp_path, text))


def test_nonpositive_deltas_rejected(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL + "[physics]\ndeltas = 1e-3 0\n"))
    with pytest.raises(ConfigError):
        cfg.physics.delta_grid()
