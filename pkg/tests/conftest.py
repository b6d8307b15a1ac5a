import pytest

from routegame.model import GameConfig


@pytest.fixture
def both_positive_cfg() -> GameConfig:
    # xi1 = 0.4, xi2 = 0.6; cop1 = 0.2 < cop2 ~ 0.444
    return GameConfig.create(p1=0.5, p2=0.9, t1=0.1, t2=0.3, c1=0.1, c2=0.4, V=1.0, P=0.5)


@pytest.fixture
def both_negative_cfg() -> GameConfig:
    # V = 0.2 flips both net values: xi1 = -0.1, xi2 = -0.12
    return GameConfig.create(p1=0.5, p2=0.9, t1=0.2, t2=0.3, c1=0.1, c2=0.4, V=0.2, P=0.5)


@pytest.fixture
def neg_pos_cfg() -> GameConfig:
    # xi1 = -0.1 < 0 < xi2 = 0.4; s0 ~ 0.1837, cop1 = 1/3 < cop2 = 0.4
    return GameConfig.create(p1=0.3, p2=0.9, t1=0.4, t2=0.5, c1=0.1, c2=0.36, V=1.0, P=0.2)


@pytest.fixture
def pos_neg_cfg() -> GameConfig:
    # xi1 = 0.5 > 0 > xi2 = -0.1; s_low ~ 0.7653, s_high = 5/6
    return GameConfig.create(p1=0.6, p2=0.8, t1=0.1, t2=0.9, c1=0.5, c2=0.6, V=1.0, P=0.6)
