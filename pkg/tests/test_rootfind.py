import numpy as np
import pytest
from hypothesis import given, strategies as st

from tripledeck.criterion import NearZeroContourError
from tripledeck.phi_infinity import eigenfunction, phi_infinity
from tripledeck.rootfind import (CachedFunction, RootBox, count_zeros, find_root_boxes, find_roots, muller,
                                 rectangle_winding)

BOX = (complex(0, 1), complex(2, 3))


def test_box_validation():
    with pytest.raises(ValueError):
        RootBox(complex(0, 0), complex(1, 1))
    with pytest.raises(ValueError):
        RootBox(complex(1, 1), complex(0, 2))
    b = RootBox(complex(0, 1), complex(2, 3))
    assert (b.width, b.height, b.center) == (2, 2, complex(1, 2))
    kids = b.quadrants(1.0, 2.0)
    assert sum(k.width * k.height for k in kids) == pytest.approx(4.0)


def test_count_simple_and_double():
    assert count_zeros(lambda m: m - (1 + 2j), BOX) == 1
    assert count_zeros(lambda m: (m - (1 + 2j)) ** 2, BOX) == 2
    assert count_zeros(lambda m: -1.0 + 0j, BOX) == 0


def test_couette_phi_has_no_zeros(flat):
    assert count_zeros(lambda m: phi_infinity(flat, m), (complex(-5, 0.01), complex(5, 5))) == 0


def test_count_on_boundary_zero_fails():
    with pytest.raises(NearZeroContourError):
        count_zeros(lambda m: m - 1j, BOX)


def test_rectangle_winding_any_half_plane():
    assert rectangle_winding(lambda z: z * z, complex(-1, -1), complex(1, 1)) == 2


def test_find_root_i():
    roots = find_roots(lambda m: m * m + 1, (complex(-1, 0.5), complex(1, 1.5)))
    assert len(roots) == 1
    assert abs(roots[0][0] - 1j) < 1e-10
    assert roots[0][1] <= 1e-10


def test_multiple_roots_with_multiplicity():
    f = lambda m: (m - (1 + 2j)) ** 2 * (m - (0.3 + 1.4j))
    boxes = find_root_boxes(f, BOX)
    assert sum(b.zero_count for b in boxes) == count_zeros(f, BOX) == 3
    roots = [r for b in boxes for r, _ in b.refined_roots]
    assert len(roots) == 3
    assert sum(abs(r - (1 + 2j)) < 1e-4 for r in roots) == 2


@given(re=st.lists(st.floats(0.05, 1.95), min_size=1, max_size=4),
       im=st.lists(st.floats(1.05, 2.95), min_size=4, max_size=4))
def test_count_refine_consistency(re, im):
    zs = [complex(x, y) for x, y in zip(re, im)]
    if min((abs(a - b) for i, a in enumerate(zs) for b in zs[i + 1:]), default=1.0) < 1e-3:
        return
    f = lambda m: np.prod([m - z for z in zs])
    roots = find_roots(f, BOX, tol=1e-12)
    assert len(roots) == count_zeros(f, BOX) == len(zs)
    for z in zs:
        assert min(abs(r - z) for r, _ in roots) < 1e-6
    assert all(r.imag > 0 for r, _ in roots)


def test_muller():
    z, res, ok = muller(lambda z: z ** 3 - 2, 1.0, 1.2, 1.4)
    assert ok and abs(z - 2 ** (1 / 3)) < 1e-10 and isinstance(z, complex)
    z, res, ok = muller(lambda z: 1.0 + 0 * z, 0.0, 1.0, 2.0, max_iter=5)
    assert not ok


def test_cached_function():
    calls = []
    f = CachedFunction(lambda z: calls.append(z) or z)
    f(1j), f(1j), f(2j)
    assert calls == [1j, 2j]


def test_example1_has_no_unstable_root(ex1):
    assert find_roots(lambda m: phi_infinity(ex1, m), (complex(1e-3, 0.05), complex(8, 8))) == []


def test_example2_root(ex2, mu_inf):
    roots = find_roots(lambda m: phi_infinity(ex2, m), (complex(1e-3, 0.05), complex(8, 8)))
    assert len(roots) == 1
    mu, res = roots[0]
    assert mu.imag > 0 and res <= 1e-10
    assert abs(mu - mu_inf) < 1e-9
    ef = eigenfunction(ex2, mu, [0.0, 1.0, 1e6])
    assert abs(ef.phi[0]) < 1e-6
    assert abs(ef.far_field_value + 1) < 1e-4
