import numpy as np
import pytest

from rabi_spectra.errors import InvalidParameters, WindowEmpty
from rabi_spectra.gfunc import Branch
from rabi_spectra.model import OnePhotonParams, Sector, TwoPhotonParams
from rabi_spectra.roots import find_spectrum, find_zeros
from rabi_spectra.sweep import gscan, sweep_coupling


def test_single_point_sweep_equals_solve():
    p = OnePhotonParams(0.4, 1.0)
    table = sweep_coupling(p, [0.4], (-1, 4))
    np.testing.assert_array_equal([r.energy for r in table], find_spectrum(p, (-1, 4)).energies())
    assert [r.level for r in table] == list(range(len(table)))


def test_rows_sorted_and_deterministic():
    grid = np.linspace(0.0, 0.6, 7)
    a = sweep_coupling(OnePhotonParams(0.0, 1.0), grid, (-1, 3))
    b = sweep_coupling(OnePhotonParams(0.0, 1.0), grid, (-1, 3), threads=3)
    assert a.rows == b.rows
    keys = [(r.g, r.energy) for r in a]
    assert keys == sorted(keys)
    np.testing.assert_allclose(a.couplings(), grid)


def test_validated_sweep():
    table = sweep_coupling(TwoPhotonParams(0.0, 1.0), [0.1, 0.3], (-1, 3), validate=True, n_f=150)
    assert table.validated and not table.failures()
    assert table.max_abs_err() < 1e-9
    assert all(r.kind != "missing" for r in table)


def test_failed_point_is_recorded():
    # a zero-width window fails at every point but the sweep still returns
    table = sweep_coupling(OnePhotonParams(0.2, 1.0), [0.2, 0.3], (1.0, 1.0))
    assert len(table.failures()) == 2
    assert all("WindowEmpty" in r.error for r in table.failures())
    assert table.counts() == {}


def test_two_photon_sweep_rejects_collapse():
    with pytest.raises(InvalidParameters):
        sweep_coupling(TwoPhotonParams(0.1, 1.0), [0.1, 0.5], (-1, 3))


def test_gscan_trace():
    p = OnePhotonParams(0.7, 0.4)
    tr = gscan(p, Sector.ONE_PLUS, (-0.5, 3.5), 801)
    assert np.all(np.diff(tr.x) > 0)
    assert tr.gaps == (0.0, 1.0, 2.0, 3.0)
    assert np.all(tr.converged)
    zeros = [r.x for r in find_zeros(Branch(p, Sector.ONE_PLUS), (-0.5, 3.5))]
    brackets = tr.sign_changes()
    assert len(brackets) == len(zeros)
    for (a, b), z in zip(brackets, zeros):
        assert a <= z <= b


def test_gscan_zero_free_without_splitting():
    tr = gscan(OnePhotonParams(0.5, 0.0), Sector.ONE_PLUS, (-0.5, 4.5), 500)
    assert tr.sign_changes() == []


def test_gscan_errors():
    with pytest.raises(WindowEmpty):
        gscan(OnePhotonParams(0.5, 1.0), Sector.ONE_PLUS, (1.0, 1.0), 10)
    with pytest.raises(InvalidParameters):
        gscan(OnePhotonParams(0.5, 1.0), Sector.ONE_PLUS, (0.0, 1.0), 1)
