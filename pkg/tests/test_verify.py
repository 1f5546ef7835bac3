from dataclasses import replace

import numpy as np
import pytest
from sklearn.utils.estimator_checks import check_transformer_general

from peririchards.config import preset
from peririchards.estimators import ChebyshevTransformer
from peririchards.soil import SoilParams
from peririchards.verify import rhs_discrepancy, verify_operator, verify_transforms


def test_transform_report_passes():
    report = verify_transforms()
    assert report.passed
    assert all(line.startswith("[PASS]") for line in report.format().splitlines()[1:-1])


def test_transform_report_degenerate_degree():
    report = verify_transforms(max_degree=2)
    assert report.passed
    assert not any("projection" in c.name for c in report.checks)


def test_injected_fault_is_caught():
    report = verify_transforms(inject_fault=True)
    assert not report.passed
    assert "verification FAILED" in report.format()


def test_zero_conductivity_discrepancy():
    cfg = replace(preset("example-4.1"), soil=SoilParams(0.075, 0.287, 0.036, 1.56, 0.0))
    for n in (16, 32, 64):
        spec, orc = rhs_discrepancy(cfg, n)
        assert np.abs(spec - orc).max() <= 1e-12


def test_operator_report_small():
    report = verify_operator(preset("example-4.2"), [16, 32, 64], oracle=False)
    assert report.passed, report.format()
    assert len(report.distances) == 2


def test_operator_rejects_unsorted():
    with pytest.raises(ValueError):
        verify_operator(preset("example-4.2"), [32, 16])


def test_transformer_round_trip():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 9))
    t = ChebyshevTransformer().fit(X)
    C = t.transform(X)
    assert C.shape == (5, 9)
    np.testing.assert_allclose(t.inverse_transform(C), X, atol=1e-13)
    assert t.get_params() == {"n_modes": None}


def test_transformer_validation():
    with pytest.raises(ValueError):
        ChebyshevTransformer(n_modes=4).fit(np.ones((2, 6)))
    t = ChebyshevTransformer().fit(np.ones((2, 6)))
    with pytest.raises(ValueError):
        t.transform(np.ones((2, 5)))


def test_transformer_sklearn_general_check():
    check_transformer_general("ChebyshevTransformer", ChebyshevTransformer())
