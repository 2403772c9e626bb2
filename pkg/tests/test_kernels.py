import os
import subprocess
import sys

import numpy as np
import pytest

from mpcquant import kernels, scenarios
from mpcquant.polynomial import EvaluationPlan

compiled = kernels.compiled_backend()
pure = kernels.python_backend()
needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def _plan(sys_):
    return sys_.plan


@needs_compiled
@pytest.mark.parametrize("name", ["harmonic", "product_hamiltonian", "composed"])
def test_backends_agree(name):
    sys_ = scenarios.build(name, n=2, k=2.0, f="x^3+2x")
    plan = _plan(sys_)
    x0 = np.array([0.3, -0.8, 0.5, 0.2])
    a = compiled.rk4_variational(plan.coef, plan.exps, plan.slot, len(plan.coef), 2, x0,
                                 1e-3, 300)
    b = pure.rk4_variational(plan.coef, plan.exps, plan.slot, len(plan.coef), 2, x0, 1e-3,
                             300)
    assert a[2] == b[2] == 301
    assert np.allclose(a[0], b[0], rtol=0, atol=1e-13)
    assert np.allclose(a[1], b[1], rtol=0, atol=1e-12)
    fa, na = compiled.rk4_flow(plan.coef, plan.exps, plan.slot, plan.ngrad_terms, 2, x0,
                               1e-3, 300)
    assert na == 301 and np.allclose(fa, a[0], atol=1e-13)


def test_eval_slots_gradient():
    sys_ = scenarios.product_hamiltonian(2.0)
    x = np.array([0.1, 0.7, -0.4, 0.9])
    g = sys_.gradient(x)
    fd = np.array([(sys_.energy(x + 1e-6 * e) - sys_.energy(x - 1e-6 * e)) / 2e-6
                   for e in np.eye(4)])
    assert np.allclose(g, fd, atol=1e-7)


def test_plan_layout():
    plan = EvaluationPlan.for_hamiltonian(scenarios.harmonic(1).poly)
    assert plan.dim == 2
    assert plan.ngrad_terms <= len(plan.coef)


def test_environment_forces_python_backend():
    env = dict(os.environ, MPCQUANT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import mpcquant.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_blowup_reports_valid_prefix():
    sys_ = scenarios.custom(1, "p1*q1^2")
    plan = sys_.plan
    states, nvalid = pure.rk4_flow(plan.coef, plan.exps, plan.slot, plan.ngrad_terms, 1,
                                   np.array([1.0, -50.0]), 0.1, 200)
    assert nvalid < 201


def test_pipeline_on_python_backend_matches_compiled():
    code = ("from mpcquant import scenarios, kernels;"
            "from mpcquant.reduction_holonomy import PrequantizationModel, evaluate_orbit;"
            "import numpy as np;"
            "r = evaluate_orbit(PrequantizationModel(scenarios.harmonic(2)),"
            " np.array([1.0, 0.3, -0.2, 0.5]));"
            "print(kernels.BACKEND, repr(r.lam.real), repr(r.lam.imag))")
    env = dict(os.environ, MPCQUANT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out[0] == "python"
    from mpcquant.reduction_holonomy import PrequantizationModel, evaluate_orbit

    r = evaluate_orbit(PrequantizationModel(scenarios.harmonic(2)),
                       np.array([1.0, 0.3, -0.2, 0.5]))
    assert abs(complex(float(out[1]), float(out[2])) - r.lam) < 1e-10
