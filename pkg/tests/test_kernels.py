import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratcheck import kernels
from stratcheck.expr import EvalDomainError, eval_jet, parse
from stratcheck.program import compile_expr

TEXTS = ["z^(x^2+1)", "z - z/ln(z)*ln(x + sqrt(x^2 + z^2))", "z^3", "z*sqrt(z)", "sin(x)*exp(z) - abs(x - z)", "0", "x/z + 2^x"]

needs_compiled = pytest.mark.skipif(kernels._compiled is None, reason="compiled extension not built")


def pts(n=500, seed=0):
    rng = np.random.default_rng(seed)
    return np.column_stack([rng.uniform(-0.5, 0.5, n), rng.uniform(1e-3, 0.5, n)])


@pytest.mark.parametrize("text", TEXTS)
def test_python_backend_matches_scalar_jets(text):
    prog = compile_expr(parse(text), ("x", "z"))
    P = pts(50)
    P = P[P[:, 0] + np.hypot(P[:, 0], P[:, 1]) > 1e-6]
    v, g = kernels.eval_batch(prog, P, "python")
    e = parse(text)
    for row, vv, gg in zip(P, v, g):
        j = eval_jet(e, {"x": row[0], "z": row[1]})
        assert vv == pytest.approx(j.value, rel=1e-12, abs=1e-300)
        grad = dict(zip(e.free_vars, j.gradient))
        assert gg == pytest.approx([grad.get("x", 0.0), grad.get("z", 0.0)], rel=1e-10, abs=1e-300)


@needs_compiled
@pytest.mark.parametrize("text", TEXTS)
def test_backends_agree(text):
    prog = compile_expr(parse(text), ("x", "z"))
    P = pts()
    P = P[P[:, 0] + np.hypot(P[:, 0], P[:, 1]) > 1e-6]
    vp, gp = kernels.eval_batch(prog, P, "python")
    vc, gc = kernels.eval_batch(prog, P, "compiled")
    np.testing.assert_allclose(vc, vp, rtol=1e-13, atol=1e-14)  # f cancels near x < 0
    np.testing.assert_allclose(gc, gp, rtol=1e-10, atol=1e-13)


@needs_compiled
@settings(max_examples=25, deadline=None)
@given(st.floats(-0.4, 0.4), st.floats(0.01, 0.4), st.sampled_from([1.0, 0.1, 0.01]))
def test_moment_kernels_agree(cx, cz, u):
    prog = compile_expr(parse(TEXTS[0]), ("x", "z"))
    off = np.random.default_rng(1).uniform(-1, 1, (2000, 2))
    c = np.array([cx, cz])
    h = cz ** (cx * cx + 1)
    a = kernels.graph_moments(prog, off, c, h, u, "python", return_bad=True)
    b = kernels.graph_moments(prog, off, c, h, u, "compiled", return_bad=True)
    assert a[2] == b[2]
    assert b[0] == pytest.approx(a[0], rel=1e-12)
    off3 = np.random.default_rng(2).uniform(-1, 1, (2000, 3))
    cols = np.array([0, 2])
    centre = np.array([cx, 0.0, cz])
    assert kernels.region_count(prog, off3, cols, 1, centre, 0.0, u, "python", True) == kernels.region_count(
        prog, off3, cols, 1, centre, 0.0, u, "compiled", True
    )


def test_domain_errors_raise():
    prog = compile_expr(parse("ln(x)"))
    with pytest.raises(EvalDomainError):
        kernels.eval_batch(prog, np.array([[-1.0]]), "python")


def test_var_order():
    prog = compile_expr(parse("2"), ("x", "z"))
    v, g = kernels.eval_batch(prog, np.zeros((3, 2)), "python")
    assert list(v) == [2.0, 2.0, 2.0] and g.shape == (3, 2)
    with pytest.raises(ValueError):
        compile_expr(parse("x*y"), ("x",))
