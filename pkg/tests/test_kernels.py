import numpy as np
import pytest

from mergebbo import kernels, make_teacher_instance

HAS_COMPILED = "cython" in kernels.available_backends()

needs_compiled = pytest.mark.skipif(
    not HAS_COMPILED, reason="compiled kernel extension not built"
)


def random_problem(seed, m=12, d=4, points=9):
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, m).astype(np.int8)
    x = rng.uniform(0.0, 2.0, m)
    weights = np.ascontiguousarray(rng.normal(0, 0.5, (m, d, d)))
    biases = np.ascontiguousarray(rng.normal(0, 0.1, (m, d)))
    inputs = np.ascontiguousarray(rng.uniform(-1, 1, (points, d)))
    targets = np.ascontiguousarray(rng.uniform(-1, 1, (points, d)))
    return bits, x, weights, biases, inputs, targets


def test_selected_backend_reported():
    assert kernels.BACKEND in ("python", "cython")
    assert "python" in kernels.available_backends()


@needs_compiled
def test_backends_agree_on_merged_mse():
    py = kernels.get_backend("python")
    cy = kernels.get_backend("cython")
    for seed in range(25):
        bits, x, w, b, inp, tgt = random_problem(seed)
        v_py, a_py = py.merged_mse(bits, x, w, b, inp, tgt)
        v_cy, a_cy = cy.merged_mse(bits, x, w, b, inp, tgt)
        assert a_py == a_cy
        assert v_cy == pytest.approx(v_py, rel=1e-10, abs=1e-13)


@needs_compiled
def test_backends_agree_on_masked_sphere():
    py = kernels.get_backend("python")
    cy = kernels.get_backend("cython")
    rng = np.random.default_rng(3)
    for _ in range(50):
        m = 16
        bits = rng.integers(0, 2, m).astype(np.int8)
        pref = rng.integers(0, 2, m).astype(np.int8)
        x = rng.uniform(0, 2, m)
        t = rng.uniform(0, 2, m)
        v_py, a_py = py.masked_sphere_value(bits, x, t, pref, 0.1)
        v_cy, a_cy = cy.masked_sphere_value(bits, x, t, pref, 0.1)
        assert a_py == a_cy
        assert v_cy == pytest.approx(v_py, rel=1e-12, abs=1e-15)


@needs_compiled
def test_backends_agree_on_forward():
    py = kernels.get_backend("python")
    cy = kernels.get_backend("cython")
    bits, x, w, b, inp, _ = random_problem(7)
    np.testing.assert_allclose(
        py.merged_forward(bits, x, w, b, inp),
        cy.merged_forward(bits, x, w, b, inp),
        rtol=1e-12,
        atol=1e-15,
    )


@pytest.mark.parametrize("backend_name", kernels.available_backends())
def test_inactive_coordinates_never_read(backend_name):
    backend = kernels.get_backend(backend_name)
    rng = np.random.default_rng(11)
    bits, x, w, b, inp, tgt = random_problem(5)
    inactive = np.flatnonzero(bits == 0)
    base, _ = backend.merged_mse(bits, x, w, b, inp, tgt)
    for _ in range(200):
        x2 = x.copy()
        j = rng.choice(inactive)
        x2[j] = rng.uniform(0.0, 2.0)
        value, _ = backend.merged_mse(bits, x2, w, b, inp, tgt)
        assert value == base


@pytest.mark.parametrize("backend_name", kernels.available_backends())
def test_repeat_call_bit_identical(backend_name):
    backend = kernels.get_backend(backend_name)
    bits, x, w, b, inp, tgt = random_problem(13)
    first, _ = backend.merged_mse(bits, x, w, b, inp, tgt)
    second, _ = backend.merged_mse(bits, x, w, b, inp, tgt)
    assert first == second


@needs_compiled
def test_compiled_backend_is_faster_on_large_stack():
    # informational guard: the compiled kernel should not be slower than
    # the fallback on the deep stack it exists for
    import time

    instance = make_teacher_instance(0, n_layers=96)
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, instance.space.m).astype(np.int8)
    x = rng.uniform(0, 2, instance.space.m)

    def clock(backend, reps=30):
        start = time.perf_counter()
        for _ in range(reps):
            backend.merged_mse(
                bits, x, instance.weights, instance.biases,
                instance.inputs, instance.targets,
            )
        return time.perf_counter() - start

    py = clock(kernels.get_backend("python"))
    cy = clock(kernels.get_backend("cython"))
    assert cy < py * 1.5
