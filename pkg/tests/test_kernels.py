import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sphfsi.kernels import (
    KernelSpec,
    fluid_kernel,
    kernel_eval,
    kernel_w0,
    lattice_kernel_sum,
    solid_kernel,
)


def test_cutoff_is_twice_h():
    spec = KernelSpec(h=0.013)
    assert spec.cutoff == 2 * 0.013


def test_smoothing_length_conventions():
    assert fluid_kernel(0.01).h == pytest.approx(0.013)
    assert solid_kernel(0.01).h == pytest.approx(0.0115)


def test_value_and_derivative_vanish_at_support_boundary():
    spec = KernelSpec(h=1.3)
    w, dw = kernel_eval(spec.cutoff, spec)
    assert w == 0.0 and dw == 0.0
    w, dw = kernel_eval(spec.cutoff * 3, spec)
    assert w == 0.0 and dw == 0.0


def test_normalization_by_quadrature():
    # independent check: integrate W over its support disk
    spec = KernelSpec(h=0.7)
    r = np.linspace(0.0, spec.cutoff, 200001)
    w, _ = kernel_eval(r, spec)
    integral = np.trapezoid(w * 2.0 * np.pi * r, r)
    assert abs(integral - 1.0) < 1e-6


def test_center_value_matches_normalization_constant():
    # W(0) = sigma / h^2 with sigma fixed by the unit integral
    spec = KernelSpec(h=2.0)
    w, dw = kernel_eval(0.0, spec)
    assert w == pytest.approx(7.0 / (4.0 * math.pi) / 4.0, rel=1e-12)
    assert dw == 0.0


def test_negative_distance_rejected():
    with pytest.raises(ValueError):
        kernel_eval(-0.1, KernelSpec(h=1.0))


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        KernelSpec(h=0.0)
    with pytest.raises(ValueError):
        KernelSpec(h=1.0, kind="Gaussian")


@given(st.floats(0.0101, 1.989))
def test_derivative_matches_finite_difference(q):
    # C1 smoothness: centered difference against the analytic derivative
    spec = KernelSpec(h=1.0)
    eps = 1e-7
    w_hi, _ = kernel_eval(q + eps, spec)
    w_lo, _ = kernel_eval(q - eps, spec)
    _, dw = kernel_eval(q, spec)
    fd = (w_hi - w_lo) / (2 * eps)
    assert dw == pytest.approx(fd, rel=1e-6, abs=1e-9)


@given(st.floats(0.0, 3.0))
def test_derivative_nonpositive(r):
    _, dw = kernel_eval(r, KernelSpec(h=1.0))
    assert dw <= 0.0


def test_lattice_sum_slightly_above_one():
    s = lattice_kernel_sum(1.0, KernelSpec(h=1.3))
    assert 1.0 < s < 1.05


def test_w0_helper():
    spec = KernelSpec(h=1.3)
    assert kernel_w0(spec) == pytest.approx(kernel_eval(0.0, spec)[0])
