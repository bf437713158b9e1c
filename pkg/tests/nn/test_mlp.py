from __future__ import annotations

import numpy as np
import pytest
import torch

from graphdrift.app.nn import (
    DTYPE,
    Activation,
    Mlp,
    NetworkError,
    NonFiniteLossError,
    eval_jet,
    forward,
    forward_tensor,
    init_mlp,
    param_count,
    param_gradient,
)


def test_param_count_for_three_hidden_layers() -> None:
    assert param_count((2, 20, 20, 20, 1)) == 921
    assert init_mlp((2, 20, 20, 20, 1), seed=0).n_params == 921
    assert param_count((2, 10, 10, 5)) == 30 + 110 + 55


def test_activation_applies_to_output_layer() -> None:
    mlp = Mlp((2, 1, 1), Activation.TANH, np.array([1.0, 0.0, 0.0, 1.0, 0.0]))
    t = np.array([-1.0, 0.3, 2.0])
    values = forward(mlp, t, np.zeros(3))[:, 0]

    assert np.allclose(values, np.tanh(np.tanh(t)))
    jet = eval_jet(mlp, t, np.zeros(3))
    expected_dt = (1.0 - np.tanh(np.tanh(t)) ** 2) * (1.0 - np.tanh(t) ** 2)
    assert np.allclose(jet.dt, expected_dt)
    assert np.allclose(jet.dx, 0.0)
    assert np.allclose(jet.dxx, 0.0)


def test_sigmoid_outputs_lie_in_unit_interval() -> None:
    mlp = init_mlp((2, 8, 3), seed=4, activation="sigmoid")
    values = forward(mlp, np.linspace(0.0, 10.0, 25), np.linspace(0.0, 1.0, 25))

    assert values.shape == (25, 3)
    assert np.all((values > 0.0) & (values < 1.0))


@pytest.mark.parametrize("activation", ["tanh", "sigmoid"])
def test_jet_matches_finite_differences(activation: str) -> None:
    mlp = init_mlp((2, 6, 6, 1), seed=11, activation=activation)
    t = np.array([0.2, 1.1, 3.0])
    x = np.array([0.1, 0.5, 0.9])
    h = 1e-4
    jet = eval_jet(mlp, t, x)

    def f(tt, xx):
        return forward(mlp, tt, xx)[:, 0]

    assert np.allclose(jet.value, f(t, x))
    assert np.allclose(jet.dt, (f(t + h, x) - f(t - h, x)) / (2 * h), atol=1e-7)
    assert np.allclose(jet.dx, (f(t, x + h) - f(t, x - h)) / (2 * h), atol=1e-7)
    assert np.allclose(jet.dxx, (f(t, x + h) - 2 * f(t, x) + f(t, x - h)) / h**2, atol=1e-5)
    assert jet.is_finite()


def test_initialization_is_seeded_glorot() -> None:
    first = init_mlp((2, 20, 1), seed=3)
    again = init_mlp((2, 20, 1), seed=3)
    other = init_mlp((2, 20, 1), seed=4)

    assert np.array_equal(first.params, again.params)
    assert not np.array_equal(first.params, other.params)
    (w1, b1), (w2, b2) = first.weights()
    assert np.all(np.abs(w1) <= np.sqrt(6.0 / 22.0))
    assert np.all(np.abs(w2) <= np.sqrt(6.0 / 21.0))
    assert not b1.any() and not b2.any()


@pytest.mark.parametrize(
    "sizes, params",
    [((2,), np.zeros(0)), ((3, 1), np.zeros(4)), ((2, 0, 1), np.zeros(1)), ((2, 1), np.zeros(5))],
)
def test_invalid_networks_are_rejected(sizes, params) -> None:
    with pytest.raises(NetworkError):
        Mlp(sizes, Activation.TANH, params)


def test_non_finite_parameters_are_rejected() -> None:
    with pytest.raises(NetworkError, match="finite"):
        Mlp((2, 1), Activation.TANH, np.array([np.nan, 0.0, 0.0]))


def test_param_gradient_matches_finite_differences() -> None:
    mlp = init_mlp((2, 4, 1), seed=2)
    t = torch.tensor([0.3, 0.7], dtype=torch.float64)
    x = torch.tensor([0.2, 0.8], dtype=torch.float64)

    def loss(theta: torch.Tensor) -> torch.Tensor:
        out = forward_tensor(mlp.layer_sizes, mlp.activation, theta, t, x)
        return torch.sum(out**2)

    value, grad = param_gradient(loss, mlp.params)
    assert value == pytest.approx(float(np.sum(forward(mlp, t.numpy(), x.numpy()) ** 2)))
    h = 1e-6
    for index in (0, 5, mlp.n_params - 1):
        step = np.zeros(mlp.n_params)
        step[index] = h
        plus, _ = param_gradient(loss, mlp.params + step)
        minus, _ = param_gradient(loss, mlp.params - step)
        assert grad[index] == pytest.approx((plus - minus) / (2 * h), abs=1e-7)


def test_param_gradient_rejects_non_finite_loss() -> None:
    with pytest.raises(NonFiniteLossError, match="nn.non_finite_loss"):
        param_gradient(lambda theta: torch.sum(theta) * float("nan"), np.ones(3))


def test_package_exports_the_working_dtype() -> None:
    from graphdrift.app import losses

    assert DTYPE is torch.float64
    mlp = init_mlp((2, 3, 1), seed=0)
    out = forward_tensor(mlp.layer_sizes, mlp.activation, torch.tensor(mlp.params), torch.zeros(2), torch.zeros(2))
    assert out.dtype == DTYPE
    assert losses.NetworkField is not None
