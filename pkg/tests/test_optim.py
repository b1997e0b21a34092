import numpy as np
import pytest

from nerflang import tensor as T
from nerflang.optim import Adam, MissingGradError, Sgd, make_optimizer
from nerflang.tensor import Tensor


def test_sgd_definition():
    p = Tensor([1.0], requires_grad=True, name="p")
    p.grad = np.array([2.0], np.float32)
    Sgd([p], lr=0.1).step()
    np.testing.assert_allclose(p.data, [0.8], rtol=1e-6)


def test_sgd_zero_gradient_keeps_param():
    p = Tensor([1.5], requires_grad=True)
    p.grad = np.zeros(1, np.float32)
    Sgd([p], lr=0.1).step()
    np.testing.assert_array_equal(p.data, [1.5])


def test_adam_first_step_magnitude_is_lr():
    # First Adam step with g=1: m_hat=1, v_hat=1, update = lr/(1+eps)
    p = Tensor([0.0], requires_grad=True)
    p.grad = np.ones(1, np.float32)
    opt = Adam([p], lr=0.01)
    opt.step()
    assert opt.t == 1
    np.testing.assert_allclose(abs(p.data[0]), 0.01, rtol=1e-5)


def test_missing_grad_names_parameter():
    p = Tensor([1.0], requires_grad=True, name="encoder.w")
    with pytest.raises(MissingGradError) as exc:
        Adam([p], lr=0.1).step()
    assert "encoder.w" in str(exc.value)


def test_zero_grad_resets_buffers():
    p = Tensor([1.0], requires_grad=True)
    p.grad = np.array([3.0], np.float32)
    opt = Sgd([p], lr=0.1)
    opt.zero_grad()
    np.testing.assert_array_equal(p.grad, [0.0])


def test_make_optimizer_rejects_unknown_kind():
    with pytest.raises(ValueError):
        make_optimizer("rmsprop", [], 0.1)


def test_adam_converges_on_quadratic():
    p = Tensor([4.0], requires_grad=True, name="p")
    opt = Adam([p], lr=0.1)
    for _ in range(200):
        T.reset_tape()
        opt.zero_grad()
        loss = T.sum_(T.mul(p, p))
        T.backward(loss)
        opt.step()
    assert abs(float(p.data[0])) < 1e-2
