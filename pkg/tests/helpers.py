"""Shared test utilities: finite-difference gradient oracle."""

from __future__ import annotations

import numpy as np

from nerflang import tensor as T


def finite_diff_grad(f, param: T.Tensor, h: float = 1e-3) -> np.ndarray:
    """Central-difference d f()/d param, one coordinate at a time.

    ``f`` must be a zero-argument callable returning a python float and must
    not mutate any state it reads.
    """
    g = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f()
        flat[i] = orig - h
        fm = f()
        flat[i] = orig
        gf[i] = (fp - fm) / (2.0 * h)
    return g


def rel_error(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a.ravel()))
    nb = float(np.linalg.norm(b.ravel()))
    denom = max(na, nb, 1e-12)
    return float(np.linalg.norm((a - b).ravel())) / denom


def check_grads(build_loss, params: list[T.Tensor], h: float = 1e-3,
                tol: float = 1e-3) -> float:
    """Compare autodiff grads of ``build_loss()`` against central differences.

    ``build_loss`` runs a fresh forward pass and returns the scalar loss
    Tensor; it is re-run under ``no_grad`` for each finite-difference probe.
    Returns the worst relative error across params.
    """
    T.reset_tape()
    for p in params:
        p.grad = None
    loss = build_loss()
    T.backward(loss)
    auto = [p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params]

    def eval_loss() -> float:
        with T.no_grad():
            return float(build_loss().data)

    worst = 0.0
    for p, ga in zip(params, auto):
        gf = finite_diff_grad(eval_loss, p, h)
        err = rel_error(ga, gf)
        worst = max(worst, err)
        assert err < tol, f"gradient mismatch for {p.name or 'param'}: rel err {err:.2e}"
    return worst
