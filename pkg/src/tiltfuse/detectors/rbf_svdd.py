"""One-class model for 2-d data: a tiny radial-basis network trained to map
points onto a trainable scalar center, scored by squared deviation.

The network has three Gaussian units with fixed centers; their widths are
trained through log-scales so they stay positive. The output is a linear
combination with bias, and the training loss is the mean squared distance
between the output and the (also trainable) scalar hypersphere center.
Optimization is plain Adam on the 8-parameter vector
[w0, w1, w2, bias, log_s0, log_s1, log_s2, center].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Orientation, ScoreVector, SeedStream, TabularDataset

N_UNITS = 3
PARAM_COUNT = 2 * N_UNITS + 2

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class Adam:
    """Adaptive-moment gradient descent on a flat parameter vector."""

    def __init__(self, size: int, lr: float):
        self.lr = lr
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = ADAM_BETA1 * self.m + (1 - ADAM_BETA1) * grad
        self.v = ADAM_BETA2 * self.v + (1 - ADAM_BETA2) * grad**2
        m_hat = self.m / (1 - ADAM_BETA1**self.t)
        v_hat = self.v / (1 - ADAM_BETA2**self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def _unpack(theta: np.ndarray):
    w = theta[:N_UNITS]
    bias = theta[N_UNITS]
    log_scales = theta[N_UNITS + 1 : 2 * N_UNITS + 1]
    center = theta[-1]
    return w, bias, log_scales, center


def network_output(theta: np.ndarray, x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    w, bias, log_scales, _ = _unpack(theta)
    sq = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    phi = np.exp(-sq / (2.0 * np.exp(2.0 * log_scales)))
    return phi @ w + bias


def loss_and_grad(theta: np.ndarray, x: np.ndarray, centers: np.ndarray):
    """Mean squared deviation of the network output from the trainable
    center, with its analytic gradient in all 8 parameters."""
    w, bias, log_scales, center = _unpack(theta)
    n = x.shape[0]
    sq = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    var = np.exp(2.0 * log_scales)
    phi = np.exp(-sq / (2.0 * var))
    out = phi @ w + bias
    err = out - center
    loss = float(np.mean(err**2))
    g_out = 2.0 * err / n
    grad = np.empty(PARAM_COUNT)
    grad[:N_UNITS] = phi.T @ g_out
    grad[N_UNITS] = g_out.sum()
    # d phi / d log_scale = phi * sq / var
    grad[N_UNITS + 1 : 2 * N_UNITS + 1] = ((phi * sq / var).T @ g_out) * w
    grad[-1] = -g_out.sum()
    return loss, grad


@dataclass(frozen=True)
class RbfSvddModel:
    centers: np.ndarray
    theta: np.ndarray
    loss_history: tuple  # mean training loss per epoch

    @property
    def hypersphere_center(self) -> float:
        return float(self.theta[-1])

    def to_debug_dict(self) -> dict:
        w, bias, log_scales, center = _unpack(self.theta)
        return {
            "weights": w.tolist(),
            "bias": float(bias),
            "scales": np.exp(log_scales).tolist(),
            "hypersphere_center": float(center),
            "unit_centers": self.centers.tolist(),
            "final_loss": self.loss_history[-1] if self.loss_history else None,
        }


DEFAULT_CENTERS = np.array([[1.0, 1.0], [-0.25, 2.5], [-1.0, 0.5]])


def initial_params(rng: np.random.Generator) -> np.ndarray:
    theta = np.zeros(PARAM_COUNT)
    theta[:N_UNITS] = rng.normal(size=N_UNITS)
    theta[-1] = rng.normal()  # random trainable hypersphere center
    return theta


def rbf_svdd_fit(
    data: TabularDataset,
    centers: np.ndarray = DEFAULT_CENTERS,
    epochs: int = 200,
    batch: int = 25,
    lr: float = 0.01,
    seed: SeedStream = SeedStream(0),
) -> RbfSvddModel:
    x = data.features
    if x.shape[1] != 2:
        raise ValueError("this model is 2-d only")
    centers = np.asarray(centers, dtype=np.float64)
    rng = seed.generator()
    theta = initial_params(rng)
    opt = Adam(PARAM_COUNT, lr)
    history = []
    for _ in range(epochs):
        order = rng.permutation(x.shape[0])
        epoch_losses = []
        for start in range(0, x.shape[0], batch):
            rows = x[order[start : start + batch]]
            loss, grad = loss_and_grad(theta, rows, centers)
            if not np.isfinite(loss):
                raise FloatingPointError("training loss diverged")
            theta = opt.step(theta, grad)
            epoch_losses.append(loss)
        history.append(float(np.mean(epoch_losses)))
    theta = theta.copy()
    theta.flags.writeable = False
    return RbfSvddModel(centers, theta, tuple(history))


def rbf_svdd_score(model: RbfSvddModel, queries) -> ScoreVector:
    """Squared distance of the network output from the hypersphere center."""
    x = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if x.shape[1] != 2:
        raise ValueError("this model is 2-d only")
    out = network_output(model.theta, x, model.centers)
    scores = (out - model.theta[-1]) ** 2
    return ScoreVector(scores, Orientation.ANOMALY_HIGH, source="rbf_svdd")
