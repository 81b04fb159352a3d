import numpy as np
import pytest

from masnet.nn import Adam, DenseLayer, DenseNet, NonFiniteError, polyak_update


def fd_grads(loss_fn, arrays, h=1e-5):
    """Central finite differences of a scalar loss over parameter arrays."""
    out = []
    for arr in arrays:
        g = np.zeros_like(arr)
        flat, gf = arr.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = loss_fn()
            flat[i] = orig - h
            fm = loss_fn()
            flat[i] = orig
            gf[i] = (fp - fm) / (2.0 * h)
        out.append(g)
    return out


def rel_err(a, b):
    na = np.concatenate([x.reshape(-1) for x in a])
    nb = np.concatenate([x.reshape(-1) for x in b])
    return np.linalg.norm(na - nb) / (np.linalg.norm(na) + np.linalg.norm(nb) + 1e-300)


def test_zero_relu_net_outputs_zero():
    layers = [
        DenseLayer(np.zeros((4, 3)), np.zeros(4), "relu"),
        DenseLayer(np.zeros((2, 4)), np.zeros(2), "relu"),
    ]
    net = DenseNet(layers)
    out, _ = net.forward(np.array([1.0, -2.0, 3.0]))
    assert np.array_equal(out, np.zeros(2))


def test_identity_linear_layer_passthrough():
    net = DenseNet([DenseLayer(np.eye(3), np.zeros(3), "linear")])
    x = np.array([0.4, -1.2, 2.5])
    out, _ = net.forward(x)
    assert np.array_equal(out, x)


@pytest.mark.parametrize("acts", [["relu", "linear"], ["tanh", "tanh"], ["relu", "tanh"]])
def test_backward_matches_finite_differences(acts):
    rng = np.random.default_rng(hash(tuple(acts)) % 2**32)
    net = DenseNet.build([5, 7, 4], acts, rng)
    x = rng.normal(size=(3, 5))

    def loss():
        out, _ = net.forward(x)
        return float(np.sum(out**2))

    out, cache = net.forward(x)
    analytic, _ = net.backward(cache, 2.0 * out)
    numeric = fd_grads(loss, net.parameters())
    assert rel_err(analytic, numeric) < 1e-4


def test_backward_input_gradient():
    rng = np.random.default_rng(99)
    net = DenseNet.build([4, 6, 2], ["tanh", "linear"], rng)
    x = rng.normal(size=(1, 4))
    out, cache = net.forward(x)
    _, gin = net.backward(cache, 2.0 * out)
    h = 1e-6
    fd = np.zeros_like(x)
    for i in range(4):
        xp, xm = x.copy(), x.copy()
        xp[0, i] += h
        xm[0, i] -= h
        fd[0, i] = (np.sum(net.forward(xp)[0] ** 2) - np.sum(net.forward(xm)[0] ** 2)) / (2 * h)
    assert np.linalg.norm(gin - fd) / (np.linalg.norm(fd) + 1e-300) < 1e-4


def test_forward_rejects_bad_input_dim():
    net = DenseNet.build([3, 2], ["linear"], np.random.default_rng(0))
    with pytest.raises(ValueError):
        net.forward(np.zeros(4))


def test_forward_flags_nonfinite():
    net = DenseNet([DenseLayer(np.array([[1e308]]), np.zeros(1), "linear")])
    with pytest.raises(NonFiniteError):
        net.forward(np.array([1e308]))


def test_adam_zero_gradient_leaves_params():
    rng = np.random.default_rng(1)
    net = DenseNet.build([3, 3], ["linear"], rng)
    before = [p.copy() for p in net.parameters()]
    opt = Adam(net.parameters(), lr=0.1)
    opt.step([np.zeros_like(p) for p in net.parameters()])
    for b, p in zip(before, net.parameters()):
        assert np.array_equal(b, p)


def test_adam_descends_quadratic():
    theta = np.array([5.0, -3.0])
    opt = Adam([theta], lr=0.05)
    for _ in range(2000):
        opt.step([2.0 * theta])
    assert np.linalg.norm(theta) < 1e-2


def test_polyak_update_exact():
    rng = np.random.default_rng(2)
    online = DenseNet.build([3, 4, 2], ["relu", "linear"], rng)
    target = DenseNet.build([3, 4, 2], ["relu", "linear"], rng)
    tau = 0.005
    expected = [
        (1 - tau) * t + tau * o
        for t, o in zip(target.parameters(), online.parameters())
    ]
    polyak_update(target, online, tau)
    for e, p in zip(expected, target.parameters()):
        assert np.max(np.abs(e - p)) < 1e-12
