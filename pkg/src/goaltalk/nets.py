"""Goal-weight network: GRU cooperation encoder + 2-layer MLP, plus the
single-parameter scalar-blend variant.

Everything is float64 numpy with hand-written batched forward/backward so
gradients can be verified against finite differences. Factor order at the
MLP input is fixed: [turn_norm, gcd_norm, eus, cd].
"""

from dataclasses import dataclass

import numpy as np

FACTOR_NAMES = ("turn", "gcd", "eus", "cd")
DISABLED_FACTOR_VALUE = 0.5
INIT_SCALE = 0.08


def sigmoid(x):
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class FactorVector:
    turn_norm: float
    gcd_norm: float
    eus: float
    cd: float

    def __post_init__(self):
        vals = (self.turn_norm, self.gcd_norm, self.eus, self.cd)
        if not all(np.isfinite(v) and -1e-9 <= v <= 1.0 + 1e-9 for v in vals):
            raise ValueError(f"factor out of [0, 1]: {vals}")

    def as_array(self):
        return np.array([self.turn_norm, self.gcd_norm, self.eus, self.cd])


def _pad_sequences(sequences):
    B = len(sequences)
    L = max((len(s) for s in sequences), default=0)
    x = np.zeros((B, L))
    mask = np.zeros((B, L))
    for b, seq in enumerate(sequences):
        for t, v in enumerate(seq):
            if v not in (0, 1):
                raise ValueError(f"cooperation code must be 0 or 1, got {v!r}")
            x[b, t] = float(v)
            mask[b, t] = 1.0
    return x, mask


class GoalWeightNet:
    """Learned blend weight between goal-closeness rank and preference rank."""

    def __init__(self, gru_hidden=16, mlp_hidden=32, disabled_factors=(), seed=0):
        for f in disabled_factors:
            if f not in FACTOR_NAMES:
                raise ValueError(f"unknown factor {f!r}")
        self.gru_hidden = gru_hidden
        self.mlp_hidden = mlp_hidden
        self.disabled_factors = tuple(disabled_factors)
        H, M = gru_hidden, mlp_hidden
        rng = np.random.default_rng(seed)

        def init(*shape):
            return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)

        self.params = {
            "gru_wr": init(H), "gru_ur": init(H, H), "gru_br": init(H),
            "gru_wz": init(H), "gru_uz": init(H, H), "gru_bz": init(H),
            "gru_wn": init(H), "gru_un": init(H, H), "gru_bn": init(H),
            "proj_w": init(H), "proj_b": init(1),
            "mlp_w1": init(M, 4), "mlp_b1": init(M),
            "mlp_w2": init(M), "mlp_b2": init(1),
        }

    # -- parameter plumbing -------------------------------------------------

    def param_names(self):
        return list(self.params.keys())

    def zero_grads(self):
        return {k: np.zeros_like(v) for k, v in self.params.items()}

    def flatten(self):
        return np.concatenate([self.params[k].ravel() for k in self.param_names()])

    def unflatten(self, flat):
        i = 0
        for k in self.param_names():
            n = self.params[k].size
            self.params[k] = np.asarray(flat[i:i + n], dtype=np.float64).reshape(self.params[k].shape)
            i += n

    def clone(self):
        twin = GoalWeightNet(self.gru_hidden, self.mlp_hidden, self.disabled_factors, seed=0)
        twin.params = {k: v.copy() for k, v in self.params.items()}
        return twin

    # -- forward ------------------------------------------------------------

    def _gru_forward(self, sequences):
        p = self.params
        B = len(sequences)
        H = self.gru_hidden
        x, mask = _pad_sequences(sequences)
        h = np.zeros((B, H))
        steps = []
        for t in range(x.shape[1]):
            xt = x[:, t]
            mt = mask[:, t]
            r = sigmoid(xt[:, None] * p["gru_wr"] + h @ p["gru_ur"].T + p["gru_br"])
            z = sigmoid(xt[:, None] * p["gru_wz"] + h @ p["gru_uz"].T + p["gru_bz"])
            un_h = h @ p["gru_un"].T
            n = np.tanh(xt[:, None] * p["gru_wn"] + r * un_h + p["gru_bn"])
            h_new = (1.0 - z) * n + z * h
            h_next = mt[:, None] * h_new + (1.0 - mt[:, None]) * h
            steps.append({"x": xt, "mask": mt, "h_prev": h, "r": r, "z": z,
                          "n": n, "un_h": un_h})
            h = h_next
        return h, steps

    def forward(self, factors3, sequences):
        """Batched goal weights.

        factors3: (B, 3) array of [turn_norm, gcd_norm, eus];
        sequences: list of B cooperation-code lists. Returns a cache whose
        `gw` and `cd` fields are (B,) arrays.
        """
        p = self.params
        factors3 = np.atleast_2d(np.asarray(factors3, dtype=np.float64))
        h_final, steps = self._gru_forward(sequences)
        cd_pre = h_final @ p["proj_w"] + p["proj_b"][0]
        cd = sigmoid(cd_pre)

        X = np.concatenate([factors3, cd[:, None]], axis=1)
        X_in = X.copy()
        for f in self.disabled_factors:
            X_in[:, FACTOR_NAMES.index(f)] = DISABLED_FACTOR_VALUE
        a1 = X_in @ p["mlp_w1"].T + p["mlp_b1"]
        h1 = np.tanh(a1)
        s = h1 @ p["mlp_w2"] + p["mlp_b2"][0]
        gw = sigmoid(s)
        return {"gw": gw, "cd": cd, "steps": steps, "h_final": h_final,
                "cd_pre": cd_pre, "X_in": X_in, "h1": h1, "s": s}

    # -- backward -----------------------------------------------------------

    def backward(self, cache, d_gw):
        """Parameter gradients of `sum_b d_gw[b] * gw[b]`."""
        p = self.params
        g = self.zero_grads()
        gw, h1, X_in = cache["gw"], cache["h1"], cache["X_in"]

        ds = np.asarray(d_gw) * gw * (1.0 - gw)
        g["mlp_w2"] += h1.T @ ds
        g["mlp_b2"][0] += ds.sum()
        d_h1 = ds[:, None] * p["mlp_w2"]
        d_a1 = d_h1 * (1.0 - h1 ** 2)
        g["mlp_w1"] += d_a1.T @ X_in
        g["mlp_b1"] += d_a1.sum(axis=0)
        d_X = d_a1 @ p["mlp_w1"]
        for f in self.disabled_factors:
            d_X[:, FACTOR_NAMES.index(f)] = 0.0

        d_cd = d_X[:, 3]
        if "cd" in self.disabled_factors or not np.any(d_cd):
            return g
        cd = cache["cd"]
        d_cd_pre = d_cd * cd * (1.0 - cd)
        g["proj_w"] += cache["h_final"].T @ d_cd_pre
        g["proj_b"][0] += d_cd_pre.sum()
        dh = d_cd_pre[:, None] * p["proj_w"]

        for step in reversed(cache["steps"]):
            mt = step["mask"][:, None]
            dh_cell = dh * mt
            dh_pass = dh * (1.0 - mt)
            h_prev, r, z, n, un_h, xt = (step["h_prev"], step["r"], step["z"],
                                         step["n"], step["un_h"], step["x"])
            dz = dh_cell * (h_prev - n)
            dn = dh_cell * (1.0 - z)
            dh_acc = dh_cell * z

            dpre_n = dn * (1.0 - n ** 2)
            g["gru_wn"] += (dpre_n * xt[:, None]).sum(axis=0)
            g["gru_bn"] += dpre_n.sum(axis=0)
            dr = dpre_n * un_h
            dn_h = dpre_n * r
            g["gru_un"] += dn_h.T @ h_prev
            dh_acc += dn_h @ p["gru_un"]

            dpre_r = dr * r * (1.0 - r)
            g["gru_wr"] += (dpre_r * xt[:, None]).sum(axis=0)
            g["gru_ur"] += dpre_r.T @ h_prev
            g["gru_br"] += dpre_r.sum(axis=0)
            dh_acc += dpre_r @ p["gru_ur"]

            dpre_z = dz * z * (1.0 - z)
            g["gru_wz"] += (dpre_z * xt[:, None]).sum(axis=0)
            g["gru_uz"] += dpre_z.T @ h_prev
            g["gru_bz"] += dpre_z.sum(axis=0)
            dh_acc += dpre_z @ p["gru_uz"]

            dh = dh_acc + dh_pass
        return g

    # -- conveniences -------------------------------------------------------

    def cooperative_degree(self, sequence):
        cache = self.forward(np.zeros((1, 3)), [list(sequence)])
        return float(cache["cd"][0])

    def goal_weight(self, factors, sequence):
        """Scalar gw for one decision; `factors` is a FactorVector whose cd
        field is ignored (the net computes cd from the sequence)."""
        cache = self.forward(np.array([[factors.turn_norm, factors.gcd_norm, factors.eus]]),
                             [list(sequence)])
        return float(cache["gw"][0])


class ScalarBlend:
    """One trainable blend weight, squashed to (0, 1) by a sigmoid."""

    def __init__(self, seed=0, init_raw=None):
        if init_raw is None:
            init_raw = float(np.random.default_rng(seed).uniform(-INIT_SCALE, INIT_SCALE))
        self.params = {"beta_raw": np.array([float(init_raw)])}
        self.disabled_factors = ()

    def param_names(self):
        return ["beta_raw"]

    def zero_grads(self):
        return {"beta_raw": np.zeros(1)}

    def flatten(self):
        return self.params["beta_raw"].copy()

    def unflatten(self, flat):
        self.params["beta_raw"] = np.asarray(flat, dtype=np.float64).reshape(1).copy()

    def clone(self):
        twin = ScalarBlend(init_raw=float(self.params["beta_raw"][0]))
        return twin

    def forward(self, factors3, sequences):
        B = len(sequences) if sequences is not None else np.atleast_2d(factors3).shape[0]
        gw = np.full(B, float(sigmoid(self.params["beta_raw"])[0]))
        return {"gw": gw, "cd": np.full(B, np.nan)}

    def backward(self, cache, d_gw):
        gw = cache["gw"]
        return {"beta_raw": np.array([float((np.asarray(d_gw) * gw * (1.0 - gw)).sum())])}

    def goal_weight(self, factors=None, sequence=None):
        return float(sigmoid(self.params["beta_raw"])[0])


class Adam:
    """Standard Adam with bias correction; state keyed by parameter name."""

    def __init__(self, param_shapes, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros(s) for k, s in param_shapes.items()}
        self.v = {k: np.zeros(s) for k, s in param_shapes.items()}

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for k, gk in grads.items():
            self.m[k] = b1 * self.m[k] + (1 - b1) * gk
            self.v[k] = b2 * self.v[k] + (1 - b2) * gk * gk
            m_hat = self.m[k] / (1 - b1 ** self.t)
            v_hat = self.v[k] / (1 - b2 ** self.t)
            params[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
