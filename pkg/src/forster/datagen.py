"""Synthetic instance generators for experiments and tests.

Spec strings:
    sphere-uniform                      points uniform on the unit sphere
    gaussian                            standard normal points
    dense-subspace:K:FRACTION           plant a K-dim subspace holding
                                        ceil(FRACTION * n) of the points
    margin-halfspace:GAMMA[:WSEED]      labeled, margin >= GAMMA from a random
                                        unit w* (separate seed optional)
    rcn:ETA:INNER                       INNER labels flipped i.i.d. w.p. ETA

Every generator returns (points, labels-or-None, ground_truth dict).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BadSpec


def _sphere(rng, n, d):
    pts = rng.standard_normal((n, d))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _gaussian(rng, n, d):
    pts = rng.standard_normal((n, d))
    norms = np.linalg.norm(pts, axis=1)
    while np.any(norms <= 1e-12):
        redo = norms <= 1e-12
        pts[redo] = rng.standard_normal((int(np.sum(redo)), d))
        norms = np.linalg.norm(pts, axis=1)
    return pts


def _dense_subspace(rng, n, d, k, fraction):
    if not (0 < k < d) or not (0.0 < fraction <= 1.0):
        raise BadSpec("dense-subspace needs 0 < k < d and fraction in (0, 1]",
                      k=k, fraction=fraction)
    inside = math.ceil(fraction * n)
    basis, _ = np.linalg.qr(rng.standard_normal((d, k)))
    planted = _sphere(rng, inside, k) @ basis.T
    rest = _sphere(rng, n - inside, d) if n > inside else np.zeros((0, d))
    pts = np.vstack([planted, rest])
    truth = {"kind": "dense-subspace", "k": k, "fraction": fraction,
             "basis": basis.T.tolist(), "members": list(range(inside))}
    return pts, None, truth


def _margin_halfspace(rng, n, d, gamma, w_seed=None):
    if not (0.0 < gamma < 1.0):
        raise BadSpec("margin must be in (0, 1)", gamma=gamma)
    w_rng = np.random.default_rng(w_seed) if w_seed is not None else rng
    w = w_rng.standard_normal(d)
    w /= np.linalg.norm(w)
    pts = np.zeros((n, d))
    got = 0
    while got < n:
        cand = _sphere(rng, 2 * (n - got) + 8, d)
        keep = cand[np.abs(cand @ w) >= gamma]
        take = min(keep.shape[0], n - got)
        pts[got:got + take] = keep[:take]
        got += take
    labels = np.where(pts @ w >= 0, 1, -1)
    truth = {"kind": "margin-halfspace", "gamma": gamma,
             "w_star": w.tolist(), "t_star": 0.0}
    return pts, labels, truth


def parse_spec(spec: str):
    parts = spec.split(":")
    name = parts[0]
    if name == "sphere-uniform" and len(parts) == 1:
        return ("sphere-uniform",)
    if name == "gaussian" and len(parts) == 1:
        return ("gaussian",)
    if name == "dense-subspace" and len(parts) == 3:
        try:
            return ("dense-subspace", int(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise BadSpec(f"bad dense-subspace parameters: {spec}") from exc
    if name == "margin-halfspace" and len(parts) in (2, 3):
        try:
            w_seed = int(parts[2]) if len(parts) == 3 else None
            return ("margin-halfspace", float(parts[1]), w_seed)
        except ValueError as exc:
            raise BadSpec(f"bad margin-halfspace parameters: {spec}") from exc
    if name == "rcn" and len(parts) >= 3:
        try:
            eta = float(parts[1])
        except ValueError as exc:
            raise BadSpec(f"bad rcn noise rate: {spec}") from exc
        if not (0.0 <= eta < 0.5):
            raise BadSpec("rcn noise rate must be in [0, 0.5)", eta=eta)
        return ("rcn", eta, ":".join(parts[2:]))
    raise BadSpec(f"unrecognized generator spec: {spec!r}")


def generate(spec: str, seed: int, n: int, d: int):
    """Generate an instance; returns (points, labels_or_None, ground_truth)."""
    parsed = parse_spec(spec)
    rng = np.random.default_rng(seed)
    if parsed[0] == "sphere-uniform":
        return _sphere(rng, n, d), None, {"kind": "sphere-uniform"}
    if parsed[0] == "gaussian":
        return _gaussian(rng, n, d), None, {"kind": "gaussian"}
    if parsed[0] == "dense-subspace":
        return _dense_subspace(rng, n, d, parsed[1], parsed[2])
    if parsed[0] == "margin-halfspace":
        return _margin_halfspace(rng, n, d, parsed[1], parsed[2])
    if parsed[0] == "rcn":
        eta, inner = parsed[1], parsed[2]
        pts, labels, truth = generate(inner, seed + 1, n, d)
        if labels is None:
            raise BadSpec("rcn wraps a labeled generator", inner=inner)
        flips = rng.random(n) < eta
        noisy = np.where(flips, -labels, labels)
        truth = {"kind": "rcn", "eta": eta, "flipped": int(np.sum(flips)),
                 "inner": truth}
        return pts, noisy, truth
    raise BadSpec(f"unrecognized generator spec: {spec!r}")


def halfspace_oracle(d: int, w_seed: int, margin: float = 0.0):
    """Sampling oracle for learn_halfspace: uniform-sphere marginals labeled
    by a fixed random unit vector w* (optionally with a margin floor)."""
    from .learner import LabeledSet

    w_rng = np.random.default_rng(w_seed)
    w = w_rng.standard_normal(d)
    w /= np.linalg.norm(w)

    def oracle(m, rng):
        if margin > 0.0:
            pts = np.zeros((m, d))
            got = 0
            while got < m:
                cand = _sphere(rng, 2 * (m - got) + 8, d)
                keep = cand[np.abs(cand @ w) >= margin]
                take = min(keep.shape[0], m - got)
                pts[got:got + take] = keep[:take]
                got += take
        else:
            pts = _sphere(rng, m, d)
        return LabeledSet(pts, np.where(pts @ w >= 0, 1, -1))

    oracle.w_star = w
    return oracle
