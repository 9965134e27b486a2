"""Experiment runners: representation identities, isometry constants, the
ball/sphere pointwise comparison, integration by parts in t, polarization,
norm-equivalence sweeps and mollifier domination.

Each runner returns an ExperimentReport carrying its parameters, per-item
numbers, thresholds and a pass flag.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, special

from ._parallel import max_workers, pmap
from .averaging import (KernelSpec, ScaleGrid, _ball_profile,
                        kernel_convolve, kernel_spectrum, sphere_multiplier,
                        unit_ball_volume)
from .field import (Bump, Gaussian, GridSpec, RandomBandlimited, ScalarField, lp_norm,
                    sample)
from .spectral import gradient, mollify, profile_from_coefficients, transform
from .squarefn import (family_S_tilde, family_T_tilde,
                       scale_integrate, square_S, square_T)
from .weights import WeightSpec, weighted_lp_norm

__all__ = [
    "ExperimentReport",
    "smooth_corpus",
    "bandlimited_corpus",
    "continuum_constant",
    "profile_constant",
    "representation_residuals",
    "verify_representation",
    "estimate_isometry_constants",
    "truncation_bound",
    "verify_pointwise_inequality",
    "verify_parts_identity",
    "verify_polarization",
    "norm_equivalence_sweep",
    "verify_mollifier_domination",
]


# ---------------------------------------------------------------------------
# reports

def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    items: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    passed: bool = True
    wall_time: float | None = None

    def to_dict(self) -> dict:
        d = {
            "experiment": self.experiment,
            "params": _plain(self.params),
            "items": _plain(self.items),
            "constants": _plain(self.constants),
            "thresholds": _plain(self.thresholds),
            "pass": bool(self.passed),
        }
        # timing would break byte-identical sequential reruns
        if self.wall_time is not None:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = []
        for it in self.items:
            for k in it:
                if k not in cols:
                    cols.append(k)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment"] + cols)
        for it in self.items:
            w.writerow([self.experiment] + [_csv_cell(it.get(k, "")) for k in cols])
        return buf.getvalue()

    def save(self, path, fmt: str | None = None) -> None:
        path = Path(path)
        fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
        text = self.to_csv() if fmt == "csv" else self.to_json()
        path.write_text(text, encoding="utf-8")


def _csv_cell(v):
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return ";".join(str(x) for x in v)
    return v


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0

    def stamp(self, report: ExperimentReport) -> ExperimentReport:
        if max_workers() > 1:
            report.wall_time = round(time.perf_counter() - self.t0, 6)
        return report


def _grid_params(grid: GridSpec) -> dict:
    return {"n": grid.n, "N": grid.N, "L": grid.L}


def _scale_params(sc: ScaleGrid) -> dict:
    return {"t_min": sc.t_min, "t_max": sc.t_max, "M": sc.M, "nodes": len(sc.nodes)}


# ---------------------------------------------------------------------------
# corpora

def smooth_corpus(grid: GridSpec, size: int = 10, seed: int = 0) -> list:
    """Gaussians and bumps, wide enough to be resolved at the box's scales.

    Returns (descriptor, field) pairs.  Widths are relative to L so the
    corpus is resolution independent.
    """
    rng = np.random.default_rng(seed)
    L, n = grid.L, grid.n
    out = []
    k = 0
    while len(out) < size:
        if k % 3 == 2:
            radius = L * rng.uniform(0.15, 0.18)
            room = L / 2 - radius - 0.02 * L
            c = tuple(float(v) for v in rng.uniform(-1, 1, n) * min(room, 0.1 * L))
            gen = Bump(radius, c)
            desc = f"bump(radius={radius:.6g},center={c})"
        else:
            sigma = L * rng.uniform(0.08, 0.14)
            room = L / 2 - Gaussian(sigma).support_radius() - 0.01 * L
            c = tuple(float(v) for v in rng.uniform(-1, 1, n) * min(room, 0.1 * L))
            gen = Gaussian(sigma, c)
            desc = f"gaussian(sigma={sigma:.6g},center={c})"
        out.append((desc, sample(grid, gen)))
        k += 1
    return out


def bandlimited_corpus(grid: GridSpec, size: int = 5, seed: int = 0,
                       kmin: float | None = None, kmax: float | None = None) -> list:
    """Random fields with integer modes kmin <= |m| <= kmax (defaults N/32, N/8)."""
    kmin = grid.N / 32 if kmin is None else kmin
    kmax = grid.N / 8 if kmax is None else kmax
    out = []
    for i in range(size):
        gen = RandomBandlimited(kmax, seed=seed + i, kmin=kmin)
        out.append((f"bandlimited(kmin={kmin:g},K={kmax:g},seed={seed + i})", sample(grid, gen)))
    return out


# ---------------------------------------------------------------------------
# constants

def _continuum_profile(n: int, kind: str, u: np.ndarray) -> np.ndarray:
    """h(k) at u = 2 pi k: -(1 - m(u))/u with m the sphere or ball multiplier."""
    if kind == "phi":
        m = {1: np.cos, 2: special.j0, 3: lambda z: np.sinc(z / math.pi)}[n](u)
    else:
        m = _ball_profile(n, np.asarray(u, float))
    return -(1 - m) / u


def continuum_constant(n: int, kind: str = "phi") -> float:
    """C^2 = int_0^inf h(k)^2 dk/k for the sphere (phi) or ball (psi) kernel.

    Gauss-Kronrod on [0, U] split at multiples of pi, plus the tail beyond U
    where h^2 ~ (1 + <m^2>)/u^2 with the cosine average done exactly.
    """
    def f(u):
        return float(_continuum_profile(n, kind, np.array([u]))[0] ** 2 / u)

    U = 400 * math.pi
    total = 0.0
    edges = np.arange(0, U + 1e-9, math.pi)
    edges[0] = 1e-12
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, a, b, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
    if n == 1 and kind == "phi":
        # (1 - cos u)^2 / u^3 = (3/2 - 2 cos u + cos(2u)/2) / u^3
        tail = 0.75 / U**2
        tail -= 2 * integrate.quad(lambda u: u**-3, U, np.inf, weight="cos", wvar=1)[0]
        tail += 0.5 * integrate.quad(lambda u: u**-3, U, np.inf, weight="cos", wvar=2)[0]
    else:
        tail = 0.5 / U**2
        if n == 1:
            tail += 0.5 * 0.5 / U**4  # sin^2(u)/u^2 term, averaged
    return total + tail


def _profile_G(grid: GridSpec, kind: str, scales: ScaleGrid, tails: bool):
    """sum_j w_j h_{t_j}(k)^2 on radial bins, from the effective kernel spectra."""
    spec = KernelSpec(kind)
    hs = []
    for t in scales.nodes:
        prof = profile_from_coefficients(grid, kernel_spectrum(grid, spec, float(t)))
        hs.append(prof.values)
    hs = np.array(hs)
    hs[:, 0] = 0.0
    G = scales.weight * (hs**2).sum(0)
    if tails:
        a, b = scales.edges
        t = scales.nodes
        G = G + hs[0] ** 2 * a**2 / (2 * t[0] ** 2) + hs[-1] ** 2 * t[-1] ** 2 / (2 * b**2)
    return prof.k, G, prof.counts


def profile_constant(grid: GridSpec, kind: str, scales: ScaleGrid, kband, tails=True) -> float:
    """Count-weighted mean of G(k) over integer bins m = k L in [kband[0], kband[1]]."""
    k, G, counts = _profile_G(grid, kind, scales, tails)
    m = np.rint(k * grid.L)
    sel = (m >= kband[0]) & (m <= kband[1]) & (counts > 0)
    return float(np.sum(G[sel] * counts[sel]) / np.sum(counts[sel]))


# ---------------------------------------------------------------------------
# representation identities

def representation_residuals(f: ScalarField, t: float) -> tuple[float, float]:
    """max |(f - f_S) - t phi_t*grad f| and the ball/psi analogue, relative to
    ||grad f||_inf t."""
    from .averaging import ball_mean, sphere_mean
    df = gradient(f)
    scale = float(df.magnitude().values.max()) * t
    if scale == 0:
        return 0.0, 0.0
    rs = (f - sphere_mean(f, t)) - kernel_convolve(KernelSpec("phi"), df, t) * t
    rb = (f - ball_mean(f, t)) - kernel_convolve(KernelSpec("psi"), df, t) * t
    return (float(np.abs(rs.values).max()) / scale, float(np.abs(rb.values).max()) / scale)


def verify_representation(f: ScalarField, t: float, tol: float = 1e-3, name: str = "f") -> ExperimentReport:
    with _Timer() as tm:
        s, b = representation_residuals(f, t)
    rep = ExperimentReport(
        "representation", {**_grid_params(f.grid), "t": t, "field": name},
        items=[{"identity": "sphere/phi", "residual": s}, {"identity": "ball/psi", "residual": b}],
        thresholds={"residual": tol}, passed=max(s, b) <= tol)
    return tm.stamp(rep)


# ---------------------------------------------------------------------------
# isometry constants

def estimate_isometry_constants(corpus, scales: ScaleGrid, tails: bool = True,
                                spread_tol: float = 0.01, route_tol: float = 0.02) -> ExperimentReport:
    """||T~g||_2/||g||_2 and ||S~g||_2/||g||_2 over band-limited fields, against
    the scale quadrature of the squared radial kernel profiles."""
    with _Timer() as tm:
        items, rT, rS = [], [], []
        grid = corpus[0][1].grid
        band = [np.inf, 0.0]
        for desc, g in corpus:
            gn = lp_norm(g, 2)
            a = lp_norm(scale_integrate(family_T_tilde(g, scales), tails), 2) / gn
            b = lp_norm(scale_integrate(family_S_tilde(g, scales), tails), 2) / gn
            rT.append(a)
            rS.append(b)
            items.append({"field": desc, "ratio_T": a, "ratio_S": b})
            c = np.abs(transform(g).coefficients)
            m = np.sqrt(sum(x**2 for x in np.meshgrid(
                *([np.fft.fftfreq(grid.N, 1.0 / grid.N)] * grid.n), indexing="ij", sparse=True)))
            live = m[c > 1e-8 * c.max()]
            band = [min(band[0], float(live.min())), max(band[1], float(live.max()))]
        band = [math.floor(band[0]), math.ceil(band[1])]
        C1 = float(np.mean(rT))
        C2 = float(np.mean(rS))
        P1 = math.sqrt(profile_constant(grid, "phi", scales, band, tails))
        P2 = math.sqrt(profile_constant(grid, "psi", scales, band, tails))
        cons = {
            "C1": C1, "C2": C2,
            "C1_profile": P1, "C2_profile": P2,
            "spread_T": max(rT) / min(rT) - 1, "spread_S": max(rS) / min(rS) - 1,
            "route_T": abs(C1 / P1 - 1), "route_S": abs(C2 / P2 - 1),
            "C1_sq_continuum": continuum_constant(grid.n, "phi"),
            "C2_sq_continuum": continuum_constant(grid.n, "psi"),
            "band": band,
        }
        ok = (cons["spread_T"] <= spread_tol and cons["spread_S"] <= spread_tol
              and cons["route_T"] <= route_tol and cons["route_S"] <= route_tol)
        if grid.n == 1:
            cons["continuum_route_T"] = abs(C1**2 / cons["C1_sq_continuum"] - 1)
            ok = ok and cons["continuum_route_T"] <= route_tol
    rep = ExperimentReport(
        "isometry", {**_grid_params(grid), **_scale_params(scales), "tails": tails},
        items=items, constants=cons,
        thresholds={"spread": spread_tol, "route": route_tol}, passed=bool(ok))
    return tm.stamp(rep)


# ---------------------------------------------------------------------------
# ball versus sphere, integration by parts in t

def _mean_at(f: ScalarField, t: float, which: str) -> ScalarField:
    """Unchecked sphere/ball mean (the quadrature edges may sit just outside [h, L/4])."""
    from .averaging import _apply_real, _ball_profile
    from .spectral import wavenumber
    z = 2 * math.pi * t * wavenumber(f.grid)
    if which == "ball":
        m = _ball_profile(f.grid.n, z)
    else:
        m = sphere_multiplier(f.grid, t)
    return _apply_real(f, m)


def _log_rule(eps: float, T: float, M: int, rule: str = "gauss"):
    """Nodes and weights for dt/t on [eps, T], spanning it exactly.

    'gauss': one Gauss-Legendre panel of M nodes per octave (in log t);
    'midpoint': M equal log-steps per octave.
    """
    width = math.log(T / eps)
    K = max(1, int(math.ceil(math.log2(T / eps) - 1e-9)))
    if rule == "midpoint":
        K = max(1, int(math.ceil(M * math.log2(T / eps) - 1e-9)))
        s = (np.arange(K) + 0.5) / K
        return eps * (T / eps) ** s, np.full(K, width / K)
    x, w = np.polynomial.legendre.leggauss(M)
    s = ((np.arange(K)[:, None] + 0.5 * (x[None, :] + 1)) / K).ravel()
    return eps * (T / eps) ** s, np.tile(w * 0.5 * width / K, K)


def _parts_terms(f: ScalarField, nodes, w, eps: float, T: float):
    """(I_B, [A(T) - A(eps)]/omega^2, B/omega^2) as fields, all in the dt/t^3 measure."""
    n = f.grid.n
    IB = np.zeros(f.grid.shape)
    Bq = np.zeros(f.grid.shape)
    for t, wt in zip(nodes, np.broadcast_to(w, np.shape(nodes))):
        dB = f.values - _mean_at(f, t, "ball").values
        dS = f.values - _mean_at(f, t, "sphere").values
        IB += wt * dB**2 / t**2
        Bq += wt * dB * dS / t**2
    Bq *= 2 * n / (2 * n + 2)

    def A(t):
        d = f.values - _mean_at(f, t, "ball").values
        return -d**2 / ((2 * n + 2) * t**2)

    return IB, A(T) - A(eps), Bq


def truncation_bound(f: ScalarField, scales: ScaleGrid) -> np.ndarray:
    """Pointwise bound E with Sq^2 <= (n/(n+2)) Tq^2 + E on the quadrature.

    On the rule, Sq^2 = dA + (n/(n+1)) X + r with dA = A(b) - A(a) over the
    edges [a, b], X = sum w (f - f_B)(f - f_S)/t^2 <= Sq Tq, and r the
    residual of the integration-by-parts identity at the same nodes.
    Splitting Sq Tq <= (Sq^2 + Tq^2)/2 gives
    E = (2n+2)/(n+2) ((dA)_+ + |r|).
    """
    n = f.grid.n
    a, b = scales.edges
    IB, Adiff, Bq = _parts_terms(f, scales.nodes, scales.weight, a, b)
    resid = IB - (Adiff + Bq)
    return (2 * n + 2) / (n + 2) * (np.clip(Adiff, 0, None) + np.abs(resid))


def verify_pointwise_inequality(f: ScalarField, scales: ScaleGrid, constant: str = "stated",
                                slack: float = 1e-8, name: str = "f") -> ExperimentReport:
    """Sf <= c Tf + eps_trunc pointwise.

    ``constant='stated'`` uses c = n/(n+2); ``constant='sqrt'`` uses
    c = sqrt(n/(n+2)), the constant the integration-by-parts argument yields
    once the product bound ab <= (a^2 + b^2)/2 is applied.
    """
    with _Timer() as tm:
        n = f.grid.n
        c = n / (n + 2)
        if constant == "sqrt":
            c = math.sqrt(c)
        elif constant != "stated":
            raise ValueError("constant must be 'stated' or 'sqrt'")
        S = square_S(f, scales).values
        T = square_T(f, scales).values
        eps_trunc = np.sqrt(truncation_bound(f, scales))
        excess = S - (c * T + eps_trunc + slack)
        bad = excess > 0
        ratio = np.divide(S, T, out=np.zeros_like(S), where=T > 1e-12 * max(T.max(), 1e-300))
        worst = np.unravel_index(int(np.argmax(excess)), excess.shape)
        item = {
            "field": name,
            "violations": int(bad.sum()),
            "max_excess": float(excess.max()),
            "max_ratio_S_over_T": float(ratio.max()),
            "worst_point": [float(v) for v in f.grid.point(worst)],
            "max_eps_trunc": float(eps_trunc.max()),
        }
    rep = ExperimentReport(
        "pointwise", {**_grid_params(f.grid), **_scale_params(scales), "constant": constant, "c": c},
        items=[item], thresholds={"slack": slack}, passed=not bad.any())
    return tm.stamp(rep)


def verify_parts_identity(f: ScalarField, x, eps: float, T: float, M: int = 8,
                          tol: float = 1e-3, rule: str = "gauss") -> ExperimentReport:
    """omega^2 int_eps^T |f - f_B|^2 dt/t^3 against A(T) - A(eps) + B at one point.

    Both integrals use the same rule in log t with M nodes per octave,
    spanning [eps, T] exactly; B pairs ball and sphere deviations.
    """
    grid = f.grid
    if not (8 * grid.h * (1 - 1e-9) <= eps < T <= grid.L / 8 * (1 + 1e-9)):
        raise ValueError("need 8h <= eps < T <= L/8")
    with _Timer() as tm:
        idx = grid.index_of(x)
        nodes, w = _log_rule(eps, T, M, rule)
        om2 = unit_ball_volume(grid.n) ** 2
        IB, Adiff, Bq = _parts_terms(f, nodes, w, eps, T)
        lhs = om2 * float(IB[idx])
        rhs = om2 * float(Adiff[idx] + Bq[idx])
        scale = max(abs(lhs), abs(rhs))
        rel = abs(lhs - rhs) / scale if scale > 0 else 0.0
        item = {"x": [float(v) for v in grid.point(idx)], "lhs": lhs, "rhs": rhs,
                "relative_residual": rel}
    rep = ExperimentReport(
        "parts", {**_grid_params(grid), "eps": eps, "T": T, "M": M, "rule": rule,
                  "nodes": len(nodes)},
        items=[item], thresholds={"relative_residual": tol}, passed=rel <= tol)
    return tm.stamp(rep)


# ---------------------------------------------------------------------------
# polarization

def verify_polarization(g: ScalarField, h_field: ScalarField, scales: ScaleGrid,
                        C1_sq: float | None = None, tails: bool = True,
                        tol: float = 0.02) -> ExperimentReport:
    """int sum_j w_j (phi_t*Rg)(phi_t*Rh) dx against C1^2 int g h dx."""
    with _Timer() as tm:
        grid = g.grid
        Fg = family_T_tilde(g, scales)
        Fh = family_T_tilde(h_field, scales)
        acc = np.zeros(grid.shape)
        for a, b in zip(Fg, Fh):
            acc += scales.weight * a.values * b.values
        if tails:
            lo, hi = scales.edges
            t = scales.nodes
            acc += Fg[0].values * Fh[0].values * lo**2 / (2 * t[0] ** 2)
            acc += Fg[-1].values * Fh[-1].values * t[-1] ** 2 / (2 * hi**2)
        lhs = float(acc.sum()) * grid.cell_volume
        if C1_sq is None:
            C1_sq = continuum_constant(grid.n, "phi")
        inner = float(np.sum(g.values * h_field.values)) * grid.cell_volume
        rhs = C1_sq * inner
        scale = lp_norm(g, 2) * lp_norm(h_field, 2) * C1_sq
        res = abs(lhs - rhs) / scale
    rep = ExperimentReport(
        "polarization", {**_grid_params(grid), **_scale_params(scales), "tails": tails},
        items=[{"lhs": lhs, "rhs": rhs, "inner_product": inner, "relative_residual": res}],
        constants={"C1_sq": C1_sq}, thresholds={"relative_residual": tol}, passed=res <= tol)
    return tm.stamp(rep)


# ---------------------------------------------------------------------------
# norm equivalence

def norm_equivalence_sweep(corpus, p_list=(1.5, 2.0, 3.0), weight: WeightSpec | None = None,
                           scales: ScaleGrid | None = None, tails: bool = True,
                           p2_tol: float = 0.02, spread_tol: float = 10.0,
                           weighted_spread_tol: float = 25.0) -> ExperimentReport:
    """Ratios ||Tf||/||grad f|| and ||Sf||/||grad f|| per field and p."""
    grid = corpus[0][1].grid
    n = grid.n
    if weight is not None:
        for p in p_list:
            if not weight.admissible(n, p):
                raise ValueError(f"alpha={weight.alpha} is not an A_p exponent for p={p}, n={n}")
    scales = scales or ScaleGrid.for_grid(grid, 8 * grid.h, grid.L / 4)
    with _Timer() as tm:
        def one(item):
            desc, f = item
            T = square_T(f, scales, tails=tails)
            S = square_S(f, scales, tails=tails)
            df = gradient(f)
            rows = []
            for p in p_list:
                gn = weighted_lp_norm(df, weight, p)
                rows.append({"field": desc, "p": p,
                             "ratio_T": weighted_lp_norm(T, weight, p) / gn,
                             "ratio_S": weighted_lp_norm(S, weight, p) / gn})
            return rows

        items = [r for rows in pmap(one, corpus) for r in rows]
        cons, ok = {}, True
        C1 = math.sqrt(continuum_constant(n, "phi"))
        C2 = math.sqrt(continuum_constant(n, "psi"))
        for p in p_list:
            for key in ("ratio_T", "ratio_S"):
                v = np.array([it[key] for it in items if it["p"] == p])
                finite = bool(np.all(np.isfinite(v)) and np.all(v > 0))
                spread = float(v.max() / v.min()) if finite else math.inf
                cons[f"{key}_p{p:g}"] = {"min": float(v.min()), "max": float(v.max()),
                                         "spread": spread, "finite": finite}
                if weight is not None:
                    ok = ok and finite and spread <= weighted_spread_tol
                elif p == 2:
                    target = C1 if key == "ratio_T" else C2
                    dev = float(np.max(np.abs(v / target - 1)))
                    cons[f"{key}_p2"]["target"] = target
                    cons[f"{key}_p2"]["max_deviation"] = dev
                    ok = ok and dev <= p2_tol
                else:
                    ok = ok and finite and spread <= spread_tol
        cons["C1"] = C1
        cons["C2"] = C2
    rep = ExperimentReport(
        "equivalence",
        {**_grid_params(grid), **_scale_params(scales), "p_list": list(p_list),
         "alpha": None if weight is None else weight.alpha, "tails": tails,
         "corpus_size": len(corpus)},
        items=items, constants=cons,
        thresholds={"p2_relative": p2_tol, "spread": spread_tol,
                    "weighted_spread": weighted_spread_tol},
        passed=bool(ok))
    return tm.stamp(rep)


# ---------------------------------------------------------------------------
# mollifier domination

def verify_mollifier_domination(f: ScalarField, eps: float, scales: ScaleGrid,
                                slack: float = 1e-8, name: str = "f") -> ExperimentReport:
    """K(f * phi_eps) <= K(f) * phi_eps pointwise, K in {T, S}."""
    with _Timer() as tm:
        fe = mollify(f, eps)
        items, ok = [], True
        for label, op in (("T", square_T), ("S", square_S)):
            lhs = op(fe, scales).values
            rhs = mollify(op(f, scales), eps).values
            excess = lhs - rhs - slack
            items.append({"field": name, "operator": label, "eps": eps,
                          "violations": int((excess > 0).sum()),
                          "max_excess": float((lhs - rhs).max())})
            ok = ok and not (excess > 0).any()
    rep = ExperimentReport(
        "mollifier", {**_grid_params(f.grid), **_scale_params(scales), "eps": eps},
        items=items, thresholds={"slack": slack}, passed=bool(ok))
    return tm.stamp(rep)
