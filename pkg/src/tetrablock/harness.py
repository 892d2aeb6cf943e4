"""Seeded instance generators with known ground truth, and the suite runner."""
from __future__ import annotations

import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional
from xml.etree import ElementTree as ET

import numpy as np

from .decomposition import canonical_decompose, unitary_subspace
from .errors import SymbolConditionsViolated, TetraError, ValidationError
from .fundamental import commutator_report, fundamental_operators
from .geometry import TetraPoint, in_closed_E
from .models import (build_coisometry_model, build_dilation, build_toeplitz_pure_isometry,
                     toeplitz_truncation, verify_dilation)
from .numkit import DEFAULT_TOL, adj, block_diag, haar_unitary, identity, op_norm
from .triples import (OperatorTriple, classify_E_unitary, joint_eigenvalues,
                      rho_check, rho_tolerance, vn_falsifier)

KINDS = ("e_unitary", "toeplitz_compression", "direct_sum", "conjugated", "near_miss",
         "diagonal")
NEAR_MISS_VARIANTS = ("point", "symbol_norm", "symbol_commute")


@dataclass
class GeneratorSpec:
    """What to generate.

    ``dim`` is the size of the E-unitary summand (``e_unitary``,
    ``direct_sum``), the symbol size (``toeplitz_compression``) or the number
    of diagonal points (``diagonal``). ``k`` and ``levels`` size the Toeplitz
    summand of a direct sum; ``interior`` adds that many diagonal points
    from the open tetrablock to it.
    """

    kind: str
    dim: int = 1
    seed: int = 0
    k: int = 1
    levels: int = 4
    interior: int = 0
    base: str = "direct_sum"
    variant: Optional[str] = None
    a1: Optional[list] = None
    a2: Optional[list] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.variant is not None and self.variant not in NEAR_MISS_VARIANTS:
            raise ValueError(f"unknown near-miss variant {self.variant!r}")


def _unimodular(n, rng):
    return np.exp(2j * np.pi * rng.random(n))


def _disc(n, rng, radius=1.0):
    return radius * np.sqrt(rng.random(n)) * _unimodular(n, rng)


def gen_e_unitary(d: int, seed: int = 0, b=None, p=None, conjugate: bool = True) -> OperatorTriple:
    """Diagonal ``(conj(b) p, b, p)`` with ``|p| = 1``, ``|b| <= 1``, then a Haar conjugation."""
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = np.random.default_rng(seed)
    p = _unimodular(d, rng) if p is None else np.asarray(p, complex).reshape(d)
    b = _disc(d, rng) if b is None else np.asarray(b, complex).reshape(d)
    t = OperatorTriple(np.diag(np.conj(b) * p), np.diag(b), np.diag(p))
    if conjugate:
        t = t.conjugated(haar_unitary(d, rng))
        t = OperatorTriple(t.A, t.B, t.P)
    return t


def _random_symbols(k, rng, norm_range=(0.0, 1.0)):
    """Diagonal symbol entries with ``|a1_i| + |a2_i|`` drawn from ``norm_range``."""
    s = rng.uniform(*norm_range, size=k)
    frac = rng.random(k)
    a1 = s * frac * _unimodular(k, rng)
    a2 = s * (1 - frac) * _unimodular(k, rng)
    return a1, a2


def interior_points(n, rng, max_slack=0.9):
    """Points of the open tetrablock with ``|x3| < 1`` (for diagonal cnu summands)."""
    pts = []
    while len(pts) < n:
        s = rng.uniform(0.05, max_slack)
        frac = rng.random()
        c1 = (1 - s) * frac * _unimodular(1, rng)[0]
        c2 = (1 - s) * (1 - frac) * _unimodular(1, rng)[0]
        x3 = _disc(1, rng, 0.95)[0]
        pts.append(TetraPoint.from_certificate(c1, c2, x3))
    return pts


def _toeplitz_triple(a1, a2, N):
    m = build_toeplitz_pure_isometry(np.diag(a1), np.diag(a2), N)
    return m.toeplitz_triple.as_triple(), m


def gen_e_contraction(spec: GeneratorSpec):
    """Build the instance described by ``spec``.

    Returns ``(triple, ground_truth)``; ``ground_truth`` is a JSON-friendly
    dict with at least ``e_contraction`` (bool) and, for genuine
    E-contractions, ``unitary_dim``.
    """
    rng = np.random.default_rng(spec.seed)
    kind = spec.kind
    if kind == "e_unitary":
        t = gen_e_unitary(spec.dim, int(rng.integers(2**31)))
        return t, {"kind": kind, "e_contraction": True, "unitary_dim": spec.dim}
    if kind == "diagonal":
        pts = interior_points(spec.dim, rng)
        return OperatorTriple.diagonal(pts), {"kind": kind, "e_contraction": True,
                                              "unitary_dim": 0}
    if kind == "toeplitz_compression":
        if spec.a1 is not None:
            a1 = np.asarray(spec.a1, complex).reshape(-1)
            a2 = np.asarray(spec.a2, complex).reshape(-1)
        else:
            a1, a2 = _random_symbols(spec.dim, rng)
        t, _ = _toeplitz_triple(a1, a2, spec.levels)
        return t, {"kind": kind, "e_contraction": True, "unitary_dim": 0,
                   "levels": spec.levels, "symbols": _sym_json(a1, a2)}
    if kind == "direct_sum":
        parts = []
        if spec.dim:
            parts.append(gen_e_unitary(spec.dim, int(rng.integers(2**31))))
        a1, a2 = _random_symbols(spec.k, rng)
        parts.append(_toeplitz_triple(a1, a2, spec.levels)[0])
        if spec.interior:
            parts.append(OperatorTriple.diagonal(interior_points(spec.interior, rng)))
        t = OperatorTriple(*(block_diag(*(getattr(p, X) for p in parts)) for X in "ABP"))
        return t, {"kind": kind, "e_contraction": True, "unitary_dim": spec.dim,
                   "levels": spec.levels, "k": spec.k, "interior": spec.interior}
    if kind == "conjugated":
        base = GeneratorSpec(**{**asdict(spec), "kind": spec.base})
        t, truth = gen_e_contraction(base)
        U = haar_unitary(t.d, rng)
        t = t.conjugated(U)
        t = OperatorTriple(t.A, t.B, t.P)
        return t, {**truth, "kind": kind, "base": spec.base}
    return _near_miss(spec, rng)


def _sym_json(a1, a2):
    return {"a1": [[z.real, z.imag] for z in np.asarray(a1, complex)],
            "a2": [[z.real, z.imag] for z in np.asarray(a2, complex)]}


def _sym_from_json(obj):
    a1 = np.array([complex(*z) for z in obj["a1"]])
    a2 = np.array([complex(*z) for z in obj["a2"]])
    return a1, a2


def _near_miss(spec, rng):
    variant = spec.variant or NEAR_MISS_VARIANTS[int(rng.integers(len(NEAR_MISS_VARIANTS)))]
    truth = {"kind": "near_miss", "variant": variant, "e_contraction": False}
    if variant == "point":
        if rng.random() < 0.75:
            s = rng.uniform(1.05, 1.5)
            frac = rng.random()
            c1 = s * frac * _unimodular(1, rng)[0]
            c2 = s * (1 - frac) * _unimodular(1, rng)[0]
            p = TetraPoint.from_certificate(c1, c2, _disc(1, rng, 0.95)[0])
        else:
            x3 = rng.uniform(1.05, 1.3) * _unimodular(1, rng)[0]
            c1, c2 = (_disc(1, rng, 0.5)[0] for _ in range(2))
            p = TetraPoint(c1 + np.conj(c2) * x3, c2 + np.conj(c1) * x3, x3)
        t = OperatorTriple.scalar(p.x1, p.x2, p.x3)
        truth["point"] = [[z.real, z.imag] for z in (p.x1, p.x2, p.x3)]
        return t, truth
    k = max(spec.dim, 2 if variant == "symbol_commute" else 1)
    N = max(spec.levels, 2)
    if variant == "symbol_norm":
        a1, a2 = _random_symbols(k, rng, (0.3, 0.95))
        i = int(rng.integers(k))
        s = rng.uniform(1.05, 1.4)
        tot = abs(a1[i]) + abs(a2[i])
        a1[i] *= s / tot
        a2[i] *= s / tot
        A1, A2 = np.diag(a1), np.diag(a2)
    else:
        Z1 = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        Z2 = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        scale = 2.2 * (op_norm(Z1) + op_norm(Z2))
        A1, A2 = Z1 / scale, Z2 / scale
    T = OperatorTriple(toeplitz_truncation(adj(A1), A2, N),
                       toeplitz_truncation(adj(A2), A1, N),
                       toeplitz_truncation(np.zeros((k, k)), identity(k), N), check=False)
    truth["A1"] = [[[z.real, z.imag] for z in row] for row in A1]
    truth["A2"] = [[[z.real, z.imag] for z in row] for row in A2]
    truth["levels"] = N
    return T, truth


def _mat_from_truth(rows):
    return np.array([[complex(*z) for z in row] for row in rows])


@dataclass
class FalsifierSettings:
    max_degree: int = 3
    n_polys: int = 20
    n_points: int = 2000
    rho_samples: int = 64


def falsify(t: OperatorTriple, truth: Optional[dict] = None,
            settings: FalsifierSettings = FalsifierSettings(), seed: int = 0) -> list:
    """Names of every checker that rejects ``t`` as an E-contraction.

    Checkers: ``validation`` (non-commuting), ``in_closed_E`` (scalar or normal
    triples whose joint spectrum leaves the closed tetrablock), ``rho``,
    ``vn`` and, when ``truth`` carries Toeplitz symbols, ``symbol_conditions``.
    """
    caught = []
    bound = t.commute_bound()
    if any(c > bound for c in t.commutator_norms().values()):
        caught.append("validation")
    if t.d == 1 or "validation" not in caught:
        je = [TetraPoint(t.A[0, 0], t.B[0, 0], t.P[0, 0])] if t.d == 1 else joint_eigenvalues(t, seed)
        if je is not None and not all(in_closed_E(p, t.tol).member for p in je):
            caught.append("in_closed_E")
    if min(rho_check(t, settings.rho_samples, seed)) < -rho_tolerance(t):
        caught.append("rho")
    if vn_falsifier(t, settings.max_degree, settings.n_polys, settings.n_points, seed):
        caught.append("vn")
    if truth:
        syms = None
        if "A1" in truth:
            syms = _mat_from_truth(truth["A1"]), _mat_from_truth(truth["A2"])
        elif "symbols" in truth and truth.get("kind") == "toeplitz_compression":
            a1, a2 = _sym_from_json(truth["symbols"])
            syms = np.diag(a1), np.diag(a2)
        if syms is not None:
            try:
                build_toeplitz_pure_isometry(syms[0], syms[1], truth.get("levels", 2) or 2, t.tol)
            except SymbolConditionsViolated:
                caught.append("symbol_conditions")
    return caught


# ---------------------------------------------------------------- suite runner

SUITES = ("decomposition", "fundamental", "dilation", "toeplitz", "model", "near_miss",
          "generators")


def default_config() -> dict:
    return {"seeds": 100, "max_dim": 12, "levels": 8, "near_miss": 100,
            "suites": list(SUITES),
            "vn": {"max_degree": 3, "n_polys": 10, "n_points": 2000}}


def direct_sum_spec(seed: int, max_dim: int = 12) -> GeneratorSpec:
    """Random conjugated direct sum of an E-unitary and a cnu E-contraction, size <= max_dim."""
    rng = np.random.default_rng([seed, 17])
    while True:
        du = int(rng.integers(1, 5))
        k = int(rng.integers(1, 3))
        N = int(rng.integers(2, 5))
        interior = int(rng.integers(0, 3))
        if du + k * N + interior <= max_dim:
            return GeneratorSpec("conjugated", dim=du, seed=seed, k=k, levels=N,
                                 interior=interior, base="direct_sum")


def dilation_instance(seed: int):
    """Scalar or diagonal-normal triple in the closed tetrablock (fundamental operators commute)."""
    rng = np.random.default_rng([seed, 23])
    n = 1 if seed % 2 == 0 else int(rng.integers(2, 5))
    return OperatorTriple.diagonal(interior_points(n, rng))


def model_instance(seed: int):
    """Instances whose adjoint fundamental operators commute and are normal."""
    rng = np.random.default_rng([seed, 29])
    choice = seed % 4
    if choice == 0:
        return OperatorTriple.diagonal(interior_points(int(rng.integers(1, 4)), rng)), 0
    if choice == 1:
        a1, a2 = _random_symbols(int(rng.integers(1, 3)), rng)
        t, _ = _toeplitz_triple(a1, a2, int(rng.integers(2, 4)))
        return t.adjoint(), 0
    du = int(rng.integers(1, 3))
    parts = [gen_e_unitary(du, int(rng.integers(2**31)))]
    parts.append(OperatorTriple.diagonal(interior_points(int(rng.integers(1, 3)), rng)))
    t = OperatorTriple(*(block_diag(*(getattr(p, X) for p in parts)) for X in "ABP"))
    if choice == 3:
        t = t.conjugated(haar_unitary(t.d, rng))
        t = OperatorTriple(t.A, t.B, t.P)
    return t, du


def _case(name, seed, ok, stats, message=""):
    return {"suite": name, "seed": seed, "ok": bool(ok), "stats": stats, "message": message}


def _suite_decomposition(seed, cfg):
    spec = direct_sum_spec(seed, cfg["max_dim"])
    t, truth = gen_e_contraction(spec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = canonical_decompose(t)
    stats = {"k1": r.k1, "expected_k1": truth["unitary_dim"],
             "offdiag_AB": r.max_offdiag("AB"),
             "block_identities": max(r.block_identity_residuals.values(), default=0.0)}
    ok = (r.k1 == truth["unitary_dim"] and stats["offdiag_AB"] <= 1e-8
          and r.unitary_check and r.cnu_check and stats["block_identities"] <= 1e-8)
    return _case("decomposition", seed, ok, stats)


def _suite_fundamental(seed, cfg):
    t, _ = gen_e_contraction(direct_sum_spec(seed, cfg["max_dim"]))
    fp = fundamental_operators(t)
    stats = {"residual": max(fp.residual1, fp.residual2), "defect_dim": fp.defect_dim}
    return _case("fundamental", seed, stats["residual"] <= 1e-8, stats)


def _suite_dilation(seed, cfg):
    t = dilation_instance(seed)
    fp = fundamental_operators(t)
    g = build_dilation(t, fp, cfg["levels"])
    rep = verify_dilation(t, g, max_degree=5, n_words=100, seed=seed)
    stats = {"compression": rep.compression_error,
             "V1-V2*V3": rep.interior["V1-V2*V3"], "V3*V3-I": rep.interior["V3*V3-I"],
             "commutator_report": max(commutator_report(fp).comm_12,
                                      commutator_report(fp).self_comm_gap)}
    ok = max(stats.values()) <= 1e-10 and rep.minimal
    return _case("dilation", seed, ok, stats)


def _suite_toeplitz(seed, cfg):
    rng = np.random.default_rng([seed, 31])
    k = int(rng.integers(1, 4))
    a1, a2 = _random_symbols(k, rng)
    N = int(rng.integers(2, cfg["levels"] + 1))
    t, m = _toeplitz_triple(a1, a2, N)
    vn = cfg.get("vn", {})
    rho = min(rho_check(t, 32, seed))
    viol = vn_falsifier(t, vn.get("max_degree", 3), vn.get("n_polys", 10),
                        vn.get("n_points", 2000), seed)
    analytic = float(np.max(np.abs(a1) + np.abs(a2)))
    stats = {"rho_min": rho, "violations": len(viol),
             "cond3_error": abs(m.conditions[3] - analytic)}
    ok = rho >= -1e-10 and not viol and stats["cond3_error"] <= 1e-6
    return _case("toeplitz", seed, ok, stats)


def _suite_model(seed, cfg):
    t, du = model_instance(seed)
    m = build_coisometry_model(t, cfg["levels"])
    r = m.residuals
    stats = {"restriction": max(r["restriction_A"], r["restriction_B"], r["restriction_P"]),
             "H_invariance": r["H_invariance"],
             "defect_dims": [r["defect_dim_T3"], r["defect_dim_P"]],
             "wold_unitary_dim": r["wold_unitary_dim"], "expected_unitary_dim": du,
             "intertwining": r.get("intertwining", 0.0)}
    ok = (stats["restriction"] <= 1e-8 and r["H_invariance"] == 0.0
          and r["defect_dim_T3"] == r["defect_dim_P"] and r["wold_unitary_dim"] == du
          and stats["intertwining"] <= 1e-8)
    return _case("model", seed, ok, stats)


def _suite_generators(seed, cfg):
    t, truth = gen_e_contraction(direct_sum_spec(seed, cfg["max_dim"]))
    vn = cfg.get("vn", {})
    settings = FalsifierSettings(vn.get("max_degree", 3), vn.get("n_polys", 10),
                                 vn.get("n_points", 2000), 32)
    caught = falsify(t, truth, settings, seed)
    fp = fundamental_operators(t)
    stats = {"false_rejections": caught, "fundamental_residual": max(fp.residual1, fp.residual2)}
    return _case("generators", seed, not caught and stats["fundamental_residual"] <= 1e-8, stats)


def _suite_near_miss(seed, cfg):
    variant = NEAR_MISS_VARIANTS[seed % len(NEAR_MISS_VARIANTS)]
    t, truth = gen_e_contraction(GeneratorSpec("near_miss", dim=2, seed=seed,
                                               levels=3, variant=variant))
    vn = cfg.get("vn", {})
    settings = FalsifierSettings(vn.get("max_degree", 3), vn.get("n_polys", 10),
                                 vn.get("n_points", 2000), 32)
    caught = falsify(t, truth, settings, seed)
    return _case("near_miss", seed, bool(caught), {"variant": variant, "caught_by": caught})


_RUNNERS = {"decomposition": _suite_decomposition, "fundamental": _suite_fundamental,
            "dilation": _suite_dilation, "toeplitz": _suite_toeplitz, "model": _suite_model,
            "near_miss": _suite_near_miss, "generators": _suite_generators}


def _safe(fn, name, seed, cfg):
    try:
        return fn(seed, cfg)
    except (TetraError, ValueError, np.linalg.LinAlgError) as exc:
        return _case(name, seed, False, {}, f"{type(exc).__name__}: {exc}")


def _threads(cfg):
    env = os.environ.get("TETRA_THREADS")
    n = cfg.get("threads") or (int(env) if env else os.cpu_count() or 1)
    return max(1, int(n))


def run_suite(config: Optional[dict] = None) -> dict:
    """Run the configured property suites and return a JSON-friendly report.

    ``config`` keys: ``suites`` (names from :data:`SUITES`), ``seeds``,
    ``near_miss`` (seed count for that suite), ``max_dim``, ``levels``,
    ``vn`` (falsifier sizes) and ``threads``. A config with no suites gives
    an empty, passing report. ``None`` means :func:`default_config`.
    """
    cfg = default_config() if config is None else dict(config)
    suites = cfg.get("suites", [])
    unknown = set(suites) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites {sorted(unknown)}")
    cfg.setdefault("max_dim", 12)
    cfg.setdefault("levels", 8)
    start = time.perf_counter()
    jobs = []
    for name in suites:
        n = cfg.get("near_miss", cfg.get("seeds", 0)) if name == "near_miss" else cfg.get("seeds", 0)
        jobs += [(name, s) for s in range(int(n))]
    with ThreadPoolExecutor(max_workers=_threads(cfg)) as pool:
        cases = list(pool.map(lambda job: _safe(_RUNNERS[job[0]], job[0], job[1], cfg), jobs))
    cases.sort(key=lambda c: (c["suite"], c["seed"]))
    report = {"suites": {}, "passed": True, "failures": []}
    for name in suites:
        mine = [c for c in cases if c["suite"] == name]
        fails = [c for c in mine if not c["ok"]]
        report["suites"][name] = {"cases": len(mine), "failed": len(fails),
                                  "stats": _aggregate([c["stats"] for c in mine])}
        report["failures"] += fails
    report["passed"] = not report["failures"]
    report["runtime_s"] = round(time.perf_counter() - start, 3)
    return report


def _aggregate(stats_list):
    # worst case per numeric stat: min for "*min*" keys, max otherwise
    out = {}
    for stats in stats_list:
        for key, v in stats.items():
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                pick = min if "min" in key else max
                out[key] = pick(out.get(key, v), v)
    return out


def junit_xml(report: dict) -> str:
    root = ET.Element("testsuites")
    for name, s in report.get("suites", {}).items():
        suite = ET.SubElement(root, "testsuite", name=name, tests=str(s["cases"]),
                              failures=str(s["failed"]))
        for f in (c for c in report["failures"] if c["suite"] == name):
            case = ET.SubElement(suite, "testcase", name=f"{name}[{f['seed']}]")
            ET.SubElement(case, "failure", message=f["message"] or "check failed").text = str(f["stats"])
    return ET.tostring(root, encoding="unicode")
