"""Serialized chain descriptions: JSON documents validated against the
published schema, materialized into analysis-ready bundles.

A document either spells out a kernel or generator on labeled states, or
names a model family with its parameters.  Parsing normalizes the document,
so a bundle can be re-serialized and re-parsed into an equivalent chain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Optional

import jsonschema
import numpy as np

from .bounds import KIND_MODEL, BoundCurve, _clip_ratio
from .chain import (
    Generator,
    ProbabilityVector,
    StateSpace,
    StochasticMatrix,
    generator_stationary,
    stationary_distribution,
)
from .errors import (
    AsymmetricInteractionError,
    BadRatesError,
    CurvlabError,
    SpecFormatError,
)
from .metric import (
    GeneratingSet,
    MetricSpace,
    combinatorial_distance,
    trivial_metric,
    verify_generating,
)
from .models import (
    BirthDeathSpec,
    CEPSpec,
    GlauberSpec,
    InterchangeSpec,
    SpinSystem,
    ZRPSpec,
    bdp_m_curve,
    bdp_monotone,
    build_bdp,
    build_cep,
    build_glauber,
    build_interchange,
    build_zrp,
    cep_killed_tail,
    glauber_weakdep,
    interchange_meeting_tail,
    is_mean_field,
    zrp_monotone,
)

_SCHEMA = None


def chainspec_schema() -> dict:
    global _SCHEMA
    if _SCHEMA is None:
        text = (
            resources.files("curvlab").joinpath("schema/chainspec.schema.json")
        ).read_text()
        _SCHEMA = json.loads(text)
    return _SCHEMA


@dataclass
class ChainBundle:
    """A chain ready for analysis: generator (always), native discrete kernel
    when the model is discrete-time, stationary law, metric, generating set,
    the family's model-specific bound curve when one exists, and the
    normalized document it came from."""

    kind: str
    generator: Generator
    kernel: Optional[StochasticMatrix]
    pi: ProbabilityVector
    metric: MetricSpace
    gen_set: GeneratingSet
    document: dict
    model_bound: Optional[Callable] = None  # times -> BoundCurve
    model_bound_note: str = ""
    sim_kind: Optional[str] = None  # which simulator serves this family

    @property
    def discrete(self) -> bool:
        return self.kernel is not None

    @property
    def size(self) -> int:
        return self.generator.size


def load_chain(path) -> ChainBundle:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path} is not valid JSON: {exc}") from exc
    return parse_chain(doc)


def parse_chain(doc: dict) -> ChainBundle:
    """Validate a document against the schema and build the chain."""
    try:
        jsonschema.validate(doc, chainspec_schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "(root)"
        raise SpecFormatError(f"schema violation at {path}: {exc.message}") from exc
    kind = doc["kind"]
    try:
        builder = _BUILDERS[kind]
    except KeyError:  # pragma: no cover - schema already restricts kinds
        raise SpecFormatError(f"unknown chain kind {kind!r}")
    try:
        return builder(doc)
    except SpecFormatError:
        raise
    except (BadRatesError, AsymmetricInteractionError) as exc:
        # malformed parameters: a document problem
        raise SpecFormatError(f"invalid {kind} spec: {exc}") from exc
    except CurvlabError:
        # infeasible preconditions (too large, not irreducible, disconnected
        # support, ...): well-formed document, undoable request
        raise
    except (ValueError, AssertionError) as exc:
        raise SpecFormatError(f"invalid {kind} spec: {exc}") from exc


def _build_explicit(doc: dict) -> ChainBundle:
    labels = doc["labels"]
    if ("matrix" in doc) == ("generator" in doc):
        raise SpecFormatError("give exactly one of 'matrix' or 'generator'")
    space = StateSpace(labels)
    n = space.size

    if "matrix" in doc:
        M = np.asarray(doc["matrix"], dtype=float)
        if M.shape != (n, n):
            raise SpecFormatError(
                f"field 'matrix': expected {n}x{n}, got {M.shape[0]}x"
                f"{M.shape[1] if M.ndim > 1 else '?'}"
            )
        for idx, s in enumerate(M.sum(axis=1)):
            if abs(s - 1.0) > 1e-9:
                raise SpecFormatError(
                    f"field 'matrix', row {idx} ({labels[idx]!r}): sums to {s!r}"
                )
            if np.any(M[idx] < 0):
                raise SpecFormatError(
                    f"field 'matrix', row {idx} ({labels[idx]!r}): negative entry"
                )
        kernel = StochasticMatrix(space, M)
        gen = Generator.from_kernel(kernel)
        pi = stationary_distribution(kernel)
        support_kernel = kernel
    else:
        Lm = np.asarray(doc["generator"], dtype=float)
        if Lm.shape != (n, n):
            raise SpecFormatError(f"field 'generator': expected {n}x{n} matrix")
        off = Lm.copy()
        np.fill_diagonal(off, 0.0)
        if np.any(off < 0):
            raise SpecFormatError("field 'generator': negative off-diagonal rate")
        for idx, s in enumerate(Lm.sum(axis=1)):
            if abs(s) > 1e-9:
                raise SpecFormatError(
                    f"field 'generator', row {idx} ({labels[idx]!r}): sums to {s!r}"
                )
        gen = Generator(space, Lm)
        kernel = None
        pi = generator_stationary(gen)
        lam, K = gen.uniformized()
        support_kernel = StochasticMatrix(space, K)

    metric_field = doc["metric"]
    if metric_field == "trivial":
        metric = trivial_metric(space)
    elif metric_field == "combinatorial":
        metric = combinatorial_distance(support_kernel)
    else:
        D = np.asarray(metric_field["dist"], dtype=float)
        if D.shape != (n, n):
            raise SpecFormatError(f"field 'metric.dist': expected {n}x{n} matrix")
        metric = MetricSpace(space, D)

    if doc.get("generating_pairs"):
        gen_set = GeneratingSet(space, [tuple(p) for p in doc["generating_pairs"]])
        if not verify_generating(metric, gen_set):
            raise SpecFormatError("field 'generating_pairs': does not generate the metric")
    else:
        gen_set = GeneratingSet.all_pairs(space)

    return ChainBundle(
        "explicit", gen, kernel, pi, metric, gen_set, normalize(doc)
    )


def _build_bdp(doc: dict) -> ChainBundle:
    spec = BirthDeathSpec(doc["n"], tuple(doc["q_plus"]), tuple(doc["q_minus"]))
    gen, pi, metric, gen_set = build_bdp(spec)
    bound = None
    note = ""
    if bdp_monotone(spec):
        bound = lambda times: bdp_m_curve(spec, times).m  # noqa: E731
        note = "maximal mean gap m(t) between consecutive starts"
    return ChainBundle(
        "bdp", gen, None, pi, metric, gen_set, normalize(doc), bound, note, "bdp"
    )


def _build_cep(doc: dict) -> ChainBundle:
    spec = CEPSpec(
        tuple(doc["colors"]), tuple(doc["nu"]), doc["n"],
        tuple(map(tuple, doc["c"])), tuple(doc["r"]),
    )
    gen, pi, metric, gen_set = build_cep(spec)
    bound = lambda times: cep_killed_tail(spec, times)  # noqa: E731
    note = "worst-site survival tail of the killed single-particle walk"
    return ChainBundle(
        "cep", gen, None, pi, metric, gen_set, normalize(doc), bound, note
    )


def _build_interchange(doc: dict) -> ChainBundle:
    spec = InterchangeSpec(
        doc["n"], tuple((tuple(b["sites"]), b["rate"]) for b in doc["blocks"])
    )
    gen, pi, metric, gen_set = build_interchange(spec)
    bound = lambda times: interchange_meeting_tail(spec, times)  # noqa: E731
    note = "worst-pair meeting tail of two single-site walks"
    return ChainBundle(
        "interchange", gen, None, pi, metric, gen_set, normalize(doc), bound, note,
        "interchange",
    )


def _discrete_exp_bound(kappa: float) -> Callable:
    def make(times):
        vals = tuple(_clip_ratio(float(np.exp(-kappa * t))) for t in times)
        return BoundCurve(tuple(float(t) for t in times), vals, KIND_MODEL)

    return make


def _build_glauber_like(doc: dict, spec: GlauberSpec, kind: str) -> ChainBundle:
    kernel, pi, metric, gen_set = build_glauber(spec)
    gen = Generator.from_kernel(kernel)
    holds, kappa = glauber_weakdep(spec)
    bound = _discrete_exp_bound(kappa) if holds else None
    note = (
        "weak-dependency contraction rate exp(-kappa t)" if holds else ""
    )
    return ChainBundle(
        kind, gen, kernel, pi, metric, gen_set, normalize(doc), bound, note
    )


def _build_glauber_doc(doc: dict) -> ChainBundle:
    spec = GlauberSpec(
        tuple(doc["colors"]), doc["n"],
        weights=tuple((tuple(w["word"]), w["weight"]) for w in doc["weights"]),
    )
    return _build_glauber_like(doc, spec, "glauber")


def _build_spin_doc(doc: dict) -> ChainBundle:
    system = SpinSystem(
        tuple(doc["colors"]), doc["n"],
        tuple((e["i"], e["j"], tuple(map(tuple, e["psi"]))) for e in doc["interactions"]),
    )
    return _build_glauber_like(doc, GlauberSpec.from_spin(system), "spin")


def _build_zrp(doc: dict) -> ChainBundle:
    spec = ZRPSpec(
        doc["m"], doc["n"], tuple(map(tuple, doc["G"])),
        tuple(map(tuple, doc["rates"])),
    )
    gen, pi, metric, gen_set = build_zrp(spec)
    bound = None
    note = ""
    mono = zrp_monotone(spec)
    if mono.holds and is_mean_field(spec):
        bound = _discrete_exp_bound(mono.delta)
        note = "mean-field minimal-increment rate exp(-delta t)"
    return ChainBundle(
        "zrp", gen, None, pi, metric, gen_set, normalize(doc), bound, note, "zrp"
    )


_BUILDERS = {
    "explicit": _build_explicit,
    "bdp": _build_bdp,
    "cep": _build_cep,
    "interchange": _build_interchange,
    "glauber": _build_glauber_doc,
    "spin": _build_spin_doc,
    "zrp": _build_zrp,
}


def normalize(doc: dict) -> dict:
    """A canonical copy of the document (floats coerced, keys ordered), fit
    for re-emission by the report writer."""

    def conv(v):
        if isinstance(v, bool):
            return v
        if isinstance(v, (int,)):
            return v
        if isinstance(v, float):
            return float(v)
        if isinstance(v, list):
            return [conv(x) for x in v]
        if isinstance(v, dict):
            return {k: conv(v[k]) for k in sorted(v)}
        return v

    out = {k: conv(doc[k]) for k in sorted(doc)}
    out["kind"] = doc["kind"]
    return out
