"""Built-in systems and the JSON model format.

``covid_p2`` and ``covid_p1`` are the COVID-19 outbreak model with the
bifurcation parameter on the ``x2`` and ``x1`` coefficient of the second
equation respectively; ``lorenz_rho`` is Lorenz with ``p = rho``.

The ``x1`` coefficient of the second equation appears both as ``0.2052`` and
as ``0.205`` in the source of the model; the registry uses ``0.205``.  A third choice of parameter (the ``0.2845`` coefficient of
``x3``) is not registered; load it through :func:`load_model` if needed.
"""
from __future__ import annotations

import json
from pathlib import Path

from .ode import PolyTerm, SystemDef

MODEL_IDS = ("covid_p2", "covid_p1", "lorenz_rho")

# second-equation coefficients of the base system
COVID_X2_COEF = 0.4404071
COVID_X1_COEF = 0.205

# (coef, exponents of x1, x2, x3)
_COVID_EQ1 = [
    (-0.1053, (0, 0, 2)),
    (2.3430e-5, (2, 0, 0)),
    (0.1521, (0, 1, 1)),
    (-0.0018, (1, 1, 0)),
]
_COVID_EQ3 = [
    (0.2845, (0, 0, 1)),
    (-0.0001, (1, 0, 1)),
    (-1.2155e-5, (1, 1, 0)),
    (2.3788e-6, (2, 0, 0)),
]

# Near the nontrivial equilibrium at the upper end of the bounded band of the
# published coefficients; no random start in [10, 1e3]^3 stays bounded.
COVID_X0 = (9000.0, 1300.0, 110.0)


def _terms(rows):
    return tuple(PolyTerm(comp, coef, exps) for comp, eq in enumerate(rows) for coef, exps in eq)


def _covid_p2() -> SystemDef:
    eq2 = [(0.1606, (0, 0, 2)), (-COVID_X1_COEF, (1, 0, 0))]
    return SystemDef(
        name="covid_p2", dim=3, terms=_terms([_COVID_EQ1, eq2, _COVID_EQ3]),
        B=[[0, 0, 0], [0, 1, 0], [0, 0, 0]],
        default_p=COVID_X2_COEF, p_range=(0.40, 0.46), divergence_radius=1e6,
        default_x0=COVID_X0,
        description="COVID-19 model, p multiplies x2 in the second equation",
    )


def _covid_p1() -> SystemDef:
    eq2 = [(0.1606, (0, 0, 2)), (COVID_X2_COEF, (0, 1, 0))]
    return SystemDef(
        name="covid_p1", dim=3, terms=_terms([_COVID_EQ1, eq2, _COVID_EQ3]),
        B=[[0, 0, 0], [-1, 0, 0], [0, 0, 0]],
        default_p=COVID_X1_COEF, p_range=(0.20, 0.22), divergence_radius=1e6,
        default_x0=COVID_X0,
        description="COVID-19 model, p multiplies -x1 in the second equation",
    )


def _lorenz(sigma=10.0, beta=8.0 / 3.0) -> SystemDef:
    rows = [
        [(sigma, (0, 1, 0)), (-sigma, (1, 0, 0))],
        [(-1.0, (1, 0, 1)), (-1.0, (0, 1, 0))],
        [(1.0, (1, 1, 0)), (-beta, (0, 0, 1))],
    ]
    return SystemDef(
        name="lorenz_rho", dim=3, terms=_terms(rows),
        B=[[0, 0, 0], [1, 0, 0], [0, 0, 0]],
        default_p=28.0, p_range=(0.0, 350.0), divergence_radius=1e3,
        default_x0=(1.0, 1.0, 1.0),
        description="Lorenz system, sigma=10, beta=8/3, p=rho",
    )


_REGISTRY = {
    "covid_p2": _covid_p2(),
    "covid_p1": _covid_p1(),
    "lorenz_rho": _lorenz(),
}


def get_model(model_id: str) -> SystemDef:
    try:
        return _REGISTRY[model_id]
    except KeyError:
        raise KeyError(f"unknown model {model_id!r}; choose from {', '.join(MODEL_IDS)}") from None


def model_from_dict(doc: dict) -> SystemDef:
    """Build a system from the JSON document form.

    ``g`` lists, per component, ``[coef, [e1, ..., en]]`` monomials::

        {"name": "lin", "dim": 1, "g": [[]], "B": [[1.0]],
         "default_p": 1.0, "p_range": [0, 2], "x0": [1.0]}
    """
    try:
        dim = int(doc["dim"])
        g = doc["g"]
        if len(g) != dim:
            raise ValueError(f"'g' needs {dim} component lists, got {len(g)}")
        terms = tuple(
            PolyTerm(comp, float(coef), tuple(int(e) for e in exps))
            for comp, monomials in enumerate(g)
            for coef, exps in monomials
        )
        return SystemDef(
            name=str(doc.get("name", "custom")),
            dim=dim,
            terms=terms,
            B=doc["B"],
            default_p=float(doc["default_p"]),
            p_range=tuple(float(v) for v in doc.get("p_range", (float("-inf"), float("inf")))),
            divergence_radius=float(doc.get("divergence_radius", 1e6)),
            default_x0=tuple(float(v) for v in doc["x0"]),
            description=str(doc.get("description", "")),
        )
    except KeyError as exc:
        raise ValueError(f"model document is missing field {exc.args[0]!r}") from None


def model_to_dict(system: SystemDef) -> dict:
    g = [[] for _ in range(system.dim)]
    for t in system.terms:
        g[t.component].append([t.coef, list(t.exponents)])
    return {
        "name": system.name,
        "dim": system.dim,
        "g": g,
        "B": system.B.tolist(),
        "default_p": system.default_p,
        "p_range": list(system.p_range),
        "divergence_radius": system.divergence_radius,
        "x0": list(system.default_x0),
        "description": system.description,
    }


def load_model(path) -> SystemDef:
    return model_from_dict(json.loads(Path(path).read_text()))
