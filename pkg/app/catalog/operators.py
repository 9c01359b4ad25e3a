import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.rings import PolyElement

from app.diffop.operator import DiffOp, unit
from app.errors import UnknownEntryError
from app.exact.ratfunc import RatFunc
from app.exact.registry import Registry, registry
from app.geometry import tetra
from app.schemas.configs import RHO_NAMES, MassWeights

"""
OPERATOR CATALOG
Every named radial operator, built exactly with formal d (and formal masses
where they appear). Mixed second derivatives carry operator coefficients:
c * d_a d_b counts once for the unordered pair.
"""

logger = logging.getLogger(__name__)

R_NAMES = tuple(n.replace("rho", "r") for n in RHO_NAMES)
MASS_PARAMS = ("m1", "m2", "m3", "m4")

RHO = tetra.rho_registry(("d",))
RHO_MASS = tetra.rho_registry(("d",) + MASS_PARAMS)
R = registry(R_NAMES, ("d",))
VOLUME = registry(("V", "S", "P"), ("d",))
VOLUME_MASS = registry(("V", "St", "Pt"), ("d",) + MASS_PARAMS)
U = registry(("u1", "u2", "u3"), ("d",))
HYPER = registry(("P",), ("d",))
PLANAR = registry(("S", "P"))
LINE = registry(("P",))
CART1 = registry(("x1", "x2", "x3", "x4"))
XREL = registry(("x12", "x13", "x14"))
XI = registry(("xi1", "xi2", "xi3"))
TAU = registry(("Y", "tau2", "tau3", "tau4"))
PT = registry(("P", "t1", "t2"))


def _op(reg: Registry, entries: Sequence[Tuple[Tuple[str, ...], object]]) -> DiffOp:
    terms: Dict[Tuple[int, ...], RatFunc] = {}
    for names, coeff in entries:
        alpha = unit(reg.nvars, *[reg.index(n) for n in names])
        c = RatFunc.lift(reg, coeff)
        terms[alpha] = terms[alpha] + c if alpha in terms else c
    return DiffOp(reg, terms)


def _q(reg: Registry, num: int, den: int = 1):
    return reg.scalar(Fraction(num, den))


def shared_vertex_pairs() -> List[Tuple[Tuple[int, int], Tuple[int, int], Tuple[int, int], int]]:
    """(edge a, edge b, closing edge c, shared particle) for the 12 adjacent edge pairs."""
    out = []
    for v in range(1, 5):
        others = [k for k in range(1, 5) if k != v]
        for x in range(3):
            for y in range(x + 1, 3):
                i, j = others[x], others[y]
                a = (min(v, i), max(v, i))
                b = (min(v, j), max(v, j))
                out.append((a, b, (i, j), v))
    return out


# -- rho and r representations ----------------------------------------------


def delta_radial_rho(reg: Registry = RHO) -> DiffOp:
    d = reg.param("d")
    rho = {p: reg.gen(tetra.rho_name(*p)) for p in tetra.PAIRS}
    entries = []
    for p in tetra.PAIRS:
        name = tetra.rho_name(*p)
        entries.append(((name, name), 4 * rho[p]))
        entries.append(((name,), 2 * d))
    for a, b, c, _ in shared_vertex_pairs():
        entries.append(((tetra.rho_name(*a), tetra.rho_name(*b)), 2 * (rho[a] + rho[b] - rho[c])))
    return _op(reg, entries)


def delta_radial_r(reg: Registry = R) -> DiffOp:
    d = reg.param("d")
    r = {p: reg.gen("r%d%d" % p) for p in tetra.PAIRS}
    entries = []
    for p in tetra.PAIRS:
        name = "r%d%d" % p
        entries.append(((name, name), 1))
        entries.append(((name,), RatFunc.over(reg, d - 1, r[p])))
    for a, b, c, _ in shared_vertex_pairs():
        num = r[a] ** 2 + r[b] ** 2 - r[c] ** 2
        coeff = RatFunc.over(reg, num, r[a]) * RatFunc.over(reg, reg.ring.one, r[b]).scale(_q(reg, 1, 2))
        entries.append((("r%d%d" % a, "r%d%d" % b), coeff))
    return _op(reg, entries)


def delta_radial_mass(reg: Registry = RHO_MASS) -> DiffOp:
    """Unequal masses: 1/mu_ij = 1/m_i + 1/m_j, mixed terms weighted by the shared particle."""
    d = reg.param("d")
    inv = {k: RatFunc.over(reg, reg.ring.one, reg.param(f"m{k}")) for k in range(1, 5)}
    rho = {p: reg.gen(tetra.rho_name(*p)) for p in tetra.PAIRS}
    entries = []
    for i, j in tetra.PAIRS:
        name = tetra.rho_name(i, j)
        reduced = inv[i] + inv[j]
        entries.append(((name, name), reduced * (2 * rho[(i, j)])))
        entries.append(((name,), reduced * d))
    for a, b, c, v in shared_vertex_pairs():
        entries.append(((tetra.rho_name(*a), tetra.rho_name(*b)), inv[v] * (2 * (rho[a] + rho[b] - rho[c]))))
    return _op(reg, entries)


# -- volume, u and hyper-radial representations -----------------------------


def delta_g(reg: Registry = VOLUME) -> DiffOp:
    V, S, P, d = reg.gen("V"), reg.gen("S"), reg.gen("P"), reg.param("d")
    return _op(reg, [
        (("V", "V"), V * S * _q(reg, 2, 9)),
        (("S", "S"), 54 * V + S * P * _q(reg, 1, 2)),
        (("P", "P"), 8 * P),
        (("V", "S"), 2 * V * P),
        (("V", "P"), 48 * V),
        (("S", "P"), 32 * S),
        (("V",), (d - 2) * S * _q(reg, 1, 9)),
        (("S",), (d - 1) * P * _q(reg, 1, 2)),
        (("P",), 12 * d),
    ])


def delta_u(reg: Registry = U) -> DiffOp:
    u1, u2, u3, d = reg.gen("u1"), reg.gen("u2"), reg.gen("u3"), reg.param("d")
    return _op(reg, [
        (("u1", "u1"), 4 * u1),
        (("u2", "u2"), 4 * u2),
        (("u3", "u3"), 4 * u3),
        (("u1", "u2"), 4 * (u1 + u2 - u3)),
        (("u1", "u3"), 4 * (u1 + u3 - u2)),
        (("u2", "u3"), 4 * (u2 + u3 - u1)),
        (("u1",), 4 * d),
        (("u2",), 4 * d),
        (("u3",), 4 * d),
    ])


def delta_p(reg: Registry = HYPER) -> DiffOp:
    P, d = reg.gen("P"), reg.param("d")
    return _op(reg, [(("P", "P"), 8 * P), (("P",), 12 * d)])


def delta_g_mass(reg: Registry = VOLUME_MASS) -> DiffOp:
    V, S, P, d = reg.gen("V"), reg.gen("St"), reg.gen("Pt"), reg.param("d")
    ms = [reg.param(m) for m in MASS_PARAMS]
    M = sum(ms, reg.ring.zero)
    m = ms[0] * ms[1] * ms[2] * ms[3]
    half = _q(reg, 1, 2)
    return _op(reg, [
        (("V", "V"), V * S * _q(reg, 2, 9)),
        (("St", "St"), RatFunc.over(reg, 27 * M * V + S * P, m).scale(half)),
        (("Pt", "Pt"), 2 * M * P),
        (("St", "Pt"), 8 * M * S),
        (("V", "St"), RatFunc.over(reg, 2 * V * P, m)),
        (("V", "Pt"), 12 * M * V),
        (("V",), (d - 2) * S * _q(reg, 1, 9)),
        (("St",), RatFunc.over(reg, (d - 1) * P, m).scale(half)),
        (("Pt",), 3 * M * d),
    ])


def delta_g_planar(reg: Registry = PLANAR) -> DiffOp:
    """Volume operator at d=2 with the V direction removed."""
    S, P = reg.gen("S"), reg.gen("P")
    half = _q(reg, 1, 2)
    return _op(reg, [
        (("S", "S"), (S * P).mul_ground(half)),
        (("P", "P"), 8 * P),
        (("S", "P"), 32 * S),
        (("S",), P.mul_ground(half)),
        (("P",), 24),
    ])


def delta_g_line(reg: Registry = LINE) -> DiffOp:
    """d=1: the Laguerre operator in P."""
    P = reg.gen("P")
    return _op(reg, [(("P", "P"), 8 * P), (("P",), 12)])


# -- one-dimensional forms ----------------------------------------------------


def cartesian_line(reg: Registry = CART1, factor: Fraction = Fraction(1, 2)) -> DiffOp:
    """factor * sum_i d^2/dx_i^2 for four particles on a line."""
    return _op(reg, [((x, x), reg.const(factor)) for x in reg.variables])


def delta_rel_line(reg: Registry = XREL) -> DiffOp:
    """Relative-motion Laplacian on x_12, x_13, x_14 (twice the flat Delta_LB)."""
    names = reg.variables
    entries = [((x, x), 2) for x in names]
    entries += [((names[i], names[j]), 2) for i in range(3) for j in range(i + 1, 3)]
    return _op(reg, entries)


def delta_xi(reg: Registry = XI) -> DiffOp:
    x1, x2, x3 = reg.gen("xi1"), reg.gen("xi2"), reg.gen("xi3")
    return _op(reg, [
        (("xi1", "xi1"), 6),
        (("xi2", "xi2"), 3 * x1 ** 2 - x2),
        (("xi3", "xi3"), x2 ** 2 - x1 * x3),
        (("xi1", "xi2"), 8 * x1),
        (("xi1", "xi3"), 4 * x2),
        (("xi2", "xi3"), 3 * (x1 * x2 - x3)),
        (("xi2",), 3),
        (("xi3",), x1),
    ])


def delta_tau(reg: Registry = TAU) -> DiffOp:
    """-1/2 sum Laplacian_i (d=1) in Y = sigma_1(x), tau_k = sigma_k(x - Y/4)."""
    t2, t3, t4 = reg.gen("tau2"), reg.gen("tau3"), reg.gen("tau4")
    half = _q(reg, 1, 2)
    return _op(reg, [
        (("Y", "Y"), -2),
        (("tau2", "tau2"), t2),
        (("tau3", "tau3"), 2 * t4 - (t2 ** 2).mul_ground(half)),
        (("tau4", "tau4"), t2 * t4 - (t3 ** 2).mul_ground(_q(reg, 3, 8))),
        (("tau2", "tau3"), 3 * t3),
        (("tau2", "tau4"), 4 * t4),
        (("tau3", "tau4"), -(t2 * t3).mul_ground(half)),
        (("tau2",), _q(reg, 3, 2)),
        (("tau4",), t2.mul_ground(_q(reg, 1, 4))),
    ])


def delta_radial_line(reg: Registry = PT) -> DiffOp:
    """d=1 radial operator in P and t_k = sqrt(q_k), t1 = x1 - x2, t2 = x2 - x3."""
    P, t1, t2 = reg.gen("P"), reg.gen("t1"), reg.gen("t2")
    return _op(reg, [
        (("P", "P"), 8 * P),
        (("P",), 12),
        (("t1", "t1"), 1),
        (("t2", "t2"), 1),
        (("t1", "t2"), -1),
        (("P", "t1"), 8 * t1),
        (("P", "t2"), 8 * t2),
    ])


# -- variable maps used by the pushforward identities -------------------------


def rho_to_volume(reg: Registry = RHO) -> Dict[str, PolyElement]:
    V, S, P = tetra.volume_vars(reg)
    return {"V": V, "S": S, "P": P}


def rho_to_u(reg: Registry = RHO) -> Dict[str, PolyElement]:
    u1, u2, u3 = tetra.u_vars(reg)
    return {"u1": u1, "u2": u2, "u3": u3}


def rho_to_hyper(reg: Registry = RHO) -> Dict[str, PolyElement]:
    return {"P": tetra.edges_P(reg)}


def r_to_rho(reg: Registry = R) -> Dict[str, PolyElement]:
    return {name: reg.gen(name.replace("rho", "r")) ** 2 for name in RHO_NAMES}


def rho_to_mass_volume(reg: Registry, weights: MassWeights) -> Dict[str, PolyElement]:
    V, St, Pt = tetra.mass_volume_vars(reg, weights)
    return {"V": V, "St": St, "Pt": Pt}


def rel_to_xi(reg: Registry = XREL) -> Dict[str, PolyElement]:
    a, b, c = reg.vars()
    return {"xi1": a + b + c, "xi2": a * b + a * c + b * c, "xi3": a * b * c}


def line_to_rel(reg: Registry = CART1) -> Dict[str, PolyElement]:
    x1, x2, x3, x4 = reg.vars()
    return {"x12": x1 - x2, "x13": x1 - x3, "x14": x1 - x4}


def line_to_tau(reg: Registry = CART1) -> Dict[str, PolyElement]:
    xs = reg.vars()
    Y = sum(xs, reg.ring.zero)
    quarter = _q(reg, 1, 4)
    y = [x - Y.mul_ground(quarter) for x in xs]
    tau2 = sum((y[i] * y[j] for i in range(4) for j in range(i + 1, 4)), reg.ring.zero)
    tau3 = sum(
        (y[i] * y[j] * y[k] for i in range(4) for j in range(i + 1, 4) for k in range(j + 1, 4)),
        reg.ring.zero,
    )
    tau4 = y[0] * y[1] * y[2] * y[3]
    return {"Y": Y, "tau2": tau2, "tau3": tau3, "tau4": tau4}


def line_to_pt(reg: Registry = CART1) -> Dict[str, PolyElement]:
    xs = reg.vars()
    P = sum(((xs[i] - xs[j]) ** 2 for i in range(4) for j in range(i + 1, 4)), reg.ring.zero)
    return {"P": P, "t1": xs[0] - xs[1], "t2": xs[1] - xs[2]}


# -- the catalog ----------------------------------------------------------------


@dataclass
class CatalogEntry:
    identifier: str
    citation: str
    operator: DiffOp
    identities: Tuple[str, ...] = ()
    notes: str = ""

    @property
    def registry(self) -> Registry:
        return self.operator.reg


@dataclass(frozen=True)
class _Spec:
    builder: Callable[[], DiffOp]
    citation: str
    identities: Tuple[str, ...] = field(default_factory=tuple)
    notes: str = ""


CATALOG: Dict[str, _Spec] = {
    "delta-radial-rho": _Spec(
        delta_radial_rho,
        "radial Laplacian in squared distances (algebraic form)",
        ("catalog.cartesian_oracle", "catalog.metric_rho", "catalog.s4_invariance", "catalog.cross_terms",
         "catalog.lie_word_radial", "diffop.gauge_rho"),
    ),
    "delta-radial-r": _Spec(
        delta_radial_r,
        "radial Laplacian in distances r_ij",
        ("catalog.r_to_rho",),
    ),
    "delta-radial-mass": _Spec(
        delta_radial_mass,
        "radial Laplacian for unequal masses",
        ("catalog.mass_oracle", "catalog.equal_mass", "diffop.gauge_mass"),
    ),
    "delta-g": _Spec(
        delta_g,
        "volume-variable operator in (V, S, P)",
        ("catalog.pushforward_volume", "catalog.chain_rule_values", "diffop.gauge_volume"),
    ),
    "delta-u": _Spec(
        delta_u,
        "opposite-edge-sum operator in (u1, u2, u3)",
        ("catalog.pushforward_u", "diffop.gauge_u"),
    ),
    "delta-p": _Spec(
        delta_p,
        "hyper-radial operator in P",
        ("catalog.pushforward_p", "diffop.gauge_p"),
    ),
    "delta-g-mass": _Spec(
        delta_g_mass,
        "volume-variable operator for unequal masses",
        ("catalog.pushforward_volume_mass", "diffop.gauge_volume_mass"),
    ),
    "delta-g-d2": _Spec(
        delta_g_planar,
        "volume operator degenerated to d=2 (no V direction)",
        ("catalog.degeneration_d2", "diffop.gauge_planar"),
    ),
    "delta-g-d1": _Spec(
        delta_g_line,
        "volume operator degenerated to d=1 (Laguerre in P)",
        ("catalog.degeneration_d1",),
    ),
    "delta-rel-d1": _Spec(
        delta_rel_line,
        "relative Laplacian for four bodies on a line",
        ("catalog.pushforward_rel_line",),
    ),
    "delta-xi-d1": _Spec(
        delta_xi,
        "d=1 relative Laplacian in symmetric variables xi",
        ("catalog.pushforward_xi", "catalog.xi_word"),
    ),
    "delta-tau-d1": _Spec(
        delta_tau,
        "d=1 Laplacian in Y and the translation-invariant tau_k",
        ("catalog.pushforward_tau",),
    ),
    "delta-radial-d1": _Spec(
        delta_radial_line,
        "d=1 radial operator in (P, t1, t2)",
        ("catalog.pushforward_pt",),
        notes="square-root-free rewrite with t_k = sqrt(q_k)",
    ),
}


def identifiers() -> List[str]:
    return list(CATALOG)


def build(identifier: str, params: Optional[Mapping[str, object]] = None) -> CatalogEntry:
    """Catalog entry with optional parameter bindings.

    `params` binds formal parameters by name ("d": 3); a MassWeights under
    "masses" binds m1..m4.
    """
    if identifier not in CATALOG:
        raise UnknownEntryError(f"unknown catalog entry {identifier!r}", witness=identifiers())
    spec = CATALOG[identifier]
    op = spec.builder()
    values = dict(params or {})
    weights = values.pop("masses", None)
    if weights is not None:
        if not isinstance(weights, MassWeights):
            weights = MassWeights.parse(weights) if isinstance(weights, str) else MassWeights(**weights)
        values.update({f"m{k}": m for k, m in enumerate(weights.masses(), start=1)})
    values = {k: v for k, v in values.items() if v is not None and k in op.reg.parameters}
    if values:
        op = op.bind(values)
    logger.info("[CATALOG] built %s with %s", identifier, values or "formal parameters")
    return CatalogEntry(identifier, spec.citation, op, spec.identities, spec.notes)
