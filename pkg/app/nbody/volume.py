import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.rings import PolyElement

from app.diffop.operator import DiffOp, unit
from app.diffop.pushforward import induced_operator, pushforward_check
from app.errors import AnsatzError, ConfigError
from app.exact import linalg, polys
from app.exact.registry import Registry, registry
from app.exact.serialize import diffop_to_text
from app.geometry.contents import content_sum, pair_registry
from app.schemas.reports import NBodyTable

"""
N-BODY VOLUME VARIABLES
The pairwise radial operator on the n(n-1)/2 squared distances, and the
operator it induces on the content sums V_2..V_n. The induced operator is
fitted to the template

  V_n sum a_i V_i d2[i+1, n] + sum b_i V_i d2[i, 2] + sum e_i (d - i) V_{i+1} d[i+2]
  + sum_{j=1}^{n-3} sum_{i=1}^{j} (c_ij V_{n+1-i} V_{n-j-2} + f_ij V_{n-i} V_{n-j-1}) d2[n-i, n-j]

with V_0 = 0 and V_1 = 1, by an exact linear solve over the coefficients of
every (rho, d) monomial.
"""

logger = logging.getLogger(__name__)

MIN_RADIAL = 2
MAX_RADIAL = 6
MIN_DERIVE = 3
MAX_DERIVE = 5
DIRECT_CERTIFICATE_MAX_N = 4
CERTIFICATE_DEGREE = 3


def _check_radial(n: int) -> None:
    if not MIN_RADIAL <= n <= MAX_RADIAL:
        raise ConfigError(f"n={n} outside {MIN_RADIAL}..{MAX_RADIAL}", witness=n)


def _check_derive(n: int) -> None:
    if not MIN_DERIVE <= n <= MAX_DERIVE:
        raise ConfigError(f"coefficient derivation supports n in {MIN_DERIVE}..{MAX_DERIVE}", witness=n)


def nbody_radial(n: int, masses: Optional[Sequence] = None) -> DiffOp:
    """sum_i 1/(2 m_i) Laplacian_i on functions of the squared distances, d formal."""
    _check_radial(n)
    masses = [Fraction(m) for m in (masses or [1] * n)]
    if len(masses) != n or any(m <= 0 for m in masses):
        raise ConfigError("need one positive mass per particle", witness=[str(m) for m in masses])
    reg = pair_registry(n, ("d",))
    d = reg.param("d")
    inv = [1 / m for m in masses]
    size = reg.nvars
    pos = {pair: reg.variables.index(f"rho{pair[0] + 1}{pair[1] + 1}") for pair in combinations(range(n), 2)}

    def rho(i: int, j: int) -> PolyElement:
        return reg.var(pos[(min(i, j), max(i, j))])

    def c(value: Fraction) -> object:
        return reg.scalar(value)

    terms = {}
    for (i, j), k in pos.items():
        w = inv[i] + inv[j]
        terms[unit(size, k, k)] = rho(i, j).mul_ground(c(2 * w))
        terms[unit(size, k)] = d.mul_ground(c(w))
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for j, l in combinations(others, 2):
            a, b = pos[(min(i, j), max(i, j))], pos[(min(i, l), max(i, l))]
            terms[unit(size, a, b)] = (rho(i, j) + rho(i, l) - rho(j, l)).mul_ground(c(2 * inv[i]))
    return DiffOp(reg, terms)


def volume_registry(n: int) -> Registry:
    return registry(tuple(f"V{k}" for k in range(2, n + 1)), ("d",))


def content_map(n: int, source: Registry) -> Dict[str, PolyElement]:
    return {f"V{k}": content_sum(source, n, k) for k in range(2, n + 1)}


# -- template -----------------------------------------------------------------------


@dataclass
class Slot:
    """One unknown: its coefficient polynomial sits at the derivative `position`."""

    label: str
    position: Tuple[int, ...]
    coefficient: PolyElement


@dataclass
class NBodyTemplate:
    n: int
    reg: Registry
    slots: List[Slot]
    values: Dict[str, Fraction] = field(default_factory=dict)
    undetermined: List[str] = field(default_factory=list)

    def operator(self) -> DiffOp:
        terms: Dict[Tuple[int, ...], PolyElement] = {}
        for slot in self.slots:
            value = self.values.get(slot.label, Fraction(0))
            if not value:
                continue
            piece = slot.coefficient.mul_ground(self.reg.scalar(value))
            terms[slot.position] = terms.get(slot.position, self.reg.ring.zero) + piece
        return DiffOp(self.reg, terms)


def _content(reg: Registry, n: int, k: int) -> PolyElement:
    if k == 0:
        return reg.ring.zero
    if k == 1:
        return reg.ring.one
    return reg.gen(f"V{k}")


def template(n: int) -> NBodyTemplate:
    _check_derive(n)
    reg = volume_registry(n)
    size = reg.nvars
    d = reg.param("d")

    def V(k: int) -> PolyElement:
        return _content(reg, n, k)

    def at(*ks: int) -> Tuple[int, ...]:
        return unit(size, *(k - 2 for k in ks))

    slots = [Slot(f"a{i}", at(i + 1, n), V(n) * V(i)) for i in range(2, n)]
    slots += [Slot(f"b{i}", at(i, 2), V(i)) for i in range(2, n + 1)]
    slots += [Slot(f"e{i}", at(i + 2), (d - i) * V(i + 1)) for i in range(0, n - 1)]
    for j in range(1, n - 2):
        for i in range(1, j + 1):
            position = at(n - i, n - j)
            slots.append(Slot(f"c{i}{j}", position, V(n + 1 - i) * V(n - j - 2)))
            slots.append(Slot(f"f{i}{j}", position, V(n - i) * V(n - j - 1)))
    return NBodyTemplate(n=n, reg=reg, slots=slots)


def printed_slots(n: int) -> Dict[str, Fraction]:
    """The slot values given in closed form for every n."""
    out = {f"a{n - 1}": Fraction(2, (n - 1) ** 2), "b2": Fraction(2 * n), "e0": Fraction(n * (n - 1))}
    for j in range(3, n + 1):
        out[f"e{j - 2}"] = Fraction(n - j + 1, (j - 1) ** 2)
    return out


# -- derivation ---------------------------------------------------------------------


def _targets(src: DiffOp, reg: Registry, phi) -> Dict[Tuple[int, ...], PolyElement]:
    """Coefficient each derivative of the template must carry, in source variables."""
    matrix, drift = induced_operator(src, reg, phi)
    two = src.reg.scalar(2)
    size = reg.nvars
    out = {}
    for k in range(size):
        for l in range(k, size):
            value = matrix[k][l] if k == l else matrix[k][l].scale(two)
            out[unit(size, k, l)] = value.as_poly()
        out[unit(size, k)] = drift[k].as_poly()
    return out


def _equations(tpl: NBodyTemplate, src: DiffOp, phi):
    source = src.reg
    domain = source.domain
    targets = _targets(src, tpl.reg, phi)
    columns = [(slot.position, polys.compose(slot.coefficient, tpl.reg, source, phi)) for slot in tpl.slots]
    rows, rhs, labels = [], [], []
    for position, target in targets.items():
        pulled = [col if pos == position else None for pos, col in columns]
        monoms = set(target.keys())
        for col in pulled:
            if col is not None:
                monoms.update(col.keys())
        for m in sorted(monoms):
            rows.append([col.get(m, domain.zero) if col is not None else domain.zero for col in pulled])
            rhs.append(target.get(m, domain.zero))
            labels.append(f"{_position_label(tpl.reg, position)} at {polys.monomial_poly(source, m).as_expr()}")
    return rows, rhs, labels


def _position_label(reg: Registry, position: Tuple[int, ...]) -> str:
    names = [reg.variables[i] for i, k in enumerate(position) for _ in range(k)]
    return f"d[{','.join(names)}]"


def derive_coefficients(n: int) -> Tuple[NBodyTemplate, bool]:
    """Solve the template against the induced operator; returns the completed
    template and whether the residual certificate passed."""
    tpl = template(n)
    src = nbody_radial(n)
    phi = content_map(n, src.reg)
    rows, rhs, labels = _equations(tpl, src, phi)
    logger.info("[NBODY] n=%d: %d unknowns, %d equations", n, len(tpl.slots), len(rows))
    domain = src.reg.domain
    solution, kernel = linalg.solve(rows, rhs, domain, labels)
    tpl.values = {slot.label: src.reg.to_fraction(v) for slot, v in zip(tpl.slots, solution)}
    tpl.undetermined = sorted(
        {tpl.slots[i].label for vec in kernel for i, v in enumerate(vec) if v != domain.zero}
    )
    if tpl.undetermined:
        logger.warning("[NBODY] n=%d: slots not fixed by the induced operator: %s", n, tpl.undetermined)
    return tpl, certify(tpl, src, phi).passed


def certify(tpl: NBodyTemplate, src: Optional[DiffOp] = None, phi=None):
    src = src or nbody_radial(tpl.n)
    phi = phi or content_map(tpl.n, src.reg)
    method = "direct" if tpl.n <= DIRECT_CERTIFICATE_MAX_N else "chain"
    return pushforward_check(
        src, phi, tpl.operator(), degree_bound=CERTIFICATE_DEGREE, method=method, name=f"volume variables n={tpl.n}"
    )


def nbody_table(n: int) -> NBodyTable:
    start = time.perf_counter()
    try:
        tpl, certified = derive_coefficients(n)
    except AnsatzError:
        logger.error("[NBODY] n=%d: template is inconsistent with the induced operator", n)
        raise
    printed = printed_slots(n)
    return NBodyTable(
        n=n,
        variables=list(tpl.reg.variables),
        slots={label: str(value) for label, value in tpl.values.items()},
        known_slots_match={label: tpl.values.get(label) == value for label, value in printed.items()},
        residual_degree=CERTIFICATE_DEGREE,
        residual_zero=certified,
        undetermined=tpl.undetermined,
        operator=diffop_to_text(tpl.operator()),
        elapsed_ms=round((time.perf_counter() - start) * 1000, 2),
    )


def as_volume_operator(op: DiffOp, target: Registry) -> DiffOp:
    """n = 4 only: (V2, V3, V4) renamed to (P, S, V) in `target`."""
    if op.reg.variables != ("V2", "V3", "V4"):
        raise ConfigError("only the four-body operator maps onto (V, S, P)")
    images = {"V2": target.gen("P"), "V3": target.gen("S"), "V4": target.gen("V")}
    order = [target.variables.index(name) for name in ("P", "S", "V")]
    terms = {}
    for alpha, c in op.terms.items():
        new_alpha = [0] * target.nvars
        for i, k in enumerate(alpha):
            new_alpha[order[i]] += k
        terms[tuple(new_alpha)] = c.compose(target, images)
    return DiffOp(target, terms)
