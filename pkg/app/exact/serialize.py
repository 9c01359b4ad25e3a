"""
Canonical text forms. Terms are listed graded-lexicographically by registry
order (highest total degree first); coefficients print through sympy's sstr.
"""

from typing import List

from sympy import sstr, sympify
from sympy.polys.rings import PolyElement

from app.exact.registry import Registry


def _grlex_key(monom):
    return (sum(monom), monom)


def _coeff_text(reg: Registry, coeff) -> str:
    return sstr(reg.to_sympy(coeff))


def poly_to_text(p: PolyElement, reg: Registry) -> str:
    if not p:
        return "0"
    parts: List[str] = []
    for monom in sorted(p.keys(), key=_grlex_key, reverse=True):
        coeff = p[monom]
        factors = []
        for name, e in zip(reg.names, monom):
            if e == 1:
                factors.append(name)
            elif e:
                factors.append(f"{name}**{e}")
        ctext = _coeff_text(reg, coeff)
        if not factors:
            term = ctext
        elif ctext == "1":
            term = "*".join(factors)
        elif ctext == "-1":
            term = "-" + "*".join(factors)
        else:
            wrapped = f"({ctext})" if any(ch in ctext[1:] for ch in "+-") else ctext
            term = wrapped + "*" + "*".join(factors)
        parts.append(term)
    text = parts[0]
    for term in parts[1:]:
        text += f" - {term[1:]}" if term.startswith("-") else f" + {term}"
    return text


def ratfunc_to_text(f) -> str:
    f = f.cancel()
    num = poly_to_text(f.num, f.reg)
    if not f.den:
        return num
    bases = sorted(
        ((poly_to_text(b, f.reg), e) for b, e in f.den),
        key=lambda item: item[0],
    )
    den = "*".join(f"({text})" if e == 1 else f"({text})**{e}" for text, e in bases)
    return f"({num})/({den})"


def multi_index_text(reg: Registry, alpha) -> str:
    names = []
    for name, k in zip(reg.variables, alpha):
        names.extend([name] * k)
    return "d[" + ",".join(names) + "]" if names else "1"


def diffop_to_text(op, header: str = "") -> str:
    """One line per term: `d[var,var]: coefficient`, highest order first."""
    lines = []
    if header:
        lines.append(f"# {header}")
    lines.append("# registry: " + ", ".join(op.reg.variables) + " | params: " + ", ".join(op.reg.parameters))
    for alpha in sorted(op.terms, key=_grlex_key, reverse=True):
        lines.append(f"{multi_index_text(op.reg, alpha)}: {ratfunc_to_text(op.terms[alpha])}")
    return "\n".join(lines) + "\n"


def parse_poly(text: str, reg: Registry) -> PolyElement:
    symbols = {str(s): s for s in reg.ring.symbols}
    return reg.ring.from_expr(sympify(text, locals=symbols))
