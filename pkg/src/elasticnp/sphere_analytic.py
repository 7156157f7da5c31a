"""Exact rational oracle for the unit ball.

Polynomials in (x, y, z) are stored as ``{(a, b, c): Fraction}`` maps and
all algebra (derivatives, Laplacians, ranks, sphere integrals) is done
over the rationals.  Floating point appears only in ``evaluate``.

Sphere integrals are returned as the rational coefficient of pi.
"""
from __future__ import annotations

import json
from fractions import Fraction
from math import factorial

import numpy as np

__all__ = [
    "Polynomial",
    "PolyVectorField",
    "KelvinTransformed",
    "solid_harmonic_basis",
    "kelvin_transform_poly",
    "wk_bases",
    "wk_dimensions",
    "q_from_tangential",
    "in_tangential_space",
    "sphere_moments",
    "sphere_integral",
    "sphere_enp_eigenvalues",
    "wk_enp_eigenvalues",
    "wk_kdiv_eigenvalues",
    "sphere_exact_table",
    "exact_star_inner",
    "verify_Pk_decomposition",
    "rational_rank",
    "basis_to_json",
]


def _frac(v):
    return v if isinstance(v, Fraction) else Fraction(v)


class Polynomial:
    """Polynomial in x, y, z with exact rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        c = {}
        for e, v in (coeffs or {}).items():
            v = _frac(v)
            if v:
                c[tuple(int(i) for i in e)] = v
        self.coeffs = c

    # construction helpers
    @classmethod
    def monomial(cls, a, b, c, coef=1):
        return cls({(a, b, c): coef})

    @classmethod
    def constant(cls, v):
        return cls({(0, 0, 0): v})

    @classmethod
    def coordinate(cls, i):
        e = [0, 0, 0]
        e[i] = 1
        return cls({tuple(e): 1})

    # arithmetic
    def __add__(self, other):
        out = dict(self.coeffs)
        for e, v in other.coeffs.items():
            out[e] = out.get(e, 0) + v
        return Polynomial(out)

    def __neg__(self):
        return Polynomial({e: -v for e, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            s = _frac(other)
            return Polynomial({e: s * v for e, v in self.coeffs.items()})
        out = {}
        for e1, v1 in self.coeffs.items():
            for e2, v2 in other.coeffs.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out.get(e, 0) + v1 * v2
        return Polynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for (a, b, c), v in sorted(self.coeffs.items(), reverse=True):
            mono = "*".join(f"{s}^{p}" if p > 1 else s
                            for s, p in zip("xyz", (a, b, c)) if p)
            terms.append(f"({v})" + (f"*{mono}" if mono else ""))
        return " + ".join(terms)

    # structure
    def is_zero(self):
        return not self.coeffs

    def degrees(self):
        return {sum(e) for e in self.coeffs}

    @property
    def degree(self):
        return max(self.degrees(), default=0)

    def is_homogeneous(self, k=None):
        d = self.degrees()
        if not d:
            return True
        return len(d) == 1 and (k is None or d == {k})

    def diff(self, i):
        out = {}
        for e, v in self.coeffs.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = v * e[i]
        return Polynomial(out)

    def laplacian(self):
        return self.diff(0).diff(0) + self.diff(1).diff(1) + self.diff(2).diff(2)

    def is_harmonic(self):
        return self.laplacian().is_zero()

    def gradient_field(self):
        return PolyVectorField([self.diff(i) for i in range(3)])

    # numerics
    def evaluate(self, pts):
        pts = np.asarray(pts, float)
        out = np.zeros(pts.shape[:-1])
        for (a, b, c), v in self.coeffs.items():
            out = out + float(v) * pts[..., 0] ** a * pts[..., 1] ** b * pts[..., 2] ** c
        return out

    def gradient(self, pts):
        return np.stack([self.diff(i).evaluate(pts) for i in range(3)], -1)

    def to_json(self):
        return [{"exponent": list(e), "coefficient": str(v)}
                for e, v in sorted(self.coeffs.items())]


# alias used for harmonic elements
HarmonicPolynomial = Polynomial

_R2 = Polynomial({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})


class PolyVectorField:
    """Three polynomial components."""

    __slots__ = ("comps",)

    def __init__(self, comps):
        comps = list(comps)
        if len(comps) != 3:
            raise ValueError("a vector field needs three components")
        self.comps = comps

    def __add__(self, other):
        return PolyVectorField([a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other):
        return PolyVectorField([a - b for a, b in zip(self.comps, other.comps)])

    def __mul__(self, s):
        return PolyVectorField([c * s for c in self.comps])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, PolyVectorField) and all(
            a == b for a, b in zip(self.comps, other.comps))

    def __repr__(self):
        return "(" + ", ".join(repr(c) for c in self.comps) + ")"

    def is_zero(self):
        return all(c.is_zero() for c in self.comps)

    @property
    def degree(self):
        return max(c.degree for c in self.comps)

    def is_homogeneous(self, k=None):
        ds = set().union(*(c.degrees() for c in self.comps))
        return not ds or (len(ds) == 1 and (k is None or ds == {k}))

    def divergence(self):
        return self.comps[0].diff(0) + self.comps[1].diff(1) + self.comps[2].diff(2)

    def curl(self):
        F = self.comps
        return PolyVectorField([F[2].diff(1) - F[1].diff(2),
                                F[0].diff(2) - F[2].diff(0),
                                F[1].diff(0) - F[0].diff(1)])

    def dot(self, other):
        return sum((a * b for a, b in zip(self.comps, other.comps)), Polynomial())

    def x_dot(self):
        """x . F"""
        return sum((Polynomial.coordinate(i) * c for i, c in enumerate(self.comps)),
                   Polynomial())

    def x_cross(self):
        """x cross F"""
        X = [Polynomial.coordinate(i) for i in range(3)]
        F = self.comps
        return PolyVectorField([X[1] * F[2] - X[2] * F[1],
                                X[2] * F[0] - X[0] * F[2],
                                X[0] * F[1] - X[1] * F[0]])

    def is_harmonic(self):
        return all(c.is_harmonic() for c in self.comps)

    def evaluate(self, pts):
        return np.stack([c.evaluate(pts) for c in self.comps], -1)

    def coordinates(self, k):
        """Coefficient vector in the monomial basis of degree-k vector fields."""
        monos = _monomials(k)
        return [c.coeffs.get(e, Fraction(0)) for c in self.comps for e in monos]

    def to_json(self):
        return [c.to_json() for c in self.comps]


def _monomials(k):
    return [(a, b, k - a - b) for a in range(k, -1, -1) for b in range(k - a, -1, -1)]


# ---------------------------------------------------------------------------
# harmonic polynomials


def _lap_xy(p):
    return p.diff(0).diff(0) + p.diff(1).diff(1)


def solid_harmonic_basis(k):
    """2k+1 independent homogeneous harmonic polynomials of degree k.

    Element for the seed monomial h = x^a y^b z^c (c in {0, 1}) is
    sum_j (-1)^j z^(2j+c) / (2j+c)! (Delta_xy)^j h, the unique harmonic
    polynomial whose part of z-degree < 2 equals h.
    """
    if k < 0:
        raise ValueError("degree must be nonnegative")
    out = []
    for c in (0, 1):
        for a in range(k - c, -1, -1):
            b = k - c - a
            h = Polynomial.monomial(a, b, 0)
            u = Polynomial()
            j = 0
            while not h.is_zero():
                e = 2 * j + c
                u = u + Polynomial.monomial(0, 0, e, Fraction((-1) ** j, factorial(e))) * h
                h = _lap_xy(h)
                j += 1
            out.append(u)
    return out


class KelvinTransformed:
    """Field p(x) / |x|^power with p a homogeneous polynomial (or field).

    For p of degree k the Kelvin transform uses power = 2k + 1, and the
    restriction to the unit sphere coincides with p.
    """

    def __init__(self, numer, power):
        self.numer = numer
        self.power = int(power)

    @property
    def k(self):
        return self.numer.degree

    def evaluate(self, pts):
        pts = np.asarray(pts, float)
        r = np.linalg.norm(pts, axis=-1)
        v = self.numer.evaluate(pts)
        if v.ndim == r.ndim:
            return v / r**self.power
        return v / r[..., None] ** self.power

    def on_sphere(self):
        """Polynomial equal to this field on |x| = 1."""
        return self.numer

    def kelvin(self):
        """Apply the Kelvin transform again; returns the original polynomial."""
        k = self.numer.degree
        if self.power != 2 * k + 1:
            raise ValueError("involution only defined for p / |x|^(2k+1)")
        return self.numer

    def gradient(self):
        """Gradient of a scalar q / |x|^(2k+1) as a Kelvin-type vector field."""
        if not isinstance(self.numer, Polynomial):
            raise TypeError("gradient needs a scalar numerator")
        q = self.numer
        s = self.power
        num = PolyVectorField([_R2 * q.diff(i) - Polynomial.coordinate(i) * q * s
                               for i in range(3)])
        return KelvinTransformed(num, s + 2)


def kelvin_transform_poly(p):
    """Kelvin transform of a homogeneous degree-k polynomial (or field)."""
    if not p.is_homogeneous():
        raise ValueError("Kelvin transform representation needs a homogeneous input")
    return KelvinTransformed(p, 2 * p.degree + 1)


def _plus_generator(q, k):
    """|x|^2 grad q - (2k - 1) q x, equal to grad(q*) on the unit sphere."""
    return PolyVectorField([_R2 * q.diff(i) - Polynomial.coordinate(i) * q * (2 * k - 1)
                            for i in range(3)])


def wk_bases(k):
    """Bases of the degree-k tangential, interior-gradient and exterior-gradient spaces.

    ``W_o`` = {x cross grad q : q in P_k}; ``W_minus`` = {grad q : q in P_{k+1}};
    ``W_plus`` = {grad(q*) on the sphere : q in P_{k-1}} represented by the
    homogeneous degree-k polynomial field that agrees with it on |x| = 1.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    W_o = [q.gradient_field().x_cross() for q in solid_harmonic_basis(k)] if k >= 1 else []
    W_minus = [q.gradient_field() for q in solid_harmonic_basis(k + 1)]
    W_plus = [_plus_generator(q, k) for q in solid_harmonic_basis(k - 1)] if k >= 1 else []
    return {"W_o": W_o, "W_minus": W_minus, "W_plus": W_plus}


def wk_dimensions(k):
    return (2 * k + 1 if k >= 1 else 0, 2 * k + 3, 2 * k - 1 if k >= 1 else 0)


def q_from_tangential(p, k=None):
    """Recover q in P_k with x cross grad q = p for p in the tangential space.

    Raises
    ------
    ValueError
        If ``p`` is not of that form.
    """
    if p.is_zero():
        return Polynomial()
    if not p.is_homogeneous():
        raise ValueError("field is not homogeneous")
    k = p.degree if k is None else k
    if k < 1:
        raise ValueError("tangential fields need k >= 1")
    q = p.curl().x_dot() * Fraction(-1, k * (k + 1))
    if not q.is_harmonic() or not (q.gradient_field().x_cross() == p):
        raise ValueError("field is not of the form x cross grad q with q harmonic")
    return q


def in_tangential_space(p):
    try:
        q_from_tangential(p)
        return not p.is_zero()
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# sphere integrals and eigenvalues


def _dfact(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def sphere_moments(a, b, c):
    """Integral of x^a y^b z^c over the unit sphere, as a rational multiple of pi."""
    if min(a, b, c) < 0:
        raise ValueError("exponents must be nonnegative")
    if a % 2 or b % 2 or c % 2:
        return Fraction(0)
    return Fraction(4 * _dfact(a - 1) * _dfact(b - 1) * _dfact(c - 1), _dfact(a + b + c + 1))


def sphere_integral(p):
    return sum((v * sphere_moments(*e) for e, v in p.coeffs.items()), Fraction(0))


def sphere_enp_eigenvalues(k, lam, mu):
    """(xi_o^k, xi_-^k, xi_+^k) for the unit ball, exact when lam, mu are rational.

    On the sphere xi_o^k belongs to x cross grad p_k, xi_-^k to grad p_k
    (a degree k-1 field) and xi_+^k to grad(p_{k-1}^*), with p_j of degree j.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lam, mu = _frac(lam), _frac(mu)
    if not (mu > 0 and 3 * lam + 2 * mu > 0):
        raise ValueError("inadmissible Lame parameters")
    den = 2 * (lam + 2 * mu) * (4 * k * k - 1)
    xo = Fraction(3, 4 * k + 2)
    xm = (3 * lam - 2 * mu * (2 * k * k - 2 * k - 3)) / den
    xp = (-3 * lam + 2 * mu * (2 * k * k + 2 * k - 3)) / den
    return xo, xm, xp


def wk_enp_eigenvalues(k, lam, mu):
    """eNP eigenvalue on (W_k^o, W_k^-, W_k^+); None for empty spaces.

    W_k^- = grad P_{k+1} carries xi_-^{k+1}; constants (k = 0) give 1/2.
    """
    xo, _, xp = sphere_enp_eigenvalues(max(k, 1), lam, mu)
    xm = sphere_enp_eigenvalues(k + 1, lam, mu)[1]
    if k == 0:
        return None, xm, None
    return xo, xm, xp


def wk_kdiv_eigenvalues(k):
    """Div-free operator eigenvalue on (W_k^o, W_k^-, W_k^+)."""
    return (Fraction(-1, 4 * k + 2) if k >= 1 else None, Fraction(1, 2),
            Fraction(-1, 2) if k >= 1 else None)


def sphere_exact_table(kmax, lam=1, mu=1, operator="enp"):
    """Exact eigenvalues on V_kmax^3 = sum_{k <= kmax} P_k^3 of the unit sphere.

    Returns a list of dicts (space, k, value, multiplicity) with values as
    Fractions; ``operator`` is "enp" or "kdiv".
    """
    rows = []
    for k in range(kmax + 1):
        dims = wk_dimensions(k)
        vals = wk_enp_eigenvalues(k, lam, mu) if operator == "enp" else wk_kdiv_eigenvalues(k)
        for name, dim, val in zip(("W_o", "W_minus", "W_plus"), dims, vals):
            if dim:
                rows.append({"space": name, "k": k, "value": val, "multiplicity": dim})
    return rows


def exact_star_inner(f, g, mu=1):
    """Energy inner product <f, g>_* for f tangential of degree k (coefficient of pi)."""
    if not in_tangential_space(f):
        raise ValueError("closed form only valid for x cross grad q with q harmonic")
    k = f.degree
    return _frac(mu) * (2 * k + 1) * sphere_integral(f.dot(g))


# ---------------------------------------------------------------------------
# exact linear algebra


def rational_rank(rows):
    """Rank of a list of rational vectors (Gaussian elimination)."""
    rows = [list(map(_frac, r)) for r in rows if any(r)]
    rank = 0
    ncol = len(rows[0]) if rows else 0
    for col in range(ncol):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        inv = 1 / pr[col]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col] * inv
                ri = rows[i]
                for j in range(col, ncol):
                    if pr[j]:
                        ri[j] -= f * pr[j]
        rank += 1
        if rank == len(rows):
            break
    return rank


def verify_Pk_decomposition(k, mu=1):
    """Exact checks that W_o + W_- + W_+ is a direct sum equal to P_k^3."""
    B = wk_bases(k)
    dims = tuple(len(B[s]) for s in ("W_o", "W_minus", "W_plus"))
    coords = {s: [v.coordinates(k) for v in B[s]] for s in B}
    ranks = {s: rational_rank(coords[s]) if coords[s] else 0 for s in coords}
    all_rows = coords["W_o"] + coords["W_minus"] + coords["W_plus"]
    total = rational_rank(all_rows)
    target = 3 * (2 * k + 1)
    members_ok = all(v.is_homogeneous(k) and v.is_harmonic()
                     for s in B for v in B[s] if not v.is_zero())
    dims_ok = dims == wk_dimensions(k) and all(ranks[s] == len(B[s]) for s in B)
    direct_sum_ok = members_ok and total == sum(dims) == target
    orth = True
    for f in B["W_o"]:
        for g in B["W_minus"] + B["W_plus"]:
            if exact_star_inner(f, g, mu) != 0:
                orth = False
    return {"k": k, "dims": dims, "rank_total": total, "target_dim": target,
            "dims_ok": dims_ok, "direct_sum_ok": direct_sum_ok,
            "orthogonality_ok": orth}


def basis_to_json(k):
    B = wk_bases(k)
    return json.dumps({"k": k, **{s: [v.to_json() for v in B[s]] for s in B}},
                      sort_keys=True)
