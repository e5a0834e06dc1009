"""Contact frames on three dimensional subriemannian manifolds.

A contact frame is an ordered triple of vector fields (v0, v1, v2) on a
chart: (v1, v2) an orthonormal basis of the contact plane, v0 the Reeb
field.  All downstream geometry is driven by the bracket coefficients

    [v_i, v_j] = sum_k a_ij^k v_k,

normalized so that a_01^0 = a_02^0 = 0, a_12^0 = -1, a_01^1 + a_02^2 = 0.
The frame is Sasakian when additionally a_01^1 = a_02^2 = 0 and
a_01^2 + a_02^1 = 0 (equivalently the Reeb momentum is conserved along
the geodesic flow).

Two curvature computations live here: the direct scalar-invariant formula

    kappa = v1 a_12^2 - v2 a_12^1 - (a_12^1)^2 - (a_12^2)^2
            - (a_01^2 - a_02^1) / 2

and an independent oracle that builds the Levi-Civita connection of the
Riemannian metric making (v0, v1, v2) orthonormal and contracts its
curvature tensor.  The two must agree; they share only the low-level
finite-difference primitives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .reports import ValidationReport

# 4th-order central difference weights at offsets (-2, -1, +1, +2) * h.
_D1_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_D1_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


@dataclass(frozen=True)
class StructureConstants:
    """Bracket coefficients a[i,j,k] at a point, optionally with frame
    derivatives da[l,i,j,k] = v_l a_ij^k."""

    a: np.ndarray
    da: np.ndarray | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (3, 3, 3):
            raise ValueError("structure constants must be a (3,3,3) array")
        object.__setattr__(self, "a", a)

    def antisymmetry_residual(self) -> float:
        return float(np.max(np.abs(self.a + np.transpose(self.a, (1, 0, 2)))))

    def is_sasakian(self, tol: float = 1e-12) -> bool:
        a = self.a
        return (
            abs(a[0, 1, 1]) <= tol
            and abs(a[0, 2, 2]) <= tol
            and abs(a[0, 1, 2] + a[0, 2, 1]) <= tol
        )


def validate_structure(sc: StructureConstants, tol: float = 1e-12) -> ValidationReport:
    """Check the contact normalization identities, reporting residuals.

    Passes iff every residual is at most ``tol`` (default expects
    analytically supplied constants; pass a looser tolerance for
    finite-difference brackets).
    """
    a = sc.a
    residuals = {
        "a_01^0": abs(a[0, 1, 0]),
        "a_02^0": abs(a[0, 2, 0]),
        "a_12^0 + 1": abs(a[1, 2, 0] + 1.0),
        "a_01^1 + a_02^2": abs(a[0, 1, 1] + a[0, 2, 2]),
        "antisymmetry": sc.antisymmetry_residual(),
    }
    return ValidationReport(residuals=residuals, tol=tol)


class ContactFrame:
    """Base class: a contact frame over an n-dimensional chart (n >= 3).

    Subclasses must implement ``frame_matrix``.  Everything else has
    finite-difference defaults: brackets, structure constants and their
    frame derivatives.  Models with ambient charts (n = 4 matrix groups)
    override ``step`` with exact group flows and ``project`` with the
    constraint renormalization.
    """

    dim = 3
    fd_step = 1e-4  # scaled by (1 + |x|)

    def frame_matrix(self, x: np.ndarray) -> np.ndarray:
        """Columns are v0(x), v1(x), v2(x); shape (dim, 3)."""
        raise NotImplementedError

    def frame_matrix_batch(self, xs: np.ndarray) -> np.ndarray:
        return np.stack([self.frame_matrix(x) for x in xs])

    def project(self, x: np.ndarray) -> np.ndarray:
        """Constraint renormalization for ambient charts (identity here)."""
        return x

    def step(self, x: np.ndarray, i: int, h: float) -> np.ndarray:
        """Move approximately time h along the flow of v_i."""
        return x + h * self.frame_matrix(x)[:, i]

    # -- finite-difference machinery -------------------------------------

    def _h(self, x) -> float:
        return self.fd_step * (1.0 + float(np.linalg.norm(x)))

    def field_jacobian(self, x: np.ndarray, i: int) -> np.ndarray:
        """d(v_i)/dx by 4th-order central differences, shape (dim, dim)."""
        h = self._h(x)
        n = self.dim
        J = np.zeros((n, n))
        for m in range(n):
            e = np.zeros(n)
            e[m] = 1.0
            acc = np.zeros(n)
            for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
                acc += w * self.frame_matrix(x + off * h * e)[:, i]
            J[:, m] = acc / h
        return J

    def bracket(self, x: np.ndarray, i: int, j: int) -> np.ndarray:
        """[v_i, v_j](x) as a chart vector (finite differences)."""
        vi = self.frame_matrix(x)[:, i]
        vj = self.frame_matrix(x)[:, j]
        return self.field_jacobian(x, j) @ vi - self.field_jacobian(x, i) @ vj

    def structure_constants(self, x: np.ndarray) -> StructureConstants:
        """Recompute a_ij^k from the fields and expand in the frame."""
        F = self.frame_matrix(x)
        a = np.zeros((3, 3, 3))
        for i in range(3):
            for j in range(i + 1, 3):
                b = self.bracket(x, i, j)
                coef, *_ = np.linalg.lstsq(F, b, rcond=None)
                a[i, j] = coef
                a[j, i] = -coef
        return StructureConstants(a=a)

    def structure_constants_with_derivs(self, x: np.ndarray) -> StructureConstants:
        """Constants plus da[l,i,j,k] = v_l a_ij^k by nested differences."""
        base = self.structure_constants(x)
        h = self._h(x)
        da = np.zeros((3, 3, 3, 3))
        for l in range(3):
            acc = np.zeros((3, 3, 3))
            for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
                acc += w * self.structure_constants(self.step(x, l, off * h)).a
            da[l] = acc / h
        return StructureConstants(a=base.a, da=da)

    # -- scalar-field derivatives along the frame ------------------------

    def directional_derivative(self, f, x: np.ndarray, i: int, h: float | None = None) -> float:
        """v_i f at x, 4th-order central differences along the v_i flow."""
        h = self._h(x) if h is None else h
        acc = 0.0
        for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
            acc += w * f(self.step(x, i, off * h))
        return acc / h

    def frame_gradient(self, f, x: np.ndarray, h: float | None = None) -> np.ndarray:
        return np.array([self.directional_derivative(f, x, i, h) for i in range(3)])


class CallableFrame(ContactFrame):
    """Frame given by a callable x -> (dim, 3) matrix; used for generic
    (non-model) frames in tests and experiments."""

    def __init__(self, fields, dim: int = 3, constants=None):
        self.dim = dim
        self._fields = fields
        self._constants = constants  # optional callable x -> (3,3,3)

    def frame_matrix(self, x):
        return np.asarray(self._fields(np.asarray(x, dtype=float)))

    def structure_constants(self, x):
        if self._constants is not None:
            return StructureConstants(a=self._constants(np.asarray(x, dtype=float)))
        return super().structure_constants(x)


def singularity_check(frame: ContactFrame, x: np.ndarray, min_sv: float = 1e-8) -> None:
    F = frame.frame_matrix(x)
    s = np.linalg.svd(F, compute_uv=False)
    if s[-1] < min_sv:
        raise ValueError(f"frame is singular at {x}: smallest singular value {s[-1]:.3e}")


def tanaka_webster_kappa(frame: ContactFrame, x: np.ndarray) -> float:
    """Tanaka-Webster scalar curvature at x via the bracket-coefficient
    formula.  Frame derivatives of the a_ij^k come analytically from the
    model when available, otherwise by central finite differences."""
    x = np.asarray(x, dtype=float)
    singularity_check(frame, x)
    sc = frame.structure_constants_with_derivs(x)
    a, da = sc.a, sc.da
    return float(
        da[1, 1, 2, 2]
        - da[2, 1, 2, 1]
        - a[1, 2, 1] ** 2
        - a[1, 2, 2] ** 2
        - 0.5 * (a[0, 1, 2] - a[0, 2, 1])
    )


def christoffel(a: np.ndarray) -> np.ndarray:
    """Koszul coefficients of the frame-orthonormal metric.

    Gamma[i,j,k] = <nabla_{v_i} v_j, v_k> = (a_ij^k - a_jk^i + a_ki^j)/2.
    """
    return 0.5 * (a - np.transpose(a, (1, 2, 0)) + np.transpose(a, (2, 0, 1)))


def riemannian_kappa_oracle(frame: ContactFrame, x: np.ndarray) -> float:
    """Recover the Tanaka-Webster curvature from the Riemannian metric in
    which the frame is orthonormal.

    Builds the Levi-Civita connection by Koszul's formula, contracts the
    curvature tensor to the sectional curvature K(v1,v2) and the Ricci
    curvature Rc(v0), and returns (2K + Rc + 1)/2, which equals kappa.
    (The combination 2K + Rc + 1 itself evaluates to 2*kappa; the
    half is fixed by the constant-curvature models, e.g. the bi-invariant
    SU(2) metric where K(v1,v2) = 1/4.)
    """
    x = np.asarray(x, dtype=float)
    singularity_check(frame, x)
    sc = frame.structure_constants_with_derivs(x)
    a, da = sc.a, sc.da
    G = christoffel(a)
    dG = np.stack([christoffel(da[l]) for l in range(3)])

    def curv(i, j):
        # <nabla_[vi,vj] vi - nabla_vi nabla_vj vi + nabla_vj nabla_vi vi, vj>
        t1 = sum(a[i, j, l] * G[l, i, j] for l in range(3))
        t2 = dG[i, j, i, j] + sum(G[j, i, l] * G[i, l, j] for l in range(3))
        t3 = dG[j, i, i, j] + sum(G[i, i, l] * G[j, l, j] for l in range(3))
        return t1 - t2 + t3

    K = curv(1, 2)
    Rc0 = curv(0, 1) + curv(0, 2)
    return (2.0 * K + Rc0 + 1.0) / 2.0


def reeb_invariant_a(frame: ContactFrame, state) -> float:
    """dh0 along the geodesic flow at ``state`` (anything with x, h1, h2):
    the quadratic form

        -h1 (a_01^1 h1 + a_01^2 h2) - h2 (a_02^1 h1 + a_02^2 h2)

    whose vanishing for all (h1, h2) characterizes the Sasakian property.
    """
    h1, h2 = state.h1, state.h2
    a = frame.structure_constants(np.asarray(state.x, dtype=float)).a
    return float(
        -h1 * (a[0, 1, 1] * h1 + a[0, 1, 2] * h2)
        - h2 * (a[0, 2, 1] * h1 + a[0, 2, 2] * h2)
    )
