"""Closed-form conditional measurement for fields spanned by |0> and |1>.

Independent of the general Jaynes-Cummings path in ``jc``; the two are
cross-checked in the test-suite.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .fock import TOL, AtomState, DensityMatrix, embed
from .jc import CmOutcome, JcTime, _as_time


@dataclass(frozen=True)
class CoeffTable:
    """Coefficients of the post-selected field for a qubit input.

    The letters K and N are unrelated to photon-number or sequence-length
    symbols used elsewhere. Fields after ``Z`` are the conjugate partners.
    """

    A: complex
    B: complex
    C: complex
    D: complex
    F: complex
    G: complex
    H: complex
    I: complex
    K: complex
    L: complex
    O: complex
    Q: complex
    U: complex
    V: complex
    Z: complex
    E: complex
    M: complex
    N: complex
    R: complex
    S: complex
    T: complex
    W: complex
    X: complex
    Y: complex
    J: complex

    # (x, y) means x = conj(y)
    RELATIONS = (
        ("A", "A"), ("B", "E"), ("C", "M"), ("D", "R"),
        ("F", "F"), ("G", "W"), ("H", "N"), ("I", "S"),
        ("L", "X"), ("O", "O"), ("K", "T"), ("Q", "Y"),
        ("U", "U"), ("V", "J"), ("Z", "Z"),
    )

    def as_dict(self) -> dict[str, complex]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def relation_errors(self) -> dict[str, float]:
        return {f"{x}={y}*": abs(getattr(self, x) - np.conj(getattr(self, y))) for x, y in self.RELATIONS}


def damped_qubit_matrix(c0: complex, c1: complex, gamma_t: float) -> DensityMatrix:
    eta = np.exp(-2.0 * gamma_t)
    return DensityMatrix(
        [
            [abs(c0) ** 2 + (1 - eta) * abs(c1) ** 2, np.exp(-gamma_t) * c0 * np.conj(c1)],
            [np.exp(-gamma_t) * c1 * np.conj(c0), eta * abs(c1) ** 2],
        ]
    )


def compute_coeffs(rho_t: DensityMatrix, atom_i: AtomState, t: JcTime | float) -> CoeffTable:
    if rho_t.dim != 2:
        raise ValueError("closed form needs a 2x2 field matrix")
    t = _as_time(t)
    r00, r01 = rho_t.data[0]
    r10, r11 = rho_t.data[1]
    a, b = atom_i.alpha, atom_i.beta
    ac, bc = np.conj(a), np.conj(b)
    aa, bb = abs(a) ** 2, abs(b) ** 2
    c0, s0 = t.c(0), t.s(0)
    c1, s1 = t.c(1), t.s(1)

    A = r00 * aa * c0**2 + 1j * r01 * a * bc * c0 * s0 + r11 * bb * s0**2 - 1j * r10 * ac * b * s0 * c0
    B = r01 * aa * c0 * c1 - 1j * r11 * ac * b * c1 * s0
    C = r00 * a * bc * c0 - 1j * r10 * bb * s0
    D = 1j * r00 * aa * c0 * s0 - 1j * r11 * bb * s0 * c0 + r01 * a * bc * c0**2 + r10 * ac * b * s0**2
    F = r11 * aa * c1**2
    G = r11 * ac * b * s0 * s1 + 1j * r01 * aa * c0 * s1
    H = r10 * a * bc * c1
    I = r11 * a * bc * c1 * c0 + 1j * r10 * aa * c1 * s0
    K = 1j * r00 * ac * b * s0 + r01 * bb * c0
    L = 1j * r11 * aa * c1 * s1
    O = r00 * bb
    Q = 1j * r01 * ac * b * s1
    U = r00 * aa * s0**2 - 1j * r01 * a * bc * s0 * c0 + r11 * bb * c0**2 + 1j * r10 * ac * b * c0 * s0
    V = 1j * r11 * ac * b * c0 * s1 + r01 * aa * s0 * s1
    Z = r11 * aa * s1**2

    cj = np.conj
    return CoeffTable(
        A=A, B=B, C=C, D=D, F=F, G=G, H=H, I=I, K=K, L=L, O=O, Q=Q, U=U, V=V, Z=Z,
        E=cj(B), M=cj(C), N=cj(H), R=cj(D), S=cj(I), T=cj(K), W=cj(G), X=cj(L), Y=cj(Q), J=cj(V),
    )


def analytic_cm(rho_t: DensityMatrix, atom_i: AtomState, t: JcTime | float, atom_f: AtomState) -> CmOutcome:
    k = compute_coeffs(rho_t, atom_i, t)
    af, bf = atom_f.alpha, atom_f.beta
    ee = abs(af) ** 2
    eg = af * np.conj(bf)
    ge = bf * np.conj(af)
    gg = abs(bf) ** 2

    out = np.zeros((3, 3), dtype=complex)
    out[0, 0] = ee * k.A + eg * k.M + ge * k.C + gg * k.O
    out[0, 1] = ee * k.B + eg * k.N + ge * k.D + gg * k.K
    out[1, 0] = ee * k.E + eg * k.R + ge * k.H + gg * k.T
    out[1, 1] = ee * k.F + eg * k.S + ge * k.I + gg * k.U
    out[2, 0] = eg * k.W + gg * k.Y
    out[0, 2] = ge * k.G + gg * k.Q
    out[2, 1] = eg * k.X + gg * k.J
    out[1, 2] = ge * k.L + gg * k.V
    out[2, 2] = gg * k.Z
    prob = ee * (k.A + k.F) + eg * (k.M + k.S) + ge * (k.C + k.I) + gg * (k.O + k.U + k.Z)
    prob = float(prob.real)
    if prob < TOL.zero_probability:
        return CmOutcome(None, max(prob, 0.0))
    return CmOutcome(DensityMatrix(out / prob), prob)


RESIDUAL_ENTRIES = ((0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0), (1, 2), (2, 1), (2, 2))


def recovery_residuals(outcome: CmOutcome, target: DensityMatrix) -> list[float]:
    """|rho_out - target| at the nine entries of the 3x3 recovered field.

    Ordered as 00, 01, 10, 11, 02, 20, 12, 21, 22.
    """
    if outcome.field is None:
        raise ValueError("impossible outcome has no field")
    out = embed(outcome.field, max(3, outcome.field.dim)).data
    tgt = embed(target, out.shape[0]).data
    return [float(abs(out[i, j] - tgt[i, j])) for i, j in RESIDUAL_ENTRIES]
