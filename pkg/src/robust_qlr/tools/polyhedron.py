# src/robust_qlr/tools/polyhedron.py
"""
Poliedros {ψ : b + Aψ ≤ 0} (opcionalmente dentro de um subespaço ψ = By) e
o programa quadrático min (z − ψ)′J(z − ψ) por enumeração de conjuntos ativos
"""
import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from robust_qlr.core.exceptions import InfeasiblePolyhedron
from robust_qlr.utils.calculations import symmetrize

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
MULTIPLIER_TOL = 1e-9
MAX_CONSTRAINTS = 8


@dataclass(frozen=True)
class Polyhedron:
    """{ψ ∈ ℝ^d : b + Aψ ≤ 0}, com ψ = By quando há base de subespaço"""

    A: np.ndarray
    b: np.ndarray
    basis: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.shape[0] != b.size:
            raise ValueError("A e b devem ter o mesmo número de linhas")
        if A.shape[0] > MAX_CONSTRAINTS:
            raise ValueError(f"No máximo {MAX_CONSTRAINTS} restrições por poliedro")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.basis is not None:
            basis = np.asarray(self.basis, dtype=float)
            if basis.ndim != 2 or basis.shape[0] != A.shape[1]:
                raise ValueError("Base do subespaço incompatível com A")
            object.__setattr__(self, "basis", basis)

    @classmethod
    def unconstrained(cls, dim: int, basis: Optional[np.ndarray] = None) -> "Polyhedron":
        return cls(np.zeros((0, dim)), np.zeros(0), basis)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.A.shape[0]

    def subspace(self) -> np.ndarray:
        return self.basis if self.basis is not None else np.eye(self.dim)

    def contains(self, psi: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
        psi = np.asarray(psi, dtype=float)
        if self.n_constraints and np.any(self.b + self.A @ psi > tol):
            return False
        if self.basis is not None:
            coef, *_ = np.linalg.lstsq(self.basis, psi, rcond=None)
            return bool(np.allclose(self.basis @ coef, psi, atol=max(tol, 1e-8)))
        return True

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "subspace_dim": int(self.subspace().shape[1]),
        }


@dataclass
class _ActiveSet:
    rows: Tuple[int, ...]
    kkt_inverse: np.ndarray


class PolyhedralQP:
    """
    min_{ψ∈P} (z − ψ)′J(z − ψ) para muitos z ao mesmo tempo

    Cada subconjunto de restrições ativas tem o sistema KKT
    [[2G, A_S′], [A_S, 0]] [y; μ] = [2B′Jz; −b_S] fatorado uma única vez;
    um candidato é a solução se é primal viável e tem μ ≥ 0.
    """

    def __init__(self, J: np.ndarray, polyhedron: Polyhedron):
        self.J = symmetrize(np.asarray(J, dtype=float))
        self.polyhedron = polyhedron
        self.B = polyhedron.subspace()
        self.G = symmetrize(self.B.T @ self.J @ self.B)
        self.A_y = polyhedron.A @ self.B
        self.active_sets = self._factorize()

    def _factorize(self) -> List[_ActiveSet]:
        m = self.G.shape[0]
        k = self.polyhedron.n_constraints
        sets: List[_ActiveSet] = []
        for size in range(0, min(k, m) + 1):
            for rows in itertools.combinations(range(k), size):
                A_s = self.A_y[list(rows)]
                kkt = np.zeros((m + size, m + size))
                kkt[:m, :m] = 2.0 * self.G
                kkt[:m, m:] = A_s.T
                kkt[m:, :m] = A_s
                if np.linalg.cond(kkt) > 1e12:
                    continue
                sets.append(_ActiveSet(rows, np.linalg.inv(kkt)))
        return sets

    def solve(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Resolve para um lote de pontos z

        Args:
            z: Matriz (n_draws, d)

        Returns:
            Tuple[np.ndarray, np.ndarray]: (valores (n_draws,), argmins (n_draws, d))

        Raises:
            InfeasiblePolyhedron: Se algum z não tiver candidato viável
        """
        z = np.atleast_2d(np.asarray(z, dtype=float))
        n_draws = z.shape[0]
        m = self.G.shape[0]
        h2 = 2.0 * (z @ self.J @ self.B)  # (n, m)
        poly = self.polyhedron

        best_val = np.full(n_draws, np.inf)
        best_psi = np.zeros((n_draws, poly.dim))
        fallback_val = np.full(n_draws, np.inf)
        fallback_psi = np.zeros((n_draws, poly.dim))
        scale = 1.0 + np.abs(poly.b).max(initial=0.0)

        for active in self.active_sets:
            size = len(active.rows)
            rhs = np.hstack([h2, np.broadcast_to(-poly.b[list(active.rows)], (n_draws, size))])
            sol = rhs @ active.kkt_inverse.T
            y = sol[:, :m]
            mu = sol[:, m:]
            psi = y @ self.B.T
            if poly.n_constraints:
                slack = poly.b + psi @ poly.A.T
                primal = np.all(slack <= FEASIBILITY_TOL * scale, axis=1)
            else:
                primal = np.ones(n_draws, dtype=bool)
            dual = np.all(mu >= -MULTIPLIER_TOL * (1.0 + np.abs(mu)), axis=1) if size else primal
            diff = z - psi
            value = np.einsum("ij,jk,ik->i", diff, self.J, diff)

            kkt_ok = primal & dual & (value < best_val)
            best_val = np.where(kkt_ok, value, best_val)
            best_psi[kkt_ok] = psi[kkt_ok]
            feas_ok = primal & (value < fallback_val)
            fallback_val = np.where(feas_ok, value, fallback_val)
            fallback_psi[feas_ok] = psi[feas_ok]

        missing = ~np.isfinite(best_val)
        if np.any(missing):
            # Sem ponto KKT por arredondamento: usa o melhor candidato primal viável
            best_val[missing] = fallback_val[missing]
            best_psi[missing] = fallback_psi[missing]
        if not np.all(np.isfinite(best_val)):
            raise InfeasiblePolyhedron("Poliedro sem ponto viável para o programa quadrático")
        return np.maximum(best_val, 0.0), best_psi


def qp_min(J: np.ndarray, z: np.ndarray, polyhedron: Polyhedron) -> Tuple[float, np.ndarray]:
    """
    min_{ψ∈P} (z − ψ)′J(z − ψ) exato por enumeração de conjuntos ativos

    Returns:
        Tuple[float, np.ndarray]: (valor, argmin)

    Raises:
        InfeasiblePolyhedron: Se P for vazio
    """
    values, argmins = PolyhedralQP(J, polyhedron).solve(np.asarray(z, dtype=float)[None, :])
    return float(values[0]), argmins[0]
