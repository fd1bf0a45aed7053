"""Slow, loop-based reference implementations used only by the tests.

Nothing here imports the package's sector or operator code; states are plain
tuples of occupation numbers and every matrix element is accumulated by hand.
"""

import math
from itertools import combinations_with_replacement

import numpy as np


def sector_states(n_modes, n):
    states = []
    for combo in combinations_with_replacement(range(n_modes), n):
        occ = [0] * n_modes
        for k in combo:
            occ[k] += 1
        states.append(tuple(occ))
    return states


def free_energy(state, omega):
    return sum(c * w for c, w in zip(state, omega))


def coupling_vertex(lam, f, omega):
    return [lam * fi / math.sqrt(2 * wi) for fi, wi in zip(f, omega)]


def cutoff_phi(lam, f, omega, mu_bare, n, E):
    """``H0 + mu - E - lam^2 phi^(+) (H0 - E)^-1 phi^(-)`` on the n-boson sector.

    ``phi^(-)`` creates a boson, the intermediate ``n + 1`` boson state is
    propagated with its free energy and ``phi^(+)`` removes a boson again.
    """
    M = len(omega)
    states = sector_states(M, n)
    index = {s: i for i, s in enumerate(states)}
    c = coupling_vertex(lam, f, omega)
    dim = len(states)
    phi = np.zeros((dim, dim), dtype=complex if isinstance(E, complex) else float)
    for i, s in enumerate(states):
        phi[i, i] += free_energy(s, omega) + mu_bare - E
        for sig in range(M):
            up = list(s)
            up[sig] += 1
            a1 = c[sig] * math.sqrt(up[sig])
            den = free_energy(up, omega) - E
            for tau in range(M):
                if up[tau] == 0:
                    continue
                down = list(up)
                a2 = c[tau] * math.sqrt(down[tau])
                down[tau] -= 1
                phi[index[tuple(down)], i] -= a1 * a2 / den
    return phi


def block_hamiltonian(lam, f, omega, mu_bare, n):
    """Dense ``[[H0_up, B^T], [B, H0_low + mu]]`` built from tuple states."""
    M = len(omega)
    low = sector_states(M, n)
    upp = sector_states(M, n + 1)
    iu = {s: i for i, s in enumerate(upp)}
    c = coupling_vertex(lam, f, omega)
    nu, nl = len(upp), len(low)
    H = np.zeros((nu + nl, nu + nl))
    for j, s in enumerate(upp):
        H[j, j] = free_energy(s, omega)
    for i, s in enumerate(low):
        H[nu + i, nu + i] = free_energy(s, omega) + mu_bare
        for sig in range(M):
            up = list(s)
            up[sig] += 1
            j = iu[tuple(up)]
            val = c[sig] * math.sqrt(up[sig])
            H[nu + i, j] += val
            H[j, nu + i] += val
    return H, nu


def torus_levels(L1, L2, cutoff):
    """Eigenvalues ``|k|^2`` with multiplicity, by brute-force lattice scan."""
    out = []
    r1 = int(math.ceil(math.sqrt(cutoff) * L1 / (2 * math.pi))) + 1
    r2 = int(math.ceil(math.sqrt(cutoff) * L2 / (2 * math.pi))) + 1
    for j1 in range(-r1, r1 + 1):
        for j2 in range(-r2, r2 + 1):
            s = (2 * math.pi * j1 / L1) ** 2 + (2 * math.pi * j2 / L2) ** 2
            if s <= cutoff:
                out.append(s)
    return sorted(out)


def sphere_levels(radius, cutoff):
    out = []
    l = 0
    while l * (l + 1) / radius**2 <= cutoff:
        out += [l * (l + 1) / radius**2] * (2 * l + 1)
        l += 1
    return out


def torus_heat_images(L1, L2, t, reach=12):
    tot = 0.0
    for j1 in range(-reach, reach + 1):
        for j2 in range(-reach, reach + 1):
            tot += math.exp(-((j1 * L1) ** 2 + (j2 * L2) ** 2) / (4 * t))
    return tot / (4 * math.pi * t)
