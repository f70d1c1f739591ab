"""Independent reference values for the C++ tests.

Everything here is computed from first principles with numpy/scipy (full Pauli
space, dense matrices) and written to tests/oracles.hpp. Rerun after changing a
fixture:  python3 tests/oracles/make_oracles.py
"""

import itertools
import pathlib

import numpy as np
from scipy.linalg import expm, eigh

OUT = pathlib.Path(__file__).resolve().parent.parent / "oracles.hpp"
B_LEFT = B_RIGHT = -1


def spin(bit):
    return 1 - 2 * bit  # bit 1 -> sigma^z = -1


def gauss(matter, links, n):
    L = len(matter)
    sz = spin(matter[n - 1])
    right = B_RIGHT if n == L else spin(links[n - 1])
    left = B_LEFT if n == 1 else spin(links[n - 2])
    return 0.5 * (sz - (-1) ** n) - 0.5 * (right - left)


def split(bits):
    return list(bits[0::2]), list(bits[1::2])


def sector_kets(L):
    """Exhaustive scan of all 2^(2L-1) transmon bit strings."""
    nq = 2 * L - 1
    # Vectorised: every row is one bit string, most significant transmon first.
    codes = np.arange(1 << nq, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(nq - 1, -1, -1)) & 1).astype(np.int8)
    ok = np.ones(len(codes), dtype=bool)
    for n in range(1, L + 1):
        sz = 1 - 2 * bits[:, 2 * n - 2]
        right = B_RIGHT if n == L else 1 - 2 * bits[:, 2 * n - 1]
        left = B_LEFT if n == 1 else 1 - 2 * bits[:, 2 * n - 3]
        g = 0.5 * (sz - (-1) ** n) - 0.5 * (right - left)
        ok &= g == 0
    return ["".join(map(str, row)) for row in bits[ok]]


SP = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|, raises sigma^z from -1 to +1
SM = SP.T.copy()
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def full_space_hamiltonian(L, mu, j):
    """Pauli-operator Hamiltonian on all 2L-1 qubits."""
    nq = 2 * L - 1

    def op(factors):
        m = np.array([[1.0 + 0j]])
        for q in range(nq):
            m = np.kron(m, factors.get(q, I2))
        return m

    h = np.zeros((1 << nq, 1 << nq), dtype=complex)
    for n in range(1, L + 1):
        h += 0.5 * (-1) ** n * mu * op({2 * n - 2: SZ})
    for n in range(1, L):
        hop = op({2 * n - 2: SP, 2 * n - 1: SP, 2 * n: SM})
        h += -j * (hop + hop.conj().T)
    return h


def project(h, kets):
    idx = [int(k, 2) for k in kets]
    return h[np.ix_(idx, idx)]


def sector_hamiltonian(kets, mu, j):
    """Same operator applied state by state; needed where the full space is too large."""
    index = {k: i for i, k in enumerate(kets)}
    d = len(kets)
    h = np.zeros((d, d), dtype=complex)
    for i, k in enumerate(kets):
        matter, _ = split([int(c) for c in k])
        h[i, i] = sum(0.5 * (-1) ** n * mu * spin(matter[n - 1]) for n in range(1, len(matter) + 1))
        for n in range(1, len(matter)):
            a, l, b = k[2 * n - 2], k[2 * n - 1], k[2 * n]
            # sigma^+ tau^+ sigma^- acting on (1,1,0) gives (0,0,1); its conjugate reverses it.
            if (a, l, b) == ("1", "1", "0"):
                t = k[: 2 * n - 2] + "001" + k[2 * n + 1 :]
            elif (a, l, b) == ("0", "0", "1"):
                t = k[: 2 * n - 2] + "110" + k[2 * n + 1 :]
            else:
                continue
            h[index[t], i] += -j
    return h


def central(L, parity, count, offset):
    last = L if offset == 0 else L - 1
    idx = [k for k in range(1, last + 1) if k % 2 == parity]
    centre = 0.5 * (L + 1)
    idx = sorted(idx, key=lambda k: (abs(k + offset - centre), k))[:count]
    return sorted(idx)


def bulk(kets, psi, L):
    prob = np.abs(psi) ** 2
    occ = np.array([[int(k[2 * n - 2]) for n in range(1, L + 1)] for k in kets], dtype=float)
    field = np.array([[-spin(int(k[2 * l - 1])) for l in range(1, L)] for k in kets], dtype=float)
    n_site = prob @ occ
    e_link = prob @ field
    sel = lambda arr, idx: float(np.mean([arr[i - 1] for i in idx]))
    return (sel(n_site, central(L, 1, 3, 0)), sel(n_site, central(L, 0, 3, 0)),
            sel(e_link, central(L, 1, 3, 0.5)), sel(e_link, central(L, 0, 3, 0.5)))


def false_vacuum_ket(L):
    bits = []
    for n in range(1, L + 1):
        bits.append(n % 2)
        if n < L:
            bits.append(1)
    return "".join(map(str, bits))


def transmon_levels(ec, ej, nc, count):
    n = np.arange(-nc, nc + 1)
    h = np.diag(4 * ec * n.astype(float) ** 2) - 0.5 * ej * (np.eye(2 * nc + 1, k=1) + np.eye(2 * nc + 1, k=-1))
    return np.linalg.eigvalsh(h)[:count]


def chain_energy(omega, chi, ket):
    b = [int(c) for c in ket]
    return sum(w * x for w, x in zip(omega, b)) + sum(c * b[i] * b[i + 1] for i, c in enumerate(chi))


def staggered(mu, ket):
    return sum(0.5 * (-1) ** n * mu[n - 1] * spin(int(ket[2 * n - 2])) for n in range(1, 5))


def cxx_list(vals, fmt="{:.17g}"):
    return "{" + ", ".join(fmt.format(v) for v in vals) + "}"


def main():
    lines = ["#pragma once", "", "// Generated by tests/oracles/make_oracles.py; do not edit by hand.", "",
             "#include <array>", "#include <string>", "", "namespace oracle {", ""]

    # Sector dimensions and ket lists.
    dims = {L: len(sector_kets(L)) for L in range(2, 13)}
    lines.append("// Gauge-sector dimension for L = 2..12 by exhaustive scan of the full bit-string space.")
    lines.append(f"inline constexpr std::array<int, 11> kSectorDim = {cxx_list([dims[L] for L in range(2, 13)], '{}')};")
    for L in (2, 4):
        kets = sector_kets(L)
        body = ", ".join(f'"{k}"' for k in kets)
        lines.append(f"inline const std::array<std::string, {len(kets)}> kSectorKetsL{L} = {{{body}}};")
    lines.append("")

    # Gauss eigenvalues of every L=2 configuration.
    lines.append("// (G_1, G_2) for every L=2 bit string m1 l1 m2, in binary order.")
    rows = []
    for bits in itertools.product([0, 1], repeat=3):
        matter, links = split(list(bits))
        rows.append("{" + f"{gauss(matter, links, 1):g}, {gauss(matter, links, 2):g}" + "}")
    lines.append("inline constexpr double kGaussL2[8][2] = {" + ", ".join(rows) + "};")
    lines.append("")

    # Dynamics from the full Pauli space, L = 4 and L = 6.
    for L, mu, t in ((4, 0.7, 2.5), (6, 0.7, 2.5)):
        kets = sector_kets(L)
        h = project(full_space_hamiltonian(L, mu, 1.0), kets)
        psi0 = np.zeros(len(kets), dtype=complex)
        psi0[kets.index(false_vacuum_ket(L))] = 1.0
        psi = expm(-1j * h * t) @ psi0
        prob = np.abs(psi) ** 2
        occ = [float(sum(prob[i] * int(k[2 * n - 2]) for i, k in enumerate(kets))) for n in range(1, L + 1)]
        lines.append(f"// L={L}, mu/J={mu}, false-vacuum start, site occupations at Jt={t}.")
        lines.append(f"inline constexpr std::array<double, {L}> kOccupationL{L} = {cxx_list(occ)};")
    lines.append("")

    # L = 12: J-only ground state and early false-vacuum observables.
    L = 12
    kets = sector_kets(L)
    h0 = sector_hamiltonian(kets, 0.0, 1.0)
    vals, vecs = eigh(h0)
    deg = int(np.sum(vals - vals[0] < 1e-9))
    gs = np.mean([bulk(kets, vecs[:, k], L) for k in range(deg)], axis=0)
    lines.append("// L=12 J-only ground state: degeneracy, energy and bulk (N_odd, N_even, E_odd, E_even).")
    lines.append(f"inline constexpr int kGroundDegeneracyL12 = {deg};")
    lines.append(f"inline constexpr double kGroundEnergyL12 = {vals[0]:.17g};")
    lines.append(f"inline constexpr std::array<double, 4> kGroundBulkL12 = {cxx_list(gs)};")
    psi0 = np.zeros(len(kets), dtype=complex)
    psi0[kets.index(false_vacuum_ket(L))] = 1.0
    psi = expm(-1j * h0 * 1.5) @ psi0
    lines.append("// L=12, mu/J=0, false-vacuum start, bulk observables at Jt=1.5.")
    lines.append(f"inline constexpr std::array<double, 4> kFalseVacuumBulkL12 = {cxx_list(bulk(kets, psi, L))};")
    lines.append("")

    # Single transmon in the charge basis.
    ec, ej, nc = 0.25, 12.5, 15
    lv = transmon_levels(ec, ej, nc, 4)
    lines.append(f"// Transmon E_C={ec} GHz, E_J={ej} GHz, N_c={nc}: E_k - E_0 in GHz for k = 1..3.")
    lines.append(f"inline constexpr double kTransmonEc = {ec};")
    lines.append(f"inline constexpr double kTransmonEj = {ej};")
    lines.append(f"inline constexpr std::array<double, 3> kTransmonLevels = {cxx_list(lv[1:] - lv[0])};")
    lines.append("")

    # Five-state rate equations, order 001, 110, 100, 010, 000.
    life = [1561.0, 6600.0, 4216.0, 1302.0, 1280.0]  # 110->100, 110->010, 100->000, 010->000, 001->000
    channels = [(1, 2), (1, 3), (2, 4), (3, 4), (0, 4)]
    g = np.zeros((5, 5))
    for (f, t), tau in zip(channels, life):
        g[t, f] += 1 / tau
        g[f, f] -= 1 / tau
    p_a = np.array([0.91, 0.0, 0.02, 0.03, 0.04])
    p_b = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
    lines.append("// Rate equations with lifetimes (ns) for 110->100, 110->010, 100->000, 010->000, 001->000.")
    lines.append(f"inline constexpr std::array<double, 5> kLifetimesNs = {cxx_list(life, '{:g}')};")
    lines.append(f"inline constexpr std::array<double, 5> kRateStartA = {cxx_list(p_a, '{:g}')};")
    lines.append(f"inline constexpr std::array<double, 5> kRateAt800A = {cxx_list(expm(g * 800.0) @ p_a)};")
    lines.append(f"inline constexpr std::array<double, 5> kRateAt2000From110 = {cxx_list(expm(g * 2000.0) @ p_b)};")
    lines.append("")

    # Five gauge diagnostics per pure readout state.
    states = ["001", "110", "100", "010", "000"]
    diag = []
    for s in states:
        s1, tz, s2 = (spin(int(c)) for c in s)
        diag.append("{" + f"{0.5 * s1 - 0.5 * tz:g}, {0.5 * s2 + 0.5 * tz:g}" + "}")
    lines.append("// (G_1, G_2) of the pure states 001, 110, 100, 010, 000 with the boundary constants removed.")
    lines.append("inline constexpr double kGaugePure[5][2] = {" + ", ".join(diag) + "};")
    lines.append("")

    # Seven-transmon chain.
    omega = [5.1, 4.7, 5.9, 4.3, 6.2, 4.9, 5.5]  # GHz
    chi = [-0.003, -0.0025, -0.004, -0.0015, -0.002, -0.0035]  # GHz
    chain_kets = sector_kets(4)
    energies = [chain_energy(omega, chi, k) for k in chain_kets]
    pairs = []
    for link in range(1, 4):
        for a, ka in enumerate(chain_kets):
            if ka[2 * link - 2 : 2 * link + 1] != "001":
                continue
            kb = ka[: 2 * link - 2] + "110" + ka[2 * link + 1 :]
            if kb in chain_kets:
                pairs.append((link, a, chain_kets.index(kb)))
    w3q = {}
    for link, a, b in pairs:
        w3q.setdefault(link, []).append(energies[b] - energies[a])
    assert all(max(v) - min(v) < 1e-12 for v in w3q.values())
    mu = [1.0, -2.0, 3.0, 0.5]  # MHz
    delta = {}
    for link, a, b in pairs:
        # Static frame: omega_3q + delta = eps_b - eps_a with eps = E - D.
        delta.setdefault(link, []).append(-(staggered(mu, chain_kets[b]) - staggered(mu, chain_kets[a])))
    assert all(max(v) - min(v) < 1e-12 for v in delta.values())
    lines.append("// Seven-transmon chain fixture (GHz) and derived quantities.")
    lines.append(f"inline constexpr std::array<double, 7> kChainOmegaGhz = {cxx_list(omega, '{:g}')};")
    lines.append(f"inline constexpr std::array<double, 6> kChainChiGhz = {cxx_list(chi, '{:g}')};")
    lines.append(f"inline constexpr std::array<double, 5> kChainEnergiesGhz = {cxx_list(energies)};")
    lines.append(f"inline constexpr std::array<double, 3> kChainResonanceGhz = {cxx_list([w3q[l][0] for l in (1, 2, 3)])};")
    lines.append("// (link, a, b): link n takes state a (001 on m_n l_n m_n+1) to b (110).")
    lines.append("inline constexpr int kChainCouplings[][3] = {" + ", ".join(f"{{{l}, {a}, {b}}}" for l, a, b in pairs) + "};")
    lines.append(f"inline constexpr std::array<double, 4> kChainMassesMhz = {cxx_list(mu, '{:g}')};")
    lines.append(f"inline constexpr std::array<double, 3> kChainDetuningsMhz = {cxx_list([delta[l][0] for l in (1, 2, 3)])};")

    lines += ["", "}  // namespace oracle", ""]
    OUT.write_text("\n".join(lines))
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
