"""Regenerate src/lindstruct/data/*.json.

Expected values are typed in by hand from the worked examples; nothing here
calls into lindstruct, so the corpus stays an independent check.
"""
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "lindstruct" / "data"
VERSION = "lindstruct.fixture/1"


def e(i, j, d):
    m = np.zeros((d, d), dtype=complex)
    m[i - 1, j - 1] = 1.0
    return m


def diag(*xs):
    return np.diag(np.array(xs, dtype=complex))


def mat(m):
    m = np.asarray(m, dtype=complex)
    rows = []
    for row in m:
        out = []
        for z in row:
            z = complex(z)
            out.append(float(z.real) if z.imag == 0 else {"re": float(z.real), "im": float(z.imag)})
        rows.append(out)
    return rows


def cplx(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def gen(ops, H=None, labels=None):
    d = ops[0].shape[0]
    out = {"dim": d, "hamiltonian": mat(np.zeros((d, d)) if H is None else H),
           "transfer_ops": [mat(h) for h in ops]}
    if labels:
        out["labels"] = labels
    return out


def expect(value, source, tol=None):
    out = {"value": value, "source": source}
    if tol is not None:
        out["tol"] = tol
    return out


STATED = "stated in the worked example"
DERIVED = "derived by hand from the operators"
INTERP = "interpretation; see notes"

fixtures = []

# two-level dissipation
hp, hm = e(1, 2, 2), e(2, 1, 2)
fixtures.append({
    "name": "dissipation",
    "title": "Dissipation in a two-level system",
    "kind": "generator",
    "generator": gen([hp, hm], labels=["h+", "h-"]),
    "expected": {
        "spectrum": expect([cplx(0), cplx(-1), cplx(-1), cplx(-2)],
                           STATED + ": D(s+-) = -s+-, D(sz) = -2 sz", 1e-9),
        "stationary_states": expect([mat(np.eye(2) / 2)], STATED + ": unique state 1/2", 1e-9),
        "commutant_dim": expect(1, STATED + ": only constants are invariant"),
        "invariant_span": expect([mat(np.eye(2))], STATED, 1e-7),
        "algebra": expect(True, DERIVED + ": span{1} is an algebra"),
        "level_ranks": expect([[2]], DERIVED),
        "detailed_balance": expect(True, STATED),
    },
})

# decay into two basins, no phase relations
d = 3
hp = e(1, 1, d) + e(1, 3, d)
hm = e(1, 1, d) - e(1, 3, d) + e(2, 3, d)
fixtures.append({
    "name": "decay-two-basins",
    "title": "Decay into two collecting basins without stationary phase relations",
    "kind": "generator",
    "generator": gen([hp, hm], labels=["h+", "h-"]),
    "expected": {
        "stationary_states": expect([mat(diag(1, 0, 0)), mat(diag(0, 1, 0))], STATED, 1e-9),
        "invariant_span": expect([mat(diag(1, 0, 2 / 3)), mat(diag(0, 1, 1 / 3))],
                                 STATED + " (raw components)", 1e-7),
        "invariant_normalized": expect([mat(diag(1, 0, 2 / 3)), mat(diag(0, 1, 1 / 3))],
                                       DERIVED + ": the stated components are already dual to the"
                                       " extremal states, Tr[A_i rho_j] = delta_ij", 1e-7),
        "algebra": expect(False, STATED),
        "intertwiners": expect([], DERIVED + ": no stationary phase relations"),
        "commutant_dim": expect(1, STATED + ": the whole space is one enclosure"),
        "level_ranks": expect([[1, 1], [1]], DERIVED),
        "basins": expect([[[1, 0, 0], [0, 1, 0]], [[0, 0, 1]]], DERIVED),
    },
})

# decay into two basins with stationary phase relations
hp = e(1, 3, d)
hm = e(1, 3, d) + e(2, 3, d)
A3 = e(1, 2, d) + diag(0, 0, 1 / 3)
fixtures.append({
    "name": "decay-phase-relations",
    "title": "Decay into two collecting basins with stationary phase relations",
    "kind": "generator",
    "generator": gen([hp, hm], labels=["h+", "h-"]),
    "expected": {
        "kernel_dim": expect(4, STATED + ": every 2x2 state on the first two coordinates"),
        "invariant_span": expect([mat(diag(1, 0, 2 / 3)), mat(diag(0, 1, 1 / 3)), mat(A3), mat(A3.conj().T)],
                                 STATED + " (A1..A4)", 1e-7),
        "invariant_normalized": expect(
            [mat(diag(1, 0, 2 / 3)), mat(diag(0, 1, 1 / 3)), mat(A3.conj().T), mat(A3)],
            DERIVED + ": dual to (e11, e22, e12, e21); A3 pairs with e21 and is listed last", 1e-7),
        "algebra": expect(False, STATED),
        "intertwiners": expect([{"pair": [0, 1], "energy_shift": 0.0}], DERIVED, 1e-8),
        "level_ranks": expect([[1, 1], [1]], DERIVED),
    },
})

# basins with dissipation inside
d = 4
hp = np.array([[0, 1, 1, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
hm = np.array([[0, -1, 1, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=complex)
fixtures.append({
    "name": "basin-dissipation",
    "title": "Decay into a basin with dissipation inside",
    "kind": "generator",
    "generator": gen([hp, hm], labels=["h+", "h-"]),
    "expected": {
        "stationary_states": expect([mat(diag(0.5, 0.5, 0, 0))], STATED, 1e-9),
        "commutant_dim": expect(1, STATED + ": no invariant observables"),
        "level_ranks": expect([[2], [2]], DERIVED),
        "restricted_spectrum": expect({"basis": [0, 1], "values": [cplx(0), cplx(-2), cplx(-2), cplx(-4)]},
                                      STATED + ": two-level dissipation at twice the speed", 1e-9),
    },
})

# dephasing of two enclosures
hp = e(1, 2, d) + e(3, 4, d)
hm = e(2, 1, d) - e(4, 3, d)
omega2 = diag(0.5, 0.5, 0, 0)
omega2b = diag(0, 0, 0.5, 0.5)
block_entries = [[1, 3], [1, 4], [2, 3], [2, 4]]
fixtures.append({
    "name": "dephasing-enclosures",
    "title": "Dephasing of two enclosures",
    "kind": "generator",
    "generator": gen([hp, hm], labels=["h+", "h-"]),
    "expected": {
        "stationary_states": expect([mat(omega2), mat(omega2b)], STATED, 1e-9),
        "invariant_span": expect([mat(diag(1, 1, 0, 0)), mat(diag(0, 0, 1, 1))], STATED, 1e-7),
        "commutant_dim": expect(2, DERIVED),
        "algebra": expect(True, DERIVED),
        "dephasing_classes": expect([{"members": [0], "energy_gaps": []}, {"members": [1], "energy_gaps": []}],
                                    DERIVED + ": the off-diagonal blocks dephase"),
        "block_rates": expect({"entries": block_entries,
                               "matrix": mat([[-1, 0, 0, 1], [0, -1, 0, 0], [0, 0, -1, 0], [-1, 0, 0, -1]])},
                              STATED + ": evolution of the off-diagonal block", 1e-12),
    },
})

# undamped oscillating phase relation
H = diag(1, 1, 0, 0)
hp = e(1, 2, d) + e(3, 4, d)
hm = e(2, 1, d) + e(4, 3, d)
psi = (np.eye(4)[0] + np.eye(4)[2]) / np.sqrt(2)
osc_rates = np.array([[-1, 0, 0, 1], [0, -1, 0, 0], [0, 0, -1, 0], [1, 0, 0, -1]], dtype=complex) - 1j * np.eye(4)
fixtures.append({
    "name": "undamped-oscillation",
    "title": "Undamped oscillating phase relation",
    "kind": "generator",
    "generator": gen([hp, hm], H=H, labels=["h+", "h-"]),
    "expected": {
        "stationary_states": expect([mat(omega2), mat(omega2b)], STATED + ": same as the dephasing example", 1e-9),
        "invariant_span": expect([mat(diag(1, 1, 0, 0)), mat(diag(0, 0, 1, 1))], STATED, 1e-7),
        "algebra": expect(True, STATED),
        "dephasing_classes": expect([{"members": [0, 1], "energy_gaps": [1.0]}],
                                    DERIVED + ": one class, the Hamiltonian splits the copies by 1", 1e-8),
        "block_rates": expect({"entries": block_entries, "matrix": mat(osc_rates)},
                              STATED + ": evolution of the off-diagonal block", 1e-12),
        "block_eigenvalue": expect(cplx(-1j), STATED + ": eigenvalue i(E_l - E_j) with gap 1", 1e-8),
        "oscillation": expect({"psi": [cplx(z) for z in psi], "t": 10.0, "rows": [0, 1], "cols": [2, 3]},
                              STATED + ": block tends to exp(-it) (r13 + r24)/2 times the identity", 1e-6),
    },
})

# stationary phase relation
fixtures.append({
    "name": "stationary-phase",
    "title": "Stationary phase relation",
    "kind": "generator",
    "generator": gen([hp, hm], labels=["h+", "h-"]),
    "expected": {
        "kernel_dim": expect(4, STATED + ": M (x) omega for any 2x2 state M"),
        "invariant_span": expect([mat(np.kron(e(i, j, 2), np.eye(2))) for i in (1, 2) for j in (1, 2)],
                                 STATED + ": A (x) 1", 1e-7),
        "algebra": expect(True, STATED),
        "dephasing_classes": expect([{"members": [0, 1], "energy_gaps": [0.0]}], DERIVED, 1e-8),
        "same_ops_as": expect("undamped-oscillation", STATED + ": the same transfer operators without H"),
    },
})

# cascade; the shared e12 and e34 entries carry 1/sqrt(2) so the stated rate equations hold
s = 1 / np.sqrt(2)
hp = s * e(1, 2, d) + e(1, 3, d) + s * e(3, 4, d)
hm = s * e(1, 2, d) - e(1, 3, d) + s * e(3, 4, d)
cascade_rates = [[0, 1, 2, 0], [0, -1, 0, 0], [0, 0, -2, 1], [0, 0, 0, -1]]
fixtures.append({
    "name": "cascade",
    "title": "Cascade of decay",
    "kind": "generator",
    "generator": gen([hp, hm], labels=["h+", "h-"]),
    "notes": [
        "The printed operators h+- = e12 +- e13 + e34 give every diagonal rate twice as large as the stated"
        " rate equations, because e12 and e34 appear in both operators. Scaling those two entries by 1/sqrt(2)"
        " reproduces all four diagonal equations and leaves the level structure unchanged. The variant"
        " 'cascade-printed-operators' keeps the printed matrices.",
        "No choice of coefficients gives the stated off-diagonal rate -2 r13: with e1 stationary, r13 decays at"
        " half the total outflow rate of e3, which the diagonal equations fix at 2. The fixture records the"
        " derived value -r13 + r24.",
    ],
    "expected": {
        "level_ranks": expect([[1], [1, 1], [1]], STATED + ": two lines of flow ending in e1"),
        "basins": expect([[[1, 0, 0, 0]], [[0, 1, 0, 0], [0, 0, 1, 0]], [[0, 0, 0, 1]]], STATED),
        "diagonal_rates": expect(mat(cascade_rates), STATED + ": diagonal rate equations", 1e-12),
        "block_rates": expect({"entries": [[1, 3], [2, 4]], "matrix": mat([[-1, 1], [0, -1]])},
                              DERIVED + "; differs from the stated -2 r13, see notes", 1e-12),
        "kernel_dim": expect(1, STATED + ": no invariant observables"),
        "decay_empty": expect({"t": 30.0, "initial": [mat(e(4, 4, d)), mat(np.eye(4) / 4)]},
                              DERIVED, 1e-6),
    },
})

hp = e(1, 2, d) + e(1, 3, d) + e(3, 4, d)
hm = e(1, 2, d) - e(1, 3, d) + e(3, 4, d)
fixtures.append({
    "name": "cascade-printed-operators",
    "title": "Cascade of decay with the operators exactly as printed",
    "kind": "generator",
    "generator": gen([hp, hm], labels=["h+", "h-"]),
    "notes": ["Companion of 'cascade': same levels, diagonal rates doubled."],
    "expected": {
        "level_ranks": expect([[1], [1, 1], [1]], STATED),
        "basins": expect([[[1, 0, 0, 0]], [[0, 1, 0, 0], [0, 0, 1, 0]], [[0, 0, 0, 1]]], STATED),
        "diagonal_rates": expect(mat([[0, 2, 2, 0], [0, -2, 0, 0], [0, 0, -2, 2], [0, 0, 0, -2]]),
                                 DERIVED, 1e-12),
        "block_rates": expect({"entries": [[1, 3], [2, 4]], "matrix": mat([[-1, 2], [0, -2]])}, DERIVED, 1e-12),
        "kernel_dim": expect(1, STATED),
    },
})

# maximal symmetric evolution
d = 3
ops = [e(i, j, d) for i in range(1, d + 1) for j in range(1, d + 1)]
fixtures.append({
    "name": "maximal-symmetric",
    "title": "Maximal symmetric evolution",
    "kind": "generator",
    "generator": gen(ops),
    "expected": {
        "stationary_states": expect([mat(np.eye(d) / d)], STATED, 1e-9),
        "max_symmetric": expect({"is_maximal": True, "rate": float(d)}, STATED + ": d/dt rho = dim (omega - rho)",
                                1e-9),
        "detailed_balance": expect(True, STATED),
    },
})

X = np.roll(np.eye(d), 1, axis=0)
Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
weyl = [np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b) / np.sqrt(d) for a in range(d) for b in range(d)]
fixtures.append({
    "name": "maximal-symmetric-weyl",
    "title": "Maximal symmetric evolution from Weyl operators",
    "kind": "generator",
    "generator": gen(weyl),
    "notes": ["Weyl operators X^a Z^b scaled by 1/sqrt(d) so that sum h^+ h = d."],
    "expected": {
        "max_symmetric": expect({"is_maximal": True, "rate": float(d)}, STATED, 1e-9),
        "superoperator_equals": expect("maximal-symmetric", STATED + ": alternative representation", 1e-10),
    },
})

# perturbation case studies
sx = np.array([[0, 1], [1, 0]], dtype=complex)
sigmas = [np.eye(2) / 2]
for n in range(1, 11):
    sigmas.append(np.zeros((2, 2)) if n % 2 == 0 else (-2.0) ** (-(n // 2)) * sx / 2)
fixtures.append({
    "name": "perturb-unique",
    "title": "Perturbation of the two-level dissipation with a unique stationary state",
    "kind": "perturbation",
    "perturbation": {"base": gen([e(1, 2, 2), e(2, 1, 2)]), "k_ops": [mat(e(2, 2, 2))]},
    "expected": {
        "series": expect({"order": 10, "sigmas": [mat(x) for x in sigmas]},
                         STATED + ": sigma_2n = 0, sigma_2n+1 = (-2)^-n sx/2", 1e-10),
        "closed_form": expect({"lambda": 0.5, "order": 20,
                               "state": mat(np.eye(2) / 2 + (0.5 / (1 + 0.125)) * sx / 2)},
                              STATED + ": omega + lam/(1 + lam^2/2) sx/2", 1e-8),
        "stationarity_residual": expect({"lambda": 0.5, "order": 20}, DERIVED, 1e-8),
        "radius": expect(float(np.sqrt(2)), STATED + ": converges for |lam| < sqrt 2", 1e-9),
        "diverges_at": expect(1.5, STATED),
    },
})

d = 4
base_deph = gen([e(1, 2, d) + e(3, 4, d), e(2, 1, d) - e(4, 3, d)])
q1 = diag(1, 1, 0, 0)
k = e(1, 3, d) + e(1, 4, d) + 0.5 * e(4, 2, d)
zero4 = np.zeros((4, 4))
fixtures.append({
    "name": "merge-enclosures",
    "title": "Enclosures merged by a new transfer operator",
    "kind": "perturbation",
    "perturbation": {"base": base_deph, "k_ops": [mat(zero4), mat(zero4), mat(k)]},
    "notes": ["k = e13 + e14 + e42/2 added as a third operator next to two zero base operators."],
    "expected": {
        "alpha0": expect({"value": 8 / 9, "q1": mat(q1)},
                         DERIVED + ": Tr[Q1 k rho2 k^+ Q1] = 1 and Tr[Q2 k rho1 k^+ Q2] = 1/8", 1e-9),
        "brute_force": expect({"lambda": 0.05, "order": 6}, DERIVED, 1e-6),
    },
})

V = e(1, 3, d) + e(3, 1, d)
fixtures.append({
    "name": "hamiltonian-dephasing",
    "title": "Two enclosures coupled by a Hamiltonian",
    "kind": "perturbation",
    "perturbation": {"base": base_deph, "v": mat(V)},
    "expected": {
        "alpha0": expect({"value": 0.5, "q1": mat(q1)}, DERIVED + ": V and the base are symmetric under"
                         " swapping the enclosures", 1e-9),
        "positive_factor": expect({"q1": mat(q1)}, STATED + ": the factor of alpha0 is non-negative"),
        "brute_force": expect({"lambda": 0.05, "order": 6}, DERIVED, 1e-6),
    },
})

N = 2
n = N + 1
d = 2 * n


def ket(j, m):
    v = np.zeros(d)
    v[j * n + m] = 1.0
    return v


a = [sum(np.sqrt(m) * np.outer(ket(j, m - 1), ket(j, m)) for m in range(1, n)) for j in range(2)]
k3 = np.outer(ket(0, N), ket(1, N)) + np.outer(ket(1, N), ket(0, N))
z6 = np.zeros((d, d))
fixtures.append({
    "name": "oscillator-cascade-merge",
    "title": "Two truncated oscillator cascades merged by dissipation",
    "kind": "perturbation",
    "perturbation": {"base": gen([a[0], a[1]]),
                     "k_ops": [mat(z6), mat(z6), mat(a[0].T), mat(a[1].T), mat(k3)]},
    "notes": [
        "Two oscillators truncated to levels 0..2; coordinate j*3 + m is level m of oscillator j.",
        "The coupling of the third added dissipator is not given explicitly; the fixture uses"
        " k = |1,N><2,N| + |2,N><1,N| with N = 2.",
    ],
    "expected": {
        "alpha0": expect({"value": 0.5, "q1": mat(np.diag([1.0] * n + [0.0] * n)), "levels": N},
                         INTERP + "; symmetric coupling gives equal weights", 1e-9),
        "brute_force": expect({"lambda": 0.05, "order": 4}, DERIVED, 1e-6),
    },
})


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    names = []
    for fx in fixtures:
        fx = {"schema": VERSION, **fx}
        names.append(fx["name"])
        with open(OUT / f"{fx['name']}.json", "w") as fh:
            json.dump(fx, fh, indent=1)
            fh.write("\n")
    print("\n".join(names))


if __name__ == "__main__":
    main()
