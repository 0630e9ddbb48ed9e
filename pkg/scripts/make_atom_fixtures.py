"""Regenerate the shipped rubidium line lists in src/cpgraphene/data/.

Ground state: tabulated reduced matrix elements and NIST level energies.
Rydberg nS states: quantum-defect energies and Numerov radial integrals in a
pure Coulomb potential (Zimmerman-style). Not part of the package; run by hand:

    python scripts/make_atom_fixtures.py
"""
from pathlib import Path

import numpy as np
from scipy import constants as c

HARTREE_INV_CM = c.physical_constants["hartree-inverse meter relationship"][0] / 100
RAD_PER_INV_CM = 2 * np.pi * c.c * 100
AU_D2 = (c.e * c.physical_constants["Bohr radius"][0]) ** 2
RYD_RB87 = 109736.605  # cm^-1, reduced-mass Rydberg for 87Rb
IONISATION_RB = 33690.81  # cm^-1

OUT = Path(__file__).resolve().parents[1] / "src" / "cpgraphene" / "data"

# (label, energy above 5S in cm^-1, reduced matrix element <5S||d||k> in e a0)
GROUND_LINES = [
    ("5P1/2", 12578.950, 4.231),
    ("5P3/2", 12816.545, 5.977),
    ("6P1/2", 23715.081, 0.325),
    ("6P3/2", 23792.591, 0.528),
    ("7P1/2", 27835.020, 0.115),
    ("7P3/2", 27870.110, 0.200),
]
CORE_POLARIZABILITY = 9.08  # a.u.
CORE_EXCITATION = 0.61  # hartree, effective single oscillator for the Rb+ core

# quantum defects delta0, delta2 for 87Rb (Li et al. 2003, Han et al. 2006)
DEFECTS = {
    "S1/2": (3.1311804, 0.1784),
    "P1/2": (2.6548849, 0.2900),
    "P3/2": (2.6416737, 0.2950),
}


def n_star(n, series):
    d0, d2 = DEFECTS[series]
    return n - (d0 + d2 / (n - d0) ** 2)


def binding(n, series):
    """Term energy below the ionisation limit, cm^-1."""
    return RYD_RB87 / n_star(n, series) ** 2


def numerov_inward(nstar, l, x):
    """X(x) with R(r) = X / x^(3/2), r = x^2, normalised so int R^2 r^2 dr = 1."""
    energy = -0.5 / nstar ** 2
    g = 8 * x ** 2 * (-1 / x ** 2 - energy) + (2 * l + 0.5) * (2 * l + 1.5) / x ** 2
    h = x[1] - x[0]
    f = 1 - h * h * g / 12
    out = np.zeros_like(x)
    out[-1] = 0.0
    out[-2] = 1e-30
    for i in range(len(x) - 2, 0, -1):
        out[i - 1] = ((12 - 10 * f[i]) * out[i] - f[i + 1] * out[i + 1]) / f[i - 1]
        if abs(out[i - 1]) > 1e100:
            out /= 1e100
    norm = np.sqrt(2 * np.trapezoid(out ** 2 * x ** 2, x))
    return out / norm


def radial_element(state_a, state_b, x):
    return 2 * np.trapezoid(state_a * state_b * x ** 4, x)


def write(path, header, name, state, rows):
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"name: {name}\nstate: {state}\n")
        for comment, omega, d2 in rows:
            fh.write(f"{omega:.9e}  {d2:.9e}  # {comment}\n")


def ground():
    rows = []
    for label, wavenumber, reduced in GROUND_LINES:
        d2_au = reduced ** 2 / 6
        rows.append((f"5S1/2 - {label}, |<||d||>| = {reduced} e a0",
                     wavenumber * RAD_PER_INV_CM, d2_au * AU_D2))
    core_d2 = CORE_POLARIZABILITY * CORE_EXCITATION / 2
    rows.append((f"effective Rb+ core oscillator, {CORE_POLARIZABILITY} a.u. static",
                 CORE_EXCITATION * HARTREE_INV_CM * RAD_PER_INV_CM, core_d2 * AU_D2))
    header = [
        "87Rb 5S1/2 ground state.",
        "columns: omega_k0 [rad/s]  d2 [C^2 m^2]; d2 = |<5S||d||k>|^2 / 6 so that",
        "alpha(0) = sum 2 d2 / (hbar omega) reproduces the scalar polarizability.",
        "Energies: NIST ASD. Reduced matrix elements: Safronova, Williams & Clark,",
        "Phys. Rev. A 69, 022509 (2004). Core: Rb+ polarizability 9.08 a.u.",
        "placed on one effective oscillator at 0.61 hartree (4p -> 5s excitation).",
    ]
    write(OUT / "rb_ground.txt", header, "Rb87", "ground", rows)


def rydberg(n):
    n_max = n + 8
    x_max = np.sqrt(2 * n_max * (n_max + 25))
    x = np.arange(np.sqrt(2.0), x_max, 0.002)
    s_state = numerov_inward(n_star(n, "S1/2"), 0, x)
    e_s = -binding(n, "S1/2")
    rows = []
    for n_p in range(5, n_max + 1):
        for series, share in (("P1/2", 1 / 9), ("P3/2", 2 / 9)):
            p_state = numerov_inward(n_star(n_p, series), 1, x)
            radial = radial_element(s_state, p_state, x)
            omega = (-binding(n_p, series) - e_s) * RAD_PER_INV_CM
            rows.append((f"{n}S1/2 - {n_p}{series}, <r> = {radial:.4f} a0",
                         omega, share * radial ** 2 * AU_D2))
    header = [
        f"87Rb {n}S1/2 Rydberg state.",
        "columns: omega_kn [rad/s, negative = lower state]  d2 [C^2 m^2].",
        "Energies from quantum defects (Li et al. 2003; Han et al. 2006);",
        "radial integrals by Numerov integration in a pure Coulomb potential",
        "cut at r = 2 a0. d2 = <r>^2/9 (P1/2), 2<r>^2/9 (P3/2) in (e a0)^2.",
        "Approximate: intended for qualitative and property-based use.",
    ]
    write(OUT / f"rb_{n}s.txt", header, "Rb87", f"{n}S", rows)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    ground()
    for n in (32, 43, 54):
        rydberg(n)
