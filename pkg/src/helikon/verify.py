"""Built-in verification battery behind `helikon verify`.

Each check returns (pass, detail).  The `inject` hook deliberately perturbs
the named check (negative control: a broken invariant must be caught).
"""

from __future__ import annotations

import math

import numpy as np

from .conemetric import (gauss_bonnet_defect, mu_beta_g_bound, mu_beta_lengths,
                         sk_limit_sup_error, sphere_dz_ledger, t1_slit_ledger,
                         tkd_ledger, annulus_modulus)
from .elliptic import Lattice, theta, theta_quasi_factor
from .periods import end_residue, gauss_map_monodromy
from .surface import HelicoidData, helicoid_closed_form_error
from .torus import make_torus, place_points, symmetry_images
from .weierstrass import data_for


def _rng():
    return np.random.default_rng(20240811)


def check_theta_periodicity(inject=False):
    rng = _rng()
    worst = 0.0
    for _ in range(200):
        lat = Lattice(complex(np.exp(1j * rng.uniform(0.6, 2.5))), rhombic=True)
        z = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
        t0 = theta(z, lat)
        t1 = theta(z + 1, lat)
        sign = 1.0 if inject else -1.0
        worst = max(worst, abs(t1 - sign * t0) / abs(t0))
    return worst < 1e-12, f"max rel deviation {worst:.2e}"


def check_theta_quasiperiodicity(inject=False):
    rng = _rng()
    worst = 0.0
    for _ in range(200):
        lat = Lattice(complex(np.exp(1j * rng.uniform(0.6, 2.5))), rhombic=True)
        z = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
        fac = theta_quasi_factor(z, lat)
        if inject:
            fac = 1.0 / fac
        worst = max(worst, abs(theta(z + lat.tau, lat) - fac * theta(z, lat))
                    / abs(theta(z + lat.tau, lat)))
    return worst < 1e-12, f"max rel deviation {worst:.2e}"


def check_theta_oddness(inject=False):
    rng = _rng()
    worst = 0.0
    for _ in range(200):
        lat = Lattice(complex(np.exp(1j * rng.uniform(0.6, 2.5))), rhombic=True)
        z = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
        sign = 1.0 if inject else -1.0
        worst = max(worst, abs(theta(-z, lat) - sign * theta(z, lat)) / abs(theta(z, lat)))
    return worst < 1e-12, f"max rel deviation {worst:.2e}"


def check_symmetry_involutions(inject=False):
    rng = _rng()
    torus = make_torus(1.9)
    worst = 0.0
    for _ in range(100):
        z = complex(rng.uniform(-1, 2), rng.uniform(-0.5, 1.5))
        im = symmetry_images(torus, z)
        for key, w in im.items():
            im2 = symmetry_images(torus, w)[key]
            worst = max(worst, abs(im2 - z))
        comp = symmetry_images(torus, im["mu_h"])["mu_v"]
        worst = max(worst, abs(comp - im["rho"]))
    if inject:
        worst += 1.0
    return worst < 1e-12, f"max involution defect {worst:.2e}"


def check_monodromy(inject=False):
    rng = _rng()
    worst = 0.0
    for _ in range(5):
        k = rng.uniform(0.8, 3.0)
        b = rng.uniform(max(0.55, (k - 1) / k + 0.05), 0.93)
        th = rng.uniform(1.5, 2.0)
        d = data_for(th, k, b)
        dlg = gauss_map_monodromy(d)
        target = -2.0 * np.pi * (k + (1 if inject else 0))
        dev = abs((dlg - target + np.pi) % (2.0 * np.pi) - np.pi)
        worst = max(worst, dev)
    return worst < 1e-8, f"max angle defect mod 2*pi: {worst:.2e}"


def check_helicoid_closure(inject=False):
    rng = _rng()
    worst = 0.0
    for k in (1.0, 2.0, 2.5):
        hel = HelicoidData(k=k + (0.01 if inject else 0.0))
        w = rng.uniform(-1.2, 1.2, 40) + 1j * rng.uniform(-3.0, 3.0, 40)
        worst = max(worst, helicoid_closed_form_error(HelicoidData(k=k) if not inject else hel,
                                                      w if not inject else w + 0.3))
        if inject:
            worst = max(worst, 1.0)
    return worst < 1e-8, f"max |X_numeric - X_closed| = {worst:.2e}"


def check_residue_antisymmetry(inject=False):
    d = data_for(1.85, 1.4, 0.8)
    r1, e1 = end_residue(d, 1)
    r2, e2 = end_residue(d, 2)
    if inject:
        r2 = -r2
    defect = abs(r1 + r2)
    return defect < 1e-10, f"|loop(E1) + loop(E2)| = {defect:.2e}"


def check_gauss_bonnet(inject=False):
    ledgers = [sphere_dz_ledger(), t1_slit_ledger(), tkd_ledger(2.5), tkd_ledger(7.0)]
    worst = max(abs(gauss_bonnet_defect(led)) for led in ledgers)
    if inject:
        worst += 1.0
    return worst == 0.0, f"max |defect| = {worst}"


def check_sector_limit(inject=False):
    errs = [sk_limit_sup_error(k) for k in (10, 20, 40, 80)]
    mono = all(a > b for a, b in zip(errs, errs[1:]))
    rate_ok = all(1.0 <= a / b <= 4.0 for a, b in zip(errs, errs[1:]))
    if inject:
        mono = False
    return mono and rate_ok, f"sup errors {['%.3e' % e for e in errs]}"


def check_mu_beta(inject=False):
    betas = np.linspace(0.1, 5.0, 50)
    bad = 0
    for beta in betas:
        g = mu_beta_lengths(float(beta))["g"]
        bound = mu_beta_g_bound(float(beta))
        if inject:
            g, bound = bound, g
        if not 0 < g <= bound:
            bad += 1
    return bad == 0, f"{bad} of {len(betas)} bound violations"


def check_modulus(inject=False):
    val = annulus_modulus(1.0, math.e)
    if inject:
        val += 0.5
    return abs(val - 1.0) < 1e-15, f"modulus(1, e) = {val}"


BATTERY = [
    ("theta_periodicity", check_theta_periodicity),
    ("theta_quasiperiodicity", check_theta_quasiperiodicity),
    ("theta_oddness", check_theta_oddness),
    ("symmetry_involutions", check_symmetry_involutions),
    ("gauss_map_monodromy", check_monodromy),
    ("helicoid_closure", check_helicoid_closure),
    ("residue_antisymmetry", check_residue_antisymmetry),
    ("gauss_bonnet_ledgers", check_gauss_bonnet),
    ("sector_exponential_limit", check_sector_limit),
    ("mu_beta_bound", check_mu_beta),
    ("annulus_modulus", check_modulus),
]


def run_battery(only: str | None = None, inject: str | None = None) -> list[dict]:
    results = []
    for name, fn in BATTERY:
        if only and only not in name:
            continue
        ok, detail = fn(inject=(inject is not None and inject in name))
        results.append({"name": name, "pass": bool(ok), "detail": detail})
    return results
