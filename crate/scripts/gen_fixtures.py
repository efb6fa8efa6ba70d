"""Regenerate the FCIDUMP fixtures under fixtures/.

Requires pyscf. Not part of the cargo build; the generated files are checked in.

    python3 scripts/gen_fixtures.py
"""
import json
import os

import numpy as np
from pyscf import fci, gto, mcscf, scf
from pyscf.tools import fcidump

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "fixtures")


def chain(n, spacing):
    return [("H", (0.0, 0.0, i * spacing)) for i in range(n)]


def water(r_bohr, angle_deg):
    t = np.radians(angle_deg / 2)
    return [
        ("O", (0.0, 0.0, 0.0)),
        ("H", (r_bohr * np.sin(t), 0.0, r_bohr * np.cos(t))),
        ("H", (-r_bohr * np.sin(t), 0.0, r_bohr * np.cos(t))),
    ]


def emit(name, atoms, unit, n_frozen, manifest):
    mol = gto.M(atom=atoms, basis="sto-3g", unit=unit, verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    path = os.path.join(OUT, name + ".fcidump")
    fcidump.from_scf(mf, path, tol=1e-15)
    entry = {
        "file": name + ".fcidump",
        "n_orbitals": mol.nao,
        "n_electrons": mol.nelectron,
        "e_hf": mf.e_tot,
    }
    if mol.nao <= 12:
        entry["e_fci_full"] = fci.FCI(mf).kernel()[0]
    if n_frozen:
        mc = mcscf.CASCI(mf, mol.nao - n_frozen, mol.nelectron - 2 * n_frozen)
        mc.verbose = 0
        entry["n_frozen"] = n_frozen
        entry["e_fci_frozen"] = mc.kernel()[0]
    manifest[name] = entry
    print(name, entry)


def main():
    os.makedirs(OUT, exist_ok=True)
    manifest = {}
    emit("h2_0.7414", chain(2, 0.7414), "A", 0, manifest)
    for n in (4, 6, 8, 10, 12):
        emit(f"h{n}_0.9", chain(n, 0.9), "A", 2, manifest)
    for r in (0.6, 0.75, 1.05, 1.2, 1.5):
        emit(f"h6_{r}", chain(6, r), "A", 2, manifest)
    emit("h2o", water(1.9, 104.5), "Bohr", 2, manifest)
    with open(os.path.join(OUT, "references.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
