"""Regenerate the bundled molecular FCIDUMP fixtures and their reference energies.

Requires pyscf (`pip install pyscf`). Run from this directory:

    python3 generate_fixtures.py

Each fixture is written as `<name>.fcidump` together with `<name>.ref.json`
holding the full-CI reference energy (nuclear repulsion included) and the
geometry/basis used to produce it.
"""

import json

import numpy as np
from pyscf import ao2mo, fci, gto, lo, scf
from pyscf.tools import fcidump


def write_fixture(name, mol, orbitals, basis_note):
    h1 = orbitals.T @ scf.hf.get_hcore(mol) @ orbitals
    norb = orbitals.shape[1]
    eri = ao2mo.restore(1, ao2mo.kernel(mol, orbitals), norb)
    ecore = mol.energy_nuc()
    nelec = mol.nelectron
    fcidump.from_integrals(
        f"{name}.fcidump", h1, eri, norb, nelec, nuc=ecore, ms=mol.spin, tol=1e-12
    )
    nalpha = (nelec + mol.spin) // 2
    nbeta = nelec - nalpha
    e_fci, _ = fci.direct_spin1.kernel(h1, eri, norb, (nalpha, nbeta), ecore=ecore)
    ref = {
        "name": name,
        "atoms": mol.atom,
        "basis": mol.basis,
        "orbitals": basis_note,
        "n_spatial_orbitals": norb,
        "n_electrons": nelec,
        "ms2": mol.spin,
        "nuclear_repulsion": ecore,
        "fci_energy": e_fci,
        "generator": "pyscf " + __import__("pyscf").__version__,
    }
    with open(f"{name}.ref.json", "w") as f:
        json.dump(ref, f, indent=2)
        f.write("\n")
    print(name, e_fci)


def h2_sto3g():
    mol = gto.M(atom="H 0 0 0; H 0 0 0.7414", basis="sto-3g", unit="Angstrom")
    # Symmetrically orthogonalized atomic orbitals: every integral class is populated.
    orbitals = lo.orth_ao(mol, "lowdin")
    write_fixture("h2_sto3g", mol, orbitals, "lowdin-orthogonalized AOs")


def h3_chain():
    mol = gto.M(
        atom="H 0 0 0; H 0 0 1.0; H 0 0 2.0", basis="sto-3g", unit="Angstrom", spin=1
    )
    mf = scf.ROHF(mol).run(conv_tol=1e-12, verbose=0)
    write_fixture("h3_chain", mol, mf.mo_coeff, "ROHF canonical MOs")


if __name__ == "__main__":
    np.set_printoptions(precision=12)
    h2_sto3g()
    h3_chain()
