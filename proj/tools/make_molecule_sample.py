"""Regenerate data/molecules_sample.xyz: small molecules embedded with RDKit.

Every molecule has two to five heavy atoms (one to ten heavy-atom pairs).
Coordinates come from ETKDG embedding followed by an MMFF relaxation; the
comment line carries the name and a set of RDKit descriptors.
"""

import argparse
import pathlib

from rdkit import Chem
from rdkit.Chem import AllChem, Descriptors, Descriptors3D, rdMolDescriptors

SMILES = [
    ("hydroxylamine", "NO"), ("hydrazine", "NN"), ("fluoromethane", "CF"), ("ethane", "CC"),
    ("methanol", "CO"), ("methylamine", "CN"), ("hydrogen_cyanide", "C#N"),
    ("formaldehyde", "C=O"), ("ethylene", "C=C"), ("acetylene", "C#C"),
    ("propane", "CCC"), ("ethanol", "CCO"), ("dimethyl_ether", "COC"),
    ("acetaldehyde", "CC=O"), ("acetonitrile", "CC#N"), ("formic_acid", "OC=O"),
    ("formamide", "NC=O"), ("propene", "C=CC"), ("propyne", "C#CC"),
    ("cyclopropane", "C1CC1"), ("oxirane", "C1CO1"), ("aziridine", "C1CN1"),
    ("ethylamine", "CCN"), ("acetone", "CC(C)=O"), ("acetic_acid", "CC(O)=O"),
    ("urea", "NC(N)=O"), ("glycolaldehyde", "OCC=O"), ("isobutane", "CC(C)C"),
    ("butane", "CCCC"), ("propanol", "CCCO"), ("isopropanol", "CC(C)O"),
    ("methyl_formate", "COC=O"), ("propanal", "CCC=O"), ("cyclobutane", "C1CCC1"),
    ("oxetane", "C1COC1"), ("azetidine", "C1CNC1"), ("propionitrile", "CCC#N"),
    ("acrylonitrile", "C=CC#N"), ("butadiene", "C=CC=C"), ("ethylene_glycol", "OCCO"),
    ("glycine", "NCC(O)=O"), ("neopentane", "CC(C)(C)C"), ("pentane", "CCCCC"),
    ("cyclopentane", "C1CCCC1"), ("tetrahydrofuran", "C1CCOC1"), ("pyrrolidine", "C1CCNC1"),
    ("furan", "c1ccoc1"), ("pyrrole", "c1cc[nH]c1"), ("butanol", "CCCCO"),
    ("diethyl_ether", "CCOCC"),
]


def descriptors(mol):
    return {
        "mw": Descriptors.MolWt(mol),
        "logp": Descriptors.MolLogP(mol),
        "tpsa": rdMolDescriptors.CalcTPSA(mol),
        "pmi1": Descriptors3D.PMI1(mol),
        "pmi2": Descriptors3D.PMI2(mol),
        "pmi3": Descriptors3D.PMI3(mol),
        "npr1": Descriptors3D.NPR1(mol),
        "npr2": Descriptors3D.NPR2(mol),
        "rgyr": Descriptors3D.RadiusOfGyration(mol),
        "asphericity": Descriptors3D.Asphericity(mol),
        "eccentricity": Descriptors3D.Eccentricity(mol),
        "spherocity": Descriptors3D.SpherocityIndex(mol),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/molecules_sample.xyz")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    frames = []
    for name, smi in SMILES:
        mol = Chem.AddHs(Chem.MolFromSmiles(smi))
        assert 2 <= mol.GetNumHeavyAtoms() <= 5, name
        params = AllChem.ETKDGv3()
        params.randomSeed = args.seed
        if AllChem.EmbedMolecule(mol, params) != 0:
            raise RuntimeError(f"embedding failed for {name}")
        AllChem.MMFFOptimizeMolecule(mol)
        props = " ".join(f"{k}={v:.6f}" for k, v in descriptors(mol).items())
        conf = mol.GetConformer()
        lines = [str(mol.GetNumAtoms()), f"name={name} {props}"]
        for atom in mol.GetAtoms():
            p = conf.GetAtomPosition(atom.GetIdx())
            lines.append(f"{atom.GetSymbol()} {p.x:.6f} {p.y:.6f} {p.z:.6f}")
        frames.append("\n".join(lines))

    path = pathlib.Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(frames) + "\n")
    print(f"wrote {len(frames)} molecules to {path}")


if __name__ == "__main__":
    main()
