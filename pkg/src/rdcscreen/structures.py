"""Protein backbone parsing, internuclear vectors and rigid superposition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    EmptyStructureError,
    MissingHydrogenError,
    PdbParseError,
    UnknownVectorTypeError,
)
from .tensors import VECTOR_TYPES

# Idealized bond lengths for hydrogens built onto heavy-atom backbones.
N_H_LENGTH = 1.02
CA_HA_LENGTH = 1.09

# Peptide-bond C->N distance window used for chain-continuity checks.
PEPTIDE_BOND_RANGE = (1.2, 1.5)

BACKBONE_ATOMS = ("N", "CA", "C")


@dataclass
class Residue:
    index: int
    name: str
    atoms: dict  # atom name -> ndarray(3), Angstrom

    def copy(self) -> "Residue":
        return Residue(self.index, self.name, {k: v.copy() for k, v in self.atoms.items()})


@dataclass
class ProteinStructure:
    residues: list
    id: str = ""
    gaps: list = field(default_factory=list)  # residue indices followed by a break

    def __len__(self):
        return len(self.residues)

    def copy(self) -> "ProteinStructure":
        return ProteinStructure([r.copy() for r in self.residues], self.id, list(self.gaps))

    def residue_by_index(self, index: int) -> Residue:
        for r in self.residues:
            if r.index == index:
                return r
        raise KeyError(index)

    def backbone_coords(self) -> np.ndarray:
        """(3n, 3) array of N/CA/C positions in chain order."""
        rows = []
        for r in self.residues:
            for name in BACKBONE_ATOMS:
                rows.append(r.atoms[name])
        return np.array(rows)

    def validate(self):
        """Check invariants; records peptide-bond breaks in ``gaps``."""
        if not self.residues:
            raise EmptyStructureError(f"structure {self.id!r} has no residues")
        indices = [r.index for r in self.residues]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise PdbParseError(0, "residue indices not strictly increasing")
        gaps = []
        for prev, cur in zip(self.residues, self.residues[1:]):
            for r in (prev, cur):
                for name in BACKBONE_ATOMS:
                    if name not in r.atoms:
                        raise EmptyStructureError(
                            f"residue {r.index} lacks backbone atom {name}"
                        )
                    if not np.all(np.isfinite(r.atoms[name])):
                        raise PdbParseError(0, f"non-finite coordinate at residue {r.index}")
            d = float(np.linalg.norm(cur.atoms["N"] - prev.atoms["C"]))
            lo, hi = PEPTIDE_BOND_RANGE
            if not (lo <= d <= hi):
                gaps.append(prev.index)
        self.gaps = gaps
        return self


@dataclass(frozen=True)
class InternuclearVector:
    residue: int
    vtype: str
    direction: np.ndarray  # unit vector
    length: float  # nominal bond length, Angstrom


def parse_pdb(text: str, chain: str | None = None, structure_id: str = "") -> ProteinStructure:
    """Read ATOM/HETATM records; first model, first (or given) chain only."""
    residues = []
    by_index = {}
    picked_chain = chain
    in_model = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        rec = line[:6]
        if rec == "MODEL ":
            in_model += 1
            if in_model > 1:
                break
            continue
        if rec == "ENDMDL":
            break
        if rec not in ("ATOM  ", "HETATM"):
            continue
        if len(line) < 54:
            raise PdbParseError(lineno, "record too short for coordinates")
        atom_name = line[12:16].strip()
        altloc = line[16]
        if altloc not in (" ", "A"):
            continue
        res_name = line[17:20].strip()
        chain_id = line[21]
        if picked_chain is None:
            picked_chain = chain_id
        if chain_id != picked_chain:
            continue
        try:
            res_index = int(line[22:26])
        except ValueError:
            raise PdbParseError(lineno, f"bad residue number {line[22:26]!r}") from None
        try:
            pos = np.array(
                [float(line[30:38]), float(line[38:46]), float(line[46:54])]
            )
        except ValueError:
            raise PdbParseError(lineno, f"bad coordinate field in {line[30:54]!r}") from None
        res = by_index.get(res_index)
        if res is None:
            res = Residue(res_index, res_name, {})
            by_index[res_index] = res
            residues.append(res)
        res.atoms.setdefault(atom_name, pos)
    structure = ProteinStructure(residues, structure_id)
    if not residues:
        raise EmptyStructureError("no residues parsed" + (f" for chain {chain!r}" if chain else ""))
    return structure.validate()


def serialize_pdb(structure: ProteinStructure, chain: str = "A") -> str:
    """Fixed-column PDB text for a structure (ATOM records + END)."""
    lines = []
    serial = 1
    for r in structure.residues:
        for name, pos in r.atoms.items():
            # names shorter than 4 characters start in column 14
            field = f" {name:<3s}" if len(name) < 4 else name[:4]
            lines.append(
                f"ATOM  {serial:5d} {field}{r.name:>4s} {chain}{r.index:4d}    "
                f"{pos[0]:8.3f}{pos[1]:8.3f}{pos[2]:8.3f}  1.00  0.00"
            )
            serial += 1
    lines.append("END")
    return "\n".join(lines) + "\n"


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def build_amide_hydrogen(structure: ProteinStructure, residue_index: int) -> np.ndarray:
    """Idealized amide H: in the C(i-1)/N(i)/CA(i) plane, 1.02 A from N,
    along the bisector pointing away from both neighbours."""
    pos = None
    for k, r in enumerate(structure.residues):
        if r.index == residue_index:
            pos = k
            break
    if pos is None:
        raise KeyError(residue_index)
    if pos == 0:
        raise MissingHydrogenError(
            f"residue {residue_index} is the chain start; no preceding carbonyl"
        )
    res = structure.residues[pos]
    prev = structure.residues[pos - 1]
    if "N" not in res.atoms or "CA" not in res.atoms or "C" not in prev.atoms:
        raise MissingHydrogenError(f"residue {residue_index} lacks N/CA or preceding C")
    n = res.atoms["N"]
    u_c = _unit(prev.atoms["C"] - n)
    u_ca = _unit(res.atoms["CA"] - n)
    direction = -(u_c + u_ca)
    norm = np.linalg.norm(direction)
    if norm < 1.0e-9:
        raise MissingHydrogenError(f"degenerate geometry at residue {residue_index}")
    return n + N_H_LENGTH * (direction / norm)


_TETRAHEDRAL = math.radians(109.4712206)


def build_alpha_hydrogen(structure: ProteinStructure, residue_index: int) -> np.ndarray:
    """Idealized HA: tetrahedral to N and C at 1.09 A from CA, placed on a
    deterministic side of the N-CA-C plane."""
    res = structure.residue_by_index(residue_index)
    for name in ("N", "CA", "C"):
        if name not in res.atoms:
            raise MissingHydrogenError(f"residue {residue_index} lacks backbone atom {name}")
    ca = res.atoms["CA"]
    u_n = _unit(res.atoms["N"] - ca)
    u_c = _unit(res.atoms["C"] - ca)
    s = u_n + u_c
    normal = np.cross(u_n, u_c)
    s_norm = np.linalg.norm(s)
    n_norm = np.linalg.norm(normal)
    if s_norm < 1.0e-9 or n_norm < 1.0e-9:
        raise MissingHydrogenError(f"degenerate geometry at residue {residue_index}")
    cos_t = math.cos(_TETRAHEDRAL)
    a_s = cos_t / float(s @ u_n)  # symmetric in u_n, u_c
    rest = 1.0 - a_s * a_s * s_norm * s_norm
    if rest < 0.0:
        raise MissingHydrogenError(f"geometry too closed at residue {residue_index}")
    direction = a_s * s + math.sqrt(rest) * (normal / n_norm)
    return ca + CA_HA_LENGTH * _unit(direction)


def extract_vectors(structure: ProteinStructure, vtype: str):
    """Unit internuclear vectors of one type, ordered by residue index.

    Returns (vectors, skipped) where ``skipped`` lists residue indices that
    could not contribute a vector.  Hydrogens present in the structure are
    used verbatim; missing ones are built with the idealized constructions.
    """
    if vtype not in VECTOR_TYPES:
        raise UnknownVectorTypeError(vtype)
    nominal = VECTOR_TYPES[vtype][2]
    vectors = []
    skipped = []
    residues = structure.residues
    for k, res in enumerate(residues):
        try:
            if vtype == "N-H":
                if res.name == "PRO":
                    raise MissingHydrogenError("proline has no amide hydrogen")
                origin = res.atoms["N"]
                target = res.atoms.get("H")
                if target is None:
                    target = build_amide_hydrogen(structure, res.index)
            elif vtype == "CA-HA":
                origin = res.atoms["CA"]
                target = res.atoms.get("HA")
                if target is None:
                    if res.name == "GLY":
                        target = res.atoms.get("HA2")
                    if target is None:
                        target = build_alpha_hydrogen(structure, res.index)
            else:  # C-N: carbonyl C of residue i to amide N of residue i+1
                if k + 1 >= len(residues):
                    raise MissingHydrogenError("no following residue")
                origin = res.atoms["C"]
                target = residues[k + 1].atoms["N"]
            if origin is None or target is None:
                raise MissingHydrogenError("missing atom")
        except (KeyError, MissingHydrogenError):
            skipped.append(res.index)
            continue
        vectors.append(
            InternuclearVector(res.index, vtype, _unit(target - origin), nominal)
        )
    return vectors, skipped


def kabsch_rotation(moving: np.ndarray, fixed: np.ndarray) -> np.ndarray:
    """Optimal rotation aligning centered ``moving`` onto centered ``fixed``."""
    h = moving.T @ fixed
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(u @ vt))
    flip = np.diag([1.0, 1.0, d])
    return (u @ flip @ vt).T


def bb_rmsd(a: ProteinStructure, b: ProteinStructure) -> float:
    """Backbone (N, CA, C) RMSD after optimal rigid superposition, Angstrom."""
    if len(a) != len(b):
        raise DimensionMismatchError(
            f"residue counts differ: {len(a)} vs {len(b)}"
        )
    pa = a.backbone_coords()
    pb = b.backbone_coords()
    pa = pa - pa.mean(axis=0)
    pb = pb - pb.mean(axis=0)
    rot = kabsch_rotation(pa, pb)
    diff = pa @ rot.T - pb
    return float(math.sqrt((diff * diff).sum() / pa.shape[0]))
