"""Backbone construction from torsion angles with idealized geometry.

Used to build synthetic reference folds for experiments and tests; the
torsion-perturbation decoy generator reuses the same geometry constants.
"""

from __future__ import annotations

import math

import numpy as np

from .structures import ProteinStructure, Residue

# Idealized backbone geometry (Angstrom / degrees).
BOND_N_CA = 1.458
BOND_CA_C = 1.525
BOND_C_N = 1.329
BOND_C_O = 1.231
ANGLE_N_CA_C = 111.2
ANGLE_CA_C_N = 116.2
ANGLE_C_N_CA = 121.7
OMEGA = 180.0

HELIX = (-57.0, -47.0)
STRAND = (-119.0, 113.0)


def place_atom(a, b, c, length, angle_deg, dihedral_deg):
    """Position of atom D given chain A-B-C and internal coordinates of D."""
    theta = math.radians(angle_deg)
    chi = math.radians(dihedral_deg)
    bc = c - b
    bc = bc / np.linalg.norm(bc)
    n = np.cross(b - a, bc)
    n = n / np.linalg.norm(n)
    m = np.cross(n, bc)
    d_local = np.array(
        [
            -length * math.cos(theta),
            length * math.sin(theta) * math.cos(chi),
            length * math.sin(theta) * math.sin(chi),
        ]
    )
    frame = np.stack([bc, m, n], axis=1)
    return c + frame @ d_local


def dihedral(p0, p1, p2, p3) -> float:
    """Signed dihedral angle p0-p1-p2-p3 in degrees."""
    b0 = p1 - p0
    b1 = p2 - p1
    b2 = p3 - p2
    b1u = b1 / np.linalg.norm(b1)
    v = b0 - (b0 @ b1u) * b1u
    w = b2 - (b2 @ b1u) * b1u
    x = v @ w
    y = np.cross(b1u, v) @ w
    return math.degrees(math.atan2(y, x))


def build_backbone(phi_psi, names=None, structure_id="") -> ProteinStructure:
    """Build an N/CA/C/O backbone from per-residue (phi, psi) pairs.

    phi of the first residue is geometrically undefined and ignored; psi of
    the last residue only orients its carbonyl oxygen.
    """
    n_res = len(phi_psi)
    if names is None:
        names = ["ALA"] * n_res
    theta_ncac = math.radians(ANGLE_N_CA_C)
    pos_n = np.array([0.0, 0.0, 0.0])
    pos_ca = np.array([BOND_N_CA, 0.0, 0.0])
    pos_c = pos_ca + BOND_CA_C * np.array(
        [math.cos(math.pi - theta_ncac), math.sin(math.pi - theta_ncac), 0.0]
    )
    residues = [Residue(1, names[0], {"N": pos_n, "CA": pos_ca, "C": pos_c})]
    for i in range(1, n_res):
        prev = residues[-1].atoms
        psi_prev = phi_psi[i - 1][1]
        new_n = place_atom(prev["N"], prev["CA"], prev["C"], BOND_C_N, ANGLE_CA_C_N, psi_prev)
        new_ca = place_atom(prev["CA"], prev["C"], new_n, BOND_N_CA, ANGLE_C_N_CA, OMEGA)
        new_c = place_atom(prev["C"], new_n, new_ca, BOND_CA_C, ANGLE_N_CA_C, phi_psi[i][0])
        residues.append(Residue(i + 1, names[i], {"N": new_n, "CA": new_ca, "C": new_c}))
    _attach_carbonyl_oxygens(residues, phi_psi)
    return ProteinStructure(residues, structure_id).validate()


def _attach_carbonyl_oxygens(residues, phi_psi):
    for i, res in enumerate(residues):
        if i + 1 < len(residues):
            # sp2 carbonyl: O on the in-plane bisector away from CA and next N
            c = res.atoms["C"]
            u_ca = res.atoms["CA"] - c
            u_ca = u_ca / np.linalg.norm(u_ca)
            u_n = residues[i + 1].atoms["N"] - c
            u_n = u_n / np.linalg.norm(u_n)
            d = -(u_ca + u_n)
            res.atoms["O"] = c + BOND_C_O * d / np.linalg.norm(d)
        else:
            res.atoms["O"] = place_atom(
                res.atoms["N"], res.atoms["CA"], res.atoms["C"],
                BOND_C_O, 120.8, phi_psi[i][1] + 180.0,
            )


def measure_phi_psi(structure: ProteinStructure):
    """(phi, psi) pairs in degrees; undefined entries are NaN."""
    out = []
    res = structure.residues
    for i, r in enumerate(res):
        phi = math.nan
        psi = math.nan
        if i > 0:
            phi = dihedral(res[i - 1].atoms["C"], r.atoms["N"], r.atoms["CA"], r.atoms["C"])
        if i + 1 < len(res):
            psi = dihedral(r.atoms["N"], r.atoms["CA"], r.atoms["C"], res[i + 1].atoms["N"])
        out.append((phi, psi))
    return out


def _segments(*parts):
    angles = []
    for part in parts:
        angles.extend(part)
    return angles


def _run(angle_pair, n):
    return [angle_pair] * n


# Short connectors chosen to change the chain direction between regular
# secondary-structure elements.
_TURN_A = [(-60.0, -30.0), (-90.0, 0.0), (-70.0, 140.0)]
_TURN_B = [(55.0, 47.0), (78.0, 6.0)]
_TURN_C = [(-75.0, 150.0), (60.0, 30.0), (-100.0, 10.0)]


def alpha_like(n_res=46, structure_id="alpha_like") -> ProteinStructure:
    """Helix bundle: three helices connected by loops."""
    per = max(6, (n_res - 6) // 3)
    angles = _segments(
        _run(HELIX, per), _TURN_A, _run(HELIX, per), _TURN_C, _run(HELIX, per)
    )
    return build_backbone(angles[:n_res] if len(angles) > n_res else angles, structure_id=structure_id)


def beta_like(n_res=48, structure_id="beta_like") -> ProteinStructure:
    """Antiparallel sheet: four strands joined by tight turns."""
    per = max(5, (n_res - 6) // 4)
    angles = _segments(
        _run(STRAND, per), _TURN_B, _run(STRAND, per), _TURN_A,
        _run(STRAND, per), _TURN_B, _run(STRAND, per),
    )
    return build_backbone(angles[:n_res] if len(angles) > n_res else angles, structure_id=structure_id)


def mixed_like(n_res=48, structure_id="mixed_like") -> ProteinStructure:
    """Alternating strand/helix architecture."""
    per_s = max(5, n_res // 6)
    per_h = max(7, n_res // 4)
    angles = _segments(
        _run(STRAND, per_s), _TURN_A, _run(HELIX, per_h), _TURN_B,
        _run(STRAND, per_s), _TURN_C, _run(HELIX, per_h),
    )
    return build_backbone(angles[:n_res] if len(angles) > n_res else angles, structure_id=structure_id)
