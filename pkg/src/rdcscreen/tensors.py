"""Order tensors, Euler rotations and dipolar coupling back-calculation.

Conventions used throughout the package:

* Euler angles are ZYZ, active rotations, degrees at the interface and
  radians internally.
* A tensor's orientation maps principal-frame coordinates into the
  molecular frame: S_mol = R @ diag(principal) @ R.T.
* Principal values are kept traceless and canonically ordered with
  |Szz| >= |Syy| >= |Sxx|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    ConfigError,
    TraceError,
    UnderdeterminedError,
    UnknownVectorTypeError,
)

# SI values: vacuum permeability (N A^-2), Planck constant (J s) and
# gyromagnetic ratios (rad s^-1 T^-1).  gamma(15N) is negative.
MU0 = 1.25663706212e-06
PLANCK_H = 6.62607015e-34
GYROMAGNETIC = {
    "1H": 2.6752218744e8,
    "13C": 6.728284e7,
    "15N": -2.71261804e7,
}

# vector type -> (nucleus i, nucleus j, nominal internuclear distance, Angstrom)
VECTOR_TYPES = {
    "N-H": ("15N", "1H", 1.02),
    "CA-HA": ("13C", "1H", 1.09),
    "C-N": ("13C", "15N", 1.33),
}

# Condition number above which a tensor fit is flagged as geometrically
# degenerate (near-coplanar or near-parallel vector sets).
DEGENERATE_CONDITION = 1.0e8


def dmax(vtype: str) -> float:
    """Maximal dipolar coupling prefactor for a vector type, in Hz."""
    try:
        ni, nj, r_ang = VECTOR_TYPES[vtype]
    except KeyError:
        raise UnknownVectorTypeError(vtype) from None
    r = r_ang * 1.0e-10
    return -MU0 * GYROMAGNETIC[ni] * GYROMAGNETIC[nj] * PLANCK_H / (8.0 * math.pi**3 * r**3)


@dataclass(frozen=True)
class EulerAngles:
    """ZYZ Euler angles in degrees."""

    alpha: float
    beta: float
    gamma: float

    def to_matrix(self) -> np.ndarray:
        return euler_to_matrix(self)

    @classmethod
    def from_matrix(cls, rot: np.ndarray) -> "EulerAngles":
        return matrix_to_euler(rot)

    def canonical(self) -> "EulerAngles":
        """Equivalent angles with alpha, gamma in [0, 360) and beta in [0, 180]."""
        return matrix_to_euler(self.to_matrix())

    def compose(self, other: "EulerAngles") -> "EulerAngles":
        """Rotation equal to applying ``other`` first, then ``self``."""
        return matrix_to_euler(self.to_matrix() @ other.to_matrix())

    def inverse(self) -> "EulerAngles":
        return matrix_to_euler(self.to_matrix().T)

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


IDENTITY_EULER = EulerAngles(0.0, 0.0, 0.0)


def euler_to_matrix(e: EulerAngles) -> np.ndarray:
    """Proper rotation matrix Rz(alpha) @ Ry(beta) @ Rz(gamma)."""
    a, b, g = (math.radians(x) for x in (e.alpha, e.beta, e.gamma))
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    cg, sg = math.cos(g), math.sin(g)
    return np.array(
        [
            [ca * cb * cg - sa * sg, -ca * cb * sg - sa * cg, ca * sb],
            [sa * cb * cg + ca * sg, -sa * cb * sg + ca * cg, sa * sb],
            [-sb * cg, sb * sg, cb],
        ]
    )


def matrix_to_euler(rot: np.ndarray) -> EulerAngles:
    """Extract canonical ZYZ angles; beta in [0, 180], alpha/gamma in [0, 360)."""
    r22 = min(1.0, max(-1.0, float(rot[2, 2])))
    beta = math.degrees(math.acos(r22))
    sb = math.sqrt(max(0.0, 1.0 - r22 * r22))
    if sb < 1.0e-9:
        if r22 > 0.0:  # beta == 0: only alpha + gamma matters
            alpha = math.degrees(math.atan2(rot[1, 0], rot[0, 0]))
            beta = 0.0
        else:  # beta == 180: only alpha - gamma matters
            alpha = math.degrees(math.atan2(-rot[1, 0], -rot[0, 0]))
            beta = 180.0
        gamma = 0.0
    else:
        alpha = math.degrees(math.atan2(rot[1, 2], rot[0, 2]))
        gamma = math.degrees(math.atan2(rot[2, 1], -rot[2, 0]))
    return EulerAngles(alpha % 360.0, beta, gamma % 360.0)


def rotation_angle_deg(rot: np.ndarray) -> float:
    """Geodesic angle of a rotation matrix, in degrees."""
    c = (float(np.trace(rot)) - 1.0) / 2.0
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


# Sign-flip matrices generating the 4-fold symmetry of a principal frame:
# pi rotations about each principal axis leave a diagonal tensor unchanged.
_FRAME_SYMMETRY = (
    np.diag([1.0, 1.0, 1.0]),
    np.diag([1.0, -1.0, -1.0]),
    np.diag([-1.0, 1.0, -1.0]),
    np.diag([-1.0, -1.0, 1.0]),
)


def frame_symmetry_mates(rot: np.ndarray):
    """The four physically equivalent orientations of a principal frame."""
    return [rot @ c for c in _FRAME_SYMMETRY]


@dataclass(frozen=True)
class SaupeTensor:
    """Traceless order tensor as principal values plus frame orientation."""

    principal: tuple
    euler: EulerAngles
    trace_repaired: bool = field(default=False, compare=False)

    @classmethod
    def from_principal(cls, sxx, syy, szz, euler=IDENTITY_EULER, repair_trace=False):
        trace = sxx + syy + szz
        scale = max(abs(sxx), abs(syy), abs(szz), 1.0e-30)
        repaired = False
        if abs(trace) > 1.0e-9 * scale:
            if not repair_trace:
                raise TraceError(
                    f"principal values sum to {trace:g}, expected 0 (Sxx={sxx:g}, Syy={syy:g}, Szz={szz:g})"
                )
            szz = -(sxx + syy)
            repaired = True
        return cls((float(sxx), float(syy), float(szz)), euler, trace_repaired=repaired)

    def matrix(self) -> np.ndarray:
        rot = self.euler.to_matrix()
        return rot @ np.diag(self.principal) @ rot.T

    def cartesian(self) -> np.ndarray:
        """Five independent components in the order Sxx, Sxy, Sxz, Syy, Syz."""
        m = self.matrix()
        return np.array([m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2]])

    @classmethod
    def from_cartesian(cls, comps) -> "SaupeTensor":
        sxx, sxy, sxz, syy, syz = (float(c) for c in comps)
        m = np.array(
            [
                [sxx, sxy, sxz],
                [sxy, syy, syz],
                [sxz, syz, -(sxx + syy)],
            ]
        )
        return cls.from_matrix(m)

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "SaupeTensor":
        """Canonical principal form of a symmetric traceless 3x3 matrix."""
        if not np.allclose(m, m.T, atol=1.0e-10 * max(1.0, float(np.abs(m).max()))):
            raise ConfigError("order tensor matrix must be symmetric")
        vals, vecs = np.linalg.eigh(m)
        order = np.argsort(np.abs(vals))  # |Sxx| <= |Syy| <= |Szz|
        vals = vals[order]
        vecs = vecs[:, order]
        if np.linalg.det(vecs) < 0.0:
            vecs = vecs * np.array([1.0, 1.0, -1.0])
        rot = _canonical_frame(vecs)
        return cls((float(vals[0]), float(vals[1]), float(vals[2])), matrix_to_euler(rot))

    def canonical(self) -> "SaupeTensor":
        return SaupeTensor.from_matrix(self.matrix())

    @property
    def szz(self):
        return self.principal[2]


def _canonical_frame(rot: np.ndarray) -> np.ndarray:
    """Deterministic representative of the 4-fold equivalent frames."""
    best = None
    best_key = None
    for mate in frame_symmetry_mates(rot):
        e = matrix_to_euler(mate)
        key = (round(e.beta, 9), round(e.alpha, 9), round(e.gamma, 9))
        if best_key is None or key < best_key:
            best_key = key
            best = mate
    return best


def rotate_alignment(tensor: SaupeTensor, e: EulerAngles) -> SaupeTensor:
    """Compose a rotation onto the tensor's frame; principal values unchanged."""
    new_rot = e.to_matrix() @ tensor.euler.to_matrix()
    return SaupeTensor(tensor.principal, matrix_to_euler(new_rot))


def interaction_rows(directions: np.ndarray) -> np.ndarray:
    """Rows mapping the 5 free tensor components to couplings.

    For a unit vector v the reduced coupling is row(v) . s with
    s = (Sxx, Syy, Sxy, Sxz, Syz) of the molecular-frame tensor and
    row(v) = (x^2 - z^2, y^2 - z^2, 2xy, 2xz, 2yz).
    """
    v = np.asarray(directions, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    return np.stack(
        [x * x - z * z, y * y - z * z, 2.0 * x * y, 2.0 * x * z, 2.0 * y * z],
        axis=-1,
    )


def matrix_to_components5(m: np.ndarray) -> np.ndarray:
    """(Sxx, Syy, Sxy, Sxz, Syz) of a molecular-frame tensor matrix."""
    return np.array([m[0, 0], m[1, 1], m[0, 1], m[0, 2], m[1, 2]])


def back_calc_rdc(vector, tensor: SaupeTensor, vtype: str | None = None) -> float:
    """Coupling in Hz for one internuclear vector under one tensor."""
    if vtype is None:
        vtype = vector.vtype
    direction = getattr(vector, "direction", vector)
    v = np.asarray(direction, dtype=float)
    return float(dmax(vtype) * (v @ tensor.matrix() @ v))


@dataclass(frozen=True)
class FitResult:
    """Least-squares tensor fit plus diagnostics."""

    tensor: SaupeTensor
    residual: float
    condition: float

    @property
    def degenerate(self) -> bool:
        return self.condition > DEGENERATE_CONDITION


def fit_order_tensor(vectors, rdcs, vtype: str) -> FitResult:
    """SVD least-squares fit of the 5 free tensor components.

    ``vectors`` may be InternuclearVector objects or raw unit direction
    arrays; ``rdcs`` are couplings in Hz matching ``vectors`` order.
    """
    return fit_order_tensor_joint([(vectors, rdcs, vtype)])


def fit_order_tensor_joint(channels) -> FitResult:
    """Joint fit over several (vectors, rdcs, vtype) channels of one medium."""
    blocks = []
    obs = []
    for vectors, rdcs, vtype in channels:
        dirs = np.array(
            [getattr(v, "direction", v) for v in vectors], dtype=float
        ).reshape(-1, 3)
        vals = np.asarray(rdcs, dtype=float)
        if dirs.shape[0] != vals.shape[0]:
            raise ConfigError("vector and coupling counts differ")
        blocks.append(interaction_rows(dirs) * dmax(vtype))
        obs.append(vals)
    a = np.vstack(blocks)
    b = np.concatenate(obs)
    if a.shape[0] < 5:
        raise UnderdeterminedError(
            f"{a.shape[0]} couplings cannot determine 5 tensor components"
        )
    sol, _, _, sing = np.linalg.lstsq(a, b, rcond=None)
    condition = float(sing[0] / sing[-1]) if sing[-1] > 0.0 else math.inf
    residual = float(np.linalg.norm(a @ sol - b))
    sxx, syy, sxy, sxz, syz = sol
    tensor = SaupeTensor.from_cartesian([sxx, sxy, sxz, syy, syz])
    return FitResult(tensor, residual, condition)


@dataclass
class AlignmentSet:
    """Order tensors of n media in the 5n-3 relative parameterization.

    Medium 0 is the anchor.  Orientations of media 1..n-1 are stored
    relative to the anchor frame; the anchor's own molecular-frame
    orientation is only known on the synthesis side and is ignored by
    orientation searches.
    """

    medium_ids: list
    principals: list  # per medium: (Sxx, Syy, Szz)
    relative: list  # per medium: EulerAngles; entry 0 is the identity
    anchor_euler: EulerAngles | None = None

    def __post_init__(self):
        n = len(self.medium_ids)
        if not (len(self.principals) == len(self.relative) == n) or n == 0:
            raise ConfigError("media lists must be non-empty and equally long")

    @classmethod
    def from_absolute(cls, medium_ids, tensors) -> "AlignmentSet":
        """Build from per-medium molecular-frame tensors; first is the anchor."""
        rot0 = tensors[0].euler.to_matrix()
        relative = [IDENTITY_EULER]
        for t in tensors[1:]:
            relative.append(matrix_to_euler(rot0.T @ t.euler.to_matrix()))
        return cls(
            list(medium_ids),
            [t.principal for t in tensors],
            relative,
            anchor_euler=tensors[0].euler,
        )

    @property
    def n_media(self) -> int:
        return len(self.medium_ids)

    def free_parameter_count(self) -> int:
        # anchor: 2 traceless principal values; each extra medium adds
        # 2 principal values and 3 relative orientation angles.
        return 5 * self.n_media - 3

    def medium_index(self, medium_id) -> int:
        try:
            return self.medium_ids.index(medium_id)
        except ValueError:
            raise ConfigError(f"unknown medium id: {medium_id!r}") from None

    def absolute_tensor(self, m: int) -> SaupeTensor:
        """Molecular-frame tensor of medium m; requires a known anchor."""
        if self.anchor_euler is None:
            raise ConfigError("anchor orientation is unknown for this alignment set")
        rot = self.anchor_euler.to_matrix() @ self.relative[m].to_matrix()
        return SaupeTensor(tuple(self.principals[m]), matrix_to_euler(rot))

    def oriented(self, anchor: EulerAngles) -> "AlignmentSet":
        """Copy with the anchor frame pinned to ``anchor``."""
        return AlignmentSet(
            list(self.medium_ids), list(self.principals), list(self.relative), anchor
        )


def write_tensor_file(path, alignments: AlignmentSet, form="principal"):
    """Plain-text tensor records, one medium per line."""
    lines = []
    for m, mid in enumerate(alignments.medium_ids):
        if form == "principal":
            t = alignments.absolute_tensor(m)
            sxx, syy, szz = t.principal
            e = t.euler
            lines.append(
                f"{mid} {sxx:.12g} {syy:.12g} {szz:.12g} "
                f"{e.alpha:.12g} {e.beta:.12g} {e.gamma:.12g}"
            )
        elif form == "cartesian":
            comps = alignments.absolute_tensor(m).cartesian()
            body = " ".join(f"{c:.12g}" for c in comps)
            lines.append(f"{mid} cartesian {body}")
        else:
            raise ConfigError(f"unknown tensor file form: {form!r}")
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def read_tensor_file(path) -> AlignmentSet:
    """Parse tensor records; non-traceless principal rows are repaired.

    Repairs replace Szz by -(Sxx+Syy) and are recorded on the returned
    tensors via ``trace_repaired``.
    """
    ids = []
    tensors = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) >= 2 and parts[1] == "cartesian":
                if len(parts) != 7:
                    raise ConfigError(f"bad cartesian tensor record: {line!r}")
                tensor = SaupeTensor.from_cartesian([float(x) for x in parts[2:7]])
            elif len(parts) == 7:
                sxx, syy, szz, a, b, g = (float(x) for x in parts[1:7])
                tensor = SaupeTensor.from_principal(
                    sxx, syy, szz, EulerAngles(a, b, g), repair_trace=True
                )
            else:
                raise ConfigError(f"bad tensor record: {line!r}")
            ids.append(parts[0])
            tensors.append(tensor)
    if not ids:
        raise ConfigError(f"no tensor records in {path}")
    return AlignmentSet.from_absolute(ids, tensors)
