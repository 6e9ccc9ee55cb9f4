"""
Planar kinematics of a symmetric two-finger, two-phalanx grasper.

Palm frame: origin midway between the finger bases, bases at (-w/2, 0) and
(+w/2, 0), +y pointing into the grasp region.  The two fingers are mirror
images across the y-axis.  theta1 = 0 points the proximal link outward along
the palm line, theta1 = pi points it inward; theta2 > 0 curls the distal link
toward the palm.

All residual/chain functions broadcast over numpy arrays.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

LEFT = "left"
RIGHT = "right"
SIDES = (LEFT, RIGHT)

PROXIMAL = "proximal"
DISTAL = "distal"

TWO_PHALANX = "two_phalanx"
PROXIMAL_ONLY = "proximal_only"
DISTAL_ONLY = "distal_only"
FREE = "free"
MODES = (TWO_PHALANX, PROXIMAL_ONLY, DISTAL_ONLY, FREE)

DEFAULT_THETA1_LIMITS = (0.0, np.pi)
DEFAULT_THETA2_LIMITS = (-5.0 * np.pi / 180.0, np.pi / 2.0)

CONTACT_TOL = 1e-6


class InconsistentConfig(ValueError):
    """A configuration does not close its vector loops."""


@dataclass(frozen=True)
class GrasperDesign:
    l1: float
    l2: float
    r1: float
    r2: float
    w: float
    k_spring_1: float = 0.0
    k_spring_2: float = 0.0
    theta1_limits: tuple = DEFAULT_THETA1_LIMITS
    theta2_limits: tuple = DEFAULT_THETA2_LIMITS

    def __post_init__(self):
        for name in ("l1", "l2", "r1", "r2"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        if not np.isfinite(self.w) or self.w < 0:
            raise ValueError(f"w must be non-negative, got {self.w}")
        if np.isclose(self.r1, self.r2, rtol=0.0, atol=1e-12):
            raise ValueError("r1 == r2 is not supported (distal equilibrium at infinity)")
        for name in ("theta1_limits", "theta2_limits"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} must be an ordered interval")
        object.__setattr__(self, "theta1_limits", tuple(float(v) for v in self.theta1_limits))
        object.__setattr__(self, "theta2_limits", tuple(float(v) for v in self.theta2_limits))

    @property
    def transmission_ratio(self):
        return self.r2 / self.r1

    def reach(self, r=0.0):
        """Radius about the palm origin beyond which no finger touches a disk of radius r."""
        return self.w / 2.0 + self.l1 + self.l2 + r

    def key(self):
        return (self.l1, self.l2, self.r1, self.r2, self.w)

    def to_dict(self):
        return {
            "l1": self.l1, "l2": self.l2, "r1": self.r1, "r2": self.r2, "w": self.w,
            "k_spring_1": self.k_spring_1, "k_spring_2": self.k_spring_2,
            "theta1_limits": list(self.theta1_limits),
            "theta2_limits": list(self.theta2_limits),
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for name in ("theta1_limits", "theta2_limits"):
            if name in d:
                d[name] = tuple(d[name])
        return cls(**d)


@dataclass(frozen=True)
class ObjectSpec:
    r: float
    mu_s: float

    def __post_init__(self):
        if not np.isfinite(self.r) or self.r <= 0:
            raise ValueError(f"object radius must be positive, got {self.r}")
        if not np.isfinite(self.mu_s) or self.mu_s < 0:
            raise ValueError(f"friction coefficient must be non-negative, got {self.mu_s}")

    def key(self):
        return (self.r, self.mu_s)

    def to_dict(self):
        return {"r": self.r, "mu_s": self.mu_s}


class PalmPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class FingerConfig:
    side: str
    theta1: float
    theta2: float
    k1: float = 0.0
    k2: float = 0.0
    mode: str = FREE

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"unknown side {self.side!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class ContactPoint:
    position: np.ndarray
    normal: np.ndarray
    link: str
    side: str
    tangent: np.ndarray = field(init=False)

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "tangent", np.array([-n[1], n[0]]))


def mirror(p):
    """Reflect palm-frame points across the y-axis."""
    p = np.asarray(p, dtype=float)
    return p * np.array([-1.0, 1.0])


def base_point(design, side):
    sx = 1.0 if side == RIGHT else -1.0
    return np.array([sx * design.w / 2.0, 0.0])


def link_angles(theta1, theta2, side):
    """World angles of the proximal and distal link directions."""
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    if side == RIGHT:
        return theta1, theta1 + theta2
    return np.pi - theta1, np.pi - theta1 - theta2


def _unit(phi):
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def _interior(phi, side):
    # unit normal from the link toward the grasp interior
    if side == RIGHT:
        return np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
    return np.stack([np.sin(phi), -np.cos(phi)], axis=-1)


def finger_chain(design, config):
    """Base, distal joint and fingertip positions of one finger."""
    phi1, phi2 = link_angles(config.theta1, config.theta2, config.side)
    base = base_point(design, config.side)
    joint2 = base + design.l1 * _unit(phi1)
    tip = joint2 + design.l2 * _unit(phi2)
    return base, joint2, tip


def free_config(design, side):
    """Pose of a finger that closes without touching the object."""
    return FingerConfig(side, design.theta1_limits[1], design.theta2_limits[1], mode=FREE)


def proximal_loop_residual(design, obj, p, theta1, k1, side):
    """p minus the disk centre implied by resting on the proximal link at k1."""
    p = np.asarray(p, dtype=float)
    phi1, _ = link_angles(theta1, 0.0, side)
    k1 = np.asarray(k1, dtype=float)[..., None]
    model = base_point(design, side) + k1 * _unit(phi1) + obj.r * _interior(phi1, side)
    return p - model


def distal_loop_residual(design, obj, p, theta1, theta2, k2, side):
    """p minus the disk centre implied by resting on the distal link at k2."""
    p = np.asarray(p, dtype=float)
    phi1, phi2 = link_angles(theta1, theta2, side)
    k2 = np.asarray(k2, dtype=float)[..., None]
    model = (base_point(design, side) + design.l1 * _unit(phi1)
             + k2 * _unit(phi2) + obj.r * _interior(phi2, side))
    return p - model


def distal_loop_jacobian(design, obj, theta1, theta2, k2, side):
    """Analytic d(residual)/d(theta1, theta2, k2), shape (..., 2, 3)."""
    phi1, phi2 = link_angles(theta1, theta2, side)
    s = 1.0 if side == RIGHT else -1.0
    k2 = np.asarray(k2, dtype=float)
    # d phi1/d theta1 = s, d phi2/d theta1 = s, d phi2/d theta2 = s
    u1, u2 = _unit(phi1), _unit(phi2)
    du1 = np.stack([-u1[..., 1], u1[..., 0]], axis=-1)
    du2 = np.stack([-u2[..., 1], u2[..., 0]], axis=-1)
    dn2 = -u2 if side == RIGHT else u2
    # model = B + l1 u1 + k2 u2 + r n2 ; residual = p - model
    d_phi2 = k2[..., None] * du2 + obj.r * dn2
    d_t1 = -(s * design.l1 * du1 + s * d_phi2)
    d_t2 = -(s * d_phi2)
    d_k2 = -u2
    return np.stack([d_t1, d_t2, d_k2], axis=-1)


def contact_from_config(design, obj, p, config, tol=CONTACT_TOL):
    """Contacts of a solved configuration; normals point at the disk centre."""
    p = np.asarray(p, dtype=float)
    if config.mode == FREE:
        return []
    base, joint2, _ = finger_chain(design, config)
    phi1, phi2 = link_angles(config.theta1, config.theta2, config.side)
    touching = []
    if config.mode in (TWO_PHALANX, PROXIMAL_ONLY):
        touching.append((PROXIMAL, base + config.k1 * _unit(phi1)))
    if config.mode in (TWO_PHALANX, DISTAL_ONLY) or (config.mode == PROXIMAL_ONLY and config.k2 > 0):
        touching.append((DISTAL, joint2 + config.k2 * _unit(phi2)))
    contacts = []
    for link, pos in touching:
        gap = np.linalg.norm(p - pos)
        if abs(gap - obj.r) > tol * max(1.0, obj.r):
            raise InconsistentConfig(
                f"{config.side} {link} contact is {gap:.6g} from the centre, expected {obj.r}")
        contacts.append(ContactPoint(pos, (p - pos) / gap, link, config.side))
    return contacts
