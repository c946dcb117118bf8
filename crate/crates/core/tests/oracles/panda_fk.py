"""Independent forward-kinematics oracle for data/panda.json.

Walks the description with plain numpy homogeneous matrices and prints the
tool pose at the ready configuration. The values are frozen into
tests/kinematics.rs.
"""
import json
import pathlib

import numpy as np


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def homogeneous(origin):
    t = np.eye(4)
    r, p, y = origin.get("rotation_rpy", [0, 0, 0])
    t[:3, :3] = rot_z(y) @ rot_y(p) @ rot_x(r)
    t[:3, 3] = origin.get("translation", [0, 0, 0])
    return t


def axis_rotation(axis, angle):
    # Rodrigues
    k = np.asarray(axis, float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    t = np.eye(4)
    t[:3, :3] = np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * kx @ kx
    return t


def main():
    path = pathlib.Path(__file__).resolve().parents[2] / "data" / "panda.json"
    desc = json.loads(path.read_text())
    q = desc["ready"]
    t = np.eye(4)
    for joint, angle in zip(desc["joints"], q):
        t = t @ homogeneous(joint["origin"]) @ axis_rotation(joint["axis"], angle)
    t = t @ homogeneous(desc["tool"])
    np.set_printoptions(precision=17)
    for row in t[:3]:
        print(", ".join(f"{v:.17e}" for v in row))


if __name__ == "__main__":
    main()
