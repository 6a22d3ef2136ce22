"""Regenerate src/fallguard/data/templates.json from joint-level pose sketches.

Each pose is sketched by 13 major joints (head centre plus shoulders, elbows,
wrists, hips, knees and ankles, left then right) in normalised image
coordinates with y pointing down.  Face, hand and foot landmarks are derived
from those joints so that every template has the full 33-point layout.

    python scripts/build_templates.py
"""

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "fallguard" / "data" / "templates.json"

# head, (LS, RS), (LE, RE), (LW, RW), (LH, RH), (LK, RK), (LA, RA), toe direction
POSES = {
    "Pose1": dict(  # standing, facing camera
        head=(0.50, 0.18), sh=((0.58, 0.30), (0.42, 0.30)), el=((0.60, 0.45), (0.40, 0.45)),
        wr=((0.61, 0.58), (0.39, 0.58)), hip=((0.55, 0.58), (0.45, 0.58)),
        kn=((0.555, 0.74), (0.445, 0.74)), an=((0.56, 0.90), (0.44, 0.90)), toe=(0.0, 0.4),
    ),
    "Pose2": dict(  # walking, profile facing right, mid-stride
        head=(0.55, 0.19), sh=((0.55, 0.31), (0.49, 0.31)), el=((0.60, 0.43), (0.45, 0.44)),
        wr=((0.67, 0.52), (0.38, 0.56)), hip=((0.53, 0.58), (0.49, 0.58)),
        kn=((0.62, 0.74), (0.45, 0.75)), an=((0.70, 0.89), (0.34, 0.87)), toe=(1.0, 0.0),
    ),
    "Pose3": dict(  # sitting on a chair, profile
        head=(0.45, 0.35), sh=((0.47, 0.45), (0.43, 0.45)), el=((0.50, 0.58), (0.46, 0.58)),
        wr=((0.58, 0.64), (0.55, 0.64)), hip=((0.47, 0.68), (0.43, 0.68)),
        kn=((0.62, 0.68), (0.60, 0.69)), an=((0.62, 0.88), (0.60, 0.88)), toe=(1.0, 0.0),
    ),
    "Pose4": dict(  # bending forward, profile
        head=(0.72, 0.55), sh=((0.64, 0.50), (0.62, 0.50)), el=((0.66, 0.65), (0.64, 0.65)),
        wr=((0.67, 0.78), (0.65, 0.78)), hip=((0.45, 0.55), (0.43, 0.55)),
        kn=((0.46, 0.72), (0.44, 0.72)), an=((0.45, 0.90), (0.43, 0.90)), toe=(1.0, 0.0),
    ),
    "Pose5": dict(  # squatting, facing camera
        head=(0.50, 0.45), sh=((0.58, 0.55), (0.42, 0.55)), el=((0.63, 0.68), (0.37, 0.68)),
        wr=((0.58, 0.76), (0.42, 0.76)), hip=((0.55, 0.78), (0.45, 0.78)),
        kn=((0.64, 0.74), (0.36, 0.74)), an=((0.58, 0.90), (0.42, 0.90)), toe=(0.0, 0.4),
    ),
    "Pose6": dict(  # prone on the floor after a fall, limbs splayed
        head=(0.18, 0.84), sh=((0.30, 0.82), (0.30, 0.87)), el=((0.26, 0.76), (0.38, 0.90)),
        wr=((0.20, 0.72), (0.44, 0.92)), hip=((0.55, 0.83), (0.55, 0.87)),
        kn=((0.70, 0.82), (0.70, 0.88)), an=((0.85, 0.81), (0.86, 0.89)), toe=(0.0, 1.0),
    ),
    "Pose7": dict(  # lying down intentionally on a bed, supine, arms at sides
        head=(0.82, 0.58), sh=((0.70, 0.56), (0.70, 0.62)), el=((0.60, 0.55), (0.60, 0.63)),
        wr=((0.50, 0.55), (0.50, 0.63)), hip=((0.47, 0.57), (0.47, 0.61)),
        kn=((0.32, 0.57), (0.32, 0.61)), an=((0.17, 0.57), (0.17, 0.61)), toe=(0.0, -1.0),
    ),
    "Pose8": dict(  # losing balance, tilted back with arms thrown up
        head=(0.35, 0.22), sh=((0.42, 0.33), (0.36, 0.35)), el=((0.50, 0.22), (0.28, 0.26)),
        wr=((0.56, 0.12), (0.22, 0.15)), hip=((0.50, 0.60), (0.46, 0.60)),
        kn=((0.56, 0.75), (0.50, 0.76)), an=((0.62, 0.90), (0.50, 0.90)), toe=(1.0, 0.0),
    ),
    "Pose9": dict(  # mid-fall, torso at about 45 degrees, hands reaching down
        head=(0.24, 0.48), sh=((0.33, 0.55), (0.31, 0.57)), el=((0.30, 0.68), (0.27, 0.70)),
        wr=((0.26, 0.80), (0.22, 0.82)), hip=((0.50, 0.70), (0.48, 0.70)),
        kn=((0.60, 0.80), (0.58, 0.81)), an=((0.70, 0.90), (0.68, 0.90)), toe=(1.0, 0.0),
    ),
    "Pose10": dict(  # sitting on the floor after impact, legs extended
        head=(0.37, 0.46), sh=((0.38, 0.58), (0.36, 0.58)), el=((0.33, 0.70), (0.42, 0.70)),
        wr=((0.30, 0.82), (0.46, 0.80)), hip=((0.40, 0.82), (0.38, 0.83)),
        kn=((0.55, 0.80), (0.54, 0.81)), an=((0.70, 0.85), (0.69, 0.86)), toe=(0.0, -1.0),
    ),
    "Pose11": dict(  # kneeling upright, facing camera
        head=(0.50, 0.33), sh=((0.58, 0.44), (0.42, 0.44)), el=((0.60, 0.57), (0.40, 0.57)),
        wr=((0.60, 0.70), (0.40, 0.70)), hip=((0.55, 0.70), (0.45, 0.70)),
        kn=((0.56, 0.88), (0.44, 0.88)), an=((0.58, 0.92), (0.42, 0.92)), toe=(0.0, 0.4),
    ),
    "Pose12": dict(  # on hands and knees, profile
        head=(0.28, 0.58), sh=((0.38, 0.60), (0.36, 0.61)), el=((0.38, 0.74), (0.36, 0.74)),
        wr=((0.38, 0.88), (0.36, 0.88)), hip=((0.62, 0.60), (0.60, 0.61)),
        kn=((0.62, 0.85), (0.60, 0.86)), an=((0.80, 0.87), (0.78, 0.88)), toe=(1.0, 0.0),
    ),
}

HEAD = 0.03
FACE = {  # (along head-right, along head-up) in head units
    0: (0.0, 0.0),
    1: (0.25, 0.35), 2: (0.45, 0.38), 3: (0.65, 0.35),
    4: (-0.25, 0.35), 5: (-0.45, 0.38), 6: (-0.65, 0.35),
    7: (1.0, 0.2), 8: (-1.0, 0.2),
    9: (0.3, -0.4), 10: (-0.3, -0.4),
}  # fmt: skip


def _unit(v):
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def build(spec):
    p = np.zeros((33, 2))
    head = np.array(spec["head"])
    sh = np.array(spec["sh"])
    up = _unit(head - sh.mean(axis=0))
    right = np.array([-up[1], up[0]])
    for i, (a, b) in FACE.items():
        p[i] = head + HEAD * (a * right + b * up)
    p[11], p[12] = sh
    p[13], p[14] = spec["el"]
    p[15], p[16] = spec["wr"]
    p[23], p[24] = spec["hip"]
    p[25], p[26] = spec["kn"]
    p[27], p[28] = spec["an"]
    for side, (w, e) in enumerate(((15, 13), (16, 14))):
        sign = 1.0 if side == 0 else -1.0
        d = _unit(p[w] - p[e])
        q = np.array([-d[1], d[0]]) * sign
        p[17 + side] = p[w] + 0.035 * d + 0.012 * q  # pinky
        p[19 + side] = p[w] + 0.040 * d - 0.004 * q  # index
        p[21 + side] = p[w] + 0.020 * d - 0.020 * q  # thumb
    toe = np.array(spec["toe"])
    for side, (a, k) in enumerate(((27, 25), (28, 26))):
        leg = _unit(p[a] - p[k])
        p[29 + side] = p[a] + 0.02 * leg - 0.02 * toe  # heel
        p[31 + side] = p[a] + 0.025 * leg + 0.05 * toe  # foot index
    return np.round(p, 4)


def main():
    templates = {name: build(spec).tolist() for name, spec in POSES.items()}
    arr = np.array(list(templates.values()))
    dists = [
        np.linalg.norm(arr[i] - arr[j], axis=1).mean()
        for i in range(len(arr))
        for j in range(i + 1, len(arr))
    ]
    print(f"min pairwise mean landmark distance: {min(dists):.4f}")
    OUT.parent.mkdir(parents=True, exist_ok=True)
    body = ",\n".join(f'  "{k}": {json.dumps(v)}' for k, v in templates.items())
    OUT.write_text("{\n" + body + "\n}\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
