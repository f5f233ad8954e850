#!/usr/bin/env python3
"""Convert the UCI Character Trajectories .mat file to the motorfep text format.

    python3 tools/convert_chartraj.py mixoutALL_shifted.mat letters_vel.txt

The output holds pen-tip velocities, one record per character; load it with
`data.format = velocities`. Pen force (the third row) is dropped.
"""

import argparse
import sys

import numpy as np
import scipy.io


def load(path):
    mat = scipy.io.loadmat(path, squeeze_me=True, struct_as_record=False)
    consts = mat["consts"]
    keys = [str(k) for k in np.atleast_1d(consts.key)]
    labels = np.atleast_1d(consts.charlabels).astype(int)
    for traj, label in zip(np.atleast_1d(mat["mixout"]), labels):
        traj = np.asarray(traj, dtype=float)
        if traj.ndim != 2 or traj.shape[0] < 2:
            raise ValueError(f"unexpected trajectory shape {traj.shape}")
        yield keys[label - 1], traj[0], traj[1]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("mat")
    ap.add_argument("out")
    ap.add_argument("--letters", default="", help="comma-separated subset, e.g. c,s")
    args = ap.parse_args(argv)

    keep = {s for s in args.letters.split(",") if s}
    count = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# converted from {args.mat}; velocities\n")
        for label, vx, vy in load(args.mat):
            if keep and label not in keep:
                continue
            f.write(label + "\n")
            for x, y in zip(vx, vy):
                f.write(f"{x!r},{y!r}\n")
            f.write("\n")
            count += 1
    print(f"wrote {count} records to {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
