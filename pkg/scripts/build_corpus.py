#!/usr/bin/env python3
"""Regenerate the in-repo corpus: complex files, symbolic targets, gluing
specs, and the manifest of expected dimensions.

Run from the repository root:  python3 scripts/build_corpus.py
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bvbfv import corpus  # noqa: E402
from bvbfv.symbolic import BUILTIN_TARGETS, builtin_target  # noqa: E402


def target_to_dict(t):
    return {
        "vars": [{"name": v.name, "degree": v.degree} for v in t.base_vars],
        "omega_degree": t.m,
        "omega": [[str(x) for x in row] for row in t.omega],
        "theta": [
            {
                "coeff": str(c),
                "monomial": [t.algebra.vars[i].name for i in mono],
            }
            for mono, c in sorted(t.theta.items())
        ],
    }


def main():
    root = os.path.join(os.path.dirname(__file__), "..", "corpus")
    os.makedirs(root, exist_ok=True)
    os.makedirs(os.path.join(root, "targets"), exist_ok=True)
    manifest = {"complexes": {}, "targets": list(BUILTIN_TARGETS)}
    for name, build in corpus.BUILDERS.items():
        cx = build()
        cx.save(os.path.join(root, f"{name}.json"))
        cc = cx.cochain_complex()
        manifest["complexes"][name] = {
            "dimension": cx.dimension,
            "faces": [cx.n_faces(k) for k in range(cx.dimension + 1)],
            "betti": {str(k): b for k, b in cc.betti().items()},
            "closed": cx.is_closed(),
        }
    for name in BUILTIN_TARGETS:
        t = builtin_target(name)
        with open(os.path.join(root, "targets", f"{name}.json"), "w") as fh:
            json.dump(target_to_dict(t), fh, indent=1, sort_keys=True)
            fh.write("\n")
    # gluing specs for the solid-torus pair
    st = corpus.solid_torus()
    grid = st.meta["grid"]

    def bv(i, s):
        return grid[(i % 3, s % 3)]

    corpus.with_reversed_orientation(st).save(
        os.path.join(root, "solid_torus_reversed.json"))
    manifest["complexes"]["solid_torus_reversed"] = dict(
        manifest["complexes"]["solid_torus"])
    specs = {
        "glue_solid_tori_meridian_to_longitude.json": {
            "left": "solid_torus.json",
            "right": "solid_torus.json",
            "interface_map": [[bv(i, s), bv(s, i)] for i in range(3) for s in range(3)],
            "expected_glued_betti": {"0": 1, "1": 0, "2": 0, "3": 1},
        },
        "glue_solid_tori_meridian_to_meridian.json": {
            "left": "solid_torus.json",
            "right": "solid_torus_reversed.json",
            "interface_map": [[bv(i, s), bv(i, s)] for i in range(3) for s in range(3)],
            "expected_glued_betti": {"0": 1, "1": 1, "2": 1, "3": 1},
        },
    }
    for fname, data in specs.items():
        with open(os.path.join(root, fname), "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)
            fh.write("\n")
    manifest["gluing_specs"] = sorted(specs)
    with open(os.path.join(root, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"corpus written to {os.path.abspath(root)}")


if __name__ == "__main__":
    main()
