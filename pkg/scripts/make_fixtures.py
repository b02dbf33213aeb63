"""Regenerate the JSON input documents under fixtures/.

Each file is a canonical input for the CLI: a graph with a self-map, or an
endomorphism payload.  The maps mirror the named fixtures of the test
suite, plus a few deliberately broken documents for the error paths.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ttforge.graphs import GraphMap, SerreGraph, rose
from ttforge.io import canonical_text, input_to_obj


def rose2_map(images):
    g = rose(["a", "b"])
    return GraphMap(g, g, {"v": "v"}, images)


def fixture_maps():
    cyc2 = SerreGraph(["u", "w"], [("c1", "u", "w"), ("c2", "w", "u")])
    return {
        "sigma": rose2_map({"a": "a b", "b": "a b"}),
        "fib": rose2_map({"a": "b", "b": "a b"}),
        "cyc2": GraphMap(cyc2, cyc2, {"u": "w", "w": "u"},
                         {"c1": "c2", "c2": "c1 c2 c1"}),
        "identity": rose2_map({"a": "a", "b": "b"}),
        "reducible": rose2_map({"a": "a", "b": "a b"}),
        "nonexpanding": rose2_map({"a": "b", "b": "a"}),
        "nilp": GraphMap(rose(["a", "b", "c"]), rose(["a", "b", "c"]),
                         {"v": "v"}, {"a": "c", "b": "c", "c": "a -b"}),
    }


def main():
    outdir = os.path.join(os.path.dirname(__file__), "..", "fixtures")
    os.makedirs(outdir, exist_ok=True)

    def write(name, text):
        path = os.path.join(outdir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print("wrote %s" % os.path.relpath(path))

    for name, f in fixture_maps().items():
        write(name + ".json", canonical_text(input_to_obj(f)))

    write("endo.json", canonical_text({
        "endomorphism": {"generators": ["x", "y"],
                         "images": {"x": "x y", "y": "x y"}}}))
    # error-path documents: undecodable bytes and a backtracking image
    write("malformed.json", "{ this is not json\n")
    write("backtracking.json", canonical_text({
        "schema": 1,
        "graph": {"vertices": ["v"], "edges": [["a", "v", "v"]]},
        "map": {"vertices": {"v": "v"}, "edges": {"a": "a -a a"}}}))


if __name__ == "__main__":
    main()
