"""Brute-force reference implementations used by the tests.

These deliberately share no code with the package: plain dicts keyed by
coordinate, Python integers, and a literal step-through of the layered
update loop.
"""
from collections import defaultdict


def accumulate(triples, into=None):
    acc = defaultdict(int) if into is None else into
    for r, c, v in triples:
        acc[(int(r), int(c))] += int(v)
    return acc


def map_of(triples):
    return dict(accumulate(triples))


def merge_maps(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return out


def sorted_entries(m):
    return sorted((r, c, v) for (r, c), v in m.items())


def as_rows(rows, cols, vals):
    return list(zip(rows.tolist(), cols.tolist(), vals.tolist()))


class LayeredMapOracle:
    """Layers as dicts; one ascending overflow pass per update."""

    def __init__(self, cuts):
        self.cuts = list(cuts)
        self.layers = [dict() for _ in range(len(cuts) + 1)]

    def update(self, triples):
        self.layers[0] = merge_maps(self.layers[0], map_of(triples))
        fired = []
        for i, cut in enumerate(self.cuts):
            if len(self.layers[i]) > cut:
                self.layers[i + 1] = merge_maps(self.layers[i + 1], self.layers[i])
                self.layers[i] = {}
                fired.append(1)
            else:
                fired.append(0)
        return fired

    def sizes(self):
        return [len(layer) for layer in self.layers]

    def flush(self):
        out = {}
        for layer in self.layers:
            out = merge_maps(out, layer)
        return out
