# SPDX-License-Identifier: Apache-2.0
"""Subprocess solver adapter backed by scipy's HiGHS interface.

Usage: highs_adapter.py <model.lp> <solution.out> [mip_rel_gap]

Reads the LP subset emitted by the scheduler's exporter (Minimize, Subject To,
Bounds, Binaries, End; '\\' comments; explicit coefficients on every term) and
writes the solution-file contract: a status line, an objective line, then one
``name value`` pair per nonzero column.
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix

RELS = ("<=", ">=", "=", "=<", "=>")


def split_sections(text):
    sense = 1.0
    sections = {"obj": [], "con": [], "bnd": [], "bin": [], "gen": []}
    current = None
    for raw in text.splitlines():
        stripped = raw.strip()
        if not stripped or stripped.startswith("\\"):
            continue
        low = stripped.lower()
        if low in ("minimize", "minimise", "min"):
            current = "obj"
            continue
        if low in ("maximize", "maximise", "max"):
            current = "obj"
            sense = -1.0
            continue
        if low in ("subject to", "such that", "st", "s.t."):
            current = "con"
            continue
        if low in ("bounds", "bound"):
            current = "bnd"
            continue
        if low in ("binaries", "binary", "bin"):
            current = "bin"
            continue
        if low in ("general", "generals", "gen"):
            current = "gen"
            continue
        if low == "end":
            current = None
            continue
        if current is None:
            raise ValueError("line outside any LP section: " + stripped)
        if current == "bnd":
            sections["bnd"].append(stripped.split())
        else:
            sections[current].extend(stripped.split())
    return sections, sense


def parse_terms(tokens, i):
    """Parses [sign] coeff name ... until a relation or the next row label."""
    coeffs = {}
    sign = 1.0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok in RELS or tok.endswith(":"):
            break
        if tok == "+":
            sign = 1.0
            i += 1
            continue
        if tok == "-":
            sign = -1.0
            i += 1
            continue
        try:
            value = float(tok)
        except ValueError:
            coeffs[tok] = coeffs.get(tok, 0.0) + sign
            sign = 1.0
            i += 1
            continue
        name = tokens[i + 1]
        coeffs[name] = coeffs.get(name, 0.0) + sign * value
        sign = 1.0
        i += 2
    return coeffs, i


class Model:
    def __init__(self):
        self.columns = {}  # name -> index
        self.objective = {}
        self.rows = []  # (coeffs, rel, rhs)
        self.lower = []
        self.upper = []
        self.integral = []

    def column(self, name):
        if name not in self.columns:
            self.columns[name] = len(self.columns)
            self.lower.append(0.0)
            self.upper.append(np.inf)
            self.integral.append(0)
        return self.columns[name]


def parse_lp(text):
    sections, sense = split_sections(text)
    model = Model()

    tokens = sections["obj"]
    i = 1 if tokens and tokens[0].endswith(":") else 0
    model.objective, i = parse_terms(tokens, i)
    for name in model.objective:
        model.column(name)

    tokens = sections["con"]
    i = 0
    while i < len(tokens):
        if not tokens[i].endswith(":"):
            raise ValueError("expected a row label, got " + tokens[i])
        i += 1
        coeffs, i = parse_terms(tokens, i)
        rel = tokens[i]
        rhs = float(tokens[i + 1])
        i += 2
        for name in coeffs:
            model.column(name)
        model.rows.append((coeffs, rel, rhs))

    for parts in sections["bnd"]:
        if len(parts) == 2 and parts[1].lower() == "free":
            j = model.column(parts[0])
            model.lower[j] = -np.inf
            model.upper[j] = np.inf
        elif len(parts) == 3:
            j = model.column(parts[0])
            if parts[1] in (">=", "=>"):
                model.lower[j] = float(parts[2])
            elif parts[1] in ("<=", "=<"):
                model.upper[j] = float(parts[2])
            elif parts[1] == "=":
                model.lower[j] = model.upper[j] = float(parts[2])
            else:
                raise ValueError("bad bound line: " + " ".join(parts))
        elif len(parts) == 5 and parts[1] in ("<=", "=<") and parts[3] in ("<=", "=<"):
            j = model.column(parts[2])
            model.lower[j] = float(parts[0])
            model.upper[j] = float(parts[4])
        else:
            raise ValueError("bad bound line: " + " ".join(parts))

    for name in sections["bin"]:
        j = model.column(name)
        model.integral[j] = 1
        model.lower[j] = max(model.lower[j], 0.0)
        model.upper[j] = min(model.upper[j], 1.0)
    for name in sections["gen"]:
        model.integral[model.column(name)] = 1

    return model, sense


def main():
    if len(sys.argv) < 3:
        print("usage: highs_adapter.py <model.lp> <solution.out> [gap]", file=sys.stderr)
        return 2
    gap = float(sys.argv[3]) if len(sys.argv) > 3 else 1e-6

    with open(sys.argv[1]) as fh:
        model, sense = parse_lp(fh.read())

    n = len(model.columns)
    c = np.zeros(n)
    for name, v in model.objective.items():
        c[model.columns[name]] = sense * v

    constraints = []
    if model.rows:
        data, indices, indptr = [], [], [0]
        lb, ub = [], []
        for coeffs, rel, rhs in model.rows:
            for name, v in coeffs.items():
                indices.append(model.columns[name])
                data.append(v)
            indptr.append(len(data))
            if rel in ("<=", "=<"):
                lb.append(-np.inf)
                ub.append(rhs)
            elif rel in (">=", "=>"):
                lb.append(rhs)
                ub.append(np.inf)
            else:
                lb.append(rhs)
                ub.append(rhs)
        a = csr_matrix((data, indices, indptr), shape=(len(model.rows), n))
        constraints.append(LinearConstraint(a, lb, ub))

    res = milp(
        c=c,
        constraints=constraints,
        integrality=np.array(model.integral),
        bounds=Bounds(np.array(model.lower), np.array(model.upper)),
        options={"mip_rel_gap": gap},
    )

    if res.status == 2:
        with open(sys.argv[2], "w") as fh:
            fh.write("status infeasible\n")
        return 0
    if res.status != 0 or res.x is None:
        print("highs adapter: unexpected status %s (%s)" % (res.status, res.message),
              file=sys.stderr)
        return 1

    names = list(model.columns)
    with open(sys.argv[2], "w") as fh:
        fh.write("status optimal\n")
        fh.write("objective %s\n" % repr(sense * float(res.fun)))
        for j, name in enumerate(names):
            v = float(res.x[j])
            if model.integral[j]:
                v = float(round(v))
            if v != 0.0:
                fh.write("%s %s\n" % (name, repr(v)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
