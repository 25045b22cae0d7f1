#!/usr/bin/env python3
"""Solve a CPLEX-style LP-format MILP with scipy's HiGHS backend.

Usage: solve_lp_scipy.py FILE.lp

Prints a single JSON object {"status": ..., "objective": ...} to stdout.
The objective is reported in the file's stated sense (a Maximize file gets
its maximum printed). Used as an independent cross-check of the embedded
branch-and-bound solver.
"""

import json
import re
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

SECTION_KEYWORDS = {
    "maximize": ("objective", False),
    "max": ("objective", False),
    "minimize": ("objective", True),
    "min": ("objective", True),
    "subject to": ("rows", None),
    "st": ("rows", None),
    "s.t.": ("rows", None),
    "such that": ("rows", None),
    "bounds": ("bounds", None),
    "binaries": ("binaries", None),
    "binary": ("binaries", None),
    "bin": ("binaries", None),
    "end": ("done", None),
}

SENSES = {"<=", "<", ">=", ">", "="}


def parse_bound_token(tok):
    low = tok.lower()
    if low in ("inf", "+inf", "infinity", "+infinity"):
        return np.inf
    if low in ("-inf", "-infinity"):
        return -np.inf
    return float(tok)


class Problem:
    def __init__(self):
        self.names = []
        self.index = {}
        self.objective = []
        self.lower = []
        self.upper = []
        self.integer = []
        self.rows = []  # (terms, sense, rhs)
        self.minimize = False

    def var(self, name):
        j = self.index.get(name)
        if j is None:
            j = len(self.names)
            self.index[name] = j
            self.names.append(name)
            self.objective.append(0.0)
            self.lower.append(0.0)
            self.upper.append(np.inf)
            self.integer.append(False)
        return j


def parse_lp(text):
    prob = Problem()
    section = "preamble"
    row_terms = []
    row_pending = False  # a constraint row is being accumulated

    def flush_objective():
        for j, c in row_terms:
            prob.objective[j] += c
        row_terms.clear()

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            rest = line[1:].lstrip()
            if rest.startswith("vars:"):
                for name in rest[len("vars:"):].split():
                    prob.var(name)
            continue

        keyword = " ".join(line.lower().split())
        if keyword in SECTION_KEYWORDS:
            if section == "rows" and row_pending:
                raise ValueError("constraint without sense/rhs at section break")
            if section == "objective":
                flush_objective()
            section, minimize = SECTION_KEYWORDS[keyword]
            if minimize is not None:
                prob.minimize = minimize
            continue

        if section in ("objective", "rows"):
            body = line
            m = re.match(r"^(\S+):", body)
            if m:
                if section == "rows" and row_pending:
                    raise ValueError(f"row before {m.group(1)} has no sense/rhs")
                body = body[m.end():]
                if section == "rows":
                    row_pending = True
            tokens = body.split()
            sign = 1.0
            coef = None
            sense = None
            for tok in tokens:
                if sense is not None:
                    prob.rows.append((list(row_terms), sense, float(tok)))
                    row_terms.clear()
                    row_pending = False
                    sense = None
                    sign = 1.0
                    coef = None
                    continue
                if tok == "+":
                    continue
                if tok == "-":
                    sign = -sign
                    continue
                if tok in SENSES:
                    sense = tok
                    continue
                try:
                    value = float(tok)
                except ValueError:
                    j = prob.var(tok)
                    c = sign * (1.0 if coef is None else coef)
                    row_terms.append((j, c))
                    sign = 1.0
                    coef = None
                else:
                    coef = (1.0 if coef is None else coef) * value
            if sense is not None:
                raise ValueError("sense with no right-hand side")
        elif section == "bounds":
            toks = line.split()
            if len(toks) == 2 and toks[1].lower() == "free":
                j = prob.var(toks[0])
                prob.lower[j] = -np.inf
                prob.upper[j] = np.inf
            elif len(toks) == 3:
                name, op, val = toks
                j = prob.var(name)
                v = parse_bound_token(val)
                if op == ">=":
                    prob.lower[j] = v
                elif op == "<=":
                    prob.upper[j] = v
                elif op == "=":
                    prob.lower[j] = v
                    prob.upper[j] = v
                else:
                    raise ValueError(f"bad bound line: {line}")
            elif len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
                j = prob.var(toks[2])
                prob.lower[j] = parse_bound_token(toks[0])
                prob.upper[j] = parse_bound_token(toks[4])
            else:
                raise ValueError(f"bad bound line: {line}")
        elif section == "binaries":
            for name in line.split():
                j = prob.var(name)
                prob.integer[j] = True
                prob.lower[j] = max(prob.lower[j], 0.0)
                if prob.upper[j] == np.inf:
                    prob.upper[j] = 1.0
        elif section == "done":
            raise ValueError(f"content after End: {line}")
        else:
            raise ValueError(f"content before objective: {line}")

    if section == "objective":
        flush_objective()
    return prob


def solve(prob):
    n = len(prob.names)
    c = np.array(prob.objective)
    if not prob.minimize:
        c = -c

    constraints = []
    if prob.rows:
        a = np.zeros((len(prob.rows), n))
        lb = np.full(len(prob.rows), -np.inf)
        ub = np.full(len(prob.rows), np.inf)
        for i, (terms, sense, rhs) in enumerate(prob.rows):
            for j, coef in terms:
                a[i, j] += coef
            if sense in ("<=", "<"):
                ub[i] = rhs
            elif sense in (">=", ">"):
                lb[i] = rhs
            else:
                lb[i] = rhs
                ub[i] = rhs
        constraints.append(LinearConstraint(a, lb, ub))

    res = milp(
        c=c,
        constraints=constraints,
        integrality=np.array(prob.integer, dtype=int),
        bounds=Bounds(np.array(prob.lower), np.array(prob.upper)),
        options={"mip_rel_gap": 0.0},
    )
    if res.status != 0:
        return {"status": "failed", "message": res.message}
    objective = res.fun if prob.minimize else -res.fun
    return {"status": "optimal", "objective": objective}


def main():
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    with open(sys.argv[1]) as fh:
        text = fh.read()
    result = solve(parse_lp(text))
    print(json.dumps(result))
    return 0 if result["status"] == "optimal" else 1


if __name__ == "__main__":
    sys.exit(main())
