"""Shared corpus builders for the test suite. Everything is seeded, so the
corpora are identical across runs."""

import itertools

from ilkit.semantics import VeltmanFrame
from ilkit.syntax import (
    And,
    Atom,
    BOT,
    Box,
    Implies,
    Neg,
    Or,
    Rhd,
    modal_depth,
)


def random_formula(rng, depth=2, atoms=("p", "q", "r"), allow_rhd=True):
    """Random AST of modal depth <= depth over the given atoms."""
    if depth == 0 or rng.random() < 0.3:
        return Atom(rng.choice(atoms)) if rng.random() < 0.85 else BOT
    k = rng.randrange(6 if allow_rhd else 5)
    a = random_formula(rng, depth - 1, atoms, allow_rhd)
    b = random_formula(rng, depth - 1, atoms, allow_rhd)
    if k == 0:
        return Implies(a, b)
    if k == 1:
        return Box(a)
    if k == 2:
        return Neg(a)
    if k == 3:
        return And(a, b)
    if k == 4:
        return Or(a, b)
    return Rhd(a, b)


def transitive_closure_pairs(R):
    R = set(R)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(R):
            for (b2, c) in list(R):
                if b == b2 and (a, c) not in R:
                    R.add((a, c))
                    changed = True
    return R


def random_transitive_dag(rng, worlds, p_edge=0.5):
    R = set()
    for i in range(len(worlds)):
        for j in range(i + 1, len(worlds)):
            if rng.random() < p_edge:
                R.add((worlds[i], worlds[j]))
    return transitive_closure_pairs(R)


def enumerate_il_frames(n_max):
    """Every IL frame (up to world naming w0..wk) with at most n_max worlds."""
    out = []
    for n in range(1, n_max + 1):
        worlds = [f"w{i}" for i in range(n)]
        pairs = [(a, b) for a in worlds for b in worlds if a != b]
        for bits in itertools.product([0, 1], repeat=len(pairs)):
            R = {pr for pr, b in zip(pairs, bits) if b}
            if any((b, a) in R for (a, b) in R):
                continue
            if not all((a, c) in R for (a, b) in R for (b2, c) in R if b2 == b):
                continue
            base = {(x, y, y) for (x, y) in R} | {
                (x, y, z) for (x, y) in R for (y2, z) in R if y2 == y
            }
            opt = sorted(
                (x, y, z)
                for (x, y) in R
                for (x2, z) in R
                if x2 == x and (x, y, z) not in base
            )
            for obits in itertools.product([0, 1], repeat=len(opt)):
                S = set(base) | {t for t, b in zip(opt, obits) if b}
                closed = all(
                    (x, u, w) in S
                    for (x, u, v) in S
                    for (x2, v2, w) in S
                    if x2 == x and v2 == v
                )
                if closed:
                    out.append(VeltmanFrame.make(worlds, R, S))
    return out


def all_gl_formulas(max_nodes, max_modal_depth=2):
    """Every AST over {bot, p} built from -> and [] with at most max_nodes
    nodes and the given modal depth."""
    p = Atom("p")
    by_size = {1: [BOT, p]}
    for n in range(2, max_nodes + 1):
        out = []
        for f in by_size.get(n - 1, ()):
            out.append(Box(f))
        for i in range(1, n - 1):
            for a in by_size.get(i, ()):
                for b in by_size.get(n - 1 - i, ()):
                    out.append(Implies(a, b))
        by_size[n] = out
    all_f = [f for fs in by_size.values() for f in fs]
    return [f for f in all_f if modal_depth(f) <= max_modal_depth]
