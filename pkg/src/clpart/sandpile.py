"""Random-graph sandpile experiments: the empirical side of the measure.

Pipeline per trial: draw an Erdos-Renyi graph, skip it if disconnected
(recorded, not resampled), present the sandpile group by the reduced
Laplacian, and read off the p-Sylow partition from the Smith normal form.

Two Smith-form routes are provided.  ``smith_normal_form`` is the reference:
classical elimination over the integers with minimal-absolute-value pivoting,
arbitrary precision throughout.  ``sylow_valuations_mod_prime_power`` is the
fast path used by experiments: the same elimination carried out modulo p^cap
with minimal-p-valuation pivoting, which determines every valuation below the
cap exactly (residues only ever combine entries of valuation >= the pivot's,
so pivot valuations are the elementary-divisor valuations truncated at cap).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .measures import MassValue, PartitionDistribution
from .partitions import Partition
from .qseries import BoundedReal, DEFAULT_TOLERANCE, as_fraction, fraction_str
from .rng import substream

DEFAULT_VALUATION_CAP = 12  # p^12 exceeds any plausible invariant at desk scale


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        canon = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {e} outside vertex range")
            canon.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(canon))

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        adj = self.adjacency()
        seen = [False] * self.n
        stack = [0]
        seen[0] = True
        found = 1
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    found += 1
                    stack.append(v)
        return found == self.n


def erdos_renyi(n: int, q, stream) -> Graph:
    """G(n, q): each of the binom(n,2) edges included independently.

    Inclusion compares a 64-bit draw k (as k/2^64) against the exact rational
    q, in the fixed lexicographic edge order, so graphs are a pure function
    of the stream state.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    q = as_fraction(q)
    if not (0 < q < 1):
        raise ValueError(f"edge probability must lie strictly in (0,1), got {q}")
    num = q.numerator << 64
    threshold = -((-num) // q.denominator)  # ceil(q * 2^64)
    edges = set()
    for u in range(n):
        for v in range(u + 1, n):
            if stream.next_u64() < threshold:
                edges.add((u, v))
    return Graph(n=n, edges=frozenset(edges))


def reduced_laplacian(g: Graph, root: int | None = None) -> list[list[int]]:
    """Graph Laplacian with the root's row and column deleted.

    Root defaults to the highest-labeled vertex; the Sylow partition does not
    depend on the choice.
    """
    if root is None:
        root = g.n - 1
    if not (0 <= root < g.n):
        raise ValueError(f"root {root} outside vertex range")
    keep = [v for v in range(g.n) if v != root]
    index = {v: i for i, v in enumerate(keep)}
    size = g.n - 1
    m = [[0] * size for _ in range(size)]
    for u, v in g.edges:
        if u != root and v != root:
            m[index[u]][index[v]] -= 1
            m[index[v]][index[u]] -= 1
        if u != root:
            m[index[u]][index[u]] += 1
        if v != root:
            m[index[v]][index[v]] += 1
    return m


def smith_normal_form(matrix) -> list[int]:
    """Diagonal of the Smith normal form of a square integer matrix.

    Classical elimination with pivoting on the entry of minimal absolute
    value; returns nonnegative d_1 | d_2 | ... | d_k (zeros, if any, at the
    end).  Arbitrary-precision integers throughout.
    """
    m = [[int(x) for x in row] for row in matrix]
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("matrix must be square")

    for t in range(n):
        while True:
            pivot = _min_abs_entry(m, t)
            if pivot is None:
                break  # submatrix all zero; trailing diagonal stays 0
            pi, pj = pivot
            if pi != t:
                m[t], m[pi] = m[pi], m[t]
            if pj != t:
                for row in m:
                    row[t], row[pj] = row[pj], row[t]
            clean = True
            d = m[t][t]
            for i in range(t + 1, n):
                if m[i][t]:
                    qt = m[i][t] // d
                    if qt:
                        mi, mt = m[i], m[t]
                        for j in range(t, n):
                            mi[j] -= qt * mt[j]
                    if m[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if m[t][j]:
                    qt = m[t][j] // d
                    if qt:
                        for row in m:
                            row[j] -= qt * row[t]
                    if m[t][j]:
                        clean = False
            if not clean:
                continue  # remainders became smaller pivot candidates
            offender = _non_divisible_entry(m, t, d)
            if offender is None:
                break
            # pull the non-divisible entry into row t; next sweep shrinks the pivot
            oi = offender
            mt, mo = m[t], m[oi]
            for j in range(t, n):
                mt[j] += mo[j]
    diag = [abs(m[i][i]) for i in range(n)]
    for i in range(len(diag) - 1):  # cheap structural sanity: divisibility chain
        if diag[i] == 0:
            if diag[i + 1] != 0:
                raise ArithmeticError("zero before nonzero in Smith diagonal")
        elif diag[i + 1] % diag[i]:
            raise ArithmeticError(f"divisibility broken in Smith diagonal {diag}")
    return diag


def _min_abs_entry(m, t):
    best = None
    best_abs = None
    for i in range(t, len(m)):
        row = m[i]
        for j in range(t, len(m)):
            x = row[j]
            if x:
                a = -x if x < 0 else x
                if best_abs is None or a < best_abs:
                    best, best_abs = (i, j), a
                    if a == 1:
                        return best
    return best


def _non_divisible_entry(m, t, d):
    for i in range(t + 1, len(m)):
        row = m[i]
        for j in range(t + 1, len(m)):
            if row[j] % d:
                return i
    return None


def p_sylow_partition(matrix, p: int, cap: int = DEFAULT_VALUATION_CAP):
    """Partition of p-adic valuations of the Smith diagonal (reference route).

    Returns (partition, capped).  Valuations are computed exactly up to
    ``cap``; anything >= cap is recorded as cap with capped=True.  A singular
    matrix raises: it means a disconnected graph slipped through upstream.
    """
    if p < 2:
        raise ValueError("p must be a prime >= 2")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    diag = smith_normal_form(matrix)
    if any(d == 0 for d in diag):
        raise ValueError("singular matrix: sandpile group undefined (disconnected graph?)")
    parts = []
    capped = False
    for d in diag:
        v = 0
        while v < cap and d % p == 0:
            d //= p
            v += 1
        if v == cap:
            capped = True
        if v:
            parts.append(v)
    parts.sort(reverse=True)
    return Partition(parts), capped


def sylow_valuations_mod_prime_power(matrix, p: int, cap: int = DEFAULT_VALUATION_CAP):
    """Fast path: same partition as p_sylow_partition, via elimination mod p^cap.

    Pivots on minimal p-valuation; entries are small residues, so this is the
    route experiments use.  Cannot distinguish valuation >= cap from exactly
    cap (both report cap, capped=True), matching the reference contract.
    """
    if p < 2:
        raise ValueError("p must be a prime >= 2")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    mod = p**cap
    m = [[int(x) % mod for x in row] for row in matrix]
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("matrix must be square")

    vals = []
    for t in range(n):
        best = None  # (valuation, i, j)
        for i in range(t, n):
            row = m[i]
            for j in range(t, n):
                x = row[j]
                if x:
                    v = 0
                    while x % p == 0:
                        x //= p
                        v += 1
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            vals.extend([cap] * (n - t))
            break
        v, pi, pj = best
        if pi != t:
            m[t], m[pi] = m[pi], m[t]
        if pj != t:
            for row in m:
                row[t], row[pj] = row[pj], row[t]
        pv = p**v
        unit = m[t][t] // pv
        inv = pow(unit, -1, mod)
        mt = m[t]
        for i in range(t + 1, n):
            x = m[i][t]
            if x:
                c = (x // pv) * inv % mod
                mi = m[i]
                for j in range(t, n):
                    mi[j] = (mi[j] - c * mt[j]) % mod
        # column clearing only touches row t now (the column below is zero)
        for j in range(t + 1, n):
            mt[j] = 0
        vals.append(v)

    parts = [v for v in vals if v > 0]
    parts.sort(reverse=True)
    return Partition(parts), any(v >= cap for v in vals)


@dataclass(frozen=True)
class GraphSampleRecord:
    """One trial: graph parameters, connectivity, and the extracted partition.

    ``partition`` is present exactly when the graph was connected;
    ``valuation_capped`` marks a valuation that hit the cap.
    """

    n: int
    q: Fraction
    seed: int
    trial: int
    connected: bool
    partition: Partition | None
    valuation_capped: bool

    def __post_init__(self):
        if (self.partition is None) == self.connected:
            raise ValueError("partition must be present iff the graph was connected")


def sample_graph_record(n: int, q, p: int, seed: int, trial: int,
                        cap: int = DEFAULT_VALUATION_CAP, method: str = "plocal") -> GraphSampleRecord:
    """Run a single experiment trial, deterministically from (seed, trial)."""
    if method not in ("plocal", "snf"):
        raise ValueError(f"unknown method {method!r} (expected plocal or snf)")
    q = as_fraction(q)
    g = erdos_renyi(n, q, substream(seed, trial))
    if not g.is_connected():
        return GraphSampleRecord(n=n, q=q, seed=seed, trial=trial,
                                 connected=False, partition=None, valuation_capped=False)
    mat = reduced_laplacian(g)
    if method == "snf":
        lam, capped = p_sylow_partition(mat, p, cap)
    else:
        lam, capped = sylow_valuations_mod_prime_power(mat, p, cap)
    return GraphSampleRecord(n=n, q=q, seed=seed, trial=trial,
                             connected=True, partition=lam, valuation_capped=capped)


@dataclass
class ExperimentResult:
    distribution: PartitionDistribution
    discarded_disconnected: int
    capped_count: int

    def to_json_dict(self, tolerance=DEFAULT_TOLERANCE) -> dict:
        out = self.distribution.to_json_dict(tolerance)
        out["discarded_disconnected"] = self.discarded_disconnected
        out["capped"] = self.capped_count
        return out


def run_experiment(n: int, q, p: int, trials: int, seed: int,
                   cap: int = DEFAULT_VALUATION_CAP, method: str = "plocal") -> ExperimentResult:
    """Sample graphs and tabulate p-Sylow partitions among connected ones.

    Deterministic given (seed, trial index); disconnected graphs are counted
    and skipped, so frequencies condition on connectivity.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    q = as_fraction(q)
    counts: dict[Partition, int] = {}
    discarded = 0
    capped_count = 0
    for t in range(trials):
        record = sample_graph_record(n, q, p, seed, t, cap=cap, method=method)
        if not record.connected:
            discarded += 1
            continue
        if record.valuation_capped:
            capped_count += 1
        counts[record.partition] = counts.get(record.partition, 0) + 1

    connected = trials - discarded
    entries = {
        lam: MassValue(Fraction(c, connected)) for lam, c in counts.items()
    }
    dist = PartitionDistribution(
        p=p,
        measure="graph-empirical",
        params={"n": n, "q": fraction_str(q), "trials": trials, "seed": seed,
                "cap": cap, "method": method},
        entries=entries,
        tail_mass=BoundedReal.exact(0),
        counts=counts,
    )
    return ExperimentResult(dist, discarded, capped_count)


def tv_distance(d1: PartitionDistribution, d2: PartitionDistribution,
                tolerance=DEFAULT_TOLERANCE) -> BoundedReal:
    """Total variation distance between two partition tables, as an enclosure.

    Half the L1 distance over the union of supports; the unresolvable tail
    contribution is bounded by (tail1 + tail2)/2 and folded into the radius.
    """
    support = set(d1.entries) | set(d2.entries)
    zero = BoundedReal.exact(0)
    acc = BoundedReal.exact(0)
    for lam in support:
        e1 = d1.entries[lam].enclosure(tolerance) if lam in d1.entries else zero
        e2 = d2.entries[lam].enclosure(tolerance) if lam in d2.entries else zero
        acc = acc + (e1 - e2).abs_enclosure()
    half = acc * Fraction(1, 2)
    tail_bound = (d1.tail_mass.upper + d2.tail_mass.upper) / 2
    return BoundedReal(half.mid, half.rad + tail_bound)


def write_edge_list(g: Graph, path) -> None:
    """Text format: header "<n> <edge count>", then one "u v" line per edge."""
    lines = [f"{g.n} {len(g.edges)}"]
    for u, v in sorted(g.edges):
        lines.append(f"{u} {v}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError("edge list needs a '<n> <count>' header")
    n, count = int(tokens[0]), int(tokens[1])
    rest = tokens[2:]
    if len(rest) != 2 * count:
        raise ValueError(f"expected {count} edges, found {len(rest) // 2}")
    edges = set()
    for i in range(count):
        edges.add((int(rest[2 * i]), int(rest[2 * i + 1])))
    return Graph(n=n, edges=frozenset(edges))
