"""Multi-threaded benchmark graph pipeline.

Steps 1-2 (assignment, degree split, task queue) and 4-5 (union, collision
rewiring) run on the calling thread. Step 3 generates the background graph
and every community graph on a pool of worker threads. Every task draws from
its own generator seeded from ``(master seed, task id)``, and results land in
slots indexed by task id, so the output does not depend on thread count or
scheduling.
"""

from __future__ import annotations

import logging
import math
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import assignment as asg
from .assignment import DegreeSplit, Membership, MixingConfig, Variant
from .generator import (DEFAULT_MAX_ROUNDS, GraphKernel, SimpleGraph, _member,
                        generate, repair_rounds)
from .sampling import (CommunitySizes, DegreeSequence, PowerLawSpec,
                       sample_community_sizes, sample_degrees)

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

BACKGROUND_TASK = 0
# reserved stream ids, outside the range of real task ids
MERGE_STREAM = -1
ASSIGN_STREAM = -2
SPLIT_STREAM = -3
QUEUE_STREAM = -4
DEGREE_STREAM = -5
SIZE_STREAM = -6


class GenerationError(RuntimeError):
    """A generation task failed; ``task_id`` names it (-1 is the merge stage)."""

    def __init__(self, task_id: int, cause: Exception):
        where = "merge" if task_id == MERGE_STREAM else (
            "background" if task_id == BACKGROUND_TASK else f"community {task_id}")
        super().__init__(f"task {task_id} ({where}): {cause}")
        self.task_id = task_id
        self.cause = cause


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, task_id: int) -> int:
    """Stateless 64-bit seed for one task."""
    return splitmix64((master_seed & _MASK64) ^ (((task_id + 1) * _GOLDEN) & _MASK64))


def task_rng(master_seed: int, task_id: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, task_id))


@dataclass(frozen=True)
class GenParams:
    n: int
    degree_spec: PowerLawSpec
    community_spec: PowerLawSpec
    mix: MixingConfig
    kernel: GraphKernel = GraphKernel.CONFIGURATION_MODEL
    seed: int = 42
    threads: int = 1
    max_rewire_rounds: int = DEFAULT_MAX_ROUNDS

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.max_rewire_rounds < 0:
            raise ValueError("max_rewire_rounds must be >= 0")
        object.__setattr__(self, "kernel", GraphKernel(self.kernel))

    @classmethod
    def with_defaults(cls, n: int, xi: float = 0.5, variant="global", kernel="cm",
                      seed: int = 42, threads: int = 1, gamma: float = 2.5,
                      delta: int = 5, max_degree: int | None = None, beta: float = 1.5,
                      s_min: int | None = None, s_max: int | None = None,
                      max_rewire_rounds: int = DEFAULT_MAX_ROUNDS) -> GenParams:
        """Parameters of the property experiments, scaled with ``n``."""
        max_degree = math.isqrt(n) if max_degree is None else max_degree
        s_min = max(1, math.ceil(0.005 * n)) if s_min is None else s_min
        s_max = max(s_min, math.floor(0.2 * n)) if s_max is None else s_max
        return cls(n=n,
                   degree_spec=PowerLawSpec(gamma, delta, max_degree),
                   community_spec=PowerLawSpec(beta, s_min, s_max),
                   mix=MixingConfig(xi, Variant(variant)),
                   kernel=GraphKernel(kernel), seed=seed, threads=threads,
                   max_rewire_rounds=max_rewire_rounds)


@dataclass(frozen=True, eq=False)
class GenTask:
    task_id: int
    nodes: np.ndarray
    degrees: np.ndarray
    task_seed: int


@dataclass(eq=False)
class BenchmarkGraph:
    graph: SimpleGraph
    membership: Membership
    split: DegreeSplit
    params: GenParams
    degrees: DegreeSequence
    collisions: int = 0
    task_edges: dict = field(default_factory=dict)


def sample_inputs(params: GenParams) -> tuple[DegreeSequence, CommunitySizes]:
    """Degree sequence and community sizes drawn from their own seeded streams."""
    degrees = sample_degrees(params.n, params.degree_spec, task_rng(params.seed, DEGREE_STREAM))
    sizes = sample_community_sizes(params.n, params.community_spec,
                                   task_rng(params.seed, SIZE_STREAM))
    return degrees, sizes


def build_tasks(split: DegreeSplit, membership: Membership,
                params: GenParams) -> tuple[list[GenTask], list[int]]:
    """Tasks indexed by id, and the processing queue.

    Task 0 is the background graph on all nodes and always heads the queue;
    task ``l`` (1-based) is community ``l - 1``. Community tasks follow in an
    order shuffled by the master seed.
    """
    n = membership.n
    tasks = [GenTask(BACKGROUND_TASK, np.arange(n), split.background,
                     derive_seed(params.seed, BACKGROUND_TASK))]
    for c, members in enumerate(membership.community_members):
        tid = c + 1
        tasks.append(GenTask(tid, members, split.internal[members],
                             derive_seed(params.seed, tid)))
    order = task_rng(params.seed, QUEUE_STREAM).permutation(np.arange(1, len(tasks)))
    return tasks, [BACKGROUND_TASK] + order.tolist()


def _run_task(task: GenTask, n: int, params: GenParams) -> np.ndarray:
    """Sorted global edge keys of one task's simple graph."""
    rng = np.random.default_rng(task.task_seed)
    local = generate(params.kernel, task.degrees, rng, params.max_rewire_rounds)
    m = task.nodes
    # members are ascending, so the mapped keys stay sorted
    return m[local.u] * n + m[local.v]


def run_tasks(tasks: list[GenTask], order: list[int], n: int,
              params: GenParams) -> list[np.ndarray]:
    """Producer-consumer pool over the FIFO queue; results indexed by task id."""
    results: list = [None] * len(tasks)
    errors: dict[int, Exception] = {}
    work: queue.SimpleQueue = queue.SimpleQueue()
    for tid in order:
        work.put(tid)

    def worker():
        while True:
            try:
                tid = work.get_nowait()
            except queue.Empty:
                return
            try:
                results[tid] = _run_task(tasks[tid], n, params)
            except Exception as exc:  # reported per task after the barrier
                errors[tid] = exc

    nthreads = min(params.threads, len(tasks))
    if nthreads == 1:
        worker()
    else:
        pool = [threading.Thread(target=worker, name=f"abcde-worker-{i}")
                for i in range(nthreads)]
        for t in pool:
            t.start()
        for t in pool:
            t.join()
    if errors:
        tid = min(errors)
        raise GenerationError(tid, errors[tid]) from errors[tid]
    return results


def resolve_collisions(community_keys: np.ndarray, background_keys: np.ndarray, n: int,
                       rng: np.random.Generator,
                       max_rounds: int = DEFAULT_MAX_ROUNDS) -> tuple[SimpleGraph, int]:
    """Union plus collision rewiring; returns the graph and the collision count.

    Both key arrays must be sorted and individually simple. Background edges
    that duplicate a community edge are re-paired together with an equal
    number of other background edges until no edge collides.
    """
    hit = _member(community_keys, background_keys)
    collisions = int(hit.sum())
    good = background_keys[~hit]
    bad = background_keys[hit]
    good, _ = repair_rounds(good, bad // n, bad % n, n, rng, max_rounds,
                            forbidden=community_keys, what="collisions")
    keys = np.sort(np.concatenate([community_keys, good]))
    return SimpleGraph.from_keys(n, keys), collisions


def merge_and_resolve(community_graphs: list[SimpleGraph], background: SimpleGraph,
                      rng: np.random.Generator,
                      max_rounds: int = DEFAULT_MAX_ROUNDS) -> SimpleGraph:
    """Union of community graphs (disjoint node sets) and the background graph."""
    n = background.n
    parts = [g.keys() for g in community_graphs]
    community_keys = np.sort(np.concatenate(parts)) if parts else np.empty(0, np.int64)
    graph, _ = resolve_collisions(community_keys, background.keys(), n, rng, max_rounds)
    return graph


def generate_parallel(params: GenParams, degrees: DegreeSequence,
                      sizes: CommunitySizes) -> BenchmarkGraph:
    """Run the whole pipeline for pre-built sequences."""
    if len(degrees) != params.n:
        raise ValueError(f"degree sequence has {len(degrees)} entries, expected n={params.n}")
    if sizes.n != params.n:
        raise ValueError(f"community sizes sum to {sizes.n}, expected n={params.n}")
    n = params.n
    membership = asg.assign_communities(degrees, sizes, params.mix,
                                        task_rng(params.seed, ASSIGN_STREAM))
    split = asg.split_degrees(degrees, membership, params.mix,
                              task_rng(params.seed, SPLIT_STREAM))
    tasks, order = build_tasks(split, membership, params)
    results = run_tasks(tasks, order, n, params)

    community_keys = np.sort(np.concatenate(results[1:]))
    try:
        graph, collisions = resolve_collisions(
            community_keys, results[BACKGROUND_TASK], n,
            task_rng(params.seed, MERGE_STREAM), params.max_rewire_rounds)
    except Exception as exc:
        raise GenerationError(MERGE_STREAM, exc) from exc
    log.debug("merged %d edges, %d collisions", graph.edge_count, collisions)
    return BenchmarkGraph(graph, membership, split, params, degrees, collisions,
                          {tid: len(r) for tid, r in enumerate(results)})


def generate_benchmark(params: GenParams) -> BenchmarkGraph:
    degrees, sizes = sample_inputs(params)
    return generate_parallel(params, degrees, sizes)


def write_edges(path, graph: SimpleGraph) -> None:
    """``u<TAB>v`` per line, 1-based, ``u < v``, sorted by ``(u, v)``."""
    out = np.column_stack([graph.u + 1, graph.v + 1])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if len(out):
            np.savetxt(fh, out, fmt="%d", delimiter="\t")


def read_edges(path, n: int | None = None) -> SimpleGraph:
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ValueError(f"{path}: line {lineno}: expected 'u<TAB>v'")
        try:
            rows.append((int(parts[0]) - 1, int(parts[1]) - 1))
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-integer node id") from None
    top = max((max(r) for r in rows), default=-1) + 1
    return SimpleGraph.from_edges(max(top, n or 0), rows)


def write_outputs(result: BenchmarkGraph, edge_path, membership_path) -> None:
    write_edges(edge_path, result.graph)
    asg.write_membership(membership_path, result.membership)
