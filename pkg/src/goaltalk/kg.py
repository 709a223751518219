"""Knowledge-graph storage: topic/relation vocabularies, triples, adjacency.

The graph is immutable after construction. Traversal treats edges as
undirected; duplicate triples and self-loops are dropped on load.
"""

from dataclasses import dataclass, field

import numpy as np

from goaltalk.errors import ParseError, TopicNotFoundError
from goaltalk import kernels


@dataclass(frozen=True)
class Triple:
    head: int
    relation: int
    tail: int


@dataclass
class KnowledgeGraph:
    labels: list            # topic id -> label
    relation_labels: list   # relation id -> label
    triples: set            # set of Triple
    adjacency: list         # topic id -> sorted list of neighbor ids
    label_to_id: dict = field(default_factory=dict)

    # CSR form consumed by the kernels, built lazily once.
    _indptr: np.ndarray = None
    _indices: np.ndarray = None

    def __post_init__(self):
        if not self.label_to_id:
            self.label_to_id = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def n_topics(self):
        return len(self.labels)

    @property
    def n_relations(self):
        return len(self.relation_labels)

    def topic_id(self, label):
        try:
            return self.label_to_id[label]
        except KeyError:
            raise TopicNotFoundError(f"unknown topic label {label!r}") from None

    def check_topic(self, topic):
        if not 0 <= topic < self.n_topics:
            raise TopicNotFoundError(f"topic id {topic} out of range 0..{self.n_topics - 1}")

    def neighbors(self, topic):
        self.check_topic(topic)
        return self.adjacency[topic]

    def csr(self):
        if self._indptr is None:
            indptr = np.zeros(self.n_topics + 1, dtype=np.int64)
            for i, adj in enumerate(self.adjacency):
                indptr[i + 1] = indptr[i] + len(adj)
            indices = np.empty(indptr[-1], dtype=np.int32)
            for i, adj in enumerate(self.adjacency):
                indices[indptr[i]:indptr[i + 1]] = adj
            self._indptr = indptr
            self._indices = indices
        return self._indptr, self._indices


def _build_graph(raw_triples, topic_labels, relation_labels):
    n = len(topic_labels)
    adj_sets = [set() for _ in range(n)]
    triples = set()
    for h, r, t in raw_triples:
        triples.add(Triple(h, r, t))
        if h != t:
            adj_sets[h].add(t)
            adj_sets[t].add(h)
    adjacency = [sorted(s) for s in adj_sets]
    return KnowledgeGraph(topic_labels, relation_labels, triples, adjacency)


def load_triples(source):
    """Parse TAB-separated `head relation tail` lines into a KnowledgeGraph.

    `source` is an iterable of lines (open file, list, ...). Blank lines and
    `#` comments are ignored. Vocabulary ids follow first appearance order.
    """
    topic_ids = {}
    topic_labels = []
    rel_ids = {}
    rel_labels = []
    raw = []

    def topic(label):
        if label not in topic_ids:
            topic_ids[label] = len(topic_labels)
            topic_labels.append(label)
        return topic_ids[label]

    def rel(label):
        if label not in rel_ids:
            rel_ids[label] = len(rel_labels)
            rel_labels.append(label)
        return rel_ids[label]

    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 TAB-separated fields, got {len(fields)}", lineno)
        h, r, t = (f.strip() for f in fields)
        if not h or not r or not t:
            raise ParseError("empty field in triple", lineno)
        raw.append((topic(h), rel(r), topic(t)))

    if not raw:
        raise ParseError("no triples in stream")
    return _build_graph(raw, topic_labels, rel_labels)


def one_hop_candidates(graph, anchors, exclude):
    """Union of the anchors' neighbors minus `exclude`, sorted ascending.

    If exclusion empties the set, it is dropped and the raw union returned;
    an empty raw union yields an empty list.
    """
    if not anchors:
        raise ValueError("anchors must be non-empty")
    union = set()
    for a in anchors:
        graph.check_topic(a)
        union.update(graph.adjacency[a])
    kept = union - set(exclude)
    if kept:
        return sorted(kept)
    return sorted(union)


def khop_ball(graph, center, radius):
    """Map of topic -> exact hop distance for all topics within `radius`."""
    graph.check_topic(center)
    if radius < 0:
        raise ValueError("radius must be non-negative")
    dist = ball_array(graph, center, radius)
    inside = np.flatnonzero(dist >= 0)
    return {int(i): int(dist[i]) for i in inside}


def ball_array(graph, center, radius):
    """Kernel-backed ball as an int32 distance array (-1 outside the ball)."""
    graph.check_topic(center)
    indptr, indices = graph.csr()
    return kernels.bfs_ball(indptr, indices, center, radius)
